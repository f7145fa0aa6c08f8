//! Overlapping-model patterns and their adjacency table.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::raster::{Label, LabelGrid};

/// Which square symmetries to add when extracting patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Symmetry {
    pub rotations: bool,
    pub reflections: bool,
}

/// Distinct `n x n` windows of a reference with their occurrence counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    n: usize,
    patterns: Vec<Vec<Label>>,
    weights: Vec<u64>,
    symmetry: Symmetry,
    periodic_input: bool,
    index: HashMap<Vec<Label>, usize>,
}

impl PatternSet {
    /// Assembles a pattern set directly. Patterns must be distinct `n x n`
    /// row-major arrays with positive weights.
    pub fn from_parts(n: usize, patterns: Vec<Vec<Label>>, weights: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("pattern width must be at least 1"));
        }
        if patterns.is_empty() || patterns.len() != weights.len() {
            return Err(Error::invalid(
                "need one positive weight per pattern, and at least one pattern",
            ));
        }
        if weights.contains(&0) {
            return Err(Error::invalid("pattern weights must be positive"));
        }
        let mut index = HashMap::new();
        for (i, p) in patterns.iter().enumerate() {
            if p.len() != n * n {
                return Err(Error::invalid(format!(
                    "pattern {i} has {} cells, expected {}",
                    p.len(),
                    n * n
                )));
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::invalid(format!("pattern {i} is a duplicate")));
            }
        }
        Ok(Self {
            n,
            patterns,
            weights,
            symmetry: Symmetry::default(),
            periodic_input: false,
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Vec<Label>] {
        &self.patterns
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn periodic_input(&self) -> bool {
        self.periodic_input
    }

    pub fn position(&self, window: &[Label]) -> Option<usize> {
        self.index.get(window).copied()
    }

    pub fn contains(&self, window: &[Label]) -> bool {
        self.index.contains_key(window)
    }
}

fn rotate(p: &[Label], n: usize) -> Vec<Label> {
    let mut out = vec![0; n * n];
    for y in 0..n {
        for x in 0..n {
            out[y * n + x] = p[(n - 1 - x) * n + y];
        }
    }
    out
}

fn reflect(p: &[Label], n: usize) -> Vec<Label> {
    let mut out = vec![0; n * n];
    for y in 0..n {
        for x in 0..n {
            out[y * n + x] = p[y * n + (n - 1 - x)];
        }
    }
    out
}

/// Symmetry variants in fixed order: rotations by 0/90/180/270 degrees, then
/// their mirror images.
fn variants(p: Vec<Label>, n: usize, sym: Symmetry) -> Vec<Vec<Label>> {
    let mut base = vec![p];
    if sym.rotations {
        for i in 0..3 {
            let next = rotate(&base[i], n);
            base.push(next);
        }
    }
    if sym.reflections {
        let mirrored: Vec<_> = base.iter().map(|v| reflect(v, n)).collect();
        base.extend(mirrored);
    }
    base
}

/// Collects every `n x n` window of `grid`, expanded by `symmetry` and
/// deduplicated in first-seen order with summed counts.
pub fn extract_patterns(
    grid: &LabelGrid,
    n: usize,
    periodic_input: bool,
    symmetry: Symmetry,
) -> Result<PatternSet> {
    if n == 0 {
        return Err(Error::invalid("pattern width must be at least 1"));
    }
    if grid.blank_count() > 0 {
        return Err(Error::invalid(
            "reference for pattern extraction contains blank cells",
        ));
    }
    let (w, h) = grid.dims();
    if !periodic_input && (w < n || h < n) {
        return Err(Error::invalid(format!(
            "reference {w}x{h} is smaller than pattern width {n} (non-periodic input)"
        )));
    }
    let (ax, ay) = if periodic_input {
        (w, h)
    } else {
        (w - n + 1, h - n + 1)
    };

    let mut index: HashMap<Vec<Label>, usize> = HashMap::new();
    let mut patterns = Vec::new();
    let mut weights = Vec::new();
    for y in 0..ay {
        for x in 0..ax {
            let mut window = Vec::with_capacity(n * n);
            for dy in 0..n {
                for dx in 0..n {
                    window.push(grid.get((x + dx) % w, (y + dy) % h));
                }
            }
            for v in variants(window, n, symmetry) {
                match index.get(&v) {
                    Some(&i) => weights[i] += 1,
                    None => {
                        index.insert(v.clone(), patterns.len());
                        patterns.push(v);
                        weights.push(1);
                    }
                }
            }
        }
    }
    Ok(PatternSet {
        n,
        patterns,
        weights,
        symmetry,
        periodic_input,
        index,
    })
}

/// True iff `q`, placed at offset `(dx, dy)` from `p`, agrees with `p` on
/// every overlapping cell. Offsets with no overlap are trivially compatible.
pub fn overlap_compatible(p: &[Label], q: &[Label], n: usize, dx: isize, dy: isize) -> bool {
    let n_i = n as isize;
    let (x0, x1) = (dx.max(0), (n_i + dx).min(n_i));
    let (y0, y1) = (dy.max(0), (n_i + dy).min(n_i));
    for y in y0..y1 {
        for x in x0..x1 {
            let a = p[(y * n_i + x) as usize];
            let b = q[((y - dy) * n_i + (x - dx)) as usize];
            if a != b {
                return false;
            }
        }
    }
    true
}

/// Unit offsets in the order left, up, right, down; `opposite(d) = (d + 2) % 4`.
pub const DIRECTIONS: [(isize, isize); 4] = [(-1, 0), (0, -1), (1, 0), (0, 1)];

#[inline]
pub fn opposite(d: usize) -> usize {
    (d + 2) % 4
}

/// For each direction `d` and pattern `p`, the patterns that may sit at the
/// neighbouring cell in direction `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    allowed: [Vec<Vec<u32>>; 4],
}

impl Adjacency {
    /// Builds the table by hashing overlap regions, so each direction costs
    /// one pass over the patterns plus the output size.
    pub fn build(ps: &PatternSet) -> Self {
        let n = ps.n as isize;
        let allowed = DIRECTIONS.map(|(dx, dy)| {
            let (x0, x1) = (dx.max(0), (n + dx).min(n));
            let (y0, y1) = (dy.max(0), (n + dy).min(n));
            let region = |p: &[Label], ox: isize, oy: isize| -> Vec<Label> {
                let mut key = Vec::new();
                for y in y0..y1 {
                    for x in x0..x1 {
                        key.push(p[((y - oy) * n + (x - ox)) as usize]);
                    }
                }
                key
            };
            let mut by_key: HashMap<Vec<Label>, Vec<u32>> = HashMap::new();
            for (qi, q) in ps.patterns.iter().enumerate() {
                by_key.entry(region(q, dx, dy)).or_default().push(qi as u32);
            }
            ps.patterns
                .iter()
                .map(|p| by_key.get(&region(p, 0, 0)).cloned().unwrap_or_default())
                .collect()
        });
        Self { allowed }
    }

    pub fn allowed(&self, direction: usize, pattern: usize) -> &[u32] {
        &self.allowed[direction][pattern]
    }

    pub fn pattern_count(&self) -> usize {
        self.allowed[0].len()
    }
}
