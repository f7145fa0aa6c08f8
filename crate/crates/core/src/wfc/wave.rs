//! Wave state, observation, and arc-consistency propagation.
//!
//! Each cell keeps a candidate bitmap over patterns plus, per candidate and
//! direction, a count of neighbour candidates that still support it. Bans are
//! appended to a trail that doubles as the propagation queue; undoing a suffix
//! of the trail restores the exact earlier state, which is what chronological
//! backtracking needs.

use super::pattern::{opposite, Adjacency, PatternSet, DIRECTIONS};
use crate::raster::{Label, LabelGrid};
use crate::rng::SeededRng;

/// Magnitude of the per-cell entropy tie-breaking noise.
pub const ENTROPY_NOISE: f64 = 1e-6;

/// Some cell lost its last candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contradiction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub cell: usize,
    pub pattern: usize,
}

/// Pattern set plus the data derived from it once per run.
#[derive(Debug, Clone)]
pub struct WfcModel {
    patterns: PatternSet,
    adjacency: Adjacency,
    weights: Vec<f64>,
    weight_log_weights: Vec<f64>,
}

impl WfcModel {
    pub fn new(patterns: PatternSet) -> Self {
        let adjacency = Adjacency::build(&patterns);
        let weights: Vec<f64> = patterns.weights().iter().map(|&w| w as f64).collect();
        let weight_log_weights = weights.iter().map(|w| w * w.ln()).collect();
        Self {
            patterns,
            adjacency,
            weights,
            weight_log_weights,
        }
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }
}

#[derive(Debug, Clone)]
pub struct WaveState<'m> {
    model: &'m WfcModel,
    width: usize,
    height: usize,
    periodic: bool,
    wave: Vec<bool>,
    supports: Vec<u32>,
    counts: Vec<u32>,
    sum_weights: Vec<f64>,
    sum_weight_logs: Vec<f64>,
    noise: Vec<f64>,
    trail: Vec<(u32, u32)>,
    head: usize,
    contradiction: bool,
}

impl<'m> WaveState<'m> {
    /// Fully unconstrained wave. Call [`WaveState::initialize`] before observing
    /// so that patterns with no possible neighbour are pruned.
    pub fn new(
        model: &'m WfcModel,
        width: usize,
        height: usize,
        periodic: bool,
        rng: &mut SeededRng,
    ) -> Self {
        let p = model.patterns.len();
        let cells = width * height;
        let mut supports = vec![0u32; cells * p * 4];
        for c in 0..cells {
            for pat in 0..p {
                for d in 0..4 {
                    supports[(c * p + pat) * 4 + d] = model.adjacency.allowed(d, pat).len() as u32;
                }
            }
        }
        let total_w: f64 = model.weights.iter().sum();
        let total_wl: f64 = model.weight_log_weights.iter().sum();
        let noise = (0..cells).map(|_| rng.unit() * ENTROPY_NOISE).collect();
        Self {
            model,
            width,
            height,
            periodic,
            wave: vec![true; cells * p],
            supports,
            counts: vec![p as u32; cells],
            sum_weights: vec![total_w; cells],
            sum_weight_logs: vec![total_wl; cells],
            noise,
            trail: Vec::new(),
            head: 0,
            contradiction: false,
        }
    }

    /// Bans patterns lacking any compatible neighbour in an existing direction,
    /// then propagates.
    pub fn initialize(&mut self) -> Result<(), Contradiction> {
        let p = self.model.patterns.len();
        for c in 0..self.cell_count() {
            for d in 0..4 {
                if self.neighbor(c, d).is_none() {
                    continue;
                }
                for pat in 0..p {
                    if self.wave[c * p + pat] && self.model.adjacency.allowed(d, pat).is_empty() {
                        self.ban(c, pat);
                    }
                }
            }
        }
        self.propagate()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn is_contradiction(&self) -> bool {
        self.contradiction
    }

    pub fn is_solved(&self) -> bool {
        !self.contradiction && self.counts.iter().all(|&c| c == 1)
    }

    pub fn candidate_count(&self, cell: usize) -> usize {
        self.counts[cell] as usize
    }

    pub fn is_possible(&self, cell: usize, pattern: usize) -> bool {
        self.wave[cell * self.model.patterns.len() + pattern]
    }

    pub fn candidates(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let p = self.model.patterns.len();
        (0..p).filter(move |&pat| self.wave[cell * p + pat])
    }

    /// Shannon entropy of the normalised candidate weights, without noise.
    pub fn entropy(&self, cell: usize) -> f64 {
        let sw = self.sum_weights[cell];
        sw.ln() - self.sum_weight_logs[cell] / sw
    }

    /// Number of bans recorded so far; a mark for [`WaveState::undo_to`].
    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    pub fn neighbor(&self, cell: usize, direction: usize) -> Option<usize> {
        let (x, y) = ((cell % self.width) as isize, (cell / self.width) as isize);
        let (dx, dy) = DIRECTIONS[direction];
        let (mut nx, mut ny) = (x + dx, y + dy);
        let (w, h) = (self.width as isize, self.height as isize);
        if self.periodic {
            nx = nx.rem_euclid(w);
            ny = ny.rem_euclid(h);
        } else if nx < 0 || ny < 0 || nx >= w || ny >= h {
            return None;
        }
        Some((ny * w + nx) as usize)
    }

    /// Removes `pattern` from `cell` and queues it for propagation.
    pub fn ban(&mut self, cell: usize, pattern: usize) {
        let p = self.model.patterns.len();
        let slot = cell * p + pattern;
        if !self.wave[slot] {
            return;
        }
        self.wave[slot] = false;
        self.counts[cell] -= 1;
        self.sum_weights[cell] -= self.model.weights[pattern];
        self.sum_weight_logs[cell] -= self.model.weight_log_weights[pattern];
        self.trail.push((cell as u32, pattern as u32));
        if self.counts[cell] == 0 {
            self.contradiction = true;
        }
    }

    /// Restricts `cell` to the candidates in `keep` (no propagation).
    pub fn restrict(&mut self, cell: usize, keep: &[usize]) {
        for pat in 0..self.model.patterns.len() {
            if !keep.contains(&pat) {
                self.ban(cell, pat);
            }
        }
    }

    /// Drains the ban queue until every surviving candidate has support in
    /// every existing direction. Stops early on contradiction.
    pub fn propagate(&mut self) -> Result<(), Contradiction> {
        let p = self.model.patterns.len();
        while self.head < self.trail.len() && !self.contradiction {
            let (cell, banned) = self.trail[self.head];
            self.head += 1;
            for d in 0..4 {
                // `banned` at `cell` supported patterns at the cell that sees
                // `cell` in direction `opposite(d)`, i.e. `neighbor(cell, d)`.
                let Some(nb) = self.neighbor(cell as usize, d) else {
                    continue;
                };
                let od = opposite(d);
                for &q in self.model.adjacency.allowed(d, banned as usize) {
                    let q = q as usize;
                    let s = &mut self.supports[(nb * p + q) * 4 + od];
                    *s -= 1;
                    if *s == 0 && self.wave[nb * p + q] {
                        self.ban(nb, q);
                    }
                }
            }
        }
        if self.contradiction {
            Err(Contradiction)
        } else {
            Ok(())
        }
    }

    /// Reverts every ban recorded after `mark`.
    pub fn undo_to(&mut self, mark: usize) {
        let p = self.model.patterns.len();
        for i in (mark..self.trail.len()).rev() {
            let (cell, pat) = self.trail[i];
            let (cell, pat) = (cell as usize, pat as usize);
            if i < self.head {
                for d in 0..4 {
                    let Some(nb) = self.neighbor(cell, d) else {
                        continue;
                    };
                    let od = opposite(d);
                    for &q in self.model.adjacency.allowed(d, pat) {
                        self.supports[(nb * p + q as usize) * 4 + od] += 1;
                    }
                }
            }
            self.wave[cell * p + pat] = true;
            self.counts[cell] += 1;
            self.sum_weights[cell] += self.model.weights[pat];
            self.sum_weight_logs[cell] += self.model.weight_log_weights[pat];
        }
        self.trail.truncate(mark);
        self.head = self.head.min(mark);
        self.contradiction = self.counts.contains(&0);
    }

    /// Unsolved cell with the lowest noisy entropy, if any.
    pub fn min_entropy_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..self.cell_count() {
            if self.counts[c] <= 1 {
                continue;
            }
            let e = self.entropy(c) + self.noise[c];
            if best.is_none_or(|(_, be)| e < be) {
                best = Some((c, e));
            }
        }
        best.map(|(c, _)| c)
    }

    /// Picks the minimum-entropy cell and a weighted-random candidate for it,
    /// then collapses the cell to that candidate. Returns `Ok(None)` when every
    /// cell is already solved. Propagation is left to the caller.
    pub fn observe(&mut self, rng: &mut SeededRng) -> Result<Option<Observation>, Contradiction> {
        if self.contradiction {
            return Err(Contradiction);
        }
        let Some(cell) = self.min_entropy_cell() else {
            return Ok(None);
        };
        let weights: Vec<f64> = (0..self.model.patterns.len())
            .map(|pat| {
                if self.is_possible(cell, pat) {
                    self.model.weights[pat]
                } else {
                    0.0
                }
            })
            .collect();
        let pattern = rng
            .weighted_index(&weights)
            .expect("unsolved cell has candidates");
        self.restrict(cell, &[pattern]);
        Ok(Some(Observation { cell, pattern }))
    }

    /// Pattern chosen at each cell. Panics unless solved.
    pub fn solution(&self) -> Vec<usize> {
        assert!(self.is_solved(), "wave is not fully collapsed");
        (0..self.cell_count())
            .map(|c| self.candidates(c).next().unwrap())
            .collect()
    }

    /// Decodes a solved wave: each cell takes the top-left label of its pattern.
    pub fn decode(&self) -> LabelGrid {
        let cells: Vec<Label> = self
            .solution()
            .into_iter()
            .map(|pat| self.model.patterns.patterns()[pat][0])
            .collect();
        LabelGrid::new(self.width, self.height, cells).expect("wave has positive dimensions")
    }
}
