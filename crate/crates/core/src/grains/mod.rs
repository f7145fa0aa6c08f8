//! Grain segmentation and microstructure statistics.
//!
//! A grain is a connected component of equal-label cells. Statistics follow
//! the three quantities compared between reference and generated maps: grain
//! (centroid) count, per-orientation area fraction, and per-grain volume
//! fraction with its size histogram.

mod summary;

pub use summary::{
    format_stats_summary, read_centroids_csv, read_stats_dir, write_centroids_csv,
    write_stats_summary, CentroidRow, CENTROIDS_FILE, STATS_FILE,
};

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{Label, LabelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

const FOUR: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const EIGHT: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            _ => Err(Error::invalid(format!(
                "connectivity must be 4 or 8, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connectivity::Four => "4",
            Connectivity::Eight => "8",
        })
    }
}

/// Neighbour of `(x, y)` at `(dx, dy)` if it lies inside `width x height`.
#[inline]
pub(crate) fn neighbor(
    x: usize,
    y: usize,
    dx: isize,
    dy: isize,
    width: usize,
    height: usize,
) -> Option<(usize, usize)> {
    let nx = x.checked_add_signed(dx)?;
    let ny = y.checked_add_signed(dy)?;
    (nx < width && ny < height).then_some((nx, ny))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grain {
    pub id: u32,
    pub label: Label,
    pub area: usize,
    /// Mean of member cell indices. May fall outside a non-convex grain.
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrainMap {
    width: usize,
    height: usize,
    grains: Vec<Grain>,
    grain_ids: Vec<u32>,
}

impl GrainMap {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Grains ordered by id (id `i + 1` at index `i`).
    pub fn grains(&self) -> &[Grain] {
        &self.grains
    }

    /// Per-cell grain id, 0 for blank cells.
    pub fn grain_ids(&self) -> &[u32] {
        &self.grain_ids
    }

    pub fn grain_count(&self) -> usize {
        self.grains.len()
    }
}

/// Labels connected components with ids in first-encounter row-major order.
pub fn segment_grains(grid: &LabelGrid, connectivity: Connectivity) -> GrainMap {
    let (w, h) = grid.dims();
    let mut ids = vec![0u32; w * h];
    let mut grains = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        let label = grid.cells()[start];
        if ids[start] != 0 || grid.is_blank(label) {
            continue;
        }
        let id = grains.len() as u32 + 1;
        ids[start] = id;
        queue.push_back(start);
        let (mut area, mut sx, mut sy) = (0usize, 0f64, 0f64);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            area += 1;
            sx += x as f64;
            sy += y as f64;
            for &(dx, dy) in connectivity.offsets() {
                if let Some((nx, ny)) = neighbor(x, y, dx, dy, w, h) {
                    let j = ny * w + nx;
                    if ids[j] == 0 && grid.cells()[j] == label {
                        ids[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
        grains.push(Grain {
            id,
            label,
            area,
            centroid: (sx / area as f64, sy / area as f64),
        });
    }

    GrainMap {
        width: w,
        height: h,
        grains,
        grain_ids: ids,
    }
}

/// Merges grains smaller than `min_area` cells into their neighbours.
///
/// Each pass relabels every cell of an undersized grain that touches a
/// large-enough grain with the majority label among those neighbours (ties:
/// smallest label), then re-segments. Passes stop when no undersized grain
/// borders a large one. `min_area <= 1` returns the grid unchanged.
pub fn absorb_small_grains(
    grid: &LabelGrid,
    connectivity: Connectivity,
    min_area: usize,
) -> LabelGrid {
    let mut grid = grid.clone();
    if min_area <= 1 {
        return grid;
    }
    let (w, h) = grid.dims();
    let bound = grid
        .cells()
        .iter()
        .map(|&c| c as usize + 1)
        .max()
        .unwrap_or(0);
    loop {
        let gm = segment_grains(&grid, connectivity);
        let small = |id: u32| id != 0 && gm.grains[id as usize - 1].area < min_area;
        let mut updates = Vec::new();
        let mut votes = vec![0usize; bound];
        for i in 0..w * h {
            if !small(gm.grain_ids[i]) {
                continue;
            }
            votes.iter_mut().for_each(|v| *v = 0);
            let (x, y) = (i % w, i / w);
            for &(dx, dy) in connectivity.offsets() {
                if let Some((nx, ny)) = neighbor(x, y, dx, dy, w, h) {
                    let j = ny * w + nx;
                    let id = gm.grain_ids[j];
                    if id != 0 && !small(id) {
                        votes[grid.cells()[j] as usize] += 1;
                    }
                }
            }
            let best = votes
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)));
            if let Some((label, _)) = best {
                updates.push((i, label as Label));
            }
        }
        if updates.is_empty() {
            return grid;
        }
        for (i, label) in updates {
            grid.cells_mut()[i] = label;
        }
    }
}

/// Equal-width grain-size histogram over `[1, max_area]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl SizeHistogram {
    /// Bins `areas` into `bins` equal-width bins spanning `[1, max_area]`.
    ///
    /// The last bin is closed. A degenerate range (`max_area <= 1`) uses `[1, 2]`.
    pub fn build(areas: &[usize], bins: usize, max_area: usize) -> Self {
        let bins = bins.max(1);
        let lo = 1.0;
        let hi = if max_area > 1 { max_area as f64 } else { 2.0 };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + width * i as f64 })
            .collect();
        let mut counts = vec![0; bins];
        for &a in areas {
            let b = (((a as f64 - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Self { edges, counts }
    }

    /// Counts divided by their total (all zeros when empty).
    pub fn normalized(&self) -> Vec<f64> {
        let total: usize = self.counts.iter().sum();
        self.counts
            .iter()
            .map(|&c| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / total as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicrostructureStats {
    pub dims: (usize, usize),
    pub grain_count: usize,
    /// Share of non-blank cells per label, indexed by label.
    pub orientation_fractions: Vec<f64>,
    /// Grain areas in grain-id order.
    pub grain_areas: Vec<usize>,
    /// Per-grain area divided by the non-blank cell count.
    pub volume_fractions: Vec<f64>,
    pub histogram: SizeHistogram,
}

impl MicrostructureStats {
    /// Builds stats from per-grain areas and per-label cell counts.
    pub fn from_parts(
        dims: (usize, usize),
        grain_areas: Vec<usize>,
        label_counts: &[usize],
        bins: usize,
    ) -> Self {
        let filled: usize = label_counts.iter().sum();
        let share = |c: usize| {
            if filled == 0 {
                0.0
            } else {
                c as f64 / filled as f64
            }
        };
        let orientation_fractions = label_counts.iter().map(|&c| share(c)).collect();
        let volume_fractions = grain_areas.iter().map(|&a| share(a)).collect();
        let max_area = grain_areas.iter().copied().max().unwrap_or(1);
        let histogram = SizeHistogram::build(&grain_areas, bins, max_area);
        Self {
            dims,
            grain_count: grain_areas.len(),
            orientation_fractions,
            grain_areas,
            volume_fractions,
            histogram,
        }
    }

    pub fn max_grain_area(&self) -> usize {
        self.grain_areas.iter().copied().max().unwrap_or(0)
    }

    /// Area-weighted label fraction, e.g. the share held by a given orientation.
    pub fn orientation_fraction(&self, label: Label) -> f64 {
        self.orientation_fractions
            .get(label as usize)
            .copied()
            .unwrap_or(0.0)
    }
}

pub fn compute_stats(gm: &GrainMap, grid: &LabelGrid, bins: usize) -> Result<MicrostructureStats> {
    if gm.dims() != grid.dims() {
        return Err(Error::invalid(format!(
            "grain map is {:?} but grid is {:?}",
            gm.dims(),
            grid.dims()
        )));
    }
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let areas = gm.grains.iter().map(|g| g.area).collect();
    let counts = grid.label_counts(grid.label_bound());
    Ok(MicrostructureStats::from_parts(
        grid.dims(),
        areas,
        &counts,
        bins,
    ))
}

/// One row per grain, ordered by id.
pub fn export_centroids(gm: &GrainMap) -> Vec<CentroidRow> {
    gm.grains
        .iter()
        .map(|g| CentroidRow {
            id: g.id,
            label: g.label,
            x: g.centroid.0,
            y: g.centroid.1,
            z: None,
            area: g.area,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker(n: usize) -> LabelGrid {
        let cells = (0..n * n).map(|i| ((i % n + i / n) % 2) as Label).collect();
        LabelGrid::new(n, n, cells).unwrap()
    }

    #[test]
    fn uniform_single_grain() {
        let gm = segment_grains(&LabelGrid::filled(8, 8, 3), Connectivity::Four);
        assert_eq!(gm.grain_count(), 1);
        let g = &gm.grains()[0];
        assert_eq!((g.id, g.label, g.area), (1, 3, 64));
        assert_eq!(g.centroid, (3.5, 3.5));
    }

    #[test]
    fn checkerboard_connectivity() {
        let four = segment_grains(&checker(4), Connectivity::Four);
        assert_eq!(four.grain_count(), 16);
        assert!(four.grains().iter().all(|g| g.area == 1));
        let eight = segment_grains(&checker(4), Connectivity::Eight);
        assert_eq!(eight.grain_count(), 2);
        assert!(eight.grains().iter().all(|g| g.area == 8));
    }

    #[test]
    fn ids_in_first_encounter_order() {
        let g = LabelGrid::from_rows(&[[1, 0, 0], [1, 2, 0]]).unwrap();
        let gm = segment_grains(&g, Connectivity::Four);
        assert_eq!(gm.grain_ids(), &[1, 2, 2, 1, 3, 2]);
    }

    #[test]
    fn blanks_get_id_zero() {
        let g = LabelGrid::from_rows(&[[9, 0], [0, 9]])
            .unwrap()
            .with_blank(9);
        let gm = segment_grains(&g, Connectivity::Four);
        assert_eq!(gm.grain_ids(), &[0, 1, 2, 0]);
        let stats = compute_stats(&gm, &g, 4).unwrap();
        assert_eq!(stats.orientation_fractions, vec![1.0]);
        assert_eq!(stats.volume_fractions, vec![0.5, 0.5]);
    }

    #[test]
    fn stats_uniform() {
        let g = LabelGrid::filled(5, 5, 0);
        let s = compute_stats(&segment_grains(&g, Connectivity::Four), &g, 3).unwrap();
        assert_eq!(s.grain_count, 1);
        assert_eq!(s.orientation_fractions, vec![1.0]);
        assert_eq!(s.volume_fractions, vec![1.0]);
    }

    #[test]
    fn stats_column_split() {
        let cells = (0..36).map(|i| if i % 6 < 2 { 0 } else { 1 }).collect();
        let g = LabelGrid::new(6, 6, cells).unwrap();
        let s = compute_stats(&segment_grains(&g, Connectivity::Four), &g, 3).unwrap();
        assert_eq!(s.orientation_fractions, vec![12.0 / 36.0, 24.0 / 36.0]);
    }

    #[test]
    fn stats_dims_mismatch() {
        let a = LabelGrid::filled(2, 2, 0);
        let b = LabelGrid::filled(3, 2, 0);
        assert!(compute_stats(&segment_grains(&a, Connectivity::Four), &b, 2).is_err());
    }

    #[test]
    fn histogram_edges_and_counts() {
        let h = SizeHistogram::build(&[1, 2, 5, 9, 9], 4, 9);
        assert_eq!(h.edges, vec![1.0, 3.0, 5.0, 7.0, 9.0]);
        assert_eq!(h.counts, vec![2, 0, 1, 2]);
        let degenerate = SizeHistogram::build(&[1, 1], 3, 1);
        assert_eq!(degenerate.counts.iter().sum::<usize>(), 2);
    }

    #[test]
    fn export_rows_sorted() {
        let rows = export_centroids(&segment_grains(&checker(4), Connectivity::Four));
        assert_eq!(rows.len(), 16);
        assert!(rows.windows(2).all(|w| w[0].id < w[1].id));
        assert!(rows.iter().all(|r| r.area == 1));
    }

    #[test]
    fn absorb_removes_speckle() {
        let mut g = LabelGrid::filled(6, 6, 0);
        g.set(2, 2, 1);
        g.set(4, 1, 2);
        let cleaned = absorb_small_grains(&g, Connectivity::Four, 2);
        assert_eq!(cleaned, LabelGrid::filled(6, 6, 0));
        assert_eq!(absorb_small_grains(&g, Connectivity::Four, 1), g);
    }
}
