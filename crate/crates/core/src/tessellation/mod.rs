//! Nearest-seed tessellation on the cell lattice.
//!
//! Continuous coordinates place cell `(i, j)` over `[i, i + 1) x [j, j + 1)`,
//! so its centre is `(i + 0.5, j + 0.5)`. Distance ties always go to the seed
//! with the lowest index.

mod sample;
mod volume;

pub use sample::{sample_centroids, SAMPLE_RETRY_FACTOR};
pub use volume::{voxel_tessellation_3d, write_volume, LabelVolume, MANIFEST_FILE};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grains::CentroidRow;
use crate::raster::{Label, LabelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    /// A monotone transform of the distance, cheap to compare: squared length
    /// for Euclidean, the distance itself otherwise.
    #[inline]
    pub fn rank<const D: usize>(self, a: &[f64; D], b: &[f64; D]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum(),
            Metric::Manhattan => a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum(),
            Metric::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn distance<const D: usize>(self, a: &[f64; D], b: &[f64; D]) -> f64 {
        match self {
            Metric::Euclidean => self.rank(a, b).sqrt(),
            _ => self.rank(a, b),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "chebyshev" => Ok(Metric::Chebyshev),
            _ => Err(Error::invalid(format!(
                "unknown metric {s:?} (euclidean, manhattan, chebyshev)"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Chebyshev => "chebyshev",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed<const D: usize> {
    pub position: [f64; D],
    pub label: Label,
}

/// Labelled seed points inside a box of `dims` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSet<const D: usize> {
    dims: [usize; D],
    points: Vec<Seed<D>>,
}

pub type CentroidSet2 = CentroidSet<2>;
pub type CentroidSet3 = CentroidSet<3>;

impl<const D: usize> CentroidSet<D> {
    pub fn new(dims: [usize; D], points: Vec<Seed<D>>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::invalid(format!(
                "dimensions must be positive, got {dims:?}"
            )));
        }
        if points.is_empty() {
            return Err(Error::invalid("a centroid set needs at least one point"));
        }
        for (i, p) in points.iter().enumerate() {
            let inside = p
                .position
                .iter()
                .zip(&dims)
                .all(|(&c, &d)| c.is_finite() && (0.0..=d as f64).contains(&c));
            if !inside {
                return Err(Error::invalid(format!(
                    "point {i} at {:?} lies outside {dims:?}",
                    p.position
                )));
            }
        }
        Ok(Self { dims, points })
    }

    pub fn dims(&self) -> [usize; D] {
        self.dims
    }

    pub fn points(&self) -> &[Seed<D>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Lattice cell containing each point (clamped to the box).
    pub fn cell_of(&self, i: usize) -> [usize; D] {
        let mut out = [0; D];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (self.points[i].position[k].floor().max(0.0) as usize).min(self.dims[k] - 1);
        }
        out
    }

    /// Converts grain-centroid CSV rows, whose coordinates are cell indices,
    /// into continuous positions (index + 0.5).
    pub fn from_rows(dims: [usize; D], rows: &[CentroidRow]) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| {
                let coords = [r.x, r.y, r.z.unwrap_or(0.0)];
                if D == 3 && r.z.is_none() {
                    return Err(Error::invalid(format!(
                        "centroid {} has no z coordinate",
                        r.id
                    )));
                }
                let mut position = [0.0; D];
                for (k, slot) in position.iter_mut().enumerate() {
                    *slot = coords[k] + 0.5;
                }
                Ok(Seed {
                    position,
                    label: r.label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, points)
    }

    /// Inverse of [`CentroidSet::from_rows`]; `area` is left at 0.
    pub fn to_rows(&self) -> Vec<CentroidRow> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| CentroidRow {
                id: i as u32 + 1,
                label: p.label,
                x: p.position[0] - 0.5,
                y: if D > 1 { p.position[1] - 0.5 } else { 0.0 },
                z: (D > 2).then(|| p.position[2] - 0.5),
                area: 0,
            })
            .collect()
    }
}

/// Index of the nearest seed to `at` (lowest index on ties).
#[inline]
pub fn nearest_seed<const D: usize>(points: &[Seed<D>], at: &[f64; D], metric: Metric) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = metric.rank(&p.position, at);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[inline]
pub fn cell_center(x: usize, y: usize) -> [f64; 2] {
    [x as f64 + 0.5, y as f64 + 0.5]
}

/// Labels plus, per cell, the index of the owning seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub grid: LabelGrid,
    pub owners: Vec<usize>,
}

pub fn nearest_assign(cs: &CentroidSet2, metric: Metric) -> Assignment {
    let [w, h] = cs.dims;
    let owners: Vec<usize> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            (0..w).map(move |x| nearest_seed(&cs.points, &cell_center(x, y), metric))
        })
        .collect();
    let cells = owners.iter().map(|&o| cs.points[o].label).collect();
    Assignment {
        grid: LabelGrid::new(w, h, cells).expect("positive dims"),
        owners,
    }
}

/// Sum over cells of the squared distance to the owning seed.
pub fn quantization_energy(cs: &CentroidSet2, metric: Metric) -> f64 {
    let a = nearest_assign(cs, metric);
    let w = cs.dims[0];
    a.owners
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            metric
                .distance(&cs.points[o].position, &cell_center(i % w, i / w))
                .powi(2)
        })
        .sum()
}

/// One Lloyd iteration: assign cells, then move every seed to the mean of its
/// cell centres. Seeds that own no cell stay put; labels travel with seeds.
pub fn lloyd_step(cs: &CentroidSet2, metric: Metric) -> CentroidSet2 {
    let a = nearest_assign(cs, metric);
    let w = cs.dims[0];
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); cs.points.len()];
    for (i, &o) in a.owners.iter().enumerate() {
        let c = cell_center(i % w, i / w);
        sums[o].0 += c[0];
        sums[o].1 += c[1];
        sums[o].2 += 1;
    }
    let points = cs
        .points
        .iter()
        .zip(&sums)
        .map(|(p, &(sx, sy, n))| {
            if n == 0 {
                *p
            } else {
                Seed {
                    position: [sx / n as f64, sy / n as f64],
                    label: p.label,
                }
            }
        })
        .collect();
    CentroidSet {
        dims: cs.dims,
        points,
    }
}

pub fn lloyd_relax(cs: &CentroidSet2, iterations: usize, metric: Metric) -> CentroidSet2 {
    let mut current = cs.clone();
    for _ in 0..iterations {
        current = lloyd_step(&current, metric);
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(dims: [usize; 2], pts: &[(f64, f64, Label)]) -> CentroidSet2 {
        CentroidSet::new(
            dims,
            pts.iter()
                .map(|&(x, y, label)| Seed {
                    position: [x, y],
                    label,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_seed_uniform() {
        let a = nearest_assign(&set([5, 4], &[(1.2, 3.3, 7)]), Metric::Euclidean);
        assert_eq!(a.grid, LabelGrid::filled(5, 4, 7));
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        let a = nearest_assign(
            &set([8, 1], &[(0.5, 0.5, 0), (7.5, 0.5, 1)]),
            Metric::Euclidean,
        );
        assert_eq!(a.grid.cells(), &[0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // cell centre 1.5 is equidistant from both seeds
        let a = nearest_assign(
            &set([3, 1], &[(0.5, 0.5, 4), (2.5, 0.5, 9)]),
            Metric::Manhattan,
        );
        assert_eq!(a.grid.cells(), &[4, 4, 9]);
        let b = nearest_assign(
            &set([3, 1], &[(2.5, 0.5, 9), (0.5, 0.5, 4)]),
            Metric::Manhattan,
        );
        assert_eq!(b.grid.cells(), &[4, 9, 9]);
    }

    #[test]
    fn validation() {
        assert!(CentroidSet::<2>::new([4, 4], vec![]).is_err());
        assert!(CentroidSet::new(
            [4, 4],
            vec![Seed {
                position: [4.5, 1.0],
                label: 0
            }]
        )
        .is_err());
        assert!(CentroidSet::new(
            [0, 4],
            vec![Seed {
                position: [0.0, 1.0],
                label: 0
            }]
        )
        .is_err());
    }

    #[test]
    fn lloyd_zero_iterations_identity() {
        let cs = set([8, 8], &[(1.0, 2.0, 0), (6.0, 6.0, 1)]);
        assert_eq!(lloyd_relax(&cs, 0, Metric::Euclidean), cs);
    }

    #[test]
    fn lloyd_single_seed_moves_to_mean() {
        let moved = lloyd_relax(&set([8, 8], &[(0.3, 7.9, 2)]), 1, Metric::Euclidean);
        // mean of cell centres 0.5..=7.5
        assert_eq!(moved.points()[0].position, [4.0, 4.0]);
        assert_eq!(moved.points()[0].label, 2);
    }

    #[test]
    fn rows_round_trip() {
        let cs = set([8, 8], &[(1.5, 2.5, 0), (6.0, 6.25, 1)]);
        assert_eq!(CentroidSet::from_rows([8, 8], &cs.to_rows()).unwrap(), cs);
    }

    #[test]
    fn metric_parse() {
        assert_eq!("chebyshev".parse::<Metric>().unwrap(), Metric::Chebyshev);
        assert!("cosine".parse::<Metric>().is_err());
        assert_eq!(Metric::Chebyshev.distance(&[0.0, 0.0], &[3.0, -4.0]), 4.0);
        assert_eq!(Metric::Euclidean.distance(&[0.0, 0.0], &[3.0, -4.0]), 5.0);
        assert_eq!(Metric::Manhattan.distance(&[0.0, 0.0], &[3.0, -4.0]), 7.0);
    }
}
