//! Label rearrangement for sampled seeds.
//!
//! Independently drawn labels put the same orientation on roughly a quarter
//! of all touching seed pairs, and each such pair merges into one grain when
//! the result is segmented. Annealing the labels against
//!
//! ```text
//! E = (same-label touching pairs) + sum_l |A_l - p_l * A| / (A / n)
//! ```
//!
//! where `A_l` is the area currently labelled `l`, removes most of those
//! merges while holding area fractions close to the targets `p_l`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grains::{neighbor, Connectivity};
use crate::raster::Label;
use crate::rng::SeededRng;
use crate::tessellation::{cell_center, CentroidSet2, Metric};

/// Annealing length in proposals per seed.
pub const REFINE_SWEEPS: usize = 2000;
const T_START: f64 = 1.0;
const T_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineStats {
    pub conflicts_before: usize,
    pub conflicts_after: usize,
    /// Largest per-label deviation of area share from the target.
    pub fraction_error_before: f64,
    pub fraction_error_after: f64,
}

/// Sorted neighbour lists between seeds whose regions touch.
pub fn seed_adjacency(
    owners: &[usize],
    width: usize,
    seeds: usize,
    connectivity: Connectivity,
) -> Vec<Vec<usize>> {
    let height = owners.len() / width;
    let mut adj = vec![Vec::new(); seeds];
    for y in 0..height {
        for x in 0..width {
            let a = owners[y * width + x];
            for &(dx, dy) in connectivity.offsets() {
                if let Some((nx, ny)) = neighbor(x, y, dx, dy, width, height) {
                    let b = owners[ny * width + nx];
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

struct State<'a> {
    adj: &'a [Vec<usize>],
    area: Vec<f64>,
    labels: &'a mut [Label],
    per_label: Vec<f64>,
    target: Vec<f64>,
    scale: f64,
}

impl State<'_> {
    fn same(&self, i: usize, l: Label) -> i64 {
        self.adj[i].iter().filter(|&&j| self.labels[j] == l).count() as i64
    }

    fn fraction_term(&self, per_label: &[f64]) -> f64 {
        per_label
            .iter()
            .zip(&self.target)
            .map(|(a, t)| (a - t).abs())
            .sum::<f64>()
            / self.scale
    }

    fn conflicts(&self) -> usize {
        (0..self.labels.len())
            .map(|i| self.same(i, self.labels[i]) as usize)
            .sum::<usize>()
            / 2
    }

    fn fraction_error(&self, total: f64) -> f64 {
        self.per_label
            .iter()
            .zip(&self.target)
            .map(|(a, t)| (a - t).abs() / total)
            .fold(0.0, f64::max)
    }
}

/// Neighbour lists covering every contact any tie-breaking could produce:
/// seeds touch when each is among the nearest seeds of one of two
/// neighbouring cells. Region growth from the seeds resolves ties in
/// arbitrary order, so its contacts are a subset of these.
pub fn tie_adjacency(
    cs: &CentroidSet2,
    metric: Metric,
    connectivity: Connectivity,
) -> Vec<Vec<usize>> {
    let [width, height] = cs.dims();
    let ties: Vec<Vec<usize>> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let at = cell_center(i % width, i / width);
            let ranks: Vec<f64> = cs
                .points()
                .iter()
                .map(|p| metric.rank(&p.position, &at))
                .collect();
            let best = ranks.iter().copied().fold(f64::INFINITY, f64::min);
            (0..ranks.len()).filter(|&s| ranks[s] == best).collect()
        })
        .collect();
    let mut adj = vec![Vec::new(); cs.len()];
    for y in 0..height {
        for x in 0..width {
            for &(dx, dy) in connectivity.offsets() {
                if let Some((nx, ny)) = neighbor(x, y, dx, dy, width, height) {
                    for &a in &ties[y * width + x] {
                        for &b in &ties[ny * width + nx] {
                            if a != b {
                                adj[a].push(b);
                                adj[b].push(a);
                            }
                        }
                    }
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Anneals `labels` in place. `owners[cell]` is the seed owning each cell of a
/// grid `width` cells wide; `fractions` are the target label shares. Labels
/// with zero target share are never introduced.
/// Seeds count as touching under `connectivity`.
pub fn refine_labels(
    owners: &[usize],
    width: usize,
    labels: &mut [Label],
    fractions: &[f64],
    connectivity: Connectivity,
    rng: &mut SeededRng,
) -> Result<RefineStats> {
    let n = labels.len();
    if width == 0 || owners.is_empty() || !owners.len().is_multiple_of(width) {
        return Err(Error::invalid(
            "owner map must be a non-empty whole number of rows",
        ));
    }
    if owners.iter().any(|&o| o >= n) {
        return Err(Error::invalid("owner out of range"));
    }
    let adj = seed_adjacency(owners, width, n, connectivity);
    refine_with_adjacency(&adj, owners, labels, fractions, rng)
}

/// As [`refine_labels`] with explicit sorted neighbour lists; `owners` only
/// supplies the seed areas.
pub fn refine_with_adjacency(
    adj: &[Vec<usize>],
    owners: &[usize],
    labels: &mut [Label],
    fractions: &[f64],
    rng: &mut SeededRng,
) -> Result<RefineStats> {
    let n = labels.len();
    if adj.len() != n || owners.iter().any(|&o| o >= n) || adj.iter().flatten().any(|&j| j >= n) {
        return Err(Error::invalid("owner or neighbour out of range"));
    }
    if labels.iter().any(|&l| l as usize >= fractions.len()) {
        return Err(Error::invalid("label out of range"));
    }
    let total = owners.len() as f64;
    let mut area = vec![0.0; n];
    for &o in owners {
        area[o] += 1.0;
    }
    let mut per_label = vec![0.0; fractions.len()];
    for (i, &l) in labels.iter().enumerate() {
        per_label[l as usize] += area[i];
    }
    let allowed: Vec<Label> = (0..fractions.len())
        .filter(|&l| fractions[l] > 0.0)
        .map(|l| l as Label)
        .collect();
    let mut s = State {
        adj,
        area,
        labels,
        per_label,
        target: fractions.iter().map(|p| p * total).collect(),
        scale: total / n as f64,
    };
    let conflicts_before = s.conflicts();
    let fraction_error_before = s.fraction_error(total);

    let steps = REFINE_SWEEPS * n;
    if n > 1 && !allowed.is_empty() {
        let mut trial = s.per_label.clone();
        for k in 0..steps {
            let t = T_START * (1.0 - k as f64 / steps as f64) + T_FLOOR;
            let i = rng.below(n);
            let li = s.labels[i];
            trial.copy_from_slice(&s.per_label);
            let (j, lj, mut delta) = if rng.unit() < 0.5 {
                let j = rng.below(n);
                let lj = s.labels[j];
                if li == lj {
                    continue;
                }
                let touching = s.adj[i].binary_search(&j).is_ok() as i64;
                let d = (s.same(i, lj) - touching) + (s.same(j, li) - touching)
                    - s.same(i, li)
                    - s.same(j, lj);
                trial[li as usize] += s.area[j] - s.area[i];
                trial[lj as usize] += s.area[i] - s.area[j];
                (Some(j), lj, d as f64)
            } else {
                let lj = allowed[rng.below(allowed.len())];
                if lj == li {
                    continue;
                }
                trial[li as usize] -= s.area[i];
                trial[lj as usize] += s.area[i];
                (None, lj, (s.same(i, lj) - s.same(i, li)) as f64)
            };
            delta += s.fraction_term(&trial) - s.fraction_term(&s.per_label);
            if delta <= 0.0 || rng.unit() < (-delta / t).exp() {
                s.labels[i] = lj;
                if let Some(j) = j {
                    s.labels[j] = li;
                }
                s.per_label.copy_from_slice(&trial);
            }
        }
    }
    Ok(RefineStats {
        conflicts_before,
        conflicts_after: s.conflicts(),
        fraction_error_before,
        fraction_error_after: s.fraction_error(total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_of_strips() {
        // three vertical strips 0 | 1 | 2
        let owners: Vec<usize> = (0..4).flat_map(|_| [0, 0, 1, 1, 2, 2]).collect();
        let adj = seed_adjacency(&owners, 6, 3, Connectivity::Four);
        assert_eq!(adj, vec![vec![1], vec![0, 2], vec![1]]);
    }

    #[test]
    fn diagonal_contact_only_with_eight() {
        let owners = vec![0, 1, 2, 0];
        assert_eq!(
            seed_adjacency(&owners, 2, 3, Connectivity::Four)[1],
            vec![0]
        );
        assert_eq!(
            seed_adjacency(&owners, 2, 3, Connectivity::Eight)[1],
            vec![0, 2]
        );
    }

    #[test]
    fn strips_alternate_after_refinement() {
        // ten equal strips, two labels at 50/50 -> perfect alternation exists
        let owners: Vec<usize> = (0..5).flat_map(|_| 0..10).collect();
        let mut labels = vec![0; 10];
        let stats = refine_labels(
            &owners,
            10,
            &mut labels,
            &[0.5, 0.5],
            Connectivity::Four,
            &mut SeededRng::new(1),
        )
        .unwrap();
        assert_eq!(stats.conflicts_before, 9);
        assert_eq!(stats.conflicts_after, 0);
        assert_eq!(stats.fraction_error_after, 0.0);
        assert!(labels.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn zero_share_labels_never_appear() {
        let owners: Vec<usize> = (0..3).flat_map(|_| 0..6).collect();
        let mut labels = vec![0, 0, 0, 2, 2, 2];
        refine_labels(
            &owners,
            6,
            &mut labels,
            &[0.5, 0.0, 0.5],
            Connectivity::Four,
            &mut SeededRng::new(2),
        )
        .unwrap();
        assert!(labels.iter().all(|&l| l != 1));
    }

    #[test]
    fn ties_connect_both_candidates() {
        // seeds at opposite corners of a 3x3 grid tie along the anti-diagonal
        let cs = CentroidSet2::new(
            [3, 3],
            vec![
                crate::tessellation::Seed {
                    position: [0.5, 0.5],
                    label: 0,
                },
                crate::tessellation::Seed {
                    position: [2.5, 2.5],
                    label: 0,
                },
                crate::tessellation::Seed {
                    position: [2.5, 0.5],
                    label: 0,
                },
            ],
        )
        .unwrap();
        let adj = tie_adjacency(&cs, Metric::Manhattan, Connectivity::Four);
        assert_eq!(adj, vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut labels = vec![3];
        assert!(refine_labels(
            &[0, 0],
            2,
            &mut labels,
            &[1.0],
            Connectivity::Four,
            &mut SeededRng::new(0)
        )
        .is_err());
        let mut labels = vec![0];
        assert!(refine_labels(
            &[0, 1],
            2,
            &mut labels,
            &[1.0],
            Connectivity::Four,
            &mut SeededRng::new(0)
        )
        .is_err());
    }
}
