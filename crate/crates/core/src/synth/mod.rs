//! Reference statistics in, statistically similar microstructure out.
//!
//! Seeds are sampled with the reference orientation fractions, their labels
//! are optionally rearranged so that neighbouring seeds rarely share a label
//! (see [`refine_labels`]), and the grid is filled either by synchronous
//! growth or by direct nearest-seed assignment.

mod refine;
mod report;

pub use refine::{
    refine_labels, refine_with_adjacency, seed_adjacency, tie_adjacency, RefineStats, REFINE_SWEEPS,
};
pub use report::{
    bar_chart, build_report, compare, emit_report, StatsReport, ORIENTATION_CHART_FILE, REPORT_DIR,
    STATS_CSV_FILE, SUMMARY_FILE, VOLUME_CHART_FILE,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grains::{neighbor, Connectivity, MicrostructureStats};
use crate::markov::{grain_growth_program, run_program, Termination};
use crate::raster::io::csv_error;
use crate::raster::{Label, LabelGrid, Palette};
use crate::rng::{derive_seed, SeededRng};
use crate::tessellation::{
    cell_center, nearest_assign, sample_centroids, CentroidSet2, Metric, Seed,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthMethod {
    #[default]
    MarkovGrowth,
    NearestVoronoi,
}

impl FromStr for SynthMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markov_growth" => Ok(SynthMethod::MarkovGrowth),
            "nearest_voronoi" => Ok(SynthMethod::NearestVoronoi),
            _ => Err(Error::invalid(format!(
                "unknown method {s:?} (markov_growth, nearest_voronoi)"
            ))),
        }
    }
}

impl fmt::Display for SynthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthMethod::MarkovGrowth => "markov_growth",
            SynthMethod::NearestVoronoi => "nearest_voronoi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrainTarget {
    /// Reference grain count scaled by the output/reference area ratio.
    #[default]
    MatchReference,
    Count(usize),
}

impl FromStr for GrainTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "match_reference" {
            return Ok(GrainTarget::MatchReference);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(GrainTarget::Count(n)),
            _ => Err(Error::invalid(format!(
                "grain target must be a positive integer or match_reference, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for GrainTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrainTarget::MatchReference => f.write_str("match_reference"),
            GrainTarget::Count(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub method: SynthMethod,
    pub target: GrainTarget,
    /// Output size; `None` copies the reference size.
    pub dims: Option<(usize, usize)>,
    /// Distance for direct assignment and seed spacing. Growth always follows
    /// `connectivity` (4: Manhattan, 8: Chebyshev).
    pub metric: Metric,
    pub connectivity: Connectivity,
    pub seed: u64,
    pub min_spacing: f64,
    pub refine: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            method: SynthMethod::default(),
            target: GrainTarget::default(),
            dims: None,
            metric: Metric::Euclidean,
            connectivity: Connectivity::Four,
            seed: 0,
            min_spacing: 2.0,
            refine: true,
        }
    }
}

impl SynthConfig {
    pub fn resolve_dims(&self, reference: &MicrostructureStats) -> Result<(usize, usize)> {
        let dims = self.dims.unwrap_or(reference.dims);
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::invalid(format!(
                "output size must be positive, got {}x{}",
                dims.0, dims.1
            )));
        }
        Ok(dims)
    }

    pub fn resolve_count(&self, reference: &MicrostructureStats) -> Result<usize> {
        match self.target {
            GrainTarget::Count(0) => Err(Error::invalid("grain target must be positive")),
            GrainTarget::Count(n) => Ok(n),
            GrainTarget::MatchReference => {
                let (w, h) = self.resolve_dims(reference)?;
                let (rw, rh) = reference.dims;
                if reference.grain_count == 0 || rw * rh == 0 {
                    return Err(Error::invalid("reference has no grains to match"));
                }
                let scaled = reference.grain_count as f64 * (w * h) as f64 / (rw * rh) as f64;
                Ok((scaled.round() as usize).max(1))
            }
        }
    }

    fn growth_metric(&self) -> Metric {
        match self.connectivity {
            Connectivity::Four => Metric::Manhattan,
            Connectivity::Eight => Metric::Chebyshev,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub grid: LabelGrid,
    pub centroids: CentroidSet2,
    pub refine: Option<RefineStats>,
}

/// Seeds and fills a new grid from reference statistics.
pub fn synthesize(reference: &MicrostructureStats, cfg: &SynthConfig) -> Result<Synthesis> {
    let fractions = &reference.orientation_fractions;
    if fractions.is_empty() || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "reference orientation fractions must be present and sum to 1",
        ));
    }
    let (w, h) = cfg.resolve_dims(reference)?;
    let count = cfg.resolve_count(reference)?;
    let mut rng = SeededRng::new(cfg.seed);
    let mut centroids = sample_centroids(
        count,
        [w, h],
        fractions,
        &mut rng,
        cfg.min_spacing,
        cfg.metric,
    )?;

    let region_metric = match cfg.method {
        SynthMethod::MarkovGrowth => cfg.growth_metric(),
        SynthMethod::NearestVoronoi => cfg.metric,
    };
    let mut owners = nearest_assign(&centroids, region_metric).owners;
    if cfg.method == SynthMethod::NearestVoronoi {
        connect_regions(&mut owners, &centroids, cfg.metric, cfg.connectivity);
    }
    let mut refine = None;
    if cfg.refine && centroids.len() > 1 {
        let mut labels: Vec<Label> = centroids.points().iter().map(|p| p.label).collect();
        let mut refine_rng = SeededRng::new(derive_seed(cfg.seed, 1));
        let stats = match cfg.method {
            // growth settles ties in random order, so guard every possible contact
            SynthMethod::MarkovGrowth => {
                let adj = tie_adjacency(&centroids, region_metric, cfg.connectivity);
                refine_with_adjacency(&adj, &owners, &mut labels, fractions, &mut refine_rng)?
            }
            SynthMethod::NearestVoronoi => refine_labels(
                &owners,
                w,
                &mut labels,
                fractions,
                cfg.connectivity,
                &mut refine_rng,
            )?,
        };
        let points = centroids
            .points()
            .iter()
            .zip(&labels)
            .map(|(p, &label)| Seed {
                position: p.position,
                label,
            })
            .collect();
        centroids = CentroidSet2::new([w, h], points)?;
        refine = Some(stats);
    }

    let grid = match cfg.method {
        SynthMethod::NearestVoronoi => {
            let labels: Vec<Label> = centroids.points().iter().map(|p| p.label).collect();
            LabelGrid::new(w, h, owners.iter().map(|&o| labels[o]).collect())?
        }
        SynthMethod::MarkovGrowth => {
            let (start, program) = grain_growth_program(&centroids, cfg.connectivity)?;
            let mut grow_rng = SeededRng::new(derive_seed(cfg.seed, 2));
            // every step labels at least one cell until the grid is full
            let run = run_program(start, &program, &mut grow_rng, w * h + 1)?;
            debug_assert_eq!(run.termination, Termination::Fixpoint);
            let cells = run.grid.cells().to_vec();
            LabelGrid::new(w, h, cells)?
        }
    };
    Ok(Synthesis {
        grid,
        centroids,
        refine,
    })
}

/// Makes every seed's region connected under `connectivity`. On the lattice,
/// exact ties and thin diagonal slivers can cut cells off from their seed's
/// cell; each such cell moves to the nearest seed owning a connected
/// neighbour, so each seed yields exactly one piece.
fn connect_regions(
    owners: &mut [usize],
    cs: &CentroidSet2,
    metric: Metric,
    connectivity: Connectivity,
) {
    let [w, h] = cs.dims();
    let mut reached = vec![false; owners.len()];
    let mut stack = Vec::new();
    for s in 0..cs.len() {
        let [x, y] = cs.cell_of(s);
        let i = y * w + x;
        if owners[i] == s && !reached[i] {
            reached[i] = true;
            stack.push(i);
        }
        while let Some(i) = stack.pop() {
            for &(dx, dy) in connectivity.offsets() {
                if let Some((nx, ny)) = neighbor(i % w, i / w, dx, dy, w, h) {
                    let j = ny * w + nx;
                    if !reached[j] && owners[j] == s {
                        reached[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    loop {
        // decide every frontier cell against the same snapshot so scan order does not matter
        let moves: Vec<(usize, usize)> = (0..owners.len())
            .filter(|&i| !reached[i])
            .filter_map(|i| {
                let at = cell_center(i % w, i / w);
                connectivity
                    .offsets()
                    .iter()
                    .filter_map(|&(dx, dy)| neighbor(i % w, i / w, dx, dy, w, h))
                    .map(|(nx, ny)| ny * w + nx)
                    .filter(|&j| reached[j])
                    .map(|j| owners[j])
                    .min_by(|&a, &b| {
                        let (da, db) = (
                            metric.rank(&cs.points()[a].position, &at),
                            metric.rank(&cs.points()[b].position, &at),
                        );
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
                    .map(|s| (i, s))
            })
            .collect();
        if moves.is_empty() {
            break;
        }
        for (i, s) in moves {
            owners[i] = s;
            reached[i] = true;
        }
    }
}

/// Reads a `from,to` label table with a header row.
pub fn read_remap_csv(path: impl AsRef<Path>) -> Result<BTreeMap<Label, Label>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut map = BTreeMap::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("row {}: expected from,to labels", line + 2),
        };
        if rec.len() < 2 {
            return Err(bad());
        }
        let from: Label = rec[0].trim().parse().map_err(|_| bad())?;
        let to: Label = rec[1].trim().parse().map_err(|_| bad())?;
        if map.insert(from, to).is_some() {
            return Err(Error::invalid(format!(
                "{}: label {from} is mapped twice",
                path.display()
            )));
        }
    }
    Ok(map)
}

/// Relabels every cell through `remap`. Blank cells pass through. Every
/// non-blank label present must have an entry, and every target must exist
/// in `palette`.
pub fn recolor(
    grid: &LabelGrid,
    palette: &Palette,
    remap: &BTreeMap<Label, Label>,
) -> Result<LabelGrid> {
    if let Some((_, &to)) = remap.iter().find(|(_, &to)| to as usize >= palette.len()) {
        return Err(Error::invalid(format!(
            "remap target {to} is outside the {}-entry palette",
            palette.len()
        )));
    }
    let mut out = grid.clone();
    for c in out.cells_mut() {
        if grid.is_blank(*c) {
            continue;
        }
        *c = *remap
            .get(c)
            .ok_or_else(|| Error::invalid(format!("remap has no entry for label {c}")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grains::{compute_stats, segment_grains};

    #[test]
    fn cut_off_cells_join_a_connected_neighbour() {
        let seeds = vec![
            Seed {
                position: [0.5, 0.5],
                label: 0,
            },
            Seed {
                position: [3.5, 0.5],
                label: 1,
            },
        ];
        let cs = CentroidSet2::new([4, 1], seeds).unwrap();
        let mut owners = vec![0, 1, 0, 1];
        connect_regions(&mut owners, &cs, Metric::Euclidean, Connectivity::Four);
        assert_eq!(owners, vec![0, 0, 1, 1]);
    }

    fn reference(fractions: Vec<f64>, grains: usize, dims: (usize, usize)) -> MicrostructureStats {
        let total = dims.0 * dims.1;
        let counts: Vec<usize> = fractions
            .iter()
            .map(|f| (f * total as f64).round() as usize)
            .collect();
        let mut s = MicrostructureStats::from_parts(dims, vec![total / grains; grains], &counts, 8);
        s.orientation_fractions = fractions;
        s
    }

    #[test]
    fn single_orientation_gives_uniform_output() {
        for method in [SynthMethod::MarkovGrowth, SynthMethod::NearestVoronoi] {
            let cfg = SynthConfig {
                method,
                ..Default::default()
            };
            let out = synthesize(&reference(vec![1.0], 10, (32, 32)), &cfg).unwrap();
            assert!(out.grid.cells().iter().all(|&l| l == 0));
        }
    }

    #[test]
    fn matched_count_places_that_many_seeds() {
        let cfg = SynthConfig {
            refine: false,
            min_spacing: 0.0,
            ..Default::default()
        };
        let r = reference(vec![0.5, 0.5], 2527, (400, 300));
        assert_eq!(cfg.resolve_count(&r).unwrap(), 2527);
        let cfg = SynthConfig {
            method: SynthMethod::NearestVoronoi,
            ..cfg
        };
        assert_eq!(synthesize(&r, &cfg).unwrap().centroids.len(), 2527);
    }

    #[test]
    fn count_scales_with_area() {
        let r = reference(vec![1.0], 100, (100, 100));
        let cfg = SynthConfig {
            dims: Some((50, 100)),
            ..Default::default()
        };
        assert_eq!(cfg.resolve_count(&r).unwrap(), 50);
        let fixed = SynthConfig {
            target: GrainTarget::Count(7),
            ..cfg
        };
        assert_eq!(fixed.resolve_count(&r).unwrap(), 7);
    }

    #[test]
    fn deterministic_and_blank_free() {
        let r = reference(vec![0.4, 0.35, 0.25], 40, (48, 40));
        for method in [SynthMethod::MarkovGrowth, SynthMethod::NearestVoronoi] {
            let cfg = SynthConfig {
                method,
                seed: 5,
                ..Default::default()
            };
            let a = synthesize(&r, &cfg).unwrap();
            let b = synthesize(&r, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.grid.dims(), (48, 40));
            assert!(a.grid.cells().iter().all(|&l| l < 3));
        }
    }

    #[test]
    fn refinement_separates_equal_labels() {
        let r = reference(vec![0.35, 0.30, 0.20, 0.15], 120, (128, 128));
        let base = SynthConfig {
            method: SynthMethod::NearestVoronoi,
            seed: 3,
            ..Default::default()
        };
        let plain = synthesize(
            &r,
            &SynthConfig {
                refine: false,
                ..base.clone()
            },
        )
        .unwrap();
        let refined = synthesize(&r, &base).unwrap();
        let grains = |g: &LabelGrid| segment_grains(g, Connectivity::Four).grain_count();
        assert!(grains(&refined.grid) > grains(&plain.grid));
        assert!(grains(&refined.grid) <= 120);
    }

    #[test]
    fn saturation_propagates() {
        let r = reference(vec![1.0], 10, (8, 8));
        let cfg = SynthConfig {
            target: GrainTarget::Count(60),
            min_spacing: 3.0,
            ..Default::default()
        };
        assert!(matches!(
            synthesize(&r, &cfg),
            Err(Error::Saturation { .. })
        ));
    }

    #[test]
    fn recolor_checks_totality() {
        let palette = Palette::from_colors(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        let grid = LabelGrid::from_rows(&[[0, 1], [1, 2]]).unwrap();
        let identity: BTreeMap<Label, Label> = (0..3).map(|l| (l, l)).collect();
        assert_eq!(recolor(&grid, &palette, &identity).unwrap(), grid);
        let swap: BTreeMap<Label, Label> = [(0, 1), (1, 0), (2, 2)].into();
        let swapped = recolor(&grid, &palette, &swap).unwrap();
        assert_eq!(swapped.cells(), &[1, 0, 0, 2]);
        let a = compute_stats(&segment_grains(&grid, Connectivity::Four), &grid, 4).unwrap();
        let b = compute_stats(&segment_grains(&swapped, Connectivity::Four), &swapped, 4).unwrap();
        assert_eq!(a.orientation_fractions[0], b.orientation_fractions[1]);
        assert_eq!(a.orientation_fractions[1], b.orientation_fractions[0]);
        let partial: BTreeMap<Label, Label> = [(0, 1), (1, 0)].into();
        assert!(recolor(&grid, &palette, &partial).is_err());
        let outside: BTreeMap<Label, Label> = [(0, 5), (1, 0), (2, 2)].into();
        assert!(recolor(&grid, &palette, &outside).is_err());
    }

    #[test]
    fn remap_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("remap.csv");
        std::fs::write(&path, "from,to\n0,2\n2,0\n").unwrap();
        assert_eq!(
            read_remap_csv(&path).unwrap(),
            BTreeMap::from([(0, 2), (2, 0)])
        );
        std::fs::write(&path, "from,to\n0,2\n0,1\n").unwrap();
        assert!(matches!(read_remap_csv(&path), Err(Error::InvalidInput(_))));
        std::fs::write(&path, "from,to\nx,1\n").unwrap();
        assert!(matches!(
            read_remap_csv(&path),
            Err(Error::CorruptFile { .. })
        ));
    }
}
