use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use micrograin::grains::{
    absorb_small_grains, compute_stats, export_centroids, read_centroids_csv, read_stats_dir,
    segment_grains, write_centroids_csv, write_stats_summary, CentroidRow, Connectivity,
    MicrostructureStats, CENTROIDS_FILE, STATS_FILE,
};
use micrograin::markov::{
    format_program, grain_growth_program, parse_program, run_program, Termination,
};
use micrograin::raster::{
    decode, load_png, quantize_image, read_palette_csv, render, save_png, write_palette_csv,
};
use micrograin::synth::{
    self, build_report, emit_report, read_remap_csv, GrainTarget, SynthConfig, SynthMethod,
    REPORT_DIR,
};
use micrograin::tessellation::{
    lloyd_relax, nearest_assign, sample_centroids, voxel_tessellation_3d, write_volume,
    CentroidSet, Metric,
};
use micrograin::wfc::{parameter_sweep, run_wfc, Backtracking, SweepConfig, Symmetry, WfcOptions};
use micrograin::{Error, LabelGrid, Palette, Result, SeededRng};

const PALETTE_FILE: &str = "palette.csv";

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_labels(image: &Path, palette: &Palette) -> Result<LabelGrid> {
    decode(&load_png(image)?, palette)
}

/// A label map from a PNG: decoded with `palette` when given, otherwise
/// quantized to at most `k` colours.
fn load_reference(image: &Path, palette: Option<&Path>, k: usize) -> Result<(LabelGrid, Palette)> {
    match palette {
        Some(p) => {
            let palette = read_palette_csv(p)?;
            Ok((load_labels(image, &palette)?, palette))
        }
        None => quantize_image(&load_png(image)?, k),
    }
}

fn dims(width: Option<usize>, height: Option<usize>, fallback: (usize, usize)) -> (usize, usize) {
    (width.unwrap_or(fallback.0), height.unwrap_or(fallback.1))
}

/// Inclusive integer list: `3`, `1..5` or `1,2,4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("not a non-negative integer: {t:?}"))
        };
        let values = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
            if a > b {
                return Err(format!("empty range {s:?}"));
            }
            (a..=b).collect()
        } else {
            s.split(',')
                .map(num)
                .collect::<std::result::Result<Vec<_>, _>>()?
        };
        if values.is_empty() {
            return Err("empty list".into());
        }
        Ok(IntList(values))
    }
}

impl fmt::Display for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BacktrackMode {
    None,
    Chronological,
}

/// Options shared by `wfc` and `sweep`.
#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Attempts before giving up; attempt i uses seed + i
    #[arg(long, default_value_t = 10)]
    max_attempts: usize,
    /// Contradiction handling
    #[arg(long, value_enum, default_value_t = BacktrackMode::Chronological)]
    backtracking: BacktrackMode,
    /// Observations plus undos allowed per attempt when backtracking [default: 10 x cells]
    #[arg(long)]
    step_budget: Option<usize>,
    /// Add rotated patterns
    #[arg(long)]
    rotations: bool,
    /// Add mirrored patterns
    #[arg(long)]
    reflections: bool,
    /// Let patterns wrap around the reference edges
    #[arg(long)]
    periodic_input: bool,
    /// Make the output tile seamlessly
    #[arg(long)]
    periodic_output: bool,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self) -> WfcOptions {
        WfcOptions {
            max_attempts: self.max_attempts,
            backtracking: match self.backtracking {
                BacktrackMode::None => Backtracking::None,
                BacktrackMode::Chronological => Backtracking::Chronological {
                    step_budget: self.step_budget,
                },
            },
            symmetry: Symmetry {
                rotations: self.rotations,
                reflections: self.reflections,
            },
            periodic_input: self.periodic_input,
            periodic_output: self.periodic_output,
            seed: self.seed,
            ..WfcOptions::default()
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct IngestArgs {
    /// Input image (8-bit RGB or RGBA PNG)
    #[arg(long = "in")]
    input: PathBuf,
    /// Maximum number of orientation colours
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Grain connectivity (4 or 8)
    #[arg(long, default_value_t = Connectivity::Four)]
    connectivity: Connectivity,
    /// Grain-size histogram bins
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Merge grains smaller than this many cells into their neighbours
    #[arg(long, default_value_t = 1)]
    min_grain_area: usize,
    /// Output directory (labels.png, palette.csv, centroids.csv, stats.txt)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let (mut grid, palette) = quantize_image(&load_png(&a.input)?, a.k)?;
    if a.min_grain_area > 1 {
        grid = absorb_small_grains(&grid, a.connectivity, a.min_grain_area);
    }
    let gm = segment_grains(&grid, a.connectivity);
    let stats = compute_stats(&gm, &grid, a.bins)?;
    create_dir(&a.out_dir)?;
    save_png(a.out_dir.join("labels.png"), &render(&grid, &palette)?)?;
    write_palette_csv(a.out_dir.join(PALETTE_FILE), &palette)?;
    write_centroids_csv(a.out_dir.join(CENTROIDS_FILE), &export_centroids(&gm))?;
    write_stats_summary(a.out_dir.join(STATS_FILE), &stats)?;
    eprintln!(
        "{} grains, {} orientations",
        stats.grain_count,
        palette.len()
    );
    Ok(())
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct WfcArgs {
    /// Reference image (PNG)
    #[arg(long = "in")]
    input: PathBuf,
    /// Palette CSV for the reference; without it the image is quantized to --k colours
    #[arg(long)]
    palette: Option<PathBuf>,
    /// Colour limit when quantizing
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Coarsening factor applied before extraction and undone after solving (1-5)
    #[arg(long, default_value_t = 1)]
    tile_size: usize,
    /// Pattern side length n (1-5)
    #[arg(long, default_value_t = 3)]
    pattern_width: usize,
    /// Output width [default: reference width]
    #[arg(long)]
    width: Option<usize>,
    /// Output height [default: reference height]
    #[arg(long)]
    height: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory (wfc.png, palette.csv, run.txt)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn wfc(a: WfcArgs) -> Result<()> {
    let (reference, palette) = load_reference(&a.input, a.palette.as_deref(), a.k)?;
    let opts = WfcOptions {
        tile_size: a.tile_size,
        pattern_width: a.pattern_width,
        ..a.solver.options()
    };
    let out_dims = dims(a.width, a.height, reference.dims());
    let run = run_wfc(&reference, &opts, out_dims)?;
    create_dir(&a.out_dir)?;
    save_png(a.out_dir.join("wfc.png"), &render(&run.output, &palette)?)?;
    write_palette_csv(a.out_dir.join(PALETTE_FILE), &palette)?;
    write_text(
        &a.out_dir.join("run.txt"),
        &format!(
            "attempts,{}\ncontradictions,{}\n",
            run.attempts, run.contradictions
        ),
    )
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SweepArgs {
    /// Reference image (PNG)
    #[arg(long = "in")]
    input: PathBuf,
    /// Palette CSV for the reference; without it the image is quantized to --k colours
    #[arg(long)]
    palette: Option<PathBuf>,
    /// Colour limit when quantizing
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Tile sizes, e.g. 1..5 or 1,2,4 (one montage row each)
    #[arg(long, default_value = "1..5")]
    tile_sizes: IntList,
    /// Pattern widths, e.g. 1..5 (one montage column each)
    #[arg(long, default_value = "1..5")]
    widths: IntList,
    /// Width of every generated map
    #[arg(long, default_value_t = 32)]
    out_width: usize,
    /// Height of every generated map
    #[arg(long, default_value_t = 32)]
    out_height: usize,
    /// Write 0 instead of wall-clock milliseconds so reruns are byte-identical
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory (montage.png, sweep.csv)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let (reference, palette) = load_reference(&a.input, a.palette.as_deref(), a.k)?;
    if a.out_width == 0 || a.out_height == 0 {
        return Err(invalid("output dimensions must be positive"));
    }
    let cfg = SweepConfig {
        tile_sizes: a.tile_sizes.0.clone(),
        widths: a.widths.0.clone(),
        out_dims: (a.out_width, a.out_height),
        base: a.solver.options(),
        seed: a.solver.seed,
    };
    let report = parameter_sweep(&reference, &cfg);
    create_dir(&a.out_dir)?;
    save_png(a.out_dir.join("montage.png"), &report.montage(&palette)?)?;
    report.write_csv(a.out_dir.join("sweep.csv"), !a.no_timing)?;
    let ok = report
        .cells
        .iter()
        .filter(|c| c.status.as_str() == "ok")
        .count();
    eprintln!("{ok} of {} runs succeeded", report.cells.len());
    Ok(())
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct MarkovArgs {
    /// Palette CSV; the blank label is one past the last entry and renders black
    #[arg(long)]
    palette: PathBuf,
    /// Rule program file
    #[arg(
        long,
        conflicts_with = "centroids",
        required_unless_present = "centroids"
    )]
    program: Option<PathBuf>,
    /// Grow grains from these centroids (ingest centroids.csv format) instead of a program
    #[arg(long)]
    centroids: Option<PathBuf>,
    /// Starting grid for --program; black pixels not in the palette are blank
    #[arg(long = "in", conflicts_with = "centroids")]
    input: Option<PathBuf>,
    /// Canvas width when there is no starting grid
    #[arg(long)]
    width: Option<usize>,
    /// Canvas height when there is no starting grid
    #[arg(long)]
    height: Option<usize>,
    /// Growth neighbourhood for --centroids (4: Manhattan, 8: Chebyshev)
    #[arg(long, default_value_t = Connectivity::Four)]
    neighborhood: Connectivity,
    /// Step cap
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (markov.png, palette.csv, run.txt, program.txt)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn markov(a: MarkovArgs) -> Result<()> {
    let palette = read_palette_csv(&a.palette)?;
    let blank = palette.len() as u16;
    let need_dims = || match (a.width, a.height) {
        (Some(w), Some(h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => Err(invalid(
            "--width and --height are required and must be positive",
        )),
    };
    let (start, program, symbols_blank) = if let Some(path) = &a.centroids {
        let (w, h) = need_dims()?;
        let cs = CentroidSet::from_rows([w, h], &read_centroids_csv(path)?)?;
        if cs.points().iter().any(|p| p.label >= blank) {
            return Err(invalid(
                "centroid labels must be smaller than the palette size",
            ));
        }
        let (grid, program) = grain_growth_program(&cs, a.neighborhood)?;
        let b = grid.blank().unwrap_or(blank);
        (grid, program, b)
    } else {
        let path = a
            .program
            .as_ref()
            .ok_or_else(|| invalid("either --program or --centroids is required"))?;
        let program = parse_program(&read_text(path)?, blank)?;
        let grid = match &a.input {
            Some(img) => load_labels(img, &palette)?.with_blank(blank),
            None => {
                let (w, h) = need_dims()?;
                LabelGrid::filled(w, h, blank).with_blank(blank)
            }
        };
        (grid, program, blank)
    };
    let run = run_program(start, &program, &mut SeededRng::new(a.seed), a.max_steps)?;
    let mut grid = run.grid;
    // labels at or past the palette size are shown as blank
    let cells: Vec<u16> = grid
        .cells()
        .iter()
        .map(|&l| if l >= blank { blank } else { l })
        .collect();
    grid = LabelGrid::new(grid.width(), grid.height(), cells)?.with_blank(blank);
    create_dir(&a.out_dir)?;
    save_png(a.out_dir.join("markov.png"), &render(&grid, &palette)?)?;
    write_palette_csv(a.out_dir.join(PALETTE_FILE), &palette)?;
    write_text(
        &a.out_dir.join("program.txt"),
        &format_program(&program, symbols_blank)?,
    )?;
    let term = match run.termination {
        Termination::Fixpoint => "fixpoint",
        Termination::StepCap => "step_cap",
    };
    write_text(
        &a.out_dir.join("run.txt"),
        &format!(
            "steps,{}\ntermination,{term}\nblank_cells,{}\n",
            run.steps,
            grid.blank_count()
        ),
    )
}

fn parse_fractions(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad fraction {t:?}")))
        })
        .collect()
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct VoronoiArgs {
    /// Palette CSV used to draw the labels
    #[arg(long)]
    palette: PathBuf,
    /// Seed centroids (ingest centroids.csv format; a z column enables 3D)
    #[arg(long, conflicts_with = "count", required_unless_present = "count")]
    centroids: Option<PathBuf>,
    /// Sample this many seeds instead of reading them
    #[arg(long)]
    count: Option<usize>,
    /// Label shares for sampled seeds, e.g. 0.5,0.3,0.2 [default: uniform over the palette]
    #[arg(long)]
    fractions: Option<String>,
    /// Minimum distance between sampled seeds
    #[arg(long, default_value_t = 0.0)]
    min_spacing: f64,
    /// Grid width
    #[arg(long)]
    width: usize,
    /// Grid height
    #[arg(long)]
    height: usize,
    /// Depth; present means a voxel tessellation
    #[arg(long)]
    depth: Option<usize>,
    /// Distance metric (euclidean, manhattan, chebyshev)
    #[arg(long, default_value_t = Metric::Euclidean)]
    metric: Metric,
    /// Lloyd relaxation iterations (2D only)
    #[arg(long, default_value_t = 0)]
    lloyd: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (voronoi.png or volume/, centroids.csv, palette.csv)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn voronoi(a: VoronoiArgs) -> Result<()> {
    let palette = read_palette_csv(&a.palette)?;
    let fractions = match &a.fractions {
        Some(f) => parse_fractions(f)?,
        None => vec![1.0 / palette.len() as f64; palette.len()],
    };
    if fractions.len() > palette.len() {
        return Err(invalid("more label fractions than palette entries"));
    }
    let check_labels = |rows: &[CentroidRow]| -> Result<()> {
        match rows.iter().find(|r| r.label as usize >= palette.len()) {
            Some(r) => Err(invalid(format!(
                "centroid {} has label {} outside the palette",
                r.id, r.label
            ))),
            None => Ok(()),
        }
    };
    let mut rng = SeededRng::new(a.seed);
    create_dir(&a.out_dir)?;
    write_palette_csv(a.out_dir.join(PALETTE_FILE), &palette)?;
    if let Some(depth) = a.depth {
        if a.lloyd > 0 {
            return Err(invalid("--lloyd is only available in 2D"));
        }
        let dims3 = [a.width, a.height, depth];
        let cs = match (&a.centroids, a.count) {
            (Some(p), _) => {
                let rows = read_centroids_csv(p)?;
                check_labels(&rows)?;
                CentroidSet::from_rows(dims3, &rows)?
            }
            (None, Some(n)) => {
                sample_centroids(n, dims3, &fractions, &mut rng, a.min_spacing, a.metric)?
            }
            (None, None) => return Err(invalid("either --centroids or --count is required")),
        };
        let volume = voxel_tessellation_3d(&cs, a.metric);
        write_volume(&a.out_dir.join("volume"), &volume, &palette)?;
        return write_centroids_csv(a.out_dir.join(CENTROIDS_FILE), &cs.to_rows());
    }
    let dims2 = [a.width, a.height];
    let cs = match (&a.centroids, a.count) {
        (Some(p), _) => {
            let rows = read_centroids_csv(p)?;
            check_labels(&rows)?;
            CentroidSet::from_rows(dims2, &rows)?
        }
        (None, Some(n)) => {
            sample_centroids(n, dims2, &fractions, &mut rng, a.min_spacing, a.metric)?
        }
        (None, None) => return Err(invalid("either --centroids or --count is required")),
    };
    let cs = lloyd_relax(&cs, a.lloyd, a.metric);
    let assignment = nearest_assign(&cs, a.metric);
    save_png(
        a.out_dir.join("voronoi.png"),
        &render(&assignment.grid, &palette)?,
    )?;
    let mut rows = cs.to_rows();
    for &o in &assignment.owners {
        rows[o].area += 1;
    }
    write_centroids_csv(a.out_dir.join(CENTROIDS_FILE), &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    MarkovGrowth,
    NearestVoronoi,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    /// Directory written by `ingest` (stats.txt, centroids.csv, palette.csv)
    #[arg(long)]
    ref_stats: PathBuf,
    /// Generation method
    #[arg(long, value_enum, default_value_t = MethodArg::MarkovGrowth)]
    method: MethodArg,
    /// Seed count: a positive integer or match_reference (area-scaled reference grain count)
    #[arg(long, default_value_t = GrainTarget::MatchReference)]
    target_count: GrainTarget,
    /// Output width [default: reference width]
    #[arg(long)]
    width: Option<usize>,
    /// Output height [default: reference height]
    #[arg(long)]
    height: Option<usize>,
    /// Distance for nearest_voronoi and for seed spacing
    #[arg(long, default_value_t = Metric::Euclidean)]
    metric: Metric,
    /// Segmentation connectivity, also the growth neighbourhood (4 or 8)
    #[arg(long, default_value_t = Connectivity::Four)]
    connectivity: Connectivity,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum distance between seeds
    #[arg(long, default_value_t = 2.0)]
    min_spacing: f64,
    /// Keep independently drawn seed labels (skip neighbour-aware relabelling)
    #[arg(long)]
    no_refine: bool,
    /// Histogram bins for the report [default: the reference's]
    #[arg(long)]
    bins: Option<usize>,
    /// Output directory (generated.png, generated_palette.csv, centroids.csv, report/)
    #[arg(long)]
    out_dir: PathBuf,
}

fn stats_of(
    grid: &LabelGrid,
    connectivity: Connectivity,
    bins: usize,
    labels: usize,
) -> Result<MicrostructureStats> {
    let mut s = compute_stats(&segment_grains(grid, connectivity), grid, bins)?;
    s.orientation_fractions.resize(labels, 0.0);
    Ok(s)
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let reference = read_stats_dir(&a.ref_stats)?;
    let palette = read_palette_csv(a.ref_stats.join(PALETTE_FILE))?;
    if reference.orientation_fractions.len() > palette.len() {
        return Err(invalid(
            "reference statistics have more labels than its palette",
        ));
    }
    let cfg = SynthConfig {
        method: match a.method {
            MethodArg::MarkovGrowth => SynthMethod::MarkovGrowth,
            MethodArg::NearestVoronoi => SynthMethod::NearestVoronoi,
        },
        target: a.target_count,
        dims: match (a.width, a.height) {
            (None, None) => None,
            (w, h) => Some(dims(w, h, reference.dims)),
        },
        metric: a.metric,
        connectivity: a.connectivity,
        seed: a.seed,
        min_spacing: a.min_spacing,
        refine: !a.no_refine,
    };
    let out = synth::synthesize(&reference, &cfg)?;
    let bins = a.bins.unwrap_or(reference.histogram.counts.len());
    let generated = stats_of(&out.grid, a.connectivity, bins, palette.len())?;
    let report = build_report(reference, generated, bins)?;
    create_dir(&a.out_dir)?;
    save_png(
        a.out_dir.join("generated.png"),
        &render(&out.grid, &palette)?,
    )?;
    write_palette_csv(a.out_dir.join("generated_palette.csv"), &palette)?;
    write_centroids_csv(a.out_dir.join(CENTROIDS_FILE), &out.centroids.to_rows())?;
    emit_report(&report, &a.out_dir.join(REPORT_DIR))?;
    eprintln!(
        "{} seeds, {} grains (reference {}), relative difference {:.4}",
        out.centroids.len(),
        report.generated.grain_count,
        report.reference.grain_count,
        report.grain_count_rel_diff
    );
    Ok(())
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    /// Reference label image
    #[arg(long)]
    reference: PathBuf,
    /// Palette CSV of the reference
    #[arg(long)]
    reference_palette: PathBuf,
    /// Generated label image
    #[arg(long)]
    generated: PathBuf,
    /// Palette CSV of the generated map [default: the reference palette]
    #[arg(long)]
    generated_palette: Option<PathBuf>,
    /// Grain connectivity (4 or 8)
    #[arg(long, default_value_t = Connectivity::Four)]
    connectivity: Connectivity,
    /// Grain-size histogram bins
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Output directory (summary.txt, stats.csv, two bar charts)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let ref_palette = read_palette_csv(&a.reference_palette)?;
    let gen_palette = match &a.generated_palette {
        Some(p) => read_palette_csv(p)?,
        None => ref_palette.clone(),
    };
    let reference = load_labels(&a.reference, &ref_palette)?;
    let generated = load_labels(&a.generated, &gen_palette)?;
    let report = synth::compare(
        &reference,
        &ref_palette,
        &generated,
        &gen_palette,
        a.connectivity,
        a.bins,
    )?;
    emit_report(&report, &a.out_dir)
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct RecolorArgs {
    /// Label image
    #[arg(long = "in")]
    input: PathBuf,
    /// Palette CSV of the image
    #[arg(long)]
    palette: PathBuf,
    /// CSV with header from,to covering every label in the image
    #[arg(long)]
    remap: PathBuf,
    /// Palette used to draw the result [default: --palette]
    #[arg(long)]
    target_palette: Option<PathBuf>,
    /// Output directory (recolored.png, palette.csv)
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn recolor(a: RecolorArgs) -> Result<()> {
    let palette = read_palette_csv(&a.palette)?;
    let target = match &a.target_palette {
        Some(p) => read_palette_csv(p)?,
        None => palette.clone(),
    };
    let grid = load_labels(&a.input, &palette)?;
    let out = synth::recolor(&grid, &target, &read_remap_csv(&a.remap)?)?;
    create_dir(&a.out_dir)?;
    save_png(a.out_dir.join("recolored.png"), &render(&out, &target)?)?;
    write_palette_csv(a.out_dir.join(PALETTE_FILE), &target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists() {
        assert_eq!("1..5".parse::<IntList>().unwrap().0, vec![1, 2, 3, 4, 5]);
        assert_eq!("1..=3".parse::<IntList>().unwrap().0, vec![1, 2, 3]);
        assert_eq!("2,4".parse::<IntList>().unwrap().0, vec![2, 4]);
        assert_eq!("3".parse::<IntList>().unwrap().0, vec![3]);
        assert!("5..1".parse::<IntList>().is_err());
        assert!("a".parse::<IntList>().is_err());
    }
}
