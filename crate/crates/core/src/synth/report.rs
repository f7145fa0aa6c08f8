//! Reference-versus-generated comparison and its on-disk report.
//!
//! Signed differences are `reference - generated`. The relative grain-count
//! difference is `|generated - reference| / reference`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grains::{
    compute_stats, segment_grains, Connectivity, MicrostructureStats, SizeHistogram,
};
use crate::raster::{save_csv, save_png, LabelGrid, Palette, Rgb, RgbImage};

/// Sub-directory the pipeline writes reports into.
pub const REPORT_DIR: &str = "report";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const STATS_CSV_FILE: &str = "stats.csv";
pub const ORIENTATION_CHART_FILE: &str = "orientation_fractions.png";
pub const VOLUME_CHART_FILE: &str = "volume_fractions.png";

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub reference: MicrostructureStats,
    pub generated: MicrostructureStats,
    pub grain_count_abs_diff: usize,
    pub grain_count_rel_diff: f64,
    /// Per label, reference minus generated.
    pub orientation_diffs: Vec<f64>,
    pub orientation_max_abs_diff: f64,
    /// L1 distance between normalised size histograms on shared bins, in [0, 2].
    pub histogram_l1: f64,
}

/// Rebuilds both size histograms over a shared range (up to the larger of the
/// two largest grains) and fills in the differences.
pub fn build_report(
    mut reference: MicrostructureStats,
    mut generated: MicrostructureStats,
    bins: usize,
) -> Result<StatsReport> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if reference.grain_count == 0 {
        return Err(Error::invalid(
            "reference has no grains; relative difference is undefined",
        ));
    }
    let max_area = reference.max_grain_area().max(generated.max_grain_area());
    reference.histogram = SizeHistogram::build(&reference.grain_areas, bins, max_area);
    generated.histogram = SizeHistogram::build(&generated.grain_areas, bins, max_area);

    let abs = reference.grain_count.abs_diff(generated.grain_count);
    let labels = reference
        .orientation_fractions
        .len()
        .max(generated.orientation_fractions.len());
    let orientation_diffs: Vec<f64> = (0..labels)
        .map(|l| {
            let r = reference
                .orientation_fractions
                .get(l)
                .copied()
                .unwrap_or(0.0);
            let g = generated
                .orientation_fractions
                .get(l)
                .copied()
                .unwrap_or(0.0);
            r - g
        })
        .collect();
    let orientation_max_abs_diff = orientation_diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let histogram_l1 = reference
        .histogram
        .normalized()
        .iter()
        .zip(generated.histogram.normalized())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(StatsReport {
        grain_count_abs_diff: abs,
        grain_count_rel_diff: abs as f64 / reference.grain_count as f64,
        orientation_diffs,
        orientation_max_abs_diff,
        histogram_l1,
        reference,
        generated,
    })
}

/// Segments both grids identically and compares them. Both grids must be
/// drawn with the same palette.
pub fn compare(
    reference: &LabelGrid,
    reference_palette: &Palette,
    generated: &LabelGrid,
    generated_palette: &Palette,
    connectivity: Connectivity,
    bins: usize,
) -> Result<StatsReport> {
    if reference_palette.colors() != generated_palette.colors() {
        return Err(Error::invalid(
            "reference and generated grids use different palettes",
        ));
    }
    reference.validate(reference_palette.len())?;
    generated.validate(generated_palette.len())?;
    let stats = |g: &LabelGrid| -> Result<MicrostructureStats> {
        let mut s = compute_stats(&segment_grains(g, connectivity), g, bins)?;
        s.orientation_fractions.resize(reference_palette.len(), 0.0);
        Ok(s)
    };
    build_report(stats(reference)?, stats(generated)?, bins)
}

fn summary_text(r: &StatsReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k},{v}");
    };
    line("reference_grain_count", r.reference.grain_count.to_string());
    line("generated_grain_count", r.generated.grain_count.to_string());
    line("grain_count_abs_diff", r.grain_count_abs_diff.to_string());
    line(
        "grain_count_rel_diff",
        format!("{:.4}", r.grain_count_rel_diff),
    );
    line("labels", r.orientation_diffs.len().to_string());
    for (l, d) in r.orientation_diffs.iter().enumerate() {
        line(
            &format!("orientation_fraction_ref_{l}"),
            format!("{:.4}", r.reference.orientation_fraction(l as u16)),
        );
        line(
            &format!("orientation_fraction_gen_{l}"),
            format!("{:.4}", r.generated.orientation_fraction(l as u16)),
        );
        line(&format!("orientation_fraction_diff_{l}"), format!("{d:.4}"));
    }
    line(
        "orientation_fraction_max_abs_diff",
        format!("{:.4}", r.orientation_max_abs_diff),
    );
    line("hist_bins", r.reference.histogram.counts.len().to_string());
    for (i, e) in r.reference.histogram.edges.iter().enumerate() {
        line(&format!("hist_edge_{i}"), format!("{e:.4}"));
    }
    line("volume_fraction_l1", format!("{:.4}", r.histogram_l1));
    s
}

fn stats_rows(r: &StatsReport) -> Vec<[String; 5]> {
    let mut rows = vec![[
        "grain_count".to_string(),
        String::new(),
        r.reference.grain_count.to_string(),
        r.generated.grain_count.to_string(),
        (r.reference.grain_count as i64 - r.generated.grain_count as i64).to_string(),
    ]];
    for (l, d) in r.orientation_diffs.iter().enumerate() {
        rows.push([
            "orientation_fraction".to_string(),
            l.to_string(),
            r.reference.orientation_fraction(l as u16).to_string(),
            r.generated.orientation_fraction(l as u16).to_string(),
            d.to_string(),
        ]);
    }
    let (a, b) = (
        r.reference.histogram.normalized(),
        r.generated.histogram.normalized(),
    );
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        rows.push([
            "volume_hist".to_string(),
            i.to_string(),
            x.to_string(),
            y.to_string(),
            (x - y).to_string(),
        ]);
    }
    rows
}

const REF_COLOR: Rgb = [31, 119, 180];
const GEN_COLOR: Rgb = [255, 127, 14];
const BAR: usize = 12;
const GROUP_GAP: usize = 10;
const MARGIN: usize = 10;
const PLOT_HEIGHT: usize = 200;

/// Grouped bars: each pair is (reference, generated), drawn left to right on
/// one shared scale.
pub fn bar_chart(pairs: &[(f64, f64)]) -> RgbImage {
    let groups = pairs.len().max(1);
    let width = 2 * MARGIN + groups * 2 * BAR + (groups - 1) * GROUP_GAP;
    let height = 2 * MARGIN + PLOT_HEIGHT + 1;
    let mut img = RgbImage::filled(width, height, [255, 255, 255]);
    let top = pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold(0.0f64, f64::max);
    let base = MARGIN + PLOT_HEIGHT;
    for (g, &(a, b)) in pairs.iter().enumerate() {
        let x0 = MARGIN + g * (2 * BAR + GROUP_GAP);
        for (k, (v, color)) in [(a, REF_COLOR), (b, GEN_COLOR)].into_iter().enumerate() {
            let h = if top > 0.0 {
                (v / top * PLOT_HEIGHT as f64).round() as usize
            } else {
                0
            };
            if h > 0 {
                let x = x0 + k * BAR;
                img.fill_rect(x, base - h, x + BAR, base, color);
            }
        }
    }
    img.fill_rect(MARGIN / 2, base, width - MARGIN / 2, base + 1, [0, 0, 0]);
    img
}

/// Writes `summary.txt`, `stats.csv` and the two bar charts into `dir`.
pub fn emit_report(report: &StatsReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary = dir.join(SUMMARY_FILE);
    fs::write(&summary, summary_text(report)).map_err(|e| Error::io(&summary, e))?;
    save_csv(
        dir.join(STATS_CSV_FILE),
        &["quantity", "index", "reference", "generated", "difference"],
        stats_rows(report),
    )?;
    let orientation: Vec<(f64, f64)> = (0..report.orientation_diffs.len())
        .map(|l| {
            (
                report.reference.orientation_fraction(l as u16),
                report.generated.orientation_fraction(l as u16),
            )
        })
        .collect();
    save_png(dir.join(ORIENTATION_CHART_FILE), &bar_chart(&orientation))?;
    let volume: Vec<(f64, f64)> = report
        .reference
        .histogram
        .normalized()
        .into_iter()
        .zip(report.generated.histogram.normalized())
        .collect();
    save_png(dir.join(VOLUME_CHART_FILE), &bar_chart(&volume))
}
