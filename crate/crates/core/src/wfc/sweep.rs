//! Tile-size x pattern-width parameter sweep.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::{run_wfc, WfcOptions};
use crate::error::{Error, Result};
use crate::raster::{render, save_csv, LabelGrid, Palette, Rgb, RgbImage};
use crate::rng::derive_seed;

/// Gap between montage cells, in pixels.
const GUTTER: usize = 2;
const GUTTER_COLOR: Rgb = [255, 255, 255];
const ERROR_FILL: Rgb = [128, 128, 128];
const FAILED_FILL: Rgb = [96, 0, 0];
const MARK_COLOR: Rgb = [0, 0, 0];

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub tile_sizes: Vec<usize>,
    pub widths: Vec<usize>,
    pub out_dims: (usize, usize),
    /// Template for every run; `tile_size`, `pattern_width` and `seed` are
    /// overwritten per cell.
    pub base: WfcOptions,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tile_sizes: (1..=5).collect(),
            widths: (1..=5).collect(),
            out_dims: (32, 32),
            base: WfcOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// The solver exhausted its attempts.
    Failed,
    /// The combination could not run (e.g. coarsened reference smaller than
    /// the pattern width).
    Error(String),
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Failed => "failed",
            CellStatus::Error(_) => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub tile_size: usize,
    pub width: usize,
    pub status: CellStatus,
    pub attempts: usize,
    pub contradictions: usize,
    pub millis: u128,
    pub output: Option<LabelGrid>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub tile_sizes: Vec<usize>,
    pub widths: Vec<usize>,
    pub out_dims: (usize, usize),
    /// Row-major over (tile size, width).
    pub cells: Vec<SweepCell>,
}

/// Runs one WFC per (tile size, width) pair. Cells run in parallel, each with
/// a seed derived from the sweep seed and its pair, so results do not depend
/// on scheduling.
pub fn parameter_sweep(reference: &LabelGrid, cfg: &SweepConfig) -> SweepReport {
    let pairs: Vec<(usize, usize)> = cfg
        .tile_sizes
        .iter()
        .flat_map(|&t| cfg.widths.iter().map(move |&w| (t, w)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(tile_size, width)| {
            let opts = WfcOptions {
                tile_size,
                pattern_width: width,
                seed: derive_seed(cfg.seed, (tile_size as u64) << 32 | width as u64),
                ..cfg.base.clone()
            };
            let start = Instant::now();
            let result = run_wfc(reference, &opts, cfg.out_dims);
            let millis = start.elapsed().as_millis();
            let (status, attempts, contradictions, output) = match result {
                Ok(run) => (
                    CellStatus::Ok,
                    run.attempts,
                    run.contradictions,
                    Some(run.output),
                ),
                Err(Error::WfcFailure {
                    attempts,
                    contradictions,
                }) => (CellStatus::Failed, attempts, contradictions, None),
                Err(e) => (CellStatus::Error(e.to_string()), 0, 0, None),
            };
            SweepCell {
                tile_size,
                width,
                status,
                attempts,
                contradictions,
                millis,
                output,
            }
        })
        .collect();
    SweepReport {
        tile_sizes: cfg.tile_sizes.clone(),
        widths: cfg.widths.clone(),
        out_dims: cfg.out_dims,
        cells,
    }
}

impl SweepReport {
    pub fn get(&self, tile_size: usize, width: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.tile_size == tile_size && c.width == width)
    }

    /// CSV rows `tile_size,width,status,attempts,contradictions,millis`.
    /// With `timing` off, `millis` is written as 0 so output is reproducible.
    pub fn csv_rows(&self, timing: bool) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                vec![
                    c.tile_size.to_string(),
                    c.width.to_string(),
                    c.status.as_str().to_string(),
                    c.attempts.to_string(),
                    c.contradictions.to_string(),
                    if timing {
                        c.millis.to_string()
                    } else {
                        "0".to_string()
                    },
                ]
            })
            .collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, timing: bool) -> Result<()> {
        save_csv(
            path,
            &[
                "tile_size",
                "width",
                "status",
                "attempts",
                "contradictions",
                "millis",
            ],
            self.csv_rows(timing),
        )
    }

    /// Grid of outputs: rows are tile sizes, columns pattern widths. Failed
    /// cells are dark red, error cells grey with a black cross.
    pub fn montage(&self, palette: &Palette) -> Result<RgbImage> {
        let (cw, ch) = self.out_dims;
        let cols = self.widths.len();
        let rows = self.tile_sizes.len();
        let mut img = RgbImage::filled(
            cols * cw + (cols + 1) * GUTTER,
            rows * ch + (rows + 1) * GUTTER,
            GUTTER_COLOR,
        );
        for (r, &t) in self.tile_sizes.iter().enumerate() {
            for (c, &w) in self.widths.iter().enumerate() {
                let x0 = GUTTER + c * (cw + GUTTER);
                let y0 = GUTTER + r * (ch + GUTTER);
                let cell = self.get(t, w).expect("every pair has a cell");
                match (&cell.status, &cell.output) {
                    (CellStatus::Ok, Some(out)) => img.blit(&render(out, palette)?, x0, y0),
                    (CellStatus::Failed, _) => img.fill_rect(x0, y0, x0 + cw, y0 + ch, FAILED_FILL),
                    _ => {
                        img.fill_rect(x0, y0, x0 + cw, y0 + ch, ERROR_FILL);
                        let span = cw.min(ch);
                        for i in 0..span {
                            img.set(x0 + i * cw / span, y0 + i * ch / span, MARK_COLOR);
                            img.set(x0 + cw - 1 - i * cw / span, y0 + i * ch / span, MARK_COLOR);
                        }
                    }
                }
            }
        }
        Ok(img)
    }
}
