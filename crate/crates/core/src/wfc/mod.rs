//! Overlapping-model Wave Function Collapse.
//!
//! The reference is optionally coarsened by `tile_size`, every `n x n` window
//! becomes a pattern, and the solver fills an output wave so that every window
//! of the result is one of those patterns. On contradiction the solver either
//! restarts with the next attempt seed or backtracks chronologically.

mod pattern;
mod sweep;
mod wave;

pub use pattern::{
    extract_patterns, overlap_compatible, Adjacency, PatternSet, Symmetry, DIRECTIONS,
};
pub use sweep::{parameter_sweep, CellStatus, SweepCell, SweepConfig, SweepReport};
pub use wave::{Contradiction, Observation, WaveState, WfcModel, ENTROPY_NOISE};

use crate::error::{Error, Result};
use crate::raster::{Label, LabelGrid};
use crate::rng::SeededRng;

pub const MAX_TILE_SIZE: usize = 5;
pub const MAX_PATTERN_WIDTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backtracking {
    /// Restart with a fresh seed on every contradiction.
    None,
    /// Undo the latest observation and forbid it. `step_budget` caps
    /// observations plus undos per attempt; `None` means 10 x output cells.
    Chronological { step_budget: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfcOptions {
    pub tile_size: usize,
    pub pattern_width: usize,
    pub max_attempts: usize,
    pub backtracking: Backtracking,
    pub symmetry: Symmetry,
    pub periodic_input: bool,
    pub periodic_output: bool,
    pub seed: u64,
}

impl Default for WfcOptions {
    fn default() -> Self {
        Self {
            tile_size: 1,
            pattern_width: 3,
            max_attempts: 10,
            backtracking: Backtracking::Chronological { step_budget: None },
            symmetry: Symmetry::default(),
            periodic_input: false,
            periodic_output: false,
            seed: 0,
        }
    }
}

impl WfcOptions {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_TILE_SIZE).contains(&self.tile_size) {
            return Err(Error::invalid(format!(
                "tile size must be in 1..={MAX_TILE_SIZE}, got {}",
                self.tile_size
            )));
        }
        if !(1..=MAX_PATTERN_WIDTH).contains(&self.pattern_width) {
            return Err(Error::invalid(format!(
                "pattern width must be in 1..={MAX_PATTERN_WIDTH}, got {}",
                self.pattern_width
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("max attempts must be at least 1"));
        }
        if let Backtracking::Chronological {
            step_budget: Some(0),
        } = self.backtracking
        {
            return Err(Error::invalid("backtracking step budget must be positive"));
        }
        Ok(())
    }
}

/// Majority label of each `tile_size x tile_size` block (ties: smallest label).
/// Edge blocks may be partial; output is `ceil(dims / tile_size)`.
pub fn downsample(grid: &LabelGrid, tile_size: usize) -> LabelGrid {
    let t = tile_size.max(1);
    if t == 1 {
        return grid.clone();
    }
    let (w, h) = grid.dims();
    let (ow, oh) = (w.div_ceil(t), h.div_ceil(t));
    let bound = grid
        .cells()
        .iter()
        .map(|&c| c as usize + 1)
        .max()
        .unwrap_or(1);
    let mut votes = vec![0usize; bound];
    let mut cells = Vec::with_capacity(ow * oh);
    for oy in 0..oh {
        for ox in 0..ow {
            votes.iter_mut().for_each(|v| *v = 0);
            for y in oy * t..((oy + 1) * t).min(h) {
                for x in ox * t..((ox + 1) * t).min(w) {
                    votes[grid.get(x, y) as usize] += 1;
                }
            }
            let mut best = 0;
            for (l, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = l;
                }
            }
            cells.push(best as Label);
        }
    }
    let out = LabelGrid::new(ow, oh, cells).expect("positive dims");
    match grid.blank() {
        Some(b) => out.with_blank(b),
        None => out,
    }
}

/// Nearest-neighbour block fill by `tile_size`, cropped to `width x height`.
pub fn upsample(grid: &LabelGrid, tile_size: usize, width: usize, height: usize) -> LabelGrid {
    let t = tile_size.max(1);
    let cells = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| {
            grid.get(
                (x / t).min(grid.width() - 1),
                (y / t).min(grid.height() - 1),
            )
        })
        .collect();
    LabelGrid::new(width, height, cells).expect("positive dims")
}

/// Result of a single solve attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum AttemptOutcome {
    Solved(LabelGrid),
    /// The attempt ended in an unrecoverable contradiction (or ran out of
    /// backtracking budget); `contradictions` counts every one it hit.
    Failed {
        contradictions: usize,
    },
}

/// Runs one attempt on a `width x height` wave.
pub fn solve_attempt(
    model: &WfcModel,
    width: usize,
    height: usize,
    periodic: bool,
    backtracking: Backtracking,
    rng: &mut SeededRng,
) -> AttemptOutcome {
    let mut wave = WaveState::new(model, width, height, periodic, rng);
    if wave.initialize().is_err() {
        return AttemptOutcome::Failed { contradictions: 1 };
    }
    let budget = match backtracking {
        Backtracking::None => usize::MAX,
        Backtracking::Chronological { step_budget } => step_budget.unwrap_or(10 * width * height),
    };
    let mut decisions: Vec<(usize, Observation)> = Vec::new();
    let mut contradictions = 0;
    let mut steps = 0usize;
    loop {
        let mark = wave.trail_len();
        let obs = match wave.observe(rng) {
            Ok(Some(obs)) => obs,
            Ok(None) => return AttemptOutcome::Solved(wave.decode()),
            Err(Contradiction) => unreachable!("contradictions are resolved before observing"),
        };
        steps += 1;
        decisions.push((mark, obs));
        if wave.propagate().is_ok() {
            continue;
        }
        contradictions += 1;
        if backtracking == Backtracking::None {
            return AttemptOutcome::Failed { contradictions };
        }
        // Unwind until forbidding the latest choice leaves a consistent wave.
        loop {
            let Some((mark, bad)) = decisions.pop() else {
                return AttemptOutcome::Failed { contradictions };
            };
            steps += 1;
            if steps > budget {
                return AttemptOutcome::Failed { contradictions };
            }
            wave.undo_to(mark);
            wave.ban(bad.cell, bad.pattern);
            if wave.propagate().is_ok() {
                break;
            }
            contradictions += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WfcRun {
    pub output: LabelGrid,
    pub attempts: usize,
    pub contradictions: usize,
}

/// Solves with up to `max_attempts` attempts; attempt `i` uses seed `seed + i`.
pub fn run_model(
    model: &WfcModel,
    width: usize,
    height: usize,
    opts: &WfcOptions,
) -> Result<WfcRun> {
    let mut contradictions = 0;
    for attempt in 0..opts.max_attempts {
        let mut rng = SeededRng::new(opts.seed.wrapping_add(attempt as u64));
        match solve_attempt(
            model,
            width,
            height,
            opts.periodic_output,
            opts.backtracking,
            &mut rng,
        ) {
            AttemptOutcome::Solved(output) => {
                return Ok(WfcRun {
                    output,
                    attempts: attempt + 1,
                    contradictions,
                });
            }
            AttemptOutcome::Failed { contradictions: c } => contradictions += c,
        }
    }
    Err(Error::WfcFailure {
        attempts: opts.max_attempts,
        contradictions,
    })
}

/// Full pipeline: downsample, extract, solve, decode, upsample to `out_dims`.
pub fn run_wfc(
    reference: &LabelGrid,
    opts: &WfcOptions,
    out_dims: (usize, usize),
) -> Result<WfcRun> {
    opts.validate()?;
    let (ow, oh) = out_dims;
    if ow == 0 || oh == 0 {
        return Err(Error::invalid("output dimensions must be positive"));
    }
    let (ww, wh) = (ow.div_ceil(opts.tile_size), oh.div_ceil(opts.tile_size));
    if ww < opts.pattern_width || wh < opts.pattern_width {
        return Err(Error::invalid(format!(
            "output of {ww}x{wh} texels cannot hold a {n}x{n} pattern",
            n = opts.pattern_width
        )));
    }
    let coarse = downsample(reference, opts.tile_size);
    let patterns = extract_patterns(
        &coarse,
        opts.pattern_width,
        opts.periodic_input,
        opts.symmetry,
    )?;
    let model = WfcModel::new(patterns);
    let mut run = run_model(&model, ww, wh, opts)?;
    run.output = upsample(&run.output, opts.tile_size, ow, oh);
    Ok(run)
}
