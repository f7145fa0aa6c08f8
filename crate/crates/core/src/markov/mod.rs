//! Grid rewriting with ordered rules, in the style of MarkovJunior.
//!
//! A program is a list of nodes. Each step runs the first node that can act,
//! so earlier nodes always take priority. A `one` node rewrites a single
//! random match; an `all` node rewrites every match it can in one step.

mod growth;
mod parse;

pub use growth::grain_growth_program;
pub use parse::{format_program, label_symbol, parse_program, symbol_label};

use crate::error::{Error, Result};
use crate::raster::{Label, LabelGrid};
use crate::rng::SeededRng;

/// Largest rule extent in either direction.
pub const MAX_RULE_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InCell {
    Is(Label),
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutCell {
    Set(Label),
    Keep,
}

/// One orientation of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleShape {
    pub width: usize,
    pub height: usize,
    pub input: Vec<InCell>,
    pub output: Vec<OutCell>,
}

impl RuleShape {
    fn rotated(&self) -> Self {
        // clockwise: new (x, y) reads old (y, h - 1 - x)
        let (w, h) = (self.height, self.width);
        let mut input = Vec::with_capacity(self.input.len());
        let mut output = Vec::with_capacity(self.output.len());
        for y in 0..h {
            for x in 0..w {
                let src = (self.height - 1 - x) * self.width + y;
                input.push(self.input[src]);
                output.push(self.output[src]);
            }
        }
        Self {
            width: w,
            height: h,
            input,
            output,
        }
    }

    fn reflected(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                let src = y * self.width + (self.width - 1 - x);
                out.input[y * self.width + x] = self.input[src];
                out.output[y * self.width + x] = self.output[src];
            }
        }
        out
    }

    fn matches_at(&self, grid: &LabelGrid, x: usize, y: usize) -> bool {
        let w = grid.width();
        let cells = grid.cells();
        (0..self.height).all(|dy| {
            let row = (y + dy) * w + x;
            self.input[dy * self.width..(dy + 1) * self.width]
                .iter()
                .zip(&cells[row..row + self.width])
                .all(|(p, &c)| match p {
                    InCell::Is(l) => *l == c,
                    InCell::Any => true,
                })
        })
    }

    fn writes(
        &self,
        grid_width: usize,
        x: usize,
        y: usize,
    ) -> impl Iterator<Item = (usize, Label)> + '_ {
        self.output
            .iter()
            .enumerate()
            .filter_map(move |(i, o)| match o {
                OutCell::Set(l) => {
                    Some(((y + i / self.width) * grid_width + x + i % self.width, *l))
                }
                OutCell::Keep => None,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    base: RuleShape,
    rotations: bool,
    reflections: bool,
    variants: Vec<RuleShape>,
}

impl RewriteRule {
    pub fn new(
        width: usize,
        height: usize,
        input: Vec<InCell>,
        output: Vec<OutCell>,
        rotations: bool,
        reflections: bool,
    ) -> Result<Self> {
        if width == 0 || height == 0 || width > MAX_RULE_SIZE || height > MAX_RULE_SIZE {
            return Err(Error::invalid(format!(
                "rule is {width}x{height}; rules must be between 1x1 and {MAX_RULE_SIZE}x{MAX_RULE_SIZE}"
            )));
        }
        if input.len() != width * height || output.len() != width * height {
            return Err(Error::invalid(
                "rule input and output must have the same shape",
            ));
        }
        let changes = input.iter().zip(&output).any(|(i, o)| match o {
            OutCell::Set(b) => *i != InCell::Is(*b),
            OutCell::Keep => false,
        });
        if !changes {
            return Err(Error::invalid("rule output never differs from its input"));
        }
        let base = RuleShape {
            width,
            height,
            input,
            output,
        };
        let mut variants: Vec<RuleShape> = Vec::new();
        let mut current = base.clone();
        let turns = if rotations { 4 } else { 1 };
        let mut rotated = Vec::with_capacity(turns);
        for _ in 0..turns {
            rotated.push(current.clone());
            current = current.rotated();
        }
        let mut all = rotated.clone();
        if reflections {
            all.extend(rotated.iter().map(RuleShape::reflected));
        }
        for v in all {
            if !variants.contains(&v) {
                variants.push(v);
            }
        }
        Ok(Self {
            base,
            rotations,
            reflections,
            variants,
        })
    }

    pub fn base(&self) -> &RuleShape {
        &self.base
    }

    pub fn rotations(&self) -> bool {
        self.rotations
    }

    pub fn reflections(&self) -> bool {
        self.reflections
    }

    /// Distinct orientations: rotations first, then their mirror images.
    pub fn variants(&self) -> &[RuleShape] {
        &self.variants
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Placement {
    pub x: usize,
    pub y: usize,
    pub variant: usize,
}

/// Every placement of `rule` inside `grid`, row-major, then by variant.
pub fn find_matches(grid: &LabelGrid, rule: &RewriteRule) -> Vec<Placement> {
    let (w, h) = grid.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            for (variant, shape) in rule.variants.iter().enumerate() {
                if x + shape.width <= w && y + shape.height <= h && shape.matches_at(grid, x, y) {
                    out.push(Placement { x, y, variant });
                }
            }
        }
    }
    out
}

fn has_match(grid: &LabelGrid, rule: &RewriteRule) -> bool {
    let (w, h) = grid.dims();
    (0..h).any(|y| {
        (0..w).any(|x| {
            rule.variants
                .iter()
                .any(|s| x + s.width <= w && y + s.height <= h && s.matches_at(grid, x, y))
        })
    })
}

/// Writes a placement into the grid.
pub fn apply_placement(grid: &mut LabelGrid, rule: &RewriteRule, p: Placement) {
    let w = grid.width();
    let shape = &rule.variants[p.variant];
    let cells = grid.cells_mut();
    for (i, l) in shape.writes(w, p.x, p.y) {
        cells[i] = l;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    One,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleNode {
    pub kind: NodeKind,
    pub rules: Vec<RewriteRule>,
    /// Maximum number of steps this node may take over a whole run.
    pub step_limit: Option<usize>,
}

impl RuleNode {
    pub fn new(kind: NodeKind, rules: Vec<RewriteRule>, step_limit: Option<usize>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::invalid("a rule node needs at least one rule"));
        }
        if step_limit == Some(0) {
            return Err(Error::invalid("node step limit must be positive"));
        }
        Ok(Self {
            kind,
            rules,
            step_limit,
        })
    }

    fn can_act(&self, grid: &LabelGrid) -> bool {
        self.rules.iter().any(|r| has_match(grid, r))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleProgram {
    nodes: Vec<RuleNode>,
}

impl RuleProgram {
    pub fn new(nodes: Vec<RuleNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("a rule program needs at least one node"));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[RuleNode] {
        &self.nodes
    }
}

/// The first rule with any match rewrites one uniformly chosen placement.
/// Returns whether anything matched.
pub fn apply_one(grid: &mut LabelGrid, node: &RuleNode, rng: &mut SeededRng) -> bool {
    for rule in &node.rules {
        let matches = find_matches(grid, rule);
        if !matches.is_empty() {
            let p = matches[rng.below(matches.len())];
            apply_placement(grid, rule, p);
            return true;
        }
    }
    false
}

/// Matches of every rule in the node are found against the grid as it is at
/// the start of the step, shuffled, then applied in that order. A placement
/// is skipped when it would overwrite a cell already written this step with
/// a different label. Returns whether anything matched.
pub fn apply_all(grid: &mut LabelGrid, node: &RuleNode, rng: &mut SeededRng) -> bool {
    let mut pool: Vec<(usize, Placement)> = Vec::new();
    for (r, rule) in node.rules.iter().enumerate() {
        pool.extend(find_matches(grid, rule).into_iter().map(|p| (r, p)));
    }
    if pool.is_empty() {
        return false;
    }
    rng.shuffle(&mut pool);
    let w = grid.width();
    let mut written = vec![false; grid.len()];
    for (r, p) in pool {
        let shape = &node.rules[r].variants[p.variant];
        let clash = shape
            .writes(w, p.x, p.y)
            .any(|(i, l)| written[i] && grid.cells()[i] != l);
        if clash {
            continue;
        }
        let cells = grid.cells_mut();
        for (i, l) in shape.writes(w, p.x, p.y) {
            cells[i] = l;
            written[i] = true;
        }
    }
    true
}

pub fn apply_node(grid: &mut LabelGrid, node: &RuleNode, rng: &mut SeededRng) -> bool {
    match node.kind {
        NodeKind::One => apply_one(grid, node, rng),
        NodeKind::All => apply_all(grid, node, rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Fixpoint,
    StepCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramRun {
    pub grid: LabelGrid,
    pub steps: usize,
    pub termination: Termination,
}

/// Runs until no node can act or `max_steps` steps have been taken. A node
/// that reached its own step limit no longer counts as able to act.
pub fn run_program(
    mut grid: LabelGrid,
    program: &RuleProgram,
    rng: &mut SeededRng,
    max_steps: usize,
) -> Result<ProgramRun> {
    if max_steps == 0 {
        return Err(Error::invalid("max_steps must be at least 1"));
    }
    let mut node_steps = vec![0usize; program.nodes.len()];
    let mut steps = 0;
    loop {
        let next = program.nodes.iter().enumerate().find(|(i, node)| {
            node.step_limit.is_none_or(|lim| node_steps[*i] < lim) && node.can_act(&grid)
        });
        let Some((i, node)) = next else {
            return Ok(ProgramRun {
                grid,
                steps,
                termination: Termination::Fixpoint,
            });
        };
        if steps == max_steps {
            return Ok(ProgramRun {
                grid,
                steps,
                termination: Termination::StepCap,
            });
        }
        apply_node(&mut grid, node, rng);
        node_steps[i] += 1;
        steps += 1;
    }
}
