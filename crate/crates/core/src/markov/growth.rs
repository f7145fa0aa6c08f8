use std::collections::BTreeSet;

use super::{InCell, NodeKind, OutCell, RewriteRule, RuleNode, RuleProgram};
use crate::error::{Error, Result};
use crate::grains::Connectivity;
use crate::raster::{Label, LabelGrid};
use crate::tessellation::CentroidSet2;

/// Builds a blank canvas with every seed stamped at the cell containing it,
/// plus a single `all` node that grows each label into adjacent blank cells.
///
/// The blank label is one past the largest seed label. With the 4-neighbour
/// rules the fixpoint is a Manhattan-distance tessellation; the 8-neighbour
/// variant adds diagonal steps and gives Chebyshev distance.
pub fn grain_growth_program(
    cs: &CentroidSet2,
    neighborhood: Connectivity,
) -> Result<(LabelGrid, RuleProgram)> {
    let [w, h] = cs.dims();
    let max_label = cs.points().iter().map(|p| p.label).max().unwrap_or(0);
    let blank = max_label
        .checked_add(1)
        .ok_or_else(|| Error::invalid("seed labels leave no room for a blank label"))?;
    let mut grid = LabelGrid::filled(w, h, blank).with_blank(blank);
    for i in 0..cs.len() {
        let [x, y] = cs.cell_of(i);
        if grid.get(x, y) != blank {
            return Err(Error::invalid(format!(
                "seed {i} shares cell ({x}, {y}) with an earlier seed"
            )));
        }
        grid.set(x, y, cs.points()[i].label);
    }

    let labels: BTreeSet<Label> = cs.points().iter().map(|p| p.label).collect();
    let mut rules = Vec::new();
    for &l in &labels {
        rules.push(RewriteRule::new(
            2,
            1,
            vec![InCell::Is(l), InCell::Is(blank)],
            vec![OutCell::Keep, OutCell::Set(l)],
            true,
            false,
        )?);
        if neighborhood == Connectivity::Eight {
            rules.push(RewriteRule::new(
                2,
                2,
                vec![InCell::Is(l), InCell::Any, InCell::Any, InCell::Is(blank)],
                vec![OutCell::Keep, OutCell::Keep, OutCell::Keep, OutCell::Set(l)],
                true,
                false,
            )?);
        }
    }
    let program = RuleProgram::new(vec![RuleNode::new(NodeKind::All, rules, None)?])?;
    Ok((grid, program))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{run_program, Termination};
    use crate::rng::SeededRng;
    use crate::tessellation::{CentroidSet, Seed};

    fn seeds(dims: [usize; 2], pts: &[(usize, usize, Label)]) -> CentroidSet2 {
        let points = pts
            .iter()
            .map(|&(x, y, label)| Seed {
                position: [x as f64 + 0.5, y as f64 + 0.5],
                label,
            })
            .collect();
        CentroidSet::new(dims, points).unwrap()
    }

    #[test]
    fn one_seed_fills_grid() {
        let (grid, prog) =
            grain_growth_program(&seeds([6, 5], &[(2, 3, 4)]), Connectivity::Four).unwrap();
        assert_eq!(grid.blank(), Some(5));
        let run = run_program(grid, &prog, &mut SeededRng::new(0), 100).unwrap();
        assert_eq!(run.termination, Termination::Fixpoint);
        assert!(run.grid.cells().iter().all(|&l| l == 4));
        // farthest cell is 3 + 3 steps away
        assert_eq!(run.steps, 6);
    }

    #[test]
    fn eight_neighbourhood_grows_in_squares() {
        let (grid, prog) =
            grain_growth_program(&seeds([5, 5], &[(2, 2, 0)]), Connectivity::Eight).unwrap();
        let run = run_program(grid, &prog, &mut SeededRng::new(0), 100).unwrap();
        assert_eq!(run.steps, 2);
        assert_eq!(run.grid.blank_count(), 0);
    }

    #[test]
    fn duplicate_cell_rejected() {
        let cs = CentroidSet::new(
            [4, 4],
            vec![
                Seed {
                    position: [1.2, 1.7],
                    label: 0,
                },
                Seed {
                    position: [1.9, 1.1],
                    label: 1,
                },
            ],
        )
        .unwrap();
        assert!(grain_growth_program(&cs, Connectivity::Four).is_err());
    }

    #[test]
    fn opposite_corners_split_on_bisector() {
        let (grid, prog) =
            grain_growth_program(&seeds([8, 8], &[(0, 0, 0), (7, 7, 1)]), Connectivity::Four)
                .unwrap();
        let run = run_program(grid, &prog, &mut SeededRng::new(9), 100).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let (d0, d1) = (x + y, 14 - x - y);
                if d0 < d1 {
                    assert_eq!(run.grid.get(x, y), 0);
                } else if d1 < d0 {
                    assert_eq!(run.grid.get(x, y), 1);
                }
            }
        }
    }
}
