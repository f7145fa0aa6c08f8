use std::collections::BTreeMap;

use micrograin::grains::{compute_stats, segment_grains, Connectivity};
use micrograin::raster::{quantize_image, render};
use micrograin::{Label, LabelGrid, Palette};
use proptest::prelude::*;

fn grid_strategy(max_side: usize, labels: u16) -> impl Strategy<Value = LabelGrid> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        proptest::collection::vec(0..labels, w * h)
            .prop_map(move |cells| LabelGrid::new(w, h, cells).unwrap())
    })
}

/// Brute-force components: repeated flood fill by scanning for the lowest
/// unvisited cell, numbered in order of discovery.
fn flood_components(grid: &LabelGrid, eight: bool) -> Vec<usize> {
    let (w, h) = grid.dims();
    let mut comp = vec![usize::MAX; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    if (dx, dy) == (0, 0) || (!eight && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if comp[j] == usize::MAX && grid.cells()[j] == grid.cells()[i] {
                        comp[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        next += 1;
    }
    comp
}

fn first_seen(ids: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut names = BTreeMap::new();
    ids.map(|id| {
        let n = names.len();
        *names.entry(id).or_insert(n)
    })
    .collect()
}

const COLORS: [[u8; 3]; 6] = [
    [0, 0, 0],
    [255, 0, 0],
    [0, 255, 0],
    [0, 0, 255],
    [200, 200, 0],
    [90, 10, 160],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn segmentation_matches_flood_fill(grid in grid_strategy(16, 3)) {
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let gm = segment_grains(&grid, conn);
            let oracle = flood_components(&grid, eight);
            let ours = first_seen(gm.grain_ids().iter().map(|&g| g as usize));
            prop_assert_eq!(&ours, &oracle);
            prop_assert_eq!(gm.grain_count(), oracle.iter().max().unwrap() + 1);
        }
    }

    #[test]
    fn eight_connectivity_never_adds_grains(grid in grid_strategy(16, 3)) {
        let four = segment_grains(&grid, Connectivity::Four).grain_count();
        let eight = segment_grains(&grid, Connectivity::Eight).grain_count();
        prop_assert!(eight <= four);
    }

    #[test]
    fn areas_and_fractions_are_conserved(grid in grid_strategy(16, 4)) {
        let gm = segment_grains(&grid, Connectivity::Four);
        let total: usize = gm.grains().iter().map(|g| g.area).sum();
        prop_assert_eq!(total + grid.blank_count(), grid.len());
        let stats = compute_stats(&gm, &grid, 5).unwrap();
        prop_assert!((stats.orientation_fractions.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!((stats.volume_fractions.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn quantization_is_idempotent(grid in grid_strategy(12, 6), k in 1usize..=8) {
        let image = render(&grid, &Palette::from_colors(&COLORS).unwrap()).unwrap();
        let (once, pal) = quantize_image(&image, k).unwrap();
        let (twice, _) = quantize_image(&render(&once, &pal).unwrap(), k).unwrap();
        prop_assert_eq!(once.canonicalized(), twice.canonicalized());
    }

    #[test]
    fn few_colours_quantize_without_error(grid in grid_strategy(12, 6)) {
        let image = render(&grid, &Palette::from_colors(&COLORS).unwrap()).unwrap();
        let (q, pal) = quantize_image(&image, 8).unwrap();
        let back = render(&q, &pal).unwrap();
        prop_assert_eq!(back.pixels(), image.pixels());
    }
}

#[test]
fn flood_oracle_sanity() {
    // checkerboard: 4-connectivity isolates every cell, 8-connectivity joins each colour
    let cells: Vec<Label> = (0..16).map(|i| ((i % 4 + i / 4) % 2) as Label).collect();
    let grid = LabelGrid::new(4, 4, cells).unwrap();
    assert_eq!(flood_components(&grid, false).iter().max(), Some(&15));
    assert_eq!(flood_components(&grid, true).iter().max(), Some(&1));
}
