use std::collections::BTreeMap;

use micrograin::grains::{segment_grains, Connectivity, MicrostructureStats};
use micrograin::synth::{compare, recolor, synthesize, GrainTarget, SynthConfig, SynthMethod};
use micrograin::tessellation::{sample_centroids, Metric};
use micrograin::{Label, LabelGrid, Palette, SeededRng};

const FRACTIONS: [f64; 4] = [0.35, 0.30, 0.20, 0.15];

fn reference_stats(side: usize, grains: usize) -> MicrostructureStats {
    let mut stats = MicrostructureStats::from_parts(
        (side, side),
        vec![side * side / grains; grains],
        &[1, 1, 1, 1],
        20,
    );
    stats.orientation_fractions = FRACTIONS.to_vec();
    stats
}

fn label_shares(grid: &LabelGrid) -> Vec<f64> {
    let mut counts = [0usize; 4];
    for &c in grid.cells() {
        counts[c as usize] += 1;
    }
    counts
        .iter()
        .map(|&c| c as f64 / grid.len() as f64)
        .collect()
}

#[test]
fn voronoi_never_has_more_grains_than_seeds() {
    let mut rng = SeededRng::new(21);
    for seed in 0..30 {
        let side = 16 + rng.below(48);
        let n = 2 + rng.below(40);
        let cfg = SynthConfig {
            method: SynthMethod::NearestVoronoi,
            target: GrainTarget::Count(n),
            dims: Some((side, side)),
            refine: seed % 2 == 0,
            seed,
            ..Default::default()
        };
        let out = synthesize(&reference_stats(side, n), &cfg).unwrap();
        assert!(segment_grains(&out.grid, Connectivity::Four).grain_count() <= n);
    }
}

#[test]
fn voronoi_keeps_most_seeds_as_grains() {
    let reference = reference_stats(256, 250);
    for seed in 0..20 {
        let cfg = SynthConfig {
            method: SynthMethod::NearestVoronoi,
            target: GrainTarget::Count(250),
            seed,
            ..Default::default()
        };
        let out = synthesize(&reference, &cfg).unwrap();
        let grains = segment_grains(&out.grid, Connectivity::Four).grain_count();
        assert!(
            grains as f64 >= 0.85 * 250.0,
            "seed {seed}: {grains} grains"
        );
    }
}

#[test]
fn orientation_fractions_within_sampling_bound() {
    let n = 250;
    let reference = reference_stats(256, n);
    for method in [SynthMethod::NearestVoronoi, SynthMethod::MarkovGrowth] {
        for refine in [true, false] {
            for seed in 0..20 {
                let cfg = SynthConfig {
                    method,
                    target: GrainTarget::Count(n),
                    seed,
                    refine,
                    ..Default::default()
                };
                let out = synthesize(&reference, &cfg).unwrap();
                assert_eq!(out.grid.blank_count(), 0);
                for (l, (got, p)) in label_shares(&out.grid).iter().zip(FRACTIONS).enumerate() {
                    let bound = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
                    assert!(
                        (got - p).abs() <= bound,
                        "{method} refine={refine} seed {seed} label {l}: {got:.4} vs {p} (bound {bound:.4})"
                    );
                }
            }
        }
    }
}

#[test]
fn sampled_labels_follow_fractions() {
    let n = 2000;
    let mut rng = SeededRng::new(22);
    let cs = sample_centroids(n, [200, 200], &FRACTIONS, &mut rng, 2.0, Metric::Euclidean).unwrap();
    for (l, p) in FRACTIONS.iter().enumerate() {
        let share = cs.points().iter().filter(|s| s.label as usize == l).count() as f64 / n as f64;
        assert!((share - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }
}

#[test]
fn permutation_recolor_preserves_grains() {
    let mut rng = SeededRng::new(23);
    let palette =
        Palette::from_colors(&[[0, 0, 0], [255, 0, 0], [0, 255, 0], [0, 0, 255]]).unwrap();
    for _ in 0..50 {
        let (w, h) = (1 + rng.below(20), 1 + rng.below(20));
        let grid =
            LabelGrid::new(w, h, (0..w * h).map(|_| rng.below(4) as Label).collect()).unwrap();
        let mut perm: Vec<Label> = (0..4).collect();
        rng.shuffle(&mut perm);
        let remap: BTreeMap<Label, Label> = (0..4).map(|l| (l, perm[l as usize])).collect();
        let out = recolor(&grid, &palette, &remap).unwrap();
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let a = segment_grains(&grid, conn);
            let b = segment_grains(&out, conn);
            assert_eq!(a.grain_count(), b.grain_count());
            assert_eq!(a.grain_ids(), b.grain_ids());
        }
        for (before, after) in grid.cells().iter().zip(out.cells()) {
            assert_eq!(perm[*before as usize], *after);
        }
    }
}

#[test]
fn compare_is_antisymmetric_and_zero_on_self() {
    let palette =
        Palette::from_colors(&[[0, 0, 0], [255, 0, 0], [0, 255, 0], [0, 0, 255]]).unwrap();
    let mut rng = SeededRng::new(24);
    let a = LabelGrid::new(24, 24, (0..576).map(|_| rng.below(4) as Label).collect()).unwrap();
    let b = LabelGrid::new(
        24,
        24,
        (0..576)
            .map(|i| ((i / 24 + i % 24) / 5 % 4) as Label)
            .collect(),
    )
    .unwrap();
    let same = compare(&a, &palette, &a, &palette, Connectivity::Four, 8).unwrap();
    assert_eq!(same.grain_count_abs_diff, 0);
    assert!(same.orientation_diffs.iter().all(|&d| d == 0.0));
    assert_eq!(same.histogram_l1, 0.0);
    let ab = compare(&a, &palette, &b, &palette, Connectivity::Four, 8).unwrap();
    let ba = compare(&b, &palette, &a, &palette, Connectivity::Four, 8).unwrap();
    for (x, y) in ab.orientation_diffs.iter().zip(&ba.orientation_diffs) {
        assert_eq!(*x, -*y);
    }
    assert_eq!(ab.grain_count_abs_diff, ba.grain_count_abs_diff);
    assert!((ab.histogram_l1 - ba.histogram_l1).abs() <= 1e-12);
}
