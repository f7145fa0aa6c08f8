use std::collections::HashSet;

use super::{CentroidSet, Metric, Seed};
use crate::error::{Error, Result};
use crate::raster::Label;
use crate::rng::SeededRng;

/// Rejection sampling gives up after this many draws per requested point.
pub const SAMPLE_RETRY_FACTOR: usize = 1000;

/// Draws `count` seeds at distinct cell centres, uniformly over the lattice,
/// keeping every pair at least `min_spacing` apart under `metric`. Labels are
/// drawn independently with probabilities `fractions[label]`.
pub fn sample_centroids<const D: usize>(
    count: usize,
    dims: [usize; D],
    fractions: &[f64],
    rng: &mut SeededRng,
    min_spacing: f64,
    metric: Metric,
) -> Result<CentroidSet<D>> {
    if count == 0 {
        return Err(Error::invalid("centroid count must be at least 1"));
    }
    if dims.contains(&0) {
        return Err(Error::invalid(format!(
            "dimensions must be positive, got {dims:?}"
        )));
    }
    if !(min_spacing >= 0.0 && min_spacing.is_finite()) {
        return Err(Error::invalid(format!(
            "min_spacing must be a finite value >= 0, got {min_spacing}"
        )));
    }
    if fractions.is_empty() || fractions.len() > Label::MAX as usize {
        return Err(Error::invalid(
            "label distribution must have between 1 and 65535 entries",
        ));
    }
    if fractions.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
        return Err(Error::invalid(
            "label fractions must be finite and non-negative",
        ));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "label fractions sum to {total}, expected 1"
        )));
    }

    let threshold = match metric {
        Metric::Euclidean => min_spacing * min_spacing,
        _ => min_spacing,
    };
    let mut taken: HashSet<[usize; D]> = HashSet::with_capacity(count);
    let mut points: Vec<Seed<D>> = Vec::with_capacity(count);
    let budget = SAMPLE_RETRY_FACTOR.saturating_mul(count);
    let mut draws = 0usize;
    while points.len() < count {
        if draws == budget {
            return Err(Error::Saturation {
                requested: count,
                achieved: points.len(),
            });
        }
        draws += 1;
        let mut cell = [0usize; D];
        let mut position = [0.0; D];
        for k in 0..D {
            cell[k] = rng.below(dims[k]);
            position[k] = cell[k] as f64 + 0.5;
        }
        if taken.contains(&cell) {
            continue;
        }
        if min_spacing > 0.0
            && points
                .iter()
                .any(|p| metric.rank(&p.position, &position) < threshold)
        {
            continue;
        }
        let label = rng
            .weighted_index(fractions)
            .expect("validated distribution") as Label;
        taken.insert(cell);
        points.push(Seed { position, label });
    }
    CentroidSet::new(dims, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let cs = sample_centroids(
            1,
            [8, 8],
            &[0.0, 1.0],
            &mut SeededRng::new(1),
            0.0,
            Metric::Euclidean,
        )
        .unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.points()[0].label, 1);
    }

    #[test]
    fn degenerate_distribution() {
        let cs = sample_centroids(
            50,
            [32, 32],
            &[1.0],
            &mut SeededRng::new(2),
            1.0,
            Metric::Euclidean,
        )
        .unwrap();
        assert!(cs.points().iter().all(|p| p.label == 0));
    }

    #[test]
    fn label_shares_follow_distribution() {
        let target = [0.5, 0.3, 0.2];
        let cs = sample_centroids(
            2000,
            [100, 100],
            &target,
            &mut SeededRng::new(3),
            0.0,
            Metric::Euclidean,
        )
        .unwrap();
        let mut counts = [0usize; 3];
        for p in cs.points() {
            counts[p.label as usize] += 1;
        }
        for (c, t) in counts.iter().zip(target) {
            assert!((*c as f64 / 2000.0 - t).abs() <= 0.03, "{counts:?}");
        }
    }

    #[test]
    fn spacing_respected() {
        for metric in [Metric::Euclidean, Metric::Manhattan, Metric::Chebyshev] {
            let cs = sample_centroids(60, [40, 40], &[1.0], &mut SeededRng::new(4), 3.0, metric)
                .unwrap();
            let pts = cs.points();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    assert!(metric.distance(&pts[i].position, &pts[j].position) >= 3.0);
                }
            }
        }
    }

    #[test]
    fn saturation_reports_progress() {
        // a 4x4 lattice holds at most 4 points pairwise >= 2 apart (Chebyshev)
        let err = sample_centroids(
            10,
            [4, 4],
            &[1.0],
            &mut SeededRng::new(5),
            2.0,
            Metric::Chebyshev,
        )
        .unwrap_err();
        match err {
            Error::Saturation {
                requested,
                achieved,
            } => {
                assert_eq!(requested, 10);
                assert!((1..=4).contains(&achieved));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            sample_centroids(
                17,
                [4, 4],
                &[1.0],
                &mut SeededRng::new(5),
                0.0,
                Metric::Euclidean
            ),
            Err(Error::Saturation { achieved: 16, .. })
        ));
    }

    #[test]
    fn rejects_bad_distribution() {
        let mut rng = SeededRng::new(0);
        assert!(
            sample_centroids(3, [4, 4], &[0.5, 0.4], &mut rng, 0.0, Metric::Euclidean).is_err()
        );
        assert!(
            sample_centroids(3, [4, 4], &[1.5, -0.5], &mut rng, 0.0, Metric::Euclidean).is_err()
        );
        assert!(sample_centroids(0, [4, 4], &[1.0], &mut rng, 0.0, Metric::Euclidean).is_err());
    }

    #[test]
    fn three_dimensional() {
        let cs = sample_centroids(
            20,
            [6, 6, 6],
            &[0.5, 0.5],
            &mut SeededRng::new(6),
            1.5,
            Metric::Euclidean,
        )
        .unwrap();
        assert_eq!(cs.dims(), [6, 6, 6]);
        assert_eq!(cs.len(), 20);
    }
}
