use rand::Rng;

use crate::error::{PaaError, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

pub const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult<S: Real = f64> {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<S>>,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<S>,
}

impl<S: Real> KMeansResult<S> {
    pub fn inertia(&self) -> S {
        self.inertia_trace.last().copied().unwrap_or_else(S::zero)
    }
}

fn sq_dist<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the smaller index.
pub fn nearest<S: Real>(point: &[S], centroids: &[Vec<S>]) -> usize {
    let mut best = 0;
    let mut best_d = S::infinity();
    for (k, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// Lloyd's algorithm from a seeded farthest-point start. Stops at an
/// assignment fixpoint or after [`KMEANS_MAX_ITER`] rounds. An emptied
/// cluster is reseeded at the point farthest from its current centroid.
pub fn kmeans<S: Real>(points: &[Vec<S>], k: usize, seed: u64) -> Result<KMeansResult<S>> {
    let n = points.len();
    if k == 0 {
        return Err(PaaError::InvalidArgument("k must be positive".into()));
    }
    if n < k {
        return Err(PaaError::InsufficientData(format!("{n} points for {k} clusters")));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(PaaError::DimensionMismatch { expected: dim, got: p.len() });
    }

    let mut rng = rng_from_seed(seed);
    let first = rng.gen_range(0..n);
    let mut centroids = vec![points[first].clone()];
    let mut min_d: Vec<S> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let mut far = 0;
        for i in 1..n {
            if min_d[i] > min_d[far] {
                far = i;
            }
        }
        centroids.push(points[far].clone());
        for (d, p) in min_d.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[far]));
        }
    }

    let mut assignments = vec![usize::MAX; n];
    let mut inertia_trace = Vec::new();
    for _ in 0..KMEANS_MAX_ITER {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        let inertia: S = points.iter().zip(&next).map(|(p, &a)| sq_dist(p, &centroids[a])).sum();
        inertia_trace.push(inertia);
        if next == assignments {
            break;
        }
        assignments = next;

        let mut sums = vec![vec![S::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, &v) in sums[a].iter_mut().zip(p) {
                *s = *s + v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let cnt = S::from_usize_lossy(counts[c]);
                centroids[c] = sums[c].iter().map(|&s| s / cnt).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let mut far = 0;
                let mut far_d = S::neg_infinity();
                for (i, (p, &a)) in points.iter().zip(&assignments).enumerate() {
                    let d = sq_dist(p, &centroids[a]);
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                centroids[c] = points[far].clone();
                let old = assignments[far];
                counts[old] -= 1;
                counts[c] = 1;
                assignments[far] = c;
            }
        }
    }
    Ok(KMeansResult { assignments, centroids, inertia_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pts: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
        pts.extend((0..50).map(|_| vec![100.0 + rng.gen_range(-1.0..1.0)]));
        let r = kmeans(&pts, 2, 7).unwrap();
        let mut c: Vec<f64> = r.centroids.iter().map(|c| c[0]).collect();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m0 = pts[..50].iter().map(|p| p[0]).sum::<f64>() / 50.0;
        let m1 = pts[50..].iter().map(|p| p[0]).sum::<f64>() / 50.0;
        assert!((c[0] - m0).abs() < 1e-9 && (c[1] - m1).abs() < 1e-9);
    }

    #[test]
    fn single_cluster_is_mean() {
        let pts: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]];
        let r = kmeans(&pts, 1, 3).unwrap();
        assert!((r.centroids[0][0] - 3.0).abs() < 1e-12 && (r.centroids[0][1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n() {
        let pts = vec![vec![0.0], vec![1.0], vec![5.0], vec![-2.0]];
        let r = kmeans(&pts, 4, 0).unwrap();
        assert_eq!(r.inertia(), 0.0);
        let mut seen = r.assignments.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn inertia_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..20 {
            let pts: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]).collect();
            let r = kmeans(&pts, 5, seed).unwrap();
            for w in r.inertia_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn errors() {
        assert!(kmeans(&[vec![1.0]], 2, 0).is_err());
        assert!(kmeans(&[vec![1.0]], 0, 0).is_err());
    }
}
