//! Kernel-weighted quantiles and Gaussian kernel ridge regression.

use super::features::{MinMaxScaler, Standardizer};
use crate::error::Result;
use crate::linalg::cholesky_solve;
use crate::newsvendor::{saa_quantile, weighted_quantile};

/// Nadaraya–Watson style weighted quantile over the training demands.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelQuantile {
    scaler: Standardizer,
    points: Vec<Vec<f64>>,
    demands: Vec<f64>,
    bandwidth: f64,
    ratio: f64,
    fallback: f64,
}

impl KernelQuantile {
    pub fn fit(rows: &[&[f64]], demands: &[f64], bandwidth: f64, ratio: f64) -> Result<Self> {
        let scaler = Standardizer::fit(rows);
        let points = rows.iter().map(|r| scaler.transform(r)).collect();
        let fallback = saa_quantile(demands, ratio)?;
        Ok(Self { scaler, points, demands: demands.to_vec(), bandwidth, ratio, fallback })
    }

    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        let z = self.scaler.transform(x);
        let h2 = 2.0 * self.bandwidth * self.bandwidth;
        self.points
            .iter()
            .map(|p| {
                let d2: f64 = p.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum();
                if self.bandwidth.is_infinite() {
                    1.0
                } else {
                    (-d2 / h2).exp()
                }
            })
            .collect()
    }

    /// Returns the quantile and whether the SAA fallback was used because
    /// every kernel weight underflowed.
    pub fn evaluate(&self, x: &[f64]) -> (f64, bool) {
        match weighted_quantile(&self.demands, &self.weights(x), self.ratio) {
            Some(q) => (q, false),
            None => (self.fallback, true),
        }
    }
}

/// Kernel ridge regression with kernel `exp(−‖u − v‖² / 2ℓ²)` on min–max
/// scaled inputs and outputs, ridge weight `1/C`, followed by a constant
/// shift that puts the fitted curve at the critical-ratio quantile of the
/// training residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfRidge {
    xscale: MinMaxScaler,
    yscale: MinMaxScaler,
    points: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    mean: f64,
    length_scale: f64,
    shift: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum()
}

/// Median of the pairwise Euclidean distances; 1 when all points coincide.
pub fn median_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut d = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d.push(sq_dist(&points[i], &points[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    if *m > 0.0 {
        *m
    } else {
        1.0
    }
}

impl RbfRidge {
    pub fn fit(rows: &[&[f64]], demands: &[f64], penalty: f64, length_scale: Option<f64>, ratio: f64) -> Result<Self> {
        let xscale = MinMaxScaler::fit(rows);
        let ycols: Vec<[f64; 1]> = demands.iter().map(|&d| [d]).collect();
        let yrefs: Vec<&[f64]> = ycols.iter().map(|c| c.as_slice()).collect();
        let yscale = MinMaxScaler::fit(&yrefs);
        let points: Vec<Vec<f64>> = rows.iter().map(|r| xscale.transform(r)).collect();
        let y: Vec<f64> = demands.iter().map(|&d| yscale.forward_scalar(d)).collect();
        let length_scale = length_scale.unwrap_or_else(|| median_pairwise_distance(&points));
        let n = points.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let g = 1.0 / (2.0 * length_scale * length_scale);
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = (-g * sq_dist(&points[i], &points[j])).exp();
                k[i][j] = v;
                k[j][i] = v;
            }
            k[i][i] += 1.0 / penalty;
        }
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let alpha = cholesky_solve(k, &centered)?;
        let mut model = Self { xscale, yscale, points, alpha, mean, length_scale, shift: 0.0 };
        let residuals: Vec<f64> = rows.iter().zip(demands).map(|(r, d)| d - model.predict(r)).collect();
        model.shift = saa_quantile(&residuals, ratio)?;
        Ok(model)
    }

    fn predict(&self, x: &[f64]) -> f64 {
        let z = self.xscale.transform(x);
        let g = 1.0 / (2.0 * self.length_scale * self.length_scale);
        let s: f64 = self.points.iter().zip(&self.alpha).map(|(p, a)| a * (-g * sq_dist(p, &z)).exp()).sum();
        self.yscale.inverse_scalar(self.mean + s)
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.predict(x) + self.shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_bandwidth_is_saa() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let d = [5.0, 1.0, 4.0, 2.0, 8.0, 3.0, 9.0, 7.0, 6.0];
        let ko = KernelQuantile::fit(&refs, &d, f64::INFINITY, 0.7).unwrap();
        let saa = saa_quantile(&d, 0.7).unwrap();
        for x in [-3.0, 0.0, 4.5, 100.0] {
            assert_eq!(ko.evaluate(&[x]), (saa, false));
        }
    }

    #[test]
    fn tiny_bandwidth_far_point_falls_back() {
        let rows = [vec![0.0], vec![1.0], vec![2.0]];
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let ko = KernelQuantile::fit(&refs, &[1.0, 2.0, 3.0], 1e-3, 0.5).unwrap();
        assert_eq!(ko.evaluate(&[50.0]), (2.0, true));
        // Next to a training point the nearest demand dominates.
        assert_eq!(ko.evaluate(&[2.0]).0, 3.0);
    }

    #[test]
    fn median_distance_oracle() {
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        // Distances 1, 3, 2 → median 2.
        assert_eq!(median_pairwise_distance(&pts), 2.0);
    }

    #[test]
    fn ridge_tracks_a_smooth_curve() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![-1.0 + 2.0 * i as f64 / 59.0]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let d: Vec<f64> = rows.iter().map(|x| 50.0 + 20.0 * (2.0 * x[0]).sin()).collect();
        let m = RbfRidge::fit(&refs, &d, 100.0, None, 0.5).unwrap();
        for (x, y) in rows.iter().zip(&d) {
            assert!((m.evaluate(x) - y).abs() < 2.0, "{} vs {y}", m.evaluate(x));
        }
    }
}
