//! Covariate transforms fitted on a training fold and replayed at evaluation.

use crate::error::{PaaError, Result};

/// Per-column centering and scaling; constant columns keep unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..dim).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n).collect();
        let sd = (0..dim)
            .map(|k| {
                let v = (rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n).sqrt();
                if v > 1e-12 * (1.0 + mean[k].abs()) {
                    v
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.sd).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// Affine map of each column onto `[0, 1]` over the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    range: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for r in rows {
            for k in 0..dim {
                min[k] = min[k].min(r[k]);
                max[k] = max[k].max(r[k]);
            }
        }
        let range = min.iter().zip(&max).map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 }).collect();
        Self { min, range }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.min).zip(&self.range).map(|((v, m), r)| (v - m) / r).collect()
    }

    pub fn inverse_scalar(&self, v: f64) -> f64 {
        self.min[0] + self.range[0] * v
    }

    pub fn forward_scalar(&self, v: f64) -> f64 {
        (v - self.min[0]) / self.range[0]
    }
}

/// Per-feature powers `x_k^1 … x_k^order` (no cross terms), standardized,
/// with columns that are linearly dependent on earlier ones (including the
/// intercept) dropped. `transform` prepends the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFeatures {
    order: usize,
    keep: Vec<usize>,
    scaler: Standardizer,
    standardize: bool,
}

fn expand(x: &[f64], order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() * order);
    for p in 1..=order {
        out.extend(x.iter().map(|v| v.powi(p as i32)));
    }
    out
}

impl PolyFeatures {
    pub fn fit(rows: &[&[f64]], order: usize) -> Self {
        Self::fit_with(rows, order, true)
    }

    /// `standardize = false` keeps raw powers and every column.
    pub fn fit_with(rows: &[&[f64]], order: usize, standardize: bool) -> Self {
        let raw: Vec<Vec<f64>> = rows.iter().map(|r| expand(r, order)).collect();
        let width = raw.first().map_or(0, Vec::len);
        if !standardize {
            let scaler = Standardizer { mean: vec![0.0; width], sd: vec![1.0; width] };
            return Self { order, keep: (0..width).collect(), scaler, standardize };
        }
        let refs: Vec<&[f64]> = raw.iter().map(Vec::as_slice).collect();
        let scaler = Standardizer::fit(&refs);
        let z: Vec<Vec<f64>> = raw.iter().map(|r| scaler.transform(r)).collect();
        let n = z.len();
        // Modified Gram–Schmidt against the intercept and the kept columns.
        let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n.max(1) as f64).sqrt(); n]];
        let mut keep = Vec::new();
        for k in 0..width {
            let mut v: Vec<f64> = z.iter().map(|r| r[k]).collect();
            let norm0 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm0 > 0.0 && norm > 1e-8 * norm0.max((n as f64).sqrt()) {
                v.iter_mut().for_each(|a| *a /= norm);
                basis.push(v);
                keep.push(k);
            }
        }
        Self { order, keep, scaler, standardize }
    }

    /// Number of output columns, intercept included.
    pub fn width(&self) -> usize {
        self.keep.len() + 1
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let raw = expand(x, self.order);
        let z = if self.standardize { self.scaler.transform(&raw) } else { raw };
        let mut out = Vec::with_capacity(self.width());
        out.push(1.0);
        out.extend(self.keep.iter().map(|&k| z[k]));
        out
    }
}

impl PolyFeatures {
    /// Re-expresses coefficients on `transform`'s columns in the raw power
    /// basis `[1, x^1 block, x^2 block, …]` of length `1 + dim·order`.
    pub fn raw_coefficients(&self, coef: &[f64]) -> Vec<f64> {
        let width = self.scaler.mean.len();
        let mut raw = vec![0.0; width + 1];
        raw[0] = coef[0];
        for (c, &k) in coef[1..].iter().zip(&self.keep) {
            let (m, s) = if self.standardize { (self.scaler.mean[k], self.scaler.sd[k]) } else { (0.0, 1.0) };
            raw[k + 1] += c / s;
            raw[0] -= c * m / s;
        }
        raw
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(PaaError::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_duplicate_and_dependent_columns() {
        // Column 0 binary (x² = x), column 2 = column 1 + 3.
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i % 2) as f64, i as f64 * 0.7, i as f64 * 0.7 + 3.0]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let pf = PolyFeatures::fit(&refs, 2);
        // Kept: x0, x1, x1²; x2 is affine in x1, x0² duplicates x0, x2² is in span{1, x1, x1²}.
        assert_eq!(pf.width(), 4);
        assert_eq!(pf.transform(&rows[3]).len(), 4);
        let coef = [0.5, 1.0, -2.0, 0.25];
        let raw = pf.raw_coefficients(&coef);
        for r in &rows {
            let z = pf.transform(r);
            let direct: f64 = z.iter().zip(&coef).map(|(a, b)| a * b).sum();
            let mut via = raw[0];
            for (k, v) in expand(r, 2).iter().enumerate() {
                via += raw[k + 1] * v;
            }
            assert!((direct - via).abs() < 1e-9);
        }
    }

    #[test]
    fn standardizer_and_minmax() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0]];
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let s = Standardizer::fit(&refs);
        assert_eq!(s.transform(&[2.0, 5.0]), vec![0.0, 0.0]);
        let m = MinMaxScaler::fit(&refs);
        assert_eq!(m.transform(&[3.0, 6.0]), vec![1.0, 1.0]);
    }
}
