//! Candidate ordering policies behind one fit/evaluate interface.

mod features;
mod kernel;
mod neural;

use log::warn;
use serde::{Deserialize, Serialize};

pub use features::{MinMaxScaler, PolyFeatures, Standardizer};
pub use kernel::{median_pairwise_distance, KernelQuantile, RbfRidge};
pub use neural::{Loss, Mlp, NeuralLoss, TrainConfig};

use crate::distributions::{mle_fit_with, quantile, DistFamily, DistParams, MleOptions};
use crate::error::{PaaError, Result};
use crate::linalg::least_squares;
use crate::newsvendor::{saa_quantile, CostParams, Dataset, Observation};
use crate::optimizer::{fit_pinball_linear, golden_section, kmeans, nearest, nelder_mead_with, NelderMeadOptions, Penalty};
use crate::rng::{derive_seed, rng_from_seed};
use crate::special::{std_normal_inv_cdf, Tolerance};
use features::check_dim;

/// Regularization of the empirical-risk candidate. The tuned variants pick
/// `λ` from [`ERM_LAMBDA_GRID`] on a chronological validation tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lambda", rename_all = "snake_case")]
pub enum ErmPenalty {
    None,
    L1(f64),
    L2(f64),
    L1Tuned,
    L2Tuned,
}

pub const ERM_LAMBDA_GRID: [f64; 3] = [1e-3, 1e-2, 1e-1];
/// Share of the (time-ordered) training rows held out when tuning `λ`.
pub const ERM_VALIDATION_SHARE: f64 = 0.2;

fn default_hidden() -> [usize; 2] {
    [20, 10]
}
fn default_epochs() -> usize {
    1000
}
fn default_learning_rate() -> f64 {
    0.01
}
fn default_batch() -> usize {
    32
}
fn default_neural_loss() -> NeuralLoss {
    NeuralLoss::Pinball
}
fn default_penalty() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSpec {
    Saa,
    /// Fit a parametric law by maximum likelihood, order its quantile.
    EtoIid {
        family: DistFamily,
        #[serde(default)]
        t_df: Option<f64>,
    },
    /// Choose the law's parameters to minimize the in-sample cost directly.
    IeoIid { family: DistFamily },
    /// Gaussian regression on per-feature powers. With `linear_sd` the
    /// residual scale is itself linear in the covariates.
    EtoRegression {
        poly_order: usize,
        #[serde(default)]
        linear_sd: bool,
    },
    /// `d ~ a + b·time + c·x[lag_column]` with Gaussian residuals.
    EtoAutoregressive {
        trend: bool,
        #[serde(default)]
        lag_column: usize,
    },
    QuantileRegression { poly_order: usize },
    Erm { poly_order: usize, reg: ErmPenalty },
    KernelOptimization { bandwidth: f64 },
    ClusterSaa { n_clusters: usize },
    NeuralPinball {
        #[serde(default = "default_hidden")]
        hidden: [usize; 2],
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default = "default_learning_rate")]
        learning_rate: f64,
        #[serde(default = "default_batch")]
        batch_size: usize,
        #[serde(default = "default_neural_loss")]
        loss: NeuralLoss,
    },
    RbfKernelRidge {
        #[serde(default = "default_penalty")]
        penalty: f64,
        #[serde(default)]
        length_scale: Option<f64>,
    },
    /// Orders the same quantity regardless of data.
    Constant { value: f64 },
}

impl CandidateSpec {
    pub fn neural_default() -> Self {
        CandidateSpec::NeuralPinball {
            hidden: default_hidden(),
            epochs: default_epochs(),
            learning_rate: default_learning_rate(),
            batch_size: default_batch(),
            loss: NeuralLoss::Pinball,
        }
    }

    pub fn rbf_default() -> Self {
        CandidateSpec::RbfKernelRidge { penalty: default_penalty(), length_scale: None }
    }

    pub fn label(&self) -> String {
        match self {
            CandidateSpec::Saa => "saa".into(),
            CandidateSpec::EtoIid { family, .. } => format!("eto_{}", family.name()),
            CandidateSpec::IeoIid { family } => format!("ieo_{}", family.name()),
            CandidateSpec::EtoRegression { poly_order, linear_sd } => {
                format!("eto_poly{poly_order}{}", if *linear_sd { "_linear_sd" } else { "" })
            }
            CandidateSpec::EtoAutoregressive { trend, .. } => format!("eto_ar1{}", if *trend { "_trend" } else { "" }),
            CandidateSpec::QuantileRegression { poly_order } => format!("quantile_regression_poly{poly_order}"),
            CandidateSpec::Erm { poly_order, reg } => {
                let suffix = match reg {
                    ErmPenalty::None => String::new(),
                    ErmPenalty::L1(l) => format!("_l1_{l}"),
                    ErmPenalty::L2(l) => format!("_l2_{l}"),
                    ErmPenalty::L1Tuned => "_l1".into(),
                    ErmPenalty::L2Tuned => "_l2".into(),
                };
                format!("erm_poly{poly_order}{suffix}")
            }
            CandidateSpec::KernelOptimization { bandwidth } => format!("ko_b{bandwidth}"),
            CandidateSpec::ClusterSaa { n_clusters } => format!("cluster_saa_k{n_clusters}"),
            CandidateSpec::NeuralPinball { loss: NeuralLoss::Mse, .. } => "neural_mse".into(),
            CandidateSpec::NeuralPinball { .. } => "neural".into(),
            CandidateSpec::RbfKernelRidge { .. } => "rbf_ridge".into(),
            CandidateSpec::Constant { value } => format!("constant_{value}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(PaaError::InvalidArgument(format!("{}: {what}", self.label())));
        match *self {
            CandidateSpec::EtoIid { t_df: Some(v), .. } if !(v > 0.0 && v.is_finite()) => bad("t_df must be positive"),
            CandidateSpec::Erm { reg: ErmPenalty::L1(l) | ErmPenalty::L2(l), .. } if !(l >= 0.0 && l.is_finite()) => {
                bad("lambda must be nonnegative")
            }
            CandidateSpec::KernelOptimization { bandwidth } if !(bandwidth > 0.0) => bad("bandwidth must be positive"),
            CandidateSpec::ClusterSaa { n_clusters: 0 } => bad("n_clusters must be positive"),
            CandidateSpec::NeuralPinball { hidden, epochs, learning_rate, batch_size, .. }
                if hidden.contains(&0) || epochs == 0 || batch_size == 0 || !(learning_rate > 0.0) =>
            {
                bad("hidden sizes, epochs, batch size and learning rate must be positive")
            }
            CandidateSpec::RbfKernelRidge { penalty, length_scale }
                if !(penalty > 0.0) || length_scale.is_some_and(|l| !(l > 0.0)) =>
            {
                bad("penalty and length scale must be positive")
            }
            CandidateSpec::Constant { value } if !value.is_finite() => bad("value must be finite"),
            _ => Ok(()),
        }
    }

    fn needs_covariates(&self) -> bool {
        matches!(
            self,
            CandidateSpec::EtoAutoregressive { .. }
                | CandidateSpec::KernelOptimization { .. }
                | CandidateSpec::ClusterSaa { .. }
                | CandidateSpec::NeuralPinball { .. }
                | CandidateSpec::RbfKernelRidge { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PolicyState {
    Constant(f64),
    Parametric { params: DistParams, q: f64 },
    Linear { features: PolyFeatures, coef: Vec<f64> },
    Heteroscedastic { features: PolyFeatures, beta: Vec<f64>, sd_scaler: Standardizer, gamma: Vec<f64>, z: f64 },
    Autoregressive { coef: Vec<f64>, trend: bool, lag_column: usize, shift: f64 },
    Kernel(KernelQuantile),
    Cluster { scaler: Standardizer, centroids: Vec<Vec<f64>>, quantiles: Vec<f64> },
    Neural { net: Mlp, xscale: MinMaxScaler, yscale: MinMaxScaler, shift: f64 },
    Ridge(RbfRidge),
    Weighted { weights: Vec<f64>, components: Vec<FittedPolicy> },
}

/// A fitted ordering rule `x ↦ Q(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPolicy {
    label: String,
    dim: usize,
    state: PolicyState,
    warnings: Vec<String>,
}

impl FittedPolicy {
    pub fn constant(label: impl Into<String>, dim: usize, value: f64) -> Self {
        Self { label: label.into(), dim, state: PolicyState::Constant(value), warnings: Vec::new() }
    }

    /// `Σ ω_i Q_i(x)`.
    pub fn weighted(label: impl Into<String>, weights: Vec<f64>, components: Vec<FittedPolicy>) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(PaaError::LengthMismatch { expected: components.len(), got: weights.len() });
        }
        let dim = components.first().map_or(0, |c| c.dim);
        if let Some(c) = components.iter().find(|c| c.dim != dim) {
            return Err(PaaError::DimensionMismatch { expected: dim, got: c.dim });
        }
        Ok(Self { label: label.into(), dim, state: PolicyState::Weighted { weights, components }, warnings: Vec::new() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-fatal notes raised while fitting (estimator fallbacks and the like).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Fitted law of a parametric i.i.d. policy.
    pub fn distribution(&self) -> Option<DistParams> {
        match &self.state {
            PolicyState::Parametric { params, .. } => Some(*params),
            _ => None,
        }
    }

    /// Coefficients in the raw power basis `[1, x^1 block, x^2 block, …]`
    /// when the policy is a polynomial in `x`; weighted combinations of such
    /// policies combine coefficient-wise.
    pub fn raw_polynomial(&self) -> Option<Vec<f64>> {
        match &self.state {
            PolicyState::Constant(v) | PolicyState::Parametric { q: v, .. } => Some(vec![*v]),
            PolicyState::Linear { features, coef } => Some(features.raw_coefficients(coef)),
            PolicyState::Weighted { weights, components } => {
                let mut out: Vec<f64> = Vec::new();
                for (w, c) in weights.iter().zip(components) {
                    let raw = c.raw_polynomial()?;
                    if raw.len() > out.len() {
                        out.resize(raw.len(), 0.0);
                    }
                    out.iter_mut().zip(&raw).for_each(|(o, r)| *o += w * r);
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn requires_time(&self) -> bool {
        match &self.state {
            PolicyState::Autoregressive { trend, .. } => *trend,
            PolicyState::Weighted { components, .. } => components.iter().any(FittedPolicy::requires_time),
            _ => false,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.evaluate_at(x, None)
    }

    pub fn evaluate_row(&self, row: &Observation<f64>) -> Result<f64> {
        self.evaluate_at(&row.covariates, Some(row.time))
    }

    /// `time` is needed only by trend-bearing autoregressive policies.
    pub fn evaluate_at(&self, x: &[f64], time: Option<f64>) -> Result<f64> {
        check_dim(self.dim, x)?;
        let q = match &self.state {
            PolicyState::Constant(v) | PolicyState::Parametric { q: v, .. } => *v,
            PolicyState::Linear { features, coef } => dot(&features.transform(x), coef),
            PolicyState::Heteroscedastic { features, beta, sd_scaler, gamma, z } => {
                let sd = linear_sd(sd_scaler, gamma, x).max(0.0);
                dot(&features.transform(x), beta) + sd * z
            }
            PolicyState::Autoregressive { coef, trend, lag_column, shift } => {
                let mut v = coef[0] + shift;
                let mut k = 1;
                if *trend {
                    let t = time.ok_or_else(|| {
                        PaaError::InvalidArgument(format!("{} needs the period's time stamp", self.label))
                    })?;
                    v += coef[1] * t;
                    k = 2;
                }
                v + coef[k] * x[*lag_column]
            }
            PolicyState::Kernel(ko) => {
                let (q, fell_back) = ko.evaluate(x);
                if fell_back {
                    warn!("{}: kernel weights vanished at {x:?}; using the unweighted quantile", self.label);
                }
                q
            }
            PolicyState::Cluster { scaler, centroids, quantiles } => quantiles[nearest(&scaler.transform(x), centroids)],
            PolicyState::Neural { net, xscale, yscale, shift } => yscale.inverse_scalar(net.forward(&xscale.transform(x))) + shift,
            PolicyState::Ridge(r) => r.evaluate(x),
            PolicyState::Weighted { weights, components } => {
                let mut s = 0.0;
                for (w, c) in weights.iter().zip(components) {
                    s += w * c.evaluate_at(x, time)?;
                }
                s
            }
        };
        if !q.is_finite() {
            return Err(PaaError::NonFinite("policy evaluation"));
        }
        Ok(q)
    }
}

/// Evaluates `policy` at `x`.
pub fn evaluate_policy(policy: &FittedPolicy, x: &[f64]) -> Result<f64> {
    policy.evaluate(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn linear_sd(scaler: &Standardizer, gamma: &[f64], x: &[f64]) -> f64 {
    gamma[0] + dot(&scaler.transform(x), &gamma[1..])
}

fn mean_cost(q: impl Fn(usize) -> f64, demands: &[f64], costs: &CostParams<f64>) -> f64 {
    demands.iter().enumerate().map(|(j, &d)| costs.cost(q(j), d)).sum::<f64>() / demands.len() as f64
}

/// Fits `spec` on `train`. `seed` drives every random choice inside the fit.
pub fn fit_candidate(spec: &CandidateSpec, train: &Dataset<f64>, costs: &CostParams<f64>, seed: u64) -> Result<FittedPolicy> {
    spec.validate()?;
    if spec.needs_covariates() && train.dim() == 0 {
        return Err(PaaError::MissingCovariates(spec.label()));
    }
    let ratio = costs.critical_ratio();
    let demands = train.demands();
    let rows: Vec<&[f64]> = train.rows().iter().map(|r| r.covariates.as_slice()).collect();
    let mut warnings = Vec::new();
    let state = match *spec {
        CandidateSpec::Saa => PolicyState::Constant(saa_quantile(&demands, ratio)?),
        CandidateSpec::Constant { value } => PolicyState::Constant(value),
        CandidateSpec::EtoIid { family, t_df } => {
            let fit = mle_fit_with(family, &demands, &MleOptions { t_df })?;
            warnings.extend(fit.warning);
            PolicyState::Parametric { params: fit.params, q: quantile(&fit.params, ratio)? }
        }
        CandidateSpec::IeoIid { family } => {
            let fit = mle_fit_with(family, &demands, &MleOptions::default())?;
            warnings.extend(fit.warning);
            let (params, q) = fit_ieo(fit.params, &demands, costs)?;
            PolicyState::Parametric { params, q }
        }
        CandidateSpec::EtoRegression { poly_order, linear_sd } => fit_eto_regression(&rows, &demands, poly_order, linear_sd, ratio)?,
        CandidateSpec::EtoAutoregressive { trend, lag_column } => fit_autoregressive(train, trend, lag_column, ratio)?,
        CandidateSpec::QuantileRegression { poly_order } => {
            let features = PolyFeatures::fit_with(&rows, poly_order, false);
            let coef = fit_linear_quantile(&features, &rows, &demands, ratio, Penalty::None)?;
            PolicyState::Linear { features, coef }
        }
        CandidateSpec::Erm { poly_order, reg } => {
            let penalty = match reg {
                ErmPenalty::None => Penalty::None,
                ErmPenalty::L1(l) => Penalty::L1(l),
                ErmPenalty::L2(l) => Penalty::L2(l),
                ErmPenalty::L1Tuned => tune_penalty(&rows, &demands, poly_order, ratio, costs, Penalty::L1)?,
                ErmPenalty::L2Tuned => tune_penalty(&rows, &demands, poly_order, ratio, costs, Penalty::L2)?,
            };
            let features = PolyFeatures::fit(&rows, poly_order);
            let coef = fit_linear_quantile(&features, &rows, &demands, ratio, penalty)?;
            PolicyState::Linear { features, coef }
        }
        CandidateSpec::KernelOptimization { bandwidth } => PolicyState::Kernel(KernelQuantile::fit(&rows, &demands, bandwidth, ratio)?),
        CandidateSpec::ClusterSaa { n_clusters } => {
            let scaler = Standardizer::fit(&rows);
            let points: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();
            let km = kmeans(&points, n_clusters.min(points.len()), seed)?;
            let overall = saa_quantile(&demands, ratio)?;
            let quantiles = (0..km.centroids.len())
                .map(|c| {
                    let members: Vec<f64> =
                        km.assignments.iter().zip(&demands).filter(|(&a, _)| a == c).map(|(_, &d)| d).collect();
                    if members.is_empty() {
                        Ok(overall)
                    } else {
                        saa_quantile(&members, ratio)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            PolicyState::Cluster { scaler, centroids: km.centroids, quantiles }
        }
        CandidateSpec::NeuralPinball { hidden, epochs, learning_rate, batch_size, loss } => {
            let xscale = MinMaxScaler::fit(&rows);
            let ycols: Vec<[f64; 1]> = demands.iter().map(|&d| [d]).collect();
            let yrefs: Vec<&[f64]> = ycols.iter().map(|c| c.as_slice()).collect();
            let yscale = MinMaxScaler::fit(&yrefs);
            let xs: Vec<Vec<f64>> = rows.iter().map(|r| xscale.transform(r)).collect();
            let ys: Vec<f64> = demands.iter().map(|&d| yscale.forward_scalar(d)).collect();
            let mut net = Mlp::new(train.dim(), hidden, &mut rng_from_seed(derive_seed(seed, &[0])));
            let train_loss = match loss {
                NeuralLoss::Pinball => Loss::Pinball { ratio },
                NeuralLoss::Mse => Loss::Mse,
            };
            net.train(&xs, &ys, train_loss, &TrainConfig { epochs, learning_rate, batch_size }, derive_seed(seed, &[1]));
            let shift = match loss {
                NeuralLoss::Pinball => 0.0,
                NeuralLoss::Mse => {
                    let res: Vec<f64> =
                        xs.iter().zip(&demands).map(|(x, d)| d - yscale.inverse_scalar(net.forward(x))).collect();
                    saa_quantile(&res, ratio)?
                }
            };
            PolicyState::Neural { net, xscale, yscale, shift }
        }
        CandidateSpec::RbfKernelRidge { penalty, length_scale } => {
            PolicyState::Ridge(RbfRidge::fit(&rows, &demands, penalty, length_scale, ratio)?)
        }
    };
    for w in &warnings {
        warn!("{}: {w}", spec.label());
    }
    Ok(FittedPolicy { label: spec.label(), dim: train.dim(), state, warnings })
}

fn require_rows(n: usize, width: usize, what: &str) -> Result<()> {
    if n < width + 1 {
        return Err(PaaError::InsufficientData(format!("{what} with {width} coefficients needs at least {} rows, got {n}", width + 1)));
    }
    Ok(())
}

fn fit_linear_quantile(features: &PolyFeatures, rows: &[&[f64]], demands: &[f64], ratio: f64, reg: Penalty) -> Result<Vec<f64>> {
    require_rows(rows.len(), features.width(), "linear quantile fit")?;
    let design: Vec<Vec<f64>> = rows.iter().map(|r| features.transform(r)).collect();
    fit_pinball_linear(&design, demands, ratio, reg)
}

/// Picks `λ` by refitting on the first rows and scoring the time-ordered tail.
fn tune_penalty(
    rows: &[&[f64]],
    demands: &[f64],
    order: usize,
    ratio: f64,
    costs: &CostParams<f64>,
    make: fn(f64) -> Penalty,
) -> Result<Penalty> {
    let n = rows.len();
    let n_val = ((n as f64 * ERM_VALIDATION_SHARE).round() as usize).max(1);
    let n_fit = n.saturating_sub(n_val);
    let features = PolyFeatures::fit(&rows[..n_fit], order);
    require_rows(n_fit, features.width(), "penalty tuning")?;
    let mut best = (f64::INFINITY, make(ERM_LAMBDA_GRID[0]));
    for &lambda in &ERM_LAMBDA_GRID {
        let coef = fit_linear_quantile(&features, &rows[..n_fit], &demands[..n_fit], ratio, make(lambda))?;
        let val = mean_cost(|j| dot(&features.transform(rows[n_fit + j]), &coef), &demands[n_fit..], costs);
        if val < best.0 {
            best = (val, make(lambda));
        }
    }
    Ok(best.1)
}

fn fit_eto_regression(rows: &[&[f64]], demands: &[f64], order: usize, with_linear_sd: bool, ratio: f64) -> Result<PolicyState> {
    let features = PolyFeatures::fit(rows, order);
    let p = features.width();
    require_rows(rows.len(), p, "regression")?;
    let design: Vec<Vec<f64>> = rows.iter().map(|r| features.transform(r)).collect();
    let mut beta = least_squares(&design, demands)?;
    let residuals: Vec<f64> = design.iter().zip(demands).map(|(x, d)| d - dot(x, &beta)).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let n = rows.len();
    let sd = (rss / (n - p) as f64).sqrt();
    let z = std_normal_inv_cdf(ratio)?;
    if !with_linear_sd {
        beta[0] += sd * z;
        return Ok(PolicyState::Linear { features, coef: beta });
    }
    let sd_scaler = Standardizer::fit(rows);
    let sd_design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![1.0];
            v.extend(sd_scaler.transform(r));
            v
        })
        .collect();
    let floor = 1e-3 * sd.max(f64::MIN_POSITIVE);
    // E|ε| = σ·√(2/π) for Gaussian ε.
    let scaled_abs: Vec<f64> = residuals.iter().map(|r| r.abs() * (std::f64::consts::PI / 2.0).sqrt()).collect();
    let mut gamma = least_squares(&sd_design, &scaled_abs).unwrap_or_default();
    if gamma.len() != sd_design[0].len() || sd_design.iter().any(|x| dot(x, &gamma) <= floor) {
        gamma = vec![0.0; sd_design[0].len()];
        gamma[0] = sd.max(floor);
    }
    let nll = |theta: &[f64]| -> f64 {
        let (b, g) = theta.split_at(p);
        design
            .iter()
            .zip(&sd_design)
            .zip(demands)
            .map(|((x, s), d)| {
                let sigma = dot(s, g).max(floor);
                let r = d - dot(x, b);
                sigma.ln() + r * r / (2.0 * sigma * sigma)
            })
            .sum()
    };
    let theta0: Vec<f64> = beta.iter().chain(&gamma).copied().collect();
    let mut opts = NelderMeadOptions::new(Tolerance::new(1e-8 * (1.0 + sd), 400 * theta0.len())?);
    opts.f_tol = Some(1e-10 * n as f64);
    let res = nelder_mead_with(nll, &theta0, &opts)?;
    let (b, g) = res.x.split_at(p);
    Ok(PolicyState::Heteroscedastic { features, beta: b.to_vec(), sd_scaler, gamma: g.to_vec(), z })
}

fn fit_autoregressive(train: &Dataset<f64>, trend: bool, lag_column: usize, ratio: f64) -> Result<PolicyState> {
    if lag_column >= train.dim() {
        return Err(PaaError::MissingCovariates(format!("lag column {lag_column} of a {}-dim dataset", train.dim())));
    }
    let design: Vec<Vec<f64>> = train
        .rows()
        .iter()
        .map(|r| {
            let mut v = vec![1.0];
            if trend {
                v.push(r.time);
            }
            v.push(r.covariates[lag_column]);
            v
        })
        .collect();
    let p = design[0].len();
    require_rows(train.len(), p, "autoregression")?;
    let demands = train.demands();
    let coef = least_squares(&design, &demands)?;
    let rss: f64 = design.iter().zip(&demands).map(|(x, d)| (d - dot(x, &coef)).powi(2)).sum();
    let sd = (rss / (train.len() - p) as f64).sqrt();
    Ok(PolicyState::Autoregressive { coef, trend, lag_column, shift: sd * std_normal_inv_cdf(ratio)? })
}

fn params_to_vec(p: &DistParams) -> Vec<f64> {
    match *p {
        DistParams::Normal { mu, sigma } => vec![mu, sigma.ln()],
        DistParams::Exponential { lambda } => vec![lambda.ln()],
        DistParams::ChiSquare { k } => vec![k.ln()],
        DistParams::StudentT { loc, scale, nu } => vec![loc, scale.ln(), nu.ln()],
        DistParams::InverseGamma { alpha, beta } => vec![alpha.ln(), beta.ln()],
    }
}

fn params_from_vec(family: DistFamily, v: &[f64]) -> DistParams {
    match family {
        DistFamily::Normal => DistParams::Normal { mu: v[0], sigma: v[1].exp() },
        DistFamily::Exponential => DistParams::Exponential { lambda: v[0].exp() },
        DistFamily::ChiSquare => DistParams::ChiSquare { k: v[0].exp() },
        DistFamily::StudentT => DistParams::StudentT { loc: v[0], scale: v[1].exp(), nu: v[2].exp() },
        DistFamily::InverseGamma => DistParams::InverseGamma { alpha: v[0].exp(), beta: v[1].exp() },
    }
}

/// Integrated estimation: parameters minimizing the in-sample cost of the
/// induced order quantity, started from the likelihood fit.
fn fit_ieo(start: DistParams, demands: &[f64], costs: &CostParams<f64>) -> Result<(DistParams, f64)> {
    let ratio = costs.critical_ratio();
    let cost_of = |q: f64| mean_cost(|_| q, demands, costs);
    let eto_q = quantile(&start, ratio)?;
    if let DistParams::Normal { sigma, .. } = start {
        // Q = μ + σ z spans every quantity, so the search is over Q itself;
        // the cost is piecewise linear with kinks at the demands.
        let lo = demands.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = demands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut q, best) = if hi > lo { golden_section(cost_of, lo, hi, Tolerance::default())? } else { (lo, cost_of(lo)) };
        let mut sorted = demands.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (mut bp, mut bp_cost) = (sorted[0], cost_of(sorted[0]));
        for &d in &sorted[1..] {
            let c = cost_of(d);
            if c < bp_cost {
                bp = d;
                bp_cost = c;
            }
        }
        // The minimum of a piecewise-linear cost sits on a kink.
        if bp_cost <= best + 1e-12 * (1.0 + best.abs()) {
            q = bp;
        }
        let z = std_normal_inv_cdf(ratio)?;
        return Ok((DistParams::Normal { mu: q - sigma * z, sigma }, q));
    }
    let family = start.family();
    let objective = |v: &[f64]| {
        let p = params_from_vec(family, v);
        match p.validate().and_then(|_| quantile(&p, ratio)) {
            Ok(q) if q.is_finite() => cost_of(q),
            _ => f64::INFINITY,
        }
    };
    let x0 = params_to_vec(&start);
    let res = nelder_mead_with(objective, &x0, &NelderMeadOptions::new(Tolerance::new(1e-8, 500 * x0.len())?))?;
    if res.value < cost_of(eto_q) {
        let p = params_from_vec(family, &res.x);
        Ok((p, quantile(&p, ratio)?))
    } else {
        Ok((start, eto_q))
    }
}
