//! Simulation studies: data generators, the replication runner and three
//! study protocols.

mod distance;
mod feature;
mod iid;

pub use distance::{run_distance_improvement_study, DistanceConfig, DistancePoint, DistanceStudy};
pub use feature::{run_feature_study, FeatureRep, FeatureRow, FeatureStudy, T_OPT_LABEL};
pub use iid::{run_iid_study, IidRep, IidRow, IidStudy};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSpec;
use crate::error::{PaaError, Result};
use crate::newsvendor::{CostParams, Dataset, FoldPlan};
use crate::paa::BoundStyle;
use crate::rng::{derive_seed, rng_from_seed, std_normal, uniform_in};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimScenario {
    IidNormal { mu: f64, sigma: f64 },
    /// `x ~ U[−1, 1]`, `d ~ N(μ(x), σ(x)²)` with [`feature_mean`] and [`feature_sd`].
    Feature,
}

impl SimScenario {
    pub fn iid_default() -> Self {
        SimScenario::IidNormal { mu: 60.0, sigma: 10.0 }
    }
}

/// `μ(x) = 80 e^{−10(x+0.5)²} + 30`
/// Degrees of freedom of the Student-t candidate in the i.i.d. presets.
/// Left free, the fitted ν runs to its cap on normal data and the t fit
/// collapses onto the normal one.
pub const TABLE_T_DF: f64 = 3.0;

pub fn feature_mean(x: f64) -> f64 {
    80.0 * (-10.0 * (x + 0.5).powi(2)).exp() + 30.0
}

/// `σ(x) = 5 e^{−8(x−0.5)²}`
pub fn feature_sd(x: f64) -> f64 {
    5.0 * (-8.0 * (x - 0.5).powi(2)).exp()
}

/// `t` i.i.d. normal demands without covariates.
pub fn gen_iid(scenario: &SimScenario, t: usize, seed: u64) -> Result<Dataset<f64>> {
    let SimScenario::IidNormal { mu, sigma } = *scenario else {
        return Err(PaaError::InvalidArgument("gen_iid needs an i.i.d. normal scenario".into()));
    };
    let mut rng = rng_from_seed(seed);
    let d: Vec<f64> = (0..t).map(|_| mu + sigma * std_normal(&mut rng)).collect();
    Dataset::from_demands(&d)
}

/// `t` rows of the one-dimensional feature scenario.
pub fn gen_feature(scenario: &SimScenario, t: usize, seed: u64) -> Result<Dataset<f64>> {
    if *scenario != SimScenario::Feature {
        return Err(PaaError::InvalidArgument("gen_feature needs the feature scenario".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut xs = Vec::with_capacity(t);
    let mut d = Vec::with_capacity(t);
    for _ in 0..t {
        let x = uniform_in(&mut rng, -1.0, 1.0);
        d.push(feature_mean(x) + feature_sd(x) * std_normal(&mut rng));
        xs.push(vec![x]);
    }
    Dataset::from_parts(&d, xs)
}

/// How the training rows are split into held-out folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BatchRule {
    LeaveOneOut,
    /// Contiguous folds of a fixed size.
    Fixed(usize),
    /// Contiguous folds of `max(1, floor(t / k))` rows, i.e. about `k` folds.
    Folds(usize),
}

impl BatchRule {
    pub fn plan(&self, t: usize) -> Result<FoldPlan> {
        match *self {
            BatchRule::LeaveOneOut => FoldPlan::leave_one_out(t),
            BatchRule::Fixed(k) => FoldPlan::contiguous(t, k),
            BatchRule::Folds(k) => FoldPlan::contiguous(t, (t / k.max(1)).max(1)),
        }
    }
}

fn default_overage() -> f64 {
    1.0
}
fn default_underage() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub candidates: Vec<CandidateSpec>,
    pub bounds: BoundStyle,
    /// Out-of-sample rows per replication; `None` means as many as training rows.
    #[serde(default)]
    pub holdout: Option<usize>,
    pub batch: BatchRule,
    pub scenario: SimScenario,
    #[serde(default = "default_overage")]
    pub overage: f64,
    #[serde(default = "default_underage")]
    pub underage: f64,
}

impl RunConfig {
    /// Desk-scale defaults of the i.i.d. convergence study.
    pub fn iid_default() -> Self {
        use crate::distributions::DistFamily;
        Self {
            t_grid: vec![20, 60, 120, 200],
            replications: 200,
            master_seed: 2024,
            candidates: vec![
                CandidateSpec::EtoIid { family: DistFamily::InverseGamma, t_df: None },
                CandidateSpec::EtoIid { family: DistFamily::StudentT, t_df: Some(TABLE_T_DF) },
            ],
            bounds: BoundStyle::Narrow,
            holdout: Some(10),
            batch: BatchRule::LeaveOneOut,
            scenario: SimScenario::iid_default(),
            overage: 1.0,
            underage: 3.0,
        }
    }

    /// Desk-scale defaults of the feature study.
    pub fn feature_default() -> Self {
        Self {
            t_grid: vec![500],
            replications: 100,
            master_seed: 2024,
            candidates: vec![
                CandidateSpec::EtoRegression { poly_order: 1, linear_sd: true },
                CandidateSpec::rbf_default(),
                CandidateSpec::neural_default(),
            ],
            bounds: BoundStyle::Wide,
            holdout: None,
            batch: BatchRule::Folds(10),
            scenario: SimScenario::Feature,
            overage: 1.0,
            underage: 3.0,
        }
    }

    pub fn costs(&self) -> Result<CostParams<f64>> {
        CostParams::new(self.overage, self.underage)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() || self.replications == 0 || self.candidates.is_empty() {
            return Err(PaaError::InvalidArgument("t_grid, replications and candidates must be nonempty".into()));
        }
        if let Some(&t) = self.t_grid.iter().find(|&&t| t < 3) {
            return Err(PaaError::InvalidArgument(format!("training size {t} is too small")));
        }
        if self.holdout == Some(0) {
            return Err(PaaError::InvalidArgument("holdout must be positive".into()));
        }
        self.candidates.iter().try_for_each(CandidateSpec::validate)?;
        self.costs().map(|_| ())
    }
}

/// Runs `f(t, rep, seed)` over the whole `(t, replication)` grid in parallel
/// and returns results in grid order.
pub(crate) fn run_grid<T, F>(t_grid: &[usize], replications: usize, master_seed: u64, f: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(usize, usize, u64) -> Result<T> + Sync,
{
    let cells: Vec<(usize, usize)> = (0..t_grid.len()).flat_map(|k| (0..replications).map(move |r| (k, r))).collect();
    let results: Vec<Result<T>> = cells
        .par_iter()
        .map(|&(k, r)| {
            let t = t_grid[k];
            let seed = derive_seed(master_seed, &[t as u64, r as u64]);
            f(t, r, seed).map_err(|e| PaaError::Replication { t, replication: r, seed, source: Box::new(e) })
        })
        .collect();
    let mut out: Vec<Vec<T>> = (0..t_grid.len()).map(|_| Vec::with_capacity(replications)).collect();
    for (&(k, _), res) in cells.iter().zip(results) {
        out[k].push(res?);
    }
    Ok(out)
}

/// Lower-interpolation percentile of sorted data: element `⌊p (n − 1)⌋`.
pub fn percentile_lower(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted[((p * (sorted.len() - 1) as f64).floor() as usize).min(sorted.len() - 1)]
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Half-width of the 95% normal-approximation interval on the mean.
pub(crate) fn ci_half_width(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    1.959_963_984_540_054 * (var / v.len() as f64).sqrt()
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Writes `header` then one serialized record per row.
pub fn write_csv_rows<W: Write, R: Serialize>(out: W, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
