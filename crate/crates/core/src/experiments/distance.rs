//! Relation between the held-out distance of two candidates and the gain
//! from averaging them.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_iid, mean, write_csv_rows, SimScenario, TABLE_T_DF};
use crate::analytics::{expected_cost_j, ols_fit, DemandGaussian, OlsFit};
use crate::candidates::CandidateSpec;
use crate::distributions::DistFamily;
use crate::error::{PaaError, Result};
use crate::newsvendor::{CostParams, FoldPlan};
use crate::paa::{bound_schedule, build_fold_matrix, column_distance, fit_full, solve_weights, BoundStyle};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub n: usize,
    pub paths: usize,
    /// Paths are split into this many equal consecutive groups; each
    /// (pair, group) yields one point.
    pub groups: usize,
    pub master_seed: u64,
    pub candidates: Vec<CandidateSpec>,
    pub bounds: BoundStyle,
    pub scenario: SimScenario,
    pub overage: f64,
    pub underage: f64,
}

impl DistanceConfig {
    /// The five parametric candidates at `n = 120`, desk scale (200 paths).
    pub fn desk_default() -> Self {
        Self {
            n: 120,
            paths: 200,
            groups: 20,
            master_seed: 2024,
            candidates: vec![
                CandidateSpec::EtoIid { family: DistFamily::InverseGamma, t_df: None },
                CandidateSpec::EtoIid { family: DistFamily::StudentT, t_df: Some(TABLE_T_DF) },
                CandidateSpec::EtoIid { family: DistFamily::Exponential, t_df: None },
                CandidateSpec::EtoIid { family: DistFamily::ChiSquare, t_df: None },
                CandidateSpec::IeoIid { family: DistFamily::Normal },
            ],
            bounds: BoundStyle::Narrow,
            scenario: SimScenario::iid_default(),
            overage: 1.0,
            underage: 3.0,
        }
    }

    pub fn full_default() -> Self {
        Self { paths: 1000, ..Self::desk_default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistancePoint {
    pub pair: String,
    pub group: usize,
    pub distance: f64,
    pub rel_improvement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceStudy {
    pub points: Vec<DistancePoint>,
    pub ols: OlsFit<f64>,
}

pub const DISTANCE_HEADER: [&str; 4] = ["pair", "group", "distance", "rel_improvement"];

impl DistanceStudy {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(out, &DISTANCE_HEADER, &self.points)
    }
}

/// Per path: held-out matrix of every candidate, then for each pair the
/// two-candidate weights. Costs are exact expected costs under the true
/// demand law; the relative improvement is the mean over the pair of
/// `(C_k − C_avg) / C_k`.
pub fn run_distance_improvement_study(cfg: &DistanceConfig) -> Result<DistanceStudy> {
    let SimScenario::IidNormal { mu, sigma } = cfg.scenario else {
        return Err(PaaError::InvalidArgument("distance study needs an i.i.d. normal scenario".into()));
    };
    if cfg.candidates.len() < 2 || cfg.groups == 0 || cfg.paths < cfg.groups || cfg.paths % cfg.groups != 0 {
        return Err(PaaError::InvalidArgument("need >= 2 candidates and paths divisible into nonempty groups".into()));
    }
    let costs = CostParams::new(cfg.overage, cfg.underage)?;
    let demand = DemandGaussian::new(mu, sigma * sigma)?;
    let bx = bound_schedule(cfg.n, cfg.bounds)?;
    let plan = FoldPlan::leave_one_out(cfg.n)?;
    let m = cfg.candidates.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let per_path: Vec<Result<Vec<(f64, f64)>>> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let seed = derive_seed(cfg.master_seed, &[p as u64]);
            let data = gen_iid(&cfg.scenario, cfg.n, derive_seed(seed, &[0]))?;
            let matrix = build_fold_matrix(&data, &cfg.candidates, &costs, &plan, derive_seed(seed, &[1]))?;
            let full = fit_full(&cfg.candidates, &data, &costs, derive_seed(seed, &[1]))?;
            let q: Vec<f64> = full.iter().map(|f| f.evaluate(&[])).collect::<Result<_>>()?;
            let c: Vec<f64> = q.iter().map(|&v| expected_cost_j(v, 0.0, &demand, &costs)).collect::<Result<_>>()?;
            pairs
                .iter()
                .map(|&(a, b)| {
                    let sol = solve_weights(&matrix.select(&[a, b])?, &costs, &bx)?;
                    let qp = sol.weights[0] * q[a] + sol.weights[1] * q[b];
                    let cp = expected_cost_j(qp, 0.0, &demand, &costs)?;
                    Ok((column_distance(&matrix, a, b), 0.5 * ((c[a] - cp) / c[a] + (c[b] - cp) / c[b])))
                })
                .collect()
        })
        .collect();
    let per_path: Vec<Vec<(f64, f64)>> = per_path.into_iter().collect::<Result<_>>()?;
    let size = cfg.paths / cfg.groups;
    let mut points = Vec::with_capacity(pairs.len() * cfg.groups);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for g in 0..cfg.groups {
            let slice = &per_path[g * size..(g + 1) * size];
            points.push(DistancePoint {
                pair: format!("{}+{}", cfg.candidates[a].label(), cfg.candidates[b].label()),
                group: g,
                distance: mean(&slice.iter().map(|v| v[k].0).collect::<Vec<_>>()),
                rel_improvement: mean(&slice.iter().map(|v| v[k].1).collect::<Vec<_>>()),
            });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.distance).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.rel_improvement).collect();
    let ols = ols_fit(&xs, &ys)?;
    Ok(DistanceStudy { points, ols })
}
