//! Covariate-dependent demand: training, held-out and out-of-sample costs
//! of the candidates, their average and the true conditional quantile.

use std::io::Write;

use serde::Serialize;

use super::{feature_mean, feature_sd, gen_feature, mean, run_grid, write_csv_rows, RunConfig};
use crate::candidates::FittedPolicy;
use crate::error::Result;
use crate::newsvendor::{CostParams, Dataset};
use crate::paa::{bound_schedule, fit_paa};
use crate::rng::derive_seed;
use crate::special::std_normal_inv_cdf;

pub const T_OPT_LABEL: &str = "t_opt";

/// Costs of one replication, indexed like the candidate list followed by
/// the averaged policy and the true conditional quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRep {
    pub train_cost: Vec<f64>,
    pub test_cost: Vec<f64>,
    pub oos_cost: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRow {
    pub t: usize,
    pub policy: String,
    pub train_cost: f64,
    pub test_cost: f64,
    pub oos_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStudy {
    pub labels: Vec<String>,
    pub t_grid: Vec<usize>,
    pub reps: Vec<Vec<FeatureRep>>,
    pub rows: Vec<FeatureRow>,
}

pub const FEATURE_HEADER: [&str; 5] = ["t", "policy", "train_cost", "test_cost", "oos_cost"];

impl FeatureStudy {
    pub fn row(&self, t: usize, policy: &str) -> Option<&FeatureRow> {
        self.rows.iter().find(|r| r.t == t && r.policy == policy)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(out, &FEATURE_HEADER, &self.rows)
    }
}

fn policy_cost(p: &FittedPolicy, data: &Dataset<f64>, costs: &CostParams<f64>) -> Result<f64> {
    let c: Vec<f64> = data.rows().iter().map(|r| Ok(costs.cost(p.evaluate_row(r)?, r.demand))).collect::<Result<_>>()?;
    Ok(mean(&c))
}

fn t_opt_cost(data: &Dataset<f64>, costs: &CostParams<f64>, z: f64) -> f64 {
    mean(
        &data
            .rows()
            .iter()
            .map(|r| {
                let x = r.covariates[0];
                costs.cost(feature_mean(x) + feature_sd(x) * z, r.demand)
            })
            .collect::<Vec<_>>(),
    )
}

/// For every `t` and replication: draw `t + holdout` rows (holdout defaults
/// to `t`), fit on the first `t`, score on the rest.
pub fn run_feature_study(cfg: &RunConfig) -> Result<FeatureStudy> {
    cfg.validate()?;
    let costs = cfg.costs()?;
    let z = std_normal_inv_cdf(costs.critical_ratio())?;
    let reps = run_grid(&cfg.t_grid, cfg.replications, cfg.master_seed, |t, _, seed| {
        let h = cfg.holdout.unwrap_or(t);
        let all = gen_feature(&cfg.scenario, t + h, derive_seed(seed, &[0]))?;
        let train = all.slice(0..t)?;
        let oos = all.slice(t..t + h)?;
        let fit = fit_paa(&train, &cfg.candidates, &costs, &cfg.batch.plan(t)?, &bound_schedule(t, cfg.bounds)?, derive_seed(seed, &[1]))?;
        let mut train_cost = Vec::new();
        let mut oos_cost = Vec::new();
        for p in fit.candidates.iter().chain(std::iter::once(&fit.policy)) {
            train_cost.push(policy_cost(p, &train, &costs)?);
            oos_cost.push(policy_cost(p, &oos, &costs)?);
        }
        let topt_train = t_opt_cost(&train, &costs, z);
        train_cost.push(topt_train);
        oos_cost.push(t_opt_cost(&oos, &costs, z));
        let mut test_cost = fit.solution.per_candidate_cv_cost.clone();
        test_cost.push(fit.solution.cv_cost);
        test_cost.push(topt_train);
        Ok(FeatureRep { train_cost, test_cost, oos_cost, weights: fit.solution.weights })
    })?;
    let mut labels: Vec<String> = cfg.candidates.iter().map(|c| c.label()).collect();
    labels.push("paa".into());
    labels.push(T_OPT_LABEL.into());
    let mut rows = Vec::new();
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        for (i, label) in labels.iter().enumerate() {
            let col = |f: fn(&FeatureRep) -> &Vec<f64>| mean(&reps[k].iter().map(|r| f(r)[i]).collect::<Vec<_>>());
            rows.push(FeatureRow {
                t,
                policy: label.clone(),
                train_cost: col(|r| &r.train_cost),
                test_cost: col(|r| &r.test_cost),
                oos_cost: col(|r| &r.oos_cost),
            });
        }
    }
    Ok(FeatureStudy { labels, t_grid: cfg.t_grid.clone(), reps, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{CandidateSpec, ErmPenalty};

    #[test]
    fn small_feature_run() {
        let mut cfg = RunConfig::feature_default();
        cfg.t_grid = vec![40];
        cfg.replications = 2;
        cfg.candidates = vec![
            CandidateSpec::EtoRegression { poly_order: 1, linear_sd: true },
            CandidateSpec::Erm { poly_order: 3, reg: ErmPenalty::None },
        ];
        let s = run_feature_study(&cfg).unwrap();
        assert_eq!(s.rows.len(), 4);
        for rep in s.reps.iter().flatten() {
            assert!(rep.test_cost[2] <= rep.test_cost[0] && rep.test_cost[2] <= rep.test_cost[1]);
        }
        let topt = s.row(40, T_OPT_LABEL).unwrap();
        assert_eq!(topt.train_cost, topt.test_cost);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,policy,train_cost,test_cost,oos_cost\n40,eto_poly1_linear_sd,"));
    }
}
