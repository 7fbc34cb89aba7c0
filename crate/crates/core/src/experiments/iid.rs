//! Convergence of candidates and their average on i.i.d. normal demand.

use std::io::Write;

use serde::Serialize;

use super::{ci_half_width, gen_iid, mean, percentile_lower, run_grid, sorted, write_csv_rows, RunConfig};
use crate::error::Result;
use crate::paa::{bound_schedule, fit_paa};
use crate::rng::derive_seed;

/// One replication: order quantities and out-of-sample mean costs, indexed
/// like the candidate list with the averaged policy last.
#[derive(Debug, Clone, PartialEq)]
pub struct IidRep {
    pub q: Vec<f64>,
    pub oos_cost: Vec<f64>,
    pub weights: Vec<f64>,
    pub cv_cost: f64,
    pub per_candidate_cv_cost: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IidRow {
    pub t: usize,
    pub policy: String,
    pub mean_q: f64,
    pub ci_half: f64,
    pub oos_mean_cost: f64,
    pub oos_q25: f64,
    pub oos_q75: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IidStudy {
    pub labels: Vec<String>,
    pub t_grid: Vec<usize>,
    pub reps: Vec<Vec<IidRep>>,
    pub rows: Vec<IidRow>,
}

pub const IID_HEADER: [&str; 7] = ["t", "policy", "mean_q", "ci_half", "oos_mean_cost", "oos_q25", "oos_q75"];

impl IidStudy {
    pub fn row(&self, t: usize, policy: &str) -> Option<&IidRow> {
        self.rows.iter().find(|r| r.t == t && r.policy == policy)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(out, &IID_HEADER, &self.rows)
    }
}

/// For every `t` and replication: draw `t + holdout` demands, fit candidates
/// and the averaged policy on the first `t`, score all of them on the rest.
pub fn run_iid_study(cfg: &RunConfig) -> Result<IidStudy> {
    cfg.validate()?;
    let costs = cfg.costs()?;
    let reps = run_grid(&cfg.t_grid, cfg.replications, cfg.master_seed, |t, _, seed| {
        let h = cfg.holdout.unwrap_or(t);
        let all = gen_iid(&cfg.scenario, t + h, derive_seed(seed, &[0]))?;
        let train = all.slice(0..t)?;
        let holdout = all.slice(t..t + h)?.demands();
        let fit = fit_paa(&train, &cfg.candidates, &costs, &cfg.batch.plan(t)?, &bound_schedule(t, cfg.bounds)?, derive_seed(seed, &[1]))?;
        let mut q = Vec::with_capacity(cfg.candidates.len() + 1);
        for p in fit.candidates.iter().chain(std::iter::once(&fit.policy)) {
            q.push(p.evaluate(&[])?);
        }
        let oos_cost = q.iter().map(|&v| mean(&holdout.iter().map(|&d| costs.cost(v, d)).collect::<Vec<_>>())).collect();
        Ok(IidRep {
            q,
            oos_cost,
            weights: fit.solution.weights,
            cv_cost: fit.solution.cv_cost,
            per_candidate_cv_cost: fit.solution.per_candidate_cv_cost,
        })
    })?;
    let mut labels: Vec<String> = cfg.candidates.iter().map(|c| c.label()).collect();
    labels.push("paa".into());
    let mut rows = Vec::new();
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        for (i, label) in labels.iter().enumerate() {
            let q: Vec<f64> = reps[k].iter().map(|r| r.q[i]).collect();
            let c = sorted(reps[k].iter().map(|r| r.oos_cost[i]).collect());
            rows.push(IidRow {
                t,
                policy: label.clone(),
                mean_q: mean(&q),
                ci_half: ci_half_width(&q),
                oos_mean_cost: mean(&c),
                oos_q25: percentile_lower(&c, 0.25),
                oos_q75: percentile_lower(&c, 0.75),
            });
        }
    }
    Ok(IidStudy { labels, t_grid: cfg.t_grid.clone(), reps, rows })
}
