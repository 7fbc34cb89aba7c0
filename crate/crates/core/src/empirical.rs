//! Staffing pipeline on a daily occupancy series: feature engineering,
//! chronological split, candidates plus their average, and cost reports.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::candidates::{CandidateSpec, ErmPenalty, FittedPolicy};
use crate::error::{PaaError, Result};
use crate::experiments::{percentile_lower, BatchRule};
use crate::newsvendor::{CostParams, Dataset, Observation};
use crate::paa::{bound_schedule, fit_paa, BoundStyle};
use crate::rng::{rng_from_seed, std_normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub occupancy: f64,
}

/// What to do with missing calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFill {
    #[default]
    Reject,
    /// Linear interpolation between the neighbouring observed days.
    Linear,
}

#[derive(Deserialize)]
struct RawRecord {
    date: String,
    occupancy: f64,
}

pub fn load_series(path: &Path, gaps: GapFill) -> Result<Vec<DailyRecord>> {
    read_series(std::fs::File::open(path)?, gaps)
}

/// Parses `date,occupancy` CSV with ISO-8601 dates in strictly increasing
/// daily order.
pub fn read_series<R: Read>(reader: R, gaps: GapFill) -> Result<Vec<DailyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["date", "occupancy"] {
        return Err(PaaError::Parse(format!("expected header `date,occupancy`, got `{}`", header.join(","))));
    }
    let mut out: Vec<DailyRecord> = Vec::new();
    for (k, rec) in rdr.deserialize::<RawRecord>().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| PaaError::Parse(format!("row {row}: {e}")))?;
        let date = NaiveDate::parse_from_str(&rec.date, "%Y-%m-%d")
            .map_err(|e| PaaError::Parse(format!("row {row}: bad date `{}`: {e}", rec.date)))?;
        if !rec.occupancy.is_finite() || rec.occupancy < 0.0 {
            return Err(PaaError::Parse(format!("row {row}: occupancy must be finite and nonnegative")));
        }
        if let Some(prev) = out.last().copied() {
            let step = (date - prev.date).num_days();
            if step <= 0 {
                return Err(PaaError::Parse(format!("row {row}: date {date} does not follow {}", prev.date)));
            }
            if step > 1 {
                if gaps == GapFill::Reject {
                    return Err(PaaError::Parse(format!("row {row}: {} missing day(s) before {date}", step - 1)));
                }
                for s in 1..step {
                    let w = s as f64 / step as f64;
                    out.push(DailyRecord {
                        date: prev.date + chrono::Duration::days(s),
                        occupancy: prev.occupancy + w * (rec.occupancy - prev.occupancy),
                    });
                }
            }
        }
        out.push(DailyRecord { date, occupancy: rec.occupancy });
    }
    Ok(out)
}

pub fn write_series<W: Write>(out: W, records: &[DailyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "occupancy"])?;
    for r in records {
        w.write_record([r.date.format("%Y-%m-%d").to_string(), r.occupancy.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Day-of-week indicators: six with Monday as baseline, or all seven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayEncoding {
    #[default]
    Six,
    Seven,
}

impl DayEncoding {
    pub fn width(&self) -> usize {
        match self {
            DayEncoding::Six => 6,
            DayEncoding::Seven => 7,
        }
    }

    /// Column of `d_{t−1}` in the engineered covariates.
    pub fn lag_column(&self) -> usize {
        self.width()
    }
}

pub const WARMUP_DAYS: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineeredData {
    pub data: Dataset<f64>,
    pub dates: Vec<NaiveDate>,
}

/// Demand = occupancy / `nurse_ratio`. Covariates: day-of-week indicators,
/// the three previous demands, and mean, min, max and range of the previous
/// seven. The first seven days only feed history; the tail is trimmed to a
/// whole number of weeks. `time` is the day index in the input.
pub fn engineer_features(records: &[DailyRecord], nurse_ratio: f64, encoding: DayEncoding) -> Result<EngineeredData> {
    if !(nurse_ratio > 0.0) {
        return Err(PaaError::InvalidArgument("nurse ratio must be positive".into()));
    }
    if records.len() < WARMUP_DAYS + 1 {
        return Err(PaaError::InsufficientData(format!("need at least {} days, got {}", WARMUP_DAYS + 1, records.len())));
    }
    let demand: Vec<f64> = records.iter().map(|r| r.occupancy / nurse_ratio).collect();
    let usable = records.len() - WARMUP_DAYS;
    let keep = usable - usable % 7;
    if keep < 2 {
        return Err(PaaError::InsufficientData("fewer than two weeks after warm-up".into()));
    }
    let mut rows = Vec::with_capacity(keep);
    let mut dates = Vec::with_capacity(keep);
    for i in WARMUP_DAYS..WARMUP_DAYS + keep {
        let dow = records[i].date.weekday().num_days_from_monday() as usize;
        let mut x = vec![0.0; encoding.width()];
        match encoding {
            DayEncoding::Six if dow > 0 => x[dow - 1] = 1.0,
            DayEncoding::Six => {}
            DayEncoding::Seven => x[dow] = 1.0,
        }
        x.extend([demand[i - 1], demand[i - 2], demand[i - 3]]);
        let week = &demand[i - WARMUP_DAYS..i];
        let lo = week.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = week.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        x.extend([week.iter().sum::<f64>() / WARMUP_DAYS as f64, lo, hi, hi - lo]);
        rows.push(Observation { demand: demand[i], covariates: x, time: i as f64 });
        dates.push(records[i].date);
    }
    Ok(EngineeredData { data: Dataset::new(rows)?, dates })
}

use chrono::Datelike;

/// The eleven candidates: three regressions (linear, quadratic,
/// autoregressive with trend), SAA, clustered SAA, quantile regression,
/// kernel optimization and four empirical-risk fits.
pub fn staffing_candidates(encoding: DayEncoding) -> Vec<CandidateSpec> {
    vec![
        CandidateSpec::EtoRegression { poly_order: 1, linear_sd: false },
        CandidateSpec::EtoRegression { poly_order: 2, linear_sd: false },
        CandidateSpec::EtoAutoregressive { trend: true, lag_column: encoding.lag_column() },
        CandidateSpec::Saa,
        CandidateSpec::ClusterSaa { n_clusters: 8 },
        CandidateSpec::QuantileRegression { poly_order: 1 },
        CandidateSpec::KernelOptimization { bandwidth: 2.0 },
        CandidateSpec::Erm { poly_order: 1, reg: ErmPenalty::None },
        CandidateSpec::Erm { poly_order: 2, reg: ErmPenalty::None },
        CandidateSpec::Erm { poly_order: 2, reg: ErmPenalty::L1Tuned },
        CandidateSpec::Erm { poly_order: 2, reg: ErmPenalty::L2Tuned },
    ]
}

fn default_split() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalConfig {
    pub candidates: Vec<CandidateSpec>,
    pub overage: f64,
    pub underage: f64,
    /// Share of rows used for training, rounded down to whole weeks.
    #[serde(default = "default_split")]
    pub split: f64,
    pub bounds: BoundStyle,
    pub batch: BatchRule,
    pub seed: u64,
}

impl EmpiricalConfig {
    pub fn staffing_default(encoding: DayEncoding) -> Self {
        Self {
            candidates: staffing_candidates(encoding),
            overage: 1.0 / 3.5,
            underage: 2.5 / 3.5,
            split: 0.7,
            bounds: BoundStyle::Narrow,
            batch: BatchRule::LeaveOneOut,
            seed: 2024,
        }
    }
}

/// Training rows: `⌊split·n⌋` rounded down to a multiple of 7.
pub fn training_rows(n: usize, split: f64) -> usize {
    let raw = (split * n as f64).floor() as usize;
    raw - raw % 7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: String,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub mean: f64,
    pub mapd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub policies: Vec<PolicyReport>,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub cv_cost: f64,
    pub per_candidate_cv_cost: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Time stamp of the last training row and the first evaluation row.
    pub last_train_time: f64,
    pub first_test_time: f64,
}

pub const REPORT_HEADER: [&str; 6] = ["policy", "p25", "median", "p75", "mean", "mapd"];

impl EmpiricalReport {
    pub fn policy(&self, label: &str) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.policy == label)
    }

    /// Lowest out-of-sample mean among the candidates (the averaged policy excluded).
    pub fn best_candidate(&self) -> &PolicyReport {
        self.policies
            .iter()
            .filter(|p| p.policy != "paa")
            .min_by(|a, b| a.mean.total_cmp(&b.mean))
            .expect("at least one candidate")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        crate::experiments::write_csv_rows(out, &REPORT_HEADER, &self.policies)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| PaaError::Io(e.to_string()))
    }
}

/// Mean absolute percentage deviation, in percent.
pub fn mapd(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(PaaError::LengthMismatch { expected: actual.len(), got: predicted.len() });
    }
    if actual.is_empty() {
        return Err(PaaError::InsufficientData("mapd of an empty series".into()));
    }
    if actual.iter().any(|&a| !(a > 0.0)) {
        return Err(PaaError::Domain("mapd needs positive actuals".into()));
    }
    Ok(100.0 * predicted.iter().zip(actual).map(|(p, a)| (p - a).abs() / a).sum::<f64>() / actual.len() as f64)
}

fn summarize(policy: &FittedPolicy, test: &Dataset<f64>, costs: &CostParams<f64>) -> Result<PolicyReport> {
    let q: Vec<f64> = test.rows().iter().map(|r| policy.evaluate_row(r)).collect::<Result<_>>()?;
    let d = test.demands();
    let mut c: Vec<f64> = q.iter().zip(&d).map(|(&q, &d)| costs.cost(q, d)).collect();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    c.sort_by(f64::total_cmp);
    Ok(PolicyReport {
        policy: policy.label().to_string(),
        p25: percentile_lower(&c, 0.25),
        median: percentile_lower(&c, 0.5),
        p75: percentile_lower(&c, 0.75),
        mean,
        mapd: mapd(&q, &d)?,
    })
}

/// Chronological split, candidates and the averaged policy on the training
/// block, daily costs on the rest.
pub fn run_empirical(data: &Dataset<f64>, cfg: &EmpiricalConfig) -> Result<EmpiricalReport> {
    let costs = CostParams::new(cfg.overage, cfg.underage)?;
    let n_train = training_rows(data.len(), cfg.split);
    if n_train < 2 || n_train >= data.len() {
        return Err(PaaError::InsufficientData(format!("split {} of {} rows leaves no usable block", cfg.split, data.len())));
    }
    let train = data.slice(0..n_train)?;
    let test = data.slice(n_train..data.len())?;
    let bx = bound_schedule(n_train, cfg.bounds)?;
    let fit = fit_paa(&train, &cfg.candidates, &costs, &cfg.batch.plan(n_train)?, &bx, cfg.seed)?;
    let policies = fit
        .candidates
        .iter()
        .chain(std::iter::once(&fit.policy))
        .map(|p| summarize(p, &test, &costs))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalReport {
        policies,
        labels: fit.matrix.labels().to_vec(),
        weights: fit.solution.weights,
        cv_cost: fit.solution.cv_cost,
        per_candidate_cv_cost: fit.solution.per_candidate_cv_cost,
        lower: bx.lower(),
        upper: bx.upper(),
        seed: cfg.seed,
        train_rows: n_train,
        test_rows: test.len(),
        last_train_time: train.row(n_train - 1).time,
        first_test_time: test.row(0).time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRow {
    pub subset: String,
    pub paa_mean: f64,
    pub best_candidate: String,
    pub best_candidate_mean: f64,
    /// `(best − paa) / best · 100`.
    pub improvement_pct: f64,
}

pub const SUBSET_HEADER: [&str; 5] = ["subset", "paa_mean", "best_candidate", "best_candidate_mean", "improvement_pct"];

/// Reruns the pipeline on subsets of the candidate list (indices into
/// `cfg.candidates`).
pub fn subset_sweep(data: &Dataset<f64>, cfg: &EmpiricalConfig, subsets: &[Vec<usize>]) -> Result<Vec<SubsetRow>> {
    subsets
        .iter()
        .map(|s| {
            let candidates = s
                .iter()
                .map(|&i| cfg.candidates.get(i).cloned().ok_or_else(|| PaaError::InvalidArgument(format!("no candidate {i}"))))
                .collect::<Result<Vec<_>>>()?;
            let report = run_empirical(data, &EmpiricalConfig { candidates, ..cfg.clone() })?;
            let paa = report.policy("paa").expect("paa row").mean;
            let best = report.best_candidate();
            Ok(SubsetRow {
                subset: s.iter().map(|i| format!("Q{}", i + 1)).collect::<Vec<_>>().join("+"),
                paa_mean: paa,
                best_candidate: best.policy.clone(),
                best_candidate_mean: best.mean,
                improvement_pct: (best.mean - paa) / best.mean * 100.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSeries {
    pub start: NaiveDate,
    pub base: f64,
    /// Occupancy added per day.
    pub trend: f64,
    pub weekly_amplitude: f64,
    pub noise_sd: f64,
}

impl Default for SyntheticSeries {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2020, 4, 1).expect("valid date"),
            base: 300.0,
            trend: 0.05,
            weekly_amplitude: 25.0,
            noise_sd: 15.0,
        }
    }
}

/// `base + trend·i + A·sin(2πi/7) + noise`, floored at 1.
pub fn gen_synthetic_series(days: usize, seed: u64, params: &SyntheticSeries) -> Result<Vec<DailyRecord>> {
    if days < 30 {
        return Err(PaaError::InvalidArgument(format!("synthetic series needs at least 30 days, got {days}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..days)
        .map(|i| {
            let season = params.weekly_amplitude * (2.0 * std::f64::consts::PI * i as f64 / 7.0).sin();
            let noise = if params.noise_sd > 0.0 { params.noise_sd * std_normal(&mut rng) } else { 0.0 };
            DailyRecord {
                date: params.start + chrono::Duration::days(i as i64),
                occupancy: (params.base + params.trend * i as f64 + season + noise).max(1.0),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn loader() {
        let ok = "date,occupancy\n2020-04-01,300\n2020-04-02,310\n2020-04-03,305\n";
        assert_eq!(read_series(ok.as_bytes(), GapFill::Reject).unwrap().len(), 3);
        let swapped = "date,occupancy\n2020-04-02,300\n2020-04-01,310\n";
        let err = read_series(swapped.as_bytes(), GapFill::Reject).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
        let gap = "date,occupancy\n2020-04-01,300\n2020-04-04,330\n";
        assert!(read_series(gap.as_bytes(), GapFill::Reject).is_err());
        let filled = read_series(gap.as_bytes(), GapFill::Linear).unwrap();
        assert_eq!(filled.len(), 4);
        assert_eq!(filled[2].occupancy, 320.0);
        assert!(read_series("day,occ\n".as_bytes(), GapFill::Reject).is_err());
        assert!(read_series("date,occupancy\n2020-13-01,3\n".as_bytes(), GapFill::Reject).is_err());
        let mut buf = Vec::new();
        write_series(&mut buf, &filled).unwrap();
        assert_eq!(read_series(buf.as_slice(), GapFill::Reject).unwrap(), filled);
    }

    #[test]
    fn feature_rows() {
        let flat: Vec<DailyRecord> =
            (0..30).map(|i| DailyRecord { date: day("2020-04-06") + chrono::Duration::days(i), occupancy: 300.0 }).collect();
        let e = engineer_features(&flat, 3.0, DayEncoding::Six).unwrap();
        assert!(e.data.demands().iter().all(|&d| d == 100.0));
        assert!(e.data.rows().iter().all(|r| r.covariates[12] == 0.0 && r.covariates.len() == 13));
        // 2020-04-13 is a Monday: baseline, no indicator set.
        assert_eq!(e.dates[0], day("2020-04-13"));
        assert!(e.data.row(0).covariates[..6].iter().all(|&v| v == 0.0));
        assert_eq!(e.data.row(1).covariates[0], 1.0);
        let seven = engineer_features(&flat, 3.0, DayEncoding::Seven).unwrap();
        assert_eq!(seven.data.dim(), 14);
        assert_eq!(seven.data.row(0).covariates[0], 1.0);

        let rising: Vec<DailyRecord> =
            (0..20).map(|i| DailyRecord { date: day("2020-04-01") + chrono::Duration::days(i), occupancy: 3.0 * i as f64 }).collect();
        let e = engineer_features(&rising, 3.0, DayEncoding::Six).unwrap();
        assert!(e.data.rows().iter().all(|r| (r.covariates[12] - 6.0).abs() < 1e-12));
        assert_eq!(e.data.row(0).covariates[6..9], [6.0, 5.0, 4.0]);
    }

    #[test]
    fn no_future_leakage() {
        let s = gen_synthetic_series(60, 1, &SyntheticSeries::default()).unwrap();
        let base = engineer_features(&s, 3.0, DayEncoding::Six).unwrap();
        let mut shifted = s.clone();
        for r in shifted.iter_mut().skip(40) {
            r.occupancy += 500.0;
        }
        let moved = engineer_features(&shifted, 3.0, DayEncoding::Six).unwrap();
        for k in 0..base.data.len() {
            if base.data.row(k).time <= 40.0 {
                assert_eq!(base.data.row(k).covariates, moved.data.row(k).covariates);
            }
        }
    }

    #[test]
    fn row_accounting() {
        let s = gen_synthetic_series(183, 7, &SyntheticSeries::default()).unwrap();
        let e = engineer_features(&s, 3.0, DayEncoding::Six).unwrap();
        assert_eq!(e.data.len(), 175);
        assert_eq!(training_rows(175, 0.7), 119);
    }

    #[test]
    fn synthetic_shape() {
        let p = SyntheticSeries { noise_sd: 0.0, ..SyntheticSeries::default() };
        let s = gen_synthetic_series(70, 3, &p).unwrap();
        for (i, r) in s.iter().enumerate().skip(7) {
            assert!((r.occupancy - s[i - 7].occupancy - 7.0 * p.trend).abs() < 1e-9);
        }
        let noisy = gen_synthetic_series(364, 3, &SyntheticSeries::default()).unwrap();
        let x: Vec<f64> = noisy.iter().enumerate().map(|(i, r)| r.occupancy - 0.05 * i as f64).collect();
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let ac = |lag: usize| (lag..x.len()).map(|i| (x[i] - m) * (x[i - lag] - m)).sum::<f64>();
        assert!(ac(7) > ac(3));
        assert!(gen_synthetic_series(10, 0, &p).is_err());
    }

    #[test]
    fn mapd_examples() {
        assert_eq!(mapd(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((mapd(&[1.02, 2.04], &[1.0, 2.0]).unwrap() - 2.0).abs() < 1e-9);
        assert!(mapd(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn small_pipeline_run() {
        let s = gen_synthetic_series(77, 5, &SyntheticSeries::default()).unwrap();
        let e = engineer_features(&s, 3.0, DayEncoding::Six).unwrap();
        let mut cfg = EmpiricalConfig::staffing_default(DayEncoding::Six);
        cfg.candidates = vec![cfg.candidates[0].clone(), cfg.candidates[2].clone(), cfg.candidates[3].clone()];
        let r = run_empirical(&e.data, &cfg).unwrap();
        assert_eq!(r.train_rows + r.test_rows, e.data.len());
        assert!(r.last_train_time < r.first_test_time);
        assert!(r.per_candidate_cv_cost.iter().all(|&c| r.cv_cost <= c));
        assert_eq!(r.policies.len(), 4);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("policy,p25,median,p75,mean,mapd\neto_poly1,"));
        let rows = subset_sweep(&e.data, &cfg, &[vec![0, 2]]).unwrap();
        assert_eq!(rows[0].subset, "Q1+Q3");
    }
}
