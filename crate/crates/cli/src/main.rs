mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use paa_core::analytics::{gain_curve, DemandGaussian};
use paa_core::empirical::{engineer_features, gen_synthetic_series, load_series, run_empirical, subset_sweep, SUBSET_HEADER};
use paa_core::experiments::{run_distance_improvement_study, run_feature_study, run_iid_study, write_csv_rows};
use paa_core::paa::{bound_schedule, solve_weights, BoundStyle, PolicyEvalMatrix};
use paa_core::CostParams;
use serde::Serialize;
use sha2::{Digest, Sha256};

use config::{AnalyticsSection, ConfigFile, EmpiricalSection, PaaSolveSection};

#[derive(Parser)]
#[command(name = "paa", version, about = "Policy averaging for the data-driven newsvendor")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// TOML file with one optional section per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence of the averaged policy on i.i.d. normal demand.
    SimulateIid(StudyArgs),
    /// Policy distance against relative improvement over candidate pairs.
    DistanceStudy {
        /// 1000 paths instead of the desk-scale 200.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Feature-based demand with regression, kernel ridge and neural candidates.
    SimulateFeature(StudyArgs),
    /// Nurse staffing from a daily occupancy series.
    Empirical {
        /// `date,occupancy` CSV.
        #[arg(long, conflicts_with = "synthetic")]
        input: Option<PathBuf>,
        /// Use a generated series instead of a file.
        #[arg(long)]
        synthetic: bool,
        #[arg(long, value_enum)]
        encoding: Option<Encoding>,
    },
    /// Weights for a user-supplied evaluation matrix (labels..., demand).
    PaaSolve {
        input: PathBuf,
        #[arg(long)]
        overage: Option<f64>,
        #[arg(long)]
        underage: Option<f64>,
        #[arg(long, requires = "upper")]
        lower: Option<f64>,
        #[arg(long, requires = "lower")]
        upper: Option<f64>,
    },
    /// Diversification gain of two equally good Gaussian policies across correlation.
    Analytics {
        /// Evaluate one correlation instead of the whole grid.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    replications: Option<usize>,
    /// Training sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    t: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Six,
    Seven,
}

/// Error with its exit code: 3 configuration, 4 input data, 1 run failure.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait Classify<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, err: e.into() })
    }
}

const CONFIG: u8 = 3;
const INPUT: u8 = 4;
const RUN: u8 = 1;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

struct Output {
    dir: Option<PathBuf>,
    header: String,
}

impl Output {
    fn new(dir: Option<PathBuf>, subcommand: &str, seed: u64, config: &impl Serialize) -> Result<Self, Failure> {
        let bytes = serde_json::to_vec(config).code(RUN)?;
        let hash = Sha256::digest(&bytes);
        let header = format!("# paa {} subcommand={subcommand} seed={seed} config_hash={hash:x}\n", env!("CARGO_PKG_VERSION"));
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display())).code(INPUT)?;
        }
        Ok(Self { dir, header })
    }

    /// Writes `body` behind the manifest line, to `<dir>/<name>` or stdout.
    fn emit(&self, name: &str, body: &[u8]) -> Result<(), Failure> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                let mut f = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display())).code(INPUT)?;
                f.write_all(self.header.as_bytes()).and_then(|_| f.write_all(body)).code(INPUT)?;
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(self.header.as_bytes()).and_then(|_| out.write_all(body)).code(RUN)?;
            }
        }
        Ok(())
    }

    /// JSON cannot carry a comment line, so the manifest goes into the document.
    fn emit_json(&self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let Some(d) = &self.dir else { return Ok(()) };
        #[derive(Serialize)]
        struct Doc<'a, T> {
            manifest: &'a str,
            report: &'a T,
        }
        let doc = Doc { manifest: self.header.trim_start_matches("# ").trim_end(), report: value };
        let path = d.join(name);
        let f = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display())).code(INPUT)?;
        serde_json::to_writer_pretty(f, &doc).code(INPUT)
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> paa_core::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write(&mut buf).code(RUN)?;
    Ok(buf)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Failure { code: CONFIG, err: anyhow!("--workers must be at least 1") });
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().code(RUN)?;
    }
    let file = ConfigFile::load(cli.config.as_deref()).code(CONFIG)?;
    match cli.command {
        Command::SimulateIid(args) => {
            let mut cfg = config::resolve(config::iid_preset(), file.simulate_iid, "simulate_iid").code(CONFIG)?;
            apply_study_args(&mut cfg, &args, cli.seed);
            cfg.validate().code(CONFIG)?;
            let out = Output::new(cli.out, "simulate-iid", cfg.master_seed, &cfg)?;
            let study = run_iid_study(&cfg).code(RUN)?;
            out.emit("simulate_iid.csv", &csv_bytes(|b| study.write_csv(b))?)
        }
        Command::SimulateFeature(args) => {
            let mut cfg = config::resolve(config::feature_preset(), file.simulate_feature, "simulate_feature").code(CONFIG)?;
            apply_study_args(&mut cfg, &args, cli.seed);
            cfg.validate().code(CONFIG)?;
            let out = Output::new(cli.out, "simulate-feature", cfg.master_seed, &cfg)?;
            let study = run_feature_study(&cfg).code(RUN)?;
            out.emit("simulate_feature.csv", &csv_bytes(|b| study.write_csv(b))?)
        }
        Command::DistanceStudy { full, paths } => {
            let mut cfg = config::resolve(config::distance_preset(full), file.distance_study, "distance_study").code(CONFIG)?;
            if let Some(p) = paths {
                cfg.paths = p;
            }
            if let Some(s) = cli.seed {
                cfg.master_seed = s;
            }
            let out = Output::new(cli.out, "distance-study", cfg.master_seed, &cfg)?;
            let study = run_distance_improvement_study(&cfg).code(RUN)?;
            log::info!("slope {} p {} r2 {}", study.ols.slope, study.ols.slope_p_value, study.ols.r_squared);
            out.emit("distance_study.csv", &csv_bytes(|b| study.write_csv(b))?)?;
            out.emit_json("distance_study_ols.json", &study.ols)
        }
        Command::Empirical { input, synthetic, encoding } => {
            let mut cfg = config::resolve(EmpiricalSection::default(), file.empirical, "empirical").code(CONFIG)?;
            if let Some(e) = encoding {
                cfg.encoding = match e {
                    Encoding::Six => paa_core::empirical::DayEncoding::Six,
                    Encoding::Seven => paa_core::empirical::DayEncoding::Seven,
                };
            }
            cfg.sync_encoding();
            if let Some(s) = cli.seed {
                cfg.run.seed = s;
            }
            if input.is_some() {
                cfg.input = input;
            }
            let records = if synthetic {
                cfg.input = None;
                gen_synthetic_series(cfg.days, cfg.run.seed, &cfg.synthetic).code(CONFIG)?
            } else {
                let path = cfg.input.clone().ok_or_else(|| anyhow!("empirical needs --input <csv> or --synthetic")).code(CONFIG)?;
                load_series(&path, cfg.gaps).with_context(|| format!("reading {}", path.display())).code(INPUT)?
            };
            let data = engineer_features(&records, cfg.nurse_ratio, cfg.encoding).code(INPUT)?;
            let out = Output::new(cli.out, "empirical", cfg.run.seed, &cfg)?;
            let report = run_empirical(&data.data, &cfg.run).code(RUN)?;
            out.emit("empirical.csv", &csv_bytes(|b| report.write_csv(b))?)?;
            out.emit_json("empirical.json", &report)?;
            if !cfg.subsets.is_empty() {
                let rows = subset_sweep(&data.data, &cfg.run, &cfg.subsets).code(RUN)?;
                let body = csv_bytes(|b| write_csv_rows(b, &SUBSET_HEADER, &rows))?;
                out.emit("empirical_subsets.csv", &body)?;
            }
            Ok(())
        }
        Command::PaaSolve { input, overage, underage, lower, upper } => {
            let mut cfg = config::resolve(PaaSolveSection::default(), file.paa_solve, "paa_solve").code(CONFIG)?;
            cfg.overage = overage.unwrap_or(cfg.overage);
            cfg.underage = underage.unwrap_or(cfg.underage);
            if let (Some(lower), Some(upper)) = (lower, upper) {
                cfg.bounds = BoundStyle::Fixed { lower, upper };
            }
            let matrix = read_matrix(&input).code(INPUT)?;
            let costs = CostParams::new(cfg.overage, cfg.underage).code(CONFIG)?;
            let bx = bound_schedule(matrix.num_obs().max(2), cfg.bounds).code(CONFIG)?;
            let out = Output::new(cli.out, "paa-solve", cli.seed.unwrap_or(0), &(&cfg, input.display().to_string()))?;
            let sol = solve_weights(&matrix, &costs, &bx).code(RUN)?;
            for (i, j) in &sol.near_duplicates {
                log::warn!("candidates {} and {} are near duplicates", matrix.labels()[*i], matrix.labels()[*j]);
            }
            let mut body = String::from("candidate,weight,cv_cost\n");
            for ((label, w), c) in matrix.labels().iter().zip(&sol.weights).zip(&sol.per_candidate_cv_cost) {
                body.push_str(&format!("{label},{w},{c}\n"));
            }
            body.push_str(&format!("paa,{},{}\n", sol.weights.iter().sum::<f64>(), sol.cv_cost));
            out.emit("paa_solve.csv", body.as_bytes())
        }
        Command::Analytics { rho, points } => {
            let mut cfg = config::resolve(AnalyticsSection::default(), file.analytics, "analytics").code(CONFIG)?;
            cfg.points = points.unwrap_or(cfg.points);
            let demand = DemandGaussian::new(cfg.demand_mean, cfg.demand_var).code(CONFIG)?;
            let costs = CostParams::new(cfg.overage, cfg.underage).code(CONFIG)?;
            let out = Output::new(cli.out, "analytics", cli.seed.unwrap_or(0), &(&cfg, rho))?;
            let curve = match rho {
                Some(r) => {
                    let pair = paa_core::analytics::GaussianPolicyPair::new(cfg.policy_mean, cfg.policy_mean, cfg.policy_var, r).code(CONFIG)?;
                    vec![paa_core::analytics::GainPoint {
                        rho: r,
                        gain: paa_core::analytics::diversification_gain(&pair, &demand, &costs).code(RUN)?,
                        paa_variance: pair.mixture_var(),
                    }]
                }
                None => gain_curve(cfg.policy_mean, cfg.policy_var, &demand, &costs, cfg.points).code(CONFIG)?,
            };
            out.emit("analytics.csv", &csv_bytes(|b| write_csv_rows(b, &["rho", "gain", "paa_variance"], &curve))?)
        }
    }
}

fn apply_study_args(cfg: &mut paa_core::experiments::RunConfig, args: &StudyArgs, seed: Option<u64>) {
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if !args.t.is_empty() {
        cfg.t_grid = args.t.clone();
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
}

fn read_matrix(path: &Path) -> anyhow::Result<PolicyEvalMatrix<f64>> {
    let f = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    PolicyEvalMatrix::from_csv(f).with_context(|| format!("reading {}", path.display()))
}
