//! The `fragility` command line.
//!
//! Exit codes: 0 success, 1 I/O or format failure, 2 usage error or missing
//! input, 3 infeasible imputation, 4 collinear controls, 5 estimation window
//! or index problems, 6 sample too small, 7 decay curve not identified,
//! 8 bootstrap unstable, 9 any other analysis failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, ScenarioFile};
use crate::econometrics::{self, DecayOptions, TREND};
use crate::error::{Axis, Error, Result};
use crate::graph::{self, ExposurePanel, ExposureRecord, GraphSpec, Institution, Normalization, Quarter, WeightedGraph};
use crate::imputer::{self, ImputationProblem};
use crate::io::{self, Mask, SpectrumRecord, StatsRow};
use crate::policy::{self, CapitalPolicy, PolicyConfig};
use crate::rng::sub_seed;
use crate::spectral::{self, LanczosOptions};
use crate::synthgen::{self, CrisisPanelSpec, DecaySpec, ExposurePanelSpec};

#[derive(Debug, Parser)]
#[command(name = "fragility", version, about = "Spectral fragility analysis of exposure networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic input set: institutions, exposures, mask, panel,
    /// institution outcomes, decay pairs, a shock scenario and policies.
    Generate(GenerateArgs),
    /// Complete partially observed exposures by maximum-entropy balancing.
    Impute(ImputeArgs),
    /// Per-quarter algebraic connectivity, Fiedler vectors and network statistics.
    Spectrum(SpectrumArgs),
    /// Damped diffusion of a shock scenario.
    Stress(StressArgs),
    /// Run one of the treatment-effect or decay estimators.
    Estimate(EstimateArgs),
    /// Capital policy counterfactuals and resolution ranking.
    Policy(PolicyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub exposures: PathBuf,
    #[arg(long)]
    pub institutions: Option<PathBuf>,
    #[arg(long, default_value = "geometric_mean")]
    pub normalization: Normalization,
    /// Keep exposures at or above this quantile (0.9 keeps the top 10%).
    #[arg(long)]
    pub threshold_quantile: Option<f64>,
}

impl NetworkArgs {
    fn spec(&self) -> GraphSpec {
        GraphSpec { normalization: self.normalization, threshold_quantile: self.threshold_quantile }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 30)]
    pub banks: usize,
    #[arg(long, default_value_t = 4)]
    pub quarters: usize,
    #[arg(long, default_value_t = 0.25)]
    pub density: f64,
    /// Share of exposure records left out of the mask.
    #[arg(long, default_value_t = 0.5)]
    pub mask_fraction: f64,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub exposures: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub institutions: Option<PathBuf>,
    /// Reported totals `quarter,id,out_total,in_total` that replace the row
    /// and column sums of the exposure file for the listed institutions.
    #[arg(long)]
    pub marginals: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub network: NetworkArgs,
}

#[derive(Debug, Args)]
pub struct StressArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Quarter to analyse; defaults to the latest.
    #[arg(long, value_parser = quarter_arg)]
    pub quarter: Option<Quarter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Did,
    Event,
    Pretrends,
    Placebo,
    Decay,
    Naive,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(value_enum)]
    pub estimator: Estimator,
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Institution outcomes `quarter,id,outcome` for the naive comparator.
    #[arg(long)]
    pub outcomes: Option<PathBuf>,
    /// Pair observations `distance_km,network_distance,delta_outcome`.
    #[arg(long)]
    pub decay: Option<PathBuf>,
    #[arg(long, value_parser = quarter_arg, default_value = "2008Q3")]
    pub crisis_quarter: Quarter,
    /// Controls to include; defaults to every panel control plus `trend`.
    /// Pass an empty string for none.
    #[arg(long, value_delimiter = ',')]
    pub controls: Option<Vec<String>>,
    #[arg(long, default_value_t = 499)]
    pub reps: usize,
    /// Event years before and after the crisis.
    #[arg(long, value_delimiter = ',', default_values_t = [3, 3], allow_negative_numbers = true)]
    pub window: Vec<i32>,
    /// Pre-crisis lead quarters tested for pre-trends.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    pub leads: Vec<i32>,
    /// Placebo break dates; defaults to one and two years either side.
    #[arg(long, value_delimiter = ',', value_parser = quarter_arg)]
    pub dates: Option<Vec<Quarter>>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, value_parser = quarter_arg)]
    pub quarter: Option<Quarter>,
}

fn quarter_arg(s: &str) -> std::result::Result<Quarter, String> {
    io::parse_quarter(s).map_err(|e| e.to_string())
}

/// Process exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        Error::NotFound(_) | Error::InvalidInput(_) | Error::Param(_) => 2,
        Error::Infeasible { .. } => 3,
        Error::CollinearControls(_) => 4,
        Error::Window(_) | Error::Index(_) | Error::MissingYear(_) => 5,
        Error::SampleTooSmall(_) => 6,
        Error::Identification(_) => 7,
        Error::BootstrapUnstable { .. } => 8,
        _ => 9,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", usage_for(&cli.command));
            2
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("FRAGILITY_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("FRAGILITY_THREADS={v:?} is not a thread count"))?;
    if n == 0 {
        return Err("FRAGILITY_THREADS must be at least 1".into());
    }
    // a pool may already exist when run() is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn usage_for(command: &Command) -> String {
    let name = match command {
        Command::Generate(_) => "generate",
        Command::Impute(_) => "impute",
        Command::Spectrum(_) => "spectrum",
        Command::Stress(_) => "stress",
        Command::Estimate(_) => "estimate",
        Command::Policy(_) => "policy",
    };
    let mut cmd = Cli::command();
    let sub = cmd.find_subcommand_mut(name).expect("subcommand exists");
    sub.render_usage().to_string()
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn require(path: &Path, what: &str) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what} file {} not found", path.display())))
    }
}

fn out_dir(common: &Common) -> Result<&Path> {
    std::fs::create_dir_all(&common.out)?;
    Ok(&common.out)
}

fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Impute(a) => cmd_impute(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Stress(a) => cmd_stress(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Policy(a) => cmd_policy(a),
    }
}

fn cmd_generate(a: &GenerateArgs) -> CmdResult {
    let out = out_dir(&a.common)?;
    let seed = a.common.seed;

    let spec = ExposurePanelSpec {
        n_institutions: a.banks,
        start: Quarter::from_year_quarter(2007, 1),
        n_quarters: a.quarters,
        density: a.density,
        seed: sub_seed(seed, 0),
    };
    let (institutions, records) = synthgen::exposure_panel(&spec)?;
    let observed = synthgen::mask_records(&records, a.mask_fraction, sub_seed(seed, 1));
    let mask: Mask = records
        .iter()
        .zip(&observed)
        .filter(|(_, &o)| o)
        .map(|(r, _)| (r.quarter, r.lender.clone(), r.borrower.clone()))
        .collect();
    io::write_institutions(&out.join("institutions.csv"), &institutions)?;
    io::write_exposures(&out.join("exposures.csv"), &records)?;
    io::write_mask(&out.join("mask.csv"), &mask)?;

    let crisis = synthgen::crisis_panel(&CrisisPanelSpec {
        spillover_per_link: 700.0,
        seed: sub_seed(seed, 2),
        ..Default::default()
    })?;
    io::write_panel(&out.join("panel.csv"), &crisis.panel)?;
    io::write_outcomes(&out.join("outcomes.csv"), &crisis.panel.quarters, &crisis.institutions)?;

    let decay = synthgen::decay_dataset(&DecaySpec {
        kappa: 0.043,
        alpha: 0.0,
        beta: 100.0,
        gamma_net: 2.0,
        n_pairs: 400,
        distance_range: (1.0, 5000.0),
        noise_sigma: 1.0,
        seed: sub_seed(seed, 3),
    })?;
    io::write_decay(&out.join("decay.csv"), &decay)?;

    let scenario = ScenarioFile {
        shocks: institutions
            .iter()
            .take(3)
            .map(|i| dynamics::NodeShock { node_id: i.id.clone(), magnitude: 1.0 })
            .collect(),
        damping: ScenarioFile::CALIBRATED_DAMPING,
        horizon: 50.0,
        dt: 1.0,
    };
    io::write_json(&out.join("scenario.json"), &scenario)?;

    let policy = |mode: &str, alpha: f64, top_m: Option<usize>| PolicyConfig {
        mode: mode.into(),
        k0: CapitalPolicy::DEFAULT_K0,
        alpha,
        top_m,
        leverage_threshold: None,
    };
    let mut policies: Vec<PolicyConfig> =
        [0.05, 0.10, 0.15, 0.20].iter().map(|&al| policy("network_targeted", al, None)).collect();
    policies.push(policy("size_based", 0.10, Some(5)));
    policies.push(policy("leverage_based", 0.10, None));
    policies.push(policy("uniform", 0.02, None));
    io::write_json(&out.join("policy.json"), &policies)?;
    Ok(())
}

/// Institution ids from the metadata file, or else every id in the records,
/// sorted.
fn node_universe(records: &[ExposureRecord], institutions: Option<&[Institution]>) -> Vec<String> {
    match institutions {
        Some(meta) => meta.iter().map(|m| m.id.clone()).collect(),
        None => {
            let ids: std::collections::BTreeSet<&String> =
                records.iter().flat_map(|r| [&r.lender, &r.borrower]).collect();
            ids.into_iter().cloned().collect()
        }
    }
}

fn load_institutions(path: Option<&PathBuf>) -> std::result::Result<Option<Vec<Institution>>, Failure> {
    match path {
        Some(p) => {
            require(p, "institutions")?;
            Ok(Some(io::read_institutions(p)?))
        }
        None => Ok(None),
    }
}

#[derive(Serialize)]
struct ImputationReport {
    quarter: String,
    n: usize,
    observed_cells: usize,
    imputed_cells: usize,
    iterations: usize,
    max_marginal_deviation: f64,
    converged: bool,
}

fn cmd_impute(a: &ImputeArgs) -> CmdResult {
    require(&a.exposures, "exposures")?;
    require(&a.mask, "mask")?;
    let meta = load_institutions(a.institutions.as_ref())?;
    let records = io::read_exposures(&a.exposures)?;
    let mask = io::read_mask(&a.mask)?;
    let marginals = match &a.marginals {
        Some(p) => {
            require(p, "marginals")?;
            io::read_marginals(p)?
        }
        None => Vec::new(),
    };
    let out = out_dir(&a.common)?;

    let ids = node_universe(&records, meta.as_deref());
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let n = ids.len();
    let locate = |id: &str| index.get(id).copied().ok_or_else(|| Error::NotFound(format!("institution {id}")));

    let mut by_quarter: BTreeMap<Quarter, Vec<&ExposureRecord>> = BTreeMap::new();
    for r in &records {
        by_quarter.entry(r.quarter).or_default().push(r);
    }

    let mut completed = Vec::new();
    let mut reports = Vec::new();
    for (&q, recs) in &by_quarter {
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        let mut known: BTreeMap<(usize, usize), &ExposureRecord> = BTreeMap::new();
        for r in recs {
            let (i, j) = (locate(&r.lender)?, locate(&r.borrower)?);
            rows[i] += r.total();
            cols[j] += r.total();
            if known.insert((i, j), r).is_some() {
                return Err(Error::InvalidInput(format!("duplicate record {} -> {} in {q}", r.lender, r.borrower)).into());
            }
        }
        for m in marginals.iter().filter(|m| m.quarter == q) {
            let i = locate(&m.id)?;
            rows[i] = m.out_total;
            cols[i] = m.in_total;
        }
        let mut observed = Vec::new();
        for (mq, lender, borrower) in mask.range((q, String::new(), String::new())..) {
            if *mq != q {
                break;
            }
            let (i, j) = (locate(lender)?, locate(borrower)?);
            observed.push((i, j, known.get(&(i, j)).map_or(0.0, |r| r.total())));
        }
        let n_observed = observed.len();
        let problem = ImputationProblem {
            tolerance: a.tolerance,
            max_iterations: a.max_iterations,
            ..ImputationProblem::new(rows, cols).with_observed(observed.clone())
        };
        let result = imputer::ras_impute(&problem).map_err(|e| match e {
            Error::Infeasible { axis, index, required, target } => {
                let role = if axis == Axis::Row { "lender" } else { "borrower" };
                eprintln!(
                    "infeasible imputation in {q}: {axis} {} ({role}) has observed exposures of {required} but a total of {target}",
                    ids[index]
                );
                e
            }
            other => other,
        })?;
        if !result.converged {
            eprintln!("warning: imputation for {q} stopped at deviation {:e}", result.max_marginal_deviation);
        }
        let pinned: std::collections::BTreeSet<(usize, usize)> = observed.iter().map(|&(i, j, _)| (i, j)).collect();
        let mut imputed_cells = 0;
        for i in 0..n {
            for j in 0..n {
                if pinned.contains(&(i, j)) {
                    if let Some(r) = known.get(&(i, j)) {
                        completed.push((*r).clone());
                    }
                    continue;
                }
                let v = result.matrix[(i, j)];
                if v > 0.0 {
                    imputed_cells += 1;
                    completed.push(ExposureRecord {
                        quarter: q,
                        lender: ids[i].clone(),
                        borrower: ids[j].clone(),
                        loans: v,
                        securities: 0.0,
                        derivatives: 0.0,
                        guarantees: 0.0,
                        observed: false,
                    });
                }
            }
        }
        reports.push(ImputationReport {
            quarter: q.to_string(),
            n,
            observed_cells: n_observed,
            imputed_cells,
            iterations: result.iterations,
            max_marginal_deviation: result.max_marginal_deviation,
            converged: result.converged,
        });
    }
    io::write_exposures(&out.join("imputed_exposures.csv"), &completed)?;
    io::write_json(&out.join("imputation.json"), &reports)?;
    Ok(())
}

/// Exposure panel plus metadata; placeholder metadata when none was given.
struct Network {
    panel: ExposurePanel,
    has_meta: bool,
}

impl Network {
    fn load(args: &NetworkArgs) -> std::result::Result<Self, Failure> {
        require(&args.exposures, "exposures")?;
        let meta = load_institutions(args.institutions.as_ref())?;
        let records = io::read_exposures(&args.exposures)?;
        let has_meta = meta.is_some();
        let institutions = match meta {
            Some(m) => m,
            None => node_universe(&records, None)
                .into_iter()
                .map(|id| Institution {
                    name: id.clone(),
                    id,
                    country: String::new(),
                    assets: 1.0,
                    equity: 1.0,
                    lat: None,
                    lon: None,
                })
                .collect(),
        };
        Ok(Self { panel: ExposurePanel::new(institutions, records)?, has_meta })
    }

    fn graph(&self, q: Quarter, spec: &GraphSpec) -> Result<WeightedGraph> {
        let mut m = graph::aggregate_exposures(&self.panel, q)?;
        if !self.has_meta {
            m.assets = None;
        }
        graph::build_graph(&m, spec)
    }

    fn meta(&self) -> &[Institution] {
        if self.has_meta {
            self.panel.institutions()
        } else {
            &[]
        }
    }

    fn pick_quarter(&self, q: Option<Quarter>) -> Result<Quarter> {
        match q {
            Some(q) if self.panel.quarters().contains(&q) => Ok(q),
            Some(q) => Err(Error::NotFound(format!("quarter {q} not in exposures"))),
            None => self.panel.quarters().last().copied().ok_or_else(|| Error::InvalidInput("no exposure records".into())),
        }
    }
}

fn cmd_spectrum(a: &SpectrumArgs) -> CmdResult {
    let net = Network::load(&a.network)?;
    let out = out_dir(&a.common)?;
    let spec = a.network.spec();
    let opts = LanczosOptions { seed: sub_seed(a.common.seed, 0), ..Default::default() };

    let results: Vec<(Quarter, Result<(SpectrumRecord, StatsRow)>)> = net
        .panel
        .quarters()
        .par_iter()
        .map(|&q| {
            let run = || -> Result<(SpectrumRecord, StatsRow)> {
                let g = net.graph(q, &spec)?;
                let s = spectral::lambda2_lanczos(&g, &opts)?;
                let mut stats = graph::compute_stats(&g, net.meta())?;
                stats.lambda2 = s.lambda2;
                let mut flags = Vec::new();
                if s.disconnected {
                    flags.push("disconnected".to_string());
                }
                if !g.diagnostics().dropped.is_empty() {
                    flags.push(format!("dropped={}", g.diagnostics().dropped.len()));
                }
                Ok((SpectrumRecord::new(q, &s), StatsRow::from_stats(q, &stats, flags.join(";"))))
            };
            (q, run())
        })
        .collect();

    let mut spectra = Vec::new();
    let mut rows = Vec::new();
    for (q, r) in results {
        match r {
            Ok((s, row)) => {
                if !row.flags.is_empty() {
                    eprintln!("warning: {q}: {}", row.flags);
                }
                spectra.push(s);
                rows.push(row);
            }
            Err(e @ (Error::DegenerateNetwork(_) | Error::SolverFailure(_))) => {
                eprintln!("warning: {q}: {e}");
                rows.push(StatsRow::failed(q, format!("degenerate: {e}")));
            }
            Err(e) => return Err(e.into()),
        }
    }
    io::write_json(&out.join("spectrum.json"), &spectra)?;
    io::write_stats(&out.join("stats.csv"), &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct NodeStress {
    node_id: String,
    stress: f64,
}

#[derive(Serialize)]
struct StressReport {
    quarter: String,
    lambda2: f64,
    mixing_time: Option<f64>,
    damping: f64,
    amplification_factor: f64,
    equilibrium: Vec<NodeStress>,
}

fn cmd_stress(a: &StressArgs) -> CmdResult {
    require(&a.scenario, "scenario")?;
    let net = Network::load(&a.network)?;
    let scenario_file = io::read_scenario(&a.scenario)?;
    let out = out_dir(&a.common)?;
    let q = net.pick_quarter(a.quarter)?;
    let g = net.graph(q, &a.network.spec())?;
    let scenario = scenario_file.resolve(g.node_ids())?;
    let lambda2 = spectral::lambda2_lanczos(&g, &LanczosOptions { seed: sub_seed(a.common.seed, 0), ..Default::default() })?.lambda2;
    let x0 = DVector::zeros(g.n());
    let traj = dynamics::stress_trajectory(&g, &scenario, &x0)?;
    let xstar = dynamics::equilibrium_stress(&g, &scenario)?;
    let report = StressReport {
        quarter: q.to_string(),
        lambda2,
        mixing_time: spectral::mixing_time(lambda2).ok(),
        damping: scenario.damping,
        amplification_factor: dynamics::amplification_factor(&g, &scenario)?,
        equilibrium: g
            .node_ids()
            .iter()
            .zip(xstar.iter())
            .map(|(id, &s)| NodeStress { node_id: id.clone(), stress: s })
            .collect(),
    };
    io::write_trajectory(&out.join("trajectory.csv"), g.node_ids(), &traj)?;
    io::write_json(&out.join("stress.json"), &report)?;
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> CmdResult {
    let seed = a.common.seed;
    let load_panel = || -> std::result::Result<econometrics::PanelSeries, Failure> {
        let path = a.panel.as_ref().ok_or_else(|| Failure::Usage("--panel is required".into()))?;
        require(path, "panel")?;
        Ok(io::read_panel(path, a.crisis_quarter)?)
    };
    let controls = |panel: &econometrics::PanelSeries| -> Vec<String> {
        match &a.controls {
            Some(list) => list.iter().filter(|s| !s.is_empty()).cloned().collect(),
            None => panel.controls.iter().map(|(n, _)| n.clone()).chain([TREND.to_string()]).collect(),
        }
    };

    let (name, value): (&str, serde_json::Value) = match a.estimator {
        Estimator::Did => {
            let p = load_panel()?;
            ("did", serde_json::to_value(econometrics::spatial_did(&p, &controls(&p), a.reps, seed)?).map_err(Error::from)?)
        }
        Estimator::Event => {
            let p = load_panel()?;
            let [pre, post] = a.window[..] else {
                return Err(Failure::Usage("--window takes two values, e.g. 3,3".into()));
            };
            let window = (pre, post);
            ("event", serde_json::to_value(econometrics::event_study(&p, window, &controls(&p), a.reps, seed)?).map_err(Error::from)?)
        }
        Estimator::Pretrends => {
            let p = load_panel()?;
            let r = econometrics::pretrends_test(&p, &a.leads, &controls(&p), a.reps, seed)?;
            ("pretrends", serde_json::to_value(r).map_err(Error::from)?)
        }
        Estimator::Placebo => {
            let p = load_panel()?;
            let c = a.crisis_quarter;
            let dates = a.dates.clone().unwrap_or_else(|| vec![c.offset(-8), c.offset(-4), c.offset(4), c.offset(8)]);
            let r = econometrics::placebo_test(&p, &dates, &controls(&p), a.reps, seed)?;
            ("placebo", serde_json::to_value(r).map_err(Error::from)?)
        }
        Estimator::Decay => {
            let path = a.decay.as_ref().ok_or_else(|| Failure::Usage("--decay is required".into()))?;
            require(path, "decay")?;
            let obs = io::read_decay(path)?;
            let opts = DecayOptions { bootstrap_reps: a.reps, seed, ..Default::default() };
            ("decay", serde_json::to_value(econometrics::fit_spatial_decay(&obs, &opts)?).map_err(Error::from)?)
        }
        Estimator::Naive => {
            let path = a.outcomes.as_ref().ok_or_else(|| Failure::Usage("--outcomes is required".into()))?;
            require(path, "outcomes")?;
            let (quarters, series) = io::read_outcomes(path)?;
            let r = econometrics::naive_did(&quarters, &series, a.crisis_quarter, a.reps, seed)?;
            ("naive", serde_json::to_value(r).map_err(Error::from)?)
        }
    };
    let out = out_dir(&a.common)?;
    io::write_json(&out.join(format!("estimate_{name}.json")), &value)?;
    Ok(())
}

#[derive(Serialize)]
struct OutcomeRow {
    scenario: String,
    mode: String,
    alpha: f64,
    avg_requirement_pct: f64,
    std_requirement_pct: f64,
    lambda2: f64,
    reduction_pct: f64,
    banks_affected: usize,
}

#[derive(Serialize)]
struct RankingRow {
    rank: usize,
    id: String,
    assets_trillions: f64,
    fiedler_centrality: f64,
    resolution_impact: f64,
    lambda2_before: f64,
    lambda2_after: f64,
    reduction_pct: f64,
    disconnects: bool,
}

fn mean_sd_pct(k: &[f64]) -> (f64, f64) {
    let n = k.len() as f64;
    let mean = k.iter().sum::<f64>() / n;
    let var = k.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (100.0 * mean, 100.0 * var.sqrt())
}

fn cmd_policy(a: &PolicyArgs) -> CmdResult {
    require(&a.policy, "policy")?;
    if a.network.institutions.is_none() {
        return Err(Failure::Usage("--institutions is required for capital policies".into()));
    }
    let net = Network::load(&a.network)?;
    let configs = io::read_policies(&a.policy)?;
    let policies = configs.iter().map(CapitalPolicy::try_from).collect::<Result<Vec<_>>>()?;
    let out = out_dir(&a.common)?;
    let q = net.pick_quarter(a.quarter)?;
    let g = net.graph(q, &a.network.spec())?;
    let spectrum = spectral::lambda2_lanczos(&g, &LanczosOptions { seed: sub_seed(a.common.seed, 0), ..Default::default() })?;
    let meta = net.meta();

    let outcomes = policies
        .par_iter()
        .map(|p| policy::apply_capital_policy(&g, meta, &spectrum, p))
        .collect::<Result<Vec<_>>>()?;
    let k0 = CapitalPolicy::DEFAULT_K0;
    let mut rows = vec![OutcomeRow {
        scenario: format!("baseline (uniform {k0})"),
        mode: "baseline".into(),
        alpha: 0.0,
        avg_requirement_pct: 100.0 * k0,
        std_requirement_pct: 0.0,
        lambda2: spectrum.lambda2,
        reduction_pct: 0.0,
        banks_affected: 0,
    }];
    for (o, p) in outcomes.iter().zip(&policies) {
        let (avg, sd) = mean_sd_pct(&o.requirements);
        rows.push(OutcomeRow {
            scenario: format!("{} (alpha = {})", o.mode, p.alpha),
            mode: o.mode.clone(),
            alpha: o.alpha,
            avg_requirement_pct: avg,
            std_requirement_pct: sd,
            lambda2: o.lambda2_after,
            reduction_pct: o.reduction_pct,
            banks_affected: o.banks_affected,
        });
    }

    let ranking = policy::resolution_ranking(&g, &spectrum)?;
    let assets: BTreeMap<&str, f64> = meta.iter().map(|m| (m.id.as_str(), m.assets / 1000.0)).collect();
    let ranking_rows: Vec<RankingRow> = ranking
        .into_iter()
        .enumerate()
        .map(|(k, e)| RankingRow {
            rank: k + 1,
            assets_trillions: assets.get(e.id.as_str()).copied().unwrap_or(f64::NAN),
            fiedler_centrality: e.centrality.sqrt(),
            resolution_impact: e.centrality,
            lambda2_before: spectrum.lambda2,
            lambda2_after: e.lambda2_without,
            reduction_pct: e.reduction_pct,
            disconnects: e.disconnects,
            id: e.id,
        })
        .collect();

    let mut w = csv::Writer::from_path(out.join("policy_outcomes.csv")).map_err(Error::from)?;
    for r in &rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    let mut w = csv::Writer::from_path(out.join("ranking.csv")).map_err(Error::from)?;
    for r in &ranking_rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}
