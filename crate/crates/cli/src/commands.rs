//! Subcommands and their CSV reports.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use layercake::channel::QuantumChannel;
use layercake::info::{augustin_info, exponent_curve, AugustinOptions, InfoKind, RenyiOrder};
use layercake::measure::{c1, c2, c_alpha, c_alpha_sup};
use layercake::packing::{
    constrained_random_coding, cq_random_coding, cqsw_exponent, cqsw_random_binning, ea_position_coding,
    unassisted_bound, CqswKind, SimConfig, SimMode, SimResult,
};
use layercake::{BipartiteState, CqEnsemble, RngSeed};

use crate::grid::{parse_grid, parse_list};
use crate::instance::{Instance, InstanceError, InstanceFile};
use crate::report::{real, sha256_hex, CsvReport, Provenance, ReportError};
use crate::suites::{self, Suite, VerifyConfig};
use crate::EXIT_VIOLATION;

#[derive(Debug, Parser)]
#[command(name = "layercake", version, about = "Layer-cake calculus, integral PGMs and one-shot packing bounds")]
pub struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Calculus,
    Inequalities,
    Bounds,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExponentTask {
    Cq,
    Cc,
    Cqsw,
    Ea,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CqswArg {
    Iid,
    Cc,
    Variable,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimTask {
    Cq,
    Constrained,
    Cqsw,
    Ea,
    Unassisted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Enumerate,
    Montecarlo,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded property suites; exit 2 on any violation.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma list of dimensions to draw from.
        #[arg(long, default_value = "2,3,4")]
        dims: String,
    },
    /// Tabulate c1, c2 and c = min(c1, c2) with the supremum row.
    Constants {
        #[arg(long, default_value = "0.5:1:0.005")]
        alpha_grid: String,
    },
    /// Error-exponent curve E(R) with the maximizing order.
    Exponent {
        #[arg(long, value_enum)]
        task: ExponentTask,
        #[arg(long)]
        input: PathBuf,
        /// Comma list or start:stop:step.
        #[arg(long)]
        rates: String,
        #[arg(long, value_enum, default_value = "iid")]
        cqsw_kind: CqswArg,
        /// Quantum channel applied to the second factor of an `ea` input.
        #[arg(long)]
        channel: Option<PathBuf>,
    },
    /// Exact or Monte-Carlo random-coding error against its one-shot bound.
    Simulate {
        #[arg(long, value_enum)]
        task: SimTask,
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "M")]
        m: usize,
        /// One order, a comma list or start:stop:step within [1/2, 1].
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, value_enum, default_value = "enumerate")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constraint letters for `constrained`, comma separated.
        #[arg(long)]
        subset: Option<String>,
        /// Quantum channel for `ea` and `unassisted` (default: identity).
        #[arg(long)]
        channel: Option<PathBuf>,
    },
    /// Augustin information and mean by fixed-point iteration.
    Augustin {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Instance { path: PathBuf, source: InstanceError },
    #[error(transparent)]
    Library(#[from] layercake::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(layercake::Error::DidNotConverge { .. }) => EXIT_VIOLATION,
            _ => crate::EXIT_USAGE,
        }
    }
}

pub struct Done {
    pub csv: String,
    pub violated: bool,
    /// One-line human summary for stderr.
    pub summary: Option<String>,
}

struct Loaded {
    instance: Instance,
    hash: String,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let hash = sha256_hex(&bytes);
    let inst = |source| CliError::Instance { path: path.to_owned(), source };
    let text = String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("{}: not UTF-8: {e}", path.display())))?;
    let instance = InstanceFile::parse(&text).map_err(inst)?.decode().map_err(inst)?;
    Ok(Loaded { instance, hash })
}

fn usage(e: String) -> CliError {
    CliError::Usage(e)
}

fn in_path<T>(path: &Path, r: Result<T, InstanceError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Instance { path: path.to_owned(), source })
}

pub fn execute(cli: &Cli) -> Result<Done, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command))
}

fn dispatch(cmd: &Command) -> Result<Done, CliError> {
    match cmd {
        Command::Verify { suite, seed, trials, dims } => verify(*suite, *seed, *trials, dims),
        Command::Constants { alpha_grid } => constants(alpha_grid),
        Command::Exponent { task, input, rates, cqsw_kind, channel } => {
            exponent(*task, input, rates, *cqsw_kind, channel.as_deref())
        }
        Command::Simulate { task, input, m, alpha, mode, samples, seed, subset, channel } => simulate(&SimArgs {
            task: *task,
            input,
            m: *m,
            alpha,
            mode: *mode,
            samples: *samples,
            seed: *seed,
            subset: subset.as_deref(),
            channel: channel.as_deref(),
        }),
        Command::Augustin { input, alpha, tol, max_iter } => augustin(input, *alpha, *tol, *max_iter),
    }
}

fn verify(suite: SuiteArg, seed: u64, trials: usize, dims: &str) -> Result<Done, CliError> {
    let dims = parse_list(dims).map_err(usage)?;
    let suite = match suite {
        SuiteArg::Calculus => Suite::Calculus,
        SuiteArg::Inequalities => Suite::Inequalities,
        SuiteArg::Bounds => Suite::Bounds,
        SuiteArg::All => Suite::All,
    };
    let cfg = VerifyConfig { seed: RngSeed(seed), trials, dims };
    let results = suites::run(suite, &cfg).map_err(|e| match e {
        layercake::Error::InvalidInput(m) => CliError::Usage(m),
        other => CliError::Library(other),
    })?;
    let mut report = CsvReport::new(&["suite", "property", "evaluations", "violations", "worst_margin"]);
    let mut violations = 0;
    for r in &results {
        violations += r.violations;
        report.push(vec![
            r.suite.into(),
            r.name.into(),
            r.evaluations.to_string(),
            r.violations.to_string(),
            real(r.worst_margin),
        ])?;
    }
    let csv = report.render(&Provenance { seed: Some(seed), inputs: Vec::new() })?;
    Ok(Done {
        csv,
        violated: violations > 0,
        summary: Some(format!("{} properties, {violations} violations", results.len())),
    })
}

fn constants(grid: &str) -> Result<Done, CliError> {
    let grid = parse_grid(grid).map_err(usage)?;
    if grid.iter().any(|a| !(0.5..=1.0).contains(a)) {
        return Err(usage("alpha grid must lie in [0.5, 1]".into()));
    }
    let mut report = CsvReport::new(&["kind", "alpha", "c1", "c2", "c"]);
    for &a in &grid {
        report.push(vec!["grid".into(), real(a), real(c1(a)), real(c2(a)), real(c_alpha(a))])?;
    }
    let (arg, sup) = c_alpha_sup();
    report.push(vec!["sup".into(), real(arg), real(c1(arg)), real(c2(arg)), real(sup)])?;
    Ok(Done { csv: report.render(&Provenance::default())?, violated: false, summary: None })
}

fn apply_channel(state: BipartiteState, channel: Option<&Path>) -> Result<(BipartiteState, Option<String>), CliError> {
    match channel {
        None => Ok((state, None)),
        Some(path) => {
            let loaded = load(path)?;
            let ch = in_path(path, loaded.instance.into_quantum_channel())?;
            Ok((ch.apply_to_second(&state)?, Some(loaded.hash)))
        }
    }
}

fn exponent(
    task: ExponentTask,
    input: &Path,
    rates: &str,
    kind: CqswArg,
    channel: Option<&Path>,
) -> Result<Done, CliError> {
    let rates = parse_grid(rates).map_err(usage)?;
    let loaded = load(input)?;
    let mut prov = Provenance { seed: None, inputs: vec![("input".into(), loaded.hash.clone())] };
    let opts = AugustinOptions::default();
    let curve = match task {
        ExponentTask::Cq | ExponentTask::Cc => {
            let ens = in_path(input, loaded.instance.into_ensemble())?;
            let kind = match task {
                ExponentTask::Cq => InfoKind::Sibson(&ens),
                _ => InfoKind::Augustin(&ens, opts),
            };
            exponent_curve(&kind, &rates)?
        }
        ExponentTask::Cqsw => {
            let ens = in_path(input, loaded.instance.into_ensemble())?;
            let k = match kind {
                CqswArg::Iid => CqswKind::Iid,
                CqswArg::Cc => CqswKind::ConstantComposition,
                CqswArg::Variable => CqswKind::VariableLength,
            };
            cqsw_exponent(k, &ens, &rates, &opts)?
        }
        ExponentTask::Ea => {
            let state = in_path(input, loaded.instance.into_bipartite())?;
            let (state, hash) = apply_channel(state, channel)?;
            if let Some(h) = hash {
                prov.inputs.push(("channel".into(), h));
            }
            exponent_curve(&InfoKind::Ea(&state), &rates)?
        }
    };
    let mut report = CsvReport::new(&["rate", "exponent", "alpha_star"]);
    for ((r, e), a) in curve.rates.iter().zip(&curve.values).zip(&curve.alphas) {
        report.push(vec![real(*r), real(*e), real(*a)])?;
    }
    Ok(Done { csv: report.render(&prov)?, violated: false, summary: None })
}

struct SimArgs<'a> {
    task: SimTask,
    input: &'a Path,
    m: usize,
    alpha: &'a str,
    mode: ModeArg,
    samples: u64,
    seed: u64,
    subset: Option<&'a str>,
    channel: Option<&'a Path>,
}

fn task_name(t: SimTask) -> &'static str {
    match t {
        SimTask::Cq => "cq",
        SimTask::Constrained => "constrained",
        SimTask::Cqsw => "cqsw",
        SimTask::Ea => "ea",
        SimTask::Unassisted => "unassisted",
    }
}

fn library_or_usage(e: layercake::Error) -> CliError {
    match e {
        layercake::Error::EnumerationTooLarge { .. }
        | layercake::Error::DimensionTooLarge { .. }
        | layercake::Error::InvalidInput(_)
        | layercake::Error::EmptyConstraint => CliError::Usage(e.to_string()),
        other => CliError::Library(other),
    }
}

fn simulate(a: &SimArgs) -> Result<Done, CliError> {
    let alphas = parse_grid(a.alpha).map_err(usage)?;
    if alphas.iter().any(|x| !(0.5..=1.0).contains(x)) {
        return Err(usage("--alpha must lie in [0.5, 1]".into()));
    }
    let loaded = load(a.input)?;
    let mut prov = Provenance { seed: Some(a.seed), inputs: vec![("input".into(), loaded.hash.clone())] };
    let mode = match a.mode {
        ModeArg::Enumerate => SimMode::Enumerate,
        ModeArg::Montecarlo => SimMode::MonteCarlo { samples: a.samples },
    };
    let cfg_at = |alpha| SimConfig { m: a.m, alpha, mode, seed: RngSeed(a.seed) };
    let mut channel_for = |dim: usize| -> Result<QuantumChannel, CliError> {
        match a.channel {
            None => Ok(QuantumChannel::identity(dim)),
            Some(path) => {
                let l = load(path)?;
                prov.inputs.push(("channel".into(), l.hash));
                in_path(path, l.instance.into_quantum_channel())
            }
        }
    };

    let results: Vec<SimResult> = match a.task {
        SimTask::Cq | SimTask::Constrained | SimTask::Cqsw => {
            let ens: CqEnsemble = in_path(a.input, loaded.instance.into_ensemble())?;
            let subset = match (a.task, a.subset) {
                (SimTask::Constrained, Some(s)) => Some(parse_list(s).map_err(usage)?),
                (SimTask::Constrained, None) => return Err(usage("constrained needs --subset".into())),
                _ => None,
            };
            let opts = AugustinOptions::default();
            alphas
                .iter()
                .map(|&al| match a.task {
                    SimTask::Cq => cq_random_coding(&ens, &cfg_at(al)),
                    SimTask::Cqsw => cqsw_random_binning(&ens, &cfg_at(al)),
                    _ => constrained_random_coding(&ens, subset.as_deref().unwrap_or(&[]), &cfg_at(al), &opts),
                })
                .collect::<Result<_, _>>()
                .map_err(library_or_usage)?
        }
        SimTask::Ea => {
            let theta = in_path(a.input, loaded.instance.into_bipartite())?;
            let ch = channel_for(theta.dims().1)?;
            alphas
                .iter()
                .map(|&al| ea_position_coding(&ch, &theta, a.m, al))
                .collect::<Result<_, _>>()
                .map_err(library_or_usage)?
        }
        SimTask::Unassisted => {
            let inputs = in_path(a.input, loaded.instance.into_ensemble())?;
            let ch = channel_for(inputs.dim())?;
            alphas
                .iter()
                .map(|&al| unassisted_bound(&ch, &inputs, &cfg_at(al)).map(|(_, s)| s))
                .collect::<Result<_, _>>()
                .map_err(library_or_usage)?
        }
    };

    let mut report = CsvReport::new(&["task", "M", "alpha", "error", "std_err", "bound", "margin"]);
    let mut violated = 0;
    for (al, r) in alphas.iter().zip(&results) {
        if !r.holds() {
            violated += 1;
        }
        report.push(vec![
            task_name(a.task).into(),
            a.m.to_string(),
            real(*al),
            real(r.error_estimate),
            real(r.std_err),
            real(r.bound),
            real(r.margin()),
        ])?;
    }
    Ok(Done {
        csv: report.render(&prov)?,
        violated: violated > 0,
        summary: Some(format!("{} orders, {violated} bound violations", results.len())),
    })
}

fn augustin(input: &Path, alpha: f64, tol: f64, max_iter: usize) -> Result<Done, CliError> {
    let loaded = load(input)?;
    let ens = in_path(input, loaded.instance.into_ensemble())?;
    let order = RenyiOrder::new(alpha).map_err(|e| usage(e.to_string()))?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(usage("--tol must be positive and --max-iter at least 1".into()));
    }
    let opts = AugustinOptions { tol, max_iter, ..AugustinOptions::default() };
    let res = augustin_info(&ens, order, &opts)?;
    let eig = res.mean.eig();
    let mut header: Vec<String> = ["alpha", "value", "iterations", "residual"].iter().map(|s| s.to_string()).collect();
    header.extend((0..eig.dim()).map(|i| format!("mean_eig_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut report = CsvReport::new(&header_refs);
    let mut row = vec![real(alpha), real(res.value), res.iterations.to_string(), real(res.residual)];
    row.extend(eig.values().iter().map(|&v| real(v)));
    report.push(row)?;
    let prov = Provenance { seed: None, inputs: vec![("input".into(), loaded.hash)] };
    Ok(Done { csv: report.render(&prov)?, violated: false, summary: None })
}
