//! Command-line front end. Exit codes: 0 every check passed, 1 a bound or
//! claim was violated, 2 usage, config or file-format error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use smallball_core::bounds::{esseen_bound, theorem_bound, BoundReport, TheoremKind, TheoremParams, BOUND_RTOL};
use smallball_core::chain::{make_independent_chain, spectral_lambda};
use smallball_core::prg::{
    build_mgg_expander, pad_to_multiple, prg_smallball, PrgMode, PrgProbability, PrgSpec, CERTIFY_LIMIT,
    DEFAULT_WALK_BUDGET,
};
use smallball_core::sampler::{random_unit_weights, smallball_mc};
use smallball_core::transfer::{
    char_fn, exact_sum_distribution, exact_sum_distribution_rational, find_prime, integer_step_values,
    zp_fourier_average, DEFAULT_CELL_BUDGET,
};
use smallball_core::{MarkovChain, SignSystem, WeightSystem, WeightVariant};

use crate::claims;
use crate::constants::{Constants, ESSEEN};
use crate::experiments::{self, loglog_slope, tightness_point};
use crate::formats::{
    read_bound_reports, read_chain, read_graph, read_json, read_weights, write_bound_reports, write_distribution,
    write_json, FormatError, GraphFile,
};
use crate::suite;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: field `{field}`: {message}")]
    Config { path: PathBuf, field: &'static str, message: String },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{context}: {source}")]
    Core { context: String, source: smallball_core::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

type CliResult<T> = Result<T, CliError>;

trait Context<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T>;
}

impl<T> Context<T> for smallball_core::Result<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what.into(), source })
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Violation,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "smallball", version, about = "Small-ball probabilities for Markov-chain sign sums")]
pub struct Cli {
    /// Directory whose `<name>.json` files override the committed constants.
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Weights as a file path or a generator: `all-ones`, `arange`,
/// `random-unit(d, seed)`. Generators need `--n`.
#[derive(Debug, Clone, clap::Args)]
pub struct WeightArgs {
    #[arg(long, default_value = "all-ones")]
    pub weights: String,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    HighDim,
    Scalar,
    DistinctInt,
}

impl Check {
    fn kind(self) -> TheoremKind {
        match self {
            Check::HighDim => TheoremKind::HighDim,
            Check::Scalar => TheoremKind::ScalarHalfUnit,
            Check::DistinctInt => TheoremKind::DistinctInt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbMode {
    Exact,
    Sampled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral parameter lambda of a chain file.
    SpectralGap {
        #[arg(long)]
        chain: PathBuf,
    },
    /// Exact law of the sum for integer scalar weights, as CSV.
    ExactDist {
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Exact rational probabilities instead of floats.
        #[arg(long)]
        rational: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P(||S - x0|| <= R), exactly or by sampling, optionally against a bound.
    Smallball {
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Center, comma separated for vector weights.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = ProbMode::Exact)]
        mode: ProbMode,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        check: Option<Check>,
        /// Bound-report CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Esseen bound from the characteristic function, against the exact
    /// probability when the weights are integers.
    Esseen {
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Fourier average over Z_p and the residue-class probability.
    ZpAverage {
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = 0)]
        x0: i64,
        /// Defaults to the smallest prime above twice the largest weight.
        #[arg(long)]
        prime: Option<u64>,
    },
    /// Evaluate the supporting inequalities on seeded random instances.
    VerifyClaims {
        #[arg(long, default_value_t = claims::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = suite::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refit every constant and write one JSON file per constant.
    FitConstants {
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and certify the degree-8 expander on Z_m x Z_m, m = 2^(k/2).
    PrgBuild {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Small-ball probability under expander-walk signs.
    PrgTest {
        #[arg(long, required_unless_present = "graph")]
        k: Option<u32>,
        /// Graph file from `prg-build`, instead of `--k`.
        #[arg(long, conflicts_with = "k")]
        graph: Option<PathBuf>,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = ProbMode::Exact)]
        mode: ProbMode,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append unit weights until k divides n.
        #[arg(long)]
        pad_to_multiple: bool,
    },
    /// P(S = 0) for the two-state chain over a (lambda, n) grid, with the
    /// log-log slope per lambda.
    Tightness {
        #[arg(long, value_delimiter = ',', default_value = "0,0.3,0.6")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024")]
        lengths: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole verification suite.
    VerifyAll {
        #[arg(long, default_value_t = suite::DEFAULT_SEED)]
        seed: u64,
        /// Directory for `report.json` and `bounds.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config file; flags override its fields.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<Status> {
    let constants = Constants::load(cli.constants.as_deref())?;
    let cwd = Path::new("");
    match cli.command {
        Command::SpectralGap { chain } => spectral_gap(&chain),
        Command::ExactDist { chain, weights, rational, out } => {
            let (c, s, w) = load_problem(&chain, &weights.weights, weights.n, cwd)?;
            exact_dist(&c, &s, &w, rational, out.as_deref())
        }
        Command::Smallball { chain, weights, x0, radius, mode, samples, seed, check, out } => {
            let (c, s, w) = load_problem(&chain, &weights.weights, weights.n, cwd)?;
            let q = Query { x0, radius, mode, samples, seed, check };
            smallball(&c, &s, &w, &q, &constants, out.as_deref())
        }
        Command::Esseen { chain, weights, radius, eps } => {
            let (c, s, w) = load_problem(&chain, &weights.weights, weights.n, cwd)?;
            esseen(&c, &s, &w, radius, eps, &constants)
        }
        Command::ZpAverage { chain, weights, x0, prime } => {
            let (c, s, w) = load_problem(&chain, &weights.weights, weights.n, cwd)?;
            zp_average(&c, &s, &w, x0, prime)
        }
        Command::VerifyClaims { budget, seed, out } => verify_claims(seed, budget, out.as_deref()),
        Command::FitConstants { out } => fit_constants(&out),
        Command::PrgBuild { k, out } => prg_build(k, &out),
        Command::PrgTest { k, graph, weights, x0, radius, mode, samples, seed, pad_to_multiple } => {
            let g = match (graph, k) {
                (Some(path), _) => read_graph(&path)?,
                (None, Some(k)) => build_mgg_expander(k).context("building expander")?,
                (None, None) => return Err(CliError::Usage("one of --k or --graph is required".into())),
            };
            let w = scalar_weights(&weights.weights, weights.n, cwd)?;
            let r = prg_test(g, &w, x0, radius, mode, samples, seed, pad_to_multiple, &constants)?;
            println!("{}", r.line);
            Ok(Status::from_pass(r.pass))
        }
        Command::Tightness { lambdas, lengths, out } => tightness(&lambdas, &lengths, out.as_deref()),
        Command::VerifyAll { seed, out } => verify_all(seed, out.as_deref(), &constants),
        Command::Run { config, seed, out } => run_config(&config, seed, out, &constants),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Writes to `out` or, without one, to stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write_bytes(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing CSV to memory");
    buf
}

/// `all-ones`, `arange`, `random-unit(d, seed)` or a file path relative to
/// `base`.
pub fn load_weights(spec: &str, n: Option<usize>, base: &Path) -> CliResult<WeightSystem> {
    let spec = spec.trim();
    let need_n = |g: &str| n.ok_or_else(|| CliError::Usage(format!("weight generator `{g}` needs a length n")));
    if spec == "all-ones" {
        return Ok(WeightSystem::all_ones(need_n(spec)?));
    }
    if spec == "arange" {
        return Ok(WeightSystem::arange(need_n(spec)?));
    }
    if let Some(args) = spec.strip_prefix("random-unit(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let parsed = match parts.as_slice() {
            [d, seed] => d.parse::<usize>().ok().zip(seed.parse::<u64>().ok()),
            _ => None,
        };
        let (d, seed) = parsed.ok_or_else(|| CliError::Usage(format!("cannot parse `{spec}`; expected random-unit(d, seed)")))?;
        return random_unit_weights(need_n("random-unit")?, d, seed).context("generating random unit weights");
    }
    let w = read_weights(&base.join(spec), WeightVariant::General)?;
    if let Some(n) = n.filter(|&n| n != w.len()) {
        return Err(CliError::Usage(format!("n = {n} but {spec} holds {} weights", w.len())));
    }
    Ok(w)
}

fn scalar_weights(spec: &str, n: Option<usize>, base: &Path) -> CliResult<Vec<f64>> {
    load_weights(spec, n, base)?.as_scalars().context("weights")
}

/// Sign functions for `n` steps: the chain file's rows when it has `n` of
/// them, its single row repeated, or the split labeling otherwise.
pub fn signs_for(chain: &MarkovChain, rows: Option<Vec<Vec<i8>>>, n: usize) -> CliResult<SignSystem> {
    let signs = match rows {
        Some(rows) if rows.len() == n => SignSystem::new(chain, rows),
        Some(rows) if rows.len() == 1 => SignSystem::repeated(chain, &rows[0], n),
        Some(rows) => {
            return Err(CliError::Usage(format!("chain file has {} sign rows but there are {n} weights", rows.len())))
        }
        None => SignSystem::split_labeling(chain, n),
    }
    .context("sign functions")?;
    if !signs.is_balanced() {
        eprintln!("warning: sign functions are not balanced (max |E_mu f_j| = {})", signs.max_imbalance());
    }
    Ok(signs)
}

fn load_problem(chain: &Path, weights: &str, n: Option<usize>, base: &Path) -> CliResult<(MarkovChain, SignSystem, WeightSystem)> {
    let loaded = read_chain(&base.join(chain))?;
    let n = n.or_else(|| loaded.signs.as_ref().filter(|r| r.len() > 1).map(Vec::len));
    let w = load_weights(weights, n, base)?;
    let s = signs_for(&loaded.chain, loaded.signs, w.len())?;
    Ok((loaded.chain, s, w))
}

fn spectral_gap(path: &Path) -> CliResult<Status> {
    let loaded = read_chain(path)?;
    let lam = spectral_lambda(&loaded.chain).context("spectral parameter")?;
    let v = json!({ "n_states": loaded.chain.n_states(), "lambda": lam, "gap": 1.0 - lam });
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    Ok(Status::Pass)
}

fn exact_dist(c: &MarkovChain, s: &SignSystem, w: &WeightSystem, rational: bool, out: Option<&Path>) -> CliResult<Status> {
    let bytes = if rational {
        let steps = integer_step_values(s, w).context("integer steps")?;
        let dist = exact_sum_distribution_rational(c, &steps).context("rational distribution")?;
        let mut text = String::from("sum,probability\n");
        for (sum, q) in dist {
            text.push_str(&format!("{sum},{q}\n"));
        }
        text.into_bytes()
    } else {
        let dist = exact_sum_distribution(c, s, w, DEFAULT_CELL_BUDGET).context("exact distribution")?;
        csv_bytes(|b| write_distribution(b, &dist))
    };
    emit(out, &bytes)?;
    Ok(Status::Pass)
}

/// Query shared by the `smallball` subcommand and the smallball configs.
#[derive(Debug, Clone)]
struct Query {
    x0: Vec<f64>,
    radius: f64,
    mode: ProbMode,
    samples: u64,
    seed: u64,
    check: Option<Check>,
}

fn smallball(
    c: &MarkovChain,
    s: &SignSystem,
    w: &WeightSystem,
    q: &Query,
    constants: &Constants,
    out: Option<&Path>,
) -> CliResult<Status> {
    let x0 = if q.x0.len() == 1 && w.dim() > 1 { vec![q.x0[0]; w.dim()] } else { q.x0.clone() };
    let (prob, line) = match q.mode {
        ProbMode::Exact => {
            if w.dim() != 1 {
                return Err(CliError::Usage("exact mode needs scalar integer weights; use --mode sampled".into()));
            }
            let d = exact_sum_distribution(c, s, w, DEFAULT_CELL_BUDGET).context("exact distribution")?;
            let p = d.window(x0[0], q.radius);
            (p, format!("probability {p}"))
        }
        ProbMode::Sampled => {
            let e = smallball_mc(c, s, w, &x0, q.radius, q.samples, q.seed).context("sampling")?;
            // Bound checks use the upper confidence limit.
            (e.ci_high, format!("estimate {} (99% CI [{}, {}], {} samples)", e.estimate, e.ci_low, e.ci_high, e.samples))
        }
    };
    println!("{line}");
    let Some(check) = q.check else { return Ok(Status::Pass) };
    let lambda = spectral_lambda(c).context("spectral parameter")?.clamp(0.0, 1.0);
    let params = TheoremParams { n: s.n_steps(), d: w.dim(), lambda, radius: q.radius };
    let bound = theorem_bound(check.kind(), &params, &constants.theorem()).context("theorem bound")?;
    let r = BoundReport::new(format!("{check:?}-n{}", params.n), &params, prob, bound);
    println!("bound {bound}; ratio {}; {}", r.ratio, if r.pass { "pass" } else { "FAIL" });
    let pass = r.pass;
    if let Some(out) = out {
        write_bytes(out, &csv_bytes(|b| write_bound_reports(b, &[r])))?;
    }
    Ok(Status::from_pass(pass))
}

fn esseen(c: &MarkovChain, s: &SignSystem, w: &WeightSystem, radius: f64, eps: f64, constants: &Constants) -> CliResult<Status> {
    let mut failure = None;
    let bound = esseen_bound(
        |xi| match char_fn(c, s, w, xi) {
            Ok(v) => v.modulus(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        w.dim(),
        radius,
        eps,
        constants.get(ESSEEN),
    )
    .context("Esseen bound")?;
    if let Some(e) = failure {
        return Err(CliError::Core { context: "characteristic function".into(), source: e });
    }
    println!("esseen bound {bound}");
    if integer_step_values(s, w).is_err() {
        return Ok(Status::Pass);
    }
    let (center, p) = exact_sum_distribution(c, s, w, DEFAULT_CELL_BUDGET).context("exact distribution")?.sup_window(radius);
    let pass = p <= bound * (1.0 + BOUND_RTOL);
    println!("exact sup window {p} at x0 = {center}; {}", if pass { "pass" } else { "FAIL" });
    Ok(Status::from_pass(pass))
}

fn zp_average(c: &MarkovChain, s: &SignSystem, w: &WeightSystem, x0: i64, prime: Option<u64>) -> CliResult<Status> {
    let p = match prime {
        Some(p) => p,
        None => find_prime(w).context("choosing a prime")?,
    };
    let z = zp_fourier_average(c, s, w, p, x0).context("Z_p average")?;
    let point = exact_sum_distribution(c, s, w, DEFAULT_CELL_BUDGET).context("exact distribution")?.prob_at(x0);
    let v = json!({
        "prime": z.prime,
        "average": z.average,
        "residue_probability": z.residue_probability,
        "point_probability": point,
    });
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    Ok(Status::from_pass(point <= z.residue_probability + 1e-12))
}

fn verify_claims(seed: u64, budget: u64, out: Option<&Path>) -> CliResult<Status> {
    let report = claims::verify_claims(seed, budget).context("claim checks")?;
    let mut bytes = serde_json::to_vec_pretty(&report).expect("json");
    bytes.push(b'\n');
    emit(out, &bytes)?;
    for (id, r) in &report {
        if !r.pass {
            eprintln!("claim {id} violated: max violation {}", r.max_violation);
        }
    }
    Ok(Status::from_pass(report.values().all(|r| r.pass)))
}

fn fit_constants(out: &Path) -> CliResult<Status> {
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.into(), source })?;
    for f in experiments::fit_all().context("fitting constants")? {
        write_json(&out.join(format!("{}.json", f.name)), &f)?;
        println!("{} = {}", f.name, f.value);
    }
    Ok(Status::Pass)
}

fn prg_build(k: u32, out: &Path) -> CliResult<Status> {
    let mut g = build_mgg_expander(k).context("building expander")?;
    write_json(out, &GraphFile::from(&g))?;
    if g.n_vertices() > CERTIFY_LIMIT {
        println!("{} vertices; too large to certify", g.n_vertices());
        return Ok(Status::Pass);
    }
    let lam = g.certify_lambda().context("certifying lambda")?;
    println!("{} vertices; certified lambda {lam}", g.n_vertices());
    Ok(Status::Pass)
}

struct PrgOutcome {
    row: BoundReport,
    pass: bool,
    line: String,
}

#[allow(clippy::too_many_arguments)]
fn prg_test(
    g: smallball_core::prg::ExpanderGraph,
    weights: &[f64],
    x0: f64,
    radius: f64,
    mode: ProbMode,
    samples: u64,
    seed: u64,
    pad: bool,
    constants: &Constants,
) -> CliResult<PrgOutcome> {
    let (weights, padding) = if pad { pad_to_multiple(weights, g.k() as usize) } else { (weights.to_vec(), 0) };
    let n = weights.len();
    let spec = PrgSpec::new(g, n).context("generator")?;
    let mode = match mode {
        ProbMode::Exact => PrgMode::Exact { budget: DEFAULT_WALK_BUDGET },
        ProbMode::Sampled => PrgMode::Sampled { samples, seed },
    };
    let p = prg_smallball(&spec, &weights, padding, x0, radius, mode).context("walk probability")?;
    let checked = match &p {
        PrgProbability::Exact { probability, .. } => *probability,
        PrgProbability::Sampled(e) => e.ci_high,
    };
    let params = TheoremParams { n: n - padding, d: 1, lambda: 0.0, radius };
    let bound = theorem_bound(TheoremKind::Prg, &params, &constants.theorem()).context("bound")?;
    let row = BoundReport::new(format!("prg-k{}-n{n}", spec.graph().k()), &params, checked, bound);
    // The bound speaks about unit radius only.
    let pass = radius > 1.0 || row.pass;
    let line = format!(
        "n {n} (padding {padding}); log2|D| {}; probability {}; bound {bound}; {}",
        spec.log2_size(),
        p.value(),
        if pass { "pass" } else { "FAIL" }
    );
    Ok(PrgOutcome { row, pass, line })
}

/// CSV `lambda,n,prob,normalized,slope`; `normalized` is
/// `P(S = 0) sqrt((1 - lambda) n / (1 + lambda))` and `slope` the log-log
/// slope of its lambda row.
pub fn tightness_csv(lambdas: &[f64], lengths: &[usize]) -> CliResult<Vec<u8>> {
    #[derive(serde::Serialize)]
    struct Row {
        lambda: f64,
        n: usize,
        prob: f64,
        normalized: f64,
        slope: f64,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for &lam in lambdas {
        let pts: Vec<(f64, f64)> = lengths
            .iter()
            .map(|&n| Ok((n as f64, tightness_point(lam, n).context(format!("lambda {lam}, n {n}"))?)))
            .collect::<CliResult<_>>()?;
        let slope = if pts.len() > 1 { loglog_slope(&pts) } else { f64::NAN };
        for &(n, prob) in &pts {
            let normalized = prob * ((1.0 - lam) * n / (1.0 + lam)).sqrt();
            w.serialize(Row { lambda: lam, n: n as usize, prob, normalized, slope }).expect("csv row");
        }
    }
    Ok(w.into_inner().expect("in-memory csv"))
}

fn tightness(lambdas: &[f64], lengths: &[usize], out: Option<&Path>) -> CliResult<Status> {
    if lambdas.is_empty() || lengths.is_empty() {
        return Err(CliError::Usage("lambda and n grids must be nonempty".into()));
    }
    emit(out, &tightness_csv(lambdas, lengths)?)?;
    Ok(Status::Pass)
}

fn verify_all(seed: u64, out: Option<&Path>, constants: &Constants) -> CliResult<Status> {
    let run = suite::verify_all(seed, constants, |r| {
        let limit_note = if r.within_limit() { "" } else { " (over time limit)" };
        println!(
            "criterion {:>2} {} {:<48} {:>8.2}s{limit_note}  {}",
            r.report.id,
            if r.report.pass { "PASS" } else { "FAIL" },
            r.report.name,
            r.elapsed.as_secs_f64(),
            r.report.detail
        );
    });
    println!("total {:.2}s", run.elapsed.as_secs_f64());
    if let Some(dir) = out {
        write_bytes(&dir.join("report.json"), &suite::report_bytes(&run.report()))?;
        let rows = run.rows();
        write_bytes(&dir.join("bounds.csv"), &csv_bytes(|b| write_bound_reports(b, &rows)))?;
    }
    Ok(Status::from_pass(run.pass()))
}

/// Re-reads a bound-report CSV, recomputes each pass flag from its
/// probability and bound, and returns the exit status those flags imply.
/// Rows whose stored flag disagrees with the recomputed one are an error.
pub fn recheck_bound_csv(path: &Path) -> CliResult<Status> {
    let file = fs::File::open(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let rows = read_bound_reports(file).map_err(|source| FormatError::Csv { path: path.into(), source })?;
    let mut pass = true;
    for r in &rows {
        let again = r.prob <= r.bound * (1.0 + BOUND_RTOL);
        if again != r.pass {
            return Err(FormatError::Schema {
                path: path.into(),
                message: format!("row {} has pass = {} but prob / bound = {}", r.instance_id, r.pass, r.prob / r.bound),
            }
            .into());
        }
        pass &= again;
    }
    Ok(Status::from_pass(pass))
}

fn default_radius() -> f64 {
    1.0
}

fn default_samples() -> u64 {
    100_000
}

fn default_budget() -> u64 {
    claims::DEFAULT_BUDGET
}

fn default_weights() -> String {
    "all-ones".into()
}

/// An experiment file. `kind` selects the variant; paths are relative to
/// the file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    SmallballExact {
        chain: PathBuf,
        #[serde(default = "default_weights")]
        weights: String,
        n: Option<usize>,
        #[serde(default)]
        x0: f64,
        #[serde(default = "default_radius")]
        radius: f64,
        check: Option<Check>,
        out: Option<PathBuf>,
    },
    SmallballMc {
        chain: PathBuf,
        #[serde(default = "default_weights")]
        weights: String,
        n: Option<usize>,
        #[serde(default)]
        x0: Vec<f64>,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default)]
        seed: u64,
        check: Option<Check>,
        out: Option<PathBuf>,
    },
    DiffScaling {
        n_list: Vec<usize>,
        out: Option<PathBuf>,
    },
    Prg {
        k: u32,
        n_list: Vec<usize>,
        #[serde(default = "default_weights")]
        weights: String,
        #[serde(default)]
        x0: f64,
        #[serde(default = "default_radius")]
        radius: f64,
        mode: Option<ProbMode>,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        pad_to_multiple: bool,
        out: Option<PathBuf>,
    },
    Tightness {
        lambda_list: Vec<f64>,
        n_list: Vec<usize>,
        out: Option<PathBuf>,
    },
    VerifyClaims {
        #[serde(default = "default_budget")]
        budget: u64,
        #[serde(default)]
        seed: u64,
        out: Option<PathBuf>,
    },
    FitConstants {
        out: PathBuf,
    },
}

fn nonempty<T>(path: &Path, field: &'static str, v: &[T]) -> CliResult<()> {
    if v.is_empty() {
        return Err(CliError::Config { path: path.into(), field, message: "grid must be nonempty".into() });
    }
    Ok(())
}

fn run_config(path: &Path, seed: Option<u64>, out: Option<PathBuf>, constants: &Constants) -> CliResult<Status> {
    let config: ExperimentConfig = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let resolve = |p: Option<PathBuf>| out.clone().or(p.map(|p| base.join(p)));
    let config_err = |field, e: CliError| CliError::Config { path: path.into(), field, message: e.to_string() };
    match config {
        ExperimentConfig::SmallballExact { chain, weights, n, x0, radius, check, out: o } => {
            let (c, s, w) = load_problem(&chain, &weights, n, &base).map_err(|e| match e {
                CliError::Format(f) => CliError::Format(f),
                e => config_err("weights", e),
            })?;
            let q = Query { x0: vec![x0], radius, mode: ProbMode::Exact, samples: 0, seed: 0, check };
            smallball(&c, &s, &w, &q, constants, resolve(o).as_deref())
        }
        ExperimentConfig::SmallballMc { chain, weights, n, x0, radius, samples, seed: s0, check, out: o } => {
            let (c, s, w) = load_problem(&chain, &weights, n, &base).map_err(|e| match e {
                CliError::Format(f) => CliError::Format(f),
                e => config_err("weights", e),
            })?;
            let x0 = if x0.is_empty() { vec![0.0; w.dim()] } else { x0 };
            let q = Query { x0, radius, mode: ProbMode::Sampled, samples, seed: seed.unwrap_or(s0), check };
            smallball(&c, &s, &w, &q, constants, resolve(o).as_deref())
        }
        ExperimentConfig::DiffScaling { n_list, out: o } => {
            nonempty(path, "n_list", &n_list)?;
            diff_scaling(&n_list, constants, resolve(o).as_deref())
        }
        ExperimentConfig::Prg { k, n_list, weights, x0, radius, mode, samples, seed: s0, pad_to_multiple, out: o } => {
            nonempty(path, "n_list", &n_list)?;
            let g = build_mgg_expander(k).context("building expander")?;
            let mut rows = Vec::new();
            let mut pass = true;
            for n in n_list {
                let w = scalar_weights(&weights, Some(n), &base).map_err(|e| match e {
                    CliError::Format(f) => CliError::Format(f),
                    e => config_err("weights", e),
                })?;
                let mode = mode.unwrap_or(ProbMode::Exact);
                let r = prg_test(g.clone(), &w, x0, radius, mode, samples, seed.unwrap_or(s0), pad_to_multiple, constants)?;
                println!("{}", r.line);
                pass &= r.pass;
                rows.push(r.row);
            }
            if let Some(o) = resolve(o) {
                write_bytes(&o, &csv_bytes(|b| write_bound_reports(b, &rows)))?;
            }
            Ok(Status::from_pass(pass))
        }
        ExperimentConfig::Tightness { lambda_list, n_list, out: o } => {
            nonempty(path, "lambda_list", &lambda_list)?;
            nonempty(path, "n_list", &n_list)?;
            let bytes = tightness_csv(&lambda_list, &n_list)?;
            match resolve(o) {
                Some(p) => write_bytes(&p, &bytes)?,
                None => emit(None, &bytes)?,
            }
            Ok(Status::Pass)
        }
        ExperimentConfig::VerifyClaims { budget, seed: s0, out: o } => {
            verify_claims(seed.unwrap_or(s0), budget, resolve(o).as_deref())
        }
        ExperimentConfig::FitConstants { out: o } => {
            let dir = resolve(Some(o)).expect("path present");
            fit_constants(&dir)
        }
    }
}

fn diff_scaling(lengths: &[usize], constants: &Constants, out: Option<&Path>) -> CliResult<Status> {
    let chain = make_independent_chain(&[0.5, 0.5]).context("independent chain")?;
    let tc = constants.theorem();
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for &n in lengths {
        let s = SignSystem::split_labeling(&chain, n).context("signs")?;
        let d = exact_sum_distribution(&chain, &s, &WeightSystem::arange(n), DEFAULT_CELL_BUDGET)
            .context(format!("n {n}"))?;
        let p = d.max_point().1;
        let params = TheoremParams { n, d: 1, lambda: 0.0, radius: 0.0 };
        let bound = theorem_bound(TheoremKind::DistinctInt, &params, &tc).context("bound")?;
        rows.push(BoundReport::new(format!("arange-n{n}"), &params, p, bound));
        pts.push((n as f64, p));
    }
    if pts.len() > 1 {
        println!("slope {}", loglog_slope(&pts));
    }
    let pass = rows.iter().all(|r| r.pass);
    emit(out, &csv_bytes(|b| write_bound_reports(b, &rows)))?;
    Ok(Status::from_pass(pass))
}
