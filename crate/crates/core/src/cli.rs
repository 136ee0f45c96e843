//! Command-line front end: argument parsing, configuration, report
//! rendering, and exit codes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decompose::{compare_routes, decompose_direct, decompose_incremental_default, fdim_edge_sum, Outcome};
use crate::graph::{parse_graph, GraphError, WeightedGraph};
use crate::principal::{fdim_closed_form, gjs_finite_depth_check, t_prime_sequence, GjsReport, PrincipalError, PrincipalGraph};
use crate::rmt::{simulate_edge, simulate_semicircular, EdgeModel, EdgeReport, RmtError, RngAlgorithm, SemicircleReport};
use crate::samples::{random_build_order, random_graphs, small_weighted_graphs};
use crate::scalar::{self, NumericConfig, Scalar};
use crate::tl::{self, Delta, GrElement, TlError};
use crate::vn::SummandRecord;
use crate::decompose::{decompose_incremental, DecomposeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;
pub const EXIT_INVARIANT: i32 = 70;
pub const EXIT_NUMERIC: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Invariant(_) => "invariant_violation",
            CliError::Numeric(_) => "numeric_failure",
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::Graph(g) => g.into(),
            DecomposeError::TooFewEdges(_) | DecomposeError::BuildOrder(_) | DecomposeError::BaseProjection(_) => {
                CliError::Usage(e.to_string())
            }
            DecomposeError::Vn(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<PrincipalError> for CliError {
    fn from(e: PrincipalError) -> Self {
        match e {
            PrincipalError::Graph(g) => g.into(),
            PrincipalError::Decompose(d) => d.into(),
            PrincipalError::UnknownBuiltin(_)
            | PrincipalError::MissingDelta { .. }
            | PrincipalError::DepthTooSmall { .. }
            | PrincipalError::InfiniteDepth => CliError::Usage(e.to_string()),
            PrincipalError::DeltaTooSmall { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<TlError> for CliError {
    fn from(e: TlError) -> Self {
        match e {
            TlError::Syntax { .. } | TlError::NotAPairing | TlError::Crossing(..) => CliError::Parse(e.to_string()),
            TlError::NotSelfAdjoint | TlError::DeltaMismatch => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<RmtError> for CliError {
    fn from(e: RmtError) -> Self {
        match e {
            RmtError::UnknownGenerator(_) => CliError::Parse(e.to_string()),
            RmtError::BadWeights { .. } | RmtError::NoTrials => CliError::Usage(e.to_string()),
            RmtError::Degenerate { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Rational,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Settings read from a TOML file; command-line flags override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub mode: Mode,
    pub precision: u32,
    pub tolerance: f64,
    pub rng: RngAlgorithm,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        let n = NumericConfig::default();
        Config {
            mode: Mode::Rational,
            precision: n.precision_digits,
            tolerance: n.tolerance,
            rng: RngAlgorithm::default(),
            format: Format::Text,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let c: Config = toml::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.mode == Mode::Real && self.precision < 15 {
            return Err(CliError::Usage(format!("real mode needs at least 15 digits, got {}", self.precision)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(CliError::Usage(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "freedim", version, about = "Free-dimension calculus for graph von Neumann algebras")]
struct Cli {
    /// TOML file with mode, precision, tolerance, rng, and format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Significant decimal digits for real arithmetic.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Real-mode comparison tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Direct,
    Incremental,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose the algebra of a weighted graph file.
    Decompose {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        route: Route,
    },
    /// Factor parameters along depth truncations of a principal graph.
    TruncationSequence {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        kmax: usize,
    },
    /// Compare the full-depth parameter with the global-index formula.
    GjsCheck {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Moments of a Temperley-Lieb element under juxtaposition.
    TlMoments {
        /// A value greater than 1, or `symbolic`.
        #[arg(long)]
        delta: String,
        #[arg(long)]
        n: usize,
        /// `cup` or a generator file.
        #[arg(long, default_value = "cup")]
        generator: String,
        /// Also check positivity of the Hankel matrix of this size.
        #[arg(long)]
        hankel: Option<usize>,
    },
    /// Estimate the zero atom of the square of a random edge matrix.
    SimulateEdge {
        #[arg(long)]
        mu_v: f64,
        #[arg(long)]
        mu_w: f64,
        #[arg(long)]
        n: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Even moments of a Gaussian self-adjoint matrix.
    SimulateSemicircular {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Route agreement and closed-form identity on generated graphs.
    Selftest {
        #[arg(long, default_value_t = 200)]
        random: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Built-in name (A3, A4, A_inf, D5, …) or a graph file whose first
    /// vertex is the root.
    #[arg(long)]
    graph: String,
    #[arg(long)]
    delta: Option<String>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: i32,
    kind: &'a str,
    message: String,
}

/// Runs the command line `args` (including the program name), writing the
/// report to `out` and any structured error to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            return report_error(&CliError::Usage(e.to_string().trim_end().to_string()), err);
        }
    };
    match execute(cli) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => report_error(&e, err),
    }
}

fn report_error(e: &CliError, err: &mut dyn Write) -> i32 {
    let body = ErrorReport { error: ErrorBody { code: e.exit_code(), kind: e.kind(), message: e.to_string() } };
    let _ = writeln!(err, "{}", serde_json::to_string(&body).expect("serializable"));
    e.exit_code()
}

fn settings(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("cannot read config {}: {e}", path.display())))?;
            Config::from_toml(&text)?
        }
        None => Config::default(),
    };
    if let Some(m) = cli.mode {
        config.mode = m;
    }
    if let Some(p) = cli.precision {
        config.precision = p;
    }
    if let Some(t) = cli.tolerance {
        config.tolerance = t;
    }
    if cli.json {
        config.format = Format::Json;
    }
    config.check()?;
    let numeric = NumericConfig { precision_digits: config.precision, tolerance: config.tolerance };
    if let Err(existing) = scalar::configure(numeric) {
        if existing != numeric {
            return Err(CliError::Usage("numeric settings were already fixed in this process".into()));
        }
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<(String, i32), CliError> {
    let config = settings(&cli)?;
    match cli.command {
        Command::Decompose { graph, route } => decompose_command(&config, &graph, route),
        Command::TruncationSequence { graph, kmax } => truncation_command(&config, &graph, kmax),
        Command::GjsCheck { graph } => gjs_command(&config, &graph),
        Command::TlMoments { delta, n, generator, hankel } => tl_command(&config, &delta, n, &generator, hankel),
        Command::SimulateEdge { mu_v, mu_w, n, trials, seed } => {
            let model = EdgeModel { rng: config.rng, ..EdgeModel::new(mu_v, mu_w, n, trials, seed) };
            let report = simulate_edge(&model)?;
            Ok((render(&config, &report, edge_text), EXIT_OK))
        }
        Command::SimulateSemicircular { n, trials, seed } => {
            let report = simulate_semicircular(n, trials, seed, config.rng);
            Ok((render(&config, &report, semicircle_text), EXIT_OK))
        }
        Command::Selftest { random, seed } => {
            let report = selftest(random, seed);
            let code = if report.passed { EXIT_OK } else { EXIT_INVARIANT };
            Ok((render(&config, &report, selftest_text), code))
        }
    }
}

fn render<T: Serialize>(config: &Config, report: &T, text: fn(&T) -> String) -> String {
    match config.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => text(report),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn apply_mode(config: &Config, g: WeightedGraph) -> Result<WeightedGraph, CliError> {
    if config.mode == Mode::Rational {
        return Ok(g);
    }
    let mut real = WeightedGraph::new();
    for (id, w) in g.ids().iter().zip(g.weights()) {
        real.add_vertex(id, w.to_real())?;
    }
    for (v, w, m) in g.edges() {
        real.add_edge(g.id(v), g.id(w), m)?;
    }
    real.set_delta(g.delta().map(Scalar::to_real));
    Ok(real)
}

fn load_graph(config: &Config, path: &Path) -> Result<WeightedGraph, CliError> {
    let g = parse_graph(&read_file(path)?)?;
    g.check()?;
    apply_mode(config, g)
}

#[derive(Debug, Serialize)]
struct AtomRecord {
    vertex: String,
    weight: Scalar,
}

#[derive(Debug, Serialize)]
struct FactorRecord {
    t: Scalar,
    weight: Scalar,
}

#[derive(Debug, Serialize)]
struct DecomposeReport {
    route: &'static str,
    fdim: Scalar,
    not_a_factor: bool,
    factor: Option<FactorRecord>,
    atoms: Vec<AtomRecord>,
    scale: Scalar,
    route_agreement: Option<bool>,
    summands: Vec<SummandRecord>,
}

fn atom_records(atoms: &std::collections::BTreeMap<String, Scalar>) -> Vec<AtomRecord> {
    atoms.iter().map(|(v, w)| AtomRecord { vertex: v.clone(), weight: w.clone() }).collect()
}

fn decompose_command(config: &Config, path: &Path, route: Route) -> Result<(String, i32), CliError> {
    let g = load_graph(config, path)?;
    let (outcome, agreement) = match route {
        Route::Direct => (decompose_direct(&g)?, None),
        Route::Incremental => {
            if g.edge_units() < 2 {
                (decompose_direct(&g)?, None)
            } else {
                (Outcome::Factor(decompose_incremental_default(&g)?.0), None)
            }
        }
        Route::Both => {
            let c = compare_routes(&g, None)?;
            let agreement = c.incremental.as_ref().map(|_| c.agree());
            (c.direct, agreement)
        }
    };
    let route_name = match route {
        Route::Direct => "direct",
        Route::Incremental => "incremental",
        Route::Both => "both",
    };
    let report = match &outcome {
        Outcome::Factor(d) => DecomposeReport {
            route: route_name,
            fdim: d.fdim.clone(),
            not_a_factor: false,
            factor: Some(FactorRecord { t: d.factor.t.clone(), weight: d.factor.weight.clone() }),
            atoms: atom_records(&d.atoms),
            scale: d.scale.clone(),
            route_agreement: agreement,
            summands: d.to_algebra().map_err(|e| CliError::Numeric(e.to_string()))?.summands().iter().map(SummandRecord::from).collect(),
        },
        Outcome::NotAFactor { algebra, fdim } => DecomposeReport {
            route: route_name,
            fdim: fdim.clone(),
            not_a_factor: true,
            factor: None,
            atoms: Vec::new(),
            scale: g.total_weight().recip(),
            route_agreement: None,
            summands: algebra.summands().iter().map(SummandRecord::from).collect(),
        },
    };
    let code = if agreement == Some(false) { EXIT_INVARIANT } else { EXIT_OK };
    Ok((render(config, &report, decompose_text), code))
}

fn decompose_text(r: &DecomposeReport) -> String {
    let mut s = String::new();
    if r.not_a_factor {
        writeln!(s, "not a factor (fewer than two edge units)").unwrap();
        let parts: Vec<String> = r.summands.iter().map(|x| format!("{}[{}]", x.kind, x.weight)).collect();
        writeln!(s, "algebra: {}", parts.join(" + ")).unwrap();
    } else if let Some(f) = &r.factor {
        writeln!(s, "factor: L(F_t) with t = {}, weight {}", f.t, f.weight).unwrap();
        for a in &r.atoms {
            writeln!(s, "atom: {} weight {}", a.vertex, a.weight).unwrap();
        }
    }
    writeln!(s, "fdim: {}", r.fdim).unwrap();
    writeln!(s, "scale: {}", r.scale).unwrap();
    if let Some(agree) = r.route_agreement {
        writeln!(s, "route agreement: {agree}").unwrap();
    }
    s
}

fn parse_scalar(text: &str, what: &str) -> Result<Scalar, CliError> {
    Scalar::parse(text).map_err(|e| CliError::Parse(format!("bad {what} `{text}`: {e}")))
}

fn load_principal(config: &Config, args: &GraphArgs) -> Result<PrincipalGraph, CliError> {
    let mut delta = args.delta.as_deref().map(|d| parse_scalar(d, "delta")).transpose()?;
    if config.mode == Mode::Real {
        delta = delta.map(|d| d.to_real());
    }
    let path = Path::new(&args.graph);
    if path.is_file() {
        let g = parse_graph(&read_file(path)?)?;
        g.check()?;
        let g = apply_mode(config, g)?;
        let delta = delta
            .or_else(|| g.delta().cloned())
            .ok_or_else(|| CliError::Usage("graph file has no `delta` line and no --delta was given".into()))?;
        let root = g.id(0).to_string();
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph").to_string();
        return Ok(PrincipalGraph::from_graph(&name, g, delta, &root)?);
    }
    Ok(PrincipalGraph::builtin(&args.graph, delta)?)
}

#[derive(Debug, Serialize)]
struct TruncationRowRecord {
    k: usize,
    fdim: Scalar,
    t: Scalar,
    factor_weight: Scalar,
    atoms: Vec<AtomRecord>,
    t_prime: Scalar,
}

#[derive(Debug, Serialize)]
struct TruncationReport {
    graph: String,
    delta: Scalar,
    rows: Vec<TruncationRowRecord>,
    strictly_increasing: bool,
}

fn truncation_command(config: &Config, args: &GraphArgs, kmax: usize) -> Result<(String, i32), CliError> {
    let g = load_principal(config, args)?;
    if kmax < 2 {
        return Err(CliError::Usage(format!("--kmax must be at least 2, got {kmax}")));
    }
    let rows = t_prime_sequence(&g, kmax)?;
    let strictly_increasing = rows.windows(2).all(|w| w[0].t_prime < w[1].t_prime);
    let report = TruncationReport {
        graph: g.name().to_string(),
        delta: g.delta().clone(),
        rows: rows
            .into_iter()
            .map(|r| TruncationRowRecord {
                k: r.k,
                fdim: r.decomposition.fdim.clone(),
                t: r.decomposition.factor.t.clone(),
                factor_weight: r.decomposition.factor.weight.clone(),
                atoms: atom_records(&r.decomposition.atoms),
                t_prime: r.t_prime,
            })
            .collect(),
        strictly_increasing,
    };
    Ok((render(config, &report, truncation_text), EXIT_OK))
}

fn truncation_text(r: &TruncationReport) -> String {
    let mut s = format!("graph {} at delta {}\n", r.graph, r.delta);
    for row in &r.rows {
        let atoms: Vec<String> = row.atoms.iter().map(|a| format!("{}:{}", a.vertex, a.weight)).collect();
        writeln!(s, "k={} fdim={} t={} atoms=[{}] t'={}", row.k, row.fdim, row.t, atoms.join(", "), row.t_prime).unwrap();
    }
    s
}

#[derive(Debug, Serialize)]
struct GjsRecord {
    graph: String,
    delta: Scalar,
    applicable: bool,
    engine: Option<Scalar>,
    formula: Option<Scalar>,
    index: Option<Scalar>,
    difference: Option<Scalar>,
    within_tolerance: Option<bool>,
    atoms: Vec<AtomRecord>,
}

fn gjs_command(config: &Config, args: &GraphArgs) -> Result<(String, i32), CliError> {
    let g = load_principal(config, args)?;
    let report = gjs_finite_depth_check(&g, config.tolerance)?;
    let mut record = GjsRecord {
        graph: g.name().to_string(),
        delta: g.delta().clone(),
        applicable: false,
        engine: None,
        formula: None,
        index: None,
        difference: None,
        within_tolerance: None,
        atoms: Vec::new(),
    };
    let mut code = EXIT_OK;
    match report {
        GjsReport::Compared { engine, formula, index, difference, within_tolerance } => {
            if !within_tolerance {
                code = EXIT_INVARIANT;
            }
            record.applicable = true;
            record.engine = Some(engine);
            record.formula = Some(formula);
            record.index = Some(index);
            record.difference = Some(difference);
            record.within_tolerance = Some(within_tolerance);
        }
        GjsReport::Inapplicable { atoms } => record.atoms = atom_records(&atoms),
    }
    Ok((render(config, &record, gjs_text), code))
}

fn gjs_text(r: &GjsRecord) -> String {
    let mut s = format!("graph {} at delta {}\n", r.graph, r.delta);
    if !r.applicable {
        let atoms: Vec<String> = r.atoms.iter().map(|a| format!("{}:{}", a.vertex, a.weight)).collect();
        writeln!(s, "inapplicable: atoms at full depth [{}]", atoms.join(", ")).unwrap();
        return s;
    }
    let show = |x: &Option<Scalar>| x.as_ref().map(ToString::to_string).unwrap_or_default();
    writeln!(s, "engine:  {}", show(&r.engine)).unwrap();
    writeln!(s, "formula: {}", show(&r.formula)).unwrap();
    writeln!(s, "index:   {}", show(&r.index)).unwrap();
    writeln!(s, "difference: {}", show(&r.difference)).unwrap();
    writeln!(s, "within tolerance: {}", r.within_tolerance.unwrap_or(false)).unwrap();
    s
}

#[derive(Debug, Serialize)]
struct MomentRecord {
    j: usize,
    poly: String,
    value: Option<Scalar>,
}

#[derive(Debug, Serialize)]
struct PositivityRecord {
    size: usize,
    positive_semidefinite: bool,
    exact: bool,
    leading_minors: Vec<Scalar>,
    min_eigenvalue: f64,
}

#[derive(Debug, Serialize)]
struct TlReport {
    delta: String,
    generator: String,
    moments: Vec<MomentRecord>,
    algorithms_agree: bool,
    positivity: Option<PositivityRecord>,
}

fn tl_command(config: &Config, delta: &str, n: usize, generator: &str, hankel: Option<usize>) -> Result<(String, i32), CliError> {
    let d = if delta.eq_ignore_ascii_case("symbolic") {
        Delta::Symbolic
    } else {
        let mut v = parse_scalar(delta, "delta")?;
        if config.mode == Mode::Real {
            v = v.to_real();
        }
        Delta::value(v)?
    };
    let g = if generator == "cup" {
        GrElement::cup(d.clone())
    } else {
        tl::parse_generator(&read_file(Path::new(generator))?, d.clone())?
    };
    let r = tl::moments(&g, n)?;
    let positivity = match hankel {
        None => None,
        Some(size) => {
            if d == Delta::Symbolic {
                return Err(CliError::Usage("--hankel needs a numeric --delta".into()));
            }
            let p = tl::positivity_check(&g, size)?;
            Some(PositivityRecord {
                size,
                positive_semidefinite: p.positive_semidefinite,
                exact: p.exact,
                leading_minors: p.leading_minors,
                min_eigenvalue: p.min_eigenvalue,
            })
        }
    };
    let report = TlReport {
        delta: match &d {
            Delta::Symbolic => "symbolic".into(),
            Delta::Value(v) => v.to_string(),
        },
        generator: generator.to_string(),
        moments: r
            .moments
            .iter()
            .enumerate()
            .map(|(j, m)| MomentRecord { j, poly: m.poly.to_string(), value: m.value.clone() })
            .collect(),
        algorithms_agree: r.algorithms_agree,
        positivity,
    };
    let failed = !report.algorithms_agree || report.positivity.as_ref().is_some_and(|p| !p.positive_semidefinite);
    Ok((render(config, &report, tl_text), if failed { EXIT_INVARIANT } else { EXIT_OK }))
}

fn tl_text(r: &TlReport) -> String {
    let mut s = format!("generator {} at delta {}\n", r.generator, r.delta);
    for m in &r.moments {
        match &m.value {
            Some(v) => writeln!(s, "m{} = {} = {}", m.j, m.poly, v).unwrap(),
            None => writeln!(s, "m{} = {}", m.j, m.poly).unwrap(),
        }
    }
    writeln!(s, "algorithms agree: {}", r.algorithms_agree).unwrap();
    if let Some(p) = &r.positivity {
        writeln!(s, "hankel size {}: positive semidefinite = {} (exact: {})", p.size, p.positive_semidefinite, p.exact)
            .unwrap();
    }
    s
}

fn edge_text(r: &EdgeReport) -> String {
    format!(
        "block {}x{}, {} trials, seed {}\natom formula:  {:.6}\natom estimate: {:.6} [{:.6}, {:.6}]\nmoments: {:?}\nlimit:   {:?}\n",
        r.rows, r.cols, r.trials, r.seed, r.atom_formula, r.atom_estimate, r.ci_low, r.ci_high, r.moments, r.moments_limit
    )
}

fn semicircle_text(r: &SemicircleReport) -> String {
    format!(
        "N = {}, {} trials\nm2 = {:.5} (target 1)\nm4 = {:.5} (target 2)\nm6 = {:.5} (target 5)\n",
        r.n, r.trials, r.moments[0], r.moments[1], r.moments[2]
    )
}

/// Counts from [`selftest`].
#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub exhaustive_graphs: usize,
    pub random_graphs: usize,
    pub route_checks: usize,
    pub route_failures: Vec<String>,
    pub identity_checks: usize,
    pub identity_failures: Vec<String>,
    pub passed: bool,
}

/// Route agreement and closed-form identity on every small graph (up to 4
/// vertices, 5 edge units, weights 1, 2, 3) with the default build order, and
/// on `random` seeded graphs with a random build order each.
pub fn selftest(random: usize, seed: u64) -> SelftestReport {
    let grid = [Scalar::int(1), Scalar::int(2), Scalar::int(3)];
    let small = small_weighted_graphs(4, 5, &grid);
    let generated = random_graphs(seed, random, 8, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelftestReport {
        exhaustive_graphs: small.len(),
        random_graphs: generated.len(),
        route_checks: 0,
        route_failures: Vec::new(),
        identity_checks: 0,
        identity_failures: Vec::new(),
        passed: false,
    };
    for g in small.iter().chain(&generated) {
        report.identity_checks += 1;
        match (fdim_closed_form(g), fdim_edge_sum(g)) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => report.identity_failures.push(format!("{}: {a:?} vs {b:?}", g.to_graph_file().replace('\n', "; "))),
        }
    }
    for g in &small {
        report.route_checks += 1;
        if !compare_routes(g, None).map(|c| c.agree()).unwrap_or(false) {
            report.route_failures.push(g.to_graph_file().replace('\n', "; "));
        }
    }
    for g in &generated {
        report.route_checks += 1;
        let ok = random_build_order(g, &mut rng)
            .map(|o| match (decompose_direct(g), decompose_incremental(g, &o)) {
                (Ok(Outcome::Factor(d)), Ok((i, _))) => d == i,
                _ => false,
            })
            .unwrap_or(false);
        if !ok {
            report.route_failures.push(g.to_graph_file().replace('\n', "; "));
        }
    }
    report.passed = report.route_failures.is_empty() && report.identity_failures.is_empty();
    report
}

fn selftest_text(r: &SelftestReport) -> String {
    let mut s = format!(
        "graphs: {} exhaustive, {} random\nroute agreement: {}/{}\nclosed-form identity: {}/{}\n",
        r.exhaustive_graphs,
        r.random_graphs,
        r.route_checks - r.route_failures.len(),
        r.route_checks,
        r.identity_checks - r.identity_failures.len(),
        r.identity_checks
    );
    for f in r.route_failures.iter().chain(&r.identity_failures) {
        writeln!(s, "failure: {f}").unwrap();
    }
    writeln!(s, "{}", if r.passed { "PASS" } else { "FAIL" }).unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = Config::from_toml("mode = \"real\"\nprecision = 60\ntolerance = 1e-10\nrng = \"chacha8\"\nformat = \"json\"\n").unwrap();
        assert_eq!(c.mode, Mode::Real);
        assert_eq!(c.rng, RngAlgorithm::ChaCha8);
        assert_eq!(c.format, Format::Json);
        assert!(Config::from_toml("mode = \"real\"\nprecision = 10\n").is_err());
        assert!(Config::from_toml("tolerance = 0.0\n").is_err());
        assert!(Config::from_toml("colour = \"blue\"\n").is_err());
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["freedim", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        let v: serde_json::Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(v["error"]["code"], 64);
    }

    #[test]
    fn error_mapping() {
        assert_eq!(CliError::from(GraphError::UnknownVertex("x".into())).exit_code(), EXIT_PARSE);
        assert_eq!(CliError::from(RmtError::Degenerate { rows: 1, cols: 2 }).exit_code(), EXIT_NUMERIC);
        let e = DecomposeError::NonMonotone { step: 1, previous: Scalar::one(), current: Scalar::one() };
        assert_eq!(CliError::from(e).exit_code(), EXIT_INVARIANT);
    }
}
