//! The `ldl` command: check, evaluate, compile and train LDL specifications,
//! and probe the properties of the six logics.
//!
//! Exit codes: 0 success, 1 parse error, 2 type error, 3 I/O error,
//! 4 evaluation, network or training error, 64 bad command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ldl_core::eval::{args_from_bindings, evaluate_traced, prepare_spec, spec_params, EvalError, Output, SemanticContext};
use ldl_core::fmt::g17;
use ldl_core::graph::compile;
use ldl_core::logic::{Logic, LogicKind};
use ldl_core::net::{ContextFile, Dataset, DenseNetwork, NetError};
use ldl_core::parser::{parse, ParseError, SpecFile};
use ldl_core::sampling::SamplingConfig;
use ldl_core::typeck::{check_spec, TypeError};
use ldl_props::{check, matrix_text, CheckConfig, Property, PropertyVerdict};
use ldl_train::{make_synthetic_dataset, train, TrainConfig, TrainError};
use serde::Serialize;

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_TYPE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EVAL: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "ldl", version, about = "Typed property language for differentiable logics: checker, evaluator and tools")]
struct Cli {
    /// Report errors on standard error as one JSON object per line.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and typecheck a specification.
    Check { spec: PathBuf },
    /// Print the loss of a specification's root property.
    Eval(EvalArgs),
    /// Lower a specification to an expression graph.
    Compile(CompileArgs),
    /// Check algebraic and analytic properties of the logics.
    Props(PropsArgs),
    /// Train a network against cross-entropy plus a logical penalty.
    Train(TrainArgs),
    /// Write a synthetic two-blob classification dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Args, Debug, Clone)]
struct LogicArgs {
    #[arg(long, default_value = "dl2")]
    logic: String,
    #[arg(long, default_value_t = 2.0)]
    yager_p: f64,
    #[arg(long, default_value_t = 1.0)]
    stl_nu: f64,
    #[arg(long, default_value_t = 1.0)]
    neq_xi: f64,
    /// Use `1 - max(tanh(a - b), 0)` for fuzzy `<=`.
    #[arg(long)]
    leq_signed: bool,
}

impl LogicArgs {
    fn logic(&self) -> Result<Logic, Failure> {
        let kind: LogicKind = self.logic.parse().map_err(|e| Failure::usage(format!("{e}")))?;
        let l = Logic {
            yager_p: self.yager_p,
            stl_nu: self.stl_nu,
            neq_xi: self.neq_xi,
            leq_signed: self.leq_signed,
            ..Logic::new(kind)
        };
        l.validate().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(l)
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    spec: PathBuf,
    /// Context file with samplers and parameter bindings.
    #[arg(long)]
    ctx: Option<PathBuf>,
    /// Network file, as `name=path`, or just `path` when the spec declares
    /// a single network. May be repeated.
    #[arg(long = "net")]
    nets: Vec<String>,
    #[command(flatten)]
    logic: LogicArgs,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Print the value of every evaluated node.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct CompileArgs {
    spec: PathBuf,
    #[command(flatten)]
    logic: LogicArgs,
    /// Output file; standard output if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct PropsArgs {
    /// Logic to check; repeat for several.
    #[arg(long = "logic", conflicts_with = "all")]
    logics: Vec<String>,
    #[arg(long)]
    all: bool,
    /// Restrict to one property; repeat for several.
    #[arg(long = "property")]
    properties: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Initial network file.
    #[arg(long)]
    net: PathBuf,
    /// Dataset CSV with columns x0.. and y0..
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    ctx: PathBuf,
    #[command(flatten)]
    logic: LogicArgs,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.5)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    eval_samples: usize,
    #[arg(long, default_value_t = 16)]
    dl_samples: usize,
    /// Where to write the per-epoch report (CSV); standard output if absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to write the trained network.
    #[arg(long)]
    save_net: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// An error on its way to the user: exit code, short code, message and an
/// optional source position.
#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub exit: i32,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<u32>,
}

impl Failure {
    fn new(exit: i32, code: &str, message: impl Into<String>) -> Self {
        Failure {
            exit,
            code: code.into(),
            message: message.into(),
            line: None,
            col: None,
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, "Usage", message)
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure::new(EXIT_IO, "Io", format!("{}: {e}", path.display()))
    }

    fn at(mut self, line: u32, col: u32) -> Self {
        self.line = Some(line);
        self.col = Some(col);
        self
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        let (line, col) = e.position();
        let code = match e {
            ParseError::IllegalCharacter { .. } => "IllegalCharacter",
            ParseError::Syntax { .. } => "Syntax",
            ParseError::Undeclared { .. } => "Undeclared",
            ParseError::Duplicate { .. } => "Duplicate",
        };
        Failure::new(EXIT_PARSE, code, e.to_string()).at(line, col)
    }
}

impl From<TypeError> for Failure {
    fn from(e: TypeError) -> Self {
        let f = Failure::new(EXIT_TYPE, e.code(), e.to_string());
        match e.span() {
            Some(s) => f.at(s.line, s.col),
            None => f,
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::Logic(_) => "Logic",
            EvalError::Negation(_) => "NegationNotPushable",
            EvalError::Sampling(_) => "Sampling",
            EvalError::MissingSampler(_) => "MissingSampler",
            EvalError::SamplerDimension { .. } => "SamplerDimension",
            EvalError::MissingNetwork(_) => "MissingNetwork",
            EvalError::NetworkShape { .. } => "NetworkShape",
            EvalError::Unbound(_) => "Unbound",
            EvalError::Arity { .. } => "Arity",
            EvalError::BadArgument { .. } => "BadArgument",
            EvalError::Internal(_) => "Internal",
        };
        Failure::new(EXIT_EVAL, code, e.to_string())
    }
}

impl From<NetError> for Failure {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Io { .. } => Failure::new(EXIT_IO, "Io", e.to_string()),
            e => Failure::new(EXIT_EVAL, "Network", e.to_string()),
        }
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Eval(e) => e.into(),
            TrainError::Net(e) => e.into(),
            e => Failure::new(EXIT_EVAL, "Training", e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write_out(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

/// Parses and typechecks the file at `path`.
fn load_spec(path: &Path) -> Result<SpecFile, Failure> {
    let spec = parse(&read(path)?)?;
    check_spec(&spec)?;
    Ok(spec)
}

fn load_nets(spec: &SpecFile, flags: &[String]) -> Result<BTreeMap<String, DenseNetwork>, Failure> {
    let mut nets = BTreeMap::new();
    for flag in flags {
        let (name, path) = match flag.split_once('=') {
            Some((n, p)) => (n.to_string(), p),
            None if spec.networks.len() == 1 => (spec.networks[0].name.clone(), flag.as_str()),
            None => {
                return Err(Failure::usage(format!(
                    "`--net {flag}`: name the network as name=path when the spec declares {} networks",
                    spec.networks.len()
                )))
            }
        };
        nets.insert(name, DenseNetwork::load(path)?);
    }
    Ok(nets)
}

fn load_ctx(path: Option<&Path>) -> Result<ContextFile, Failure> {
    match path {
        Some(p) => Ok(ContextFile::from_json_str(&read(p)?)?),
        None => Ok(ContextFile::default()),
    }
}

fn cmd_check(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = parse(&read(path)?)?;
    let ty = check_spec(&spec)?;
    let _ = writeln!(out, "ok: {} : {ty}", spec.root().name);
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = load_spec(&a.spec)?;
    let logic = a.logic.logic()?;
    let ctx_file = load_ctx(a.ctx.as_deref())?;
    let sampling = SamplingConfig::new(a.samples, a.seed, a.refine);
    sampling.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let mut ctx = SemanticContext::new(logic).with_sampling(sampling);
    for (name, net) in load_nets(&spec, &a.nets)? {
        ctx = ctx.with_network(name, net);
    }
    for (name, d) in &ctx_file.samplers {
        ctx = ctx.with_sampler(name, d.clone());
    }
    let args = args_from_bindings(&spec_params(&spec), &ctx_file.bindings, &logic)?;
    prepare_spec(&spec, &ctx, &args)?;
    let (value, trace) = evaluate_traced(&spec.root_expr(), &ctx, &args)?;
    let Output::Truth(t) = value else {
        return Err(Failure::new(EXIT_EVAL, "Internal", "the property did not evaluate to a truth value"));
    };
    if a.trace {
        for line in trace {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "# truth {}", g17(t));
    }
    let _ = writeln!(out, "{}", g17(logic.penalty(&t)));
    Ok(())
}

fn cmd_compile(a: &CompileArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = load_spec(&a.spec)?;
    let logic = a.logic.logic()?;
    let graph = compile(&spec, &logic).map_err(|e| match e {
        ldl_core::graph::GraphError::Eval(e) => Failure::from(e),
        e => Failure::new(EXIT_EVAL, "Compile", e.to_string()),
    })?;
    write_out(a.output.as_deref(), &graph.to_text(), out)
}

fn cmd_props(a: &PropsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let kinds: Vec<LogicKind> = if a.all || a.logics.is_empty() {
        LogicKind::ALL.to_vec()
    } else {
        a.logics
            .iter()
            .map(|s| s.parse().map_err(|e| Failure::usage(format!("{e}"))))
            .collect::<Result<_, _>>()?
    };
    let props: Vec<Property> = if a.properties.is_empty() {
        Property::ALL.to_vec()
    } else {
        a.properties
            .iter()
            .map(|s| s.parse().map_err(|e| Failure::usage(format!("{e}"))))
            .collect::<Result<_, _>>()?
    };
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be positive"));
    }
    let cfg = CheckConfig {
        trials: a.trials,
        seed: a.seed,
    };
    let verdicts: Vec<PropertyVerdict> = kinds
        .iter()
        .flat_map(|k| props.iter().map(move |p| (*k, *p)))
        .map(|(k, p)| check(&Logic::new(k), p, &cfg))
        .collect();
    let text = match a.report {
        ReportFormat::Text => {
            let mut s = matrix_text(&verdicts);
            s.push('\n');
            for v in &verdicts {
                s.push_str(&v.to_line());
                s.push('\n');
            }
            s
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&verdicts).expect("verdicts serialize");
            s.push('\n');
            s
        }
    };
    write_out(None, &text, out)
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = load_spec(&a.spec)?;
    let logic = a.logic.logic()?;
    let net = DenseNetwork::load(&a.net)?;
    let data = Dataset::load_csv(&a.data)?;
    let ctx = load_ctx(Some(&a.ctx))?;
    let cfg = TrainConfig {
        alpha: a.alpha,
        beta: a.beta,
        epochs: a.epochs,
        batch_size: a.batch_size,
        lr: a.lr,
        seed: a.seed,
        eval_samples: a.eval_samples,
        dl_samples: a.dl_samples,
        ..TrainConfig::default()
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let (trained, report) = train(&spec, &net, &data, &ctx, logic, &cfg)?;
    write_out(a.report.as_deref(), &report.to_csv_string(), out)?;
    if let Some(p) = &a.save_net {
        trained.save(p)?;
    }
    Ok(())
}

fn cmd_gen_data(a: &GenDataArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if !(a.margin > 0.0) {
        return Err(Failure::usage("--margin must be positive"));
    }
    let data = make_synthetic_dataset(a.seed, a.points, a.margin);
    write_out(a.output.as_deref(), &data.to_csv_string(), out)
}

fn report(f: &Failure, json: bool, err: &mut dyn Write) {
    if json {
        let _ = writeln!(err, "{}", serde_json::to_string(f).expect("failure serializes"));
    } else {
        let _ = writeln!(err, "error[{}]: {}", f.code, f.message);
    }
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check { spec } => cmd_check(spec, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Compile(a) => cmd_compile(a, out),
        Command::Props(a) => cmd_props(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::GenData(a) => cmd_gen_data(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            report(&f, cli.json_errors, err);
            f.exit
        }
    }
}
