use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxpoly::bounds::{bound_report, witness_polynomial, Side};
use maxpoly::experiments::{self, ExperimentConfig};
use maxpoly::leastsq::{condition_with_bracket, fit, sup_error};
use maxpoly::mockcheb::mock_chebyshev_subset;
use maxpoly::poly::lebesgue_constant;
use maxpoly::remez::{compute_b, compute_b_point, BOptions, RemezOptions, Variant};
use maxpoly::{Error, NodeSet, Preset, WeightSpec};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "maxpoly",
    version,
    about = "Maximal polynomials on arbitrary grids"
)]
struct Cli {
    /// Worker threads for the per-subinterval solves (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a node set.
    Nodes(NodesArgs),
    /// B(M, N): the maximal growth over [-1, 1].
    Bmn(BmnArgs),
    /// B(M, N, x) at a single point.
    Bmnx(BmnxArgs),
    /// Lebesgue constant of the grid.
    Lebesgue(GridOnly),
    /// Lower and upper bounds for B(M, N).
    Bounds(WithDegree),
    /// The explicit polynomial behind the lower bound.
    Witness(WitnessArgs),
    /// Mock-Chebyshev subset, if one is guaranteed.
    Mockcheb(WithDegree),
    /// Least-squares fit with its condition number.
    Lsq(LsqArgs),
    /// Run a named block of the experiment config (or `all`).
    Exp(ExpArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Named weight: U, C1, C2, UC or OC.
    #[arg(long, conflicts_with_all = ["alpha", "beta", "grid"])]
    preset: Option<Preset>,
    /// Jacobi exponent at +1.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Jacobi exponent at -1.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Number of subintervals (M + 1 nodes).
    #[arg(long = "M", short = 'M')]
    m: Option<usize>,
    /// Explicit nodes: JSON from `nodes --format json`, or CSV/plain numbers.
    #[arg(long, conflicts_with = "m")]
    grid: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct NodesArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct GridOnly {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct WithDegree {
    #[command(flatten)]
    grid: GridArgs,
    /// Polynomial degree.
    #[arg(long = "N", short = 'N')]
    n: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Second)]
    variant: VariantArg,
    /// Solve every subinterval even on symmetric grids.
    #[arg(long)]
    no_symmetry: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    First,
    Second,
}

impl SolverArgs {
    fn remez(&self) -> RemezOptions {
        RemezOptions::with_variant(match self.variant {
            VariantArg::First => Variant::First,
            VariantArg::Second => Variant::Second,
        })
    }

    fn b_options(&self) -> BOptions {
        BOptions {
            remez: self.remez(),
            symmetry: !self.no_symmetry,
            ..BOptions::default()
        }
    }
}

#[derive(Args)]
struct BmnArgs {
    #[command(flatten)]
    base: WithDegree,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BmnxArgs {
    #[command(flatten)]
    base: WithDegree,
    #[command(flatten)]
    solver: SolverArgs,
    /// Evaluation point in [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    base: WithDegree,
    #[arg(long, default_value = "minus")]
    side: Side,
    /// Samples of the polynomial in the CSV output.
    #[arg(long, default_value_t = 1001)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Exp,
    Runge,
}

impl Target {
    fn eval(self, x: f64) -> f64 {
        match self {
            Target::Exp => x.exp(),
            Target::Runge => experiments::runge(x),
        }
    }
}

#[derive(Args)]
struct LsqArgs {
    #[command(flatten)]
    base: WithDegree,
    /// Function sampled at the nodes.
    #[arg(long = "function", value_enum, default_value_t = Target::Exp, conflicts_with = "samples")]
    target: Target,
    /// File with M + 1 sample values instead of a built-in function.
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Args)]
struct ExpArgs {
    /// Block name, block kind (growth, scaling, ...) or `all`.
    name: String,
    #[arg(long, default_value = "configs/experiments.toml")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Failure with the exit code it maps to.
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> String {
        match self {
            Failure::Usage(_) => "InvalidArgument".into(),
            Failure::Lib(e) => format!("{e:?}")
                .split([' ', '(', '{'])
                .next()
                .unwrap_or("Error")
                .to_string(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!(
                "{}",
                json!({"error": "InvalidArgument", "message": e.to_string()})
            );
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({"error": f.kind(), "message": f.message()}));
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Nodes(a) => {
            let nodes = a.grid.build()?;
            let text = match a.format {
                Format::Csv => nodes.to_csv(),
                Format::Json => nodes.to_json()?,
            };
            emit(a.out.as_deref(), &text)
        }
        Command::Bmn(a) => {
            let nodes = a.base.grid.build()?;
            let res = compute_b(&nodes, a.base.n, &a.solver.b_options())?;
            let text = match a.base.out.format {
                Format::Csv => res.to_csv(),
                Format::Json => res.to_json()?,
            };
            emit(a.base.out.out.as_deref(), &text)
        }
        Command::Bmnx(a) => {
            let nodes = a.base.grid.build()?;
            let b = compute_b_point(&nodes, a.base.n, a.x, &a.solver.remez())?;
            let text = match a.base.out.format {
                Format::Csv => format!(
                    "M,N,x,B\n{},{},{},{}\n",
                    nodes.intervals(),
                    a.base.n,
                    a.x,
                    b
                ),
                Format::Json => {
                    pretty(&json!({"M": nodes.intervals(), "N": a.base.n, "x": a.x, "B": b}))?
                }
            };
            emit(a.base.out.out.as_deref(), &text)
        }
        Command::Lebesgue(a) => {
            let nodes = a.grid.build()?;
            let e = lebesgue_constant(nodes.points());
            let text = match a.out.format {
                Format::Csv => format!(
                    "M,lebesgue,argmax_x\n{},{},{}\n",
                    nodes.intervals(),
                    e.value,
                    e.x
                ),
                Format::Json => {
                    pretty(&json!({"M": nodes.intervals(), "lebesgue": e.value, "argmax_x": e.x}))?
                }
            };
            emit(a.out.out.as_deref(), &text)
        }
        Command::Bounds(a) => {
            let nodes = a.grid.build()?;
            let rep = bound_report(&nodes, a.n)?;
            let text = match a.out.format {
                Format::Json => rep.to_json()?,
                Format::Csv => {
                    let v = serde_json::to_value(&rep).map_err(Error::from)?;
                    flat_csv(&v)
                }
            };
            emit(a.out.out.as_deref(), &text)
        }
        Command::Witness(a) => {
            let nodes = a.base.grid.build()?;
            let w = witness_polynomial(&nodes, a.base.n, a.side)?;
            let text = match a.base.out.format {
                Format::Json => pretty(&json!({
                    "side": w.side.name(),
                    "K": w.k,
                    "log10_Q": w.log10_q,
                    "grid_max": w.grid_max,
                    "probe": w.probe,
                    "probe_value": w.probe_value,
                    "sup": w.sup,
                }))?,
                Format::Csv => {
                    let count = a.samples.max(2);
                    let mut s = String::from("x,p\n");
                    for i in 0..count {
                        let x = -1.0 + 2.0 * i as f64 / (count - 1) as f64;
                        s.push_str(&format!("{},{}\n", x, w.poly.eval(x)));
                    }
                    s
                }
            };
            emit(a.base.out.out.as_deref(), &text)
        }
        Command::Mockcheb(a) => {
            let nodes = a.grid.build()?;
            let found = mock_chebyshev_subset(&nodes, a.n);
            let text = match (a.out.format, &found) {
                (Format::Csv, Some(s)) => s.to_csv(),
                (Format::Csv, None) => String::from("n,x,z_lo,z_hi\n"),
                (Format::Json, _) => pretty(&json!({
                    "exists": found.is_some(),
                    "zeta": maxpoly::bounds::zeta(&nodes),
                    "indices": found.as_ref().map(|s| &s.indices),
                    "points": found.as_ref().map(|s| &s.points),
                }))?,
            };
            emit(a.out.out.as_deref(), &text)
        }
        Command::Lsq(a) => {
            let nodes = a.base.grid.build()?;
            let data: Vec<f64> = match &a.samples {
                Some(path) => read_numbers(path)?,
                None => nodes.points().iter().map(|&x| a.target.eval(x)).collect(),
            };
            if data.len() != nodes.points().len() {
                return Err(Failure::Usage(format!(
                    "expected {} samples, got {}",
                    nodes.points().len(),
                    data.len()
                )));
            }
            let f = fit(&nodes, a.base.n, &data)?;
            let cond = condition_with_bracket(&nodes, a.base.n)?;
            let err = a
                .samples
                .is_none()
                .then(|| sup_error(&nodes, &f, |x| a.target.eval(x), 4000));
            let text = match a.base.out.format {
                Format::Json => pretty(&json!({
                    "fit": f,
                    "kappa_inf": cond.kappa_inf,
                    "kappa_argmax_x": cond.argmax_x,
                    "kappa_bracket": cond.bracket,
                    "sup_error": err,
                }))?,
                Format::Csv => {
                    let mut s = String::from("k,coefficient\n");
                    for (k, c) in f.poly.coeffs.iter().enumerate() {
                        s.push_str(&format!("{k},{c}\n"));
                    }
                    s
                }
            };
            emit(a.base.out.out.as_deref(), &text)
        }
        Command::Exp(a) => {
            let cfg = ExperimentConfig::load(&a.config)?;
            let only = (a.name != "all").then_some(a.name.as_str());
            let manifest = experiments::run(&cfg, &a.out, only)?;
            for o in &manifest.outputs {
                println!(
                    "{} {} rows -> {}",
                    o.name,
                    o.rows,
                    a.out.join(&o.file).display()
                );
            }
            Ok(())
        }
    }
}

impl GridArgs {
    fn build(&self) -> Result<NodeSet, Failure> {
        if let Some(path) = &self.grid {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            return if text.trim_start().starts_with('{') {
                Ok(NodeSet::from_json(&text)?)
            } else {
                Ok(NodeSet::explicit(parse_numbers(&text, Some("x"))?)?)
            };
        }
        let m = self
            .m
            .ok_or_else(|| Failure::Usage("--M is required unless --grid is given".into()))?;
        if let Some(p) = self.preset {
            return Ok(NodeSet::preset(p, m)?);
        }
        let w = match (self.alpha, self.beta) {
            (None, None) => {
                return Err(Failure::Usage(
                    "give --preset, --alpha/--beta or --grid".into(),
                ))
            }
            (a, b) => WeightSpec::new(a.unwrap_or(0.0), b.unwrap_or(0.0))?,
        };
        Ok(NodeSet::from_weight(&w, m)?)
    }
}

fn read_numbers(path: &Path) -> Result<Vec<f64>, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()));
    }
    parse_numbers(&text, None)
}

/// Numbers from CSV: column `column` if the first row is a header naming
/// it, else the first field of every row.
fn parse_numbers(text: &str, column: Option<&str>) -> Result<Vec<f64>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = reader.records().peekable();
    let mut col = 0;
    if let Some(Ok(first)) = rows.peek() {
        if first.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            col = column
                .and_then(|c| first.iter().position(|h| h == c))
                .unwrap_or(0);
            rows.next();
        }
    }
    let mut out = Vec::new();
    for (i, row) in rows.enumerate() {
        let row = row.map_err(|e| Failure::Usage(e.to_string()))?;
        let Some(field) = row.get(col).filter(|f| !f.is_empty()) else {
            continue;
        };
        let v = field
            .parse::<f64>()
            .map_err(|_| Failure::Usage(format!("row {}: `{field}` is not a number", i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

/// One-row CSV from the scalar fields of a JSON object.
fn flat_csv(v: &serde_json::Value) -> String {
    let Some(obj) = v.as_object() else {
        return String::new();
    };
    let (keys, vals): (Vec<_>, Vec<_>) = obj
        .iter()
        .map(|(k, v)| {
            (
                k.clone(),
                if v.is_null() {
                    String::new()
                } else {
                    v.to_string()
                },
            )
        })
        .unzip();
    format!("{}\n{}\n", keys.join(","), vals.join(","))
}

fn pretty(v: &serde_json::Value) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v).map_err(Error::from)? + "\n")
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    let text = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Error::from)?;
            }
            fs::write(path, &text).map_err(Error::from)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    Ok(())
}
