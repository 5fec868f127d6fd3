//! `graphheat`: heat content, kernels, flux and surgery on metric graphs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse/validation
//! error, 3 term budget exceeded.

// `!(x > 0.0)` rejects NaN inputs, unlike `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphheat_core::graph::{EdgeId, GraphPoint, MetricGraph, RegionSpec, VertexId};
use graphheat_core::heat::{self, EvalConfig, EvalError, Method};
use graphheat_core::spectral::SpectralModel;
use serde::Deserialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "graphheat", version, about = "Heat content of compact metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    PathSum,
    Spectral,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::PathSum => Method::PathSum,
            MethodArg::Spectral => Method::Spectral,
            MethodArg::Auto => Method::Auto,
        }
    }
}

/// Flags shared by the evaluating subcommands; `--config FILE` supplies the
/// same fields as defaults, explicit flags win.
#[derive(Args)]
struct EvalArgs {
    /// Graph file (JSON)
    #[arg(short = 'g', long = "graph")]
    graph: PathBuf,
    /// Absolute tolerance for the certified error bound
    #[arg(long)]
    tol: Option<f64>,
    /// Evaluation method
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Worker threads for the path sums (env GRAPHHEAT_THREADS as fallback)
    #[arg(long)]
    threads: Option<usize>,
    /// Optional config file with the same fields as the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
struct ConfigFile {
    tol: Option<f64>,
    method: Option<String>,
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Heat content at one time
    HeatContent {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(short = 't', long = "time")]
        t: f64,
    },
    /// Heat content over a time range, written as CSV
    Sweep {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        steps: usize,
        /// Logarithmic spacing
        #[arg(long)]
        log: bool,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Pointwise heat kernel p_t(x, y)
    Kernel {
        #[command(flatten)]
        eval: EvalArgs,
        /// Point as EDGE:OFFSET
        #[arg(long)]
        x: String,
        /// Point as EDGE:OFFSET
        #[arg(long)]
        y: String,
        #[arg(short = 't', long = "time")]
        t: f64,
    },
    /// Heat flux out of a region
    Flux {
        #[command(flatten)]
        eval: EvalArgs,
        /// Region as comma-separated EDGE:A:B intervals
        #[arg(long)]
        region: String,
        #[arg(short = 't', long = "time")]
        t: f64,
    },
    /// Derivative of Q_t under lengthening one edge
    Derivative {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        edge: usize,
        #[arg(short = 't', long = "time")]
        t: f64,
    },
    /// Apply a surgery operation and write the transformed graph
    Surgery {
        /// Graph file (JSON)
        #[arg(short = 'g', long = "graph")]
        graph: PathBuf,
        #[arg(long)]
        op: SurgeryOp,
        /// Edge id (loop-cut, lengthen, subdivide)
        #[arg(long)]
        edge: Option<usize>,
        /// Vertex id (add-dirichlet) or gluing point (attach)
        #[arg(long)]
        vertex: Option<usize>,
        /// Reflection vertices, comma separated (mirror)
        #[arg(long)]
        vertices: Option<String>,
        /// Number of mirror copies
        #[arg(long)]
        copies: Option<usize>,
        /// Pendant graph file (attach)
        #[arg(long)]
        pendant: Option<PathBuf>,
        /// Root vertex of the pendant (attach)
        #[arg(long)]
        root: Option<usize>,
        /// Amount (lengthen) or factor (scale) or offset (subdivide)
        #[arg(long)]
        amount: Option<f64>,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Run the verification suites; exit 0 iff every check passes
    Verify {
        /// Graph file (JSON)
        #[arg(short = 'g', long = "graph")]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: verify::Suite,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Path-sum vs spectral value and their gap
    OracleCompare {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(short = 't', long = "time")]
        t: f64,
        /// Mesh size for the spectral model
        #[arg(long)]
        mesh: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SurgeryOp {
    LoopCut,
    Mirror,
    Attach,
    AddDirichlet,
    Lengthen,
    Scale,
    Subdivide,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match e {
            EvalError::BudgetExceeded(_) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<graphheat_core::graph::GraphError> for CliError {
    fn from(e: graphheat_core::graph::GraphError) -> Self {
        CliError { code: 2, message: e.to_string() }
    }
}

impl From<graphheat_core::spectral::SpectralError> for CliError {
    fn from(e: graphheat_core::spectral::SpectralError) -> Self {
        CliError { code: 2, message: e.to_string() }
    }
}

/// Full-precision numeric formatting (17 significant digits) to keep golden
/// files stable.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn load_graph(path: &Path) -> Result<MetricGraph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    MetricGraph::from_json_str(&text)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn default_threads() -> usize {
    std::env::var("GRAPHHEAT_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn build_config(eval: &EvalArgs) -> Result<EvalConfig, CliError> {
    let file: ConfigFile = match &eval.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let mut cfg = EvalConfig::default();
    if let Some(tol) = eval.tol.or(file.tol) {
        if !(tol > 0.0) {
            return Err(CliError::parse("tolerance must be positive"));
        }
        cfg.tolerance = tol;
    }
    cfg.method = match (&eval.method, file.method.as_deref()) {
        (Some(m), _) => (*m).into(),
        (None, Some("path-sum")) => Method::PathSum,
        (None, Some("spectral")) => Method::Spectral,
        (None, Some("auto")) | (None, None) => Method::Auto,
        (None, Some(other)) => return Err(CliError::parse(format!("unknown method {other:?}"))),
    };
    cfg.threads = eval.threads.or(file.threads).unwrap_or_else(default_threads);
    Ok(cfg)
}

fn parse_point(s: &str) -> Result<GraphPoint, CliError> {
    let (e, off) = s
        .split_once(':')
        .ok_or_else(|| CliError::parse(format!("point {s:?} must be EDGE:OFFSET")))?;
    Ok(GraphPoint::new(
        EdgeId(e.parse().map_err(|_| CliError::parse(format!("bad edge id {e:?}")))?),
        off.parse().map_err(|_| CliError::parse(format!("bad offset {off:?}")))?,
    ))
}

fn parse_region(s: &str) -> Result<RegionSpec, CliError> {
    let mut intervals = Vec::new();
    for part in s.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(CliError::parse(format!("region entry {part:?} must be EDGE:A:B")));
        }
        let e: usize =
            fields[0].parse().map_err(|_| CliError::parse(format!("bad edge id {:?}", fields[0])))?;
        let a: f64 =
            fields[1].parse().map_err(|_| CliError::parse(format!("bad offset {:?}", fields[1])))?;
        let b: f64 =
            fields[2].parse().map_err(|_| CliError::parse(format!("bad offset {:?}", fields[2])))?;
        intervals.push((EdgeId(e), a, b));
    }
    Ok(RegionSpec::new(intervals))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::PathSum => "path_sum",
        Method::Spectral => "spectral",
        Method::Auto => "auto",
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::HeatContent { eval, t } => {
            let g = load_graph(&eval.graph)?;
            let cfg = build_config(&eval)?;
            let hv = heat::heat_content(&g, t, &cfg)?;
            println!("value {}", fmt(hv.value));
            println!("error_bound {}", fmt(hv.error_bound));
            println!("method {}", method_name(hv.method));
        }
        Command::Sweep { eval, t_min, t_max, steps, log, out } => {
            if !(t_min > 0.0 && t_max > t_min && steps >= 2) {
                return Err(CliError::parse("need 0 < t-min < t-max and steps >= 2"));
            }
            let g = load_graph(&eval.graph)?;
            let cfg = build_config(&eval)?;
            let mut csv = String::from("t,value,error_bound,method\n");
            for i in 0..steps {
                let frac = i as f64 / (steps - 1) as f64;
                let t = if log {
                    (t_min.ln() + frac * (t_max.ln() - t_min.ln())).exp()
                } else {
                    t_min + frac * (t_max - t_min)
                };
                let hv = heat::heat_content(&g, t, &cfg)?;
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt(t),
                    fmt(hv.value),
                    fmt(hv.error_bound),
                    method_name(hv.method)
                ));
            }
            fs::write(&out, csv).map_err(|e| CliError::parse(format!("{}: {e}", out.display())))?;
            println!("wrote {}", out.display());
        }
        Command::Kernel { eval, x, y, t } => {
            let g = load_graph(&eval.graph)?;
            let cfg = build_config(&eval)?;
            let hv = heat::heat_kernel(&g, parse_point(&x)?, parse_point(&y)?, t, &cfg)?;
            println!("value {}", fmt(hv.value));
            println!("error_bound {}", fmt(hv.error_bound));
        }
        Command::Flux { eval, region, t } => {
            let g = load_graph(&eval.graph)?;
            let cfg = build_config(&eval)?;
            let spec = parse_region(&region)?;
            let hv = heat::boundary_flux(&g, &spec, t, &cfg)?;
            println!("flux {}", fmt(hv.value));
            println!("scaled {}", fmt(std::f64::consts::PI.sqrt() / t.sqrt() * hv.value));
            println!("error_bound {}", fmt(hv.error_bound));
        }
        Command::Derivative { eval, edge, t } => {
            let g = load_graph(&eval.graph)?;
            let cfg = build_config(&eval)?;
            let hv = heat::hadamard_derivative(&g, EdgeId(edge), t, &cfg)?;
            println!("value {}", fmt(hv.value));
            println!("error_bound {}", fmt(hv.error_bound));
        }
        Command::Surgery { graph, op, edge, vertex, vertices, copies, pendant, root, amount, out } => {
            let g = load_graph(&graph)?;
            let need_edge = || {
                edge.map(EdgeId)
                    .ok_or_else(|| CliError::parse("this operation needs --edge"))
            };
            let need_amount =
                |what: &str| amount.ok_or_else(|| CliError::parse(format!("missing --amount ({what})")));
            let results: Vec<MetricGraph> = match op {
                SurgeryOp::LoopCut => vec![g.midpoint_loop_cut(need_edge()?)?],
                SurgeryOp::Mirror => {
                    let set: Vec<VertexId> = vertices
                        .as_deref()
                        .ok_or_else(|| CliError::parse("mirror needs --vertices"))?
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse()
                                .map(VertexId)
                                .map_err(|_| CliError::parse(format!("bad vertex id {s:?}")))
                        })
                        .collect::<Result<_, _>>()?;
                    let m = copies.ok_or_else(|| CliError::parse("mirror needs --copies"))?;
                    vec![g.mirror(&set, m)?]
                }
                SurgeryOp::Attach => {
                    let path = pendant.ok_or_else(|| CliError::parse("attach needs --pendant"))?;
                    let text = fs::read_to_string(&path)
                        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
                    let p = MetricGraph::from_json_str_unvalidated(&text)
                        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
                    let at = vertex.ok_or_else(|| CliError::parse("attach needs --vertex"))?;
                    let r = root.ok_or_else(|| CliError::parse("attach needs --root"))?;
                    vec![g.attach_pendant(VertexId(at), &p, VertexId(r))?]
                }
                SurgeryOp::AddDirichlet => {
                    let v = vertex.ok_or_else(|| CliError::parse("add-dirichlet needs --vertex"))?;
                    g.add_dirichlet(VertexId(v))?
                }
                SurgeryOp::Lengthen => vec![g.lengthen_edge(need_edge()?, need_amount("length to add")?)?],
                SurgeryOp::Scale => vec![g.scale(need_amount("scale factor")?)?],
                SurgeryOp::Subdivide => vec![g.subdivide(need_edge()?, need_amount("offset")?)?],
            };
            if results.len() == 1 {
                fs::write(&out, results[0].to_json_string())
                    .map_err(|e| CliError::parse(format!("{}: {e}", out.display())))?;
                println!("wrote {}", out.display());
            } else {
                for (i, part) in results.iter().enumerate() {
                    let path = out.with_extension(format!("{i}.json"));
                    fs::write(&path, part.to_json_string())
                        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
                    println!("wrote {}", path.display());
                }
            }
        }
        Command::Verify { graph, suite, threads } => {
            let g = load_graph(&graph)?;
            let threads = threads.unwrap_or_else(default_threads);
            let ok = verify::run_suite(&g, suite, threads).map_err(CliError::from)?;
            if !ok {
                return Err(CliError { code: 1, message: "verification failed".to_string() });
            }
        }
        Command::OracleCompare { eval, t, mesh } => {
            let g = load_graph(&eval.graph)?;
            let mut cfg = build_config(&eval)?;
            cfg.method = Method::PathSum;
            let hv = heat::heat_content(&g, t, &cfg)?;
            let model = SpectralModel::build(&g, mesh)?;
            let spectral = model.eigen_heat_content(t, 1e-12 * g.volume())?;
            println!("path_sum {}", fmt(hv.value));
            println!("spectral {}", fmt(spectral));
            println!("gap {}", fmt((hv.value - spectral).abs()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
