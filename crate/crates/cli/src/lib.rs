//! Command-line front end for the `qitn` toolkit.

pub mod error;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qitn::optimize::{
    brute_force_qudo, brute_force_tsp, solve_qudo, solve_qudo_with_limits, solve_tsp, IteConfig,
    Readout, Solution,
};
use qitn::{
    apply_mpo_to_product_capped, compress_dataset, compress_layer, product_feature_map,
    CompressionReport, ShapePlan, SiteKernel, TruncationPolicy, DEFAULT_DENSE_CAP,
};
use serde::Serialize;

pub use error::CliError;
use format::{LayerDoc, TensorFormat, Train, TrainDoc};

#[derive(Parser, Debug)]
#[command(name = "qitn", version, about = "Tensor-train compression, kernels and ITE optimization")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a tensor file into a tensor train.
    Compress(CompressArgs),
    /// Densify a train file (an operator becomes its (out, in) matrix).
    Reconstruct(ReconstructArgs),
    /// Compress a dense layer `A x + c` into an operator train and a bias train.
    LayerCompress(LayerArgs),
    /// Apply an operator train to a product feature map of an input vector.
    KernelApply(KernelArgs),
    /// Minimize a nearest-neighbor discrete problem by imaginary time evolution.
    QudoSolve(QudoSolveArgs),
    /// Solve a travelling-salesman instance by imaginary time evolution.
    TspSolve(SolveArgs),
    /// Exhaustive reference solution.
    Oracle(OracleArgs),
    /// Convert a tensor file between the text and binary forms.
    Convert(ConvertArgs),
}

#[derive(Args, Debug)]
struct TruncationArgs {
    /// Largest bond dimension kept (unbounded when absent).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_bond: Option<u64>,
    /// Relative singular-value cutoff.
    #[arg(long, default_value_t = 0.0, value_parser = parse_nonnegative)]
    tol: f64,
}

impl TruncationArgs {
    fn policy(&self) -> Result<TruncationPolicy, CliError> {
        TruncationPolicy::new(self.max_bond.map(|b| b as usize), self.tol)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
struct CompressArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Reshape the input to these dimensions first.
    #[arg(long, value_delimiter = ',')]
    factor_dims: Option<Vec<usize>>,
    #[command(flatten)]
    truncation: TruncationArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TensorFormat::Text)]
    format: TensorFormat,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP, value_parser = parse_positive_usize)]
    dense_cap: usize,
}

#[derive(Args, Debug)]
struct LayerArgs {
    /// Weight matrix, shape (outputs, inputs).
    #[arg(long)]
    matrix: PathBuf,
    /// Bias vector; zero when absent.
    #[arg(long)]
    bias: Option<PathBuf>,
    /// Number of sites for an automatic factorization.
    #[arg(long, default_value_t = 2, value_parser = parse_positive_usize, conflicts_with_all = ["row_factors", "col_factors"])]
    sites: usize,
    #[arg(long, value_delimiter = ',', requires = "col_factors")]
    row_factors: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', requires = "row_factors")]
    col_factors: Option<Vec<usize>>,
    #[command(flatten)]
    truncation: TruncationArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelChoice {
    /// `x ↦ (x, 1)`
    Product,
    /// `x ↦ (cos(πx/2), sin(πx/2))`
    Cosine,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long)]
    mpo: PathBuf,
    #[arg(long)]
    input_vector: PathBuf,
    #[arg(long, value_enum, default_value_t = KernelChoice::Product)]
    site_kernel: KernelChoice,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TensorFormat::Text)]
    format: TensorFormat,
    /// Element limit for any intermediate.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP, value_parser = parse_positive_usize)]
    dense_cap: usize,
    /// Sidecar with the size of every intermediate.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReadoutChoice {
    Exact,
    Greedy,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Imaginary-time strength; by default 10 over the spread of the cost tables.
    #[arg(long, value_parser = parse_positive)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = ReadoutChoice::Exact)]
    readout: ReadoutChoice,
    #[command(flatten)]
    truncation: TruncationArgs,
    /// Element limit for exact readout.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP, value_parser = parse_positive_usize)]
    dense_cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QudoSolveArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Per-value occurrence limits, one per value.
    #[arg(long, value_delimiter = ',')]
    limits: Option<Vec<usize>>,
}

impl SolveArgs {
    fn config(&self) -> Result<IteConfig, CliError> {
        let mut cfg = IteConfig {
            policy: self.truncation.policy()?,
            readout: match self.readout {
                ReadoutChoice::Exact => Readout::Exact,
                ReadoutChoice::Greedy => Readout::Greedy,
            },
            dense_cap: self.dense_cap,
            ..IteConfig::default()
        };
        if let Some(t) = self.tau {
            cfg = cfg.with_tau(t).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    Qudo,
    Tsp,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: TensorFormat,
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a finite nonnegative number, got {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a finite positive number, got {s}"))
    }
}

fn parse_positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(x) => Ok(x),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    dense_params: usize,
    compressed_params: usize,
    compression_ratio: f64,
    error_bound: f64,
    relative_error: Option<f64>,
    bond_dims: &'a [usize],
    discarded: &'a [f64],
}

fn report_doc<'a>(r: &'a CompressionReport, bond_dims: &'a [usize]) -> ReportDoc<'a> {
    ReportDoc {
        dense_params: r.dense_params,
        compressed_params: r.compressed_params,
        compression_ratio: r.compression_ratio(),
        error_bound: r.error_bound,
        relative_error: r.relative_error,
        bond_dims,
        discarded: &r.discarded,
    }
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    configuration: &'a [usize],
    cost: f64,
    method: &'static str,
}

fn solution_bytes(s: &Solution) -> Result<Vec<u8>, CliError> {
    format::to_json_bytes(&SolutionDoc {
        configuration: &s.configuration,
        cost: s.cost,
        method: s.method.as_str(),
    })
}

/// Destination files, written only after every computation has succeeded.
struct Outputs(Vec<(Option<PathBuf>, Vec<u8>)>);

impl Outputs {
    fn write(self) -> Result<(), CliError> {
        for (path, bytes) in self.0 {
            write_to(path.as_deref(), &bytes)?;
        }
        Ok(())
    }
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Output(e.to_string())),
    }
}

fn with_report(main: (Option<PathBuf>, Vec<u8>), report: Option<(PathBuf, Vec<u8>)>) -> Outputs {
    let mut v = vec![main];
    if let Some((p, b)) = report {
        v.push((Some(p), b));
    }
    Outputs(v)
}

fn compress(a: &CompressArgs) -> Result<Outputs, CliError> {
    let policy = a.truncation.policy()?;
    let t = format::read_tensor(&a.input)?;
    let (train, report) = compress_dataset(&t, a.factor_dims.as_deref(), &policy)?;
    let body = format::to_json_bytes(&TrainDoc::from_mps(&train)?)?;
    let rep = match &a.report {
        Some(p) => Some((p.clone(), format::to_json_bytes(&report_doc(&report, &train.bond_dims()))?)),
        None => None,
    };
    Ok(with_report((a.output.clone(), body), rep))
}

fn reconstruct(a: &ReconstructArgs) -> Result<Outputs, CliError> {
    let dense = match format::read_train(&a.input)? {
        Train::Mps(t) => t.to_dense_capped(a.dense_cap)?,
        Train::Mpo(op) => op.to_matrix_capped(a.dense_cap)?,
    };
    Ok(Outputs(vec![(a.output.clone(), format::encode_tensor(&dense, a.format)?)]))
}

fn layer_compress(a: &LayerArgs) -> Result<Outputs, CliError> {
    let policy = a.truncation.policy()?;
    let m = format::read_tensor(&a.matrix)?;
    if m.rank() != 2 {
        return Err(CliError::Input(format!("weight matrix has shape {:?}", m.shape())));
    }
    let (rows, cols) = (m.shape()[0], m.shape()[1]);
    let bias = match &a.bias {
        Some(p) => {
            let b = format::read_tensor(p)?;
            if b.rank() != 1 {
                return Err(CliError::Input(format!("bias has shape {:?}", b.shape())));
            }
            b.into_data()
        }
        None => vec![0.0; rows],
    };
    let plan = match (&a.row_factors, &a.col_factors) {
        (Some(r), Some(c)) => ShapePlan::new(r.clone(), c.clone()),
        _ => ShapePlan::balanced(rows, cols, a.sites),
    }?;
    let (layer, report) = compress_layer(&m, &bias, &plan, &policy)?;
    let doc = LayerDoc {
        row_factors: plan.row_factors().to_vec(),
        col_factors: plan.col_factors().to_vec(),
        pairing: plan.pairing().to_vec(),
        weights: TrainDoc::from_mpo(&layer.weights)?,
        bias: TrainDoc::from_mps(&layer.bias)?,
    };
    let body = format::to_json_bytes(&doc)?;
    let rep = match &a.report {
        Some(p) => Some((
            p.clone(),
            format::to_json_bytes(&report_doc(&report, &layer.weights.bond_dims()))?,
        )),
        None => None,
    };
    Ok(with_report((a.output.clone(), body), rep))
}

#[derive(Serialize)]
struct KernelReport<'a> {
    intermediate_sizes: &'a [usize],
    peak: usize,
}

fn kernel_apply(a: &KernelArgs) -> Result<Outputs, CliError> {
    let op = format::read_mpo(&a.mpo)?;
    let x = format::read_tensor(&a.input_vector)?;
    if x.rank() != 1 {
        return Err(CliError::Input(format!("input vector has shape {:?}", x.shape())));
    }
    let kernel = match a.site_kernel {
        KernelChoice::Product => SiteKernel::Affine,
        KernelChoice::Cosine => SiteKernel::Cosine,
    };
    let ps = product_feature_map(x.data(), &vec![kernel; x.len()])?;
    let app = apply_mpo_to_product_capped(&op, &ps, a.dense_cap)?;
    let body = format::encode_tensor(&app.result, a.format)?;
    let rep = match &a.report {
        Some(p) => Some((
            p.clone(),
            format::to_json_bytes(&KernelReport {
                intermediate_sizes: &app.intermediate_sizes,
                peak: app.peak(),
            })?,
        )),
        None => None,
    };
    Ok(with_report((a.output.clone(), body), rep))
}

fn qudo_solve(a: &QudoSolveArgs) -> Result<Outputs, CliError> {
    let cfg = a.solve.config()?;
    let p = format::read_qudo(&a.solve.problem)?;
    let s = match &a.limits {
        Some(limits) => solve_qudo_with_limits(&p, limits, &cfg)?,
        None => solve_qudo(&p, &cfg)?,
    };
    Ok(Outputs(vec![(a.solve.output.clone(), solution_bytes(&s)?)]))
}

fn tsp_solve(a: &SolveArgs) -> Result<Outputs, CliError> {
    let cfg = a.config()?;
    let (costs, variant) = format::read_tsp(&a.problem)?;
    let s = solve_tsp(&costs, variant, &cfg)?;
    Ok(Outputs(vec![(a.output.clone(), solution_bytes(&s)?)]))
}

fn oracle(a: &OracleArgs) -> Result<Outputs, CliError> {
    let s = match a.kind {
        OracleKind::Qudo => brute_force_qudo(&format::read_qudo(&a.problem)?)?,
        OracleKind::Tsp => {
            let (costs, variant) = format::read_tsp(&a.problem)?;
            brute_force_tsp(&costs, variant)?
        }
    };
    Ok(Outputs(vec![(a.output.clone(), solution_bytes(&s)?)]))
}

fn convert(a: &ConvertArgs) -> Result<Outputs, CliError> {
    let t = format::read_tensor(&a.input)?;
    Ok(Outputs(vec![(a.output.clone(), format::encode_tensor(&t, a.format)?)]))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let outputs = match &cli.command {
        Command::Compress(a) => compress(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::LayerCompress(a) => layer_compress(a),
        Command::KernelApply(a) => kernel_apply(a),
        Command::QudoSolve(a) => qudo_solve(a),
        Command::TspSolve(a) => tsp_solve(a),
        Command::Oracle(a) => oracle(a),
        Command::Convert(a) => convert(a),
    }?;
    outputs.write()
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qitn: {e}");
            e.exit_code()
        }
    }
}

