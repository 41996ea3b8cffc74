//! The `mrct` command-line tool.
//!
//! Subcommands: `simulate` writes a labeled dense CSV; `fit`, `select-alpha`,
//! `scan-h` and `evaluate` read dense or sparse curves and write a report
//! directory. Curve indices in every output are 0-based.
//!
//! Exit codes: 0 success, 2 bad input or flags, 3 numerical or degenerate
//! failure, 4 the optimum did not converge (outputs are still written).

pub mod ingest;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::alpha_select::{
    default_alpha0, default_alpha_grid, h_scan, select_alpha, AlphaSelectionTrace,
};
use crate::coeff::{fit_coefficients, BasisSpec, CoefficientSample};
use crate::error::{MrctError, Result};
use crate::funcdata::{sample_covariance, FunctionalSample};
use crate::metrics::{confusion_rates, f_score, ise};
use crate::mrct::{default_h, AlphaSpec, MrctConfig, MrctEngine, MrctResult, Representation};
use crate::simulate::{kernel_matrix, model_dataset, Model, ModelSpec};
use report::{write_file, FitOutputs, InputEcho, Sig17};

#[derive(Debug, Parser)]
#[command(name = "mrct", version, about = "Robust covariance and outlier detection for functional data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled sample from one of the simulation models.
    Simulate(SimulateArgs),
    /// Fit the estimator and flag outliers.
    Fit(FitArgs),
    /// Choose alpha automatically and report the objective curve.
    SelectAlpha(FitArgs),
    /// Refit over a range of subset sizes.
    ScanH(ScanArgs),
    /// Fit labeled data and report detection rates.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model 1, 2 or 3.
    #[arg(long, default_value_t = 1)]
    pub model: u8,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Contamination rate.
    #[arg(long, default_value_t = 0.2)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dense,
    Sparse,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV; standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Dense)]
    pub format: Format,
    /// Dense input without a grid row carries a trailing 0/1 label column.
    #[arg(long)]
    pub labeled: bool,
    /// Maximum number of B-spline basis functions (sparse input).
    #[arg(long, default_value_t = 15)]
    pub basis_m: usize,
    #[arg(long, default_value_t = 3)]
    pub basis_degree: usize,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// Regularization parameter, or `auto`.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Subset size as a fraction of n (default 0.75).
    #[arg(long, conflicts_with = "h")]
    pub h_frac: Option<f64>,
    /// Subset size.
    #[arg(long)]
    pub h: Option<usize>,
    /// Random starts in addition to the median start.
    #[arg(long, default_value_t = 10)]
    pub n_starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.99)]
    pub cutoff_q: f64,
    /// Monte-Carlo draws for the consistency factor and the cutoff.
    #[arg(long, default_value_t = 2000)]
    pub mc_n: usize,
    /// `trace`, `trace-q=<q>` or `kurtosis`.
    #[arg(long, default_value = "trace")]
    pub selection: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Output directory.
    #[arg(long, default_value = "mrct-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Smallest subset size (default ⌈n/2⌉).
    #[arg(long)]
    pub h_min: Option<usize>,
    /// Largest subset size (default n).
    #[arg(long)]
    pub h_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub h_step: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Simulation model that generated the data, for covariance error.
    #[arg(long)]
    pub model: Option<u8>,
}

/// Curves in the representation the estimator runs on.
enum Data {
    Dense(FunctionalSample),
    Sparse(CoefficientSample),
}

impl Data {
    fn as_repr(&self) -> &dyn Representation {
        match self {
            Data::Dense(s) => s,
            Data::Sparse(s) => s,
        }
    }
}

fn usage(msg: impl Into<String>) -> MrctError {
    MrctError::Domain(msg.into())
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) => {
            buf = std::fs::read(p).map_err(|e| MrctError::Io { path: p.to_path_buf(), source: e })?
        }
        None => {
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| MrctError::Io { path: PathBuf::from("-"), source: e })?;
        }
    }
    Ok(buf)
}

fn load(args: &DataArgs) -> Result<(Data, InputEcho)> {
    let bytes = read_input(args.input.as_deref())?;
    let path = args
        .input
        .as_ref()
        .map_or_else(|| "-".to_string(), |p| p.display().to_string());
    match args.format {
        Format::Dense => {
            let s = ingest::ingest_dense(bytes.as_slice(), args.labeled)?;
            let echo = InputEcho {
                path,
                format: "dense".into(),
                n: s.n(),
                dim: s.p(),
                basis_m: None,
                basis_degree: None,
            };
            Ok((Data::Dense(s), echo))
        }
        Format::Sparse => {
            let curves = ingest::ingest_sparse(bytes.as_slice())?;
            // Cap M by the sparsest curve; below degree + 1 the fit reports
            // the offending curve instead.
            let m = args
                .basis_m
                .min(curves.min_observations())
                .max(args.basis_degree + 1);
            let (a, b) = curves.time_range();
            if !(a < b) {
                return Err(usage("all observation times coincide"));
            }
            let basis = BasisSpec::bspline(m, args.basis_degree, a, b)?;
            let s = fit_coefficients(&curves, &basis)?;
            let echo = InputEcho {
                path,
                format: "sparse".into(),
                n: s.n(),
                dim: s.m(),
                basis_m: Some(m),
                basis_degree: Some(args.basis_degree),
            };
            Ok((Data::Sparse(s), echo))
        }
    }
}

fn config(args: &EstimatorArgs, n: usize) -> Result<MrctConfig> {
    let mut cfg = MrctConfig::new(n);
    cfg.h = match (args.h, args.h_frac) {
        (Some(h), _) => h,
        (None, Some(f)) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(usage(format!("--h-frac {f} not in (0, 1]")));
            }
            default_h(n, f)
        }
        (None, None) => default_h(n, 0.75),
    };
    cfg.alpha = if args.alpha == "auto" {
        AlphaSpec::Auto
    } else {
        AlphaSpec::Fixed(
            args.alpha
                .parse()
                .map_err(|_| usage(format!("--alpha '{}' is neither a number nor auto", args.alpha)))?,
        )
    };
    cfg.n_starts = args.n_starts;
    cfg.seed = args.seed;
    cfg.cutoff_q = args.cutoff_q;
    cfg.mc_n = args.mc_n;
    cfg.mc_n_cutoff = args.mc_n;
    cfg.selection = args.selection.parse()?;
    cfg.validate(n)?;
    Ok(cfg)
}

/// Fits at the configured alpha, running selection first for `auto`.
pub fn estimate<R: Representation + ?Sized>(
    data: &R,
    cfg: &MrctConfig,
) -> Result<(MrctResult, Option<AlphaSelectionTrace>)> {
    match cfg.alpha {
        AlphaSpec::Fixed(a) => Ok((MrctEngine::new(data, cfg, a)?.fit()?, None)),
        AlphaSpec::Auto => {
            let grid = default_alpha_grid();
            let mut trace = select_alpha(data, &grid, default_alpha0(data.n(), data.dim()), cfg)?;
            let fit = match trace.final_fit.take() {
                Some(f) => f,
                None => MrctEngine::new(data, cfg, trace.chosen_alpha)?.fit()?,
            };
            Ok((fit, Some(trace)))
        }
    }
}

fn ids(data: &Data) -> Option<&[String]> {
    match data {
        Data::Dense(_) => None,
        Data::Sparse(s) => Some(s.ids()),
    }
}

fn status(result: &MrctResult) -> i32 {
    if result.converged && result.k_converged {
        0
    } else {
        4
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<i32> {
    let model = Model::from_id(args.model)?;
    let s = model_dataset(&ModelSpec::new(model, args.n, args.p, args.c, args.seed))?;
    let mut text = String::from("#grid");
    for t in s.grid().points() {
        write!(text, ",{}", Sig17(*t).text().unwrap()).unwrap();
    }
    text.push_str(",label\n");
    let labels = s.labels().expect("simulated data is labeled");
    for (i, label) in labels.iter().enumerate() {
        for v in s.values().row(i).iter() {
            write!(text, "{},", Sig17(*v).text().unwrap()).unwrap();
        }
        writeln!(text, "{}", *label as u8).unwrap();
    }
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| MrctError::Io { path: p.clone(), source: e })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| MrctError::Io { path: PathBuf::from("-"), source: e })?;
        }
    }
    Ok(0)
}

fn run_fit(command: &str, args: &FitArgs) -> Result<i32> {
    let (data, echo) = load(&args.data)?;
    let cfg = config(&args.estimator, echo.n)?;
    if command == "select-alpha" && cfg.alpha != AlphaSpec::Auto {
        return Err(usage("select-alpha chooses alpha itself; drop --alpha"));
    }
    let (result, trace) = estimate(data.as_repr(), &cfg)?;
    let outputs = FitOutputs {
        command,
        input: &echo,
        config: &cfg,
        result: &result,
        ids: ids(&data),
        selection: trace.as_ref(),
    };
    report::emit_report(&outputs, &args.out)?;
    println!(
        "alpha = {} k = {} flagged {}/{}",
        result.alpha,
        result.k,
        result.n_flagged(),
        echo.n
    );
    Ok(status(&result))
}

fn run_scan(args: &ScanArgs) -> Result<i32> {
    let (data, echo) = load(&args.fit.data)?;
    let cfg = config(&args.fit.estimator, echo.n)?;
    let n = echo.n;
    let lo = args.h_min.unwrap_or(n.div_ceil(2));
    let hi = args.h_max.unwrap_or(n);
    if args.h_step == 0 || lo > hi || lo < n.div_ceil(2) || hi > n {
        return Err(usage(format!(
            "subset range {lo}..={hi} step {} must lie in [{}, {n}]",
            args.h_step,
            n.div_ceil(2)
        )));
    }
    let h_values: Vec<usize> = (lo..=hi).step_by(args.h_step).collect();
    let repr = data.as_repr();
    let (alpha, selection) = match cfg.alpha {
        AlphaSpec::Fixed(a) => (a, None),
        AlphaSpec::Auto => {
            let grid = default_alpha_grid();
            let t = select_alpha(repr, &grid, default_alpha0(repr.n(), repr.dim()), &cfg)?;
            (t.chosen_alpha, Some(t))
        }
    };
    let trace = h_scan(repr, alpha, &h_values, &cfg)?;
    write_file(&args.fit.out, "h_scan.csv", &report::h_scan_csv(&trace))?;
    if let Some(t) = &selection {
        write_file(&args.fit.out, "alpha_objective.csv", &report::alpha_objective_csv(t))?;
    }
    match trace.largest_jump() {
        Some(i) => println!(
            "alpha = {alpha}; largest objective jump between h = {} and h = {}",
            trace.h_values[i],
            trace.h_values[i + 1]
        ),
        None => println!("alpha = {alpha}; single subset size scanned"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct Evaluation {
    alpha: Sig17,
    n_flagged: usize,
    tpr: Option<Sig17>,
    fpr: Option<Sig17>,
    fnr: Option<Sig17>,
    tnr: Option<Sig17>,
    f_score: Option<Sig17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ise_clean: Option<Sig17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ise_full: Option<Sig17>,
}

fn run_evaluate(args: &EvaluateArgs) -> Result<i32> {
    if args.fit.data.format != Format::Dense {
        return Err(usage("evaluate needs dense labeled input"));
    }
    let (data, echo) = load(&args.fit.data)?;
    let Data::Dense(sample) = &data else { unreachable!() };
    let labels = sample
        .labels()
        .ok_or_else(|| usage("evaluate needs a label column"))?
        .to_vec();
    let model = args.model.map(Model::from_id).transpose()?;
    let cfg = config(&args.fit.estimator, echo.n)?;
    let (result, trace) = estimate(sample, &cfg)?;
    let rates = confusion_rates(&result.flags, &labels)?;

    let (mut ise_clean, mut ise_full) = (None, None);
    if let Some(m) = model {
        let truth = kernel_matrix(&m.kernel(), sample.grid());
        let clean: Vec<usize> = (0..sample.n()).filter(|i| !result.flags[*i]).collect();
        let all: Vec<usize> = (0..sample.n()).collect();
        ise_clean = Some(Sig17(ise(&truth, &sample_covariance(sample, &clean)?)?));
        ise_full = Some(Sig17(ise(&truth, &sample_covariance(sample, &all)?)?));
    }
    let eval = Evaluation {
        alpha: Sig17(result.alpha),
        n_flagged: result.n_flagged(),
        tpr: rates.tpr.map(Sig17),
        fpr: rates.fpr.map(Sig17),
        fnr: rates.fnr.map(Sig17),
        tnr: rates.tnr.map(Sig17),
        f_score: f_score(&rates).map(Sig17),
        ise_clean,
        ise_full,
    };
    let outputs = FitOutputs {
        command: "evaluate",
        input: &echo,
        config: &cfg,
        result: &result,
        ids: None,
        selection: trace.as_ref(),
    };
    report::emit_report(&outputs, &args.fit.out)?;
    let mut json = serde_json::to_string_pretty(&eval).expect("evaluation serializes");
    json.push('\n');
    write_file(&args.fit.out, "evaluation.json", &json)?;
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "TPR {} FPR {} F {}",
        show(rates.tpr),
        show(rates.fpr),
        show(f_score(&rates))
    );
    Ok(status(&result))
}

/// Exit code for an error.
pub fn exit_code(e: &MrctError) -> i32 {
    match e {
        MrctError::Numerical(_) | MrctError::DegenerateSubset(_) | MrctError::Estimation(_) => 3,
        MrctError::Convergence { .. } => 4,
        MrctError::Parse { .. }
        | MrctError::Domain(_)
        | MrctError::Dimension(_)
        | MrctError::UnderdeterminedCurve { .. }
        | MrctError::Io { .. } => 2,
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Fit(a) => run_fit("fit", a),
        Command::SelectAlpha(a) => run_fit("select-alpha", a),
        Command::ScanH(a) => run_scan(a),
        Command::Evaluate(a) => run_evaluate(a),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
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
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}
