use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdsvm::data::{self, CsvOptions, Dataset, LabelColumn, SimulationSpec};
use sdsvm::outliermap::{self, MapStyle};
use sdsvm::pipeline::{self, default_c_grid, CvConfig, FitConfig, FitResult};
use sdsvm::{DirectionPolicy, Error, KernelSpec};

/// Trimmed SVM classification with a Stahel–Donoho outlier map.
#[derive(Debug, Parser)]
#[command(name = "sdsvm", version)]
struct Cli {
    /// Worker threads (0 = one per core); results do not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the trimmed SVM on a dataset and print the fit report
    Fit(FitCmd),
    /// Draw the outlier map from a saved fit report or by fitting a dataset
    Map(MapCmd),
    /// Monte-Carlo study of test error across trimming fractions
    Simulate(SimulateCmd),
    /// Fit and map the planted-outlier toy dataset
    Toy(ToyCmd),
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Numeric CSV dataset with one label column
    #[arg(long, value_name = "CSV", conflicts_with = "fasta")]
    data: Option<PathBuf>,

    /// FASTA sequences (use with --labels and a spectrum kernel)
    #[arg(long, value_name = "FASTA", requires = "labels")]
    fasta: Option<PathBuf>,

    /// Two-column `id label` file for --fasta
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,

    /// Label column of --data: first, last, or a 1-based index
    #[arg(long, default_value = "last")]
    label_col: String,

    /// Two label values mapped to -1 and +1, e.g. `ER-,ER+` (default: labels are -1/1)
    #[arg(long, value_name = "NEG,POS")]
    label_coding: Option<String>,

    /// --data has a header row
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Kernel: linear, rbf, polynomial, or spectrum
    #[arg(long, default_value = "linear")]
    kernel: String,

    /// rbf width exp(-gamma |a-b|^2); polynomial scale
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,

    /// Polynomial degree
    #[arg(long, default_value_t = 3)]
    degree: u32,

    /// Polynomial offset
    #[arg(long, default_value_t = 0.0)]
    coef0: f64,

    /// Spectrum kernel substring length
    #[arg(long, default_value_t = 3)]
    kmer: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Retained fraction per group, in [0.5, 1]
    #[arg(long, default_value_t = pipeline::DEFAULT_KAPPA)]
    kappa: f64,

    #[command(flatten)]
    c: CArgs,

    /// Cross-validation folds
    #[arg(long, default_value_t = pipeline::DEFAULT_FOLDS)]
    folds: usize,

    /// Projection directions: auto (all pairs up to 100 samples, else 2000), exhaustive, or a count
    #[arg(long, default_value = "auto")]
    directions: String,

    /// Seed for direction sampling, folds and generators
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Solver KKT tolerance
    #[arg(long, default_value_t = sdsvm::svm::DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Args)]
struct CArgs {
    /// Fixed regularization C [default: 0.1 when --cv-grid is absent]
    #[arg(long = "C", value_name = "C", conflicts_with = "cv_grid")]
    c: Option<f64>,

    /// Comma-separated C values chosen by cross-validation, or `default` for 2^-5, 2^-3, ..., 2^15
    #[arg(long, value_name = "LIST")]
    cv_grid: Option<String>,
}

#[derive(Debug, Args)]
struct MapOutputArgs {
    /// Write map points as CSV
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,

    /// Write the map as SVG
    #[arg(long, value_name = "PATH")]
    out_svg: Option<PathBuf>,

    /// Label this many most outlying points (misclassified points are always labeled)
    #[arg(long, default_value_t = 5)]
    label_top: usize,

    /// Draw a dashed horizontal line at this outlyingness
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct FitCmd {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    train: TrainArgs,

    /// Write the fit report here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write map points as CSV
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MapCmd {
    /// Saved fit report to re-render without refitting
    #[arg(long, value_name = "PATH", conflicts_with_all = ["data", "fasta"])]
    fit: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    output: MapOutputArgs,
}

#[derive(Debug, Args)]
struct SimulateCmd {
    /// Plant 4 outliers per group at component means +3 (label -1) and -3 (label +1)
    #[arg(long)]
    contaminated: bool,

    /// Simulation runs
    #[arg(long, default_value_t = 50)]
    runs: usize,

    /// Comma-separated trimming fractions
    #[arg(long, default_value = "0.5,0.7,0.9,1")]
    kappas: String,

    /// Samples per group
    #[arg(long, default_value_t = 25)]
    n: usize,

    /// Dimension
    #[arg(long, default_value_t = 1000)]
    d: usize,

    /// Component mean of the positive group
    #[arg(long, default_value_t = 0.18)]
    shift: f64,

    /// Test samples per run
    #[arg(long, default_value_t = 600)]
    test_size: usize,

    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    c: CArgs,

    /// Cross-validation folds
    #[arg(long, default_value_t = pipeline::DEFAULT_FOLDS)]
    folds: usize,

    /// Projection directions: auto, exhaustive, or a count
    #[arg(long, default_value = "auto")]
    directions: String,

    /// Root seed of every run
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Solver KKT tolerance
    #[arg(long, default_value_t = sdsvm::svm::DEFAULT_TOLERANCE)]
    tol: f64,

    /// Write `run,kappa,error` rows here instead of standard output
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ToyCmd {
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    output: MapOutputArgs,

    /// Also write the fit report
    #[arg(long, value_name = "PATH")]
    out_fit: Option<PathBuf>,

    /// Also write the generated dataset as CSV
    #[arg(long, value_name = "PATH")]
    out_data: Option<PathBuf>,
}

fn kernel_spec(args: &KernelArgs) -> Result<KernelSpec, Error> {
    match args.kernel.as_str() {
        "linear" => Ok(KernelSpec::Linear),
        "rbf" => KernelSpec::rbf(args.gamma),
        "polynomial" | "poly" => KernelSpec::polynomial(args.gamma, args.degree, args.coef0),
        "spectrum" => KernelSpec::spectrum(args.kmer),
        other => Err(invalid("kernel", format!("unknown kernel {other:?} (linear, rbf, polynomial, spectrum)"))),
    }
}

fn invalid(name: &'static str, message: String) -> Error {
    Error::InvalidParameter { name, message }
}

fn parse_list(name: &'static str, text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(name, format!("not a number: {p:?}"))))
        .collect()
}

fn c_grid(args: &CArgs) -> Result<Vec<f64>, Error> {
    match (&args.c, &args.cv_grid) {
        (Some(c), _) => Ok(vec![*c]),
        (None, Some(g)) if g == "default" => Ok(default_c_grid()),
        (None, Some(g)) => parse_list("cv-grid", g),
        (None, None) => Ok(vec![pipeline::DEFAULT_C]),
    }
}

fn direction_policy(text: &str, seed: u64) -> Result<DirectionPolicy, Error> {
    match text {
        "auto" => Ok(DirectionPolicy::Auto { seed }),
        "exhaustive" => Ok(DirectionPolicy::Exhaustive),
        n => match n.parse::<usize>() {
            Ok(count) if count > 0 => Ok(DirectionPolicy::Sampled { count, seed }),
            _ => Err(invalid("directions", format!("expected auto, exhaustive or a positive count, got {n:?}"))),
        },
    }
}

fn fit_config(kernel: &KernelArgs, train: &TrainArgs) -> Result<FitConfig, Error> {
    let config = FitConfig {
        kernel: kernel_spec(kernel)?,
        kappa: train.kappa,
        cv: CvConfig {
            folds: train.folds,
            grid: c_grid(&train.c)?,
            seed: train.seed,
            stratified: true,
        },
        policy: direction_policy(&train.directions, train.seed)?,
        tol: train.tol,
    };
    config.validate()?;
    Ok(config)
}

fn load_dataset(args: &DatasetArgs) -> Result<Dataset, Error> {
    match (&args.data, &args.fasta, &args.labels) {
        (Some(path), None, _) => {
            let label_column = match args.label_col.as_str() {
                "first" => LabelColumn::First,
                "last" => LabelColumn::Last,
                n => match n.parse::<usize>() {
                    Ok(i) if i >= 1 => LabelColumn::Index(i - 1),
                    _ => return Err(invalid("label-col", format!("expected first, last or a 1-based index, got {n:?}"))),
                },
            };
            let coding = match &args.label_coding {
                None => None,
                Some(c) => match c.split_once(',') {
                    Some((neg, pos)) if !neg.is_empty() && !pos.is_empty() => Some((neg.to_string(), pos.to_string())),
                    _ => return Err(invalid("label-coding", format!("expected NEG,POS, got {c:?}"))),
                },
            };
            data::load_csv(
                path,
                &CsvOptions {
                    label_column,
                    coding,
                    has_header: args.header,
                },
            )
        }
        (None, Some(fasta), Some(labels)) => data::load_fasta(fasta, labels),
        _ => Err(invalid("data", "give --data CSV or --fasta FASTA --labels FILE".into())),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| Error::Io { path: p.into(), source }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn map_style(output: &MapOutputArgs) -> MapStyle {
    MapStyle {
        label_top: output.label_top,
        threshold: output.threshold,
        ..MapStyle::default()
    }
}

fn write_map(fit: &FitResult, output: &MapOutputArgs) -> Result<(), Error> {
    let points = outliermap::build_map(fit);
    if let Some(path) = &output.out_svg {
        outliermap::emit_svg(&points, &map_style(output), path)?;
    }
    if output.out_csv.is_some() || output.out_svg.is_none() {
        let mut buf = Vec::new();
        outliermap::write_csv(&points, &mut buf)?;
        write_output(output.out_csv.as_deref(), &buf)?;
    }
    Ok(())
}

fn run_fit(cmd: &FitCmd) -> Result<(), Error> {
    let config = fit_config(&cmd.kernel, &cmd.train)?;
    let dataset = load_dataset(&cmd.dataset)?;
    let fit = pipeline::fit_sdsvm(&dataset, &config)?;
    write_output(cmd.out.as_deref(), fit.to_text()?.as_bytes())?;
    if let Some(path) = &cmd.out_csv {
        outliermap::emit_csv(&outliermap::build_map(&fit), path)?;
    }
    Ok(())
}

fn run_map(cmd: &MapCmd) -> Result<(), Error> {
    let fit = match &cmd.fit {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            FitResult::from_text(&text)?
        }
        None => {
            let config = fit_config(&cmd.kernel, &cmd.train)?;
            let dataset = load_dataset(&cmd.dataset)?;
            pipeline::fit_sdsvm(&dataset, &config)?
        }
    };
    write_map(&fit, &cmd.output)
}

fn run_simulate(cmd: &SimulateCmd) -> Result<(), Error> {
    let spec = SimulationSpec {
        n_per_group: cmd.n,
        d: cmd.d,
        shift: cmd.shift,
        outliers_per_group: if cmd.contaminated { 4 } else { 0 },
        test_size: cmd.test_size,
        runs: cmd.runs,
        kappas: parse_list("kappas", &cmd.kappas)?,
        seed: cmd.seed,
        ..SimulationSpec::default()
    };
    spec.validate()?;
    let kernel = kernel_spec(&cmd.kernel)?;
    let cv = CvConfig {
        folds: cmd.folds,
        grid: c_grid(&cmd.c)?,
        seed: cmd.seed,
        stratified: true,
    };
    cv.validate()?;
    let policy = direction_policy(&cmd.directions, cmd.seed)?;
    let table = data::run_simulation(&spec, &kernel, &cv, policy, cmd.tol)?;
    let mut buf = Vec::new();
    table
        .write_csv(&mut buf)
        .map_err(|source| Error::Io { path: "<csv>".into(), source })?;
    write_output(cmd.out_csv.as_deref(), &buf)?;
    for s in table.summary() {
        eprintln!(
            "kappa={} median={:.4} q1={:.4} q3={:.4} runs={} failures={}",
            s.kappa, s.median, s.q1, s.q3, s.runs, s.failures
        );
    }
    Ok(())
}

fn run_toy(cmd: &ToyCmd) -> Result<(), Error> {
    let config = fit_config(&cmd.kernel, &cmd.train)?;
    let dataset = data::gen_toy(cmd.train.seed);
    if let Some(path) = &cmd.out_data {
        let mut buf = Vec::new();
        dataset.write_csv(&mut buf)?;
        write_output(Some(path), &buf)?;
    }
    let fit = pipeline::fit_sdsvm(&dataset, &config)?;
    if let Some(path) = &cmd.out_fit {
        write_output(Some(path), fit.to_text()?.as_bytes())?;
    }
    write_map(&fit, &cmd.output)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::from(1);
        }
    }
    let (name, result) = match &cli.command {
        Command::Fit(cmd) => ("fit", run_fit(cmd)),
        Command::Map(cmd) => ("map", run_map(cmd)),
        Command::Simulate(cmd) => ("simulate", run_simulate(cmd)),
        Command::Toy(cmd) => ("toy", run_toy(cmd)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
