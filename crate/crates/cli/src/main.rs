//! `hamboost` command line: train, predict, eval, cv.
//!
//! Exit codes: 0 ok, 1 usage error, 2 runtime error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hamboost::io::{load_dataset, load_for_model, load_model, save_model, DataFormat, DatasetSpec, LabelMode};
use hamboost::{
    adaboost_mh_with, cross_validate, BaseKind, BoostConfig, CvPlan, DataSet, EvalReport,
    StrongClassifier, WeightInit, WeightScheme,
};

#[derive(Parser)]
#[command(name = "hamboost", version, about = "Multi-class AdaBoost.MH with decision stumps and Hamming trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it (and optionally a per-iteration trace) to disk
    Train(TrainArgs),
    /// Print one predicted label and the K scores per instance
    Predict(PredictArgs),
    /// Print the evaluation report of a model on a dataset
    Eval(EvalArgs),
    /// Cross-validate tree size and stopping time, then report held-out errors
    Cv(CvArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file
    #[arg(long)]
    data: PathBuf,
    /// Dataset format: dense-csv or sparse-index
    #[arg(long)]
    format: Option<String>,
    /// Treat the last K columns as explicit +1/-1 labels (dense only)
    #[arg(long)]
    label_columns: Option<usize>,
}

impl DataArgs {
    fn spec(&self, config: &ConfigFile, test: Option<&PathBuf>) -> Result<DatasetSpec, CliError> {
        let format = resolve(self.format.clone(), config.get("format"), "dense-csv".into());
        Ok(DatasetSpec {
            path: self.data.clone(),
            format: DataFormat::parse(&format).map_err(usage)?,
            label_mode: match self.label_columns {
                Some(k) => LabelMode::SignColumns(k),
                None => LabelMode::LastColumn,
            },
            test_path: test.cloned(),
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Weight scheme: balanced or uniform
    #[arg(long)]
    weight_scheme: Option<String>,
    /// Base learner: stump or tree
    #[arg(long)]
    base: Option<String>,
    /// Inner-node budget for the tree base learner
    #[arg(long)]
    tree_nodes: Option<usize>,
    /// Boosting iterations
    #[arg(long)]
    iterations: Option<usize>,
    /// Random seed recorded in the model
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the model file
    #[arg(long)]
    model_out: PathBuf,
    /// Output path for the per-iteration trace (TSV)
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Designated test set evaluated every iteration
    #[arg(long)]
    test: Option<PathBuf>,
    /// key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print progress to stderr every N iterations
    #[arg(long)]
    progress: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Write predictions here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Outer folds
    #[arg(long)]
    folds: Option<usize>,
    /// Inner validation runs per outer fold
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated tree sizes, e.g. "1,2,4,8,16"
    #[arg(long)]
    grid: Option<String>,
    /// T_max: iterations of every validation run
    #[arg(long)]
    iterations: Option<usize>,
    /// T_min of the smoothed stopping time
    #[arg(long)]
    tmin: Option<usize>,
    /// Random seed for the fold assignment
    #[arg(long)]
    seed: Option<u64>,
    /// Weight scheme: balanced or uniform
    #[arg(long)]
    weight_scheme: Option<String>,
    /// Directory of persisted validation curves (resume support)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

/// key=value configuration file, lower precedence than flags.
#[derive(Default)]
struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| runtime(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!(
                    "config line {}: expected key = value, found '{line}'",
                    ln + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn get(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config value '{v}' for '{key}' does not parse"))),
        }
    }
}

fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

struct CliError {
    message: String,
    usage: bool,
}

fn usage(msg: impl ToString) -> CliError {
    CliError { message: msg.to_string(), usage: true }
}

fn runtime(msg: impl ToString) -> CliError {
    CliError { message: msg.to_string(), usage: false }
}

impl From<hamboost::Error> for CliError {
    fn from(e: hamboost::Error) -> Self {
        runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints --help/--version through the error path too
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::Eval(args) => eval(args),
        Command::Cv(args) => cv(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(if e.usage { 1 } else { 2 })
        }
    }
}

fn parse_scheme(flag: Option<String>, config: &ConfigFile) -> Result<WeightScheme, CliError> {
    let value = resolve(flag, config.get("weight-scheme"), "balanced".into());
    WeightScheme::parse(&value).map_err(usage)
}

fn train(args: TrainArgs) -> Result<(), CliError> {
    let config = ConfigFile::load(args.config.as_ref())?;
    let scheme = parse_scheme(args.weight_scheme, &config)?;
    let iterations = resolve(args.iterations, config.get_parsed("iterations")?, 0);
    if iterations < 1 {
        return Err(usage("--iterations is required and must be >= 1"));
    }
    let base_name = resolve(args.base, config.get("base"), "stump".into());
    let base = match base_name.as_str() {
        "stump" => BaseKind::Stump,
        "tree" => {
            let nodes = resolve(args.tree_nodes, config.get_parsed("tree-nodes")?, 0);
            if nodes < 1 {
                return Err(usage("--base tree requires --tree-nodes N with N >= 1"));
            }
            BaseKind::Tree { nodes }
        }
        other => return Err(usage(format!("unknown base '{other}' (expected stump or tree)"))),
    };
    let seed = resolve(args.seed, config.get_parsed("seed")?, 0);

    let spec = args.data.spec(&config, args.test.as_ref())?;
    let (train, test) = load_dataset(&spec)?;

    let boost_config = BoostConfig::new(iterations, base, scheme, seed);
    let progress = args.progress.unwrap_or(0);
    let mut trace_rows = String::new();
    let with_test = test.is_some();
    writeln!(
        trace_rows,
        "t\tz\tedge\talpha\ttrain_err\ttrain_hamming{}",
        if with_test { "\ttest_err\ttest_hamming" } else { "" }
    )
    .unwrap();

    let (model, trace) = adaboost_mh_with(
        &train,
        WeightInit::Scheme(scheme),
        &boost_config,
        test.as_ref(),
        |r| {
            let fmt_opt = |v: Option<f64>| v.map_or("nan".into(), |x| x.to_string());
            write!(
                trace_rows,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.t,
                r.z,
                r.edge,
                r.alpha,
                fmt_opt(r.train_one_error),
                r.train_hamming
            )
            .unwrap();
            if with_test {
                write!(trace_rows, "\t{}\t{}", fmt_opt(r.test_one_error), fmt_opt(r.test_hamming))
                    .unwrap();
            }
            trace_rows.push('\n');
            if progress > 0 && r.t % progress == 0 {
                eprintln!(
                    "t={} Z={:.6} edge={:.6} train_err={}",
                    r.t,
                    r.z,
                    r.edge,
                    fmt_opt(r.train_one_error)
                );
            }
        },
    )?;

    save_model(&model, &args.model_out)?;
    if let Some(path) = &args.trace_out {
        write_atomic(path, trace_rows.as_bytes())?;
    }
    let last = trace.records.last().expect("at least one iteration");
    println!(
        "trained {} stages (requested {}){}",
        trace.executed(),
        iterations,
        if trace.stopped_early { ", stopped early on a saturated edge" } else { "" }
    );
    println!(
        "final: Z={} edge={} train_err={}",
        last.z,
        last.edge,
        last.train_one_error.map_or("nan".into(), |v| v.to_string())
    );
    if let Some(err) = last.test_one_error {
        println!("test_err={err}");
    }
    println!("model written to {}", args.model_out.display());
    Ok(())
}

fn load_with_model(model_path: &Path, data: &DataArgs) -> Result<(StrongClassifier, DataSet), CliError> {
    let model = load_model(model_path)?;
    let config = ConfigFile::default();
    let spec = data.spec(&config, None)?;
    let dataset = load_for_model(&spec.path, spec.format, spec.label_mode, model.d, model.k)?;
    Ok((model, dataset))
}

fn predict(args: PredictArgs) -> Result<(), CliError> {
    let (model, dataset) = load_with_model(&args.model, &args.data)?;
    let mut out = String::new();
    for i in 0..dataset.n() {
        let (scores, label) = model.evaluate(dataset.row(i))?;
        write!(out, "{}", label + 1).unwrap();
        for s in scores {
            write!(out, "\t{s}").unwrap();
        }
        out.push('\n');
    }
    match &args.output {
        Some(path) => write_atomic(path, out.as_bytes())?,
        None => print!("{out}"),
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    let (model, dataset) = load_with_model(&args.model, &args.data)?;
    // weight the report by the scheme the model was trained with
    let w_user = scheme_rows(&dataset, model.meta.scheme)?;
    let report = EvalReport::compute(&model, &dataset, &w_user)?;
    print!("{}", report.to_key_values());
    Ok(())
}

/// Per-row label distributions for the given scheme (no 1/n).
fn scheme_rows(data: &DataSet, scheme: WeightScheme) -> Result<hamboost::WeightMatrix, CliError> {
    let k = data.k();
    let mut rows = vec![0.0; data.n() * k];
    match scheme {
        WeightScheme::Uniform => rows.fill(1.0 / k as f64),
        WeightScheme::Balanced => {
            for i in 0..data.n() {
                for l in 0..k {
                    rows[i * k + l] = if data.label_sign(i, l) == 1 {
                        0.5
                    } else {
                        0.5 / (k as f64 - 1.0)
                    };
                }
            }
        }
    }
    Ok(hamboost::WeightMatrix::from_raw(rows, data.n(), k)?)
}

fn cv(args: CvArgs) -> Result<(), CliError> {
    let config = ConfigFile::load(args.config.as_ref())?;
    let scheme = parse_scheme(args.weight_scheme, &config)?;
    let folds = resolve(args.folds, config.get_parsed("folds")?, 10);
    let reps = resolve(args.reps, config.get_parsed("reps")?, 10);
    let iterations = resolve(args.iterations, config.get_parsed("iterations")?, 0);
    if iterations < 2 {
        return Err(usage("--iterations (T_max) is required and must be >= 2"));
    }
    let tmin = resolve(args.tmin, config.get_parsed("tmin")?, 50);
    let seed = resolve(args.seed, config.get_parsed("seed")?, 0);
    let grid_text = resolve(args.grid, config.get("grid"), "1,2,4,8,16".into());
    let grid: Vec<usize> = grid_text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad --grid '{grid_text}' (expected e.g. \"1,2,4,8\")")))?;

    let spec = args.data.spec(&config, None)?;
    let (data, _) = load_dataset(&spec)?;

    let mut plan = CvPlan::new(folds, reps, grid, iterations, tmin, seed);
    plan.cache_dir = args.cache_dir.clone();
    let template = BoostConfig::new(iterations, BaseKind::Tree { nodes: 1 }, scheme, seed);
    let report = cross_validate(&data, &plan, &template)?;
    print!("{}", report.to_text());
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .map_err(|e| runtime(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| runtime(format!("cannot move output into place at {}: {e}", path.display())))?;
    Ok(())
}
