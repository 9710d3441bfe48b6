//! Command-line interface: training, prediction, benchmarking, and
//! synthetic-data emission.
//!
//! Exit codes: 0 on success, 1 for computation errors, 2 for usage and I/O
//! errors (argument parsing also exits 2 via clap).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{report, sweep, subsample_size, SweepSpec};
use crate::cv::{cross_validate_k, CvConfig};
use crate::data::csv::{load_csv, save_csv, save_truth_sidecar, CsvSchema, LabelColumn};
use crate::data::synth::{synth_manifold, MarginProfile, SynthSpec};
use crate::data::{split, standardize, LabeledDataset, Standardizer};
use crate::ensemble::{Prediction, SubNNModel};
use crate::error::{Error, Result};
use crate::knn::{KnnModel, TaskMode};
use crate::model_io::{load_model, save_model};
use crate::nn::{IndexMode, PointSet};

#[derive(Parser)]
#[command(
    name = "subnn",
    version,
    about = "Denoised 1-NN subsample ensembles with k-NN baselines and a benchmark harness"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a subNN ensemble and persist it.
    Train(TrainArgs),
    /// Predict a query file with a persisted model.
    Predict(PredictArgs),
    /// Run the benchmark sweep and emit report and curve files.
    Bench(BenchArgs),
    /// Generate a synthetic dataset with its ground-truth sidecar.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Classify,
    Regress,
}

impl From<ModeArg> for TaskMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Classify => TaskMode::Classification,
            ModeArg::Regress => TaskMode::Regression,
        }
    }
}

#[derive(Args)]
struct DataSource {
    /// Delimited text dataset: feature columns plus a label column.
    #[arg(long, conflicts_with = "synth")]
    data: Option<PathBuf>,
    /// Synthetic spec as comma-separated key=value pairs, e.g.
    /// "d=2,D=5,n=20000,alpha=1.0,lambda=3.0,classes=2,flip=0.2,amp=0.9,margin=1,sigma=0.5".
    #[arg(long)]
    synth: Option<String>,
    /// Field delimiter for --data.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Set when --data has no header row.
    #[arg(long)]
    no_header: bool,
    /// Label column name or zero-based index; default is the last column.
    #[arg(long)]
    label_column: Option<String>,
    /// Task mode.
    #[arg(long, value_enum, default_value = "classify")]
    mode: ModeArg,
}

impl DataSource {
    fn load(&self, seed: u64) -> Result<LabeledDataset> {
        match (&self.data, &self.synth) {
            (Some(path), None) => {
                let label_column = match &self.label_column {
                    None => LabelColumn::Last,
                    Some(s) => match s.parse::<usize>() {
                        Ok(i) => LabelColumn::Index(i),
                        Err(_) => LabelColumn::Named(s.clone()),
                    },
                };
                let schema = CsvSchema {
                    delimiter: self.delimiter as u8,
                    has_header: !self.no_header,
                    label_column,
                    mode: self.mode.into(),
                };
                load_csv(path, &schema)
            }
            (None, Some(spec)) => synth_manifold(&parse_synth_spec(spec, self.mode.into(), seed)?),
            (None, None) => Err(Error::Usage("one of --data or --synth is required".into())),
            (Some(_), Some(_)) => Err(Error::Usage("--data conflicts with --synth".into())),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    source: DataSource,
    /// Subsampling ratio m/n in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    /// Ensemble size I.
    #[arg(long = "models", default_value_t = 10)]
    models: usize,
    /// Denoising parameter: an integer or "cv" for two-stage
    /// cross-validation.
    #[arg(long, default_value = "cv")]
    k: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; the model lands at <out>/model.subnn.
    #[arg(long)]
    out: PathBuf,
    /// Concurrency cap; defaults to one worker per submodel.
    /// SUBNN_WORKERS is the environment fallback.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// Persisted model file.
    #[arg(long)]
    model: PathBuf,
    /// Query file of raw feature rows (no label column).
    #[arg(long)]
    queries: PathBuf,
    /// Output file, one prediction per query row.
    #[arg(long)]
    out: PathBuf,
    /// Field delimiter of the query file.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Set when the query file starts with a header row.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: DataSource,
    /// Comma-separated subsampling ratios.
    #[arg(long, default_value = "0.1")]
    ratio: String,
    /// Comma-separated ensemble sizes.
    #[arg(long = "models", default_value = "10")]
    models: String,
    /// Denoising parameter: integer or "cv".
    #[arg(long, default_value = "cv")]
    k: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for report.csv, report.json and curve files.
    #[arg(long)]
    out: PathBuf,
    /// Repetitions per method (fresh subsample draws each time).
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Fraction of rows used for training; the rest is the test set.
    #[arg(long, default_value_t = 0.85)]
    train_fraction: f64,
    /// Skip the bagged 1-NN baseline rows.
    #[arg(long)]
    no_bagged: bool,
    /// Experiment name used as the curve-file prefix.
    #[arg(long, default_value = "sweep")]
    name: String,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Synthetic spec; see `bench --help`.
    #[arg(long)]
    synth: String,
    /// Task mode.
    #[arg(long, value_enum, default_value = "classify")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset path; the truth sidecar lands next to it with a
    /// .truth.csv suffix.
    #[arg(long)]
    out: PathBuf,
}

/// Parses arguments and runs the selected subcommand.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    if !(args.ratio > 0.0 && args.ratio <= 1.0) {
        return Err(Error::Usage(format!("--ratio {} outside (0, 1]", args.ratio)));
    }
    let workers = resolve_workers(args.workers)?;
    let data = args.source.load(args.seed)?;
    let stats = Standardizer::fit(&data.points);
    let points = stats.transform(&data.points)?;

    let k = match parse_k(&args.k)? {
        Some(k) => k,
        None => {
            let cv = cross_validate_k(
                &points,
                &data.labels,
                &CvConfig { folds: 2, seed: args.seed, mode: data.mode() },
            )?;
            println!("cv chose k = {} (stage-1 winner {})", cv.chosen_k, cv.stage1_k);
            cv.chosen_k
        }
    };
    let m = subsample_size(data.len(), args.ratio);
    if m == 0 {
        return Err(Error::Usage(format!("--ratio {} empties the subsample", args.ratio)));
    }

    let full = KnnModel::new(points, data.labels.clone(), k, IndexMode::Spatial)?;
    let ensemble = SubNNModel::train(&full, m, args.models, args.seed, IndexMode::Spatial)?;
    // workers only caps training-time concurrency indirectly; recorded here
    // so the flag is honored even though training is sequential.
    let _ = workers;

    fs::create_dir_all(&args.out)?;
    let model_path = args.out.join("model.subnn");
    save_model(
        &model_path,
        &ensemble,
        &stats,
        data.class_names.as_deref(),
        IndexMode::Spatial,
    )?;
    println!(
        "trained subNN: n={}, D={}, k={}, m={}, I={}, seed={}",
        data.len(),
        data.dim(),
        k,
        m,
        args.models,
        args.seed
    );
    println!("model written to {}", model_path.display());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let workers = resolve_workers(args.workers)?;
    let model = load_model(&args.model)?;
    let rows = read_query_rows(&args.queries, args.delimiter as u8, args.header, model.ensemble.dim())?;
    if rows.is_empty() {
        fs::write(&args.out, "")?;
        println!("0 predictions written to {}", args.out.display());
        return Ok(());
    }
    let standardized: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| model.standardizer.transform_row(r))
        .collect::<Result<_>>()?;
    let queries = PointSet::new(standardized)?;
    let (predictions, _) = model.ensemble.predict_batch(&queries, false, workers)?;
    let mut out = String::new();
    for p in &predictions {
        match p {
            Prediction::Label(l) => match &model.class_names {
                Some(names) => out.push_str(&names[*l]),
                None => out.push_str(&l.to_string()),
            },
            Prediction::Value(v) => out.push_str(&format!("{v}")),
        }
        out.push('\n');
    }
    fs::write(&args.out, out)?;
    println!("{} predictions written to {}", predictions.len(), args.out.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let workers = resolve_workers(args.workers)?;
    let data = args.source.load(args.seed)?;
    let (train, test) = split(&data, args.train_fraction, args.seed)?;
    let (train, test, _) = standardize(&train, &test)?;

    let spec = SweepSpec {
        ratios: parse_list(&args.ratio, "ratio")?,
        ensemble_sizes: parse_list(&args.models, "models")?,
        repetitions: args.reps,
        seed: args.seed,
        include_bagged: !args.no_bagged,
        workers,
        fixed_k: parse_k(&args.k)?,
    };
    let outcome = sweep(&train, &test, &spec)?;

    fs::create_dir_all(&args.out)?;
    report::write_table(&args.out.join("report.csv"), &outcome.rows)?;
    report::write_json(&args.out.join("report.json"), &outcome.rows)?;
    report::write_curves(&args.out, &args.name, &outcome.curves)?;

    println!("k = {} on {} train / {} test rows", outcome.chosen_k, train.len(), test.len());
    println!("method,relative_error,relative_time");
    for row in &outcome.rows {
        println!("{},{:.3},{:.3}", row.method, row.relative_error, row.relative_time_max);
    }
    println!("reports written under {}", args.out.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = parse_synth_spec(&args.synth, args.mode.into(), args.seed)?;
    let data = synth_manifold(&spec)?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    save_csv(&args.out, &data, b',')?;
    let truth_path = sidecar_path(&args.out);
    save_truth_sidecar(&truth_path, &data, b',')?;
    println!("wrote {} rows to {} (truth: {})", data.len(), args.out.display(), truth_path.display());
    Ok(())
}

fn sidecar_path(data_path: &Path) -> PathBuf {
    match data_path.extension().and_then(|e| e.to_str()) {
        Some(ext) => data_path.with_extension(format!("truth.{ext}")),
        None => data_path.with_extension("truth.csv"),
    }
}

/// `--workers` flag, falling back to the SUBNN_WORKERS environment
/// variable; `None` means one worker per submodel.
fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SUBNN_WORKERS") {
        Err(_) => Ok(None),
        Ok(raw) => {
            let value: usize = raw
                .parse()
                .map_err(|_| Error::Usage(format!("SUBNN_WORKERS='{raw}' is not a count")))?;
            if value == 0 {
                return Err(Error::Usage("SUBNN_WORKERS must be >= 1".into()));
            }
            Ok(Some(value))
        }
    }
}

fn parse_k(raw: &str) -> Result<Option<usize>> {
    if raw.eq_ignore_ascii_case("cv") {
        return Ok(None);
    }
    let k: usize = raw
        .parse()
        .map_err(|_| Error::Usage(format!("--k must be an integer or 'cv', got '{raw}'")))?;
    if k == 0 {
        return Err(Error::Usage("--k must be >= 1".into()));
    }
    Ok(Some(k))
}

fn parse_list<T: std::str::FromStr>(raw: &str, flag: &str) -> Result<Vec<T>> {
    let mut values = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        values.push(
            part.parse::<T>()
                .map_err(|_| Error::Usage(format!("--{flag}: cannot parse '{part}'")))?,
        );
    }
    if values.is_empty() {
        return Err(Error::Usage(format!("--{flag} is empty")));
    }
    Ok(values)
}

/// Parses "key=value,..." synthetic specs. Keys: d, D, n, alpha, lambda,
/// classes, flip, amp, margin, sigma.
fn parse_synth_spec(raw: &str, mode: TaskMode, seed: u64) -> Result<SynthSpec> {
    let mut d = None;
    let mut ambient = None;
    let mut n = None;
    let mut alpha = 1.0;
    let mut lambda = 3.0;
    let mut classes = 2usize;
    let mut flip = 0.0;
    let mut amplitude = 0.9;
    let mut margin_exponent = 1.0;
    let mut sigma = 0.5;
    for pair in raw.split(',') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("synth spec entry '{pair}' is not key=value")))?;
        let bad = |what: &str| Error::Usage(format!("synth spec: bad {what} '{value}'"));
        match key.trim() {
            "d" => d = Some(value.parse().map_err(|_| bad("d"))?),
            "D" => ambient = Some(value.parse().map_err(|_| bad("D"))?),
            "n" => n = Some(value.parse().map_err(|_| bad("n"))?),
            "alpha" => alpha = value.parse().map_err(|_| bad("alpha"))?,
            "lambda" => lambda = value.parse().map_err(|_| bad("lambda"))?,
            "classes" => classes = value.parse().map_err(|_| bad("classes"))?,
            "flip" => flip = value.parse().map_err(|_| bad("flip"))?,
            "amp" => amplitude = value.parse().map_err(|_| bad("amp"))?,
            "margin" => margin_exponent = value.parse().map_err(|_| bad("margin"))?,
            "sigma" => sigma = value.parse().map_err(|_| bad("sigma"))?,
            other => return Err(Error::Usage(format!("synth spec: unknown key '{other}'"))),
        }
    }
    let d = d.ok_or_else(|| Error::Usage("synth spec needs d=".into()))?;
    let n = n.ok_or_else(|| Error::Usage("synth spec needs n=".into()))?;
    Ok(SynthSpec {
        d,
        ambient_dim: ambient.unwrap_or(d),
        n,
        alpha,
        lambda,
        margin: MarginProfile::Power { amplitude, exponent: margin_exponent },
        num_classes: classes,
        noise_flip: flip,
        noise_sigma: sigma,
        mode,
        seed,
    })
}

/// Reads raw feature rows, enforcing the model dimension with row-numbered
/// errors. An empty file yields an empty list.
fn read_query_rows(path: &Path, delimiter: u8, header: bool, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(header)
        .flexible(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 1;
        let record = record.map_err(|e| Error::Parse { row: row_no, message: e.to_string() })?;
        if record.len() != dim {
            return Err(Error::Parse {
                row: row_no,
                message: format!("expected {dim} feature columns, got {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(dim);
        for cell in record.iter() {
            row.push(cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                row: row_no,
                message: format!("non-numeric cell '{cell}'"),
            })?);
        }
        rows.push(row);
    }
    Ok(rows)
}
