//! The `uldl` command line: synthesis, labeling, training, evaluation and a
//! one-shot `repro` that regenerates every curve from a seed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use uldl_core::baseline::{baseline_dsr, BaselineReport};
use uldl_core::dataset::{read_csv_file, write_csv_file};
use uldl_core::evaluation::{prepare_split, run_dsr_sweep, Sweep};
use uldl_core::kv::KvMap;
use uldl_core::labeling::class_histogram;
use uldl_core::numfmt::format_f64;
use uldl_core::svm::{load_model, save_model, train, Kernel, SvmParams, DEFAULT_GAMMA};
use uldl_core::{
    label_dataset, pca_fit, synth_dataset, DecouplingClass, Error, FeatureMatrix,
    MeasurementSample, PcaModel, RunConfig,
};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "uldl",
    version,
    about = "Dual-band UL/DL decoupling experiments"
)]
pub struct Cli {
    /// Key-value file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize an unlabeled dual-band dataset.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_total: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill the label column from the 28 GHz measurements.
    Label {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        th: ThresholdArgs,
    },
    /// Train a one-vs-one SVM and write it to a model file.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n_train: Option<usize>,
        #[command(flatten)]
        svm: SvmArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Classify the rows of a dataset with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep training sizes and report windowed DSR and accuracy.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the fixed-threshold rule on the test windows.
    Baseline {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        th: ThresholdArgs,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project standardized features on the top three principal axes.
    Pca {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy sweeps of the RBF and linear kernels side by side.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole pipeline and write every output into a directory.
    Repro {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k_th: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p_th: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelName {
    Rbf,
    Linear,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Param(_)) => EXIT_USAGE,
            CliError::Core(Error::Data(_)) => EXIT_DATA,
            CliError::Core(Error::Io(_)) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("uldl: {e}");
            e.exit_code()
        }
    }
}

fn base_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            if !p.is_file() {
                return Err(CliError::Usage(format!(
                    "config file {} does not exist",
                    p.display()
                )));
            }
            Ok(RunConfig::from_kv(&KvMap::read(p)?)?)
        }
    }
}

fn apply_svm(cfg: &mut RunConfig, args: &SvmArgs) {
    let mut gamma = match cfg.svm.kernel {
        Kernel::Rbf { gamma } => gamma,
        Kernel::Linear => DEFAULT_GAMMA,
    };
    if let Some(g) = args.gamma {
        gamma = g;
    }
    cfg.svm.kernel = match args.kernel {
        Some(KernelName::Linear) => Kernel::Linear,
        Some(KernelName::Rbf) => Kernel::Rbf { gamma },
        None => match cfg.svm.kernel {
            Kernel::Rbf { .. } => Kernel::Rbf { gamma },
            Kernel::Linear => Kernel::Linear,
        },
    };
    if let Some(c) = args.c {
        cfg.svm.c = c;
    }
}

fn apply_thresholds(cfg: &mut RunConfig, args: &ThresholdArgs) {
    if let Some(k) = args.k_th {
        cfg.thresholds.k_th_db = k;
    }
    if let Some(p) = args.p_th {
        cfg.thresholds.p_th_dbm = p;
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn read_input(path: &Path) -> CliResult<Vec<MeasurementSample>> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "input file {} does not exist",
            path.display()
        )));
    }
    Ok(read_csv_file(path)?)
}

/// Labeled rows as a feature matrix; the dataset size overrides `n_total`.
fn labeled_features(cfg: &mut RunConfig, data: &[MeasurementSample]) -> CliResult<FeatureMatrix> {
    cfg.eval.n_total = data.len();
    cfg.eval.validate()?;
    Ok(FeatureMatrix::from_samples(data)?)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let mut cfg = base_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Synth { seed, n_total, out } => {
            set(&mut cfg.seed, *seed);
            if let Some(n) = *n_total {
                if cfg.synth.tracks.len() != 1 {
                    return Err(CliError::Usage(
                        "--n-total needs a single-track configuration".into(),
                    ));
                }
                cfg.synth.n_total = n;
                cfg.synth.tracks[0].n_samples = n;
            }
            let data = synth_dataset(&cfg.synth, cfg.seed)?;
            write_csv_file(&data, out)?;
        }
        Command::Label { input, out, th } => {
            apply_thresholds(&mut cfg, th);
            cfg.thresholds.validate()?;
            let data = label_dataset(read_input(input)?, &cfg.thresholds);
            write_csv_file(&data, out)?;
            let hist = class_histogram(data.iter().filter_map(|s| s.label.as_ref()));
            eprintln!("class counts 1..4: {hist:?}");
        }
        Command::Train {
            input,
            n_train,
            svm,
            seed,
            model_out,
        } => {
            apply_svm(&mut cfg, svm);
            set(&mut cfg.seed, *seed);
            cfg.sync();
            let data = read_input(input)?;
            let fm = labeled_features(&mut cfg, &data)?;
            let n = n_train.unwrap_or(cfg.eval.n_train_pool);
            if n == 0 || n > cfg.eval.n_train_pool {
                return Err(CliError::Usage(format!(
                    "--n-train must be in 1..={}, got {n}",
                    cfg.eval.n_train_pool
                )));
            }
            let (pool, _) = prepare_split(&fm, &cfg.eval)?;
            let subset = pool.head(n);
            let numbers: Vec<u8> = subset.labels().iter().map(|c| c.number()).collect();
            let model = train(subset.x(), &numbers, &cfg.svm)?;
            let missing = model.missing_classes(&[1, 2, 3, 4]);
            if !missing.is_empty() {
                eprintln!("warning: classes {missing:?} absent from the training set");
            }
            if !model.all_converged() {
                eprintln!("warning: solver hit its iteration cap");
            }
            save_model(&model, model_out)?;
        }
        Command::Predict { model, input, out } => {
            if !model.is_file() {
                return Err(CliError::Usage(format!(
                    "model file {} does not exist",
                    model.display()
                )));
            }
            let model = load_model(model)?;
            let data = read_input(input)?;
            let x = ndarray::Array2::from_shape_vec(
                (data.len(), uldl_core::NUM_FEATURES),
                data.iter().flat_map(|s| s.features()).collect(),
            )
            .expect("row length is fixed");
            let predicted = model.predict(x.view())?;
            let mut w = csv::Writer::from_path(out)?;
            w.write_record(["sample_id", "label", "predicted"])?;
            for (s, p) in data.iter().zip(&predicted) {
                let label = s.label.map(|c| c.to_string()).unwrap_or_default();
                w.write_record([s.sample_id.to_string(), label, p.to_string()])?;
            }
            w.flush()?;
        }
        Command::Eval {
            input,
            svm,
            l,
            seed,
            out,
        } => {
            apply_svm(&mut cfg, svm);
            set(&mut cfg.eval.window_l, *l);
            set(&mut cfg.seed, *seed);
            cfg.sync();
            cfg.svm.validate()?;
            let data = read_input(input)?;
            let fm = labeled_features(&mut cfg, &data)?;
            let sweep = run_dsr_sweep(&fm, &cfg.svm, &cfg.eval)?;
            write_sweep(&sweep, out)?;
        }
        Command::Baseline { input, th, l, out } => {
            apply_thresholds(&mut cfg, th);
            set(&mut cfg.eval.window_l, *l);
            let data = read_input(input)?;
            cfg.eval.n_total = data.len();
            let report = baseline_dsr(&data, &cfg.thresholds, &cfg.eval)?;
            write_baseline(&report, &cfg.eval.sizes(), out)?;
            eprintln!(
                "offsets: k {} dB, p {} dB",
                format_f64(report.offsets.k_offset_db),
                format_f64(report.offsets.p_offset_db)
            );
        }
        Command::Pca { input, out } => {
            let data = read_input(input)?;
            let fm = FeatureMatrix::from_samples(&data)?;
            let model = pca_fit(fm.x(), 3, true)?;
            if model.rank_deficient {
                eprintln!("warning: features span fewer than 3 dimensions");
            }
            write_pca(&model, &fm, out)?;
        }
        Command::Compare {
            input,
            c,
            gamma,
            l,
            seed,
            out,
        } => {
            set(&mut cfg.svm.c, *c);
            set(&mut cfg.eval.window_l, *l);
            set(&mut cfg.seed, *seed);
            cfg.sync();
            let gamma = gamma.unwrap_or(match cfg.svm.kernel {
                Kernel::Rbf { gamma } => gamma,
                Kernel::Linear => DEFAULT_GAMMA,
            });
            let data = read_input(input)?;
            let fm = labeled_features(&mut cfg, &data)?;
            let (rbf, linear) = compare(&fm, &cfg, gamma)?;
            write_compare(&rbf, &linear, out)?;
        }
        Command::Repro { seed, out_dir } => {
            set(&mut cfg.seed, *seed);
            cfg.sync();
            repro(&cfg, out_dir)?;
        }
    }
    Ok(())
}

fn compare(fm: &FeatureMatrix, cfg: &RunConfig, gamma: f64) -> CliResult<(Sweep, Sweep)> {
    let rbf = SvmParams {
        kernel: Kernel::Rbf { gamma },
        ..cfg.svm
    };
    let linear = SvmParams {
        kernel: Kernel::Linear,
        ..cfg.svm
    };
    Ok((
        run_dsr_sweep(fm, &rbf, &cfg.eval)?,
        run_dsr_sweep(fm, &linear, &cfg.eval)?,
    ))
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_sweep(sweep: &Sweep, path: &Path) -> CliResult<()> {
    write_rows(
        path,
        &["n_train", "dsr", "mean_accuracy"],
        sweep.points.iter().map(|p| {
            vec![
                p.n_train.to_string(),
                format_f64(p.dsr),
                format_f64(p.accuracy),
            ]
        }),
    )
}

fn write_compare(rbf: &Sweep, linear: &Sweep, path: &Path) -> CliResult<()> {
    write_rows(
        path,
        &["n_train", "acc_rbf", "acc_linear"],
        rbf.points.iter().zip(&linear.points).map(|(a, b)| {
            vec![
                a.n_train.to_string(),
                format_f64(a.accuracy),
                format_f64(b.accuracy),
            ]
        }),
    )
}

fn write_baseline(report: &BaselineReport, sizes: &[usize], path: &Path) -> CliResult<()> {
    write_rows(
        path,
        &["n_train", "dsr", "accuracy"],
        sizes.iter().map(|n| {
            vec![
                n.to_string(),
                format_f64(report.point.dsr),
                format_f64(report.point.accuracy),
            ]
        }),
    )
}

fn write_pca(model: &PcaModel, fm: &FeatureMatrix, path: &Path) -> CliResult<()> {
    let coords = model.project(fm.x())?;
    let header: Vec<String> = (1..=model.n_components())
        .map(|c| format!("pc{c}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        path,
        &refs,
        coords.outer_iter().zip(fm.labels()).map(|(row, label)| {
            row.iter()
                .map(|&v| format_f64(v))
                .chain(std::iter::once(label.to_string()))
                .collect()
        }),
    )
}

fn write_confusion(report: &BaselineReport, path: &Path) -> CliResult<()> {
    write_rows(
        path,
        &["true_class", "pred_1", "pred_2", "pred_3", "pred_4"],
        report.confusion.iter().enumerate().map(|(t, row)| {
            std::iter::once((t + 1).to_string())
                .chain(row.iter().map(usize::to_string))
                .collect()
        }),
    )
}

/// Synthesizes, labels and evaluates with `cfg`, writing into `out_dir`:
/// the labeled dataset, both kernel sweeps, the kernel comparison, the
/// baseline, its confusion matrix, the PCA projection and a summary.
pub fn repro(cfg: &RunConfig, out_dir: &Path) -> CliResult<()> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let data = label_dataset(synth_dataset(&cfg.synth, cfg.seed)?, &cfg.thresholds);
    write_csv_file(&data, &out_dir.join("dataset.csv"))?;
    let fm = FeatureMatrix::from_samples(&data)?;

    let gamma = match cfg.svm.kernel {
        Kernel::Rbf { gamma } => gamma,
        Kernel::Linear => DEFAULT_GAMMA,
    };
    let (rbf, linear) = compare(&fm, cfg, gamma)?;
    write_sweep(&rbf, &out_dir.join("dsr_rbf.csv"))?;
    write_sweep(&linear, &out_dir.join("dsr_linear.csv"))?;
    write_compare(&rbf, &linear, &out_dir.join("compare.csv"))?;

    let base = baseline_dsr(&data, &cfg.thresholds, &cfg.eval)?;
    write_baseline(&base, &cfg.eval.sizes(), &out_dir.join("baseline.csv"))?;
    write_confusion(&base, &out_dir.join("baseline_confusion.csv"))?;

    let pca = pca_fit(fm.x(), 3, true)?;
    write_pca(&pca, &fm, &out_dir.join("pca.csv"))?;

    let hist = class_histogram(fm.labels());
    let mut summary = KvMap::new();
    summary.insert("seed", cfg.seed);
    summary.insert("samples", data.len());
    for c in DecouplingClass::ALL {
        summary.insert(
            format!("class_{}", c.number()),
            hist[usize::from(c.number() - 1)],
        );
    }
    summary.insert("k_offset_db", format_f64(base.offsets.k_offset_db));
    summary.insert("p_offset_db", format_f64(base.offsets.p_offset_db));
    summary.insert(
        "pca_explained_variance_ratio",
        uldl_core::numfmt::format_list(&pca.explained_variance_ratio()),
    );
    summary.insert(
        "solver_converged",
        rbf.points.iter().chain(&linear.points).all(|p| p.converged),
    );
    let mut f = fs::File::create(out_dir.join("summary.txt"))?;
    write!(f, "{summary}")?;
    fs::write(out_dir.join("config.txt"), cfg.to_kv().to_string())?;
    Ok(())
}
