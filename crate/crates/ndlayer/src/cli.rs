//! The `ndlayer` command: argument parsing and the six subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndlayer_core::data::{stratified_split, synth_generate, Dataset, SplitSpec};
use ndlayer_core::eval::{
    coeff_ratios, fold_noise_seed, gradcheck, gradcheck_attention, gradcheck_layer, initial_model, noise_sweep,
    run_fold, CrossvalConfig, EvalReport, FoldResult, GradcheckConfig, GradcheckReport,
    Stencil, DEFAULT_ETAS,
};
use ndlayer_core::nd::{Epsilon, Variant};
use ndlayer_core::net::{Arch, MAX_DEPTH, MIN_DEPTH};
use rayon::prelude::*;
use serde::Serialize;

use crate::checkpoint::{Checkpoint, Origin};
use crate::dataset_io::{load_csv, load_synth_spec, save_csv};
use crate::error::{CliError, Result};
use crate::report::{self, SweepRow, HISTORY_METRICS};
use crate::run::{create_run_dir, thread_pool, write_file, write_json, RunMeta};

#[derive(Debug, Parser)]
#[command(name = "ndlayer", version, about = "Normalized-difference layer experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic dataset CSV from a spec file.
    Synth(SynthArgs),
    /// Train a single fold and save its checkpoints.
    Train(TrainArgs),
    /// Stratified cross-validation with noise sweeps.
    Crossval(CrossvalArgs),
    /// Noise sweep of saved checkpoints on their test split.
    Noise(NoiseArgs),
    /// Export the learned coefficient ratios of a checkpoint.
    Coeffs(CoeffsArgs),
}

/// A comma-separated architecture list, or `all`.
#[derive(Debug, Clone)]
pub struct ArchList(pub Vec<Arch>);

fn parse_arch_list(s: &str) -> std::result::Result<ArchList, String> {
    if s == "all" {
        return Ok(ArchList(Arch::ALL.to_vec()));
    }
    let archs = s
        .split(',')
        .map(|a| a.trim().parse::<Arch>().map_err(|_| format!("unknown architecture {a:?} (nd, mlp, attnd, all)")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ArchList(dedup(archs)))
}

/// A comma-separated depth list, or `all`.
#[derive(Debug, Clone)]
pub struct DepthList(pub Vec<usize>);

fn parse_depth_list(s: &str) -> std::result::Result<DepthList, String> {
    if s == "all" {
        return Ok(DepthList((MIN_DEPTH..=MAX_DEPTH).collect()));
    }
    let depths = s
        .split(',')
        .map(|d| match d.trim().parse::<usize>() {
            Ok(d) if (MIN_DEPTH..=MAX_DEPTH).contains(&d) => Ok(d),
            _ => Err(format!("depth must be {MIN_DEPTH}..={MAX_DEPTH}, got {d:?}")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(DepthList(dedup(depths)))
}

fn parse_depth(s: &str) -> std::result::Result<usize, String> {
    match parse_depth_list(s)?.0.as_slice() {
        [d] => Ok(*d),
        _ => Err("expected a single depth".into()),
    }
}

fn dedup<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct DataArgs {
    /// Dataset CSV (band columns then `label`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Synthetic spec JSON; the dataset is generated in memory.
    #[arg(long)]
    pub synth: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        match (&self.data, &self.synth) {
            (Some(path), _) => load_csv(path),
            (None, Some(spec)) => Ok(synth_generate(&load_synth_spec(spec)?)?),
            (None, None) => Err(CliError::Usage("one of --data or --synth is required".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ND stability constant.
    #[arg(long, default_value_t = Epsilon::DEFAULT)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Weight decay.
    #[arg(long, default_value_t = 1e-4)]
    pub wd: f64,
    /// Apply weight decay AdamW-style instead of as an L2 term.
    #[arg(long)]
    pub decoupled_wd: bool,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 150)]
    pub epochs: usize,
    #[arg(long, default_value_t = 25)]
    pub patience: usize,
    /// Cross-validation folds; the test part of each fold is 1/folds.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Noise levels to sweep (must include 0 and 0.1).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ETAS.to_vec())]
    pub etas: Vec<f64>,
}

/// Validation share of every fold, as in the 70/20/10 protocol.
const VALIDATION_FRACTION: f64 = 0.2;

impl TrainFlags {
    fn config(&self) -> Result<CrossvalConfig> {
        let mut cfg = CrossvalConfig::new(self.seed);
        cfg.train.eps = self.eps;
        cfg.train.lr = self.lr;
        cfg.train.weight_decay = self.wd;
        cfg.train.decoupled_weight_decay = self.decoupled_wd;
        cfg.train.batch_size = self.batch;
        cfg.train.max_epochs = self.epochs;
        cfg.train.patience = self.patience;
        if self.folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
        cfg.split.folds = self.folds;
        cfg.split.test = 1.0 / self.folds as f64;
        cfg.split.validation = VALIDATION_FRACTION;
        cfg.split.train = 1.0 - VALIDATION_FRACTION - cfg.split.test;
        cfg.etas = self.etas.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerTarget {
    /// The unsigned layer on positive bands.
    Nd,
    /// Smooth-absolute-value denominator on signed bands.
    SmoothAbs,
    /// Softplus-preactivated signed bands.
    SoftplusInputs,
    /// ND layer followed by the attention gate.
    Attention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StencilArg {
    ThreePoint,
    FivePoint,
}

impl From<StencilArg> for Stencil {
    fn from(s: StencilArg) -> Self {
        match s {
            StencilArg::ThreePoint => Stencil::ThreePoint,
            StencilArg::FivePoint => Stencil::FivePoint,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value = "nd", value_parser = parse_arch_list)]
    pub arch: ArchList,
    #[arg(long, default_value = "2", value_parser = parse_depth_list)]
    pub depth: DepthList,
    /// Check a single layer instead of whole models.
    #[arg(long, value_enum)]
    pub layer: Option<LayerTarget>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    /// Central difference formula.
    #[arg(long, value_enum, default_value_t = StencilArg::FivePoint)]
    pub stencil: StencilArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ε values drawn per trial.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-8, 1e-4])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub bands: usize,
    /// Coordinates sampled per gradient family per trial (0 checks all).
    #[arg(long, default_value_t = 16)]
    pub coords: usize,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Spec JSON mirroring the generator fields.
    #[arg(long)]
    pub synth: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long, default_value = "nd", value_parser = |s: &str| s.parse::<Arch>().map_err(|_| format!("unknown architecture {s:?} (nd, mlp, attnd)")))]
    pub arch: Arch,
    #[arg(long, default_value = "2", value_parser = parse_depth)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub fold: usize,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long, default_value = "nd", value_parser = parse_arch_list)]
    pub arch: ArchList,
    #[arg(long, default_value = "2", value_parser = parse_depth_list)]
    pub depth: DepthList,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Checkpoint files (repeat the flag or separate with commas).
    #[arg(long, required = true, value_delimiter = ',')]
    pub checkpoint: Vec<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Split seed; defaults to the checkpoint's training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fold whose test part is swept; defaults to the checkpoint's fold.
    #[arg(long)]
    pub fold: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ETAS.to_vec())]
    pub etas: Vec<f64>,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub topk: usize,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

/// Parses `args` (without the program name), runs the command and returns
/// the process exit code. Failures print one `error[kind]: reason` line on
/// stderr.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let argv = std::iter::once("ndlayer".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.render().to_string();
            let mut lines = rendered.lines();
            let first = lines.next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            for line in lines.filter(|l| !l.trim().is_empty()) {
                eprintln!("{line}");
            }
            return 2;
        }
    };
    match run(cli, &args) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string().replace('\n', "; ");
            eprintln!("error[{}]: {message}", e.kind());
            if matches!(e, CliError::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(cli: Cli, args: &[String]) -> Result<()> {
    match cli.command {
        Command::Gradcheck(a) => cmd_gradcheck(&a, args),
        Command::Synth(a) => cmd_synth(&a),
        Command::Train(a) => cmd_train(&a, args),
        Command::Crossval(a) => cmd_crossval(&a, args),
        Command::Noise(a) => cmd_noise(&a, args),
        Command::Coeffs(a) => cmd_coeffs(&a, args),
    }
}

#[derive(Serialize)]
struct GradcheckFile<'a> {
    meta: &'a RunMeta,
    config: &'a GradcheckConfig,
    reports: &'a [GradcheckReport],
}

pub fn cmd_gradcheck(a: &GradcheckArgs, args: &[String]) -> Result<()> {
    let cfg = GradcheckConfig {
        trials: a.trials,
        tolerance: a.tol,
        step: a.step,
        stencil: a.stencil.into(),
        seed: a.seed,
        eps_values: a.eps.clone(),
        coords_per_family: (a.coords > 0).then_some(a.coords),
        n_bands: a.bands,
        zero_upstream: false,
    };
    let reports: Vec<GradcheckReport> = match a.layer {
        Some(LayerTarget::Nd) => vec![gradcheck_layer(Variant::Unsigned, &cfg)?],
        Some(LayerTarget::SmoothAbs) => vec![gradcheck_layer(Variant::SmoothAbs, &cfg)?],
        Some(LayerTarget::SoftplusInputs) => vec![gradcheck_layer(Variant::SoftplusInputs, &cfg)?],
        Some(LayerTarget::Attention) => vec![gradcheck_attention(&cfg)?],
        None => {
            let targets: Vec<(Arch, usize)> = a
                .arch
                .0
                .iter()
                .flat_map(|&arch| a.depth.0.iter().map(move |&d| (arch, d)))
                .collect();
            let pool = thread_pool()?;
            pool.install(|| {
                targets
                    .par_iter()
                    .map(|&(arch, depth)| gradcheck(arch, depth, &cfg))
                    .collect::<ndlayer_core::Result<Vec<_>>>()
            })?
        }
    };
    let meta = RunMeta::new("gradcheck", args, a.seed);
    let dir = create_run_dir(&a.out, "gradcheck", a.seed)?;
    write_json(
        &dir.join("gradcheck.json"),
        &GradcheckFile {
            meta: &meta,
            config: &cfg,
            reports: &reports,
        },
    )?;
    let text = report::gradcheck_text(&meta, &reports);
    write_file(&dir.join("gradcheck.txt"), &text)?;
    print!("{text}");
    println!("wrote {}", dir.display());
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.target.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "gradient check above tolerance {:e} for {}",
            a.tol,
            failed.join(", ")
        )))
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let mut spec = load_synth_spec(&a.synth)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let ds = synth_generate(&spec)?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    save_csv(&ds, &a.out)?;
    let [c0, c1] = ds.class_counts();
    println!(
        "wrote {} rows ({} bands; class 0: {c0}, class 1: {c1}) to {}",
        ds.len(),
        ds.n_bands(),
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    meta: &'a RunMeta,
    config: &'a CrossvalConfig,
    report: &'a EvalReport,
}

/// Writes the report, curves and checkpoints of one architecture/depth.
fn write_group(
    dir: &Path,
    meta: &RunMeta,
    cfg: &CrossvalConfig,
    band_names: &[String],
    report: &EvalReport,
    folds: &[&FoldResult],
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_json(
        &dir.join("report.json"),
        &ReportFile {
            meta,
            config: cfg,
            report,
        },
    )?;
    write_file(&dir.join("report.txt"), &report::crossval_text(meta, report))?;
    for metric in HISTORY_METRICS {
        let csv = report::history_csv(meta, report.arch, report.depth, folds, metric);
        write_file(&dir.join(format!("history-{metric}.csv")), &csv)?;
    }
    let rows: Vec<SweepRow> = report
        .folds
        .iter()
        .flat_map(|f| {
            f.noise.iter().map(move |p| SweepRow {
                eta: p.eta,
                value: p.accuracy_pct,
                fold: f.fold,
                arch: report.arch,
                depth: report.depth,
            })
        })
        .collect();
    write_file(&dir.join("sweep.csv"), &report::sweep_csv(meta, &rows))?;
    let ckpt_dir = dir.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| CliError::io(&ckpt_dir, e))?;
    for f in folds {
        Checkpoint::from_model(&f.model, band_names)?
            .with_meta(meta.clone())
            .with_origin(Origin {
                seed: cfg.train.seed,
                fold: f.fold,
                folds: cfg.split.folds,
            })
            .save(&ckpt_dir.join(format!("fold-{}.json", f.fold)))?;
    }
    Ok(())
}

pub fn cmd_train(a: &TrainArgs, args: &[String]) -> Result<()> {
    let cfg = a.train.config()?;
    if a.fold >= cfg.split.folds {
        return Err(CliError::Usage(format!("--fold must be below {}", cfg.split.folds)));
    }
    let ds = a.data.load()?;
    let meta = RunMeta::new("train", args, a.train.seed);
    let dir = create_run_dir(&a.out, "train", a.train.seed)?;
    let origin = Origin {
        seed: cfg.train.seed,
        fold: a.fold,
        folds: cfg.split.folds,
    };
    let init = initial_model(a.arch, a.depth, ds.n_bands(), &cfg, a.fold)?;
    Checkpoint::from_model(&init, ds.band_names())?
        .with_meta(meta.clone())
        .save(&dir.join("checkpoint-init.json"))?;
    let fold = run_fold(a.arch, a.depth, &ds, &cfg, a.fold)?;
    let report = EvalReport::from_folds(a.arch, a.depth, std::slice::from_ref(&fold))?;
    write_group(&dir, &meta, &cfg, ds.band_names(), &report, &[&fold])?;
    Checkpoint::from_model(&fold.model, ds.band_names())?
        .with_meta(meta)
        .with_origin(origin)
        .save(&dir.join("checkpoint.json"))?;
    println!(
        "{} depth {} fold {}: test {:.2} %, best val {:.2} % at epoch {} (stopped at {})",
        a.arch,
        a.depth,
        a.fold,
        100.0 * fold.test_accuracy,
        100.0 * fold.history.best_val_accuracy,
        fold.history.best_epoch,
        fold.history.stopped_epoch
    );
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    meta: &'a RunMeta,
    config: &'a CrossvalConfig,
    reports: &'a [EvalReport],
}

pub fn cmd_crossval(a: &CrossvalArgs, args: &[String]) -> Result<()> {
    let cfg = a.train.config()?;
    let ds = a.data.load()?;
    let tasks: Vec<(Arch, usize, usize)> = a
        .arch
        .0
        .iter()
        .flat_map(|&arch| {
            a.depth
                .0
                .iter()
                .flat_map(move |&d| (0..cfg.split.folds).map(move |f| (arch, d, f)))
        })
        .collect();
    let pool = thread_pool()?;
    let results: Vec<FoldResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(arch, depth, fold)| run_fold(arch, depth, &ds, &cfg, fold))
            .collect::<ndlayer_core::Result<Vec<_>>>()
    })?;

    let mut groups: BTreeMap<(usize, usize), Vec<&FoldResult>> = BTreeMap::new();
    for (task, result) in tasks.iter().zip(&results) {
        let arch_rank = Arch::ALL.iter().position(|&x| x == task.0).unwrap_or(0);
        groups.entry((arch_rank, task.1)).or_default().push(result);
    }

    let meta = RunMeta::new("crossval", args, a.train.seed);
    let dir = create_run_dir(&a.out, "crossval", a.train.seed)?;
    let mut reports = Vec::new();
    for ((arch_rank, depth), folds) in &groups {
        let arch = Arch::ALL[*arch_rank];
        let owned: Vec<FoldResult> = folds.iter().map(|f| (*f).clone()).collect();
        let report = EvalReport::from_folds(arch, *depth, &owned)?;
        write_group(
            &dir.join(format!("{arch}-d{depth}")),
            &meta,
            &cfg,
            ds.band_names(),
            &report,
            folds,
        )?;
        reports.push(report);
    }
    write_json(
        &dir.join("summary.json"),
        &SummaryFile {
            meta: &meta,
            config: &cfg,
            reports: &reports,
        },
    )?;
    let text = report::summary_text(&meta, &reports);
    write_file(&dir.join("summary.txt"), &text)?;
    print!("{text}");
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct NoiseEntry {
    checkpoint: PathBuf,
    arch: Arch,
    depth: usize,
    seed: u64,
    fold: usize,
    points: Vec<ndlayer_core::eval::NoisePoint>,
}

#[derive(Serialize)]
struct NoiseFile<'a> {
    meta: &'a RunMeta,
    etas: &'a [f64],
    sweeps: &'a [NoiseEntry],
}

pub fn cmd_noise(a: &NoiseArgs, args: &[String]) -> Result<()> {
    let ds = a.data.load()?;
    let mut sweeps = Vec::new();
    for path in &a.checkpoint {
        let ckpt = Checkpoint::load(path)?;
        let model = ckpt.to_model()?;
        let origin = ckpt.origin;
        let seed = a.seed.or(origin.map(|o| o.seed));
        let fold = a.fold.or(origin.map(|o| o.fold));
        let folds = a.folds.or(origin.map(|o| o.folds)).unwrap_or(10);
        let (Some(seed), Some(fold)) = (seed, fold) else {
            return Err(CliError::Usage(format!(
                "{} records no training fold; pass --seed and --fold",
                path.display()
            )));
        };
        let split = SplitSpec {
            folds,
            test: 1.0 / folds as f64,
            validation: VALIDATION_FRACTION,
            train: 1.0 - VALIDATION_FRACTION - 1.0 / folds as f64,
            seed,
        };
        let (_, _, test) = stratified_split(&ds, &split, fold)?;
        let points = noise_sweep(&model, &test, &a.etas, fold_noise_seed(seed, fold))?;
        sweeps.push(NoiseEntry {
            checkpoint: path.clone(),
            arch: ckpt.arch,
            depth: ckpt.depth,
            seed,
            fold,
            points,
        });
    }
    let seed = sweeps.first().map_or(0, |s| s.seed);
    let meta = RunMeta::new("noise", args, seed);
    let dir = create_run_dir(&a.out, "noise", seed)?;
    let rows: Vec<SweepRow> = sweeps
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| SweepRow {
                eta: p.eta,
                value: 100.0 * p.accuracy,
                fold: s.fold,
                arch: s.arch,
                depth: s.depth,
            })
        })
        .collect();
    write_file(&dir.join("sweep.csv"), &report::sweep_csv(&meta, &rows))?;
    write_json(
        &dir.join("noise.json"),
        &NoiseFile {
            meta: &meta,
            etas: &a.etas,
            sweeps: &sweeps,
        },
    )?;
    println!("{:<6}  {:>5}  {:>4}  {:>6}  {:>10}", "arch", "depth", "fold", "eta", "accuracy %");
    for r in &rows {
        println!(
            "{:<6}  {:>5}  {:>4}  {:>6.2}  {:>10.2}",
            r.arch.to_string(),
            r.depth,
            r.fold,
            r.eta,
            r.value
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct CoeffsFile<'a> {
    meta: &'a RunMeta,
    band_names: &'a [String],
    ratios: Vec<Vec<f64>>,
    top: &'a [ndlayer_core::eval::AsymmetricPair],
}

pub fn cmd_coeffs(a: &CoeffsArgs, args: &[String]) -> Result<()> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let model = ckpt.to_model()?;
    let matrix = coeff_ratios(&model)
        .map_err(|e| CliError::Failed(format!("{}: {e}", a.checkpoint.display())))?
        .with_band_names(ckpt.band_names.clone())?;
    let top = matrix.top_asymmetric(a.topk);
    let seed = ckpt.origin.map_or(0, |o| o.seed);
    let meta = RunMeta::new("coeffs", args, seed);
    let dir = create_run_dir(&a.out, "coeffs", seed)?;
    write_file(&dir.join("ratios.csv"), &report::ratio_matrix_csv(&meta, &matrix))?;
    write_file(&dir.join("top.csv"), &report::top_pairs_csv(&meta, &matrix, &top))?;
    let n = matrix.n_bands();
    write_json(
        &dir.join("coeffs.json"),
        &CoeffsFile {
            meta: &meta,
            band_names: matrix.band_names(),
            ratios: matrix.values().chunks(n).map(<[f64]>::to_vec).collect(),
            top: &top,
        },
    )?;
    print!("{}", report::top_pairs_text(&matrix, &top));
    println!("wrote {}", dir.display());
    Ok(())
}
