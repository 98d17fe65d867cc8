//! `felm`: dataset generation, training, reducer benchmarks and tank missions.

mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use felm::bench::reduce_bench;
use felm::data::Dataset;
use felm::io::{load_model, save_model, to_json};
use felm::sim::{generate_dataset, run_mission};
use felm::train::{cross_validate, Trainer};
use felm::FelmError;
use serde::Serialize;

use config::RunConfig;
use manifest::{digest_file, manifest_path, RunManifest, MANIFEST_FORMAT, MANIFEST_VERSION};

/// Edge-error ceiling (m) checked by `simulate --assert`.
const MAX_EDGE_ERROR: f64 = 0.15;
/// In-mission accuracy floor checked by `simulate --assert`.
const MIN_MISSION_ACCURACY: f64 = 0.85;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config or input files (exit 1).
    Validation(anyhow::Error),
    /// I/O or a run that could not finish (exit 2).
    Runtime(anyhow::Error),
    /// A requested `--assert` check failed (exit 3).
    Assertion(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Assertion(_) => 3,
        }
    }
}

impl From<FelmError> for CliError {
    fn from(e: FelmError) -> Self {
        match e {
            FelmError::InvalidConfig(_)
            | FelmError::InvalidDataset(_)
            | FelmError::Format(_)
            | FelmError::DimensionMismatch { .. }
            | FelmError::NonFinite(_)
            | FelmError::DegenerateRange { .. }
            | FelmError::TooManyRules { .. } => CliError::Validation(e.into()),
            _ => CliError::Runtime(e.into()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "felm", version, about = "Interval type-2 fuzzy ELM classifiers and a tank navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labelled synthetic sonar dataset.
    GenData(GenDataArgs),
    /// Cross-validate a trainer, then fit a final model on all rows.
    Train(TrainArgs),
    /// Time SC, KM and Wu-Mendel reduction on random instances.
    ReduceBench(BenchArgs),
    /// Run a tank mission with a trained model.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file, or a manifest JSON from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    wall: Option<usize>,
    #[arg(long)]
    corner: Option<usize>,
    /// Sonar noise standard deviation (m).
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Evaluation report; defaults to `<model>.report.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// fit2felm, it2felm-km, t1felm or elm.
    #[arg(long)]
    trainer: Option<Trainer>,
    #[arg(long)]
    rules: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    bias: Option<bool>,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long)]
    passes: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated rule counts.
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Exit 3 on any SC/KM disagreement or if SC is slower than KM at 6 or more rules.
    #[arg(long)]
    assert: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: PathBuf,
    /// Per-step mission log CSV.
    #[arg(long)]
    log: PathBuf,
    /// Summary JSON; defaults to `<log>.summary.json`.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    circuits: Option<usize>,
    /// Exit 3 unless the mission completes without collisions within the edge and accuracy limits.
    #[arg(long)]
    assert: bool,
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        Some(p) if p.extension().is_some_and(|e| e == "json") => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(CliError::Runtime)?;
            let m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", p.display())).map_err(CliError::Validation)?;
            if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
                return Err(CliError::Validation(anyhow!("{} is not a version {MANIFEST_VERSION} manifest", p.display())));
            }
            serde_json::from_value(m.config).context("manifest config").map_err(CliError::Validation)
        }
        other => RunConfig::load(other),
    }
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(CliError::Runtime)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(CliError::Runtime)
}

/// Adds format, version and manifest fields to a JSON report.
fn artifact<T: Serialize>(format: &str, manifest: &Path, body: &T) -> CliResult<String> {
    let mut value = serde_json::to_value(body).map_err(|e| CliError::Runtime(e.into()))?;
    let obj = value.as_object_mut().ok_or_else(|| CliError::Runtime(anyhow!("report is not a JSON object")))?;
    obj.insert("format".into(), format.into());
    obj.insert("version".into(), 1.into());
    obj.insert("manifest".into(), manifest.display().to_string().into());
    serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.into()))
}

struct Run<'a> {
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
    start: Instant,
}

impl Run<'_> {
    fn finish(&self, inputs: &[&Path], outputs: &[&Path]) -> CliResult<PathBuf> {
        let digest = |paths: &[&Path]| paths.iter().map(|p| digest_file(p)).collect::<std::io::Result<Vec<_>>>();
        let manifest = RunManifest {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            command: self.command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: self.seed,
            config: serde_json::to_value(self.config).map_err(|e| CliError::Runtime(e.into()))?,
            inputs: digest(inputs).context("hashing inputs").map_err(CliError::Runtime)?,
            outputs: digest(outputs).context("hashing outputs").map_err(CliError::Runtime)?,
            wall_clock_s: self.start.elapsed().as_secs_f64(),
        };
        let path = manifest_path(outputs[0]);
        write(&path, &to_json(&manifest)?)?;
        Ok(path)
    }
}

fn gen_data(args: GenDataArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut cfg = load_config(args.common.config.as_deref())?;
    let d = &mut cfg.data;
    d.seed = args.common.seed.unwrap_or(d.seed);
    d.wall = args.wall.unwrap_or(d.wall);
    d.corner = args.corner.unwrap_or(d.corner);
    d.noise = args.noise.unwrap_or(d.noise);
    let data = generate_dataset(d)?;
    write(&args.out, &data.to_csv())?;
    let run = Run { command: "gen-data", seed: cfg.data.seed, config: &cfg, start };
    run.finish(&[], &[&args.out])?;
    let [wall, corner] = data.class_counts();
    println!("wrote {} rows ({wall} wall, {corner} corner) to {}", data.len(), args.out.display());
    Ok(())
}

fn train(args: TrainArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut cfg = load_config(args.common.config.as_deref())?;
    let t = &mut cfg.train;
    t.trainer = args.trainer.unwrap_or(t.trainer);
    t.folds = args.folds.unwrap_or(t.folds);
    let c = &mut t.config;
    c.seed = args.common.seed.unwrap_or(c.seed);
    c.rules = args.rules.unwrap_or(c.rules);
    c.bias = args.bias.unwrap_or(c.bias);
    c.ridge = args.ridge.unwrap_or(c.ridge);
    c.passes = args.passes.unwrap_or(c.passes);
    if t.folds < 2 {
        return Err(CliError::Validation(anyhow!("--folds must be at least 2, got {}", t.folds)));
    }
    t.config.validate()?;

    let text = read(&args.data)?;
    let data = Dataset::from_csv(&text).map_err(|e| CliError::Validation(anyhow!("{}: {e}", args.data.display())))?;
    let eval = cross_validate(&data, &t.config, t.trainer, t.folds)?;
    let fitted = t.trainer.fit(&data, &t.config)?;
    write(&args.model, &save_model(&fitted.model, Some(t.trainer))?)?;

    let report_path = args.report.unwrap_or_else(|| {
        let mut name = args.model.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".report.json");
        args.model.with_file_name(name)
    });
    let manifest = manifest_path(&args.model);
    #[derive(Serialize)]
    struct Report<'a> {
        cross_validation: &'a felm::train::EvalReport,
        final_fit: &'a felm::train::TrainReport,
    }
    let report = Report { cross_validation: &eval, final_fit: &fitted.report };
    write(&report_path, &artifact("felm-eval-report", &manifest, &report)?)?;
    let run = Run { command: "train", seed: t.config.seed, config: &cfg, start };
    run.finish(&[&args.data], &[&args.model, &report_path])?;
    println!(
        "{}: {}-fold test accuracy {:.2}% (std {:.2}), train {:.2}%; model written to {}",
        eval.trainer,
        eval.folds,
        eval.mean_test_accuracy,
        eval.std_test_accuracy,
        eval.mean_train_accuracy,
        args.model.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut cfg = load_config(args.common.config.as_deref())?;
    let b = &mut cfg.bench;
    b.seed = args.common.seed.unwrap_or(b.seed);
    if let Some(r) = args.rules {
        b.rules = r;
    }
    b.instances = args.instances.unwrap_or(b.instances);
    b.batch = args.batch.unwrap_or(b.batch);
    let report = reduce_bench(b)?;
    let manifest = manifest_path(&args.out);
    write(&args.out, &artifact("felm-bench", &manifest, &report)?)?;
    let run = Run { command: "reduce-bench", seed: cfg.bench.seed, config: &cfg, start };
    run.finish(&[], &[&args.out])?;
    for e in &report.entries {
        println!(
            "M={:>3}: sc {:.0} ns, km {:.0} ns, wm {:.0} ns, max |sc-km| {:.1e}, violations {}",
            e.rules, e.sc_median_ns, e.km_median_ns, e.wm_median_ns, e.max_disagreement, e.violations
        );
    }
    if args.assert {
        if report.violations() > 0 {
            return Err(CliError::Assertion(format!("{} SC/KM disagreements above tolerance", report.violations())));
        }
        if let Some(e) = report.entries.iter().find(|e| e.rules >= 6 && !e.sc_not_slower) {
            return Err(CliError::Assertion(format!("SC slower than KM at M={}", e.rules)));
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut cfg = load_config(args.common.config.as_deref())?;
    let m = &mut cfg.mission;
    m.seed = args.common.seed.unwrap_or(m.seed);
    m.circuits = args.circuits.unwrap_or(m.circuits);
    let model = load_model(&read(&args.model)?).map_err(|e| CliError::Validation(anyhow!("{}: {e}", args.model.display())))?;
    if model.inputs() != m.offsets.len() {
        return Err(CliError::Validation(anyhow!("model expects {} inputs but the sonar has {} beams", model.inputs(), m.offsets.len())));
    }
    let log = run_mission(m, &model)?;
    let summary_path = args.summary.unwrap_or_else(|| {
        let mut name = args.log.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".summary.json");
        args.log.with_file_name(name)
    });
    write(&args.log, &log.to_csv())?;
    let manifest = manifest_path(&args.log);
    write(&summary_path, &artifact("felm-mission-summary", &manifest, &log.summary)?)?;
    let run = Run { command: "simulate", seed: cfg.mission.seed, config: &cfg, start };
    run.finish(&[&args.model], &[&args.log, &summary_path])?;

    let s = &log.summary;
    println!(
        "circuits {}/{}, collisions {}, mean |edge error| {:.3} m, classification accuracy {:.1}%, {:.0} s simulated",
        s.circuits_completed,
        s.circuits_required,
        s.collisions,
        s.mean_abs_edge_error,
        100.0 * s.classification_accuracy,
        s.sim_time
    );
    if !s.completed {
        return Err(CliError::Runtime(anyhow!("mission did not complete: {}", s.failure.as_deref().unwrap_or("unknown reason"))));
    }
    if args.assert {
        let mut failed = Vec::new();
        if s.collisions > 0 {
            failed.push(format!("{} collisions", s.collisions));
        }
        if !(s.mean_abs_edge_error <= MAX_EDGE_ERROR) {
            failed.push(format!("edge error {:.3} > {MAX_EDGE_ERROR}", s.mean_abs_edge_error));
        }
        if !(s.classification_accuracy >= MIN_MISSION_ACCURACY) {
            failed.push(format!("accuracy {:.3} < {MIN_MISSION_ACCURACY}", s.classification_accuracy));
        }
        if !failed.is_empty() {
            return Err(CliError::Assertion(failed.join("; ")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::ReduceBench(a) => bench(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Validation(err) | CliError::Runtime(err) => eprintln!("error: {err:#}"),
                CliError::Assertion(msg) => eprintln!("assertion failed: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
