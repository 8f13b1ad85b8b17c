use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lowq_core::data::gen_synthetic;
use lowq_core::models::{LtVariant, ModelKind, VqcVariant};

use crate::bench::{run_bench, BenchConfig, Pair, DEFAULT_SEEDS, DEFAULT_STEPS, PLAIN_QUBITS};
use crate::config::{DataSource, RunConfig};
use crate::error::{AppError, AppResult};
use crate::gradcheck::{run_gradcheck, TOLERANCE};
use crate::run::{run_train, LOSS_FILE};
use crate::simcheck::{run_simcheck, Fault};
use crate::{cache, wav};

#[derive(Debug, Parser)]
#[command(
    name = "lowq",
    version,
    about = "Low-qubit variational circuits: verification, training and benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized simulator checks against dense-matrix oracles.
    Simcheck(SimcheckArgs),
    /// Analytic gradients against finite differences for every component.
    Gradcheck(GradcheckArgs),
    /// Train one model and write its loss log, checkpoint and summary.
    Train(TrainArgs),
    /// Matched-pair comparisons over several seeds.
    Bench(BenchArgs),
    /// Write a synthetic dataset as a WAV directory and optionally a cache file.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SimcheckArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..=12))]
    pub qubits: u16,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true, value_parser = ["unitarity"])]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(2..=10))]
    pub qubits: u16,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub depth: u16,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// m5_mini, qm5_mini or qtransformer_mini.
    #[arg(long, default_value = "qm5_mini")]
    pub model: ModelKind,
    /// Defaults to 4, or 8 with the plain VQC.
    #[arg(long, value_parser = ["2", "4", "8"])]
    pub qubits: Option<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub depth: u16,
    /// lowqubit or plain.
    #[arg(long, default_value = "lowqubit")]
    pub vqc: VqcVariant,
    /// fc or bilinear.
    #[arg(long, default_value = "fc")]
    pub lt: LtVariant,
    #[arg(long, default_value = "on", value_parser = ["on", "off"])]
    pub clip: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Step budget; overrides --epochs.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, default_value_t = lowq_core::train::DEFAULT_LR)]
    pub lr: f64,
    /// Per-class directories of 16-bit mono PCM WAV files.
    #[arg(long, conflicts_with = "cache")]
    pub wav_dir: Option<PathBuf>,
    /// Dataset cache written by `synth --cache`.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 64)]
    pub per_class: usize,
    #[arg(long, default_value_t = 1024)]
    pub length: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 16)]
    pub seq_len: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Leave wall_ms blank in the loss log.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "runs/train")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "runs/bench")]
    pub out: PathBuf,
    /// Comma-separated subset of vqc, clip, lt, qubits.
    #[arg(long, value_delimiter = ',', default_value = "vqc,clip,lt,qubits")]
    pub pairs: Vec<Pair>,
    #[arg(long, default_value_t = DEFAULT_SEEDS)]
    pub seeds: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 64)]
    pub per_class: usize,
    #[arg(long, default_value_t = 1024)]
    pub length: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl RunArgs {
    pub fn to_config(&self, command: &str, out: PathBuf) -> RunConfig {
        let qubits = match (&self.qubits, self.vqc) {
            (Some(q), _) => q.parse().expect("restricted to 2, 4, 8"),
            (None, VqcVariant::Plain) => PLAIN_QUBITS,
            (None, VqcVariant::LowQubit) => 4,
        };
        let data = match (&self.wav_dir, &self.cache) {
            (Some(root), _) => DataSource::WavDir {
                root: root.clone(),
                length: self.length,
            },
            (None, Some(path)) => DataSource::Cache(path.clone()),
            (None, None) => DataSource::Synthetic {
                classes: self.classes,
                per_class: self.per_class,
                length: self.length,
                noise: self.noise,
            },
        };
        RunConfig {
            command: command.into(),
            model: self.model,
            qubits,
            depth: self.depth as usize,
            vqc: self.vqc,
            lt: self.lt,
            clip: self.clip == "on",
            seed: self.seed,
            epochs: self.epochs,
            steps: self.steps,
            batch_size: self.batch_size,
            lr: self.lr,
            data,
            seq_len: self.seq_len,
            out_dir: out,
            threads: self.threads,
            reproducible: self.reproducible,
        }
    }
}

fn simcheck(args: &SimcheckArgs) -> AppResult<()> {
    let fault = args.inject_fault.as_ref().map(|_| Fault::Unitarity);
    let report = run_simcheck(args.qubits as usize, args.seed, fault)?;
    for p in &report.properties {
        match &p.failure {
            None => println!("PASS {:<22} {:>4} cases, worst error {:.3e}", p.name, p.cases, p.worst),
            Some(case) => println!("FAIL {:<22} {case}", p.name),
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(AppError::Verification(format!(
            "simcheck failed: {}",
            report.failures().join(", ")
        )))
    }
}

fn gradcheck(args: &GradcheckArgs) -> AppResult<()> {
    let report = run_gradcheck(args.qubits as usize, args.depth as usize, args.seed)?;
    for c in &report.components {
        println!(
            "{} {:<14} max relative error {:.3e} over {} values",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.max_rel_err,
            c.n_checked
        );
    }
    let v = report.vanishing;
    println!("encoder weight gradient, mean |dL/dW_in|:");
    println!("  clipped, inputs x1      {:.6e}", v.clipped);
    println!(
        "  unclipped, inputs x100  {:.6e}  (clipped / unclipped = {:.3})",
        v.unclipped_scaled,
        v.ratio()
    );
    println!("  clipped, inputs x100    {:.6e}", v.clipped_scaled);
    if report.passed() {
        Ok(())
    } else {
        Err(AppError::Verification(format!(
            "gradient error above {TOLERANCE:e} in {}",
            report.failures().join(", ")
        )))
    }
}

fn train(args: &TrainArgs) -> AppResult<()> {
    let cfg = args.run.to_config("train", args.out.clone());
    let outcome = run_train(&cfg)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let s = &outcome.summary;
    println!("steps           {}", s.steps);
    println!("parameters      {}", outcome.model.n_params());
    println!("final loss      {:.6}", s.final_loss);
    println!("stability       {:.6}", s.stability);
    println!("median step ms  {:.3}", s.median_step_ms);
    if let Some(a) = s.final_accuracy {
        println!("accuracy        {a:.4}");
    }
    println!("wrote {}", cfg.out_dir.join(LOSS_FILE).display());
    Ok(())
}

fn bench(args: &BenchArgs) -> AppResult<()> {
    let base = args.run.to_config("bench", args.out.clone());
    let cfg = BenchConfig {
        steps: base.steps.unwrap_or(DEFAULT_STEPS),
        pairs: args.pairs.clone(),
        seeds: args.seeds,
        base,
    };
    let report = run_bench(&cfg, |line| eprintln!("{line}"))?;
    print!("{}", report.text());
    Ok(())
}

fn synth(args: &SynthArgs) -> AppResult<()> {
    let ds = gen_synthetic(args.classes, args.per_class, args.length, args.noise, args.seed)?;
    wav::write_wav_dir(&ds, &args.out)?;
    println!("wrote {} files under {}", ds.len(), args.out.display());
    if let Some(path) = &args.cache {
        cache::save(&ds, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> AppResult<()> {
    match &cli.command {
        Command::Simcheck(a) => simcheck(a),
        Command::Gradcheck(a) => gradcheck(a),
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synth(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
