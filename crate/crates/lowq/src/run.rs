//! The `train` command: data, model, loop, and the files it leaves behind.

use lowq_core::models::{build_model, Model};
use lowq_core::train::{train_loop, TrainConfig, TrainSummary, TrainTrace};

use crate::checkpoint;
use crate::config::{kv_text, write_text, RunConfig};
use crate::error::{AppError, AppResult};
use crate::exec::RunHooks;
use crate::runlog::LossLog;

pub const CONFIG_FILE: &str = "config.txt";
pub const LOSS_FILE: &str = "loss.csv";
pub const CHECKPOINT_FILE: &str = "model.qspc";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub trace: TrainTrace,
    pub summary: TrainSummary,
    pub warnings: Vec<String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn summary_text(model: &Model, s: &TrainSummary) -> String {
    kv_text(&[
        ("steps", s.steps.to_string()),
        ("n_params", model.n_params().to_string()),
        ("final_loss", s.final_loss.to_string()),
        ("stability", s.stability.to_string()),
        ("median_step_ms", format!("{:.3}", s.median_step_ms)),
        ("total_ms", format!("{:.3}", s.total_ms)),
        ("final_accuracy", fmt_opt(s.final_accuracy)),
    ])
}

/// Trains as configured, writing the config echo, loss CSV, checkpoint and
/// summary into the output directory.
pub fn run_train(cfg: &RunConfig) -> AppResult<TrainOutcome> {
    if cfg.batch_size == 0 {
        return Err(AppError::Usage("batch size must be at least 1".into()));
    }
    if cfg.threads == 0 {
        return Err(AppError::Usage("threads must be at least 1".into()));
    }
    cfg.echo()?;
    let (dataset, warnings) = cfg.load_data()?;
    let spec = cfg.model_spec(&dataset)?;
    let mut model = build_model(spec, cfg.seed)?;
    let mut tc = TrainConfig::new(cfg.epochs, cfg.batch_size, cfg.seed).lr(cfg.lr);
    if let Some(steps) = cfg.steps {
        tc = tc.steps(steps, dataset.len());
    }
    let mut log = LossLog::create(&cfg.out_dir.join(LOSS_FILE), !cfg.reproducible)?;
    let trace = train_loop(
        &mut model,
        &dataset,
        &tc,
        &mut RunHooks::new(cfg.threads, Some(&mut log)),
    )?;
    let summary = trace.summary();
    checkpoint::save(&model, &cfg.out_dir.join(CHECKPOINT_FILE))?;
    write_text(&cfg.out_dir.join(SUMMARY_FILE), &summary_text(&model, &summary))?;
    Ok(TrainOutcome {
        model,
        trace,
        summary,
        warnings,
    })
}
