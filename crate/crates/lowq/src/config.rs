//! Resolved run settings and their `key = value` echo.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lowq_core::data::{gen_synthetic, WaveDataset};
use lowq_core::models::{LtVariant, ModelKind, ModelSpec, VqcVariant};

use crate::error::{AppError, AppResult};
use crate::{cache, wav};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic {
        classes: usize,
        per_class: usize,
        length: usize,
        noise: f64,
    },
    WavDir {
        root: PathBuf,
        length: usize,
    },
    Cache(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub model: ModelKind,
    pub qubits: usize,
    pub depth: usize,
    pub vqc: VqcVariant,
    pub lt: LtVariant,
    pub clip: bool,
    pub seed: u64,
    pub epochs: usize,
    /// Step budget; overrides `epochs` when set.
    pub steps: Option<usize>,
    pub batch_size: usize,
    pub lr: f64,
    pub data: DataSource,
    /// Sequence length for the transformer; features = input length / seq_len.
    pub seq_len: usize,
    pub out_dir: PathBuf,
    pub threads: usize,
    /// Leave the wall_ms column blank so reruns produce identical logs.
    pub reproducible: bool,
}

impl RunConfig {
    pub fn new(command: &str, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            command: command.into(),
            model: ModelKind::QM5Mini,
            qubits: 4,
            depth: 1,
            vqc: VqcVariant::LowQubit,
            lt: LtVariant::Fc,
            clip: true,
            seed: 0,
            epochs: 1,
            steps: None,
            batch_size: 8,
            lr: lowq_core::train::DEFAULT_LR,
            data: DataSource::Synthetic {
                classes: 4,
                per_class: 64,
                length: 1024,
                noise: 0.05,
            },
            seq_len: 16,
            out_dir: out_dir.into(),
            threads: 1,
            reproducible: false,
        }
    }

    pub fn load_data(&self) -> AppResult<(WaveDataset, Vec<String>)> {
        match &self.data {
            DataSource::Synthetic {
                classes,
                per_class,
                length,
                noise,
            } => Ok((
                gen_synthetic(*classes, *per_class, *length, *noise, self.seed)?,
                Vec::new(),
            )),
            DataSource::WavDir { root, length } => {
                let report = wav::load_wav_dir(root, *length)?;
                let warnings = report.warnings();
                Ok((report.dataset, warnings))
            }
            DataSource::Cache(path) => Ok((cache::load(path)?, Vec::new())),
        }
    }

    pub fn model_spec(&self, dataset: &WaveDataset) -> AppResult<ModelSpec> {
        let base = match self.model {
            ModelKind::M5Mini => ModelSpec::m5_mini(),
            ModelKind::QM5Mini => ModelSpec::qm5_mini(self.qubits),
            ModelKind::QTransformerMini => ModelSpec::qtransformer_mini(self.qubits),
        };
        let seq_len = if self.model == ModelKind::QTransformerMini {
            self.seq_len
        } else {
            1
        };
        let spec = ModelSpec {
            n_qubits: self.qubits,
            vqc_variant: self.vqc,
            lt_variant: self.lt,
            clip_enabled: self.clip,
            depth: self.depth,
            n_classes: dataset.n_classes().max(2),
            input_length: dataset.length(),
            seq_len,
            ..base
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kv_pairs(&self) -> Vec<(&'static str, String)> {
        let on_off = |b: bool| if b { "on" } else { "off" }.to_string();
        let mut kv = vec![
            ("command", self.command.clone()),
            ("model", self.model.name().to_string()),
            ("qubits", self.qubits.to_string()),
            ("depth", self.depth.to_string()),
            ("vqc", self.vqc.name().to_string()),
            ("lt", self.lt.name().to_string()),
            ("clip", on_off(self.clip)),
            ("seed", self.seed.to_string()),
            ("epochs", self.epochs.to_string()),
            (
                "steps",
                self.steps.map_or_else(|| "none".to_string(), |s| s.to_string()),
            ),
            ("batch_size", self.batch_size.to_string()),
            ("lr", self.lr.to_string()),
        ];
        match &self.data {
            DataSource::Synthetic {
                classes,
                per_class,
                length,
                noise,
            } => {
                kv.push(("data", "synthetic".into()));
                kv.push(("classes", classes.to_string()));
                kv.push(("per_class", per_class.to_string()));
                kv.push(("length", length.to_string()));
                kv.push(("noise", noise.to_string()));
            }
            DataSource::WavDir { root, length } => {
                kv.push(("data", format!("wav:{}", root.display())));
                kv.push(("length", length.to_string()));
            }
            DataSource::Cache(path) => kv.push(("data", format!("cache:{}", path.display()))),
        }
        kv.push(("seq_len", self.seq_len.to_string()));
        kv.push(("out", self.out_dir.display().to_string()));
        kv.push(("threads", self.threads.to_string()));
        kv.push(("reproducible", self.reproducible.to_string()));
        kv
    }

    pub fn to_kv(&self) -> String {
        kv_text(&self.kv_pairs())
    }

    /// Creates the output directory and writes `config.txt` into it.
    pub fn echo(&self) -> AppResult<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| AppError::io(&self.out_dir, e))?;
        write_text(&self.out_dir.join("config.txt"), &self.to_kv())
    }
}

pub fn kv_text(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}
