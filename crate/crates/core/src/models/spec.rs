use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    M5Mini,
    QM5Mini,
    QTransformerMini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VqcVariant {
    LowQubit,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtVariant {
    Fc,
    Bilinear,
}

macro_rules! names {
    ($ty:ty, $what:literal, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self {
                    $(Self::$variant => $name,)+
                }
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err(Error::config(format!(concat!("unknown ", $what, " '{}'"), other))),
                }
            }
        }
    };
}

names!(ModelKind, "model kind", M5Mini => "m5_mini", QM5Mini => "qm5_mini", QTransformerMini => "qtransformer_mini");
names!(VqcVariant, "VQC variant", LowQubit => "lowqubit", Plain => "plain");
names!(LtVariant, "LT variant", Fc => "fc", Bilinear => "bilinear");

/// Kernel sizes and strides of the two convolution stages.
pub const CONV1: (usize, usize) = (8, 4);
pub const CONV2: (usize, usize) = (4, 2);
pub const POOL: usize = 4;

/// Everything needed to rebuild a model; parameter count is a pure function
/// of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n_qubits: usize,
    pub vqc_variant: VqcVariant,
    pub lt_variant: LtVariant,
    pub clip_enabled: bool,
    pub depth: usize,
    /// Conv channel widths, or `[model_dim, ff_hidden]` for the transformer.
    pub widths: [usize; 2],
    pub n_classes: usize,
    /// Samples per input: waveform length, or `seq_len × features`.
    pub input_length: usize,
    pub seq_len: usize,
    pub n_heads: usize,
}

impl ModelSpec {
    pub fn qm5_mini(n_qubits: usize) -> Self {
        ModelSpec {
            kind: ModelKind::QM5Mini,
            n_qubits,
            vqc_variant: VqcVariant::LowQubit,
            lt_variant: LtVariant::Fc,
            clip_enabled: true,
            depth: 1,
            widths: [8, 8],
            n_classes: 4,
            input_length: 1024,
            seq_len: 1,
            n_heads: 1,
        }
    }

    pub fn m5_mini() -> Self {
        ModelSpec {
            kind: ModelKind::M5Mini,
            ..Self::qm5_mini(4)
        }
    }

    /// Plain-VQC twin of [`ModelSpec::qm5_mini`]: qubits equal the kernel size.
    pub fn qm5_mini_plain() -> Self {
        ModelSpec {
            vqc_variant: VqcVariant::Plain,
            ..Self::qm5_mini(CONV1.0)
        }
    }

    pub fn qtransformer_mini(n_qubits: usize) -> Self {
        ModelSpec {
            kind: ModelKind::QTransformerMini,
            n_qubits,
            vqc_variant: VqcVariant::LowQubit,
            lt_variant: LtVariant::Fc,
            clip_enabled: true,
            depth: 1,
            widths: [8, 16],
            n_classes: 2,
            input_length: 64,
            seq_len: 16,
            n_heads: 2,
        }
    }

    pub fn features(&self) -> usize {
        self.input_length / self.seq_len.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::config("need at least 2 classes"));
        }
        if self.widths.contains(&0) || self.depth == 0 || self.input_length == 0 {
            return Err(Error::config("widths, depth and input length must be positive"));
        }
        if self.kind != ModelKind::M5Mini && ![2, 4, 8].contains(&self.n_qubits) {
            return Err(Error::config(format!(
                "n_qubits must be 2, 4 or 8, got {}",
                self.n_qubits
            )));
        }
        if self.vqc_variant == VqcVariant::Plain {
            if self.kind != ModelKind::QM5Mini {
                return Err(Error::config("the plain VQC variant only exists for qm5_mini"));
            }
            if self.n_qubits != CONV1.0 {
                return Err(Error::config(format!(
                    "plain VQC uses one qubit per kernel sample: n_qubits must be {}, got {}",
                    CONV1.0, self.n_qubits
                )));
            }
            if self.widths[0] != CONV1.0 {
                return Err(Error::config(format!(
                    "plain VQC measures one channel per qubit: first width must be {}",
                    CONV1.0
                )));
            }
        }
        match self.kind {
            ModelKind::M5Mini | ModelKind::QM5Mini => {
                let l1 = self.input_length.checked_sub(CONV1.0).map(|v| v / CONV1.1 + 1);
                let pooled = l1.map(|v| v / POOL).unwrap_or(0);
                if pooled < CONV2.0 {
                    return Err(Error::config(format!(
                        "input length {} is too short for the convolution stack",
                        self.input_length
                    )));
                }
            }
            ModelKind::QTransformerMini => {
                if self.seq_len == 0 || !self.input_length.is_multiple_of(self.seq_len) {
                    return Err(Error::config("input length must be a multiple of seq_len"));
                }
                if self.n_heads == 0 || !self.widths[0].is_multiple_of(self.n_heads) {
                    return Err(Error::config("model dimension must be divisible by n_heads"));
                }
            }
        }
        Ok(())
    }

    pub fn kv_pairs(&self) -> Vec<(&'static str, String)> {
        let on_off = |b: bool| if b { "on" } else { "off" };
        alloc::vec![
            ("kind", self.kind.name().to_string()),
            ("n_qubits", self.n_qubits.to_string()),
            ("vqc", self.vqc_variant.name().to_string()),
            ("lt", self.lt_variant.name().to_string()),
            ("clip", on_off(self.clip_enabled).to_string()),
            ("depth", self.depth.to_string()),
            ("widths", format!("{},{}", self.widths[0], self.widths[1])),
            ("n_classes", self.n_classes.to_string()),
            ("input_length", self.input_length.to_string()),
            ("seq_len", self.seq_len.to_string()),
            ("n_heads", self.n_heads.to_string()),
        ]
    }

    /// `key = value` lines, one per field.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.kv_pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Inverse of [`ModelSpec::to_kv`]. Every field must be present; unknown
    /// keys are rejected.
    pub fn from_kv(text: &str) -> Result<Self> {
        let pairs = parse_kv(text)?;
        let get = |key: &str| -> Result<&str> {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::config(format!("model spec is missing '{key}'")))
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::config(format!("'{key}' is not a non-negative integer")))
        };
        let known = Self::qm5_mini(4).kv_pairs();
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !known.iter().any(|(n, _)| n == k)) {
            return Err(Error::config(format!("unknown model spec key '{k}'")));
        }
        let widths: Vec<usize> = get("widths")?
            .split(',')
            .map(|w| w.trim().parse())
            .collect::<core::result::Result<_, _>>()
            .map_err(|_| Error::config("'widths' must be two comma-separated integers"))?;
        let widths: [usize; 2] = widths
            .try_into()
            .map_err(|_| Error::config("'widths' must be two comma-separated integers"))?;
        let clip_enabled = match get("clip")? {
            "on" => true,
            "off" => false,
            other => return Err(Error::config(format!("'clip' must be on or off, got '{other}'"))),
        };
        let spec = ModelSpec {
            kind: get("kind")?.parse()?,
            n_qubits: num("n_qubits")?,
            vqc_variant: get("vqc")?.parse()?,
            lt_variant: get("lt")?.parse()?,
            clip_enabled,
            depth: num("depth")?,
            widths,
            n_classes: num("n_classes")?,
            input_length: num("input_length")?,
            seq_len: num("seq_len")?,
            n_heads: num("n_heads")?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Splits `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; duplicate keys are an error.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}: expected 'key = value'", n + 1)))?;
        let k = k.trim();
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::config(format!("line {}: duplicate key '{k}'", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
