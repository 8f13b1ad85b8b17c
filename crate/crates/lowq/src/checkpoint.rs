//! Model checkpoints: `QSPC`, u16 version, u32 length of the `key = value`
//! model spec, the spec text, u64 parameter count, then every parameter as a
//! little-endian f64 in declaration order.

use std::fs;
use std::path::Path;

use lowq_core::models::{build_model, Model, ModelSpec};

use crate::error::{AppError, AppResult};

pub const MAGIC: &[u8; 4] = b"QSPC";
pub const VERSION: u16 = 1;

pub fn encode(model: &Model) -> Vec<u8> {
    let spec = model.spec().to_kv();
    let mut out = Vec::with_capacity(18 + spec.len() + model.n_params() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.len() as u32).to_le_bytes());
    out.extend_from_slice(spec.as_bytes());
    out.extend_from_slice(&(model.n_params() as u64).to_le_bytes());
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> AppResult<Model> {
    let bad = |m: String| AppError::Format {
        path: path.to_path_buf(),
        message: m,
    };
    if bytes.len() < 10 || &bytes[0..4] != MAGIC {
        return Err(bad("not a QSPC checkpoint".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let spec_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let spec_end = 10 + spec_len;
    if bytes.len() < spec_end + 8 {
        return Err(bad("checkpoint is truncated".into()));
    }
    let text = std::str::from_utf8(&bytes[10..spec_end]).map_err(|_| bad("model spec is not UTF-8".into()))?;
    let spec = ModelSpec::from_kv(text).map_err(|e| bad(e.to_string()))?;
    let count = u64::from_le_bytes(bytes[spec_end..spec_end + 8].try_into().unwrap()) as usize;
    let body = &bytes[spec_end + 8..];
    if body.len() != count.saturating_mul(8) {
        return Err(bad(format!(
            "header announces {count} parameters but {} bytes follow",
            body.len()
        )));
    }
    let mut model = build_model(spec, 0).map_err(|e| bad(e.to_string()))?;
    if model.n_params() != count {
        return Err(bad(format!(
            "spec describes {} parameters, checkpoint holds {count}",
            model.n_params()
        )));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    model.set_params(params)?;
    Ok(model)
}

pub fn save(model: &Model, path: &Path) -> AppResult<()> {
    fs::write(path, encode(model)).map_err(|e| AppError::io(path, e))
}

pub fn load(path: &Path) -> AppResult<Model> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode(&bytes, path)
}
