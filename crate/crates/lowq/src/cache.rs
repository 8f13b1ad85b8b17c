//! Flat binary dataset cache: `QSPD`, u16 version, u32 count, u32 length,
//! f32 waveforms, u16 labels, all little-endian.

use std::fs;
use std::path::Path;

use lowq_core::data::{WaveDataset, DEFAULT_SAMPLE_RATE};

use crate::error::{AppError, AppResult};

pub const MAGIC: &[u8; 4] = b"QSPD";
pub const VERSION: u16 = 1;

pub fn encode(dataset: &WaveDataset) -> Vec<u8> {
    let (n, l) = (dataset.len(), dataset.length());
    let mut out = Vec::with_capacity(14 + n * l * 4 + n * 2);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(l as u32).to_le_bytes());
    for w in dataset.waveforms() {
        for v in w {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    for l in dataset.labels() {
        out.extend_from_slice(&(*l as u16).to_le_bytes());
    }
    out
}

/// The class count is taken as one past the largest label.
pub fn decode(bytes: &[u8], path: &Path) -> AppResult<WaveDataset> {
    let bad = |m: &str| AppError::Format {
        path: path.to_path_buf(),
        message: m.to_string(),
    };
    if bytes.len() < 14 || &bytes[0..4] != MAGIC {
        return Err(bad("not a QSPD dataset cache"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(&format!("unsupported cache version {version}")));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let l = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    if n == 0 || l == 0 {
        return Err(bad("cache holds no samples"));
    }
    let expected = n
        .checked_mul(l)
        .and_then(|nl| nl.checked_mul(4))
        .and_then(|w| w.checked_add(n * 2 + 14));
    if expected != Some(bytes.len()) {
        return Err(bad("cache size does not match its header"));
    }
    let body = &bytes[14..];
    let waveforms: Vec<Vec<f64>> = body[..n * l * 4]
        .chunks_exact(l * 4)
        .map(|w| {
            w.chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
                .collect()
        })
        .collect();
    let labels: Vec<usize> = body[n * l * 4..]
        .chunks_exact(2)
        .map(|c| usize::from(u16::from_le_bytes([c[0], c[1]])))
        .collect();
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    Ok(WaveDataset::new(waveforms, labels, n_classes, DEFAULT_SAMPLE_RATE)?)
}

pub fn save(dataset: &WaveDataset, path: &Path) -> AppResult<()> {
    fs::write(path, encode(dataset)).map_err(|e| AppError::io(path, e))
}

pub fn load(path: &Path) -> AppResult<WaveDataset> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode(&bytes, path)
}
