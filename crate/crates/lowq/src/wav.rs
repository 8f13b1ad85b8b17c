//! 16-bit mono PCM WAV reading and writing, and class-per-directory corpora.

use std::fs;
use std::path::{Path, PathBuf};

use lowq_core::data::WaveDataset;
use thiserror::Error;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WavError {
    #[error("not a RIFF file (magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("RIFF form type is not WAVE")]
    NotWave,
    #[error("file ends inside the {0} chunk")]
    Truncated(&'static str),
    #[error("missing '{0}' chunk")]
    MissingChunk(&'static str),
    #[error("format code {0} is not PCM")]
    NotPcm(u16),
    #[error("{0} channels, only mono is supported")]
    NotMono(u16),
    #[error("{0} bits per sample, only 16 is supported")]
    Not16Bit(u16),
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decoded samples scaled by 1/32768, and the sample rate.
pub fn parse_wav(bytes: &[u8]) -> Result<(Vec<f64>, u32), WavError> {
    if bytes.len() < 12 {
        return Err(WavError::Truncated("RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(WavError::BadMagic(bytes[0..4].try_into().unwrap()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotWave);
    }
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4) as usize;
        let body = at + 8;
        let end = body.checked_add(size).filter(|e| *e <= bytes.len());
        match id {
            b"fmt " => {
                let end = end.ok_or(WavError::Truncated("fmt "))?;
                if size < 16 {
                    return Err(WavError::Truncated("fmt "));
                }
                let b = &bytes[body..end];
                fmt = Some((u16_at(b, 0), u16_at(b, 2), u32_at(b, 4), u16_at(b, 14)));
            }
            b"data" => {
                data = Some(&bytes[body..end.ok_or(WavError::Truncated("data"))?]);
            }
            _ => {
                if end.is_none() {
                    break;
                }
            }
        }
        at = body + size + (size & 1);
    }
    let (code, channels, rate, bits) = fmt.ok_or(WavError::MissingChunk("fmt "))?;
    if code != 1 {
        return Err(WavError::NotPcm(code));
    }
    if channels != 1 {
        return Err(WavError::NotMono(channels));
    }
    if bits != 16 {
        return Err(WavError::Not16Bit(bits));
    }
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    let samples = data
        .chunks_exact(2)
        .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / 32768.0)
        .collect();
    Ok((samples, rate))
}

/// Encodes samples in `[-1, 1]` as 16-bit mono PCM.
pub fn encode_wav(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_len = samples.len() as u32 * 2;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

/// A file that was skipped while loading a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub dataset: WaveDataset,
    /// Class names in label order.
    pub classes: Vec<String>,
    pub skipped: Vec<Skipped>,
    /// Class directories without a single usable file.
    pub empty_classes: Vec<String>,
}

impl LoadReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut w: Vec<String> = self
            .skipped
            .iter()
            .map(|s| format!("skipped {}: {}", s.path.display(), s.reason))
            .collect();
        w.extend(
            self.empty_classes
                .iter()
                .map(|c| format!("class '{c}' has no usable files and was dropped")),
        );
        w
    }
}

fn sorted_entries(dir: &Path) -> AppResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| AppError::io(dir, e))? {
        out.push(entry.map_err(|e| AppError::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

/// Loads `root/<class>/*.wav`. Labels follow the lexicographic order of the
/// class directories that contain at least one readable file. Every waveform
/// is truncated or zero-padded to `length`.
pub fn load_wav_dir(root: &Path, length: usize) -> AppResult<LoadReport> {
    if length == 0 {
        return Err(AppError::Usage("waveform length must be at least 1".into()));
    }
    let mut classes = Vec::new();
    let mut empty_classes = Vec::new();
    let mut skipped = Vec::new();
    let mut waveforms = Vec::new();
    let mut labels = Vec::new();
    let mut rate = None;
    for dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let label = classes.len();
        let before = waveforms.len();
        for file in sorted_entries(&dir)? {
            let is_wav = file.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
            if !file.is_file() || !is_wav {
                continue;
            }
            let bytes = fs::read(&file).map_err(|e| AppError::io(&file, e))?;
            match parse_wav(&bytes) {
                Ok((mut samples, sr)) => {
                    samples.resize(length, 0.0);
                    rate.get_or_insert(sr);
                    waveforms.push(samples);
                    labels.push(label);
                }
                Err(e) => skipped.push(Skipped {
                    path: file,
                    reason: e.to_string(),
                }),
            }
        }
        if waveforms.len() == before {
            empty_classes.push(name);
        } else {
            classes.push(name);
        }
    }
    if waveforms.is_empty() {
        return Err(AppError::Format {
            path: root.to_path_buf(),
            message: "no readable WAV files in any class directory".into(),
        });
    }
    let n_classes = classes.len();
    let dataset = WaveDataset::new(waveforms, labels, n_classes, rate.unwrap_or(16_000))?;
    Ok(LoadReport {
        dataset,
        classes,
        skipped,
        empty_classes,
    })
}

/// Writes `root/class_XX/NNNNN.wav` for every sample.
pub fn write_wav_dir(dataset: &WaveDataset, root: &Path) -> AppResult<()> {
    for c in 0..dataset.n_classes() {
        let dir = root.join(format!("class_{c:02}"));
        fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
    }
    for i in 0..dataset.len() {
        let path = root
            .join(format!("class_{:02}", dataset.label(i)))
            .join(format!("{i:05}.wav"));
        fs::write(&path, encode_wav(dataset.waveform(i), dataset.sample_rate())).map_err(|e| AppError::io(&path, e))?;
    }
    Ok(())
}
