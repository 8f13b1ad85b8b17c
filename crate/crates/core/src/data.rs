//! Waveform datasets and the deterministic synthetic generator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Equal-length waveforms in `[-1, 1]` with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveDataset {
    waveforms: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
    length: usize,
    sample_rate: u32,
}

impl WaveDataset {
    pub fn new(waveforms: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize, sample_rate: u32) -> Result<Self> {
        if waveforms.is_empty() {
            return Err(Error::config("dataset has no samples"));
        }
        if waveforms.len() != labels.len() {
            return Err(Error::usage(format!(
                "{} waveforms but {} labels",
                waveforms.len(),
                labels.len()
            )));
        }
        let length = waveforms[0].len();
        if length == 0 {
            return Err(Error::config("waveforms are empty"));
        }
        for (i, (w, l)) in waveforms.iter().zip(&labels).enumerate() {
            if w.len() != length {
                return Err(Error::shape(format!(
                    "sample {i} has length {}, expected {length}",
                    w.len()
                )));
            }
            if w.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                return Err(Error::config(format!("sample {i} leaves [-1, 1]")));
            }
            if *l >= n_classes {
                return Err(Error::config(format!(
                    "sample {i} has label {l} but there are {n_classes} classes"
                )));
            }
        }
        Ok(WaveDataset {
            waveforms,
            labels,
            n_classes,
            length,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Samples per waveform.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn waveform(&self, i: usize) -> &[f64] {
        &self.waveforms[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn waveforms(&self) -> &[Vec<f64>] {
        &self.waveforms
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for l in &self.labels {
            counts[*l] += 1;
        }
        counts
    }
}

/// Fundamental frequency (cycles per waveform) of class `c`.
pub fn class_frequency(c: usize, length: usize) -> usize {
    (c + 1) * (length / 128).max(1)
}

/// Two-tone waveforms, one fundamental per class, plus Gaussian noise,
/// clipped to `[-1, 1]`. Classes are interleaved: sample `i` has label
/// `i % n_classes`.
pub fn gen_synthetic(
    n_classes: usize,
    per_class: usize,
    length: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<WaveDataset> {
    if n_classes < 2 {
        return Err(Error::config("need at least 2 classes"));
    }
    if per_class == 0 {
        return Err(Error::config("need at least 1 sample per class"));
    }
    if length < 64 {
        return Err(Error::config(format!(
            "waveform length must be at least 64, got {length}"
        )));
    }
    if 3 * class_frequency(n_classes - 1, length) * 2 >= length {
        return Err(Error::config(format!(
            "{n_classes} classes do not fit below the Nyquist limit at length {length}"
        )));
    }
    let bad_sigma = || Error::config(format!("noise sigma must be finite and ≥ 0, got {noise_sigma}"));
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(bad_sigma());
    }
    let noise = Normal::new(0.0, noise_sigma).map_err(|_| bad_sigma())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_classes * per_class;
    let mut waveforms = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % n_classes;
        let f = class_frequency(c, length) as f64;
        let w: Vec<f64> = (0..length)
            .map(|t| {
                let phase = TAU * f * t as f64 / length as f64;
                let clean = 0.8 * phase.sin() + 0.2 * (3.0 * phase).sin();
                let v = if noise_sigma > 0.0 {
                    clean + noise.sample(&mut rng)
                } else {
                    clean
                };
                v.clamp(-1.0, 1.0)
            })
            .collect();
        waveforms.push(w);
        labels.push(c);
    }
    WaveDataset::new(waveforms, labels, n_classes, DEFAULT_SAMPLE_RATE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nearest_centroid_accuracy(train: &WaveDataset, test: &WaveDataset) -> f64 {
        let k = train.n_classes();
        let l = train.length();
        let mut centroids = vec![vec![0.0; l]; k];
        for (w, c) in train.waveforms().iter().zip(train.labels()) {
            for (a, b) in centroids[*c].iter_mut().zip(w) {
                *a += b;
            }
        }
        for (c, n) in train.class_counts().into_iter().enumerate() {
            for a in &mut centroids[c] {
                *a /= n as f64;
            }
        }
        let hits = test
            .waveforms()
            .iter()
            .zip(test.labels())
            .filter(|(w, c)| {
                let d = |m: &[f64]| m.iter().zip(w.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let best = (0..k)
                    .min_by(|a, b| d(&centroids[*a]).total_cmp(&d(&centroids[*b])))
                    .unwrap();
                best == **c
            })
            .count();
        hits as f64 / test.len() as f64
    }

    #[test]
    fn noiseless_classes_are_constant() {
        let ds = gen_synthetic(3, 4, 128, 0.0, 1).unwrap();
        for i in 3..ds.len() {
            assert_eq!(ds.waveform(i), ds.waveform(i % 3));
        }
        assert_eq!(ds.class_counts(), vec![4, 4, 4]);
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = gen_synthetic(4, 8, 1024, 0.05, 9).unwrap();
        assert_eq!(a, gen_synthetic(4, 8, 1024, 0.05, 9).unwrap());
        assert_ne!(a, gen_synthetic(4, 8, 1024, 0.05, 10).unwrap());
        assert!(a.waveforms().iter().flatten().all(|v| v.abs() <= 1.0));
        assert_eq!(
            (0..4).map(|c| class_frequency(c, 1024)).collect::<Vec<_>>(),
            vec![8, 16, 24, 32]
        );
    }

    #[test]
    fn nearest_centroid_separates_classes() {
        let train = gen_synthetic(4, 64, 1024, 0.05, 1).unwrap();
        let test = gen_synthetic(4, 64, 1024, 0.05, 2).unwrap();
        assert!(nearest_centroid_accuracy(&train, &test) >= 0.99);
    }

    #[test]
    fn invalid_sizes_are_config_errors() {
        assert!(matches!(gen_synthetic(1, 4, 128, 0.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_synthetic(2, 4, 32, 0.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_synthetic(2, 0, 128, 0.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_synthetic(2, 4, 128, -1.0, 0), Err(Error::Config(_))));
        assert!(matches!(gen_synthetic(30, 4, 128, 0.0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn dataset_checks_invariants() {
        assert!(WaveDataset::new(vec![vec![0.0, 2.0]], vec![0], 2, 8000).is_err());
        assert!(WaveDataset::new(vec![vec![0.0], vec![0.0, 0.0]], vec![0, 1], 2, 8000).is_err());
        assert!(WaveDataset::new(vec![vec![0.0]], vec![2], 2, 8000).is_err());
        assert!(WaveDataset::new(vec![], vec![], 2, 8000).is_err());
    }
}
