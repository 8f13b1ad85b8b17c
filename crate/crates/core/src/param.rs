//! Flat parameter storage.
//!
//! Every trainable value of a model lives in one `Vec<f64>`. Layers keep
//! [`ParamRange`]s into it, read their weights from a shared slice during
//! forward, and accumulate into a gradient buffer with the same layout during
//! backward. The optimizer, checkpoints and finite-difference checks all work
//! on the flat vector directly.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParamRange {
    pub start: usize,
    pub len: usize,
}

impl ParamRange {
    pub const EMPTY: ParamRange = ParamRange { start: 0, len: 0 };

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn of<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.start..self.end()]
    }

    pub fn of_mut<'a>(&self, params: &'a mut [f64]) -> &'a mut [f64] {
        &mut params[self.start..self.end()]
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.start && index < self.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub name: String,
    pub range: ParamRange,
}

/// Names and extents of every parameter tensor, in declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamLayout {
    blocks: Vec<ParamBlock>,
    total: usize,
}

impl ParamLayout {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    /// Name of the tensor holding flat index `index`.
    pub fn block_of(&self, index: usize) -> Option<&str> {
        self.blocks
            .iter()
            .find(|b| b.range.contains(index))
            .map(|b| b.name.as_str())
    }
}

/// Allocates parameter tensors and draws their initial values from a seeded
/// ChaCha stream, so a (layout, seed) pair always yields the same vector.
pub struct ParamBuilder {
    values: Vec<f64>,
    layout: ParamLayout,
    rng: ChaCha8Rng,
}

impl ParamBuilder {
    pub fn new(seed: u64) -> Self {
        ParamBuilder {
            values: Vec::new(),
            layout: ParamLayout::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Appends a tensor of `len` values drawn uniformly from `[-bound, bound]`.
    pub fn uniform(&mut self, name: &str, len: usize, bound: f64) -> ParamRange {
        let range = ParamRange {
            start: self.values.len(),
            len,
        };
        for _ in 0..len {
            let v = if bound > 0.0 {
                self.rng.random_range(-bound..=bound)
            } else {
                0.0
            };
            self.values.push(v);
        }
        self.layout.blocks.push(ParamBlock {
            name: String::from(name),
            range,
        });
        self.layout.total = self.values.len();
        range
    }

    pub fn zeros(&mut self, name: &str, len: usize) -> ParamRange {
        self.uniform(name, len, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn finish(self) -> (ParamLayout, Vec<f64>) {
        (self.layout, self.values)
    }
}

/// Order-sensitive hash of a parameter slice, used to detect traces that were
/// recorded against weights that have since changed.
pub(crate) fn fingerprint(values: &[f64]) -> u64 {
    // FNV-1a over the raw bit patterns.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_values() {
        let build = |seed| {
            let mut b = ParamBuilder::new(seed);
            b.uniform("a", 10, 0.5);
            b.zeros("b", 3);
            b.uniform("c", 4, 0.1);
            b.finish()
        };
        assert_eq!(build(7), build(7));
        assert_ne!(build(7).1, build(8).1);
    }

    #[test]
    fn layout_names_blocks_in_order() {
        let mut b = ParamBuilder::new(1);
        let a = b.uniform("first", 2, 1.0);
        let c = b.uniform("second", 3, 1.0);
        assert_eq!(a, ParamRange { start: 0, len: 2 });
        assert_eq!(c, ParamRange { start: 2, len: 3 });
        let (layout, values) = b.finish();
        assert_eq!(layout.total(), 5);
        assert_eq!(values.len(), 5);
        assert_eq!(layout.block_of(4), Some("second"));
        assert_eq!(layout.block_of(5), None);
        assert!(values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn fingerprint_tracks_changes() {
        let a = [1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 3.0 + 1e-15];
        assert_eq!(fingerprint(&a), fingerprint(&a));
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }
}
