use std::thread;
use std::time::Instant;

use lowq_core::data::WaveDataset;
use lowq_core::models::Model;
use lowq_core::train::{argmax, sample_grad, Hooks, SampleGrad, StepRecord};
use lowq_core::{Error, Result};

use crate::runlog::LossLog;

/// Splits `0..n` into `threads` contiguous ranges and maps each range on its
/// own scoped thread. Results come back in index order.
pub fn parallel_map<T: Send>(n: usize, threads: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let f = &f;
    thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| s.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(f).collect::<Result<Vec<T>>>()))
            .collect();
        let mut out = Vec::with_capacity(n);
        for h in handles {
            out.extend(h.join().map_err(|_| Error::Io("worker thread panicked".into()))??);
        }
        Ok(out)
    })
}

/// Wall clock, optional loss log and optional parallel gradient evaluation.
pub struct RunHooks<'a> {
    start: Instant,
    threads: usize,
    log: Option<&'a mut LossLog>,
}

impl<'a> RunHooks<'a> {
    pub fn new(threads: usize, log: Option<&'a mut LossLog>) -> Self {
        RunHooks {
            start: Instant::now(),
            threads,
            log,
        }
    }
}

impl Hooks for RunHooks<'_> {
    fn now_ms(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }

    fn on_step(&mut self, record: &StepRecord) -> Result<()> {
        match self.log.as_deref_mut() {
            Some(log) => log.record(record).map_err(|e| Error::Io(e.to_string())),
            None => Ok(()),
        }
    }

    fn sample_grads(&mut self, model: &Model, dataset: &WaveDataset, indices: &[usize]) -> Result<Vec<SampleGrad>> {
        parallel_map(indices.len(), self.threads, |k| {
            let i = indices[k];
            sample_grad(model, dataset.waveform(i), dataset.label(i), indices.len())
        })
    }

    fn accuracy(&mut self, model: &Model, dataset: &WaveDataset) -> Result<f64> {
        let hits = parallel_map(dataset.len(), self.threads, |i| {
            Ok(argmax(&model.logits(dataset.waveform(i))?) == dataset.label(i))
        })?;
        Ok(hits.iter().filter(|h| **h).count() as f64 / dataset.len() as f64)
    }
}
