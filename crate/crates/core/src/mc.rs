//! Batched Monte Carlo driver.
//!
//! Samples are cut into fixed batches; each batch is reduced sequentially and
//! the batch summaries are merged in index order. The decomposition never
//! depends on the worker count, so parallel and sequential runs agree bit for
//! bit.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::rng::SeedToken;
use crate::stats::MeanVar;

const BATCH: u64 = 2048;

/// How sample batches are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Batches run on the rayon pool (sequential when the `parallel`
    /// feature is disabled).
    #[default]
    Parallel,
    Sequential,
}

/// Sample budget and acceptance gate shared by every Monte Carlo check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub samples: u64,
    pub key: u64,
    pub exec: Execution,
    pub se_multiplier: f64,
}

impl McSettings {
    pub fn new(samples: u64, key: u64) -> Self {
        Self { samples, key, exec: Execution::default(), se_multiplier: 3.0 }
    }

    pub fn with_exec(self, exec: Execution) -> Self {
        Self { exec, ..self }
    }

    pub fn with_se_multiplier(self, se_multiplier: f64) -> Self {
        Self { se_multiplier, ..self }
    }

    /// Runs `f` under these settings.
    pub fn run<F>(&self, dims: usize, keep_rows: bool, f: F) -> McOutput
    where
        F: Fn(SeedToken, &mut [f64]) + Sync,
    {
        run(self.samples, self.key, dims, self.exec, keep_rows, f)
    }

    /// Like [`McSettings::run`] for fallible statistics. If any draw fails,
    /// the error of the lowest-indexed failing draw is returned, so the
    /// outcome does not depend on scheduling.
    pub fn try_run<F>(&self, dims: usize, keep_rows: bool, f: F) -> Result<McOutput>
    where
        F: Fn(SeedToken, &mut [f64]) -> Result<()> + Sync,
    {
        let failure: Mutex<Option<(u64, Error)>> = Mutex::new(None);
        let out = self.run(dims, keep_rows, |seed, row| {
            if let Err(e) = f(seed, row) {
                let mut slot = failure.lock().unwrap_or_else(|p| p.into_inner());
                if slot.as_ref().is_none_or(|(idx, _)| seed.stream < *idx) {
                    *slot = Some((seed.stream, e));
                }
            }
        });
        match failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
            Some((_, e)) => Err(e),
            None => Ok(out),
        }
    }
}

/// Per-dimension statistics and, optionally, the raw sample rows.
#[derive(Debug, Clone)]
pub struct McOutput {
    pub stats: Vec<MeanVar>,
    pub rows: Option<Vec<Vec<f64>>>,
}

impl McOutput {
    pub fn dim(&self, i: usize) -> &MeanVar {
        &self.stats[i]
    }
}

struct BatchOut {
    stats: Vec<MeanVar>,
    rows: Vec<Vec<f64>>,
}

/// Runs `samples` draws of a `dims`-valued statistic. `f` receives the
/// sample's seed token `(key, index)` and the output row to fill.
pub fn run<F>(samples: u64, key: u64, dims: usize, exec: Execution, keep_rows: bool, f: F) -> McOutput
where
    F: Fn(SeedToken, &mut [f64]) + Sync,
{
    let n_batches = samples.div_ceil(BATCH);
    let batch = |b: u64| -> BatchOut {
        let lo = b * BATCH;
        let hi = (lo + BATCH).min(samples);
        let mut stats = vec![MeanVar::new(); dims];
        let mut rows = Vec::new();
        let mut row = vec![0.0; dims];
        for idx in lo..hi {
            row.iter_mut().for_each(|v| *v = 0.0);
            f(SeedToken::new(key, idx), &mut row);
            for (acc, &v) in stats.iter_mut().zip(&row) {
                acc.push(v);
            }
            if keep_rows {
                rows.push(row.clone());
            }
        }
        BatchOut { stats, rows }
    };

    let outs: Vec<BatchOut> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n_batches).into_par_iter().map(batch).collect()
        }
        _ => (0..n_batches).map(batch).collect(),
    };

    let mut stats = vec![MeanVar::new(); dims];
    let mut rows = keep_rows.then(Vec::new);
    for out in outs {
        for (acc, s) in stats.iter_mut().zip(&out.stats) {
            acc.merge(s);
        }
        if let Some(rows) = rows.as_mut() {
            rows.extend(out.rows);
        }
    }
    McOutput { stats, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn uniform_mean(exec: Execution) -> McOutput {
        run(10_000, 11, 2, exec, false, |token, out| {
            let u: f64 = token.rng().random();
            out[0] = u;
            out[1] = token.stream as f64;
        })
    }

    #[test]
    fn parallel_and_sequential_agree_exactly() {
        let a = uniform_mean(Execution::Parallel);
        let b = uniform_mean(Execution::Sequential);
        assert_eq!(a.stats, b.stats);
        assert!((a.dim(0).mean() - 0.5).abs() < 0.02);
        assert_eq!(a.dim(1).count(), 10_000);
    }

    #[test]
    fn rows_are_kept_in_index_order() {
        let out = run(5000, 1, 1, Execution::Parallel, true, |token, row| row[0] = token.stream as f64);
        let rows = out.rows.unwrap();
        assert_eq!(rows.len(), 5000);
        assert!(rows.iter().enumerate().all(|(i, r)| r[0] == i as f64));
    }
}
