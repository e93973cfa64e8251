//! Streaming statistics with exact merge formulas, and the z-test used by
//! every Monte Carlo gate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples accepted by [`mc_mean_test`].
pub const MIN_SAMPLES: usize = 1000;

/// Running mean and centered sum of squares (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &MeanVar) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn is_constant(&self) -> bool {
        self.m2 == 0.0
    }
}

impl FromIterator<f64> for MeanVar {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanVar::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Outcome of a two-sided z-test of a sample mean against a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanTest {
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

/// Two-sided z-test of the accumulated mean against `target`; passes iff
/// `|z| <= se_multiplier`.
pub fn mean_test(acc: &MeanVar, target: f64, se_multiplier: f64) -> Result<MeanTest> {
    let n = acc.count() as usize;
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_SAMPLES, got: n });
    }
    let estimate = acc.mean();
    let se = acc.std_error();
    if acc.is_constant() {
        if estimate == target {
            return Ok(MeanTest { estimate, std_error: 0.0, z: 0.0, pass: true });
        }
        return Err(Error::DegenerateVariance { value: estimate, target });
    }
    let z = (estimate - target) / se;
    Ok(MeanTest { estimate, std_error: se, z, pass: z.abs() <= se_multiplier })
}

/// [`mean_test`] over a slice of samples.
pub fn mc_mean_test(samples: &[f64], target: f64, se_multiplier: f64) -> Result<MeanTest> {
    let acc: MeanVar = samples.iter().copied().collect();
    mean_test(&acc, target, se_multiplier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_on_target_passes() {
        let t = mc_mean_test(&vec![2.5; 1000], 2.5, 3.0).unwrap();
        assert_eq!(t.z, 0.0);
        assert!(t.pass);
    }

    #[test]
    fn constant_off_target_is_degenerate() {
        let err = mc_mean_test(&vec![1.0; 1000], 0.0, 3.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance { .. }));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(mc_mean_test(&[1.0, 2.0], 1.5, 3.0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    proptest! {
        #[test]
        fn merge_matches_single_pass(
            xs in proptest::collection::vec(-1e3f64..1e3, 2..200),
            split in 0usize..200,
        ) {
            let split = split.min(xs.len());
            let whole: MeanVar = xs.iter().copied().collect();
            let mut left: MeanVar = xs[..split].iter().copied().collect();
            let right: MeanVar = xs[split..].iter().copied().collect();
            left.merge(&right);
            prop_assert_eq!(left.count(), whole.count());
            prop_assert!((left.mean() - whole.mean()).abs() <= 1e-9 * (1.0 + whole.mean().abs()));
            prop_assert!((left.variance() - whole.variance()).abs() <= 1e-7 * (1.0 + whole.variance()));
        }
    }
}
