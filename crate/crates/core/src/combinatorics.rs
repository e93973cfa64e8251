//! Set partitions without singleton blocks and the cumulant-to-moment map.
//!
//! For a centered random variable the first cumulant vanishes, so the
//! moment-cumulant formula only needs partitions whose blocks all have at
//! least two elements. Partitions are generated as restricted growth strings,
//! pruning any prefix that leaves more open singletons than remaining
//! elements.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::LevyMeasureModel;
use crate::sets::StepFunction;
use crate::stats::CompensatedSum;

/// Largest set size accepted by the enumerators.
pub const MAX_PARTITION_SIZE: usize = 14;

/// Prefix length at which the parallel enumerator splits work.
const SPLIT_DEPTH: usize = 6;

/// A set partition of `{1, ..., m}`, blocks sorted by minimum element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from a restricted growth string (0-based labels).
    fn from_labels(labels: &[u8]) -> Self {
        let n_blocks = labels.iter().copied().max().map_or(0, |l| l as usize + 1);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (i, &l) in labels.iter().enumerate() {
            blocks[l as usize].push(i + 1);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(Vec::len)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.blocks.iter().map(|b| b.iter().map(ToString::to_string).collect::<String>()).collect();
        write!(f, "{{{}}}", parts.join("|"))
    }
}

/// Cumulants `kappa_n` for `n >= 2` of a centered variable.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CumulantVector {
    values: BTreeMap<usize, f64>,
}

impl CumulantVector {
    pub fn new(values: BTreeMap<usize, f64>) -> Result<Self> {
        if let Some(&k2) = values.get(&2) {
            if k2 < 0.0 {
                return Err(Error::NegativeVariance(k2));
            }
        }
        Ok(Self { values: values.into_iter().filter(|&(n, _)| n >= 2).collect() })
    }

    /// Same value for every order `2..=max_order`.
    pub fn constant(value: f64, max_order: usize) -> Result<Self> {
        Self::new((2..=max_order).map(|n| (n, value)).collect())
    }

    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 1 {
            return Ok(0.0);
        }
        self.values.get(&n).copied().ok_or(Error::MissingCumulant(n))
    }

    pub fn max_order(&self) -> usize {
        self.values.keys().next_back().copied().unwrap_or(1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&n, &k)| (n, k))
    }
}

fn check_size(m: usize) -> Result<()> {
    if m > MAX_PARTITION_SIZE {
        return Err(Error::SizeLimitExceeded { m, limit: MAX_PARTITION_SIZE });
    }
    Ok(())
}

/// Depth-first restricted-growth-string walker. `visit` receives the labels
/// and block sizes of every complete partition that passes the filter.
struct Walker<'a, F> {
    m: usize,
    no_singletons: bool,
    labels: Vec<u8>,
    sizes: Vec<u8>,
    singletons: usize,
    visit: &'a mut F,
}

impl<F: FnMut(&[u8], &[u8])> Walker<'_, F> {
    fn descend(&mut self, i: usize) {
        if self.no_singletons && self.singletons > self.m - i {
            return;
        }
        if i == self.m {
            if !self.no_singletons || self.singletons == 0 {
                (self.visit)(&self.labels, &self.sizes);
            }
            return;
        }
        for b in 0..=self.sizes.len() {
            if b == self.sizes.len() {
                self.sizes.push(1);
                self.singletons += 1;
            } else {
                if self.sizes[b] == 1 {
                    self.singletons -= 1;
                }
                self.sizes[b] += 1;
            }
            self.labels.push(b as u8);
            self.descend(i + 1);
            self.labels.pop();
            if self.sizes[b] == 1 {
                self.sizes.pop();
                self.singletons -= 1;
            } else {
                self.sizes[b] -= 1;
                if self.sizes[b] == 1 {
                    self.singletons += 1;
                }
            }
        }
    }
}

/// Walks every partition of `{1..m}` that extends `prefix`.
fn walk_from<F: FnMut(&[u8], &[u8])>(m: usize, no_singletons: bool, prefix: &[u8], visit: &mut F) {
    let mut sizes: Vec<u8> = Vec::new();
    for &l in prefix {
        if l as usize == sizes.len() {
            sizes.push(0);
        }
        sizes[l as usize] += 1;
    }
    let singletons = sizes.iter().filter(|&&s| s == 1).count();
    let mut w = Walker { m, no_singletons, labels: prefix.to_vec(), sizes, singletons, visit };
    w.descend(prefix.len());
}

/// Restricted growth string prefixes of length `min(m, SPLIT_DEPTH)`.
fn prefixes(m: usize, no_singletons: bool) -> Vec<Vec<u8>> {
    let depth = m.min(SPLIT_DEPTH);
    let mut out = Vec::new();
    let mut collect = |labels: &[u8], _: &[u8]| out.push(labels.to_vec());
    let mut w = Walker {
        m: depth,
        no_singletons: false,
        labels: Vec::new(),
        sizes: Vec::new(),
        singletons: 0,
        visit: &mut collect,
    };
    w.descend(0);
    if no_singletons {
        // Open singletons in the prefix must be fillable by the rest.
        out.retain(|p| {
            let mut sizes = vec![0usize; m];
            p.iter().for_each(|&l| sizes[l as usize] += 1);
            sizes.iter().filter(|&&s| s == 1).count() <= m - depth
        });
    }
    out
}

/// Folds `f` over the selected partitions, splitting work across prefixes.
/// Per-prefix results are merged in prefix order.
fn fold_partitions<T, F, M>(m: usize, no_singletons: bool, init: T, f: F, merge: M) -> T
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, &[u8], &[u8]) + Sync,
    M: Fn(&mut T, T),
{
    let run = |prefix: &Vec<u8>| {
        let mut acc = init.clone();
        walk_from(m, no_singletons, prefix, &mut |l: &[u8], s: &[u8]| f(&mut acc, l, s));
        acc
    };
    let pre = prefixes(m, no_singletons);
    #[cfg(feature = "parallel")]
    let parts: Vec<T> = {
        use rayon::prelude::*;
        pre.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<T> = pre.iter().map(run).collect();
    let mut total = init;
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// All partitions of `{1..m}` in which every block has at least two elements,
/// in restricted-growth (canonical) order.
pub fn enumerate_no_singleton_partitions(m: usize) -> Result<Vec<Partition>> {
    check_size(m)?;
    if m == 0 {
        return Ok(vec![Partition { blocks: Vec::new() }]);
    }
    let mut out = Vec::new();
    walk_from(m, true, &[], &mut |labels: &[u8], _: &[u8]| out.push(Partition::from_labels(labels)));
    Ok(out)
}

/// `C_p^*`: the number of singleton-free partitions of `{1..p}`.
pub fn count_c_star(p: usize) -> Result<u64> {
    check_size(p)?;
    if p == 0 {
        return Ok(1);
    }
    Ok(fold_partitions(p, true, 0u64, |acc, _, _| *acc += 1, |a, b| *a += b))
}

fn block_product(kappa: &[f64], sizes: &[u8]) -> f64 {
    sizes.iter().map(|&s| kappa[s as usize]).product()
}

fn dense_cumulants(kappa: &CumulantVector, m: usize, from: usize) -> Result<Vec<f64>> {
    let mut dense = vec![0.0; m + 1];
    for (n, slot) in dense.iter_mut().enumerate().skip(from) {
        *slot = kappa.get(n)?;
    }
    Ok(dense)
}

/// `E[X^m] = sum over singleton-free partitions of prod kappa_|B|`.
pub fn moment_from_cumulants(kappa: &CumulantVector, m: usize) -> Result<f64> {
    check_size(m)?;
    if m == 0 {
        return Ok(1.0);
    }
    if m == 1 {
        return Ok(0.0);
    }
    let dense = dense_cumulants(kappa, m, 2)?;
    let sum = fold_partitions(
        m,
        true,
        CompensatedSum::default(),
        |acc, _, sizes| acc.add(block_product(&dense, sizes)),
        |a, b| a.merge(&b),
    );
    Ok(sum.value())
}

/// General moment-cumulant formula over all partitions, with an explicit
/// first cumulant.
pub fn moment_from_all_partitions(kappa1: f64, kappa: &CumulantVector, m: usize) -> Result<f64> {
    check_size(m)?;
    if m == 0 {
        return Ok(1.0);
    }
    let mut dense = dense_cumulants(kappa, m, 2)?;
    dense[1] = kappa1;
    let sum = fold_partitions(
        m,
        false,
        CompensatedSum::default(),
        |acc, _, sizes| acc.add(block_product(&dense, sizes)),
        |a, b| a.merge(&b),
    );
    Ok(sum.value())
}

/// Cumulants of `L(phi)`: `kappa_n = (int z^n nu(dz)) * int phi^n dx` for
/// `2 <= n <= p`.
pub fn cumulants_of_linear_functional(
    model: &LevyMeasureModel,
    phi: &StepFunction,
    p: usize,
) -> Result<CumulantVector> {
    if phi.hull().is_some_and(|(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(Error::UnboundedSupport);
    }
    let mut values = BTreeMap::new();
    for n in 2..=p {
        values.insert(n, model.signed_moment(n)? * phi.integral_pow(n as u32));
    }
    CumulantVector::new(values)
}

/// Exact `E[L(phi)^p]` through cumulants.
pub fn exact_moment(model: &LevyMeasureModel, phi: &StepFunction, p: usize) -> Result<f64> {
    let kappa = cumulants_of_linear_functional(model, phi, p.max(2))?;
    moment_from_cumulants(&kappa, p)
}
