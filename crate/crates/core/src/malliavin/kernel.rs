use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::{JumpSet, LevyMeasureModel};
use crate::noise_sim::PointRealization;
use crate::sets::Interval;

/// Highest chaos order handled.
pub const MAX_ORDER: usize = 4;

/// Product cell `(lo, hi] x B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub jumps: JumpSet,
}

impl Cell {
    pub fn new(lo: f64, hi: f64, jumps: JumpSet) -> Result<Self> {
        Interval::new(lo, hi)?;
        Ok(Self { lo, hi, jumps })
    }

    pub fn interval(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        self.interval().contains(x) && self.jumps.contains(z)
    }

    pub fn is_disjoint(&self, other: &Cell) -> bool {
        self.hi.min(other.hi) <= self.lo.max(other.lo) || self.jumps.is_disjoint(&other.jumps)
    }

    /// `|A| nu(B)`.
    pub fn measure(&self, model: &LevyMeasureModel) -> Result<f64> {
        Ok((self.hi - self.lo) * model.mass_of(&self.jumps)?)
    }

    /// `Nhat(A x B)` on one realization.
    pub fn compensated(&self, r: &PointRealization) -> Result<f64> {
        r.compensated_count(&self.interval(), &self.jumps)
    }
}

/// One coefficient `beta_{i_1 ... i_k}` of a kernel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub index: Vec<usize>,
    pub value: f64,
}

/// Unchecked kernel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub order: usize,
    pub cells: Vec<Cell>,
    pub entries: Vec<KernelEntry>,
}

/// Symmetric step kernel of order `k` over pairwise disjoint cells, zero
/// whenever two indices coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct StepKernel {
    order: usize,
    cells: Vec<Cell>,
    /// Row-major dense tensor over `cells.len()^order` index tuples.
    beta: Vec<f64>,
}

impl TryFrom<KernelSpec> for StepKernel {
    type Error = Error;
    fn try_from(spec: KernelSpec) -> Result<Self> {
        StepKernel::new(spec.order, spec.cells, &spec.entries)
    }
}

impl From<StepKernel> for KernelSpec {
    fn from(k: StepKernel) -> Self {
        let entries = k.nonzero().map(|(index, value)| KernelEntry { index, value }).collect();
        KernelSpec { order: k.order, cells: k.cells, entries }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn has_repeat(index: &[usize]) -> bool {
    index.iter().enumerate().any(|(i, a)| index[..i].contains(a))
}

impl StepKernel {
    /// Builds and symmetrizes a kernel. Entries with repeated indices must
    /// be zero; repeated entries for the same tuple add up.
    pub fn new(order: usize, cells: Vec<Cell>, entries: &[KernelEntry]) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidKernel(format!("order {order} outside 1..={MAX_ORDER}")));
        }
        for i in 0..cells.len() {
            for j in 0..i {
                if !cells[i].is_disjoint(&cells[j]) {
                    return Err(Error::InvalidKernel(format!("cells {j} and {i} overlap")));
                }
            }
        }
        let m = cells.len();
        let mut raw = vec![0.0; m.pow(order as u32)];
        for e in entries {
            if e.index.len() != order || e.index.iter().any(|&i| i >= m) {
                return Err(Error::InvalidKernel(format!(
                    "index {:?} does not address an order-{order} tuple over {m} cells",
                    e.index
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::InvalidKernel(format!("coefficient {} at {:?}", e.value, e.index)));
            }
            if has_repeat(&e.index) {
                if e.value != 0.0 {
                    return Err(Error::InvalidKernel(format!("nonzero coefficient on repeated index {:?}", e.index)));
                }
                continue;
            }
            raw[flat(&e.index, m)] += e.value;
        }
        // Sum over permutations before dividing, so already-symmetric
        // dyadic coefficients come through unchanged.
        let perms = permutations(order);
        let k_factorial = perms.len() as f64;
        let mut beta = vec![0.0; raw.len()];
        let mut tuple = vec![0; order];
        for (pos, slot) in beta.iter_mut().enumerate() {
            unflat(pos, m, &mut tuple);
            if has_repeat(&tuple) {
                continue;
            }
            let sum: f64 = perms.iter().map(|p| raw[p.iter().fold(0, |acc, &j| acc * m + tuple[j])]).sum();
            *slot = sum / k_factorial;
        }
        Ok(Self { order, cells, beta })
    }

    /// `1_{F_1} ⊗ ... ⊗ 1_{F_k}` symmetrized, for `k` distinct cells.
    pub fn tensor(cells: Vec<Cell>) -> Result<Self> {
        let k = cells.len();
        StepKernel::new(k, cells, &[KernelEntry { index: (0..k).collect(), value: 1.0 }])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn coefficient(&self, index: &[usize]) -> f64 {
        self.beta[flat(index, self.cells.len())]
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }

    /// Nonzero coefficients with their index tuples.
    pub fn nonzero(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let m = self.cells.len();
        let order = self.order;
        self.beta.iter().enumerate().filter(|(_, &b)| b != 0.0).map(move |(pos, &b)| {
            let mut t = vec![0; order];
            unflat(pos, m, &mut t);
            (t, b)
        })
    }

    /// Largest `|x|` over all cell intervals.
    pub fn reach(&self) -> f64 {
        self.cells.iter().map(|c| c.lo.abs().max(c.hi.abs())).fold(0.0, f64::max)
    }

    /// Index of the cell containing `(x, z)`.
    pub fn cell_of(&self, x: f64, z: f64) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x, z))
    }

    /// `||h||^2 = sum beta^2 prod |A_{i_j}| nu(B_{i_j})`.
    pub fn norm_sq(&self, model: &LevyMeasureModel) -> Result<f64> {
        let measures = self.cells.iter().map(|c| c.measure(model)).collect::<Result<Vec<f64>>>()?;
        Ok(self.nonzero().map(|(t, b)| b * b * t.iter().map(|&i| measures[i]).product::<f64>()).sum())
    }

    /// `sum beta prod_j values[i_j]`.
    pub(crate) fn contract(&self, values: &[f64]) -> f64 {
        self.nonzero().map(|(t, b)| b * t.iter().map(|&i| values[i]).product::<f64>()).sum()
    }

    /// Order `k - 1` slice `h(., F_c)`, or the scalar `beta_c` for `k = 1`.
    pub(crate) fn slice(&self, c: usize) -> Slice {
        let m = self.cells.len();
        if self.order == 1 {
            return Slice::Scalar(self.beta[c]);
        }
        let sub = self.order - 1;
        let mut beta = vec![0.0; m.pow(sub as u32)];
        for (pos, slot) in beta.iter_mut().enumerate() {
            *slot = self.beta[pos * m + c];
        }
        Slice::Kernel(StepKernel { order: sub, cells: self.cells.clone(), beta })
    }
}

pub(crate) enum Slice {
    Scalar(f64),
    Kernel(StepKernel),
}

fn flat(index: &[usize], m: usize) -> usize {
    index.iter().fold(0, |acc, &i| acc * m + i)
}

fn unflat(mut pos: usize, m: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = pos % m;
        pos /= m;
    }
}

/// `N̂(F_i)` for every cell.
pub fn compensated_counts(r: &PointRealization, cells: &[Cell]) -> Result<Vec<f64>> {
    cells.iter().map(|c| c.compensated(r)).collect()
}

/// `I_k(h) = sum beta prod_j N̂(F_{i_j})`.
pub fn eval_multiple_integral(r: &PointRealization, h: &StepKernel) -> Result<f64> {
    Ok(h.contract(&compensated_counts(r, &h.cells)?))
}

/// `h^y = h 1_{(-inf, y]^k}`: every interval is cut at `y` and cells left
/// empty are dropped.
pub fn project_kernel(h: &StepKernel, y: f64) -> StepKernel {
    let m = h.cells.len();
    let keep: Vec<usize> = (0..m).filter(|&i| h.cells[i].lo < y).collect();
    let cells: Vec<Cell> = keep
        .iter()
        .map(|&i| {
            let c = &h.cells[i];
            Cell { lo: c.lo, hi: c.hi.min(y), jumps: c.jumps.clone() }
        })
        .collect();
    let n = cells.len();
    let mut beta = vec![0.0; n.pow(h.order as u32)];
    let mut t = vec![0; h.order];
    for (pos, slot) in beta.iter_mut().enumerate() {
        unflat(pos, n, &mut t);
        let orig: Vec<usize> = t.iter().map(|&j| keep[j]).collect();
        *slot = h.beta[flat(&orig, m)];
    }
    StepKernel { order: h.order, cells, beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_sim::{sample_prm, PointRealization};
    use std::sync::Arc;

    fn one() -> JumpSet {
        JumpSet::Atoms(vec![1.0])
    }

    #[test]
    fn second_order_example() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let h = StepKernel::new(
            2,
            vec![Cell::new(0.0, 1.0, one()).unwrap(), Cell::new(1.0, 2.0, one()).unwrap()],
            &[KernelEntry { index: vec![0, 1], value: 1.0 }],
        )
        .unwrap();
        assert_eq!(h.coefficient(&[0, 1]), 0.5);
        assert_eq!(h.coefficient(&[1, 0]), 0.5);
        let r = PointRealization::from_points(&m, 2.0, &[(0.5, 1.0)]).unwrap();
        assert_eq!(eval_multiple_integral(&r, &h).unwrap(), 0.0);
        let zero = StepKernel::new(2, h.cells().to_vec(), &[]).unwrap();
        assert_eq!(eval_multiple_integral(&r, &zero).unwrap(), 0.0);
    }

    #[test]
    fn first_order_is_the_compensated_count() {
        let m = Arc::new(LevyMeasureModel::atoms(&[(1.0, 1.0), (-2.0, 0.5)]).unwrap());
        let cell = Cell::new(-0.5, 1.5, one()).unwrap();
        let h = StepKernel::tensor(vec![cell.clone()]).unwrap();
        for s in 0..20 {
            let r = sample_prm(&m, 2.0, s);
            assert_eq!(eval_multiple_integral(&r, &h).unwrap(), cell.compensated(&r).unwrap());
        }
    }

    #[test]
    fn invalid_kernels() {
        let c = Cell::new(0.0, 1.0, one()).unwrap();
        let overlapping = Cell::new(0.5, 2.0, one()).unwrap();
        assert!(matches!(StepKernel::tensor(vec![c.clone(), overlapping]), Err(Error::InvalidKernel(_))));
        let other_jumps = Cell::new(0.5, 2.0, JumpSet::Atoms(vec![2.0])).unwrap();
        assert!(StepKernel::tensor(vec![c.clone(), other_jumps]).is_ok());
        let diag = KernelEntry { index: vec![0, 0], value: 1.0 };
        assert!(matches!(StepKernel::new(2, vec![c.clone()], &[diag]), Err(Error::InvalidKernel(_))));
        assert!(matches!(StepKernel::new(5, vec![c], &[]), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn projection_examples() {
        let h = StepKernel::tensor(vec![Cell::new(0.0, 2.0, one()).unwrap()]).unwrap();
        assert!(project_kernel(&h, -1.0).is_zero());
        assert_eq!(project_kernel(&h, 3.0), h);
        let p = project_kernel(&h, 1.0);
        assert_eq!(p.cells(), &[Cell::new(0.0, 1.0, one()).unwrap()]);
        assert_eq!(p.coefficient(&[0]), 1.0);
    }

    #[test]
    fn third_order_symmetrization_is_exact_for_symmetric_input() {
        let cells: Vec<Cell> = (0..3).map(|i| Cell::new(i as f64, i as f64 + 1.0, one()).unwrap()).collect();
        let entries: Vec<KernelEntry> =
            permutations(3).into_iter().map(|p| KernelEntry { index: p, value: 0.375 }).collect();
        let h = StepKernel::new(3, cells, &entries).unwrap();
        assert!(h.nonzero().all(|(_, b)| b == 0.375));
        assert_eq!(h.nonzero().count(), 6);
    }

    #[test]
    fn serde_round_trip() {
        let h = StepKernel::new(
            2,
            vec![Cell::new(0.0, 1.0, one()).unwrap(), Cell::new(1.0, 2.0, one()).unwrap()],
            &[KernelEntry { index: vec![0, 1], value: 2.0 }],
        )
        .unwrap();
        let back: StepKernel = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(back, h);
    }
}
