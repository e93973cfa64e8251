//! Sampling of the Poisson random measure on a window and evaluation of the
//! compensated white noise `L(A) = int_{A x R_0} z Nhat(dx, dz)`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::{JumpSet, LevyMeasureModel};
use crate::mc::{self, Execution};
use crate::rng::SeedToken;
use crate::sets::{Interval, IntervalSet, StepFunction};

/// One configuration of the Poisson random measure on `[-K, K] x R_0`,
/// sorted by location.
#[derive(Debug, Clone)]
pub struct PointRealization {
    window: f64,
    xs: Vec<f64>,
    zs: Vec<f64>,
    seed: SeedToken,
    model: Arc<LevyMeasureModel>,
}

/// Draws a realization of `N` on `[-window, window]`.
pub fn sample_prm(model: &Arc<LevyMeasureModel>, window: f64, seed: impl Into<SeedToken>) -> PointRealization {
    let seed = seed.into();
    let mut rng = seed.rng();
    let lambda = 2.0 * window * model.total_mass();
    let count = if lambda > 0.0 {
        Poisson::new(lambda).expect("positive finite intensity").sample(&mut rng) as usize
    } else {
        0
    };
    let mut pts: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let x = rng.random_range(-window..=window);
            (x, model.sample_jump(&mut rng))
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, zs) = pts.into_iter().unzip();
    PointRealization { window, xs, zs, seed, model: Arc::clone(model) }
}

impl PointRealization {
    /// Builds a realization from explicit `(x, z)` points.
    pub fn from_points(model: &Arc<LevyMeasureModel>, window: f64, points: &[(f64, f64)]) -> Result<Self> {
        let mut pts = points.to_vec();
        for &(x, z) in &pts {
            if !(x.abs() <= window) {
                return Err(Error::WindowExceeded { what: format!("point at {x}"), window });
            }
            if z == 0.0 || !z.is_finite() {
                return Err(Error::InvalidMeasure(format!("jump {z} at {x}")));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, zs) = pts.into_iter().unzip();
        Ok(Self { window, xs, zs, seed: SeedToken::default(), model: Arc::clone(model) })
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn seed(&self) -> SeedToken {
        self.seed
    }

    pub fn model(&self) -> &LevyMeasureModel {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.zs.iter().copied())
    }

    /// Points with location `<= y`: the information available at `y`.
    pub fn restrict(&self, y: f64) -> PointRealization {
        let cut = self.xs.partition_point(|&x| x <= y);
        PointRealization {
            window: self.window,
            xs: self.xs[..cut].to_vec(),
            zs: self.zs[..cut].to_vec(),
            seed: self.seed,
            model: Arc::clone(&self.model),
        }
    }

    /// Copy with one extra point inserted in location order.
    pub fn with_point(&self, x: f64, z: f64) -> Result<PointRealization> {
        if !(x.abs() <= self.window) {
            return Err(Error::WindowExceeded { what: format!("probe at {x}"), window: self.window });
        }
        let at = self.xs.partition_point(|&v| v <= x);
        let mut out = self.clone();
        out.xs.insert(at, x);
        out.zs.insert(at, z);
        Ok(out)
    }

    fn range(&self, iv: &Interval) -> std::ops::Range<usize> {
        let lo = self.xs.partition_point(|&x| x <= iv.lo);
        let hi = self.xs.partition_point(|&x| x <= iv.hi);
        lo..hi.max(lo)
    }

    fn check_inside(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        if lo < -self.window || hi > self.window {
            return Err(Error::WindowExceeded { what: what.to_string(), window: self.window });
        }
        Ok(())
    }

    /// Sum of jumps located in `(lo, hi]`.
    pub fn jump_sum(&self, iv: &Interval) -> f64 {
        self.zs[self.range(iv)].iter().sum()
    }

    /// Number of points in `(lo, hi] x B`.
    pub fn count(&self, iv: &Interval, jumps: &JumpSet) -> usize {
        self.zs[self.range(iv)].iter().filter(|&&z| jumps.contains(z)).count()
    }

    /// `Nhat((lo, hi] x B) = N(...) - (hi - lo) nu(B)`.
    pub fn compensated_count(&self, iv: &Interval, jumps: &JumpSet) -> Result<f64> {
        self.check_inside(iv.lo, iv.hi, "cell")?;
        Ok(self.count(iv, jumps) as f64 - iv.len() * self.model.mass_of(jumps)?)
    }

    /// Noise of one interval, without window checks.
    pub(crate) fn noise_of(&self, iv: &Interval) -> f64 {
        if iv.is_empty() {
            return 0.0;
        }
        self.jump_sum(iv) - iv.len() * self.model.mean_jump_rate()
    }

    /// `L(A)`.
    pub fn eval_l_set(&self, set: &IntervalSet) -> Result<f64> {
        if let Some((lo, hi)) = set.hull() {
            self.check_inside(lo, hi, "set")?;
        }
        Ok(set.intervals().iter().map(|iv| self.noise_of(iv)).sum())
    }

    /// `L(phi) = sum phi(x_i) z_i - (int z nu(dz)) int phi dx`.
    pub fn eval_l_phi(&self, phi: &StepFunction) -> Result<f64> {
        if let Some((lo, hi)) = phi.hull() {
            self.check_inside(lo, hi, "step function support")?;
        }
        Ok(phi.pieces().iter().map(|(iv, v)| v * self.noise_of(iv)).sum())
    }

    /// Two-sided path: `L([0, x])` for `x >= 0`, `-L([x, 0])` otherwise.
    pub fn eval_path(&self, x: f64) -> Result<f64> {
        self.check_inside(x.min(0.0), x.max(0.0), "path argument")?;
        Ok(if x >= 0.0 {
            self.noise_of(&Interval { lo: 0.0, hi: x })
        } else {
            -self.noise_of(&Interval { lo: x, hi: 0.0 })
        })
    }
}

/// Closed-form characteristic function of `L(A)`.
pub fn char_function(model: &LevyMeasureModel, set: &IntervalSet, theta: f64) -> Result<Complex64> {
    Ok((set.measure() * model.levy_exponent(theta)?).exp())
}

/// Characteristic function of `L(phi)` for a step function, built from the
/// exponent of each piece.
pub fn char_function_phi(model: &LevyMeasureModel, phi: &StepFunction, theta: f64) -> Result<Complex64> {
    let mut exponent = Complex64::new(0.0, 0.0);
    for (iv, v) in phi.pieces() {
        exponent += iv.len() * model.levy_exponent(theta * v)?;
    }
    Ok(exponent.exp())
}

/// Per-theta comparison of empirical and closed-form characteristic functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharGapRow {
    pub theta: f64,
    pub empirical_re: f64,
    pub empirical_im: f64,
    pub theoretical_re: f64,
    pub theoretical_im: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharGapReport {
    pub sup_gap: f64,
    pub samples: u64,
    pub rows: Vec<CharGapRow>,
}

/// Compares the empirical characteristic function of `n_samples` draws of
/// `L(A)` with the closed form on a grid of `theta`.
pub fn char_function_gap(
    model: &Arc<LevyMeasureModel>,
    set: &IntervalSet,
    thetas: &[f64],
    n_samples: u64,
    key: u64,
    exec: Execution,
) -> Result<CharGapReport> {
    let window = set.hull().map_or(0.0, |(lo, hi)| lo.abs().max(hi.abs()));
    let out = mc::run(n_samples, key, 2 * thetas.len(), exec, false, |token, row| {
        let l = sample_prm(model, window, token).eval_l_set(set).expect("set inside window");
        for (k, &th) in thetas.iter().enumerate() {
            let (s, c) = (th * l).sin_cos();
            row[2 * k] = c;
            row[2 * k + 1] = s;
        }
    });
    let mut rows = Vec::with_capacity(thetas.len());
    for (k, &theta) in thetas.iter().enumerate() {
        let emp = Complex64::new(out.dim(2 * k).mean(), out.dim(2 * k + 1).mean());
        let theo = char_function(model, set, theta)?;
        rows.push(CharGapRow {
            theta,
            empirical_re: emp.re,
            empirical_im: emp.im,
            theoretical_re: theo.re,
            theoretical_im: theo.im,
            gap: (emp - theo).norm(),
        });
    }
    let sup_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(CharGapReport { sup_gap, samples: n_samples, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Arc<LevyMeasureModel> {
        Arc::new(LevyMeasureModel::unit_atom())
    }

    #[test]
    fn zero_window_is_empty() {
        let r = sample_prm(&unit(), 0.0, 5);
        assert!(r.is_empty());
    }

    #[test]
    fn single_atom_marks() {
        let m = Arc::new(LevyMeasureModel::atoms(&[(1.0, 3.0)]).unwrap());
        for s in 0..20 {
            let r = sample_prm(&m, 1.0, s);
            assert!(r.points().all(|(x, z)| z == 1.0 && x.abs() <= 1.0));
            assert!(r.xs.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let m = Arc::new(LevyMeasureModel::atoms(&[(1.0, 0.5), (-2.0, 1.5)]).unwrap());
        let a = sample_prm(&m, 3.0, SeedToken::new(4, 9));
        let b = sample_prm(&m, 3.0, SeedToken::new(4, 9));
        assert_eq!(a.xs, b.xs);
        assert_eq!(a.zs, b.zs);
    }

    #[test]
    fn set_examples() {
        let m = unit();
        let empty = PointRealization::from_points(&m, 1.0, &[]).unwrap();
        assert_eq!(empty.eval_l_set(&IntervalSet::empty()).unwrap(), 0.0);
        assert_eq!(empty.eval_l_set(&IntervalSet::interval(0.0, 1.0).unwrap()).unwrap(), -1.0);

        let two = Arc::new(LevyMeasureModel::atoms(&[(2.0, 1.0)]).unwrap());
        let r = PointRealization::from_points(&two, 1.0, &[(0.5, 2.0)]).unwrap();
        assert_eq!(r.eval_l_set(&IntervalSet::interval(0.0, 1.0).unwrap()).unwrap(), 0.0);

        let err = r.eval_l_set(&IntervalSet::interval(0.0, 2.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::WindowExceeded { .. }));
    }

    #[test]
    fn phi_examples() {
        let m = unit();
        let r = PointRealization::from_points(&m, 1.0, &[(0.25, 1.0), (0.75, 1.0)]).unwrap();
        let phi = StepFunction::new(&[(0.0, 0.5, 2.0)]).unwrap();
        assert_eq!(r.eval_l_phi(&phi).unwrap(), 1.0);
        assert_eq!(r.eval_l_phi(&StepFunction::zero()).unwrap(), 0.0);
        let a = IntervalSet::interval(-0.5, 0.8).unwrap();
        assert_eq!(r.eval_l_phi(&StepFunction::indicator(-0.5, 0.8).unwrap()).unwrap(), r.eval_l_set(&a).unwrap());
    }

    #[test]
    fn path_examples() {
        let m = unit();
        let r = PointRealization::from_points(&m, 2.0, &[]).unwrap();
        assert_eq!(r.eval_path(0.0).unwrap(), 0.0);
        assert_eq!(r.eval_path(2.0).unwrap(), -2.0);
        assert_eq!(r.eval_path(-1.0).unwrap(), 1.0);
        let s = sample_prm(&m, 2.0, 3);
        let inc = s.eval_l_set(&IntervalSet::interval(-0.5, 1.5).unwrap()).unwrap();
        assert!((s.eval_path(1.5).unwrap() - s.eval_path(-0.5).unwrap() - inc).abs() < 1e-12);
    }

    #[test]
    fn singleton_sets_vanish() {
        let m = unit();
        for s in 0..50 {
            let r = sample_prm(&m, 2.0, s);
            for (x, _) in r.points() {
                assert_eq!(r.eval_l_set(&IntervalSet::interval(x, x).unwrap()).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn prefix_restriction() {
        let m = unit();
        let r = PointRealization::from_points(&m, 2.0, &[(-1.0, 1.0), (0.0, 1.0), (0.5, 1.0)]).unwrap();
        assert_eq!(r.restrict(0.0).len(), 2);
        assert_eq!(r.restrict(-2.0).len(), 0);
        let w = r.with_point(0.25, 1.0).unwrap();
        assert_eq!(w.points().map(|p| p.0).collect::<Vec<_>>(), vec![-1.0, 0.0, 0.25, 0.5]);
    }

    #[test]
    fn char_function_closed_forms() {
        let m = unit();
        let a = IntervalSet::interval(0.0, 1.0).unwrap();
        assert_eq!(char_function(&m, &a, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let v = char_function(&m, &a, std::f64::consts::PI).unwrap();
        assert!((v.norm() - 0.13534).abs() < 1e-5);
        let sym = LevyMeasureModel::atoms(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        for th in [-2.0, -0.3, 0.7, 3.0] {
            assert_eq!(char_function(&sym, &a, th).unwrap().im, 0.0);
        }
        let phi = StepFunction::indicator(0.0, 1.0).unwrap();
        assert!((char_function_phi(&m, &phi, 1.3).unwrap() - char_function(&m, &a, 1.3).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn char_gap_at_zero_is_zero() {
        let rep =
            char_function_gap(&unit(), &IntervalSet::interval(0.0, 1.0).unwrap(), &[0.0], 1000, 1, Execution::Parallel)
                .unwrap();
        assert_eq!(rep.sup_gap, 0.0);
    }
}
