//! Finite-mass jump-size measures and their moment functionals.
//!
//! A [`LevyMeasureModel`] is either a finite list of atoms or a named density
//! family truncated away from the origin. Integer-order moments of atomic
//! measures are computed in exact rational arithmetic and rounded once.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, integrate_towards_zero, MOMENT_ABS_TOL};
use crate::stats::CompensatedSum;

/// Highest integer order cached per model.
pub const MAX_CACHED_ORDER: usize = 16;

/// Relative tolerance of the Hölder interpolation check.
pub const INTERPOLATION_REL_TOL: f64 = 1e-12;

/// Serializable description of a jump measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSpec {
    /// `[z, mass]` pairs.
    Atoms(Vec<[f64; 2]>),
    PowerLaw(PowerLaw),
}

/// Density `c_plus z^{-1-alpha}` on `[epsilon, z_max]` and
/// `c_minus |z|^{-1-alpha}` on `[-z_max, -epsilon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub alpha: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub epsilon: f64,
    pub z_max: f64,
}

impl PowerLaw {
    pub fn symmetric(alpha: f64, scale: f64, epsilon: f64, z_max: f64) -> Self {
        Self { alpha, c_plus: scale, c_minus: scale, epsilon, z_max }
    }

    pub fn density(&self, z: f64) -> f64 {
        let r = z.abs();
        if r < self.epsilon || r > self.z_max {
            return 0.0;
        }
        let c = if z > 0.0 { self.c_plus } else { self.c_minus };
        c * r.powf(-1.0 - self.alpha)
    }

    /// Mass of one unit-constant side, `int_eps^zmax r^{-1-alpha} dr`.
    fn side_mass(&self) -> f64 {
        (self.epsilon.powf(-self.alpha) - self.z_max.powf(-self.alpha)) / self.alpha
    }

    fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let lo = self.epsilon.powf(-self.alpha);
        let hi = self.z_max.powf(-self.alpha);
        (lo - u * (lo - hi)).powf(-1.0 / self.alpha)
    }

    /// `int |z|^p 1{sign} nu(dz)` on one side by quadrature in `log r`.
    fn side_power_integral(&self, p: f64) -> Result<f64> {
        let (a, b) = (self.epsilon.ln(), self.z_max.ln());
        let f = |u: f64| (u * (p - self.alpha)).exp();
        // Pilot estimate sets a relative floor for large moments.
        let pilot = crate::quadrature::midpoint(f, a, b, 64).abs();
        let tol = MOMENT_ABS_TOL.max(1e-13 * pilot);
        adaptive_simpson(f, a, b, tol)
    }
}

/// A set of jump sizes `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpSet {
    /// Exact jump values (atoms of an atomic measure).
    Atoms(Vec<f64>),
    /// Jump sizes in `(lo, hi]`, excluding 0.
    Range { lo: f64, hi: f64 },
}

impl JumpSet {
    pub fn contains(&self, z: f64) -> bool {
        match self {
            JumpSet::Atoms(zs) => zs.contains(&z),
            JumpSet::Range { lo, hi } => z != 0.0 && z > *lo && z <= *hi,
        }
    }

    pub fn is_disjoint(&self, other: &JumpSet) -> bool {
        match (self, other) {
            (JumpSet::Atoms(a), _) => a.iter().all(|z| !other.contains(*z)),
            (_, JumpSet::Atoms(b)) => b.iter().all(|z| !self.contains(*z)),
            (JumpSet::Range { lo: a0, hi: a1 }, JumpSet::Range { lo: b0, hi: b1 }) => a1 <= b0 || b1 <= a0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: f64,
    pub mass: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Atomic { atoms: Vec<Atom>, picker: WeightedIndex<f64> },
    PowerLaw(PowerLaw),
}

/// Validated finite-mass jump measure with cached moments.
#[derive(Debug, Clone)]
pub struct LevyMeasureModel {
    kind: Kind,
    total_mass: f64,
    m2: f64,
    exact: bool,
    abs_moments: Vec<OnceLock<Result<f64>>>,
    signed_moments: Vec<OnceLock<Result<f64>>>,
}

impl PartialEq for LevyMeasureModel {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

/// One row of the Hölder interpolation report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRow {
    pub r: usize,
    pub m_r: f64,
    pub bound: f64,
    pub pass: bool,
    /// `m_r` equals the bound to the check tolerance.
    pub equality: bool,
}

fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

impl LevyMeasureModel {
    /// Checks a measure description.
    pub fn validate(spec: &MeasureSpec) -> Result<Self> {
        match spec {
            MeasureSpec::Atoms(pairs) => Self::from_atoms(pairs),
            MeasureSpec::PowerLaw(pl) => Self::from_power_law(*pl),
        }
    }

    pub fn atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = pairs.iter().map(|&(z, m)| [z, m]).collect();
        Self::from_atoms(&pairs)
    }

    /// Unit atom at `z = 1`.
    pub fn unit_atom() -> Self {
        Self::atoms(&[(1.0, 1.0)]).expect("valid")
    }

    fn from_atoms(pairs: &[[f64; 2]]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut atoms = Vec::with_capacity(pairs.len());
        for (index, &[z, mass]) in pairs.iter().enumerate() {
            if z.is_nan() {
                return Err(Error::InvalidMeasure(format!("atom {index} has NaN location")));
            }
            if z == 0.0 {
                return Err(Error::AtomAtZero { index });
            }
            if mass.is_nan() || mass <= 0.0 {
                return Err(Error::NonPositiveMass { index, mass });
            }
            if mass.is_infinite() {
                return Err(Error::InfiniteTotalMass);
            }
            if z.is_infinite() {
                return Err(Error::InfiniteSecondMoment);
            }
            atoms.push(Atom { z, mass });
        }

        // Exact integer-order moments.
        let mut abs = Vec::with_capacity(MAX_CACHED_ORDER + 1);
        let mut signed = Vec::with_capacity(MAX_CACHED_ORDER + 1);
        let weights: Vec<BigRational> = atoms.iter().map(|a| exact_rational(a.mass)).collect();
        let mut powers: Vec<BigRational> = atoms.iter().map(|_| BigRational::from_integer(BigInt::from(1))).collect();
        let zs: Vec<BigRational> = atoms.iter().map(|a| exact_rational(a.z)).collect();
        for n in 0..=MAX_CACHED_ORDER {
            let mut s = BigRational::zero();
            let mut a = BigRational::zero();
            for ((w, pw), z) in weights.iter().zip(powers.iter_mut()).zip(&zs) {
                let term = w * &*pw;
                if n % 2 == 1 && z < &BigRational::zero() {
                    a -= &term;
                } else {
                    a += &term;
                }
                s += term;
                *pw *= z;
            }
            abs.push(a.to_f64().unwrap_or(f64::INFINITY));
            signed.push(s.to_f64().unwrap_or(f64::NAN));
        }
        let total_mass = abs[0];
        let m2 = abs[2];
        if !total_mass.is_finite() {
            return Err(Error::InfiniteTotalMass);
        }
        if !m2.is_finite() {
            return Err(Error::InfiniteSecondMoment);
        }
        let picker =
            WeightedIndex::new(atoms.iter().map(|a| a.mass)).map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        let cell = |(n, v): (usize, f64)| {
            let c = OnceLock::new();
            let _ = c.set(if v.is_finite() { Ok(v) } else { Err(Error::InfinitePMoment { p: n as f64 }) });
            c
        };
        Ok(Self {
            kind: Kind::Atomic { atoms, picker },
            total_mass,
            m2,
            exact: true,
            abs_moments: abs.into_iter().enumerate().map(cell).collect(),
            signed_moments: signed.into_iter().enumerate().map(cell).collect(),
        })
    }

    fn from_power_law(pl: PowerLaw) -> Result<Self> {
        let PowerLaw { alpha, c_plus, c_minus, epsilon, z_max } = pl;
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidMeasure(format!("alpha = {alpha} outside (0, 2)")));
        }
        if !(c_plus >= 0.0 && c_minus >= 0.0 && c_plus + c_minus > 0.0) || !(c_plus.is_finite() && c_minus.is_finite())
        {
            return Err(Error::NonPositiveMass { index: 0, mass: c_plus + c_minus });
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InfiniteTotalMass);
        }
        if z_max.is_infinite() {
            return Err(Error::InfiniteSecondMoment);
        }
        if !(z_max > epsilon) {
            return Err(Error::InvalidMeasure(format!("z_max = {z_max} must exceed epsilon = {epsilon}")));
        }
        let total_mass = (c_plus + c_minus) * pl.side_mass();
        let mut model = Self {
            kind: Kind::PowerLaw(pl),
            total_mass,
            m2: f64::NAN,
            exact: false,
            abs_moments: (0..=MAX_CACHED_ORDER).map(|_| OnceLock::new()).collect(),
            signed_moments: (0..=MAX_CACHED_ORDER).map(|_| OnceLock::new()).collect(),
        };
        model.m2 = model.abs_moment(2.0)?;
        Ok(model)
    }

    pub fn spec(&self) -> MeasureSpec {
        match &self.kind {
            Kind::Atomic { atoms, .. } => MeasureSpec::Atoms(atoms.iter().map(|a| [a.z, a.mass]).collect()),
            Kind::PowerLaw(pl) => MeasureSpec::PowerLaw(*pl),
        }
    }

    pub fn atom_list(&self) -> Option<&[Atom]> {
        match &self.kind {
            Kind::Atomic { atoms, .. } => Some(atoms),
            Kind::PowerLaw(_) => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, Kind::Atomic { .. })
    }

    /// Whether integer-order moments are exact (rounded once).
    pub fn has_exact_moments(&self) -> bool {
        self.exact
    }

    /// `nu(R_0)`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Absolute moment `m_p = int |z|^p nu(dz)` for real `p >= 1`.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 0.0 {
            return Err(Error::InvalidMeasure(format!("moment order {p}")));
        }
        if p.fract() == 0.0 && (p as usize) <= MAX_CACHED_ORDER {
            let n = p as usize;
            return self.abs_moments[n].get_or_init(|| self.compute_abs(p)).clone();
        }
        self.compute_abs(p)
    }

    /// Signed moment `int z^n nu(dz)`.
    pub fn signed_moment(&self, n: usize) -> Result<f64> {
        if n <= MAX_CACHED_ORDER {
            return self.signed_moments[n].get_or_init(|| self.compute_signed(n)).clone();
        }
        self.compute_signed(n)
    }

    fn compute_abs(&self, p: f64) -> Result<f64> {
        let v = match &self.kind {
            Kind::Atomic { atoms, .. } => {
                let mut s = CompensatedSum::default();
                atoms.iter().for_each(|a| s.add(a.mass * a.z.abs().powf(p)));
                s.value()
            }
            Kind::PowerLaw(pl) => (pl.c_plus + pl.c_minus) * pl.side_power_integral(p)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InfinitePMoment { p })
        }
    }

    fn compute_signed(&self, n: usize) -> Result<f64> {
        let v = match &self.kind {
            Kind::Atomic { atoms, .. } => {
                let mut s = CompensatedSum::default();
                atoms.iter().for_each(|a| s.add(a.mass * a.z.powi(n as i32)));
                s.value()
            }
            Kind::PowerLaw(pl) => {
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                let c = pl.c_plus + sign * pl.c_minus;
                if c == 0.0 {
                    0.0
                } else {
                    c * pl.side_power_integral(n as f64)?
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InfinitePMoment { p: n as f64 })
        }
    }

    /// Compensator rate `int z nu(dz)`.
    pub fn mean_jump_rate(&self) -> f64 {
        self.signed_moment(1).expect("first moment is finite under finite mass and m2")
    }

    /// Drift `b = -int_{|z|>1} z nu(dz)` that centers the big-jump part.
    pub fn drift(&self) -> Result<f64> {
        match &self.kind {
            Kind::Atomic { atoms, .. } => {
                Ok(-atoms.iter().filter(|a| a.z.abs() > 1.0).map(|a| a.mass * a.z).sum::<f64>())
            }
            Kind::PowerLaw(pl) => {
                if pl.z_max <= 1.0 {
                    return Ok(0.0);
                }
                let lo = pl.epsilon.max(1.0);
                let side = adaptive_simpson(|r| r.powf(-pl.alpha), lo, pl.z_max, MOMENT_ABS_TOL)?;
                Ok(-(pl.c_plus - pl.c_minus) * side)
            }
        }
    }

    /// Variance discarded by truncating the density below `epsilon`,
    /// `int_{|z|<eps} z^2 nu(dz)`. Zero for atomic measures.
    pub fn small_jump_variance(&self) -> Result<f64> {
        match &self.kind {
            Kind::Atomic { .. } => Ok(0.0),
            Kind::PowerLaw(pl) => {
                let side = integrate_towards_zero(|r| r.powf(1.0 - pl.alpha), pl.epsilon, MOMENT_ABS_TOL)?;
                Ok((pl.c_plus + pl.c_minus) * side)
            }
        }
    }

    /// `nu(B)`.
    pub fn mass_of(&self, set: &JumpSet) -> Result<f64> {
        self.set_integral(set, 0)
    }

    /// `int_B z nu(dz)`.
    pub fn first_moment_of(&self, set: &JumpSet) -> Result<f64> {
        self.set_integral(set, 1)
    }

    fn set_integral(&self, set: &JumpSet, power: i32) -> Result<f64> {
        match &self.kind {
            Kind::Atomic { atoms, .. } => {
                Ok(atoms.iter().filter(|a| set.contains(a.z)).map(|a| a.mass * a.z.powi(power)).sum())
            }
            Kind::PowerLaw(pl) => match set {
                JumpSet::Atoms(_) => Ok(0.0),
                JumpSet::Range { lo, hi } => {
                    let f = |z: f64| pl.density(z) * z.powi(power);
                    let neg = (lo.max(-pl.z_max), hi.min(-pl.epsilon));
                    let pos = (lo.max(pl.epsilon), hi.min(pl.z_max));
                    let mut total = 0.0;
                    for (a, b) in [neg, pos] {
                        if a < b {
                            total += adaptive_simpson(f, a, b, MOMENT_ABS_TOL)?;
                        }
                    }
                    Ok(total)
                }
            },
        }
    }

    /// Draws one jump from `nu / nu(R_0)`.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Atomic { atoms, picker } => atoms[picker.sample(rng)].z,
            Kind::PowerLaw(pl) => {
                let r = pl.sample_radius(rng);
                let p_plus = pl.c_plus / (pl.c_plus + pl.c_minus);
                if rng.random::<f64>() < p_plus {
                    r
                } else {
                    -r
                }
            }
        }
    }

    /// Lévy exponent `int (e^{i theta z} - 1 - i theta z) nu(dz)`.
    pub fn levy_exponent(&self, theta: f64) -> Result<Complex64> {
        match &self.kind {
            Kind::Atomic { atoms, .. } => Ok(atoms
                .iter()
                .map(|a| {
                    let t = theta * a.z;
                    a.mass * Complex64::new(t.cos() - 1.0, t.sin() - t)
                })
                .sum()),
            Kind::PowerLaw(pl) => {
                let mut re = 0.0;
                let mut im = 0.0;
                for (sign, c) in [(1.0, pl.c_plus), (-1.0, pl.c_minus)] {
                    if c == 0.0 {
                        continue;
                    }
                    let dens = |r: f64| c * r.powf(-1.0 - pl.alpha);
                    re += adaptive_simpson(
                        |r| ((theta * r).cos() - 1.0) * dens(r),
                        pl.epsilon,
                        pl.z_max,
                        MOMENT_ABS_TOL,
                    )?;
                    im += sign
                        * adaptive_simpson(
                            |r| ((theta * r).sin() - theta * r) * dens(r),
                            pl.epsilon,
                            pl.z_max,
                            MOMENT_ABS_TOL,
                        )?;
                }
                Ok(Complex64::new(re, im))
            }
        }
    }

    /// Hölder interpolation `m_r <= m_p^theta m_2^(1-theta)` for every
    /// integer `r` in `[2, p]`, `theta = (r-2)/(p-2)`.
    pub fn interpolation_check(&self, p: usize) -> Result<Vec<InterpolationRow>> {
        if p < 2 || p % 2 == 1 {
            return Err(Error::OddMomentOrder(p));
        }
        let m_p = self.abs_moment(p as f64).map_err(|_| Error::InfinitePMoment { p: p as f64 })?;
        let m2 = self.m2;
        (2..=p)
            .map(|r| {
                let m_r = self.abs_moment(r as f64)?;
                let bound = if p == 2 {
                    m2
                } else {
                    let theta = (r - 2) as f64 / (p - 2) as f64;
                    m_p.powf(theta) * m2.powf(1.0 - theta)
                };
                let slack = INTERPOLATION_REL_TOL * bound.abs();
                Ok(InterpolationRow {
                    r,
                    m_r,
                    bound,
                    pass: m_r <= bound + slack,
                    equality: (m_r - bound).abs() <= slack,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn validate_examples() {
        let m = LevyMeasureModel::unit_atom();
        assert_eq!(m.total_mass(), 1.0);
        assert_eq!(m.m2(), 1.0);
        assert_eq!(LevyMeasureModel::atoms(&[(0.0, 1.0)]).unwrap_err(), Error::AtomAtZero { index: 0 });
        let sym = LevyMeasureModel::atoms(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(sym.m2(), 1.0);
        assert!(matches!(LevyMeasureModel::atoms(&[(1.0, -0.5)]), Err(Error::NonPositiveMass { .. })));
        assert_eq!(LevyMeasureModel::atoms(&[(f64::INFINITY, 1.0)]).unwrap_err(), Error::InfiniteSecondMoment);
        assert_eq!(LevyMeasureModel::atoms(&[(1.0, f64::INFINITY)]).unwrap_err(), Error::InfiniteTotalMass);
    }

    #[test]
    fn power_law_rejections() {
        let untruncated = PowerLaw::symmetric(1.5, 1.0, 0.0, 10.0);
        assert_eq!(
            LevyMeasureModel::validate(&MeasureSpec::PowerLaw(untruncated)).unwrap_err(),
            Error::InfiniteTotalMass
        );
        let heavy = PowerLaw::symmetric(1.5, 1.0, 0.1, f64::INFINITY);
        assert_eq!(LevyMeasureModel::validate(&MeasureSpec::PowerLaw(heavy)).unwrap_err(), Error::InfiniteSecondMoment);
    }

    #[test]
    fn abs_moment_examples() {
        assert_eq!(LevyMeasureModel::unit_atom().abs_moment(4.0).unwrap(), 1.0);
        let two = LevyMeasureModel::atoms(&[(2.0, 1.0)]).unwrap();
        assert_eq!(two.abs_moment(3.0).unwrap(), 8.0);
        let sym = LevyMeasureModel::atoms(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(sym.abs_moment(2.0).unwrap(), 1.0);
        // non-integer order
        assert!(close(two.abs_moment(2.5).unwrap(), 2f64.powf(2.5), 1e-15));
    }

    #[test]
    fn signed_moment_examples() {
        let sym = LevyMeasureModel::atoms(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(sym.signed_moment(3).unwrap(), 0.0);
        assert_eq!(LevyMeasureModel::unit_atom().signed_moment(5).unwrap(), 1.0);
        let m = LevyMeasureModel::atoms(&[(2.0, 1.0), (-1.0, 3.0)]).unwrap();
        assert_eq!(m.signed_moment(3).unwrap(), 5.0);
    }

    #[test]
    fn exact_moments_avoid_cancellation() {
        // 1e8^2 + 1 - 1e8^2 loses the unit in floating point.
        let m = LevyMeasureModel::atoms(&[(1e8, 1.0), (1.0, 1.0), (-1e8, 1.0)]).unwrap();
        assert_eq!(m.signed_moment(1).unwrap(), 1.0);
        assert_eq!(m.signed_moment(3).unwrap(), 1.0);
    }

    #[test]
    fn interpolation_examples() {
        let rows = LevyMeasureModel::unit_atom().interpolation_check(6).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.m_r == 1.0 && r.bound == 1.0 && r.pass && r.equality));

        let rows = LevyMeasureModel::atoms(&[(2.0, 1.0)]).unwrap().interpolation_check(4).unwrap();
        let r3 = rows.iter().find(|r| r.r == 3).unwrap();
        assert_eq!(r3.m_r, 8.0);
        assert!(close(r3.bound, 8.0, 1e-14));
        assert!(r3.pass && r3.equality);

        let rows = LevyMeasureModel::atoms(&[(1.0, 0.5), (3.0, 0.5)]).unwrap().interpolation_check(4).unwrap();
        let r3 = rows.iter().find(|r| r.r == 3).unwrap();
        assert_eq!(r3.m_r, 14.0);
        assert!(close(r3.bound, (41.0f64 * 5.0).sqrt(), 1e-14));
        assert!((r3.bound - 14.318).abs() < 1e-3);
        assert!(r3.pass && !r3.equality);
    }

    #[test]
    fn interpolation_rejects_odd_order() {
        assert_eq!(LevyMeasureModel::unit_atom().interpolation_check(5).unwrap_err(), Error::OddMomentOrder(5));
    }

    #[test]
    fn power_law_moments_match_closed_form() {
        let pl = PowerLaw { alpha: 1.5, c_plus: 1.0, c_minus: 0.5, epsilon: 0.01, z_max: 5.0 };
        let m = LevyMeasureModel::validate(&MeasureSpec::PowerLaw(pl)).unwrap();
        let side = |p: f64| (pl.z_max.powf(p - pl.alpha) - pl.epsilon.powf(p - pl.alpha)) / (p - pl.alpha);
        let mass = 1.5 * (pl.epsilon.powf(-1.5) - pl.z_max.powf(-1.5)) / 1.5;
        assert!(close(m.total_mass(), mass, 1e-14));
        for p in [2.0, 3.0, 4.0, 6.0] {
            assert!(close(m.abs_moment(p).unwrap(), 1.5 * side(p), 1e-9), "p={p}");
        }
        assert!(close(m.signed_moment(3).unwrap(), 0.5 * side(3.0), 1e-9));
        assert!(close(m.signed_moment(1).unwrap(), 0.5 * side(1.0), 1e-9));
        // discarded variance: (c+ + c-) eps^{2-alpha}/(2-alpha)
        let bias = 1.5 * pl.epsilon.powf(0.5) / 0.5;
        assert!(close(m.small_jump_variance().unwrap(), bias, 1e-8));
        assert!(m.interpolation_check(6).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn drift_of_atoms() {
        let m = LevyMeasureModel::atoms(&[(2.0, 1.0), (-3.0, 0.5), (0.5, 4.0)]).unwrap();
        assert_eq!(m.drift().unwrap(), -(2.0 - 1.5));
    }

    #[test]
    fn jump_set_masses() {
        let m = LevyMeasureModel::atoms(&[(1.0, 0.5), (-1.0, 0.25), (2.0, 2.0)]).unwrap();
        assert_eq!(m.mass_of(&JumpSet::Atoms(vec![1.0, 2.0])).unwrap(), 2.5);
        assert_eq!(m.mass_of(&JumpSet::Range { lo: -2.0, hi: 1.0 }).unwrap(), 0.75);
        assert_eq!(m.first_moment_of(&JumpSet::Atoms(vec![-1.0, 2.0])).unwrap(), 3.75);
    }

    #[test]
    fn exponent_of_unit_atom_at_pi() {
        let psi = LevyMeasureModel::unit_atom().levy_exponent(std::f64::consts::PI).unwrap();
        assert!((psi.re + 2.0).abs() < 1e-15);
        assert!((psi.exp().norm() - (-2f64).exp()).abs() < 1e-15);
    }

    fn atom_lists() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((prop_oneof![-8.0f64..-0.05, 0.05f64..8.0], 0.01f64..4.0), 1..6)
    }

    proptest! {
        #[test]
        fn interpolation_always_holds(atoms in atom_lists(), half_p in 1usize..5) {
            let m = LevyMeasureModel::atoms(&atoms).unwrap();
            for row in m.interpolation_check(2 * half_p).unwrap() {
                prop_assert!(row.pass, "{row:?}");
            }
        }

        #[test]
        fn cached_m2_matches_abs_moment(atoms in atom_lists()) {
            let m = LevyMeasureModel::atoms(&atoms).unwrap();
            prop_assert_eq!(m.abs_moment(2.0).unwrap(), m.m2());
            for n in 1..=8usize {
                let s = m.signed_moment(n).unwrap();
                let a = m.abs_moment(n as f64).unwrap();
                prop_assert!(s.abs() <= a * (1.0 + 1e-15));
                if n % 2 == 0 { prop_assert_eq!(s, a); }
            }
        }

        #[test]
        fn symmetric_odd_moments_vanish(atoms in atom_lists()) {
            let mut sym = atoms.clone();
            sym.extend(atoms.iter().map(|&(z, w)| (-z, w)));
            let m = LevyMeasureModel::atoms(&sym).unwrap();
            for n in (1..=9usize).step_by(2) {
                prop_assert_eq!(m.signed_moment(n).unwrap(), 0.0);
            }
        }

        #[test]
        fn single_atom_attains_equality(z in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], w in 0.1f64..3.0) {
            let m = LevyMeasureModel::atoms(&[(z, w)]).unwrap();
            for row in m.interpolation_check(6).unwrap() {
                prop_assert!(row.equality, "{row:?}");
            }
        }
    }
}
