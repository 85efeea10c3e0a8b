//! The single-atom amplitude `P(x)` by residue inversion of
//! `Phat(p) = (p + u+)(p + u-) / ((p - q1)(p - q2)(p - q3))`, plus the
//! closed forms available for an atom at rest.
//!
//! Everything here is in scaled time `x = gamma0 t` unless a function takes
//! [`PhysicalParams`].

use crate::cubic::{characteristic_roots, roots_slow, CharacteristicRoots};
use crate::error::{Error, Result};
use crate::params::{PhysicalParams, ReducedParams};
use crate::Complex;

/// Tolerance on `|P| <= 1`.
pub const CONTRACTIVITY_TOL: f64 = 1e-9;

/// Velocity ratio above which the second-order root expansion is not used.
pub const SLOW_BETA_MAX: f64 = 0.05;

/// Uniform grid in scaled time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    x_start: f64,
    x_end: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(x_start: f64, x_end: f64, n_points: usize) -> Result<Self> {
        if !(x_start.is_finite() && x_end.is_finite()) || x_start < 0.0 {
            return Err(Error::InvalidGrid(format!("need finite 0 <= x_start, got [{x_start}, {x_end}]")));
        }
        if x_start >= x_end {
            return Err(Error::InvalidGrid(format!("x_start {x_start} must be < x_end {x_end}")));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n_points}")));
        }
        Ok(TimeGrid { x_start, x_end, n_points })
    }

    /// `[0, 30]` with 3001 points.
    pub fn markovian_default() -> Self {
        TimeGrid { x_start: 0.0, x_end: 30.0, n_points: 3001 }
    }

    /// `[0, 100]` with 10001 points.
    pub fn non_markovian_default() -> Self {
        TimeGrid { x_start: 0.0, x_end: 100.0, n_points: 10001 }
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_end - self.x_start) / (self.n_points - 1) as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            return self.x_end;
        }
        self.x_start + (self.x_end - self.x_start) * k as f64 / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.x(k))
    }

    /// Same spacing, extended to cover `[x_start, x_end]`.
    pub fn extended_to(&self, x_end: f64) -> Self {
        let h = self.spacing();
        let n = ((x_end - self.x_start) / h).ceil() as usize + 1;
        TimeGrid { x_start: self.x_start, x_end: self.x_start + h * (n - 1) as f64, n_points: n }
    }
}

/// Samples of `P` on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSeries {
    pub grid: TimeGrid,
    pub values: Vec<Complex>,
}

impl PropagatorSeries {
    pub fn new(grid: TimeGrid, values: Vec<Complex>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        PropagatorSeries { grid, values }
    }

    pub fn max_abs_diff(&self, other: &PropagatorSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    /// Fails if any sample has `|P| > 1 + tol`.
    pub fn check_contractive(&self, tol: f64) -> Result<()> {
        for (x, v) in self.iter() {
            let m = v.norm();
            if !m.is_finite() || m > 1.0 + tol {
                return Err(Error::NonContractive { x, value: m });
            }
        }
        Ok(())
    }
}

/// `(c0 + c1 x + c2 x^2) e^{q x}`
#[derive(Debug, Clone, Copy, PartialEq)]
struct ResidueTerm {
    q: Complex,
    poly: [Complex; 3],
}

impl ResidueTerm {
    fn eval(&self, x: f64) -> Complex {
        let [c0, c1, c2] = self.poly;
        (c0 + (c1 + c2 * x) * x) * (self.q * x).exp()
    }
}

/// Residue expansion of `P(x)` for fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    terms: Vec<ResidueTerm>,
}

impl Propagator {
    /// Exact propagator from the roots of the characteristic cubic.
    pub fn exact(r: &ReducedParams) -> Self {
        Self::from_roots(&characteristic_roots(r), r)
    }

    /// Propagator from the second-order slow-atom roots.
    pub fn slow(r: &ReducedParams) -> Result<Self> {
        if r.beta() > SLOW_BETA_MAX {
            return Err(Error::InvalidParams(format!(
                "slow-atom expansion needs beta <= {SLOW_BETA_MAX}, got {}",
                r.beta()
            )));
        }
        Ok(Self::from_roots(&roots_slow(r)?, r))
    }

    /// Residue sum over the given roots. Coalesced roots (as flagged by the
    /// cubic solver) use the confluent double- or triple-pole formula.
    pub fn from_roots(roots: &CharacteristicRoots, r: &ReducedParams) -> Self {
        let u = roots.u();
        let z = roots.shifted();
        let q = roots.roots().roots();
        let bw = r.w() * r.beta();
        let bw2 = bw * bw;
        // Numerator (p + u+)(p + u-) in the shifted variable.
        let num = |z: Complex| z * z - bw2;
        let dnum = |z: Complex| z * 2.0;

        let terms = if !roots.roots().is_degenerate() {
            (0..3)
                .map(|j| {
                    let den = (0..3).filter(|&k| k != j).map(|k| z[j] - z[k]).product::<Complex>();
                    ResidueTerm { q: q[j], poly: [num(z[j]) / den, Complex::default(), Complex::default()] }
                })
                .collect()
        } else {
            let max_mag = q.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
            let (i, j, k) = pairs
                .into_iter()
                .min_by(|a, b| (z[a.0] - z[a.1]).norm().total_cmp(&(z[b.0] - z[b.1]).norm()))
                .expect("three pairs");
            let zd = (z[i] + z[j]) * 0.5;
            let zs = z[k];
            if (zd - zs).norm() <= 1e-8 * max_mag {
                let zt = (z[0] + z[1] + z[2]) / 3.0;
                vec![ResidueTerm { q: zt - u, poly: [Complex::new(1.0, 0.0), dnum(zt), num(zt) * 0.5] }]
            } else {
                let gap = zd - zs;
                let double = ResidueTerm {
                    q: zd - u,
                    poly: [dnum(zd) / gap - num(zd) / (gap * gap), num(zd) / gap, Complex::default()],
                };
                let single = ResidueTerm {
                    q: zs - u,
                    poly: [num(zs) / (gap * gap), Complex::default(), Complex::default()],
                };
                vec![double, single]
            }
        };
        Propagator { terms }
    }

    pub fn eval(&self, x: f64) -> Complex {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn sample(&self, grid: &TimeGrid) -> PropagatorSeries {
        PropagatorSeries::new(*grid, grid.points().map(|x| self.eval(x)).collect())
    }
}

/// Laplace transform of `P` in reduced units.
pub fn p_hat(pvar: Complex, r: &ReducedParams) -> Result<Complex> {
    let roots = characteristic_roots(r);
    let u = roots.u();
    let z = pvar + u;
    let scale = 1f64.max(pvar.norm());
    let mut den = Complex::new(1.0, 0.0);
    for zj in roots.shifted() {
        let d = z - zj;
        if d.norm() < 1e-12 * scale {
            return Err(Error::PoleProximity(format!("{pvar}")));
        }
        den *= d;
    }
    let bw = r.w() * r.beta();
    Ok((z * z - bw * bw) / den)
}

/// `P` on `grid` by exact residue inversion.
pub fn p_analytic(grid: &TimeGrid, r: &ReducedParams) -> Result<PropagatorSeries> {
    let series = Propagator::exact(r).sample(grid);
    series.check_contractive(CONTRACTIVITY_TOL)?;
    Ok(series)
}

/// `P` on `grid` using the second-order slow-atom roots.
pub fn p_slow(grid: &TimeGrid, r: &ReducedParams) -> Result<PropagatorSeries> {
    let series = Propagator::slow(r)?.sample(grid);
    series.check_contractive(CONTRACTIVITY_TOL)?;
    Ok(series)
}

/// Closed form for an atom at rest:
/// `P(t) = e^{-lb t/2} [cosh(D t/2) + (lb/D) sinh(D t/2)]`,
/// `lb = lambda - i delta`, `D = sqrt(lb^2 - gamma0 lambda)`.
pub fn p_stationary(grid: &TimeGrid, p: &PhysicalParams) -> Result<PropagatorSeries> {
    if p.beta() != 0.0 {
        return Err(Error::InvalidParams(format!("stationary closed form needs beta = 0, got {}", p.beta())));
    }
    let lb = Complex::new(p.lambda(), -p.delta());
    let d = (lb * lb - p.gamma0() * p.lambda()).sqrt();
    let values = grid.points().map(|x| stationary_value(x / p.gamma0(), lb, d)).collect();
    let series = PropagatorSeries::new(*grid, values);
    series.check_contractive(CONTRACTIVITY_TOL)?;
    Ok(series)
}

fn stationary_value(t: f64, lb: Complex, d: Complex) -> Complex {
    let y = d * (t / 2.0);
    if y.re.abs() > 20.0 {
        // Separate the growing and decaying exponentials.
        let ratio = lb / d;
        let grow = ((d - lb) * (t / 2.0)).exp() * (ratio + 1.0) * 0.5;
        let decay = ((-d - lb) * (t / 2.0)).exp() * (-ratio + 1.0) * 0.5;
        return grow + decay;
    }
    // sinh(D t/2)/D = (t/2) sinh(y)/y stays finite as D -> 0.
    (-lb * (t / 2.0)).exp() * (y.cosh() + lb * (t / 2.0) * sinhc(y))
}

fn sinhc(y: Complex) -> Complex {
    if y.norm() < 1e-4 {
        let y2 = y * y;
        Complex::new(1.0, 0.0) + y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sinh() / y
    }
}

/// Weak-coupling (`lambda > gamma0`) zero-detuning closed form
/// `e^{-lambda t/2} [cosh(db t/2) + (lambda/db) sinh(db t/2)]`,
/// `db = sqrt(lambda^2 - gamma0 lambda)`.
pub fn weak_coupling_closed_form(t: f64, gamma0: f64, lambda: f64) -> Result<f64> {
    if lambda <= gamma0 {
        return Err(Error::InvalidParams(format!("weak coupling needs lambda > gamma0, got {lambda} <= {gamma0}")));
    }
    let db = (lambda * lambda - gamma0 * lambda).sqrt();
    Ok((-lambda * t / 2.0).exp() * ((db * t / 2.0).cosh() + lambda / db * (db * t / 2.0).sinh()))
}

/// Strong-coupling (`lambda < gamma0`) zero-detuning closed form
/// `e^{-lambda t/2} [cos(d t/2) + (lambda/d) sin(d t/2)]`,
/// `d = sqrt(gamma0 lambda - lambda^2)`.
pub fn strong_coupling_closed_form(t: f64, gamma0: f64, lambda: f64) -> Result<f64> {
    if lambda >= gamma0 {
        return Err(Error::InvalidParams(format!("strong coupling needs lambda < gamma0, got {lambda} >= {gamma0}")));
    }
    let d = (gamma0 * lambda - lambda * lambda).sqrt();
    Ok((-lambda * t / 2.0).exp() * ((d * t / 2.0).cos() + lambda / d * (d * t / 2.0).sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reduced(x1: f64, x2: f64, x3: f64, beta: f64) -> ReducedParams {
        ReducedParams::new(x1, x2, x3, beta).unwrap()
    }

    #[test]
    fn grid_validation_and_points() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0.5, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 3).is_err());
        let g = TimeGrid::new(0.0, 1.0, 11).unwrap();
        assert_abs_diff_eq!(g.spacing(), 0.1, epsilon = 1e-15);
        assert_eq!(g.x(10), 1.0);
        assert_eq!(g.points().count(), 11);
        let e = g.extended_to(2.05);
        assert!(e.x_end() >= 2.05);
        assert_abs_diff_eq!(e.spacing(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn starts_at_one() {
        let g = TimeGrid::new(0.0, 5.0, 51).unwrap();
        for r in [reduced(2.0, 0.0, 0.0, 0.0), reduced(0.005, 20.0, 0.5, 0.25), reduced(0.01, 10.0, 100.0, 0.1)] {
            let s = p_analytic(&g, &r).unwrap();
            assert!((s.values[0] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn markovian_rest_matches_closed_form() {
        let g = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let s = p_analytic(&g, &reduced(2.0, 0.0, 0.0, 0.0)).unwrap();
        let h = std::f64::consts::SQRT_2;
        let want = (-1f64).exp() * ((h / 2.0).cosh() + 2.0 / h * (h / 2.0).sinh());
        assert_abs_diff_eq!(s.values[1].re, want, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[1].im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(want, 0.863057, epsilon = 1e-6);
    }

    #[test]
    fn stationary_form_examples() {
        let g = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let p = PhysicalParams::new(1.0, 2.0, 0.0, 0.0, 0.0).unwrap();
        let s = p_stationary(&g, &p).unwrap();
        assert_eq!(s.values[0], Complex::new(1.0, 0.0));
        assert_abs_diff_eq!(s.values[1].re, weak_coupling_closed_form(1.0, 1.0, 2.0).unwrap(), epsilon = 1e-14);

        // lambda = gamma0: D = 0, P = e^{-t/2}(1 + t/2).
        let p = PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let g = TimeGrid::new(0.0, 4.0, 5).unwrap();
        let s = p_stationary(&g, &p).unwrap();
        for (x, v) in s.iter() {
            assert_abs_diff_eq!(v.re, (-x / 2.0).exp() * (1.0 + x / 2.0), epsilon = 1e-14);
        }

        let moving = PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.1).unwrap();
        assert!(matches!(p_stationary(&g, &moving), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn degenerate_roots_use_confluent_formula() {
        // x1 = 1, x3 = 0, beta = 0: q2 = q3 = -1/2.
        let r = reduced(1.0, 0.0, 0.0, 0.0);
        let g = TimeGrid::new(0.0, 10.0, 101).unwrap();
        let s = p_analytic(&g, &r).unwrap();
        for (x, v) in s.iter() {
            assert_abs_diff_eq!(v.re, (-x / 2.0).exp() * (1.0 + x / 2.0), epsilon = 1e-7);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn strong_coupling_zeros() {
        let (gamma0, lambda) = (1.0_f64, 0.005_f64);
        let d = (gamma0 * lambda - lambda * lambda).sqrt();
        // First zero of cos(d t/2) + (lambda/d) sin(d t/2).
        let t0 = 2.0 / d * (std::f64::consts::PI - (d / lambda).atan());
        assert_abs_diff_eq!(strong_coupling_closed_form(t0, gamma0, lambda).unwrap(), 0.0, epsilon = 1e-12);
        let r = reduced(0.005, 0.0, 0.0, 0.0);
        assert!(Propagator::exact(&r).eval(t0).norm() < 1e-10);
    }

    #[test]
    fn p_hat_examples() {
        let r = reduced(2.0, 0.0, 0.0, 0.0);
        let v = p_hat(Complex::new(1.0, 0.0), &r).unwrap();
        assert_abs_diff_eq!(v.re, 6.0 / 7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        let big = Complex::new(1e8, 0.0);
        assert_abs_diff_eq!((p_hat(big, &r).unwrap() * big).re, 1.0, epsilon = 1e-7);
        let pole = Complex::new(-(2.0 - std::f64::consts::SQRT_2) / 2.0, 0.0);
        assert!(matches!(p_hat(pole, &r), Err(Error::PoleProximity(_))));
    }

    #[test]
    fn slow_matches_stationary_at_rest() {
        let g = TimeGrid::new(0.0, 20.0, 201).unwrap();
        let r = reduced(0.3, 4.0, 0.7, 0.0);
        let p = PhysicalParams::new(1.0, 0.3, 4.0, 0.7, 0.0).unwrap();
        let d = p_slow(&g, &r).unwrap().max_abs_diff(&p_stationary(&g, &p).unwrap());
        assert!(d < 1e-10, "{d}");
        assert!(p_slow(&g, &reduced(0.3, 4.0, 0.7, 0.06)).is_err());
    }
}
