//! Physical and dimensionless model parameters.
//!
//! All rates are angular frequencies in inverse time units. The reduced form
//! divides every rate by the bare decay rate `gamma0`, so the characteristic
//! cubic and the propagator depend only on [`ReducedParams`].

use crate::error::{Error, Result};
use crate::Complex;

/// Upper bound on `v/c`; the model neglects relativistic corrections.
pub const MAX_BETA: f64 = 0.3;

/// Physical model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    gamma0: f64,
    lambda: f64,
    omega0: f64,
    delta: f64,
    beta: f64,
    tau: Option<f64>,
}

impl PhysicalParams {
    /// Parameters in the continuum limit (mirror delay `tau` infinite).
    pub fn new(gamma0: f64, lambda: f64, omega0: f64, delta: f64, beta: f64) -> Result<Self> {
        let p = PhysicalParams { gamma0, lambda, omega0, delta, beta, tau: None };
        p.validate()?;
        Ok(p)
    }

    /// Sets the mirror delay `tau = l/c`. An infinite value selects the
    /// continuum limit.
    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::InvalidParams(format!("tau must be > 0, got {tau}")));
        }
        self.tau = if tau.is_infinite() { None } else { Some(tau) };
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return bad(format!("gamma0 must be finite and > 0, got {}", self.gamma0));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!("lambda must be finite and > 0, got {}", self.lambda));
        }
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return bad(format!("omega0 must be finite and >= 0, got {}", self.omega0));
        }
        if !self.delta.is_finite() {
            return bad(format!("delta must be finite, got {}", self.delta));
        }
        if !(self.beta.is_finite() && (0.0..MAX_BETA).contains(&self.beta)) {
            return bad(format!("beta must satisfy 0 <= beta < {MAX_BETA}, got {}", self.beta));
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return bad(format!("tau must be > 0, got {tau}"));
            }
        }
        Ok(())
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Mirror delay, `None` in the continuum limit.
    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    /// Reservoir correlation time `1/lambda`.
    pub fn reservoir_correlation_time(&self) -> f64 {
        1.0 / self.lambda
    }

    /// Relaxation time `1/gamma0`.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / self.gamma0
    }

    pub fn reduce(&self) -> ReducedParams {
        reduce(self)
    }
}

/// Dimensionless parameters: `x1 = lambda/gamma0`, `x2 = omega0/gamma0`,
/// `x3 = delta/gamma0`, with `beta` unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    x1: f64,
    x2: f64,
    x3: f64,
    beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Weak coupling, `lambda > gamma0`.
    Markovian,
    /// Strong coupling, `lambda < gamma0`.
    NonMarkovian,
    /// `lambda == gamma0`; the stationary roots coalesce at zero detuning.
    Degenerate,
}

impl ReducedParams {
    /// Builds reduced parameters directly.
    ///
    /// Only `beta < 1` is enforced here (both kernel exponents must decay);
    /// the tighter non-relativistic bound lives on [`PhysicalParams`].
    pub fn new(x1: f64, x2: f64, x3: f64, beta: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(x1.is_finite() && x1 > 0.0) {
            return bad(format!("x1 must be finite and > 0, got {x1}"));
        }
        if !(x2.is_finite() && x2 >= 0.0) {
            return bad(format!("x2 must be finite and >= 0, got {x2}"));
        }
        if !x3.is_finite() {
            return bad(format!("x3 must be finite, got {x3}"));
        }
        if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
            return bad(format!("beta must satisfy 0 <= beta < 1, got {beta}"));
        }
        Ok(ReducedParams { x1, x2, x3, beta })
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn x3(&self) -> f64 {
        self.x3
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn regime(&self) -> Regime {
        const TOL: f64 = 1e-12;
        if (self.x1 - 1.0).abs() <= TOL {
            Regime::Degenerate
        } else if self.x1 > 1.0 {
            Regime::Markovian
        } else {
            Regime::NonMarkovian
        }
    }

    /// Stationary exponent `u = x1 - i x3`.
    pub fn u(&self) -> Complex {
        Complex::new(self.x1, -self.x3)
    }

    /// `w = u + i x2`, so that `u± = u ± beta w`.
    pub fn w(&self) -> Complex {
        Complex::new(self.x1, self.x2 - self.x3)
    }

    pub fn u_pm(&self) -> (Complex, Complex) {
        u_pm_raw(self.x1, self.x2, self.x3, self.beta)
    }
}

pub fn reduce(p: &PhysicalParams) -> ReducedParams {
    ReducedParams {
        x1: p.lambda / p.gamma0,
        x2: p.omega0 / p.gamma0,
        x3: p.delta / p.gamma0,
        beta: p.beta,
    }
}

pub fn u_pm(r: &ReducedParams) -> (Complex, Complex) {
    r.u_pm()
}

/// `u± = (1 ± beta) x1 ± i beta x2 - i (1 ± beta) x3`, unvalidated so that
/// negative `beta` can be probed.
pub(crate) fn u_pm_raw(x1: f64, x2: f64, x3: f64, beta: f64) -> (Complex, Complex) {
    let plus = Complex::new((1.0 + beta) * x1, beta * x2 - (1.0 + beta) * x3);
    let minus = Complex::new((1.0 - beta) * x1, -beta * x2 - (1.0 - beta) * x3);
    (plus, minus)
}

/// Two-qubit initial state `a|00> + |b| e^{i phase} |11>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    a: f64,
    b_mag: f64,
    delta_phase: f64,
}

impl InitialState {
    pub fn new(a: f64, delta_phase: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && a < 1.0) {
            return Err(Error::InvalidState(format!("a must satisfy 0 < a < 1, got {a}")));
        }
        if !delta_phase.is_finite() {
            return Err(Error::InvalidState(format!("phase must be finite, got {delta_phase}")));
        }
        Ok(InitialState { a, b_mag: (1.0 - a * a).sqrt(), delta_phase })
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn maximally_entangled() -> Self {
        InitialState {
            a: std::f64::consts::FRAC_1_SQRT_2,
            b_mag: std::f64::consts::FRAC_1_SQRT_2,
            delta_phase: 0.0,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b_mag(&self) -> f64 {
        self.b_mag
    }

    /// Phase of `b`. Carried for completeness; the concurrence ignores it.
    pub fn delta_phase(&self) -> f64 {
        self.delta_phase
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reduce_divides_by_gamma0() {
        let p = PhysicalParams::new(1.0, 2.0, 20.0, 0.0, 0.1).unwrap();
        let r = p.reduce();
        assert_eq!((r.x1(), r.x2(), r.x3(), r.beta()), (2.0, 20.0, 0.0, 0.1));

        let r = reduce(&PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap());
        assert_eq!((r.x1(), r.x2(), r.x3(), r.beta()), (1.0, 0.0, 0.0, 0.0));

        let r = reduce(&PhysicalParams::new(2.0, 1.0, 4.0, 1.0, 0.0).unwrap());
        assert_eq!((r.x1(), r.x2(), r.x3(), r.beta()), (0.5, 2.0, 0.5, 0.0));
    }

    #[test]
    fn rejects_invalid_physical_params() {
        assert!(PhysicalParams::new(0.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 0.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -1.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, f64::NAN, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 0.0, -0.01).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.3).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.29).is_ok());
        let p = PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(p.with_tau(0.0).is_err());
        assert_eq!(p.with_tau(f64::INFINITY).unwrap().tau(), None);
        assert_eq!(p.with_tau(3.0).unwrap().tau(), Some(3.0));
    }

    #[test]
    fn time_scales() {
        let p = PhysicalParams::new(4.0, 0.5, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p.reservoir_correlation_time(), 2.0);
        assert_eq!(p.relaxation_time(), 0.25);
    }

    #[test]
    fn u_pm_examples() {
        let (up, um) = ReducedParams::new(2.0, 20.0, 0.0, 0.0).unwrap().u_pm();
        assert_eq!(up, Complex::new(2.0, 0.0));
        assert_eq!(um, up);

        let (up, _) = ReducedParams::new(1.5, 0.5, 100.0, 0.2).unwrap().u_pm();
        assert_abs_diff_eq!(up.re, 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(up.im, -119.9, epsilon = 1e-12);

        let (up, _) = ReducedParams::new(1.5, 10.0, 100.0, 0.01).unwrap().u_pm();
        assert_abs_diff_eq!(up.re, 1.515, epsilon = 1e-12);
        assert_abs_diff_eq!(up.im, -100.9, epsilon = 1e-12);
    }

    #[test]
    fn u_pm_swap_under_beta_reversal() {
        for &(x1, x2, x3, beta) in &[(2.0, 20.0, 0.0, 0.1), (0.005, 0.5, 30.0, 0.25), (1.0, 3.0, -2.0, 0.01)] {
            let (up, um) = u_pm_raw(x1, x2, x3, beta);
            let (up_neg, um_neg) = u_pm_raw(x1, x2, x3, -beta);
            assert_abs_diff_eq!((up_neg - um).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((um_neg - up).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn u_pm_split_around_u() {
        let r = ReducedParams::new(0.7, 3.0, 1.5, 0.2).unwrap();
        let (up, um) = r.u_pm();
        assert_abs_diff_eq!((up - (r.u() + r.w() * 0.2)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((um - (r.u() - r.w() * 0.2)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn regime_follows_x1() {
        let regime = |x1| ReducedParams::new(x1, 0.0, 0.0, 0.0).unwrap().regime();
        assert_eq!(regime(2.0), Regime::Markovian);
        assert_eq!(regime(0.005), Regime::NonMarkovian);
        assert_eq!(regime(1.0), Regime::Degenerate);
    }

    #[test]
    fn initial_state_normalized() {
        let s = InitialState::new(0.4, 1.0).unwrap();
        assert_abs_diff_eq!(s.a() * s.a() + s.b_mag() * s.b_mag(), 1.0, epsilon = 1e-12);
        assert!(InitialState::new(0.0, 0.0).is_err());
        assert!(InitialState::new(1.0, 0.0).is_err());
        assert!(InitialState::new(-0.3, 0.0).is_err());
        let m = InitialState::maximally_entangled();
        assert_abs_diff_eq!(m.a(), m.b_mag(), epsilon = 1e-15);
    }
}
