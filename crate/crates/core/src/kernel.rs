//! Lorentzian spectral density and the reservoir correlation function.
//!
//! Times and rates here are physical (not scaled by `gamma0`).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::Complex;

/// Derived complex rates of the continuum kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    params: PhysicalParams,
    lambda_bar: Complex,
    alpha: Complex,
    v_plus: Complex,
    v_minus: Complex,
}

impl KernelParams {
    pub fn new(p: &PhysicalParams) -> Result<Self> {
        let lambda_bar = Complex::new(p.lambda(), -p.delta());
        let alpha = (lambda_bar + Complex::new(0.0, p.omega0())) * p.beta();
        let v_plus = lambda_bar + alpha;
        let v_minus = lambda_bar - alpha;
        if v_plus.re <= 0.0 || v_minus.re <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "kernel does not decay: Re v+ = {}, Re v- = {}",
                v_plus.re, v_minus.re
            )));
        }
        Ok(KernelParams { params: *p, lambda_bar, alpha, v_plus, v_minus })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// `lambda - i delta`.
    pub fn lambda_bar(&self) -> Complex {
        self.lambda_bar
    }

    /// `beta (lambda_bar + i omega0)`.
    pub fn alpha(&self) -> Complex {
        self.alpha
    }

    pub fn v_plus(&self) -> Complex {
        self.v_plus
    }

    pub fn v_minus(&self) -> Complex {
        self.v_minus
    }

    /// Prefactor `gamma0 lambda / 8` of each exponential in the kernel.
    fn weight(&self) -> f64 {
        self.params.gamma0() * self.params.lambda() / 8.0
    }

    /// `g(t) = (gamma0 lambda / 8)(e^{-v+ t} + e^{-v- t})`, the continuum
    /// kernel as a function of the lag `t >= 0`.
    ///
    /// Written as a sum of decaying exponentials, which is the same as
    /// `(gamma0 lambda / 4) cosh(alpha t) e^{-lambda_bar t}` but cannot
    /// overflow.
    pub fn g(&self, t: f64) -> Complex {
        ((-self.v_plus * t).exp() + (-self.v_minus * t).exp()) * self.weight()
    }

    pub fn g_hat(&self, p: Complex) -> Result<Complex> {
        let a = p + self.v_plus;
        let b = p + self.v_minus;
        if a.norm() < 1e-12 || b.norm() < 1e-12 {
            return Err(Error::PoleProximity(format!("{p}")));
        }
        Ok((a.inv() + b.inv()) * self.weight())
    }
}

/// `J(omega) = (1/2pi) gamma0 lambda^2 / ((omega0 - omega - delta)^2 + lambda^2)`.
pub fn spectral_density(omega: f64, p: &PhysicalParams) -> f64 {
    let lambda = p.lambda();
    let detune = p.omega0() - omega - p.delta();
    p.gamma0() * lambda * lambda / (2.0 * PI * (detune * detune + lambda * lambda))
}

/// Two-term continuum-limit correlation function `f(t, s)`.
pub fn kernel_continuum(t: f64, s: f64, p: &PhysicalParams) -> Complex {
    continuum_terms(t - s, p)
}

fn continuum_terms(lag: f64, p: &PhysicalParams) -> Complex {
    let (beta, lambda, omega0, delta) = (p.beta(), p.lambda(), p.omega0(), p.delta());
    let abs_lag = lag.abs();
    let first = Complex::new(
        -lambda * (1.0 - beta) * abs_lag,
        (beta * omega0 + (1.0 - beta) * delta) * lag,
    );
    let second = Complex::new(
        -lambda * (1.0 + beta) * abs_lag,
        (-beta * omega0 + (1.0 + beta) * delta) * lag,
    );
    (first.exp() + second.exp()) * (p.gamma0() * lambda / 8.0)
}

/// Four-term correlation function for a finite mirror delay `tau`,
/// including the two mirror-reflection terms.
pub fn kernel_finite_tau(t: f64, s: f64, p: &PhysicalParams) -> Result<Complex> {
    let tau = p.tau().ok_or(Error::ContinuumLimit("kernel_finite_tau needs a finite tau"))?;
    Ok(finite_tau(t, s, tau, p))
}

fn finite_tau(t: f64, s: f64, tau: f64, p: &PhysicalParams) -> Complex {
    let (beta, lambda, omega0, delta) = (p.beta(), p.lambda(), p.omega0(), p.delta());
    let direct = continuum_terms(t - s, p);

    let mirror_phase = (omega0 - delta) * (beta * (t + s) - 2.0 * tau);
    let carrier = delta * (t - s);
    let third = Complex::new(
        -lambda * ((1.0 - beta) * t - (1.0 + beta) * s + 2.0 * tau).abs(),
        mirror_phase + carrier,
    );
    let fourth = Complex::new(
        -lambda * ((1.0 + beta) * t - (1.0 - beta) * s - 2.0 * tau).abs(),
        -mirror_phase + carrier,
    );
    direct - (third.exp() + fourth.exp()) * (p.gamma0() * lambda / 8.0)
}

/// `g(t) = (gamma0 lambda / 4) cosh(alpha t) e^{-lambda_bar t}` for `t >= 0`.
pub fn g_of_t(t: f64, p: &PhysicalParams) -> Result<Complex> {
    Ok(KernelParams::new(p)?.g(t))
}

/// Laplace transform `ghat(p) = (gamma0 lambda / 8)(1/(p + v+) + 1/(p + v-))`.
pub fn g_hat(pvar: Complex, p: &PhysicalParams) -> Result<Complex> {
    KernelParams::new(p)?.g_hat(pvar)
}

/// A memory kernel `f(t, s)` for the integro-differential equation
/// `dP/dt = -int_0^t f(t, s) P(s) ds`, in physical time.
pub trait MemoryKernel: Sync {
    fn eval(&self, t: f64, s: f64) -> Complex;

    /// `Some(g(t - s))` when the kernel depends only on the lag. Solvers use
    /// this to evaluate the kernel once per lag instead of once per pair.
    fn lag(&self, _lag: f64) -> Option<Complex> {
        None
    }
}

/// Continuum-limit kernel.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumKernel {
    params: PhysicalParams,
}

impl ContinuumKernel {
    pub fn new(p: &PhysicalParams) -> Self {
        ContinuumKernel { params: *p }
    }
}

impl MemoryKernel for ContinuumKernel {
    fn eval(&self, t: f64, s: f64) -> Complex {
        kernel_continuum(t, s, &self.params)
    }

    fn lag(&self, lag: f64) -> Option<Complex> {
        Some(continuum_terms(lag, &self.params))
    }
}

/// Finite mirror-delay kernel.
#[derive(Debug, Clone, Copy)]
pub struct FiniteTauKernel {
    params: PhysicalParams,
    tau: f64,
}

impl FiniteTauKernel {
    pub fn new(p: &PhysicalParams) -> Result<Self> {
        let tau = p.tau().ok_or(Error::ContinuumLimit("finite-tau kernel needs a finite tau"))?;
        Ok(FiniteTauKernel { params: *p, tau })
    }

    /// Scaled time `2 gamma0 tau` before which the solution still carries
    /// the start-up transient of the mirror terms.
    pub fn boundary_affected_until(&self) -> f64 {
        2.0 * self.tau * self.params.gamma0()
    }
}

impl MemoryKernel for FiniteTauKernel {
    fn eval(&self, t: f64, s: f64) -> Complex {
        finite_tau(t, s, self.tau, &self.params)
    }
}

/// Wraps a closure `(t, s) -> f(t, s)` as a [`MemoryKernel`].
pub struct FnKernel<F>(pub F);

impl<F> MemoryKernel for FnKernel<F>
where
    F: Fn(f64, f64) -> Complex + Sync,
{
    fn eval(&self, t: f64, s: f64) -> Complex {
        (self.0)(t, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(gamma0: f64, lambda: f64, omega0: f64, delta: f64, beta: f64) -> PhysicalParams {
        PhysicalParams::new(gamma0, lambda, omega0, delta, beta).unwrap()
    }

    #[test]
    fn lorentzian_peak_and_tails() {
        let p = params(1.3, 0.7, 5.0, 1.0, 0.0);
        assert_abs_diff_eq!(spectral_density(4.0, &p), 1.3 / (2.0 * PI), epsilon = 1e-15);
        assert!(spectral_density(1e9, &p) < 1e-15);
        assert!(spectral_density(-1e9, &p) < 1e-15);
        assert!(spectral_density(123.0, &p) > 0.0);
    }

    #[test]
    fn continuum_coincident_times() {
        let p = params(1.0, 2.0, 20.0, 3.0, 0.2);
        let f = kernel_continuum(1.7, 1.7, &p);
        assert_abs_diff_eq!(f.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn continuum_at_rest() {
        let p = params(1.0, 0.5, 7.0, 1.5, 0.0);
        for &(t, s) in &[(2.0, 0.5), (0.3, 1.1)] {
            let lag: f64 = t - s;
            let want = Complex::new(-0.5 * lag.abs(), 1.5 * lag).exp() * (0.5 / 4.0);
            assert_abs_diff_eq!((kernel_continuum(t, s, &p) - want).norm(), 0.0, epsilon = 1e-15);
        }
        let p = params(1.0, 2.0, 0.0, 0.0, 0.0);
        let f = kernel_continuum(0.5, 0.0, &p);
        assert_abs_diff_eq!(f.re, 0.5 * (-1f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn g_matches_continuum_kernel_and_cosh_form() {
        let p = params(1.0, 1.5, 10.0, 4.0, 0.2);
        let k = KernelParams::new(&p).unwrap();
        assert_abs_diff_eq!(g_of_t(0.0, &p).unwrap().re, 1.5 / 4.0, epsilon = 1e-15);
        for &t in &[0.1, 0.8, 3.0, 12.0] {
            let g = g_of_t(t, &p).unwrap();
            assert_abs_diff_eq!((g - kernel_continuum(t, 0.0, &p)).norm(), 0.0, epsilon = 1e-14);
            let cosh_form = (k.alpha() * t).cosh() * (-k.lambda_bar() * t).exp() * (1.5 / 4.0);
            assert_abs_diff_eq!((g - cosh_form).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn g_at_rest_is_single_exponential() {
        let p = params(2.0, 0.5, 3.0, 1.0, 0.0);
        let t = 1.3;
        let want = Complex::new(-0.5 * t, 1.0 * t).exp() * (2.0 * 0.5 / 4.0);
        assert_abs_diff_eq!((g_of_t(t, &p).unwrap() - want).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn v_pm_real_parts() {
        let p = params(1.0, 2.0, 20.0, 5.0, 0.25);
        let k = KernelParams::new(&p).unwrap();
        assert_abs_diff_eq!(k.v_plus().re, 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(k.v_minus().re, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn g_hat_examples() {
        let p = params(1.0, 2.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!((g_hat(Complex::new(0.0, 0.0), &p).unwrap() - 0.25).norm(), 0.0, epsilon = 1e-15);
        let p = params(1.0, 2.0, 0.0, 3.0, 0.0);
        let want = Complex::new(0.5, 0.0) / Complex::new(2.0, -3.0);
        assert_abs_diff_eq!((g_hat(Complex::new(0.0, 0.0), &p).unwrap() - want).norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(g_hat(Complex::new(-2.0, 3.0), &p), Err(Error::PoleProximity(_))));
    }

    #[test]
    fn finite_tau_requires_tau() {
        let p = params(1.0, 2.0, 0.0, 0.0, 0.0);
        assert_eq!(kernel_finite_tau(0.0, 0.0, &p), Err(Error::ContinuumLimit("kernel_finite_tau needs a finite tau")));
        assert!(FiniteTauKernel::new(&p).is_err());
    }

    #[test]
    fn finite_tau_approaches_continuum() {
        // lambda tau = 50: mirror terms are suppressed by e^{-2 lambda tau}.
        let p = params(1.0, 2.0, 20.0, 1.0, 0.1).with_tau(25.0).unwrap();
        for &(t, s) in &[(0.0, 0.0), (1.0, 0.5), (3.0, 2.9), (4.0, 0.0)] {
            let d = kernel_finite_tau(t, s, &p).unwrap() - kernel_continuum(t, s, &p);
            assert!(d.norm() < 1e-12, "({t}, {s}): {d}");
        }
    }

    #[test]
    fn continuum_kernel_is_hermitian() {
        let p = params(1.0, 0.3, 11.0, -2.0, 0.15);
        for i in 0..7 {
            for j in 0..7 {
                let (t, s) = (0.37 * i as f64, 0.53 * j as f64);
                let d = kernel_continuum(s, t, &p) - kernel_continuum(t, s, &p).conj();
                assert!(d.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn fn_kernel_wraps_closures() {
        let k = FnKernel(|t: f64, s: f64| Complex::new(t - s, 0.0));
        assert_eq!(k.eval(3.0, 1.0), Complex::new(2.0, 0.0));
        assert_eq!(k.lag(1.0), None);
        let p = params(1.0, 2.0, 0.0, 0.0, 0.0);
        assert_eq!(ContinuumKernel::new(&p).lag(0.0), Some(Complex::new(0.5, 0.0)));
    }
}
