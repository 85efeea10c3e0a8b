//! Numerical solvers for `dP/dt = -int_0^t f(t, s) P(s) ds`, independent of
//! the residue formula in [`crate::propagator`].
//!
//! Two routes are provided:
//!
//! * [`p_ode_oracle`] uses the fact that the continuum kernel is a sum of two
//!   exponentials, `g(t) = k (e^{-v+ t} + e^{-v- t})`. With the convolution
//!   accumulators `y±(t) = k int_0^t e^{-v± (t - s)} P(s) ds` the memory
//!   equation becomes the linear system
//!   `P' = -(y+ + y-)`, `y±' = -v± y± + k P`, which is exact and integrated
//!   here with classical RK4.
//! * [`p_volterra_oracle`] treats the kernel as a black box and solves the
//!   integro-differential equation with trapezoidal quadrature for the
//!   memory integral and a trapezoidal predictor-corrector in time. This is
//!   the only route for a finite mirror delay.

use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::params::PhysicalParams;
use crate::propagator::{PropagatorSeries, TimeGrid};
use crate::Complex;

/// Oracles tolerate slightly more than the analytic path on `|P| <= 1`.
pub const ORACLE_CONTRACTIVITY_TOL: f64 = 1e-6;

const MAX_CORRECTOR_ITERATIONS: usize = 50;

/// State of the exact ODE reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub p: Complex,
    pub y_plus: Complex,
    pub y_minus: Complex,
}

impl OdeState {
    pub fn initial() -> Self {
        OdeState { p: Complex::new(1.0, 0.0), y_plus: Complex::default(), y_minus: Complex::default() }
    }

    fn axpy(&self, h: f64, d: &OdeState) -> OdeState {
        OdeState { p: self.p + d.p * h, y_plus: self.y_plus + d.y_plus * h, y_minus: self.y_minus + d.y_minus * h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// RK4 step in scaled time `x = gamma0 t`.
    pub step: f64,
    /// Re-run at half the step and fail if the Richardson error estimate
    /// exceeds `richardson_limit`.
    pub richardson_check: bool,
    pub richardson_limit: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { step: 1e-3, richardson_check: true, richardson_limit: 1e-8 }
    }
}

struct ExpSumSystem {
    u_plus: Complex,
    u_minus: Complex,
    weight: f64,
}

impl ExpSumSystem {
    fn rhs(&self, s: &OdeState) -> OdeState {
        OdeState {
            p: -(s.y_plus + s.y_minus),
            y_plus: -self.u_plus * s.y_plus + s.p * self.weight,
            y_minus: -self.u_minus * s.y_minus + s.p * self.weight,
        }
    }

    fn rk4(&self, s: &OdeState, h: f64) -> OdeState {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&s.axpy(h / 2.0, &k1));
        let k3 = self.rhs(&s.axpy(h / 2.0, &k2));
        let k4 = self.rhs(&s.axpy(h, &k3));
        OdeState {
            p: s.p + (k1.p + (k2.p + k3.p) * 2.0 + k4.p) * (h / 6.0),
            y_plus: s.y_plus + (k1.y_plus + (k2.y_plus + k3.y_plus) * 2.0 + k4.y_plus) * (h / 6.0),
            y_minus: s.y_minus + (k1.y_minus + (k2.y_minus + k3.y_minus) * 2.0 + k4.y_minus) * (h / 6.0),
        }
    }

    fn advance(&self, mut s: OdeState, span: f64, h_target: f64) -> OdeState {
        if span <= 0.0 {
            return s;
        }
        let n = (span / h_target).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            s = self.rk4(&s, h);
        }
        s
    }

    fn run(&self, grid: &TimeGrid, h: f64) -> Vec<Complex> {
        let mut s = self.advance(OdeState::initial(), grid.x_start(), h);
        let mut out = Vec::with_capacity(grid.len());
        out.push(s.p);
        for k in 1..grid.len() {
            s = self.advance(s, grid.x(k) - grid.x(k - 1), h);
            out.push(s.p);
        }
        out
    }
}

/// `P` from the exact three-state ODE reduction of the continuum kernel.
pub fn p_ode_oracle(grid: &TimeGrid, p: &PhysicalParams, opts: &OdeOptions) -> Result<PropagatorSeries> {
    if p.tau().is_some() {
        return Err(Error::InvalidParams("the ODE reduction holds only in the continuum limit".into()));
    }
    if !(opts.step.is_finite() && opts.step > 0.0) {
        return Err(Error::InvalidParams(format!("ODE step must be > 0, got {}", opts.step)));
    }
    let r = p.reduce();
    let (u_plus, u_minus) = r.u_pm();
    let system = ExpSumSystem { u_plus, u_minus, weight: r.x1() / 8.0 };

    let values = if opts.richardson_check {
        let coarse = system.run(grid, opts.step);
        let fine = system.run(grid, opts.step / 2.0);
        let estimate = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / 15.0;
        if estimate.is_nan() || estimate > opts.richardson_limit {
            return Err(Error::StepTooCoarse { estimate, limit: opts.richardson_limit });
        }
        fine
    } else {
        system.run(grid, opts.step)
    };
    let series = PropagatorSeries::new(*grid, values);
    series.check_contractive(ORACLE_CONTRACTIVITY_TOL)?;
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraOptions {
    /// Target number of mesh intervals across `[0, x_end]`.
    pub steps: usize,
    /// Combine the solutions at `h` and `h/2` to cancel the `h^2` error term.
    pub richardson: bool,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        VolterraOptions { steps: 10_000, richardson: false }
    }
}

impl VolterraOptions {
    /// Richardson-extrapolated solve with about ten steps per unit of
    /// `max_rate * x`, where `max_rate` is the fastest kernel rate in scaled
    /// units. Clamped to keep the quadratic cost bounded.
    pub fn resolving(max_rate: f64, x_end: f64) -> Self {
        let steps = (10.0 * x_end * max_rate.max(1.0)).ceil();
        VolterraOptions { steps: (steps as usize).clamp(2000, 12_000), richardson: true }
    }
}

/// Integration mesh in scaled time, with the indices of the output grid.
struct Mesh {
    x: Vec<f64>,
    grid_index: Vec<usize>,
    uniform: bool,
}

impl Mesh {
    fn build(grid: &TimeGrid, steps: usize) -> Mesh {
        let h_target = grid.x_end() / steps.max(1) as f64;
        let per_interval = (grid.spacing() / h_target).ceil().max(1.0) as usize;
        let mut x = vec![0.0];
        let lead = if grid.x_start() > 0.0 { (grid.x_start() / h_target).ceil().max(1.0) as usize } else { 0 };
        for i in 1..=lead {
            x.push(grid.x_start() * i as f64 / lead as f64);
        }
        let mut grid_index = vec![x.len() - 1];
        for k in 1..grid.len() {
            let (a, b) = (grid.x(k - 1), grid.x(k));
            for i in 1..=per_interval {
                x.push(if i == per_interval { b } else { a + (b - a) * i as f64 / per_interval as f64 });
            }
            grid_index.push(x.len() - 1);
        }
        let h = grid.spacing() / per_interval as f64;
        let uniform = lead == 0 || ((grid.x_start() / lead as f64) - h).abs() <= 1e-12 * h;
        Mesh { x, grid_index, uniform }
    }

    fn refined(&self) -> Mesh {
        let mut x = Vec::with_capacity(2 * self.x.len() - 1);
        x.push(self.x[0]);
        for w in self.x.windows(2) {
            x.push(0.5 * (w[0] + w[1]));
            x.push(w[1]);
        }
        Mesh { x, grid_index: self.grid_index.iter().map(|i| 2 * i).collect(), uniform: self.uniform }
    }
}

/// `P` from direct solution of the memory equation with an arbitrary kernel.
///
/// `kernel` is evaluated in physical time `t = x / gamma0`. Second order in
/// the mesh step unless `opts.richardson` is set.
pub fn p_volterra_oracle<K: MemoryKernel + ?Sized>(
    grid: &TimeGrid,
    gamma0: f64,
    kernel: &K,
    opts: &VolterraOptions,
) -> Result<PropagatorSeries> {
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(Error::InvalidParams(format!("gamma0 must be > 0, got {gamma0}")));
    }
    if opts.steps == 0 {
        return Err(Error::InvalidParams("Volterra solver needs at least one step".into()));
    }
    let mesh = Mesh::build(grid, opts.steps);
    let coarse = solve_on_mesh(&mesh, gamma0, kernel)?;
    let pick = |sol: &[Complex], m: &Mesh| m.grid_index.iter().map(|&i| sol[i]).collect::<Vec<_>>();
    let values = if opts.richardson {
        let fine_mesh = mesh.refined();
        let fine = solve_on_mesh(&fine_mesh, gamma0, kernel)?;
        pick(&coarse, &mesh)
            .into_iter()
            .zip(pick(&fine, &fine_mesh))
            .map(|(c, f)| (f * 4.0 - c) / 3.0)
            .collect()
    } else {
        pick(&coarse, &mesh)
    };
    let series = PropagatorSeries::new(*grid, values);
    series.check_contractive(ORACLE_CONTRACTIVITY_TOL)?;
    Ok(series)
}

fn solve_on_mesh<K: MemoryKernel + ?Sized>(mesh: &Mesh, gamma0: f64, kernel: &K) -> Result<Vec<Complex>> {
    let t: Vec<f64> = mesh.x.iter().map(|x| x / gamma0).collect();
    let m = t.len();
    let mut p = Vec::with_capacity(m);
    p.push(Complex::new(1.0, 0.0));

    // Kernel values by lag, when the mesh and kernel allow it.
    let lags: Option<Vec<Complex>> = if mesh.uniform && m > 1 {
        let h = t[1] - t[0];
        (0..m).map(|k| kernel.lag(k as f64 * h)).collect()
    } else {
        None
    };

    let mut memory = Complex::default();
    for n in 0..m - 1 {
        let h = t[n + 1] - t[n];
        // Trapezoid over [t_0, t_{n+1}], without the P_{n+1} endpoint.
        let partial = match &lags {
            Some(g) => {
                let h0 = t[1] - t[0];
                let interior: Complex = g[1..=n].iter().rev().zip(&p[1..=n]).map(|(gk, pj)| gk * pj).sum();
                (g[n + 1] * p[0] * 0.5 + interior) * h0
            }
            None => {
                let mut acc = kernel.eval(t[n + 1], t[0]) * p[0] * (0.5 * (t[1] - t[0]));
                for j in 1..=n {
                    let w = 0.5 * (t[j + 1] - t[j - 1]);
                    acc += kernel.eval(t[n + 1], t[j]) * p[j] * w;
                }
                acc
            }
        };
        let diag = match &lags {
            Some(g) => g[0],
            None => kernel.eval(t[n + 1], t[n + 1]),
        } * (0.5 * h);

        let base = p[n] - (memory + partial) * (0.5 * h);
        let mut next = p[n] - memory * h;
        let mut converged = false;
        for _ in 0..MAX_CORRECTOR_ITERATIONS {
            let corrected = base - diag * next * (0.5 * h);
            let change = (corrected - next).norm();
            next = corrected;
            if change <= 1e-15 * next.norm().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !next.is_finite() {
            return Err(Error::ConvergenceFailure { t: t[n + 1], iterations: MAX_CORRECTOR_ITERATIONS });
        }
        memory = partial + diag * next;
        p.push(next);
    }
    Ok(p)
}
