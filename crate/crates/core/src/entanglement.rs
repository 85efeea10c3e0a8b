//! Concurrence of `a|00> + b|11>` under independent amplitude damping,
//! `C = max[0, 2|b||P|^2 (a - |b|(1 - |P|^2))]`, and the qualitative
//! features read off it: sudden death, revival, and fits of the death time.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{InitialState, PhysicalParams, ReducedParams};
use crate::propagator::{Propagator, PropagatorSeries, TimeGrid, CONTRACTIVITY_TOL};

/// `C` at or below this is zero.
pub const EPS_ZERO: f64 = 1e-12;
/// `C` above this is unambiguously alive.
pub const EPS_LIVE: f64 = 1e-4;
/// Minimum width of a zero run, in scaled time, that counts as a death.
pub const W_MIN: f64 = 0.05;
/// Largest allowed change of `C` between neighbouring samples.
pub const MAX_SAMPLE_JUMP: f64 = 0.05;

const BISECTION_TOL: f64 = 1e-8;
/// `a` within this of `|b|` counts as `a = |b|`.
const DEATH_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl ConcurrenceSeries {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdReport {
    pub esd_occurs: bool,
    /// Last exit from positivity, present iff `esd_occurs`.
    pub x_star: Option<f64>,
    /// Maximal runs of samples with `C <= EPS_ZERO`, as sample coordinates.
    pub zero_intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoeReport {
    pub roe_occurs: bool,
    pub revival_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub rms_residual: f64,
}

impl QuadraticFit {
    pub fn eval(&self, z: f64) -> f64 {
        (self.c2 * z + self.c1) * z + self.c0
    }
}

/// The unclamped argument of the `max` in the concurrence.
pub fn concurrence_inner(p_abs: f64, s: &InitialState) -> f64 {
    let b = s.b_mag();
    let p2 = p_abs * p_abs;
    2.0 * b * p2 * (s.a() - b * (1.0 - p2))
}

pub fn concurrence_value(p_abs: f64, s: &InitialState) -> f64 {
    concurrence_inner(p_abs, s).max(0.0)
}

pub fn concurrence(p: &PropagatorSeries, s: &InitialState) -> ConcurrenceSeries {
    ConcurrenceSeries { grid: p.grid, values: p.values.iter().map(|v| concurrence_value(v.norm(), s)).collect() }
}

/// Index ranges `[lo, hi]` of maximal runs with `C <= EPS_ZERO`.
fn zero_runs(values: &[f64]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (k, &c) in values.iter().enumerate() {
        match (c <= EPS_ZERO, start) {
            (true, None) => start = Some(k),
            (false, Some(lo)) => {
                runs.push((lo, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        runs.push((lo, values.len() - 1));
    }
    runs
}

/// Sudden-death analysis over `horizon` with the exact propagator.
pub fn find_esd(p: &PhysicalParams, s: &InitialState, horizon: &TimeGrid) -> Result<EsdReport> {
    p.validate()?;
    if p.tau().is_some() {
        return Err(Error::InvalidParams("sudden-death analysis uses the continuum limit".into()));
    }
    find_esd_reduced(&p.reduce(), s, horizon)
}

/// As [`find_esd`], taking reduced parameters directly.
pub fn find_esd_reduced(r: &ReducedParams, s: &InitialState, horizon: &TimeGrid) -> Result<EsdReport> {
    if horizon.x_start() != 0.0 {
        return Err(Error::InvalidGrid(format!("ESD horizon must start at 0, got {}", horizon.x_start())));
    }
    let prop = Propagator::exact(r);
    let series = prop.sample(horizon);
    series.check_contractive(CONTRACTIVITY_TOL)?;
    let c = concurrence(&series, s);
    let runs = zero_runs(&c.values);
    let zero_intervals = runs.iter().map(|&(lo, hi)| (horizon.x(lo), horizon.x(hi))).collect();
    let last = horizon.len() - 1;

    // For a >= |b| the inner expression is positive whenever P != 0, so
    // zero samples there are underflow of |P|^4, not death.
    if s.b_mag() - s.a() <= DEATH_MARGIN {
        return Ok(EsdReport { esd_occurs: false, x_star: None, zero_intervals });
    }
    match runs.last() {
        Some(&(lo, hi)) if hi == last => {
            let first_zero = horizon.x(runs[0].0);
            if horizon.x_end() < 3.0 * first_zero {
                return Err(Error::HorizonTooShort(format!(
                    "horizon {} is shorter than 3x the first zero crossing {first_zero}",
                    horizon.x_end()
                )));
            }
            // C(0) = 2a|b| > 0, so the final run never starts at 0.
            let inner = |x: f64| concurrence_inner(prop.eval(x).norm(), s) - EPS_ZERO;
            let (mut a, mut b) = (horizon.x(lo - 1), horizon.x(lo));
            while b - a > BISECTION_TOL {
                let m = 0.5 * (a + b);
                if inner(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            Ok(EsdReport { esd_occurs: true, x_star: Some(0.5 * (a + b)), zero_intervals })
        }
        _ => Err(Error::HorizonTooShort(format!(
            "concurrence is still positive at x = {} but must vanish for a < |b|",
            horizon.x_end()
        ))),
    }
}

/// Revival detection: a zero run of width at least [`W_MIN`] with live
/// concurrence on both sides.
pub fn detect_roe(c: &ConcurrenceSeries) -> Result<RoeReport> {
    for (k, w) in c.values.windows(2).enumerate() {
        let jump = (w[1] - w[0]).abs();
        if jump.is_nan() || jump >= MAX_SAMPLE_JUMP {
            return Err(Error::GridTooCoarse { x: c.grid.x(k), jump });
        }
    }
    let h = c.grid.spacing();
    let mut revival_times = Vec::new();
    for (lo, hi) in zero_runs(&c.values) {
        let width = (hi - lo + 1) as f64 * h;
        if width < W_MIN {
            continue;
        }
        let alive_before = c.values[..lo].iter().any(|&v| v > EPS_LIVE);
        let alive_after = c.values[hi + 1..].iter().any(|&v| v > EPS_LIVE);
        if alive_before && alive_after {
            revival_times.push(c.grid.x(hi + 1));
        }
    }
    Ok(RoeReport { roe_occurs: !revival_times.is_empty(), revival_times })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Values are `Delta / gamma0`.
    Detuning,
    /// Values are `beta = v / c`.
    Velocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub result: Result<EsdReport>,
}

impl SweepPoint {
    pub fn x_star(&self) -> Option<f64> {
        self.result.as_ref().ok().and_then(|r| r.x_star)
    }
}

/// Initial sweep horizon; doubled until the death time is captured.
const SWEEP_X_END: f64 = 30.0;
const SWEEP_SPACING: f64 = 0.01;
const SWEEP_MAX_DOUBLINGS: u32 = 8;

/// [`find_esd`] along one parameter axis, points evaluated in parallel and
/// returned in input order.
pub fn sweep_esd(p: &PhysicalParams, s: &InitialState, axis: Axis, values: &[f64]) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| {
            let point = match axis {
                Axis::Detuning => p.with_delta(value * p.gamma0()),
                Axis::Velocity => p.with_beta(value),
            };
            SweepPoint { value, result: point.and_then(|q| esd_auto_horizon(&q, s)) }
        })
        .collect()
}

/// [`find_esd`] starting on `[0, 30]`, doubling the horizon on
/// [`Error::HorizonTooShort`].
pub fn esd_auto_horizon(p: &PhysicalParams, s: &InitialState) -> Result<EsdReport> {
    let mut x_end = SWEEP_X_END;
    let mut attempt = 0;
    loop {
        let n = (x_end / SWEEP_SPACING).round() as usize + 1;
        match find_esd(p, s, &TimeGrid::new(0.0, x_end, n)?) {
            Err(Error::HorizonTooShort(_)) if attempt < SWEEP_MAX_DOUBLINGS => {
                x_end *= 2.0;
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Least-squares fit of `y = c2 z^2 + c1 z + c0`.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    let mut zs: Vec<f64> = points.iter().map(|p| p.0).collect();
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    if zs.len() < 3 {
        return Err(Error::RankDeficient(zs.len()));
    }
    if points.iter().any(|(z, y)| !(z.is_finite() && y.is_finite())) {
        return Err(Error::InvalidParams("fit points must be finite".into()));
    }
    let a = DMatrix::from_fn(points.len(), 3, |i, j| points[i].0.powi(2 - j as i32));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let fit = QuadraticFit { c2: coef[0], c1: coef[1], c0: coef[2], rms_residual: 0.0 };
    let ss: f64 = points.iter().map(|&(z, y)| (fit.eval(z) - y).powi(2)).sum();
    Ok(QuadraticFit { rms_residual: (ss / points.len() as f64).sqrt(), ..fit })
}
