//! Roots of the characteristic cubic of the propagator's Laplace transform,
//!
//! ```text
//! q^3 + 2(x1 - i x3) q^2 + (u+ u- + x1/4) q + x1 (x1 - i x3)/4 = 0,
//! ```
//!
//! solved exactly (Cardano plus Newton polishing) and to second order in the
//! velocity ratio.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::ReducedParams;
use crate::Complex;

const NEWTON_STEPS: usize = 3;
const DEGENERATE_REL: f64 = 1e-8;

/// Monic cubic `q^3 + c2 q^2 + c1 q + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub c2: Complex,
    pub c1: Complex,
    pub c0: Complex,
}

impl CubicCoefficients {
    pub fn new(c2: Complex, c1: Complex, c0: Complex) -> Self {
        CubicCoefficients { c2, c1, c0 }
    }

    pub fn eval(&self, q: Complex) -> Complex {
        ((q + self.c2) * q + self.c1) * q + self.c0
    }

    pub fn derivative(&self, q: Complex) -> Complex {
        (q * 3.0 + self.c2 * 2.0) * q + self.c1
    }

    /// `max(1, |c0|, |c1|, |c2|)`, the scale residuals are measured against.
    pub fn scale(&self) -> f64 {
        1f64.max(self.c0.norm()).max(self.c1.norm()).max(self.c2.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.c2, self.c1, self.c0].iter().all(|c| c.is_finite())
    }
}

/// Three roots (with multiplicity) of a monic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    roots: [Complex; 3],
    residual: f64,
    degenerate: bool,
}

impl CubicRoots {
    fn certify(mut roots: [Complex; 3], coeffs: &CubicCoefficients) -> Self {
        roots.sort_by(root_order);
        let residual = roots.iter().map(|&q| coeffs.eval(q).norm()).fold(0.0, f64::max);
        let degenerate = is_degenerate(&roots);
        CubicRoots { roots, residual, degenerate }
    }

    pub fn roots(&self) -> [Complex; 3] {
        self.roots
    }

    /// `max_j |poly(q_j)|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Set when two roots coincide to within `1e-8` of the largest root.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

fn root_order(a: &Complex, b: &Complex) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

fn is_degenerate(roots: &[Complex; 3]) -> bool {
    let max_mag = roots.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let min_gap = (roots[0] - roots[1])
        .norm()
        .min((roots[0] - roots[2]).norm())
        .min((roots[1] - roots[2]).norm());
    min_gap <= DEGENERATE_REL * max_mag
}

pub fn cubic_coefficients(r: &ReducedParams) -> CubicCoefficients {
    let u = r.u();
    let (up, um) = r.u_pm();
    let x1 = r.x1();
    CubicCoefficients {
        c2: u * 2.0,
        c1: up * um + x1 / 4.0,
        c0: u * (x1 / 4.0),
    }
}

/// Same cubic in the shifted variable `z = q + u`:
/// `z^3 - u z^2 + (x1/4 - beta^2 w^2) z + u beta^2 w^2`.
///
/// Roots that sit next to `-u±` become small in `z` and keep their relative
/// accuracy, which the residue sum needs.
pub fn shifted_coefficients(r: &ReducedParams) -> CubicCoefficients {
    let u = r.u();
    let bw = r.w() * r.beta();
    let bw2 = bw * bw;
    CubicCoefficients {
        c2: -u,
        c1: Complex::new(r.x1() / 4.0, 0.0) - bw2,
        c0: u * bw2,
    }
}

/// Cardano's formula with cancellation-free branch choice, followed by
/// guarded Newton polishing.
pub fn solve_cubic(c: &CubicCoefficients) -> CubicRoots {
    let mut roots = cardano(c);
    polish(&mut roots, c);
    CubicRoots::certify(roots, c)
}

fn cardano(c: &CubicCoefficients) -> [Complex; 3] {
    let shift = c.c2 / 3.0;
    // Depressed cubic y^3 + p y + r with z = y - c2/3.
    let p = c.c1 - c.c2 * shift;
    let r = shift * shift * shift * 2.0 - shift * c.c1 + c.c0;

    let half_r = r * 0.5;
    let third_p = p / 3.0;
    let mut sqrt_disc = (half_r * half_r + third_p * third_p * third_p).sqrt();
    // Pick the sign that avoids cancellation in -r/2 ± sqrt(disc).
    if (-half_r * sqrt_disc.conj()).re < 0.0 {
        sqrt_disc = -sqrt_disc;
    }
    let s_cubed = -half_r + sqrt_disc;
    if s_cubed.norm() == 0.0 {
        return [-shift; 3];
    }
    let s = s_cubed.cbrt();
    let omega = Complex::from_polar(1.0, 2.0 * PI / 3.0);
    let mut out = [Complex::new(0.0, 0.0); 3];
    let mut rot = Complex::new(1.0, 0.0);
    for root in out.iter_mut() {
        let sk = s * rot;
        *root = sk - third_p / sk - shift;
        rot *= omega;
    }
    out
}

fn polish(roots: &mut [Complex; 3], c: &CubicCoefficients) {
    for _ in 0..NEWTON_STEPS {
        for j in 0..3 {
            let q = roots[j];
            let f = c.eval(q);
            let df = c.derivative(q);
            if f.norm() == 0.0 || df.norm() == 0.0 {
                continue;
            }
            let step = f / df;
            let nearest = (0..3)
                .filter(|&k| k != j)
                .map(|k| (roots[k] - q).norm())
                .fold(f64::INFINITY, f64::min);
            // Never let a root wander onto a neighbour's basin.
            if step.norm() >= 0.5 * nearest {
                continue;
            }
            let candidate = q - step;
            if candidate.is_finite() && c.eval(candidate).norm() < f.norm() {
                roots[j] = candidate;
            }
        }
    }
}

/// Exact roots of the characteristic cubic together with their shifted
/// counterparts `z_j = q_j + u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRoots {
    u: Complex,
    shifted: [Complex; 3],
    roots: CubicRoots,
}

impl CharacteristicRoots {
    fn from_shifted(mut shifted: [Complex; 3], r: &ReducedParams, refine: bool) -> Self {
        let u = r.u();
        shifted.sort_by(|a, b| root_order(&(a - u), &(b - u)));
        let mut q = shifted.map(|z| z - u);
        let coeffs = cubic_coefficients(r);
        // q = z - u cancels when |q| << |u|. Such roots are well conditioned
        // in q, unlike the pair that can cluster near -u.
        if refine {
            let mut polished = q;
            polish(&mut polished, &coeffs);
            for j in 0..3 {
                if q[j].norm() < 0.1 * u.norm() {
                    q[j] = polished[j];
                }
            }
        }
        let residual = q.iter().map(|&qj| coeffs.eval(qj).norm()).fold(0.0, f64::max);
        let roots = CubicRoots { roots: q, residual, degenerate: is_degenerate(&q) };
        CharacteristicRoots { u, shifted, roots }
    }

    pub fn u(&self) -> Complex {
        self.u
    }

    pub fn shifted(&self) -> [Complex; 3] {
        self.shifted
    }

    pub fn roots(&self) -> &CubicRoots {
        &self.roots
    }
}

/// Exact roots of the characteristic cubic for `r`.
pub fn characteristic_roots(r: &ReducedParams) -> CharacteristicRoots {
    let sc = shifted_coefficients(r);
    let mut z = cardano(&sc);
    polish(&mut z, &sc);
    CharacteristicRoots::from_shifted(z, r, true)
}

/// Stationary (`beta = 0`) roots `-u`, `-(u - s)/2`, `-(u + s)/2` with
/// `s = sqrt(u^2 - x1)` on the principal branch.
pub fn stationary_roots(u: Complex, x1: f64) -> [Complex; 3] {
    let s = (u * u - x1).sqrt();
    [-u, -(u - s) * 0.5, -(u + s) * 0.5]
}

/// Roots to second order in `beta`, valid for slow atoms (`beta <~ 0.05`).
pub fn roots_slow(r: &ReducedParams) -> Result<CharacteristicRoots> {
    let u = r.u();
    let x1 = r.x1();
    let s2 = u * u - x1;
    if s2.norm() < 1e-10 {
        return Err(Error::DegenerateExpansion(s2.norm()));
    }
    let s = s2.sqrt();
    let w = r.w();
    let w2 = w * w;
    let b2 = r.beta() * r.beta();

    let dq1 = -u * w2 * 4.0 / x1;
    let dq2 = -w2 * (u - s) * (u - s) / (s * x1);
    let dq3 = w2 * (u + s) * (u + s) / (s * x1);

    // Shifted by u: z1 = 0, z2 = (u + s)/2, z3 = (u - s)/2 at zeroth order.
    let shifted = [dq1 * b2, (u + s) * 0.5 + dq2 * b2, (u - s) * 0.5 + dq3 * b2];
    Ok(CharacteristicRoots::from_shifted(shifted, r, false))
}
