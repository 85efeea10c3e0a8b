//! Entanglement dynamics of two qubits carried by moving atoms through
//! independent leaky cavities.
//!
//! The single-atom amplitude `P` obeys
//! `dP/dt = -int_0^t f(t, s) P(s) ds` with a Lorentzian reservoir. For a pair
//! prepared in `a|00> + b|11>` the concurrence depends only on `|P|`, so the
//! whole pipeline is: parameters, the characteristic cubic, `P` by residue
//! inversion, then concurrence, sudden-death times and revival detection.
//!
//! [`oracle`] holds two independent solvers used to cross-check the residue
//! formula and to handle a finite mirror delay.

pub mod cubic;
pub mod entanglement;
pub mod error;
pub mod kernel;
pub mod oracle;
pub mod params;
pub mod propagator;

pub type Complex = num_complex::Complex64;

pub use error::{Error, Result};
pub use params::{InitialState, PhysicalParams, ReducedParams, Regime};
pub use propagator::{Propagator, PropagatorSeries, TimeGrid};
