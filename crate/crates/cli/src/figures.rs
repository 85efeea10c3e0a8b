//! Frozen parameter sets for the figure data. Every curve or surface goes to
//! its own CSV so plotting tools need no splitting. All runs use the
//! closed-form propagator with gamma0 = 1.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use decolab_core::entanglement::{self, Axis};
use decolab_core::propagator::p_analytic;
use decolab_core::{InitialState, PhysicalParams, TimeGrid};
use rayon::prelude::*;

use crate::output::{number, Table};
use crate::{describe, CliError};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig6a,
    Fig6b,
}

/// Surfaces sample `a = k / 51` for `k = 1..=50`.
const SURFACE_A_STEPS: usize = 51;

fn params(lambda: f64, omega0: f64, delta: f64, beta: f64) -> Result<PhysicalParams, CliError> {
    Ok(PhysicalParams::new(1.0, lambda, omega0, delta, beta)?)
}

fn grid(x_end: f64, points: usize) -> TimeGrid {
    TimeGrid::new(0.0, x_end, points).expect("frozen grid is valid")
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn save(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.dir.join(format!("{name}.csv"));
        table.write(Some(&path))?;
        self.written.push(path);
        Ok(())
    }

    fn amplitude(&mut self, name: &str, p: &PhysicalParams, g: &TimeGrid) -> Result<(), CliError> {
        let series = p_analytic(g, &p.reduce())?;
        let mut t = Table::new(&["x", "re_p", "im_p", "abs_p"]);
        describe(&mut t, p);
        for (x, v) in series.iter() {
            t.row(&[x, v.re, v.im, v.norm()]);
        }
        self.save(name, &t)
    }

    fn concurrence(&mut self, name: &str, p: &PhysicalParams, s: &InitialState, g: &TimeGrid) -> Result<(), CliError> {
        let c = entanglement::concurrence(&p_analytic(g, &p.reduce())?, s);
        let mut t = Table::new(&["x", "c"]);
        describe(&mut t, p);
        t.meta("a", s.a());
        for (x, v) in c.iter() {
            t.row(&[x, v]);
        }
        self.save(name, &t)
    }

    fn surface(&mut self, name: &str, p: &PhysicalParams, g: &TimeGrid) -> Result<(), CliError> {
        let abs_p: Vec<f64> = p_analytic(g, &p.reduce())?.values.iter().map(|v| v.norm()).collect();
        let rows: Vec<Vec<[f64; 3]>> = (1..SURFACE_A_STEPS)
            .into_par_iter()
            .map(|k| {
                let a = k as f64 / SURFACE_A_STEPS as f64;
                let s = InitialState::new(a, 0.0).expect("a in (0, 1)");
                g.points().zip(&abs_p).map(|(x, &m)| [a, x, entanglement::concurrence_value(m, &s)]).collect()
            })
            .collect();
        let mut t = Table::new(&["a", "x", "c"]);
        describe(&mut t, p);
        for row in rows.iter().flatten() {
            t.row(row);
        }
        self.save(name, &t)
    }

    fn sweep(&mut self, name: &str, p: &PhysicalParams, axis: Axis, values: &[f64]) -> Result<(), CliError> {
        let s = InitialState::new(0.4, 0.0)?;
        let mut pts = Vec::with_capacity(values.len());
        for pt in entanglement::sweep_esd(p, &s, axis, values) {
            let x = pt.result?.x_star.unwrap_or(f64::NAN);
            pts.push((pt.value, x));
        }
        let f = entanglement::fit_quadratic(&pts)?;
        let mut t = Table::new(&["param", "x_star"]);
        describe(&mut t, p);
        t.meta("a", s.a())
            .meta("axis", if axis == Axis::Detuning { "detuning" } else { "velocity" })
            .meta("fit_c2", number(f.c2))
            .meta("fit_c1", number(f.c1))
            .meta("fit_c0", number(f.c0))
            .meta("fit_rms", number(f.rms_residual));
        for (z, x) in pts {
            t.row(&[z, x]);
        }
        self.save(name, &t)
    }

    /// Surface plus its `a = 1/sqrt(2)` slice.
    fn surface_with_slice(&mut self, prefix: &str, p: &PhysicalParams) -> Result<(), CliError> {
        let g = grid(100.0, 1001);
        self.surface(&format!("{prefix}_surface"), p, &g)?;
        self.concurrence(&format!("{prefix}_slice"), p, &InitialState::maximally_entangled(), &g)
    }
}

fn uniform(from: f64, to: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| from + (to - from) * k as f64 / (count - 1) as f64).collect()
}

/// Writes the CSVs for `id` into `dir` and returns their paths.
pub fn emit(id: FigureId, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", dir.display())))?;
    let mut w = Writer { dir, written: Vec::new() };
    match id {
        FigureId::Fig1 => {
            let g = grid(100.0, 10_001);
            for (beta, omega0) in [(0.01, 10.0), (0.2, 0.5)] {
                w.amplitude(&format!("fig1_beta_{beta}_omega0_{omega0}"), &params(1.5, omega0, 100.0, beta)?, &g)?;
            }
        }
        FigureId::Fig2a => {
            let g = grid(10.0, 1001);
            for delta in [0.0, 1.0, 2.0, 5.0, 10.0] {
                w.amplitude(&format!("fig2a_delta_{delta}"), &params(2.0, 0.0, delta, 0.0)?, &g)?;
            }
        }
        FigureId::Fig2b => {
            let g = grid(50.0, 5001);
            for delta in [0.0, 0.05, 0.5] {
                w.amplitude(&format!("fig2b_delta_{delta}"), &params(0.01, 0.0, delta, 0.0)?, &g)?;
            }
        }
        FigureId::Fig3a => {
            let g = grid(300.0, 30_001);
            let s = InitialState::new(0.4, 0.0)?;
            for delta in [0.0, 3.0, 5.0, 8.0, 15.0, 30.0] {
                w.concurrence(&format!("fig3a_delta_{delta}"), &params(2.0, 0.0, delta, 0.0)?, &s, &g)?;
            }
        }
        FigureId::Fig3b => w.sweep("fig3b", &params(2.0, 0.0, 0.0, 0.0)?, Axis::Detuning, &uniform(0.0, 30.0, 21))?,
        FigureId::Fig4a => {
            let g = grid(10.0, 1001);
            let s = InitialState::new(0.4, 0.0)?;
            for beta in [0.0, 0.05, 0.1, 0.15, 0.2, 0.25] {
                w.concurrence(&format!("fig4a_beta_{beta}"), &params(2.0, 20.0, 0.0, beta)?, &s, &g)?;
            }
        }
        FigureId::Fig4b => w.sweep("fig4b", &params(2.0, 20.0, 0.0, 0.0)?, Axis::Velocity, &uniform(0.0, 0.25, 26))?,
        FigureId::Fig5a => w.surface_with_slice("fig5a", &params(0.005, 0.0, 0.0, 0.0)?)?,
        FigureId::Fig5b => w.surface_with_slice("fig5b", &params(0.005, 0.0, 0.05, 0.0)?)?,
        FigureId::Fig5c => w.surface_with_slice("fig5c", &params(0.005, 0.0, 0.5, 0.0)?)?,
        FigureId::Fig6a => {
            w.surface_with_slice("fig6a", &params(0.005, 20.0, 0.0, 0.003)?)?;
            w.surface("fig6a_baseline_beta_0_surface", &params(0.005, 20.0, 0.0, 0.0)?, &grid(100.0, 1001))?;
        }
        FigureId::Fig6b => w.surface_with_slice("fig6b", &params(0.005, 20.0, 0.0, 0.01)?)?,
    }
    Ok(w.written)
}
