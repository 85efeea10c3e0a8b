mod config;
mod figures;
mod output;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use decolab_core::entanglement::{self, Axis};
use decolab_core::kernel::{ContinuumKernel, FiniteTauKernel};
use decolab_core::oracle::{self, OdeOptions, VolterraOptions};
use decolab_core::propagator;
use decolab_core::{InitialState, PhysicalParams, PropagatorSeries, TimeGrid};

use config::Config;
use output::{number, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit status 2.
    Invalid(String),
    /// The numerics failed; exit status 3.
    Numerical(String),
}

impl From<decolab_core::Error> for CliError {
    fn from(e: decolab_core::Error) -> Self {
        if e.is_validation() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "decolab", version, about = "Entanglement dynamics of moving qubits in leaky cavities")]
struct Cli {
    /// Flat key=value file of run parameters. Flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-atom amplitude P on a grid: x, re_p, im_p, abs_p.
    Propagate(RunArgs),
    /// Concurrence on a grid: x, c.
    Concurrence(RunArgs),
    /// Sudden-death time and zero intervals.
    Esd(EsdArgs),
    /// Revival-of-entanglement classification.
    Roe(RunArgs),
    /// Sudden-death times along one parameter axis: param, x_star.
    Sweep(SweepArgs),
    /// Quadratic fit of sudden-death times.
    Fit(FitArgs),
    /// Write the data behind one figure, one CSV per curve or surface.
    Figure(FigureArgs),
}

/// Rates are in units of gamma0 and times in units of 1/gamma0.
#[derive(Args, Debug, Clone, Default)]
struct PhysArgs {
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    /// Reservoir spectral width.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Atomic transition frequency.
    #[arg(long, allow_negative_numbers = true)]
    omega0: Option<f64>,
    /// Cavity detuning.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Atom speed over the speed of light.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Mirror delay. Omit for the continuum limit.
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct StateArgs {
    /// Amplitude of |00>; |b| = sqrt(1 - a^2). Defaults to 1/sqrt(2).
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Phase of b.
    #[arg(long, allow_negative_numbers = true)]
    phase: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    x_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_end: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Analytic,
    Stationary,
    Slow,
    OdeOracle,
    VolterraContinuum,
    VolterraFiniteTau,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Method as ValueEnum>::from_str(s, false)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    phys: PhysArgs,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct EsdArgs {
    #[command(flatten)]
    phys: PhysArgs,
    #[command(flatten)]
    state: StateArgs,
    /// Fixed horizon. Without it the horizon starts at 30 and doubles as needed.
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AxisArg {
    Detuning,
    Velocity,
}

impl FromStr for AxisArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <AxisArg as ValueEnum>::from_str(s, false)
    }
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[command(flatten)]
    phys: PhysArgs,
    #[command(flatten)]
    state: StateArgs,
    /// Detuning values are Delta / gamma0; velocity values are beta.
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    /// Comma-separated axis values.
    #[arg(long)]
    values: Option<String>,
    /// Uniform axis values from..=to, as an alternative to --values.
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    /// Sweep CSV (param, x_star) to fit. Without it a sweep is run first.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Args, Debug, Clone)]
struct FigureArgs {
    #[arg(value_enum)]
    id: figures::FigureId,
    /// Directory for the CSV files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn physical(cfg: &Config, a: &PhysArgs) -> Result<PhysicalParams, CliError> {
    let g0 = cfg.get_or("gamma0", a.gamma0, 1.0)?;
    let lambda: f64 = cfg.require("lambda", a.lambda)?;
    let omega0 = cfg.get_or("omega0", a.omega0, 0.0)?;
    let delta = cfg.get_or("delta", a.delta, 0.0)?;
    let beta = cfg.get_or("beta", a.beta, 0.0)?;
    let p = PhysicalParams::new(g0, lambda * g0, omega0 * g0, delta * g0, beta)?;
    match cfg.get::<f64>("tau", a.tau)? {
        Some(tau) => Ok(p.with_tau(tau / g0)?),
        None => Ok(p),
    }
}

fn initial_state(cfg: &Config, s: &StateArgs) -> Result<InitialState, CliError> {
    let a = cfg.get_or("a", s.a, FRAC_1_SQRT_2)?;
    let phase = cfg.get_or("phase", s.phase, 0.0)?;
    Ok(InitialState::new(a, phase)?)
}

fn time_grid(cfg: &Config, g: &GridArgs, default_end: f64, spacing: f64) -> Result<TimeGrid, CliError> {
    let start = cfg.get_or("x-start", g.x_start, 0.0)?;
    let end = cfg.get_or("x-end", g.x_end, default_end)?;
    let points = match cfg.get("points", g.points)? {
        Some(n) => n,
        None => ((end - start) / spacing).round().max(1.0) as usize + 1,
    };
    Ok(TimeGrid::new(start, end, points)?)
}

fn explicit_grid(cfg: &Config, g: &GridArgs) -> Result<bool, CliError> {
    Ok(cfg.get::<f64>("x-end", g.x_end)?.is_some() || cfg.get::<usize>("points", g.points)?.is_some())
}

pub fn describe(t: &mut Table, p: &PhysicalParams) {
    let g0 = p.gamma0();
    t.meta("gamma0", g0)
        .meta("lambda", p.lambda() / g0)
        .meta("omega0", p.omega0() / g0)
        .meta("delta", p.delta() / g0)
        .meta("beta", p.beta());
    match p.tau() {
        Some(tau) => t.meta("tau", tau * g0),
        None => t.meta("tau", "inf"),
    };
}

fn describe_state(t: &mut Table, s: &InitialState) {
    t.meta("a", s.a()).meta("phase", s.delta_phase());
}

fn describe_grid(t: &mut Table, g: &TimeGrid) {
    t.meta("x_start", g.x_start()).meta("x_end", g.x_end()).meta("points", g.len());
}

fn needs_continuum(p: &PhysicalParams, method: Method) -> Result<(), CliError> {
    if p.tau().is_some() {
        return Err(CliError::Invalid(format!(
            "method {method} uses the continuum limit; drop tau or use volterra-finite-tau"
        )));
    }
    Ok(())
}

fn compute(method: Method, p: &PhysicalParams, grid: &TimeGrid) -> Result<PropagatorSeries, CliError> {
    let r = p.reduce();
    let (up, um) = r.u_pm();
    let rate = up.norm().max(um.norm());
    let series = match method {
        Method::Analytic => {
            needs_continuum(p, method)?;
            propagator::p_analytic(grid, &r)?
        }
        Method::Stationary => {
            needs_continuum(p, method)?;
            propagator::p_stationary(grid, p)?
        }
        Method::Slow => {
            needs_continuum(p, method)?;
            propagator::p_slow(grid, &r)?
        }
        Method::OdeOracle => {
            needs_continuum(p, method)?;
            let opts = OdeOptions { step: (0.05 / rate).min(1e-3), ..OdeOptions::default() };
            oracle::p_ode_oracle(grid, p, &opts)?
        }
        Method::VolterraContinuum => {
            needs_continuum(p, method)?;
            let opts = VolterraOptions::resolving(rate, grid.x_end());
            oracle::p_volterra_oracle(grid, p.gamma0(), &ContinuumKernel::new(p), &opts)?
        }
        Method::VolterraFiniteTau => {
            let kernel = FiniteTauKernel::new(p)?;
            let opts = VolterraOptions::resolving(rate, grid.x_end());
            oracle::p_volterra_oracle(grid, p.gamma0(), &kernel, &opts)?
        }
    };
    Ok(series)
}

/// Shared setup for commands that evaluate `P` on a grid.
struct Run {
    params: PhysicalParams,
    state: InitialState,
    grid: TimeGrid,
    method: Method,
    series: PropagatorSeries,
}

impl Run {
    fn new(cfg: &Config, args: &RunArgs, default_end: f64, spacing: f64) -> Result<Self, CliError> {
        let params = physical(cfg, &args.phys)?;
        let state = initial_state(cfg, &args.state)?;
        let grid = time_grid(cfg, &args.grid, default_end, spacing)?;
        let method = cfg.get_or("method", args.method, Method::Analytic)?;
        let series = compute(method, &params, &grid)?;
        Ok(Run { params, state, grid, method, series })
    }

    fn table(&self, header: &[&'static str], with_state: bool) -> Table {
        let mut t = Table::new(header);
        describe(&mut t, &self.params);
        if with_state {
            describe_state(&mut t, &self.state);
        }
        describe_grid(&mut t, &self.grid);
        t.meta("method", self.method);
        if self.method == Method::VolterraFiniteTau {
            if let Some(tau) = self.params.tau() {
                t.meta("boundary_affected_below_x", 2.0 * tau * self.params.gamma0());
            }
        }
        t
    }
}

fn propagate(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    let run = Run::new(cfg, args, 30.0, 0.01)?;
    let mut t = run.table(&["x", "re_p", "im_p", "abs_p"], false);
    for (x, v) in run.series.iter() {
        t.row(&[x, v.re, v.im, v.norm()]);
    }
    t.write(args.output.as_deref())
}

fn concurrence(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    let run = Run::new(cfg, args, 30.0, 0.01)?;
    let mut t = run.table(&["x", "c"], true);
    for (x, c) in entanglement::concurrence(&run.series, &run.state).iter() {
        t.row(&[x, c]);
    }
    t.write(args.output.as_deref())
}

fn roe(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    let run = Run::new(cfg, args, 100.0, 0.01)?;
    let report = entanglement::detect_roe(&entanglement::concurrence(&run.series, &run.state))?;
    let times: Vec<String> = report.revival_times.iter().map(|x| number(*x)).collect();
    let text = format!("roe_occurs={}\nrevival_times={}\n", report.roe_occurs, times.join(";"));
    output::emit(args.output.as_deref(), &text)
}

fn esd(cfg: &Config, args: &EsdArgs) -> Result<(), CliError> {
    let params = physical(cfg, &args.phys)?;
    let state = initial_state(cfg, &args.state)?;
    let report = if explicit_grid(cfg, &args.grid)? {
        entanglement::find_esd(&params, &state, &time_grid(cfg, &args.grid, 30.0, 0.01)?)?
    } else {
        entanglement::esd_auto_horizon(&params, &state)?
    };
    let x_star = report.x_star.map(number).unwrap_or_else(|| "none".into());
    let intervals: Vec<String> =
        report.zero_intervals.iter().map(|(lo, hi)| format!("{}:{}", number(*lo), number(*hi))).collect();
    let text = format!(
        "esd_occurs={}\nx_star={x_star}\nzero_intervals={}\n",
        report.esd_occurs,
        intervals.join(";")
    );
    output::emit(args.output.as_deref(), &text)
}

fn axis_values(cfg: &Config, args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    if let Some(list) = cfg.get::<String>("values", args.values.clone())? {
        return list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("bad axis value '{v}'"))))
            .collect();
    }
    let from: f64 = cfg.require("from", args.from)?;
    let to: f64 = cfg.require("to", args.to)?;
    let count: usize = cfg.require("count", args.count)?;
    match count {
        0 => Err(CliError::Invalid("count must be at least 1".into())),
        1 => Ok(vec![from]),
        _ => Ok((0..count).map(|k| from + (to - from) * k as f64 / (count - 1) as f64).collect()),
    }
}

struct SweepRun {
    table: Table,
    /// Successful (param, x_star) pairs.
    pairs: Vec<(f64, f64)>,
    first_error: Option<CliError>,
}

/// Per-point failures are recorded in the table; setup errors abort.
fn run_sweep(cfg: &Config, args: &SweepArgs) -> Result<SweepRun, CliError> {
    let params = physical(cfg, &args.phys)?;
    let state = initial_state(cfg, &args.state)?;
    let axis = match cfg.require::<AxisArg>("axis", args.axis)? {
        AxisArg::Detuning => Axis::Detuning,
        AxisArg::Velocity => Axis::Velocity,
    };
    let values = axis_values(cfg, args)?;
    let points = entanglement::sweep_esd(&params, &state, axis, &values);

    let mut t = Table::new(&["param", "x_star"]);
    describe(&mut t, &params);
    describe_state(&mut t, &state);
    t.meta("axis", if axis == Axis::Detuning { "detuning" } else { "velocity" });
    let mut pairs = Vec::new();
    let mut first_error = None;
    for pt in &points {
        match &pt.result {
            Ok(r) => {
                let x = r.x_star.unwrap_or(f64::NAN);
                t.row(&[pt.value, x]);
                pairs.push((pt.value, x));
            }
            Err(e) => {
                t.comment(format!("param={} failed: {e}", number(pt.value)));
                t.row(&[pt.value, f64::NAN]);
                first_error.get_or_insert_with(|| CliError::from(e.clone()));
            }
        }
    }
    Ok(SweepRun { table: t, pairs, first_error })
}

fn sweep(cfg: &Config, args: &SweepArgs) -> Result<(), CliError> {
    let run = run_sweep(cfg, args)?;
    run.table.write(args.output.as_deref())?;
    run.first_error.map_or(Ok(()), Err)
}

fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).skip(1) {
        let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
        match (cols.next(), cols.next()) {
            (Some(Ok(z)), Some(Ok(y))) if y.is_finite() => pairs.push((z, y)),
            (Some(Ok(_)), Some(Ok(_))) => {}
            _ => return Err(CliError::Invalid(format!("{}: malformed row '{line}'", path.display()))),
        }
    }
    Ok(pairs)
}

fn fit(cfg: &Config, args: &FitArgs) -> Result<(), CliError> {
    let pairs = match &args.input {
        Some(path) => read_pairs(path)?,
        None => {
            let run = run_sweep(cfg, &args.sweep)?;
            if let Some(e) = run.first_error {
                return Err(e);
            }
            run.pairs.into_iter().filter(|(_, y)| y.is_finite()).collect()
        }
    };
    let f = entanglement::fit_quadratic(&pairs)?;
    let text = format!(
        "c2={}\nc1={}\nc0={}\nrms_residual={}\npoints={}\n",
        number(f.c2),
        number(f.c1),
        number(f.c0),
        number(f.rms_residual),
        pairs.len()
    );
    output::emit(args.sweep.output.as_deref(), &text)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DECOLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("DECOLAB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Propagate(a) => propagate(&cfg, a),
        Command::Concurrence(a) => concurrence(&cfg, a),
        Command::Esd(a) => esd(&cfg, a),
        Command::Roe(a) => roe(&cfg, a),
        Command::Sweep(a) => sweep(&cfg, a),
        Command::Fit(a) => fit(&cfg, a),
        Command::Figure(a) => {
            for path in figures::emit(a.id, &a.out_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("decolab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
