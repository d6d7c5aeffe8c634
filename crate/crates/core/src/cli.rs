//! Command-line front end: presets, free-form runs and CSV output.
//!
//! Exit codes: 0 success, 2 usage (bad flags or out-of-range values),
//! 3 simulation or analytic failure, 4 I/O failure.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::analytics::{asymptotic_fidelities, closed_form_fidelity, ode_predictions_at};
use crate::ensemble::{asymptotic_mean, run_ensemble, run_ensemble_with_workers, EnsembleSpec};
use crate::error::Error;
use crate::protocol::ProtocolParams;
use crate::qubit::{fidelity, QubitState};

pub const CSV_HEADER: &str =
    "t,mean_fidelity,std_error,ode_plus,ode_minus,ode_avg,closed_form,f_minus";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const PRESET_DP: f64 = 0.04;
pub const PRESET_TAU: f64 = PI / 50.0;
pub const PRESET_TRAJECTORIES: usize = 1000;
pub const FIG1_STEPS: usize = 2000;
/// `ceil(800 / (pi/50))`, a horizon of at least 800 time units.
pub const FIG2_STEPS: usize = 12_733;

/// Asymptotic windows start this many level-resolution times `1/gamma` in.
pub const WINDOW_START_GAMMA_UNITS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Monte Carlo ensemble only.
    Simulate,
    /// Rate-equation solutions only.
    Analytic,
    /// Ensemble and rate-equation solutions side by side.
    Compare,
    /// Known frequency, dp = 0.04, tau = pi/50.
    Fig1,
    /// As fig1 with detuning gamma/20.
    Fig2a,
    /// As fig1 with detuning gamma/5.
    Fig2b,
}

impl Mode {
    fn preset_detuning_over_gamma(self) -> Option<f64> {
        match self {
            Mode::Fig1 => Some(0.0),
            Mode::Fig2a => Some(1.0 / 20.0),
            Mode::Fig2b => Some(1.0 / 5.0),
            _ => None,
        }
    }

    fn has_ensemble(self) -> bool {
        self != Mode::Analytic
    }

    fn has_analytics(self) -> bool {
        self != Mode::Simulate
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qubit-estimation",
    version,
    about = "Estimation fidelity of a monitored Rabi-oscillating qubit",
    after_help = "Preset values (fig1, fig2a, fig2b) apply first; explicit flags override them."
)]
struct Args {
    mode: Mode,
    /// Actual Rabi frequency; sets the time unit.
    #[arg(long)]
    omega: Option<f64>,
    /// Estimated Rabi frequency (default: omega minus the preset detuning).
    #[arg(long = "omega-est")]
    omega_est: Option<f64>,
    /// Measurement strength in [0, 1].
    #[arg(long)]
    dp: Option<f64>,
    /// Measurement period.
    #[arg(long)]
    tau: Option<f64>,
    /// Number of elementary steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum RK4 step (default tau/10).
    #[arg(long = "ode-step")]
    ode_step: Option<f64>,
    /// Worker threads for the ensemble (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: ProtocolParams,
    pub n_trajectories: usize,
    pub n_steps: usize,
    pub master_seed: u64,
    pub output_path: PathBuf,
    pub ode_step: f64,
    pub workers: Option<usize>,
    pub init_actual: QubitState,
    pub init_estimate: QubitState,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses `argv` (including the program name) into a validated configuration.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Args::try_parse_from(argv)?
        .into_config()
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

impl Args {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let preset = self.mode.preset_detuning_over_gamma();
        let omega = self.omega.unwrap_or(1.0);
        let dp = self.dp.unwrap_or(PRESET_DP);
        let tau = self.tau.unwrap_or(PRESET_TAU);
        let omega_e = match (self.omega_est, preset) {
            (Some(w), _) => w,
            (None, Some(ratio)) if ratio != 0.0 => omega - ratio * dp * dp / tau,
            (None, _) => omega,
        };
        let params = ProtocolParams::new(omega, omega_e, dp, tau).map_err(usage)?;
        let default_steps = match self.mode {
            Mode::Fig2a | Mode::Fig2b => FIG2_STEPS,
            _ => FIG1_STEPS,
        };
        let n_trajectories = self.trajectories.unwrap_or(PRESET_TRAJECTORIES);
        if n_trajectories == 0 {
            return Err(usage("--trajectories must be at least 1"));
        }
        let ode_step = self.ode_step.unwrap_or(tau / 10.0);
        if !(ode_step > 0.0) || !ode_step.is_finite() {
            return Err(usage(format!(
                "--ode-step must be positive, got {ode_step}"
            )));
        }
        if self.workers == Some(0) {
            return Err(usage("--workers must be at least 1"));
        }
        Ok(RunConfig {
            mode: self.mode,
            params,
            n_trajectories,
            n_steps: self.steps.unwrap_or(default_steps),
            master_seed: self.seed,
            output_path: self.out,
            ode_step,
            workers: self.workers,
            init_actual: QubitState::zero(),
            init_estimate: QubitState::one(),
        })
    }
}

/// What a run reports on standard output.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub gamma: f64,
    pub delta: f64,
    /// `(start, end, mean, std_error)` of the ensemble plateau, when the
    /// ensemble ran and the horizon reaches past the window start.
    pub window: Option<(f64, f64, f64, f64)>,
    pub f_bar: Option<f64>,
    pub rows: usize,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "gamma={:.6} delta={:.6}", self.gamma, self.delta)?;
        match self.window {
            Some((a, b, m, e)) => write!(
                f,
                " window=[{a:.3},{b:.3}] window_mean={m:.6} window_se={e:.6}"
            )?,
            None => write!(f, " window=n/a")?,
        }
        match self.f_bar {
            Some(v) => write!(f, " predicted_f_bar={v:.6}"),
            None => write!(f, " predicted_f_bar=n/a"),
        }
    }
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn execute(config: &RunConfig) -> Result<RunSummary, CliError> {
    let p = &config.params;
    let gamma = p.gamma();
    let delta = p.delta();
    let times: Vec<f64> = (0..=config.n_steps).map(|k| k as f64 * p.tau()).collect();
    let horizon = *times.last().expect("at least one row");

    let ensemble = if config.mode.has_ensemble() {
        let spec = EnsembleSpec::new(
            *p,
            config.n_trajectories,
            config.n_steps,
            config.master_seed,
            config.init_actual,
            config.init_estimate,
        )
        .map_err(CliError::Validation)?;
        let trace = match config.workers {
            Some(w) => run_ensemble_with_workers(&spec, w),
            None => run_ensemble(&spec),
        }
        .map_err(CliError::Validation)?;
        Some(trace)
    } else {
        None
    };

    let analytic = if config.mode.has_analytics() {
        let f0 =
            fidelity(&config.init_actual, &config.init_estimate).map_err(CliError::Validation)?;
        let pred = ode_predictions_at(gamma, delta, f0, &times, config.ode_step)
            .map_err(CliError::Validation)?;
        let closed: Vec<f64> = times
            .iter()
            .map(|&t| closed_form_fidelity(t, gamma))
            .collect::<Result<_, _>>()
            .map_err(CliError::Validation)?;
        let asym = asymptotic_fidelities(gamma, delta).map_err(CliError::Validation)?;
        Some((pred, closed, asym))
    } else {
        None
    };

    let io_err = |source| CliError::Io {
        path: config.output_path.clone(),
        source,
    };
    let file = File::create(&config.output_path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{CSV_HEADER}").map_err(io_err)?;
    for (k, &t) in times.iter().enumerate() {
        let mut row = format_float(t);
        let mut push = |v: Option<f64>| {
            row.push(',');
            if let Some(v) = v {
                row.push_str(&format_float(v));
            }
        };
        match &ensemble {
            Some(e) => {
                push(Some(e.mean_fidelity()[k]));
                push(Some(e.std_error()[k]));
            }
            None => {
                push(None);
                push(None);
            }
        }
        match &analytic {
            Some((pred, closed, asym)) => {
                push(Some(pred.plus.trace.fidelities()[k]));
                push(Some(pred.minus.trace.fidelities()[k]));
                push(Some(pred.average.fidelities()[k]));
                push(Some(closed[k]));
                push(Some(asym.f_minus));
            }
            None => (0..5).for_each(|_| push(None)),
        }
        row.push('\n');
        w.write_all(row.as_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let window_start = WINDOW_START_GAMMA_UNITS / gamma;
    let window = match &ensemble {
        Some(e) if gamma > 0.0 && window_start <= horizon => {
            let (m, se) =
                asymptotic_mean(e, window_start, horizon).map_err(CliError::Validation)?;
            Some((window_start, horizon, m, se))
        }
        _ => None,
    };
    let f_bar = if gamma > 0.0 {
        asymptotic_fidelities(gamma, delta).ok().map(|a| a.f_bar)
    } else {
        None
    };
    Ok(RunSummary {
        gamma,
        delta,
        window,
        f_bar,
        rows: times.len(),
    })
}

/// Entry point shared by the binary: parses, runs, prints, returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&config) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
