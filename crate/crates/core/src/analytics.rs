//! Closed-form fidelity dynamics.
//!
//! All angle arguments refer to coplanar states on the Rabi circle (see
//! [`QubitState::on_rabi_circle`](crate::qubit::QubitState::on_rabi_circle)):
//! `theta` is the actual angle, `theta_e` the estimate's, and the fidelity of
//! the pair is `cos^2((theta - theta_e)/2)`.

use std::f64::consts::TAU;

use crate::error::{finite, unit_interval, Error, Result};
use crate::protocol::FidelityTrace;

/// Denominators below this are treated as vanishing.
pub const DENOMINATOR_EPS: f64 = 1e-15;

/// Tolerance on `f == cos^2(theta_r)` in [`delta_f_mean_angle`].
pub const COORDINATE_TOL: f64 = 1e-12;

/// Sign in front of `delta * sqrt(F(1-F))` in the fidelity rate equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    /// `sign(cos(theta_r) sin(theta_r))`, with zero mapped to `Plus`.
    pub fn of_relative_angle(theta_r: f64) -> Self {
        if theta_r.cos() * theta_r.sin() < 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }
}

/// Polar angles of a coplanar pair together with their mean and relative half-angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleCoords {
    pub theta: f64,
    pub theta_e: f64,
    pub theta_r: f64,
    pub theta_bar: f64,
}

impl AngleCoords {
    pub fn from_polar(theta: f64, theta_e: f64) -> Self {
        Self {
            theta,
            theta_e,
            theta_r: 0.5 * (theta - theta_e),
            theta_bar: 0.5 * (theta + theta_e),
        }
    }

    pub fn from_mean_relative(theta_bar: f64, theta_r: f64) -> Self {
        Self {
            theta: theta_bar + theta_r,
            theta_e: theta_bar - theta_r,
            theta_r,
            theta_bar,
        }
    }

    /// `cos^2(theta_r)`
    pub fn fidelity(&self) -> f64 {
        self.theta_r.cos().powi(2)
    }
}

/// The two numerator contributions of the one-step fidelity change, each
/// already divided by the common denominator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaFTerms {
    /// Gain from the measurement, `dp^2 sin^2(omega_e tau + theta_e) sin^2(theta_r) / D`.
    pub measurement: f64,
    /// Loss from relative evolution, `(1 - dp^2) [cos^2(theta_r) - cos^2(theta_r + delta tau/2)] / D`.
    pub evolution: f64,
}

impl DeltaFTerms {
    pub fn total(&self) -> f64 {
        self.measurement - self.evolution
    }
}

pub fn delta_f_terms(
    theta: f64,
    theta_e: f64,
    omega_e_tau: f64,
    dp: f64,
    delta_tau: f64,
) -> Result<DeltaFTerms> {
    for (name, v) in [
        ("theta", theta),
        ("theta_e", theta_e),
        ("omega_e_tau", omega_e_tau),
        ("delta_tau", delta_tau),
    ] {
        finite(name, v)?;
    }
    unit_interval("dp", dp)?;
    let dp2 = dp * dp;
    let phase = omega_e_tau + theta_e;
    let half = 0.5 * (theta - theta_e);
    let denominator = 1.0 - dp2 * phase.cos().powi(2);
    if denominator <= DENOMINATOR_EPS {
        return Err(Error::DegenerateGeometry { denominator });
    }
    let measurement = dp2 * phase.sin().powi(2) * half.sin().powi(2);
    let evolution = (1.0 - dp2) * (half.cos().powi(2) - (half + 0.5 * delta_tau).cos().powi(2));
    Ok(DeltaFTerms {
        measurement: measurement / denominator,
        evolution: evolution / denominator,
    })
}

/// Average one-step fidelity change for coplanar states with polar angles
/// `theta`, `theta_e`.
pub fn delta_f_closed_form(
    theta: f64,
    theta_e: f64,
    omega_e_tau: f64,
    dp: f64,
    delta_tau: f64,
) -> Result<f64> {
    delta_f_terms(theta, theta_e, omega_e_tau, dp, delta_tau).map(|t| t.total())
}

/// One-step fidelity change written in the fidelity `f`, the mean angle and
/// the relative half-angle.
///
/// `sign` multiplies `sqrt(f(1-f)) sin(delta tau)` and must equal
/// `sign(cos(theta_r) sin(theta_r))` for agreement with
/// [`delta_f_closed_form`]. The corresponding branch of [`ode_rhs`] is the
/// opposite one.
#[allow(clippy::too_many_arguments)]
pub fn delta_f_mean_angle(
    f: f64,
    theta_bar: f64,
    theta_r: f64,
    omega_e_tau: f64,
    dp: f64,
    delta_tau: f64,
    sign: Branch,
) -> Result<f64> {
    for (name, v) in [
        ("f", f),
        ("theta_bar", theta_bar),
        ("theta_r", theta_r),
        ("omega_e_tau", omega_e_tau),
        ("delta_tau", delta_tau),
    ] {
        finite(name, v)?;
    }
    unit_interval("dp", dp)?;
    let expected = theta_r.cos().powi(2);
    if (f - expected).abs() > COORDINATE_TOL || !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidCoordinates {
            fidelity: f,
            expected,
        });
    }
    mean_angle_form(f, theta_bar - theta_r, omega_e_tau, dp, delta_tau, sign)
}

/// The mean-angle expression with `phase_offset = theta_bar - theta_r = theta_e`.
fn mean_angle_form(
    f: f64,
    phase_offset: f64,
    omega_e_tau: f64,
    dp: f64,
    delta_tau: f64,
    sign: Branch,
) -> Result<f64> {
    let dp2 = dp * dp;
    let phase = omega_e_tau + phase_offset;
    let denominator = 1.0 - dp2 * phase.cos().powi(2);
    if denominator <= DENOMINATOR_EPS {
        return Err(Error::DegenerateGeometry { denominator });
    }
    let root = (f * (1.0 - f)).max(0.0).sqrt();
    let gain = dp2 * phase.sin().powi(2) * (1.0 - f);
    let loss =
        (1.0 - dp2) * (sign.sign() * root * delta_tau.sin() + (f - 0.5) * (1.0 - delta_tau.cos()));
    Ok((gain - loss) / denominator)
}

/// Mean-angle form averaged over a uniform mean angle on `[0, 2pi)`, divided
/// by `tau`: the discrete-time counterpart of [`ode_rhs`] for `branch`.
///
/// The average uses the periodic trapezoid rule on `nodes` points, which is
/// spectrally accurate for this smooth periodic integrand.
pub fn mean_angle_averaged_rate(
    f: f64,
    dp: f64,
    tau: f64,
    delta: f64,
    branch: Branch,
    nodes: usize,
) -> Result<f64> {
    unit_interval("f", f)?;
    unit_interval("dp", dp)?;
    finite("delta", delta)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "must be positive",
        });
    }
    if nodes == 0 {
        return Err(Error::InvalidParameter {
            name: "nodes",
            value: 0.0,
            reason: "need at least one quadrature node",
        });
    }
    let eq_sign = branch.opposite();
    let mut sum = 0.0;
    for k in 0..nodes {
        let offset = TAU * k as f64 / nodes as f64;
        sum += mean_angle_form(f, offset, 0.0, dp, delta * tau, eq_sign)?;
    }
    Ok(sum / nodes as f64 / tau)
}

/// `dF/dt = (gamma/2)(1 - F) + sign * delta * sqrt(F(1 - F))`.
pub fn ode_rhs(f: f64, gamma: f64, delta: f64, branch: Branch) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain {
            value: f,
            domain: "fidelity in [0, 1]",
        });
    }
    finite("gamma", gamma)?;
    finite("delta", delta)?;
    Ok(rhs(f, gamma, delta, branch.sign()))
}

fn rhs(f: f64, gamma: f64, delta: f64, sign: f64) -> f64 {
    0.5 * gamma * (1.0 - f) + sign * delta * (f * (1.0 - f)).sqrt()
}

/// `dp^2 / tau`
pub fn gamma_from_discrete(dp: f64, tau: f64) -> Result<f64> {
    unit_interval("dp", dp)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "must be positive",
        });
    }
    Ok(dp * dp / tau)
}

/// `1 - exp(-gamma t / 2)`, the known-frequency solution starting from `F = 0`.
pub fn closed_form_fidelity(t: f64, gamma: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            value: t,
            domain: "time t >= 0",
        });
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must be nonnegative",
        });
    }
    Ok(-(-0.5 * gamma * t).exp_m1())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticFidelities {
    pub f_plus: f64,
    pub f_minus: f64,
    pub f_bar: f64,
}

/// Stationary points of the rate equation and their mean.
pub fn asymptotic_fidelities(gamma: f64, delta: f64) -> Result<AsymptoticFidelities> {
    positive_gamma(gamma)?;
    finite("delta", delta)?;
    let g2 = gamma * gamma;
    let f_minus = g2 / (g2 + 4.0 * delta * delta);
    Ok(AsymptoticFidelities {
        f_plus: 1.0,
        f_minus,
        f_bar: 0.5 * (1.0 + f_minus),
    })
}

fn positive_gamma(gamma: f64) -> Result<f64> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must be positive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeSpec {
    gamma: f64,
    delta: f64,
    branch: Branch,
    f0: f64,
}

impl OdeSpec {
    pub fn new(gamma: f64, delta: f64, branch: Branch, f0: f64) -> Result<Self> {
        positive_gamma(gamma)?;
        finite("delta", delta)?;
        unit_interval("f0", f0)?;
        Ok(Self {
            gamma,
            delta,
            branch,
            f0,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub trace: FidelityTrace,
    /// Number of steps whose raw RK4 update left `[0, 1]` and was clamped.
    pub clamp_events: usize,
}

/// Classical RK4 on a uniform grid of step `t_end / ceil(t_end / h) <= h`.
pub fn integrate_ode(spec: &OdeSpec, t_end: f64, h: f64) -> Result<OdeSolution> {
    check_step(h)?;
    if !(t_end >= h) || !t_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be finite and at least the step size",
        });
    }
    let n = (t_end / h - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / n as f64;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    integrate_ode_at(spec, &times, h)
}

/// RK4 solution sampled at `times` (strictly increasing, starting at 0), with
/// every sampling interval split into equal substeps no longer than `h_max`.
pub fn integrate_ode_at(spec: &OdeSpec, times: &[f64], h_max: f64) -> Result<OdeSolution> {
    check_step(h_max)?;
    match times.first() {
        Some(&0.0) => {}
        _ => {
            return Err(Error::InvalidParameter {
                name: "times",
                value: times.first().copied().unwrap_or(f64::NAN),
                reason: "sample times must start at 0",
            })
        }
    }
    let sign = spec.branch.sign();
    let f = |x: f64| rhs(x.clamp(0.0, 1.0), spec.gamma, spec.delta, sign);
    let mut values = Vec::with_capacity(times.len());
    let mut y = spec.f0;
    let mut clamp_events = 0;
    values.push(y);
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let substeps = (span / h_max - 1e-9).ceil().max(1.0) as usize;
        let dt = span / substeps as f64;
        for _ in 0..substeps {
            if y >= 1.0 {
                break;
            }
            let k1 = f(y);
            let k2 = f(y + 0.5 * dt * k1);
            let k3 = f(y + 0.5 * dt * k2);
            let k4 = f(y + dt * k3);
            let next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !(0.0..=1.0).contains(&next) {
                clamp_events += 1;
            }
            y = next.clamp(0.0, 1.0);
        }
        values.push(y);
    }
    Ok(OdeSolution {
        trace: FidelityTrace::new(times.to_vec(), values)?,
        clamp_events,
    })
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "step size must be positive",
        })
    }
}

/// Both branch solutions of the rate equation and their pointwise mean.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchPredictions {
    pub plus: OdeSolution,
    pub minus: OdeSolution,
    pub average: FidelityTrace,
}

pub fn ode_predictions_at(
    gamma: f64,
    delta: f64,
    f0: f64,
    times: &[f64],
    h_max: f64,
) -> Result<BranchPredictions> {
    let plus = integrate_ode_at(&OdeSpec::new(gamma, delta, Branch::Plus, f0)?, times, h_max)?;
    let minus = integrate_ode_at(
        &OdeSpec::new(gamma, delta, Branch::Minus, f0)?,
        times,
        h_max,
    )?;
    let mean = plus
        .trace
        .fidelities()
        .iter()
        .zip(minus.trace.fidelities())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let average = FidelityTrace::new(times.to_vec(), mean)?;
    Ok(BranchPredictions {
        plus,
        minus,
        average,
    })
}

/// Pointwise mean of the `Plus` and `Minus` branch solutions.
pub fn averaged_ode_prediction(
    gamma: f64,
    delta: f64,
    f0: f64,
    t_end: f64,
    h: f64,
) -> Result<FidelityTrace> {
    let plus = integrate_ode(&OdeSpec::new(gamma, delta, Branch::Plus, f0)?, t_end, h)?;
    let times = plus.trace.times().to_vec();
    Ok(ode_predictions_at(gamma, delta, f0, &times, h)?.average)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    #[test]
    fn closed_form_trivial_cases() {
        assert_eq!(delta_f_closed_form(1.1, 1.1, 0.3, 0.5, 0.0).unwrap(), 0.0);
        for (th, the) in [(0.4, 2.9), (FRAC_PI_2, 0.0), (2.0, 1.0)] {
            let df = delta_f_closed_form(th, the, 0.37, 1.0, 0.02).unwrap();
            let f = (0.5 * (th - the)).cos().powi(2);
            assert!((df - (1.0 - f)).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_degenerate_denominator() {
        let err = delta_f_closed_form(1.0, 0.0, 0.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry { .. }));
        assert!(delta_f_closed_form(1.0, 0.0, 0.0, 1.2, 0.0).is_err());
    }

    #[test]
    fn mean_angle_trivial_cases() {
        assert_eq!(
            delta_f_mean_angle(1.0, 0.7, 0.0, 0.2, 0.3, 0.0, Branch::Plus).unwrap(),
            0.0
        );
        let tr: f64 = 0.6;
        let f = tr.cos().powi(2);
        assert_eq!(
            delta_f_mean_angle(f, 1.3, tr, 0.2, 0.0, 0.0, Branch::Plus).unwrap(),
            0.0
        );
    }

    #[test]
    fn mean_angle_rejects_inconsistent_coordinates() {
        let err = delta_f_mean_angle(0.5, 0.3, 0.1, 0.2, 0.3, 0.0, Branch::Plus).unwrap_err();
        assert!(matches!(err, Error::InvalidCoordinates { .. }));
    }

    #[test]
    fn ode_rhs_fixed_points() {
        for b in [Branch::Plus, Branch::Minus] {
            assert_eq!(ode_rhs(1.0, 0.3, 0.7, b).unwrap(), 0.0);
            assert_eq!(ode_rhs(0.0, 0.3, 0.7, b).unwrap(), 0.15);
        }
        let (g, d) = (0.0255, 0.0051);
        let fm = g * g / (g * g + 4.0 * d * d);
        assert!(ode_rhs(fm, g, d, Branch::Minus).unwrap().abs() < 1e-15);
        assert!(ode_rhs(1.01, g, d, Branch::Plus).is_err());
        assert!(ode_rhs(-0.01, g, d, Branch::Plus).is_err());
    }

    #[test]
    fn gamma_values() {
        let g = gamma_from_discrete(0.04, PI / 50.0).unwrap();
        assert!((g - 0.08 / PI).abs() < 1e-16);
        assert_eq!((g * 1e4).round(), 255.0);
        assert_eq!(gamma_from_discrete(0.0, 0.3).unwrap(), 0.0);
        assert!((gamma_from_discrete(0.08, PI / 50.0).unwrap() - 0.32 / PI).abs() < 1e-16);
        assert!(gamma_from_discrete(0.04, 0.0).is_err());
        assert!(gamma_from_discrete(0.04, -1.0).is_err());
    }

    #[test]
    fn closed_form_fidelity_values() {
        assert_eq!(closed_form_fidelity(0.0, 0.0255).unwrap(), 0.0);
        assert!((1.0 - closed_form_fidelity(100.0 / 0.0255, 0.0255).unwrap()) < 1e-15);
        let t_half = 2.0 * 2f64.ln() / 0.0255;
        assert!((closed_form_fidelity(t_half, 0.0255).unwrap() - 0.5).abs() < 1e-15);
        assert!(closed_form_fidelity(-1.0, 0.0255).is_err());
    }

    #[test]
    fn asymptotics() {
        let a = asymptotic_fidelities(0.0255, 0.0).unwrap();
        assert_eq!((a.f_plus, a.f_minus, a.f_bar), (1.0, 1.0, 1.0));
        let g = 0.08 / PI;
        let a = asymptotic_fidelities(g, g / 5.0).unwrap();
        assert!((a.f_minus - 25.0 / 29.0).abs() < 1e-15);
        assert!((a.f_bar - 27.0 / 29.0).abs() < 1e-15);
        let a = asymptotic_fidelities(g, g / 20.0).unwrap();
        assert!((a.f_minus - 100.0 / 101.0).abs() < 1e-15);
        assert!((a.f_bar - 201.0 / 202.0).abs() < 1e-15);
        assert!(asymptotic_fidelities(0.0, 0.1).is_err());
    }

    #[test]
    fn ode_from_unity_stays_put() {
        for b in [Branch::Plus, Branch::Minus] {
            let spec = OdeSpec::new(0.0255, 0.01, b, 1.0).unwrap();
            let sol = integrate_ode(&spec, 50.0, 0.1).unwrap();
            assert!(sol.trace.fidelities().iter().all(|&f| f == 1.0));
        }
    }

    #[test]
    fn ode_spec_validation() {
        assert!(OdeSpec::new(0.0, 0.0, Branch::Plus, 0.0).is_err());
        assert!(OdeSpec::new(0.1, 0.0, Branch::Plus, 1.5).is_err());
        let s = OdeSpec::new(0.1, 0.0, Branch::Plus, 0.0).unwrap();
        assert!(integrate_ode(&s, 1.0, 0.0).is_err());
        assert!(integrate_ode(&s, 0.5, 1.0).is_err());
        assert!(integrate_ode_at(&s, &[0.5, 1.0], 0.1).is_err());
    }

    #[test]
    fn integrate_ode_grid() {
        let s = OdeSpec::new(0.1, 0.0, Branch::Plus, 0.0).unwrap();
        let sol = integrate_ode(&s, 1.0, 0.3).unwrap();
        assert_eq!(sol.trace.len(), 5);
        assert_eq!(sol.trace.times()[4], 1.0);
        let sol = integrate_ode_at(&s, &[0.0], 0.3).unwrap();
        assert_eq!(sol.trace.fidelities(), &[0.0]);
    }

    #[test]
    fn plus_branch_is_absorbed_at_unity() {
        let g = 0.0255;
        let spec = OdeSpec::new(g, g / 5.0, Branch::Plus, 0.0).unwrap();
        let sol = integrate_ode(&spec, 2000.0, 0.5).unwrap();
        assert_eq!(sol.trace.last().unwrap().1, 1.0);
        let fs = sol.trace.fidelities();
        let first = fs.iter().position(|&f| f == 1.0).unwrap();
        assert!(fs[first..].iter().all(|&f| f == 1.0));
        assert!(fs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn terms_split() {
        let t = delta_f_terms(2.0, 0.5, 0.1, 0.3, 0.05).unwrap();
        let total = delta_f_closed_form(2.0, 0.5, 0.1, 0.3, 0.05).unwrap();
        assert!((t.total() - total).abs() < 1e-16);
        assert!(t.measurement > 0.0);
    }
}
