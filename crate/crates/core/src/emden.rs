//! The Emden equation `a''(s) = xi / (mu * a(s)^kappa)` for the scale factor
//! of the self-similar solutions.
//!
//! [`integrate`] produces a dense-output trajectory and stops at touchdown
//! (`a -> 0+`), at the horizon `s_max`, or when the state escapes to
//! infinity. [`classify`] predicts the fate from the parameters alone and
//! [`touchdown_time_quadrature`] computes the touchdown time independently
//! of the integrator through the conserved energy
//!
//! ```text
//! E = a'^2 / 2 - xi * Phi(a) / mu,   Phi(a) = a^(1-kappa) / (1-kappa)  (kappa != 1)
//!                                     Phi(a) = ln a                    (kappa == 1)
//! ```

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::write_csv;
use crate::ode::{dopri5_attempt, dopri5_factor, DenseStep};
use crate::quad;

/// Touchdown is declared once `a` falls to this fraction of `a0`.
pub const TOUCHDOWN_FRACTION: f64 = 1e-8;
/// Relative precision of the bisected touchdown time.
pub const TOUCHDOWN_TIME_RTOL: f64 = 1e-10;
/// Magnitude treated as escape to infinity.
pub const ESCAPE_LIMIT: f64 = 1e100;
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmdenError {
    #[error("initial value a0 must be positive, got {0}")]
    NonPositiveA0(f64),
    #[error("mu must be 1 or 4, got {0}")]
    InvalidMu(f64),
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("horizon s_max must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("tolerance must lie in (0, 1e-3], got {0}")]
    BadTolerance(f64),
    #[error("step size collapsed at s = {s} (a = {a})")]
    StepCollapse { s: f64, a: f64 },
    #[error("classification is only available for 0 < kappa <= 1, got {0}")]
    UnsupportedKappa(f64),
    #[error("the energy level does not allow a to reach zero")]
    NoTouchdown,
    #[error("s = {s} lies outside the trajectory [0, {end}]")]
    OutsideTrajectory { s: f64, end: f64 },
}

/// Inputs of one Emden initial-value problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmdenProblem {
    pub xi: f64,
    pub kappa: f64,
    pub mu: f64,
    pub a0: f64,
    pub a1: f64,
    pub s_max: f64,
}

impl EmdenProblem {
    /// Problem with the `mu = 4` normalization used by the self-similar
    /// construction.
    pub fn new(xi: f64, kappa: f64, a0: f64, a1: f64, s_max: f64) -> Self {
        Self { xi, kappa, mu: 4.0, a0, a1, s_max }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<(), EmdenError> {
        for (name, value) in [
            ("xi", self.xi),
            ("kappa", self.kappa),
            ("mu", self.mu),
            ("a0", self.a0),
            ("a1", self.a1),
            ("s_max", self.s_max),
        ] {
            if !value.is_finite() {
                return Err(EmdenError::NonFinite { name, value });
            }
        }
        if self.a0 <= 0.0 {
            return Err(EmdenError::NonPositiveA0(self.a0));
        }
        if self.mu != 1.0 && self.mu != 4.0 {
            return Err(EmdenError::InvalidMu(self.mu));
        }
        if self.s_max <= 0.0 {
            return Err(EmdenError::NonPositiveHorizon(self.s_max));
        }
        Ok(())
    }

    /// `a''` as a function of `a`; NaN for `a <= 0`.
    pub fn acceleration(&self, a: f64) -> f64 {
        if a > 0.0 {
            self.xi / (self.mu * a.powf(self.kappa))
        } else {
            f64::NAN
        }
    }

    /// Antiderivative `Phi` of `a^(-kappa)`.
    pub fn potential(&self, a: f64) -> f64 {
        if self.kappa == 1.0 {
            a.ln()
        } else {
            a.powf(1.0 - self.kappa) / (1.0 - self.kappa)
        }
    }

    pub fn energy(&self, a: f64, a_dot: f64) -> f64 {
        0.5 * a_dot * a_dot - self.xi * self.potential(a) / self.mu
    }

    /// `Phi(top) - Phi(top - w^2)`, free of cancellation for small `w`.
    fn potential_drop(&self, top: f64, w: f64) -> f64 {
        let r = -(w * w) / top;
        if self.kappa == 1.0 {
            -r.ln_1p()
        } else {
            let p = 1.0 - self.kappa;
            -top.powf(p) * (p * r.ln_1p()).exp_m1() / p
        }
    }
}

/// One accepted point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub s: f64,
    pub a: f64,
    pub a_dot: f64,
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    /// `a` reached the touchdown level at scaled time `s`.
    TouchdownAt(f64),
    /// The horizon `s_max` was reached with `a > 0`.
    GlobalOnHorizon,
    /// `a` or `a'` escaped to infinity at scaled time `s`.
    SlopeBlowup(f64),
}

impl Fate {
    pub fn name(&self) -> &'static str {
        match self {
            Fate::TouchdownAt(_) => "TouchdownAt",
            Fate::GlobalOnHorizon => "GlobalOnHorizon",
            Fate::SlopeBlowup(_) => "SlopeBlowup",
        }
    }

    /// Singular time, if any.
    pub fn time(&self) -> Option<f64> {
        match *self {
            Fate::TouchdownAt(s) | Fate::SlopeBlowup(s) => Some(s),
            Fate::GlobalOnHorizon => None,
        }
    }
}

/// JSON summary of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmdenSummary {
    pub fate: String,
    #[serde(rename = "S")]
    pub s: Option<f64>,
    pub energy_drift_max: f64,
}

/// Dense-output solution of an [`EmdenProblem`].
#[derive(Debug, Clone)]
pub struct EmdenTrajectory {
    problem: EmdenProblem,
    samples: Vec<Sample>,
    steps: Vec<DenseStep<2>>,
    fate: Fate,
    energy0: f64,
    energy_drift_max: f64,
}

impl EmdenTrajectory {
    pub fn problem(&self) -> &EmdenProblem {
        &self.problem
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn fate(&self) -> Fate {
        self.fate
    }

    pub fn energy0(&self) -> f64 {
        self.energy0
    }

    /// Largest `|E(s) - E(0)| / max(1, |E(0)|)` over accepted steps.
    pub fn energy_drift_max(&self) -> f64 {
        self.energy_drift_max
    }

    /// Last scaled time covered by the trajectory.
    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |p| p.s)
    }

    /// `(a, a')` at scaled time `s` from the dense output.
    pub fn state_at(&self, s: f64) -> Result<(f64, f64), EmdenError> {
        let end = self.end();
        if !(0.0..=end).contains(&s) {
            return Err(EmdenError::OutsideTrajectory { s, end });
        }
        if self.steps.is_empty() {
            let p = self.samples[0];
            return Ok((p.a, p.a_dot));
        }
        let idx = self.steps.partition_point(|st| st.t1() < s).min(self.steps.len() - 1);
        let [a, a_dot] = self.steps[idx].eval(s);
        Ok((a, a_dot))
    }

    pub fn summary(&self) -> EmdenSummary {
        EmdenSummary { fate: self.fate.name().to_owned(), s: self.fate.time(), energy_drift_max: self.energy_drift_max }
    }

    /// CSV with header `s,a,a_dot`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write_csv(w, &["s", "a", "a_dot"], self.samples.iter().map(|p| [p.s, p.a, p.a_dot]))
    }
}

/// Integrates the problem with an adaptive Dormand–Prince 5(4) scheme.
///
/// `tol` bounds the scaled local error of every accepted step. When `a`
/// drops below `TOUCHDOWN_FRACTION * a0` the crossing is bisected on the
/// dense output and the trajectory ends there with
/// [`Fate::TouchdownAt`].
pub fn integrate(problem: &EmdenProblem, tol: f64) -> Result<EmdenTrajectory, EmdenError> {
    problem.validate()?;
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(EmdenError::BadTolerance(tol));
    }
    let rhs = |_s: f64, y: &[f64; 2]| [y[1], problem.acceleration(y[0])];
    let threshold = TOUCHDOWN_FRACTION * problem.a0;
    let energy0 = problem.energy(problem.a0, problem.a1);
    let energy_scale = energy0.abs().max(1.0);

    let mut s = 0.0;
    let mut y = [problem.a0, problem.a1];
    let mut f = rhs(s, &y);
    let mut h = (1e-6 * problem.s_max).min(1e-3);
    let mut samples = vec![Sample { s, a: y[0], a_dot: y[1] }];
    let mut steps = Vec::new();
    let mut drift_max: f64 = 0.0;

    for _ in 0..MAX_STEPS {
        let remaining = problem.s_max - s;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let att = dopri5_attempt(&rhs, s, &y, &f, h, tol, tol);
        if att.error > 1.0 {
            h *= dopri5_factor(att.error);
            if h <= 16.0 * f64::EPSILON * s.abs().max(1.0) {
                return Err(EmdenError::StepCollapse { s, a: y[0] });
            }
            continue;
        }

        if att.y_new[0] <= threshold {
            let dense = att.dense;
            let (mut lo, mut hi) = (s, s + h);
            while hi - lo > TOUCHDOWN_TIME_RTOL * hi {
                let mid = 0.5 * (lo + hi);
                if dense.eval(mid)[0] > threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let [a, a_dot] = dense.eval(lo);
            drift_max = drift_max.max((problem.energy(a, a_dot) - energy0).abs() / energy_scale);
            samples.push(Sample { s: lo, a, a_dot });
            steps.push(dense);
            return Ok(EmdenTrajectory {
                problem: *problem,
                samples,
                steps,
                fate: Fate::TouchdownAt(lo),
                energy0,
                energy_drift_max: drift_max,
            });
        }

        s = if last { problem.s_max } else { s + h };
        y = att.y_new;
        f = att.f_new;
        steps.push(att.dense);
        samples.push(Sample { s, a: y[0], a_dot: y[1] });
        drift_max = drift_max.max((problem.energy(y[0], y[1]) - energy0).abs() / energy_scale);

        if y[0].abs() > ESCAPE_LIMIT || y[1].abs() > ESCAPE_LIMIT {
            return Ok(EmdenTrajectory {
                problem: *problem,
                samples,
                steps,
                fate: Fate::SlopeBlowup(s),
                energy0,
                energy_drift_max: drift_max,
            });
        }
        if last {
            return Ok(EmdenTrajectory {
                problem: *problem,
                samples,
                steps,
                fate: Fate::GlobalOnHorizon,
                energy0,
                energy_drift_max: drift_max,
            });
        }
        h *= dopri5_factor(att.error);
    }
    Err(EmdenError::StepCollapse { s, a: y[0] })
}

/// Qualitative fate of the scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    BlowupFiniteTime,
    GlobalGrowing,
    Linear,
}

/// Predicts the fate of `a` for `0 < kappa <= 1` without integrating.
///
/// Attraction (`xi < 0`) always drives `a` to zero in finite time. Repulsion
/// (`xi > 0`) keeps `a` positive and growing unless `kappa < 1` and the
/// initial inward speed exceeds the finite barrier height
/// `2 xi a0^(1-kappa) / (mu (1-kappa))`, in which case `a` still reaches zero.
pub fn classify(problem: &EmdenProblem) -> Result<Classification, EmdenError> {
    problem.validate()?;
    let k = problem.kappa;
    if !(k > 0.0 && k <= 1.0) {
        return Err(EmdenError::UnsupportedKappa(k));
    }
    Ok(if problem.xi == 0.0 {
        Classification::Linear
    } else if problem.xi < 0.0 || (k < 1.0 && problem.a1 < 0.0 && problem.a1 * problem.a1 >= barrier(problem)) {
        Classification::BlowupFiniteTime
    } else {
        Classification::GlobalGrowing
    })
}

/// `2 xi (Phi(a0) - Phi(0)) / mu` for `kappa < 1`.
fn barrier(problem: &EmdenProblem) -> f64 {
    2.0 * problem.xi * problem.potential(problem.a0) / problem.mu
}

/// Touchdown time from the energy integral `S = ∫ da / |a'(a)|`.
///
/// Each piece is integrated after the substitution `a = top - w^2`, which
/// removes the inverse-square-root singularity at a turning point. When
/// `a1 > 0` under attraction the rising and falling branches are integrated
/// separately and split at the turning point.
pub fn touchdown_time_quadrature(problem: &EmdenProblem) -> Result<f64, EmdenError> {
    problem.validate()?;
    let p = *problem;
    let coupling = 2.0 * p.xi / p.mu;
    // a'^2 at a = top - w^2, given a'^2 = speed_sq at top
    let speed_sq = |top: f64, top_speed_sq: f64, w: f64| top_speed_sq - coupling * p.potential_drop(top, w);
    let branch = |lo: f64, top: f64, top_speed_sq: f64| {
        let integrand = |w: f64| 2.0 * w / speed_sq(top, top_speed_sq, w).max(0.0).sqrt();
        quad::integrate(integrand, 0.0, (top - lo).sqrt(), 1e-14, 1e-13).value
    };

    if p.xi == 0.0 {
        return if p.a1 < 0.0 { Ok(p.a0 / -p.a1) } else { Err(EmdenError::NoTouchdown) };
    }
    if p.xi > 0.0 {
        // repulsive: reachable only through a finite barrier with inward speed
        if p.kappa < 1.0 && p.a1 < 0.0 && p.a1 * p.a1 >= barrier(&p) {
            return Ok(branch(0.0, p.a0, p.a1 * p.a1));
        }
        return Err(EmdenError::NoTouchdown);
    }
    if p.a1 <= 0.0 {
        return Ok(branch(0.0, p.a0, p.a1 * p.a1));
    }
    // rise to the turning point, then fall
    let level = p.potential(p.a0) + p.mu * p.a1 * p.a1 / (2.0 * -p.xi);
    let a_turn = if p.kappa == 1.0 {
        level.exp()
    } else {
        let base = (1.0 - p.kappa) * level;
        if base <= 0.0 {
            // kappa > 1 with enough energy to escape to infinity
            return Err(EmdenError::NoTouchdown);
        }
        base.powf(1.0 / (1.0 - p.kappa))
    };
    Ok(branch(p.a0, a_turn, 0.0) + branch(0.0, a_turn, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_forcing_is_linear_motion() {
        let p = EmdenProblem::new(0.0, 0.5, 1.0, 2.0, 1.0);
        let traj = integrate(&p, 1e-10).unwrap();
        assert_eq!(traj.fate(), Fate::GlobalOnHorizon);
        let last = traj.samples().last().unwrap();
        assert_eq!(last.s, 1.0);
        assert!((last.a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_touchdown_time() {
        let p = EmdenProblem::new(-1.0, 0.5, 1.0, 0.0, 10.0);
        let traj = integrate(&p, 1e-12).unwrap();
        match traj.fate() {
            Fate::TouchdownAt(s) => assert!((s - 8.0 / 3.0).abs() < 1e-6, "S = {s}"),
            other => panic!("unexpected fate {other:?}"),
        }
        assert!(traj.samples().iter().all(|p| p.a > 0.0));
        let q = touchdown_time_quadrature(&p).unwrap();
        assert!((q - 8.0 / 3.0).abs() < 1e-8, "quadrature {q}");
    }

    #[test]
    fn stronger_pull_touches_down_sooner() {
        let p4 = EmdenProblem::new(-1.0, 0.5, 1.0, 0.0, 10.0);
        let p1 = p4.with_mu(1.0);
        let s4 = touchdown_time_quadrature(&p4).unwrap();
        let s1 = touchdown_time_quadrature(&p1).unwrap();
        assert!(s1 < s4);
        // a''= -1/sqrt(a) => S scales by sqrt(mu)
        assert!((s4 / s1 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn repulsion_has_no_touchdown() {
        let p = EmdenProblem::new(1.0, 0.5, 1.0, 0.0, 10.0);
        assert_eq!(touchdown_time_quadrature(&p), Err(EmdenError::NoTouchdown));
        assert_eq!(classify(&p), Ok(Classification::GlobalGrowing));
    }

    #[test]
    fn rising_then_falling_branch() {
        let p = EmdenProblem::new(-1.0, 0.5, 1.0, 0.7, 20.0);
        let q = touchdown_time_quadrature(&p).unwrap();
        let traj = integrate(&p, 1e-12).unwrap();
        let s = traj.fate().time().unwrap();
        assert!(((s - q) / q).abs() < 1e-8, "{s} vs {q}");
    }

    #[test]
    fn validation_errors() {
        let p = EmdenProblem::new(-1.0, 0.5, -1.0, 0.0, 1.0);
        assert_eq!(integrate(&p, 1e-8).unwrap_err(), EmdenError::NonPositiveA0(-1.0));
        let p = EmdenProblem::new(-1.0, 0.5, 1.0, 0.0, 1.0).with_mu(2.0);
        assert_eq!(p.validate(), Err(EmdenError::InvalidMu(2.0)));
        let p = EmdenProblem::new(-1.0, 0.5, 1.0, 0.0, 1.0);
        assert_eq!(integrate(&p, 1e-2).unwrap_err(), EmdenError::BadTolerance(1e-2));
        assert_eq!(classify(&EmdenProblem::new(1.0, 1.5, 1.0, 0.0, 1.0)), Err(EmdenError::UnsupportedKappa(1.5)));
        assert_eq!(classify(&EmdenProblem::new(1.0, 0.0, 1.0, 0.0, 1.0)), Err(EmdenError::UnsupportedKappa(0.0)));
    }

    #[test]
    fn classification_cases() {
        let c = |xi, a1| classify(&EmdenProblem::new(xi, 0.5, 1.0, a1, 1.0)).unwrap();
        assert_eq!(c(-1.0, 0.0), Classification::BlowupFiniteTime);
        assert_eq!(c(1.0, 0.0), Classification::GlobalGrowing);
        assert_eq!(c(0.0, 0.0), Classification::Linear);
        // barrier 2 * 1 * 2 / 4 = 1
        assert_eq!(c(1.0, -0.9), Classification::GlobalGrowing);
        assert_eq!(c(1.0, -1.1), Classification::BlowupFiniteTime);
    }

    #[test]
    fn repulsive_barrier_crossing_matches_integration() {
        let p = EmdenProblem::new(1.0, 0.5, 1.0, -1.5, 20.0);
        let q = touchdown_time_quadrature(&p).unwrap();
        let s = integrate(&p, 1e-12).unwrap().fate().time().unwrap();
        assert!(((s - q) / q).abs() < 1e-6, "{s} vs {q}");
    }

    #[test]
    fn dense_output_tracks_closed_form() {
        // xi = -1, kappa = 0 (constant pull): a = 1 - s^2 / 8
        let p = EmdenProblem::new(-1.0, 0.0, 1.0, 0.0, 1.5);
        let traj = integrate(&p, 1e-10).unwrap();
        for s in [0.013, 0.5, 0.77, 1.3] {
            let (a, a_dot) = traj.state_at(s).unwrap();
            assert!((a - (1.0 - s * s / 8.0)).abs() < 1e-10);
            assert!((a_dot + s / 4.0).abs() < 1e-10);
        }
        assert!(matches!(traj.state_at(1.6), Err(EmdenError::OutsideTrajectory { .. })));
    }

    #[test]
    fn summary_and_csv() {
        let p = EmdenProblem::new(0.0, 0.5, 1.0, 1.0, 2.0);
        let traj = integrate(&p, 1e-8).unwrap();
        let sum = traj.summary();
        assert_eq!(sum.fate, "GlobalOnHorizon");
        assert_eq!(sum.s, None);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,a,a_dot\n"));
        assert_eq!(text.lines().count(), traj.samples().len() + 1);
    }
}
