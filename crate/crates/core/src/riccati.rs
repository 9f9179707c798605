//! Slope blowup bound along a characteristic.
//!
//! If `u(t, x0) <= M` and `v0 = u_x(x0, 0) < -c` with `c = sqrt(3/2) |M|`,
//! the slope obeys `v' <= -v^2 + c^2` and is dominated by the comparison
//! Riccati equation, which escapes to `-inf` at
//!
//! ```text
//! T = ln((v0 - c) / (v0 + c)) / (2c) = atanh(c / |v0|) / c      (c > 0)
//! T = -1 / v0                                                   (c = 0)
//! ```
//!
//! `T` bounds the blowup time of the true slope from above.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::write_csv;
use crate::ode::rk4_step;
use crate::selfsim::SystemParams;

/// `|v|` beyond which the comparison solution counts as escaped.
pub const ESCAPE_THRESHOLD: f64 = 1e6;
/// Upper bound on `h |v|` for a comparison-ODE step.
const MAX_STEP_GROWTH: f64 = 0.05;
const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiccatiError {
    #[error("velocity bound M must be finite and non-negative, got {0}")]
    InvalidBound(f64),
    #[error("initial slope v0 must be finite, got {0}")]
    InvalidSlope(f64),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("divergence history is empty")]
    EmptyHistory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupCriterion {
    m: f64,
    v0: f64,
    c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    BlowsUpBy(f64),
    Inconclusive,
}

/// JSON form `{M, v0, c, applies, T_bound}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    #[serde(rename = "M")]
    pub m: f64,
    pub v0: f64,
    pub c: f64,
    pub applies: bool,
    #[serde(rename = "T_bound")]
    pub t_bound: Option<f64>,
}

/// Sampled comparison trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRun {
    pub points: Vec<(f64, f64)>,
    /// First time with `|v| > ESCAPE_THRESHOLD`.
    pub escape_time: Option<f64>,
}

impl ComparisonRun {
    /// CSV with header `t,v`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write_csv(w, &["t", "v"], self.points.iter().map(|&(t, v)| [t, v]))
    }
}

impl BlowupCriterion {
    pub fn new(m: f64, v0: f64) -> Result<Self, RiccatiError> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(RiccatiError::InvalidBound(m));
        }
        if !v0.is_finite() {
            return Err(RiccatiError::InvalidSlope(v0));
        }
        Ok(Self { m, v0, c: 1.5f64.sqrt() * m })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Threshold `sqrt(3/2) |M|`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn applies(&self) -> bool {
        self.v0 < -self.c && self.v0 < 0.0
    }

    pub fn check(&self) -> Verdict {
        if !self.applies() {
            return Verdict::Inconclusive;
        }
        if self.c == 0.0 {
            return Verdict::BlowsUpBy(-1.0 / self.v0);
        }
        Verdict::BlowsUpBy((self.c / -self.v0).atanh() / self.c)
    }

    pub fn summary(&self) -> CriterionSummary {
        CriterionSummary {
            m: self.m,
            v0: self.v0,
            c: self.c,
            applies: self.applies(),
            t_bound: match self.check() {
                Verdict::BlowsUpBy(t) => Some(t),
                Verdict::Inconclusive => None,
            },
        }
    }

    /// RK4 solution of `v' = -v^2 + c^2` from `v0`.
    ///
    /// Steps are `min(dt, 0.05 / |v|)` so the growth is resolved all the way
    /// to the escape threshold. Integration stops at escape or at ten times
    /// the closed-form bound (ten relaxation times when inconclusive).
    pub fn comparison_trajectory(&self, dt: f64) -> Result<ComparisonRun, RiccatiError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(RiccatiError::BadStep(dt));
        }
        let c2 = self.c * self.c;
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0] * y[0] + c2];
        let horizon = match self.check() {
            Verdict::BlowsUpBy(t) => 10.0 * t,
            Verdict::Inconclusive => {
                let rate = self.c.max(self.v0.abs());
                if rate > 0.0 {
                    10.0 / rate
                } else {
                    10.0
                }
            }
        };
        let (mut t, mut v) = (0.0, self.v0);
        let mut points = vec![(t, v)];
        for _ in 0..MAX_STEPS {
            if t >= horizon {
                break;
            }
            let h = dt.min(MAX_STEP_GROWTH / v.abs()).min(horizon - t);
            v = rk4_step(&rhs, t, &[v], h)[0];
            t += h;
            points.push((t, v));
            if !(v.abs() <= ESCAPE_THRESHOLD) {
                return Ok(ComparisonRun { points, escape_time: Some(t) });
            }
        }
        Ok(ComparisonRun { points, escape_time: None })
    }
}

/// `exp(-(k1 + k2) ∫ div u dt)` by the trapezoidal rule over `(t, div_u)`
/// samples: the density ratio `rho / rho0` along a characteristic.
pub fn density_positivity_factor(history: &[(f64, f64)], params: &SystemParams) -> Result<f64, RiccatiError> {
    if history.is_empty() {
        return Err(RiccatiError::EmptyHistory);
    }
    let integral: f64 = history.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    Ok((-(params.k1 + params.k2) * integral).exp())
}
