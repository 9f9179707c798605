//! Self-similar solutions of the two-component Degasperis–Procesi system
//!
//! ```text
//! rho(t, x) = f(eta) / a(4t)^((k1 + k2) / 4),   u(t, x) = a'(4t) / a(4t) * x,
//! eta = x / a(4t)^(k2 / 4),
//! ```
//!
//! with `a` the solution of `a'' = xi / (4 a^kappa)`, `kappa = k1/2 + k2 - 1`.
//! Three families exist: `k3 = xi = 0` with an arbitrary non-negative shape,
//! and `k3, xi` of equal sign with the compact semi-ellipse of
//! [`Profile`](crate::profile::Profile).
//!
//! Queries take physical time `t`; the scale factor is read at `s = 4t`.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emden::{integrate, EmdenError, EmdenProblem, EmdenTrajectory, Fate};
use crate::grid::Grid1D;
use crate::io::write_csv;
use crate::profile::{Profile, ProfileError};
use crate::quad;

/// Local error tolerance used for the scale factor.
pub const TRAJECTORY_TOL: f64 = 1e-12;
/// Emden normalization produced by the separation ansatz.
pub const SEPARATION_MU: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelfSimError {
    #[error("k2 must be positive, got {0}")]
    NonPositiveK2(f64),
    #[error("constant `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("no self-similar family for k3 = {k3}, xi = {xi}; need equal signs or k3 = xi = 0")]
    InvalidBranch { k3: f64, xi: f64 },
    #[error("the origin-density limit is only defined for k3 != 0")]
    WrongBranch,
    #[error("free profile is negative ({value}) at x = {x}")]
    NegativeDensity { x: f64, value: f64 },
    #[error("t = {t} is at or beyond the blowup time T = {blowup_time}")]
    BeyondBlowup { t: f64, blowup_time: f64 },
    #[error("t = {t} exceeds the computed horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("the density at the origin did not behave monotonically: {0}")]
    LimitCheckFailed(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Emden(#[from] EmdenError),
}

/// The constants `k1, k2, k3` of the system and the derived Emden exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    kappa: f64,
}

impl SystemParams {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self, SelfSimError> {
        for (name, value) in [("k1", k1), ("k2", k2), ("k3", k3)] {
            if !value.is_finite() {
                return Err(SelfSimError::NonFinite { name, value });
            }
        }
        if k2 <= 0.0 {
            return Err(SelfSimError::NonPositiveK2(k2));
        }
        Ok(Self { k1, k2, k3, kappa: 0.5 * k1 + k2 - 1.0 })
    }

    /// `k1 / 2 + k2 - 1`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Arbitrary non-negative shape for the `k3 = xi = 0` family.
#[derive(Clone)]
pub struct FreeProfile {
    shape: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    extent: f64,
}

impl fmt::Debug for FreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FreeProfile").field("extent", &self.extent).finish_non_exhaustive()
    }
}

impl FreeProfile {
    /// `extent` bounds the region outside which the shape is negligible; it
    /// is used for the nonnegativity scan and mass quadrature.
    pub fn new<F>(shape: F, extent: f64) -> Result<Self, SelfSimError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        const SCAN: usize = 1024;
        for i in 0..=SCAN {
            let x = -extent + 2.0 * extent * i as f64 / SCAN as f64;
            let value = shape(x);
            if !(value >= 0.0) {
                return Err(SelfSimError::NegativeDensity { x, value });
            }
        }
        Ok(Self { shape: Arc::new(shape), extent })
    }

    pub fn eval(&self, eta: f64) -> f64 {
        (self.shape)(eta)
    }

    pub fn mass_eta(&self) -> f64 {
        quad::integrate(|x| self.eval(x), -self.extent, self.extent, 1e-13, 1e-12).value
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Compact(Profile),
    Free(FreeProfile),
}

impl Shape {
    pub fn eval(&self, eta: f64) -> f64 {
        match self {
            Shape::Compact(p) => p.eval(eta),
            Shape::Free(p) => p.eval(eta),
        }
    }

    pub fn mass_eta(&self) -> f64 {
        match self {
            Shape::Compact(p) => p.mass_eta(),
            Shape::Free(p) => p.mass_eta(),
        }
    }
}

/// Limiting behaviour of `rho(t, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginLimit {
    DivergesAtT(f64),
    DecaysToZero,
}

/// Metadata of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub a: f64,
    pub a_dot: f64,
    pub mass: f64,
    pub support_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

impl Snapshot {
    /// CSV with header `x,rho,u`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let rows = (0..self.x.len()).map(|j| [self.x[j], self.rho[j], self.u[j]]);
        write_csv(w, &["x", "rho", "u"], rows)
    }
}

/// A member of the self-similar family, bound to its scale-factor trajectory.
#[derive(Debug, Clone)]
pub struct SelfSimilarSolution {
    params: SystemParams,
    shape: Shape,
    traj: EmdenTrajectory,
    xi: f64,
}

impl SelfSimilarSolution {
    /// Compact-support family: `k3 > 0, xi > 0` (global) or `k3 < 0, xi < 0`
    /// (finite-time collapse).
    pub fn compact(
        params: SystemParams,
        xi: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
        s_max: f64,
    ) -> Result<Self, SelfSimError> {
        let k3 = params.k3;
        if !((k3 > 0.0 && xi > 0.0) || (k3 < 0.0 && xi < 0.0)) {
            return Err(SelfSimError::InvalidBranch { k3, xi });
        }
        let profile = Profile::from_branch(k3, xi, alpha)?;
        Self::build(params, Shape::Compact(profile), xi, a0, a1, s_max)
    }

    /// The `k3 = 0, xi = 0` family with an arbitrary shape.
    pub fn free(params: SystemParams, shape: FreeProfile, a0: f64, a1: f64, s_max: f64) -> Result<Self, SelfSimError> {
        if params.k3 != 0.0 {
            return Err(SelfSimError::InvalidBranch { k3: params.k3, xi: 0.0 });
        }
        Self::build(params, Shape::Free(shape), 0.0, a0, a1, s_max)
    }

    fn build(params: SystemParams, shape: Shape, xi: f64, a0: f64, a1: f64, s_max: f64) -> Result<Self, SelfSimError> {
        let problem = EmdenProblem::new(xi, params.kappa(), a0, a1, s_max).with_mu(SEPARATION_MU);
        let traj = integrate(&problem, TRAJECTORY_TOL)?;
        Ok(Self { params, shape, traj, xi })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn trajectory(&self) -> &EmdenTrajectory {
        &self.traj
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Physical blowup time `T = S / 4`, if the scale factor touches down.
    pub fn blowup_time(&self) -> Option<f64> {
        match self.traj.fate() {
            Fate::TouchdownAt(s) => Some(0.25 * s),
            _ => None,
        }
    }

    /// Last physical time at which the solution can be evaluated (exclusive
    /// when it is a blowup time).
    pub fn horizon(&self) -> f64 {
        0.25 * self.traj.end()
    }

    /// `(a, a')` at physical time `t`.
    pub fn scale_at(&self, t: f64) -> Result<(f64, f64), SelfSimError> {
        if !(t >= 0.0) {
            return Err(SelfSimError::NegativeTime(t));
        }
        if let Some(blowup_time) = self.blowup_time() {
            if t >= blowup_time {
                return Err(SelfSimError::BeyondBlowup { t, blowup_time });
            }
        }
        let s = 4.0 * t;
        if s > self.traj.end() {
            return Err(SelfSimError::HorizonExceeded { t, horizon: self.horizon() });
        }
        Ok(self.traj.state_at(s)?)
    }

    fn fields(&self, a: f64, a_dot: f64, x: f64) -> (f64, f64) {
        let p = &self.params;
        let eta = x / a.powf(0.25 * p.k2);
        let rho = self.shape.eval(eta) / a.powf(0.25 * (p.k1 + p.k2));
        (rho.max(0.0), a_dot / a * x)
    }

    /// `(rho, u)` at `(t, x)`.
    pub fn evaluate(&self, t: f64, x: f64) -> Result<(f64, f64), SelfSimError> {
        let (a, a_dot) = self.scale_at(t)?;
        Ok(self.fields(a, a_dot, x))
    }

    /// `∫ rho(t, x) dx = a^(-k1/4) ∫ f(eta) d(eta)`.
    pub fn mass(&self, t: f64) -> Result<f64, SelfSimError> {
        let (a, _) = self.scale_at(t)?;
        Ok(a.powf(-0.25 * self.params.k1) * self.shape.mass_eta())
    }

    /// Support `[-w, w]` of `rho(t, .)` for the compact family.
    pub fn support_halfwidth(&self, t: f64) -> Result<Option<f64>, SelfSimError> {
        let (a, _) = self.scale_at(t)?;
        Ok(match &self.shape {
            Shape::Compact(p) => Some(p.half_width() * a.powf(0.25 * self.params.k2)),
            Shape::Free(_) => None,
        })
    }

    pub fn snapshot(&self, t: f64, grid: &Grid1D) -> Result<Snapshot, SelfSimError> {
        let (a, a_dot) = self.scale_at(t)?;
        let x: Vec<f64> = grid.nodes().collect();
        let (rho, u) = x.iter().map(|&xj| self.fields(a, a_dot, xj)).unzip();
        Ok(Snapshot {
            meta: SnapshotMeta { t, a, a_dot, mass: self.mass(t)?, support_halfwidth: self.support_halfwidth(t)? },
            x,
            rho,
            u,
        })
    }

    /// Classifies `rho(t, 0)` as `t` approaches the end of existence and
    /// checks the claim along a sampled sequence of times.
    ///
    /// On collapse the density is sampled at `t = T (1 - 10^-k)` and must
    /// increase strictly. On a global run it must decrease strictly once `a`
    /// has passed its minimum on the computed horizon.
    pub fn origin_density_limit(&self) -> Result<OriginLimit, SelfSimError> {
        if self.params.k3 == 0.0 {
            return Err(SelfSimError::WrongBranch);
        }
        let rho0 = |t: f64| self.evaluate(t, 0.0).map(|(r, _)| r);
        if let Some(blowup) = self.blowup_time() {
            let mut prev = rho0(0.0)?;
            for k in 1..=9 {
                let t = blowup * (1.0 - 10f64.powi(-k));
                let r = rho0(t)?;
                if !(r > prev) {
                    return Err(SelfSimError::LimitCheckFailed(format!(
                        "rho(t,0) = {r} at t = {t} does not exceed {prev}"
                    )));
                }
                prev = r;
            }
            return Ok(OriginLimit::DivergesAtT(blowup));
        }
        let samples = self.traj.samples();
        let turn = samples.iter().position(|p| p.a_dot >= 0.0).unwrap_or(samples.len());
        let mut prev = f64::INFINITY;
        for p in &samples[turn..] {
            let r = rho0(0.25 * p.s)?;
            if p.a_dot > 0.0 && !(r < prev) {
                return Err(SelfSimError::LimitCheckFailed(format!(
                    "rho(t,0) = {r} at t = {} does not fall below {prev}",
                    0.25 * p.s
                )));
            }
            prev = r;
        }
        if turn >= samples.len() {
            return Err(SelfSimError::LimitCheckFailed("a never starts growing on the horizon".into()));
        }
        Ok(OriginLimit::DecaysToZero)
    }
}
