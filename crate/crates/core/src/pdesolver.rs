//! Periodic pseudo-spectral solver for the nonlocal (Green-function) form
//!
//! ```text
//! rho_t = -k2 u rho_x - (k1 + k2) rho u_x
//! u_t   = -u u_x - d/dx G * (3/2 u^2 + k3/2 rho^2),   G = (1 - d^2/dx^2)^-1
//! ```
//!
//! on `[0, L)`. Derivatives and `G` are Fourier multipliers, products are
//! formed on the nodes and dealiased with the 2/3 rule, and time stepping
//! is classical RK4.

use std::io::{self, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Field, Grid1D, GridError};
use crate::io::write_csv;
use crate::riccati::{BlowupCriterion, RiccatiError, Verdict};
use crate::selfsim::SystemParams;

/// Speeds below this count as rest when sizing the CFL limit.
const SPEED_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("non-finite value in the tendency at t = {t}")]
    NonFinite { t: f64 },
    #[error("|dt| = {dt} exceeds the CFL limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("initial data is not odd about L/2 (residual {0})")]
    NotOdd(f64),
    #[error("invalid solver setting `{name}` = {value}")]
    BadSetting { name: &'static str, value: f64 },
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Courant number against `max |u|`.
    pub cfl: f64,
    /// Apply the 2/3 rule to inputs and products.
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { cfl: 0.3, dealias: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_ux: f64,
    pub max_rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub rho: Field,
    pub u: Field,
    pub params: SystemParams,
    pub diagnostics: Diagnostics,
}

impl SolverState {
    /// CSV snapshot with header `x,rho,u`.
    pub fn write_csv<W: Write>(&self, grid: &Grid1D, w: &mut W) -> io::Result<()> {
        let rows = grid.nodes().zip(self.rho.values().iter().zip(self.u.values())).map(|(x, (&r, &u))| [x, r, u]);
        write_csv(w, &["x", "rho", "u"], rows)
    }

    /// Largest departure from oddness about `L/2` over both fields.
    pub fn oddness_residual(&self) -> f64 {
        self.u.oddness_residual().max(self.rho.oddness_residual())
    }
}

pub struct Solver {
    grid: Grid1D,
    params: SystemParams,
    config: SolverConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    omega: Vec<f64>,
    keep: Vec<bool>,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("config", &self.config)
            .finish()
    }
}

/// Angular wavenumbers `2 pi k / L` in FFT order; the Nyquist entry is
/// returned as zero so odd derivatives of real data stay real.
fn wavenumbers(grid: &Grid1D) -> Vec<f64> {
    let n = grid.n();
    let base = 2.0 * std::f64::consts::PI / grid.length();
    (0..n)
        .map(|j| {
            if j < n / 2 {
                base * j as f64
            } else if j == n / 2 {
                0.0
            } else {
                base * (j as f64 - n as f64)
            }
        })
        .collect()
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// `G * w` for the periodic Green function of `1 - d^2/dx^2`, through the
/// multiplier `1 / (1 + omega^2)`.
pub fn helmholtz_inverse(grid: &Grid1D, w: &Field) -> Result<Field, SolverError> {
    w.check(grid)?;
    let n = grid.n();
    let mut planner = FftPlanner::new();
    let mut buf = to_complex(w.values());
    planner.plan_fft_forward(n).process(&mut buf);
    let base = 2.0 * std::f64::consts::PI / grid.length();
    for (j, c) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let om = base * k;
        *c /= 1.0 + om * om;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(Field(buf.iter().map(|c| c.re * scale).collect()))
}

/// Evaluates the trigonometric interpolant of `field` at an arbitrary `x`.
pub fn spectral_interpolate(grid: &Grid1D, field: &Field, x: f64) -> f64 {
    let n = grid.n();
    let mut buf = to_complex(field.values());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let s = x - grid.origin();
    let mut acc = buf[0].re;
    for (k, c) in buf.iter().enumerate().take(n / 2).skip(1) {
        let phase = Complex64::from_polar(1.0, base * k as f64 * s);
        acc += 2.0 * (c * phase).re;
    }
    // split Nyquist term, real part only
    acc += buf[n / 2].re * (base * (n / 2) as f64 * s).cos();
    acc / n as f64
}

impl Solver {
    pub fn new(grid: Grid1D, params: SystemParams, config: SolverConfig) -> Result<Self, SolverError> {
        if !(config.cfl.is_finite() && config.cfl > 0.0) {
            return Err(SolverError::BadSetting { name: "cfl", value: config.cfl });
        }
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let keep = (0..n)
            .map(|j| {
                let k = if j <= n / 2 { j } else { n - j };
                !config.dealias || 3 * k <= n
            })
            .collect();
        Ok(Self {
            grid,
            params,
            config,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            omega: wavenumbers(&grid),
            keep,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Validates the fields and builds a state with fresh diagnostics.
    pub fn state(&self, t: f64, rho: Field, u: Field) -> Result<SolverState, SolverError> {
        rho.check(&self.grid)?;
        u.check(&self.grid)?;
        let diagnostics = self.diagnostics(&rho, &u);
        Ok(SolverState { t, rho, u, params: self.params, diagnostics })
    }

    fn spectrum(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf = to_complex(v);
        self.forward.process(&mut buf);
        buf
    }

    fn physical(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.grid.n() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn filtered(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        for (c, &keep) in buf.iter_mut().zip(&self.keep) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        buf
    }

    fn derivative_of(&self, spec: &[Complex64]) -> Vec<f64> {
        let d = spec.iter().zip(&self.omega).map(|(c, &om)| c * Complex64::new(0.0, om)).collect();
        self.physical(d)
    }

    /// Spectral first derivative of a nodal field.
    pub fn derivative(&self, f: &Field) -> Field {
        Field(self.derivative_of(&self.spectrum(f.values())))
    }

    pub fn diagnostics(&self, rho: &Field, u: &Field) -> Diagnostics {
        let ux = self.derivative(u);
        Diagnostics { min_ux: ux.min(), max_rho: rho.max() }
    }

    /// Largest stable `|dt|` for the state: `cfl * dx / max(|u|, eps)`.
    pub fn cfl_limit(&self, state: &SolverState) -> f64 {
        self.config.cfl * self.grid.spacing() / state.u.max_abs().max(SPEED_FLOOR)
    }

    /// Right-hand sides `(rho_t, u_t)` at the given fields.
    pub fn tendency(&self, t: f64, rho: &[f64], u: &[f64]) -> Result<(Field, Field), SolverError> {
        let SystemParams { k1, k2, k3, .. } = self.params;
        let u_hat = self.filtered(self.spectrum(u));
        let rho_hat = self.filtered(self.spectrum(rho));
        let uf = self.physical(u_hat.clone());
        let ux = self.derivative_of(&u_hat);
        let rf = self.physical(rho_hat.clone());
        let rx = self.derivative_of(&rho_hat);

        let mass: Vec<f64> = (0..uf.len()).map(|j| -k2 * rx[j] * uf[j] - (k1 + k2) * rf[j] * ux[j]).collect();
        let advect: Vec<f64> = uf.iter().zip(&ux).map(|(a, b)| -a * b).collect();
        let source: Vec<f64> = uf.iter().zip(&rf).map(|(a, r)| 1.5 * a * a + 0.5 * k3 * r * r).collect();

        let drho = self.physical(self.filtered(self.spectrum(&mass)));
        let mut mom = self.filtered(self.spectrum(&advect));
        let src = self.filtered(self.spectrum(&source));
        for ((m, s), &om) in mom.iter_mut().zip(&src).zip(&self.omega) {
            *m -= s * Complex64::new(0.0, om / (1.0 + om * om));
        }
        let du = self.physical(mom);
        if drho.iter().chain(&du).any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { t });
        }
        Ok((Field(drho), Field(du)))
    }

    /// One RK4 step of size `dt` (negative steps run backwards).
    pub fn step(&self, state: &SolverState, dt: f64) -> Result<SolverState, SolverError> {
        let limit = self.cfl_limit(state);
        if !dt.is_finite() || dt.abs() > limit {
            return Err(SolverError::StepTooLarge { dt: dt.abs(), limit });
        }
        let n = self.grid.n();
        let t = state.t;
        let (r0, u0) = (state.rho.values(), state.u.values());
        let shift = |base: &[f64], k: &Field, c: f64| -> Vec<f64> {
            base.iter().zip(k.values()).map(|(b, d)| b + c * d).collect()
        };
        let (kr1, ku1) = self.tendency(t, r0, u0)?;
        let (kr2, ku2) = self.tendency(t + 0.5 * dt, &shift(r0, &kr1, 0.5 * dt), &shift(u0, &ku1, 0.5 * dt))?;
        let (kr3, ku3) = self.tendency(t + 0.5 * dt, &shift(r0, &kr2, 0.5 * dt), &shift(u0, &ku2, 0.5 * dt))?;
        let (kr4, ku4) = self.tendency(t + dt, &shift(r0, &kr3, dt), &shift(u0, &ku3, dt))?;
        let combine = |base: &[f64], k: [&Field; 4]| -> Field {
            Field(
                (0..n)
                    .map(|j| base[j] + dt / 6.0 * (k[0].0[j] + 2.0 * k[1].0[j] + 2.0 * k[2].0[j] + k[3].0[j]))
                    .collect(),
            )
        };
        let rho = combine(r0, [&kr1, &kr2, &kr3, &kr4]);
        let u = combine(u0, [&ku1, &ku2, &ku3, &ku4]);
        if rho.values().iter().chain(u.values()).any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { t: t + dt });
        }
        let diagnostics = self.diagnostics(&rho, &u);
        Ok(SolverState { t: t + dt, rho, u, params: self.params, diagnostics })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Crossing level for `min u_x` (a positive magnitude).
    pub threshold: f64,
    pub t_max: f64,
    /// Assumed bound on `u` at the symmetry point; zero for odd data.
    pub m_est: f64,
    /// Allowed overshoot of the crossing time past the bound, as a fraction.
    pub margin: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { threshold: 1e3, t_max: 1.0, m_est: 0.0, margin: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub min_ux: f64,
    pub max_rho: f64,
    pub oddness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// `min u_x` fell below `-threshold` at the given time.
    Crossed(f64),
    /// Reached `t_max` without crossing. Not an error: the bound is one-sided.
    NoBlowupDetected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub series: Vec<DiagnosticsRow>,
    pub outcome: Outcome,
    /// Initial slope at the symmetry point.
    pub v0: f64,
    pub bound: Option<f64>,
    pub final_state: SolverState,
}

impl BlowupReport {
    pub fn crossing_time(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Crossed(t) => Some(t),
            Outcome::NoBlowupDetected => None,
        }
    }

    /// Crossing happened no later than `bound * (1 + margin)`.
    pub fn within_bound(&self, margin: f64) -> Option<bool> {
        Some(self.crossing_time()? <= self.bound? * (1.0 + margin))
    }

    pub fn max_oddness(&self) -> f64 {
        self.series.iter().map(|r| r.oddness).fold(0.0, f64::max)
    }

    /// Diagnostics CSV with header `t,min_ux,max_rho`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write_csv(w, &["t", "min_ux", "max_rho"], self.series.iter().map(|r| [r.t, r.min_ux, r.max_rho]))
    }
}

/// Runs odd initial data until `min u_x < -threshold` or `t_max`.
///
/// The step starts at the CFL limit of the initial state and is halved
/// whenever it exceeds the current limit or `|min u_x| dt` exceeds the
/// Courant number, so the steepening is followed with a resolved step.
pub fn run_blowup_experiment(
    solver: &Solver,
    initial: SolverState,
    config: &ExperimentConfig,
) -> Result<BlowupReport, SolverError> {
    for (name, value) in [("threshold", config.threshold), ("t_max", config.t_max), ("margin", config.margin)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(SolverError::BadSetting { name, value });
        }
    }
    let scale = 1.0 + initial.u.max_abs() + initial.rho.max_abs();
    let odd = initial.oddness_residual();
    if odd > 1e-12 * scale {
        return Err(SolverError::NotOdd(odd));
    }
    let grid = solver.grid();
    let mid = grid.n() / 2;
    let v0 = solver.derivative(&initial.u).values()[mid];
    let bound = match BlowupCriterion::new(config.m_est, v0)?.check() {
        Verdict::BlowsUpBy(t) => Some(t),
        Verdict::Inconclusive => None,
    };

    let cfl = solver.config().cfl;
    let mut dt = solver.cfl_limit(&initial);
    let row = |s: &SolverState| DiagnosticsRow {
        t: s.t,
        min_ux: s.diagnostics.min_ux,
        max_rho: s.diagnostics.max_rho,
        oddness: s.oddness_residual(),
    };
    let mut series = vec![row(&initial)];
    let mut state = initial;
    let level = -config.threshold;
    while state.t < config.t_max {
        if state.diagnostics.min_ux < level {
            break;
        }
        while dt > solver.cfl_limit(&state) || dt * -state.diagnostics.min_ux > cfl {
            dt *= 0.5;
        }
        let h = dt.min(config.t_max - state.t);
        let next = solver.step(&state, h)?;
        series.push(row(&next));
        state = next;
    }

    let outcome = match series.iter().position(|r| r.min_ux < level) {
        Some(0) => Outcome::Crossed(series[0].t),
        Some(i) => {
            // 1/v is close to linear in t near a Riccati-type escape
            let (a, b) = (&series[i - 1], &series[i]);
            let (ia, ib, il) = (1.0 / a.min_ux, 1.0 / b.min_ux, 1.0 / level);
            let frac = if ib != ia { ((il - ia) / (ib - ia)).clamp(0.0, 1.0) } else { 1.0 };
            Outcome::Crossed(a.t + frac * (b.t - a.t))
        }
        None => Outcome::NoBlowupDetected,
    };
    Ok(BlowupReport { series, outcome, v0, bound, final_state: state })
}
