//! Finite-difference residuals of the two-component Degasperis–Procesi
//! system for arbitrary `(rho, u)` samplers:
//!
//! ```text
//! R1 = rho_t + k2 u rho_x + (k1 + k2) rho u_x
//! R2 = u_t - u_xxt + 4 u u_x - 3 u_x u_xx - u u_xxx + k3 rho rho_x
//! ```
//!
//! Every derivative is a second-order central difference with spatial step
//! `h` and temporal step `dt`, so residuals of an exact solution decay like
//! `O(h^2 + dt^2)` wherever the fields are smooth.

use std::io::{self, Write};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::grid::{Field, Grid1D};
use crate::io::write_csv;
use crate::selfsim::{SelfSimilarSolution, SystemParams};

/// Norms at or below this level are treated as an exact zero.
pub const ZERO_RESIDUAL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResidualError {
    #[error("sampler cannot be evaluated at t = {t}: {reason}")]
    HorizonExceeded { t: f64, reason: String },
    #[error("a convergence study needs at least 3 grids, got {0}")]
    InsufficientGrids(usize),
    #[error("grid spacings must shrink by a fixed ratio")]
    NonUniformRefinement,
    #[error("finite-difference steps must be positive (h = {h}, dt = {dt})")]
    BadStep { h: f64, dt: f64 },
    #[error("no grid node lies in the evaluation region")]
    EmptyRegion,
}

/// Anything that produces `(rho, u)` at `(t, x)`.
pub trait FieldSampler {
    fn sample(&self, t: f64, x: f64) -> Result<(f64, f64), ResidualError>;

    /// Interval on which the fields are expected to be a smooth solution;
    /// `None` means the whole line.
    fn smooth_region(&self, _t: f64) -> Option<(f64, f64)> {
        None
    }
}

impl FieldSampler for SelfSimilarSolution {
    fn sample(&self, t: f64, x: f64) -> Result<(f64, f64), ResidualError> {
        self.evaluate(t, x).map_err(|e| ResidualError::HorizonExceeded { t, reason: e.to_string() })
    }

    /// The density support: outside it `rho = 0` while `u` keeps
    /// accelerating, so only the support carries a solution.
    fn smooth_region(&self, t: f64) -> Option<(f64, f64)> {
        match self.support_halfwidth(t) {
            Ok(Some(w)) => Some((-w, w)),
            _ => None,
        }
    }
}

/// Adapts a closure `(t, x) -> (rho, u)` into a [`FieldSampler`].
pub struct FnSampler<F>(pub F);

impl<F: Fn(f64, f64) -> (f64, f64)> FieldSampler for FnSampler<F> {
    fn sample(&self, t: f64, x: f64) -> Result<(f64, f64), ResidualError> {
        Ok((self.0)(t, x))
    }
}

fn check_steps(h: f64, dt: f64) -> Result<(), ResidualError> {
    if h > 0.0 && dt > 0.0 && h.is_finite() && dt.is_finite() {
        Ok(())
    } else {
        Err(ResidualError::BadStep { h, dt })
    }
}

/// Both residuals at every node of `grid`.
pub fn residuals<S: FieldSampler + ?Sized>(
    sampler: &S,
    params: &SystemParams,
    t: f64,
    grid: &Grid1D,
    h: f64,
    dt: f64,
) -> Result<(Field, Field), ResidualError> {
    check_steps(h, dt)?;
    let (k1, k2, k3) = (params.k1, params.k2, params.k3);
    let mut r1 = Vec::with_capacity(grid.n());
    let mut r2 = Vec::with_capacity(grid.n());
    for x in grid.nodes() {
        let u_m2 = sampler.sample(t, x - 2.0 * h)?.1;
        let (rho_m1, u_m1) = sampler.sample(t, x - h)?;
        let (rho, u) = sampler.sample(t, x)?;
        let (rho_p1, u_p1) = sampler.sample(t, x + h)?;
        let u_p2 = sampler.sample(t, x + 2.0 * h)?.1;
        let (rho_fut, u_fut) = sampler.sample(t + dt, x)?;
        let (rho_past, u_past) = sampler.sample(t - dt, x)?;
        let u_fut_m = sampler.sample(t + dt, x - h)?.1;
        let u_fut_p = sampler.sample(t + dt, x + h)?.1;
        let u_past_m = sampler.sample(t - dt, x - h)?.1;
        let u_past_p = sampler.sample(t - dt, x + h)?.1;

        let rho_t = (rho_fut - rho_past) / (2.0 * dt);
        let rho_x = (rho_p1 - rho_m1) / (2.0 * h);
        let u_t = (u_fut - u_past) / (2.0 * dt);
        let u_x = (u_p1 - u_m1) / (2.0 * h);
        let u_xx = (u_p1 - 2.0 * u + u_m1) / (h * h);
        let u_xx_fut = (u_fut_p - 2.0 * u_fut + u_fut_m) / (h * h);
        let u_xx_past = (u_past_p - 2.0 * u_past + u_past_m) / (h * h);
        let u_xxt = (u_xx_fut - u_xx_past) / (2.0 * dt);
        let u_xxx = (u_p2 - 2.0 * u_p1 + 2.0 * u_m1 - u_m2) / (2.0 * h * h * h);

        r1.push(rho_t + k2 * u * rho_x + (k1 + k2) * rho * u_x);
        r2.push(u_t - u_xxt + 4.0 * u * u_x - 3.0 * u_x * u_xx - u * u_xxx + k3 * rho * rho_x);
    }
    Ok((Field(r1), Field(r2)))
}

/// `R1` at every node of `grid`.
pub fn mass_equation_residual<S: FieldSampler + ?Sized>(
    sampler: &S,
    params: &SystemParams,
    t: f64,
    grid: &Grid1D,
    h: f64,
    dt: f64,
) -> Result<Field, ResidualError> {
    residuals(sampler, params, t, grid, h, dt).map(|(r1, _)| r1)
}

/// `R2` at every node of `grid`.
pub fn momentum_equation_residual<S: FieldSampler + ?Sized>(
    sampler: &S,
    params: &SystemParams,
    t: f64,
    grid: &Grid1D,
    h: f64,
    dt: f64,
) -> Result<Field, ResidualError> {
    residuals(sampler, params, t, grid, h, dt).map(|(_, r2)| r2)
}

/// Max norm over the nodes of `region` shrunk by `band` on both sides.
///
/// With `band == 0` the closed region is used, so nodes on or next to a
/// non-smooth boundary are included.
pub fn interior_linf(field: &Field, grid: &Grid1D, region: Option<(f64, f64)>, band: f64) -> Option<f64> {
    let inside = |x: f64| match region {
        None => true,
        Some((lo, hi)) if band > 0.0 => x > lo + band && x < hi - band,
        Some((lo, hi)) => x >= lo && x <= hi,
    };
    let mut norm: Option<f64> = None;
    for (x, v) in grid.nodes().zip(field.values()) {
        if inside(x) {
            norm = Some(norm.unwrap_or(0.0).max(v.abs()));
        }
    }
    norm
}

/// Least-squares slope, or "NotApplicable" when the residual is an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderEstimate {
    Value(f64),
    NotApplicable,
}

impl OrderEstimate {
    pub fn value(&self) -> Option<f64> {
        match *self {
            OrderEstimate::Value(v) => Some(v),
            OrderEstimate::NotApplicable => None,
        }
    }
}

impl Serialize for OrderEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OrderEstimate::Value(v) => s.serialize_f64(*v),
            OrderEstimate::NotApplicable => s.serialize_str("NotApplicable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelNorms {
    pub h: f64,
    pub dt: f64,
    pub mass_eq_linf: f64,
    pub momentum_eq_linf: f64,
}

/// Outcome of a refinement study; scalar norms refer to the finest level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub grid_h: f64,
    pub dt: f64,
    pub mass_eq_linf: f64,
    pub momentum_eq_linf: f64,
    pub interior_band: f64,
    pub order_estimate_mass: OrderEstimate,
    pub order_estimate_momentum: OrderEstimate,
    pub levels: Vec<LevelNorms>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig {
    /// `dt = dt_over_h * h` on every level.
    pub dt_over_h: f64,
    /// Excluded margin `delta` inside the smooth region.
    pub band: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self { dt_over_h: 0.1, band: 0.1 }
    }
}

/// Slope of `ln(norm)` against `ln(h)`.
pub fn fit_order(hs: &[f64], norms: &[f64]) -> OrderEstimate {
    if norms.iter().all(|&n| n <= ZERO_RESIDUAL) {
        return OrderEstimate::NotApplicable;
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.max(f64::MIN_POSITIVE).ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    OrderEstimate::Value(sxy / sxx)
}

/// Evaluates both residuals on each grid (spacing `h`, `dt = dt_over_h * h`)
/// and fits convergence orders over the smooth region minus the band.
pub fn convergence_study<S: FieldSampler + ?Sized>(
    sampler: &S,
    params: &SystemParams,
    t: f64,
    grids: &[Grid1D],
    config: StudyConfig,
) -> Result<ResidualReport, ResidualError> {
    if grids.len() < 3 {
        return Err(ResidualError::InsufficientGrids(grids.len()));
    }
    let hs: Vec<f64> = grids.iter().map(Grid1D::spacing).collect();
    let ratio = hs[0] / hs[1];
    if hs.windows(2).any(|w| ((w[0] / w[1]) / ratio - 1.0).abs() > 1e-9) || (ratio - 1.0).abs() < 1e-12 {
        return Err(ResidualError::NonUniformRefinement);
    }
    let region = sampler.smooth_region(t);
    let mut levels = Vec::with_capacity(grids.len());
    for (grid, &h) in grids.iter().zip(&hs) {
        let dt = config.dt_over_h * h;
        let (r1, r2) = residuals(sampler, params, t, grid, h, dt)?;
        let mass = interior_linf(&r1, grid, region, config.band).ok_or(ResidualError::EmptyRegion)?;
        let momentum = interior_linf(&r2, grid, region, config.band).ok_or(ResidualError::EmptyRegion)?;
        levels.push(LevelNorms { h, dt, mass_eq_linf: mass, momentum_eq_linf: momentum });
    }
    let mass: Vec<f64> = levels.iter().map(|l| l.mass_eq_linf).collect();
    let momentum: Vec<f64> = levels.iter().map(|l| l.momentum_eq_linf).collect();
    let finest = *levels.iter().min_by(|a, b| a.h.total_cmp(&b.h)).expect("non-empty");
    Ok(ResidualReport {
        grid_h: finest.h,
        dt: finest.dt,
        mass_eq_linf: finest.mass_eq_linf,
        momentum_eq_linf: finest.momentum_eq_linf,
        interior_band: config.band,
        order_estimate_mass: fit_order(&hs, &mass),
        order_estimate_momentum: fit_order(&hs, &momentum),
        levels,
    })
}

/// CSV with header `x,R1,R2`.
pub fn write_residual_csv<W: Write>(w: &mut W, grid: &Grid1D, r1: &Field, r2: &Field) -> io::Result<()> {
    let rows = grid.nodes().zip(r1.values().iter().zip(r2.values())).map(|(x, (a, b))| [x, *a, *b]);
    write_csv(w, &["x", "R1", "R2"], rows)
}
