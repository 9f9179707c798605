//! Browser bindings. Every export returns a JSON string so the page can stay
//! framework-free and the same functions are testable on the host.

use dp2::emden::{classify, integrate, Classification, EmdenProblem};
use dp2::riccati::BlowupCriterion;
use dp2::selfsim::{SelfSimilarSolution, SystemParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 20_000;

fn points_ok(points: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&points) {
        Ok(())
    } else {
        Err(format!("points must lie in [2, {MAX_POINTS}], got {points}"))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EmdenView {
    fate: String,
    #[serde(rename = "S")]
    s_end: Option<f64>,
    energy_drift_max: f64,
    classification: Option<Classification>,
    s: Vec<f64>,
    a: Vec<f64>,
    a_dot: Vec<f64>,
}

/// Scale factor `a(s)` sampled uniformly up to touchdown or the horizon.
#[wasm_bindgen]
pub fn emden_run(xi: f64, kappa: f64, a0: f64, a1: f64, s_max: f64, points: usize) -> Result<String, String> {
    points_ok(points)?;
    let problem = EmdenProblem::new(xi, kappa, a0, a1, s_max);
    let traj = integrate(&problem, 1e-10).map_err(|e| e.to_string())?;
    let end = traj.end();
    let mut view = EmdenView {
        fate: traj.fate().name().to_owned(),
        s_end: traj.fate().time(),
        energy_drift_max: traj.energy_drift_max(),
        classification: classify(&problem).ok(),
        s: Vec::with_capacity(points),
        a: Vec::with_capacity(points),
        a_dot: Vec::with_capacity(points),
    };
    for i in 0..points {
        let s = end * i as f64 / (points - 1) as f64;
        let (a, a_dot) = traj.state_at(s).map_err(|e| e.to_string())?;
        view.s.push(s);
        view.a.push(a);
        view.a_dot.push(a_dot);
    }
    to_json(&view)
}

#[derive(Serialize)]
struct SnapshotView {
    t: f64,
    #[serde(rename = "T")]
    blowup_time: Option<f64>,
    a: f64,
    mass: f64,
    support_halfwidth: Option<f64>,
    x: Vec<f64>,
    rho: Vec<f64>,
    u: Vec<f64>,
}

/// `(rho, u)` of the compact self-similar solution with `a0 = 1` at time
/// `t`, sampled on `[-half_extent, half_extent]`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn selfsim_snapshot(
    k1: f64,
    k2: f64,
    k3: f64,
    xi: f64,
    alpha: f64,
    a1: f64,
    t: f64,
    half_extent: f64,
    points: usize,
) -> Result<String, String> {
    points_ok(points)?;
    if !(half_extent.is_finite() && half_extent > 0.0) {
        return Err(format!("half_extent must be positive, got {half_extent}"));
    }
    let params = SystemParams::new(k1, k2, k3).map_err(|e| e.to_string())?;
    let sol = SelfSimilarSolution::compact(params, xi, alpha, 1.0, a1, 40.0).map_err(|e| e.to_string())?;
    let (a, _) = sol.scale_at(t).map_err(|e| e.to_string())?;
    let x: Vec<f64> = (0..points).map(|i| -half_extent + 2.0 * half_extent * i as f64 / (points - 1) as f64).collect();
    let (rho, u) = x
        .iter()
        .map(|&xi| sol.evaluate(t, xi))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .unzip();
    to_json(&SnapshotView {
        t,
        blowup_time: sol.blowup_time(),
        a,
        mass: sol.mass(t).map_err(|e| e.to_string())?,
        support_halfwidth: sol.support_halfwidth(t).map_err(|e| e.to_string())?,
        x,
        rho,
        u,
    })
}

#[derive(Serialize)]
struct RiccatiView {
    c: f64,
    applies: bool,
    #[serde(rename = "T_bound")]
    t_bound: Option<f64>,
    escape_time: Option<f64>,
    t: Vec<f64>,
    v: Vec<f64>,
}

/// Comparison curve `v' = -v^2 + 3 M^2 / 2` from `v0` and the closed-form
/// blowup-time bound.
#[wasm_bindgen]
pub fn riccati_curve(m: f64, v0: f64, dt: f64) -> Result<String, String> {
    let criterion = BlowupCriterion::new(m, v0).map_err(|e| e.to_string())?;
    let run = criterion.comparison_trajectory(dt).map_err(|e| e.to_string())?;
    let summary = criterion.summary();
    let (t, v) = run.points.iter().copied().unzip();
    to_json(&RiccatiView {
        c: summary.c,
        applies: summary.applies,
        t_bound: summary.t_bound,
        escape_time: run.escape_time,
        t,
        v,
    })
}
