use clap::Args;
use dp2::grid::Grid1D;
use dp2::io::write_csv;
use dp2::selfsim::{FreeProfile, OriginLimit, SelfSimilarSolution, SnapshotMeta, SystemParams};
use serde::{Deserialize, Serialize};

use crate::config::reals;
use crate::error::{selfsim_error, CliError};
use crate::output::{render, Output, Summary};

#[derive(Debug, Args, Serialize)]
pub struct Flags {
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    k3: Option<f64>,
    /// Separation constant; must share the sign of k3 (both zero selects a
    /// Gaussian free profile).
    #[arg(long)]
    xi: Option<f64>,
    /// Profile amplitude f(0).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    /// Emden horizon in scaled time s = 4t.
    #[arg(long)]
    s_max: Option<f64>,
    /// Snapshot times, comma separated.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Snapshot grid size (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Snapshots cover [-half_extent, half_extent).
    #[arg(long)]
    half_extent: Option<f64>,
    /// Rows of the mass history.
    #[arg(long)]
    mass_samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub xi: f64,
    pub alpha: f64,
    pub a0: f64,
    pub a1: f64,
    pub s_max: f64,
    #[serde(deserialize_with = "reals")]
    pub times: Vec<f64>,
    pub n: usize,
    pub half_extent: f64,
    pub mass_samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            xi: 1.0,
            alpha: 1.0,
            a0: 1.0,
            a1: 0.0,
            s_max: 10.0,
            times: vec![0.0, 0.5, 1.0],
            n: 512,
            half_extent: 3.0,
            mass_samples: 64,
        }
    }
}

impl Config {
    pub fn solution(&self) -> Result<SelfSimilarSolution, CliError> {
        let params = SystemParams::new(self.k1, self.k2, self.k3).map_err(|e| selfsim_error(e, "times"))?;
        let built = if self.k3 == 0.0 && self.xi == 0.0 {
            let alpha = self.alpha;
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(CliError::invalid("alpha", format!("must be finite and non-negative, got {alpha}")));
            }
            FreeProfile::new(move |eta| alpha * (-eta * eta).exp(), 40.0)
                .and_then(|shape| SelfSimilarSolution::free(params, shape, self.a0, self.a1, self.s_max))
        } else {
            SelfSimilarSolution::compact(params, self.xi, self.alpha, self.a0, self.a1, self.s_max)
        };
        built.map_err(|e| selfsim_error(e, "times"))
    }
}

#[derive(Serialize)]
struct Report {
    /// Blowup time `T = S/4` when the scale factor touches down.
    #[serde(rename = "T")]
    t_blowup: Option<f64>,
    horizon: f64,
    origin_limit: String,
    mass_eta: f64,
    snapshots: Vec<SnapshotMeta>,
    /// First requested time at which the solution no longer exists.
    halted_at: Option<f64>,
}

pub fn run(config: Config, out: &Output) -> Result<(), CliError> {
    if config.half_extent.is_nan() || config.half_extent <= 0.0 || config.half_extent.is_infinite() {
        return Err(CliError::invalid("half_extent", format!("must be positive, got {}", config.half_extent)));
    }
    if config.mass_samples < 2 {
        return Err(CliError::invalid("mass_samples", "need at least 2 rows"));
    }
    let grid = Grid1D::with_origin(config.n, 2.0 * config.half_extent, -config.half_extent)
        .map_err(|e| CliError::invalid("n", e))?;
    let sol = config.solution()?;
    let t_blowup = sol.blowup_time();
    let origin_limit = match sol.origin_density_limit() {
        Ok(OriginLimit::DivergesAtT(_)) => "DivergesAtT".to_owned(),
        Ok(OriginLimit::DecaysToZero) => "DecaysToZero".to_owned(),
        Err(e) => format!("Undetermined: {e}"),
    };

    // mass history up to just short of the end of existence
    let t_end = match t_blowup {
        Some(t) => t * (1.0 - 1e-6),
        None => sol.horizon(),
    };
    let last = (config.mass_samples - 1) as f64;
    let mut rows = Vec::with_capacity(config.mass_samples);
    for i in 0..config.mass_samples {
        let t = t_end * i as f64 / last;
        let (a, _) = sol.scale_at(t).map_err(|e| selfsim_error(e, "times"))?;
        let mass = sol.mass(t).map_err(|e| selfsim_error(e, "times"))?;
        let (rho0, _) = sol.evaluate(t, 0.0).map_err(|e| selfsim_error(e, "times"))?;
        rows.push([t, a, mass, rho0]);
    }
    let mass_csv = render(|w| write_csv(w, &["t", "a", "mass", "rho_origin"], &rows))?;
    out.write("mass.csv", &mass_csv)?;

    let mut snapshots = Vec::new();
    let mut failure = None;
    for (i, &t) in config.times.iter().enumerate() {
        match sol.snapshot(t, &grid) {
            Ok(snap) => {
                out.write(&format!("snapshot_{i:03}.csv"), &render(|w| snap.write_csv(w))?)?;
                snapshots.push(snap.meta);
            }
            Err(e) => {
                failure = Some((t, selfsim_error(e, "times")));
                break;
            }
        }
    }
    let report = Report {
        t_blowup,
        horizon: sol.horizon(),
        origin_limit,
        mass_eta: sol.shape().mass_eta(),
        snapshots,
        halted_at: failure.as_ref().map(|(t, _)| *t),
    };
    let json = out.write_json("summary.json", &Summary { command: "selfsim", result: report, config: &config })?;
    if let Some((_, e)) = failure {
        return Err(e);
    }
    out.echo(&mass_csv, &json)
}
