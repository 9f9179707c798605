use clap::Args;
use dp2::riccati::{BlowupCriterion, CriterionSummary};
use serde::{Deserialize, Serialize};

use crate::error::{riccati_error, CliError};
use crate::output::{render, Output, Summary};

#[derive(Debug, Args, Serialize)]
pub struct Flags {
    /// Bound on |u| and |rho| along the characteristic.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    m: Option<f64>,
    /// Initial slope at the symmetry point.
    #[arg(long)]
    v0: Option<f64>,
    /// Largest step of the comparison integration.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    #[serde(rename = "M")]
    pub m: f64,
    pub v0: f64,
    pub dt: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self { m: 0.0, v0: -2.0, dt: 1e-3 }
    }
}

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    criterion: CriterionSummary,
    /// Escape time of the integrated comparison equation.
    escape_time: Option<f64>,
}

pub fn run(config: Config, out: &Output) -> Result<(), CliError> {
    let criterion = BlowupCriterion::new(config.m, config.v0).map_err(|e| riccati_error(e, "M"))?;
    let comparison = criterion.comparison_trajectory(config.dt).map_err(|e| riccati_error(e, "M"))?;
    let csv = render(|w| comparison.write_csv(w))?;
    out.write("comparison.csv", &csv)?;
    let report = Report { criterion: criterion.summary(), escape_time: comparison.escape_time };
    let json = out.write_json("summary.json", &Summary { command: "riccati", result: report, config: &config })?;
    out.echo(&csv, &json)
}
