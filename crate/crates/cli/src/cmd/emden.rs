use clap::Args;
use dp2::emden::{classify, integrate, Classification, EmdenProblem, Sample};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{render, Output, Summary};

#[derive(Debug, Args, Serialize)]
pub struct Flags {
    /// Coupling constant (negative attracts `a` toward zero).
    #[arg(long)]
    xi: Option<f64>,
    /// Exponent of `a` in the denominator.
    #[arg(long)]
    kappa: Option<f64>,
    /// Normalization, 1 or 4.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    /// Integration horizon in scaled time.
    #[arg(long)]
    s_max: Option<f64>,
    /// Local error tolerance of the integrator.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub xi: f64,
    pub kappa: f64,
    pub mu: f64,
    pub a0: f64,
    pub a1: f64,
    pub s_max: f64,
    pub tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self { xi: -1.0, kappa: 0.5, mu: 4.0, a0: 1.0, a1: 0.0, s_max: 10.0, tol: 1e-12 }
    }
}

impl Config {
    pub fn problem(&self) -> EmdenProblem {
        EmdenProblem::new(self.xi, self.kappa, self.a0, self.a1, self.s_max).with_mu(self.mu)
    }
}

#[derive(Serialize)]
struct Report {
    fate: String,
    #[serde(rename = "S")]
    s: Option<f64>,
    energy_drift_max: f64,
    classification: Option<Classification>,
    end: Sample,
}

/// Qualitative prediction, only defined for `0 < kappa <= 1`.
pub fn prediction(problem: &EmdenProblem) -> Option<Classification> {
    classify(problem).ok()
}

pub fn run(config: Config, out: &Output) -> Result<(), CliError> {
    let problem = config.problem();
    problem.validate()?;
    let traj = integrate(&problem, config.tol)?;
    let summary = traj.summary();
    let report = Report {
        fate: summary.fate,
        s: summary.s,
        energy_drift_max: summary.energy_drift_max,
        classification: prediction(&problem),
        end: *traj.samples().last().expect("a trajectory has at least one sample"),
    };
    let csv = render(|w| traj.write_csv(w))?;
    out.write("trajectory.csv", &csv)?;
    let json = out.write_json("summary.json", &Summary { command: "emden", result: report, config: &config })?;
    out.echo(&csv, &json)
}
