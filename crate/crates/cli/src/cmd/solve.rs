use std::f64::consts::PI;

use clap::{Args, ValueEnum};
use dp2::grid::{Field, Grid1D};
use dp2::pdesolver::{run_blowup_experiment, ExperimentConfig, Outcome, Solver, SolverConfig, SolverError};
use dp2::selfsim::SystemParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{selfsim_error, CliError};
use crate::output::{render, Output, Summary};

/// Odd initial velocities with `u0'(L/2) = -slope`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitialVelocity {
    /// One sine period over the domain.
    Sine,
    /// Derivative of a Gaussian of width `sigma` centred at L/2.
    GaussDeriv,
}

#[derive(Debug, Args, Serialize)]
pub struct Flags {
    /// Grid size (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Period of the domain.
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    k3: Option<f64>,
    #[arg(long, value_enum)]
    u0: Option<InitialVelocity>,
    /// Initial slope magnitude at L/2.
    #[arg(long)]
    slope: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Amplitude of an odd sine density (0 keeps M = 0).
    #[arg(long)]
    rho_amp: Option<f64>,
    /// Amplitude of seeded odd perturbations added to u0.
    #[arg(long)]
    noise: Option<f64>,
    /// Stop once min u_x falls below -threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Bound M fed to the blowup-time estimate.
    #[arg(long)]
    m_est: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    /// Courant number.
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    dealias: Option<bool>,
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub n: usize,
    pub length: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub u0: InitialVelocity,
    pub slope: f64,
    pub sigma: f64,
    pub rho_amp: f64,
    pub noise: f64,
    pub seed: u64,
    pub threshold: f64,
    pub t_max: f64,
    pub m_est: f64,
    pub margin: f64,
    pub cfl: f64,
    pub dealias: bool,
}

impl Default for Config {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        let s = SolverConfig::default();
        Self {
            n: 2048,
            length: 2.0 * PI,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            u0: InitialVelocity::Sine,
            slope: 5.0,
            sigma: 0.4,
            rho_amp: 0.0,
            noise: 0.0,
            seed: 0,
            threshold: e.threshold,
            t_max: e.t_max,
            m_est: e.m_est,
            margin: e.margin,
            cfl: s.cfl,
            dealias: s.dealias,
        }
    }
}

/// `v_j <- (v_j - v_{n-j}) / 2`: removes the rounding-level even part.
fn make_odd(values: &mut [f64]) {
    let n = values.len();
    let copy = values.to_vec();
    for j in 0..n {
        values[j] = 0.5 * (copy[j] - copy[(n - j) % n]);
    }
}

impl Config {
    /// Initial `(rho, u)` on `grid`, odd about the half-period node.
    pub fn initial_data(&self, grid: &Grid1D) -> Result<(Field, Field), CliError> {
        for (key, value) in [("slope", self.slope), ("rho_amp", self.rho_amp), ("noise", self.noise)] {
            if !value.is_finite() {
                return Err(CliError::invalid(key, format!("must be finite, got {value}")));
            }
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(CliError::invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        let l = grid.length();
        let mid = 0.5 * l;
        let k = 2.0 * PI / l;
        let base = |x: f64| match self.u0 {
            InitialVelocity::Sine => self.slope / k * (k * x).sin(),
            InitialVelocity::GaussDeriv => {
                let y = x - mid;
                -self.slope * y * (-y * y / (2.0 * self.sigma * self.sigma)).exp()
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let modes: Vec<f64> = (1..=8).map(|m| self.noise * rng.random_range(-1.0..1.0) / (m * m) as f64).collect();
        let mut u = grid.sample(|x| {
            base(x) + modes.iter().enumerate().map(|(i, c)| c * ((i + 1) as f64 * k * (x - mid)).sin()).sum::<f64>()
        });
        let mut rho = grid.sample(|x| self.rho_amp * (k * x).sin());
        make_odd(&mut u.0);
        make_odd(&mut rho.0);
        Ok((rho, u))
    }
}

#[derive(Serialize)]
struct Report {
    outcome: &'static str,
    crossing_time: Option<f64>,
    v0: f64,
    bound: Option<f64>,
    within_bound: Option<bool>,
    max_oddness: f64,
    steps: usize,
    final_t: f64,
}

pub fn run(config: Config, out: &Output) -> Result<(), CliError> {
    let grid = Grid1D::new(config.n, config.length).map_err(SolverError::Grid)?;
    let params = SystemParams::new(config.k1, config.k2, config.k3).map_err(|e| selfsim_error(e, "t_max"))?;
    let solver_config = SolverConfig { cfl: config.cfl, dealias: config.dealias };
    let solver = Solver::new(grid, params, solver_config)?;
    let (rho, u) = config.initial_data(&grid)?;
    let initial = solver.state(0.0, rho, u)?;
    let experiment = ExperimentConfig {
        threshold: config.threshold,
        t_max: config.t_max,
        m_est: config.m_est,
        margin: config.margin,
    };
    out.write("initial.csv", &render(|w| initial.write_csv(&grid, w))?)?;
    let report = run_blowup_experiment(&solver, initial, &experiment)?;
    out.write("final.csv", &render(|w| report.final_state.write_csv(&grid, w))?)?;
    let csv = render(|w| report.write_csv(w))?;
    out.write("diagnostics.csv", &csv)?;

    let result = Report {
        outcome: match report.outcome {
            Outcome::Crossed(_) => "Crossed",
            Outcome::NoBlowupDetected => "NoBlowupDetected",
        },
        crossing_time: report.crossing_time(),
        v0: report.v0,
        bound: report.bound,
        within_bound: report.within_bound(config.margin),
        max_oddness: report.max_oddness(),
        steps: report.series.len() - 1,
        final_t: report.final_state.t,
    };
    let json = out.write_json("summary.json", &Summary { command: "solve", result, config: &config })?;
    out.echo(&csv, &json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data_is_exactly_odd_with_the_requested_slope() {
        let grid = Grid1D::new(256, 2.0 * PI).unwrap();
        for u0 in [InitialVelocity::Sine, InitialVelocity::GaussDeriv] {
            let config = Config { u0, noise: 0.3, rho_amp: 0.1, seed: 9, ..Config::default() };
            let (rho, u) = config.initial_data(&grid).unwrap();
            assert_eq!(u.oddness_residual(), 0.0);
            assert_eq!(rho.oddness_residual(), 0.0);
            let plain = Config { u0, ..Config::default() }.initial_data(&grid).unwrap().1;
            // centred difference at L/2
            let h = grid.spacing();
            let slope = (plain.values()[129] - plain.values()[127]) / (2.0 * h);
            assert!((slope + 5.0).abs() < 1e-2, "{u0:?}: {slope}");
        }
    }

    #[test]
    fn noise_depends_on_the_seed_only() {
        let grid = Grid1D::new(64, 2.0 * PI).unwrap();
        let make = |seed| Config { noise: 0.5, seed, ..Config::default() }.initial_data(&grid).unwrap().1;
        assert_eq!(make(1), make(1));
        assert_ne!(make(1), make(2));
    }
}
