use clap::Args;
use dp2::grid::Grid1D;
use dp2::residual::{convergence_study, residuals, write_residual_csv, OrderEstimate, ResidualReport, StudyConfig};
use serde::{Deserialize, Serialize};

use crate::cmd::selfsim;
use crate::config::reals;
use crate::error::{residual_error, CliError};
use crate::output::{render, Output, Summary};

#[derive(Debug, Args, Serialize)]
pub struct Flags {
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    k3: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    /// Evaluation time.
    #[arg(long)]
    t: Option<f64>,
    /// Grid spacings, coarse to fine, with a fixed ratio.
    #[arg(long, value_delimiter = ',')]
    hs: Option<Vec<f64>>,
    #[arg(long)]
    half_extent: Option<f64>,
    /// Width excluded next to the support edges.
    #[arg(long)]
    band: Option<f64>,
    /// Time step as a multiple of the grid spacing.
    #[arg(long)]
    dt_over_h: Option<f64>,
    /// Smallest accepted convergence order.
    #[arg(long)]
    min_order: Option<f64>,
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
    pub t: f64,
    #[serde(deserialize_with = "reals")]
    pub hs: Vec<f64>,
    pub half_extent: f64,
    pub band: f64,
    pub dt_over_h: f64,
    pub min_order: f64,
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
            t: 1.0,
            hs: vec![8e-3, 4e-3, 2e-3, 1e-3],
            half_extent: 3.0,
            band: 0.1,
            dt_over_h: 0.1,
            min_order: 1.7,
        }
    }
}

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    study: ResidualReport,
    pass: bool,
}

fn passes(order: OrderEstimate, min: f64) -> bool {
    match order {
        OrderEstimate::Value(v) => v >= min,
        // exact zero residual on every level
        OrderEstimate::NotApplicable => true,
    }
}

pub fn run(config: Config, out: &Output) -> Result<(), CliError> {
    for (key, value) in [("band", config.band), ("dt_over_h", config.dt_over_h), ("half_extent", config.half_extent)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(CliError::invalid(key, format!("must be finite and non-negative, got {value}")));
        }
    }
    if config.hs.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(CliError::invalid("hs", "spacings must be positive"));
    }
    let sol = selfsim::Config {
        k1: config.k1,
        k2: config.k2,
        k3: config.k3,
        xi: config.xi,
        alpha: config.alpha,
        a0: config.a0,
        a1: config.a1,
        s_max: config.s_max,
        ..selfsim::Config::default()
    }
    .solution()?;
    let grids = config
        .hs
        .iter()
        .map(|&h| Grid1D::centered_with_spacing(h, config.half_extent))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::invalid("hs", e))?;
    let study_config = StudyConfig { dt_over_h: config.dt_over_h, band: config.band };
    let study =
        convergence_study(&sol, sol.params(), config.t, &grids, study_config).map_err(|e| residual_error(e, "t"))?;

    let finest = grids.iter().min_by(|a, b| a.spacing().total_cmp(&b.spacing())).expect("at least 3 grids");
    let h = finest.spacing();
    let (r1, r2) =
        residuals(&sol, sol.params(), config.t, finest, h, config.dt_over_h * h).map_err(|e| residual_error(e, "t"))?;
    let csv = render(|w| write_residual_csv(w, finest, &r1, &r2))?;
    out.write("residual.csv", &csv)?;

    let pass =
        passes(study.order_estimate_mass, config.min_order) && passes(study.order_estimate_momentum, config.min_order);
    let (mass, momentum) = (study.order_estimate_mass, study.order_estimate_momentum);
    let json =
        out.write_json("report.json", &Summary { command: "verify", result: Report { study, pass }, config: &config })?;
    out.echo(&csv, &json)?;
    if !pass {
        let show = |o: OrderEstimate| o.value().map_or_else(|| "exact".to_owned(), |v| format!("{v:.3}"));
        return Err(CliError::VerifyFailed(format!(
            "orders {} (mass) and {} (momentum), need at least {}",
            show(mass),
            show(momentum),
            config.min_order
        )));
    }
    Ok(())
}
