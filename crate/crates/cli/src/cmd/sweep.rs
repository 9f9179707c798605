use std::io::Write;

use clap::Args;
use dp2::emden::{integrate, EmdenError, EmdenProblem};
use dp2::io::fmt_real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmd::emden;
use crate::config::words;
use crate::error::CliError;
use crate::output::{render, Output, Summary};

const KEYS: [&str; 6] = ["xi", "kappa", "mu", "a0", "a1", "s_max"];

#[derive(Debug, Args, Serialize)]
pub struct Flags {
    /// Axes as `name=start:stop:count`, e.g. `xi=-2:-0.5:4`.
    #[arg(long, num_args = 1..)]
    grid: Option<Vec<String>>,
    /// Draw this many uniform samples from the axis ranges instead of
    /// enumerating the lattice.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Also write each run's trajectory into `run_NNNN/`.
    #[arg(long)]
    save_runs: Option<bool>,
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    #[serde(deserialize_with = "words")]
    pub grid: Vec<String>,
    pub samples: usize,
    pub seed: u64,
    pub xi: f64,
    pub kappa: f64,
    pub mu: f64,
    pub a0: f64,
    pub a1: f64,
    pub s_max: f64,
    pub tol: f64,
    pub save_runs: bool,
}

impl Default for Config {
    fn default() -> Self {
        let e = emden::Config { tol: 1e-10, ..emden::Config::default() };
        Self {
            grid: Vec::new(),
            samples: 0,
            seed: 0,
            xi: e.xi,
            kappa: e.kappa,
            mu: e.mu,
            a0: e.a0,
            a1: e.a1,
            s_max: e.s_max,
            tol: e.tol,
            save_runs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: usize,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::invalid("grid", format!("`{spec}`: {why}"));
        let (name, range) = spec.split_once('=').ok_or_else(|| bad("expected name=start:stop:count"))?;
        let key = KEYS
            .iter()
            .position(|k| *k == name)
            .ok_or_else(|| bad(&format!("unknown parameter `{name}`, expected one of {}", KEYS.join(", "))))?;
        let parts: Vec<&str> = range.split(':').collect();
        if !(parts.len() == 2 || parts.len() == 3) {
            return Err(bad("expected start:stop:count"));
        }
        let real = |s: &str| {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("bounds must be finite numbers"))
        };
        let (start, stop) = (real(parts[0])?, real(parts[1])?);
        let count = match parts.get(2) {
            Some(c) => {
                c.parse::<usize>().ok().filter(|&c| c > 0).ok_or_else(|| bad("count must be a positive integer"))?
            }
            None => 1,
        };
        if count == 1 && start != stop && parts.len() == 3 {
            return Err(bad("a single point needs start = stop"));
        }
        Ok(Self { key, start, stop, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

impl Config {
    fn base(&self) -> [f64; 6] {
        [self.xi, self.kappa, self.mu, self.a0, self.a1, self.s_max]
    }

    /// Parameter vectors in output order: lattice with the first axis
    /// slowest, or `samples` seeded draws.
    pub fn points(&self) -> Result<Vec<[f64; 6]>, CliError> {
        let axes = self.grid.iter().map(|s| Axis::parse(s)).collect::<Result<Vec<_>, _>>()?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.key == a.key) {
                return Err(CliError::invalid("grid", format!("`{}` appears twice", KEYS[a.key])));
            }
        }
        let mut points = vec![self.base()];
        if self.samples > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            points = (0..self.samples)
                .map(|_| {
                    let mut p = self.base();
                    for a in &axes {
                        let (lo, hi) = (a.start.min(a.stop), a.start.max(a.stop));
                        p[a.key] = if lo < hi { rng.random_range(lo..hi) } else { lo };
                    }
                    p
                })
                .collect();
        } else {
            for a in &axes {
                points = points
                    .iter()
                    .flat_map(|p| {
                        a.values().into_iter().map(move |v| {
                            let mut q = *p;
                            q[a.key] = v;
                            q
                        })
                    })
                    .collect();
            }
        }
        Ok(points)
    }
}

fn problem(p: &[f64; 6]) -> EmdenProblem {
    EmdenProblem::new(p[0], p[1], p[3], p[4], p[5]).with_mu(p[2])
}

struct Row {
    point: [f64; 6],
    fate: String,
    s: Option<f64>,
    drift: Option<f64>,
    classification: String,
}

#[derive(Serialize)]
struct Report {
    runs: usize,
    fates: Vec<(String, usize)>,
}

pub fn run(config: Config, out: &Output) -> Result<(), CliError> {
    let points = config.points()?;
    // reject the whole sweep before any run starts
    for p in &points {
        problem(p).validate()?;
    }
    if !(config.tol > 0.0 && config.tol <= 1e-3) {
        return Err(EmdenError::BadTolerance(config.tol).into());
    }

    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let problem = problem(p);
            let classification = emden::prediction(&problem).map_or_else(String::new, |c| format!("{c:?}"));
            match integrate(&problem, config.tol) {
                Ok(traj) => {
                    if config.save_runs {
                        let dir = out.nested(&format!("run_{i:04}"));
                        dir.write("trajectory.csv", &render(|w| traj.write_csv(w))?)?;
                    }
                    let fate = traj.fate();
                    Ok(Row {
                        point: *p,
                        fate: fate.name().to_owned(),
                        s: fate.time(),
                        drift: Some(traj.energy_drift_max()),
                        classification,
                    })
                }
                Err(EmdenError::StepCollapse { .. }) => {
                    Ok(Row { point: *p, fate: "StepCollapse".into(), s: None, drift: None, classification })
                }
                Err(e) => Err(CliError::from(e)),
            }
        })
        .collect::<Result<Vec<Row>, CliError>>()?;

    let csv = render(|w| {
        writeln!(w, "index,{},fate,S,energy_drift_max,classification", KEYS.join(","))?;
        for (i, r) in rows.iter().enumerate() {
            let nums: Vec<String> = r.point.iter().map(|&v| fmt_real(v)).collect();
            let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_real);
            writeln!(w, "{i},{},{},{},{},{}", nums.join(","), r.fate, opt(r.s), opt(r.drift), r.classification)?;
        }
        Ok(())
    })?;
    out.write("sweep.csv", &csv)?;

    let mut fates: Vec<(String, usize)> = Vec::new();
    for r in &rows {
        match fates.iter_mut().find(|(f, _)| *f == r.fate) {
            Some((_, n)) => *n += 1,
            None => fates.push((r.fate.clone(), 1)),
        }
    }
    let result = Report { runs: rows.len(), fates };
    let json = out.write_json("summary.json", &Summary { command: "sweep", result, config: &config })?;
    out.echo(&csv, &json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a = Axis::parse("xi=-2:-0.5:4").unwrap();
        assert_eq!(a.values(), vec![-2.0, -1.5, -1.0, -0.5]);
        assert_eq!(Axis::parse("a1=0.3:0.3:1").unwrap().values(), vec![0.3]);
        for bad in ["xi", "nope=0:1:2", "xi=0:1:0", "xi=a:1:2", "xi=0:1:1", "xi=0"] {
            assert!(matches!(Axis::parse(bad), Err(CliError::Invalid { .. })), "{bad}");
        }
    }

    #[test]
    fn lattice_order_and_size() {
        let config = Config { grid: vec!["xi=-2:-0.5:4".into(), "kappa=0.25:1:4".into()], ..Config::default() };
        let pts = config.points().unwrap();
        assert_eq!(pts.len(), 16);
        assert_eq!((pts[0][0], pts[0][1]), (-2.0, 0.25));
        assert_eq!((pts[1][0], pts[1][1]), (-2.0, 0.5));
        assert_eq!((pts[15][0], pts[15][1]), (-0.5, 1.0));
        let twice = Config { grid: vec!["xi=0:1:2".into(), "xi=0:1:2".into()], ..Config::default() };
        assert!(twice.points().is_err());
    }

    #[test]
    fn random_points_follow_the_seed() {
        let config = Config { grid: vec!["xi=-2:2".into()], samples: 5, seed: 3, ..Config::default() };
        let a = config.points().unwrap();
        assert_eq!(a, config.points().unwrap());
        assert!(a.iter().all(|p| (-2.0..2.0).contains(&p[0]) && p[1] == 0.5));
        assert_ne!(a, Config { seed: 4, ..config }.points().unwrap());
    }
}
