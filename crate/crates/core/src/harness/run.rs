//! Case execution, convergence studies, flux counts and operator checks.

use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::euler::{active_vars, NUM_VARS};
use crate::harness::config::RunConfig;
use crate::harness::norms::{error_norm, ErrorNorms};
use crate::harness::problems::ProblemSetup;
use crate::harness::report::{write_errors, write_monitors, ErrorRow, FluxCountRow, VAR_NAMES};
use crate::reference::{
    build_reference_operators, count_two_point_fluxes, multidim_flux_count, multidim_node_counts,
    tensor_flux_count_closed_form, verify_sbp, ElementType, SbpReport,
};
use crate::solver::{Discretization, MonitorSample, ResidualStats, SolutionState, SolverOptions};
use crate::time::{integrate, IntegrationStats};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    /// An inadmissible state stopped the run at time `t`.
    Aborted { t: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub config: RunConfig,
    pub h: f64,
    pub outcome: Outcome,
    /// Last snapshot time reached.
    pub t_reached: f64,
    pub dt: f64,
    pub errors: Option<ErrorNorms>,
    pub monitors: Vec<MonitorSample>,
    /// Flux-call counts of one residual evaluation.
    pub residual_stats: ResidualStats,
    pub integration: IntegrationStats,
    pub wall_time: Duration,
    /// Final state (at `t_reached` when aborted).
    pub state: SolutionState,
}

impl CaseResult {
    pub fn completed(&self) -> bool {
        self.outcome == Outcome::Completed
    }

    pub fn error_rows(&self) -> Vec<ErrorRow> {
        let Some(n) = &self.errors else { return Vec::new() };
        let c = &self.config;
        active_vars(c.mesh.element.dim())
            .iter()
            .map(|&e| ErrorRow {
                element: c.mesh.element,
                q: c.scheme.q,
                p: c.p(),
                m: c.mesh.m,
                var: VAR_NAMES[e],
                error: n.error[e],
                order: None,
            })
            .collect()
    }

    /// Writes `errors.csv` (when an exact solution exists) and `monitors.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        if self.errors.is_some() {
            write_errors(&dir.join("errors.csv"), &self.error_rows())?;
        }
        write_monitors(&dir.join("monitors.csv"), self.config.mesh.element.dim(), &self.monitors)
    }
}

pub fn build_discretization(cfg: &RunConfig) -> Result<Discretization> {
    let options = SolverOptions {
        interface: cfg.scheme.flux,
        parallel: cfg.scheme.parallel && crate::exec::parallel_available(),
        ..SolverOptions::default()
    };
    Discretization::build(&cfg.discretization_spec(), options)
}

/// Largest |v|+c over the volume nodes of a state.
pub fn max_wave_speed(disc: &Discretization, state: &[f64]) -> Result<f64> {
    let mut lam: f64 = 0.0;
    for kappa in 0..disc.num_elements() {
        for u in disc.nodal_values(state, kappa) {
            let w = disc.gas.primitive(&u)?;
            let speed = w.v.iter().map(|x| x * x).sum::<f64>().sqrt();
            lam = lam.max(speed + (disc.gas.gamma * w.p / w.rho).sqrt());
        }
    }
    Ok(lam)
}

/// dt = cfl · h / (d λ_max (p + 1)²).
pub fn cfl_time_step(disc: &Discretization, state: &[f64], cfl: f64) -> Result<f64> {
    let lam = max_wave_speed(disc, state)?;
    let p = disc.basis.p as f64;
    let d = disc.dim() as f64;
    Ok(cfl * disc.mesh.spec.h() / (d * lam * (p + 1.0).powi(2)))
}

pub fn run_case(cfg: &RunConfig) -> Result<CaseResult> {
    cfg.validate()?;
    let start = Instant::now();
    let disc = build_discretization(cfg)?;
    let setup: ProblemSetup = cfg.problem_setup();
    let mut state = disc.project(0.0, |x| setup.initial(x));
    let mut settings = cfg.time.integrator();
    let dt = match settings.dt {
        Some(dt) => dt,
        None => cfl_time_step(&disc, &state.coeffs, settings.cfl)?,
    };
    settings.dt = Some(dt);

    let mut residual_stats = ResidualStats::default();
    {
        let mut du = vec![0.0; disc.state_len()];
        residual_stats = disc.time_derivative(&state.coeffs, &mut du).unwrap_or(residual_stats);
    }

    let mut monitors = Vec::with_capacity(cfg.time.snapshots + 1);
    let mut t_reached = 0.0;
    let result = integrate(
        &disc,
        &mut state.coeffs,
        0.0,
        cfg.time.t_final,
        cfg.time.snapshots,
        &settings,
        |t, u| {
            let m = disc.monitors(&SolutionState {
                t,
                coeffs: u.to_vec(),
            })?;
            monitors.push(m);
            t_reached = t;
            Ok(())
        },
    );
    let (outcome, integration) = match result {
        Ok(stats) => (Outcome::Completed, stats),
        Err(e) if e.is_admissibility() => (
            Outcome::Aborted {
                t: t_reached,
                reason: e.to_string(),
            },
            IntegrationStats::default(),
        ),
        Err(e) => return Err(e),
    };
    state.t = t_reached;
    let errors = if outcome == Outcome::Completed && setup.problem.has_exact_solution() {
        Some(error_norm(&disc, &state.coeffs, &setup, cfg.time.t_final)?)
    } else {
        None
    };
    Ok(CaseResult {
        config: cfg.clone(),
        h: disc.mesh.spec.h(),
        outcome,
        t_reached,
        dt,
        errors,
        monitors,
        residual_stats,
        integration,
        wall_time: start.elapsed(),
        state,
    })
}

/// Parameter swept by a convergence study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sweep {
    /// Elements per direction.
    M(Vec<usize>),
    /// Polynomial degree, with q = p_g = p for each case.
    P(Vec<usize>),
}

impl FromStr for Sweep {
    type Err = Error;

    /// Accepts `M=2,4,8,16`, `p=1..5` or `p=1,3,5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid sweep '{s}' (expected M=2,4,8 or p=1..5)"));
        let (key, list) = s.split_once('=').ok_or_else(bad)?;
        let values: Vec<usize> = if let Some((a, b)) = list.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            (a..=b).collect()
        } else {
            list.split(',')
                .map(|v| v.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        if values.is_empty() {
            return Err(bad());
        }
        match key.trim() {
            "M" | "m" => Ok(Sweep::M(values)),
            "p" | "P" => Ok(Sweep::P(values)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ErrorRow>,
    pub cases: Vec<CaseResult>,
}

impl ConvergenceStudy {
    /// Error of one variable for each case, in sweep order.
    pub fn errors(&self, var: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.var == var).map(|r| r.error).collect()
    }

    /// Observed orders of one variable between consecutive cases.
    pub fn orders(&self, var: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.var == var).filter_map(|r| r.order).collect()
    }
}

/// Runs every case of a sweep. Orders log(e₁/e₂)/log(h₁/h₂) are attached to
/// M sweeps; failed cases produce NaN errors.
pub fn convergence_study(base: &RunConfig, sweep: &Sweep) -> Result<ConvergenceStudy> {
    let configs: Vec<RunConfig> = match sweep {
        Sweep::M(ms) => ms
            .iter()
            .map(|&m| {
                let mut c = base.clone();
                c.mesh.m = m;
                c
            })
            .collect(),
        Sweep::P(ps) => ps
            .iter()
            .map(|&p| {
                let mut c = base.clone();
                c.scheme.q = p;
                c.scheme.p = None;
                c
            })
            .collect(),
    };
    let mut rows: Vec<ErrorRow> = Vec::new();
    let mut cases = Vec::new();
    let mut prev: Option<(f64, [f64; NUM_VARS])> = None;
    for cfg in configs {
        let case = run_case(&cfg)?;
        let errs = case.errors.map(|n| n.error).unwrap_or([f64::NAN; NUM_VARS]);
        for &e in active_vars(cfg.mesh.element.dim()) {
            let order = match (sweep, prev) {
                (Sweep::M(_), Some((h0, e0))) => Some((e0[e] / errs[e]).ln() / (h0 / case.h).ln()),
                _ => None,
            };
            rows.push(ErrorRow {
                element: cfg.mesh.element,
                q: cfg.scheme.q,
                p: cfg.p(),
                m: cfg.mesh.m,
                var: VAR_NAMES[e],
                error: errs[e],
                order,
            });
        }
        prev = Some((case.h, errs));
        cases.push(case);
    }
    Ok(ConvergenceStudy { rows, cases })
}

/// Two-point flux counts per element for q = 1..=qmax, brute-force counted
/// from the assembled operators, with the multidimensional comparison where
/// the node counts are tabulated.
pub fn count_fluxes(element: ElementType, qmax: usize) -> Result<Vec<FluxCountRow>> {
    (1..=qmax)
        .map(|q| {
            let ops = build_reference_operators(element, q)?;
            let tensor_count = count_two_point_fluxes(&ops);
            let closed = tensor_flux_count_closed_form(element, q);
            if tensor_count != closed {
                return Err(Error::Verification(format!(
                    "{element} q={q}: counted {tensor_count} fluxes, closed form gives {closed}"
                )));
            }
            let md_count = multidim_node_counts(element, q)
                .map(|(nq, nqf)| multidim_flux_count(nq, nqf, element.dim(), element.num_facets()));
            Ok(FluxCountRow {
                q,
                tensor_count,
                md_count,
                ratio: md_count.map(|m| m as f64 / tensor_count as f64),
            })
        })
        .collect()
}

/// Tolerance for each entry of [`SbpReport::entries`].
pub fn operator_tolerance(name: &str) -> f64 {
    match name {
        "derivative" | "extrapolation" => 1e-10,
        _ => 1e-12,
    }
}

/// Builds and checks the reference operators; fails when any residual
/// exceeds its tolerance.
pub fn verify_operators(element: ElementType, q: usize) -> Result<SbpReport> {
    let ops = build_reference_operators(element, q)?;
    let rep = verify_sbp(&ops)?;
    let failed: Vec<String> = rep
        .entries()
        .iter()
        .filter(|(name, v)| !(*v < operator_tolerance(name)))
        .map(|(name, v)| format!("{name} = {v:e}"))
        .collect();
    if failed.is_empty() {
        Ok(rep)
    } else {
        Err(Error::Verification(format!("{element} q={q}: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        assert_eq!("M=2,4,8,16".parse::<Sweep>().unwrap(), Sweep::M(vec![2, 4, 8, 16]));
        assert_eq!("p=1..5".parse::<Sweep>().unwrap(), Sweep::P(vec![1, 2, 3, 4, 5]));
        assert!("q=1".parse::<Sweep>().is_err());
        assert!("M=".parse::<Sweep>().is_err());
    }

    #[test]
    fn flux_count_rows() {
        let rows = count_fluxes(ElementType::Triangle, 2).unwrap();
        assert_eq!(rows[1].tensor_count, 54);
        assert_eq!(rows[1].md_count, Some(84));
        assert!((rows[1].ratio.unwrap() - 1.5556).abs() < 1e-4);
        assert_eq!(rows[0].md_count, None);
    }

    #[test]
    fn short_density_wave_run() {
        let cfg = RunConfig::from_toml(
            r#"
[mesh]
element = "tri"
m = 2
[scheme]
q = 2
parallel = false
[problem]
kind = "density-wave"
[time]
t_final = 0.1
snapshots = 4
"#,
        )
        .unwrap();
        let r = run_case(&cfg).unwrap();
        assert!(r.completed());
        assert_eq!(r.monitors.len(), 5);
        assert!(r.errors.unwrap().error[0] < 0.2);
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        let mon = std::fs::read_to_string(dir.path().join("monitors.csv")).unwrap();
        assert!(mon.lines().nth(1).unwrap().starts_with("t,mass,momentum_1,momentum_2,energy"));
        // Reproducible bitwise.
        let again = run_case(&cfg).unwrap();
        assert_eq!(again.state.coeffs, r.state.coeffs);
    }
}
