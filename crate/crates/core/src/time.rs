//! Explicit Runge-Kutta integration: fixed-step RK4 and the adaptive
//! Dormand-Prince 5(4) pair with PI step-size control. Both land exactly on
//! equispaced snapshot times, where an observer is called.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Discretization;

/// Right-hand side of du/dt = f(t, u).
pub trait OdeSystem {
    fn dimension(&self) -> usize;
    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()>;
}

impl OdeSystem for Discretization {
    fn dimension(&self) -> usize {
        self.state_len()
    }

    fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        self.time_derivative(u, du).map(|_| ())
    }
}

/// Adapter for closures, mostly for tests.
pub struct FnSystem<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for FnSystem<F> {
    fn dimension(&self) -> usize {
        self.n
    }

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<()> {
        (self.f)(t, u, du);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk4,
    Dp54,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub scheme: Scheme,
    /// Fixed step for RK4 and initial step for DP5(4). When absent it is
    /// derived from `cfl` by the caller.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Smallest accepted step before giving up.
    pub dt_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            scheme: Scheme::Rk4,
            dt: None,
            cfl: 1.0,
            rtol: 1e-10,
            atol: 1e-12,
            dt_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Snapshot times t0 + k(t_final − t0)/n for k = 0..=n.
pub fn snapshot_times(t0: f64, t_final: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| if k == n { t_final } else { t0 + (t_final - t0) * k as f64 / n as f64 })
        .collect()
}

fn axpy_into(out: &mut [f64], u: &[f64], terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut s = u[i];
        for (a, k) in terms {
            s += a * k[i];
        }
        out[i] = s;
    }
}

fn check_finite(u: &[f64], t: f64) -> Result<()> {
    if u.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InadmissibleState(if t.is_finite() { "non-finite stage value" } else { "non-finite time" }))
    }
}

/// Advances `u` from `t0` to `t_final`, calling `observe(t, u)` at each of
/// the `snapshots + 1` snapshot times (including t0 and t_final).
pub fn integrate<S, O>(
    sys: &S,
    u: &mut [f64],
    t0: f64,
    t_final: f64,
    snapshots: usize,
    settings: &IntegratorSettings,
    mut observe: O,
) -> Result<IntegrationStats>
where
    S: OdeSystem + ?Sized,
    O: FnMut(f64, &[f64]) -> Result<()>,
{
    if u.len() != sys.dimension() {
        return Err(Error::DimensionMismatch {
            expected: sys.dimension(),
            got: u.len(),
        });
    }
    let dt = settings
        .dt
        .filter(|d| *d > 0.0 && d.is_finite())
        .ok_or_else(|| Error::Config("integrator needs a positive time step".into()))?;
    let times = snapshot_times(t0, t_final, snapshots);
    observe(t0, u)?;
    let mut stats = IntegrationStats::default();
    match settings.scheme {
        Scheme::Rk4 => {
            let mut rk = Rk4Work::new(u.len());
            for w in times.windows(2) {
                let span = w[1] - w[0];
                let n = (span / dt).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for s in 0..n {
                    let t = w[0] + s as f64 * h;
                    rk.step(sys, t, h, u)?;
                    stats.steps += 1;
                    stats.rhs_evals += 4;
                    if stats.steps > settings.max_steps {
                        return Err(Error::StepSizeUnderflow { t, dt: h });
                    }
                }
                observe(w[1], u)?;
            }
        }
        Scheme::Dp54 => {
            let mut dp = Dp54Work::new(u.len());
            let mut h = dt;
            let mut t = t0;
            sys.rhs(t, u, &mut dp.k[0])?;
            stats.rhs_evals += 1;
            for &target in &times[1..] {
                while t < target {
                    let remaining = target - t;
                    let last = h >= remaining * (1.0 - 1e-12);
                    let hs = if last { remaining } else { h };
                    match dp.attempt(sys, t, hs, u, settings)? {
                        Some(next_h) => {
                            t = if last { target } else { t + hs };
                            stats.steps += 1;
                            if !last || next_h < h {
                                h = next_h;
                            }
                        }
                        None => {
                            stats.rejected += 1;
                            h = dp.shrunk;
                        }
                    }
                    stats.rhs_evals += 6;
                    if h < settings.dt_min || stats.steps + stats.rejected > settings.max_steps {
                        return Err(Error::StepSizeUnderflow { t, dt: h });
                    }
                }
                observe(target, u)?;
            }
        }
    }
    Ok(stats)
}

struct Rk4Work {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        Rk4Work {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, h: f64, u: &mut [f64]) -> Result<()> {
        let [k1, k2, k3, k4] = &mut self.k;
        sys.rhs(t, u, k1)?;
        axpy_into(&mut self.tmp, u, &[(0.5 * h, k1)]);
        sys.rhs(t + 0.5 * h, &self.tmp, k2)?;
        axpy_into(&mut self.tmp, u, &[(0.5 * h, k2)]);
        sys.rhs(t + 0.5 * h, &self.tmp, k3)?;
        axpy_into(&mut self.tmp, u, &[(h, k3)]);
        sys.rhs(t + h, &self.tmp, k4)?;
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_finite(u, t + h)
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order solution minus embedded fourth-order solution.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dp54Work {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    err_prev: f64,
    shrunk: f64,
}

impl Dp54Work {
    fn new(n: usize) -> Self {
        Dp54Work {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            err_prev: 1e-4,
            shrunk: 0.0,
        }
    }

    /// One attempted step from `k[0] = f(t, u)`. On acceptance updates `u`,
    /// keeps the FSAL stage in `k[0]` and returns the proposed next step.
    fn attempt<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t: f64,
        h: f64,
        u: &mut [f64],
        settings: &IntegratorSettings,
    ) -> Result<Option<f64>> {
        const SAFETY: f64 = 0.9;
        const BETA: f64 = 0.04;
        const ALPHA: f64 = 0.2 - 0.75 * BETA;
        for s in 1..7 {
            let (done, rest) = self.k.split_at_mut(s);
            let terms: Vec<(f64, &[f64])> = (0..s)
                .filter(|&j| DP_A[s][j] != 0.0)
                .map(|j| (h * DP_A[s][j], done[j].as_slice()))
                .collect();
            axpy_into(&mut self.tmp, u, &terms);
            if s == 6 {
                check_finite(&self.tmp, t + h)?;
            }
            sys.rhs(t + DP_C[s] * h, &self.tmp, &mut rest[0])?;
        }
        // tmp holds the fifth-order solution (stage 7 abscissa equals it).
        let mut acc = 0.0;
        for i in 0..u.len() {
            let mut e = 0.0;
            for (s, k) in self.k.iter().enumerate() {
                e += DP_E[s] * k[i];
            }
            let sc = settings.atol + settings.rtol * u[i].abs().max(self.tmp[i].abs());
            acc += (h * e / sc).powi(2);
        }
        let err = (acc / u.len().max(1) as f64).sqrt();
        if err <= 1.0 {
            let fac = (err.max(1e-10).powf(-ALPHA) * self.err_prev.powf(BETA) * SAFETY).clamp(0.2, 5.0);
            self.err_prev = err.max(1e-4);
            u.copy_from_slice(&self.tmp);
            self.k.swap(0, 6);
            Ok(Some(h * fac))
        } else {
            let fac = (err.powf(-ALPHA) * SAFETY).clamp(0.1, 1.0);
            self.shrunk = h * fac;
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> FnSystem<impl Fn(f64, &[f64], &mut [f64])> {
        FnSystem {
            n: 2,
            f: |t: f64, u: &[f64], du: &mut [f64]| {
                du[0] = -u[0];
                du[1] = -2.0 * u[1] + t.cos();
            },
        }
    }

    fn exact(t: f64) -> [f64; 2] {
        // u1' = -2 u1 + cos t, u1(0) = 1.
        let a = (2.0 * t.cos() + t.sin()) / 5.0;
        [(-t).exp(), a + (1.0 - 0.4) * (-2.0 * t).exp()]
    }

    fn error_at(settings: IntegratorSettings) -> f64 {
        let mut u = [1.0, 1.0];
        integrate(&decay(), &mut u, 0.0, 2.0, 4, &settings, |_, _| Ok(())).unwrap();
        let e = exact(2.0);
        (u[0] - e[0]).abs().max((u[1] - e[1]).abs())
    }

    #[test]
    fn rk4_observed_order_is_four() {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dt| {
                error_at(IntegratorSettings {
                    dt: Some(dt),
                    ..Default::default()
                })
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 4.0).abs() < 0.1, "order {order}");
        }
    }

    #[test]
    fn dp54_meets_tolerance() {
        for rtol in [1e-6, 1e-9] {
            let err = error_at(IntegratorSettings {
                scheme: Scheme::Dp54,
                dt: Some(0.1),
                rtol,
                atol: rtol,
                ..Default::default()
            });
            assert!(err < 50.0 * rtol, "rtol {rtol}: {err:e}");
        }
    }

    #[test]
    fn snapshots_hit_requested_times() {
        for scheme in [Scheme::Rk4, Scheme::Dp54] {
            let mut seen = Vec::new();
            let mut u = [1.0, 1.0];
            let s = IntegratorSettings {
                scheme,
                dt: Some(0.07),
                ..Default::default()
            };
            integrate(&decay(), &mut u, 0.0, 1.0, 10, &s, |t, _| {
                seen.push(t);
                Ok(())
            })
            .unwrap();
            assert_eq!(seen.len(), 11);
            for (k, t) in seen.iter().enumerate() {
                assert!((t - k as f64 / 10.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stage_failures_abort() {
        let sys = FnSystem {
            n: 1,
            f: |_: f64, u: &[f64], du: &mut [f64]| du[0] = if u[0] > 1.5 { f64::NAN } else { 1.0 },
        };
        let mut u = [1.0];
        let s = IntegratorSettings {
            dt: Some(0.1),
            ..Default::default()
        };
        let r = integrate(&sys, &mut u, 0.0, 1.0, 1, &s, |_, _| Ok(()));
        assert!(matches!(r, Err(Error::InadmissibleState(_))));
    }
}
