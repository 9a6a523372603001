//! Initial conditions and exact solutions of the test problems.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{Gas, State};
use crate::reference::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// Sinusoidal density profile advected with unit velocity in each direction.
    DensityWave,
    /// Kelvin-Helmholtz instability (two dimensions only).
    Khi,
    /// Inviscid Taylor-Green vortex (three dimensions only).
    Tgv,
    /// Uniform flow with unit speed along the diagonal.
    FreeStream,
}

impl Problem {
    /// Side length of the periodic domain (0, L)^d.
    pub fn default_length(self) -> f64 {
        match self {
            Problem::Tgv => 2.0 * PI,
            _ => 2.0,
        }
    }

    pub fn check_dim(self, d: usize) -> Result<()> {
        match (self, d) {
            (Problem::Khi, 3) => Err(Error::Config("problem 'khi' is two-dimensional".into())),
            (Problem::Tgv, 2) => Err(Error::Config("problem 'tgv' is three-dimensional".into())),
            _ => Ok(()),
        }
    }

    pub fn has_exact_solution(self) -> bool {
        matches!(self, Problem::DensityWave | Problem::FreeStream)
    }
}

/// A problem instance with its parameters bound.
#[derive(Debug, Clone, Copy)]
pub struct ProblemSetup {
    pub problem: Problem,
    pub dim: usize,
    pub l: f64,
    pub mach: f64,
    pub gas: Gas,
}

impl ProblemSetup {
    fn primitive_state(&self, x: &Point) -> (f64, [f64; 3], f64) {
        let d = self.dim;
        match self.problem {
            Problem::DensityWave => {
                let s: f64 = x[..d].iter().sum();
                let mut v = [0.0; 3];
                v[..d].iter_mut().for_each(|c| *c = 1.0);
                (1.0 + 0.2 * (2.0 * PI / self.l * s).sin(), v, 1.0)
            }
            Problem::Khi => {
                let b = (15.0 * (x[1] - 0.5)).tanh() - (15.0 * (x[1] - 1.5)).tanh();
                (0.5 + 0.75 * b, [0.5 * (b - 1.0), 0.1 * (2.0 * PI * x[0]).sin(), 0.0], 1.0)
            }
            Problem::Tgv => {
                let (s1, c1) = x[0].sin_cos();
                let (s2, c2) = x[1].sin_cos();
                let c3 = x[2].cos();
                let v = [s1 * c2 * c3, -c1 * s2 * c3, 0.0];
                let p = 1.0 / (self.gas.gamma * self.mach * self.mach)
                    + (1.0 / 16.0)
                        * ((2.0 * x[0]).cos()
                            + 2.0 * (2.0 * x[1]).cos()
                            + (2.0 * x[0]).cos() * (2.0 * x[2]).cos()
                            + (2.0 * x[1]).cos() * (2.0 * x[2]).cos());
                (1.0, v, p)
            }
            Problem::FreeStream => {
                let s = 1.0 / (d as f64).sqrt();
                let mut v = [0.0; 3];
                v[..d].iter_mut().for_each(|c| *c = s);
                (1.0, v, 1.0)
            }
        }
    }

    pub fn initial(&self, x: &Point) -> State {
        let (rho, v, p) = self.primitive_state(x);
        self.gas.conserved(rho, v, p)
    }

    /// Exact solution at time t, when one is known.
    pub fn exact(&self, t: f64, x: &Point) -> Option<State> {
        match self.problem {
            Problem::DensityWave => {
                let mut y = *x;
                y[..self.dim].iter_mut().for_each(|c| *c -= t);
                Some(self.initial(&y))
            }
            Problem::FreeStream => Some(self.initial(x)),
            _ => None,
        }
    }
}
