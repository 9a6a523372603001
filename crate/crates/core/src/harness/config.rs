//! Run configuration, read from TOML with one table per concern:
//!
//! ```toml
//! [mesh]
//! element = "tri"
//! m = 4
//! eps = 0.0625
//!
//! [scheme]
//! q = 3
//! flux = "es"
//!
//! [problem]
//! kind = "density-wave"
//!
//! [time]
//! t_final = 2.0
//! snapshots = 100
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MetricKind;
use crate::harness::problems::{Problem, ProblemSetup};
use crate::mesh::MeshSpec;
use crate::reference::ElementType;
use crate::solver::{DiscretizationSpec, InterfaceFlux};
use crate::time::{IntegratorSettings, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub element: ElementType,
    pub m: usize,
    /// Domain side length; the problem's default when absent.
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Mapping degree; q when absent.
    #[serde(default)]
    pub pg: Option<usize>,
}

fn default_eps() -> f64 {
    1.0 / 16.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub q: usize,
    /// Solution degree; q when absent.
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default = "default_flux")]
    pub flux: InterfaceFlux,
    #[serde(default)]
    pub metric: Option<MetricKind>,
    #[serde(default = "default_true")]
    pub parallel: bool,
}

fn default_flux() -> InterfaceFlux {
    InterfaceFlux::LaxFriedrichs
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: Problem,
    #[serde(default = "default_mach")]
    pub mach: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_mach() -> f64 {
    0.1
}

fn default_gamma() -> f64 {
    1.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Fixed (RK4) or initial (DP5(4)) step; derived from `cfl` when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

impl TimeConfig {
    pub fn integrator(&self) -> IntegratorSettings {
        IntegratorSettings {
            scheme: self.scheme,
            dt: self.dt,
            cfl: self.cfl,
            rtol: self.rtol,
            atol: self.atol,
            ..IntegratorSettings::default()
        }
    }
}

fn default_scheme() -> Scheme {
    IntegratorSettings::default().scheme
}

fn default_cfl() -> f64 {
    IntegratorSettings::default().cfl
}

fn default_rtol() -> f64 {
    IntegratorSettings::default().rtol
}

fn default_atol() -> f64 {
    IntegratorSettings::default().atol
}

fn default_snapshots() -> usize {
    100
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub scheme: SchemeConfig,
    pub problem: ProblemConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn p(&self) -> usize {
        self.scheme.p.unwrap_or(self.scheme.q)
    }

    pub fn pg(&self) -> usize {
        self.mesh.pg.unwrap_or(self.scheme.q)
    }

    pub fn l(&self) -> f64 {
        self.mesh.l.unwrap_or_else(|| self.problem.kind.default_length())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config(format!("{field}: {msg}")));
        let s = &self.scheme;
        if s.q == 0 {
            return bad("scheme.q", "must be at least 1");
        }
        if self.p() > s.q {
            return bad("scheme.p", "must not exceed scheme.q");
        }
        if self.pg() == 0 {
            return bad("mesh.pg", "must be at least 1");
        }
        if self.mesh.m < 2 {
            return bad("mesh.m", "must be at least 2");
        }
        if !(self.l() > 0.0) {
            return bad("mesh.l", "must be positive");
        }
        if !(self.mesh.eps >= 0.0) {
            return bad("mesh.eps", "must be non-negative");
        }
        if !(self.problem.gamma > 1.0) {
            return bad("problem.gamma", "must exceed 1");
        }
        if !(self.problem.mach > 0.0) {
            return bad("problem.mach", "must be positive");
        }
        if !(self.time.t_final >= 0.0) {
            return bad("time.t_final", "must be non-negative");
        }
        if self.time.snapshots == 0 {
            return bad("time.snapshots", "must be at least 1");
        }
        let it = &self.time;
        if !(it.cfl > 0.0) {
            return bad("time.cfl", "must be positive");
        }
        if !(it.rtol > 0.0 && it.atol > 0.0) {
            return bad("time.rtol", "tolerances must be positive");
        }
        if matches!(it.dt, Some(dt) if !(dt > 0.0)) {
            return bad("time.dt", "must be positive");
        }
        self.problem.kind.check_dim(self.mesh.element.dim())
    }

    pub fn discretization_spec(&self) -> DiscretizationSpec {
        DiscretizationSpec {
            mesh: MeshSpec {
                element: self.mesh.element,
                m: self.mesh.m,
                l: self.l(),
                eps: self.mesh.eps,
                pg: self.pg(),
            },
            q: self.scheme.q,
            p: self.p(),
            metric: self.scheme.metric.unwrap_or(MetricKind::default_for(self.mesh.element)),
            gamma: self.problem.gamma,
        }
    }

    pub fn problem_setup(&self) -> ProblemSetup {
        ProblemSetup {
            problem: self.problem.kind,
            dim: self.mesh.element.dim(),
            l: self.l(),
            mach: self.problem.mach,
            gas: crate::euler::Gas::new(self.problem.gamma),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[mesh]
element = "tri"
m = 4

[scheme]
q = 3
flux = "ec"

[problem]
kind = "density-wave"

[time]
t_final = 2.0
scheme = "dp54"
rtol = 1e-9
"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.p(), 3);
        assert_eq!(c.pg(), 3);
        assert_eq!(c.l(), 2.0);
        assert_eq!(c.mesh.eps, 1.0 / 16.0);
        assert_eq!(c.scheme.flux, InterfaceFlux::EntropyConservative);
        assert_eq!(c.time.snapshots, 100);
        assert_eq!(c.time.rtol, 1e-9);
        let again = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_unknown_fields_with_location() {
        let text = BASE.replace("m = 4", "m = 4\nwarp = 1");
        let e = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(e.contains("warp") && e.contains("line"), "{e}");
    }

    #[test]
    fn validation_names_the_field() {
        let text = BASE.replace("q = 3", "q = 3\np = 4");
        let e = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(e.contains("scheme.p"), "{e}");
        let text = BASE.replace("density-wave", "tgv");
        assert!(RunConfig::from_toml(&text).is_err());
    }
}
