//! L² errors against exact solutions, integrated with a collapsed tensor
//! Gauss rule of index 20 per direction and the exact mapping determinant.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::euler::{State, NUM_VARS};
use crate::harness::problems::ProblemSetup;
use crate::mesh::{det, mapping_jacobian};
use crate::pkd::pkd_eval_eta;
use crate::quadrature::{build_rule, JacobiWeight, RuleKind};
use crate::reference::{collapsed_map, ElementType, Point};
use crate::solver::Discretization;

/// Index of the one-dimensional rules (21 points per direction).
pub const ERROR_RULE_INDEX: usize = 20;

/// Quadrature on the reference simplex: points and weights.
pub fn collapsed_rule(element: ElementType, index: usize) -> Result<(Vec<Point>, Vec<f64>)> {
    let a = build_rule(RuleKind::Gauss, JacobiWeight::LEGENDRE, index)?;
    let b = build_rule(RuleKind::Gauss, JacobiWeight { a: 1.0, b: 0.0 }, index)?;
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    match element {
        ElementType::Triangle => {
            for (y, wy) in b.nodes.iter().zip(&b.weights) {
                for (x, wx) in a.nodes.iter().zip(&a.weights) {
                    pts.push(collapsed_map(element, &[*x, *y, 0.0]));
                    wts.push(0.5 * wx * wy);
                }
            }
        }
        ElementType::Tetrahedron => {
            let c = build_rule(RuleKind::Gauss, JacobiWeight { a: 2.0, b: 0.0 }, index)?;
            for (z, wz) in c.nodes.iter().zip(&c.weights) {
                for (y, wy) in b.nodes.iter().zip(&b.weights) {
                    for (x, wx) in a.nodes.iter().zip(&a.weights) {
                        pts.push(collapsed_map(element, &[*x, *y, *z]));
                        wts.push(0.125 * wx * wy * wz);
                    }
                }
            }
        }
    }
    Ok((pts, wts))
}

/// Per-variable L² norms of (numerical − exact) at time t, and of the exact
/// solution itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub error: State,
    pub exact: State,
}

pub fn error_norm(disc: &Discretization, state: &[f64], setup: &ProblemSetup, t: f64) -> Result<ErrorNorms> {
    if !setup.problem.has_exact_solution() {
        return Err(Error::NoExactSolution(format!("{:?}", setup.problem)));
    }
    let element = disc.mesh.element_type();
    let d = element.dim();
    let (pts, wts) = collapsed_rule(element, ERROR_RULE_INDEX)?;
    let np = disc.num_modes();
    let order = &disc.basis.order;
    let mut phi = DMatrix::zeros(pts.len(), np);
    for (k, x) in pts.iter().enumerate() {
        let eta = crate::reference::inverse_collapsed_map(element, x)?;
        for (j, alpha) in order.indices.iter().enumerate() {
            phi[(k, j)] = pkd_eval_eta(element, *alpha, &eta);
        }
    }
    let map = &disc.mesh.mapping;
    let vmap = map.eval_matrix(&pts);
    let grads = map.grad_matrices(&pts);

    let per: Vec<(State, State)> = crate::exec::map_indexed(disc.num_elements(), disc.options.parallel, |kappa| {
        let nodes = &disc.mesh.elements[kappa].nodes;
        let block = &state[kappa * NUM_VARS * np..(kappa + 1) * NUM_VARS * np];
        let mut err = [0.0; NUM_VARS];
        let mut ex = [0.0; NUM_VARS];
        for (k, w) in wts.iter().enumerate() {
            let mut x = [0.0; 3];
            for (i, n) in nodes.iter().enumerate() {
                for c in 0..d {
                    x[c] += vmap[(k, i)] * n[c];
                }
            }
            let jac = det(d, &mapping_jacobian(d, &grads, k, nodes));
            let u_ex = setup.exact(t, &x).expect("exact solution exists");
            for e in 0..NUM_VARS {
                let mut uh = 0.0;
                for j in 0..np {
                    uh += phi[(k, j)] * block[e * np + j];
                }
                err[e] += w * jac * (uh - u_ex[e]).powi(2);
                ex[e] += w * jac * u_ex[e].powi(2);
            }
        }
        (err, ex)
    });
    let mut out = ErrorNorms {
        error: [0.0; NUM_VARS],
        exact: [0.0; NUM_VARS],
    };
    for (e, x) in per {
        for k in 0..NUM_VARS {
            out.error[k] += e[k];
            out.exact[k] += x[k];
        }
    }
    for k in 0..NUM_VARS {
        out.error[k] = out.error[k].sqrt();
        out.exact[k] = out.exact[k].sqrt();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Gas;
    use crate::harness::problems::Problem;
    use crate::mesh::MeshSpec;
    use crate::geometry::MetricKind;
    use crate::solver::{DiscretizationSpec, SolverOptions};

    #[test]
    fn collapsed_rule_integrates_monomials() {
        for el in [ElementType::Triangle, ElementType::Tetrahedron] {
            let (p, w) = collapsed_rule(el, 6).unwrap();
            for alpha in crate::reference::monomial_exponents(el.dim(), 12) {
                let q: f64 = p.iter().zip(&w).map(|(x, w)| w * crate::reference::monomial(&alpha, x)).sum();
                let exact = crate::reference::simplex_monomial_integral(el, &alpha);
                assert!((q - exact).abs() < 1e-13, "{el} {alpha:?}");
            }
        }
    }

    #[test]
    fn zero_field_gives_norm_of_exact_solution() {
        // ‖ρ‖² over (0,2)² for ρ = 1 + 0.2 sin(π(x+y)) is 4(1 + 0.02).
        let spec = DiscretizationSpec {
            mesh: MeshSpec {
                element: ElementType::Triangle,
                m: 2,
                l: 2.0,
                eps: 1.0 / 16.0,
                pg: 3,
            },
            q: 3,
            p: 3,
            metric: MetricKind::Exact,
            gamma: 1.4,
        };
        let disc = Discretization::build(&spec, SolverOptions::default()).unwrap();
        let setup = ProblemSetup {
            problem: Problem::DensityWave,
            dim: 2,
            l: 2.0,
            mach: 0.1,
            gas: Gas::default(),
        };
        let zero = vec![0.0; disc.state_len()];
        let n = error_norm(&disc, &zero, &setup, 0.3).unwrap();
        assert!((n.error[0] - (4.0f64 * 1.02).sqrt()).abs() < 1e-12);
        assert_eq!(n.error[0], n.exact[0]);
    }

    #[test]
    fn exact_representation_has_zero_error() {
        let spec = DiscretizationSpec {
            mesh: MeshSpec {
                element: ElementType::Tetrahedron,
                m: 2,
                l: 2.0,
                eps: 0.0,
                pg: 1,
            },
            q: 2,
            p: 2,
            metric: MetricKind::CurlForm,
            gamma: 1.4,
        };
        let disc = Discretization::build(&spec, SolverOptions::default()).unwrap();
        let setup = ProblemSetup {
            problem: Problem::FreeStream,
            dim: 3,
            l: 2.0,
            mach: 0.1,
            gas: Gas::default(),
        };
        let st = disc.project(0.0, |x| setup.initial(x));
        let n = error_norm(&disc, &st.coeffs, &setup, 1.0).unwrap();
        assert!(n.error.iter().all(|e| *e < 1e-12), "{:?}", n.error);
    }
}
