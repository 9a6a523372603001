//! Geometric factors: metric terms G_lm = J ∂ξ_l/∂x_m, Jacobian determinants,
//! the degree-p_g Jacobian interpolant, and facet Jacobians and normals.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, NodeLocation, Result};
use crate::lagrange::SimplexLagrange;
use crate::mesh::{adjugate, det, mapping_jacobian, Mesh};
use crate::reference::{ElementType, Point, ReferenceOperators};

pub type Mat3 = [[f64; 3]; 3];

/// How the metric terms are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Adjugate of the analytic mapping Jacobian.
    Exact,
    /// Curl of degree-(q+1) interpolants (three dimensions only).
    CurlForm,
}

impl MetricKind {
    pub fn default_for(element: ElementType) -> Self {
        match element {
            ElementType::Triangle => MetricKind::Exact,
            ElementType::Tetrahedron => MetricKind::CurlForm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ElementGeometry {
    /// Physical volume node positions.
    pub x_vol: Vec<Point>,
    /// Physical facet node positions per facet.
    pub x_fac: Vec<Vec<Point>>,
    /// det ∇x at the volume nodes.
    pub det_vol: Vec<f64>,
    /// Degree-p_g interpolant of det ∇x at the volume nodes.
    pub j_p: Vec<f64>,
    /// G at the volume nodes, indexed [l][m].
    pub g_vol: Vec<Mat3>,
    /// G at the facet nodes per facet.
    pub g_fac: Vec<Vec<Mat3>>,
    /// Facet Jacobians J^(κ,ζ) = ‖Gᵀ n̂‖.
    pub j_f: Vec<Vec<f64>>,
    /// Physical outward unit normals.
    pub n_f: Vec<Vec<Point>>,
}

#[derive(Debug, Clone)]
pub struct GeometricFactors {
    pub metric: MetricKind,
    pub elements: Vec<ElementGeometry>,
}

/// Mapping-basis tables at the reference nodes, shared by all elements.
struct MappingTables {
    vol: DMatrix<f64>,
    vol_grad: Vec<DMatrix<f64>>,
    fac: Vec<DMatrix<f64>>,
    fac_grad: Vec<Vec<DMatrix<f64>>>,
    /// Gradients at the mapping nodes themselves (for the Jacobian interpolant).
    node_grad: Vec<DMatrix<f64>>,
}

struct CurlTables {
    basis_len: usize,
    /// Mapping values and gradients at the degree-(q+1) interpolation nodes.
    map_at_nodes: DMatrix<f64>,
    map_grad_at_nodes: Vec<DMatrix<f64>>,
    /// Gradients of the interpolation basis at volume and facet nodes.
    grad_vol: Vec<DMatrix<f64>>,
    grad_fac: Vec<Vec<DMatrix<f64>>>,
}

fn apply_rows(m: &DMatrix<f64>, row: usize, nodes: &[Point], d: usize) -> Point {
    let mut x = [0.0; 3];
    for (i, n) in nodes.iter().enumerate() {
        let w = m[(row, i)];
        for c in 0..d {
            x[c] += w * n[c];
        }
    }
    x
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Curl-form metrics at `p`: column m of G is the curl of an interpolated field.
fn curl_metric(grad: &[DMatrix<f64>], p: usize, fields: &[Vec<[f64; 3]>; 3]) -> Mat3 {
    let mut g = [[0.0; 3]; 3];
    let n = fields[0].len();
    for (m, field) in fields.iter().enumerate() {
        let mut c = [0.0; 3];
        for i in 0..n {
            let gl = [grad[0][(p, i)], grad[1][(p, i)], grad[2][(p, i)]];
            let v = cross(&gl, &field[i]);
            for l in 0..3 {
                c[l] += v[l];
            }
        }
        for l in 0..3 {
            g[l][m] = c[l];
        }
    }
    g
}

pub fn compute_metrics(mesh: &Mesh, ops: &ReferenceOperators) -> Result<GeometricFactors> {
    compute_metrics_with(mesh, ops, MetricKind::default_for(ops.element))
}

pub fn compute_metrics_with(mesh: &Mesh, ops: &ReferenceOperators, metric: MetricKind) -> Result<GeometricFactors> {
    let element = ops.element;
    if mesh.element_type() != element {
        return Err(Error::Mesh("mesh and operator element types differ".into()));
    }
    let d = element.dim();
    if metric == MetricKind::CurlForm && d != 3 {
        return Err(Error::Mesh("curl-form metrics are defined for tetrahedra only".into()));
    }
    let map = &mesh.mapping;
    let tables = MappingTables {
        vol: map.eval_matrix(&ops.vol_nodes),
        vol_grad: map.grad_matrices(&ops.vol_nodes),
        fac: ops.facets.iter().map(|f| map.eval_matrix(&f.nodes)).collect(),
        fac_grad: ops.facets.iter().map(|f| map.grad_matrices(&f.nodes)).collect(),
        node_grad: map.grad_matrices(&map.nodes),
    };
    let curl = if metric == MetricKind::CurlForm {
        let basis = SimplexLagrange::new(element, ops.q + 1, map.family)?;
        Some(CurlTables {
            basis_len: basis.len(),
            map_at_nodes: map.eval_matrix(&basis.nodes),
            map_grad_at_nodes: map.grad_matrices(&basis.nodes),
            grad_vol: basis.grad_matrices(&ops.vol_nodes),
            grad_fac: ops.facets.iter().map(|f| basis.grad_matrices(&f.nodes)).collect(),
        })
    } else {
        None
    };

    let mut elements = Vec::with_capacity(mesh.num_elements());
    for (kappa, el) in mesh.elements.iter().enumerate() {
        // Offset by the first mapping node to keep the curl fields small.
        let origin = el.nodes[0];
        let local: Vec<Point> = el
            .nodes
            .iter()
            .map(|x| [x[0] - origin[0], x[1] - origin[1], x[2] - origin[2]])
            .collect();

        let fields = curl.as_ref().map(|ct| {
            let mut f: [Vec<[f64; 3]>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for p in 0..ct.basis_len {
                let x = apply_rows(&ct.map_at_nodes, p, &local, d);
                let a = mapping_jacobian(d, &ct.map_grad_at_nodes, p, &local);
                // Rows of a are ∇_ξ x_a.
                let gx = |c: usize, s: f64| [s * a[c][0], s * a[c][1], s * a[c][2]];
                f[0].push(gx(1, -x[2]));
                f[1].push(gx(0, x[2]));
                f[2].push(gx(1, x[0]));
            }
            f
        });

        let metric_at = |grads: &[DMatrix<f64>], cgrads: Option<&Vec<DMatrix<f64>>>, p: usize| -> (Mat3, f64) {
            let a = mapping_jacobian(d, grads, p, &local);
            let dt = det(d, &a);
            let g = match (&fields, cgrads) {
                (Some(f), Some(cg)) => curl_metric(cg, p, f),
                _ => adjugate(d, &a),
            };
            (g, dt)
        };

        let nq = ops.num_volume_nodes();
        let mut x_vol = Vec::with_capacity(nq);
        let mut det_vol = Vec::with_capacity(nq);
        let mut g_vol = Vec::with_capacity(nq);
        for p in 0..nq {
            let mut x = apply_rows(&tables.vol, p, &local, d);
            for c in 0..d {
                x[c] += origin[c];
            }
            x_vol.push(x);
            let (g, dt) = metric_at(&tables.vol_grad, curl.as_ref().map(|c| &c.grad_vol), p);
            if dt <= 0.0 {
                return Err(Error::NonPositiveJacobian { element: kappa, value: dt });
            }
            det_vol.push(dt);
            g_vol.push(g);
        }

        let det_nodes: Vec<f64> = (0..map.len())
            .map(|p| det(d, &mapping_jacobian(d, &tables.node_grad, p, &local)))
            .collect();
        let j_p: Vec<f64> = (0..nq)
            .map(|p| (0..map.len()).map(|i| tables.vol[(p, i)] * det_nodes[i]).sum())
            .collect();
        if let Some(&v) = j_p.iter().find(|v| **v <= 0.0) {
            return Err(Error::NonPositiveJacobian { element: kappa, value: v });
        }

        let nf = element.num_facets();
        let mut x_fac = Vec::with_capacity(nf);
        let mut g_fac = Vec::with_capacity(nf);
        let mut j_f = Vec::with_capacity(nf);
        let mut n_f = Vec::with_capacity(nf);
        for (z, fo) in ops.facets.iter().enumerate() {
            let nh = fo.normal;
            let mut xs = Vec::with_capacity(fo.nodes.len());
            let mut gs = Vec::with_capacity(fo.nodes.len());
            let mut js = Vec::with_capacity(fo.nodes.len());
            let mut ns = Vec::with_capacity(fo.nodes.len());
            for p in 0..fo.nodes.len() {
                let mut x = apply_rows(&tables.fac[z], p, &local, d);
                for c in 0..d {
                    x[c] += origin[c];
                }
                let (g, _) = metric_at(&tables.fac_grad[z], curl.as_ref().map(|c| &c.grad_fac[z]), p);
                let mut v = [0.0; 3];
                for m in 0..d {
                    v[m] = (0..d).map(|l| g[l][m] * nh[l]).sum();
                }
                let jf = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if !(jf > 0.0) {
                    return Err(Error::Inadmissible {
                        element: kappa,
                        location: NodeLocation::Facet(z),
                        node: p,
                        what: "degenerate facet Jacobian",
                    });
                }
                xs.push(x);
                gs.push(g);
                js.push(jf);
                ns.push([v[0] / jf, v[1] / jf, v[2] / jf]);
            }
            x_fac.push(xs);
            g_fac.push(gs);
            j_f.push(js);
            n_f.push(ns);
        }

        elements.push(ElementGeometry {
            x_vol,
            x_fac,
            det_vol,
            j_p,
            g_vol,
            g_fac,
            j_f,
            n_f,
        });
    }
    Ok(GeometricFactors { metric, elements })
}

impl GeometricFactors {
    /// Σ_κ Σ_i ω_i J(ξ_i) using the exact determinant.
    pub fn total_measure(&self, ops: &ReferenceOperators) -> f64 {
        self.elements
            .iter()
            .map(|e| e.det_vol.iter().zip(&ops.weights).map(|(j, w)| j * w).sum::<f64>())
            .sum()
    }

    /// Σ_κ Σ_i ω_i J_p(ξ_i) using the Jacobian interpolant.
    pub fn total_measure_interpolated(&self, ops: &ReferenceOperators) -> f64 {
        self.elements
            .iter()
            .map(|e| e.j_p.iter().zip(&ops.weights).map(|(j, w)| j * w).sum::<f64>())
            .sum()
    }
}
