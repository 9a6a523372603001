//! Warped split-Cartesian meshes of the periodic box (0, L)^d.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrange::{NodeFamily, SimplexLagrange};
use crate::reference::{ElementType, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub element: ElementType,
    /// Cartesian subdivisions per direction.
    pub m: usize,
    /// Box edge length.
    pub l: f64,
    /// Warp amplitude ε.
    pub eps: f64,
    /// Mapping degree p_g.
    pub pg: usize,
}

impl MeshSpec {
    pub fn h(&self) -> f64 {
        self.l / self.m as f64
    }

    pub fn num_elements(&self) -> usize {
        match self.element {
            ElementType::Triangle => 2 * self.m * self.m,
            ElementType::Tetrahedron => 6 * self.m * self.m * self.m,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeshElement {
    /// Global vertex ids after periodic identification.
    pub vertex_ids: Vec<usize>,
    /// Unwrapped lattice coordinates of the vertices (multiples of h).
    pub lattice: Vec<[i64; 3]>,
    /// Physical positions of the mapping nodes after warping.
    pub nodes: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: MeshSpec,
    pub elements: Vec<MeshElement>,
    /// Nodal basis of degree p_g defining every element mapping.
    pub mapping: SimplexLagrange,
}

/// Applies the sinusoidal warp to a point of the box. Each line uses the
/// coordinates already updated above it. The displacement is centered on L/2 so
/// that it is compatible with periodic identification of opposite faces.
pub fn warp(dim: usize, l: f64, eps: f64, x: &Point) -> Point {
    let c = 0.5 * l;
    let k = std::f64::consts::PI / l;
    let a = eps * l;
    let mut y = *x;
    if dim == 2 {
        y[0] = x[0] + a * (k * (x[0] - c)).cos() * (3.0 * k * (x[1] - c)).cos();
        y[1] = x[1] + a * (4.0 * k * (y[0] - c)).sin() * (k * (x[1] - c)).cos();
    } else {
        y[1] = x[1]
            + a * (3.0 * k * (x[0] - c)).cos() * (k * (x[1] - c)).cos() * (k * (x[2] - c)).cos();
        y[0] = x[0]
            + a * (k * (x[0] - c)).cos() * (4.0 * k * (y[1] - c)).sin() * (k * (x[2] - c)).cos();
        y[2] = x[2]
            + a * (k * (y[0] - c)).cos() * (2.0 * k * (y[1] - c)).cos() * (k * (x[2] - c)).cos();
    }
    y
}

/// Barycentric coordinates of a reference point with respect to the reference vertices.
pub fn barycentric(element: ElementType, xi: &Point) -> Vec<f64> {
    let d = element.dim();
    let mut lam = vec![0.0; d + 1];
    let mut rest = 1.0;
    for c in 0..d {
        lam[c + 1] = 0.5 * (1.0 + xi[c]);
        rest -= lam[c + 1];
    }
    lam[0] = rest;
    lam
}

fn signed_measure(d: usize, v: &[[i64; 3]]) -> i64 {
    let e = |k: usize, c: usize| v[k][c] - v[0][c];
    if d == 2 {
        e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)
    } else {
        e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1)) - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
            + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0))
    }
}

fn vertex_id(m: usize, p: &[i64; 3], d: usize) -> usize {
    let w = |x: i64| x.rem_euclid(m as i64) as usize;
    match d {
        2 => w(p[0]) + m * w(p[1]),
        _ => w(p[0]) + m * (w(p[1]) + m * w(p[2])),
    }
}

/// Lattice vertex lists of the simplices of the split grid. Squares are cut
/// along the (i, j)–(i+1, j+1) diagonal; cubes use the six-tetrahedron
/// path decomposition from corner (0,0,0) to (1,1,1).
fn lattice_simplices(element: ElementType, m: usize) -> Vec<Vec<[i64; 3]>> {
    let m = m as i64;
    let mut out = Vec::new();
    match element {
        ElementType::Triangle => {
            for j in 0..m {
                for i in 0..m {
                    let a = [i, j, 0];
                    let b = [i + 1, j, 0];
                    let c = [i + 1, j + 1, 0];
                    let d = [i, j + 1, 0];
                    out.push(vec![a, b, c]);
                    out.push(vec![a, c, d]);
                }
            }
        }
        ElementType::Tetrahedron => {
            const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            for k in 0..m {
                for j in 0..m {
                    for i in 0..m {
                        for perm in PERMS {
                            let mut p = [i, j, k];
                            let mut verts = vec![p];
                            for &axis in &perm {
                                p[axis] += 1;
                                verts.push(p);
                            }
                            out.push(verts);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn build_mesh(spec: MeshSpec) -> Result<Mesh> {
    if spec.m < 2 {
        return Err(Error::Mesh(format!(
            "M = {} is too small for periodic identification (need M >= 2)",
            spec.m
        )));
    }
    if !(spec.l > 0.0) {
        return Err(Error::Mesh(format!("box length must be positive, got {}", spec.l)));
    }
    if spec.pg == 0 {
        return Err(Error::Mesh("mapping degree must be at least 1".into()));
    }
    let element = spec.element;
    let d = element.dim();
    let h = spec.h();
    let mapping = SimplexLagrange::new(element, spec.pg, NodeFamily::LobattoBlend)?;
    let bary: Vec<Vec<f64>> = mapping.nodes.iter().map(|x| barycentric(element, x)).collect();
    let grads = mapping.grad_matrices(&mapping.nodes);

    let mut elements = Vec::with_capacity(spec.num_elements());
    for verts in lattice_simplices(element, spec.m) {
        let mut tagged: Vec<(usize, [i64; 3])> = verts.iter().map(|p| (vertex_id(spec.m, p, d), *p)).collect();
        if element == ElementType::Tetrahedron {
            // Sorting by global id makes the collapsed vertex of every face its
            // highest-id vertex, so both neighbors see the same facet node set.
            tagged.sort_by_key(|t| t.0);
            let lat: Vec<[i64; 3]> = tagged.iter().map(|t| t.1).collect();
            if signed_measure(d, &lat) < 0 {
                // Swapping the two lowest vertices keeps the collapse vertex of
                // every face while reversing orientation.
                tagged.swap(0, 1);
            }
        }
        let lattice: Vec<[i64; 3]> = tagged.iter().map(|t| t.1).collect();
        if signed_measure(d, &lattice) <= 0 {
            return Err(Error::Mesh("split produced a degenerate or inverted simplex".into()));
        }
        let vertex_ids = tagged.iter().map(|t| t.0).collect();
        let nodes = bary
            .iter()
            .map(|lam| {
                let mut x = [0.0; 3];
                for (j, v) in lattice.iter().enumerate() {
                    for c in 0..d {
                        x[c] += lam[j] * v[c] as f64 * h;
                    }
                }
                if spec.eps != 0.0 {
                    warp(d, spec.l, spec.eps, &x)
                } else {
                    x
                }
            })
            .collect::<Vec<Point>>();
        elements.push(MeshElement {
            vertex_ids,
            lattice,
            nodes,
        });
    }

    for (k, el) in elements.iter().enumerate() {
        for p in 0..mapping.len() {
            let jac = mapping_jacobian(d, &grads, p, &el.nodes);
            let det = det(d, &jac);
            if det <= 0.0 {
                return Err(Error::NonPositiveJacobian { element: k, value: det });
            }
        }
    }
    Ok(Mesh {
        spec,
        elements,
        mapping,
    })
}

/// ∇x at point `p` of a set whose Lagrange gradient matrices are `grads`;
/// entry [a][c] is ∂x_a/∂ξ_c.
pub fn mapping_jacobian(d: usize, grads: &[nalgebra::DMatrix<f64>], p: usize, nodes: &[Point]) -> [[f64; 3]; 3] {
    let mut jac = [[0.0; 3]; 3];
    for (c, g) in grads.iter().enumerate().take(d) {
        for (i, x) in nodes.iter().enumerate() {
            let w = g[(p, i)];
            for a in 0..d {
                jac[a][c] += w * x[a];
            }
        }
    }
    jac
}

pub fn det(d: usize, a: &[[f64; 3]; 3]) -> f64 {
    if d == 2 {
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    } else {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }
}

/// Adjugate det(A)·A⁻¹ of a 2×2 or 3×3 matrix.
pub fn adjugate(d: usize, a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    if d == 2 {
        g[0][0] = a[1][1];
        g[0][1] = -a[0][1];
        g[1][0] = -a[1][0];
        g[1][1] = a[0][0];
    } else {
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                g[i][j] = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            }
        }
    }
    g
}

impl Mesh {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_type(&self) -> ElementType {
        self.spec.element
    }

    /// Physical image of reference point ξ under element κ's mapping.
    pub fn map_point(&self, kappa: usize, xi: &Point) -> Point {
        let l = self.mapping.eval(xi);
        let mut x = [0.0; 3];
        for (w, n) in l.iter().zip(&self.elements[kappa].nodes) {
            for c in 0..3 {
                x[c] += w * n[c];
            }
        }
        x
    }

    /// Plain-text dump: header, then per element its vertex ids and mapping nodes.
    pub fn write_plain(&self, out: &mut impl Write) -> std::io::Result<()> {
        let s = &self.spec;
        writeln!(
            out,
            "# esdg-mesh v1 {} M={} L={:.16e} eps={:.16e} pg={} elements={}",
            s.element,
            s.m,
            s.l,
            s.eps,
            s.pg,
            self.num_elements()
        )?;
        for (k, el) in self.elements.iter().enumerate() {
            let ids: Vec<String> = el.vertex_ids.iter().map(|v| v.to_string()).collect();
            writeln!(out, "element {k} vertices {}", ids.join(" "))?;
            for x in &el.nodes {
                writeln!(out, "{:.16e} {:.16e} {:.16e}", x[0], x[1], x[2])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_counts_and_orientation() {
        for (el, m, n) in [(ElementType::Triangle, 3, 18), (ElementType::Tetrahedron, 2, 48)] {
            let mesh = build_mesh(MeshSpec {
                element: el,
                m,
                l: 2.0,
                eps: 0.0,
                pg: 1,
            })
            .unwrap();
            assert_eq!(mesh.num_elements(), n);
            for e in &mesh.elements {
                assert!(signed_measure(el.dim(), &e.lattice) > 0);
            }
        }
    }

    #[test]
    fn tet_faces_share_their_highest_id_vertex() {
        let mesh = build_mesh(MeshSpec {
            element: ElementType::Tetrahedron,
            m: 3,
            l: 1.0,
            eps: 0.0,
            pg: 1,
        })
        .unwrap();
        for e in &mesh.elements {
            let ids = &e.vertex_ids;
            // Collapse vertices: 3 for facets 1-3, 2 for facet 4.
            assert!(ids[3] > ids[0] && ids[3] > ids[1] && ids[3] > ids[2]);
            assert!(ids[2] > ids[0] && ids[2] > ids[1]);
        }
    }

    #[test]
    fn warp_fixes_box_boundary_planes() {
        for d in [2usize, 3] {
            for x in [[0.0, 0.3, 1.1], [2.0, 0.7, 0.2], [0.4, 0.0, 1.9], [1.3, 2.0, 0.6]] {
                let y = warp(d, 2.0, 1.0 / 16.0, &x);
                for c in 0..d {
                    if x[c] == 0.0 || x[c] == 2.0 {
                        assert!((y[c] - x[c]).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_small_m_and_reports_inversion() {
        let spec = MeshSpec {
            element: ElementType::Triangle,
            m: 1,
            l: 1.0,
            eps: 0.0,
            pg: 1,
        };
        assert!(build_mesh(spec).is_err());
        let bad = MeshSpec {
            m: 2,
            eps: 0.5,
            pg: 3,
            ..spec
        };
        assert!(matches!(build_mesh(bad), Err(Error::NonPositiveJacobian { .. })));
    }

    #[test]
    fn adjugate_matches_inverse() {
        let a = [[2.0, 0.3, -0.1], [0.2, 1.5, 0.4], [-0.3, 0.1, 1.2]];
        let g = adjugate(3, &a);
        let dt = det(3, &a);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i][k] * g[k][j]).sum();
                let e = if i == j { dt } else { 0.0 };
                assert!((s - e).abs() < 1e-13);
            }
        }
    }
}
