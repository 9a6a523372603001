//! Nodal Lagrange bases of total degree k on the reference simplex, used for
//! the element mappings and the metric interpolants.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::quadrature::{build_rule, jacobi_deriv, jacobi_eval, JacobiWeight, RuleKind};
use crate::reference::{ElementType, Point};

/// Placement of the nodes within the simplex. Both families restrict to the
/// same family on every facet and are invariant under vertex permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeFamily {
    Equispaced,
    /// Barycentric blend of 1-D Gauss–Lobatto points: index i_a along
    /// vertex a maps to λ_a = (1 + d·v(i_a) − Σ_{b≠a} v(i_b))/(d+1), which
    /// reduces to Gauss–Lobatto points on every edge.
    LobattoBlend,
}

/// Lagrange basis on a barycentric node set. The node set restricted to any
/// facet depends only on the facet's vertices, so neighboring elements share
/// facet nodes exactly.
#[derive(Debug, Clone)]
pub struct SimplexLagrange {
    pub element: ElementType,
    pub k: usize,
    pub family: NodeFamily,
    pub nodes: Vec<Point>,
    exps: Vec<[usize; 3]>,
    /// Inverse of the Legendre-product Vandermonde matrix at the nodes.
    inv_v: DMatrix<f64>,
}

/// Barycentric multi-indices (i₀, …, i_d) with Σ i = k, in a fixed order.
fn barycentric_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; d + 1];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for i in (0..=left).rev() {
            cur[pos] = i;
            rec(pos + 1, left - i, cur, out);
        }
    }
    rec(0, k, &mut cur, &mut out);
    out
}

fn product_exponents(d: usize, k: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for total in 0..=k {
        for a in (0..=total).rev() {
            if d == 2 {
                out.push([a, total - a, 0]);
            } else {
                for b in (0..=total - a).rev() {
                    out.push([a, b, total - a - b]);
                }
            }
        }
    }
    out
}

impl SimplexLagrange {
    pub fn equispaced(element: ElementType, k: usize) -> Result<Self> {
        Self::new(element, k, NodeFamily::Equispaced)
    }

    pub fn new(element: ElementType, k: usize, family: NodeFamily) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDegree("nodal simplex basis requires k >= 1".into()));
        }
        let d = element.dim();
        let verts = element.reference_vertices();
        let v: Vec<f64> = match family {
            NodeFamily::Equispaced => (0..=k).map(|i| i as f64 / k as f64).collect(),
            NodeFamily::LobattoBlend => {
                let rule = build_rule(RuleKind::GaussLobatto, JacobiWeight::LEGENDRE, k)?;
                rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect()
            }
        };
        let nodes: Vec<Point> = barycentric_indices(d, k)
            .into_iter()
            .map(|b| {
                let total: f64 = b.iter().map(|&i| v[i]).sum();
                let mut x = [0.0; 3];
                for (j, &bj) in b.iter().enumerate() {
                    let l = (1.0 + (d + 1) as f64 * v[bj] - total) / (d + 1) as f64;
                    for c in 0..d {
                        x[c] += l * verts[j][c];
                    }
                }
                x
            })
            .collect();
        let exps = product_exponents(d, k);
        let n = nodes.len();
        debug_assert_eq!(n, exps.len());
        let mut v = DMatrix::zeros(n, n);
        let mut this = Self {
            element,
            k,
            family,
            nodes,
            exps,
            inv_v: DMatrix::zeros(0, 0),
        };
        for (i, x) in this.nodes.iter().enumerate() {
            let (vals, _) = this.modal(x, false);
            for j in 0..n {
                v[(i, j)] = vals[j];
            }
        }
        this.inv_v = v
            .try_inverse()
            .ok_or_else(|| Error::InvalidDegree(format!("singular nodal basis at degree {k}")))?;
        Ok(this)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values (and optionally gradients) of the Legendre-product modal basis.
    fn modal(&self, x: &Point, with_grad: bool) -> (Vec<f64>, Vec<[f64; 3]>) {
        let d = self.element.dim();
        let mut p = [[0.0; 16]; 3];
        let mut dp = [[0.0; 16]; 3];
        for c in 0..d {
            for n in 0..=self.k {
                p[c][n] = jacobi_eval(JacobiWeight::LEGENDRE, n, x[c]).expect("Legendre weight");
                if with_grad {
                    dp[c][n] = jacobi_deriv(JacobiWeight::LEGENDRE, n, x[c]).expect("Legendre weight");
                }
            }
        }
        let mut vals = Vec::with_capacity(self.exps.len());
        let mut grads = Vec::with_capacity(if with_grad { self.exps.len() } else { 0 });
        for e in &self.exps {
            let f = |c: usize, deriv: bool| {
                if c >= d {
                    1.0
                } else if deriv {
                    dp[c][e[c]]
                } else {
                    p[c][e[c]]
                }
            };
            vals.push(f(0, false) * f(1, false) * f(2, false));
            if with_grad {
                let mut g = [0.0; 3];
                for (c, gc) in g.iter_mut().enumerate().take(d) {
                    *gc = (0..3).map(|cc| f(cc, cc == c)).product();
                }
                grads.push(g);
            }
        }
        (vals, grads)
    }

    /// ℓ_i(x) for all nodes i.
    pub fn eval(&self, x: &Point) -> Vec<f64> {
        let (vals, _) = self.modal(x, false);
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.inv_v[(j, i)] * vals[j]).sum())
            .collect()
    }

    /// ∇ℓ_i(x) for all nodes i.
    pub fn grad(&self, x: &Point) -> Vec<[f64; 3]> {
        let (_, grads) = self.modal(x, true);
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut g = [0.0; 3];
                for j in 0..n {
                    let c = self.inv_v[(j, i)];
                    for a in 0..3 {
                        g[a] += c * grads[j][a];
                    }
                }
                g
            })
            .collect()
    }

    /// Matrix with entry (p, i) = ℓ_i(points[p]).
    pub fn eval_matrix(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.len());
        for (p, x) in points.iter().enumerate() {
            for (i, v) in self.eval(x).into_iter().enumerate() {
                m[(p, i)] = v;
            }
        }
        m
    }

    /// One matrix per reference direction with entry (p, i) = ∂ℓ_i/∂ξ_c(points[p]).
    pub fn grad_matrices(&self, points: &[Point]) -> Vec<DMatrix<f64>> {
        let d = self.element.dim();
        let mut ms = vec![DMatrix::zeros(points.len(), self.len()); d];
        for (p, x) in points.iter().enumerate() {
            for (i, g) in self.grad(x).into_iter().enumerate() {
                for c in 0..d {
                    ms[c][(p, i)] = g[c];
                }
            }
        }
        ms
    }

    /// Indices of the nodes lying on reference facet `z`.
    pub fn facet_node_indices(&self, z: usize) -> Vec<usize> {
        let verts = self.element.reference_vertices();
        let fv = self.element.facet_vertices(z);
        let normal = self.element.reference_normal(z);
        let x0 = verts[fv[0]];
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, x)| {
                let s: f64 = (0..3).map(|c| (x[c] - x0[c]) * normal[c]).sum();
                s.abs() < 1e-12
            })
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{monomial, monomial_exponents};

    #[test]
    fn node_counts() {
        assert_eq!(SimplexLagrange::equispaced(ElementType::Triangle, 3).unwrap().len(), 10);
        assert_eq!(SimplexLagrange::equispaced(ElementType::Tetrahedron, 4).unwrap().len(), 35);
        let b = SimplexLagrange::equispaced(ElementType::Tetrahedron, 3).unwrap();
        for z in 0..4 {
            assert_eq!(b.facet_node_indices(z).len(), 10);
        }
    }

    #[test]
    fn cardinal_and_reproducing() {
        for (el, k) in [(ElementType::Triangle, 4), (ElementType::Tetrahedron, 4)] {
            let b = SimplexLagrange::equispaced(el, k).unwrap();
            for (i, x) in b.nodes.iter().enumerate() {
                let l = b.eval(x);
                for (j, v) in l.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-11);
                }
            }
            let x = [-0.3, -0.2, -0.4];
            for deg in 0..=k {
                for a in monomial_exponents(el.dim(), deg) {
                    let vals: Vec<f64> = b.nodes.iter().map(|n| monomial(&a, n)).collect();
                    let f: f64 = b.eval(&x).iter().zip(&vals).map(|(l, v)| l * v).sum();
                    assert!((f - monomial(&a, &x)).abs() < 1e-11);
                    let g = b.grad(&x);
                    for c in 0..el.dim() {
                        let df: f64 = g.iter().zip(&vals).map(|(l, v)| l[c] * v).sum();
                        let mut ad = a;
                        let exact = if ad[c] == 0 {
                            0.0
                        } else {
                            ad[c] -= 1;
                            a[c] as f64 * monomial(&ad, &x)
                        };
                        assert!((df - exact).abs() < 1e-10);
                    }
                }
            }
        }
    }
}
