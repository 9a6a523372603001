//! Normalized Jacobi polynomials, Jacobi-weighted Gauss-type quadrature rules on
//! [-1, 1] and Lagrange interpolation/differentiation on arbitrary node sets.

use nalgebra::DMatrix;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Exponents of the Jacobi weight (1 - η)^a (1 + η)^b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiWeight {
    pub a: f64,
    pub b: f64,
}

impl JacobiWeight {
    pub const LEGENDRE: JacobiWeight = JacobiWeight { a: 0.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a > -1.0 && b > -1.0 {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidJacobiWeight { a, b })
        }
    }

    fn check(&self) -> Result<()> {
        Self::new(self.a, self.b).map(|_| ())
    }

    /// ∫_{-1}^{1} (1 - η)^a (1 + η)^b dη.
    pub fn total_mass(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if a.fract() == 0.0 && b.fract() == 0.0 && a + b < 150.0 {
            // a! b! / (a+b+1)! as a product of ratios, exact to rounding.
            let (ai, bi) = (a as u32, b as u32);
            let mut r = 1.0 / (ai + bi + 1) as f64;
            for k in 1..=bi {
                r *= k as f64 / (ai + k) as f64;
            }
            return 2f64.powf(a + b + 1.0) * r;
        }
        2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0)
    }
}

/// Values of the orthonormal Jacobi polynomials P_0..=P_n at `x`.
fn jacobi_all(w: JacobiWeight, n: usize, x: f64) -> Vec<f64> {
    let (a, b) = (w.a, w.b);
    let mut p = Vec::with_capacity(n + 1);
    let gamma0 = w.total_mass();
    p.push(1.0 / gamma0.sqrt());
    if n == 0 {
        return p;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    p.push(((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt());
    let mut a_old = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    for i in 1..n {
        let fi = i as f64;
        let h1 = 2.0 * fi + a + b;
        let a_new = 2.0 / (h1 + 2.0)
            * ((fi + 1.0) * (fi + 1.0 + a + b) * (fi + 1.0 + a) * (fi + 1.0 + b)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let b_new = -(a * a - b * b) / h1 / (h1 + 2.0);
        let next = (-a_old * p[i - 1] + (x - b_new) * p[i]) / a_new;
        p.push(next);
        a_old = a_new;
    }
    p
}

/// Orthonormal Jacobi polynomial P_n^{(a,b)}(x), normalized so that
/// ∫ P_i P_j (1-η)^a (1+η)^b dη = δ_ij.
pub fn jacobi_eval(w: JacobiWeight, n: usize, x: f64) -> Result<f64> {
    w.check()?;
    Ok(jacobi_all(w, n, x)[n])
}

/// Derivative of the orthonormal Jacobi polynomial P_n^{(a,b)}.
pub fn jacobi_deriv(w: JacobiWeight, n: usize, x: f64) -> Result<f64> {
    w.check()?;
    if n == 0 {
        return Ok(0.0);
    }
    let shifted = JacobiWeight {
        a: w.a + 1.0,
        b: w.b + 1.0,
    };
    let scale = (n as f64 * (n as f64 + w.a + w.b + 1.0)).sqrt();
    Ok(scale * jacobi_all(shifted, n - 1, x)[n - 1])
}

/// Zeros of P_n^{(a,b)} in increasing order, by Newton iteration with deflation
/// seeded from Chebyshev-Gauss points.
fn jacobi_zeros(w: JacobiWeight, n: usize, family: &'static str, q: usize) -> Result<Vec<f64>> {
    let mut z: Vec<f64> = Vec::with_capacity(n);
    for k in 0..n {
        let mut r = -((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
        if k > 0 {
            r = 0.5 * (r + z[k - 1]);
        }
        let mut converged = false;
        for _ in 0..100 {
            let s: f64 = z.iter().map(|zi| 1.0 / (r - zi)).sum();
            let p = jacobi_all(w, n, r)[n];
            let dp = jacobi_deriv(w, n, r)?;
            let delta = -p / (dp - s * p);
            r += delta;
            if delta.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureConvergence { family, q });
        }
        z.push(r);
    }
    z.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Gauss,
    GaussRadauLeft,
    GaussLobatto,
}

impl RuleKind {
    /// Exactness offset δ: the rule integrates polynomials of degree 2q + δ.
    pub fn exactness_offset(&self) -> i64 {
        match self {
            RuleKind::Gauss => 1,
            RuleKind::GaussRadauLeft => 0,
            RuleKind::GaussLobatto => -1,
        }
    }
}

/// A (q+1)-point quadrature rule for the Jacobi weight on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule1D {
    pub kind: RuleKind,
    pub weight: JacobiWeight,
    pub q: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> i64 {
        2 * self.q as i64 + self.kind.exactness_offset()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss, left Gauss-Radau or Gauss-Lobatto rule of index `q` (q + 1 nodes).
pub fn build_rule(kind: RuleKind, w: JacobiWeight, q: usize) -> Result<Rule1D> {
    w.check()?;
    let nodes = match kind {
        RuleKind::Gauss => jacobi_zeros(w, q + 1, "Gauss", q)?,
        RuleKind::GaussRadauLeft => {
            let inner = JacobiWeight { a: w.a, b: w.b + 1.0 };
            let mut n = vec![-1.0];
            n.extend(jacobi_zeros(inner, q, "Gauss-Radau", q)?);
            n
        }
        RuleKind::GaussLobatto => {
            if q == 0 {
                return Err(Error::LobattoDegree);
            }
            let inner = JacobiWeight {
                a: w.a + 1.0,
                b: w.b + 1.0,
            };
            let mut n = vec![-1.0];
            n.extend(jacobi_zeros(inner, q - 1, "Gauss-Lobatto", q)?);
            n.push(1.0);
            n
        }
    };
    let weights = match kind {
        // Christoffel numbers of the orthonormal family.
        RuleKind::Gauss => nodes
            .iter()
            .map(|&x| 1.0 / jacobi_all(w, q, x).iter().map(|p| p * p).sum::<f64>())
            .collect(),
        // ∫ ℓ_j weight, evaluated with a Gauss rule that is exact for degree q.
        _ => {
            let g = build_rule(RuleKind::Gauss, w, q + 1)?;
            let l = lagrange_eval_matrix(&nodes, &g.nodes)?;
            (0..nodes.len())
                .map(|j| (0..g.len()).map(|k| g.weights[k] * l[(k, j)]).sum())
                .collect()
        }
    };
    Ok(Rule1D {
        kind,
        weight: w,
        q,
        nodes,
        weights,
    })
}

fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let mut lam = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = nodes[i] - nodes[j];
                if d == 0.0 {
                    return Err(Error::DuplicateNodes(i.min(j), i.max(j)));
                }
                lam[i] /= d;
            }
        }
    }
    Ok(lam)
}

/// Entry (i, j) is dℓ_j/dη at node i.
pub fn lagrange_diff_matrix(nodes: &[f64]) -> Result<DMatrix<f64>> {
    let n = nodes.len();
    let lam = barycentric_weights(nodes)?;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (lam[j] / lam[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    Ok(d)
}

/// Entry (k, j) is ℓ_j(points[k]) for the Lagrange basis on `nodes`.
pub fn lagrange_eval_matrix(nodes: &[f64], points: &[f64]) -> Result<DMatrix<f64>> {
    let lam = barycentric_weights(nodes)?;
    let mut m = DMatrix::zeros(points.len(), nodes.len());
    for (k, &x) in points.iter().enumerate() {
        if let Some(j) = nodes.iter().position(|&xj| xj == x) {
            m[(k, j)] = 1.0;
            continue;
        }
        let terms: Vec<f64> = nodes
            .iter()
            .zip(&lam)
            .map(|(&xj, &lj)| lj / (x - xj))
            .collect();
        let denom: f64 = terms.iter().sum();
        for (j, t) in terms.iter().enumerate() {
            m[(k, j)] = t / denom;
        }
    }
    Ok(m)
}
