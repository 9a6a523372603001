//! Orthonormal Proriol-Koornwinder-Dubiner basis on the reference simplex and
//! sum-factorized application of its Vandermonde matrix at the tensor nodes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{jacobi_eval, JacobiWeight};
use crate::reference::{inverse_collapsed_map, ElementType, Point, ReferenceOperators};

/// Graded multi-index ordering: by total degree, then lexicographically
/// descending in (α₁, α₂, α₃). Truncating to degree p' < p is a prefix.
#[derive(Debug, Clone)]
pub struct MultiIndexOrder {
    pub dim: usize,
    pub p: usize,
    pub indices: Vec<[usize; 3]>,
    lookup: Vec<usize>,
}

impl MultiIndexOrder {
    pub fn new(dim: usize, p: usize) -> Self {
        let mut indices = Vec::new();
        for k in 0..=p {
            for a1 in (0..=k).rev() {
                if dim == 2 {
                    indices.push([a1, k - a1, 0]);
                } else {
                    for a2 in (0..=k - a1).rev() {
                        indices.push([a1, a2, k - a1 - a2]);
                    }
                }
            }
        }
        let n = p + 1;
        let mut lookup = vec![usize::MAX; n * n * n];
        for (i, a) in indices.iter().enumerate() {
            lookup[a[0] + n * (a[1] + n * a[2])] = i;
        }
        Self {
            dim,
            p,
            indices,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Linear position of multi-index `alpha`, if |α| ≤ p.
    pub fn position(&self, alpha: [usize; 3]) -> Option<usize> {
        let n = self.p + 1;
        if alpha.iter().any(|&a| a >= n) {
            return None;
        }
        let i = self.lookup[alpha[0] + n * (alpha[1] + n * alpha[2])];
        (i != usize::MAX).then_some(i)
    }

    fn pos(&self, a1: usize, a2: usize, a3: usize) -> usize {
        let n = self.p + 1;
        self.lookup[a1 + n * (a2 + n * a3)]
    }
}

fn jac(a: f64, n: usize, x: f64) -> f64 {
    jacobi_eval(JacobiWeight { a, b: 0.0 }, n, x).expect("Jacobi exponents are non-negative")
}

fn psi1(a1: usize, x: f64) -> f64 {
    std::f64::consts::SQRT_2 * jac(0.0, a1, x)
}

fn psi2(a1: usize, a2: usize, x: f64) -> f64 {
    (1.0 - x).powi(a1 as i32) * jac((2 * a1 + 1) as f64, a2, x)
}

fn psi3(s: usize, a3: usize, x: f64) -> f64 {
    2.0 * (1.0 - x).powi(s as i32) * jac((2 * s + 2) as f64, a3, x)
}

/// Evaluates φ_α at collapsed coordinates η.
pub fn pkd_eval_eta(element: ElementType, alpha: [usize; 3], eta: &Point) -> f64 {
    let v = psi1(alpha[0], eta[0]) * psi2(alpha[0], alpha[1], eta[1]);
    match element {
        ElementType::Triangle => v,
        ElementType::Tetrahedron => v * psi3(alpha[0] + alpha[1], alpha[2], eta[2]),
    }
}

/// Evaluates φ_α at a point ξ of the closed reference simplex.
pub fn pkd_eval(element: ElementType, alpha: [usize; 3], xi: &Point) -> Result<f64> {
    let eta = inverse_collapsed_map(element, xi)?;
    Ok(pkd_eval_eta(element, alpha, &eta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    /// Modal coefficients to nodal values (V).
    Forward,
    /// Nodal values to modal coefficients (Vᵀ).
    Transpose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyPath {
    Dense,
    SumFactorized,
}

/// Receives multiply-add counts from the sum-factorized kernels.
pub trait OpCounter {
    fn add(&mut self, n: usize);
}

/// Counter that discards its input.
pub struct NoCount;

impl OpCounter for NoCount {
    #[inline(always)]
    fn add(&mut self, _: usize) {}
}

impl OpCounter for u64 {
    fn add(&mut self, n: usize) {
        *self += n as u64;
    }
}

/// Tables of principal-function values at the one-dimensional node sets.
#[derive(Debug, Clone)]
struct SumFacPlan {
    n: usize,
    /// ψ₁ at (a1, i1), index a1 * n + i1.
    psi1: Vec<f64>,
    /// ψ₂ at (a1, a2, i2), index (off2[a1] + a2) * n + i2.
    psi2: Vec<f64>,
    off2: Vec<usize>,
    /// ψ₃ at (s, a3, i3), index (off3[s] + a3) * n + i3.
    psi3: Vec<f64>,
    off3: Vec<usize>,
    /// Position of (a1, a2) among pairs with a1 + a2 ≤ p.
    pair: Vec<usize>,
}

/// PKD basis of degree p sampled at the nodes of a set of reference operators.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub element: ElementType,
    pub p: usize,
    pub q: usize,
    pub order: MultiIndexOrder,
    /// V, N_q × N_p*.
    pub v: DMatrix<f64>,
    /// V_f^(ζ) = R^(ζ) V, N_qf × N_p*.
    pub v_f: Vec<DMatrix<f64>>,
    plan: SumFacPlan,
}

pub fn build_modal_basis(ops: &ReferenceOperators, p: usize) -> Result<ModalBasis> {
    if p > ops.q {
        return Err(Error::InvalidDegree(format!(
            "basis degree p = {p} exceeds operator degree q = {}",
            ops.q
        )));
    }
    let element = ops.element;
    let d = element.dim();
    let order = MultiIndexOrder::new(d, p);
    let nq = ops.num_volume_nodes();
    let np = order.len();
    let mut v = DMatrix::zeros(nq, np);
    for (i, eta) in ops.vol_eta.iter().enumerate() {
        for (j, a) in order.indices.iter().enumerate() {
            v[(i, j)] = pkd_eval_eta(element, *a, eta);
        }
    }
    let v_f = ops
        .facets
        .iter()
        .map(|f| {
            let mut m = DMatrix::zeros(f.nodes.len(), np);
            for (i, eta) in f.eta.iter().enumerate() {
                for (j, a) in order.indices.iter().enumerate() {
                    m[(i, j)] = pkd_eval_eta(element, *a, eta);
                }
            }
            m
        })
        .collect();

    let n = ops.q + 1;
    let x1 = &ops.line_rules[0].nodes;
    let x2 = &ops.line_rules[1].nodes;
    let mut psi1_t = Vec::with_capacity((p + 1) * n);
    for a1 in 0..=p {
        psi1_t.extend(x1.iter().map(|&x| psi1(a1, x)));
    }
    let mut off2 = Vec::with_capacity(p + 1);
    let mut psi2_t = Vec::new();
    for a1 in 0..=p {
        off2.push(psi2_t.len() / n);
        for a2 in 0..=(p - a1) {
            psi2_t.extend(x2.iter().map(|&x| psi2(a1, a2, x)));
        }
    }
    let mut off3 = Vec::new();
    let mut psi3_t = Vec::new();
    let mut pair = vec![usize::MAX; (p + 1) * (p + 1)];
    if d == 3 {
        let x3 = &ops.line_rules[2].nodes;
        for s in 0..=p {
            off3.push(psi3_t.len() / n);
            for a3 in 0..=(p - s) {
                psi3_t.extend(x3.iter().map(|&x| psi3(s, a3, x)));
            }
        }
        let mut k = 0;
        for a1 in 0..=p {
            for a2 in 0..=(p - a1) {
                pair[a1 * (p + 1) + a2] = k;
                k += 1;
            }
        }
    }
    Ok(ModalBasis {
        element,
        p,
        q: ops.q,
        order,
        v,
        v_f,
        plan: SumFacPlan {
            n,
            psi1: psi1_t,
            psi2: psi2_t,
            off2,
            psi3: psi3_t,
            off3,
            pair,
        },
    })
}

impl ModalBasis {
    pub fn num_modes(&self) -> usize {
        self.order.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.v.nrows()
    }

    /// Applies V or Vᵀ, writing into `output`.
    pub fn apply(&self, input: &[f64], output: &mut [f64], mode: ApplyMode, path: ApplyPath) -> Result<()> {
        self.apply_counted(input, output, mode, path, &mut NoCount)
    }

    /// As [`apply`](Self::apply), reporting multiply-adds of the sum-factorized path.
    pub fn apply_counted<C: OpCounter>(
        &self,
        input: &[f64],
        output: &mut [f64],
        mode: ApplyMode,
        path: ApplyPath,
        counter: &mut C,
    ) -> Result<()> {
        let (nin, nout) = match mode {
            ApplyMode::Forward => (self.num_modes(), self.num_nodes()),
            ApplyMode::Transpose => (self.num_nodes(), self.num_modes()),
        };
        if input.len() != nin {
            return Err(Error::DimensionMismatch {
                expected: nin,
                got: input.len(),
            });
        }
        if output.len() != nout {
            return Err(Error::DimensionMismatch {
                expected: nout,
                got: output.len(),
            });
        }
        match path {
            ApplyPath::Dense => {
                let x = DVector::from_column_slice(input);
                let y = match mode {
                    ApplyMode::Forward => &self.v * x,
                    ApplyMode::Transpose => self.v.tr_mul(&x),
                };
                output.copy_from_slice(y.as_slice());
            }
            ApplyPath::SumFactorized => match (self.element, mode) {
                (ElementType::Triangle, ApplyMode::Forward) => self.forward_2d(input, output, counter),
                (ElementType::Triangle, ApplyMode::Transpose) => self.transpose_2d(input, output, counter),
                (ElementType::Tetrahedron, ApplyMode::Forward) => self.forward_3d(input, output, counter),
                (ElementType::Tetrahedron, ApplyMode::Transpose) => {
                    self.transpose_3d(input, output, counter)
                }
            },
        }
        Ok(())
    }

    /// V c via sum factorization (no dimension checks).
    pub fn forward(&self, c: &[f64], u: &mut [f64]) {
        match self.element {
            ElementType::Triangle => self.forward_2d(c, u, &mut NoCount),
            ElementType::Tetrahedron => self.forward_3d(c, u, &mut NoCount),
        }
    }

    /// Vᵀ u via sum factorization (no dimension checks).
    pub fn transpose(&self, u: &[f64], c: &mut [f64]) {
        match self.element {
            ElementType::Triangle => self.transpose_2d(u, c, &mut NoCount),
            ElementType::Tetrahedron => self.transpose_3d(u, c, &mut NoCount),
        }
    }

    fn forward_2d<C: OpCounter>(&self, c: &[f64], u: &mut [f64], counter: &mut C) {
        let pl = &self.plan;
        let (n, p) = (pl.n, self.p);
        let mut t = vec![0.0; (p + 1) * n];
        for a1 in 0..=p {
            let row = &mut t[a1 * n..(a1 + 1) * n];
            for a2 in 0..=(p - a1) {
                let ca = c[self.order.pos(a1, a2, 0)];
                let tab = &pl.psi2[(pl.off2[a1] + a2) * n..(pl.off2[a1] + a2 + 1) * n];
                for i2 in 0..n {
                    row[i2] += tab[i2] * ca;
                }
                counter.add(n);
            }
        }
        u.iter_mut().for_each(|x| *x = 0.0);
        for a1 in 0..=p {
            let tab = &pl.psi1[a1 * n..(a1 + 1) * n];
            for i2 in 0..n {
                let tv = t[a1 * n + i2];
                let out = &mut u[i2 * n..(i2 + 1) * n];
                for i1 in 0..n {
                    out[i1] += tab[i1] * tv;
                }
            }
            counter.add(n * n);
        }
    }

    fn transpose_2d<C: OpCounter>(&self, u: &[f64], c: &mut [f64], counter: &mut C) {
        let pl = &self.plan;
        let (n, p) = (pl.n, self.p);
        let mut s = vec![0.0; (p + 1) * n];
        for a1 in 0..=p {
            let tab = &pl.psi1[a1 * n..(a1 + 1) * n];
            for i2 in 0..n {
                let col = &u[i2 * n..(i2 + 1) * n];
                s[a1 * n + i2] = tab.iter().zip(col).map(|(a, b)| a * b).sum();
            }
            counter.add(n * n);
        }
        for a1 in 0..=p {
            let row = &s[a1 * n..(a1 + 1) * n];
            for a2 in 0..=(p - a1) {
                let tab = &pl.psi2[(pl.off2[a1] + a2) * n..(pl.off2[a1] + a2 + 1) * n];
                c[self.order.pos(a1, a2, 0)] = tab.iter().zip(row).map(|(a, b)| a * b).sum();
                counter.add(n);
            }
        }
    }

    fn forward_3d<C: OpCounter>(&self, c: &[f64], u: &mut [f64], counter: &mut C) {
        let pl = &self.plan;
        let (n, p) = (pl.n, self.p);
        let npairs = (p + 1) * (p + 2) / 2;
        // t1[(a1,a2)][i3]
        let mut t1 = vec![0.0; npairs * n];
        for a1 in 0..=p {
            for a2 in 0..=(p - a1) {
                let k = pl.pair[a1 * (p + 1) + a2];
                let s = a1 + a2;
                let row = &mut t1[k * n..(k + 1) * n];
                for a3 in 0..=(p - s) {
                    let ca = c[self.order.pos(a1, a2, a3)];
                    let tab = &pl.psi3[(pl.off3[s] + a3) * n..(pl.off3[s] + a3 + 1) * n];
                    for i3 in 0..n {
                        row[i3] += tab[i3] * ca;
                    }
                    counter.add(n);
                }
            }
        }
        // t2[a1][i2 + n i3]
        let nn = n * n;
        let mut t2 = vec![0.0; (p + 1) * nn];
        for a1 in 0..=p {
            let blk = &mut t2[a1 * nn..(a1 + 1) * nn];
            for a2 in 0..=(p - a1) {
                let k = pl.pair[a1 * (p + 1) + a2];
                let tab = &pl.psi2[(pl.off2[a1] + a2) * n..(pl.off2[a1] + a2 + 1) * n];
                for i3 in 0..n {
                    let tv = t1[k * n + i3];
                    let out = &mut blk[i3 * n..(i3 + 1) * n];
                    for i2 in 0..n {
                        out[i2] += tab[i2] * tv;
                    }
                }
                counter.add(nn);
            }
        }
        u.iter_mut().for_each(|x| *x = 0.0);
        for a1 in 0..=p {
            let tab = &pl.psi1[a1 * n..(a1 + 1) * n];
            for j in 0..nn {
                let tv = t2[a1 * nn + j];
                let out = &mut u[j * n..(j + 1) * n];
                for i1 in 0..n {
                    out[i1] += tab[i1] * tv;
                }
            }
            counter.add(nn * n);
        }
    }

    fn transpose_3d<C: OpCounter>(&self, u: &[f64], c: &mut [f64], counter: &mut C) {
        let pl = &self.plan;
        let (n, p) = (pl.n, self.p);
        let nn = n * n;
        let mut t2 = vec![0.0; (p + 1) * nn];
        for a1 in 0..=p {
            let tab = &pl.psi1[a1 * n..(a1 + 1) * n];
            for j in 0..nn {
                let col = &u[j * n..(j + 1) * n];
                t2[a1 * nn + j] = tab.iter().zip(col).map(|(a, b)| a * b).sum();
            }
            counter.add(nn * n);
        }
        let npairs = (p + 1) * (p + 2) / 2;
        let mut t1 = vec![0.0; npairs * n];
        for a1 in 0..=p {
            let blk = &t2[a1 * nn..(a1 + 1) * nn];
            for a2 in 0..=(p - a1) {
                let k = pl.pair[a1 * (p + 1) + a2];
                let tab = &pl.psi2[(pl.off2[a1] + a2) * n..(pl.off2[a1] + a2 + 1) * n];
                for i3 in 0..n {
                    let col = &blk[i3 * n..(i3 + 1) * n];
                    t1[k * n + i3] = tab.iter().zip(col).map(|(a, b)| a * b).sum();
                }
                counter.add(nn);
            }
        }
        for a1 in 0..=p {
            for a2 in 0..=(p - a1) {
                let k = pl.pair[a1 * (p + 1) + a2];
                let s = a1 + a2;
                let row = &t1[k * n..(k + 1) * n];
                for a3 in 0..=(p - s) {
                    let tab = &pl.psi3[(pl.off3[s] + a3) * n..(pl.off3[s] + a3 + 1) * n];
                    c[self.order.pos(a1, a2, a3)] = tab.iter().zip(row).map(|(a, b)| a * b).sum();
                    counter.add(n);
                }
            }
        }
    }
}
