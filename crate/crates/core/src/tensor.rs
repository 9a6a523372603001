//! Kronecker-structured operators applied one tensor direction at a time.

use nalgebra::DMatrix;

/// One direction of a Kronecker product.
#[derive(Debug, Clone)]
pub enum Factor {
    /// Index carried through unchanged.
    Identity,
    /// Dense `rows × n` contraction, stored row-major.
    Dense { rows: usize, data: Vec<f64> },
}

impl Factor {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Factor::Dense {
            rows: m.nrows(),
            data,
        }
    }

    fn rows(&self, n: usize) -> usize {
        match self {
            Factor::Identity => n,
            Factor::Dense { rows, .. } => *rows,
        }
    }

    fn entry(&self, n: usize, r: usize, c: usize) -> f64 {
        match self {
            Factor::Identity => f64::from(u8::from(r == c)),
            Factor::Dense { data, .. } => data[r * n + c],
        }
    }
}

/// A ⊗ B ⊗ C acting on tensors of shape `n^dim` stored with the first index fastest.
#[derive(Debug, Clone)]
pub struct KroneckerOp {
    n: usize,
    factors: Vec<Factor>,
}

/// Contracts axis `k` of a tensor of shape `shape` against `a` (`m × shape[k]`),
/// or against `aᵀ` when `transpose` is set.
fn contract(
    input: &[f64],
    shape: &[usize; 3],
    k: usize,
    factor: &Factor,
    n: usize,
    transpose: bool,
    out: &mut Vec<f64>,
) -> [usize; 3] {
    let inner: usize = shape[..k].iter().product();
    let outer: usize = shape[k + 1..].iter().product();
    let sk = shape[k];
    let m = if transpose { n } else { factor.rows(n) };
    let mut new_shape = *shape;
    new_shape[k] = m;
    out.clear();
    out.resize(inner * m * outer, 0.0);
    for o in 0..outer {
        for r in 0..m {
            let dst = inner * (r + m * o);
            for c in 0..sk {
                let a = if transpose {
                    factor.entry(n, c, r)
                } else {
                    factor.entry(n, r, c)
                };
                if a == 0.0 {
                    continue;
                }
                let src = inner * (c + sk * o);
                for i in 0..inner {
                    out[dst + i] += a * input[src + i];
                }
            }
        }
    }
    new_shape
}

impl KroneckerOp {
    /// `factors[k]` acts on direction `k`; every direction has `n` input points.
    pub fn new(n: usize, factors: Vec<Factor>) -> Self {
        Self { n, factors }
    }

    pub fn input_len(&self) -> usize {
        self.n.pow(self.factors.len() as u32)
    }

    pub fn output_len(&self) -> usize {
        self.factors.iter().map(|f| f.rows(self.n)).product()
    }

    fn shape_in(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for s in s.iter_mut().take(self.factors.len()) {
            *s = self.n;
        }
        s
    }

    pub fn apply(&self, input: &[f64], output: &mut [f64]) {
        let mut cur = input.to_vec();
        let mut buf = Vec::new();
        let mut shape = self.shape_in();
        for (k, f) in self.factors.iter().enumerate() {
            if matches!(f, Factor::Identity) {
                continue;
            }
            shape = contract(&cur, &shape, k, f, self.n, false, &mut buf);
            std::mem::swap(&mut cur, &mut buf);
        }
        output.copy_from_slice(&cur);
    }

    pub fn apply_transpose(&self, input: &[f64], output: &mut [f64]) {
        let mut cur = input.to_vec();
        let mut buf = Vec::new();
        let mut shape = [1; 3];
        for (k, f) in self.factors.iter().enumerate() {
            shape[k] = f.rows(self.n);
        }
        for (k, f) in self.factors.iter().enumerate() {
            if matches!(f, Factor::Identity) {
                continue;
            }
            shape = contract(&cur, &shape, k, f, self.n, true, &mut buf);
            std::mem::swap(&mut cur, &mut buf);
        }
        output.copy_from_slice(&cur);
    }

    /// Explicit (output × input) entries, for assembling sparse storage.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let d = self.factors.len();
        let rows: Vec<usize> = self.factors.iter().map(|f| f.rows(self.n)).collect();
        let mut out = Vec::new();
        for row in 0..self.output_len() {
            let mut o = [0usize; 3];
            let mut rem = row;
            for k in 0..d {
                o[k] = rem % rows[k];
                rem /= rows[k];
            }
            for col in 0..self.input_len() {
                let mut v = 1.0;
                let mut rem = col;
                for k in 0..d {
                    let c = rem % self.n;
                    rem /= self.n;
                    v *= self.factors[k].entry(self.n, o[k], c);
                    if v == 0.0 {
                        break;
                    }
                }
                if v != 0.0 {
                    out.push((row, col, v));
                }
            }
        }
        out
    }
}
