//! Tensor-product SBP operators on the reference triangle and tetrahedron in
//! collapsed coordinates, their verification, and two-point flux counting.
//!
//! Reference domains: the triangle {ξ ∈ [-1,1]² : ξ₁ + ξ₂ ≤ 0} and the
//! tetrahedron {ξ ∈ [-1,1]³ : ξ₁ + ξ₂ + ξ₃ ≤ -1}. Volume nodes are ordered with
//! the η₁ index fastest, facet nodes with the first facet coordinate fastest.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{build_rule, lagrange_diff_matrix, lagrange_eval_matrix, JacobiWeight, Rule1D, RuleKind};
use crate::sparse::SparseMatrix;
use crate::tensor::{Factor, KroneckerOp};

/// Points are stored with three components; the third is zero in 2-D.
pub type Point = [f64; 3];

/// Entries with magnitude at or below this fraction of the matrix maximum are
/// treated as structural zeros.
pub const SPARSITY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementType {
    #[serde(alias = "tri")]
    Triangle,
    #[serde(alias = "tet")]
    Tetrahedron,
}

impl ElementType {
    pub fn dim(self) -> usize {
        match self {
            ElementType::Triangle => 2,
            ElementType::Tetrahedron => 3,
        }
    }

    pub fn num_facets(self) -> usize {
        self.dim() + 1
    }

    /// Area or volume of the reference simplex.
    pub fn reference_measure(self) -> f64 {
        match self {
            ElementType::Triangle => 2.0,
            ElementType::Tetrahedron => 4.0 / 3.0,
        }
    }

    pub fn reference_vertices(self) -> Vec<Point> {
        match self {
            ElementType::Triangle => vec![[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0]],
            ElementType::Tetrahedron => vec![
                [-1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0],
                [-1.0, 1.0, -1.0],
                [-1.0, -1.0, 1.0],
            ],
        }
    }

    /// Indices into [`reference_vertices`](Self::reference_vertices) of facet `z`.
    pub fn facet_vertices(self, z: usize) -> &'static [usize] {
        match self {
            ElementType::Triangle => [&[0, 1][..], &[1, 2], &[0, 2]][z],
            ElementType::Tetrahedron => [&[0, 1, 3][..], &[1, 2, 3], &[0, 2, 3], &[0, 1, 2]][z],
        }
    }

    /// Outward unit normal of reference facet `z`.
    pub fn reference_normal(self, z: usize) -> Point {
        match self {
            ElementType::Triangle => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [[0.0, -1.0, 0.0], [s, s, 0.0], [-1.0, 0.0, 0.0]][z]
            }
            ElementType::Tetrahedron => {
                let s = 1.0 / 3f64.sqrt();
                [[0.0, -1.0, 0.0], [s, s, s], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]][z]
            }
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ElementType::Triangle => "tri",
            ElementType::Tetrahedron => "tet",
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ElementType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tri" | "triangle" => Ok(ElementType::Triangle),
            "tet" | "tetrahedron" => Ok(ElementType::Tetrahedron),
            other => Err(Error::Config(format!("unknown element type '{other}'"))),
        }
    }
}

/// The collapsed-coordinate map χ from the square/cube onto the reference simplex.
pub fn collapsed_map(element: ElementType, eta: &Point) -> Point {
    match element {
        ElementType::Triangle => [0.5 * (1.0 + eta[0]) * (1.0 - eta[1]) - 1.0, eta[1], 0.0],
        ElementType::Tetrahedron => [
            0.25 * (1.0 + eta[0]) * (1.0 - eta[1]) * (1.0 - eta[2]) - 1.0,
            0.5 * (1.0 + eta[1]) * (1.0 - eta[2]) - 1.0,
            eta[2],
        ],
    }
}

/// Inverse of [`collapsed_map`]; collapsed directions take the value -1 where
/// the map is singular.
pub fn inverse_collapsed_map(element: ElementType, xi: &Point) -> Result<Point> {
    const TOL: f64 = 1e-12;
    let d = element.dim();
    let sum: f64 = xi[..d].iter().sum();
    let bound = if d == 2 { 0.0 } else { -1.0 };
    if xi[..d].iter().any(|&x| x < -1.0 - TOL) || sum > bound + TOL {
        return Err(Error::OutsideSimplex(xi[..d].to_vec()));
    }
    let ratio = |num: f64, den: f64| if den.abs() < 1e-300 { -1.0 } else { 2.0 * num / den - 1.0 };
    Ok(match element {
        ElementType::Triangle => [ratio(1.0 + xi[0], 1.0 - xi[1]), xi[1], 0.0],
        ElementType::Tetrahedron => [
            ratio(1.0 + xi[0], -xi[1] - xi[2]),
            ratio(1.0 + xi[1], 1.0 - xi[2]),
            xi[2],
        ],
    })
}

/// Bijection between tensor multi-indices and linear node indices, first index fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorIndexMap {
    pub dim: usize,
    pub n: usize,
}

impl TensorIndexMap {
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self, alpha: [usize; 3]) -> usize {
        (0..self.dim).rev().fold(0, |acc, k| acc * self.n + alpha[k])
    }

    pub fn multi(&self, mut i: usize) -> [usize; 3] {
        let mut a = [0; 3];
        for ak in a.iter_mut().take(self.dim) {
            *ak = i % self.n;
            i /= self.n;
        }
        a
    }
}

/// How a facet parameterizes each collapsed direction.
#[derive(Debug, Clone, Copy)]
enum DirMap {
    /// Direction follows facet coordinate `k`.
    Coord(usize),
    /// Direction is pinned to ±1.
    Fixed(f64),
}

fn facet_layout(element: ElementType, z: usize) -> (Vec<DirMap>, f64) {
    use DirMap::*;
    match element {
        ElementType::Triangle => match z {
            0 => (vec![Coord(0), Fixed(-1.0)], 1.0),
            1 => (vec![Fixed(1.0), Coord(0)], std::f64::consts::SQRT_2),
            _ => (vec![Fixed(-1.0), Coord(0)], 1.0),
        },
        ElementType::Tetrahedron => match z {
            0 => (vec![Coord(0), Fixed(-1.0), Coord(1)], 0.5),
            1 => (vec![Fixed(1.0), Coord(0), Coord(1)], 0.5 * 3f64.sqrt()),
            2 => (vec![Fixed(-1.0), Coord(0), Coord(1)], 0.5),
            _ => (vec![Coord(0), Coord(1), Fixed(-1.0)], 0.5),
        },
    }
}

/// Quadrature and extrapolation data for one reference facet.
#[derive(Debug, Clone)]
pub struct FacetOperators {
    /// Facet quadrature nodes ξ^(ζ,i).
    pub nodes: Vec<Point>,
    /// Collapsed coordinates of the facet nodes.
    pub eta: Vec<Point>,
    /// Facet weights ω^(ζ,i), the diagonal of B^(ζ).
    pub weights: Vec<f64>,
    pub normal: Point,
    /// R^(ζ) in Kronecker form for sum-factorized application.
    pub extrapolation: KroneckerOp,
    /// R^(ζ) in sparse form (N_qf × N_q).
    pub r: SparseMatrix,
    /// (R^(ζ))ᵀ B^(ζ) in sparse form (N_q × N_qf).
    pub rtb: SparseMatrix,
}

/// Reference SBP operators for one element type and degree.
#[derive(Debug, Clone)]
pub struct ReferenceOperators {
    pub element: ElementType,
    pub q: usize,
    pub index: TensorIndexMap,
    /// One-dimensional volume rules per collapsed direction.
    pub line_rules: Vec<Rule1D>,
    /// One-dimensional facet rules per facet coordinate.
    pub facet_rules: Vec<Rule1D>,
    /// Collapsed coordinates of the volume nodes.
    pub vol_eta: Vec<Point>,
    pub vol_nodes: Vec<Point>,
    /// Volume weights ω^(i), the diagonal of W.
    pub weights: Vec<f64>,
    /// D^(m), m = 1..d.
    pub d: Vec<SparseMatrix>,
    /// Q^(m) = W D^(m).
    pub q_mat: Vec<SparseMatrix>,
    /// S^(m) = (Q^(m) - Q^(m)ᵀ)/2, with exactly zero diagonal.
    pub s: Vec<SparseMatrix>,
    pub facets: Vec<FacetOperators>,
}

impl ReferenceOperators {
    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    pub fn num_volume_nodes(&self) -> usize {
        self.vol_nodes.len()
    }

    pub fn num_facet_nodes(&self) -> usize {
        self.facets[0].nodes.len()
    }

    /// E^(m) = Σ_ζ n̂_m^(ζ) (R^(ζ))ᵀ B^(ζ) R^(ζ) as a dense matrix.
    pub fn boundary_matrix(&self, m: usize) -> DMatrix<f64> {
        let n = self.num_volume_nodes();
        let mut e = DMatrix::zeros(n, n);
        for f in &self.facets {
            let nm = f.normal[m];
            if nm == 0.0 {
                continue;
            }
            for k in 0..f.nodes.len() {
                let (cols, vals) = f.r.row(k);
                let wk = f.weights[k] * nm;
                for (a, &i) in cols.iter().enumerate() {
                    for (b, &j) in cols.iter().enumerate() {
                        e[(i, j)] += wk * vals[a] * vals[b];
                    }
                }
            }
        }
        e
    }
}

fn line_rules(element: ElementType, q: usize) -> Result<(Vec<Rule1D>, Vec<Rule1D>)> {
    let lg = build_rule(RuleKind::Gauss, JacobiWeight::LEGENDRE, q)?;
    match element {
        ElementType::Triangle => Ok((vec![lg.clone(), lg.clone()], vec![lg])),
        ElementType::Tetrahedron => {
            let jg = build_rule(RuleKind::Gauss, JacobiWeight { a: 1.0, b: 0.0 }, q)?;
            Ok((vec![lg.clone(), lg.clone(), jg.clone()], vec![lg, jg]))
        }
    }
}

pub fn build_reference_operators(element: ElementType, q: usize) -> Result<ReferenceOperators> {
    if q == 0 {
        return Err(Error::InvalidDegree("reference operators require q >= 1".into()));
    }
    let d = element.dim();
    let n = q + 1;
    let index = TensorIndexMap { dim: d, n };
    let nq = index.len();
    let (rules, frules) = line_rules(element, q)?;
    let diff: Vec<DMatrix<f64>> = rules
        .iter()
        .map(|r| lagrange_diff_matrix(&r.nodes))
        .collect::<Result<_>>()?;

    let mut vol_eta = Vec::with_capacity(nq);
    let mut weights = Vec::with_capacity(nq);
    for i in 0..nq {
        let a = index.multi(i);
        let mut eta = [0.0; 3];
        let mut w = 1.0;
        for k in 0..d {
            eta[k] = rules[k].nodes[a[k]];
            w *= rules[k].weights[a[k]];
        }
        w *= match element {
            ElementType::Triangle => 0.5 * (1.0 - eta[1]),
            ElementType::Tetrahedron => 0.125 * (1.0 - eta[1]) * (1.0 - eta[2]),
        };
        vol_eta.push(eta);
        weights.push(w);
    }
    let vol_nodes: Vec<Point> = vol_eta.iter().map(|e| collapsed_map(element, e)).collect();

    // Derivative operators from the chain rule through the collapsed map.
    let mut trip: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); d];
    for i in 0..nq {
        let a = index.multi(i);
        let e = vol_eta[i];
        for b1 in 0..n {
            let j = index.index([b1, a[1], a[2]]);
            let l1 = diff[0][(a[0], b1)];
            match element {
                ElementType::Triangle => {
                    trip[0].push((i, j, 2.0 / (1.0 - e[1]) * l1));
                    trip[1].push((i, j, (1.0 + e[0]) / (1.0 - e[1]) * l1));
                }
                ElementType::Tetrahedron => {
                    let c = 1.0 / ((1.0 - e[1]) * (1.0 - e[2]));
                    trip[0].push((i, j, 4.0 * c * l1));
                    trip[1].push((i, j, 2.0 * (1.0 + e[0]) * c * l1));
                    trip[2].push((i, j, 2.0 * (1.0 + e[0]) * c * l1));
                }
            }
        }
        for b2 in 0..n {
            let j = index.index([a[0], b2, a[2]]);
            let l2 = diff[1][(a[1], b2)];
            match element {
                ElementType::Triangle => trip[1].push((i, j, l2)),
                ElementType::Tetrahedron => {
                    trip[1].push((i, j, 2.0 / (1.0 - e[2]) * l2));
                    trip[2].push((i, j, (1.0 + e[1]) / (1.0 - e[2]) * l2));
                }
            }
        }
        if element == ElementType::Tetrahedron {
            for b3 in 0..n {
                let j = index.index([a[0], a[1], b3]);
                trip[2].push((i, j, diff[2][(a[2], b3)]));
            }
        }
    }
    let dmat: Vec<SparseMatrix> = trip
        .into_iter()
        .map(|t| SparseMatrix::from_triplets(nq, nq, t, SPARSITY_THRESHOLD))
        .collect();
    let q_mat: Vec<SparseMatrix> = dmat
        .iter()
        .map(|dm| {
            let t = dm.iter().map(|(i, j, v)| (i, j, weights[i] * v)).collect();
            SparseMatrix::from_triplets(nq, nq, t, SPARSITY_THRESHOLD)
        })
        .collect();
    let s: Vec<SparseMatrix> = q_mat
        .iter()
        .map(|qm| {
            let mut t = Vec::with_capacity(2 * qm.nnz());
            for (i, j, v) in qm.iter() {
                t.push((i, j, 0.5 * v));
                t.push((j, i, -0.5 * v));
            }
            SparseMatrix::from_triplets(nq, nq, t, SPARSITY_THRESHOLD)
        })
        .collect();

    let mut facets = Vec::with_capacity(element.num_facets());
    for z in 0..element.num_facets() {
        let (layout, scale) = facet_layout(element, z);
        let fidx = TensorIndexMap { dim: d - 1, n };
        let nqf = fidx.len();
        let mut eta_f = Vec::with_capacity(nqf);
        let mut wf = Vec::with_capacity(nqf);
        for i in 0..nqf {
            let a = fidx.multi(i);
            let mut eta = [0.0; 3];
            for (k, m) in layout.iter().enumerate() {
                eta[k] = match *m {
                    DirMap::Coord(c) => frules[c].nodes[a[c]],
                    DirMap::Fixed(v) => v,
                };
            }
            let w: f64 = (0..d - 1).map(|c| frules[c].weights[a[c]]).product();
            eta_f.push(eta);
            wf.push(scale * w);
        }
        let factors = layout
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let target: Vec<f64> = match *m {
                    DirMap::Coord(c) => {
                        if frules[c].nodes == rules[k].nodes {
                            return Ok(Factor::Identity);
                        }
                        frules[c].nodes.clone()
                    }
                    DirMap::Fixed(v) => vec![v],
                };
                Ok(Factor::from_matrix(&lagrange_eval_matrix(&rules[k].nodes, &target)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let extrapolation = KroneckerOp::new(n, factors);
        let r = SparseMatrix::from_triplets(nqf, nq, extrapolation.entries(), SPARSITY_THRESHOLD);
        let rtb = SparseMatrix::from_triplets(
            nq,
            nqf,
            r.iter().map(|(i, j, v)| (j, i, v * wf[i])).collect(),
            SPARSITY_THRESHOLD,
        );
        facets.push(FacetOperators {
            nodes: eta_f.iter().map(|e| collapsed_map(element, e)).collect(),
            eta: eta_f,
            weights: wf,
            normal: element.reference_normal(z),
            extrapolation,
            r,
            rtb,
        });
    }

    Ok(ReferenceOperators {
        element,
        q,
        index,
        line_rules: rules,
        facet_rules: frules,
        vol_eta,
        vol_nodes,
        weights,
        d: dmat,
        q_mat,
        s,
        facets,
    })
}

/// Number of two-point flux evaluations per element for flux differencing:
/// Σ_l nnz(S^(l))/2 + Σ_ζ nnz((R^(ζ))ᵀ B^(ζ)).
pub fn count_two_point_fluxes(ops: &ReferenceOperators) -> usize {
    ops.s.iter().map(|s| s.nnz() / 2).sum::<usize>()
        + ops.facets.iter().map(|f| f.rtb.nnz()).sum::<usize>()
}

/// Closed-form count for the tensor-product operators.
pub fn tensor_flux_count_closed_form(element: ElementType, q: usize) -> usize {
    let n = q + 1;
    match element {
        ElementType::Triangle => 3 * n * n * (q + 2) / 2,
        ElementType::Tetrahedron => 4 * n.pow(4),
    }
}

/// Count for a dense multidimensional SBP operator with `nq` volume and `nqf`
/// facet nodes, where only diagonal entries of S vanish.
pub fn multidim_flux_count(nq: usize, nqf: usize, d: usize, nf: usize) -> usize {
    d * nq * (nq.saturating_sub(1)) / 2 + nf * nq * nqf
}

/// Published node counts of symmetric multidimensional rules used for comparison,
/// as (volume, facet) node counts. Only degrees 2, 5 and 10 are tabulated.
pub fn multidim_node_counts(element: ElementType, q: usize) -> Option<(usize, usize)> {
    let tri = |q: usize| match q {
        2 => Some(6),
        5 => Some(25),
        10 => Some(85),
        _ => None,
    };
    match element {
        ElementType::Triangle => tri(q).map(|v| (v, q + 1)),
        ElementType::Tetrahedron => {
            let v = match q {
                2 => 14,
                5 => 81,
                10 => 552,
                _ => return None,
            };
            tri(q).map(|f| (v, f))
        }
    }
}

/// Monomial exponents of total degree at most `k` in `d` variables.
pub fn monomial_exponents(d: usize, k: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=k {
        for b in 0..=(k - a) {
            if d == 2 {
                out.push([a as u32, b as u32, 0]);
            } else {
                for c in 0..=(k - a - b) {
                    out.push([a as u32, b as u32, c as u32]);
                }
            }
        }
    }
    out
}

pub fn monomial(alpha: &[u32; 3], x: &Point) -> f64 {
    x[0].powi(alpha[0] as i32) * x[1].powi(alpha[1] as i32) * x[2].powi(alpha[2] as i32)
}

fn monomial_derivative(alpha: &[u32; 3], m: usize, x: &Point) -> f64 {
    if alpha[m] == 0 {
        return 0.0;
    }
    let mut a = *alpha;
    a[m] -= 1;
    alpha[m] as f64 * monomial(&a, x)
}

/// Exact ∫ ξ^α over the reference simplex, using ξ = 2λ - 1 and the Dirichlet
/// moments of the unit simplex in integer arithmetic.
pub fn simplex_monomial_integral(element: ElementType, alpha: &[u32; 3]) -> f64 {
    let d = element.dim();
    let fact = |n: u32| (1..=n as i128).product::<i128>();
    let binom = |n: u32, k: u32| fact(n) / (fact(k) * fact(n - k));
    let total: u32 = alpha[..d].iter().sum();
    let top = fact(total + d as u32);
    let mut sum: i128 = 0;
    let b2 = if d == 3 { alpha[2] } else { 0 };
    for b0 in 0..=alpha[0] {
        for b1 in 0..=alpha[1] {
            for bz in 0..=b2 {
                let beta = [b0, b1, bz];
                let mut term: i128 = 1;
                for k in 0..d {
                    let sign = if (alpha[k] - beta[k]).is_multiple_of(2) { 1 } else { -1 };
                    term *= sign * binom(alpha[k], beta[k]) * (1i128 << beta[k]) * fact(beta[k]);
                }
                let bsum: u32 = beta[..d].iter().sum();
                term *= top / fact(bsum + d as u32);
                sum += term;
            }
        }
    }
    2f64.powi(d as i32) * sum as f64 / top as f64
}

/// Independent facet quadrature (nodes, weights) from Gauss-Legendre rules on a
/// Duffy-mapped square, exact for facet polynomials of degree ≤ 2·index.
pub fn independent_facet_rule(element: ElementType, z: usize, index: usize) -> Result<(Vec<Point>, Vec<f64>)> {
    let verts = element.reference_vertices();
    let fv: Vec<Point> = element.facet_vertices(z).iter().map(|&i| verts[i]).collect();
    let lg = build_rule(RuleKind::Gauss, JacobiWeight::LEGENDRE, index + 1)?;
    let sub = |a: &Point, b: &Point| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let norm = |a: &Point| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    match element {
        ElementType::Triangle => {
            let e = sub(&fv[1], &fv[0]);
            let len = norm(&e);
            for (u, w) in lg.nodes.iter().zip(&lg.weights) {
                let s = 0.5 * (1.0 + u);
                pts.push([fv[0][0] + s * e[0], fv[0][1] + s * e[1], 0.0]);
                wts.push(0.5 * len * w);
            }
        }
        ElementType::Tetrahedron => {
            let e1 = sub(&fv[1], &fv[0]);
            let e2 = sub(&fv[2], &fv[0]);
            let cross = [
                e1[1] * e2[2] - e1[2] * e2[1],
                e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0],
            ];
            let area2 = norm(&cross);
            for (u, wu) in lg.nodes.iter().zip(&lg.weights) {
                for (v, wv) in lg.nodes.iter().zip(&lg.weights) {
                    let s = 0.25 * (1.0 + u) * (1.0 - v);
                    let t = 0.5 * (1.0 + v);
                    pts.push([
                        fv[0][0] + s * e1[0] + t * e2[0],
                        fv[0][1] + s * e1[1] + t * e2[1],
                        fv[0][2] + s * e1[2] + t * e2[2],
                    ]);
                    wts.push(area2 * 0.125 * (1.0 - v) * wu * wv);
                }
            }
        }
    }
    Ok((pts, wts))
}

/// Maximum residuals of the SBP construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct SbpReport {
    /// max |Q + Qᵀ - E|.
    pub sbp: f64,
    /// max over monomial pairs |uᵀ E v - ∮ u v n̂|.
    pub e_decomposition: f64,
    /// D exactness on P_q.
    pub derivative: f64,
    /// R exactness on traces of P_q.
    pub extrapolation: f64,
    /// Volume rule exactness on P_{2q-1}.
    pub volume_quadrature: f64,
    /// Facet rule exactness on degree 2q+1 (triangle) or 2q (tetrahedron).
    pub facet_quadrature: f64,
}

impl SbpReport {
    pub fn max(&self) -> f64 {
        [
            self.sbp,
            self.e_decomposition,
            self.derivative,
            self.extrapolation,
            self.volume_quadrature,
            self.facet_quadrature,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("sbp", self.sbp),
            ("e_decomposition", self.e_decomposition),
            ("derivative", self.derivative),
            ("extrapolation", self.extrapolation),
            ("volume_quadrature", self.volume_quadrature),
            ("facet_quadrature", self.facet_quadrature),
        ]
    }
}

pub fn verify_sbp(ops: &ReferenceOperators) -> Result<SbpReport> {
    let el = ops.element;
    let d = el.dim();
    let q = ops.q;
    let nq = ops.num_volume_nodes();
    let mut rep = SbpReport::default();

    let e: Vec<DMatrix<f64>> = (0..d).map(|m| ops.boundary_matrix(m)).collect();
    for m in 0..d {
        let qd = ops.q_mat[m].to_dense();
        let res = &qd + qd.transpose() - &e[m];
        rep.sbp = rep.sbp.max(res.amax());
    }

    let basis = monomial_exponents(d, q);
    let frules: Vec<(Vec<Point>, Vec<f64>)> = (0..el.num_facets())
        .map(|z| independent_facet_rule(el, z, q + 2))
        .collect::<Result<_>>()?;
    let nodal: Vec<Vec<f64>> = basis
        .iter()
        .map(|a| ops.vol_nodes.iter().map(|x| monomial(a, x)).collect())
        .collect();
    let on_facets: Vec<Vec<Vec<f64>>> = frules
        .iter()
        .map(|(pts, _)| basis.iter().map(|a| pts.iter().map(|x| monomial(a, x)).collect()).collect())
        .collect();
    for m in 0..d {
        let ev: Vec<Vec<f64>> = nodal
            .iter()
            .map(|v| {
                let y = &e[m] * nalgebra::DVector::from_column_slice(v);
                y.as_slice().to_vec()
            })
            .collect();
        for (a, u) in nodal.iter().enumerate() {
            for b in 0..basis.len() {
                let discrete: f64 = u.iter().zip(&ev[b]).map(|(x, y)| x * y).sum();
                let mut exact = 0.0;
                for (z, (_, w)) in frules.iter().enumerate() {
                    let nm = el.reference_normal(z)[m];
                    if nm == 0.0 {
                        continue;
                    }
                    let fa = &on_facets[z][a];
                    let fb = &on_facets[z][b];
                    exact += nm * (0..w.len()).map(|k| w[k] * fa[k] * fb[k]).sum::<f64>();
                }
                rep.e_decomposition = rep.e_decomposition.max((discrete - exact).abs());
            }
        }
    }

    let mut y = vec![0.0; nq];
    for (a, v) in basis.iter().zip(&nodal) {
        for m in 0..d {
            ops.d[m].matvec(v, &mut y);
            for (i, x) in ops.vol_nodes.iter().enumerate() {
                rep.derivative = rep.derivative.max((y[i] - monomial_derivative(a, m, x)).abs());
            }
        }
        for f in &ops.facets {
            let mut yf = vec![0.0; f.nodes.len()];
            f.r.matvec(v, &mut yf);
            for (k, x) in f.nodes.iter().enumerate() {
                rep.extrapolation = rep.extrapolation.max((yf[k] - monomial(a, x)).abs());
            }
        }
    }

    for a in monomial_exponents(d, 2 * q - 1) {
        let approx: f64 = ops
            .vol_nodes
            .iter()
            .zip(&ops.weights)
            .map(|(x, w)| w * monomial(&a, x))
            .sum();
        let exact = simplex_monomial_integral(el, &a);
        rep.volume_quadrature = rep.volume_quadrature.max((approx - exact).abs());
    }

    let facet_degree = match el {
        ElementType::Triangle => 2 * q + 1,
        ElementType::Tetrahedron => 2 * q,
    };
    for a in monomial_exponents(d, facet_degree) {
        for (z, f) in ops.facets.iter().enumerate() {
            let approx: f64 = f.nodes.iter().zip(&f.weights).map(|(x, w)| w * monomial(&a, x)).sum();
            let (pts, w) = &frules[z];
            let exact: f64 = pts.iter().zip(w).map(|(x, w)| w * monomial(&a, x)).sum();
            rep.facet_quadrature = rep.facet_quadrature.max((approx - exact).abs());
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapsed_map_examples() {
        let t = ElementType::Triangle;
        assert_eq!(collapsed_map(t, &[0.0, 0.0, 0.0]), [-0.5, 0.0, 0.0]);
        let x = collapsed_map(t, &[1.0, 0.3, 0.0]);
        assert!((x[0] + 0.3).abs() < 1e-15 && (x[1] - 0.3).abs() < 1e-15);
        let x = collapsed_map(ElementType::Tetrahedron, &[0.0, 0.0, 0.0]);
        assert_eq!(x, [-0.75, -0.5, 0.0]);
    }

    #[test]
    fn inverse_map_round_trip_and_domain() {
        for el in [ElementType::Triangle, ElementType::Tetrahedron] {
            let eta = [0.3, -0.2, 0.1];
            let x = collapsed_map(el, &eta);
            let back = inverse_collapsed_map(el, &x).unwrap();
            for k in 0..el.dim() {
                assert!((back[k] - eta[k]).abs() < 1e-14);
            }
            assert!(inverse_collapsed_map(el, &[0.5, 0.5, 0.5]).is_err());
        }
        let apex = inverse_collapsed_map(ElementType::Tetrahedron, &[-1.0, -1.0, 1.0]).unwrap();
        assert_eq!(apex, [-1.0, -1.0, 1.0]);
    }

    #[test]
    fn index_map_round_trip() {
        let m = TensorIndexMap { dim: 3, n: 4 };
        for i in 0..m.len() {
            assert_eq!(m.index(m.multi(i)), i);
        }
        assert_eq!(m.index([1, 0, 0]), 1);
        assert_eq!(m.index([0, 1, 0]), 4);
    }

    #[test]
    fn sizes_and_measures() {
        let ops = build_reference_operators(ElementType::Triangle, 1).unwrap();
        assert_eq!(ops.num_volume_nodes(), 4);
        assert_eq!(ops.num_facet_nodes(), 2);
        assert!((ops.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let ops = build_reference_operators(ElementType::Tetrahedron, 2).unwrap();
        assert_eq!(ops.num_volume_nodes(), 27);
        assert!(ops.facets.iter().all(|f| f.nodes.len() == 9));
        assert!((ops.weights.iter().sum::<f64>() - 4.0 / 3.0).abs() < 1e-14);
        assert!(ops.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn triangle_q4_has_five_node_lines() {
        let ops = build_reference_operators(ElementType::Triangle, 4).unwrap();
        let mut levels: Vec<f64> = ops.vol_nodes.iter().map(|x| x[1]).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        assert_eq!(levels.len(), 5);
    }

    #[test]
    fn facet_nodes_lie_on_their_facets() {
        for el in [ElementType::Triangle, ElementType::Tetrahedron] {
            let ops = build_reference_operators(el, 3).unwrap();
            for (z, f) in ops.facets.iter().enumerate() {
                for x in &f.nodes {
                    let on = match (el, z) {
                        (ElementType::Triangle, 0) => x[1] + 1.0,
                        (ElementType::Triangle, 1) => x[0] + x[1],
                        (ElementType::Triangle, _) => x[0] + 1.0,
                        (_, 0) => x[1] + 1.0,
                        (_, 1) => x[0] + x[1] + x[2] + 1.0,
                        (_, 2) => x[0] + 1.0,
                        _ => x[2] + 1.0,
                    };
                    assert!(on.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn triangle_r1_structure() {
        let q = 4;
        let ops = build_reference_operators(ElementType::Triangle, q).unwrap();
        for f in &ops.facets {
            for i in 0..f.nodes.len() {
                assert_eq!(f.r.row(i).0.len(), q + 1);
            }
        }
    }

    #[test]
    fn skew_diagonal_is_zero_and_constants_differentiate_to_zero() {
        let ops = build_reference_operators(ElementType::Tetrahedron, 3).unwrap();
        for s in &ops.s {
            for i in 0..s.nrows() {
                assert_eq!(s.get(i, i), 0.0);
            }
        }
        let ones = vec![1.0; ops.num_volume_nodes()];
        let mut y = vec![0.0; ones.len()];
        for dm in &ops.d {
            dm.matvec(&ones, &mut y);
            assert!(y.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn verify_small_degrees() {
        let rep = verify_sbp(&build_reference_operators(ElementType::Triangle, 3).unwrap()).unwrap();
        assert!(rep.max() < 1e-12, "{rep:?}");
        let rep = verify_sbp(&build_reference_operators(ElementType::Tetrahedron, 3).unwrap()).unwrap();
        assert!(rep.max() < 1e-11, "{rep:?}");
    }

    #[test]
    fn monomial_integrals() {
        let t = ElementType::Triangle;
        assert!((simplex_monomial_integral(t, &[0, 0, 0]) - 2.0).abs() < 1e-15);
        // ∫ ξ₁ over the triangle: centroid (-1/3, -1/3) times area 2.
        assert!((simplex_monomial_integral(t, &[1, 0, 0]) + 2.0 / 3.0).abs() < 1e-15);
        let tet = ElementType::Tetrahedron;
        assert!((simplex_monomial_integral(tet, &[0, 0, 0]) - 4.0 / 3.0).abs() < 1e-15);
        assert!((simplex_monomial_integral(tet, &[0, 0, 1]) + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn counts() {
        let ops = build_reference_operators(ElementType::Triangle, 2).unwrap();
        assert_eq!(count_two_point_fluxes(&ops), 54);
        let ops = build_reference_operators(ElementType::Tetrahedron, 2).unwrap();
        assert_eq!(count_two_point_fluxes(&ops), 324);
        assert_eq!(multidim_flux_count(6, 3, 2, 3), 84);
        assert_eq!(multidim_flux_count(81, 25, 3, 4), 17820);
        assert_eq!(multidim_flux_count(1, 1, 2, 3), 3);
    }
}
