//! The entropy-stable semi-discretization: entropy projection, flux
//! differencing over the sparse SBP operators, facet corrections, interface
//! fluxes, and the weight-adjusted modal time derivative.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::connectivity::{build_connectivity, Connectivity};
use crate::error::{Error, NodeLocation, Result};
use crate::euler::{Gas, Primitive, State, NUM_VARS};
use crate::exec;
use crate::geometry::{compute_metrics_with, GeometricFactors, MetricKind};
use crate::mesh::{build_mesh, Mesh, MeshSpec};
use crate::pkd::{build_modal_basis, ApplyMode, ApplyPath, ModalBasis};
use crate::reference::{build_reference_operators, Point, ReferenceOperators};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterfaceFlux {
    /// Entropy-conservative: the two-point flux alone.
    #[serde(rename = "ec")]
    EntropyConservative,
    /// Entropy-stable: local Lax–Friedrichs dissipation added.
    #[serde(rename = "es")]
    LaxFriedrichs,
}

/// Which node pairs the flux-differencing loops visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMode {
    /// Structural nonzeros only.
    Sparse,
    /// Every pair, including structural zeros (reference path for tests).
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassInverse {
    /// M⁻¹ VᵀW J_p⁻¹ V M⁻¹ with M = I.
    WeightAdjusted,
    /// Cholesky factor of VᵀW J_p V per element (reference path for tests).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub interface: InterfaceFlux,
    pub loops: LoopMode,
    pub path: ApplyPath,
    pub mass: MassInverse,
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            interface: InterfaceFlux::LaxFriedrichs,
            loops: LoopMode::Sparse,
            path: ApplyPath::SumFactorized,
            mass: MassInverse::WeightAdjusted,
            parallel: exec::parallel_available(),
        }
    }
}

/// Counters and the entropy rate from one residual evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ResidualStats {
    pub volume_fluxes: u64,
    pub facet_fluxes: u64,
    pub interface_fluxes: u64,
    /// Σ_κ wᵀ r, the time derivative of the discrete total entropy.
    pub entropy_rate: f64,
}

impl ResidualStats {
    pub fn two_point_fluxes(&self) -> u64 {
        self.volume_fluxes + self.facet_fluxes
    }

    fn merge(&mut self, o: &ResidualStats) {
        self.volume_fluxes += o.volume_fluxes;
        self.facet_fluxes += o.facet_fluxes;
        self.interface_fluxes += o.interface_fluxes;
        self.entropy_rate += o.entropy_rate;
    }
}

/// Per-element modal coefficients, variable-major within each element block.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub t: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub t: f64,
    /// Σ 1ᵀ W J u per conserved variable.
    pub totals: State,
    /// Σ 1ᵀ W J 𝒮(u).
    pub entropy: f64,
    /// Σ 1ᵀ W J |𝒮(u)|, the scale for relative entropy changes.
    pub entropy_scale: f64,
    pub entropy_rate: f64,
}

/// Entropy-projected data of one element.
#[derive(Debug, Clone)]
pub struct ProjectedEntropy {
    /// w̃, variable-major modal coefficients.
    pub modal: Vec<f64>,
    /// w at volume nodes, variable-major.
    pub volume: Vec<f64>,
    /// w at facet nodes per facet, one state per node.
    pub facets: Vec<Vec<State>>,
}

/// Output of the first residual phase for one element.
struct Trace {
    w_vol: Vec<f64>,
    prim_vol: Vec<Primitive>,
    u_fac: Vec<Vec<State>>,
    prim_fac: Vec<Vec<Primitive>>,
}

struct ElementData {
    /// ω_i J_p(ξ_i).
    wj: Vec<f64>,
    /// ω_i / J_p(ξ_i).
    w_over_j: Vec<f64>,
    exact_mass: Option<Cholesky<f64, Dyn>>,
}

/// Everything needed to evaluate the semi-discrete operator on one mesh.
pub struct Discretization {
    pub ops: ReferenceOperators,
    pub basis: ModalBasis,
    pub mesh: Mesh,
    pub geom: GeometricFactors,
    pub conn: Connectivity,
    pub gas: Gas,
    pub options: SolverOptions,
    elements: Vec<ElementData>,
    /// Pairs (i, j, S_ij), i < j, per reference direction.
    volume_pairs: PairLists,
    /// Entries (i, j, [RᵀB]_ij) per facet.
    facet_pairs: PairLists,
}

/// Inputs for [`Discretization::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationSpec {
    pub mesh: MeshSpec,
    pub q: usize,
    pub p: usize,
    pub metric: MetricKind,
    pub gamma: f64,
}

/// Sparse (row, column, value) entries, one list per direction or facet.
type PairLists = Vec<Vec<(u32, u32, f64)>>;

fn pair_lists(ops: &ReferenceOperators, loops: LoopMode) -> (PairLists, PairLists) {
    let nq = ops.num_volume_nodes();
    let volume = ops
        .s
        .iter()
        .map(|s| match loops {
            LoopMode::Sparse => s
                .iter()
                .filter(|&(i, j, _)| i < j)
                .map(|(i, j, v)| (i as u32, j as u32, v))
                .collect(),
            LoopMode::Dense => {
                let dense = s.to_dense();
                let mut out = Vec::with_capacity(nq * (nq - 1) / 2);
                for i in 0..nq {
                    for j in i + 1..nq {
                        out.push((i as u32, j as u32, dense[(i, j)]));
                    }
                }
                out
            }
        })
        .collect();
    let facet = ops
        .facets
        .iter()
        .map(|f| match loops {
            LoopMode::Sparse => f.rtb.iter().map(|(i, j, v)| (i as u32, j as u32, v)).collect(),
            LoopMode::Dense => {
                let dense = f.rtb.to_dense();
                let mut out = Vec::with_capacity(dense.len());
                for i in 0..dense.nrows() {
                    for j in 0..dense.ncols() {
                        out.push((i as u32, j as u32, dense[(i, j)]));
                    }
                }
                out
            }
        })
        .collect();
    (volume, facet)
}

fn row_dir(g: &[[f64; 3]; 3], l: usize) -> [f64; 3] {
    g[l]
}

impl Discretization {
    pub fn new(
        ops: ReferenceOperators,
        basis: ModalBasis,
        mesh: Mesh,
        geom: GeometricFactors,
        conn: Connectivity,
        gas: Gas,
        options: SolverOptions,
    ) -> Result<Self> {
        let (volume_pairs, facet_pairs) = pair_lists(&ops, options.loops);
        let mut elements = Vec::with_capacity(mesh.num_elements());
        for eg in &geom.elements {
            let wj: Vec<f64> = eg.j_p.iter().zip(&ops.weights).map(|(j, w)| j * w).collect();
            let w_over_j: Vec<f64> = eg.j_p.iter().zip(&ops.weights).map(|(j, w)| w / j).collect();
            let exact_mass = match options.mass {
                MassInverse::WeightAdjusted => None,
                MassInverse::Exact => {
                    let v = &basis.v;
                    let mut wv = v.clone();
                    for (i, mut row) in wv.row_iter_mut().enumerate() {
                        row *= wj[i];
                    }
                    let m = v.tr_mul(&wv);
                    Some(Cholesky::new(m).ok_or_else(|| Error::Mesh("element mass matrix is not positive definite".into()))?)
                }
            };
            elements.push(ElementData {
                wj,
                w_over_j,
                exact_mass,
            });
        }
        Ok(Discretization {
            ops,
            basis,
            mesh,
            geom,
            conn,
            gas,
            options,
            elements,
            volume_pairs,
            facet_pairs,
        })
    }

    /// Builds operators, basis, mesh, metrics and connectivity from a spec.
    pub fn build(spec: &DiscretizationSpec, options: SolverOptions) -> Result<Self> {
        let ops = build_reference_operators(spec.mesh.element, spec.q)?;
        let basis = build_modal_basis(&ops, spec.p)?;
        let mesh = build_mesh(spec.mesh)?;
        let geom = compute_metrics_with(&mesh, &ops, spec.metric)?;
        let conn = build_connectivity(&mesh, &ops, &geom)?;
        Self::new(ops, basis, mesh, geom, conn, Gas::new(spec.gamma), options)
    }

    /// Same discretization with different options (shares no state).
    pub fn with_options(&self, options: SolverOptions) -> Result<Self> {
        Self::new(
            self.ops.clone(),
            self.basis.clone(),
            self.mesh.clone(),
            self.geom.clone(),
            self.conn.clone(),
            self.gas,
            options,
        )
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn num_modes(&self) -> usize {
        self.basis.num_modes()
    }

    fn block_len(&self) -> usize {
        NUM_VARS * self.num_modes()
    }

    pub fn state_len(&self) -> usize {
        self.num_elements() * self.block_len()
    }

    fn v_forward(&self, c: &[f64], u: &mut [f64]) {
        match self.options.path {
            ApplyPath::SumFactorized => self.basis.forward(c, u),
            ApplyPath::Dense => self
                .basis
                .apply(c, u, ApplyMode::Forward, ApplyPath::Dense)
                .expect("sizes fixed by construction"),
        }
    }

    fn v_transpose(&self, u: &[f64], c: &mut [f64]) {
        match self.options.path {
            ApplyPath::SumFactorized => self.basis.transpose(u, c),
            ApplyPath::Dense => self
                .basis
                .apply(u, c, ApplyMode::Transpose, ApplyPath::Dense)
                .expect("sizes fixed by construction"),
        }
    }

    fn extrapolate(&self, z: usize, vol: &[f64], out: &mut [f64]) {
        let f = &self.ops.facets[z];
        match self.options.path {
            ApplyPath::SumFactorized => f.extrapolation.apply(vol, out),
            ApplyPath::Dense => f.r.matvec(vol, out),
        }
    }

    fn extrapolate_transpose_add(&self, z: usize, fac: &[f64], vol: &mut [f64]) {
        let f = &self.ops.facets[z];
        let mut tmp = vec![0.0; vol.len()];
        match self.options.path {
            ApplyPath::SumFactorized => f.extrapolation.apply_transpose(fac, &mut tmp),
            ApplyPath::Dense => f.r.transpose_matvec(fac, &mut tmp),
        }
        for (a, b) in vol.iter_mut().zip(&tmp) {
            *a += b;
        }
    }

    /// Applies the inverse of the (weight-adjusted or exact) mass matrix of
    /// element κ to the modal vector `rhs` (one variable).
    fn mass_inverse(&self, kappa: usize, rhs: &[f64], out: &mut [f64]) {
        let el = &self.elements[kappa];
        match &el.exact_mass {
            Some(ch) => {
                let x = ch.solve(&DVector::from_column_slice(rhs));
                out.copy_from_slice(x.as_slice());
            }
            None => {
                let nq = self.ops.num_volume_nodes();
                let mut u = vec![0.0; nq];
                self.v_forward(rhs, &mut u);
                for (ui, s) in u.iter_mut().zip(&el.w_over_j) {
                    *ui *= s;
                }
                self.v_transpose(&u, out);
            }
        }
    }

    /// Nodal conserved states at the volume nodes of element κ.
    pub fn nodal_values(&self, state: &[f64], kappa: usize) -> Vec<State> {
        let np = self.num_modes();
        let nq = self.ops.num_volume_nodes();
        let block = &state[kappa * self.block_len()..(kappa + 1) * self.block_len()];
        let mut out = vec![[0.0; NUM_VARS]; nq];
        let mut u = vec![0.0; nq];
        for e in 0..NUM_VARS {
            self.v_forward(&block[e * np..(e + 1) * np], &mut u);
            for i in 0..nq {
                out[i][e] = u[i];
            }
        }
        out
    }

    /// Weight-adjusted (or exact-mass) projection of nodal values onto the
    /// modal space of element κ, one variable.
    fn project_nodal(&self, kappa: usize, nodal: &[f64], out: &mut [f64]) {
        let np = self.num_modes();
        let el = &self.elements[kappa];
        let scaled: Vec<f64> = nodal.iter().zip(&el.wj).map(|(u, w)| u * w).collect();
        let mut rhs = vec![0.0; np];
        self.v_transpose(&scaled, &mut rhs);
        self.mass_inverse(kappa, &rhs, out);
    }

    /// Projects a pointwise function of physical position onto the solution space.
    pub fn project<F>(&self, t: f64, f: F) -> SolutionState
    where
        F: Fn(&Point) -> State + Sync + Send,
    {
        let np = self.num_modes();
        let nq = self.ops.num_volume_nodes();
        let mut coeffs = vec![0.0; self.state_len()];
        exec::for_each_chunk(&mut coeffs, self.block_len(), self.options.parallel, |kappa, block| {
            let vals: Vec<State> = self.geom.elements[kappa].x_vol.iter().map(&f).collect();
            let mut nodal = vec![0.0; nq];
            for e in 0..NUM_VARS {
                for i in 0..nq {
                    nodal[i] = vals[i][e];
                }
                self.project_nodal(kappa, &nodal, &mut block[e * np..(e + 1) * np]);
            }
        });
        SolutionState { t, coeffs }
    }

    /// Entropy projection of element κ.
    pub fn entropy_projection(&self, state: &[f64], kappa: usize) -> Result<ProjectedEntropy> {
        let np = self.num_modes();
        let nq = self.ops.num_volume_nodes();
        let nodal = self.nodal_values(state, kappa);
        let mut wn = vec![0.0; NUM_VARS * nq];
        for (i, u) in nodal.iter().enumerate() {
            let w = self.gas.entropy_vars(u).map_err(|_| Error::Inadmissible {
                element: kappa,
                location: NodeLocation::Volume,
                node: i,
                what: "nodal state",
            })?;
            for e in 0..NUM_VARS {
                wn[e * nq + i] = w[e];
            }
        }
        let mut modal = vec![0.0; NUM_VARS * np];
        let mut volume = vec![0.0; NUM_VARS * nq];
        for e in 0..NUM_VARS {
            self.project_nodal(kappa, &wn[e * nq..(e + 1) * nq], &mut modal[e * np..(e + 1) * np]);
            self.v_forward(&modal[e * np..(e + 1) * np], &mut volume[e * nq..(e + 1) * nq]);
        }
        let nqf = self.ops.num_facet_nodes();
        let mut facets = Vec::with_capacity(self.ops.facets.len());
        let mut tmp = vec![0.0; nqf];
        for z in 0..self.ops.facets.len() {
            let mut fw = vec![[0.0; NUM_VARS]; nqf];
            for e in 0..NUM_VARS {
                self.extrapolate(z, &volume[e * nq..(e + 1) * nq], &mut tmp);
                for j in 0..nqf {
                    fw[j][e] = tmp[j];
                }
            }
            facets.push(fw);
        }
        Ok(ProjectedEntropy { modal, volume, facets })
    }

    fn trace(&self, state: &[f64], kappa: usize) -> Result<Trace> {
        let pe = self.entropy_projection(state, kappa)?;
        let nq = self.ops.num_volume_nodes();
        let mut prim_vol = Vec::with_capacity(nq);
        for i in 0..nq {
            let mut w = [0.0; NUM_VARS];
            for e in 0..NUM_VARS {
                w[e] = pe.volume[e * nq + i];
            }
            prim_vol.push(self.gas.primitive_from_entropy(&w).map_err(|_| Error::Inadmissible {
                element: kappa,
                location: NodeLocation::Volume,
                node: i,
                what: "entropy-projected state",
            })?);
        }
        let mut u_fac = Vec::with_capacity(pe.facets.len());
        let mut prim_fac = Vec::with_capacity(pe.facets.len());
        for (z, fw) in pe.facets.iter().enumerate() {
            let mut us = Vec::with_capacity(fw.len());
            let mut ps = Vec::with_capacity(fw.len());
            for (j, w) in fw.iter().enumerate() {
                let pr = self.gas.primitive_from_entropy(w).map_err(|_| Error::Inadmissible {
                    element: kappa,
                    location: NodeLocation::Facet(z),
                    node: j,
                    what: "entropy-projected state",
                })?;
                us.push(self.gas.conserved(pr.rho, pr.v, pr.p));
                ps.push(pr);
            }
            u_fac.push(us);
            prim_fac.push(ps);
        }
        Ok(Trace {
            w_vol: pe.volume,
            prim_vol,
            u_fac,
            prim_fac,
        })
    }

    /// Nodal residual r of element κ (before the mass inverse), with counters.
    fn element_residual(&self, kappa: usize, traces: &[Trace]) -> (Vec<State>, ResidualStats) {
        let gas = &self.gas;
        let d = self.dim();
        let tr = &traces[kappa];
        let eg = &self.geom.elements[kappa];
        let nq = self.ops.num_volume_nodes();
        let mut stats = ResidualStats::default();
        let mut vol = vec![[0.0; NUM_VARS]; nq];

        for (l, pairs) in self.volume_pairs.iter().enumerate().take(d) {
            for &(i, j, s) in pairs {
                let (i, j) = (i as usize, j as usize);
                let gi = row_dir(&eg.g_vol[i], l);
                let gj = row_dir(&eg.g_vol[j], l);
                let n = [gi[0] + gj[0], gi[1] + gj[1], gi[2] + gj[2]];
                let f = gas.ec_flux(&tr.prim_vol[i], &tr.prim_vol[j], &n);
                for e in 0..NUM_VARS {
                    let v = s * f[e];
                    vol[i][e] += v;
                    vol[j][e] -= v;
                }
            }
            stats.volume_fluxes += pairs.len() as u64;
        }

        let dissipation = self.options.interface == InterfaceFlux::LaxFriedrichs;
        let nqf = self.ops.num_facet_nodes();
        let mut r: Vec<f64> = vec![0.0; NUM_VARS * nq];
        let mut fac = vec![[0.0; NUM_VARS]; nqf];
        let mut gfac = vec![0.0; nqf];
        let mut rv = vec![0.0; nq];
        for (z, fo) in self.ops.facets.iter().enumerate() {
            let nh = fo.normal;
            let jf = &eg.j_f[z];
            let nf = &eg.n_f[z];
            for c in fac.iter_mut() {
                *c = [0.0; NUM_VARS];
            }
            for &(i, j, b) in &self.facet_pairs[z] {
                let (i, j) = (i as usize, j as usize);
                let g = &eg.g_vol[i];
                let mut n = [0.0; 3];
                for m in 0..d {
                    let gn: f64 = (0..d).map(|l| g[l][m] * nh[l]).sum();
                    n[m] = 0.5 * (gn + jf[j] * nf[j][m]);
                }
                let f = gas.ec_flux(&tr.prim_vol[i], &tr.prim_fac[z][j], &n);
                for e in 0..NUM_VARS {
                    let v = b * f[e];
                    vol[i][e] += v;
                    fac[j][e] += v;
                }
            }
            stats.facet_fluxes += self.facet_pairs[z].len() as u64;

            let link = &self.conn.links[kappa][z];
            let nb = &traces[link.element];
            let mut fstar = vec![[0.0; NUM_VARS]; nqf];
            for j in 0..nqf {
                let jn = link.perm[j];
                fstar[j] = gas.interface_flux(
                    &tr.u_fac[z][j],
                    &tr.prim_fac[z][j],
                    &nb.u_fac[link.facet][jn],
                    &nb.prim_fac[link.facet][jn],
                    &nf[j],
                    dissipation,
                );
            }
            stats.interface_fluxes += nqf as u64;
            for e in 0..NUM_VARS {
                for j in 0..nqf {
                    gfac[j] = fo.weights[j] * jf[j] * fstar[j][e] - fac[j][e];
                }
                for x in rv.iter_mut() {
                    *x = 0.0;
                }
                self.extrapolate_transpose_add(z, &gfac, &mut rv);
                for i in 0..nq {
                    r[e * nq + i] -= rv[i];
                }
            }
        }
        let mut out = vec![[0.0; NUM_VARS]; nq];
        for i in 0..nq {
            for e in 0..NUM_VARS {
                out[i][e] = r[e * nq + i] - vol[i][e];
            }
        }
        let mut rate = 0.0;
        for i in 0..nq {
            for e in 0..NUM_VARS {
                rate += tr.w_vol[e * nq + i] * out[i][e];
            }
        }
        stats.entropy_rate = rate;
        (out, stats)
    }

    /// dũ/dt for all elements, written into `out`.
    pub fn time_derivative(&self, state: &[f64], out: &mut [f64]) -> Result<ResidualStats> {
        if state.len() != self.state_len() || out.len() != self.state_len() {
            return Err(Error::DimensionMismatch {
                expected: self.state_len(),
                got: state.len().min(out.len()),
            });
        }
        let ne = self.num_elements();
        let par = self.options.parallel;
        let traces = exec::map_indexed(ne, par, |k| self.trace(state, k));
        let traces: Vec<Trace> = traces.into_iter().collect::<Result<_>>()?;

        let np = self.num_modes();
        let nq = self.ops.num_volume_nodes();
        let stats = exec::for_each_chunk(out, self.block_len(), par, |kappa, block| {
            let (r, st) = self.element_residual(kappa, &traces);
            let mut re = vec![0.0; nq];
            let mut rhs = vec![0.0; np];
            for e in 0..NUM_VARS {
                for i in 0..nq {
                    re[i] = r[i][e];
                }
                self.v_transpose(&re, &mut rhs);
                self.mass_inverse(kappa, &rhs, &mut block[e * np..(e + 1) * np]);
            }
            st
        });
        let mut total = ResidualStats::default();
        for s in &stats {
            total.merge(s);
        }
        Ok(total)
    }

    /// Conserved totals and entropy of a state; the entropy rate requires a
    /// residual evaluation.
    pub fn monitors(&self, state: &SolutionState) -> Result<MonitorSample> {
        let mut du = vec![0.0; self.state_len()];
        let stats = self.time_derivative(&state.coeffs, &mut du)?;
        let per: Vec<Result<(State, f64, f64)>> = exec::map_indexed(self.num_elements(), self.options.parallel, |k| {
            let nodal = self.nodal_values(&state.coeffs, k);
            let wj = &self.elements[k].wj;
            let mut tot = [0.0; NUM_VARS];
            let (mut s, mut sa) = (0.0, 0.0);
            for (i, u) in nodal.iter().enumerate() {
                for e in 0..NUM_VARS {
                    tot[e] += wj[i] * u[e];
                }
                let ent = self.gas.entropy(u).map_err(|_| Error::Inadmissible {
                    element: k,
                    location: NodeLocation::Volume,
                    node: i,
                    what: "nodal state",
                })?;
                s += wj[i] * ent;
                sa += wj[i] * ent.abs();
            }
            Ok((tot, s, sa))
        });
        let mut totals = [0.0; NUM_VARS];
        let (mut entropy, mut scale) = (0.0, 0.0);
        for r in per {
            let (t, s, sa) = r?;
            for e in 0..NUM_VARS {
                totals[e] += t[e];
            }
            entropy += s;
            scale += sa;
        }
        Ok(MonitorSample {
            t: state.t,
            totals,
            entropy,
            entropy_scale: scale,
            entropy_rate: stats.entropy_rate,
        })
    }

    /// Quadrature weights ω_i J_p(ξ_i) of element κ.
    pub fn weighted_jacobian(&self, kappa: usize) -> &[f64] {
        &self.elements[kappa].wj
    }

    /// Dense weight-adjusted mass inverse VᵀW J_p⁻¹ V (or the exact inverse)
    /// of element κ, for tests and the hybridized reference.
    pub fn mass_inverse_matrix(&self, kappa: usize) -> DMatrix<f64> {
        let np = self.num_modes();
        let mut m = DMatrix::zeros(np, np);
        let mut e = vec![0.0; np];
        let mut col = vec![0.0; np];
        for j in 0..np {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            self.mass_inverse(kappa, &e, &mut col);
            for i in 0..np {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}
