//! Dense hybridized-operator formulation, used as a reference for the sparse
//! flux-differencing residual. Everything here is assembled explicitly and is
//! meant for small meshes in tests.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, NodeLocation, Result};
use crate::euler::{Primitive, State, NUM_VARS};
use crate::reference::ReferenceOperators;
use crate::solver::{Discretization, InterfaceFlux, MassInverse};

/// Hybridized reference operator Q̄^(l) on volume then facet nodes.
pub fn reference_hybridized(ops: &ReferenceOperators, l: usize) -> DMatrix<f64> {
    let nq = ops.num_volume_nodes();
    let nqf = ops.num_facet_nodes();
    let n = nq + ops.facets.len() * nqf;
    let mut q = DMatrix::zeros(n, n);
    let s = ops.s[l].to_dense();
    q.view_mut((0, 0), (nq, nq)).copy_from(&s);
    for (z, f) in ops.facets.iter().enumerate() {
        let nh = f.normal[l];
        let off = nq + z * nqf;
        for (k, j, v) in f.r.iter() {
            // k: facet node, j: volume node, v = R_kj.
            q[(j, off + k)] += 0.5 * nh * v * f.weights[k];
            q[(off + k, j)] -= 0.5 * nh * v * f.weights[k];
        }
        for k in 0..nqf {
            q[(off + k, off + k)] = 0.5 * nh * f.weights[k];
        }
    }
    q
}

/// Ē^(l): the facet-block diagonal n̂_l B.
pub fn reference_hybridized_boundary(ops: &ReferenceOperators, l: usize) -> DMatrix<f64> {
    let nq = ops.num_volume_nodes();
    let nqf = ops.num_facet_nodes();
    let n = nq + ops.facets.len() * nqf;
    let mut e = DMatrix::zeros(n, n);
    for (z, f) in ops.facets.iter().enumerate() {
        for k in 0..nqf {
            e[(nq + z * nqf + k, nq + z * nqf + k)] = f.normal[l] * f.weights[k];
        }
    }
    e
}

/// Physical hybridized operators Q̄^(κ,m) = Σ_l Q̄^(l) ⊙ ⟨Ḡ_lm⟩ of element κ.
pub fn physical_hybridized(disc: &Discretization, kappa: usize) -> Vec<DMatrix<f64>> {
    let ops = &disc.ops;
    let d = ops.dim();
    let eg = &disc.geom.elements[kappa];
    let mut g: Vec<[[f64; 3]; 3]> = eg.g_vol.clone();
    for gf in &eg.g_fac {
        g.extend_from_slice(gf);
    }
    let qref: Vec<DMatrix<f64>> = (0..d).map(|l| reference_hybridized(ops, l)).collect();
    let n = g.len();
    (0..d)
        .map(|m| {
            let mut out = DMatrix::zeros(n, n);
            for (l, ql) in qref.iter().enumerate() {
                for j in 0..n {
                    for i in 0..n {
                        let v = ql[(i, j)];
                        if v != 0.0 {
                            out[(i, j)] += v * 0.5 * (g[i][l][m] + g[j][l][m]);
                        }
                    }
                }
            }
            out
        })
        .collect()
}

fn dense_mass_inverse(disc: &Discretization, kappa: usize) -> Result<DMatrix<f64>> {
    let v = &disc.basis.v;
    let eg = &disc.geom.elements[kappa];
    let w = &disc.ops.weights;
    match disc.options.mass {
        MassInverse::WeightAdjusted => {
            let mut s = v.clone();
            for (i, mut row) in s.row_iter_mut().enumerate() {
                row *= w[i] / eg.j_p[i];
            }
            Ok(v.tr_mul(&s))
        }
        MassInverse::Exact => {
            let mut s = v.clone();
            for (i, mut row) in s.row_iter_mut().enumerate() {
                row *= w[i] * eg.j_p[i];
            }
            v.tr_mul(&s)
                .try_inverse()
                .ok_or_else(|| Error::Mesh("singular element mass matrix".into()))
        }
    }
}

/// Entropy-projected primitive states on volume then facet nodes.
fn projected_states(disc: &Discretization, state: &[f64], kappa: usize) -> Result<Vec<Primitive>> {
    let gas = &disc.gas;
    let v = &disc.basis.v;
    let np = disc.num_modes();
    let nq = v.nrows();
    let block = &state[kappa * NUM_VARS * np..(kappa + 1) * NUM_VARS * np];
    let minv = dense_mass_inverse(disc, kappa)?;
    let eg = &disc.geom.elements[kappa];
    let mut wt = DMatrix::zeros(np, NUM_VARS);
    let mut wnodal = DMatrix::zeros(nq, NUM_VARS);
    for e in 0..NUM_VARS {
        let c = DVector::from_column_slice(&block[e * np..(e + 1) * np]);
        wnodal.set_column(e, &(v * c));
    }
    for i in 0..nq {
        let mut u = [0.0; NUM_VARS];
        for e in 0..NUM_VARS {
            u[e] = wnodal[(i, e)];
        }
        let w = gas.entropy_vars(&u).map_err(|_| Error::Inadmissible {
            element: kappa,
            location: NodeLocation::Volume,
            node: i,
            what: "nodal state",
        })?;
        for e in 0..NUM_VARS {
            wnodal[(i, e)] = w[e] * disc.ops.weights[i] * eg.j_p[i];
        }
    }
    for e in 0..NUM_VARS {
        let rhs = v.tr_mul(&wnodal.column(e).into_owned());
        wt.set_column(e, &(&minv * rhs));
    }
    let mut out = Vec::new();
    let mut push = |vals: DMatrix<f64>| -> Result<()> {
        for i in 0..vals.nrows() {
            let mut w = [0.0; NUM_VARS];
            for e in 0..NUM_VARS {
                w[e] = vals[(i, e)];
            }
            out.push(gas.primitive_from_entropy(&w).map_err(|_| Error::Inadmissible {
                element: kappa,
                location: NodeLocation::Volume,
                node: i,
                what: "entropy-projected state",
            })?);
        }
        Ok(())
    };
    push(v * &wt)?;
    for vf in &disc.basis.v_f {
        push(vf * &wt)?;
    }
    Ok(out)
}

/// dũ/dt of element κ from the hybridized formulation.
pub fn hybridized_time_derivative(disc: &Discretization, state: &[f64], kappa: usize) -> Result<Vec<f64>> {
    let gas = &disc.gas;
    let ops = &disc.ops;
    let d = ops.dim();
    let nq = ops.num_volume_nodes();
    let nqf = ops.num_facet_nodes();
    let np = disc.num_modes();
    let qm = physical_hybridized(disc, kappa);
    let ub = projected_states(disc, state, kappa)?;
    let n = ub.len();

    let mut r = vec![[0.0; NUM_VARS]; n];
    for i in 0..n {
        for j in 0..n {
            let mut dir = [0.0; 3];
            let mut any = false;
            for m in 0..d {
                dir[m] = 2.0 * qm[m][(i, j)];
                any |= dir[m] != 0.0;
            }
            if !any {
                continue;
            }
            let f = gas.ec_flux(&ub[i], &ub[j], &dir);
            for e in 0..NUM_VARS {
                r[i][e] -= f[e];
            }
        }
    }

    let eg = &disc.geom.elements[kappa];
    let dissipation = disc.options.interface == InterfaceFlux::LaxFriedrichs;
    for z in 0..ops.facets.len() {
        let link = &disc.conn.links[kappa][z];
        let nb = projected_states(disc, state, link.element)?;
        for j in 0..nqf {
            let a = ub[nq + z * nqf + j];
            let b = nb[nq + link.facet * nqf + link.perm[j]];
            let ua: State = gas.conserved(a.rho, a.v, a.p);
            let ubb: State = gas.conserved(b.rho, b.v, b.p);
            let nrm = eg.n_f[z][j];
            let fstar = gas.interface_flux(&ua, &a, &ubb, &b, &nrm, dissipation);
            let fn_ = gas.flux_dir(&a, &nrm);
            let s = ops.facets[z].weights[j] * eg.j_f[z][j];
            for e in 0..NUM_VARS {
                r[nq + z * nqf + j][e] -= s * (fstar[e] - fn_[e]);
            }
        }
    }

    let minv = dense_mass_inverse(disc, kappa)?;
    let mut out = vec![0.0; NUM_VARS * np];
    for e in 0..NUM_VARS {
        let rv = DVector::from_iterator(nq, (0..nq).map(|i| r[i][e]));
        let mut rhs = disc.basis.v.tr_mul(&rv);
        for (z, vf) in disc.basis.v_f.iter().enumerate() {
            let rf = DVector::from_iterator(nqf, (0..nqf).map(|j| r[nq + z * nqf + j][e]));
            rhs += vf.tr_mul(&rf);
        }
        let du = &minv * rhs;
        out[e * np..(e + 1) * np].copy_from_slice(du.as_slice());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Gas;
    use crate::geometry::MetricKind;
    use crate::mesh::MeshSpec;
    use crate::reference::{build_reference_operators, ElementType};
    use crate::solver::{DiscretizationSpec, SolverOptions};

    fn disc(element: ElementType, q: usize, eps: f64, pg: usize, interface: InterfaceFlux) -> Discretization {
        let spec = DiscretizationSpec {
            mesh: MeshSpec {
                element,
                m: 2,
                l: 2.0,
                eps,
                pg,
            },
            q,
            p: q,
            metric: MetricKind::default_for(element),
            gamma: 1.4,
        };
        Discretization::build(
            &spec,
            SolverOptions {
                interface,
                ..SolverOptions::default()
            },
        )
        .unwrap()
    }

    fn smooth_state(d: &Discretization) -> Vec<f64> {
        let gas = Gas::default();
        d.project(0.0, |x| {
            gas.conserved(
                1.0 + 0.2 * (3.0 * x[0]).sin() * x[1].cos(),
                [0.3 * x[1].sin(), 0.2 + 0.1 * x[2].cos(), 0.1 * x[0].sin()],
                1.0 + 0.1 * x[0].cos(),
            )
        })
        .coeffs
    }

    #[test]
    fn reference_hybridized_is_sbp_like() {
        for (el, q) in [(ElementType::Triangle, 3), (ElementType::Tetrahedron, 2)] {
            let ops = build_reference_operators(el, q).unwrap();
            for l in 0..el.dim() {
                let qb = reference_hybridized(&ops, l);
                let eb = reference_hybridized_boundary(&ops, l);
                let sym = (&qb + qb.transpose() - eb).amax();
                assert!(sym < 1e-13, "{el} l={l}: {sym:e}");
                let row = qb.column_sum().amax();
                let col = (&qb * nalgebra::DVector::repeat(qb.ncols(), 1.0)).amax();
                assert!(col < 1e-13, "{el} l={l}: Q 1 = {col:e} ({row:e})");
            }
        }
    }

    #[test]
    fn physical_operators_annihilate_constants() {
        for (el, q, eps, pg) in [
            (ElementType::Triangle, 4, 1.0 / 16.0, 4),
            (ElementType::Tetrahedron, 3, 1.0 / 16.0, 2),
        ] {
            let d = disc(el, q, eps, pg, InterfaceFlux::LaxFriedrichs);
            for kappa in [0, d.num_elements() - 1] {
                for qm in physical_hybridized(&d, kappa) {
                    let ones = nalgebra::DVector::repeat(qm.ncols(), 1.0);
                    let r = (&qm * ones).amax();
                    assert!(r < 1e-12, "{el} κ={kappa}: {r:e}");
                }
            }
        }
    }

    #[test]
    fn sparse_residual_matches_hybridized_form() {
        for (el, q, eps, pg) in [
            (ElementType::Triangle, 2, 0.0, 1),
            (ElementType::Triangle, 3, 1.0 / 16.0, 3),
            (ElementType::Tetrahedron, 2, 1.0 / 16.0, 2),
        ] {
            for flux in [InterfaceFlux::EntropyConservative, InterfaceFlux::LaxFriedrichs] {
                let d = disc(el, q, eps, pg, flux);
                let u = smooth_state(&d);
                let mut du = vec![0.0; d.state_len()];
                d.time_derivative(&u, &mut du).unwrap();
                let block = NUM_VARS * d.num_modes();
                for kappa in [0, 3, d.num_elements() - 1] {
                    let h = hybridized_time_derivative(&d, &u, kappa).unwrap();
                    let s = &du[kappa * block..(kappa + 1) * block];
                    let scale = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    let err = h.iter().zip(s).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    assert!(err <= 1e-12 * scale, "{el} q={q} κ={kappa}: {err:e} / {scale:e}");
                }
            }
        }
    }
}
