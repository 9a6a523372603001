//! Facet pairing for periodic conforming meshes, with node permutations and
//! validation of matched normals and surface weights.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::GeometricFactors;
use crate::mesh::Mesh;
use crate::reference::ReferenceOperators;

/// Neighbor across one facet of one element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetLink {
    pub element: usize,
    pub facet: usize,
    /// `perm[i]` is the neighbor facet node matching local facet node i.
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConnectivityReport {
    /// Largest distance between matched node positions.
    pub position: f64,
    /// Largest ‖n⁻ + n⁺‖_∞ over matched nodes.
    pub normal: f64,
    /// Largest relative mismatch of ω·J_f over matched nodes.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Connectivity {
    /// Indexed by element then facet.
    pub links: Vec<Vec<FacetLink>>,
    pub report: ConnectivityReport,
}

const POSITION_TOL: f64 = 1e-10;
const VALIDATION_TOL: f64 = 1e-10;

fn periodic_distance(a: &[f64; 3], b: &[f64; 3], d: usize, l: f64) -> f64 {
    (0..d)
        .map(|c| {
            let t = a[c] - b[c];
            (t - l * (t / l).round()).abs()
        })
        .fold(0.0, f64::max)
}

/// Facet key: the sum of the facet's lattice vertex coordinates, each reduced
/// modulo (number of facet vertices)·M. On the periodic split grid this
/// identifies a facet uniquely even when M = 2, where vertex-id sets repeat.
fn facet_key(mesh: &Mesh, kappa: usize, z: usize) -> [i64; 3] {
    let element = mesh.element_type();
    let verts = element.facet_vertices(z);
    let modulus = (verts.len() * mesh.spec.m) as i64;
    let mut key = [0i64; 3];
    for &v in verts {
        let p = mesh.elements[kappa].lattice[v];
        for c in 0..3 {
            key[c] += p[c];
        }
    }
    for k in key.iter_mut() {
        *k = k.rem_euclid(modulus);
    }
    key
}

pub fn build_connectivity(mesh: &Mesh, ops: &ReferenceOperators, geom: &GeometricFactors) -> Result<Connectivity> {
    let element = mesh.element_type();
    let d = element.dim();
    let nf = element.num_facets();
    let ne = mesh.num_elements();
    let l = mesh.spec.l;
    let tol = POSITION_TOL * mesh.spec.h();

    let mut faces: HashMap<[i64; 3], Vec<(usize, usize)>> = HashMap::new();
    for kappa in 0..ne {
        for z in 0..nf {
            faces.entry(facet_key(mesh, kappa, z)).or_default().push((kappa, z));
        }
    }

    let mut links: Vec<Vec<Option<FacetLink>>> = vec![vec![None; nf]; ne];
    let mut report = ConnectivityReport::default();
    for (key, sides) in &faces {
        if sides.len() != 2 {
            let (kappa, z) = sides[0];
            return Err(Error::Connectivity {
                element: kappa,
                facet: z,
                reason: format!("facet key {key:?} shared by {} facets", sides.len()),
            });
        }
        for (a, b) in [(sides[0], sides[1]), (sides[1], sides[0])] {
            let (ka, za) = a;
            let (kb, zb) = b;
            let xa = &geom.elements[ka].x_fac[za];
            let xb = &geom.elements[kb].x_fac[zb];
            let mut perm = Vec::with_capacity(xa.len());
            let mut used = vec![false; xb.len()];
            for (i, x) in xa.iter().enumerate() {
                let (j, dist) = xb
                    .iter()
                    .enumerate()
                    .map(|(j, y)| (j, periodic_distance(x, y, d, l)))
                    .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
                if dist > tol || used[j] {
                    return Err(Error::Connectivity {
                        element: ka,
                        facet: za,
                        reason: format!("node {i} has no unique match on element {kb} facet {zb} (distance {dist:e})"),
                    });
                }
                used[j] = true;
                report.position = report.position.max(dist);
                perm.push(j);
            }

            let ga = &geom.elements[ka];
            let gb = &geom.elements[kb];
            let wa = &ops.facets[za].weights;
            let wb = &ops.facets[zb].weights;
            for (i, &j) in perm.iter().enumerate() {
                let na = ga.n_f[za][i];
                let nb = gb.n_f[zb][j];
                let nerr = (0..d).map(|c| (na[c] + nb[c]).abs()).fold(0.0, f64::max);
                let sa = wa[i] * ga.j_f[za][i];
                let sb = wb[j] * gb.j_f[zb][j];
                let werr = (sa - sb).abs() / sa.abs().max(sb.abs());
                report.normal = report.normal.max(nerr);
                report.weight = report.weight.max(werr);
                if nerr > VALIDATION_TOL || werr > VALIDATION_TOL {
                    return Err(Error::Connectivity {
                        element: ka,
                        facet: za,
                        reason: format!(
                            "mismatch with element {kb} facet {zb} at node {i}: normal {nerr:e}, weight {werr:e}"
                        ),
                    });
                }
            }
            links[ka][za] = Some(FacetLink {
                element: kb,
                facet: zb,
                perm,
            });
        }
    }

    let links = links
        .into_iter()
        .enumerate()
        .map(|(kappa, row)| {
            row.into_iter()
                .enumerate()
                .map(|(z, link)| {
                    link.ok_or_else(|| Error::Connectivity {
                        element: kappa,
                        facet: z,
                        reason: "unmatched facet".into(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Connectivity { links, report })
}
