//! Compressible Euler physics: fluxes, the entropy pair and entropy variables,
//! the entropy-conservative two-point flux, and the local Lax–Friedrichs flux.
//!
//! States always carry five components (ρ, ρv₁, ρv₂, ρv₃, E). Two-dimensional
//! problems keep ρv₃ = 0 and use normals with n₃ = 0, which the fluxes preserve
//! exactly.

use crate::error::{Error, Result};

pub const NUM_VARS: usize = 5;
pub type State = [f64; NUM_VARS];

/// Indices of the conserved variables used in `dim` dimensions.
pub fn active_vars(dim: usize) -> &'static [usize] {
    if dim == 2 {
        &[0, 1, 2, 4]
    } else {
        &[0, 1, 2, 3, 4]
    }
}

/// Logarithmic mean (a − b)/(ln a − ln b) with a series branch near a = b.
pub fn log_mean(a: f64, b: f64) -> f64 {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    let s = (y - x) / (y + x);
    let f2 = s * s;
    if f2 < 1e-4 {
        (x + y) * 52.5 / (105.0 + f2 * (35.0 + f2 * (21.0 + f2 * 15.0)))
    } else {
        (y - x) / ((y - x) / x).ln_1p()
    }
}

/// Reciprocal of [`log_mean`], computed without forming the mean first.
pub fn inv_log_mean(a: f64, b: f64) -> f64 {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    let s = (y - x) / (y + x);
    let f2 = s * s;
    if f2 < 1e-4 {
        (105.0 + f2 * (35.0 + f2 * (21.0 + f2 * 15.0))) / (52.5 * (x + y))
    } else {
        ((y - x) / x).ln_1p() / (y - x)
    }
}

/// Checked variant of [`log_mean`].
pub fn try_log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InadmissibleState("logarithmic mean of a non-positive value"));
    }
    Ok(log_mean(a, b))
}

/// Primitive variables cached per node for the two-point flux kernels.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub v: [f64; 3],
    pub p: f64,
    /// ρ/p.
    pub beta: f64,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gas {
    pub gamma: f64,
}

impl Default for Gas {
    fn default() -> Self {
        Gas { gamma: 1.4 }
    }
}

impl Gas {
    pub fn new(gamma: f64) -> Self {
        Gas { gamma }
    }

    pub fn pressure(&self, u: &State) -> f64 {
        let ke = 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0];
        (self.gamma - 1.0) * (u[4] - ke)
    }

    pub fn is_admissible(&self, u: &State) -> bool {
        u[0] > 0.0 && self.pressure(u) > 0.0 && u.iter().all(|x| x.is_finite())
    }

    pub fn conserved(&self, rho: f64, v: [f64; 3], p: f64) -> State {
        let e = p / (self.gamma - 1.0) + 0.5 * rho * dot(&v, &v);
        [rho, rho * v[0], rho * v[1], rho * v[2], e]
    }

    /// Primitive variables without admissibility checks.
    pub fn primitive_unchecked(&self, u: &State) -> Primitive {
        let rho = u[0];
        let v = [u[1] / rho, u[2] / rho, u[3] / rho];
        let p = self.pressure(u);
        Primitive { rho, v, p, beta: rho / p }
    }

    pub fn primitive(&self, u: &State) -> Result<Primitive> {
        if !self.is_admissible(u) {
            return Err(Error::InadmissibleState("non-positive density or pressure"));
        }
        Ok(self.primitive_unchecked(u))
    }

    /// Cartesian flux column m (0-based).
    pub fn flux(&self, u: &State, m: usize) -> Result<State> {
        let mut n = [0.0; 3];
        n[m] = 1.0;
        Ok(self.flux_dir(&self.primitive(u)?, &n))
    }

    /// Σ_m n_m f_m(U).
    pub fn flux_dir(&self, w: &Primitive, n: &[f64; 3]) -> State {
        let vn = dot(&w.v, n);
        let e = w.p / (self.gamma - 1.0) + 0.5 * w.rho * dot(&w.v, &w.v);
        [
            w.rho * vn,
            w.rho * w.v[0] * vn + w.p * n[0],
            w.rho * w.v[1] * vn + w.p * n[1],
            w.rho * w.v[2] * vn + w.p * n[2],
            (e + w.p) * vn,
        ]
    }

    /// Mathematical entropy 𝒮 = −ρ s/(γ−1) with s = ln(p ρ^{−γ}).
    pub fn entropy(&self, u: &State) -> Result<f64> {
        let w = self.primitive(u)?;
        Ok(self.entropy_prim(&w))
    }

    fn entropy_prim(&self, w: &Primitive) -> f64 {
        let s = w.p.ln() - self.gamma * w.rho.ln();
        -w.rho * s / (self.gamma - 1.0)
    }

    /// (𝒮, 𝓕) with 𝓕 = v 𝒮.
    pub fn entropy_pair(&self, u: &State) -> Result<(f64, [f64; 3])> {
        let w = self.primitive(u)?;
        let s = self.entropy_prim(&w);
        Ok((s, [w.v[0] * s, w.v[1] * s, w.v[2] * s]))
    }

    /// Entropy variables ∂𝒮/∂U.
    pub fn entropy_vars(&self, u: &State) -> Result<State> {
        let w = self.primitive(u)?;
        let g = self.gamma;
        let s = w.p.ln() - g * w.rho.ln();
        let q = w.beta;
        Ok([
            (g - s) / (g - 1.0) - 0.5 * q * dot(&w.v, &w.v),
            q * w.v[0],
            q * w.v[1],
            q * w.v[2],
            -q,
        ])
    }

    /// Inverse of [`entropy_vars`](Self::entropy_vars).
    pub fn conserved_from_entropy(&self, w: &State) -> Result<State> {
        Ok(self.conserved_from_prim(&self.primitive_from_entropy(w)?))
    }

    fn conserved_from_prim(&self, w: &Primitive) -> State {
        self.conserved(w.rho, w.v, w.p)
    }

    /// Primitive variables of 𝒰(w); requires w₅ < 0.
    pub fn primitive_from_entropy(&self, w: &State) -> Result<Primitive> {
        let g = self.gamma;
        let we = w[4];
        if !(we < 0.0) || !w.iter().all(|x| x.is_finite()) {
            return Err(Error::InadmissibleState("entropy variables outside the image (w_E >= 0)"));
        }
        let wv2 = w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
        let s = g - (g - 1.0) * (w[0] - 0.5 * wv2 / we);
        let rho = (-we * s.exp()).powf(1.0 / (1.0 - g));
        let p = rho / (-we);
        if !(rho > 0.0 && p > 0.0 && rho.is_finite() && p.is_finite()) {
            return Err(Error::InadmissibleState("entropy variables map to a non-admissible state"));
        }
        let v = [-w[1] / we, -w[2] / we, -w[3] / we];
        Ok(Primitive { rho, v, p, beta: -we })
    }

    /// Flux potential ψ_m = wᵀ f_m(𝒰(w)) − 𝓕_m, which equals ρ v_m.
    pub fn flux_potential(&self, w: &State) -> Result<[f64; 3]> {
        let pr = self.primitive_from_entropy(w)?;
        Ok([pr.rho * pr.v[0], pr.rho * pr.v[1], pr.rho * pr.v[2]])
    }

    /// Entropy-conservative two-point flux contracted with the direction `n`
    /// (not necessarily of unit length). The energy component is
    /// ρ_ln v̄ₙ (1/((γ−1)⟨ρ/p⟩_ln) + ½ v⁻·v⁺) + ½(p⁻ v⁺·n + p⁺ v⁻·n).
    #[inline]
    pub fn ec_flux(&self, a: &Primitive, b: &Primitive, n: &[f64; 3]) -> State {
        let rho_ln = log_mean(a.rho, b.rho);
        let inv_beta_ln = inv_log_mean(a.beta, b.beta);
        let va = [
            0.5 * (a.v[0] + b.v[0]),
            0.5 * (a.v[1] + b.v[1]),
            0.5 * (a.v[2] + b.v[2]),
        ];
        let p_avg = 0.5 * (a.p + b.p);
        let vn = dot(&va, n);
        let mass = rho_ln * vn;
        let energy = mass * (0.5 * dot(&a.v, &b.v) + inv_beta_ln / (self.gamma - 1.0))
            + 0.5 * (a.p * dot(&b.v, n) + b.p * dot(&a.v, n));
        [
            mass,
            mass * va[0] + p_avg * n[0],
            mass * va[1] + p_avg * n[1],
            mass * va[2] + p_avg * n[2],
            energy,
        ]
    }

    /// Checked entropy-conservative flux in Cartesian direction m.
    pub fn ranocha_flux(&self, ul: &State, ur: &State, m: usize) -> Result<State> {
        let mut n = [0.0; 3];
        n[m] = 1.0;
        Ok(self.ec_flux(&self.primitive(ul)?, &self.primitive(ur)?, &n))
    }

    /// Davis wave-speed estimate.
    pub fn wave_speed(&self, a: &Primitive, b: &Primitive, n: &[f64; 3]) -> f64 {
        let vn = dot(&a.v, n).abs().max(dot(&b.v, n).abs());
        let c = (self.gamma * a.p / a.rho).sqrt().max((self.gamma * b.p / b.rho).sqrt());
        vn + c
    }

    /// Local Lax–Friedrichs interface flux for unit normal `n`; with
    /// `dissipation = false` it reduces to the entropy-conservative flux.
    #[inline]
    pub fn interface_flux(
        &self,
        ul: &State,
        a: &Primitive,
        ur: &State,
        b: &Primitive,
        n: &[f64; 3],
        dissipation: bool,
    ) -> State {
        let mut f = self.ec_flux(a, b, n);
        if dissipation {
            let lam = 0.5 * self.wave_speed(a, b, n);
            for k in 0..NUM_VARS {
                f[k] -= lam * (ur[k] - ul[k]);
            }
        }
        f
    }

    /// Checked local Lax–Friedrichs flux.
    pub fn llf_flux(&self, ul: &State, ur: &State, n: &[f64; 3]) -> Result<State> {
        let a = self.primitive(ul)?;
        let b = self.primitive(ur)?;
        Ok(self.interface_flux(ul, &a, ur, &b, n, true))
    }
}
