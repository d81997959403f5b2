//! Exact equilibrium references for the lattice-gas dynamics.
//!
//! The adsorption/desorption model with barrier U = K(n_occ - z) + h is
//! reversible for the Gibbs measure of H = -K sum_bonds s s' - mu sum_s s
//! with mu = (h - zK) + ln(c_a/c_d)/beta. Mapping to +-1 Ising variables
//! gives coupling K/4 and an external field that vanishes at h = K (1D) and
//! h = 2K (2D, with c_a = c_d), which is where the closed forms below pin
//! coverage 1/2 and the 2D critical point.
//!
//! Three routes to the same numbers, kept deliberately independent:
//! thermodynamic-limit closed forms, finite-ring transfer matrices, and
//! exhaustive Gibbs summation over small state spaces.

use crate::error::{Error, Result};
use crate::generator::StateSpace;
use crate::models::ArrheniusParams;

/// Reduced couplings of the +-1 Ising representation: K' = beta K / 4 and
/// h' = beta (mu + zK) ... / 2. With c_a = c_d on a ring (z = 2) this is
/// h' = beta (h - K) / 2.
fn reduced_1d(beta: f64, coupling: f64, field: f64) -> (f64, f64) {
    (beta * coupling / 4.0, beta * (field - coupling) / 2.0)
}

/// Equilibrium coverage of the 1D ring in the thermodynamic limit
/// (c_a = c_d).
pub fn coverage_1d(beta: f64, coupling: f64, field: f64) -> f64 {
    let (kp, hp) = reduced_1d(beta, coupling, field);
    let d = (hp.sinh().powi(2) + (-4.0 * kp).exp()).sqrt();
    0.5 * (1.0 + hp.sinh() / d)
}

/// Two-point occupancy correlation <s_0 s_k> (disconnected) on the infinite
/// 1D chain (c_a = c_d).
pub fn correlation_1d(beta: f64, coupling: f64, field: f64, k: u32) -> f64 {
    let (kp, hp) = reduced_1d(beta, coupling, field);
    let d = (hp.sinh().powi(2) + (-4.0 * kp).exp()).sqrt();
    let r = (hp.cosh() - d) / (hp.cosh() + d);
    let cbar = 0.5 * (1.0 + hp.sinh() / d);
    let amp = 0.25 / (1.0 + (4.0 * kp).exp() * hp.sinh().powi(2));
    cbar * cbar + amp * r.powi(k as i32)
}

/// Critical inverse temperature of the 2D model at field = 2 coupling.
pub fn critical_beta_2d(coupling: f64) -> f64 {
    2.0 * 1.0f64.asinh() / coupling
}

/// Equilibrium coverage of the 2D square lattice at field = 2 coupling
/// (c_a = c_d), on the occupied branch above the critical point.
pub fn coverage_2d(beta: f64, coupling: f64) -> f64 {
    let s = (beta * coupling / 2.0).sinh();
    if s <= 1.0 {
        0.5
    } else {
        0.5 * (1.0 + (1.0 - s.powi(-4)).powf(0.125))
    }
}

/// Effective chemical potential entering the reversible Gibbs measure.
pub fn effective_mu(p: &ArrheniusParams, z: f64) -> Result<f64> {
    if p.c_a <= 0.0 || p.c_d <= 0.0 {
        return Err(Error::model(
            "Gibbs reference requires positive attempt rates c_a, c_d",
        ));
    }
    if p.beta <= 0.0 {
        return Err(Error::model("Gibbs reference requires beta > 0"));
    }
    Ok((p.field - z * p.coupling) + (p.c_a / p.c_d).ln() / p.beta)
}

/// Exhaustive Gibbs measure over an enumerated state space, normalized to
/// total mass one. Bonds are counted once (x < y over the deduplicated
/// neighbor table), matching the generator assembly.
pub fn gibbs_measure(ss: &StateSpace, p: &ArrheniusParams) -> Result<Vec<f64>> {
    let lat = ss.lattice().clone();
    let z = lat.nbrs1(0).len() as f64;
    let mu = effective_mu(p, z)?;
    let n = lat.n_sites();
    let mut spins = vec![0u8; n as usize];
    let mut log_w = Vec::with_capacity(ss.dim());
    for i in 0..ss.dim() {
        ss.decode(i, &mut spins);
        let mut h = 0.0;
        for x in 0..n {
            let sx = f64::from(spins[x as usize]);
            h += mu * sx;
            for &y in lat.nbrs1(x) {
                if y > x {
                    h += p.coupling * sx * f64::from(spins[y as usize]);
                }
            }
        }
        log_w.push(p.beta * h);
    }
    let max = log_w.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut w: Vec<f64> = log_w.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= total;
    }
    Ok(w)
}

/// 2x2 transfer matrix of the periodic lattice-gas chain with chemical
/// potential mu: T(s, s') = exp(beta (K s s' + mu (s + s') / 2)).
fn transfer_1d(beta: f64, coupling: f64, mu: f64) -> [[f64; 2]; 2] {
    let t = |s: f64, sp: f64| (beta * (coupling * s * sp + 0.5 * mu * (s + sp))).exp();
    [[t(0.0, 0.0), t(0.0, 1.0)], [t(1.0, 0.0), t(1.0, 1.0)]]
}

fn m2_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn m2_normalize(m: &mut [[f64; 2]; 2]) {
    let max = m.iter().flatten().fold(0.0f64, |a, &v| a.max(v.abs()));
    if max > 0.0 {
        for row in m.iter_mut() {
            for v in row {
                *v /= max;
            }
        }
    }
}

/// T^n up to an unknown positive scalar: each squaring step renormalizes so
/// huge powers stay in range. Every consumer takes a ratio of traces in
/// which the scale factors cancel, so the scalar is never needed.
fn m2_pow_scaled(t: &[[f64; 2]; 2], n: u32) -> [[f64; 2]; 2] {
    let mut result = [[1.0, 0.0], [0.0, 1.0]];
    let mut base = *t;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = m2_mul(&result, &base);
            m2_normalize(&mut result);
        }
        k >>= 1;
        if k > 0 {
            base = m2_mul(&base, &base);
            m2_normalize(&mut base);
        }
    }
    result
}

/// Exact coverage of a finite periodic ring of n sites (c_a = c_d == any
/// positive pair folded into mu = field - 2 coupling).
pub fn coverage_1d_ring(beta: f64, coupling: f64, field: f64, n: u32) -> f64 {
    assert!(n >= 3, "transfer-matrix ring needs n >= 3");
    let mu = field - 2.0 * coupling;
    let t = transfer_1d(beta, coupling, mu);
    let tn = m2_pow_scaled(&t, n);
    // <s_0> = Tr(D T^n) / Tr(T^n) with D = diag(0, 1).
    tn[1][1] / (tn[0][0] + tn[1][1])
}

/// Exact <s_0 s_k> on a finite periodic ring of n sites.
pub fn correlation_1d_ring(beta: f64, coupling: f64, field: f64, k: u32, n: u32) -> f64 {
    assert!(n >= 3 && k < n);
    if k == 0 {
        return coverage_1d_ring(beta, coupling, field, n);
    }
    let mu = field - 2.0 * coupling;
    let t = transfer_1d(beta, coupling, mu);
    let tk = m2_pow_scaled(&t, k);
    let tnk = m2_pow_scaled(&t, n - k);
    // Tr(D T^k D T^{n-k}) / Tr(T^k T^{n-k}); the two hidden scale factors
    // appear in both traces and cancel.
    let num = tk[1][1] * tnk[1][1];
    let full = m2_mul(&tk, &tnk);
    num / (full[0][0] + full[1][1])
}
