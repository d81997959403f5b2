//! Exact CTMC machinery for small systems: generator assembly from model
//! channels, matrix exponentials by uniformization, and dense matrices for
//! operator-norm comparisons.
//!
//! States are encoded mixed-radix little-endian: site 0 is the least
//! significant digit. A generator row is a source state; entries hold
//! off-diagonal jump rates and the diagonal is minus the row sum. Acting on
//! observables f gives (Qf)_i = sum_j q_ij (f_j - f_i); acting on measures
//! gives the adjoint.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Lattice, SpinSpace};
use crate::models::RateModel;

/// Hard cap on enumerated state-space size.
pub const MAX_DIM: usize = 1 << 14;

/// Exhaustive configuration enumeration for one lattice + spin space.
#[derive(Clone)]
pub struct StateSpace {
    lattice: Arc<Lattice>,
    space: SpinSpace,
    dim: usize,
}

impl StateSpace {
    pub fn new(lattice: Arc<Lattice>, space: SpinSpace) -> Result<Self> {
        let s = usize::from(space.num_states());
        let mut dim = 1usize;
        for _ in 0..lattice.n_sites() {
            dim = dim
                .checked_mul(s)
                .filter(|&d| d <= MAX_DIM)
                .ok_or_else(|| {
                    Error::OracleScale(format!(
                        "state space {}^{} exceeds cap {}",
                        s,
                        lattice.n_sites(),
                        MAX_DIM
                    ))
                })?;
        }
        Ok(StateSpace { lattice, space, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn space(&self) -> SpinSpace {
        self.space
    }

    pub fn encode(&self, spins: &[u8]) -> usize {
        debug_assert_eq!(spins.len(), self.lattice.n_sites() as usize);
        let s = usize::from(self.space.num_states());
        spins
            .iter()
            .rev()
            .fold(0usize, |acc, &v| acc * s + usize::from(v))
    }

    pub fn decode(&self, idx: usize, out: &mut [u8]) {
        debug_assert!(idx < self.dim);
        let s = usize::from(self.space.num_states());
        let mut r = idx;
        for o in out.iter_mut() {
            *o = (r % s) as u8;
            r /= s;
        }
    }

    pub fn configuration(&self, idx: usize) -> Configuration {
        let mut spins = vec![0u8; self.lattice.n_sites() as usize];
        self.decode(idx, &mut spins);
        Configuration::from_spins(self.lattice.clone(), self.space, spins)
            .expect("decoded spins are valid")
    }

    /// Observable vector: f evaluated on every configuration.
    pub fn function(&self, f: impl Fn(&Configuration) -> f64) -> Vec<f64> {
        (0..self.dim).map(|i| f(&self.configuration(i))).collect()
    }

    /// Point-mass measure at `cfg`.
    pub fn delta(&self, cfg: &Configuration) -> Vec<f64> {
        let mut mu = vec![0.0; self.dim];
        mu[self.encode(cfg.spins())] = 1.0;
        mu
    }
}

/// Sparse CTMC generator: off-diagonal rates by source row.
#[derive(Clone)]
pub struct GeneratorMatrix {
    dim: usize,
    rows: Vec<Vec<(u32, f64)>>,
    max_exit: f64,
}

impl GeneratorMatrix {
    /// Assemble the generator restricted to events anchored in `anchors`,
    /// using the model's deterministic channel decomposition.
    pub fn from_model<M: RateModel>(ss: &StateSpace, model: &M, anchors: &[u32]) -> Self {
        let n_sites = ss.lattice.n_sites() as usize;
        let mut spins = vec![0u8; n_sites];
        let mut scratch = vec![0u8; n_sites];
        let mut channels = Vec::new();
        let mut rows = Vec::with_capacity(ss.dim);
        let mut max_exit = 0.0f64;
        for i in 0..ss.dim {
            ss.decode(i, &mut spins);
            let cfg = Configuration::from_spins(ss.lattice.clone(), ss.space, spins.clone())
                .expect("decoded spins are valid");
            let mut row: Vec<(u32, f64)> = Vec::new();
            for &a in anchors {
                channels.clear();
                model.channels(a, &cfg, &mut channels);
                for ev in &channels {
                    scratch.copy_from_slice(&spins);
                    for &(site, spin) in ev.update.targets() {
                        scratch[site as usize] = spin;
                    }
                    let j = ss.encode(&scratch);
                    if j != i {
                        row.push((j as u32, ev.rate));
                    }
                }
            }
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (j, r) in row {
                match merged.last_mut() {
                    Some((pj, pr)) if *pj == j => *pr += r,
                    _ => merged.push((j, r)),
                }
            }
            let exit: f64 = merged.iter().map(|&(_, r)| r).sum();
            max_exit = max_exit.max(exit);
            rows.push(merged);
        }
        GeneratorMatrix {
            dim: ss.dim,
            rows,
            max_exit,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, r)| r).sum()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return -self.exit_rate(i);
        }
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c as usize == j)
            .map_or(0.0, |&(_, r)| r)
    }

    /// Entry-wise sum of two generators over the same state space.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut rows = Vec::with_capacity(self.dim);
        let mut max_exit = 0.0f64;
        for i in 0..self.dim {
            let mut row: Vec<(u32, f64)> = self.rows[i]
                .iter()
                .chain(other.rows[i].iter())
                .copied()
                .collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (j, r) in row {
                match merged.last_mut() {
                    Some((pj, pr)) if *pj == j => *pr += r,
                    _ => merged.push((j, r)),
                }
            }
            max_exit = max_exit.max(merged.iter().map(|&(_, r)| r).sum());
            rows.push(merged);
        }
        GeneratorMatrix {
            dim: self.dim,
            rows,
            max_exit,
        }
    }

    /// Generator scaled by `c >= 0` (rates stay nonnegative).
    pub fn scale(&self, c: f64) -> Self {
        assert!(c >= 0.0);
        GeneratorMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(j, r)| (j, c * r)).collect())
                .collect(),
            max_exit: self.max_exit * c,
        }
    }

    /// (Qf)_i = sum_j q_ij (f_j - f_i).
    pub fn apply_fn(&self, f: &[f64], out: &mut [f64]) {
        assert_eq!(f.len(), self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            let fi = f[i];
            out[i] = row.iter().map(|&(j, r)| r * (f[j as usize] - fi)).sum();
        }
    }

    /// Adjoint action on measures: out_j = sum_i mu_i q_ij - mu_j * exit_j.
    pub fn apply_meas(&self, mu: &[f64], out: &mut [f64]) {
        assert_eq!(mu.len(), self.dim);
        out.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let mi = mu[i];
            let mut exit = 0.0;
            for &(j, r) in row {
                out[j as usize] += mi * r;
                exit += r;
            }
            out[i] -= mi * exit;
        }
    }

    /// e^{tQ} f by uniformization: with P = I + Q/L (L >= max exit rate),
    /// e^{tQ} = e^{-Lt} sum_m (Lt)^m/m! P^m. Poisson tail truncated below
    /// 1e-16; large Lt is handled by time splitting.
    pub fn expm_fn(&self, t: f64, f: &[f64]) -> Vec<f64> {
        self.expm(t, f, false)
    }

    /// mu^T e^{tQ} by uniformization on the adjoint.
    pub fn expm_meas(&self, t: f64, mu: &[f64]) -> Vec<f64> {
        self.expm(t, mu, true)
    }

    fn expm(&self, t: f64, v: &[f64], adjoint: bool) -> Vec<f64> {
        assert!(t >= 0.0 && t.is_finite());
        assert_eq!(v.len(), self.dim);
        let lam = self.max_exit;
        if lam * t == 0.0 {
            return v.to_vec();
        }
        // Keep e^{-Lt} well inside the normal range per segment.
        let segments = (lam * t / 500.0).ceil().max(1.0) as usize;
        let dt = t / segments as f64;
        let mut cur = v.to_vec();
        let mut qv = vec![0.0; self.dim];
        for _ in 0..segments {
            let a = lam * dt;
            let mut weight = (-a).exp();
            let mut acc: Vec<f64> = cur.iter().map(|&x| x * weight).collect();
            let mut covered = weight;
            let mut m = 0usize;
            // The Poisson partial sums saturate a few ulp below 1, so the
            // tail threshold must sit above one ulp of 1.0; the weight
            // check stops the loop if the terms underflow first.
            while 1.0 - covered > 1e-15 && weight.is_normal() {
                m += 1;
                if adjoint {
                    self.apply_meas(&cur, &mut qv);
                } else {
                    self.apply_fn(&cur, &mut qv);
                }
                for (c, &q) in cur.iter_mut().zip(qv.iter()) {
                    *c += q / lam;
                }
                weight *= a / m as f64;
                covered += weight;
                for (o, &c) in acc.iter_mut().zip(cur.iter()) {
                    *o += weight * c;
                }
                assert!(m < 100_000, "uniformization failed to converge");
            }
            cur = acc;
        }
        cur
    }

    /// Largest detailed-balance defect max_ij |pi_i q_ij - pi_j q_ji|.
    pub fn detailed_balance_violation(&self, pi: &[f64]) -> f64 {
        assert_eq!(pi.len(), self.dim);
        let mut flows: HashMap<(u32, u32), f64> = HashMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, r) in row {
                flows.insert((i as u32, j), pi[i] * r);
            }
        }
        let mut worst = 0.0f64;
        for (&(i, j), &fwd) in &flows {
            let rev = flows.get(&(j, i)).copied().unwrap_or(0.0);
            worst = worst.max((fwd - rev).abs());
        }
        worst
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = Dense::zeros(self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            let mut exit = 0.0;
            for &(j, r) in row {
                d.a[i * self.dim + j as usize] += r;
                exit += r;
            }
            d.a[i * self.dim + i] -= exit;
        }
        d
    }

    /// Dense e^{tQ}, assembled column-by-column from sparse uniformization.
    pub fn expm_dense(&self, t: f64) -> Dense {
        let n = self.dim;
        let mut d = Dense::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.expm_fn(t, &e);
            e[j] = 0.0;
            for i in 0..n {
                d.a[i * n + j] = col[i];
            }
        }
        d
    }
}

/// Small row-major dense matrix for operator-norm work.
#[derive(Clone)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Dense::zeros(n);
        for i in 0..n {
            d.a[i * n + i] = 1.0;
        }
        d
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                let row = &other.a[k * n..(k + 1) * n];
                let dst = &mut out.a[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row.iter()) {
                    *d += aik * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Dense) -> Dense {
        assert_eq!(self.n, other.n);
        Dense {
            n: self.n,
            a: self
                .a
                .iter()
                .zip(other.a.iter())
                .map(|(&x, &y)| x - y)
                .collect(),
        }
    }

    pub fn add(&self, other: &Dense) -> Dense {
        assert_eq!(self.n, other.n);
        Dense {
            n: self.n,
            a: self
                .a
                .iter()
                .zip(other.a.iter())
                .map(|(&x, &y)| x + y)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Dense {
        Dense {
            n: self.n,
            a: self.a.iter().map(|&x| c * x).collect(),
        }
    }

    pub fn commutator(&self, other: &Dense) -> Dense {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Induced infinity norm: max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.a[i * self.n..(i + 1) * self.n].iter().map(|x| x.abs()).sum())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.a[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v.iter())
                    .map(|(&a, &x)| a * x)
                    .sum()
            })
            .collect()
    }
}
