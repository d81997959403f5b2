//! Periodic lattice geometry, spin state space, and configurations.
//!
//! Sites live on a d-dimensional torus with row-major flat indexing. The
//! lattice metric is periodic L1; `METRIC` is the single switch point should
//! a different ball shape ever be needed.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Lattice metric used for neighbor balls and cell closures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L1,
    Linf,
}

/// All distance computations in the crate go through this constant.
pub const METRIC: Metric = Metric::L1;

/// Number of single-site states (2 for lattice gases, 3 for ZGB).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinSpace {
    num_states: u8,
}

impl SpinSpace {
    pub fn new(num_states: u8) -> Result<Self> {
        if num_states < 2 {
            return Err(Error::lattice(format!(
                "spin space needs at least 2 states, got {num_states}"
            )));
        }
        Ok(SpinSpace { num_states })
    }

    #[inline]
    pub fn num_states(&self) -> u8 {
        self.num_states
    }

    #[inline]
    pub fn contains(&self, spin: u8) -> bool {
        spin < self.num_states
    }
}

/// Periodic d-dimensional lattice with row-major site indexing.
///
/// Nearest-neighbor (radius-1) adjacency is precomputed at construction;
/// larger balls are enumerated on demand.
#[derive(Debug, Clone)]
pub struct Lattice {
    dims: Vec<u32>,
    strides: Vec<u32>,
    n_sites: u32,
    nbr1_offsets: Vec<u32>,
    nbr1_data: Vec<u32>,
}

impl Lattice {
    pub fn new(dims: &[u32]) -> Result<Arc<Self>> {
        if dims.is_empty() {
            return Err(Error::lattice("lattice needs at least one axis"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::lattice(format!("zero-extent axis in {dims:?}")));
        }
        let mut n: u64 = 1;
        for &d in dims {
            n = n
                .checked_mul(d as u64)
                .ok_or_else(|| Error::lattice("site count overflows u64"))?;
        }
        if n > u32::MAX as u64 {
            return Err(Error::lattice(format!("site count {n} exceeds u32 range")));
        }
        let n_sites = n as u32;
        // Row-major: the last axis varies fastest.
        let mut strides = vec![1u32; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut lat = Lattice {
            dims: dims.to_vec(),
            strides,
            n_sites,
            nbr1_offsets: Vec::new(),
            nbr1_data: Vec::new(),
        };
        lat.build_nbr1();
        Ok(Arc::new(lat))
    }

    fn build_nbr1(&mut self) {
        let n = self.n_sites as usize;
        self.nbr1_offsets = Vec::with_capacity(n + 1);
        self.nbr1_data = Vec::with_capacity(n * 2 * self.dims.len());
        self.nbr1_offsets.push(0);
        let mut coords = vec![0u32; self.dims.len()];
        for x in 0..self.n_sites {
            self.site_coords_into(x, &mut coords);
            let mut nbrs: Vec<u32> = Vec::with_capacity(2 * self.dims.len());
            for axis in 0..self.dims.len() {
                let d = self.dims[axis];
                let c = coords[axis];
                let up = (c + 1) % d;
                let down = (c + d - 1) % d;
                let stride = self.strides[axis];
                let base = x - c * stride;
                nbrs.push(base + up * stride);
                nbrs.push(base + down * stride);
            }
            nbrs.sort_unstable();
            nbrs.dedup();
            nbrs.retain(|&y| y != x);
            self.nbr1_data.extend_from_slice(&nbrs);
            self.nbr1_offsets.push(self.nbr1_data.len() as u32);
        }
    }

    #[inline]
    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    /// Flat row-major index of a coordinate tuple (caller must pass in-range coords).
    #[inline]
    pub fn site_index(&self, coords: &[u32]) -> u32 {
        debug_assert_eq!(coords.len(), self.dims.len());
        let mut idx = 0u32;
        for (i, &c) in coords.iter().enumerate() {
            debug_assert!(c < self.dims[i]);
            idx += c * self.strides[i];
        }
        idx
    }

    #[inline]
    pub fn site_coords(&self, site: u32) -> Vec<u32> {
        let mut c = vec![0u32; self.dims.len()];
        self.site_coords_into(site, &mut c);
        c
    }

    #[inline]
    pub fn site_coords_into(&self, site: u32, out: &mut [u32]) {
        debug_assert!(site < self.n_sites);
        let mut rem = site;
        for i in 0..self.dims.len() {
            out[i] = rem / self.strides[i];
            rem %= self.strides[i];
        }
    }

    /// Periodic per-axis separation |a - b| on a ring of the axis extent.
    #[inline]
    fn axis_dist(extent: u32, a: u32, b: u32) -> u32 {
        let d = a.abs_diff(b);
        d.min(extent - d)
    }

    /// Periodic lattice distance between two sites under `METRIC`.
    pub fn distance(&self, a: u32, b: u32) -> u32 {
        let ca = self.site_coords(a);
        let cb = self.site_coords(b);
        let per_axis = ca
            .iter()
            .zip(&cb)
            .zip(&self.dims)
            .map(|((&x, &y), &d)| Self::axis_dist(d, x, y));
        match METRIC {
            Metric::L1 => per_axis.sum(),
            Metric::Linf => per_axis.max().unwrap_or(0),
        }
    }

    /// Precomputed radius-1 neighbors, ascending, excluding the site itself.
    #[inline]
    pub fn nbrs1(&self, site: u32) -> &[u32] {
        let lo = self.nbr1_offsets[site as usize] as usize;
        let hi = self.nbr1_offsets[site as usize + 1] as usize;
        &self.nbr1_data[lo..hi]
    }

    /// All sites z != x with distance(z, x) <= r, ascending.
    pub fn neighbors(&self, site: u32, r: u32) -> Vec<u32> {
        if r == 0 {
            return Vec::new();
        }
        if r == 1 {
            return self.nbrs1(site).to_vec();
        }
        let center = self.site_coords(site);
        let mut out = Vec::new();
        let mut offset = vec![0i64; self.dims.len()];
        self.enumerate_ball(&center, r as i64, 0, &mut offset, site, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn enumerate_ball(
        &self,
        center: &[u32],
        budget: i64,
        axis: usize,
        offset: &mut [i64],
        exclude: u32,
        out: &mut Vec<u32>,
    ) {
        if axis == self.dims.len() {
            let mut coords = vec![0u32; self.dims.len()];
            for i in 0..coords.len() {
                let d = self.dims[i] as i64;
                coords[i] = (((center[i] as i64 + offset[i]) % d + d) % d) as u32;
            }
            let s = self.site_index(&coords);
            if s != exclude {
                out.push(s);
            }
            return;
        }
        let remaining = match METRIC {
            Metric::L1 => budget,
            Metric::Linf => budget, // each axis gets the full budget
        };
        for delta in -remaining..=remaining {
            offset[axis] = delta;
            let next_budget = match METRIC {
                Metric::L1 => budget - delta.abs(),
                Metric::Linf => budget,
            };
            self.enumerate_ball(center, next_budget, axis + 1, offset, exclude, out);
        }
        offset[axis] = 0;
    }
}

/// One atomic state change: a short list of (site, new spin) writes.
///
/// Targets are pairwise distinct; models keep every target within their
/// locality radius of the event anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteUpdate {
    targets: arrayvec::ArrayVec<(u32, u8), 2>,
}

impl SiteUpdate {
    pub fn single(site: u32, spin: u8) -> Self {
        let mut targets = arrayvec::ArrayVec::new();
        targets.push((site, spin));
        SiteUpdate { targets }
    }

    pub fn pair(a: (u32, u8), b: (u32, u8)) -> Result<Self> {
        if a.0 == b.0 {
            return Err(Error::InvalidUpdate(format!(
                "duplicate target site {} in update",
                a.0
            )));
        }
        let mut targets = arrayvec::ArrayVec::new();
        targets.push(a);
        targets.push(b);
        Ok(SiteUpdate { targets })
    }

    #[inline]
    pub fn targets(&self) -> &[(u32, u8)] {
        &self.targets
    }
}

/// Spin field over a lattice: flat row-major `u8` storage.
#[derive(Debug, Clone)]
pub struct Configuration {
    lattice: Arc<Lattice>,
    space: SpinSpace,
    spins: Vec<u8>,
}

impl Configuration {
    pub fn constant(lattice: Arc<Lattice>, space: SpinSpace, spin: u8) -> Result<Self> {
        if !space.contains(spin) {
            return Err(Error::Config(format!(
                "spin {spin} outside space of {} states",
                space.num_states()
            )));
        }
        let n = lattice.n_sites() as usize;
        Ok(Configuration {
            lattice,
            space,
            spins: vec![spin; n],
        })
    }

    pub fn from_spins(lattice: Arc<Lattice>, space: SpinSpace, spins: Vec<u8>) -> Result<Self> {
        if spins.len() != lattice.n_sites() as usize {
            return Err(Error::Config(format!(
                "spin vector length {} != lattice size {}",
                spins.len(),
                lattice.n_sites()
            )));
        }
        if let Some(&bad) = spins.iter().find(|&&s| !space.contains(s)) {
            return Err(Error::Config(format!(
                "spin value {bad} outside space of {} states",
                space.num_states()
            )));
        }
        Ok(Configuration {
            lattice,
            space,
            spins,
        })
    }

    #[inline]
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    #[inline]
    pub fn space(&self) -> SpinSpace {
        self.space
    }

    #[inline]
    pub fn spin(&self, site: u32) -> u8 {
        self.spins[site as usize]
    }

    #[inline]
    pub fn spins(&self) -> &[u8] {
        &self.spins
    }

    #[inline]
    pub fn set_spin(&mut self, site: u32, spin: u8) {
        debug_assert!(self.space.contains(spin));
        self.spins[site as usize] = spin;
    }

    /// Apply every target write; validates sites and spin values first so a
    /// failed call leaves the configuration untouched.
    pub fn apply_update(&mut self, update: &SiteUpdate) -> Result<()> {
        for &(site, spin) in update.targets() {
            if site >= self.lattice.n_sites() {
                return Err(Error::InvalidUpdate(format!(
                    "site {site} outside lattice of {} sites",
                    self.lattice.n_sites()
                )));
            }
            if !self.space.contains(spin) {
                return Err(Error::InvalidUpdate(format!(
                    "spin {spin} outside space of {} states",
                    self.space.num_states()
                )));
            }
        }
        for &(site, spin) in update.targets() {
            self.spins[site as usize] = spin;
        }
        Ok(())
    }

    /// Number of sites carrying `spin`.
    pub fn count(&self, spin: u8) -> usize {
        self.spins.iter().filter(|&&s| s == spin).count()
    }
}
