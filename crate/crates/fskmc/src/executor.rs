//! Window execution: copy-in/copy-out cell patches, parallel same-color
//! simulation, deterministic write-back.
//!
//! A substep freezes one color group. Every cell of the active color gets a
//! private patch — the cell tile padded by the interaction radius on each
//! axis — copied from the global state. Cells simulate independently (in
//! parallel when workers allow), then patches write their changed sites
//! back in ascending cell order. Write regions of concurrently run cells
//! can only meet at diagonal corners of multi-site updates in d >= 2; the
//! fixed write-back order resolves those collisions deterministically, so
//! results are byte-identical for every worker count.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{run_window, EventCatalog, Field};
use crate::lattice::{Configuration, Lattice, SiteUpdate, SpinSpace};
use crate::models::{RateModel, SpinSource};
use crate::partition::{Cell, Color, Partition};
use crate::schedule::{ColorChoice, Schedule, WindowPlan};
use crate::seeds::SeedPolicy;

/// Private working copy of one cell's tile plus halo.
pub struct LocalPatch {
    lattice: Arc<Lattice>,
    space: SpinSpace,
    spins: Vec<u8>,
    global_of_local: Vec<u32>,
    /// Local indices of the cell tile (ascending) — the anchor set.
    active: Vec<u32>,
    dirty: Vec<u32>,
}

impl LocalPatch {
    fn new(
        global: &Configuration,
        cell: &Cell,
        locality: u32,
        patch_lattice: Arc<Lattice>,
    ) -> Self {
        let glat = Configuration::lattice(global);
        let gdims = glat.dims();
        let pdims = patch_lattice.dims().to_vec();
        let origin: Vec<u32> = cell
            .lo
            .iter()
            .zip(gdims.iter())
            .map(|(&lo, &n)| (lo + n - locality.min(n)) % n)
            .collect();

        let n_local = patch_lattice.n_sites();
        let mut global_of_local = Vec::with_capacity(n_local as usize);
        let mut spins = Vec::with_capacity(n_local as usize);
        let mut lc = vec![0u32; pdims.len()];
        let mut gc = vec![0u32; pdims.len()];
        for l in 0..n_local {
            patch_lattice.site_coords_into(l, &mut lc);
            for (a, g) in gc.iter_mut().enumerate() {
                *g = (origin[a] + lc[a]) % gdims[a];
            }
            let gi = glat.site_index(&gc);
            global_of_local.push(gi);
            spins.push(global.spin(gi));
        }

        // Tile sites sit at local offset `locality` along every axis; the
        // tile never wraps inside the patch.
        let mut active = Vec::with_capacity(cell.sites.len());
        let mut off = vec![0u32; pdims.len()];
        loop {
            for (a, o) in off.iter().enumerate() {
                lc[a] = o + locality;
            }
            active.push(patch_lattice.site_index(&lc));
            let mut a = off.len();
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                off[a] += 1;
                if off[a] < cell.extent[a] {
                    break;
                }
                off[a] = 0;
            }
            if off.iter().all(|&o| o == 0) {
                break;
            }
        }
        active.sort_unstable();

        LocalPatch {
            lattice: patch_lattice,
            space: global.space(),
            spins,
            global_of_local,
            active,
            dirty: Vec::new(),
        }
    }

    /// Apply every changed site to the global state. Called sequentially in
    /// ascending cell order, which fixes the winner of corner collisions.
    fn write_back(&mut self, global: &mut Configuration) {
        self.dirty.sort_unstable();
        self.dirty.dedup();
        for &l in &self.dirty {
            global.set_spin(self.global_of_local[l as usize], self.spins[l as usize]);
        }
    }
}

impl SpinSource for LocalPatch {
    #[inline]
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    #[inline]
    fn spin(&self, site: u32) -> u8 {
        self.spins[site as usize]
    }
}

impl Field for LocalPatch {
    fn apply(&mut self, update: &SiteUpdate) {
        for &(site, spin) in update.targets() {
            debug_assert!(self.space.contains(spin));
            self.spins[site as usize] = spin;
            self.dirty.push(site);
        }
    }
}

/// Nested decomposition: each cell splits into inner tiles advanced by an
/// inner Lie schedule during the cell's substep.
#[derive(Debug, Clone)]
pub struct NestedSpec {
    /// Inner tile count along each axis, dividing every cell extent.
    pub cells_per_axis: Vec<u32>,
    /// Inner window length.
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub workers: usize,
    pub nested: Option<NestedSpec>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            workers: 1,
            nested: None,
        }
    }
}

pub struct SimResult {
    /// Physical time at each window boundary, starting at zero.
    pub times: Vec<f64>,
    /// Executed jumps per window per cell.
    pub workload: Vec<Vec<u64>>,
    pub total_jumps: u64,
}

fn check_setup<M: RateModel>(
    model: &M,
    cfg: &Configuration,
    partition: &Partition,
    opts: &SimOptions,
) -> Result<()> {
    if model.spin_space().num_states() != cfg.space().num_states() {
        return Err(Error::model(format!(
            "model expects {} spin states, configuration has {}",
            model.spin_space().num_states(),
            cfg.space().num_states()
        )));
    }
    if partition.lattice().dims() != Configuration::lattice(cfg).dims() {
        return Err(Error::partition(
            "partition and configuration use different lattices",
        ));
    }
    if partition.locality() < model.locality() {
        return Err(Error::partition(format!(
            "partition was validated for radius {}, model needs {}",
            partition.locality(),
            model.locality()
        )));
    }
    if opts.workers == 0 {
        return Err(Error::model("workers must be at least 1"));
    }
    if let Some(spec) = &opts.nested {
        if !(spec.dt.is_finite() && spec.dt > 0.0) {
            return Err(Error::schedule(format!(
                "nested dt must be positive, got {}",
                spec.dt
            )));
        }
        for cell in partition.cells() {
            if spec.cells_per_axis.len() != cell.extent.len() {
                return Err(Error::partition(
                    "nested cells_per_axis dimensionality mismatch",
                ));
            }
            for (a, (&c, &e)) in spec.cells_per_axis.iter().zip(cell.extent.iter()).enumerate()
            {
                if c == 0 || e % c != 0 {
                    return Err(Error::partition(format!(
                        "cell {} axis {a}: nested count {c} must divide extent {e}",
                        cell.id
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Per-axis patch dimensions for a cell.
fn patch_dims(cell: &Cell, global_dims: &[u32], locality: u32) -> Vec<u32> {
    cell.extent
        .iter()
        .zip(global_dims.iter())
        .map(|(&e, &n)| (e + 2 * locality).min(n))
        .collect()
}

struct PatchLattices {
    by_dims: HashMap<Vec<u32>, Arc<Lattice>>,
}

impl PatchLattices {
    fn build(partition: &Partition, locality: u32) -> Result<Self> {
        let gdims = partition.lattice().dims();
        let mut by_dims = HashMap::new();
        for cell in partition.cells() {
            let dims = patch_dims(cell, gdims, locality);
            if !by_dims.contains_key(&dims) {
                let lat = Lattice::new(&dims)?;
                by_dims.insert(dims, lat);
            }
        }
        Ok(PatchLattices { by_dims })
    }

    fn get(&self, cell: &Cell, global_dims: &[u32], locality: u32) -> Arc<Lattice> {
        self.by_dims[&patch_dims(cell, global_dims, locality)].clone()
    }
}

/// Inner tiles of one cell in local patch coordinates: (tile index,
/// color, anchor sites).
fn inner_tiles(
    cell: &Cell,
    spec: &NestedSpec,
    patch: &Arc<Lattice>,
    locality: u32,
) -> Vec<(u32, Color, Vec<u32>)> {
    let d = cell.extent.len();
    let inner_extent: Vec<u32> = cell
        .extent
        .iter()
        .zip(spec.cells_per_axis.iter())
        .map(|(&e, &c)| e / c)
        .collect();
    let mut tiles = Vec::new();
    let mut k = vec![0u32; d];
    let mut idx = 0u32;
    loop {
        let parity: u32 = k.iter().sum();
        let mut sites = Vec::new();
        let mut off = vec![0u32; d];
        let mut lc = vec![0u32; d];
        loop {
            for a in 0..d {
                lc[a] = locality + k[a] * inner_extent[a] + off[a];
            }
            sites.push(patch.site_index(&lc));
            let mut a = d;
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                off[a] += 1;
                if off[a] < inner_extent[a] {
                    break;
                }
                off[a] = 0;
            }
            if off.iter().all(|&o| o == 0) {
                break;
            }
        }
        sites.sort_unstable();
        tiles.push((idx, Color::from_parity(parity), sites));
        idx += 1;
        let mut a = d;
        loop {
            if a == 0 {
                break;
            }
            a -= 1;
            k[a] += 1;
            if k[a] < spec.cells_per_axis[a] {
                break;
            }
            k[a] = 0;
        }
        if k.iter().all(|&v| v == 0) {
            break;
        }
    }
    tiles
}

/// Simulate one cell for one substep on its private patch.
#[allow(clippy::too_many_arguments)]
fn simulate_cell<M: RateModel>(
    model: &M,
    global: &Configuration,
    cell: &Cell,
    locality: u32,
    patch_lattice: Arc<Lattice>,
    seeds: &SeedPolicy,
    window: u64,
    substep: u16,
    duration: f64,
    nested: Option<&NestedSpec>,
) -> (LocalPatch, u64) {
    let mut patch = LocalPatch::new(global, cell, locality, patch_lattice.clone());
    let mut jumps = 0u64;
    match nested {
        None => {
            let mut rng = seeds.stream(
                SeedPolicy::cell_key(cell.id, 0),
                window,
                SeedPolicy::substep_key(substep, 0, 0),
            );
            let mut catalog =
                EventCatalog::build(model, &patch, patch.active.clone(), &mut rng);
            jumps += run_window(model, &mut patch, &mut catalog, duration, &mut rng).jumps;
        }
        Some(spec) => {
            let tiles = inner_tiles(cell, spec, &patch_lattice, locality);
            let n_inner = ((duration / spec.dt).round() as u64).max(1);
            let rem = duration - (n_inner - 1) as f64 * spec.dt;
            for iw in 0..n_inner {
                let d = if iw + 1 == n_inner { rem } else { spec.dt };
                for (inner_substep, color) in [(0u16, Color::O), (1u16, Color::E)] {
                    for (tile_idx, tile_color, sites) in &tiles {
                        if *tile_color != color {
                            continue;
                        }
                        let mut rng = seeds.stream(
                            SeedPolicy::cell_key(cell.id, *tile_idx),
                            window,
                            SeedPolicy::substep_key(substep, iw as u32, inner_substep),
                        );
                        let mut catalog =
                            EventCatalog::build(model, &patch, sites.clone(), &mut rng);
                        jumps +=
                            run_window(model, &mut patch, &mut catalog, d, &mut rng).jumps;
                    }
                }
            }
        }
    }
    (patch, jumps)
}

/// Advance `cfg` through `windows`, calling `on_window` after each with the
/// absolute window index, the updated clock, the state, and the jumps each
/// cell executed during that window. Returns the final clock.
#[allow(clippy::too_many_arguments)]
pub fn run_windows<M: RateModel>(
    model: &M,
    cfg: &mut Configuration,
    partition: &Partition,
    windows: &[WindowPlan],
    first_window_index: u64,
    mut clock: f64,
    seeds: SeedPolicy,
    opts: &SimOptions,
    mut on_window: impl FnMut(u64, f64, &Configuration, &[u64]),
) -> Result<f64> {
    check_setup(model, cfg, partition, opts)?;
    let locality = partition.locality();
    let patch_lattices = PatchLattices::build(partition, locality)?;
    let gdims = partition.lattice().dims().to_vec();

    let pool = if opts.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| Error::model(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let n_cells = partition.cells().len();
    for (w, plan) in windows.iter().enumerate() {
        let window_index = first_window_index + w as u64;
        let mut jumps_per_cell = vec![0u64; n_cells];
        for (s, substep) in plan.substeps.iter().enumerate() {
            let color = match substep.color {
                ColorChoice::Fixed(c) => c,
                ColorChoice::Drawn { p_odd } => {
                    let mut rng = seeds.schedule_stream(window_index);
                    if rng.random::<f64>() < p_odd {
                        Color::O
                    } else {
                        Color::E
                    }
                }
            };
            let cells: Vec<&Cell> = partition.cells_of(color).collect();
            let runs: Vec<(u32, LocalPatch, u64)> = match &pool {
                Some(pool) => pool.install(|| {
                    use rayon::prelude::*;
                    cells
                        .par_iter()
                        .map(|cell| {
                            let lat = patch_lattices.get(cell, &gdims, locality);
                            let (patch, jumps) = simulate_cell(
                                model,
                                cfg,
                                cell,
                                locality,
                                lat,
                                &seeds,
                                window_index,
                                s as u16,
                                substep.duration,
                                opts.nested.as_ref(),
                            );
                            (cell.id, patch, jumps)
                        })
                        .collect()
                }),
                None => cells
                    .iter()
                    .map(|cell| {
                        let lat = patch_lattices.get(cell, &gdims, locality);
                        let (patch, jumps) = simulate_cell(
                            model,
                            cfg,
                            cell,
                            locality,
                            lat,
                            &seeds,
                            window_index,
                            s as u16,
                            substep.duration,
                            opts.nested.as_ref(),
                        );
                        (cell.id, patch, jumps)
                    })
                    .collect(),
            };
            // Deterministic merge: ascending cell id (par_iter preserves
            // input order, and cells_of yields ascending ids).
            for (cell_id, mut patch, jumps) in runs {
                patch.write_back(cfg);
                jumps_per_cell[cell_id as usize] += jumps;
            }
        }
        clock += plan.advance;
        on_window(window_index, clock, cfg, &jumps_per_cell);
    }
    Ok(clock)
}

/// Run a complete schedule from time zero, collecting the workload matrix.
/// `observe` fires once with the initial state (zero windows done) and then
/// after every window.
pub fn run_simulation<M: RateModel>(
    model: &M,
    cfg: &mut Configuration,
    partition: &Partition,
    schedule: &Schedule,
    seeds: SeedPolicy,
    opts: &SimOptions,
    mut observe: impl FnMut(u64, f64, &Configuration),
) -> Result<SimResult> {
    let mut times = vec![0.0];
    let mut workload = Vec::with_capacity(schedule.windows.len());
    let mut total = 0u64;
    observe(0, 0.0, cfg);
    run_windows(
        model,
        cfg,
        partition,
        &schedule.windows,
        0,
        0.0,
        seeds,
        opts,
        |w, t, c, jumps| {
            times.push(t);
            workload.push(jumps.to_vec());
            total += jumps.iter().sum::<u64>();
            observe(w + 1, t, c);
        },
    )?;
    Ok(SimResult {
        times,
        workload,
        total_jumps: total,
    })
}
