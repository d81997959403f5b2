//! Verification instruments: splitting propagators and their defects on
//! exact state spaces, strip-split defect constants, and an empirical
//! weak-error runner for lattices too large to enumerate.

use rayon::prelude::*;

use crate::error::Result;
use crate::executor::{run_simulation, SimOptions};
use crate::generator::{Dense, GeneratorMatrix, StateSpace};
use crate::lattice::Configuration;
use crate::models::RateModel;
use crate::observables::mean_and_se;
use crate::partition::{Color, Partition};
use crate::schedule::Schedule;
use crate::seeds::SeedPolicy;

/// Sorted union of the sites in every cell of one color.
pub fn color_anchors(partition: &Partition, color: Color) -> Vec<u32> {
    let mut sites: Vec<u32> = partition
        .cells_of(color)
        .flat_map(|c| c.sites.iter().copied())
        .collect();
    sites.sort_unstable();
    sites
}

/// Full generator plus the two color-group generators of a partition.
pub fn splitting_generators<M: RateModel>(
    ss: &StateSpace,
    model: &M,
    partition: &Partition,
) -> (GeneratorMatrix, GeneratorMatrix, GeneratorMatrix) {
    let all: Vec<u32> = (0..ss.lattice().n_sites()).collect();
    let full = GeneratorMatrix::from_model(ss, model, &all);
    let q_o = GeneratorMatrix::from_model(ss, model, &color_anchors(partition, Color::O));
    let q_e = GeneratorMatrix::from_model(ss, model, &color_anchors(partition, Color::E));
    (full, q_o, q_e)
}

/// One Lie window: `exp(dt A) exp(dt B)`.
pub fn lie_propagator(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> Dense {
    a.expm_dense(dt).matmul(&b.expm_dense(dt))
}

/// One Strang window: `exp(dt/2 A) exp(dt B) exp(dt/2 A)`.
pub fn strang_propagator(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> Dense {
    let half = a.expm_dense(dt / 2.0);
    half.matmul(&b.expm_dense(dt)).matmul(&half)
}

/// The unsplit reference `exp(dt (A + B))`.
pub fn exact_propagator(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> Dense {
    a.add(b).expm_dense(dt)
}

/// Draw-averaged single window of the randomized scheme:
/// `(exp(dt A) + exp(dt B)) / 2`.
pub fn averaged_random_propagator(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> Dense {
    a.expm_dense(dt).add(&b.expm_dense(dt)).scale(0.5)
}

/// `‖ Lie(dt) − exact(dt) ‖∞`; leading term `(dt²/2) [A, B]`.
pub fn lie_defect_norm(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> f64 {
    lie_propagator(a, b, dt)
        .sub(&exact_propagator(a, b, dt))
        .inf_norm()
}

/// `‖ Strang(dt) − exact(dt) ‖∞`; third order in dt.
pub fn strang_defect_norm(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> f64 {
    strang_propagator(a, b, dt)
        .sub(&exact_propagator(a, b, dt))
        .inf_norm()
}

/// Defect of the draw-averaged window against its rescaled reference
/// `exp(dt/2 (A+B))`; leading term `(dt²/8) (A−B)²`.
pub fn averaged_random_defect_norm(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> f64 {
    averaged_random_propagator(a, b, dt)
        .sub(&exact_propagator(a, b, dt / 2.0))
        .inf_norm()
}

/// Defect of the mean over two independent draws against `exp(dt (A+B))`;
/// leading term `(dt²/4) (A−B)²`.
pub fn random_two_draw_defect_norm(a: &GeneratorMatrix, b: &GeneratorMatrix, dt: f64) -> f64 {
    let one = averaged_random_propagator(a, b, dt);
    one.matmul(&one)
        .sub(&exact_propagator(a, b, dt))
        .inf_norm()
}

/// Contiguous strips of a ring of `n` sites, `q` strips of equal length.
pub fn strip_anchors(n: u32, q: u32) -> Vec<Vec<u32>> {
    assert!(q >= 1 && n % q == 0, "{q} strips must tile {n} sites");
    let w = n / q;
    (0..q)
        .map(|s| (s * w..(s + 1) * w).collect())
        .collect()
}

/// Measure after one Lie window over an ordered list of group generators:
/// `mu exp(dt Q_1) ... exp(dt Q_q)`.
pub fn lie_groups_measure(gens: &[GeneratorMatrix], dt: f64, mu: &[f64]) -> Vec<f64> {
    let mut out = mu.to_vec();
    for g in gens {
        out = g.expm_meas(dt, &out);
    }
    out
}

/// Draw-averaged measure of the randomized scheme over `q` groups:
/// `(1/q) Σ_i mu exp(dt Q_i)`.
pub fn random_groups_mean_measure(gens: &[GeneratorMatrix], dt: f64, mu: &[f64]) -> Vec<f64> {
    let dim = mu.len();
    let mut out = vec![0.0; dim];
    for g in gens {
        let evolved = g.expm_meas(dt, mu);
        for (o, e) in out.iter_mut().zip(evolved.iter()) {
            *o += e / gens.len() as f64;
        }
    }
    out
}

/// `Σ_i mu_i f_i`.
pub fn expectation(mu: &[f64], f: &[f64]) -> f64 {
    mu.iter().zip(f.iter()).map(|(m, v)| m * v).sum()
}

/// Mean and standard error of `observable` at the end of `schedule`,
/// over independent replicas seeded `seed0, seed0+1, ...`. Replicas run
/// in parallel; the estimate does not depend on the thread count.
pub fn empirical_final_mean<M, F>(
    model: &M,
    start: &Configuration,
    partition: &Partition,
    schedule: &Schedule,
    reps: u64,
    seed0: u64,
    observable: F,
) -> Result<(f64, f64)>
where
    M: RateModel,
    F: Fn(&Configuration) -> f64 + Sync,
{
    let opts = SimOptions::default();
    let samples: Result<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut cfg = start.clone();
            run_simulation(
                model,
                &mut cfg,
                partition,
                schedule,
                SeedPolicy::new(seed0 + rep),
                &opts,
                |_, _, _| {},
            )?;
            Ok(observable(&cfg))
        })
        .collect();
    Ok(mean_and_se(&samples?))
}
