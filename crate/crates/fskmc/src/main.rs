//! Command-line front end: run | verify | benchmark | balance-demo | exact.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fskmc::balance::{
    assign_contiguous, assign_optimal, rebalance_cells_1d, RebalancePolicy, WorkloadHistogram,
};
use fskmc::config::{load_config, Observable, Overrides};
use fskmc::error::{Error, Result};
use fskmc::executor::{run_windows, SimOptions};
use fskmc::generator::{GeneratorMatrix, StateSpace};
use fskmc::harness::{
    averaged_random_defect_norm, color_anchors, exact_propagator, lie_defect_norm,
    lie_propagator, splitting_generators, strang_defect_norm,
};
use fskmc::ising_exact::{correlation_1d, coverage_1d, coverage_2d, critical_beta_2d};
use fskmc::kernel::{run_window, EventCatalog};
use fskmc::lattice::{Configuration, Lattice, SpinSpace};
use fskmc::models::{Arrhenius, ArrheniusParams, RateModel};
use fskmc::observables::{batch_mean_se, coverage, mean_and_se, two_point_correlation};
use fskmc::output::{write_results_csv, write_timing_csv, write_workload_csv, ResultRow, TimingRow};
use fskmc::partition::{Color, Partition};
use fskmc::schedule::{make_schedule, GroupOrder, SchemeKind};
use fskmc::seeds::SeedPolicy;

#[derive(Parser)]
#[command(
    name = "fskmc",
    about = "Parallel lattice kinetic Monte Carlo with fractional-step splitting",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation described by a config file.
    Run(RunArgs),
    /// Execute the splitting verification battery against exact oracles.
    Verify(VerifyArgs),
    /// Time simulations across lattice sizes and worker counts.
    Benchmark(BenchmarkArgs),
    /// Demonstrate workload measurement and strip rebalancing.
    BalanceDemo(BalanceDemoArgs),
    /// Print exact equilibrium coverage and correlation tables.
    Exact(ExactArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the config's output directory.
    #[arg(long)]
    output: Option<String>,
    /// Override the config's schedule scheme (lie | strang | random).
    #[arg(long)]
    schedule: Option<String>,
    /// Override the config's window length.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the config's total simulated time.
    #[arg(long)]
    time: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Ring size for the single-color checks (state space 2^n).
    #[arg(long, default_value_t = 6)]
    sites: u32,
    /// Ring size for the two-cell-per-color checks.
    #[arg(long, default_value_t = 8)]
    pair_sites: u32,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// 1D ring sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2048,4096,8192")]
    sizes: Vec<u32>,
    /// Worker counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    workers: Vec<usize>,
    #[arg(long, default_value = "lie")]
    schedule: String,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    #[arg(long, default_value_t = 2.0)]
    time: f64,
    /// Sites per cell.
    #[arg(long, default_value_t = 256)]
    cell_extent: u32,
    /// Skip the unsplit serial-kernel baseline rows.
    #[arg(long)]
    no_serial: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Timing CSV path.
    #[arg(long, default_value = "timing.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct BalanceDemoArgs {
    #[arg(long, default_value_t = 2400)]
    sites: u32,
    #[arg(long, default_value_t = 12)]
    cells: u32,
    #[arg(long, default_value_t = 4)]
    demo_workers: u32,
    #[arg(long, default_value_t = 2.0)]
    time: f64,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    /// Inverse temperatures, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    beta: Vec<f64>,
    /// External fields, comma separated (1D tables).
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    field: Vec<f64>,
    /// Largest correlation lag to print.
    #[arg(long, default_value_t = 10)]
    kmax: u32,
    /// Print the 2D coverage table (at field = 2 coupling) instead of 1D.
    #[arg(long)]
    two_dim: bool,
}

/// Restore the default SIGPIPE disposition so that piping output into a
/// consumer that exits early (e.g. `fskmc exact | head`) terminates the
/// process quietly, as Unix tools conventionally do, instead of panicking
/// on the resulting EPIPE write error.
#[cfg(unix)]
fn restore_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn restore_sigpipe() {}

fn main() {
    restore_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Run(args) => cmd_run(args).map(|()| 0),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Benchmark(args) => cmd_benchmark(args).map(|()| 0),
        Cmd::BalanceDemo(args) => cmd_balance_demo(args).map(|()| 0),
        Cmd::Exact(args) => cmd_exact(args).map(|()| 0),
    }
}

fn eval_observable(obs: &Observable, cfg: &Configuration) -> f64 {
    match obs {
        Observable::Coverage { spin } => coverage(cfg, *spin),
        Observable::Correlation { spin, k } => two_point_correlation(cfg, *spin, *k),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let over = Overrides {
        seed: args.seed,
        workers: args.workers,
        output: args.output,
        schedule: args.schedule,
        dt: args.dt,
        time: args.time,
    };
    let cfg = load_config(&args.config, &over)?;
    let (model, lattice, mut state, mut partition, schedule) = cfg.assemble()?;
    for warning in &schedule.warnings {
        eprintln!("warning: {warning}");
    }
    let opts = SimOptions {
        workers: cfg.effective_workers(),
        nested: None,
    };
    let seeds = SeedPolicy::new(cfg.seed);
    let total_windows = schedule.windows.len();

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.observables.len()];
    let mut workload: Vec<Vec<u64>> = Vec::with_capacity(total_windows);
    let mut total_jumps: u64 = 0;

    let record = |windows_done: u64, t: f64, state: &Configuration,
                      series: &mut Vec<Vec<(f64, f64)>>,
                      rows: &mut Vec<ResultRow>| {
        let due = windows_done == 0
            || windows_done % cfg.stride == 0
            || windows_done as usize == total_windows;
        if !due {
            return;
        }
        for (obs, line) in cfg.observables.iter().zip(series.iter_mut()) {
            let v = eval_observable(obs, state);
            line.push((t, v));
            rows.push(ResultRow {
                run_id: cfg.run_id.clone(),
                time: t,
                observable: obs.name(),
                value: v,
                stderr: None,
            });
        }
    };

    record(0, 0.0, &state, &mut series, &mut rows);

    let started = Instant::now();
    if cfg.balance.enabled {
        let policy = RebalancePolicy {
            cadence: cfg.balance.cadence,
            threshold: cfg.balance.threshold,
        };
        let mut hist = WorkloadHistogram::new(partition.cells().len());
        let mut next = 0usize;
        let mut clock = 0.0;
        let mut rebalances = 0u32;
        while next < total_windows {
            let end = (next + cfg.balance.cadence as usize).min(total_windows);
            clock = run_windows(
                &model,
                &mut state,
                &partition,
                &schedule.windows[next..end],
                next as u64,
                clock,
                seeds,
                &opts,
                |w, t, c, jumps| {
                    hist.record(jumps);
                    workload.push(jumps.to_vec());
                    total_jumps += jumps.iter().sum::<u64>();
                    record(w + 1, t, c, &mut series, &mut rows);
                },
            )?;
            next = end;
            if policy.triggered(&hist) {
                let extents =
                    rebalance_cells_1d(&partition, &hist.weights(), cfg.balance.granularity)?;
                partition = Partition::from_strips(lattice.clone(), &extents, model.locality())?;
                hist.reset();
                rebalances += 1;
            }
        }
        if rebalances > 0 {
            println!("rebalanced {rebalances} time(s)");
        }
    } else {
        run_windows(
            &model,
            &mut state,
            &partition,
            &schedule.windows,
            0,
            0.0,
            seeds,
            &opts,
            |w, t, c, jumps| {
                workload.push(jumps.to_vec());
                total_jumps += jumps.iter().sum::<u64>();
                record(w + 1, t, c, &mut series, &mut rows);
            },
        )?;
    }
    let wall = started.elapsed().as_secs_f64();

    // Time-averaged summaries over the post-burn-in samples.
    let burn_time = cfg.burn_in * cfg.total_time;
    for (obs, line) in cfg.observables.iter().zip(series.iter()) {
        let tail: Vec<f64> = line
            .iter()
            .filter(|(t, _)| *t >= burn_time)
            .map(|(_, v)| *v)
            .collect();
        let summary = if tail.len() >= 32 {
            Some(batch_mean_se(&tail, 16)?)
        } else if tail.len() >= 2 {
            Some(mean_and_se(&tail))
        } else {
            None
        };
        if let Some((mean, se)) = summary {
            rows.push(ResultRow {
                run_id: cfg.run_id.clone(),
                time: cfg.total_time,
                observable: format!("{}_mean", obs.name()),
                value: mean,
                stderr: Some(se),
            });
        }
    }

    let results_path = cfg.output.join("results.csv");
    let workload_path = cfg.output.join("workload.csv");
    write_results_csv(&results_path, &rows)?;
    write_workload_csv(&workload_path, &workload)?;
    println!(
        "run {} finished: {} windows, {} jumps, {:.2} s wall",
        cfg.run_id, total_windows, total_jumps, wall
    );
    println!("results: {}", results_path.display());
    println!("workload: {}", workload_path.display());
    Ok(())
}

struct Check {
    name: &'static str,
    tolerance: String,
    value: f64,
    pass: bool,
}

impl Check {
    fn bounded(name: &'static str, value: f64, tol: f64) -> Self {
        Check {
            name,
            tolerance: format!("<= {tol:.0e}"),
            value,
            pass: value <= tol,
        }
    }

    fn windowed(name: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name,
            tolerance: format!("in [{lo}, {hi}]"),
            value,
            pass: (lo..=hi).contains(&value),
        }
    }
}

fn verify_model(beta: f64) -> Result<Arrhenius> {
    Arrhenius::new(ArrheniusParams {
        c_a: 0.05,
        c_d: 0.05,
        beta,
        coupling: 1.0,
        field: 0.5,
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let mut checks: Vec<Check> = Vec::new();

    // Single-color system: additivity and defect orders.
    let model = verify_model(1.0)?;
    let lat = Lattice::new(&[args.sites])?;
    let space = SpinSpace::new(2)?;
    let ss = StateSpace::new(lat.clone(), space)?;
    let partition = Partition::build(lat.clone(), &[2], 1)?;
    let (full, q_o, q_e) = splitting_generators(&ss, &model, &partition);

    let per_cell: Vec<GeneratorMatrix> = partition
        .cells()
        .iter()
        .map(|c| GeneratorMatrix::from_model(&ss, &model, &c.sites))
        .collect();
    let mut sum = per_cell[0].clone();
    for g in &per_cell[1..] {
        sum = sum.add(g);
    }
    checks.push(Check::bounded(
        "generator additivity  Q = sum_m Q_m",
        sum.to_dense().sub(&full.to_dense()).max_abs(),
        1e-12,
    ));

    let dt = 0.2;
    let lie_ratio = lie_defect_norm(&q_o, &q_e, dt) / lie_defect_norm(&q_o, &q_e, dt / 2.0);
    checks.push(Check::windowed(
        "lie defect ratio      defect(dt)/defect(dt/2)",
        lie_ratio,
        3.3,
        4.7,
    ));
    let strang_ratio =
        strang_defect_norm(&q_o, &q_e, dt) / strang_defect_norm(&q_o, &q_e, dt / 2.0);
    checks.push(Check::windowed(
        "strang defect ratio   defect(dt)/defect(dt/2)",
        strang_ratio,
        6.0,
        10.0,
    ));
    let rand_ratio = averaged_random_defect_norm(&q_o, &q_e, dt)
        / averaged_random_defect_norm(&q_o, &q_e, dt / 2.0);
    checks.push(Check::windowed(
        "averaged random ratio defect(dt)/defect(dt/2)",
        rand_ratio,
        3.3,
        4.7,
    ));

    // beta = 0: rates lose their neighbour dependence, groups commute,
    // and the Lie defect collapses to rounding error.
    let commuting = verify_model(0.0)?;
    let (_, c_o, c_e) = splitting_generators(&ss, &commuting, &partition);
    checks.push(Check::bounded(
        "beta=0 commuting case lie defect",
        lie_propagator(&c_o, &c_e, 1.0)
            .sub(&exact_propagator(&c_o, &c_e, 1.0))
            .max_abs(),
        1e-12,
    ));

    // Two cells per color: factorization and boundary-only commutators.
    let model8 = verify_model(1.0)?;
    let lat8 = Lattice::new(&[args.pair_sites])?;
    let ss8 = StateSpace::new(lat8.clone(), space)?;
    let partition8 = Partition::build(lat8.clone(), &[4], 1)?;
    let even_cells: Vec<&fskmc::partition::Cell> =
        partition8.cells_of(Color::E).collect();
    let q_e8 = GeneratorMatrix::from_model(&ss8, &model8, &color_anchors(&partition8, Color::E));
    for dt in [0.1, 1.0] {
        let whole = q_e8.expm_dense(dt);
        let mut product = GeneratorMatrix::from_model(&ss8, &model8, &even_cells[0].sites)
            .expm_dense(dt);
        for cell in &even_cells[1..] {
            product = product
                .matmul(&GeneratorMatrix::from_model(&ss8, &model8, &cell.sites).expm_dense(dt));
        }
        let name: &'static str = if dt < 0.5 {
            "same-color factorization (dt=0.1)"
        } else {
            "same-color factorization (dt=1.0)"
        };
        checks.push(Check::bounded(name, whole.sub(&product).max_abs(), 1e-10));
    }

    let q_o8 = GeneratorMatrix::from_model(&ss8, &model8, &color_anchors(&partition8, Color::O));
    let cross = q_e8.to_dense().commutator(&q_o8.to_dense());
    let mut boundary = fskmc::generator::Dense::zeros(ss8.dim());
    let mut interior_max: f64 = 0.0;
    for x in color_anchors(&partition8, Color::E) {
        for y in color_anchors(&partition8, Color::O) {
            let qx = GeneratorMatrix::from_model(&ss8, &model8, &[x]).to_dense();
            let qy = GeneratorMatrix::from_model(&ss8, &model8, &[y]).to_dense();
            let pair = qx.commutator(&qy);
            if lat8.distance(x, y) <= 1 {
                boundary = boundary.add(&pair);
            } else {
                interior_max = interior_max.max(pair.max_abs());
            }
        }
    }
    checks.push(Check::bounded(
        "commutator boundary reconstruction",
        cross.sub(&boundary).max_abs(),
        1e-10,
    ));
    checks.push(Check::bounded(
        "interior cross-commutators",
        interior_max,
        1e-12,
    ));

    println!("splitting verification battery");
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        println!(
            "  [{}] {:<45} value {:>12.6e}  tolerance {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    println!("{}", if all_pass { "all checks passed" } else { "FAILURES present" });
    Ok(if all_pass { 0 } else { 2 })
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<()> {
    let scheme = match args.schedule.to_ascii_lowercase().as_str() {
        "lie" => SchemeKind::Lie,
        "strang" => SchemeKind::Strang,
        "random" => SchemeKind::Random,
        other => return Err(Error::schedule(format!("unknown scheme `{other}`"))),
    };
    let model = Arrhenius::new(ArrheniusParams {
        c_a: 1.0,
        c_d: 1.0,
        beta: 1.0,
        coupling: 1.0,
        field: 1.0,
    })?;
    let mut rows: Vec<TimingRow> = Vec::new();
    for &n in &args.sizes {
        if n % args.cell_extent != 0 || (n / args.cell_extent) % 2 != 0 {
            return Err(Error::partition(format!(
                "size {n} needs an even number of cells of extent {}",
                args.cell_extent
            )));
        }
        let lat = Lattice::new(&[n])?;
        let space = SpinSpace::new(2)?;
        let partition = Partition::build(lat.clone(), &[n / args.cell_extent], 1)?;
        let schedule = make_schedule(scheme, args.time, args.dt, GroupOrder::OE, true)?;

        if !args.no_serial {
            let mut state = Configuration::constant(lat.clone(), space, 0)?;
            let seeds = SeedPolicy::new(args.seed);
            let mut rng = seeds.stream(SeedPolicy::cell_key(0, 0), 0, SeedPolicy::substep_key(0, 0, 0));
            let started = Instant::now();
            let mut catalog =
                EventCatalog::build(&model, &state, (0..n).collect(), &mut rng);
            let stats = run_window(&model, &mut state, &mut catalog, args.time, &mut rng);
            let wall = started.elapsed().as_secs_f64();
            rows.push(TimingRow {
                size: u64::from(n),
                workers: 1,
                schedule: "serial".into(),
                dt: args.time,
                wall_seconds: wall,
                jumps_per_second: stats.jumps as f64 / wall.max(1e-9),
            });
        }

        for &workers in &args.workers {
            let mut state = Configuration::constant(lat.clone(), space, 0)?;
            let opts = SimOptions {
                workers: workers.max(1),
                nested: None,
            };
            let mut jumps = 0u64;
            let started = Instant::now();
            run_windows(
                &model,
                &mut state,
                &partition,
                &schedule.windows,
                0,
                0.0,
                SeedPolicy::new(args.seed),
                &opts,
                |_, _, _, j| jumps += j.iter().sum::<u64>(),
            )?;
            let wall = started.elapsed().as_secs_f64();
            rows.push(TimingRow {
                size: u64::from(n),
                workers: workers.max(1),
                schedule: schedule.scheme.name().into(),
                dt: args.dt,
                wall_seconds: wall,
                jumps_per_second: jumps as f64 / wall.max(1e-9),
            });
        }
    }
    write_timing_csv(&args.output, &rows)?;
    println!("size,workers,schedule,dt,wall_seconds,jumps_per_second");
    for r in &rows {
        println!(
            "{},{},{},{},{:.4},{:.0}",
            r.size, r.workers, r.schedule, r.dt, r.wall_seconds, r.jumps_per_second
        );
    }
    println!("timing CSV: {}", args.output.display());
    Ok(())
}

fn cmd_balance_demo(args: BalanceDemoArgs) -> Result<()> {
    if args.cells == 0 || args.cells % 2 != 0 || args.sites % args.cells != 0 {
        return Err(Error::partition(
            "demo needs an even cell count dividing the site count",
        ));
    }
    if args.demo_workers == 0 || args.cells % args.demo_workers != 0 {
        return Err(Error::balance(
            "demo needs a worker count dividing the cell count",
        ));
    }
    let model = Arrhenius::new(ArrheniusParams {
        c_a: 50.0,
        c_d: 50.0,
        beta: 4.0,
        coupling: 1.0,
        field: 2.0,
    })?;
    let lat = Lattice::new(&[args.sites])?;
    let space = SpinSpace::new(2)?;
    // Coverage gradient: three quarters of the ring start occupied (and
    // stay quiet), so the adsorption burst concentrates in the vacant
    // last quarter.
    let spins: Vec<u8> = (0..args.sites)
        .map(|s| u8::from(s < 3 * args.sites / 4))
        .collect();
    let start = Configuration::from_spins(lat.clone(), space, spins)?;
    let schedule = make_schedule(SchemeKind::Lie, args.time, args.dt, GroupOrder::OE, true)?;
    let opts = SimOptions {
        workers: args.demo_workers as usize,
        nested: None,
    };
    let workers = args.demo_workers as usize;

    let measure = |partition: &Partition| -> Result<WorkloadHistogram> {
        let mut hist = WorkloadHistogram::new(partition.cells().len());
        let mut state = start.clone();
        run_windows(
            &model,
            &mut state,
            partition,
            &schedule.windows,
            0,
            0.0,
            SeedPolicy::new(args.seed),
            &opts,
            |_, _, _, jumps| hist.record(jumps),
        )?;
        Ok(hist)
    };

    // Uniform strips, uniform static assignment: the starting point.
    let uniform = Partition::build(lat.clone(), &[args.cells], model.locality())?;
    let pre_hist = measure(&uniform)?;
    let pre_weights = pre_hist.weights();
    let block = args.cells as usize / workers;
    let pre_max = (0..workers)
        .map(|w| pre_weights[w * block..(w + 1) * block].iter().sum::<f64>())
        .fold(0.0f64, f64::max);
    let imbalance = pre_hist.imbalance();

    // Resize strips along the measured workload CDF, re-measure the same
    // physical span, and assign blocks optimally.
    let extents = rebalance_cells_1d(&uniform, &pre_weights, 1)?;
    let balanced = Partition::from_strips(lat.clone(), &extents, model.locality())?;
    let post_hist = measure(&balanced)?;
    let post_weights = post_hist.weights();
    let assignment = if post_weights.len() <= 12 {
        assign_optimal(&post_weights, workers)?
    } else {
        assign_contiguous(&post_weights, workers)?
    };
    let post_max = assignment.bottleneck(&post_weights);
    let optimal = assign_optimal(&post_weights, workers)?.bottleneck(&post_weights);

    println!("workload rebalancing demo");
    println!(
        "  lattice {} sites, {} cells, {} workers, horizon {} at dt {}",
        args.sites, args.cells, workers, args.time, args.dt
    );
    println!("  pre-rebalance cell loads:  {pre_weights:?}");
    println!("  rebalanced strip extents:  {extents:?}");
    println!("  post-rebalance cell loads: {post_weights:?}");
    for w in 0..workers {
        let r = assignment.cells_of(w);
        println!(
            "  worker {w}: cells {:?} load {}",
            r.clone(),
            post_weights[r].iter().sum::<f64>()
        );
    }
    println!("imbalance={imbalance}");
    println!("pre_max_load={pre_max}");
    println!("post_max_load={post_max}");
    println!("ratio={}", post_max / pre_max.max(1e-300));
    println!("post_bottleneck={post_max}");
    println!("optimal_bottleneck={optimal}");
    println!("cells={}", post_weights.len());
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let k = args.coupling;
    if args.two_dim {
        let bc = critical_beta_2d(k);
        println!("critical_beta,{bc}");
        println!();
        println!("h,beta,coverage");
        for &beta in &args.beta {
            let c = coverage_2d(beta, k);
            println!("{},{beta},{c}", 2.0 * k);
        }
        return Ok(());
    }
    println!("h,beta,coverage");
    for &beta in &args.beta {
        for &h in &args.field {
            let c = coverage_1d(beta, k, h);
            println!("{h},{beta},{c}");
        }
    }
    if args.kmax > 0 {
        println!();
        println!("h,beta,k,lambda");
        for &beta in &args.beta {
            for &h in &args.field {
                for lag in 0..=args.kmax {
                    let l = correlation_1d(beta, k, h, lag);
                    println!("{h},{beta},{lag},{l}");
                }
            }
        }
    }
    Ok(())
}
