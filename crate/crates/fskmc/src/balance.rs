//! Workload accounting and load balancing.
//!
//! Two levers keep workers busy: assigning contiguous blocks of cells to
//! workers along the cumulative workload curve, and — in one dimension —
//! moving the strip boundaries themselves so cells carry comparable load.
//! Workloads are measured in executed jumps per cell, accumulated over a
//! trailing span of windows.

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Per-cell jump counts accumulated over recent windows.
#[derive(Debug, Clone)]
pub struct WorkloadHistogram {
    per_cell: Vec<u64>,
    windows: u64,
}

impl WorkloadHistogram {
    pub fn new(n_cells: usize) -> Self {
        WorkloadHistogram {
            per_cell: vec![0; n_cells],
            windows: 0,
        }
    }

    /// Fold in one window's per-cell jump counts.
    pub fn record(&mut self, jumps: &[u64]) {
        assert_eq!(jumps.len(), self.per_cell.len());
        for (acc, &j) in self.per_cell.iter_mut().zip(jumps) {
            *acc += j;
        }
        self.windows += 1;
    }

    pub fn weights(&self) -> Vec<f64> {
        self.per_cell.iter().map(|&j| j as f64).collect()
    }

    pub fn windows(&self) -> u64 {
        self.windows
    }

    pub fn total(&self) -> u64 {
        self.per_cell.iter().sum()
    }

    /// Ratio of the heaviest cell to the mean cell. Zero when idle.
    pub fn imbalance(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let mean = total as f64 / self.per_cell.len() as f64;
        self.per_cell.iter().copied().max().unwrap_or(0) as f64 / mean
    }

    pub fn reset(&mut self) {
        self.per_cell.iter_mut().for_each(|j| *j = 0);
        self.windows = 0;
    }
}

/// When to re-examine the workload and when it is skewed enough to act on.
#[derive(Debug, Clone, Copy)]
pub struct RebalancePolicy {
    /// Check every this many windows.
    pub cadence: u64,
    /// Act when max cell load exceeds this multiple of the mean.
    pub threshold: f64,
}

impl Default for RebalancePolicy {
    fn default() -> Self {
        RebalancePolicy {
            cadence: 10,
            threshold: 2.0,
        }
    }
}

impl RebalancePolicy {
    /// True on windows where the histogram should be inspected.
    pub fn due(&self, windows_recorded: u64) -> bool {
        windows_recorded > 0 && windows_recorded % self.cadence == 0
    }

    pub fn triggered(&self, hist: &WorkloadHistogram) -> bool {
        self.due(hist.windows()) && hist.imbalance() > self.threshold
    }
}

/// Contiguous blocks of cells assigned to workers: worker `j` owns cells
/// `starts[j]..starts[j+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    starts: Vec<usize>,
}

impl Assignment {
    pub fn workers(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn cells_of(&self, worker: usize) -> std::ops::Range<usize> {
        self.starts[worker]..self.starts[worker + 1]
    }

    /// Load of the busiest worker under the given per-cell weights.
    pub fn bottleneck(&self, weights: &[f64]) -> f64 {
        (0..self.workers())
            .map(|w| self.cells_of(w).map(|c| weights[c]).sum())
            .fold(0.0, f64::max)
    }
}

/// Split cells into contiguous worker blocks by cutting the cumulative
/// weight curve at the points nearest `k/P` of the total, ties resolved
/// toward the smaller cut. Every worker receives at least one cell.
pub fn assign_contiguous(weights: &[f64], workers: usize) -> Result<Assignment> {
    let c = weights.len();
    if workers == 0 {
        return Err(Error::balance("workers must be at least 1"));
    }
    if c < workers {
        return Err(Error::balance(format!(
            "cannot split {c} cells across {workers} workers"
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::balance("weights must be finite and non-negative"));
    }
    let mut prefix = Vec::with_capacity(c + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for &w in weights {
        acc += w;
        prefix.push(acc);
    }
    let total = acc;

    let mut starts = Vec::with_capacity(workers + 1);
    starts.push(0usize);
    for k in 1..workers {
        let target = total * k as f64 / workers as f64;
        let lo = starts[k - 1] + 1; // at least one cell behind the cut
        let hi = c - (workers - k); // leave one cell per remaining worker
        let mut best = lo;
        let mut best_gap = (prefix[lo] - target).abs();
        for b in (lo + 1)..=hi {
            let gap = (prefix[b] - target).abs();
            if gap < best_gap {
                best = b;
                best_gap = gap;
            }
        }
        starts.push(best);
    }
    starts.push(c);
    Ok(Assignment { starts })
}

/// Exact minimal bottleneck over all contiguous assignments (dynamic
/// program). Reference for judging the cut heuristic.
pub fn optimal_bottleneck(weights: &[f64], workers: usize) -> f64 {
    assign_optimal(weights, workers)
        .map(|a| a.bottleneck(weights))
        .unwrap_or(f64::INFINITY)
}

/// Contiguous assignment with the exactly minimal bottleneck, found by
/// dynamic programming over all cut placements. Among equal-bottleneck
/// assignments the earliest cuts win.
pub fn assign_optimal(weights: &[f64], workers: usize) -> Result<Assignment> {
    let c = weights.len();
    if workers == 0 {
        return Err(Error::balance("workers must be at least 1"));
    }
    if c < workers {
        return Err(Error::balance(format!(
            "cannot split {c} cells across {workers} workers"
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::balance("weights must be finite and non-negative"));
    }
    let mut prefix = vec![0.0; c + 1];
    for (i, &w) in weights.iter().enumerate() {
        prefix[i + 1] = prefix[i] + w;
    }
    // best[j] = minimal bottleneck splitting the first j cells into the
    // current number of blocks; cut[blocks][j] = start of the last block.
    let mut best: Vec<f64> = (0..=c).map(|j| prefix[j]).collect();
    let mut cut = vec![vec![0usize; c + 1]; workers + 1];
    for blocks in 2..=workers {
        let mut next = vec![f64::INFINITY; c + 1];
        for j in blocks..=c {
            for i in (blocks - 1)..j {
                let cand = best[i].max(prefix[j] - prefix[i]);
                if cand < next[j] {
                    next[j] = cand;
                    cut[blocks][j] = i;
                }
            }
        }
        best = next;
    }
    let mut starts = vec![0usize; workers + 1];
    starts[workers] = c;
    let mut j = c;
    for blocks in (2..=workers).rev() {
        j = cut[blocks][j];
        starts[blocks - 1] = j;
    }
    Ok(Assignment { starts })
}

/// New strip extents for a one-dimensional partition, placing boundaries
/// at the inverse of the cumulative per-site workload. Cell weights are
/// spread uniformly over each cell's sites. Boundaries snap to multiples
/// of `granularity` and every strip keeps the minimum extent the radius
/// demands. Returns extents for [`Partition::from_strips`].
pub fn rebalance_cells_1d(
    partition: &Partition,
    weights: &[f64],
    granularity: u32,
) -> Result<Vec<u32>> {
    let lattice = partition.lattice();
    if lattice.ndim() != 1 {
        return Err(Error::balance("strip rebalancing requires one dimension"));
    }
    let cells = partition.cells();
    if weights.len() != cells.len() {
        return Err(Error::balance(format!(
            "{} weights for {} cells",
            weights.len(),
            cells.len()
        )));
    }
    if granularity == 0 {
        return Err(Error::balance("granularity must be at least 1"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::balance("weights must be finite and non-negative"));
    }
    let n = lattice.n_sites();
    let c = cells.len();
    let locality = partition.locality();
    let min_extent = (locality + 1).max(2 * locality).max(granularity);

    let current: Vec<u32> = cells.iter().map(|cell| cell.extent[0]).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(current);
    }

    // Per-site density, cells in position order (cell ids ascend with lo).
    let mut density = Vec::with_capacity(n as usize);
    for (cell, &w) in cells.iter().zip(weights) {
        let per_site = w / f64::from(cell.extent[0]);
        density.extend(std::iter::repeat(per_site).take(cell.extent[0] as usize));
    }
    let mut prefix = vec![0.0; n as usize + 1];
    for (i, &d) in density.iter().enumerate() {
        prefix[i + 1] = prefix[i] + d;
    }

    let g = granularity;
    let mut cuts = vec![0u32];
    for k in 1..c {
        let target = total * k as f64 / c as f64;
        let prev = *cuts.last().unwrap();
        let lo = prev + min_extent;
        let hi = n - (c - k) as u32 * min_extent;
        // Candidate boundaries: multiples of g inside [lo, hi].
        let first = lo.div_ceil(g) * g;
        if first > hi {
            return Err(Error::balance(format!(
                "no multiple of {g} fits between {lo} and {hi}"
            )));
        }
        let mut best = first;
        let mut best_gap = (prefix[first as usize] - target).abs();
        let mut b = first + g;
        while b <= hi {
            let gap = (prefix[b as usize] - target).abs();
            if gap < best_gap {
                best = b;
                best_gap = gap;
            }
            b += g;
        }
        cuts.push(best);
    }
    cuts.push(n);
    Ok(cuts.windows(2).map(|w| w[1] - w[0]).collect())
}
