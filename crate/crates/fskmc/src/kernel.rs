//! Event catalog and the single-region stochastic simulation loop.
//!
//! The catalog holds the current event list for a set of active anchor
//! sites. Jump times are exponential in the total rate; events are selected
//! proportionally to their rates. After each executed event the catalog
//! re-enumerates exactly the anchors whose rate can have changed: those
//! within the model's locality radius of a written site. An event whose
//! waiting time crosses the window end is discarded; by memorylessness the
//! next window redraws it with no bias.

use rand::Rng;

use crate::lattice::{Configuration, SiteUpdate};
use crate::models::{Event, RateModel, SpinSource};

/// Mutable spin storage the kernel can advance.
pub trait Field: SpinSource {
    fn apply(&mut self, update: &SiteUpdate);
}

impl Field for Configuration {
    fn apply(&mut self, update: &SiteUpdate) {
        self.apply_update(update).expect("models produce valid updates");
    }
}

/// Incremental total-rate updates accumulate rounding; every this many
/// events the total is re-summed from the per-anchor rates.
const REBUILD_INTERVAL: u32 = 10_000;

const NO_SLOT: u32 = u32::MAX;

/// Current events for a fixed set of active anchors over one spin field.
pub struct EventCatalog {
    anchors: Vec<u32>,
    /// site -> slot in `anchors`, `NO_SLOT` for inactive sites.
    slot_of_site: Vec<u32>,
    per_anchor: Vec<Vec<Event>>,
    anchor_rates: Vec<f64>,
    total_rate: f64,
    since_rebuild: u32,
    affected: Vec<u32>,
}

impl EventCatalog {
    /// Enumerate events for every site in `active` (sorted, unique).
    pub fn build<M: RateModel, S: SpinSource, R: Rng>(
        model: &M,
        src: &S,
        active: Vec<u32>,
        rng: &mut R,
    ) -> Self {
        let n = src.lattice().n_sites() as usize;
        let mut slot_of_site = vec![NO_SLOT; n];
        for (k, &a) in active.iter().enumerate() {
            debug_assert_eq!(slot_of_site[a as usize], NO_SLOT, "duplicate active site");
            slot_of_site[a as usize] = k as u32;
        }
        let mut per_anchor: Vec<Vec<Event>> = vec![Vec::new(); active.len()];
        let mut anchor_rates = vec![0.0; active.len()];
        for (k, &a) in active.iter().enumerate() {
            model.events(a, src, rng, &mut per_anchor[k]);
            anchor_rates[k] = per_anchor[k].iter().map(|e| e.rate).sum();
        }
        let total_rate = anchor_rates.iter().sum();
        EventCatalog {
            anchors: active,
            slot_of_site,
            per_anchor,
            anchor_rates,
            total_rate,
            since_rebuild: 0,
            affected: Vec::new(),
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    pub fn anchors(&self) -> &[u32] {
        &self.anchors
    }

    /// Event at cumulative-rate position `target` in [0, total). Rounding
    /// drift in the cached total can push `target` past the true sum; the
    /// scan then falls back to the last positive-rate event.
    fn select(&self, target: f64) -> Event {
        let mut acc = 0.0;
        let mut last: Option<&Event> = None;
        for (k, &r) in self.anchor_rates.iter().enumerate() {
            if r <= 0.0 {
                continue;
            }
            if target < acc + r {
                let mut inner = target - acc;
                for e in &self.per_anchor[k] {
                    if inner < e.rate {
                        return e.clone();
                    }
                    inner -= e.rate;
                }
                return self.per_anchor[k].last().expect("positive anchor rate").clone();
            }
            acc += r;
            last = self.per_anchor[k].last();
        }
        last.expect("select requires positive total rate").clone()
    }

    /// Re-enumerate every active anchor within the locality radius of a
    /// changed site and fold the rate deltas into the cached total.
    pub fn refresh<M: RateModel, S: SpinSource, R: Rng>(
        &mut self,
        model: &M,
        src: &S,
        changed: &[(u32, u8)],
        rng: &mut R,
    ) {
        let lat = src.lattice();
        let radius = model.locality();
        let mut affected = std::mem::take(&mut self.affected);
        affected.clear();
        for &(s, _) in changed {
            if self.slot_of_site[s as usize] != NO_SLOT {
                affected.push(s);
            }
            if radius == 1 {
                for &y in lat.nbrs1(s) {
                    if self.slot_of_site[y as usize] != NO_SLOT {
                        affected.push(y);
                    }
                }
            } else {
                for y in lat.neighbors(s, radius) {
                    if self.slot_of_site[y as usize] != NO_SLOT {
                        affected.push(y);
                    }
                }
            }
        }
        affected.sort_unstable();
        affected.dedup();
        for &a in &affected {
            let k = self.slot_of_site[a as usize] as usize;
            self.total_rate -= self.anchor_rates[k];
            self.per_anchor[k].clear();
            model.events(a, src, rng, &mut self.per_anchor[k]);
            let r: f64 = self.per_anchor[k].iter().map(|e| e.rate).sum();
            self.anchor_rates[k] = r;
            self.total_rate += r;
        }
        self.affected = affected;

        self.since_rebuild += 1;
        if self.since_rebuild >= REBUILD_INTERVAL {
            self.total_rate = self.anchor_rates.iter().sum();
            self.since_rebuild = 0;
        }
        if self.total_rate < 0.0 {
            self.total_rate = 0.0;
        }
    }

    /// Exact per-anchor state for comparison against a fresh build.
    #[cfg(test)]
    fn snapshot(&self) -> (Vec<Vec<Event>>, Vec<f64>) {
        (self.per_anchor.clone(), self.anchor_rates.clone())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WindowStats {
    pub jumps: u64,
}

/// Advance `field` by one window of physical length `duration`, executing
/// catalog events in continuous time.
pub fn run_window<M: RateModel, F: Field, R: Rng>(
    model: &M,
    field: &mut F,
    catalog: &mut EventCatalog,
    duration: f64,
    rng: &mut R,
) -> WindowStats {
    debug_assert!(duration >= 0.0 && duration.is_finite());
    let mut t = 0.0;
    let mut jumps = 0u64;
    loop {
        let lambda = catalog.total_rate();
        if lambda <= 0.0 {
            break;
        }
        let mut u: f64 = rng.random();
        if u <= 0.0 {
            u = f64::MIN_POSITIVE;
        }
        let tau = -u.ln() / lambda;
        if t + tau > duration {
            break;
        }
        t += tau;
        let target = rng.random::<f64>() * lambda;
        let ev = catalog.select(target);
        field.apply(&ev.update);
        catalog.refresh(model, field, ev.update.targets(), rng);
        jumps += 1;
    }
    WindowStats { jumps }
}
