//! Deterministic stream derivation.
//!
//! Every (cell, window, substep) coordinate gets its own counter-keyed
//! ChaCha8 stream, so results are byte-identical for any worker count and
//! any execution order. The 32-byte key packs four little-endian u64 words:
//! master seed, cell key, window index, substep key. Composite keys reserve
//! bit ranges for nested execution; the schedule's own draws (random-scheme
//! color choices) use a cell key no real cell can produce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Cell-key value reserved for the schedule stream.
const SCHEDULE_TAG: u64 = u64::MAX;

#[derive(Debug, Clone, Copy)]
pub struct SeedPolicy {
    master: u64,
}

impl SeedPolicy {
    pub fn new(master: u64) -> Self {
        SeedPolicy { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// The unique stream for one (cell, window, substep) coordinate.
    pub fn stream(&self, cell_key: u64, window: u64, substep_key: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&cell_key.to_le_bytes());
        key[16..24].copy_from_slice(&window.to_le_bytes());
        key[24..32].copy_from_slice(&substep_key.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// Stream for schedule-level draws at one window (random-scheme color
    /// choices). Keyed by window index so any window's draw can be made
    /// without replaying earlier ones.
    pub fn schedule_stream(&self, window: u64) -> ChaCha8Rng {
        self.stream(SCHEDULE_TAG, window, 0)
    }

    /// Cell key for an outer cell and a nested tile within it (0 when the
    /// cell runs unnested). Outer ids stay below the schedule tag's high
    /// word, so no collision with `schedule_stream` is possible.
    pub fn cell_key(outer_cell: u32, inner_tile: u32) -> u64 {
        (u64::from(outer_cell) << 32) | u64::from(inner_tile)
    }

    /// Substep key combining the outer substep index with nested window and
    /// substep coordinates (both 0 when unnested).
    pub fn substep_key(outer_substep: u16, inner_window: u32, inner_substep: u16) -> u64 {
        (u64::from(outer_substep) << 48)
            | (u64::from(inner_window) << 16)
            | u64::from(inner_substep)
    }
}
