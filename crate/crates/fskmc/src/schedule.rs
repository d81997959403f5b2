//! Fractional-step schedules: which color runs when, and for how long.
//!
//! A macro window advances physical time by its `advance`; within it each
//! substep freezes one color group and runs the other for `duration`. Under
//! Lie and Strang splitting each color receives the full window of
//! generator time, so substep durations over a window sum to twice its
//! advance. The random scheme runs a single uniformly drawn color per
//! window; its mean generator is half the full one, which the default time
//! rescaling compensates by halving each window's physical advance.

use crate::error::{Error, Result};
use crate::partition::Color;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Lie,
    Strang,
    Random,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Lie => "lie",
            SchemeKind::Strang => "strang",
            SchemeKind::Random => "random",
        }
    }
}

/// Which color group leads within a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupOrder {
    OE,
    EO,
}

impl GroupOrder {
    fn first(self) -> Color {
        match self {
            GroupOrder::OE => Color::O,
            GroupOrder::EO => Color::E,
        }
    }
}

/// Substep color: fixed by the scheme, or drawn per window at execution
/// time from the dedicated schedule stream, with the given probability of
/// landing on the odd group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorChoice {
    Fixed(Color),
    Drawn { p_odd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Substep {
    pub color: ColorChoice,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub substeps: Vec<Substep>,
    /// Physical time this window advances the clock.
    pub advance: f64,
}

#[derive(Debug, Clone)]
pub struct Schedule {
    pub scheme: SchemeKind,
    pub nominal_dt: f64,
    pub windows: Vec<WindowPlan>,
    pub total_time: f64,
    pub warnings: Vec<String>,
}

impl Schedule {
    /// Cumulative physical time after each window.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.windows
            .iter()
            .map(|w| {
                t += w.advance;
                t
            })
            .collect()
    }
}

/// Build the full window list covering `total_time` with nominal step `dt`.
///
/// The window count is `round(total_time / dt)` clamped to at least one;
/// when that does not tile exactly, the final window absorbs the remainder
/// and a warning records the adjustment.
pub fn make_schedule(
    scheme: SchemeKind,
    total_time: f64,
    dt: f64,
    order: GroupOrder,
    rescale_random_time: bool,
) -> Result<Schedule> {
    make_schedule_with_draw(scheme, total_time, dt, order, rescale_random_time, 0.5)
}

/// [`make_schedule`] with a non-uniform group-draw distribution for the
/// randomized scheme: `p_odd` is the per-window probability of picking the
/// odd group.
pub fn make_schedule_with_draw(
    scheme: SchemeKind,
    total_time: f64,
    dt: f64,
    order: GroupOrder,
    rescale_random_time: bool,
    p_odd: f64,
) -> Result<Schedule> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::schedule(format!("dt must be positive, got {dt}")));
    }
    if !(total_time.is_finite() && total_time > 0.0) {
        return Err(Error::schedule(format!(
            "total_time must be positive, got {total_time}"
        )));
    }
    if !(p_odd.is_finite() && (0.0..=1.0).contains(&p_odd)) {
        return Err(Error::schedule(format!(
            "draw probability must lie in [0, 1], got {p_odd}"
        )));
    }
    let n = ((total_time / dt).round() as u64).max(1);
    let rem = total_time - (n - 1) as f64 * dt;
    let mut warnings = Vec::new();
    if (rem - dt).abs() > 1e-9 * dt {
        warnings.push(format!(
            "total_time {total_time} is not an integer multiple of dt {dt}; \
             final window advances {rem}"
        ));
    }

    let first = order.first();
    let second = first.flip();
    let mut windows = Vec::new();
    for w in 0..n {
        let d = if w + 1 == n { rem } else { dt };
        match scheme {
            SchemeKind::Lie => windows.push(WindowPlan {
                substeps: vec![
                    Substep {
                        color: ColorChoice::Fixed(first),
                        duration: d,
                    },
                    Substep {
                        color: ColorChoice::Fixed(second),
                        duration: d,
                    },
                ],
                advance: d,
            }),
            SchemeKind::Strang => windows.push(WindowPlan {
                substeps: vec![
                    Substep {
                        color: ColorChoice::Fixed(first),
                        duration: 0.5 * d,
                    },
                    Substep {
                        color: ColorChoice::Fixed(second),
                        duration: d,
                    },
                    Substep {
                        color: ColorChoice::Fixed(first),
                        duration: 0.5 * d,
                    },
                ],
                advance: d,
            }),
            SchemeKind::Random => {
                let copies = if rescale_random_time { 2 } else { 1 };
                let advance = if rescale_random_time { 0.5 * d } else { d };
                for _ in 0..copies {
                    windows.push(WindowPlan {
                        substeps: vec![Substep {
                            color: ColorChoice::Drawn { p_odd },
                            duration: d,
                        }],
                        advance,
                    });
                }
            }
        }
    }
    Ok(Schedule {
        scheme,
        nominal_dt: dt,
        windows,
        total_time,
        warnings,
    })
}
