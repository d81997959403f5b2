//! Rate models: Arrhenius adsorption/desorption, Kawasaki exchange, and the
//! ZGB surface-reaction model.
//!
//! A model turns (anchor site, local spins) into a short list of executable
//! events. Enumeration is pure given the spin field; the only randomness is
//! an explicit caller-supplied stream used to pick partner neighbors for
//! multi-site updates. `channels` exposes the fully resolved per-partner
//! decomposition of the same generator for dense-matrix work.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Lattice, SiteUpdate, SpinSpace};

/// Read access to a spin field plus its geometry. Implemented by
/// `Configuration` and by the executor's private cell patches.
pub trait SpinSource {
    fn lattice(&self) -> &Lattice;
    fn spin(&self, site: u32) -> u8;
}

impl SpinSource for Configuration {
    #[inline]
    fn lattice(&self) -> &Lattice {
        Configuration::lattice(self)
    }
    #[inline]
    fn spin(&self, site: u32) -> u8 {
        Configuration::spin(self, site)
    }
}

/// One executable transition: fires at `rate`, applies `update`.
/// Rates are strictly positive; zero-rate transitions are never emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub anchor: u32,
    pub rate: f64,
    pub update: SiteUpdate,
}

/// Parameters for the lattice-gas models (Arrhenius flips, Kawasaki hops).
///
/// The desorption barrier is U(x,σ) = coupling·Σ_{y~x}(σ(y) − 1) + field.
/// The (σ(y) − 1) offset pins `field` to the convention of the closed-form
/// isotherms: coverage is exactly 1/2 at field = coupling in 1D and the 2D
/// critical point sits at field = 2·coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusParams {
    pub c_a: f64,
    pub c_d: f64,
    pub beta: f64,
    pub coupling: f64,
    pub field: f64,
}

impl ArrheniusParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_a", self.c_a),
            ("c_d", self.c_d),
            ("beta", self.beta),
            ("coupling", self.coupling),
            ("field", self.field),
        ] {
            if !v.is_finite() {
                return Err(Error::model(format!("{name} must be finite, got {v}")));
            }
        }
        if self.c_a < 0.0 || self.c_d < 0.0 {
            return Err(Error::model("c_a and c_d must be nonnegative"));
        }
        if self.beta < 0.0 {
            return Err(Error::model("beta must be nonnegative"));
        }
        Ok(())
    }

    /// Desorption barrier at `x` (occupied-neighbor sum, shifted).
    #[inline]
    fn barrier<S: SpinSource>(&self, x: u32, src: &S) -> f64 {
        let mut sum = 0.0;
        for &y in src.lattice().nbrs1(x) {
            sum += f64::from(src.spin(y)) - 1.0;
        }
        self.coupling * sum + self.field
    }

    #[inline]
    fn desorb_rate<S: SpinSource>(&self, x: u32, src: &S) -> f64 {
        self.c_d * (-self.beta * self.barrier(x, src)).exp()
    }
}

/// Parameters for the ZGB CO oxidation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZgbParams {
    /// CO adsorption fraction in [0, 1].
    pub k1: f64,
    /// Reaction rate constant.
    pub k2: f64,
}

impl ZgbParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.k1) || !self.k1.is_finite() {
            return Err(Error::model(format!("k1 must lie in [0,1], got {}", self.k1)));
        }
        if self.k2 < 0.0 || !self.k2.is_finite() {
            return Err(Error::model(format!("k2 must be nonnegative, got {}", self.k2)));
        }
        Ok(())
    }
}

/// ZGB species encoding.
pub const VACANT: u8 = 0;
pub const CO: u8 = 1;
pub const OX: u8 = 2;

/// A kinetic model: local event enumeration with bounded interaction range.
pub trait RateModel: Sync {
    fn spin_space(&self) -> SpinSpace;

    /// Interaction radius L: rates at an anchor depend only on spins within
    /// distance L, and updates write only within distance L of the anchor.
    fn locality(&self) -> u32;

    /// Events anchored at `x`, aggregated over partner choices; partners are
    /// drawn from `rng` at enumeration time. Appends to `out`.
    fn events<S: SpinSource, R: Rng>(&self, x: u32, src: &S, rng: &mut R, out: &mut Vec<Event>);

    /// Fully resolved transition channels anchored at `x` (one entry per
    /// elementary transition, partner choices expanded). Same generator as
    /// `events`, deterministic; used to assemble dense generator matrices.
    fn channels<S: SpinSource>(&self, x: u32, src: &S, out: &mut Vec<Event>);
}

/// Single spin-flip adsorption/desorption dynamics.
#[derive(Debug, Clone, Copy)]
pub struct Arrhenius {
    pub params: ArrheniusParams,
}

impl Arrhenius {
    pub fn new(params: ArrheniusParams) -> Result<Self> {
        params.validate()?;
        Ok(Arrhenius { params })
    }
}

impl RateModel for Arrhenius {
    fn spin_space(&self) -> SpinSpace {
        SpinSpace::new(2).expect("2 states")
    }

    fn locality(&self) -> u32 {
        1
    }

    fn events<S: SpinSource, R: Rng>(&self, x: u32, src: &S, _rng: &mut R, out: &mut Vec<Event>) {
        self.channels(x, src, out);
    }

    fn channels<S: SpinSource>(&self, x: u32, src: &S, out: &mut Vec<Event>) {
        if src.spin(x) == 0 {
            if self.params.c_a > 0.0 {
                out.push(Event {
                    anchor: x,
                    rate: self.params.c_a,
                    update: SiteUpdate::single(x, 1),
                });
            }
        } else {
            let rate = self.params.desorb_rate(x, src);
            if rate > 0.0 {
                out.push(Event {
                    anchor: x,
                    rate,
                    update: SiteUpdate::single(x, 0),
                });
            }
        }
    }
}

/// Particle-conserving nearest-neighbor exchange; the hop rate out of `x` is
/// the Arrhenius desorption rate of `x`, split over each vacant neighbor.
#[derive(Debug, Clone, Copy)]
pub struct Kawasaki {
    pub params: ArrheniusParams,
}

impl Kawasaki {
    pub fn new(params: ArrheniusParams) -> Result<Self> {
        params.validate()?;
        Ok(Kawasaki { params })
    }
}

impl RateModel for Kawasaki {
    fn spin_space(&self) -> SpinSpace {
        SpinSpace::new(2).expect("2 states")
    }

    fn locality(&self) -> u32 {
        1
    }

    fn events<S: SpinSource, R: Rng>(&self, x: u32, src: &S, _rng: &mut R, out: &mut Vec<Event>) {
        self.channels(x, src, out);
    }

    fn channels<S: SpinSource>(&self, x: u32, src: &S, out: &mut Vec<Event>) {
        if src.spin(x) != 1 {
            return;
        }
        let rate = self.params.desorb_rate(x, src);
        if rate <= 0.0 {
            return;
        }
        for &y in src.lattice().nbrs1(x) {
            if src.spin(y) == 0 {
                out.push(Event {
                    anchor: x,
                    rate,
                    update: SiteUpdate::pair((x, 0), (y, 1)).expect("distinct sites"),
                });
            }
        }
    }
}

/// ZGB CO oxidation on a square lattice: CO adsorption, dissociative O2
/// adsorption onto a vacant pair, and CO+O reaction/desorption.
///
/// Rates follow the standard per-site normalization over 4 neighbors, so the
/// model requires a 2D lattice. Aggregated events carry the total rate
/// (constant × eligible-neighbor count / 4) and a partner drawn uniformly
/// among the eligible neighbors; `channels` lists each partner separately.
#[derive(Debug, Clone, Copy)]
pub struct Zgb {
    pub params: ZgbParams,
}

impl Zgb {
    pub fn new(params: ZgbParams) -> Result<Self> {
        params.validate()?;
        Ok(Zgb { params })
    }

    #[inline]
    fn eligible<S: SpinSource>(x: u32, src: &S, species: u8) -> arrayvec::ArrayVec<u32, 4> {
        let mut out = arrayvec::ArrayVec::new();
        for &y in src.lattice().nbrs1(x) {
            if src.spin(y) == species {
                out.push(y);
            }
        }
        out
    }
}

impl RateModel for Zgb {
    fn spin_space(&self) -> SpinSpace {
        SpinSpace::new(3).expect("3 states")
    }

    fn locality(&self) -> u32 {
        1
    }

    fn events<S: SpinSource, R: Rng>(&self, x: u32, src: &S, rng: &mut R, out: &mut Vec<Event>) {
        debug_assert_eq!(src.lattice().ndim(), 2, "ZGB rates assume 4 neighbors");
        match src.spin(x) {
            VACANT => {
                if self.params.k1 > 0.0 {
                    out.push(Event {
                        anchor: x,
                        rate: self.params.k1,
                        update: SiteUpdate::single(x, CO),
                    });
                }
                let vac = Self::eligible(x, src, VACANT);
                if !vac.is_empty() && self.params.k1 < 1.0 {
                    let partner = vac[rng.random_range(0..vac.len())];
                    out.push(Event {
                        anchor: x,
                        rate: (1.0 - self.params.k1) * vac.len() as f64 / 4.0,
                        update: SiteUpdate::pair((x, OX), (partner, OX)).expect("distinct"),
                    });
                }
            }
            CO => {
                let ox = Self::eligible(x, src, OX);
                if !ox.is_empty() && self.params.k2 > 0.0 {
                    let partner = ox[rng.random_range(0..ox.len())];
                    out.push(Event {
                        anchor: x,
                        rate: self.params.k2 * ox.len() as f64 / 4.0,
                        update: SiteUpdate::pair((x, VACANT), (partner, VACANT)).expect("distinct"),
                    });
                }
            }
            _ => {
                let co = Self::eligible(x, src, CO);
                if !co.is_empty() && self.params.k2 > 0.0 {
                    let partner = co[rng.random_range(0..co.len())];
                    out.push(Event {
                        anchor: x,
                        rate: self.params.k2 * co.len() as f64 / 4.0,
                        update: SiteUpdate::pair((x, VACANT), (partner, VACANT)).expect("distinct"),
                    });
                }
            }
        }
    }

    fn channels<S: SpinSource>(&self, x: u32, src: &S, out: &mut Vec<Event>) {
        debug_assert_eq!(src.lattice().ndim(), 2, "ZGB rates assume 4 neighbors");
        match src.spin(x) {
            VACANT => {
                if self.params.k1 > 0.0 {
                    out.push(Event {
                        anchor: x,
                        rate: self.params.k1,
                        update: SiteUpdate::single(x, CO),
                    });
                }
                if self.params.k1 < 1.0 {
                    for y in Self::eligible(x, src, VACANT) {
                        out.push(Event {
                            anchor: x,
                            rate: (1.0 - self.params.k1) / 4.0,
                            update: SiteUpdate::pair((x, OX), (y, OX)).expect("distinct"),
                        });
                    }
                }
            }
            CO => {
                if self.params.k2 > 0.0 {
                    for y in Self::eligible(x, src, OX) {
                        out.push(Event {
                            anchor: x,
                            rate: self.params.k2 / 4.0,
                            update: SiteUpdate::pair((x, VACANT), (y, VACANT)).expect("distinct"),
                        });
                    }
                }
            }
            _ => {
                if self.params.k2 > 0.0 {
                    for y in Self::eligible(x, src, CO) {
                        out.push(Event {
                            anchor: x,
                            rate: self.params.k2 / 4.0,
                            update: SiteUpdate::pair((x, VACANT), (y, VACANT)).expect("distinct"),
                        });
                    }
                }
            }
        }
    }
}

/// Runtime-selected model, for configuration-driven entry points.
#[derive(Debug, Clone, Copy)]
pub enum Model {
    Arrhenius(Arrhenius),
    Kawasaki(Kawasaki),
    Zgb(Zgb),
}

impl RateModel for Model {
    fn spin_space(&self) -> SpinSpace {
        match self {
            Model::Arrhenius(m) => m.spin_space(),
            Model::Kawasaki(m) => m.spin_space(),
            Model::Zgb(m) => m.spin_space(),
        }
    }

    fn locality(&self) -> u32 {
        match self {
            Model::Arrhenius(m) => m.locality(),
            Model::Kawasaki(m) => m.locality(),
            Model::Zgb(m) => m.locality(),
        }
    }

    fn events<S: SpinSource, R: Rng>(&self, x: u32, src: &S, rng: &mut R, out: &mut Vec<Event>) {
        match self {
            Model::Arrhenius(m) => m.events(x, src, rng, out),
            Model::Kawasaki(m) => m.events(x, src, rng, out),
            Model::Zgb(m) => m.events(x, src, rng, out),
        }
    }

    fn channels<S: SpinSource>(&self, x: u32, src: &S, out: &mut Vec<Event>) {
        match self {
            Model::Arrhenius(m) => m.channels(x, src, out),
            Model::Kawasaki(m) => m.channels(x, src, out),
            Model::Zgb(m) => m.channels(x, src, out),
        }
    }
}
