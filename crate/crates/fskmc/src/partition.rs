//! Domain decomposition: axis-aligned cells, two-coloring, and the validity
//! rules that make same-color cells safe to advance concurrently.
//!
//! Cells tile the lattice; the color of a cell is the parity of its
//! cell-coordinate sum, so neighboring cells along any axis alternate.
//! Validity requires every pair of same-color cells to sit strictly more
//! than the interaction radius apart, which with radius-1 models holds for
//! any even checkerboard. In one dimension the stronger classical property
//! also holds and is checked: same-color cell closures (cell plus halo) are
//! pairwise disjoint. In two or more dimensions diagonal same-color cells
//! meet corner-to-corner at distance 2, so closure disjointness is
//! unattainable and the distance rule is the operative guarantee.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Metric, METRIC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    O,
    E,
}

impl Color {
    pub fn index(self) -> usize {
        match self {
            Color::O => 0,
            Color::E => 1,
        }
    }

    pub fn flip(self) -> Color {
        match self {
            Color::O => Color::E,
            Color::E => Color::O,
        }
    }

    pub fn from_parity(parity: u32) -> Color {
        if parity % 2 == 0 {
            Color::O
        } else {
            Color::E
        }
    }
}

/// One axis-aligned tile of the decomposition.
#[derive(Debug, Clone)]
pub struct Cell {
    pub id: u32,
    /// Per-axis tile origin (inclusive).
    pub lo: Vec<u32>,
    /// Per-axis tile size; the tile never wraps.
    pub extent: Vec<u32>,
    /// Sorted global indices of the tile's sites.
    pub sites: Vec<u32>,
    pub color: Color,
}

pub struct Partition {
    lattice: Arc<Lattice>,
    cells: Vec<Cell>,
    locality: u32,
    site_cell: Vec<u32>,
}

impl Partition {
    /// Regular decomposition: `cells_per_axis[a]` equal tiles along axis a.
    pub fn build(lattice: Arc<Lattice>, cells_per_axis: &[u32], locality: u32) -> Result<Self> {
        let dims = lattice.dims().to_vec();
        if cells_per_axis.len() != dims.len() {
            return Err(Error::partition(format!(
                "cells_per_axis has {} entries for a {}-dimensional lattice",
                cells_per_axis.len(),
                dims.len()
            )));
        }
        let mut extents = Vec::with_capacity(dims.len());
        for (a, (&c, &n)) in cells_per_axis.iter().zip(dims.iter()).enumerate() {
            if c < 2 || c % 2 != 0 {
                return Err(Error::partition(format!(
                    "axis {a}: cell count {c} must be even and at least 2"
                )));
            }
            if n % c != 0 {
                return Err(Error::partition(format!(
                    "axis {a}: cell count {c} does not divide extent {n}"
                )));
            }
            extents.push(n / c);
        }

        let mut cells = Vec::new();
        let mut coord = vec![0u32; dims.len()];
        loop {
            let lo: Vec<u32> = coord
                .iter()
                .zip(extents.iter())
                .map(|(&c, &e)| c * e)
                .collect();
            let parity: u32 = coord.iter().sum();
            cells.push(Cell {
                id: cells.len() as u32,
                lo,
                extent: extents.clone(),
                sites: Vec::new(),
                color: Color::from_parity(parity),
            });
            // Odometer over cell coordinates, last axis fastest.
            let mut a = dims.len();
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                coord[a] += 1;
                if coord[a] < cells_per_axis[a] {
                    break;
                }
                coord[a] = 0;
            }
            if coord.iter().all(|&c| c == 0) {
                break;
            }
        }
        Self::assemble(lattice, cells, locality)
    }

    /// Variable-width strips along a one-dimensional lattice, colored by
    /// strip parity. This is the shape the load balancer produces.
    pub fn from_strips(lattice: Arc<Lattice>, extents: &[u32], locality: u32) -> Result<Self> {
        if lattice.ndim() != 1 {
            return Err(Error::partition(
                "strip partitions are defined for one-dimensional lattices",
            ));
        }
        if extents.len() < 2 || extents.len() % 2 != 0 {
            return Err(Error::partition(format!(
                "strip count {} must be even and at least 2",
                extents.len()
            )));
        }
        let total: u64 = extents.iter().map(|&e| u64::from(e)).sum();
        if total != u64::from(lattice.n_sites()) {
            return Err(Error::partition(format!(
                "strip extents sum to {total}, lattice has {} sites",
                lattice.n_sites()
            )));
        }
        let mut cells = Vec::with_capacity(extents.len());
        let mut lo = 0u32;
        for (i, &e) in extents.iter().enumerate() {
            cells.push(Cell {
                id: i as u32,
                lo: vec![lo],
                extent: vec![e],
                sites: Vec::new(),
                color: Color::from_parity(i as u32),
            });
            lo += e;
        }
        Self::assemble(lattice, cells, locality)
    }

    fn assemble(lattice: Arc<Lattice>, mut cells: Vec<Cell>, locality: u32) -> Result<Self> {
        let n = lattice.n_sites();
        let mut site_cell = vec![u32::MAX; n as usize];
        for cell in &mut cells {
            let min_extent = locality.max(1).max(2 * locality);
            for (a, &e) in cell.extent.iter().enumerate() {
                if e < min_extent.max(locality + 1) {
                    return Err(Error::partition(format!(
                        "cell {} axis {a}: extent {e} too small for interaction radius {locality} \
                         (needs at least {})",
                        cell.id,
                        min_extent.max(locality + 1)
                    )));
                }
            }
            cell.sites = box_sites(&lattice, &cell.lo, &cell.extent);
            for &s in &cell.sites {
                if site_cell[s as usize] != u32::MAX {
                    return Err(Error::partition(format!("site {s} covered twice")));
                }
                site_cell[s as usize] = cell.id;
            }
        }
        if site_cell.iter().any(|&c| c == u32::MAX) {
            return Err(Error::partition("cells do not cover the lattice"));
        }

        let p = Partition {
            lattice,
            cells,
            locality,
            site_cell,
        };
        p.validate_colors()?;
        Ok(p)
    }

    /// Same-color separation (always) and 1D closure disjointness.
    fn validate_colors(&self) -> Result<()> {
        for i in 0..self.cells.len() {
            for j in (i + 1)..self.cells.len() {
                let (a, b) = (&self.cells[i], &self.cells[j]);
                if a.color != b.color {
                    continue;
                }
                let d = self.box_distance(a, b);
                if d <= self.locality {
                    return Err(Error::partition(format!(
                        "same-color cells {} and {} are {d} apart, needs > {} \
                         (interaction radius); use more colors or coarser cells",
                        a.id, b.id, self.locality
                    )));
                }
            }
        }
        if self.lattice.ndim() == 1 {
            for i in 0..self.cells.len() {
                for j in (i + 1)..self.cells.len() {
                    if self.cells[i].color != self.cells[j].color {
                        continue;
                    }
                    let ci = self.closure(self.cells[i].id);
                    let cj = self.closure(self.cells[j].id);
                    if !sorted_disjoint(&ci, &cj) {
                        return Err(Error::partition(format!(
                            "same-color cells {} and {} have overlapping closures",
                            self.cells[i].id, self.cells[j].id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Minimum site distance between two tiles, from per-axis circular
    /// interval gaps (exact for axis-aligned boxes).
    fn box_distance(&self, a: &Cell, b: &Cell) -> u32 {
        let dims = self.lattice.dims();
        let mut gaps = Vec::with_capacity(dims.len());
        for axis in 0..dims.len() {
            let n = dims[axis];
            let (alo, ae) = (a.lo[axis], a.extent[axis]);
            let (blo, be) = (b.lo[axis], b.extent[axis]);
            let rb = (blo + n - alo) % n;
            let ra = (alo + n - blo) % n;
            let overlap = rb < ae || ra < be;
            let gap = if overlap {
                0
            } else {
                (rb - ae + 1).min(ra - be + 1)
            };
            gaps.push(gap);
        }
        match METRIC {
            Metric::L1 => gaps.iter().sum(),
            Metric::Linf => gaps.iter().copied().max().unwrap_or(0),
        }
    }

    /// Cell sites plus every site within the interaction radius, sorted.
    pub fn closure(&self, cell_id: u32) -> Vec<u32> {
        let cell = &self.cells[cell_id as usize];
        let mut out = cell.sites.clone();
        for &s in &cell.sites {
            out.extend(self.lattice.neighbors(s, self.locality));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn locality(&self) -> u32 {
        self.locality
    }

    pub fn cells_of(&self, color: Color) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.color == color)
    }

    pub fn cell_of_site(&self, site: u32) -> u32 {
        self.site_cell[site as usize]
    }
}

/// Global indices of the axis-aligned box [lo, lo+extent) (no wrapping),
/// ascending.
fn box_sites(lattice: &Lattice, lo: &[u32], extent: &[u32]) -> Vec<u32> {
    let mut sites = Vec::with_capacity(extent.iter().product::<u32>() as usize);
    let mut coord: Vec<u32> = lo.to_vec();
    loop {
        sites.push(lattice.site_index(&coord));
        let mut a = coord.len();
        loop {
            if a == 0 {
                break;
            }
            a -= 1;
            coord[a] += 1;
            if coord[a] < lo[a] + extent[a] {
                break;
            }
            coord[a] = lo[a];
        }
        if coord == lo {
            break;
        }
    }
    sites.sort_unstable();
    sites
}

fn sorted_disjoint(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ring_partition_alternates_colors() {
        let lat = Lattice::new(&[8]).unwrap();
        let p = Partition::build(lat, &[4], 1).unwrap();
        assert_eq!(p.cells().len(), 4);
        let colors: Vec<Color> = p.cells().iter().map(|c| c.color).collect();
        assert_eq!(colors, vec![Color::O, Color::E, Color::O, Color::E]);
        assert_eq!(p.cells()[0].sites, vec![0, 1]);
        assert_eq!(p.cells()[2].sites, vec![4, 5]);
        for s in 0..8 {
            assert_eq!(p.cell_of_site(s), s / 2);
        }
    }

    #[test]
    fn checkerboard_colors_in_2d() {
        let lat = Lattice::new(&[4, 4]).unwrap();
        let p = Partition::build(lat, &[2, 2], 1).unwrap();
        let colors: Vec<Color> = p.cells().iter().map(|c| c.color).collect();
        assert_eq!(colors, vec![Color::O, Color::E, Color::E, Color::O]);
        // Cell 3 covers the high corner block.
        assert_eq!(p.cells()[3].lo, vec![2, 2]);
        assert_eq!(p.cells()[3].sites, vec![10, 11, 14, 15]);
    }

    #[test]
    fn closures_are_disjoint_for_same_color_in_1d() {
        let lat = Lattice::new(&[8]).unwrap();
        let p = Partition::build(lat, &[4], 1).unwrap();
        assert_eq!(p.closure(0), vec![0, 1, 2, 7]);
        assert_eq!(p.closure(2), vec![3, 4, 5, 6]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let lat = Lattice::new(&[12]).unwrap();
        // Odd cell count.
        assert!(Partition::build(lat.clone(), &[3], 1).is_err());
        // Count that does not divide the extent.
        assert!(Partition::build(lat.clone(), &[8], 1).is_err());
        // Extent not above the interaction radius.
        let lat4 = Lattice::new(&[4]).unwrap();
        assert!(Partition::build(lat4, &[4], 1).is_err());
        // Wrong dimensionality of the request.
        assert!(Partition::build(lat, &[2, 2], 1).is_err());
    }

    #[test]
    fn rejects_checkerboard_when_radius_reaches_diagonal_neighbors() {
        // Diagonal same-color cells meet at distance 2, so radius-2 models
        // cannot use a two-coloring in 2D.
        let lat = Lattice::new(&[8, 8]).unwrap();
        let err = match Partition::build(lat, &[2, 2], 2) {
            Err(e) => e,
            Ok(_) => panic!("radius-2 checkerboard accepted"),
        };
        assert!(err.to_string().contains("same-color"));
    }

    #[test]
    fn strip_partition_round_trip() {
        let lat = Lattice::new(&[16]).unwrap();
        let p = Partition::from_strips(lat, &[2, 4, 2, 8], 1).unwrap();
        assert_eq!(p.cells().len(), 4);
        assert_eq!(p.cells()[1].sites, (2..6).collect::<Vec<u32>>());
        assert_eq!(p.cells()[3].sites, (8..16).collect::<Vec<u32>>());
        let colors: Vec<Color> = p.cells().iter().map(|c| c.color).collect();
        assert_eq!(colors, vec![Color::O, Color::E, Color::O, Color::E]);
    }

    #[test]
    fn strip_partition_rejections() {
        let lat = Lattice::new(&[16]).unwrap();
        assert!(Partition::from_strips(lat.clone(), &[8, 4, 4], 1).is_err()); // odd count
        assert!(Partition::from_strips(lat.clone(), &[8, 4], 1).is_err()); // wrong sum
        assert!(Partition::from_strips(lat.clone(), &[1, 15], 1).is_err()); // thin strip
        let lat2 = Lattice::new(&[4, 4]).unwrap();
        assert!(Partition::from_strips(lat2, &[8, 8], 1).is_err()); // not 1D
    }

    proptest! {
        #[test]
        fn every_site_in_exactly_one_cell(
            half_cells in 1u32..4,
            tile in 2u32..5,
            d in 1usize..3,
        ) {
            let count = 2 * half_cells;
            let dims = vec![count * tile; d];
            let lat = Lattice::new(&dims).unwrap();
            let p = Partition::build(lat.clone(), &vec![count; d], 1).unwrap();
            let total: usize = p.cells().iter().map(|c| c.sites.len()).sum();
            prop_assert_eq!(total, lat.n_sites() as usize);
            for cell in p.cells() {
                for &s in &cell.sites {
                    prop_assert_eq!(p.cell_of_site(s), cell.id);
                }
            }
            // Same-color cells keep their distance.
            for a in p.cells() {
                for b in p.cells() {
                    if a.id < b.id && a.color == b.color {
                        let mut min_d = u32::MAX;
                        for &x in &a.sites {
                            for &y in &b.sites {
                                min_d = min_d.min(lat.distance(x, y));
                            }
                        }
                        prop_assert!(min_d > 1);
                    }
                }
            }
        }

        #[test]
        fn box_distance_matches_brute_force(
            alo in 0u32..12, ae in 1u32..5,
            blo in 0u32..12, be in 1u32..5,
        ) {
            prop_assume!(alo + ae <= 12 && blo + be <= 12);
            let lat = Lattice::new(&[12, 12]).unwrap();
            let a = Cell {
                id: 0,
                lo: vec![alo, blo],
                extent: vec![ae, be],
                sites: box_sites(&lat, &[alo, blo], &[ae, be]),
                color: Color::O,
            };
            let b = Cell {
                id: 1,
                lo: vec![blo, alo],
                extent: vec![be, ae],
                sites: box_sites(&lat, &[blo, alo], &[be, ae]),
                color: Color::O,
            };
            let p = Partition {
                lattice: lat.clone(),
                cells: vec![],
                locality: 1,
                site_cell: vec![],
            };
            let got = p.box_distance(&a, &b);
            let mut want = u32::MAX;
            for &x in &a.sites {
                for &y in &b.sites {
                    want = want.min(lat.distance(x, y));
                }
            }
            prop_assert_eq!(got, want);
        }
    }
}
