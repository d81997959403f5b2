//! Scalar observables on configurations and statistics for their time
//! series.

use crate::error::{Error, Result};
use crate::lattice::Configuration;

/// Fraction of sites carrying `spin`.
pub fn coverage(cfg: &Configuration, spin: u8) -> f64 {
    cfg.count(spin) as f64 / f64::from(cfg.lattice().n_sites())
}

/// Coverage of every spin value, indexed by spin.
pub fn species_coverages(cfg: &Configuration) -> Vec<f64> {
    (0..cfg.space().num_states())
        .map(|s| coverage(cfg, s))
        .collect()
}

/// Two-point occupation correlation at separation `k` along axis 0,
/// averaged over all sites: the probability that a site and its `k`-th
/// periodic neighbour both carry `spin`.
pub fn two_point_correlation(cfg: &Configuration, spin: u8, k: u32) -> f64 {
    let lattice = cfg.lattice();
    let n0 = lattice.dims()[0];
    let n = lattice.n_sites();
    let mut coords = vec![0u32; lattice.ndim()];
    let mut acc = 0u64;
    for site in 0..n {
        if cfg.spin(site) != spin {
            continue;
        }
        lattice.site_coords_into(site, &mut coords);
        coords[0] = (coords[0] + k) % n0;
        let shifted = lattice.site_index(&coords);
        acc += u64::from(cfg.spin(shifted) == spin);
    }
    acc as f64 / f64::from(n)
}

/// Sample mean and its standard error (independent samples).
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Time average with a batch-means error bar.
///
/// The last `batches * floor(len / batches)` entries are grouped into
/// `batches` equal blocks; the standard error comes from the scatter of
/// the block means, which absorbs autocorrelation the naive estimate
/// would ignore.
pub fn batch_mean_se(series: &[f64], batches: usize) -> Result<(f64, f64)> {
    if batches < 2 {
        return Err(Error::estimation("need at least two batches"));
    }
    let per = series.len() / batches;
    if per == 0 {
        return Err(Error::estimation(format!(
            "series of {} too short for {batches} batches",
            series.len()
        )));
    }
    let used = &series[series.len() - per * batches..];
    let means: Vec<f64> = used
        .chunks_exact(per)
        .map(|b| b.iter().sum::<f64>() / per as f64)
        .collect();
    Ok(mean_and_se(&means))
}

/// Normalized autocorrelation of a series at the given lag. Returns zero
/// for constant series.
pub fn autocorrelation(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    assert!(lag < n, "lag {lag} out of range for series of {n}");
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if var <= 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..n - lag)
        .map(|i| (series[i] - mean) * (series[i + lag] - mean))
        .sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, SpinSpace};

    fn ring_with(spins: Vec<u8>, states: u8) -> Configuration {
        let n = spins.len() as u32;
        Configuration::from_spins(
            Lattice::new(&[n]).unwrap(),
            SpinSpace::new(states).unwrap(),
            spins,
        )
        .unwrap()
    }

    #[test]
    fn coverage_counts_each_species() {
        let cfg = ring_with(vec![0, 1, 2, 1], 3);
        assert_eq!(coverage(&cfg, 1), 0.5);
        assert_eq!(species_coverages(&cfg), vec![0.25, 0.5, 0.25]);
        assert!((species_coverages(&cfg).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn correlation_of_alternating_ring() {
        let cfg = ring_with(vec![1, 0, 1, 0, 1, 0, 1, 0], 2);
        assert_eq!(two_point_correlation(&cfg, 1, 0), 0.5);
        assert_eq!(two_point_correlation(&cfg, 1, 1), 0.0);
        assert_eq!(two_point_correlation(&cfg, 1, 2), 0.5);
        assert_eq!(two_point_correlation(&cfg, 1, 8), 0.5);
    }

    #[test]
    fn correlation_follows_axis_zero_in_two_dimensions() {
        // 4x2 lattice striped along axis 0: rows of ones and zeros.
        let lat = Lattice::new(&[4, 2]).unwrap();
        let mut spins = vec![0u8; 8];
        for site in 0..8u32 {
            let c = lat.site_coords(site);
            spins[site as usize] = u8::from(c[0] % 2 == 0);
        }
        let cfg = Configuration::from_spins(lat, SpinSpace::new(2).unwrap(), spins).unwrap();
        assert_eq!(two_point_correlation(&cfg, 1, 0), 0.5);
        assert_eq!(two_point_correlation(&cfg, 1, 1), 0.0);
        assert_eq!(two_point_correlation(&cfg, 1, 2), 0.5);
    }

    #[test]
    fn mean_and_se_match_direct_formulas() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // Sample variance 5/3, SE = sqrt(5/12).
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn batch_means_use_the_series_tail() {
        // 35 entries, 16 batches of 2 -> last 32 used, first 3 dropped.
        let series: Vec<f64> = (0..35).map(f64::from).collect();
        let (m, se) = batch_mean_se(&series, 16).unwrap();
        assert!((m - (3.0 + 34.0) / 2.0).abs() < 1e-12);
        assert!(se > 0.0);

        let flat = vec![2.0; 64];
        let (fm, fse) = batch_mean_se(&flat, 16).unwrap();
        assert_eq!(fm, 2.0);
        assert_eq!(fse, 0.0);

        assert!(batch_mean_se(&[1.0, 2.0], 16).is_err());
        assert!(batch_mean_se(&series, 1).is_err());
    }

    #[test]
    fn batch_error_bar_reflects_autocorrelation() {
        // A slowly varying series: batch means scatter widely, so the
        // batch SE must exceed the naive iid SE.
        let series: Vec<f64> = (0..256).map(|i| f64::from(i / 64)).collect();
        let (_, batch_se) = batch_mean_se(&series, 16).unwrap();
        let (_, naive_se) = mean_and_se(&series);
        assert!(batch_se > naive_se);
    }

    #[test]
    fn autocorrelation_signs_and_edges() {
        let alternating: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((autocorrelation(&alternating, 1) + 1.0).abs() < 0.05);
        assert!((autocorrelation(&alternating, 2) - 1.0).abs() < 0.05);
        assert_eq!(autocorrelation(&[3.0; 10], 4), 0.0);
        let series: Vec<f64> = (0..32).map(f64::from).collect();
        assert_eq!(autocorrelation(&series, 0), 1.0);
    }
}
