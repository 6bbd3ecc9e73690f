use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Bin layout plus per-bin frequencies, shared by empirical histograms and
/// exact reference masses.
pub trait BinFrequencies {
    fn lo(&self) -> f64;
    fn hi(&self) -> f64;
    fn n_bins(&self) -> usize;
    /// Fraction of all mass (including any out-of-range mass) in bin `j`.
    fn frequency(&self, j: usize) -> f64;

    fn same_binning(&self, other: &impl BinFrequencies) -> bool
    where
        Self: Sized,
    {
        self.n_bins() == other.n_bins() && self.lo() == other.lo() && self.hi() == other.hi()
    }
}

/// Uniform-bin occupancy counts on `[lo, hi)`.
///
/// Out-of-range samples go to `overflow`; they count towards frequencies
/// but not towards the in-range density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityHistogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    overflow: u64,
    inv_width: f64,
}

impl DensityHistogram {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(invalid("need at least one bin"));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("histogram bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self {
            lo,
            hi,
            counts: vec![0; n_bins],
            overflow: 0,
            inv_width: n_bins as f64 / (hi - lo),
        })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    #[inline]
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        let k = ((x - self.lo) * self.inv_width) as usize;
        Some(k.min(self.counts.len() - 1))
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        self.add_many(x, 1);
    }

    #[inline]
    pub fn add_many(&mut self, x: f64, times: u64) {
        match self.bin_of(x) {
            Some(k) => self.counts[k] += times,
            None => self.overflow += times,
        }
    }

    pub(crate) fn add_to_bin(&mut self, bin: Option<usize>, times: u64) {
        match bin {
            Some(k) => self.counts[k] += times,
            None => self.overflow += times,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    /// In-range count, the sum of all bins.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.width()
    }

    /// `count_j / (total * h)` over in-range samples.
    pub fn density(&self, j: usize) -> f64 {
        let t = self.total();
        if t == 0 {
            return 0.0;
        }
        self.counts[j] as f64 / (t as f64 * self.width())
    }

    pub fn densities(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|j| self.density(j)).collect()
    }

    /// Adds another histogram's counts; the binning must match.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if !self.same_binning(other) {
            return Err(Error::MismatchedBinning);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn clear(&mut self) {
        self.counts.fill(0);
        self.overflow = 0;
    }
}

impl BinFrequencies for DensityHistogram {
    fn lo(&self) -> f64 {
        self.lo
    }

    fn hi(&self) -> f64 {
        self.hi
    }

    fn n_bins(&self) -> usize {
        self.counts.len()
    }

    fn frequency(&self, j: usize) -> f64 {
        let all = self.total() + self.overflow;
        if all == 0 {
            return 0.0;
        }
        self.counts[j] as f64 / all as f64
    }
}

/// Exact probability mass per bin of a reference density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedMasses {
    pub lo: f64,
    pub hi: f64,
    pub masses: Vec<f64>,
}

impl BinnedMasses {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.masses.len() as f64
    }

    pub fn bin_center(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.width()
    }

    pub fn density(&self, j: usize) -> f64 {
        self.masses[j] / self.width()
    }

    /// Normalised bin frequencies of an empirical histogram, for use as a reference.
    pub fn from_histogram(h: &DensityHistogram) -> Self {
        Self {
            lo: h.lo,
            hi: h.hi,
            masses: (0..h.n_bins()).map(|j| h.frequency(j)).collect(),
        }
    }
}

impl BinFrequencies for BinnedMasses {
    fn lo(&self) -> f64 {
        self.lo
    }

    fn hi(&self) -> f64 {
        self.hi
    }

    fn n_bins(&self) -> usize {
        self.masses.len()
    }

    fn frequency(&self, j: usize) -> f64 {
        self.masses[j]
    }
}

/// Histogram of a sample set.
pub fn bin_count(samples: &[f64], lo: f64, hi: f64, n_bins: usize) -> Result<DensityHistogram> {
    let mut h = DensityHistogram::new(lo, hi, n_bins)?;
    for &x in samples {
        h.add(x);
    }
    Ok(h)
}

/// `sum_j |f_j - g_j|` over bin frequencies; 0 for identical, 2 for disjoint.
pub fn relative_error(a: &impl BinFrequencies, b: &impl BinFrequencies) -> Result<f64> {
    if !a.same_binning(b) {
        return Err(Error::MismatchedBinning);
    }
    Ok((0..a.n_bins()).map(|j| (a.frequency(j) - b.frequency(j)).abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bin_midpoint() {
        let h = bin_count(&[0.5; 10], 0.0, 2.0, 1).unwrap();
        assert_eq!(h.density(0), 0.5);
        assert_eq!(h.total(), 10);
    }

    #[test]
    fn overflow_kept_out_of_density() {
        let h = bin_count(&[-1.0, 0.25, 0.75, 3.0], 0.0, 1.0, 2).unwrap();
        assert_eq!(h.overflow(), 2);
        assert_eq!(h.total(), 2);
        assert_eq!(h.density(0), 1.0);
        assert_eq!(h.frequency(0), 0.25);
    }

    #[test]
    fn identical_and_disjoint() {
        let a = bin_count(&[0.1, 0.2], 0.0, 1.0, 4).unwrap();
        let b = bin_count(&[0.9], 0.0, 1.0, 4).unwrap();
        assert_eq!(relative_error(&a, &a).unwrap(), 0.0);
        assert_eq!(relative_error(&a, &b).unwrap(), 2.0);
        let c = bin_count(&[0.9], 0.0, 1.0, 5).unwrap();
        assert_eq!(relative_error(&a, &c), Err(Error::MismatchedBinning));
    }

    #[test]
    fn upper_edge_is_out_of_range() {
        let h = bin_count(&[1.0], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.overflow(), 1);
    }
}
