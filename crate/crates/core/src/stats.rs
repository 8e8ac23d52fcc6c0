//! Empirical CDFs, Kolmogorov–Smirnov distances and 2-D histograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfView {
    values: Vec<f64>,
}

impl EcdfView {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("empirical CDF needs at least one value".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidSpec("empirical CDF sample contains NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of the sample `≤ t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.values.partition_point(|&v| v <= t) as f64 / self.values.len() as f64
    }
}

/// One distribution comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub description: String,
    pub statistic: f64,
    pub count: usize,
    pub threshold: f64,
    pub pass: bool,
}

impl KsReport {
    pub fn new(description: impl Into<String>, statistic: f64, count: usize, threshold: f64) -> Self {
        Self {
            description: description.into(),
            statistic,
            count,
            threshold,
            pass: statistic <= threshold,
        }
    }
}

/// `sup_t |F_N(t) − F(t)|` for a continuous reference `F`.
pub fn ks_statistic(sample: &EcdfView, cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    sample
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.abs().max(below.abs())
        })
        .fold(0.0, f64::max)
}

/// `sup_t |F_N(t) − G_M(t)|`.
pub fn ks_two_sample(a: &EcdfView, b: &EcdfView) -> f64 {
    let (x, y) = (&a.values, &b.values);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// `√(ln(2/δ) / 2N) + allowance`.
pub fn dkw_threshold(n: usize, delta: f64, allowance: f64) -> f64 {
    assert!(n >= 1 && delta > 0.0 && delta < 1.0 && allowance >= 0.0);
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt() + allowance
}

/// Two-sample version with effective size `NM / (N + M)`.
pub fn dkw_threshold_two_sample(n: usize, m: usize, delta: f64, allowance: f64) -> f64 {
    assert!(n >= 1 && m >= 1 && delta > 0.0 && delta < 1.0 && allowance >= 0.0);
    let eff = (n as f64 * m as f64) / (n + m) as f64;
    ((2.0 / delta).ln() / (2.0 * eff)).sqrt() + allowance
}

/// Counts on a `B × B` grid over `[−L, L]²`. Row index follows the
/// imaginary part, column index the real part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub half_width: f64,
    pub bins: usize,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl Histogram2d {
    pub fn new(half_width: f64, bins: usize) -> Self {
        assert!(half_width > 0.0 && bins >= 1);
        Self {
            half_width,
            bins,
            counts: vec![0; bins * bins],
            outside: 0,
        }
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_width / self.bins as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width().powi(2)
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        let l = self.half_width;
        if !(x >= -l && x <= l) {
            return None;
        }
        Some((((x + l) / self.cell_width()) as usize).min(self.bins - 1))
    }

    pub fn add(&mut self, z: C64) {
        match (self.bin_of(z.re), self.bin_of(z.im)) {
            (Some(c), Some(r)) => self.counts[r * self.bins + c] += 1,
            _ => self.outside += 1,
        }
    }

    /// Lower-left corner of cell `(row, col)`.
    pub fn cell_origin(&self, row: usize, col: usize) -> C64 {
        let w = self.cell_width();
        C64::new(-self.half_width + col as f64 * w, -self.half_width + row as f64 * w)
    }

    pub fn cell_center(&self, row: usize, col: usize) -> C64 {
        let h = 0.5 * self.cell_width();
        self.cell_origin(row, col) + C64::new(h, h)
    }

    /// `counts / (trials · cell area)`.
    pub fn densities(&self, trials: usize) -> Vec<f64> {
        let norm = trials as f64 * self.cell_area();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    pub fn merge(&mut self, other: &Histogram2d) {
        assert_eq!(self.bins, other.bins);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
    }
}

pub fn histogram2d(points: &[C64], half_width: f64, bins: usize) -> Histogram2d {
    let mut h = Histogram2d::new(half_width, bins);
    for &z in points {
        h.add(z);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridComparison {
    pub max_relative_error: f64,
    pub qualifying_cells: usize,
    /// Set when no cell met the expected-count floor.
    pub empty: bool,
}

/// Maximum of `|observed − predicted| / predicted` over cells whose expected
/// count `predicted · counts_per_density` is at least `min_expected`.
pub fn grid_compare(
    observed: &[f64],
    predicted: &[f64],
    counts_per_density: f64,
    min_expected: f64,
) -> GridComparison {
    assert_eq!(observed.len(), predicted.len());
    let mut worst = 0.0f64;
    let mut qualifying = 0;
    for (&o, &p) in observed.iter().zip(predicted) {
        if p * counts_per_density >= min_expected {
            qualifying += 1;
            worst = worst.max((o - p).abs() / p);
        }
    }
    GridComparison {
        max_relative_error: worst,
        qualifying_cells: qualifying,
        empty: qualifying == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_trivial_cases() {
        let one = EcdfView::new(vec![0.5]).unwrap();
        assert!((ks_statistic(&one, |t| t) - 0.5).abs() < 1e-15);
        let n = 40;
        let q = EcdfView::new((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()).unwrap();
        assert!((ks_statistic(&q, |t| t) - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn two_sample_identical_and_disjoint() {
        let a = EcdfView::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b = EcdfView::new(vec![4.0, 5.0]).unwrap();
        assert_eq!(ks_two_sample(&a, &b), 1.0);
        let c = EcdfView::new(vec![1.5, 2.5, 3.5]).unwrap();
        assert!((ks_two_sample(&a, &c) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn thresholds() {
        assert!((dkw_threshold(10_000, 0.01, 0.0) - 0.016_276).abs() < 1e-6);
        let base = dkw_threshold(500, 0.05, 0.0);
        assert!((dkw_threshold(500, 0.05, 0.03) - base - 0.03).abs() < 1e-15);
        assert!((dkw_threshold(2000, 0.05, 0.0) - base / 2.0).abs() < 1e-15);
        assert!((dkw_threshold_two_sample(100, 100, 0.05, 0.0) - dkw_threshold(50, 0.05, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn histogram_binning() {
        let h = histogram2d(&[C64::new(0.0, 0.0); 5], 2.0, 4);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.counts[2 * 4 + 2], 5);
        let edge = histogram2d(&[C64::new(2.0, -2.0), C64::new(2.1, 0.0)], 2.0, 4);
        assert_eq!(edge.counts[3], 1);
        assert_eq!(edge.outside, 1);
        assert!((h.cell_center(0, 0) - C64::new(-1.5, -1.5)).norm() < 1e-15);
    }

    #[test]
    fn empty_comparison_flags() {
        let g = grid_compare(&[1.0, 2.0], &[1.0, 2.0], 1.0, 25.0);
        assert!(g.empty);
        assert_eq!(g.max_relative_error, 0.0);
        let g = grid_compare(&[1.1, 2.0], &[1.0, 2.0], 100.0, 25.0);
        assert_eq!(g.qualifying_cells, 2);
        assert!((g.max_relative_error - 0.1).abs() < 1e-12);
    }
}
