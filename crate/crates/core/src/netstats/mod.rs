//! Distribution and correlation analysis of symmetry values: traditional
//! network measurements, Pearson correlation, density histograms, and the
//! logistic fit of the merged-symmetry distribution.

mod fit;
mod measures;

pub use fit::{fit_logistic, fit_logistic_points, logistic, LogisticFit, MAX_ITERATIONS};
pub use measures::{
    average_neighbor_degree, betweenness, closeness, clustering, compute_measurement,
    compute_measurement_by_name, eigenvector, pagerank, Measurement, MeasurementVector,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 30;

/// Sample Pearson correlation. `NaN` marks an undefined entry; such pairs are
/// dropped before computing.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::TooFewValues {
            required: 2,
            found: pairs.len(),
        });
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` uniform edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Normalized so that `Σ density · width = 1`.
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Bins that are strictly higher than both neighbors (plateaus count once).
    pub fn local_maxima(&self) -> usize {
        let d = &self.densities;
        let mut peaks = 0;
        let mut i = 0;
        while i < d.len() {
            let mut j = i;
            while j + 1 < d.len() && d[j + 1] == d[i] {
                j += 1;
            }
            let left_lower = i == 0 || d[i - 1] < d[i];
            let right_lower = j + 1 == d.len() || d[j + 1] < d[i];
            if left_lower && right_lower && d[i] > 0.0 {
                peaks += 1;
            }
            i = j + 1;
        }
        peaks
    }

    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (i, &d) in self.densities.iter().enumerate() {
            if d > self.densities[best] {
                best = i;
            }
        }
        best
    }
}

/// Uniform-bin density histogram over `[min, max]` of the finite values. A
/// degenerate range is widened to `[v - 0.5, v + 0.5]`.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidInput(
            "histogram needs at least one bin".into(),
        ));
    }
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::TooFewValues {
            required: 1,
            found: 0,
        });
    }
    let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + i as f64 * width })
        .collect();
    let mut counts = vec![0usize; bins];
    for v in &finite {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = finite.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    Ok(Histogram {
        edges,
        counts,
        densities,
    })
}
