//! Exact one-dimensional optimal transport.
//!
//! For 1-D measures the optimal map is the monotone rearrangement
//! `F_μ^{-1} ∘ F_σ`, and `W₂² = ∫₀¹ |F_μ^{-1}(q) - F_σ^{-1}(q)|² dq`. Both are
//! evaluated exactly from sorted atoms and cumulative weights.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Cumulative weights closer than this are treated as the same level.
///
/// Cumulative sums of identical weight sequences agree bit-for-bit, but sums
/// of different partitions of the same mass (e.g. `1/3 + 1/3` vs `2/3`) can
/// differ by a few ulps.
pub(crate) const CUMULATIVE_TOLERANCE: f64 = 1e-12;

/// Sorted distinct support of a 1-D measure with its cumulative weights.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SortedAtoms {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SortedAtoms {
    pub(crate) fn from_measure(nu: &DiscreteMeasure) -> Result<Self> {
        if nu.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: nu.dim(),
            });
        }
        Ok(Self::from_values(nu.flat_points(), nu.weights()))
    }

    pub(crate) fn from_values(values: &[f64], weights: &[f64]) -> Self {
        let mut atoms: Vec<(f64, f64)> = values
            .iter()
            .copied()
            .zip(weights.iter().copied())
            .filter(|&(_, w)| w > 0.0)
            .collect();
        // stable: ties keep input order
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut out_values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut cumulative: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (v, w) in atoms {
            acc += w;
            if out_values.last() == Some(&v) {
                *cumulative.last_mut().unwrap() = acc;
            } else {
                out_values.push(v);
                cumulative.push(acc);
            }
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        SortedAtoms {
            values: out_values,
            cumulative,
        }
    }

    /// Right-continuous CDF `F(t) = Σ{w : x ≤ t}`.
    pub(crate) fn cdf(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `inf{t : F(t) ≥ q}`; levels at or below zero return the smallest atom.
    pub(crate) fn quantile(&self, q: f64) -> f64 {
        let j = self
            .cumulative
            .partition_point(|&c| c < q - CUMULATIVE_TOLERANCE);
        self.values[j.min(self.values.len() - 1)]
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Right-continuous CDF of a 1-D measure.
pub fn cdf(nu: &DiscreteMeasure, t: f64) -> Result<f64> {
    Ok(SortedAtoms::from_measure(nu)?.cdf(t))
}

/// Left-continuous generalized inverse `F_ν^{-1}(q) = inf{t : F_ν(t) ≥ q}`.
pub fn quantile(nu: &DiscreteMeasure, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::QuantileOutOfRange(q));
    }
    Ok(SortedAtoms::from_measure(nu)?.quantile(q))
}

/// Monotone 1-D transport map `x ↦ F_μ^{-1}(F_σ(x))`.
///
/// Total on ℝ: points below the source support map to the smallest target atom.
/// A source atom whose mass straddles several target atoms is sent to the
/// quantile at its upper cumulative level rather than split.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMap1D {
    src: SortedAtoms,
    dst: SortedAtoms,
}

impl SliceMap1D {
    pub fn eval(&self, x: f64) -> f64 {
        self.dst.quantile(self.src.cdf(x))
    }

    /// Largest slope between consecutive source atoms.
    pub fn max_slope(&self) -> f64 {
        self.src
            .values
            .windows(2)
            .map(|w| (self.eval(w[1]) - self.eval(w[0])) / (w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Sorted distinct source atoms.
    pub fn source_support(&self) -> &[f64] {
        self.src.values()
    }
}

/// Optimal transport map between two 1-D measures.
pub fn ot_map_1d(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<SliceMap1D> {
    Ok(SliceMap1D {
        src: SortedAtoms::from_measure(source)?,
        dst: SortedAtoms::from_measure(target)?,
    })
}

/// Exact 1-D Wasserstein-2 distance.
pub fn w2_1d(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    Ok(w2_sq_sorted(&SortedAtoms::from_measure(a)?, &SortedAtoms::from_measure(b)?).sqrt())
}

pub(crate) fn w2_sq_values(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> f64 {
    w2_sq_sorted(&SortedAtoms::from_values(a, wa), &SortedAtoms::from_values(b, wb))
}

/// Integrates the squared quantile difference over merged cumulative breakpoints.
pub(crate) fn w2_sq_sorted(a: &SortedAtoms, b: &SortedAtoms) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut acc = 0.0;
    while i < a.values.len() && j < b.values.len() {
        let (ca, cb) = (a.cumulative[i], b.cumulative[j]);
        let next = ca.min(cb);
        let d = a.values[i] - b.values[j];
        acc += (next - prev).max(0.0) * d * d;
        prev = next;
        if ca <= next + CUMULATIVE_TOLERANCE {
            i += 1;
        }
        if cb <= next + CUMULATIVE_TOLERANCE {
            j += 1;
        }
    }
    acc
}
