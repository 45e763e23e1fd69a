//! Distances between n-dimensional discrete measures.
//!
//! `w2_exact` solves the assignment problem between two equal-size uniform
//! clouds; `sw2` is a Monte-Carlo estimate of the sliced Wasserstein distance
//! over uniform directions; `haar_sliced_expectation` averages the sliced
//! residual over Haar-random orthonormal bases.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::sliced_residual;
use crate::measure::{dist_sq, DiscreteMeasure};
use crate::ot1d::w2_sq_values;
use crate::slicing::{domain, sample_direction, sample_haar_orthogonal, stream_rng, RngSeed};

/// Largest atom count accepted by [`w2_exact`].
pub const DEFAULT_EXACT_CAP: usize = 512;

/// Exact `W₂` between equal-size uniform clouds (at most 512 atoms).
pub fn w2_exact(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    w2_exact_with_cap(a, b, DEFAULT_EXACT_CAP)
}

/// Exact `W₂²`, without the round trip through a square root.
pub(crate) fn w2_sq_exact(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    Ok(optimal_assignment(a, b, DEFAULT_EXACT_CAP)?.1)
}

pub fn w2_exact_with_cap(a: &DiscreteMeasure, b: &DiscreteMeasure, cap: usize) -> Result<f64> {
    Ok(optimal_assignment(a, b, cap)?.1.sqrt())
}

/// Optimal pairing `i ↦ assignment[i]` and its mean squared displacement.
pub(crate) fn optimal_assignment(a: &DiscreteMeasure, b: &DiscreteMeasure, cap: usize) -> Result<(Vec<usize>, f64)> {
    a.check_dim(b.dim())?;
    let m = a.len();
    if b.len() != m {
        return Err(Error::Unsupported(format!(
            "exact W2 needs equal atom counts, got {m} and {}",
            b.len()
        )));
    }
    if !a.is_uniform() || !b.is_uniform() {
        return Err(Error::Unsupported("exact W2 needs uniform weights".into()));
    }
    if m > cap {
        return Err(Error::Unsupported(format!("exact W2 is capped at {cap} atoms, got {m}")));
    }
    let cost: Vec<f64> = a
        .points()
        .flat_map(|x| b.points().map(move |y| dist_sq(x, y)))
        .collect();
    let assignment = hungarian(m, &cost);
    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * m + j])
        .sum();
    Ok((assignment, (total / m as f64).max(0.0)))
}

/// Minimum-cost perfect matching on a dense m×m row-major cost matrix.
///
/// Shortest augmenting paths with row/column potentials, O(m³).
fn hungarian(m: usize, cost: &[f64]) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; m + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row matched to column j (1-based, 0 = free)
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; m];
    for j in 1..=m {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Monte-Carlo sliced Wasserstein estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sw2Estimate {
    /// `SW₂` estimate.
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub std_error: f64,
    /// `SW₂²` estimate: mean of the per-direction squared 1-D distances.
    pub value_sq: f64,
    /// Standard error of `value_sq`.
    pub value_sq_std_error: f64,
    pub num_directions: usize,
    pub seed: RngSeed,
}

/// `SW₂(σ, μ)` from `num_directions` uniform directions drawn from
/// `stream_rng(seed, SW2_DIRECTIONS, 0)`.
pub fn sw2(a: &DiscreteMeasure, b: &DiscreteMeasure, num_directions: usize, seed: RngSeed) -> Result<Sw2Estimate> {
    a.check_dim(b.dim())?;
    if num_directions == 0 {
        return Err(Error::InvalidArgument("need at least one direction".into()));
    }
    let mut rng = stream_rng(seed, domain::SW2_DIRECTIONS, 0);
    let terms: Vec<f64> = (0..num_directions)
        .map(|_| {
            let theta = sample_direction(&mut rng, a.dim());
            let t = theta.as_slice();
            w2_sq_values(&a.projected_values(t), a.weights(), &b.projected_values(t), b.weights())
        })
        .collect();
    let stats = McEstimate::from_samples(&terms);
    let value = stats.mean.max(0.0).sqrt();
    let std_error = if value > 0.0 {
        stats.std_error / (2.0 * value)
    } else {
        0.0
    };
    Ok(Sw2Estimate {
        value,
        std_error,
        value_sq: stats.mean,
        value_sq_std_error: stats.std_error,
        num_directions,
        seed,
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Mean and `s/√R` of the samples, summed in input order.
    pub fn from_samples(xs: &[f64]) -> Self {
        let r = xs.len();
        let mean = xs.iter().sum::<f64>() / r as f64;
        let var = if r > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error: (var / r as f64).sqrt(),
            samples: r,
        }
    }
}

/// Mean of `sliced_residual(σ, μ, P)` over `replicates` Haar matrices; tends to `n·SW₂²`.
///
/// Replicate r draws its matrix from `stream_rng(seed, HAAR_REPLICATE, r)`.
pub fn haar_sliced_expectation(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    replicates: usize,
    seed: RngSeed,
) -> Result<McEstimate> {
    a.check_dim(b.dim())?;
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let samples = (0..replicates)
        .map(|r| {
            let p = sample_haar_orthogonal(&mut stream_rng(seed, domain::HAAR_REPLICATE, r as u64), a.dim());
            sliced_residual(a, b, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McEstimate::from_samples(&samples))
}
