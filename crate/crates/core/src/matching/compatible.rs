use crate::error::{Error, Result};
use crate::measure::{dot, DiscreteMeasure, PointMap};
use crate::slicing::OrthoMatrix;

use super::maps::directional_w2_sq;

/// Strictly increasing piecewise-linear function ℝ → ℝ.
///
/// Outside the first and last knot the end segments are extended linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("piecewise-linear map needs at least two knots".into()));
        }
        if knots.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::InvalidArgument("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::InvalidArgument("knots must be strictly increasing in both coordinates".into()));
        }
        let (xs, ys) = knots.into_iter().unzip();
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn identity() -> Self {
        PiecewiseLinear {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
        }
    }

    /// `t ↦ a t + b` with `a > 0`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(0.0, b), (1.0, a + b)])
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.xs.len();
        let seg = self.xs.partition_point(|&x| x <= t).clamp(1, k - 1) - 1;
        let (x0, x1, y0, y1) = (self.xs[seg], self.xs[seg + 1], self.ys[seg], self.ys[seg + 1]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }
}

/// P-compatible map `x ↦ Σᵢ fᵢ(x·θᵢ) θᵢ` with strictly increasing fᵢ.
#[derive(Debug, Clone)]
pub struct CompatibleMap {
    basis: OrthoMatrix,
    fs: Vec<PiecewiseLinear>,
}

impl CompatibleMap {
    pub fn new(basis: OrthoMatrix, fs: Vec<PiecewiseLinear>) -> Result<Self> {
        if fs.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: fs.len(),
            });
        }
        Ok(CompatibleMap { basis, fs })
    }

    /// Isotropic scale and shift `x ↦ a x + b`, which is compatible with every basis.
    pub fn scale_shift(basis: OrthoMatrix, a: f64, b: &[f64]) -> Result<Self> {
        basis_dim_check(&basis, b.len())?;
        let fs = basis
            .columns()
            .map(|theta| PiecewiseLinear::affine(a, dot(b, theta)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis, fs)
    }

    pub fn basis(&self) -> &OrthoMatrix {
        &self.basis
    }

    pub fn components(&self) -> &[PiecewiseLinear] {
        &self.fs
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let coords: Vec<f64> = self
            .basis
            .columns()
            .zip(&self.fs)
            .map(|(theta, f)| f.eval(dot(x, theta)))
            .collect();
        self.basis.apply(&coords)
    }
}

fn basis_dim_check(basis: &OrthoMatrix, dim: usize) -> Result<()> {
    if basis.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: dim,
        });
    }
    Ok(())
}

impl PointMap for CompatibleMap {
    fn input_dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        basis_dim_check(&self.basis, x.len())?;
        Ok(self.eval(x))
    }
}

/// Bases closer than this in Frobenius norm are considered the same.
const BASIS_MATCH_TOLERANCE: f64 = 1e-12;

/// `Σᵢ W₂²((T♯σ)^{θᵢ}, μ^{θᵢ})` for `T ∈ 𝔖(P)`; equals `‖T − T_{σ,μ;P}‖²_σ`.
pub fn compatible_residual(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    map: &CompatibleMap,
    basis: &OrthoMatrix,
) -> Result<f64> {
    basis_dim_check(basis, map.basis.dim())?;
    let gap = map.basis.frobenius_distance(basis);
    if gap > BASIS_MATCH_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "compatible map basis differs from the comparison basis (|ΔP|_F = {gap:e})"
        )));
    }
    source.check_dim(target.dim())?;
    let pushed = source.pushforward(map)?;
    Ok(basis
        .columns()
        .map(|theta| directional_w2_sq(&pushed, target, theta))
        .sum())
}
