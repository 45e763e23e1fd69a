use crate::error::{Error, Result};
use crate::measure::{dist_sq, dot, Direction, DiscreteMeasure, PointMap};
use crate::ot1d::{ot_map_1d, w2_sq_values, SliceMap1D};
use crate::slicing::OrthoMatrix;

/// `T_{σ,μ;θ}(x) = x + (t(x·θ) − x·θ) θ`, with t the 1-D map along θ.
#[derive(Debug, Clone)]
pub struct SingleSliceMap {
    theta: Direction,
    map: SliceMap1D,
}

impl SingleSliceMap {
    pub fn direction(&self) -> &Direction {
        &self.theta
    }

    pub fn component(&self) -> &SliceMap1D {
        &self.map
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let theta = self.theta.as_slice();
        let s = dot(x, theta);
        let delta = self.map.eval(s) - s;
        x.iter().zip(theta).map(|(xi, ti)| xi + delta * ti).collect()
    }
}

impl PointMap for SingleSliceMap {
    fn input_dim(&self) -> usize {
        self.theta.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(x))
    }
}

/// `T_{σ,μ;P}(x) = Σᵢ tᵢ(x·θᵢ) θᵢ`, one monotone 1-D map per column of P.
#[derive(Debug, Clone)]
pub struct MatrixSliceMap {
    basis: OrthoMatrix,
    maps: Vec<SliceMap1D>,
}

impl MatrixSliceMap {
    pub fn basis(&self) -> &OrthoMatrix {
        &self.basis
    }

    pub fn components(&self) -> &[SliceMap1D] {
        &self.maps
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let coords: Vec<f64> = self
            .basis
            .columns()
            .zip(&self.maps)
            .map(|(theta, t)| t.eval(dot(x, theta)))
            .collect();
        self.basis.apply(&coords)
    }

    /// Largest slope over all components.
    pub fn max_slope(&self) -> f64 {
        self.maps.iter().map(SliceMap1D::max_slope).fold(0.0, f64::max)
    }
}

impl PointMap for MatrixSliceMap {
    fn input_dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(x))
    }
}

fn check_pair(source: &DiscreteMeasure, target: &DiscreteMeasure, dim: usize) -> Result<()> {
    source.check_dim(target.dim())?;
    source.check_dim(dim)
}

/// Single-slice matching map from `source` to `target` along θ.
pub fn single_slice_map(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    theta: &Direction,
) -> Result<SingleSliceMap> {
    check_pair(source, target, theta.dim())?;
    Ok(SingleSliceMap {
        theta: theta.clone(),
        map: ot_map_1d(&source.project(theta)?, &target.project(theta)?)?,
    })
}

/// Matrix-slice matching map from `source` to `target` for the columns of `basis`.
pub fn matrix_slice_map(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    basis: &OrthoMatrix,
) -> Result<MatrixSliceMap> {
    check_pair(source, target, basis.dim())?;
    let maps = basis
        .columns()
        .map(|theta| ot_map_1d(&source.project_onto(theta)?, &target.project_onto(theta)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixSliceMap {
        basis: basis.clone(),
        maps,
    })
}

/// Slice-matching operator `U(σ, μ, P) = (T_{σ,μ;P})♯σ`.
pub fn apply_operator(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    basis: &OrthoMatrix,
) -> Result<DiscreteMeasure> {
    source.pushforward(&matrix_slice_map(source, target, basis)?)
}

/// `Σᵢ W₂²(σ^{θᵢ}, μ^{θᵢ})` over the columns of `basis`.
pub fn sliced_residual(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    basis: &OrthoMatrix,
) -> Result<f64> {
    check_pair(source, target, basis.dim())?;
    Ok(basis
        .columns()
        .map(|theta| directional_w2_sq(source, target, theta))
        .sum())
}

/// `W₂²(σ^θ, μ^θ)` for an unchecked direction.
pub(crate) fn directional_w2_sq(source: &DiscreteMeasure, target: &DiscreteMeasure, theta: &[f64]) -> f64 {
    w2_sq_values(
        &source.projected_values(theta),
        source.weights(),
        &target.projected_values(theta),
        target.weights(),
    )
}

/// `‖F − G‖_σ = (∫ ‖F(x) − G(x)‖² dσ)^{1/2}`.
pub fn map_distance<F, G>(sigma: &DiscreteMeasure, f: &F, g: &G) -> Result<f64>
where
    F: PointMap + ?Sized,
    G: PointMap + ?Sized,
{
    sigma.check_dim(f.input_dim())?;
    sigma.check_dim(g.input_dim())?;
    let mut acc = 0.0;
    for (x, w) in sigma.points().zip(sigma.weights()) {
        let (fx, gx) = (f.apply(x)?, g.apply(x)?);
        if fx.len() != gx.len() {
            return Err(Error::DimensionMismatch {
                expected: fx.len(),
                found: gx.len(),
            });
        }
        acc += w * dist_sq(&fx, &gx);
    }
    Ok(acc.sqrt())
}
