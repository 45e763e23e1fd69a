//! Discrete probability measures on ℝⁿ.
//!
//! A [`DiscreteMeasure`] is a finite list of atoms with nonnegative weights
//! summing to one. Atoms are stored row-major and are never merged, so the
//! i-th atom of a pushforward is always the image of the i-th input atom.

use serde::Serialize;

use crate::error::{Error, Result};

/// Raw weight sums further than this from one are rejected instead of rescaled.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// Sums this close to one are kept as given, so a rescaled measure re-reads unchanged.
const RESCALE_THRESHOLD: f64 = 1e-12;

/// Unit vectors must have norm one within this tolerance.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from atoms and weights.
    ///
    /// Weights whose sum is within [`WEIGHT_SUM_TOLERANCE`] of one are
    /// rescaled to sum to one; anything else is rejected.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(dim, flat, weights)
    }

    /// Uniform weights `1/m` on the given atoms.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let m = points.len();
        Self::new(points, vec![1.0 / m.max(1) as f64; m])
    }

    /// Builds a measure from row-major coordinates (`m * dim` values).
    pub fn from_flat(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be at least 1".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        if points.len() != dim * weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} coordinates do not form {} atoms of dimension {}",
                points.len(),
                weights.len(),
                dim
            )));
        }
        if let Some(bad) = points.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite coordinate {bad}")));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("invalid weight {bad}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() >= WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, expected 1")));
        }
        let weights = if (total - 1.0).abs() <= RESCALE_THRESHOLD {
            weights
        } else {
            weights.into_iter().map(|w| w / total).collect()
        };
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    /// Uniform measure from row-major coordinates.
    pub fn uniform_flat(dim: usize, points: Vec<f64>) -> Result<Self> {
        let m = points.len().checked_div(dim).unwrap_or(0);
        Self::from_flat(dim, points, vec![1.0 / m.max(1) as f64; m])
    }

    /// Normalizes arbitrary nonnegative masses into a probability measure.
    pub fn from_masses(dim: usize, points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not positive")));
        }
        let weights = masses.into_iter().map(|w| w / total).collect();
        Self::from_flat(dim, points, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Row-major coordinates.
    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every atom carries the same weight.
    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        let tol = 1e-12 / self.len() as f64;
        self.weights.iter().all(|w| (w - w0).abs() <= tol)
    }

    /// Projection `σ^θ = (x ↦ x·θ)♯σ`, a one-dimensional measure with the same weights.
    pub fn project(&self, theta: &Direction) -> Result<DiscreteMeasure> {
        self.project_onto(theta.as_slice())
    }

    pub(crate) fn project_onto(&self, theta: &[f64]) -> Result<DiscreteMeasure> {
        self.check_dim(theta.len())?;
        Ok(DiscreteMeasure {
            dim: 1,
            points: self.projected_values(theta),
            weights: self.weights.clone(),
        })
    }

    pub(crate) fn projected_values(&self, theta: &[f64]) -> Vec<f64> {
        self.points().map(|x| dot(x, theta)).collect()
    }

    pub fn moments(&self) -> Moments {
        let mut mean = vec![0.0; self.dim];
        let mut second_moment = 0.0;
        for (x, &w) in self.points().zip(&self.weights) {
            for (m, &xi) in mean.iter_mut().zip(x) {
                *m += w * xi;
            }
            second_moment += w * norm_sq(x);
        }
        Moments {
            mean,
            second_moment,
        }
    }

    /// Image measure `T♯σ`: atoms mapped, weights unchanged, no merging.
    pub fn pushforward<M: PointMap + ?Sized>(&self, map: &M) -> Result<DiscreteMeasure> {
        self.check_dim(map.input_dim())?;
        let mut out = Vec::with_capacity(self.points.len());
        let mut out_dim = None;
        for x in self.points() {
            let y = map.apply(x)?;
            match out_dim {
                None => out_dim = Some(y.len()),
                Some(d) if d != y.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: y.len(),
                    })
                }
                _ => {}
            }
            out.extend_from_slice(&y);
        }
        let dim = out_dim.unwrap_or(self.dim);
        if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure(format!("map produced non-finite value {bad}")));
        }
        Ok(DiscreteMeasure {
            dim,
            points: out,
            weights: self.weights.clone(),
        })
    }

    /// Same weights, new atom positions (row-major, same dimension).
    pub(crate) fn with_points(&self, points: Vec<f64>) -> DiscreteMeasure {
        debug_assert_eq!(points.len(), self.points.len());
        DiscreteMeasure {
            dim: self.dim,
            points,
            weights: self.weights.clone(),
        }
    }

    /// Converts an intensity grid into a measure on ℝ².
    ///
    /// Pixel `(row i, col j)` of an `H×W` grid becomes the point `(j, H-1-i)`
    /// with weight proportional to its intensity; zero pixels are dropped.
    pub fn from_image(grid: &IntensityGrid) -> Result<DiscreteMeasure> {
        let h = grid.height;
        let mut pts = Vec::new();
        let mut masses = Vec::new();
        for i in 0..h {
            for j in 0..grid.width {
                let v = grid.get(i, j);
                if v > 0.0 {
                    pts.push(j as f64);
                    pts.push((h - 1 - i) as f64);
                    masses.push(v);
                }
            }
        }
        if masses.is_empty() {
            return Err(Error::InvalidMeasure("image has no positive intensity".into()));
        }
        Self::from_masses(2, pts, masses)
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if other != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }
}

/// Unit vector θ ∈ S^{n-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts a vector whose norm is one within [`UNIT_NORM_TOLERANCE`].
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = norm_sq(&v).sqrt();
        if v.is_empty() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidDirection(norm));
        }
        Ok(Direction(v))
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(mut v: Vec<f64>) -> Result<Self> {
        let norm = norm_sq(&v).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidDirection(norm));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(Direction(v))
    }

    /// Standard basis vector `e_i` in ℝⁿ.
    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Direction(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Mean `E(σ)` and second moment `M₂(σ) = ∫‖x‖² dσ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub second_moment: f64,
}

impl Moments {
    /// `M₂(σ) - ‖E(σ)‖²`, the total variance.
    pub fn centered_second_moment(&self) -> f64 {
        self.second_moment - norm_sq(&self.mean)
    }
}

/// A map ℝⁿ → ℝⁿ that can be pushed a measure through.
pub trait PointMap {
    fn input_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Adapter turning a closure into a [`PointMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnMap { dim, f }
    }
}

impl<F> PointMap for FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }
}

/// Row-major grid of nonnegative pixel intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityGrid {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl IntensityGrid {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::InvalidArgument(format!(
                "{} intensities for a {height}x{width} grid",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid intensity {bad}")));
        }
        Ok(IntensityGrid {
            height,
            width,
            data,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure::uniform(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn project_onto_axis() {
        let p = two_atoms().project(&Direction::axis(2, 0)).unwrap();
        assert_eq!(p.flat_points(), &[1.0, 0.0]);
        assert_eq!(p.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn project_onto_diagonal() {
        let s = 0.5f64.sqrt();
        let p = two_atoms().project(&Direction::new(vec![s, s]).unwrap()).unwrap();
        for v in p.flat_points() {
            assert_abs_diff_eq!(*v, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn project_one_dimensional_identity() {
        let m = DiscreteMeasure::new(vec![vec![3.0], vec![-1.0]], vec![0.25, 0.75]).unwrap();
        assert_eq!(m.project(&Direction::axis(1, 0)).unwrap(), m);
    }

    #[test]
    fn project_dimension_mismatch() {
        let err = two_atoms().project(&Direction::axis(3, 0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn moments_examples() {
        let m = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap().moments();
        assert_eq!(m.mean, vec![1.0, 0.0]);
        assert_eq!(m.second_moment, 2.0);

        let m = DiscreteMeasure::new(vec![vec![3.0, 4.0]], vec![1.0]).unwrap().moments();
        assert_eq!(m.mean, vec![3.0, 4.0]);
        assert_eq!(m.second_moment, 25.0);

        let m = DiscreteMeasure::uniform(vec![vec![-1.0], vec![1.0]]).unwrap().moments();
        assert_eq!(m.mean, vec![0.0]);
        assert_eq!(m.second_moment, 1.0);
    }

    #[test]
    fn pushforward_examples() {
        let s = two_atoms();
        assert_eq!(s.pushforward(&FnMap::new(2, |x: &[f64]| x.to_vec())).unwrap(), s);

        let shifted = s
            .pushforward(&FnMap::new(2, |x: &[f64]| vec![x[0] + 1.0, x[1] - 2.0]))
            .unwrap();
        assert_eq!(shifted.flat_points(), &[2.0, -2.0, 1.0, -1.0]);

        let line = DiscreteMeasure::uniform(vec![vec![1.0], vec![-1.0]]).unwrap();
        let doubled = line.pushforward(&FnMap::new(1, |x: &[f64]| vec![2.0 * x[0]])).unwrap();
        assert_eq!(doubled.flat_points(), &[2.0, -2.0]);
        assert_eq!(doubled.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn pushforward_keeps_coincident_atoms() {
        let s = two_atoms();
        let collapsed = s.pushforward(&FnMap::new(2, |_: &[f64]| vec![0.0, 0.0])).unwrap();
        assert_eq!(collapsed.len(), 2);
    }

    #[test]
    fn weight_normalization_policy() {
        let m = DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5 + 1e-8]).unwrap();
        assert_abs_diff_eq!(m.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(vec![1.0, 1e-5]).is_err());
        assert!(Direction::normalized(vec![0.0, 0.0]).is_err());
        let d = Direction::normalized(vec![3.0, 4.0]).unwrap();
        assert_eq!(d.as_slice(), &[0.6, 0.8]);
    }

    #[test]
    fn image_single_pixel() {
        let g = IntensityGrid::new(1, 1, vec![5.0]).unwrap();
        let m = DiscreteMeasure::from_image(&g).unwrap();
        assert_eq!(m.flat_points(), &[0.0, 0.0]);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn image_column() {
        let g = IntensityGrid::new(2, 1, vec![1.0, 1.0]).unwrap();
        let m = DiscreteMeasure::from_image(&g).unwrap();
        assert_eq!(m.flat_points(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn image_drops_zero_pixels() {
        let g = IntensityGrid::new(2, 2, vec![1.0, 3.0, 0.0, 0.0]).unwrap();
        let m = DiscreteMeasure::from_image(&g).unwrap();
        assert_eq!(m.flat_points(), &[0.0, 1.0, 1.0, 1.0]);
        assert_eq!(m.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn image_all_zero_rejected() {
        let g = IntensityGrid::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(DiscreteMeasure::from_image(&g).is_err());
    }
}
