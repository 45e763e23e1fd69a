//! Closed-form registration of a source measure onto a target with
//! translations, isotropic scale-and-shift maps, and per-axis scalings in a
//! fixed orthonormal basis.
//!
//! With `var(σ) = M₂(σ) − ‖E(σ)‖²`, the best `S(x) = a x + b` under `W₂` is
//!
//! ```text
//! a = [½(M₂(η) + M₂(σ) − W₂²(σ,η)) − E(σ)·E(η)] / var(σ),   b = E(η) − a E(σ)
//! ```
//!
//! and under `SW₂` the same with `W₂²` replaced by `n·SW₂²`.

use serde::Serialize;

use crate::distances::{optimal_assignment, sw2, w2_sq_exact, McEstimate, DEFAULT_EXACT_CAP};
use crate::error::{Error, Result};
use crate::matching::{apply_operator, matrix_slice_map, sliced_residual};
use crate::measure::{dot, DiscreteMeasure, Moments, PointMap};
use crate::slicing::{domain, sample_haar_orthogonal, stream_rng, OrthoMatrix, RngSeed};

/// Registered scales at or below this are reported as degenerate.
const SCALE_FLOOR: f64 = 1e-12;

/// `S(x) = a x + b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleShift {
    pub a: f64,
    pub b: Vec<f64>,
}

impl ScaleShift {
    pub fn new(a: f64, b: Vec<f64>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {a} must be positive")));
        }
        Ok(ScaleShift { a, b })
    }

    pub fn translation(b: Vec<f64>) -> Self {
        ScaleShift { a: 1.0, b }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.b).map(|(xi, bi)| self.a * xi + bi).collect()
    }
}

impl PointMap for ScaleShift {
    fn input_dim(&self) -> usize {
        self.b.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.b.len(),
                found: x.len(),
            });
        }
        Ok(self.eval(x))
    }
}

/// `x ↦ P Λ Pᵗ x + b` with Λ = diag(lambda).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisScaling {
    pub basis: OrthoMatrix,
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
}

impl AxisScaling {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let coords: Vec<f64> = self
            .basis
            .transpose_apply(x)
            .into_iter()
            .zip(&self.lambda)
            .map(|(c, l)| c * l)
            .collect();
        self.basis
            .apply(&coords)
            .into_iter()
            .zip(&self.b)
            .map(|(y, bi)| y + bi)
            .collect()
    }
}

impl PointMap for AxisScaling {
    fn input_dim(&self) -> usize {
        self.b.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.b.len(),
                found: x.len(),
            });
        }
        Ok(self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    W2,
    SW2,
}

/// Direction budget and seed for `SW₂` estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sw2Config {
    pub num_directions: usize,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RegisteredMap {
    ScaleShift(ScaleShift),
    AxisScaling(AxisScaling),
}

/// Per-axis comparison against the slice-matched target `U(σ, η, P)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisDiagnostics {
    /// λ̃ᵢ registered against `U(σ, η, P)`.
    pub slice_matched_lambda: Vec<f64>,
    /// `(∫|θᵢ·(T(x) − x)|² dσ − W₂²(σ^{θᵢ}, η^{θᵢ})) / (2 var(σ^{θᵢ}))`, equal to λ̃ᵢ − λᵢ.
    pub slice_matched_gap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationReport {
    pub map: RegisteredMap,
    /// Squared distance achieved by the registered map.
    pub objective: f64,
    pub distance_kind: DistanceKind,
    /// Set when the closed form yields a non-positive scale.
    pub degenerate: bool,
    /// Standard error of the `SW₂²` estimate entering the closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sw2_sq_std_error: Option<f64>,
    /// Direction budget and seed behind every `SW₂` estimate in the report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sw2: Option<Sw2Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisDiagnostics>,
}

impl RegistrationReport {
    pub fn scale_shift(&self) -> Option<&ScaleShift> {
        match &self.map {
            RegisteredMap::ScaleShift(s) => Some(s),
            RegisteredMap::AxisScaling(_) => None,
        }
    }

    pub fn axis_scaling(&self) -> Option<&AxisScaling> {
        match &self.map {
            RegisteredMap::AxisScaling(s) => Some(s),
            RegisteredMap::ScaleShift(_) => None,
        }
    }
}

/// Best translation `x ↦ x + (E(η) − E(σ))`, identical under `W₂` and `SW₂`.
pub fn register_translation(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<ScaleShift> {
    source.check_dim(target.dim())?;
    let (ms, mt) = (source.moments(), target.moments());
    Ok(ScaleShift::translation(
        mt.mean.iter().zip(&ms.mean).map(|(t, s)| t - s).collect(),
    ))
}

fn centered_variance(m: &Moments) -> Result<f64> {
    let var = m.centered_second_moment();
    if var.is_nan() || var <= 1e-12 * m.second_moment {
        return Err(Error::Degenerate(
            "source has zero centered second moment (single atom)".into(),
        ));
    }
    Ok(var)
}

/// Closed-form scale and shift from the squared distance `d_sq` entering the formula.
fn closed_form_scale_shift(ms: &Moments, mt: &Moments, d_sq: f64) -> Result<(f64, Vec<f64>)> {
    let var = centered_variance(ms)?;
    let a = (0.5 * (mt.second_moment + ms.second_moment - d_sq) - dot(&ms.mean, &mt.mean)) / var;
    let b = mt.mean.iter().zip(&ms.mean).map(|(e, s)| e - a * s).collect();
    Ok((a, b))
}

/// Best `S(x) = a x + b` under `W₂` (exact) or `SW₂` (Monte-Carlo).
pub fn register_scale_shift(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    kind: DistanceKind,
    sw2_config: Option<&Sw2Config>,
) -> Result<RegistrationReport> {
    source.check_dim(target.dim())?;
    let (ms, mt) = (source.moments(), target.moments());
    centered_variance(&ms)?;
    let n = source.dim() as f64;

    let (d_sq, se) = match kind {
        DistanceKind::W2 => (w2_sq_exact(source, target)?, None),
        DistanceKind::SW2 => {
            let cfg = sw2_config
                .ok_or_else(|| Error::InvalidArgument("SW2 registration needs a direction budget".into()))?;
            let est = sw2(source, target, cfg.num_directions, cfg.seed)?;
            (n * est.value_sq, Some(est.value_sq_std_error))
        }
    };
    let (a, b) = closed_form_scale_shift(&ms, &mt, d_sq)?;
    let map = ScaleShift { a, b };
    let pushed = source.pushforward(&map)?;
    let objective = match kind {
        DistanceKind::W2 => w2_sq_exact(&pushed, target)?,
        DistanceKind::SW2 => {
            let cfg = sw2_config.expect("checked above");
            sw2(&pushed, target, cfg.num_directions, cfg.seed)?.value_sq
        }
    };
    Ok(RegistrationReport {
        degenerate: a <= SCALE_FLOOR,
        map: RegisteredMap::ScaleShift(map),
        objective,
        distance_kind: kind,
        sw2_sq_std_error: se,
        sw2: if kind == DistanceKind::SW2 { sw2_config.copied() } else { None },
        axis: None,
    })
}

/// Closed form and direct value of `‖S^{σ,μ,W₂} − S^{σ,U(σ,μ,P),W₂}‖_σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegistrationGap {
    /// `(W₂²(σ,μ) − Σᵢ W₂²(σ^{θᵢ},μ^{θᵢ})) / (2 √var(σ))`.
    pub closed_form: f64,
    /// Distance between the two registered maps, computed from their parameters.
    pub direct: f64,
    pub w2_sq: f64,
    pub sliced_residual: f64,
}

pub fn registration_gap(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    basis: &OrthoMatrix,
) -> Result<RegistrationGap> {
    let var = centered_variance(&source.moments())?;
    let w2_sq = w2_sq_exact(source, target)?;
    let residual = sliced_residual(source, target, basis)?;
    let closed_form = (w2_sq - residual) / (2.0 * var.sqrt());

    let to_target = register_scale_shift(source, target, DistanceKind::W2, None)?;
    let matched = apply_operator(source, target, basis)?;
    let to_matched = register_scale_shift(source, &matched, DistanceKind::W2, None)?;
    let (s, s_tilde) = (
        to_target.scale_shift().expect("scale-shift report"),
        to_matched.scale_shift().expect("scale-shift report"),
    );
    let mut acc = 0.0;
    for (x, w) in source.points().zip(source.weights()) {
        acc += w * crate::measure::dist_sq(&s.eval(x), &s_tilde.eval(x));
    }
    Ok(RegistrationGap {
        closed_form,
        direct: acc.sqrt(),
        w2_sq,
        sliced_residual: residual,
    })
}

/// Per-axis least squares for `x ↦ PΛPᵗx + b` against a transport map given
/// as the image `t[j]` of each source atom.
fn axis_least_squares(source: &DiscreteMeasure, images: &[Vec<f64>], basis: &OrthoMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let ms = source.moments();
    let mut mean_t = vec![0.0; source.dim()];
    for (y, w) in images.iter().zip(source.weights()) {
        for (m, yi) in mean_t.iter_mut().zip(y) {
            *m += w * yi;
        }
    }
    let mut lambda = Vec::with_capacity(basis.dim());
    for (i, theta) in basis.columns().enumerate() {
        let (es, et) = (dot(&ms.mean, theta), dot(&mean_t, theta));
        let mut cross = 0.0;
        let mut m2 = 0.0;
        for ((x, y), w) in source.points().zip(images).zip(source.weights()) {
            let (px, py) = (dot(x, theta), dot(y, theta));
            cross += w * px * py;
            m2 += w * px * px;
        }
        let var = m2 - es * es;
        if var.is_nan() || var <= 1e-12 * m2 {
            return Err(Error::Degenerate(format!("source has zero variance along axis {i}")));
        }
        lambda.push((cross - es * et) / var);
    }
    let scaled: Vec<f64> = basis
        .transpose_apply(&ms.mean)
        .into_iter()
        .zip(&lambda)
        .map(|(c, l)| c * l)
        .collect();
    let b = mean_t
        .iter()
        .zip(basis.apply(&scaled))
        .map(|(t, s)| t - s)
        .collect();
    Ok((lambda, b))
}

/// Best `x ↦ PΛPᵗx + b` approximating the discrete transport map from σ to η.
///
/// The transport map is the optimal assignment between the two clouds, so
/// the instance must be supported by [`crate::w2_exact`]. The objective is
/// `‖S_P − T‖²_σ`.
pub fn register_axis_scaling(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    basis: &OrthoMatrix,
) -> Result<RegistrationReport> {
    source.check_dim(target.dim())?;
    source.check_dim(basis.dim())?;
    let (assignment, _) = optimal_assignment(source, target, DEFAULT_EXACT_CAP)?;
    let images: Vec<Vec<f64>> = assignment.iter().map(|&j| target.point(j).to_vec()).collect();
    let (lambda, b) = axis_least_squares(source, &images, basis)?;
    let map = AxisScaling {
        basis: basis.clone(),
        lambda,
        b,
    };
    let mut objective = 0.0;
    for ((x, y), w) in source.points().zip(&images).zip(source.weights()) {
        objective += w * crate::measure::dist_sq(&map.eval(x), y);
    }

    let slice_map = matrix_slice_map(source, target, basis)?;
    let matched_images: Vec<Vec<f64>> = source.points().map(|x| slice_map.eval(x)).collect();
    let (slice_matched_lambda, _) = axis_least_squares(source, &matched_images, basis)?;
    let mut slice_matched_gap = Vec::with_capacity(basis.dim());
    for (theta, t) in basis.columns().zip(slice_map.components()) {
        let mut along = 0.0;
        let mut matched = 0.0;
        let mut m2 = 0.0;
        let mut mean = 0.0;
        for ((x, y), w) in source.points().zip(&images).zip(source.weights()) {
            let px = dot(x, theta);
            let d = dot(y, theta) - px;
            along += w * d * d;
            let dm = t.eval(px) - px;
            matched += w * dm * dm;
            m2 += w * px * px;
            mean += w * px;
        }
        slice_matched_gap.push((along - matched) / (2.0 * (m2 - mean * mean)));
    }

    Ok(RegistrationReport {
        degenerate: map.lambda.iter().any(|l| *l <= SCALE_FLOOR),
        map: RegisteredMap::AxisScaling(map),
        objective,
        distance_kind: DistanceKind::W2,
        sw2_sq_std_error: None,
        sw2: None,
        axis: Some(AxisDiagnostics {
            slice_matched_lambda,
            slice_matched_gap,
        }),
    })
}

/// Haar average of the `W₂` registration onto `U(σ, μ, P)` next to the `SW₂`
/// registration onto μ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaarScaleShiftComparison {
    pub replicates: usize,
    /// Mean of ã over the Haar replicates.
    pub mean_a: McEstimate,
    /// Componentwise mean of b̃.
    pub mean_b: Vec<McEstimate>,
    pub sw2_a: f64,
    pub sw2_a_std_error: f64,
    pub sw2_b: Vec<f64>,
    pub sw2_b_std_error: Vec<f64>,
    /// `a^{W₂}` registering σ directly onto μ.
    pub w2_a: f64,
    pub w2_b: Vec<f64>,
}

impl HaarScaleShiftComparison {
    /// `mean ã − a^{SW₂}` with the combined standard error.
    pub fn a_difference(&self) -> (f64, f64) {
        (
            self.mean_a.mean - self.sw2_a,
            self.mean_a.std_error.hypot(self.sw2_a_std_error),
        )
    }

    /// Componentwise `mean b̃ − b^{SW₂}` with combined standard errors.
    pub fn b_difference(&self) -> Vec<(f64, f64)> {
        self.mean_b
            .iter()
            .zip(&self.sw2_b)
            .zip(&self.sw2_b_std_error)
            .map(|((m, b), se)| (m.mean - b, m.std_error.hypot(*se)))
            .collect()
    }
}

/// Replicate r uses the Haar matrix from `stream_rng(seed, HAAR_REPLICATE, r)`.
pub fn haar_mean_scale_shift(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    replicates: usize,
    seed: RngSeed,
    sw2_config: &Sw2Config,
) -> Result<HaarScaleShiftComparison> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let n = source.dim();
    let ms = source.moments();
    let var = centered_variance(&ms)?;

    let mut a_samples = Vec::with_capacity(replicates);
    let mut b_samples = vec![Vec::with_capacity(replicates); n];
    for r in 0..replicates {
        let p = sample_haar_orthogonal(&mut stream_rng(seed, domain::HAAR_REPLICATE, r as u64), n);
        let matched = apply_operator(source, target, &p)?;
        let d_sq = w2_sq_exact(source, &matched)?;
        let (a, b) = closed_form_scale_shift(&ms, &matched.moments(), d_sq)?;
        a_samples.push(a);
        for (col, bi) in b_samples.iter_mut().zip(b) {
            col.push(bi);
        }
    }

    let sw = register_scale_shift(source, target, DistanceKind::SW2, Some(sw2_config))?;
    let sw_map = sw.scale_shift().expect("scale-shift report").clone();
    let sw2_a_std_error = n as f64 / (2.0 * var) * sw.sw2_sq_std_error.unwrap_or(0.0);
    let w2 = register_scale_shift(source, target, DistanceKind::W2, None)?;
    let w2_map = w2.scale_shift().expect("scale-shift report").clone();

    Ok(HaarScaleShiftComparison {
        replicates,
        mean_a: McEstimate::from_samples(&a_samples),
        mean_b: b_samples.iter().map(|c| McEstimate::from_samples(c)).collect(),
        sw2_a: sw_map.a,
        sw2_a_std_error,
        sw2_b_std_error: ms.mean.iter().map(|e| e.abs() * sw2_a_std_error).collect(),
        sw2_b: sw_map.b,
        w2_a: w2_map.a,
        w2_b: w2_map.b,
    })
}
