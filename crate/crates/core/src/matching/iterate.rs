use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distances::w2_exact;
use crate::error::{Error, Result};
use crate::measure::{Direction, DiscreteMeasure};
use crate::slicing::{domain, sample_direction, sample_haar_orthogonal, stream_rng, OrthoMatrix, RngSeed};

use super::maps::{directional_w2_sq, matrix_slice_map, single_slice_map, sliced_residual};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// γ_k = γ.
    Constant(f64),
    /// γ_k = c / (k + 1).
    Harmonic(f64),
}

/// Step sizes γ_k and the iteration budget K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub rule: StepRule,
    pub max_iter: usize,
}

impl StepSchedule {
    pub fn new(rule: StepRule, max_iter: usize) -> Result<Self> {
        let g0 = match rule {
            StepRule::Constant(g) | StepRule::Harmonic(g) => g,
        };
        if !(g0 > 0.0 && g0 <= 1.0) {
            return Err(Error::InvalidArgument(format!("step size {g0} outside (0, 1]")));
        }
        Ok(StepSchedule { rule, max_iter })
    }

    pub fn gamma(&self, k: usize) -> f64 {
        match self.rule {
            StepRule::Constant(g) => g,
            StepRule::Harmonic(c) => c / (k as f64 + 1.0),
        }
    }
}

impl FromStr for StepRule {
    type Err = Error;

    /// Parses `const:γ` or `harmonic:c`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("schedule `{s}` is not of the form kind:value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad step size in schedule `{s}`")))?;
        let rule = match kind.trim() {
            "const" | "constant" => StepRule::Constant(value),
            "harmonic" => StepRule::Harmonic(value),
            other => return Err(Error::Parse(format!("unknown schedule kind `{other}`"))),
        };
        StepSchedule::new(rule, 0)?;
        Ok(rule)
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Constant(g) => write!(f, "const:{g}"),
            StepRule::Harmonic(c) => write!(f, "harmonic:{c}"),
        }
    }
}

/// How slicing directions are drawn at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Fresh Haar matrix P_k, matrix-slice step.
    HaarMatrix,
    /// Fresh uniform direction θ_k, single-slice step.
    UniformDirection,
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" | "haar" | "haar_matrix" => Ok(Sampler::HaarMatrix),
            "direction" | "single" | "uniform_direction" => Ok(Sampler::UniformDirection),
            other => Err(Error::Parse(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    /// Stop once the sliced residual of the current iterate drops below this.
    pub tolerance: f64,
    /// Record the exact `W₂(σ_k, μ)` when the instance supports it.
    pub record_w2_exact: bool,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions {
            tolerance: 1e-10,
            record_w2_exact: false,
        }
    }
}

/// Diagnostics for iterate σ_k, measured along the directions drawn for step k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub gamma: f64,
    pub sliced_residual: f64,
    pub mean: Vec<f64>,
    pub m2: f64,
    pub w2_exact: Option<f64>,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<IterationRecord>>>()?;
        Ok(IterationTrace { records })
    }
}

enum StepDirections {
    Matrix(OrthoMatrix),
    Single(Direction),
}

/// Runs `σ_{k+1} = ((1−γ_k) id + γ_k T_k)♯σ_k` with fresh directions per step.
///
/// Step k draws from `stream_rng(seed, ITERATE, k)`. The trace records σ_0, …,
/// σ_K (or up to early stop) and the final iterate is returned alongside it.
pub fn iterate(
    initial: &DiscreteMeasure,
    target: &DiscreteMeasure,
    schedule: &StepSchedule,
    sampler: Sampler,
    seed: RngSeed,
    options: &IterateOptions,
) -> Result<(IterationTrace, DiscreteMeasure)> {
    initial.check_dim(target.dim())?;
    let n = initial.dim();
    let mut current = initial.clone();
    let mut trace = IterationTrace::default();

    for k in 0..=schedule.max_iter {
        let mut rng = stream_rng(seed, domain::ITERATE, k as u64);
        let dirs = match sampler {
            Sampler::HaarMatrix => StepDirections::Matrix(sample_haar_orthogonal(&mut rng, n)),
            Sampler::UniformDirection => StepDirections::Single(sample_direction(&mut rng, n)),
        };
        let residual = match &dirs {
            StepDirections::Matrix(p) => sliced_residual(&current, target, p)?,
            StepDirections::Single(theta) => directional_w2_sq(&current, target, theta.as_slice()),
        };
        let gamma = schedule.gamma(k);
        let moments = current.moments();
        let w2 = if options.record_w2_exact {
            w2_exact(&current, target).ok()
        } else {
            None
        };
        trace.records.push(IterationRecord {
            k,
            gamma,
            sliced_residual: residual,
            mean: moments.mean,
            m2: moments.second_moment,
            w2_exact: w2,
            seed,
        });
        if residual < options.tolerance || k == schedule.max_iter {
            break;
        }

        let mut next = Vec::with_capacity(current.flat_points().len());
        match &dirs {
            StepDirections::Matrix(p) => {
                let t = matrix_slice_map(&current, target, p)?;
                for x in current.points() {
                    blend(&mut next, x, &t.eval(x), gamma);
                }
            }
            StepDirections::Single(theta) => {
                let t = single_slice_map(&current, target, theta)?;
                for x in current.points() {
                    blend(&mut next, x, &t.eval(x), gamma);
                }
            }
        }
        current = current.with_points(next);
    }
    Ok((trace, current))
}

fn blend(out: &mut Vec<f64>, x: &[f64], tx: &[f64], gamma: f64) {
    if gamma == 1.0 {
        out.extend_from_slice(tx);
    } else {
        out.extend(x.iter().zip(tx).map(|(a, b)| (1.0 - gamma) * a + gamma * b));
    }
}
