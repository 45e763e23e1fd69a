//! Slicing directions and Haar-distributed orthogonal matrices.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`. Independent substreams are obtained with [`stream_rng`],
//! which selects a ChaCha stream id `(domain << 32) | index` on top of the
//! seed, so every consumer of a run-level seed draws from its own stream.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measure::{dot, norm_sq, Direction};

/// Run-level seed.
pub type RngSeed = u64;

/// Stream domains used by the library.
pub mod domain {
    pub const ITERATE: u64 = 1;
    pub const HAAR_REPLICATE: u64 = 2;
    pub const SW2_DIRECTIONS: u64 = 3;
    pub const MAKE_ORTHO: u64 = 4;
}

/// `validate_orthogonal` accepts `‖MᵀM − I‖_F` below this.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

/// ChaCha8 generator for substream `index` of `domain` under `seed`.
pub fn stream_rng(seed: RngSeed, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 32) | (index & 0xffff_ffff));
    rng
}

/// n×n orthogonal matrix `P = [θ₁, …, θₙ]`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMatrix {
    n: usize,
    data: Vec<f64>,
}

impl OrthoMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        OrthoMatrix { n, data }
    }

    /// 2-D matrix `[[cos t, sin t], [-sin t, cos t]]`.
    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        // columns: (c, -s), (s, c)
        OrthoMatrix {
            n: 2,
            data: vec![c, -s, s, c],
        }
    }

    /// Validates a row-major matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("orthogonal matrix must be square and non-empty".into()));
        }
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                data[j * n + i] = *v;
            }
        }
        validate_orthogonal(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Column θᵢ.
    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn direction(&self, i: usize) -> Direction {
        Direction::normalized(self.column(i).to_vec()).expect("orthogonal columns are nonzero")
    }

    /// Entry at row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Column-major entries.
    pub fn as_column_major(&self) -> &[f64] {
        &self.data
    }

    /// `Pᵗx`, the coordinates of x along each column.
    pub fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        self.columns().map(|c| dot(c, x)).collect()
    }

    /// `Py`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (c, yi) in self.columns().zip(y) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += yi * ci;
            }
        }
        out
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &OrthoMatrix) -> Result<OrthoMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let data = other.columns().flat_map(|c| self.apply(c)).collect();
        Ok(OrthoMatrix { n: self.n, data })
    }

    /// `‖P − Q‖_F`.
    pub fn frobenius_distance(&self, other: &OrthoMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖PᵗP − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        gram_error(self.n, &self.data)
    }
}

fn gram_error(n: usize, col_major: &[f64]) -> f64 {
    let mut err = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = dot(&col_major[i * n..(i + 1) * n], &col_major[j * n..(j + 1) * n]);
            let e = g - if i == j { 1.0 } else { 0.0 };
            err += e * e;
        }
    }
    err.sqrt()
}

/// Accepts a column-major n×n matrix if `‖MᵀM − I‖_F < 1e-8`.
pub fn validate_orthogonal(n: usize, col_major: Vec<f64>) -> Result<OrthoMatrix> {
    if n == 0 || col_major.len() != n * n {
        return Err(Error::InvalidArgument(format!(
            "{} entries do not form a square matrix of order {n}",
            col_major.len()
        )));
    }
    let err = gram_error(n, &col_major);
    if err.is_nan() || err >= ORTHOGONALITY_TOLERANCE {
        return Err(Error::NotOrthogonal(err));
    }
    Ok(OrthoMatrix { n, data: col_major })
}

/// Uniform direction on S^{n-1}: a standard normal vector, normalized.
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Direction {
    assert!(n >= 1, "direction dimension must be positive");
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm_sq(&v).sqrt();
        if norm > 0.0 && norm.is_finite() {
            return Direction::normalized(v).expect("nonzero vector");
        }
    }
}

/// Haar-distributed orthogonal matrix via Householder QR of a Gaussian matrix.
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OrthoMatrix {
    assert!(n >= 1, "matrix order must be positive");
    loop {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        if let Some((q, _)) = haar_qr(g) {
            return q;
        }
    }
}

/// QR with the sign of each `R` diagonal entry folded into `Q`, so that the
/// returned `R` has a strictly positive diagonal. `None` for singular input.
pub(crate) fn haar_qr(g: DMatrix<f64>) -> Option<(OrthoMatrix, DMatrix<f64>)> {
    let n = g.nrows();
    let qr = g.qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..n {
        let d = r[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        if d < 0.0 {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    Some((
        OrthoMatrix {
            n,
            data: q.as_slice().to_vec(),
        },
        r,
    ))
}

impl serde::Serialize for OrthoMatrix {
    /// Serialized as a list of rows.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}
