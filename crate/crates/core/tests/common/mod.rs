//! Shared fixtures and independent oracles for integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use slicematch::{DiscreteMeasure, OrthoMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    // test fixtures use their own seeding, independent of the library streams
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000_0000)
}

pub fn gaussian_cloud(rng: &mut ChaCha8Rng, m: usize, n: usize, scale: f64) -> DiscreteMeasure {
    let pts = (0..m * n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    DiscreteMeasure::uniform_flat(n, pts).unwrap()
}

pub fn uniform_cloud(rng: &mut ChaCha8Rng, m: usize, n: usize, half_width: f64) -> DiscreteMeasure {
    let pts = (0..m * n).map(|_| rng.random_range(-half_width..half_width)).collect();
    DiscreteMeasure::uniform_flat(n, pts).unwrap()
}

/// A skewed, shifted cloud so targets differ in shape from sources.
pub fn skewed_cloud(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DiscreteMeasure {
    let pts = (0..m * n)
        .map(|i| {
            let g: f64 = rng.sample(StandardNormal);
            g * g.abs() * 0.7 + (i % n) as f64 - 0.5
        })
        .collect();
    DiscreteMeasure::uniform_flat(n, pts).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Heap's algorithm over all permutations of `0..m`.
pub fn for_each_permutation(m: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut c = vec![0; m];
    f(&perm);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `W₂²` between equal-size uniform clouds by enumerating every pairing.
pub fn brute_force_w2_sq(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let m = a.len();
    assert_eq!(m, b.len());
    assert!(m <= 9, "factorial oracle is for tiny clouds");
    let cost: Vec<f64> = a.points().flat_map(|x| b.points().map(move |y| dist_sq(x, y))).collect();
    let mut best = f64::INFINITY;
    for_each_permutation(m, |perm| {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * m + j]).sum();
        best = best.min(total);
    });
    best / m as f64
}

/// Sorted-matching `W₂²` between two equal-length uniform samples on the line.
pub fn sorted_w2_sq(x: &[f64], y: &[f64]) -> f64 {
    let (mut x, mut y) = (x.to_vec(), y.to_vec());
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64
}

pub fn projections(m: &DiscreteMeasure, theta: &[f64]) -> Vec<f64> {
    m.points().map(|x| dot(x, theta)).collect()
}

/// Sum of sorted-matching projected `W₂²` over the columns of P.
pub fn oracle_sliced_residual(a: &DiscreteMeasure, b: &DiscreteMeasure, p: &OrthoMatrix) -> f64 {
    p.columns().map(|t| sorted_w2_sq(&projections(a, t), &projections(b, t))).sum()
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Largest gap between sorted projections of two equal-size uniform clouds
/// over `dirs` random directions; zero iff the projected laws agree.
pub fn projected_quantile_gap(a: &DiscreteMeasure, b: &DiscreteMeasure, dirs: usize, seed: u64) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..dirs {
        let theta = random_unit(&mut r, a.dim());
        let (mut x, mut y) = (projections(a, &theta), projections(b, &theta));
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for (p, q) in x.iter().zip(&y) {
            worst = worst.max((p - q).abs());
        }
    }
    worst
}

/// Matrix from rows after Gram–Schmidt; an independent orthonormalization.
pub fn gram_schmidt(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for i in 0..rows.len() {
        for j in 0..i {
            let c = dot(&rows[i], &rows[j]);
            let rj = rows[j].clone();
            for (x, y) in rows[i].iter_mut().zip(&rj) {
                *x -= c * y;
            }
        }
        let norm = dot(&rows[i], &rows[i]).sqrt();
        rows[i].iter_mut().for_each(|x| *x /= norm);
    }
    rows
}

/// Rotation by `angle` in the plane spanned by orthonormal `u`, `v`, as rows.
pub fn plane_rotation(n: usize, u: &[f64], v: &[f64], angle: f64) -> Vec<Vec<f64>> {
    let (c, s) = (angle.cos(), angle.sin());
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    id + (c - 1.0) * (u[i] * u[j] + v[i] * v[j]) + s * (v[i] * u[j] - u[i] * v[j])
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}
