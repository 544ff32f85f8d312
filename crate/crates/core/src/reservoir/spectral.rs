use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::SparseMatrix;
use crate::Matrix;

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_MATVECS: usize = 10_000;
/// Matrices up to this size always fall back to the dense solver when power
/// iteration stalls; larger ones do too, but it is noticeably slower.
pub const DENSE_FALLBACK_LIMIT: usize = 512;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Magnitude of the dominant eigenvalue by power iteration.
///
/// Real matrices may have a complex-conjugate dominant pair, in which case
/// the plain Rayleigh quotient never settles. Each iteration therefore also
/// fits the two-term recurrence `A^2 v = a A v + b v` on the iterate's Krylov
/// pair and reads `|lambda|` off the roots of `l^2 - a l - b`. Returns
/// `None` if neither fit reaches the residual tolerance within `max_matvecs`.
pub fn power_iteration(a: &SparseMatrix, tol: f64, max_matvecs: usize) -> Option<f64> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut resid = vec![0.0; n];

    let mut matvecs = 0;
    while matvecs + 2 <= max_matvecs {
        a.mul_vec(&v, &mut w1);
        let n1 = norm(&w1);
        if n1 == 0.0 {
            return Some(0.0);
        }
        a.mul_vec(&w1, &mut w2);
        matvecs += 2;
        let n2 = norm(&w2);
        if n2 == 0.0 {
            return Some(0.0);
        }

        // Single real dominant eigenvalue: w1 ~ lambda v.
        let lambda = dot(&v, &w1);
        for i in 0..n {
            resid[i] = w1[i] - lambda * v[i];
        }
        if norm(&resid) <= tol * n1 {
            return Some(lambda.abs());
        }

        // Dominant pair: w2 ~ c1 w1 + c0 v.
        let (g11, g10, g00) = (dot(&w1, &w1), dot(&w1, &v), 1.0);
        let (r1, r0) = (dot(&w1, &w2), dot(&v, &w2));
        let det = g11 * g00 - g10 * g10;
        if det > 1e-300 {
            let c1 = (r1 * g00 - g10 * r0) / det;
            let c0 = (g11 * r0 - g10 * r1) / det;
            for i in 0..n {
                resid[i] = w2[i] - c1 * w1[i] - c0 * v[i];
            }
            if norm(&resid) <= tol * n2 {
                let disc = c1 * c1 + 4.0 * c0;
                let radius = if disc < 0.0 {
                    (-c0).sqrt()
                } else {
                    let s = disc.sqrt();
                    ((c1 + s) * 0.5).abs().max(((c1 - s) * 0.5).abs())
                };
                return Some(radius);
            }
        }

        for (vi, wi) in v.iter_mut().zip(&w2) {
            *vi = wi / n2;
        }
    }
    None
}

/// Spectral radius from the complex eigenvalues of a dense matrix.
pub fn dense_spectral_radius(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Power iteration with a dense eigensolver fallback.
pub fn spectral_radius(a: &SparseMatrix) -> f64 {
    if a.nnz() == 0 {
        return 0.0;
    }
    match power_iteration(a, POWER_TOLERANCE, POWER_MAX_MATVECS) {
        Some(r) => r,
        None => dense_spectral_radius(&a.to_dense()),
    }
}
