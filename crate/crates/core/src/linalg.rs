//! Small dense symmetric-matrix helpers: cyclic Jacobi eigendecomposition
//! and the inverse square root built from it. Only used for modest sizes
//! (spectra of quadratic forms, torus metrics up to a few hundred).

/// Eigenvalues and eigenvectors of a symmetric matrix, via cyclic Jacobi
/// rotations. `a` is row-major `n x n`; symmetry is the caller's contract.
///
/// Returns `(eigenvalues, eigenvectors)` where column `j` of the returned
/// row-major eigenvector matrix corresponds to `eigenvalues[j]`. Converges
/// when the off-diagonal Frobenius mass falls below `1e-14` times the
/// matrix scale.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    (eigenvalues, v)
}

/// B^{-1/2} for a symmetric positive definite `b` (row-major).
///
/// Returns `None` when an eigenvalue is not strictly positive (relative to
/// the largest one by `1e-12`).
pub fn inverse_sqrt_spd(b: &[f64], n: usize) -> Option<Vec<f64>> {
    let (eig, vecs) = jacobi_eigen(b, n);
    let max = eig.iter().cloned().fold(0.0_f64, f64::max);
    if max <= 0.0 || eig.iter().any(|&l| l <= 1e-12 * max) {
        return None;
    }
    // V diag(1/√λ) V^T
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += vecs[i * n + k] * vecs[j * n + k] / eig[k].sqrt();
            }
            out[i * n + j] = acc;
        }
    }
    Some(out)
}

pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}
