//! Lanczos approximation of `exp(−iHτ) v` for Hermitian `H`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    pub max_dim: usize,
    /// Bound on the a-posteriori error estimate, relative to `‖v‖`.
    pub tolerance: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            max_dim: 40,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrylovInfo {
    pub dim: usize,
    pub error_estimate: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−iTτ) e₁` for the symmetric tridiagonal `T` built from `alpha`, `beta`.
fn small_exponential(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let q = eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)];
                    Complex64::from_polar(q, -eig.eigenvalues[k] * tau)
                })
                .sum()
        })
        .collect()
}

/// `exp(−iHτ) v` with `H` given by its action `apply(x, y)` (`y = Hx`).
/// Lanczos with full reorthogonalisation; stops once
/// `β_m |[exp(−iTτ)]_{m,1}|` is below `tolerance`.
pub fn expm_krylov<F>(
    apply: F,
    v: &[Complex64],
    tau: f64,
    opts: &KrylovOptions,
) -> Result<(Vec<Complex64>, KrylovInfo)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    if opts.max_dim < 2 {
        return Err(domain("max_dim", "Krylov dimension must be at least 2"));
    }
    let n = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 || n == 0 {
        return Ok((
            v.to_vec(),
            KrylovInfo {
                dim: 0,
                error_estimate: 0.0,
            },
        ));
    }
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let max_dim = opts.max_dim.min(n);
    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let coeffs = small_exponential(&alpha, &beta, tau);
        let estimate = b * coeffs[m - 1].norm();
        if estimate <= opts.tolerance
            || b <= 1e-14 * (alpha.iter().fold(0.0f64, |s, x| s.max(x.abs())) + 1.0)
            || m == n
        {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (q, c) in basis.iter().zip(&coeffs) {
                let c = c * beta0;
                out.iter_mut().zip(q).for_each(|(x, y)| *x += c * y);
            }
            return Ok((
                out,
                KrylovInfo {
                    dim: m,
                    error_estimate: estimate,
                },
            ));
        }
        if m >= max_dim {
            return Err(Error::Tolerance(format!(
                "Krylov space of dimension {m} reached error estimate {estimate:e} > {:e}",
                opts.tolerance
            )));
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}
