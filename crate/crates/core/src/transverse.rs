//! Ground state and low-lying spectrum of `−Δ_y + V⊥` in the confined
//! directions.
//!
//! In one transverse dimension the second-order finite-difference matrix is
//! tridiagonal, so eigenvalues come from Sturm-sequence bisection and vectors
//! from inverse iteration. In two dimensions the stencil operator is applied
//! matrix-free and the lowest eigenpairs are found by shift-invert subspace
//! iteration with conjugate-gradient solves.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::potentials::ConfinementPotential;

/// Finite-difference order of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stencil {
    Second,
    Fourth,
}

/// Uniform Dirichlet grid on `[−L, L]^d`; nodes are the interior points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseGrid {
    pub dim: usize,
    pub half_extent: f64,
    pub spacing: f64,
    pub stencil: Stencil,
}

impl TransverseGrid {
    /// Spacing is adjusted so that `2L/h` is an integer.
    pub fn new(dim: usize, half_extent: f64, spacing: f64, stencil: Stencil) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(domain(
                "dim",
                format!("transverse dimension must be 1 or 2, got {dim}"),
            ));
        }
        if !(half_extent > 0.0 && spacing > 0.0 && spacing < half_extent) {
            return Err(domain("spacing", "need 0 < spacing < half_extent"));
        }
        let cells = (2.0 * half_extent / spacing).round().max(4.0);
        Ok(Self {
            dim,
            half_extent,
            spacing: 2.0 * half_extent / cells,
            stencil,
        })
    }

    /// Defaults resolving the harmonic ground state to better than 1e-6 (1D)
    /// or 1e-5 (2D).
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => Self::new(1, 8.0, 1e-3, Stencil::Second).expect("valid"),
            _ => Self::new(2, 6.5, 0.1, Stencil::Fourth).expect("valid"),
        }
    }

    pub fn points_per_axis(&self) -> usize {
        (2.0 * self.half_extent / self.spacing).round() as usize - 1
    }

    pub fn len(&self) -> usize {
        self.points_per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.points_per_axis())
            .map(|i| -self.half_extent + (i + 1) as f64 * self.spacing)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Coordinates of node `idx` (row-major in 2D).
    pub fn node(&self, idx: usize) -> Vec<f64> {
        let n = self.points_per_axis();
        let coord = |i: usize| -self.half_extent + (i + 1) as f64 * self.spacing;
        match self.dim {
            1 => vec![coord(idx)],
            _ => vec![coord(idx / n), coord(idx % n)],
        }
    }
}

/// Lowest eigenpairs of the discretised transverse operator.
#[derive(Debug, Clone, Serialize)]
pub struct TransverseSpectrum {
    pub grid: TransverseGrid,
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub modes: Vec<Vec<f64>>,
}

/// Normalised ground state with its energy, gap and quartic integral.
#[derive(Debug, Clone, Serialize)]
pub struct TransverseMode {
    pub grid: TransverseGrid,
    #[serde(skip)]
    pub chi: Vec<f64>,
    pub energy0: f64,
    pub gap: f64,
    pub quartic: f64,
    /// `sup (V⊥ − E₀)₋` on the grid.
    pub negative_part: f64,
}

const DEGENERACY_THRESHOLD: f64 = 1e-10;
const BOUNDARY_DECAY: f64 = 1e-8;

pub fn solve_ground(
    confinement: &ConfinementPotential,
    grid: &TransverseGrid,
) -> Result<TransverseMode> {
    let spectrum = solve_spectrum(confinement, grid, 2)?;
    let gap = spectrum.energies[1] - spectrum.energies[0];
    if gap < DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate {
            gap,
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    let chi = spectrum.modes[0].clone();
    let peak = chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if chi.iter().any(|&v| v < -1e-9 * peak) {
        return Err(Error::Degenerate {
            gap,
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    let dv = grid.cell_volume();
    let quartic = chi.iter().map(|v| v.powi(4)).sum::<f64>() * dv;
    let energy0 = spectrum.energies[0];
    let negative_part =
        confinement.negative_part_bound(energy0, (0..grid.len()).map(|i| grid.node(i)));
    Ok(TransverseMode {
        grid: *grid,
        chi,
        energy0,
        gap,
        quartic,
        negative_part,
    })
}

/// The `count` lowest eigenpairs, each vector normalised on the grid and
/// signed positive at its largest-magnitude sample.
pub fn solve_spectrum(
    confinement: &ConfinementPotential,
    grid: &TransverseGrid,
    count: usize,
) -> Result<TransverseSpectrum> {
    if confinement.dim() != grid.dim {
        return Err(domain("dim", "confinement and grid dimensions differ"));
    }
    if count == 0 || count >= grid.len() {
        return Err(domain("count", format!("need 1 <= count < {}", grid.len())));
    }
    let potential: Vec<f64> = (0..grid.len())
        .map(|i| confinement.eval(&grid.node(i)))
        .collect();
    let (energies, mut modes) = match (grid.dim, grid.stencil) {
        (1, Stencil::Second) => tridiagonal_lowest(grid, &potential, count),
        _ => {
            let op = StencilOperator::new(*grid, potential);
            subspace_lowest(&op, count, confinement.lower_bound() - 1.0)?
        }
    };
    let dv = grid.cell_volume();
    for v in modes.iter_mut() {
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * dv).sqrt();
        let peak = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let s = peak.signum() / norm;
        v.iter_mut().for_each(|x| *x *= s);
    }
    check_boundary_decay(grid, &modes[0])?;
    Ok(TransverseSpectrum {
        grid: *grid,
        energies,
        modes,
    })
}

fn check_boundary_decay(grid: &TransverseGrid, chi: &[f64]) -> Result<()> {
    let n = grid.points_per_axis();
    let peak = chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = match grid.dim {
        1 => chi[0].abs().max(chi[n - 1].abs()),
        _ => (0..n)
            .flat_map(|i| [chi[i], chi[(n - 1) * n + i], chi[i * n], chi[i * n + n - 1]])
            .fold(0.0f64, |m, v| m.max(v.abs())),
    };
    if edge > BOUNDARY_DECAY * peak {
        return Err(Error::Resolution(format!(
            "ground state is {:.1e} of its peak at the grid edge; enlarge half_extent beyond {}",
            edge / peak,
            grid.half_extent
        )));
    }
    Ok(())
}

/// Rayleigh quotient of `v` for the discretised operator.
pub fn rayleigh_quotient(
    confinement: &ConfinementPotential,
    grid: &TransverseGrid,
    v: &[f64],
) -> f64 {
    let potential: Vec<f64> = (0..grid.len())
        .map(|i| confinement.eval(&grid.node(i)))
        .collect();
    let op = StencilOperator::new(*grid, potential);
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    dot(v, &av) / dot(v, v)
}

/// `χ^ε(y) = ε^{-d/2} χ(y/ε)` sampled on the grid scaled by `ε`.
#[derive(Debug, Clone)]
pub struct RescaledMode {
    pub grid: TransverseGrid,
    pub chi: Vec<f64>,
    pub epsilon: f64,
}

impl RescaledMode {
    pub fn norm(&self) -> f64 {
        (self.chi.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn quartic(&self) -> f64 {
        self.chi.iter().map(|v| v.powi(4)).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        interpolate(&self.grid, &self.chi, y)
    }
}

pub fn rescale_samples(grid: &TransverseGrid, chi: &[f64], epsilon: f64) -> Result<RescaledMode> {
    if !(epsilon > 0.0) {
        return Err(domain(
            "epsilon",
            format!("need epsilon > 0, got {epsilon}"),
        ));
    }
    let factor = epsilon.powf(-(grid.dim as f64) / 2.0);
    let scaled_grid = TransverseGrid {
        half_extent: grid.half_extent * epsilon,
        spacing: grid.spacing * epsilon,
        ..*grid
    };
    Ok(RescaledMode {
        grid: scaled_grid,
        chi: chi.iter().map(|v| v * factor).collect(),
        epsilon,
    })
}

pub fn rescale(mode: &TransverseMode, epsilon: f64) -> Result<RescaledMode> {
    rescale_samples(&mode.grid, &mode.chi, epsilon)
}

/// `‖q^χ ψ‖ ≤ 𝔢(t) ε`.
pub fn excited_fraction_bound(epsilon: f64, envelope_value: f64) -> f64 {
    envelope_value * epsilon
}

/// Cubic (Catmull–Rom) interpolation of grid samples; zero outside the box.
pub fn interpolate(grid: &TransverseGrid, values: &[f64], y: &[f64]) -> f64 {
    let n = grid.points_per_axis();
    let sample = |i: isize, j: isize| -> f64 {
        let inside = |k: isize| k >= 0 && (k as usize) < n;
        if grid.dim == 1 {
            if inside(i) {
                values[i as usize]
            } else {
                0.0
            }
        } else if inside(i) && inside(j) {
            values[i as usize * n + j as usize]
        } else {
            0.0
        }
    };
    // node k sits at −L + (k+1)h
    let locate = |c: f64| -> Option<(isize, f64)> {
        let s = (c + grid.half_extent) / grid.spacing - 1.0;
        if s < -1.0 || s > n as f64 {
            return None;
        }
        let i = s.floor();
        Some((i as isize, s - i))
    };
    let weights = |t: f64| -> [f64; 4] {
        let t2 = t * t;
        let t3 = t2 * t;
        [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ]
    };
    match grid.dim {
        1 => match locate(y[0]) {
            None => 0.0,
            Some((i, t)) => {
                let w = weights(t);
                (0..4).map(|k| w[k] * sample(i - 1 + k as isize, 0)).sum()
            }
        },
        _ => match (locate(y[0]), locate(y[1])) {
            (Some((i, s)), Some((j, t))) => {
                let wi = weights(s);
                let wj = weights(t);
                let mut acc = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        acc += wi[a] * wj[b] * sample(i - 1 + a as isize, j - 1 + b as isize);
                    }
                }
                acc
            }
            _ => 0.0,
        },
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `−Δ_h + V` on the interior nodes with zero Dirichlet data.
struct StencilOperator {
    grid: TransverseGrid,
    potential: Vec<f64>,
    n: usize,
}

impl StencilOperator {
    fn new(grid: TransverseGrid, potential: Vec<f64>) -> Self {
        let n = grid.points_per_axis();
        Self { grid, potential, n }
    }

    fn coefficients(&self) -> &'static [f64] {
        match self.grid.stencil {
            Stencil::Second => &[2.0, -1.0],
            Stencil::Fourth => &[2.5, -4.0 / 3.0, 1.0 / 12.0],
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n as isize;
        let inv_h2 = 1.0 / (self.grid.spacing * self.grid.spacing);
        let c = self.coefficients();
        match self.grid.dim {
            1 => {
                for i in 0..n {
                    let mut acc = c[0] * x[i as usize];
                    for (k, ck) in c.iter().enumerate().skip(1) {
                        let k = k as isize;
                        if i - k >= 0 {
                            acc += ck * x[(i - k) as usize];
                        }
                        if i + k < n {
                            acc += ck * x[(i + k) as usize];
                        }
                    }
                    out[i as usize] = acc * inv_h2 + self.potential[i as usize] * x[i as usize];
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        let idx = (i * n + j) as usize;
                        let mut acc = 2.0 * c[0] * x[idx];
                        for (k, ck) in c.iter().enumerate().skip(1) {
                            let k = k as isize;
                            if i - k >= 0 {
                                acc += ck * x[((i - k) * n + j) as usize];
                            }
                            if i + k < n {
                                acc += ck * x[((i + k) * n + j) as usize];
                            }
                            if j - k >= 0 {
                                acc += ck * x[(i * n + j - k) as usize];
                            }
                            if j + k < n {
                                acc += ck * x[(i * n + j + k) as usize];
                            }
                        }
                        out[idx] = acc * inv_h2 + self.potential[idx] * x[idx];
                    }
                }
            }
        }
    }

    /// Solves `(A − σ) x = b` by conjugate gradients from the initial `x`.
    fn solve_shifted(&self, sigma: f64, b: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        let len = b.len();
        let mut ax = vec![0.0; len];
        self.apply(x, &mut ax);
        let mut r: Vec<f64> = (0..len).map(|i| b[i] - ax[i] + sigma * x[i]).collect();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let target = tol * tol * dot(b, b);
        let mut ap = vec![0.0; len];
        for it in 0..20 * len.max(100) {
            if rr <= target {
                return Ok(it);
            }
            self.apply(&p, &mut ap);
            for i in 0..len {
                ap[i] -= sigma * p[i];
            }
            let alpha = rr / dot(&p, &ap);
            for i in 0..len {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..len {
                p[i] = r[i] + beta * p[i];
            }
        }
        Err(Error::Tolerance(
            "conjugate gradients did not converge".into(),
        ))
    }
}

/// Shift-invert subspace iteration with Rayleigh–Ritz; `sigma` must lie
/// below the spectrum so that every solve is positive definite.
fn subspace_lowest(
    op: &StencilOperator,
    count: usize,
    sigma: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let len = op.potential.len();
    let block = (count + 4).min(len);
    // smooth, linearly independent start: low-order polynomials times a bump
    let nodes: Vec<Vec<f64>> = (0..len).map(|i| op.grid.node(i)).collect();
    let scale = op.grid.half_extent;
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|k| {
            nodes
                .iter()
                .map(|y| {
                    let r2: f64 = y.iter().map(|v| v * v).sum::<f64>() / (scale * scale);
                    let bump = (-8.0 * r2).exp();
                    let a = y[0] / scale;
                    let b = if y.len() > 1 { y[1] / scale } else { 0.0 };
                    let (px, py) = (k % 3, k / 3);
                    bump * a.powi(px as i32) * b.powi(py as i32)
                        + 1e-3 * ((k + 1) as f64 * (a + 0.37 * b)).sin()
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut basis);
    let mut values = vec![0.0; block];
    let mut ritz = vec![0.0; count];
    for iteration in 0..500 {
        // B X with warm starts x/(θ − σ)
        let mut next = Vec::with_capacity(block);
        for (k, v) in basis.iter().enumerate() {
            let guess = if iteration == 0 {
                0.0
            } else {
                1.0 / (values[k] - sigma)
            };
            let mut x: Vec<f64> = v.iter().map(|a| a * guess).collect();
            op.solve_shifted(sigma, v, &mut x, 1e-13)?;
            next.push(x);
        }
        orthonormalize(&mut next);
        // Rayleigh–Ritz with A
        let applied: Vec<Vec<f64>> = next
            .iter()
            .map(|v| {
                let mut av = vec![0.0; len];
                op.apply(v, &mut av);
                av
            })
            .collect();
        let small = DMatrix::from_fn(block, block, |i, j| {
            0.5 * (dot(&next[i], &applied[j]) + dot(&next[j], &applied[i]))
        });
        let eig = SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut rotated = vec![vec![0.0; len]; block];
        let mut rotated_applied = vec![vec![0.0; len]; block];
        for (slot, &col) in order.iter().enumerate() {
            for k in 0..block {
                let c = eig.eigenvectors[(k, col)];
                for i in 0..len {
                    rotated[slot][i] += c * next[k][i];
                    rotated_applied[slot][i] += c * applied[k][i];
                }
            }
            values[slot] = eig.eigenvalues[col];
        }
        let mut worst: f64 = 0.0;
        for k in 0..count {
            let res: f64 = rotated_applied[k]
                .iter()
                .zip(&rotated[k])
                .map(|(a, v)| (a - values[k] * v).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res / values[k].abs().max(1.0));
        }
        let settled =
            (0..count).all(|k| (values[k] - ritz[k]).abs() <= 1e-13 * values[k].abs().max(1.0));
        ritz.copy_from_slice(&values[..count]);
        basis = rotated;
        if worst < 1e-9 || (settled && worst < 1e-7) {
            basis.truncate(count);
            return Ok((ritz, basis));
        }
    }
    Err(Error::Tolerance(
        "subspace iteration did not converge".into(),
    ))
}

fn orthonormalize(vs: &mut [Vec<f64>]) {
    for pass in 0..2 {
        for i in 0..vs.len() {
            for j in 0..i {
                let (head, tail) = vs.split_at_mut(i);
                let c = dot(&tail[0], &head[j]);
                tail[0]
                    .iter_mut()
                    .zip(&head[j])
                    .for_each(|(a, b)| *a -= c * b);
            }
            let norm = dot(&vs[i], &vs[i]).sqrt();
            let _ = pass;
            vs[i].iter_mut().for_each(|a| *a /= norm);
        }
    }
}

/// Lowest eigenpairs of the tridiagonal second-order matrix.
fn tridiagonal_lowest(
    grid: &TransverseGrid,
    potential: &[f64],
    count: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let inv_h2 = 1.0 / (grid.spacing * grid.spacing);
    let diag: Vec<f64> = potential.iter().map(|v| 2.0 * inv_h2 + v).collect();
    let off = -inv_h2;
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * inv_h2;
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * inv_h2;
    let mut energies = Vec::with_capacity(count);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for k in 0..count {
        let lambda = bisect_eigenvalue(&diag, off, k, lo, hi);
        let mut v = inverse_iteration(&diag, off, lambda);
        for prev in &vectors {
            let c = dot(&v, prev);
            v.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        energies.push(lambda);
        vectors.push(v);
    }
    (energies, vectors)
}

/// Number of eigenvalues below `x` (Sturm sequence).
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let off2 = off * off;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(diag: &[f64], off: f64, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse iteration for the eigenvector at `lambda`, using a tridiagonal
/// LU factorisation with partial pivoting.
fn inverse_iteration(diag: &[f64], off: f64, lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let shifted: Vec<f64> = diag.iter().map(|d| d - lambda).collect();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64) * 0.618).sin())
        .collect();
    for _ in 0..3 {
        v = solve_tridiagonal_pivoted(&shifted, off, &v);
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
    }
    v
}

fn solve_tridiagonal_pivoted(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // rows hold (main, upper1, upper2) after elimination
    let mut d = diag.to_vec();
    let mut du = vec![off; n];
    let mut du2 = vec![0.0; n];
    let mut dl = vec![off; n];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON
        * diag
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(off.abs());
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            // swap rows i and i+1
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        if i + 1 < n {
            acc -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= du2[i] * x[i + 2];
        }
        x[i] = acc / d[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn harmonic(dim: usize) -> ConfinementPotential {
        ConfinementPotential::harmonic(dim)
    }

    #[test]
    fn harmonic_1d_analytic() {
        let mode = solve_ground(&harmonic(1), &TransverseGrid::default_for(1)).unwrap();
        assert!((mode.energy0 - 1.0).abs() < 1e-6, "{}", mode.energy0);
        assert!((mode.gap - 2.0).abs() < 1e-6, "{}", mode.gap);
        assert!(
            (mode.quartic - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-6,
            "{}",
            mode.quartic
        );
        let norm: f64 = mode.chi.iter().map(|v| v * v).sum::<f64>() * mode.grid.cell_volume();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(mode.chi.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn rayleigh_quotient_matches_energy() {
        let grid = TransverseGrid::new(1, 8.0, 0.01, Stencil::Second).unwrap();
        let mode = solve_ground(&harmonic(1), &grid).unwrap();
        let rq = rayleigh_quotient(&harmonic(1), &grid, &mode.chi);
        assert!((rq - mode.energy0).abs() < 1e-10);
    }

    #[test]
    fn second_order_convergence() {
        let err = |h: f64| {
            let grid = TransverseGrid::new(1, 8.0, h, Stencil::Second).unwrap();
            (solve_ground(&harmonic(1), &grid).unwrap().energy0 - 1.0).abs()
        };
        let ratio = err(0.04) / err(0.02);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn fourth_order_stencil_in_1d() {
        let err = |h: f64| {
            let grid = TransverseGrid::new(1, 8.0, h, Stencil::Fourth).unwrap();
            (solve_ground(&harmonic(1), &grid).unwrap().energy0 - 1.0).abs()
        };
        let ratio = err(0.2) / err(0.1);
        assert!((ratio - 16.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn constant_shift_moves_energy_only() {
        let grid = TransverseGrid::new(1, 8.0, 0.01, Stencil::Second).unwrap();
        let a = solve_ground(&harmonic(1), &grid).unwrap();
        let b = solve_ground(
            &ConfinementPotential::Harmonic {
                dim: 1,
                shift: 0.75,
            },
            &grid,
        )
        .unwrap();
        assert!((b.energy0 - a.energy0 - 0.75).abs() < 1e-10);
        let diff = a
            .chi
            .iter()
            .zip(&b.chi)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn small_box_is_a_resolution_error() {
        let grid = TransverseGrid::new(1, 3.0, 0.01, Stencil::Second).unwrap();
        assert!(matches!(
            solve_ground(&harmonic(1), &grid),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn harmonic_2d_small_grid() {
        let grid = TransverseGrid::new(2, 6.5, 0.2, Stencil::Fourth).unwrap();
        let mode = solve_ground(&harmonic(2), &grid).unwrap();
        assert!((mode.energy0 - 2.0).abs() < 2e-3, "{}", mode.energy0);
        assert!((mode.gap - 2.0).abs() < 5e-3, "{}", mode.gap);
        assert!(
            (mode.quartic - 1.0 / (2.0 * PI)).abs() < 1e-3,
            "{}",
            mode.quartic
        );
    }

    #[test]
    fn spectrum_1d_matches_oscillator_ladder() {
        let grid = TransverseGrid::new(1, 8.0, 0.005, Stencil::Second).unwrap();
        let s = solve_spectrum(&harmonic(1), &grid, 4).unwrap();
        for (k, e) in s.energies.iter().enumerate() {
            assert!((e - (2 * k + 1) as f64).abs() < 1e-4, "{k}: {e}");
        }
        for i in 0..4 {
            for j in 0..4 {
                let o: f64 = dot(&s.modes[i], &s.modes[j]) * grid.cell_volume();
                assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rescale_preserves_norm_and_scales_quartic() {
        let mode = solve_ground(
            &harmonic(1),
            &TransverseGrid::new(1, 8.0, 0.01, Stencil::Second).unwrap(),
        )
        .unwrap();
        let r = rescale(&mode, 0.25).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-10);
        assert!((r.quartic() / mode.quartic - 4.0).abs() < 1e-10);
        let same = rescale(&mode, 1.0).unwrap();
        assert_eq!(same.chi, mode.chi);
        let grid2 = TransverseGrid::new(2, 6.5, 0.25, Stencil::Fourth).unwrap();
        let m2 = solve_ground(&harmonic(2), &grid2).unwrap();
        let r2 = rescale(&m2, 0.1).unwrap();
        assert!((r2.quartic() / m2.quartic - 100.0).abs() < 1e-8);
        assert!((r2.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interpolation_reproduces_gaussian() {
        let grid = TransverseGrid::new(1, 8.0, 0.01, Stencil::Second).unwrap();
        let vals: Vec<f64> = grid.axis().iter().map(|y| (-y * y / 2.0).exp()).collect();
        for y in [-1.2345, 0.0, 0.0049, 2.5] {
            assert!((interpolate(&grid, &vals, &[y]) - (-y * y / 2.0f64).exp()).abs() < 1e-8);
        }
        assert_eq!(interpolate(&grid, &vals, &[9.0]), 0.0);
    }

    #[test]
    fn excited_bound_is_product() {
        assert!((excited_fraction_bound(0.1, 2.0) - 0.2).abs() < 1e-15);
    }
}
