//! Two-particle reference propagation on a tensor grid in `(x₁, y₁, x₂, y₂)`
//! with one transverse dimension.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::fock::ReducedDensity;
use super::ModeBasis;
use crate::error::{domain, Error, Result};
use crate::potentials::{ConfinementPotential, ExternalPotential, ScaledInteraction};
use crate::scaling::ScalingPoint;

/// Upper bound on `n_x² n_y²`.
pub const GRID_POINT_CAP: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleScheme {
    /// Kinetic–potential–kinetic, second order.
    Strang,
    /// Triple-jump composition of Strang steps, fourth order.
    Yoshida,
}

#[derive(Debug, Clone)]
pub struct GridOracleConfig {
    pub point: ScalingPoint,
    pub confinement: ConfinementPotential,
    pub interaction: ScaledInteraction,
    pub external: ExternalPotential,
    pub box_length: f64,
    pub nx: usize,
    pub ny: usize,
    /// Half-width of the `y` box in units of `ε`.
    pub y_half_extent: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: OracleScheme,
    /// Momenta `|m| ≤ m_cut` and grid transverse levels `n < n_cut` span the
    /// subspace on which one-body densities are compared.
    pub m_cut: usize,
    pub n_cut: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridOracleResult {
    pub time: f64,
    pub steps: usize,
    pub norm: f64,
    pub energy_initial: f64,
    pub energy: f64,
    pub symmetry_residual: f64,
    /// Weight of `γ^(1)` outside the comparison subspace.
    pub tail_weight: f64,
    /// Eigenvalues of `γ^(1)` on the comparison subspace, descending.
    pub occupations: Vec<f64>,
}

/// Distance between the grid `γ^(1)` and a mode-basis `γ^(1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleComparison {
    /// Trace norm of the difference on the comparison subspace.
    pub subspace_trace_norm: f64,
    pub tail_grid: f64,
    pub tail_modes: f64,
    /// `‖PAP‖₁ + 2(√t_g + √t_m) + t_g + t_m`, an upper bound on the full
    /// trace norm.
    pub bound: f64,
}

struct FreeFactor {
    tau: f64,
    ey: DMatrix<Complex64>,
    phase_x: Vec<Complex64>,
}

pub struct GridOracle {
    pub config: GridOracleConfig,
    pub time: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    kx: Vec<f64>,
    /// Grid transverse eigenvalues and eigenvectors (columns).
    y_energies: Vec<f64>,
    y_vectors: DMatrix<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    pair_potential: Vec<f64>,
    factors: Vec<FreeFactor>,
    /// `ψ[(i₁ n_y + j₁) P + i₂ n_y + j₂]`, unit `ℓ²` norm.
    psi: Vec<Complex64>,
    steps: usize,
    energy_initial: f64,
}

/// Periodic spectral `−d²/dy²` on `n` points of a box of length `len`.
fn spectral_laplacian(n: usize, len: f64) -> DMatrix<f64> {
    let h = len / n as f64;
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let d = (j as f64 - l as f64) * h;
            let mut s = 0.0;
            for m in 0..n {
                let m = m as i64 - (n as i64 / 2 - 1);
                let k = 2.0 * PI * m as f64 / len;
                s += k * k * (k * d).cos();
            }
            out[(j, l)] = s / n as f64;
        }
    }
    out
}

fn wrap(dx: f64, len: f64) -> f64 {
    dx - len * (dx / len).round()
}

impl GridOracle {
    pub fn new(config: GridOracleConfig) -> Result<Self> {
        let c = &config;
        if c.confinement.dim() != 1 || c.interaction.transverse_dim() != 1 {
            return Err(domain(
                "dim",
                "grid oracle supports one transverse dimension only",
            ));
        }
        if c.nx < 4 || c.ny < 4 || c.nx % 2 == 1 || c.ny % 2 == 1 {
            return Err(domain("grid", "need even n_x, n_y >= 4"));
        }
        let total = (c.nx * c.ny).pow(2);
        if total > GRID_POINT_CAP {
            return Err(Error::Size {
                size: total,
                cap: GRID_POINT_CAP,
                hint: "reduce n_x or n_y".into(),
            });
        }
        if !(c.dt > 0.0) || !(c.t_final >= 0.0) || !(c.box_length > 0.0) || !(c.y_half_extent > 0.0)
        {
            return Err(domain(
                "dt",
                "need dt > 0, t_final >= 0, L > 0 and a positive y extent",
            ));
        }
        if 2 * c.m_cut + 1 > c.nx || c.n_cut == 0 || c.n_cut > c.ny {
            return Err(domain("cut", "comparison subspace exceeds the grid"));
        }
        if !c.interaction.profile.is_zero() && c.interaction.range >= 0.5 * c.box_length {
            return Err(Error::Resolution(
                "interaction range must stay below half the box length".into(),
            ));
        }
        let eps = c.point.epsilon;
        let len = c.box_length;
        let hx = len / c.nx as f64;
        let xs: Vec<f64> = (0..c.nx).map(|i| -0.5 * len + i as f64 * hx).collect();
        let kx: Vec<f64> = (0..c.nx)
            .map(|i| {
                let m = if i <= c.nx / 2 {
                    i as i64
                } else {
                    i as i64 - c.nx as i64
                };
                2.0 * PI * m as f64 / len
            })
            .collect();
        let ylen = 2.0 * c.y_half_extent * eps;
        let hy = ylen / c.ny as f64;
        let ys: Vec<f64> = (0..c.ny).map(|j| -0.5 * ylen + j as f64 * hy).collect();
        let mut a = spectral_laplacian(c.ny, ylen);
        for (j, &y) in ys.iter().enumerate() {
            a[(j, j)] += c.confinement.eval(&[y / eps]) / (eps * eps);
        }
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..c.ny).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let y_energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let y_vectors = DMatrix::from_fn(c.ny, c.ny, |r, k| eig.eigenvectors[(r, order[k])]);

        let p = c.nx * c.ny;
        let mut pair_potential = vec![0.0; p * p];
        if !c.interaction.profile.is_zero() {
            pair_potential
                .par_chunks_mut(p)
                .enumerate()
                .for_each(|(p1, row)| {
                    let (x1, y1) = (xs[p1 / c.ny], ys[p1 % c.ny]);
                    for (p2, v) in row.iter_mut().enumerate() {
                        let dx = wrap(x1 - xs[p2 / c.ny], len);
                        let dy = y1 - ys[p2 % c.ny];
                        *v = c.interaction.eval((dx * dx + dy * dy).sqrt());
                    }
                });
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(c.nx);
        let ifft = planner.plan_fft_inverse(c.nx);
        Ok(Self {
            time: 0.0,
            xs,
            ys,
            kx,
            y_energies,
            y_vectors,
            fft,
            ifft,
            pair_potential,
            factors: Vec::new(),
            psi: vec![Complex64::new(0.0, 0.0); p * p],
            steps: 0,
            energy_initial: 0.0,
            config,
        })
    }

    fn one_body_points(&self) -> usize {
        self.config.nx * self.config.ny
    }

    /// Grid transverse eigenvalues, ascending.
    pub fn transverse_energies(&self) -> &[f64] {
        &self.y_energies
    }

    /// Sets `ψ(z₁, z₂) = f(z₁, z₂)` and normalises.
    pub fn set_state(&mut self, f: impl Fn(f64, f64, f64, f64) -> Complex64 + Sync) -> Result<()> {
        let (ny, p) = (self.config.ny, self.one_body_points());
        let (xs, ys) = (&self.xs, &self.ys);
        self.psi
            .par_chunks_mut(p)
            .enumerate()
            .for_each(|(p1, row)| {
                let (x1, y1) = (xs[p1 / ny], ys[p1 % ny]);
                for (p2, v) in row.iter_mut().enumerate() {
                    *v = f(x1, y1, xs[p2 / ny], ys[p2 % ny]);
                }
            });
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("state", "initial state vanishes on the grid"));
        }
        self.psi.iter_mut().for_each(|z| *z /= norm);
        self.time = 0.0;
        self.steps = 0;
        self.energy_initial = self.energy();
        Ok(())
    }

    /// `ψ = φ ⊗ φ`.
    pub fn set_product(&mut self, phi: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<()> {
        let ny = self.config.ny;
        let samples: Vec<Complex64> = (0..self.one_body_points())
            .map(|q| phi(self.xs[q / ny], self.ys[q % ny]))
            .collect();
        self.set_samples(&samples)
    }

    /// `ψ = φ ⊗ φ` with `φ = Σ c e^{ikx} v_n(y)` over plane waves of momentum
    /// index `m` and grid transverse eigenvectors `v_n`.
    pub fn set_product_from_levels(&mut self, terms: &[(i64, usize, Complex64)]) -> Result<()> {
        let ny = self.config.ny;
        if terms.iter().any(|&(_, n, _)| n >= ny) {
            return Err(domain("terms", "transverse level beyond the grid"));
        }
        let len = self.config.box_length;
        let samples: Vec<Complex64> = (0..self.one_body_points())
            .map(|q| {
                let (x, j) = (self.xs[q / ny], q % ny);
                terms
                    .iter()
                    .map(|&(m, n, c)| {
                        c * Complex64::from_polar(
                            self.y_vectors[(j, n)],
                            2.0 * PI * m as f64 * x / len,
                        )
                    })
                    .sum()
            })
            .collect();
        self.set_samples(&samples)
    }

    fn set_samples(&mut self, samples: &[Complex64]) -> Result<()> {
        let p = self.one_body_points();
        self.psi
            .par_chunks_mut(p)
            .enumerate()
            .for_each(|(p1, row)| {
                for (p2, v) in row.iter_mut().enumerate() {
                    *v = samples[p1] * samples[p2];
                }
            });
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("state", "initial state vanishes on the grid"));
        }
        self.psi.iter_mut().for_each(|z| *z /= norm);
        self.time = 0.0;
        self.steps = 0;
        self.energy_initial = self.energy();
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖ψ − Sψ‖` for the particle exchange `S`.
    pub fn symmetry_residual(&self) -> f64 {
        let p = self.one_body_points();
        (0..p)
            .into_par_iter()
            .map(|p1| {
                (0..p)
                    .map(|p2| (self.psi[p1 * p + p2] - self.psi[p2 * p + p1]).norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    fn factor(&mut self, tau: f64) -> usize {
        if let Some(i) = self.factors.iter().position(|f| f.tau == tau) {
            return i;
        }
        let ny = self.config.ny;
        let phases = DMatrix::from_fn(ny, ny, |r, c| {
            if r == c {
                Complex64::from_polar(1.0, -tau * self.y_energies[r])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let yv = self.y_vectors.map(|v| Complex64::new(v, 0.0));
        let ey = &yv * phases * yv.transpose();
        let phase_x = self
            .kx
            .iter()
            .map(|k| Complex64::from_polar(1.0 / self.config.nx as f64, -tau * k * k))
            .collect();
        self.factors.push(FreeFactor { tau, ey, phase_x });
        self.factors.len() - 1
    }

    /// Applies the one-body operator `op` to the second particle.
    fn apply_second(&mut self, op: &(dyn Fn(&mut [Complex64], &mut Vec<Complex64>) + Sync)) {
        let p = self.one_body_points();
        self.psi.par_chunks_mut(p).for_each_init(
            || Vec::with_capacity(2 * p),
            |scratch, row| op(row, scratch),
        );
    }

    fn transpose(&mut self) {
        let p = self.one_body_points();
        for i in 0..p {
            for j in (i + 1)..p {
                self.psi.swap(i * p + j, j * p + i);
            }
        }
    }

    fn apply_both(&mut self, op: &(dyn Fn(&mut [Complex64], &mut Vec<Complex64>) + Sync)) {
        self.apply_second(op);
        self.transpose();
        self.apply_second(op);
        self.transpose();
    }

    fn free(&mut self, tau: f64) {
        let f = self.factor(tau);
        let (nx, ny) = (self.config.nx, self.config.ny);
        let ey = self.factors[f].ey.clone();
        let phase_x = self.factors[f].phase_x.clone();
        let fft = self.fft.clone();
        let ifft = self.ifft.clone();
        let op = move |v: &mut [Complex64], scratch: &mut Vec<Complex64>| {
            scratch.clear();
            scratch.resize(ny + nx, Complex64::new(0.0, 0.0));
            let (col, line) = scratch.split_at_mut(ny);
            for i in 0..nx {
                let block = &mut v[i * ny..(i + 1) * ny];
                for r in 0..ny {
                    col[r] = (0..ny).map(|c| ey[(r, c)] * block[c]).sum();
                }
                block.copy_from_slice(col);
            }
            for j in 0..ny {
                for i in 0..nx {
                    line[i] = v[i * ny + j];
                }
                fft.process(line);
                line.iter_mut().zip(&phase_x).for_each(|(z, ph)| *z *= ph);
                ifft.process(line);
                for i in 0..nx {
                    v[i * ny + j] = line[i];
                }
            }
        };
        self.apply_both(&op);
    }

    fn one_body_potential(&self, t: f64) -> Vec<f64> {
        let ny = self.config.ny;
        (0..self.one_body_points())
            .map(|q| {
                self.config
                    .external
                    .eval(t, self.xs[q / ny], &[self.ys[q % ny]])
            })
            .collect()
    }

    fn potential(&mut self, t: f64, tau: f64) {
        let p = self.one_body_points();
        let v = self.one_body_potential(t);
        let w = &self.pair_potential;
        self.psi
            .par_chunks_mut(p)
            .enumerate()
            .for_each(|(p1, row)| {
                for (p2, z) in row.iter_mut().enumerate() {
                    *z *= Complex64::from_polar(1.0, -tau * (w[p1 * p + p2] + v[p1] + v[p2]));
                }
            });
    }

    fn strang(&mut self, t: f64, dt: f64) {
        self.free(0.5 * dt);
        self.potential(t + 0.5 * dt, dt);
        self.free(0.5 * dt);
    }

    fn step(&mut self, dt: f64) {
        let t = self.time;
        match self.config.scheme {
            OracleScheme::Strang => self.strang(t, dt),
            OracleScheme::Yoshida => {
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                let w0 = 1.0 - 2.0 * w1;
                self.strang(t, w1 * dt);
                self.strang(t + w1 * dt, w0 * dt);
                self.strang(t + (w1 + w0) * dt, w1 * dt);
            }
        }
        self.time = t + dt;
        self.steps += 1;
    }

    /// Propagates to `t_final`.
    pub fn run(&mut self) -> Result<()> {
        let remaining = self.config.t_final - self.time;
        if remaining <= 0.0 {
            return Ok(());
        }
        let n = (remaining / self.config.dt).ceil().max(1.0) as usize;
        let dt = remaining / n as f64;
        for k in 0..n {
            self.step(dt);
            if self
                .psi
                .iter()
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
            {
                return Err(Error::Instability {
                    step: k + 1,
                    detail: "non-finite grid amplitude".into(),
                });
            }
        }
        Ok(())
    }

    /// Unitary change to plane waves in `x` and grid transverse eigenvectors
    /// in `y`, applied to a one-body vector.
    fn to_levels(&self, v: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let (nx, ny) = (self.config.nx, self.config.ny);
        scratch.clear();
        scratch.resize(ny + nx, Complex64::new(0.0, 0.0));
        let (col, line) = scratch.split_at_mut(ny);
        for i in 0..nx {
            let block = &mut v[i * ny..(i + 1) * ny];
            for k in 0..ny {
                col[k] = (0..ny).map(|r| block[r] * self.y_vectors[(r, k)]).sum();
            }
            block.copy_from_slice(col);
        }
        let s = 1.0 / (nx as f64).sqrt();
        for j in 0..ny {
            for i in 0..nx {
                line[i] = v[i * ny + j];
            }
            self.fft.process(line);
            for i in 0..nx {
                v[i * ny + j] = line[i] * s;
            }
        }
    }

    /// Indices `(i n_y + k)` of the comparison subspace.
    fn subspace(&self) -> Vec<usize> {
        let (nx, ny) = (self.config.nx, self.config.ny);
        let mut out = Vec::new();
        for m in -(self.config.m_cut as i64)..=(self.config.m_cut as i64) {
            let i = m.rem_euclid(nx as i64) as usize;
            for k in 0..self.config.n_cut {
                out.push(i * ny + k);
            }
        }
        out
    }

    /// `ψ` in level coordinates for both particles.
    fn levels(&self) -> Vec<Complex64> {
        let p = self.one_body_points();
        let mut out = self.psi.clone();
        let this = &*self;
        out.par_chunks_mut(p)
            .for_each_init(|| Vec::new(), |scratch, row| this.to_levels(row, scratch));
        for i in 0..p {
            for j in (i + 1)..p {
                out.swap(i * p + j, j * p + i);
            }
        }
        out.par_chunks_mut(p)
            .for_each_init(|| Vec::new(), |scratch, row| this.to_levels(row, scratch));
        out
    }

    /// `⟨ψ, H(t) ψ⟩` at the current time.
    pub fn energy(&self) -> f64 {
        let p = self.one_body_points();
        let ny = self.config.ny;
        let lv = self.levels();
        let level_energy: Vec<f64> = (0..p)
            .map(|q| self.kx[q / ny].powi(2) + self.y_energies[q % ny])
            .collect();
        let free: f64 = lv
            .par_chunks(p)
            .enumerate()
            .map(|(a, row)| {
                row.iter()
                    .enumerate()
                    .map(|(b, z)| z.norm_sqr() * (level_energy[a] + level_energy[b]))
                    .sum::<f64>()
            })
            .sum();
        let v = self.one_body_potential(self.time);
        let w = &self.pair_potential;
        let pot: f64 = self
            .psi
            .par_chunks(p)
            .enumerate()
            .map(|(p1, row)| {
                row.iter()
                    .enumerate()
                    .map(|(p2, z)| z.norm_sqr() * (w[p1 * p + p2] + v[p1] + v[p2]))
                    .sum::<f64>()
            })
            .sum();
        free + pot
    }

    /// `γ^(1)` on the comparison subspace and the weight outside it.
    pub fn gamma_on_grid(&self) -> (DMatrix<Complex64>, f64) {
        let p = self.one_body_points();
        let lv = self.levels();
        let s = self.subspace();
        let g = DMatrix::from_fn(s.len(), s.len(), |r, c| {
            let (a, b) = (&lv[s[r] * p..(s[r] + 1) * p], &lv[s[c] * p..(s[c] + 1) * p]);
            a.iter()
                .zip(b)
                .map(|(x, y)| x * y.conj())
                .sum::<Complex64>()
        });
        let tail = (1.0 - g.trace().re).max(0.0);
        (g, tail)
    }

    /// A mode function sampled on the grid (`ℓ²`-scaled), in level
    /// coordinates restricted to the comparison subspace, and its weight
    /// outside it.
    fn mode_in_subspace(&self, f: impl Fn(f64, f64) -> Complex64) -> (Vec<Complex64>, f64) {
        let ny = self.config.ny;
        let cell = (self.config.box_length / self.config.nx as f64) * (self.ys[1] - self.ys[0]);
        let mut v: Vec<Complex64> = (0..self.one_body_points())
            .map(|q| f(self.xs[q / ny], self.ys[q % ny]) * cell.sqrt())
            .collect();
        let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut scratch = Vec::new();
        self.to_levels(&mut v, &mut scratch);
        let sub: Vec<Complex64> = self.subspace().iter().map(|&i| v[i]).collect();
        let kept: f64 = sub.iter().map(|z| z.norm_sqr()).sum();
        (sub, (total - kept).max(0.0))
    }

    /// Compares with a mode-basis `γ^(1)`.
    pub fn compare(&self, modes: &ModeBasis, gamma: &ReducedDensity) -> Result<OracleComparison> {
        if gamma.order != 1 || gamma.matrix.nrows() != modes.n_modes() {
            return Err(domain(
                "gamma",
                "need a one-body density in the given mode basis",
            ));
        }
        let cols: Vec<Vec<Complex64>> = (0..modes.n_modes())
            .map(|a| self.mode_in_subspace(|x, y| modes.eval_mode(a, x, &[y])).0)
            .collect();
        let s = self.subspace().len();
        let u = DMatrix::from_fn(s, modes.n_modes(), |r, a| cols[a][r]);
        let gm = &u * &gamma.matrix * u.adjoint();
        let tail_modes = (gamma.trace().re - gm.trace().re).abs();
        let (gg, tail_grid) = self.gamma_on_grid();
        let d = trace_norm(&(gg - gm));
        Ok(OracleComparison {
            subspace_trace_norm: d,
            tail_grid,
            tail_modes,
            bound: d + 2.0 * (tail_grid.sqrt() + tail_modes.sqrt()) + tail_grid + tail_modes,
        })
    }

    pub fn result(&self) -> GridOracleResult {
        let (g, tail) = self.gamma_on_grid();
        let mut occupations: Vec<f64> =
            SymmetricEigen::new(g).eigenvalues.iter().copied().collect();
        occupations.sort_by(|a, b| b.total_cmp(a));
        GridOracleResult {
            time: self.time,
            steps: self.steps,
            norm: self.norm(),
            energy_initial: self.energy_initial,
            energy: self.energy(),
            symmetry_residual: self.symmetry_residual(),
            tail_weight: tail,
            occupations,
        }
    }
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &DMatrix<Complex64>) -> f64 {
    let h = (a + a.adjoint()).unscale(2.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum()
}

/// Runs the oracle from `φ ⊗ φ`.
pub fn grid_oracle(
    config: GridOracleConfig,
    phi: impl Fn(f64, f64) -> Complex64 + Sync,
) -> Result<(GridOracle, GridOracleResult)> {
    let mut oracle = GridOracle::new(config)?;
    oracle.set_product(phi)?;
    oracle.run()?;
    let result = oracle.result();
    Ok((oracle, result))
}
