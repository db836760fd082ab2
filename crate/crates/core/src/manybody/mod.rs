//! Truncated second-quantized dynamics of `N` bosons in the cigar trap.
//!
//! One-body modes are plane waves on a periodic box of length `L` times the
//! lowest eigenmodes of `−Δ_y + ε⁻²V⊥(y/ε)`. Mode `0` is the zero-momentum
//! transverse ground state `χ^ε/√L`.

mod fock;
mod hamiltonian;
mod krylov;
mod oracle;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::potentials::{ConfinementPotential, ExternalPotential, ScaledInteraction};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};
use crate::scaling::ScalingPoint;
use crate::transverse::{interpolate, solve_spectrum, TransverseGrid};

pub use fock::{
    reduced_density, symmetric_dimension, FockBasis, ManyBodyState, ReducedDensity,
    DEFAULT_SIZE_CAP,
};
pub use hamiltonian::{
    evolve, renormalized_energy, EvolveOptions, HamiltonianOptions, ManyBodySystem, Sample,
    SparseHamiltonian, Trajectory,
};
pub use krylov::{expm_krylov, KrylovInfo, KrylovOptions};
pub use oracle::{
    grid_oracle, trace_norm, GridOracle, GridOracleConfig, GridOracleResult, OracleComparison,
    OracleScheme, GRID_POINT_CAP,
};

/// Minimum number of transverse samples across the interaction range.
pub const MIN_POINTS_PER_RANGE: f64 = 8.0;

/// Quadrature sizes used when assembling matrix elements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisOptions {
    /// Grid for the unscaled transverse eigenproblem; `None` picks the default.
    pub transverse_grid: Option<TransverseGrid>,
    pub y_panels: usize,
    pub y_order: usize,
    pub radial_panels: usize,
    pub radial_order: usize,
    /// Trapezoid points on the circle of directions.
    pub angular_points: usize,
    /// Gauss points in the polar angle (three dimensions only).
    pub polar_order: usize,
    /// Entries below this fraction of the largest are treated as zero.
    pub zero_tolerance: f64,
}

impl BasisOptions {
    pub fn for_dim(transverse_dim: usize) -> Self {
        match transverse_dim {
            1 => Self {
                transverse_grid: None,
                y_panels: 48,
                y_order: 8,
                radial_panels: 8,
                radial_order: 8,
                angular_points: 64,
                polar_order: 0,
                zero_tolerance: 1e-13,
            },
            _ => Self {
                transverse_grid: None,
                y_panels: 10,
                y_order: 6,
                radial_panels: 2,
                radial_order: 8,
                angular_points: 16,
                polar_order: 8,
                zero_tolerance: 1e-13,
            },
        }
    }
}

/// Plane-wave × transverse-eigenmode basis with its one- and two-body
/// matrix elements.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub point: ScalingPoint,
    pub box_length: f64,
    pub mx: usize,
    pub my: usize,
    pub transverse_dim: usize,
    pub interaction: ScaledInteraction,
    pub external: ExternalPotential,
    /// Unscaled transverse eigenvalues `E_n`; the rescaled ones are `E_n/ε²`.
    pub transverse_energies: Vec<f64>,
    pub transverse_grid: TransverseGrid,
    transverse_modes: Vec<Vec<f64>>,
    y_nodes: Vec<Vec<f64>>,
    y_weights: Vec<f64>,
    /// `χ_n^ε` at the `y` nodes, indexed `[n][node]`.
    chi_nodes: Vec<Vec<f64>>,
    x_nodes: Vec<f64>,
    /// `T[|Δm|][pair(n_a,n_c)][pair(n_b,n_d)]`; `W = δ_momentum T / L`.
    table: Vec<f64>,
    pairs: usize,
    /// Relative asymmetry of the raw table before symmetrisation.
    pub quadrature_asymmetry: f64,
    /// Transverse samples across the interaction range.
    pub points_per_range: f64,
}

fn pair_index(i: usize, j: usize, my: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * my - a * (a + 1) / 2 + b
}

/// Momentum quantum number of longitudinal index `ix`: `0, 1, −1, 2, −2, …`.
pub fn momentum_of(ix: usize) -> i64 {
    if ix == 0 {
        0
    } else if ix % 2 == 1 {
        (ix as i64 + 1) / 2
    } else {
        -(ix as i64) / 2
    }
}

/// Inverse of [`momentum_of`].
pub fn index_of_momentum(m: i64) -> usize {
    match m {
        0 => 0,
        m if m > 0 => (2 * m - 1) as usize,
        m => (-2 * m) as usize,
    }
}

pub fn build_basis(
    point: &ScalingPoint,
    confinement: &ConfinementPotential,
    external: &ExternalPotential,
    interaction: &ScaledInteraction,
    mx: usize,
    my: usize,
    box_length: f64,
    opts: &BasisOptions,
) -> Result<ModeBasis> {
    if mx == 0 || my == 0 {
        return Err(domain("modes", "need M_x >= 1 and M_y >= 1"));
    }
    if !(box_length > 0.0) {
        return Err(domain(
            "box_length",
            format!("need L > 0, got {box_length}"),
        ));
    }
    let dt = confinement.dim();
    if interaction.transverse_dim() != dt {
        return Err(domain(
            "dim",
            "interaction and confinement dimensions differ",
        ));
    }
    let grid = opts
        .transverse_grid
        .unwrap_or_else(|| TransverseGrid::default_for(dt));
    if grid.dim != dt {
        return Err(domain(
            "dim",
            "transverse grid dimension differs from the confinement",
        ));
    }
    let eps = point.epsilon;
    let range = interaction.range;
    let points_per_range = range / (eps * grid.spacing);
    if !interaction.profile.is_zero() {
        if points_per_range < MIN_POINTS_PER_RANGE {
            return Err(Error::Resolution(format!(
                "interaction range {range:.3e} spans {points_per_range:.1} transverse samples, need {MIN_POINTS_PER_RANGE}"
            )));
        }
        if range >= 0.5 * box_length {
            return Err(Error::Resolution(format!(
                "interaction range {range:.3e} must stay below half the box length {}",
                0.5 * box_length
            )));
        }
    }
    let spectrum = solve_spectrum(confinement, &grid, my)?;

    // y quadrature on the scaled box
    let half = eps * grid.half_extent;
    let (ax, aw) = composite_gauss_legendre(-half, half, opts.y_panels, opts.y_order);
    let (y_nodes, y_weights): (Vec<Vec<f64>>, Vec<f64>) = if dt == 1 {
        (ax.iter().map(|&y| vec![y]).collect(), aw.clone())
    } else {
        let mut nodes = Vec::with_capacity(ax.len() * ax.len());
        let mut weights = Vec::with_capacity(ax.len() * ax.len());
        for (i, &u) in ax.iter().enumerate() {
            for (j, &v) in ax.iter().enumerate() {
                nodes.push(vec![u, v]);
                weights.push(aw[i] * aw[j]);
            }
        }
        (nodes, weights)
    };
    let chi_scale = eps.powf(-(dt as f64) / 2.0);
    let chi_at = |n: usize, y: &[f64]| -> f64 {
        let u: Vec<f64> = y.iter().map(|v| v / eps).collect();
        chi_scale * interpolate(&grid, &spectrum.modes[n], &u)
    };
    let chi_nodes: Vec<Vec<f64>> = (0..my)
        .map(|n| y_nodes.iter().map(|y| chi_at(n, y)).collect())
        .collect();

    let m_max = (0..mx).map(|ix| momentum_of(ix).abs()).max().unwrap_or(0) as usize;
    let n_dm = 2 * m_max + 1;
    let pairs = my * (my + 1) / 2;
    let mut table = vec![0.0; n_dm * pairs * pairs];
    let mut asymmetry = 0.0;
    if !interaction.profile.is_zero() {
        table = two_body_table(
            interaction,
            &y_nodes,
            &y_weights,
            &chi_nodes,
            &chi_at,
            my,
            n_dm,
            box_length,
            opts,
        );
        let peak = table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for q in 0..n_dm {
            for p in 0..pairs {
                for r in (p + 1)..pairs {
                    let i = (q * pairs + p) * pairs + r;
                    let j = (q * pairs + r) * pairs + p;
                    asymmetry = f64::max(asymmetry, (table[i] - table[j]).abs());
                    let mean = 0.5 * (table[i] + table[j]);
                    table[i] = mean;
                    table[j] = mean;
                }
            }
        }
        if peak > 0.0 {
            asymmetry /= peak;
            table
                .iter_mut()
                .filter(|v| v.abs() < opts.zero_tolerance * peak)
                .for_each(|v| *v = 0.0);
        }
    }
    let nq = 64.max(4 * n_dm);
    let x_nodes = (0..nq)
        .map(|j| -0.5 * box_length + box_length * j as f64 / nq as f64)
        .collect();
    Ok(ModeBasis {
        point: *point,
        box_length,
        mx,
        my,
        transverse_dim: dt,
        interaction: interaction.clone(),
        external: external.clone(),
        transverse_energies: spectrum.energies,
        transverse_grid: grid,
        transverse_modes: spectrum.modes,
        y_nodes,
        y_weights,
        chi_nodes,
        x_nodes,
        table,
        pairs,
        quadrature_asymmetry: asymmetry,
        points_per_range,
    })
}

/// `T[q][ac][bd] = ∫ ρ_ac(y) G_{q,bd}(y) dy` with
/// `G_{q,bd}(y) = ∫ cos(q s) w_β(s, Δ) ρ_bd(y − Δ) ds dΔ`, evaluated in polar
/// coordinates around the first particle.
#[allow(clippy::too_many_arguments)]
fn two_body_table(
    interaction: &ScaledInteraction,
    y_nodes: &[Vec<f64>],
    y_weights: &[f64],
    chi_nodes: &[Vec<f64>],
    chi_at: &dyn Fn(usize, &[f64]) -> f64,
    my: usize,
    n_dm: usize,
    box_length: f64,
    opts: &BasisOptions,
) -> Vec<f64> {
    let d = interaction.dim();
    let mu = interaction.point.mu;
    let breaks: Vec<f64> = interaction
        .profile
        .shape
        .breakpoints(interaction.profile.support_radius)
        .iter()
        .map(|b| b * mu)
        .collect();
    let mut radial = Vec::new();
    for w in breaks.windows(2) {
        let (r, wr) = composite_gauss_legendre(w[0], w[1], opts.radial_panels, opts.radial_order);
        radial.extend(r.into_iter().zip(wr));
    }
    // unit directions: (component along x, transverse components, weight)
    let mut dirs: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let na = opts.angular_points;
    if d == 2 {
        for j in 0..na {
            let phi = 2.0 * PI * j as f64 / na as f64;
            dirs.push((phi.cos(), vec![phi.sin()], 2.0 * PI / na as f64));
        }
    } else {
        let (ct, wt) = gauss_legendre(opts.polar_order);
        for (c, w) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).sqrt();
            for j in 0..na {
                let psi = 2.0 * PI * j as f64 / na as f64;
                dirs.push((
                    *c,
                    vec![s * psi.cos(), s * psi.sin()],
                    w * 2.0 * PI / na as f64,
                ));
            }
        }
    }
    struct KernelNode {
        weight: f64,
        along: f64,
        shift: Vec<f64>,
    }
    let mut kernel = Vec::with_capacity(radial.len() * dirs.len());
    for &(r, wr) in &radial {
        let radial_weight = wr * r.powi(d as i32 - 1) * interaction.eval(r);
        for (along, across, wd) in &dirs {
            kernel.push(KernelNode {
                weight: radial_weight * wd,
                along: r * along,
                shift: across.iter().map(|c| r * c).collect(),
            });
        }
    }
    let cos_table: Vec<Vec<f64>> = (0..n_dm)
        .map(|q| {
            let k = 2.0 * PI * q as f64 / box_length;
            kernel
                .iter()
                .map(|node| node.weight * (k * node.along).cos())
                .collect()
        })
        .collect();
    let pairs = my * (my + 1) / 2;
    let mut table = vec![0.0; n_dm * pairs * pairs];
    let mut shifted = vec![vec![0.0; kernel.len()]; my];
    let mut y_shift = vec![0.0; y_nodes[0].len()];
    for (iy, y) in y_nodes.iter().enumerate() {
        for (k, node) in kernel.iter().enumerate() {
            for (c, s) in y_shift.iter_mut().zip(y.iter().zip(&node.shift)) {
                *c = s.0 - s.1;
            }
            for (n, row) in shifted.iter_mut().enumerate() {
                row[k] = chi_at(n, &y_shift);
            }
        }
        for b in 0..my {
            for dd in b..my {
                let q_pair = pair_index(b, dd, my);
                let rho: Vec<f64> = shifted[b]
                    .iter()
                    .zip(&shifted[dd])
                    .map(|(u, v)| u * v)
                    .collect();
                for (q, cq) in cos_table.iter().enumerate() {
                    let g: f64 = cq.iter().zip(&rho).map(|(c, r)| c * r).sum();
                    let g = g * y_weights[iy];
                    for a in 0..my {
                        for c in a..my {
                            let p_pair = pair_index(a, c, my);
                            table[(q * pairs + p_pair) * pairs + q_pair] +=
                                chi_nodes[a][iy] * chi_nodes[c][iy] * g;
                        }
                    }
                }
            }
        }
    }
    table
}

impl ModeBasis {
    pub fn n_modes(&self) -> usize {
        self.mx * self.my
    }

    /// `(longitudinal index, transverse index)` of mode `a`.
    pub fn mode(&self, a: usize) -> (usize, usize) {
        (a / self.my, a % self.my)
    }

    pub fn momentum(&self, a: usize) -> i64 {
        momentum_of(a / self.my)
    }

    pub fn wavenumber(&self, a: usize) -> f64 {
        2.0 * PI * self.momentum(a) as f64 / self.box_length
    }

    /// Mode index of momentum `m` and transverse level `n`, if inside the truncation.
    pub fn mode_index(&self, m: i64, n: usize) -> Option<usize> {
        let ix = index_of_momentum(m);
        (ix < self.mx && n < self.my).then_some(ix * self.my + n)
    }

    /// `χ_n^ε(y)`.
    pub fn transverse_mode(&self, n: usize, y: &[f64]) -> f64 {
        let eps = self.point.epsilon;
        let u: Vec<f64> = y.iter().map(|v| v / eps).collect();
        eps.powf(-(self.transverse_dim as f64) / 2.0)
            * interpolate(&self.transverse_grid, &self.transverse_modes[n], &u)
    }

    /// `u_a(x, y) = e^{ik_a x} χ_{n_a}^ε(y) / √L`.
    pub fn eval_mode(&self, a: usize, x: f64, y: &[f64]) -> Complex64 {
        let (_, n) = self.mode(a);
        Complex64::from_polar(
            self.transverse_mode(n, y) / self.box_length.sqrt(),
            self.wavenumber(a) * x,
        )
    }

    /// Rescaled transverse ground-state energy `E₀/ε²`.
    pub fn transverse_ground_energy(&self) -> f64 {
        self.transverse_energies[0] / self.point.epsilon.powi(2)
    }

    /// Kinetic plus confinement part, diagonal in the modes.
    pub fn one_body_static(&self) -> Vec<f64> {
        let e2 = self.point.epsilon.powi(2);
        (0..self.n_modes())
            .map(|a| {
                let (_, n) = self.mode(a);
                self.wavenumber(a).powi(2) + self.transverse_energies[n] / e2
            })
            .collect()
    }

    /// Matrix of `V∥(t)` between modes.
    pub fn external_matrix(&self, t: f64) -> DMatrix<Complex64> {
        let m = self.n_modes();
        let mut out = DMatrix::zeros(m, m);
        if self.external.is_zero() {
            return out;
        }
        let m_max = (0..self.mx)
            .map(|ix| momentum_of(ix).abs())
            .max()
            .unwrap_or(0);
        let span = 2 * m_max;
        let nq = self.x_nodes.len() as f64;
        // vhat[dm + span][y] = L⁻¹ ∫ e^{−i Δk x} V(t, x, y) dx
        let vhat: Vec<Vec<Complex64>> = (-span..=span)
            .map(|dm| {
                let k = 2.0 * PI * dm as f64 / self.box_length;
                self.y_nodes
                    .iter()
                    .map(|y| {
                        self.x_nodes
                            .iter()
                            .map(|&x| Complex64::from_polar(self.external.eval(t, x, y), -k * x))
                            .sum::<Complex64>()
                            / nq
                    })
                    .collect()
            })
            .collect();
        for a in 0..m {
            let (_, na) = self.mode(a);
            for b in a..m {
                let (_, nb) = self.mode(b);
                let dm = self.momentum(a) - self.momentum(b);
                let row = &vhat[(dm + span) as usize];
                let v: Complex64 = row
                    .iter()
                    .enumerate()
                    .map(|(iy, vh)| {
                        vh * (self.y_weights[iy] * self.chi_nodes[na][iy] * self.chi_nodes[nb][iy])
                    })
                    .sum();
                out[(a, b)] = v;
                out[(b, a)] = v.conj();
            }
        }
        out
    }

    /// Full one-body matrix `−Δ + ε⁻²V⊥(y/ε) + V∥(t)`.
    pub fn one_body_matrix(&self, t: f64) -> DMatrix<Complex64> {
        let mut h = self.external_matrix(t);
        for (a, e) in self.one_body_static().into_iter().enumerate() {
            h[(a, a)] += e;
        }
        h
    }

    /// `W_abcd = ∬ ū_a(z) ū_b(z') w_β(z − z') u_c(z) u_d(z')`.
    pub fn two_body(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        if self.momentum(a) + self.momentum(b) != self.momentum(c) + self.momentum(d) {
            return 0.0;
        }
        let dm = (self.momentum(c) - self.momentum(a)).unsigned_abs() as usize;
        let (_, na) = self.mode(a);
        let (_, nb) = self.mode(b);
        let (_, nc) = self.mode(c);
        let (_, nd) = self.mode(d);
        let p = pair_index(na, nc, self.my);
        let q = pair_index(nb, nd, self.my);
        self.table[(dm * self.pairs + p) * self.pairs + q] / self.box_length
    }

    /// Largest `|W_abcd|`.
    pub fn two_body_scale(&self) -> f64 {
        self.table.iter().fold(0.0f64, |m, v| m.max(v.abs())) / self.box_length
    }

    /// Coefficients of `Φ ⊗ χ^ε` in the modes, for `Φ` given on a periodic grid
    /// of the same box.
    pub fn project_condensate(&self, phi: &crate::nls::CondensateState) -> Result<Vec<Complex64>> {
        if (phi.grid.length - self.box_length).abs() > 1e-12 * self.box_length {
            return Err(domain(
                "box_length",
                "condensate grid and mode basis use different boxes",
            ));
        }
        let h = phi.grid.spacing();
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_modes()];
        for ix in 0..self.mx {
            let k = 2.0 * PI * momentum_of(ix) as f64 / self.box_length;
            let c: Complex64 = phi
                .values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v * Complex64::from_polar(h / self.box_length.sqrt(), -k * phi.grid.x(j))
                })
                .sum();
            out[ix * self.my] = c;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{scale, InteractionProfile, RadialShape};
    use crate::transverse::Stencil;

    fn small_basis(profile: InteractionProfile, external: ExternalPotential) -> ModeBasis {
        let point = ScalingPoint::new(2, 0.5, 0.2).unwrap();
        let scaled = scale(&profile, &point);
        let mut opts = BasisOptions::for_dim(1);
        opts.transverse_grid = Some(TransverseGrid::new(1, 8.0, 0.01, Stencil::Fourth).unwrap());
        build_basis(
            &point,
            &ConfinementPotential::harmonic(1),
            &external,
            &scaled,
            5,
            3,
            2.0 * PI,
            &opts,
        )
        .unwrap()
    }

    fn gaussian() -> InteractionProfile {
        InteractionProfile::new(
            RadialShape::GaussianBump {
                height: 1.0,
                sigma: 0.5,
            },
            3.0,
            2,
        )
        .unwrap()
    }

    #[test]
    fn momentum_ordering_round_trips() {
        for ix in 0..11 {
            assert_eq!(index_of_momentum(momentum_of(ix)), ix);
        }
        assert_eq!(momentum_of(0), 0);
        assert_eq!(momentum_of(1), 1);
        assert_eq!(momentum_of(2), -1);
    }

    #[test]
    fn zero_interaction_gives_zero_tensor() {
        let b = small_basis(InteractionProfile::zero(2), ExternalPotential::Zero);
        assert_eq!(b.two_body_scale(), 0.0);
    }

    #[test]
    fn free_one_body_is_separable() {
        let b = small_basis(InteractionProfile::zero(2), ExternalPotential::Zero);
        let h = b.one_body_matrix(0.0);
        for a in 0..b.n_modes() {
            let (_, n) = b.mode(a);
            let exact = b.wavenumber(a).powi(2) + (2 * n + 1) as f64 / 0.25;
            assert!(
                (h[(a, a)].re - exact).abs() < 1e-5,
                "{a}: {} vs {exact}",
                h[(a, a)].re
            );
            for c in 0..b.n_modes() {
                if c != a {
                    assert_eq!(h[(a, c)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn lattice_couples_neighbouring_momenta() {
        let field = ExternalPotential::CosineLattice {
            amplitude: 0.8,
            wavenumber: 1.0,
            drive: 0.0,
            drive_frequency: 0.0,
            transverse: 0.0,
        };
        let b = small_basis(InteractionProfile::zero(2), field);
        let v = b.external_matrix(0.0);
        let a0 = b.mode_index(0, 0).unwrap();
        let a1 = b.mode_index(1, 0).unwrap();
        let a2 = b.mode_index(2, 0).unwrap();
        assert!(
            (v[(a0, a1)] - Complex64::new(0.4, 0.0)).norm() < 1e-8,
            "{}",
            v[(a0, a1)]
        );
        assert!(v[(a0, a2)].norm() < 1e-12);
        let herm = (&v - v.adjoint()).camax();
        assert!(herm < 1e-14);
    }

    #[test]
    fn tensor_symmetries() {
        let b = small_basis(gaussian(), ExternalPotential::Zero);
        let m = b.n_modes();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for bb in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let w = b.two_body(a, bb, c, d);
                        worst = worst.max((w - b.two_body(bb, a, d, c)).abs());
                        worst = worst.max((w - b.two_body(c, d, a, bb)).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-10 * b.two_body_scale());
        assert!(b.quadrature_asymmetry < 1e-8, "{}", b.quadrature_asymmetry);
    }

    #[test]
    fn condensate_element_matches_coupling() {
        // W_0000 = ∫∫|χ^ε|²|χ^ε|² w̄ / L ≈ ‖w_β‖₁ ∫|χ^ε|⁴ / L for a short range
        let point = ScalingPoint::new(2, 0.5, 0.9).unwrap();
        let profile = InteractionProfile::uniform_ball(2);
        let scaled = scale(&profile, &point);
        let mut opts = BasisOptions::for_dim(1);
        opts.transverse_grid = Some(TransverseGrid::new(1, 8.0, 0.002, Stencil::Fourth).unwrap());
        let b = build_basis(
            &point,
            &ConfinementPotential::harmonic(1),
            &ExternalPotential::Zero,
            &scaled,
            1,
            1,
            2.0 * PI,
            &opts,
        )
        .unwrap();
        let quartic = 1.0 / (2.0 * PI).sqrt() / 0.5;
        let approx = scaled.l1_norm() * quartic / (2.0 * PI);
        let w = b.two_body(0, 0, 0, 0);
        assert!((w - approx).abs() < 0.05 * approx, "{w} vs {approx}");
    }

    #[test]
    fn short_range_is_a_resolution_error() {
        let point = ScalingPoint::new(1000, 0.5, 0.9).unwrap();
        let scaled = scale(&InteractionProfile::uniform_ball(2), &point);
        let r = build_basis(
            &point,
            &ConfinementPotential::harmonic(1),
            &ExternalPotential::Zero,
            &scaled,
            3,
            2,
            2.0 * PI,
            &BasisOptions::for_dim(1),
        );
        assert!(matches!(r, Err(Error::Resolution(_))), "{r:?}");
    }
}
