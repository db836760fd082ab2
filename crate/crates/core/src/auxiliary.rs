//! Auxiliary functions for integrating the interaction by parts.
//!
//! `h_ε` solves `Δh = w_β` in the ball `B_ε` with `h = 0` on its boundary,
//! `Θ_ε` is a smooth cut-off between the radii `μ` and `ε`, `w̄` is the pair
//! interaction averaged over both transverse coordinates, `h̄` solves
//! `h̄″ = w̄` on `[-N^{-β₁}, N^{-β₁}]`, and `Γ` measures how far the convolved
//! effective potential is from the contact one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::harness::Check;
use crate::nls::{CondensateState, PeriodicGrid};
use crate::potentials::{
    scale, sphere_area, ConfinementPotential, InteractionProfile, RadialShape, ScaledInteraction,
};
use crate::quadrature::{composite_gauss_legendre, integrate, integrate_pieces};
use crate::scaling::{fit_power_law, PowerFit, ScalingPoint, ScalingSequence};
use crate::transverse::{rescale, solve_ground, RescaledMode, TransverseGrid};

/// A radial pair density `amplitude · w(r/μ)` in `dim` dimensions.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    pub dim: usize,
    pub mu: f64,
    pub amplitude: f64,
    pub profile: InteractionProfile,
}

impl RadialDensity {
    pub fn from_scaled(w: &ScaledInteraction) -> Self {
        Self {
            dim: w.dim(),
            mu: w.point.mu,
            amplitude: w.amplitude,
            profile: w.profile.clone(),
        }
    }

    /// `height · 1_{|z| ≤ μ}`.
    pub fn uniform_ball(dim: usize, height: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(domain("mu", format!("need mu > 0, got {mu}")));
        }
        if !(2..=3).contains(&dim) {
            return Err(domain("dim", format!("need dim 2 or 3, got {dim}")));
        }
        Ok(Self {
            dim,
            mu,
            amplitude: height,
            profile: InteractionProfile::uniform_ball(dim),
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.amplitude * self.profile.eval(r / self.mu)
    }

    pub fn range(&self) -> f64 {
        self.mu * self.profile.support_radius
    }

    pub fn l1_norm(&self) -> f64 {
        self.amplitude * self.mu.powi(self.dim as i32) * self.profile.l1_norm
    }

    pub fn sup(&self) -> f64 {
        self.amplitude.abs() * self.profile.sup_bound
    }

    fn breaks(&self) -> Vec<f64> {
        self.profile
            .shape
            .breakpoints(self.profile.support_radius)
            .iter()
            .map(|b| b * self.mu)
            .collect()
    }

    /// Breakpoints strictly inside `(a, b)`, framed by the endpoints.
    fn breaks_within(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = vec![a];
        out.extend(self.breaks().into_iter().filter(|&r| r > a && r < b));
        out.push(b);
        out
    }
}

/// Samples of a radial function together with its radial derivative.
#[derive(Debug, Clone, Serialize)]
pub struct RadialFunction {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
    pub mu: f64,
    pub epsilon: f64,
    pub dim: usize,
}

impl RadialFunction {
    /// Linear interpolation; zero beyond the last radius.
    pub fn eval(&self, r: f64) -> f64 {
        let last = *self.radii.last().expect("non-empty");
        if r > last || r < 0.0 {
            return 0.0;
        }
        let i = self
            .radii
            .partition_point(|&x| x <= r)
            .clamp(1, self.radii.len() - 1);
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        let s = (r - r0) / (r1 - r0);
        self.values[i - 1] * (1.0 - s) + self.values[i] * s
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn boundary_value(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }
}

/// `h_ε` with its gradient norms.
#[derive(Debug, Clone, Serialize)]
pub struct HEpsilon {
    pub h: RadialFunction,
    pub gradient_sup: f64,
    pub gradient_l2: f64,
    /// `∫ w` over the ball.
    pub charge: f64,
}

pub fn build_h_epsilon(w: &ScaledInteraction, epsilon: f64, n_samples: usize) -> Result<HEpsilon> {
    h_epsilon(&RadialDensity::from_scaled(w), epsilon, n_samples)
}

/// Radial Dirichlet solution of `Δh = w` in `B_ε`.
///
/// With `M(r) = ∫₀^r w s^{d-1} ds` the solution is `h′ = M/r^{d-1}` and
/// `h(r) = -∫_r^ε h′`; integrating by parts leaves cumulative integrals of
/// `w` alone, which is the shell-theorem form of the image-charge formula.
/// Half the samples sit uniformly on the support, half on `[range, ε]`.
pub fn h_epsilon(w: &RadialDensity, epsilon: f64, n_samples: usize) -> Result<HEpsilon> {
    let d = w.dim;
    let range = w.range();
    if !(w.mu < epsilon) {
        return Err(Error::Regime(format!(
            "need mu < epsilon, got mu = {} and epsilon = {epsilon}",
            w.mu
        )));
    }
    if !(range < epsilon) {
        return Err(Error::Regime(format!(
            "interaction support {range} must lie inside the ball of radius {epsilon}"
        )));
    }
    if n_samples < 32 {
        return Err(domain(
            "n_samples",
            format!("need >= 32 samples, got {n_samples}"),
        ));
    }
    let n_in = (n_samples / 2) | 1;
    let n_out = n_samples - n_in + 1;
    let mut radii: Vec<f64> = (0..n_in)
        .map(|i| range * i as f64 / (n_in - 1) as f64)
        .collect();
    radii.extend((1..n_out).map(|j| range + (epsilon - range) * j as f64 / (n_out - 1) as f64));
    *radii.last_mut().expect("non-empty") = epsilon;

    let kernel = |s: f64| {
        if d == 3 {
            s
        } else if s > 0.0 {
            s * s.ln()
        } else {
            0.0
        }
    };
    let m_scale = w.sup() * range.powi(d as i32);
    let k_scale = w.sup() * range * range * (1.0 + range.ln().abs());
    let increments: Vec<(f64, f64)> = (1..n_in)
        .into_par_iter()
        .map(|i| {
            let breaks = w.breaks_within(radii[i - 1], radii[i]);
            let m = integrate_pieces(
                |s| w.eval(s) * s.powi(d as i32 - 1),
                &breaks,
                1e-16 * m_scale / n_in as f64,
                1e-13,
            )?;
            let k = integrate_pieces(
                |s| w.eval(s) * kernel(s),
                &breaks,
                1e-16 * k_scale / n_in as f64,
                1e-13,
            )?;
            Ok((m.value, k.value))
        })
        .collect::<Result<_>>()?;
    let mut m_cum = vec![0.0; n_in];
    let mut k_cum = vec![0.0; n_in];
    for i in 1..n_in {
        m_cum[i] = m_cum[i - 1] + increments[i - 1].0;
        k_cum[i] = k_cum[i - 1] + increments[i - 1].1;
    }
    let (m_tot, k_tot) = (m_cum[n_in - 1], k_cum[n_in - 1]);
    let cum = |i: usize| {
        if i < n_in {
            (m_cum[i], k_cum[i])
        } else {
            (m_tot, k_tot)
        }
    };

    let mut values = Vec::with_capacity(radii.len());
    let mut derivative = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let (m, k) = cum(i);
        let integral = if d == 3 {
            let inner = if r > 0.0 { m / r } else { 0.0 };
            inner - m_tot / epsilon + (k_tot - k)
        } else {
            let inner = if r > 0.0 { m * r.ln() } else { 0.0 };
            m_tot * epsilon.ln() - inner - (k_tot - k)
        };
        values.push(-integral);
        derivative.push(if r > 0.0 {
            m / r.powi(d as i32 - 1)
        } else {
            0.0
        });
    }

    let gradient_sup = derivative.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let dr = range / (n_in - 1) as f64;
    let inner_sq: Vec<f64> = (0..n_in)
        .map(|i| derivative[i].powi(2) * radii[i].powi(d as i32 - 1))
        .collect();
    let inner = simpson(&inner_sq, dr);
    let outer = if d == 3 {
        m_tot * m_tot * (1.0 / range - 1.0 / epsilon)
    } else {
        m_tot * m_tot * (epsilon / range).ln()
    };
    let area = sphere_area(d);
    Ok(HEpsilon {
        h: RadialFunction {
            radii,
            values,
            derivative,
            mu: w.mu,
            epsilon,
            dim: d,
        },
        gradient_sup,
        gradient_l2: (area * (inner + outer)).sqrt(),
        charge: area * m_tot,
    })
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    debug_assert!(n % 2 == 1 && n >= 3);
    let mut acc = f[0] + f[n - 1];
    for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonReport {
    /// `max |Δ_h h − w| / sup |w|` over interior stencils that avoid kinks of `w`.
    pub max_residual: f64,
    pub boundary: f64,
    pub samples: usize,
    pub stencils: usize,
}

/// Finite-difference check of `(1/r^{d-1})(r^{d-1}h′)′ = w`.
pub fn verify_poisson(h: &RadialFunction, w: &RadialDensity) -> Result<PoissonReport> {
    let r = &h.radii;
    let across = r.iter().filter(|&&x| x <= w.mu).count();
    if w.sup() > 0.0 && across < 16 {
        return Err(Error::Resolution(format!(
            "only {across} samples across mu; need >= 16"
        )));
    }
    let breaks = w.breaks();
    let scale = if w.sup() > 0.0 { w.sup() } else { 1.0 };
    let d = h.dim as f64;
    let mut worst = 0.0f64;
    let mut stencils = 0;
    for i in 1..r.len() - 1 {
        let (lo, hi) = (r[i - 1], r[i + 1]);
        if breaks.iter().any(|&b| b > lo && b < hi && b > 0.0) {
            continue;
        }
        let a = r[i] - lo;
        let b = hi - r[i];
        let (f0, f1, f2) = (h.values[i - 1], h.values[i], h.values[i + 1]);
        let second = 2.0 * (b * f0 - (a + b) * f1 + a * f2) / (a * b * (a + b));
        let first = (-b * b * f0 + (b * b - a * a) * f1 + a * a * f2) / (a * b * (a + b));
        let lap = second + (d - 1.0) / r[i] * first;
        worst = worst.max((lap - w.eval(r[i])).abs() / scale);
        stencils += 1;
    }
    Ok(PoissonReport {
        max_residual: worst,
        boundary: h.boundary_value().abs(),
        samples: r.len(),
        stencils,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientRow {
    pub n_particles: u64,
    pub epsilon: f64,
    pub mu: f64,
    pub gradient_sup: f64,
    pub gradient_l2: f64,
    /// `N⁻¹ μ⁻² ε²`.
    pub sup_predictor: f64,
    /// `N⁻¹ μ^{-1/2} ε²`.
    pub l2_predictor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientFit {
    pub rows: Vec<GradientRow>,
    pub sup: PowerFit,
    pub l2: PowerFit,
}

/// Log-log regression of `‖∇h_ε‖_∞` and `‖∇h_ε‖₂` against their predictors.
pub fn gradient_scaling_fit(
    points: &[ScalingPoint],
    profile: &InteractionProfile,
    n_samples: usize,
) -> Result<GradientFit> {
    if profile.dim != 3 {
        return Err(domain(
            "dim",
            "gradient predictors are stated for three dimensions",
        ));
    }
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need >= 4 scaling points, got {}",
            points.len()
        )));
    }
    let rows: Vec<GradientRow> = points
        .par_iter()
        .map(|p| {
            let w = scale(profile, p);
            let h = build_h_epsilon(&w, p.epsilon, n_samples)?;
            let eps2_over_n = p.epsilon * p.epsilon / p.n();
            Ok(GradientRow {
                n_particles: p.n_particles,
                epsilon: p.epsilon,
                mu: p.mu,
                gradient_sup: h.gradient_sup,
                gradient_l2: h.gradient_l2,
                sup_predictor: eps2_over_n / (p.mu * p.mu),
                l2_predictor: eps2_over_n / p.mu.sqrt(),
            })
        })
        .collect::<Result<_>>()?;
    let col = |f: fn(&GradientRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let sup = fit_power_law(&col(|r| r.sup_predictor), &col(|r| r.gradient_sup))?;
    let l2 = fit_power_law(&col(|r| r.l2_predictor), &col(|r| r.gradient_l2))?;
    Ok(GradientFit { rows, sup, l2 })
}

/// `θ(x)` falling smoothly from 1 at `lo` to 0 at `hi`.
///
/// Written as `1/(1+e^t)` with `t` proportional to `2x − (lo+hi)`, so the
/// midpoint gives exactly `1/2`.
pub fn smooth_step(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo {
        1.0
    } else if x >= hi {
        0.0
    } else {
        1.0 / (1.0 + step_exponent(x, lo, hi).exp())
    }
}

pub fn smooth_step_derivative(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo || x >= hi {
        return 0.0;
    }
    let t = step_exponent(x, lo, hi);
    let dt = (hi - lo) * ((hi - x).powi(-2) + (x - lo).powi(-2));
    let upper = 1.0 / (1.0 + t.exp());
    let lower = 1.0 / (1.0 + (-t).exp());
    -upper * lower * dt
}

fn step_exponent(x: f64, lo: f64, hi: f64) -> f64 {
    (hi - lo) * (2.0 * x - (lo + hi)) / ((x - lo) * (hi - x))
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub theta: RadialFunction,
    pub sup: f64,
    pub l2: f64,
    pub gradient_sup: f64,
    pub gradient_l2: f64,
    pub midpoint_value: f64,
    /// `‖∇Θ‖_∞ · ε`.
    pub gradient_sup_scaled: f64,
    /// `‖∇Θ‖₂ / ε^{(d-2)/2}`.
    pub gradient_l2_scaled: f64,
    /// `|Θ(μ) − 1| + |Θ(ε)|`.
    pub boundary: f64,
}

pub fn theta(mu: f64, epsilon: f64, dim: usize, n_samples: usize) -> Result<ThetaReport> {
    if !(mu > 0.0 && mu < epsilon) {
        return Err(Error::Regime(format!(
            "need 0 < mu < epsilon, got mu = {mu} and epsilon = {epsilon}"
        )));
    }
    if n_samples < 8 {
        return Err(domain("n_samples", "need >= 8 samples"));
    }
    let radii: Vec<f64> = (0..n_samples)
        .map(|i| epsilon * i as f64 / (n_samples - 1) as f64)
        .collect();
    let values: Vec<f64> = radii.iter().map(|&r| smooth_step(r, mu, epsilon)).collect();
    let derivative: Vec<f64> = radii
        .iter()
        .map(|&r| smooth_step_derivative(r, mu, epsilon))
        .collect();

    let grad = |x: f64| smooth_step_derivative(x, mu, epsilon).abs();
    let dense = 8192;
    let xs: Vec<f64> = (1..dense)
        .map(|i| mu + (epsilon - mu) * i as f64 / dense as f64)
        .collect();
    let (k, _) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, grad(x)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let (mut a, mut b) = (xs[k.saturating_sub(1)], xs[(k + 1).min(xs.len() - 1)]);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if grad(m1) < grad(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let gradient_sup = grad(0.5 * (a + b)).max(grad(xs[k]));

    let d = dim as i32;
    let area = sphere_area(dim);
    let tol = 1e-12;
    let l2_outer = integrate(
        |r| smooth_step(r, mu, epsilon).powi(2) * r.powi(d - 1),
        mu,
        epsilon,
        0.0,
        tol,
    )?
    .value;
    let l2 = (area * (mu.powi(d) / dim as f64 + l2_outer)).sqrt();
    let g2 = integrate(
        |r| smooth_step_derivative(r, mu, epsilon).powi(2) * r.powi(d - 1),
        mu,
        epsilon,
        0.0,
        tol,
    )?
    .value;
    let gradient_l2 = (area * g2).sqrt();
    let midpoint = 0.5 * (mu + epsilon);
    Ok(ThetaReport {
        theta: RadialFunction {
            radii,
            values,
            derivative,
            mu,
            epsilon,
            dim,
        },
        sup: 1.0,
        l2,
        gradient_sup,
        gradient_l2,
        midpoint_value: smooth_step(midpoint, mu, epsilon),
        gradient_sup_scaled: gradient_sup * epsilon,
        gradient_l2_scaled: gradient_l2 / epsilon.powf((dim as f64 - 2.0) / 2.0),
        boundary: (smooth_step(mu, mu, epsilon) - 1.0).abs()
            + smooth_step(epsilon, mu, epsilon).abs(),
    })
}

/// Samples on an increasing grid, linearly interpolated, zero outside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFunction {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl LineFunction {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(domain("line", "need >= 2 matching abscissae and values"));
        }
        if xs.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(domain("line", "abscissae must increase"));
        }
        Ok(Self { xs, values })
    }

    /// `f` sampled at `n` uniform points on `[-half, half]`.
    pub fn from_fn(half: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = symmetric_grid(half, n);
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, values)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let s = (x - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - s) + self.values[i] * s
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact integral of the interpolant.
    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        LineFunction {
            xs: self.xs.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
        .integral()
    }

    /// `max |f(x) − f(−x)|` over the samples.
    pub fn evenness_residual(&self) -> f64 {
        self.xs
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| (v - self.eval(-x)).abs())
            .fold(0.0, f64::max)
    }
}

fn symmetric_grid(half: f64, n: usize) -> Vec<f64> {
    let m = n / 2;
    let mut xs: Vec<f64> = (0..=m).map(|j| half * j as f64 / m as f64).collect();
    *xs.last_mut().expect("non-empty") = half;
    let mut full: Vec<f64> = xs.iter().skip(1).rev().map(|x| -x).collect();
    full.extend(xs);
    full
}

const RHO_TABLE: usize = 1024;
const ANGLES: usize = 64;
const LINE_PANELS: usize = 32;

/// Transverse average `w̄(x) = ∬ |χ^ε(y₁)|² |χ^ε(y₂)|² w_β(x, y₁ − y₂)`.
///
/// The double transverse integral is rewritten with the density
/// autocorrelation `ρ(u) = ∫ |χ|²(y) |χ|²(y+u) dy`, evaluated exactly at grid
/// lags, interpolated, and (for two transverse dimensions) averaged over
/// angle. Only `|u| ≤ range` is needed.
#[derive(Debug, Clone)]
pub struct QuasiOneD {
    pub density: RadialDensity,
    pub transverse_dim: usize,
    pub line: LineFunction,
    /// `∫ w̄` from a graded Gauss rule in `x`.
    pub l1_norm: f64,
    /// `∫ ρ(u) ∫ w(x, u) dx du`, the same integral in the other order.
    pub l1_marginal: f64,
    /// `‖w‖₁ ∫ |χ^ε|⁴`, the contact limit of `∫ w̄`.
    pub contact_l1: f64,
    rho_table: Vec<f64>,
}

pub fn quasi1d(w: &ScaledInteraction, chi: &RescaledMode) -> Result<QuasiOneD> {
    QuasiOneD::new(&RadialDensity::from_scaled(w), chi, 513)
}

impl QuasiOneD {
    pub fn new(density: &RadialDensity, chi: &RescaledMode, n_line: usize) -> Result<Self> {
        let dt = chi.grid.dim;
        if density.dim != dt + 1 {
            return Err(domain(
                "dim",
                "interaction dimension must be transverse dimension + 1",
            ));
        }
        let range = density.range();
        let h = chi.grid.spacing;
        let n = chi.grid.points_per_axis();
        let reach = (range / h).ceil() as usize + 3;
        if range >= 0.5 * chi.grid.half_extent || 2 * reach >= n {
            return Err(Error::Resolution(format!(
                "transverse grid (half extent {}, {} points) does not cover the interaction range {range}",
                chi.grid.half_extent, n
            )));
        }
        let dens: Vec<f64> = chi.chi.iter().map(|v| v * v).collect();
        let lags = lag_autocorrelation(&dens, n, dt, reach, chi.grid.cell_volume());
        let rho_table: Vec<f64> = (0..=RHO_TABLE)
            .into_par_iter()
            .map(|i| {
                let u = range * i as f64 / RHO_TABLE as f64;
                if dt == 1 {
                    lag_interp_1d(&lags, u / h)
                } else {
                    (0..ANGLES)
                        .map(|k| {
                            let phi = 2.0 * PI * k as f64 / ANGLES as f64;
                            lag_interp_2d(&lags, reach, u * phi.cos() / h, u * phi.sin() / h)
                        })
                        .sum::<f64>()
                        / ANGLES as f64
                }
            })
            .collect();
        let mut q = Self {
            density: density.clone(),
            transverse_dim: dt,
            line: LineFunction::new(vec![-1.0, 1.0], vec![0.0, 0.0])?,
            l1_norm: 0.0,
            l1_marginal: 0.0,
            contact_l1: density.l1_norm() * chi.quartic(),
            rho_table,
        };
        let half: Vec<f64> = symmetric_grid(range, n_line.max(5))
            .into_iter()
            .filter(|&x| x >= 0.0)
            .collect();
        let vals: Vec<f64> = half.par_iter().map(|&x| q.eval(x)).collect::<Result<_>>()?;
        let mut xs: Vec<f64> = half.iter().skip(1).rev().map(|x| -x).collect();
        xs.extend(&half);
        let mut values: Vec<f64> = vals.iter().skip(1).rev().copied().collect();
        values.extend(&vals);
        q.line = LineFunction::new(xs, values)?;
        let (nodes, weights) = q.line_rule(LINE_PANELS);
        let samples: Vec<f64> = nodes
            .par_iter()
            .map(|&x| q.eval(x))
            .collect::<Result<_>>()?;
        q.l1_norm = 2.0
            * samples
                .iter()
                .zip(&weights)
                .map(|(v, w)| v * w)
                .sum::<f64>();
        q.l1_marginal = q.marginal()?;
        Ok(q)
    }

    pub fn range(&self) -> f64 {
        self.density.range()
    }

    /// Angular mean of the density autocorrelation at lag length `u`.
    pub fn autocorrelation(&self, u: f64) -> f64 {
        let range = self.range();
        let s = (u.abs() / range * RHO_TABLE as f64).min(RHO_TABLE as f64);
        let k = (s.round() as isize).min(RHO_TABLE as isize - 2);
        let t = s - k as f64;
        let at = |i: isize| self.rho_table[i.unsigned_abs()];
        lagrange5(t, [at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2)])
    }

    /// Transverse measure of `{|u| = u}` times the autocorrelation.
    fn radial_weight(&self, u: f64) -> f64 {
        if self.transverse_dim == 1 {
            2.0 * self.autocorrelation(u)
        } else {
            2.0 * PI * u * self.autocorrelation(u)
        }
    }

    /// `w̄(x)` by adaptive quadrature over the transverse lag.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let range = self.range();
        let x = x.abs();
        if x >= range {
            return Ok(0.0);
        }
        let top = (range * range - x * x).sqrt();
        let mut breaks = vec![0.0];
        breaks.extend(
            self.density
                .breaks()
                .into_iter()
                .filter(|&b| b > x && b < range)
                .map(|b| (b * b - x * x).sqrt())
                .filter(|&u| u > 0.0 && u < top),
        );
        breaks.push(top);
        breaks.sort_by(f64::total_cmp);
        let scale = self.density.sup() * self.rho_table[0] * range.powi(self.transverse_dim as i32);
        Ok(integrate_pieces(
            |u| self.radial_weight(u) * self.density.eval((x * x + u * u).sqrt()),
            &breaks,
            1e-15 * scale.max(f64::MIN_POSITIVE),
            1e-12,
        )?
        .value)
    }

    /// Gauss nodes on `[0, range]` graded as `x = R(1 − (1−t)²)` to absorb
    /// the square-root edge of `w̄`.
    fn line_rule(&self, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let range = self.range();
        let (t, wt) = composite_gauss_legendre(0.0, 1.0, panels, 8);
        let nodes = t
            .iter()
            .map(|&t| range * (1.0 - (1.0 - t).powi(2)))
            .collect();
        let weights = t
            .iter()
            .zip(&wt)
            .map(|(&t, &w)| w * 2.0 * range * (1.0 - t))
            .collect();
        (nodes, weights)
    }

    /// `∫ w̄(x) cos(kx) dx` for each `k`.
    pub fn fourier(&self, ks: &[f64]) -> Result<Vec<f64>> {
        let kmax = ks.iter().fold(0.0, |m: f64, k| m.max(k.abs()));
        let panels = LINE_PANELS.max((kmax * self.range()).ceil() as usize);
        let (nodes, weights) = self.line_rule(panels);
        let samples: Vec<f64> = nodes
            .par_iter()
            .map(|&x| self.eval(x))
            .collect::<Result<_>>()?;
        Ok(ks
            .iter()
            .map(|&k| {
                2.0 * nodes
                    .iter()
                    .zip(&weights)
                    .zip(&samples)
                    .map(|((&x, &w), &v)| w * v * (k * x).cos())
                    .sum::<f64>()
            })
            .collect())
    }

    fn marginal(&self) -> Result<f64> {
        let range = self.range();
        let scale = self.density.sup() * self.rho_table[0] * range.powi(self.density.dim as i32);
        let tol = 1e-14 * scale.max(f64::MIN_POSITIVE);
        let transverse_line = |u: f64| -> f64 {
            if u >= range {
                return 0.0;
            }
            let top = (range * range - u * u).sqrt();
            let mut breaks = vec![0.0];
            breaks.extend(
                self.density
                    .breaks()
                    .into_iter()
                    .filter(|&b| b > u && b < range)
                    .map(|b| (b * b - u * u).sqrt())
                    .filter(|&x| x > 0.0 && x < top),
            );
            breaks.push(top);
            breaks.sort_by(f64::total_cmp);
            integrate_pieces(
                |x| 2.0 * self.density.eval((x * x + u * u).sqrt()),
                &breaks,
                tol,
                1e-12,
            )
            .map(|v| v.value)
            .unwrap_or(f64::NAN)
        };
        let mut breaks = self.density.breaks_within(0.0, range);
        breaks.dedup();
        let v = integrate_pieces(
            |u| self.radial_weight(u) * transverse_line(u),
            &breaks,
            tol,
            1e-11,
        )?
        .value;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Tolerance(
                "inner line integral of the marginal did not converge".into(),
            ))
        }
    }
}

/// `ρ(k h)` for `|k| ≤ reach` (per axis); 1D tables hold `k ≥ 0` only.
fn lag_autocorrelation(dens: &[f64], n: usize, dim: usize, reach: usize, cell: f64) -> Vec<f64> {
    let r = reach as isize;
    if dim == 1 {
        (0..=reach)
            .map(|k| cell * (0..n - k).map(|i| dens[i] * dens[i + k]).sum::<f64>())
            .collect()
    } else {
        let side = 2 * reach + 1;
        (0..side * side)
            .into_par_iter()
            .map(|idx| {
                let kx = (idx / side) as isize - r;
                let ky = (idx % side) as isize - r;
                let mut acc = 0.0;
                for i in 0..n as isize {
                    let i2 = i + kx;
                    if i2 < 0 || i2 >= n as isize {
                        continue;
                    }
                    for j in 0..n as isize {
                        let j2 = j + ky;
                        if j2 < 0 || j2 >= n as isize {
                            continue;
                        }
                        acc += dens[(i as usize) * n + j as usize]
                            * dens[(i2 as usize) * n + j2 as usize];
                    }
                }
                cell * acc
            })
            .collect()
    }
}

/// Five-point Lagrange on nodes `-2..=2`.
///
/// Centred on the nearest lag, so for even `ρ` the interpolant is even near
/// `u = 0` and `ρ(u) − ρ(0)` carries no spurious linear term.
fn lagrange5(t: f64, f: [f64; 5]) -> f64 {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut acc = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        let mut l = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                l *= (t - xj) / (xi - xj);
            }
        }
        acc += l * f[i];
    }
    acc
}

fn lag_interp_1d(lags: &[f64], s: f64) -> f64 {
    let k = s.round() as isize;
    let t = s - k as f64;
    let at = |i: isize| lags[i.unsigned_abs()];
    lagrange5(t, [at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2)])
}

fn lag_interp_2d(lags: &[f64], reach: usize, a: f64, b: f64) -> f64 {
    let side = 2 * reach + 1;
    let r = reach as isize;
    let (ka, kb) = (a.round() as isize, b.round() as isize);
    let (ta, tb) = (a - ka as f64, b - kb as f64);
    let row = |i: isize| -> f64 {
        let at = |j: isize| lags[((i + r) as usize) * side + (j + r) as usize];
        lagrange5(tb, [at(kb - 2), at(kb - 1), at(kb), at(kb + 1), at(kb + 2)])
    };
    lagrange5(
        ta,
        [row(ka - 2), row(ka - 1), row(ka), row(ka + 1), row(ka + 2)],
    )
}

/// `G(x′, x)` for `u″ = f` on `[-l, l]` with zero boundary values.
pub fn green(xp: f64, x: f64, l: f64) -> f64 {
    let (lo, hi) = if xp < x { (xp, x) } else { (x, xp) };
    (lo + l) * (hi - l) / (2.0 * l)
}

#[derive(Debug, Clone, Serialize)]
pub struct HBar {
    pub length: f64,
    pub h: LineFunction,
    pub derivative: Vec<f64>,
    pub gradient_sup: f64,
    pub wbar_l1: f64,
    /// `max |δ² h̄ − w̄| / sup |w̄|` over stencils away from the support edges.
    pub poisson_residual: f64,
    pub green_symmetry: f64,
    /// `|h̄(−L)| + |h̄(L)|`.
    pub boundary: f64,
    pub theta_bar: LineFunction,
    /// `|Θ̄(μ) − 1| + |Θ̄(L)|`.
    pub theta_boundary: f64,
}

/// `h̄ = ∫ G(x′, ·) w̄(x′) dx′` on `[-N^{-β₁}, N^{-β₁}]`, and the matching `Θ̄`.
///
/// The integral is split into the moments `∫ w̄` and `∫ x w̄` of the linear
/// interpolant, so the boundary values vanish identically.
pub fn build_h_bar(
    wbar: &LineFunction,
    beta1: f64,
    n_particles: f64,
    mu: f64,
    n_samples: usize,
) -> Result<HBar> {
    if !(beta1 > 0.0) || !(n_particles >= 1.0) {
        return Err(domain("beta1", "need beta1 > 0 and N >= 1"));
    }
    let l = n_particles.powf(-beta1);
    let (a, b) = (wbar.xs[0], *wbar.xs.last().expect("non-empty"));
    if !(a > -l && b < l) {
        return Err(domain(
            "wbar",
            format!("support [{a}, {b}] must lie inside (-{l}, {l})"),
        ));
    }
    if !(mu > 0.0 && mu < l) {
        return Err(Error::Regime(format!(
            "need 0 < mu < N^-beta1 = {l}, got {mu}"
        )));
    }
    if n_samples < 8 {
        return Err(domain("n_samples", "need >= 8 samples"));
    }
    let xw = &wbar.xs;
    let fw = &wbar.values;
    let cell = |x0: f64, x1: f64, f0: f64, f1: f64| -> (f64, f64) {
        let dx = x1 - x0;
        (
            0.5 * dx * (f0 + f1),
            dx / 6.0 * ((2.0 * x0 + x1) * f0 + (x0 + 2.0 * x1) * f1),
        )
    };
    let mut p0 = vec![0.0; xw.len()];
    let mut p1 = vec![0.0; xw.len()];
    for k in 1..xw.len() {
        let (c0, c1) = cell(xw[k - 1], xw[k], fw[k - 1], fw[k]);
        p0[k] = p0[k - 1] + c0;
        p1[k] = p1[k - 1] + c1;
    }
    let (p0t, p1t) = (p0[xw.len() - 1], p1[xw.len() - 1]);
    let moments = |x: f64| -> (f64, f64) {
        if x <= a {
            return (0.0, 0.0);
        }
        if x >= b {
            return (p0t, p1t);
        }
        let k = xw.partition_point(|&v| v <= x).clamp(1, xw.len() - 1);
        let (c0, c1) = cell(xw[k - 1], x, fw[k - 1], wbar.eval(x));
        (p0[k - 1] + c0, p1[k - 1] + c1)
    };

    let xs = symmetric_grid(l, n_samples);
    let mut values = Vec::with_capacity(xs.len());
    let mut derivative = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (q0, q1) = moments(x);
        let left = (x - l) * (q1 + l * q0);
        let right = (x + l) * ((p1t - q1) - l * (p0t - q0));
        values.push((left + right) / (2.0 * l));
        derivative.push(q0 + (p1t - l * p0t) / (2.0 * l));
    }
    let gradient_sup = derivative.iter().fold(0.0, |m: f64, v| m.max(v.abs()));

    let dx = xs[1] - xs[0];
    let scale = if wbar.sup() > 0.0 { wbar.sup() } else { 1.0 };
    let mut poisson_residual = 0.0f64;
    for i in 1..xs.len() - 1 {
        let (lo, hi) = (xs[i - 1], xs[i + 1]);
        if (a > lo && a < hi) || (b > lo && b < hi) {
            continue;
        }
        let d2 = (values[i - 1] - 2.0 * values[i] + values[i + 1]) / (dx * dx);
        poisson_residual = poisson_residual.max((d2 - wbar.eval(xs[i])).abs() / scale);
    }

    let probes: Vec<f64> = (0..17)
        .map(|i| -l + 2.0 * l * i as f64 / 16.0 + 0.01 * l * (i % 3) as f64)
        .collect();
    let mut green_symmetry = 0.0f64;
    for &p in &probes {
        for &q in &probes {
            green_symmetry = green_symmetry.max((green(p, q, l) - green(q, p, l)).abs());
        }
    }

    let theta_values: Vec<f64> = xs.iter().map(|&x| smooth_step(x.abs(), mu, l)).collect();
    let boundary = values[0].abs() + values[values.len() - 1].abs();
    Ok(HBar {
        length: l,
        h: LineFunction::new(xs.clone(), values)?,
        derivative,
        gradient_sup,
        wbar_l1: wbar.l1_norm(),
        poisson_residual,
        green_symmetry,
        boundary,
        theta_bar: LineFunction::new(xs, theta_values)?,
        theta_boundary: (smooth_step(mu, mu, l) - 1.0).abs() + smooth_step(l, mu, l).abs(),
    })
}

/// Samples of `Γ(x₁)` on the condensate grid.
#[derive(Debug, Clone, Serialize)]
pub struct GammaProfile {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub l2_norm: f64,
    /// `N ‖|Φ|²∗w̄ − |Φ|² ∫w̄‖₂`.
    pub longitudinal_l2: f64,
    /// `N ‖|Φ|²‖₂ |∫w̄ − ‖w‖₁∫|χ^ε|⁴|`.
    pub transverse_l2: f64,
    pub confinement_ratio: f64,
    pub wbar_l1: f64,
    pub contact_l1: f64,
}

/// `Γ(x₁) = N [(|Φ|² ∗ w̄)(x₁) − |Φ(x₁)|² ‖w_β‖₁ ∫|χ^ε|⁴]`.
///
/// This is the transverse integral of `|φ^ε|²∗w_β − |φ^ε|²‖w_β‖₁` against
/// `|χ^ε|²`; the convolution runs in Fourier space on the periodic grid.
pub fn discrepancy_gamma(
    w: &ScaledInteraction,
    condensate: &CondensateState,
    chi: &RescaledMode,
) -> Result<GammaProfile> {
    let q = QuasiOneD::new(&RadialDensity::from_scaled(w), chi, 65)?;
    gamma_from(&q, w.point.n(), w.point.confinement_ratio(), condensate)
}

fn gamma_from(
    q: &QuasiOneD,
    n: f64,
    ratio: f64,
    condensate: &CondensateState,
) -> Result<GammaProfile> {
    let grid: PeriodicGrid = condensate.grid;
    if q.range() >= 0.5 * grid.length {
        return Err(domain(
            "box",
            "interaction range must be below half the box",
        ));
    }
    let m = grid.points;
    let dens: Vec<f64> = condensate.values.iter().map(|z| z.norm_sqr()).collect();
    let ks = grid.wavenumbers();
    let what = q.fourier(&ks)?;
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = dens.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut buf);
    buf.iter_mut()
        .zip(&what)
        .for_each(|(z, w)| *z *= w / m as f64);
    planner.plan_fft_inverse(m).process(&mut buf);
    let dx = grid.spacing();
    let mut values = Vec::with_capacity(m);
    let (mut l2, mut long, mut dens2) = (0.0, 0.0, 0.0);
    for (z, &p) in buf.iter().zip(&dens) {
        let g = n * (z.re - p * q.contact_l1);
        values.push(g);
        l2 += g * g;
        long += (n * (z.re - p * q.l1_norm)).powi(2);
        dens2 += p * p;
    }
    Ok(GammaProfile {
        xs: grid.xs(),
        values,
        l2_norm: (l2 * dx).sqrt(),
        longitudinal_l2: (long * dx).sqrt(),
        transverse_l2: n * (dens2 * dx).sqrt() * (q.l1_norm - q.contact_l1).abs(),
        confinement_ratio: ratio,
        wbar_l1: q.l1_norm,
        contact_l1: q.contact_l1,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaFit {
    pub rows: Vec<GammaProfileSummary>,
    pub fit: PowerFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaProfileSummary {
    pub n_particles: u64,
    pub epsilon: f64,
    pub mu: f64,
    pub confinement_ratio: f64,
    pub l2_norm: f64,
    pub longitudinal_l2: f64,
    pub transverse_l2: f64,
}

/// `‖Γ‖₂` along a sequence, regressed against `μ/ε`.
pub fn gamma_scaling_fit(
    points: &[ScalingPoint],
    profile: &InteractionProfile,
    confinement: &ConfinementPotential,
    grid: &TransverseGrid,
    condensate: &CondensateState,
) -> Result<GammaFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need >= 4 scaling points, got {}",
            points.len()
        )));
    }
    let mode = solve_ground(confinement, grid)?;
    let rows: Vec<GammaProfileSummary> = points
        .par_iter()
        .map(|p| {
            let w = scale(profile, p);
            let chi = rescale(&mode, p.epsilon)?;
            let g = discrepancy_gamma(&w, condensate, &chi)?;
            Ok(GammaProfileSummary {
                n_particles: p.n_particles,
                epsilon: p.epsilon,
                mu: p.mu,
                confinement_ratio: p.confinement_ratio(),
                l2_norm: g.l2_norm,
                longitudinal_l2: g.longitudinal_l2,
                transverse_l2: g.transverse_l2,
            })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.confinement_ratio).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.l2_norm).collect();
    let fit = fit_power_law(&x, &y)?;
    Ok(GammaFit { rows, fit })
}

/// Inputs of the auxiliary verification battery.
#[derive(Debug, Clone)]
pub struct AuxiliaryConfig {
    pub point: ScalingPoint,
    pub profile: InteractionProfile,
    pub confinement: ConfinementPotential,
    pub transverse_grid: TransverseGrid,
    pub beta1: f64,
    pub samples: usize,
    /// `N` values for the gradient and `Γ` fits along `ε = N^{-γ}`.
    pub fit_particles: Vec<u64>,
    /// `(β, γ)` of the gradient fit; `β = 1/2` makes `N⁻¹μ⁻²ε²` constant.
    pub gradient_family: (f64, f64),
    /// `(β, γ)` of the `Γ` fit.
    pub gamma_family: (f64, f64),
}

impl AuxiliaryConfig {
    pub fn new(point: ScalingPoint) -> Self {
        Self {
            point,
            profile: InteractionProfile::uniform_ball(3),
            confinement: ConfinementPotential::harmonic(2),
            transverse_grid: TransverseGrid::default_for(2),
            beta1: 0.5 * point.beta,
            samples: 4096,
            fit_particles: vec![1_000, 10_000, 100_000, 1_000_000],
            gradient_family: (0.75, 0.5),
            gamma_family: (0.5, 1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxiliaryReport {
    pub checks: Vec<Check>,
    pub gradient_fit: Option<GradientFit>,
    pub gamma_fit: Option<GammaFit>,
}

impl AuxiliaryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.hard)
    }
}

/// Closed form of `h_ε` for `w = c·1_{|z|≤μ}` in three dimensions.
pub fn uniform_ball_h(c: f64, mu: f64, epsilon: f64, r: f64) -> f64 {
    let charge = 4.0 * PI / 3.0 * c * mu.powi(3);
    if r <= mu {
        c * (r * r - mu * mu) / 6.0 - charge / (4.0 * PI) * (1.0 / mu - 1.0 / epsilon)
    } else if r < epsilon {
        -charge / (4.0 * PI) * (1.0 / r - 1.0 / epsilon)
    } else {
        0.0
    }
}

/// Runs every auxiliary construction and compares it with its stated bound.
///
/// Errors from the configured point (for example `μ ≥ ε`) are recorded as
/// failed checks rather than aborting the battery.
pub fn battery(cfg: &AuxiliaryConfig) -> AuxiliaryReport {
    let mut checks = Vec::new();
    let module = "auxiliary";

    // closed-form uniform ball
    match closed_form_checks(cfg.samples) {
        Ok(mut c) => checks.append(&mut c),
        Err(e) => checks.push(Check::error(module, "h_epsilon_closed_form", &e)),
    }

    // smooth step
    let box_l = 1.0;
    let mid = smooth_step(0.5 * (0.25 + box_l), 0.25, box_l);
    checks.push(Check::new(module, "theta_midpoint", (mid - 0.5).abs(), 0.0));

    // h̄ on a box with known wing slope
    let (cbar, l) = (0.7, cfg.point.n().powf(-cfg.beta1));
    let a = 0.3 * l;
    match LineFunction::from_fn(a, 257, |_| cbar)
        .and_then(|wb| build_h_bar(&wb, cfg.beta1, cfg.point.n(), 0.1 * a, 1025))
    {
        Ok(hb) => {
            checks.push(Check::new(
                module,
                "hbar_wing_slope",
                (hb.gradient_sup - cbar * a).abs() / (cbar * a),
                1e-8,
            ));
            checks.push(Check::new(module, "hbar_boundary", hb.boundary, 1e-10));
        }
        Err(e) => checks.push(Check::error(module, "hbar_wing_slope", &e)),
    }

    // gradient scaling along the power-law family
    let gradient_fit = ScalingSequence::power_law(
        cfg.gradient_family.0,
        cfg.gradient_family.1,
        &cfg.fit_particles,
    )
    .and_then(|seq| {
        gradient_scaling_fit(
            seq.points(),
            &InteractionProfile::uniform_ball(3),
            cfg.samples,
        )
    });
    match &gradient_fit {
        Ok(f) => {
            checks.push(Check::new(
                module,
                "gradient_sup_slope",
                (f.sup.slope - 1.0).abs(),
                0.15,
            ));
            checks.push(Check::new(
                module,
                "gradient_l2_slope",
                (f.l2.slope - 1.0).abs(),
                0.15,
            ));
        }
        Err(e) => checks.push(Check::error(module, "gradient_slopes", e)),
    }

    // configured point
    match point_checks(cfg) {
        Ok(mut c) => checks.append(&mut c),
        Err(e) => checks.push(Check::error(module, "configured_point", &e)),
    }

    let gamma_fit =
        ScalingSequence::power_law(cfg.gamma_family.0, cfg.gamma_family.1, &cfg.fit_particles)
            .and_then(|seq| {
                let box_grid = PeriodicGrid::new(2.0 * PI, 128)?;
                let phi = CondensateState::from_fn(box_grid, |x| {
                    Complex64::new(1.0 + 0.5 * x.cos(), 0.0)
                })?;
                gamma_scaling_fit(
                    seq.points(),
                    &cfg.profile,
                    &cfg.confinement,
                    &cfg.transverse_grid,
                    &phi,
                )
            });
    match &gamma_fit {
        Ok(f) => checks.push(Check::reported(
            module,
            "gamma_slope_vs_confinement_ratio",
            f.fit.slope,
        )),
        Err(e) => checks.push(Check::error(module, "gamma_slope_vs_confinement_ratio", e)),
    }

    AuxiliaryReport {
        checks,
        gradient_fit: gradient_fit.ok(),
        gamma_fit: gamma_fit.ok(),
    }
}

fn closed_form_checks(samples: usize) -> Result<Vec<Check>> {
    let module = "auxiliary";
    let (c, mu, eps) = (1.0, 0.1, 1.0);
    let w = RadialDensity::uniform_ball(3, c, mu)?;
    let h = h_epsilon(&w, eps, samples)?;
    let peak = h.h.sup();
    let dev =
        h.h.radii
            .iter()
            .zip(&h.h.values)
            .map(|(&r, &v)| (v - uniform_ball_h(c, mu, eps, r)).abs())
            .fold(0.0, f64::max)
            / peak;
    let coarse = verify_poisson(&h.h, &w)?;
    let smooth = poisson_order_density(mu)?;
    let r1 = verify_poisson(&h_epsilon(&smooth, eps, 1024)?.h, &smooth)?;
    let r2 = verify_poisson(&h_epsilon(&smooth, eps, 2048)?.h, &smooth)?;
    let order = (r1.max_residual / r2.max_residual).log2();
    let th = theta(mu, eps, 3, samples)?;
    Ok(vec![
        Check::new(module, "h_epsilon_closed_form", dev, 1e-6),
        Check::new(
            module,
            "h_epsilon_gradient_sup",
            (h.gradient_sup - c * mu / 3.0).abs() / (c * mu / 3.0),
            1e-6,
        ),
        Check::new(module, "poisson_residual", coarse.max_residual, 1e-4),
        Check::new(module, "poisson_order", (order - 2.0).abs(), 0.3),
        Check::new(module, "h_epsilon_boundary", coarse.boundary, 1e-10),
        Check::new(module, "theta_boundary", th.boundary, 1e-10),
        Check::new(
            module,
            "theta_gradient_sup_times_eps",
            th.gradient_sup_scaled,
            3.0,
        ),
    ])
}

/// A cut Gaussian: unlike the uniform ball its `h_ε` is not differenced
/// exactly, so the stencil's order is visible.
fn poisson_order_density(mu: f64) -> Result<RadialDensity> {
    Ok(RadialDensity {
        dim: 3,
        mu,
        amplitude: 1.0,
        profile: InteractionProfile::new(
            RadialShape::GaussianBump {
                height: 1.0,
                sigma: 0.3,
            },
            1.0,
            3,
        )?,
    })
}

fn point_checks(cfg: &AuxiliaryConfig) -> Result<Vec<Check>> {
    let module = "auxiliary";
    let p = &cfg.point;
    let w = scale(&cfg.profile, p);
    let density = RadialDensity::from_scaled(&w);
    let h = h_epsilon(&density, p.epsilon, cfg.samples)?;
    let poisson = verify_poisson(&h.h, &density)?;
    let th = theta(p.mu, p.epsilon, density.dim, cfg.samples)?;
    let mode = solve_ground(&cfg.confinement, &cfg.transverse_grid)?;
    let chi = rescale(&mode, p.epsilon)?;
    let q = QuasiOneD::new(&density, &chi, 513)?;
    let hb = build_h_bar(&q.line, cfg.beta1, p.n(), p.mu, 4097)?;
    let nonneg = if density.profile.shape_nonnegative() {
        q.line.values.iter().fold(0.0, |m: f64, v| m.max(-v))
    } else {
        0.0
    };
    let l1_scale = q.l1_norm.abs().max(f64::MIN_POSITIVE);
    Ok(vec![
        Check::new(module, "point_poisson_residual", poisson.max_residual, 1e-3),
        Check::new(module, "point_h_epsilon_boundary", poisson.boundary, 1e-10),
        Check::reported(
            module,
            "point_gradient_sup_constant",
            h.gradient_sup * p.n() * p.mu * p.mu / (p.epsilon * p.epsilon),
        ),
        Check::reported(
            module,
            "point_gradient_l2_constant",
            h.gradient_l2 * p.n() * p.mu.sqrt() / (p.epsilon * p.epsilon),
        ),
        Check::new(module, "point_theta_boundary", th.boundary, 1e-10),
        Check::new(
            module,
            "point_theta_gradient_sup_times_eps",
            th.gradient_sup_scaled,
            3.0,
        ),
        Check::reported(
            module,
            "point_theta_gradient_l2_scaled",
            th.gradient_l2_scaled,
        ),
        Check::new(module, "wbar_evenness", q.line.evenness_residual(), 1e-10),
        Check::new(module, "wbar_nonnegative", nonneg, 0.0),
        Check::new(
            module,
            "wbar_l1_consistency",
            (q.l1_norm - q.l1_marginal).abs() / l1_scale,
            1e-8,
        ),
        Check::reported(module, "wbar_l1_times_n", q.l1_norm * p.n()),
        Check::new(module, "hbar_boundary_point", hb.boundary, 1e-10),
        Check::new(
            module,
            "hbar_gradient_vs_wbar_l1",
            hb.gradient_sup / hb.wbar_l1.max(f64::MIN_POSITIVE),
            1.0,
        ),
        Check::new(module, "green_symmetry", hb.green_symmetry, 1e-12),
        Check::new(module, "theta_bar_boundary", hb.theta_boundary, 1e-10),
        Check::reported(module, "hbar_poisson_residual", hb.poisson_residual),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transverse::Stencil;
    use proptest::prelude::*;

    fn smooth_bump(mu: f64) -> RadialDensity {
        poisson_order_density(mu).unwrap()
    }

    fn gaussian_chi(eps: f64) -> RescaledMode {
        let grid = TransverseGrid::new(1, 10.0, 0.01, Stencil::Fourth).unwrap();
        let mode = solve_ground(&ConfinementPotential::harmonic(1), &grid).unwrap();
        rescale(&mode, eps).unwrap()
    }

    #[test]
    fn uniform_ball_matches_closed_form() {
        let w = RadialDensity::uniform_ball(3, 1.0, 0.1).unwrap();
        let h = h_epsilon(&w, 1.0, 4096).unwrap();
        assert!(
            (h.h.values[0] - (-0.0046667)).abs() < 1e-7,
            "{}",
            h.h.values[0]
        );
        assert!((h.h.values[0] - uniform_ball_h(1.0, 0.1, 1.0, 0.0)).abs() < 1e-15);
        assert_eq!(h.h.boundary_value(), 0.0);
        assert!((h.gradient_sup - 0.1 / 3.0).abs() < 1e-12);
        for (&r, &v) in h.h.radii.iter().zip(&h.h.values) {
            assert!((v - uniform_ball_h(1.0, 0.1, 1.0, r)).abs() < 1e-12);
        }
        assert_eq!(h.h.eval(1.5), 0.0);
    }

    #[test]
    fn gradient_l2_matches_closed_form() {
        let (c, mu, eps) = (2.0, 0.05, 0.5);
        let w = RadialDensity::uniform_ball(3, c, mu).unwrap();
        let h = h_epsilon(&w, eps, 1025).unwrap();
        let m = c * mu.powi(3) / 3.0;
        let exact =
            (4.0 * PI * (c * c / 9.0 * mu.powi(5) / 5.0 + m * m * (1.0 / mu - 1.0 / eps))).sqrt();
        assert!((h.gradient_l2 - exact).abs() < 1e-10 * exact);
    }

    /// Image-charge formula with the angular integrals done numerically.
    fn image_charge_direct(c: f64, mu: f64, eps: f64, r: f64) -> f64 {
        let shell = |s: f64, target: f64| -> f64 {
            let f = |t: f64| {
                2.0 * PI * t.sin() / (target * target + s * s - 2.0 * target * s * t.cos()).sqrt()
            };
            integrate(f, 0.0, PI, 1e-13, 1e-11).unwrap().value
        };
        let direct = integrate_pieces(
            |s| c * s * s * shell(s, r),
            &[0.0, r.min(mu), mu],
            1e-14,
            1e-10,
        )
        .unwrap()
        .value;
        let image = integrate(
            |s| c * s * s * (eps / s) * shell(eps * eps / s, r),
            1e-12,
            mu,
            1e-14,
            1e-10,
        )
        .unwrap()
        .value;
        -(direct - image) / (4.0 * PI)
    }

    #[test]
    fn shell_form_agrees_with_image_charge_quadrature() {
        let (c, mu, eps) = (1.0, 0.1, 1.0);
        let h = h_epsilon(&RadialDensity::uniform_ball(3, c, mu).unwrap(), eps, 2048).unwrap();
        for r in [0.03, 0.1, 0.37, 0.8] {
            let direct = image_charge_direct(c, mu, eps, r);
            assert!(
                (h.h.eval(r) - direct).abs() < 1e-6 * h.h.sup(),
                "r={r}: {} vs {direct}",
                h.h.eval(r)
            );
        }
    }

    #[test]
    fn two_dimensional_solution_is_logarithmic_outside() {
        let (c, mu, eps) = (1.0, 0.1, 1.0);
        let h = h_epsilon(&RadialDensity::uniform_ball(2, c, mu).unwrap(), eps, 2048).unwrap();
        let m = c * mu * mu / 2.0;
        for (&r, &v) in h.h.radii.iter().zip(&h.h.values).filter(|(&r, _)| r > mu) {
            assert!((v + m * (eps / r).ln()).abs() < 1e-13);
        }
        let inside = c * (0.0 - mu * mu) / 4.0 - m * (eps / mu).ln();
        assert!((h.h.values[0] - inside).abs() < 1e-12);
    }

    #[test]
    fn regime_error_when_mu_reaches_epsilon() {
        let w = RadialDensity::uniform_ball(3, 1.0, 1.0).unwrap();
        assert!(matches!(h_epsilon(&w, 1.0, 128), Err(Error::Regime(_))));
        assert!(matches!(theta(0.2, 0.1, 3, 64), Err(Error::Regime(_))));
    }

    #[test]
    fn poisson_residual_uniform_ball() {
        // 1/r outside and r² inside are differenced without leading error,
        // so only rounding is left
        let w = RadialDensity::uniform_ball(3, 1.0, 0.1).unwrap();
        let r = verify_poisson(&h_epsilon(&w, 1.0, 4096).unwrap().h, &w).unwrap();
        assert!(r.max_residual < 1e-4);
        assert_eq!(r.boundary, 0.0);
    }

    #[test]
    fn poisson_residual_is_second_order() {
        let w = smooth_bump(0.1);
        let r1 = verify_poisson(&h_epsilon(&w, 1.0, 1024).unwrap().h, &w).unwrap();
        let r2 = verify_poisson(&h_epsilon(&w, 1.0, 2048).unwrap().h, &w).unwrap();
        let ratio = r1.max_residual / r2.max_residual;
        assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
    }

    #[test]
    fn zero_interaction_gives_zero() {
        let w = RadialDensity {
            dim: 3,
            mu: 0.1,
            amplitude: 1.0,
            profile: InteractionProfile::zero(3),
        };
        let h = h_epsilon(&w, 1.0, 256).unwrap();
        assert!(h.h.values.iter().all(|&v| v == 0.0));
        assert_eq!(verify_poisson(&h.h, &w).unwrap().max_residual, 0.0);
    }

    #[test]
    fn too_few_samples_across_mu_is_reported() {
        let w = RadialDensity::uniform_ball(3, 1.0, 0.001).unwrap();
        let h = h_epsilon(&w, 1.0, 40).unwrap();
        // the half-and-half grid always puts half the samples inside the support
        assert!(verify_poisson(&h.h, &w).is_ok());
        let coarse = RadialFunction {
            radii: (0..64).map(|i| i as f64 / 63.0).collect(),
            ..h.h.clone()
        };
        assert!(matches!(
            verify_poisson(&coarse, &w),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn gradient_slopes_along_power_law() {
        let seq =
            ScalingSequence::power_law(0.75, 0.5, &[1_000, 10_000, 100_000, 1_000_000]).unwrap();
        let f =
            gradient_scaling_fit(seq.points(), &InteractionProfile::uniform_ball(3), 2048).unwrap();
        assert!((f.sup.slope - 1.0).abs() < 1e-6, "{:?}", f.sup);
        assert!((f.sup.constant - 1.0 / 3.0).abs() < 1e-6);
        assert!((f.l2.slope - 1.0).abs() < 0.15, "{:?}", f.l2);
    }

    #[test]
    fn gradient_sup_is_constant_at_beta_one_half() {
        // N⁻¹μ⁻²ε² ≡ 1 when β = 1/2, whatever ε is
        let seq =
            ScalingSequence::power_law(0.5, 1.0, &[1_000, 10_000, 100_000, 1_000_000]).unwrap();
        for p in seq.points() {
            let h = build_h_epsilon(
                &scale(&InteractionProfile::uniform_ball(3), p),
                p.epsilon,
                1024,
            )
            .unwrap();
            assert!((h.gradient_sup - 1.0 / 3.0).abs() < 1e-9);
        }
        let err = gradient_scaling_fit(seq.points(), &InteractionProfile::uniform_ball(3), 1024);
        assert!(matches!(err, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn gradient_fit_refuses_short_or_degenerate_input() {
        let p = ScalingPoint::new(1000, 1e-3, 0.5).unwrap();
        let prof = InteractionProfile::uniform_ball(3);
        assert!(matches!(
            gradient_scaling_fit(&[p; 3], &prof, 256),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            gradient_scaling_fit(&[p; 4], &prof, 256),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn theta_endpoints_and_midpoint() {
        for (mu, eps) in [(1e-3, 1e-1), (0.1, 1.0), (0.3, 0.7)] {
            assert_eq!(smooth_step(mu, mu, eps), 1.0);
            assert_eq!(smooth_step(eps, mu, eps), 0.0);
            assert_eq!(smooth_step(0.5 * (mu + eps), mu, eps), 0.5);
        }
        let th = theta(0.1, 1.0, 3, 512).unwrap();
        assert_eq!(th.midpoint_value, 0.5);
        assert_eq!(th.boundary, 0.0);
        // the steepest slope is 2/(ε−μ) at the midpoint
        assert!((th.gradient_sup - 2.0 / 0.9).abs() < 1e-9);
    }

    #[test]
    fn theta_gradient_scalings_over_a_decade() {
        let mu = 1e-3;
        for eps in [1e-1, 3e-2, 1e-2] {
            let th = theta(mu, eps, 3, 1024).unwrap();
            assert!(th.gradient_sup_scaled <= 3.0, "{}", th.gradient_sup_scaled);
            assert!(th.gradient_l2_scaled < 10.0);
        }
    }

    #[test]
    fn theta_derivative_matches_differences() {
        let (mu, eps) = (0.2, 1.0);
        for x in [0.25, 0.4, 0.6, 0.9] {
            let h = 1e-6;
            let fd = (smooth_step(x + h, mu, eps) - smooth_step(x - h, mu, eps)) / (2.0 * h);
            assert!((fd - smooth_step_derivative(x, mu, eps)).abs() < 1e-7);
        }
    }

    #[test]
    fn wbar_matches_independent_nested_quadrature() {
        let eps = 0.5;
        let chi = gaussian_chi(eps);
        let (c, mu) = (3.0, 0.05);
        let w = RadialDensity::uniform_ball(2, c, mu).unwrap();
        let q = QuasiOneD::new(&w, &chi, 129).unwrap();
        let dens = |y: f64| (-y * y / (eps * eps)).exp() / (PI.sqrt() * eps);
        let oracle_at = |x: f64| -> f64 {
            let half = (mu * mu - x * x).sqrt();
            let inner = |y1: f64| {
                integrate(|y2| dens(y2), y1 - half, y1 + half, 1e-16, 1e-13)
                    .unwrap()
                    .value
            };
            integrate(
                |y1| c * dens(y1) * inner(y1),
                -12.0 * eps,
                12.0 * eps,
                1e-16,
                1e-13,
            )
            .unwrap()
            .value
        };
        for x in [0.0, 0.02, 0.045] {
            let ours = q.eval(x).unwrap();
            let oracle = oracle_at(x);
            assert!(
                (ours - oracle).abs() < 1e-6 * oracle,
                "x={x}: {ours} vs {oracle}"
            );
        }
        assert!((q.line.eval(0.0) - oracle_at(0.0)).abs() < 1e-6 * oracle_at(0.0));
    }

    #[test]
    fn wbar_is_even_nonnegative_and_consistent() {
        let eps = 0.3;
        let chi = gaussian_chi(eps);
        let w = RadialDensity {
            dim: 2,
            mu: 0.04,
            amplitude: 5.0,
            profile: InteractionProfile::new(
                RadialShape::GaussianBump {
                    height: 1.0,
                    sigma: 0.4,
                },
                1.0,
                2,
            )
            .unwrap(),
        };
        let q = QuasiOneD::new(&w, &chi, 257).unwrap();
        assert!(q.line.evenness_residual() < 1e-10);
        assert!(q.line.values.iter().all(|&v| v >= 0.0));
        assert!(
            (q.l1_norm - q.l1_marginal).abs() < 1e-8 * q.l1_norm,
            "{} vs {}",
            q.l1_norm,
            q.l1_marginal
        );
        // μ ≪ ε: the transverse average is close to its contact limit
        assert!((q.l1_norm / q.contact_l1 - 1.0).abs() < 0.05);
        assert!(q.line.xs.iter().all(|x| x.abs() <= w.range()));
    }

    #[test]
    fn wbar_in_two_transverse_dimensions() {
        let eps = 0.2;
        let grid = TransverseGrid::default_for(2);
        let mode = solve_ground(&ConfinementPotential::harmonic(2), &grid).unwrap();
        let chi = rescale(&mode, eps).unwrap();
        let w = RadialDensity::uniform_ball(3, 1.0, 0.02).unwrap();
        let q = QuasiOneD::new(&w, &chi, 65).unwrap();
        assert!((q.l1_norm - q.l1_marginal).abs() < 1e-8 * q.l1_norm);
        assert!((q.l1_norm / q.contact_l1 - 1.0).abs() < 0.02);
        assert!(q.line.evenness_residual() == 0.0);
    }

    #[test]
    fn zero_interaction_gives_zero_wbar() {
        let chi = gaussian_chi(0.5);
        let w = RadialDensity {
            dim: 2,
            mu: 0.05,
            amplitude: 1.0,
            profile: InteractionProfile::zero(2),
        };
        let q = QuasiOneD::new(&w, &chi, 33).unwrap();
        assert!(q.line.values.iter().all(|&v| v == 0.0));
        assert_eq!(q.l1_norm, 0.0);
    }

    #[test]
    fn unresolved_transverse_grid_is_refused() {
        let chi = gaussian_chi(0.01);
        let w = RadialDensity::uniform_ball(2, 1.0, 0.2).unwrap();
        assert!(matches!(
            QuasiOneD::new(&w, &chi, 33),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn hbar_box_closed_form() {
        let (cbar, a, n, beta1) = (0.7, 0.05, 100.0, 0.5);
        let l: f64 = 0.1;
        let wb = LineFunction::from_fn(a, 101, |_| cbar).unwrap();
        let hb = build_h_bar(&wb, beta1, n, 0.01, 2001).unwrap();
        assert!((hb.length - l).abs() < 1e-15);
        assert!((hb.gradient_sup - cbar * a).abs() < 1e-8 * cbar * a);
        assert_eq!(hb.boundary, 0.0);
        assert!(hb.gradient_sup <= hb.wbar_l1);
        assert!(hb.green_symmetry <= 1e-12);
        // c̄x²/2 + c̄a²/2 − c̄aL inside, c̄a(x − L) on the wings
        let h0 = cbar * a * a / 2.0 - cbar * a * l;
        assert!((hb.h.eval(0.0) - h0).abs() < 1e-12);
        let x = 0.08;
        assert!((hb.h.eval(x) - cbar * a * (x - l)).abs() < 1e-12);
        assert_eq!(hb.theta_boundary, 0.0);
        assert!(hb.theta_bar.evenness_residual() == 0.0);
    }

    #[test]
    fn hbar_poisson_residual_is_second_order() {
        let wb =
            LineFunction::from_fn(0.05, 40_001, |x| (1.0 - (x / 0.05).powi(2)).powi(3)).unwrap();
        let r1 = build_h_bar(&wb, 0.5, 100.0, 0.01, 257)
            .unwrap()
            .poisson_residual;
        let r2 = build_h_bar(&wb, 0.5, 100.0, 0.01, 513)
            .unwrap()
            .poisson_residual;
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio} ({r1:e}, {r2:e})");
    }

    #[test]
    fn hbar_support_violation_is_refused() {
        let wb = LineFunction::from_fn(0.2, 11, |_| 1.0).unwrap();
        assert!(matches!(
            build_h_bar(&wb, 0.5, 100.0, 0.01, 101),
            Err(Error::Domain { .. })
        ));
    }

    proptest! {
        #[test]
        fn hbar_gradient_bounded_by_wbar_l1(vals in proptest::collection::vec(-1.0f64..1.0, 9), a in 0.01f64..0.09) {
            let xs: Vec<f64> = (0..9).map(|i| -a + 2.0 * a * i as f64 / 8.0).collect();
            let wb = LineFunction::new(xs, vals).unwrap();
            let hb = build_h_bar(&wb, 0.5, 100.0, 0.005, 401).unwrap();
            prop_assert!(hb.gradient_sup <= hb.wbar_l1 * (1.0 + 1e-12));
            prop_assert!(hb.boundary <= 1e-10);
        }

        #[test]
        fn green_is_symmetric(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            prop_assert!((green(a, b, 1.0) - green(b, a, 1.0)).abs() <= 1e-12);
        }

        #[test]
        fn smooth_step_is_decreasing(x in 0.1f64..1.0, dx in 0.0f64..0.1) {
            prop_assert!(smooth_step(x + dx, 0.1, 1.0) <= smooth_step(x, 0.1, 1.0));
        }
    }

    #[test]
    fn battery_passes_at_a_moderate_point() {
        let p = ScalingPoint::new(10_000, 0.01, 0.5).unwrap();
        let report = battery(&AuxiliaryConfig::new(p));
        for c in &report.checks {
            assert!(c.passed || !c.hard, "{c:?}");
        }
        assert!(report.gradient_fit.is_some() && report.gamma_fit.is_some());
    }

    #[test]
    fn battery_surfaces_regime_error() {
        let mut p = ScalingPoint::new(10_000, 0.01, 0.5).unwrap();
        p.mu = 0.02;
        let report = battery(&AuxiliaryConfig::new(p));
        let bad = report
            .checks
            .iter()
            .find(|c| c.name == "configured_point")
            .unwrap();
        assert!(!bad.passed && bad.detail.as_deref().unwrap().contains("mu"));
        assert!(!report.passed());
    }

    #[test]
    fn plane_wave_gamma_is_flat_transverse_smearing() {
        let p = ScalingPoint::new(1000, 0.05, 0.5).unwrap();
        let prof = InteractionProfile::uniform_ball(2);
        let w = scale(&prof, &p);
        let chi = gaussian_chi(p.epsilon);
        let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let phi = CondensateState::plane_wave(grid, 1).unwrap();
        let g = discrepancy_gamma(&w, &phi, &chi).unwrap();
        let first = g.values[0];
        assert!(g
            .values
            .iter()
            .all(|v| (v - first).abs() < 1e-9 * first.abs()));
        assert!(g.longitudinal_l2 < 1e-10 * g.transverse_l2.max(1e-300));
        assert!((g.l2_norm - g.transverse_l2).abs() < 1e-9 * g.l2_norm);
        assert!(first < 0.0);
    }

    #[test]
    fn gamma_matches_second_order_expansion() {
        // harmonic χ^ε: ρ(u) = ρ(0) e^{-|u|²/2ε²}, so for the uniform ball
        // N(∫w̄ − ‖w‖₁∫|χ^ε|⁴) = −(2/15)(μ/ε)² to leading order
        let grid = TransverseGrid::default_for(2);
        let mode = solve_ground(&ConfinementPotential::harmonic(2), &grid).unwrap();
        let box_grid = PeriodicGrid::new(2.0 * PI, 128).unwrap();
        let phi = CondensateState::from_fn(box_grid, |x| Complex64::new(1.0 + 0.5 * x.cos(), 0.0))
            .unwrap();
        let dens_l2 = (2.0 * PI * (1.0 + 0.75 + 3.0 / 128.0)).sqrt() / (2.25 * PI);
        let p = ScalingPoint::new(100_000, 1e-5, 0.5).unwrap();
        let w = scale(&InteractionProfile::uniform_ball(3), &p);
        let g = discrepancy_gamma(&w, &phi, &rescale(&mode, p.epsilon).unwrap()).unwrap();
        let expected = 2.0 / 15.0 * p.confinement_ratio().powi(2) * dens_l2;
        assert!(
            (g.l2_norm / expected - 1.0).abs() < 1e-3,
            "{} vs {expected}",
            g.l2_norm
        );
    }

    #[test]
    fn gamma_decreases_with_mu_at_fixed_epsilon() {
        let eps = 0.05;
        let chi = gaussian_chi(eps);
        let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let phi =
            CondensateState::from_fn(grid, |x| Complex64::new(1.0 + 0.5 * x.cos(), 0.0)).unwrap();
        let mut last = f64::INFINITY;
        for n in [100u64, 1_000, 10_000, 100_000] {
            let p = ScalingPoint::new(n, eps, 0.5).unwrap();
            let w = scale(&InteractionProfile::uniform_ball(2), &p);
            let g = discrepancy_gamma(&w, &phi, &chi).unwrap();
            assert!(g.l2_norm < last, "N={n}: {} !< {last}", g.l2_norm);
            last = g.l2_norm;
        }
    }
}
