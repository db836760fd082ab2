//! The scaled pair interaction `w_β`, the external field `V∥` and the
//! transverse confinement `V⊥`.
//!
//! The physical model lives in three dimensions (one free, two confined).
//! Everything here is written for a total dimension `d = 1 + d⊥` with
//! `d⊥ ∈ {1, 2}`; for `d = 3` the formulas are exactly the physical ones,
//! for `d = 2` they are the surrogate used in the desk-scale N-body runs.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature;
use crate::scaling::ScalingPoint;

/// Unscaled radial shape `w(r)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialShape {
    Zero,
    /// `height` on `r ≤ support`.
    UniformBall {
        height: f64,
    },
    /// `height · exp(-r²/(2σ²))`, cut at the support radius.
    GaussianBump {
        height: f64,
        sigma: f64,
    },
    /// Piecewise-linear through `(r, w)` samples, zero beyond the last radius.
    Tabulated {
        r: Vec<f64>,
        w: Vec<f64>,
    },
}

impl RadialShape {
    fn eval(&self, r: f64) -> f64 {
        match self {
            RadialShape::Zero => 0.0,
            RadialShape::UniformBall { height } => *height,
            RadialShape::GaussianBump { height, sigma } => {
                height * (-r * r / (2.0 * sigma * sigma)).exp()
            }
            RadialShape::Tabulated { r: rs, w } => {
                if r < rs[0] {
                    return w[0];
                }
                match rs.partition_point(|&x| x <= r) {
                    i if i >= rs.len() => {
                        if r == rs[rs.len() - 1] {
                            w[w.len() - 1]
                        } else {
                            0.0
                        }
                    }
                    i => {
                        let (r0, r1) = (rs[i - 1], rs[i]);
                        let s = (r - r0) / (r1 - r0);
                        w[i - 1] * (1.0 - s) + w[i] * s
                    }
                }
            }
        }
    }

    pub(crate) fn breakpoints(&self, support: f64) -> Vec<f64> {
        match self {
            RadialShape::Tabulated { r, .. } => {
                let mut b = vec![0.0];
                b.extend(r.iter().copied().filter(|&x| x > 0.0 && x < support));
                b.push(support);
                b
            }
            _ => vec![0.0, support],
        }
    }
}

/// Surface measure of the unit sphere in `dim` dimensions.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Spherically symmetric profile `w` with compact support.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionProfile {
    pub shape: RadialShape,
    pub support_radius: f64,
    pub sup_bound: f64,
    /// `∫_{ℝ^d} w`.
    pub l1_norm: f64,
    pub dim: usize,
}

const DENSE_SAMPLES: usize = 20_001;

impl InteractionProfile {
    pub fn new(shape: RadialShape, support_radius: f64, dim: usize) -> Result<Self> {
        if !(support_radius > 0.0) {
            return Err(domain(
                "support_radius",
                format!("need > 0, got {support_radius}"),
            ));
        }
        if !(2..=3).contains(&dim) {
            return Err(domain(
                "dim",
                format!("total dimension must be 2 or 3, got {dim}"),
            ));
        }
        if let RadialShape::Tabulated { r, w } = &shape {
            if r.len() < 2 || r.len() != w.len() {
                return Err(domain(
                    "profile",
                    "tabulated profile needs >= 2 matching (r, w) rows",
                ));
            }
            if r.windows(2).any(|p| p[1] <= p[0]) || r[0] < 0.0 {
                return Err(domain(
                    "profile",
                    "tabulated radii must be non-negative and increasing",
                ));
            }
        }
        if let RadialShape::GaussianBump { sigma, .. } = &shape {
            if !(*sigma > 0.0) {
                return Err(domain("sigma", "Gaussian width must be positive"));
            }
        }
        let sup_bound = (0..DENSE_SAMPLES)
            .map(|i| {
                shape
                    .eval(support_radius * i as f64 / (DENSE_SAMPLES - 1) as f64)
                    .abs()
            })
            .fold(0.0, f64::max);
        let area = sphere_area(dim);
        let l1_norm = quadrature::integrate_pieces(
            |r| area * r.powi(dim as i32 - 1) * shape.eval(r),
            &shape.breakpoints(support_radius),
            1e-15,
            1e-12,
        )?
        .value;
        Ok(Self {
            shape,
            support_radius,
            sup_bound,
            l1_norm,
            dim,
        })
    }

    pub fn uniform_ball(dim: usize) -> Self {
        Self::new(RadialShape::UniformBall { height: 1.0 }, 1.0, dim).expect("valid built-in")
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(RadialShape::Zero, 1.0, dim).expect("valid built-in")
    }

    /// Reads a two-column CSV (`r,w`, header optional).
    pub fn from_csv(path: &Path, dim: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, dim)
    }

    pub fn from_csv_str(text: &str, dim: usize) -> Result<Self> {
        let mut r = Vec::new();
        let mut w = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Config(format!(
                        "profile line {}: expected `r,w`",
                        lineno + 1
                    )))
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    r.push(x);
                    w.push(y);
                }
                _ if lineno == 0 => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "profile line {}: not numeric",
                        lineno + 1
                    )))
                }
            }
        }
        let support = *r
            .last()
            .ok_or_else(|| Error::Config("empty profile table".into()))?;
        Self::new(RadialShape::Tabulated { r, w }, support, dim)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r > self.support_radius {
            0.0
        } else {
            self.shape.eval(r)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_bound == 0.0
    }

    pub fn shape_nonnegative(&self) -> bool {
        match &self.shape {
            RadialShape::Zero => true,
            RadialShape::UniformBall { height } | RadialShape::GaussianBump { height, .. } => {
                *height >= 0.0
            }
            RadialShape::Tabulated { w, .. } => w.iter().all(|&v| v >= 0.0),
        }
    }
}

/// `w_β(z) = amplitude · w(|z|/μ)`, normalised so that `∫w_β = ε^{d⊥} l1 / N`.
///
/// For `d = 3` the amplitude is `(N/ε²)^(-1+3β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledInteraction {
    pub point: ScalingPoint,
    pub profile: InteractionProfile,
    pub amplitude: f64,
    pub range: f64,
    /// `(N/ε^{d⊥}) · amplitude · μ^d`; exactly 1 for the power-law scaling.
    pub coupling_factor: f64,
}

pub fn scale(profile: &InteractionProfile, point: &ScalingPoint) -> ScaledInteraction {
    let d = profile.dim as i32;
    let amplitude = if d == 3 {
        point.density_scale.powf(-1.0 + 3.0 * point.beta)
    } else {
        point.epsilon.powi(d - 1) / point.n() * point.mu.powi(-d)
    };
    ScaledInteraction {
        point: *point,
        profile: profile.clone(),
        amplitude,
        range: point.mu * profile.support_radius,
        coupling_factor: 1.0,
    }
}

impl ScaledInteraction {
    pub fn dim(&self) -> usize {
        self.profile.dim
    }

    pub fn transverse_dim(&self) -> usize {
        self.profile.dim - 1
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.amplitude * self.profile.eval(r / self.point.mu)
    }

    /// `∫ w_β` from the change of variables.
    pub fn l1_norm(&self) -> f64 {
        self.amplitude * self.point.mu.powi(self.dim() as i32) * self.profile.l1_norm
    }

    /// `∫ w_β` by direct radial quadrature of the scaled function.
    pub fn l1_norm_quadrature(&self) -> Result<f64> {
        let d = self.dim();
        let area = sphere_area(d);
        let breaks: Vec<f64> = self
            .profile
            .shape
            .breakpoints(self.profile.support_radius)
            .iter()
            .map(|b| b * self.point.mu)
            .collect();
        let scale = self.l1_norm().abs().max(f64::MIN_POSITIVE);
        Ok(quadrature::integrate_pieces(
            |r| area * r.powi(d as i32 - 1) * self.eval(r),
            &breaks,
            1e-14 * scale,
            1e-12,
        )?
        .value)
    }

    /// Max of `|w_β|` over a dense radial sample of its support.
    pub fn sampled_sup(&self) -> f64 {
        (0..DENSE_SAMPLES)
            .map(|i| {
                self.eval(self.range * i as f64 / (DENSE_SAMPLES - 1) as f64)
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `b_{N,ε} = N ∫w_β ∫|χ^ε|⁴`, with `quartic = ∫|χ|⁴` for the unscaled mode.
pub fn coupling(scaled: &ScaledInteraction, quartic: f64) -> f64 {
    scaled.coupling_factor * scaled.profile.l1_norm * quartic
}

/// First-order Born approximation `a_β = ∫w_β / (8π)`.
pub fn born_length(scaled: &ScaledInteraction) -> f64 {
    scaled.l1_norm() / (8.0 * PI)
}

/// Hidden constants of the interaction-class conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyConstants {
    /// Allowed `sup|w_β| / reference amplitude`.
    pub sup_constant: f64,
    /// Allowed `support / μ`.
    pub support_constant: f64,
    /// Allowed `(N/ε²)^η |b_{N,ε} − b|`.
    pub coupling_tolerance: f64,
}

impl Default for FamilyConstants {
    fn default() -> Self {
        Self {
            sup_constant: 1e3,
            support_constant: 1.0,
            coupling_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub bounded: bool,
    pub nonnegative_radial: bool,
    pub compact_support: bool,
    pub coupling_converges: bool,
    pub sup_ratio: f64,
    pub support_ratio: f64,
    pub weighted_coupling_gap: f64,
}

impl FamilyReport {
    pub fn all_pass(&self) -> bool {
        self.bounded && self.nonnegative_radial && self.compact_support && self.coupling_converges
    }
}

/// Checks conditions (a)–(d) of the interaction class at one point.
pub fn validate_family(
    scaled: &ScaledInteraction,
    quartic: f64,
    eta: f64,
    b_limit: f64,
    constants: &FamilyConstants,
) -> FamilyReport {
    let p = &scaled.point;
    let d = scaled.dim() as i32;
    let reference = if d == 3 {
        p.density_scale.powf(-1.0 + 3.0 * p.beta)
    } else {
        p.epsilon.powi(d - 1) / p.n() * p.mu.powi(-d)
    };
    let sup_ratio = scaled.sampled_sup() / reference;
    let nonnegative_radial = (0..DENSE_SAMPLES)
        .all(|i| scaled.eval(scaled.range * i as f64 / (DENSE_SAMPLES - 1) as f64) >= 0.0);
    let support_ratio = scaled.range / p.mu;
    let gap = (coupling(scaled, quartic) - b_limit).abs();
    let weighted_coupling_gap = p.density_scale.powf(eta) * gap;
    FamilyReport {
        bounded: sup_ratio <= constants.sup_constant,
        nonnegative_radial,
        compact_support: support_ratio <= constants.support_constant * (1.0 + 1e-12),
        coupling_converges: weighted_coupling_gap <= constants.coupling_tolerance,
        sup_ratio,
        support_ratio,
        weighted_coupling_gap,
    }
}

pub type FieldFn = Arc<dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync>;

/// Possibly time-dependent external field `V∥(t, x, y)`.
#[derive(Clone)]
pub enum ExternalPotential {
    Zero,
    /// `a(t) cos(q x) + c (1 − e^{−|y|²})` with `a(t) = a₀ (1 + δ sin(ω t))`.
    CosineLattice {
        amplitude: f64,
        wavenumber: f64,
        drive: f64,
        drive_frequency: f64,
        transverse: f64,
    },
    /// `½ ω² x²`, only meaningful on a finite box.
    HarmonicX {
        omega: f64,
        box_half_length: f64,
    },
    Custom {
        eval: FieldFn,
        sup_norm: f64,
        time_derivative_sup: f64,
        transverse_gradient_sup: f64,
        time_dependent: bool,
    },
}

impl fmt::Debug for ExternalPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::CosineLattice {
                amplitude,
                wavenumber,
                drive,
                drive_frequency,
                transverse,
            } => write!(
                f,
                "CosineLattice(a={amplitude}, q={wavenumber}, δ={drive}, ω={drive_frequency}, c={transverse})"
            ),
            Self::HarmonicX { omega, .. } => write!(f, "HarmonicX(ω={omega})"),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl ExternalPotential {
    pub fn eval(&self, t: f64, x: f64, y: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::CosineLattice {
                amplitude,
                wavenumber,
                drive,
                drive_frequency,
                transverse,
            } => {
                let a = amplitude * (1.0 + drive * (drive_frequency * t).sin());
                let y2: f64 = y.iter().map(|v| v * v).sum();
                a * (wavenumber * x).cos() + transverse * (1.0 - (-y2).exp())
            }
            Self::HarmonicX { omega, .. } => 0.5 * omega * omega * x * x,
            Self::Custom { eval, .. } => eval(t, x, y),
        }
    }

    /// `V∥(t, (x, 0))`, the field seen by the effective 1D equation.
    pub fn on_axis(&self, t: f64, x: f64) -> f64 {
        self.eval(t, x, &[0.0, 0.0])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn is_time_dependent(&self) -> bool {
        match self {
            Self::CosineLattice {
                drive,
                drive_frequency,
                ..
            } => *drive != 0.0 && *drive_frequency != 0.0,
            Self::Custom { time_dependent, .. } => *time_dependent,
            _ => false,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::CosineLattice {
                amplitude,
                drive,
                transverse,
                ..
            } => amplitude.abs() * (1.0 + drive.abs()) + transverse.abs(),
            Self::HarmonicX {
                omega,
                box_half_length,
            } => 0.5 * omega * omega * box_half_length * box_half_length,
            Self::Custom { sup_norm, .. } => *sup_norm,
        }
    }

    pub fn time_derivative_sup(&self) -> f64 {
        match self {
            Self::CosineLattice {
                amplitude,
                drive,
                drive_frequency,
                ..
            } => (amplitude * drive * drive_frequency).abs(),
            Self::Custom {
                time_derivative_sup,
                ..
            } => *time_derivative_sup,
            _ => 0.0,
        }
    }

    pub fn transverse_gradient_sup(&self) -> f64 {
        match self {
            // max of 2|y| e^{-|y|²} is √2 e^{-1/2}
            Self::CosineLattice { transverse, .. } => {
                transverse.abs() * 2f64.sqrt() * (-0.5f64).exp()
            }
            Self::Custom {
                transverse_gradient_sup,
                ..
            } => *transverse_gradient_sup,
            _ => 0.0,
        }
    }

    /// `sup_{i,j,k} ‖∂_t^i ∂_{y_k}^j V∥‖_∞` at the level of the stored bounds.
    pub fn mixed_sup(&self) -> f64 {
        let mixed = match self {
            // ∂_t ∂_y vanishes for the lattice: the drive does not touch y
            Self::Custom {
                time_derivative_sup,
                transverse_gradient_sup,
                ..
            } => time_derivative_sup.max(*transverse_gradient_sup),
            _ => 0.0,
        };
        self.sup_norm()
            .max(self.time_derivative_sup())
            .max(self.transverse_gradient_sup())
            .max(mixed)
    }
}

pub type ConfinementFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Transverse confinement `V⊥(y)`; built-ins are bounded below.
#[derive(Clone)]
pub enum ConfinementPotential {
    /// `|y|² + shift`.
    Harmonic { dim: usize, shift: f64 },
    /// `−depth · exp(−|y|²/width²)`.
    GaussianWell { dim: usize, depth: f64, width: f64 },
    Custom {
        dim: usize,
        eval: ConfinementFn,
        lower_bound: f64,
    },
}

impl fmt::Debug for ConfinementPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Harmonic { dim, shift } => write!(f, "Harmonic(d={dim}, shift={shift})"),
            Self::GaussianWell { dim, depth, width } => {
                write!(f, "GaussianWell(d={dim}, depth={depth}, width={width})")
            }
            Self::Custom { dim, .. } => write!(f, "Custom(d={dim})"),
        }
    }
}

impl ConfinementPotential {
    pub fn harmonic(dim: usize) -> Self {
        Self::Harmonic { dim, shift: 0.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Harmonic { dim, .. }
            | Self::GaussianWell { dim, .. }
            | Self::Custom { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let y2: f64 = y.iter().map(|v| v * v).sum();
        match self {
            Self::Harmonic { shift, .. } => y2 + shift,
            Self::GaussianWell { depth, width, .. } => -depth * (-y2 / (width * width)).exp(),
            Self::Custom { eval, .. } => eval(y),
        }
    }

    /// A lower bound of `V⊥`, used to shift the transverse operator positive.
    pub fn lower_bound(&self) -> f64 {
        match self {
            Self::Harmonic { shift, .. } => *shift,
            Self::GaussianWell { depth, .. } => -depth.abs(),
            Self::Custom { lower_bound, .. } => *lower_bound,
        }
    }

    /// `sup (V⊥ − E₀)₋` over the given sample points.
    pub fn negative_part_bound(
        &self,
        energy0: f64,
        samples: impl Iterator<Item = Vec<f64>>,
    ) -> f64 {
        samples
            .map(|y| (energy0 - self.eval(&y)).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(n: u64, eps: f64, beta: f64) -> ScalingPoint {
        ScalingPoint::new(n, eps, beta).unwrap()
    }

    #[test]
    fn uniform_ball_l1() {
        let w = InteractionProfile::uniform_ball(3);
        assert!((w.l1_norm - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(w.sup_bound, 1.0);
        let w2 = InteractionProfile::uniform_ball(2);
        assert!((w2.l1_norm - PI).abs() < 1e-12);
    }

    #[test]
    fn scale_uniform_ball_example() {
        // N/ε² = 10⁶ with β = 1/2
        let p = point(10_000, 0.1, 0.5);
        let s = scale(&InteractionProfile::uniform_ball(3), &p);
        assert!((s.amplitude / 1e3 - 1.0).abs() < 1e-12);
        assert!((s.range / 1e-3 - 1.0).abs() < 1e-12);
        let expected = 4.0 * PI / 3.0 * 1e-6;
        assert!((s.l1_norm() / expected - 1.0).abs() < 1e-12);
        assert!((s.l1_norm_quadrature().unwrap() / expected - 1.0).abs() < 1e-8);
    }

    #[test]
    fn beta_one_third_amplitude_is_one() {
        for (n, eps) in [(10, 0.5), (1000, 0.01)] {
            let s = scale(
                &InteractionProfile::uniform_ball(3),
                &point(n, eps, 1.0 / 3.0),
            );
            assert!((s.amplitude - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_interaction() {
        let s = scale(&InteractionProfile::zero(3), &point(100, 0.1, 0.5));
        assert_eq!(s.sampled_sup(), 0.0);
        assert_eq!(coupling(&s, 0.3), 0.0);
        assert_eq!(born_length(&s), 0.0);
    }

    #[test]
    fn coupling_two_thirds_for_2d_harmonic_quartic() {
        let w = InteractionProfile::uniform_ball(3);
        let q = 1.0 / (2.0 * PI);
        let b1 = coupling(&scale(&w, &point(1000, 0.01, 0.5)), q);
        let b2 = coupling(&scale(&w, &point(100_000, 0.001, 0.5)), q);
        assert!((b1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((b1 - b2).abs() < 1e-12);
    }

    #[test]
    fn surrogate_coupling_is_invariant_too() {
        let w = InteractionProfile::uniform_ball(2);
        let q = 1.0 / (2.0 * PI).sqrt();
        let b1 = coupling(&scale(&w, &point(4, 0.25, 0.5)), q);
        let b2 = coupling(&scale(&w, &point(8, 0.125, 0.5)), q);
        assert!((b1 - PI * q).abs() < 1e-12 && (b1 - b2).abs() < 1e-12);
    }

    #[test]
    fn coupling_factor_matches_scaled_mass() {
        for (w, n, eps) in [(3, 1000, 0.01), (3, 1_000_000, 1e-6), (2, 64, 1.0 / 64.0)] {
            let s = scale(&InteractionProfile::uniform_ball(w), &point(n, eps, 0.5));
            let direct = s.point.n() * s.l1_norm() / eps.powi(w as i32 - 1);
            assert!((direct / (s.coupling_factor * s.profile.l1_norm) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn born_length_example() {
        let s = scale(
            &InteractionProfile::uniform_ball(3),
            &point(10_000, 0.1, 0.5),
        );
        assert!((born_length(&s) / (1e-6 / 6.0) - 1.0).abs() < 1e-12);
        let s2 = scale(
            &InteractionProfile::uniform_ball(3),
            &point(1_000_000, 0.01, 0.5),
        );
        let a1 = born_length(&s) * s.point.density_scale;
        let a2 = born_length(&s2) * s2.point.density_scale;
        assert!((a1 / a2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn family_conditions() {
        let p = point(1000, 0.05, 0.5);
        let q = 1.0 / (2.0 * PI);
        let w = InteractionProfile::uniform_ball(3);
        let b = w.l1_norm * q;
        let c = FamilyConstants::default();
        for eta in [0.5, 1.0, 2.0] {
            let r = validate_family(&scale(&w, &p), q, eta, b, &c);
            assert!(r.all_pass(), "{r:?}");
            assert_eq!(r.weighted_coupling_gap, 0.0);
        }
        let dip = InteractionProfile::new(
            RadialShape::Tabulated {
                r: vec![0.0, 0.5, 1.0],
                w: vec![1.0, -0.2, 0.0],
            },
            1.0,
            3,
        )
        .unwrap();
        assert!(!validate_family(&scale(&dip, &p), q, 1.0, dip.l1_norm * q, &c).nonnegative_radial);
        let wide =
            InteractionProfile::new(RadialShape::UniformBall { height: 1.0 }, 10.0, 3).unwrap();
        assert!(!validate_family(&scale(&wide, &p), q, 1.0, wide.l1_norm * q, &c).compact_support);
    }

    #[test]
    fn csv_profile_roundtrip() {
        let w = InteractionProfile::from_csv_str("r,w\n0,2\n0.5,2\n1,0\n", 3).unwrap();
        assert_eq!(w.eval(0.25), 2.0);
        assert_eq!(w.eval(0.75), 1.0);
        assert_eq!(w.eval(1.5), 0.0);
        // ∫ 4π r² w: 2·(4π/3)(1/8) + 4π ∫_{1/2}^1 r² · 4(1−r) dr
        let tail = 16.0 * PI * ((1.0 - 0.125) / 3.0 - (1.0 - 0.0625) / 4.0);
        let expected = 2.0 * 4.0 * PI / 3.0 / 8.0 + tail;
        assert!((w.l1_norm - expected).abs() < 1e-12);
        assert!(InteractionProfile::from_csv_str("r,w\n", 3).is_err());
    }

    #[test]
    fn external_bounds_hold_on_probes() {
        let v = ExternalPotential::CosineLattice {
            amplitude: 0.7,
            wavenumber: 2.0,
            drive: 0.3,
            drive_frequency: 5.0,
            transverse: 0.4,
        };
        let sup = v.sup_norm();
        for i in 0..200 {
            let t = 0.03 * i as f64;
            let x = -3.0 + 0.031 * i as f64;
            let y = [0.05 * i as f64 - 5.0, 0.02 * i as f64];
            assert!(v.eval(t, x, &y).abs() <= sup + 1e-12);
        }
        assert!(v.is_time_dependent());
    }
}
