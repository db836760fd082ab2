//! Scaling points `(N, ε, β)`, sequences of them, and the convergence rate.
//!
//! The interaction range is `μ = (N/ε²)^(-β)`. A sequence is admissible when
//! `ε²/μ → 0` and moderately confining when `μ/ε → 0`; on finite data both
//! limits are replaced by a strict tail decrease plus a final threshold.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_particles: u64,
    pub epsilon: f64,
    pub beta: f64,
    pub mu: f64,
    pub density_scale: f64,
}

impl ScalingPoint {
    pub fn new(n_particles: u64, epsilon: f64, beta: f64) -> Result<Self> {
        if n_particles < 2 {
            return Err(domain(
                "n_particles",
                format!("need N >= 2, got {n_particles}"),
            ));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(domain(
                "epsilon",
                format!("need 0 < epsilon < 1, got {epsilon}"),
            ));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(domain("beta", format!("need 0 < beta < 1, got {beta}")));
        }
        let density_scale = n_particles as f64 / (epsilon * epsilon);
        let mu = density_scale.powf(-beta);
        if !(density_scale.is_finite() && mu > 0.0) {
            return Err(domain(
                "epsilon",
                format!(
                    "N/epsilon^2 is not representable for N={n_particles}, epsilon={epsilon:e}"
                ),
            ));
        }
        Ok(Self {
            n_particles,
            epsilon,
            beta,
            mu,
            density_scale,
        })
    }

    pub fn n(&self) -> f64 {
        self.n_particles as f64
    }

    /// `ε²/μ`, which must vanish along admissible sequences.
    pub fn admissibility_ratio(&self) -> f64 {
        self.epsilon * self.epsilon / self.mu
    }

    /// `μ/ε`, which must vanish along moderately confining sequences.
    pub fn confinement_ratio(&self) -> f64 {
        self.mu / self.epsilon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSequence {
    points: Vec<ScalingPoint>,
    gamma: Option<f64>,
}

impl ScalingSequence {
    pub fn new(points: Vec<ScalingPoint>) -> Result<Self> {
        Self::build(points, None)
    }

    fn build(points: Vec<ScalingPoint>, gamma: Option<f64>) -> Result<Self> {
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.beta != first.beta) {
                return Err(domain("beta", "all points of a sequence must share beta"));
            }
        }
        if points
            .windows(2)
            .any(|w| w[1].n_particles <= w[0].n_particles)
        {
            return Err(domain(
                "n_particles",
                "sequence must be strictly increasing in N",
            ));
        }
        Ok(Self { points, gamma })
    }

    /// The family `ε = N^(-γ)`.
    pub fn power_law(beta: f64, gamma: f64, ns: &[u64]) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(domain("gamma", format!("need gamma > 0, got {gamma}")));
        }
        let points = ns
            .iter()
            .map(|&n| ScalingPoint::new(n, (n as f64).powf(-gamma), beta))
            .collect::<Result<Vec<_>>>()?;
        Self::build(points, Some(gamma))
    }

    /// Explicit `(N, ε)` pairs.
    pub fn explicit(beta: f64, pairs: &[(u64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(n, eps)| ScalingPoint::new(n, eps, beta))
            .collect::<Result<Vec<_>>>()?;
        Self::build(points, None)
    }

    pub fn points(&self) -> &[ScalingPoint] {
        &self.points
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn beta(&self) -> Option<f64> {
        self.points.first().map(|p| p.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEvidence {
    pub n_particles: u64,
    pub admissibility_ratio: f64,
    pub confinement_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub admissible: bool,
    pub moderately_confining: bool,
    pub evidence: Vec<RatioEvidence>,
}

/// Finite-sequence proxy for a vanishing limit: strictly decreasing over
/// the tail and below `threshold` at the last point.
fn vanishes(values: &[f64], threshold: f64) -> bool {
    values.windows(2).all(|w| w[1] < w[0]) && values.last().is_some_and(|&v| v < threshold)
}

pub const DEFAULT_CLASSIFY_THRESHOLD: f64 = 0.5;

pub fn classify(seq: &ScalingSequence) -> Result<Classification> {
    classify_with_threshold(seq, DEFAULT_CLASSIFY_THRESHOLD)
}

pub fn classify_with_threshold(seq: &ScalingSequence, threshold: f64) -> Result<Classification> {
    if seq.points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "classification needs at least 3 points, got {}",
            seq.points.len()
        )));
    }
    let evidence: Vec<RatioEvidence> = seq
        .points
        .iter()
        .map(|p| RatioEvidence {
            n_particles: p.n_particles,
            admissibility_ratio: p.admissibility_ratio(),
            confinement_ratio: p.confinement_ratio(),
        })
        .collect();
    let adm: Vec<f64> = evidence.iter().map(|e| e.admissibility_ratio).collect();
    let conf: Vec<f64> = evidence.iter().map(|e| e.confinement_ratio).collect();
    Ok(Classification {
        admissible: vanishes(&adm, threshold),
        moderately_confining: vanishes(&conf, threshold),
        evidence,
    })
}

/// Open interval of exponents `γ` for which `ε = N^(-γ)` is admissible and
/// moderately confining. The upper end is `+∞` for `β ≥ 1/2`.
///
/// With `ε²/μ = N^(-2γ + β(1+2γ))` and `μ/ε = N^(γ - β(1+2γ))`, admissibility
/// needs `γ > β/(2-2β)` and moderate confinement `γ(1-2β) < β`.
pub fn power_law_window(beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain("beta", format!("need 0 < beta < 1, got {beta}")));
    }
    let lower = beta / (2.0 - 2.0 * beta);
    let upper = if beta < 0.5 {
        beta / (1.0 - 2.0 * beta)
    } else {
        f64::INFINITY
    };
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub xi: f64,
    pub beta1: f64,
    pub eta: f64,
}

impl RateInputs {
    pub fn new(xi: f64, beta1: f64, eta: f64, beta: f64) -> Result<Self> {
        if !(xi > 0.0 && xi <= beta / 4.0) {
            return Err(domain(
                "xi",
                format!("need 0 < xi <= beta/4 = {}, got {xi}", beta / 4.0),
            ));
        }
        if !(beta1 > 0.0 && beta1 <= beta) {
            return Err(domain(
                "beta1",
                format!("need 0 < beta1 <= beta = {beta}, got {beta1}"),
            ));
        }
        if !(eta > 0.0) {
            return Err(domain("eta", format!("need eta > 0, got {eta}")));
        }
        Ok(Self { xi, beta1, eta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub confinement: f64,
    pub admissibility: f64,
    pub particle_number: f64,
    pub coupling_convergence: f64,
    pub total: f64,
}

/// Unit-constant rate `μ/ε + (ε²/μ)^½ + N^(-β/4) + (N/ε²)^(-η)`.
pub fn theoretical_rate(point: &ScalingPoint, rate: &RateInputs) -> RateBreakdown {
    let confinement = point.confinement_ratio();
    let admissibility = point.admissibility_ratio().sqrt();
    let particle_number = point.n().powf(-point.beta / 4.0);
    let coupling_convergence = point.density_scale.powf(-rate.eta);
    RateBreakdown {
        confinement,
        admissibility,
        particle_number,
        coupling_convergence,
        total: confinement + admissibility + particle_number + coupling_convergence,
    }
}

/// The un-optimised rate with explicit `ξ` and `β₁`:
/// `μ/ε + (ε²/μ)^½ + N^(-β₁/2) + N^(-1+β₁+ξ) + (N/ε²)^(-η)`.
pub fn gronwall_rate(point: &ScalingPoint, rate: &RateInputs) -> f64 {
    let n = point.n();
    point.confinement_ratio()
        + point.admissibility_ratio().sqrt()
        + n.powf(-rate.beta1 / 2.0)
        + n.powf(-1.0 + rate.beta1 + rate.xi)
        + point.density_scale.powf(-rate.eta)
}

/// Least-squares line through `(ln x, ln y)`: `y ≈ constant · x^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub constant: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() {
        return Err(domain(
            "fit",
            format!("{} abscissae but {} values", x.len(), y.len()),
        ));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 2 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(domain(
            "fit",
            "log-log regression needs finite positive data",
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(Error::InsufficientData(
            "all abscissae coincide; slope undetermined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(PowerFit {
        slope,
        constant: intercept.exp(),
        r_squared,
        points: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mu_direct_power() {
        let p = ScalingPoint::new(10_000, 0.1, 0.5).unwrap();
        assert!((p.mu - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn mu_equals_epsilon_example() {
        let p = ScalingPoint::new(10_000, 1e-4, 1.0 / 3.0).unwrap();
        assert!((p.mu / 1e-4 - 1.0).abs() < 1e-12);
        assert!((p.confinement_ratio() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn range_checks_name_the_field() {
        let e = ScalingPoint::new(100, 1.0, 0.5).unwrap_err();
        assert!(matches!(
            e,
            Error::Domain {
                field: "epsilon",
                ..
            }
        ));
        assert!(ScalingPoint::new(100, 1.0 - 1e-12, 0.5).is_ok());
        let e = ScalingPoint::new(1, 0.5, 0.5).unwrap_err();
        assert!(matches!(
            e,
            Error::Domain {
                field: "n_particles",
                ..
            }
        ));
        let e = ScalingPoint::new(10, 0.5, 1.0).unwrap_err();
        assert!(matches!(e, Error::Domain { field: "beta", .. }));
    }

    #[test]
    fn classify_gamma_one_half_beta() {
        let seq = ScalingSequence::power_law(0.5, 1.0, &[100, 1000, 10_000]).unwrap();
        let c = classify(&seq).unwrap();
        assert!(c.admissible && c.moderately_confining);
        let expect = [0.1, 0.1f64.powf(1.5), 0.01];
        for (e, x) in c.evidence.iter().zip(expect) {
            // exponent algebra: both ratios equal N^(-1/2) here
            assert!((e.admissibility_ratio / x - 1.0).abs() < 1e-12);
            assert!((e.confinement_ratio / x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_constant_epsilon_not_admissible() {
        let seq =
            ScalingSequence::explicit(0.5, &[(100, 0.1), (1000, 0.1), (10_000, 0.1)]).unwrap();
        assert!(!classify(&seq).unwrap().admissible);
    }

    #[test]
    fn classify_outside_window_not_admissible() {
        let seq = ScalingSequence::power_law(1.0 / 3.0, 0.125, &[100, 10_000, 1_000_000]).unwrap();
        assert!(!classify(&seq).unwrap().admissible);
    }

    #[test]
    fn classify_needs_three_points() {
        let seq = ScalingSequence::power_law(0.5, 1.0, &[10, 100]).unwrap();
        assert!(matches!(classify(&seq), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn sequence_must_increase() {
        assert!(ScalingSequence::power_law(0.5, 1.0, &[100, 100, 1000]).is_err());
    }

    #[test]
    fn window_examples() {
        let (lo, hi) = power_law_window(1.0 / 3.0).unwrap();
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 1.0).abs() < 1e-14);
        let (lo, hi) = power_law_window(0.6).unwrap();
        assert!((lo - 0.75).abs() < 1e-14 && hi.is_infinite());
        let (lo, hi) = power_law_window(1e-9).unwrap();
        assert!(lo < 1e-8 && hi < 1e-8);
    }

    #[test]
    fn power_fit_exact() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 2.0 * v.sqrt()).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.constant - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_fit_refuses_degenerate() {
        assert!(matches!(
            fit_power_law(&[3.0, 3.0], &[1.0, 2.0]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            fit_power_law(&[3.0], &[1.0]),
            Err(Error::InsufficientData(_))
        ));
        assert!(fit_power_law(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn rate_example() {
        let p = ScalingPoint::new(10_000, 1e-4, 0.5).unwrap();
        let r = theoretical_rate(&p, &RateInputs::new(0.1, 0.5, 1.0, 0.5).unwrap());
        assert!((r.confinement - 1e-2).abs() < 1e-14);
        assert!((r.admissibility - 0.1).abs() < 1e-14);
        assert!((r.particle_number - 10f64.powf(-0.5)).abs() < 1e-14);
        assert!((r.coupling_convergence - 1e-12).abs() < 1e-24);
        assert!((r.total - 0.426_227_766_017_8).abs() < 1e-10);
    }

    #[test]
    fn rate_large_eta_drops_last_term() {
        let p = ScalingPoint::new(10_000, 1e-4, 0.5).unwrap();
        let r = theoretical_rate(&p, &RateInputs::new(0.1, 0.5, 60.0, 0.5).unwrap());
        assert_eq!(r.coupling_convergence, 0.0);
        assert_eq!(r.total, r.confinement + r.admissibility + r.particle_number);
    }

    #[test]
    fn unrepresentable_density_rejected() {
        assert!(ScalingPoint::new(1 << 50, 1e-160, 0.9).is_err());
    }

    #[test]
    fn rate_inputs_checked() {
        assert!(RateInputs::new(0.2, 0.5, 1.0, 0.5).is_err());
        assert!(RateInputs::new(0.1, 0.6, 1.0, 0.5).is_err());
        assert!(RateInputs::new(0.1, 0.5, 0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn rederiving_mu_is_bitwise_stable(n in 2u64..10_000_000, eps in 1e-6f64..0.999, beta in 0.01f64..0.99) {
            let p = ScalingPoint::new(n, eps, beta).unwrap();
            let q = ScalingPoint::new(p.n_particles, p.epsilon, p.beta).unwrap();
            prop_assert_eq!(p.mu.to_bits(), q.mu.to_bits());
            prop_assert!((p.mu / p.density_scale.powf(-p.beta) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn window_families_classify_and_rates_decrease(beta in 0.05f64..0.9, frac in 0.1f64..0.9) {
            let (lo, hi) = power_law_window(beta).unwrap();
            let hi = hi.min(lo + 2.0);
            let gamma = lo + frac * (hi - lo);
            // large enough N for the 0.5 threshold at this exponent gap
            let ns = [1u64 << 20, 1 << 30, 1 << 40, 1 << 50];
            let seq = ScalingSequence::power_law(beta, gamma, &ns).unwrap();
            let adm_exp = -2.0 * gamma + beta * (1.0 + 2.0 * gamma);
            let conf_exp = gamma - beta * (1.0 + 2.0 * gamma);
            let last = seq.points().last().unwrap();
            let c = classify(&seq).unwrap();
            if last.admissibility_ratio() < 0.5 {
                prop_assert!(c.admissible, "adm exponent {}", adm_exp);
            }
            if last.confinement_ratio() < 0.5 {
                prop_assert!(c.moderately_confining, "conf exponent {}", conf_exp);
            }
            let rate = RateInputs::new(beta / 4.0, beta, 1.0, beta).unwrap();
            let rs: Vec<f64> = seq.points().iter().map(|p| theoretical_rate(p, &rate).total).collect();
            prop_assert!(rs.iter().all(|&r| r > 0.0));
            prop_assert!(rs.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
