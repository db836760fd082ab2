//! Counting projectors relative to a condensate orbital, weighted counting
//! operators and the functionals built from them.
//!
//! `P_k` projects onto states with exactly `k` particles outside `φ`. When
//! `φ` is a basis mode, `P_k` is diagonal in the occupation basis; otherwise
//! the state is expanded into the first-quantized tensor `(C^M)^{⊗N}`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::manybody::{reduced_density, trace_norm, ManyBodyState};

/// Largest tensor `M^N` the dense path will build.
pub const DENSE_CAP: usize = 1 << 22;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The one-body reference state `φ = Φ ⊗ χ` in a mode basis ordered as
/// `a = i_x M_y + n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensateProjector {
    pub phi: Vec<Complex64>,
    /// `(Φ, χ)` when the state is a product.
    pub factors: Option<(Vec<Complex64>, Vec<Complex64>)>,
    /// Set when `φ` is a basis mode up to phase.
    pub mode: Option<usize>,
}

fn unit_check(v: &[Complex64], what: &'static str) -> Result<()> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return Err(domain(
            what,
            format!("reference state must be normalised, norm {n}"),
        ));
    }
    Ok(())
}

fn detect_mode(phi: &[Complex64]) -> Option<usize> {
    let (a, z) = phi
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))?;
    ((z.norm() - 1.0).abs() < 1e-14
        && phi
            .iter()
            .enumerate()
            .all(|(b, w)| b == a || w.norm() < 1e-14))
    .then_some(a)
}

impl CondensateProjector {
    pub fn mode(n_modes: usize, a: usize) -> Result<Self> {
        if a >= n_modes {
            return Err(domain("mode", format!("mode {a} outside {n_modes} modes")));
        }
        let mut phi = vec![ZERO; n_modes];
        phi[a] = Complex64::new(1.0, 0.0);
        Ok(Self {
            phi,
            factors: None,
            mode: Some(a),
        })
    }

    pub fn vector(phi: Vec<Complex64>) -> Result<Self> {
        unit_check(&phi, "phi")?;
        let mode = detect_mode(&phi);
        Ok(Self {
            phi,
            factors: None,
            mode,
        })
    }

    /// `φ_a = Φ_{i_x} χ_n` for `a = i_x M_y + n`.
    pub fn factored(longitudinal: Vec<Complex64>, transverse: Vec<Complex64>) -> Result<Self> {
        unit_check(&longitudinal, "longitudinal")?;
        unit_check(&transverse, "transverse")?;
        let phi: Vec<Complex64> = longitudinal
            .iter()
            .flat_map(|u| transverse.iter().map(move |v| u * v))
            .collect();
        let mode = detect_mode(&phi);
        Ok(Self {
            phi,
            factors: Some((longitudinal, transverse)),
            mode,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.phi.len()
    }

    /// `|φ⟩⟨φ|`.
    pub fn p(&self) -> DMatrix<Complex64> {
        let v = nalgebra::DVector::from_column_slice(&self.phi);
        &v * v.adjoint()
    }

    pub fn q(&self) -> DMatrix<Complex64> {
        DMatrix::identity(self.n_modes(), self.n_modes()) - self.p()
    }

    /// `p^Φ = |Φ⟩⟨Φ| ⊗ 1` and `p^χ = 1 ⊗ |χ⟩⟨χ|`.
    pub fn factor_projectors(&self) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let (u, v) = self
            .factors
            .as_ref()
            .ok_or_else(|| domain("factors", "reference state was not given in product form"))?;
        let pu = DMatrix::from_fn(u.len(), u.len(), |i, j| u[i] * u[j].conj());
        let pv = DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj());
        Ok((
            pu.kronecker(&DMatrix::identity(v.len(), v.len())),
            DMatrix::identity(u.len(), u.len()).kronecker(&pv),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeightKind {
    /// `n(k) = √(k/N)`.
    N,
    /// `n(k)^a`.
    NPower(f64),
    /// `n` with the linear cut-off below `N^{1−2ξ}`.
    M(f64),
    /// `m(k) − m(k+1)`.
    MA(f64),
    /// `m(k) − m(k+2)`.
    MB(f64),
    /// `N max{|mᵃ(k−1)|, |mᵇ(k−2)|}`.
    L(f64),
    Custom,
}

/// A weight `f(k)`, `k = 0..N`, with an optional shift `d`: the operator is
/// `f̂_d = Σ_k f(k+d) P_k`, zero where `k+d ∉ [0, N]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub n_particles: usize,
    pub values: Vec<f64>,
    pub shift: i64,
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(domain("xi", format!("need 0 < ξ < 1/2, got {xi}")));
    }
    Ok(())
}

/// `m(k)` for any `k ≥ 0`; the branch `k ≥ N^{1−2ξ}` uses `n`.
pub fn m_weight(k: usize, n: usize, xi: f64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    if kf >= nf.powf(1.0 - 2.0 * xi) {
        (kf / nf).sqrt()
    } else {
        0.5 * (nf.powf(-1.0 + xi) * kf + nf.powf(-xi))
    }
}

/// `m(k) − m(k + j)`; exact on the linear branch, where a direct difference
/// would cancel to `~N·eps` relative error.
fn m_drop(k: usize, j: usize, n: usize, xi: f64) -> f64 {
    let nf = n as f64;
    if ((k + j) as f64) < nf.powf(1.0 - 2.0 * xi) {
        -0.5 * nf.powf(-1.0 + xi) * j as f64
    } else {
        m_weight(k, n, xi) - m_weight(k + j, n, xi)
    }
}

impl WeightFunction {
    fn tabulate(kind: WeightKind, n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n_particles", "need N >= 1"));
        }
        Ok(Self {
            kind,
            n_particles: n,
            values: (0..=n).map(f).collect(),
            shift: 0,
        })
    }

    pub fn n(n: usize) -> Result<Self> {
        Self::tabulate(WeightKind::N, n, |k| (k as f64 / n as f64).sqrt())
    }

    pub fn n_power(n: usize, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(domain("power", "need a > 0"));
        }
        Self::tabulate(WeightKind::NPower(a), n, |k| {
            (k as f64 / n as f64).powf(0.5 * a)
        })
    }

    pub fn m(n: usize, xi: f64) -> Result<Self> {
        check_xi(xi)?;
        Self::tabulate(WeightKind::M(xi), n, |k| m_weight(k, n, xi))
    }

    /// Signed: `m` increases, so these values are `≤ 0`.
    pub fn m_a(n: usize, xi: f64) -> Result<Self> {
        check_xi(xi)?;
        Self::tabulate(WeightKind::MA(xi), n, |k| m_drop(k, 1, n, xi))
    }

    pub fn m_b(n: usize, xi: f64) -> Result<Self> {
        check_xi(xi)?;
        Self::tabulate(WeightKind::MB(xi), n, |k| m_drop(k, 2, n, xi))
    }

    pub fn l(n: usize, xi: f64) -> Result<Self> {
        check_xi(xi)?;
        let a = |k: usize| m_drop(k, 1, n, xi).abs();
        let b = |k: usize| m_drop(k, 2, n, xi).abs();
        Self::tabulate(WeightKind::L(xi), n, |k| {
            let ta = if k >= 1 { a(k - 1) } else { 0.0 };
            let tb = if k >= 2 { b(k - 2) } else { 0.0 };
            n as f64 * ta.max(tb)
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("values", "need f(0..=N)"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(domain("values", "weights must be finite and non-negative"));
        }
        Ok(Self {
            kind: WeightKind::Custom,
            n_particles: values.len() - 1,
            values,
            shift: 0,
        })
    }

    pub fn shifted(mut self, d: i64) -> Self {
        self.shift = d;
        self
    }

    /// Eigenvalue of `f̂_d` on `P_k`.
    pub fn sector_value(&self, k: usize) -> f64 {
        let j = k as i64 + self.shift;
        if j < 0 || j as usize >= self.values.len() {
            0.0
        } else {
            self.values[j as usize]
        }
    }

    /// `‖f̂_d‖ = max_k |f(k+d)|`.
    pub fn operator_norm(&self) -> f64 {
        (0..=self.n_particles)
            .map(|k| self.sector_value(k).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingDistribution {
    /// `⟨ψ, P_k ψ⟩`, `k = 0..N`.
    pub probs: Vec<f64>,
    pub source: String,
}

impl CountingDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// First-quantized amplitudes `ψ(i₁, …, i_N)` with `i_1` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    pub n_particles: usize,
    pub n_modes: usize,
    pub data: Vec<Complex64>,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl DenseTensor {
    pub fn size(n_modes: usize, n_particles: usize) -> Option<usize> {
        n_modes.checked_pow(n_particles as u32)
    }

    pub fn zeros(n_modes: usize, n_particles: usize, cap: usize) -> Result<Self> {
        let size = Self::size(n_modes, n_particles)
            .filter(|&s| s <= cap)
            .ok_or_else(|| Error::Size {
                size: Self::size(n_modes, n_particles).unwrap_or(usize::MAX),
                cap,
                hint: "dense projector path needs M^N within the cap; use a basis-mode condensate"
                    .into(),
            })?;
        Ok(Self {
            n_particles,
            n_modes,
            data: vec![ZERO; size],
        })
    }

    /// `ψ(i) = c_occ √(∏ n_a! / N!)`.
    pub fn from_state(state: &ManyBodyState, cap: usize) -> Result<Self> {
        let (m, n) = (state.basis.n_modes(), state.n_particles());
        let mut out = Self::zeros(m, n, cap)?;
        let nf = factorial(n as u32);
        let mut idx = vec![0u16; n];
        for (flat, z) in out.data.iter_mut().enumerate() {
            let mut r = flat;
            for slot in idx.iter_mut().rev() {
                *slot = (r % m) as u16;
                r /= m;
            }
            let mut s = idx.clone();
            s.sort_unstable();
            if let Some(i) = state.basis.find(&s) {
                let mut w = 1.0;
                let mut j = 0;
                while j < s.len() {
                    let run = s[j..].iter().take_while(|&&v| v == s[j]).count();
                    w *= factorial(run as u32);
                    j += run;
                }
                *z = state.amplitudes[i] * (w / nf).sqrt();
            }
        }
        Ok(out)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies the one-body operator `op` to particle `j` (0-based).
    pub fn apply_one_body(&self, j: usize, op: &DMatrix<Complex64>) -> Self {
        let m = self.n_modes;
        let inner = m.pow((self.n_particles - 1 - j) as u32);
        let outer = self.data.len() / (m * inner);
        let mut out = vec![ZERO; self.data.len()];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * m * inner + i;
                for r in 0..m {
                    let mut acc = ZERO;
                    for c in 0..m {
                        acc += op[(r, c)] * self.data[base + c * inner];
                    }
                    out[base + r * inner] = acc;
                }
            }
        }
        Self {
            n_particles: self.n_particles,
            n_modes: m,
            data: out,
        }
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        self.data
            .iter_mut()
            .zip(&x.data)
            .for_each(|(y, v)| *y += a * v);
    }

    /// `P_k ψ` for `k = 0..N` from `∏_j (p_j + z q_j)`.
    pub fn counting_components(&self, proj: &CondensateProjector) -> Vec<Self> {
        let (p, q) = (proj.p(), proj.q());
        let n = self.n_particles;
        let zero = Self {
            n_particles: n,
            n_modes: self.n_modes,
            data: vec![ZERO; self.data.len()],
        };
        let mut v = vec![zero; n + 1];
        v[0] = self.clone();
        for j in 0..n {
            let mut next = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let mut t = v[k].apply_one_body(j, &p);
                if k > 0 {
                    t.axpy(Complex64::new(1.0, 0.0), &v[k - 1].apply_one_body(j, &q));
                }
                next.push(t);
            }
            v = next;
        }
        v
    }
}

/// `⟨ψ, P_k ψ⟩` for `k = 0..N`.
pub fn counting_distribution(
    state: &ManyBodyState,
    proj: &CondensateProjector,
) -> Result<CountingDistribution> {
    counting_distribution_with_cap(state, proj, DENSE_CAP)
}

pub fn counting_distribution_with_cap(
    state: &ManyBodyState,
    proj: &CondensateProjector,
    cap: usize,
) -> Result<CountingDistribution> {
    if proj.n_modes() != state.basis.n_modes() {
        return Err(domain(
            "projector",
            "reference state and many-body basis differ in mode count",
        ));
    }
    let n = state.n_particles();
    if let Some(c) = proj.mode {
        let mut probs = vec![0.0; n + 1];
        for (i, z) in state.amplitudes.iter().enumerate() {
            let inside = state
                .basis
                .state(i)
                .iter()
                .filter(|&&a| a as usize == c)
                .count();
            probs[n - inside] += z.norm_sqr();
        }
        return Ok(CountingDistribution {
            probs,
            source: format!("sector(mode {c})"),
        });
    }
    if DenseTensor::size(state.basis.n_modes(), n).is_some_and(|s| s <= cap) {
        let t = DenseTensor::from_state(state, cap)?;
        let probs = t
            .counting_components(proj)
            .iter()
            .map(|v| v.norm().powi(2))
            .collect();
        return Ok(CountingDistribution {
            probs,
            source: "dense".into(),
        });
    }
    if n > MOMENT_PATH_MAX_N {
        return Err(Error::Size {
            size: n,
            cap: MOMENT_PATH_MAX_N,
            hint: "neither the dense tensor nor the moment inversion is accurate here; use a basis-mode condensate".into(),
        });
    }
    Ok(CountingDistribution {
        probs: distribution_from_factorial_moments(&factorial_moments(state, &proj.phi)),
        source: "factorial moments".into(),
    })
}

/// Largest `N` for the moment inversion; its alternating sums lose about
/// `log10(3^N)` digits.
pub const MOMENT_PATH_MAX_N: usize = 16;

/// `F_j = ‖a(φ)^j ψ‖² = ⟨n̂_φ (n̂_φ − 1) ⋯ (n̂_φ − j + 1)⟩`, `j = 0..N`.
pub fn factorial_moments(state: &ManyBodyState, phi: &[Complex64]) -> Vec<f64> {
    let n = state.n_particles();
    let mut cur: HashMap<Vec<u16>, Complex64> = (0..state.basis.len())
        .filter(|&i| state.amplitudes[i].norm_sqr() > 0.0)
        .map(|i| (state.basis.state(i).to_vec(), state.amplitudes[i]))
        .collect();
    let mut out = Vec::with_capacity(n + 1);
    out.push(cur.values().map(|z| z.norm_sqr()).sum());
    for _ in 0..n {
        let mut next: HashMap<Vec<u16>, Complex64> = HashMap::with_capacity(cur.len());
        for (s, z) in &cur {
            let mut i = 0;
            while i < s.len() {
                let a = s[i];
                let mut j = i;
                while j < s.len() && s[j] == a {
                    j += 1;
                }
                let c = phi[a as usize];
                if c.norm_sqr() > 0.0 {
                    let mut r = s.clone();
                    r.remove(i);
                    *next.entry(r).or_insert(ZERO) += c.conj() * z * ((j - i) as f64).sqrt();
                }
                i = j;
            }
        }
        out.push(next.values().map(|z| z.norm_sqr()).sum());
        cur = next;
    }
    out
}

/// `P(n̂_φ = i) = Σ_{j≥i} (−1)^{j−i} C(j, i) F_j / j!`, returned as the
/// distribution of `k = N − i`.
pub fn distribution_from_factorial_moments(f: &[f64]) -> Vec<f64> {
    let n = f.len() - 1;
    let mut probs = vec![0.0; n + 1];
    for i in 0..=n {
        let p: f64 = (i..=n)
            .map(|j| {
                let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                sign * f[j] / (factorial(i as u32) * factorial((j - i) as u32))
            })
            .sum();
        probs[n - i] = p.max(0.0);
    }
    probs
}

/// `α_f = Σ_k f(k+d) ⟨ψ, P_k ψ⟩`.
pub fn alpha_from(dist: &CountingDistribution, weight: &WeightFunction) -> Result<f64> {
    if dist.probs.len() != weight.n_particles + 1 {
        return Err(domain("weight", "weight tabulated for a different N"));
    }
    Ok(dist
        .probs
        .iter()
        .enumerate()
        .map(|(k, p)| weight.sector_value(k) * p)
        .sum())
}

pub fn alpha(
    state: &ManyBodyState,
    weight: &WeightFunction,
    proj: &CondensateProjector,
) -> Result<f64> {
    alpha_from(&counting_distribution(state, proj)?, weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaXi {
    pub alpha_m: f64,
    pub energy_gap: f64,
    pub value: f64,
}

/// `α_ξ = α_m + |E^ψ − ℰ^Φ|`.
pub fn alpha_xi(
    state: &ManyBodyState,
    proj: &CondensateProjector,
    e_psi: f64,
    e_phi: f64,
    xi: f64,
) -> Result<AlphaXi> {
    let m = WeightFunction::m(state.n_particles(), xi)?;
    let alpha_m = alpha(state, &m, proj)?;
    let energy_gap = (e_psi - e_phi).abs();
    Ok(AlphaXi {
        alpha_m,
        energy_gap,
        value: alpha_m + energy_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightNormReport {
    pub n_particles: usize,
    pub xi: f64,
    /// `max_k l(k) n(k)`.
    pub l_n_norm: f64,
    /// `max_k l(k)`.
    pub l_norm: f64,
    /// `N^ξ`.
    pub l_bound: f64,
    pub l_bound_holds: bool,
}

pub fn weight_norm_checks(n: usize, xi: f64) -> Result<WeightNormReport> {
    let l = WeightFunction::l(n, xi)?;
    let nw = WeightFunction::n(n)?;
    let l_n_norm = (0..=n)
        .map(|k| l.values[k] * nw.values[k])
        .fold(0.0, f64::max);
    let l_norm = l.operator_norm();
    let l_bound = (n as f64).powf(xi);
    Ok(WeightNormReport {
        n_particles: n,
        xi,
        l_n_norm,
        l_norm,
        l_bound,
        l_bound_holds: l_norm <= l_bound * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBridge {
    pub alpha_n2: f64,
    pub trace_distance: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `⟨ψ, n̂² ψ⟩ ≤ Tr|γ^(1) − p| ≤ √(8 ⟨ψ, n̂² ψ⟩)`.
pub fn rate_bridge(state: &ManyBodyState, proj: &CondensateProjector) -> Result<RateBridge> {
    let n2 = WeightFunction::n_power(state.n_particles(), 2.0)?;
    let alpha_n2 = alpha(state, &n2, proj)?;
    let gamma = reduced_density(state, 1)?;
    let trace_distance = trace_norm(&(gamma.matrix - proj.p()));
    let upper = (8.0 * alpha_n2).sqrt();
    let slack = 1e-12;
    Ok(RateBridge {
        alpha_n2,
        trace_distance,
        upper,
        holds: alpha_n2 <= trace_distance + slack && trace_distance <= upper + slack,
    })
}

/// Residuals of the counting identities evaluated on a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `‖Σ_k P_k ψ − ψ‖`.
    pub completeness: f64,
    /// `max_k ‖Σ_j q_j P_k ψ − k P_k ψ‖`.
    pub number: f64,
    /// `‖n̂² ψ − N⁻¹ Σ_j q_j ψ‖`.
    pub n_squared: f64,
    /// `|α_{n²} − ‖q_1 ψ‖²|` (meaningful for symmetric tensors).
    pub alpha_q1: f64,
    /// `‖(p − p^Φ p^χ) ψ‖` and `‖(q − q^χ − q^Φ p^χ) ψ‖` on particle 1, when
    /// the reference state is a product.
    pub factor_p: Option<f64>,
    pub factor_q: Option<f64>,
}

pub fn identity_residuals(
    t: &DenseTensor,
    proj: &CondensateProjector,
) -> Result<IdentityResiduals> {
    if proj.n_modes() != t.n_modes {
        return Err(domain(
            "projector",
            "reference state and tensor differ in mode count",
        ));
    }
    let n = t.n_particles;
    let comps = t.counting_components(proj);
    let dist = |a: &DenseTensor, b: &DenseTensor| {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let mut total = DenseTensor {
        n_particles: n,
        n_modes: t.n_modes,
        data: vec![ZERO; t.data.len()],
    };
    comps
        .iter()
        .for_each(|c| total.axpy(Complex64::new(1.0, 0.0), c));
    let completeness = dist(&total, t);
    let q = proj.q();
    let sum_q = |v: &DenseTensor| {
        let mut acc = DenseTensor {
            n_particles: n,
            n_modes: v.n_modes,
            data: vec![ZERO; v.data.len()],
        };
        for j in 0..n {
            acc.axpy(Complex64::new(1.0, 0.0), &v.apply_one_body(j, &q));
        }
        acc
    };
    let mut number = 0.0f64;
    for (k, c) in comps.iter().enumerate() {
        let lhs = sum_q(c);
        let mut rhs = c.clone();
        rhs.data.iter_mut().for_each(|z| *z *= k as f64);
        number = number.max(dist(&lhs, &rhs));
    }
    let mut n2 = DenseTensor {
        n_particles: n,
        n_modes: t.n_modes,
        data: vec![ZERO; t.data.len()],
    };
    for (k, c) in comps.iter().enumerate() {
        n2.axpy(Complex64::new(k as f64 / n as f64, 0.0), c);
    }
    let mut avg_q = sum_q(t);
    avg_q.data.iter_mut().for_each(|z| *z /= n as f64);
    let n_squared = dist(&n2, &avg_q);
    let norm2 = t.norm().powi(2);
    let alpha_n2: f64 = comps
        .iter()
        .enumerate()
        .map(|(k, c)| k as f64 / n as f64 * c.norm().powi(2))
        .sum::<f64>()
        / norm2;
    let q1 = t.apply_one_body(0, &q).norm().powi(2) / norm2;
    let alpha_q1 = (alpha_n2 - q1).abs();
    let (factor_p, factor_q) = match proj.factor_projectors() {
        Ok((pu, pv)) => {
            let id = DMatrix::<Complex64>::identity(t.n_modes, t.n_modes);
            let dp = proj.p() - &pu * &pv;
            let dq = &q - (&id - &pv) - (&id - &pu) * &pv;
            (
                Some(t.apply_one_body(0, &dp).norm()),
                Some(t.apply_one_body(0, &dq).norm()),
            )
        }
        Err(_) => (None, None),
    };
    Ok(IdentityResiduals {
        completeness,
        number,
        n_squared,
        alpha_q1,
        factor_p,
        factor_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::FockBasis;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn cat() -> ManyBodyState {
        let basis = Arc::new(FockBasis::full(2, 2, None, 10).unwrap());
        let mut amps = vec![ZERO; basis.len()];
        amps[basis.find(&[0, 0]).unwrap()] = c(0.5f64.sqrt());
        amps[basis.find(&[1, 1]).unwrap()] = c(0.5f64.sqrt());
        ManyBodyState::new(basis, amps).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / s).collect()
    }

    #[test]
    fn moment_inversion_matches_dense_counting() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (m, n) in [(3, 4), (4, 5), (5, 3)] {
            let basis = Arc::new(FockBasis::full(m, n, None, 10_000).unwrap());
            let psi = ManyBodyState::random(basis, &mut rng);
            let proj = CondensateProjector::vector(random_unit(&mut rng, m)).unwrap();
            let dense = counting_distribution_with_cap(&psi, &proj, DENSE_CAP).unwrap();
            let moments = counting_distribution_with_cap(&psi, &proj, 0).unwrap();
            assert_eq!(moments.source, "factorial moments");
            for (a, b) in dense.probs.iter().zip(&moments.probs) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn factorial_moments_of_a_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = random_unit(&mut rng, 4);
        let basis = Arc::new(FockBasis::full(4, 5, None, 10_000).unwrap());
        let psi = ManyBodyState::product(basis, &phi).unwrap();
        let f = factorial_moments(&psi, &phi);
        let expected = [1.0, 5.0, 20.0, 60.0, 120.0, 120.0];
        for (a, b) in f.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn condensed_state_counts() {
        let basis = Arc::new(FockBasis::full(3, 4, None, 100).unwrap());
        let psi = ManyBodyState::condensed(basis, 1).unwrap();
        let d = counting_distribution(&psi, &CondensateProjector::mode(3, 1).unwrap()).unwrap();
        assert_eq!(d.probs, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            alpha(
                &psi,
                &WeightFunction::n_power(4, 2.0).unwrap(),
                &CondensateProjector::mode(3, 1).unwrap()
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn cat_state_counting_and_bridge() {
        let psi = cat();
        let proj = CondensateProjector::mode(2, 0).unwrap();
        let d = counting_distribution(&psi, &proj).unwrap();
        assert!(
            (d.probs[0] - 0.5).abs() < 1e-15
                && d.probs[1] == 0.0
                && (d.probs[2] - 0.5).abs() < 1e-15
        );
        let a = alpha(&psi, &WeightFunction::n_power(2, 2.0).unwrap(), &proj).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        let r = rate_bridge(&psi, &proj).unwrap();
        assert!((r.trace_distance - 1.0).abs() < 1e-14);
        assert!((r.upper - 2.0).abs() < 1e-14);
        assert!(r.holds);
        // dense q₁ construction
        let t = DenseTensor::from_state(&psi, DENSE_CAP).unwrap();
        let q1 = t.apply_one_body(0, &proj.q()).norm().powi(2);
        assert!((q1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn dense_and_sector_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = Arc::new(FockBasis::full(4, 3, None, 1000).unwrap());
        let psi = ManyBodyState::random(basis, &mut rng);
        let sector =
            counting_distribution(&psi, &CondensateProjector::mode(4, 2).unwrap()).unwrap();
        let mut phi = vec![ZERO; 4];
        phi[2] = Complex64::from_polar(1.0, 0.3);
        let mut proj = CondensateProjector::vector(phi).unwrap();
        proj.mode = None;
        let dense = counting_distribution(&psi, &proj).unwrap();
        assert_eq!(dense.source, "dense");
        for (a, b) in sector.probs.iter().zip(&dense.probs) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn large_tensors_fall_back_to_moments() {
        let basis = Arc::new(FockBasis::full(8, 6, None, 10_000).unwrap());
        let psi = ManyBodyState::condensed(basis, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let proj = CondensateProjector::vector(random_unit(&mut rng, 8)).unwrap();
        let d = counting_distribution_with_cap(&psi, &proj, 1000).unwrap();
        assert_eq!(d.source, "factorial moments");
        // all particles in e_0: k outside φ is binomial with p = 1 − |φ_0|²
        let p = 1.0 - proj.phi[0].norm_sqr();
        for (k, v) in d.probs.iter().enumerate() {
            let binom = factorial(6) / (factorial(k as u32) * factorial(6 - k as u32));
            assert!((v - binom * p.powi(k as i32) * (1.0 - p).powi(6 - k as i32)).abs() < 1e-13);
        }
        let big = Arc::new(FockBasis::full(2, MOMENT_PATH_MAX_N + 1, None, 10_000).unwrap());
        let psi = ManyBodyState::condensed(big, 0).unwrap();
        let proj = CondensateProjector::vector(random_unit(&mut rng, 2)).unwrap();
        assert!(matches!(
            counting_distribution_with_cap(&psi, &proj, 1000),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn m_weight_branches() {
        let (n, xi) = (100, 0.2);
        let m = WeightFunction::m(n, xi).unwrap();
        assert!((m.values[0] - 0.5 * 100f64.powf(-0.2)).abs() < 1e-15);
        // N^{1−2ξ} = 100^{0.6} ≈ 15.85
        assert!((m.values[16] - 0.4).abs() < 1e-15);
        assert!(
            (m.values[15] - 0.5 * (100f64.powf(-0.8) * 15.0 + 100f64.powf(-0.2))).abs() < 1e-15
        );
        let nw = WeightFunction::n(n).unwrap();
        for k in 0..=n {
            assert!(nw.values[k] <= m.values[k] + 1e-15);
            assert!(m.values[k] <= nw.values[k] + 0.5 * 100f64.powf(-0.2) + 1e-15);
        }
    }

    #[test]
    fn l_norm_bounds() {
        let r = weight_norm_checks(100, 0.2).unwrap();
        assert!(r.l_bound_holds);
        assert!((r.l_bound - 2.51188643150958).abs() < 1e-12);
        let vals: Vec<f64> = [100, 1000, 10_000]
            .iter()
            .map(|&n| weight_norm_checks(n, 0.2).unwrap().l_n_norm)
            .collect();
        assert!(vals.iter().all(|&v| v < 1.5), "{vals:?}");
        assert!(vals[2] <= vals[0] * 1.05, "{vals:?}");
    }

    #[test]
    fn shifted_weights() {
        let f = WeightFunction::custom(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.operator_norm(), 4.0);
        let g = f.clone().shifted(-1);
        assert_eq!(
            (0..=3).map(|k| g.sector_value(k)).collect::<Vec<_>>(),
            vec![0.0, 1.0, 2.0, 3.0]
        );
        let h = f.shifted(2);
        assert_eq!(
            (0..=3).map(|k| h.sector_value(k)).collect::<Vec<_>>(),
            vec![3.0, 4.0, 0.0, 0.0]
        );
        assert_eq!(h.operator_norm(), 4.0);
    }

    #[test]
    fn alpha_xi_sums() {
        let basis = Arc::new(FockBasis::full(2, 10, None, 100).unwrap());
        let psi = ManyBodyState::condensed(basis, 0).unwrap();
        let proj = CondensateProjector::mode(2, 0).unwrap();
        let a = alpha_xi(&psi, &proj, 1.0, 1.0, 0.25).unwrap();
        assert!((a.value - 0.5 * 10f64.powf(-0.25)).abs() < 1e-15);
        let b = alpha_xi(&psi, &proj, 1.3, 1.0, 0.25).unwrap();
        assert!((b.value - b.alpha_m - 0.3).abs() < 1e-14);
    }

    #[test]
    fn product_identities_on_random_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let proj =
            CondensateProjector::factored(random_unit(&mut rng, 2), random_unit(&mut rng, 3))
                .unwrap();
        let mut t = DenseTensor::zeros(6, 4, DENSE_CAP).unwrap();
        t.data = random_unit(&mut rng, t.data.len());
        let r = identity_residuals(&t, &proj).unwrap();
        assert!(r.completeness < 1e-12);
        assert!(r.number < 1e-12);
        assert!(r.n_squared < 1e-12);
        assert!(r.factor_p.unwrap() < 1e-12);
        assert!(r.factor_q.unwrap() < 1e-12);
    }

    #[test]
    fn random_states_satisfy_bridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..100 {
            let n = 1 + trial % 6;
            let m = 2 + trial % 7;
            let basis = Arc::new(FockBasis::full(m, n, None, 100_000).unwrap());
            let psi = ManyBodyState::random(basis, &mut rng);
            let proj = CondensateProjector::vector(random_unit(&mut rng, m)).unwrap();
            let r = rate_bridge(&psi, &proj).unwrap();
            assert!(r.holds, "trial {trial}: {r:?}");
            let t = DenseTensor::from_state(&psi, DENSE_CAP).unwrap();
            assert!(identity_residuals(&t, &proj).unwrap().alpha_q1 < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn probabilities_sum_to_one(seed in 0u64..1000, m in 2usize..5, n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let basis = Arc::new(FockBasis::full(m, n, None, 10_000).unwrap());
            let psi = ManyBodyState::random(basis, &mut rng);
            let proj = CondensateProjector::vector(random_unit(&mut rng, m)).unwrap();
            let d = counting_distribution(&psi, &proj).unwrap();
            prop_assert!((d.total() - 1.0).abs() < 1e-10);
            prop_assert!(d.probs.iter().all(|&p| p >= -1e-12));
        }

        #[test]
        fn alpha_m_sandwich(seed in 0u64..1000, xi in 0.05f64..0.45) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let basis = Arc::new(FockBasis::full(3, 5, None, 10_000).unwrap());
            let psi = ManyBodyState::random(basis, &mut rng);
            let proj = CondensateProjector::mode(3, 0).unwrap();
            let an = alpha(&psi, &WeightFunction::n(5).unwrap(), &proj).unwrap();
            let am = alpha(&psi, &WeightFunction::m(5, xi).unwrap(), &proj).unwrap();
            prop_assert!(an <= am + 1e-14);
            prop_assert!(am <= an + 0.5 * 5f64.powf(-xi) + 1e-14);
        }

        #[test]
        fn l_norm_never_exceeds_n_to_xi(n in 1usize..3000, xi in 0.01f64..0.49) {
            let r = weight_norm_checks(n, xi).unwrap();
            prop_assert!(r.l_bound_holds, "{:?}", r);
        }
    }
}
