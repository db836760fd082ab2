//! Symmetric occupation basis, many-body states and reduced densities.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};

pub const DEFAULT_SIZE_CAP: usize = 200_000;

/// Basis of symmetric `N`-boson states. Each state is stored as the sorted
/// multiset of occupied mode indices; mode `0` is the condensate mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    n_modes: usize,
    n_particles: usize,
    states: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

/// Number of multisets of size `N` over `M` modes with at most `cap`
/// entries different from mode `0`.
pub fn symmetric_dimension(n_modes: usize, n_particles: usize, cap: Option<usize>) -> u128 {
    let choose = |n: u128, k: u128| -> u128 {
        let mut r: u128 = 1;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    };
    if n_modes == 0 {
        return 0;
    }
    let kmax = cap.unwrap_or(n_particles).min(n_particles);
    let others = n_modes as u128 - 1;
    (0..=kmax as u128)
        .map(|j| {
            if others == 0 {
                u128::from(j == 0)
            } else {
                choose(others + j - 1, j)
            }
        })
        .sum()
}

impl FockBasis {
    /// All states, optionally with at most `excitation_cap` particles outside mode `0`.
    pub fn full(
        n_modes: usize,
        n_particles: usize,
        excitation_cap: Option<usize>,
        size_cap: usize,
    ) -> Result<Self> {
        if n_modes == 0 || n_modes > u16::MAX as usize {
            return Err(domain(
                "n_modes",
                format!("need 1..=65535 modes, got {n_modes}"),
            ));
        }
        if n_particles == 0 {
            return Err(domain("n_particles", "need N >= 1"));
        }
        let size = symmetric_dimension(n_modes, n_particles, excitation_cap);
        if size > size_cap as u128 {
            return Err(Error::Size {
                size: size.min(usize::MAX as u128) as usize,
                cap: size_cap,
                hint: "reduce the number of modes or particles, or cap the excitations".into(),
            });
        }
        let kmax = excitation_cap.unwrap_or(n_particles).min(n_particles);
        let mut states = Vec::with_capacity(size as usize);
        let mut current = Vec::with_capacity(n_particles);
        for k in 0..=kmax {
            // k excited entries from modes 1.., non-decreasing
            fn rec(
                start: usize,
                left: usize,
                n_modes: usize,
                cur: &mut Vec<u16>,
                out: &mut Vec<Vec<u16>>,
                zeros: usize,
            ) {
                if left == 0 {
                    let mut s = vec![0u16; zeros];
                    s.extend_from_slice(cur);
                    out.push(s);
                    return;
                }
                for m in start..n_modes {
                    cur.push(m as u16);
                    rec(m, left - 1, n_modes, cur, out, zeros);
                    cur.pop();
                }
            }
            rec(1, k, n_modes, &mut current, &mut states, n_particles - k);
        }
        Self::from_states(n_modes, n_particles, states)
    }

    pub fn from_states(n_modes: usize, n_particles: usize, states: Vec<Vec<u16>>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if s.len() != n_particles {
                return Err(domain(
                    "states",
                    format!(
                        "state {i} has {} particles, expected {n_particles}",
                        s.len()
                    ),
                ));
            }
            if s.windows(2).any(|w| w[1] < w[0]) || s.iter().any(|&m| m as usize >= n_modes) {
                return Err(domain(
                    "states",
                    format!("state {i} is not a sorted multiset of valid modes"),
                ));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(domain("states", format!("state {i} is repeated")));
            }
        }
        Ok(Self {
            n_modes,
            n_particles,
            states,
            index,
        })
    }

    pub(crate) fn empty(n_modes: usize, n_particles: usize) -> Self {
        Self {
            n_modes,
            n_particles,
            states: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub(crate) fn insert(&mut self, s: Vec<u16>) -> (usize, bool) {
        if let Some(&i) = self.index.get(&s) {
            return (i, false);
        }
        let i = self.states.len();
        self.index.insert(s.clone(), i);
        self.states.push(s);
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.states[i]
    }

    pub fn find(&self, s: &[u16]) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Occupation vector `(n_0, …, n_{M-1})` of state `i`.
    pub fn occupations(&self, i: usize) -> Vec<u32> {
        let mut occ = vec![0u32; self.n_modes];
        for &m in &self.states[i] {
            occ[m as usize] += 1;
        }
        occ
    }

    /// Number of particles outside mode `0`.
    pub fn excitations(&self, i: usize) -> usize {
        self.states[i].iter().filter(|&&m| m != 0).count()
    }
}

/// Distinct modes of a sorted multiset with their multiplicities.
pub(crate) fn runs(s: &[u16]) -> Vec<(u16, u32)> {
    let mut out: Vec<(u16, u32)> = Vec::new();
    for &m in s {
        match out.last_mut() {
            Some((last, c)) if *last == m => *c += 1,
            _ => out.push((m, 1)),
        }
    }
    out
}

pub(crate) fn count(s: &[u16], m: u16) -> u32 {
    let lo = s.partition_point(|&x| x < m);
    let hi = s.partition_point(|&x| x <= m);
    (hi - lo) as u32
}

pub(crate) fn remove_one(s: &mut Vec<u16>, m: u16) {
    let i = s.partition_point(|&x| x < m);
    debug_assert!(i < s.len() && s[i] == m);
    s.remove(i);
}

pub(crate) fn insert_one(s: &mut Vec<u16>, m: u16) {
    let i = s.partition_point(|&x| x <= m);
    s.insert(i, m);
}

fn log_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    pub basis: Arc<FockBasis>,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl ManyBodyState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(domain("amplitudes", "length differs from the basis size"));
        }
        let state = Self {
            basis,
            amplitudes,
            time: 0.0,
        };
        let n = state.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(domain(
                "amplitudes",
                format!("state norm {n} differs from 1"),
            ));
        }
        Ok(state)
    }

    /// All particles in `mode`.
    pub fn condensed(basis: Arc<FockBasis>, mode: usize) -> Result<Self> {
        let s = vec![mode as u16; basis.n_particles()];
        let i = basis.find(&s).ok_or_else(|| {
            domain(
                "mode",
                format!("fully condensed state in mode {mode} is not in the basis"),
            )
        })?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Self::new(basis, amplitudes)
    }

    /// The symmetric product `φ^{⊗N}`. Fails if the basis drops more than
    /// `1e-10` of its weight.
    pub fn product(basis: Arc<FockBasis>, phi: &[Complex64]) -> Result<Self> {
        if phi.len() != basis.n_modes() {
            return Err(domain(
                "phi",
                "coefficient vector length differs from the mode count",
            ));
        }
        let norm: f64 = phi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(domain("phi", format!("one-body state has norm {norm}")));
        }
        let n = basis.n_particles() as u32;
        let amplitudes: Vec<Complex64> = (0..basis.len())
            .map(|i| {
                let mut amp = Complex64::new(1.0, 0.0);
                let mut log_den = 0.0;
                for (m, c) in runs(basis.state(i)) {
                    amp *= phi[m as usize].powu(c);
                    log_den += log_factorial(c);
                }
                amp * (0.5 * (log_factorial(n) - log_den)).exp()
            })
            .collect();
        let captured: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (captured - 1.0).abs() > 1e-10 {
            return Err(Error::Resolution(format!(
                "basis captures only {captured} of the product state's weight"
            )));
        }
        let mut state = Self {
            basis,
            amplitudes,
            time: 0.0,
        };
        state.normalize();
        Ok(state)
    }

    /// Multisets spanned by products of the given modes.
    pub fn product_support(n_particles: usize, modes: &[usize]) -> Vec<Vec<u16>> {
        let mut modes: Vec<u16> = modes.iter().map(|&m| m as u16).collect();
        modes.sort_unstable();
        modes.dedup();
        let mut out = Vec::new();
        fn rec(
            start: usize,
            left: usize,
            modes: &[u16],
            cur: &mut Vec<u16>,
            out: &mut Vec<Vec<u16>>,
        ) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..modes.len() {
                cur.push(modes[i]);
                rec(i, left - 1, modes, cur, out);
                cur.pop();
            }
        }
        rec(0, n_particles, &modes, &mut Vec::new(), &mut out);
        out
    }

    pub fn random<R: Rng>(basis: Arc<FockBasis>, rng: &mut R) -> Self {
        let amplitudes = (0..basis.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut state = Self {
            basis,
            amplitudes,
            time: 0.0,
        };
        state.normalize();
        state
    }

    pub fn n_particles(&self) -> usize {
        self.basis.n_particles()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Weight in each sector of `k` particles outside mode `0`.
    pub fn sector_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_particles() + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            w[self.basis.excitations(i)] += a.norm_sqr();
        }
        w
    }
}

/// `γ^(k)` in the mode basis, trace one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedDensity {
    pub order: usize,
    #[serde(skip)]
    pub matrix: DMatrix<Complex64>,
}

impl ReducedDensity {
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `γ^(1)_{ab} = ⟨a†_b a_a⟩/N` or `γ^(2)_{(ab),(cd)} = ⟨a†_c a†_d a_b a_a⟩/(N(N−1))`.
pub fn reduced_density(state: &ManyBodyState, k: usize) -> Result<ReducedDensity> {
    let basis = &state.basis;
    let n = basis.n_particles();
    let m = basis.n_modes();
    if !(1..=2).contains(&k) {
        return Err(domain(
            "k",
            format!("reduced densities of order 1 or 2 only, got {k}"),
        ));
    }
    if n < k {
        return Err(domain("k", format!("order {k} needs N >= {k}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut scratch: Vec<u16> = Vec::with_capacity(n);
    let matrix = if k == 1 {
        let mut g = DMatrix::from_element(m, m, zero);
        for (i, psi_s) in state.amplitudes.iter().enumerate() {
            if psi_s.norm_sqr() == 0.0 {
                continue;
            }
            let s = basis.state(i);
            for (a, na) in runs(s) {
                let ann = (na as f64).sqrt();
                for b in 0..m as u16 {
                    scratch.clear();
                    scratch.extend_from_slice(s);
                    remove_one(&mut scratch, a);
                    let nb = count(&scratch, b);
                    insert_one(&mut scratch, b);
                    if let Some(t) = basis.find(&scratch) {
                        let coef = ann * ((nb + 1) as f64).sqrt();
                        g[(a as usize, b as usize)] += state.amplitudes[t].conj() * psi_s * coef;
                    }
                }
            }
        }
        g.unscale(n as f64)
    } else {
        let mut g = DMatrix::from_element(m * m, m * m, zero);
        for (i, psi_s) in state.amplitudes.iter().enumerate() {
            if psi_s.norm_sqr() == 0.0 {
                continue;
            }
            let s = basis.state(i);
            let occ = runs(s);
            for &(a, na) in &occ {
                for &(b, nb) in &occ {
                    let nb_after = if a == b { nb - 1 } else { nb };
                    if nb_after == 0 {
                        continue;
                    }
                    let ann = (na as f64 * nb_after as f64).sqrt();
                    let mut r = s.to_vec();
                    remove_one(&mut r, a);
                    remove_one(&mut r, b);
                    for c in 0..m as u16 {
                        for d in 0..m as u16 {
                            scratch.clear();
                            scratch.extend_from_slice(&r);
                            let nd = count(&scratch, d);
                            insert_one(&mut scratch, d);
                            let nc = count(&scratch, c);
                            insert_one(&mut scratch, c);
                            if let Some(t) = basis.find(&scratch) {
                                let coef = ann * ((nd + 1) as f64 * (nc + 1) as f64).sqrt();
                                let row = a as usize * m + b as usize;
                                let col = c as usize * m + d as usize;
                                g[(row, col)] += state.amplitudes[t].conj() * psi_s * coef;
                            }
                        }
                    }
                }
            }
        }
        g.unscale((n * (n - 1)) as f64)
    };
    Ok(ReducedDensity { order: k, matrix })
}
