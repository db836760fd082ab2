//! Sparse second-quantized Hamiltonian on the reachable part of the
//! occupation basis, and its time propagation.

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::{
    count, insert_one, remove_one, runs, FockBasis, ManyBodyState, DEFAULT_SIZE_CAP,
};
use super::krylov::{expm_krylov, KrylovOptions};
use super::ModeBasis;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianOptions {
    /// At most this many particles outside the reference modes.
    pub excitation_cap: Option<usize>,
    /// Modes not counted by the excitation cap; empty means mode `0` alone.
    pub reference_modes: Vec<usize>,
    pub size_cap: usize,
    /// Times at which `V∥` is sampled to fix the sparsity pattern of the
    /// one-body hopping.
    pub structure_times: Vec<f64>,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        Self {
            excitation_cap: None,
            reference_modes: Vec::new(),
            size_cap: DEFAULT_SIZE_CAP,
            structure_times: vec![0.0],
        }
    }
}

/// `H = Σ h_ab a†_a a_b + ½ Σ W_abcd a†_a a†_b a_d a_c` restricted to the
/// states reachable from a seed set.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    pub basis: Arc<FockBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    hop_ptr: Vec<usize>,
    hop_cols: Vec<u32>,
    hop_pairs: Vec<u32>,
    hop_coef: Vec<f64>,
    n_modes: usize,
    time_dependent: bool,
}

/// The Hamiltonian frozen at one time.
struct Frozen {
    diag: Vec<f64>,
    hop_vals: Vec<Complex64>,
}

struct Entry {
    row: u32,
    col: u32,
    val: f64,
}

struct Hop {
    row: u32,
    col: u32,
    pair: u32,
    coef: f64,
}

impl SparseHamiltonian {
    pub fn assemble(
        modes: &ModeBasis,
        n_particles: usize,
        seeds: &[Vec<u16>],
        opts: &HamiltonianOptions,
    ) -> Result<Self> {
        let m = modes.n_modes();
        if seeds.is_empty() {
            return Err(domain("seeds", "need at least one seed state"));
        }
        let cap = opts.excitation_cap.unwrap_or(n_particles);
        let mut basis = FockBasis::empty(m, n_particles);
        for s in seeds {
            if s.len() != n_particles || s.iter().any(|&a| a as usize >= m) {
                return Err(domain(
                    "seeds",
                    "seed is not an N-particle multiset of valid modes",
                ));
            }
            let mut s = s.clone();
            s.sort_unstable();
            basis.insert(s);
        }

        // hopping pattern from the off-diagonal part of V∥
        let mut hop_mask = vec![false; m * m];
        if !modes.external.is_zero() {
            let mats: Vec<DMatrix<Complex64>> = opts
                .structure_times
                .iter()
                .map(|&t| modes.external_matrix(t))
                .collect();
            let peak = mats.iter().map(|v| v.camax()).fold(0.0, f64::max);
            for v in &mats {
                for a in 0..m {
                    for b in 0..m {
                        if a != b && v[(a, b)].norm() > 1e-13 * peak {
                            hop_mask[a * m + b] = true;
                        }
                    }
                }
            }
        }
        let hops_from: Vec<Vec<u16>> = (0..m)
            .map(|b| {
                (0..m)
                    .filter(|&a| hop_mask[a * m + b])
                    .map(|a| a as u16)
                    .collect()
            })
            .collect();

        // modes grouped by momentum
        let mut by_momentum: std::collections::HashMap<i64, Vec<u16>> =
            std::collections::HashMap::new();
        for a in 0..m {
            by_momentum
                .entry(modes.momentum(a))
                .or_default()
                .push(a as u16);
        }

        let mut entries: Vec<Entry> = Vec::new();
        let mut hops: Vec<Hop> = Vec::new();
        let mut queue: VecDeque<usize> = (0..basis.len()).collect();
        let interacting = modes.two_body_scale() > 0.0;
        let mut reference = vec![false; m];
        if opts.reference_modes.is_empty() {
            reference[0] = true;
        }
        for &a in &opts.reference_modes {
            if a >= m {
                return Err(domain(
                    "reference_modes",
                    format!("mode {a} outside {m} modes"),
                ));
            }
            reference[a] = true;
        }
        let within_cap = |s: &[u16]| s.iter().filter(|&&x| !reference[x as usize]).count() <= cap;
        let mut scratch: Vec<u16> = Vec::with_capacity(n_particles);
        let mut targets: Vec<(Vec<u16>, f64)> = Vec::new();
        while let Some(si) = queue.pop_front() {
            let s = basis.state(si).to_vec();
            let occ = runs(&s);
            targets.clear();
            if interacting {
                for (i, &(c, nc)) in occ.iter().enumerate() {
                    for &(d, nd) in &occ[i..] {
                        let ann = if c == d {
                            if nc < 2 {
                                continue;
                            }
                            ((nc * (nc - 1)) as f64).sqrt()
                        } else {
                            ((nc * nd) as f64).sqrt()
                        };
                        let mut r = s.clone();
                        remove_one(&mut r, c);
                        remove_one(&mut r, d);
                        let total = modes.momentum(c as usize) + modes.momentum(d as usize);
                        let (c, d) = (c as usize, d as usize);
                        for a in 0..m {
                            let Some(partners) = by_momentum.get(&(total - modes.momentum(a)))
                            else {
                                continue;
                            };
                            for &b in partners {
                                let b = b as usize;
                                if b < a {
                                    continue;
                                }
                                let coef = match (a == b, c == d) {
                                    (false, false) => {
                                        modes.two_body(a, b, c, d) + modes.two_body(a, b, d, c)
                                    }
                                    (true, false) => modes.two_body(a, a, c, d),
                                    (false, true) => modes.two_body(a, b, c, c),
                                    (true, true) => 0.5 * modes.two_body(a, a, c, c),
                                };
                                if coef == 0.0 {
                                    continue;
                                }
                                scratch.clear();
                                scratch.extend_from_slice(&r);
                                let nb = count(&scratch, b as u16);
                                insert_one(&mut scratch, b as u16);
                                let na = count(&scratch, a as u16);
                                insert_one(&mut scratch, a as u16);
                                if !within_cap(&scratch) {
                                    continue;
                                }
                                let cre = (((nb + 1) * (na + 1)) as f64).sqrt();
                                targets.push((scratch.clone(), coef * ann * cre));
                            }
                        }
                    }
                }
            }
            for (t, val) in targets.drain(..) {
                let (ti, fresh) = basis.insert(t);
                if fresh {
                    if basis.len() > opts.size_cap {
                        return Err(Error::Size {
                            size: basis.len(),
                            cap: opts.size_cap,
                            hint: "reduce M_x, M_y or N, or set an excitation cap".into(),
                        });
                    }
                    queue.push_back(ti);
                }
                entries.push(Entry {
                    row: ti as u32,
                    col: si as u32,
                    val,
                });
            }
            for &(b, nb) in &occ {
                for &a in &hops_from[b as usize] {
                    scratch.clear();
                    scratch.extend_from_slice(&s);
                    remove_one(&mut scratch, b);
                    let na = count(&scratch, a);
                    insert_one(&mut scratch, a);
                    if !within_cap(&scratch) {
                        continue;
                    }
                    let (ti, fresh) = basis.insert(scratch.clone());
                    if fresh {
                        if basis.len() > opts.size_cap {
                            return Err(Error::Size {
                                size: basis.len(),
                                cap: opts.size_cap,
                                hint: "reduce M_x, M_y or N, or set an excitation cap".into(),
                            });
                        }
                        queue.push_back(ti);
                    }
                    hops.push(Hop {
                        row: ti as u32,
                        col: si as u32,
                        pair: (a as usize * m + b as usize) as u32,
                        coef: ((nb * (na + 1)) as f64).sqrt(),
                    });
                }
            }
        }

        let dim = basis.len();
        entries.sort_unstable_by_key(|e| (e.row, e.col));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(u32, u32)> = None;
        for e in &entries {
            if last == Some((e.row, e.col)) {
                *vals.last_mut().expect("merged entry") += e.val;
            } else {
                cols.push(e.col);
                vals.push(e.val);
                row_ptr[e.row as usize + 1] += 1;
                last = Some((e.row, e.col));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        hops.sort_unstable_by_key(|h| (h.row, h.col));
        let mut hop_ptr = vec![0usize; dim + 1];
        for h in &hops {
            hop_ptr[h.row as usize + 1] += 1;
        }
        for i in 0..dim {
            hop_ptr[i + 1] += hop_ptr[i];
        }
        Ok(Self {
            basis: Arc::new(basis),
            row_ptr,
            cols,
            vals,
            hop_cols: hops.iter().map(|h| h.col).collect(),
            hop_pairs: hops.iter().map(|h| h.pair).collect(),
            hop_coef: hops.iter().map(|h| h.coef).collect(),
            hop_ptr,
            n_modes: m,
            time_dependent: modes.external.is_time_dependent(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len() + self.hop_coef.len()
    }

    fn freeze(&self, modes: &ModeBasis, t: f64) -> Frozen {
        let h = modes.one_body_matrix(t);
        let diag = (0..self.dim())
            .map(|i| {
                runs(self.basis.state(i))
                    .iter()
                    .map(|&(a, na)| na as f64 * h[(a as usize, a as usize)].re)
                    .sum()
            })
            .collect();
        let m = self.n_modes;
        let hop_vals = self
            .hop_pairs
            .iter()
            .zip(&self.hop_coef)
            .map(|(&p, &c)| h[(p as usize / m, p as usize % m)] * c)
            .collect();
        Frozen { diag, hop_vals }
    }

    fn apply_frozen(&self, f: &Frozen, x: &[Complex64], y: &mut [Complex64]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = x[r] * f.diag[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            for k in self.hop_ptr[r]..self.hop_ptr[r + 1] {
                acc += x[self.hop_cols[k] as usize] * f.hop_vals[k];
            }
            *out = acc;
        });
    }

    /// `y = H(t) x`.
    pub fn apply(&self, modes: &ModeBasis, t: f64, x: &[Complex64], y: &mut [Complex64]) {
        let f = self.freeze(modes, t);
        self.apply_frozen(&f, x, y);
    }

    /// `⟨ψ, H(t) ψ⟩`.
    pub fn expectation(&self, modes: &ModeBasis, t: f64, psi: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(modes, t, psi, &mut y);
        psi.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest `|H_ij − conj(H_ji)|` over stored entries, at time `t`.
    pub fn hermiticity_residual(&self, modes: &ModeBasis, t: f64) -> f64 {
        let f = self.freeze(modes, t);
        let mut worst = 0.0f64;
        let lookup = |r: usize, c: u32| -> Complex64 {
            let mut v = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == c {
                    v += self.vals[k];
                }
            }
            for k in self.hop_ptr[r]..self.hop_ptr[r + 1] {
                if self.hop_cols[k] == c {
                    v += f.hop_vals[k];
                }
            }
            v
        };
        for r in 0..self.dim() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                worst = worst.max((lookup(r, c as u32) - lookup(c, r as u32).conj()).norm());
            }
            for k in self.hop_ptr[r]..self.hop_ptr[r + 1] {
                let c = self.hop_cols[k] as usize;
                worst = worst.max((lookup(r, c as u32) - lookup(c, r as u32).conj()).norm());
            }
        }
        worst
    }
}

/// A mode basis with the Hamiltonian assembled on the states reachable
/// from the seeds.
#[derive(Debug, Clone)]
pub struct ManyBodySystem {
    pub modes: ModeBasis,
    pub hamiltonian: SparseHamiltonian,
}

impl ManyBodySystem {
    pub fn new(
        modes: ModeBasis,
        n_particles: usize,
        seeds: &[Vec<u16>],
        opts: &HamiltonianOptions,
    ) -> Result<Self> {
        let hamiltonian = SparseHamiltonian::assemble(&modes, n_particles, seeds, opts)?;
        Ok(Self { modes, hamiltonian })
    }

    pub fn basis(&self) -> Arc<FockBasis> {
        self.hamiltonian.basis.clone()
    }

    pub fn n_particles(&self) -> usize {
        self.hamiltonian.basis.n_particles()
    }

    /// `φ^{⊗N}` for mode coefficients `phi`.
    pub fn product_state(&self, phi: &[Complex64]) -> Result<ManyBodyState> {
        ManyBodyState::product(self.basis(), phi)
    }

    pub fn energy(&self, state: &ManyBodyState, t: f64) -> f64 {
        self.hamiltonian
            .expectation(&self.modes, t, &state.amplitudes)
    }
}

/// `E^ψ = ⟨ψ, H(t) ψ⟩/N − E₀/ε²`.
pub fn renormalized_energy(system: &ManyBodySystem, state: &ManyBodyState, t: f64) -> f64 {
    system.energy(state, t) / system.n_particles() as f64 - system.modes.transverse_ground_energy()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    pub output_every: usize,
    pub keep_states: bool,
    pub krylov: KrylovOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
    pub renormalized_energy: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub states: Vec<ManyBodyState>,
    pub final_state: ManyBodyState,
    pub steps: usize,
    pub max_krylov_dim: usize,
}

const MAX_HALVINGS: u32 = 8;

fn advance(
    system: &ManyBodySystem,
    frozen: Option<&Frozen>,
    psi: &[Complex64],
    t: f64,
    dt: f64,
    opts: &KrylovOptions,
    depth: u32,
    max_dim: &mut usize,
) -> Result<Vec<Complex64>> {
    let h = &system.hamiltonian;
    let local;
    let f = match frozen {
        Some(f) => f,
        None => {
            local = h.freeze(&system.modes, t + 0.5 * dt);
            &local
        }
    };
    match expm_krylov(|x, y| h.apply_frozen(f, x, y), psi, dt, opts) {
        Ok((out, info)) => {
            *max_dim = (*max_dim).max(info.dim);
            Ok(out)
        }
        Err(Error::Tolerance(_)) if depth < MAX_HALVINGS => {
            let half = advance(system, frozen, psi, t, 0.5 * dt, opts, depth + 1, max_dim)?;
            advance(
                system,
                frozen,
                &half,
                t + 0.5 * dt,
                0.5 * dt,
                opts,
                depth + 1,
                max_dim,
            )
        }
        Err(e) => Err(e),
    }
}

/// Propagates with `exp(−i H(t + dt/2) dt)` per step; each exponential is a
/// Krylov approximation, and a step is split in halves when the Krylov space
/// does not converge.
pub fn evolve(
    state: &ManyBodyState,
    system: &ManyBodySystem,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !Arc::ptr_eq(&state.basis, &system.hamiltonian.basis)
        && *state.basis != *system.hamiltonian.basis
    {
        return Err(domain(
            "state",
            "state is not expressed in the system's basis",
        ));
    }
    if !(opts.dt > 0.0) || !(opts.t_final >= 0.0) {
        return Err(domain("dt", "need dt > 0 and t_final >= 0"));
    }
    let steps = (opts.t_final / opts.dt).round() as usize;
    let steps = if opts.t_final > 0.0 { steps.max(1) } else { 0 };
    let dt = if steps > 0 {
        opts.t_final / steps as f64
    } else {
        0.0
    };
    let static_h = if system.hamiltonian.time_dependent {
        None
    } else {
        Some(system.hamiltonian.freeze(&system.modes, state.time))
    };
    let n = system.n_particles() as f64;
    let e0 = system.modes.transverse_ground_energy();
    let sample = |s: &ManyBodyState| {
        let energy = system.energy(s, s.time);
        Sample {
            t: s.time,
            norm: s.norm(),
            energy,
            renormalized_energy: energy / n - e0,
        }
    };
    let mut cur = state.clone();
    let mut samples = vec![sample(&cur)];
    let mut states = if opts.keep_states {
        vec![cur.clone()]
    } else {
        Vec::new()
    };
    let mut max_dim = 0;
    let t0 = state.time;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let next = advance(
            system,
            static_h.as_ref(),
            &cur.amplitudes,
            t,
            dt,
            &opts.krylov,
            0,
            &mut max_dim,
        )?;
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Instability {
                step: k + 1,
                detail: "non-finite amplitude".into(),
            });
        }
        cur.amplitudes = next;
        cur.time = t0 + (k + 1) as f64 * dt;
        let last = k + 1 == steps;
        if last || (opts.output_every > 0 && (k + 1) % opts.output_every == 0) {
            samples.push(sample(&cur));
            if opts.keep_states {
                states.push(cur.clone());
            }
        }
    }
    Ok(Trajectory {
        samples,
        states,
        final_state: cur,
        steps,
        max_krylov_dim: max_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_basis, BasisOptions};
    use super::*;
    use crate::manybody::reduced_density;
    use crate::potentials::{
        scale, ConfinementPotential, ExternalPotential, InteractionProfile, RadialShape,
    };
    use crate::scaling::ScalingPoint;
    use crate::transverse::{Stencil, TransverseGrid};
    use std::f64::consts::PI;

    fn modes(
        profile: InteractionProfile,
        external: ExternalPotential,
        mx: usize,
        my: usize,
    ) -> ModeBasis {
        let point = ScalingPoint::new(3, 0.5, 0.2).unwrap();
        let mut opts = BasisOptions::for_dim(1);
        opts.transverse_grid = Some(TransverseGrid::new(1, 8.0, 0.01, Stencil::Fourth).unwrap());
        build_basis(
            &point,
            &ConfinementPotential::harmonic(1),
            &external,
            &scale(&profile, &point),
            mx,
            my,
            2.0 * PI,
            &opts,
        )
        .unwrap()
    }

    fn gaussian() -> InteractionProfile {
        InteractionProfile::new(
            RadialShape::GaussianBump {
                height: 2.0,
                sigma: 0.5,
            },
            3.0,
            2,
        )
        .unwrap()
    }

    fn lattice() -> ExternalPotential {
        ExternalPotential::CosineLattice {
            amplitude: 0.7,
            wavenumber: 1.0,
            drive: 0.0,
            drive_frequency: 0.0,
            transverse: 0.3,
        }
    }

    fn opts(dt: f64, t_final: f64) -> EvolveOptions {
        EvolveOptions {
            dt,
            t_final,
            output_every: 1,
            keep_states: false,
            krylov: KrylovOptions::default(),
        }
    }

    #[test]
    fn free_condensate_is_stationary() {
        let sys = ManyBodySystem::new(
            modes(InteractionProfile::zero(2), ExternalPotential::Zero, 3, 2),
            3,
            &[vec![0, 0, 0]],
            &HamiltonianOptions::default(),
        )
        .unwrap();
        assert_eq!(sys.hamiltonian.dim(), 1);
        let psi = ManyBodyState::condensed(sys.basis(), 0).unwrap();
        assert!(renormalized_energy(&sys, &psi, 0.0).abs() < 1e-12);
        let traj = evolve(&psi, &sys, &opts(0.1, 1.0)).unwrap();
        assert!((psi.inner(&traj.final_state).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn moving_condensate_energy() {
        let mb = modes(InteractionProfile::zero(2), ExternalPotential::Zero, 5, 2);
        let a = mb.mode_index(2, 0).unwrap();
        let seed = vec![a as u16; 3];
        let sys = ManyBodySystem::new(mb, 3, &[seed], &HamiltonianOptions::default()).unwrap();
        let psi = ManyBodyState::condensed(sys.basis(), a).unwrap();
        assert!((renormalized_energy(&sys, &psi, 0.0) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn interacting_closure_is_hermitian_and_conserves() {
        let mb = modes(gaussian(), lattice(), 5, 3);
        let phi = {
            let mut v = vec![Complex64::new(0.0, 0.0); mb.n_modes()];
            v[0] = Complex64::new(0.8, 0.0);
            v[mb.mode_index(1, 0).unwrap()] = Complex64::new(0.0, 0.6);
            v
        };
        let seeds = ManyBodyState::product_support(3, &[0, mb.mode_index(1, 0).unwrap()]);
        let sys = ManyBodySystem::new(mb, 3, &seeds, &HamiltonianOptions::default()).unwrap();
        assert!(sys.hamiltonian.hermiticity_residual(&sys.modes, 0.0) < 1e-12);
        let psi = sys.product_state(&phi).unwrap();
        let traj = evolve(&psi, &sys, &opts(0.05, 1.0)).unwrap();
        let e0 = traj.samples[0].energy;
        for s in &traj.samples {
            assert!((s.norm - 1.0).abs() < 1e-9);
            assert!(
                (s.energy - e0).abs() < 1e-8 * e0.abs().max(1.0),
                "drift {}",
                s.energy - e0
            );
        }
        let g = reduced_density(&traj.final_state, 1).unwrap();
        assert!((g.trace().re - 1.0).abs() < 1e-10);
        assert!(g.eigenvalues()[0] > -1e-10);
    }

    #[test]
    fn closure_matches_full_basis() {
        // on the full basis the same dynamics must come out
        let mb = modes(gaussian(), ExternalPotential::Zero, 3, 2);
        let m = mb.n_modes();
        let all = FockBasis::full(m, 2, None, 1000).unwrap();
        let seeds: Vec<Vec<u16>> = (0..all.len()).map(|i| all.state(i).to_vec()).collect();
        let full =
            ManyBodySystem::new(mb.clone(), 2, &seeds, &HamiltonianOptions::default()).unwrap();
        let reach =
            ManyBodySystem::new(mb, 2, &[vec![0, 0]], &HamiltonianOptions::default()).unwrap();
        assert!(reach.hamiltonian.dim() < full.hamiltonian.dim());
        let a = evolve(
            &ManyBodyState::condensed(full.basis(), 0).unwrap(),
            &full,
            &opts(0.1, 0.5),
        )
        .unwrap();
        let b = evolve(
            &ManyBodyState::condensed(reach.basis(), 0).unwrap(),
            &reach,
            &opts(0.1, 0.5),
        )
        .unwrap();
        let ga = reduced_density(&a.final_state, 1).unwrap().matrix;
        let gb = reduced_density(&b.final_state, 1).unwrap().matrix;
        assert!((ga - gb).camax() < 1e-11);
    }

    #[test]
    fn excitation_cap_limits_dimension() {
        let mb = modes(gaussian(), ExternalPotential::Zero, 5, 3);
        let capped = HamiltonianOptions {
            excitation_cap: Some(2),
            ..Default::default()
        };
        let sys = ManyBodySystem::new(mb.clone(), 4, &[vec![0; 4]], &capped).unwrap();
        for i in 0..sys.hamiltonian.dim() {
            assert!(sys.basis().excitations(i) <= 2);
        }
        let tiny = HamiltonianOptions {
            size_cap: 3,
            ..Default::default()
        };
        assert!(matches!(
            ManyBodySystem::new(mb, 4, &[vec![0; 4]], &tiny),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn excitation_cap_counts_outside_reference_set() {
        let mb = modes(gaussian(), ExternalPotential::Zero, 5, 3);
        let refs = vec![
            0,
            mb.mode_index(1, 0).unwrap(),
            mb.mode_index(-1, 0).unwrap(),
        ];
        let opts = HamiltonianOptions {
            excitation_cap: Some(1),
            reference_modes: refs.clone(),
            ..Default::default()
        };
        let seeds = ManyBodyState::product_support(3, &refs);
        let sys = ManyBodySystem::new(mb.clone(), 3, &seeds, &opts).unwrap();
        let basis = sys.basis();
        for i in 0..basis.len() {
            let outside = basis
                .state(i)
                .iter()
                .filter(|&&a| !refs.contains(&(a as usize)))
                .count();
            assert!(outside <= 1);
        }
        for s in &seeds {
            assert!(basis.find(s).is_some());
        }
        let bad = HamiltonianOptions {
            excitation_cap: Some(1),
            reference_modes: vec![99],
            ..Default::default()
        };
        assert!(ManyBodySystem::new(mb, 3, &seeds, &bad).is_err());
    }

    #[test]
    fn driven_lattice_midpoint_order_two() {
        let field = ExternalPotential::CosineLattice {
            amplitude: 1.0,
            wavenumber: 1.0,
            drive: 0.8,
            drive_frequency: 4.0,
            transverse: 0.0,
        };
        let mb = modes(gaussian(), field, 5, 1);
        let seeds = vec![vec![0u16, 0]];
        let h_opts = HamiltonianOptions {
            structure_times: vec![0.0, 0.1, 0.3],
            ..Default::default()
        };
        let sys = ManyBodySystem::new(mb, 2, &seeds, &h_opts).unwrap();
        let psi = ManyBodyState::condensed(sys.basis(), 0).unwrap();
        let run = |dt: f64| evolve(&psi, &sys, &opts(dt, 1.0)).unwrap().final_state;
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let d1: f64 = a
            .amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let d2: f64 = b
            .amplitudes
            .iter()
            .zip(&c.amplitudes)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let order = (d1 / d2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}
