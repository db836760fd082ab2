//! Effective one-dimensional NLS `i∂ₜΦ = (−∂ₓ² + V∥(t,(x,0)) + b|Φ|²)Φ`
//! on a periodic box, with its energy, Sobolev norms and the envelope `𝔢(t)`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::potentials::ExternalPotential;
use crate::quadrature::integrate;

/// Threshold on the spectral tail for accepting an initial state.
pub const INITIAL_TAIL_TOLERANCE: f64 = 1e-8;
/// Threshold on the spectral tail above which a run is aborted.
pub const TAIL_BLOWUP: f64 = 1e-3;

/// Periodic grid on `[-L/2, L/2)` with `M` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    pub length: f64,
    pub points: usize,
}

impl PeriodicGrid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(domain("length", format!("need L > 0, got {length}")));
        }
        if points < 4 {
            return Err(domain("points", format!("need M >= 4, got {points}")));
        }
        Ok(Self { length, points })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let m = self.points as i64;
        let j = j as i64;
        let signed = if j <= m / 2 { j } else { j - m };
        2.0 * PI * signed as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.wavenumber(j)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensateState {
    pub grid: PeriodicGrid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl CondensateState {
    /// Samples `f` and normalizes in `L²`.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.xs().into_iter().map(f).collect();
        let mut state = Self {
            grid,
            values,
            time: 0.0,
        };
        state.normalize()?;
        Ok(state)
    }

    /// `e^{ikx}/√L` with `k = 2π·index/L`.
    pub fn plane_wave(grid: PeriodicGrid, index: i64) -> Result<Self> {
        let k = 2.0 * PI * index as f64 / grid.length;
        Self::from_fn(grid, |x| Complex64::from_polar(1.0, k * x))
    }

    pub fn gaussian(grid: PeriodicGrid, center: f64, width: f64, momentum: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(domain("width", format!("need width > 0, got {width}")));
        }
        Self::from_fn(grid, |x| {
            let d = x - center;
            Complex64::from_polar((-d * d / (2.0 * width * width)).exp(), momentum * x)
        })
    }

    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(domain("values", "state has zero or non-finite norm"));
        }
        self.values.iter_mut().for_each(|v| *v /= n);
        Ok(())
    }

    /// `⟨self, other⟩` by grid quadrature.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.spacing()
    }

    pub fn l2_distance(&self, other: &Self) -> f64 {
        (self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>())
        .sqrt()
    }

    /// Fourier coefficients `Φ̂_k = M⁻¹ Σ_j Φ_j e^{−ik x_j}` up to a common phase.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        let fft = FftPlanner::new().plan_fft_forward(self.grid.points);
        fft.process(&mut buf);
        let scale = 1.0 / self.grid.points as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Fraction of `L²` mass carried by wavenumbers above half the Nyquist value.
    pub fn spectral_tail(&self) -> f64 {
        tail_fraction(&self.grid, &self.spectrum())
    }

    /// Largest `|Φ|` at the first and last grid points.
    pub fn seam_amplitude(&self) -> f64 {
        self.values[0]
            .norm()
            .max(self.values[self.grid.points - 1].norm())
    }

    /// Little-endian dump: `u64` point count, `f64` box length, then
    /// `(re, im)` pairs as `f32`.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.grid.points as u64).to_le_bytes())?;
        w.write_all(&self.grid.length.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&(v.re as f32).to_le_bytes())?;
            w.write_all(&(v.im as f32).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let points = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let length = f64::from_le_bytes(b8);
        let grid = PeriodicGrid::new(length, points)?;
        let mut b4 = [0u8; 4];
        let mut values = Vec::with_capacity(points);
        for _ in 0..points {
            r.read_exact(&mut b4)?;
            let re = f32::from_le_bytes(b4) as f64;
            r.read_exact(&mut b4)?;
            let im = f32::from_le_bytes(b4) as f64;
            values.push(Complex64::new(re, im));
        }
        Ok(Self {
            grid,
            values,
            time: 0.0,
        })
    }
}

fn tail_fraction(grid: &PeriodicGrid, spec: &[Complex64]) -> f64 {
    let cutoff = 0.5 * PI * grid.points as f64 / grid.length;
    let mut total = 0.0;
    let mut tail = 0.0;
    for (j, c) in spec.iter().enumerate() {
        let p = c.norm_sqr();
        total += p;
        if grid.wavenumber(j).abs() > cutoff {
            tail += p;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub sup: f64,
}

/// `‖Φ‖₂`, `‖Φ‖_{H¹}`, `‖Φ‖_{H²}` (spectral) and `max |Φ|` on the grid.
pub fn norm_report(state: &CondensateState) -> NormReport {
    let spec = state.spectrum();
    let l = state.grid.length;
    let (mut m0, mut m2, mut m4) = (0.0, 0.0, 0.0);
    for (j, c) in spec.iter().enumerate() {
        let k2 = state.grid.wavenumber(j).powi(2);
        let p = c.norm_sqr() * l;
        m0 += p;
        m2 += k2 * p;
        m4 += k2 * k2 * p;
    }
    NormReport {
        l2: m0.sqrt(),
        h1: (m0 + m2).sqrt(),
        h2: (m0 + m2 + m4).sqrt(),
        sup: state.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
    }
}

/// `ℰ^Φ = ⟨Φ, (−∂ₓ² + V∥(t,(x,0)) + (b/2)|Φ|²) Φ⟩`.
pub fn effective_energy(
    state: &CondensateState,
    external: &ExternalPotential,
    b: f64,
    t: f64,
) -> f64 {
    let spec = state.spectrum();
    let kinetic: f64 = spec
        .iter()
        .enumerate()
        .map(|(j, c)| state.grid.wavenumber(j).powi(2) * c.norm_sqr())
        .sum::<f64>()
        * state.grid.length;
    let h = state.grid.spacing();
    let potential: f64 = state
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let rho = v.norm_sqr();
            (external.on_axis(t, state.grid.x(j)) + 0.5 * b * rho) * rho
        })
        .sum::<f64>()
        * h;
    kinetic + potential
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Record a sample every this many steps; `0` records only the endpoints.
    pub output_every: usize,
    /// Keep full states at the recorded times, not only their diagnostics.
    pub keep_states: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub sup: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub states: Vec<CondensateState>,
    pub final_state: CondensateState,
    pub steps: usize,
    /// Largest `|Φ|` seen at the box seam; should stay below `1e-8` for
    /// localized data on a box standing in for the line.
    pub max_seam_amplitude: f64,
    pub max_spectral_tail: f64,
}

/// Reusable split-step propagator for one grid.
pub struct SplitStep {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k2: Vec<f64>,
}

impl SplitStep {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
            k2: grid.wavenumbers().iter().map(|k| k * k).collect(),
            grid,
        }
    }

    fn phase(&self, psi: &mut [Complex64], external: &ExternalPotential, b: f64, t: f64, tau: f64) {
        for (j, v) in psi.iter_mut().enumerate() {
            let u = external.on_axis(t, self.grid.x(j)) + b * v.norm_sqr();
            *v *= Complex64::from_polar(1.0, -u * tau);
        }
    }

    /// One Strang step of length `dt` from time `t`; returns the tail
    /// fraction of the transformed state.
    pub fn step(
        &self,
        psi: &mut [Complex64],
        external: &ExternalPotential,
        b: f64,
        t: f64,
        dt: f64,
    ) -> f64 {
        let t_mid = t + 0.5 * dt;
        self.phase(psi, external, b, t_mid, 0.5 * dt);
        self.forward.process(psi);
        let scale = 1.0 / self.grid.points as f64;
        for (v, k2) in psi.iter_mut().zip(&self.k2) {
            *v *= Complex64::from_polar(scale, -k2 * dt);
        }
        let tail = tail_fraction(&self.grid, psi);
        self.inverse.process(psi);
        self.phase(psi, external, b, t_mid, 0.5 * dt);
        tail
    }
}

fn sample(state: &CondensateState, external: &ExternalPotential, b: f64) -> TrajectorySample {
    let n = norm_report(state);
    TrajectorySample {
        t: state.time,
        l2: n.l2,
        h1: n.h1,
        h2: n.h2,
        sup: n.sup,
        energy: effective_energy(state, external, b, state.time),
    }
}

/// Strang split-step propagation from `state.time` to `state.time + t_final`.
pub fn evolve(
    state: &CondensateState,
    external: &ExternalPotential,
    b: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(opts.dt > 0.0) {
        return Err(domain("dt", format!("need dt > 0, got {}", opts.dt)));
    }
    if !(b >= 0.0) {
        return Err(domain("b", format!("need b >= 0 (defocusing), got {b}")));
    }
    if !(opts.t_final >= 0.0) {
        return Err(domain(
            "t_final",
            format!("need T >= 0, got {}", opts.t_final),
        ));
    }
    let tail0 = state.spectral_tail();
    if tail0 > INITIAL_TAIL_TOLERANCE {
        return Err(Error::Resolution(format!(
            "initial spectral tail {tail0:e} exceeds {INITIAL_TAIL_TOLERANCE:e}; refine the grid"
        )));
    }
    let steps = (opts.t_final / opts.dt)
        .round()
        .max(if opts.t_final > 0.0 { 1.0 } else { 0.0 }) as usize;
    let dt = if steps > 0 {
        opts.t_final / steps as f64
    } else {
        0.0
    };
    let prop = SplitStep::new(state.grid);
    let t0 = state.time;
    let mut cur = state.clone();
    let mut samples = vec![sample(&cur, external, b)];
    let mut states = if opts.keep_states {
        vec![cur.clone()]
    } else {
        Vec::new()
    };
    let mut max_seam = cur.seam_amplitude();
    let mut max_tail = tail0;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let tail = prop.step(&mut cur.values, external, b, t, dt);
        cur.time = t0 + (n + 1) as f64 * dt;
        if cur
            .values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Instability {
                step: n + 1,
                detail: format!("non-finite amplitude at t = {}", cur.time),
            });
        }
        if tail > TAIL_BLOWUP {
            return Err(Error::Resolution(format!(
                "spectral tail {tail:e} above {TAIL_BLOWUP:e} at step {}",
                n + 1
            )));
        }
        max_tail = max_tail.max(tail);
        max_seam = max_seam.max(cur.seam_amplitude());
        let last = n + 1 == steps;
        let record = last || (opts.output_every > 0 && (n + 1) % opts.output_every == 0);
        if record {
            samples.push(sample(&cur, external, b));
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
        max_seam_amplitude: max_seam,
        max_spectral_tail: max_tail,
    })
}

/// Constituents of `𝔢²(t) = 1 + |E^ψ(0)| + |ℰ^Φ(0)| + ∫₀ᵗ‖V̇∥‖_∞ + sup‖∂ₜⁱ∂_yʲV∥‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeInputs {
    pub e_psi0: f64,
    pub e_phi0: f64,
    pub vpar_dot_l1_in_time: f64,
    pub vpar_mixed_sup: f64,
}

impl EnvelopeInputs {
    pub fn new(
        e_psi0: f64,
        e_phi0: f64,
        vpar_dot_l1_in_time: f64,
        vpar_mixed_sup: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("e_psi0", e_psi0),
            ("e_phi0", e_phi0),
            ("vpar_dot_l1_in_time", vpar_dot_l1_in_time),
            ("vpar_mixed_sup", vpar_mixed_sup),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(domain(name, format!("need a finite value >= 0, got {v}")));
            }
        }
        Ok(Self {
            e_psi0,
            e_phi0,
            vpar_dot_l1_in_time,
            vpar_mixed_sup,
        })
    }

    /// Inputs at time `t` for a given field; `∫₀ᵗ‖V̇∥‖_∞` is integrated
    /// exactly for the lattice drive and bounded by `t·sup‖V̇∥‖_∞` otherwise.
    pub fn for_field(
        external: &ExternalPotential,
        e_psi0: f64,
        e_phi0: f64,
        t: f64,
    ) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(domain("t", format!("need t >= 0, got {t}")));
        }
        let dot = match external {
            ExternalPotential::CosineLattice {
                amplitude,
                drive,
                drive_frequency,
                ..
            } if external.is_time_dependent() => {
                let c = (amplitude * drive * drive_frequency).abs();
                integrate(
                    |s| c * (drive_frequency * s).cos().abs(),
                    0.0,
                    t,
                    1e-12,
                    1e-12,
                )?
                .value
            }
            _ => t * external.time_derivative_sup(),
        };
        Self::new(e_psi0.abs(), e_phi0.abs(), dot, external.mixed_sup())
    }
}

/// `𝔢` for the given inputs; always `≥ 1`.
pub fn envelope(inputs: &EnvelopeInputs) -> f64 {
    (1.0 + inputs.e_psi0 + inputs.e_phi0 + inputs.vpar_dot_l1_in_time + inputs.vpar_mixed_sup)
        .sqrt()
}

/// `C(t) = 𝔢(t) exp(𝔢²(t) + ∫₀ᵗ 𝔢²)` from envelope values on a time grid
/// (trapezoidal in time).
pub fn gronwall_constant(times: &[f64], envelope_values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            let dt = times[i] - times[i - 1];
            acc += 0.5 * dt * (envelope_values[i].powi(2) + envelope_values[i - 1].powi(2));
        }
        let e = envelope_values[i];
        out.push(e * (e * e + acc).exp());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lattice() -> ExternalPotential {
        ExternalPotential::CosineLattice {
            amplitude: 0.5,
            wavenumber: 2.0 * PI / 10.0,
            drive: 0.0,
            drive_frequency: 0.0,
            transverse: 0.0,
        }
    }

    #[test]
    fn plane_wave_energy_and_norms() {
        let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let state = CondensateState::plane_wave(grid, 3).unwrap();
        let b = 1.7;
        let e = effective_energy(&state, &ExternalPotential::Zero, b, 0.0);
        let exact = 9.0 + b / (2.0 * 2.0 * PI);
        assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
        let n = norm_report(&state);
        assert!((n.l2 - 1.0).abs() < 1e-12);
        assert!((n.h1 * n.h1 - 10.0).abs() < 1e-11);
        assert!((n.sup - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_kinetic_energy() {
        // ∫|Φ'|² = 1/(2σ²) for a normalized real Gaussian e^{-x²/2σ²}
        let grid = PeriodicGrid::new(40.0, 256).unwrap();
        let sigma = 1.3;
        let state = CondensateState::gaussian(grid, 0.0, sigma, 0.0).unwrap();
        let e = effective_energy(&state, &ExternalPotential::Zero, 0.0, 0.0);
        assert!((e - 0.5 / (sigma * sigma)).abs() < 1e-12, "{e}");
    }

    #[test]
    fn plane_wave_dispersion() {
        let grid = PeriodicGrid::new(2.0 * PI, 32).unwrap();
        let state = CondensateState::plane_wave(grid, 2).unwrap();
        let b = 2.5;
        let opts = EvolveOptions {
            dt: 1e-3,
            t_final: 1.0,
            output_every: 0,
            keep_states: false,
        };
        let traj = evolve(&state, &ExternalPotential::Zero, b, &opts).unwrap();
        let omega = 4.0 + b / grid.length;
        let overlap = state.inner(&traj.final_state);
        let err = (overlap - Complex64::from_polar(1.0, -omega)).norm();
        assert!(err < 1e-8, "phase error {err}");
    }

    #[test]
    fn free_flow_matches_exact_propagator() {
        let grid = PeriodicGrid::new(40.0, 256).unwrap();
        let state = CondensateState::gaussian(grid, -2.0, 1.5, 1.0).unwrap();
        let opts = EvolveOptions {
            dt: 0.01,
            t_final: 0.5,
            output_every: 0,
            keep_states: false,
        };
        let traj = evolve(&state, &ExternalPotential::Zero, 0.0, &opts).unwrap();
        let spec = state.spectrum();
        let mut exact: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(1.0, -grid.wavenumber(j).powi(2) * 0.5))
            .collect();
        FftPlanner::new()
            .plan_fft_inverse(grid.points)
            .process(&mut exact);
        let exact = CondensateState {
            grid,
            values: exact,
            time: 0.5,
        };
        assert!(exact.l2_distance(&traj.final_state) < 1e-12);
    }

    #[test]
    fn conservation_time_independent() {
        let grid = PeriodicGrid::new(40.0, 256).unwrap();
        let state = CondensateState::gaussian(grid, 0.0, 2.0, 0.0).unwrap();
        let b = 1.0;
        let opts = EvolveOptions {
            dt: 1e-3,
            t_final: 1.0,
            output_every: 100,
            keep_states: false,
        };
        let traj = evolve(&state, &lattice(), b, &opts).unwrap();
        let e0 = traj.samples[0].energy;
        for s in &traj.samples {
            assert!((s.l2 - 1.0).abs() < 1e-10, "mass {}", s.l2);
            assert!(
                (s.energy - e0).abs() < 1e-8,
                "energy drift {}",
                s.energy - e0
            );
            assert!(s.sup <= s.h1);
        }
    }

    #[test]
    fn strang_order_two() {
        let grid = PeriodicGrid::new(40.0, 256).unwrap();
        let state = CondensateState::gaussian(grid, 0.0, 1.5, 0.5).unwrap();
        let field = ExternalPotential::CosineLattice {
            amplitude: 1.0,
            wavenumber: 2.0 * PI / 10.0,
            drive: 0.5,
            drive_frequency: 3.0,
            transverse: 0.0,
        };
        let run = |dt: f64| {
            let opts = EvolveOptions {
                dt,
                t_final: 1.0,
                output_every: 0,
                keep_states: false,
            };
            evolve(&state, &field, 2.0, &opts).unwrap().final_state
        };
        let a = run(0.02);
        let b = run(0.01);
        let c = run(0.005);
        let ratio = a.l2_distance(&b) / b.l2_distance(&c);
        assert!((ratio.log2() - 2.0).abs() < 0.1, "order {}", ratio.log2());
    }

    #[test]
    fn unresolved_initial_state_rejected() {
        let grid = PeriodicGrid::new(10.0, 16).unwrap();
        let state = CondensateState::gaussian(grid, 0.0, 0.2, 0.0).unwrap();
        let opts = EvolveOptions {
            dt: 1e-3,
            t_final: 0.1,
            output_every: 0,
            keep_states: false,
        };
        assert!(matches!(
            evolve(&state, &ExternalPotential::Zero, 0.0, &opts),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn focusing_rejected() {
        let grid = PeriodicGrid::new(10.0, 16).unwrap();
        let state = CondensateState::plane_wave(grid, 0).unwrap();
        let opts = EvolveOptions {
            dt: 1e-3,
            t_final: 0.1,
            output_every: 0,
            keep_states: false,
        };
        assert!(evolve(&state, &ExternalPotential::Zero, -1.0, &opts).is_err());
    }

    #[test]
    fn envelope_examples() {
        let zero = EnvelopeInputs::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(envelope(&zero), 1.0);
        let two = EnvelopeInputs::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((envelope(&two) - 3f64.sqrt()).abs() < 1e-15);
        let a = EnvelopeInputs::for_field(&lattice(), 0.3, 0.2, 0.5).unwrap();
        let b = EnvelopeInputs::for_field(&lattice(), 0.3, 0.2, 5.0).unwrap();
        assert_eq!(envelope(&a), envelope(&b));
        assert!(EnvelopeInputs::new(-1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn driven_lattice_envelope_grows() {
        let field = ExternalPotential::CosineLattice {
            amplitude: 1.0,
            wavenumber: 1.0,
            drive: 0.5,
            drive_frequency: 2.0,
            transverse: 0.0,
        };
        // ∫₀^{π/2} |cos 2s| ds = 1 with prefactor a₀ δ ω = 1
        let inputs = EnvelopeInputs::for_field(&field, 0.0, 0.0, PI / 2.0).unwrap();
        assert!((inputs.vpar_dot_l1_in_time - 1.0).abs() < 1e-10);
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.bin");
        let grid = PeriodicGrid::new(12.0, 64).unwrap();
        let state = CondensateState::gaussian(grid, 0.5, 1.0, 2.0).unwrap();
        state.write_binary(&path).unwrap();
        let back = CondensateState::read_binary(&path).unwrap();
        assert_eq!(back.grid, grid);
        assert!(back.l2_distance(&state) < 1e-6);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 + 8 * 64);
    }

    #[test]
    fn gronwall_constant_monotone() {
        let times = [0.0, 0.5, 1.0];
        let c = gronwall_constant(&times, &[1.0, 1.0, 1.0]);
        assert!((c[0] - 1f64.exp()).abs() < 1e-14);
        assert!((c[2] - 2f64.exp()).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sup_below_h1(center in -3.0f64..3.0, width in 0.8f64..3.0, p in -2.0f64..2.0) {
            let grid = PeriodicGrid::new(40.0, 256).unwrap();
            let state = CondensateState::gaussian(grid, center, width, p).unwrap();
            let n = norm_report(&state);
            prop_assert!((n.l2 - 1.0).abs() < 1e-12);
            prop_assert!(n.sup <= n.h1);
            prop_assert!(n.h1 <= n.h2);
        }
    }
}
