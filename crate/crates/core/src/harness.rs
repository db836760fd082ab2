//! Configuration, sweeps, persistence and the verification report.
//!
//! A configuration is flat `key = value` text (TOML syntax, no tables).
//! Every key is optional; the defaults describe the desk-scale condensation
//! sweep along `β = 1/2`, `ε = N^{-1}`, `N = 2..8` with a repulsive uniform
//! ball in one transverse dimension.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `beta`, `gamma` | `0.5`, `1.0` | power-law sequence `ε = N^{-γ}` |
//! | `n` | `[2, …, 8]` | particle numbers of the power-law sequence |
//! | `points` | `[]` | explicit `[[N, ε], …]`; overrides `n` and `gamma` |
//! | `profile` | `"uniform_ball"` | `uniform_ball`, `gaussian`, `zero` or `table` |
//! | `profile_height`, `profile_sigma`, `profile_support` | `1.0`, `0.3`, `1.0` | shape parameters |
//! | `profile_table` | none | two-column `r, w(r)` CSV for `table` |
//! | `confinement` | `"harmonic"` | `harmonic` or `gaussian_well` |
//! | `confinement_depth`, `confinement_width` | `4.0`, `1.0` | Gaussian well |
//! | `transverse_dim` | `1` | `1` or `2` |
//! | `external` | `"zero"` | `zero` or `lattice` |
//! | `lattice_amplitude`, `lattice_wavenumber`, `lattice_drive`, `lattice_frequency`, `lattice_transverse` | `0.5, 1, 0, 0, 0` | `a₀(1 + δ sin ωt) cos(qx) + c(1 − e^{−|y|²})` |
//! | `modes_x`, `modes_y` | `9`, `3` | one-body truncation |
//! | `box_length` | `2π` | periodic box for `x` |
//! | `initial` | `"cosine"` | `cosine`: `Φ₀ ∝ 1 + a cos(2πhx/L)`; `mode`: plane wave `h` |
//! | `initial_amplitude`, `initial_harmonic` | `0.5`, `1` | `a` and `h` |
//! | `dt`, `t_final`, `samples` | `0.01`, `0.5`, `1` | N-body step, final time, output intervals |
//! | `krylov_dim`, `krylov_tolerance` | `40`, `1e-12` | Lanczos exponential |
//! | `nls_points`, `nls_dt` | `256`, `1e-3` | split-step grid and step |
//! | `excitation_cap` | `3` | particles outside the support of `Φ₀`; `"none"` disables |
//! | `size_cap` | `200000` | largest Fock dimension |
//! | `xi`, `beta1`, `eta` | `0.1`, `0.25`, `1.0` | rate inputs, `ξ ≤ β/4`, `β₁ ≤ β` |
//! | `expect_decreasing` | `true` | assert the trace distance decreases in `N` |
//! | `aux_n`, `aux_epsilon`, `aux_beta`, `aux_samples` | `10000`, `0.01`, `0.5`, `4096` | auxiliary battery point |
//! | `oracle_t_final` | `0.5` | final time of the two-body grid comparison |
//! | `random_systems`, `random_states` | `50`, `100` | sizes of the projector batteries |
//! | `inject_negative_weight` | `false` | seeds a corrupted weight table |
//! | `output` | `"sweep.csv"` | sweep table file name |
//! | `seed` | `0` | random seed |

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::auxiliary::{battery, AuxiliaryConfig, AuxiliaryReport};
use crate::error::{Error, Result};
use crate::manybody::{
    build_basis, evolve, reduced_density, renormalized_energy, BasisOptions, EvolveOptions,
    FockBasis, GridOracle, GridOracleConfig, HamiltonianOptions, KrylovOptions, ManyBodyState,
    ManyBodySystem, ModeBasis, OracleScheme, Sample,
};
use crate::nls::{self, effective_energy, CondensateState, EnvelopeInputs, PeriodicGrid};
use crate::potentials::{
    coupling, scale, validate_family, ConfinementPotential, ExternalPotential, FamilyConstants,
    InteractionProfile, RadialShape, ScaledInteraction,
};
use crate::projectors::{
    alpha_xi, counting_distribution, identity_residuals, rate_bridge, weight_norm_checks,
    CondensateProjector, CountingDistribution, DenseTensor, WeightFunction, DENSE_CAP,
};
use crate::scaling::{
    fit_power_law, theoretical_rate, PowerFit, RateInputs, ScalingPoint, ScalingSequence,
};
use crate::transverse::{
    excited_fraction_bound, solve_ground, Stencil, TransverseGrid, TransverseMode,
};

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    /// Reported-only checks never fail a run.
    pub hard: bool,
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `measured ≤ bound`; NaN fails.
    pub fn new(module: &str, name: &str, measured: f64, bound: f64) -> Self {
        Self {
            module: module.into(),
            name: name.into(),
            measured,
            bound,
            passed: measured <= bound,
            hard: true,
            detail: None,
        }
    }

    pub fn reported(module: &str, name: &str, measured: f64) -> Self {
        Self {
            module: module.into(),
            name: name.into(),
            measured,
            bound: f64::NAN,
            passed: true,
            hard: false,
            detail: None,
        }
    }

    pub fn error(module: &str, name: &str, err: &Error) -> Self {
        Self {
            module: module.into(),
            name: name.into(),
            measured: f64::NAN,
            bound: f64::NAN,
            passed: false,
            hard: true,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn failed(&self) -> bool {
        self.hard && !self.passed
    }
}

fn default_cap() -> Option<usize> {
    Some(3)
}

fn cap_setting<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cap {
        Count(usize),
        Word(String),
    }
    match Cap::deserialize(d)? {
        Cap::Count(c) => Ok(Some(c)),
        Cap::Word(w) if w == "none" => Ok(None),
        Cap::Word(w) => Err(serde::de::Error::custom(format!(
            "excitation_cap must be a count or \"none\", got {w:?}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub beta: f64,
    pub gamma: f64,
    pub n: Vec<u64>,
    pub points: Vec<(u64, f64)>,
    pub profile: String,
    pub profile_height: f64,
    pub profile_sigma: f64,
    pub profile_support: f64,
    pub profile_table: Option<PathBuf>,
    pub confinement: String,
    pub confinement_depth: f64,
    pub confinement_width: f64,
    pub transverse_dim: usize,
    pub external: String,
    pub lattice_amplitude: f64,
    pub lattice_wavenumber: f64,
    pub lattice_drive: f64,
    pub lattice_frequency: f64,
    pub lattice_transverse: f64,
    pub modes_x: usize,
    pub modes_y: usize,
    pub box_length: f64,
    pub initial: String,
    pub initial_amplitude: f64,
    pub initial_harmonic: i64,
    pub dt: f64,
    pub t_final: f64,
    pub samples: usize,
    pub krylov_dim: usize,
    pub krylov_tolerance: f64,
    pub nls_points: usize,
    pub nls_dt: f64,
    #[serde(default = "default_cap", deserialize_with = "cap_setting")]
    pub excitation_cap: Option<usize>,
    pub size_cap: usize,
    pub xi: f64,
    pub beta1: f64,
    pub eta: f64,
    pub expect_decreasing: bool,
    pub aux_n: u64,
    pub aux_epsilon: f64,
    pub aux_beta: f64,
    pub aux_samples: usize,
    pub oracle_t_final: f64,
    pub random_systems: usize,
    pub random_states: usize,
    pub inject_negative_weight: bool,
    pub output: String,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            gamma: 1.0,
            n: (2..=8).collect(),
            points: Vec::new(),
            profile: "uniform_ball".into(),
            profile_height: 1.0,
            profile_sigma: 0.3,
            profile_support: 1.0,
            profile_table: None,
            confinement: "harmonic".into(),
            confinement_depth: 4.0,
            confinement_width: 1.0,
            transverse_dim: 1,
            external: "zero".into(),
            lattice_amplitude: 0.5,
            lattice_wavenumber: 1.0,
            lattice_drive: 0.0,
            lattice_frequency: 0.0,
            lattice_transverse: 0.0,
            modes_x: 9,
            modes_y: 3,
            box_length: 2.0 * PI,
            initial: "cosine".into(),
            initial_amplitude: 0.5,
            initial_harmonic: 1,
            dt: 0.01,
            t_final: 0.5,
            samples: 1,
            krylov_dim: 40,
            krylov_tolerance: 1e-12,
            nls_points: 256,
            nls_dt: 1e-3,
            excitation_cap: default_cap(),
            size_cap: 200_000,
            xi: 0.1,
            beta1: 0.25,
            eta: 1.0,
            expect_decreasing: true,
            aux_n: 10_000,
            aux_epsilon: 0.01,
            aux_beta: 0.5,
            aux_samples: 4096,
            oracle_t_final: 0.5,
            random_systems: 50,
            random_states: 100,
            inject_negative_weight: false,
            output: "sweep.csv".into(),
            seed: 0,
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn require(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

impl ExperimentConfig {
    /// Parses and validates configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.beta > 0.0 && self.beta < 1.0,
            format!("beta must lie in (0, 1), got {}", self.beta),
        )?;
        require(
            ["uniform_ball", "gaussian", "zero", "table"].contains(&self.profile.as_str()),
            format!("unknown profile {:?}", self.profile),
        )?;
        require(
            self.profile != "table" || self.profile_table.is_some(),
            "profile = \"table\" needs profile_table",
        )?;
        require(
            ["harmonic", "gaussian_well"].contains(&self.confinement.as_str()),
            format!("unknown confinement {:?}", self.confinement),
        )?;
        require(
            ["zero", "lattice"].contains(&self.external.as_str()),
            format!("unknown external potential {:?}", self.external),
        )?;
        require(
            ["cosine", "mode"].contains(&self.initial.as_str()),
            format!("unknown initial state {:?}", self.initial),
        )?;
        require(
            (1..=2).contains(&self.transverse_dim),
            "transverse_dim must be 1 or 2",
        )?;
        require(
            self.modes_x >= 1 && self.modes_y >= 1,
            "modes_x and modes_y must be >= 1",
        )?;
        require(self.box_length > 0.0, "box_length must be positive")?;
        require(
            self.dt > 0.0 && self.nls_dt > 0.0,
            "time steps must be positive",
        )?;
        require(self.t_final >= 0.0, "t_final must be >= 0")?;
        require(self.samples >= 1, "samples must be >= 1")?;
        require(self.nls_points >= 4, "nls_points must be >= 4")?;
        require(
            self.krylov_dim >= 2 && self.krylov_tolerance > 0.0,
            "invalid Krylov settings",
        )?;
        require(self.oracle_t_final >= 0.0, "oracle_t_final must be >= 0")?;
        RateInputs::new(self.xi, self.beta1, self.eta, self.beta).map_err(config_err)?;
        self.sequence()?;
        self.interaction_profile()?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical (parsed, defaults filled) configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn header(&self) -> String {
        format!("# dimred config sha256={}", self.hash())
    }

    pub fn sequence(&self) -> Result<ScalingSequence> {
        if self.points.is_empty() {
            ScalingSequence::power_law(self.beta, self.gamma, &self.n)
        } else {
            ScalingSequence::explicit(self.beta, &self.points)
        }
        .map_err(config_err)
    }

    pub fn interaction_profile(&self) -> Result<InteractionProfile> {
        let dim = self.transverse_dim + 1;
        match self.profile.as_str() {
            "uniform_ball" => InteractionProfile::new(
                RadialShape::UniformBall {
                    height: self.profile_height,
                },
                self.profile_support,
                dim,
            ),
            "gaussian" => InteractionProfile::new(
                RadialShape::GaussianBump {
                    height: self.profile_height,
                    sigma: self.profile_sigma,
                },
                self.profile_support,
                dim,
            ),
            "zero" => Ok(InteractionProfile::zero(dim)),
            _ => InteractionProfile::from_csv(
                self.profile_table.as_deref().unwrap_or(Path::new("")),
                dim,
            ),
        }
        .map_err(config_err)
    }

    pub fn confinement_potential(&self) -> ConfinementPotential {
        match self.confinement.as_str() {
            "gaussian_well" => ConfinementPotential::GaussianWell {
                dim: self.transverse_dim,
                depth: self.confinement_depth,
                width: self.confinement_width,
            },
            _ => ConfinementPotential::harmonic(self.transverse_dim),
        }
    }

    pub fn external_potential(&self) -> ExternalPotential {
        match self.external.as_str() {
            "lattice" => ExternalPotential::CosineLattice {
                amplitude: self.lattice_amplitude,
                wavenumber: self.lattice_wavenumber,
                drive: self.lattice_drive,
                drive_frequency: self.lattice_frequency,
                transverse: self.lattice_transverse,
            },
            _ => ExternalPotential::Zero,
        }
    }

    pub fn rate_inputs(&self) -> Result<RateInputs> {
        RateInputs::new(self.xi, self.beta1, self.eta, self.beta).map_err(config_err)
    }

    pub fn initial_condensate(&self) -> Result<CondensateState> {
        let grid = PeriodicGrid::new(self.box_length, self.nls_points).map_err(config_err)?;
        let k = 2.0 * PI * self.initial_harmonic as f64 / self.box_length;
        match self.initial.as_str() {
            "mode" => CondensateState::plane_wave(grid, self.initial_harmonic),
            _ => {
                let a = self.initial_amplitude;
                CondensateState::from_fn(grid, |x| Complex64::new(1.0 + a * (k * x).cos(), 0.0))
            }
        }
        .map_err(config_err)
    }

    pub fn first_point(&self) -> Result<ScalingPoint> {
        self.sequence()?
            .points()
            .first()
            .copied()
            .ok_or_else(|| Error::Config("the sequence has no points".into()))
    }

    pub fn auxiliary_config(&self) -> Result<AuxiliaryConfig> {
        let point = ScalingPoint::new(self.aux_n, self.aux_epsilon, self.aux_beta)?;
        let mut cfg = AuxiliaryConfig::new(point);
        cfg.samples = self.aux_samples;
        Ok(cfg)
    }
}

/// Objects shared by every point of a run.
pub struct RunContext {
    pub config: ExperimentConfig,
    pub profile: InteractionProfile,
    pub confinement: ConfinementPotential,
    pub external: ExternalPotential,
    pub chi: TransverseMode,
    pub rate: RateInputs,
    pub phi0: CondensateState,
}

impl RunContext {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let confinement = config.confinement_potential();
        let chi = solve_ground(
            &confinement,
            &TransverseGrid::default_for(config.transverse_dim),
        )?;
        Ok(Self {
            config: config.clone(),
            profile: config.interaction_profile()?,
            confinement,
            external: config.external_potential(),
            chi,
            rate: config.rate_inputs()?,
            phi0: config.initial_condensate()?,
        })
    }

    /// `b = ‖w‖₁ ∫|χ|⁴`.
    pub fn coupling_limit(&self) -> f64 {
        self.profile.l1_norm * self.chi.quartic
    }
}

/// N-body system and initial data at one scaling point.
pub struct PointSetup {
    pub point: ScalingPoint,
    pub scaled: ScaledInteraction,
    pub b: f64,
    pub system: ManyBodySystem,
    pub psi0: ManyBodyState,
    pub e_psi0: f64,
    pub e_phi0: f64,
}

fn normalized(mut v: Vec<Complex64>) -> (Vec<Complex64>, f64) {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    (v, 1.0 - norm * norm)
}

impl PointSetup {
    pub fn new(ctx: &RunContext, point: ScalingPoint) -> Result<Self> {
        let cfg = &ctx.config;
        let scaled = scale(&ctx.profile, &point);
        let b = coupling(&scaled, ctx.chi.quartic);
        let modes = build_basis(
            &point,
            &ctx.confinement,
            &ctx.external,
            &scaled,
            cfg.modes_x,
            cfg.modes_y,
            cfg.box_length,
            &BasisOptions::for_dim(cfg.transverse_dim),
        )?;
        let (c0, loss) = normalized(modes.project_condensate(&ctx.phi0)?);
        if loss > 1e-8 {
            return Err(Error::Resolution(format!(
                "initial condensate loses {loss:e} of its mass to the mode truncation; raise modes_x"
            )));
        }
        let peak = c0.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let support: Vec<usize> = (0..modes.n_modes())
            .filter(|&a| c0[a].norm() > 1e-12 * peak)
            .collect();
        let t = cfg.t_final;
        let opts = HamiltonianOptions {
            excitation_cap: cfg.excitation_cap,
            reference_modes: support.clone(),
            size_cap: cfg.size_cap,
            structure_times: vec![0.0, 0.37 * t.max(1.0), t],
        };
        let n = point.n_particles as usize;
        let system = ManyBodySystem::new(
            modes,
            n,
            &ManyBodyState::product_support(n, &support),
            &opts,
        )?;
        let psi0 = system.product_state(&c0)?;
        let e_psi0 = renormalized_energy(&system, &psi0, 0.0);
        let e_phi0 = effective_energy(&ctx.phi0, &ctx.external, b, 0.0);
        Ok(Self {
            point,
            scaled,
            b,
            system,
            psi0,
            e_psi0,
            e_phi0,
        })
    }

    pub fn modes(&self) -> &ModeBasis {
        &self.system.modes
    }

    fn evolve_options(&self, cfg: &ExperimentConfig, span: f64) -> EvolveOptions {
        EvolveOptions {
            dt: cfg.dt,
            t_final: span,
            output_every: 1,
            keep_states: false,
            krylov: KrylovOptions {
                max_dim: cfg.krylov_dim,
                tolerance: cfg.krylov_tolerance,
            },
        }
    }
}

/// One measured row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_particles: u64,
    pub epsilon: f64,
    pub mu: f64,
    pub t: f64,
    /// `Tr|γ^(1) − |Φ(t)χ^ε⟩⟨Φ(t)χ^ε||`.
    pub trace_distance: f64,
    pub alpha_m: f64,
    pub alpha_xi: f64,
    /// `|E^ψ − ℰ^Φ|`.
    pub energy_gap: f64,
    pub rate: f64,
    /// `‖q^χ_1 ψ‖`.
    pub excited_fraction: f64,
    pub excited_bound: f64,
    pub alpha_n2: f64,
    pub bridge_upper: f64,
    pub bridge_holds: bool,
    pub envelope: f64,
    pub gronwall: f64,
    /// Mass of `Φ(t)` outside the retained momenta.
    pub projection_loss: f64,
    pub dimension: usize,
}

#[derive(Debug, Clone)]
pub struct PointFailure {
    pub n_particles: u64,
    pub epsilon: f64,
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PointFailure>,
}

fn measure_row(
    ctx: &RunContext,
    setup: &PointSetup,
    state: &ManyBodyState,
    phi: &CondensateState,
    envelope: f64,
    gronwall: f64,
) -> Result<SweepRow> {
    let modes = setup.modes();
    let t = state.time;
    let (c, projection_loss) = normalized(modes.project_condensate(phi)?);
    let proj = CondensateProjector::vector(c)?;
    let bridge = rate_bridge(state, &proj)?;
    let e_psi = renormalized_energy(&setup.system, state, t);
    let e_phi = effective_energy(phi, &ctx.external, setup.b, t);
    let ax = alpha_xi(state, &proj, e_psi, e_phi, ctx.config.xi)?;
    let gamma = reduced_density(state, 1)?;
    let excited: f64 = (0..modes.n_modes())
        .filter(|&a| modes.mode(a).1 > 0)
        .map(|a| gamma.matrix[(a, a)].re)
        .sum();
    let p = setup.point;
    Ok(SweepRow {
        n_particles: p.n_particles,
        epsilon: p.epsilon,
        mu: p.mu,
        t,
        trace_distance: bridge.trace_distance,
        alpha_m: ax.alpha_m,
        alpha_xi: ax.value,
        energy_gap: ax.energy_gap,
        rate: theoretical_rate(&p, &ctx.rate).total,
        excited_fraction: excited.max(0.0).sqrt(),
        excited_bound: excited_fraction_bound(p.epsilon, envelope),
        alpha_n2: bridge.alpha_n2,
        bridge_upper: bridge.upper,
        bridge_holds: bridge.holds,
        envelope,
        gronwall,
        projection_loss,
        dimension: state.amplitudes.len(),
    })
}

/// Rows at `t = jT/samples`, `j = 0..samples`, for one point.
pub fn run_point(ctx: &RunContext, point: ScalingPoint) -> Result<Vec<SweepRow>> {
    let cfg = &ctx.config;
    let setup = PointSetup::new(ctx, point)?;
    let span = cfg.t_final / cfg.samples as f64;
    let mut psi = setup.psi0.clone();
    let mut phi = ctx.phi0.clone();
    let mut times = Vec::new();
    let mut envelopes = Vec::new();
    let mut rows = Vec::with_capacity(cfg.samples + 1);
    for j in 0..=cfg.samples {
        if j > 0 {
            psi = evolve(&psi, &setup.system, &setup.evolve_options(cfg, span))?.final_state;
            let nls_opts = nls::EvolveOptions {
                dt: cfg.nls_dt,
                t_final: span,
                output_every: 0,
                keep_states: false,
            };
            phi = nls::evolve(&phi, &ctx.external, setup.b, &nls_opts)?.final_state;
        }
        let t = j as f64 * span;
        let env = nls::envelope(&EnvelopeInputs::for_field(
            &ctx.external,
            setup.e_psi0,
            setup.e_phi0,
            t,
        )?);
        times.push(t);
        envelopes.push(env);
        let c = *nls::gronwall_constant(&times, &envelopes)
            .last()
            .expect("non-empty");
        psi.time = t;
        phi.time = t;
        rows.push(measure_row(ctx, &setup, &psi, &phi, env, c)?);
    }
    Ok(rows)
}

/// Runs every point of the configured sequence; a failing point is recorded
/// and the sweep continues.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let ctx = RunContext::new(config)?;
    let points = config.sequence()?.points().to_vec();
    let results: Vec<Result<Vec<SweepRow>>> =
        points.par_iter().map(|&p| run_point(&ctx, p)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok(mut rs) => rows.append(&mut rs),
            Err(error) => failures.push(PointFailure {
                n_particles: p.n_particles,
                epsilon: p.epsilon,
                error,
            }),
        }
    }
    Ok(SweepOutcome {
        config_hash: config.hash(),
        rows,
        failures,
    })
}

/// Regression of `log Tr|γ^(1) − p|` on `log R^{1/2}` over the rows at the
/// latest common time.
pub fn fit_rate(rows: &[SweepRow]) -> Result<PowerFit> {
    let t = rows.iter().map(|r| r.t).fold(f64::NEG_INFINITY, f64::max);
    let at_t: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| (r.t - t).abs() <= 1e-12 * t.abs().max(1.0))
        .collect();
    if at_t.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 rows at a common time, have {}",
            at_t.len()
        )));
    }
    if at_t.iter().all(|r| r.trace_distance == 0.0) {
        return Err(Error::InsufficientData(
            "every trace distance vanishes (non-interacting dynamics?); there is no rate to fit"
                .into(),
        ));
    }
    let usable: Vec<&&SweepRow> = at_t
        .iter()
        .filter(|r| r.trace_distance > 0.0 && r.rate > 0.0)
        .collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "only {} rows have positive trace distance and rate",
            usable.len()
        )));
    }
    let x: Vec<f64> = usable.iter().map(|r| r.rate.sqrt()).collect();
    let y: Vec<f64> = usable.iter().map(|r| r.trace_distance).collect();
    fit_power_law(&x, &y)
}

/// Assertions and diagnostics over a finished sweep.
pub fn sweep_checks(outcome: &SweepOutcome, expect_decreasing: bool) -> Vec<Check> {
    let m = "harness";
    let rows = &outcome.rows;
    let mut checks = vec![Check::new(
        m,
        "failed_points",
        outcome.failures.len() as f64,
        0.0,
    )];
    if let Some(f) = outcome.failures.first() {
        let last = checks.last_mut().expect("just pushed");
        last.detail = Some(format!("N={} ε={}: {}", f.n_particles, f.epsilon, f.error));
    }
    let violations = rows.iter().filter(|r| !r.bridge_holds).count();
    checks.push(Check::new(
        m,
        "rate_bridge_sandwich_violations",
        violations as f64,
        0.0,
    ));
    let max_td = rows.iter().map(|r| r.trace_distance).fold(0.0, f64::max);
    checks.push(Check::new(m, "trace_distance_at_most_two", max_td, 2.0));
    let negative = rows
        .iter()
        .flat_map(|r| {
            [
                r.trace_distance,
                r.alpha_m,
                r.alpha_xi,
                r.energy_gap,
                r.rate,
                r.excited_fraction,
            ]
        })
        .filter(|v| !(*v >= 0.0))
        .count();
    checks.push(Check::new(m, "nonnegative_fields", negative as f64, 0.0));
    if expect_decreasing {
        let t = rows.iter().map(|r| r.t).fold(0.0, f64::max);
        let mut last: Vec<&SweepRow> = rows.iter().filter(|r| r.t == t).collect();
        last.sort_by_key(|r| r.n_particles);
        let rises = last
            .windows(2)
            .filter(|w| !(w[1].trace_distance < w[0].trace_distance))
            .count();
        let c = Check::new(m, "trace_distance_decreasing_in_n", rises as f64, 0.0);
        // with failed points the trend is already reported as failing
        if last.len() >= 2 {
            checks.push(c);
        } else if outcome.failures.is_empty() {
            let e = Error::InsufficientData("fewer than 2 points".into());
            checks.push(Check::error(m, "trace_distance_decreasing_in_n", &e));
        }
    }
    let ratio = rows
        .iter()
        .filter(|r| r.excited_bound > 0.0)
        .map(|r| r.excited_fraction / r.excited_bound)
        .fold(0.0, f64::max);
    checks.push(Check::reported(
        m,
        "excited_fraction_over_envelope_eps",
        ratio,
    ));
    let gap0 = rows
        .iter()
        .filter(|r| r.t == 0.0)
        .map(|r| r.energy_gap)
        .fold(0.0, f64::max);
    checks.push(Check::reported(m, "initial_energy_gap", gap0));
    match fit_rate(rows) {
        Ok(fit) => {
            checks.push(Check::reported(m, "rate_fit_slope", fit.slope));
            checks.push(Check::reported(m, "rate_fit_constant", fit.constant));
        }
        Err(e) => {
            checks.push(Check::reported(m, "rate_fit_slope", f64::NAN).with_detail(e.to_string()))
        }
    }
    checks
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV with a leading `# dimred config sha256=…` line; floats in fixed
/// `{:.12e}` notation so equal runs give equal bytes.
pub fn sweep_csv(header: &str, rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "{header}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n_particles",
        "epsilon",
        "mu",
        "t",
        "trace_distance",
        "alpha_m",
        "alpha_xi",
        "energy_gap",
        "rate",
        "excited_fraction",
        "excited_bound",
        "alpha_n2",
        "bridge_upper",
        "bridge_holds",
        "envelope",
        "gronwall",
        "projection_loss",
        "dimension",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n_particles.to_string(),
            fmt(r.epsilon),
            fmt(r.mu),
            fmt(r.t),
            fmt(r.trace_distance),
            fmt(r.alpha_m),
            fmt(r.alpha_xi),
            fmt(r.energy_gap),
            fmt(r.rate),
            fmt(r.excited_fraction),
            fmt(r.excited_bound),
            fmt(r.alpha_n2),
            fmt(r.bridge_upper),
            r.bridge_holds.to_string(),
            fmt(r.envelope),
            fmt(r.gronwall),
            fmt(r.projection_loss),
            r.dimension.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_sweep_csv(path: &Path, header: &str, rows: &[SweepRow]) -> Result<()> {
    write_atomic(path, &sweep_csv(header, rows)?)
}

/// Reads rows back from a sweep CSV, skipping `#` lines.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let text = fs::read_to_string(path)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

/// Tabular time series with the config header line.
pub fn table_csv(header: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "{header}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.iter().map(|&v| fmt(v))).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// JSON document `{"config_hash": …, "report": …}`.
pub fn write_json_report<T: Serialize>(path: &Path, config_hash: &str, report: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Wrapped<'a, T> {
        config_hash: &'a str,
        report: &'a T,
    }
    let body = serde_json::to_vec_pretty(&Wrapped {
        config_hash,
        report,
    })
    .map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(path, &body)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransverseReport {
    pub dim: usize,
    pub energy0: f64,
    pub gap: f64,
    pub quartic: f64,
    pub negative_part: f64,
    pub coupling_limit: f64,
}

pub fn transverse_report(config: &ExperimentConfig) -> Result<TransverseReport> {
    config.validate()?;
    let grid = TransverseGrid::default_for(config.transverse_dim);
    let mode = solve_ground(&config.confinement_potential(), &grid)?;
    Ok(TransverseReport {
        dim: config.transverse_dim,
        energy0: mode.energy0,
        gap: mode.gap,
        quartic: mode.quartic,
        negative_part: mode.negative_part,
        coupling_limit: config.interaction_profile()?.l1_norm * mode.quartic,
    })
}

/// NLS trajectory with coupling `b` of the first configured point.
pub fn nls_run(config: &ExperimentConfig) -> Result<(f64, nls::Trajectory)> {
    let ctx = RunContext::new(config)?;
    let point = config.first_point()?;
    let b = coupling(&scale(&ctx.profile, &point), ctx.chi.quartic);
    let steps = (config.t_final / config.nls_dt).round().max(1.0) as usize;
    let opts = nls::EvolveOptions {
        dt: config.nls_dt,
        t_final: config.t_final,
        output_every: (steps / config.samples).max(1),
        keep_states: false,
    };
    Ok((b, nls::evolve(&ctx.phi0, &ctx.external, b, &opts)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct ManyBodyRun {
    pub point: ScalingPoint,
    pub dimension: usize,
    pub samples: Vec<Sample>,
    pub steps: usize,
    pub max_krylov_dim: usize,
}

pub fn manybody_run(config: &ExperimentConfig) -> Result<ManyBodyRun> {
    let ctx = RunContext::new(config)?;
    let setup = PointSetup::new(&ctx, config.first_point()?)?;
    let steps = (config.t_final / config.dt).round().max(1.0) as usize;
    let mut opts = setup.evolve_options(config, config.t_final);
    opts.output_every = (steps / config.samples).max(1);
    let traj = evolve(&setup.psi0, &setup.system, &opts)?;
    Ok(ManyBodyRun {
        point: setup.point,
        dimension: setup.system.hamiltonian.dim(),
        samples: traj.samples,
        steps: traj.steps,
        max_krylov_dim: traj.max_krylov_dim,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaReport {
    pub row: SweepRow,
    pub counting: CountingDistribution,
}

/// Functionals at `T` for the first configured point.
pub fn alpha_report(config: &ExperimentConfig) -> Result<AlphaReport> {
    let mut single = config.clone();
    single.samples = 1;
    let ctx = RunContext::new(&single)?;
    let point = single.first_point()?;
    let setup = PointSetup::new(&ctx, point)?;
    let rows = run_point(&ctx, point)?;
    let psi = evolve(
        &setup.psi0,
        &setup.system,
        &setup.evolve_options(&single, single.t_final),
    )?
    .final_state;
    let nls_opts = nls::EvolveOptions {
        dt: single.nls_dt,
        t_final: single.t_final,
        output_every: 0,
        keep_states: false,
    };
    let phi = nls::evolve(&ctx.phi0, &ctx.external, setup.b, &nls_opts)?.final_state;
    let (c, _) = normalized(setup.modes().project_condensate(&phi)?);
    let counting = counting_distribution(&psi, &CondensateProjector::vector(c)?)?;
    Ok(AlphaReport {
        row: rows.last().expect("two rows").clone(),
        counting,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalized(v).0
}

/// Counting identities on random symmetric dense systems (`N ≤ 6`, one-body
/// dimension `≤ 8`).
pub fn projector_identity_checks(seed: u64, count: usize) -> Vec<Check> {
    let m = "projectors";
    let shapes = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (3, 1), (1, 3)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 6];
    for i in 0..count {
        let n = 2 + i % 5;
        let (mx, my) = shapes[i % shapes.len()];
        let run = |rng: &mut ChaCha8Rng| -> Result<[f64; 6]> {
            let basis = Arc::new(FockBasis::full(mx * my, n, None, usize::MAX)?);
            let psi = ManyBodyState::random(basis, rng);
            let t = DenseTensor::from_state(&psi, DENSE_CAP)?;
            let proj = CondensateProjector::factored(random_unit(rng, mx), random_unit(rng, my))?;
            let r = identity_residuals(&t, &proj)?;
            Ok([
                r.completeness,
                r.number,
                r.n_squared,
                r.alpha_q1,
                r.factor_p.unwrap_or(f64::NAN),
                r.factor_q.unwrap_or(f64::NAN),
            ])
        };
        match run(&mut rng) {
            Ok(r) => worst
                .iter_mut()
                .zip(r)
                .for_each(|(w, v)| *w = if v.is_nan() { v } else { w.max(v) }),
            Err(e) => return vec![Check::error(m, "identity_battery", &e)],
        }
    }
    [
        "completeness",
        "number",
        "n_squared",
        "alpha_n2_equals_q1",
        "factor_p",
        "factor_q",
    ]
    .iter()
    .zip(worst)
    .map(|(name, v)| Check::new(m, name, v, 1e-10))
    .collect()
}

/// Sandwich `α_{n²} ≤ Tr|γ^(1) − p| ≤ √(8α_{n²})` on random states.
pub fn rate_bridge_checks(seed: u64, count: usize) -> Vec<Check> {
    let m = "projectors";
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut violations = 0usize;
    let mut slack_low = f64::INFINITY;
    let mut slack_high = f64::INFINITY;
    for i in 0..count {
        let n = 2 + i % 5;
        let modes = 2 + (i / 5) % 5;
        let run = |rng: &mut ChaCha8Rng| -> Result<_> {
            let basis = Arc::new(FockBasis::full(modes, n, None, usize::MAX)?);
            let psi = ManyBodyState::random(basis, rng);
            rate_bridge(&psi, &CondensateProjector::vector(random_unit(rng, modes))?)
        };
        match run(&mut rng) {
            Ok(b) => {
                violations += usize::from(!b.holds);
                slack_low = slack_low.min(b.trace_distance - b.alpha_n2);
                slack_high = slack_high.min(b.upper - b.trace_distance);
            }
            Err(e) => return vec![Check::error(m, "rate_bridge", &e)],
        }
    }
    vec![
        Check::new(m, "rate_bridge_violations", violations as f64, 0.0),
        Check::reported(m, "rate_bridge_lower_slack", slack_low),
        Check::reported(m, "rate_bridge_upper_slack", slack_high),
    ]
}

/// `‖l̂‖ ≤ N^ξ` and `‖l̂ n̂‖ ≤ 4` over `N ∈ {10², …, 10⁵}`, `ξ ∈ {0.05, 0.1, 0.2}`.
pub fn weight_checks(inject_negative: bool) -> Vec<Check> {
    let m = "projectors";
    let mut worst_ratio = 0.0f64;
    let mut worst_ln = 0.0f64;
    let mut checks = Vec::new();
    for n in [100, 1_000, 10_000, 100_000] {
        for xi in [0.05, 0.1, 0.2] {
            match weight_norm_checks(n, xi) {
                Ok(r) => {
                    worst_ratio = worst_ratio.max(r.l_norm / r.l_bound);
                    worst_ln = worst_ln.max(r.l_n_norm);
                }
                Err(e) => checks.push(Check::error(m, "weight_norms", &e)),
            }
        }
    }
    checks.push(Check::new(
        m,
        "l_norm_over_n_pow_xi",
        worst_ratio,
        1.0 + 1e-12,
    ));
    checks.push(Check::new(m, "l_times_n_norm", worst_ln, 4.0));
    if inject_negative {
        let mut values = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        values[2] = -0.5;
        if let Err(e) = WeightFunction::custom(values) {
            checks.push(Check::error(m, "weight_table_nonnegative", &e));
        } else {
            checks.push(Check::new(m, "weight_table_nonnegative", 1.0, 0.0));
        }
    }
    checks
}

/// Harmonic ground states against their closed forms.
pub fn transverse_checks() -> Vec<Check> {
    let m = "transverse";
    let mut checks = Vec::new();
    match solve_ground(
        &ConfinementPotential::harmonic(1),
        &TransverseGrid::default_for(1),
    ) {
        Ok(t) => {
            checks.push(Check::new(
                m,
                "harmonic_1d_energy",
                (t.energy0 - 1.0).abs(),
                1e-6,
            ));
            checks.push(Check::new(m, "harmonic_1d_gap", (t.gap - 2.0).abs(), 1e-6));
            checks.push(Check::new(
                m,
                "harmonic_1d_quartic",
                (t.quartic - 1.0 / (2.0 * PI).sqrt()).abs(),
                1e-6,
            ));
        }
        Err(e) => checks.push(Check::error(m, "harmonic_1d", &e)),
    }
    match solve_ground(
        &ConfinementPotential::harmonic(2),
        &TransverseGrid::default_for(2),
    ) {
        Ok(t) => {
            checks.push(Check::new(
                m,
                "harmonic_2d_energy",
                (t.energy0 - 2.0).abs(),
                1e-4,
            ));
            checks.push(Check::new(
                m,
                "harmonic_2d_quartic",
                (t.quartic - 1.0 / (2.0 * PI)).abs(),
                1e-4,
            ));
        }
        Err(e) => checks.push(Check::error(m, "harmonic_2d", &e)),
    }
    checks
}

fn nls_checks_inner() -> Result<Vec<Check>> {
    let m = "nls";
    let mut checks = Vec::new();
    let opts = |dt: f64, every: usize| nls::EvolveOptions {
        dt,
        t_final: 1.0,
        output_every: every,
        keep_states: false,
    };

    let grid = PeriodicGrid::new(40.0, 256)?;
    let static_lattice = ExternalPotential::CosineLattice {
        amplitude: 0.5,
        wavenumber: 2.0 * PI / 10.0,
        drive: 0.0,
        drive_frequency: 0.0,
        transverse: 0.0,
    };
    let state = CondensateState::gaussian(grid, 0.0, 2.0, 0.0)?;
    let traj = nls::evolve(&state, &static_lattice, 1.0, &opts(1e-3, 10))?;
    let e0 = traj.samples[0].energy;
    let mass = traj
        .samples
        .iter()
        .map(|s| (s.l2 - 1.0).abs())
        .fold(0.0, f64::max);
    let energy = traj
        .samples
        .iter()
        .map(|s| (s.energy - e0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(m, "mass_drift", mass, 1e-10));
    checks.push(Check::new(m, "energy_drift", energy, 1e-8));

    let ring = PeriodicGrid::new(2.0 * PI, 32)?;
    let wave = CondensateState::plane_wave(ring, 2)?;
    let b = 2.5;
    let out = nls::evolve(&wave, &ExternalPotential::Zero, b, &opts(1e-3, 0))?.final_state;
    let omega = 4.0 + b / ring.length;
    let err = (wave.inner(&out) - Complex64::from_polar(1.0, -omega)).norm();
    checks.push(Check::new(m, "plane_wave_phase_error", err, 1e-8));

    let driven = ExternalPotential::CosineLattice {
        amplitude: 1.0,
        wavenumber: 2.0 * PI / 10.0,
        drive: 0.5,
        drive_frequency: 3.0,
        transverse: 0.0,
    };
    let packet = CondensateState::gaussian(grid, 0.0, 1.5, 0.5)?;
    let run = |dt: f64| nls::evolve(&packet, &driven, 2.0, &opts(dt, 0)).map(|t| t.final_state);
    let (a, bb, c) = (run(0.02)?, run(0.01)?, run(0.005)?);
    let order = (a.l2_distance(&bb) / bb.l2_distance(&c)).log2();
    checks.push(
        Check::new(m, "strang_order_deviation", (order - 2.0).abs(), 0.1)
            .with_detail(format!("order {order:.4}")),
    );
    Ok(checks)
}

/// Conservation, dispersion and self-convergence of the split-step solver.
pub fn nls_checks() -> Vec<Check> {
    nls_checks_inner().unwrap_or_else(|e| vec![Check::error("nls", "solver_battery", &e)])
}

/// Result of the `N = 2` comparison against the first-quantized grid solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSummary {
    pub trace_distance_bound: f64,
    pub window_trace_norm: f64,
    pub symmetry_residual: f64,
    pub norm_drift: f64,
    pub fock_dimension: usize,
}

/// `N = 2`, `d⊥ = 1` second-quantized evolution against the grid oracle with
/// `M_x = 17`, `M_y = 5`, a `40 × 32` grid and fourth-order splitting.
pub fn two_body_oracle(t_final: f64, external: ExternalPotential) -> Result<OracleSummary> {
    let point = ScalingPoint::new(2, 0.25, 0.05)?;
    let profile = InteractionProfile::new(
        RadialShape::GaussianBump {
            height: 1.0,
            sigma: 1.2,
        },
        7.2,
        2,
    )?;
    let scaled = scale(&profile, &point);
    let l = 4.0 * PI;
    let mut opts = BasisOptions::for_dim(1);
    opts.transverse_grid = Some(TransverseGrid::new(1, 8.0, 0.01, Stencil::Fourth)?);
    let confinement = ConfinementPotential::harmonic(1);
    let modes = build_basis(&point, &confinement, &external, &scaled, 17, 5, l, &opts)?;
    let amp = [(0i64, 1.0), (1, 0.25), (-1, 0.25)];
    let mut phi = vec![Complex64::new(0.0, 0.0); modes.n_modes()];
    let mut support = Vec::new();
    for &(mm, c) in &amp {
        let a = modes
            .mode_index(mm, 0)
            .ok_or_else(|| Error::Config(format!("momentum {mm} outside the basis")))?;
        phi[a] = Complex64::new(c, 0.0);
        support.push(a);
    }
    let (phi, _) = normalized(phi);
    let h_opts = HamiltonianOptions {
        structure_times: vec![0.0, 0.37],
        ..Default::default()
    };
    let sys = ManyBodySystem::new(
        modes.clone(),
        2,
        &ManyBodyState::product_support(2, &support),
        &h_opts,
    )?;
    let psi = sys.product_state(&phi)?;
    let ev = EvolveOptions {
        dt: 0.01,
        t_final,
        output_every: 0,
        keep_states: false,
        krylov: KrylovOptions::default(),
    };
    let gamma = reduced_density(&evolve(&psi, &sys, &ev)?.final_state, 1)?;
    let mut oracle = GridOracle::new(GridOracleConfig {
        point,
        confinement,
        interaction: scaled,
        external,
        box_length: l,
        nx: 40,
        ny: 32,
        y_half_extent: 8.0,
        dt: 0.01,
        t_final,
        scheme: OracleScheme::Yoshida,
        m_cut: 8,
        n_cut: 5,
    })?;
    let terms: Vec<_> = amp
        .iter()
        .map(|&(mm, c)| (mm, 0, Complex64::new(c, 0.0)))
        .collect();
    oracle.set_product_from_levels(&terms)?;
    oracle.run()?;
    let cmp = oracle.compare(&modes, &gamma)?;
    let r = oracle.result();
    Ok(OracleSummary {
        trace_distance_bound: cmp.bound,
        window_trace_norm: cmp.subspace_trace_norm,
        symmetry_residual: r.symmetry_residual,
        norm_drift: (r.norm - 1.0).abs(),
        fock_dimension: sys.hamiltonian.dim(),
    })
}

pub fn oracle_checks(t_final: f64) -> Vec<Check> {
    let m = "manybody";
    match two_body_oracle(t_final, ExternalPotential::Zero) {
        Ok(s) => vec![
            Check::new(m, "two_body_trace_distance", s.trace_distance_bound, 1e-6),
            Check::new(m, "oracle_exchange_symmetry", s.symmetry_residual, 1e-10),
            Check::new(m, "oracle_norm_drift", s.norm_drift, 1e-10),
        ],
        Err(e) => vec![Check::error(m, "two_body_oracle", &e)],
    }
}

/// `b_{N,ε}` constant along the sequence and condition (d) for
/// `η ∈ {0.5, 1, 2}`.
pub fn coupling_checks(
    profile: &InteractionProfile,
    confinement: &ConfinementPotential,
    seq: &ScalingSequence,
) -> Vec<Check> {
    let m = "potentials";
    let dt = confinement.dim();
    let chi = match solve_ground(confinement, &TransverseGrid::default_for(dt)) {
        Ok(c) => c,
        Err(e) => return vec![Check::error(m, "coupling_invariance", &e)],
    };
    let limit = profile.l1_norm * chi.quartic;
    let scale_ref = limit.abs().max(1e-300);
    let spread = seq
        .points()
        .iter()
        .map(|p| (coupling(&scale(profile, p), chi.quartic) - limit).abs() / scale_ref)
        .fold(0.0, f64::max);
    let mut checks = vec![Check::new(m, "coupling_invariance", spread, 1e-12)];
    for eta in [0.5, 1.0, 2.0] {
        let reports: Vec<_> = seq
            .points()
            .iter()
            .map(|p| {
                validate_family(
                    &scale(profile, p),
                    chi.quartic,
                    eta,
                    limit,
                    &FamilyConstants::default(),
                )
            })
            .collect();
        let gap = reports
            .iter()
            .map(|r| r.weighted_coupling_gap)
            .fold(0.0, f64::max);
        let bound = FamilyConstants::default().coupling_tolerance;
        let c = Check::new(m, &format!("condition_d_eta_{eta}"), gap, bound);
        let others = reports
            .iter()
            .all(|r| r.bounded && r.nonnegative_radial && r.compact_support);
        checks.push(if others {
            c
        } else {
            Check { passed: false, ..c }.with_detail("a family condition other than (d) failed")
        });
    }
    checks
}

pub fn auxiliary_checks(config: &ExperimentConfig) -> AuxiliaryReport {
    match config.auxiliary_config() {
        Ok(cfg) => battery(&cfg),
        Err(e) => AuxiliaryReport {
            checks: vec![Check::error("auxiliary", "configured_point", &e)],
            gradient_fit: None,
            gamma_fit: None,
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub config_hash: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.failed()).collect()
    }
}

/// Every module battery in one report.
pub fn verify_all(config: &ExperimentConfig) -> VerificationReport {
    let mut checks = Vec::new();
    checks.extend(projector_identity_checks(
        config.seed,
        config.random_systems,
    ));
    checks.extend(rate_bridge_checks(config.seed, config.random_states));
    checks.extend(weight_checks(config.inject_negative_weight));
    checks.extend(transverse_checks());
    checks.extend(nls_checks());
    match (config.interaction_profile(), config.sequence()) {
        (Ok(p), Ok(s)) => checks.extend(coupling_checks(&p, &config.confinement_potential(), &s)),
        (Err(e), _) | (_, Err(e)) => {
            checks.push(Check::error("potentials", "coupling_invariance", &e))
        }
    }
    checks.extend(auxiliary_checks(config).checks);
    checks.extend(oracle_checks(config.oracle_t_final));
    VerificationReport {
        config_hash: config.hash(),
        checks,
    }
}
