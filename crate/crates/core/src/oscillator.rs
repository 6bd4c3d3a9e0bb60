//! Vibrational modes of solids: mode volumes, thermal sizes, collective
//! scaling, levitated particles and a harmonic-chain check of the continuum
//! partition formula.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::measures::{SizeReport, SizeUnit, CODATA_2018};

/// First zero of `J0`.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
/// Relative target of the adaptive quadratures.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Thermal rms displacement used when no material value is known, m.
pub const DEFAULT_SPREAD: f64 = 1.0e-11;

const NORMALIZATION_TOL: f64 = 1e-6;
const MAX_CHAIN_ATOMS: usize = 2048;
const MAX_OCCUPATION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscillatorError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("custom mode is not normalized: max|w| = {0}")]
    Unnormalized(f64),
    #[error("mode has no particle number; supply N_k")]
    MissingParticleCount,
    #[error("thermal occupation overflows ({0:e}); temperature too high for the mode spectrum")]
    OccupationOverflow(f64),
}

pub type Result<T> = std::result::Result<T, OscillatorError>;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(OscillatorError::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(OscillatorError::InvalidParameter(format!("{name} must be >= 0 and finite, got {v}")))
    }
}

/// Solids with a tabulated thermal single-atom rms displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Material {
    Aluminium,
    Silica,
    Sapphire,
    SiliconNitride,
}

impl Material {
    pub fn spread(&self) -> f64 {
        match self {
            Material::Aluminium => 1.7e-11,
            Material::Silica => 2.5e-11,
            Material::Sapphire => 6.5e-12,
            Material::SiliconNitride => 2.0e-11,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Material::Aluminium => "aluminium",
            Material::Silica => "silica",
            Material::Sapphire => "sapphire",
            Material::SiliconNitride => "silicon-nitride",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Material::Aluminium, Material::Silica, Material::Sapphire, Material::SiliconNitride]
            .into_iter()
            .find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpreadSource {
    Measured,
    Preset(Material),
    Default,
}

/// Thermal rms displacement `Delta u` of a single atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleParticleSpread {
    pub value: f64,
    pub source: SpreadSource,
}

impl SingleParticleSpread {
    pub fn measured(value: f64) -> Result<Self> {
        Ok(Self { value: positive("Delta u", value)?, source: SpreadSource::Measured })
    }

    pub fn preset(m: Material) -> Self {
        Self { value: m.spread(), source: SpreadSource::Preset(m) }
    }

    pub fn fallback() -> Self {
        Self { value: DEFAULT_SPREAD, source: SpreadSource::Default }
    }
}

/// Mode function sampled on a uniform grid over a rectangular plate.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomModeGrid {
    pub width: f64,
    pub height: f64,
    pub thickness: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major samples, `values[iy * nx + ix]`, at `(ix w/(nx-1), iy h/(ny-1))`.
    pub values: Vec<f64>,
}

impl CustomModeGrid {
    fn sample(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Bilinear interpolant.
    fn eval(&self, x: f64, y: f64) -> f64 {
        let fx = (x / self.width * (self.nx - 1) as f64).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / self.height * (self.ny - 1) as f64).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let a = self.sample(ix, iy) * (1.0 - tx) + self.sample(ix + 1, iy) * tx;
        let b = self.sample(ix, iy + 1) * (1.0 - tx) + self.sample(ix + 1, iy + 1) * tx;
        a * (1.0 - ty) + b * ty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    CircularDrum { radius: f64, thickness: f64 },
    SquareDrum { side: f64, thickness: f64 },
    Uniform { volume: f64 },
    Torus { minor_radius: f64, major_radius: f64 },
    /// Rectangular plate whose fundamental mode is given on a grid.
    CustomGrid(CustomModeGrid),
}

/// Body of a mechanical oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGeometry {
    pub shape: Shape,
    /// Mass density, kg/m^3.
    pub density: f64,
    /// Mean atomic mass, kg.
    pub atomic_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSpec {
    Fundamental,
    Uniform,
}

/// Normalization of one mode of a body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeVolume {
    /// Total volume `V`, m^3.
    pub volume: f64,
    /// Mode volume `V_k = int w_k^2`, m^3.
    pub mode_volume: f64,
    /// Total mass `M`, kg.
    pub mass: f64,
    /// Mode mass `M_k`, kg.
    pub mode_mass: f64,
    /// Atom count `N`.
    pub atoms: f64,
    /// Mode particle number `N_k = N V_k / V`.
    pub mode_particles: f64,
}

impl ModeGeometry {
    pub fn new(shape: Shape, density: f64, atomic_mass: f64) -> Result<Self> {
        positive("density", density)?;
        positive("atomic mass", atomic_mass)?;
        match &shape {
            Shape::CircularDrum { radius, thickness } => {
                positive("radius", *radius)?;
                positive("thickness", *thickness)?;
            }
            Shape::SquareDrum { side, thickness } => {
                positive("side", *side)?;
                positive("thickness", *thickness)?;
            }
            Shape::Uniform { volume } => {
                positive("volume", *volume)?;
            }
            Shape::Torus { minor_radius, major_radius } => {
                positive("minor radius", *minor_radius)?;
                positive("major radius", *major_radius)?;
                if minor_radius > major_radius {
                    return Err(OscillatorError::InvalidParameter("torus minor radius exceeds major radius".into()));
                }
            }
            Shape::CustomGrid(g) => {
                positive("plate width", g.width)?;
                positive("plate height", g.height)?;
                positive("plate thickness", g.thickness)?;
                if g.nx < 2 || g.ny < 2 || g.values.len() != g.nx * g.ny {
                    return Err(OscillatorError::InvalidParameter(format!(
                        "mode grid needs nx, ny >= 2 and nx*ny samples (got {}x{} with {})",
                        g.nx,
                        g.ny,
                        g.values.len()
                    )));
                }
                if g.values.iter().any(|v| !v.is_finite()) {
                    return Err(OscillatorError::InvalidParameter("mode grid has non-finite samples".into()));
                }
                let max = g.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                if (max - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(OscillatorError::Unnormalized(max));
                }
            }
        }
        Ok(Self { shape, density, atomic_mass })
    }

    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::CircularDrum { radius, thickness } => PI * radius * radius * thickness,
            Shape::SquareDrum { side, thickness } => side * side * thickness,
            Shape::Uniform { volume } => *volume,
            Shape::Torus { minor_radius, major_radius } => 2.0 * PI * PI * major_radius * minor_radius * minor_radius,
            Shape::CustomGrid(g) => g.width * g.height * g.thickness,
        }
    }

    /// Closed-form mode volume (custom grids are integrated numerically).
    pub fn mode_volume(&self, mode: ModeSpec) -> ModeVolume {
        let v = self.volume();
        let vk = match (mode, &self.shape) {
            (ModeSpec::Uniform, _) => v,
            (ModeSpec::Fundamental, Shape::CircularDrum { .. }) => v * bessel_j1(BESSEL_J0_FIRST_ZERO).powi(2),
            (ModeSpec::Fundamental, Shape::SquareDrum { .. }) => v / 4.0,
            (ModeSpec::Fundamental, Shape::Uniform { .. } | Shape::Torus { .. }) => v,
            (ModeSpec::Fundamental, Shape::CustomGrid(g)) => custom_mode_volume(g),
        };
        self.volume_report(vk)
    }

    /// Mode volume by numerical quadrature of the mode function.
    pub fn mode_volume_quadrature(&self, mode: ModeSpec) -> ModeVolume {
        let vk = match (mode, &self.shape) {
            (ModeSpec::Fundamental, Shape::CircularDrum { radius, thickness }) => {
                let radial = adaptive_simpson(&|s: f64| 2.0 * s * bessel_j0(BESSEL_J0_FIRST_ZERO * s).powi(2), 0.0, 1.0, QUADRATURE_TOL);
                PI * radius * radius * thickness * radial
            }
            (ModeSpec::Fundamental, Shape::SquareDrum { side, thickness }) => {
                let line = adaptive_simpson(&|s: f64| (PI * s).sin().powi(2), 0.0, 1.0, QUADRATURE_TOL);
                side * side * thickness * line * line
            }
            _ => return self.mode_volume(mode),
        };
        self.volume_report(vk)
    }

    fn volume_report(&self, vk: f64) -> ModeVolume {
        let v = self.volume();
        let mass = self.density * v;
        let atoms = mass / self.atomic_mass;
        ModeVolume {
            volume: v,
            mode_volume: vk,
            mass,
            mode_mass: self.density * vk,
            atoms,
            mode_particles: atoms * vk / v,
        }
    }
}

fn custom_mode_volume(g: &CustomModeGrid) -> f64 {
    let dy = g.height / (g.ny - 1) as f64;
    let dx = g.width / (g.nx - 1) as f64;
    // Integrate cell by cell so the bilinear kinks sit on interval ends.
    let mut total = 0.0;
    for iy in 0..g.ny - 1 {
        let row = |y: f64| {
            (0..g.nx - 1)
                .map(|ix| adaptive_simpson(&|x: f64| g.eval(x, y).powi(2), ix as f64 * dx, (ix + 1) as f64 * dx, QUADRATURE_TOL))
                .sum::<f64>()
        };
        total += adaptive_simpson(&row, iy as f64 * dy, (iy + 1) as f64 * dy, QUADRATURE_TOL);
    }
    total * g.thickness
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative accuracy `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + recurse(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    // Seed the absolute target from a composite estimate so the relative
    // tolerance refers to the integral's magnitude.
    let n = 64;
    let h = (b - a) / n as f64;
    let rough: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * h).abs()).sum::<f64>() * h;
    let eps = (tol * rough).max(f64::MIN_POSITIVE);
    recurse(f, a, b, fa, fm, fb, whole, eps, 48)
}

fn bessel_series(order: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(order as i32) / (1..=order).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Bessel function `J0`, by its power series (accurate for `|x| <~ 20`).
pub fn bessel_j0(x: f64) -> f64 {
    bessel_series(0, x)
}

/// Bessel function `J1`, by its power series (accurate for `|x| <~ 20`).
pub fn bessel_j1(x: f64) -> f64 {
    bessel_series(1, x)
}

/// One vibrational mode treated as a harmonic oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorMode {
    /// Effective mass `M_k`, kg.
    pub mode_mass: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Ground-state position spread `sqrt(hbar / 2 M_k omega)`, m.
    pub zero_point: f64,
    /// Atoms participating in the mode, `N_k`.
    pub mode_particles: Option<f64>,
}

impl OscillatorMode {
    pub fn from_mass_frequency(mode_mass: f64, omega: f64, mode_particles: Option<f64>) -> Result<Self> {
        positive("mode mass", mode_mass)?;
        positive("angular frequency", omega)?;
        if let Some(n) = mode_particles {
            positive("mode particle number", n)?;
        }
        let zero_point = (CODATA_2018.hbar / (2.0 * mode_mass * omega)).sqrt();
        Ok(Self { mode_mass, omega, zero_point, mode_particles })
    }

    /// Mode specified by its zero-point spread; the frequency is implied.
    pub fn from_mass_zero_point(mode_mass: f64, zero_point: f64, mode_particles: Option<f64>) -> Result<Self> {
        positive("mode mass", mode_mass)?;
        positive("zero-point spread", zero_point)?;
        let omega = CODATA_2018.hbar / (2.0 * mode_mass * zero_point * zero_point);
        Self::from_mass_frequency(mode_mass, omega, mode_particles).map(|m| Self { zero_point, ..m })
    }

    pub fn from_volume(volume: &ModeVolume, omega: f64) -> Result<Self> {
        Self::from_mass_frequency(volume.mode_mass, omega, Some(volume.mode_particles))
    }

    fn particles(&self) -> Result<f64> {
        self.mode_particles.ok_or(OscillatorError::MissingParticleCount)
    }
}

/// QFI of a thermal mode for its mass-weighted position and its momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFisher {
    /// kg^2 m^2.
    pub position: f64,
    /// kg^2 m^2 s^-2.
    pub momentum: f64,
}

pub fn thermal_mode_qfi(mode: &OscillatorMode, nbar: f64) -> Result<ModeFisher> {
    non_negative("thermal occupation", nbar)?;
    let damp = 2.0 * nbar + 1.0;
    Ok(ModeFisher {
        position: 4.0 * (mode.mode_mass * mode.zero_point).powi(2) / damp,
        momentum: 4.0 * (CODATA_2018.hbar / (2.0 * mode.zero_point)).powi(2) / damp,
    })
}

/// Sizes for the position-like and momentum-like mode observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSizes {
    pub position: SizeReport,
    pub momentum: SizeReport,
}

/// Continuum-limit sizes of a thermal mode with the local partition into atoms.
pub fn thermal_sizes(mode: &OscillatorMode, nbar: f64, spread: SingleParticleSpread) -> Result<ThermalSizes> {
    let nk = mode.particles()?;
    positive("Delta u", spread.value)?;
    let f = thermal_mode_qfi(mode, nbar)?;
    let k = CODATA_2018;
    let damp = 2.0 * nbar + 1.0;
    let ratio = (mode.zero_point / spread.value).powi(2);
    let position = SizeReport::new(f.position / (4.0 * k.q0() * k.q0()), nk * ratio / damp, SizeUnit::Q0);
    let momentum = SizeReport::new(f.momentum / (4.0 * k.p0() * k.p0()), 1.0 / (damp * nk * ratio), SizeUnit::P0);
    let echo = |r: SizeReport| {
        r.with_input("mode_mass_kg", mode.mode_mass)
            .with_input("zero_point_m", mode.zero_point)
            .with_input("nbar", nbar)
            .with_input("mode_particles", nk)
            .with_input("delta_u_m", spread.value)
    };
    Ok(ThermalSizes { position: echo(position), momentum: echo(momentum) })
}

/// How a dimensionless quadrature QFI maps to the mode coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureScale {
    /// Quadratures with vacuum variance 1/2: `F(X) = 2 Delta X_zp^2 F_hat`,
    /// so the vacuum value 2 reproduces the ground-state QFI.
    #[default]
    VacuumHalf,
    /// Quadrature `X / Delta X_zp`: `F(X) = Delta X_zp^2 F_hat`.
    ZeroPoint,
}

impl QuadratureScale {
    pub fn position_fisher(&self, f_hat: f64, zero_point: f64) -> f64 {
        match self {
            QuadratureScale::VacuumHalf => 2.0 * zero_point * zero_point * f_hat,
            QuadratureScale::ZeroPoint => zero_point * zero_point * f_hat,
        }
    }
}

/// Sizes from a measured dimensionless position-quadrature QFI `f_hat`.
pub fn measured_qfi_sizes(mode: &OscillatorMode, f_hat: f64, spread: SingleParticleSpread, scale: QuadratureScale) -> Result<SizeReport> {
    non_negative("dimensionless QFI", f_hat)?;
    let nk = mode.particles()?;
    positive("Delta u", spread.value)?;
    let fx = scale.position_fisher(f_hat, mode.zero_point);
    let q0 = CODATA_2018.q0();
    Ok(SizeReport::new(mode.mode_mass.powi(2) * fx / (4.0 * q0 * q0), nk * fx / (4.0 * spread.value.powi(2)), SizeUnit::Q0)
        .with_input("f_hat", f_hat)
        .with_input("mode_mass_kg", mode.mode_mass)
        .with_input("zero_point_m", mode.zero_point)
        .with_input("mode_particles", nk)
        .with_input("delta_u_m", spread.value))
}

/// Sizes of `n_osc` identical oscillators sharing one collective mode, and
/// the comparison value for independent oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveSizes {
    pub collective: SizeReport,
    pub independent: SizeReport,
}

pub fn collective_scaling(base: &SizeReport, n_osc: u32) -> Result<CollectiveSizes> {
    if n_osc == 0 {
        return Err(OscillatorError::InvalidParameter("oscillator count must be >= 1".into()));
    }
    let n = n_osc as f64;
    Ok(CollectiveSizes {
        collective: base.scaled(n * n, n).with_input("oscillators", n),
        independent: base.scaled(n, 1.0).with_input("oscillators", n),
    })
}

/// Centre-of-mass mode of a levitated particle with coherence length `chi`
/// (`F(X) = 4 chi^2`) and total position spread `spread_cm`.
pub fn levitated_sizes(mass: f64, chi: f64, spread_cm: f64, atoms: f64, spread: SingleParticleSpread) -> Result<SizeReport> {
    positive("mass", mass)?;
    non_negative("coherence length", chi)?;
    positive("centre-of-mass spread", spread_cm)?;
    positive("atom count", atoms)?;
    positive("Delta u", spread.value)?;
    let q0 = CODATA_2018.q0();
    Ok(SizeReport::new((mass * chi / q0).powi(2), atoms * chi * chi / (spread_cm.powi(2) + spread.value.powi(2)), SizeUnit::Q0)
        .with_input("mass_kg", mass)
        .with_input("chi_m", chi)
        .with_input("spread_cm_m", spread_cm)
        .with_input("atoms", atoms)
        .with_input("delta_u_m", spread.value))
}

/// Free-ended harmonic chain with on-site pinning, used to compare the exact
/// local-variance sum with its continuum approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub atoms: usize,
    /// Atomic mass, kg.
    pub atom_mass: f64,
    /// Nearest-neighbour coupling frequency, rad/s.
    pub coupling: f64,
    /// On-site pinning frequency, rad/s (keeps the uniform mode gapped).
    pub pinning: f64,
    /// Temperature of the non-addressed modes, K.
    pub temperature: f64,
    /// Index of the addressed standing wave.
    pub addressed_mode: usize,
    /// Occupation of the addressed mode.
    pub addressed_occupation: f64,
    /// Atoms per partition region (must divide `atoms`).
    pub region_atoms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainComparison {
    pub n_ent_exact: f64,
    pub n_ent_continuum: f64,
    /// `sum_i Var(A_i)` from the mode-resolved sum, kg^2 m^2.
    pub variance_sum: f64,
    /// Position QFI of the addressed mode, kg^2 m^2.
    pub fisher: f64,
    /// Atom-averaged thermal rms displacement, m.
    pub delta_u: f64,
    pub regions: usize,
}

/// Precomputed mode spectrum of a [`ChainModel`].
#[derive(Debug, Clone)]
pub struct Chain {
    model: ChainModel,
    /// `Var(X_l)` of each mode amplitude, m^2.
    mode_variance: Vec<f64>,
}

impl ChainModel {
    pub fn build(&self) -> Result<Chain> {
        let n = self.atoms;
        if !(2..=MAX_CHAIN_ATOMS).contains(&n) {
            return Err(OscillatorError::InvalidParameter(format!("chain length {n} outside 2..={MAX_CHAIN_ATOMS}")));
        }
        positive("atom mass", self.atom_mass)?;
        positive("coupling", self.coupling)?;
        positive("pinning", self.pinning)?;
        non_negative("temperature", self.temperature)?;
        non_negative("addressed occupation", self.addressed_occupation)?;
        if self.addressed_mode >= n {
            return Err(OscillatorError::InvalidParameter(format!("mode {} outside 0..{n}", self.addressed_mode)));
        }
        if self.region_atoms == 0 || !n.is_multiple_of(self.region_atoms) {
            return Err(OscillatorError::InvalidParameter(format!("region size {} does not divide {n}", self.region_atoms)));
        }
        let k = CODATA_2018;
        let kt = k.boltzmann * self.temperature;
        let mode_variance = (0..n)
            .map(|l| {
                let omega = self.frequency(l);
                let nbar = if l == self.addressed_mode {
                    self.addressed_occupation
                } else if kt == 0.0 {
                    0.0
                } else {
                    1.0 / (k.hbar * omega / kt).exp_m1()
                };
                if !(nbar.is_finite() && nbar <= MAX_OCCUPATION) {
                    return Err(OscillatorError::OccupationOverflow(nbar));
                }
                Ok(k.hbar / (2.0 * self.mode_mass(l) * omega) * (2.0 * nbar + 1.0))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain { model: self.clone(), mode_variance })
    }

    /// Standing wave `w_l(j) = cos(l pi (j + 1/2) / N)`, max amplitude 1.
    pub fn mode_function(&self, l: usize, j: usize) -> f64 {
        (l as f64 * PI * (j as f64 + 0.5) / self.atoms as f64).cos()
    }

    pub fn frequency(&self, l: usize) -> f64 {
        let s = (l as f64 * PI / (2.0 * self.atoms as f64)).sin();
        (self.pinning.powi(2) + 4.0 * self.coupling.powi(2) * s * s).sqrt()
    }

    /// Mode volume in atoms (`sum_j w_l(j)^2`).
    pub fn mode_volume(&self, l: usize) -> f64 {
        if l == 0 {
            self.atoms as f64
        } else {
            self.atoms as f64 / 2.0
        }
    }

    pub fn mode_mass(&self, l: usize) -> f64 {
        self.atom_mass * self.mode_volume(l)
    }
}

impl Chain {
    pub fn model(&self) -> &ChainModel {
        &self.model
    }

    /// Variance of the amplitude `X_l` of mode `l` (`x_j = sum_l w_l(j) X_l`).
    pub fn mode_variance(&self, l: usize) -> f64 {
        self.mode_variance[l]
    }

    /// `zeta(region, k, l) = m sum_{j in region} w_k(j) w_l(j)`.
    fn overlap(&self, region: &Range<usize>, l: usize) -> f64 {
        let m = &self.model;
        region.clone().map(|j| m.mode_function(m.addressed_mode, j) * m.mode_function(l, j)).sum::<f64>() * m.atom_mass
    }

    /// Covariance of the local addends of two atom ranges.
    pub fn region_covariance(&self, a: Range<usize>, b: Range<usize>) -> f64 {
        let terms: Vec<f64> =
            (0..self.model.atoms).into_par_iter().map(|l| self.overlap(&a, l) * self.overlap(&b, l) * self.mode_variance[l]).collect();
        terms.iter().sum()
    }

    /// Atom-averaged single-atom displacement variance.
    pub fn mean_atom_variance(&self) -> f64 {
        let m = &self.model;
        let per_mode: Vec<f64> = (0..m.atoms)
            .into_par_iter()
            .map(|l| (0..m.atoms).map(|j| m.mode_function(l, j).powi(2)).sum::<f64>() * self.mode_variance[l])
            .collect();
        per_mode.iter().sum::<f64>() / m.atoms as f64
    }

    pub fn compare(&self) -> ChainComparison {
        let m = &self.model;
        let k = m.addressed_mode;
        let regions: Vec<Range<usize>> = (0..m.atoms / m.region_atoms).map(|i| i * m.region_atoms..(i + 1) * m.region_atoms).collect();
        let per_mode: Vec<f64> = (0..m.atoms)
            .into_par_iter()
            .map(|l| regions.iter().map(|r| self.overlap(r, l).powi(2)).sum::<f64>() * self.mode_variance[l])
            .collect();
        let variance_sum: f64 = per_mode.iter().sum();
        let nbar = m.addressed_occupation;
        let zp2 = CODATA_2018.hbar / (2.0 * m.mode_mass(k) * m.frequency(k));
        let fisher_x = 4.0 * zp2 / (2.0 * nbar + 1.0);
        let fisher = m.mode_mass(k).powi(2) * fisher_x;
        let du2 = self.mean_atom_variance();
        ChainComparison {
            n_ent_exact: fisher / (4.0 * variance_sum),
            n_ent_continuum: m.mode_volume(k) * fisher_x / (4.0 * du2),
            variance_sum,
            fisher,
            delta_u: du2.sqrt(),
            regions: regions.len(),
        }
    }
}

/// Runs the chain comparison.
pub fn chain_oracle(model: &ChainModel) -> Result<ChainComparison> {
    Ok(model.build()?.compare())
}
