//! Subcommand implementations. Each returns a [`Report`].

use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use qmacro::catalog::{self, CrystalScenario, FluxQubit, NhParams};
use qmacro::diffraction::{self, FringeScan, TalbotLauSetup};
use qmacro::fisher;
use qmacro::measures::{self, entangled_size, SizeReport, SizeUnit};
use qmacro::oscillator::{
    self, ChainModel, Material, ModeGeometry, ModeSpec, OscillatorMode, QuadratureScale, Shape, SingleParticleSpread,
};
use qmacro::quantum::{self, DensityMatrix, StateKind};
use qmacro::wigner;

use crate::error::CliError;
use crate::output::{Cell, Report};
use crate::units::{Dimension, Quantity, Scalar};

type Result<T> = std::result::Result<T, CliError>;

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn sizes_rows(r: &mut Report, s: &SizeReport) {
    let unit = match s.unit {
        SizeUnit::Q0 => "Q0 = m_u a0".to_string(),
        SizeUnit::P0 => "P0 = hbar/(2 a0)".to_string(),
        SizeUnit::Custom(v) => format!("A0 = {v}"),
    };
    r.quantity("n_ext", s.n_ext, "")
        .quantity("n_ent", s.n_ent, "")
        .quantity("witness_depth", s.witness_depth, "")
        .quantity("extensive_unit", unit, "");
}

// ---------------------------------------------------------------------------
// measure

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    /// Qubits with `A = sum_i sigma_z^(i)`, partitioned into single sites.
    QubitRegister {
        state: RegisterState,
        sites: usize,
        /// Weight of the `|1...1>` branch of the GHZ state.
        #[serde(default)]
        weight: Option<Scalar>,
        #[serde(default)]
        phase: Option<Scalar>,
    },
    /// A reference mode state; the observable is the best quadrature.
    OscillatorState {
        state: ModeState,
        mass: Quantity,
        frequency: Quantity,
        mode_particles: f64,
        #[serde(default)]
        material: Option<String>,
        #[serde(default)]
        delta_u: Option<Quantity>,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// Thermal mode; the observable is its position or momentum.
    ThermalOscillator {
        mass: Quantity,
        frequency: Quantity,
        nbar: Scalar,
        mode_particles: f64,
        #[serde(default)]
        material: Option<String>,
        #[serde(default)]
        delta_u: Option<Quantity>,
        #[serde(default)]
        quadrature: Quadrature,
    },
    /// Superconducting loop whose branches differ in circulating current;
    /// the observable is the total electron momentum.
    CurrentLoop {
        current_difference: Quantity,
        loop_length: Quantity,
        pairs: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterState {
    Ghz,
    /// Every qubit in `(|0> + |1>)/sqrt 2`.
    Product,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeState {
    Vacuum,
    Number { n: usize },
    Coherent { re: f64, #[serde(default)] im: f64 },
    Cat { alpha: f64 },
    Squeezed { r: f64 },
    Thermal { nbar: f64 },
}

impl ModeState {
    fn kind(self) -> StateKind {
        match self {
            ModeState::Vacuum => StateKind::Vacuum,
            ModeState::Number { n } => StateKind::Number(n),
            ModeState::Coherent { re, im } => StateKind::Coherent(Complex64::new(re, im)),
            ModeState::Cat { alpha } => StateKind::EvenCat(Complex64::new(alpha, 0.0)),
            ModeState::Squeezed { r } => StateKind::SqueezedVacuum(r),
            ModeState::Thermal { nbar } => StateKind::Thermal(nbar),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Position,
    Momentum,
}

fn spread(material: &Option<String>, delta_u: &Option<Quantity>, notes: &mut Vec<String>) -> Result<SingleParticleSpread> {
    match (material, delta_u) {
        (Some(_), Some(_)) => Err(CliError::Parse("give either material or delta_u, not both".into())),
        (Some(name), None) => Material::from_name(name)
            .map(SingleParticleSpread::preset)
            .ok_or_else(|| CliError::Parse(format!("unknown material {name:?}"))),
        (None, Some(q)) => Ok(SingleParticleSpread::measured(q.si("delta_u", Dimension::Length, notes)?)?),
        (None, None) => {
            let s = SingleParticleSpread::fallback();
            notes.push(format!("no material or delta_u given; using the default single-atom spread {:.3e} m", s.value));
            Ok(s)
        }
    }
}

fn register_state(state: RegisterState, sites: usize, weight: f64, phase: f64) -> Result<(DensityMatrix, measures::PartitionedObservable)> {
    match state {
        RegisterState::Ghz => Ok(quantum::ghz_state(sites, weight, phase)?),
        RegisterState::Product => {
            let obs = quantum::collective_z(sites)?;
            let psi = DVector::from_element(1usize << sites, Complex64::new(1.0, 0.0));
            Ok((DensityMatrix::from_state_vector(psi)?, obs))
        }
    }
}

pub fn measure(config: &MeasureConfig) -> Result<Report> {
    let mut notes = Vec::new();
    let mut r = Report::quantities("measure");
    match config {
        MeasureConfig::QubitRegister { state, sites, weight, phase } => {
            if *sites == 0 || *sites > quantum::MAX_GHZ_SITES {
                return Err(CliError::Domain(format!("sites = {sites} must lie in 1..={}", quantum::MAX_GHZ_SITES)));
            }
            let weight = weight.as_ref().map_or(Ok(0.5), |w| w.value("weight"))?;
            let phase = phase.as_ref().map_or(Ok(0.0), |p| p.value("phase"))?;
            let (rho, obs) = register_state(*state, *sites, weight, phase)?;
            let f = fisher::qfi(&rho, obs.total())?.value;
            let n_ent = entangled_size(&rho, &obs)?;
            let s = SizeReport::new(measures::extensive_size(f, 1.0)?, n_ent, SizeUnit::Custom(1.0));
            r.quantity("sites", *sites as u64, "").quantity("fisher", f, "");
            sizes_rows(&mut r, &s);
            r.quantity("partition", obs.label().to_string(), "");
        }
        MeasureConfig::OscillatorState { state, mass, frequency, mode_particles, material, delta_u, dim } => {
            let m = mass.si("mass", Dimension::Mass, &mut notes)?;
            let w = frequency.si("frequency", Dimension::AngularFrequency, &mut notes)?;
            let sp = spread(material, delta_u, &mut notes)?;
            let mode = OscillatorMode::from_mass_frequency(m, w, Some(*mode_particles))?;
            let kind = state.kind();
            let dim = dim.unwrap_or_else(|| quantum::suggested_dim(kind));
            let rho = quantum::make_state(kind, dim)?;
            let q = quantum::unit_quadratures(dim)?;
            let best = fisher::qfi_max_quadrature(&rho, &q.position, &q.momentum, wigner::ANGLE_COUNT)?;
            let s = oscillator::measured_qfi_sizes(&mode, best.fisher.value, sp, QuadratureScale::VacuumHalf)?;
            r.quantity("fock_dim", dim as u64, "")
                .quantity("quadrature_fisher", best.fisher.value, "")
                .quantity("quadrature_angle", best.angle, "rad")
                .quantity("zero_point", mode.zero_point, "m")
                .quantity("delta_u", sp.value, "m");
            sizes_rows(&mut r, &s);
        }
        MeasureConfig::ThermalOscillator { mass, frequency, nbar, mode_particles, material, delta_u, quadrature } => {
            let m = mass.si("mass", Dimension::Mass, &mut notes)?;
            let w = frequency.si("frequency", Dimension::AngularFrequency, &mut notes)?;
            let nbar = nbar.value("nbar")?;
            let sp = spread(material, delta_u, &mut notes)?;
            let mode = OscillatorMode::from_mass_frequency(m, w, Some(*mode_particles))?;
            let sizes = oscillator::thermal_sizes(&mode, nbar, sp)?;
            let s = match quadrature {
                Quadrature::Position => sizes.position,
                Quadrature::Momentum => sizes.momentum,
            };
            r.quantity("mode_mass", m, "kg")
                .quantity("omega", w, "rad/s")
                .quantity("nbar", nbar, "")
                .quantity("zero_point", mode.zero_point, "m")
                .quantity("delta_u", sp.value, "m");
            sizes_rows(&mut r, &s);
        }
        MeasureConfig::CurrentLoop { current_difference, loop_length, pairs } => {
            let q = FluxQubit {
                current_difference: current_difference.si("current_difference", Dimension::Current, &mut notes)?,
                loop_length: loop_length.si("loop_length", Dimension::Length, &mut notes)?,
                pairs: *pairs,
                ..FluxQubit::friedman()
            };
            notes.push(format!("per-pair momentum shift fixed at {:.1e} kg m/s", q.pair_momentum_shift));
            flux_rows(&mut r, &catalog::flux_qubit(&q)?);
        }
    }
    r.notes(notes);
    Ok(r)
}

fn flux_rows(r: &mut Report, f: &catalog::FluxReport) {
    r.quantity("total_momentum_shift", f.total_momentum_shift, "kg m/s")
        .quantity("pair_length_scale", f.pair_length_scale, "m")
        .quantity("pair_momentum_spread", f.pair_momentum_spread, "kg m/s")
        .quantity("r_p", f.r_p, "");
    sizes_rows(r, &f.sizes);
}

// ---------------------------------------------------------------------------
// wigner

#[derive(Debug, Default)]
pub struct WignerArgs {
    pub dim: Option<usize>,
    pub report: bool,
    pub mass: Option<Quantity>,
    pub frequency: Option<Quantity>,
    pub mode_particles: Option<f64>,
    pub material: Option<String>,
    pub delta_u: Option<Quantity>,
}

pub fn wigner(path: &Path, args: &WignerArgs) -> Result<Report> {
    let grid = wigner::load_grid(path)?;
    let g = wigner::qfi_from_grid(&grid, args.dim)?;
    let rec = &g.reconstruction;
    let mut r = Report::quantities("wigner");
    r.quantity("grid_integral", grid.integral(), "")
        .quantity("dim", rec.dim as u64, "")
        .quantity("residual", rec.residual, "")
        .quantity("clipped_mass", rec.clipped_mass, "")
        .quantity("tail", rec.tail, "")
        .quantity("f_hat", g.fisher.value, "")
        .quantity("theta", g.angle, "rad");
    let mut notes = Vec::new();
    match (&args.mass, &args.frequency, args.mode_particles) {
        (Some(m), Some(f), Some(n)) => {
            let m = m.si("mass", Dimension::Mass, &mut notes)?;
            let w = f.si("frequency", Dimension::AngularFrequency, &mut notes)?;
            let sp = spread(&args.material, &args.delta_u, &mut notes)?;
            let mode = OscillatorMode::from_mass_frequency(m, w, Some(n))?;
            let s = oscillator::measured_qfi_sizes(&mode, g.fisher.value, sp, QuadratureScale::VacuumHalf)?;
            r.quantity("zero_point", mode.zero_point, "m");
            sizes_rows(&mut r, &s);
        }
        (None, None, None) => notes.push("no mode parameters given; sizes not computed".into()),
        _ => return Err(CliError::Parse("--mass, --frequency and --mode-particles go together".into())),
    }
    if args.report {
        for n in 0..rec.dim {
            r.quantity(&format!("population_{n}"), rec.state.population(n), "");
        }
    }
    r.notes(notes);
    Ok(r)
}

// ---------------------------------------------------------------------------
// diffraction

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffractionConfig {
    pub mass: Quantity,
    pub atoms: f64,
    pub period: Quantity,
    pub open_fraction: Scalar,
    pub visibility: Scalar,
    pub flight_time: Quantity,
    pub source_distance: Quantity,
    pub grating_distance: Quantity,
    #[serde(default)]
    pub l0_min: Option<Quantity>,
    #[serde(default)]
    pub l0_max: Option<Quantity>,
}

/// Default source-distance interval for the entangled-size range, m.
pub const L0_RANGE: (f64, f64) = (0.2, 1.0);

pub struct DiffractionInput {
    pub setup: TalbotLauSetup,
    pub l0_range: (f64, f64),
    pub notes: Vec<String>,
}

impl DiffractionConfig {
    pub fn resolve(&self) -> Result<DiffractionInput> {
        let mut notes = Vec::new();
        let setup = TalbotLauSetup {
            mass: self.mass.si("mass", Dimension::Mass, &mut notes)?,
            atoms: self.atoms,
            period: self.period.si("period", Dimension::Length, &mut notes)?,
            open_fraction: self.open_fraction.value("open_fraction")?,
            visibility: self.visibility.value("visibility")?,
            flight_time: self.flight_time.si("flight_time", Dimension::Time, &mut notes)?,
            source_distance: self.source_distance.si("source_distance", Dimension::Length, &mut notes)?,
            grating_distance: self.grating_distance.si("grating_distance", Dimension::Length, &mut notes)?,
        };
        let lo = self.l0_min.as_ref().map_or(Ok(L0_RANGE.0), |q| q.si("l0_min", Dimension::Length, &mut notes))?;
        let hi = self.l0_max.as_ref().map_or(Ok(L0_RANGE.1), |q| q.si("l0_max", Dimension::Length, &mut notes))?;
        Ok(DiffractionInput { setup, l0_range: (lo, hi), notes })
    }
}

pub fn fein_input() -> DiffractionInput {
    DiffractionInput { setup: catalog::fein_setup(L0_RANGE.0), l0_range: L0_RANGE, notes: Vec::new() }
}

pub fn diffraction(input: &DiffractionInput, scan: Option<&FringeScan>, calibrate: usize, seed: u64) -> Result<Report> {
    let d = diffraction::diffraction_sizes(&input.setup, scan)?;
    let range = diffraction::n_ent_over_source_distance(&input.setup, scan, input.l0_range.0, input.l0_range.1)?;
    let mut r = Report::quantities("diffraction");
    if let Some(fit) = &d.fit {
        r.quantity("fit_rms", fit.rms, "").quantity("fit_phase", fit.phase, "rad");
    }
    r.quantity("visibility", d.visibility, "")
        .quantity("wavenumber", d.wavenumber, "1/m")
        .quantity("fi_classical", d.fi_cl, "1/m^2")
        .quantity("fisher_bound", d.fisher, "kg^2 m^2")
        .quantity("coherence_length", d.coherence_length, "m")
        .quantity("slit_width", d.spread.slit_width, "m")
        .quantity("cm_spread_first", d.spread.at_first, "m")
        .quantity("cm_spread_second", d.spread.at_second, "m");
    sizes_rows(&mut r, &d.sizes);
    r.quantity("l0_min", range.source_distance.0, "m")
        .quantity("n_ent_at_l0_min", range.n_ent.0, "")
        .quantity("l0_max", range.source_distance.1, "m")
        .quantity("n_ent_at_l0_max", range.n_ent.1, "");
    if calibrate > 0 {
        let (Some(fit), Some(scan)) = (&d.fit, scan) else {
            return Err(CliError::Parse("--calibrate needs a fringe scan".into()));
        };
        let s = scan.positions();
        let span = s[s.len() - 1] - s[0];
        let noise = fit.rms.max(1e-6);
        let c = diffraction::calibrate_fit(fit.visibility, fit.wavenumber, span, s.len(), noise, calibrate, seed)?;
        r.quantity("calibration_runs", calibrate as u64, "")
            .quantity("calibration_seed", seed, "")
            .quantity("visibility_mean", c.mean, "")
            .quantity("visibility_std", c.std_dev, "")
            .quantity("visibility_max_error", c.max_abs_error, "");
    }
    r.notes(input.notes.iter().cloned());
    Ok(r)
}

// ---------------------------------------------------------------------------
// oscillator

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OscillatorConfig {
    /// Fundamental-mode volume of a drum; density follows from the mass.
    ModeVolume {
        shape: DrumShape,
        size: Quantity,
        thickness: Quantity,
        mass: Quantity,
        atomic_mass: Quantity,
    },
    /// Thermal sizes for both quadratures.
    Thermal {
        mass: Quantity,
        frequency: Quantity,
        nbar: Scalar,
        mode_particles: f64,
        #[serde(default)]
        material: Option<String>,
        #[serde(default)]
        delta_u: Option<Quantity>,
    },
    /// Discrete chain against the continuum entangled size.
    Chain {
        atoms: usize,
        atom_mass: Quantity,
        coupling: Quantity,
        pinning: Quantity,
        temperature: Quantity,
        addressed_mode: usize,
        addressed_occupation: Scalar,
        region_atoms: usize,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrumShape {
    /// `size` is the radius.
    Circular,
    /// `size` is the side length.
    Square,
}

pub fn oscillator(config: &OscillatorConfig) -> Result<Report> {
    let mut notes = Vec::new();
    let mut r = Report::quantities("oscillator");
    match config {
        OscillatorConfig::ModeVolume { shape, size, thickness, mass, atomic_mass } => {
            let size = size.si("size", Dimension::Length, &mut notes)?;
            let thickness = thickness.si("thickness", Dimension::Length, &mut notes)?;
            let shape = match shape {
                DrumShape::Circular => Shape::CircularDrum { radius: size, thickness },
                DrumShape::Square => Shape::SquareDrum { side: size, thickness },
            };
            let probe = ModeGeometry::new(shape.clone(), 1.0, 1.0)?;
            let density = mass.si("mass", Dimension::Mass, &mut notes)? / probe.volume();
            let g = ModeGeometry::new(shape, density, atomic_mass.si("atomic_mass", Dimension::Mass, &mut notes)?)?;
            let v = g.mode_volume(ModeSpec::Fundamental);
            let q = g.mode_volume_quadrature(ModeSpec::Fundamental);
            r.quantity("volume", v.volume, "m^3")
                .quantity("mode_volume", v.mode_volume, "m^3")
                .quantity("mode_fraction", v.mode_volume / v.volume, "")
                .quantity("mode_fraction_quadrature", q.mode_volume / q.volume, "")
                .quantity("mode_mass", v.mode_mass, "kg")
                .quantity("atoms", v.atoms, "")
                .quantity("mode_particles", v.mode_particles, "");
        }
        OscillatorConfig::Thermal { mass, frequency, nbar, mode_particles, material, delta_u } => {
            let m = mass.si("mass", Dimension::Mass, &mut notes)?;
            let w = frequency.si("frequency", Dimension::AngularFrequency, &mut notes)?;
            let sp = spread(material, delta_u, &mut notes)?;
            let mode = OscillatorMode::from_mass_frequency(m, w, Some(*mode_particles))?;
            let s = oscillator::thermal_sizes(&mode, nbar.value("nbar")?, sp)?;
            r.quantity("zero_point", mode.zero_point, "m")
                .quantity("position_n_ext", s.position.n_ext, "")
                .quantity("position_n_ent", s.position.n_ent, "")
                .quantity("momentum_n_ext", s.momentum.n_ext, "")
                .quantity("momentum_n_ent", s.momentum.n_ent, "");
        }
        OscillatorConfig::Chain {
            atoms,
            atom_mass,
            coupling,
            pinning,
            temperature,
            addressed_mode,
            addressed_occupation,
            region_atoms,
        } => {
            let model = ChainModel {
                atoms: *atoms,
                atom_mass: atom_mass.si("atom_mass", Dimension::Mass, &mut notes)?,
                coupling: coupling.si("coupling", Dimension::AngularFrequency, &mut notes)?,
                pinning: pinning.si("pinning", Dimension::AngularFrequency, &mut notes)?,
                temperature: temperature.si("temperature", Dimension::Temperature, &mut notes)?,
                addressed_mode: *addressed_mode,
                addressed_occupation: addressed_occupation.value("addressed_occupation")?,
                region_atoms: *region_atoms,
            };
            let c = oscillator::chain_oracle(&model)?;
            r.quantity("regions", c.regions as u64, "")
                .quantity("fisher", c.fisher, "kg^2 m^2")
                .quantity("variance_sum", c.variance_sum, "kg^2 m^2")
                .quantity("delta_u", c.delta_u, "m")
                .quantity("n_ent_exact", c.n_ent_exact, "")
                .quantity("n_ent_continuum", c.n_ent_continuum, "");
        }
    }
    r.notes(notes);
    Ok(r)
}

// ---------------------------------------------------------------------------
// catalog

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CatalogSelector {
    Table1,
    Fig3,
    Leggett,
    Nh,
    Flux,
}

pub fn catalog(what: CatalogSelector) -> Result<Report> {
    match what {
        CatalogSelector::Table1 => table1(),
        CatalogSelector::Fig3 => fig3(),
        CatalogSelector::Leggett => leggett(),
        CatalogSelector::Nh => nh(),
        CatalogSelector::Flux => flux(),
    }
}

fn table1() -> Result<Report> {
    let mut r = Report::new(
        "table1",
        &[
            "label",
            "system",
            "n_ext",
            "n_ent",
            "published_n_ext",
            "published_n_ent",
            "deviation_ext",
            "deviation_ent",
            "tolerance",
            "within_tolerance",
            "mechanism",
        ],
    );
    for row in catalog::table1()? {
        r.row(vec![
            row.entry.label.into(),
            row.entry.system.name().into(),
            row.sizes.n_ext.into(),
            row.sizes.n_ent.into(),
            row.published.0.into(),
            row.published.1.into(),
            row.deviation.0.into(),
            row.deviation.1.into(),
            row.entry.tolerance.name().into(),
            row.within_tolerance.into(),
            row.entry.mechanism.into(),
        ]);
    }
    r.note("deviation is computed / published - 1");
    Ok(r)
}

fn fig3() -> Result<Report> {
    let mut r = Report::new("fig3", &["label", "n_ext", "n_ent", "class", "deviation_ext", "deviation_ent", "note"]);
    for p in catalog::figure3_dataset()? {
        let (de, dn) = p.deviation.map_or((Cell::Empty, Cell::Empty), |(a, b)| (a.into(), b.into()));
        r.row(vec![p.label.into(), p.n_ext.into(), p.n_ent.into(), p.class.name().into(), de, dn, p.note.into()]);
    }
    Ok(r)
}

/// The dataset CSV exactly as the library writes it.
pub fn fig3_csv() -> Result<String> {
    Ok(catalog::dataset_csv(&catalog::figure3_dataset()?))
}

fn leggett() -> Result<Report> {
    let s = CrystalScenario::leggett();
    let c = catalog::leggett_crystal(&s)?;
    let n = catalog::nucleon_partition_comparison(&s, 1e-15)?;
    let mut r = Report::quantities("leggett");
    r.quantity("momentum_split", c.momentum_split, "kg m/s")
        .quantity("atom_momentum_spread", c.atom_momentum_spread, "kg m/s")
        .quantity("r_p", c.r_p, "")
        .quantity("momentum_n_ext", c.momentum.n_ext, "")
        .quantity("momentum_n_ent", c.momentum.n_ent, "")
        .quantity("position_split", c.position_split, "m")
        .quantity("r_q", c.r_q, "")
        .quantity("position_n_ext", c.position.n_ext, "")
        .quantity("position_n_ent", c.position.n_ent, "")
        .quantity("nucleon_confinement", n.nucleon_confinement, "m")
        .quantity("r_p_nucleon", n.r_p_nucleon, "")
        .quantity("nucleon_momentum_ratio", n.momentum_ratio, "")
        .quantity("nucleon_momentum_ratio_per_nucleon", n.momentum_ratio_per_nucleon, "")
        .quantity("nucleon_position_enhancement", n.position_enhancement, "");
    r.note(format!("position sizes after a drift of {} s", s.drift_time));
    Ok(r)
}

/// Critical length used for the modification parameter, m.
const NH_CRITICAL_LENGTH: f64 = 100e-9;

fn nh() -> Result<Report> {
    let setup = catalog::fein_setup(L0_RANGE.0);
    let d = diffraction::diffraction_sizes(&setup, None)?;
    let m = catalog::nh_mu(&NhParams {
        coherence_time: setup.flight_time,
        critical_length: NH_CRITICAL_LENGTH,
        n_ext: d.sizes.n_ext,
    })?;
    let mut r = Report::quantities("nh");
    r.quantity("n_ext", d.sizes.n_ext, "")
        .quantity("coherence_time", setup.flight_time, "s")
        .quantity("critical_length", NH_CRITICAL_LENGTH, "m")
        .quantity("sigma_q", m.sigma_q, "kg m/s")
        .quantity("tau_e", m.tau_e, "s")
        .quantity("mu", m.mu, "")
        .quantity("mu_simplified", m.mu_simplified, "");
    r.note("interferometer point at the near source distance; coherence time is the grating flight time");
    r.note("the rate uses the sub-QFI F2 and treats F2 ~ F, valid for nearly pure superpositions");
    Ok(r)
}

fn flux() -> Result<Report> {
    let mut r = Report::quantities("flux");
    flux_rows(&mut r, &catalog::flux_qubit(&FluxQubit::friedman())?);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse<T: DeserializeOwned>(s: &str) -> std::result::Result<T, serde_json::Error> {
        serde_json::from_str(s)
    }

    #[test]
    fn unknown_fields_are_rejected_in_every_variant() {
        assert!(parse::<MeasureConfig>(r#"{"kind":"qubit_register","state":"ghz","sites":3,"extra":1}"#).is_err());
        assert!(parse::<MeasureConfig>(r#"{"kind":"qubit_register","state":"ghz","sites":3}"#).is_ok());
        assert!(parse::<OscillatorConfig>(
            r#"{"kind":"chain","atoms":8,"atom_mass":"1 kg","coupling":"1 rad/s","pinning":"1 rad/s",
                "temperature":"1 K","addressed_mode":1,"addressed_occupation":0,"region_atoms":1,"x":0}"#
        )
        .is_err());
        assert!(parse::<MeasureConfig>(
            r#"{"kind":"oscillator_state","state":{"name":"cat","alpha":2,"beta":1},"mass":"1 kg","frequency":"1 Hz","mode_particles":1}"#
        )
        .is_err());
    }

    #[test]
    fn product_register_is_not_entangled() {
        let cfg = parse::<MeasureConfig>(r#"{"kind":"qubit_register","state":"product","sites":4}"#).unwrap();
        let r = measure(&cfg).unwrap();
        let Some(Cell::Num(n_ent)) = r.value_of("n_ent") else { panic!("no n_ent") };
        assert!((n_ent - 1.0).abs() < 1e-12, "{n_ent}");
        assert_eq!(r.value_of("witness_depth"), Some(&Cell::Int(1)));
    }
}
