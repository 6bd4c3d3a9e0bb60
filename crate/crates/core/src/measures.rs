//! Extensive and entangled sizes, their normalization units and the
//! entanglement-depth witness.

use thiserror::Error;

use crate::fisher::{self, FisherError};
use crate::quantum::{DensityMatrix, Operator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Fisher(#[from] FisherError),
    #[error("normalization unit must be positive, got {0}")]
    NonPositiveUnit(f64),
    #[error("incoherent-local: sum of local variances is {0}, entangled size undefined")]
    IncoherentLocal(f64),
    #[error("partition has no local addends")]
    EmptyPartition,
    #[error("local addends do not sum to the total (max deviation {0:e})")]
    InconsistentPartition(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// CODATA 2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Atomic mass constant, kg.
    pub atomic_mass: f64,
    /// Bohr radius, m.
    pub bohr_radius: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Electron mass, kg.
    pub electron_mass: f64,
    /// Elementary charge, C.
    pub elementary_charge: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    atomic_mass: 1.660_539_066_60e-27,
    bohr_radius: 5.291_772_109_03e-11,
    hbar: 1.054_571_817e-34,
    boltzmann: 1.380_649e-23,
    electron_mass: 9.109_383_701_5e-31,
    elementary_charge: 1.602_176_634e-19,
};

pub fn constants() -> PhysicalConstants {
    CODATA_2018
}

impl PhysicalConstants {
    /// Mass-weighted position unit `m_u a0`, kg m.
    pub fn q0(&self) -> f64 {
        self.atomic_mass * self.bohr_radius
    }

    /// Momentum unit `hbar / (2 a0)`, kg m/s.
    pub fn p0(&self) -> f64 {
        self.hbar / (2.0 * self.bohr_radius)
    }

    /// Angular-momentum unit `hbar / 2`, J s.
    pub fn j0(&self) -> f64 {
        self.hbar / 2.0
    }
}

/// Unit `A0` against which an extensive observable is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeUnit {
    /// Mass-weighted position, `m_u a0`.
    Q0,
    /// Momentum, `hbar / 2 a0`.
    P0,
    Custom(f64),
}

impl SizeUnit {
    pub fn value(&self) -> f64 {
        match *self {
            SizeUnit::Q0 => CODATA_2018.q0(),
            SizeUnit::P0 => CODATA_2018.p0(),
            SizeUnit::Custom(v) => v,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SizeUnit::Q0 => "Q0",
            SizeUnit::P0 => "P0",
            SizeUnit::Custom(_) => "custom",
        }
    }
}

/// An extensive observable `A = sum_i A_i` over a partition into subsystems.
#[derive(Debug, Clone)]
pub struct PartitionedObservable {
    total: Operator,
    locals: Vec<Operator>,
    label: String,
}

impl PartitionedObservable {
    pub fn new(total: Operator, locals: Vec<Operator>, label: impl Into<String>) -> Result<Self> {
        if locals.is_empty() {
            return Err(MeasureError::EmptyPartition);
        }
        if let Some(bad) = locals.iter().find(|l| l.dim() != total.dim()) {
            return Err(MeasureError::InvalidInput(format!("local of dim {} vs total of dim {}", bad.dim(), total.dim())));
        }
        let mut sum = Operator::zeros(total.dim());
        for l in &locals {
            sum = &sum + l;
        }
        let dev = (sum.matrix() - total.matrix()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if dev > 1e-10 {
            return Err(MeasureError::InconsistentPartition(dev));
        }
        Ok(Self { total, locals, label: label.into() })
    }

    pub fn from_locals(locals: Vec<Operator>, label: impl Into<String>) -> Result<Self> {
        let first = locals.first().ok_or(MeasureError::EmptyPartition)?;
        let mut total = Operator::zeros(first.dim());
        for l in &locals {
            if l.dim() != total.dim() {
                return Err(MeasureError::InvalidInput("local addends differ in dimension".into()));
            }
            total = &total + l;
        }
        Self::new(total, locals, label)
    }

    pub fn total(&self) -> &Operator {
        &self.total
    }

    pub fn locals(&self) -> &[Operator] {
        &self.locals
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Local-variance sum supplied analytically, for partitions too large to
/// represent as matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalVarianceSum {
    pub parts: f64,
    pub variance_sum: f64,
    pub label: String,
}

impl LocalVarianceSum {
    /// `parts` identical subsystems each with variance `local_variance`.
    pub fn uniform(parts: f64, local_variance: f64, label: impl Into<String>) -> Self {
        Self { parts, variance_sum: parts * local_variance, label: label.into() }
    }
}

/// Sizes of one state/observable pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeReport {
    pub n_ext: f64,
    pub n_ent: f64,
    pub witness_depth: u64,
    pub unit: SizeUnit,
    /// Named inputs echoed for reporting.
    pub inputs: Vec<(String, f64)>,
}

impl SizeReport {
    pub fn new(n_ext: f64, n_ent: f64, unit: SizeUnit) -> Self {
        Self { n_ext, n_ent, witness_depth: witness_depth(n_ent), unit, inputs: Vec::new() }
    }

    pub fn with_input(mut self, name: impl Into<String>, value: f64) -> Self {
        self.inputs.push((name.into(), value));
        self
    }

    /// Scales both sizes, keeping the inputs.
    pub fn scaled(&self, ext_factor: f64, ent_factor: f64) -> Self {
        let mut out = Self::new(self.n_ext * ext_factor, self.n_ent * ent_factor, self.unit);
        out.inputs = self.inputs.clone();
        out
    }
}

/// `F / (4 A0^2)`.
pub fn extensive_size(fisher: f64, unit: f64) -> Result<f64> {
    if !(unit > 0.0 && unit.is_finite()) {
        return Err(MeasureError::NonPositiveUnit(unit));
    }
    if !(fisher >= 0.0) {
        return Err(MeasureError::InvalidInput(format!("Fisher information {fisher} must be >= 0")));
    }
    Ok(fisher / (4.0 * unit * unit))
}

/// `F(rho, A) / (4 sum_i Var(rho, A_i))`.
pub fn entangled_size(rho: &DensityMatrix, a: &PartitionedObservable) -> Result<f64> {
    let f = fisher::qfi(rho, a.total())?.value;
    let mut denom = 0.0;
    for l in a.locals() {
        denom += fisher::variance(rho, l)?;
    }
    ratio(f, denom)
}

/// Entangled size with an analytically supplied denominator.
pub fn entangled_size_closed_form(fisher: f64, locals: &LocalVarianceSum) -> Result<f64> {
    ratio(fisher, locals.variance_sum)
}

fn ratio(f: f64, denom: f64) -> Result<f64> {
    if !(denom > 0.0) || denom <= 1e-15 * f.abs() {
        return Err(MeasureError::IncoherentLocal(denom));
    }
    Ok(f / (4.0 * denom))
}

/// Smallest entanglement depth compatible with an entangled size, `ceil(n_ent)`.
pub fn witness_depth(n_ent: f64) -> u64 {
    if !n_ent.is_finite() {
        return u64::MAX;
    }
    (n_ent - 1e-9).ceil().max(0.0) as u64
}

/// `N r^2 / (1 + r^2)` for two branches separated by `r` per-branch widths.
pub fn two_branch_entangled_size(n: f64, r: f64) -> f64 {
    if r.is_infinite() {
        return n;
    }
    let r2 = r * r;
    if r2 > 1.0 {
        n / (1.0 + 1.0 / r2)
    } else {
        n * r2 / (1.0 + r2)
    }
}

/// Unit `sqrt(Q0^2 + t^2 P0^2)` for the observable `Q + t P` (`t` in seconds,
/// momenta per unit mass).
pub fn rotated_unit(t: f64) -> f64 {
    let k = CODATA_2018;
    k.q0().hypot(t * k.p0())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ghz_state, tensor, DensityMatrix};
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn derived_units() {
        let k = constants();
        assert!((k.q0() / 8.787e-38 - 1.0).abs() < 1e-4);
        assert!((k.p0() / 9.964e-25 - 1.0).abs() < 1e-4);
        assert_eq!(k.j0(), k.hbar / 2.0);
        assert!((k.q0() * k.p0() / k.atomic_mass / (k.hbar / 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extensive_size_of_two_branches() {
        let dq = 3.0e-35;
        let f = dq * dq; // 4 Var for equal-weight branches at +-dq/2
        let n = extensive_size(f, SizeUnit::Q0.value()).unwrap();
        assert!((n / (dq / (2.0 * CODATA_2018.q0())).powi(2) - 1.0).abs() < 1e-14);
        assert_eq!(extensive_size(0.0, 1.0).unwrap(), 0.0);
        assert!(extensive_size(1.0, 0.0).is_err());
    }

    #[test]
    fn crystal_momentum_extensive_size() {
        let dp = 1.66e-18;
        let n = extensive_size(dp * dp, SizeUnit::P0.value()).unwrap();
        assert!((n / 6.9e11 - 1.0).abs() < 0.03, "{n}");
    }

    #[test]
    fn ghz_saturates() {
        let (rho, obs) = ghz_state(5, 0.5, 0.0).unwrap();
        assert!((entangled_size(&rho, &obs).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn product_plus_states() {
        let plus = DensityMatrix::from_state_vector(DVector::from_vec(vec![c(1.0), c(1.0)])).unwrap();
        let mut rho = plus.clone();
        for _ in 0..3 {
            rho = tensor(&rho, &plus).unwrap();
        }
        let obs = crate::quantum::collective_z(4).unwrap();
        assert!((entangled_size(&rho, &obs).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Mixture of two qutrit GHZ-like states with the `|0>` branch.
    #[test]
    fn mixed_qutrit_maximum_size() {
        let (n, u, p) = (4usize, 0.3f64, 0.6f64);
        let (phi, chi) = (0.7f64, -1.2f64);
        let dim = 3usize.pow(n as u32);
        // Site basis |+>, |0>, |->, with A_i = diag(1, 0, -1).
        let index = |digit: usize| (0..n).fold(0, |acc, _| acc * 3 + digit);
        let mut psi0 = DVector::zeros(dim);
        let mut psi1 = DVector::zeros(dim);
        let eph = Complex64::from_polar(1.0, phi);
        let ech = Complex64::from_polar(1.0, chi);
        psi0[index(0)] = c((u / 2.0).sqrt());
        psi0[index(2)] = eph * (u / 2.0).sqrt();
        psi0[index(1)] = ech * (1.0 - u).sqrt();
        psi1[index(0)] = c(((1.0 - u) / 2.0).sqrt());
        psi1[index(2)] = eph * ((1.0 - u) / 2.0).sqrt();
        psi1[index(1)] = -ech * u.sqrt();
        let m: DMatrix<Complex64> = &psi0 * psi0.adjoint() * c(p) + &psi1 * psi1.adjoint() * c(1.0 - p);
        let rho = DensityMatrix::new(m).unwrap();
        let site = Operator::diagonal(&[1.0, 0.0, -1.0]);
        let obs = crate::quantum::collective(&site, n).unwrap();
        assert!((entangled_size(&rho, &obs).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn witness_ceiling() {
        assert_eq!(witness_depth(4.2), 5);
        assert_eq!(witness_depth(1.0), 1);
        assert_eq!(witness_depth(5.1), 6);
        assert_eq!(witness_depth(5.0 + 1e-12), 5);
    }

    #[test]
    fn two_branch_limits() {
        let n = two_branch_entangled_size(1.6e13, 9.8e-9);
        assert!(n > 1e-3 && n < 2e-3, "{n}");
        assert_eq!(two_branch_entangled_size(7.0, f64::INFINITY), 7.0);
        assert_eq!(two_branch_entangled_size(8.0, 1.0), 4.0);
        assert!((two_branch_entangled_size(8.0, 1e8) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_unit_limits() {
        let k = constants();
        assert_eq!(rotated_unit(0.0), k.q0());
        let t = k.q0() / k.p0();
        assert!((rotated_unit(t) / (2f64.sqrt() * k.q0()) - 1.0).abs() < 1e-14);
        assert!((rotated_unit(1e6) / (1e6 * k.p0()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_local_variance_is_reported() {
        let (rho, obs) = ghz_state(2, 0.0, 0.0).unwrap();
        assert!(matches!(entangled_size(&rho, &obs), Err(MeasureError::IncoherentLocal(_))));
    }

    /// Each site carries a branch qubit (momentum +-dp/2) and classical noise
    /// of variance delta^2 that commutes with the local momentum.
    #[test]
    fn two_branch_formula_matches_explicit_model() {
        for n in 1..=4usize {
            for &r in &[0.1, 0.7, 1.0, 2.5] {
                let delta = 1.0;
                let dp = 2.0 * r * delta;
                let site_dims = vec![4usize; n];
                // Site basis |branch, noise>: branch 0 -> +dp/2, noise 0 -> +delta.
                let local = Operator::diagonal(&[dp / 2.0 + delta, dp / 2.0 - delta, -dp / 2.0 + delta, -dp / 2.0 - delta]);
                let locals: Vec<Operator> = (0..n).map(|i| local.embed(i, &site_dims).unwrap()).collect();
                let obs = PartitionedObservable::from_locals(locals, "sites").unwrap();
                let dim = 4usize.pow(n as u32);
                let mut m = DMatrix::<Complex64>::zeros(dim, dim);
                // GHZ over branches, independent uniform noise on each site.
                for noise in 0..(1usize << n) {
                    let mut up = 0usize;
                    let mut down = 0usize;
                    for site in 0..n {
                        let bit = (noise >> (n - 1 - site)) & 1;
                        up = up * 4 + bit;
                        down = down * 4 + 2 + bit;
                    }
                    let w = 1.0 / (1usize << n) as f64;
                    for &(i, j) in &[(up, up), (up, down), (down, up), (down, down)] {
                        m[(i, j)] += c(0.5 * w);
                    }
                }
                let rho = DensityMatrix::new(m).unwrap();
                let exact = entangled_size(&rho, &obs).unwrap();
                let formula = two_branch_entangled_size(n as f64, r);
                assert!((exact - formula).abs() < 1e-9, "n={n} r={r}: {exact} vs {formula}");
            }
        }
    }
}
