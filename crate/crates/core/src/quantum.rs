//! Dense complex-Hermitian operator algebra, Fock-space builders and
//! reference states.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::measures::PartitionedObservable;

/// Largest matrix dimension handled by the dense routines.
pub const MAX_DIM: usize = 4096;
/// Largest qubit register accepted by [`ghz_state`] (`2^12 = MAX_DIM`).
pub const MAX_GHZ_SITES: usize = 12;
/// Truncated-tail weight above which a Fock-space state is rejected.
pub const TAIL_LIMIT: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const PHASE_PIVOT: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} outside 1..={MAX_DIM}")]
    DimensionOutOfRange { dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("trace {trace} differs from 1")]
    Trace { trace: f64 },
    #[error("matrix has negative eigenvalue {value:e}")]
    NotPositive { value: f64 },
    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("truncated tail weight {tail:e} at dim {dim} exceeds {TAIL_LIMIT:e}; try dim {suggested}")]
    Truncation { tail: f64, dim: usize, suggested: usize },
    #[error("{sites}-site register needs {bytes} bytes of dense storage (cap is {MAX_GHZ_SITES} sites)")]
    TooManySites { sites: usize, bytes: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, QuantumError>;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(QuantumError::DimensionOutOfRange { dim });
    }
    Ok(())
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn max_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Square complex matrix acting on a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<Complex64>);

impl Operator {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(QuantumError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        check_dim(m.nrows())?;
        Ok(Self(m))
    }

    /// Builds an operator that must be Hermitian. The stored matrix is
    /// symmetrized so downstream code sees an exactly Hermitian array.
    pub fn hermitian(m: DMatrix<Complex64>) -> Result<Self> {
        let op = Self::new(m)?;
        op.check_hermitian()?;
        Ok(Self((&op.0 + op.0.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self(DMatrix::from_diagonal(&d))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn pauli_x() -> Self {
        Self(DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]))
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self(DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn max_asymmetry(&self) -> f64 {
        max_asymmetry(&self.0)
    }

    pub fn is_hermitian(&self) -> bool {
        self.check_hermitian().is_ok()
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let asym = self.max_asymmetry();
        if asym > HERMITIAN_TOL * max_abs(&self.0).max(1.0) {
            return Err(QuantumError::NotHermitian { max_asymmetry: asym });
        }
        Ok(())
    }

    pub fn kron(&self, other: &Operator) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        check_dim(dim)?;
        Ok(Self(self.0.kronecker(&other.0)))
    }

    /// Embeds `self` as the factor at `site` of a register whose factor
    /// dimensions are `dims`, padding with identities.
    pub fn embed(&self, site: usize, dims: &[usize]) -> Result<Self> {
        if site >= dims.len() || dims[site] != self.dim() {
            return Err(QuantumError::InvalidParameter(format!(
                "cannot place a {}-dim factor at site {site} of {dims:?}",
                self.dim()
            )));
        }
        let before: usize = dims[..site].iter().product();
        let after: usize = dims[site + 1..].iter().product();
        Operator::identity(before).kron(self)?.kron(&Operator::identity(after))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn compose(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    /// `U self U^dagger`.
    pub fn conjugated_by(&self, u: &Operator) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scaled(rhs)
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
    /// `max|V diag(lambda) V^dagger - H| / max|H|`.
    pub residual: f64,
}

impl Spectrum {
    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DVector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|&l| c(l)));
        &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.adjoint()
    }
}

/// Hermitian eigensolver with a deterministic ordering and phase convention:
/// eigenvalues descend and each eigenvector's first non-negligible component
/// is real positive.
pub fn eigh(h: &Operator) -> Result<Spectrum> {
    h.check_hermitian()?;
    eigh_matrix(h.matrix())
}

pub(crate) fn eigh_matrix(m: &DMatrix<Complex64>) -> Result<Spectrum> {
    let n = m.nrows();
    let max_iter = 200 * n.max(8);
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, max_iter)
        .ok_or(QuantumError::NoConvergence { iterations: max_iter })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        if let Some(pivot) = v.iter().find(|z| z.norm() > PHASE_PIVOT) {
            let phase = pivot.conj() / pivot.norm();
            v *= phase;
        }
        vectors.set_column(col, &v);
    }
    let mut spectrum = Spectrum { eigenvalues, eigenvectors: vectors, residual: 0.0 };
    let scale = max_abs(&sym).max(f64::MIN_POSITIVE);
    spectrum.residual = max_abs(&(spectrum.reconstruct() - sym)) / scale;
    Ok(spectrum)
}

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
    /// Normalized state vector when the state was built as a pure state.
    pure: Option<DVector<Complex64>>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let op = Operator::hermitian(m)?;
        let trace = op.0.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(QuantumError::Trace { trace });
        }
        let spec = eigh_matrix(&op.0)?;
        let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(QuantumError::NotPositive { value: min });
        }
        Ok(Self { m: op.0, pure: None })
    }

    /// Pure state `|psi><psi|` from an unnormalized vector.
    pub fn from_state_vector(psi: DVector<Complex64>) -> Result<Self> {
        check_dim(psi.len())?;
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QuantumError::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        let psi = psi / c(norm);
        Ok(Self { m: &psi * psi.adjoint(), pure: Some(psi) })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(pops: &[f64]) -> Result<Self> {
        check_dim(pops.len())?;
        if let Some(&p) = pops.iter().find(|&&p| p < -PSD_TOL || !p.is_finite()) {
            return Err(QuantumError::NotPositive { value: p });
        }
        let trace: f64 = pops.iter().sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(QuantumError::Trace { trace });
        }
        Ok(Self { m: Operator::diagonal(pops).0, pure: None })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Self::from_populations(&vec![1.0 / dim as f64; dim])
    }

    /// Wraps a matrix already known to be a valid state, fixing up rounding in
    /// the trace and Hermiticity.
    pub(crate) fn from_trusted(m: DMatrix<Complex64>) -> Self {
        let h = (&m + m.adjoint()) * c(0.5);
        let tr = h.trace().re;
        Self { m: h / c(tr), pure: None }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn state_vector(&self) -> Option<&DVector<Complex64>> {
        self.pure.as_ref()
    }

    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn population(&self, n: usize) -> f64 {
        self.m[(n, n)].re
    }

    /// `tr(rho A)` (real part; exact for Hermitian `A`).
    pub fn expectation(&self, a: &Operator) -> f64 {
        if let Some(psi) = &self.pure {
            return psi.dotc(&(a.matrix() * psi)).re;
        }
        trace_product(&self.m, a.matrix()).re
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eigh_matrix(&self.m)
    }

    /// `U rho U^dagger`.
    pub fn evolve(&self, u: &Operator) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch { left: u.dim(), right: self.dim() });
        }
        if let Some(psi) = &self.pure {
            return Self::from_state_vector(u.matrix() * psi);
        }
        Ok(Self::from_trusted(u.matrix() * &self.m * u.matrix().adjoint()))
    }
}

/// `tr(A B)` in O(d^2).
pub(crate) fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Kronecker product of two states.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(a.dim().saturating_mul(b.dim()))?;
    let pure = match (&a.pure, &b.pure) {
        (Some(x), Some(y)) => Some(x.kronecker(y)),
        _ => None,
    };
    Ok(DensityMatrix { m: a.m.kronecker(&b.m), pure })
}

/// Classical mixture `p rho + (1-p) sigma`.
pub fn mix(p: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::InvalidParameter(format!("mixing weight {p} outside [0,1]")));
    }
    if rho.dim() != sigma.dim() {
        return Err(QuantumError::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    if p == 1.0 {
        return Ok(rho.clone());
    }
    if p == 0.0 {
        return Ok(sigma.clone());
    }
    Ok(DensityMatrix { m: &rho.m * c(p) + &sigma.m * c(1.0 - p), pure: None })
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QuantumError::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    if let Some(psi) = rho.pure.as_ref().or(sigma.pure.as_ref()) {
        let other = if rho.pure.is_some() { sigma } else { rho };
        return Ok(psi.dotc(&(&other.m * psi)).re.clamp(0.0, 1.0));
    }
    let spec = rho.spectrum()?;
    let sqrt_vals = DVector::from_iterator(
        spec.eigenvalues.len(),
        spec.eigenvalues.iter().map(|&l| c(l.max(0.0).sqrt())),
    );
    let root = &spec.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * spec.eigenvectors.adjoint();
    let inner = eigh_matrix(&(&root * &sigma.m * &root))?;
    let t: f64 = inner.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((t * t).min(1.0))
}

/// Ladder operator and quadratures on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub annihilation: Operator,
    /// `sqrt(nu) (a + a^dagger)`; vacuum variance `nu`.
    pub position: Operator,
    /// `(hbar / 2 sqrt(nu)) i (a^dagger - a)`; vacuum variance `hbar^2 / 4 nu`.
    pub momentum: Operator,
}

/// Builds `a`, `x` and `p` on `dim` Fock levels. The truncation only spoils
/// `[x, p] = i hbar` in the last diagonal entry.
pub fn fock_operators(dim: usize, nu: f64, hbar: f64) -> Result<FockOperators> {
    if dim < 2 {
        return Err(QuantumError::InvalidParameter(format!("Fock dimension {dim} < 2")));
    }
    check_dim(dim)?;
    if !(nu > 0.0 && nu.is_finite()) || !(hbar > 0.0 && hbar.is_finite()) {
        return Err(QuantumError::InvalidParameter("nu and hbar must be positive".into()));
    }
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let ad = a.adjoint();
    let x = (&a + &ad) * c(nu.sqrt());
    let p = (&ad - &a) * Complex64::new(0.0, hbar / (2.0 * nu.sqrt()));
    Ok(FockOperators { annihilation: Operator(a), position: Operator(x), momentum: Operator(p) })
}

/// Dimensionless quadratures with vacuum variance 1/2 (`nu = 1/2`, `hbar = 1`).
pub fn unit_quadratures(dim: usize) -> Result<FockOperators> {
    fock_operators(dim, 0.5, 1.0)
}

/// Reference single-mode states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    Vacuum,
    Number(usize),
    Coherent(Complex64),
    /// Even cat `|alpha> + |-alpha>`, normalized.
    EvenCat(Complex64),
    /// Thermal state with mean occupation `nbar`.
    Thermal(f64),
    /// Squeezed vacuum `S(r)|0>`, squeezed along position for `r > 0`.
    SqueezedVacuum(f64),
}

impl StateKind {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(QuantumError::InvalidParameter(what.to_string()));
        match *self {
            StateKind::Coherent(a) | StateKind::EvenCat(a) if !a.is_finite() => bad("non-finite amplitude"),
            StateKind::Thermal(n) if !(n >= 0.0 && n.is_finite()) => bad("thermal occupation must be finite and >= 0"),
            StateKind::SqueezedVacuum(r) if !r.is_finite() => bad("non-finite squeezing"),
            _ => Ok(()),
        }
    }
}

/// Untruncated population of Fock level `n` (all levels `n >= from` summed
/// for [`truncation_tail`]).
fn population_tail<F: FnMut(usize) -> f64>(from: usize, mut term: F, peak: f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut n = from;
    let give_up = peak + 60.0 * (peak + 1.0).sqrt() + 100.0;
    loop {
        let t = term(n);
        sum += t;
        // Pairs of terms so that alternating zero populations (cats) do not
        // stop the sum early.
        if n as f64 > peak && (t + prev <= 1e-18 * sum || (sum == 0.0 && n as f64 > give_up)) {
            break;
        }
        prev = t;
        n += 1;
        if n > from + 1_000_000 {
            break;
        }
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn poisson_ln(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + n as f64 * mean.ln() - ln_factorial(n)
}

/// Population weight that `kind` places on Fock levels `>= dim`.
pub fn truncation_tail(kind: StateKind, dim: usize) -> f64 {
    match kind {
        StateKind::Vacuum => 0.0,
        StateKind::Number(n) => {
            if n < dim {
                0.0
            } else {
                1.0
            }
        }
        StateKind::Coherent(alpha) => {
            let mean = alpha.norm_sqr();
            population_tail(dim, |n| poisson_ln(n, mean).exp(), mean)
        }
        StateKind::EvenCat(alpha) => {
            let mean = alpha.norm_sqr();
            let norm = 1.0 + (-2.0 * mean).exp();
            population_tail(dim, |n| if n % 2 == 0 { 2.0 * poisson_ln(n, mean).exp() / norm } else { 0.0 }, mean)
        }
        StateKind::Thermal(nbar) => {
            let p = nbar / (nbar + 1.0);
            p.powi(dim as i32)
        }
        StateKind::SqueezedVacuum(r) => {
            let t2 = r.tanh().powi(2);
            let first = dim.div_ceil(2);
            // |c_{2m}|^2 = t2^m (2m)! / (4^m m!^2) / cosh r
            let ln_term = |m: usize| {
                m as f64 * t2.ln() + ln_factorial(2 * m) - 2.0 * ln_factorial(m) - m as f64 * 4f64.ln() - r.cosh().ln()
            };
            if t2 == 0.0 {
                return if first == 0 { 1.0 } else { 0.0 };
            }
            population_tail(first, |m| ln_term(m).exp(), 0.0)
        }
    }
}

/// Smallest dimension whose truncation tail is below [`TAIL_LIMIT`].
pub fn suggested_dim(kind: StateKind) -> usize {
    let mut d = 2;
    while d < MAX_DIM && truncation_tail(kind, d) >= TAIL_LIMIT {
        d += if d < 64 { 1 } else { d / 8 };
    }
    d.min(MAX_DIM)
}

fn pure_amplitudes(kind: StateKind, dim: usize) -> Option<DVector<Complex64>> {
    let mut v = DVector::zeros(dim);
    match kind {
        StateKind::Vacuum => v[0] = c(1.0),
        StateKind::Number(n) => v[n] = c(1.0),
        StateKind::Coherent(alpha) | StateKind::EvenCat(alpha) => {
            let mut amp = c((-alpha.norm_sqr() / 2.0).exp());
            for n in 0..dim {
                v[n] = amp;
                amp = amp * alpha / ((n + 1) as f64).sqrt();
            }
            if matches!(kind, StateKind::EvenCat(_)) {
                for n in (1..dim).step_by(2) {
                    v[n] = c(0.0);
                }
            }
        }
        StateKind::SqueezedVacuum(r) => {
            let t = -r.tanh();
            let mut amp = 1.0 / r.cosh().sqrt();
            let mut m = 0usize;
            while 2 * m < dim {
                v[2 * m] = c(amp);
                amp *= t * ((2 * m + 1) as f64 / (2 * m + 2) as f64).sqrt();
                m += 1;
            }
        }
        StateKind::Thermal(_) => return None,
    }
    Some(v)
}

/// Truncated state vector for the pure reference kinds (renormalized).
pub fn state_vector(kind: StateKind, dim: usize) -> Result<DVector<Complex64>> {
    let rho = make_state(kind, dim)?;
    rho.pure.ok_or_else(|| QuantumError::InvalidParameter("thermal states are mixed".into()))
}

/// Builds a reference state on `dim` Fock levels. The truncated tail must be
/// below [`TAIL_LIMIT`]; the kept part is renormalized.
pub fn make_state(kind: StateKind, dim: usize) -> Result<DensityMatrix> {
    kind.validate()?;
    check_dim(dim)?;
    let tail = truncation_tail(kind, dim);
    if tail >= TAIL_LIMIT {
        return Err(QuantumError::Truncation { tail, dim, suggested: suggested_dim(kind) });
    }
    match kind {
        StateKind::Thermal(nbar) => {
            let p = nbar / (nbar + 1.0);
            let mut pops: Vec<f64> = (0..dim).map(|n| (1.0 - p) * p.powi(n as i32)).collect();
            let total: f64 = pops.iter().sum();
            pops.iter_mut().for_each(|x| *x /= total);
            DensityMatrix::from_populations(&pops)
        }
        _ => DensityMatrix::from_state_vector(pure_amplitudes(kind, dim).expect("pure kind")),
    }
}

/// Mean occupation of a mode of angular frequency `omega` at temperature `t`.
pub fn thermal_occupation(hbar_omega: f64, kb_t: f64) -> f64 {
    if kb_t <= 0.0 {
        return 0.0;
    }
    1.0 / (hbar_omega / kb_t).exp_m1()
}

/// `sqrt(1-q)|0...0> + sqrt(q) e^{i phi}|1...1>` on `n` qubits, paired with
/// `A = sum_i sigma_z^(i)` split into its single-qubit addends.
pub fn ghz_state(n: usize, q: f64, phi: f64) -> Result<(DensityMatrix, PartitionedObservable)> {
    if n == 0 {
        return Err(QuantumError::InvalidParameter("GHZ register needs at least one qubit".into()));
    }
    if n > MAX_GHZ_SITES {
        let dim = 1u128 << n;
        return Err(QuantumError::TooManySites { sites: n, bytes: dim * dim * 16 });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(QuantumError::InvalidParameter(format!("GHZ weight {q} outside [0,1]")));
    }
    let dim = 1usize << n;
    let mut psi = DVector::zeros(dim);
    psi[0] += c((1.0 - q).sqrt());
    psi[dim - 1] += Complex64::from_polar(q.sqrt(), phi);
    let rho = DensityMatrix::from_state_vector(psi)?;
    Ok((rho, collective_z(n)?))
}

/// `sum_i sigma_z^(i)` on `n` qubits with its single-site addends.
pub fn collective_z(n: usize) -> Result<PartitionedObservable> {
    collective(&Operator::pauli_z(), n)
}

/// `sum_i a^(i)` for `n` copies of a single-site operator `a`.
pub fn collective(a: &Operator, n: usize) -> Result<PartitionedObservable> {
    let dims = vec![a.dim(); n];
    let locals = (0..n).map(|i| a.embed(i, &dims)).collect::<Result<Vec<_>>>()?;
    PartitionedObservable::from_locals(locals, format!("{n} single sites"))
        .map_err(|e| QuantumError::InvalidParameter(e.to_string()))
}

/// Normalized Hermite functions `psi_n(x) = pi^{-1/4} H_n(x) e^{-x^2/2} / sqrt(2^n n!)`
/// for `n = 0..count`, by the stable three-term recurrence.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp());
    if count > 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}
