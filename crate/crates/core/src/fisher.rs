//! Quantum and classical Fisher information.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::quantum::{eigh_matrix, trace_product, DensityMatrix, Operator, QuantumError};

/// Purity above which a state is treated as pure.
pub const PURE_THRESHOLD: f64 = 1.0 - 1e-10;
/// Spectral pairs with `lambda_i + lambda_j` below this fraction of the
/// largest eigenvalue are dropped.
pub const PAIR_CUTOFF: f64 = 1e-12;
/// Grid cells with `p` below this fraction of `max p` are dropped.
pub const DENSITY_FLOOR: f64 = 1e-12;
/// Golden-section stopping width in radians.
pub const ANGLE_TOL: f64 = 1e-4;

const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FisherError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("dimension mismatch: state {state} vs operator {operator}")]
    DimensionMismatch { state: usize, operator: usize },
    #[error("density is not normalized: sum*h = {sum}")]
    Unnormalized { sum: f64 },
    #[error("density has a negative or non-finite sample {value} at index {index}")]
    InvalidSample { index: usize, value: f64 },
    #[error("binary trial probability {0} must lie strictly inside (0,1)")]
    SingularTrial(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, FisherError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMethod {
    Spectral,
    PureVariance,
    ClosedForm,
    Classical,
    SubQfi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherResult {
    pub value: f64,
    pub method: FisherMethod,
    pub diagnostics: BTreeMap<&'static str, f64>,
}

impl FisherResult {
    fn new(value: f64, method: FisherMethod) -> Self {
        Self { value: value.max(0.0), method, diagnostics: BTreeMap::new() }
    }

    fn with(mut self, key: &'static str, v: f64) -> Self {
        self.diagnostics.insert(key, v);
        self
    }
}

fn check_pair(rho: &DensityMatrix, a: &Operator) -> Result<()> {
    if rho.dim() != a.dim() {
        return Err(FisherError::DimensionMismatch { state: rho.dim(), operator: a.dim() });
    }
    a.check_hermitian()?;
    Ok(())
}

/// `1/2 tr(rho {A, B}) - tr(rho A) tr(rho B)`.
pub fn covariance(rho: &DensityMatrix, a: &Operator, b: &Operator) -> Result<f64> {
    check_pair(rho, a)?;
    check_pair(rho, b)?;
    Ok(covariance_unchecked(rho, a, b))
}

fn covariance_unchecked(rho: &DensityMatrix, a: &Operator, b: &Operator) -> f64 {
    let sym = if let Some(psi) = rho.state_vector() {
        (a.matrix() * psi).dotc(&(b.matrix() * psi)).re
    } else {
        trace_product(&(rho.matrix() * a.matrix()), b.matrix()).re
    };
    sym - rho.expectation(a) * rho.expectation(b)
}

pub fn variance(rho: &DensityMatrix, a: &Operator) -> Result<f64> {
    covariance(rho, a, a)
}

/// Spectral data of a state reused across many generators.
#[derive(Debug, Clone)]
pub struct QfiKernel {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<Complex64>,
    cutoff: f64,
    residual: f64,
}

impl QfiKernel {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let spec = eigh_matrix(rho.matrix())?;
        let eigenvalues: Vec<f64> = spec.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let cutoff = PAIR_CUTOFF * eigenvalues.first().copied().unwrap_or(0.0);
        Ok(Self { eigenvalues, vectors: spec.eigenvectors, cutoff, residual: spec.residual })
    }

    /// Generator expressed in the eigenbasis of the state.
    pub fn rotate(&self, a: &Operator) -> DMatrix<Complex64> {
        self.vectors.adjoint() * a.matrix() * &self.vectors
    }

    /// `2 sum (l_i - l_j)^2/(l_i + l_j) |B_ij|^2` for a generator already in
    /// the eigenbasis.
    pub fn evaluate_rotated(&self, b: &DMatrix<Complex64>) -> FisherResult {
        let n = self.eigenvalues.len();
        let mut value = 0.0;
        let mut dropped = 0usize;
        let mut dropped_weight = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (li, lj) = (self.eigenvalues[i], self.eigenvalues[j]);
                let s = li + lj;
                let w = b[(i, j)].norm_sqr();
                if s <= self.cutoff {
                    dropped += 1;
                    dropped_weight += 2.0 * s * w;
                    continue;
                }
                value += 2.0 * (li - lj).powi(2) / s * w;
            }
        }
        FisherResult::new(value, FisherMethod::Spectral)
            .with("discarded_pairs", dropped as f64)
            .with("discarded_weight", dropped_weight)
            .with("eigen_residual", self.residual)
    }

    pub fn evaluate(&self, a: &Operator) -> FisherResult {
        self.evaluate_rotated(&self.rotate(a))
    }
}

/// Quantum Fisher information of `rho` for the unitary family generated by `a`.
pub fn qfi(rho: &DensityMatrix, a: &Operator) -> Result<FisherResult> {
    check_pair(rho, a)?;
    let purity = rho.purity();
    if purity > PURE_THRESHOLD {
        let var = covariance_unchecked(rho, a, a);
        return Ok(FisherResult::new(4.0 * var, FisherMethod::PureVariance).with("purity", purity));
    }
    Ok(QfiKernel::new(rho)?.evaluate(a).with("purity", purity))
}

/// `F_2 = -2 tr([rho, A]^2) = 2 ||[rho, A]||_F^2`, a lower bound on the QFI.
pub fn sub_qfi_f2(rho: &DensityMatrix, a: &Operator) -> Result<FisherResult> {
    check_pair(rho, a)?;
    let comm = rho.matrix() * a.matrix() - a.matrix() * rho.matrix();
    let norm2: f64 = comm.iter().map(|z| z.norm_sqr()).sum();
    Ok(FisherResult::new(2.0 * norm2, FisherMethod::SubQfi))
}

/// Classical Fisher information of a translation family `p(x - theta)`
/// sampled on a uniform grid of step `h`.
pub fn classical_fi_grid(p: &[f64], h: f64) -> Result<FisherResult> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FisherError::InvalidInput(format!("grid step {h} must be positive")));
    }
    if p.len() < 3 {
        return Err(FisherError::InvalidInput("need at least 3 samples".into()));
    }
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(FisherError::InvalidSample { index, value });
    }
    let sum = p.iter().sum::<f64>() * h;
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(FisherError::Unnormalized { sum });
    }
    let n = p.len();
    let floor = DENSITY_FLOOR * p.iter().cloned().fold(0.0, f64::max);
    let mut value = 0.0;
    let mut excluded = 0usize;
    for i in 0..n {
        if p[i] < floor || p[i] == 0.0 {
            excluded += 1;
            continue;
        }
        let d = if i == 0 {
            (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) / (2.0 * h)
        } else {
            (p[i + 1] - p[i - 1]) / (2.0 * h)
        };
        value += d * d / p[i] * h;
    }
    Ok(FisherResult::new(value, FisherMethod::Classical).with("excluded_cells", excluded as f64))
}

/// Fisher information `R'^2 / (R (1 - R))` of a pass/fail trial.
pub fn binary_trial_fi(r: f64, dr: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FisherError::SingularTrial(r));
    }
    Ok(dr * dr / (r * (1.0 - r)))
}

/// Classical Fisher information of a projective measurement in the
/// orthonormal basis given by the columns of `basis`, for the family
/// `exp(-i theta A) rho exp(i theta A)` at `theta = 0`.
pub fn classical_fi_projective(rho: &DensityMatrix, a: &Operator, basis: &DMatrix<Complex64>) -> Result<FisherResult> {
    check_pair(rho, a)?;
    if basis.nrows() != rho.dim() {
        return Err(FisherError::DimensionMismatch { state: rho.dim(), operator: basis.nrows() });
    }
    let drho = (a.matrix() * rho.matrix() - rho.matrix() * a.matrix()) * Complex64::new(0.0, -1.0);
    let mut value = 0.0;
    let mut excluded = 0usize;
    for k in 0..basis.ncols() {
        let b = basis.column(k);
        let p = b.dotc(&(rho.matrix() * b)).re;
        let dp = b.dotc(&(&drho * b)).re;
        if p <= 1e-14 {
            excluded += 1;
            continue;
        }
        value += dp * dp / p;
    }
    Ok(FisherResult::new(value, FisherMethod::Classical).with("excluded_outcomes", excluded as f64))
}

/// Maximum of the QFI over quadratures `cos(t) x + sin(t) p`, `t` in `[0, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureOptimum {
    pub angle: f64,
    pub fisher: FisherResult,
    /// QFI at each scanned angle `k pi / angle_count`.
    pub scan: Vec<f64>,
}

/// Coarse scan over `angle_count` angles followed by golden-section
/// refinement around the best scanned angle.
pub fn qfi_max_quadrature(rho: &DensityMatrix, x: &Operator, p: &Operator, angle_count: usize) -> Result<QuadratureOptimum> {
    if angle_count < 8 {
        return Err(FisherError::InvalidInput(format!("angle_count {angle_count} < 8")));
    }
    check_pair(rho, x)?;
    check_pair(rho, p)?;
    let purity = rho.purity();
    let eval: Box<dyn Fn(f64) -> FisherResult + Sync> = if purity > PURE_THRESHOLD {
        let vxx = covariance_unchecked(rho, x, x);
        let vpp = covariance_unchecked(rho, p, p);
        let vxp = covariance_unchecked(rho, x, p);
        Box::new(move |t: f64| {
            let (s, c) = t.sin_cos();
            let var = c * c * vxx + s * s * vpp + 2.0 * s * c * vxp;
            FisherResult::new(4.0 * var, FisherMethod::PureVariance).with("purity", purity)
        })
    } else {
        let kernel = QfiKernel::new(rho)?;
        let bx = kernel.rotate(x);
        let bp = kernel.rotate(p);
        Box::new(move |t: f64| {
            let (s, c) = t.sin_cos();
            let b = &bx * Complex64::new(c, 0.0) + &bp * Complex64::new(s, 0.0);
            kernel.evaluate_rotated(&b).with("purity", purity)
        })
    };

    let step = PI / angle_count as f64;
    let scan: Vec<f64> = (0..angle_count).into_par_iter().map(|k| eval(k as f64 * step).value).collect();
    let best = scan.iter().enumerate().fold(0, |b, (k, &v)| if v > scan[b] { k } else { b });

    let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c1 = hi - g * (hi - lo);
    let mut c2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (eval(c1).value, eval(c2).value);
    while hi - lo > ANGLE_TOL {
        if f1 >= f2 {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - g * (hi - lo);
            f1 = eval(c1).value;
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + g * (hi - lo);
            f2 = eval(c2).value;
        }
    }
    let refined = 0.5 * (lo + hi);
    let mut fisher = eval(refined);
    let mut angle = refined;
    if fisher.value < scan[best] {
        angle = best as f64 * step;
        fisher = eval(angle);
    }
    Ok(QuadratureOptimum { angle: angle.rem_euclid(PI), fisher, scan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ghz_state, make_state, unit_quadratures, StateKind};
    use nalgebra::DVector;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::from_state_vector(DVector::from_vec(vec![c(1.0), c(1.0)])).unwrap()
    }

    #[test]
    fn plus_state_along_z() {
        let f = qfi(&plus(), &Operator::pauli_z()).unwrap();
        assert_eq!(f.method, FisherMethod::PureVariance);
        assert!((f.value - 4.0).abs() < 1e-12);
        assert!((sub_qfi_f2(&plus(), &Operator::pauli_z()).unwrap().value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_three_heisenberg_value() {
        let (rho, obs) = ghz_state(3, 0.5, 0.0).unwrap();
        assert!((qfi(&rho, obs.total()).unwrap().value - 36.0).abs() < 1e-10);
        let (rho0, obs0) = ghz_state(3, 0.0, 0.0).unwrap();
        assert!(qfi(&rho0, obs0.total()).unwrap().value.abs() < 1e-12);
        let (rho4, obs4) = ghz_state(4, 0.3, 1.1).unwrap();
        assert!((variance(&rho4, obs4.total()).unwrap() - 4.0 * 16.0 * 0.3 * 0.7).abs() < 1e-10);
        let l = obs.locals();
        assert!((covariance(&rho, &l[0], &l[1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_position_qfi_closed_form() {
        let rho = make_state(StateKind::Thermal(1.0), 60).unwrap();
        let x = unit_quadratures(60).unwrap().position;
        let f = qfi(&rho, &x).unwrap();
        assert_eq!(f.method, FisherMethod::Spectral);
        assert!((f.value - 2.0 / 3.0).abs() < 1e-9, "{}", f.value);
        assert!((variance(&rho, &x).unwrap() - 1.5).abs() < 1e-9);
        let f2 = sub_qfi_f2(&rho, &x).unwrap().value;
        assert!(f2 <= f.value + 1e-9 && f2 > 0.0);
    }

    #[test]
    fn vacuum_variance_and_mixed_qubit() {
        let rho = make_state(StateKind::Vacuum, 10).unwrap();
        let x = unit_quadratures(10).unwrap().position;
        assert!((variance(&rho, &x).unwrap() - 0.5).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(sub_qfi_f2(&mixed, &Operator::pauli_z()).unwrap().value, 0.0);
        assert_eq!(qfi(&mixed, &Operator::pauli_z()).unwrap().value, 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(matches!(qfi(&plus(), &Operator::identity(3)), Err(FisherError::DimensionMismatch { .. })));
    }

    fn gaussian_grid(sigma: f64, half: f64, h: f64) -> Vec<f64> {
        let n = (2.0 * half / h).round() as i64;
        (0..=n)
            .map(|i| {
                let x = -half + i as f64 * h;
                (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
            })
            .collect()
    }

    #[test]
    fn gaussian_classical_fi() {
        let f = classical_fi_grid(&gaussian_grid(1.0, 8.0, 1e-3), 1e-3).unwrap();
        assert!((f.value - 1.0).abs() < 1e-3);
        let f = classical_fi_grid(&gaussian_grid(2.0, 16.0, 1e-3), 1e-3).unwrap();
        assert!((f.value - 0.25).abs() < 1e-3);
        let uniform = vec![0.01; 100];
        assert!(classical_fi_grid(&uniform, 1.0).unwrap().value < 1e-20);
        assert!(matches!(classical_fi_grid(&uniform, 2.0), Err(FisherError::Unnormalized { .. })));
    }

    #[test]
    fn binary_trial() {
        assert_eq!(binary_trial_fi(0.5, 1.0).unwrap(), 4.0);
        assert_eq!(binary_trial_fi(0.3, 0.0).unwrap(), 0.0);
        assert!(binary_trial_fi(1.0, 0.2).is_err());
        // Sinusoidal pass probability g (1 + v sin ks) at ks = n pi.
        let (g, v, k) = (0.43, 0.25, 2.0 * PI / 266e-9);
        let f = binary_trial_fi(g, g * v * k).unwrap();
        assert!((f / (g / (1.0 - g) * (v * k).powi(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_is_isotropic() {
        let ops = unit_quadratures(12).unwrap();
        let rho = make_state(StateKind::Vacuum, 12).unwrap();
        let opt = qfi_max_quadrature(&rho, &ops.position, &ops.momentum, 16).unwrap();
        assert!((opt.fisher.value - 2.0).abs() < 1e-12);
        assert!(opt.scan.iter().all(|&f| (f - 2.0).abs() < 1e-12));
    }

    #[test]
    fn squeezed_maximum_along_momentum() {
        let r = 0.5 * 2.1f64.ln();
        let rho = make_state(StateKind::SqueezedVacuum(r), 60).unwrap();
        let ops = unit_quadratures(60).unwrap();
        let opt = qfi_max_quadrature(&rho, &ops.position, &ops.momentum, 16).unwrap();
        assert!((opt.fisher.value - 4.2).abs() < 1e-7);
        assert!((opt.angle - PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn cat_maximum_along_position() {
        let rho = make_state(StateKind::EvenCat(c(2.0)), 40).unwrap();
        let ops = unit_quadratures(40).unwrap();
        let opt = qfi_max_quadrature(&rho, &ops.position, &ops.momentum, 16).unwrap();
        let dist = opt.angle.min(PI - opt.angle);
        assert!(dist < 1e-3, "{}", opt.angle);
        assert!(opt.scan.iter().all(|&f| f <= opt.fisher.value));
    }

    #[test]
    fn mixed_state_quadrature_scan_matches_direct_qfi() {
        let rho = crate::quantum::mix(0.6, &make_state(StateKind::EvenCat(c(1.0)), 30).unwrap(), &make_state(StateKind::Thermal(0.3), 30).unwrap()).unwrap();
        let ops = unit_quadratures(30).unwrap();
        let opt = qfi_max_quadrature(&rho, &ops.position, &ops.momentum, 12).unwrap();
        let (s, cth) = opt.angle.sin_cos();
        let a = &ops.position.scaled(cth) + &ops.momentum.scaled(s);
        assert!((qfi(&rho, &a).unwrap().value - opt.fisher.value).abs() < 1e-10);
    }
}
