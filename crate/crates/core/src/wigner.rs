//! Wigner-function grids: file format, synthesis from a density matrix,
//! kernel-overlap reconstruction and the quadrature QFI of the result.
//!
//! Quadratures are dimensionless with vacuum variance 1/2, so the vacuum is
//! `W(x, p) = exp(-x^2 - p^2) / pi` and `tr(A B) = 2 pi int W_A W_B`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fisher::{self, FisherError, FisherResult};
use crate::quantum::{eigh_matrix, unit_quadratures, DensityMatrix, QuantumError};

pub const HEADER: &str = "wigner-grid v1";
pub const DEFAULT_DIM: usize = 40;
pub const MAX_RECONSTRUCTION_DIM: usize = 200;
/// Relative L2 mismatch above which a reconstruction is rejected.
pub const RESIDUAL_LIMIT: f64 = 0.05;
/// Clipped negative-eigenvalue mass above which a reconstruction is rejected.
pub const CLIPPED_LIMIT: f64 = 0.05;
/// Population weight missing from a reconstruction that triggers a larger dim.
pub const TAIL_TARGET: f64 = 1e-3;
/// Angles in the coarse quadrature scan.
pub const ANGLE_COUNT: usize = 36;

const NORMALIZATION_SLACK: f64 = 0.02;
const BOUND_SLACK: f64 = 0.05;
/// Margin beyond the state's classical turning point, in vacuum widths.
const COVERAGE_WIDTHS: f64 = 5.0;
const ROW_CHUNKS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WignerError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed header on line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("axis count mismatch: {reason}")]
    AxisCountMismatch { reason: String },
    #[error("invalid number {token:?} at row {row}, column {col}")]
    InvalidNumber { row: usize, col: usize, token: String },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("grid integrates to {0}, outside 1 +- {NORMALIZATION_SLACK}")]
    Normalization(f64),
    #[error("grid value {0} exceeds the Wigner bound 1/pi + {BOUND_SLACK}")]
    Bound(f64),
    #[error("axes reach |{available}| but the state needs |{required}|")]
    InsufficientCoverage { required: f64, available: f64 },
    #[error("unfaithful reconstruction: residual {residual:.4}, clipped mass {clipped:.4} at dim {dim}")]
    Unfaithful { residual: f64, clipped: f64, dim: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Fisher(#[from] FisherError),
}

pub type Result<T> = std::result::Result<T, WignerError>;

/// Uniform sampling `min, ..., max` with `count >= 2` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) || count < 2 {
            return Err(WignerError::InvalidInput(format!("axis ({min}, {max}, {count}) needs min < max and count >= 2")));
        }
        Ok(Self { min, max, count })
    }

    /// Symmetric axis `[-half, half]`.
    pub fn symmetric(half: f64, count: usize) -> Result<Self> {
        Self::new(-half, half, count)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    /// Trapezoid weight of sample `i`.
    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.count {
            0.5 * self.step()
        } else {
            self.step()
        }
    }

    fn reach(&self) -> f64 {
        self.min.abs().min(self.max.abs()) * if self.min < 0.0 && self.max > 0.0 { 1.0 } else { 0.0 }
    }
}

/// Wigner function sampled on a rectangle; row `i` holds momentum sample `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    x: Axis,
    p: Axis,
    values: Vec<f64>,
}

impl WignerGrid {
    /// Checks finiteness, normalization and the pointwise Wigner bound.
    pub fn new(x: Axis, p: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != x.count * p.count {
            return Err(WignerError::AxisCountMismatch {
                reason: format!("{} values for a {}x{} grid", values.len(), p.count, x.count),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(WignerError::NonFinite { row: i / x.count, col: i % x.count });
        }
        let grid = Self { x, p, values };
        let norm = grid.integral();
        if (norm - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(WignerError::Normalization(norm));
        }
        if let Some(&v) = grid.values.iter().find(|v| v.abs() > 1.0 / PI + BOUND_SLACK) {
            return Err(WignerError::Bound(v));
        }
        Ok(grid)
    }

    pub fn x_axis(&self) -> Axis {
        self.x
    }

    pub fn p_axis(&self) -> Axis {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.x.count + ix]
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        let mut s = 0.0;
        for ip in 0..self.p.count {
            for ix in 0..self.x.count {
                s += self.values[ip * self.x.count + ix] * self.x.weight(ix) * self.p.weight(ip);
            }
        }
        s
    }

    /// Bilinear interpolation (zero outside the grid).
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let fx = (x - self.x.min) / self.x.step();
        let fp = (p - self.p.min) / self.p.step();
        if fx < 0.0 || fp < 0.0 || fx > (self.x.count - 1) as f64 || fp > (self.p.count - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(self.x.count - 2);
        let ip = (fp.floor() as usize).min(self.p.count - 2);
        let (tx, tp) = (fx - ix as f64, fp - ip as f64);
        let a = self.value(ix, ip) * (1.0 - tx) + self.value(ix + 1, ip) * tx;
        let b = self.value(ix, ip + 1) * (1.0 - tx) + self.value(ix + 1, ip + 1) * tx;
        a * (1.0 - tp) + b * tp
    }

    /// Serializes in the `wigner-grid v1` text format with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "x {:.16e} {:.16e} {}", self.x.min, self.x.max, self.x.count);
        let _ = writeln!(out, "p {:.16e} {:.16e} {}", self.p.min, self.p.max, self.p.count);
        let _ = writeln!(out, "scale 1");
        for row in self.values.chunks(self.x.count) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next_header = |expect: &str| -> Result<(usize, Vec<String>)> {
            let (i, line) = lines.next().ok_or_else(|| WignerError::MalformedHeader {
                line: 0,
                reason: format!("file ends before the {expect} line"),
            })?;
            Ok((i + 1, line.split_whitespace().map(str::to_string).collect()))
        };
        let (n, first) = next_header("format")?;
        if first.join(" ") != HEADER {
            return Err(WignerError::MalformedHeader { line: n, reason: format!("expected {HEADER:?}") });
        }
        let mut axis = |name: &str| -> Result<Axis> {
            let (n, toks) = next_header(name)?;
            let bad = |reason: String| WignerError::MalformedHeader { line: n, reason };
            if toks.len() != 4 || toks[0] != name {
                return Err(bad(format!("expected `{name} <min> <max> <count>`")));
            }
            let min: f64 = toks[1].parse().map_err(|_| bad(format!("bad minimum {:?}", toks[1])))?;
            let max: f64 = toks[2].parse().map_err(|_| bad(format!("bad maximum {:?}", toks[2])))?;
            let count: usize = toks[3].parse().map_err(|_| bad(format!("bad count {:?}", toks[3])))?;
            Axis::new(min, max, count).map_err(|e| bad(e.to_string()))
        };
        let x = axis("x")?;
        let p = axis("p")?;
        let (n, toks) = next_header("scale")?;
        let scale: f64 = match toks.as_slice() {
            [k, v] if k == "scale" => v.parse().ok().filter(|s: &f64| s.is_finite() && *s > 0.0),
            _ => None,
        }
        .ok_or_else(|| WignerError::MalformedHeader { line: n, reason: "expected `scale <positive number>`".into() })?;

        let mut values = Vec::with_capacity(x.count * p.count);
        let mut row = 0usize;
        for (_, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if row == p.count {
                return Err(WignerError::AxisCountMismatch { reason: format!("more than {} value rows", p.count) });
            }
            if toks.len() != x.count {
                return Err(WignerError::AxisCountMismatch {
                    reason: format!("row {row} has {} values, expected {}", toks.len(), x.count),
                });
            }
            for (col, t) in toks.iter().enumerate() {
                let v: f64 = t.parse().map_err(|_| WignerError::InvalidNumber { row, col, token: t.to_string() })?;
                if !v.is_finite() {
                    return Err(WignerError::NonFinite { row, col });
                }
                values.push(v * scale);
            }
            row += 1;
        }
        if row != p.count {
            return Err(WignerError::AxisCountMismatch { reason: format!("{row} value rows, expected {}", p.count) });
        }
        Self::new(x, p, values)
    }
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<WignerGrid> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| WignerError::Io(format!("{}: {e}", path.as_ref().display())))?;
    WignerGrid::parse(&text)
}

pub fn save_grid(grid: &WignerGrid, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), grid.to_text()).map_err(|e| WignerError::Io(format!("{}: {e}", path.as_ref().display())))
}

/// Wigner functions of `|m><n|` for `m <= n < dim` at one phase-space point,
/// packed row by row (`m` outer). Uses the stable Laguerre recurrence on the
/// kernels themselves, so no factorials appear.
fn kernels_at(x: f64, p: f64, dim: usize, out: &mut [Complex64]) {
    let a = Complex64::new(x, p) / std::f64::consts::SQRT_2;
    let mut w: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); dim];
    w[0] = Complex64::new((-2.0 * a.norm_sqr()).exp() / PI, 0.0);
    for n in 1..dim {
        w[n] = 2.0 * a * w[n - 1] / (n as f64).sqrt();
    }
    let mut idx = 0;
    out[idx..idx + dim].copy_from_slice(&w);
    idx += dim;
    for m in 1..dim {
        let sm = (m as f64).sqrt();
        let mut temp = w[m];
        w[m] = (2.0 * a.conj() * temp - sm * w[m - 1]) / sm;
        for n in m + 1..dim {
            let next = (2.0 * a * w[n - 1] - sm * temp) / (n as f64).sqrt();
            temp = w[n];
            w[n] = next;
        }
        out[idx..idx + dim - m].copy_from_slice(&w[m..]);
        idx += dim - m;
    }
}

fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// `W(x, p)` of a state from its Fock matrix elements.
fn wigner_value(rho: &DMatrix<Complex64>, kernels: &[Complex64]) -> f64 {
    let dim = rho.nrows();
    let mut idx = 0;
    let mut w = 0.0;
    for m in 0..dim {
        w += (rho[(m, m)] * kernels[idx]).re;
        for n in m + 1..dim {
            w += 2.0 * (rho[(m, n)] * kernels[idx + n - m]).re;
        }
        idx += dim - m;
    }
    w
}

fn synthesize(rho: &DMatrix<Complex64>, x: Axis, p: Axis) -> Vec<f64> {
    let dim = rho.nrows();
    let rows: Vec<Vec<f64>> = (0..p.count)
        .into_par_iter()
        .map(|ip| {
            let mut k = vec![Complex64::new(0.0, 0.0); packed_len(dim)];
            (0..x.count)
                .map(|ix| {
                    kernels_at(x.value(ix), p.value(ip), dim, &mut k);
                    wigner_value(rho, &k)
                })
                .collect()
        })
        .collect();
    rows.concat()
}

/// Phase-space radius that holds the state: turning point of the highest
/// Fock level carrying more than 1e-6 of the population.
fn support_radius(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    let mut tail = 0.0;
    let mut top = 0;
    for n in (0..dim).rev() {
        tail += rho.population(n).max(0.0);
        if tail > 1e-6 {
            top = n;
            break;
        }
    }
    (2.0 * top as f64 + 1.0).sqrt()
}

/// Samples the Wigner function of `rho` on the given axes.
pub fn synth_grid(rho: &DensityMatrix, x: Axis, p: Axis) -> Result<WignerGrid> {
    let required = support_radius(rho) + COVERAGE_WIDTHS * std::f64::consts::FRAC_1_SQRT_2;
    let available = x.reach().min(p.reach());
    if available < required {
        return Err(WignerError::InsufficientCoverage { required, available });
    }
    WignerGrid::new(x, p, synthesize(rho.matrix(), x, p))
}

/// Outcome of a kernel-overlap reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub state: DensityMatrix,
    pub dim: usize,
    /// Magnitude of the negative eigenvalues removed.
    pub clipped_mass: f64,
    /// `||W(rho) - W_grid||_2 / ||W_grid||_2` over the grid.
    pub residual: f64,
    /// Grid weight not captured by the first `dim` Fock levels.
    pub tail: f64,
    /// Trace-normalized matrix before clipping.
    pub raw: DMatrix<Complex64>,
}

fn overlap_matrix(grid: &WignerGrid, dim: usize) -> DMatrix<Complex64> {
    let (x, p) = (grid.x, grid.p);
    let len = packed_len(dim);
    let chunk = p.count.div_ceil(ROW_CHUNKS);
    // Fixed chunking keeps the summation order independent of thread count.
    let partials: Vec<Vec<Complex64>> = (0..p.count.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let mut k = vec![Complex64::new(0.0, 0.0); len];
            for ip in c * chunk..((c + 1) * chunk).min(p.count) {
                for ix in 0..x.count {
                    let w = grid.value(ix, ip) * x.weight(ix) * p.weight(ip);
                    if w == 0.0 {
                        continue;
                    }
                    kernels_at(x.value(ix), p.value(ip), dim, &mut k);
                    for (a, kv) in acc.iter_mut().zip(&k) {
                        *a += kv.conj() * w;
                    }
                }
            }
            acc
        })
        .collect();
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    for part in &partials {
        for (s, v) in sum.iter_mut().zip(part) {
            *s += v;
        }
    }
    let mut m = DMatrix::zeros(dim, dim);
    let mut idx = 0;
    for i in 0..dim {
        for j in i..dim {
            let v = sum[idx + j - i] * (2.0 * PI);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        idx += dim - i;
    }
    m
}

fn l2_residual(grid: &WignerGrid, rho: &DMatrix<Complex64>) -> f64 {
    let model = synthesize(rho, grid.x, grid.p);
    let (mut num, mut den) = (0.0, 0.0);
    for ip in 0..grid.p.count {
        for ix in 0..grid.x.count {
            let w = grid.x.weight(ix) * grid.p.weight(ip);
            let v = grid.value(ix, ip);
            num += (model[ip * grid.x.count + ix] - v).powi(2) * w;
            den += v * v * w;
        }
    }
    (num / den).sqrt()
}

/// Reconstructs a `dim`-level density matrix from a grid by overlap with the
/// Fock-basis Wigner kernels, clipping negative eigenvalues.
pub fn reconstruct(grid: &WignerGrid, dim: usize) -> Result<ReconstructionReport> {
    if !(2..=MAX_RECONSTRUCTION_DIM).contains(&dim) {
        return Err(WignerError::InvalidInput(format!("dim {dim} outside 2..={MAX_RECONSTRUCTION_DIM}")));
    }
    let overlap = overlap_matrix(grid, dim);
    let raw_trace = overlap.trace().re;
    if !(raw_trace > 0.0) {
        return Err(WignerError::Unfaithful { residual: f64::INFINITY, clipped: 0.0, dim });
    }
    let tail = (grid.integral() - raw_trace).max(0.0);
    let raw = overlap / Complex64::new(raw_trace, 0.0);
    let spec = eigh_matrix(&raw)?;
    let clipped_mass: f64 = spec.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let kept: f64 = spec.eigenvalues.iter().filter(|&&l| l > 0.0).sum();
    let vals = DVector::from_iterator(dim, spec.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0) / kept, 0.0)));
    let clipped = &spec.eigenvectors * DMatrix::from_diagonal(&vals) * spec.eigenvectors.adjoint();
    let state = DensityMatrix::new(clipped)?;
    let residual = l2_residual(grid, state.matrix());
    if residual > RESIDUAL_LIMIT || clipped_mass >= CLIPPED_LIMIT {
        return Err(WignerError::Unfaithful { residual, clipped: clipped_mass, dim });
    }
    Ok(ReconstructionReport { state, dim, clipped_mass, residual, tail, raw })
}

/// Dimensionless quadrature QFI recovered from a grid.
#[derive(Debug, Clone)]
pub struct GridFisher {
    /// Quadrature angle maximizing the QFI, radians from the position axis.
    pub angle: f64,
    /// Maximum QFI in the vacuum-equals-2 convention.
    pub fisher: FisherResult,
    pub reconstruction: ReconstructionReport,
}

/// Reconstructs (raising `dim` from 40 until the tail is below 1e-3 when no
/// dimension is given) and maximizes the QFI over quadrature angles.
pub fn qfi_from_grid(grid: &WignerGrid, dim: Option<usize>) -> Result<GridFisher> {
    let reconstruction = match dim {
        Some(d) => reconstruct(grid, d)?,
        None => {
            let mut d = DEFAULT_DIM;
            loop {
                let r = reconstruct(grid, d)?;
                if r.tail < TAIL_TARGET || d == MAX_RECONSTRUCTION_DIM {
                    break r;
                }
                d = (d + d / 2).min(MAX_RECONSTRUCTION_DIM);
            }
        }
    };
    let ops = unit_quadratures(reconstruction.dim)?;
    let opt = fisher::qfi_max_quadrature(&reconstruction.state, &ops.position, &ops.momentum, ANGLE_COUNT)?;
    Ok(GridFisher { angle: opt.angle, fisher: opt.fisher, reconstruction })
}

/// `(1/pi) sum_n (-1)^n rho_nn`, the Wigner function at the origin.
pub fn parity_value(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * rho.population(n)).sum::<f64>() / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity, make_state, StateKind};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn axes(half: f64, count: usize) -> (Axis, Axis) {
        (Axis::symmetric(half, count).unwrap(), Axis::symmetric(half, count).unwrap())
    }

    #[test]
    fn vacuum_peak_and_normalization() {
        let (x, p) = axes(5.0, 101);
        let g = synth_grid(&make_state(StateKind::Vacuum, 10).unwrap(), x, p).unwrap();
        assert!((g.value(50, 50) - 1.0 / PI).abs() < 1e-14);
        assert!((g.integral() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn single_photon_is_negative_at_origin() {
        let (x, p) = axes(6.0, 101);
        let rho = make_state(StateKind::Number(1), 10).unwrap();
        let g = synth_grid(&rho, x, p).unwrap();
        assert!((g.value(50, 50) + 1.0 / PI).abs() < 1e-14);
        assert!((parity_value(&rho) + 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_sits_at_its_amplitude() {
        let alpha = Complex64::new(1.2, -0.7);
        let (x, p) = axes(9.0, 181);
        let g = synth_grid(&make_state(StateKind::Coherent(alpha), 40).unwrap(), x, p).unwrap();
        let (mut mx, mut mp) = (0.0, 0.0);
        for ip in 0..181 {
            for ix in 0..181 {
                let w = g.value(ix, ip) * x.weight(ix) * p.weight(ip);
                mx += w * x.value(ix);
                mp += w * p.value(ip);
            }
        }
        assert!((mx - 2f64.sqrt() * alpha.re).abs() < 1e-6, "{mx}");
        assert!((mp - 2f64.sqrt() * alpha.im).abs() < 1e-6, "{mp}");
        let r = reconstruct(&g, 30).unwrap();
        let a = unit_quadratures(30).unwrap().annihilation;
        let mean = crate::quantum::trace_product(r.state.matrix(), a.matrix());
        assert!((mean - alpha).norm() < 1e-3, "{mean}");
    }

    #[test]
    fn cat_fringes_along_momentum() {
        let alpha = 2.0;
        let (x, p) = axes(10.0, 401);
        let g = synth_grid(&make_state(StateKind::EvenCat(c(alpha)), 40).unwrap(), x, p).unwrap();
        // At x = 0 only the interference term survives: exp(-p^2) cos(2 sqrt(2) alpha p) / pi.
        let period = PI / (2f64.sqrt() * alpha);
        let ix0 = 200;
        let w0 = g.interpolate(x.value(ix0), 0.0);
        let w1 = g.interpolate(x.value(ix0), period);
        let mid = g.interpolate(x.value(ix0), period / 2.0);
        assert!(w0 > 0.0 && (w1 / w0 - (-period * period).exp()).abs() < 5e-3 && mid < 0.0, "{w0} {w1} {mid}");
    }

    #[test]
    fn coverage_is_enforced() {
        let (x, p) = axes(3.0, 61);
        let err = synth_grid(&make_state(StateKind::Vacuum, 5).unwrap(), x, p).unwrap_err();
        assert!(matches!(err, WignerError::InsufficientCoverage { .. }));
    }

    #[test]
    fn vacuum_reconstruction() {
        let (x, p) = axes(5.0, 101);
        let g = synth_grid(&make_state(StateKind::Vacuum, 10).unwrap(), x, p).unwrap();
        let r = reconstruct(&g, DEFAULT_DIM).unwrap();
        assert!((r.state.population(0) - 1.0).abs() < 1e-3);
        let f = qfi_from_grid(&g, None).unwrap();
        assert!((f.fisher.value - 2.0).abs() < 0.05);
    }

    #[test]
    fn thermal_reconstruction_is_geometric() {
        let (x, p) = axes(10.0, 161);
        let rho = make_state(StateKind::Thermal(1.0), 40).unwrap();
        let g = synth_grid(&rho, x, p).unwrap();
        let r = reconstruct(&g, 40).unwrap();
        for n in 0..20 {
            assert!((r.state.population(n) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-2);
        }
        assert!((g.value(80, 80) - parity_value(&r.state)).abs() < 2e-2);
    }

    #[test]
    fn cat_reconstruction_fidelity() {
        let (x, p) = axes(10.0, 201);
        let cat = make_state(StateKind::EvenCat(c(2.0)), 40).unwrap();
        let g = synth_grid(&cat, x, p).unwrap();
        let r = reconstruct(&g, 40).unwrap();
        assert!(fidelity(&cat, &r.state).unwrap() >= 0.995);
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert!(matches!(WignerGrid::parse("wigner-grid v1\nx -1 1 3\n"), Err(WignerError::MalformedHeader { .. })));
        assert!(matches!(WignerGrid::parse("wigner-grid v2\n"), Err(WignerError::MalformedHeader { line: 1, .. })));
        let base = "wigner-grid v1\nx -1 1 2\np -1 1 2\nscale 1\n";
        assert!(matches!(WignerGrid::parse(&format!("{base}0.25 0.25\n0.25\n")), Err(WignerError::AxisCountMismatch { .. })));
        assert!(matches!(WignerGrid::parse(&format!("{base}0.25 0.25\n")), Err(WignerError::AxisCountMismatch { .. })));
        assert!(matches!(WignerGrid::parse(&format!("{base}0.25 NaN\n0.25 0.25\n")), Err(WignerError::NonFinite { row: 0, col: 1 })));
        assert!(matches!(WignerGrid::parse(&format!("{base}0.25 x\n0.25 0.25\n")), Err(WignerError::InvalidNumber { .. })));
        // A 2x2 grid over [-1,1]^2 with value 1/4 integrates to 1.
        assert!(WignerGrid::parse(&format!("{base}0.25 0.25\n0.25 0.25\n")).is_ok());
        assert!(matches!(WignerGrid::parse(&format!("{base}0.3 0.3\n0.3 0.3\n")), Err(WignerError::Normalization(_))));
    }

    #[test]
    fn scale_applies_at_load() {
        let text = "wigner-grid v1\nx -1 1 2\np -1 1 2\nscale 0.5\n0.5 0.5\n0.5 0.5\n";
        let g = WignerGrid::parse(text).unwrap();
        assert_eq!(g.values(), &[0.25; 4]);
        assert_eq!(WignerGrid::parse(&g.to_text()).unwrap(), g);
    }
}
