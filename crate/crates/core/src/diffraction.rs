//! Talbot-Lau matter-wave interferometry: fringe fitting, the binary-trial
//! Fisher bound on the final-grating scan, the time-of-flight QFI bound,
//! coherence length and the centre-of-mass spread from the slit geometry.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::fisher::{self, FisherError};
use crate::measures::{self, MeasureError, SizeReport, SizeUnit};

pub const SCAN_HEADER: &str = "fringe-scan v1";
/// RMS residual above which a scan is not treated as a sinusoid.
pub const NON_SINUSOIDAL_RMS: f64 = 0.2;
pub const MIN_SCAN_POINTS: usize = 8;
const MEAN_SLACK: f64 = 0.05;
/// Periodogram oversampling relative to the natural resolution `2 pi / span`.
const OVERSAMPLE: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffractionError {
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("open fraction {0} must lie strictly between 0 and 1")]
    SingularOpenFraction(f64),
    #[error("fringe scan mean {mean} is not 1 +- {MEAN_SLACK}")]
    Unnormalized { mean: f64 },
    #[error("fringe scan has {count} points, need at least {MIN_SCAN_POINTS}")]
    TooFewPoints { count: usize },
    #[error("fringe scan spans {periods:.3} periods, need at least 1")]
    ShortSpan { periods: f64 },
    #[error("non-sinusoidal scan: rms residual {rms:.4} exceeds {NON_SINUSOIDAL_RMS}")]
    NonSinusoidal { rms: f64 },
    #[error("malformed fringe scan on line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Fisher(#[from] FisherError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

pub type Result<T> = std::result::Result<T, DiffractionError>;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(DiffractionError::InvalidSetup(format!("{name} = {v} must be positive")))
    }
}

fn open_fraction(g: f64) -> Result<f64> {
    if g > 0.0 && g < 1.0 {
        Ok(g)
    } else {
        Err(DiffractionError::SingularOpenFraction(g))
    }
}

/// Three-grating interferometer with a single effective molecular speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotLauSetup {
    /// Molecular mass, kg.
    pub mass: f64,
    pub atoms: f64,
    /// Grating period, m.
    pub period: f64,
    pub open_fraction: f64,
    pub visibility: f64,
    /// Flight time between the diffraction and final gratings, s.
    pub flight_time: f64,
    /// Source to first grating, m.
    pub source_distance: f64,
    /// First to second grating, m.
    pub grating_distance: f64,
}

impl TalbotLauSetup {
    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("atom count", self.atoms)?;
        positive("grating period", self.period)?;
        positive("flight time", self.flight_time)?;
        positive("source distance", self.source_distance)?;
        positive("grating distance", self.grating_distance)?;
        open_fraction(self.open_fraction)?;
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(DiffractionError::InvalidSetup(format!("visibility {} outside [0, 1]", self.visibility)));
        }
        Ok(())
    }

    /// Flight time from a path length and mean speed.
    pub fn flight_time_from(distance: f64, speed: f64) -> Result<f64> {
        Ok(positive("flight distance", distance)? / positive("speed", speed)?)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn with_source_distance(mut self, l0: f64) -> Self {
        self.source_distance = l0;
        self
    }
}

/// Normalized counts `n(s)` against final-grating displacement `s` (m).
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    positions: Vec<f64>,
    counts: Vec<f64>,
}

impl FringeScan {
    /// Counts must already average to one.
    pub fn new(positions: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if positions.len() != counts.len() {
            return Err(DiffractionError::InvalidSetup(format!(
                "{} positions but {} counts",
                positions.len(),
                counts.len()
            )));
        }
        if positions.is_empty() {
            return Err(DiffractionError::TooFewPoints { count: 0 });
        }
        if let Some(v) = positions.iter().chain(&counts).find(|v| !v.is_finite()) {
            return Err(DiffractionError::InvalidSetup(format!("non-finite scan entry {v}")));
        }
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        if (mean - 1.0).abs() > MEAN_SLACK {
            return Err(DiffractionError::Unnormalized { mean });
        }
        Ok(Self { positions, counts })
    }

    /// Divides raw counts by their mean.
    pub fn normalized(positions: Vec<f64>, raw: Vec<f64>) -> Result<Self> {
        let mean = raw.iter().sum::<f64>() / raw.len().max(1) as f64;
        if !(mean > 0.0) {
            return Err(DiffractionError::Unnormalized { mean });
        }
        Self::new(positions, raw.into_iter().map(|c| c / mean).collect())
    }

    /// Noise-free samples of `1 + v sin(k s + phase)` on `points` positions over `[0, span]`.
    pub fn sinusoid(v: f64, k: f64, phase: f64, span: f64, points: usize) -> Result<Self> {
        let s: Vec<f64> = (0..points).map(|i| span * i as f64 / (points - 1).max(1) as f64).collect();
        let n: Vec<f64> = s.iter().map(|&x| 1.0 + v * (k * x + phase).sin()).collect();
        Self::new(s, n)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{SCAN_HEADER}\n");
        for (s, n) in self.positions.iter().zip(&self.counts) {
            let _ = writeln!(out, "{s:.16e} {n:.16e}");
        }
        out
    }

    /// Parses the text format; counts are normalized to unit mean.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == SCAN_HEADER => {}
            _ => return Err(DiffractionError::Malformed { line: 1, reason: format!("expected {SCAN_HEADER:?}") }),
        }
        let (mut s, mut n) = (Vec::new(), Vec::new());
        for (i, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let bad = |reason: String| DiffractionError::Malformed { line: i + 1, reason };
            if toks.len() != 2 {
                return Err(bad(format!("expected `s n`, found {} fields", toks.len())));
            }
            let a: f64 = toks[0].parse().map_err(|_| bad(format!("bad position {:?}", toks[0])))?;
            let b: f64 = toks[1].parse().map_err(|_| bad(format!("bad count {:?}", toks[1])))?;
            s.push(a);
            n.push(b);
        }
        Self::normalized(s, n)
    }
}

pub fn load_scan(path: impl AsRef<Path>) -> Result<FringeScan> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| DiffractionError::Io(format!("{}: {e}", path.as_ref().display())))?;
    FringeScan::parse(&text)
}

/// Least-squares fit of `1 + v sin(k s + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub visibility: f64,
    pub wavenumber: f64,
    pub phase: f64,
    pub rms: f64,
}

/// Solves for `(a, b)` in `n - 1 = a sin(ks) + b cos(ks)` at fixed `k`; returns
/// the coefficients and the residual sum of squares.
fn linear_fit(s: &[f64], y: &[f64], k: f64) -> (f64, f64, f64) {
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &v) in s.iter().zip(y) {
        let (sn, cs) = (k * x).sin_cos();
        ss += sn * sn;
        sc += sn * cs;
        cc += cs * cs;
        ys += v * sn;
        yc += v * cs;
    }
    let det = ss * cc - sc * sc;
    let (a, b) = if det.abs() > 1e-14 * (ss * cc).max(f64::MIN_POSITIVE) {
        ((ys * cc - yc * sc) / det, (yc * ss - ys * sc) / det)
    } else {
        (0.0, 0.0)
    };
    (a, b, rss(s, y, a, b, k))
}

fn rss(s: &[f64], y: &[f64], a: f64, b: f64, k: f64) -> f64 {
    s.iter()
        .zip(y)
        .map(|(&x, &v)| {
            let (sn, cs) = (k * x).sin_cos();
            (v - a * sn - b * cs).powi(2)
        })
        .sum()
}

/// Gauss-Newton on `(a, b, k)` with step halving.
fn refine(s: &[f64], y: &[f64], mut a: f64, mut b: f64, mut k: f64) -> (f64, f64, f64) {
    let mut cost = rss(s, y, a, b, k);
    for _ in 0..200 {
        // Normal equations J^T J d = J^T r.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&x, &v) in s.iter().zip(y) {
            let (sn, cs) = (k * x).sin_cos();
            let r = v - a * sn - b * cs;
            let j = [sn, cs, x * (a * cs - b * sn)];
            for p in 0..3 {
                jtr[p] += j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let Some(d) = solve3(jtj, jtr) else { break };
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-9 {
            let (na, nb, nk) = (a + step * d[0], b + step * d[1], k + step * d[2]);
            let c = rss(s, y, na, nb, nk);
            if c <= cost {
                (a, b, k, cost) = (na, nb, nk, c);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        let size = (step * d[0]).abs().max((step * d[1]).abs()).max((step * d[2]).abs());
        if !accepted || size < 1e-14 {
            break;
        }
    }
    (a, b, k)
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let rhs = nalgebra::Vector3::from_column_slice(&r);
    mat.lu().solve(&rhs).map(|v| [v[0], v[1], v[2]]).filter(|v| v.iter().all(|x| x.is_finite()))
}

/// Fits visibility, wavenumber and phase. The wavenumber is seeded from the
/// strongest periodogram peak between one period per scan and Nyquist.
pub fn fit_fringe(scan: &FringeScan) -> Result<FringeFit> {
    let n = scan.len();
    if n < MIN_SCAN_POINTS {
        return Err(DiffractionError::TooFewPoints { count: n });
    }
    let s = scan.positions();
    let y: Vec<f64> = scan.counts().iter().map(|c| c - 1.0).collect();
    let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(DiffractionError::ShortSpan { periods: 0.0 });
    }
    // Fit in u = (s - lo) / span so every parameter is of order one.
    let u: Vec<f64> = s.iter().map(|x| (x - lo) / span).collect();
    let k_min = 2.0 * PI;
    let k_max = PI * (n - 1) as f64;
    let dk = k_min / OVERSAMPLE;
    let steps = ((k_max - k_min) / dk).ceil() as usize;
    let mut best = (k_min, f64::INFINITY);
    for i in 0..=steps {
        let k = k_min + i as f64 * dk;
        let (_, _, r) = linear_fit(&u, &y, k);
        if r < best.1 {
            best = (k, r);
        }
    }
    let (a0, b0, _) = linear_fit(&u, &y, best.0);
    let (a, b, kappa) = if a0 == 0.0 && b0 == 0.0 { (0.0, 0.0, best.0) } else { refine(&u, &y, a0, b0, best.0) };
    let (a, b, kappa) = if kappa < 0.0 { (-a, b, -kappa) } else { (a, b, kappa) };
    let periods = kappa / (2.0 * PI);
    if periods < 1.0 - 1e-9 {
        return Err(DiffractionError::ShortSpan { periods });
    }
    let rms = (rss(&u, &y, a, b, kappa) / n as f64).sqrt();
    if rms > NON_SINUSOIDAL_RMS {
        return Err(DiffractionError::NonSinusoidal { rms });
    }
    let k = kappa / span;
    let phase = (b.atan2(a) - k * lo).rem_euclid(2.0 * PI);
    let phase = if phase > PI { phase - 2.0 * PI } else { phase };
    Ok(FringeFit { visibility: a.hypot(b).min(1.0), wavenumber: k, phase, rms })
}

/// Spread of fitted visibilities over noisy synthetic scans.
#[derive(Debug, Clone, PartialEq)]
pub struct FitCalibration {
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    pub max_abs_error: f64,
}

/// Refits `seeds` noisy realizations of a sinusoidal scan. Seed `i` draws from
/// ChaCha stream `i` of `base_seed`, so results do not depend on scheduling.
pub fn calibrate_fit(
    visibility: f64,
    wavenumber: f64,
    span: f64,
    points: usize,
    noise: f64,
    seeds: usize,
    base_seed: u64,
) -> Result<FitCalibration> {
    let clean = FringeScan::sinusoid(visibility, wavenumber, 0.0, span, points)?;
    let normal =
        Normal::new(0.0, noise).map_err(|e| DiffractionError::InvalidSetup(format!("noise level {noise}: {e}")))?;
    let estimates = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
            rng.set_stream(i as u64);
            let raw: Vec<f64> = clean.counts().iter().map(|c| c + normal.sample(&mut rng)).collect();
            let scan = FringeScan::normalized(clean.positions().to_vec(), raw)?;
            fit_fringe(&scan).map(|f| f.visibility)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = estimates.len().max(1) as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let std_dev = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / m).sqrt();
    let max_abs_error = estimates.iter().map(|e| (e - visibility).abs()).fold(0.0, f64::max);
    Ok(FitCalibration { estimates, mean, std_dev, max_abs_error })
}

/// Classical FI (m^-2) of the open/blocked outcome at the lattice points
/// `k s = n pi`: `g v^2 k^2 / (1 - g)`.
pub fn fi_bound(open: f64, visibility: f64, wavenumber: f64) -> Result<f64> {
    let g = open_fraction(open)?;
    Ok(g * (visibility * wavenumber).powi(2) / (1.0 - g))
}

/// The same binary-trial FI at an arbitrary displacement `s`, with
/// `R(s) = g (1 + v sin ks)`.
pub fn fi_at_displacement(open: f64, visibility: f64, wavenumber: f64, s: f64) -> Result<f64> {
    let g = open_fraction(open)?;
    let (sn, cs) = (wavenumber * s).sin_cos();
    let r = g * (1.0 + visibility * sn);
    let dr = g * visibility * wavenumber * cs;
    Ok(fisher::binary_trial_fi(r, dr)?)
}

/// `(hbar t)^2 F_cl`, in kg^2 m^2.
pub fn qfi_bound(fi_cl: f64, flight_time: f64) -> f64 {
    (measures::constants().hbar * flight_time).powi(2) * fi_cl
}

/// QFI bound from a sampled detection density `p(x)` on spacing `h` (m).
pub fn qfi_bound_from_density(p: &[f64], h: f64, flight_time: f64) -> Result<f64> {
    Ok(qfi_bound(fisher::classical_fi_grid(p, h)?.value, flight_time))
}

/// `sqrt(F) / (2 M)`, m.
pub fn coherence_length(fisher: f64, mass: f64) -> Result<f64> {
    positive("mass", mass)?;
    if !(fisher >= 0.0) {
        return Err(DiffractionError::InvalidSetup(format!("Fisher information {fisher} must be >= 0")));
    }
    Ok(fisher.sqrt() / (2.0 * mass))
}

/// Centre-of-mass spread behind a single slit and at the second grating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmSpread {
    pub slit_width: f64,
    pub at_first: f64,
    pub at_second: f64,
}

pub fn cm_spread(setup: &TalbotLauSetup) -> Result<CmSpread> {
    setup.validate()?;
    let slit_width = setup.open_fraction * setup.period;
    let at_first = slit_width / 3f64.sqrt();
    let at_second = at_first * (1.0 + setup.grating_distance / setup.source_distance);
    Ok(CmSpread { slit_width, at_first, at_second })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionReport {
    pub fit: Option<FringeFit>,
    pub visibility: f64,
    pub wavenumber: f64,
    /// Classical FI per unit displacement squared, m^-2.
    pub fi_cl: f64,
    /// Lower bound on the position QFI, kg^2 m^2.
    pub fisher: f64,
    pub coherence_length: f64,
    pub spread: CmSpread,
    pub sizes: SizeReport,
}

/// Chains the fringe bound through to `N_ext` and `N (chi / dX_cm)^2`. With a
/// scan, its fitted visibility and wavenumber replace the setup values.
pub fn diffraction_sizes(setup: &TalbotLauSetup, scan: Option<&FringeScan>) -> Result<DiffractionReport> {
    setup.validate()?;
    let fit = scan.map(fit_fringe).transpose()?;
    let (visibility, wavenumber) = match fit {
        Some(f) => (f.visibility, f.wavenumber),
        None => (setup.visibility, setup.wavenumber()),
    };
    let fi_cl = fi_bound(setup.open_fraction, visibility, wavenumber)?;
    let fisher = qfi_bound(fi_cl, setup.flight_time);
    let chi = coherence_length(fisher, setup.mass)?;
    let spread = cm_spread(setup)?;
    let c = measures::constants();
    let n_ext = measures::extensive_size(fisher, c.q0())?;
    let n_ent = setup.atoms * (chi / spread.at_second).powi(2);
    let sizes = SizeReport::new(n_ext, n_ent, SizeUnit::Q0)
        .with_input("visibility", visibility)
        .with_input("wavenumber_per_m", wavenumber)
        .with_input("coherence_length_m", chi)
        .with_input("cm_spread_m", spread.at_second);
    Ok(DiffractionReport { fit, visibility, wavenumber, fi_cl, fisher, coherence_length: chi, spread, sizes })
}

/// `N_ent` at both ends of a source-distance interval (the value falls as the
/// spread grows, i.e. rises with `L0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledRange {
    pub source_distance: (f64, f64),
    pub n_ent: (f64, f64),
}

pub fn n_ent_over_source_distance(
    setup: &TalbotLauSetup,
    scan: Option<&FringeScan>,
    l0_min: f64,
    l0_max: f64,
) -> Result<EntangledRange> {
    if !(l0_min > 0.0 && l0_max >= l0_min) {
        return Err(DiffractionError::InvalidSetup(format!("source distance range [{l0_min}, {l0_max}]")));
    }
    let lo = diffraction_sizes(&setup.with_source_distance(l0_min), scan)?.sizes.n_ent;
    let hi = diffraction_sizes(&setup.with_source_distance(l0_max), scan)?.sizes.n_ent;
    Ok(EntangledRange { source_distance: (l0_min, l0_max), n_ent: (lo, hi) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{hermite_functions, make_state, unit_quadratures, DensityMatrix, StateKind};
    use num_complex::Complex64;

    const LAMBDA: f64 = 266e-9;

    fn k() -> f64 {
        2.0 * PI / LAMBDA
    }

    #[test]
    fn exact_sinusoid_is_recovered() {
        let scan = FringeScan::sinusoid(0.25, k(), 0.7, 3.0 * LAMBDA, 50).unwrap();
        let fit = fit_fringe(&scan).unwrap();
        assert!((fit.visibility - 0.25).abs() < 1e-6, "{fit:?}");
        assert!((fit.wavenumber / k() - 1.0).abs() < 1e-6);
        assert!((fit.phase - 0.7).abs() < 1e-6);
        assert!(fit.rms < 1e-9);
    }

    #[test]
    fn flat_scan_has_no_visibility() {
        let scan = FringeScan::sinusoid(0.0, k(), 0.0, 3.0 * LAMBDA, 50).unwrap();
        assert_eq!(fit_fringe(&scan).unwrap().visibility, 0.0);
    }

    #[test]
    fn noisy_scans_stay_within_a_percent() {
        let cal = calibrate_fit(0.25, k(), 3.0 * LAMBDA, 50, 0.01, 100, 7).unwrap();
        assert_eq!(cal.estimates.len(), 100);
        assert!(cal.max_abs_error <= 0.01, "{cal:?}");
        let again = calibrate_fit(0.25, k(), 3.0 * LAMBDA, 50, 0.01, 100, 7).unwrap();
        assert_eq!(cal, again);
    }

    #[test]
    fn scan_rejections() {
        let square: Vec<f64> = (0..40).map(|i| if (i / 5) % 2 == 0 { 1.9 } else { 0.1 }).collect();
        let s: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let scan = FringeScan::new(s.clone(), square).unwrap();
        assert!(matches!(fit_fringe(&scan), Err(DiffractionError::NonSinusoidal { .. })));
        let few = FringeScan::new(s[..5].to_vec(), vec![1.0; 5]).unwrap();
        assert!(matches!(fit_fringe(&few), Err(DiffractionError::TooFewPoints { count: 5 })));
        assert!(matches!(FringeScan::new(s, vec![2.0; 40]), Err(DiffractionError::Unnormalized { .. })));
    }

    #[test]
    fn scan_text_round_trip() {
        let scan = FringeScan::sinusoid(0.3, k(), 0.2, 2.0 * LAMBDA, 20).unwrap();
        let back = FringeScan::parse(&scan.to_text()).unwrap();
        let expected = FringeScan::normalized(scan.positions().to_vec(), scan.counts().to_vec()).unwrap();
        assert_eq!(back.positions(), scan.positions());
        for (a, b) in back.counts().iter().zip(expected.counts()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(FringeScan::parse("fringe-scan v2\n"), Err(DiffractionError::Malformed { line: 1, .. })));
        assert!(matches!(FringeScan::parse("fringe-scan v1\n1 2 3\n"), Err(DiffractionError::Malformed { line: 2, .. })));
    }

    #[test]
    fn fi_bound_values() {
        let b = fi_bound(0.43, 0.25, k()).unwrap();
        assert!((b / ((0.43 / 0.57) * (0.25 * k()).powi(2)) - 1.0).abs() < 1e-14);
        assert_eq!(fi_bound(0.43, 0.0, k()).unwrap(), 0.0);
        assert!((fi_bound(0.5, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(fi_bound(1.0, 0.25, k()), Err(DiffractionError::SingularOpenFraction(_))));
        // The lattice-point value is what the displacement-resolved form gives at ks = n pi.
        let exact = fi_at_displacement(0.43, 0.25, k(), LAMBDA / 2.0).unwrap();
        assert!((exact / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_density_bound() {
        let sigma = 1e-7;
        let h = sigma / 50.0;
        let p: Vec<f64> = (-500..=500)
            .map(|i| {
                let x = i as f64 * h;
                (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
            })
            .collect();
        let t = 3e-3;
        let hbar = measures::constants().hbar;
        let f = qfi_bound_from_density(&p, h, t).unwrap();
        assert!((f / ((hbar * t / sigma).powi(2)) - 1.0).abs() < 1e-3);
        assert_eq!(qfi_bound(0.0, t), 0.0);
        assert!((qfi_bound(2.0, 2.0 * t) / qfi_bound(2.0, t) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_length_of_two_branches() {
        // Equal branches separated by dX have F = (M dX)^2.
        let (m, dx): (f64, f64) = (3e-25, 4e-8);
        assert!((coherence_length((m * dx).powi(2), m).unwrap() - dx / 2.0).abs() < 1e-22);
        assert_eq!(coherence_length(0.0, m).unwrap(), 0.0);
        assert!((coherence_length(1e-60, 2.0 * m).unwrap() * 2.0 - coherence_length(1e-60, m).unwrap()).abs() < 1e-25);
    }

    fn setup(l0: f64) -> TalbotLauSetup {
        TalbotLauSetup {
            mass: 26777.0 * measures::constants().atomic_mass,
            atoms: 2000.0,
            period: LAMBDA,
            open_fraction: 0.43,
            visibility: 0.25,
            flight_time: TalbotLauSetup::flight_time_from(1.0, 260.0).unwrap(),
            source_distance: l0,
            grating_distance: 1.0,
        }
    }

    #[test]
    fn slit_geometry() {
        let near = cm_spread(&setup(0.2)).unwrap();
        assert!((near.at_second - 396e-9).abs() < 1e-9);
        let far = cm_spread(&setup(1e12)).unwrap();
        assert!((far.at_second / far.at_first - 1.0).abs() < 1e-11);
        let one = cm_spread(&setup(1.0)).unwrap();
        assert!((one.at_second - 2.0 * one.at_first).abs() < 1e-20);
    }

    #[test]
    fn zero_visibility_gives_zero_sizes() {
        let mut s = setup(0.2);
        s.visibility = 0.0;
        let r = diffraction_sizes(&s, None).unwrap();
        assert_eq!((r.sizes.n_ext, r.sizes.n_ent), (0.0, 0.0));
    }

    #[test]
    fn scan_overrides_setup_visibility() {
        let scan = FringeScan::sinusoid(0.1, k(), 0.3, 4.0 * LAMBDA, 64).unwrap();
        let r = diffraction_sizes(&setup(0.2), Some(&scan)).unwrap();
        assert!((r.visibility - 0.1).abs() < 1e-6);
        let direct = diffraction_sizes(&TalbotLauSetup { visibility: 0.1, ..setup(0.2) }, None).unwrap();
        assert!((r.sizes.n_ext / direct.sizes.n_ext - 1.0).abs() < 1e-5);
    }

    /// Position density after free flight of a Fock-basis state, with
    /// hbar = M = 1 and the basis oscillator frequency 1.
    fn free_density(rho: &DensityMatrix, t: f64, x: f64) -> f64 {
        let s = (1.0 + t * t).sqrt();
        let phi = hermite_functions(rho.dim(), x / s);
        let th = t.atan();
        let mut p = 0.0;
        for m in 0..rho.dim() {
            for n in 0..rho.dim() {
                let phase = Complex64::from_polar(1.0, -(m as f64 - n as f64) * th);
                p += (rho.matrix()[(m, n)] * phase).re * phi[m] * phi[n];
            }
        }
        p / s
    }

    #[test]
    fn flight_bound_respects_data_processing() {
        let states = [
            make_state(StateKind::Vacuum, 8).unwrap(),
            make_state(StateKind::Number(2), 8).unwrap(),
            make_state(StateKind::SqueezedVacuum(0.4), 30).unwrap(),
            make_state(StateKind::EvenCat(Complex64::new(1.2, 0.0)), 20).unwrap(),
            make_state(StateKind::Thermal(0.5), 40).unwrap(),
        ];
        for rho in &states {
            let q = crate::fisher::qfi(rho, &unit_quadratures(rho.dim()).unwrap().position).unwrap().value;
            for &t in &[0.5f64, 1.0, 3.0] {
                let half = 12.0 * (1.0 + t * t).sqrt();
                let n = 4001;
                let h = 2.0 * half / (n - 1) as f64;
                let mut p: Vec<f64> = (0..n).map(|i| free_density(rho, t, -half + i as f64 * h)).collect();
                let norm: f64 = p.iter().sum::<f64>() * h;
                p.iter_mut().for_each(|v| *v /= norm);
                let fcl = crate::fisher::classical_fi_grid(&p, h).unwrap().value;
                assert!(t * t * fcl <= q + 1e-6, "t={t}: {} > {q}", t * t * fcl);
            }
        }
    }

    #[test]
    fn lattice_bound_below_density_fi() {
        // A fringe pattern under a slowly varying envelope, read out by a
        // binary grating of the same period scanned across it.
        let kk = 2.0 * PI;
        let (v0, width) = (0.6, 8.0);
        let n = 16001;
        let half = 40.0;
        let h = 2.0 * half / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| -half + i as f64 * h).collect();
        let env = |x: f64| (-x * x / (2.0 * width * width)).exp();
        let mut p: Vec<f64> = xs.iter().map(|&x| env(x) * (1.0 + v0 * (kk * x).sin())).collect();
        let norm: f64 = p.iter().sum::<f64>() * h;
        p.iter_mut().for_each(|v| *v /= norm);
        let fcl = crate::fisher::classical_fi_grid(&p, h).unwrap().value;
        for &g in &[0.3, 0.43, 0.6] {
            let grating = |x: f64| if (x * kk / (2.0 * PI)).rem_euclid(1.0) < g { 1.0 } else { 0.0 };
            let positions: Vec<f64> = (0..48).map(|i| i as f64 / 16.0).collect();
            let raw: Vec<f64> = positions
                .iter()
                .map(|&s| xs.iter().zip(&p).map(|(&x, &px)| px * grating(x - s)).sum::<f64>() * h)
                .collect();
            let fit = fit_fringe(&FringeScan::normalized(positions, raw).unwrap()).unwrap();
            let bound = fi_bound(g, fit.visibility, fit.wavenumber).unwrap();
            assert!(bound > 0.0 && bound <= fcl, "g={g}: {bound} > {fcl}");
        }
    }
}
