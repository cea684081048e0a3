//! Integration of class functions over U(N) through the Weyl formula, and the
//! Gaussian ensemble integrals `I_beta(u)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::group::{AngularSpectrum, MAX_N};
use crate::quad::{adaptive_tensor, composite_nodes, GaussLegendre, PANEL_ORDER};
use crate::rng::RngState;

/// Relative agreement between successive grids required for convergence.
pub const GRID_REL_TOL: f64 = 1e-8;

/// Finite stand-in for an infinite cutoff in `I_beta`; the Gaussian tail
/// beyond it is far below double precision.
pub const INFINITE_CUTOFF: f64 = 12.0;

/// Fixed number of Monte Carlo chunks, so estimates do not depend on the
/// thread count.
const MC_CHUNKS: u64 = 32;

type Evaluator<'f> = dyn Fn(&[f64]) -> Complex64 + Send + Sync + 'f;

/// A function on U(N) that only depends on the eigenphases.
pub struct ClassFunction<'f> {
    n: usize,
    evaluator: Box<Evaluator<'f>>,
}

impl<'f> ClassFunction<'f> {
    /// `evaluator` receives the `N` phases in no particular order and must be
    /// symmetric in them.
    pub fn new<F>(n: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'f,
    {
        if !(1..=MAX_N).contains(&n) {
            return invalid(format!("group dimension {n} unsupported"));
        }
        Ok(ClassFunction { n, evaluator: Box::new(evaluator) })
    }

    pub fn real<F>(n: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'f,
    {
        Self::new(n, move |l| Complex64::new(evaluator(l), 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn evaluate(&self, spectrum: &AngularSpectrum) -> Complex64 {
        (self.evaluator)(spectrum.phases())
    }

    pub(crate) fn eval_raw(&self, phases: &[f64]) -> Complex64 {
        (self.evaluator)(phases)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureScheme {
    /// Composite Gauss-Legendre grid on `(-window, window]^N`, refined by
    /// doubling from `resolution` up to `max_resolution` points per axis.
    TensorGrid { resolution: usize, max_resolution: usize, window: f64 },
    /// Uniform phases on `(-window, window]^N` weighted by the CUE density.
    MonteCarlo { samples: usize, rng: RngState, window: f64 },
}

impl QuadratureScheme {
    pub fn grid(resolution: usize) -> Self {
        QuadratureScheme::TensorGrid { resolution, max_resolution: 2048, window: PI }
    }

    pub fn monte_carlo(samples: usize, rng: RngState) -> Self {
        QuadratureScheme::MonteCarlo { samples, rng, window: PI }
    }

    /// Grids for `N <= 2`, Monte Carlo for `N = 3`.
    pub fn default_for(n: usize) -> Self {
        match n {
            1 => QuadratureScheme::TensorGrid { resolution: 32, max_resolution: 8192, window: PI },
            2 => QuadratureScheme::TensorGrid { resolution: 32, max_resolution: 1024, window: PI },
            _ => Self::monte_carlo(400_000, RngState::new(0x5eed)),
        }
    }

    /// Restricts the domain to `(-w, w]^N`. Only valid when the integrand is
    /// negligible outside.
    pub fn with_window(self, w: f64) -> Self {
        let w = w.min(PI);
        match self {
            QuadratureScheme::TensorGrid { resolution, max_resolution, .. } => {
                QuadratureScheme::TensorGrid { resolution, max_resolution, window: w }
            }
            QuadratureScheme::MonteCarlo { samples, rng, .. } => QuadratureScheme::MonteCarlo { samples, rng, window: w },
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            QuadratureScheme::TensorGrid { resolution, max_resolution, window } => {
                if resolution < 16 || max_resolution < 2 * resolution {
                    return invalid(format!("grid resolution {resolution}..{max_resolution} too small"));
                }
                check_window(window)
            }
            QuadratureScheme::MonteCarlo { samples, window, .. } => {
                if samples < 2 {
                    return invalid("Monte Carlo needs at least two samples");
                }
                check_window(window)
            }
        }
    }
}

fn check_window(w: f64) -> Result<()> {
    if w > 0.0 && w <= PI {
        Ok(())
    } else {
        invalid(format!("integration window {w} outside (0, pi]"))
    }
}

/// An integral with its error estimate. For grids the error is the change
/// under the last refinement; for Monte Carlo it is the standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylResult {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
}

/// `prod_{j<k} |e^{i l_j} - e^{i l_k}|^2`.
pub fn cue_density(phases: &AngularSpectrum) -> f64 {
    cue_density_raw(phases.phases())
}

pub(crate) fn cue_density_raw(l: &[f64]) -> f64 {
    let mut rho = 1.0;
    for j in 0..l.len() {
        for k in j + 1..l.len() {
            let s = (0.5 * (l[j] - l[k])).sin();
            rho *= 4.0 * s * s;
        }
    }
    rho
}

/// `prod_{j<k} (y_j - y_k)^2`.
pub fn vandermonde_sq(y: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in 0..y.len() {
        for k in j + 1..y.len() {
            v *= (y[j] - y[k]).powi(2);
        }
    }
    v
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(1/N_C) int f rho d^N l` over the scheme's domain.
pub fn weyl_integrate(f: &ClassFunction, scheme: &QuadratureScheme) -> Result<WeylResult> {
    scheme.validate()?;
    let n = f.n;
    let n_c = ensemble_constants(n)?.n_c;
    match *scheme {
        QuadratureScheme::TensorGrid { resolution, max_resolution, window } => {
            let g = |l: &[f64]| f.eval_raw(l) * cue_density_raw(l);
            let out = adaptive_tensor(n, -window, window, resolution, max_resolution, GRID_REL_TOL, &g);
            Ok(WeylResult { value: out.value / n_c, error: out.error / n_c, converged: out.converged })
        }
        QuadratureScheme::MonteCarlo { samples, rng, window } => {
            let volume = (2.0 * window).powi(n as i32);
            let chunks: Vec<(Complex64, f64, usize)> = (0..MC_CHUNKS)
                .into_par_iter()
                .map(|c| {
                    let count = samples / MC_CHUNKS as usize + usize::from((c as usize) < samples % MC_CHUNKS as usize);
                    let mut gen = rng.substream(c).generator();
                    let mut l = vec![0.0; n];
                    let mut sum = Complex64::new(0.0, 0.0);
                    let mut sq = 0.0;
                    for _ in 0..count {
                        for x in l.iter_mut() {
                            *x = gen.random_range(-window..window);
                        }
                        let v = f.eval_raw(&l) * cue_density_raw(&l);
                        sum += v;
                        sq += v.norm_sqr();
                    }
                    (sum, sq, count)
                })
                .collect();
            let total: usize = chunks.iter().map(|c| c.2).sum();
            let sum: Complex64 = chunks.iter().map(|c| c.0).sum();
            let sq: f64 = chunks.iter().map(|c| c.1).sum();
            let m = total as f64;
            let mean = sum / m;
            let var = ((sq / m - mean.norm_sqr()) * m / (m - 1.0)).max(0.0);
            let scale = volume / n_c;
            Ok(WeylResult { value: mean * scale, error: (var / m).sqrt() * scale, converged: true })
        }
    }
}

/// Normalizations of the circular, Gaussian unitary and Gaussian symplectic
/// ensembles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConstants {
    pub n_c: f64,
    pub n_g: f64,
    pub n_s: f64,
}

pub fn ensemble_constants(n: usize) -> Result<EnsembleConstants> {
    if n == 0 {
        return invalid("group dimension must be positive");
    }
    let nf = n as f64;
    let n_c = (2.0 * PI).powi(n as i32) * factorial(n);
    let prod_j: f64 = (1..=n).map(factorial).product();
    let prod_2j: f64 = (1..=n).map(|j| factorial(2 * j)).product();
    let n_g = (2.0 * PI).powf(nf / 2.0) * 2f64.powf(-nf * nf / 2.0) * prod_j;
    let n_s = (2.0 * PI).powf(nf / 2.0) * 4f64.powf(-nf * nf) * prod_2j;
    Ok(EnsembleConstants { n_c, n_g, n_s })
}

/// Dyson index of a Gaussian ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Unitary,
    Symplectic,
}

impl Ensemble {
    pub fn beta(self) -> u32 {
        match self {
            Ensemble::Unitary => 2,
            Ensemble::Symplectic => 4,
        }
    }

    pub fn from_beta(beta: u32) -> Result<Self> {
        match beta {
            2 => Ok(Ensemble::Unitary),
            4 => Ok(Ensemble::Symplectic),
            _ => invalid(format!("ensemble index {beta} must be 2 or 4")),
        }
    }
}

/// `int_{(-u,u)^N} exp(-beta/2 sum y^2) prod_{j<k} |y_j - y_k|^beta d^N y`;
/// `u = f64::INFINITY` is evaluated at [`INFINITE_CUTOFF`].
pub fn i_beta(ensemble: Ensemble, u: f64, n: usize) -> Result<f64> {
    if !(u > 0.0) {
        return invalid(format!("cutoff u = {u} must be positive"));
    }
    if !(1..=MAX_N).contains(&n) {
        return invalid(format!("group dimension {n} unsupported"));
    }
    let u = u.min(INFINITE_CUTOFF);
    let power = ensemble.beta();
    // The integrand factorizes once |Vandermonde|^beta is expanded into
    // monomials, leaving products of one-dimensional truncated moments.
    let mut poly: BTreeMap<[u32; MAX_N], f64> = BTreeMap::from([([0; MAX_N], 1.0)]);
    for j in 0..n {
        for k in j + 1..n {
            for _ in 0..power {
                let mut next = BTreeMap::new();
                for (e, c) in &poly {
                    for (var, sign) in [(j, 1.0), (k, -1.0)] {
                        let mut e = *e;
                        e[var] += 1;
                        *next.entry(e).or_insert(0.0) += sign * c;
                    }
                }
                poly = next;
            }
        }
    }
    let max_deg = poly.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
    let half_beta = 0.5 * power as f64;
    let rule = GaussLegendre::new(PANEL_ORDER);
    let (ys, ws) = composite_nodes(-u, u, 64, &rule);
    let moments: Vec<f64> = (0..=max_deg)
        .map(|k| {
            if k % 2 == 1 {
                return 0.0;
            }
            ys.iter().zip(&ws).map(|(y, w)| w * y.powi(k as i32) * (-half_beta * y * y).exp()).sum()
        })
        .collect();
    Ok(poly.iter().map(|(e, c)| c * e[..n].iter().map(|&k| moments[k as usize]).product::<f64>()).sum())
}
