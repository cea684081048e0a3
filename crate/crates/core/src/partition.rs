//! Monte Carlo estimates of full lattice partition functions and of the
//! normalized plaquette-field generating functional.
//!
//! Configurations are drawn from the product Haar measure on the variable
//! bonds and weighted by `exp(-beta A)`. Each worker owns one substream and a
//! contiguous slice of the sample range; per-sample records are concatenated
//! in worker order, so results depend only on the seed and the worker count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::action::plaquette_action;
use crate::bounds::{partition_sandwich_ln, source_bound, z_l, z_u_source, BoundReport, ModelParams, Side};
use crate::error::{invalid, Error, Result};
use crate::group::{haar_sample, UnitaryMatrix};
use crate::lattice::{closed_form, enhanced_temporal_gauge, BoundaryCondition, Lattice, Plaquette};
use crate::rng::RngState;

/// Fewest samples for which error bars are reported.
pub const MIN_SAMPLES: usize = 1000;

/// Blocks used by the jackknife error of ratio estimators.
pub const JACKKNIFE_BLOCKS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: RngState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sampler {
    pub samples: usize,
    pub rng: RngState,
    pub workers: usize,
}

impl Sampler {
    pub fn new(samples: usize, seed: u64, workers: usize) -> Self {
        Sampler { samples, rng: RngState::new(seed), workers: workers.max(1) }
    }

    fn check(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return invalid(format!("{} samples requested, at least {MIN_SAMPLES} required", self.samples));
        }
        Ok(())
    }

    /// Runs `per_sample` on every sample and returns the records in a fixed
    /// order.
    fn run<T, F>(&self, per_worker: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &mut rand_chacha::ChaCha8Rng, &mut Vec<T>) -> Result<()> + Sync,
    {
        let w = self.workers.max(1);
        let parts: Vec<Vec<T>> = (0..w)
            .into_par_iter()
            .map(|k| {
                let count = self.samples / w + usize::from(k < self.samples % w);
                let mut gen = self.rng.substream(k as u64).generator();
                let mut out = Vec::with_capacity(count);
                per_worker(count, &mut gen, &mut out)?;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().flatten().collect())
    }
}

/// Which bonds carry integration variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeChoice {
    /// Enhanced temporal gauge: tree bonds fixed to the identity.
    TemporalGauge,
    /// Every bond integrated.
    Ungauged,
}

/// Draws configurations and reports per-sample total actions together with
/// `beta^{1/2} Im Tr U_p` for each plaquette in `observed`.
fn sample_configurations(
    lattice: &Lattice,
    n: usize,
    gauge: GaugeChoice,
    observed: &[Plaquette],
    sampler: &Sampler,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let fixed: Vec<bool> = match gauge {
        GaugeChoice::TemporalGauge => {
            let g = enhanced_temporal_gauge(lattice);
            (0..lattice.bonds().len()).map(|b| g.is_fixed(b)).collect()
        }
        GaugeChoice::Ungauged => vec![false; lattice.bonds().len()],
    };
    let plaquettes = lattice.plaquettes();
    sampler.run(|count, gen, out| {
        let mut links = vec![UnitaryMatrix::identity(n); fixed.len()];
        for _ in 0..count {
            for (b, &f) in fixed.iter().enumerate() {
                if !f {
                    links[b] = haar_sample(n, gen);
                }
            }
            let hol = |p: &Plaquette| {
                p.bonds.iter().fold(UnitaryMatrix::identity(n), |acc, br| {
                    let u = links[br.index];
                    acc * if br.reversed { u.adjoint() } else { u }
                })
            };
            let action: f64 = plaquettes.iter().map(|p| plaquette_action(&hol(p))).sum();
            let traces = observed.iter().map(|p| hol(p).trace().im).collect();
            out.push((action, traces));
        }
        Ok(())
    })
}

/// Total plaquette actions of `sampler.samples` Haar configurations, reusable
/// across couplings.
#[derive(Debug, Clone)]
pub struct ActionSamples {
    actions: Vec<f64>,
    seed: RngState,
}

impl ActionSamples {
    pub fn draw(lattice: &Lattice, n: usize, gauge: GaugeChoice, sampler: &Sampler) -> Result<Self> {
        sampler.check()?;
        let actions = sample_configurations(lattice, n, gauge, &[], sampler)?.into_iter().map(|(a, _)| a).collect();
        Ok(ActionSamples { actions, seed: sampler.rng })
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    /// Sample mean of `exp(-beta A)`.
    pub fn estimate(&self, beta: f64) -> MCEstimate {
        mean_and_error(self.actions.iter().map(|a| (-beta * a).exp()), self.actions.len(), self.seed)
    }
}

fn mean_and_error(values: impl Iterator<Item = f64> + Clone, n: usize, seed: RngState) -> MCEstimate {
    let m = n as f64;
    let mean = values.clone().sum::<f64>() / m;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    MCEstimate { mean, std_error: (var / m).sqrt(), n_samples: n, seed }
}

/// Monte Carlo estimate of `Z = E[exp(-beta A)]` over the gauge-fixed product
/// Haar measure.
pub fn estimate_partition(lattice: &Lattice, params: &ModelParams, sampler: &Sampler) -> Result<MCEstimate> {
    estimate_partition_with(lattice, params, GaugeChoice::TemporalGauge, sampler)
}

pub fn estimate_partition_with(
    lattice: &Lattice,
    params: &ModelParams,
    gauge: GaugeChoice,
    sampler: &Sampler,
) -> Result<MCEstimate> {
    check_lattice(lattice, params)?;
    Ok(ActionSamples::draw(lattice, params.n, gauge, sampler)?.estimate(params.beta()))
}

fn check_lattice(lattice: &Lattice, params: &ModelParams) -> Result<()> {
    params.validate()?;
    if lattice.d() != params.d || lattice.l() != params.l || lattice.bc() != params.bc {
        return invalid(format!("lattice d={} L={} bc={} does not match parameters {params}", lattice.d(), lattice.l(), lattice.bc()));
    }
    Ok(())
}

/// Estimate compared with `z_l^{Lambda_r + Lambda_e} <= Z <= z_u^{Lambda_r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub estimate: MCEstimate,
    pub lower: BoundReport,
    pub upper: BoundReport,
}

pub fn sandwich_report(estimate: &MCEstimate, params: &ModelParams, sigma: f64) -> Result<SandwichReport> {
    let (lo, hi) = partition_sandwich_ln(params)?;
    Ok(SandwichReport {
        estimate: *estimate,
        lower: BoundReport::stochastic(estimate.mean, estimate.std_error, lo.exp(), Side::Lower, sigma),
        upper: BoundReport::stochastic(estimate.mean, estimate.std_error, hi.exp(), Side::Upper, sigma),
    })
}

/// `tr M_p = beta^{1/2} Im Tr(U_p - 1) = beta^{1/2} sum_j sin l_j`.
pub fn plaquette_field_trace(u: &UnitaryMatrix, params: &ModelParams) -> f64 {
    params.beta().sqrt() * u.trace().im
}

/// Plaquettes carrying sources and their complex strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    plaquettes: Vec<Plaquette>,
    strengths: Vec<Complex64>,
}

impl SourceSpec {
    pub fn new(lattice: &Lattice, plaquettes: Vec<Plaquette>, strengths: Vec<Complex64>) -> Result<Self> {
        if plaquettes.is_empty() {
            return invalid("at least one source plaquette required");
        }
        if plaquettes.len() != strengths.len() {
            return Err(Error::DimensionMismatch { expected: plaquettes.len(), got: strengths.len() });
        }
        for p in &plaquettes {
            let in_range = p.origin.coords().len() == lattice.d() && p.origin.coords().iter().all(|&c| (1..=lattice.l()).contains(&c));
            if !in_range || lattice.plaquette_at(&p.origin, p.plane.0, p.plane.1).as_ref() != Some(p) {
                return invalid(format!("plaquette at {:?} plane {:?} is not in the lattice", p.origin.coords(), p.plane));
            }
        }
        if strengths.iter().any(|j| !(j.re.is_finite() && j.im.is_finite())) {
            return invalid("source strengths must be finite");
        }
        Ok(SourceSpec { plaquettes, strengths })
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn strengths(&self) -> &[Complex64] {
        &self.strengths
    }

    pub fn r(&self) -> usize {
        self.plaquettes.len()
    }
}

/// Ratio estimate of the generating functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenFunEstimate {
    pub re: f64,
    pub im: f64,
    /// Jackknife standard error of the complex ratio.
    pub std_error: f64,
    /// The denominator, i.e. the periodic partition function.
    pub denominator: MCEstimate,
}

impl GenFunEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Stored samples of `(exp(-beta A), tr M_{p_1}, ..., tr M_{p_r})` from which
/// the generating functional can be evaluated at any source strengths.
#[derive(Debug, Clone)]
pub struct GenFunSamples {
    weights: Vec<f64>,
    traces: Vec<Vec<f64>>,
    seed: RngState,
    r: usize,
}

impl GenFunSamples {
    pub fn draw(lattice: &Lattice, params: &ModelParams, plaquettes: &[Plaquette], sampler: &Sampler) -> Result<Self> {
        check_lattice(lattice, params)?;
        sampler.check()?;
        if params.bc != BoundaryCondition::Periodic {
            return invalid("the generating functional is defined with periodic boundary conditions");
        }
        if !params.l.is_multiple_of(2) {
            return invalid(format!("L = {} must be even for reflection positivity", params.l));
        }
        let beta = params.beta();
        let sqrt_beta = beta.sqrt();
        let raw = sample_configurations(lattice, params.n, GaugeChoice::TemporalGauge, plaquettes, sampler)?;
        let mut weights = Vec::with_capacity(raw.len());
        let mut traces = Vec::with_capacity(raw.len());
        for (a, t) in raw {
            weights.push((-beta * a).exp());
            traces.push(t.into_iter().map(|x| sqrt_beta * x).collect());
        }
        Ok(GenFunSamples { weights, traces, seed: sampler.rng, r: plaquettes.len() })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn denominator(&self) -> MCEstimate {
        mean_and_error(self.weights.iter().copied(), self.weights.len(), self.seed)
    }

    /// `G(J)` with a jackknife error; refuses a denominator within `sigma`
    /// standard errors of zero.
    pub fn evaluate(&self, strengths: &[Complex64], sigma: f64) -> Result<GenFunEstimate> {
        if strengths.len() != self.r {
            return Err(Error::DimensionMismatch { expected: self.r, got: strengths.len() });
        }
        let den = self.denominator();
        if den.mean - sigma * den.std_error <= 0.0 {
            return Err(Error::DegenerateDenominator { mean: den.mean, std_error: den.std_error, sigma });
        }
        let total = self.weights.len();
        let blocks = JACKKNIFE_BLOCKS.min(total);
        let mut num_blocks = vec![Complex64::new(0.0, 0.0); blocks];
        let mut den_blocks = vec![0.0; blocks];
        for (i, (w, t)) in self.weights.iter().zip(&self.traces).enumerate() {
            let b = i * blocks / total;
            let s: Complex64 = strengths.iter().zip(t).map(|(j, x)| j * x).sum();
            num_blocks[b] += *w * s.exp();
            den_blocks[b] += w;
        }
        let num: Complex64 = num_blocks.iter().sum();
        let den_sum: f64 = den_blocks.iter().sum();
        let g = num / den_sum;
        let leave_out: Vec<Complex64> =
            (0..blocks).map(|b| (num - num_blocks[b]) / (den_sum - den_blocks[b])).collect();
        let mean_lo: Complex64 = leave_out.iter().sum::<Complex64>() / blocks as f64;
        let var = (blocks as f64 - 1.0) / blocks as f64 * leave_out.iter().map(|x| (x - mean_lo).norm_sqr()).sum::<f64>();
        Ok(GenFunEstimate { re: g.re, im: g.im, std_error: var.sqrt(), denominator: den })
    }
}

pub fn estimate_genfun(
    lattice: &Lattice,
    params: &ModelParams,
    sources: &SourceSpec,
    sampler: &Sampler,
    sigma: f64,
) -> Result<GenFunEstimate> {
    GenFunSamples::draw(lattice, params, sources.plaquettes(), sampler)?.evaluate(sources.strengths(), sigma)
}

/// `prod_j |z_u(r J_j)|^{2^d Lambda_r/(r Lambda_s)} / z_l^{2^d (Lambda_r + Lambda_e)/(r Lambda_s)}`
/// with the exact `Lambda_r` of the lattice.
pub fn genfun_bound(params: &ModelParams, strengths: &[Complex64]) -> Result<f64> {
    params.validate()?;
    let r = strengths.len();
    if r == 0 {
        return invalid("at least one source strength required");
    }
    let two_d = 2f64.powi(params.d as i32);
    let lr = params.retained_bonds() as f64;
    let le = closed_form::extra_bonds(params.d, params.l) as f64;
    let ls = closed_form::sites(params.d, params.l) as f64;
    let rf = r as f64;
    let zl = z_l(params)?.value;
    let mut ln = -(two_d * (lr + le) / (rf * ls)) * rf * zl.ln();
    for j in strengths {
        ln += two_d * lr / (rf * ls) * z_u_source(params, rf * j.norm())?.value.ln();
    }
    Ok(ln.exp())
}

/// `|z_u(J)|` against `beta^{-N^2/2} exp(c_u' + (pi^2/8) N |J|^2)`.
pub fn z_u_j(j: Complex64, params: &ModelParams) -> Result<BoundReport> {
    let v = z_u_source(params, j.norm())?;
    Ok(BoundReport::exact(v.value, source_bound(params, j.norm())?, Side::Upper))
}

/// Cauchy-integral estimate of the mixed derivative `d^r G / dJ_1 ... dJ_r`
/// at zero and the Cauchy bound `r! max|G| / R^r` on the polydisc of radius
/// `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyReport {
    pub derivative_re: f64,
    pub derivative_im: f64,
    pub max_abs: f64,
    pub bound: f64,
    /// `bound * beta^{-r/2}`: the same bound for the unscaled plaquette field.
    pub physical_bound: f64,
}

impl CauchyReport {
    pub fn derivative(&self) -> Complex64 {
        Complex64::new(self.derivative_re, self.derivative_im)
    }
}

pub fn correlation_cauchy<F>(r: usize, radius: f64, points: usize, beta: f64, g: F) -> Result<CauchyReport>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    if points < 8 {
        return invalid(format!("{points} points per circle, at least 8 required"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius {radius} must be positive"));
    }
    if r == 0 {
        return invalid("correlation order must be positive");
    }
    let nodes: Vec<Complex64> =
        (0..points).map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / points as f64)).collect();
    let mut idx = vec![0usize; r];
    let mut j = vec![Complex64::new(0.0, 0.0); r];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut max_abs: f64 = 0.0;
    for _ in 0..points.pow(r as u32) {
        let mut denom = Complex64::new(1.0, 0.0);
        for k in 0..r {
            j[k] = nodes[idx[k]];
            denom *= j[k];
        }
        let v = g(&j)?;
        max_abs = max_abs.max(v.norm());
        sum += v / denom;
        for k in 0..r {
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
        }
    }
    let derivative = sum / (points as f64).powi(r as i32);
    let factorial: f64 = (1..=r).map(|k| k as f64).product();
    let bound = factorial * max_abs / radius.powi(r as i32);
    Ok(CauchyReport {
        derivative_re: derivative.re,
        derivative_im: derivative.im,
        max_abs,
        bound,
        physical_bound: bound * beta.powf(-(r as f64) / 2.0),
    })
}
