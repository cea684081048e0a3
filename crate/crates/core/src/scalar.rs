//! Lattice free scalar field: unscaled and locally scaled two-point
//! functions, the scaling factor, hopping parameter, particle mass and the
//! Gaussian generating functional.
//!
//! Infinite-volume propagators are evaluated from the heat-kernel form
//! `1/D = int_0^inf e^{-tD} dt`, under which the Brillouin-zone integral
//! factorizes into modified Bessel functions:
//!
//! ```text
//! C_a(n)   = int_0^inf e^{-(1 - 2d k^2) t} prod_mu e^{-x} I_{n_mu}(x)|_{x = 2 k^2 t} dt
//! C^u_a(n) = a^{-d}/2 int_0^inf e^{-m_u^2 t/2} prod_mu e^{-x} I_{n_mu}(x)|_{x = k_u^2 t/a^2} dt
//! ```

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{adaptive_tensor, GaussLegendre, GridOutcome, PANEL_ORDER};
use crate::special::{bessel_in_scaled, hankel_coefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarFieldParams {
    pub d: usize,
    pub a: f64,
    pub m_u: f64,
    pub kappa_u: f64,
}

impl ScalarFieldParams {
    pub fn new(d: usize, a: f64, m_u: f64, kappa_u: f64) -> Result<Self> {
        let p = ScalarFieldParams { d, a, m_u, kappa_u };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.d) {
            return invalid(format!("dimension d = {} must be between 1 and 4", self.d));
        }
        if !(self.a > 0.0 && self.a <= 1.0) {
            return invalid(format!("spacing a = {} outside (0, 1]", self.a));
        }
        if !(self.m_u >= 0.0 && self.m_u.is_finite()) {
            return invalid(format!("mass m_u = {} must be non-negative", self.m_u));
        }
        if !(self.kappa_u > 0.0 && self.kappa_u.is_finite()) {
            return invalid(format!("hopping parameter k_u = {} must be positive", self.kappa_u));
        }
        Ok(())
    }

    /// `s^2 = a^{d-2} (m_u^2 a^2 + 2d k_u^2)`.
    pub fn scale_factor_sq(&self) -> f64 {
        let (d, a) = (self.d as f64, self.a);
        a.powi(self.d as i32 - 2) * (self.m_u * self.m_u * a * a + 2.0 * d * self.kappa_u * self.kappa_u)
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor_sq().sqrt()
    }

    fn is_massless(&self) -> bool {
        self.m_u == 0.0
    }
}

/// `k^2 = [2d + (m_u a / k_u)^2]^{-1}`.
pub fn scaled_hopping(params: &ScalarFieldParams) -> f64 {
    let r = params.m_u * params.a / params.kappa_u;
    1.0 / (2.0 * params.d as f64 + r * r)
}

/// Separation `x - y` in lattice steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSeparation {
    steps: Vec<i64>,
}

impl LatticeSeparation {
    pub fn from_steps(steps: &[i64]) -> Self {
        LatticeSeparation { steps: steps.to_vec() }
    }

    /// From physical coordinates, which must be integer multiples of `a`.
    pub fn physical(delta: &[f64], a: f64) -> Result<Self> {
        let mut steps = Vec::with_capacity(delta.len());
        for &x in delta {
            let k = (x / a).round();
            if !x.is_finite() || (x / a - k).abs() > 1e-9 {
                return invalid(format!("separation component {x} is not a multiple of a = {a}"));
            }
            steps.push(k as i64);
        }
        Ok(LatticeSeparation { steps })
    }

    pub fn origin(d: usize) -> Self {
        LatticeSeparation { steps: vec![0; d] }
    }

    /// Separation `t` along the time direction.
    pub fn temporal(d: usize, t: i64) -> Self {
        let mut steps = vec![0; d];
        steps[0] = t;
        LatticeSeparation { steps }
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    pub fn negated(&self) -> Self {
        LatticeSeparation { steps: self.steps.iter().map(|s| -s).collect() }
    }
}

/// Resolution of the heat-kernel time integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorQuadrature {
    /// Gauss-Legendre panels per doubling interval of `t`.
    pub subdivisions: usize,
    /// Bessel argument beyond which the massless tail is integrated
    /// analytically.
    pub tail_argument: f64,
}

impl Default for PropagatorQuadrature {
    fn default() -> Self {
        PropagatorQuadrature { subdivisions: 2, tail_argument: 1e6 }
    }
}

/// Panel edges start here and double; independent of all parameters.
const FIRST_EDGE: f64 = 1.0 / (1u64 << 24) as f64;

/// `int_0^inf e^{-gamma t} prod_mu e^{-ct} I_{n_mu}(ct) dt`.
fn heat_kernel_integral(gamma: f64, c: f64, n: &[i64], quad: &PropagatorQuadrature) -> f64 {
    let rule = GaussLegendre::new(PANEL_ORDER);
    let nmax = n.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as f64;
    let integrand = |t: f64| {
        let x = c * t;
        (-gamma * t).exp() * n.iter().map(|&k| bessel_in_scaled(k, x)).product::<f64>()
    };
    let massless = gamma == 0.0;
    let tail_start = quad.tail_argument * (1.0 + nmax * nmax) / c;
    let mut sum = rule.composite(0.0, FIRST_EDGE, quad.subdivisions, integrand);
    let mut lo = FIRST_EDGE;
    loop {
        let hi = 2.0 * lo;
        if massless && hi > tail_start {
            break;
        }
        let panels = quad.subdivisions * (1 + (gamma * (hi - lo)).ceil() as usize);
        let part = rule.composite(lo, hi, panels, integrand);
        sum += part;
        lo = hi;
        if !massless && gamma * lo > 1.0 && part <= 1e-18 * sum {
            break;
        }
    }
    if massless {
        sum += massless_tail(c, n, lo);
    }
    sum
}

/// `int_T^inf prod_mu e^{-ct} I_{n_mu}(ct) dt` from the first three terms of
/// the large-argument expansion.
fn massless_tail(c: f64, n: &[i64], t: f64) -> f64 {
    let coeffs: Vec<[f64; 3]> = n.iter().map(|&k| hankel_coefficients(k)).collect();
    let s1: f64 = coeffs.iter().map(|c| c[1]).sum();
    let mut s2: f64 = coeffs.iter().map(|c| c[2]).sum();
    for i in 0..coeffs.len() {
        for j in i + 1..coeffs.len() {
            s2 += coeffs[i][1] * coeffs[j][1];
        }
    }
    let h = 0.5 * n.len() as f64;
    (2.0 * PI * c).powf(-h)
        * (t.powf(1.0 - h) / (h - 1.0) + s1 / c * t.powf(-h) / h + s2 / (c * c) * t.powf(-1.0 - h) / (h + 1.0))
}

fn check_sep(params: &ScalarFieldParams, sep: &LatticeSeparation) -> Result<()> {
    params.validate()?;
    if sep.steps.len() != params.d {
        return Err(Error::DimensionMismatch { expected: params.d, got: sep.steps.len() });
    }
    if params.is_massless() && params.d <= 2 {
        return Err(Error::Divergent(format!("massless propagator in d = {} is infrared divergent", params.d)));
    }
    Ok(())
}

/// Infinite-volume physical two-point function `C^u_a(x, y)`.
pub fn propagator_unscaled(params: &ScalarFieldParams, sep: &LatticeSeparation) -> Result<f64> {
    propagator_unscaled_with(params, sep, &PropagatorQuadrature::default())
}

pub fn propagator_unscaled_with(params: &ScalarFieldParams, sep: &LatticeSeparation, quad: &PropagatorQuadrature) -> Result<f64> {
    check_sep(params, sep)?;
    let c = (params.kappa_u / params.a).powi(2);
    let gamma = 0.5 * params.m_u * params.m_u;
    Ok(0.5 * params.a.powi(-(params.d as i32)) * heat_kernel_integral(gamma, c, &sep.steps, quad))
}

/// Infinite-volume scaled two-point function `C_a(x, y)`.
pub fn propagator_scaled(params: &ScalarFieldParams, sep: &LatticeSeparation) -> Result<f64> {
    propagator_scaled_with(params, sep, &PropagatorQuadrature::default())
}

pub fn propagator_scaled_with(params: &ScalarFieldParams, sep: &LatticeSeparation, quad: &PropagatorQuadrature) -> Result<f64> {
    check_sep(params, sep)?;
    let k2 = scaled_hopping(params);
    let gamma = if params.is_massless() { 0.0 } else { 1.0 - 2.0 * params.d as f64 * k2 };
    Ok(heat_kernel_integral(gamma, 2.0 * k2, &sep.steps, quad))
}

/// Massless coincident-point value `C_0 = (2pi)^{-d} int [1 - d^{-1} sum cos q]^{-1} d^d q`,
/// which bounds the scaled propagator uniformly in the spacing.
pub fn coincident_massless(d: usize) -> Result<f64> {
    propagator_scaled(&ScalarFieldParams::new(d, 1.0, 0.0, 1.0)?, &LatticeSeparation::origin(d))
}

/// Scaled propagator by direct tensor Gauss-Legendre quadrature over the
/// Brillouin zone with `resolution` points per axis; the error is the change
/// from half that resolution.
pub fn propagator_scaled_bz(params: &ScalarFieldParams, sep: &LatticeSeparation, resolution: usize) -> Result<GridOutcome> {
    check_sep(params, sep)?;
    if resolution < 2 * PANEL_ORDER {
        return invalid(format!("resolution {resolution} below {}", 2 * PANEL_ORDER));
    }
    let k2 = scaled_hopping(params);
    let n: Vec<f64> = sep.steps.iter().map(|&s| s as f64).collect();
    let norm = (2.0 * PI).powi(params.d as i32);
    let f = |q: &[f64]| {
        let phase: f64 = q.iter().zip(&n).map(|(q, n)| q * n).sum();
        let den = 1.0 - 2.0 * k2 * q.iter().map(|q| q.cos()).sum::<f64>();
        num_complex::Complex64::new(phase.cos() / den / norm, 0.0)
    };
    Ok(adaptive_tensor(params.d, -PI, PI, resolution / 2, resolution, 0.0, &f))
}

/// Two-point function on a finite free-boundary lattice with sites `1..=L`
/// per direction, from the eigendecomposition of the quadratic form
/// `S = (phi, M phi)`, `C = M^{-1}/2`. Missing neighbours at the boundary
/// contribute nothing to the hopping term.
pub fn finite_lattice_propagator(params: &ScalarFieldParams, l: usize, x: &[usize], y: &[usize]) -> Result<f64> {
    params.validate()?;
    let d = params.d;
    if !(2..=3).contains(&d) || !(2..=8).contains(&l) {
        return invalid(format!("finite-lattice check limited to d in 2..=3 and L in 2..=8, got d={d} L={l}"));
    }
    for p in [x, y] {
        if p.len() != d || p.iter().any(|&c| !(1..=l).contains(&c)) {
            return invalid(format!("site {p:?} outside the lattice"));
        }
    }
    let index = |c: &[usize]| c.iter().rev().fold(0, |acc, &v| acc * l + (v - 1));
    let sites = l.pow(d as u32);
    let a = params.a;
    let hop = params.kappa_u.powi(2) * a.powi(d as i32 - 2);
    let diag = 0.5 * (params.m_u.powi(2) * a.powi(d as i32) + 2.0 * d as f64 * hop);
    let mut m = DMatrix::<f64>::zeros(sites, sites);
    let mut coords = vec![1usize; d];
    for s in 0..sites {
        let mut rem = s;
        for c in coords.iter_mut() {
            *c = rem % l + 1;
            rem /= l;
        }
        m[(s, s)] = diag;
        for mu in 0..d {
            if coords[mu] < l {
                let mut nb = coords.clone();
                nb[mu] += 1;
                let t = index(&nb);
                m[(s, t)] -= 0.5 * hop;
                m[(t, s)] -= 0.5 * hop;
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::Divergent("quadratic form has a zero mode".into()));
    }
    let (ix, iy) = (index(x), index(y));
    let mut c = 0.0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        c += eig.eigenvectors[(ix, k)] * eig.eigenvectors[(iy, k)] / lambda;
    }
    Ok(0.5 * c)
}

/// `m = (2/a) asinh(m_u a / (2 k_u))`.
pub fn particle_mass(params: &ScalarFieldParams) -> f64 {
    2.0 / params.a * (params.m_u * params.a / (2.0 * params.kappa_u)).asinh()
}

/// `D_a(p^0 = i m, p = 0) = (k_u^2/a^2)(1 - cosh(m a)) + m_u^2/2`.
pub fn dispersion_at_rest(params: &ScalarFieldParams, m: f64) -> f64 {
    (params.kappa_u / params.a).powi(2) * (1.0 - (m * params.a).cosh()) + 0.5 * params.m_u * params.m_u
}

/// Fit of `ln C_a(x^0) = ln A - m x^0 - ((d-1)/2) ln x^0 + b_1/x^0 + b_2/(x^0)^2`
/// along the time axis. The power is that of the saddle point of the
/// spatial momentum integral; `b_1, b_2` absorb its corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub mass: f64,
    pub amplitude: f64,
    pub corrections: [f64; 2],
}

/// Least-squares decay fit over temporal separations `times` (lattice steps).
pub fn fit_decay_rate(params: &ScalarFieldParams, times: &[i64]) -> Result<DecayFit> {
    if times.len() < 4 || times.iter().any(|&t| t <= 0) {
        return invalid("decay fit needs at least four positive separations");
    }
    let rows = times.len();
    let power = 0.5 * (params.d as f64 - 1.0);
    let mut design = DMatrix::<f64>::zeros(rows, 4);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, &t) in times.iter().enumerate() {
        let x0 = t as f64 * params.a;
        let c = propagator_scaled(params, &LatticeSeparation::temporal(params.d, t))?;
        design[(i, 0)] = 1.0;
        design[(i, 1)] = -x0;
        design[(i, 2)] = 1.0 / x0;
        design[(i, 3)] = 1.0 / (x0 * x0);
        rhs[i] = c.ln() + power * x0.ln();
    }
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Validation(format!("decay fit failed: {e}")))?;
    Ok(DecayFit { mass: sol[1], amplitude: sol[0].exp(), corrections: [sol[2], sol[3]] })
}

/// `exp((K, C K)/2)` for a symmetric positive semidefinite covariance.
pub fn gaussian_genfun(covariance: &DMatrix<f64>, strengths: &[f64]) -> Result<f64> {
    let r = strengths.len();
    if covariance.nrows() != r || covariance.ncols() != r {
        return Err(Error::DimensionMismatch { expected: r, got: covariance.nrows() });
    }
    let scale = covariance.amax().max(f64::MIN_POSITIVE);
    if (covariance - covariance.transpose()).amax() > 1e-12 * scale {
        return invalid("covariance is not symmetric");
    }
    let min_eig = SymmetricEigen::new(covariance.clone()).eigenvalues.min();
    if min_eig < -1e-12 * scale {
        return invalid(format!("covariance is not positive semidefinite (eigenvalue {min_eig})"));
    }
    let k = DVector::from_column_slice(strengths);
    Ok((0.5 * k.dot(&(covariance * &k))).exp())
}

/// Scaled covariance `C_a(x_j - x_k)` for lattice points given in steps.
pub fn scaled_covariance(params: &ScalarFieldParams, points: &[Vec<i64>]) -> Result<DMatrix<f64>> {
    let r = points.len();
    let mut c = DMatrix::zeros(r, r);
    for j in 0..r {
        for k in j..r {
            let diff: Vec<i64> = points[j].iter().zip(&points[k]).map(|(a, b)| a - b).collect();
            let v = propagator_scaled(params, &LatticeSeparation::from_steps(&diff))?;
            c[(j, k)] = v;
            c[(k, j)] = v;
        }
    }
    Ok(c)
}

/// One row of a propagator table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagatorRow {
    pub sep: String,
    pub unscaled: f64,
    pub scaled: f64,
    pub ratio: f64,
    pub s2: f64,
}

pub fn propagator_table(params: &ScalarFieldParams, seps: &[LatticeSeparation]) -> Result<Vec<PropagatorRow>> {
    seps.iter()
        .map(|sep| {
            let unscaled = propagator_unscaled(params, sep)?;
            let scaled = propagator_scaled(params, sep)?;
            let label: Vec<String> = sep.steps.iter().map(|s| s.to_string()).collect();
            Ok(PropagatorRow {
                sep: label.join(" "),
                unscaled,
                scaled,
                ratio: scaled / unscaled,
                s2: params.scale_factor_sq(),
            })
        })
        .collect()
}
