//! Single-plaquette partition functions and the closed-form stability bounds
//! built from them.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::MAX_N;
use crate::lattice::{build_lattice, closed_form, BoundaryCondition, Lattice};
use crate::weyl::{ensemble_constants, i_beta, weyl_integrate, ClassFunction, Ensemble, QuadratureScheme};

/// Exponent beyond which an integrand is treated as zero when choosing an
/// integration window.
const WINDOW_EXPONENT: f64 = 60.0;

/// Lattice model parameters. `beta = a^{d-4} / g^2` is the only coupling the
/// numerics see.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub a: f64,
    pub g2: f64,
    pub g0: f64,
    pub bc: BoundaryCondition,
}

impl ModelParams {
    /// `g0` defaults to `sqrt(g2)`, the smallest admissible maximum coupling.
    pub fn new(d: usize, l: usize, n: usize, a: f64, g2: f64, g0: Option<f64>, bc: BoundaryCondition) -> Result<Self> {
        let p = ModelParams { d, l, n, a, g2, g0: g0.unwrap_or(g2.sqrt()), bc };
        p.validate()?;
        Ok(p)
    }

    /// Unit spacing and `g^2 = 1/beta`.
    pub fn from_beta(d: usize, l: usize, n: usize, beta: f64, bc: BoundaryCondition) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return invalid(format!("beta = {beta} must be positive and finite"));
        }
        Self::new(d, l, n, 1.0, 1.0 / beta, None, bc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.d) {
            return invalid(format!("dimension d = {} must be 2, 3 or 4", self.d));
        }
        if self.l < 2 {
            return invalid(format!("side length L = {} must be at least 2", self.l));
        }
        if !(1..=MAX_N).contains(&self.n) {
            return invalid(format!("group dimension N = {} must be 1, 2 or 3", self.n));
        }
        if !(self.a > 0.0 && self.a <= 1.0) {
            return invalid(format!("spacing a = {} outside (0, 1]", self.a));
        }
        if !(self.g0 > 0.0 && self.g0.is_finite()) {
            return invalid(format!("maximum coupling g0 = {} must be positive and finite", self.g0));
        }
        // relative slack so that g0 = sqrt(g2) round trips
        if !(self.g2 > 0.0 && self.g2 <= self.g0 * self.g0 * (1.0 + 1e-12)) {
            return invalid(format!("g^2 = {} outside (0, g0^2 = {}]", self.g2, self.g0 * self.g0));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.a.powi(self.d as i32 - 4) / self.g2
    }

    pub fn lattice(&self) -> Result<Lattice> {
        build_lattice(self.d, self.l, self.a, self.bc)
    }

    /// Bonds left after gauge fixing a free-boundary lattice.
    pub fn retained_bonds(&self) -> usize {
        closed_form::retained_bonds(self.d, self.l)
    }

    /// Wrap-around bonds; zero for free boundaries.
    pub fn extra_bonds(&self) -> usize {
        match self.bc {
            BoundaryCondition::Free => 0,
            BoundaryCondition::Periodic => closed_form::extra_bonds(self.d, self.l),
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} L={} N={} a={} g2={} g0={} bc={}", self.d, self.l, self.n, self.a, self.g2, self.g0, self.bc)
    }
}

/// A converged single-plaquette integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaquetteIntegral {
    pub value: f64,
    pub error: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        invalid(format!("beta = {beta} must be non-negative and finite"))
    }
}

fn integrate(f: &ClassFunction, window: f64) -> Result<PlaquetteIntegral> {
    let scheme = QuadratureScheme::default_for(f.n()).with_window(window);
    let r = weyl_integrate(f, &scheme)?;
    if !r.converged {
        return Err(Error::NonConvergent { value: r.value.re, error: r.error });
    }
    Ok(PlaquetteIntegral { value: r.value.re, error: r.error })
}

/// Smallest `x > 0` with `c x^2 - s x >= k`.
fn quadratic_window(c: f64, s: f64, k: f64) -> f64 {
    if c <= 0.0 {
        return PI;
    }
    (s + (s * s + 4.0 * c * k).sqrt()) / (2.0 * c)
}

/// `z_u = int exp(-2 beta Re Tr(1 - U)) dU`.
pub fn z_u(params: &ModelParams) -> Result<PlaquetteIntegral> {
    z_u_at(params.n, params.beta())
}

pub fn z_u_at(n: usize, beta: f64) -> Result<PlaquetteIntegral> {
    z_u_source_at(n, beta, 0.0)
}

/// `z_l = int exp(-2 C^2 beta (d-1) Tr X^2) dU` with `C^2 = 4N` and `X` the
/// principal logarithm of `U`.
pub fn z_l(params: &ModelParams) -> Result<PlaquetteIntegral> {
    z_l_at(params.n, params.d, params.beta())
}

pub fn z_l_at(n: usize, d: usize, beta: f64) -> Result<PlaquetteIntegral> {
    check_beta(beta)?;
    let k = 2.0 * 4.0 * n as f64 * beta * (d as f64 - 1.0);
    let f = ClassFunction::real(n, move |l| (-k * l.iter().map(|x| x * x).sum::<f64>()).exp())?;
    integrate(&f, quadratic_window(k, 0.0, WINDOW_EXPONENT))
}

/// Single-plaquette integral with a source of strength `|J|`:
/// `int exp(|J| beta^{1/2} sum |sin l_j| - 2 beta sum (1 - cos l_j)) dU`.
pub fn z_u_source(params: &ModelParams, j_abs: f64) -> Result<PlaquetteIntegral> {
    z_u_source_at(params.n, params.beta(), j_abs)
}

pub fn z_u_source_at(n: usize, beta: f64, j_abs: f64) -> Result<PlaquetteIntegral> {
    check_beta(beta)?;
    if !(j_abs >= 0.0 && j_abs.is_finite()) {
        return invalid(format!("source modulus {j_abs} must be non-negative and finite"));
    }
    let s = j_abs * beta.sqrt();
    let f = ClassFunction::real(n, move |l| {
        l.iter().map(|x| s * x.sin().abs() - 2.0 * beta * (1.0 - x.cos())).sum::<f64>().exp()
    })?;
    // 2(1 - cos x) >= 4x^2/pi^2 and |sin x| <= |x|; the slack covers the
    // peak height s^2 pi^2 / (16 beta) of the bounding exponent.
    let c = 4.0 * beta / (PI * PI);
    let peak = if beta > 0.0 { s * s / (4.0 * c) } else { 0.0 };
    integrate(&f, quadratic_window(c, s, WINDOW_EXPONENT + peak))
}

/// `beta^{-N^2/2} exp(c_u' + (pi^2/8) N |J|^2)`.
pub fn source_bound(params: &ModelParams, j_abs: f64) -> Result<f64> {
    let c = theorem2_constants(params.n, params.d, params.g0)?;
    let nf = params.n as f64;
    Ok(params.beta().powf(-nf * nf / 2.0) * (c.c_u_prime + PI * PI / 8.0 * nf * j_abs * j_abs).exp())
}

/// Log-constants of the single-plaquette bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Constants {
    pub c_u: f64,
    pub c_l: f64,
    /// Constant of the bound on the source-dependent integral.
    pub c_u_prime: f64,
}

pub fn theorem2_constants(n: usize, d: usize, g0: f64) -> Result<Theorem2Constants> {
    if !(2..=4).contains(&d) {
        return invalid(format!("dimension d = {d} must be 2, 3 or 4"));
    }
    if !(g0 > 0.0 && g0.is_finite()) {
        return invalid(format!("maximum coupling g0 = {g0} must be positive and finite"));
    }
    let ec = ensemble_constants(n)?;
    let nf = n as f64;
    let n2 = nf * nf;
    let c2 = 4.0 * nf;
    let k = 2.0 * (d as f64 - 1.0) * c2;
    let cutoff = PI * k.sqrt() / (2.0 * g0);
    let c_u = n2 * (PI / 2.0).ln() + ec.n_g.ln() - ec.n_c.ln();
    let c_l = -ec.n_c.ln() + 0.5 * nf * (nf - 1.0) * (4.0 / (PI * PI)).ln() - 0.5 * n2 * k.ln()
        + i_beta(Ensemble::Unitary, cutoff, n)?.ln();
    let c_u_prime = (n2 + nf / 4.0) * PI.ln() + 0.5 * ec.n_s.ln() - ec.n_c.ln();
    Ok(Theorem2Constants { c_u, c_l, c_u_prime })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        })
    }
}

/// A value compared against a one-sided bound. `margin` is positive when the
/// bound holds. For stochastic values the bound counts as satisfied unless it
/// is violated by more than `sigma` standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub std_error: f64,
    pub bound: f64,
    pub side: Side,
    pub satisfied: bool,
    pub margin: f64,
}

impl BoundReport {
    pub fn exact(value: f64, bound: f64, side: Side) -> Self {
        Self::stochastic(value, 0.0, bound, side, 0.0)
    }

    pub fn stochastic(value: f64, std_error: f64, bound: f64, side: Side, sigma: f64) -> Self {
        let margin = match side {
            Side::Upper => bound - value,
            Side::Lower => value - bound,
        };
        let satisfied = margin >= -sigma * std_error && margin.is_finite();
        BoundReport { value, std_error, bound, side, satisfied, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub constants: Theorem2Constants,
    pub z_u: BoundReport,
    pub z_l: BoundReport,
}

/// `z_u <= beta^{-N^2/2} e^{c_u}` and `z_l >= beta^{-N^2/2} e^{c_l}`.
pub fn theorem2_bounds(params: &ModelParams) -> Result<Theorem2Report> {
    params.validate()?;
    let constants = theorem2_constants(params.n, params.d, params.g0)?;
    let scale = params.beta().powf(-((params.n * params.n) as f64) / 2.0);
    let zu = z_u(params)?;
    let zl = z_l(params)?;
    Ok(Theorem2Report {
        constants,
        z_u: BoundReport::exact(zu.value, scale * constants.c_u.exp(), Side::Upper),
        z_l: BoundReport::exact(zl.value, scale * constants.c_l.exp(), Side::Lower),
    })
}

/// Jensen lower bound per plaquette, `exp(-beta int |U - 1|^2 dU) = exp(-2 N beta)`.
pub fn jensen_xi(params: &ModelParams) -> f64 {
    jensen_xi_at(params.n, params.beta())
}

pub fn jensen_xi_at(n: usize, beta: f64) -> f64 {
    (-2.0 * n as f64 * beta).exp()
}

/// `f = (N^2/2) ln beta + ln Z / Lambda_r`.
pub fn normalized_free_energy(z: f64, params: &ModelParams) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return invalid(format!("partition function {z} must be positive and finite"));
    }
    normalized_free_energy_ln(z.ln(), params)
}

/// As [`normalized_free_energy`], taking `ln Z` to avoid underflow.
pub fn normalized_free_energy_ln(ln_z: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !ln_z.is_finite() {
        return invalid(format!("ln Z = {ln_z} must be finite"));
    }
    let nf = params.n as f64;
    Ok(0.5 * nf * nf * params.beta().ln() + ln_z / params.retained_bonds() as f64)
}

/// `(lower, upper)` for the normalized free energy. Upper is `c_u`. For free
/// boundaries lower is `c_l`; a periodic lattice integrates `Lambda_r +
/// Lambda_e` bonds in the quadratic bound, which scales the lower constant
/// by `(Lambda_r + Lambda_e) / Lambda_r` relative to `(N^2/2) ln beta`.
pub fn free_energy_bounds(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    let c = theorem2_constants(params.n, params.d, params.g0)?;
    let nf = params.n as f64;
    let half_ln_beta = 0.5 * nf * nf * params.beta().ln();
    let lr = params.retained_bonds() as f64;
    let ratio = (lr + params.extra_bonds() as f64) / lr;
    Ok((half_ln_beta + ratio * (c.c_l - half_ln_beta), c.c_u))
}

/// `(ln lower, ln upper)` for the full partition function:
/// `z_l^{Lambda_r + Lambda_e} <= Z <= z_u^{Lambda_r}`.
pub fn partition_sandwich_ln(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    let lr = params.retained_bonds() as f64;
    let le = params.extra_bonds() as f64;
    Ok(((lr + le) * z_l(params)?.value.ln(), lr * z_u(params)?.value.ln()))
}
