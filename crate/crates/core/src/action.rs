//! Wilson plaquette action, its quadratic upper bound, and the small-spacing
//! field-strength comparison.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::group::{angular_eigenvalues, exp_map, haar_sample, principal_log, CMat, HermitianMatrix, UnitaryMatrix};
use crate::lattice::{GaugeFixing, Lattice, Plaquette};
use crate::rng::RngState;

/// Bond variables on a lattice. Bonds fixed by a gauge fixing are implicitly
/// the identity and cannot be assigned.
#[derive(Debug, Clone)]
pub struct GaugeConfig<'a> {
    lattice: &'a Lattice,
    n: usize,
    links: Vec<Option<UnitaryMatrix>>,
    fixing: Option<GaugeFixing>,
}

impl<'a> GaugeConfig<'a> {
    /// A configuration with no bond assigned yet.
    pub fn new(lattice: &'a Lattice, n: usize, fixing: Option<GaugeFixing>) -> Self {
        GaugeConfig { lattice, n, links: vec![None; lattice.bonds().len()], fixing }
    }

    /// Every bond set to the identity.
    pub fn identity(lattice: &'a Lattice, n: usize) -> Self {
        GaugeConfig { lattice, n, links: vec![Some(UnitaryMatrix::identity(n)); lattice.bonds().len()], fixing: None }
    }

    /// Haar-random variables on every non-fixed bond.
    pub fn random<R: Rng + ?Sized>(lattice: &'a Lattice, n: usize, fixing: Option<GaugeFixing>, rng: &mut R) -> Self {
        let mut cfg = Self::new(lattice, n, fixing);
        for b in 0..lattice.bonds().len() {
            if !cfg.is_fixed(b) {
                cfg.links[b] = Some(haar_sample(n, rng));
            }
        }
        cfg
    }

    pub fn lattice(&self) -> &Lattice {
        self.lattice
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fixing(&self) -> Option<&GaugeFixing> {
        self.fixing.as_ref()
    }

    pub fn is_fixed(&self, bond: usize) -> bool {
        self.fixing.as_ref().is_some_and(|g| g.is_fixed(bond))
    }

    pub fn set(&mut self, bond: usize, u: UnitaryMatrix) -> Result<()> {
        if bond >= self.links.len() {
            return invalid(format!("bond index {bond} out of range"));
        }
        if u.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: u.n() });
        }
        if self.is_fixed(bond) {
            return invalid(format!("bond {bond} is gauge-fixed to the identity"));
        }
        self.links[bond] = Some(u);
        Ok(())
    }

    /// The variable on `bond`; fixed bonds resolve to the identity.
    pub fn link(&self, bond: usize) -> Result<UnitaryMatrix> {
        if self.is_fixed(bond) {
            return Ok(UnitaryMatrix::identity(self.n));
        }
        self.links
            .get(bond)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Validation(format!("bond {bond} has no assigned variable")))
    }

    /// Bonds carrying an integration variable.
    pub fn variable_bonds(&self) -> Vec<usize> {
        (0..self.links.len()).filter(|&b| !self.is_fixed(b)).collect()
    }

    /// Applies `U_b -> V(x) U_b V(x + e_mu)^dagger`. The result carries no
    /// gauge fixing since fixed bonds generally stop being the identity.
    pub fn gauge_transform(&self, site_unitaries: &[UnitaryMatrix]) -> Result<GaugeConfig<'a>> {
        if site_unitaries.len() != self.lattice.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.lattice.n_sites(), got: site_unitaries.len() });
        }
        let mut out = GaugeConfig::new(self.lattice, self.n, None);
        for (b, bond) in self.lattice.bonds().iter().enumerate() {
            let (x, y) = self.lattice.bond_endpoints(bond);
            let u = self.link(b)?;
            out.links[b] = Some(site_unitaries[x] * u * site_unitaries[y].adjoint());
        }
        Ok(out)
    }
}

/// Ordered product of the four bond variables around `p`.
pub fn holonomy(config: &GaugeConfig, p: &Plaquette) -> Result<UnitaryMatrix> {
    let mut acc = UnitaryMatrix::identity(config.n);
    for br in &p.bonds {
        let u = config.link(br.index)?;
        acc = acc * if br.reversed { u.adjoint() } else { u };
    }
    Ok(acc)
}

/// `A_p = 2 Re Tr(1 - U_p)`, evaluated as `|U_p - 1|_HS^2` which keeps full
/// relative precision near the identity.
#[inline]
pub fn plaquette_action(u: &UnitaryMatrix) -> f64 {
    (*u.matrix() - CMat::identity(u.n())).hs_norm_sqr()
}

/// Quadratic upper bound `k N sum_j |X_j|_HS^2` for a plaquette with `k`
/// retained bonds whose logarithms are `bond_logs`.
pub fn lemma1_bound(bond_logs: &[HermitianMatrix]) -> Result<f64> {
    let k = bond_logs.len();
    if !(1..=4).contains(&k) {
        return invalid(format!("a plaquette has 1 to 4 retained bonds, got {k}"));
    }
    let n = bond_logs[0].n();
    if let Some(x) = bond_logs.iter().find(|x| x.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: x.n() });
    }
    let sum: f64 = bond_logs.iter().map(|x| x.hs_norm_sqr()).sum();
    Ok((k * n) as f64 * sum)
}

/// Total action together with its global quadratic bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBound {
    pub total: f64,
    /// `2(d-1) 4N sum_b |X_b|_HS^2` over the variable bonds.
    pub bound: f64,
}

pub fn total_action(config: &GaugeConfig) -> Result<ActionBound> {
    let mut total = 0.0;
    for p in config.lattice.plaquettes() {
        total += plaquette_action(&holonomy(config, p)?);
    }
    let mut sq = 0.0;
    for b in config.variable_bonds() {
        sq += angular_eigenvalues(&config.link(b)?)?.sum_sq();
    }
    let d = config.lattice.d() as f64;
    Ok(ActionBound { total, bound: 2.0 * (d - 1.0) * 4.0 * config.n as f64 * sq })
}

/// Outcome of a sampling check of the quadratic plaquette bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    pub n: usize,
    pub retained: usize,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed `A_p / bound`.
    pub max_ratio: f64,
}

/// Samples `samples` plaquettes whose first `k` bonds (holonomy order) are
/// Haar random and the rest the identity, and counts violations of
/// `A_p <= k N sum_j |lambda_j|^2`.
pub fn verify_lemma1(n: usize, k: usize, samples: usize, rng: RngState, workers: usize) -> Result<Lemma1Report> {
    if !(1..=4).contains(&k) {
        return invalid(format!("a plaquette has 1 to 4 retained bonds, got {k}"));
    }
    if !(1..=crate::group::MAX_N).contains(&n) {
        return invalid(format!("group dimension {n} unsupported"));
    }
    let workers = workers.max(1);
    let chunks: Vec<(usize, f64)> = (0..workers)
        .into_par_iter()
        .map(|w| -> Result<(usize, f64)> {
            let count = samples / workers + usize::from(w < samples % workers);
            let mut gen = rng.substream(w as u64).generator();
            let mut violations = 0;
            let mut max_ratio: f64 = 0.0;
            let mut logs = Vec::with_capacity(k);
            for _ in 0..count {
                logs.clear();
                let mut up = UnitaryMatrix::identity(n);
                for j in 0..4 {
                    if j < k {
                        let u = haar_sample(n, &mut gen);
                        logs.push(principal_log(&u)?);
                        up = up * if j >= 2 { u.adjoint() } else { u };
                    }
                }
                let a = plaquette_action(&up);
                let bound = lemma1_bound(&logs)?;
                if a > bound {
                    violations += 1;
                }
                if bound > 0.0 {
                    max_ratio = max_ratio.max(a / bound);
                }
            }
            Ok((violations, max_ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Lemma1Report {
        n,
        retained: k,
        samples,
        violations: chunks.iter().map(|c| c.0).sum(),
        max_ratio: chunks.iter().map(|c| c.1).fold(0.0, f64::max),
    })
}

/// Physical gluon field: one Hermitian matrix per bond, with `U_b = exp(i a g A_b)`.
#[derive(Debug, Clone)]
pub struct GluonField<'a> {
    lattice: &'a Lattice,
    g: f64,
    fields: Vec<HermitianMatrix>,
}

impl<'a> GluonField<'a> {
    pub fn new(lattice: &'a Lattice, g: f64, fields: Vec<HermitianMatrix>) -> Result<Self> {
        if fields.len() != lattice.bonds().len() {
            return Err(Error::DimensionMismatch { expected: lattice.bonds().len(), got: fields.len() });
        }
        if !(g > 0.0 && g.is_finite()) {
            return invalid(format!("coupling g = {g} must be positive"));
        }
        if let Some(f) = fields.iter().find(|f| f.n() != fields[0].n()) {
            return Err(Error::DimensionMismatch { expected: fields[0].n(), got: f.n() });
        }
        Ok(GluonField { lattice, g, fields })
    }

    /// Samples a continuum profile `A_mu(x)` at the bond origins, with
    /// physical positions `a (x - 1)`.
    pub fn from_profile<F>(lattice: &'a Lattice, g: f64, profile: F) -> Result<Self>
    where
        F: Fn(&[f64], usize) -> HermitianMatrix,
    {
        let a = lattice.a();
        let fields = lattice
            .bonds()
            .iter()
            .map(|b| {
                let pos: Vec<f64> = b.origin.coords().iter().map(|&c| a * (c as f64 - 1.0)).collect();
                profile(&pos, b.direction)
            })
            .collect();
        Self::new(lattice, g, fields)
    }

    pub fn field(&self, bond: usize) -> &HermitianMatrix {
        &self.fields[bond]
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn to_config(&self) -> GaugeConfig<'a> {
        let n = self.fields[0].n();
        let mut cfg = GaugeConfig::new(self.lattice, n, None);
        let ag = self.lattice.a() * self.g;
        for (b, f) in self.fields.iter().enumerate() {
            cfg.links[b] = Some(exp_map(&f.scale(ag)));
        }
        cfg
    }

    /// Lattice field strength `F_{mu nu}(x)` from forward differences plus
    /// `i g [A_mu(x), A_nu(x)]`.
    pub fn field_strength(&self, p: &Plaquette) -> CMat {
        let a = self.lattice.a();
        let [b_mu, b_nu_shift, b_mu_shift, b_nu] = p.bonds.map(|b| *self.fields[b.index].matrix());
        let inv_a = Complex64::new(1.0 / a, 0.0);
        let d_mu_a_nu = (b_nu_shift - b_nu).scale(inv_a);
        let d_nu_a_mu = (b_mu_shift - b_mu).scale(inv_a);
        d_mu_a_nu - d_nu_a_mu + b_mu.commutator(&b_nu).scale(Complex64::new(0.0, self.g))
    }
}

/// `A_p / (a^4 g^2 Tr F_{mu nu}^2)`, which tends to 1 as the spacing shrinks.
pub fn small_a_consistency(field: &GluonField, p: &Plaquette) -> Result<f64> {
    let f = field.field_strength(p);
    let a = field.lattice.a();
    let denom = a.powi(4) * field.g * field.g * (f * f).trace().re;
    if denom.abs() <= f64::MIN_POSITIVE || (f.hs_norm_sqr() < 1e-300) {
        return Err(Error::DegenerateFieldStrength);
    }
    let ap = plaquette_action(&holonomy(&field.to_config(), p)?);
    Ok(ap / denom)
}
