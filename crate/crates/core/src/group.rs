//! Numerics on the unitary group U(N) for N <= 3.
//!
//! Matrices are stored inline ([`CMat`]) so the Monte Carlo kernels never
//! allocate. Spectral decompositions go through nalgebra.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Largest supported group dimension.
pub const MAX_N: usize = 3;

/// Unitarity tolerance accepted when validating external input.
pub const UNITARY_TOL: f64 = 1e-10;

/// Hermiticity tolerance, relative to `max(1, |X|_HS)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense N x N complex matrix with inline storage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    e: [[Complex64; MAX_N]; MAX_N],
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "matrix dimension {n} outside 1..={MAX_N}");
        CMat { n, e: [[ZERO; MAX_N]; MAX_N] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.e[i][i] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.e[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.e[i][i] = d;
        }
        m
    }

    /// Builds a matrix from row slices; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let n = rows.len();
        if !(1..=MAX_N).contains(&n) {
            return invalid(format!("matrix dimension {n} outside 1..={MAX_N}"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.n && j < self.n);
        self.e[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.n && j < self.n);
        self.e[i][j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.e[i][j] = self.e[j][i].conj();
            }
        }
        m
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.e[i][i]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.e[i][j] *= s;
            }
        }
        m
    }

    /// Squared Hilbert-Schmidt norm `Tr(M^dagger M)`.
    pub fn hs_norm_sqr(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.e[i][j].norm_sqr();
            }
        }
        s
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sqr().sqrt()
    }

    /// Hilbert-Schmidt inner product `Tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &CMat) -> Complex64 {
        assert_eq!(self.n, other.n);
        let mut s = ZERO;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.e[i][j].conj() * other.e[i][j];
            }
        }
        s
    }

    /// `|M^dagger M - 1|_HS`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - CMat::identity(self.n)).hs_norm()
    }

    /// `|M - M^dagger|_HS`.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).hs_norm()
    }

    pub fn commutator(&self, other: &CMat) -> CMat {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.e[i][j].re.is_finite() && self.e[i][j].im.is_finite()))
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.e[i][j])
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        assert!(m.is_square());
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

impl Mul for CMat {
    type Output = CMat;

    #[inline]
    fn mul(self, rhs: CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut m = CMat { n, e: [[ZERO; MAX_N]; MAX_N] };
        for i in 0..n {
            for k in 0..n {
                let a = self.e[i][k];
                for j in 0..n {
                    m.e[i][j] += a * rhs.e[k][j];
                }
            }
        }
        m
    }
}

impl Add for CMat {
    type Output = CMat;

    fn add(self, rhs: CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let mut m = self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.e[i][j] += rhs.e[i][j];
            }
        }
        m
    }
}

impl Sub for CMat {
    type Output = CMat;

    fn sub(self, rhs: CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let mut m = self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.e[i][j] -= rhs.e[i][j];
            }
        }
        m
    }
}

/// An element of U(N).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryMatrix(CMat);

impl UnitaryMatrix {
    /// Validates unitarity within [`UNITARY_TOL`].
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_finite() {
            return invalid("matrix has non-finite entries");
        }
        let defect = m.unitarity_defect();
        if defect > UNITARY_TOL {
            return invalid(format!("matrix is not unitary: |U^dagger U - 1|_HS = {defect:.3e}"));
        }
        Ok(UnitaryMatrix(m))
    }

    /// Wraps a matrix known to be unitary by construction.
    #[cfg(test)]
    pub(crate) fn new_unchecked(m: CMat) -> Self {
        UnitaryMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(CMat::identity(n))
    }

    /// `diag(e^{i phi_1}, ..., e^{i phi_N})`.
    pub fn from_phases(phases: &[f64]) -> Self {
        let d: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        UnitaryMatrix(CMat::from_diag(&d))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

impl Mul for UnitaryMatrix {
    type Output = UnitaryMatrix;

    #[inline]
    fn mul(self, rhs: UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(self.0 * rhs.0)
    }
}

/// A self-adjoint N x N matrix (element of the Lie algebra u(N)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_finite() {
            return invalid("matrix has non-finite entries");
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL * m.hs_norm().max(1.0) {
            return invalid(format!("matrix is not Hermitian: |X - X^dagger|_HS = {defect:.3e}"));
        }
        Ok(HermitianMatrix(m))
    }

    /// Symmetrizes `(m + m^dagger)/2`; used where hermiticity holds up to rounding.
    pub(crate) fn symmetrized(m: CMat) -> Self {
        HermitianMatrix((m + m.adjoint()).scale(Complex64::new(0.5, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMat::zeros(n))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        HermitianMatrix(CMat::from_diag(&d))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn hs_norm_sqr(&self) -> f64 {
        self.0.hs_norm_sqr()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale(Complex64::new(s, 0.0)))
    }

    /// Real eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.n() == 1 {
            vec![self.0.e[0][0].re]
        } else {
            self.0.to_dmatrix().symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Random Hermitian matrix with independent Gaussian coordinates of
    /// standard deviation `scale` in an orthonormal basis.
    pub fn random<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Self {
        let mut m = CMat::zeros(n);
        let s2 = scale / std::f64::consts::SQRT_2;
        for i in 0..n {
            let d: f64 = rng.sample(StandardNormal);
            m.e[i][i] = Complex64::new(scale * d, 0.0);
            for j in (i + 1)..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(s2 * re, s2 * im);
                m.e[i][j] = z;
                m.e[j][i] = z.conj();
            }
        }
        HermitianMatrix(m)
    }
}

/// Angular eigenvalues `lambda_j in (-pi, pi]`, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularSpectrum {
    phases: Vec<f64>,
}

/// Maps an angle onto the half-open branch `(-pi, pi]`.
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y = PI;
    }
    y
}

impl AngularSpectrum {
    pub fn new(mut phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() || phases.len() > MAX_N {
            return invalid(format!("spectrum length {} outside 1..={MAX_N}", phases.len()));
        }
        if let Some(p) = phases.iter().find(|p| !(**p > -PI && **p <= PI)) {
            return invalid(format!("phase {p} outside (-pi, pi]"));
        }
        phases.sort_by(|a, b| b.total_cmp(a));
        Ok(AngularSpectrum { phases })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    /// `sum_j lambda_j^2`, bounded by `N pi^2`.
    pub fn sum_sq(&self) -> f64 {
        self.phases.iter().map(|p| p * p).sum()
    }
}

/// Orthonormal basis `theta_alpha` of the N x N Hermitian matrices,
/// `Tr(theta_alpha theta_beta) = delta_{alpha beta}`.
#[derive(Clone, Debug)]
pub struct LieBasis {
    n: usize,
    elements: Vec<HermitianMatrix>,
}

impl LieBasis {
    /// Diagonal units, then symmetric and antisymmetric off-diagonal pairs.
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_N).contains(&n) {
            return invalid(format!("group dimension {n} outside 1..={MAX_N}"));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut m = CMat::zeros(n);
            m.e[i][i] = ONE;
            elements.push(HermitianMatrix(m));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut s = CMat::zeros(n);
                s.e[i][j] = Complex64::new(h, 0.0);
                s.e[j][i] = Complex64::new(h, 0.0);
                elements.push(HermitianMatrix(s));
                let mut a = CMat::zeros(n);
                a.e[i][j] = Complex64::new(0.0, -h);
                a.e[j][i] = Complex64::new(0.0, h);
                elements.push(HermitianMatrix(a));
            }
        }
        Ok(LieBasis { n, elements })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    /// `sum_alpha x_alpha theta_alpha`.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<HermitianMatrix> {
        if coords.len() != self.elements.len() {
            return Err(Error::DimensionMismatch { expected: self.elements.len(), got: coords.len() });
        }
        let mut m = CMat::zeros(self.n);
        for (x, t) in coords.iter().zip(&self.elements) {
            m = m + t.0.scale(Complex64::new(*x, 0.0));
        }
        Ok(HermitianMatrix(m))
    }
}

/// Draws a Haar-distributed element of U(N).
///
/// Gram-Schmidt on a matrix of independent standard complex Gaussians; the
/// resulting QR factor has a positive real diagonal in R, which fixes the
/// phase ambiguity and makes Q exactly Haar distributed.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitaryMatrix {
    assert!((1..=MAX_N).contains(&n), "group dimension {n} outside 1..={MAX_N}");
    if n == 1 {
        let theta: f64 = rng.random_range(-PI..PI);
        return UnitaryMatrix(CMat::from_diag(&[Complex64::from_polar(1.0, theta)]));
    }
    let mut cols = [[ZERO; MAX_N]; MAX_N];
    for col in cols.iter_mut().take(n) {
        for z in col.iter_mut().take(n) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re, im);
        }
    }
    for j in 0..n {
        // two passes of classical Gram-Schmidt keep the defect at rounding level
        for _ in 0..2 {
            for k in 0..j {
                let mut proj = ZERO;
                for i in 0..n {
                    proj += cols[k][i].conj() * cols[j][i];
                }
                for i in 0..n {
                    let ck = cols[k][i];
                    cols[j][i] -= proj * ck;
                }
            }
        }
        let norm = (0..n).map(|i| cols[j][i].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            cols[j][i] /= norm;
        }
    }
    UnitaryMatrix(CMat::from_fn(n, |i, j| cols[j][i]))
}

/// Eigen-decomposition of a unitary matrix: phases in `(-pi, pi]` sorted
/// descending and the matching orthonormal eigenvectors (columns).
fn unitary_eigen(u: &UnitaryMatrix) -> (Vec<f64>, CMat) {
    let n = u.n();
    if n == 1 {
        return (vec![wrap_phase(u.0.e[0][0].arg())], CMat::identity(1));
    }
    let (q, t) = u.0.to_dmatrix().schur().unpack();
    let mut idx: Vec<usize> = (0..n).collect();
    let phases: Vec<f64> = (0..n).map(|i| wrap_phase(t[(i, i)].arg())).collect();
    // ties keep the Schur order, which is deterministic for a given input
    idx.sort_by(|&a, &b| phases[b].total_cmp(&phases[a]));
    let sorted: Vec<f64> = idx.iter().map(|&i| phases[i]).collect();
    let vecs = CMat::from_fn(n, |r, c| q[(r, idx[c])]);
    (sorted, vecs)
}

/// Angular eigenvalues of `u`.
pub fn angular_eigenvalues(u: &UnitaryMatrix) -> Result<AngularSpectrum> {
    let defect = u.0.unitarity_defect();
    if defect > UNITARY_TOL {
        return invalid(format!("matrix is not unitary: |U^dagger U - 1|_HS = {defect:.3e}"));
    }
    let (phases, _) = unitary_eigen(u);
    Ok(AngularSpectrum { phases })
}

/// `exp(iX)` through the spectral decomposition of `X`.
pub fn exp_map(x: &HermitianMatrix) -> UnitaryMatrix {
    let n = x.n();
    if n == 1 {
        return UnitaryMatrix(CMat::from_diag(&[Complex64::from_polar(1.0, x.0.e[0][0].re)]));
    }
    let eig = x.0.to_dmatrix().symmetric_eigen();
    let v = CMat::from_dmatrix(&eig.eigenvectors);
    let d: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
    UnitaryMatrix(v * CMat::from_diag(&d) * v.adjoint())
}

/// The Hermitian logarithm `X` with `exp(iX) = U` and spectrum in `(-pi, pi]`.
pub fn principal_log(u: &UnitaryMatrix) -> Result<HermitianMatrix> {
    let defect = u.0.unitarity_defect();
    if defect > UNITARY_TOL {
        return invalid(format!("matrix is not unitary: |U^dagger U - 1|_HS = {defect:.3e}"));
    }
    let (phases, q) = unitary_eigen(u);
    let d: Vec<Complex64> = phases.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    Ok(HermitianMatrix::symmetrized(q * CMat::from_diag(&d) * q.adjoint()))
}

/// Coordinates `x_alpha = Tr(X theta_alpha)`.
pub fn lie_coords(x: &HermitianMatrix, basis: &LieBasis) -> Result<Vec<f64>> {
    if x.n() != basis.n() {
        return Err(Error::DimensionMismatch { expected: basis.n(), got: x.n() });
    }
    Ok(basis.elements.iter().map(|t| (x.0 * t.0).trace().re).collect())
}
