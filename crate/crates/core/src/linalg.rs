//! Dense Hermitian linear algebra and functional calculus.
//!
//! Operators are stored as dense `nalgebra` complex matrices wrapped in three
//! tiers of newtypes: [`HermitianOp`] (self-adjoint), [`PsdOp`] (nonnegative
//! spectrum) and [`DensityOp`] (unit trace). Each tier dereferences to the one
//! below it, so every Hermitian method is available on a density operator.
//!
//! Functions of operators are taken on supports: negative powers and
//! logarithms only act on eigenvalues above `1e-12 * ||H||_inf`, and every
//! other eigenvalue is sent to zero.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;

pub type CMatrix = DMatrix<Complex64>;

/// Relative asymmetry accepted (and then symmetrized away) by [`HermitianOp::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative negative-eigenvalue band clamped to zero by [`PsdOp::new`].
pub const PSD_TOL: f64 = 1e-10;
/// Absolute trace tolerance for [`DensityOp`].
pub const TRACE_TOL: f64 = 1e-10;
/// Relative cutoff below which an eigenvalue is outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Relative band treated as zero when forming `{X > 0}`.
pub const POSITIVITY_CUTOFF: f64 = 1e-10;

pub(crate) fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `(M + M^dagger) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Unitary whose columns are the eigenvectors, in the order of [`values`](Self::values).
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max |lambda_i|`.
    pub fn op_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `U diag(w) U^dagger` for an arbitrary real weight vector.
    pub fn compose_weights(&self, weights: &[f64]) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, w) in weights.iter().enumerate() {
            let w = Complex64::new(*w, 0.0);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        hermitize(&(scaled * self.vectors.adjoint()))
    }

    /// `U f(Lambda) U^dagger`.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let w: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        self.compose_weights(&w)
    }

    /// Sum of eigenprojectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        self.compose(|v| if keep(v) { 1.0 } else { 0.0 })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.compose_weights(&self.values)
    }

    /// Columns of the eigenvectors whose eigenvalue satisfies `keep`, as a `dim x r` isometry.
    pub fn isometry(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let cols: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.values[j])).collect();
        self.vectors.select_columns(cols.iter())
    }
}

/// A self-adjoint operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp {
    mat: CMatrix,
}

impl HermitianOp {
    /// Validates `mat` against the Hermitian tolerance and symmetrizes it.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        if mat.nrows() == 0 {
            return Err(Error::invalid("operator dimension must be positive"));
        }
        let scale = max_abs_entry(&mat);
        let asymmetry = max_abs_entry(&(&mat - mat.adjoint()));
        let tolerance = HERMITIAN_TOL * scale;
        if asymmetry > tolerance {
            return Err(Error::NonHermitianInput { asymmetry, tolerance });
        }
        Ok(Self { mat: hermitize(&mat) })
    }

    /// Symmetrizes `mat` without checking how far from Hermitian it was.
    pub fn hermitized(mat: CMatrix) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        Self { mat: hermitize(&mat) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self { mat: CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) }
    }

    /// Row-major real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: rows.len() });
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i * dim + j], 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr[self * other]`, real part.
    pub fn trace_with(&self, other: &HermitianOp) -> f64 {
        trace_product(&self.mat, &other.mat).re
    }

    pub fn eig(&self) -> EigenSystem {
        eig_hermitian(self)
    }

    pub fn apply_fn(&self, f: &ScalarFn) -> Result<HermitianOp> {
        apply_fn(self, f)
    }

    pub fn op_norm(&self) -> f64 {
        self.eig().op_norm()
    }

    pub fn trace_norm(&self) -> f64 {
        self.eig().values().iter().map(|v| v.abs()).sum()
    }

    /// `|X| = sqrt(X^2)`.
    pub fn abs(&self) -> PsdOp {
        PsdOp::from_trusted(HermitianOp { mat: self.eig().compose(f64::abs) })
    }

    pub fn scale(&self, s: f64) -> HermitianOp {
        HermitianOp { mat: &self.mat * Complex64::new(s, 0.0) }
    }

    /// `C^dagger X C`, for an arbitrary (possibly rectangular) `C`.
    pub fn congruence(&self, c: &CMatrix) -> HermitianOp {
        HermitianOp::hermitized(c.adjoint() * &self.mat * c)
    }

    /// `C X C^dagger`.
    pub fn sandwich(&self, c: &CMatrix) -> HermitianOp {
        HermitianOp::hermitized(c * &self.mat * c.adjoint())
    }

    pub fn kron(&self, other: &HermitianOp) -> HermitianOp {
        HermitianOp { mat: self.mat.kronecker(&other.mat) }
    }

    /// Largest absolute entry difference.
    pub fn max_entry_diff(&self, other: &HermitianOp) -> f64 {
        max_abs_entry(&(&self.mat - &other.mat))
    }

    /// `{X > 0}`.
    pub fn positive_projection(&self) -> Projector {
        positive_part_projection(self)
    }

    /// `(X)_+`.
    pub fn positive_part(&self) -> PsdOp {
        positive_part(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values()[0]
    }
}

impl<'a> Add<&'a HermitianOp> for &'a HermitianOp {
    type Output = HermitianOp;
    fn add(self, rhs: &'a HermitianOp) -> HermitianOp {
        HermitianOp::hermitized(&self.mat + &rhs.mat)
    }
}

impl<'a> Sub<&'a HermitianOp> for &'a HermitianOp {
    type Output = HermitianOp;
    fn sub(self, rhs: &'a HermitianOp) -> HermitianOp {
        HermitianOp::hermitized(&self.mat - &rhs.mat)
    }
}

impl Neg for &HermitianOp {
    type Output = HermitianOp;
    fn neg(self) -> HermitianOp {
        HermitianOp { mat: -&self.mat }
    }
}

impl Mul<f64> for &HermitianOp {
    type Output = HermitianOp;
    fn mul(self, rhs: f64) -> HermitianOp {
        self.scale(rhs)
    }
}

/// A positive semi-definite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdOp {
    base: HermitianOp,
}

impl PsdOp {
    /// Clamps eigenvalues in `[-1e-10 ||H||, 0)` to zero and rejects anything more negative.
    pub fn new(base: HermitianOp) -> Result<Self> {
        let es = base.eig();
        let norm = es.op_norm();
        let min = es.values()[0];
        if min < -PSD_TOL * norm {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if min < 0.0 {
            let clamped = HermitianOp { mat: es.compose(|v| v.max(0.0)) };
            return Ok(Self { base: clamped });
        }
        Ok(Self { base })
    }

    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        Self::new(HermitianOp::new(mat)?)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOp::from_real_diagonal(diag))
    }

    /// Wraps an operator that is PSD by construction (a Gram matrix, a
    /// spectral function with nonnegative values, ...).
    pub(crate) fn from_trusted(base: HermitianOp) -> Self {
        Self { base }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { base: HermitianOp::zeros(dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { base: HermitianOp::identity(dim) }
    }

    pub fn as_hermitian(&self) -> &HermitianOp {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianOp {
        self.base
    }

    /// `A^p` on the support of `A`.
    pub fn power(&self, p: f64) -> PsdOp {
        let es = self.eig();
        let cut = SUPPORT_CUTOFF * es.op_norm();
        let mat = es.compose(|v| {
            if p > 0.0 {
                v.max(0.0).powf(p)
            } else if v > cut {
                v.powf(p)
            } else {
                0.0
            }
        });
        PsdOp { base: HermitianOp { mat } }
    }

    /// Projection onto the support (eigenvalues above the support cutoff).
    pub fn support_projector(&self) -> Projector {
        let es = self.eig();
        let cut = SUPPORT_CUTOFF * es.op_norm();
        Projector::from_trusted(es.spectral_projector(|v| v > cut))
    }

    pub fn rank(&self) -> usize {
        let es = self.eig();
        let cut = SUPPORT_CUTOFF * es.op_norm();
        es.values().iter().filter(|&&v| v > cut).count()
    }

    pub fn scale(&self, s: f64) -> PsdOp {
        assert!(s >= 0.0, "PSD operators can only be scaled by nonnegative reals");
        PsdOp { base: self.base.scale(s) }
    }

    pub fn add(&self, other: &PsdOp) -> PsdOp {
        PsdOp { base: &self.base + &other.base }
    }

    pub fn kron(&self, other: &PsdOp) -> PsdOp {
        PsdOp { base: self.base.kron(&other.base) }
    }

    /// `C X C^dagger`, which stays PSD.
    pub fn sandwich(&self, c: &CMatrix) -> PsdOp {
        PsdOp { base: self.base.sandwich(c) }
    }

    /// `C^dagger X C`, which stays PSD.
    pub fn congruence(&self, c: &CMatrix) -> PsdOp {
        PsdOp { base: self.base.congruence(c) }
    }
}

impl Deref for PsdOp {
    type Target = HermitianOp;
    fn deref(&self) -> &HermitianOp {
        &self.base
    }
}

/// A density operator: PSD with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    base: PsdOp,
}

impl DensityOp {
    pub fn new(base: PsdOp) -> Result<Self> {
        let trace = base.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace });
        }
        Ok(Self { base })
    }

    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        Self::new(PsdOp::from_matrix(mat)?)
    }

    /// `A / Tr[A]`.
    pub fn normalize(psd: &PsdOp) -> Result<Self> {
        let t = psd.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::EmptySupport);
        }
        Ok(Self { base: psd.scale(1.0 / t) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(PsdOp::from_real_diagonal(diag)?)
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { base: PsdOp::identity(dim).scale(1.0 / dim as f64) }
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::EmptySupport);
        }
        let v = v / Complex64::new(n, 0.0);
        Ok(Self { base: PsdOp::from_trusted(HermitianOp::hermitized(&v * v.adjoint())) })
    }

    pub(crate) fn from_trusted(base: PsdOp) -> Self {
        Self { base }
    }

    pub fn as_psd(&self) -> &PsdOp {
        &self.base
    }

    pub fn into_psd(self) -> PsdOp {
        self.base
    }

    pub fn kron(&self, other: &DensityOp) -> DensityOp {
        DensityOp { base: self.base.kron(&other.base) }
    }
}

impl Deref for DensityOp {
    type Target = PsdOp;
    fn deref(&self) -> &PsdOp {
        &self.base
    }
}

/// An orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    base: PsdOp,
}

impl Projector {
    pub(crate) fn from_trusted(mat: CMatrix) -> Self {
        Self { base: PsdOp::from_trusted(HermitianOp::hermitized(mat)) }
    }

    pub fn as_psd(&self) -> &PsdOp {
        &self.base
    }

    pub fn into_psd(self) -> PsdOp {
        self.base
    }

    pub fn rank(&self) -> usize {
        self.trace().round() as usize
    }
}

impl Deref for Projector {
    type Target = PsdOp;
    fn deref(&self) -> &PsdOp {
        &self.base
    }
}

/// Ascending eigendecomposition.
pub fn eig_hermitian(h: &HermitianOp) -> EigenSystem {
    let se = SymmetricEigen::new(h.mat.clone());
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = se.eigenvectors.select_columns(order.iter());
    EigenSystem { values, vectors }
}

pub fn apply_fn(h: &HermitianOp, f: &ScalarFn) -> Result<HermitianOp> {
    let es = h.eig();
    let cut = SUPPORT_CUTOFF * es.op_norm();
    let w = es
        .values()
        .iter()
        .map(|&v| f.eval_spectral(v, cut))
        .collect::<Result<Vec<f64>>>()?;
    Ok(HermitianOp { mat: es.compose_weights(&w) })
}

/// Zero band used by `{X > 0}` and `{X = 0}`.
pub(crate) fn positivity_band(es: &EigenSystem) -> f64 {
    POSITIVITY_CUTOFF * es.op_norm()
}

/// `{X > 0}`: eigenvalues within `1e-10 ||X||` of zero are excluded.
pub fn positive_part_projection(x: &HermitianOp) -> Projector {
    let es = x.eig();
    let band = positivity_band(&es);
    Projector::from_trusted(es.spectral_projector(|v| v > band))
}

/// `(X)_+ = X {X > 0}`.
pub fn positive_part(x: &HermitianOp) -> PsdOp {
    let es = x.eig();
    let band = positivity_band(&es);
    PsdOp::from_trusted(HermitianOp { mat: es.compose(|v| if v > band { v } else { 0.0 }) })
}

pub fn trace_norm(x: &HermitianOp) -> f64 {
    x.trace_norm()
}

pub fn op_norm(x: &HermitianOp) -> f64 {
    x.op_norm()
}

/// `A ^ B = (A + B - |A - B|) / 2`.
pub fn noncommutative_min(a: &HermitianOp, b: &HermitianOp) -> Result<HermitianOp> {
    check_same_dim(a.dim(), b.dim())?;
    let diff = a - b;
    let abs = diff.abs();
    let sum = a + b;
    Ok((&sum - abs.as_hermitian()).scale(0.5))
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for op in ops {
        acc = acc.kronecker(op);
    }
    acc
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Traces out every subsystem whose `keep` flag is false.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[bool]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    check_same_dim(total, m.nrows())?;
    if keep.len() != dims.len() {
        return Err(Error::invalid("keep mask length differs from number of subsystems"));
    }
    let kept_dims: Vec<usize> =
        dims.iter().zip(keep).filter(|(_, &k)| k).map(|(&d, _)| d).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    let n = dims.len();
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    let flatten = |d: &[usize]| -> usize {
        let mut idx = 0;
        for k in 0..n {
            if keep[k] {
                idx = idx * dims[k] + d[k];
            }
        }
        idx
    };
    for i in 0..total {
        digits(i, dims, &mut di);
        for j in 0..total {
            digits(j, dims, &mut dj);
            if (0..n).all(|k| keep[k] || di[k] == dj[k]) {
                out[(flatten(&di), flatten(&dj))] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    check_same_dim(total, m.nrows())?;
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::invalid("not a permutation of the subsystems"));
        }
        seen[p] = true;
    }
    if perm.len() != dims.len() {
        return Err(Error::invalid("not a permutation of the subsystems"));
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut od = vec![0; dims.len()];
    let mut id = vec![0; dims.len()];
    let map: Vec<usize> = (0..total)
        .map(|o| {
            digits(o, &out_dims, &mut od);
            for (k, &p) in perm.iter().enumerate() {
                id[p] = od[k];
            }
            id.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
        })
        .collect();
    Ok(CMatrix::from_fn(total, total, |i, j| m[(map[i], map[j])]))
}
