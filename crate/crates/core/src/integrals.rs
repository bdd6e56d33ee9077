//! The derivative of the operator logarithm and its integral representations.
//!
//! [`dlog`] evaluates `D log[A](B)` in closed form through divided
//! differences in the eigenbasis of `A`. Everything else in this module
//! computes the same operator (or a close relative) by quadrature, either
//! over Lieb's resolvent integral or over spectral projections `{B - uA > 0}`.
//!
//! Projection integrands jump exactly where `B - uA` is singular. In
//! [`LayerCakeMode::PanelExact`] those points are read off the spectrum of
//! `A^{-1/2} B A^{-1/2}` and the range is split there, so every piece is
//! analytic and Gauss-Legendre converges geometrically. In
//! [`LayerCakeMode::Refinement`] the jumps are found blindly by bisecting on
//! changes in the number of positive eigenvalues of `B - uA`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    check_same_dim, CMatrix, EigenSystem, HermitianOp, PsdOp,
    SUPPORT_CUTOFF,
};
use crate::quadrature::{breakpoints, integrate_pieces, locate_jumps, AdaptiveConfig};
use crate::scalar::ScalarFn;

/// Relative width of the band in which divided differences use the series
/// around the diagonal.
pub const DD_BAND: f64 = 1e-8;

/// Relative tolerance used on the analytic pieces in panel-exact mode.
const PANEL_EXACT_REL_ERR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// `r = ||A^{-1/2} B A^{-1/2}||_inf`, beyond which every projection vanishes.
    Auto,
    Radius(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub truncation: Truncation,
    pub base_nodes: usize,
    pub max_refinements: usize,
    pub target_rel_err: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { truncation: Truncation::Auto, base_nodes: 2048, max_refinements: 12, target_rel_err: 1e-7 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.base_nodes < 16 {
            return Err(Error::invalid("base_nodes must be at least 16"));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(Error::invalid("target_rel_err must be positive"));
        }
        if let Truncation::Radius(r) = self.truncation {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::invalid("truncation radius must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    fn adaptive(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            base_panels: (self.base_nodes / 16).max(1),
            max_refinements: self.max_refinements,
            target_rel_err: self.target_rel_err,
            abs_floor: 1e-15,
        }
    }

    fn exact(&self, pieces: usize) -> AdaptiveConfig {
        AdaptiveConfig {
            base_panels: 2 * pieces,
            max_refinements: self.max_refinements + 8,
            target_rel_err: self.target_rel_err.min(PANEL_EXACT_REL_ERR),
            abs_floor: 1e-15,
        }
    }
}

/// How projection-valued integrands are split before quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LayerCakeMode {
    /// Split at the known jump points and integrate the analytic pieces.
    #[default]
    PanelExact,
    /// Locate the jump points by inertia bisection.
    Refinement,
}

/// `(ln x - ln y) / (x - y)`, with `1/x` as the diagonal limit.
pub fn divided_difference(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() <= DD_BAND * x.max(y) {
        let t = d / y;
        (1.0 - t / 2.0 + t * t / 3.0) / y
    } else {
        (d / y).ln_1p() / d
    }
}

fn full_support_eig(a: &PsdOp) -> Result<EigenSystem> {
    let es = a.eig();
    let min = es.values()[0];
    if es.op_norm() == 0.0 || min <= SUPPORT_CUTOFF * es.op_norm() {
        return Err(Error::SingularBase { min_eigenvalue: min });
    }
    Ok(es)
}

fn to_basis(es: &EigenSystem, m: &CMatrix) -> CMatrix {
    es.vectors().adjoint() * m * es.vectors()
}

fn from_basis(es: &EigenSystem, m: &CMatrix) -> HermitianOp {
    HermitianOp::hermitized(es.vectors() * m * es.vectors().adjoint())
}

/// `D log[A](B)` for full-support `A`.
pub fn dlog(a: &PsdOp, b: &HermitianOp) -> Result<HermitianOp> {
    check_same_dim(a.dim(), b.dim())?;
    let es = full_support_eig(a)?;
    let lam = es.values();
    let mut m = to_basis(&es, b.matrix());
    for i in 0..lam.len() {
        for j in 0..lam.len() {
            m[(i, j)] *= divided_difference(lam[i], lam[j]);
        }
    }
    Ok(from_basis(&es, &m))
}

/// Isometry onto the support of `s`, as a `dim x rank` matrix.
pub(crate) fn support_isometry(s: &PsdOp) -> Result<CMatrix> {
    let es = s.eig();
    let cut = SUPPORT_CUTOFF * es.op_norm();
    let v = es.isometry(|x| x > cut);
    if v.ncols() == 0 {
        return Err(Error::EmptySupport);
    }
    Ok(v)
}

/// `D log[A](B)` computed on `supp(A)` and padded with zeros elsewhere.
pub fn dlog_on_support(a: &PsdOp, b: &HermitianOp) -> Result<HermitianOp> {
    check_same_dim(a.dim(), b.dim())?;
    let v = support_isometry(a)?;
    let inner = dlog(&a.congruence(&v), &b.congruence(&v))?;
    Ok(inner.sandwich(&v))
}

/// Lieb's formula `int_0^inf (A+t)^{-1} B (A+t)^{-1} dt`, integrated in
/// `s = t / (1 + t)`.
pub fn dlog_lieb_quadrature(a: &PsdOp, b: &HermitianOp, q: &QuadratureSpec) -> Result<HermitianOp> {
    q.validate()?;
    check_same_dim(a.dim(), b.dim())?;
    let es = full_support_eig(a)?;
    let lam = es.values().to_vec();
    let bt = to_basis(&es, b.matrix());
    let n = lam.len();
    // with t = s/(1-s): (lam+t)^{-1} (mu+t)^{-1} dt/ds = 1 / ((lam(1-s)+s)(mu(1-s)+s))
    let f = |s: f64| {
        let w: Vec<f64> = lam.iter().map(|&l| 1.0 / (l * (1.0 - s) + s)).collect();
        CMatrix::from_fn(n, n, |i, j| bt[(i, j)] * (w[i] * w[j]))
    };
    let pts = breakpoints(0.0, 1.0, lam.iter().map(|&l| l / (1.0 + l)));
    let r = integrate_pieces(f, &pts, &q.adaptive())?;
    Ok(from_basis(&es, &r.value))
}

/// `A^{-1/2}` for full-support `A`.
fn inv_sqrt(es: &EigenSystem) -> CMatrix {
    es.compose(|x| 1.0 / x.sqrt())
}

/// Spectrum of `A^{-1/2} B A^{-1/2}`: the points where `B - uA` is singular.
pub fn relative_spectrum(a: &PsdOp, b: &HermitianOp) -> Result<Vec<f64>> {
    check_same_dim(a.dim(), b.dim())?;
    let es = full_support_eig(a)?;
    Ok(b.sandwich(&inv_sqrt(&es)).eig().values().to_vec())
}

/// Zero band for the projection-valued integrands, at eigensolver rounding level.
const INTEGRAND_BAND: f64 = 64.0 * f64::EPSILON;

fn projection(x: CMatrix) -> CMatrix {
    let es = HermitianOp::hermitized(x).eig();
    let band = INTEGRAND_BAND * es.op_norm();
    es.spectral_projector(|v| v > band)
}

fn positive_count(x: CMatrix) -> usize {
    let es = HermitianOp::hermitized(x).eig();
    let band = INTEGRAND_BAND * es.op_norm();
    es.values().iter().filter(|&&v| v > band).count()
}

fn jump_points(
    mode: LayerCakeMode,
    spectral: impl FnOnce() -> Result<Vec<f64>>,
    count: &(impl Fn(f64) -> usize + Sync),
    lo: f64,
    hi: f64,
    q: &QuadratureSpec,
) -> Result<Vec<f64>> {
    match mode {
        LayerCakeMode::PanelExact => spectral(),
        LayerCakeMode::Refinement => {
            let width = 1e-3 * q.target_rel_err * (hi - lo);
            Ok(locate_jumps(count, lo, hi, (q.base_nodes / 16).max(1), width))
        }
    }
}

fn integrate_projections(
    f: impl Fn(f64) -> CMatrix + Sync,
    pts: &[f64],
    mode: LayerCakeMode,
    q: &QuadratureSpec,
) -> Result<CMatrix> {
    let cfg = match mode {
        LayerCakeMode::PanelExact => q.exact(pts.len() - 1),
        LayerCakeMode::Refinement => q.adaptive(),
    };
    Ok(integrate_pieces(f, pts, &cfg)?.value)
}

/// `int_0^inf {uA < B} du - int_{-inf}^0 {uA > B} du`, panel-exact.
pub fn layercake(a: &PsdOp, b: &HermitianOp, q: &QuadratureSpec) -> Result<HermitianOp> {
    layercake_with(a, b, q, LayerCakeMode::PanelExact)
}

pub fn layercake_with(
    a: &PsdOp,
    b: &HermitianOp,
    q: &QuadratureSpec,
    mode: LayerCakeMode,
) -> Result<HermitianOp> {
    q.validate()?;
    let spec = relative_spectrum(a, b)?;
    let norm = spec.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r = match q.truncation {
        Truncation::Auto => norm,
        Truncation::Radius(r) => r,
    };
    let (lo, hi) = match (mode, q.truncation) {
        (LayerCakeMode::PanelExact, Truncation::Auto) => (spec[0].min(0.0), spec[spec.len() - 1].max(0.0)),
        _ => (-r, r),
    };
    if hi - lo <= 0.0 {
        return Ok(HermitianOp::zeros(a.dim()));
    }
    let am = a.matrix().clone();
    let bm = b.matrix().clone();
    let shifted = |u: f64| &bm - &am * Complex64::new(u, 0.0);
    let f = |u: f64| {
        if u >= 0.0 {
            projection(shifted(u))
        } else {
            -projection(-shifted(u))
        }
    };
    let count = |u: f64| positive_count(shifted(u));
    let jumps = jump_points(mode, || Ok(spec.clone()), &count, lo, hi, q)?;
    let pts = breakpoints(lo, hi, jumps.into_iter().chain([0.0]));
    Ok(HermitianOp::hermitized(integrate_projections(f, &pts, mode, q)?))
}

/// `int_0^1 {uA < (1-u)B} du` on `supp(A + B)`, panel-exact.
pub fn extremal_decomposition(a: &PsdOp, b: &PsdOp, q: &QuadratureSpec) -> Result<HermitianOp> {
    extremal_decomposition_with(a, b, q, LayerCakeMode::PanelExact)
}

pub fn extremal_decomposition_with(
    a: &PsdOp,
    b: &PsdOp,
    q: &QuadratureSpec,
    mode: LayerCakeMode,
) -> Result<HermitianOp> {
    q.validate()?;
    check_same_dim(a.dim(), b.dim())?;
    let v = support_isometry(&a.add(b))?;
    let ar = a.congruence(&v);
    let br = b.congruence(&v);
    let am = ar.matrix().clone();
    let bm = br.matrix().clone();
    let shifted = |u: f64| &bm * Complex64::new(1.0 - u, 0.0) - &am * Complex64::new(u, 0.0);
    let f = |u: f64| projection(shifted(u));
    let count = |u: f64| positive_count(shifted(u));
    let jumps = jump_points(mode, || relative_spectrum(&ar.add(&br), &br), &count, 0.0, 1.0, q)?;
    let pts = breakpoints(0.0, 1.0, jumps);
    let inner = HermitianOp::hermitized(integrate_projections(f, &pts, mode, q)?);
    Ok(inner.sandwich(&v))
}

/// `B / (A + B) := D log[A + B](B)` on `supp(A + B)`.
pub fn integral_quotient(a: &PsdOp, b: &PsdOp) -> Result<HermitianOp> {
    check_same_dim(a.dim(), b.dim())?;
    dlog_on_support(&a.add(b), b)
}

/// Both sides of the operator change of variables for a scalar weight `h`.
#[derive(Clone, Debug)]
pub struct ChangeOfVariables {
    pub lhs: HermitianOp,
    pub rhs: HermitianOp,
    pub gap: f64,
}

/// `int_0^r {B > gA} h(g) dg` against
/// `int_0^inf (A+t)^{-1/2} Q_t h(Q_t) (A+t)^{-1/2} dt` with
/// `Q_t = (A+t)^{-1/2} B (A+t)^{-1/2}`.
pub fn change_of_variables_check(
    a: &PsdOp,
    b: &PsdOp,
    h: &ScalarFn,
    q: &QuadratureSpec,
) -> Result<ChangeOfVariables> {
    q.validate()?;
    let spec = relative_spectrum(a, b)?;
    let r = match q.truncation {
        Truncation::Auto => spec[spec.len() - 1].max(0.0),
        Truncation::Radius(r) => r,
    };
    let dim = a.dim();
    let knots: Vec<f64> = match h {
        ScalarFn::Table(t) => t.knots().to_vec(),
        _ => Vec::new(),
    };

    let lhs = if r > 0.0 {
        let am = a.matrix().clone();
        let bm = b.matrix().clone();
        let f = |g: f64| projection(&bm - &am * Complex64::new(g, 0.0)) * Complex64::new(h.eval(g), 0.0);
        let pts = breakpoints(0.0, r, spec.iter().copied().chain(knots.iter().copied()));
        HermitianOp::hermitized(integrate_pieces(f, &pts, &q.exact(pts.len() - 1))?.value)
    } else {
        HermitianOp::zeros(dim)
    };

    let es = full_support_eig(a)?;
    let lam = es.values().to_vec();
    let bt = to_basis(&es, b.matrix());
    let g = |s: f64| -> CMatrix {
        let t = s / (1.0 - s);
        let c: Vec<Complex64> = lam.iter().map(|&l| Complex64::new(1.0 / (l + t).sqrt(), 0.0)).collect();
        let qt = CMatrix::from_fn(dim, dim, |i, j| c[i] * bt[(i, j)] * c[j]);
        let qes = HermitianOp::hermitized(qt).eig();
        let inner = qes.compose(|x| {
            let x = x.max(0.0);
            x * h.eval(x)
        });
        let jac = 1.0 / ((1.0 - s) * (1.0 - s));
        CMatrix::from_fn(dim, dim, |i, j| c[i] * inner[(i, j)] * c[j] * Complex64::new(jac, 0.0))
    };
    let pts = breakpoints(0.0, 1.0, lam.iter().map(|&l| l / (1.0 + l)));
    let mut cfg = q.adaptive();
    cfg.target_rel_err = cfg.target_rel_err.min(1e-9);
    cfg.max_refinements = cfg.max_refinements.max(20);
    let rhs = from_basis(&es, &integrate_pieces(g, &pts, &cfg)?.value);

    let diff = (&lhs - &rhs).op_norm();
    let gap = diff / lhs.op_norm().max(1.0);
    Ok(ChangeOfVariables { lhs, rhs, gap })
}

/// `int_0^1 Tr[A {uA < B}] du` for a Hermitian pair.
///
/// The integral telescopes to `Tr[B_+] - Tr[(B - A)_+]`, which is
/// `Tr[A ^ B]` whenever `B >= 0`.
pub fn tracial_min_integral(a: &HermitianOp, b: &HermitianOp, q: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    check_same_dim(a.dim(), b.dim())?;
    let am = a.matrix().clone();
    let bm = b.matrix().clone();
    let shifted = |u: f64| &bm - &am * Complex64::new(u, 0.0);
    let f = |u: f64| crate::linalg::trace_product(&am, &projection(shifted(u))).re;
    let count = |u: f64| positive_count(shifted(u));

    let spectral = PsdOp::new(a.clone()).ok().and_then(|p| relative_spectrum(&p, b).ok());
    let (jumps, cfg) = match spectral {
        Some(s) => (s, q.exact(a.dim() + 1)),
        None => {
            // indefinite or singular A: bracket the changes in inertia on a fine grid
            let grid = (q.base_nodes / 4).max(64);
            (locate_jumps(&count, 0.0, 1.0, grid, 1e-13), q.exact(grid))
        }
    };
    let pts = breakpoints(0.0, 1.0, jumps);
    let mut cfg = cfg;
    cfg.base_panels = cfg.base_panels.max(2 * (pts.len() - 1));
    Ok(integrate_pieces(f, &pts, &cfg)?.value)
}
