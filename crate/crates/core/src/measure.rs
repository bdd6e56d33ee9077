//! Measurements and their error functionals.

use std::f64::consts::PI;

use rand::Rng as _;
use rayon::prelude::*;

use crate::ensemble::CqEnsemble;
use crate::error::{Error, Result};
use crate::info::{golden_max, petz_divergence, RenyiOrder};
use crate::integrals::{dlog, dlog_on_support};
use crate::linalg::{
    check_same_dim, kron_all, noncommutative_min, partial_trace, positivity_band, trace_product, CMatrix,
    DensityOp, HermitianOp, PsdOp,
};
use crate::random::{random_cq_ensemble, random_density, random_psd, RngSeed};

/// Slack on `sum of effects <= I`.
pub const POVM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<PsdOp>,
}

impl Povm {
    pub fn new(effects: Vec<PsdOp>) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::invalid("a POVM needs at least one effect"))?;
        let dim = first.dim();
        let mut total = HermitianOp::zeros(dim);
        for e in &effects {
            check_same_dim(dim, e.dim())?;
            total = &total + e.as_hermitian();
        }
        let slack = (&HermitianOp::identity(dim) - &total).min_eigenvalue();
        if slack < -POVM_TOL {
            return Err(Error::invalid(format!("effects sum above the identity by {:.3e}", -slack)));
        }
        Ok(Self { effects })
    }

    fn from_hermitian(effects: Vec<HermitianOp>) -> Result<Self> {
        Self::new(effects.into_iter().map(PsdOp::new).collect::<Result<_>>()?)
    }

    pub fn effects(&self) -> &[PsdOp] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// `I - sum of effects`, the implicit outcome.
    pub fn completion(&self) -> HermitianOp {
        self.effects.iter().fold(HermitianOp::identity(self.dim()), |acc, e| &acc - e.as_hermitian())
    }
}

/// `T = {A > B} + delta {A = B}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelstromTest {
    pub base: PsdOp,
    pub delta: f64,
}

impl HelstromTest {
    /// `Tr[A (I - T)] + Tr[B T]`.
    pub fn error(&self, a: &PsdOp, b: &PsdOp) -> f64 {
        a.trace() - a.trace_with(&self.base) + b.trace_with(&self.base)
    }
}

/// `Tr[A ^ B] = (Tr[A + B] - ||A - B||_1) / 2`.
pub fn helstrom_error(a: &PsdOp, b: &PsdOp) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(0.5 * (a.trace() + b.trace() - (&**a - &**b).trace_norm()))
}

pub fn helstrom_test(a: &PsdOp, b: &PsdOp, delta: f64) -> Result<HelstromTest> {
    check_same_dim(a.dim(), b.dim())?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid("tie-breaking weight must lie in [0, 1]"));
    }
    let es = (&**a - &**b).eig();
    let band = positivity_band(&es);
    let t = es.compose(|v| {
        if v > band {
            1.0
        } else if v >= -band {
            delta
        } else {
            0.0
        }
    });
    Ok(HelstromTest { base: PsdOp::from_trusted(HermitianOp::hermitized(t)), delta })
}

/// Points used by [`chernoff_bound`] when no grid is given.
pub const CHERNOFF_GRID: usize = 101;

/// `min_alpha Tr[A^alpha B^(1-alpha)]` over a grid in `[0, 1]`, with
/// `A^0` the support projection. Returns `(bound, argmin)`.
pub fn chernoff_bound(a: &PsdOp, b: &PsdOp, grid: Option<&[f64]>) -> Result<(f64, f64)> {
    check_same_dim(a.dim(), b.dim())?;
    let default: Vec<f64>;
    let grid = match grid {
        Some(g) => g,
        None => {
            default = (0..CHERNOFF_GRID).map(|i| i as f64 / (CHERNOFF_GRID - 1) as f64).collect();
            &default
        }
    };
    let mut best = (f64::INFINITY, 0.0);
    for &al in grid {
        if !(0.0..=1.0).contains(&al) {
            return Err(Error::invalid("Chernoff grid must lie in [0, 1]"));
        }
        let v = trace_product(a.power(al).matrix(), b.power(1.0 - al).matrix()).re.max(0.0);
        if v < best.0 {
            best = (v, al);
        }
    }
    Ok(best)
}

fn power_terms(ens: &CqEnsemble, alpha: f64) -> (Vec<PsdOp>, PsdOp) {
    let terms: Vec<PsdOp> = (0..ens.len()).map(|x| ens.weighted(x).power(alpha)).collect();
    let s = terms.iter().fold(PsdOp::zeros(ens.dim()), |acc, t| acc.add(t));
    (terms, s)
}

/// Effects `S^{-1/2} (p(x) rho^x)^alpha S^{-1/2}` with `S = sum_x (p(x) rho^x)^alpha`.
pub fn conventional_pgm(ens: &CqEnsemble, alpha: f64) -> Result<Povm> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("PGM power must be positive"));
    }
    let (terms, s) = power_terms(ens, alpha);
    let inv_sqrt = s.power(-0.5);
    Povm::new(terms.iter().map(|t| t.sandwich(inv_sqrt.matrix())).collect())
}

/// Effects `D log[S]((p(x) rho^x)^alpha)` on the support of `S`.
pub fn integral_pgm(ens: &CqEnsemble, alpha: f64) -> Result<Povm> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("PGM power must be positive"));
    }
    let (terms, s) = power_terms(ens, alpha);
    Povm::from_hermitian(terms.iter().map(|t| dlog_on_support(&s, t)).collect::<Result<_>>()?)
}

/// `1 - sum_x p(x) Tr[rho^x M_{label(x)}]`; the identity labelling when `label_map` is `None`.
pub fn povm_error(ens: &CqEnsemble, m: &Povm, label_map: Option<&[usize]>) -> Result<f64> {
    check_same_dim(ens.dim(), m.dim())?;
    let labels: Vec<usize> = match label_map {
        Some(l) => l.to_vec(),
        None => (0..ens.len()).collect(),
    };
    if labels.len() != ens.len() {
        return Err(Error::LabelMismatch(format!("{} labels for {} letters", labels.len(), ens.len())));
    }
    if label_map.is_none() && m.len() != ens.len() {
        return Err(Error::LabelMismatch(format!("{} effects for {} letters", m.len(), ens.len())));
    }
    let mut success = 0.0;
    for (x, p, rho) in ens.support() {
        let e = m.effects().get(labels[x]).ok_or_else(|| {
            Error::LabelMismatch(format!("letter {x} mapped to missing effect {}", labels[x]))
        })?;
        success += p * rho.trace_with(e);
    }
    Ok(1.0 - success)
}

/// `(Q~_2, Q°_2)` of `rho_XB` against `I_X (x) rho_bar`, computed letter by letter.
pub fn collision_quantities(ens: &CqEnsemble) -> Result<(f64, f64)> {
    let avg = ens.average();
    let quarter = avg.power(-0.25);
    let mut sand = 0.0;
    let mut int = 0.0;
    for (x, _, _) in ens.support() {
        let a = ens.weighted(x);
        let m = a.sandwich(quarter.matrix());
        sand += trace_product(m.matrix(), m.matrix()).re;
        int += a.trace_with(&dlog_on_support(&avg, &a)?);
    }
    Ok((sand, int))
}

/// `((1-a)/a) pi / sin(((1-a)/a) pi)`, with `c1(1) = 1` and `+inf` at `a <= 1/2`.
pub fn c1(alpha: f64) -> f64 {
    let s = (1.0 - alpha) / alpha;
    if s == 0.0 {
        1.0
    } else if s >= 1.0 {
        f64::INFINITY
    } else {
        s * PI / (s * PI).sin()
    }
}

/// `kappa_a a / (1 - a)`, `kappa_a = (2a)^(-1/a) (1 - 1/(2a))^(2 - 1/a)`,
/// with `c2(1/2) = 1` and `c2(1) = +inf`.
pub fn c2(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return f64::INFINITY;
    }
    if alpha <= 0.5 {
        return 1.0;
    }
    let kappa = (2.0 * alpha).powf(-1.0 / alpha) * (1.0 - 1.0 / (2.0 * alpha)).powf(2.0 - 1.0 / alpha);
    kappa * alpha / (1.0 - alpha)
}

pub fn c_alpha(alpha: f64) -> f64 {
    c1(alpha).min(c2(alpha))
}

/// `(alpha*, max_alpha c_alpha)` over `[1/2, 1]`.
pub fn c_alpha_sup() -> (f64, f64) {
    golden_max(0.5, 1.0, 1e-12, &mut |a| Ok(c_alpha(a))).expect("infallible objective")
}

#[derive(Clone, Debug, PartialEq)]
pub struct TiltingReport {
    pub alpha: f64,
    /// `Tr[A B^a / (A^a + B^a)]`.
    pub lhs: f64,
    /// `Tr[A^a B^(1-a)]`.
    pub rhs_core: f64,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    pub margin: f64,
}

pub fn tilting_report(a: &PsdOp, b: &PsdOp, alpha: f64) -> Result<TiltingReport> {
    check_same_dim(a.dim(), b.dim())?;
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::invalid("tilting order must lie in [1/2, 1]"));
    }
    let aa = a.power(alpha);
    let ba = b.power(alpha);
    let lhs = match dlog_on_support(&aa.add(&ba), &ba) {
        Ok(q) => a.trace_with(&q),
        Err(Error::EmptySupport) => 0.0,
        Err(e) => return Err(e),
    };
    let rhs_core = trace_product(aa.matrix(), b.power(1.0 - alpha).matrix()).re;
    let (k1, k2) = (c1(alpha), c2(alpha));
    let c = k1.min(k2);
    Ok(TiltingReport { alpha, lhs, rhs_core, c1: k1, c2: k2, c, margin: c * rhs_core - lhs })
}

/// Worst margin of one inequality across a suite run.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub worst_margin: f64,
    pub evaluations: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub trials: usize,
    pub checks: Vec<InequalityCheck>,
    /// Largest observed `lhs / rhs_core` in the tilting inequality.
    pub max_tilting_ratio: f64,
}

impl InequalityReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

/// Margin below which an inequality counts as violated.
pub const SUITE_TOL: f64 = -1e-9;

pub const SUITE_CHECKS: [&str; 9] = [
    "audenaert",
    "araki_tilting_step",
    "araki_generic",
    "beigi_tomamichel",
    "operator_jensen",
    "quotient_below_min",
    "collision_sandwiched_vs_integral",
    "petz_monotone_in_alpha",
    "tilting",
];

fn alpha_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 + 0.5 * i as f64 / (n - 1) as f64).collect()
}

fn min_eig(x: &HermitianOp) -> f64 {
    x.min_eigenvalue()
}

struct Trial {
    margins: [Vec<f64>; 9],
    ratio: f64,
}

fn run_trial(seed: RngSeed, dims: &[usize]) -> Result<Trial> {
    let mut rng = seed.rng();
    let dim = dims[rng.random_range(0..dims.len())];
    let grid = alpha_grid(11);
    let mut m: [Vec<f64>; 9] = Default::default();

    let a = random_psd(dim, &mut rng);
    let b = random_psd(dim, &mut rng);
    let (a, b) = (a.scale(1.0 / a.trace()), b.scale(rng.random_range(0.1..2.0) / b.trace()));

    for &al in &grid {
        let aa = a.power(al);
        let ba = b.power(al);
        let p = (&*ba - &*aa).positive_projection();
        let left = a.trace_with(&p);
        let right = trace_product(&(aa.matrix() * b.power(1.0 - al).matrix()), p.matrix()).re;
        m[0].push(right - left);
    }

    for &al in &grid[1..] {
        let s = 1.0 / al - 1.0;
        let t = 10f64.powf(rng.random_range(-1.0..1.0));
        let es = a.eig();
        let c = PsdOp::from_trusted(HermitianOp::hermitized(es.compose(|v| 1.0 / (t + v.max(0.0).powf(al)))));
        let g = HermitianOp::hermitized(es.compose(|v| v.max(0.0) / (t + v.max(0.0).powf(al))));
        let inner = b.power(al).sandwich(c.power(0.5).matrix()).power(s);
        let left = g.trace_with(&inner);
        let right = trace_product(&(g.matrix() * c.power(s).matrix()), b.power(al * s).matrix()).re;
        m[1].push(right - left);
    }

    {
        let x = random_psd(dim, &mut rng).add(&PsdOp::identity(dim).scale(0.01));
        let y = random_psd(dim, &mut rng);
        let s: f64 = rng.random_range(0.0..1.0);
        let k: f64 = rng.random_range(0.0..2.0);
        let es = x.eig();
        let g = HermitianOp::hermitized(es.compose(|v| v.powf(-s) * (-k * v).exp()));
        let h = HermitianOp::hermitized(es.compose(|v| (-k * v).exp()));
        let left = g.trace_with(&y.sandwich(x.power(0.5).matrix()).power(s));
        let right = h.trace_with(&y.power(s));
        m[2].push(right - left);
    }

    {
        let full = a.add(&PsdOp::identity(dim).scale(1e-3));
        let diff = &dlog(&full, &b)? - &dlog(&full.add(&b), &b)?;
        m[3].push(min_eig(&diff));
    }

    {
        let db = 2;
        let y = random_psd(dim * db, &mut rng);
        let tau = random_density(db, &mut rng);
        let id = CMatrix::identity(dim, dim);
        for &al in &grid {
            let s = (1.0 - al) / al;
            let ta = kron_all([&id, tau.power(al).matrix()]);
            let tb = kron_all([&id, tau.power(1.0 - al).matrix()]);
            let left = partial_trace(&(ta * y.power(s).matrix()), &[dim, db], &[true, false])?;
            let right = partial_trace(&(y.matrix() * tb), &[dim, db], &[true, false])?;
            let right = PsdOp::new(HermitianOp::hermitized(right))?.power(s);
            m[4].push(min_eig(&(&*right - &HermitianOp::hermitized(left))));
        }
    }

    {
        let meet = noncommutative_min(&a, &b)?.trace();
        let quotient = dlog_on_support(&a.add(&b), &b)?;
        m[5].push(meet - a.trace_with(&quotient));
    }

    {
        let k = rng.random_range(2..=3);
        let ens = random_cq_ensemble(k, dim, &mut rng);
        let (sand, int) = collision_quantities(&ens)?;
        m[6].push(sand - int);
    }

    {
        let ra = DensityOp::normalize(&a)?;
        let rb = DensityOp::normalize(&b)?;
        let mut last = f64::NEG_INFINITY;
        for i in 1..=20 {
            let v = petz_divergence(&ra, &rb, RenyiOrder::new(i as f64 / 20.0)?)?;
            m[7].push(v - last.max(f64::MIN));
            last = v;
        }
        m[7].remove(0);
    }

    let mut ratio: f64 = 0.0;
    for &al in &alpha_grid(21) {
        let r = tilting_report(&a, &b, al)?;
        m[8].push(r.margin);
        if r.rhs_core > 0.0 {
            ratio = ratio.max(r.lhs / r.rhs_core);
        }
    }
    Ok(Trial { margins: m, ratio })
}

/// Evaluates every inequality of [`SUITE_CHECKS`] on `trials` seeded random
/// instances whose dimension is drawn from `dims`.
pub fn inequality_suite(seed: RngSeed, trials: usize, dims: &[usize]) -> Result<InequalityReport> {
    if trials == 0 || dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid("inequality suite needs trials >= 1 and positive dimensions"));
    }
    let results: Vec<Result<Trial>> =
        (0..trials as u64).into_par_iter().map(|i| run_trial(seed.derive(i), dims)).collect();
    let mut checks: Vec<InequalityCheck> = SUITE_CHECKS
        .iter()
        .map(|&name| InequalityCheck { name, worst_margin: f64::INFINITY, evaluations: 0, violations: 0 })
        .collect();
    let mut max_ratio: f64 = 0.0;
    for r in results {
        let t = r?;
        for (check, margins) in checks.iter_mut().zip(&t.margins) {
            for &v in margins {
                check.evaluations += 1;
                check.worst_margin = check.worst_margin.min(v);
                if !(v >= SUITE_TOL) {
                    check.violations += 1;
                }
            }
        }
        max_ratio = max_ratio.max(t.ratio);
    }
    Ok(InequalityReport { trials, checks, max_tilting_ratio: max_ratio })
}
