//! Petz-Renyi divergences and the information quantities built on them.
//!
//! Logarithms are base 2 throughout. Order `alpha = 1` always goes through
//! the von Neumann formulas rather than a numerical limit.

use crate::ensemble::{BipartiteState, CqEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{kron_all, partial_trace, trace_product, CMatrix, DensityOp, HermitianOp, PsdOp};
use crate::scalar::ScalarFn;

/// Support overlap below which two operators count as orthogonal.
const ORTHOGONAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("Renyi order {alpha} outside (0, 1]")));
        }
        Ok(Self(alpha))
    }

    pub const ONE: RenyiOrder = RenyiOrder(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for RenyiOrder {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        RenyiOrder::new(alpha)
    }
}

fn check_dims(a: &PsdOp, b: &PsdOp) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

fn log2_on_support(a: &PsdOp) -> HermitianOp {
    a.apply_fn(&ScalarFn::Log2).expect("logarithm of a PSD operator is defined on its support")
}

/// `Tr[A (1 - P_B)] <= tol * Tr[A]`.
pub fn support_contained(a: &PsdOp, b: &PsdOp) -> bool {
    let p = b.support_projector();
    let outside = a.trace() - a.trace_with(&p);
    outside <= 1e-10 * a.trace().max(f64::MIN_POSITIVE)
}

/// `Tr[A^alpha B^(1-alpha)]`.
pub fn petz_quasi(a: &PsdOp, b: &PsdOp, alpha: f64) -> f64 {
    trace_product(a.power(alpha).matrix(), b.power(1.0 - alpha).matrix()).re
}

/// `D_alpha(A || B)` in bits; `+inf` for orthogonal supports (`alpha < 1`) or
/// when `supp(A)` is not inside `supp(B)` (`alpha = 1`).
pub fn petz_divergence(a: &PsdOp, b: &PsdOp, alpha: RenyiOrder) -> Result<f64> {
    check_dims(a, b)?;
    if a.trace() <= 0.0 {
        return Err(Error::invalid("first argument of the divergence is zero"));
    }
    if alpha.is_one() {
        if !support_contained(a, b) {
            return Ok(f64::INFINITY);
        }
        let diff = &log2_on_support(a) - &log2_on_support(b);
        return Ok(a.trace_with(&diff));
    }
    let overlap = a.support_projector().trace_with(&b.support_projector());
    if overlap <= ORTHOGONAL_TOL {
        return Ok(f64::INFINITY);
    }
    let q = petz_quasi(a, b, alpha.value());
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.log2() / (alpha.value() - 1.0))
}

/// `V(rho || sigma) = Tr[rho (log rho - log sigma)^2] - D_1(rho || sigma)^2`.
pub fn relative_entropy_variance(rho: &DensityOp, sigma: &DensityOp) -> Result<f64> {
    check_dims(rho, sigma)?;
    if !support_contained(rho, sigma) {
        return Err(Error::SupportViolation("supp(rho) is not contained in supp(sigma)".into()));
    }
    let l = &log2_on_support(rho) - &log2_on_support(sigma);
    let d = rho.trace_with(&l);
    let second = trace_product(rho.matrix(), &(l.matrix() * l.matrix())).re;
    Ok(second - d * d)
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &PsdOp) -> f64 {
    rho.eig().values().iter().filter(|&&v| v > 0.0).map(|v| -v * v.log2()).sum()
}

/// A value together with the state attaining it.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub value: f64,
    pub minimizer: DensityOp,
}

fn normalized(t: PsdOp) -> DensityOp {
    DensityOp::normalize(&t).expect("power mean of a nonzero ensemble is nonzero")
}

/// `I_alpha(X:B)` through the closed-form minimizer
/// `(sum_x p(x) (rho^x)^alpha)^(1/alpha)`.
pub fn sibson_radius_info(ens: &CqEnsemble, alpha: RenyiOrder) -> Result<Optimized> {
    if alpha.is_one() {
        let avg = ens.average();
        return Ok(Optimized { value: holevo_information(ens)?, minimizer: avg });
    }
    let a = alpha.value();
    let mut s = PsdOp::zeros(ens.dim());
    for (_, p, rho) in ens.support() {
        s = s.add(&rho.power(a).scale(p));
    }
    let t = s.power(1.0 / a);
    let value = a / (a - 1.0) * t.trace().log2();
    Ok(Optimized { value, minimizer: normalized(t) })
}

/// `sum_x p(x) D_1(rho^x || rho_bar)`.
pub fn holevo_information(ens: &CqEnsemble) -> Result<f64> {
    let avg = ens.average();
    let mut total = 0.0;
    for (_, p, rho) in ens.support() {
        total += p * petz_divergence(rho, &avg, RenyiOrder::ONE)?;
    }
    Ok(total)
}

/// `H_alpha(X|B)` through the minimizer `(sum_x (p(x) rho^x)^alpha)^(1/alpha)`.
pub fn cond_renyi_entropy(ens: &CqEnsemble, alpha: RenyiOrder) -> Result<Optimized> {
    if alpha.is_one() {
        let value = ens.prior_entropy() - holevo_information(ens)?;
        return Ok(Optimized { value, minimizer: ens.average() });
    }
    let a = alpha.value();
    let mut s = PsdOp::zeros(ens.dim());
    for (x, _, _) in ens.support() {
        s = s.add(&ens.weighted(x).power(a));
    }
    let t = s.power(1.0 / a);
    let value = a / (1.0 - a) * t.trace().log2();
    Ok(Optimized { value, minimizer: normalized(t) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugustinOptions {
    /// Blend weight of the new iterate; 1 is undamped.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Switch to damping 0.5 after this many steps without a residual decrease.
    pub stall_window: usize,
}

impl Default for AugustinOptions {
    fn default() -> Self {
        Self { damping: 1.0, tol: 1e-10, max_iter: 10_000, stall_window: 5 }
    }
}

#[derive(Clone, Debug)]
pub struct AugustinResult {
    pub value: f64,
    pub mean: DensityOp,
    pub iterations: usize,
    pub residual: f64,
}

/// Augustin information `min_sigma sum_x p(x) D_alpha(rho^x || sigma)` by
/// iterating `sigma -> (sum_x p(x) 2^((1-alpha) D_alpha(rho^x||sigma)) (rho^x)^alpha)^(1/alpha)`
/// from the average state.
pub fn augustin_info(ens: &CqEnsemble, alpha: RenyiOrder, opts: &AugustinOptions) -> Result<AugustinResult> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::invalid("damping must lie in (0, 1]"));
    }
    if alpha.is_one() {
        return Ok(AugustinResult {
            value: holevo_information(ens)?,
            mean: ens.average(),
            iterations: 0,
            residual: 0.0,
        });
    }
    let a = alpha.value();
    let letters: Vec<(f64, &DensityOp, PsdOp)> =
        ens.support().map(|(_, p, rho)| (p, rho, rho.power(a))).collect();
    let mut sigma = ens.average();
    let mut damping = opts.damping;
    let mut residuals = Vec::new();
    let mut stalled = 0;
    for iter in 1..=opts.max_iter {
        let s_pow = sigma.power(1.0 - a);
        let mut acc = PsdOp::zeros(ens.dim());
        for (p, _, rho_a) in &letters {
            // 2^{(1-a) D_a(rho||sigma)} = 1 / Tr[rho^a sigma^(1-a)]
            let q = trace_product(rho_a.matrix(), s_pow.matrix()).re;
            acc = acc.add(&rho_a.scale(p / q));
        }
        let mapped = normalized(acc.power(1.0 / a));
        let next = if damping < 1.0 {
            normalized(mapped.scale(damping).add(&sigma.scale(1.0 - damping)))
        } else {
            mapped
        };
        let residual = (&**next - &**sigma).trace_norm();
        if residuals.last().is_some_and(|&r: &f64| residual >= r) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        residuals.push(residual);
        sigma = next;
        if residual <= opts.tol {
            let mut value = 0.0;
            for (p, rho, _) in &letters {
                value += p * petz_divergence(rho, &sigma, alpha)?;
            }
            return Ok(AugustinResult { value, mean: sigma, iterations: iter, residual });
        }
        if stalled >= opts.stall_window && damping > 0.5 {
            damping = 0.5;
            stalled = 0;
        }
    }
    Err(Error::DidNotConverge { residuals })
}

/// Entanglement-assisted information `I_alpha(R:B)` with the closed-form
/// minimizer over `sigma_B`.
pub fn ea_renyi_info(state: &BipartiteState, alpha: RenyiOrder) -> Result<Optimized> {
    let rho_r = state.marginal_r();
    let rho_b = state.marginal_b();
    if alpha.is_one() {
        let value = entropy(&rho_r) + entropy(&rho_b) - entropy(state.state());
        return Ok(Optimized { value, minimizer: rho_b });
    }
    let a = alpha.value();
    let (dr, db) = state.dims();
    let c = kron_all([rho_r.power((1.0 - a) / 2.0).matrix(), &CMatrix::identity(db, db)]);
    let inner = state.state().power(a).sandwich(&c);
    let x = partial_trace(inner.matrix(), &[dr, db], &[false, true])?;
    let x = PsdOp::from_trusted(HermitianOp::hermitized(x));
    let t = x.power(1.0 / a);
    let value = a / (a - 1.0) * t.trace().log2();
    Ok(Optimized { value, minimizer: normalized(t) })
}

/// `(I_1, V)` at the given input distribution.
pub fn dispersion_for_input(ens: &CqEnsemble) -> Result<(f64, f64)> {
    let avg = ens.average();
    let mut i1 = 0.0;
    let mut v = 0.0;
    for (_, p, rho) in ens.support() {
        if !support_contained(rho, &avg) {
            return Err(Error::SupportViolation("letter state leaves the average support".into()));
        }
        i1 += p * petz_divergence(rho, &avg, RenyiOrder::ONE)?;
        v += p * relative_entropy_variance(rho, &avg)?;
    }
    Ok((i1, v))
}

/// Both sides of `Tr[(sum p (rho^x)^a)^(1/a)] <= sum p Tr[(rho^x)^(2-1/a) rho_bar^((1-a)/a)]`.
pub fn hayashi_comparison(ens: &CqEnsemble, alpha: f64) -> (f64, f64) {
    let avg = ens.average();
    let mut s = PsdOp::zeros(ens.dim());
    let mut rhs = 0.0;
    let avg_pow = avg.power((1.0 - alpha) / alpha);
    for (_, p, rho) in ens.support() {
        s = s.add(&rho.power(alpha).scale(p));
        rhs += p * trace_product(rho.power(2.0 - 1.0 / alpha).matrix(), avg_pow.matrix()).re;
    }
    (s.power(1.0 / alpha).trace(), rhs)
}

/// Information function whose exponent curve is requested.
#[derive(Clone, Debug)]
pub enum InfoKind<'a> {
    /// `(1-a)/a [I_a(X:B) - R]`.
    Sibson(&'a CqEnsemble),
    /// `(1-a)/a [I^Aug_a - R]`.
    Augustin(&'a CqEnsemble, AugustinOptions),
    /// `(1-a)/a [R - H_a(X|B)]`.
    CondEntropyGap(&'a CqEnsemble),
    /// `(1-a)/a [I_a(R:B) - R]`.
    Ea(&'a BipartiteState),
}

impl InfoKind<'_> {
    /// `(sign, f(alpha))` with the objective `(1-a)/a * sign * (f(a) - R)`.
    fn sign(&self) -> f64 {
        match self {
            InfoKind::CondEntropyGap(_) => -1.0,
            _ => 1.0,
        }
    }

    fn eval(&self, alpha: f64) -> Result<f64> {
        let a = RenyiOrder::new(alpha)?;
        match self {
            InfoKind::Sibson(e) => Ok(sibson_radius_info(e, a)?.value),
            InfoKind::Augustin(e, o) => Ok(augustin_info(e, a, o)?.value),
            InfoKind::CondEntropyGap(e) => Ok(cond_renyi_entropy(e, a)?.value),
            InfoKind::Ea(s) => Ok(ea_renyi_info(s, a)?.value),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentCurve {
    pub rates: Vec<f64>,
    pub values: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// Number of grid points on `[1/2, 1]` before golden-section refinement.
pub const ALPHA_GRID: usize = 64;

/// Exponents at or below this are reported as exactly 0 with `alpha* = 1`.
pub const EXPONENT_FLOOR: f64 = 1e-13;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal-near-the-peak function on `[lo, hi]`.
pub(crate) fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: &mut impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// `E(R) = sup_{a in [1/2, 1]} (1-a)/a * sign * (f(a) - R)`, clipped at [`EXPONENT_FLOOR`].
pub fn exponent_curve_from(
    sign: f64,
    f: impl Fn(f64) -> Result<f64>,
    rates: &[f64],
) -> Result<ExponentCurve> {
    if rates.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("rates must be ascending"));
    }
    let grid: Vec<f64> = (0..ALPHA_GRID).map(|i| 0.5 + 0.5 * i as f64 / (ALPHA_GRID - 1) as f64).collect();
    let cached: Vec<f64> = grid.iter().map(|&a| f(a)).collect::<Result<_>>()?;
    let objective = |a: f64, fa: f64, r: f64| if a == 1.0 { 0.0 } else { (1.0 - a) / a * sign * (fa - r) };
    let mut values = Vec::with_capacity(rates.len());
    let mut alphas = Vec::with_capacity(rates.len());
    for &r in rates {
        let (best, _) = grid
            .iter()
            .zip(&cached)
            .enumerate()
            .map(|(i, (&a, &fa))| (i, objective(a, fa, r)))
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(ALPHA_GRID - 1)];
        let grid_val = objective(grid[best], cached[best], r);
        let (mut a_star, mut e) = (grid[best], grid_val);
        let (a_ref, e_ref) = golden_max(lo, hi, 1e-10, &mut |a| Ok(objective(a, f(a)?, r)))?;
        if e_ref > e {
            a_star = a_ref;
            e = e_ref;
        }
        if e <= EXPONENT_FLOOR {
            values.push(0.0);
            alphas.push(1.0);
        } else {
            values.push(e);
            alphas.push(a_star);
        }
    }
    Ok(ExponentCurve { rates: rates.to_vec(), values, alphas })
}

pub fn exponent_curve(kind: &InfoKind, rates: &[f64]) -> Result<ExponentCurve> {
    exponent_curve_from(kind.sign(), |a| kind.eval(a), rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_cq_ensemble, random_density, random_unit_vector, RngSeed};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn d(v: &[f64]) -> DensityOp {
        DensityOp::from_real_diagonal(v).unwrap()
    }

    fn ord(a: f64) -> RenyiOrder {
        RenyiOrder::new(a).unwrap()
    }

    fn orthogonal_pair() -> CqEnsemble {
        CqEnsemble::uniform(vec![d(&[1.0, 0.0]), d(&[0.0, 1.0])]).unwrap()
    }

    fn classical_channel(rows: &[&[f64]], prior: &[f64]) -> CqEnsemble {
        CqEnsemble::new(prior.to_vec(), rows.iter().map(|r| d(r)).collect()).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let rho = random_density(3, &mut RngSeed(1).rng());
        for a in [0.3, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(petz_divergence(&rho, &rho, ord(a)).unwrap(), 0.0, epsilon = 1e-12);
        }
        let v = petz_divergence(&d(&[0.7, 0.3]), &d(&[0.5, 0.5]), ord(0.5)).unwrap();
        let oracle = -2.0 * (0.35f64.sqrt() + 0.15f64.sqrt()).log2();
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-14);
        assert!((oracle - 0.06151).abs() < 1e-5);

        let mut rng = RngSeed(2).rng();
        let (r1, r2, s1, s2) =
            (random_density(2, &mut rng), random_density(2, &mut rng), random_density(2, &mut rng), random_density(2, &mut rng));
        for a in [0.5, 0.8, 1.0] {
            let joint = petz_divergence(&r1.kron(&r2), &s1.kron(&s2), ord(a)).unwrap();
            let split = petz_divergence(&r1, &s1, ord(a)).unwrap() + petz_divergence(&r2, &s2, ord(a)).unwrap();
            assert_abs_diff_eq!(joint, split, epsilon = 1e-10);
        }
    }

    #[test]
    fn divergence_support_conventions() {
        let a = d(&[1.0, 0.0]);
        let b = d(&[0.0, 1.0]);
        assert_eq!(petz_divergence(&a, &b, ord(0.5)).unwrap(), f64::INFINITY);
        assert_eq!(petz_divergence(&d(&[0.5, 0.5]), &a, ord(1.0)).unwrap(), f64::INFINITY);
        assert!(petz_divergence(&d(&[0.5, 0.5]), &a, ord(0.5)).unwrap().is_finite());
    }

    #[test]
    fn variance_examples() {
        let rho = random_density(3, &mut RngSeed(3).rng());
        assert_abs_diff_eq!(relative_entropy_variance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-12);
        let (p, q): ([f64; 2], [f64; 2]) = ([0.7, 0.3], [0.5, 0.5]);
        let d1: f64 = p.iter().zip(q).map(|(a, b)| a * (a / b).log2()).sum();
        let second: f64 = p.iter().zip(q).map(|(a, b)| a * (a / b).log2().powi(2)).sum();
        let v = relative_entropy_variance(&d(&p), &d(&q)).unwrap();
        assert_abs_diff_eq!(v, second - d1 * d1, epsilon = 1e-14);
        assert!((d1 - 0.11871).abs() < 1e-5);
        assert!(matches!(
            relative_entropy_variance(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn sibson_examples() {
        let e = orthogonal_pair();
        for a in [0.5, 0.7, 1.0] {
            let r = sibson_radius_info(&e, ord(a)).unwrap();
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
            assert!(r.minimizer.max_entry_diff(&DensityOp::maximally_mixed(2)) < 1e-12);
        }
        let rho = random_density(3, &mut RngSeed(4).rng());
        let same = CqEnsemble::new(vec![0.2, 0.8], vec![rho.clone(), rho]).unwrap();
        for a in [0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(sibson_radius_info(&same, ord(a)).unwrap().value, 0.0, epsilon = 1e-12);
        }
    }

    /// `D_alpha(rho_XB || rho_X (x) sigma)` evaluated blockwise.
    fn joint_divergence(ens: &CqEnsemble, sigma: &DensityOp, a: f64) -> f64 {
        let q: f64 = ens
            .support()
            .map(|(_, p, rho)| p * petz_quasi(rho, sigma, a))
            .sum();
        q.log2() / (a - 1.0)
    }

    #[test]
    fn sibson_minimizer_is_local_minimum() {
        let mut rng = RngSeed(5).rng();
        let ens = random_cq_ensemble(3, 2, &mut rng);
        for a in [0.5, 0.75, 0.95] {
            let r = sibson_radius_info(&ens, ord(a)).unwrap();
            let base = joint_divergence(&ens, &r.minimizer, a);
            assert_abs_diff_eq!(base, r.value, epsilon = 1e-10);
            for _ in 0..20 {
                let dir = random_density(2, &mut rng);
                for eps in [1e-3, 1e-2, 1e-1] {
                    let mixed = r.minimizer.scale(1.0 - eps).add(&dir.scale(eps));
                    let s = DensityOp::normalize(&mixed).unwrap();
                    assert!(joint_divergence(&ens, &s, a) >= base - 1e-12);
                }
            }
            // Bloch-ball grid
            let mut best = f64::INFINITY;
            for i in 0..=20 {
                for j in 0..=20 {
                    for k in 0..=20 {
                        let (x, y, z) = (i as f64 / 10.0 - 1.0, j as f64 / 10.0 - 1.0, k as f64 / 10.0 - 1.0);
                        if x * x + y * y + z * z > 0.999 {
                            continue;
                        }
                        let m = CMatrix::from_row_slice(2, 2, &[
                            Complex64::new(0.5 * (1.0 + z), 0.0),
                            Complex64::new(0.5 * x, -0.5 * y),
                            Complex64::new(0.5 * x, 0.5 * y),
                            Complex64::new(0.5 * (1.0 - z), 0.0),
                        ]);
                        best = best.min(joint_divergence(&ens, &DensityOp::from_matrix(m).unwrap(), a));
                    }
                }
            }
            assert!(best >= base - 1e-12);
        }
    }

    #[test]
    fn cond_entropy_examples() {
        let rho = random_density(2, &mut RngSeed(6).rng());
        let same = CqEnsemble::uniform(vec![rho.clone(), rho]).unwrap();
        for a in [0.5, 0.8, 1.0] {
            assert_abs_diff_eq!(cond_renyi_entropy(&same, ord(a)).unwrap().value, 1.0, epsilon = 1e-12);
        }
        let det = CqEnsemble::new(vec![1.0, 0.0], vec![d(&[1.0, 0.0]), d(&[0.0, 1.0])]).unwrap();
        for a in [0.5, 0.8, 1.0] {
            assert_abs_diff_eq!(cond_renyi_entropy(&det, ord(a)).unwrap().value, 0.0, epsilon = 1e-12);
        }
        // commuting: Arimoto form a/(1-a) log2 sum_y (sum_x (p(x) W(y|x))^a)^(1/a)
        let rows: [&[f64]; 3] = [&[0.6, 0.3, 0.1], &[0.2, 0.5, 0.3], &[0.1, 0.1, 0.8]];
        let prior = [0.5, 0.3, 0.2];
        let ens = classical_channel(&rows, &prior);
        for a in [0.5, 0.65, 0.9] {
            let inner: f64 = (0..3)
                .map(|y| (0..3).map(|x| (prior[x] * rows[x][y]).powf(a)).sum::<f64>().powf(1.0 / a))
                .sum();
            let oracle = a / (1.0 - a) * inner.log2();
            assert_abs_diff_eq!(cond_renyi_entropy(&ens, ord(a)).unwrap().value, oracle, epsilon = 1e-12);
        }
    }

    fn classical_augustin_oracle(rows: &[&[f64]], prior: &[f64], a: f64) -> f64 {
        let obj = |s: &[f64; 3]| -> f64 {
            rows.iter()
                .zip(prior)
                .map(|(w, p)| {
                    let q: f64 = (0..3).map(|y| w[y].powf(a) * s[y].powf(1.0 - a)).sum();
                    p * q.log2() / (a - 1.0)
                })
                .sum()
        };
        // 10^4-point simplex grid, then two local refinements
        let n = 140;
        let mut best = ([1.0 / 3.0; 3], f64::INFINITY);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let s = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
                let v = obj(&s);
                if v < best.1 {
                    best = (s, v);
                }
            }
        }
        let mut h = 1.0 / n as f64;
        for _ in 0..2 {
            let c = best.0;
            let m = 100;
            for i in -m..=m {
                for j in -m..=m {
                    let s0 = c[0] + h * i as f64 / m as f64;
                    let s1 = c[1] + h * j as f64 / m as f64;
                    let s = [s0, s1, 1.0 - s0 - s1];
                    if s.iter().any(|&v| v < 0.0) {
                        continue;
                    }
                    let v = obj(&s);
                    if v < best.1 {
                        best = (s, v);
                    }
                }
            }
            h /= m as f64 / 2.0;
        }
        best.1
    }

    #[test]
    fn augustin_examples() {
        let e = orthogonal_pair();
        for a in [0.5, 0.7, 0.9] {
            let r = augustin_info(&e, ord(a), &AugustinOptions::default()).unwrap();
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
            assert!(r.mean.max_entry_diff(&DensityOp::maximally_mixed(2)) < 1e-10);
        }
        let ens = random_cq_ensemble(3, 2, &mut RngSeed(7).rng());
        let r = augustin_info(&ens, RenyiOrder::ONE, &AugustinOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, sibson_radius_info(&ens, RenyiOrder::ONE).unwrap().value, epsilon = 1e-8);

        let rows: [&[f64]; 3] = [&[0.7, 0.2, 0.1], &[0.1, 0.6, 0.3], &[0.25, 0.25, 0.5]];
        let prior = [0.3, 0.3, 0.4];
        let ens = classical_channel(&rows, &prior);
        for a in [0.5, 0.7, 0.9] {
            let r = augustin_info(&ens, ord(a), &AugustinOptions::default()).unwrap();
            assert_abs_diff_eq!(r.value, classical_augustin_oracle(&rows, &prior, a), epsilon = 1e-4);
        }
    }

    #[test]
    fn augustin_dominates_sibson_and_tensorizes() {
        let mut rng = RngSeed(8).rng();
        for _ in 0..5 {
            let ens = random_cq_ensemble(3, 2, &mut rng);
            for a in [0.5, 0.8] {
                let aug = augustin_info(&ens, ord(a), &AugustinOptions::default()).unwrap();
                let sib = sibson_radius_info(&ens, ord(a)).unwrap().value;
                assert!(aug.value >= sib - 1e-9);
                let sq = augustin_info(&ens.tensor_square(), ord(a), &AugustinOptions::default()).unwrap();
                let prod = aug.mean.kron(&aug.mean);
                assert!((&**sq.mean - &**prod).trace_norm() < 1e-6);
            }
        }
    }

    #[test]
    fn augustin_reports_trajectory_on_failure() {
        let ens = random_cq_ensemble(3, 2, &mut RngSeed(9).rng());
        let opts = AugustinOptions { max_iter: 3, tol: 1e-30, ..Default::default() };
        match augustin_info(&ens, ord(0.6), &opts) {
            Err(Error::DidNotConverge { residuals }) => assert_eq!(residuals.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ea_examples() {
        let mut rng = RngSeed(10).rng();
        let (r, b) = (random_density(2, &mut rng), random_density(3, &mut rng));
        let prod = BipartiteState::new(r.kron(&b), 2, 3).unwrap();
        for a in [0.5, 0.8, 1.0] {
            assert_abs_diff_eq!(ea_renyi_info(&prod, ord(a)).unwrap().value, 0.0, epsilon = 1e-10);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [h, 0.0, 0.0, h].map(|x| Complex64::new(x, 0.0));
        let me = BipartiteState::new(DensityOp::pure(&phi).unwrap(), 2, 2).unwrap();
        assert_abs_diff_eq!(ea_renyi_info(&me, RenyiOrder::ONE).unwrap().value, 2.0, epsilon = 1e-12);

        // classical embedding: sum_x p(x) |x><x| (x) rho^x with diagonal rho^x
        let rows: [&[f64]; 2] = [&[0.8, 0.2], &[0.3, 0.7]];
        let prior = [0.4, 0.6];
        let ens = classical_channel(&rows, &prior);
        let diag: Vec<f64> = prior.iter().zip(rows).flat_map(|(p, row)| row.iter().map(move |w| p * w)).collect();
        let joint = BipartiteState::new(d(&diag), 2, 2).unwrap();
        for a in [0.5, 0.7, 1.0] {
            let ea = ea_renyi_info(&joint, ord(a)).unwrap().value;
            let sib = sibson_radius_info(&ens, ord(a)).unwrap().value;
            assert_abs_diff_eq!(ea, sib, epsilon = 1e-12);
        }
    }

    #[test]
    fn dispersion_examples() {
        let rho = random_density(2, &mut RngSeed(11).rng());
        let same = CqEnsemble::uniform(vec![rho.clone(), rho]).unwrap();
        let (i, v) = dispersion_for_input(&same).unwrap();
        assert_abs_diff_eq!(i, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        let (i, v) = dispersion_for_input(&orthogonal_pair()).unwrap();
        assert_abs_diff_eq!(i, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);

        let rows: [&[f64]; 2] = [&[0.9, 0.1], &[0.4, 0.6]];
        let prior = [0.5, 0.5];
        let avg = [0.65, 0.35];
        let (mut ci, mut cv) = (0.0, 0.0);
        for x in 0..2 {
            let dd: f64 = (0..2).map(|y| rows[x][y] * (rows[x][y] / avg[y]).log2()).sum();
            let ss: f64 = (0..2).map(|y| rows[x][y] * (rows[x][y] / avg[y]).log2().powi(2)).sum();
            ci += prior[x] * dd;
            cv += prior[x] * (ss - dd * dd);
        }
        let (i, v) = dispersion_for_input(&classical_channel(&rows, &prior)).unwrap();
        assert_abs_diff_eq!(i, ci, epsilon = 1e-12);
        assert_abs_diff_eq!(v, cv, epsilon = 1e-12);
    }

    /// Gallager's `E_r(R) = max_{rho in [0,1]} E_0(rho) - rho R` on a dense grid plus golden refinement.
    fn gallager_oracle(w: &[[f64; 2]; 2], p: &[f64; 2], r: f64) -> f64 {
        let e0 = |rho: f64| -> f64 {
            let s: f64 = (0..2)
                .map(|y| (0..2).map(|x| p[x] * w[x][y].powf(1.0 / (1.0 + rho))).sum::<f64>().powf(1.0 + rho))
                .sum();
            -s.log2()
        };
        let g = |rho: f64| e0(rho) - rho * r;
        let n = 20_000;
        let (mut best_rho, mut best) = (0.0, 0.0f64);
        for i in 0..=n {
            let rho = i as f64 / n as f64;
            if g(rho) > best {
                best = g(rho);
                best_rho = rho;
            }
        }
        let (mut lo, mut hi) = ((best_rho - 1.0 / n as f64).max(0.0), (best_rho + 1.0 / n as f64).min(1.0));
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if g(m1) < g(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best.max(g(0.5 * (lo + hi)))
    }

    #[test]
    fn exponent_examples() {
        let e = orthogonal_pair();
        let c = exponent_curve(&InfoKind::Sibson(&e), &[0.0, 0.5, 1.0, 1.5]).unwrap();
        assert_abs_diff_eq!(c.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.alphas[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values[1], 0.5, epsilon = 1e-12);
        assert_eq!(c.values[2], 0.0);
        assert_eq!(c.alphas[2], 1.0);
        assert_eq!(c.values[3], 0.0);

        let w = [[0.9, 0.1], [0.1, 0.9]];
        let p = [0.5, 0.5];
        let ens = classical_channel(&[&w[0], &w[1]], &p);
        let rates: Vec<f64> = (0..10).map(|i| 0.05 * i as f64).collect();
        let c = exponent_curve(&InfoKind::Sibson(&ens), &rates).unwrap();
        for (r, v) in rates.iter().zip(&c.values) {
            assert_abs_diff_eq!(*v, gallager_oracle(&w, &p, *r), epsilon = 1e-6);
        }
        for pair in c.values.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        for t in c.values.windows(3) {
            assert!(t[0] + t[2] - 2.0 * t[1] >= -1e-8);
        }
    }

    #[test]
    fn hayashi_comparison_holds() {
        let mut rng = RngSeed(12).rng();
        for _ in 0..20 {
            let ens = random_cq_ensemble(3, 3, &mut rng);
            for i in 0..=10 {
                let a = 0.5 + 0.05 * i as f64;
                let (l, r) = hayashi_comparison(&ens, a);
                assert!(l <= r + 1e-10, "alpha {a}: {l} > {r}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn divergence_nondecreasing_in_alpha(seed in any::<u64>(), dim in 2usize..5) {
            let mut rng = RngSeed(seed).rng();
            let (a, b) = (random_density(dim, &mut rng), random_density(dim, &mut rng));
            let mut last = f64::NEG_INFINITY;
            for i in 1..=20 {
                let v = petz_divergence(&a, &b, ord(i as f64 / 20.0)).unwrap();
                prop_assert!(v >= last - 1e-9);
                last = v;
            }
        }

        #[test]
        fn data_processing_under_partial_trace(seed in any::<u64>(), alpha in 0.05f64..1.0) {
            let mut rng = RngSeed(seed).rng();
            let (a, b) = (random_density(6, &mut rng), random_density(6, &mut rng));
            let pa = DensityOp::from_matrix(partial_trace(a.matrix(), &[2, 3], &[true, false]).unwrap()).unwrap();
            let pb = DensityOp::from_matrix(partial_trace(b.matrix(), &[2, 3], &[true, false]).unwrap()).unwrap();
            let full = petz_divergence(&a, &b, ord(alpha)).unwrap();
            let reduced = petz_divergence(&pa, &pb, ord(alpha)).unwrap();
            prop_assert!(reduced <= full + 1e-9);
        }

        #[test]
        fn pure_state_divergence_finite(seed in any::<u64>()) {
            let mut rng = RngSeed(seed).rng();
            let v = random_unit_vector(3, &mut rng);
            let psi = DensityOp::pure(v.as_slice()).unwrap();
            let sigma = random_density(3, &mut rng);
            prop_assert!(petz_divergence(&psi, &sigma, ord(0.7)).unwrap().is_finite());
        }
    }
}
