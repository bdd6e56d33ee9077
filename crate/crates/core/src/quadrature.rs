//! Adaptive composite Gauss-Legendre quadrature for matrix-valued integrands.
//!
//! The range is cut at caller-supplied breakpoints, each piece is divided
//! into equal panels, and every panel carries a 16-node estimate together
//! with the estimate from its two halves. Panels whose halves disagree by
//! more than their share of the tolerance are bisected until the summed
//! disagreement falls below `target_rel_err * ||total||`.
//!
//! Panels are evaluated in parallel and always summed in ascending order, so
//! results do not depend on the number of worker threads.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianOp};

/// Nodes and weights of an n-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        let degree = std::num::NonZeroUsize::new(n).expect("rule needs at least one node");
        let rule = GaussLegendre::new(degree);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<V: QuadValue>(&self, a: f64, b: f64, f: &impl Fn(f64) -> V) -> V {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc: Option<V> = None;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            match acc.as_mut() {
                Some(s) => s.axpy(w * half, &v),
                None => acc = Some(v.scaled(w * half)),
            }
        }
        acc.expect("rule is nonempty")
    }
}

pub(crate) fn gl16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(16))
}

/// Values that can be accumulated by the quadrature engine.
pub trait QuadValue: Clone + Send + Sync {
    fn scaled(&self, s: f64) -> Self;
    fn axpy(&mut self, s: f64, x: &Self);
    /// Norm used for per-panel error estimates.
    fn err_norm(&self) -> f64;
    /// Norm used for the relative tolerance of the total.
    fn total_norm(&self) -> f64;
    fn into_matrix(self) -> CMatrix;
}

impl QuadValue for f64 {
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn axpy(&mut self, s: f64, x: &Self) {
        *self += s * x;
    }
    fn err_norm(&self) -> f64 {
        self.abs()
    }
    fn total_norm(&self) -> f64 {
        self.abs()
    }
    fn into_matrix(self) -> CMatrix {
        CMatrix::from_element(1, 1, self.into())
    }
}

impl QuadValue for CMatrix {
    fn scaled(&self, s: f64) -> Self {
        self * num_complex::Complex64::new(s, 0.0)
    }
    fn axpy(&mut self, s: f64, x: &Self) {
        let s = num_complex::Complex64::new(s, 0.0);
        self.zip_apply(x, |a, b| *a += s * b);
    }
    fn err_norm(&self) -> f64 {
        self.norm()
    }
    fn total_norm(&self) -> f64 {
        HermitianOp::hermitized(self.clone()).op_norm()
    }
    fn into_matrix(self) -> CMatrix {
        self
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveConfig {
    /// Total number of panels before refinement, shared among the pieces in
    /// proportion to their length (at least one each).
    pub base_panels: usize,
    pub max_refinements: usize,
    pub target_rel_err: f64,
    /// Absolute error accepted when the total is (close to) zero.
    pub abs_floor: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self { base_panels: 128, max_refinements: 12, target_rel_err: 1e-7, abs_floor: 1e-15 }
    }
}

#[derive(Clone, Debug)]
pub struct Integral<V> {
    pub value: V,
    pub error_estimate: f64,
    pub panels: usize,
    pub refinements: usize,
}

struct Panel<V> {
    a: f64,
    b: f64,
    coarse: V,
    fine: V,
    err: f64,
}

fn build_panel<V: QuadValue, F: Fn(f64) -> V + Sync>(
    a: f64,
    b: f64,
    coarse: Option<V>,
    f: &F,
) -> Panel<V> {
    let rule = gl16();
    let m = 0.5 * (a + b);
    let coarse = coarse.unwrap_or_else(|| rule.integrate(a, b, f));
    let mut fine = rule.integrate(a, m, f);
    fine.axpy(1.0, &rule.integrate(m, b, f));
    let mut diff = fine.clone();
    diff.axpy(-1.0, &coarse);
    let err = diff.err_norm();
    Panel { a, b, coarse, fine, err }
}

fn halves<V: QuadValue, F: Fn(f64) -> V + Sync>(p: &Panel<V>, f: &F) -> [Panel<V>; 2] {
    let rule = gl16();
    let m = 0.5 * (p.a + p.b);
    let left = rule.integrate(p.a, m, f);
    let right = rule.integrate(m, p.b, f);
    [build_panel(p.a, m, Some(left), f), build_panel(m, p.b, Some(right), f)]
}

fn sum_fine<V: QuadValue>(panels: &[Panel<V>]) -> V {
    let mut total = panels[0].fine.clone();
    for p in &panels[1..] {
        total.axpy(1.0, &p.fine);
    }
    total
}

/// Integrates `f` over `[points[0], points[last]]`, treating every interior
/// point as a place where `f` may fail to be smooth.
pub fn integrate_pieces<V, F>(f: F, points: &[f64], cfg: &AdaptiveConfig) -> Result<Integral<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V + Sync,
{
    let pieces: Vec<(f64, f64)> = points
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b > a)
        .collect();
    if pieces.is_empty() {
        return Err(Error::invalid("empty integration range"));
    }
    let span = points[points.len() - 1] - points[0];
    let mut seeds = Vec::new();
    for &(a, b) in &pieces {
        let n = ((cfg.base_panels as f64) * (b - a) / span).round().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { a + h * (i + 1) as f64 };
            seeds.push((lo, hi));
        }
    }
    let mut panels: Vec<Panel<V>> =
        seeds.par_iter().map(|&(a, b)| build_panel(a, b, None, &f)).collect();

    let mut previous: Option<V> = None;
    for round in 0..=cfg.max_refinements {
        let total = sum_fine(&panels);
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let allowed = cfg.target_rel_err * total.total_norm() + cfg.abs_floor;
        if err <= allowed {
            return Ok(Integral { value: total, error_estimate: err, panels: panels.len(), refinements: round });
        }
        if round == cfg.max_refinements {
            let prev = previous.unwrap_or_else(|| {
                let mut c = panels[0].coarse.clone();
                for p in &panels[1..] {
                    c.axpy(1.0, &p.coarse);
                }
                c
            });
            let norm = total.total_norm().max(f64::MIN_POSITIVE);
            return Err(Error::QuadratureDidNotConverge {
                last: Box::new(total.into_matrix()),
                previous: Box::new(prev.into_matrix()),
                gap: err / norm,
            });
        }
        let share = allowed / panels.len() as f64;
        let split: Vec<Vec<Panel<V>>> = panels
            .par_iter()
            .map(|p| {
                if p.err > share && p.b - p.a > 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
                    halves(p, &f).into()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut next = Vec::with_capacity(panels.len() * 2);
        for (p, children) in panels.into_iter().zip(split) {
            if children.is_empty() {
                next.push(p);
            } else {
                next.extend(children);
            }
        }
        previous = Some(total);
        panels = next;
    }
    unreachable!("loop returns on the last round")
}

/// Sorted, deduplicated breakpoints inside `[lo, hi]`, endpoints included.
pub(crate) fn breakpoints(lo: f64, hi: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let tol = 1e-12 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let mut pts: Vec<f64> = interior.into_iter().filter(|&x| x > lo + tol && x < hi - tol).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
    pts
}

/// Locates the jumps of a monotone integer-valued `count` on `[lo, hi]` by
/// bisection down to `width`, starting from `grid` equal cells. Returns the
/// midpoints of the final brackets.
pub(crate) fn locate_jumps(
    count: &(impl Fn(f64) -> usize + Sync),
    lo: f64,
    hi: f64,
    grid: usize,
    width: f64,
) -> Vec<f64> {
    let h = (hi - lo) / grid as f64;
    let xs: Vec<f64> = (0..=grid).map(|i| if i == grid { hi } else { lo + h * i as f64 }).collect();
    let counts: Vec<usize> = xs.par_iter().map(|&x| count(x)).collect();
    let mut out = Vec::new();
    let mut stack: Vec<(f64, usize, f64, usize)> = Vec::new();
    for i in 0..grid {
        if counts[i] != counts[i + 1] {
            stack.push((xs[i], counts[i], xs[i + 1], counts[i + 1]));
        }
        while let Some((a, ca, b, cb)) = stack.pop() {
            if b - a <= width {
                out.push(0.5 * (a + b));
                continue;
            }
            let m = 0.5 * (a + b);
            let cm = count(m);
            // right half pushed first so jumps come out in ascending order
            if cm != cb {
                stack.push((m, cm, b, cb));
            }
            if cm != ca {
                stack.push((a, ca, m, cm));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl16_integrates_degree_31_exactly() {
        let v = gl16().integrate(0.0, 1.0, &|x: f64| 32.0 * x.powi(31));
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kink() {
        let cfg = AdaptiveConfig { target_rel_err: 1e-10, max_refinements: 40, ..Default::default() };
        let r = integrate_pieces(|x: f64| (x - 0.3).abs(), &[0.0, 1.0], &cfg).unwrap();
        let exact = 0.5 * (0.3f64.powi(2) + 0.7f64.powi(2));
        assert!((r.value - exact).abs() < 1e-9);
        let r = integrate_pieces(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], &cfg).unwrap();
        assert!((r.value - exact).abs() < 1e-14);
        assert_eq!(r.refinements, 0);
    }

    #[test]
    fn failure_reports_iterates() {
        let cfg = AdaptiveConfig { base_panels: 1, max_refinements: 2, target_rel_err: 1e-15, abs_floor: 0.0 };
        let e = integrate_pieces(|x: f64| if x < 0.123456 { 0.0 } else { 1.0 }, &[0.0, 1.0], &cfg)
            .unwrap_err();
        match e {
            Error::QuadratureDidNotConverge { last, previous, gap } => {
                assert!(gap > 0.0);
                assert_eq!(last.nrows(), 1);
                assert_eq!(previous.nrows(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jumps_of_step_count() {
        let jumps = [0.25, 0.5, 0.5 + 1e-6, 0.9];
        let count = |u: f64| jumps.iter().filter(|&&j| j > u).count();
        let found = locate_jumps(&count, 0.0, 1.0, 8, 1e-12);
        assert_eq!(found.len(), 4);
        for (f, j) in found.iter().zip(jumps) {
            assert!((f - j).abs() < 1e-12);
        }
    }

    #[test]
    fn breakpoints_dedup() {
        let b = breakpoints(0.0, 1.0, [0.5, 0.5, 2.0, -1.0, 1.0]);
        assert_eq!(b, vec![0.0, 0.5, 1.0]);
    }
}
