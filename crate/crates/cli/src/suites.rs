//! Seeded property suites behind `layercake verify`.

use layercake::channel::QuantumChannel;
use layercake::info::AugustinOptions;
use layercake::integrals::{
    change_of_variables_check, dlog, dlog_lieb_quadrature, extremal_decomposition_with, integral_quotient,
    layercake_with, tracial_min_integral, LayerCakeMode, QuadratureSpec,
};
use layercake::measure::{chernoff_bound, conventional_pgm, helstrom_error, inequality_suite, integral_pgm, povm_error};
use layercake::packing::{
    constrained_random_coding, cq_random_coding, cqsw_random_binning, ea_position_coding, unassisted_bound, SimConfig,
};
use layercake::random::{random_cq_ensemble, random_density, random_psd};
use layercake::{BipartiteState, HermitianOp, RngSeed, ScalarFn};
use rand::Rng;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Calculus,
    Inequalities,
    Bounds,
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: RngSeed,
    pub trials: usize,
    pub dims: Vec<usize>,
}

/// Aggregate over all trials of one property. A margin below `threshold` is a violation.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub threshold: f64,
    pub evaluations: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

impl PropertyResult {
    fn new(suite: &'static str, name: &'static str, threshold: f64) -> Self {
        Self { suite, name, threshold, evaluations: 0, violations: 0, worst_margin: f64::INFINITY }
    }

    fn record(&mut self, margin: f64) {
        self.evaluations += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !(margin >= self.threshold) {
            self.violations += 1;
        }
    }
}

/// Slack allowed on inequalities that hold exactly.
pub const INEQUALITY_SLACK: f64 = -1e-9;

struct Spec {
    name: &'static str,
    threshold: f64,
}

const CALCULUS: [Spec; 7] = [
    Spec { name: "layercake_panel_exact_1e-10", threshold: 0.0 },
    Spec { name: "layercake_refinement_1e-5", threshold: 0.0 },
    Spec { name: "extremal_panel_exact_1e-10", threshold: 0.0 },
    Spec { name: "extremal_refinement_1e-5", threshold: 0.0 },
    Spec { name: "change_of_variables_1e-5", threshold: 0.0 },
    Spec { name: "lieb_quadrature_1e-6", threshold: 0.0 },
    Spec { name: "tracial_min_integral_1e-7", threshold: 0.0 },
];

const EXTRA_INEQUALITIES: [Spec; 3] = [
    Spec { name: "helstrom_below_chernoff", threshold: INEQUALITY_SLACK },
    Spec { name: "chernoff_below_min_trace", threshold: INEQUALITY_SLACK },
    Spec { name: "conventional_pgm_beats_integral", threshold: INEQUALITY_SLACK },
];

const BOUNDS: [Spec; 5] = [
    Spec { name: "cq_random_coding", threshold: INEQUALITY_SLACK },
    Spec { name: "constrained_coding", threshold: INEQUALITY_SLACK },
    Spec { name: "cqsw_binning", threshold: INEQUALITY_SLACK },
    Spec { name: "ea_position_coding", threshold: INEQUALITY_SLACK },
    Spec { name: "unassisted_coding", threshold: INEQUALITY_SLACK },
];

fn alpha_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 + 0.5 * i as f64 / (n - 1) as f64).collect()
}

fn pick<R: Rng>(dims: &[usize], rng: &mut R) -> usize {
    dims[rng.random_range(0..dims.len())]
}

fn entry_error(x: &HermitianOp, y: &HermitianOp) -> f64 {
    x.max_entry_diff(y)
}

/// Monotone nonincreasing table on `[0, 8]`.
pub fn monotone_table() -> ScalarFn {
    ScalarFn::table(vec![0.0, 0.5, 1.5, 3.0, 8.0], vec![2.0, 1.5, 1.2, 0.4, 0.1]).expect("valid table")
}

/// The weights checked by the change-of-variables property.
pub fn change_of_variables_weights() -> Vec<ScalarFn> {
    let mut hs: Vec<ScalarFn> = (0..4)
        .map(|d| {
            let mut c = vec![0.0; d + 1];
            c[d] = 1.0;
            ScalarFn::polynomial(c).expect("small degree")
        })
        .collect();
    hs.push(monotone_table());
    hs
}

type Margins = Vec<Vec<f64>>;

fn calculus_trial(seed: RngSeed, dims: &[usize]) -> layercake::Result<Margins> {
    let mut rng = seed.rng();
    let dim = pick(dims, &mut rng);
    let q = QuadratureSpec::default();
    let mut m: Margins = vec![Vec::new(); CALCULUS.len()];

    let a = random_psd(dim, &mut rng);
    let b: HermitianOp = &*random_psd(dim, &mut rng) - &*random_psd(dim, &mut rng);
    let exact = dlog(&a, &b)?;
    m[0].push(1e-10 - entry_error(&layercake_with(&a, &b, &q, LayerCakeMode::PanelExact)?, &exact));
    m[1].push(1e-5 - entry_error(&layercake_with(&a, &b, &q, LayerCakeMode::Refinement)?, &exact));

    let p: f64 = rng.random_range(0.05..0.95);
    let wa = random_density(dim, &mut rng).scale(p);
    let wb = random_density(dim, &mut rng).scale(1.0 - p);
    let quotient = integral_quotient(&wa, &wb)?;
    m[2].push(1e-10 - entry_error(&extremal_decomposition_with(&wa, &wb, &q, LayerCakeMode::PanelExact)?, &quotient));
    m[3].push(1e-5 - entry_error(&extremal_decomposition_with(&wa, &wb, &q, LayerCakeMode::Refinement)?, &quotient));

    if dim <= 4 {
        let bp = random_psd(dim, &mut rng);
        for h in change_of_variables_weights() {
            m[4].push(1e-5 - change_of_variables_check(&a, &bp, &h, &q)?.gap);
        }
    }

    let lieb = dlog_lieb_quadrature(&a, &b, &q)?;
    m[5].push(1e-6 - entry_error(&lieb, &exact) / exact.op_norm().max(1.0));

    let tracial = tracial_min_integral(&wa, &wb, &q)?;
    m[6].push(1e-7 - (tracial - helstrom_error(&wa, &wb)?).abs());
    Ok(m)
}

fn inequality_extras(seed: RngSeed, dims: &[usize]) -> layercake::Result<Margins> {
    let mut rng = seed.rng();
    let dim = pick(dims, &mut rng);
    let mut m: Margins = vec![Vec::new(); EXTRA_INEQUALITIES.len()];
    let p: f64 = rng.random_range(0.05..0.95);
    let a = random_density(dim, &mut rng).scale(p);
    let b = random_density(dim, &mut rng).scale(1.0 - p);
    let h = helstrom_error(&a, &b)?;
    let (c, _) = chernoff_bound(&a, &b, None)?;
    m[0].push(c - h);
    m[1].push(a.trace().min(b.trace()) - c);

    let k = rng.random_range(2..=3);
    let ens = random_cq_ensemble(k, dim, &mut rng);
    for al in alpha_grid(6) {
        let conv = povm_error(&ens, &conventional_pgm(&ens, al)?, None)?;
        let int = povm_error(&ens, &integral_pgm(&ens, al)?, None)?;
        m[2].push(int - conv);
    }
    Ok(m)
}

fn bounds_trial(seed: RngSeed, dims: &[usize]) -> layercake::Result<Margins> {
    let mut rng = seed.rng();
    let small: Vec<usize> = dims.iter().copied().filter(|&d| d <= 3).collect();
    let dim = pick(if small.is_empty() { &[2] } else { &small }, &mut rng);
    let mut m: Margins = vec![Vec::new(); BOUNDS.len()];
    let k = rng.random_range(2..=3);
    let ens = random_cq_ensemble(k, dim, &mut rng);
    let opts = AugustinOptions::default();
    let z: Vec<usize> = (0..k).filter(|&x| x == 0 || rng.random_bool(0.5)).take(k - 1).collect();
    let theta = BipartiteState::new(random_density(4, &mut rng), 2, 2)?;
    let noisy = QuantumChannel::depolarizing(2, rng.random_range(0.0..1.0))?;
    let chan = QuantumChannel::random(dim, 2, 2, &mut rng)?;
    let inputs = random_cq_ensemble(2, dim, &mut rng);
    for al in alpha_grid(6) {
        for mm in [2usize, 3] {
            let cfg = SimConfig::enumerate(mm, al);
            m[0].push(cq_random_coding(&ens, &cfg)?.margin());
            m[1].push(constrained_random_coding(&ens, &z, &cfg, &opts)?.margin());
            m[3].push(ea_position_coding(&noisy, &theta, mm, al)?.margin());
            m[4].push(unassisted_bound(&chan, &inputs, &cfg)?.1.margin());
        }
        for mm in 1..=3 {
            m[2].push(cqsw_random_binning(&ens, &SimConfig::enumerate(mm, al))?.margin());
        }
    }
    Ok(m)
}

fn aggregate<F>(suite: &'static str, specs: &[Spec], cfg: &VerifyConfig, salt: u64, f: F) -> layercake::Result<Vec<PropertyResult>>
where
    F: Fn(RngSeed, &[usize]) -> layercake::Result<Margins> + Sync,
{
    let base = cfg.seed.derive(salt);
    let trials: Vec<layercake::Result<Margins>> =
        (0..cfg.trials as u64).into_par_iter().map(|i| f(base.derive(i), &cfg.dims)).collect();
    let mut out: Vec<PropertyResult> = specs.iter().map(|s| PropertyResult::new(suite, s.name, s.threshold)).collect();
    for t in trials {
        for (res, margins) in out.iter_mut().zip(t?) {
            margins.into_iter().for_each(|v| res.record(v));
        }
    }
    Ok(out)
}

fn check(cfg: &VerifyConfig) -> layercake::Result<()> {
    if cfg.trials == 0 || cfg.dims.is_empty() || cfg.dims.iter().any(|&d| d == 0 || d > 8) {
        return Err(layercake::Error::InvalidInput("verify needs trials >= 1 and dims in 1..=8".into()));
    }
    Ok(())
}

pub fn run_calculus(cfg: &VerifyConfig) -> layercake::Result<Vec<PropertyResult>> {
    check(cfg)?;
    aggregate("calculus", &CALCULUS, cfg, 1, calculus_trial)
}

pub fn run_inequalities(cfg: &VerifyConfig) -> layercake::Result<Vec<PropertyResult>> {
    check(cfg)?;
    let report = inequality_suite(cfg.seed.derive(2), cfg.trials, &cfg.dims)?;
    let mut out: Vec<PropertyResult> = report
        .checks
        .iter()
        .map(|c| PropertyResult {
            suite: "inequalities",
            name: c.name,
            threshold: layercake::measure::SUITE_TOL,
            evaluations: c.evaluations,
            violations: c.violations,
            worst_margin: c.worst_margin,
        })
        .collect();
    out.extend(aggregate("inequalities", &EXTRA_INEQUALITIES, cfg, 3, inequality_extras)?);
    Ok(out)
}

pub fn run_bounds(cfg: &VerifyConfig) -> layercake::Result<Vec<PropertyResult>> {
    check(cfg)?;
    aggregate("bounds", &BOUNDS, cfg, 4, bounds_trial)
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> layercake::Result<Vec<PropertyResult>> {
    match suite {
        Suite::Calculus => run_calculus(cfg),
        Suite::Inequalities => run_inequalities(cfg),
        Suite::Bounds => run_bounds(cfg),
        Suite::All => {
            let mut out = run_calculus(cfg)?;
            out.extend(run_inequalities(cfg)?);
            out.extend(run_bounds(cfg)?);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_suite_runs_clean() {
        let cfg = VerifyConfig { seed: RngSeed(3), trials: 4, dims: vec![2, 3] };
        for suite in [Suite::Calculus, Suite::Inequalities, Suite::Bounds] {
            for p in run(suite, &cfg).unwrap() {
                assert_eq!(p.violations, 0, "{} {} worst {}", p.suite, p.name, p.worst_margin);
                assert!(p.evaluations > 0, "{}", p.name);
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = VerifyConfig { seed: RngSeed(0), trials: 0, dims: vec![2] };
        assert!(run(Suite::Calculus, &cfg).is_err());
        let cfg = VerifyConfig { seed: RngSeed(0), trials: 1, dims: vec![] };
        assert!(run(Suite::Bounds, &cfg).is_err());
    }
}
