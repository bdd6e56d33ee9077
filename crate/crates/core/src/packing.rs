//! Random-coding simulators for the packing tasks, each next to its one-shot bound.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::channel::QuantumChannel;
use crate::ensemble::{BipartiteState, CqChannel, CqEnsemble};
use crate::error::{Error, Result};
use crate::info::{
    augustin_info, cond_renyi_entropy, ea_renyi_info, exponent_curve_from, petz_divergence, sibson_radius_info,
    AugustinOptions, ExponentCurve, RenyiOrder,
};
use crate::integrals::dlog_on_support;
use crate::linalg::{kron_all, permute_subsystems, CMatrix, DensityOp, HermitianOp, PsdOp};
use crate::measure::c_alpha;
use crate::random::RngSeed;

/// Largest number of codebooks or bin assignments summed in enumerate mode.
pub const ENUMERATION_CAP: u128 = 1_000_000;
/// Largest `d_R^M d_B` handled by the position-based decoder.
pub const EA_DIM_CAP: usize = 4096;

const SHARD: u64 = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    entries: Vec<usize>,
}

impl Codebook {
    pub fn new(entries: Vec<usize>, alphabet: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("codebook is empty"));
        }
        if let Some(&x) = entries.iter().find(|&&x| x >= alphabet) {
            return Err(Error::invalid(format!("codeword letter {x} outside alphabet of size {alphabet}")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An `n`-type: letter counts summing to the block length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSpec {
    counts: Vec<usize>,
}

impl TypeSpec {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() || counts.iter().sum::<usize>() == 0 {
            return Err(Error::invalid("a type needs a positive block length"));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn distribution(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// `|T^n_q|`, the multinomial coefficient.
    pub fn class_size(&self) -> u128 {
        let mut size: u128 = 1;
        let mut seen: u128 = 0;
        for &c in &self.counts {
            for i in 1..=c as u128 {
                seen += 1;
                size = size * seen / i;
            }
        }
        size
    }

    /// `log2 p^n(T^n_q)` for an i.i.d. law `p`.
    pub fn log2_class_probability(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.counts.len() {
            return Err(Error::DimensionMismatch { expected: self.counts.len(), found: p.len() });
        }
        let mut v = (self.class_size() as f64).log2();
        for (&c, &px) in self.counts.iter().zip(p) {
            if c > 0 {
                v += c as f64 * px.log2();
            }
        }
        Ok(v)
    }
}

/// A uniformly random member of the type class, by shuffling the letter multiset.
pub fn sample_type_class(q: &TypeSpec, seed: RngSeed) -> Vec<usize> {
    let mut seq: Vec<usize> = q.counts.iter().enumerate().flat_map(|(x, &c)| std::iter::repeat_n(x, c)).collect();
    seq.shuffle(&mut seed.rng());
    seq
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Enumerate,
    MonteCarlo { samples: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub m: usize,
    pub alpha: f64,
    pub mode: SimMode,
    pub seed: RngSeed,
}

impl SimConfig {
    pub fn enumerate(m: usize, alpha: f64) -> Self {
        Self { m, alpha, mode: SimMode::Enumerate, seed: RngSeed(0) }
    }

    pub fn monte_carlo(m: usize, alpha: f64, samples: u64, seed: RngSeed) -> Self {
        Self { m, alpha, mode: SimMode::MonteCarlo { samples }, seed }
    }

    fn validate(&self, min_m: usize) -> Result<()> {
        if self.m < min_m {
            return Err(Error::invalid(format!("message count must be at least {min_m}")));
        }
        if !(0.5..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha must lie in [1/2, 1]"));
        }
        if let SimMode::MonteCarlo { samples } = self.mode {
            if samples < 2 {
                return Err(Error::invalid("Monte-Carlo mode needs at least 2 samples"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub error_estimate: f64,
    /// Zero in enumerate mode.
    pub std_err: f64,
    pub samples: u64,
    pub seed: RngSeed,
    pub bound: f64,
    pub bound_ref: &'static str,
}

impl SimResult {
    pub fn margin(&self) -> f64 {
        self.bound - self.error_estimate
    }

    /// `error <= bound + 3 std_err`, with `1e-9` of arithmetic slack.
    pub fn holds(&self) -> bool {
        self.margin() >= -3.0 * self.std_err - 1e-9
    }
}

/// `sum_i Tr[targets_i D log[S](powers_i)]` with `S = sum_i powers_i`.
fn integral_pgm_success(targets: &[&PsdOp], powers: &[&PsdOp]) -> Result<f64> {
    let dim = powers[0].dim();
    let s = powers.iter().fold(PsdOp::zeros(dim), |acc, p| acc.add(p));
    let mut success = 0.0;
    for (t, p) in targets.iter().zip(powers) {
        if p.trace() == 0.0 {
            continue;
        }
        match dlog_on_support(&s, p) {
            Ok(effect) => success += t.trace_with(&effect),
            Err(Error::EmptySupport) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(success)
}

fn decode_error_cached(states: &[DensityOp], powers: &[PsdOp], entries: &[usize]) -> Result<f64> {
    let targets: Vec<&PsdOp> = entries.iter().map(|&x| states[x].as_psd()).collect();
    let pw: Vec<&PsdOp> = entries.iter().map(|&x| &powers[x]).collect();
    Ok(1.0 - integral_pgm_success(&targets, &pw)? / entries.len() as f64)
}

/// Average error of the integral alpha-PGM decoder for a fixed codebook;
/// decoding mass off the support of `S` counts as error.
pub fn cq_decode_error(channel: &CqChannel, cb: &Codebook, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1]"));
    }
    if let Some(&x) = cb.entries().iter().find(|&&x| x >= channel.alphabet_size()) {
        return Err(Error::invalid(format!("codeword letter {x} outside the channel alphabet")));
    }
    let powers: Vec<PsdOp> = channel.states().iter().map(|s| s.power(alpha)).collect();
    decode_error_cached(channel.states(), &powers, cb.entries())
}

fn digits(mut index: u64, base: usize, len: usize, out: &mut [usize]) {
    for d in out.iter_mut().take(len) {
        *d = (index % base as u64) as usize;
        index /= base as u64;
    }
}

struct Averaged {
    mean: f64,
    std_err: f64,
    samples: u64,
}

/// Expectation of `f` over i.i.d. digit strings of length `len` drawn from `weights`.
fn average_over_strings<F>(weights: &[f64], len: usize, mode: SimMode, seed: RngSeed, f: F) -> Result<Averaged>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    let base = weights.len();
    match mode {
        SimMode::Enumerate => {
            let count = (base as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
            if count > ENUMERATION_CAP {
                return Err(Error::EnumerationTooLarge { count, cap: ENUMERATION_CAP });
            }
            let count = count as u64;
            let shards = count.div_ceil(SHARD);
            let partial: Vec<Result<f64>> = (0..shards)
                .into_par_iter()
                .map(|s| {
                    let mut buf = vec![0; len];
                    let mut acc = 0.0;
                    for i in s * SHARD..((s + 1) * SHARD).min(count) {
                        digits(i, base, len, &mut buf);
                        let w: f64 = buf.iter().map(|&d| weights[d]).product();
                        if w > 0.0 {
                            acc += w * f(&buf)?;
                        }
                    }
                    Ok(acc)
                })
                .collect();
            let mut mean = 0.0;
            for p in partial {
                mean += p?;
            }
            Ok(Averaged { mean, std_err: 0.0, samples: count })
        }
        SimMode::MonteCarlo { samples } => {
            let dist = WeightedIndex::new(weights).map_err(|e| Error::invalid(format!("sampling weights: {e}")))?;
            let values: Vec<Result<f64>> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seed.derive(i).rng();
                    let buf: Vec<usize> = (0..len).map(|_| dist.sample(&mut rng)).collect();
                    f(&buf)
                })
                .collect();
            let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
            let n = samples as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(Averaged { mean, std_err: (var / n).sqrt(), samples })
        }
    }
}

/// `Tr[(sum_x p(x) (rho^x)^alpha)^(1/alpha)]`.
pub fn cq_trace_factor(ens: &CqEnsemble, alpha: f64) -> f64 {
    let s = ens.support().fold(PsdOp::zeros(ens.dim()), |acc, (_, p, rho)| acc.add(&rho.power(alpha).scale(p)));
    s.power(1.0 / alpha).trace()
}

/// `c_alpha (M-1)^((1-alpha)/alpha) Tr[(sum_x p(x) (rho^x)^alpha)^(1/alpha)]`.
pub fn cq_bound(ens: &CqEnsemble, m: usize, alpha: f64) -> f64 {
    let s = (1.0 - alpha) / alpha;
    c_alpha(alpha) * ((m - 1) as f64).powf(s) * cq_trace_factor(ens, alpha)
}

/// Expected decoding error over codebooks of `M` i.i.d. codewords drawn from the prior.
pub fn cq_random_coding(ens: &CqEnsemble, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate(2)?;
    let powers: Vec<PsdOp> = ens.states().iter().map(|s| s.power(cfg.alpha)).collect();
    let avg = average_over_strings(ens.prior(), cfg.m, cfg.mode, cfg.seed, |cb| {
        decode_error_cached(ens.states(), &powers, cb)
    })?;
    Ok(SimResult {
        error_estimate: avg.mean.clamp(0.0, 1.0),
        std_err: avg.std_err,
        samples: avg.samples,
        seed: cfg.seed,
        bound: cq_bound(ens, cfg.m, cfg.alpha),
        bound_ref: "cq",
    })
}

/// The prior conditioned on `z`.
pub fn induced_prior(ens: &CqEnsemble, z: &[usize]) -> Result<CqEnsemble> {
    Ok(condition(ens, z)?.0)
}

fn condition(ens: &CqEnsemble, z: &[usize]) -> Result<(CqEnsemble, f64)> {
    let mut mask = vec![false; ens.len()];
    for &x in z {
        *mask.get_mut(x).ok_or_else(|| Error::invalid(format!("constraint letter {x} outside alphabet")))? = true;
    }
    let pz: f64 = ens.prior().iter().zip(&mask).filter(|(_, &m)| m).map(|(p, _)| p).sum();
    if !(pz > 0.0) {
        return Err(Error::EmptyConstraint);
    }
    let prior = ens.prior().iter().zip(&mask).map(|(&p, &m)| if m { p / pz } else { 0.0 }).collect();
    Ok((CqEnsemble::new(prior, ens.states().to_vec())?, pz))
}

/// `c_alpha / p(Z)^(1/alpha) 2^(-(1-alpha)/alpha [min_{x in Z, p(x) > 0} D_alpha(rho^x || sigma*) - log2(M-1)])`
/// with `sigma*` the Augustin mean of the unconstrained prior.
pub fn constrained_bound(ens: &CqEnsemble, z: &[usize], m: usize, alpha: f64, opts: &AugustinOptions) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid("message count must be at least 2"));
    }
    let order = RenyiOrder::new(alpha)?;
    let (induced, pz) = condition(ens, z)?;
    let sigma = augustin_info(ens, order, opts)?.mean;
    let mut worst = f64::INFINITY;
    for (_, _, rho) in induced.support() {
        worst = worst.min(petz_divergence(rho, &sigma, order)?);
    }
    let s = (1.0 - alpha) / alpha;
    Ok(c_alpha(alpha) / pz.powf(1.0 / alpha) * (-s * (worst - ((m - 1) as f64).log2())).exp2())
}

/// Random coding on the induced prior, compared against [`constrained_bound`].
pub fn constrained_random_coding(
    ens: &CqEnsemble,
    z: &[usize],
    cfg: &SimConfig,
    opts: &AugustinOptions,
) -> Result<SimResult> {
    let induced = induced_prior(ens, z)?;
    let mut sim = cq_random_coding(&induced, cfg)?;
    sim.bound = constrained_bound(ens, z, cfg.m, cfg.alpha, opts)?;
    sim.bound_ref = "constrained";
    Ok(sim)
}

/// Log-domain constant-composition bounds at block length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CcBound {
    pub augustin: f64,
    /// With the `(|X|/alpha) log2(n+1)` prefactor.
    pub log2_bound: f64,
    /// With `-(1/alpha) log2 q^n(T^n_q)` in place of the polynomial prefactor.
    pub log2_bound_exact: f64,
}

pub fn cc_exponent_bound(
    q: &TypeSpec,
    channel: &CqChannel,
    rate: f64,
    alpha: f64,
    opts: &AugustinOptions,
) -> Result<CcBound> {
    if q.counts().len() != channel.alphabet_size() {
        return Err(Error::DimensionMismatch { expected: channel.alphabet_size(), found: q.counts().len() });
    }
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha must lie in [1/2, 1]"));
    }
    let p = q.distribution();
    let ens = channel.with_prior(p.clone())?;
    let augustin = augustin_info(&ens, RenyiOrder::new(alpha)?, opts)?.value;
    let n = q.n() as f64;
    let core = -n * (1.0 - alpha) / alpha * (augustin - rate) + c_alpha(alpha).log2();
    let k = channel.alphabet_size() as f64;
    Ok(CcBound {
        augustin,
        log2_bound: core + k / alpha * (n + 1.0).log2(),
        log2_bound_exact: core - q.log2_class_probability(&p)? / alpha,
    })
}

/// `c_alpha M^((alpha-1)/alpha) Tr[(sum_x (p(x) rho^x)^alpha)^(1/alpha)]`.
pub fn cqsw_bound(source: &CqEnsemble, m: usize, alpha: f64) -> f64 {
    let s = (0..source.len()).fold(PsdOp::zeros(source.dim()), |acc, x| acc.add(&source.weighted(x).power(alpha)));
    c_alpha(alpha) * (m as f64).powf((alpha - 1.0) / alpha) * s.power(1.0 / alpha).trace()
}

/// Expected error of random binning into `M` bins with an integral alpha-PGM per bin.
pub fn cqsw_random_binning(source: &CqEnsemble, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate(1)?;
    let k = source.len();
    let targets: Vec<PsdOp> = (0..k).map(|x| source.weighted(x)).collect();
    let powers: Vec<PsdOp> = targets.iter().map(|t| t.power(cfg.alpha)).collect();
    let uniform = vec![1.0 / cfg.m as f64; cfg.m];
    let avg = average_over_strings(&uniform, k, cfg.mode, cfg.seed, |assign| {
        let mut success = 0.0;
        for bin in 0..cfg.m {
            let members: Vec<usize> = (0..k).filter(|&x| assign[x] == bin).collect();
            if members.is_empty() {
                continue;
            }
            let t: Vec<&PsdOp> = members.iter().map(|&x| &targets[x]).collect();
            let p: Vec<&PsdOp> = members.iter().map(|&x| &powers[x]).collect();
            success += integral_pgm_success(&t, &p)?;
        }
        Ok(1.0 - success)
    })?;
    Ok(SimResult {
        error_estimate: avg.mean.clamp(0.0, 1.0),
        std_err: avg.std_err,
        samples: avg.samples,
        seed: cfg.seed,
        bound: cqsw_bound(source, cfg.m, cfg.alpha),
        bound_ref: "cqsw",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqswKind {
    /// `sup (1-a)/a [R - H_a(X|B)]`.
    Iid,
    /// `sup (1-a)/a [R - H(X)_q + I^Aug_a(q)]` for a source whose prior is the type `q`.
    ConstantComposition,
    /// Same expression at the average rate of a variable-length code.
    VariableLength,
}

pub fn cqsw_exponent(kind: CqswKind, source: &CqEnsemble, rates: &[f64], opts: &AugustinOptions) -> Result<ExponentCurve> {
    match kind {
        CqswKind::Iid => exponent_curve_from(-1.0, |a| Ok(cond_renyi_entropy(source, RenyiOrder::new(a)?)?.value), rates),
        CqswKind::ConstantComposition | CqswKind::VariableLength => {
            let h = source.prior_entropy();
            exponent_curve_from(
                -1.0,
                |a| Ok(h - augustin_info(source, RenyiOrder::new(a)?, opts)?.value),
                rates,
            )
        }
    }
}

/// The `M` position-based hypotheses on `R_1 ... R_M B`, message `m` carrying
/// `N(theta_{R_m A})` and every other register in `theta_R`.
pub fn ea_hypotheses(channel: &QuantumChannel, theta: &BipartiteState, m: usize) -> Result<Vec<DensityOp>> {
    let (dr, _) = theta.dims();
    let db = channel.dim_out();
    let dim = dr.checked_pow(m as u32).and_then(|v| v.checked_mul(db)).unwrap_or(usize::MAX);
    if dim > EA_DIM_CAP {
        return Err(Error::DimensionTooLarge { dim, cap: EA_DIM_CAP });
    }
    let out = channel.apply_to_second(theta)?;
    let rest = theta.marginal_r();
    let mut dims = vec![dr; m];
    dims.push(db);
    let mut hyps = Vec::with_capacity(m);
    for msg in 0..m {
        let mut factors: Vec<&CMatrix> = vec![rest.matrix(); m - 1];
        factors.push(out.state().matrix());
        let joint = kron_all(factors);
        let perm: Vec<usize> = (0..=m)
            .map(|k| match k {
                k if k == m => m,
                k if k == msg => m - 1,
                k if k < msg => k,
                k => k - 1,
            })
            .collect();
        let mat = permute_subsystems(&joint, &dims, &perm)?;
        hyps.push(DensityOp::new(PsdOp::new(HermitianOp::hermitized(mat))?)?);
    }
    Ok(hyps)
}

/// `c_alpha 2^(-(1-alpha)/alpha [info - log2(M-1)])`.
fn packing_bound(info: f64, m: usize, alpha: f64) -> f64 {
    let s = (1.0 - alpha) / alpha;
    c_alpha(alpha) * (-s * (info - ((m - 1) as f64).log2())).exp2()
}

/// Exact error of position-based coding with the integral alpha-PGM, against
/// the bound through `I_alpha(R:B)` of `N(theta)`.
pub fn ea_position_coding(channel: &QuantumChannel, theta: &BipartiteState, m: usize, alpha: f64) -> Result<SimResult> {
    let cfg = SimConfig::enumerate(m, alpha);
    cfg.validate(2)?;
    let hyps = ea_hypotheses(channel, theta, m)?;
    let powers: Vec<PsdOp> = hyps.iter().map(|h| h.power(alpha)).collect();
    let t: Vec<&PsdOp> = hyps.iter().map(|h| h.as_psd()).collect();
    let p: Vec<&PsdOp> = powers.iter().collect();
    let error = 1.0 - integral_pgm_success(&t, &p)? / m as f64;
    let info = ea_renyi_info(&channel.apply_to_second(theta)?, RenyiOrder::new(alpha)?)?.value;
    Ok(SimResult {
        error_estimate: error.clamp(0.0, 1.0),
        std_err: 0.0,
        samples: 1,
        seed: cfg.seed,
        bound: packing_bound(info, m, alpha),
        bound_ref: "ea",
    })
}

/// Random coding over the image ensemble `x -> N(rho_A^x)`; returns the
/// bound through the order-alpha Holevo quantity and the simulation.
pub fn unassisted_bound(channel: &QuantumChannel, inputs: &CqEnsemble, cfg: &SimConfig) -> Result<(f64, SimResult)> {
    let image = channel.apply_ensemble(inputs)?;
    let mut sim = cq_random_coding(&image, cfg)?;
    let info = sibson_radius_info(&image, RenyiOrder::new(cfg.alpha)?)?.value;
    sim.bound = packing_bound(info, cfg.m, cfg.alpha);
    sim.bound_ref = "unassisted";
    Ok((sim.bound, sim))
}
