//! Classical-quantum ensembles and channels.

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, DensityOp, HermitianOp, PsdOp};

/// Letters `x` with density operators `rho^x` on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct CqChannel {
    states: Vec<DensityOp>,
}

impl CqChannel {
    pub fn new(states: Vec<DensityOp>) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::invalid("channel needs at least one letter"))?;
        let dim = first.dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[DensityOp] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &DensityOp {
        &self.states[x]
    }

    pub fn alphabet_size(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn with_prior(&self, prior: Vec<f64>) -> Result<CqEnsemble> {
        CqEnsemble::new(prior, self.states.clone())
    }

    /// `x1 x2 -> rho^x1 (x) rho^x2`, with letters numbered `x1 * k + x2`.
    pub fn tensor_square(&self) -> CqChannel {
        let mut states = Vec::with_capacity(self.states.len().pow(2));
        for a in &self.states {
            for b in &self.states {
                states.push(a.kron(b));
            }
        }
        CqChannel { states }
    }
}

/// A prior over letters together with the channel states: the c-q state
/// `sum_x p(x) |x><x| (x) rho^x`.
#[derive(Clone, Debug, PartialEq)]
pub struct CqEnsemble {
    prior: Vec<f64>,
    channel: CqChannel,
}

/// Absolute tolerance on the total mass of a prior.
pub const PRIOR_TOL: f64 = 1e-10;

pub(crate) fn check_prior(prior: &[f64]) -> Result<()> {
    if prior.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::invalid("prior entries must be finite and nonnegative"));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > PRIOR_TOL {
        return Err(Error::invalid(format!("prior sums to {total}, not 1")));
    }
    Ok(())
}

impl CqEnsemble {
    pub fn new(prior: Vec<f64>, states: Vec<DensityOp>) -> Result<Self> {
        let channel = CqChannel::new(states)?;
        if prior.len() != channel.alphabet_size() {
            return Err(Error::DimensionMismatch { expected: channel.alphabet_size(), found: prior.len() });
        }
        check_prior(&prior)?;
        Ok(Self { prior, channel })
    }

    pub fn uniform(states: Vec<DensityOp>) -> Result<Self> {
        let k = states.len().max(1);
        Self::new(vec![1.0 / k as f64; states.len()], states)
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn channel(&self) -> &CqChannel {
        &self.channel
    }

    pub fn states(&self) -> &[DensityOp] {
        self.channel.states()
    }

    pub fn state(&self, x: usize) -> &DensityOp {
        self.channel.state(x)
    }

    pub fn len(&self) -> usize {
        self.prior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prior.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.channel.dim()
    }

    /// `(x, p(x), rho^x)` for letters with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64, &DensityOp)> {
        self.prior
            .iter()
            .zip(self.states())
            .enumerate()
            .filter(|(_, (p, _))| **p > 0.0)
            .map(|(x, (p, s))| (x, *p, s))
    }

    /// `p(x) rho^x`.
    pub fn weighted(&self, x: usize) -> PsdOp {
        self.state(x).scale(self.prior[x])
    }

    /// The average state `sum_x p(x) rho^x`.
    pub fn average(&self) -> DensityOp {
        let mut acc = PsdOp::zeros(self.dim());
        for (_, p, s) in self.support() {
            acc = acc.add(&s.scale(p));
        }
        DensityOp::normalize(&acc).expect("average of densities has unit trace")
    }

    /// Shannon entropy of the prior, in bits.
    pub fn prior_entropy(&self) -> f64 {
        -self.prior.iter().filter(|&&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
    }

    /// Two independent copies, letters numbered `x1 * k + x2`.
    pub fn tensor_square(&self) -> CqEnsemble {
        let k = self.len();
        let mut prior = Vec::with_capacity(k * k);
        for a in &self.prior {
            for b in &self.prior {
                prior.push(a * b);
            }
        }
        CqEnsemble { prior, channel: self.channel.tensor_square() }
    }
}

/// A density operator on `R (x) B` with declared factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    state: DensityOp,
    dims: (usize, usize),
}

impl BipartiteState {
    pub fn new(state: DensityOp, dim_r: usize, dim_b: usize) -> Result<Self> {
        if dim_r * dim_b != state.dim() {
            return Err(Error::DimensionMismatch { expected: dim_r * dim_b, found: state.dim() });
        }
        Ok(Self { state, dims: (dim_r, dim_b) })
    }

    pub fn state(&self) -> &DensityOp {
        &self.state
    }

    /// `(d_R, d_B)`.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn marginal_r(&self) -> DensityOp {
        self.marginal(true)
    }

    pub fn marginal_b(&self) -> DensityOp {
        self.marginal(false)
    }

    fn marginal(&self, keep_r: bool) -> DensityOp {
        let (r, b) = self.dims;
        let m = partial_trace(self.state.matrix(), &[r, b], &[keep_r, !keep_r])
            .expect("dimensions validated on construction");
        DensityOp::from_trusted(PsdOp::from_trusted(HermitianOp::hermitized(m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_priors_and_dims() {
        let a = DensityOp::maximally_mixed(2);
        let b = DensityOp::maximally_mixed(3);
        assert!(CqEnsemble::new(vec![0.5, 0.5], vec![a.clone(), b]).is_err());
        assert!(CqEnsemble::new(vec![0.5, 0.6], vec![a.clone(), a.clone()]).is_err());
        assert!(CqEnsemble::new(vec![1.5, -0.5], vec![a.clone(), a.clone()]).is_err());
        assert!(CqEnsemble::new(vec![1.0], vec![a.clone(), a]).is_err());
    }

    #[test]
    fn average_and_entropy() {
        let e = CqEnsemble::uniform(vec![
            DensityOp::from_real_diagonal(&[1.0, 0.0]).unwrap(),
            DensityOp::from_real_diagonal(&[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert!(e.average().max_entry_diff(&DensityOp::maximally_mixed(2)) < 1e-15);
        assert!((e.prior_entropy() - 1.0).abs() < 1e-15);
        let sq = e.tensor_square();
        assert_eq!(sq.len(), 4);
        assert_eq!(sq.dim(), 4);
    }
}
