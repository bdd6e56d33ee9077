//! Quantum channels in Kraus form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::ensemble::{BipartiteState, CqEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{kron_all, max_abs_entry, CMatrix, DensityOp, HermitianOp, PsdOp};
use crate::random::ginibre;

/// Allowed deviation of `sum K^dag K` from the identity.
pub const TRACE_PRESERVING_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::invalid("a channel needs at least one Kraus operator"))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::invalid("Kraus operators must be non-empty"));
        }
        let mut total = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::invalid(format!(
                    "Kraus operator of shape {:?}, expected {:?}",
                    k.shape(),
                    (dim_out, dim_in)
                )));
            }
            total += k.adjoint() * k;
        }
        let gap = max_abs_entry(&(total - CMatrix::identity(dim_in, dim_in)));
        if gap > TRACE_PRESERVING_TOL {
            return Err(Error::invalid(format!("Kraus operators are not trace preserving (gap {gap:.3e})")));
        }
        Ok(Self { kraus, dim_in, dim_out })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![CMatrix::identity(dim, dim)], dim_in: dim, dim_out: dim }
    }

    /// `rho -> (1 - p) rho + p Tr[rho] I / d` through the Weyl operators.
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || dim == 0 {
            return Err(Error::invalid("depolarizing needs p in [0, 1] and dim >= 1"));
        }
        let d = dim as f64;
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d);
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let w = DMatrix::from_fn(dim, dim, |i, j| {
                    if i == (j + a) % dim {
                        omega.powu((j * b) as u32)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                let c = if a == 0 && b == 0 { (1.0 - p + p / (d * d)).sqrt() } else { p.sqrt() / d };
                kraus.push(w * Complex64::new(c, 0.0));
            }
        }
        Self::new(kraus)
    }

    /// Random channel from a Haar-like Stinespring isometry with `rank` Kraus operators.
    pub fn random<R: Rng + ?Sized>(dim_in: usize, dim_out: usize, rank: usize, rng: &mut R) -> Result<Self> {
        if dim_out * rank < dim_in || dim_in == 0 {
            return Err(Error::invalid("Stinespring dilation too small for an isometry"));
        }
        let v = ginibre(dim_out * rank, dim_in, rng).qr().q();
        let kraus = (0..rank).map(|j| v.rows(j * dim_out, dim_out).into_owned()).collect();
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: rho.dim() });
        }
        let out = self.kraus.iter().fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, k| {
            acc + k * rho.matrix() * k.adjoint()
        });
        DensityOp::new(PsdOp::new(HermitianOp::hermitized(out))?)
    }

    /// `(id_R (x) N)(theta_RA)` for a state whose second factor is the input.
    pub fn apply_to_second(&self, theta: &BipartiteState) -> Result<BipartiteState> {
        let (dr, da) = theta.dims();
        if da != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: da });
        }
        let id = CMatrix::identity(dr, dr);
        let n = dr * self.dim_out;
        let out = self.kraus.iter().fold(CMatrix::zeros(n, n), |acc, k| {
            let big = kron_all([&id, k]);
            acc + &big * theta.state().matrix() * big.adjoint()
        });
        BipartiteState::new(DensityOp::new(PsdOp::new(HermitianOp::hermitized(out))?)?, dr, self.dim_out)
    }

    /// Image ensemble `x -> N(rho^x)` with the same prior.
    pub fn apply_ensemble(&self, ens: &CqEnsemble) -> Result<CqEnsemble> {
        let states = ens.states().iter().map(|s| self.apply(s)).collect::<Result<_>>()?;
        CqEnsemble::new(ens.prior().to_vec(), states)
    }
}
