//! Seeded random instances.
//!
//! Every generator takes the random source explicitly; [`RngSeed`] builds
//! a ChaCha8 stream and derives independent child seeds for parallel work.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::ensemble::CqEnsemble;
use crate::linalg::{CMatrix, DensityOp, HermitianOp, PsdOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RngSeed(pub u64);

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child seed for work item `index`: `splitmix64(seed ^ index)`.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ index))
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// `G G^dagger` for a square Ginibre `G`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PsdOp {
    let g = ginibre(dim, dim, rng);
    PsdOp::from_trusted(HermitianOp::hermitized(&g * g.adjoint()))
}

/// `G G^dagger / Tr[G G^dagger]`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOp {
    let p = random_psd(dim, rng);
    let t = p.trace();
    DensityOp::from_trusted(p.scale(1.0 / t))
}

/// `G G^dagger / Tr` with `G` of shape `dim x rank`.
pub fn random_density_of_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityOp {
    let g = ginibre(dim, rank, rng);
    let p = PsdOp::from_trusted(HermitianOp::hermitized(&g * g.adjoint()));
    let t = p.trace();
    DensityOp::from_trusted(p.scale(1.0 / t))
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOp {
    random_density_of_rank(dim, 1, rng)
}

/// Haar unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Point of the probability simplex drawn from the flat Dirichlet law.
pub fn random_probability<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// `k` random densities of dimension `dim` with a flat-Dirichlet prior.
pub fn random_cq_ensemble<R: Rng + ?Sized>(k: usize, dim: usize, rng: &mut R) -> CqEnsemble {
    let states = (0..k).map(|_| random_density(dim, rng)).collect();
    let prior = random_probability(k, rng);
    CqEnsemble::new(prior, states).expect("generated ensemble is valid")
}

/// Unit vector with complex Gaussian direction.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| complex_normal(rng));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_density_is_one() {
        let rho = random_density(1, &mut RngSeed(99).rng());
        assert!((rho.matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn same_seed_same_bits() {
        let a = random_density(4, &mut RngSeed(5).rng());
        let b = random_density(4, &mut RngSeed(5).rng());
        assert_eq!(a.matrix(), b.matrix());
        let c = random_density(4, &mut RngSeed(6).rng());
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn psd_eigenvalues_nonnegative_over_1000_seeds() {
        for s in 0..1000 {
            let p = random_psd(2, &mut RngSeed(s).rng());
            assert!(p.min_eigenvalue() >= -1e-12 * p.op_norm());
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(5, &mut RngSeed(3).rng());
        let d = u.adjoint() * &u - CMatrix::identity(5, 5);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RngSeed(42);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(7), s.derive(7));
    }

    proptest! {
        #[test]
        fn probability_vectors_are_normalized(seed in any::<u64>(), k in 1usize..8) {
            let p = random_probability(k, &mut RngSeed(seed).rng());
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn density_has_unit_trace(seed in any::<u64>(), dim in 1usize..7) {
            let rho = random_density(dim, &mut RngSeed(seed).rng());
            prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
            prop_assert!(rho.min_eigenvalue() >= -1e-12);
        }
    }
}
