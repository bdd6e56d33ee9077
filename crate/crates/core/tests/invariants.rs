use layercake::channel::QuantumChannel;
use layercake::info::{augustin_info, holevo_information, petz_divergence, sibson_radius_info, AugustinOptions, RenyiOrder};
use layercake::integrals::{dlog, integral_quotient};
use layercake::measure::{conventional_pgm, helstrom_error, integral_pgm, povm_error};
use layercake::packing::{cq_decode_error, cq_random_coding, Codebook, SimConfig};
use layercake::random::{random_cq_ensemble, random_density, random_psd, random_unitary};
use layercake::{CqEnsemble, HermitianOp, RngSeed};
use proptest::prelude::*;

fn order(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sibson_below_augustin_below_holevo(seed in any::<u64>(), k in 2usize..4, dim in 2usize..4, a in 0.5f64..0.99) {
        let ens = random_cq_ensemble(k, dim, &mut RngSeed(seed).rng());
        let s = sibson_radius_info(&ens, order(a)).unwrap().value;
        let aug = augustin_info(&ens, order(a), &AugustinOptions::default()).unwrap().value;
        let h = holevo_information(&ens).unwrap();
        prop_assert!(s <= aug + 1e-9, "{s} > {aug}");
        prop_assert!(aug <= h + 1e-9, "{aug} > {h}");
    }

    #[test]
    fn channels_do_not_increase_information(seed in any::<u64>(), k in 2usize..4, a in 0.5f64..1.0) {
        let mut rng = RngSeed(seed).rng();
        let ens = random_cq_ensemble(k, 2, &mut rng);
        let chan = QuantumChannel::random(2, 3, 2, &mut rng).unwrap();
        let out = chan.apply_ensemble(&ens).unwrap();
        prop_assert!(holevo_information(&out).unwrap() <= holevo_information(&ens).unwrap() + 1e-9);
        let before = sibson_radius_info(&ens, order(a)).unwrap().value;
        let after = sibson_radius_info(&out, order(a)).unwrap().value;
        prop_assert!(after <= before + 1e-9);
        let (p, q) = (random_density(2, &mut rng), random_density(2, &mut rng));
        let d0 = petz_divergence(&p, &q, order(a)).unwrap();
        let d1 = petz_divergence(&chan.apply(&p).unwrap(), &chan.apply(&q).unwrap(), order(a)).unwrap();
        prop_assert!(d1 <= d0 + 1e-9);
    }

    #[test]
    fn channels_do_not_decrease_helstrom_error(seed in any::<u64>(), p in 0.1f64..0.9) {
        let mut rng = RngSeed(seed).rng();
        let a = random_density(3, &mut rng);
        let b = random_density(3, &mut rng);
        let chan = QuantumChannel::random(3, 2, 3, &mut rng).unwrap();
        let before = helstrom_error(&a.scale(p), &b.scale(1.0 - p)).unwrap();
        let (ca, cb) = (chan.apply(&a).unwrap(), chan.apply(&b).unwrap());
        let after = helstrom_error(&ca.scale(p), &cb.scale(1.0 - p)).unwrap();
        prop_assert!(after + 1e-12 >= before);
    }

    #[test]
    fn dlog_is_unitarily_covariant(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = RngSeed(seed).rng();
        let a = random_psd(dim, &mut rng);
        let b: HermitianOp = &*random_psd(dim, &mut rng) - &*random_psd(dim, &mut rng);
        let u = random_unitary(dim, &mut rng);
        let rotated = dlog(&a.sandwich(&u), &b.sandwich(&u)).unwrap();
        let expected = dlog(&a, &b).unwrap().sandwich(&u);
        prop_assert!(rotated.max_entry_diff(&expected) < 1e-9 * expected.op_norm().max(1.0));
    }

    #[test]
    fn quotients_of_a_partition_sum_to_the_support(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = RngSeed(seed).rng();
        let a = random_psd(dim, &mut rng);
        let b = random_psd(dim, &mut rng);
        let sum: HermitianOp = &integral_quotient(&a, &b).unwrap() + &integral_quotient(&b, &a).unwrap();
        prop_assert!(sum.max_entry_diff(&HermitianOp::identity(dim)) < 1e-10);
    }

    #[test]
    fn pgm_errors_sit_above_helstrom(seed in any::<u64>(), a in 0.5f64..1.0) {
        let mut rng = RngSeed(seed).rng();
        let ens = random_cq_ensemble(2, 3, &mut rng);
        let floor = helstrom_error(&ens.weighted(0), &ens.weighted(1)).unwrap();
        for m in [conventional_pgm(&ens, a).unwrap(), integral_pgm(&ens, a).unwrap()] {
            let e = povm_error(&ens, &m, None).unwrap();
            prop_assert!(e + 1e-10 >= floor);
            prop_assert!(e <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn square_root_measurement_obeys_barnum_knill(seed in any::<u64>(), k in 2usize..4) {
        let mut rng = RngSeed(seed).rng();
        let ens = random_cq_ensemble(2, 2 + k % 2, &mut rng);
        let h = helstrom_error(&ens.weighted(0), &ens.weighted(1)).unwrap();
        let e = povm_error(&ens, &conventional_pgm(&ens, 1.0).unwrap(), None).unwrap();
        prop_assert!(1.0 - e + 1e-10 >= (1.0 - h) * (1.0 - h));
    }
}

#[test]
fn random_coding_error_is_the_prior_average_over_codebooks() {
    let ens = random_cq_ensemble(2, 2, &mut RngSeed(3).rng());
    let p = ens.prior();
    let mut oracle = 0.0;
    for x0 in 0..2 {
        for x1 in 0..2 {
            let cb = Codebook::new(vec![x0, x1], 2).unwrap();
            oracle += p[x0] * p[x1] * cq_decode_error(ens.channel(), &cb, 0.8).unwrap();
        }
    }
    let r = cq_random_coding(&ens, &SimConfig::enumerate(2, 0.8)).unwrap();
    assert!((r.error_estimate - oracle).abs() < 1e-13);
    assert!(r.error_estimate <= r.bound);
}

#[test]
fn single_letter_ensembles_carry_no_information() {
    let rho = random_density(3, &mut RngSeed(8).rng());
    let ens = CqEnsemble::new(vec![1.0], vec![rho]).unwrap();
    assert!(holevo_information(&ens).unwrap().abs() < 1e-12);
    let aug = augustin_info(&ens, order(0.7), &AugustinOptions::default()).unwrap();
    assert!(aug.value.abs() < 1e-10);
}
