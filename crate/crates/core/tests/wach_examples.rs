mod common;

use num_bigint::BigInt;
use num_integer::Integer;

use common::{module, random_module, rng};
use wach_core::error::Error;
use wach_core::padic::ZpNum;
use wach_core::wach::{
    build_wach, congruence_check, default_gamma_generators, precision_stability, verify_diagonal,
    verify_heights, FilteredPhiModule, GammaChoice,
};

/// Leading residue of a rendered scalar such as `"182 [N_q = 6]"`.
fn scalar(s: &str) -> u64 {
    s.split_whitespace().next().unwrap().parse().unwrap()
}

/// Inverse of a unit mod p^k by brute-force search.
fn inverse_mod(c: u64, p: u64, k: u32) -> u64 {
    let m = p.pow(k);
    (1..m).find(|x| (x * (c % m)) % m == 1).expect("unit")
}

#[test]
fn default_generators_for_p5() {
    let g = default_gamma_generators(5, 2).unwrap();
    let residues: Vec<u64> = g.iter().map(ZpNum::residue).collect();
    assert_eq!(residues, vec![7, 6]);
}

#[test]
fn diagonal_two_weights_p5() {
    let fm = module(5, &[0, 1], &[&[1, 1], &[0, 1]]);
    let w = build_wach(&fm, &GammaChoice::Default, 6, 24).unwrap();
    let r = verify_diagonal(&w, 1, &BigInt::from(6)).unwrap();
    assert!(r.passed, "{r:?}");
    // (X - 1)(X - 6^{-1}) = X^2 - (1 + u) X + u
    let u = inverse_mod(6, 5, r.nq);
    let m = 5u64.pow(r.nq);
    let expected = [u % m, (2 * m - 1 - u) % m, 1];
    let got: Vec<u64> = r.char_poly.iter().map(|s| scalar(s)).collect();
    assert_eq!(got, expected);
}

#[test]
fn diagonal_rank_one_p3() {
    let fm = module(3, &[1], &[&[1]]);
    let w = build_wach(&fm, &GammaChoice::Default, 6, 24).unwrap();
    let r = verify_diagonal(&w, 1, &BigInt::from(4)).unwrap();
    assert!(r.passed);
    let u = inverse_mod(4, 3, r.nq);
    let m = 3u64.pow(r.nq);
    assert_eq!(scalar(&r.char_poly[0]), (m - u) % m);
}

#[test]
fn diagonal_refuses_c_not_in_gamma_n() {
    let fm = module(3, &[1], &[&[1]]);
    let w = build_wach(&fm, &GammaChoice::Default, 6, 24).unwrap();
    assert!(matches!(
        verify_diagonal(&w, 2, &BigInt::from(4)),
        Err(Error::HypothesisNotMet(_))
    ));
}

#[test]
fn heights_for_random_equal_weights() {
    let mut r = rng(42);
    for _ in 0..20 {
        // reuse a random unit matrix with weights forced to (1, 1)
        let base = random_module(&mut r, 5, 2);
        let fm = FilteredPhiModule::new(5, vec![1, 1], base.matrix().to_vec()).unwrap();
        let w = build_wach(&fm, &GammaChoice::Default, 4, 24).unwrap();
        assert!(verify_heights(&w).unwrap().passed);
    }
}

#[test]
fn congruence_of_one_and_twenty_six() {
    let w1 = build_wach(&module(5, &[1], &[&[1]]), &GammaChoice::Default, 5, 24).unwrap();
    let w2 = build_wach(&module(5, &[1], &[&[26]]), &GammaChoice::Default, 5, 24).unwrap();
    assert!(congruence_check(&w1, &w2, 2).unwrap().congruent);
    let at3 = congruence_check(&w1, &w2, 3).unwrap();
    assert!(!at3.congruent);
    assert!(at3.first_mismatch.is_some());
}

#[test]
fn congruence_guard() {
    // p^{n-1}(p-1) >= r + 1 holds for every n >= 1 when r <= p - 2
    let w = build_wach(&module(5, &[3], &[&[1]]), &GammaChoice::Default, 4, 24).unwrap();
    assert!(congruence_check(&w, &w, 1).unwrap().congruent);
    assert!(matches!(
        congruence_check(&w, &w, 0),
        Err(Error::HypothesisNotMet(_))
    ));
}

#[test]
fn stability_examples() {
    let cases = [
        (module(3, &[1], &[&[1]]), 3, 5, 12),
        (module(5, &[0, 2], &[&[1, 2], &[3, 4]]), 4, 6, 24),
    ];
    for (fm, low, high, order) in cases {
        let s = precision_stability(&fm, &GammaChoice::Default, low, high, order).unwrap();
        assert!(s.agrees, "{s:?}");
    }
}

#[test]
fn explicit_generators_are_used() {
    let fm = module(5, &[2], &[&[3]]);
    let choice = GammaChoice::Explicit(vec![BigInt::from(6), BigInt::from(2)]);
    let w = build_wach(&fm, &choice, 3, 16).unwrap();
    let cs: Vec<u64> = w
        .gens
        .iter()
        .map(|g| g.c.residue().mod_floor(&125))
        .collect();
    assert_eq!(cs, vec![6, 2]);
    assert!(w.invariants().unwrap().all_hold());
}
