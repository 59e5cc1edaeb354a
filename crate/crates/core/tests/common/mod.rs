#![allow(dead_code)]

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wach_core::padic::ZpNum;
use wach_core::series::{ScaledSeries, SeriesRing};
use wach_core::wach::FilteredPhiModule;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn module(p: u64, weights: &[i64], rows: &[&[i64]]) -> FilteredPhiModule {
    let matrix = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    FilteredPhiModule::new(p, weights.to_vec(), matrix).expect("valid module")
}

/// Twelve hand-picked modules spanning p in {3, 5, 7} and d in {1, 2, 3}.
pub fn fixed_cases() -> Vec<FilteredPhiModule> {
    vec![
        module(3, &[0], &[&[1]]),
        module(3, &[1], &[&[2]]),
        module(3, &[0, 1], &[&[1, 1], &[0, 1]]),
        module(3, &[0, 0, 1], &[&[0, 1, 0], &[1, 0, 0], &[1, 1, 1]]),
        module(5, &[3], &[&[7]]),
        module(5, &[0, 2], &[&[1, 2], &[3, 4]]),
        module(5, &[1, 3], &[&[2, 1], &[1, 1]]),
        module(5, &[0, 1, 3], &[&[1, 0, 2], &[0, 3, 1], &[4, 0, 1]]),
        module(7, &[5], &[&[3]]),
        module(7, &[2, 4], &[&[1, 0], &[5, 1]]),
        module(7, &[5, 5], &[&[1, 2], &[3, 1]]),
        module(7, &[0, 3, 5], &[&[2, 1, 0], &[0, 1, 6], &[1, 0, 1]]),
    ]
}

/// Random module with a unit matrix.
pub fn random_module(rng: &mut ChaCha8Rng, p: u64, d: usize) -> FilteredPhiModule {
    let mut weights: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=p as i64 - 2)).collect();
    weights.sort_unstable();
    let bound = (p * p) as i64;
    loop {
        let matrix: Vec<Vec<BigInt>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
                    .collect()
            })
            .collect();
        if let Ok(fm) = FilteredPhiModule::new(p, weights.clone(), matrix) {
            return fm;
        }
    }
}

/// The fixed cases followed by twenty seeded random ones.
pub fn all_cases() -> Vec<FilteredPhiModule> {
    let mut cases = fixed_cases();
    let mut r = rng(0x5eed);
    for _ in 0..20 {
        let p = [3u64, 5, 7][r.gen_range(0..3)];
        let d = r.gen_range(1..=3usize);
        cases.push(random_module(&mut r, p, d));
    }
    cases
}

pub fn random_series(rng: &mut ChaCha8Rng, ring: SeriesRing) -> ScaledSeries {
    let modulus = ring.zn().modulus();
    let coeffs: Vec<u64> = (0..ring.order())
        .map(|_| rng.gen_range(0..modulus))
        .collect();
    ring.from_residues(0, &coeffs).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> ZpNum {
    loop {
        let v: i128 = rng.gen_range(1..1_000_000);
        if v % p as i128 != 0 {
            return ZpNum::new(p, prec, v).unwrap();
        }
    }
}

/// Distinguished polynomial of degree `m` with random lower coefficients.
pub fn random_distinguished(rng: &mut ChaCha8Rng, ring: SeriesRing, m: usize) -> ScaledSeries {
    let zn = ring.zn();
    let mut c: Vec<u64> = (0..m)
        .map(|_| zn.mul(ring.p(), rng.gen_range(0..zn.modulus())))
        .collect();
    c.push(1);
    ring.from_residues(0, &c).unwrap()
}
