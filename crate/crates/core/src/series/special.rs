//! Distinguished elements of `A+_F`: `phi^{n-1}(q)`, `mu`, `log(1 + pi)` and the
//! finite products approximating `t`.

use num_bigint::BigInt;
use serde::Serialize;

use super::endo::one_plus_pi_pow_int;
use super::{ScaledSeries, SeriesRing};
use crate::error::{Error, Result};
use crate::padic::{max_index_valuation, val_u64};

/// Degree `p^{n-1}(p-1)` of `phi^{n-1}(q)`.
pub fn elem_q_degree(p: u64, n: u32) -> Result<usize> {
    if n == 0 {
        return Err(Error::Input("level n must be positive".into()));
    }
    let mut d: u64 = p - 1;
    for _ in 1..n {
        d = d
            .checked_mul(p)
            .ok_or_else(|| Error::Input(format!("level {n} too large")))?;
    }
    usize::try_from(d).map_err(|_| Error::Input(format!("level {n} too large")))
}

/// `Phi_{p^n}(1 + pi) = sum_{j<p} (1 + pi)^{j p^{n-1}}`, truncated at `M`
/// without checking that its degree is visible.
fn cyclotomic_at_one_plus_pi(ring: SeriesRing, n: u32) -> ScaledSeries {
    let p = ring.p();
    let step = (p as u128).pow(n - 1);
    let base = one_plus_pi_pow_int(ring, step);
    let mut acc = ring.one();
    let mut term = ring.one();
    for _ in 1..p {
        term = term.mul(&base).expect("integral");
        acc = acc.add(&term).expect("integral");
    }
    acc
}

/// `phi^{n-1}(q) = Phi_{p^n}(1 + pi)`, a distinguished polynomial of degree
/// `p^{n-1}(p-1)` with constant term `p`.
pub fn elem_q(ring: SeriesRing, n: u32) -> Result<ScaledSeries> {
    let degree = elem_q_degree(ring.p(), n)?;
    if degree >= ring.order() {
        return Err(Error::TruncationTooShort {
            degree,
            order: ring.order(),
        });
    }
    Ok(cyclotomic_at_one_plus_pi(ring, n))
}

/// `mu = p / (q - pi^{p-1})`, a unit with `mu(0) = 1`.
pub fn elem_mu(ring: SeriesRing) -> Result<ScaledSeries> {
    let p = ring.p();
    let top = (p - 1) as usize;
    if top >= ring.order() {
        return Err(Error::TruncationTooShort {
            degree: top,
            order: ring.order(),
        });
    }
    // (q - pi^{p-1}) / p has integer coefficients C(p, k+1) / p for k < p - 1.
    let mut coeffs = Vec::with_capacity(top);
    let mut binom = BigInt::from(1u32);
    for k in 0..top as u64 {
        binom = binom * BigInt::from(p - k) / BigInt::from(k + 1);
        coeffs.push(ring.zn().from_bigint(&(&binom / BigInt::from(p))));
    }
    let reduced = ring.from_residues(0, &coeffs)?;
    reduced.invert()
}

/// `log(1 + pi) = sum_{k>=1} (-1)^{k+1} pi^k / k` with the smallest common
/// denominator `p^e`, `e = max_{k<M} v_p(k)`.
pub fn log_one_plus_pi(ring: SeriesRing) -> Result<ScaledSeries> {
    let p = ring.p();
    let zn = ring.zn();
    let e = max_index_valuation(ring.order(), p);
    if e >= ring.prec() {
        return Err(Error::DenominatorOverflow {
            e,
            prec: ring.prec(),
        });
    }
    let mut coeffs = vec![0u64; ring.order()];
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        let v = val_u64(k as u64, p);
        let unit = (k as u64) / p.pow(v);
        let inv = zn.inv(zn.reduce(unit)).expect("unit");
        let mut c = zn.mul(inv, zn.pow(p, (e - v) as u128));
        if k % 2 == 0 {
            c = zn.neg(c);
        }
        *slot = c;
    }
    ring.from_residues(e, &coeffs)
}

/// `pi * prod_{n=1}^{L} phi^{n-1}(q) / p`, carried at denominator `p^L`.
pub fn t_product(ring: SeriesRing, factors: u32) -> Result<ScaledSeries> {
    if factors >= ring.prec() {
        return Err(Error::DenominatorOverflow {
            e: factors,
            prec: ring.prec(),
        });
    }
    let mut acc = ring.pi();
    for n in 1..=factors {
        let q = cyclotomic_at_one_plus_pi(ring, n);
        let factor = ring.from_residues(1, q.coeffs())?;
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// Lower bound on `v_p` of the coefficients of `t_product(L) - log(1 + pi)`
/// below `pi^M`.
///
/// The `pi^k` coefficient of the product is `C(p^L, k) / p^L`, and
/// `C(x, k)/x - (-1)^{k-1}/k = (-1)^{k-1}/k * (prod_{i<k} (1 - x/i) - 1)`,
/// whose valuation is at least `L - max_{i<k} v_p(i) - v_p(k)`.
pub fn t_truncation_bound(p: u64, order: usize, factors: u32) -> i64 {
    let mut bound = i64::MAX;
    let mut max_prev = 0u32;
    for k in 1..order {
        if k > 1 {
            max_prev = max_prev.max(val_u64((k - 1) as u64, p));
        }
        let b = factors as i64 - max_prev as i64 - val_u64(k as u64, p) as i64;
        bound = bound.min(b);
    }
    bound
}

/// Comparison of the finite product for `t` with `log(1 + pi)`.
#[derive(Debug, Clone, Serialize)]
pub struct TDecomposition {
    pub factors: u32,
    /// Number of p-adic digits to which the two sides are certified to agree.
    pub agreement_precision: u32,
    pub holds: bool,
    pub product: String,
    pub log: String,
    pub difference: String,
}

/// Compare `t_product(L)` with `log(1 + pi)` at the guaranteed precision
/// `min(N - L, N - e_log, truncation bound)`.
pub fn t_decomposition_with(ring: SeriesRing, factors: u32) -> Result<TDecomposition> {
    let product = t_product(ring, factors)?;
    let log = log_one_plus_pi(ring)?;
    let difference = product.sub(&log)?;
    let bound = t_truncation_bound(ring.p(), ring.order(), factors);
    let rho = (product.precision().min(log.precision()) as i64)
        .min(bound)
        .max(0) as u32;
    let holds = difference.vanishes_mod_p_pow(rho)?;
    Ok(TDecomposition {
        factors,
        agreement_precision: rho,
        holds,
        product: product.to_string(),
        log: log.to_string(),
        difference: difference.normalize().to_string(),
    })
}

/// As [`t_decomposition_with`], choosing the factor count that maximises the
/// certified agreement.
pub fn t_decomposition(ring: SeriesRing) -> Result<TDecomposition> {
    let e_log = max_index_valuation(ring.order(), ring.p());
    let best = (0..ring.prec())
        .max_by_key(|&l| {
            let rho = ((ring.prec() - l).min(ring.prec().saturating_sub(e_log)) as i64)
                .min(t_truncation_bound(ring.p(), ring.order(), l));
            // prefer fewer factors on ties
            (rho, std::cmp::Reverse(l))
        })
        .unwrap_or(0);
    t_decomposition_with(ring, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::frobenius;

    fn ring(p: u64, n: u32, m: usize) -> SeriesRing {
        SeriesRing::new(p, n, m).unwrap()
    }

    #[test]
    fn q_small_cases() {
        assert_eq!(
            elem_q(ring(3, 4, 5), 1).unwrap(),
            ring(3, 4, 5).from_ints(&[3, 3, 1])
        );
        assert_eq!(
            elem_q(ring(5, 4, 6), 1).unwrap(),
            ring(5, 4, 6).from_ints(&[5, 10, 10, 5, 1])
        );
        assert!(matches!(
            elem_q(ring(5, 4, 4), 1),
            Err(Error::TruncationTooShort {
                degree: 4,
                order: 4
            })
        ));
    }

    #[test]
    fn q_level_two_from_direct_expansion() {
        // Phi_9(x) = 1 + x^3 + x^6 at x = 1 + pi, expanded with integer binomials.
        let r = ring(3, 5, 9);
        let binom =
            |n: i128, k: i128| -> i128 { (0..k).fold(1i128, |acc, i| acc * (n - i) / (i + 1)) };
        let expected: Vec<i128> = (0..9)
            .map(|k| {
                [0, 3, 6]
                    .iter()
                    .map(|&e| if k <= e { binom(e, k) } else { 0 })
                    .sum()
            })
            .collect();
        let q2 = elem_q(r, 2).unwrap();
        assert_eq!(q2, r.from_ints(&expected));
        assert_eq!(q2.coeffs()[0], 3);
        assert_eq!(q2.coeffs()[6], 1);
    }

    #[test]
    fn q_levels_are_frobenius_iterates() {
        let r = ring(3, 6, 30);
        let q1 = elem_q(r, 1).unwrap();
        let q2 = elem_q(r, 2).unwrap();
        let q3 = elem_q(r, 3).unwrap();
        assert_eq!(frobenius(&q1).unwrap(), q2);
        assert_eq!(frobenius(&q2).unwrap(), q3);
    }

    #[test]
    fn mu_closed_form_at_three() {
        let r = ring(3, 5, 8);
        let mu = elem_mu(r).unwrap();
        assert_eq!(mu, r.from_ints(&[1, 1]).invert().unwrap());
    }

    #[test]
    fn mu_defining_identity() {
        for p in [3, 5, 7, 11] {
            let r = ring(p, 4, 20);
            let mu = elem_mu(r).unwrap();
            let q = elem_q(r, 1).unwrap();
            let lhs = mu.mul(&q.sub(&r.pi_pow(p as usize - 1)).unwrap()).unwrap();
            assert_eq!(lhs, r.constant(p as i128));
            assert_eq!(mu.coeffs()[0], 1);
        }
    }

    #[test]
    fn mu_q_is_p_mod_low_order() {
        let r = ring(5, 4, 12);
        let prod = elem_mu(r).unwrap().mul(&elem_q(r, 1).unwrap()).unwrap();
        assert_eq!(&prod.coeffs()[..4], &[5, 0, 0, 0]);
    }

    #[test]
    fn log_with_unit_denominators() {
        let r = ring(5, 3, 4);
        let log = log_one_plus_pi(r).unwrap();
        assert_eq!(log.e(), 0);
        let zn = r.zn();
        assert_eq!(log.coeffs()[1], 1);
        assert_eq!(log.coeffs()[2], zn.neg(zn.inv(2).unwrap()));
        assert_eq!(log.coeffs()[3], zn.inv(3).unwrap());
    }

    #[test]
    fn empty_product_is_pi() {
        let r = ring(3, 5, 6);
        assert_eq!(t_product(r, 0).unwrap(), r.pi());
    }

    #[test]
    fn two_factor_product_against_log() {
        let r = ring(3, 8, 6);
        let t = t_decomposition_with(r, 2).unwrap();
        assert_eq!(t.agreement_precision, 1);
        assert!(t.holds);
    }

    #[test]
    fn truncation_bound_small_cases() {
        assert_eq!(t_truncation_bound(3, 6, 2), 1);
        assert_eq!(t_truncation_bound(3, 18, 6), 3);
    }
}
