//! Weierstrass division by distinguished polynomials, exact division, and
//! Gamma-stable principal ideals.
//!
//! Precision bookkeeping: when `f` stands for a series known modulo
//! `(p^N, pi^M)`, dividing by a distinguished `D` of degree `m` only
//! determines the quotient below `pi^{M - N m}` and the remainder modulo
//! `p^{min(N, floor(M/m))}`. Reducing the unknown tail `pi^M g` modulo `D`
//! trades each `m` orders of `pi` for one digit of `p`.

use serde::Serialize;

use super::endo::Substitution;
use super::special::elem_q;
use super::{mul_trunc, ScaledSeries, SeriesRing};
use crate::error::{Error, Result};
use crate::padic::ZpNum;

/// Degree of a monic distinguished polynomial (lower coefficients divisible
/// by `p`, nothing above the leading term).
pub fn distinguished_degree(d: &ScaledSeries) -> Result<usize> {
    let d = d.normalize();
    if d.e() != 0 {
        return Err(Error::NotDistinguished(format!("{d} is not integral")));
    }
    let zn = d.ring().zn();
    let coeffs = d.coeffs();
    let m = coeffs
        .iter()
        .position(|&c| zn.is_unit(c))
        .ok_or_else(|| Error::NotDistinguished(format!("no unit coefficient visible in {d}")))?;
    if coeffs[m] != 1 {
        return Err(Error::NotDistinguished(format!("{d} is not monic")));
    }
    if coeffs[m + 1..].iter().any(|&c| c != 0) {
        return Err(Error::NotDistinguished(format!("{d} is not a polynomial")));
    }
    if m == 0 {
        return Err(Error::NotDistinguished("degree zero".into()));
    }
    Ok(m)
}

/// Order below which the quotient of a truncated series by a degree-`m`
/// distinguished polynomial is determined, or `None` if nothing is.
pub fn quotient_order(order: usize, prec: u32, m: usize) -> Option<usize> {
    order.checked_sub(prec as usize * m).filter(|&o| o > 0)
}

/// Digits of the remainder determined by a series truncated at `order`.
pub fn remainder_precision(order: usize, prec: u32, m: usize) -> u32 {
    prec.min((order / m) as u32)
}

/// `f = D h + r` with `deg r < m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassDivision {
    /// At truncation order `M - m`.
    pub quotient: ScaledSeries,
    /// At truncation order `m`: the coefficients of `r`.
    pub remainder: ScaledSeries,
}

/// Division of the polynomial representative of `f` by the distinguished
/// polynomial `d`, by `N` passes of successive approximation.
///
/// Modulo `p`, `d = pi^m`; each pass splits the residual at `pi^m` and the
/// leftover `-(d - pi^m) * high part` gains a factor `p`. After `N` passes the
/// residual vanishes and `D h + r = f` holds exactly modulo `(p^N, pi^M)`.
/// The cost is `O(N M m)`.
pub fn weierstrass_divide(f: &ScaledSeries, d: &ScaledSeries) -> Result<WeierstrassDivision> {
    let f = f.normalize();
    if f.e() != 0 {
        return Err(Error::Usage(
            "Weierstrass division needs an integral dividend".into(),
        ));
    }
    let m = distinguished_degree(d)?;
    let ring = f
        .ring()
        .with_order(f.ring().order().min(d.ring().order()))?;
    let ring = if d.ring().prec() < ring.prec() {
        ring.with_prec(d.ring().prec())?
    } else {
        ring
    };
    let order = ring.order();
    if m >= order {
        return Err(Error::TruncationTooShort { degree: m, order });
    }
    let zn = ring.zn();
    let low: Vec<u64> = d.coeffs()[..m].iter().map(|&c| zn.reduce(c)).collect();

    let mut residual: Vec<u64> = f.coeffs()[..order].iter().map(|&c| zn.reduce(c)).collect();
    let mut quotient = vec![0u64; order - m];
    let mut remainder = vec![0u64; m];
    for _ in 0..ring.prec() {
        if residual.iter().all(|&c| c == 0) {
            break;
        }
        for (r, &c) in remainder.iter_mut().zip(&residual[..m]) {
            *r = zn.add(*r, c);
        }
        let high = residual[m..].to_vec();
        for (h, &c) in quotient.iter_mut().zip(&high) {
            *h = zn.add(*h, c);
        }
        // deg(low * high) < M: no truncation happens here.
        let next = mul_trunc(zn, &low, &high, order);
        residual = next.into_iter().map(|c| zn.neg(c)).collect();
    }
    debug_assert!(residual.iter().all(|&c| c == 0));
    Ok(WeierstrassDivision {
        quotient: ScaledSeries::from_raw(ring.with_order(order - m)?, 0, quotient),
        remainder: ScaledSeries::from_raw(ring.with_order(m)?, 0, remainder),
    })
}

/// Divisors understood by [`divide_exact`].
#[derive(Debug, Clone)]
pub enum Divisor {
    PiPower(usize),
    /// `base^exponent` for a distinguished polynomial `base`.
    Power {
        base: ScaledSeries,
        exponent: u32,
    },
}

impl Divisor {
    /// `phi^{n-1}(q)^k`.
    pub fn q_power(ring: SeriesRing, n: u32, k: u32) -> Result<Divisor> {
        Ok(Divisor::Power {
            base: elem_q(ring, n)?,
            exponent: k,
        })
    }

    fn describe(&self) -> String {
        match self {
            Divisor::PiPower(k) => format!("pi^{k}"),
            Divisor::Power { base, exponent } => format!("({base})^{exponent}"),
        }
    }
}

/// Exact quotient `f / d` for a truncated series `f`, or `NotDivisible` with
/// the offending remainder.
///
/// For `pi^k` the first `k` coefficients must vanish. For powers of a
/// distinguished polynomial each division step checks the remainder at the
/// digits it determines and keeps the quotient only where it is determined
/// (see the module notes), so the result has a smaller truncation order.
pub fn divide_exact(f: &ScaledSeries, d: &Divisor) -> Result<ScaledSeries> {
    let f = f.normalize();
    if f.e() != 0 {
        return Err(Error::Usage(
            "exact division needs an integral dividend".into(),
        ));
    }
    match d {
        Divisor::PiPower(k) => {
            let k = *k;
            if k >= f.ring().order() {
                return Err(Error::PrecisionExhausted(format!(
                    "pi^{k} at truncation order {}",
                    f.ring().order()
                )));
            }
            if f.coeffs()[..k].iter().any(|&c| c != 0) {
                let mut low = f.ring().zero();
                low.coeffs[..k].copy_from_slice(&f.coeffs()[..k]);
                return Err(Error::NotDivisible {
                    divisor: d.describe(),
                    remainder: Box::new(low),
                });
            }
            f.shift_down(k)
        }
        Divisor::Power { base, exponent } => {
            let m = distinguished_degree(base)?;
            let mut cur = f;
            for _ in 0..*exponent {
                let ring = cur.ring();
                let out_order = quotient_order(ring.order(), ring.prec(), m).ok_or_else(|| {
                    Error::PrecisionExhausted(format!(
                        "dividing by a degree-{m} polynomial at (N, M) = ({}, {})",
                        ring.prec(),
                        ring.order()
                    ))
                })?;
                let digits = remainder_precision(ring.order(), ring.prec(), m);
                let wd = weierstrass_divide(&cur, base)?;
                if !wd.remainder.vanishes_mod_p_pow(digits)? {
                    return Err(Error::NotDivisible {
                        divisor: d.describe(),
                        remainder: Box::new(wd.remainder),
                    });
                }
                cur = wd.quotient.truncate_to(ring.with_order(out_order)?)?;
            }
            Ok(cur)
        }
    }
}

/// One prime factor of an element of `B+_F` in factored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Pi,
    /// A monic distinguished polynomial.
    Distinguished(ScaledSeries),
}

/// `p^-denominator * prod factor^exponent`.
#[derive(Debug, Clone)]
pub struct FactoredElement {
    pub ring: SeriesRing,
    pub factors: Vec<(Factor, u32)>,
    pub denominator: u32,
}

impl FactoredElement {
    pub fn expand(&self) -> Result<ScaledSeries> {
        let mut acc = self.ring.one();
        for (factor, k) in &self.factors {
            let base = match factor {
                Factor::Pi => self.ring.pi(),
                Factor::Distinguished(d) => d.truncate_to(self.ring)?,
            };
            acc = acc.mul(&base.pow(*k)?)?;
        }
        if self.denominator > 0 {
            acc = self.ring.from_residues(self.denominator, acc.coeffs())?;
        }
        Ok(acc)
    }
}

/// `pi^{j0} prod_{n>=1} (phi^{n-1}(q) / p)^{j_n}`, or without the `/p` when
/// `denom` is false. `js[i]` is the exponent of `phi^i(q)`.
pub fn gamma_stable_generator(
    ring: SeriesRing,
    j0: u32,
    js: &[u32],
    denom: bool,
) -> Result<(ScaledSeries, FactoredElement)> {
    let mut factors = Vec::new();
    if j0 > 0 {
        factors.push((Factor::Pi, j0));
    }
    let mut total = 0u32;
    for (i, &j) in js.iter().enumerate() {
        if j > 0 {
            factors.push((Factor::Distinguished(elem_q(ring, i as u32 + 1)?), j));
            total += j;
        }
    }
    let elem = FactoredElement {
        ring,
        factors,
        denominator: if denom { total } else { 0 },
    };
    Ok((elem.expand()?, elem))
}

/// Evidence that `gamma_c(g) = u g` with `u` a unit.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityCertificate {
    pub unit: String,
    pub factor_units: Vec<String>,
    /// `gamma_c(g) = u g` rechecked on the expanded generator.
    pub identity_holds: bool,
    #[serde(skip)]
    pub unit_series: Option<ScaledSeries>,
}

/// Decide factorwise whether the ideal generated by `elem` is stable under
/// `gamma_c`: `gamma_c(pi)/pi` is always a unit, and for a distinguished
/// factor `D` the Weierstrass remainder of `gamma_c(D)` by `D` must vanish.
pub fn is_gamma_stable(elem: &FactoredElement, c: &ZpNum) -> Result<StabilityCertificate> {
    let ring = elem.ring;
    let zn = ring.zn();
    let mut unit = ring.one();
    let mut factor_units = Vec::new();
    for (factor, k) in &elem.factors {
        let u = match factor {
            Factor::Pi => {
                let wide = ring.with_order(ring.order() + 1)?;
                let g = Substitution::gamma(wide, c)?;
                g.image_of_pi().shift_down(1)?
            }
            Factor::Distinguished(d) => {
                let m = distinguished_degree(d)?;
                // Work far enough out that the quotient is determined below pi^M.
                let wide = ring.with_order(ring.order() + ring.prec() as usize * m)?;
                let d_wide = d.embed_exact(wide)?;
                let image = Substitution::gamma(wide, c)?.apply(&d_wide)?;
                let wd = weierstrass_divide(&image, &d_wide)?;
                let digits = remainder_precision(wide.order(), wide.prec(), m);
                if !wd.remainder.vanishes_mod_p_pow(digits)? {
                    return Err(Error::NotStable {
                        remainder: Box::new(wd.remainder),
                    });
                }
                let h = wd.quotient.truncate_to(ring)?;
                if !zn.is_unit(h.coeffs()[0]) {
                    return Err(Error::NotStable {
                        remainder: Box::new(wd.remainder),
                    });
                }
                h
            }
        };
        unit = unit.mul(&u.pow(*k)?)?;
        factor_units.push(u.to_string());
    }
    let g = elem.expand()?;
    let lhs = Substitution::gamma(ring, c)?.apply(&g)?;
    let rhs = unit.mul(&g)?;
    let identity_holds = lhs.sub(&rhs)?.is_zero();
    Ok(StabilityCertificate {
        unit: unit.to_string(),
        factor_units,
        identity_holds,
        unit_series: Some(unit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32, m: usize) -> SeriesRing {
        SeriesRing::new(p, n, m).unwrap()
    }

    #[test]
    fn divide_by_itself() {
        let r = ring(3, 4, 8);
        let q = elem_q(r, 1).unwrap();
        let wd = weierstrass_divide(&q, &q).unwrap();
        assert_eq!(wd.quotient, r.with_order(6).unwrap().one());
        assert!(wd.remainder.is_zero());
    }

    #[test]
    fn single_reduction_step() {
        let r = ring(3, 4, 6);
        let q = elem_q(r, 1).unwrap();
        let wd = weierstrass_divide(&r.pi_pow(2), &q).unwrap();
        assert_eq!(wd.remainder, r.with_order(2).unwrap().from_ints(&[-3, -3]));
        assert_eq!(wd.quotient, r.with_order(4).unwrap().one());
    }

    #[test]
    fn long_division_agrees() {
        // Plain long division by a monic polynomial gives the same answer.
        let r = ring(5, 3, 10);
        let d = r.from_ints(&[5, 15, 1]);
        let f = r.from_ints(&[7, 3, 1, 4, 8, 2, 9, 1, 6, 3]);
        let wd = weierstrass_divide(&f, &d).unwrap();
        let zn = r.zn();
        let mut rem: Vec<u64> = f.coeffs().to_vec();
        let mut quo = [0u64; 8];
        for k in (2..10).rev() {
            let c = rem[k];
            quo[k - 2] = c;
            for (i, &dc) in d.coeffs()[..3].iter().enumerate() {
                rem[k - 2 + i] = zn.sub(rem[k - 2 + i], zn.mul(c, dc));
            }
        }
        assert_eq!(wd.quotient.coeffs(), &quo[..]);
        assert_eq!(wd.remainder.coeffs(), &rem[..2]);
    }

    #[test]
    fn exact_division_examples() {
        let r = ring(3, 4, 8);
        assert_eq!(
            divide_exact(&r.pi_pow(3), &Divisor::PiPower(1)).unwrap(),
            r.with_order(7).unwrap().pi_pow(2)
        );
        assert!(matches!(
            divide_exact(&r.from_ints(&[1, 1]), &Divisor::PiPower(1)),
            Err(Error::NotDivisible { .. })
        ));
        let r = ring(3, 3, 12);
        let q = elem_q(r, 1).unwrap();
        let f = q.mul(&r.from_ints(&[1, 1])).unwrap();
        let quotient = divide_exact(&f, &Divisor::q_power(r, 1, 1).unwrap()).unwrap();
        assert_eq!(quotient, r.with_order(6).unwrap().from_ints(&[1, 1]));
    }

    #[test]
    fn exact_division_rejects_non_multiples() {
        let r = ring(3, 3, 12);
        let err = divide_exact(&r.from_ints(&[1, 1]), &Divisor::q_power(r, 1, 1).unwrap());
        assert!(matches!(err, Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn distinguished_checks() {
        let r = ring(3, 3, 6);
        assert_eq!(distinguished_degree(&r.from_ints(&[3, 1])).unwrap(), 1);
        assert!(distinguished_degree(&r.from_ints(&[1, 1])).is_err());
        assert!(distinguished_degree(&r.from_ints(&[3, 2])).is_err());
        assert!(distinguished_degree(&r.from_ints(&[3, 1, 1])).is_err());
    }

    #[test]
    fn pi_is_stable() {
        let r = ring(5, 3, 8);
        let c = ZpNum::new(5, 6, 6).unwrap();
        let (_, elem) = gamma_stable_generator(r, 1, &[], false).unwrap();
        let cert = is_gamma_stable(&elem, &c).unwrap();
        assert!(cert.identity_holds);
        assert_eq!(cert.unit_series.unwrap().coeffs()[0], 6);
    }

    #[test]
    fn q_is_stable_under_one_plus_p() {
        let r = ring(3, 6, 12);
        let c = ZpNum::new(3, 12, 4).unwrap();
        let (_, elem) = gamma_stable_generator(r, 0, &[1], false).unwrap();
        let cert = is_gamma_stable(&elem, &c).unwrap();
        assert!(cert.identity_holds);
    }

    #[test]
    fn p_plus_pi_is_not_stable() {
        let r = ring(3, 6, 12);
        let c = ZpNum::new(3, 12, 4).unwrap();
        let elem = FactoredElement {
            ring: r,
            factors: vec![(Factor::Distinguished(r.from_ints(&[3, 1])), 1)],
            denominator: 0,
        };
        match is_gamma_stable(&elem, &c) {
            Err(Error::NotStable { remainder }) => {
                // gamma_4(3 + pi) at pi = -3 is 3 + (-2)^4 - 1 = 18
                assert_eq!(remainder.coeffs()[0], 18);
            }
            other => panic!("expected NotStable, got {other:?}"),
        }
    }
}
