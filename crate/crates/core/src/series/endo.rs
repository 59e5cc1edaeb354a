//! Substitution endomorphisms `pi -> g(pi)`: Frobenius and the Gamma action.

use super::{mul_trunc, ScaledSeries, SeriesRing};
use crate::error::{Error, Result};
use crate::padic::{max_index_valuation, ZpNum};

/// `(1 + pi)^c` for a p-adic integer `c`.
///
/// `c` has to carry `v = max_{k<M} v_p(k)` digits beyond `N`: changing `c` by
/// `p^(N+v)` moves each `C(c, k)`, `k < M`, by a multiple of `p^N`.
pub fn one_plus_pi_pow(ring: SeriesRing, c: &ZpNum) -> Result<ScaledSeries> {
    if c.p() != ring.p() {
        return Err(Error::Usage("mismatched primes".into()));
    }
    let guard = max_index_valuation(ring.order(), ring.p());
    if c.prec() < ring.prec() + guard {
        return Err(Error::Precision(format!(
            "(1+pi)^c at (N, M) = ({}, {}) needs c to {} digits, got {}",
            ring.prec(),
            ring.order(),
            ring.prec() + guard,
            c.prec()
        )));
    }
    Ok(one_plus_pi_pow_int(ring, c.residue() as u128))
}

/// `(1 + pi)^k` for a nonnegative integer, by repeated squaring.
pub(crate) fn one_plus_pi_pow_int(ring: SeriesRing, mut k: u128) -> ScaledSeries {
    let zn = ring.zn();
    let order = ring.order();
    let mut base = ring.from_ints(&[1, 1]).coeffs;
    let mut acc = ring.one().coeffs;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_trunc(zn, &acc, &base, order);
        }
        k >>= 1;
        if k > 0 {
            base = mul_trunc(zn, &base, &base, order);
        }
    }
    ScaledSeries::from_raw(ring, 0, acc)
}

/// A ring endomorphism `f(pi) -> f(g(pi))` with `g(0) = 0`, with the powers
/// of `g` cached so each application costs `O(M^2)`.
#[derive(Debug, Clone)]
pub struct Substitution {
    ring: SeriesRing,
    image_of_pi: ScaledSeries,
    /// `columns[j][k]` is the `pi^j` coefficient of `g^k`, for `k <= j`.
    columns: Vec<Vec<u64>>,
}

impl Substitution {
    pub fn new(image_of_pi: &ScaledSeries) -> Result<Self> {
        let g = image_of_pi.normalize();
        if g.e() != 0 {
            return Err(Error::Usage("substitution must be integral".into()));
        }
        if g.coeffs()[0] != 0 {
            return Err(Error::CompositionDomain);
        }
        let ring = g.ring();
        let zn = ring.zn();
        let order = ring.order();
        let mut columns: Vec<Vec<u64>> = (0..order).map(|j| Vec::with_capacity(j + 1)).collect();
        let mut power = ring.one().coeffs;
        for k in 0..order {
            for (j, col) in columns.iter_mut().enumerate().skip(k) {
                col.push(power[j]);
            }
            if k + 1 < order {
                power = mul_trunc(zn, &power, g.coeffs(), order);
            }
        }
        Ok(Substitution {
            ring,
            image_of_pi: g,
            columns,
        })
    }

    /// Frobenius: `pi -> (1 + pi)^p - 1`.
    pub fn frobenius(ring: SeriesRing) -> Result<Self> {
        let g = one_plus_pi_pow_int(ring, ring.p() as u128).sub(&ring.one())?;
        Substitution::new(&g)
    }

    /// Gamma action of the element with cyclotomic character `c`:
    /// `pi -> (1 + pi)^c - 1`.
    pub fn gamma(ring: SeriesRing, c: &ZpNum) -> Result<Self> {
        if !c.is_unit() {
            return Err(Error::NotAUnit(format!("chi-value {c}")));
        }
        let g = one_plus_pi_pow(ring, c)?.sub(&ring.one())?;
        Substitution::new(&g)
    }

    pub fn ring(&self) -> SeriesRing {
        self.ring
    }

    pub fn image_of_pi(&self) -> &ScaledSeries {
        &self.image_of_pi
    }

    /// Apply to the numerator; the denominator `p^-e` is fixed.
    pub fn apply(&self, f: &ScaledSeries) -> Result<ScaledSeries> {
        if f.ring().p() != self.ring.p() {
            return Err(Error::Usage("mismatched primes".into()));
        }
        let zn = if f.ring().prec() <= self.ring.prec() {
            f.ring().zn()
        } else {
            self.ring.zn()
        };
        let order = f.ring().order().min(self.ring.order());
        let ring = SeriesRing::from_zn(zn, order)?;
        if f.e() >= zn.prec() {
            return Err(Error::DenominatorOverflow {
                e: f.e(),
                prec: zn.prec(),
            });
        }
        let fc: Vec<u64> = f.coeffs()[..order].iter().map(|&c| zn.reduce(c)).collect();
        let same_prec = zn.prec() == self.ring.prec();
        let out = (0..order)
            .map(|j| {
                let col = &self.columns[j];
                if same_prec {
                    zn.dot(fc[..=j].iter().zip(col.iter()))
                } else {
                    let col: Vec<u64> = col.iter().map(|&c| zn.reduce(c)).collect();
                    zn.dot(fc[..=j].iter().zip(col.iter()))
                }
            })
            .collect();
        Ok(ScaledSeries::from_raw(ring, f.e(), out))
    }
}

/// `phi(f)`; builds a fresh table, so prefer [`Substitution::frobenius`] in loops.
pub fn frobenius(f: &ScaledSeries) -> Result<ScaledSeries> {
    Substitution::frobenius(f.ring())?.apply(f)
}

/// `gamma_c(f)`; builds a fresh table, so prefer [`Substitution::gamma`] in loops.
pub fn gamma_act(c: &ZpNum, f: &ScaledSeries) -> Result<ScaledSeries> {
    Substitution::gamma(f.ring(), c)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_expansions() {
        let r = SeriesRing::new(3, 4, 4).unwrap();
        let c = |v| ZpNum::new(3, 6, v).unwrap();
        assert_eq!(one_plus_pi_pow(r, &c(1)).unwrap(), r.from_ints(&[1, 1]));
        assert_eq!(one_plus_pi_pow(r, &c(2)).unwrap(), r.from_ints(&[1, 2, 1]));
        assert_eq!(
            one_plus_pi_pow(r, &c(3)).unwrap(),
            r.from_ints(&[1, 3, 3, 1])
        );
    }

    #[test]
    fn power_matches_binomial_coefficients() {
        use crate::padic::{binomial_coeff, val_factorial};
        let ring = SeriesRing::new(5, 3, 12).unwrap();
        let guard = val_factorial(11, 5);
        let c = ZpNum::new(5, 3 + guard, -7).unwrap();
        let s = one_plus_pi_pow(ring, &c).unwrap();
        for k in 0..12u64 {
            let b = binomial_coeff(&c, k, 3).unwrap();
            assert_eq!(s.coeffs()[k as usize], b.residue(), "k = {k}");
        }
    }

    #[test]
    fn insufficient_guard_digits() {
        let r = SeriesRing::new(3, 4, 10).unwrap();
        let c = ZpNum::new(3, 4, 4).unwrap();
        assert!(matches!(one_plus_pi_pow(r, &c), Err(Error::Precision(_))));
    }

    #[test]
    fn frobenius_of_pi() {
        let r = SeriesRing::new(3, 4, 4).unwrap();
        assert_eq!(frobenius(&r.pi()).unwrap(), r.from_ints(&[0, 3, 3, 1]));
    }

    #[test]
    fn gamma_one_is_identity() {
        let r = SeriesRing::new(5, 3, 8).unwrap();
        let f = r.from_ints(&[4, 1, 0, 7, 2, 9, 1, 3]);
        let one = ZpNum::new(5, 6, 1).unwrap();
        assert_eq!(gamma_act(&one, &f).unwrap(), f);
    }

    #[test]
    fn table_agrees_with_horner() {
        let r = SeriesRing::new(7, 3, 10).unwrap();
        let f = r.from_ints(&[3, -1, 4, 1, -5, 9, 2, 6, 5, 3]);
        let phi = Substitution::frobenius(r).unwrap();
        assert_eq!(
            phi.apply(&f).unwrap(),
            f.compose(phi.image_of_pi()).unwrap()
        );
    }
}
