//! Truncated power series over `Z_p` with a power-of-`p` denominator.
//!
//! A [`ScaledSeries`] is `p^-e * (c_0 + c_1 pi + ... + c_{M-1} pi^{M-1})`
//! with coefficients in `Z/p^N`. It stands for every element of
//! `Z_p[[pi]][1/p]` congruent to it modulo `p^-e (p^N, pi^M)`, so its
//! guaranteed p-adic precision is `N - e`.

mod division;
mod endo;
mod special;
mod text;

use std::fmt;

pub use division::{
    distinguished_degree, divide_exact, gamma_stable_generator, is_gamma_stable, quotient_order,
    remainder_precision, weierstrass_divide, Divisor, Factor, FactoredElement,
    StabilityCertificate, WeierstrassDivision,
};
pub use endo::{frobenius, gamma_act, one_plus_pi_pow, Substitution};
pub use special::{
    elem_mu, elem_q, elem_q_degree, log_one_plus_pi, t_decomposition, t_decomposition_with,
    t_product, t_truncation_bound, TDecomposition,
};
pub use text::parse as parse_series;

use crate::error::{Error, Result};
use crate::padic::{Zn, ZpNum};

/// The coefficient ring `Z/p^N` together with the truncation order `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeriesRing {
    zn: Zn,
    order: usize,
}

impl SeriesRing {
    pub fn new(p: u64, prec: u32, order: usize) -> Result<Self> {
        let zn = Zn::new(p, prec)?;
        Self::from_zn(zn, order)
    }

    pub fn from_zn(zn: Zn, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Input("truncation order must be positive".into()));
        }
        Ok(SeriesRing { zn, order })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.zn.p()
    }

    #[inline]
    pub fn prec(&self) -> u32 {
        self.zn.prec()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn zn(&self) -> Zn {
        self.zn
    }

    pub fn with_order(&self, order: usize) -> Result<SeriesRing> {
        SeriesRing::from_zn(self.zn, order)
    }

    pub fn with_prec(&self, prec: u32) -> Result<SeriesRing> {
        SeriesRing::from_zn(self.zn.with_prec(prec)?, self.order)
    }

    pub fn zero(&self) -> ScaledSeries {
        ScaledSeries {
            ring: *self,
            e: 0,
            coeffs: vec![0; self.order],
        }
    }

    pub fn one(&self) -> ScaledSeries {
        self.constant(1)
    }

    pub fn constant(&self, c: i128) -> ScaledSeries {
        let mut s = self.zero();
        s.coeffs[0] = self.zn.from_i128(c);
        s
    }

    pub fn constant_zp(&self, c: &ZpNum) -> Result<ScaledSeries> {
        if c.p() != self.p() {
            return Err(Error::Usage("mismatched primes".into()));
        }
        if c.prec() < self.prec() {
            return Err(Error::Precision(format!(
                "constant known to {} digits, ring needs {}",
                c.prec(),
                self.prec()
            )));
        }
        let mut s = self.zero();
        s.coeffs[0] = self.zn.reduce(c.residue());
        Ok(s)
    }

    /// `pi^k` (zero when `k >= M`).
    pub fn pi_pow(&self, k: usize) -> ScaledSeries {
        let mut s = self.zero();
        if k < self.order {
            s.coeffs[k] = 1 % self.zn.modulus();
        }
        s
    }

    pub fn pi(&self) -> ScaledSeries {
        self.pi_pow(1)
    }

    /// Integral series from signed integer coefficients (missing ones are zero,
    /// extra ones are truncated).
    pub fn from_ints(&self, coeffs: &[i128]) -> ScaledSeries {
        let mut s = self.zero();
        for (dst, &c) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = self.zn.from_i128(c);
        }
        s
    }

    /// `p^-e * sum coeffs[k] pi^k` from raw residues.
    pub fn from_residues(&self, e: u32, coeffs: &[u64]) -> Result<ScaledSeries> {
        if e >= self.prec() {
            return Err(Error::DenominatorOverflow {
                e,
                prec: self.prec(),
            });
        }
        let mut s = self.zero();
        s.e = e;
        for (dst, &c) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = self.zn.reduce(c);
        }
        Ok(s)
    }
}

/// An element of `B+_F` known modulo `p^-e (p^N, pi^M)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScaledSeries {
    ring: SeriesRing,
    e: u32,
    coeffs: Vec<u64>,
}

impl ScaledSeries {
    pub(crate) fn from_raw(ring: SeriesRing, e: u32, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(coeffs.len(), ring.order);
        debug_assert!(e < ring.prec());
        ScaledSeries { ring, e, coeffs }
    }

    pub fn ring(&self) -> SeriesRing {
        self.ring
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Guaranteed p-adic precision `N - e` of the represented element.
    pub fn precision(&self) -> u32 {
        self.ring.prec() - self.e
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> ZpNum {
        ZpNum::from_parts(self.ring.zn, self.coeffs[k])
    }

    pub fn is_integral_repr(&self) -> bool {
        self.e == 0
    }

    /// Zero modulo the precision ideal.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Index of the first nonzero coefficient.
    pub fn pi_valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    /// Every coefficient of the represented element is divisible by `p^k`.
    /// Needs `k <= N - e`, otherwise the answer is not determined.
    pub fn vanishes_mod_p_pow(&self, k: u32) -> Result<bool> {
        if k > self.precision() {
            return Err(Error::Precision(format!(
                "asked for {k} digits, element known to {}",
                self.precision()
            )));
        }
        let zn = self.ring.zn;
        let need = k + self.e;
        Ok(self
            .coeffs
            .iter()
            .all(|&c| zn.val(c).is_none_or(|v| v >= need)))
    }

    fn check_compatible(&self, other: &ScaledSeries) -> Result<SeriesRing> {
        if self.ring.p() != other.ring.p() {
            return Err(Error::Usage(format!(
                "mismatched primes {} and {}",
                self.ring.p(),
                other.ring.p()
            )));
        }
        let zn = if self.ring.prec() <= other.ring.prec() {
            self.ring.zn
        } else {
            other.ring.zn
        };
        SeriesRing::from_zn(zn, self.ring.order.min(other.ring.order))
    }

    /// Reduce to a coarser ring (lower `N` and/or `M`).
    pub fn truncate_to(&self, ring: SeriesRing) -> Result<ScaledSeries> {
        if ring.p() != self.ring.p() {
            return Err(Error::Usage("mismatched primes".into()));
        }
        if ring.prec() > self.ring.prec() || ring.order() > self.ring.order() {
            return Err(Error::Precision(format!(
                "cannot refine (N, M) = ({}, {}) to ({}, {})",
                self.ring.prec(),
                self.ring.order(),
                ring.prec(),
                ring.order()
            )));
        }
        if self.e >= ring.prec() {
            return Err(Error::DenominatorOverflow {
                e: self.e,
                prec: ring.prec(),
            });
        }
        let coeffs = self.coeffs[..ring.order]
            .iter()
            .map(|&c| ring.zn.reduce(c))
            .collect();
        Ok(ScaledSeries::from_raw(ring, self.e, coeffs))
    }

    /// Reinterpret the representative in a larger ring, padding with zeros.
    ///
    /// Only meaningful when the caller knows the element *is* this polynomial
    /// exactly (e.g. `q`, `pi^k`, integer constants).
    pub fn embed_exact(&self, ring: SeriesRing) -> Result<ScaledSeries> {
        if ring.p() != self.ring.p() {
            return Err(Error::Usage("mismatched primes".into()));
        }
        if self.e >= ring.prec() {
            return Err(Error::DenominatorOverflow {
                e: self.e,
                prec: ring.prec(),
            });
        }
        let zn = self.ring.zn;
        let mut out = ring.zero();
        out.e = self.e;
        for (k, dst) in out.coeffs.iter_mut().enumerate().take(self.ring.order) {
            *dst = ring.zn.from_i128(zn.signed(self.coeffs[k]));
        }
        Ok(out)
    }

    /// Numerator scaled to denominator `p^e_out` (`e_out >= e`).
    fn numerator_at(&self, ring: SeriesRing, e_out: u32) -> Vec<u64> {
        let zn = ring.zn;
        let scale = zn.pow(zn.p(), (e_out - self.e) as u128);
        self.coeffs[..ring.order]
            .iter()
            .map(|&c| zn.mul(zn.reduce(c), scale))
            .collect()
    }

    pub fn add(&self, other: &ScaledSeries) -> Result<ScaledSeries> {
        self.add_sub(other, false)
    }

    pub fn sub(&self, other: &ScaledSeries) -> Result<ScaledSeries> {
        self.add_sub(other, true)
    }

    fn add_sub(&self, other: &ScaledSeries, negate: bool) -> Result<ScaledSeries> {
        let ring = self.check_compatible(other)?;
        let e = self.e.max(other.e);
        if e >= ring.prec() {
            return Err(Error::DenominatorOverflow {
                e,
                prec: ring.prec(),
            });
        }
        let zn = ring.zn;
        let a = self.numerator_at(ring, e);
        let b = other.numerator_at(ring, e);
        let coeffs = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| if negate { zn.sub(x, y) } else { zn.add(x, y) })
            .collect();
        Ok(ScaledSeries::from_raw(ring, e, coeffs))
    }

    pub fn neg(&self) -> ScaledSeries {
        let zn = self.ring.zn;
        ScaledSeries::from_raw(
            self.ring,
            self.e,
            self.coeffs.iter().map(|&c| zn.neg(c)).collect(),
        )
    }

    pub fn mul(&self, other: &ScaledSeries) -> Result<ScaledSeries> {
        let ring = self.check_compatible(other)?;
        let e = self.e + other.e;
        if e >= ring.prec() {
            return Err(Error::DenominatorOverflow {
                e,
                prec: ring.prec(),
            });
        }
        let zn = ring.zn;
        let a: Vec<u64> = self.coeffs[..ring.order]
            .iter()
            .map(|&c| zn.reduce(c))
            .collect();
        let b: Vec<u64> = other.coeffs[..ring.order]
            .iter()
            .map(|&c| zn.reduce(c))
            .collect();
        Ok(ScaledSeries::from_raw(
            ring,
            e,
            mul_trunc(zn, &a, &b, ring.order),
        ))
    }

    pub fn pow(&self, k: u32) -> Result<ScaledSeries> {
        let mut acc = self.ring.one();
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &ZpNum) -> Result<ScaledSeries> {
        if c.p() != self.ring.p() {
            return Err(Error::Usage("mismatched primes".into()));
        }
        let zn = self.ring.zn;
        if c.prec() < zn.prec() {
            return Err(Error::Precision(
                "scalar known to fewer digits than the ring".into(),
            ));
        }
        let c = zn.reduce(c.residue());
        Ok(ScaledSeries::from_raw(
            self.ring,
            self.e,
            self.coeffs.iter().map(|&x| zn.mul(x, c)).collect(),
        ))
    }

    /// Multiply by `pi^k`, dropping what falls off the truncation.
    pub fn mul_pi_pow(&self, k: usize) -> ScaledSeries {
        let order = self.ring.order;
        let mut coeffs = vec![0; order];
        if k < order {
            coeffs[k..].copy_from_slice(&self.coeffs[..order - k]);
        }
        ScaledSeries::from_raw(self.ring, self.e, coeffs)
    }

    /// Drop the first `k` coefficients (which must already be zero) and divide
    /// by `pi^k`. The result lives at order `M - k`.
    pub(crate) fn shift_down(&self, k: usize) -> Result<ScaledSeries> {
        if k >= self.ring.order {
            return Err(Error::PrecisionExhausted(format!(
                "dividing by pi^{k} at truncation order {}",
                self.ring.order
            )));
        }
        let ring = self.ring.with_order(self.ring.order - k)?;
        Ok(ScaledSeries::from_raw(
            ring,
            self.e,
            self.coeffs[k..].to_vec(),
        ))
    }

    /// Equal element with minimal denominator exponent.
    ///
    /// The numerator digits freed up at the top are zero-filled, so the
    /// guaranteed precision of the input still applies to the result.
    pub fn normalize(&self) -> ScaledSeries {
        let zn = self.ring.zn;
        let p = zn.p();
        let mut e = self.e;
        let mut coeffs = self.coeffs.clone();
        while e > 0 && coeffs.iter().all(|&c| c % p == 0) {
            for c in coeffs.iter_mut() {
                *c /= p;
            }
            e -= 1;
        }
        ScaledSeries::from_raw(self.ring, e, coeffs)
    }

    /// Whether the element lies in `A+_F` (normalizes to `e = 0`).
    pub fn is_integral(&self) -> bool {
        self.normalize().e == 0
    }

    /// Multiplicative inverse; the normalized constant term must be a unit.
    pub fn invert(&self) -> Result<ScaledSeries> {
        let f = self.normalize();
        let zn = f.ring.zn;
        let c0_inv = zn
            .inv(f.coeffs[0])
            .ok_or_else(|| Error::NotAUnit(format!("{self}")))?;
        let inv = invert_unit_series(zn, &f.coeffs, c0_inv);
        // (p^-e u)^-1 = p^e u^-1
        let scale = zn.pow(zn.p(), f.e as u128);
        Ok(ScaledSeries::from_raw(
            f.ring,
            0,
            inv.into_iter().map(|c| zn.mul(c, scale)).collect(),
        ))
    }

    /// `self(g(pi))` by Horner's rule; `g` must be integral with zero constant term.
    pub fn compose(&self, g: &ScaledSeries) -> Result<ScaledSeries> {
        let ring = self.check_compatible(g)?;
        let g = g.normalize();
        if g.e != 0 {
            return Err(Error::Usage("inner series must be integral".into()));
        }
        if g.coeffs[0] != 0 {
            return Err(Error::CompositionDomain);
        }
        let zn = ring.zn;
        let gc: Vec<u64> = g.coeffs[..ring.order]
            .iter()
            .map(|&c| zn.reduce(c))
            .collect();
        let mut acc = vec![0u64; ring.order];
        for k in (0..ring.order).rev() {
            acc = mul_trunc(zn, &acc, &gc, ring.order);
            acc[0] = zn.add(acc[0], zn.reduce(self.coeffs[k]));
        }
        Ok(ScaledSeries::from_raw(ring, self.e, acc))
    }
}

impl fmt::Display for ScaledSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::render(self))
    }
}

/// Truncated product of two coefficient vectors over `zn`.
pub fn mul_trunc(zn: Zn, a: &[u64], b: &[u64], order: usize) -> Vec<u64> {
    let start_a = a.iter().position(|&c| c != 0);
    let start_b = b.iter().position(|&c| c != 0);
    let mut out = vec![0u64; order];
    let (Some(sa), Some(sb)) = (start_a, start_b) else {
        return out;
    };
    let la = a.len().min(order);
    let lb = b.len().min(order);
    for (k, slot) in out.iter_mut().enumerate().skip(sa + sb) {
        let lo = k.saturating_sub(lb - 1).max(sa);
        let hi = (k - sb).min(la - 1);
        if lo > hi {
            continue;
        }
        *slot = zn.dot((lo..=hi).map(|i| (&a[i], &b[k - i])));
    }
    out
}

/// Inverse of a series with unit constant term by coefficient recursion.
pub fn invert_unit_series(zn: Zn, f: &[u64], c0_inv: u64) -> Vec<u64> {
    let order = f.len();
    let mut g = vec![0u64; order];
    g[0] = c0_inv;
    for k in 1..order {
        let s = zn.dot((1..=k).map(|i| (&f[i], &g[k - i])));
        g[k] = zn.mul(zn.neg(s), c0_inv);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32, m: usize) -> SeriesRing {
        SeriesRing::new(p, n, m).unwrap()
    }

    #[test]
    fn product_of_one_plus_and_minus_pi() {
        let r = ring(5, 4, 6);
        let a = r.from_ints(&[1, 1]);
        let b = r.from_ints(&[1, -1]);
        assert_eq!(a.mul(&b).unwrap(), r.from_ints(&[1, 0, -1]));
    }

    #[test]
    fn additive_identity() {
        let r = ring(3, 4, 5);
        let f = r.from_ints(&[2, 7, -1, 0, 5]);
        assert_eq!(f.add(&r.zero()).unwrap(), f);
    }

    #[test]
    fn denominator_overflow() {
        let r = ring(3, 4, 5);
        let f = r.from_residues(3, &[1]).unwrap();
        let g = r.from_residues(1, &[1]).unwrap();
        assert!(matches!(f.mul(&g), Err(Error::DenominatorOverflow { .. })));
        assert!(r.from_residues(4, &[1]).is_err());
    }

    #[test]
    fn add_aligns_denominators() {
        let r = ring(3, 4, 3);
        // 1/3 + 1 = 4/3
        let f = r.from_residues(1, &[1]).unwrap();
        let s = f.add(&r.one()).unwrap();
        assert_eq!(s.e(), 1);
        assert_eq!(s.coeffs()[0], 4);
    }

    #[test]
    fn invert_examples() {
        let r = ring(3, 4, 6);
        let inv = r.from_ints(&[1, 1]).invert().unwrap();
        assert_eq!(inv, r.from_ints(&[1, -1, 1, -1, 1, -1]));
        assert_eq!(r.one().invert().unwrap(), r.one());
        assert!(matches!(r.pi().invert(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn invert_scaled_unit() {
        let r = ring(5, 4, 4);
        // (1/5)(1 + pi) inverted is 5 (1 - pi + pi^2 - pi^3)
        let f = r.from_residues(1, &[1, 1]).unwrap();
        let g = f.invert().unwrap();
        assert_eq!(g, r.from_ints(&[5, -5, 5, -5]));
        assert_eq!(f.mul(&g).unwrap().normalize(), r.one());
    }

    #[test]
    fn compose_examples() {
        let r = ring(3, 4, 6);
        let g = r.from_ints(&[0, 2, 1, 4]);
        assert_eq!(r.pi().compose(&g).unwrap(), g);
        let f = r.from_ints(&[3, 1, 1, 2]);
        assert_eq!(f.compose(&r.pi()).unwrap(), f);
        let sq = r.pi_pow(2).compose(&r.from_ints(&[0, 1, 1])).unwrap();
        assert_eq!(sq, r.from_ints(&[0, 0, 1, 2, 1]));
        assert!(matches!(
            f.compose(&r.from_ints(&[1, 1])),
            Err(Error::CompositionDomain)
        ));
    }

    #[test]
    fn normalize_minimises_denominator() {
        let r = ring(3, 5, 3);
        let f = r.from_residues(2, &[9, 18, 3]).unwrap().normalize();
        assert_eq!(f.e(), 1);
        assert_eq!(f.coeffs(), &[3, 6, 1]);
        assert!(!f.is_integral());
        assert!(r.from_residues(2, &[9, 18]).unwrap().is_integral());
    }

    #[test]
    fn mixed_order_truncates() {
        let a = ring(3, 4, 6).from_ints(&[1, 1, 1, 1, 1, 1]);
        let b = ring(3, 3, 4).from_ints(&[1, 1]);
        let s = a.mul(&b).unwrap();
        assert_eq!(s.ring(), ring(3, 3, 4));
        assert_eq!(s, ring(3, 3, 4).from_ints(&[1, 2, 2, 2]));
    }

    #[test]
    fn vanishing_checks() {
        let r = ring(3, 5, 3);
        let f = r.from_residues(1, &[27, 9]).unwrap();
        assert!(f.vanishes_mod_p_pow(1).unwrap());
        assert!(!f.vanishes_mod_p_pow(2).unwrap());
        assert!(f.vanishes_mod_p_pow(5).is_err());
    }
}
