//! The finite-level rings `(Z/p^{N_q})[pi] / phi^{n-1}(q)`, integral avatars
//! of `Q_p(mu_{p^n})`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{Zn, ZpNum};
use crate::ring::{self, RingElement};
use crate::series::{
    elem_q, elem_q_degree, mul_trunc, weierstrass_divide, ScaledSeries, SeriesRing,
};

/// `(Z/p^prec)[pi] / Phi_{p^n}(1 + pi)`.
#[derive(Debug, PartialEq, Eq)]
pub struct QuotientRing {
    zn: Zn,
    n: u32,
    /// Non-leading coefficients of the monic modulus.
    modulus: Vec<u64>,
}

impl QuotientRing {
    pub fn new(p: u64, n: u32, prec: u32) -> Result<Arc<QuotientRing>> {
        let m = elem_q_degree(p, n)?;
        let series = SeriesRing::new(p, prec, m + 1)?;
        let q = elem_q(series, n)?;
        Ok(Arc::new(QuotientRing {
            zn: series.zn(),
            n,
            modulus: q.coeffs()[..m].to_vec(),
        }))
    }

    pub fn p(&self) -> u64 {
        self.zn.p()
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.modulus.len()
    }

    pub fn prec(&self) -> u32 {
        self.zn.prec()
    }

    pub fn zn(&self) -> Zn {
        self.zn
    }

    /// Remainder of a polynomial by the monic modulus.
    fn reduce_poly(&self, mut f: Vec<u64>) -> Vec<u64> {
        let m = self.degree();
        let zn = self.zn;
        for k in (m..f.len()).rev() {
            let c = f[k];
            if c == 0 {
                continue;
            }
            for (i, &mc) in self.modulus.iter().enumerate() {
                f[k - m + i] = zn.sub(f[k - m + i], zn.mul(c, mc));
            }
            f[k] = 0;
        }
        f.truncate(m);
        f
    }
}

/// An element of a [`QuotientRing`], as a polynomial of degree `< m`.
#[derive(Debug, Clone)]
pub struct CycloElem {
    ring: Arc<QuotientRing>,
    coeffs: Vec<u64>,
}

impl PartialEq for CycloElem {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring)
            && self.coeffs == other.coeffs
    }
}

impl Eq for CycloElem {}

/// Digits of a reduction mod `phi^{n-1}(q)` guaranteed for a series known
/// modulo `(p^N, pi^M)`: `min(N, floor((M - m + 1)/m) - 1)`.
pub fn reduction_precision(prec: u32, order: usize, m: usize) -> i64 {
    let by_order = ((order + 1).saturating_sub(m) / m) as i64 - 1;
    (prec as i64).min(by_order)
}

/// Weierstrass remainder of an integral series by `phi^{n-1}(q)`.
pub fn reduce_mod_qn(f: &ScaledSeries, n: u32) -> Result<CycloElem> {
    let f = f.normalize();
    if f.e() != 0 {
        return Err(Error::Usage(format!(
            "reduction needs an integral series, got {f}"
        )));
    }
    let ring = f.ring();
    let m = elem_q_degree(ring.p(), n)?;
    if m >= ring.order() {
        return Err(Error::TruncationTooShort {
            degree: m,
            order: ring.order(),
        });
    }
    let nq = reduction_precision(ring.prec(), ring.order(), m);
    if nq < 1 {
        return Err(Error::PrecisionExhausted(format!(
            "reducing mod phi^{}(q) at (N, M) = ({}, {}) leaves no digits",
            n - 1,
            ring.prec(),
            ring.order()
        )));
    }
    let qring = QuotientRing::new(ring.p(), n, nq as u32)?;
    let q = elem_q(ring, n)?;
    let wd = weierstrass_divide(&f, &q)?;
    let zn = qring.zn;
    let coeffs = wd
        .remainder
        .coeffs()
        .iter()
        .map(|&c| zn.reduce(c))
        .collect();
    Ok(CycloElem {
        ring: qring,
        coeffs,
    })
}

impl CycloElem {
    pub fn constant(ring: &Arc<QuotientRing>, c: &ZpNum) -> Result<CycloElem> {
        if c.p() != ring.p() {
            return Err(Error::Usage("mismatched primes".into()));
        }
        if c.prec() < ring.prec() {
            return Err(Error::Precision("constant known to too few digits".into()));
        }
        let mut coeffs = vec![0; ring.degree()];
        coeffs[0] = ring.zn.reduce(c.residue());
        Ok(CycloElem {
            ring: Arc::clone(ring),
            coeffs,
        })
    }

    /// Residue class of `sum coeffs[k] pi^k` (any length).
    pub fn from_residues(ring: &Arc<QuotientRing>, coeffs: &[u64]) -> CycloElem {
        let zn = ring.zn;
        let mut f: Vec<u64> = coeffs.iter().map(|&c| zn.reduce(c)).collect();
        if f.len() < ring.degree() {
            f.resize(ring.degree(), 0);
        }
        CycloElem {
            ring: Arc::clone(ring),
            coeffs: ring.reduce_poly(f),
        }
    }

    pub fn ring(&self) -> &Arc<QuotientRing> {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Guaranteed precision `N_q`.
    pub fn prec(&self) -> u32 {
        self.ring.prec()
    }

    pub fn truncate(&self, prec: u32) -> Result<CycloElem> {
        if prec > self.prec() {
            return Err(Error::Precision("cannot raise precision".into()));
        }
        let ring = QuotientRing::new(self.ring.p(), self.ring.n, prec)?;
        Ok(CycloElem::from_residues(&ring, &self.coeffs))
    }

    /// Both operands at the smaller of the two precisions.
    fn align(&self, other: &CycloElem) -> Result<(Arc<QuotientRing>, Vec<u64>, Vec<u64>)> {
        if self.ring.p() != other.ring.p() || self.ring.n != other.ring.n {
            return Err(Error::Usage("elements of different quotient rings".into()));
        }
        let ring = if self.prec() <= other.prec() {
            Arc::clone(&self.ring)
        } else {
            Arc::clone(&other.ring)
        };
        let zn = ring.zn;
        let a = self.coeffs.iter().map(|&c| zn.reduce(c)).collect();
        let b = other.coeffs.iter().map(|&c| zn.reduce(c)).collect();
        Ok((ring, a, b))
    }

    pub fn add(&self, other: &CycloElem) -> Result<CycloElem> {
        let (ring, a, b) = self.align(other)?;
        let zn = ring.zn;
        let coeffs = a.iter().zip(&b).map(|(&x, &y)| zn.add(x, y)).collect();
        Ok(CycloElem { ring, coeffs })
    }

    pub fn sub(&self, other: &CycloElem) -> Result<CycloElem> {
        let (ring, a, b) = self.align(other)?;
        let zn = ring.zn;
        let coeffs = a.iter().zip(&b).map(|(&x, &y)| zn.sub(x, y)).collect();
        Ok(CycloElem { ring, coeffs })
    }

    pub fn mul(&self, other: &CycloElem) -> Result<CycloElem> {
        let (ring, a, b) = self.align(other)?;
        let m = ring.degree();
        let prod = mul_trunc(ring.zn, &a, &b, 2 * m - 1);
        let coeffs = ring.reduce_poly(prod);
        Ok(CycloElem { ring, coeffs })
    }

    pub fn neg(&self) -> CycloElem {
        let zn = self.ring.zn;
        CycloElem {
            ring: Arc::clone(&self.ring),
            coeffs: self.coeffs.iter().map(|&c| zn.neg(c)).collect(),
        }
    }

    /// Inverse of a unit (constant term prime to `p`): invert modulo `p`,
    /// where the modulus is `pi^m`, then Newton-lift `x <- x (2 - a x)`.
    pub fn invert(&self) -> Result<CycloElem> {
        let zn = self.ring.zn;
        let c0 = self.coeffs[0];
        let c0_inv = zn
            .inv(c0)
            .ok_or_else(|| Error::NotAUnit(format!("{self}")))?;
        let fp = zn.with_prec(1)?;
        let low: Vec<u64> = self.coeffs.iter().map(|&c| fp.reduce(c)).collect();
        let start = crate::series::invert_unit_series(fp, &low, fp.reduce(c0_inv));
        let mut x = CycloElem::from_residues(&self.ring, &start);
        let two = CycloElem::constant(&self.ring, &ZpNum::from_parts(zn, zn.reduce(2)))?;
        let mut digits = 1;
        while digits < self.prec() {
            x = x.mul(&two.sub(&self.mul(&x)?)?)?;
            digits *= 2;
        }
        debug_assert!(self.mul(&x)?.is_one());
        Ok(x)
    }

    fn is_one(&self) -> bool {
        self.coeffs[0] == 1 % self.ring.zn.modulus() && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// All non-constant coefficients vanish at the guaranteed precision.
    pub fn is_scalar(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn constant_term(&self) -> ZpNum {
        ZpNum::from_parts(self.ring.zn, self.coeffs[0])
    }
}

impl RingElement for CycloElem {
    fn zero_like(&self) -> Self {
        CycloElem {
            ring: Arc::clone(&self.ring),
            coeffs: vec![0; self.ring.degree()],
        }
    }
    fn one_like(&self) -> Self {
        let mut z = self.zero_like();
        z.coeffs[0] = 1 % self.ring.zn.modulus();
        z
    }
    fn ring_add(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn ring_sub(&self, other: &Self) -> Result<Self> {
        self.sub(other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
}

/// Characteristic polynomial (ascending coefficients) of a square matrix
/// over a quotient ring.
pub fn char_poly(mx: &[Vec<CycloElem>]) -> Result<Vec<CycloElem>> {
    ring::char_poly(mx)
}

impl fmt::Display for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            terms.push(match k {
                0 => format!("{c}"),
                1 => format!("{c}*pi"),
                _ => format!("{c}*pi^{k}"),
            });
        }
        let body = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        write!(f, "{body} [N_q = {}]", self.prec())
    }
}
