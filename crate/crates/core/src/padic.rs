//! p-adic integers at fixed absolute precision.
//!
//! A [`ZpNum`] is a residue class in `Z/p^N`; it stands for every p-adic
//! integer congruent to it modulo `p^N`. The modulus must fit below `2^63`
//! so that products can be formed in `u128` without overflow.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Largest modulus accepted for `p^N`.
pub const MAX_MODULUS: u64 = 1 << 63;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Checks that `p` is an odd prime.
pub fn check_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::Input(
            "p = 2 is not supported (Gamma is not procyclic)".into(),
        ));
    }
    if !is_prime(p) {
        return Err(Error::Input(format!("{p} is not prime")));
    }
    Ok(())
}

/// `p^k`, or `None` if it does not stay below [`MAX_MODULUS`].
pub fn checked_power(p: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
        if acc >= MAX_MODULUS {
            return None;
        }
    }
    Some(acc)
}

/// p-adic valuation of a nonzero integer.
pub fn val_u64(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// `v_p(k!)` by Legendre's formula.
pub fn val_factorial(k: u64, p: u64) -> u32 {
    let mut v = 0u64;
    let mut q = k / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v as u32
}

/// `max_{1 <= k < order} v_p(k)`: the largest valuation of an index below `order`.
pub fn max_index_valuation(order: usize, p: u64) -> u32 {
    let mut v = 0;
    let mut pk = p;
    while (pk as usize) < order {
        v += 1;
        pk = match pk.checked_mul(p) {
            Some(x) => x,
            None => break,
        };
    }
    v
}

/// Arithmetic context for `Z/p^N` on raw residues.
///
/// All series and matrix kernels work on bare `u64` residues through this
/// type; [`ZpNum`] is the checked public face of the same arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zn {
    p: u64,
    prec: u32,
    modulus: u64,
}

impl Zn {
    pub fn new(p: u64, prec: u32) -> Result<Self> {
        check_prime(p)?;
        Self::new_unchecked_prime(p, prec)
    }

    pub(crate) fn new_unchecked_prime(p: u64, prec: u32) -> Result<Self> {
        if prec == 0 {
            return Err(Error::Input("precision must be positive".into()));
        }
        let modulus = checked_power(p, prec).ok_or_else(|| {
            Error::Precision(format!("{p}^{prec} exceeds the supported modulus size"))
        })?;
        Ok(Zn { p, prec, modulus })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn prec(&self) -> u32 {
        self.prec
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime, different precision.
    pub fn with_prec(&self, prec: u32) -> Result<Zn> {
        Zn::new_unchecked_prime(self.p, prec)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u128) -> u64 {
        let mut acc = 1 % self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit residue, `None` when `p | a`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(t0.rem_euclid(self.modulus as i128) as u64)
    }

    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.modulus as i128) as u64
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.modulus))
            .to_u64()
            .expect("reduced value fits")
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self, a: u64) -> i128 {
        if a > self.modulus / 2 {
            a as i128 - self.modulus as i128
        } else {
            a as i128
        }
    }

    /// Valuation of a residue, `None` for zero.
    pub fn val(&self, a: u64) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(val_u64(a, self.p))
        }
    }

    /// Reduce a residue of a finer modulus (same prime) into this one.
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.modulus
    }

    /// Sum of products `sum a_i b_i`, reducing only when the `u128`
    /// accumulator could overflow.
    pub fn dot<'a>(&self, pairs: impl Iterator<Item = (&'a u64, &'a u64)>) -> u64 {
        let m = self.modulus as u128;
        let bound = (m - 1) * (m - 1);
        let mut acc: u128 = 0;
        for (a, b) in pairs {
            let prod = *a as u128 * *b as u128;
            if acc > u128::MAX - bound {
                acc %= m;
            }
            acc += prod;
        }
        (acc % m) as u64
    }
}

/// Valuation of a residue class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// The zero class: valuation only bounded below by the precision.
    AtLeast(u32),
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// A p-adic integer known modulo `p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZpNum {
    ctx: Zn,
    residue: u64,
}

impl ZpNum {
    pub fn new(p: u64, prec: u32, value: i128) -> Result<Self> {
        let ctx = Zn::new(p, prec)?;
        Ok(ZpNum {
            ctx,
            residue: ctx.from_i128(value),
        })
    }

    pub fn from_bigint(p: u64, prec: u32, value: &BigInt) -> Result<Self> {
        let ctx = Zn::new(p, prec)?;
        Ok(ZpNum {
            ctx,
            residue: ctx.from_bigint(value),
        })
    }

    pub(crate) fn from_parts(ctx: Zn, residue: u64) -> Self {
        debug_assert!(residue < ctx.modulus);
        ZpNum { ctx, residue }
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn prec(&self) -> u32 {
        self.ctx.prec
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn ctx(&self) -> Zn {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.ctx.is_unit(self.residue)
    }

    /// Reduce to a lower precision. Asking for more digits than are known is an error.
    pub fn truncate(&self, prec: u32) -> Result<ZpNum> {
        if prec > self.prec() {
            return Err(Error::Precision(format!(
                "cannot raise precision from {} to {prec}",
                self.prec()
            )));
        }
        let ctx = self.ctx.with_prec(prec)?;
        Ok(ZpNum {
            ctx,
            residue: ctx.reduce(self.residue),
        })
    }

    /// Bring two operands to a common precision (the smaller one).
    fn align(&self, other: &ZpNum) -> Result<(Zn, u64, u64)> {
        if self.p() != other.p() {
            return Err(Error::Usage(format!(
                "mismatched primes {} and {}",
                self.p(),
                other.p()
            )));
        }
        let ctx = if self.prec() <= other.prec() {
            self.ctx
        } else {
            other.ctx
        };
        Ok((ctx, ctx.reduce(self.residue), ctx.reduce(other.residue)))
    }

    pub fn add(&self, other: &ZpNum) -> Result<ZpNum> {
        let (ctx, a, b) = self.align(other)?;
        Ok(ZpNum::from_parts(ctx, ctx.add(a, b)))
    }

    pub fn sub(&self, other: &ZpNum) -> Result<ZpNum> {
        let (ctx, a, b) = self.align(other)?;
        Ok(ZpNum::from_parts(ctx, ctx.sub(a, b)))
    }

    pub fn mul(&self, other: &ZpNum) -> Result<ZpNum> {
        let (ctx, a, b) = self.align(other)?;
        Ok(ZpNum::from_parts(ctx, ctx.mul(a, b)))
    }

    pub fn neg(&self) -> ZpNum {
        ZpNum::from_parts(self.ctx, self.ctx.neg(self.residue))
    }

    pub fn pow(&self, exp: u128) -> ZpNum {
        ZpNum::from_parts(self.ctx, self.ctx.pow(self.residue, exp))
    }

    pub fn invert(&self) -> Result<ZpNum> {
        self.ctx
            .inv(self.residue)
            .map(|r| ZpNum::from_parts(self.ctx, r))
            .ok_or_else(|| Error::NotAUnit(format!("{self}")))
    }

    pub fn valuation(&self) -> Valuation {
        match self.ctx.val(self.residue) {
            Some(v) => Valuation::Exact(v),
            None => Valuation::AtLeast(self.prec()),
        }
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self) -> i128 {
        self.ctx.signed(self.residue)
    }
}

impl fmt::Display for ZpNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

/// `C(a, k)` at precision `prec`, from `a` carrying `a.prec() - prec` guard digits.
///
/// The guard digits absorb the `p`-part of `k!`; at least `v_p(k!)` of them
/// are required.
pub fn binomial_coeff(a: &ZpNum, k: u64, prec: u32) -> Result<ZpNum> {
    let p = a.p();
    let out = Zn::new_unchecked_prime(p, prec)?;
    if k == 0 {
        return Ok(ZpNum::from_parts(out, 1 % out.modulus()));
    }
    let vk = val_factorial(k, p);
    let guard = a.prec().saturating_sub(prec);
    if a.prec() < prec || guard < vk {
        return Err(Error::Precision(format!(
            "C(a, {k}) needs {vk} guard digits, got {guard}"
        )));
    }
    let ctx = a.ctx;
    let mut num = 1 % ctx.modulus();
    let mut unit_part = 1 % ctx.modulus();
    for i in 0..k {
        num = ctx.mul(num, ctx.sub(a.residue, ctx.reduce(i)));
        let mut f = i + 1;
        while f % p == 0 {
            f /= p;
        }
        unit_part = ctx.mul(unit_part, ctx.reduce(f));
    }
    // num is the residue of an integer divisible by p^vk (k! | a(a-1)...(a-k+1)).
    let pv = checked_power(p, vk).expect("vk below precision");
    debug_assert_eq!(num % pv, 0);
    let reduced_ctx = ctx.with_prec(a.prec() - vk)?;
    let quotient = reduced_ctx.reduce(num / pv);
    let inv = reduced_ctx
        .inv(reduced_ctx.reduce(unit_part))
        .expect("unit part of k! is a unit");
    let value = reduced_ctx.mul(quotient, inv);
    Ok(ZpNum::from_parts(out, out.reduce(value)))
}

/// The Teichmuller lift of `r`: the `(p-1)`-st root of unity congruent to `r` mod `p`.
pub fn teichmuller(r: i128, p: u64, prec: u32) -> Result<ZpNum> {
    let ctx = Zn::new(p, prec)?;
    let start = ctx.from_i128(r);
    if !ctx.is_unit(start) {
        return Err(Error::NotAUnit(format!("{r} mod {p}")));
    }
    let mut x = start;
    // x -> x^p gains one digit per step.
    for _ in 0..=prec {
        let next = ctx.pow(x, p as u128);
        if next == x {
            break;
        }
        x = next;
    }
    debug_assert_eq!(ctx.pow(x, (p - 1) as u128), 1 % ctx.modulus());
    Ok(ZpNum::from_parts(ctx, x))
}

/// Smallest primitive root modulo `p`.
pub fn smallest_primitive_root(p: u64) -> u64 {
    let order = p - 1;
    let mut factors = Vec::new();
    let mut n = order;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            factors.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    let ctx = Zn::new_unchecked_prime(p, 1).expect("p fits");
    (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|&f| ctx.pow(g, (order / f) as u128) != 1)
        })
        .unwrap_or(1)
}

/// Decimal integer string to a residue; accepts a leading sign.
pub fn parse_integer(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Input(format!("not a decimal integer: {s:?}")));
    }
    t.parse::<BigInt>()
        .map_err(|e| Error::Input(format!("{s:?}: {e}")))
}

/// `BigInt` is unit mod p?
pub fn bigint_is_unit(v: &BigInt, p: u64) -> bool {
    !v.abs().is_multiple_of(&BigInt::from(p))
}
