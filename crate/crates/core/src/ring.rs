//! Commutative-ring interface shared by series, residues and cyclotomic
//! quotients, with division-free matrix algorithms on top of it.

use crate::error::Result;
use crate::padic::ZpNum;
use crate::series::ScaledSeries;

pub trait RingElement: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn ring_add(&self, other: &Self) -> Result<Self>;
    fn ring_sub(&self, other: &Self) -> Result<Self>;
    fn ring_mul(&self, other: &Self) -> Result<Self>;
    fn ring_neg(&self) -> Self;
}

impl RingElement for ScaledSeries {
    fn zero_like(&self) -> Self {
        self.ring().zero()
    }
    fn one_like(&self) -> Self {
        self.ring().one()
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

impl RingElement for ZpNum {
    fn zero_like(&self) -> Self {
        ZpNum::from_parts(self.ctx(), 0)
    }
    fn one_like(&self) -> Self {
        ZpNum::from_parts(self.ctx(), 1 % self.ctx().modulus())
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

/// Square matrix as rows.
pub type Rows<T> = Vec<Vec<T>>;

pub fn mat_mul<T: RingElement>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<Rows<T>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(n);
    for row in a {
        let mut out_row = Vec::with_capacity(m);
        for j in 0..m {
            let mut acc = row[0].ring_mul(&b[0][j])?;
            for l in 1..k {
                acc = acc.ring_add(&row[l].ring_mul(&b[l][j])?)?;
            }
            out_row.push(acc);
        }
        out.push(out_row);
    }
    Ok(out)
}

/// Characteristic polynomial `det(X I - A)` by Berkowitz's algorithm.
///
/// Returns coefficients in ascending degree; the last one is `1`. Uses only
/// ring operations, so it is valid over rings with zero divisors.
pub fn char_poly<T: RingElement>(a: &[Vec<T>]) -> Result<Vec<T>> {
    let d = a.len();
    assert!(d > 0 && a.iter().all(|r| r.len() == d), "square matrix");
    let one = a[0][0].one_like();
    // v holds the char poly of the leading r x r block, highest degree first.
    let mut v = vec![one.clone(), a[0][0].ring_neg()];
    for r in 1..d {
        // Block [[B, c], [row, a_rr]]: Toeplitz column 1, -a_rr, -row B^k c.
        let mut t = Vec::with_capacity(r + 2);
        t.push(one.clone());
        t.push(a[r][r].ring_neg());
        let mut col: Vec<T> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 0..r {
            let mut s = a[r][0].ring_mul(&col[0])?;
            for i in 1..r {
                s = s.ring_add(&a[r][i].ring_mul(&col[i])?)?;
            }
            t.push(s.ring_neg());
            let mut next = Vec::with_capacity(r);
            for i in 0..r {
                let mut acc = a[i][0].ring_mul(&col[0])?;
                for (k, ck) in col.iter().enumerate().skip(1) {
                    acc = acc.ring_add(&a[i][k].ring_mul(ck)?)?;
                }
                next.push(acc);
            }
            col = next;
        }
        let mut w = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc: Option<T> = None;
            for (j, vj) in v.iter().enumerate().take(i.min(r) + 1) {
                let term = t[i - j].ring_mul(vj)?;
                acc = Some(match acc {
                    None => term,
                    Some(x) => x.ring_add(&term)?,
                });
            }
            w.push(acc.expect("at least one term"));
        }
        v = w;
    }
    v.reverse();
    Ok(v)
}

/// Determinant and adjugate via Cayley-Hamilton on the Berkowitz
/// coefficients: `adj A = (-1)^{d+1} (A^{d-1} + c_{d-1} A^{d-2} + ... + c_1)`.
pub fn det_adjugate<T: RingElement>(a: &[Vec<T>]) -> Result<(T, Rows<T>)> {
    let d = a.len();
    let c = char_poly(a)?;
    let zero = a[0][0].zero_like();
    let one = a[0][0].one_like();
    let scalar = |s: &T| -> Rows<T> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { s.clone() } else { zero.clone() })
                    .collect()
            })
            .collect()
    };
    // Horner: B = A^{d-1} + c_{d-1} A^{d-2} + ... + c_1 I
    let mut b = scalar(&one);
    for k in (1..d).rev() {
        b = mat_mul(&b, a)?;
        for (i, row) in b.iter_mut().enumerate() {
            row[i] = row[i].ring_add(&c[k])?;
        }
    }
    let odd = d % 2 == 1;
    let det = if odd { c[0].ring_neg() } else { c[0].clone() };
    // (-1)^{d+1} = +1 for odd d
    if !odd {
        for row in b.iter_mut() {
            for x in row.iter_mut() {
                *x = x.ring_neg();
            }
        }
    }
    Ok((det, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: i128) -> ZpNum {
        ZpNum::new(5, 3, v).unwrap()
    }

    fn zm(rows: &[&[i128]]) -> Rows<ZpNum> {
        rows.iter()
            .map(|r| r.iter().map(|&v| z(v)).collect())
            .collect()
    }

    #[test]
    fn identity_and_diagonal() {
        let c = char_poly(&zm(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(c, vec![z(1), z(-2), z(1)]);
        let c = char_poly(&zm(&[&[2, 0], &[0, 7]])).unwrap();
        assert_eq!(c, vec![z(14), z(-9), z(1)]);
    }

    #[test]
    fn three_by_three_known() {
        // det(XI - A) for A = [[2,1,0],[1,3,1],[0,1,4]]: X^3 - 9X^2 + 24X - 18
        let c = char_poly(&zm(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]])).unwrap();
        assert_eq!(c, vec![z(-18), z(24), z(-9), z(1)]);
    }

    #[test]
    fn adjugate_identity() {
        let a = zm(&[&[2, 1, 3], &[0, 5, 1], &[4, 1, 1]]);
        let (det, adj) = det_adjugate(&a).unwrap();
        // cofactor expansion: 2(5-1) - 1(0-4) + 3(0-20) = -48
        assert_eq!(det, z(-48));
        let prod = mat_mul(&a, &adj).unwrap();
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, if i == j { det } else { z(0) });
            }
        }
    }

    #[test]
    fn one_by_one() {
        let (det, adj) = det_adjugate(&zm(&[&[7]])).unwrap();
        assert_eq!(det, z(7));
        assert_eq!(adj, zm(&[&[1]]));
    }
}
