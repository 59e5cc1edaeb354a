//! Matrices over truncated series and over `Z/p^N`.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::Zn;
use crate::ring;
use crate::series::{divide_exact, mul_trunc, Divisor, ScaledSeries, SeriesRing, Substitution};

pub const MAX_DIM: usize = 8;

/// A `d x d` matrix of series over one ring, `1 <= d <= 8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    ring: SeriesRing,
    rows: Vec<Vec<ScaledSeries>>,
}

impl SeriesMatrix {
    /// Entries are truncated to the coarsest ring among them.
    pub fn from_rows(rows: Vec<Vec<ScaledSeries>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::Input(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Input("matrix is not square".into()));
        }
        let p = rows[0][0].ring().p();
        let mut prec = u32::MAX;
        let mut order = usize::MAX;
        for x in rows.iter().flatten() {
            if x.ring().p() != p {
                return Err(Error::Usage("mismatched primes".into()));
            }
            prec = prec.min(x.ring().prec());
            order = order.min(x.ring().order());
        }
        let ring = SeriesRing::new(p, prec, order)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.truncate_to(ring)).collect())
            .collect::<Result<_>>()?;
        Ok(SeriesMatrix { ring, rows })
    }

    pub fn identity(ring: SeriesRing, d: usize) -> Result<Self> {
        Self::diagonal(&vec![ring.one(); d])
    }

    pub fn diagonal(entries: &[ScaledSeries]) -> Result<Self> {
        let d = entries.len();
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            entries[i].clone()
                        } else {
                            entries[i].ring().zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    /// Constant matrix from integer residues.
    pub fn constant(ring: SeriesRing, entries: &[Vec<u64>]) -> Result<Self> {
        let rows = entries
            .iter()
            .map(|r| r.iter().map(|&c| ring.from_residues(0, &[c])).collect())
            .collect::<Result<_>>()?;
        Self::from_rows(rows)
    }

    pub fn ring(&self) -> SeriesRing {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScaledSeries {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<ScaledSeries>] {
        &self.rows
    }

    pub fn map(&self, f: impl Fn(&ScaledSeries) -> Result<ScaledSeries>) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(&f).collect())
            .collect::<Result<_>>()?;
        Self::from_rows(rows)
    }

    pub fn add(&self, other: &SeriesMatrix) -> Result<Self> {
        self.check_dim(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            .collect::<Result<_>>()?;
        Self::from_rows(rows)
    }

    pub fn sub(&self, other: &SeriesMatrix) -> Result<Self> {
        self.check_dim(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect())
            .collect::<Result<_>>()?;
        Self::from_rows(rows)
    }

    pub fn mul(&self, other: &SeriesMatrix) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_rows(ring::mat_mul(&self.rows, &other.rows)?)
    }

    fn check_dim(&self, other: &SeriesMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Usage(format!(
                "dimensions {} and {} differ",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        let rows = (0..d)
            .map(|i| (0..d).map(|j| self.rows[j][i].clone()).collect())
            .collect();
        SeriesMatrix {
            ring: self.ring,
            rows,
        }
    }

    /// Entrywise substitution (Frobenius or a Gamma element).
    pub fn apply(&self, endo: &Substitution) -> Result<Self> {
        self.map(|x| endo.apply(x))
    }

    pub fn truncate_to(&self, ring: SeriesRing) -> Result<Self> {
        self.map(|x| x.truncate_to(ring))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(ScaledSeries::is_zero)
    }

    /// Every entry lies in `A+_F`.
    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(ScaledSeries::is_integral)
    }

    /// Division-free determinant and adjugate.
    pub fn det_adjugate(&self) -> Result<(ScaledSeries, SeriesMatrix)> {
        let (det, adj) = ring::det_adjugate(&self.rows)?;
        Ok((det, SeriesMatrix::from_rows(adj)?))
    }

    /// Row-major text form, one bracketed row per line.
    pub fn render_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(ScaledSeries::to_string).collect())
            .collect()
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.render_rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Structured inverse `X Y = D^s Id` for `det X = D^s * unit`.
#[derive(Debug, Clone)]
pub struct StructuredInverse {
    pub y: SeriesMatrix,
    pub s: u32,
    /// `det X / D^s`.
    pub unit: ScaledSeries,
}

/// Invert `X` up to the declared power of the distinguished polynomial
/// `base` (normally `q`).
///
/// The determinant is divided exactly by `base^s`; the quotient must be a
/// unit. `Y = adj(X) * unit^{-1}` then satisfies `X Y = base^s Id`. The
/// result lives at the reduced truncation order of the exact division.
pub fn mat_inv_structured(
    x: &SeriesMatrix,
    base: &ScaledSeries,
    s: u32,
) -> Result<StructuredInverse> {
    let (det, adj) = x.det_adjugate()?;
    let unit = divide_exact(
        &det,
        &Divisor::Power {
            base: base.clone(),
            exponent: s,
        },
    )?;
    let inv = unit.invert()?;
    let ring = unit.ring();
    let y = adj.truncate_to(ring)?.map(|e| e.mul(&inv))?;
    let check = x.truncate_to(ring)?.mul(&y)?;
    let bs = base.truncate_to(ring)?.pow(s)?;
    let d = x.dim();
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { bs.clone() } else { ring.zero() };
            if check.get(i, j) != &want {
                return Err(Error::InvariantViolation(format!(
                    "structured inverse check failed at ({i}, {j})"
                )));
            }
        }
    }
    Ok(StructuredInverse { y, s, unit })
}

// ---------------------------------------------------------------------------
// Smith form over F_p[pi]/pi^M

/// Elementary divisors `pi^{a_1} | ... | pi^{a_d}` of a matrix over
/// `F_p[pi]/pi^M`, with `U X V = Diag(pi^{a_i})`. An exponent of `M` marks a
/// zero divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiSmithForm {
    pub exponents: Vec<usize>,
    pub u: Vec<Vec<Vec<u64>>>,
    pub v: Vec<Vec<Vec<u64>>>,
}

fn fp_poly_val(f: &[u64]) -> Option<usize> {
    f.iter().position(|&c| c != 0)
}

/// Smith form by valuation-pivot elimination. Entries are coefficient
/// vectors mod `p`, of length `order`.
pub fn smith_pi(p: u64, order: usize, x: &[Vec<Vec<u64>>]) -> Result<PiSmithForm> {
    let fp = Zn::new(p, 1)?;
    let d = x.len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::Input("smith_pi needs a square matrix".into()));
    }
    let norm = |f: &[u64]| -> Vec<u64> {
        let mut g: Vec<u64> = f.iter().take(order).map(|&c| c % p).collect();
        g.resize(order, 0);
        g
    };
    let mut a: Vec<Vec<Vec<u64>>> = x
        .iter()
        .map(|r| r.iter().map(|f| norm(f)).collect())
        .collect();
    let unit_poly = |c: u64| -> Vec<u64> {
        let mut g = vec![0; order];
        g[0] = c;
        g
    };
    let ident = |k: usize| -> Vec<Vec<Vec<u64>>> {
        (0..k)
            .map(|i| (0..k).map(|j| unit_poly(u64::from(i == j))).collect())
            .collect()
    };
    let mut u = ident(d);
    let mut v = ident(d);
    let mul = |f: &[u64], g: &[u64]| mul_trunc(fp, f, g, order);
    let sub = |f: &[u64], g: &[u64]| -> Vec<u64> {
        f.iter().zip(g).map(|(&a, &b)| fp.sub(a, b)).collect()
    };
    let mut exponents = Vec::with_capacity(d);

    for k in 0..d {
        // pivot of least valuation in the trailing block
        let mut best: Option<(usize, usize, usize)> = None;
        for i in k..d {
            for j in k..d {
                if let Some(val) = fp_poly_val(&a[i][j]) {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((val, pi, pj)) = best else {
            exponents.extend(std::iter::repeat_n(order, d - k));
            break;
        };
        a.swap(k, pi);
        u.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in v.iter_mut() {
            row.swap(k, pj);
        }
        // Scale row k so the pivot is exactly pi^val.
        let shifted: Vec<u64> = {
            let mut g = a[k][k][val..].to_vec();
            g.resize(order, 0);
            g
        };
        let inv =
            crate::series::invert_unit_series(fp, &shifted, fp.inv(shifted[0]).expect("unit"));
        for j in 0..d {
            a[k][j] = mul(&a[k][j], &inv);
            u[k][j] = mul(&u[k][j], &inv);
        }
        // Clear column k below and row k to the right. Every entry has
        // valuation >= val, so dividing by pi^val is a shift.
        for i in 0..d {
            if i == k || fp_poly_val(&a[i][k]).is_none() {
                continue;
            }
            let mut factor = a[i][k][val..].to_vec();
            factor.resize(order, 0);
            for j in 0..d {
                let t = mul(&factor, &a[k][j]);
                a[i][j] = sub(&a[i][j], &t);
                let t = mul(&factor, &u[k][j]);
                u[i][j] = sub(&u[i][j], &t);
            }
        }
        for j in 0..d {
            if j == k || fp_poly_val(&a[k][j]).is_none() {
                continue;
            }
            let mut factor = a[k][j][val..].to_vec();
            factor.resize(order, 0);
            for i in 0..d {
                let t = mul(&a[i][k], &factor);
                a[i][j] = sub(&a[i][j], &t);
                let t = mul(&v[i][k], &factor);
                v[i][j] = sub(&v[i][j], &t);
            }
        }
        exponents.push(val);
    }
    Ok(PiSmithForm { exponents, u, v })
}

// ---------------------------------------------------------------------------
// Kernels over Z/p^N

/// `{v : A v = 0 mod p^N}` as a generating set, with the dimension of its
/// reduction `K / pK`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZpKernel {
    pub generators: Vec<Vec<u64>>,
    pub mod_p_dim: usize,
}

/// Smith form `U A V = Diag(p^{a_i})` over `Z/p^N`; returns `(exponents, V)`
/// where exponents has one entry per column (`N` for zero columns).
fn smith_zn(zn: Zn, a: &[Vec<u64>], cols: usize) -> (Vec<u32>, Vec<Vec<u64>>) {
    let rows = a.len();
    let mut a: Vec<Vec<u64>> = a.to_vec();
    let mut v: Vec<Vec<u64>> = (0..cols)
        .map(|i| (0..cols).map(|j| u64::from(i == j)).collect())
        .collect();
    let mut exps = vec![zn.prec(); cols];
    let mut k = 0;
    while k < rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if let Some(val) = zn.val(x) {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((val, pi, pj)) = best else { break };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in v.iter_mut() {
            row.swap(k, pj);
        }
        let pv = zn.pow(zn.p(), val as u128);
        let unit = a[k][k] / pv;
        let unit_inv = zn.inv(zn.reduce(unit)).expect("unit");
        for i in 0..rows {
            if i == k || a[i][k] == 0 {
                continue;
            }
            let f = zn.mul(a[i][k] / pv, unit_inv);
            for j in 0..cols {
                a[i][j] = zn.sub(a[i][j], zn.mul(f, a[k][j]));
            }
        }
        for j in 0..cols {
            if j == k || a[k][j] == 0 {
                continue;
            }
            let f = zn.mul(a[k][j] / pv, unit_inv);
            for i in 0..rows {
                a[i][j] = zn.sub(a[i][j], zn.mul(a[i][k], f));
            }
            for row in v.iter_mut() {
                row[j] = zn.sub(row[j], zn.mul(row[k], f));
            }
        }
        exps[k] = val;
        k += 1;
    }
    (exps, v)
}

/// Kernel of an `r x c` matrix over `Z/p^N` (rows as residue vectors).
pub fn zp_kernel(zn: Zn, a: &[Vec<u64>], cols: usize) -> ZpKernel {
    let a: Vec<Vec<u64>> = a
        .iter()
        .map(|r| r.iter().map(|&x| zn.reduce(x)).collect())
        .collect();
    let (exps, v) = smith_zn(zn, &a, cols);
    let mut generators = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let scale = zn.pow(zn.p(), (zn.prec() - e) as u128);
        generators.push((0..cols).map(|r| zn.mul(v[r][i], scale)).collect());
    }
    let mod_p_dim = generators.len();
    ZpKernel {
        generators,
        mod_p_dim,
    }
}

/// Inverse of a square matrix over `Z/p^N` whose determinant is a unit.
pub fn zn_inverse(zn: Zn, a: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    let d = a.len();
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<u64> = r.iter().map(|&x| zn.reduce(x)).collect();
            row.extend((0..d).map(|j| u64::from(i == j)));
            row
        })
        .collect();
    for k in 0..d {
        let piv = (k..d)
            .find(|&i| zn.is_unit(m[i][k]))
            .ok_or_else(|| Error::NotAUnit("matrix determinant is divisible by p".into()))?;
        m.swap(k, piv);
        let inv = zn.inv(m[k][k]).expect("unit pivot");
        for x in m[k].iter_mut() {
            *x = zn.mul(*x, inv);
        }
        for i in 0..d {
            if i == k || m[i][k] == 0 {
                continue;
            }
            let f = m[i][k];
            for j in 0..2 * d {
                m[i][j] = zn.sub(m[i][j], zn.mul(f, m[k][j]));
            }
        }
    }
    Ok(m.into_iter().map(|r| r[d..].to_vec()).collect())
}

/// Rank over `F_p` of a list of vectors reduced mod `p`.
pub fn rank_mod_p(p: u64, vectors: &[Vec<u64>]) -> usize {
    let fp = Zn::new_unchecked_prime(p, 1).expect("p fits");
    let mut rows: Vec<Vec<u64>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x % p).collect())
        .collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = fp.inv(rows[rank][c]).expect("nonzero");
        for r in 0..rows.len() {
            if r == rank || rows[r][c] == 0 {
                continue;
            }
            let f = fp.mul(rows[r][c], inv);
            for j in 0..cols {
                rows[r][j] = fp.sub(rows[r][j], fp.mul(f, rows[rank][j]));
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::elem_q;

    fn ring() -> SeriesRing {
        SeriesRing::new(3, 4, 8).unwrap()
    }

    #[test]
    fn identity_products() {
        let r = ring();
        let x = SeriesMatrix::from_rows(vec![
            vec![r.from_ints(&[1, 2]), r.from_ints(&[0, 0, 5])],
            vec![r.from_ints(&[3]), r.from_ints(&[7, 1, 1])],
        ])
        .unwrap();
        let id = SeriesMatrix::identity(r, 2).unwrap();
        assert_eq!(x.mul(&id).unwrap(), x);
        assert_eq!(id.mul(&x).unwrap(), x);
    }

    #[test]
    fn constant_product() {
        let r = ring();
        let a = SeriesMatrix::constant(r, &[vec![1, 2], vec![3, 4]]).unwrap();
        let b = SeriesMatrix::constant(r, &[vec![5, 6], vec![7, 8]]).unwrap();
        assert_eq!(
            a.mul(&b).unwrap(),
            SeriesMatrix::constant(r, &[vec![19, 22], vec![43, 50]]).unwrap()
        );
    }

    #[test]
    fn frobenius_fixes_identity() {
        let r = ring();
        let id = SeriesMatrix::identity(r, 3).unwrap();
        assert_eq!(id.apply(&Substitution::frobenius(r).unwrap()).unwrap(), id);
    }

    #[test]
    fn diagonal_adjugate() {
        let r = ring();
        let a = r.from_ints(&[2, 1]);
        let b = r.from_ints(&[0, 3, 1]);
        let x = SeriesMatrix::diagonal(&[a.clone(), b.clone()]).unwrap();
        let (det, adj) = x.det_adjugate().unwrap();
        assert_eq!(det, a.mul(&b).unwrap());
        assert_eq!(adj, SeriesMatrix::diagonal(&[b, a]).unwrap());
    }

    #[test]
    fn structured_inverse_of_identity() {
        let r = ring();
        let q = elem_q(r, 1).unwrap();
        let inv = mat_inv_structured(&SeriesMatrix::identity(r, 2).unwrap(), &q, 0).unwrap();
        assert_eq!(inv.y, SeriesMatrix::identity(r, 2).unwrap());
    }

    #[test]
    fn structured_inverse_rejects_wrong_power() {
        let r = SeriesRing::new(3, 3, 16).unwrap();
        let q = elem_q(r, 1).unwrap();
        let x = SeriesMatrix::diagonal(&[r.one(), q.clone()]).unwrap();
        assert!(matches!(
            mat_inv_structured(&x, &q, 0),
            Err(Error::NotAUnit(_))
        ));
        let inv = mat_inv_structured(&x, &q, 1).unwrap();
        assert_eq!(inv.unit.coeffs()[0], 1);
    }

    fn poly(c: &[u64]) -> Vec<u64> {
        c.to_vec()
    }

    #[test]
    fn smith_examples() {
        let x = vec![
            vec![poly(&[0, 1]), poly(&[])],
            vec![poly(&[]), poly(&[0, 0, 1])],
        ];
        assert_eq!(smith_pi(3, 8, &x).unwrap().exponents, vec![1, 2]);
        let x = vec![
            vec![poly(&[0, 1]), poly(&[0, 1])],
            vec![poly(&[0, 1]), poly(&[0, 0, 1])],
        ];
        // det = pi^3 - pi^2 has valuation 2, so the divisors are pi and pi.
        assert_eq!(smith_pi(3, 8, &x).unwrap().exponents, vec![1, 1]);
        let x = vec![
            vec![poly(&[1, 1]), poly(&[2])],
            vec![poly(&[0, 1]), poly(&[1])],
        ];
        assert_eq!(smith_pi(5, 8, &x).unwrap().exponents, vec![0, 0]);
        let zero = vec![vec![poly(&[]); 2]; 2];
        assert_eq!(smith_pi(5, 8, &zero).unwrap().exponents, vec![8, 8]);
    }

    #[test]
    fn kernel_examples() {
        let zn = Zn::new(3, 2).unwrap();
        let k = zp_kernel(zn, &[vec![0, 0], vec![0, 0]], 2);
        assert_eq!(k.mod_p_dim, 2);
        let k = zp_kernel(zn, &[vec![1, 0], vec![0, 1]], 2);
        assert_eq!(k.mod_p_dim, 0);
        let k = zp_kernel(zn, &[vec![3]], 1);
        assert_eq!(k.mod_p_dim, 1);
        assert_eq!(k.generators, vec![vec![3]]);
    }

    #[test]
    fn kernel_of_p_exhaustive() {
        // Over Z/9 the solutions of 3x = 0 are {0, 3, 6}: generated by 3.
        let zn = Zn::new(3, 2).unwrap();
        let sols: Vec<u64> = (0..9).filter(|&x| zn.mul(3, x) == 0).collect();
        let k = zp_kernel(zn, &[vec![3]], 1);
        let span: Vec<u64> = (0..9).map(|t| zn.mul(t, k.generators[0][0])).collect();
        for s in sols {
            assert!(span.contains(&s));
        }
    }

    #[test]
    fn inverse_mod_prime_power() {
        let zn = Zn::new(5, 3).unwrap();
        let a = vec![vec![1, 5], vec![2, 3]];
        let inv = zn_inverse(zn, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = zn.add(zn.mul(a[i][0], inv[0][j]), zn.mul(a[i][1], inv[1][j]));
                assert_eq!(s, u64::from(i == j));
            }
        }
        assert!(zn_inverse(zn, &[vec![5, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn mod_p_rank() {
        assert_eq!(rank_mod_p(3, &[vec![1, 2], vec![2, 4], vec![3, 0]]), 1);
        assert_eq!(rank_mod_p(5, &[vec![1, 0], vec![0, 1]]), 2);
    }
}
