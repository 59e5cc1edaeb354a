//! Wach modules from strongly divisible lattices with weights in `[0, p-2]`.
//!
//! Conventions: `phi(e) = P e` and `gamma(e) = G e` on a basis `e` of the
//! module, so the Frobenius and Gamma actions commute exactly when
//! `phi(G) P = gamma(P) G`.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::cyclo::{char_poly, reduce_mod_qn, CycloElem};
use crate::error::{Error, Result};
use crate::linalg::{mat_inv_structured, rank_mod_p, zn_inverse, zp_kernel, SeriesMatrix};
use crate::padic::{
    bigint_is_unit, check_prime, max_index_valuation, smallest_primitive_root, teichmuller, Zn,
    ZpNum,
};
use crate::series::{
    divide_exact, elem_mu, elem_q, elem_q_degree, one_plus_pi_pow, weierstrass_divide, Divisor,
    ScaledSeries, SeriesRing, Substitution,
};

/// A strongly divisible lattice: weights `0 <= r_1 <= ... <= r_d <= p - 2`
/// and an integer matrix `A` invertible mod `p`, the Frobenius matrix being
/// `Diag(p^{r_j}) A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilteredPhiModule {
    p: u64,
    weights: Vec<u32>,
    #[serde(serialize_with = "serialize_bigint_rows")]
    matrix: Vec<Vec<BigInt>>,
}

fn serialize_bigint_rows<S: serde::Serializer>(
    rows: &[Vec<BigInt>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(BigInt::to_string).collect())
        .collect();
    strings.serialize(s)
}

impl FilteredPhiModule {
    pub fn new(p: u64, weights: Vec<i64>, matrix: Vec<Vec<BigInt>>) -> Result<Self> {
        check_prime(p)?;
        let d = weights.len();
        if d == 0 || d > crate::linalg::MAX_DIM {
            return Err(Error::Input(format!(
                "rank {d} outside 1..={}",
                crate::linalg::MAX_DIM
            )));
        }
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::Input(format!("matrix must be {d} x {d}")));
        }
        for (j, &r) in weights.iter().enumerate() {
            if r < 0 {
                return Err(Error::Input(format!(
                    "weights[{j}] = {r} is negative; twist to make all weights nonnegative"
                )));
            }
            if r as u64 > p - 2 {
                return Err(Error::Input(format!(
                    "weights[{j}] = {r} exceeds p - 2 = {}",
                    p - 2
                )));
            }
        }
        if weights.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Input("weights must be nondecreasing".into()));
        }
        let fm = FilteredPhiModule {
            p,
            weights: weights.into_iter().map(|r| r as u32).collect(),
            matrix,
        };
        let fp = Zn::new(p, 1)?;
        zn_inverse(fp, &fm.matrix_residues(fp)).map_err(|_| {
            Error::Input("matrix is not invertible mod p (basis not strongly divisible)".into())
        })?;
        Ok(fm)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn matrix(&self) -> &[Vec<BigInt>] {
        &self.matrix
    }

    pub fn max_weight(&self) -> u32 {
        *self.weights.last().expect("nonempty")
    }

    pub fn weight_sum(&self) -> u32 {
        self.weights.iter().sum()
    }

    pub fn matrix_residues(&self, zn: Zn) -> Vec<Vec<u64>> {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|x| zn.from_bigint(x)).collect())
            .collect()
    }

    /// Same weights, different matrix.
    pub fn with_matrix(&self, matrix: Vec<Vec<BigInt>>) -> Result<Self> {
        FilteredPhiModule::new(
            self.p,
            self.weights.iter().map(|&r| r as i64).collect(),
            matrix,
        )
    }

    /// `#{j : r_j >= i}`.
    pub fn expected_filtration_dim(&self, i: u32) -> usize {
        self.weights.iter().filter(|&&r| r >= i).count()
    }
}

/// Choice of topological generators of `Gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaChoice {
    /// `[teichmuller(g0), 1 + p]` with `g0` the least primitive root mod `p`.
    Default,
    /// Explicit values of the cyclotomic character.
    Explicit(Vec<BigInt>),
}

/// `[teichmuller(g0), 1 + p]` at precision `prec`.
pub fn default_gamma_generators(p: u64, prec: u32) -> Result<Vec<ZpNum>> {
    check_prime(p)?;
    let g0 = smallest_primitive_root(p);
    Ok(vec![
        teichmuller(g0 as i128, p, prec)?,
        ZpNum::new(p, prec, 1 + p as i128)?,
    ])
}

/// Character values at precision `prec`; all must be units.
pub fn resolve_generators(choice: &GammaChoice, p: u64, prec: u32) -> Result<Vec<ZpNum>> {
    match choice {
        GammaChoice::Default => default_gamma_generators(p, prec),
        GammaChoice::Explicit(values) => {
            if values.is_empty() {
                return Err(Error::Input(
                    "at least one Gamma generator is needed".into(),
                ));
            }
            values
                .iter()
                .map(|v| {
                    if !bigint_is_unit(v, p) {
                        return Err(Error::NotAUnit(format!("character value {v}")));
                    }
                    ZpNum::from_bigint(p, prec, v)
                })
                .collect()
        }
    }
}

/// Digits of a character value needed to act on `(p^N, pi^M)`, including the
/// extra order used for `gamma(pi)/pi`.
pub fn generator_precision(p: u64, prec: u32, order: usize) -> u32 {
    prec + max_index_valuation(order + 1, p)
}

/// `P = Diag((q mu)^{r_j}) A` at `(p^N, pi^M)`.
pub fn build_p(fm: &FilteredPhiModule, prec: u32, order: usize) -> Result<SeriesMatrix> {
    let p = fm.p();
    let ring = SeriesRing::new(p, prec, order)?;
    let k = (p - 1) as usize;
    if order <= k {
        return Err(Error::TruncationTooShort { degree: k, order });
    }
    let qmu = elem_q(ring, 1)?.mul(&elem_mu(ring)?)?;
    let zn = ring.zn();
    let a = fm.matrix_residues(zn);
    let mut rows = Vec::with_capacity(fm.dim());
    for (i, &r) in fm.weights().iter().enumerate() {
        let di = qmu.pow(r)?;
        // (q mu)^r = p^r mod pi^{p-1}
        let pr = zn.pow(p, r as u128);
        if di.coeffs()[0] != pr || di.coeffs()[1..k].iter().any(|&c| c != 0) {
            return Err(Error::InvariantViolation(format!(
                "(q mu)^{r} is not p^{r} modulo pi^{k}"
            )));
        }
        rows.push(a[i].iter().map(|&x| scale(&di, x)).collect::<Vec<_>>());
    }
    SeriesMatrix::from_rows(rows)
}

fn scale(s: &ScaledSeries, c: u64) -> ScaledSeries {
    let zn = s.ring().zn();
    let c = zn.reduce(c);
    ScaledSeries::from_raw(
        s.ring(),
        s.e(),
        s.coeffs().iter().map(|&x| zn.mul(x, c)).collect(),
    )
}

/// `sum_i c_i s_i` for integral series on one ring.
fn combine(ring: SeriesRing, terms: &[(u64, &ScaledSeries)]) -> ScaledSeries {
    let zn = ring.zn();
    let mut out = vec![0u64; ring.order()];
    for &(c, s) in terms {
        if c == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(s.coeffs()) {
            *o = zn.add(*o, zn.mul(c, x));
        }
    }
    ScaledSeries::from_raw(ring, 0, out)
}

/// `pi^k s`, moved from order `M - k` up to order `M`.
fn lift_by_pi(s: &ScaledSeries, k: usize, ring: SeriesRing) -> ScaledSeries {
    let mut coeffs = vec![0u64; ring.order()];
    coeffs[k..].copy_from_slice(&s.coeffs()[..ring.order() - k]);
    ScaledSeries::from_raw(ring, s.e(), coeffs)
}

/// `G(gamma_c)` together with the number of fixed-point passes used.
#[derive(Debug, Clone)]
pub struct GammaSolution {
    pub g: SeriesMatrix,
    pub iterations: usize,
}

/// `gamma_c(q) / q = phi(gamma_c(pi)/pi) * (gamma_c(pi)/pi)^{-1}`, a unit.
fn gamma_q_ratio(ring: SeriesRing, c: &ZpNum, phi: &Substitution) -> Result<ScaledSeries> {
    let wide = ring.with_order(ring.order() + 1)?;
    let gpi = one_plus_pi_pow(wide, c)?.sub(&wide.one())?;
    let g_over_pi = gpi.shift_down(1)?;
    phi.apply(&g_over_pi)?.mul(&g_over_pi.invert()?)
}

/// Solve `phi(G) P = gamma_c(P) G` with `G = Id + pi^{p-1} K`.
///
/// With `P = D A`, `D = Diag((q mu)^{r_i})`, the map
/// `H -> gamma(P)^{-1} phi(H) P` becomes
/// `K -> A^{-1} [Diag((mu w)^{r_i}) + pi^{p-1} Z(K)] A`, shifted down by
/// `pi^{p-1}`, where `w = (gamma(q)/q * gamma(mu))^{-1}` and
/// `Z_ij = q^{p-1+r_j-r_i} mu^{r_j} w^{r_i} phi(K_ij)`. For weights in
/// `[0, p-2]` the power of `q` is positive, so no division by `q` occurs and
/// each pass is exact modulo `(p^N, pi^M)`.
pub fn solve_gamma(
    fm: &FilteredPhiModule,
    p_mat: &SeriesMatrix,
    c: &ZpNum,
) -> Result<GammaSolution> {
    let ring = p_mat.ring();
    let p = ring.p();
    let prec = ring.prec();
    let order = ring.order();
    let k = (p - 1) as usize;
    if fm.p() != p || fm.dim() != p_mat.dim() {
        return Err(Error::Usage("matrix does not belong to this module".into()));
    }
    if order <= k {
        return Err(Error::TruncationTooShort { degree: k, order });
    }
    if !c.is_unit() {
        return Err(Error::NotAUnit(format!("character value {c}")));
    }
    let expected = build_p(fm, prec, order)?;
    if &expected != p_mat {
        return Err(Error::Input("P does not match the module data".into()));
    }
    let d = fm.dim();
    let zn = ring.zn();
    let phi = Substitution::frobenius(ring)?;
    let gamma = Substitution::gamma(ring, c)?;
    let mu = elem_mu(ring)?;
    let q = elem_q(ring, 1)?;
    let w = gamma_q_ratio(ring, c, &phi)?
        .mul(&gamma.apply(&mu)?)?
        .invert()?;
    let mw = mu.mul(&w)?;

    let low = ring.with_order(order - k)?;
    let phi_low = Substitution::frobenius(low)?;
    let weights = fm.weights();
    let diag: Vec<ScaledSeries> = weights.iter().map(|&r| mw.pow(r)).collect::<Result<_>>()?;
    let mut z = vec![Vec::with_capacity(d); d];
    for (i, row) in z.iter_mut().enumerate() {
        for j in 0..d {
            let e = k as i64 + weights[j] as i64 - weights[i] as i64;
            if e < 0 {
                return Err(Error::IntegralityViolation(format!(
                    "weights {} and {} are more than p - 1 apart",
                    weights[i], weights[j]
                )));
            }
            let coeff = q
                .pow(e as u32)?
                .mul(&mu.pow(weights[j])?)?
                .mul(&w.pow(weights[i])?)?;
            row.push(coeff.truncate_to(low)?);
        }
    }
    let a = fm.matrix_residues(zn);
    let a_inv = zn_inverse(zn, &a)?;

    let cap = prec as usize * order + 16;
    let mut kmat: Vec<Vec<ScaledSeries>> = vec![vec![low.zero(); d]; d];
    for iteration in 1..=cap {
        // inner = Diag(diag) + pi^k Z(K), at order M
        let mut inner: Vec<Vec<ScaledSeries>> = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                let t = z[i][j].mul(&phi_low.apply(&kmat[i][j])?)?;
                let mut x = lift_by_pi(&t, k, ring);
                if i == j {
                    x = x.add(&diag[i])?;
                }
                row.push(x);
            }
            inner.push(row);
        }
        // H = A^{-1} inner A
        let inner_a: Vec<Vec<ScaledSeries>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let terms: Vec<(u64, &ScaledSeries)> =
                            (0..d).map(|b| (a[b][j], &inner[i][b])).collect();
                        combine(ring, &terms)
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                let terms: Vec<(u64, &ScaledSeries)> =
                    (0..d).map(|b| (a_inv[i][b], &inner_a[b][j])).collect();
                let mut h = combine(ring, &terms);
                if i == j {
                    h = h.sub(&ring.one())?;
                }
                if h.coeffs()[..k].iter().any(|&x| x != 0) {
                    return Err(Error::IntegralityViolation(format!(
                        "iterate {iteration} leaves Id + pi^{k} M at entry ({i}, {j})"
                    )));
                }
                row.push(h.shift_down(k)?);
            }
            next.push(row);
        }
        if next == kmat {
            let rows = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let x = lift_by_pi(&kmat[i][j], k, ring);
                            if i == j {
                                x.add(&ring.one())
                            } else {
                                Ok(x)
                            }
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            return Ok(GammaSolution {
                g: SeriesMatrix::from_rows(rows)?,
                iterations: iteration,
            });
        }
        kmat = next;
    }
    Err(Error::NoConvergence { iterations: cap })
}

/// `phi(G) P = gamma_c(P) G` at the working precision.
pub fn commutation_holds(p_mat: &SeriesMatrix, g: &SeriesMatrix, c: &ZpNum) -> Result<bool> {
    let ring = p_mat.ring();
    let phi = Substitution::frobenius(ring)?;
    let gamma = Substitution::gamma(ring, c)?;
    let lhs = g.apply(&phi)?.mul(p_mat)?;
    let rhs = p_mat.apply(&gamma)?.mul(g)?;
    Ok(lhs == rhs)
}

/// `G = Id mod pi^{p-1}` with integral entries.
pub fn is_id_mod_pi_power(g: &SeriesMatrix, k: usize) -> bool {
    let zn = g.ring().zn();
    g.is_integral()
        && g.rows().iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| {
                let x = x.normalize();
                (0..k.min(x.ring().order())).all(|t| {
                    let want = if i == j && t == 0 {
                        1 % zn.modulus()
                    } else {
                        0
                    };
                    x.coeffs()[t] == want
                })
            })
        })
}

/// `gamma_c(G_{c'}) G_c = gamma_{c'}(G_c) G_{c'}`.
pub fn cocycle_holds(c1: &ZpNum, g1: &SeriesMatrix, c2: &ZpNum, g2: &SeriesMatrix) -> Result<bool> {
    let ring = g1.ring();
    let lhs = g2.apply(&Substitution::gamma(ring, c1)?)?.mul(g1)?;
    let rhs = g1.apply(&Substitution::gamma(ring, c2)?)?.mul(g2)?;
    Ok(lhs == rhs)
}

#[derive(Debug, Clone)]
pub struct GammaGenerator {
    /// Character value at the guard precision used for the solve.
    pub c: ZpNum,
    pub g: SeriesMatrix,
    pub iterations: usize,
}

/// A Wach module at precision `(p^N, pi^M)`: `P` and one `G` per generator.
#[derive(Debug, Clone)]
pub struct WachModule {
    pub fm: FilteredPhiModule,
    pub p_mat: SeriesMatrix,
    pub gens: Vec<GammaGenerator>,
    pub choice: GammaChoice,
}

impl WachModule {
    pub fn prec(&self) -> u32 {
        self.p_mat.ring().prec()
    }

    pub fn order(&self) -> usize {
        self.p_mat.ring().order()
    }

    pub fn ring(&self) -> SeriesRing {
        self.p_mat.ring()
    }

    /// Generator whose character value agrees with `c` at the working precision.
    pub fn generator_for(&self, c: &ZpNum) -> Option<&GammaGenerator> {
        let prec = self.prec();
        let target = c.truncate(prec.min(c.prec())).ok()?;
        self.gens.iter().find(|g| {
            g.c.truncate(target.prec())
                .map(|x| x == target)
                .unwrap_or(false)
        })
    }

    pub fn invariants(&self) -> Result<InvariantReport> {
        let k = (self.fm.p() - 1) as usize;
        let mut commutation = Vec::new();
        let mut mod_pi = Vec::new();
        for g in &self.gens {
            let c = g.c.truncate(self.prec())?.to_string();
            commutation.push(Verdict::new(
                c.clone(),
                commutation_holds(&self.p_mat, &g.g, &g.c)?,
            ));
            mod_pi.push(Verdict::new(c, is_id_mod_pi_power(&g.g, k)));
        }
        let mut cocycle = Vec::new();
        for (a, ga) in self.gens.iter().enumerate() {
            for gb in &self.gens[a + 1..] {
                let label = format!(
                    "{}, {}",
                    ga.c.truncate(self.prec())?,
                    gb.c.truncate(self.prec())?
                );
                cocycle.push(Verdict::new(
                    label,
                    cocycle_holds(&ga.c, &ga.g, &gb.c, &gb.g)?,
                ));
            }
        }
        Ok(InvariantReport {
            commutation,
            mod_pi,
            cocycle,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub subject: String,
    pub holds: bool,
}

impl Verdict {
    fn new(subject: String, holds: bool) -> Self {
        Verdict { subject, holds }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub commutation: Vec<Verdict>,
    pub mod_pi: Vec<Verdict>,
    pub cocycle: Vec<Verdict>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.commutation
            .iter()
            .chain(&self.mod_pi)
            .chain(&self.cocycle)
            .all(|v| v.holds)
    }
}

/// Build `P` and every `G_c`, then assert the module invariants.
pub fn build_wach(
    fm: &FilteredPhiModule,
    choice: &GammaChoice,
    prec: u32,
    order: usize,
) -> Result<WachModule> {
    let p_mat = build_p(fm, prec, order)?;
    let cs = resolve_generators(choice, fm.p(), generator_precision(fm.p(), prec, order))?;
    let mut gens = Vec::with_capacity(cs.len());
    for c in cs {
        let sol = solve_gamma(fm, &p_mat, &c)?;
        gens.push(GammaGenerator {
            c,
            g: sol.g,
            iterations: sol.iterations,
        });
    }
    let w = WachModule {
        fm: fm.clone(),
        p_mat,
        gens,
        choice: choice.clone(),
    };
    let inv = w.invariants()?;
    if let Some(v) = inv.commutation.iter().chain(&inv.mod_pi).find(|v| !v.holds) {
        return Err(Error::InvariantViolation(format!(
            "generator {} fails a module invariant",
            v.subject
        )));
    }
    if let Some(v) = inv.cocycle.iter().find(|v| !v.holds) {
        let (c1, c2) = v.subject.split_once(", ").unwrap_or((&v.subject, ""));
        return Err(Error::CocycleViolation {
            c1: c1.to_string(),
            c2: c2.to_string(),
        });
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// Verifiers

#[derive(Debug, Clone, Serialize)]
pub struct HeightsReport {
    pub weight_sum: u32,
    pub max_weight: u32,
    /// Internal truncation order at which `P` was rebuilt.
    pub internal_order: usize,
    /// `q^{r_d} P^{-1}` at the working precision.
    pub certificate: Vec<Vec<String>>,
    pub integral: bool,
    /// Agreement with `A^{-1} Diag(q^{r_d - r_j} mu^{-r_j})`.
    pub matches_closed_form: bool,
    pub passed: bool,
    pub failure: Option<String>,
}

/// Certify that `q^{r_d} P^{-1}` is integral.
///
/// `P` is rebuilt far enough out that inverting it up to `q^s`
/// (`s = sum r_j`) and then dividing by `q^{s - r_d}` leaves an exact
/// answer at `(p^N, pi^M)`.
pub fn verify_heights(w: &WachModule) -> Result<HeightsReport> {
    let fm = &w.fm;
    let p = fm.p();
    let prec = w.prec();
    let order = w.order();
    let m = (p - 1) as usize;
    let s = fm.weight_sum();
    let rd = fm.max_weight();
    let internal = order + (2 * s - rd) as usize * prec as usize * m;
    let p_wide = build_p(fm, prec, internal)?;
    if p_wide.truncate_to(w.ring())? != w.p_mat {
        return Err(Error::InvariantViolation(
            "rebuilt P disagrees with the module".into(),
        ));
    }
    let ring = w.ring();
    let closed = heights_closed_form(fm, ring)?;
    let mut report = HeightsReport {
        weight_sum: s,
        max_weight: rd,
        internal_order: internal,
        certificate: Vec::new(),
        integral: false,
        matches_closed_form: false,
        passed: false,
        failure: None,
    };
    let q_wide = elem_q(p_wide.ring(), 1)?;
    let inv = match mat_inv_structured(&p_wide, &q_wide, s) {
        Ok(inv) => inv,
        Err(e @ (Error::NotDivisible { .. } | Error::NotAUnit(_))) => {
            report.failure = Some(format!("det P is not q^{s} times a unit: {e}"));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let divisor = Divisor::Power {
        base: q_wide,
        exponent: s - rd,
    };
    let mut rows = Vec::with_capacity(fm.dim());
    for row in inv.y.rows() {
        let mut out = Vec::with_capacity(fm.dim());
        for x in row {
            match divide_exact(x, &divisor) {
                Ok(v) => out.push(v.truncate_to(ring)?),
                Err(e @ Error::NotDivisible { .. }) => {
                    report.failure = Some(format!("q^{rd} P^-1 has a non-integral entry: {e}"));
                    return Ok(report);
                }
                Err(e) => return Err(e),
            }
        }
        rows.push(out);
    }
    let cert = SeriesMatrix::from_rows(rows)?;
    let qrd = elem_q(ring, 1)?.pow(rd)?;
    let want = SeriesMatrix::diagonal(&vec![qrd; fm.dim()])?;
    report.integral = cert.is_integral() && w.p_mat.mul(&cert)? == want;
    report.matches_closed_form = cert == closed;
    report.certificate = cert.render_rows();
    report.passed = report.integral && report.matches_closed_form;
    if !report.passed {
        report.failure = Some("certificate check failed".into());
    }
    Ok(report)
}

/// `A^{-1} Diag(q^{r_d - r_j} mu^{-r_j})`.
fn heights_closed_form(fm: &FilteredPhiModule, ring: SeriesRing) -> Result<SeriesMatrix> {
    let zn = ring.zn();
    let a_inv = zn_inverse(zn, &fm.matrix_residues(zn))?;
    let q = elem_q(ring, 1)?;
    let mu_inv = elem_mu(ring)?.invert()?;
    let rd = fm.max_weight();
    let cols: Vec<ScaledSeries> = fm
        .weights()
        .iter()
        .map(|&r| q.pow(rd - r)?.mul(&mu_inv.pow(r)?))
        .collect::<Result<_>>()?;
    let rows = a_inv
        .iter()
        .map(|row| {
            row.iter()
                .zip(&cols)
                .map(|(&x, col)| scale(col, x))
                .collect()
        })
        .collect();
    SeriesMatrix::from_rows(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct FiltrationReport {
    pub i: u32,
    pub dim: usize,
    pub expected: usize,
    pub internal_order: usize,
    pub passed: bool,
}

/// Dimension of the image of `Fil^i N = {x : phi(x) in q^i N}` in `N / pi N`.
///
/// Writing `x = sum v_j e_j`, the condition is `P^T phi(v) = 0 mod q^i`.
/// Since `phi(pi) = pi q`, only the coefficients `v_{j,l}` with `l < i`
/// matter. The conditions are linear over `Z/p^N` in the free module
/// `(Z/p^N)[pi] / q^i`; the answer is the mod-`p` rank of the kernel projected
/// to the `l = 0` coordinates. `P` is rebuilt at order at least `N i (p-1)`
/// so that its reduction mod `q^i` is exact.
pub fn filtration_dims(w: &WachModule, i: u32) -> Result<FiltrationReport> {
    let fm = &w.fm;
    let d = fm.dim();
    let expected = fm.expected_filtration_dim(i);
    if i == 0 {
        return Ok(FiltrationReport {
            i,
            dim: d,
            expected,
            internal_order: w.order(),
            passed: d == expected,
        });
    }
    let p = fm.p();
    let prec = w.prec();
    let deg = i as usize * (p - 1) as usize;
    let internal = w.order().max(prec as usize * deg).max(deg + 1);
    let p_wide = build_p(fm, prec, internal)?;
    if p_wide.truncate_to(w.ring())? != w.p_mat {
        return Err(Error::InvariantViolation(
            "rebuilt P disagrees with the module".into(),
        ));
    }
    let ring = p_wide.ring();
    let zn = ring.zn();
    let qi = elem_q(ring, 1)?.pow(i)?;
    let phi_pi = Substitution::frobenius(ring)?.image_of_pi().clone();
    let mut phi_pi_pow = vec![ring.one()];
    for l in 1..i as usize {
        let next = phi_pi_pow[l - 1].mul(&phi_pi)?;
        phi_pi_pow.push(next);
    }
    // Column (j, l): coefficients of sum_k P_jk phi(pi)^l e_k mod q^i.
    let unknowns = d * i as usize;
    let mut columns: Vec<Vec<u64>> = Vec::with_capacity(unknowns);
    for j in 0..d {
        for pw in &phi_pi_pow {
            let mut col = Vec::with_capacity(d * deg);
            for k in 0..d {
                let f = p_wide.get(j, k).mul(pw)?;
                let r = weierstrass_divide(&f, &qi)?.remainder;
                col.extend_from_slice(r.coeffs());
            }
            columns.push(col);
        }
    }
    let rows: Vec<Vec<u64>> = (0..d * deg)
        .map(|t| columns.iter().map(|c| c[t]).collect())
        .collect();
    let kernel = zp_kernel(zn, &rows, unknowns);
    let projected: Vec<Vec<u64>> = kernel
        .generators
        .iter()
        .map(|v| (0..d).map(|j| v[j * i as usize]).collect())
        .collect();
    let dim = rank_mod_p(p, &projected);
    Ok(FiltrationReport {
        i,
        dim,
        expected,
        internal_order: internal,
        passed: dim == expected,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalReport {
    pub level: u32,
    pub c: String,
    /// Guaranteed precision of the reduction mod `phi^{n-1}(q)`.
    pub nq: u32,
    /// Ascending coefficients.
    pub char_poly: Vec<String>,
    pub expected: Vec<String>,
    pub all_scalar: bool,
    pub passed: bool,
}

/// The generator `(1 + p)^{p^{n-1}}` of `Gamma_n`.
pub fn level_generator(p: u64, n: u32) -> BigInt {
    BigInt::from(1 + p).pow(p.pow(n.saturating_sub(1)) as u32)
}

/// Compare the characteristic polynomial of `G_c mod phi^{n-1}(q)` with
/// `prod_j (X - c^{-r_j})`. `c` must be `1 mod p^n`; when it is not among the
/// module's generators its `G` is solved here.
pub fn verify_diagonal(w: &WachModule, n: u32, c: &BigInt) -> Result<DiagonalReport> {
    let fm = &w.fm;
    let p = fm.p();
    if n == 0 {
        return Err(Error::Input("level n must be positive".into()));
    }
    let pn = BigInt::from(p).pow(n);
    if !(c - 1u32).is_multiple_of(&pn) {
        return Err(Error::HypothesisNotMet(format!("{c} is not 1 mod {p}^{n}")));
    }
    let m = elem_q_degree(p, n)?;
    if m >= w.order() {
        return Err(Error::TruncationTooShort {
            degree: m,
            order: w.order(),
        });
    }
    let cz = ZpNum::from_bigint(p, generator_precision(p, w.prec(), w.order()), c)?;
    let g = match w.generator_for(&cz) {
        Some(gen) => gen.g.clone(),
        None => solve_gamma(fm, &w.p_mat, &cz)?.g,
    };
    let reduced: Vec<Vec<CycloElem>> = g
        .rows()
        .iter()
        .map(|row| row.iter().map(|x| reduce_mod_qn(x, n)).collect())
        .collect::<Result<_>>()?;
    let qring = reduced[0][0].ring().clone();
    let nq = qring.prec();
    let cp = char_poly(&reduced)?;
    // prod_j (X - c^{-r_j}) over Z/p^{N_q}
    let c_inv = ZpNum::from_bigint(p, nq, c)?.invert()?;
    let mut expected: Vec<ZpNum> = vec![ZpNum::new(p, nq, 1)?];
    for &r in fm.weights() {
        let root = c_inv.pow(r as u128);
        let mut next = vec![ZpNum::new(p, nq, 0)?; expected.len() + 1];
        for (k, e) in expected.iter().enumerate() {
            next[k + 1] = next[k + 1].add(e)?;
            next[k] = next[k].sub(&e.mul(&root)?)?;
        }
        expected = next;
    }
    let expected_elems: Vec<CycloElem> = expected
        .iter()
        .map(|e| CycloElem::constant(&qring, e))
        .collect::<Result<_>>()?;
    let all_scalar = cp.iter().all(CycloElem::is_scalar);
    let passed = all_scalar && cp == expected_elems;
    Ok(DiagonalReport {
        level: n,
        c: c.to_string(),
        nq,
        char_poly: cp.iter().map(ToString::to_string).collect(),
        expected: expected.iter().map(ToString::to_string).collect(),
        all_scalar,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    pub coefficient: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceReport {
    pub n: u32,
    pub congruent: bool,
    pub first_mismatch: Option<Mismatch>,
}

fn first_difference(
    label: &str,
    x: &SeriesMatrix,
    y: &SeriesMatrix,
    ring: SeriesRing,
) -> Result<Option<Mismatch>> {
    let x = x.truncate_to(ring)?;
    let y = y.truncate_to(ring)?;
    for (i, (rx, ry)) in x.rows().iter().zip(y.rows()).enumerate() {
        for (j, (a, b)) in rx.iter().zip(ry).enumerate() {
            if let Some(t) = a.sub(b)?.pi_valuation() {
                return Ok(Some(Mismatch {
                    matrix: label.to_string(),
                    row: i,
                    col: j,
                    coefficient: t,
                }));
            }
        }
    }
    Ok(None)
}

/// Structure matrices of two modules agree mod `p^n`. Refused unless
/// `p^{n-1}(p-1) >= r_d + 1`.
pub fn congruence_check(w1: &WachModule, w2: &WachModule, n: u32) -> Result<CongruenceReport> {
    let p = w1.fm.p();
    if w2.fm.p() != p || w1.fm.weights() != w2.fm.weights() {
        return Err(Error::Input("modules differ in prime or weights".into()));
    }
    let rd = w1.fm.max_weight() as u64;
    let admissible = n >= 1 && p.pow(n - 1) * (p - 1) > rd;
    if !admissible {
        return Err(Error::HypothesisNotMet(format!(
            "p^(n-1)(p-1) >= r + 1 fails for p = {p}, n = {n}, r = {rd}"
        )));
    }
    if n > w1.prec() || n > w2.prec() {
        return Err(Error::Input(format!(
            "n = {n} exceeds the working precision"
        )));
    }
    if w1.gens.len() != w2.gens.len() {
        return Err(Error::Input("modules use different generator sets".into()));
    }
    let ring = SeriesRing::new(p, n, w1.order().min(w2.order()))?;
    let mut first = first_difference("P", &w1.p_mat, &w2.p_mat, ring)?;
    for (g1, g2) in w1.gens.iter().zip(&w2.gens) {
        if g1.c.truncate(n)? != g2.c.truncate(n)? {
            return Err(Error::Input("modules use different generator sets".into()));
        }
        if first.is_none() {
            let label = format!("G[{}]", g1.c.truncate(n)?);
            first = first_difference(&label, &g1.g, &g2.g, ring)?;
        }
    }
    Ok(CongruenceReport {
        n,
        congruent: first.is_none(),
        first_mismatch: first,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub low: u32,
    pub high: u32,
    pub agrees: bool,
    pub first_mismatch: Option<Mismatch>,
}

/// Build at `N2`, truncate to `N1`, compare with a build at `N1`.
pub fn precision_stability(
    fm: &FilteredPhiModule,
    choice: &GammaChoice,
    low: u32,
    high: u32,
    order: usize,
) -> Result<StabilityReport> {
    if low >= high {
        return Err(Error::Input(format!("need N1 < N2, got {low} and {high}")));
    }
    let w_low = build_wach(fm, choice, low, order)?;
    let w_high = build_wach(fm, choice, high, order)?;
    let ring = w_low.ring();
    let mut first = first_difference("P", &w_high.p_mat, &w_low.p_mat, ring)?;
    for (gh, gl) in w_high.gens.iter().zip(&w_low.gens) {
        if first.is_none() {
            let label = format!("G[{}]", gl.c.truncate(low)?);
            first = first_difference(&label, &gh.g, &gl.g, ring)?;
        }
    }
    Ok(StabilityReport {
        low,
        high,
        agrees: first.is_none(),
        first_mismatch: first,
    })
}
