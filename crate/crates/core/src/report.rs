//! Batch driver: build, run the requested checks, and assemble a
//! deterministic report. The text form is rendered from the JSON value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CheckSpec, RunConfig};
use crate::error::{Error, Result};
use crate::linalg::smith_pi;
use crate::padic::{check_prime, ZpNum};
use crate::ring::{self, RingElement};
use crate::series::{
    distinguished_degree, elem_mu, elem_q, weierstrass_divide, ScaledSeries, SeriesRing,
    Substitution,
};
use crate::wach::{
    build_wach, congruence_check, filtration_dims, level_generator, precision_stability,
    verify_diagonal, verify_heights, WachModule,
};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Refused,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
}

impl CheckRecord {
    fn new(name: impl Into<String>, passed: bool, certificate: Value) -> Self {
        CheckRecord {
            name: name.into(),
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            detail: None,
            certificate: Some(certificate),
        }
    }

    fn from_error(name: impl Into<String>, err: &Error) -> Self {
        let verdict = match err {
            Error::HypothesisNotMet(_) => Verdict::Refused,
            _ => Verdict::Error,
        };
        CheckRecord {
            name: name.into(),
            verdict,
            detail: Some(err.to_string()),
            certificate: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorRecord {
    pub c: String,
    pub iterations: usize,
    pub g: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildRecord {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_matrix: Option<Vec<Vec<String>>>,
    pub generators: Vec<GeneratorRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub status: Verdict,
    pub passed: usize,
    pub failed: usize,
    pub refused: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build: Option<BuildRecord>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    fn assemble(
        command: &str,
        config: Option<RunConfig>,
        build: Option<BuildRecord>,
        checks: Vec<CheckRecord>,
    ) -> Report {
        let count = |v: Verdict| checks.iter().filter(|c| c.verdict == v).count();
        let build_ok = build.as_ref().is_none_or(|b| b.ok);
        let passed = count(Verdict::Pass);
        let status = if build_ok && passed == checks.len() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let summary = Summary {
            status,
            passed,
            failed: count(Verdict::Fail),
            refused: count(Verdict::Refused),
            errors: count(Verdict::Error),
        };
        Report {
            schema: REPORT_SCHEMA,
            command: command.into(),
            config,
            build,
            checks,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.status == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        render_text(&serde_json::to_value(self).expect("report serializes"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Build,
    Verify,
}

fn build_record(w: &WachModule) -> BuildRecord {
    BuildRecord {
        ok: true,
        error: None,
        p_matrix: Some(w.p_mat.render_rows()),
        generators: w
            .gens
            .iter()
            .map(|g| GeneratorRecord {
                c: g.c.truncate(w.prec()).expect("guard digits").to_string(),
                iterations: g.iterations,
                g: g.g.render_rows(),
            })
            .collect(),
    }
}

/// Build the module described by `cfg` and, for `Verify`, run every check.
/// Check failures are recorded, never raised.
pub fn run(cfg: &RunConfig, command: Command) -> Report {
    let name = match command {
        Command::Build => "build",
        Command::Verify => "verify",
    };
    let fm = match cfg.filtered_module() {
        Ok(fm) => fm,
        Err(e) => {
            let build = BuildRecord {
                ok: false,
                error: Some(e.to_string()),
                p_matrix: None,
                generators: Vec::new(),
            };
            return Report::assemble(name, Some(cfg.clone()), Some(build), Vec::new());
        }
    };
    let choice = cfg.gamma_choice();
    let (n, m) = (cfg.precision.padic, cfg.precision.pi);
    let w = match build_wach(&fm, &choice, n, m) {
        Ok(w) => w,
        Err(e) => {
            let build = BuildRecord {
                ok: false,
                error: Some(e.to_string()),
                p_matrix: None,
                generators: Vec::new(),
            };
            return Report::assemble(name, Some(cfg.clone()), Some(build), Vec::new());
        }
    };
    let mut checks = Vec::new();
    if command == Command::Verify {
        for spec in &cfg.checks {
            let label = spec.name();
            let rec =
                run_check(cfg, &w, spec).unwrap_or_else(|e| CheckRecord::from_error(label, &e));
            checks.push(rec);
        }
    }
    Report::assemble(name, Some(cfg.clone()), Some(build_record(&w)), checks)
}

fn run_check(cfg: &RunConfig, w: &WachModule, spec: &CheckSpec) -> Result<CheckRecord> {
    let label = spec.name();
    Ok(match spec {
        CheckSpec::Commutation => {
            let inv = w.invariants()?;
            let ok = inv.commutation.iter().chain(&inv.cocycle).all(|v| v.holds);
            CheckRecord::new(
                label,
                ok,
                json!({ "commutation": inv.commutation, "cocycle": inv.cocycle }),
            )
        }
        CheckSpec::ModPi => {
            let inv = w.invariants()?;
            let ok = inv.mod_pi.iter().all(|v| v.holds);
            CheckRecord::new(label, ok, json!({ "mod_pi": inv.mod_pi }))
        }
        CheckSpec::Heights => {
            let r = verify_heights(w)?;
            CheckRecord::new(label, r.passed, to_value(&r))
        }
        CheckSpec::Filtration => {
            let mut reports = Vec::new();
            for i in 0..=w.fm.max_weight() + 1 {
                reports.push(filtration_dims(w, i)?);
            }
            let ok = reports.iter().all(|r| r.passed);
            CheckRecord::new(label, ok, json!(reports))
        }
        CheckSpec::Diagonal { n, c } => {
            let c = c
                .as_ref()
                .map(|x| x.0.clone())
                .unwrap_or_else(|| level_generator(w.fm.p(), *n));
            let r = verify_diagonal(w, *n, &c)?;
            CheckRecord::new(label, r.passed, to_value(&r))
        }
        CheckSpec::Congruence { partner, n } => {
            let fm2 = cfg.partner_module(partner)?;
            let w2 = build_wach(&fm2, &w.choice, w.prec(), w.order())?;
            let r = congruence_check(w, &w2, *n)?;
            CheckRecord::new(label, r.congruent, to_value(&r))
        }
        CheckSpec::Stability { n1 } => {
            let r = precision_stability(&w.fm, &w.choice, *n1, w.prec(), w.order())?;
            CheckRecord::new(label, r.agrees, to_value(&r))
        }
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report data serializes")
}

// ---------------------------------------------------------------------------
// Self-test

pub const SELFTEST_MAX_PRIME: u64 = 13;

fn random_series(rng: &mut ChaCha8Rng, ring: SeriesRing) -> ScaledSeries {
    let modulus = ring.zn().modulus();
    let coeffs: Vec<u64> = (0..ring.order())
        .map(|_| rng.gen_range(0..modulus))
        .collect();
    ring.from_residues(0, &coeffs).expect("integral")
}

fn random_unit_c(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> ZpNum {
    loop {
        let v: i64 = rng.gen_range(1..1_000_000);
        if !(v as u64).is_multiple_of(p) {
            return ZpNum::new(p, prec, v as i128).expect("valid");
        }
    }
}

struct Suite {
    name: &'static str,
    trials: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            name,
            trials: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: Result<bool>, what: impl FnOnce() -> String) {
        self.trials += 1;
        match ok {
            Ok(true) => {}
            Ok(false) => self.failures.push(what()),
            Err(e) => self.failures.push(format!("{}: {e}", what())),
        }
    }

    fn into_record(self) -> CheckRecord {
        let passed = self.failures.is_empty();
        CheckRecord::new(
            self.name,
            passed,
            json!({ "trials": self.trials, "failures": self.failures }),
        )
    }
}

/// Determinant by cofactor expansion along the first row.
fn cofactor_det<T: RingElement>(a: &[Vec<T>]) -> Result<T> {
    let d = a.len();
    if d == 1 {
        return Ok(a[0][0].clone());
    }
    let mut acc = a[0][0].zero_like();
    for j in 0..d {
        let minor: Vec<Vec<T>> = a[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = a[0][j].ring_mul(&cofactor_det(&minor)?)?;
        acc = if j % 2 == 0 {
            acc.ring_add(&term)?
        } else {
            acc.ring_sub(&term)?
        };
    }
    Ok(acc)
}

/// `v_pi` of the ideal generated by the `k x k` minors, capped at the order.
fn minor_gcd(a: &[Vec<ScaledSeries>], k: usize) -> Result<usize> {
    let d = a.len();
    let order = a[0][0].ring().order();
    let subsets = |n: usize, k: usize| -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    };
    let mut best = order;
    for rows in subsets(d, k) {
        for cols in subsets(d, k) {
            let sub: Vec<Vec<ScaledSeries>> = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect())
                .collect();
            if let Some(v) = cofactor_det(&sub)?.pi_valuation() {
                best = best.min(v);
            }
        }
    }
    Ok(best)
}

/// Randomized law suites for one prime.
pub fn selftest(p: u64, seed: u64) -> Report {
    let refuse = |why: String| {
        let rec = CheckRecord {
            name: "selftest".into(),
            verdict: Verdict::Refused,
            detail: Some(why),
            certificate: None,
        };
        Report::assemble("selftest", None, None, vec![rec])
    };
    if let Err(e) = check_prime(p) {
        return refuse(e.to_string());
    }
    if p > SELFTEST_MAX_PRIME {
        return refuse(format!("selftest supports p <= {SELFTEST_MAX_PRIME}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prec = 4;
    let order = 16;
    let ring = SeriesRing::new(p, prec, order).expect("valid ring");
    let cprec = crate::wach::generator_precision(p, prec, order);
    let mut checks = Vec::new();

    // Frobenius and Gamma are ring homomorphisms.
    let mut hom = Suite::new("homomorphism");
    let phi = Substitution::frobenius(ring).expect("frobenius");
    for _ in 0..10 {
        let f = random_series(&mut rng, ring);
        let g = random_series(&mut rng, ring);
        let c = random_unit_c(&mut rng, p, cprec);
        let ok = (|| -> Result<bool> {
            let gamma = Substitution::gamma(ring, &c)?;
            let mut ok = true;
            for endo in [&phi, &gamma] {
                ok &= endo.apply(&f.mul(&g)?)? == endo.apply(&f)?.mul(&endo.apply(&g)?)?;
                ok &= endo.apply(&f.add(&g)?)? == endo.apply(&f)?.add(&endo.apply(&g)?)?;
            }
            Ok(ok)
        })();
        hom.record(ok, || format!("c = {c}, f = {f}, g = {g}"));
    }
    checks.push(hom.into_record());

    // phi gamma_c = gamma_c phi and gamma_c gamma_c' = gamma_{cc'}
    let mut comm = Suite::new("commutation");
    for _ in 0..10 {
        let f = random_series(&mut rng, ring);
        let c1 = random_unit_c(&mut rng, p, cprec);
        let c2 = random_unit_c(&mut rng, p, cprec);
        let ok = (|| -> Result<bool> {
            let g1 = Substitution::gamma(ring, &c1)?;
            let g2 = Substitution::gamma(ring, &c2)?;
            let g12 = Substitution::gamma(ring, &c1.mul(&c2)?)?;
            Ok(phi.apply(&g1.apply(&f)?)? == g1.apply(&phi.apply(&f)?)?
                && g1.apply(&g2.apply(&f)?)? == g12.apply(&f)?)
        })();
        comm.record(ok, || format!("c = {c1}, c' = {c2}, f = {f}"));
    }
    checks.push(comm.into_record());

    // f = D h + r for random distinguished D
    let mut wd = Suite::new("weierstrass");
    for _ in 0..20 {
        let m = rng.gen_range(1..5usize);
        let modulus = ring.zn().modulus();
        let dc: Vec<u64> = (0..=m)
            .map(|k| {
                if k == m {
                    1
                } else {
                    ring.zn().mul(p, rng.gen_range(0..modulus))
                }
            })
            .collect();
        let d = ring.from_residues(0, &dc).expect("integral");
        let f = random_series(&mut rng, ring);
        let ok = (|| -> Result<bool> {
            distinguished_degree(&d)?;
            let res = weierstrass_divide(&f, &d)?;
            let h = res.quotient.embed_exact(ring)?;
            let r = res.remainder.embed_exact(ring)?;
            Ok(d.mul(&h)?.add(&r)? == f)
        })();
        wd.record(ok, || format!("D = {d}, f = {f}"));
    }
    checks.push(wd.into_record());

    // smith_pi against the minor-gcd characterisation
    let mut snf = Suite::new("smith_pi");
    let fp_ring = SeriesRing::new(p, 1, 8).expect("valid ring");
    for _ in 0..20 {
        let entries: Vec<Vec<Vec<u64>>> = (0..3)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let v = rng.gen_range(0..4usize);
                        let mut c = vec![0u64; 8];
                        for x in c.iter_mut().skip(v) {
                            *x = rng.gen_range(0..p);
                        }
                        c
                    })
                    .collect()
            })
            .collect();
        let ok = (|| -> Result<bool> {
            let form = smith_pi(p, 8, &entries)?;
            let series: Vec<Vec<ScaledSeries>> = entries
                .iter()
                .map(|r| r.iter().map(|c| fp_ring.from_residues(0, c)).collect())
                .collect::<Result<_>>()?;
            let mut ok = form.exponents.windows(2).all(|w| w[0] <= w[1]);
            let mut partial = 0usize;
            for k in 1..=3 {
                partial = (partial + form.exponents[k - 1]).min(8);
                ok &= minor_gcd(&series, k)? == partial;
            }
            Ok(ok)
        })();
        snf.record(ok, || format!("{entries:?}"));
    }
    checks.push(snf.into_record());

    // mu(0) = 1, mu (q - pi^{p-1}) = p, (mu q)^s = p^s mod pi^{p-1}
    let mut mu_suite = Suite::new("mu_identities");
    let ok = (|| -> Result<bool> {
        let mu = elem_mu(ring)?;
        let q = elem_q(ring, 1)?;
        let k = (p - 1) as usize;
        let mut ok = mu.coeffs()[0] == 1;
        ok &= mu.mul(&q.sub(&ring.pi_pow(k))?)? == ring.constant(p as i128);
        let qmu = q.mul(&mu)?;
        for s in 1..=(p - 2) as u32 {
            let lhs = qmu.pow(s)?;
            let rhs = ring.constant(p as i128).pow(s)?;
            ok &= lhs.coeffs()[..k] == rhs.coeffs()[..k];
        }
        Ok(ok)
    })();
    mu_suite.record(ok, || "mu identities".into());
    checks.push(mu_suite.into_record());

    // Berkowitz against cofactor expansion
    let mut cp = Suite::new("char_poly");
    let modulus = ring.zn().modulus();
    for _ in 0..20 {
        let a: Vec<Vec<ZpNum>> = (0..3)
            .map(|_| {
                (0..3)
                    .map(|_| ZpNum::new(p, prec, rng.gen_range(0..modulus) as i128).expect("valid"))
                    .collect()
            })
            .collect();
        let ok = (|| -> Result<bool> {
            let c = ring::char_poly(&a)?;
            // det(A) = (-1)^3 c_0, and det(XI - A) at X = 1 equals sum of coefficients
            let det = cofactor_det(&a)?;
            let one = a[0][0].one_like();
            let shifted: Vec<Vec<ZpNum>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            let x = a[i][j].neg();
                            if i == j {
                                x.add(&one)
                            } else {
                                Ok(x)
                            }
                        })
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?;
            let at_one = cofactor_det(&shifted)?;
            let mut sum = c[0].zero_like();
            for x in &c {
                sum = sum.add(x)?;
            }
            Ok(c[0].neg() == det && sum == at_one && c[3] == one)
        })();
        cp.record(ok, || format!("{a:?}"));
    }
    checks.push(cp.into_record());

    // A small random module builds and satisfies its invariants.
    let mut build = Suite::new("build");
    let bprec = 3;
    let border = 2 * (p as usize - 1) + 6;
    for _ in 0..2 {
        let d = rng.gen_range(1..=2usize);
        let mut weights: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=(p as i64 - 2))).collect();
        weights.sort_unstable();
        let ok = (|| -> Result<bool> {
            let a = loop {
                let a: Vec<Vec<num_bigint::BigInt>> = (0..d)
                    .map(|_| (0..d).map(|_| rng.gen_range(-20i64..20).into()).collect())
                    .collect();
                if let Ok(fm) = crate::wach::FilteredPhiModule::new(p, weights.clone(), a) {
                    break fm;
                }
            };
            let w = build_wach(&a, &crate::wach::GammaChoice::Default, bprec, border)?;
            Ok(w.invariants()?.all_hold() && verify_heights(&w)?.passed)
        })();
        build.record(ok, || format!("weights {weights:?}"));
    }
    checks.push(build.into_record());

    Report::assemble("selftest", None, None, checks)
}

// ---------------------------------------------------------------------------
// Text rendering

/// Human-readable form of a report, computed from its JSON value alone.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    let s = |x: &Value| {
        x.as_str()
            .map(str::to_string)
            .unwrap_or_else(|| x.to_string())
    };
    out.push_str(&format!("command: {}\n", s(&v["command"])));
    if let Some(cfg) = v.get("config") {
        out.push_str(&format!(
            "p = {}, N = {}, M = {}, weights = {}\n",
            cfg["p"], cfg["precision"]["padic"], cfg["precision"]["pi"], cfg["module"]["weights"]
        ));
    }
    if let Some(b) = v.get("build") {
        if b["ok"].as_bool() == Some(true) {
            out.push_str("build: ok\n");
            if let Some(rows) = b["p_matrix"].as_array() {
                out.push_str("P =\n");
                for row in rows {
                    out.push_str(&format!("  {row}\n"));
                }
            }
            for g in b["generators"].as_array().into_iter().flatten() {
                out.push_str(&format!(
                    "G[c = {}] ({} iterations) =\n",
                    s(&g["c"]),
                    g["iterations"]
                ));
                for row in g["g"].as_array().into_iter().flatten() {
                    out.push_str(&format!("  {row}\n"));
                }
            }
        } else {
            out.push_str(&format!("build: error: {}\n", s(&b["error"])));
        }
    }
    for c in v["checks"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "[{}] {}",
            s(&c["verdict"]).to_uppercase(),
            s(&c["name"])
        ));
        if let Some(d) = c.get("detail") {
            out.push_str(&format!(": {}", s(d)));
        }
        out.push('\n');
    }
    let sum = &v["summary"];
    out.push_str(&format!(
        "summary: {} (passed {}, failed {}, refused {}, errors {})\n",
        s(&sum["status"]),
        sum["passed"],
        sum["failed"],
        sum["refused"],
        sum["errors"]
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json_str(text).unwrap()
    }

    const TRIVIAL: &str = r#"{"schema": 1, "p": 5, "precision": {"padic": 3, "pi": 12},
        "module": {"rank": 1, "weights": [0], "matrix": [["1"]]}}"#;

    #[test]
    fn trivial_config_passes() {
        let r = run(&cfg(TRIVIAL), Command::Verify);
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.checks.len(), 4);
    }

    #[test]
    fn build_only_has_no_checks() {
        let r = run(&cfg(TRIVIAL), Command::Build);
        assert!(r.passed());
        assert!(r.checks.is_empty());
    }

    #[test]
    fn refused_check_fails_the_run() {
        let text = TRIVIAL.replace(
            r#""matrix": [["1"]]}"#,
            r#""matrix": [["1"]]}, "checks": [{"congruence": {"partner": [["6"]], "n": 0}}]"#,
        );
        let r = run(&cfg(&text), Command::Verify);
        assert_eq!(r.checks[0].verdict, Verdict::Refused);
        assert!(!r.passed());
    }

    #[test]
    fn deterministic_output() {
        let a = run(&cfg(TRIVIAL), Command::Verify).to_json();
        let b = run(&cfg(TRIVIAL), Command::Verify).to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn selftest_guards() {
        assert_eq!(selftest(2, 0).checks[0].verdict, Verdict::Refused);
        assert_eq!(selftest(17, 0).checks[0].verdict, Verdict::Refused);
    }

    #[test]
    fn selftest_small_primes() {
        for (p, seed) in [(3, 0), (5, 1)] {
            let r = selftest(p, seed);
            assert!(r.passed(), "{}", r.to_json());
        }
    }
}
