//! Run configuration (JSON, `schema: 1`).
//!
//! Integers that may be large (matrix entries, character values) are
//! accepted as JSON numbers or decimal strings and echoed back as strings.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{checked_power, parse_integer};
use crate::wach::{generator_precision, FilteredPhiModule, GammaChoice};

pub const SCHEMA_VERSION: u32 = 1;

/// An integer literal from the config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLit(pub BigInt);

impl fmt::Display for IntLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for IntLit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for IntLit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Signed(i64),
            Unsigned(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Signed(v) => Ok(IntLit(v.into())),
            Repr::Unsigned(v) => Ok(IntLit(v.into())),
            Repr::Text(s) => parse_integer(&s)
                .map(IntLit)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSpec {
    pub padic: u32,
    pub pi: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub rank: usize,
    pub weights: Vec<i64>,
    pub matrix: Vec<Vec<IntLit>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaSpec {
    Default,
    Explicit(Vec<IntLit>),
}

impl Serialize for GammaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GammaSpec::Default => s.serialize_str("default"),
            GammaSpec::Explicit(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for GammaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Word(String),
            List(Vec<IntLit>),
        }
        match Repr::deserialize(d)? {
            Repr::Word(w) if w == "default" => Ok(GammaSpec::Default),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "gamma must be \"default\" or a list of character values, got {w:?}"
            ))),
            Repr::List(v) => Ok(GammaSpec::Explicit(v)),
        }
    }
}

/// One requested verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Commutation,
    ModPi,
    Heights,
    Filtration,
    Diagonal {
        n: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<IntLit>,
    },
    Congruence {
        partner: Vec<Vec<IntLit>>,
        n: u32,
    },
    Stability {
        n1: u32,
    },
}

impl CheckSpec {
    pub fn name(&self) -> String {
        match self {
            CheckSpec::Commutation => "commutation".into(),
            CheckSpec::ModPi => "mod_pi".into(),
            CheckSpec::Heights => "heights".into(),
            CheckSpec::Filtration => "filtration".into(),
            CheckSpec::Diagonal { n, .. } => format!("diagonal(n={n})"),
            CheckSpec::Congruence { n, .. } => format!("congruence(n={n})"),
            CheckSpec::Stability { n1 } => format!("stability(n1={n1})"),
        }
    }
}

fn default_checks() -> Vec<CheckSpec> {
    vec![
        CheckSpec::Commutation,
        CheckSpec::ModPi,
        CheckSpec::Heights,
        CheckSpec::Filtration,
    ]
}

fn default_gamma() -> GammaSpec {
    GammaSpec::Default
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub p: u64,
    pub precision: PrecisionSpec,
    pub module: ModuleSpec,
    #[serde(default = "default_gamma")]
    pub gamma: GammaSpec,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub seed: u64,
}

fn to_bigint_rows(rows: &[Vec<IntLit>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|x| x.0.clone()).collect())
        .collect()
}

impl RunConfig {
    /// Parse and validate.
    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, why: String| Error::Input(format!("config field `{name}`: {why}"));
        if self.schema != SCHEMA_VERSION {
            return Err(field(
                "schema",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema
                ),
            ));
        }
        crate::padic::check_prime(self.p).map_err(|e| field("p", e.to_string()))?;
        let (n, m) = (self.precision.padic, self.precision.pi);
        if n == 0 {
            return Err(field("precision.padic", "must be positive".into()));
        }
        if (m as u64) < self.p {
            return Err(field(
                "precision.pi",
                format!("must exceed p - 1 = {}", self.p - 1),
            ));
        }
        let guard = generator_precision(self.p, n, m);
        if checked_power(self.p, guard).is_none() {
            return Err(field(
                "precision.padic",
                format!(
                    "{}^{guard} (with guard digits) exceeds the supported modulus",
                    self.p
                ),
            ));
        }
        if self.module.rank != self.module.weights.len() {
            return Err(field(
                "module.weights",
                format!(
                    "has {} entries but rank is {}",
                    self.module.weights.len(),
                    self.module.rank
                ),
            ));
        }
        self.filtered_module()
            .map_err(|e| field("module", e.to_string()))?;
        if let GammaSpec::Explicit(v) = &self.gamma {
            if v.is_empty() {
                return Err(field("gamma", "empty generator list".into()));
            }
            for (i, c) in v.iter().enumerate() {
                if !crate::padic::bigint_is_unit(&c.0, self.p) {
                    return Err(field(&format!("gamma[{i}]"), format!("{c} is not a unit")));
                }
            }
        }
        for (i, check) in self.checks.iter().enumerate() {
            match check {
                CheckSpec::Congruence { partner, .. } => {
                    self.partner_module(partner).map_err(|e| {
                        field(&format!("checks[{i}].congruence.partner"), e.to_string())
                    })?;
                }
                CheckSpec::Stability { n1 } if *n1 == 0 || *n1 >= n => {
                    return Err(field(
                        &format!("checks[{i}].stability.n1"),
                        format!("must lie in 1..{n}"),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn filtered_module(&self) -> Result<FilteredPhiModule> {
        FilteredPhiModule::new(
            self.p,
            self.module.weights.clone(),
            to_bigint_rows(&self.module.matrix),
        )
    }

    pub fn partner_module(&self, partner: &[Vec<IntLit>]) -> Result<FilteredPhiModule> {
        self.filtered_module()?.with_matrix(to_bigint_rows(partner))
    }

    pub fn gamma_choice(&self) -> GammaChoice {
        match &self.gamma {
            GammaSpec::Default => GammaChoice::Default,
            GammaSpec::Explicit(v) => {
                GammaChoice::Explicit(v.iter().map(|x| x.0.clone()).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"{
        "schema": 1,
        "p": 3,
        "precision": {"padic": 6, "pi": 24},
        "module": {"rank": 1, "weights": [1], "matrix": [["1"]]},
        "gamma": "default",
        "checks": ["commutation", "mod_pi", {"diagonal": {"n": 1}}, {"stability": {"n1": 3}}]
    }"#;

    #[test]
    fn parses_basic_config() {
        let cfg = RunConfig::from_json_str(BASIC).unwrap();
        assert_eq!(cfg.p, 3);
        assert_eq!(cfg.checks.len(), 4);
        assert_eq!(cfg.checks[2], CheckSpec::Diagonal { n: 1, c: None });
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn numbers_and_strings_both_accepted() {
        let text = BASIC.replace(r#"[["1"]]"#, "[[1]]");
        let cfg = RunConfig::from_json_str(&text).unwrap();
        assert_eq!(cfg.module.matrix[0][0], IntLit(1.into()));
        let echoed = serde_json::to_string(&cfg).unwrap();
        assert!(echoed.contains(r#""matrix":[["1"]]"#));
    }

    #[test]
    fn rejects_bad_weight() {
        let text = BASIC.replace(r#""weights": [1]"#, r#""weights": [2]"#);
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("module"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields_and_schema() {
        let text = BASIC
            .replace(r#""seed""#, r#""sed""#)
            .replace(r#""schema": 1"#, r#""schema": 1, "extra": 0"#);
        assert!(RunConfig::from_json_str(&text).is_err());
        let text = BASIC.replace(r#""schema": 1"#, r#""schema": 2"#);
        assert!(RunConfig::from_json_str(&text).is_err());
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = RunConfig::from_json_str("{\n  \"schema\": 1,\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
