//! Canonical text form `p^-e * (c0 + c1*pi + c2*pi^2 + ...)`.
//!
//! Coefficients are printed as residues in `[0, p^N)`, zero terms are
//! skipped, and the `p^-e * (...)` wrapper is omitted when `e = 0`.

use std::fmt::Write;

use num_bigint::BigInt;

use super::{ScaledSeries, SeriesRing};
use crate::error::{Error, Result};
use crate::padic::parse_integer;

pub fn render(s: &ScaledSeries) -> String {
    let mut body = String::new();
    for (k, &c) in s.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        if !body.is_empty() {
            body.push_str(" + ");
        }
        match k {
            0 => write!(body, "{c}"),
            1 => write!(body, "{c}*pi"),
            _ => write!(body, "{c}*pi^{k}"),
        }
        .expect("writing to a String");
    }
    if body.is_empty() {
        body.push('0');
    }
    if s.e() == 0 {
        body
    } else {
        format!("p^-{} * ({body})", s.e())
    }
}

/// Parse the text form into `ring`.
///
/// Accepts signed coefficients, bare `pi` / `pi^k` terms, repeated powers
/// (summed) and arbitrary spacing. Terms at or beyond the truncation order
/// are dropped.
pub fn parse(ring: SeriesRing, input: &str) -> Result<ScaledSeries> {
    let bad = |why: &str| Error::Input(format!("cannot parse series {input:?}: {why}"));
    let text = input.trim();
    let (e, body) = match text.strip_prefix("p^-") {
        Some(rest) => {
            let (exp, rest) = rest
                .split_once('*')
                .ok_or_else(|| bad("expected '*' after the denominator"))?;
            let e: u32 = exp
                .trim()
                .parse()
                .map_err(|_| bad("bad denominator exponent"))?;
            let rest = rest.trim();
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| bad("expected a parenthesised numerator"))?;
            (e, inner)
        }
        None => (0, text),
    };
    if e >= ring.prec() {
        return Err(Error::DenominatorOverflow {
            e,
            prec: ring.prec(),
        });
    }
    let zn = ring.zn();
    let mut coeffs = vec![0u64; ring.order()];
    let normalized = body.replace(" - ", " + -");
    for term in normalized.split('+') {
        let term: String = term.chars().filter(|c| !c.is_whitespace()).collect();
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        let (coeff, power) = parse_term(&term).ok_or_else(|| bad(&format!("bad term {term:?}")))?;
        if power < ring.order() {
            coeffs[power] = zn.add(coeffs[power], zn.from_bigint(&coeff));
        }
    }
    ring.from_residues(e, &coeffs)
}

fn parse_term(term: &str) -> Option<(BigInt, usize)> {
    let (coeff, monomial) = match term.find("pi") {
        None => return Some((parse_integer(term).ok()?, 0)),
        Some(i) => (&term[..i], &term[i + 2..]),
    };
    let coeff = match coeff {
        "" | "+" => BigInt::from(1),
        "-" => BigInt::from(-1),
        c => parse_integer(c.strip_suffix('*')?).ok()?,
    };
    let power = match monomial {
        "" => 1,
        m => {
            let digits = m.strip_prefix('^')?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            digits.parse().ok()?
        }
    };
    Some((coeff, power))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_examples() {
        let r = SeriesRing::new(3, 4, 5).unwrap();
        assert_eq!(r.from_ints(&[3, 0, 1]).to_string(), "3 + 1*pi^2");
        assert_eq!(r.zero().to_string(), "0");
        assert_eq!(r.from_ints(&[-1]).to_string(), "80");
        let s = r.from_residues(2, &[0, 5]).unwrap();
        assert_eq!(s.to_string(), "p^-2 * (5*pi)");
    }

    #[test]
    fn parse_round_trip() {
        let r = SeriesRing::new(5, 3, 6).unwrap();
        let s = r.from_residues(1, &[7, 0, 124, 1, 0, 3]).unwrap();
        assert_eq!(parse(r, &s.to_string()).unwrap(), s);
    }

    #[test]
    fn parse_loose_forms() {
        let r = SeriesRing::new(3, 2, 4).unwrap();
        assert_eq!(
            parse(r, "pi^2 - 1 + 2*pi + pi^2 + pi^9").unwrap(),
            r.from_ints(&[-1, 2, 2])
        );
        assert!(parse(r, "1 + ").is_err());
        assert!(parse(r, "3*pi^").is_err());
        assert!(parse(r, "p^-2 * (1)").is_err());
        assert!(parse(r, "x").is_err());
    }
}
