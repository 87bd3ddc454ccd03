//! Canonical text and JSON forms of [`DiffPoly`].
//!
//! Text grammar (whitespace is significant, output is canonical):
//!
//! ```text
//! poly   := "0" | term (" + " term)*
//! term   := coeff ("*" factor)*
//! coeff  := ["-"] digits "/" digits        (lowest terms, denominator > 0)
//! factor := frame family "^(" jet ")" | "eps" | "eps^" n   (n >= 2)
//! ```
//!
//! Terms appear in ascending monomial order, factors sorted by
//! `(family, jet)` with `eps` last. The parser accepts exactly the strings
//! the printer produces, so `print(parse(s)) == s` whenever parsing succeeds.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, Integer, One, Signed, Zero};
use serde_json::Value;

use super::{DiffPoly, Frame, Monomial, Rational};
use crate::error::{Error, Result};

impl fmt::Display for DiffPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        let letter = self.frame.letter();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(out, " + ")?;
            }
            write!(out, "{}/{}", c.numer(), c.denom())?;
            for &(a, k) in m.factors() {
                write!(out, "*{}{}^({})", letter, a, k)?;
            }
            match m.eps_power() {
                0 => {}
                1 => write!(out, "*eps")?,
                n => write!(out, "*eps^{}", n)?,
            }
        }
        Ok(())
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.err(format!("expected {:?}", lit))
        }
    }

    /// Canonical decimal natural number: no sign, no leading zeros.
    fn digits(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let d = &self.s[start..self.pos];
        if d.is_empty() {
            self.pos = start;
            return self.err("expected digits");
        }
        if d.len() > 1 && d[0] == b'0' {
            self.pos = start;
            return self.err("leading zero");
        }
        Ok(std::str::from_utf8(d).expect("ascii digits"))
    }

    fn small(&mut self) -> Result<u32> {
        let start = self.pos;
        let d = self.digits()?;
        d.parse::<u32>().or_else(|_| {
            self.pos = start;
            self.err("index out of range")
        })
    }
}

impl DiffPoly {
    /// Parses the canonical text form; every variable must belong to `frame`.
    pub fn parse(frame: Frame, text: &str) -> Result<DiffPoly> {
        let mut cur = Cursor { s: text.as_bytes(), pos: 0 };
        let mut poly = DiffPoly::zero(frame);
        if text == "0" {
            return Ok(poly);
        }
        let mut prev: Option<Monomial> = None;
        loop {
            let start = cur.pos;
            let neg = cur.eat("-");
            let num = BigInt::from_str(cur.digits()?).expect("digits");
            cur.expect("/")?;
            let den = BigInt::from_str(cur.digits()?).expect("digits");
            if num.is_zero() {
                cur.pos = start;
                return cur.err("zero coefficient");
            }
            if den.is_zero() || !num.gcd(&den).is_one() {
                cur.pos = start;
                return cur.err("coefficient not in lowest terms");
            }
            let c = Rational::new_raw(if neg { -num } else { num }, den);

            let mut factors = Vec::new();
            let mut eps = 0;
            while cur.eat("*") {
                if eps > 0 {
                    return cur.err("eps must be the last factor");
                }
                if cur.eat("eps") {
                    eps = if cur.eat("^") {
                        let n = cur.small()?;
                        if n < 2 {
                            return cur.err("eps exponent must be at least 2");
                        }
                        n
                    } else {
                        1
                    };
                    continue;
                }
                let letter = cur.s.get(cur.pos).copied().map(char::from);
                if letter.and_then(Frame::from_letter) != Some(frame) {
                    return cur.err(format!("expected a variable of frame {:?}", frame));
                }
                cur.pos += 1;
                let a = cur.small()?;
                if a == 0 {
                    return cur.err("family must be at least 1");
                }
                cur.expect("^(")?;
                let k = cur.small()?;
                cur.expect(")")?;
                if factors.last().is_some_and(|&last| last > (a, k)) {
                    return cur.err("factors out of order");
                }
                factors.push((a, k));
            }
            let m = Monomial { factors, eps };
            if prev.as_ref().is_some_and(|p| *p >= m) {
                cur.pos = start;
                return cur.err("terms out of order or repeated");
            }
            prev = Some(m.clone());
            poly.terms.insert(m, c);
            if cur.pos == cur.s.len() {
                return Ok(poly);
            }
            cur.expect(" + ")?;
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(m, c)| TermJson::term_value(m, c)).collect())
    }

    pub fn from_json(frame: Frame, value: &Value) -> Result<DiffPoly> {
        let terms = value.as_array().ok_or_else(|| malformed("expected an array of terms"))?;
        let mut poly = DiffPoly::zero(frame);
        for t in terms {
            let (m, c) = TermJson::from_value(t)?.to_term()?;
            poly.add_term(m, c);
        }
        Ok(poly)
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Parse { pos: 0, msg: format!("malformed polynomial JSON: {}", msg.into()) }
}

/// JSON shape of one term: `{"coeff": [num, den], "factors": [[family, jet], ...], "eps": n}`.
///
/// Coefficients are read from the `Value` tree by hand: serde's `Number`
/// deserializer degrades integers beyond 64 bits to floats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermJson {
    pub coeff: [BigInt; 2],
    pub factors: Vec<[u32; 2]>,
    pub eps: u32,
}

impl TermJson {
    fn term_value(m: &Monomial, c: &Rational) -> Value {
        let num = |b: &BigInt| serde_json::from_str::<Value>(&b.to_string()).expect("integer literal");
        serde_json::json!({
            "coeff": [num(c.numer()), num(c.denom())],
            "factors": m.factors().iter().map(|&(a, k)| [a, k]).collect::<Vec<_>>(),
            "eps": m.eps_power(),
        })
    }

    pub fn from_value(v: &Value) -> Result<TermJson> {
        let obj = v.as_object().ok_or_else(|| malformed("term is not an object"))?;
        if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "coeff" | "factors" | "eps")) {
            return Err(malformed(format!("unknown field {}", k)));
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| malformed(format!("missing field {}", k)));
        let big = |v: &Value| match v {
            Value::Number(n) => BigInt::from_str(&n.to_string())
                .map_err(|_| malformed(format!("coefficient {} is not an integer", n))),
            _ => Err(malformed("coefficient is not a number")),
        };
        let coeff = match field("coeff")?.as_array().map(Vec::as_slice) {
            Some([n, d]) => [big(n)?, big(d)?],
            _ => return Err(malformed("coeff must be [numerator, denominator]")),
        };
        let factors: Vec<[u32; 2]> =
            serde_json::from_value(field("factors")?.clone()).map_err(|e| malformed(e.to_string()))?;
        let eps = field("eps")?
            .as_u64()
            .and_then(|e| u32::try_from(e).ok())
            .ok_or_else(|| malformed("eps must be a small non-negative integer"))?;
        Ok(TermJson { coeff, factors, eps })
    }

    fn to_term(&self) -> Result<(Monomial, Rational)> {
        let [num, den] = self.coeff.clone();
        if !den.is_positive() {
            return Err(Error::Parse { pos: 0, msg: "denominator must be positive".into() });
        }
        if self.factors.iter().any(|f| f[0] == 0) {
            return Err(Error::Parse { pos: 0, msg: "family must be at least 1".into() });
        }
        let m = Monomial::new(self.factors.iter().map(|f| (f[0], f[1])).collect(), self.eps);
        Ok((m, Rational::new(num, den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;
    use proptest::prelude::*;

    fn seed() -> DiffPoly {
        let v = |a, k| DiffPoly::var(Frame::V, a, k);
        let e2 = DiffPoly::eps_pow(Frame::V, 2);
        &(&v(3, 0) + &(&v(1, 0) * &v(1, 0)).scale(&rat(1, 2))) - &(&e2 * &v(1, 2)).scale(&rat(1, 12))
    }

    #[test]
    fn prints_canonical_text() {
        assert_eq!(seed().to_string(), "1/2*v1^(0)*v1^(0) + -1/12*v1^(2)*eps^2 + 1/1*v3^(0)");
        assert_eq!(DiffPoly::zero(Frame::F).to_string(), "0");
        assert_eq!(DiffPoly::constant(Frame::F, rat(-3, 4)).to_string(), "-3/4");
        assert_eq!(DiffPoly::eps_pow(Frame::F, 1).to_string(), "1/1*eps");
    }

    #[test]
    fn parses_what_it_prints() {
        let s = seed().to_string();
        assert_eq!(DiffPoly::parse(Frame::V, &s).unwrap(), seed());
    }

    #[test]
    fn rejects_non_canonical_text() {
        for bad in [
            "",
            "2/4*v1^(0)",
            "0/1",
            "1/1*v3^(0) + 1/2*v1^(0)*v1^(0)",
            "1/1*v1^(0) + 1/1*v1^(0)",
            "1/1*v2^(0)*v1^(0)",
            "1/1*eps*v1^(0)",
            "1/1*eps^1",
            "1/1*f1^(0)",
            "1/1*v0^(0)",
            "01/1",
            "1/0",
            "1/-1",
            "1/1*v1^(0) +1/1*v2^(0)",
            "1/1 ",
        ] {
            assert!(DiffPoly::parse(Frame::V, bad).is_err(), "accepted {:?}", bad);
        }
    }

    #[test]
    fn json_form() {
        let j = seed().to_json();
        assert_eq!(
            serde_json::to_string(&j).unwrap(),
            r#"[{"coeff":[1,2],"factors":[[1,0],[1,0]],"eps":0},{"coeff":[-1,12],"factors":[[1,2]],"eps":2},{"coeff":[1,1],"factors":[[3,0]],"eps":0}]"#
        );
        assert_eq!(DiffPoly::from_json(Frame::V, &j).unwrap(), seed());
        let big: Value = serde_json::from_str(r#"[{"coeff":[123456789012345678901234567891,2],"factors":[],"eps":0}]"#).unwrap();
        let p = DiffPoly::from_json(Frame::V, &big).unwrap();
        assert_eq!(p.to_json(), big);
        // beyond u64, with trailing zeros that a float would absorb
        let wide: Value =
            serde_json::from_str(&format!(r#"[{{"coeff":[29,9999999999{}],"factors":[[2,0]],"eps":0}}]"#, "0".repeat(76))).unwrap();
        let p = DiffPoly::from_json(Frame::V, &wide).unwrap();
        assert_eq!(DiffPoly::from_json(Frame::V, &p.to_json()).unwrap(), p);
        let unknown: Value = serde_json::from_str(r#"[{"coeff":[1,1],"factors":[],"eps":0,"x":1}]"#).unwrap();
        assert!(DiffPoly::from_json(Frame::V, &unknown).is_err());
        let bad: Value = serde_json::from_str(r#"[{"coeff":[1,0],"factors":[],"eps":0}]"#).unwrap();
        assert!(DiffPoly::from_json(Frame::V, &bad).is_err());
    }

    fn arb_poly() -> impl Strategy<Value = DiffPoly> {
        let term = (-20i64..20, 1i64..9, prop::collection::vec((1u32..5, 0u32..4), 0..4), 0u32..4);
        prop::collection::vec(term, 0..6).prop_map(|ts| {
            DiffPoly::from_terms(Frame::W, ts.into_iter().map(|(n, d, fs, e)| (Monomial::new(fs, e), rat(n, d))))
        })
    }

    proptest! {
        #[test]
        fn text_and_json_round_trip(p in arb_poly()) {
            let s = p.to_string();
            let q = DiffPoly::parse(Frame::W, &s).unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(q.to_string(), s);
            prop_assert_eq!(DiffPoly::from_json(Frame::W, &p.to_json()).unwrap(), p);
        }
    }
}
