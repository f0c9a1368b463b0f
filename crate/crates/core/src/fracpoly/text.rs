//! Text form of fractional polynomials.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! poly     := ["+" | "-"] term { ("+" | "-") term } | "0"
//! term     := ["+" | "-"] factor { "*" factor }
//! factor   := number | var [ "^" exponent ]
//! exponent := number | "a" | "(" linear ")"
//! linear   := ["+" | "-"] lterm { ("+" | "-") lterm }
//! lterm    := number [ "*" "a" ] | "a"
//! ```
//!
//! `a` stands for the fractional order, which must be supplied when parsing
//! text that uses it. The printer writes every coefficient explicitly and
//! exponents on the `m + k*a` lattice whenever the order is known and the
//! exponent lies on it.

use super::{is_integer, FracMonomial, FracPoly, VarId};
use crate::error::{FracError, Result};

const MAX_LATTICE_K: i64 = 12;

/// Writes an exponent, using lattice form `(m+k*a)` when `alpha` is given and
/// the exponent lies on the lattice with small `k`.
pub fn format_exponent(e: f64, alpha: Option<f64>) -> String {
    if let Some(a) = alpha {
        if let Some((m, k)) = lattice_coords(e, a) {
            return match (m, k) {
                (m, 0) => int_text(m),
                (0, 1) => "a".to_string(),
                (0, k) => format!("({k}*a)"),
                (m, 1) => format!("({m}+a)"),
                (m, -1) => format!("({m}-a)"),
                (m, k) if k < 0 => format!("({m}-{}*a)", -k),
                (m, k) => format!("({m}+{k}*a)"),
            };
        }
    }
    if is_integer(e) {
        int_text(e.round() as i64)
    } else if e < 0.0 {
        format!("({e})")
    } else {
        format!("{e}")
    }
}

fn int_text(m: i64) -> String {
    if m < 0 {
        format!("({m})")
    } else {
        m.to_string()
    }
}

fn lattice_coords(e: f64, a: f64) -> Option<(i64, i64)> {
    let mut ks: Vec<i64> = vec![0];
    for k in 1..=MAX_LATTICE_K {
        ks.push(k);
        ks.push(-k);
    }
    ks.into_iter().find_map(|k| {
        let m = e - k as f64 * a;
        is_integer(m).then(|| (m.round() as i64, k))
    })
}

fn format_monomial(t: &FracMonomial, alpha: Option<f64>) -> String {
    let mut s = format!("{}", t.coeff());
    for &(v, e) in t.powers() {
        s.push_str(" * ");
        s.push_str(&v.name());
        if (e - 1.0).abs() > super::EXPONENT_TOL {
            s.push('^');
            s.push_str(&format_exponent(e, alpha));
        }
    }
    s
}

pub(super) fn format_poly(p: &FracPoly, alpha: Option<f64>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    p.terms().iter().map(|t| format_monomial(t, alpha)).collect::<Vec<_>>().join(" + ")
}

/// Parses the text form. `alpha` resolves the symbol `a` in exponents.
pub fn parse_poly(text: &str, alpha: Option<f64>) -> Result<FracPoly> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, alpha };
    let poly = p.poly()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    alpha: Option<f64>,
}

impl Parser {
    fn error(&self, message: &str) -> FracError {
        FracError::Parse { column: self.pos + 1, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sign(&mut self) -> Option<f64> {
        if self.eat('+') {
            Some(1.0)
        } else if self.eat('-') {
            Some(-1.0)
        } else {
            None
        }
    }

    fn poly(&mut self) -> Result<FracPoly> {
        if self.peek().is_none() {
            return Err(self.error("empty polynomial"));
        }
        let mut terms = Vec::new();
        let mut sign = self.sign().unwrap_or(1.0);
        loop {
            let mut t = self.term()?;
            if sign < 0.0 {
                t = FracMonomial { coeff: -t.coeff, powers: t.powers };
            }
            terms.push(t);
            match self.sign() {
                Some(s) => sign = s,
                None => break,
            }
        }
        Ok(FracPoly::from_terms(terms))
    }

    fn term(&mut self) -> Result<FracMonomial> {
        let mut m = FracMonomial::new(1.0, &[]);
        if let Some(sign) = self.sign() {
            m.coeff = sign;
        }
        loop {
            self.factor(&mut m)?;
            if !self.eat('*') {
                return Ok(m);
            }
        }
    }

    fn factor(&mut self, m: &mut FracMonomial) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                m.coeff *= self.number()?;
                Ok(())
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                let v = VarId::parse(&name).ok_or_else(|| FracError::Parse {
                    column: start + 1,
                    message: format!("unknown variable '{name}'"),
                })?;
                let e = if self.eat('^') { self.exponent()? } else { 1.0 };
                m.multiply_power(v, e);
                Ok(())
            }
            _ => Err(self.error("expected a number or a variable")),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Parser| {
            while p.chars.get(p.pos).is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E'))
            && self.chars.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
        {
            self.pos += 2;
            digits(self);
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| FracError::Parse { column: start + 1, message: format!("invalid number '{s}'") })
    }

    fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or_else(|| self.error("exponent uses 'a' but no order was given"))
    }

    fn exponent(&mut self) -> Result<f64> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.linear()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some('a') => {
                let a = self.alpha()?;
                self.pos += 1;
                Ok(a)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            _ => Err(self.error("expected an exponent")),
        }
    }

    fn linear(&mut self) -> Result<f64> {
        let mut acc = 0.0;
        let mut sign = self.sign().unwrap_or(1.0);
        loop {
            let v = if self.peek() == Some('a') {
                let a = self.alpha()?;
                self.pos += 1;
                a
            } else {
                let n = self.number()?;
                if self.eat('*') {
                    if self.peek() != Some('a') {
                        return Err(self.error("expected 'a'"));
                    }
                    let a = self.alpha()?;
                    self.pos += 1;
                    n * a
                } else {
                    n
                }
            };
            acc += sign * v;
            match self.sign() {
                Some(s) => sign = s,
                None => return Ok(acc),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prints_lattice_exponents() {
        let a = 0.3;
        assert_eq!(format_exponent(1.0 + 2.0 * a, Some(a)), "(1+2*a)");
        assert_eq!(format_exponent(a, Some(a)), "a");
        assert_eq!(format_exponent(2.0 * a, Some(a)), "(2*a)");
        assert_eq!(format_exponent(1.0 - a, Some(a)), "(1-a)");
        assert_eq!(format_exponent(2.0, Some(a)), "2");
        assert_eq!(format_exponent(0.123, None), "0.123");
        assert_eq!(format_exponent(-0.5, None), "(-0.5)");
    }

    #[test]
    fn prints_and_parses_a_lagrangian() {
        let a = 0.7;
        let text = "-0.5 * y_1^(2*a) - 1 * x_1^a * y_1^a - 0.5 * x_1^(2*a)";
        let p = parse_poly(text, Some(a)).unwrap();
        assert_eq!(p.len(), 3);
        let printed = p.to_text(Some(a));
        assert!(printed.contains("x_1^a * y_1^a"), "{printed}");
        assert_eq!(parse_poly(&printed, Some(a)).unwrap(), p);
    }

    #[test]
    fn parses_aliases_and_bare_factors() {
        let p = parse_poly("K^0.5 * N + 2*I - x", None).unwrap();
        assert!(p.contains_var(VarId::X(0)));
        assert!(p.contains_var(VarId::X(1)));
        assert!(p.contains_var(VarId::X(2)));
        assert_eq!(parse_poly("0", None).unwrap(), FracPoly::zero());
        assert_eq!(parse_poly("3 * 2", None).unwrap(), FracPoly::constant(6.0));
        assert_eq!(parse_poly("1e-3 * t", None).unwrap(), FracPoly::monomial(1e-3, &[(VarId::Time, 1.0)]));
    }

    #[test]
    fn parse_errors_report_columns() {
        match parse_poly("1 * q_1", None) {
            Err(FracError::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_poly("x^a", None), Err(FracError::Parse { .. })));
        assert!(matches!(parse_poly("x +", None), Err(FracError::Parse { .. })));
        assert!(matches!(parse_poly("", None), Err(FracError::Parse { .. })));
        assert!(matches!(parse_poly("x )", None), Err(FracError::Parse { .. })));
    }

    proptest! {
        #[test]
        fn round_trip(coeffs in proptest::collection::vec((-5.0f64..5.0, 0i64..3, 0i64..4), 1..6), a in 0.05f64..0.95) {
            let terms = coeffs.iter().map(|&(c, m, k)| {
                FracMonomial::new(c, &[(VarId::X(0), m as f64 + k as f64 * a), (VarId::Y(1), k as f64 * a)])
            }).collect();
            let p = FracPoly::from_terms(terms);
            let back = parse_poly(&p.to_text(Some(a)), Some(a)).unwrap();
            prop_assert!(back.max_coeff_diff(&p) <= 1e-12 * (1.0 + p.max_abs_coeff()));
            prop_assert_eq!(back.len(), p.len());
        }
    }
}
