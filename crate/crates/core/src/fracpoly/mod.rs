//! Exact symbolic algebra over fractional polynomials: finite sums of
//! monomials `c * prod v^e` with real exponents, closed under Caputo partial
//! differentiation through the power rule
//! `D_v^a v^g = Gamma(1+g) / Gamma(1+g-a) * v^(g-a)`.

mod text;
mod var;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use text::{format_exponent, parse_poly};
pub use var::{VarId, VarRole};

use crate::error::{FracError, Result};
use crate::specfun::{gamma_fn, FracOrder};

/// Exponents closer than this are the same exponent.
pub const EXPONENT_TOL: f64 = 1e-10;

/// Assignment of values to variables.
pub type Point = BTreeMap<VarId, f64>;

fn cmp_exponent(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EXPONENT_TOL {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn is_integer(e: f64) -> bool {
    (e - e.round()).abs() <= EXPONENT_TOL
}

/// One term `coeff * prod v^e`. Powers are sorted by variable and never zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracMonomial {
    coeff: f64,
    powers: Vec<(VarId, f64)>,
}

impl FracMonomial {
    pub fn new(coeff: f64, powers: &[(VarId, f64)]) -> Self {
        let mut m = FracMonomial { coeff, powers: Vec::with_capacity(powers.len()) };
        for &(v, e) in powers {
            m.multiply_power(v, e);
        }
        m
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn powers(&self) -> &[(VarId, f64)] {
        &self.powers
    }

    /// Exponent of `v` (0 when absent).
    pub fn exponent(&self, v: VarId) -> f64 {
        self.powers.iter().find(|(w, _)| *w == v).map_or(0.0, |&(_, e)| e)
    }

    fn multiply_power(&mut self, v: VarId, e: f64) {
        match self.powers.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => {
                let sum = self.powers[i].1 + e;
                if sum.abs() <= EXPONENT_TOL {
                    self.powers.remove(i);
                } else {
                    self.powers[i].1 = sum;
                }
            }
            Err(i) => {
                if e.abs() > EXPONENT_TOL {
                    self.powers.insert(i, (v, e));
                }
            }
        }
    }

    fn without(&self, v: VarId) -> FracMonomial {
        FracMonomial { coeff: self.coeff, powers: self.powers.iter().copied().filter(|(w, _)| *w != v).collect() }
    }

    fn cmp_powers(&self, other: &FracMonomial) -> Ordering {
        for (a, b) in self.powers.iter().zip(&other.powers) {
            match a.0.cmp(&b.0).then_with(|| cmp_exponent(a.1, b.1)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.powers.len().cmp(&other.powers.len())
    }

    fn mul(&self, other: &FracMonomial) -> FracMonomial {
        let mut m = self.clone();
        m.coeff *= other.coeff;
        for &(v, e) in &other.powers {
            m.multiply_power(v, e);
        }
        m
    }

    pub fn eval(&self, point: &Point) -> Result<f64> {
        let mut value = self.coeff;
        for &(v, e) in &self.powers {
            let base = *point.get(&v).ok_or_else(|| FracError::MissingVariable(v.name()))?;
            value *= power(v, base, e)?;
        }
        Ok(value)
    }
}

fn power(v: VarId, base: f64, e: f64) -> Result<f64> {
    if is_integer(e) {
        let k = e.round() as i32;
        if base == 0.0 && k < 0 {
            return Err(FracError::SingularAtOrigin { var: v.name(), exponent: e });
        }
        return Ok(base.powi(k));
    }
    if base < 0.0 {
        return Err(FracError::NegativeBase { var: v.name(), base, exponent: e });
    }
    if base == 0.0 && e < 0.0 {
        return Err(FracError::SingularAtOrigin { var: v.name(), exponent: e });
    }
    Ok(base.powf(e))
}

/// `Gamma(1+g) / Gamma(1+g-a)`, the power-rule factor.
pub fn power_rule_factor(var: VarId, exponent: f64, order: FracOrder) -> Result<f64> {
    let den_arg = 1.0 + exponent - order.value();
    if den_arg <= 0.0 && is_integer(den_arg) {
        return Err(FracError::PowerRulePole { var: var.name(), exponent });
    }
    let num = gamma_fn(1.0 + exponent)?;
    let den = gamma_fn(den_arg).map_err(|_| FracError::PowerRulePole { var: var.name(), exponent })?;
    Ok(num / den)
}

/// A fractional polynomial in canonical form: terms sorted by exponent map,
/// no two terms with the same exponent map, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FracPoly {
    terms: Vec<FracMonomial>,
}

impl FracPoly {
    pub fn zero() -> Self {
        FracPoly { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![FracMonomial::new(c, &[])])
    }

    pub fn var(v: VarId) -> Self {
        Self::monomial(1.0, &[(v, 1.0)])
    }

    pub fn monomial(c: f64, powers: &[(VarId, f64)]) -> Self {
        Self::from_terms(vec![FracMonomial::new(c, powers)])
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms(mut terms: Vec<FracMonomial>) -> Self {
        terms.sort_by(|a, b| a.cmp_powers(b));
        let mut merged: Vec<FracMonomial> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.cmp_powers(&t) == Ordering::Equal => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        FracPoly { terms: merged }
    }

    pub fn terms(&self) -> &[FracMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.iter().flat_map(|t| t.powers.iter().map(|&(v, _)| v)).collect()
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.iter().any(|t| t.exponent(v) != 0.0)
    }

    /// The value of a variable-free polynomial.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [t] if t.powers.is_empty() => Some(t.coeff),
            _ => None,
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> FracPoly {
        if c == 0.0 {
            return FracPoly::zero();
        }
        FracPoly { terms: self.terms.iter().map(|t| FracMonomial { coeff: t.coeff * c, ..t.clone() }).collect() }
    }

    pub fn add(&self, other: &FracPoly) -> FracPoly {
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn sub(&self, other: &FracPoly) -> FracPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &FracPoly) -> FracPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        Self::from_terms(terms)
    }

    /// Multiplies by `v^e`.
    pub fn mul_var_power(&self, v: VarId, e: f64) -> FracPoly {
        self.mul(&FracPoly::monomial(1.0, &[(v, e)]))
    }

    pub fn pow_int(&self, n: u32) -> FracPoly {
        let mut acc = FracPoly::constant(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Raises a single-term polynomial to a real power.
    pub fn pow_monomial(&self, e: f64) -> Result<FracPoly> {
        match self.terms.as_slice() {
            [t] => {
                if t.coeff < 0.0 && !is_integer(e) {
                    return Err(FracError::Unsupported(format!("negative coefficient to power {e}")));
                }
                let coeff = if is_integer(e) { t.coeff.powi(e.round() as i32) } else { t.coeff.powf(e) };
                let powers: Vec<(VarId, f64)> = t.powers.iter().map(|&(v, p)| (v, p * e)).collect();
                Ok(FracPoly::monomial(coeff, &powers))
            }
            [] if e > 0.0 => Ok(FracPoly::zero()),
            _ => Err(FracError::Unsupported("real power of a multi-term polynomial".into())),
        }
    }

    /// Divides by a single-term polynomial (negative exponents allowed).
    pub fn div_monomial(&self, divisor: &FracPoly) -> Result<FracPoly> {
        match divisor.terms.as_slice() {
            [d] => {
                let inv = FracMonomial {
                    coeff: 1.0 / d.coeff,
                    powers: d.powers.iter().map(|&(v, e)| (v, -e)).collect(),
                };
                Ok(Self::from_terms(self.terms.iter().map(|t| t.mul(&inv)).collect()))
            }
            _ => Err(FracError::Unsupported("division by a non-monomial".into())),
        }
    }

    /// Collects the polynomial multiplying `v^e`, with `v` removed.
    pub fn coefficient_of(&self, v: VarId, e: f64) -> FracPoly {
        Self::from_terms(
            self.terms.iter().filter(|t| cmp_exponent(t.exponent(v), e) == Ordering::Equal).map(|t| t.without(v)).collect(),
        )
    }

    /// Terms that do not contain `v`.
    pub fn free_of(&self, v: VarId) -> FracPoly {
        self.coefficient_of(v, 0.0)
    }

    /// Replaces every `v^e` by `base^(e/beta)`; each ratio `e/beta` must be a
    /// nonnegative integer.
    pub fn substitute_power(&self, v: VarId, base: &FracPoly, beta: f64) -> Result<FracPoly> {
        let mut acc = FracPoly::zero();
        let mut cache: BTreeMap<u32, FracPoly> = BTreeMap::new();
        for t in &self.terms {
            let e = t.exponent(v);
            let ratio = e / beta;
            if !is_integer(ratio) || ratio < -EXPONENT_TOL {
                return Err(FracError::Unsupported(format!(
                    "{v}^{e} is not a nonnegative integer power of {v}^{beta}"
                )));
            }
            let k = ratio.round() as u32;
            let p = cache.entry(k).or_insert_with(|| base.pow_int(k)).clone();
            acc = acc.add(&FracPoly::from_terms(vec![t.without(v)]).mul(&p));
        }
        Ok(acc)
    }

    /// Substitutes numeric values for some variables, leaving the rest symbolic.
    pub fn partial_eval(&self, values: &Point) -> Result<FracPoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut m = FracMonomial { coeff: t.coeff, powers: Vec::new() };
            for &(v, e) in &t.powers {
                match values.get(&v) {
                    Some(&b) => m.coeff *= power(v, b, e)?,
                    None => m.powers.push((v, e)),
                }
            }
            terms.push(m);
        }
        Ok(Self::from_terms(terms))
    }

    pub fn eval(&self, point: &Point) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.eval(point)?;
        }
        Ok(acc)
    }

    /// Largest coefficient difference against `other`, matching terms by
    /// exponent map.
    pub fn max_coeff_diff(&self, other: &FracPoly) -> f64 {
        self.sub(other).max_abs_coeff()
    }

    /// Caputo fractional partial derivative in `v` of the given order, applied
    /// termwise with the power rule. Terms free of `v` vanish.
    pub fn frac_partial(&self, v: VarId, order: FracOrder) -> Result<FracPoly> {
        let alpha = order.value();
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let e = t.exponent(v);
            if e == 0.0 {
                continue;
            }
            if e < 0.0 {
                return Err(FracError::NegativeExponent { var: v.name(), exponent: e });
            }
            let factor = power_rule_factor(v, e, order)?;
            let mut m = t.clone();
            m.coeff *= factor;
            m.multiply_power(v, -alpha);
            out.push(m);
        }
        Ok(Self::from_terms(out))
    }

    /// JSON table of terms: `[{"coeff": c, "powers": {"x_1": e, ...}}, ...]`.
    pub fn term_table(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let powers: serde_json::Map<String, serde_json::Value> =
                    t.powers.iter().map(|&(v, e)| (v.name(), serde_json::json!(e))).collect();
                serde_json::json!({ "coeff": t.coeff, "powers": powers })
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    /// Text form with exponents written on the `m + k*a` lattice when `alpha`
    /// is given.
    pub fn to_text(&self, alpha: Option<f64>) -> String {
        text::format_poly(self, alpha)
    }
}

impl fmt::Display for FracPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_poly(self, None))
    }
}

impl Add for &FracPoly {
    type Output = FracPoly;
    fn add(self, rhs: &FracPoly) -> FracPoly {
        FracPoly::add(self, rhs)
    }
}

impl Sub for &FracPoly {
    type Output = FracPoly;
    fn sub(self, rhs: &FracPoly) -> FracPoly {
        FracPoly::sub(self, rhs)
    }
}

impl Mul for &FracPoly {
    type Output = FracPoly;
    fn mul(self, rhs: &FracPoly) -> FracPoly {
        FracPoly::mul(self, rhs)
    }
}

impl Mul<&FracPoly> for f64 {
    type Output = FracPoly;
    fn mul(self, rhs: &FracPoly) -> FracPoly {
        rhs.scale(self)
    }
}

impl Neg for &FracPoly {
    type Output = FracPoly;
    fn neg(self) -> FracPoly {
        self.scale(-1.0)
    }
}

/// Free-function form of [`FracPoly::frac_partial`].
pub fn frac_partial(p: &FracPoly, v: VarId, order: FracOrder) -> Result<FracPoly> {
    p.frac_partial(v, order)
}

/// Fractional time derivative `D_t^a` of a jet-bundle polynomial.
///
/// Explicit `t` powers follow the power rule. A term carrying the discount
/// symbol `E = E_a(-rho t^a)` to the first power (and no explicit `t`) maps to
/// `-rho` times itself, which requires `rho`.
pub fn time_partial(p: &FracPoly, order: FracOrder, rho: Option<f64>) -> Result<FracPoly> {
    let mut out = FracPoly::zero();
    for t in p.terms() {
        let e_t = t.exponent(VarId::Time);
        let e_d = t.exponent(VarId::Discount);
        let single = FracPoly::from_terms(vec![t.clone()]);
        match (e_t != 0.0, e_d != 0.0) {
            (false, false) => {}
            (true, false) => out = out.add(&single.frac_partial(VarId::Time, order)?),
            (false, true) => {
                let rho = rho.ok_or_else(|| {
                    FracError::Unsupported("time derivative of the discount symbol needs rho".into())
                })?;
                if cmp_exponent(e_d, 1.0) != Ordering::Equal {
                    return Err(FracError::Unsupported(format!("time derivative of E^{e_d}")));
                }
                out = out.add(&single.scale(-rho));
            }
            (true, true) => {
                return Err(FracError::Unsupported("time derivative of a product of t and E".into()));
            }
        }
    }
    Ok(out)
}

/// `d_t^a P = D_t^a P + sum_i y_i D_{x_i}^a P`.
pub fn dt_alpha_total(p: &FracPoly, n: usize, order: FracOrder) -> Result<FracPoly> {
    dt_alpha_total_discounted(p, n, order, None)
}

pub fn dt_alpha_total_discounted(p: &FracPoly, n: usize, order: FracOrder, rho: Option<f64>) -> Result<FracPoly> {
    let mut acc = time_partial(p, order, rho)?;
    for i in 0..n {
        let dx = p.frac_partial(VarId::X(i), order)?;
        acc = acc.add(&dx.mul_var_power(VarId::Y(i), 1.0));
    }
    Ok(acc)
}

/// `d_t^(2a) P = D_t^a P + sum_i y_i D_{x_i}^a P + sum_i y2_i D_{y_i}^a P`.
pub fn dt_2alpha_total(p: &FracPoly, n: usize, order: FracOrder) -> Result<FracPoly> {
    dt_2alpha_total_discounted(p, n, order, None)
}

pub fn dt_2alpha_total_discounted(p: &FracPoly, n: usize, order: FracOrder, rho: Option<f64>) -> Result<FracPoly> {
    let mut acc = dt_alpha_total_discounted(p, n, order, rho)?;
    for i in 0..n {
        let dy = p.frac_partial(VarId::Y(i), order)?;
        acc = acc.add(&dy.mul_var_power(VarId::Y2(i), 1.0));
    }
    Ok(acc)
}

/// Rebuilds a polynomial in `t` from its fractional Taylor coefficients,
/// `P(t) = sum_{a=0}^{k_max} t^(a alpha) / Gamma(1 + a alpha) * (D_t^(a alpha) P)(0)`,
/// where `D_t^(a alpha)` is the `a`-fold application of `D_t^alpha`.
pub fn taylor_reconstruct(p: &FracPoly, order: FracOrder, k_max: usize) -> Result<FracPoly> {
    let alpha = order.value();
    for t in p.terms() {
        if let Some(&(v, _)) = t.powers().iter().find(|(v, _)| *v != VarId::Time) {
            return Err(FracError::Unsupported(format!("taylor_reconstruct expects a polynomial in t only, found {v}")));
        }
        let e = t.exponent(VarId::Time);
        let k = e / alpha;
        if !is_integer(k) || k < -EXPONENT_TOL || k.round() as usize > k_max {
            return Err(FracError::NotOnLattice { var: "t".into(), exponent: e, k_max });
        }
    }
    let origin: Point = [(VarId::Time, 0.0)].into_iter().collect();
    let mut derivative = p.clone();
    let mut out = FracPoly::zero();
    for a in 0..=k_max {
        if a > 0 {
            derivative = derivative.frac_partial(VarId::Time, order)?;
        }
        if derivative.is_zero() {
            break;
        }
        let at_zero = derivative.eval(&origin)?;
        if at_zero != 0.0 {
            let lattice = alpha * a as f64;
            let norm = gamma_fn(1.0 + lattice)?;
            out = out.add(&FracPoly::monomial(at_zero / norm, &[(VarId::Time, lattice)]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half() -> FracOrder {
        FracOrder::new(0.5).unwrap()
    }

    fn x() -> VarId {
        VarId::X(0)
    }

    fn y() -> VarId {
        VarId::Y(0)
    }

    #[test]
    fn algebra_basics() {
        let a = 0.3;
        let p = FracPoly::monomial(2.0, &[(x(), a), (y(), 1.0)]).add(&FracPoly::constant(1.5));
        assert!(p.add(&p.scale(-1.0)).is_zero());
        let xa = FracPoly::monomial(1.0, &[(x(), a)]);
        assert_eq!(xa.mul(&xa), FracPoly::monomial(1.0, &[(x(), 2.0 * a)]));
        assert_eq!(xa.add(&xa), FracPoly::monomial(2.0, &[(x(), a)]));
        assert_eq!(xa.mul_var_power(x(), -a), FracPoly::constant(1.0));
    }

    #[test]
    fn lattice_exponents_merge() {
        // y^(2a) at a = 0.5 is y^1
        let a = 0.5;
        let p = FracPoly::monomial(1.0, &[(y(), 2.0 * a)]).add(&FracPoly::monomial(1.0, &[(y(), 1.0)]));
        assert_eq!(p.len(), 1);
        assert_eq!(p.terms()[0].coeff(), 2.0);
    }

    #[test]
    fn frac_partial_examples() {
        let a = half();
        assert!(FracPoly::constant(7.0).frac_partial(x(), a).unwrap().is_zero());
        let d = FracPoly::var(x()).frac_partial(x(), a).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.terms()[0].coeff() - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        assert!((d.terms()[0].exponent(x()) - 0.5).abs() < 1e-15);

        let y2a = FracPoly::monomial(1.0, &[(y(), 1.0)]);
        let once = y2a.frac_partial(y(), a).unwrap();
        assert!((once.terms()[0].coeff() - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        let twice = once.frac_partial(y(), a).unwrap();
        assert!((twice.as_constant().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frac_partial_errors_and_singular_terms() {
        let a = half();
        let neg = FracPoly::monomial(1.0, &[(x(), -0.5)]);
        assert!(matches!(neg.frac_partial(x(), a), Err(FracError::NegativeExponent { .. })));
        // x^0.3 -> x^-0.2: allowed, singular at the origin
        let p = FracPoly::monomial(1.0, &[(x(), 0.3)]);
        let d = p.frac_partial(x(), a).unwrap();
        let at = |v: f64| -> Point { [(x(), v)].into_iter().collect() };
        assert!(d.eval(&at(2.0)).is_ok());
        assert!(matches!(d.eval(&at(0.0)), Err(FracError::SingularAtOrigin { .. })));
    }

    #[test]
    fn eval_examples_and_errors() {
        let at: Point = [(x(), 4.0)].into_iter().collect();
        assert_eq!(FracPoly::monomial(1.0, &[(x(), 0.5)]).eval(&at).unwrap(), 2.0);
        assert_eq!(FracPoly::zero().eval(&Point::new()).unwrap(), 0.0);
        let neg: Point = [(x(), -4.0)].into_iter().collect();
        assert!(matches!(FracPoly::monomial(1.0, &[(x(), 0.5)]).eval(&neg), Err(FracError::NegativeBase { .. })));
        assert_eq!(FracPoly::monomial(1.0, &[(x(), 2.0)]).eval(&neg).unwrap(), 16.0);
        assert!(matches!(FracPoly::var(y()).eval(&at), Err(FracError::MissingVariable(_))));

        // -a1 y^(2a) - a2 y^a x^a - a3 x^(2a) at a=0.5, (0.5, 1, 0.5), x=y=1
        let a = 0.5;
        let l = FracPoly::from_terms(vec![
            FracMonomial::new(-0.5, &[(y(), 2.0 * a)]),
            FracMonomial::new(-1.0, &[(y(), a), (x(), a)]),
            FracMonomial::new(-0.5, &[(x(), 2.0 * a)]),
        ]);
        let pt: Point = [(x(), 1.0), (y(), 1.0)].into_iter().collect();
        assert_eq!(l.eval(&pt).unwrap(), -2.0);
    }

    #[test]
    fn total_derivatives() {
        let a = FracOrder::new(0.4).unwrap();
        let g = a.gamma_factor();
        let xa = FracPoly::monomial(1.0, &[(x(), 0.4)]);
        let d = dt_alpha_total(&xa, 1, a).unwrap();
        assert!(d.max_coeff_diff(&FracPoly::monomial(g, &[(y(), 1.0)])) < 1e-15);
        assert!(dt_alpha_total(&FracPoly::constant(3.0), 1, a).unwrap().is_zero());
        let ta = FracPoly::monomial(1.0, &[(VarId::Time, 0.4)]);
        assert!((dt_alpha_total(&ta, 1, a).unwrap().as_constant().unwrap() - g).abs() < 1e-15);

        let ya = FracPoly::monomial(1.0, &[(y(), 0.4)]);
        let d2 = dt_2alpha_total(&ya, 1, a).unwrap();
        assert!(d2.max_coeff_diff(&FracPoly::monomial(g, &[(VarId::Y2(0), 1.0)])) < 1e-15);
        assert!(dt_2alpha_total(&FracPoly::constant(1.0), 1, a).unwrap().is_zero());
        let d3 = dt_2alpha_total(&xa, 1, a).unwrap();
        assert!(d3.max_coeff_diff(&FracPoly::monomial(g, &[(y(), 1.0)])) < 1e-15);
    }

    #[test]
    fn discount_symbol_time_derivative() {
        let a = half();
        let p = FracPoly::monomial(2.0, &[(VarId::Discount, 1.0), (x(), 1.0)]);
        let d = time_partial(&p, a, Some(0.3)).unwrap();
        assert!(d.max_coeff_diff(&p.scale(-0.3)) < 1e-16);
        assert!(time_partial(&p, a, None).is_err());
        let bad = FracPoly::monomial(1.0, &[(VarId::Discount, 1.0), (VarId::Time, 1.0)]);
        assert!(time_partial(&bad, a, Some(0.3)).is_err());
    }

    #[test]
    fn taylor_examples() {
        let a = half();
        let t = VarId::Time;
        let p = FracPoly::constant(3.0).add(&FracPoly::monomial(2.0, &[(t, 0.5)]));
        assert!(taylor_reconstruct(&p, a, 2).unwrap().max_coeff_diff(&p) <= 1e-14);
        assert!(taylor_reconstruct(&FracPoly::zero(), a, 2).unwrap().is_zero());
        let t2a = FracPoly::monomial(1.0, &[(t, 1.0)]);
        assert!(taylor_reconstruct(&t2a, a, 2).unwrap().max_coeff_diff(&t2a) <= 1e-15);
        let off = FracPoly::monomial(1.0, &[(t, 0.7)]);
        assert!(matches!(taylor_reconstruct(&off, a, 3), Err(FracError::NotOnLattice { .. })));
        let high = FracPoly::monomial(1.0, &[(t, 2.0)]);
        assert!(matches!(taylor_reconstruct(&high, a, 3), Err(FracError::NotOnLattice { .. })));
    }

    #[test]
    fn substitution_and_division() {
        // y := (p - 2x)^2 substituted into y^1 and y^0.5 with beta = 0.5
        let base = FracPoly::var(VarId::P(0)).sub(&FracPoly::monomial(2.0, &[(x(), 1.0)]));
        let q = FracPoly::monomial(1.0, &[(y(), 1.0)]).add(&FracPoly::monomial(3.0, &[(y(), 0.5), (x(), 1.0)]));
        let s = q.substitute_power(y(), &base, 0.5).unwrap();
        let expected = base.pow_int(2).add(&base.mul(&FracPoly::monomial(3.0, &[(x(), 1.0)])));
        assert!(s.max_coeff_diff(&expected) < 1e-14);
        assert!(q.substitute_power(y(), &base, 0.3).is_err());

        let e = FracPoly::monomial(-2.0, &[(VarId::Discount, 1.0)]);
        let r = FracPoly::var(VarId::P(0)).div_monomial(&e).unwrap();
        assert_eq!(r, FracPoly::monomial(-0.5, &[(VarId::P(0), 1.0), (VarId::Discount, -1.0)]));
    }

    #[test]
    fn coefficient_extraction() {
        let p = FracPoly::from_terms(vec![
            FracMonomial::new(2.0, &[(VarId::Y2(0), 1.0), (x(), 0.5)]),
            FracMonomial::new(-1.0, &[(VarId::Y2(0), 1.0)]),
            FracMonomial::new(4.0, &[(y(), 1.0)]),
        ]);
        let c = p.coefficient_of(VarId::Y2(0), 1.0);
        assert_eq!(c, FracPoly::from_terms(vec![FracMonomial::new(2.0, &[(x(), 0.5)]), FracMonomial::new(-1.0, &[])]));
        assert_eq!(p.free_of(VarId::Y2(0)), FracPoly::monomial(4.0, &[(y(), 1.0)]));
    }

    fn arb_poly() -> impl Strategy<Value = FracPoly> {
        let term = (-3.0f64..3.0, 0usize..4, 0usize..4, 0usize..3).prop_map(|(c, kx, ky, m)| {
            FracMonomial::new(c, &[(VarId::X(0), kx as f64 * 0.35 + m as f64), (VarId::Y(0), ky as f64 * 0.35)])
        });
        proptest::collection::vec(term, 0..6).prop_map(FracPoly::from_terms)
    }

    proptest! {
        #[test]
        fn frac_partial_is_linear(p in arb_poly(), q in arb_poly(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let order = FracOrder::new(0.35).unwrap();
            for v in [VarId::X(0), VarId::Y(0)] {
                let lhs = p.scale(a).add(&q.scale(b)).frac_partial(v, order).unwrap();
                let rhs = p.frac_partial(v, order).unwrap().scale(a).add(&q.frac_partial(v, order).unwrap().scale(b));
                prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12 * (1.0 + lhs.max_abs_coeff()));
            }
        }

        #[test]
        fn constants_differentiate_to_zero(c in -10.0f64..10.0, a in 0.01f64..0.99) {
            let order = FracOrder::new(a).unwrap();
            prop_assert!(FracPoly::constant(c).frac_partial(VarId::Time, order).unwrap().is_zero());
        }

        #[test]
        fn mixed_partials_commute(p in arb_poly()) {
            let order = FracOrder::new(0.35).unwrap();
            let xy = p.frac_partial(VarId::X(0), order).unwrap().frac_partial(VarId::Y(0), order).unwrap();
            let yx = p.frac_partial(VarId::Y(0), order).unwrap().frac_partial(VarId::X(0), order).unwrap();
            prop_assert!(xy.max_coeff_diff(&yx) <= 1e-13 * (1.0 + xy.max_abs_coeff()));
        }

        #[test]
        fn canonical_form_is_order_independent(p in arb_poly()) {
            let mut rev = p.terms().to_vec();
            rev.reverse();
            prop_assert_eq!(FracPoly::from_terms(rev), p);
        }
    }
}
