//! Fractional Euler-Lagrange systems (free, discounted, constrained), the
//! vector field of a regular Lagrangian, the Legendre transform and
//! fractional Poisson brackets, all as exact polynomial manipulations.
//!
//! Variables: `y_i` is the velocity coordinate `D_t^a x_i / Gamma(1+a)` and
//! `y2_i` the second one, normalised so that `y2_i = D_t^a D_t^a x_i /
//! Gamma(1+a)^2` (both reduce to the ordinary derivatives at `a = 1`).

mod hamilton;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use hamilton::{
    legendre, legendre_on, poisson_bracket, verify_hamilton, Hamiltonian, HamiltonianSpec, ResidualReport, ResidualStat,
};

use crate::error::{FracError, Result};
use crate::fdesolve::RhsSpec;
use crate::fracpoly::{dt_alpha_total, dt_alpha_total_discounted, dt_2alpha_total, FracPoly, Point, VarId};
use crate::specfun::{ml_discount, FracOrder};

/// A Lagrangian `L(t, x, y)`, or `L_1(x, y) * E_a(-rho t^a)` when a discount
/// rate is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianSpec {
    pub base: FracPoly,
    pub rho: Option<f64>,
    pub n: usize,
    pub order: FracOrder,
}

impl LagrangianSpec {
    pub fn new(base: FracPoly, n: usize, order: FracOrder) -> Result<Self> {
        Self::build(base, None, n, order)
    }

    pub fn discounted(base: FracPoly, rho: f64, n: usize, order: FracOrder) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(FracError::InvalidSetup(format!("discount rate {rho} must be finite and nonnegative")));
        }
        Self::build(base, Some(rho), n, order)
    }

    fn build(base: FracPoly, rho: Option<f64>, n: usize, order: FracOrder) -> Result<Self> {
        if n == 0 {
            return Err(FracError::InvalidSetup("a Lagrangian needs at least one coordinate".into()));
        }
        check_vars(&base, n, &[VarId::Time], true)?;
        if rho.is_some() && base.contains_var(VarId::Time) {
            return Err(FracError::TimeDependentBase);
        }
        Ok(LagrangianSpec { base, rho, n, order })
    }

    /// `L_1 * E` with the discount symbol, or the base when undiscounted.
    pub fn full(&self) -> FracPoly {
        match self.rho {
            Some(_) => self.base.mul_var_power(VarId::Discount, 1.0),
            None => self.base.clone(),
        }
    }
}

/// Accepts `x_i`, `y_i` for `i < n`, plus the listed extra variables.
fn check_vars(p: &FracPoly, n: usize, extra: &[VarId], allow_y: bool) -> Result<()> {
    for v in p.vars() {
        let ok = match v {
            VarId::X(i) => i < n,
            VarId::Y(i) => allow_y && i < n,
            other => extra.contains(&other),
        };
        if !ok {
            return Err(FracError::InvalidSetup(format!("variable {v} is not allowed here")));
        }
    }
    Ok(())
}

/// Euler-Lagrange residuals `R_i(t, x, y, y2[, lambda, dlambda]) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ELSystem {
    pub residuals: Vec<FracPoly>,
    pub order: FracOrder,
    pub discounted: bool,
    pub constrained: bool,
}

impl ELSystem {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    /// Polynomial multiplying `y2_j` in residual `i`.
    pub fn y2_coefficient(&self, i: usize, j: usize) -> FracPoly {
        self.residuals[i].coefficient_of(VarId::Y2(j), 1.0)
    }

    pub fn to_text(&self) -> String {
        let a = Some(self.order.value());
        self.residuals.iter().map(|r| format!("{} = 0\n", r.to_text(a))).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha": self.order.value(),
            "discounted": self.discounted,
            "constrained": self.constrained,
            "equations": self.residuals.iter().map(|r| serde_json::json!({
                "text": r.to_text(Some(self.order.value())),
                "terms": r.term_table(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn d(p: &FracPoly, v: VarId, order: FracOrder) -> Result<FracPoly> {
    p.frac_partial(v, order)
}

/// `D_{x_i} L - d_t^(2a)(D_{y_i} L)` for an undiscounted Lagrangian.
pub fn derive_el(l: &LagrangianSpec) -> Result<ELSystem> {
    if l.rho.is_some() {
        return Err(FracError::InvalidSetup("discounted Lagrangian: use derive_el_discounted".into()));
    }
    let a = l.order;
    let residuals = (0..l.n)
        .map(|i| {
            let dy = d(&l.base, VarId::Y(i), a)?;
            Ok(d(&l.base, VarId::X(i), a)?.sub(&dt_2alpha_total(&dy, l.n, a)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ELSystem { residuals, order: a, discounted: false, constrained: false })
}

/// Discounted system with the discount factor cancelled:
/// `y2_j D_{y_i}D_{y_j} L_1 + y_j D_{x_j}D_{y_i} L_1 - rho D_{y_i} L_1 - D_{x_i} L_1`.
pub fn derive_el_discounted(l: &LagrangianSpec) -> Result<ELSystem> {
    let rho = l.rho.ok_or_else(|| FracError::InvalidSetup("derive_el_discounted needs a discount rate".into()))?;
    let a = l.order;
    let residuals = (0..l.n)
        .map(|i| {
            let dyi = d(&l.base, VarId::Y(i), a)?;
            let mut r = dyi.scale(-rho).sub(&d(&l.base, VarId::X(i), a)?);
            for j in 0..l.n {
                r = r.add(&d(&dyi, VarId::Y(j), a)?.mul_var_power(VarId::Y2(j), 1.0));
                r = r.add(&d(&dyi, VarId::X(j), a)?.mul_var_power(VarId::Y(j), 1.0));
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ELSystem { residuals, order: a, discounted: true, constrained: false })
}

/// Euler-Lagrange system of `L + lambda F` for a constraint `F(x, y) = 0`.
///
/// Residual `i` is
/// `D_{x_i} L + lambda D_{x_i} F - d_t^(2a)(D_{y_i} L)
///  - lambda y_j D_{x_j} D_{y_i} F - lambda y2_j D_{y_j} D_{y_i} F - dlambda D_{y_i} F`
/// where `dlambda` stands for `D_t^a lambda`. With a discount rate the
/// Lagrangian part is `E (D_{x_i} L_1 + rho D_{y_i} L_1 - y_j D_{x_j}D_{y_i} L_1
/// - y2_j D_{y_j}D_{y_i} L_1)` with `E = E_a(-rho t^a)` kept as a symbol.
pub fn derive_constrained_el(l: &LagrangianSpec, f: &FracPoly) -> Result<ELSystem> {
    check_vars(f, l.n, &[], true)?;
    let a = l.order;
    let lagrangian_part = match l.rho {
        Some(_) => derive_el_discounted(l)?
            .residuals
            .into_iter()
            .map(|r| r.scale(-1.0).mul_var_power(VarId::Discount, 1.0))
            .collect(),
        None => derive_el(l)?.residuals,
    };
    let lambda = FracPoly::var(VarId::Lambda);
    let dlambda = FracPoly::var(VarId::DLambda);
    let residuals = lagrangian_part
        .into_iter()
        .enumerate()
        .map(|(i, base)| {
            let dyf = d(f, VarId::Y(i), a)?;
            let mut c = d(f, VarId::X(i), a)?;
            for j in 0..l.n {
                c = c.sub(&d(&dyf, VarId::X(j), a)?.mul_var_power(VarId::Y(j), 1.0));
                c = c.sub(&d(&dyf, VarId::Y(j), a)?.mul_var_power(VarId::Y2(j), 1.0));
            }
            Ok(base.add(&lambda.mul(&c)).sub(&dlambda.mul(&dyf)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ELSystem { residuals, order: a, discounted: l.rho.is_some(), constrained: true })
}

/// Inserts the discount value `E_a(-rho t^a)` into a point that has `t`.
pub fn with_discount(point: &Point, order: FracOrder, rho: Option<f64>) -> Result<Point> {
    let mut pt = point.clone();
    if let Some(rho) = rho {
        let t = *point.get(&VarId::Time).ok_or_else(|| FracError::MissingVariable("t".into()))?;
        pt.insert(VarId::Discount, ml_discount(order, rho, t)?);
    }
    Ok(pt)
}

/// Coefficients of the vector field of a regular Lagrangian:
/// `g_ij = D_{y_i} D_{y_j} L` and the force terms
/// `f_k = D_{x_k} L - d_t^a(D_{y_k} L)` (plus `rho D_{y_k} L_1` when
/// discounted), so that `M = g^{-1} f`. The discount factor cancels, so
/// everything is expressed through `L_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FVFCoeffs {
    pub g: Vec<Vec<FracPoly>>,
    pub force: Vec<FracPoly>,
    pub order: FracOrder,
    pub rho: Option<f64>,
}

/// Relative determinant threshold below which `g` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-13;

impl FVFCoeffs {
    pub fn n(&self) -> usize {
        self.force.len()
    }

    pub fn g_at(&self, point: &Point) -> Result<DMatrix<f64>> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.g[i][j].eval(point)?;
            }
        }
        Ok(m)
    }

    /// `M(point) = g^{-1} f`, i.e. the value of `y2` on the vector field.
    pub fn m_at(&self, point: &Point) -> Result<DVector<f64>> {
        let g = self.g_at(point)?;
        let f = DVector::from_iterator(self.n(), self.force.iter().map(|p| p.eval(point)).collect::<Result<Vec<_>>>()?);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lu = g.lu();
        let det = lu.determinant();
        if scale == 0.0 || !det.is_finite() || det.abs() <= SINGULAR_TOL * scale.powi(self.n() as i32) {
            return Err(FracError::SingularHessian(format_point(point)));
        }
        lu.solve(&f).ok_or_else(|| FracError::SingularHessian(format_point(point)))
    }

    /// Right-hand side for [`crate::fdesolve::solve_fvf`]:
    /// `F(t, x, v) = Gamma(1+a)^2 M(t, x, v / Gamma(1+a))`.
    pub fn rhs(&self) -> RhsSpec {
        let coeffs = self.clone();
        let n = self.n();
        let g = self.order.gamma_factor();
        RhsSpec::func(n, move |t, s| {
            let mut pt = Point::new();
            pt.insert(VarId::Time, t);
            for i in 0..n {
                pt.insert(VarId::X(i), s[i]);
                pt.insert(VarId::Y(i), s[n + i] / g);
            }
            let m = coeffs.m_at(&pt)?;
            Ok(m.iter().map(|v| g * g * v).collect())
        })
    }
}

pub(crate) fn format_point(point: &Point) -> String {
    let parts: Vec<String> = point.iter().map(|(v, x)| format!("{v}={x}")).collect();
    format!("({})", parts.join(", "))
}

pub fn build_fvf(l: &LagrangianSpec) -> Result<FVFCoeffs> {
    let a = l.order;
    let n = l.n;
    let mut g = vec![vec![FracPoly::zero(); n]; n];
    let mut force = Vec::with_capacity(n);
    for i in 0..n {
        let dyi = d(&l.base, VarId::Y(i), a)?;
        for (j, gij) in g[i].iter_mut().enumerate() {
            *gij = d(&dyi, VarId::Y(j), a)?;
        }
        let mut f = d(&l.base, VarId::X(i), a)?.sub(&dt_alpha_total(&dyi, n, a)?);
        if let Some(rho) = l.rho {
            f = f.add(&dyi.scale(rho));
        }
        force.push(f);
    }
    Ok(FVFCoeffs { g, force, order: a, rho: l.rho })
}

/// General residual `D_{x_i} L - d_t^(2a)(D_{y_i} L)` of the full Lagrangian,
/// with the discount symbol differentiated through its eigenfunction
/// relation. For a discounted Lagrangian this equals `-E` times the
/// residual of [`derive_el_discounted`].
pub fn derive_el_full(l: &LagrangianSpec) -> Result<ELSystem> {
    let a = l.order;
    let full = l.full();
    let residuals = (0..l.n)
        .map(|i| {
            let dy = d(&full, VarId::Y(i), a)?;
            let mut total = dt_alpha_total_discounted(&dy, l.n, a, l.rho)?;
            for j in 0..l.n {
                total = total.add(&d(&dy, VarId::Y(j), a)?.mul_var_power(VarId::Y2(j), 1.0));
            }
            Ok(d(&full, VarId::X(i), a)?.sub(&total))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ELSystem { residuals, order: a, discounted: l.rho.is_some(), constrained: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracpoly::parse_poly;
    use crate::specfun::gamma_fn;

    fn ord(a: f64) -> FracOrder {
        FracOrder::new_or_classical(a).unwrap()
    }

    fn samuelson(a: f64, c: (f64, f64, f64)) -> FracPoly {
        parse_poly(&format!("-{} * y^(2*a) - {} * y^a * x^a - {} * x^(2*a)", c.0, c.1, c.2), Some(a)).unwrap()
    }

    #[test]
    fn potential_only_lagrangian() {
        let a = 0.6;
        let l = LagrangianSpec::new(parse_poly("-1 * x^(2*a)", Some(a)).unwrap(), 1, ord(a)).unwrap();
        let el = derive_el(&l).unwrap();
        let c = -gamma_fn(1.0 + 2.0 * a).unwrap() / gamma_fn(1.0 + a).unwrap();
        let expected = FracPoly::monomial(c, &[(VarId::X(0), a)]);
        assert!(el.residuals[0].max_coeff_diff(&expected) < 1e-14);
    }

    #[test]
    fn constant_lagrangian_gives_zero_system() {
        let l = LagrangianSpec::new(FracPoly::constant(3.0), 2, ord(0.5)).unwrap();
        assert!(derive_el(&l).unwrap().residuals.iter().all(FracPoly::is_zero));
        let l = LagrangianSpec::discounted(FracPoly::constant(3.0), 0.2, 1, ord(0.5)).unwrap();
        assert!(derive_el_discounted(&l).unwrap().residuals[0].is_zero());
    }

    #[test]
    fn discounted_rejects_time_dependence() {
        let p = parse_poly("t * x", None).unwrap();
        assert!(matches!(LagrangianSpec::discounted(p, 0.1, 1, ord(0.5)), Err(FracError::TimeDependentBase)));
        assert!(LagrangianSpec::new(parse_poly("x_2", None).unwrap(), 1, ord(0.5)).is_err());
    }

    #[test]
    fn y2_coefficients_are_minus_g() {
        let a = 0.7;
        let base = parse_poly("-1 * y_1^(2*a) - 0.5 * y_1^a * y_2^a * x_1^a - 2 * y_2^(3*a) - x_2^a * y_2^(2*a)", Some(a)).unwrap();
        let l = LagrangianSpec::new(base, 2, ord(a)).unwrap();
        let el = derive_el(&l).unwrap();
        let fvf = build_fvf(&l).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(el.y2_coefficient(i, j).add(&fvf.g[i][j]).max_abs_coeff() < 1e-13);
                assert!(fvf.g[i][j].max_coeff_diff(&fvf.g[j][i]) < 1e-13);
            }
        }
    }

    #[test]
    fn samuelson_g_is_constant() {
        for a in [0.3, 0.5, 0.8] {
            let l = LagrangianSpec::discounted(samuelson(a, (0.5, 1.0, 0.5)), 0.3, 1, ord(a)).unwrap();
            let fvf = build_fvf(&l).unwrap();
            let g = fvf.g[0][0].as_constant().unwrap();
            assert!((g + 0.5 * gamma_fn(1.0 + 2.0 * a).unwrap()).abs() < 1e-14);
        }
        let l = LagrangianSpec::new(samuelson(0.5, (0.0, 1.0, 0.5)), 1, ord(0.5)).unwrap();
        let fvf = build_fvf(&l).unwrap();
        let pt: Point = [(VarId::Time, 0.1), (VarId::X(0), 1.0), (VarId::Y(0), 1.0)].into_iter().collect();
        assert!(matches!(fvf.m_at(&pt), Err(FracError::SingularHessian(_))));
    }

    #[test]
    fn classical_fvf_of_quadratic_model() {
        let a = 0.35;
        let l = LagrangianSpec::new(parse_poly(&format!("-0.5 * y^2 - {a} * x * y - 0.5 * x^2"), None).unwrap(), 1, FracOrder::classical()).unwrap();
        let fvf = build_fvf(&l).unwrap();
        let pt: Point = [(VarId::Time, 0.0), (VarId::X(0), 1.7), (VarId::Y(0), -0.4)].into_iter().collect();
        assert!((fvf.m_at(&pt).unwrap()[0] - 1.7).abs() < 1e-14);
    }

    #[test]
    fn discounted_matches_full_residual() {
        for a in [0.4, 0.9] {
            let l = LagrangianSpec::discounted(samuelson(a, (2.0, 0.5, 0.1)), 0.3, 1, ord(a)).unwrap();
            let short = derive_el_discounted(&l).unwrap().residuals[0].mul_var_power(VarId::Discount, 1.0).scale(-1.0);
            let full = derive_el_full(&l).unwrap().residuals[0].clone();
            assert!(short.max_coeff_diff(&full) < 1e-13);
        }
    }

    #[test]
    fn constrained_reduces_to_free_system() {
        let a = 0.5;
        let l = LagrangianSpec::new(samuelson(a, (0.5, 1.0, 0.5)), 1, ord(a)).unwrap();
        let free = derive_el(&l).unwrap();
        let f = parse_poly("x^a * y^(2*a) + 3 * x^(3*a)", Some(a)).unwrap();
        let con = derive_constrained_el(&l, &f).unwrap();
        let zero: Point = [(VarId::Lambda, 0.0), (VarId::DLambda, 0.0)].into_iter().collect();
        let reduced = con.residuals[0].partial_eval(&zero).unwrap();
        assert!(reduced.max_coeff_diff(&free.residuals[0]) < 1e-14);

        // y-free constraint adds lambda D_x F only
        let g = parse_poly("x^(2*a)", Some(a)).unwrap();
        let con = derive_constrained_el(&l, &g).unwrap();
        let extra = FracPoly::var(VarId::Lambda).mul(&g.frac_partial(VarId::X(0), ord(a)).unwrap());
        assert!(con.residuals[0].max_coeff_diff(&free.residuals[0].add(&extra)) < 1e-14);
    }
}
