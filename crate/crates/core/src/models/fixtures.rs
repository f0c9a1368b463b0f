//! Ready-made investment specifications used by tests, the CLI and the
//! acceptance suite.

use crate::error::{FracError, Result};
use crate::fracpoly::{FracPoly, VarId};
use crate::specfun::{gamma_fn, FracOrder};

use super::InvestmentSpec;

/// Initial capital, investment and labour for the fixtures.
pub const INITIAL_STATE: (f64, f64, f64) = (1.0, 0.5, 1.0);

/// `h(e) = Gamma(1+e) / Gamma(1+e-a)`, the factor with
/// `x^a D_x^a x^e = h(e) x^e`.
pub fn power_factor(order: FracOrder, e: f64) -> Result<f64> {
    if order.is_classical() {
        return Ok(e);
    }
    Ok(gamma_fn(1.0 + e)? / gamma_fn(1.0 + e - order.value())?)
}

/// Exponent `e >= 0` with `h(e) = target`, by bisection (`h` is increasing).
pub fn exponent_for_factor(order: FracOrder, target: f64) -> Result<f64> {
    if order.is_classical() {
        return if target >= 0.0 { Ok(target) } else { Err(FracError::RootFinding(format!("factor {target} is negative"))) };
    }
    let h = |e| power_factor(order, e);
    let (mut lo, mut hi) = (0.0, 1.0);
    if h(lo)? > target {
        return Err(FracError::RootFinding(format!("factor {target} is below h(0)")));
    }
    while h(hi)? < target {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(FracError::RootFinding(format!("factor {target} out of reach")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? < target { lo = mid } else { hi = mid }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct Shape {
    e0: f64,
    cost: f64,
    acc: f64,
}

fn shape(order: FracOrder) -> Result<Shape> {
    let e0 = 0.75;
    let s = 2.0 * power_factor(order, e0)?;
    let cost = exponent_for_factor(order, s)?;
    let acc = exponent_for_factor(order, 1.0 / order.gamma_factor())?;
    Ok(Shape { e0, cost, acc })
}

fn build(order: FracOrder, rho: f64, k_exp: f64, sh: &Shape) -> Result<InvestmentSpec> {
    let (k, i, n) = (VarId::X(0), VarId::X(1), VarId::X(2));
    let l1 = FracPoly::monomial(0.05, &[(k, k_exp), (n, sh.e0)])
        .sub(&FracPoly::monomial(0.5, &[(n, sh.cost)]))
        .sub(&FracPoly::monomial(0.5, &[(i, sh.cost)]));
    let phi = FracPoly::monomial(1.0, &[(i, sh.acc)]).sub(&FracPoly::monomial(0.1, &[(k, sh.acc)]));
    InvestmentSpec::new(l1, phi, rho, order)
}

/// `L_1 = 0.2 K^e N^e - 0.5 N^d - 0.5 I^d`, `phi = I^c - 0.1 K^c` with
/// `e = 0.75` and `d`, `c` chosen so that `L_1` is homogeneous of degree
/// `2 Gamma(1+a) h(e)` and `phi` of degree one. At the classical order this
/// is `d = 1.5`, `c = 1`.
pub fn homogeneous_investment(order: FracOrder, rho: f64) -> Result<InvestmentSpec> {
    let sh = shape(order)?;
    build(order, rho, sh.e0, &sh)
}

/// [`homogeneous_investment`] plus a constant payoff of one, with the degree
/// of the homogeneous part declared. The constant leaves the dynamics
/// unchanged but breaks homogeneity.
pub fn nonhomogeneous_investment(order: FracOrder, rho: f64) -> Result<InvestmentSpec> {
    let sh = shape(order)?;
    let r = 2.0 * order.gamma_factor() * power_factor(order, sh.e0)?;
    let mut spec = build(order, rho, sh.e0, &sh)?.with_degree(r);
    spec.l1 = spec.l1.add(&FracPoly::constant(1.0));
    Ok(spec)
}

/// Starting point `[K, I, N, lambda]` for the steady-state search on
/// [`steady_state_investment`]; the origin is a degenerate solution.
pub const STEADY_STATE_GUESS: [f64; 4] = [20.0, 2.0, 2.0, 2.0];

/// Undiscounted model with an interior steady state:
/// `L_1 = K^0.5 N^0.5 - 0.5 N^2 - 0.5 I^2`, `phi = I - 0.1 K`.
pub fn steady_state_investment(order: FracOrder) -> Result<InvestmentSpec> {
    let (k, i, n) = (VarId::X(0), VarId::X(1), VarId::X(2));
    let l1 = FracPoly::monomial(1.0, &[(k, 0.5), (n, 0.5)])
        .sub(&FracPoly::monomial(0.5, &[(n, 2.0)]))
        .sub(&FracPoly::monomial(0.5, &[(i, 2.0)]));
    let phi = FracPoly::var(i).sub(&FracPoly::monomial(0.1, &[(k, 1.0)]));
    InvestmentSpec::new(l1, phi, 0.0, order)
}
