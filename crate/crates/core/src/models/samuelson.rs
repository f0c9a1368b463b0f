use crate::error::{FracError, Result};
use crate::fdesolve::{solve_fvf, RhsSpec, Trajectory};
use crate::fracpoly::{parse_poly, FracPoly, Point, VarId};
use crate::specfun::{gamma_fn, ml_discount, FracOrder};
use crate::variational::{build_fvf, derive_el_discounted, ELSystem, LagrangianSpec, ResidualStat};

use super::orthant_error;

/// Coefficients of `L_1 = -a1 y^(2a) - a2 y^a x^a - a3 x^(2a)` and the
/// discount rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamuelsonParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub rho: f64,
    pub order: FracOrder,
}

impl SamuelsonParams {
    pub fn new(a1: f64, a2: f64, a3: f64, rho: f64, order: FracOrder) -> Result<Self> {
        if a1 == 0.0 || !a1.is_finite() {
            return Err(FracError::Regularity(format!("a1 = {a1}: g = -a1 Gamma(1+2a) is not invertible")));
        }
        if !(rho >= 0.0) || ![a2, a3, rho].iter().all(|v| v.is_finite()) {
            return Err(FracError::InvalidSetup("coefficients must be finite and rho >= 0".into()));
        }
        Ok(SamuelsonParams { a1, a2, a3, rho, order })
    }

    pub fn base(&self) -> FracPoly {
        let a = self.order.value();
        let text = format!("{} * y^(2*a) + {} * y^a * x^a + {} * x^(2*a)", -self.a1, -self.a2, -self.a3);
        parse_poly(&text, Some(a)).expect("well-formed quadratic Lagrangian")
    }

    pub fn lagrangian(&self) -> LagrangianSpec {
        LagrangianSpec::discounted(self.base(), self.rho, 1, self.order).expect("valid by construction")
    }
}

/// The four-term closed form
/// `a1 G1 G2 y2 - (a2 G1^2 + rho a1 G2) y^a + a2 G1^3 y - (a3 G2 + rho a2 G1^2) x^a`
/// with `G1 = Gamma(1+a)`, `G2 = Gamma(1+2a)`.
pub fn samuelson_equation(p: &SamuelsonParams) -> Result<FracPoly> {
    let a = p.order.value();
    let g1 = gamma_fn(1.0 + a)?;
    let g2 = gamma_fn(1.0 + 2.0 * a)?;
    Ok(FracPoly::from_terms(vec![])
        .add(&FracPoly::monomial(p.a1 * g1 * g2, &[(VarId::Y2(0), 1.0)]))
        .add(&FracPoly::monomial(-(p.a2 * g1 * g1 + p.rho * p.a1 * g2), &[(VarId::Y(0), a)]))
        .add(&FracPoly::monomial(p.a2 * g1.powi(3), &[(VarId::Y(0), 1.0)]))
        .add(&FracPoly::monomial(-(p.a3 * g2 + p.rho * p.a2 * g1 * g1), &[(VarId::X(0), a)])))
}

/// Derives the discounted Euler-Lagrange equation and scales it by
/// `-Gamma(1+a)`, which puts it in the four-term closed form. The result is
/// checked against [`samuelson_equation`] term by term.
pub fn samuelson_derive(p: &SamuelsonParams) -> Result<ELSystem> {
    let mut el = derive_el_discounted(&p.lagrangian())?;
    el.residuals[0] = el.residuals[0].scale(-p.order.gamma_factor());
    let closed = samuelson_equation(p)?;
    let diff = el.residuals[0].max_coeff_diff(&closed);
    if diff > 1e-12 * closed.max_abs_coeff().max(1e-300) {
        return Err(FracError::InvalidSetup(format!("derived equation differs from the closed form by {diff}")));
    }
    Ok(el)
}

/// Integrates the vector field of the model from `x(0) = x0`,
/// `D^a x(0) = v0` and attaches the momentum channel
/// `p = E_a(-rho t^a) D_y L_1`.
pub fn samuelson_simulate(p: &SamuelsonParams, x0: f64, v0: f64, horizon: f64, step: f64) -> Result<Trajectory> {
    let l = p.lagrangian();
    let fvf = build_fvf(&l)?;
    let inner = fvf.rhs();
    let RhsSpec::Func { f, .. } = inner else { unreachable!("build_fvf returns a function right-hand side") };
    let rhs = RhsSpec::func(1, move |t, s| f(t, s).map_err(|e| orthant_error(e, t)));
    let mut tr = solve_fvf(p.order, &rhs, &[x0], &[v0], horizon, step)?;
    let dy = l.base.frac_partial(VarId::Y(0), p.order)?;
    let g = p.order.gamma_factor();
    let mut mom = Vec::with_capacity(tr.len());
    for k in 0..tr.len() {
        let t = tr.time(k);
        let pt: Point = [(VarId::X(0), tr.x[0][k]), (VarId::Y(0), tr.v[0][k] / g)].into_iter().collect();
        let e = ml_discount(p.order, p.rho, t)?;
        mom.push(e * dy.eval(&pt).map_err(|err| orthant_error(err, t))?);
    }
    tr.p = Some(vec![mom]);
    Ok(tr)
}

/// Absolute value of the closed-form equation along a trajectory (maximum
/// and mean) over nodes with `t >= t_min`, taking `y = v / Gamma(1+a)` and
/// `y2 = D^a v / Gamma(1+a)^2` with `D^a v` from the L1 scheme.
pub fn samuelson_residual(p: &SamuelsonParams, tr: &Trajectory, t_min: f64) -> Result<ResidualStat> {
    let eq = samuelson_equation(p)?;
    let g = p.order.gamma_factor();
    let dv = crate::gridops::time_derivative(&tr.v_sampled(0)?, p.order)?;
    let mut abs = Vec::with_capacity(tr.len());
    for k in 0..tr.len() {
        if tr.time(k) < t_min {
            continue;
        }
        let pt: Point =
            [(VarId::X(0), tr.x[0][k]), (VarId::Y(0), tr.v[0][k] / g), (VarId::Y2(0), dv.values()[k] / (g * g))].into_iter().collect();
        abs.push(eq.eval(&pt)?.abs());
    }
    Ok(ResidualStat::from_abs(&abs, 1.0))
}

/// Utility function given through its first two derivatives on an open
/// interval of consumption levels.
pub struct Utility<'a> {
    pub d1: &'a dyn Fn(f64) -> f64,
    pub d2: &'a dyn Fn(f64) -> f64,
    pub domain: (f64, f64),
}

/// Which symbol multiplies `Gamma(1+a)^2 U''` in the first term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiviatanForm {
    /// `(y)^(2a)`.
    VelocitySquared,
    /// The second velocity `y2` with the given value.
    SecondVelocity(f64),
}

/// Left side of the Euler-Lagrange equation of `L_1 = U(g(x) - y)`:
/// `G^2 U''(c) Y - G D_x^a g(x) U''(c) y + rho U'(c) G - U'(c) D_x^a g(x)`
/// with `c = g(x) - y`, `G = Gamma(1+a)` and `Y` chosen by `form`.
pub fn liviatan_el_residual(
    u: &Utility<'_>,
    g: &FracPoly,
    order: FracOrder,
    rho: f64,
    x: f64,
    y: f64,
    form: LiviatanForm,
) -> Result<f64> {
    let pt: Point = [(VarId::X(0), x)].into_iter().collect();
    let c = g.eval(&pt)? - y;
    if !(c > u.domain.0 && c < u.domain.1) {
        return Err(FracError::InvalidSetup(format!("consumption {c} outside the utility domain {:?}", u.domain)));
    }
    let dg = g.frac_partial(VarId::X(0), order)?.eval(&pt)?;
    let gg = order.gamma_factor();
    let first = match form {
        LiviatanForm::VelocitySquared => {
            let e = 2.0 * order.value();
            if y < 0.0 && (e - e.round()).abs() > 1e-12 {
                return Err(FracError::NegativeBase { var: "y".into(), base: y, exponent: e });
            }
            if (e - e.round()).abs() <= 1e-12 { y.powi(e.round() as i32) } else { y.powf(e) }
        }
        LiviatanForm::SecondVelocity(y2) => y2,
    };
    let (u1, u2) = ((u.d1)(c), (u.d2)(c));
    Ok(gg * gg * u2 * first - gg * dg * u2 * y + rho * u1 * gg - u1 * dg)
}

/// Steady state `y = 0` of the Liviatan-Samuelson equation on the positive
/// half-line: a sign change is bracketed by doubling outward from `x_guess`
/// in both directions, then refined by Newton steps in `ln x` safeguarded by
/// bisection.
pub fn liviatan_steady_state(u: &Utility<'_>, g: &FracPoly, order: FracOrder, rho: f64, x_guess: f64) -> Result<f64> {
    if !(x_guess > 0.0) {
        return Err(FracError::InvalidSetup(format!("steady-state guess must be positive, got {x_guess}")));
    }
    let f = |s: f64| liviatan_el_residual(u, g, order, rho, s.exp(), 0.0, LiviatanForm::VelocitySquared);
    let s0 = x_guess.ln();
    let f0 = f(s0)?;
    if f0 == 0.0 {
        return Ok(x_guess);
    }
    let mut bracket = None;
    'scan: for k in 1..=60 {
        let w = std::f64::consts::LN_2 * k as f64;
        for s in [s0 - w, s0 + w] {
            if let Ok(v) = f(s) {
                if v == 0.0 {
                    return Ok(s.exp());
                }
                if v.signum() != f0.signum() {
                    bracket = Some(if s < s0 { (s, s0, v) } else { (s0, s, f0) });
                    break 'scan;
                }
            }
        }
    }
    let (mut lo, mut hi, mut flo) = bracket.ok_or_else(|| FracError::RootFinding("no sign change of the steady-state residual".into()))?;
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fs = f(s)?;
        if fs == 0.0 || hi - lo <= 1e-15 * s.abs().max(1.0) {
            return Ok(s.exp());
        }
        if fs.signum() == flo.signum() {
            lo = s;
            flo = fs;
        } else {
            hi = s;
        }
        let h = 1e-7;
        let slope = (f(s + h)? - f(s - h)?) / (2.0 * h);
        let newton = s - fs / slope;
        if (newton - s).abs() <= 1e-15 * s.abs().max(1.0) {
            return Ok(newton.exp());
        }
        s = if slope.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Ok(s.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(a: f64) -> FracOrder {
        FracOrder::new_or_classical(a).unwrap()
    }

    #[test]
    fn matches_closed_form_and_classical_reduction() {
        let p = SamuelsonParams::new(0.5, 1.0, 0.5, 0.3, ord(0.5)).unwrap();
        assert!(samuelson_derive(&p).is_ok());
        let (a, rho) = (0.2, 0.3);
        let c = SamuelsonParams::new(0.5, a, 0.5, rho, FracOrder::classical()).unwrap();
        let el = samuelson_derive(&c).unwrap();
        let r = &el.residuals[0];
        let k = |v: VarId| r.coefficient_of(v, 1.0).as_constant().unwrap();
        assert!((k(VarId::Y2(0)) - 1.0).abs() < 1e-12);
        assert!((k(VarId::Y(0)) + rho).abs() < 1e-12);
        assert!((k(VarId::X(0)) + 1.0 + rho * a).abs() < 1e-12);
    }

    #[test]
    fn only_leading_term_survives() {
        let a = 0.6;
        let p = SamuelsonParams::new(0.7, 0.0, 0.0, 0.0, ord(a)).unwrap();
        let el = samuelson_derive(&p).unwrap();
        let want = FracPoly::monomial(0.7 * gamma_fn(1.0 + a).unwrap() * gamma_fn(1.0 + 2.0 * a).unwrap(), &[(VarId::Y2(0), 1.0)]);
        assert!(el.residuals[0].max_coeff_diff(&want) < 1e-14);
        assert!(matches!(SamuelsonParams::new(0.0, 1.0, 1.0, 0.1, ord(a)), Err(FracError::Regularity(_))));
    }

    #[test]
    fn equilibrium_trajectory() {
        let p = SamuelsonParams::new(0.5, 0.0, 0.0, 0.2, ord(0.6)).unwrap();
        let tr = samuelson_simulate(&p, 0.0, 0.0, 1.0, 1.0 / 64.0).unwrap();
        assert!(tr.x[0].iter().chain(&tr.v[0]).all(|&v| v == 0.0));
    }

    #[test]
    fn classical_simulation_matches_linear_ode() {
        let (a, rho) = (0.2, 0.3);
        let p = SamuelsonParams::new(0.5, a, 0.5, rho, FracOrder::classical()).unwrap();
        let tr = samuelson_simulate(&p, 1.0, 0.0, 1.0, 1.0 / 512.0).unwrap();
        // x'' - rho x' - (1 + rho a) x = 0, x(0) = 1, x'(0) = 0
        let disc = (rho * rho + 4.0 * (1.0 + rho * a)).sqrt();
        let (r1, r2) = ((rho + disc) / 2.0, (rho - disc) / 2.0);
        let c1 = -r2 / (r1 - r2);
        let c2 = r1 / (r1 - r2);
        let err = tr.times().iter().zip(&tr.x[0]).map(|(&t, &x)| (x - c1 * (r1 * t).exp() - c2 * (r2 * t).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn orthant_exit_is_reported() {
        // strong restoring force drives x below zero
        let p = SamuelsonParams::new(0.5, 0.0, -3.0, 0.0, ord(0.5)).unwrap();
        match samuelson_simulate(&p, 0.5, 0.0, 4.0, 1.0 / 64.0) {
            Err(FracError::OrthantExit { t, .. }) => assert!(t > 0.0),
            other => panic!("{other:?}"),
        }
    }

    fn linear_utility() -> (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) {
        (Box::new(|_c| 1.0), Box::new(|_c| 0.0))
    }

    #[test]
    fn liviatan_examples() {
        let (d1, d2) = linear_utility();
        let u = Utility { d1: &*d1, d2: &*d2, domain: (f64::NEG_INFINITY, f64::INFINITY) };
        let a = ord(0.5);
        let g = parse_poly("2 * x^a", Some(0.5)).unwrap();
        let rho = 0.4;
        let x = 1.7;
        let r = liviatan_el_residual(&u, &g, a, rho, x, 0.3, LiviatanForm::VelocitySquared).unwrap();
        let dg = 2.0 * a.gamma_factor();
        assert!((r - (rho * a.gamma_factor() - dg)).abs() < 1e-14);

        let log_d1 = |c: f64| 1.0 / c;
        let log_d2 = |c: f64| -1.0 / (c * c);
        let ulog = Utility { d1: &log_d1, d2: &log_d2, domain: (0.0, f64::INFINITY) };
        let r = liviatan_el_residual(&ulog, &g, a, 0.0, x, 0.0, LiviatanForm::VelocitySquared).unwrap();
        let gx = 2.0 * x.sqrt();
        let dgx = g.frac_partial(VarId::X(0), a).unwrap().eval(&[(VarId::X(0), x)].into_iter().collect()).unwrap();
        assert!((r + dgx / gx).abs() < 1e-14);
        assert!(liviatan_el_residual(&ulog, &g, a, 0.0, x, 10.0, LiviatanForm::VelocitySquared).is_err());
    }

    #[test]
    fn liviatan_classical_oracle() {
        // U = ln c, g = b x: classical discounted Euler-Lagrange equation
        // U'' x'' - b U'' x' + rho U' - b U' = 0
        let b = 1.3;
        let (rho, x, xd, xdd) = (0.2, 2.0, 0.4, -0.7);
        let d1 = |c: f64| 1.0 / c;
        let d2 = |c: f64| -1.0 / (c * c);
        let u = Utility { d1: &d1, d2: &d2, domain: (0.0, f64::INFINITY) };
        let g = parse_poly(&format!("{b} * x"), None).unwrap();
        let c = b * x - xd;
        let oracle = d2(c) * xdd - b * d2(c) * xd + rho * d1(c) - b * d1(c);
        let r = liviatan_el_residual(&u, &g, FracOrder::classical(), rho, x, xd, LiviatanForm::SecondVelocity(xdd)).unwrap();
        assert!((r - oracle).abs() < 1e-12);
        // the squared-velocity form agrees where x'' = x'^2
        let squared = liviatan_el_residual(&u, &g, FracOrder::classical(), rho, x, xd, LiviatanForm::VelocitySquared).unwrap();
        let oracle_sq = d2(c) * xd * xd - b * d2(c) * xd + rho * d1(c) - b * d1(c);
        assert!((squared - oracle_sq).abs() < 1e-12);
    }

    #[test]
    fn golden_rule_steady_state() {
        // D^a g(x) = rho Gamma(1+a) with g = x^(0.5+a): closed form
        let a = ord(0.5);
        let d1 = |c: f64| 1.0 / c;
        let d2 = |c: f64| -1.0 / (c * c);
        let u = Utility { d1: &d1, d2: &d2, domain: (0.0, f64::INFINITY) };
        let g = parse_poly("x^0.8", None).unwrap();
        let rho = 0.3;
        let x = liviatan_steady_state(&u, &g, a, rho, 1.0).unwrap();
        let coef = gamma_fn(1.8).unwrap() / gamma_fn(1.3).unwrap();
        let exact = (rho * a.gamma_factor() / coef).powf(1.0 / 0.3);
        assert!((x - exact).abs() < 1e-9 * exact, "{x} {exact}");
    }
}
