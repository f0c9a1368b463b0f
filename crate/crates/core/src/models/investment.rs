use std::collections::BTreeSet;

use crate::error::{FracError, Result};
use crate::fdesolve::{integrate_abm, node_count, Trajectory, DEFAULT_CORRECTOR_PASSES};
use crate::fracpoly::{FracMonomial, EXPONENT_TOL, FracPoly, Point, VarId};
use crate::gridops::{time_derivative, SampledFunction};
use crate::specfun::{ml_discount, FracOrder};
use crate::variational::{derive_constrained_el, ELSystem, LagrangianSpec};

use super::orthant_error;

const K: VarId = VarId::X(0);
const I: VarId = VarId::X(1);
const N: VarId = VarId::X(2);

/// Nodes with `t` below this fraction of the horizon are left out of the
/// relation residual; the L1 derivative of a channel that starts like
/// `c t^a` is inaccurate there.
pub const INITIAL_LAYER: f64 = 0.1;

/// Investment model: running payoff `L_1(K, I, N)`, accumulation law
/// `D^a K = phi(K, I, N)` and discount rate `rho`. Capital, investment and
/// labour are `x_0`, `x_1` and `x_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvestmentSpec {
    pub l1: FracPoly,
    pub phi: FracPoly,
    pub rho: f64,
    pub order: FracOrder,
    /// Degree used by the relation check. `None` derives it from `l1`.
    pub r: Option<f64>,
    /// Use `D_K phi` instead of `D_I phi` in the investment condition.
    pub strict_paper: bool,
}

impl InvestmentSpec {
    pub fn new(l1: FracPoly, phi: FracPoly, rho: f64, order: FracOrder) -> Result<Self> {
        let allowed: BTreeSet<VarId> = [K, I, N].into_iter().collect();
        for (name, p) in [("L1", &l1), ("phi", &phi)] {
            if let Some(v) = p.vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(FracError::InvalidSetup(format!("{name} may only use x0, x1, x2; found {}", v.name())));
            }
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(FracError::InvalidSetup(format!("rho must be finite and non-negative, got {rho}")));
        }
        Ok(InvestmentSpec { l1, phi, rho, order, r: None, strict_paper: false })
    }

    pub fn with_degree(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn strict(mut self, on: bool) -> Self {
        self.strict_paper = on;
        self
    }
}

/// The constrained Euler-Lagrange system for `K, I, N`. The constraint is
/// `phi - y_0^a / Gamma(1+a)`, so its `y_0` partial is `-1` and the first
/// residual reads `E D_K L_1 + lambda D_K phi + D^a lambda`.
pub fn investment_derive(spec: &InvestmentSpec) -> Result<ELSystem> {
    let a = spec.order;
    let f = spec.phi.sub(&FracPoly::monomial(1.0 / a.gamma_factor(), &[(VarId::Y(0), a.value())]));
    let l = LagrangianSpec::discounted(spec.l1.clone(), spec.rho, 3, a)?;
    let mut el = derive_constrained_el(&l, &f)?;
    if spec.strict_paper {
        let e = FracPoly::var(VarId::Discount);
        let lambda = FracPoly::var(VarId::Lambda);
        el.residuals[1] = e.mul(&spec.l1.frac_partial(I, a)?).add(&lambda.mul(&spec.phi.frac_partial(K, a)?));
    }
    Ok(el)
}

fn same_powers(a: &FracMonomial, b: &FracMonomial) -> bool {
    a.powers().len() == b.powers().len()
        && a.powers().iter().zip(b.powers()).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= EXPONENT_TOL)
}

/// Sum of the absolute values of the terms at a point.
fn abs_sum(p: &FracPoly, pt: &Point) -> Result<f64> {
    p.terms().iter().map(|t| t.eval(pt).map(f64::abs)).sum()
}

/// Ordinary partial derivative, allowing negative exponents.
fn ordinary_partial(p: &FracPoly, v: VarId) -> FracPoly {
    let terms = p
        .terms()
        .iter()
        .filter(|t| t.exponent(v) != 0.0)
        .map(|t| {
            let e = t.exponent(v);
            let mut powers = t.powers().to_vec();
            powers.push((v, -1.0));
            FracMonomial::new(t.coeff() * e, &powers)
        })
        .collect();
    FracPoly::from_terms(terms)
}

/// Outcome of the homogeneity test
/// `sum_v v^a D_v^a P = (r / Gamma(1+a)) P`.
#[derive(Debug, Clone, PartialEq)]
pub enum Homogeneity {
    Degree(f64),
    /// `sum_v v^a D_v^a P - c P` for the best-fitting `c`.
    Defect(FracPoly),
}

pub fn check_homogeneity(p: &FracPoly, order: FracOrder) -> Result<Homogeneity> {
    let mut s = FracPoly::zero();
    for v in p.vars() {
        s = s.add(&p.frac_partial(v, order)?.mul_var_power(v, order.value()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for t in p.terms() {
        let c = s.terms().iter().find(|u| same_powers(u, t)).map_or(0.0, |u| u.coeff());
        num += c * t.coeff();
        den += t.coeff() * t.coeff();
    }
    let c = if den > 0.0 { num / den } else { 0.0 };
    let defect = s.sub(&p.scale(c));
    let scale = s.max_abs_coeff().max(p.max_abs_coeff());
    if defect.max_abs_coeff() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        Ok(Homogeneity::Degree(order.gamma_factor() * c))
    } else {
        Ok(Homogeneity::Defect(defect))
    }
}

/// Polynomials needed to evaluate the first-order conditions.
struct Conditions {
    phi: FracPoly,
    dk_l: FracPoly,
    dk_phi: FracPoly,
    // investment and labour conditions: E a + lambda b
    eqs: Vec<(FracPoly, FracPoly)>,
    // classical partials of the above in I and N
    jac: Vec<[(FracPoly, FracPoly); 2]>,
    unknowns: Vec<VarId>,
}

impl Conditions {
    fn new(spec: &InvestmentSpec) -> Result<Self> {
        let a = spec.order;
        let d = |p: &FracPoly, v| p.frac_partial(v, a);
        let invest_phi = if spec.strict_paper { d(&spec.phi, K)? } else { d(&spec.phi, I)? };
        let all = [(d(&spec.l1, I)?, invest_phi), (d(&spec.l1, N)?, d(&spec.phi, N)?)];
        let eqs: Vec<_> = all.into_iter().filter(|(x, y)| !(x.is_zero() && y.is_zero())).collect();
        let unknowns: Vec<VarId> =
            [I, N].into_iter().filter(|&v| eqs.iter().any(|(x, y)| x.contains_var(v) || y.contains_var(v))).collect();
        if eqs.len() != unknowns.len() {
            return Err(FracError::InvalidSetup(format!(
                "{} first-order conditions for {} unknown controls",
                eqs.len(),
                unknowns.len()
            )));
        }
        let jac = eqs.iter().map(|(x, y)| [I, N].map(|v| (ordinary_partial(x, v), ordinary_partial(y, v)))).collect();
        Ok(Conditions { phi: spec.phi.clone(), dk_l: d(&spec.l1, K)?, dk_phi: d(&spec.phi, K)?, eqs, jac, unknowns })
    }

    fn residuals(&self, pt: &Point, e: f64, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut r = Vec::with_capacity(self.eqs.len());
        let mut s = Vec::with_capacity(self.eqs.len());
        for (x, y) in &self.eqs {
            r.push(e * x.eval(pt)? + lambda * y.eval(pt)?);
            s.push(e.abs() * abs_sum(x, pt)? + lambda.abs() * abs_sum(y, pt)?);
        }
        Ok((r, s))
    }

    /// Solves the investment and labour conditions for the controls in log
    /// coordinates, starting from `guess`.
    fn solve_controls(&self, k: f64, lambda: f64, e: f64, guess: [f64; 2]) -> Result<[f64; 2]> {
        let mut ctl = guess;
        let m = self.unknowns.len();
        if m == 0 {
            return Ok(ctl);
        }
        let slot = |v: VarId| if v == I { 0 } else { 1 };
        let point = |c: [f64; 2]| -> Point { [(K, k), (I, c[0]), (N, c[1])].into_iter().collect() };
        let (r0, s0) = self.residuals(&point(ctl), e, lambda)?;
        let scale: Vec<f64> = s0.iter().map(|v| v.max(f64::MIN_POSITIVE)).collect();
        let merit = |r: &[f64]| r.iter().zip(&scale).map(|(a, b)| (a / b).powi(2)).sum::<f64>().sqrt();
        let mut r = r0;
        let mut fm = merit(&r);
        for _ in 0..100 {
            if fm <= 1e-14 {
                return Ok(ctl);
            }
            let pt = point(ctl);
            let mut jm = [[0.0; 2]; 2];
            for (row, jrow) in self.jac.iter().enumerate() {
                for (col, &v) in self.unknowns.iter().enumerate() {
                    let (dx, dy) = &jrow[slot(v)];
                    jm[row][col] = (e * dx.eval(&pt)? + lambda * dy.eval(&pt)?) * ctl[slot(v)];
                }
            }
            let delta = if m == 1 {
                [-r[0] / jm[0][0], 0.0]
            } else {
                let det = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0];
                [(-r[0] * jm[1][1] + r[1] * jm[0][1]) / det, (-r[1] * jm[0][0] + r[0] * jm[1][0]) / det]
            };
            if !delta.iter().all(|d| d.is_finite()) {
                return Err(FracError::RootFinding(format!("singular control Jacobian at K = {k}, lambda = {lambda}")));
            }
            let cap = delta.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
            let mut step = if cap > 2.0 { 2.0 / cap } else { 1.0 };
            let mut accepted = false;
            for _ in 0..50 {
                let mut cand = ctl;
                for (col, &v) in self.unknowns.iter().enumerate() {
                    cand[slot(v)] = ctl[slot(v)] * (step * delta[col]).exp();
                }
                if let Ok((rc, _)) = self.residuals(&point(cand), e, lambda) {
                    let fc = merit(&rc);
                    if fc < fm || fc <= 1e-14 {
                        let moved = step * cap;
                        ctl = cand;
                        r = rc;
                        fm = fc;
                        accepted = true;
                        if moved <= 1e-15 {
                            return Ok(ctl);
                        }
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if fm <= 1e-10 {
            Ok(ctl)
        } else {
            Err(FracError::RootFinding(format!(
                "control conditions not solved at K = {k}, lambda = {lambda} (scaled residual {fm:.3e})"
            )))
        }
    }
}

/// Integrates the model from capital `k0` and investment `i0`. The shadow
/// price starts on the investment condition; `n0` only seeds the labour
/// solve. Capital and the shadow price are integrated by the
/// predictor-corrector scheme while investment and labour are re-solved from
/// their conditions at every evaluation, warm-started from the last solution.
///
/// The returned trajectory has `x = [K, I, N]`, `v[0] = phi` along the path,
/// `v[1..]` from the L1 derivative of the control channels, and `lambda`.
pub fn investment_simulate(spec: &InvestmentSpec, k0: f64, i0: f64, n0: f64, horizon: f64, step: f64) -> Result<Trajectory> {
    if !(k0 > 0.0 && i0 > 0.0 && n0 > 0.0) {
        return Err(FracError::InvalidSetup("initial capital, investment and labour must be positive".into()));
    }
    let nodes = node_count(horizon, step)?;
    let cond = Conditions::new(spec)?;
    let start: Point = [(K, k0), (I, i0), (N, n0)].into_iter().collect();
    let (a2, b2) = cond
        .eqs
        .first()
        .filter(|_| cond.unknowns.contains(&I))
        .ok_or_else(|| FracError::InvalidSetup("no investment condition to fix the initial shadow price".into()))?;
    let b = b2.eval(&start)?;
    if b == 0.0 {
        return Err(FracError::RootFinding("investment condition does not involve the shadow price at t = 0".into()));
    }
    let lambda0 = -a2.eval(&start)? / b;
    let order = spec.order;
    let rho = spec.rho;
    let mut controls = vec![[f64::NAN; 2]; nodes];
    let mut warm = cond.solve_controls(k0, lambda0, 1.0, [i0, n0])?;
    let (states, rhs) = integrate_abm(order, &[k0, lambda0], horizon, step, DEFAULT_CORRECTOR_PASSES, |t, s, out| {
        let (k, lambda) = (s[0], s[1]);
        if !(k > 0.0) {
            return Err(FracError::OrthantExit { t, detail: format!("capital reached {k}") });
        }
        let e = ml_discount(order, rho, t)?;
        let c = cond.solve_controls(k, lambda, e, warm).map_err(|err| orthant_error(err, t))?;
        warm = c;
        let pt: Point = [(K, k), (I, c[0]), (N, c[1])].into_iter().collect();
        let eval = |p: &FracPoly| p.eval(&pt).map_err(|err| orthant_error(err, t));
        out[0] = eval(&cond.phi)?;
        out[1] = -(e * eval(&cond.dk_l)? + lambda * eval(&cond.dk_phi)?);
        controls[((t / step).round() as usize).min(nodes - 1)] = c;
        Ok(())
    })?;
    let mut x = vec![states[0].clone(), Vec::with_capacity(nodes), Vec::with_capacity(nodes)];
    for c in &controls {
        x[1].push(c[0]);
        x[2].push(c[1]);
    }
    let deriv = |ch: &[f64]| -> Result<Vec<f64>> { Ok(time_derivative(&SampledFunction::new(0.0, step, ch.to_vec())?, order)?.into_values()) };
    let v = vec![rhs[0].clone(), deriv(&x[1])?, deriv(&x[2])?];
    Ok(Trajectory { step, order, x, v, p: None, lambda: Some(states[1].clone()) })
}

/// Relative defect of `r E L_1 = -lambda D^a K - Gamma(1+a) K^a D^a lambda`
/// along a trajectory, with both derivatives taken from the sampled
/// channels, over nodes with `t >= INITIAL_LAYER * horizon`.
pub fn investment_relation_residual(tr: &Trajectory, spec: &InvestmentSpec) -> Result<f64> {
    let horizon = tr.time(tr.len() - 1);
    investment_relation_residual_from(tr, spec, INITIAL_LAYER * horizon)
}

pub fn investment_relation_residual_from(tr: &Trajectory, spec: &InvestmentSpec, t_min: f64) -> Result<f64> {
    let order = spec.order;
    let r = match spec.r {
        Some(r) => r,
        None => match check_homogeneity(&spec.l1, order)? {
            Homogeneity::Degree(r) => r,
            Homogeneity::Defect(d) => return Err(FracError::Homogeneity(format!("L1 is not homogeneous; defect {}", d.to_text(None)))),
        },
    };
    match check_homogeneity(&spec.phi, order)? {
        Homogeneity::Degree(q) if (q - 1.0).abs() <= 1e-10 => {}
        Homogeneity::Degree(q) => return Err(FracError::Homogeneity(format!("phi has degree {q}, expected 1"))),
        Homogeneity::Defect(d) => return Err(FracError::Homogeneity(format!("phi is not homogeneous; defect {}", d.to_text(None)))),
    }
    let lambda = tr.lambda.as_ref().ok_or_else(|| FracError::MissingChannel("lambda".into()))?;
    let dk = time_derivative(&tr.x_sampled(0)?, order)?;
    let dl = time_derivative(&SampledFunction::new(0.0, tr.step, lambda.clone())?, order)?;
    let g = order.gamma_factor();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for k in 0..tr.len() {
        let t = tr.time(k);
        if t < t_min {
            continue;
        }
        let pt: Point = [(K, tr.x[0][k]), (I, tr.x[1][k]), (N, tr.x[2][k])].into_iter().collect();
        let e = ml_discount(order, spec.rho, t)?;
        let terms = [r * e * spec.l1.eval(&pt)?, lambda[k] * dk.values()[k], g * tr.x[0][k].powf(order.value()) * dl.values()[k]];
        worst = worst.max(terms.iter().sum::<f64>().abs());
        scale = scale.max(terms.iter().map(|v| v.abs()).sum());
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Stationary point of the undiscounted model: `phi = 0`, the three
/// conditions with `D^a lambda = 0`. Damped Newton in log coordinates on
/// `[K, I, N, lambda]`, all of which must stay positive.
pub fn investment_steady_state(spec: &InvestmentSpec, guess: [f64; 4]) -> Result<[f64; 4]> {
    if spec.rho != 0.0 {
        return Err(FracError::InvalidSetup("a steady state needs rho = 0".into()));
    }
    if !guess.iter().all(|v| *v > 0.0) {
        return Err(FracError::InvalidSetup("steady-state guess must be positive".into()));
    }
    let a = spec.order;
    let d = |p: &FracPoly, v| p.frac_partial(v, a);
    let invest_phi = if spec.strict_paper { d(&spec.phi, K)? } else { d(&spec.phi, I)? };
    let parts = [
        (d(&spec.l1, K)?, d(&spec.phi, K)?),
        (d(&spec.l1, I)?, invest_phi),
        (d(&spec.l1, N)?, d(&spec.phi, N)?),
    ];
    let phi = spec.phi.clone();
    let eval = |z: &[f64; 4]| -> Result<([f64; 4], [f64; 4])> {
        let pt: Point = [(K, z[0]), (I, z[1]), (N, z[2])].into_iter().collect();
        let mut r = [0.0; 4];
        let mut s = [0.0; 4];
        r[0] = phi.eval(&pt)?;
        s[0] = abs_sum(&phi, &pt)?;
        for (i, (x, y)) in parts.iter().enumerate() {
            r[i + 1] = x.eval(&pt)? + z[3] * y.eval(&pt)?;
            s[i + 1] = abs_sum(x, &pt)? + z[3].abs() * abs_sum(y, &pt)?;
        }
        Ok((r, s))
    };
    let (r0, s0) = eval(&guess)?;
    let scale = s0.map(|v| v.max(f64::MIN_POSITIVE));
    let merit = |r: &[f64; 4]| r.iter().zip(&scale).map(|(a, b)| (a / b).powi(2)).sum::<f64>().sqrt();
    let mut z = guess;
    let mut fm = merit(&r0);
    let mut r = r0;
    for _ in 0..200 {
        if fm <= 1e-14 {
            return Ok(z);
        }
        let mut jm = nalgebra::Matrix4::<f64>::zeros();
        for c in 0..4 {
            let hs: f64 = 1e-6;
            let (mut up, mut dn) = (z, z);
            up[c] *= hs.exp();
            dn[c] *= (-hs).exp();
            let (ru, _) = eval(&up)?;
            let (rd, _) = eval(&dn)?;
            for row in 0..4 {
                jm[(row, c)] = (ru[row] - rd[row]) / (2.0 * hs * scale[row]);
            }
        }
        let rhs = nalgebra::Vector4::from_iterator(r.iter().zip(&scale).map(|(a, b)| -a / b));
        let delta = jm.lu().solve(&rhs).ok_or_else(|| FracError::RootFinding("singular steady-state Jacobian".into()))?;
        let cap = delta.amax();
        let mut step = if cap > 1.0 { 1.0 / cap } else { 1.0 };
        let mut accepted = false;
        for _ in 0..50 {
            let cand: [f64; 4] = std::array::from_fn(|i| z[i] * (step * delta[i]).exp());
            if let Ok((rc, _)) = eval(&cand) {
                let fc = merit(&rc);
                if fc < fm {
                    z = cand;
                    r = rc;
                    fm = fc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fm <= 1e-10 {
        Ok(z)
    } else {
        Err(FracError::RootFinding(format!("steady state not found (scaled residual {fm:.3e})")))
    }
}
