//! Legendre transform, fractional Poisson brackets and trajectory checks of
//! the Hamilton form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{format_point, with_discount, LagrangianSpec};
use crate::error::{FracError, Result};
use crate::fdesolve::Trajectory;
use crate::fracpoly::{FracPoly, Point, VarId, EXPONENT_TOL};
use crate::gridops::{caputo_left, time_derivative, SampledFunction};
use crate::specfun::FracOrder;

/// `{f, h} = sum_i D_{p_i} f D_{x_i} h - D_{x_i} f D_{p_i} h`.
pub fn poisson_bracket(f: &FracPoly, h: &FracPoly, order: FracOrder, n: usize) -> Result<FracPoly> {
    let mut acc = FracPoly::zero();
    for i in 0..n {
        let (x, p) = (VarId::X(i), VarId::P(i));
        acc = acc.add(&f.frac_partial(p, order)?.mul(&h.frac_partial(x, order)?));
        acc = acc.sub(&f.frac_partial(x, order)?.mul(&h.frac_partial(p, order)?));
    }
    Ok(acc)
}

/// Symbolic partials of a closed-form Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClosedPartials {
    dx: Vec<FracPoly>,
    dp: Vec<FracPoly>,
    bracket_p: Vec<FracPoly>,
    bracket_x: Vec<FracPoly>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hamiltonian {
    /// `H(t, x, p)` with the inverse map `y_i^beta_i = inverse_i(t, x, p)`.
    Closed { h: FracPoly, inverse: Vec<FracPoly>, beta: Vec<f64>, partials: Option<Box<ClosedPartialsHandle>> },
    /// Inversion by one-dimensional root finding on a box of velocities.
    Numeric { velocity_box: Vec<(f64, f64)>, slope: Vec<FracPoly> },
}

/// Opaque holder so the enum can be serialized without exposing internals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedPartialsHandle(ClosedPartials);

/// Legendre transform of a Lagrangian: momenta `p_i = D_{y_i} L` and
/// `H = Gamma(1+a) p_i y_i - L` on the cotangent coordinates `(t, x, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub momenta: Vec<FracPoly>,
    pub h: Hamiltonian,
    pub lagrangian: FracPoly,
    pub order: FracOrder,
    pub rho: Option<f64>,
    pub n: usize,
}

/// Default velocity box for numeric inversion (open positive orthant,
/// truncated).
pub const DEFAULT_VELOCITY_BOX: (f64, f64) = (1e-8, 1e3);

const MONOTONE_SAMPLES: usize = 32;
const NUMERIC_PARTIAL_NODES: usize = 512;

/// Legendre transform with the default velocity box for numeric inversion.
pub fn legendre(l: &LagrangianSpec) -> Result<HamiltonianSpec> {
    legendre_on(l, &vec![DEFAULT_VELOCITY_BOX; l.n])
}

/// Legendre transform; `velocity_box` bounds each `y_i` when no closed-form
/// inverse exists.
pub fn legendre_on(l: &LagrangianSpec, velocity_box: &[(f64, f64)]) -> Result<HamiltonianSpec> {
    let a = l.order;
    let n = l.n;
    if velocity_box.len() != n {
        return Err(FracError::Dimension { expected: n, got: velocity_box.len() });
    }
    let full = l.full();
    let momenta = (0..n).map(|i| full.frac_partial(VarId::Y(i), a)).collect::<Result<Vec<_>>>()?;
    for (i, p) in momenta.iter().enumerate() {
        if !p.contains_var(VarId::Y(i)) {
            return Err(FracError::Legendre(format!("p_{} does not depend on y_{}; the Lagrangian is degenerate", i + 1, i + 1)));
        }
        if (0..n).any(|j| j != i && p.contains_var(VarId::Y(j))) {
            return Err(FracError::Legendre(format!("p_{} depends on several velocities", i + 1)));
        }
    }
    let spec = |h| HamiltonianSpec { momenta: momenta.clone(), h, lagrangian: full.clone(), order: a, rho: l.rho, n };
    if let Some(h) = closed_form(&full, &momenta, a) {
        return Ok(spec(h));
    }
    for &(lo, hi) in velocity_box {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(FracError::Legendre(format!("invalid velocity box [{lo}, {hi}]")));
        }
    }
    let classical = FracOrder::classical();
    let slope = momenta.iter().enumerate().map(|(i, p)| p.frac_partial(VarId::Y(i), classical)).collect::<Result<Vec<_>>>()?;
    Ok(spec(Hamiltonian::Numeric { velocity_box: velocity_box.to_vec(), slope }))
}

/// Closed form when each `p_i = c_i y_i^beta_i + r_i` with `c_i` a single
/// monomial free of velocities, and every power of `y_i` in `L` (and `y_i`
/// itself) is a nonnegative integer multiple of `beta_i`.
fn closed_form(full: &FracPoly, momenta: &[FracPoly], a: FracOrder) -> Option<Hamiltonian> {
    let n = momenta.len();
    let mut inverse = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for (i, p) in momenta.iter().enumerate() {
        let y = VarId::Y(i);
        let with_y: Vec<_> = p.terms().iter().filter(|t| t.exponent(y) != 0.0).collect();
        if with_y.len() != 1 {
            return None;
        }
        let b = with_y[0].exponent(y);
        if b <= 0.0 {
            return None;
        }
        let c = p.coefficient_of(y, b);
        let r = p.free_of(y);
        let yi = FracPoly::var(VarId::P(i)).sub(&r).div_monomial(&c).ok()?;
        inverse.push(yi);
        beta.push(b);
    }
    let g = a.gamma_factor();
    let mut h = full.scale(-1.0);
    for i in 0..n {
        h = h.add(&FracPoly::var(VarId::P(i)).mul_var_power(VarId::Y(i), 1.0).scale(g));
    }
    for i in 0..n {
        h = h.substitute_power(VarId::Y(i), &inverse[i], beta[i]).ok()?;
    }
    let partials = closed_partials(&h, a, n).ok().map(|p| Box::new(ClosedPartialsHandle(p)));
    Some(Hamiltonian::Closed { h, inverse, beta, partials })
}

fn closed_partials(h: &FracPoly, a: FracOrder, n: usize) -> Result<ClosedPartials> {
    let dx = (0..n).map(|i| h.frac_partial(VarId::X(i), a)).collect::<Result<Vec<_>>>()?;
    let dp = (0..n).map(|i| h.frac_partial(VarId::P(i), a)).collect::<Result<Vec<_>>>()?;
    let bracket_p = (0..n).map(|i| poisson_bracket(h, &FracPoly::var(VarId::P(i)), a, n)).collect::<Result<Vec<_>>>()?;
    let bracket_x = (0..n).map(|i| poisson_bracket(h, &FracPoly::var(VarId::X(i)), a, n)).collect::<Result<Vec<_>>>()?;
    Ok(ClosedPartials { dx, dp, bracket_p, bracket_x })
}

fn phase_point(t: f64, x: &[f64], other: &[f64], var: fn(usize) -> VarId) -> Point {
    let mut pt = Point::new();
    pt.insert(VarId::Time, t);
    for (i, &v) in x.iter().enumerate() {
        pt.insert(VarId::X(i), v);
    }
    for (i, &v) in other.iter().enumerate() {
        pt.insert(var(i), v);
    }
    pt
}

/// Fractional partial of a scalar function at `at`, as the Caputo derivative
/// from 0 sampled on a uniform grid; central differences at order 1.
fn numeric_partial<F: Fn(f64) -> Result<f64>>(f: F, at: f64, order: FracOrder) -> Result<f64> {
    if order.is_classical() {
        let h = 1e-5 * at.abs().max(1.0);
        return Ok((f(at + h)? - f(at - h)?) / (2.0 * h));
    }
    if !(at > 0.0) {
        return Err(FracError::Unsupported(format!("numeric fractional partial at nonpositive argument {at}")));
    }
    let step = at / NUMERIC_PARTIAL_NODES as f64;
    let values = (0..=NUMERIC_PARTIAL_NODES).map(|k| f(k as f64 * step)).collect::<Result<Vec<_>>>()?;
    let d = caputo_left(&SampledFunction::new(0.0, step, values)?, order.value())?;
    Ok(*d.values().last().expect("nonempty grid"))
}

impl HamiltonianSpec {
    pub fn is_closed_form(&self) -> bool {
        matches!(self.h, Hamiltonian::Closed { .. })
    }

    /// The closed-form polynomial, if any.
    pub fn polynomial(&self) -> Option<&FracPoly> {
        match &self.h {
            Hamiltonian::Closed { h, .. } => Some(h),
            Hamiltonian::Numeric { .. } => None,
        }
    }

    fn discounted(&self, pt: &Point) -> Result<Point> {
        with_discount(pt, self.order, self.rho)
    }

    /// Momenta at `(t, x, y)`.
    pub fn momenta_at(&self, t: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let pt = self.discounted(&phase_point(t, x, y, VarId::Y))?;
        self.momenta.iter().map(|p| p.eval(&pt)).collect()
    }

    /// Velocities `y` with `p(t, x, y) = p`.
    pub fn velocities(&self, t: f64, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        match &self.h {
            Hamiltonian::Closed { inverse, beta, .. } => {
                let pt = self.discounted(&phase_point(t, x, p, VarId::P))?;
                inverse
                    .iter()
                    .zip(beta)
                    .enumerate()
                    .map(|(i, (inv, &b))| {
                        let w = inv.eval(&pt)?;
                        let e = 1.0 / b;
                        if (e - e.round()).abs() <= EXPONENT_TOL {
                            Ok(w.powi(e.round() as i32))
                        } else if w >= 0.0 {
                            Ok(w.powf(e))
                        } else {
                            Err(FracError::Legendre(format!("y_{}^{b} = {w} has no real root", i + 1)))
                        }
                    })
                    .collect()
            }
            Hamiltonian::Numeric { velocity_box, slope } => {
                (0..self.n).map(|i| self.invert_one(i, t, x, p[i], velocity_box[i], &slope[i])).collect()
            }
        }
    }

    fn invert_one(&self, i: usize, t: f64, x: &[f64], target: f64, (lo, hi): (f64, f64), slope: &FracPoly) -> Result<f64> {
        let mut base = phase_point(t, x, &[], VarId::Y);
        base = self.discounted(&base)?;
        let at = |y: f64| -> Point {
            let mut pt = base.clone();
            pt.insert(VarId::Y(i), y);
            pt
        };
        let resid = |y: f64| -> Result<f64> { Ok(self.momenta[i].eval(&at(y))? - target) };
        let dres = |y: f64| -> Result<f64> { slope.eval(&at(y)) };

        let mut sign = 0.0;
        for k in 0..=MONOTONE_SAMPLES + 1 {
            let y = lo + (hi - lo) * k as f64 / (MONOTONE_SAMPLES + 1) as f64;
            let s = dres(y)?;
            if s == 0.0 || !s.is_finite() || (sign != 0.0 && s.signum() != sign) {
                return Err(FracError::Legendre(format!(
                    "p_{} is not strictly monotone in y_{} on [{lo}, {hi}] at {}",
                    i + 1,
                    i + 1,
                    format_point(&base)
                )));
            }
            sign = s.signum();
        }
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (resid(a)?, resid(b)?);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() == fb.signum() {
            return Err(FracError::Legendre(format!("p_{} = {target} is outside the image of [{lo}, {hi}]", i + 1)));
        }
        let fa_sign = fa.signum();
        let mut y = 0.5 * (a + b);
        for _ in 0..200 {
            let r = resid(y)?;
            if r == 0.0 {
                return Ok(y);
            }
            if r.signum() == fa_sign {
                a = y;
            } else {
                b = y;
            }
            let newton = y - r / dres(y)?;
            let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) || b - a <= 1e-15 * (1.0 + y.abs()) {
                return Ok(next);
            }
            y = next;
        }
        Ok(y)
    }

    /// `H(t, x, p)`.
    pub fn value(&self, t: f64, x: &[f64], p: &[f64]) -> Result<f64> {
        match &self.h {
            Hamiltonian::Closed { h, .. } => h.eval(&self.discounted(&phase_point(t, x, p, VarId::P))?),
            Hamiltonian::Numeric { .. } => {
                let y = self.velocities(t, x, p)?;
                let g = self.order.gamma_factor();
                let l = self.lagrangian.eval(&self.discounted(&phase_point(t, x, &y, VarId::Y))?)?;
                Ok(g * p.iter().zip(&y).map(|(p, y)| p * y).sum::<f64>() - l)
            }
        }
    }

    fn closed_partials(&self) -> Option<&ClosedPartials> {
        match &self.h {
            Hamiltonian::Closed { partials: Some(p), .. } => Some(&p.0),
            _ => None,
        }
    }

    fn eval_closed(&self, poly: &FracPoly, t: f64, x: &[f64], p: &[f64]) -> Result<f64> {
        poly.eval(&self.discounted(&phase_point(t, x, p, VarId::P))?)
    }

    /// `D_{x_i}^a H`.
    pub fn dx(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> Result<f64> {
        if let Some(cp) = self.closed_partials() {
            return self.eval_closed(&cp.dx[i], t, x, p);
        }
        numeric_partial(
            |s| {
                let mut xs = x.to_vec();
                xs[i] = s;
                self.value(t, &xs, p)
            },
            x[i],
            self.order,
        )
    }

    /// `D_{p_i}^a H`.
    pub fn dp(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> Result<f64> {
        if let Some(cp) = self.closed_partials() {
            return self.eval_closed(&cp.dp[i], t, x, p);
        }
        numeric_partial(
            |s| {
                let mut ps = p.to_vec();
                ps[i] = s;
                self.value(t, x, &ps)
            },
            p[i],
            self.order,
        )
    }

    // D_{p_i}^a p_i and D_{x_i}^a x_i as functions of the coordinate.
    fn coordinate_self_partial(&self, v: f64) -> Result<f64> {
        let a = self.order;
        let var = VarId::P(0);
        let d = FracPoly::var(var).frac_partial(var, a)?;
        d.eval(&[(var, v)].into_iter().collect())
    }

    /// `{H, p_i}`.
    pub fn bracket_momentum(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> Result<f64> {
        if let Some(cp) = self.closed_partials() {
            return self.eval_closed(&cp.bracket_p[i], t, x, p);
        }
        Ok(-self.dx(i, t, x, p)? * self.coordinate_self_partial(p[i])?)
    }

    /// `{H, x_i}`.
    pub fn bracket_position(&self, i: usize, t: f64, x: &[f64], p: &[f64]) -> Result<f64> {
        if let Some(cp) = self.closed_partials() {
            return self.eval_closed(&cp.bracket_x[i], t, x, p);
        }
        Ok(self.dp(i, t, x, p)? * self.coordinate_self_partial(x[i])?)
    }

    /// Fills the momentum channels of a trajectory from its `(t, x, y)`.
    pub fn attach_momenta(&self, traj: &mut Trajectory) -> Result<()> {
        if traj.dim() != self.n || traj.v.len() != self.n {
            return Err(FracError::Dimension { expected: self.n, got: traj.dim() });
        }
        let ys: Vec<Vec<f64>> = (0..self.n).map(|i| traj.y(i)).collect();
        let mut p = vec![Vec::with_capacity(traj.len()); self.n];
        for k in 0..traj.len() {
            let x: Vec<f64> = traj.x.iter().map(|c| c[k]).collect();
            let y: Vec<f64> = ys.iter().map(|c| c[k]).collect();
            for (ch, v) in p.iter_mut().zip(self.momenta_at(traj.time(k), &x, &y)?) {
                ch.push(v);
            }
        }
        traj.p = Some(p);
        Ok(())
    }
}

/// Summary of one residual along a trajectory, relative to `scale` (the
/// largest magnitude of the derivative channel it is compared with; 1 when
/// that channel vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStat {
    pub max: f64,
    pub mean: f64,
    pub scale: f64,
}

impl ResidualStat {
    pub fn from_abs(abs: &[f64], scale: f64) -> Self {
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let max = abs.iter().fold(0.0f64, |m, v| m.max(*v)) / scale;
        let mean = if abs.is_empty() { 0.0 } else { abs.iter().sum::<f64>() / abs.len() as f64 / scale };
        ResidualStat { max, mean, scale }
    }
}

/// Named residuals, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residuals: BTreeMap<String, ResidualStat>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, r| m.max(r.max))
    }

    pub fn get(&self, name: &str) -> Option<&ResidualStat> {
        self.residuals.get(name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Checks the Hamilton equations `D_t^a p_i = -D_{x_i} H`,
/// `D_t^a x_i = D_{p_i} H` and the bracket identities `{H, p_i} = D_t^a p_i`,
/// `{H, x_i} = D_t^a x_i` along a trajectory carrying momentum channels.
///
/// Time derivatives come from the sampled channels (finite differences at
/// order 1, the L1 scheme otherwise); the first node is skipped. Each
/// residual is the maximum over coordinates and nodes, relative to the size
/// of the time-derivative channel.
pub fn verify_hamilton(traj: &Trajectory, ham: &HamiltonianSpec) -> Result<ResidualReport> {
    let p = traj.p.as_ref().ok_or_else(|| FracError::MissingChannel("p".into()))?;
    if traj.dim() != ham.n || p.len() != ham.n {
        return Err(FracError::Dimension { expected: ham.n, got: traj.dim() });
    }
    let order = ham.order;
    let dt = |ch: &Vec<f64>| -> Result<Vec<f64>> {
        Ok(time_derivative(&SampledFunction::new(0.0, traj.step, ch.clone())?, order)?.into_values())
    };
    let dp_t = p.iter().map(dt).collect::<Result<Vec<_>>>()?;
    let dx_t = traj.x.iter().map(dt).collect::<Result<Vec<_>>>()?;
    let names = ["hamilton_momentum", "hamilton_position", "bracket_momentum", "bracket_position"];
    let mut abs: [Vec<f64>; 4] = Default::default();
    let mut scale = [0.0f64; 4];
    for k in 1..traj.len() {
        let t = traj.time(k);
        let x: Vec<f64> = traj.x.iter().map(|c| c[k]).collect();
        let pk: Vec<f64> = p.iter().map(|c| c[k]).collect();
        let mut worst = [0.0f64; 4];
        for i in 0..ham.n {
            let r = [
                dp_t[i][k] + ham.dx(i, t, &x, &pk)?,
                dx_t[i][k] - ham.dp(i, t, &x, &pk)?,
                dp_t[i][k] - ham.bracket_momentum(i, t, &x, &pk)?,
                dx_t[i][k] - ham.bracket_position(i, t, &x, &pk)?,
            ];
            let s = [dp_t[i][k].abs(), dx_t[i][k].abs(), dp_t[i][k].abs(), dx_t[i][k].abs()];
            for m in 0..4 {
                worst[m] = worst[m].max(r[m].abs());
                scale[m] = scale[m].max(s[m]);
            }
        }
        for m in 0..4 {
            abs[m].push(worst[m]);
        }
    }
    let residuals = names.iter().zip(abs.iter().zip(scale)).map(|(n, (a, s))| (n.to_string(), ResidualStat::from_abs(a, s))).collect();
    Ok(ResidualReport { residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracpoly::parse_poly;
    use crate::specfun::gamma_fn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quadratic(a: f64) -> LagrangianSpec {
        let text = format!("-0.5 * y^2 - {a} * x * y - 0.5 * x^2");
        LagrangianSpec::new(parse_poly(&text, None).unwrap(), 1, FracOrder::classical()).unwrap()
    }

    #[test]
    fn classical_quadratic_hamiltonian() {
        let a = 0.4;
        let ham = legendre(&quadratic(a)).unwrap();
        assert!(ham.is_closed_form());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x: f64 = rng.gen_range(-2.0..2.0);
            let p: f64 = rng.gen_range(-2.0..2.0);
            let direct = -0.5 * p * p - a * x * p + 0.5 * x * x * (1.0 - a * a);
            assert!((ham.value(0.0, &[x], &[p]).unwrap() - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn fractional_round_trip_closed_form() {
        let a = 0.5;
        let l = LagrangianSpec::new(parse_poly("-0.5 * y^(2*a) - 1 * y^a * x^a - 0.5 * x^(2*a)", Some(a)).unwrap(), 1, FracOrder::new(a).unwrap()).unwrap();
        let ham = legendre(&l).unwrap();
        assert!(ham.is_closed_form());
        // p = -a1 Gamma(1+2a)/Gamma(1+a) y^a - a2 Gamma(1+a) x^a
        let g = gamma_fn(1.5).unwrap();
        let expected = parse_poly(&format!("-{} * y^a - {} * x^a", 0.5 / g, g), Some(a)).unwrap();
        assert!(ham.momenta[0].max_coeff_diff(&expected) < 1e-14);
        for &(x, y) in &[(0.3, 0.7), (1.2, 2.5), (2.0, 0.1)] {
            let p = ham.momenta_at(0.0, &[x], &[y]).unwrap();
            let back = ham.velocities(0.0, &[x], &p).unwrap();
            assert!((back[0] - y).abs() < 1e-10);
        }
    }

    #[test]
    fn numeric_inversion_round_trip() {
        let a = 0.3;
        let l = LagrangianSpec::new(parse_poly("y^(1+a) + 2 * y^(2*a) * x^a + x^(3*a)", Some(a)).unwrap(), 1, FracOrder::new(a).unwrap()).unwrap();
        let ham = legendre(&l).unwrap();
        assert!(!ham.is_closed_form());
        for &(x, y) in &[(0.3, 0.7), (1.2, 2.5), (2.0, 0.1)] {
            let p = ham.momenta_at(0.0, &[x], &[y]).unwrap();
            let back = ham.velocities(0.0, &[x], &p).unwrap();
            assert!((back[0] - y).abs() < 1e-10, "{back:?} vs {y}");
        }
        let p = ham.momenta_at(0.0, &[1.0], &[5e3]).unwrap();
        assert!(matches!(ham.velocities(0.0, &[1.0], &p), Err(FracError::Legendre(_))));
    }

    #[test]
    fn non_monotone_momentum_is_rejected() {
        let l = LagrangianSpec::new(parse_poly("y^3 - 3 * y^2", None).unwrap(), 1, FracOrder::classical()).unwrap();
        let ham = legendre_on(&l, &[(0.5, 3.0)]).unwrap();
        assert!(!ham.is_closed_form());
        assert!(matches!(ham.velocities(0.0, &[1.0], &[0.0]), Err(FracError::Legendre(_))));
    }

    #[test]
    fn degenerate_lagrangian() {
        let l = LagrangianSpec::new(FracPoly::constant(2.0), 1, FracOrder::new(0.5).unwrap()).unwrap();
        assert!(matches!(legendre(&l), Err(FracError::Legendre(_))));
    }

    #[test]
    fn bracket_examples() {
        for a in [0.4, 1.0] {
            let order = FracOrder::new_or_classical(a).unwrap();
            let xa = FracPoly::monomial(1.0, &[(VarId::X(0), a)]);
            let pa = FracPoly::monomial(1.0, &[(VarId::P(0), a)]);
            let b = poisson_bracket(&xa, &pa, order, 1).unwrap();
            let g = order.gamma_factor();
            assert!((b.as_constant().unwrap() + g * g).abs() < 1e-14);
            assert!(poisson_bracket(&xa, &xa, order, 1).unwrap().is_zero());
            assert!(poisson_bracket(&xa, &FracPoly::constant(3.0), order, 1).unwrap().is_zero());
        }
    }

    #[test]
    fn numeric_and_closed_partials_agree() {
        let a = 0.5;
        let l = LagrangianSpec::new(parse_poly("-0.5 * y^(2*a) - 1 * y^a * x^a - 0.5 * x^(2*a)", Some(a)).unwrap(), 1, FracOrder::new(a).unwrap()).unwrap();
        let ham = legendre(&l).unwrap();
        let mut numeric = ham.clone();
        numeric.h = Hamiltonian::Numeric { velocity_box: vec![(1e-8, 1e3)], slope: vec![ham.momenta[0].frac_partial(VarId::Y(0), FracOrder::classical()).unwrap()] };
        let (x, p) = (0.8, -1.3);
        let y = ham.velocities(0.0, &[x], &[p]).unwrap();
        assert!(y[0] > 0.0);
        assert!((ham.value(0.0, &[x], &[p]).unwrap() - numeric.value(0.0, &[x], &[p]).unwrap()).abs() < 1e-10);
        let cx = ham.dx(0, 0.0, &[x], &[p]).unwrap();
        let nx = numeric.dx(0, 0.0, &[x], &[p]).unwrap();
        assert!((cx - nx).abs() < 1e-2 * cx.abs().max(1.0), "{cx} {nx}");
    }
}
