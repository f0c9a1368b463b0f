//! Pointwise geometry of the fractional jet bundle: duality pairings, the
//! canonical structures, vector-field conditions, Cartan forms and
//! coordinate changes.
//!
//! Tangent vectors are coefficient arrays in the operator basis
//! `(D_t^a, D_{x_i}^a, D_{y_i}^a)` and 1-forms are coefficient arrays in the
//! coframe `(d(t^a), d(x_i^a), d(y_i^a))`. The pairing of the coframe with the
//! basis is `d(u^a)(D_w^a) = D_w^a(u^a) = Gamma(1+a) delta_uw`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::exec::Exec;
use crate::fracpoly::{time_partial, FracPoly, Point, VarId};
use crate::specfun::FracOrder;
use crate::variational::{build_fvf, with_discount, LagrangianSpec};

/// A point `(t, x, y)` of the jet bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl JetPoint {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(FracError::Dimension { expected: x.len(), got: y.len() });
        }
        if !(t >= 0.0) || !t.is_finite() || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(FracError::InvalidSetup("jet point coordinates must be finite with t >= 0".into()));
        }
        Ok(JetPoint { t, x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn to_point(&self) -> Point {
        let mut pt = Point::new();
        pt.insert(VarId::Time, self.t);
        for i in 0..self.n() {
            pt.insert(VarId::X(i), self.x[i]);
            pt.insert(VarId::Y(i), self.y[i]);
        }
        pt
    }
}

/// Coefficients of a tangent vector in `(D_t^a, D_{x_i}^a, D_{y_i}^a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentRep {
    pub ct: f64,
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
}

impl TangentRep {
    pub fn new(ct: f64, cx: Vec<f64>, cy: Vec<f64>) -> Self {
        TangentRep { ct, cx, cy }
    }

    pub fn zero(n: usize) -> Self {
        TangentRep { ct: 0.0, cx: vec![0.0; n], cy: vec![0.0; n] }
    }

    /// The basis vector `D_{y_i}^a`.
    pub fn vertical(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.cy[i] = 1.0;
        v
    }

    pub fn n(&self) -> usize {
        self.cx.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.cx.iter().chain(&self.cy).fold(self.ct.abs(), |m, v| m.max(v.abs()))
    }
}

/// Table of `(1/Gamma(1+a)) d(u^a)(D_w^a)` over `u, w` in `(t, x_1.., y_1..)`,
/// each entry computed as a Caputo partial of `u^a` in `w`.
pub fn pairing_table(order: FracOrder, n: usize) -> Vec<Vec<f64>> {
    let a = order.value();
    let mut vars = vec![VarId::Time];
    vars.extend((0..n).map(VarId::X));
    vars.extend((0..n).map(VarId::Y));
    let g = order.gamma_factor();
    vars.iter()
        .map(|&u| {
            let form = FracPoly::monomial(1.0, &[(u, a)]);
            vars.iter()
                .map(|&w| {
                    let d = form.frac_partial(w, order).expect("power rule on a positive exponent");
                    d.as_constant().expect("u^a differentiates to a constant") / g
                })
                .collect()
        })
        .collect()
}

/// Outcome of the vector-field test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvfCheck {
    pub is_fvf: bool,
    /// `(1/Gamma(1+a)) d(t^a)(v) - 1`.
    pub time_defect: f64,
    /// `theta^i(v)` for each `i`.
    pub theta_defects: Vec<f64>,
}

/// Tolerance of [`check_fvf`] on each defect.
pub const FVF_TOL: f64 = 1e-12;

fn theta(v: &TangentRep, p: &JetPoint) -> Vec<f64> {
    // (1/G)(d(x^a)(v) - y d(t^a)(v)) = c_x - y c_t
    v.cx.iter().zip(&p.y).map(|(cx, y)| cx - y * v.ct).collect()
}

/// Tests `d(t^a)(v) = Gamma(1+a)` (unit after normalization) and
/// `theta^i(v) = 0`, which together force `v = D_t + y_i D_{x_i} + F^i D_{y_i}`.
pub fn check_fvf(v: &TangentRep, p: &JetPoint, order: FracOrder) -> FvfCheck {
    let g = order.gamma_factor();
    let time_defect = (g * v.ct) / g - 1.0;
    let theta_defects = theta(v, p);
    let scale = 1.0 + p.y.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let is_fvf = time_defect.abs() <= FVF_TOL && theta_defects.iter().all(|d| d.abs() <= FVF_TOL * scale);
    FvfCheck { is_fvf, time_defect, theta_defects }
}

/// Images of `v` under `theta_1 = d(t^a) (D_t + y_i D_{x_i})`,
/// `theta_2 = theta^i D_{x_i}` and `S = theta^i D_{y_i}`.
pub fn apply_structures(v: &TangentRep, p: &JetPoint, order: FracOrder) -> [TangentRep; 3] {
    let n = v.n();
    let dt = order.gamma_factor() * v.ct;
    let th = theta(v, p);
    [
        TangentRep::new(dt, p.y.iter().map(|y| dt * y).collect(), vec![0.0; n]),
        TangentRep::new(0.0, th.clone(), vec![0.0; n]),
        TangentRep::new(0.0, vec![0.0; n], th),
    ]
}

/// Coefficients of the Cartan 2-form
/// `omega = A_i d(t^a)^d(x_i^a) + B_i d(t^a)^d(y_i^a) + A_ij d(x_i^a)^d(x_j^a) + B_ij d(x_i^a)^d(y_j^a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalEval {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a2: Vec<Vec<f64>>,
    pub b2: Vec<Vec<f64>>,
}

/// Symbolic Cartan coefficients:
/// `A_i = D_t D_{y_i} L + y_j D_{x_i} D_{y_j} L - D_{x_i} L`,
/// `B_i = y_j D_{y_i} D_{y_j} L`, `A_ij = D_{x_i} D_{y_j} L`,
/// `B_ij = -D_{y_j} D_{y_i} L`, for the full (possibly discounted) Lagrangian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanPolys {
    pub a: Vec<FracPoly>,
    pub b: Vec<FracPoly>,
    pub a2: Vec<Vec<FracPoly>>,
    pub b2: Vec<Vec<FracPoly>>,
}

pub fn cartan_polys(l: &LagrangianSpec) -> Result<CartanPolys> {
    let n = l.n;
    let ord = l.order;
    let full = l.full();
    let dy: Vec<FracPoly> = (0..n).map(|i| full.frac_partial(VarId::Y(i), ord)).collect::<Result<_>>()?;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut a2 = vec![vec![FracPoly::zero(); n]; n];
    let mut b2 = vec![vec![FracPoly::zero(); n]; n];
    for i in 0..n {
        let mut ai = time_partial(&dy[i], ord, l.rho)?.sub(&full.frac_partial(VarId::X(i), ord)?);
        let mut bi = FracPoly::zero();
        for j in 0..n {
            let xy = dy[j].frac_partial(VarId::X(i), ord)?;
            ai = ai.add(&xy.mul_var_power(VarId::Y(j), 1.0));
            bi = bi.add(&dy[j].frac_partial(VarId::Y(i), ord)?.mul_var_power(VarId::Y(j), 1.0));
            a2[i][j] = xy;
            b2[i][j] = dy[i].frac_partial(VarId::Y(j), ord)?.scale(-1.0);
        }
        a.push(ai);
        b.push(bi);
    }
    Ok(CartanPolys { a, b, a2, b2 })
}

impl CartanPolys {
    pub fn eval(&self, p: &JetPoint, order: FracOrder, rho: Option<f64>) -> Result<CanonicalEval> {
        let pt = with_discount(&p.to_point(), order, rho)?;
        let ev = |v: &[FracPoly]| v.iter().map(|q| q.eval(&pt)).collect::<Result<Vec<_>>>();
        Ok(CanonicalEval {
            a: ev(&self.a)?,
            b: ev(&self.b)?,
            a2: self.a2.iter().map(|r| ev(r)).collect::<Result<_>>()?,
            b2: self.b2.iter().map(|r| ev(r)).collect::<Result<_>>()?,
        })
    }
}

pub fn cartan_coeffs(l: &LagrangianSpec, p: &JetPoint) -> Result<CanonicalEval> {
    cartan_polys(l)?.eval(p, l.order, l.rho)
}

/// Coefficients of the Cartan 1-form `P d(t^a) + Q_i d(x_i^a)` with
/// `P = L - y_i D_{y_i} L` and `Q_i = D_{y_i} L`, at a point.
pub fn cartan_one_form(l: &LagrangianSpec, p: &JetPoint) -> Result<(f64, Vec<f64>)> {
    let pt = with_discount(&p.to_point(), l.order, l.rho)?;
    let full = l.full();
    let q = (0..l.n).map(|i| full.frac_partial(VarId::Y(i), l.order)?.eval(&pt)).collect::<Result<Vec<_>>>()?;
    let lv = full.eval(&pt)?;
    let pv = lv - p.y.iter().zip(&q).map(|(y, q)| y * q).sum::<f64>();
    Ok((pv, q))
}

/// Interior product `i_v omega` as coefficients `(dt, dx_k, dy_k)`.
pub fn contract(omega: &CanonicalEval, v: &TangentRep, order: FracOrder) -> TangentRep {
    let n = v.n();
    let g = order.gamma_factor();
    // pairings of the coframe with v
    let (pt, px, py) = (g * v.ct, v.cx.iter().map(|c| g * c).collect::<Vec<_>>(), v.cy.iter().map(|c| g * c).collect::<Vec<_>>());
    let mut out = TangentRep::zero(n);
    // i_v(a ^ b) = a(v) b - b(v) a
    for i in 0..n {
        out.cx[i] += omega.a[i] * pt;
        out.ct -= omega.a[i] * px[i];
        out.cy[i] += omega.b[i] * pt;
        out.ct -= omega.b[i] * py[i];
        for j in 0..n {
            out.cx[j] += omega.a2[i][j] * px[i];
            out.cx[i] -= omega.a2[i][j] * px[j];
            out.cy[j] += omega.b2[i][j] * px[i];
            out.cx[i] -= omega.b2[i][j] * py[j];
        }
    }
    out
}

/// The vector field `D_t + y_i D_{x_i} + M^i D_{y_i}` of a regular
/// Lagrangian at a point.
pub fn lagrangian_vector_field(l: &LagrangianSpec, p: &JetPoint) -> Result<TangentRep> {
    let m = build_fvf(l)?.m_at(&p.to_point())?;
    Ok(TangentRep::new(1.0, p.y.clone(), m.iter().copied().collect()))
}

/// Max-norm of `i_Gamma omega_L` at a point, with `Gamma` the vector field
/// of the Lagrangian.
pub fn interior_product_residual(l: &LagrangianSpec, p: &JetPoint) -> Result<f64> {
    let v = lagrangian_vector_field(l, p)?;
    Ok(contract(&cartan_coeffs(l, p)?, &v, l.order).max_abs())
}

/// Positive scalings composed with a permutation:
/// `xbar_i = c_{s(i)} x_{s(i)}` with `c > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateChange {
    perm: Vec<usize>,
    scale: Vec<f64>,
}

impl CoordinateChange {
    pub fn new(perm: Vec<usize>, scale: Vec<f64>) -> Result<Self> {
        let n = perm.len();
        if scale.len() != n {
            return Err(FracError::Dimension { expected: n, got: scale.len() });
        }
        let mut seen = vec![false; n];
        for &s in &perm {
            if s >= n || seen[s] {
                return Err(FracError::Unsupported("coordinate change must permute the coordinates".into()));
            }
            seen[s] = true;
        }
        if scale.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(FracError::Unsupported("coordinate change scalings must be positive".into()));
        }
        Ok(CoordinateChange { perm, scale })
    }

    pub fn identity(n: usize) -> Self {
        CoordinateChange { perm: (0..n).collect(), scale: vec![1.0; n] }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        for (i, &s) in self.perm.iter().enumerate() {
            perm[s] = i;
        }
        let scale = (0..n).map(|m| 1.0 / self.scale[self.perm[m]]).collect();
        CoordinateChange { perm, scale }
    }

    /// `(xbar_i)^a` as a polynomial in the old coordinates.
    fn new_power(&self, i: usize, a: f64) -> FracPoly {
        let s = self.perm[i];
        FracPoly::monomial(self.scale[s].powf(a), &[(VarId::X(s), a)])
    }

    /// `J^i_j = (1/Gamma(1+a)) D_{x_j}^a (xbar_i)^a` at `x`.
    pub fn jacobian(&self, x: &[f64], order: FracOrder) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        if x.len() != n {
            return Err(FracError::Dimension { expected: n, got: x.len() });
        }
        if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
            return Err(FracError::InvalidSetup(format!("coordinate change needs x_{} > 0, got {}", i + 1, x[i])));
        }
        let pt: Point = x.iter().enumerate().map(|(i, &v)| (VarId::X(i), v)).collect();
        let g = order.gamma_factor();
        (0..n)
            .map(|i| {
                let p = self.new_power(i, order.value());
                (0..n).map(|j| Ok(p.frac_partial(VarId::X(j), order)?.eval(&pt)? / g)).collect()
            })
            .collect()
    }
}

/// Applies a coordinate change: `xbar` by substitution, `ybar = J y`.
pub fn transform_jet(change: &CoordinateChange, p: &JetPoint, order: FracOrder) -> Result<JetPoint> {
    let j = change.jacobian(&p.x, order)?;
    let n = change.n();
    let x = (0..n).map(|i| change.scale[change.perm[i]] * p.x[change.perm[i]]).collect();
    let y = j.iter().map(|row| row.iter().zip(&p.y).map(|(a, b)| a * b).sum()).collect();
    JetPoint::new(p.t, x, y)
}

/// JSON report of a pointwise check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Box for random jet points: `t` in `t_range`, every `x_i` and `y_i` in
/// `coord_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub t_range: (f64, f64),
    pub coord_range: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox { t_range: (0.05, 2.0), coord_range: (0.05, 3.0) }
    }
}

/// Random point number `index` of the stream seeded by `seed`. Each index has
/// its own ChaCha stream, so samples do not depend on evaluation order.
pub fn random_point(seed: u64, index: u64, n: usize, sbox: SampleBox) -> JetPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let t = rng.gen_range(sbox.t_range.0..sbox.t_range.1);
    let (lo, hi) = sbox.coord_range;
    let x = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let y = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    JetPoint { t, x, y }
}

/// Tolerance of the interior-product annihilation check.
pub const INTERIOR_PRODUCT_TOL: f64 = 1e-10;

/// Interior-product residual over `points` seeded random points.
pub fn interior_product_sweep(l: &LagrangianSpec, points: usize, seed: u64, sbox: SampleBox, exec: Exec) -> Result<VerificationReport> {
    let cartan = cartan_polys(l)?;
    let fvf = build_fvf(l)?;
    let residuals = exec.try_map(points, |k| -> Result<f64> {
        let p = random_point(seed, k as u64, l.n, sbox);
        let m = fvf.m_at(&p.to_point())?;
        let v = TangentRep::new(1.0, p.y.clone(), m.iter().copied().collect());
        Ok(contract(&cartan.eval(&p, l.order, l.rho)?, &v, l.order).max_abs())
    })?;
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    let mean_residual = if points == 0 { 0.0 } else { residuals.iter().sum::<f64>() / points as f64 };
    Ok(VerificationReport {
        check: "interior_product".into(),
        points,
        max_residual,
        mean_residual,
        pass: max_residual <= INTERIOR_PRODUCT_TOL,
    })
}

/// Largest deviation of the pairing table from the identity.
pub fn pairing_report(order: FracOrder, n: usize) -> VerificationReport {
    let table = pairing_table(order, n);
    let (mut dev, mut sum) = (0.0f64, 0.0);
    for (i, row) in table.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let e = (v - if i == j { 1.0 } else { 0.0 }).abs();
            dev = dev.max(e);
            sum += e;
        }
    }
    let points = table.len() * table.len();
    VerificationReport { check: "pairing".into(), points, max_residual: dev, mean_residual: sum / points.max(1) as f64, pass: dev <= 1e-12 }
}
