//! Fixed-step fractional Adams-Bashforth-Moulton solver for Caputo systems
//! `D_t^a y = f(t, y)`, `y(0) = y0`, and the second-order form
//! `D_t^a D_t^a x = F(t, x, D_t^a x)` through the `(x, v)` augmentation.
//!
//! Each step runs one predictor and [`DEFAULT_CORRECTOR_PASSES`] corrector
//! passes. The history sums run over all previous nodes, oldest first, so
//! results are reproducible to the bit.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::fracpoly::{FracPoly, Point, VarId};
use crate::gridops::SampledFunction;
use crate::specfun::{gamma_fn, FracOrder};

/// Upper bound on the number of steps of one solve.
pub const MAX_STEPS: usize = 1_000_000;

/// Corrector passes per step. A single pass leaves a first-step error whose
/// observed order only settles near 1 below `h = 1/512` on `E_a(-t^a)`
/// problems; a second pass removes that transient.
pub const DEFAULT_CORRECTOR_PASSES: usize = 2;

/// Sampled solution on the grid `t_k = k * step`.
///
/// `x` holds the state channels and `v` their Caputo derivatives of the
/// solver order. For a first-order system `v` is the right-hand side along the
/// solution; for the second-order form it is the integrated velocity channel,
/// with `y_i = v_i / Gamma(1+a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub step: f64,
    pub order: FracOrder,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub p: Option<Vec<Vec<f64>>>,
    pub lambda: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// `y_i(t_k) = v_i(t_k) / Gamma(1+a)`.
    pub fn y(&self, i: usize) -> Vec<f64> {
        let g = self.order.gamma_factor();
        self.v[i].iter().map(|v| v / g).collect()
    }

    pub fn x_sampled(&self, i: usize) -> Result<SampledFunction> {
        SampledFunction::new(0.0, self.step, self.x[i].clone())
    }

    pub fn v_sampled(&self, i: usize) -> Result<SampledFunction> {
        SampledFunction::new(0.0, self.step, self.v[i].clone())
    }

    /// Values of every variable at node `k`, keyed for polynomial evaluation
    /// (`t`, `x_i`, `y_i`, `p_i`, `lambda`).
    pub fn point(&self, k: usize) -> Point {
        let g = self.order.gamma_factor();
        let mut pt = Point::new();
        pt.insert(VarId::Time, self.time(k));
        for i in 0..self.dim() {
            pt.insert(VarId::X(i), self.x[i][k]);
            pt.insert(VarId::Y(i), self.v[i][k] / g);
        }
        if let Some(p) = &self.p {
            for (i, ch) in p.iter().enumerate() {
                pt.insert(VarId::P(i), ch[k]);
            }
        }
        if let Some(l) = &self.lambda {
            pt.insert(VarId::Lambda, l[k]);
        }
        pt
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=self.dim()).map(|i| format!("x_{i}")));
        cols.extend((1..=self.v.len()).map(|i| format!("v_{i}")));
        if let Some(p) = &self.p {
            cols.extend((1..=p.len()).map(|i| format!("p_{i}")));
        }
        if self.lambda.is_some() {
            cols.push("lambda".into());
        }
        cols.join(",")
    }

    /// Writes one row per node with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for k in 0..self.len() {
            let mut row = vec![fmt17(self.time(k))];
            row.extend(self.x.iter().map(|c| fmt17(c[k])));
            row.extend(self.v.iter().map(|c| fmt17(c[k])));
            if let Some(p) = &self.p {
                row.extend(p.iter().map(|c| fmt17(c[k])));
            }
            if let Some(l) = &self.lambda {
                row.push(fmt17(l[k]));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A real number in scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Right-hand side function type: `(t, state) -> derivative`.
pub type RhsFn = Arc<dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Right-hand side of a fractional system.
///
/// `Poly` components are polynomials in `t` and the state. For
/// [`solve_alpha_system`] state component `i` is `x_i`. For [`solve_fvf`]
/// the state is `(x, v)` and the polynomials use `x_i` and `y_i`, with `y_i`
/// bound to `v_i` itself (no `Gamma(1+a)` scaling).
#[derive(Clone)]
pub enum RhsSpec {
    Poly(Vec<FracPoly>),
    Func { dim: usize, f: RhsFn },
}

impl std::fmt::Debug for RhsSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RhsSpec::Poly(p) => f.debug_tuple("Poly").field(p).finish(),
            RhsSpec::Func { dim, .. } => f.debug_struct("Func").field("dim", dim).finish_non_exhaustive(),
        }
    }
}

impl RhsSpec {
    pub fn func<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        RhsSpec::Func { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            RhsSpec::Poly(p) => p.len(),
            RhsSpec::Func { dim, .. } => *dim,
        }
    }
}

/// Grid node count for `[0, horizon]` at `step`.
pub fn node_count(horizon: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() || !(horizon > 0.0) || !horizon.is_finite() {
        return Err(FracError::InvalidGrid(format!("need positive finite horizon and step, got {horizon} and {step}")));
    }
    let ratio = horizon / step;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(FracError::InvalidGrid(format!("horizon {horizon} is not a multiple of step {step}")));
    }
    if steps < 2.0 {
        return Err(FracError::TooFewPoints(steps as usize + 1, 3));
    }
    if steps > MAX_STEPS as f64 {
        return Err(FracError::InvalidGrid(format!("{steps} steps exceeds the limit {MAX_STEPS}")));
    }
    Ok(steps as usize + 1)
}

/// Predictor and corrector weights of the fractional ABM scheme.
struct AbmWeights {
    // b[m] = (m+1)^a - m^a
    b: Vec<f64>,
    // c[m] = (m+2)^(a+1) + m^(a+1) - 2 (m+1)^(a+1)
    c: Vec<f64>,
    alpha: f64,
    pred_scale: f64,
    corr_scale: f64,
}

impl AbmWeights {
    fn new(alpha: f64, step: f64, nodes: usize) -> Result<Self> {
        let ap1 = alpha + 1.0;
        let b = (0..nodes).map(|m| (m as f64 + 1.0).powf(alpha) - (m as f64).powf(alpha)).collect();
        let c = (0..nodes)
            .map(|m| {
                let m = m as f64;
                (m + 2.0).powf(ap1) + m.powf(ap1) - 2.0 * (m + 1.0).powf(ap1)
            })
            .collect();
        let ha = step.powf(alpha);
        Ok(AbmWeights { b, c, alpha, pred_scale: ha / gamma_fn(ap1)?, corr_scale: ha / gamma_fn(alpha + 2.0)? })
    }

    // weight of f_0 in the corrector for node n+1
    fn a0(&self, n: usize) -> f64 {
        let n = n as f64;
        n.powf(self.alpha + 1.0) - (n - self.alpha) * (n + 1.0).powf(self.alpha)
    }
}

fn check_finite(values: &[f64], step: usize, t: f64) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FracError::NonFiniteRhs { step, t })
    }
}

/// Integrates `D_t^a y = f(t, y)` with a caller-supplied right-hand side that
/// writes into its output slice. `f` may carry state between calls (for
/// example a warm start for an inner solve); it is called once at `t = 0`,
/// then `1 + passes` times per step.
///
/// Returns the states and the right-hand side values at every node.
pub fn integrate_abm<F>(
    order: FracOrder,
    y0: &[f64],
    horizon: f64,
    step: f64,
    passes: usize,
    mut f: F,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if passes == 0 {
        return Err(FracError::InvalidSetup("at least one corrector pass is required".into()));
    }
    let nodes = node_count(horizon, step)?;
    let d = y0.len();
    if d == 0 {
        return Err(FracError::Dimension { expected: 1, got: 0 });
    }
    check_finite(y0, 0, 0.0)?;
    let w = AbmWeights::new(order.value(), step, nodes)?;
    // node-major storage; transposed at the end
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(nodes);
    let mut fs: Vec<Vec<f64>> = Vec::with_capacity(nodes);
    let mut f0 = vec![0.0; d];
    f(0.0, y0, &mut f0)?;
    check_finite(&f0, 0, 0.0)?;
    ys.push(y0.to_vec());
    fs.push(f0);

    let mut pred = vec![0.0; d];
    let mut corr_hist = vec![0.0; d];
    let mut fp = vec![0.0; d];
    for n in 0..nodes - 1 {
        let t_next = (n + 1) as f64 * step;
        pred.iter_mut().for_each(|v| *v = 0.0);
        corr_hist.iter_mut().for_each(|v| *v = 0.0);
        let a0 = w.a0(n);
        for (j, fj) in fs.iter().enumerate() {
            let bw = w.b[n - j];
            let aw = if j == 0 { a0 } else { w.c[n - j] };
            for i in 0..d {
                pred[i] += bw * fj[i];
                corr_hist[i] += aw * fj[i];
            }
        }
        for i in 0..d {
            pred[i] = y0[i] + w.pred_scale * pred[i];
        }
        check_finite(&pred, n + 1, t_next)?;
        let mut y_next = pred.clone();
        for _ in 0..passes {
            f(t_next, &y_next, &mut fp)?;
            check_finite(&fp, n + 1, t_next)?;
            for i in 0..d {
                y_next[i] = y0[i] + w.corr_scale * (fp[i] + corr_hist[i]);
            }
            check_finite(&y_next, n + 1, t_next)?;
        }
        let mut f_next = vec![0.0; d];
        f(t_next, &y_next, &mut f_next)?;
        check_finite(&f_next, n + 1, t_next)?;
        ys.push(y_next);
        fs.push(f_next);
    }
    Ok((transpose(&ys, d), transpose(&fs, d)))
}

fn transpose(rows: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

fn poly_rhs(polys: &[FracPoly], t: f64, state: &[f64], vars: impl Fn(usize) -> VarId, out: &mut [f64]) -> Result<()> {
    let mut pt = Point::new();
    pt.insert(VarId::Time, t);
    for (k, &s) in state.iter().enumerate() {
        pt.insert(vars(k), s);
    }
    for (o, p) in out.iter_mut().zip(polys) {
        *o = p.eval(&pt)?;
    }
    Ok(())
}

fn check_rhs_dim(rhs: &RhsSpec, expected: usize) -> Result<()> {
    if rhs.dim() != expected {
        return Err(FracError::Dimension { expected, got: rhs.dim() });
    }
    Ok(())
}

fn call_func(f: &RhsFn, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
    let v = f(t, y)?;
    if v.len() != out.len() {
        return Err(FracError::Dimension { expected: out.len(), got: v.len() });
    }
    out.copy_from_slice(&v);
    Ok(())
}

/// Solves `D_t^a y = f(t, y)`, `y(0) = y0` on `[0, horizon]`.
pub fn solve_alpha_system(order: FracOrder, rhs: &RhsSpec, y0: &[f64], horizon: f64, step: f64) -> Result<Trajectory> {
    check_rhs_dim(rhs, y0.len())?;
    let (x, v) = match rhs {
        RhsSpec::Poly(polys) => integrate_abm(order, y0, horizon, step, DEFAULT_CORRECTOR_PASSES, |t, y, out| poly_rhs(polys, t, y, VarId::X, out))?,
        RhsSpec::Func { f, .. } => integrate_abm(order, y0, horizon, step, DEFAULT_CORRECTOR_PASSES, |t, y, out| call_func(f, t, y, out))?,
    };
    Ok(Trajectory { step, order, x, v, p: None, lambda: None })
}

/// Solves `D_t^a D_t^a x = F(t, x, v)` with `v = D_t^a x`, `x(0) = x0`,
/// `v(0) = v0`, through the augmented first-order system for `(x, v)`.
pub fn solve_fvf(order: FracOrder, rhs: &RhsSpec, x0: &[f64], v0: &[f64], horizon: f64, step: f64) -> Result<Trajectory> {
    let n = x0.len();
    if v0.len() != n {
        return Err(FracError::Dimension { expected: n, got: v0.len() });
    }
    check_rhs_dim(rhs, n)?;
    let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let var = |k: usize| if k < n { VarId::X(k) } else { VarId::Y(k - n) };
    let (mut states, _) = match rhs {
        RhsSpec::Poly(polys) => integrate_abm(order, &y0, horizon, step, DEFAULT_CORRECTOR_PASSES, |t, s, out| {
            out[..n].copy_from_slice(&s[n..]);
            poly_rhs(polys, t, s, var, &mut out[n..])
        })?,
        RhsSpec::Func { f, .. } => integrate_abm(order, &y0, horizon, step, DEFAULT_CORRECTOR_PASSES, |t, s, out| {
            out[..n].copy_from_slice(&s[n..]);
            call_func(f, t, s, &mut out[n..])
        })?,
    };
    let v = states.split_off(n);
    Ok(Trajectory { step, order, x: states, v, p: None, lambda: None })
}
