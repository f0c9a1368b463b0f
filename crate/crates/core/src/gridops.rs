//! Discrete left/right Caputo derivatives on uniform grids.
//!
//! Orders in (0, 1) use the L1 scheme: piecewise-linear reconstruction of the
//! sampled function with the kernel `(t - s)^(-a)` integrated exactly, giving
//! `D^a f(t_n) ~ h^(-a) / Gamma(2 - a) * sum_{k<n} b_{n-1-k} (f_{k+1} - f_k)`
//! with `b_j = (j+1)^(1-a) - j^(1-a)`. Orders in (1, 2) apply the L1 scheme
//! of order `a - 1` to a second-order finite-difference first derivative.
//! The value at the lower limit is 0 by convention.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::exec::Exec;
use crate::specfun::{gamma_fn, FracOrder};

/// A scalar function sampled on the uniform grid `start + i * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(FracError::InvalidGrid(format!("step {step} must be positive and finite")));
        }
        if values.len() < 3 {
            return Err(FracError::TooFewPoints(values.len(), 3));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::InvalidGrid(format!("value at index {i} is not finite")));
        }
        Ok(SampledFunction { start, step, values })
    }

    /// Samples `f` at `start + i * step` for `i in 0..count`.
    pub fn from_fn<F: Fn(f64) -> f64>(start: f64, step: f64, count: usize, f: F) -> Result<Self> {
        let values = (0..count).map(|i| f(start + i as f64 * step)).collect();
        Self::new(start, step, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time(i)).collect()
    }

    /// Samples in reverse order, i.e. the function `t -> f(a + b - t)`.
    pub fn reflected(&self) -> SampledFunction {
        let mut values = self.values.clone();
        values.reverse();
        SampledFunction { start: self.start, step: self.step, values }
    }
}

/// Per-axis description of a tensor-product grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn coordinate(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
}

/// Dense samples on a tensor-product grid, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGrid {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

impl MultiGrid {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(FracError::InvalidGrid("no axes".into()));
        }
        for (k, a) in axes.iter().enumerate() {
            if !(a.step > 0.0) || !a.step.is_finite() {
                return Err(FracError::InvalidGrid(format!("axis {k} step {} must be positive", a.step)));
            }
        }
        let expected: usize = axes.iter().map(|a| a.count).product();
        if expected != values.len() {
            return Err(FracError::Dimension { expected, got: values.len() });
        }
        Ok(MultiGrid { axes, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(axes: Vec<Axis>, f: F) -> Result<Self> {
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes.len()];
        let mut point = vec![0.0; axes.len()];
        for _ in 0..total {
            for (k, a) in axes.iter().enumerate() {
                point[k] = a.coordinate(idx[k]);
            }
            values.push(f(&point));
            for k in (0..axes.len()).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].count {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::new(axes, values)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.count).product()
    }

    /// Value at a multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (k, &i) in index.iter().enumerate() {
            flat = flat * self.axes[k].count + i;
        }
        self.values[flat]
    }
}

fn l1_weights(n: usize, alpha: f64) -> Vec<f64> {
    let p = 1.0 - alpha;
    (0..n).map(|j| ((j + 1) as f64).powf(p) - (j as f64).powf(p)).collect()
}

/// L1 approximation at node `n` given the first differences `diffs[k] = f_{k+1} - f_k`.
#[inline]
fn l1_node(diffs: &[f64], weights: &[f64], n: usize, scale: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    // oldest difference first
    for k in 0..n {
        acc += weights[n - 1 - k] * diffs[k];
    }
    scale * acc
}

fn l1_all(values: &[f64], step: f64, alpha: f64, exec: Exec) -> Vec<f64> {
    let n = values.len();
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let weights = l1_weights(n, alpha);
    let scale = step.powf(-alpha) / gamma_fn(2.0 - alpha).expect("Gamma(2-a) finite for a in (0,1)");
    exec.map(n, |i| l1_node(&diffs, &weights, i, scale))
}

/// Second-order finite-difference first derivative (one-sided at both ends).
pub fn first_derivative(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "finite differences need at least 3 points");
    let inv2h = 0.5 / step;
    let mut d = Vec::with_capacity(n);
    d.push((4.0 * (values[1] - values[0]) - (values[2] - values[0])) * inv2h);
    for i in 1..n - 1 {
        d.push((values[i + 1] - values[i - 1]) * inv2h);
    }
    d.push((4.0 * (values[n - 1] - values[n - 2]) - (values[n - 1] - values[n - 3])) * inv2h);
    d
}

fn check_order(order: f64) -> Result<()> {
    if !order.is_finite() || order <= 0.0 || order >= 2.0 {
        return Err(FracError::InvalidOrder(order));
    }
    if order == order.round() {
        return Err(FracError::IntegerOrder(order));
    }
    Ok(())
}

/// Left Caputo derivative of order in (0,1) or (1,2) at every grid node.
pub fn caputo_left(f: &SampledFunction, order: f64) -> Result<SampledFunction> {
    caputo_left_with(f, order, Exec::default())
}

pub fn caputo_left_with(f: &SampledFunction, order: f64, exec: Exec) -> Result<SampledFunction> {
    check_order(order)?;
    if f.len() < 3 {
        return Err(FracError::TooFewPoints(f.len(), 3));
    }
    let values = if order < 1.0 {
        l1_all(&f.values, f.step, order, exec)
    } else {
        let d1 = first_derivative(&f.values, f.step);
        l1_all(&d1, f.step, order - 1.0, exec)
    };
    Ok(SampledFunction { start: f.start, step: f.step, values })
}

/// Right Caputo derivative of order in (0,1), anchored at the upper end of the grid.
///
/// Computed as the left derivative of the reflected samples, read back in
/// reverse; the value at the upper limit is 0.
pub fn caputo_right(f: &SampledFunction, order: f64) -> Result<SampledFunction> {
    caputo_right_with(f, order, Exec::default())
}

pub fn caputo_right_with(f: &SampledFunction, order: f64, exec: Exec) -> Result<SampledFunction> {
    check_order(order)?;
    if order > 1.0 {
        return Err(FracError::InvalidOrder(order));
    }
    let left = caputo_left_with(&f.reflected(), order, exec)?;
    Ok(left.reflected())
}

/// Time derivative of the given order on a sampled channel: the L1 Caputo
/// derivative for fractional orders, second-order finite differences at the
/// classical limit.
pub fn time_derivative(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    if order.is_classical() {
        Ok(SampledFunction { start: f.start, step: f.step, values: first_derivative(&f.values, f.step) })
    } else {
        caputo_left(f, order.value())
    }
}

/// Fractional partial derivative along one axis of a tensor-product grid,
/// with lower limit at the axis start and all other coordinates frozen.
pub fn caputo_partial(f: &MultiGrid, axis: usize, order: FracOrder) -> Result<MultiGrid> {
    caputo_partial_with(f, axis, order, Exec::default())
}

pub fn caputo_partial_with(f: &MultiGrid, axis: usize, order: FracOrder, exec: Exec) -> Result<MultiGrid> {
    let dims = f.axes.len();
    if axis >= dims {
        return Err(FracError::AxisOutOfRange(axis, dims));
    }
    let ax = f.axes[axis];
    if ax.count < 3 {
        return Err(FracError::TooFewPoints(ax.count, 3));
    }
    let stride = f.stride(axis);
    let outer: usize = f.axes[..axis].iter().map(|a| a.count).product();
    let lines = outer * stride;
    let alpha = order.value();
    let weights = if order.is_classical() { Vec::new() } else { l1_weights(ax.count, alpha) };
    let scale = if order.is_classical() {
        0.0
    } else {
        ax.step.powf(-alpha) / gamma_fn(2.0 - alpha)?
    };
    let line_offset = |line: usize| (line / stride) * ax.count * stride + line % stride;
    let derived: Vec<Vec<f64>> = exec.map(lines, |line| {
        let base = line_offset(line);
        let samples: Vec<f64> = (0..ax.count).map(|i| f.values[base + i * stride]).collect();
        if order.is_classical() {
            first_derivative(&samples, ax.step)
        } else {
            let diffs: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
            (0..ax.count).map(|i| l1_node(&diffs, &weights, i, scale)).collect()
        }
    });
    let mut values = vec![0.0; f.values.len()];
    for (line, d) in derived.into_iter().enumerate() {
        let base = line_offset(line);
        for (i, v) in d.into_iter().enumerate() {
            values[base + i * stride] = v;
        }
    }
    Ok(MultiGrid { axes: f.axes.clone(), values })
}
