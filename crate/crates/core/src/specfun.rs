//! Scalar special functions: the gamma function and the one-parameter
//! Mittag-Leffler function `E_a(z) = sum_k z^k / Gamma(1 + a k)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::quad;

/// Largest argument for which `gamma_fn` is finite in double precision.
pub const GAMMA_OVERFLOW_THRESHOLD: f64 = 171.624_376_956_302_7;

/// Evaluation domain of [`mittag_leffler`]: `|z| <= ML_DOMAIN`.
pub const ML_DOMAIN: f64 = 50.0;

/// Largest partial-sum term magnitude tolerated before an alternating series
/// is abandoned for the integral representation.
const ML_CANCELLATION_LIMIT: f64 = 1.0e3;

/// A fractional order `alpha` in the open interval (0, 1).
///
/// The value `alpha = 1` is reachable only through [`FracOrder::classical`],
/// which routes every operator to its integer-order counterpart.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(FracError::InvalidOrder(alpha))
        }
    }

    /// The classical limit `alpha = 1`.
    pub const fn classical() -> Self {
        FracOrder(1.0)
    }

    /// Accepts `(0, 1)` and exactly `1` (classical routing).
    pub fn new_or_classical(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            Ok(Self::classical())
        } else {
            Self::new(alpha)
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `Gamma(1 + alpha)`, the normalisation between `D^alpha x` and `y^(alpha)`.
    pub fn gamma_factor(self) -> f64 {
        gamma_fn(1.0 + self.0).expect("Gamma(1+alpha) is finite for alpha in (0, 1]")
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(zm1: f64) -> f64 {
    let mut x = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (zm1 + i as f64);
    }
    x
}

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// Euler's gamma function.
///
/// Uses the Lanczos approximation (g = 7, nine terms) for `z >= 0.5`, the
/// reflection formula below that, and exact factorials at small positive
/// integers.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(FracError::GammaPole(z));
    }
    if z <= 0.0 && z == z.floor() {
        return Err(FracError::GammaPole(z));
    }
    if z > GAMMA_OVERFLOW_THRESHOLD {
        return Err(FracError::GammaOverflow(z, GAMMA_OVERFLOW_THRESHOLD));
    }
    if z == z.floor() && z <= 30.0 {
        let mut f = 1.0;
        for k in 2..(z as u64) {
            f *= k as f64;
        }
        return Ok(f);
    }
    if z < 0.5 {
        let s = sin_pi(z);
        let g = gamma_fn(1.0 - z)?;
        return Ok(PI / (s * g));
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    let x = lanczos_sum(zm1);
    // split the power so that t^(z-1/2) does not overflow before the exponential damps it
    let half = t.powf(0.5 * (zm1 + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * x)
}

/// Natural logarithm of `|Gamma(z)|` for `z > 0`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(FracError::GammaPole(z));
    }
    if z < 0.5 {
        return Ok((PI / sin_pi(z)).ln() - ln_gamma(1.0 - z)?);
    }
    if z < 20.0 {
        return Ok(gamma_fn(z)?.ln());
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + lanczos_sum(zm1).ln())
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `|z|^k / Gamma(1 + a k)`, or `None` when it overflows.
fn series_term_magnitude(alpha: f64, ln_abs_z: f64, abs_z: f64, k: u32) -> Option<f64> {
    let arg = 1.0 + alpha * k as f64;
    if arg < 160.0 && k < 200 {
        let p = abs_z.powi(k as i32);
        if p.is_finite() {
            return Some(p / gamma_fn(arg).ok()?);
        }
    }
    let ln_term = k as f64 * ln_abs_z - ln_gamma(arg).ok()?;
    if ln_term > 709.0 {
        None
    } else {
        Some(ln_term.exp())
    }
}

enum SeriesOutcome {
    Value(f64),
    Cancellation,
    Overflow,
}

fn ml_series(alpha: f64, z: f64) -> SeriesOutcome {
    let abs_z = z.abs();
    let ln_abs_z = abs_z.ln();
    let negative = z < 0.0;
    let mut acc = CompensatedSum::default();
    acc.add(1.0);
    let mut prev = 1.0_f64;
    let mut k: u32 = 1;
    loop {
        let Some(mag) = series_term_magnitude(alpha, ln_abs_z, abs_z, k) else {
            return SeriesOutcome::Overflow;
        };
        if negative && mag > ML_CANCELLATION_LIMIT {
            return SeriesOutcome::Cancellation;
        }
        let term = if negative && k % 2 == 1 { -mag } else { mag };
        acc.add(term);
        let decreasing = mag < prev;
        if decreasing && mag <= 1e-16 * acc.value().abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if decreasing && mag == 0.0 {
            break;
        }
        prev = mag;
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    let v = acc.value();
    if v.is_finite() {
        SeriesOutcome::Value(v)
    } else {
        SeriesOutcome::Overflow
    }
}

/// `E_a(-x)` for `x > 0` and `0 < a < 1` via the completely monotone integral
/// representation
/// `E_a(-x) = sin(a pi)/(a pi) * int_0^inf exp(-(w x)^(1/a)) / (w^2 + 2 w cos(a pi) + 1) dw`.
fn ml_negative_integral(alpha: f64, x: f64) -> f64 {
    let (s, c) = (alpha * PI).sin_cos();
    let inv_alpha = 1.0 / alpha;
    // substitute u = w x; exp(-u^(1/a)) underflows beyond u^(1/a) = 745
    let upper = 745.0_f64.powf(alpha);
    let f = |u: f64| {
        let w = u / x;
        (-u.powf(inv_alpha)).exp() / (w * w + 2.0 * w * c + 1.0)
    };
    let mut breaks = vec![0.0, upper.min(1.0), upper];
    let peak = x * (-c).max(0.0);
    if peak > 0.0 && peak < upper {
        let width = x * s;
        for b in [peak - 4.0 * width, peak, peak + 4.0 * width] {
            if b > 0.0 && b < upper {
                breaks.push(b);
            }
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let prefactor = s / (alpha * PI * x);
    let tol = 1e-15 / prefactor;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += quad::integrate(f, w[0], w[1], tol, 48).0;
    }
    prefactor * total
}

/// The one-parameter Mittag-Leffler function `E_a(z)` on `|z| <= 50`.
///
/// Positive arguments and mildly negative ones are summed as a compensated
/// power series; strongly negative arguments, where the alternating series
/// cancels catastrophically, use the integral representation instead.
pub fn mittag_leffler(order: FracOrder, z: f64) -> Result<f64> {
    if !z.is_finite() || z.abs() > ML_DOMAIN {
        return Err(FracError::MittagLefflerDomain(z, ML_DOMAIN));
    }
    let alpha = order.value();
    if order.is_classical() {
        return Ok(z.exp());
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    match ml_series(alpha, z) {
        SeriesOutcome::Value(v) => Ok(v),
        SeriesOutcome::Overflow => Err(FracError::MittagLefflerOverflow(z)),
        SeriesOutcome::Cancellation => Ok(ml_negative_integral(alpha, -z)),
    }
}

/// Fractional discount factor `E_a(-rho t^a)`.
pub fn ml_discount(order: FracOrder, rho: f64, t: f64) -> Result<f64> {
    if !(rho >= 0.0) || !(t >= 0.0) {
        return Err(FracError::MittagLefflerDomain(-rho * t, ML_DOMAIN));
    }
    if rho == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    mittag_leffler(order, -rho * t.powf(order.value()))
}
