use fracdyn::fdesolve::solve_fvf;
use fracdyn::fracpoly::{parse_poly, FracPoly, Point, VarId};
use fracdyn::gridops::caputo_left;
use fracdyn::specfun::{gamma_fn, FracOrder};
use fracdyn::variational::{build_fvf, derive_el_discounted, legendre, verify_hamilton, LagrangianSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn samuelson_base(alpha: f64, a: (f64, f64, f64)) -> FracPoly {
    parse_poly(&format!("-{} * y^(2*a) - {} * y^a * x^a - {} * x^(2*a)", a.0, a.1, a.2), Some(alpha)).unwrap()
}

// Four-term closed form of the discounted equation, written out term by term.
fn closed_form_equation(alpha: f64, rho: f64, a: (f64, f64, f64)) -> FracPoly {
    let g1 = gamma_fn(1.0 + alpha).unwrap();
    let g2 = gamma_fn(1.0 + 2.0 * alpha).unwrap();
    FracPoly::from_terms(vec![])
        .add(&FracPoly::monomial(a.0 * g1 * g2, &[(VarId::Y2(0), 1.0)]))
        .add(&FracPoly::monomial(-(a.1 * g1 * g1 + rho * a.0 * g2), &[(VarId::Y(0), alpha)]))
        .add(&FracPoly::monomial(a.1 * g1.powi(3), &[(VarId::Y(0), 1.0)]))
        .add(&FracPoly::monomial(-(a.2 * g2 + rho * a.1 * g1 * g1), &[(VarId::X(0), alpha)]))
}

#[test]
fn discounted_quadratic_lagrangian_reproduces_closed_form() {
    for alpha in [0.3, 0.5, 0.8] {
        for rho in [0.0, 0.3] {
            for a in [(0.5, 1.0, 0.5), (1.0, 0.0, 1.0), (2.0, 0.5, 0.1)] {
                let l = LagrangianSpec::discounted(samuelson_base(alpha, a), rho, 1, FracOrder::new(alpha).unwrap()).unwrap();
                let el = derive_el_discounted(&l).unwrap();
                let got = el.residuals[0].scale(-gamma_fn(1.0 + alpha).unwrap());
                let want = closed_form_equation(alpha, rho, a);
                let diff = got.max_coeff_diff(&want);
                assert!(diff <= 1e-12 * want.max_abs_coeff(), "alpha {alpha} rho {rho} {a:?}: {diff}");
                assert_eq!(got.len(), want.len());
            }
        }
    }
}

// Classical discounted Euler-Lagrange equation of L1 = A y^2 + B x y + C x^2
// with weight exp(-rho t): 2A x'' - 2A rho x' - (rho B + 2C) x = 0.
fn classical_oracle(a: f64, b: f64, c: f64, rho: f64) -> [f64; 3] {
    [2.0 * a, -2.0 * a * rho, -(rho * b + 2.0 * c)]
}

fn classical_coeffs(el: &FracPoly) -> [f64; 3] {
    let pick = |v: VarId| el.coefficient_of(v, 1.0).as_constant().unwrap();
    [pick(VarId::Y2(0)), pick(VarId::Y(0)), pick(VarId::X(0))]
}

#[test]
fn classical_limit_matches_integer_calculus() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-2.0..-0.1), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let rho = rng.gen_range(0.0..1.0);
        let base = parse_poly(&format!("{a} * y^2 + {b} * x * y + {c} * x^2"), None).unwrap();
        let l = LagrangianSpec::discounted(base, rho, 1, FracOrder::classical()).unwrap();
        let got = classical_coeffs(&derive_el_discounted(&l).unwrap().residuals[0]);
        let want = classical_oracle(a, b, c, rho);
        // same equation up to a common factor
        let k = got[0] / want[0];
        for m in 0..3 {
            assert!((got[m] - k * want[m]).abs() <= 1e-12 * (1.0 + want[m].abs()), "{got:?} vs {want:?}");
        }
    }
}

fn hamilton_residual(h: f64) -> f64 {
    let base = parse_poly("-0.5 * y^2 - 0.3 * x * y - 0.5 * x^2", None).unwrap();
    let l = LagrangianSpec::new(base, 1, FracOrder::classical()).unwrap();
    let fvf = build_fvf(&l).unwrap();
    let mut tr = solve_fvf(FracOrder::classical(), &fvf.rhs(), &[1.0], &[0.2], 1.0, h).unwrap();
    let ham = legendre(&l).unwrap();
    ham.attach_momenta(&mut tr).unwrap();
    let report = verify_hamilton(&tr, &ham).unwrap();
    println!("h = {h}: {}", report.to_json());
    report.max()
}

#[test]
fn hamilton_residuals_shrink() {
    let r1 = hamilton_residual(1.0 / 256.0);
    let r2 = hamilton_residual(1.0 / 512.0);
    let r3 = hamilton_residual(1.0 / 1024.0);
    assert!(r2 <= 1e-2);
    assert!(r1 / r2 >= 1.8 && r2 / r3 >= 1.8, "{r1} {r2} {r3}");
}

#[test]
fn equilibrium_has_zero_hamilton_residual() {
    let base = parse_poly("-0.5 * y^2 - 0.3 * x * y - 0.5 * x^2", None).unwrap();
    let l = LagrangianSpec::new(base, 1, FracOrder::classical()).unwrap();
    let fvf = build_fvf(&l).unwrap();
    let mut tr = solve_fvf(FracOrder::classical(), &fvf.rhs(), &[0.0], &[0.0], 1.0, 1.0 / 64.0).unwrap();
    let ham = legendre(&l).unwrap();
    ham.attach_momenta(&mut tr).unwrap();
    assert_eq!(verify_hamilton(&tr, &ham).unwrap().max(), 0.0);
}

// Euler-Lagrange residual along a numerical solution of the vector field,
// with the second velocity taken from the sampled velocity channel.
fn el_residual(h: f64, alpha: f64) -> f64 {
    let order = FracOrder::new(alpha).unwrap();
    let l = LagrangianSpec::discounted(samuelson_base(alpha, (1.0, 0.2, 0.1)), 0.1, 1, order).unwrap();
    let el = derive_el_discounted(&l).unwrap();
    let fvf = build_fvf(&l).unwrap();
    let tr = solve_fvf(order, &fvf.rhs(), &[1.0], &[0.5], 0.5, h).unwrap();
    let g = order.gamma_factor();
    let dv = caputo_left(&tr.v_sampled(0).unwrap(), alpha).unwrap();
    let skip = (0.1 / h) as usize;
    let mut worst = 0.0f64;
    for k in skip..tr.len() {
        let pt: Point = [(VarId::X(0), tr.x[0][k]), (VarId::Y(0), tr.v[0][k] / g), (VarId::Y2(0), dv.values()[k] / (g * g))].into_iter().collect();
        worst = worst.max(el.residuals[0].eval(&pt).unwrap().abs());
    }
    worst
}

#[test]
fn euler_lagrange_residual_vanishes_under_refinement() {
    let r1 = el_residual(1.0 / 128.0, 0.8);
    let r2 = el_residual(1.0 / 256.0, 0.8);
    let r3 = el_residual(1.0 / 512.0, 0.8);
    println!("{r1:e} {r2:e} {r3:e}");
    assert!(r2 < r1 && r3 < r2);
}
