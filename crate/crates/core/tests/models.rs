use fracdyn::error::FracError;
use fracdyn::fracpoly::{parse_poly, FracPoly, Point, VarId};
use fracdyn::models::fixtures::*;
use fracdyn::models::*;
use fracdyn::specfun::{gamma_fn, FracOrder};

fn ord(a: f64) -> FracOrder {
    FracOrder::new_or_classical(a).unwrap()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn samuelson_residual_shrinks() {
    let p = SamuelsonParams::new(0.5, 0.2, 0.5, 0.3, ord(0.7)).unwrap();
    let res: Vec<f64> = [64.0, 128.0, 256.0]
        .iter()
        .map(|n| {
            let tr = samuelson_simulate(&p, 1.0, 0.5, 1.0, 1.0 / n).unwrap();
            samuelson_residual(&p, &tr, 0.1).unwrap().max
        })
        .collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{res:?}");
    }
}

#[test]
fn samuelson_approaches_classical_solution() {
    let base = |a: f64| SamuelsonParams::new(0.5, 0.2, 0.5, 0.3, ord(a)).unwrap();
    let step = 1.0 / 256.0;
    let classical = samuelson_simulate(&base(1.0), 1.0, 0.5, 1.0, step).unwrap();
    let dist: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&a| max_rel(&samuelson_simulate(&base(a), 1.0, 0.5, 1.0, step).unwrap().x[0], &classical.x[0]))
        .collect();
    assert!(dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
    assert!(dist[2] < 1e-2, "{dist:?}");
}

#[test]
fn samuelson_momenta_follow_the_velocity_partial() {
    let p = SamuelsonParams::new(0.5, 0.2, 0.5, 0.0, ord(0.5)).unwrap();
    let tr = samuelson_simulate(&p, 1.0, 0.5, 0.5, 1.0 / 64.0).unwrap();
    let g = ord(0.5).gamma_factor();
    let mom = &tr.p.as_ref().unwrap()[0];
    for k in 0..tr.len() {
        let (x, y) = (tr.x[0][k], tr.v[0][k] / g);
        // D_y^a of -a1 y^(2a) - a2 y^a x^a with a = 1/2
        let want = -0.5 * gamma_fn(2.0).unwrap() / gamma_fn(1.5).unwrap() * y.sqrt() - 0.2 * g * x.sqrt();
        assert!((mom[k] - want).abs() < 1e-12);
    }
}

#[test]
fn homogeneity_of_monomials() {
    let a = ord(0.6);
    let g = a.gamma_factor();
    let h = |e: f64| power_factor(a, e).unwrap();
    let p = parse_poly("2 * x_1^0.8 * x_2^0.3 * x_3^1.4", None).unwrap();
    match check_homogeneity(&p, a).unwrap() {
        Homogeneity::Degree(r) => assert!((r - g * (h(0.8) + h(0.3) + h(1.4))).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let q = parse_poly("x_1^0.5", None).unwrap();
    let s = parse_poly("x_2^2.5", None).unwrap();
    let deg = |p: &FracPoly| match check_homogeneity(p, a).unwrap() {
        Homogeneity::Degree(r) => r,
        other => panic!("{other:?}"),
    };
    assert!((deg(&q.mul(&s)) - deg(&q) - deg(&s)).abs() < 1e-12);
    let mixed = parse_poly("x_1^0.5 + x_1^1.5", None).unwrap();
    assert!(matches!(check_homogeneity(&mixed, a).unwrap(), Homogeneity::Defect(d) if !d.is_zero()));
    // Euler's theorem at the classical order
    let cd = parse_poly("x_1^0.3 * x_2^0.7", None).unwrap();
    assert!((deg_at(&cd, FracOrder::classical()) - 1.0).abs() < 1e-14);
}

fn deg_at(p: &FracPoly, a: FracOrder) -> f64 {
    match check_homogeneity(p, a).unwrap() {
        Homogeneity::Degree(r) => r,
        other => panic!("{other:?}"),
    }
}

#[test]
fn fixtures_have_the_declared_degrees() {
    for a in [0.5, 0.8, 1.0] {
        let o = ord(a);
        let spec = homogeneous_investment(o, 0.05).unwrap();
        let r = deg_at(&spec.l1, o);
        assert!((r - 2.0 * o.gamma_factor() * power_factor(o, 0.75).unwrap()).abs() < 1e-10);
        assert!((deg_at(&spec.phi, o) - 1.0).abs() < 1e-10);
        let neg = nonhomogeneous_investment(o, 0.05).unwrap();
        assert!(matches!(check_homogeneity(&neg.l1, o).unwrap(), Homogeneity::Defect(_)));
    }
}

#[test]
fn derived_conditions_for_monomial_model() {
    let a = ord(0.5);
    let l1 = parse_poly("x_1^0.8 * x_2^0.3 * x_3^0.4", None).unwrap();
    let phi = parse_poly("x_1^0.5 * x_2^0.3 * x_3^0.2", None).unwrap();
    let spec = InvestmentSpec::new(l1.clone(), phi.clone(), 0.1, a).unwrap();
    let el = investment_derive(&spec).unwrap();
    let pt: Point = [
        (VarId::X(0), 1.3),
        (VarId::X(1), 0.7),
        (VarId::X(2), 1.1),
        (VarId::Y(0), 0.4),
        (VarId::Y2(0), 0.2),
        (VarId::Lambda, 0.9),
        (VarId::DLambda, -0.3),
        (VarId::Discount, 0.8),
    ]
    .into_iter()
    .collect();
    let gm = |z: f64| gamma_fn(z).unwrap();
    // D_v^a v^e = Gamma(1+e)/Gamma(1+e-a) v^(e-a)
    let c = |e: f64| gm(1.0 + e) / gm(1.0 + e - 0.5);
    let (k, i, n) = (1.3f64, 0.7f64, 1.1f64);
    let l = |ek: f64, ei: f64, en: f64| k.powf(ek) * i.powf(ei) * n.powf(en);
    let d_l = [c(0.8) * l(0.3, 0.3, 0.4), c(0.3) * l(0.8, -0.2, 0.4), c(0.4) * l(0.8, 0.3, -0.1)];
    let d_phi = [c(0.5) * l(0.0, 0.3, 0.2), c(0.3) * l(0.5, -0.2, 0.2), c(0.2) * l(0.5, 0.3, -0.3)];
    let want = [0.8 * d_l[0] + 0.9 * d_phi[0] - 0.3, 0.8 * d_l[1] + 0.9 * d_phi[1], 0.8 * d_l[2] + 0.9 * d_phi[2]];
    for (r, w) in el.residuals.iter().zip(want) {
        let got = r.eval(&pt).unwrap();
        assert!((got - w).abs() < 1e-12 * w.abs().max(1.0), "{got} {w}");
    }
    let strict = investment_derive(&spec.clone().strict(true)).unwrap();
    let got = strict.residuals[1].eval(&pt).unwrap();
    assert!((got - (0.8 * d_l[1] + 0.9 * d_phi[0])).abs() < 1e-12);
}

#[test]
fn classical_conditions_match_ordinary_calculus() {
    let l1 = parse_poly("x_1^0.5 * x_3^0.5 - 0.5 * x_2^2", None).unwrap();
    let phi = parse_poly("x_2 - 0.1 * x_1", None).unwrap();
    let spec = InvestmentSpec::new(l1, phi, 0.0, FracOrder::classical()).unwrap();
    let el = investment_derive(&spec).unwrap();
    let (k, i, n, lam, dlam, e) = (2.0f64, 0.3f64, 0.5f64, 1.2, 0.4, 1.0);
    let pt: Point = [
        (VarId::X(0), k),
        (VarId::X(1), i),
        (VarId::X(2), n),
        (VarId::Y(0), 0.0),
        (VarId::Y2(0), 0.0),
        (VarId::Lambda, lam),
        (VarId::DLambda, dlam),
        (VarId::Discount, e),
    ]
    .into_iter()
    .collect();
    let want = [0.5 * (n / k).sqrt() - 0.1 * lam + dlam, -i + lam, 0.5 * (k / n).sqrt()];
    for (r, w) in el.residuals.iter().zip(want) {
        assert!((r.eval(&pt).unwrap() - w).abs() < 1e-12);
    }
}

#[test]
fn relation_holds_on_homogeneous_fixture() {
    let (k0, i0, n0) = INITIAL_STATE;
    for a in [0.5, 0.8] {
        let spec = homogeneous_investment(ord(a), 0.05).unwrap();
        let res: Vec<f64> = [128.0, 512.0]
            .iter()
            .map(|n| investment_relation_residual(&investment_simulate(&spec, k0, i0, n0, 1.0, 1.0 / n).unwrap(), &spec).unwrap())
            .collect();
        assert!(res[1] <= 1e-2 && res[1] < res[0], "{a}: {res:?}");
    }
}

#[test]
fn relation_fails_without_homogeneity_or_with_the_strict_condition() {
    let (k0, i0, n0) = INITIAL_STATE;
    let a = ord(0.8);
    let neg = nonhomogeneous_investment(a, 0.05).unwrap();
    let tr = investment_simulate(&neg, k0, i0, n0, 1.0, 1.0 / 256.0).unwrap();
    assert!(investment_relation_residual(&tr, &neg).unwrap() > 1e-1);
    let undeclared = InvestmentSpec { r: None, ..neg };
    assert!(matches!(investment_relation_residual(&tr, &undeclared), Err(FracError::Homogeneity(_))));
    let strict = homogeneous_investment(a, 0.05).unwrap().strict(true);
    let tr = investment_simulate(&strict, k0, i0, n0, 1.0, 1.0 / 256.0).unwrap();
    assert!(investment_relation_residual(&tr, &strict).unwrap() > 1e-1);
}

#[test]
fn classical_run_matches_reference_integration() {
    // at the classical order the fixture is
    // L1 = 0.05 K^0.75 N^0.75 - 0.5 N^1.5 - 0.5 I^1.5, phi = I - 0.1 K,
    // so I = (lambda / (0.75 E))^2, N = 0.05^(4/3) K and
    // K' = I - 0.1 K, lambda' = 0.1 lambda - 0.001875 E
    let rho = 0.05;
    let spec = homogeneous_investment(FracOrder::classical(), rho).unwrap();
    let (k0, i0, n0) = INITIAL_STATE;
    let step = 1.0 / 256.0;
    let tr = investment_simulate(&spec, k0, i0, n0, 1.0, step).unwrap();
    let f = |t: f64, s: [f64; 2]| {
        let e = (-rho * t).exp();
        let inv = (s[1] / (0.75 * e)).powi(2);
        [inv - 0.1 * s[0], 0.1 * s[1] - 0.001875 * e]
    };
    let mut s = [k0, 0.75 * i0.sqrt()];
    let sub = 64;
    let hh = step / sub as f64;
    let mut k_ref = vec![s[0]];
    let mut l_ref = vec![s[1]];
    for n in 0..tr.len() - 1 {
        for m in 0..sub {
            let t = (n * sub + m) as f64 * hh;
            let add = |a: [f64; 2], b: [f64; 2], c: f64| [a[0] + c * b[0], a[1] + c * b[1]];
            let k1 = f(t, s);
            let k2 = f(t + hh / 2.0, add(s, k1, hh / 2.0));
            let k3 = f(t + hh / 2.0, add(s, k2, hh / 2.0));
            let k4 = f(t + hh, add(s, k3, hh));
            s = [0, 1].map(|j| s[j] + hh / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        }
        k_ref.push(s[0]);
        l_ref.push(s[1]);
    }
    assert!(max_rel(&tr.x[0], &k_ref) < 1e-2);
    assert!(max_rel(tr.lambda.as_ref().unwrap(), &l_ref) < 1e-2);
    let n_ref: Vec<f64> = k_ref.iter().map(|k| 0.05f64.powf(4.0 / 3.0) * k).collect();
    assert!(max_rel(&tr.x[2], &n_ref) < 1e-2);
}

#[test]
fn steady_state_is_stationary() {
    for a in [0.5, 0.8, 1.0] {
        let spec = steady_state_investment(ord(a)).unwrap();
        let z = investment_steady_state(&spec, STEADY_STATE_GUESS).unwrap();
        let tr = investment_simulate(&spec, z[0], z[1], z[2], 1.0, 1.0 / 64.0).unwrap();
        let lam = tr.lambda.as_ref().unwrap();
        for k in 0..tr.len() {
            assert!((tr.x[0][k] - z[0]).abs() < 1e-8 * z[0]);
            assert!((tr.x[1][k] - z[1]).abs() < 1e-8 * z[1]);
            assert!((lam[k] - z[3]).abs() < 1e-8 * z[3]);
        }
    }
}

#[test]
fn leaving_the_orthant_is_an_error() {
    let (k0, i0, n0) = INITIAL_STATE;
    let spec = homogeneous_investment(ord(0.3), 0.05).unwrap();
    match investment_simulate(&spec, k0, i0, n0, 1.0, 1.0 / 512.0) {
        Err(FracError::OrthantExit { t, .. }) => assert!(t > 0.0 && t < 1.0),
        other => panic!("{other:?}"),
    }
}
