//! Cross-module checks: catalog covariance, classification of the catalog,
//! grid lifting, and the worked examples of each module.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wavered::ansatz::{
    catalog, catalog_in, classify_case, compute_invariants, depends_only_on_yz, verify_reduction, AnsatzSpec, Case,
    ClassifyConfig, Dependence, LevelSetTest,
};
use wavered::expr::eval::{eval, eval_f64, eval_jet};
use wavered::expr::{is_zero, parse, Builtin, Expr, OpaqueImpls, SamplingBox, ZeroTest, COORDS};
use wavered::lift::{lift_grid, LiftConfig, GRID_TOL};
use wavered::minkowski::{project, Direction, Frame, FourVector};
use wavered::solvers::{
    kink_solution, solve_radial_ode, solve_wave_1p1, Boundary, InitialData, RadialOdeProblem, Rhs, WaveProblem,
};

#[test]
fn sqrt_gradient_matches_finite_difference() {
    let z = parse("sqrt(x1^2 + x2^2 + x3^2)").unwrap();
    let d = z.diff("x1");
    let expected = parse("x1/sqrt(x1^2 + x2^2 + x3^2)").unwrap();
    let dom = SamplingBox::spacetime().excluding(wavered::expr::Exclusion::tube(z.clone()));
    assert!(is_zero(&(d.clone() - expected), &dom, &OpaqueImpls::new(), ZeroTest::default()).unwrap().is_zero());
    let at = |x1: f64| eval_f64(&z, &[("x1", x1), ("x2", 2.0), ("x3", 2.0)]).unwrap();
    let fd = (at(1.0 + 1e-6) - at(1.0 - 1e-6)) / 2e-6;
    let exact = eval_f64(&d, &[("x1", 1.0), ("x2", 2.0), ("x3", 2.0)]).unwrap();
    assert!((fd - exact).abs() < 1e-8);
    let b: BTreeMap<String, f64> = [("x0", 0.0), ("x1", 1.0), ("x2", 2.0), ("x3", 2.0)]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    let j = eval_jet(&z, &b, &COORDS, &OpaqueImpls::new()).unwrap();
    assert_eq!(j.value(), 3.0);
    assert!((j.grad()[1] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn radial_variable_is_spacelike_unit() {
    let spec = &catalog()[1].spec;
    let rr = compute_invariants(spec).unwrap();
    let v = is_zero(&(rr.raw.s + Expr::one()), &spec.domain, &spec.opaque, ZeroTest::default()).unwrap();
    assert!(v.is_zero(), "{v:?}");
}

#[test]
fn boosted_frame_projection() {
    let (c, s) = (1f64.cosh(), 1f64.sinh());
    let f = Frame {
        a: FourVector::new(c, s, 0.0, 0.0),
        b: FourVector::new(s, c, 0.0, 0.0),
        c: FourVector::unit(2),
        d: FourVector::unit(3),
    };
    assert!(f.validate(1e-12).is_valid());
    let ax = project(&f, Direction::A);
    let at = [("x0", 0.7), ("x1", -1.3)];
    assert!((eval_f64(&ax, &at).unwrap() - (c * 0.7 + s * 1.3)).abs() < 1e-14);
}

#[test]
fn catalog_is_frame_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for k in 0..50 {
        let frame = Frame::random_valid(&mut rng, 1.0);
        let phi = Builtin::ALL[k % 4];
        for e in catalog_in(&frame, phi) {
            let rr = compute_invariants(&e.spec).unwrap();
            let rep = verify_reduction(&e.spec, &rr.raw, &e.reduced, ZeroTest::default().with_trials(40)).unwrap();
            assert!(rep.passed(), "frame {k}, entry {}: {rep:?}", e.number);
        }
    }
}

#[test]
fn null_direction_makes_entry_three_independent_of_phi() {
    for phi in Builtin::ALL {
        let e = &catalog_in(&Frame::canonical(), phi)[2];
        let rr = compute_invariants(&e.spec).unwrap();
        for (name, inv) in [("r", &rr.raw.r), ("R", &rr.raw.box_y)] {
            let target = if name == "r" { Expr::int(-1) } else { Expr::zero() };
            let v = is_zero(&(inv.clone() - target), &e.spec.domain, &e.spec.opaque, ZeroTest::default()).unwrap();
            assert!(v.is_zero(), "{phi:?} {name}: {v:?}");
        }
    }
}

#[test]
fn catalog_entries_classify_as_expected() {
    for e in catalog() {
        let reduced_box = SamplingBox::new(&["y", "z"], &[0.1, 0.1], &[3.0, 3.0]);
        let k = &e.reduced.coeffs;
        let case = classify_case(&k.r, &k.q, &k.s, &reduced_box, &OpaqueImpls::new(), ClassifyConfig::default());
        assert_eq!(case, e.expected, "entry {}", e.number);
    }
    assert_eq!(catalog()[3].expected, Case::Parabolic { lambda: -1 });
}

#[test]
fn catalog_invariants_depend_only_on_yz() {
    for e in catalog() {
        let rr = compute_invariants(&e.spec).unwrap();
        for (name, inv) in rr.raw.named() {
            let d = depends_only_on_yz(inv, &e.spec, LevelSetTest { pairs: 20, ..Default::default() }).unwrap();
            assert!(d.holds(), "entry {} {name}: {d:?}", e.number);
        }
    }
}

#[test]
fn product_ansatz_fails_functional_dependence() {
    let spec = AnsatzSpec::new(parse("x0*x1").unwrap(), parse("x2").unwrap()).unwrap();
    let rr = compute_invariants(&spec).unwrap();
    let d = depends_only_on_yz(&rr.raw.r, &spec, LevelSetTest::default()).unwrap();
    let Dependence::Witness { first, second, values } = d else { panic!("{d:?}") };
    let none = OpaqueImpls::new();
    for (e, name) in [(&spec.y, "y"), (&spec.z, "z")] {
        let (a, b) = (eval(e, &first, &none).unwrap(), eval(e, &second, &none).unwrap());
        assert!((a - b).abs() < 1e-10, "{name} differs: {a} {b}");
    }
    assert!((values.0 - values.1).abs() > 1e-6);
}

#[test]
fn wave_grid_lifts_through_entry_one() {
    let kink = kink_solution(0.5, 1, 0.0).unwrap();
    let exact = kink.field();
    let p = WaveProblem {
        rhs: Rhs::new(&parse("sin(phi)").unwrap()).unwrap(),
        init: InitialData::from_closed_form(&kink),
        z_range: (-6.0, 6.0),
        t_end: 1.0,
        hy: 0.01,
        hz: 0.02,
        boundary: Boundary::Dirichlet(exact),
    };
    let grid = solve_wave_1p1(&p).unwrap();
    let e = &catalog()[0];
    let dom = SamplingBox::new(&COORDS, &[0.2, -2.0, -2.0, -2.0], &[0.8, 2.0, 2.0, 2.0]);
    let spec = e.spec.clone().with_domain(dom).unwrap();
    let rep = lift_grid(&spec, &grid, &parse("sin(u)").unwrap(), LiftConfig::default()).unwrap();
    assert!(rep.passes(GRID_TOL), "{rep:?}");
}

#[test]
fn radial_ode_grid_lifts_through_entry_four() {
    let sol = solve_radial_ode(&RadialOdeProblem::new(Rhs::zero(), 0.2, 0.0, 5.0, 3.5, 0.005)).unwrap();
    let grid = sol.to_grid((-5.0, 5.0), 41);
    let e = &catalog()[3];
    let dom = SamplingBox::new(&COORDS, &[-2.0, 0.5, 0.5, -2.0], &[2.0, 2.0, 2.0, 2.0]);
    let spec = e.spec.clone().with_domain(dom).unwrap();
    let rep = lift_grid(&spec, &grid, &Expr::zero(), LiftConfig::default()).unwrap();
    assert!(rep.max < 1e-4, "{rep:?}");
}

#[test]
fn lift_reports_are_deterministic() {
    let e = &catalog()[0];
    let k = kink_solution(0.5, -1, 0.2).unwrap();
    let f = parse("sin(u)").unwrap();
    let a = wavered::lift::lift_closed_form(&e.spec, &k, &f, LiftConfig::default()).unwrap();
    let b = wavered::lift::lift_closed_form(&e.spec, &k, &f, LiftConfig::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn solver_callbacks_from_expressions() {
    let phi = wavered::solvers::profile_from_expr(&parse("sin(z)").unwrap(), "z").unwrap();
    assert!((phi(1.0) - 1f64.sin()).abs() < 1e-15);
    let g = wavered::solvers::field_from_expr(&parse("y*z").unwrap()).unwrap();
    assert_eq!(g(2.0, 3.0), 6.0);
    let _: Arc<dyn Fn(f64) -> f64 + Send + Sync> = phi;
}
