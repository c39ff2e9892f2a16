use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wavered::compat::{apply_h_operator, construct_v};
use wavered::expr::eval::{eval, eval_jet};
use wavered::expr::{is_zero, parse, Expr, OpaqueImpls, SamplingBox, Verdict, ZeroTest, COORDS};
use wavered::minkowski::{Frame, FourVector, LorentzTransform, NUMERIC_FRAME_TOL};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0usize..4).prop_map(|k| Expr::var(COORDS[k])),
        (-5i64..=5).prop_map(Expr::int),
        (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::rational(n, d)),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), -2i64..=3).prop_map(|(a, p)| a.powi(p)),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::exp),
            inner.clone().prop_map(Expr::arctan),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).sqrt()),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).ln()),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.3f64..1.7)
}

fn bind(p: &[f64; 4]) -> BTreeMap<String, f64> {
    COORDS.iter().map(|c| c.to_string()).zip(p.iter().copied()).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalization_is_idempotent(e in expr()) {
        let c = e.canon();
        prop_assert_eq!(c.canon(), c);
    }

    #[test]
    fn print_then_parse_round_trips(e in expr()) {
        let c = e.canon();
        let text = c.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, c, "printed as {}", text);
    }

    #[test]
    fn evaluation_is_deterministic(e in expr(), p in point()) {
        let b = bind(&p);
        let none = OpaqueImpls::new();
        match (eval(&e, &b, &none), eval(&e, &b, &none)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
            (Err(x), Err(y)) => prop_assert_eq!(x, y),
            _ => prop_assert!(false, "mixed outcomes"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jets_agree_with_symbolic_derivatives(e in expr(), p in point()) {
        let b = bind(&p);
        let none = OpaqueImpls::new();
        let Ok(jet) = eval_jet(&e, &b, &COORDS, &none) else { return Ok(()) };
        for (i, xi) in COORDS.iter().enumerate() {
            let di = e.diff(xi);
            let Ok(g) = eval(&di, &b, &none) else { return Ok(()) };
            prop_assert!(close(jet.grad()[i], g, 1e-9), "d/{}: jet {} vs diff {}", xi, jet.grad()[i], g);
            for (j, xj) in COORDS.iter().enumerate() {
                let Ok(h) = eval(&di.diff(xj), &b, &none) else { return Ok(()) };
                prop_assert!(close(jet.hess(i, j), h, 1e-9), "d2/{}{}: jet {} vs diff {}", xi, xj, jet.hess(i, j), h);
                prop_assert_eq!(jet.hess(i, j).to_bits(), jet.hess(j, i).to_bits());
            }
        }
    }

    #[test]
    fn frame_validity_survives_lorentz_maps(seed in any::<u64>(), scale in 1.05f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = Frame::random_valid(&mut rng, 1.0);
        let l = LorentzTransform::random(&mut rng, 1.0);
        prop_assert!(frame.validate(NUMERIC_FRAME_TOL).is_valid());
        prop_assert!(frame.transformed(&l).validate(NUMERIC_FRAME_TOL).is_valid());
        let b = frame.b;
        let broken = Frame { b: FourVector::new(scale * b.0[0], scale * b.0[1], scale * b.0[2], scale * b.0[3]), ..frame };
        let before = broken.validate(NUMERIC_FRAME_TOL);
        let after = broken.transformed(&l).validate(NUMERIC_FRAME_TOL);
        prop_assert!(!before.is_valid());
        prop_assert!(after.mentions("bb != -1"));
    }

    #[test]
    fn h_operator_chain_composes(coeffs in prop::collection::vec(-3i64..=3, 1..5), m in 0u32..4, hk in 0usize..3) {
        let v = Expr::var("v");
        let f = Expr::sum(coeffs.iter().enumerate().map(|(k, c)| Expr::int(*c) * v.clone().powi(k as i64)));
        let h = [Expr::one(), v.clone(), parse("v + w").unwrap()][hk].clone();
        let direct = apply_h_operator(&h, "v", &f, m + 1);
        let stepped = apply_h_operator(&h, "v", &apply_h_operator(&h, "v", &f, m), 1);
        prop_assert_eq!(direct, stepped);
    }

    #[test]
    fn constructed_v_is_scale_free(a in -2i64..=2, b in 1i64..=3, k in prop_oneof![-5i64..=-1, 1i64..=5]) {
        let phi = parse(&format!("exp({a}*v) + {b}*w^2 + 1")).unwrap();
        let v1 = construct_v(&Expr::one(), &phi, "v").unwrap();
        let v2 = construct_v(&Expr::one(), &(Expr::int(k) * phi), "v").unwrap();
        let dom = SamplingBox::cube(&["v", "w"], -2.0, 2.0);
        let verdict = is_zero(&(v1 - v2), &dom, &OpaqueImpls::new(), ZeroTest::default().with_trials(50)).unwrap();
        prop_assert!(verdict.is_zero(), "{:?}", verdict);
    }
}

#[test]
fn is_zero_rejects_adversarial_nonzero_expressions() {
    // each is provably nonzero at some rational point of [-2, 2]^4
    let cases = [
        "(x0 - 1/2)^2*(x1 + 1/4)^2",
        "sin(x0)^2 + cos(x0)^2 - 1 + x1^4/1000",
        "exp(x0) - 1 - x0 - x0^2/2 - x0^3/6 - x0^4/24 - x0^5/120",
        "sqrt(x0^2) - x0",
        "(x0 + x1)^2 - x0^2 - 2*x0*x1 - x1^2 + 1/1000000",
        "x0*x1*x2*x3",
        "arctan(x0) + arctan(1/x0) - 1.5707963267948966",
        "ln(x0^2 + 1) - 2*ln(sqrt(x0^2 + 1)) + x3/10000",
    ];
    let dom = SamplingBox::spacetime();
    for c in cases {
        let v = is_zero(&parse(c).unwrap(), &dom, &OpaqueImpls::new(), ZeroTest::default()).unwrap();
        assert!(matches!(v, Verdict::NonZero { .. }), "{c}: {v:?}");
    }
}
