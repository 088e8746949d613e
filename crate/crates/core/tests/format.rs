use hochcyc::ainfty::builtins;
use hochcyc::format::*;
use hochcyc::graded::{Element, GradedModule};
use hochcyc::openclosed::toy::{curved_toy, ToyGeometry};
use hochcyc::scalars::{FormalVarSpec, PiGroup, Q, Ring};
use proptest::prelude::*;
use std::sync::Arc;

fn round_trip(inst: &Instance) {
    let text = write_instance(inst);
    let back = parse_instance_str(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(back.kind(), inst.kind());
    assert_eq!(write_instance(&back), text);
}

#[test]
fn builtins_round_trip() {
    for a in builtins::all() {
        let inst = Instance::Algebra(a.clone());
        round_trip(&inst);
        let Instance::Algebra(b) = parse_instance_str(&write_instance(&inst)).unwrap() else {
            panic!()
        };
        let ops = |x: &hochcyc::ainfty::AInfty| {
            x.sorted_ops().into_iter().filter(|(_, v)| !v.is_zero()).map(|(t, v)| (t.clone(), v.clone())).collect::<Vec<_>>()
        };
        assert_eq!(ops(&a), ops(&b), "{}", a.name);
        assert_eq!(a.unit, b.unit);
    }
    for name in ["dual_numbers", "exterior(3)", "toy_zero_energy", "toy_zero_energy(n=3)", "curved_toy"] {
        round_trip(&load(name).unwrap());
    }
}

#[test]
fn geometries_round_trip() {
    for n in [2, 3] {
        let g = ToyGeometry::standard(n, Arc::new(Ring::rationals()), &[("h", 2)]).unwrap();
        round_trip(&Instance::Geometry(Box::new(g)));
    }
    round_trip(&Instance::Geometry(Box::new(curved_toy().unwrap().geometry)));
}

#[test]
fn family_keeps_eta_and_sphere() {
    let c = curved_toy().unwrap();
    let Instance::Family(f) = parse_instance_str(&write_family(&c.inst)).unwrap() else {
        panic!()
    };
    let s = f.sphere.as_ref().unwrap();
    assert_eq!(s.eta, c.inst.sphere.as_ref().unwrap().eta);
    assert_eq!(s.ops.len(), 4);
    assert_eq!(f.algebra().curvature(), c.inst.algebra().curvature());
}

const DUAL: &str = "\
KIND algebra
NAME broken
BASIS 1 eps
DEGREES 0 0
UNIT 1
MU 2
  1 1 -> 1
  1 eps -> eps
  eps 1 -> eps
";

#[test]
fn wrong_degree_names_the_degree_law() {
    assert!(parse_instance_str(DUAL).is_ok());
    let bad = DUAL.replace("DEGREES 0 0", "DEGREES 0 1") + "  eps eps -> 1\n";
    let err = parse_instance_str(&bad).unwrap_err();
    assert!(matches!(err, FormatError::Invalid(_)), "{err}");
    assert!(err.to_string().contains("degree law"), "{err}");
}

#[test]
fn negative_energy_is_rejected() {
    let text = "\
RING
  omega 1
  maslov 0
BASIS 1 e
DEGREES 0 0
MU 0
  -> (T^[-1]) e
";
    match parse_instance_str(text).unwrap_err() {
        FormatError::Parse { line, col, msg } => {
            assert_eq!(line, 7);
            assert_eq!(col, 7);
            assert!(msg.contains("negative energy"), "{msg}");
        }
        e => panic!("{e}"),
    }
}

#[test]
fn parse_errors_carry_positions() {
    let cases: [(&str, usize, usize); 4] = [
        ("BASIS a\nDEGREES 0\nFOO\n", 3, 1),
        ("BASIS a\nDEGREES x\n", 2, 9),
        ("BASIS a\nDEGREES 0\nMU 1\n  a -> (2) b\n", 4, 12),
        ("BASIS a\nDEGREES 0\nMU 1\n  a  (1) a\n", 4, 11),
    ];
    for (text, line, col) in cases {
        match parse_instance_str(text) {
            Err(FormatError::Parse { line: l, col: c, .. }) => assert_eq!((l, c), (line, col), "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn family_validation() {
    let text = write_instance(&load("curved_toy").unwrap());
    let bad_eta = text.replace("  eta (1) eta", "  eta (1) w");
    assert!(parse_instance_str(&bad_eta).unwrap_err().to_string().contains("d eta"));
    let bad_p = text.replace("P 1 0\n", "P 1 0\n  x -> (1) u1\n");
    assert!(parse_instance_str(&bad_p).unwrap_err().to_string().contains("degree law"));
}

fn ring() -> Ring {
    Ring::new(PiGroup::new(vec![Q::one()], vec![2]).unwrap(), FormalVarSpec::new(vec![2, 1]))
}

proptest! {
    #[test]
    fn elements_round_trip(terms in prop::collection::vec((0u16..3, -5i128..6, 1i128..4, 0i32..3, 0u16..3, 0u16..2), 0..6)) {
        let ring = ring();
        let m = GradedModule::from_pairs(&[("a", 0), ("b'", 1), ("1X", 2)]);
        let mut e = Element::zero();
        for (g, n, d, beta, e0, e1) in terms {
            let s = ring.monomial(Q::new(n, d), &[beta], &[e0, e1]).unwrap();
            e.add_term(g, &s);
        }
        let parsed = hochcyc::format::parse_element_str(&ring, &m, &e.display(&m)).unwrap();
        prop_assert_eq!(parsed, e);
    }
}
