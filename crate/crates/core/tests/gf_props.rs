use mbsketch::gf::{Field, Symbol};
use proptest::prelude::*;
use proptest::test_runner::Config;

fn field_axioms(m: u32) {
    let f = Field::new(m, None).unwrap();
    let q = f.size() as u32;
    let mut runner = proptest::test_runner::TestRunner::new(Config {
        cases: 10_000,
        ..Config::default()
    });
    runner
        .run(&(0..q, 0..q, 0..q), |(a, b, c)| {
            let (a, b, c) = (f.element(a).unwrap(), f.element(b).unwrap(), f.element(c).unwrap());
            let mul = |x, y| f.mul(x, y).unwrap();
            let add = |x, y| f.add(x, y).unwrap();
            prop_assert_eq!(mul(mul(a, b), c), mul(a, mul(b, c)));
            prop_assert_eq!(mul(a, b), mul(b, a));
            prop_assert_eq!(add(a, b), add(b, a));
            prop_assert_eq!(mul(a, add(b, c)), add(mul(a, b), mul(a, c)));
            if a.value() != 0 {
                prop_assert_eq!(mul(a, f.inv(a).unwrap()), f.one());
                prop_assert_eq!(f.div(mul(a, b), a).unwrap(), b);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn axioms_hold_for_every_supported_m() {
    for m in 2..=10 {
        field_axioms(m);
    }
}

proptest! {
    #[test]
    fn pow_matches_repeated_multiplication(a in 1u32..64, e in 0i64..200) {
        let f = Field::new(6, None).unwrap();
        let x = f.element(a).unwrap();
        let mut acc = f.one();
        for _ in 0..e {
            acc = f.mul(acc, x).unwrap();
        }
        prop_assert_eq!(f.pow(x, e).unwrap(), acc);
        prop_assert_eq!(f.mul(f.pow(x, -e).unwrap(), acc).unwrap(), f.one());
    }

    #[test]
    fn symbol_and_element_paths_agree(a in 0u32..128, b in 0u32..128) {
        let f = Field::new(7, None).unwrap();
        let (x, y) = (f.element(a).unwrap(), f.element(b).unwrap());
        prop_assert_eq!(f.mul(x, y).unwrap().value(), f.mul_sym(a as Symbol, b as Symbol));
    }
}
