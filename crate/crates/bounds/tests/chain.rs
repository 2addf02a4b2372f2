mod common;

use amhd_bounds::chain::{self, alpha, alpha_ps, constants_chain, gamma, q_prime, ChainInputs};
use amhd_bounds::{prepare_table, BoundId, BoundRequest};
use proptest::prelude::*;

fn inputs(q: f64, delta: f64, t_end: f64) -> ChainInputs {
    ChainInputs::new(q, delta, 1.0, 1.0, 0.0, t_end).unwrap()
}

#[test]
fn q_prime_example() {
    let c = inputs(1.0, 0.03, 1.0);
    let want = 9.0 / (0.03 * 2f64.sqrt());
    assert!((q_prime(&c) - want).abs() <= 1e-12 * want);
    assert!((q_prime(&c) - 212.132).abs() < 1e-3);
}

#[test]
fn q_double_and_tilde_by_hand() {
    let c = inputs(1.0, 0.03, 1.0);
    let qp = 9.0 / (0.03 * 2f64.sqrt());
    // s = 2: alpha = 2/3
    let qd = 9f64.powf(1.0 / 3.0) * (1.0 + qp.powf(2.0 / 3.0));
    assert!((chain::q_double_prime(&c, 2.0).unwrap() - qd).abs() <= 1e-12 * qd);
    let qt = (1.0 / (std::f64::consts::E * 0.03)).powf(2.0 / 3.0) * qd;
    assert!((chain::q_tilde(&c, 2.0).unwrap() - qt).abs() <= 1e-12 * qt);
}

#[test]
fn zero_q_gives_zero_chain() {
    let (mut table, _) = common::table(1.0, 1.0);
    prepare_table(&mut table, &[BoundRequest::new(BoundId::B36_2, -1.0), BoundRequest::new(BoundId::B36_2, -0.75)])
        .unwrap();
    let c = inputs(0.0, 0.03, 1.0);
    let ch = constants_chain(c, 2.0, &table).unwrap();
    assert_eq!(ch.q_prime, 0.0);
    for v in [ch.q_double, ch.q_tilde, ch.q_tilde_w, ch.d1, ch.d4] {
        assert_eq!(v, Some(0.0));
    }
    for s in [-1.0, -0.75] {
        let ch = constants_chain(c, s, &table).unwrap();
        assert_eq!(ch.d2, Some(0.0));
    }
    assert_eq!(chain::d3(1.0, 1.0, 0.0, 3.0), 0.0);
}

#[test]
fn chain_members_follow_their_ranges() {
    let (mut table, _) = common::table(1.0, 1.0);
    prepare_table(&mut table, &[BoundRequest::new(BoundId::B36_3, -3.0)]).unwrap();
    let c = inputs(1.0, 0.03, 1.0);
    let ch = constants_chain(c, -3.0, &table).unwrap();
    assert!(ch.q_double.is_none() && ch.q_tilde.is_none() && ch.d1.is_none() && ch.d2.is_none());
    let (a, b) = ch.d3_coeffs.unwrap();
    assert_eq!(a, 2.0);
    let c2 = table.sup(2.0).unwrap().value;
    assert!((b - 2.0 * c2 * c2).abs() <= 1e-12 * b);
    assert!(ch.d4.is_none());
}

#[test]
fn exponent_examples() {
    assert!((alpha(2.0) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(gamma(1.0), 2.0);
    assert_eq!(gamma(0.5), 4.0);
}

#[test]
fn domain_errors() {
    let c = inputs(1.0, 0.03, 1.0);
    let e = chain::q_tilde(&c, 1.0).unwrap_err().to_string();
    assert!(e.contains("s > 1"), "{e}");
    assert!(chain::q_double_prime(&c, 0.5).is_err());
    assert!(ChainInputs::new(-1.0, 0.03, 1.0, 1.0, 0.0, 1.0).is_err());
    assert!(ChainInputs::new(1.0, 0.0, 1.0, 1.0, 0.0, 1.0).is_err());
    assert!(ChainInputs::new(1.0, 0.03, 1.0, 1.0, 1.0, 1.0).is_err());
    let (table, _) = common::table(1.0, 1.0);
    assert!(chain::d1(&c, -1.0, &table).is_err());
    assert!(chain::d4(&c, -2.0, &table).is_err());
}

/// Right-hand sides grow with `T`, and no faster than linearly.
#[test]
fn chain_is_nondecreasing_and_sublinear_in_t() {
    let (table, _) = common::table(0.1, 0.1);
    let ts: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
    type F<'a> = Box<dyn Fn(&ChainInputs) -> f64 + 'a>;
    let tbl = &table;
    let members: Vec<(&str, F)> = vec![
        ("Q'", Box::new(q_prime)),
        ("Q''_2", Box::new(|c| chain::q_double_prime(c, 2.0).unwrap())),
        ("Q~_3", Box::new(|c| chain::q_tilde(c, 3.0).unwrap())),
        ("Q~W_0", Box::new(move |c| chain::q_tilde_w(c, 0.0, tbl).unwrap().0)),
        ("D1_0", Box::new(move |c| chain::d1(c, 0.0, tbl).unwrap().0)),
        ("D4_-1", Box::new(move |c| chain::d4(c, -1.0, tbl).unwrap().0)),
    ];
    for (name, f) in &members {
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| f(&ChainInputs::new(0.7, 0.02, 0.1, 0.1, 0.0, t).unwrap()))
            .collect();
        for k in 1..ts.len() {
            assert!(ys[k] >= ys[k - 1] * (1.0 - 1e-14), "{name} decreases at T={}", ts[k]);
            assert!(ys[k] / ts[k] <= ys[k - 1] / ts[k - 1] * (1.0 + 1e-14), "{name} superlinear at T={}", ts[k]);
        }
    }
}

proptest! {
    #[test]
    fn alpha_shift_identity(s in -3.0f64..3.0, p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let (x, y) = (2.0 * (s + p) - 1.0, 2.0 * (s + q) - 1.0);
        prop_assume!(x.abs() > 1e-3 && y.abs() > 1e-3);
        let lhs = 1.0 - alpha(s + p) / alpha(s + q);
        let rhs = (p - q) * alpha(s + p);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn lp_bound_exponent(p in 2.0f64..8.0, s in 0.3f64..3.0) {
        let r = s + 1.5 - 3.0 / p;
        prop_assume!((2.0 * r - 1.0).abs() > 1e-3);
        let a = alpha_ps(p, s);
        prop_assert!((a - alpha(r)).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn q_prime_scales_inversely_with_delta(q in 0.01f64..10.0, d in 0.001f64..1.0, t in 0.01f64..10.0) {
        let a = q_prime(&inputs(q, d, t));
        let b = q_prime(&inputs(q, 2.0 * d, t));
        prop_assert!((a - 2.0 * b).abs() <= 1e-12 * a);
    }
}
