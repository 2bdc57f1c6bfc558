mod common;

use common::{random_path, Family};
use proptest::prelude::*;
use rand::Rng;
use roughjump::ito::{Substitution, SubstitutionCheck};
use roughjump::path::uniform_times;
use roughjump::{
    compensated_sum, controlled_from_function, ito_verify, jump_corrections, make_exp, make_polynomial,
    observable_chain_rule, reduced_lift, GridPoint, ItoCase, RegulatedPath,
};

fn family(i: u8) -> Family {
    [Family::Continuous, Family::Cadlag, Family::General][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn polynomial_residual_vanishes_on_every_partition(seed in any::<u64>(), n in 2usize..80, f in 0u8..3, d in 1usize..=2, p in 1.0f64..5.0) {
        let mut r = common::rng(seed);
        let x = random_path(&mut r, n, d, family(f), 1.0);
        let lift = reduced_lift(&x, p).unwrap();
        let g = common::random_polynomial(&mut r, d, lift.n() as u32);
        let rep = ito_verify(&g, &x, p, 1e-9).unwrap();
        let scale = 1.0 + rep.lhs.abs();
        for res in &rep.partition_residuals {
            prop_assert!(res.abs() <= 1e-10 * scale);
        }
        let y = controlled_from_function(&g, &lift).unwrap();
        for part in &rep.integral.partitions {
            let s = compensated_sum(&y, &lift, part).unwrap();
            prop_assert!((rep.lhs - s.value - rep.left_sum - rep.right_sum).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn case_matches_jump_structure(seed in any::<u64>(), n in 2usize..60, f in 0u8..3) {
        let x = random_path(&mut common::rng(seed), n, 1, family(f), 1.0);
        let rep = ito_verify(&make_exp(), &x, 2.5, 1e-9).unwrap();
        match rep.case {
            ItoCase::Continuous => {
                prop_assert!(rep.left_corrections.is_empty() && rep.right_corrections.is_empty());
                prop_assert_eq!(rep.left_sum, 0.0);
            }
            ItoCase::Cadlag => prop_assert!(rep.right_corrections.is_empty()),
            ItoCase::General => prop_assert!(!rep.right_corrections.is_empty()),
        }
        if family(f) == Family::Continuous {
            prop_assert_eq!(rep.case, ItoCase::Continuous);
        }
    }
}

#[test]
fn small_jump_corrections_converge_absolutely() {
    let mut r = common::rng(31);
    let n_grid = 400;
    let eta = 0.05;
    let times = uniform_times(1.0, n_grid);
    let mut level = 0.0;
    let mut pts = vec![GridPoint::continuous(0.0, vec![0.0])];
    for (k, &t) in times.iter().enumerate().skip(1) {
        level += 0.02 * (r.random::<f64>() - 0.5);
        let left = level;
        if k % 4 == 0 {
            level += r.random_range(-eta..eta);
        }
        pts.push(GridPoint {
            t,
            left: vec![left],
            at: vec![level],
            right: vec![level],
        });
    }
    let x = RegulatedPath::from_points(1.0, 1, pts).unwrap();
    assert_eq!(x.jumps().len(), 100);
    let p = 2.5;
    let n = 2;
    let ledger = jump_corrections(&make_exp(), &x, n).unwrap();
    let abs_sum: f64 = ledger.left.iter().map(|c| c.value.abs()).sum();
    let (_, hi) = x.value_range()[0];
    // Taylor remainder bound: sup |D^{n+1} exp| / (n+1)!
    let c = hi.exp() / 6.0;
    let power_sum: f64 = x.jumps().iter().map(|j| j.minus.norm().powi(n as i32 + 1)).sum();
    assert!(abs_sum <= c * power_sum, "{abs_sum} > {}", c * power_sum);
    let pvar = x.p_variation(p).unwrap().powf(p);
    assert!(power_sum <= eta.powf(n as f64 + 1.0 - p) * pvar);
    let rep = ito_verify(&make_exp(), &x, p, 1e-9).unwrap();
    assert!(rep.relative_residual() < 1e-2);
}

fn finite_variation_driver(seed: u64, n: usize, jumps: bool) -> RegulatedPath<f64> {
    let mut r = common::rng(seed);
    let times = uniform_times(1.0, n);
    let mut level = 1.0;
    let mut pts = vec![GridPoint::continuous(0.0, vec![level])];
    for &t in &times[1..] {
        level += 0.05 * (r.random::<f64>() - 0.5);
        let left = level;
        if jumps && r.random::<f64>() < 0.1 {
            level += 0.2 * (r.random::<f64>() - 0.5);
        }
        pts.push(GridPoint {
            t,
            left: vec![left],
            at: vec![level],
            right: vec![level],
        });
    }
    RegulatedPath::from_points(1.0, 1, pts).unwrap()
}

#[test]
fn observable_equal_to_driver() {
    let x = finite_variation_driver(41, 200, true);
    let f = make_polynomial(vec![(vec![3], 1.0), (vec![1], -2.0)], 1).unwrap();
    let identity = |_: &[f64]| vec![1.0];
    let sub = Substitution {
        driver: &x,
        field: &identity,
        driver_p: 1.0,
    };
    let rep = observable_chain_rule(&f, &x, 1.0, 1e-9, Some(&sub)).unwrap();
    match rep.substitution {
        SubstitutionCheck::Checked { residual, .. } => assert_eq!(residual, 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn euler_solution_substitutes() {
    let x = finite_variation_driver(42, 300, false);
    let mut y = vec![vec![2.0]];
    for k in 1..x.len() {
        let prev = y[k - 1][0];
        y.push(vec![prev * (1.0 + x.at(k)[0] - x.at(k - 1)[0])]);
    }
    let y = RegulatedPath::continuous(x.times().to_vec(), y).unwrap();
    let f = make_polynomial(vec![(vec![2], 1.0)], 1).unwrap();
    let linear = |v: &[f64]| vec![v[0]];
    let sub = Substitution {
        driver: &x,
        field: &linear,
        driver_p: 1.0,
    };
    let rep = observable_chain_rule(&f, &y, 1.0, 1e-9, Some(&sub)).unwrap();
    match rep.substitution {
        SubstitutionCheck::Checked {
            observable_side,
            residual,
            ..
        } => assert!(residual.abs() <= 1e-12 * (1.0 + observable_side.abs()), "{residual}"),
        other => panic!("{other:?}"),
    }
    let rough = Substitution {
        driver: &x,
        field: &linear,
        driver_p: 2.5,
    };
    let rep = observable_chain_rule(&f, &y, 2.5, 1e-9, Some(&rough)).unwrap();
    assert!(matches!(rep.substitution, SubstitutionCheck::NotApplicable { .. }));
}

#[test]
fn report_json_shape() {
    let x = random_path(&mut common::rng(43), 20, 1, Family::General, 1.0);
    let rep = ito_verify(&make_exp(), &x, 2.5, 1e-9).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    for key in ["lhs", "integral", "left_corrections", "right_corrections", "residual", "case"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["case"], "general");
    assert_eq!(v["schema"], 1);
    let first = &v["left_corrections"][0];
    assert!(first.get("t").is_some() && first.get("value").is_some());
}

#[test]
fn domain_violations_are_errors() {
    let x = RegulatedPath::uniform_scalar(1.0, &[1.0, 0.2, 1.0]).unwrap();
    let f = roughjump::make_log_clamped(0.5, 2.0).unwrap();
    assert!(ito_verify(&f, &x, 1.5, 1e-9).is_err());
    assert!(ito_verify(&make_exp(), &x, 0.5, 1e-9).is_err());
}
