mod common;

use common::{covariance, mean};
use proptest::prelude::*;
use roughjump::stochgen::{gen_jump_record, stream_rng, FbmMethod, FbmSampler, JumpLaw, Substream};
use roughjump::{gen_compound_poisson, gen_fbm, gen_mixed, gen_wealth, GeneratorConfig};

fn jump_config(seed: u64, n: usize, rate: f64) -> GeneratorConfig {
    let mut cfg = GeneratorConfig::new(seed, n);
    cfg.rate = rate;
    cfg.jump_law = JumpLaw::Gaussian {
        mean: 0.1,
        sd: 0.4,
        bound: 1.0,
    };
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn one_variation_matches_bookkeeping(seed in any::<u64>(), d in 1usize..=3, drift in -1.0f64..1.0, rate in 0.0f64..10.0) {
        let mut cfg = jump_config(seed, 128, rate);
        cfg.d = d;
        cfg.drift = drift;
        let cp = gen_compound_poisson(&cfg).unwrap();
        prop_assert!(cp.path.is_cadlag());
        let pv = cp.path.p_variation(1.0).unwrap();
        prop_assert!((pv - cp.one_variation).abs() <= 1e-10 * (1.0 + cp.one_variation));
    }

    #[test]
    fn snapping_moves_jumps_at_most_half_a_step(seed in any::<u64>(), n in 16usize..256) {
        let cp = gen_compound_poisson(&jump_config(seed, n, 3.0)).unwrap();
        let k = cp.record.times.len() as f64;
        prop_assert!(cp.snap_displacement <= k * 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn mixed_variation_obeys_the_triangle_inequality(seed in any::<u64>(), p in 1.0f64..5.0) {
        let mut cfg = jump_config(seed, 128, 4.0);
        cfg.hurst = 0.3;
        let m = gen_mixed(&cfg).unwrap();
        let lhs = m.path.p_variation(p).unwrap();
        let rhs = 2f64.powf(1.0 - 1.0 / p) * (m.fbm.p_variation(p).unwrap() + m.jumps.path.p_variation(p).unwrap());
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), stream in 0u64..4) {
        let mut cfg = jump_config(seed, 64, 2.0);
        cfg.stream = stream;
        cfg.hurst = 0.4;
        let a = gen_mixed(&cfg).unwrap().path;
        let b = gen_mixed(&cfg).unwrap().path;
        prop_assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    }
}

#[test]
fn poisson_mean() {
    let m = 10_000;
    let counts: Vec<f64> = (0..m)
        .map(|s| {
            let mut cfg = jump_config(7, 64, 5.0);
            cfg.stream = s;
            gen_jump_record(&cfg).unwrap().times.len() as f64
        })
        .collect();
    let avg = mean(&counts);
    assert!((avg - 5.0).abs() <= 4.0 * (5.0 / m as f64).sqrt(), "mean count {avg}");
}

#[test]
fn fbm_terminal_variance() {
    let m = 10_000;
    let (h, t) = (0.3, 2.0);
    for method in [FbmMethod::Cholesky, FbmMethod::Circulant] {
        let sampler = FbmSampler::new(64, h, method).unwrap();
        let ends: Vec<f64> = (0..m)
            .map(|i| *sampler.path_values(t, &mut stream_rng(55, i, Substream::Fbm, 0)).last().unwrap())
            .collect();
        let var = covariance(&ends, &ends);
        // Var of the sample variance for Gaussian data is 2 sigma^4 / (m - 1)
        let target = t.powf(2.0 * h);
        let se = target * (2.0 / (m as f64 - 1.0)).sqrt();
        assert!((var - target).abs() <= 4.0 * se, "{method:?}: {var} vs {target}");
    }
}

#[test]
fn rough_fbm_variation_growth() {
    let mut cfg = GeneratorConfig::new(3, 4096);
    cfg.hurst = 0.25;
    let fine = gen_fbm(&cfg).unwrap();
    let coarse = fine.subsample(16).unwrap();
    let growth = |p: f64| fine.p_variation(p).unwrap().powf(p) / coarse.p_variation(p).unwrap().powf(p);
    // sixteen times the points
    assert!(growth(4.5) < 16.0);
    assert!(growth(2.0) > growth(4.5));
}

#[test]
fn degenerate_configurations() {
    let mut cfg = GeneratorConfig::new(1, 32);
    cfg.drift = 0.5;
    let cp = gen_compound_poisson(&cfg).unwrap();
    assert!(cp.path.jumps().is_empty());
    assert!((cp.one_variation - 0.5).abs() < 1e-15);
    cfg.drift = 0.0;
    cfg.x0 = 1.5;
    cfg.hurst = 0.4;
    assert_eq!(gen_mixed(&cfg).unwrap().path, gen_fbm(&cfg).unwrap());
    cfg.hurst = 0.5;
    cfg.rate = 3.0;
    let m = gen_mixed(&cfg).unwrap();
    let idx = |v: Vec<roughjump::Jump<f64>>| v.into_iter().map(|j| j.index).collect::<Vec<_>>();
    assert_eq!(idx(m.path.jumps()), idx(m.jumps.path.jumps()));
    for bad in [0.0, 1.0] {
        let mut c = GeneratorConfig::new(1, 32);
        c.hurst = bad;
        assert!(gen_fbm(&c).is_err());
    }
    assert!(gen_fbm(&GeneratorConfig::new(1, 1)).is_err());
    let mut crowded = GeneratorConfig::new(1, 4);
    crowded.rate = 500.0;
    assert!(gen_compound_poisson(&crowded).is_err());
}

#[test]
fn wealth_examples() {
    let mut cfg = GeneratorConfig::new(2, 64);
    cfg.sigma = 0.0;
    cfg.rate = 4.0;
    let flat = gen_wealth(&cfg, &vec![0.0; 65], 2.0).unwrap();
    assert!(flat.path.value_range()[0] == (2.0, 2.0));
    let returns = roughjump::RegulatedPath::from_points(
        1.0,
        1,
        vec![
            roughjump::GridPoint::continuous(0.0, vec![0.0]),
            roughjump::GridPoint {
                t: 0.5,
                left: vec![0.0],
                at: vec![0.5],
                right: vec![0.5],
            },
            roughjump::GridPoint::continuous(1.0, vec![0.5]),
        ],
    )
    .unwrap();
    let w = roughjump::stochgen::wealth_from_returns(&returns, &[1.0; 3], 1.0).unwrap();
    assert_eq!(w.at(2), &[1.5]);
    let strategy: Vec<f64> = (0..65).map(|k| 0.2 + k as f64 / 64.0).collect();
    let w = gen_wealth(&cfg, &strategy, 1.0).unwrap();
    assert!(w.path.value_range()[0].0 > 0.0);
}
