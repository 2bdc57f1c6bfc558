#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use roughjump::path::uniform_times;
use roughjump::smoothfn::Polynomial;
use roughjump::{make_polynomial, GridPoint, RegulatedPath};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Jump structure of a synthetic test path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Continuous,
    Cadlag,
    General,
}

/// Gaussian random walk with step `scale / sqrt(n)`, plus jumps at roughly
/// a fifth of the grid points for the jump families.
pub fn random_path(rng: &mut impl Rng, n: usize, d: usize, family: Family, scale: f64) -> RegulatedPath<f64> {
    let times = uniform_times(1.0, n);
    let step = scale / (n as f64).sqrt();
    let mut cur = vec![0.0; d];
    let mut pts = Vec::with_capacity(n + 1);
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            for c in cur.iter_mut() {
                *c += step * Distribution::<f64>::sample(&StandardNormal, &mut *rng);
            }
        }
        let left = cur.clone();
        let jumpy = family != Family::Continuous && rng.random::<f64>() < 0.2;
        if jumpy && k > 0 {
            for c in cur.iter_mut() {
                *c += scale * 0.5 * (rng.random::<f64>() - 0.5);
            }
        }
        let at = cur.clone();
        if family == Family::General && k < n && rng.random::<f64>() < 0.2 {
            for c in cur.iter_mut() {
                *c += scale * 0.5 * (rng.random::<f64>() - 0.5);
            }
        }
        let right = cur.clone();
        pts.push(GridPoint { t, left, at, right });
    }
    RegulatedPath::from_points(1.0, d, pts).unwrap()
}

/// Random polynomial in `d` variables with every monomial of degree `<= deg`
/// present with probability one half.
pub fn random_polynomial(rng: &mut impl Rng, d: usize, deg: u32) -> Polynomial<f64> {
    let mut terms = Vec::new();
    let mut exps = vec![0u32; d];
    loop {
        if exps.iter().sum::<u32>() <= deg && rng.random::<f64>() < 0.5 {
            terms.push((exps.clone(), rng.random_range(-1.0..1.0)));
        }
        let mut i = 0;
        loop {
            if i == d {
                return make_polynomial(terms, d).unwrap();
            }
            exps[i] += 1;
            if exps[i] <= deg {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample covariance.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    (d, kolmogorov_q(lambda))
}

/// `Q_KS(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k^2 λ^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Exhaustive p-variation over every subsequence of the one-sided values.
pub fn brute_pvar_sum(x: &RegulatedPath<f64>, p: f64) -> f64 {
    let mut seq: Vec<Vec<f64>> = Vec::new();
    let mut push = |v: &[f64]| {
        // repeating a value adds nothing to any partition sum
        if seq.last().map(Vec::as_slice) != Some(v) {
            seq.push(v.to_vec());
        }
    };
    for m in 0..x.len() {
        if m > 0 {
            push(x.left(m));
        }
        push(x.at(m));
        if m < x.last_index() {
            push(x.right(m));
        }
    }
    if seq.len() == 1 {
        return 0.0;
    }
    let inner = seq.len() - 2;
    assert!(inner <= 22, "brute force limited to small grids");
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << inner) {
        let mut prev = &seq[0];
        let mut acc = 0.0;
        for (k, v) in seq.iter().enumerate().skip(1) {
            if k == seq.len() - 1 || mask & (1 << (k - 1)) != 0 {
                acc += dist(prev, v).powf(p);
                prev = v;
            }
        }
        best = best.max(acc);
    }
    best
}
