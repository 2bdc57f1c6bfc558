//! Seeded generators for fractional Brownian motion, compound Poisson paths,
//! their superposition, and positive wealth processes.
//!
//! Every generator is a pure function of its [`GeneratorConfig`]. Randomness
//! comes from ChaCha8 with one stream per `(path index, component)` pair, so
//! parallel batches reproduce serial runs bit for bit.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{uniform_times, GridPoint, RegulatedPath};

/// Largest grid on which [`FbmMethod::Auto`] picks the Cholesky method.
pub const CHOLESKY_MAX_N: usize = 1 << 10;

/// How fractional Gaussian noise is sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FbmMethod {
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

/// Distribution of a single jump coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JumpLaw {
    /// Uniform over a finite set of sizes.
    Discrete { values: Vec<f64> },
    /// `N(mean, sd^2)` conditioned on `|z - mean| <= bound`.
    Gaussian { mean: f64, sd: f64, bound: f64 },
}

impl Default for JumpLaw {
    fn default() -> Self {
        Self::Discrete {
            values: vec![-0.5, 0.5],
        }
    }
}

impl JumpLaw {
    fn validate(&self) -> Result<()> {
        match self {
            Self::Discrete { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Precondition("discrete jump law needs finite values".into()));
                }
            }
            Self::Gaussian { mean, sd, bound } => {
                if !(mean.is_finite() && *sd > 0.0 && sd.is_finite() && *bound > 0.0) {
                    return Err(Error::Precondition("gaussian jump law needs sd > 0 and bound > 0".into()));
                }
            }
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Discrete { values } => values[rng.random_range(0..values.len())],
            Self::Gaussian { mean, sd, bound } => loop {
                let z: f64 = StandardNormal.sample(rng);
                if (z * sd).abs() <= *bound {
                    break mean + z * sd;
                }
            },
        }
    }
}

fn default_d() -> usize {
    1
}

fn default_hurst() -> f64 {
    0.5
}

fn default_horizon() -> f64 {
    1.0
}

fn default_sigma() -> f64 {
    1.0
}

/// Parameters shared by all generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Path index within a batch; selects the random stream.
    #[serde(default)]
    pub stream: u64,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_hurst")]
    pub hurst: f64,
    /// Scale of the fBm component in mixed and wealth drivers.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Poisson jump rate.
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub jump_law: JumpLaw,
    /// Drift per coordinate.
    #[serde(default)]
    pub drift: f64,
    /// Starting value of every coordinate.
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub method: FbmMethod,
}

impl GeneratorConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        Self {
            seed,
            stream: 0,
            horizon: 1.0,
            n,
            d: 1,
            hurst: 0.5,
            sigma: 1.0,
            rate: 0.0,
            jump_law: JumpLaw::default(),
            drift: 0.0,
            x0: 0.0,
            method: FbmMethod::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Precondition(format!("N must be >= 2, got {}", self.n)));
        }
        if self.d == 0 {
            return Err(Error::Precondition("d must be >= 1".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Precondition("T must be positive and finite".into()));
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::Precondition(format!("H must lie in (0, 1), got {}", self.hurst)));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::Precondition(format!("rate must be >= 0, got {}", self.rate)));
        }
        if !(self.drift.is_finite() && self.x0.is_finite() && self.sigma.is_finite()) {
            return Err(Error::Precondition("drift, sigma and x0 must be finite".into()));
        }
        self.jump_law.validate()
    }

    fn times(&self) -> Vec<f64> {
        uniform_times(self.horizon, self.n)
    }
}

/// Random stream components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Fbm = 1,
    Jumps = 2,
    Wealth = 3,
}

/// ChaCha8 seeded by `seed`, on a stream derived from `(index, component, attempt)`.
pub fn stream_rng(seed: u64, index: u64, component: Substream, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((index << 16) | ((component as u64) << 8) | (attempt & 0xff));
    rng
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Exact sampler of `N` unit-step fGn increments, reusable across paths.
#[derive(Clone)]
pub struct FbmSampler {
    n: usize,
    hurst: f64,
    kind: SamplerKind,
}

#[derive(Clone)]
enum SamplerKind {
    Cholesky(DMatrix<f64>),
    Circulant { sqrt_eigs: Vec<f64>, fft: Arc<dyn Fft<f64>> },
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            SamplerKind::Cholesky(_) => "cholesky",
            SamplerKind::Circulant { .. } => "circulant",
        };
        f.debug_struct("FbmSampler")
            .field("n", &self.n)
            .field("hurst", &self.hurst)
            .field("kind", &kind)
            .finish()
    }
}

impl FbmSampler {
    pub fn new(n: usize, hurst: f64, method: FbmMethod) -> Result<Self> {
        if n == 0 || !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Precondition("fBm sampler needs N >= 1 and H in (0, 1)".into()));
        }
        let cholesky = match method {
            FbmMethod::Auto => n <= CHOLESKY_MAX_N,
            FbmMethod::Cholesky => true,
            FbmMethod::Circulant => false,
        };
        let kind = if cholesky {
            let cov = DMatrix::from_fn(n, n, |i, j| fgn_autocovariance(hurst, i.abs_diff(j)));
            let chol = Cholesky::new(cov)
                .ok_or_else(|| Error::Generator("fGn covariance is not positive definite".into()))?;
            SamplerKind::Cholesky(chol.l())
        } else {
            let m = 2 * n;
            let mut row: Vec<Complex<f64>> = (0..m)
                .map(|k| {
                    let lag = if k <= n { k } else { m - k };
                    Complex::new(fgn_autocovariance(hurst, lag), 0.0)
                })
                .collect();
            let fft = FftPlanner::new().plan_fft_forward(m);
            fft.process(&mut row);
            let top = row.iter().fold(0.0f64, |a, c| a.max(c.re.abs()));
            let mut sqrt_eigs = Vec::with_capacity(m);
            for c in &row {
                if c.re < -1e-10 * top {
                    return Err(Error::Generator(format!(
                        "circulant embedding has a negative eigenvalue {}",
                        c.re
                    )));
                }
                sqrt_eigs.push((c.re.max(0.0) / m as f64).sqrt());
            }
            SamplerKind::Circulant { sqrt_eigs, fft }
        };
        Ok(Self { n, hurst, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// `N` fGn increments with unit step.
    pub fn increments<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            SamplerKind::Cholesky(l) => {
                let z = DVector::from_fn(self.n, |_, _| StandardNormal.sample(rng));
                (l * z).iter().copied().collect()
            }
            SamplerKind::Circulant { sqrt_eigs, fft } => {
                let mut buf: Vec<Complex<f64>> = sqrt_eigs
                    .iter()
                    .map(|&s| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..self.n].iter().map(|c| c.re).collect()
            }
        }
    }

    /// `B^H` on the uniform grid of `[0, T]`, starting at 0.
    pub fn path_values<R: Rng>(&self, horizon: f64, rng: &mut R) -> Vec<f64> {
        let scale = (horizon / self.n as f64).powf(self.hurst);
        let mut out = Vec::with_capacity(self.n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for z in self.increments(rng) {
            acc += scale * z;
            out.push(acc);
        }
        out
    }
}

fn fbm_coordinates(cfg: &GeneratorConfig, sampler: &FbmSampler) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(cfg.seed, cfg.stream, Substream::Fbm, 0);
    (0..cfg.d).map(|_| sampler.path_values(cfg.horizon, &mut rng)).collect()
}

fn assemble_continuous(cfg: &GeneratorConfig, coords: &[Vec<f64>], offset: f64) -> Result<RegulatedPath<f64>> {
    let values = (0..=cfg.n)
        .map(|k| coords.iter().map(|c| offset + c[k]).collect())
        .collect();
    RegulatedPath::continuous(cfg.times(), values)
}

/// `x0 + B^H` on the uniform grid.
pub fn gen_fbm(cfg: &GeneratorConfig) -> Result<RegulatedPath<f64>> {
    cfg.validate()?;
    let sampler = FbmSampler::new(cfg.n, cfg.hurst, cfg.method)?;
    gen_fbm_with(cfg, &sampler)
}

/// [`gen_fbm`] with a prebuilt sampler.
pub fn gen_fbm_with(cfg: &GeneratorConfig, sampler: &FbmSampler) -> Result<RegulatedPath<f64>> {
    cfg.validate()?;
    if sampler.n() != cfg.n || sampler.hurst() != cfg.hurst {
        return Err(Error::Precondition("sampler does not match the configuration".into()));
    }
    assemble_continuous(cfg, &fbm_coordinates(cfg, sampler), cfg.x0)
}

/// Jump times and sizes before they are placed on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub x0: f64,
    pub drift: f64,
    pub times: Vec<f64>,
    pub sizes: Vec<Vec<f64>>,
}

/// Draws `K ~ Poisson(λT)` jumps with uniform times and i.i.d. sizes.
pub fn gen_jump_record(cfg: &GeneratorConfig) -> Result<JumpRecord> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, cfg.stream, Substream::Jumps, 0);
    let mean = cfg.rate * cfg.horizon;
    let count = if mean > 0.0 {
        let law = Poisson::new(mean).map_err(|e| Error::Generator(e.to_string()))?;
        law.sample(&mut rng) as usize
    } else {
        0
    };
    let mut times: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * cfg.horizon).collect();
    times.sort_by(f64::total_cmp);
    let sizes = (0..count)
        .map(|_| (0..cfg.d).map(|_| cfg.jump_law.sample(&mut rng)).collect())
        .collect();
    Ok(JumpRecord {
        x0: cfg.x0,
        drift: cfg.drift,
        times,
        sizes,
    })
}

/// A compound Poisson path with its generator-side bookkeeping.
#[derive(Clone, Debug)]
pub struct CompoundPoisson {
    pub path: RegulatedPath<f64>,
    pub record: JumpRecord,
    /// Grid index of each recorded jump.
    pub slots: Vec<usize>,
    /// `Σ |t_jump - t_slot|`.
    pub snap_displacement: f64,
    /// Exact 1-variation of the gridded path: `Σ ||jump|| + ||b|| T` over merged jumps.
    pub one_variation: f64,
}

/// Places `record` on the uniform grid of `cfg`. Jump times snap to the
/// nearest grid index in `1..=N`; jumps sharing a slot are merged.
pub fn snap_jumps(cfg: &GeneratorConfig, record: &JumpRecord) -> Result<CompoundPoisson> {
    let n = cfg.n;
    if record.times.len() > n {
        return Err(Error::Generator(format!(
            "{} jumps exceed the grid capacity N = {n}",
            record.times.len()
        )));
    }
    let d = cfg.d;
    let times = cfg.times();
    let step = cfg.horizon / n as f64;
    let mut slot_jump = vec![vec![0.0; d]; n + 1];
    let mut has_jump = vec![false; n + 1];
    let mut slots = Vec::with_capacity(record.times.len());
    let mut snap_displacement = 0.0;
    for (t, size) in record.times.iter().zip(&record.sizes) {
        if size.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: size.len(),
            });
        }
        let k = ((t / step).round() as usize).clamp(1, n);
        snap_displacement += (t - times[k]).abs();
        for (a, s) in slot_jump[k].iter_mut().zip(size) {
            *a += s;
        }
        has_jump[k] = true;
        slots.push(k);
    }
    let mut level = vec![record.x0; d];
    let mut points = Vec::with_capacity(n + 1);
    let mut jump_var = 0.0;
    for k in 0..=n {
        let drift = record.drift * times[k];
        let left: Vec<f64> = level.iter().map(|l| l + drift).collect();
        if has_jump[k] && slot_jump[k].iter().any(|&s| s != 0.0) {
            jump_var += slot_jump[k].iter().map(|s| s * s).sum::<f64>().sqrt();
            for (l, s) in level.iter_mut().zip(&slot_jump[k]) {
                *l += s;
            }
        }
        let at: Vec<f64> = level.iter().map(|l| l + drift).collect();
        points.push(GridPoint {
            t: times[k],
            right: at.clone(),
            left,
            at,
        });
    }
    let path = RegulatedPath::from_points(cfg.horizon, d, points)?;
    Ok(CompoundPoisson {
        path,
        record: record.clone(),
        slots,
        snap_displacement,
        one_variation: jump_var + record.drift.abs() * (d as f64).sqrt() * cfg.horizon,
    })
}

/// Càdlàg compound Poisson path with drift.
pub fn gen_compound_poisson(cfg: &GeneratorConfig) -> Result<CompoundPoisson> {
    snap_jumps(cfg, &gen_jump_record(cfg)?)
}

/// `x0 + σ B^H + J` with its two components.
#[derive(Clone, Debug)]
pub struct Mixed {
    pub path: RegulatedPath<f64>,
    /// `σ B^H` starting at 0.
    pub fbm: RegulatedPath<f64>,
    pub jumps: CompoundPoisson,
}

pub fn gen_mixed(cfg: &GeneratorConfig) -> Result<Mixed> {
    cfg.validate()?;
    let sampler = FbmSampler::new(cfg.n, cfg.hurst, cfg.method)?;
    gen_mixed_with(cfg, &sampler)
}

pub fn gen_mixed_with(cfg: &GeneratorConfig, sampler: &FbmSampler) -> Result<Mixed> {
    let jumps = gen_compound_poisson(cfg)?;
    let mut coords = fbm_coordinates(cfg, sampler);
    for c in &mut coords {
        for v in c.iter_mut() {
            *v *= cfg.sigma;
        }
    }
    let fbm = assemble_continuous(cfg, &coords, 0.0)?;
    let path = jumps.path.add(&fbm)?;
    Ok(Mixed { path, fbm, jumps })
}

/// A wealth path with the return path that drove it.
#[derive(Clone, Debug)]
pub struct Wealth {
    pub path: RegulatedPath<f64>,
    pub returns: RegulatedPath<f64>,
    /// Number of return paths drawn until positivity held.
    pub attempts: usize,
}

/// Retries [`gen_wealth`] makes before giving up.
pub const WEALTH_MAX_ATTEMPTS: usize = 64;

/// `W` from `dW = W_- π_- dR`, stepped on the grid: the continuous move into
/// each grid time, then the jump there, both at the previous grid's `π`.
pub fn wealth_from_returns(returns: &RegulatedPath<f64>, strategy: &[f64], w0: f64) -> Result<RegulatedPath<f64>> {
    if returns.dim() != 1 {
        return Err(Error::Precondition("returns must be scalar".into()));
    }
    if !returns.is_cadlag() {
        return Err(Error::Precondition("returns must be càdlàg".into()));
    }
    if strategy.len() != returns.len() {
        return Err(Error::DimensionMismatch {
            expected: returns.len(),
            got: strategy.len(),
        });
    }
    if !(w0 > 0.0) {
        return Err(Error::Precondition("initial wealth must be positive".into()));
    }
    let mut w = w0;
    let mut points = vec![GridPoint::continuous(0.0, vec![w0])];
    for k in 1..returns.len() {
        let pi = strategy[k - 1];
        let before = 1.0 + pi * (returns.left(k)[0] - returns.at(k - 1)[0]);
        let jump = 1.0 + pi * (returns.at(k)[0] - returns.left(k)[0]);
        if !(before > 0.0 && jump > 0.0) {
            return Err(Error::Generator(format!(
                "wealth factor is not positive at t = {}",
                returns.time(k)
            )));
        }
        let left = w * before;
        w = left * jump;
        points.push(GridPoint {
            t: returns.time(k),
            left: vec![left],
            at: vec![w],
            right: vec![w],
        });
    }
    RegulatedPath::from_points(returns.horizon(), 1, points)
}

/// Positive wealth driven by a mixed return path `R` (set `sigma = 0` for a
/// finite-variation driver). Return paths that would make wealth
/// non-positive are redrawn from fresh streams.
pub fn gen_wealth(cfg: &GeneratorConfig, strategy: &[f64], w0: f64) -> Result<Wealth> {
    cfg.validate()?;
    if cfg.d != 1 {
        return Err(Error::Precondition("wealth generation needs d = 1".into()));
    }
    let sampler = if cfg.sigma != 0.0 {
        Some(FbmSampler::new(cfg.n, cfg.hurst, cfg.method)?)
    } else {
        None
    };
    for attempt in 0..WEALTH_MAX_ATTEMPTS {
        let mut sub = cfg.clone();
        // attempt 0 keeps the caller's streams
        if attempt > 0 {
            let mut rng = stream_rng(cfg.seed, cfg.stream, Substream::Wealth, attempt as u64);
            sub.seed = rng.random();
        }
        let returns = match &sampler {
            Some(s) => gen_mixed_with(&sub, s)?.path,
            None => gen_compound_poisson(&sub)?.path,
        };
        match wealth_from_returns(&returns, strategy, w0) {
            Ok(path) => {
                return Ok(Wealth {
                    path,
                    returns,
                    attempts: attempt + 1,
                })
            }
            Err(Error::Generator(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generator(format!(
        "no positive wealth path after {WEALTH_MAX_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fgn_covariance_at_half_is_white() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 1).abs() < 1e-15);
        assert!(fgn_autocovariance(0.75, 1) > 0.0);
        assert!(fgn_autocovariance(0.25, 1) < 0.0);
    }

    #[test]
    fn determinism() {
        let mut cfg = GeneratorConfig::new(7, 64);
        cfg.hurst = 0.3;
        cfg.rate = 4.0;
        let a = gen_mixed(&cfg).unwrap();
        let b = gen_mixed(&cfg).unwrap();
        assert_eq!(a.path, b.path);
        cfg.stream = 1;
        assert_ne!(gen_mixed(&cfg).unwrap().path, a.path);
    }

    #[test]
    fn zero_rate_is_flat() {
        let mut cfg = GeneratorConfig::new(1, 16);
        cfg.drift = -0.5;
        let cp = gen_compound_poisson(&cfg).unwrap();
        assert!(cp.path.jumps().is_empty());
        assert_eq!(cp.one_variation, 0.5);
        assert!((cp.path.p_variation(1.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn capacity_error() {
        let cfg = GeneratorConfig::new(1, 2);
        let record = JumpRecord {
            x0: 0.0,
            drift: 0.0,
            times: vec![0.1, 0.5, 0.9],
            sizes: vec![vec![1.0]; 3],
        };
        assert!(matches!(snap_jumps(&cfg, &record), Err(Error::Generator(_))));
    }

    #[test]
    fn snapping_merges_and_records() {
        let cfg = GeneratorConfig::new(1, 4);
        let record = JumpRecord {
            x0: 1.0,
            drift: 0.0,
            times: vec![0.01, 0.26, 0.27],
            sizes: vec![vec![0.5], vec![1.0], vec![-0.25]],
        };
        let cp = snap_jumps(&cfg, &record).unwrap();
        assert_eq!(cp.slots, vec![1, 1, 1]);
        assert_eq!(cp.path.at(1), &[2.25]);
        assert_eq!(cp.path.left(1), &[1.0]);
        assert!((cp.snap_displacement - (0.24 + 0.01 + 0.02)).abs() < 1e-12);
        assert_eq!(cp.one_variation, 1.25);
    }

    #[test]
    fn wealth_examples() {
        let r = RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![0.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![0.0],
                    at: vec![0.5],
                    right: vec![0.5],
                },
                GridPoint::continuous(1.0, vec![0.5]),
            ],
        )
        .unwrap();
        let w = wealth_from_returns(&r, &[1.0; 3], 1.0).unwrap();
        assert_eq!(w.at(2), &[1.5]);
        let flat = wealth_from_returns(&r, &[0.0; 3], 2.0).unwrap();
        assert!((0..3).all(|k| flat.at(k) == [2.0]));
        assert!(wealth_from_returns(&r, &[-3.0; 3], 1.0).is_err());
    }

    #[test]
    fn circulant_and_cholesky_share_variance() {
        let n = 8;
        let chol = FbmSampler::new(n, 0.7, FbmMethod::Cholesky).unwrap();
        let circ = FbmSampler::new(n, 0.7, FbmMethod::Circulant).unwrap();
        let m = 4000;
        let var = |s: &FbmSampler| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..m)
                .map(|_| {
                    let v = s.path_values(1.0, &mut rng)[n];
                    v * v
                })
                .sum::<f64>()
                / m as f64
        };
        // Var(B_1) = 1; 4000 samples give a standard error near 0.022
        assert!((var(&chol) - 1.0).abs() < 0.1);
        assert!((var(&circ) - 1.0).abs() < 0.1);
    }
}
