//! Finitely presented regulated paths.
//!
//! A path is known only at its grid times, where it carries three values:
//! the left limit, the value itself and the right limit. Everything else
//! (increments, jumps, oscillation, p-variation) is computed from those.

use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{distance, lit, Scalar};
use crate::tensor::Vector;

/// One grid point of a regulated path.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint<T> {
    pub t: T,
    pub left: Vec<T>,
    pub at: Vec<T>,
    pub right: Vec<T>,
}

impl<T: Scalar> GridPoint<T> {
    pub fn continuous(t: T, at: Vec<T>) -> Self {
        Self {
            t,
            left: at.clone(),
            right: at.clone(),
            at,
        }
    }
}

/// Which one-sided value of a grid point is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    At,
    Right,
}

/// A path on `[0, T]` presented on a finite grid with one-sided limits.
#[derive(Clone, Debug, PartialEq)]
pub struct RegulatedPath<T> {
    horizon: T,
    dim: usize,
    times: Vec<T>,
    left: Vec<T>,
    at: Vec<T>,
    right: Vec<T>,
}

/// A jump at a grid time: `minus = X_t - X_{t-}`, `plus = X_{t+} - X_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jump<T> {
    pub index: usize,
    pub time: T,
    pub minus: Vector<T>,
    pub plus: Vector<T>,
}

impl<T: Scalar> RegulatedPath<T> {
    /// Validates and assembles a path from its grid points.
    pub fn from_points(horizon: T, dim: usize, points: Vec<GridPoint<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be >= 1".into()));
        }
        if points.len() < 2 {
            return Err(Error::InvalidPath("need at least two grid points".into()));
        }
        if !horizon.is_finite() || horizon <= T::zero() {
            return Err(Error::InvalidPath(format!("horizon must be positive and finite, got {horizon}")));
        }
        let n = points.len();
        let mut path = Self {
            horizon,
            dim,
            times: Vec::with_capacity(n),
            left: Vec::with_capacity(n * dim),
            at: Vec::with_capacity(n * dim),
            right: Vec::with_capacity(n * dim),
        };
        for (i, p) in points.into_iter().enumerate() {
            if !p.t.is_finite() {
                return Err(Error::InvalidPath(format!("time {i} is not finite")));
            }
            if let Some(&prev) = path.times.last() {
                if p.t <= prev {
                    return Err(Error::InvalidPath(format!(
                        "times must be strictly increasing (t[{i}] = {} after {prev})",
                        p.t
                    )));
                }
            }
            for (name, v) in [("left", &p.left), ("at", &p.at), ("right", &p.right)] {
                if v.len() != dim {
                    return Err(Error::InvalidPath(format!(
                        "{name} value at t[{i}] has dimension {}, expected {dim}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPath(format!("{name} value at t[{i}] is not finite")));
                }
            }
            path.times.push(p.t);
            path.left.extend_from_slice(&p.left);
            path.at.extend_from_slice(&p.at);
            path.right.extend_from_slice(&p.right);
        }
        if path.times[0] != T::zero() {
            return Err(Error::InvalidPath("first grid time must be 0".into()));
        }
        if *path.times.last().unwrap() != horizon {
            return Err(Error::InvalidPath("last grid time must equal the horizon T".into()));
        }
        if path.left(0) != path.at(0) {
            return Err(Error::InvalidPath("left limit at t = 0 must equal the value".into()));
        }
        if path.right(n - 1) != path.at(n - 1) {
            return Err(Error::InvalidPath("right limit at t = T must equal the value".into()));
        }
        Ok(path)
    }

    /// Continuous path through `values` at `times` (with `times[0] = 0`).
    pub fn continuous(times: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidPath("times and values differ in length".into()));
        }
        let dim = values.first().map_or(0, Vec::len);
        let horizon = *times.last().ok_or_else(|| Error::InvalidPath("empty path".into()))?;
        let points = times
            .into_iter()
            .zip(values)
            .map(|(t, v)| GridPoint::continuous(t, v))
            .collect();
        Self::from_points(horizon, dim, points)
    }

    /// Scalar continuous path on the uniform grid `k T / N`.
    pub fn uniform_scalar(horizon: T, values: &[T]) -> Result<Self> {
        let n = values.len().saturating_sub(1).max(1);
        let times = uniform_times(horizon, n);
        Self::continuous(times, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points, `N + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last grid point, `N`.
    pub fn last_index(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn time(&self, i: usize) -> T {
        self.times[i]
    }

    pub fn at(&self, i: usize) -> &[T] {
        &self.at[i * self.dim..(i + 1) * self.dim]
    }

    pub fn left(&self, i: usize) -> &[T] {
        &self.left[i * self.dim..(i + 1) * self.dim]
    }

    pub fn right(&self, i: usize) -> &[T] {
        &self.right[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, i: usize, side: Side) -> &[T] {
        match side {
            Side::Left => self.left(i),
            Side::At => self.at(i),
            Side::Right => self.right(i),
        }
    }

    pub fn point(&self, i: usize) -> GridPoint<T> {
        GridPoint {
            t: self.times[i],
            left: self.left(i).to_vec(),
            at: self.at(i).to_vec(),
            right: self.right(i).to_vec(),
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        for idx in [i, j] {
            if idx >= self.len() {
                return Err(Error::Index {
                    index: idx,
                    len: self.len(),
                });
            }
        }
        if i > j {
            return Err(Error::Precondition(format!("increment needs i <= j, got {i} > {j}")));
        }
        Ok(())
    }

    /// `X_{t_i, t_j} = X_{t_j} - X_{t_i}`.
    pub fn increment(&self, i: usize, j: usize) -> Result<Vector<T>> {
        self.check_pair(i, j)?;
        Ok(Vector::difference(self.at(i), self.at(j)))
    }

    /// `X_{t_i+, t_j-} = X_{t_j-} - X_{t_i+}`.
    pub fn open_increment(&self, i: usize, j: usize) -> Result<Vector<T>> {
        self.check_pair(i, j)?;
        Ok(Vector::difference(self.right(i), self.left(j)))
    }

    /// `X_{t_j-} - X_{t_i}`.
    pub fn increment_to_left(&self, i: usize, j: usize) -> Result<Vector<T>> {
        self.check_pair(i, j)?;
        Ok(Vector::difference(self.at(i), self.left(j)))
    }

    pub fn jump_minus(&self, i: usize) -> Vector<T> {
        Vector::difference(self.left(i), self.at(i))
    }

    pub fn jump_plus(&self, i: usize) -> Vector<T> {
        Vector::difference(self.at(i), self.right(i))
    }

    pub fn is_continuous_at(&self, i: usize) -> bool {
        self.left(i) == self.at(i) && self.at(i) == self.right(i)
    }

    /// Grid times where a one-sided limit differs from the value.
    pub fn jumps(&self) -> Vec<Jump<T>> {
        (0..self.len())
            .filter(|&i| !self.is_continuous_at(i))
            .map(|i| Jump {
                index: i,
                time: self.times[i],
                minus: self.jump_minus(i),
                plus: self.jump_plus(i),
            })
            .collect()
    }

    /// Right-continuous everywhere (`X_{t+} = X_t`).
    pub fn is_cadlag(&self) -> bool {
        self.right == self.at
    }

    pub fn is_continuous(&self) -> bool {
        self.is_cadlag() && self.left == self.at
    }

    /// Largest increment norm between one-sided values of grid points
    /// strictly inside `(t_i, t_j)`; zero when there are none.
    pub fn oscillation(&self, i: usize, j: usize) -> Result<T> {
        self.check_pair(i, j)?;
        let mut tracker = Diameter::new(self.dim);
        for m in i + 1..j {
            tracker.push_point(self, m);
        }
        Ok(tracker.value())
    }

    /// Per-coordinate `(min, max)` over every one-sided value.
    pub fn value_range(&self) -> Vec<(T, T)> {
        (0..self.dim)
            .map(|c| {
                let mut lo = T::infinity();
                let mut hi = T::neg_infinity();
                for v in [&self.left, &self.at, &self.right] {
                    for x in v.iter().skip(c).step_by(self.dim) {
                        lo = lo.min(*x);
                        hi = hi.max(*x);
                    }
                }
                (lo, hi)
            })
            .collect()
    }

    /// The ordered one-sided values on `[t_i, t_j]`: `X_{t_i}, X_{t_i+},
    /// X_{t_{i+1}-}, ..., X_{t_j-}, X_{t_j}` with exact repeats removed.
    /// Also returns, for each grid index `m` in `i..=j`, the position of
    /// `X_{t_m}` in that list.
    fn expanded(&self, i: usize, j: usize) -> (Vec<(usize, Side)>, Vec<usize>) {
        let mut seq: Vec<(usize, Side)> = Vec::with_capacity(3 * (j - i + 1));
        let mut at_pos = Vec::with_capacity(j - i + 1);
        let push = |seq: &mut Vec<(usize, Side)>, m: usize, side: Side| {
            let dup = seq
                .last()
                .is_some_and(|&(pm, ps)| self.value(pm, ps) == self.value(m, side));
            if !dup {
                seq.push((m, side));
            }
            seq.len() - 1
        };
        for m in i..=j {
            if m > i {
                push(&mut seq, m, Side::Left);
            }
            at_pos.push(push(&mut seq, m, Side::At));
            if m < j {
                push(&mut seq, m, Side::Right);
            }
        }
        (seq, at_pos)
    }

    /// `||X||_{p-var; [0,T]}`, exact over all partitions of the grid and its
    /// one-sided limits.
    pub fn p_variation(&self, p: T) -> Result<T> {
        Ok(self.p_variation_witness(p)?.value)
    }

    /// p-variation together with a maximizing partition.
    pub fn p_variation_witness(&self, p: T) -> Result<PVarWitness<T>> {
        check_exponent(p)?;
        let (seq, _) = self.expanded(0, self.last_index());
        let (best, back) = pvar_dp(self, &seq, p);
        let mut points = Vec::new();
        let mut k = seq.len() - 1;
        loop {
            let (m, side) = seq[k];
            points.push(WitnessPoint {
                index: m,
                t: self.times[m],
                side,
            });
            if k == 0 {
                break;
            }
            k = back[k];
        }
        points.reverse();
        Ok(PVarWitness {
            value: best[seq.len() - 1].powf(T::one() / p),
            p_sum: best[seq.len() - 1],
            points,
        })
    }

    /// Copy of the path on `[t_i, t_j]` shifted to start at time 0.
    pub fn restrict(&self, i: usize, j: usize) -> Result<Self> {
        self.check_pair(i, j)?;
        if i == j {
            return Err(Error::Precondition("restriction needs i < j".into()));
        }
        let t0 = self.times[i];
        let points = (i..=j)
            .map(|m| {
                let mut p = self.point(m);
                p.t -= t0;
                if m == i {
                    p.left = p.at.clone();
                }
                if m == j {
                    p.right = p.at.clone();
                }
                p
            })
            .collect();
        Self::from_points(self.times[j] - t0, self.dim, points)
    }

    /// Every `stride`-th grid point (the last point is always kept).
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Precondition("stride must be >= 1".into()));
        }
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if *idx.last().unwrap() != self.last_index() {
            idx.push(self.last_index());
        }
        let points = idx.into_iter().map(|m| self.point(m)).collect();
        Self::from_points(self.horizon, self.dim, points)
    }

    /// Pointwise sum of two paths on the same grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.times != other.times || self.dim != other.dim {
            return Err(Error::Precondition("paths must share grid and dimension".into()));
        }
        let sum = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x + y).collect::<Vec<_>>();
        Ok(Self {
            horizon: self.horizon,
            dim: self.dim,
            times: self.times.clone(),
            left: sum(&self.left, &other.left),
            at: sum(&self.at, &other.at),
            right: sum(&self.right, &other.right),
        })
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> RegulatedPath<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::from(*x).expect("castable scalar")).collect();
        RegulatedPath {
            horizon: U::from(self.horizon).expect("castable scalar"),
            dim: self.dim,
            times: conv(&self.times),
            left: conv(&self.left),
            at: conv(&self.at),
            right: conv(&self.right),
        }
    }

    /// Parses the JSON path format.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: PathFile<T> = serde_json::from_str(s)?;
        file.into_path()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PathFile::from_path(self))?)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }
}

/// `k T / N` for `k = 0..=N`, with the last time pinned to `T` exactly.
pub fn uniform_times<T: Scalar>(horizon: T, n: usize) -> Vec<T> {
    let nn = lit::<T>(n as f64);
    let mut times: Vec<T> = (0..=n).map(|k| horizon * lit::<T>(k as f64) / nn).collect();
    times[n] = horizon;
    times
}

fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if p.is_nan() || p < T::one() {
        return Err(Error::Exponent(p.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// `best[k]` = sup of `Σ ||increment||^p` over partitions of `seq[0..=k]`.
fn pvar_dp<T: Scalar>(path: &RegulatedPath<T>, seq: &[(usize, Side)], p: T) -> (Vec<T>, Vec<usize>) {
    let vals: Vec<&[T]> = seq.iter().map(|&(m, s)| path.value(m, s)).collect();
    let mut best = vec![T::zero(); vals.len()];
    let mut back = vec![0usize; vals.len()];
    for j in 1..vals.len() {
        let mut top = T::neg_infinity();
        let mut arg = 0;
        for i in 0..j {
            let cand = best[i] + distance(vals[i], vals[j]).powf(p);
            if cand > top {
                top = cand;
                arg = i;
            }
        }
        best[j] = top;
        back[j] = arg;
    }
    (best, back)
}

/// A point of the maximizing partition returned with the p-variation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessPoint<T> {
    pub index: usize,
    pub t: T,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PVarWitness<T> {
    /// `||X||_{p-var}`.
    pub value: T,
    /// `||X||_{p-var}^p`.
    pub p_sum: T,
    pub points: Vec<WitnessPoint<T>>,
}

/// Running diameter of a point cloud.
pub(crate) struct Diameter<T> {
    dim: usize,
    lo: T,
    hi: T,
    points: Vec<T>,
    best: T,
}

impl<T: Scalar> Diameter<T> {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            lo: T::infinity(),
            hi: T::neg_infinity(),
            points: Vec::new(),
            best: T::zero(),
        }
    }

    pub(crate) fn push(&mut self, v: &[T]) {
        if self.dim == 1 {
            self.lo = self.lo.min(v[0]);
            self.hi = self.hi.max(v[0]);
            self.best = self.hi - self.lo;
            return;
        }
        for q in self.points.chunks(self.dim) {
            self.best = self.best.max(distance(q, v));
        }
        self.points.extend_from_slice(v);
    }

    pub(crate) fn push_point(&mut self, path: &RegulatedPath<T>, m: usize) {
        self.push(path.left(m));
        self.push(path.at(m));
        self.push(path.right(m));
    }

    pub(crate) fn value(&self) -> T {
        self.best
    }
}

/// Ordered grid indices `0 = i_0 < .. < i_K = N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(indices: Vec<usize>, grid_len: usize) -> Result<Self> {
        if grid_len < 2 {
            return Err(Error::InvalidPartition("grid has fewer than two points".into()));
        }
        if indices.first() != Some(&0) || indices.last() != Some(&(grid_len - 1)) {
            return Err(Error::InvalidPartition("partition must contain both endpoints".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition("indices must be strictly increasing".into()));
        }
        Ok(Self(indices))
    }

    pub fn full(grid_len: usize) -> Self {
        Self((0..grid_len).collect())
    }

    pub fn coarsest(grid_len: usize) -> Self {
        Self(vec![0, grid_len - 1])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn n_cells(&self) -> usize {
        self.0.len() - 1
    }

    pub fn last(&self) -> usize {
        *self.0.last().unwrap()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v: Vec<usize> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Whether every index of `other` also belongs to `self`.
    pub fn refines(&self, other: &Self) -> bool {
        other.0.iter().all(|i| self.0.binary_search(i).is_ok())
    }
}

/// `c(s, t) = ||X||^p_{p-var; [s,t]}` over grid-time pairs.
#[derive(Clone, Debug)]
pub struct ControlFunction<'a, T> {
    path: &'a RegulatedPath<T>,
    p: T,
}

/// Canonical p-variation control of `path`.
pub fn control<T: Scalar>(path: &RegulatedPath<T>, p: T) -> Result<ControlFunction<'_, T>> {
    check_exponent(p)?;
    Ok(ControlFunction { path, p })
}

impl<'a, T: Scalar> ControlFunction<'a, T> {
    pub fn p(&self) -> T {
        self.p
    }

    pub fn path(&self) -> &'a RegulatedPath<T> {
        self.path
    }

    /// `c(t_i, t_j)`.
    pub fn value(&self, i: usize, j: usize) -> Result<T> {
        self.path.check_pair(i, j)?;
        if i == j {
            return Ok(T::zero());
        }
        let (seq, _) = self.path.expanded(i, j);
        let (best, _) = pvar_dp(self.path, &seq, self.p);
        Ok(best[seq.len() - 1])
    }

    /// `c(t_i, t_j)` for every `j >= i`, from a single DP pass.
    pub fn row(&self, i: usize) -> Result<Vec<T>> {
        let last = self.path.last_index();
        self.path.check_pair(i, last)?;
        let (seq, at_pos) = self.path.expanded(i, last);
        let (best, _) = pvar_dp(self.path, &seq, self.p);
        Ok(at_pos.into_iter().map(|k| best[k]).collect())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct PathFile<T> {
    #[serde(rename = "T")]
    horizon: T,
    d: usize,
    points: Vec<PointRecord<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct PointRecord<T> {
    t: T,
    at: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Vec<T>>,
}

impl<T: Scalar> PathFile<T> {
    fn into_path(self) -> Result<RegulatedPath<T>> {
        let points = self
            .points
            .into_iter()
            .map(|r| GridPoint {
                t: r.t,
                left: r.left.unwrap_or_else(|| r.at.clone()),
                right: r.right.unwrap_or_else(|| r.at.clone()),
                at: r.at,
            })
            .collect();
        RegulatedPath::from_points(self.horizon, self.d, points)
    }

    fn from_path(path: &RegulatedPath<T>) -> Self {
        let points = (0..path.len())
            .map(|i| {
                let at = path.at(i).to_vec();
                let left = (path.left(i) != path.at(i)).then(|| path.left(i).to_vec());
                let right = (path.right(i) != path.at(i)).then(|| path.right(i).to_vec());
                PointRecord {
                    t: path.time(i),
                    at,
                    left,
                    right,
                }
            })
            .collect();
        Self {
            horizon: path.horizon,
            d: path.dim,
            points,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(values: &[f64]) -> RegulatedPath<f64> {
        RegulatedPath::uniform_scalar(1.0, values).unwrap()
    }

    fn step_path() -> RegulatedPath<f64> {
        // jumps from the right at t = 0
        RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint {
                    t: 0.0,
                    left: vec![0.0],
                    at: vec![0.0],
                    right: vec![1.0],
                },
                GridPoint::continuous(1.0, vec![1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn increments() {
        let x = scalar(&[0.0, 1.0, 3.0]);
        assert!(x.increment(1, 1).unwrap().is_zero());
        assert_eq!(x.increment(0, 2).unwrap().as_slice(), &[3.0]);
        assert!(x.increment(2, 1).is_err());
        assert!(matches!(x.increment(0, 3), Err(Error::Index { .. })));
        let s = step_path();
        assert_eq!(s.open_increment(0, 1).unwrap().as_slice(), &[0.0]);
        assert_eq!(s.increment(0, 1).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn jump_enumeration() {
        assert!(scalar(&[0.0, 1.0, 0.5]).jumps().is_empty());
        let cadlag = RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![0.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![0.0],
                    at: vec![1.0],
                    right: vec![1.0],
                },
                GridPoint::continuous(1.0, vec![1.0]),
            ],
        )
        .unwrap();
        let j = cadlag.jumps();
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].minus.as_slice(), &[1.0]);
        assert_eq!(j[0].plus.as_slice(), &[0.0]);
        assert!(cadlag.is_cadlag() && !cadlag.is_continuous());

        let two_sided = RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![0.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![0.0],
                    at: vec![1.0],
                    right: vec![3.0],
                },
                GridPoint::continuous(1.0, vec![3.0]),
            ],
        )
        .unwrap();
        let j = two_sided.jumps();
        assert_eq!((j[0].minus[0], j[0].plus[0]), (1.0, 2.0));
        assert!(!two_sided.is_cadlag());
    }

    #[test]
    fn oscillation_examples() {
        let x = scalar(&[0.0, 5.0, 0.0]);
        assert_eq!(x.oscillation(0, 1).unwrap(), 0.0);
        assert_eq!(x.oscillation(0, 2).unwrap(), 0.0);
        let y = RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![0.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![0.0],
                    at: vec![2.0],
                    right: vec![2.0],
                },
                GridPoint::continuous(1.0, vec![2.0]),
            ],
        )
        .unwrap();
        assert_eq!(y.oscillation(0, 2).unwrap(), 2.0);
    }

    #[test]
    fn p_variation_examples() {
        assert_eq!(scalar(&[0.0, 1.0, 3.0]).p_variation(1.0).unwrap(), 3.0);
        let v = scalar(&[0.0, 1.0, 0.0]).p_variation(2.0).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(scalar(&[0.0, 2.0, 1.0, 3.0]).p_variation(1.0).unwrap(), 5.0);
        assert!(matches!(scalar(&[0.0, 1.0]).p_variation(0.5), Err(Error::Exponent(_))));
    }

    #[test]
    fn jumps_enter_p_variation() {
        // a left jump of size 1 inside an otherwise flat path
        let x = RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![0.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![0.0],
                    at: vec![1.0],
                    right: vec![0.0],
                },
                GridPoint::continuous(1.0, vec![0.0]),
            ],
        )
        .unwrap();
        // up 1 and down 1
        assert_eq!(x.p_variation(1.0).unwrap(), 2.0);
        let w = x.p_variation_witness(2.0).unwrap();
        assert_eq!(w.p_sum, 2.0);
        assert!(w.points.iter().any(|p| p.side == Side::At && p.index == 1));
    }

    #[test]
    fn control_examples() {
        let x = scalar(&[0.0, 1.0, 0.0]);
        let c = control(&x, 2.0).unwrap();
        assert_eq!(c.value(1, 1).unwrap(), 0.0);
        assert!((c.value(0, 2).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(c.row(0).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(control(&x, 0.9).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 2, 4], 5).is_ok());
        assert!(Partition::new(vec![1, 4], 5).is_err());
        assert!(Partition::new(vec![0, 3], 5).is_err());
        assert!(Partition::new(vec![0, 2, 2, 4], 5).is_err());
        let a = Partition::new(vec![0, 2, 4], 5).unwrap();
        let b = Partition::new(vec![0, 1, 4], 5).unwrap();
        let u = a.union(&b);
        assert_eq!(u.indices(), &[0, 1, 2, 4]);
        assert!(u.refines(&a) && u.refines(&b) && !a.refines(&b));
    }

    #[test]
    fn json_format() {
        let src = r#"{"T": 1.0, "d": 1, "points": [
            {"t": 0.0, "at": [0.0]},
            {"t": 0.5, "at": [1.0], "left": [0.0]},
            {"t": 1.0, "at": [1.0]}]}"#;
        let x = RegulatedPath::<f64>::from_json_str(src).unwrap();
        assert_eq!(x.left(1), &[0.0]);
        assert_eq!(x.right(1), &[1.0]);
        let back = RegulatedPath::<f64>::from_json_str(&x.to_json_string().unwrap()).unwrap();
        assert_eq!(back, x);

        let bad_start = r#"{"T": 1.0, "d": 1, "points": [{"t": 0.1, "at": [0.0]}, {"t": 1.0, "at": [1.0]}]}"#;
        assert!(RegulatedPath::<f64>::from_json_str(bad_start).is_err());
        let non_monotone = r#"{"T": 1.0, "d": 1, "points": [{"t": 0.0, "at": [0.0]}, {"t": 0.7, "at": [1.0]}, {"t": 0.5, "at": [1.0]}, {"t": 1.0, "at": [1.0]}]}"#;
        assert!(RegulatedPath::<f64>::from_json_str(non_monotone).is_err());
        let wrong_end = r#"{"T": 2.0, "d": 1, "points": [{"t": 0.0, "at": [0.0]}, {"t": 1.0, "at": [1.0]}]}"#;
        assert!(RegulatedPath::<f64>::from_json_str(wrong_end).is_err());
        let wrong_dim = r#"{"T": 1.0, "d": 2, "points": [{"t": 0.0, "at": [0.0]}, {"t": 1.0, "at": [1.0]}]}"#;
        assert!(RegulatedPath::<f64>::from_json_str(wrong_dim).is_err());
        let left_at_zero = r#"{"T": 1.0, "d": 1, "points": [{"t": 0.0, "at": [0.0], "left": [1.0]}, {"t": 1.0, "at": [1.0]}]}"#;
        assert!(RegulatedPath::<f64>::from_json_str(left_at_zero).is_err());
        assert!(RegulatedPath::<f64>::from_json_str("{not json").is_err());
    }

    #[test]
    fn restrict_and_subsample() {
        let x = scalar(&[0.0, 1.0, 3.0, 2.0, 5.0]);
        let r = x.restrict(1, 3).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.time(0), 0.0);
        assert_eq!(r.at(2), &[2.0]);
        let s = x.subsample(2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.at(1), &[3.0]);
        let s3 = x.subsample(3).unwrap();
        assert_eq!(s3.times(), &[0.0, 0.75, 1.0]);
    }
}
