//! The six-term split of `F(X_T) - F(X_0)` over a partition, used to watch
//! the remainder terms `B_1, B_2, B_3` shrink under refinement.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lift::check_function;
use crate::path::{Partition, RegulatedPath};
use crate::rrs::{refinement_chain, Schedule};
use crate::scalar::{binomial, factorial, pairwise_sum, Scalar};
use crate::smoothfn::SmoothFunction;
use crate::tensor::{pair_rank1, SymForm};

/// Terms of the split on one partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofTerms<T> {
    pub cells: usize,
    pub lhs: T,
    /// Compensated sum at left endpoints.
    pub a1: T,
    /// Raw jumps of `F` at cell endpoints.
    pub a2: T,
    /// Negated Taylor parts of those jumps.
    pub a3: T,
    /// Taylor remainders over the open cells.
    pub b1: T,
    /// Right-jump remainder paired with the open-cell increment.
    pub b2: T,
    pub b3: T,
    /// `lhs - (a1 + a2 + a3 + b1 + b2 + b3)`; zero up to rounding when every
    /// cell is continuous at one of its endpoints.
    pub decomposition_defect: T,
    /// Whether every cell is continuous at one of its endpoints.
    pub alternating: bool,
}

impl<T: Scalar> ProofTerms<T> {
    pub fn max_b(&self) -> T {
        self.b1.abs().max(self.b2.abs()).max(self.b3.abs())
    }
}

struct Derivs<T> {
    forms: Vec<SymForm<T>>,
}

impl<T: Scalar> Derivs<T> {
    fn new(f: &dyn SmoothFunction<T>, x: &[T], n: usize) -> Result<Self> {
        Ok(Self {
            forms: (0..=n).map(|k| f.derivative(k, x)).collect::<Result<_>>()?,
        })
    }

    fn value(&self) -> T {
        self.forms[0].coeffs()[0]
    }

    /// `D^kF(v, .., v)`.
    fn on(&self, k: usize, v: &[T]) -> Result<T> {
        pair_rank1(&self.forms[k], v)
    }

    /// `D^kF(u^m, w^{k-m})`.
    fn mixed(&self, k: usize, u: &[T], m: usize, w: &[T]) -> Result<T> {
        self.forms[k].eval_mixed(u, m, w)
    }

    /// `Σ_{k=lo}^n D^kF(v^k) / k!`.
    fn taylor(&self, lo: usize, v: &[T]) -> Result<T> {
        let mut acc = T::zero();
        for k in lo..self.forms.len() {
            acc += self.on(k, v)? / factorial::<T>(k);
        }
        Ok(acc)
    }
}

fn diff<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| y - x).collect()
}

/// Evaluates `A_1..A_3` and `B_1..B_3` on `partition`.
pub fn proof_terms_on_partition<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    x: &RegulatedPath<T>,
    p: T,
    partition: &Partition,
) -> Result<ProofTerms<T>> {
    if !p.is_finite() || p < T::one() {
        return Err(Error::Exponent(p.to_f64().unwrap_or(f64::NAN)));
    }
    let n = p.floor().to_usize().unwrap_or(usize::MAX);
    check_function(f, x, n)?;
    if partition.last() != x.last_index() {
        return Err(Error::InvalidPartition("partition does not match the grid".into()));
    }
    let cells = partition.n_cells();
    let mut cols: [Vec<T>; 6] = Default::default();
    let mut alternating = true;
    for (a, b) in partition.cells() {
        let (xa, xap, xbm, xb) = (x.at(a), x.right(a), x.left(b), x.at(b));
        let whole = diff(xa, xb);
        let inner = diff(xap, xbm);
        let dp = diff(xa, xap);
        let dm = diff(xbm, xb);
        alternating &= x.is_continuous_at(a) || x.is_continuous_at(b);

        let da = Derivs::new(f, xa, n)?;
        let dap = Derivs::new(f, xap, n)?;
        let dbm = Derivs::new(f, xbm, n)?;
        let fb = f.value(xb)?;

        let a1 = da.taylor(1, &whole)?;
        let a2 = (fb - dbm.value()) + (dap.value() - da.value());
        let a3 = -da.taylor(1, &dp)? - dbm.taylor(1, &dm)?;
        let b1 = dbm.value() - dap.value() - dap.taylor(1, &inner)?;

        let mut b2 = dap.on(1, &inner)? - da.on(1, &inner)?;
        for k in 2..=n {
            b2 -= da.mixed(k, &dp, k - 1, &inner)? / factorial::<T>(k - 1);
        }

        let mut b3 = T::zero();
        for k in 1..=n {
            let kf = factorial::<T>(k);
            b3 += (dbm.on(k, &dm)? - da.on(k, &dm)?) / kf;
            if k >= 2 {
                b3 += (dap.on(k, &inner)? - da.on(k, &inner)?) / kf;
            }
            for m in 1..k.saturating_sub(1) {
                b3 -= binomial::<T>(k, m) * da.mixed(k, &dp, m, &inner)? / kf;
            }
            for m in 1..k {
                b3 -= binomial::<T>(k, m) * da.mixed(k, &dm, m, &inner)? / kf;
                b3 -= binomial::<T>(k, m) * da.mixed(k, &dp, m, &dm)? / kf;
            }
        }

        for (col, v) in cols.iter_mut().zip([a1, a2, a3, b1, b2, b3]) {
            col.push(v);
        }
    }
    let [a1, a2, a3, b1, b2, b3] = cols.map(|c| pairwise_sum(&c));
    let lhs = f.value(x.at(x.last_index()))? - f.value(x.at(0))?;
    Ok(ProofTerms {
        cells,
        lhs,
        a1,
        a2,
        a3,
        b1,
        b2,
        b3,
        decomposition_defect: lhs - pairwise_sum(&[a1, a2, a3, b1, b2, b3]),
        alternating,
    })
}

/// Split terms at one level of a refinement chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofTermLevel<T> {
    /// Oscillation threshold; 0 marks the full grid.
    pub eps: T,
    pub eta: T,
    pub terms: ProofTerms<T>,
}

/// [`proof_terms_on_partition`] along the refinement chain of `schedule`.
pub fn proof_term_diagnostics<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    x: &RegulatedPath<T>,
    p: T,
    schedule: &Schedule<T>,
) -> Result<Vec<ProofTermLevel<T>>> {
    refinement_chain(x, schedule)
        .into_iter()
        .map(|level| {
            let (eps, eta) = level.level.map_or((T::zero(), T::zero()), |l| (l.eps, l.eta));
            Ok(ProofTermLevel {
                eps,
                eta,
                terms: proof_terms_on_partition(f, x, p, &level.partition)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::GridPoint;
    use crate::smoothfn::{make_exp, make_polynomial};

    fn mixed_path() -> RegulatedPath<f64> {
        let at = [0.0, 0.3, 0.1, 0.9, 0.7, 0.2, 0.4, -0.1, 0.0];
        let mut pts: Vec<GridPoint<f64>> = at
            .iter()
            .enumerate()
            .map(|(i, &v)| GridPoint::continuous(i as f64 / 8.0, vec![v]))
            .collect();
        pts[3].left = vec![0.2];
        pts[5].right = vec![-0.3];
        pts[6].left = vec![-0.2];
        RegulatedPath::from_points(1.0, 1, pts).unwrap()
    }

    #[test]
    fn split_is_exact_on_alternating_partitions() {
        let x = mixed_path();
        let f = make_exp();
        for idx in [vec![0, 3, 4, 5, 8], vec![0, 2, 3, 4, 5, 7, 8], vec![0, 4, 8]] {
            let part = Partition::new(idx, x.len()).unwrap();
            let t = proof_terms_on_partition(&f, &x, 3.5, &part).unwrap();
            assert!(t.alternating);
            assert!(t.decomposition_defect.abs() < 1e-13, "{t:?}");
        }
        // cell [5, 6] has a right jump at 5 and a left jump at 6
        let t = proof_terms_on_partition(&f, &x, 3.5, &Partition::full(x.len())).unwrap();
        assert!(!t.alternating);
    }

    #[test]
    fn polynomial_b_terms_vanish() {
        let x = mixed_path();
        let f = make_polynomial(vec![(vec![3], 0.5), (vec![1], -1.0)], 1).unwrap();
        let t = proof_terms_on_partition(&f, &x, 3.2, &Partition::new(vec![0, 4, 8], 9).unwrap()).unwrap();
        assert!(t.b1.abs() < 1e-14 && t.b2.abs() < 1e-14 && t.b3.abs() < 1e-14, "{t:?}");
    }
}
