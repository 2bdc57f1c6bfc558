//! Canonical reduced rough-path lift and paths controlled by it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{ControlFunction, RegulatedPath};
use crate::scalar::{factorial, lit, Scalar};
use crate::smoothfn::SmoothFunction;
use crate::tensor::{pair_rank1, rank1_power, scaled_power, sym_project, SymForm, SymTensor, TensorBudget};

/// `𝕏^k_{s,t} = X_{s,t}^{⊗k} / k!` for `1 <= k <= n = ⌊p⌋`, evaluated lazily.
#[derive(Clone, Debug)]
pub struct ReducedRoughPath<'a, T> {
    base: &'a RegulatedPath<T>,
    p: T,
    n: usize,
}

/// Lifts `x` for regularity `p`.
pub fn reduced_lift<T: Scalar>(x: &RegulatedPath<T>, p: T) -> Result<ReducedRoughPath<'_, T>> {
    reduced_lift_with_budget(x, p, TensorBudget::default())
}

pub fn reduced_lift_with_budget<T: Scalar>(
    x: &RegulatedPath<T>,
    p: T,
    budget: TensorBudget,
) -> Result<ReducedRoughPath<'_, T>> {
    if !p.is_finite() || p < T::one() {
        return Err(Error::Exponent(p.to_f64().unwrap_or(f64::NAN)));
    }
    let n = p.floor().to_usize().unwrap_or(usize::MAX);
    budget.check(n, x.dim())?;
    // controlled paths and corrections need one form order more
    budget.check_form(n + 1, x.dim())?;
    Ok(ReducedRoughPath { base: x, p, n })
}

/// Per-level result of a Chen relation check.
#[derive(Clone, Debug, Serialize)]
pub struct ChenReport<T> {
    pub s: usize,
    pub u: usize,
    pub t: usize,
    /// `defects[k-1]` is the level-`k` defect.
    pub defects: Vec<T>,
    pub tolerances: Vec<T>,
    pub passed: bool,
}

/// Level bound `||𝕏^k(s,t)|| <= c(s,t)^{k/p} / k!` at one pair.
#[derive(Clone, Debug, Serialize)]
pub struct LevelBoundReport<T> {
    pub s: usize,
    pub t: usize,
    pub control: T,
    pub norms: Vec<T>,
    pub bounds: Vec<T>,
    pub passed: bool,
}

impl<'a, T: Scalar> ReducedRoughPath<'a, T> {
    pub fn base(&self) -> &'a RegulatedPath<T> {
        self.base
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// `n = ⌊p⌋`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `𝕏^k(t_i, t_j)`; `k = 0` gives the unit.
    pub fn level(&self, i: usize, j: usize, k: usize) -> Result<SymTensor<T>> {
        if k > self.n {
            return Err(Error::OrderMismatch {
                expected: self.n,
                got: k,
            });
        }
        let v = self.base.increment(i, j)?;
        scaled_power(&v, k)
    }

    /// Levels `0..=n` at one pair.
    pub fn levels(&self, i: usize, j: usize) -> Result<Vec<SymTensor<T>>> {
        let v = self.base.increment(i, j)?;
        (0..=self.n).map(|k| scaled_power(&v, k)).collect()
    }

    /// Checks `𝕏^k(s,t) = Sym(Σ_m 𝕏^{k-m}(s,u) ⊗ 𝕏^m(u,t))` for every level.
    pub fn chen_check(&self, s: usize, u: usize, t: usize) -> Result<ChenReport<T>> {
        if !(s <= u && u <= t) {
            return Err(Error::Precondition(format!("chen_check needs s <= u <= t, got ({s}, {u}, {t})")));
        }
        let whole = self.levels(s, t)?;
        let first = self.levels(s, u)?;
        let second = self.levels(u, t)?;
        let mut defects = Vec::with_capacity(self.n);
        let mut tolerances = Vec::with_capacity(self.n);
        for k in 1..=self.n {
            let mut raw = first[k].tensor_product(&second[0])?;
            for m in 1..=k {
                raw.add_assign(&first[k - m].tensor_product(&second[m])?)?;
            }
            let product = sym_project(&raw)?;
            defects.push(whole[k].sub(&product)?.norm());
            tolerances.push(lit::<T>(1e-12) * (T::one() + whole[k].norm()));
        }
        let passed = defects.iter().zip(&tolerances).all(|(d, tol)| d <= tol);
        Ok(ChenReport {
            s,
            u,
            t,
            defects,
            tolerances,
            passed,
        })
    }

    /// Checks the per-level bound against a control of the same path.
    pub fn level_bound(&self, c: &ControlFunction<'_, T>, s: usize, t: usize) -> Result<LevelBoundReport<T>> {
        let control = c.value(s, t)?;
        let v = self.base.increment(s, t)?;
        let slack = T::one() + lit::<T>(1e-12);
        let mut norms = Vec::with_capacity(self.n);
        let mut bounds = Vec::with_capacity(self.n);
        for k in 1..=self.n {
            norms.push(scaled_power(&v, k)?.norm());
            let kk = lit::<T>(k as f64);
            bounds.push(control.powf(kk / c.p()) / factorial::<T>(k) * slack);
        }
        let passed = norms.iter().zip(&bounds).all(|(a, b)| a <= b);
        Ok(LevelBoundReport {
            s,
            t,
            control,
            norms,
            bounds,
            passed,
        })
    }
}

/// `Y^i_t = D^{i+1}F(X_t)` for `i = 0..n-1`, sampled at every grid point.
#[derive(Clone, Debug)]
pub struct ControlledPath<T> {
    n: usize,
    dim: usize,
    /// `forms[t][i]` is `Y^i` at grid index `t`.
    forms: Vec<Vec<SymForm<T>>>,
}

/// Builds the controlled path `(DF(X), .., D^nF(X))`.
pub fn controlled_from_function<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    lift: &ReducedRoughPath<'_, T>,
) -> Result<ControlledPath<T>> {
    let x = lift.base();
    let n = lift.n();
    check_function(f, x, n + 1)?;
    let forms = (0..x.len())
        .map(|t| (1..=n).map(|k| f.derivative(k, x.at(t))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(ControlledPath {
        n,
        dim: x.dim(),
        forms,
    })
}

/// Dimension, derivative order and domain checks shared by every consumer of `F(X)`.
pub(crate) fn check_function<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    x: &RegulatedPath<T>,
    order: usize,
) -> Result<()> {
    if f.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: f.dim(),
        });
    }
    if f.max_order() < order {
        return Err(Error::DerivativeOrder {
            order,
            max_order: f.max_order(),
        });
    }
    for i in 0..x.len() {
        f.domain().ensure(x.left(i))?;
        f.domain().ensure(x.at(i))?;
        f.domain().ensure(x.right(i))?;
    }
    Ok(())
}

impl<T: Scalar> ControlledPath<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid_len(&self) -> usize {
        self.forms.len()
    }

    /// `Y^i` at grid index `t`, a form of order `i + 1`.
    pub fn level(&self, i: usize, t: usize) -> &SymForm<T> {
        &self.forms[t][i]
    }

    pub(crate) fn check_compatible(&self, lift: &ReducedRoughPath<'_, T>) -> Result<()> {
        if self.n != lift.n() {
            return Err(Error::OrderMismatch {
                expected: lift.n(),
                got: self.n,
            });
        }
        if self.dim != lift.base().dim() || self.grid_len() != lift.base().len() {
            return Err(Error::Precondition("controlled path and lift have different base paths".into()));
        }
        Ok(())
    }

    /// `Ξ_{s,t} = Σ_{k<n} Y^k_s 𝕏^{k+1}_{s,t}`, through the rank-1 fast path.
    pub fn germ(&self, lift: &ReducedRoughPath<'_, T>, s: usize, t: usize) -> Result<T> {
        let v = lift.base().increment(s, t)?;
        let mut acc = T::zero();
        for k in 0..self.n {
            acc += pair_rank1(&self.forms[s][k], &v)? / factorial::<T>(k + 1);
        }
        Ok(acc)
    }

    /// `Σ_k ||Y^k_s|| ||X_{s,t}||^{k+1} / (k+1)!`, bounding every product in [`Self::germ`].
    pub fn germ_magnitude(&self, lift: &ReducedRoughPath<'_, T>, s: usize, t: usize) -> Result<T> {
        let r = lift.base().increment(s, t)?.norm();
        let mut acc = T::zero();
        for k in 0..self.n {
            acc += self.forms[s][k].norm() * r.powi(k as i32 + 1) / factorial::<T>(k + 1);
        }
        Ok(acc)
    }

    /// Sum of the norms of the terms making up `R^i_{s,t}`.
    pub fn remainder_magnitude(&self, lift: &ReducedRoughPath<'_, T>, i: usize, s: usize, t: usize) -> Result<T> {
        let r = lift.base().increment(s, t)?.norm();
        let mut acc = self.forms[t][i].norm() + self.forms[s][i].norm();
        for j in 1..self.n - i {
            acc += self.forms[s][i + j].norm() * r.powi(j as i32) / factorial::<T>(j);
        }
        Ok(acc)
    }

    /// `R^i_{s,t}`, a form of order `i + 1`.
    pub fn remainder(&self, lift: &ReducedRoughPath<'_, T>, i: usize, s: usize, t: usize) -> Result<SymForm<T>> {
        self.check_compatible(lift)?;
        if i >= self.n {
            return Err(Error::OrderMismatch {
                expected: self.n - 1,
                got: i,
            });
        }
        let mut r = self.forms[t][i].sub(&self.forms[s][i])?;
        for j in 1..self.n - i {
            let level = lift.level(s, t, j)?;
            r = r.sub(&self.forms[s][i + j].contract(&level)?)?;
        }
        Ok(r)
    }
}

/// Dense (non-fast-path) evaluation of `Ξ_{s,t}`, used to cross-check [`ControlledPath::germ`].
pub fn germ_dense<T: Scalar>(y: &ControlledPath<T>, lift: &ReducedRoughPath<'_, T>, s: usize, t: usize) -> Result<T> {
    let v = lift.base().increment(s, t)?;
    let mut acc = T::zero();
    for k in 0..y.n() {
        let level = rank1_power(&v, k + 1)?.scaled(T::one() / factorial::<T>(k + 1));
        acc += crate::tensor::pair(y.level(k, s), &level)?;
    }
    Ok(acc)
}
