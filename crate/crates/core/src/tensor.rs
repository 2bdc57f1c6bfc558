//! Dense symmetric tensor algebra over `R^d`.
//!
//! Order-`k` tensors are stored as a full row-major array of `d^k`
//! coefficients (first index most significant). [`SymTensor`] and
//! [`SymForm`] can only be built through symmetric constructions, so their
//! coefficients are permutation-invariant bit for bit.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{euclidean_norm, factorial, from_usize, Scalar};

/// Highest tensor level a lift may request.
pub const MAX_LEVEL: usize = 6;
/// Default ceiling on `d^k` for a single dense tensor.
pub const MAX_COEFFICIENTS: usize = 4096;

/// Size limits for dense tensors and forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorBudget {
    pub max_level: usize,
    pub max_coefficients: usize,
}

impl Default for TensorBudget {
    fn default() -> Self {
        Self {
            max_level: MAX_LEVEL,
            max_coefficients: MAX_COEFFICIENTS,
        }
    }
}

impl TensorBudget {
    /// Checks an order-`order` tensor in dimension `dim` and returns `dim^order`.
    pub fn check(&self, order: usize, dim: usize) -> Result<usize> {
        self.check_with_level(order, dim, self.max_level)
    }

    /// Forms carry one extra derivative order on top of the tensor levels.
    pub fn check_form(&self, order: usize, dim: usize) -> Result<usize> {
        self.check_with_level(order, dim, self.max_level + 1)
    }

    fn check_with_level(&self, order: usize, dim: usize, max_level: usize) -> Result<usize> {
        let err = || Error::Budget {
            order,
            dim,
            max_level: self.max_level,
            max_coefficients: self.max_coefficients,
        };
        if dim == 0 || order > max_level {
            return Err(err());
        }
        let mut len = 1usize;
        for _ in 0..order {
            len = len.checked_mul(dim).ok_or_else(err)?;
        }
        if len > self.max_coefficients {
            return Err(err());
        }
        Ok(len)
    }
}

/// A point or increment in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("vector dimension must be >= 1".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("vector coefficients must be finite".into()));
        }
        Ok(Self(coeffs))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![T::zero(); dim])
    }

    pub fn scalar(x: T) -> Self {
        Self(vec![x])
    }

    /// `b - a` coordinatewise.
    pub(crate) fn difference(a: &[T], b: &[T]) -> Self {
        Self(b.iter().zip(a).map(|(&y, &x)| y - x).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn norm(&self) -> T {
        euclidean_norm(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self(self.0.iter().map(|&a| a * c).collect())
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Flat row-major offset of a multi-index.
pub fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Inverse of [`flat_index`].
pub fn decode_index(mut flat: usize, dim: usize, order: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
    idx
}

/// All non-decreasing multi-indices of length `order` over `0..dim`.
pub fn multisets(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; order];
    loop {
        out.push(cur.clone());
        // advance to the next non-decreasing sequence
        let mut pos = order;
        while pos > 0 && cur[pos - 1] == dim - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        let v = cur[pos - 1] + 1;
        for c in cur[pos - 1..].iter_mut() {
            *c = v;
        }
    }
}

/// Lexicographic next permutation; returns `false` after the last one.
fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Distinct arrangements (as flat offsets) of a sorted multi-index.
fn arrangements(sorted: &[usize], dim: usize) -> Vec<usize> {
    let mut cur = sorted.to_vec();
    let mut out = vec![flat_index(&cur, dim)];
    while next_permutation(&mut cur) {
        out.push(flat_index(&cur, dim));
    }
    out
}

fn symmetric_coeffs<T: Scalar>(
    order: usize,
    dim: usize,
    len: usize,
    mut f: impl FnMut(&[usize]) -> T,
) -> Vec<T> {
    let mut coeffs = vec![T::zero(); len];
    for ms in multisets(dim, order) {
        let value = f(&ms);
        for off in arrangements(&ms, dim) {
            coeffs[off] = value;
        }
    }
    coeffs
}

/// Raw (not necessarily symmetric) order-`k` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    order: usize,
    dim: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(order: usize, dim: usize, coeffs: Vec<T>) -> Result<Self> {
        let len = TensorBudget::default().check_form(order, dim)?;
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coeffs.len(),
            });
        }
        Ok(Self { order, dim, coeffs })
    }

    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let len = TensorBudget::default().check_form(order, dim)?;
        let coeffs = (0..len).map(|flat| f(&decode_index(flat, dim, order))).collect();
        Ok(Self { order, dim, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.coeffs[flat_index(idx, self.dim)]
    }

    /// `a ⊗ b` for coefficient arrays of the same dimension.
    fn outer(a_order: usize, a: &[T], b_order: usize, b: &[T], dim: usize) -> Result<Self> {
        let order = a_order + b_order;
        let len = TensorBudget::default().check_form(order, dim)?;
        let mut coeffs = Vec::with_capacity(len);
        for &x in a {
            for &y in b {
                coeffs.push(x * y);
            }
        }
        Ok(Self { order, dim, coeffs })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        check_shape(self.order, self.dim, other.order, other.dim)?;
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }
}

fn check_shape(order: usize, dim: usize, other_order: usize, other_dim: usize) -> Result<()> {
    if order != other_order {
        return Err(Error::OrderMismatch {
            expected: order,
            got: other_order,
        });
    }
    if dim != other_dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: other_dim,
        });
    }
    Ok(())
}

macro_rules! dense_symmetric {
    ($name:ident) => {
        impl<T: Scalar> $name<T> {
            pub fn order(&self) -> usize {
                self.order
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn coeffs(&self) -> &[T] {
                &self.coeffs
            }

            pub fn get(&self, idx: &[usize]) -> T {
                self.coeffs[flat_index(idx, self.dim)]
            }

            /// Order-0 element holding a single scalar.
            pub fn scalar(dim: usize, x: T) -> Self {
                Self {
                    order: 0,
                    dim,
                    coeffs: vec![x],
                }
            }

            pub fn zeros(order: usize, dim: usize) -> Result<Self> {
                let len = TensorBudget::default().check_form(order, dim)?;
                Ok(Self {
                    order,
                    dim,
                    coeffs: vec![T::zero(); len],
                })
            }

            /// Builds a symmetric element from its values on sorted multi-indices.
            pub fn from_symmetric_fn(
                order: usize,
                dim: usize,
                f: impl FnMut(&[usize]) -> T,
            ) -> Result<Self> {
                let len = TensorBudget::default().check_form(order, dim)?;
                Ok(Self {
                    order,
                    dim,
                    coeffs: symmetric_coeffs(order, dim, len, f),
                })
            }

            /// Frobenius norm of the dense coefficients.
            pub fn norm(&self) -> T {
                euclidean_norm(&self.coeffs)
            }

            pub fn scaled(&self, c: T) -> Self {
                Self {
                    order: self.order,
                    dim: self.dim,
                    coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
                }
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                check_shape(self.order, self.dim, other.order, other.dim)?;
                Ok(Self {
                    order: self.order,
                    dim: self.dim,
                    coeffs: self
                        .coeffs
                        .iter()
                        .zip(&other.coeffs)
                        .map(|(&a, &b)| a + b)
                        .collect(),
                })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                check_shape(self.order, self.dim, other.order, other.dim)?;
                Ok(Self {
                    order: self.order,
                    dim: self.dim,
                    coeffs: self
                        .coeffs
                        .iter()
                        .zip(&other.coeffs)
                        .map(|(&a, &b)| a - b)
                        .collect(),
                })
            }

            /// Exact permutation invariance of the stored coefficients.
            pub fn is_symmetric(&self) -> bool {
                multisets(self.dim, self.order).iter().all(|ms| {
                    let offs = arrangements(ms, self.dim);
                    let first = self.coeffs[offs[0]];
                    offs.iter().all(|&o| self.coeffs[o] == first)
                })
            }
        }
    };
}

/// Element of `Sym_k(R^d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor<T> {
    order: usize,
    dim: usize,
    coeffs: Vec<T>,
}

/// Symmetric `k`-linear form on `R^d`, the dual of [`SymTensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymForm<T> {
    order: usize,
    dim: usize,
    coeffs: Vec<T>,
}

dense_symmetric!(SymTensor);
dense_symmetric!(SymForm);

impl<T: Scalar> SymTensor<T> {
    /// Raw tensor product `self ⊗ other`.
    pub fn tensor_product(&self, other: &Self) -> Result<Tensor<T>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Tensor::outer(self.order, &self.coeffs, other.order, &other.coeffs, self.dim)
    }

    pub fn into_raw(self) -> Tensor<T> {
        Tensor {
            order: self.order,
            dim: self.dim,
            coeffs: self.coeffs,
        }
    }
}

impl<T: Scalar> SymForm<T> {
    /// Contracts the leading `t.order()` slots with `t`, leaving a form of
    /// order `self.order() - t.order()`.
    pub fn contract(&self, t: &SymTensor<T>) -> Result<SymForm<T>> {
        if t.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.dim,
            });
        }
        if t.order > self.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                got: t.order,
            });
        }
        let rest = self.coeffs.len() / t.coeffs.len();
        let mut coeffs = vec![T::zero(); rest];
        for (q, &tq) in t.coeffs.iter().enumerate() {
            let block = &self.coeffs[q * rest..(q + 1) * rest];
            for (c, &f) in coeffs.iter_mut().zip(block) {
                *c += tq * f;
            }
        }
        Ok(SymForm {
            order: self.order - t.order,
            dim: self.dim,
            coeffs,
        })
    }

    /// Contracts one slot with `v`.
    pub fn contract_vector(&self, v: &[T]) -> Result<SymForm<T>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if self.order == 0 {
            return Err(Error::OrderMismatch {
                expected: 1,
                got: 0,
            });
        }
        let rest = self.coeffs.len() / self.dim;
        let mut coeffs = vec![T::zero(); rest];
        for (q, &vq) in v.iter().enumerate() {
            for (c, &f) in coeffs.iter_mut().zip(&self.coeffs[q * rest..(q + 1) * rest]) {
                *c += vq * f;
            }
        }
        Ok(SymForm {
            order: self.order - 1,
            dim: self.dim,
            coeffs,
        })
    }

    /// `f(u, .., u, w, .., w)` with `m` copies of `u` and `order - m` copies of `w`.
    pub fn eval_mixed(&self, u: &[T], m: usize, w: &[T]) -> Result<T> {
        if m > self.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                got: m,
            });
        }
        let mut f = self.clone();
        for _ in 0..m {
            f = f.contract_vector(u)?;
        }
        pair_rank1(&f, w)
    }

    /// The order-0 value of a fully contracted form.
    pub fn as_scalar(&self) -> Option<T> {
        (self.order == 0).then(|| self.coeffs[0])
    }
}

/// Symmetrization `(1/k!) Σ_σ σT`.
pub fn sym_project<T: Scalar>(t: &Tensor<T>) -> Result<SymTensor<T>> {
    let (order, dim) = (t.order, t.dim);
    let len = TensorBudget::default().check_form(order, dim)?;
    let coeffs = symmetric_coeffs(order, dim, len, |ms| {
        // averaging over distinct arrangements equals averaging over all k!
        // permutations, each arrangement being hit k!/Π m_i! times
        let offs = arrangements(ms, dim);
        let sum: T = offs.iter().map(|&o| t.coeffs[o]).sum();
        sum / from_usize::<T>(offs.len())
    });
    Ok(SymTensor { order, dim, coeffs })
}

/// `v^{⊗k}` without the `1/k!` factor. `k = 0` yields the unit scalar.
pub fn rank1_power<T: Scalar>(v: &[T], k: usize) -> Result<SymTensor<T>> {
    let dim = v.len();
    let len = TensorBudget::default().check_form(k, dim)?;
    let mut coeffs = Vec::with_capacity(len);
    coeffs.push(T::one());
    for _ in 0..k {
        let mut next = Vec::with_capacity(coeffs.len() * dim);
        for &c in &coeffs {
            for &x in v {
                next.push(c * x);
            }
        }
        coeffs = next;
    }
    Ok(SymTensor {
        order: k,
        dim,
        coeffs,
    })
}

/// `v^{⊗k} / k!`, the canonical level-`k` element over an increment `v`.
pub fn scaled_power<T: Scalar>(v: &[T], k: usize) -> Result<SymTensor<T>> {
    Ok(rank1_power(v, k)?.scaled(T::one() / factorial::<T>(k)))
}

/// Full contraction of a form with a tensor of equal order and dimension.
pub fn pair<T: Scalar>(f: &SymForm<T>, t: &SymTensor<T>) -> Result<T> {
    check_shape(f.order, f.dim, t.order, t.dim)?;
    let mut acc = T::zero();
    for (&a, &b) in f.coeffs.iter().zip(&t.coeffs) {
        acc += a * b;
    }
    Ok(acc)
}

/// Pairing of a form with a raw (unsymmetrized) tensor.
pub fn pair_raw<T: Scalar>(f: &SymForm<T>, t: &Tensor<T>) -> Result<T> {
    check_shape(f.order, f.dim, t.order, t.dim)?;
    let mut acc = T::zero();
    for (&a, &b) in f.coeffs.iter().zip(&t.coeffs) {
        acc += a * b;
    }
    Ok(acc)
}

/// `f(v, .., v)` by successive contraction of the trailing slot, without
/// materializing `v^{⊗k}`.
pub fn pair_rank1<T: Scalar>(f: &SymForm<T>, v: &[T]) -> Result<T> {
    if v.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: v.len(),
        });
    }
    if f.dim == 1 {
        // Horner collapses to a single power
        return Ok(f.coeffs[0] * v[0].powi(f.order as i32));
    }
    let d = f.dim;
    let mut buf = f.coeffs.clone();
    let mut len = buf.len();
    while len > 1 {
        let next = len / d;
        for j in 0..next {
            let mut acc = T::zero();
            for (i, &vi) in v.iter().enumerate() {
                acc += buf[j * d + i] * vi;
            }
            buf[j] = acc;
        }
        len = next;
    }
    Ok(buf[0])
}
