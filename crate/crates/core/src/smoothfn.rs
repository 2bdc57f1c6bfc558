//! Scalar-valued smooth test functions with exact derivatives.
//!
//! Every function declares a domain box. Evaluating outside it is an
//! error, which is how the bounded-derivative requirement is honoured for
//! functions such as `log` that are only nice on a compact range.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{factorial, lit, Scalar};
use crate::tensor::{SymForm, MAX_LEVEL};

/// Highest total degree accepted by [`make_polynomial`].
pub const MAX_POLY_DEGREE: u32 = 12;

/// Axis-aligned box, possibly unbounded in some directions.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> DomainBox<T> {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![T::neg_infinity(); dim],
            upper: vec![T::infinity(); dim],
        }
    }

    pub fn interval(lo: T, hi: T) -> Self {
        Self {
            lower: vec![lo],
            upper: vec![hi],
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.lower.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lower
            .iter()
            .chain(&self.upper)
            .all(|v| v.is_finite())
    }

    pub fn ensure(&self, x: &[T]) -> Result<()> {
        if x.len() != self.lower.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                got: x.len(),
            });
        }
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                point: format!("{x:?}"),
                lower: format!("{:?}", self.lower),
                upper: format!("{:?}", self.upper),
            })
        }
    }
}

/// `F: R^d -> R` with exact derivatives up to [`SmoothFunction::max_order`].
pub trait SmoothFunction<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn max_order(&self) -> usize;

    fn domain(&self) -> &DomainBox<T>;

    /// Short human-readable description, used in reports.
    fn describe(&self) -> String;

    fn value(&self, x: &[T]) -> Result<T>;

    /// `D^k F(x)` as a symmetric `k`-form. `k = 0` gives the value as an
    /// order-0 form.
    fn derivative(&self, k: usize, x: &[T]) -> Result<SymForm<T>>;

    /// Whether all derivatives are bounded on the declared domain.
    fn is_bounded(&self) -> bool {
        self.domain().is_bounded()
    }
}

fn check_order(k: usize, max_order: usize) -> Result<()> {
    if k > max_order {
        Err(Error::DerivativeOrder {
            order: k,
            max_order,
        })
    } else {
        Ok(())
    }
}

/// Polynomial given by a monomial-exponent -> coefficient map.
#[derive(Clone, Debug)]
pub struct Polynomial<T> {
    dim: usize,
    terms: Vec<(Vec<u32>, T)>,
    domain: DomainBox<T>,
}

/// Builds a polynomial in `d` variables. Repeated monomials are summed.
pub fn make_polynomial<T: Scalar>(
    coeffs: impl IntoIterator<Item = (Vec<u32>, T)>,
    d: usize,
) -> Result<Polynomial<T>> {
    if d == 0 {
        return Err(Error::Polynomial("dimension must be >= 1".into()));
    }
    let mut merged: BTreeMap<Vec<u32>, T> = BTreeMap::new();
    for (exps, c) in coeffs {
        if exps.len() != d {
            return Err(Error::Polynomial(format!(
                "monomial {exps:?} has {} exponents, expected {d}",
                exps.len()
            )));
        }
        if !c.is_finite() {
            return Err(Error::Polynomial("coefficients must be finite".into()));
        }
        let deg: u32 = exps.iter().sum();
        if deg > MAX_POLY_DEGREE {
            return Err(Error::Polynomial(format!(
                "total degree {deg} exceeds {MAX_POLY_DEGREE}"
            )));
        }
        *merged.entry(exps).or_insert_with(T::zero) += c;
    }
    Ok(Polynomial {
        dim: d,
        terms: merged.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        domain: DomainBox::unbounded(d),
    })
}

impl<T: Scalar> Polynomial<T> {
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> &[(Vec<u32>, T)] {
        &self.terms
    }

    /// Restricts evaluation to `domain`.
    pub fn with_domain(mut self, domain: DomainBox<T>) -> Result<Self> {
        if domain.lower.len() != self.dim || domain.upper.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: domain.lower.len(),
            });
        }
        self.domain = domain;
        Ok(self)
    }

    /// Partial derivative with multiplicities `mult[v]` per variable.
    fn partial(&self, mult: &[u32], x: &[T]) -> T {
        let mut acc = T::zero();
        for (exps, c) in &self.terms {
            let mut term = *c;
            for ((&e, &m), &xv) in exps.iter().zip(mult).zip(x) {
                if m > e {
                    term = T::zero();
                    break;
                }
                // falling factorial e (e-1) ... (e-m+1)
                for j in 0..m {
                    term *= lit::<T>(f64::from(e - j));
                }
                term *= xv.powi((e - m) as i32);
            }
            acc += term;
        }
        acc
    }
}

impl<T: Scalar> SmoothFunction<T> for Polynomial<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_order(&self) -> usize {
        MAX_LEVEL + 1
    }

    fn domain(&self) -> &DomainBox<T> {
        &self.domain
    }

    fn describe(&self) -> String {
        format!("poly(d={}, degree={})", self.dim, self.degree())
    }

    fn value(&self, x: &[T]) -> Result<T> {
        self.domain.ensure(x)?;
        Ok(self.partial(&vec![0; self.dim], x))
    }

    fn derivative(&self, k: usize, x: &[T]) -> Result<SymForm<T>> {
        check_order(k, self.max_order())?;
        self.domain.ensure(x)?;
        let mut mult = vec![0u32; self.dim];
        SymForm::from_symmetric_fn(k, self.dim, |ms| {
            mult.iter_mut().for_each(|m| *m = 0);
            for &i in ms {
                mult[i] += 1;
            }
            self.partial(&mult, x)
        })
    }
}

/// `exp` on the real line.
#[derive(Clone, Debug)]
pub struct Exp<T> {
    domain: DomainBox<T>,
}

pub fn make_exp<T: Scalar>() -> Exp<T> {
    Exp {
        domain: DomainBox::unbounded(1),
    }
}

impl<T: Scalar> SmoothFunction<T> for Exp<T> {
    fn dim(&self) -> usize {
        1
    }

    fn max_order(&self) -> usize {
        MAX_LEVEL + 1
    }

    fn domain(&self) -> &DomainBox<T> {
        &self.domain
    }

    fn describe(&self) -> String {
        "exp".into()
    }

    fn value(&self, x: &[T]) -> Result<T> {
        self.domain.ensure(x)?;
        Ok(x[0].exp())
    }

    fn derivative(&self, k: usize, x: &[T]) -> Result<SymForm<T>> {
        check_order(k, self.max_order())?;
        self.domain.ensure(x)?;
        let v = x[0].exp();
        SymForm::from_symmetric_fn(k, 1, |_| v)
    }
}

/// `log` restricted to `[m, M]`, with `D^k log x = (-1)^{k-1} (k-1)! / x^k`.
#[derive(Clone, Debug)]
pub struct LogClamped<T> {
    domain: DomainBox<T>,
}

pub fn make_log_clamped<T: Scalar>(m: T, upper: T) -> Result<LogClamped<T>> {
    if !(m > T::zero() && m < upper && upper.is_finite()) {
        return Err(Error::Precondition(format!(
            "log domain requires 0 < m < M, got [{m}, {upper}]"
        )));
    }
    Ok(LogClamped {
        domain: DomainBox::interval(m, upper),
    })
}

impl<T: Scalar> LogClamped<T> {
    pub fn bounds(&self) -> (T, T) {
        (self.domain.lower[0], self.domain.upper[0])
    }
}

/// `(-1)^{k-1} (k-1)! / x^k`, the `k`-th derivative of `log` at `x > 0`.
pub fn log_derivative<T: Scalar>(k: usize, x: T) -> T {
    if k == 0 {
        return x.ln();
    }
    let sign = if k % 2 == 1 { T::one() } else { -T::one() };
    sign * factorial::<T>(k - 1) / x.powi(k as i32)
}

impl<T: Scalar> SmoothFunction<T> for LogClamped<T> {
    fn dim(&self) -> usize {
        1
    }

    fn max_order(&self) -> usize {
        MAX_LEVEL + 1
    }

    fn domain(&self) -> &DomainBox<T> {
        &self.domain
    }

    fn describe(&self) -> String {
        let (m, hi) = self.bounds();
        format!("log[{m},{hi}]")
    }

    fn value(&self, x: &[T]) -> Result<T> {
        self.domain.ensure(x)?;
        Ok(x[0].ln())
    }

    fn derivative(&self, k: usize, x: &[T]) -> Result<SymForm<T>> {
        check_order(k, self.max_order())?;
        self.domain.ensure(x)?;
        let v = log_derivative(k, x[0]);
        SymForm::from_symmetric_fn(k, 1, |_| v)
    }
}

/// Outcome of a finite-difference comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct FdReport<T> {
    pub order: usize,
    /// Largest absolute discrepancy over coordinate directions.
    pub defect: T,
    pub tolerance: T,
    pub passed: bool,
}

fn directional<T: Scalar>(f: &dyn SmoothFunction<T>, k: usize, x: &[T], dir: usize) -> Result<T> {
    let form = f.derivative(k, x)?;
    let mut e = vec![T::zero(); f.dim()];
    e[dir] = T::one();
    crate::tensor::pair_rank1(&form, &e)
}

fn fd_step<T: Scalar>(x: &[T]) -> T {
    let scale = x.iter().fold(T::one(), |m, v| m.max(v.abs()));
    lit::<T>(1e-5) * scale
}

/// Compares `D^k F(x)(e_i, .., e_i)` with the central difference of
/// `D^{k-1} F(.)(e_i, .., e_i)` along every coordinate direction `e_i`.
pub fn fd_check<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    k: usize,
    x: &[T],
    tol: T,
) -> Result<FdReport<T>> {
    let (defect, _) = fd_defect(f, k, x)?;
    Ok(FdReport {
        order: k,
        defect,
        tolerance: tol,
        passed: defect <= tol,
    })
}

/// [`fd_check`] with the tolerance `1e-6 (1 + |D^k F|)`.
pub fn fd_check_default<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    k: usize,
    x: &[T],
) -> Result<FdReport<T>> {
    let (defect, magnitude) = fd_defect(f, k, x)?;
    let tolerance = lit::<T>(1e-6) * (T::one() + magnitude);
    Ok(FdReport {
        order: k,
        defect,
        tolerance,
        passed: defect <= tolerance,
    })
}

fn fd_defect<T: Scalar>(f: &dyn SmoothFunction<T>, k: usize, x: &[T]) -> Result<(T, T)> {
    if k == 0 || k > f.max_order() {
        return Err(Error::DerivativeOrder {
            order: k,
            max_order: f.max_order(),
        });
    }
    let h = fd_step(x);
    let two = lit::<T>(2.0);
    let mut defect = T::zero();
    let mut magnitude = T::zero();
    for dir in 0..f.dim() {
        let exact = directional(f, k, x, dir)?;
        let mut fwd = x.to_vec();
        let mut bwd = x.to_vec();
        fwd[dir] += h;
        bwd[dir] -= h;
        let approx = (directional(f, k - 1, &fwd, dir)? - directional(f, k - 1, &bwd, dir)?)
            / (two * h);
        defect = defect.max((exact - approx).abs());
        magnitude = magnitude.max(exact.abs());
    }
    Ok((defect, magnitude))
}

/// Parses `poly:<expr>`, `exp` or `log:<m>,<M>` into a function on `R^d`.
///
/// Polynomial expressions are sums of products such as
/// `2*x0^2*x1 - x1 + 0.5`; `x` is an alias for `x0`.
pub fn parse_function<T: Scalar>(spec: &str, d: usize) -> Result<Box<dyn SmoothFunction<T>>> {
    let bad = |reason: &str| Error::FunctionSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let spec_trim = spec.trim();
    if spec_trim == "exp" {
        if d != 1 {
            return Err(bad("exp is only available in dimension 1"));
        }
        return Ok(Box::new(make_exp::<T>()));
    }
    if let Some(rest) = spec_trim.strip_prefix("log:") {
        if d != 1 {
            return Err(bad("log is only available in dimension 1"));
        }
        let (a, b) = rest.split_once(',').ok_or_else(|| bad("expected log:<m>,<M>"))?;
        let m: f64 = a.trim().parse().map_err(|_| bad("lower bound is not a number"))?;
        let hi: f64 = b.trim().parse().map_err(|_| bad("upper bound is not a number"))?;
        return Ok(Box::new(make_log_clamped(lit::<T>(m), lit::<T>(hi))?));
    }
    if let Some(expr) = spec_trim.strip_prefix("poly:") {
        let terms = parse_poly_terms(expr, d).map_err(|r| bad(&r))?;
        let terms = terms.into_iter().map(|(e, c)| (e, lit::<T>(c)));
        return Ok(Box::new(make_polynomial(terms, d)?));
    }
    Err(bad("expected poly:<expr>, exp or log:<m>,<M>"))
}

fn parse_poly_terms(expr: &str, d: usize) -> std::result::Result<Vec<(Vec<u32>, f64)>, String> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err("empty polynomial".into());
    }
    // split into signed terms, keeping exponent/number signs like 1e-3 intact
    let mut terms = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = compact.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        let after_exp = i > 0 && matches!(chars[i - 1], 'e' | 'E') && i >= 2 && chars[i - 2].is_ascii_digit();
        if (ch == '+' || ch == '-') && i > 0 && chars[i - 1] != '*' && chars[i - 1] != '^' && !after_exp {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);

    let mut out = Vec::new();
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1.0, b),
            None => (1.0, term.strip_prefix('+').unwrap_or(&term)),
        };
        if body.is_empty() {
            return Err(format!("dangling sign in `{term}`"));
        }
        let mut coeff = sign;
        let mut exps = vec![0u32; d];
        for factor in body.split('*') {
            if let Some(var) = factor.strip_prefix('x') {
                let (idx, pow) = match var.split_once('^') {
                    Some((i, p)) => (i, p.parse::<u32>().map_err(|_| format!("bad exponent in `{factor}`"))?),
                    None => (var, 1),
                };
                let idx: usize = if idx.is_empty() {
                    0
                } else {
                    idx.parse().map_err(|_| format!("bad variable `{factor}`"))?
                };
                if idx >= d {
                    return Err(format!("variable x{idx} exceeds dimension {d}"));
                }
                exps[idx] += pow;
            } else {
                let c: f64 = factor.parse().map_err(|_| format!("bad factor `{factor}`"))?;
                coeff *= c;
            }
        }
        out.push((exps, coeff));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{pair, rank1_power};

    fn square() -> Polynomial<f64> {
        make_polynomial([(vec![2], 1.0)], 1).unwrap()
    }

    #[test]
    fn square_derivatives() {
        let f = square();
        assert_eq!(f.derivative(1, &[3.0]).unwrap().coeffs(), &[6.0]);
        assert_eq!(f.derivative(2, &[-1.5]).unwrap().coeffs(), &[2.0]);
        assert_eq!(f.derivative(3, &[7.0]).unwrap().coeffs(), &[0.0]);
    }

    #[test]
    fn bilinear_hessian_has_unit_off_diagonal() {
        let f = make_polynomial([(vec![1, 1], 1.0)], 2).unwrap();
        let h = f.derivative(2, &[0.3, -2.0]).unwrap();
        assert_eq!(h.coeffs(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_has_vanishing_derivatives() {
        let f = make_polynomial([(vec![0, 0], 4.0)], 2).unwrap();
        for k in 1..=4 {
            assert!(f.derivative(k, &[1.0, 2.0]).unwrap().coeffs().iter().all(|&c| c == 0.0));
        }
        let r = fd_check(&f, 2, &[1.0, 2.0], 0.0).unwrap();
        assert_eq!(r.defect, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn polynomial_degree_limit() {
        assert!(make_polynomial([(vec![13], 1.0)], 1).is_err());
        assert!(make_polynomial([(vec![6, 6], 1.0)], 2).is_ok());
        assert!(make_polynomial([(vec![1], 1.0)], 2).is_err());
    }

    #[test]
    fn exp_and_log_examples() {
        let e = make_exp::<f64>();
        assert_eq!(e.derivative(3, &[0.0]).unwrap().coeffs(), &[1.0]);
        let l = make_log_clamped(0.5, 4.0).unwrap();
        assert_eq!(l.derivative(2, &[1.0]).unwrap().coeffs(), &[-1.0]);
        assert_eq!(l.derivative(1, &[2.0]).unwrap().coeffs(), &[0.5]);
        assert!(matches!(l.value(&[4.5]), Err(Error::Domain { .. })));
        assert!(l.derivative(1, &[0.25]).is_err());
        assert!(make_log_clamped(0.0, 1.0).is_err());
        assert!(make_log_clamped(2.0, 1.0).is_err());
        assert!(l.is_bounded());
        assert!(!e.is_bounded());
    }

    #[test]
    fn fd_examples() {
        let r = fd_check(&square(), 1, &[3.0], 1e-8).unwrap();
        assert!(r.passed, "{r:?}");
        let r = fd_check(&make_exp::<f64>(), 2, &[0.0], 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn taylor_exactness_for_cubic() {
        // F(x, y) = x^3 - 2 x y^2 + y
        let f = make_polynomial([(vec![3, 0], 1.0), (vec![1, 2], -2.0), (vec![0, 1], 1.0)], 2).unwrap();
        let x = [0.7, -1.3];
        let v = [0.4, 0.9];
        let mut taylor = 0.0;
        for j in 0..=3 {
            let form = f.derivative(j, &x).unwrap();
            let t = rank1_power(&v, j).unwrap();
            taylor += pair(&form, &t).unwrap() / factorial::<f64>(j);
        }
        let exact = f.value(&[x[0] + v[0], x[1] + v[1]]).unwrap();
        assert!((taylor - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn parse_specs() {
        let f = parse_function::<f64>("poly: 2*x0^2*x1 - x1 + 0.5", 2).unwrap();
        assert!((f.value(&[1.0, 3.0]).unwrap() - 3.5).abs() < 1e-15);
        let g = parse_function::<f64>("poly:x^2", 1).unwrap();
        assert_eq!(g.value(&[3.0]).unwrap(), 9.0);
        let h = parse_function::<f64>("poly:1e-3*x^2", 1).unwrap();
        assert!((h.value(&[10.0]).unwrap() - 0.1).abs() < 1e-15);
        assert!(parse_function::<f64>("exp", 1).is_ok());
        assert!(parse_function::<f64>("exp", 2).is_err());
        assert!(parse_function::<f64>("log:0.5,4", 1).is_ok());
        assert!(parse_function::<f64>("log:0.5", 1).is_err());
        assert!(parse_function::<f64>("poly:x3", 2).is_err());
        assert!(parse_function::<f64>("sin", 1).is_err());
    }
}
