//! Jump corrections and the Itô-type change of variables for regulated paths.

mod proof;

pub use proof::{proof_term_diagnostics, proof_terms_on_partition, ProofTermLevel, ProofTerms};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lift::{check_function, controlled_from_function, reduced_lift};
use crate::path::{RegulatedPath, Side};
use crate::rrs::{default_schedule, rrs_integrate, IntegrateOptions, IntegrationReport, Schedule};
use crate::scalar::{factorial, lit, pairwise_sum, Scalar};
use crate::smoothfn::{make_log_clamped, SmoothFunction};
use crate::tensor::pair_rank1;

/// `F(after) - F(before) - Σ_{k=1}^n D^kF(before) Δ^k / k!` at one jump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpCorrection<T> {
    pub t: T,
    pub index: usize,
    pub side: Side,
    /// `F(after) - F(before)`.
    pub raw: T,
    /// `D^kF(before) Δ^k / k!` for `k = 1..=n`.
    pub taylor_terms: Vec<T>,
    pub taylor: T,
    /// `raw - taylor`, the reported correction.
    pub value: T,
}

fn correction<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    n: usize,
    t: T,
    index: usize,
    side: Side,
    before: &[T],
    after: &[T],
) -> Result<JumpCorrection<T>> {
    let delta: Vec<T> = before.iter().zip(after).map(|(&a, &b)| b - a).collect();
    let raw = f.value(after)? - f.value(before)?;
    let taylor_terms = (1..=n)
        .map(|k| Ok(pair_rank1(&f.derivative(k, before)?, &delta)? / factorial::<T>(k)))
        .collect::<Result<Vec<T>>>()?;
    let taylor = pairwise_sum(&taylor_terms);
    Ok(JumpCorrection {
        t,
        index,
        side,
        raw,
        taylor_terms,
        taylor,
        value: raw - taylor,
    })
}

/// Left and right jump corrections, each list ordered by time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrectionLedger<T> {
    pub left: Vec<JumpCorrection<T>>,
    pub right: Vec<JumpCorrection<T>>,
    pub left_sum: T,
    pub right_sum: T,
}

/// Corrections at every left jump in `(0, T]` and every right jump in `[0, T)`.
pub fn jump_corrections<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    x: &RegulatedPath<T>,
    n: usize,
) -> Result<CorrectionLedger<T>> {
    check_function(f, x, n)?;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for i in 0..x.len() {
        let t = x.time(i);
        if x.left(i) != x.at(i) {
            left.push(correction(f, n, t, i, Side::Left, x.left(i), x.at(i))?);
        }
        if x.right(i) != x.at(i) {
            right.push(correction(f, n, t, i, Side::Right, x.at(i), x.right(i))?);
        }
    }
    let sum = |v: &[JumpCorrection<T>]| pairwise_sum(&v.iter().map(|c| c.value).collect::<Vec<_>>());
    Ok(CorrectionLedger {
        left_sum: sum(&left),
        right_sum: sum(&right),
        left,
        right,
    })
}

/// Which form of the identity applies to a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ItoCase {
    General,
    Cadlag,
    Continuous,
}

impl ItoCase {
    pub fn of<T: Scalar>(x: &RegulatedPath<T>) -> Self {
        if x.is_continuous() {
            Self::Continuous
        } else if x.is_cadlag() {
            Self::Cadlag
        } else {
            Self::General
        }
    }
}

/// Both sides of `F(X_T) - F(X_0) = ∫ DF(X) d𝕏 + Σ 𝒥^- + Σ 𝒥^+`.
#[derive(Clone, Debug, Serialize)]
pub struct ItoReport<T> {
    pub schema: u32,
    pub function: String,
    pub p: T,
    pub n: usize,
    pub lhs: T,
    pub integral: IntegrationReport<T>,
    pub left_corrections: Vec<JumpCorrection<T>>,
    pub right_corrections: Vec<JumpCorrection<T>>,
    pub left_sum: T,
    pub right_sum: T,
    /// `lhs - integral - left_sum - right_sum` with the full-grid integral.
    pub residual: T,
    /// The residual with each trace value in place of the integral.
    pub partition_residuals: Vec<T>,
    pub case: ItoCase,
}

impl<T: Scalar> ItoReport<T> {
    /// `|residual| / (1 + |lhs|)`.
    pub fn relative_residual(&self) -> T {
        self.residual.abs() / (T::one() + self.lhs.abs())
    }
}

/// Evaluates every term of the identity with the default schedule.
pub fn ito_verify<T: Scalar>(f: &dyn SmoothFunction<T>, x: &RegulatedPath<T>, p: T, tol: T) -> Result<ItoReport<T>> {
    ito_verify_with(f, x, p, tol, &default_schedule(x), &IntegrateOptions::default())
}

pub fn ito_verify_with<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    x: &RegulatedPath<T>,
    p: T,
    tol: T,
    schedule: &Schedule<T>,
    options: &IntegrateOptions,
) -> Result<ItoReport<T>> {
    let lift = reduced_lift(x, p)?;
    let y = controlled_from_function(f, &lift)?;
    let integral = rrs_integrate(&y, &lift, tol, schedule, options)?;
    let ledger = jump_corrections(f, x, lift.n())?;
    let lhs = f.value(x.at(x.last_index()))? - f.value(x.at(0))?;
    let residual_for = |v: T| lhs - v - ledger.left_sum - ledger.right_sum;
    let partition_residuals = integral.trace.iter().map(|e| residual_for(e.value)).collect();
    Ok(ItoReport {
        schema: 1,
        function: f.describe(),
        p,
        n: lift.n(),
        lhs,
        residual: residual_for(integral.value),
        partition_residuals,
        integral,
        left_corrections: ledger.left,
        right_corrections: ledger.right,
        left_sum: ledger.left_sum,
        right_sum: ledger.right_sum,
        case: ItoCase::of(x),
    })
}

/// Driver data for the substitution cross-check `∫DF(Y)dY = ∫DF(Y)V(Y)dX`.
pub struct Substitution<'a, T> {
    pub driver: &'a RegulatedPath<T>,
    /// `V(y)` as a row-major `dim(Y) x dim(X)` matrix.
    pub field: &'a dyn Fn(&[T]) -> Vec<T>,
    /// Declared regularity of the driver; the check runs only for `1`.
    pub driver_p: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SubstitutionCheck<T> {
    NotApplicable { reason: String },
    Checked { observable_side: T, driver_side: T, residual: T },
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservableReport<T> {
    pub ito: ItoReport<T>,
    pub substitution: SubstitutionCheck<T>,
}

/// The identity applied to a solution path `Y`, plus the substitution
/// check when the driver has finite 1-variation.
pub fn observable_chain_rule<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    y: &RegulatedPath<T>,
    p: T,
    tol: T,
    substitution: Option<&Substitution<'_, T>>,
) -> Result<ObservableReport<T>> {
    let ito = ito_verify(f, y, p, tol)?;
    let substitution = match substitution {
        None => SubstitutionCheck::NotApplicable {
            reason: "no driver supplied".into(),
        },
        Some(s) if s.driver_p != T::one() => SubstitutionCheck::NotApplicable {
            reason: format!("driver has p = {}; only finite 1-variation drivers are checked", s.driver_p),
        },
        Some(s) => substitution_sums(f, y, s)?,
    };
    Ok(ObservableReport { ito, substitution })
}

fn substitution_sums<T: Scalar>(
    f: &dyn SmoothFunction<T>,
    y: &RegulatedPath<T>,
    s: &Substitution<'_, T>,
) -> Result<SubstitutionCheck<T>> {
    let x = s.driver;
    if x.times() != y.times() {
        return Err(Error::Precondition("driver and solution must share the grid".into()));
    }
    let (dy, dx) = (y.dim(), x.dim());
    let mut observable = Vec::with_capacity(y.len());
    let mut driver = Vec::with_capacity(y.len());
    for i in 0..y.last_index() {
        let grad = f.derivative(1, y.at(i))?;
        let g = grad.coeffs();
        observable.push(pair_rank1(&grad, &y.increment(i, i + 1)?)?);
        let v = (s.field)(y.at(i));
        if v.len() != dy * dx {
            return Err(Error::DimensionMismatch {
                expected: dy * dx,
                got: v.len(),
            });
        }
        let step = x.increment(i, i + 1)?;
        let mut acc = T::zero();
        for r in 0..dy {
            for c in 0..dx {
                acc += g[r] * v[r * dx + c] * step[c];
            }
        }
        driver.push(acc);
    }
    let observable_side = pairwise_sum(&observable);
    let driver_side = pairwise_sum(&driver);
    Ok(SubstitutionCheck::Checked {
        observable_side,
        driver_side,
        residual: observable_side - driver_side,
    })
}

/// A jump correction of `log W` written through the return ratio `r = Δ / W_-`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioCorrection<T> {
    pub t: T,
    pub ratio: T,
    /// `log(1 + r) - Σ_k (-1)^{k-1} r^k / k`.
    pub value: T,
    /// `(-1)^{k-1} r^k / k` for `k = 1..=n`.
    pub terms: Vec<T>,
    /// Largest relative gap to the generic Taylor terms.
    pub max_rel_gap: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct WealthReport<T> {
    pub ito: ItoReport<T>,
    pub log_bounds: (T, T),
    pub ratio_corrections: Vec<RatioCorrection<T>>,
    pub max_rel_gap: T,
    pub terms_agree: bool,
}

/// Relative tolerance for ratio-form against generic log corrections.
pub const RATIO_RTOL: f64 = 1e-12;

/// Decomposes `log W_T - log W_0` for a positive càdlàg wealth path.
pub fn log_wealth<T: Scalar>(w: &RegulatedPath<T>, p: T, tol: T) -> Result<WealthReport<T>> {
    if w.dim() != 1 {
        return Err(Error::Precondition("wealth must be scalar".into()));
    }
    if !w.is_cadlag() {
        return Err(Error::Precondition("wealth must be càdlàg (no right jumps)".into()));
    }
    let (m, mut hi) = w.value_range()[0];
    if !(m > T::zero()) {
        return Err(Error::Precondition(format!("wealth must stay positive, minimum is {m}")));
    }
    if hi <= m {
        hi = m + m;
    }
    let f = make_log_clamped(m, hi)?;
    let ito = ito_verify(&f, w, p, tol)?;
    let rtol = lit::<T>(RATIO_RTOL);
    let mut ratio_corrections = Vec::with_capacity(ito.left_corrections.len());
    for c in &ito.left_corrections {
        let before = w.left(c.index)[0];
        let r = (w.at(c.index)[0] - before) / before;
        let terms: Vec<T> = (1..=ito.n)
            .map(|k| {
                let sign = if k % 2 == 1 { T::one() } else { -T::one() };
                sign * r.powi(k as i32) / lit::<T>(k as f64)
            })
            .collect();
        let max_rel_gap = terms
            .iter()
            .zip(&c.taylor_terms)
            .map(|(&a, &b)| {
                let scale = a.abs().max(b.abs());
                if scale > T::zero() {
                    (a - b).abs() / scale
                } else {
                    T::zero()
                }
            })
            .fold(T::zero(), T::max);
        ratio_corrections.push(RatioCorrection {
            t: c.t,
            ratio: r,
            value: r.ln_1p() - pairwise_sum(&terms),
            terms,
            max_rel_gap,
        });
    }
    let max_rel_gap = ratio_corrections.iter().map(|r| r.max_rel_gap).fold(T::zero(), T::max);
    Ok(WealthReport {
        ito,
        log_bounds: (m, hi),
        ratio_corrections,
        terms_agree: max_rel_gap <= rtol,
        max_rel_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::GridPoint;
    use crate::smoothfn::{make_exp, make_polynomial};

    fn cadlag_step() -> RegulatedPath<f64> {
        RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![0.0]),
                GridPoint::continuous(0.25, vec![0.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![0.0],
                    at: vec![1.0],
                    right: vec![1.0],
                },
                GridPoint::continuous(0.75, vec![1.0]),
                GridPoint::continuous(1.0, vec![1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn exp_left_jump_correction() {
        let x = cadlag_step();
        let l = jump_corrections(&make_exp(), &x, 2).unwrap();
        assert_eq!(l.left.len(), 1);
        assert!(l.right.is_empty());
        let e = std::f64::consts::E;
        assert!((l.left[0].value - (e - 2.5)).abs() < 1e-15);
        assert!((l.left_sum - 0.218_281_828_459_045).abs() < 1e-14);
    }

    #[test]
    fn step_path_identity() {
        let x = cadlag_step();
        let r = ito_verify(&make_exp(), &x, 2.5, 1e-9).unwrap();
        let e = std::f64::consts::E;
        assert!((r.lhs - (e - 1.0)).abs() < 1e-15);
        assert!((r.integral.value - 1.5).abs() < 1e-15);
        assert!(r.residual.abs() <= 1e-12);
        assert_eq!(r.case, ItoCase::Cadlag);
    }

    #[test]
    fn two_sided_cubic() {
        let x = RegulatedPath::from_points(
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
        let f = make_polynomial(vec![(vec![3], 1.0)], 1).unwrap();
        let r = ito_verify(&f, &x, 3.5f64, 1e-9).unwrap();
        assert_eq!(r.case, ItoCase::General);
        assert_eq!(r.left_corrections.len(), 1);
        assert_eq!(r.right_corrections.len(), 1);
        assert!(r.left_sum.abs() < 1e-12 && r.right_sum.abs() < 1e-12);
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn wealth_single_jump() {
        let w = RegulatedPath::from_points(
            1.0,
            1,
            vec![
                GridPoint::continuous(0.0, vec![1.0]),
                GridPoint {
                    t: 0.5,
                    left: vec![1.0],
                    at: vec![1.5],
                    right: vec![1.5],
                },
                GridPoint::continuous(1.0, vec![1.5]),
            ],
        )
        .unwrap();
        let r = log_wealth(&w, 1.0, 1e-9).unwrap();
        assert!((r.ito.lhs - 1.5f64.ln()).abs() < 1e-15);
        assert!((r.ito.integral.value - 0.5).abs() < 1e-15);
        assert!((r.ratio_corrections[0].value - (1.5f64.ln() - 0.5)).abs() < 1e-15);
        assert!((r.ratio_corrections[0].value + 0.094_534).abs() < 1e-5);
        assert!(r.ito.residual.abs() < 1e-15);
        assert!(r.terms_agree);
    }

    #[test]
    fn wealth_preconditions() {
        let neg = RegulatedPath::uniform_scalar(1.0, &[1.0, -0.5]).unwrap();
        assert!(log_wealth(&neg, 1.0, 1e-9).is_err());
        let flat = RegulatedPath::uniform_scalar(1.0, &[2.0, 2.0]).unwrap();
        let r = log_wealth(&flat, 1.0, 1e-9).unwrap();
        assert_eq!(r.log_bounds, (2.0, 4.0));
        assert_eq!(r.ito.case, ItoCase::Continuous);
    }
}
