//! Compensated Riemann sums along nested partitions and the resulting
//! reduced rough integral.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lift::{ControlledPath, ReducedRoughPath};
use crate::path::{control, Diameter, Partition, RegulatedPath};
use crate::scalar::{lit, pairwise_sum, Scalar};
use crate::tensor::pair;

/// Cells per rayon task below which sums are evaluated sequentially.
const PAR_THRESHOLD: usize = 2048;

/// `Σ_{[s,t] ∈ Π} Ξ_{s,t}` with its per-cell terms.
#[derive(Clone, Debug)]
pub struct CompensatedSum<T> {
    pub partition: Partition,
    pub terms: Vec<T>,
    pub value: T,
}

/// Compensated sum of `y` against `lift` over `partition`.
pub fn compensated_sum<T: Scalar>(
    y: &ControlledPath<T>,
    lift: &ReducedRoughPath<'_, T>,
    partition: &Partition,
) -> Result<CompensatedSum<T>> {
    y.check_compatible(lift)?;
    if partition.last() != lift.base().last_index() {
        return Err(Error::InvalidPartition(format!(
            "partition ends at {} but the grid has {} points",
            partition.last(),
            lift.base().len()
        )));
    }
    let cells: Vec<(usize, usize)> = partition.cells().collect();
    let terms: Vec<T> = if cells.len() >= PAR_THRESHOLD {
        cells.par_iter().map(|&(s, t)| y.germ(lift, s, t)).collect::<Result<_>>()?
    } else {
        cells.iter().map(|&(s, t)| y.germ(lift, s, t)).collect::<Result<_>>()?
    };
    Ok(CompensatedSum {
        partition: partition.clone(),
        value: pairwise_sum(&terms),
        terms,
    })
}

/// Grid indices that must be partition points at jump threshold `eta`.
pub fn large_jumps<T: Scalar>(x: &RegulatedPath<T>, eta: T) -> Vec<usize> {
    x.jumps()
        .into_iter()
        .filter(|j| j.minus.norm() > eta || j.plus.norm() > eta)
        .map(|j| j.index)
        .collect()
}

/// Coarsest partition with every jump above `eta` as a point and interior
/// oscillation below `eps` on every cell.
pub fn refine_partition<T: Scalar>(x: &RegulatedPath<T>, eps: T, eta: T) -> Result<Partition> {
    if !(eps > T::zero()) || !(eta > T::zero()) {
        return Err(Error::Precondition("refine_partition needs eps > 0 and eta > 0".into()));
    }
    Ok(greedy_partition(x, eps, &large_jumps(x, eta)))
}

fn greedy_partition<T: Scalar>(x: &RegulatedPath<T>, eps: T, forced: &[usize]) -> Partition {
    let last = x.last_index();
    let mut is_forced = vec![false; x.len()];
    for &i in forced {
        is_forced[i] = true;
    }
    let mut points = vec![0];
    let mut a = 0;
    while a < last {
        let mut b = a + 1;
        let mut osc = Diameter::new(x.dim());
        while b < last && !is_forced[b] {
            osc.push_point(x, b);
            if osc.value() >= eps {
                break;
            }
            b += 1;
        }
        points.push(b);
        a = b;
    }
    Partition::new(points, x.len()).expect("greedy partition is valid")
}

/// Splits cells whose two endpoints are both discontinuities at the
/// continuous interior grid point nearest the middle. Cells with no such
/// point are returned as defects.
pub fn enforce_alternation<T: Scalar>(x: &RegulatedPath<T>, partition: &Partition) -> (Partition, Vec<(usize, usize)>) {
    let mut points = Vec::with_capacity(partition.indices().len());
    let mut defects = Vec::new();
    points.push(0);
    for (a, b) in partition.cells() {
        if !x.is_continuous_at(a) && !x.is_continuous_at(b) {
            let mid = (a + b) / 2;
            let pick = (a + 1..b)
                .filter(|&m| x.is_continuous_at(m))
                .min_by_key(|&m| (m.abs_diff(mid), m));
            match pick {
                Some(m) => points.push(m),
                None => defects.push((a, b)),
            }
        }
        points.push(b);
    }
    (Partition::new(points, x.len()).expect("split partition is valid"), defects)
}

/// One `(eps, eta)` level of a refinement schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleLevel<T> {
    pub eps: T,
    pub eta: T,
}

/// Decreasing thresholds; the full grid is always appended as the last step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule<T> {
    pub levels: Vec<ScheduleLevel<T>>,
}

impl<T: Scalar> Schedule<T> {
    pub fn new(levels: Vec<ScheduleLevel<T>>) -> Result<Self> {
        for w in levels.windows(2) {
            if !(w[1].eps < w[0].eps) || w[1].eta > w[0].eta {
                return Err(Error::Precondition(
                    "schedule eps must strictly decrease and eta must not increase".into(),
                ));
            }
        }
        if levels.iter().any(|l| !(l.eps > T::zero()) || !(l.eta > T::zero())) {
            return Err(Error::Precondition("schedule thresholds must be positive".into()));
        }
        Ok(Self { levels })
    }
}

/// Levels in the default schedule.
pub const DEFAULT_LEVELS: usize = 9;

/// `eps_m = osc_max 2^-m` and `eta_m = q_0.9(jump sizes) 2^-m`, `m = 0..9`.
pub fn default_schedule<T: Scalar>(x: &RegulatedPath<T>) -> Schedule<T> {
    let osc_max = x.oscillation(0, x.last_index()).unwrap_or(T::zero());
    let eps0 = if osc_max > T::zero() { osc_max } else { T::one() };
    let mut sizes: Vec<T> = x
        .jumps()
        .iter()
        .map(|j| j.minus.norm().max(j.plus.norm()))
        .collect();
    sizes.sort_by(|a, b| a.partial_cmp(b).expect("finite jump sizes"));
    let eta0 = if sizes.is_empty() {
        T::one()
    } else {
        let k = ((sizes.len() as f64) * 0.9).ceil() as usize;
        sizes[k.clamp(1, sizes.len()) - 1]
    };
    let half = lit::<T>(0.5);
    let levels = (0..DEFAULT_LEVELS)
        .map(|m| {
            let scale = half.powi(m as i32);
            ScheduleLevel {
                eps: eps0 * scale,
                eta: eta0 * scale,
            }
        })
        .collect();
    Schedule { levels }
}

/// One partition of a refinement chain.
#[derive(Clone, Debug)]
pub struct ChainLevel<T> {
    /// `None` marks the closing full-grid step.
    pub level: Option<ScheduleLevel<T>>,
    pub partition: Partition,
    pub forced: Vec<usize>,
    pub alternation_defects: Vec<(usize, usize)>,
}

/// Nested partitions for `schedule`, each refining the previous one, ending
/// with the full grid.
pub fn refinement_chain<T: Scalar>(x: &RegulatedPath<T>, schedule: &Schedule<T>) -> Vec<ChainLevel<T>> {
    let mut chain: Vec<ChainLevel<T>> = Vec::with_capacity(schedule.levels.len() + 1);
    for &level in &schedule.levels {
        let forced = large_jumps(x, level.eta);
        let mut partition = greedy_partition(x, level.eps, &forced);
        if let Some(prev) = chain.last() {
            partition = partition.union(&prev.partition);
        }
        let (partition, alternation_defects) = enforce_alternation(x, &partition);
        chain.push(ChainLevel {
            level: Some(level),
            partition,
            forced,
            alternation_defects,
        });
    }
    let full = Partition::full(x.len());
    let (_, alternation_defects) = enforce_alternation(x, &full);
    chain.push(ChainLevel {
        level: None,
        partition: full,
        forced: x.jumps().iter().map(|j| j.index).collect(),
        alternation_defects,
    });
    chain
}

/// `δΞ_{s,u,t}` computed directly and through the remainders.
#[derive(Clone, Debug, Serialize)]
pub struct SewingDefect<T> {
    pub s: usize,
    pub u: usize,
    pub t: usize,
    /// `Ξ_{s,t} - Ξ_{s,u} - Ξ_{u,t}`.
    pub direct: T,
    /// `-Σ_k R^k_{s,u} 𝕏^{k+1}_{u,t}`.
    pub via_remainder: T,
    /// Total magnitude of the products entering either evaluation; the
    /// identity is checked relative to it.
    pub scale: T,
    pub c_su: T,
    pub c_ut: T,
    pub agrees: bool,
}

/// Relative tolerance of the sewing identity.
pub const SEWING_RTOL: f64 = 1e-10;

/// Evaluates the sewing defect on a grid triple.
pub fn sewing_defect<T: Scalar>(
    y: &ControlledPath<T>,
    lift: &ReducedRoughPath<'_, T>,
    s: usize,
    u: usize,
    t: usize,
) -> Result<SewingDefect<T>> {
    let c = control(lift.base(), lift.p())?;
    sewing_defect_with(y, lift, s, u, t, c.value(s, u)?, c.value(u, t)?)
}

/// [`sewing_defect`] without the control evaluations.
pub fn sewing_identity<T: Scalar>(
    y: &ControlledPath<T>,
    lift: &ReducedRoughPath<'_, T>,
    s: usize,
    u: usize,
    t: usize,
) -> Result<SewingDefect<T>> {
    sewing_defect_with(y, lift, s, u, t, T::nan(), T::nan())
}

fn sewing_defect_with<T: Scalar>(
    y: &ControlledPath<T>,
    lift: &ReducedRoughPath<'_, T>,
    s: usize,
    u: usize,
    t: usize,
    c_su: T,
    c_ut: T,
) -> Result<SewingDefect<T>> {
    y.check_compatible(lift)?;
    if !(s <= u && u <= t) {
        return Err(Error::Precondition(format!("sewing_defect needs s <= u <= t, got ({s}, {u}, {t})")));
    }
    let xi_st = y.germ(lift, s, t)?;
    let xi_su = y.germ(lift, s, u)?;
    let xi_ut = y.germ(lift, u, t)?;
    let direct = xi_st - xi_su - xi_ut;
    let mut via = T::zero();
    let mut scale = y.germ_magnitude(lift, s, t)? + y.germ_magnitude(lift, s, u)? + y.germ_magnitude(lift, u, t)?;
    for k in 0..y.n() {
        let r = y.remainder(lift, k, s, u)?;
        let level = lift.level(u, t, k + 1)?;
        via -= pair(&r, &level)?;
        scale += y.remainder_magnitude(lift, k, s, u)? * level.norm();
    }
    let bound = direct.abs().max(via.abs()).max(scale);
    Ok(SewingDefect {
        s,
        u,
        t,
        direct,
        via_remainder: via,
        scale,
        c_su,
        c_ut,
        agrees: (direct - via).abs() <= lit::<T>(SEWING_RTOL) * bound,
    })
}

/// Knobs for [`rrs_integrate`] beyond the tolerance and schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrateOptions {
    /// Largest dyadic span (in grid steps) sampled for sewing defects; 0 disables sampling.
    pub max_sewing_span: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { max_sewing_span: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry<T> {
    pub cells: usize,
    /// Oscillation threshold; 0 marks the full grid.
    pub eps: T,
    pub eta: T,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SewingSample<T> {
    pub s: T,
    pub u: T,
    pub t: T,
    pub defect: T,
    pub via_remainder: T,
    pub c_su: T,
    pub c_ut: T,
}

/// Result of [`rrs_integrate`].
#[derive(Clone, Debug, Serialize)]
pub struct IntegrationReport<T> {
    pub schema: u32,
    /// Full-grid compensated sum.
    pub value: T,
    pub converged: bool,
    /// First trace index from which every later step is within tolerance.
    pub converged_at: Option<usize>,
    pub tol: T,
    pub trace: Vec<TraceEntry<T>>,
    pub sewing_samples: Vec<SewingSample<T>>,
    /// Times forced into the partition at the last scheduled level.
    pub large_jump_times: Vec<T>,
    /// Cells `(t_a, t_b)` with discontinuities at both ends that could not be split.
    pub alternation_defects: Vec<(T, T)>,
    #[serde(skip)]
    pub partitions: Vec<Partition>,
}

/// Reduced rough integral `∫ Y d𝕏` along the refinement chain of `schedule`.
pub fn rrs_integrate<T: Scalar>(
    y: &ControlledPath<T>,
    lift: &ReducedRoughPath<'_, T>,
    tol: T,
    schedule: &Schedule<T>,
    options: &IntegrateOptions,
) -> Result<IntegrationReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    y.check_compatible(lift)?;
    let x = lift.base();
    let chain = refinement_chain(x, schedule);
    let mut trace = Vec::with_capacity(chain.len());
    for level in &chain {
        let sum = compensated_sum(y, lift, &level.partition)?;
        let (eps, eta) = level.level.map_or((T::zero(), T::zero()), |l| (l.eps, l.eta));
        trace.push(TraceEntry {
            cells: level.partition.n_cells(),
            eps,
            eta,
            value: sum.value,
        });
    }
    let close = |a: T, b: T| (a - b).abs() <= tol * (T::one() + b.abs());
    let value = trace.last().expect("chain is never empty").value;
    let converged = trace.len() < 2 || close(trace[trace.len() - 2].value, value);
    let mut converged_at = None;
    if converged {
        let mut k = trace.len() - 1;
        while k > 0 && close(trace[k - 1].value, trace[k].value) {
            k -= 1;
        }
        converged_at = Some(k);
    }
    let scheduled = &chain[chain.len().saturating_sub(2)];
    let large_jump_times = scheduled.forced.iter().map(|&i| x.time(i)).collect();
    let alternation_defects = scheduled
        .alternation_defects
        .iter()
        .map(|&(a, b)| (x.time(a), x.time(b)))
        .collect();
    let sewing_samples = sample_sewing(y, lift, options.max_sewing_span)?;
    Ok(IntegrationReport {
        schema: 1,
        value,
        converged,
        converged_at,
        tol,
        trace,
        sewing_samples,
        large_jump_times,
        alternation_defects,
        partitions: chain.into_iter().map(|l| l.partition).collect(),
    })
}

/// Dyadic triples `(s, s + h/2, s + h)` at the start and middle of the grid.
pub fn dyadic_triples(grid_len: usize, max_span: usize) -> Vec<(usize, usize, usize)> {
    let last = grid_len - 1;
    let mut out = Vec::new();
    let mut h = 2;
    while h <= max_span.min(last) {
        for s in [0, (last / 2) / h * h] {
            if s + h <= last && !out.contains(&(s, s + h / 2, s + h)) {
                out.push((s, s + h / 2, s + h));
            }
        }
        h *= 2;
    }
    out
}

fn sample_sewing<T: Scalar>(
    y: &ControlledPath<T>,
    lift: &ReducedRoughPath<'_, T>,
    max_span: usize,
) -> Result<Vec<SewingSample<T>>> {
    let x = lift.base();
    dyadic_triples(x.len(), max_span)
        .into_par_iter()
        .map(|(s, u, t)| {
            let d = sewing_defect(y, lift, s, u, t)?;
            Ok(SewingSample {
                s: x.time(s),
                u: x.time(u),
                t: x.time(t),
                defect: d.direct.abs(),
                via_remainder: d.via_remainder,
                c_su: d.c_su,
                c_ut: d.c_ut,
            })
        })
        .collect()
}
