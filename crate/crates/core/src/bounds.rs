//! Accuracy bounds for reading a two-state memory.
//!
//! A demon that sorts gas particles by a stored label wins work
//! NkT·ln2·[1 − H((1+δ)/2)] per cycle from the sorting step, where δ is the
//! readout accuracy (success probability P_s = (1+δ)/2). Resetting the memory
//! costs NkT·ln2·S, with S = H((1+cosθ)/2) the entropy of the even mixture of
//! the two label states. The cycle stops paying exactly when the winnings
//! match the reset cost, which pins the break-even accuracy δ_th:
//!
//! ```text
//! H((1+δ_th)/2) = 1 − S.
//! ```
//!
//! Quantum measurement theory caps the achievable accuracy independently: the
//! best single-shot discrimination of the two label states reaches
//! δ_QI = sinθ, and the mutual-information route (Holevo cap, I ≤ S) pins
//! δ_Hol. The latter coincides with δ_th, which this module verifies by
//! solving both along separate call paths and asserting agreement, rather
//! than by routing one through the other.
//!
//! All entropies are in bits. Accuracies and probabilities carry newtypes so
//! a raw [0,1] float can't silently cross roles.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{binary_entropy_raw, bisect_monotone, xlog2x};
use crate::qstate;
use crate::tol;

use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfDomain { what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("entropy inversion stalled: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: u32 },
    #[error(
        "independent accuracy solves disagree: delta_th = {delta_th}, delta_hol = {delta_hol}"
    )]
    CrossCheckFailed { delta_th: f64, delta_hol: f64 },
    #[error("too few grid steps ({0}); need at least 2")]
    TooFewSteps(u32),
    #[error("bound table row {index} (cos_theta = {cos_theta}): {source}")]
    Row {
        index: usize,
        cos_theta: f64,
        #[source]
        source: Box<BoundsError>,
    },
}

/// A probability in [0, 1]. Construction tolerates 1e-12 of numerical
/// overshoot (clamped); anything further is a domain error.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self, BoundsError> {
        if !(-tol::ALGEBRAIC..=1.0 + tol::ALGEBRAIC).contains(&p) {
            return Err(BoundsError::OutOfDomain { what: "probability", value: p, lo: 0.0, hi: 1.0 });
        }
        Ok(Self(p.clamp(0.0, 1.0)))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A readout accuracy δ ∈ [0, 1]: δ = 0 is a coin flip, δ = 1 a perfect
/// readout. Same 1e-12 construction slack as [`Probability`].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Accuracy(f64);

impl Accuracy {
    pub fn new(delta: f64) -> Result<Self, BoundsError> {
        if !(-tol::ALGEBRAIC..=1.0 + tol::ALGEBRAIC).contains(&delta) {
            return Err(BoundsError::OutOfDomain { what: "accuracy", value: delta, lo: 0.0, hi: 1.0 });
        }
        Ok(Self(delta.clamp(0.0, 1.0)))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Success probability P_s = (1 + δ)/2 of a single readout.
    pub fn success_probability(self) -> Probability {
        Probability((1.0 + self.0) / 2.0)
    }
}

/// Binary entropy H(p) = −p·log₂p − (1−p)·log₂(1−p) in bits, with the
/// 0·log 0 ≡ 0 convention.
pub fn binary_entropy(p: f64) -> Result<f64, BoundsError> {
    Ok(binary_entropy_raw(Probability::new(p)?.get()))
}

struct Inversion {
    p: f64,
    iterations: u32,
    residual: f64,
}

/// H is symmetric about 1/2, so inversion needs a branch choice; this is the
/// upper branch, where H is strictly decreasing from H(1/2) = 1 to H(1) = 0.
fn invert_entropy_upper(h: f64) -> Result<Inversion, BoundsError> {
    if !(-tol::ALGEBRAIC..=1.0 + tol::ALGEBRAIC).contains(&h) {
        return Err(BoundsError::OutOfDomain { what: "entropy", value: h, lo: 0.0, hi: 1.0 });
    }
    let h = h.clamp(0.0, 1.0);
    // exact endpoints, where H is flat enough that a residual criterion
    // alone would leave p poorly determined
    if h == 1.0 {
        return Ok(Inversion { p: 0.5, iterations: 0, residual: 0.0 });
    }
    if h == 0.0 {
        return Ok(Inversion { p: 1.0, iterations: 0, residual: 0.0 });
    }
    let sol = bisect_monotone(binary_entropy_raw, 0.5, 1.0, h, false, tol::SOLVER_MAX_ITER);
    if sol.residual > tol::SOLVER_RESIDUAL {
        return Err(BoundsError::NoConvergence { residual: sol.residual, iterations: sol.iterations });
    }
    Ok(Inversion { p: sol.value, iterations: sol.iterations, residual: sol.residual })
}

/// The unique p ∈ [1/2, 1] with H(p) = h, to residual 1e-12 or better.
pub fn inverse_binary_entropy_upper(h: f64) -> Result<Probability, BoundsError> {
    Ok(Probability(invert_entropy_upper(h)?.p))
}

fn check_theta(theta: f64) -> Result<(), BoundsError> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(BoundsError::OutOfDomain { what: "theta", value: theta, lo: 0.0, hi: FRAC_PI_2 });
    }
    Ok(())
}

fn delta_th_solve(theta: f64) -> Result<(Accuracy, u32, f64), BoundsError> {
    check_theta(theta)?;
    let s = qstate::von_neumann_entropy_even_mixture(theta);
    let inv = invert_entropy_upper(1.0 - s)?;
    // 2p − 1 is exact for p ∈ [1/2, 1]
    Ok((Accuracy(2.0 * inv.p - 1.0), inv.iterations, inv.residual))
}

/// Break-even accuracy: the δ where the sorting gain NkT·ln2·[1 − H((1+δ)/2)]
/// equals the memory reset cost NkT·ln2·H((1+cosθ)/2).
pub fn delta_th(theta: f64) -> Result<Accuracy, BoundsError> {
    Ok(delta_th_solve(theta)?.0)
}

/// Best single-shot discrimination accuracy for the two label states,
/// δ_QI = sinθ (half the trace distance of the pair).
pub fn delta_qi(theta: f64) -> Result<Accuracy, BoundsError> {
    check_theta(theta)?;
    Accuracy::new(theta.sin())
}

/// Entropy bookkeeping for one readout: marginal entropies of the gas label
/// and the memory record, their joint entropy, and the resulting mutual
/// information. All in bits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InformationChain {
    pub gas_entropy: f64,
    pub memory_entropy: f64,
    pub joint_entropy: f64,
    pub mutual_information: f64,
}

fn chain_for(delta: f64) -> InformationChain {
    // joint table over (gas label, memory record): the label is fair, and
    // the record matches it with probability (1+δ)/2, so matching cells
    // carry (1+δ)/4 and mismatching cells (1−δ)/4
    let matched = (1.0 + delta) / 4.0;
    let mismatched = (1.0 - delta) / 4.0;
    let cells = [matched, mismatched, mismatched, matched];
    let gas_marginal = cells[0] + cells[1];
    let memory_marginal = cells[0] + cells[2];
    let gas_entropy = binary_entropy_raw(gas_marginal);
    let memory_entropy = binary_entropy_raw(memory_marginal);
    let joint_entropy = -cells.iter().copied().map(xlog2x).sum::<f64>();
    InformationChain {
        gas_entropy,
        memory_entropy,
        joint_entropy,
        mutual_information: gas_entropy + memory_entropy - joint_entropy,
    }
}

/// Mutual information between the gas label and the memory record at readout
/// accuracy δ, computed through the full marginal/joint entropy chain rather
/// than any collapsed formula.
pub fn mutual_information_gas_memory(delta: Accuracy) -> InformationChain {
    chain_for(delta.get())
}

/// The collapsed form I(δ) = 1 − H((1+δ)/2) that the chain must reproduce.
pub fn mutual_information_closed(delta: Accuracy) -> f64 {
    1.0 - binary_entropy_raw(delta.success_probability().get())
}

fn delta_hol_solve(theta: f64) -> Result<(Accuracy, u32, f64), BoundsError> {
    check_theta(theta)?;
    let s = qstate::von_neumann_entropy_even_mixture(theta);
    let mi = |d: f64| chain_for(d).mutual_information;
    // I(δ) is flat near δ = 0, so resolve the exact-cap endpoints directly
    if s == 0.0 {
        return Ok((Accuracy(0.0), 0, mi(0.0).abs()));
    }
    if s == 1.0 {
        return Ok((Accuracy(1.0), 0, (mi(1.0) - 1.0).abs()));
    }
    let sol = bisect_monotone(mi, 0.0, 1.0, s, true, tol::SOLVER_MAX_ITER);
    if sol.residual > tol::SOLVER_RESIDUAL {
        return Err(BoundsError::NoConvergence { residual: sol.residual, iterations: sol.iterations });
    }
    Ok((Accuracy::new(sol.value)?, sol.iterations, sol.residual))
}

/// Accuracy at which the readout mutual information exhausts its cap, the
/// mixture entropy S: solves I(δ) = S through the entropy chain. Must agree
/// with [`delta_th`]; [`BoundResult::compute`] asserts that it does.
pub fn delta_hol(theta: f64) -> Result<Accuracy, BoundsError> {
    Ok(delta_hol_solve(theta)?.0)
}

/// The three accuracy bounds at one overlap angle, plus solver diagnostics
/// (the worse iteration count and residual of the two independent solves).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundResult {
    pub delta_th: Accuracy,
    pub delta_qi: Accuracy,
    pub delta_hol: Accuracy,
    pub relative_gap: f64,
    pub solver_iterations: u32,
    pub solver_residual: f64,
}

impl BoundResult {
    pub fn compute(theta: f64) -> Result<Self, BoundsError> {
        let (delta_th, it_th, res_th) = delta_th_solve(theta)?;
        let delta_qi = delta_qi(theta)?;
        let (delta_hol, it_hol, res_hol) = delta_hol_solve(theta)?;
        if (delta_hol.get() - delta_th.get()).abs() > tol::BOUND_CROSS_CHECK {
            return Err(BoundsError::CrossCheckFailed {
                delta_th: delta_th.get(),
                delta_hol: delta_hol.get(),
            });
        }
        let relative_gap = if delta_th.get() > 0.0 {
            ((delta_th.get() - delta_qi.get()) / delta_th.get()).max(0.0)
        } else {
            0.0
        };
        Ok(Self {
            delta_th,
            delta_qi,
            delta_hol,
            relative_gap,
            solver_iterations: it_th.max(it_hol),
            solver_residual: res_th.max(res_hol),
        })
    }
}

/// Bounds on a uniform cosθ grid with `steps` points from `cos_min` to
/// `cos_max` inclusive. A degenerate grid (cos_min = cos_max) repeats the
/// single point. Row failures carry the row index and abscissa.
pub fn bound_table(
    cos_min: f64,
    cos_max: f64,
    steps: u32,
) -> Result<Vec<(f64, BoundResult)>, BoundsError> {
    if !(0.0..=1.0).contains(&cos_min) {
        return Err(BoundsError::OutOfDomain { what: "cos_min", value: cos_min, lo: 0.0, hi: 1.0 });
    }
    if !(cos_min..=1.0).contains(&cos_max) {
        return Err(BoundsError::OutOfDomain { what: "cos_max", value: cos_max, lo: cos_min, hi: 1.0 });
    }
    if steps < 2 {
        return Err(BoundsError::TooFewSteps(steps));
    }
    let span = cos_max - cos_min;
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let cos_theta = if i == steps - 1 {
                cos_max
            } else {
                cos_min + span * (i as f64 / last)
            };
            BoundResult::compute(cos_theta.acos())
                .map(|row| (cos_theta, row))
                .map_err(|source| BoundsError::Row {
                    index: i as usize,
                    cos_theta,
                    source: Box::new(source),
                })
        })
        .collect()
}
