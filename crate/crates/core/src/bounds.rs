//! Closed-form label-efficiency bounds.
//!
//! All bounds are functions of `alpha = l / c`. The central quantity is the
//! surviving fraction of a fresh batch after contraction,
//! `Q(alpha) = (1 - e^-alpha) / alpha`. Everything here is evaluated in
//! forms that avoid subtracting nearly equal numbers, because the small
//! `alpha` regime is where the bounds differ most.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum BoundsError {
    #[error("alpha must be finite and > 0, got {0}")]
    Alpha(f64),
    #[error("beta must lie strictly between 0 and 1, got {0}")]
    Beta(f64),
    #[error("p must lie in [0, 1], got {0}")]
    Consistency(f64),
    #[error("class counts must be positive and probabilities must match c (c={c}, got {got})")]
    Probabilities { c: usize, got: usize },
}

fn check_alpha(alpha: f64) -> Result<(), BoundsError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(BoundsError::Alpha(alpha))
    }
}

fn check_beta(beta: f64) -> Result<(), BoundsError> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(BoundsError::Beta(beta))
    }
}

/// Sums a series given its first term and a term-to-term recurrence,
/// stopping once terms fall below double precision.
fn series(first: f64, mut next: impl FnMut(usize, f64) -> f64) -> f64 {
    let mut term = first;
    let mut sum = first;
    for k in 1..64 {
        term = next(k, term);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `Q(a) = (1 - e^-a) / a` for `a > 0`.
pub(crate) fn q(a: f64) -> f64 {
    if a < 1e-4 {
        1.0 - a / 2.0 + a * a / 6.0 - a * a * a / 24.0
    } else {
        -(-a).exp_m1() / a
    }
}

/// `1 - Q(a) = a/2 - a^2/6 + a^3/24 - ...`.
pub(crate) fn one_minus_q(a: f64) -> f64 {
    if a < 0.5 {
        // term k is (-1)^(k+1) a^k / (k+1)!
        series(a / 2.0, |k, prev| -prev * a / (k as f64 + 2.0))
    } else {
        (a + (-a).exp_m1()) / a
    }
}

/// `1 + (1 - e) ln(1 - e) / e = e/2 + e^2/6 + e^3/12 + ...`, for `e` in (0, 1).
fn log_gap(e: f64) -> f64 {
    if e < 0.1 {
        // term j is e^(j+1) / ((j+2)(j+1))
        series(e / 2.0, |j, prev| prev * e * j as f64 / (j as f64 + 2.0))
    } else if e >= 1.0 {
        1.0
    } else {
        1.0 + (1.0 - e) * (-e).ln_1p() / e
    }
}

/// Asymptotic fraction of a fresh batch that survives contraction.
pub fn q_function(alpha: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    Ok(q(alpha))
}

/// Expected number of distinct classes among `l` i.i.d. draws from `probs`:
/// `c - sum_i (1 - p_i)^l`.
pub fn expected_unique_exact(c: usize, l: usize, probs: &[f64]) -> Result<f64, BoundsError> {
    if c == 0 || probs.len() != c || probs.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        return Err(BoundsError::Probabilities { c, got: probs.len() });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(BoundsError::Probabilities { c, got: probs.len() });
    }
    let missing: f64 = probs.iter().map(|&p| if p >= 1.0 { 0.0 } else { (l as f64 * (-p).ln_1p()).exp() }).sum();
    Ok(c as f64 - missing)
}

/// Lower bound on the efficiency of contract-the-connected-components:
/// `1 - Q(alpha)`.
pub fn c3_bound(alpha: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    Ok(one_minus_q(alpha))
}

/// Representatives lower bound with `sets` representative sets:
/// `(1-b)(1-q)^2 / (1 - q - (q/r)(1 - q^r))`, `q = Q(alpha (1 - b))`.
///
/// The denominator is rewritten as `e * [(1 - Q(x)) + Q(x) * g(e)]` with
/// `e = 1 - q`, `x = -r ln q` and `g(e) = 1 + (1-e) ln(1-e) / e`; both
/// bracketed terms are non-negative.
pub fn representatives_bound_with_sets(alpha: f64, beta: f64, sets: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    let y = alpha * (1.0 - beta);
    let e = one_minus_q(y);
    let x = -sets * (-e).ln_1p();
    let bracket = one_minus_q(x) + q(x) * log_gap(e);
    Ok((1.0 - beta) * e / bracket)
}

/// Theorem-form representatives bound with the real-valued set count
/// `r = 1 / (alpha beta)`.
pub fn representatives_bound(alpha: f64, beta: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    representatives_bound_with_sets(alpha, beta, 1.0 / (alpha * beta))
}

/// Number of representative sets used by the exact form, `ceil(1/(alpha beta))`.
pub fn representative_sets(alpha: f64, beta: f64) -> f64 {
    (1.0 / (alpha * beta)).ceil().max(1.0)
}

/// The tighter pre-bound efficiency
/// `(1-b) / sum_{i<r} (1 - i/r) prod_{k<i} Q(alpha (1-b) / (1 - k alpha b))`
/// with integer `r = ceil(1/(alpha beta))`.
pub fn representatives_bound_exact(alpha: f64, beta: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    let r = representative_sets(alpha, beta);
    let y = alpha * (1.0 - beta);
    let step = alpha * beta;
    let mut total = 0.0;
    let mut product = 1.0;
    let mut i = 0.0;
    while i < r {
        total += (1.0 - i / r) * product;
        let shrink = 1.0 - i * step;
        if shrink <= 0.0 {
            break;
        }
        product *= q(y / shrink);
        // Remaining terms are bounded by r * product.
        if product * (r - i) <= 1e-17 * total {
            break;
        }
        i += 1.0;
    }
    Ok((1.0 - beta) / total)
}

/// Which representatives bound to maximize over beta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BetaObjective {
    Theorem,
    Exact,
}

impl BetaObjective {
    pub fn evaluate(self, alpha: f64, beta: f64) -> Result<f64, BoundsError> {
        match self {
            BetaObjective::Theorem => representatives_bound(alpha, beta),
            BetaObjective::Exact => representatives_bound_exact(alpha, beta),
        }
    }
}

pub const BETA_GRID_STEP: f64 = 1e-3;
pub const BETA_TOLERANCE: f64 = 1e-6;

/// Maximizes `objective` over beta: a grid at step 1e-3 on
/// `[1e-3, 1 - 1e-3]`, then golden-section refinement around the best
/// grid point. Returns `(beta*, value)`.
pub fn optimize_beta(alpha: f64, objective: BetaObjective) -> Result<(f64, f64), BoundsError> {
    check_alpha(alpha)?;
    let points = (1.0 / BETA_GRID_STEP).round() as usize - 1;
    let mut best = (BETA_GRID_STEP, f64::NEG_INFINITY);
    let mut best_k = 1;
    for k in 1..=points {
        let beta = k as f64 * BETA_GRID_STEP;
        let v = objective.evaluate(alpha, beta)?;
        if v > best.1 {
            best = (beta, v);
            best_k = k;
        }
    }
    let lo = (best_k.max(2) - 1) as f64 * BETA_GRID_STEP;
    let hi = (best_k.min(points - 1) + 1) as f64 * BETA_GRID_STEP;
    let refined = golden_section_max(|b| objective.evaluate(alpha, b), lo, hi, BETA_TOLERANCE)?;
    if refined.1 > best.1 {
        best = refined;
    }
    Ok(best)
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64), BoundsError>
where
    F: Fn(f64) -> Result<f64, BoundsError>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Ceiling on any algorithm's efficiency: `min(1, 2 alpha / (1 + alpha))`.
pub fn upper_bound(alpha: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    Ok((2.0 * alpha / (1.0 + alpha)).min(1.0))
}

/// Lower bound for consistently-contract-the-connected-components under
/// name consistency `p`:
/// `1 - (1 - e^-a) / (a - e^-a + e^-a(1-p))`.
pub fn c4_bound(alpha: f64, p: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(BoundsError::Consistency(p));
    }
    // e^-a(1-p) - e^-a = e^-a (e^ap - 1)
    let lift = (-alpha).exp() * (alpha * p).exp_m1();
    Ok((alpha * one_minus_q(alpha) + lift) / (alpha + lift))
}

/// The bound families that can be tabulated over an alpha grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    C3,
    /// Theorem form at the beta that maximizes it.
    ReprTheorem,
    /// Exact form at the beta that maximizes it.
    ReprExact,
    Upper,
    C4(f64),
}

impl BoundKind {
    pub fn evaluate(self, alpha: f64) -> Result<f64, BoundsError> {
        match self {
            BoundKind::C3 => c3_bound(alpha),
            BoundKind::ReprTheorem => optimize_beta(alpha, BetaObjective::Theorem).map(|(_, v)| v),
            BoundKind::ReprExact => optimize_beta(alpha, BetaObjective::Exact).map(|(_, v)| v),
            BoundKind::Upper => upper_bound(alpha),
            BoundKind::C4(p) => c4_bound(alpha, p),
        }
    }
}

/// A bound evaluated along a strictly increasing alpha grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub alpha_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl BoundCurve {
    pub fn evaluate(kind: BoundKind, alpha_grid: &[f64]) -> Result<Self, BoundsError> {
        if let Some(w) = alpha_grid.windows(2).find(|w| w[0].is_nan() || w[1].is_nan() || w[0] >= w[1]) {
            return Err(BoundsError::Alpha(w[1]));
        }
        let values = alpha_grid.iter().map(|&a| kind.evaluate(a)).collect::<Result<Vec<_>, _>>()?;
        Ok(BoundCurve { kind, alpha_grid: alpha_grid.to_vec(), values })
    }
}
