//! Graver-best augmentation for linear objectives.
//!
//! Starting from a feasible point, the solver repeatedly scans the test set
//! for the step `α·g` with the largest objective gain, where `α` is pushed to
//! the box boundary (for a linear objective the gain is linear in `α`, so the
//! maximal step length is always optimal along a fixed direction). When no
//! step improves, the point is globally optimal over the fiber — the test-set
//! property turns the local certificate into a global one.
//!
//! All work happens in the coordinates of [`NFoldSystem::reduced_matrix`];
//! pinned columns never move, so the basis of the reduced matrix reaches
//! every point of the fiber.

use crate::graver::GraverBasis;
use crate::nfold::{NFoldSystem, SystemError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("direction is zero")]
    ZeroDirection,
    #[error("vector length {got} does not match expected {want}")]
    Length { got: usize, want: usize },
    #[error("start point outside its box at column {column}")]
    StartOutOfBox { column: usize },
    #[error("start point infeasible: {source}")]
    StartInfeasible {
        #[from]
        source: SystemError,
    },
    #[error("objective weight vector has length {got}, expected {want}")]
    WeightLength { got: usize, want: usize },
    #[error("test set was computed for a different matrix")]
    BasisMismatch,
    #[error("augmentation exceeded the step cap of {cap}")]
    StepCapExceeded { cap: usize },
}

#[derive(Debug, Clone)]
pub struct AugmentConfig {
    /// Hard cap on accepted augmentation steps before giving up.
    pub max_steps: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { max_steps: 100_000 }
    }
}

/// One accepted step: full-width direction, step length, objective gain.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub direction: Vec<BigInt>,
    pub alpha: BigInt,
    pub gain: BigRational,
}

/// Record of an augmentation run; gains are strictly positive, so objective
/// values along the run are strictly increasing.
#[derive(Debug, Clone)]
pub struct AugmentationTrace {
    pub start_objective: BigRational,
    pub final_objective: BigRational,
    pub steps: Vec<TraceStep>,
}

impl AugmentationTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Objective values visited, starting value first.
    pub fn objective_values(&self) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut v = self.start_objective.clone();
        out.push(v.clone());
        for s in &self.steps {
            v += &s.gain;
            out.push(v.clone());
        }
        out
    }

    /// One line per step: `step <k> alpha <α> gain <δ> objective <value>`.
    pub fn export_lines(&self) -> String {
        let mut out = String::new();
        let mut v = self.start_objective.clone();
        out.push_str(&format!("start objective {v}\n"));
        for (k, s) in self.steps.iter().enumerate() {
            v += &s.gain;
            out.push_str(&format!("step {} alpha {} gain {} objective {}\n", k + 1, s.alpha, s.gain, v));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: Vec<BigInt>,
    pub value: BigRational,
    pub trace: AugmentationTrace,
}

/// Largest `α ≥ 0` with `x + α·g` still inside `[lower, upper]`.
///
/// `x` must lie inside the box; `g` must be nonzero. `None` means the
/// direction is unbounded inside the box (cannot happen for finite boxes with
/// nonzero `g`, but kept total for reuse).
pub fn max_step(
    x: &[BigInt],
    g: &[BigInt],
    lower: &[BigInt],
    upper: &[BigInt],
) -> Result<BigInt, AugmentError> {
    if g.len() != x.len() || lower.len() != x.len() || upper.len() != x.len() {
        return Err(AugmentError::Length { got: g.len(), want: x.len() });
    }
    if g.iter().all(Zero::is_zero) {
        return Err(AugmentError::ZeroDirection);
    }
    if let Some(c) = (0..x.len()).find(|&c| x[c] < lower[c] || x[c] > upper[c]) {
        return Err(AugmentError::StartOutOfBox { column: c });
    }
    Ok(max_step_unchecked(x, g, lower, upper))
}

fn max_step_unchecked(x: &[BigInt], g: &[BigInt], lower: &[BigInt], upper: &[BigInt]) -> BigInt {
    let mut best: Option<BigInt> = None;
    for k in 0..x.len() {
        let gk = &g[k];
        if gk.is_zero() {
            continue;
        }
        // Room is nonnegative for in-box x, so truncating division is floor.
        let cap = if gk.is_positive() {
            (&upper[k] - &x[k]) / gk
        } else {
            (&x[k] - &lower[k]) / -gk
        };
        match &best {
            Some(b) if *b <= cap => {}
            _ => best = Some(cap),
        }
    }
    best.expect("nonzero direction has at least one bounded coordinate")
}

/// Best single step from `x`: the basis element and maximal step length with
/// the largest gain `α·(cost·g)`, ties resolved toward the earliest (lex
/// smallest) basis element. `None` when no step improves.
pub fn graver_best_step(
    x: &[BigInt],
    basis: &GraverBasis,
    cost: &[BigRational],
    lower: &[BigInt],
    upper: &[BigInt],
) -> Option<(Vec<BigInt>, BigInt, BigRational)> {
    let deltas: Vec<BigRational> = basis.vectors().iter().map(|g| dot_cost(cost, g)).collect();
    best_step_indexed(x, basis.vectors(), &deltas, lower, upper)
        .map(|(i, alpha, gain)| (basis.vectors()[i].clone(), alpha, gain))
}

fn dot_cost(cost: &[BigRational], g: &[BigInt]) -> BigRational {
    g.iter()
        .zip(cost)
        .filter(|(gk, _)| !gk.is_zero())
        .map(|(gk, ck)| ck * BigRational::from(gk.clone()))
        .sum()
}

fn best_step_indexed(
    x: &[BigInt],
    vectors: &[Vec<BigInt>],
    deltas: &[BigRational],
    lower: &[BigInt],
    upper: &[BigInt],
) -> Option<(usize, BigInt, BigRational)> {
    let mut best: Option<(usize, BigInt, BigRational)> = None;
    for (i, (g, delta)) in vectors.iter().zip(deltas).enumerate() {
        if !delta.is_positive() {
            continue;
        }
        let alpha = max_step_unchecked(x, g, lower, upper);
        if alpha.is_zero() {
            continue;
        }
        let gain = delta * BigRational::from(alpha.clone());
        // Strict improvement keeps the earliest maximizer, which is the lex
        // smallest element because basis vectors are stored lex sorted.
        let better = match &best {
            None => true,
            Some((_, _, best_gain)) => gain > *best_gain,
        };
        if better {
            best = Some((i, alpha, gain));
        }
    }
    best
}

/// Maximize `wᵀ(C·x)` over the system's fiber starting from the feasible
/// point `x0`, using `basis` as the test set. The result is exactly optimal:
/// the loop only terminates once no basis direction improves.
pub fn solve_linear(
    sys: &NFoldSystem,
    x0: &[BigInt],
    weights: &[BigRational],
    basis: &GraverBasis,
    cfg: &AugmentConfig,
) -> Result<LinearSolution, AugmentError> {
    if weights.len() != sys.objective_rows() {
        return Err(AugmentError::WeightLength { got: weights.len(), want: sys.objective_rows() });
    }
    sys.check_feasible(x0)?;
    let active = sys.active_columns();
    if basis.matrix() != &sys.reduced_matrix() {
        return Err(AugmentError::BasisMismatch);
    }

    // Composite cost wᵀC restricted to active columns.
    let full_cost = sys.objective_matrix().transpose_mul_vec(weights);
    let cost: Vec<BigRational> = active.iter().map(|&c| full_cost[c].clone()).collect();
    let lower: Vec<BigInt> = active.iter().map(|&c| sys.lower()[c].clone()).collect();
    let upper: Vec<BigInt> = active.iter().map(|&c| sys.upper()[c].clone()).collect();
    let mut x: Vec<BigInt> = active.iter().map(|&c| x0[c].clone()).collect();

    let deltas: Vec<BigRational> = basis.vectors().iter().map(|g| dot_cost(&cost, g)).collect();
    let start_objective = sys.linear_value(weights, x0);
    let mut value = start_objective.clone();
    let mut steps = Vec::new();

    while let Some((i, alpha, gain)) = best_step_indexed(&x, basis.vectors(), &deltas, &lower, &upper)
    {
        if steps.len() >= cfg.max_steps {
            return Err(AugmentError::StepCapExceeded { cap: cfg.max_steps });
        }
        let g = &basis.vectors()[i];
        for (xk, gk) in x.iter_mut().zip(g) {
            if !gk.is_zero() {
                *xk += gk * &alpha;
            }
        }
        value += &gain;
        steps.push(TraceStep { direction: sys.expand_active(g), alpha, gain });
    }

    let x_full = {
        let mut full = x0.to_vec();
        for (v, &c) in x.iter().zip(&active) {
            full[c] = v.clone();
        }
        full
    };
    debug_assert!(sys.check_feasible(&x_full).is_ok());
    debug_assert_eq!(sys.linear_value(weights, &x_full), value);

    Ok(LinearSolution {
        x: x_full,
        value: value.clone(),
        trace: AugmentationTrace { start_objective, final_objective: value, steps },
    })
}
