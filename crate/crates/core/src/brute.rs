//! Exhaustive enumeration over partitions — the reference answer for
//! hand-sized instances.
//!
//! The search walks all `p^n` assignments in lexicographic order, filters by
//! feasibility, and scores the survivors through the same objective spec the
//! solver uses. Slack coordinates are uniquely determined by the assignment,
//! so the number of feasible partitions is exactly the size of the solver's
//! fiber.

use crate::convex::ObjectiveSpec;
use crate::model::{Instance, Partition};
use num_rational::BigRational;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BruteError {
    #[error("search space p^n = {size} exceeds the cap of {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },
}

#[derive(Debug, Clone)]
pub struct BruteConfig {
    pub max_space: u128,
}

impl Default for BruteConfig {
    fn default() -> Self {
        Self { max_space: 2_000_000 }
    }
}

fn space_size(inst: &Instance, cfg: &BruteConfig) -> Result<u128, BruteError> {
    let mut size: u128 = 1;
    for _ in 0..inst.n() {
        size = size.saturating_mul(inst.p() as u128);
        if size > cfg.max_space {
            return Err(BruteError::SpaceTooLarge { size, cap: cfg.max_space });
        }
    }
    Ok(size)
}

/// All feasible partitions in lexicographic assignment order.
pub fn enumerate_feasible(
    inst: &Instance,
    cfg: &BruteConfig,
) -> Result<Vec<Partition>, BruteError> {
    space_size(inst, cfg)?;
    let (n, p) = (inst.n(), inst.p());
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    loop {
        let part = Partition::new(assignment.clone());
        if inst.is_feasible(&part) {
            out.push(part);
        }
        // Odometer increment, most significant digit first for lex order.
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            assignment[k] += 1;
            if assignment[k] < p {
                break;
            }
            assignment[k] = 0;
        }
    }
}

/// Number of feasible partitions (equivalently, fiber size).
pub fn count_feasible(inst: &Instance, cfg: &BruteConfig) -> Result<u128, BruteError> {
    Ok(enumerate_feasible(inst, cfg)?.len() as u128)
}

/// Best feasible partition under the spec's order, with its projection;
/// `None` when the instance is infeasible. Ties go to the lexicographically
/// first assignment.
pub fn brute_optimum(
    inst: &Instance,
    spec: &ObjectiveSpec,
    cfg: &BruteConfig,
) -> Result<Option<(Partition, Vec<BigRational>)>, BruteError> {
    let mut best: Option<(Partition, Vec<BigRational>)> = None;
    for part in enumerate_feasible(inst, cfg)? {
        let y = inst.stacked_utility_sums(&part).expect("enumerated partition is valid");
        let replace = match &best {
            None => true,
            Some((_, best_y)) => spec.compare(&y, best_y) == Ordering::Greater,
        };
        if replace {
            best = Some((part, y));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RatMatrix;
    use crate::model::{ClusterBounds, Item, WeightDomain};
    use crate::num::{bi, br};

    fn instance(utilities: &[[i64; 2]], bounds: &[(i64, i64); 2]) -> Instance {
        let domain = WeightDomain::from_weight_vectors(2, vec![vec![bi(1), bi(1)]]).unwrap();
        let items = utilities
            .iter()
            .enumerate()
            .map(|(j, u)| Item {
                id: j,
                weight_index: 0,
                utility: RatMatrix::from_i64(&[&[u[0], u[1]]]),
            })
            .collect();
        let bounds = bounds
            .iter()
            .map(|&(lo, hi)| ClusterBounds { lower: vec![bi(lo)], upper: vec![bi(hi)] })
            .collect();
        Instance::new(domain, items, bounds, ObjectiveSpec::linear_ones(2)).unwrap()
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let inst = instance(&[[0, 0], [0, 0]], &[(1, 1), (1, 1)]);
        let parts = enumerate_feasible(&inst, &BruteConfig::default()).unwrap();
        let seen: Vec<&[usize]> = parts.iter().map(|p| p.assignment()).collect();
        assert_eq!(seen, vec![&[0, 1][..], &[1, 0][..]]);
        assert_eq!(count_feasible(&inst, &BruteConfig::default()).unwrap(), 2);
    }

    #[test]
    fn optimum_and_lex_tie_break() {
        // Symmetric utilities: [0,1] and [1,0] both score 2; lex first wins.
        let inst = instance(&[[1, 1], [1, 1]], &[(1, 1), (1, 1)]);
        let spec = ObjectiveSpec::linear_ones(2);
        let (part, y) = brute_optimum(&inst, &spec, &BruteConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(part.assignment(), &[0, 1]);
        assert_eq!(y, vec![br(1, 1), br(1, 1)]);
    }

    #[test]
    fn strict_improvement_is_taken() {
        let inst = instance(&[[5, 0], [0, 3]], &[(1, 1), (1, 1)]);
        let spec = ObjectiveSpec::linear_ones(2);
        let (part, y) = brute_optimum(&inst, &spec, &BruteConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(part.assignment(), &[0, 1]);
        assert_eq!(y, vec![br(5, 1), br(3, 1)]);
    }

    #[test]
    fn infeasible_instance_yields_none() {
        let inst = instance(&[[0, 0], [0, 0]], &[(2, 2), (2, 2)]);
        let spec = ObjectiveSpec::linear_ones(2);
        assert!(brute_optimum(&inst, &spec, &BruteConfig::default()).unwrap().is_none());
    }

    #[test]
    fn space_cap() {
        let inst = instance(&[[0, 0], [0, 0]], &[(1, 1), (1, 1)]);
        let cfg = BruteConfig { max_space: 3 };
        assert!(matches!(
            enumerate_feasible(&inst, &cfg),
            Err(BruteError::SpaceTooLarge { size: 4, cap: 3 })
        ));
    }
}
