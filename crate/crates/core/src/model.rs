//! Domain types shared by all solver layers: weight domains, items, cluster
//! bounds, instances, and partitions.
//!
//! An instance asks for a partition of `n` items into `p` clusters. Every item
//! carries one weight matrix `W` (s features × p clusters, drawn from a fixed
//! finite domain) and a utility matrix `C` (d rows × p clusters). Cluster `i`
//! accumulates column `i` of the matrices of its members; feasibility bounds
//! the feature totals, the objective acts on the stacked utility sums.
//!
//! Weights are integers — this is what makes slack variables integral later —
//! while utilities are exact rationals so that objective comparisons never
//! involve floating point.

use crate::convex::ObjectiveSpec;
use crate::matrix::{IntMatrix, RatMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("weight domain must contain at least one matrix")]
    EmptyDomain,
    #[error("weight domain entries must all be {s}x{p}, entry {index} is not")]
    DomainShape { index: usize, s: usize, p: usize },
    #[error("weight domain entries {a} and {b} are identical")]
    DuplicateDomainEntry { a: usize, b: usize },
    #[error("instance needs at least one item")]
    NoItems,
    #[error("item {item}: weight index {index} out of range (domain has {m} entries)")]
    WeightIndexRange { item: usize, index: usize, m: usize },
    #[error("item {item}: utility matrix has {got} columns, expected {p}")]
    UtilityColumns { item: usize, got: usize, p: usize },
    #[error("item {item}: utility matrix has {got} rows, every item must have {d}")]
    UtilityRows { item: usize, got: usize, d: usize },
    #[error("expected {p} cluster bounds, got {got}")]
    BoundsCount { got: usize, p: usize },
    #[error("cluster {cluster} bounds: vectors must have length {s}")]
    BoundsLength { cluster: usize, s: usize },
    #[error("cluster {cluster}, feature {feature}: lower bound exceeds upper bound")]
    BoundsInverted { cluster: usize, feature: usize },
    #[error("partition has {got} entries, instance has {n} items")]
    PartitionLength { got: usize, n: usize },
    #[error("partition assigns item {item} to cluster {cluster}, but p = {p}")]
    ClusterRange { item: usize, cluster: usize, p: usize },
}

/// The fixed finite list of admissible weight matrices (shape `s×p` each).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDomain {
    s: usize,
    p: usize,
    entries: Vec<IntMatrix>,
}

impl WeightDomain {
    /// Validates shapes and pairwise distinctness.
    pub fn new(s: usize, p: usize, entries: Vec<IntMatrix>) -> Result<Self, ModelError> {
        assert!(s >= 1 && p >= 1, "feature and cluster counts must be positive");
        if entries.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        for (k, w) in entries.iter().enumerate() {
            if w.rows() != s || w.cols() != p {
                return Err(ModelError::DomainShape { index: k, s, p });
            }
        }
        for a in 0..entries.len() {
            for b in a + 1..entries.len() {
                if entries[a] == entries[b] {
                    return Err(ModelError::DuplicateDomainEntry { a, b });
                }
            }
        }
        Ok(Self { s, p, entries })
    }

    /// Single-feature domain from weight row vectors (the `p1`/`p2` shape).
    pub fn from_weight_vectors(p: usize, vectors: Vec<Vec<BigInt>>) -> Result<Self, ModelError> {
        let entries = vectors.into_iter().map(|v| IntMatrix::from_rows(vec![v])).collect();
        Self::new(1, p, entries)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of distinct weight matrices (`m`).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, k: usize) -> &IntMatrix {
        &self.entries[k]
    }

    pub fn entries(&self) -> &[IntMatrix] {
        &self.entries
    }
}

/// One item to be assigned: a weight matrix (by domain index) plus a utility
/// matrix whose column `i` is the utility vector gained if the item joins
/// cluster `i`.
#[derive(Debug, Clone)]
pub struct Item {
    pub id: usize,
    pub weight_index: usize,
    pub utility: RatMatrix,
}

/// Componentwise feature bounds for one cluster.
#[derive(Debug, Clone)]
pub struct ClusterBounds {
    pub lower: Vec<BigInt>,
    pub upper: Vec<BigInt>,
}

impl ClusterBounds {
    /// Exact bounds (lower = upper), the `p1` shape.
    pub fn exact(values: Vec<BigInt>) -> Self {
        Self { lower: values.clone(), upper: values }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// A complete partitioning problem.
#[derive(Debug, Clone)]
pub struct Instance {
    domain: WeightDomain,
    items: Vec<Item>,
    bounds: Vec<ClusterBounds>,
    pub objective: ObjectiveSpec,
}

impl Instance {
    pub fn new(
        domain: WeightDomain,
        items: Vec<Item>,
        bounds: Vec<ClusterBounds>,
        objective: ObjectiveSpec,
    ) -> Result<Self, ModelError> {
        if items.is_empty() {
            return Err(ModelError::NoItems);
        }
        let p = domain.p();
        let s = domain.s();
        let d = items[0].utility.rows();
        for (j, item) in items.iter().enumerate() {
            if item.weight_index >= domain.len() {
                return Err(ModelError::WeightIndexRange {
                    item: j,
                    index: item.weight_index,
                    m: domain.len(),
                });
            }
            if item.utility.cols() != p {
                return Err(ModelError::UtilityColumns { item: j, got: item.utility.cols(), p });
            }
            if item.utility.rows() != d {
                return Err(ModelError::UtilityRows { item: j, got: item.utility.rows(), d });
            }
        }
        if bounds.len() != p {
            return Err(ModelError::BoundsCount { got: bounds.len(), p });
        }
        for (i, b) in bounds.iter().enumerate() {
            if b.lower.len() != s || b.upper.len() != s {
                return Err(ModelError::BoundsLength { cluster: i, s });
            }
            for f in 0..s {
                if b.lower[f] > b.upper[f] {
                    return Err(ModelError::BoundsInverted { cluster: i, feature: f });
                }
            }
        }
        Ok(Self { domain, items, bounds, objective })
    }

    pub fn domain(&self) -> &WeightDomain {
        &self.domain
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn bounds(&self) -> &[ClusterBounds] {
        &self.bounds
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn p(&self) -> usize {
        self.domain.p()
    }

    pub fn s(&self) -> usize {
        self.domain.s()
    }

    /// Distinct weight matrices in the domain.
    pub fn m(&self) -> usize {
        self.domain.len()
    }

    /// Utility dimension per cluster.
    pub fn d(&self) -> usize {
        self.items[0].utility.rows()
    }

    /// The item's weight matrix.
    pub fn weight_of(&self, item: usize) -> &IntMatrix {
        self.domain.entry(self.items[item].weight_index)
    }

    /// Per-cluster feature totals: entry `i` is the componentwise sum of
    /// column `i` of the weight matrices of the items assigned to cluster `i`.
    /// Empty clusters yield zero vectors.
    pub fn feature_totals(&self, part: &Partition) -> Result<Vec<Vec<BigInt>>, ModelError> {
        part.check(self)?;
        let mut totals = vec![vec![BigInt::zero(); self.s()]; self.p()];
        for (j, &cluster) in part.assignment().iter().enumerate() {
            let w = self.weight_of(j);
            for f in 0..self.s() {
                totals[cluster][f] += w.get(f, cluster);
            }
        }
        Ok(totals)
    }

    /// Per-cluster utility sums: entry `i` = Σ over members of utility column
    /// `i`. Empty clusters yield zero vectors.
    pub fn utility_sums(&self, part: &Partition) -> Result<Vec<Vec<BigRational>>, ModelError> {
        part.check(self)?;
        let mut sums = vec![vec![BigRational::zero(); self.d()]; self.p()];
        for (j, &cluster) in part.assignment().iter().enumerate() {
            let c = &self.items[j].utility;
            for r in 0..self.d() {
                sums[cluster][r] += c.get(r, cluster);
            }
        }
        Ok(sums)
    }

    /// Utility sums flattened to one vector of length `d·p`, cluster-major —
    /// the projection space the objective acts on.
    pub fn stacked_utility_sums(&self, part: &Partition) -> Result<Vec<BigRational>, ModelError> {
        Ok(self.utility_sums(part)?.into_iter().flatten().collect())
    }

    /// Feasibility check with a full violation report.
    pub fn check_feasibility(&self, part: &Partition) -> Result<FeasibilityReport, ModelError> {
        let totals = self.feature_totals(part)?;
        let mut violations = Vec::new();
        for (i, b) in self.bounds.iter().enumerate() {
            for f in 0..self.s() {
                let t = &totals[i][f];
                if t < &b.lower[f] {
                    violations.push(Violation {
                        cluster: i,
                        feature: f,
                        kind: ViolationKind::BelowLower,
                        amount: &b.lower[f] - t,
                    });
                } else if t > &b.upper[f] {
                    violations.push(Violation {
                        cluster: i,
                        feature: f,
                        kind: ViolationKind::AboveUpper,
                        amount: t - &b.upper[f],
                    });
                }
            }
        }
        Ok(FeasibilityReport { violations })
    }

    pub fn is_feasible(&self, part: &Partition) -> bool {
        matches!(self.check_feasibility(part), Ok(r) if r.is_feasible())
    }
}

/// Assignment of each item to a cluster index in `0..p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Self {
        Self { assignment }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Items of one cluster, ascending.
    pub fn cluster(&self, i: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&j| self.assignment[j] == i).collect()
    }

    pub fn check(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.assignment.len() != inst.n() {
            return Err(ModelError::PartitionLength { got: self.assignment.len(), n: inst.n() });
        }
        for (j, &c) in self.assignment.iter().enumerate() {
            if c >= inst.p() {
                return Err(ModelError::ClusterRange { item: j, cluster: c, p: inst.p() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    BelowLower,
    AboveUpper,
}

/// One bound violation: how far a cluster's feature total strays outside its
/// interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub cluster: usize,
    pub feature: usize,
    pub kind: ViolationKind,
    /// Positive magnitude of the deficit/excess.
    pub amount: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "feasible");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            let what = match v.kind {
                ViolationKind::BelowLower => "deficit",
                ViolationKind::AboveUpper => "excess",
            };
            write!(f, "cluster {}, feature {}: {} {}", v.cluster, v.feature, what, v.amount)?;
        }
        Ok(())
    }
}
