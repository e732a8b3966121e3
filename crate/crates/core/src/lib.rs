//! Exact solver for weight-balanced partitioning problems.
//!
//! The library distributes `n` weighted items over `p` clusters so that the
//! per-cluster feature totals stay inside prescribed bounds, while maximizing
//! a (possibly convex composite) objective over the cluster utility sums.
//! Three model variants are supported:
//!
//! * `p1` — exact totals, a single feature per item,
//! * `p2` — lower/upper bounded totals, a single feature,
//! * `p3` — lower/upper bounded totals, feature vectors.
//!
//! Each variant is rewritten as an n-fold integer program (a block-structured
//! equality system over 0/1 assignment variables plus slack columns), which is
//! then optimized by Graver-basis augmentation: starting from any feasible
//! point, repeatedly apply the best augmenting step drawn from the Graver
//! basis of the constraint matrix until no step improves the objective.
//! Convex objectives reduce to a family of linear probes built from the
//! projected edge directions of the feasible set.
//!
//! All arithmetic is exact: integers are [`num_bigint::BigInt`], ratios are
//! [`num_rational::BigRational`]. No floating point enters any solve path.
//!
//! The [`land`] module applies the machinery to a concrete planning task:
//! re-allocating agricultural lots among farmers so that everybody keeps
//! roughly the total acreage (and other lot features) they brought in, while
//! the lots end up close to their new owners' farmsteads.

pub mod augment;
pub mod brute;
pub mod convex;
pub mod fileio;
pub mod graver;
pub mod land;
pub mod matrix;
pub mod model;
pub mod nfold;
pub mod num;

pub use augment::{solve_linear, AugmentConfig, AugmentationTrace};
pub use convex::{solve_convex, ConvexConfig, ObjectiveSpec};
pub use graver::{graver_basis, graver_oracle, GraverBasis, GraverCache, GraverConfig};
pub use matrix::{IntMatrix, RatMatrix};
pub use model::{ClusterBounds, Instance, Item, Partition, WeightDomain};
pub use nfold::NFoldSystem;

use std::sync::Arc;

/// Shared solver state: configuration caps plus the Graver-basis cache.
///
/// Bases depend only on the effective constraint matrix, so one context can be
/// reused across many solves; repeated solves of systems with the same block
/// data hit the cache.
#[derive(Debug, Default)]
pub struct SolveContext {
    pub graver: GraverConfig,
    pub augment: AugmentConfig,
    pub convex: ConvexConfig,
    cache: GraverCache,
}

impl SolveContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graver basis of the system's effective (pinned-column-free) matrix,
    /// computed on first use and cached afterwards.
    pub fn basis_for(
        &self,
        sys: &nfold::NFoldSystem,
    ) -> Result<Arc<GraverBasis>, graver::GraverError> {
        self.cache.get_or_compute(&sys.reduced_matrix(), &self.graver)
    }
}
