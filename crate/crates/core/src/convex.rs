//! Convex objectives over the projected solution polytope.
//!
//! A convex function of the projection `y = C·x` attains its maximum at a
//! vertex of `P = conv{C·x : x feasible}`. Every edge of `P` is the image of
//! an edge of the fiber polytope, and those are parallel to test-set
//! elements; so the projected test set gives a finite list of directions
//! containing every edge direction of `P`.
//!
//! For a weight vector `λ` that lies on none of the central hyperplanes
//! `{y : g·y = 0}` (one per projected direction `g`), maximizing the linear
//! functional `λᵀ(C·x)` has a unique optimal *projection*, a vertex of `P`;
//! and as `λ` ranges over one representative per full-dimensional cell of
//! the hyperplane arrangement, every vertex of `P` is hit. Solving one
//! linear problem per representative and keeping the best candidate under
//! the convex objective is therefore exact.
//!
//! Representatives are constructed combinatorially, not numerically:
//! dimension 1 is `{±1}`; in dimension 2 the rays orthogonal to the normals
//! are sorted by angle and consecutive rays are summed; in dimension 3 each
//! plane's induced line arrangement is solved in 2-d and its cell witnesses
//! are pushed off the plane by an exact `ε` small enough to preserve all
//! other signs. Projected dimensions above 3 are rejected.

use crate::augment::{solve_linear, AugmentConfig, AugmentError, AugmentationTrace};
use crate::graver::GraverBasis;
use crate::nfold::NFoldSystem;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvexError {
    #[error("projected dimension {c} exceeds the supported cap of {max}; reduce d·p or use a linear objective")]
    DimensionTooLarge { c: usize, max: usize },
    #[error("{count} arrangement hyperplanes exceed the cap of {cap}")]
    TooManyHyperplanes { count: usize, cap: usize },
    #[error("objective weight vector has length {got}, expected {want}")]
    WeightLength { got: usize, want: usize },
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

/// Inner norm applied to each cluster's utility-sum chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerNorm {
    L1,
    L2Squared,
    LInf,
}

/// Outer combination across clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterNorm {
    L1,
    LInf,
}

impl InnerNorm {
    fn apply(self, chunk: &[BigRational]) -> BigRational {
        match self {
            InnerNorm::L1 => chunk.iter().map(Signed::abs).sum(),
            InnerNorm::L2Squared => chunk.iter().map(|v| v * v).sum(),
            InnerNorm::LInf => chunk.iter().map(Signed::abs).max().unwrap_or_else(BigRational::zero),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InnerNorm::L1 => "l1",
            InnerNorm::L2Squared => "l2_squared",
            InnerNorm::LInf => "linf",
        }
    }
}

impl OuterNorm {
    fn apply(self, values: impl Iterator<Item = BigRational>) -> BigRational {
        match self {
            OuterNorm::L1 => values.sum(),
            OuterNorm::LInf => values.max().unwrap_or_else(BigRational::zero),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OuterNorm::L1 => "l1",
            OuterNorm::LInf => "linf",
        }
    }
}

/// What to optimize over the projection `y = C·x`.
#[derive(Clone)]
pub enum ObjectiveSpec {
    /// `wᵀy`; always exact via a single augmentation run.
    Linear { weights: Vec<BigRational> },
    /// Outer norm over per-cluster inner norms of consecutive `chunk`-sized
    /// pieces of `y`. Convex, so the cell-probing path is exact.
    ClusteringBody { inner: InnerNorm, outer: OuterNorm, chunk: usize },
    /// Arbitrary comparison oracle on projections. The probing path only
    /// guarantees optimality when the induced objective is convex.
    Custom {
        name: String,
        compare: Arc<dyn Fn(&[BigRational], &[BigRational]) -> Ordering + Send + Sync>,
    },
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveSpec::Linear { weights } => {
                f.debug_struct("Linear").field("weights", weights).finish()
            }
            ObjectiveSpec::ClusteringBody { inner, outer, chunk } => f
                .debug_struct("ClusteringBody")
                .field("inner", inner)
                .field("outer", outer)
                .field("chunk", chunk)
                .finish(),
            ObjectiveSpec::Custom { name, .. } => {
                f.debug_struct("Custom").field("name", name).finish()
            }
        }
    }
}

impl ObjectiveSpec {
    pub fn linear(weights: Vec<BigRational>) -> Self {
        ObjectiveSpec::Linear { weights }
    }

    /// All-ones linear objective of the given length.
    pub fn linear_ones(len: usize) -> Self {
        ObjectiveSpec::Linear { weights: vec![BigRational::one(); len] }
    }

    pub fn clustering_body(inner: InnerNorm, outer: OuterNorm, chunk: usize) -> Self {
        assert!(chunk > 0, "chunk size must be positive");
        ObjectiveSpec::ClusteringBody { inner, outer, chunk }
    }

    pub fn custom<F>(name: impl Into<String>, compare: F) -> Self
    where
        F: Fn(&[BigRational], &[BigRational]) -> Ordering + Send + Sync + 'static,
    {
        ObjectiveSpec::Custom { name: name.into(), compare: Arc::new(compare) }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ObjectiveSpec::Linear { .. })
    }

    pub fn name(&self) -> String {
        match self {
            ObjectiveSpec::Linear { .. } => "linear".into(),
            ObjectiveSpec::ClusteringBody { inner, outer, .. } => {
                format!("clustering_body({},{})", inner.name(), outer.name())
            }
            ObjectiveSpec::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// Numeric value of the objective on a projection, when one exists
    /// (custom oracles only order, they do not score).
    pub fn evaluate(&self, y: &[BigRational]) -> Option<BigRational> {
        match self {
            ObjectiveSpec::Linear { weights } => {
                assert_eq!(weights.len(), y.len(), "projection length mismatch");
                Some(weights.iter().zip(y).map(|(w, v)| w * v).sum())
            }
            ObjectiveSpec::ClusteringBody { inner, outer, chunk } => {
                assert_eq!(y.len() % chunk, 0, "projection not chunk-aligned");
                Some(outer.apply(y.chunks(*chunk).map(|c| inner.apply(c))))
            }
            ObjectiveSpec::Custom { .. } => None,
        }
    }

    /// Order two projections by objective; greater means better.
    pub fn compare(&self, a: &[BigRational], b: &[BigRational]) -> Ordering {
        match self {
            ObjectiveSpec::Custom { compare, .. } => compare(a, b),
            _ => self.evaluate(a).unwrap().cmp(&self.evaluate(b).unwrap()),
        }
    }
}

/// Divide by the gcd of the entries; `None` for the zero vector.
pub fn primitive(v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut g = BigInt::zero();
    for e in v {
        g = g.gcd(e);
    }
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|e| e / &g).collect())
}

/// Clear denominators and reduce to a primitive integer vector; `None` for
/// zero.
pub fn rational_to_primitive(v: &[BigRational]) -> Option<Vec<BigInt>> {
    let mut scale = BigInt::one();
    for e in v {
        scale = scale.lcm(e.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|e| (e * BigRational::from(scale.clone())).to_integer()).collect();
    primitive(&ints)
}

/// Primitive with the first nonzero entry positive — a canonical form for a
/// line through the origin.
fn canonical_line(v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut p = primitive(v)?;
    if let Some(first) = p.iter().find(|e| !e.is_zero()) {
        if first.is_negative() {
            for e in &mut p {
                *e = -std::mem::take(e);
            }
        }
    }
    Some(p)
}

/// Projections of the test set: primitive integer directions, lex sorted and
/// deduplicated. Contains every edge direction of the projection polytope
/// (and is symmetric under negation, since the basis is).
pub fn projected_edge_directions(sys: &NFoldSystem, basis: &GraverBasis) -> Vec<Vec<BigInt>> {
    let cobj = sys.reduced_objective();
    let mut dirs: Vec<Vec<BigInt>> = basis
        .vectors()
        .iter()
        .filter_map(|g| rational_to_primitive(&cobj.mul_int_vec(g)))
        .collect();
    dirs.sort_unstable();
    dirs.dedup();
    dirs
}

#[derive(Debug, Clone)]
pub struct ConvexConfig {
    /// Largest projected dimension handled by cell enumeration.
    pub max_projection_dim: usize,
    /// Cap on distinct arrangement hyperplanes.
    pub max_hyperplanes: usize,
}

impl Default for ConvexConfig {
    fn default() -> Self {
        Self { max_projection_dim: 3, max_hyperplanes: 4096 }
    }
}

/// One weight vector per full-dimensional cell of the central arrangement
/// with the given normals, in a deterministic order. Each representative has
/// a nonzero dot product with every normal.
pub fn test_directions(
    directions: &[Vec<BigInt>],
    c: usize,
    cfg: &ConvexConfig,
) -> Result<Vec<Vec<BigRational>>, ConvexError> {
    assert!(c >= 1, "projection dimension must be positive");
    if c > cfg.max_projection_dim || c > 3 {
        return Err(ConvexError::DimensionTooLarge {
            c,
            max: cfg.max_projection_dim.min(3),
        });
    }
    if c == 1 {
        return Ok(vec![vec![BigRational::one()], vec![-BigRational::one()]]);
    }
    let mut normals: Vec<Vec<BigInt>> = directions
        .iter()
        .inspect(|d| assert_eq!(d.len(), c, "direction length mismatch"))
        .filter_map(|d| canonical_line(d))
        .collect();
    normals.sort_unstable();
    normals.dedup();
    if normals.len() > cfg.max_hyperplanes {
        return Err(ConvexError::TooManyHyperplanes { count: normals.len(), cap: cfg.max_hyperplanes });
    }
    if normals.is_empty() {
        // No constraints: the objective is constant along every move, any
        // probe works.
        let mut e1 = vec![BigRational::zero(); c];
        e1[0] = BigRational::one();
        let mut m = e1.clone();
        m[0] = -BigRational::one();
        return Ok(vec![e1, m]);
    }
    Ok(match c {
        2 => {
            let n2: Vec<[BigInt; 2]> =
                normals.iter().map(|n| [n[0].clone(), n[1].clone()]).collect();
            cells_2d(&n2)
                .into_iter()
                .map(|r| r.into_iter().map(BigRational::from).collect())
                .collect()
        }
        3 => cells_3d(&normals),
        _ => unreachable!(),
    })
}

fn cross2(a: &[BigInt; 2], b: &[BigInt; 2]) -> BigInt {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Strict counterclockwise angular order starting at the positive x-axis.
fn angle_cmp(a: &[BigInt; 2], b: &[BigInt; 2]) -> Ordering {
    let half = |v: &[BigInt; 2]| -> u8 {
        if v[1].is_positive() || (v[1].is_zero() && v[0].is_positive()) {
            0
        } else {
            1
        }
    };
    half(a).cmp(&half(b)).then_with(|| {
        let cr = cross2(a, b);
        if cr.is_positive() {
            Ordering::Less
        } else if cr.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}

/// Interior ray per full-dimensional cell of a central line arrangement.
/// Normals must be pairwise non-collinear (canonicalized and deduplicated).
fn cells_2d(normals: &[[BigInt; 2]]) -> Vec<[BigInt; 2]> {
    match normals.len() {
        0 => {
            return vec![
                [BigInt::one(), BigInt::zero()],
                [-BigInt::one(), BigInt::zero()],
            ]
        }
        1 => {
            // Two half-planes; the normal itself points into one of them.
            let n = &normals[0];
            return vec![[n[0].clone(), n[1].clone()], [-&n[0], -&n[1]]];
        }
        _ => {}
    }
    // Boundary rays of the sectors: both orientations of each line's
    // direction, sorted by angle. With at least two distinct lines each
    // angular gap is strictly below π, so the sum of two consecutive rays is
    // a ray strictly inside the sector between them.
    let mut rays: Vec<[BigInt; 2]> = Vec::with_capacity(2 * normals.len());
    for n in normals {
        let t = [-&n[1], n[0].clone()];
        rays.push([-&t[0], -&t[1]]);
        rays.push(t);
    }
    rays.sort_unstable_by(angle_cmp);
    rays.dedup();
    let k = rays.len();
    (0..k)
        .map(|i| {
            let u = &rays[i];
            let v = &rays[(i + 1) % k];
            [&u[0] + &v[0], &u[1] + &v[1]]
        })
        .collect()
}

fn cross3(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot3(a: &[BigInt], b: &[BigInt]) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

/// Interior point per full-dimensional cell of a central plane arrangement
/// in dimension 3 (normals canonicalized, deduplicated, at least two).
///
/// Every full-dimensional cell has a facet on some plane `i`, and that
/// facet's relative interior is a cell of the line arrangement the other
/// planes induce on plane `i`. So: for each plane, solve the induced 2-d
/// problem in an integer basis of the plane, lift the witnesses, and nudge
/// them off the plane both ways by an `ε` small enough to keep every other
/// plane's sign. Deduplicating by sign vector leaves one witness per cell.
fn cells_3d(normals: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    if normals.len() == 1 {
        let n: Vec<BigRational> = normals[0].iter().cloned().map(BigRational::from).collect();
        let m = n.iter().map(|v| -v).collect();
        return vec![n, m];
    }
    let mut by_sign: BTreeMap<Vec<i8>, Vec<BigRational>> = BTreeMap::new();
    for (i, e) in normals.iter().enumerate() {
        // Integer basis (u, v) of the plane e·y = 0: cross e with the axis
        // where e is smallest in absolute value (never parallel to e).
        let axis = (0..3).min_by_key(|&a| e[a].abs()).unwrap();
        let mut h = vec![BigInt::zero(); 3];
        h[axis] = BigInt::one();
        let u = cross3(e, &h);
        debug_assert!(!u.iter().all(Zero::is_zero));
        let v = cross3(e, &u);

        let mut induced: Vec<[BigInt; 2]> = Vec::new();
        for (j, ej) in normals.iter().enumerate() {
            if j == i {
                continue;
            }
            let a = dot3(ej, &u);
            let b = dot3(ej, &v);
            // Distinct central planes are non-parallel, so the trace of
            // plane j on plane i is a genuine line.
            let line = canonical_line(&[a, b]).expect("parallel planes after dedup");
            induced.push([line[0].clone(), line[1].clone()]);
        }
        induced.sort_unstable();
        induced.dedup();

        for r in cells_2d(&induced) {
            // Lift the 2-d witness into the plane.
            let w: Vec<BigInt> = (0..3).map(|k| &r[0] * &u[k] + &r[1] * &v[k]).collect();
            // ε keeps |ε·(ej·e)| < |ej·w| for all other planes.
            let mut num: Option<BigInt> = None;
            let mut den = BigInt::one();
            for (j, ej) in normals.iter().enumerate() {
                if j == i {
                    continue;
                }
                let along = dot3(ej, &w).abs();
                debug_assert!(!along.is_zero(), "witness landed on another plane");
                if num.as_ref().map_or(true, |n| along < *n) {
                    num = Some(along);
                }
                let tilt = dot3(ej, e).abs() + BigInt::one();
                if tilt > den {
                    den = tilt;
                }
            }
            let eps = BigRational::new(num.expect("at least two planes"), den);
            for sign in [BigInt::one(), -BigInt::one()] {
                let y: Vec<BigRational> = (0..3)
                    .map(|k| {
                        BigRational::from(w[k].clone())
                            + &eps * BigRational::from(&sign * &e[k])
                    })
                    .collect();
                let pattern: Vec<i8> = normals
                    .iter()
                    .map(|n| {
                        let d: BigRational = n
                            .iter()
                            .zip(&y)
                            .map(|(a, b)| BigRational::from(a.clone()) * b)
                            .sum();
                        debug_assert!(!d.is_zero(), "representative on a hyperplane");
                        if d.is_positive() {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                by_sign.entry(pattern).or_insert(y);
            }
        }
    }
    by_sign.into_values().collect()
}

#[derive(Debug, Clone)]
pub struct ConvexSolution {
    pub x: Vec<BigInt>,
    /// `C·x` of the winner.
    pub projection: Vec<BigRational>,
    /// Objective value when the spec can score (linear and clustering-body).
    pub value: Option<BigRational>,
    /// Augmentation trace of the winning probe.
    pub trace: AugmentationTrace,
    /// Number of probe directions solved (0 on the direct linear path).
    pub lambda_count: usize,
    /// Accepted augmentation steps summed over all probes.
    pub total_steps: usize,
}

/// Maximize a convex objective of the projection over the system's fiber.
///
/// Linear specs run a single augmentation; otherwise one linear probe per
/// arrangement cell, keeping the best projection under the spec's order.
/// Probes run in parallel when a thread pool is available; the winner is
/// selected sequentially, so results do not depend on thread count.
pub fn solve_convex(
    sys: &NFoldSystem,
    x0: &[BigInt],
    spec: &ObjectiveSpec,
    basis: &GraverBasis,
    aug: &AugmentConfig,
    cfg: &ConvexConfig,
) -> Result<ConvexSolution, ConvexError> {
    let c = sys.objective_rows();
    if let ObjectiveSpec::Linear { weights } = spec {
        if weights.len() != c {
            return Err(ConvexError::WeightLength { got: weights.len(), want: c });
        }
        let sol = solve_linear(sys, x0, weights, basis, aug)?;
        let projection = sys.objective_matrix().mul_int_vec(&sol.x);
        let steps = sol.trace.len();
        return Ok(ConvexSolution {
            x: sol.x,
            value: spec.evaluate(&projection),
            projection,
            trace: sol.trace,
            lambda_count: 0,
            total_steps: steps,
        });
    }

    let dirs = projected_edge_directions(sys, basis);
    let lambdas = test_directions(&dirs, c, cfg)?;
    let lambda_count = lambdas.len();

    let probes: Vec<Result<crate::augment::LinearSolution, AugmentError>> = lambdas
        .into_par_iter()
        .map(|w| solve_linear(sys, x0, &w, basis, aug))
        .collect();

    // Candidate 0 is the start point itself; it covers the no-directions
    // case and ties are broken toward earlier candidates.
    let mut best_x = x0.to_vec();
    let mut best_y = sys.objective_matrix().mul_int_vec(x0);
    let mut best_trace = AugmentationTrace {
        start_objective: BigRational::zero(),
        final_objective: BigRational::zero(),
        steps: Vec::new(),
    };
    let mut total_steps = 0usize;
    for sol in probes {
        let sol = sol?;
        total_steps += sol.trace.len();
        let y = sys.objective_matrix().mul_int_vec(&sol.x);
        if spec.compare(&y, &best_y) == Ordering::Greater {
            best_x = sol.x;
            best_y = y;
            best_trace = sol.trace;
        }
    }
    Ok(ConvexSolution {
        x: best_x,
        value: spec.evaluate(&best_y),
        projection: best_y,
        trace: best_trace,
        lambda_count,
        total_steps,
    })
}
