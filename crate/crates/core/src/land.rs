//! Land-consolidation layer: farmers, lots, the f1/f2/f3 objectives, the
//! end-to-end consolidation routine, and a seeded instance generator.
//!
//! A lot is a point `z_j` with a positive size `ω_j` and a feature matrix
//! `W^j` whose column `i` is what farmer `i`'s totals gain when the lot goes
//! to them; one designated row of every `W^j` is the size row, equal to
//! `ω_j` in all columns. A farmer is a farmstead `v_i`, stated totals `B_i`,
//! and a per-feature tolerance `(δ⁻, δ⁺)` from which hard bounds are derived
//! by rounding inward: `B⁻ = ceil((1−δ⁻)B)`, `B⁺ = floor((1+δ⁺)B)` — never
//! looser than what the farmer agreed to.
//!
//! Objectives (all minimized, as weighted squared travel distances):
//!
//! * `f1 = Σ_i Σ_{j∈π_i} ω_j‖v_i−z_j‖²` — linear in the assignment.
//! * `f3 = Σ_i (1/κ_i) Σ_{j∈π_i} ω_j‖v_i−z_j‖²` — linear once `κ_i`, the
//!   farmer's *original* total size, is fixed.
//! * `f2 = Σ_i (Σ_{j∈π_i} ω_j‖v_i−z_j‖²)/(Σ_{j∈π_i} ω_j)` — the true
//!   average-distance objective; a ratio of assignment-linear terms, not
//!   convex, so it is evaluated but never optimized directly.
//!
//! Because every feasible partition keeps farmer `i`'s size between `κ_i^-`
//! and `κ_i^+`, an exact `f3` minimizer is a
//! `(max_i κ_i/κ_i^-)(max_i κ_i^+/κ_i)`-approximation of the best `f2`
//! value; [`approximation_factor`] computes that certificate.

use crate::augment::{solve_linear, AugmentError, AugmentationTrace};
use crate::brute::{enumerate_feasible, BruteConfig, BruteError};
use crate::convex::ObjectiveSpec;
use crate::graver::GraverError;
use crate::matrix::{IntMatrix, RatMatrix};
use crate::model::{ClusterBounds, Instance, Item, ModelError, Partition, WeightDomain};
use crate::nfold::{BuildError, EncodeError, NFoldSystem, SlackRecord};
use crate::num::{ceil_int, floor_int};
use crate::SolveContext;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LandError {
    #[error("instance needs at least one lot")]
    NoLots,
    #[error("instance needs at least one farmer")]
    NoFarmers,
    #[error("size feature row {row} out of range for s = {s}")]
    SizeRowRange { row: usize, s: usize },
    #[error("weight domain has shape {ds}×{dp}, instance expects {s}×{p}")]
    DomainShape { ds: usize, dp: usize, s: usize, p: usize },
    #[error("lot {lot}: weight index out of range")]
    WeightIndexRange { lot: usize },
    #[error("lot {lot}: size must be positive")]
    NonPositiveSize { lot: usize },
    #[error("lot {lot}: size row of its weight matrix must equal the lot size in every column")]
    SizeRowMismatch { lot: usize },
    #[error("farmer {farmer}: totals must have one entry per feature")]
    TotalsLength { farmer: usize },
    #[error("farmer {farmer}: deviation vectors must have one entry per feature")]
    DeviationLength { farmer: usize },
    #[error("farmer {farmer}, feature {feature}: deviation must be nonnegative")]
    NegativeDeviation { farmer: usize, feature: usize },
    #[error("farmer {farmer}, feature {feature}: derived bounds are inverted")]
    InvertedBounds { farmer: usize, feature: usize },
    #[error("original assignment lists {got} lots, instance has {want}")]
    OriginalLength { got: usize, want: usize },
    #[error("original assignment sends lot {lot} to a nonexistent farmer")]
    OriginalClusterRange { lot: usize },
    #[error("farmer {farmer} holds no land in the original distribution")]
    ZeroKappa { farmer: usize },
    #[error("original distribution violates the derived bounds for farmer {farmer}, feature {feature}")]
    OriginalInfeasible { farmer: usize, feature: usize },
    #[error("farmer {farmer}: cluster has zero total size but a nonzero distance term")]
    ZeroSizeCluster { farmer: usize },
    #[error("farmer {farmer}: lower size bound must be positive for the certificate")]
    KappaBoundNonPositive { farmer: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lot {
    pub id: usize,
    pub location: (BigRational, BigRational),
    pub size: BigInt,
    /// Index of this lot's feature matrix in the weight domain.
    pub weight_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Farmer {
    pub id: usize,
    pub farmstead: (BigRational, BigRational),
    /// Stated totals `B_i`, one per feature.
    pub totals: Vec<BigInt>,
    pub deviation_lower: Vec<BigRational>,
    pub deviation_upper: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandInstance {
    s: usize,
    size_feature_row: usize,
    domain: WeightDomain,
    lots: Vec<Lot>,
    farmers: Vec<Farmer>,
    original: Partition,
    kappa: Vec<BigInt>,
    lower_bounds: Vec<Vec<BigInt>>,
    upper_bounds: Vec<Vec<BigInt>>,
}

impl LandInstance {
    pub fn new(
        size_feature_row: usize,
        domain: WeightDomain,
        lots: Vec<Lot>,
        farmers: Vec<Farmer>,
        original: Partition,
    ) -> Result<Self, LandError> {
        if lots.is_empty() {
            return Err(LandError::NoLots);
        }
        if farmers.is_empty() {
            return Err(LandError::NoFarmers);
        }
        let (s, p) = (domain.s(), domain.p());
        if farmers.len() != p || domain.s() != s {
            return Err(LandError::DomainShape { ds: domain.s(), dp: domain.p(), s, p: farmers.len() });
        }
        if size_feature_row >= s {
            return Err(LandError::SizeRowRange { row: size_feature_row, s });
        }
        for (j, lot) in lots.iter().enumerate() {
            if lot.weight_index >= domain.len() {
                return Err(LandError::WeightIndexRange { lot: j });
            }
            if !lot.size.is_positive() {
                return Err(LandError::NonPositiveSize { lot: j });
            }
            let w = domain.entry(lot.weight_index);
            if (0..p).any(|i| w.get(size_feature_row, i) != &lot.size) {
                return Err(LandError::SizeRowMismatch { lot: j });
            }
        }
        for (i, farmer) in farmers.iter().enumerate() {
            if farmer.totals.len() != s {
                return Err(LandError::TotalsLength { farmer: i });
            }
            if farmer.deviation_lower.len() != s || farmer.deviation_upper.len() != s {
                return Err(LandError::DeviationLength { farmer: i });
            }
            for f in 0..s {
                if farmer.deviation_lower[f].is_negative() || farmer.deviation_upper[f].is_negative()
                {
                    return Err(LandError::NegativeDeviation { farmer: i, feature: f });
                }
            }
        }
        if original.assignment().len() != lots.len() {
            return Err(LandError::OriginalLength {
                got: original.assignment().len(),
                want: lots.len(),
            });
        }
        if let Some(j) = original.assignment().iter().position(|&i| i >= p) {
            return Err(LandError::OriginalClusterRange { lot: j });
        }

        // Inward-rounded bounds.
        let mut lower_bounds = Vec::with_capacity(p);
        let mut upper_bounds = Vec::with_capacity(p);
        for (i, farmer) in farmers.iter().enumerate() {
            let mut lo = Vec::with_capacity(s);
            let mut hi = Vec::with_capacity(s);
            for f in 0..s {
                let b = BigRational::from(farmer.totals[f].clone());
                let l = ceil_int(&((BigRational::one() - &farmer.deviation_lower[f]) * &b));
                let u = floor_int(&((BigRational::one() + &farmer.deviation_upper[f]) * &b));
                if l > u {
                    return Err(LandError::InvertedBounds { farmer: i, feature: f });
                }
                lo.push(l);
                hi.push(u);
            }
            lower_bounds.push(lo);
            upper_bounds.push(hi);
        }

        // Original sizes κ_i and feasibility of the original distribution.
        let mut kappa = vec![BigInt::zero(); p];
        let mut totals = vec![vec![BigInt::zero(); s]; p];
        for (j, &i) in original.assignment().iter().enumerate() {
            kappa[i] += &lots[j].size;
            let w = domain.entry(lots[j].weight_index);
            for f in 0..s {
                totals[i][f] += w.get(f, i);
            }
        }
        if let Some(i) = kappa.iter().position(|k| !k.is_positive()) {
            return Err(LandError::ZeroKappa { farmer: i });
        }
        for i in 0..p {
            for f in 0..s {
                if totals[i][f] < lower_bounds[i][f] || totals[i][f] > upper_bounds[i][f] {
                    return Err(LandError::OriginalInfeasible { farmer: i, feature: f });
                }
            }
        }

        Ok(Self {
            s,
            size_feature_row,
            domain,
            lots,
            farmers,
            original,
            kappa,
            lower_bounds,
            upper_bounds,
        })
    }

    /// Build from per-lot matrices, deduplicating them into a weight domain
    /// in order of first appearance.
    pub fn from_lot_matrices(
        size_feature_row: usize,
        lot_data: Vec<(usize, (BigRational, BigRational), BigInt, IntMatrix)>,
        farmers: Vec<Farmer>,
        original: Partition,
    ) -> Result<Self, LandError> {
        if lot_data.is_empty() {
            return Err(LandError::NoLots);
        }
        let mut entries: Vec<IntMatrix> = Vec::new();
        let mut lots = Vec::with_capacity(lot_data.len());
        for (id, location, size, w) in lot_data {
            let weight_index = match entries.iter().position(|e| *e == w) {
                Some(k) => k,
                None => {
                    entries.push(w);
                    entries.len() - 1
                }
            };
            lots.push(Lot { id, location, size, weight_index });
        }
        let s = entries.first().map_or(0, IntMatrix::rows);
        let p = farmers.len();
        let domain = WeightDomain::new(s, p, entries)?;
        Self::new(size_feature_row, domain, lots, farmers, original)
    }

    pub fn n(&self) -> usize {
        self.lots.len()
    }

    pub fn p(&self) -> usize {
        self.farmers.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn size_feature_row(&self) -> usize {
        self.size_feature_row
    }

    pub fn domain(&self) -> &WeightDomain {
        &self.domain
    }

    pub fn lots(&self) -> &[Lot] {
        &self.lots
    }

    pub fn farmers(&self) -> &[Farmer] {
        &self.farmers
    }

    pub fn original(&self) -> &Partition {
        &self.original
    }

    /// Original total size of farmer `i`.
    pub fn kappa(&self) -> &[BigInt] {
        &self.kappa
    }

    /// Derived lower bounds `B_i^-` per farmer.
    pub fn lower_bounds(&self) -> &[Vec<BigInt>] {
        &self.lower_bounds
    }

    pub fn upper_bounds(&self) -> &[Vec<BigInt>] {
        &self.upper_bounds
    }

    /// Size-feature bound `κ_i^-`.
    pub fn kappa_lower(&self, i: usize) -> &BigInt {
        &self.lower_bounds[i][self.size_feature_row]
    }

    pub fn kappa_upper(&self, i: usize) -> &BigInt {
        &self.upper_bounds[i][self.size_feature_row]
    }

    /// Total bit size of the numeric payload; diagnostic only.
    pub fn input_bits(&self) -> u64 {
        let rat_bits = |r: &BigRational| r.numer().bits() + r.denom().bits();
        let mut bits = 0u64;
        for lot in &self.lots {
            bits += rat_bits(&lot.location.0) + rat_bits(&lot.location.1) + lot.size.bits();
        }
        for w in 0..self.domain.len() {
            let m = self.domain.entry(w);
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    bits += m.get(r, c).bits().max(1);
                }
            }
        }
        for farmer in &self.farmers {
            bits += rat_bits(&farmer.farmstead.0) + rat_bits(&farmer.farmstead.1);
            bits += farmer.totals.iter().map(|t| t.bits().max(1)).sum::<u64>();
            bits += farmer.deviation_lower.iter().map(&rat_bits).sum::<u64>();
            bits += farmer.deviation_upper.iter().map(&rat_bits).sum::<u64>();
        }
        bits + self.lots.len() as u64
    }
}

fn dist2(a: &(BigRational, BigRational), b: &(BigRational, BigRational)) -> BigRational {
    let dx = &a.0 - &b.0;
    let dy = &a.1 - &b.1;
    &dx * &dx + &dy * &dy
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandObjective {
    F1,
    F3,
}

impl LandObjective {
    pub fn name(self) -> &'static str {
        match self {
            LandObjective::F1 => "f1",
            LandObjective::F3 => "f3",
        }
    }
}

/// Per-lot utility rows for `f1`: column `i` is `−ω_j‖v_i−z_j‖²`, so
/// maximizing the all-ones linear objective minimizes `f1`.
pub fn objective_f1(li: &LandInstance) -> (Vec<RatMatrix>, ObjectiveSpec) {
    let p = li.p();
    let utilities = li
        .lots
        .iter()
        .map(|lot| {
            let size = BigRational::from(lot.size.clone());
            RatMatrix::from_rows(vec![li
                .farmers
                .iter()
                .map(|farmer| -(&size * dist2(&farmer.farmstead, &lot.location)))
                .collect()])
        })
        .collect();
    (utilities, ObjectiveSpec::linear_ones(p))
}

/// As `objective_f1` with column `i` scaled by `1/κ_i`; minimizes `f3`.
pub fn objective_f3(li: &LandInstance) -> (Vec<RatMatrix>, ObjectiveSpec) {
    let p = li.p();
    let utilities = li
        .lots
        .iter()
        .map(|lot| {
            RatMatrix::from_rows(vec![li
                .farmers
                .iter()
                .zip(&li.kappa)
                .map(|(farmer, kappa)| {
                    let scale = BigRational::new(lot.size.clone(), kappa.clone());
                    -(scale * dist2(&farmer.farmstead, &lot.location))
                })
                .collect()])
        })
        .collect();
    (utilities, ObjectiveSpec::linear_ones(p))
}

/// Assemble the solver instance for `f1` or `f3` with the derived bounds.
pub fn to_instance(li: &LandInstance, objective: LandObjective) -> Result<Instance, LandError> {
    let (utilities, spec) = match objective {
        LandObjective::F1 => objective_f1(li),
        LandObjective::F3 => objective_f3(li),
    };
    let items = li
        .lots
        .iter()
        .zip(utilities)
        .map(|(lot, utility)| Item { id: lot.id, weight_index: lot.weight_index, utility })
        .collect();
    let bounds = li
        .lower_bounds
        .iter()
        .zip(&li.upper_bounds)
        .map(|(lo, hi)| ClusterBounds { lower: lo.clone(), upper: hi.clone() })
        .collect();
    Ok(Instance::new(li.domain.clone(), items, bounds, spec)?)
}

fn check_partition(li: &LandInstance, part: &Partition) -> Result<(), LandError> {
    if part.assignment().len() != li.n() {
        return Err(LandError::Model(ModelError::PartitionLength {
            got: part.assignment().len(),
            n: li.n(),
        }));
    }
    if let Some((j, &c)) = part.assignment().iter().enumerate().find(|&(_, &i)| i >= li.p()) {
        return Err(LandError::Model(ModelError::ClusterRange { item: j, cluster: c, p: li.p() }));
    }
    Ok(())
}

/// Exact `f1` value of a partition.
pub fn evaluate_f1(li: &LandInstance, part: &Partition) -> Result<BigRational, LandError> {
    check_partition(li, part)?;
    let mut sum = BigRational::zero();
    for (lot, &i) in li.lots.iter().zip(part.assignment()) {
        sum += BigRational::from(lot.size.clone()) * dist2(&li.farmers[i].farmstead, &lot.location);
    }
    Ok(sum)
}

/// Exact `f3` value of a partition (uses the original sizes `κ_i`).
pub fn evaluate_f3(li: &LandInstance, part: &Partition) -> Result<BigRational, LandError> {
    check_partition(li, part)?;
    let mut sum = BigRational::zero();
    for (lot, &i) in li.lots.iter().zip(part.assignment()) {
        sum += BigRational::new(lot.size.clone(), li.kappa[i].clone())
            * dist2(&li.farmers[i].farmstead, &lot.location);
    }
    Ok(sum)
}

/// Exact `f2` value: per farmer, weighted distance sum divided by realized
/// size. Empty clusters contribute zero.
pub fn evaluate_f2(li: &LandInstance, part: &Partition) -> Result<BigRational, LandError> {
    check_partition(li, part)?;
    let p = li.p();
    let mut num = vec![BigRational::zero(); p];
    let mut den = vec![BigInt::zero(); p];
    for (lot, &i) in li.lots.iter().zip(part.assignment()) {
        num[i] +=
            BigRational::from(lot.size.clone()) * dist2(&li.farmers[i].farmstead, &lot.location);
        den[i] += &lot.size;
    }
    let mut sum = BigRational::zero();
    for i in 0..p {
        if den[i].is_zero() {
            if !num[i].is_zero() {
                return Err(LandError::ZeroSizeCluster { farmer: i });
            }
            continue;
        }
        sum += &num[i] / BigRational::from(den[i].clone());
    }
    Ok(sum)
}

/// The certificate `(max_i κ_i/κ_i^-)·(max_i κ_i^+/κ_i)`: any exact `f3`
/// minimizer is within this factor of the best `f2` value.
pub fn approximation_factor(li: &LandInstance) -> Result<BigRational, LandError> {
    let mut left: Option<BigRational> = None;
    let mut right: Option<BigRational> = None;
    for i in 0..li.p() {
        if !li.kappa_lower(i).is_positive() {
            return Err(LandError::KappaBoundNonPositive { farmer: i });
        }
        let l = BigRational::new(li.kappa[i].clone(), li.kappa_lower(i).clone());
        let r = BigRational::new(li.kappa_upper(i).clone(), li.kappa[i].clone());
        if left.as_ref().map_or(true, |v| l > *v) {
            left = Some(l);
        }
        if right.as_ref().map_or(true, |v| r > *v) {
            right = Some(r);
        }
    }
    Ok(left.unwrap() * right.unwrap())
}

#[derive(Debug, Error)]
pub enum ConsolidationError {
    #[error(transparent)]
    Land(#[from] LandError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Graver(#[from] GraverError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

/// Per-farmer outcome: realized totals against the derived bounds, plus the
/// slack values read off the solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarmerReport {
    pub totals: Vec<BigInt>,
    pub lower: Vec<BigInt>,
    pub upper: Vec<BigInt>,
    pub slack_plus: Vec<BigInt>,
    pub slack_minus: Vec<BigInt>,
}

#[derive(Debug, Clone)]
pub struct ConsolidationOutcome {
    pub objective: LandObjective,
    pub partition: Partition,
    /// Minimized objective value (`f1` or `f3` of the final partition).
    pub value: BigRational,
    pub f2_value: BigRational,
    /// Lemma-style certificate; present for `f3` runs.
    pub approximation_factor: Option<BigRational>,
    pub per_farmer: Vec<FarmerReport>,
    pub trace: AugmentationTrace,
    pub input_bits: u64,
}

/// The consolidation pipeline: assemble the bounded model, lift the original
/// distribution, augment to optimality, and decode.
pub fn consolidate(
    li: &LandInstance,
    objective: LandObjective,
    ctx: &SolveContext,
) -> Result<ConsolidationOutcome, ConsolidationError> {
    let inst = to_instance(li, objective)?;
    let sys = NFoldSystem::build_p3(&inst)?;
    let x0 = sys.encode_assignment(&inst, li.original())?;
    let basis = ctx.basis_for(&sys)?;
    let weights = vec![BigRational::one(); sys.objective_rows()];
    let sol = solve_linear(&sys, &x0, &weights, &basis, &ctx.augment)?;
    let (partition, slacks) = sys.decode_solution(&sol.x).expect("solver output decodes");

    let value = match objective {
        LandObjective::F1 => evaluate_f1(li, &partition)?,
        LandObjective::F3 => evaluate_f3(li, &partition)?,
    };
    debug_assert_eq!(-&value, sol.value, "decoded value must match the solver's");
    let f2_value = evaluate_f2(li, &partition)?;
    let factor = match objective {
        LandObjective::F3 => Some(approximation_factor(li)?),
        LandObjective::F1 => None,
    };
    let per_farmer = farmer_reports(li, &partition, &slacks)?;
    Ok(ConsolidationOutcome {
        objective,
        partition,
        value,
        f2_value,
        approximation_factor: factor,
        per_farmer,
        trace: sol.trace,
        input_bits: li.input_bits(),
    })
}

/// Realized totals against bounds, with slack values, for any partition.
pub fn farmer_reports(
    li: &LandInstance,
    part: &Partition,
    slacks: &SlackRecord,
) -> Result<Vec<FarmerReport>, LandError> {
    check_partition(li, part)?;
    let (s, p) = (li.s(), li.p());
    let mut totals = vec![vec![BigInt::zero(); s]; p];
    for (lot, &i) in li.lots.iter().zip(part.assignment()) {
        let w = li.domain.entry(lot.weight_index);
        for f in 0..s {
            totals[i][f] += w.get(f, i);
        }
    }
    Ok((0..p)
        .map(|i| FarmerReport {
            totals: totals[i].clone(),
            lower: li.lower_bounds[i].clone(),
            upper: li.upper_bounds[i].clone(),
            slack_plus: slacks.plus.get(i).cloned().unwrap_or_default(),
            slack_minus: slacks.minus.get(i).cloned().unwrap_or_default(),
        })
        .collect())
}

#[derive(Debug, Error)]
pub enum LandBruteError {
    #[error(transparent)]
    Land(#[from] LandError),
    #[error(transparent)]
    Brute(#[from] BruteError),
}

/// Brute-force `f2` minimum over all feasible partitions; `None` when the
/// bounds admit none. Ties go to the lexicographically first assignment.
pub fn brute_f2_optimum(
    li: &LandInstance,
    cfg: &BruteConfig,
) -> Result<Option<(Partition, BigRational)>, LandBruteError> {
    brute_land_optimum(li, cfg, |li, part| evaluate_f2(li, part))
}

/// Brute-force `f3` minimum; an independent check of the solver path.
pub fn brute_f3_optimum(
    li: &LandInstance,
    cfg: &BruteConfig,
) -> Result<Option<(Partition, BigRational)>, LandBruteError> {
    brute_land_optimum(li, cfg, |li, part| evaluate_f3(li, part))
}

/// Brute-force `f1` minimum.
pub fn brute_f1_optimum(
    li: &LandInstance,
    cfg: &BruteConfig,
) -> Result<Option<(Partition, BigRational)>, LandBruteError> {
    brute_land_optimum(li, cfg, |li, part| evaluate_f1(li, part))
}

fn brute_land_optimum(
    li: &LandInstance,
    cfg: &BruteConfig,
    eval: impl Fn(&LandInstance, &Partition) -> Result<BigRational, LandError>,
) -> Result<Option<(Partition, BigRational)>, LandBruteError> {
    let inst = to_instance(li, LandObjective::F1)?;
    let mut best: Option<(Partition, BigRational)> = None;
    for part in enumerate_feasible(&inst, cfg)? {
        let v = eval(li, &part)?;
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((part, v));
        }
    }
    Ok(best)
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("{what} must be positive")]
    NonPositive { what: &'static str },
    #[error("need at least as many lots as farmers ({lots} < {farmers})")]
    TooFewLots { lots: usize, farmers: usize },
    #[error("deviation must lie in [0, 1)")]
    DeviationRange,
    #[error("could not draw {wanted} distinct lot categories of shape {s}×{p}")]
    CategoriesExhausted { wanted: usize, s: usize, p: usize },
    #[error(transparent)]
    Construction(#[from] LandError),
}

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub seed: u64,
    pub lots: usize,
    pub farmers: usize,
    pub features: usize,
    /// Number of distinct lot categories (weight matrices).
    pub omega_size: usize,
    /// Tolerance applied to every feature, both directions.
    pub deviation: BigRational,
}

const SIZE_SET: [i64; 6] = [10, 15, 20, 25, 40, 50];
const QUALITY_SET: [i64; 5] = [1, 2, 3, 4, 5];
const SUBSIDY_SET: [i64; 3] = [1, 2, 3];

/// Deterministic pseudo-random village: lots in a square with category
/// features (size row, a soil-quality row, farmer-dependent subsidy rows),
/// farmsteads in the same square, and an original distribution built by
/// round-robin nearest-lot greedy. Stated totals are the realized totals of
/// that original, so it is feasible for any nonnegative deviation.
pub fn generate_instance(cfg: &GenerateConfig) -> Result<LandInstance, GenerateError> {
    if cfg.lots == 0 {
        return Err(GenerateError::NonPositive { what: "lot count" });
    }
    if cfg.farmers == 0 {
        return Err(GenerateError::NonPositive { what: "farmer count" });
    }
    if cfg.features == 0 {
        return Err(GenerateError::NonPositive { what: "feature count" });
    }
    if cfg.omega_size == 0 {
        return Err(GenerateError::NonPositive { what: "category count" });
    }
    if cfg.lots < cfg.farmers {
        return Err(GenerateError::TooFewLots { lots: cfg.lots, farmers: cfg.farmers });
    }
    if cfg.deviation.is_negative() || cfg.deviation >= BigRational::one() {
        return Err(GenerateError::DeviationRange);
    }
    let (n, p, s) = (cfg.lots, cfg.farmers, cfg.features);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Distinct lot categories. Row 0 is the size row; row 1 (if present) is
    // farmer-independent soil quality; further rows are per-farmer subsidy
    // classes.
    let mut entries: Vec<IntMatrix> = Vec::new();
    let mut attempts = 0usize;
    while entries.len() < cfg.omega_size {
        attempts += 1;
        if attempts > 64 * cfg.omega_size {
            return Err(GenerateError::CategoriesExhausted { wanted: cfg.omega_size, s, p });
        }
        let size = SIZE_SET[rng.gen_range(0..SIZE_SET.len())];
        let mut w = IntMatrix::zeros(s, p);
        for i in 0..p {
            w.set(0, i, BigInt::from(size));
        }
        if s >= 2 {
            let quality = QUALITY_SET[rng.gen_range(0..QUALITY_SET.len())];
            for i in 0..p {
                w.set(1, i, BigInt::from(quality));
            }
        }
        for f in 2..s {
            for i in 0..p {
                let subsidy = SUBSIDY_SET[rng.gen_range(0..SUBSIDY_SET.len())];
                w.set(f, i, BigInt::from(subsidy));
            }
        }
        if !entries.contains(&w) {
            entries.push(w);
        }
    }

    // Coordinates on a 0.1 grid inside a 100×100 square.
    let coord = |rng: &mut ChaCha8Rng| {
        BigRational::new(BigInt::from(rng.gen_range(0..=1000i32)), BigInt::from(10))
    };

    let mut lots = Vec::with_capacity(n);
    for j in 0..n {
        let location = (coord(&mut rng), coord(&mut rng));
        let weight_index = rng.gen_range(0..entries.len());
        let size = entries[weight_index].get(0, 0).clone();
        lots.push(Lot { id: j, location, size, weight_index });
    }
    let farmsteads: Vec<(BigRational, BigRational)> =
        (0..p).map(|_| (coord(&mut rng), coord(&mut rng))).collect();

    // Round-robin nearest-lot greedy original.
    let mut taken = vec![false; n];
    let mut assignment = vec![0usize; n];
    for t in 0..n {
        let i = t % p;
        let j = (0..n)
            .filter(|&j| !taken[j])
            .min_by_key(|&j| dist2(&farmsteads[i], &lots[j].location))
            .expect("unassigned lot remains");
        taken[j] = true;
        assignment[j] = i;
    }
    let original = Partition::new(assignment);

    // Stated totals = realized totals of the original.
    let mut totals = vec![vec![BigInt::zero(); s]; p];
    for (lot, &i) in lots.iter().zip(original.assignment()) {
        for f in 0..s {
            totals[i][f] += entries[lot.weight_index].get(f, i);
        }
    }
    let farmers = farmsteads
        .into_iter()
        .enumerate()
        .map(|(i, farmstead)| Farmer {
            id: i,
            farmstead,
            totals: totals[i].clone(),
            deviation_lower: vec![cfg.deviation.clone(); s],
            deviation_upper: vec![cfg.deviation.clone(); s],
        })
        .collect();

    // Hand the matrices over per lot: the stored domain then uses
    // first-appearance order with no unused categories, the same canonical
    // shape a file roundtrip produces.
    let lot_data = lots
        .into_iter()
        .map(|lot| (lot.id, lot.location, lot.size, entries[lot.weight_index].clone()))
        .collect();
    Ok(LandInstance::from_lot_matrices(0, lot_data, farmers, original)?)
}
