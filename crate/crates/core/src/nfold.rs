//! Assembly of the block-structured equality systems the solver works on,
//! and the translation between partitions and 0/1 decision vectors.
//!
//! For an instance with `n` items, `p` clusters, `s` features and `m` distinct
//! weight matrices, the constraint matrix is the n-fold arrangement of two
//! blocks: `block_top` (repeated horizontally across all item blocks) carries
//! the feature-total rows, and `block_bottom` (one copy per item on a block
//! diagonal) forces each item to pick exactly one assignment column.
//!
//! Three builds share this shape and differ in the per-item block of width
//! `t`:
//!
//! * `p1` — exact totals, single feature: `t = m·p`, no slack columns.
//! * `p2` — bounded totals, single feature: `t = 2p + m·p`; each block starts
//!   with `p` slack⁺ and `p` slack⁻ columns turning the two-sided bounds into
//!   equalities.
//! * `p3` — bounded totals, `s` features: `t = 2sp + m·p`, slack vectors of
//!   length `s` per cluster and sign.
//!
//! Only the first item block has usable slack columns; the copies in blocks
//! `j > 0` exist to keep every block identical and are pinned to zero by
//! their upper bounds. Assignment columns are ordered weight-slot-major then
//! cluster, and an item's column for weight slot `k` is pinned to zero unless
//! `k` is the item's actual weight index.
//!
//! The full matrix is never needed densely during solves: products run block
//! by block, and the Graver machinery sees [`NFoldSystem::reduced_matrix`],
//! the submatrix of columns that can move at all (pinned columns cannot
//! appear in any augmentation step, and dropping them provably preserves the
//! test-set property on every fiber of the box).

use crate::matrix::{IntMatrix, RatMatrix};
use crate::model::{FeasibilityReport, Instance, ModelError, Partition};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("p1 requires exact bounds (lower = upper); cluster {cluster} has an interval")]
    NotExactBounds { cluster: usize },
    #[error("{model} handles a single feature, instance has s = {s}; use p3")]
    SingleFeatureOnly { model: &'static str, s: usize },
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("partition is infeasible: {report}")]
    Infeasible { report: FeasibilityReport },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Decode failures signal solver bugs rather than bad user input.
#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("vector length {got} does not match system width {want}")]
    Length { got: usize, want: usize },
    #[error("item {item}: assignment block has {count} ones, expected exactly 1")]
    AssignmentCount { item: usize, count: usize },
    #[error("column {column} holds {value}, outside its bounds")]
    OutOfBox { column: usize, value: BigInt },
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("vector length {got} does not match system width {want}")]
    Length { got: usize, want: usize },
    #[error("column {column} violates its box bounds")]
    Box { column: usize },
    #[error("equality row {row} not satisfied")]
    Row { row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    P1,
    P2,
    P3,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::P1 => "p1",
            ModelKind::P2 => "p2",
            ModelKind::P3 => "p3",
        }
    }
}

/// What a column means: slack coordinate or assignment decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    SlackPlus { cluster: usize, feature: usize },
    SlackMinus { cluster: usize, feature: usize },
    Assign { omega_index: usize, cluster: usize },
}

/// Column tag: owning item block plus role within the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnMeta {
    pub item: usize,
    pub role: ColumnRole,
}

/// Slack values read off a decoded solution, per cluster and feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackRecord {
    pub plus: Vec<Vec<BigInt>>,
    pub minus: Vec<Vec<BigInt>>,
}

/// An assembled constraint system plus objective matrix and decode metadata.
#[derive(Debug, Clone)]
pub struct NFoldSystem {
    kind: ModelKind,
    block_top: IntMatrix,
    block_bottom: IntMatrix,
    n: usize,
    s: usize,
    p: usize,
    m: usize,
    d: usize,
    /// Slack coordinates per sign within one block (`s·p`, or 0 for p1).
    slack_dim: usize,
    rhs: Vec<BigInt>,
    lower: Vec<BigInt>,
    upper: Vec<BigInt>,
    objective: RatMatrix,
}

impl NFoldSystem {
    /// Exact-totals single-feature build. Requires `lower = upper` everywhere
    /// and `s = 1`.
    pub fn build_p1(inst: &Instance) -> Result<Self, BuildError> {
        if inst.s() != 1 {
            return Err(BuildError::SingleFeatureOnly { model: "p1", s: inst.s() });
        }
        if let Some(i) = inst.bounds().iter().position(|b| !b.is_exact()) {
            return Err(BuildError::NotExactBounds { cluster: i });
        }
        Ok(Self::assemble(inst, ModelKind::P1))
    }

    /// Bounded-totals single-feature build (`s = 1`).
    pub fn build_p2(inst: &Instance) -> Result<Self, BuildError> {
        if inst.s() != 1 {
            return Err(BuildError::SingleFeatureOnly { model: "p2", s: inst.s() });
        }
        Ok(Self::assemble(inst, ModelKind::P2))
    }

    /// General build: bounded totals, `s` features.
    pub fn build_p3(inst: &Instance) -> Result<Self, BuildError> {
        Ok(Self::assemble(inst, ModelKind::P3))
    }

    fn assemble(inst: &Instance, kind: ModelKind) -> Self {
        let (n, s, p, m, d) = (inst.n(), inst.s(), inst.p(), inst.m(), inst.d());
        let slack_dim = match kind {
            ModelKind::P1 => 0,
            ModelKind::P2 | ModelKind::P3 => s * p,
        };
        let t = 2 * slack_dim + m * p;
        let r1 = if slack_dim == 0 { p * s } else { 2 * slack_dim };

        // Weight rows: row (i·s + f), assignment column (k·p + i) carries
        // W^k[f][i] — column i of the k-th domain matrix, stacked per cluster.
        let mut block_top = IntMatrix::zeros(r1, t);
        let a_col = |k: usize, i: usize| 2 * slack_dim + k * p + i;
        for k in 0..m {
            let w = inst.domain().entry(k);
            for i in 0..p {
                for f in 0..s {
                    if slack_dim == 0 {
                        block_top.set(i * s + f, a_col(k, i), w.get(f, i).clone());
                    } else {
                        block_top.set(i * s + f, a_col(k, i), w.get(f, i).clone());
                        block_top.set(slack_dim + i * s + f, a_col(k, i), w.get(f, i).clone());
                    }
                }
            }
        }
        if slack_dim > 0 {
            for r in 0..slack_dim {
                block_top.set(r, r, BigInt::one());
                block_top.set(slack_dim + r, slack_dim + r, -BigInt::one());
            }
        }

        let mut block_bottom = IntMatrix::zeros(1, t);
        for c in 2 * slack_dim..t {
            block_bottom.set(0, c, BigInt::one());
        }

        let mut rhs = Vec::with_capacity(r1 + n);
        match kind {
            ModelKind::P1 => {
                for b in inst.bounds() {
                    rhs.extend(b.lower.iter().cloned());
                }
            }
            ModelKind::P2 | ModelKind::P3 => {
                for b in inst.bounds() {
                    rhs.extend(b.upper.iter().cloned());
                }
                for b in inst.bounds() {
                    rhs.extend(b.lower.iter().cloned());
                }
            }
        }
        rhs.extend(std::iter::repeat(BigInt::one()).take(n));

        // Slack cap per feature: no feasible slack ever exceeds the total
        // absolute weight over all items and clusters.
        let mut nu = vec![BigInt::zero(); s];
        for item in inst.items() {
            let w = inst.domain().entry(item.weight_index);
            for f in 0..s {
                for i in 0..p {
                    nu[f] += w.get(f, i).abs();
                }
            }
        }

        let cols = n * t;
        let lower = vec![BigInt::zero(); cols];
        let mut upper = vec![BigInt::zero(); cols];
        for (j, item) in inst.items().iter().enumerate() {
            let base = j * t;
            if j == 0 && slack_dim > 0 {
                for i in 0..p {
                    for f in 0..s {
                        upper[base + i * s + f] = nu[f].clone();
                        upper[base + slack_dim + i * s + f] = nu[f].clone();
                    }
                }
            }
            for i in 0..p {
                upper[base + a_col(item.weight_index, i)] = BigInt::one();
            }
        }

        // Objective rows are cluster-major d-chunks; every weight slot k of
        // item j carries the same utility column, so C·x equals the stacked
        // cluster utility sums of the decoded partition.
        let mut objective = RatMatrix::zeros(d * p, cols);
        for (j, item) in inst.items().iter().enumerate() {
            let base = j * t;
            for k in 0..m {
                for i in 0..p {
                    for r in 0..d {
                        objective.set(i * d + r, base + a_col(k, i), item.utility.get(r, i).clone());
                    }
                }
            }
        }

        Self { kind, block_top, block_bottom, n, s, p, m, d, slack_dim, rhs, lower, upper, objective }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn block_top(&self) -> &IntMatrix {
        &self.block_top
    }

    pub fn block_bottom(&self) -> &IntMatrix {
        &self.block_bottom
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Per-item block width `t`.
    pub fn block_width(&self) -> usize {
        self.block_top.cols()
    }

    /// Total column count `N = n·t`.
    pub fn total_cols(&self) -> usize {
        self.n * self.block_width()
    }

    pub fn rows(&self) -> usize {
        self.block_top.rows() + self.n
    }

    pub fn rhs(&self) -> &[BigInt] {
        &self.rhs
    }

    pub fn lower(&self) -> &[BigInt] {
        &self.lower
    }

    pub fn upper(&self) -> &[BigInt] {
        &self.upper
    }

    pub fn objective_matrix(&self) -> &RatMatrix {
        &self.objective
    }

    /// Objective row count `c = d·p`.
    pub fn objective_rows(&self) -> usize {
        self.objective.rows()
    }

    pub fn column_meta(&self, col: usize) -> ColumnMeta {
        let t = self.block_width();
        assert!(col < self.total_cols(), "column {col} out of range");
        let item = col / t;
        let c = col % t;
        let role = if c < self.slack_dim {
            ColumnRole::SlackPlus { cluster: c / self.s, feature: c % self.s }
        } else if c < 2 * self.slack_dim {
            let c = c - self.slack_dim;
            ColumnRole::SlackMinus { cluster: c / self.s, feature: c % self.s }
        } else {
            let c = c - 2 * self.slack_dim;
            ColumnRole::Assign { omega_index: c / self.p, cluster: c % self.p }
        };
        ColumnMeta { item, role }
    }

    /// Column index of an item's assignment decision for (weight slot,
    /// cluster).
    pub fn assign_column(&self, item: usize, omega_index: usize, cluster: usize) -> usize {
        item * self.block_width() + 2 * self.slack_dim + omega_index * self.p + cluster
    }

    fn slack_column(&self, plus: bool, cluster: usize, feature: usize) -> usize {
        // Slack columns live in block 0.
        let off = if plus { 0 } else { self.slack_dim };
        off + cluster * self.s + feature
    }

    /// `A⁽ⁿ⁾ · x` using the block structure; never materializes the matrix.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.total_cols(), "dimension mismatch");
        let t = self.block_width();
        let r1 = self.block_top.rows();
        let mut out = vec![BigInt::zero(); r1 + self.n];
        for j in 0..self.n {
            let xj = &x[j * t..(j + 1) * t];
            for r in 0..r1 {
                let acc: BigInt = self
                    .block_top
                    .row(r)
                    .iter()
                    .zip(xj)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum();
                out[r] += acc;
            }
            out[r1 + j] = self
                .block_bottom
                .row(0)
                .iter()
                .zip(xj)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .map(|(a, b)| a * b)
                .sum();
        }
        out
    }

    /// Full feasibility: box bounds plus every equality row.
    pub fn check_feasible(&self, x: &[BigInt]) -> Result<(), SystemError> {
        if x.len() != self.total_cols() {
            return Err(SystemError::Length { got: x.len(), want: self.total_cols() });
        }
        for (c, v) in x.iter().enumerate() {
            if v < &self.lower[c] || v > &self.upper[c] {
                return Err(SystemError::Box { column: c });
            }
        }
        let prod = self.apply(x);
        for (r, (got, want)) in prod.iter().zip(&self.rhs).enumerate() {
            if got != want {
                return Err(SystemError::Row { row: r });
            }
        }
        Ok(())
    }

    /// Columns that can take more than one value (`lower < upper`). All other
    /// columns are pinned and can never occur in an augmentation step.
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.total_cols()).filter(|&c| self.lower[c] < self.upper[c]).collect()
    }

    /// The system matrix restricted to active columns — the matrix whose
    /// Graver basis is the effective test set for this system's fibers.
    ///
    /// Any two points of a fiber agree on pinned columns, so their difference
    /// is supported on active columns, and conformal decompositions of such
    /// differences only involve kernel elements supported there too; those
    /// are exactly the kernel elements of this submatrix.
    pub fn reduced_matrix(&self) -> IntMatrix {
        let t = self.block_width();
        let r1 = self.block_top.rows();
        let active = self.active_columns();
        let mut a = IntMatrix::zeros(r1 + self.n, active.len());
        for (out_c, &col) in active.iter().enumerate() {
            let (item, c) = (col / t, col % t);
            for r in 0..r1 {
                a.set(r, out_c, self.block_top.get(r, c).clone());
            }
            a.set(r1 + item, out_c, self.block_bottom.get(0, c).clone());
        }
        a
    }

    /// Objective matrix restricted to active columns (pinned columns cannot
    /// contribute to any direction).
    pub fn reduced_objective(&self) -> RatMatrix {
        let active = self.active_columns();
        let mut m = RatMatrix::zeros(self.objective.rows(), active.len());
        for (out_c, &col) in active.iter().enumerate() {
            for r in 0..self.objective.rows() {
                m.set(r, out_c, self.objective.get(r, col).clone());
            }
        }
        m
    }

    /// Dense `A⁽ⁿ⁾`; only for dumps and hand-sized cross-checks.
    pub fn full_matrix(&self) -> IntMatrix {
        let t = self.block_width();
        let r1 = self.block_top.rows();
        let mut a = IntMatrix::zeros(r1 + self.n, self.total_cols());
        for j in 0..self.n {
            for c in 0..t {
                for r in 0..r1 {
                    a.set(r, j * t + c, self.block_top.get(r, c).clone());
                }
                a.set(r1 + j, j * t + c, self.block_bottom.get(0, c).clone());
            }
        }
        a
    }

    /// Plain-text listing of the assembled system for hand cross-checks.
    pub fn dump_text(&self) -> String {
        let join = |v: &[BigInt]| v.iter().map(BigInt::to_string).collect::<Vec<_>>().join(" ");
        format!(
            "model {}\nn {} block_width {} rows {} cols {}\nmatrix\n{}\nrhs\n{}\nlower\n{}\nupper\n{}\n",
            self.kind.name(),
            self.n,
            self.block_width(),
            self.rows(),
            self.total_cols(),
            self.full_matrix().to_text(),
            join(&self.rhs),
            join(&self.lower),
            join(&self.upper),
        )
    }

    /// Lift a feasible partition to a feasible decision vector: one 1 per
    /// item at its (weight slot, cluster) column, block-0 slacks set to the
    /// unique values closing both equality rows.
    pub fn encode_assignment(
        &self,
        inst: &Instance,
        part: &Partition,
    ) -> Result<Vec<BigInt>, EncodeError> {
        let report = inst.check_feasibility(part)?;
        if !report.is_feasible() {
            return Err(EncodeError::Infeasible { report });
        }
        let mut x = vec![BigInt::zero(); self.total_cols()];
        for (j, (&cluster, item)) in part.assignment().iter().zip(inst.items()).enumerate() {
            x[self.assign_column(j, item.weight_index, cluster)] = BigInt::one();
        }
        if self.slack_dim > 0 {
            let totals = inst.feature_totals(part)?;
            for i in 0..self.p {
                for f in 0..self.s {
                    let plus = &inst.bounds()[i].upper[f] - &totals[i][f];
                    let minus = &totals[i][f] - &inst.bounds()[i].lower[f];
                    x[self.slack_column(true, i, f)] = plus;
                    x[self.slack_column(false, i, f)] = minus;
                }
            }
        }
        debug_assert!(self.check_feasible(&x).is_ok(), "encode produced an infeasible vector");
        Ok(x)
    }

    /// Read a partition and the block-0 slack values off a decision vector.
    pub fn decode_solution(&self, x: &[BigInt]) -> Result<(Partition, SlackRecord), DecodeError> {
        if x.len() != self.total_cols() {
            return Err(DecodeError::Length { got: x.len(), want: self.total_cols() });
        }
        let mut assignment = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let mut found: Option<usize> = None;
            let mut count = 0usize;
            for k in 0..self.m {
                for i in 0..self.p {
                    let col = self.assign_column(j, k, i);
                    let v = &x[col];
                    if v.is_zero() {
                        continue;
                    }
                    if !v.is_one() {
                        return Err(DecodeError::OutOfBox { column: col, value: v.clone() });
                    }
                    count += 1;
                    found = Some(i);
                }
            }
            if count != 1 {
                return Err(DecodeError::AssignmentCount { item: j, count });
            }
            assignment.push(found.unwrap());
        }
        let mut slacks = SlackRecord {
            plus: vec![vec![BigInt::zero(); self.s]; self.p],
            minus: vec![vec![BigInt::zero(); self.s]; self.p],
        };
        if self.slack_dim > 0 {
            for i in 0..self.p {
                for f in 0..self.s {
                    slacks.plus[i][f] = x[self.slack_column(true, i, f)].clone();
                    slacks.minus[i][f] = x[self.slack_column(false, i, f)].clone();
                }
            }
        }
        Ok((Partition::new(assignment), slacks))
    }

    /// Scatter a vector over active columns back to full width (pinned
    /// columns get zero).
    pub fn expand_active(&self, reduced: &[BigInt]) -> Vec<BigInt> {
        let active = self.active_columns();
        assert_eq!(reduced.len(), active.len(), "active-length mismatch");
        let mut full = vec![BigInt::zero(); self.total_cols()];
        for (v, &c) in reduced.iter().zip(&active) {
            full[c] = v.clone();
        }
        full
    }

    /// Linear objective value `wᵀ(C·x)` of a full-width vector.
    pub fn linear_value(&self, weights: &[BigRational], x: &[BigInt]) -> BigRational {
        let y = self.objective.mul_int_vec(x);
        y.iter().zip(weights).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ObjectiveSpec;
    use crate::matrix::RatMatrix;
    use crate::model::{ClusterBounds, Item, WeightDomain};
    use crate::num::bi;

    // n items sharing one weight vector per Ω-slot; utilities all zero.
    fn make_instance(
        weights: Vec<Vec<i64>>,          // m weight vectors, length p
        item_slots: &[usize],            // weight_index per item
        bounds: &[(i64, i64)],
    ) -> Instance {
        let p = bounds.len();
        let vectors = weights
            .into_iter()
            .map(|w| w.into_iter().map(BigInt::from).collect())
            .collect();
        let domain = WeightDomain::from_weight_vectors(p, vectors).unwrap();
        let items = item_slots
            .iter()
            .enumerate()
            .map(|(j, &k)| Item { id: j, weight_index: k, utility: RatMatrix::zeros(1, p) })
            .collect();
        let bounds = bounds
            .iter()
            .map(|&(lo, hi)| ClusterBounds { lower: vec![bi(lo)], upper: vec![bi(hi)] })
            .collect();
        Instance::new(domain, items, bounds, ObjectiveSpec::linear_ones(p)).unwrap()
    }

    #[test]
    fn p1_toy_assembly() {
        // Two items with weight vector (1,1), exact sizes b = (1,1).
        let inst = make_instance(vec![vec![1, 1]], &[0, 0], &[(1, 1), (1, 1)]);
        let sys = NFoldSystem::build_p1(&inst).unwrap();
        assert_eq!(sys.total_cols(), 4);
        assert_eq!(sys.block_top(), &IntMatrix::from_i64(&[&[1, 0], &[0, 1]]));
        assert_eq!(sys.block_bottom(), &IntMatrix::from_i64(&[&[1, 1]]));
        assert_eq!(sys.rhs(), &[bi(1), bi(1), bi(1), bi(1)][..]);
        assert_eq!(
            sys.full_matrix(),
            IntMatrix::from_i64(&[
                &[1, 0, 1, 0],
                &[0, 1, 0, 1],
                &[1, 1, 0, 0],
                &[0, 0, 1, 1],
            ])
        );
    }

    #[test]
    fn p1_dimension_formula() {
        let inst = make_instance(
            vec![vec![1, 1], vec![2, 2]],
            &[0, 1, 0],
            &[(2, 2), (2, 2)],
        );
        let sys = NFoldSystem::build_p1(&inst).unwrap();
        assert_eq!(sys.total_cols(), 3 * (2 * 2));
        assert_eq!(sys.objective_rows(), inst.d() * inst.p());
    }

    #[test]
    fn p1_pins_every_foreign_slot() {
        // Without slack columns the first block has no cap columns either;
        // the slot the first item does not use must stay pinned at zero, not
        // inherit the slack cap.
        let inst = make_instance(vec![vec![2, 1], vec![3, 2]], &[1, 0, 1], &[(5, 5), (3, 3)]);
        let sys = NFoldSystem::build_p1(&inst).unwrap();
        for (j, &slot) in [1usize, 0, 1].iter().enumerate() {
            for k in 0..sys.m() {
                for i in 0..sys.p() {
                    let col = sys.assign_column(j, k, i);
                    let want = if k == slot { bi(1) } else { bi(0) };
                    assert_eq!(sys.upper()[col], want, "item {j} slot {k} cluster {i}");
                    assert_eq!(sys.lower()[col], bi(0));
                }
            }
        }
    }

    #[test]
    fn p1_rejects_intervals_and_multifeature() {
        let inst = make_instance(vec![vec![1]], &[0], &[(0, 2)]);
        assert!(matches!(
            NFoldSystem::build_p1(&inst),
            Err(BuildError::NotExactBounds { cluster: 0 })
        ));

        let w = IntMatrix::from_i64(&[&[1], &[1]]);
        let domain = WeightDomain::new(2, 1, vec![w]).unwrap();
        let items = vec![Item { id: 0, weight_index: 0, utility: RatMatrix::zeros(1, 1) }];
        let bounds = vec![ClusterBounds::exact(vec![bi(1), bi(1)])];
        let inst2 = Instance::new(domain, items, bounds, ObjectiveSpec::linear_ones(1)).unwrap();
        assert!(matches!(
            NFoldSystem::build_p1(&inst2),
            Err(BuildError::SingleFeatureOnly { model: "p1", .. })
        ));
        assert!(NFoldSystem::build_p3(&inst2).is_ok());
    }

    #[test]
    fn p2_slack_solution_by_hand() {
        // One item of weight 5, bounds [3,7]: slack cap is 5, s⁺ = 2, s⁻ = 2.
        let inst = make_instance(vec![vec![5]], &[0], &[(3, 7)]);
        let sys = NFoldSystem::build_p2(&inst).unwrap();
        assert_eq!(sys.block_width(), 2 + 1);
        assert_eq!(sys.upper()[0], bi(5));
        assert_eq!(sys.upper()[1], bi(5));
        let x = sys.encode_assignment(&inst, &Partition::new(vec![0])).unwrap();
        assert_eq!(x, vec![bi(2), bi(2), bi(1)]);
        let (part, slacks) = sys.decode_solution(&x).unwrap();
        assert_eq!(part.assignment(), &[0]);
        assert_eq!(slacks.plus[0], vec![bi(2)]);
        assert_eq!(slacks.minus[0], vec![bi(2)]);
    }

    #[test]
    fn p2_block_width_formula() {
        let inst = make_instance(
            vec![vec![1, 1], vec![2, 1], vec![1, 3]],
            &[0, 1, 2],
            &[(0, 9), (0, 9)],
        );
        let sys = NFoldSystem::build_p2(&inst).unwrap();
        assert_eq!(sys.block_width(), 2 * 2 + 3 * 2);
        assert_eq!(sys.total_cols(), 3 * 10);
    }

    #[test]
    fn p2_pins_slack_columns_of_later_blocks() {
        let inst = make_instance(vec![vec![1]], &[0, 0], &[(0, 2)]);
        let sys = NFoldSystem::build_p2(&inst).unwrap();
        let t = sys.block_width();
        for c in 0..2 {
            assert!(sys.upper()[c] > bi(0), "block-0 slack must be free");
            assert_eq!(sys.upper()[t + c], bi(0), "block-1 slack must be pinned");
        }
    }

    #[test]
    fn p3_shapes_and_slack_caps() {
        // s=2, p=2, m=1: block width 2·2·2 + 2 = 10, top block has 8 rows.
        let w = IntMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        let domain = WeightDomain::new(2, 2, vec![w]).unwrap();
        let items = vec![
            Item { id: 0, weight_index: 0, utility: RatMatrix::zeros(1, 2) },
            Item { id: 1, weight_index: 0, utility: RatMatrix::zeros(1, 2) },
        ];
        let bounds = vec![
            ClusterBounds { lower: vec![bi(0), bi(0)], upper: vec![bi(9), bi(9)] },
            ClusterBounds { lower: vec![bi(0), bi(0)], upper: vec![bi(9), bi(9)] },
        ];
        let inst = Instance::new(domain, items, bounds, ObjectiveSpec::linear_ones(2)).unwrap();
        let sys = NFoldSystem::build_p3(&inst).unwrap();
        assert_eq!(sys.block_width(), 2 * 2 * 2 + 1 * 2);
        assert_eq!(sys.block_top().rows(), 8);
        // ν per feature sums |W| over clusters and items: rows (1,2) and
        // (3,4), two items -> (6, 14).
        assert_eq!(sys.upper()[0], bi(6));
        assert_eq!(sys.upper()[1], bi(14));
    }

    #[test]
    fn p3_nu_componentwise_example() {
        // Two items, |W| columns (1,2) and (3,4) with p = 1 -> ν = (4,6).
        let w1 = IntMatrix::from_i64(&[&[1], &[2]]);
        let w2 = IntMatrix::from_i64(&[&[-3], &[4]]);
        let domain = WeightDomain::new(2, 1, vec![w1, w2]).unwrap();
        let items = vec![
            Item { id: 0, weight_index: 0, utility: RatMatrix::zeros(1, 1) },
            Item { id: 1, weight_index: 1, utility: RatMatrix::zeros(1, 1) },
        ];
        let bounds = vec![ClusterBounds { lower: vec![bi(-9), bi(0)], upper: vec![bi(9), bi(9)] }];
        let inst = Instance::new(domain, items, bounds, ObjectiveSpec::linear_ones(1)).unwrap();
        let sys = NFoldSystem::build_p3(&inst).unwrap();
        assert_eq!(sys.upper()[0], bi(4));
        assert_eq!(sys.upper()[1], bi(6));
    }

    #[test]
    fn column_meta_roundtrip() {
        let inst = make_instance(
            vec![vec![1, 1], vec![2, 1]],
            &[0, 1],
            &[(0, 9), (0, 9)],
        );
        let sys = NFoldSystem::build_p2(&inst).unwrap();
        let meta = sys.column_meta(sys.assign_column(1, 1, 0));
        assert_eq!(meta.item, 1);
        assert_eq!(meta.role, ColumnRole::Assign { omega_index: 1, cluster: 0 });
        assert_eq!(
            sys.column_meta(2).role,
            ColumnRole::SlackMinus { cluster: 0, feature: 0 }
        );
        assert_eq!(
            sys.column_meta(0).role,
            ColumnRole::SlackPlus { cluster: 0, feature: 0 }
        );
    }

    #[test]
    fn encode_rejects_infeasible_partition() {
        let inst = make_instance(vec![vec![1, 1]], &[0, 0], &[(1, 1), (1, 1)]);
        let sys = NFoldSystem::build_p1(&inst).unwrap();
        let err = sys.encode_assignment(&inst, &Partition::new(vec![0, 0]));
        assert!(matches!(err, Err(EncodeError::Infeasible { .. })));
    }

    #[test]
    fn decode_rejects_double_assignment() {
        let inst = make_instance(vec![vec![1, 1]], &[0, 0], &[(1, 1), (1, 1)]);
        let sys = NFoldSystem::build_p1(&inst).unwrap();
        let mut x = sys
            .encode_assignment(&inst, &Partition::new(vec![0, 1]))
            .unwrap();
        x[sys.assign_column(0, 0, 1)] = bi(1); // second 1 in block 0
        assert!(matches!(
            sys.decode_solution(&x),
            Err(DecodeError::AssignmentCount { item: 0, count: 2 })
        ));
    }

    #[test]
    fn encode_decode_roundtrip() {
        let inst = make_instance(
            vec![vec![2, 1], vec![1, 1]],
            &[0, 1, 1],
            &[(1, 4), (0, 3)],
        );
        let sys = NFoldSystem::build_p3_from_single_feature(&inst);
        for part in [vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0], vec![0, 1, 1]] {
            let part = Partition::new(part);
            if !inst.is_feasible(&part) {
                continue;
            }
            let x = sys.encode_assignment(&inst, &part).unwrap();
            let (decoded, _) = sys.decode_solution(&x).unwrap();
            assert_eq!(decoded, part);
        }
    }

    #[test]
    fn apply_matches_full_matrix() {
        let inst = make_instance(
            vec![vec![2, 1], vec![1, 1]],
            &[0, 1],
            &[(0, 4), (0, 3)],
        );
        let sys = NFoldSystem::build_p2(&inst).unwrap();
        let x = sys.encode_assignment(&inst, &Partition::new(vec![0, 1])).unwrap();
        assert_eq!(sys.apply(&x), sys.full_matrix().mul_vec(&x));
    }

    #[test]
    fn reduced_matrix_keeps_movable_columns_only() {
        let inst = make_instance(vec![vec![1], vec![3]], &[0, 1], &[(0, 4)]);
        let sys = NFoldSystem::build_p2(&inst).unwrap();
        // Active: 2 block-0 slacks + one assignment column per item.
        let active = sys.active_columns();
        assert_eq!(active.len(), 4);
        let reduced = sys.reduced_matrix();
        assert_eq!(reduced.rows(), sys.rows());
        assert_eq!(reduced.cols(), 4);
        // Reduced columns match the full matrix restricted to active columns.
        assert_eq!(reduced, sys.full_matrix().select_columns(&active));
    }

    impl NFoldSystem {
        // Test helper: p3 build over an s=1 instance.
        fn build_p3_from_single_feature(inst: &Instance) -> Self {
            Self::build_p3(inst).unwrap()
        }
    }
}
