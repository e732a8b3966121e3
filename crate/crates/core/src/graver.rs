//! Graver bases: all conformally-minimal nonzero integer kernel elements of a
//! matrix, computed by a completion algorithm, plus a brute-force enumeration
//! oracle for small cases.
//!
//! The conformal order `u ⊑ v` holds when `u` and `v` agree in sign
//! componentwise and `|u_k| ≤ |v_k|` everywhere. The Graver basis is the set
//! of `⊑`-minimal nonzero kernel vectors; it is finite, closed under
//! negation, and every kernel element is a sign-compatible nonnegative
//! integer combination of basis elements — which is exactly what makes it a
//! universal test set for augmentation.
//!
//! Completion follows Pottier's scheme: start from a lattice basis of
//! `ker(A)` obtained by exact integer elimination, then repeatedly form sums
//! of stored pairs with opposite signs somewhere, reduce each sum to a normal
//! form by subtracting conformally-smaller stored vectors, and keep the
//! irreducible remainders, until every pair sum reduces to zero. A final
//! sieve keeps the `⊑`-minimal vectors. Pairs are processed smallest first
//! (by the sum of the parents' 1-norms, ties by insertion index), which keeps
//! the working set close to the final basis and the output deterministic.

use crate::matrix::IntMatrix;
use crate::num::lex_cmp;
use num_bigint::BigInt;
use num_bigint::Sign;
use num_traits::{Signed, Zero};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraverError {
    #[error("graver basis exceeds the configured size cap ({limit} vectors); raise the cap or shrink the system")]
    BasisTooLarge { limit: usize },
    #[error("graver completion exceeded {limit} candidate pairs without converging; raise the cap or shrink the system")]
    PairCapExceeded { limit: u64 },
}

/// Caps keeping completion from running away on oversized inputs. Defaults
/// are sized for desk-scale systems (a few dozen columns).
#[derive(Debug, Clone)]
pub struct GraverConfig {
    pub max_basis: usize,
    pub max_pairs: u64,
}

impl Default for GraverConfig {
    fn default() -> Self {
        Self { max_basis: 50_000, max_pairs: 10_000_000 }
    }
}

/// A computed Graver basis, tied to its matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraverBasis {
    matrix: IntMatrix,
    vectors: Vec<Vec<BigInt>>,
}

impl GraverBasis {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// One vector per line, space-separated entries; the exchange format used
    /// by the CLI and by regression fixtures.
    pub fn to_text(&self) -> String {
        self.vectors
            .iter()
            .map(|v| v.iter().map(BigInt::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// `u ⊑ v`: same sign pattern (zeros allowed in `u`) and `|u_k| ≤ |v_k|`.
pub fn conformal_leq(u: &[BigInt], v: &[BigInt]) -> bool {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).all(|(a, b)| match a.sign() {
        Sign::NoSign => true,
        Sign::Plus => b.sign() == Sign::Plus && a <= b,
        Sign::Minus => b.sign() == Sign::Minus && a >= b,
    })
}

/// True iff no element of `set` other than `v` itself is `⊑ v`.
pub fn is_conformally_minimal(v: &[BigInt], set: &[Vec<BigInt>]) -> bool {
    !set.iter().any(|u| u.as_slice() != v && conformal_leq(u, v))
}

/// Lattice basis of `{v ∈ Z^cols : A·v = 0}` by exact integer elimination.
///
/// Works on the augmented rows `(column i of A | e_i)`: any integer row
/// operation keeps the invariant `left = A · right`, so once the left parts
/// are in echelon form, the right parts of the zero-left rows generate the
/// full kernel lattice.
pub fn kernel_lattice_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let rows = a.rows();
    let cols = a.cols();
    // Augmented working rows: (left: length `rows`, right: length `cols`).
    let mut left: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| (0..rows).map(|r| a.get(r, i).clone()).collect())
        .collect();
    let mut right: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| {
            let mut e = vec![BigInt::zero(); cols];
            e[i] = BigInt::from(1);
            e
        })
        .collect();

    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut free: Vec<usize> = (0..cols).collect();
    for col in 0..rows {
        loop {
            // Row with the smallest nonzero |entry| in this column.
            let mut best: Option<usize> = None;
            for &r in &free {
                if left[r][col].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(r),
                    Some(b) => {
                        if left[r][col].abs() < left[b][col].abs() {
                            best = Some(r);
                        }
                    }
                }
            }
            let Some(pivot) = best else { break };
            let mut done = true;
            for idx in 0..free.len() {
                let r = free[idx];
                if r == pivot || left[r][col].is_zero() {
                    continue;
                }
                let q = &left[r][col] / &left[pivot][col];
                if !q.is_zero() {
                    for k in col..rows {
                        let sub = &q * &left[pivot][k];
                        left[r][k] -= sub;
                    }
                    for k in 0..cols {
                        let sub = &q * &right[pivot][k];
                        right[r][k] -= sub;
                    }
                }
                if !left[r][col].is_zero() {
                    done = false; // remainder left; next round shrinks it
                }
            }
            if done {
                pivot_rows.push(pivot);
                free.retain(|&r| r != pivot);
                break;
            }
        }
    }

    let mut basis: Vec<Vec<BigInt>> = free
        .into_iter()
        .filter(|&r| left[r].iter().all(BigInt::is_zero))
        .map(|r| std::mem::take(&mut right[r]))
        .collect();
    // Canonical sign (first nonzero entry positive) keeps the output
    // deterministic; the completion adds both orientations anyway.
    for v in &mut basis {
        if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.sign() == Sign::Minus) {
            for x in v.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }
    basis.sort_by(|x, y| lex_cmp(x, y));
    basis
}

// Stored completion element with folded sign masks for fast prefiltering.
struct Elem {
    v: Vec<BigInt>,
    pos: u64,
    neg: u64,
    norm: BigInt,
}

fn one_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(BigInt::abs).sum()
}

fn masks(v: &[BigInt]) -> (u64, u64) {
    let mut pos = 0u64;
    let mut neg = 0u64;
    for (k, x) in v.iter().enumerate() {
        match x.sign() {
            Sign::Plus => pos |= 1 << (k % 64),
            Sign::Minus => neg |= 1 << (k % 64),
            Sign::NoSign => {}
        }
    }
    (pos, neg)
}

// Reduce `v` to a conformal normal form: subtract any stored `h ⊑ v` until
// none applies. Returns None when `v` reduces to zero. Each subtraction
// strictly shrinks the 1-norm, so this terminates.
fn normal_form(mut v: Vec<BigInt>, elems: &[Elem]) -> Option<Vec<BigInt>> {
    let (mut pos, mut neg) = masks(&v);
    'outer: loop {
        for e in elems {
            // h ⊑ v needs supp⁺(h) ⊆ supp⁺(v), supp⁻(h) ⊆ supp⁻(v); the
            // folded masks give a cheap necessary condition.
            if e.pos & !pos != 0 || e.neg & !neg != 0 {
                continue;
            }
            if conformal_leq(&e.v, &v) {
                for (x, h) in v.iter_mut().zip(&e.v) {
                    *x -= h;
                }
                if v.iter().all(BigInt::is_zero) {
                    return None;
                }
                let (p, n) = masks(&v);
                pos = p;
                neg = n;
                continue 'outer;
            }
        }
        return Some(v);
    }
}

/// Graver basis with default caps.
pub fn graver_basis(a: &IntMatrix) -> Result<GraverBasis, GraverError> {
    graver_basis_with(a, &GraverConfig::default())
}

/// Graver basis of `a` by completion; errors out (never truncates silently)
/// when a cap is hit.
pub fn graver_basis_with(a: &IntMatrix, cfg: &GraverConfig) -> Result<GraverBasis, GraverError> {
    assert!(a.cols() >= 1, "matrix needs at least one column");
    let start = kernel_lattice_basis(a);

    let mut elems: Vec<Elem> = Vec::new();
    // Min-heap on (|u|₁ + |v|₁, i, j): an upper bound for the candidate sum's
    // norm, so small vectors are discovered before the large sums they would
    // have reduced.
    let mut queue: BinaryHeap<Reverse<(BigInt, usize, usize)>> = BinaryHeap::new();
    let push = |elems: &mut Vec<Elem>,
                queue: &mut BinaryHeap<Reverse<(BigInt, usize, usize)>>,
                v: Vec<BigInt>| {
        let idx = elems.len();
        let (pos, neg) = masks(&v);
        let norm = one_norm(&v);
        for i in 0..idx {
            queue.push(Reverse((&elems[i].norm + &norm, i, idx)));
        }
        elems.push(Elem { v, pos, neg, norm });
    };

    for v in start {
        let neg: Vec<BigInt> = v.iter().map(|x| -x).collect();
        push(&mut elems, &mut queue, v);
        push(&mut elems, &mut queue, neg);
    }
    if elems.len() > cfg.max_basis {
        return Err(GraverError::BasisTooLarge { limit: cfg.max_basis });
    }

    let mut pairs_done: u64 = 0;
    while let Some(Reverse((_, i, j))) = queue.pop() {
        pairs_done += 1;
        if pairs_done > cfg.max_pairs {
            return Err(GraverError::PairCapExceeded { limit: cfg.max_pairs });
        }
        // Sign-compatible pairs sum to something reducible by both parts;
        // only pairs with opposite signs somewhere can produce new vectors.
        let (a_e, b_e) = (&elems[i], &elems[j]);
        if a_e.pos & b_e.neg == 0 && a_e.neg & b_e.pos == 0 {
            continue;
        }
        let sum: Vec<BigInt> = a_e.v.iter().zip(&b_e.v).map(|(x, y)| x + y).collect();
        if sum.iter().all(BigInt::is_zero) {
            continue;
        }
        if let Some(r) = normal_form(sum, &elems) {
            let neg: Vec<BigInt> = r.iter().map(|x| -x).collect();
            push(&mut elems, &mut queue, r);
            push(&mut elems, &mut queue, neg);
            if elems.len() > cfg.max_basis {
                return Err(GraverError::BasisTooLarge { limit: cfg.max_basis });
            }
        }
    }

    // Sieve: keep the ⊑-minimal vectors. Duplicates cannot occur (a copy of a
    // stored vector reduces to zero), so "some other stored u ⊑ v" is exact.
    let mut vectors: Vec<Vec<BigInt>> = Vec::new();
    for (k, e) in elems.iter().enumerate() {
        let minimal = elems.iter().enumerate().all(|(k2, other)| {
            k2 == k
                || other.pos & !e.pos != 0
                || other.neg & !e.neg != 0
                || !conformal_leq(&other.v, &e.v)
        });
        if minimal {
            vectors.push(e.v.clone());
        }
    }
    vectors.sort_by(|x, y| lex_cmp(x, y));

    debug_assert!(vectors.iter().all(|v| a.mul_vec(v).iter().all(BigInt::is_zero)));
    Ok(GraverBasis { matrix: a.clone(), vectors })
}

/// Brute-force oracle: enumerate all nonzero kernel vectors with
/// `‖v‖∞ ≤ box_bound` and keep the conformally minimal ones.
///
/// Cost is `(2·box + 1)^cols`; meant for matrices with at most ~8 columns.
/// When the true basis fits inside the box (stable under growing it), the
/// result equals the Graver basis.
pub fn graver_oracle(a: &IntMatrix, box_bound: u32) -> Vec<Vec<BigInt>> {
    let cols = a.cols();
    let width = 2 * box_bound as u64 + 1;
    let total = width.checked_pow(cols as u32).expect("oracle box overflow");
    assert!(total <= 500_000_000, "oracle enumeration too large: {total} points");

    let b = box_bound as i64;
    let mut kernel: Vec<Vec<BigInt>> = Vec::new();
    let mut counters = vec![-b; cols];
    loop {
        if counters.iter().any(|&x| x != 0) {
            let v: Vec<BigInt> = counters.iter().map(|&x| BigInt::from(x)).collect();
            if a.mul_vec(&v).iter().all(BigInt::is_zero) {
                kernel.push(v);
            }
        }
        // odometer increment
        let mut k = cols;
        loop {
            if k == 0 {
                let mut out: Vec<Vec<BigInt>> = kernel
                    .iter()
                    .filter(|v| is_conformally_minimal(v, &kernel))
                    .cloned()
                    .collect();
                out.sort_by(|x, y| lex_cmp(x, y));
                return out;
            }
            k -= 1;
            if counters[k] < b {
                counters[k] += 1;
                break;
            }
            counters[k] = -b;
        }
    }
}

/// Cache of computed bases keyed by the exact matrix. Bases are immutable and
/// cheap to share; repeated solves of systems with identical effective
/// matrices skip recomputation.
#[derive(Debug, Default)]
pub struct GraverCache {
    map: Mutex<HashMap<IntMatrix, Arc<GraverBasis>>>,
}

impl GraverCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(
        &self,
        a: &IntMatrix,
        cfg: &GraverConfig,
    ) -> Result<Arc<GraverBasis>, GraverError> {
        if let Some(b) = self.map.lock().unwrap().get(a) {
            return Ok(b.clone());
        }
        // Computed outside the lock; concurrent duplicate work is harmless
        // and the first finisher wins the slot.
        let b = Arc::new(graver_basis_with(a, cfg)?);
        let mut map = self.map.lock().unwrap();
        Ok(map.entry(a.clone()).or_insert(b).clone())
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::bi;

    fn vecs(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        let mut out: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&v| bi(v)).collect()).collect();
        out.sort_by(|a, b| lex_cmp(a, b));
        out
    }

    #[test]
    fn kernel_basis_spans_and_annihilates() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1]]);
        let basis = kernel_lattice_basis(&a);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(a.mul_vec(v).iter().all(BigInt::is_zero));
        }
        let a2 = IntMatrix::from_i64(&[&[1, 2]]);
        assert_eq!(kernel_lattice_basis(&a2), vecs(&[&[2, -1]]));
    }

    #[test]
    fn kernel_of_injective_matrix_is_empty() {
        let id = IntMatrix::identity(2);
        assert!(kernel_lattice_basis(&id).is_empty());
        assert!(graver_basis(&id).unwrap().vectors().is_empty());
    }

    #[test]
    fn conformal_order_examples() {
        assert!(conformal_leq(&[bi(1), bi(-1)], &[bi(2), bi(-2)]));
        assert!(!conformal_leq(&[bi(1), bi(-1)], &[bi(1), bi(1)]));
        assert!(conformal_leq(&[bi(0), bi(-1)], &[bi(3), bi(-2)]));
        assert!(!conformal_leq(&[bi(2), bi(0)], &[bi(1), bi(0)]));
    }

    #[test]
    fn minimality_check_examples() {
        let basis = vec![vec![bi(1), bi(-1)]];
        assert!(!is_conformally_minimal(&[bi(2), bi(-2)], &basis));
        assert!(is_conformally_minimal(&[bi(1), bi(-1)], &[]));
        let basis2 = vec![vec![bi(1), bi(-1), bi(0)]];
        assert!(is_conformally_minimal(&[bi(1), bi(1), bi(-2)], &basis2));
    }

    #[test]
    fn fixture_one_one() {
        let a = IntMatrix::from_i64(&[&[1, 1]]);
        let basis = graver_basis(&a).unwrap();
        assert_eq!(basis.vectors(), &vecs(&[&[1, -1], &[-1, 1]])[..]);
        assert_eq!(graver_oracle(&a, 1), vecs(&[&[1, -1], &[-1, 1]]));
    }

    #[test]
    fn fixture_one_two() {
        let a = IntMatrix::from_i64(&[&[1, 2]]);
        let basis = graver_basis(&a).unwrap();
        assert_eq!(basis.vectors(), &vecs(&[&[2, -1], &[-2, 1]])[..]);
    }

    #[test]
    fn fixture_two_three() {
        let a = IntMatrix::from_i64(&[&[2, 3]]);
        assert_eq!(graver_basis(&a).unwrap().vectors(), &vecs(&[&[3, -2], &[-3, 2]])[..]);
        assert_eq!(graver_oracle(&a, 3), vecs(&[&[3, -2], &[-3, 2]]));
    }

    #[test]
    fn fixture_ones_triple() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1]]);
        let expect = vecs(&[
            &[1, -1, 0],
            &[-1, 1, 0],
            &[1, 0, -1],
            &[-1, 0, 1],
            &[0, 1, -1],
            &[0, -1, 1],
        ]);
        assert_eq!(graver_basis(&a).unwrap().vectors(), &expect[..]);
        assert_eq!(graver_oracle(&a, 1), expect);
    }

    #[test]
    fn basis_matches_oracle_on_mixed_sign_matrix() {
        let a = IntMatrix::from_i64(&[&[1, -1, 2], &[0, 2, -1]]);
        let basis = graver_basis(&a).unwrap();
        // Oracle stable under box growth -> it is the true basis.
        let o4 = graver_oracle(&a, 4);
        let o5 = graver_oracle(&a, 5);
        assert_eq!(o4, o5);
        assert_eq!(basis.vectors(), &o4[..]);
    }

    #[test]
    fn basis_is_negation_closed_and_mutually_minimal() {
        let a = IntMatrix::from_i64(&[&[3, -1, 1, 2]]);
        let basis = graver_basis(&a).unwrap();
        let vs = basis.vectors();
        assert!(!vs.is_empty());
        for v in vs {
            let neg: Vec<BigInt> = v.iter().map(|x| -x).collect();
            assert!(vs.contains(&neg), "negation missing for {v:?}");
            assert!(is_conformally_minimal(v, vs));
            assert!(a.mul_vec(v).iter().all(BigInt::is_zero));
        }
    }

    #[test]
    fn pair_sums_reduce_to_zero_at_fixpoint() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1], &[1, 2, 3]]);
        let basis = graver_basis(&a).unwrap();
        let elems: Vec<Elem> = basis
            .vectors()
            .iter()
            .map(|v| {
                let (pos, neg) = masks(v);
                Elem { v: v.clone(), pos, neg, norm: one_norm(v) }
            })
            .collect();
        for x in basis.vectors() {
            for y in basis.vectors() {
                let sum: Vec<BigInt> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                if sum.iter().all(BigInt::is_zero) {
                    continue;
                }
                assert!(normal_form(sum, &elems).is_none());
            }
        }
    }

    #[test]
    fn caps_produce_explicit_errors() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1]]);
        let tiny = GraverConfig { max_basis: 2, max_pairs: 1_000_000 };
        assert!(matches!(
            graver_basis_with(&a, &tiny),
            Err(GraverError::BasisTooLarge { limit: 2 })
        ));
        let tiny2 = GraverConfig { max_basis: 50_000, max_pairs: 1 };
        assert!(matches!(
            graver_basis_with(&a, &tiny2),
            Err(GraverError::PairCapExceeded { limit: 1 })
        ));
    }

    #[test]
    fn text_export_one_vector_per_line() {
        let a = IntMatrix::from_i64(&[&[1, 1]]);
        let basis = graver_basis(&a).unwrap();
        assert_eq!(basis.to_text(), "-1 1\n1 -1");
    }

    #[test]
    fn cache_reuses_computed_bases() {
        let cache = GraverCache::new();
        let a = IntMatrix::from_i64(&[&[1, 1]]);
        let cfg = GraverConfig::default();
        let b1 = cache.get_or_compute(&a, &cfg).unwrap();
        let b2 = cache.get_or_compute(&a, &cfg).unwrap();
        assert!(Arc::ptr_eq(&b1, &b2));
        assert_eq!(cache.len(), 1);
    }
}
