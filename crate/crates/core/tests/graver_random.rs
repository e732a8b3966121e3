//! Randomized checks that the computed Graver basis really is a universal
//! test set: greedy augmentation from any fiber point must reach the fiber
//! optimum, for arbitrary cost vectors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use wbp_core::augment::graver_best_step;
use wbp_core::graver::{conformal_leq, graver_basis};
use wbp_core::num::bi;
use wbp_core::IntMatrix;

fn small_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=2, 2usize..=4).prop_flat_map(|(rows, cols)| {
        prop::collection::vec(-3i64..=3, rows * cols)
            .prop_map(move |data| {
                IntMatrix::from_rows(
                    data.chunks(cols).map(|r| r.iter().map(|&v| bi(v)).collect()).collect(),
                )
            })
    })
}

fn mul(a: &IntMatrix, x: &[BigInt]) -> Vec<BigInt> {
    a.mul_vec(x)
}

/// All points of `[0, width]^cols` with `A x = rhs`.
fn fiber(a: &IntMatrix, rhs: &[BigInt], width: i64) -> Vec<Vec<BigInt>> {
    let cols = a.cols();
    let mut out = Vec::new();
    let mut x = vec![0i64; cols];
    loop {
        let point: Vec<BigInt> = x.iter().map(|&v| bi(v)).collect();
        if mul(a, &point) == rhs {
            out.push(point);
        }
        let mut k = cols;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            x[k] += 1;
            if x[k] <= width {
                break;
            }
            x[k] = 0;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn basis_vectors_lie_in_the_kernel_and_are_incomparable(a in small_matrix()) {
        let basis = graver_basis(&a).unwrap();
        let zero = vec![BigInt::zero(); a.rows()];
        for v in basis.vectors() {
            prop_assert!(v.iter().any(|c| !c.is_zero()));
            prop_assert_eq!(mul(&a, v), zero.clone());
        }
        for u in basis.vectors() {
            for v in basis.vectors() {
                if u != v {
                    prop_assert!(!conformal_leq(u, v), "{u:?} under {v:?}");
                }
            }
        }
    }

    #[test]
    fn augmentation_reaches_the_fiber_optimum_from_everywhere(
        a in small_matrix(),
        seed in prop::collection::vec(0i64..=3, 4),
        cost_raw in prop::collection::vec(-5i64..=5, 4),
    ) {
        let cols = a.cols();
        let width = 3i64;
        let z: Vec<BigInt> = seed[..cols].iter().map(|&v| bi(v)).collect();
        let rhs = mul(&a, &z);
        let points = fiber(&a, &rhs, width);
        prop_assert!(!points.is_empty());

        let cost: Vec<BigRational> =
            cost_raw[..cols].iter().map(|&v| BigRational::from(bi(v))).collect();
        let score = |x: &[BigInt]| -> BigRational {
            x.iter().zip(&cost).map(|(v, c)| BigRational::from(v.clone()) * c).sum()
        };
        let best = points.iter().map(|x| score(x)).max().unwrap();

        let basis = graver_basis(&a).unwrap();
        let lower = vec![BigInt::zero(); cols];
        let upper = vec![bi(width); cols];
        for start in &points {
            let mut x = start.clone();
            while let Some((g, alpha, _)) = graver_best_step(&x, &basis, &cost, &lower, &upper) {
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi += gi * &alpha;
                }
            }
            prop_assert_eq!(score(&x), best.clone(), "stuck at {:?} from {:?}", x, start);
        }
    }
}
