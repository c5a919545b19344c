use proptest::prelude::*;
use wtahash::eval::{overlap_accuracy, NeighborTable};
use wtahash::wta::{wta, wta_indices};

fn distinct_vec() -> impl Strategy<Value = Vec<f32>> {
    prop::collection::hash_set(-1000i32..1000, 1..40)
        .prop_map(|s| s.into_iter().map(|v| v as f32 * 0.25).collect())
}

proptest! {
    #[test]
    fn cardinality_and_dominance(x in prop::collection::vec(-100f32..100.0, 1..50), frac in 0.0f64..1.0) {
        let k = 1 + ((x.len() - 1) as f64 * frac) as usize;
        let y = wta(&x, k).unwrap();
        prop_assert_eq!(y.iter().filter(|&&b| b == 1).count(), k);
        let min_on = x.iter().zip(&y).filter(|(_, &b)| b == 1).map(|(v, _)| *v).fold(f32::INFINITY, f32::min);
        let max_off = x.iter().zip(&y).filter(|(_, &b)| b == 0).map(|(v, _)| *v).fold(f32::NEG_INFINITY, f32::max);
        prop_assert!(min_on >= max_off);
    }

    #[test]
    fn positive_scaling_keeps_winners(x in distinct_vec(), alpha in 0.01f32..100.0, frac in 0.0f64..1.0) {
        let k = 1 + ((x.len() - 1) as f64 * frac) as usize;
        let scaled: Vec<f32> = x.iter().map(|v| v * alpha).collect();
        prop_assert_eq!(wta_indices(&x, k).unwrap(), wta_indices(&scaled, k).unwrap());
    }

    #[test]
    fn permutation_equivariance(x in distinct_vec(), seed in any::<u64>(), frac in 0.0f64..1.0) {
        let k = 1 + ((x.len() - 1) as f64 * frac) as usize;
        let mut perm: Vec<usize> = (0..x.len()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted: Vec<f32> = perm.iter().map(|&p| x[p]).collect();
        let y = wta(&x, k).unwrap();
        let yp = wta(&permuted, k).unwrap();
        let expected: Vec<u8> = perm.iter().map(|&p| y[p]).collect();
        prop_assert_eq!(yp, expected);
    }

    #[test]
    fn overlap_is_symmetric(a in prop::collection::vec(0u32..30, 12), b in prop::collection::vec(0u32..30, 12)) {
        let dedup = |v: Vec<u32>| -> Vec<u32> {
            let mut seen = Vec::new();
            for x in v { if !seen.contains(&x) { seen.push(x); } }
            while seen.len() < 12 { let next = 30 + seen.len() as u32; seen.push(next); }
            seen.truncate(12);
            seen
        };
        let ta = NeighborTable::new(3, 4, dedup(a)).unwrap();
        let tb = NeighborTable::new(3, 4, dedup(b)).unwrap();
        prop_assert_eq!(overlap_accuracy(&ta, &tb).unwrap(), overlap_accuracy(&tb, &ta).unwrap());
    }
}
