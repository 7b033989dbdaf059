//! Randomized invariant checks: Chow structure, group equivariance,
//! canonical forms, orbit sizes against brute force, store round-trips and
//! shard-merge determinism.

use proptest::prelude::*;

use puf_entropy::group::{orbit_size, GroupElement};
use puf_entropy::oracle::expand_orbit;
use puf_entropy::puf::{
    canonicalize_weights, chow, chow_naive, eval, is_canonical, response_vector, Challenge,
    ChowVector, ClassKey, WeightVector,
};
use puf_entropy::sampler::{merge, run, run_shard, SamplerConfig, WeightDistribution};
use puf_entropy::store;

fn weights(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        (0.01f64..10.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m }),
        n,
    )
}

/// Permutation from random priorities plus random signs.
fn group_element(n: usize) -> impl Strategy<Value = GroupElement> {
    (
        prop::collection::vec(any::<u32>(), n),
        prop::collection::vec(any::<bool>(), n),
    )
        .prop_map(move |(priorities, flips)| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by_key(|&i| (priorities[i], i));
            let signs = flips.iter().map(|&f| if f { -1 } else { 1 }).collect();
            GroupElement::new(perm, signs).unwrap()
        })
}

fn wv(w: &[f64]) -> WeightVector {
    WeightVector::new(w.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn chow_entries_are_even_and_bounded(w in weights(2..=8)) {
        let p = match chow(&wv(&w)) {
            Ok(p) => p,
            Err(_) => return Ok(()), // zero dot: resampled upstream by contract
        };
        let bound = 1i64 << (w.len() - 1);
        for &v in p.entries() {
            prop_assert_eq!(v % 2, 0);
            prop_assert!(v.abs() <= bound);
        }
    }

    #[test]
    fn chow_respects_weight_signs_and_order(w in weights(1..=8)) {
        let p = match chow(&wv(&w)) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let p = p.entries();
        for i in 0..w.len() {
            if w[i] >= 0.0 {
                prop_assert!(p[i] >= 0, "w[{i}]={} but p[{i}]={}", w[i], p[i]);
            } else {
                prop_assert!(p[i] <= 0, "w[{i}]={} but p[{i}]={}", w[i], p[i]);
            }
            for j in 0..w.len() {
                if w[i] <= w[j] {
                    prop_assert!(p[i] <= p[j]);
                }
            }
        }
    }

    #[test]
    fn chow_commutes_with_the_group_action(
        (w, g) in weights(1..=6).prop_flat_map(|w| {
            let n = w.len();
            (Just(w), group_element(n))
        })
    ) {
        let w = wv(&w);
        let p = match chow(&w) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let moved = chow(&g.act(&w)).expect("permuting and flipping signs cannot zero a dot");
        prop_assert_eq!(moved, g.act_chow(&p));
    }

    #[test]
    fn canonical_form_is_reachable_idempotent_and_unique(
        (w, g) in weights(1..=6).prop_flat_map(|w| {
            let n = w.len();
            (Just(w), group_element(n))
        })
    ) {
        let w = wv(&w);
        let canon = canonicalize_weights(&w);
        let twice = canonicalize_weights(&canon);
        prop_assert_eq!(twice.as_slice(), canon.as_slice());
        let p_canon = match chow(&canon) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        prop_assert!(is_canonical(&p_canon));
        // the class key is invariant over the whole orbit and equals the
        // canonical Chow vector
        let p = match chow(&w) { Ok(p) => p, Err(_) => return Ok(()) };
        let key = ClassKey::from_chow(&p);
        prop_assert_eq!(key.entries(), p_canon.entries());
        let p_moved = chow(&g.act(&w)).unwrap();
        prop_assert_eq!(ClassKey::from_chow(&p_moved), key);
    }

    #[test]
    fn half_space_sum_equals_full_definition(w in weights(1..=8)) {
        let w = wv(&w);
        let n = w.n();
        let p = match chow(&w) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        // p = sum over {c : c_1 = +1} of f(c) * c, by self-duality
        let mut half_sum = vec![0i64; n];
        for j in 0..1u32 << (n - 1) {
            let c = Challenge::new(n, j << 1).unwrap();
            let f = i64::from(eval(&w, &c).unwrap());
            for (i, hi) in half_sum.iter_mut().enumerate() {
                *hi += f * i64::from(c.component(i));
            }
        }
        prop_assert_eq!(p.entries(), half_sum.as_slice());
        prop_assert_eq!(p, chow_naive(&w).unwrap());
    }

    #[test]
    fn gray_walk_matches_naive_reevaluation(w in weights(1..=10)) {
        let w = wv(&w);
        match (chow(&w), chow_naive(&w)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "paths disagree on zero-dot: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn orbit_size_matches_brute_force_partition(w in weights(1..=4)) {
        let w = wv(&w);
        let p = match chow(&w) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let key = ClassKey::from_chow(&p);
        let orbit = expand_orbit(&response_vector(&w).unwrap());
        prop_assert_eq!(orbit.len() as u128, orbit_size(&key));
    }

    #[test]
    fn save_load_round_trips(
        n in 1usize..=5,
        seed in any::<u64>(),
        rounds in 1u64..=512,
        poissonized in any::<bool>(),
    ) {
        let cfg = SamplerConfig {
            n,
            rounds,
            seed,
            shards: 1,
            distribution: WeightDistribution::Gaussian,
            poissonized,
        };
        let map = run(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pcm");
        store::save(&map, &path).unwrap();
        prop_assert_eq!(store::load(&path).unwrap(), map);
    }

    #[test]
    fn sharded_runs_merge_deterministically(
        n in 1usize..=5,
        seed in any::<u64>(),
        rounds in 1u64..=2048,
        shards in 1u32..=5,
    ) {
        let cfg = SamplerConfig {
            n,
            rounds,
            seed,
            shards,
            distribution: WeightDistribution::Gaussian,
            poissonized: false,
        };
        let whole = run(&cfg).unwrap();
        let parts: Vec<_> = (0..shards).map(|k| run_shard(&cfg, k).unwrap()).collect();
        prop_assert_eq!(&merge(&parts).unwrap(), &whole);
        // and the counts do not depend on the shard count at all
        let single = run(&SamplerConfig { shards: 1, ..cfg }).unwrap();
        prop_assert_eq!(single.counts(), whole.counts());
    }

    #[test]
    fn is_canonical_matches_definition(p in prop::collection::vec(-16i64..=16, 1..=6)) {
        let sorted_nonneg = p.windows(2).all(|w| w[0] >= w[1]) && *p.last().unwrap() >= 0;
        prop_assert_eq!(is_canonical(&ChowVector::new(p)), sorted_nonneg);
    }
}
