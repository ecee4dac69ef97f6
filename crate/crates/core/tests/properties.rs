use std::collections::BTreeMap;

use gpfree_core::geoprog::g_formula_value;
use gpfree_core::rational::inv_pow;
use gpfree_core::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ilog_brackets_n(s in 2u64..=1000, n in 1u64..=u64::MAX, b_frac in 0.0f64..1.0) {
        let b = ((n as f64 * b_frac) as u64).clamp(1, n);
        let i = ilog(s, n, b).unwrap();
        let lo = (b as u128) * (s as u128).pow(i);
        prop_assert!(lo <= n as u128);
        let hi = lo.checked_mul(s as u128);
        prop_assert!(hi.is_none_or(|h| h > n as u128));
    }

    #[test]
    fn ilog_near_overflow(s in 2u64..=16, back in 0u64..1000) {
        let n = u64::MAX - back;
        let i = ilog(s, n, 1).unwrap();
        prop_assert!((s as u128).pow(i) <= n as u128);
        prop_assert!((s as u128).pow(i + 1) > n as u128);
    }

    #[test]
    fn gp_detection_matches_definition(set in proptest::collection::btree_set(1u64..200, 0..12), k in 2usize..=4, s in 2u64..=4) {
        let v: Vec<u64> = set.iter().copied().collect();
        let mut expected = false;
        for &a in &v {
            let mut q = s;
            while a * q.pow(k as u32 - 1) < 200 * 200 {
                if (1..k as u32).all(|j| set.contains(&(a * q.pow(j)))) {
                    expected = true;
                }
                q *= s;
            }
        }
        prop_assert_eq!(has_k_term_gp(&v, k, s).unwrap(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chains_partition_the_range(n in 1u64..=1_000_000, s in 2u64..=10) {
        let p = chain_partition(n, s).unwrap();
        prop_assert_eq!(p.total(), n);
        prop_assert_eq!(p.roots[0], 1);
        prop_assert!(p.roots.iter().all(|&b| b % s != 0 && b <= n));
    }
}

#[test]
fn nondivisible_count_within_s_minus_one() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        let s: u64 = rng.gen_range(2..=50);
        let den_x: i64 = rng.gen_range(1..=1000);
        let den_y: i64 = rng.gen_range(1..=1000);
        let x = BigRational::new(rng.gen_range(-1_000_000i64..1_000_000).into(), den_x.into());
        let y = &x + BigRational::new(rng.gen_range(1i64..5_000_000).into(), den_y.into());
        let count = count_nondivisible(&x, &y, s).unwrap();
        let expected = (&y - &x) * BigRational::new(BigInt::from(s - 1), BigInt::from(s));
        let err = (BigRational::from_integer(count) - expected).abs();
        assert!(err <= BigRational::from_integer(BigInt::from(s - 1)));
    }
}

#[test]
fn root_counts_agree_with_interval_counts() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let ns: Vec<u64> = (1..=300)
        .chain((0..200).map(|_| rng.gen_range(1..=100_000)))
        .chain([100_000])
        .collect();
    for s in [2u64, 3, 10] {
        for &n in &ns {
            let p = chain_partition(n, s).unwrap();
            let mut by_len: BTreeMap<u32, u64> = BTreeMap::new();
            for &l in &p.chain_lengths {
                *by_len.entry(l).or_default() += 1;
            }
            for (&ell, &count) in &by_len {
                let lo = BigRational::from_integer(n.into()) * inv_pow(s, ell as i64);
                let hi = BigRational::from_integer(n.into()) * inv_pow(s, ell as i64 - 1);
                assert_eq!(
                    count_nondivisible(&lo, &hi, s).unwrap(),
                    BigInt::from(count),
                    "n = {n}, s = {s}, ell = {ell}"
                );
            }
        }
    }
}

/// Incremental per-chain bookkeeping: going from n-1 to n only the chain
/// through n grows, so g(n) = g(n-1) + r(len) - r(len-1).
#[test]
fn grouped_formula_matches_chainwise_sum_for_all_n() {
    let table = rk_table(3, 18, &SolverConfig::default()).unwrap();
    for s in [2u64, 3] {
        let mut g = 0u64;
        let mut len: std::collections::HashMap<u64, usize> = Default::default();
        for n in 1..=100_000u64 {
            let mut b = n;
            while b % s == 0 {
                b /= s;
            }
            let l = len.entry(b).or_insert(0);
            *l += 1;
            let before = if *l == 1 {
                0
            } else {
                table.value(*l - 1).unwrap()
            };
            g = g + table.value(*l).unwrap() as u64 - before as u64;
            assert_eq!(
                g_formula_value(3, s, n, &table).unwrap(),
                g,
                "s = {s}, n = {n}"
            );
        }
    }
}

#[test]
fn direct_iteration_matches_grouped_value() {
    let table = rk_table(4, 18, &SolverConfig::default()).unwrap();
    for n in (1..=100_000u64).step_by(997).chain([100_000]) {
        let r = g_formula(4, 2, n, &table).unwrap();
        let direct: u64 = r.per_chain.unwrap().iter().map(|&(_, v)| v as u64).sum();
        assert_eq!(direct, r.value);
    }
}

#[test]
fn enclosures_nest() {
    let table = rk_table(3, 60, &SolverConfig::default()).unwrap();
    let gaps = min_inverse(&table);
    for s in [2u64, 3, 7] {
        let all: Vec<_> = (0..=gaps.len())
            .map(|m| theta_partial(3, s, &gaps, m).unwrap())
            .collect();
        for (i, coarse) in all.iter().enumerate() {
            for fine in &all[i..] {
                assert!(coarse.contains(&fine.partial));
                assert!(fine.upper() <= coarse.upper());
            }
        }
    }
}

#[test]
fn gap_sequence_structure() {
    for k in 3..=5 {
        let table = rk_table(k, 40, &SolverConfig::default()).unwrap();
        let gaps = min_inverse(&table);
        let u = gaps.u();
        assert_eq!(u[0], 1);
        assert!(u.windows(2).all(|w| w[0] < w[1]));
        for m in 1..=gaps.len() {
            assert!(gaps.get(m).unwrap() >= m);
            if let Some(max) = gaps.preimage_max(m) {
                assert_eq!(gaps.get(m + 1), Some(max + 1));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cache_round_trip(k in 2usize..=5, ell in 1usize..=30) {
        let table = rk_table(k, ell, &SolverConfig::default()).unwrap();
        let text = gpfree_core::cache::encode(&table);
        let back = gpfree_core::cache::decode(&text, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, table);
    }
}
