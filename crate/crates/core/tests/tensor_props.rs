use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use subtensor_lab::stats::{mean, variance};
use subtensor_lab::tensor::{
    ave_subtensor, for_each_product, partition_block, prefix, sum_subtensor, ConstantTensor,
    DenseTensor, PrefixView,
};
use subtensor_lab::{make_source, Error, Selection, StreamKey, Tensor};

fn sample(n: usize, key: u128, count: usize) -> Vec<f64> {
    let src = make_source(n, 2, StreamKey(key)).unwrap();
    (0..count)
        .map(|t| src.entry(&[t % n + 1, t / n % n + 1]).unwrap())
        .collect()
}

#[test]
fn million_entry_moments() {
    let xs = sample(1000, 0x5eed, 1_000_000);
    let (m, v) = (mean(&xs), variance(&xs));
    assert!(m.abs() <= 0.01, "mean {m}");
    assert!((0.995..=1.005).contains(&v), "variance {v}");
    let s = xs.len() as f64;
    assert!(m.abs() <= 3.0 / s.sqrt());
    assert!((v - 1.0).abs() <= 3.0 * (2.0 / s).sqrt());
}

/// One-sample Kolmogorov–Smirnov statistic against the standard normal.
fn ks_statistic(mut xs: Vec<f64>) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn entries_pass_ks_at_one_percent() {
    // Asymptotic 1% critical value 1.628/√m.
    for key in [1u128, 2, 3] {
        let xs = sample(400, key, 100_000);
        let d = ks_statistic(xs);
        assert!(d < 1.628 / (100_000f64).sqrt(), "key {key}: D = {d}");
    }
}

#[test]
fn three_way_entries_pass_ks() {
    let src = make_source(50, 3, StreamKey(11)).unwrap();
    let mut xs = Vec::new();
    for_each_product(&[&(1..=50).collect::<Vec<_>>(), &(1..=50).collect::<Vec<_>>(), &(1..=40).collect::<Vec<_>>()], |idx| {
        xs.push(src.entry(idx).unwrap())
    });
    assert_eq!(xs.len(), 100_000);
    assert!(ks_statistic(xs) < 1.628 / (100_000f64).sqrt());
}

#[test]
fn distinct_keys_disagree() {
    let a = make_source(100, 2, StreamKey(1)).unwrap();
    let b = make_source(100, 2, StreamKey(2)).unwrap();
    let mut differ = 0;
    for i in 1..=100 {
        for j in 1..=100 {
            if a.entry(&[i, j]).unwrap().to_bits() != b.entry(&[i, j]).unwrap().to_bits() {
                differ += 1;
            }
        }
    }
    assert!(differ >= 9900);
}

#[test]
fn neighbouring_entries_uncorrelated() {
    let src = make_source(1000, 2, StreamKey(99)).unwrap();
    let pairs: Vec<(f64, f64)> = (1..=1000)
        .flat_map(|i| (1..=100).map(move |j| (i, j)))
        .map(|(i, j)| (src.entry(&[i, j]).unwrap(), src.entry(&[i, j + 1]).unwrap()))
        .collect();
    let m = pairs.len() as f64;
    let corr = pairs.iter().map(|(x, y)| x * y).sum::<f64>() / m;
    assert!(corr.abs() < 4.0 / m.sqrt(), "lag-one correlation {corr}");
}

#[test]
fn dimension_and_range_errors() {
    assert!(matches!(make_source(0, 2, StreamKey(1)), Err(Error::InvalidDimension(_))));
    assert!(matches!(make_source(3, 0, StreamKey(1)), Err(Error::InvalidDimension(_))));
    let src = make_source(5, 2, StreamKey(1)).unwrap();
    assert!(matches!(src.entry(&[6, 1]), Err(Error::IndexOutOfRange { .. })));
    assert!(src.entry(&[0, 1]).is_err());
    assert!(src.entry(&[1, 1, 1]).is_err());
}

#[test]
fn small_examples() {
    let ones = ConstantTensor::new(5, 2, 1.0).unwrap();
    let sel = Selection::new(vec![vec![1, 2], vec![3, 4]]).unwrap();
    assert_eq!(sum_subtensor(&ones, &sel).unwrap(), 4.0);
    assert_eq!(ave_subtensor(&ones, &sel).unwrap(), 1.0);
    let m = DenseTensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let single = Selection::new(vec![vec![1], vec![2]]).unwrap();
    assert_eq!(sum_subtensor(&m, &single).unwrap(), 2.0);
    let all = Selection::new(vec![vec![1, 2], vec![1, 2]]).unwrap();
    assert_eq!(ave_subtensor(&m, &all).unwrap(), 2.5);
    let wide = Selection::new(vec![vec![1, 3], vec![1, 2]]).unwrap();
    assert!(sum_subtensor(&m, &wide).is_err());
}

#[test]
fn prefix_examples() {
    let src = make_source(10, 2, StreamKey(4)).unwrap();
    assert_eq!(prefix(&src, 3, 3).unwrap().bound(), 10);
    let v = prefix(&src, 1, 3).unwrap();
    assert_eq!(v.bound(), 3);
    assert!(v.entry(&[4, 1]).is_err());
    assert_eq!(v.entry(&[3, 3]).unwrap().to_bits(), src.entry(&[3, 3]).unwrap().to_bits());
    assert!(prefix(&src, 0, 3).is_err());
    assert!(prefix(&src, 4, 3).is_err());
}

#[test]
fn block_examples() {
    assert_eq!(partition_block(2, 10, 3).unwrap(), 4..=6);
    let union: Vec<usize> = (1..=3).flat_map(|i| partition_block(i, 10, 3).unwrap()).collect();
    assert_eq!(union, (1..=9).collect::<Vec<_>>());
    for i in 1..=7 {
        assert_eq!(partition_block(i, 7, 7).unwrap(), i..=i);
    }
    assert!(partition_block(0, 10, 3).is_err());
    assert!(partition_block(4, 10, 3).is_err());
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k..=n)
        .flat_map(|last| {
            combinations(last - 1, k - 1).into_iter().map(move |mut c| {
                c.push(last);
                c
            })
        })
        .collect()
}

/// Nested-loop sum over every tuple, written without the library's product walker.
fn naive_sum<T: Tensor>(t: &T, sets: &[Vec<usize>]) -> f64 {
    let p = sets.len();
    let k = sets[0].len();
    let mut total = 0.0;
    for flat in 0..k.pow(p as u32) {
        let mut rest = flat;
        let idx: Vec<usize> = (0..p)
            .map(|s| {
                let i = sets[s][rest % k];
                rest /= k;
                i
            })
            .collect();
        total += t.entry(&idx).unwrap();
    }
    total
}

#[test]
fn exhaustive_sum_oracle() {
    for p in 1..=3 {
        for n in 1..=6 {
            let src = make_source(n, p, StreamKey((n * 10 + p) as u128)).unwrap();
            for k in 1..=3.min(n) {
                let combos = combinations(n, k);
                let mut checked = 0;
                let mut choice = vec![0usize; p];
                loop {
                    let sets: Vec<Vec<usize>> = choice.iter().map(|&c| combos[c].clone()).collect();
                    let sel = Selection::new(sets.clone()).unwrap();
                    let got = sum_subtensor(&src, &sel).unwrap();
                    let want = naive_sum(&src, &sets);
                    assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "n={n} k={k} p={p}");
                    checked += 1;
                    let mut c = 0;
                    while c < p {
                        choice[c] += 1;
                        if choice[c] < combos.len() {
                            break;
                        }
                        choice[c] = 0;
                        c += 1;
                    }
                    if c == p {
                        break;
                    }
                }
                assert_eq!(checked, combos.len().pow(p as u32));
            }
        }
    }
}

#[test]
fn average_is_sum_over_volume() {
    let src = make_source(30, 2, StreamKey(8)).unwrap();
    let mut rng = StreamKey(9).sequence();
    for _ in 0..20 {
        let sel = Selection::new(vec![rng.subset(1, 30, 4), rng.subset(1, 30, 4)]).unwrap();
        assert_eq!(ave_subtensor(&src, &sel).unwrap(), sum_subtensor(&src, &sel).unwrap() / 16.0);
    }
}

#[test]
fn dense_roundtrip_of_lazy_source() {
    let src = make_source(6, 3, StreamKey(21)).unwrap();
    let dense = src.materialize().unwrap();
    for_each_product(&[&[1, 4, 6], &[2, 3], &[5, 6]], |idx| {
        assert_eq!(dense.entry(idx).unwrap().to_bits(), src.entry(idx).unwrap().to_bits());
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permuted_replay_is_bit_identical(key in any::<u128>(), seed in any::<u64>()) {
        let src = make_source(40, 2, StreamKey(key)).unwrap();
        let idx: Vec<[usize; 2]> = (0..200).map(|t| [t % 40 + 1, t * 7 % 40 + 1]).collect();
        let first: Vec<u64> = idx.iter().map(|i| src.entry(i).unwrap().to_bits()).collect();
        let mut order: Vec<usize> = (0..idx.len()).collect();
        let mut rng = StreamKey::from_seed(seed).sequence();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.below(i as u64 + 1) as usize);
        }
        for &o in &order {
            prop_assert_eq!(src.entry(&idx[o]).unwrap().to_bits(), first[o]);
        }
    }

    #[test]
    fn prefix_view_is_transparent_inside(key in any::<u128>(), bound in 1usize..20, i in 1usize..20, j in 1usize..20) {
        let src = make_source(20, 2, StreamKey(key)).unwrap();
        let view = PrefixView::new(&src, bound).unwrap();
        let got = view.entry(&[i, j]);
        if i <= bound && j <= bound {
            prop_assert_eq!(got.unwrap().to_bits(), src.entry(&[i, j]).unwrap().to_bits());
        } else {
            prop_assert!(got.is_err());
        }
    }

    #[test]
    fn blocks_are_disjoint_and_cover(n in 1usize..200, k_raw in 1usize..200) {
        let k = 1 + k_raw % n;
        let mut seen = Vec::new();
        for i in 1..=k {
            let b = partition_block(i, n, k).unwrap();
            prop_assert_eq!(b.clone().count(), n / k);
            seen.extend(b);
        }
        prop_assert_eq!(seen, (1..=k * (n / k)).collect::<Vec<_>>());
    }

    #[test]
    fn sum_ignores_set_order(key in any::<u128>(), seed in any::<u64>()) {
        let src = make_source(25, 3, StreamKey(key)).unwrap();
        let mut rng = StreamKey::from_seed(seed).sequence();
        let sets: Vec<Vec<usize>> = (0..3).map(|_| rng.subset(1, 25, 4)).collect();
        let reversed: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().rev().copied().collect()).collect();
        let a = sum_subtensor(&src, &Selection::new(sets).unwrap()).unwrap();
        let b = sum_subtensor(&src, &Selection::new(reversed).unwrap()).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn selections_validate(sets in proptest::collection::vec(proptest::collection::vec(0usize..12, 3), 2)) {
        let distinct = sets.iter().all(|s| {
            let mut t = s.clone();
            t.sort_unstable();
            t.dedup();
            t.len() == s.len() && t[0] >= 1
        });
        prop_assert_eq!(Selection::new(sets).is_ok(), distinct);
    }
}
