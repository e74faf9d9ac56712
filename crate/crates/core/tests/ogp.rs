use std::collections::HashSet;

use subtensor_lab::algorithms::{run_online, IgpOnline, Increment};
use subtensor_lab::ogp::*;
use subtensor_lab::stats::variance;
use subtensor_lab::tensor::{for_each_product, sum_subtensor};
use subtensor_lab::theory::{build_partition, scale_dn, AsymptoticParams, PartitionScheme};
use subtensor_lab::{Error, Selection, StreamKey, Tensor};

fn family(n: usize, p: usize, k: usize, depth: usize, branching: usize, key: u128) -> CorrelatedFamily {
    let scheme = PartitionScheme::uniform(p, 0.25, depth, branching).unwrap();
    let tree = ReplicaTree::new(scheme, StreamKey(key)).unwrap();
    correlated_instances(tree, n, p, k).unwrap()
}

#[test]
fn coupling_pattern_is_exact() {
    for (p, depth, branching) in [(2, 2, 2), (2, 3, 2), (3, 2, 3)] {
        let n = if p == 2 { 24 } else { 12 };
        let fam = family(n, p, 6, depth, branching, 9);
        let tree = fam.tree().clone();
        let leaves: Vec<_> = (0..fam.leaf_count()).map(|l| fam.leaf(l)).collect();
        let all: Vec<usize> = (1..=n).collect();
        let factors = vec![all.as_slice(); p];
        for u in 0..leaves.len() {
            for v in 0..leaves.len() {
                let meet = tree.meet_depth(tree.leaf(u), tree.leaf(v));
                let corner = fam.corners()[meet];
                for_each_product(&factors, |idx| {
                    let a = leaves[u].entry(idx).unwrap().to_bits();
                    let b = leaves[v].entry(idx).unwrap().to_bits();
                    let inside = idx.iter().all(|&i| i <= corner);
                    if u == v || inside {
                        assert_eq!(a, b, "leaves {u},{v} at {idx:?}");
                    } else {
                        assert_ne!(a, b, "leaves {u},{v} at {idx:?}");
                    }
                    if u != v {
                        assert_eq!(fam.driving_depth(idx) <= meet, inside);
                    }
                });
            }
        }
    }
}

#[test]
fn leaves_disagree_outside_shared_corner() {
    let fam = family(2000, 2, 8, 2, 2, 4);
    let (a, b) = (fam.leaf(0), fam.leaf(1));
    let corner = fam.corners()[1];
    let mut rng = StreamKey(5).sequence();
    let mut differ = 0;
    for _ in 0..1000 {
        let i = corner + 1 + rng.below((2000 - corner) as u64) as usize;
        let j = 1 + rng.below(2000) as usize;
        if a.entry(&[i, j]).unwrap() != b.entry(&[i, j]).unwrap() {
            differ += 1;
        }
    }
    assert!(differ >= 990);
}

#[test]
fn single_level_family_is_one_tensor() {
    let fam = family(50, 2, 5, 1, 3, 2);
    assert_eq!(fam.leaf_count(), 1);
    let root = fam.vertex_source(fam.tree().root());
    for i in 1..=50 {
        assert_eq!(fam.leaf(0).entry(&[i, 51 - i]).unwrap(), root.entry(&[i, 51 - i]).unwrap());
    }
}

#[test]
fn leaf_tensor_is_standard_normal() {
    let fam = family(400, 2, 8, 2, 2, 31);
    let leaf = fam.leaf(1);
    let xs: Vec<f64> = (0..100_000).map(|t| leaf.entry(&[t % 400 + 1, t / 400 + 1]).unwrap()).collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!(m.abs() < 3.0 / (xs.len() as f64).sqrt());
    assert!((variance(&xs) - 1.0).abs() < 3.0 * (2.0 / xs.len() as f64).sqrt());
}

#[test]
fn degenerate_grid_rejected() {
    let scheme = PartitionScheme::uniform(2, 0.25, 4, 2).unwrap();
    let tree = ReplicaTree::new(scheme, StreamKey(1)).unwrap();
    assert!(correlated_instances(tree, 3, 2, 2).is_err());
}

/// Random disjoint assignment: each coordinate deals consecutive chunks of
/// a shuffled `[n]` to the vertices in level order.
fn random_candidate(n: usize, p: usize, k: usize, depth: usize, branching: usize, key: StreamKey) -> ForbiddenCandidate {
    let scheme = PartitionScheme::uniform(p, 0.25, depth, branching).unwrap();
    let tree = ReplicaTree::new(scheme, key).unwrap();
    let mut cand = ForbiddenCandidate::new(tree.clone(), p, k).unwrap();
    let mut rng = key.sequence();
    let decks: Vec<Vec<usize>> = (0..p)
        .map(|_| {
            let mut d: Vec<usize> = (1..=n).collect();
            for i in (1..n).rev() {
                d.swap(i, rng.below(i as u64 + 1) as usize);
            }
            d
        })
        .collect();
    let mut at = 0;
    for v in tree.vertices() {
        let w = cand.shell_width(v.depth);
        cand.assign(v, decks.iter().map(|d| d[at..at + w].to_vec()).collect()).unwrap();
        at += w;
    }
    cand
}

#[test]
fn shells_tile_every_ray() {
    for p in [2, 3] {
        for seed in 0..5u128 {
            let cand = random_candidate(30, p, 6, 2, 2, StreamKey(seed));
            let tree = cand.tree().clone();
            let a = |j: usize| j as f64 / 2.0;
            for v in tree.vertices() {
                let ev = build_ev(&cand, v).unwrap();
                let want = (a(v.depth).powi(p as i32) - a(v.depth - 1).powi(p as i32)) * 6f64.powi(p as i32);
                assert_eq!(ev.len(), want.round() as usize);
            }
            for l in 0..tree.leaf_count() {
                let leaf = tree.leaf(l);
                let shells: Vec<HashSet<Vec<usize>>> = (1..=2)
                    .map(|d| build_ev(&cand, tree.ancestor(leaf, d)).unwrap().into_iter().collect())
                    .collect();
                assert!(shells[0].is_disjoint(&shells[1]));
                let mv = assemble_mv(&cand, leaf).unwrap();
                assert_eq!(mv.k().pow(p as u32), 6usize.pow(p as u32));
                let union: HashSet<Vec<usize>> = shells.iter().flatten().cloned().collect();
                let mut product = HashSet::new();
                let sets: Vec<&[usize]> = mv.sets().iter().map(Vec::as_slice).collect();
                for_each_product(&sets, |idx| {
                    product.insert(idx.to_vec());
                });
                assert_eq!(union, product);
            }
        }
    }
}

#[test]
fn level_variance_matches_shell_sizes() {
    for p in [2, 3] {
        let cand = random_candidate(60, p, 6, 3, 2, StreamKey(8));
        let tree = cand.tree().clone();
        for ell in 1..=3 {
            let total: usize = (0..tree.level_size(ell))
                .map(|o| build_ev(&cand, Vertex { depth: ell, ordinal: o }).unwrap().len())
                .sum();
            let a = |j: usize| j as f64 / 3.0;
            let want = 2f64.powi(ell as i32 - 1)
                * (a(ell).powi(p as i32) - a(ell - 1).powi(p as i32))
                * 6f64.powi(p as i32);
            assert_eq!(total, want.round() as usize);
        }
    }
}

#[test]
fn gamma_identity_and_variance() {
    let cand = random_candidate(30, 2, 6, 2, 2, StreamKey(3));
    let params = AsymptoticParams::new(30, 6, 2, 0.25).unwrap();
    let dn = scale_dn(&params).unwrap();
    let tree = cand.tree().clone();
    let leaf = tree.leaf(1);
    let shells: Vec<Vec<Vec<usize>>> = (1..=2).map(|d| build_ev(&cand, tree.ancestor(leaf, d)).unwrap()).collect();
    let mv = assemble_mv(&cand, leaf).unwrap();
    let mut gammas = Vec::new();
    for t in 0..2000u64 {
        let src = subtensor_lab::make_source(30, 2, StreamKey(0xa11).derive(&[t])).unwrap();
        let g: Vec<f64> = shells.iter().map(|e| gamma_star(&src, e, &params).unwrap()).collect();
        let sum = sum_subtensor(&src, &mv).unwrap();
        assert!(((g[0] + g[1]) * dn - sum).abs() <= 1e-9 * sum.abs().max(1.0));
        gammas.push(g[1]);
    }
    let want = shells[1].len() as f64 / (dn * dn);
    assert!((variance(&gammas) / want - 1.0).abs() < 0.1);
}

fn igp_outputs(fam: &CorrelatedFamily) -> Vec<(Selection, Vec<Increment>)> {
    (0..fam.leaf_count())
        .map(|l| run_online(&IgpOnline::default(), &fam.leaf(l), fam.k()).unwrap())
        .collect()
}

#[test]
fn online_runs_agree_on_shared_prefixes() {
    for key in 0..5u128 {
        let fam = family(2000, 2, 8, 2, 2, key);
        let tree = fam.tree().clone();
        let runs = igp_outputs(&fam);
        for u in 0..runs.len() {
            for v in 0..runs.len() {
                let corner = fam.corners()[tree.meet_depth(tree.leaf(u), tree.leaf(v))];
                for s in 1..=8 {
                    if s * 2000 / 8 <= corner {
                        assert_eq!(runs[u].1[s - 1], runs[v].1[s - 1]);
                    }
                }
            }
        }
        let outputs: Vec<Selection> = runs.into_iter().map(|r| r.0).collect();
        match outputs_to_candidate(&fam, &outputs).unwrap() {
            Extraction::Candidate(c) => assert!(c.find_collision().is_none()),
            Extraction::Violation(Violation::Collision { .. }) => {}
            Extraction::Violation(other) => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn single_vertex_extraction() {
    let fam = family(100, 2, 4, 1, 1, 6);
    let outputs: Vec<Selection> = igp_outputs(&fam).into_iter().map(|r| r.0).collect();
    let Extraction::Candidate(cand) = outputs_to_candidate(&fam, &outputs).unwrap() else {
        panic!("expected a candidate");
    };
    assert_eq!(cand.sets(fam.tree().root()).unwrap(), outputs[0].sets());
}

#[test]
fn constructed_violations() {
    let fam = family(40, 2, 4, 2, 2, 7);
    let sel = |a: [usize; 4], b: [usize; 4]| Selection::new(vec![a.to_vec(), b.to_vec()]).unwrap();
    let reuse = vec![sel([1, 11, 21, 31], [2, 12, 22, 32]), sel([1, 11, 21, 35], [2, 12, 23, 33])];
    match outputs_to_candidate(&fam, &reuse).unwrap() {
        Extraction::Violation(Violation::Collision { collision }) => {
            assert_eq!(collision.coordinate, 1);
            assert_eq!(collision.index, 21);
            assert_eq!((collision.u.depth, collision.v.depth), (2, 2));
        }
        other => panic!("unexpected {}", other.label()),
    }
    let split = vec![sel([1, 11, 21, 31], [2, 12, 22, 32]), sel([3, 11, 24, 34], [2, 12, 23, 33])];
    match outputs_to_candidate(&fam, &split).unwrap() {
        Extraction::Violation(Violation::IncrementMismatch { step, .. }) => assert_eq!(step, 1),
        other => panic!("unexpected {}", other.label()),
    }
    let clean = vec![sel([1, 11, 21, 31], [2, 12, 22, 32]), sel([1, 11, 24, 34], [2, 12, 23, 33])];
    assert_eq!(outputs_to_candidate(&fam, &clean).unwrap().label(), "candidate");
    assert!(outputs_to_candidate(&fam, &clean[..1]).is_err());
    let short = vec![Selection::new(vec![vec![1], vec![2]]).unwrap(); 2];
    assert!(outputs_to_candidate(&fam, &short).is_err());
}

#[test]
fn bound_levels() {
    let s = PartitionScheme::uniform(2, 0.5, 2, 3).unwrap();
    let ln = 1e5f64.ln();
    assert!((enum_count_log(2, &s, 10, 2, 100_000).unwrap() - 2.0 * 20.0 * ln).abs() < 1e-9);
    let params = AsymptoticParams::new(100_000, 10, 2, 0.5).unwrap();
    let mut prev = f64::NEG_INFINITY;
    let deep = build_partition(2, 0.5).unwrap();
    for ell in 1..=deep.depth {
        let e = enum_count_log(ell, &deep, 10, 2, 100_000).unwrap();
        assert!(e > prev);
        prev = e;
        assert!(prob_bound_log(ell, &deep, &params).unwrap() < 0.0);
    }
    let rep = forbidden_prob_bound_log(&deep, &params).unwrap();
    assert!(rep.bound_log < 0.0);
    let mut small = deep.clone();
    small.branching = 1;
    assert!(matches!(forbidden_prob_bound_log(&small, &params), Err(Error::InvalidArgument(_))));
    assert!(enum_count_log(deep.depth + 1, &deep, 10, 2, 100_000).is_err());
}
