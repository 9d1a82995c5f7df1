#![allow(clippy::single_range_in_vec_init)]

mod common;

use std::collections::BTreeMap;

use common::{brute_force_nmi, brute_force_qov, rng, small_corpus};
use rand::Rng;
use slpa::engine::{listener_rule, speaker_rule};
use slpa::{
    extended_nmi, generate, overlap_fscore, qov, run_lpa, BenchSpec, Cover, EngineConfig, Graph,
    Label, Memory, Threshold,
};

fn cover(n: usize, communities: &[std::ops::Range<usize>]) -> Cover {
    Cover::new(n, communities.iter().map(|r| r.clone().collect()).collect()).unwrap()
}

#[test]
fn qov_matches_brute_force_on_corpus() {
    let corpus = small_corpus();
    assert!(corpus.len() >= 20);
    let overlapping = corpus
        .iter()
        .filter(|(_, c)| !c.overlapping_nodes().is_empty())
        .count();
    assert!(
        overlapping >= 5,
        "corpus has {overlapping} overlapping covers"
    );
    for (i, (g, c)) in corpus.iter().enumerate() {
        let fast = qov(g, c).unwrap();
        let slow = brute_force_qov(g, c);
        assert!((fast - slow).abs() < 1e-9, "case {i}: {fast} vs {slow}");
    }
}

#[test]
fn qov_frozen_values() {
    let tri = Graph::with_node_count(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let q = qov(&tri, &cover(3, &[0..3])).unwrap();
    assert!((q - 1.871_524_593_767_422e-13).abs() < 1e-15, "{q}");

    let bowtie =
        Graph::with_node_count(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
    let q = qov(&bowtie, &cover(5, &[0..3, 2..5])).unwrap();
    assert!((q - 0.541_666_666_666_604_3).abs() < 1e-12, "{q}");
}

#[test]
fn qov_of_edgeless_graph_is_zero() {
    let g = Graph::with_node_count(4, []).unwrap();
    assert_eq!(qov(&g, &cover(4, &[0..4])).unwrap(), 0.0);
}

#[test]
fn nmi_matches_brute_force() {
    let mut r = rng(7);
    for _ in 0..40 {
        let n = r.random_range(5..40);
        let a = common::random_cover(n, r.random_range(1..6), 3, &mut r);
        let b = common::random_cover(n, r.random_range(1..6), 3, &mut r);
        let fast = extended_nmi(&a, &b).unwrap();
        let slow = brute_force_nmi(&a, &b).clamp(0.0, 1.0);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }
}

#[test]
fn nmi_frozen_values() {
    let halves = cover(100, &[0..50, 50..100]);
    let all = cover(100, &[0..100]);
    assert!((extended_nmi(&halves, &all).unwrap() - 0.5).abs() < 1e-12);

    let x = cover(100, &[0..10, 5..30, 30..100]);
    let y = cover(100, &[0..12, 12..60, 50..100]);
    let v = extended_nmi(&x, &y).unwrap();
    assert!((v - 0.424_008_857_047_331_5).abs() < 1e-12, "{v}");
}

#[test]
fn nmi_of_independent_partitions_is_small() {
    let mut r = rng(99);
    let n = 1000;
    for _ in 0..5 {
        let draw = |r: &mut rand_chacha::ChaCha8Rng| {
            let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
            Cover::from_labels(&labels)
        };
        let a = draw(&mut r);
        let b = draw(&mut r);
        let v = extended_nmi(&a, &b).unwrap();
        assert!(v < 0.1, "{v}");
    }
}

#[test]
fn fscore_on_hand_built_covers() {
    // Truth overlaps at {2, 5}; detection overlaps at {2, 3}.
    let truth = Cover::new(8, vec![vec![0, 1, 2, 5], vec![2, 3, 4, 5], vec![6, 7]]).unwrap();
    let found = Cover::new(8, vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5], vec![6, 7]]).unwrap();
    let s = overlap_fscore(&found, &truth).unwrap();
    assert_eq!((s.precision, s.recall, s.f_score), (0.5, 0.5, 0.5));
}

#[test]
fn speaker_draws_follow_memory_frequency() {
    let a = Label(0);
    let b = Label(1);
    let c = Label(2);
    let mut r = rng(1);
    let draws = 100_000;

    let skewed = Memory::from_counts([(a, 3), (b, 1)]);
    let hits = (0..draws)
        .filter(|_| speaker_rule(&skewed, &mut r) == a)
        .count();
    let p = hits as f64 / draws as f64;
    assert!((0.74..=0.76).contains(&p), "{p}");

    let flat = Memory::from_counts([(a, 1), (b, 1), (c, 1)]);
    let mut seen = BTreeMap::new();
    for _ in 0..draws {
        *seen.entry(speaker_rule(&flat, &mut r)).or_insert(0usize) += 1;
    }
    for label in [a, b, c] {
        let p = seen[&label] as f64 / draws as f64;
        assert!((0.323..=0.344).contains(&p), "{label:?}: {p}");
    }
}

#[test]
fn listener_breaks_ties_evenly() {
    let mut r = rng(2);
    let draws = 100_000;
    let hits = (0..draws)
        .filter(|_| listener_rule(&[Label(4), Label(9)], &mut r) == Label(4))
        .count();
    let p = hits as f64 / draws as f64;
    assert!((0.49..=0.51).contains(&p), "{p}");
    assert_eq!(
        listener_rule(&[Label(4), Label(9), Label(9)], &mut r),
        Label(9)
    );
}

#[test]
fn clique_collapses_to_one_community() {
    let g = common::clique(5);
    let r = Threshold::new(0.1).unwrap();
    let single = (0..100)
        .filter(|&seed| {
            let d = slpa::detect(&g, &EngineConfig::slpa(100, seed), r).unwrap();
            d.cover.len() == 1
        })
        .count();
    assert!(single >= 95, "{single}/100");
}

#[test]
fn lpa_splits_bridged_triangles() {
    let g = common::bridged_triangles();
    let split = (0..100)
        .filter(|&seed| run_lpa(&g, seed).cover(&g).len() == 2)
        .count();
    assert!(split >= 90, "{split}/100");
}

#[test]
fn benchgen_external_fraction_tracks_mu() {
    let spec = BenchSpec {
        mu: 0.3,
        seed: 3,
        ..BenchSpec::default()
    };
    let bench = generate(&spec).unwrap();
    let f = bench.mean_external_fraction();
    assert!((0.25..=0.35).contains(&f), "{f}");
}

#[test]
fn benchgen_large_settings_plant_exact_overlap() {
    for om in 2..=8 {
        for mu in [0.1, 0.3] {
            let spec = BenchSpec {
                n: 5000,
                k_avg: 10.0,
                mu,
                overlapping_nodes: 500,
                memberships: om,
                c_min: 20,
                c_max: 100,
                seed: om as u64,
            };
            let bench = generate(&spec).unwrap();
            let counts = bench.truth.membership_counts();
            let overlapping: Vec<usize> = counts.iter().copied().filter(|&k| k >= 2).collect();
            assert_eq!(overlapping.len(), 500, "om={om} mu={mu}");
            assert!(overlapping.iter().all(|&k| k == om));
            assert!(counts.iter().all(|&k| k == 1 || k == om));
            let k = bench.graph.mean_degree();
            assert!((k - 10.0).abs() <= 1.5, "om={om} mu={mu} k={k}");
        }
    }
}

#[test]
fn benchgen_without_mixing_has_no_external_edges() {
    let spec = BenchSpec {
        n: 60,
        k_avg: 6.0,
        mu: 0.0,
        overlapping_nodes: 0,
        memberships: 2,
        c_min: 30,
        c_max: 30,
        seed: 5,
    };
    let bench = generate(&spec).unwrap();
    assert_eq!(bench.truth.len(), 2);
    assert_eq!(bench.mean_external_fraction(), 0.0);
    assert!(
        bench
            .graph
            .connected_components(&(0..60).collect::<Vec<_>>())
            .len()
            >= 2
    );
}
