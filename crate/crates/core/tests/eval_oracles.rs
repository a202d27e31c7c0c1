mod common;

use calp::eval::{
    chi_square, cmc, cross_validated_recognition, hits_at, leave_one_out_cmc, precision_at,
    rank_all, rank_gallery, recall_at, recognition_rate, split_recognition_rate,
    RetrievalEvaluator,
};
use calp::{make_splits, ClassLabels, Split};
use proptest::prelude::*;
use rand::Rng;

use common::*;

const TOL: f64 = 1e-12;

/// Two-bin features `[p, 1 - p]`; class A = {0, 1, 2}, class B = {3, 4}.
fn line_corpus() -> (Vec<Vec<f64>>, ClassLabels) {
    let ps = [0.50, 0.54, 0.70, 0.58, 0.90];
    let features = ps.iter().map(|&p| vec![p, 1.0 - p]).collect();
    (features, ClassLabels::from_labels(&["A", "A", "A", "B", "B"]))
}

#[test]
fn line_corpus_rankings_match_hand_order() {
    let (f, _) = line_corpus();
    let expected = [
        vec![1, 3, 2, 4],
        vec![0, 3, 2, 4],
        vec![3, 1, 0, 4],
        vec![1, 0, 2, 4],
        vec![2, 3, 1, 0],
    ];
    let lists = rank_all(&f).unwrap();
    for q in 0..5 {
        assert_eq!(oracle_ranking(&f, q), expected[q]);
        let got: Vec<usize> = lists[q].items.iter().map(|i| i.index).collect();
        assert_eq!(got, expected[q], "query {q}");
    }
}

#[test]
fn line_corpus_retrieval_by_hand() {
    let (f, labels) = line_corpus();
    let eval = RetrievalEvaluator::new(&f, &labels).unwrap();
    // λ = 1: A queries hit, hit, miss; B queries miss, miss
    assert!((eval.arp(1).unwrap() - 1.0 / 3.0).abs() < TOL);
    // λ = 2: A: 1/2, 1/2, 1/2; B: 0, 1/2
    assert!((eval.arp(2).unwrap() - 0.375).abs() < TOL);
    // recall λ = 2: A: 1/3 each; B: 0, 1/2
    assert!((eval.arr(2).unwrap() - 7.0 / 24.0).abs() < TOL);
    // NMRR per query: 1/7, 1/7, 2/7, 1, 2/3
    assert!((eval.anmrr().unwrap() - 47.0 / 105.0).abs() < TOL);

    assert!((recognition_rate(&f, &labels).unwrap() - 40.0).abs() < TOL);
    let c = leave_one_out_cmc(&f, &labels, 4).unwrap();
    let expected = [0.4, 0.8, 0.8, 1.0];
    for (a, b) in c.iter().zip(expected) {
        assert!((a - b).abs() < TOL);
    }
}

#[test]
fn line_corpus_agrees_with_brute_force() {
    let (f, labels) = line_corpus();
    let class: Vec<usize> = (0..5).map(|i| labels.class_of(i)).collect();
    let eval = RetrievalEvaluator::new(&f, &labels).unwrap();
    for lambda in 1..=4 {
        let (arp, arr) = oracle_arp_arr(&f, &class, lambda);
        assert!((eval.arp(lambda).unwrap() - arp).abs() < TOL);
        assert!((eval.arr(lambda).unwrap() - arr).abs() < TOL);
    }
    assert!((eval.anmrr().unwrap() - oracle_anmrr(&f, &class)).abs() < TOL);
}

fn random_corpus(seed: u64, sizes: &[usize], bins: usize) -> (Vec<Vec<f64>>, ClassLabels, Vec<usize>) {
    let mut r = rng(seed);
    let labels = ClassLabels::from_class_sizes(sizes);
    let mut features = Vec::new();
    for &size in sizes {
        let proto: Vec<f64> = (0..bins).map(|_| r.random::<f64>()).collect();
        for _ in 0..size {
            let raw: Vec<f64> = proto.iter().map(|p| p + 0.6 * r.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            features.push(raw.into_iter().map(|x| x / total).collect());
        }
    }
    let class = (0..labels.len()).map(|i| labels.class_of(i)).collect();
    (features, labels, class)
}

#[test]
fn mixed_corpora_agree_with_brute_force() {
    for seed in 0..5 {
        let (f, labels, class) = random_corpus(seed, &[4, 2, 6], 8);
        let eval = RetrievalEvaluator::new(&f, &labels).unwrap();
        for lambda in [1, 2, 5, 11] {
            let (arp, arr) = oracle_arp_arr(&f, &class, lambda);
            assert!((eval.arp(lambda).unwrap() - arp).abs() < TOL);
            assert!((eval.arr(lambda).unwrap() - arr).abs() < TOL);
        }
        assert!((eval.anmrr().unwrap() - oracle_anmrr(&f, &class)).abs() < TOL);

        let nn_hits = (0..f.len())
            .filter(|&q| class[oracle_ranking(&f, q)[0]] == class[q])
            .count();
        let expected = 100.0 * nn_hits as f64 / f.len() as f64;
        assert!((recognition_rate(&f, &labels).unwrap() - expected).abs() < TOL);
    }
}

#[test]
fn split_cmc_and_recognition_agree_with_brute_force() {
    let (f, labels, class) = random_corpus(11, &[5, 5, 4], 6);
    let split = &make_splits(&labels, 0.4, 1, 2024).unwrap()[0];
    let first: Vec<usize> = split
        .probe
        .iter()
        .map(|&p| oracle_first_match(&f, &class, p, &split.gallery))
        .collect();
    let got = cmc(&f, &labels, split, split.gallery.len()).unwrap();
    for (r, score) in got.iter().enumerate() {
        let expected = first.iter().filter(|&&fr| fr <= r + 1).count() as f64 / first.len() as f64;
        assert!((score - expected).abs() < TOL);
    }
    assert_eq!(*got.last().unwrap(), 1.0);

    let rate = split_recognition_rate(&f, &labels, split).unwrap();
    let expected = 100.0 * first.iter().filter(|&&fr| fr == 1).count() as f64 / first.len() as f64;
    assert!((rate - expected).abs() < TOL);
    assert!((rate - 100.0 * got[0]).abs() < TOL);

    let cv = cross_validated_recognition(&f, &labels, &[0.4], 1, 2024).unwrap();
    assert_eq!(cv[0].fold_rates, vec![rate]);
}

#[test]
fn duplicate_features_are_perfect() {
    let labels = ClassLabels::from_class_sizes(&[3, 4, 2]);
    let protos = [vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8], vec![0.3, 0.4, 0.3]];
    let f: Vec<Vec<f64>> = (0..labels.len())
        .map(|i| protos[labels.class_of(i)].clone())
        .collect();
    let cv = cross_validated_recognition(&f, &labels, &[0.2, 0.5], 3, 5).unwrap();
    for r in cv {
        assert!(r.fold_rates.iter().all(|&x| x == 100.0));
        assert_eq!(r.mean, 100.0);
    }
    // λ = class size: recall ceiling (c - 1) / c
    let eval = RetrievalEvaluator::new(&f, &labels).unwrap();
    let expected = (2.0 / 3.0 + 3.0 / 4.0 + 1.0 / 2.0) / 3.0;
    assert!((eval.arr_at_class_size().unwrap() - expected).abs() < TOL);
}

#[test]
fn rank_gallery_matches_exhaustive_sort() {
    // four gallery items with hand-checked distances to the query [1, 0, 0]
    let f = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.5, 0.5, 0.0],  // χ² = ½(0.25/1.5 + 0.25/0.5) = 1/3
        vec![0.0, 1.0, 0.0],  // 1
        vec![0.75, 0.0, 0.25], // ½(0.0625/1.75 + 0.0625/0.25) = 1/7
        vec![0.5, 0.0, 0.5],  // 1/3, ties with index 1
    ];
    let r = rank_gallery(&f[0], Some(0), &f, &[1, 2, 3, 4]).unwrap();
    let order: Vec<usize> = r.items.iter().map(|i| i.index).collect();
    assert_eq!(order, vec![3, 1, 4, 2]);
    assert_eq!(order, oracle_ranking(&f, 0));
    let d: Vec<f64> = r.items.iter().map(|i| i.distance).collect();
    for (a, b) in d.iter().zip([1.0 / 7.0, 1.0 / 3.0, 1.0 / 3.0, 1.0]) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn split_invariants_hold() {
    let labels = ClassLabels::from_class_sizes(&[1, 2, 3, 5, 8, 13]);
    for fraction in [0.2, 0.3, 0.4, 0.5, 0.6] {
        for split in make_splits(&labels, fraction, 10, 99).unwrap() {
            check_partition(&labels, &split);
        }
    }
}

fn check_partition(labels: &ClassLabels, split: &Split) {
    let mut all: Vec<usize> = split.probe.iter().chain(&split.gallery).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
    for c in 0..labels.num_classes() {
        assert!(labels.members(c).iter().any(|i| split.gallery.contains(i)));
    }
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chi_square_is_a_symmetric_divergence(
        a in proptest::collection::vec(0.0f64..1.0, 1..16),
        b in proptest::collection::vec(0.0f64..1.0, 1..16),
    ) {
        let n = a.len().min(b.len());
        let (x, y) = (&a[..n], &b[..n]);
        let dxy = chi_square(x, y).unwrap();
        prop_assert!(dxy.is_finite() && dxy >= 0.0);
        prop_assert_eq!(dxy, chi_square(y, x).unwrap());
        prop_assert_eq!(chi_square(x, x).unwrap(), 0.0);
        prop_assert!((dxy - oracle_chi2(x, y)).abs() <= 1e-12 * (1.0 + dxy));
    }

    #[test]
    fn chi_square_vanishes_only_on_equal_histograms(
        a in proptest::collection::vec(0.01f64..1.0, 4),
        b in proptest::collection::vec(0.01f64..1.0, 4),
    ) {
        let (x, y) = (normalized(a), normalized(b));
        let d = chi_square(&x, &y).unwrap();
        prop_assert_eq!(d == 0.0, x == y);
    }

    #[test]
    fn scaling_preserves_rankings(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let (f, labels, _) = random_corpus(seed, &[3, 4, 3], 5);
        let scaled: Vec<Vec<f64>> = f.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect();
        let a = rank_all(&f).unwrap();
        let b = rank_all(&scaled).unwrap();
        for (la, lb) in a.iter().zip(&b) {
            let ia: Vec<usize> = la.items.iter().map(|i| i.index).collect();
            let ib: Vec<usize> = lb.items.iter().map(|i| i.index).collect();
            prop_assert_eq!(ia, ib);
        }
        let ea = RetrievalEvaluator::new(&f, &labels).unwrap();
        let eb = RetrievalEvaluator::new(&scaled, &labels).unwrap();
        prop_assert_eq!(ea.anmrr().unwrap(), eb.anmrr().unwrap());
        prop_assert_eq!(ea.arp(3).unwrap(), eb.arp(3).unwrap());
    }

    #[test]
    fn precision_and_recall_share_hits(seed in any::<u64>(), lambda in 1usize..9) {
        let (f, labels, _) = random_corpus(seed, &[2, 3, 5], 4);
        for list in rank_all(&f).unwrap() {
            let q = list.query.unwrap();
            let hits = hits_at(&list, &labels, lambda).unwrap() as f64;
            let size = labels.class_size(labels.class_of(q)) as f64;
            prop_assert!((precision_at(&list, &labels, lambda).unwrap() * lambda as f64 - hits).abs() < 1e-12);
            prop_assert!((recall_at(&list, &labels, lambda).unwrap() * size - hits).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_stay_in_range(seed in any::<u64>()) {
        let (f, labels, _) = random_corpus(seed, &[3, 2, 4], 6);
        let eval = RetrievalEvaluator::new(&f, &labels).unwrap();
        let m = eval.metrics(1..=8).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.anmrr));
        for w in m.rows.windows(2) {
            prop_assert!(w[1].arr >= w[0].arr);
        }
        for row in &m.rows {
            for v in [row.arp, row.arr, row.f_score] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let c = leave_one_out_cmc(&f, &labels, 8).unwrap();
        prop_assert!(c.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(c[7], 1.0);
        let rate = recognition_rate(&f, &labels).unwrap();
        prop_assert!((rate - 100.0 * c[0]).abs() < 1e-9);
    }

    #[test]
    fn splits_partition_and_stratify(
        sizes in proptest::collection::vec(1usize..9, 1..6),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let labels = ClassLabels::from_class_sizes(&sizes);
        let a = make_splits(&labels, fraction, 3, seed).unwrap();
        prop_assert_eq!(&a, &make_splits(&labels, fraction, 3, seed).unwrap());
        for split in &a {
            check_partition(&labels, split);
        }
    }
}
