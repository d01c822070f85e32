use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsst::labelgen::{radical_sequence, stroke_targets, LabelMode, RadicalToken};
use rsst::lexicon::{
    confusable_character_count, confusable_set, confusable_set_stroke_level, Lexicon, LexiconRecord,
};
use rsst::metric::{
    brute_force_wed, combined_distance, edit_distance, stroke_distance, wed_table, weighted_edit_distance,
};
use rsst::simulate::{perturb, random_tree, synth_lexicon, PerturbationConfig};
use rsst::translator::{rectify, rectify_par, rectify_with, DistanceKind};
use rsst::tree::Token;
use rsst::{parse_tree_expr, MetricParams, Rsst, RsstNode, StrokeAlphabet};

fn tree_from_seed(seed: u64, max_leaves: usize) -> Rsst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree(&mut rng, max_leaves, 6, StrokeAlphabet::default())
}

fn params() -> impl Strategy<Value = MetricParams> {
    (0.05f64..=1.0, 0.0f64..3.0).prop_map(|(alpha, beta)| MetricParams { alpha, beta })
}

fn seq() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(1u8..=5, 0..12)
}

proptest! {
    #[test]
    fn edit_distance_is_a_metric(a in seq(), b in seq(), c in seq()) {
        let ab = edit_distance(&a, &b);
        prop_assert_eq!(ab, edit_distance(&b, &a));
        prop_assert_eq!(edit_distance(&a, &a), 0);
        prop_assert!(ab <= edit_distance(&a, &c) + edit_distance(&c, &b));
        prop_assert!(ab >= a.len().abs_diff(b.len()));
        prop_assert!(ab <= a.len().max(b.len()));
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let t = tree_from_seed(seed, 6);
        let text = t.serialize();
        let back = parse_tree_expr(&text).unwrap();
        prop_assert!(back.same_shape(&t));
        prop_assert_eq!(back.serialize(), text);
        let with_ids = parse_tree_expr(&t.serialize_with(true)).unwrap();
        prop_assert_eq!(with_ids, t);
    }

    #[test]
    fn serialization_is_injective(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (tree_from_seed(s1, 4), tree_from_seed(s2, 4));
        prop_assert_eq!(a.serialize() == b.serialize(), a.same_shape(&b));
    }

    #[test]
    fn dfs_weight_law(seed in any::<u64>(), alpha in 0.05f64..=1.0) {
        let t = tree_from_seed(seed, 6);
        let first = t.dfs_elements(alpha);
        prop_assert_eq!(&first, &t.dfs_elements(alpha));
        prop_assert_eq!(first[0].level, 0);
        for e in &first {
            prop_assert!((e.weight - alpha.powi(e.level as i32)).abs() <= 1e-12);
            prop_assert!(e.weight > 0.0);
            prop_assert!(e.len() >= 1);
        }
        let leaves = first.iter().filter(|e| e.is_leaf()).count();
        prop_assert_eq!(leaves, t.leaf_count());
        let implicit = radical_sequence(&t, LabelMode::Implicit).unwrap();
        let refs = implicit.iter().filter(|x| matches!(x, RadicalToken::RadicalRef { .. })).count();
        prop_assert_eq!(refs, leaves);
    }

    #[test]
    fn wed_matches_oracle(s1 in any::<u64>(), s2 in any::<u64>(), p in params()) {
        let (a, b) = (tree_from_seed(s1, 4), tree_from_seed(s2, 4));
        let dp = weighted_edit_distance(&a, &b, p);
        let oracle = brute_force_wed(&a, &b, p).unwrap();
        prop_assert!((dp - oracle).abs() <= 1e-9, "dp {} oracle {}", dp, oracle);
        prop_assert!((wed_table(&a, &b, p).distance() - dp).abs() <= 1e-12);
    }

    #[test]
    fn distance_bounds(s1 in any::<u64>(), s2 in any::<u64>(), p in params()) {
        let (a, b) = (tree_from_seed(s1, 6), tree_from_seed(s2, 6));
        let d = weighted_edit_distance(&a, &b, p);
        prop_assert!(d >= 0.0);
        let total: f64 = a.dfs_elements(p.alpha).iter().chain(b.dfs_elements(p.alpha).iter()).map(|e| e.weight).sum();
        prop_assert!(d <= total + 1e-9);
        prop_assert_eq!(weighted_edit_distance(&a, &a, p), 0.0);
        prop_assert_eq!(stroke_distance(&a, &a), 0);
        prop_assert_eq!(combined_distance(&a, &a, p), 0.0);
        let c = combined_distance(&a, &b, p);
        prop_assert!((c - (d + p.beta * stroke_distance(&a, &b) as f64)).abs() <= 1e-9);
        let tree_only = MetricParams { beta: 0.0, ..p };
        prop_assert_eq!(combined_distance(&a, &b, tree_only), weighted_edit_distance(&a, &b, tree_only));
    }

    #[test]
    fn structure_swap_is_invisible_to_strokes(seed in any::<u64>(), p in params()) {
        let t = tree_from_seed(seed, 5);
        prop_assume!(t.leaf_count() >= 2);
        let cfg = PerturbationConfig { p_struct: 1.0, seed, ..Default::default() };
        let swapped = perturb(&t, &cfg, 0);
        prop_assert_eq!(stroke_distance(&t, &swapped), 0);
        prop_assert!(weighted_edit_distance(&swapped, &t, p) > 0.0);
    }

    #[test]
    fn stroke_target_laws(seed in any::<u64>()) {
        let t = tree_from_seed(seed, 6);
        let targets = stroke_targets(&t).per_step;
        prop_assert_eq!(targets.len(), t.element_count());
        prop_assert_eq!(&targets[0], &t.leaf_stroke_concat());
        let elems = t.dfs_elements(0.5);
        for (e, target) in elems.iter().zip(&targets) {
            if let Token::LeafStrokes(s) = e.token {
                prop_assert_eq!(s, target.as_slice());
            }
        }
    }

    #[test]
    fn perturbation_keeps_trees_valid(seed in any::<u64>(), trial in 0u64..1000, rates in prop::array::uniform4(0.0f64..=1.0)) {
        let t = tree_from_seed(seed, 6);
        let cfg = PerturbationConfig { p_sub: rates[0], p_del: rates[1], p_ins: rates[2], p_struct: rates[3], seed, alphabet: 5 };
        let p = perturb(&t, &cfg, trial);
        prop_assert!(Rsst::new(p.root().clone()).is_ok());
        prop_assert_eq!(p.element_count(), t.element_count());
        prop_assert!(parse_tree_expr(&p.serialize()).is_ok());
        prop_assert_eq!(p, perturb(&t, &cfg, trial));
    }

    #[test]
    fn confusable_refinement(seed in any::<u64>(), count in 1usize..120) {
        let lex = synth_lexicon(count, seed, 1, StrokeAlphabet::new(2).unwrap());
        let tree = confusable_set(&lex);
        let stroke = confusable_set_stroke_level(&lex);
        prop_assert!(confusable_character_count(&tree) <= confusable_character_count(&stroke));
        for g in &tree {
            prop_assert!(stroke.iter().any(|s| g.iter().all(|c| s.contains(c))));
        }
    }
}

#[test]
fn parallel_rectify_is_identical() {
    let lex = synth_lexicon(150, 17, 2, StrokeAlphabet::default());
    let cfg = PerturbationConfig { p_sub: 0.2, p_del: 0.2, p_ins: 0.1, p_struct: 0.2, seed: 5, alphabet: 5 };
    let p = MetricParams::default();
    for (i, r) in lex.records().iter().enumerate().take(60) {
        let q = perturb(&r.tree, &cfg, i as u64);
        for kind in [DistanceKind::Combined, DistanceKind::TreeOnly, DistanceKind::StrokeOnly] {
            assert_eq!(rectify_with(&q, &lex, p, kind).unwrap(), rectify_par(&q, &lex, p, kind).unwrap());
        }
    }
}

#[test]
fn rectified_tree_comes_from_the_lexicon() {
    let lex = synth_lexicon(80, 23, 2, StrokeAlphabet::default());
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let q = random_tree(&mut rng, 4, 6, StrokeAlphabet::default());
        let res = rectify(&q, &lex, MetricParams::default()).unwrap();
        if res.exact_match {
            assert_eq!(res.rectified, q);
            assert_eq!(res.distance, 0.0);
        } else {
            let bucket = lex.bucket(&res.rectified.serialize()).expect("lexicon tree");
            assert_eq!(bucket, res.candidates.iter().map(String::as_str).collect::<Vec<_>>());
        }
    }
}

#[test]
fn argmin_is_stable_under_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = MetricParams::default();
    let mut checked = 0;
    while checked < 50 {
        let trees: Vec<Rsst> = (0..12).map(|_| random_tree(&mut rng, 4, 6, StrokeAlphabet::default())).collect();
        let query = random_tree(&mut rng, 4, 6, StrokeAlphabet::default());
        let mut d: Vec<f64> = trees.iter().map(|t| combined_distance(&query, t, p)).collect();
        d.sort_by(f64::total_cmp);
        let distinct = d.windows(2).all(|w| w[1] - w[0] > 1e-9) && d[0] > 0.0;
        if !distinct {
            continue;
        }
        let records: Vec<LexiconRecord> = trees
            .iter()
            .enumerate()
            .map(|(i, t)| LexiconRecord { codepoint: format!("c{i}"), tree: t.clone() })
            .collect();
        let expected = rectify(&query, &Lexicon::from_records(records.clone()).unwrap(), p).unwrap();
        for _ in 0..5 {
            let mut shuffled = records.clone();
            shuffled.shuffle(&mut rng);
            let got = rectify(&query, &Lexicon::from_records(shuffled).unwrap(), p).unwrap();
            assert_eq!(got, expected);
        }
        checked += 1;
    }
}

#[test]
fn monotone_degradation() {
    let lex = synth_lexicon(200, 42, 2, StrokeAlphabet::default());
    let p = MetricParams::default();
    let at = |s: f64| {
        let cfg = PerturbationConfig { p_sub: s, p_del: s, p_struct: s, ..Default::default() };
        rsst::simulate::evaluate(&lex, &cfg, 3000, p).unwrap().top1_combined
    };
    let (low, high) = (at(0.05), at(0.10));
    assert!(low >= high - 0.02, "{low} vs {high}");
}

#[test]
fn leaf_ids_never_affect_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = MetricParams::default();
    for _ in 0..200 {
        let t = random_tree(&mut rng, 5, 6, StrokeAlphabet::default());
        let stripped = parse_tree_expr(&t.serialize()).unwrap();
        let other = random_tree(&mut rng, 5, 6, StrokeAlphabet::default());
        assert_eq!(weighted_edit_distance(&t, &other, p), weighted_edit_distance(&stripped, &other, p));
        let renamed = relabel(&t, rng.gen_range(0..100));
        assert_eq!(renamed.serialize(), t.serialize());
        assert_eq!(weighted_edit_distance(&renamed, &other, p), weighted_edit_distance(&t, &other, p));
    }
}

fn relabel(t: &Rsst, salt: u32) -> Rsst {
    fn go(n: &RsstNode, salt: u32) -> RsstNode {
        match n {
            RsstNode::Internal { op, children } => {
                RsstNode::internal(*op, children.iter().map(|c| go(c, salt)).collect())
            }
            RsstNode::Leaf { strokes, .. } => RsstNode::leaf(&format!("x{salt}"), strokes.clone()),
        }
    }
    Rsst::new(go(t.root(), salt)).unwrap()
}
