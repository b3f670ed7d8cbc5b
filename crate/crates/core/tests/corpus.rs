use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use senseball::corpus::{filter_by_ball_coverage, lift_to_level, parse_annotated_corpus, write_records, TrainingRecord};
use senseball::evaluator::{random_embeddings, random_taxonomy};
use senseball::geometry::construct_balls;
use senseball::{BallConfiguration, GeometryConfig, Inventory, SenseId};

const AIM: &str = "aim.n.02\t4\tHave you set specific objectives for your career\n";

fn aim_world() -> (Inventory, BallConfiguration) {
    let inv = Inventory::parse(
        "aim.n.02\tgoal.n.01\ngoal.n.01\tcontent.n.05\ncontent.n.05\tcognition.n.01\n".as_bytes(),
        "aim",
    )
    .unwrap();
    let table = random_embeddings(inv.taxonomy(), 6, 0).unwrap();
    let balls = construct_balls(inv.taxonomy(), &table, &GeometryConfig::default()).unwrap();
    (inv, balls)
}

#[test]
fn worked_example_lifts_to_goal_and_content() {
    let (inv, balls) = aim_world();
    let recs = parse_annotated_corpus(AIM.as_bytes(), "aim").unwrap();
    assert_eq!(recs[0].tokens, ["have", "you", "set", "specific", "objectives", "for", "your", "career"]);
    assert_eq!(recs[0].indices, [4]);
    let (l1, stats) = lift_to_level(&recs, 1, &inv, &balls);
    assert_eq!(l1[0].target.to_string(), "goal.n.01");
    assert_eq!(l1[0].original.to_string(), "aim.n.02");
    assert_eq!(stats.n_ball_records, 1);
    let mut buf = Vec::new();
    write_records(&mut buf, &l1, true).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "goal.n.01\taim.n.02\t4\thave you set specific objectives for your career\n"
    );
    let (l2, _) = lift_to_level(&recs, 2, &inv, &balls);
    assert_eq!(l2[0].target.to_string(), "content.n.05");
    let (l4, stats) = lift_to_level(&recs, 4, &inv, &balls);
    assert!(l4.is_empty());
    assert_eq!(stats.n_ball_records, 0);
}

fn random_records(inv: &Inventory, seed: u64, n: usize) -> Vec<TrainingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let senses: Vec<&SenseId> = inv.taxonomy().nodes().collect();
    (0..n)
        .map(|_| {
            let s = senses[rng.random_range(0..senses.len())].clone();
            let len = rng.random_range(1..8);
            let tokens = (0..len).map(|_| format!("t{}", rng.random_range(0..20))).collect();
            TrainingRecord::new(s, tokens, vec![rng.random_range(0..len)]).unwrap()
        })
        .collect()
}

fn key(r: &TrainingRecord) -> (Vec<String>, Vec<usize>) {
    (r.tokens.clone(), r.indices.clone())
}

/// Drops every `k`-th ball so coverage is partial.
fn thinned(balls: &BallConfiguration, k: usize) -> BallConfiguration {
    let mut out = BallConfiguration::new(balls.dim(), balls.embedding_prefix_dim()).unwrap();
    for (i, b) in balls.iter().enumerate() {
        if i % k != 0 {
            out.insert(b.clone()).unwrap();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifting_composes(seed in 0u64..10_000, i in 0usize..4, j in 0usize..4) {
        let inv = Inventory::from_taxonomy(random_taxonomy(seed, 80, 0.05).unwrap());
        let table = random_embeddings(inv.taxonomy(), 4, seed).unwrap();
        let balls = construct_balls(inv.taxonomy(), &table, &GeometryConfig::default()).unwrap();
        let recs = random_records(&inv, seed, 60);
        let (li, _) = lift_to_level(&recs, i, &inv, &balls);
        let (lij, _) = lift_to_level(&recs, i + j, &inv, &balls);
        let composed: Vec<SenseId> = li
            .iter()
            .filter_map(|r| inv.hypernym_at(&r.target, j).unwrap())
            .collect();
        let direct: Vec<SenseId> = lij.iter().map(|r| r.target.clone()).collect();
        prop_assert_eq!(composed, direct);
    }

    #[test]
    fn kept_records_are_a_sub_multiset(seed in 0u64..10_000, level in 0usize..5, k in 2usize..5) {
        let inv = Inventory::from_taxonomy(random_taxonomy(seed, 60, 0.05).unwrap());
        let table = random_embeddings(inv.taxonomy(), 4, seed).unwrap();
        let full = construct_balls(inv.taxonomy(), &table, &GeometryConfig::default()).unwrap();
        let balls = thinned(&full, k);
        let recs = random_records(&inv, seed, 50);
        let mut counts: HashMap<_, i64> = HashMap::new();
        for r in &recs {
            *counts.entry(key(r)).or_default() += 1;
        }
        let (lifted, stats) = lift_to_level(&recs, level, &inv, &balls);
        let (filtered, fstats) = filter_by_ball_coverage(&recs, &balls);
        for r in lifted.iter().chain(&filtered) {
            prop_assert!(counts.contains_key(&key(r)));
            prop_assert!(balls.has(&r.target));
        }
        for r in &lifted {
            *counts.get_mut(&key(r)).unwrap() -= 1;
        }
        prop_assert!(counts.values().all(|&c| c >= 0));
        prop_assert_eq!(stats.n_ball_records, lifted.len());
        prop_assert!(stats.n_ball_records <= stats.n_records);
        prop_assert!((0.0..=1.0).contains(&stats.ball_ratio()));
        prop_assert_eq!(fstats.n_ball_records, filtered.len());
        prop_assert!(filtered.iter().all(|r| !r.is_lifted()));
    }

    #[test]
    fn records_round_trip(seed in 0u64..10_000, lifted in any::<bool>()) {
        let inv = Inventory::from_taxonomy(random_taxonomy(seed, 30, 0.0).unwrap());
        let table = random_embeddings(inv.taxonomy(), 4, seed).unwrap();
        let balls = construct_balls(inv.taxonomy(), &table, &GeometryConfig::default()).unwrap();
        let recs = random_records(&inv, seed, 20);
        let recs = if lifted { lift_to_level(&recs, 1, &inv, &balls).0 } else { recs };
        let mut buf = Vec::new();
        write_records(&mut buf, &recs, lifted).unwrap();
        prop_assert_eq!(parse_annotated_corpus(buf.as_slice(), "buf").unwrap(), recs);
    }
}
