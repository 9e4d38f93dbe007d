use std::collections::BTreeSet;

use proptest::prelude::*;

use latent_ties::graph::InferredGraph;
use latent_ties::infer::{candidate_thresholds, threshold_oversampled, RaterScores};
use latent_ties::series::PairSeries;
use latent_ties::stats::roc::{auc, roc_auc};
use latent_ties::store::{Counters, EventStore, InteractionEvent, PlayerId, RecordFormat, Window};
use latent_ties::temporal::{autocorrelation_fft, autocorrelation_sparse, entropy_of_counts, player_entropies};

const START: i64 = 1_284_422_400;

fn series() -> impl Strategy<Value = (Vec<u32>, u32)> {
    (2u32..5000).prop_flat_map(|total| (prop::collection::btree_set(0..total, 1..80), Just(total)))
        .prop_map(|(bins, total)| (bins.into_iter().collect(), total))
}

proptest! {
    #[test]
    fn fft_matches_gap_count((bins, total) in series(), tau in 1u32..6000) {
        let tau = tau.min(total - 1).max(1);
        let s = PairSeries::from_bins(bins.clone(), total).unwrap();
        prop_assert_eq!(autocorrelation_fft(&s, tau).unwrap(), autocorrelation_sparse(&bins, tau));
    }

    #[test]
    fn autocorrelation_grows_with_lag((bins, _) in series(), a in 1u32..3000, b in 1u32..3000) {
        let (lo, hi) = (a.min(b), a.max(b));
        let k = bins.len() as u64;
        let small = autocorrelation_sparse(&bins, lo);
        let large = autocorrelation_sparse(&bins, hi);
        prop_assert!(small <= large);
        prop_assert!(large <= k * (k - 1) / 2);
    }

    #[test]
    fn auc_is_symmetric_under_negation(scored in prop::collection::vec((0u8..6, any::<bool>()), 2..200)) {
        let scored: Vec<(f64, bool)> = scored.into_iter().map(|(s, y)| (f64::from(s), y)).collect();
        prop_assume!(scored.iter().any(|s| s.1) && scored.iter().any(|s| !s.1));
        let up = auc(&scored).unwrap();
        let flipped: Vec<(f64, bool)> = scored.iter().map(|&(s, y)| (-s, y)).collect();
        let down = auc(&flipped).unwrap();
        prop_assert!((0.0..=1.0).contains(&up));
        prop_assert!((up + down - 1.0).abs() < 1e-12);
        let curve = roc_auc(&scored).unwrap();
        prop_assert_eq!(curve.auc, up);
    }

    #[test]
    fn entropy_is_bounded(counts in prop::collection::vec(0u64..50, 1..20)) {
        let support = counts.iter().filter(|&&c| c > 0).count();
        let h = entropy_of_counts(counts.iter().copied());
        prop_assert!(h >= 0.0);
        if support > 0 {
            prop_assert!(h <= (support as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn joint_entropy_dominates_marginals(games in prop::collection::vec((0i64..28 * 86_400, 0u16..5), 1..80)) {
        let events = games.iter().enumerate().map(|(i, &(t, playlist))| InteractionEvent {
            game_id: i as u64,
            timestamp: START + t,
            playlist,
            team: 0,
            player: PlayerId(7),
            counters: Counters::default(),
        });
        let window = Window { start: START, end: START + 28 * 86_400 };
        let store = EventStore::from_events(Some(window), 600, events).unwrap();
        let h = player_entropies(&store, PlayerId(7)).unwrap();
        prop_assert!(h.joint + 1e-12 >= h.schedule.max(h.spatial));
        prop_assert!(h.joint <= h.schedule + h.spatial + 1e-12);
    }

    #[test]
    fn components_partition_nodes(edges in prop::collection::vec((0u64..40, 0u64..40), 1..120)) {
        let edges: Vec<(PlayerId, PlayerId)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (PlayerId(a), PlayerId(b)))
            .collect();
        prop_assume!(!edges.is_empty());
        let g = InferredGraph::from_edges(&edges).unwrap();
        let endpoints: BTreeSet<PlayerId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        prop_assert_eq!(g.num_nodes(), endpoints.len());
        prop_assert_eq!(g.components().iter().sum::<usize>(), g.num_nodes());
        prop_assert!(g.clustering_all().iter().all(|c| (0.0..=1.0).contains(c)));
        let degree_sum: usize = g.degrees().iter().sum();
        prop_assert_eq!(degree_sum, 2 * g.num_edges());
    }

    #[test]
    fn oversampled_threshold_respects_cap(
        raters in prop::collection::vec(prop::collection::vec(0u64..500, 0..30), 1..20),
        cap in 0usize..30,
    ) {
        let scores = RaterScores::new(raters.into_iter().enumerate().map(|(i, s)| (PlayerId(i as u64), s)).collect());
        let cands = candidate_thresholds(scores.all_scores(), 64);
        prop_assume!(!cands.is_empty());
        let max_at = |t: u64| scores.degrees_at(t).into_iter().max().unwrap_or(0);
        match threshold_oversampled(cap, &cands, &scores) {
            Ok(sel) => {
                prop_assert!(sel.max_degree <= cap);
                let i = cands.iter().position(|&t| t == sel.threshold).unwrap();
                prop_assert!(i == 0 || max_at(cands[i - 1]) > cap);
            }
            Err(_) => prop_assert!(cands.iter().all(|&t| max_at(t) > cap)),
        }
    }
}

fn event(game_id: u64, offset: i64, team: u8, player: u64, direct: u32) -> InteractionEvent {
    InteractionEvent {
        game_id,
        timestamp: START + offset,
        playlist: 1,
        team,
        player: PlayerId(player),
        counters: Counters {
            direct_assists: direct,
            indirect_assists: 0,
            betrayals: 0,
        },
    }
}

#[test]
fn canonical_log_round_trips() {
    let events = vec![
        event(2, 1200, 1, 9, 0),
        event(1, 600, 0, 3, 2),
        event(1, 600, 1, 4, 0),
        event(2, 1200, 0, 3, 1),
    ];
    let window = Window { start: START, end: START + 86_400 };
    let store = EventStore::from_events(Some(window), 600, events).unwrap();
    let mut text = Vec::new();
    store.write_log(&mut text).unwrap();
    let back = EventStore::read(text.as_slice(), RecordFormat::Tsv, 600).unwrap();
    assert_eq!(back.checksum(), store.checksum());
    assert_eq!(back.events(), store.events());
    assert_eq!(store.games_played(PlayerId(3)).unwrap(), 2);
}
