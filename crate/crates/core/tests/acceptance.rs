//! Acceptance criteria, one line per criterion. Run with
//! `cargo test --test acceptance`. Exits non-zero if a criterion outside
//! `KNOWN_RED` fails or one inside it passes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use latent_ties::cooperative::from_copresence;
use latent_ties::eval::{auc_ranking, feature_table, robustness_study};
use latent_ties::features::{extract, label_rows, Feature, FeatureRow, LabeledExample};
use latent_ties::graph::{InferredGraph, ThresholdRule};
use latent_ties::infer::{
    candidate_thresholds, edge_f1, materialize, score_population, score_raters, survey_distribution,
    threshold_oversampled, threshold_undersampled, DegreeDistribution, RaterScores, DEFAULT_EPSILON, MAX_CANDIDATES,
};
use latent_ties::series::{neighborhood, PairSeries};
use latent_ties::stats::logistic::{fit, gradient, log_likelihood};
use latent_ties::stats::roc::auc;
use latent_ties::store::{Counters, EventStore, InteractionEvent, PlayerId, Window};
use latent_ties::synth::{generate, World, WorldConfig};
use latent_ties::temporal::{
    autocorrelation_fft, autocorrelation_sparse, entropy_of_counts, player_entropies, AutocorrConfig,
};

type Outcome = Result<String, String>;

/// Criteria that the default synthetic world does not meet. They still run
/// and print FAIL; the target fails if any other criterion fails or if one
/// of these starts passing.
const KNOWN_RED: &[u32] = &[7];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_bins(rng: &mut ChaCha8Rng, k: usize, total: u32) -> Vec<u32> {
    let mut set = BTreeSet::new();
    while set.len() < k.min(total as usize) {
        set.insert(rng.random_range(0..total));
    }
    set.into_iter().collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let total = rng.random_range(2..=50_000u32);
        let k = rng.random_range(1..=200usize).min(total as usize);
        let bins = random_bins(&mut rng, k, total);
        let tau = rng.random_range(1..total);
        let series = PairSeries::from_bins(bins.clone(), total).map_err(|e| e.to_string())?;
        let fft = autocorrelation_fft(&series, tau).map_err(|e| e.to_string())?;
        if fft != autocorrelation_sparse(&bins, tau) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        mismatches == 0 && secs < 10.0,
        format!("{mismatches} mismatches in 1000 series, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..100 {
        let total = rng.random_range(2..=50_000u32);
        let k = rng.random_range(1..=200usize).min(total as usize);
        let bins = random_bins(&mut rng, k, total);
        let series = PairSeries::from_bins(bins.clone(), total).map_err(|e| e.to_string())?;
        let expected = (k * (k - 1) / 2) as u64;
        let fft = autocorrelation_fft(&series, total - 1).map_err(|e| e.to_string())?;
        if fft != expected || autocorrelation_sparse(&bins, total - 1) != expected {
            bad += 1;
        }
    }
    check(bad == 0, format!("{bad} of 100 series differ from C(k,2)"))
}

fn mann_whitney(scored: &[(f64, bool)]) -> f64 {
    let (mut wins, mut pos, mut neg) = (0.0, 0usize, 0usize);
    for &(s, y) in scored {
        if y {
            pos += 1;
            for &(t, z) in scored {
                if !z {
                    wins += if s > t {
                        1.0
                    } else if s == t {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        } else {
            neg += 1;
        }
    }
    wins / (pos * neg) as f64
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = rng.random_range(2..=500usize);
        // Every fourth set draws scores from a handful of values.
        let levels = if trial % 4 == 0 { rng.random_range(1..=4u32) } else { 0 };
        let mut scored: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let s = if levels > 0 {
                    f64::from(rng.random_range(0..levels))
                } else {
                    rng.random::<f64>()
                };
                (s, rng.random_bool(0.3))
            })
            .collect();
        scored[0].1 = true;
        scored[1].1 = false;
        let fast = auc(&scored).map_err(|e| e.to_string())?;
        worst = worst.max((fast - mann_whitney(&scored)).abs());
    }
    check(worst <= 1e-12, format!("max |sweep - all pairs| = {worst:e} over 200 sets"))
}

fn planted(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<bool>) {
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..6.0)).collect();
    let ys = xs
        .iter()
        .map(|&x| rng.random::<f64>() < 1.0 / (1.0 + (3.0 - 0.8 * x).exp()))
        .collect();
    (xs, ys)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (xs, ys) = planted(&mut rng, 2000);
    let m = fit(&xs, &ys).map_err(|e| e.to_string())?;
    let g = gradient(m.intercept, m.coefficient, &xs, &ys);
    let gnorm = g[0].hypot(g[1]);

    let mut fd_err: f64 = 0.0;
    for &(b0, b1) in &[(-2.0, 0.5), (-3.5, 1.1), (0.3, -0.2)] {
        let a = gradient(b0, b1, &xs, &ys);
        let h = 1e-5;
        let d0 = (log_likelihood(b0 + h, b1, &xs, &ys) - log_likelihood(b0 - h, b1, &xs, &ys)) / (2.0 * h);
        let d1 = (log_likelihood(b0, b1 + h, &xs, &ys) - log_likelihood(b0, b1 - h, &xs, &ys)) / (2.0 * h);
        let rel = (a[0] - d0).hypot(a[1] - d1) / a[0].hypot(a[1]);
        fd_err = fd_err.max(rel);
    }

    let mut covered = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + trial);
        let (xs, ys) = planted(&mut rng, 1000);
        let m = fit(&xs, &ys).map_err(|e| e.to_string())?;
        if (m.intercept + 3.0).abs() <= 3.0 * m.intercept_std_error && (m.coefficient - 0.8).abs() <= 3.0 * m.std_error {
            covered += 1;
        }
    }
    check(
        gnorm < 1e-8 && fd_err < 1e-5 && covered >= 95,
        format!("gradient norm {gnorm:e}, finite-difference error {fd_err:e}, {covered}/100 within 3 SE"),
    )
}

struct Shared {
    world: World,
    store: EventStore,
    examples: Vec<LabeledExample>,
    games: HashMap<PlayerId, u64>,
    build_secs: f64,
}

fn shared() -> Result<Shared, String> {
    let start = Instant::now();
    let world = generate(&WorldConfig::default()).map_err(|e| e.to_string())?;
    let store = world.store(600).map_err(|e| e.to_string())?;
    let build_secs = start.elapsed().as_secs_f64();
    let rows: Vec<FeatureRow> = extract(&store, world.labels.raters(), &AutocorrConfig::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(FeatureRow::from)
        .collect();
    let examples = label_rows(&rows, &world.labels);
    let games = store
        .players()
        .iter()
        .map(|&p| (p, store.games_played(p).map(|n| n as u64).unwrap_or(0)))
        .collect();
    Ok(Shared {
        world,
        store,
        examples,
        games,
        build_secs,
    })
}

fn criterion_5(s: &Shared) -> Outcome {
    let start = Instant::now();
    let truth = &s.world.truth;
    let mut problems = Vec::new();
    let recorded: BTreeMap<PlayerId, u64> = s.games.iter().map(|(&p, &n)| (p, n)).collect();
    if recorded != truth.games_played {
        problems.push("N_x".to_string());
    }
    let mut pairs = 0usize;
    let mut mismatched = 0usize;
    for &x in s.store.players() {
        for (y, shared) in neighborhood(&s.store, x).map_err(|e| e.to_string())? {
            pairs += 1;
            let c = from_copresence(x, y, &shared).map_err(|e| e.to_string())?;
            match truth.pairs.get(&(x, y)) {
                Some(l)
                    if l.shared_games == shared.len() as u64
                        && l.assists == c.assists
                        && l.indirect == c.indirect
                        && l.betrayals == c.betrayals => {}
                _ => mismatched += 1,
            }
        }
    }
    if pairs != truth.pairs.len() {
        problems.push(format!("{} ledger pairs vs {pairs} recomputed", truth.pairs.len()));
    }
    if mismatched > 0 {
        problems.push(format!("{mismatched} pairs differ in N_xy/A/V/B"));
    }
    let secs = s.build_secs + start.elapsed().as_secs_f64();
    check(
        problems.is_empty() && secs < 60.0,
        format!(
            "{pairs} ordered pairs and {} players checked, {secs:.1} s{}",
            recorded.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn criterion_6(s: &Shared) -> Outcome {
    let table = feature_table(&s.examples, 42).map_err(|e| e.to_string())?;
    let of = |f: Feature| table.iter().find(|r| r.feature == f).map_or(f64::NAN, |r| r.auc);
    let (ac, assists) = (of(Feature::Autocorrelation), of(Feature::DirectAssists));
    let rank = auc_ranking(&table);
    let top: BTreeSet<Feature> = rank.iter().take(2).copied().collect();
    let expected: BTreeSet<Feature> = [Feature::Autocorrelation, Feature::DirectAssists].into();
    check(
        ac >= 0.95 && assists >= 0.90 && top == expected,
        format!(
            "AUC ac {ac:.4}, assists {assists:.4}; top two {} and {}",
            rank[0], rank[1]
        ),
    )
}

fn criterion_7(s: &Shared) -> Outcome {
    let features = [Feature::Autocorrelation, Feature::PairFrequency];
    let points = robustness_study(&s.examples, &s.games, &features, 10, 42).map_err(|e| e.to_string())?;
    let low = |f: Feature| points.iter().find(|p| p.bin_lo == 0 && p.feature == f);
    let (Some(ac), Some(nxy)) = (low(Feature::Autocorrelation), low(Feature::PairFrequency)) else {
        return Err("no raters with N_x < 10".into());
    };
    match (ac.mean_auc, ac.std_error, nxy.mean_auc, nxy.std_error) {
        (Some(a), Some(sa), Some(n), Some(sn)) => check(
            a > n,
            format!(
                "N_x < 10 bin ({} pairs, {} friends): AC {a:.4} (se {sa:.4}) vs N_xy {n:.4} (se {sn:.4})",
                ac.n_pairs, ac.n_friends
            ),
        ),
        _ => Err(format!(
            "N_x < 10 bin has {} pairs and {} friends, too few to split",
            ac.n_pairs, ac.n_friends
        )),
    }
}

fn random_scores(rng: &mut ChaCha8Rng) -> RaterScores {
    let raters = rng.random_range(5..60u64);
    let spread = rng.random_range(5..400u64);
    RaterScores::new(
        (0..raters)
            .map(|r| {
                let k = rng.random_range(0..40usize);
                // Squaring skews scores toward zero like real AC values.
                let s = (0..k).map(|_| rng.random_range(0..spread).pow(2) / spread).collect();
                (PlayerId(r), s)
            })
            .collect(),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut under_ok, mut over_ok) = (0, 0);
    let mut notes = Vec::new();
    for trial in 0..20 {
        let scores = random_scores(&mut rng);
        let cands = candidate_thresholds(scores.all_scores(), MAX_CANDIDATES);
        let distribution_at = |t: u64| DegreeDistribution::from_degrees(&scores.degrees_at(t)).ok();
        let usable: Vec<u64> = cands
            .iter()
            .copied()
            .filter(|&t| scores.degrees_at(t).into_iter().max().unwrap_or(0) > 0)
            .collect();
        if usable.is_empty() {
            notes.push(format!("trial {trial}: no scores"));
            continue;
        }
        // The generating threshold is taken as the largest candidate that
        // induces its degree distribution, since ties go to larger θ.
        let mut theta = usable[rng.random_range(0..usable.len())];
        let p = distribution_at(theta).ok_or("empty distribution")?;
        if let Some(&t) = usable.iter().rev().find(|&&t| distribution_at(t).as_ref() == Some(&p)) {
            theta = t;
        }
        match threshold_undersampled(&p, &cands, &scores, DEFAULT_EPSILON) {
            Ok(sel) if sel.threshold == theta => under_ok += 1,
            Ok(sel) => notes.push(format!("trial {trial}: under picked {} not {theta}", sel.threshold)),
            Err(e) => notes.push(format!("trial {trial}: {e}")),
        }

        let max_at = |t: u64| scores.degrees_at(t).into_iter().max().unwrap_or(0);
        let cap = rng.random_range(0..=max_at(cands[0]));
        let expected = cands.iter().position(|&t| max_at(t) <= cap);
        match (threshold_oversampled(cap, &cands, &scores), expected) {
            (Ok(sel), Some(i)) if sel.threshold == cands[i] && (i == 0 || max_at(cands[i - 1]) > cap) => over_ok += 1,
            (Err(_), None) => over_ok += 1,
            (got, _) => notes.push(format!("trial {trial}: over gave {got:?} for cap {cap}")),
        }
    }
    check(
        under_ok == 20 && over_ok == 20,
        format!(
            "undersampled {under_ok}/20 idempotent, oversampled {over_ok}/20 on the boundary{}",
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
    )
}

fn criterion_9(s: &Shared) -> Outcome {
    let config = AutocorrConfig::default();
    let raters = score_raters(&s.store, s.world.labels.raters(), &config).map_err(|e| e.to_string())?;
    let survey = survey_distribution(&s.world.labels).map_err(|e| e.to_string())?;
    let cands = candidate_thresholds(raters.all_scores(), MAX_CANDIDATES);
    let sel = threshold_undersampled(&survey, &cands, &raters, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
    let population = score_population(&s.store, &config).map_err(|e| e.to_string())?;
    let universe = s.world.truth.pairs_with_sessions(3);
    let truth = &s.world.truth.friendships;
    let graph = materialize(&population, sel.threshold, ThresholdRule::Undersampled);
    let chosen = edge_f1(&graph.edges(), truth, Some(&universe)).f1;

    // Brute-force ceiling: sweep every distinct AC value over the universe.
    let mut scored: Vec<(u64, bool)> = population
        .iter()
        .filter(|p| universe.contains(&(p.x, p.y)))
        .map(|p| (p.ac, s.world.truth.is_friend(p.x, p.y)))
        .collect();
    scored.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    let friends = truth.iter().filter(|&&(a, b)| universe.contains(&(a.min(b), a.max(b)))).count();
    let (mut ceiling, mut best_theta, mut tp, mut i) = (0.0f64, 0u64, 0usize, 0usize);
    while i < scored.len() {
        let v = scored[i].0;
        while i < scored.len() && scored[i].0 == v {
            tp += usize::from(scored[i].1);
            i += 1;
        }
        let f1 = 2.0 * tp as f64 / (i + friends) as f64;
        if f1 > ceiling {
            ceiling = f1;
            best_theta = v;
        }
    }
    check(
        chosen >= 0.8 && chosen >= 0.95 * ceiling,
        format!(
            "KL threshold {} gives F1 {chosen:.4}; ceiling {ceiling:.4} at {best_theta} over {} pairs",
            sel.threshold,
            universe.len()
        ),
    )
}

fn random_graph(rng: &mut ChaCha8Rng, n: u64) -> Vec<(PlayerId, PlayerId)> {
    let p = rng.random_range(0.01..0.3);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((PlayerId(a), PlayerId(b)));
            }
        }
    }
    edges
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    for trial in 0..50 {
        let n = rng.random_range(3..=200u64);
        let edges = random_graph(&mut rng, n);
        let g = InferredGraph::from_edges(&edges).map_err(|e| e.to_string())?;
        let nodes = g.nodes().to_vec();
        let m = nodes.len();
        let adj: Vec<Vec<bool>> = (0..m)
            .map(|i| (0..m).map(|j| g.has_edge(nodes[i], nodes[j])).collect())
            .collect();
        let clustering = g.clustering_all();
        for i in 0..m {
            let k = adj[i].iter().filter(|&&e| e).count();
            let mut links = 0usize;
            for j in 0..m {
                for l in j + 1..m {
                    if adj[i][j] && adj[i][l] && adj[j][l] {
                        links += 1;
                    }
                }
            }
            let brute = if k < 2 { 0.0 } else { links as f64 / (k * (k - 1) / 2) as f64 };
            if brute != clustering[i] {
                failures.push(format!("trial {trial}: clustering of node {i}"));
                break;
            }
        }
        let mut seen = vec![false; m];
        let mut sizes = Vec::new();
        for s in 0..m {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let (mut queue, mut size) = (VecDeque::from([s]), 0);
            while let Some(u) = queue.pop_front() {
                size += 1;
                for v in 0..m {
                    if adj[u][v] && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        if sizes != g.components() {
            failures.push(format!("trial {trial}: components"));
        }
    }

    let clique: Vec<_> = (0..6u64)
        .flat_map(|a| (a + 1..6).map(move |b| (PlayerId(a), PlayerId(b))))
        .collect();
    let g = InferredGraph::from_edges(&clique).map_err(|e| e.to_string())?;
    if g.clustering_all().iter().any(|&c| c != 1.0) || g.components() != vec![6] {
        failures.push("clique".into());
    }
    let star: Vec<_> = (1..8u64).map(|b| (PlayerId(0), PlayerId(b))).collect();
    let g = InferredGraph::from_edges(&star).map_err(|e| e.to_string())?;
    if g.clustering_all().iter().any(|&c| c != 0.0) || g.degree(PlayerId(0)).ok() != Some(7) {
        failures.push("star".into());
    }
    let triangle = [(PlayerId(0), PlayerId(1)), (PlayerId(1), PlayerId(2)), (PlayerId(0), PlayerId(2))];
    let g = InferredGraph::from_edges(&triangle).map_err(|e| e.to_string())?;
    if g.clustering_all() != vec![1.0; 3] || g.components() != vec![3] {
        failures.push("triangle".into());
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "50 random graphs match brute force and BFS; clique, star and triangle hold".into()
        } else {
            failures.join("; ")
        },
    )
}

fn file_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().flatten().collect();
        entries.sort_by_key(|e| e.path());
        for e in entries {
            let path = e.path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "8"), ("c", "8")] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_latent-ties"))
            .args(["--seed", "42", "--threads", threads, "pipeline", "-o"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("pipeline run {name} exited with {status}"));
        }
        trees.push(file_tree(&out));
    }
    let files = trees[0].len();
    let differing = |a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>| -> Vec<String> {
        a.keys()
            .chain(b.keys())
            .filter(|k| a.get(*k) != b.get(*k))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    let threads = differing(&trees[0], &trees[1]);
    let repeat = differing(&trees[1], &trees[2]);
    check(
        files > 0 && threads.is_empty() && repeat.is_empty(),
        format!(
            "{files} files; threads 1 vs 8 differ in {:?}, repeated run differs in {:?}",
            threads, repeat
        ),
    )
}

fn criterion_12() -> Outcome {
    let single = entropy_of_counts([17]);
    let uniform = entropy_of_counts([5; 7]);
    let ln7 = 7f64.ln();

    // One game per weekday in a single playlist, starting on a Monday.
    let monday = 1_284_940_800;
    let events: Vec<InteractionEvent> = (0..7)
        .map(|d| InteractionEvent {
            game_id: d,
            timestamp: monday + d as i64 * 86_400 + 3600,
            playlist: 2,
            team: 0,
            player: PlayerId(1),
            counters: Counters::default(),
        })
        .collect();
    let window = Window {
        start: monday,
        end: monday + 7 * 86_400,
    };
    let store = EventStore::from_events(Some(window), 600, events).map_err(|e| e.to_string())?;
    let week = player_entropies(&store, PlayerId(1)).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut events = Vec::new();
    let mut game = 0u64;
    for agent in 0..1000u64 {
        let games = rng.random_range(1..60);
        let lists = rng.random_range(1..6u16);
        for _ in 0..games {
            events.push(InteractionEvent {
                game_id: game,
                timestamp: window.start + rng.random_range(0..28 * 86_400),
                playlist: rng.random_range(0..lists),
                team: 0,
                player: PlayerId(agent),
                counters: Counters::default(),
            });
            game += 1;
        }
    }
    events.shuffle(&mut rng);
    let wide = Window {
        start: window.start,
        end: window.start + 28 * 86_400,
    };
    let store = EventStore::from_events(Some(wide), 600, events).map_err(|e| e.to_string())?;
    let mut violations = 0;
    for &p in store.players() {
        let h = player_entropies(&store, p).map_err(|e| e.to_string())?;
        if h.joint < h.schedule.max(h.spatial) {
            violations += 1;
        }
    }
    check(
        single == 0.0
            && week.spatial == 0.0
            && (uniform - ln7).abs() <= 1e-12
            && (week.schedule - ln7).abs() <= 1e-12
            && violations == 0
            && store.players().len() == 1000,
        format!(
            "single location {single}, uniform over 7 off by {:e}, joint below marginal for {violations} of {} agents",
            (uniform - ln7).abs().max((week.schedule - ln7).abs()),
            store.players().len()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |n: u32, outcome: Outcome| {
        match &outcome {
            Ok(d) => println!("criterion {n}: PASS: {d}"),
            Err(d) => println!("criterion {n}: FAIL: {d}"),
        }
        results.push((n, outcome));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    let world = shared();
    let with_world = |f: fn(&Shared) -> Outcome| match &world {
        Ok(s) => f(s),
        Err(e) => Err(format!("default world failed: {e}")),
    };
    report(5, with_world(criterion_5));
    report(6, with_world(criterion_6));
    report(7, with_world(criterion_7));
    report(8, criterion_8());
    report(9, with_world(criterion_9));
    report(10, criterion_10());
    report(11, criterion_11());
    report(12, criterion_12());
    let failed: Vec<u32> = results.iter().filter(|(_, o)| o.is_err()).map(|(n, _)| *n).collect();
    println!("{} of {} criteria pass", results.len() - failed.len(), results.len());
    let unexpected: Vec<u32> = failed.iter().copied().filter(|n| !KNOWN_RED.contains(n)).collect();
    let fixed: Vec<u32> = KNOWN_RED.iter().copied().filter(|n| !failed.contains(n)).collect();
    if !failed.is_empty() {
        println!("known red: {KNOWN_RED:?}; unexpected failures: {unexpected:?}");
    }
    if !fixed.is_empty() {
        println!("criteria {fixed:?} now pass; remove them from KNOWN_RED");
    }
    if unexpected.is_empty() && fixed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
