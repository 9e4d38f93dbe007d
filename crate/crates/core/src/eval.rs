//! Normalization, train/test splits, single-feature tables, tree
//! comparisons across feature sets, and the activity-binned robustness study.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::features::{self, Feature, FeatureError, FeatureVector, LabeledExample, NUM_FEATURES};
use crate::graph::ccdf;
use crate::stats::logistic::{fit_logistic, FitError, LogisticModel};
use crate::stats::roc::{auc, naive_error, RocError};
use crate::stats::tree::{fit_tree, TreeConfig, TreeError};
use crate::store::{EventStore, PlayerId, StoreError};
use crate::temporal::AutocorrConfig;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 examples, found {0}")]
    TooFewExamples(usize),
    #[error("the {0} set lacks one of the classes")]
    SingleClass(&'static str),
    #[error("sample of {requested} players requested from a population of {population}")]
    SampleTooLarge { requested: usize, population: usize },
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Roc(#[from] RocError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Per-feature divisors. A feature whose sample mean is not positive is
/// left unscaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationProfile {
    pub means: [f64; NUM_FEATURES],
    pub sampled_players: usize,
    pub sampled_pairs: usize,
}

impl NormalizationProfile {
    pub fn identity() -> Self {
        NormalizationProfile {
            means: [1.0; NUM_FEATURES],
            sampled_players: 0,
            sampled_pairs: 0,
        }
    }

    pub fn from_vectors(vectors: &[FeatureVector], sampled_players: usize) -> Self {
        let mut profile = Self::identity();
        profile.sampled_players = sampled_players;
        profile.sampled_pairs = vectors.len();
        if vectors.is_empty() {
            return profile;
        }
        for f in Feature::ALL {
            let mean = vectors.iter().map(|v| v.get(f)).sum::<f64>() / vectors.len() as f64;
            if mean > 0.0 && mean.is_finite() {
                profile.means[f.index()] = mean;
            }
        }
        profile
    }

    pub fn divisor(&self, f: Feature) -> f64 {
        self.means[f.index()]
    }

    pub fn apply(&self, v: &FeatureVector) -> FeatureVector {
        let mut out = *v;
        for (x, m) in out.0.iter_mut().zip(&self.means) {
            *x /= m;
        }
        out
    }

    pub fn apply_all(&self, examples: &[LabeledExample]) -> Vec<LabeledExample> {
        examples
            .iter()
            .map(|e| LabeledExample {
                features: self.apply(&e.features),
                ..*e
            })
            .collect()
    }
}

/// Players drawn uniformly without replacement, sorted.
pub fn sample_players(store: &EventStore, sample_size: usize, seed: u64) -> Result<BTreeSet<PlayerId>, EvalError> {
    let population = store.players();
    if sample_size > population.len() {
        return Err(EvalError::SampleTooLarge {
            requested: sample_size,
            population: population.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, population.len(), sample_size)
        .into_iter()
        .map(|i| population[i])
        .collect())
}

/// Feature means over every pair of a seeded uniform player sample.
pub fn build_normalization(
    store: &EventStore,
    sample_size: usize,
    seed: u64,
    config: &AutocorrConfig,
) -> Result<NormalizationProfile, EvalError> {
    let sample = sample_players(store, sample_size, seed)?;
    let pairs = features::extract(store, &sample, config)?;
    let vectors: Vec<FeatureVector> = pairs.iter().map(|p| p.vector()).collect();
    Ok(NormalizationProfile::from_vectors(&vectors, sample.len()))
}

/// Random halves of `items`; the first half takes the odd element.
pub fn split_pairs<T: Clone>(items: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>), EvalError> {
    if items.len() < 2 {
        return Err(EvalError::TooFewExamples(items.len()));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let half = items.len().div_ceil(2);
    let train = order[..half].iter().map(|&i| items[i].clone()).collect();
    let test = order[half..].iter().map(|&i| items[i].clone()).collect();
    Ok((train, test))
}

/// Random halves of the raters; every example follows its rater.
pub fn split_individuals(
    examples: &[LabeledExample],
    seed: u64,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), EvalError> {
    let raters: Vec<PlayerId> = examples.iter().map(|e| e.rater).collect::<BTreeSet<_>>().into_iter().collect();
    if raters.len() < 2 {
        return Err(EvalError::TooFewExamples(raters.len()));
    }
    let (train_raters, _) = split_pairs(&raters, seed)?;
    let train_raters: BTreeSet<PlayerId> = train_raters.into_iter().collect();
    Ok(examples.iter().partition(|e| train_raters.contains(&e.rater)))
}

fn both_classes(examples: &[LabeledExample], which: &'static str) -> Result<(), EvalError> {
    let pos = examples.iter().filter(|e| e.friend).count();
    if pos == 0 || pos == examples.len() {
        Err(EvalError::SingleClass(which))
    } else {
        Ok(())
    }
}

/// Held-out AUC of ranking by the raw feature in the fitted direction.
///
/// The fitted score is a monotone map of the feature, so ranking the raw
/// value avoids ties introduced by rounding in `intercept + θ·x`.
pub fn directional_auc(test: &[LabeledExample], feature: Feature, coefficient: f64) -> Result<f64, RocError> {
    let sign = if coefficient < 0.0 { -1.0 } else { 1.0 };
    let scored: Vec<(f64, bool)> = test.iter().map(|e| (sign * e.features.get(feature), e.friend)).collect();
    auc(&scored)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub feature: Feature,
    pub model: LogisticModel,
    pub auc: f64,
}

/// One logistic model per feature, fitted on a random half of the pairs and
/// scored by AUC on the other half.
pub fn feature_table(examples: &[LabeledExample], seed: u64) -> Result<Vec<TableRow>, EvalError> {
    let (train, test) = split_pairs(examples, seed)?;
    both_classes(&train, "training")?;
    both_classes(&test, "test")?;
    Feature::ALL
        .par_iter()
        .map(|&feature| {
            let model = fit_logistic(&train, feature)?;
            let auc = directional_auc(&test, feature, model.coefficient)?;
            Ok(TableRow { feature, model, auc })
        })
        .collect()
}

/// Features ordered by descending AUC.
pub fn auc_ranking(rows: &[TableRow]) -> Vec<Feature> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| b.auc.total_cmp(&a.auc).then(a.feature.cmp(&b.feature)));
    sorted.into_iter().map(|r| r.feature).collect()
}

pub fn write_table<W: Write>(mut w: W, rows: &[TableRow]) -> io::Result<()> {
    writeln!(w, "# feature\ttheta\tsigma\tz\tp\tauc")?;
    for r in rows {
        let m = &r.model;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{:e}\t{}",
            r.feature, m.coefficient, m.std_error, m.z, m.p_value, r.auc
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub name: String,
    pub features: Vec<Feature>,
}

/// All features, temporal only, cooperative only, and all but direct assists.
pub fn default_feature_sets() -> Vec<FeatureSet> {
    let all = Feature::ALL.to_vec();
    vec![
        FeatureSet {
            name: "all".into(),
            features: all.clone(),
        },
        FeatureSet {
            name: "temporal".into(),
            features: all.iter().copied().filter(|f| f.is_temporal()).collect(),
        },
        FeatureSet {
            name: "cooperative".into(),
            features: all.iter().copied().filter(|f| !f.is_temporal()).collect(),
        },
        FeatureSet {
            name: "no-assists".into(),
            features: all.into_iter().filter(|&f| f != Feature::DirectAssists).collect(),
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeComparison {
    pub name: String,
    pub auc: f64,
    pub root: Option<Feature>,
    pub nodes: usize,
    pub naive_error: f64,
}

/// Fit a pruned tree per feature set on one half of the raters and score
/// it on the other half.
pub fn compare_feature_sets(
    examples: &[LabeledExample],
    sets: &[FeatureSet],
    config: &TreeConfig,
    seed: u64,
) -> Result<Vec<TreeComparison>, EvalError> {
    let (train, test) = split_individuals(examples, seed)?;
    both_classes(&train, "training")?;
    both_classes(&test, "test")?;
    let labels: Vec<bool> = test.iter().map(|e| e.friend).collect();
    let naive = naive_error(&labels).unwrap_or(0.0);
    sets.par_iter()
        .map(|set| {
            let cfg = TreeConfig {
                features: set.features.clone(),
                ..config.clone()
            };
            let tree = fit_tree(&train, &cfg)?;
            let scored: Vec<(f64, bool)> = test.iter().map(|e| (tree.predict(&e.features), e.friend)).collect();
            Ok(TreeComparison {
                name: set.name.clone(),
                auc: auc(&scored)?,
                root: tree.root_feature(),
                nodes: tree.node_count(),
                naive_error: naive,
            })
        })
        .collect()
}

pub fn write_tree_comparison<W: Write>(mut w: W, rows: &[TreeComparison]) -> io::Result<()> {
    writeln!(w, "# feature_set\tauc\troot\tnodes\tnaive_error")?;
    for r in rows {
        let root = r.root.map_or("leaf".to_string(), |f| f.to_string());
        writeln!(w, "{}\t{}\t{}\t{}\t{}", r.name, r.auc, root, r.nodes, r.naive_error)?;
    }
    Ok(())
}

/// Activity bin `[lo, hi)`: width 10 below 100 games, width 100 above.
pub fn nx_bin(n_x: u64) -> (u64, u64) {
    let width = if n_x < 100 { 10 } else { 100 };
    let lo = n_x / width * width;
    (lo, lo + width)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessPoint {
    pub bin_lo: u64,
    pub bin_hi: u64,
    pub feature: Feature,
    /// `None` when the bin cannot be split into halves holding both classes.
    pub mean_auc: Option<f64>,
    pub std_error: Option<f64>,
    pub n_pairs: usize,
    pub n_friends: usize,
}

fn permutation_seed(seed: u64, bin_lo: u64, permutation: usize) -> u64 {
    seed ^ bin_lo.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (permutation as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Halves with friends and non-friends split evenly between them.
fn stratified_split(examples: &[LabeledExample], seed: u64) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in [true, false] {
        let mut members: Vec<LabeledExample> = examples.iter().filter(|e| e.friend == class).copied().collect();
        members.shuffle(&mut rng);
        let half = members.len() / 2;
        test.extend_from_slice(&members[half..]);
        members.truncate(half);
        train.extend(members);
    }
    (train, test)
}

/// Mean held-out AUC and its standard error per (activity bin, feature),
/// binning each pair by its rater's game count.
pub fn robustness_study(
    examples: &[LabeledExample],
    games_played: &HashMap<PlayerId, u64>,
    features: &[Feature],
    permutations: usize,
    seed: u64,
) -> Result<Vec<RobustnessPoint>, EvalError> {
    let mut bins: BTreeMap<(u64, u64), Vec<LabeledExample>> = BTreeMap::new();
    for e in examples {
        let n_x = games_played.get(&e.rater).copied().unwrap_or(0);
        bins.entry(nx_bin(n_x)).or_default().push(*e);
    }
    let cells: Vec<((u64, u64), Feature)> = bins
        .keys()
        .flat_map(|&b| features.iter().map(move |&f| (b, f)))
        .collect();
    cells
        .par_iter()
        .map(|&((lo, hi), feature)| {
            let members = &bins[&(lo, hi)];
            let n_friends = members.iter().filter(|e| e.friend).count();
            let mut point = RobustnessPoint {
                bin_lo: lo,
                bin_hi: hi,
                feature,
                mean_auc: None,
                std_error: None,
                n_pairs: members.len(),
                n_friends,
            };
            if n_friends < 2 || members.len() - n_friends < 2 || permutations == 0 {
                return Ok(point);
            }
            let mut aucs = Vec::with_capacity(permutations);
            for p in 0..permutations {
                let (train, test) = stratified_split(members, permutation_seed(seed, lo, p));
                let direction = fit_logistic(&train, feature).map_or(1.0, |m| m.coefficient);
                aucs.push(directional_auc(&test, feature, direction)?);
            }
            let n = aucs.len() as f64;
            let mean = aucs.iter().sum::<f64>() / n;
            let sd = if aucs.len() > 1 {
                (aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            point.mean_auc = Some(mean);
            point.std_error = Some(sd / n.sqrt());
            Ok(point)
        })
        .collect()
}

pub fn write_robustness<W: Write>(mut w: W, points: &[RobustnessPoint]) -> io::Result<()> {
    writeln!(w, "# bin_lo\tbin_hi\tfeature\tmean_auc\tse\tn_pairs")?;
    for p in points {
        match (p.mean_auc, p.std_error) {
            (Some(m), Some(se)) => writeln!(w, "{}\t{}\t{}\t{m}\t{se}\t{}", p.bin_lo, p.bin_hi, p.feature, p.n_pairs)?,
            _ => writeln!(w, "{}\t{}\t{}\tskipped\tskipped\t{}", p.bin_lo, p.bin_hi, p.feature, p.n_pairs)?,
        }
    }
    Ok(())
}

/// `(n, P(N_x ≥ n))` over every player in the store.
pub fn activity_ccdf(store: &EventStore) -> Result<Vec<(usize, f64)>, EvalError> {
    let counts = store
        .players()
        .iter()
        .map(|&p| store.games_played(p).map(|n| n as usize))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ccdf(&counts))
}

pub fn write_activity_ccdf<W: Write>(mut w: W, points: &[(usize, f64)]) -> io::Result<()> {
    writeln!(w, "# n_x\tccdf")?;
    for (n, p) in points {
        writeln!(w, "{n}\t{p}")?;
    }
    Ok(())
}
