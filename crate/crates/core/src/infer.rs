//! Threshold selection by degree-distribution matching, and materialization
//! of the thresholded population network.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{InferredGraph, Provenance, ThresholdRule};
use crate::labels::LabelSet;
use crate::series::{neighborhood, PairSeries};
use crate::store::{EventStore, PlayerId, StoreError};
use crate::temporal::{autocorrelation, AutocorrConfig, TemporalError};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const MAX_CANDIDATES: usize = 512;

#[derive(Debug, Error)]
pub enum InferError {
    #[error("degree distribution has no mass")]
    EmptyDistribution,
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("no candidate thresholds")]
    NoCandidates,
    #[error("every candidate threshold induces an empty graph")]
    EmptyGraph,
    #[error("no candidate keeps the maximum degree at or below {0}")]
    CapUnreachable(usize),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Probability mass over degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    probs: BTreeMap<usize, f64>,
}

impl DegreeDistribution {
    pub fn from_degrees(degrees: &[usize]) -> Result<Self, InferError> {
        if degrees.is_empty() {
            return Err(InferError::EmptyDistribution);
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in degrees {
            *counts.entry(d).or_default() += 1;
        }
        let n = degrees.len() as f64;
        Ok(DegreeDistribution {
            probs: counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect(),
        })
    }

    pub fn from_probabilities(probs: BTreeMap<usize, f64>) -> Result<Self, InferError> {
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-12 || probs.values().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(InferError::NotNormalized(total));
        }
        Ok(DegreeDistribution {
            probs: probs.into_iter().filter(|&(_, p)| p > 0.0).collect(),
        })
    }

    pub fn probability(&self, degree: usize) -> f64 {
        self.probs.get(&degree).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn max_degree(&self) -> usize {
        self.probs.keys().next_back().copied().unwrap_or(0)
    }
}

/// KL(P‖Q) in nats over P's support with `Q + epsilon` in the denominator.
pub fn kl_divergence_smoothed(p: &DegreeDistribution, q: &DegreeDistribution, epsilon: f64) -> f64 {
    p.iter().map(|(k, pk)| pk * (pk / (q.probability(k) + epsilon)).ln()).sum()
}

pub fn kl_divergence(p: &DegreeDistribution, q: &DegreeDistribution) -> f64 {
    kl_divergence_smoothed(p, q, DEFAULT_EPSILON)
}

/// A co-playing pair with `x < y` and its autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoredPair {
    pub x: PlayerId,
    pub y: PlayerId,
    pub ac: u64,
}

/// Each rater's co-player scores, sorted descending. Degree at θ is the
/// count of scores ≥ θ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaterScores {
    pub raters: Vec<PlayerId>,
    scores: Vec<Vec<u64>>,
}

impl RaterScores {
    pub fn new(per_rater: Vec<(PlayerId, Vec<u64>)>) -> Self {
        let (raters, mut scores): (Vec<_>, Vec<_>) = per_rater.into_iter().unzip();
        for s in &mut scores {
            s.sort_unstable_by(|a, b| b.cmp(a));
        }
        RaterScores { raters, scores }
    }

    pub fn degrees_at(&self, threshold: u64) -> Vec<usize> {
        self.scores
            .iter()
            .map(|s| s.partition_point(|&v| v >= threshold))
            .collect()
    }

    pub fn all_scores(&self) -> impl Iterator<Item = u64> + '_ {
        self.scores.iter().flatten().copied()
    }
}

/// Sorted unique scores, thinned to at most `limit` roughly log-spaced values.
pub fn candidate_thresholds(scores: impl IntoIterator<Item = u64>, limit: usize) -> Vec<u64> {
    let unique: Vec<u64> = scores.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    if unique.len() <= limit || limit < 2 {
        return unique;
    }
    let lo = unique.iter().copied().find(|&v| v > 0).unwrap_or(1) as f64;
    let hi = *unique.last().unwrap() as f64;
    let mut picked = BTreeSet::new();
    if unique[0] == 0 {
        picked.insert(0);
    }
    let steps = limit - picked.len();
    for i in 0..steps {
        let target = lo * (hi / lo).powf(i as f64 / (steps - 1) as f64);
        let at = unique.partition_point(|&v| (v as f64) < target).min(unique.len() - 1);
        picked.insert(unique[at]);
    }
    picked.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub threshold: u64,
    pub divergence: f64,
    pub max_degree: usize,
}

/// Candidate minimizing KL(P‖Q_θ); ties go to the larger threshold.
pub fn threshold_undersampled(
    survey: &DegreeDistribution,
    candidates: &[u64],
    scores: &RaterScores,
    epsilon: f64,
) -> Result<Selection, InferError> {
    if candidates.is_empty() {
        return Err(InferError::NoCandidates);
    }
    let evaluated: Vec<Option<Selection>> = candidates
        .par_iter()
        .map(|&threshold| {
            let degrees = scores.degrees_at(threshold);
            let max_degree = degrees.iter().copied().max().unwrap_or(0);
            if max_degree == 0 {
                return None;
            }
            let q = DegreeDistribution::from_degrees(&degrees).ok()?;
            Some(Selection {
                threshold,
                divergence: kl_divergence_smoothed(survey, &q, epsilon),
                max_degree,
            })
        })
        .collect();
    let mut best: Option<Selection> = None;
    let mut ordered: Vec<Selection> = evaluated.into_iter().flatten().collect();
    ordered.sort_by_key(|s| s.threshold);
    for s in ordered {
        if best.is_none_or(|b| s.divergence <= b.divergence) {
            best = Some(s);
        }
    }
    best.ok_or(InferError::EmptyGraph)
}

/// Smallest candidate whose induced maximum degree is at most `cap`.
pub fn threshold_oversampled(cap: usize, candidates: &[u64], scores: &RaterScores) -> Result<Selection, InferError> {
    if candidates.is_empty() {
        return Err(InferError::NoCandidates);
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let max_at = |t: u64| scores.degrees_at(t).into_iter().max().unwrap_or(0);
    // Max degree is non-increasing in θ, so the boundary is found by bisection.
    let at = sorted.partition_point(|&t| max_at(t) > cap);
    let threshold = *sorted.get(at).ok_or(InferError::CapUnreachable(cap))?;
    Ok(Selection {
        threshold,
        divergence: f64::NAN,
        max_degree: max_at(threshold),
    })
}

fn scores_of(store: &EventStore, x: PlayerId, config: &AutocorrConfig, keep: impl Fn(PlayerId) -> bool) -> Result<Vec<ScoredPair>, InferError> {
    neighborhood(store, x)?
        .into_iter()
        .filter(|(y, _)| keep(*y))
        .map(|(y, shared)| {
            let series = PairSeries::from_copresence(x, y, &shared, store.total_bins());
            Ok(ScoredPair {
                x,
                y,
                ac: autocorrelation(&series, config)?,
            })
        })
        .collect()
}

/// Autocorrelation of every rater against every co-player.
pub fn score_raters(store: &EventStore, raters: &BTreeSet<PlayerId>, config: &AutocorrConfig) -> Result<RaterScores, InferError> {
    let raters: Vec<PlayerId> = raters.iter().copied().filter(|r| store.contains(*r)).collect();
    let per_rater: Vec<(PlayerId, Vec<u64>)> = raters
        .par_iter()
        .map(|&r| Ok((r, scores_of(store, r, config, |_| true)?.into_iter().map(|s| s.ac).collect())))
        .collect::<Result<_, InferError>>()?;
    Ok(RaterScores::new(per_rater))
}

/// Autocorrelation of every co-playing pair, sorted by `(x, y)`.
pub fn score_population(store: &EventStore, config: &AutocorrConfig) -> Result<Vec<ScoredPair>, InferError> {
    let per_player: Vec<Vec<ScoredPair>> = store
        .players()
        .par_iter()
        .map(|&x| scores_of(store, x, config, |y| y > x))
        .collect::<Result<_, _>>()?;
    Ok(per_player.into_iter().flatten().collect())
}

/// Survey degree distribution: each rater's number of labeled friends.
pub fn survey_distribution(labels: &LabelSet) -> Result<DegreeDistribution, InferError> {
    let degrees: Vec<usize> = labels.friend_counts().into_values().collect();
    DegreeDistribution::from_degrees(&degrees)
}

/// Edges where `ac ≥ threshold`.
pub fn materialize(pairs: &[ScoredPair], threshold: u64, rule: ThresholdRule) -> InferredGraph {
    let edges: Vec<(PlayerId, PlayerId)> = pairs
        .par_iter()
        .filter(|p| p.ac >= threshold)
        .map(|p| (p.x, p.y))
        .collect();
    InferredGraph::from_edges(&edges)
        .expect("scored pairs are never self-pairs")
        .with_provenance(Provenance {
            threshold: threshold as f64,
            rule,
        })
}

pub fn write_degree_counts<W: Write>(mut w: W, degrees: &[usize]) -> io::Result<()> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in degrees {
        *counts.entry(d).or_default() += 1;
    }
    writeln!(w, "# degree\tcount")?;
    for (d, c) in counts {
        writeln!(w, "{d}\t{c}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Edge-set agreement, optionally restricted to a universe of pairs.
/// Pairs are compared unordered.
pub fn edge_f1(
    predicted: &[(PlayerId, PlayerId)],
    truth: &[(PlayerId, PlayerId)],
    universe: Option<&BTreeSet<(PlayerId, PlayerId)>>,
) -> EdgeScore {
    let canon = |set: &[(PlayerId, PlayerId)]| -> BTreeSet<(PlayerId, PlayerId)> {
        set.iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .filter(|e| universe.is_none_or(|u| u.contains(e)))
            .collect()
    };
    let (p, t) = (canon(predicted), canon(truth));
    let tp = p.intersection(&t).count();
    let (fp, fneg) = (p.len() - tp, t.len() - tp);
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    EdgeScore {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        precision,
        recall,
        f1,
    }
}
