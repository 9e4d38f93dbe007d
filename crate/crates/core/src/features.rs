//! The nine per-pair features, batch extraction, and the feature dump.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::cooperative::{self, CooperativeError, CooperativeFeatures};
use crate::labels::LabelSet;
use crate::series::{neighborhood, PairSeries};
use crate::store::{EventStore, PlayerId, StoreError};
use crate::temporal::{self, player_entropies, AutocorrConfig, PlayerEntropies, TemporalError, TemporalFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Autocorrelation,
    PairFrequency,
    NormalizedPairFrequency,
    ScheduleEntropy,
    SpatialEntropy,
    JointEntropy,
    DirectAssists,
    IndirectAssists,
    Betrayals,
}

pub const NUM_FEATURES: usize = 9;

impl Feature {
    /// Dump column order.
    pub const ALL: [Feature; NUM_FEATURES] = [
        Feature::Autocorrelation,
        Feature::PairFrequency,
        Feature::NormalizedPairFrequency,
        Feature::ScheduleEntropy,
        Feature::SpatialEntropy,
        Feature::JointEntropy,
        Feature::DirectAssists,
        Feature::IndirectAssists,
        Feature::Betrayals,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn column(self) -> &'static str {
        match self {
            Feature::Autocorrelation => "ac",
            Feature::PairFrequency => "n_xy",
            Feature::NormalizedPairFrequency => "norm_freq",
            Feature::ScheduleEntropy => "h_t",
            Feature::SpatialEntropy => "h_s",
            Feature::JointEntropy => "h_st",
            Feature::DirectAssists => "assists",
            Feature::IndirectAssists => "indirect",
            Feature::Betrayals => "betrayals",
        }
    }

    pub fn is_temporal(self) -> bool {
        self.index() < 6
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.column() == s)
            .ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        self.0[feature.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFeatures {
    pub x: PlayerId,
    pub y: PlayerId,
    pub temporal: TemporalFeatures,
    pub cooperative: CooperativeFeatures,
}

impl PairFeatures {
    pub fn vector(&self) -> FeatureVector {
        let t = &self.temporal;
        let c = &self.cooperative;
        FeatureVector([
            t.ac as f64,
            t.pair_freq as f64,
            t.norm_pair_freq,
            t.h_t,
            t.h_s,
            t.h_st,
            c.assists as f64,
            c.indirect as f64,
            c.betrayals as f64,
        ])
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Cooperative(#[from] CooperativeError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("feature dump line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// All nine features for one ordered pair.
pub fn pair_features(
    store: &EventStore,
    x: PlayerId,
    y: PlayerId,
    config: &AutocorrConfig,
) -> Result<PairFeatures, FeatureError> {
    Ok(PairFeatures {
        x,
        y,
        temporal: temporal::temporal_features(store, x, y, config)?,
        cooperative: cooperative::cooperative_features(store, x, y)?,
    })
}

/// Individual entropies for every player in the store.
pub fn entropy_table(store: &EventStore) -> Result<HashMap<PlayerId, PlayerEntropies>, TemporalError> {
    store
        .players()
        .par_iter()
        .map(|&p| Ok((p, player_entropies(store, p)?)))
        .collect()
}

/// Features of every (focal, co-player) pair, sorted by `(x, y)`.
pub fn extract(
    store: &EventStore,
    focal: &BTreeSet<PlayerId>,
    config: &AutocorrConfig,
) -> Result<Vec<PairFeatures>, FeatureError> {
    let entropies = entropy_table(store)?;
    let focal: Vec<PlayerId> = focal.iter().copied().collect();
    let per_focal: Vec<Vec<PairFeatures>> = focal
        .par_iter()
        .map(|&x| focal_features(store, x, &entropies, config))
        .collect::<Result<_, _>>()?;
    Ok(per_focal.into_iter().flatten().collect())
}

fn focal_features(
    store: &EventStore,
    x: PlayerId,
    entropies: &HashMap<PlayerId, PlayerEntropies>,
    config: &AutocorrConfig,
) -> Result<Vec<PairFeatures>, FeatureError> {
    let n_x = store.games_played(x)?;
    let ex = entropies[&x];
    neighborhood(store, x)?
        .into_iter()
        .map(|(y, shared)| {
            let series = PairSeries::from_copresence(x, y, &shared, store.total_bins());
            let (pair_freq, norm_pair_freq) = temporal::frequency_from(x, n_x, &shared)?;
            let ey = entropies[&y];
            Ok(PairFeatures {
                x,
                y,
                temporal: TemporalFeatures {
                    ac: temporal::autocorrelation(&series, config)?,
                    pair_freq,
                    norm_pair_freq,
                    h_t: ex.schedule + ey.schedule,
                    h_s: ex.spatial + ey.spatial,
                    h_st: ex.joint + ey.joint,
                },
                cooperative: cooperative::from_copresence(x, y, &shared)?,
            })
        })
        .collect()
}

/// One row of the feature dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRow {
    pub x: PlayerId,
    pub y: PlayerId,
    pub values: FeatureVector,
}

impl From<&PairFeatures> for FeatureRow {
    fn from(p: &PairFeatures) -> Self {
        FeatureRow {
            x: p.x,
            y: p.y,
            values: p.vector(),
        }
    }
}

pub fn write_dump<W: Write>(mut w: W, rows: &[FeatureRow]) -> io::Result<()> {
    write!(w, "# x\ty")?;
    for f in Feature::ALL {
        write!(w, "\t{}", f.column())?;
    }
    writeln!(w)?;
    for r in rows {
        write!(w, "{}\t{}", r.x, r.y)?;
        for v in r.values.0 {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_dump<R: BufRead>(reader: R) -> Result<Vec<FeatureRow>, FeatureError> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| FeatureError::Malformed {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 + NUM_FEATURES {
            return Err(bad(format!("expected {} fields, found {}", 2 + NUM_FEATURES, fields.len())));
        }
        let id = |s: &str| s.parse().map(PlayerId).map_err(|_| bad(format!("bad player id {s:?}")));
        let mut values = [0.0; NUM_FEATURES];
        for (slot, raw) in values.iter_mut().zip(&fields[2..]) {
            *slot = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| bad(format!("bad value {raw:?}")))?;
        }
        rows.push(FeatureRow {
            x: id(fields[0])?,
            y: id(fields[1])?,
            values: FeatureVector(values),
        });
    }
    Ok(rows)
}

/// A feature row joined with its rater's label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledExample {
    pub rater: PlayerId,
    pub target: PlayerId,
    pub features: FeatureVector,
    pub friend: bool,
}

/// Keep rows whose `x` is a rater; unlabeled co-players become non-friends.
pub fn label_rows(rows: &[FeatureRow], labels: &LabelSet) -> Vec<LabeledExample> {
    rows.iter()
        .filter(|r| labels.raters().contains(&r.x))
        .map(|r| LabeledExample {
            rater: r.x,
            target: r.y,
            features: r.values,
            friend: labels.is_friend(r.x, r.y),
        })
        .collect()
}
