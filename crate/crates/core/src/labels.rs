//! Directed friendship labels from raters.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use crate::store::{PlayerId, StoreError};

/// One (rater, target) judgement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledTie {
    pub rater: PlayerId,
    pub target: PlayerId,
    pub friend: bool,
}

/// Label file contents. A co-played pair the rater never labeled counts as
/// a non-friend.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    ties: BTreeMap<(PlayerId, PlayerId), bool>,
    raters: BTreeSet<PlayerId>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tie: LabeledTie) {
        self.raters.insert(tie.rater);
        self.ties.insert((tie.rater, tie.target), tie.friend);
    }

    pub fn is_friend(&self, rater: PlayerId, target: PlayerId) -> bool {
        self.ties.get(&(rater, target)).copied().unwrap_or(false)
    }

    pub fn raters(&self) -> &BTreeSet<PlayerId> {
        &self.raters
    }

    pub fn len(&self) -> usize {
        self.ties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ties.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = LabeledTie> + '_ {
        self.ties.iter().map(|(&(rater, target), &friend)| LabeledTie {
            rater,
            target,
            friend,
        })
    }

    /// Number of friends each rater declared (raters with none map to 0).
    pub fn friend_counts(&self) -> BTreeMap<PlayerId, usize> {
        let mut counts: BTreeMap<PlayerId, usize> = self.raters.iter().map(|&r| (r, 0)).collect();
        for t in self.iter().filter(|t| t.friend) {
            *counts.entry(t.rater).or_default() += 1;
        }
        counts
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, StoreError> {
        let mut set = LabelSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |message: String| StoreError::Malformed {
                line: idx + 1,
                message,
            };
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", fields.len())));
            }
            let rater = fields[0]
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad rater_id: {:?}", fields[0])))?;
            let target = fields[1]
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad target_id: {:?}", fields[1])))?;
            let friend = match fields[2].trim() {
                "0" => false,
                "1" => true,
                other => return Err(bad(format!("label must be 0 or 1, found {other:?}"))),
            };
            set.insert(LabeledTie {
                rater: PlayerId(rater),
                target: PlayerId(target),
                friend,
            });
        }
        Ok(set)
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in self.iter() {
            writeln!(w, "{}\t{}\t{}", t.rater, t.target, u8::from(t.friend))?;
        }
        Ok(())
    }
}
