//! Directed cooperative features x → y.
//!
//! Per-game counters are player totals, so x's whole counter for a game is
//! credited to every co-player that qualifies for that game: teammates for
//! assists, opponents for betrayals.

use thiserror::Error;

use crate::store::{Copresence, EventStore, PlayerId, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CooperativeFeatures {
    /// A_{x,y}: x's direct assists in same-team games.
    pub assists: u64,
    /// V_{x,y}: x's indirect assists in same-team games.
    pub indirect: u64,
    /// B_{x,y}: x's betrayals in games against y.
    pub betrayals: u64,
}

#[derive(Debug, Error)]
pub enum CooperativeError {
    #[error("cooperative counter overflow between {0} and {1}")]
    Overflow(PlayerId, PlayerId),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl CooperativeFeatures {
    /// Credit one shared game. `None` on overflow.
    pub fn add_game(&mut self, game: &Copresence) -> Option<()> {
        if game.same_team {
            self.assists = self.assists.checked_add(game.x.direct_assists as u64)?;
            self.indirect = self.indirect.checked_add(game.x.indirect_assists as u64)?;
        } else {
            self.betrayals = self.betrayals.checked_add(game.x.betrayals as u64)?;
        }
        Some(())
    }
}

/// Accumulate from the games `x` shared with `y`, `x`'s counters on the `x` side.
pub fn from_copresence(x: PlayerId, y: PlayerId, shared: &[Copresence]) -> Result<CooperativeFeatures, CooperativeError> {
    let mut f = CooperativeFeatures::default();
    for game in shared {
        f.add_game(game).ok_or(CooperativeError::Overflow(x, y))?;
    }
    Ok(f)
}

pub fn cooperative_features(store: &EventStore, x: PlayerId, y: PlayerId) -> Result<CooperativeFeatures, CooperativeError> {
    from_copresence(x, y, &store.copresence(x, y)?)
}

pub fn direct_assists(store: &EventStore, x: PlayerId, y: PlayerId) -> Result<u64, CooperativeError> {
    Ok(cooperative_features(store, x, y)?.assists)
}

pub fn indirect_assists(store: &EventStore, x: PlayerId, y: PlayerId) -> Result<u64, CooperativeError> {
    Ok(cooperative_features(store, x, y)?.indirect)
}

pub fn betrayals_toward(store: &EventStore, x: PlayerId, y: PlayerId) -> Result<u64, CooperativeError> {
    Ok(cooperative_features(store, x, y)?.betrayals)
}
