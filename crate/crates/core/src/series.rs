//! Binary co-play series n_{x,y}(t) and candidate pair enumeration.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::store::{Copresence, EventStore, PlayerId, StoreError};

/// Sparse indicator series: the sorted, distinct bins in which a pair
/// shared at least one game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSeries {
    pub x: PlayerId,
    pub y: PlayerId,
    bins: Vec<u32>,
    total_bins: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("bins must be strictly increasing")]
    Unsorted,
    #[error("bin {bin} is outside a series of length {total_bins}")]
    OutOfRange { bin: u32, total_bins: u32 },
}

impl PairSeries {
    pub fn new(x: PlayerId, y: PlayerId, bins: Vec<u32>, total_bins: u32) -> Result<Self, SeriesError> {
        if bins.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeriesError::Unsorted);
        }
        if let Some(&last) = bins.last() {
            if last >= total_bins {
                return Err(SeriesError::OutOfRange { bin: last, total_bins });
            }
        }
        Ok(Self { x, y, bins, total_bins })
    }

    /// Series for an anonymous pair; handy for feature experiments.
    pub fn from_bins(bins: Vec<u32>, total_bins: u32) -> Result<Self, SeriesError> {
        Self::new(PlayerId(0), PlayerId(0), bins, total_bins)
    }

    /// Collapse a time-ordered copresence list into its indicator series.
    pub fn from_copresence(x: PlayerId, y: PlayerId, shared: &[Copresence], total_bins: u32) -> Self {
        let mut bins: Vec<u32> = shared.iter().map(|c| c.bin.0).collect();
        bins.dedup();
        Self { x, y, bins, total_bins }
    }

    pub fn bins(&self) -> &[u32] {
        &self.bins
    }

    pub fn total_bins(&self) -> u32 {
        self.total_bins
    }

    /// Number of bins with an interaction.
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Dense 0/1 expansion over `[first, last]`.
    pub fn dense_span(&self) -> Vec<f64> {
        match (self.bins.first(), self.bins.last()) {
            (Some(&lo), Some(&hi)) => {
                let mut dense = vec![0.0; (hi - lo + 1) as usize];
                for &b in &self.bins {
                    dense[(b - lo) as usize] = 1.0;
                }
                dense
            }
            _ => Vec::new(),
        }
    }
}

pub fn build_series(store: &EventStore, x: PlayerId, y: PlayerId) -> Result<PairSeries, StoreError> {
    let shared = store.copresence(x, y)?;
    Ok(PairSeries::from_copresence(x, y, &shared, store.total_bins()))
}

/// All co-players of `x` with the games they shared, sorted by co-player.
///
/// Equivalent to calling [`EventStore::copresence`] for every co-player but
/// touches each of `x`'s games once.
pub fn neighborhood(store: &EventStore, x: PlayerId) -> Result<Vec<(PlayerId, Vec<Copresence>)>, StoreError> {
    let slot = store.player_slot(x)?;
    let mut by_player: HashMap<PlayerId, Vec<Copresence>> = HashMap::new();
    for &off in store.event_offsets(slot) {
        let me = &store.events()[off as usize];
        let game = &store.games()[store.game_of_event(off)];
        for other in store.game_events(game) {
            if other.player == x {
                continue;
            }
            by_player.entry(other.player).or_default().push(Copresence {
                game_id: game.game_id,
                timestamp: game.timestamp,
                bin: game.bin,
                same_team: other.team == me.team,
                playlist: game.playlist,
                x: me.counters,
                y: other.counters,
            });
        }
    }
    let mut out: Vec<_> = by_player.into_iter().collect();
    out.sort_unstable_by_key(|(p, _)| *p);
    Ok(out)
}

/// Ordered (focal, other) pairs with at least one shared game.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairUniverse {
    pairs: Vec<(PlayerId, PlayerId)>,
}

impl PairUniverse {
    pub fn pairs(&self) -> &[(PlayerId, PlayerId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn enumerate_pairs(store: &EventStore, focal: &BTreeSet<PlayerId>) -> Result<PairUniverse, StoreError> {
    let mut pairs = Vec::new();
    for &x in focal {
        let slot = store.player_slot(x)?;
        let mut others: Vec<PlayerId> = store
            .event_offsets(slot)
            .iter()
            .flat_map(|&off| {
                let game = &store.games()[store.game_of_event(off)];
                store.game_events(game).iter().map(|e| e.player)
            })
            .filter(|&p| p != x)
            .collect();
        others.sort_unstable();
        others.dedup();
        pairs.extend(others.into_iter().map(|y| (x, y)));
    }
    Ok(PairUniverse { pairs })
}

const CACHE_MAGIC: &[u8; 4] = b"LTPS";
const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("not a pair-series cache")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    Version(u32),
    #[error("cache was built from a different store")]
    StaleChecksum,
    #[error("corrupt cache: {0}")]
    Corrupt(#[from] SeriesError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Cache layout (little endian): magic, version, checksum length + bytes,
/// pair count, then per pair `x y total_bins k bins[k]`.
pub fn write_cache<W: Write>(mut w: W, store_checksum: &str, series: &[PairSeries]) -> io::Result<()> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(store_checksum.len() as u32).to_le_bytes())?;
    w.write_all(store_checksum.as_bytes())?;
    w.write_all(&(series.len() as u64).to_le_bytes())?;
    for s in series {
        w.write_all(&s.x.0.to_le_bytes())?;
        w.write_all(&s.y.0.to_le_bytes())?;
        w.write_all(&s.total_bins.to_le_bytes())?;
        w.write_all(&(s.bins.len() as u32).to_le_bytes())?;
        for b in &s.bins {
            w.write_all(&b.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_cache<R: Read>(mut r: R, expected_checksum: &str) -> Result<Vec<PairSeries>, CacheError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != CACHE_VERSION {
        return Err(CacheError::Version(version));
    }
    let mut checksum = vec![0u8; read_u32(&mut r)? as usize];
    r.read_exact(&mut checksum)?;
    if checksum != expected_checksum.as_bytes() {
        return Err(CacheError::StaleChecksum);
    }
    let n = read_u64(&mut r)?;
    let mut out = Vec::new();
    for _ in 0..n {
        let x = PlayerId(read_u64(&mut r)?);
        let y = PlayerId(read_u64(&mut r)?);
        let total = read_u32(&mut r)?;
        let k = read_u32(&mut r)?;
        let bins = (0..k).map(|_| read_u32(&mut r)).collect::<io::Result<Vec<_>>>()?;
        out.push(PairSeries::new(x, y, bins, total)?);
    }
    Ok(out)
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
