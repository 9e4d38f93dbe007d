//! Immutable event store for co-play logs.
//!
//! Each record is one player's participation in one game instance. Records
//! are kept in canonical order `(timestamp, game_id, team, player)` so that
//! every game occupies a contiguous span, and a compressed per-player index
//! points back into that span list in time order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Default bin width: ten minutes.
pub const DEFAULT_BIN_SECONDS: u32 = 600;

const SECONDS_PER_DAY: i64 = 86_400;

/// Surrogate identifier for one individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PlayerId(pub u64);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Index of a fixed-width time bin counted from the store epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeBin(pub u32);

/// Per-player, per-game behavioral counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub direct_assists: u32,
    pub indirect_assists: u32,
    pub betrayals: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionEvent {
    pub game_id: u64,
    pub timestamp: i64,
    pub playlist: u16,
    pub team: u8,
    pub player: PlayerId,
    pub counters: Counters,
}

impl InteractionEvent {
    fn canonical_key(&self) -> (i64, u64, u8, PlayerId) {
        (self.timestamp, self.game_id, self.team, self.player)
    }
}

/// Half-open observation window `[start, end)` in unix seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn contains(&self, timestamp: i64) -> bool {
        self.start <= timestamp && timestamp < self.end
    }
}

/// Maps timestamps onto bins. The epoch is the window start truncated to
/// midnight UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinClock {
    pub epoch: i64,
    pub width: u32,
}

impl BinClock {
    pub fn for_window(window: Window, width: u32) -> Self {
        Self {
            epoch: window.start.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY,
            width,
        }
    }

    pub fn bin(&self, timestamp: i64) -> TimeBin {
        TimeBin(((timestamp - self.epoch) / self.width as i64) as u32)
    }

    pub fn bins_until(&self, end: i64) -> u32 {
        let span = (end - self.epoch).max(0);
        ((span + self.width as i64 - 1) / self.width as i64) as u32
    }
}

/// Day of week in UTC, Monday = 0.
pub fn weekday(timestamp: i64) -> u8 {
    // 1970-01-01 was a Thursday.
    ((timestamp.div_euclid(SECONDS_PER_DAY) + 3).rem_euclid(7)) as u8
}

/// Delimiter of the record format being read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordFormat {
    #[default]
    Tsv,
    Csv,
}

impl RecordFormat {
    fn split(self, line: &str) -> Vec<&str> {
        match self {
            RecordFormat::Tsv => line.split('\t').collect(),
            RecordFormat::Csv => line.split(',').map(str::trim).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamp {timestamp} outside window [{start}, {end})")]
    OutsideWindow {
        line: usize,
        timestamp: i64,
        start: i64,
        end: i64,
    },
    #[error("line {line}: duplicate record for game {game_id}, player {player}")]
    Duplicate {
        line: usize,
        game_id: u64,
        player: PlayerId,
    },
    #[error("line {line}: game {game_id} disagrees with earlier records on timestamp or playlist")]
    InconsistentGame { line: usize, game_id: u64 },
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("bin width must be positive")]
    ZeroBinWidth,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl StoreError {
    fn malformed(line: usize, message: impl Into<String>) -> Self {
        StoreError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// One game as seen by one participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameRef {
    pub game_id: u64,
    pub timestamp: i64,
    pub bin: TimeBin,
    pub team: u8,
    pub playlist: u16,
}

/// A game shared by two players, with each side's counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Copresence {
    pub game_id: u64,
    pub timestamp: i64,
    pub bin: TimeBin,
    pub same_team: bool,
    pub playlist: u16,
    pub x: Counters,
    pub y: Counters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameSpan {
    pub game_id: u64,
    pub timestamp: i64,
    pub bin: TimeBin,
    pub playlist: u16,
    start: u32,
    end: u32,
}

#[derive(Debug, Clone)]
pub struct EventStore {
    window: Window,
    clock: BinClock,
    total_bins: u32,
    events: Vec<InteractionEvent>,
    games: Vec<GameSpan>,
    event_game: Vec<u32>,
    players: Vec<PlayerId>,
    player_index: HashMap<PlayerId, u32>,
    player_offsets: Vec<u32>,
    player_events: Vec<u32>,
    playlists: Vec<u16>,
}

/// Append-only accumulator; `finish` freezes it into an [`EventStore`].
#[derive(Debug)]
pub struct StoreBuilder {
    window: Option<Window>,
    bin_seconds: u32,
    events: Vec<InteractionEvent>,
    lines: Vec<usize>,
}

impl StoreBuilder {
    pub fn new(window: Option<Window>, bin_seconds: u32) -> Self {
        Self {
            window,
            bin_seconds,
            events: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn set_window(&mut self, window: Window) {
        self.window = Some(window);
    }

    pub fn push(&mut self, event: InteractionEvent, line: usize) {
        self.events.push(event);
        self.lines.push(line);
    }

    pub fn finish(self) -> Result<EventStore, StoreError> {
        if self.bin_seconds == 0 {
            return Err(StoreError::ZeroBinWidth);
        }
        let window = match self.window {
            Some(w) => w,
            None => match (
                self.events.iter().map(|e| e.timestamp).min(),
                self.events.iter().map(|e| e.timestamp).max(),
            ) {
                (Some(lo), Some(hi)) => Window {
                    start: lo,
                    end: hi + 1,
                },
                _ => Window { start: 0, end: 0 },
            },
        };
        for (e, &line) in self.events.iter().zip(&self.lines) {
            if !window.contains(e.timestamp) {
                return Err(StoreError::OutsideWindow {
                    line,
                    timestamp: e.timestamp,
                    start: window.start,
                    end: window.end,
                });
            }
        }

        let mut order: Vec<usize> = (0..self.events.len()).collect();
        order.sort_by_key(|&i| (self.events[i].game_id, self.events[i].player, self.lines[i]));
        for pair in order.windows(2) {
            let (a, b) = (&self.events[pair[0]], &self.events[pair[1]]);
            if a.game_id == b.game_id {
                if a.player == b.player {
                    return Err(StoreError::Duplicate {
                        line: self.lines[pair[1]].max(self.lines[pair[0]]),
                        game_id: b.game_id,
                        player: b.player,
                    });
                }
                if a.timestamp != b.timestamp || a.playlist != b.playlist {
                    return Err(StoreError::InconsistentGame {
                        line: self.lines[pair[1]].max(self.lines[pair[0]]),
                        game_id: b.game_id,
                    });
                }
            }
        }

        let mut events = self.events;
        events.sort_by_key(InteractionEvent::canonical_key);
        Ok(EventStore::index(window, self.bin_seconds, events))
    }
}

impl EventStore {
    fn index(window: Window, bin_seconds: u32, events: Vec<InteractionEvent>) -> Self {
        let clock = BinClock::for_window(window, bin_seconds);
        let total_bins = clock.bins_until(window.end);

        let mut games = Vec::new();
        let mut event_game = Vec::with_capacity(events.len());
        let mut i = 0;
        while i < events.len() {
            let head = events[i];
            let mut j = i;
            while j < events.len() && events[j].game_id == head.game_id {
                event_game.push(games.len() as u32);
                j += 1;
            }
            games.push(GameSpan {
                game_id: head.game_id,
                timestamp: head.timestamp,
                bin: clock.bin(head.timestamp),
                playlist: head.playlist,
                start: i as u32,
                end: j as u32,
            });
            i = j;
        }

        let mut players: Vec<PlayerId> = events.iter().map(|e| e.player).collect();
        players.sort_unstable();
        players.dedup();
        let player_index: HashMap<PlayerId, u32> = players
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i as u32))
            .collect();

        let mut counts = vec![0u32; players.len() + 1];
        for e in &events {
            counts[player_index[&e.player] as usize + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let player_offsets = counts.clone();
        let mut cursor = counts;
        let mut player_events = vec![0u32; events.len()];
        for (idx, e) in events.iter().enumerate() {
            let p = player_index[&e.player] as usize;
            player_events[cursor[p] as usize] = idx as u32;
            cursor[p] += 1;
        }

        let mut playlists: Vec<u16> = games.iter().map(|g| g.playlist).collect();
        playlists.sort_unstable();
        playlists.dedup();

        Self {
            window,
            clock,
            total_bins,
            events,
            games,
            event_game,
            players,
            player_index,
            player_offsets,
            player_events,
            playlists,
        }
    }

    /// Build a store directly from in-memory records. Line numbers in
    /// errors refer to positions in `events` (1-based).
    pub fn from_events(
        window: Option<Window>,
        bin_seconds: u32,
        events: impl IntoIterator<Item = InteractionEvent>,
    ) -> Result<Self, StoreError> {
        let mut builder = StoreBuilder::new(window, bin_seconds);
        for (i, e) in events.into_iter().enumerate() {
            builder.push(e, i + 1);
        }
        builder.finish()
    }

    pub fn ingest(path: &Path, format: RecordFormat, bin_seconds: u32) -> Result<Self, StoreError> {
        let file = File::open(path)?;
        Self::read(BufReader::new(file), format, bin_seconds)
    }

    /// Parse an event log. The first `#` line consisting of exactly two
    /// integers declares the window; every other `#` line is a comment.
    pub fn read<R: BufRead>(reader: R, format: RecordFormat, bin_seconds: u32) -> Result<Self, StoreError> {
        let mut builder = StoreBuilder::new(None, bin_seconds);
        let mut have_window = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if !have_window {
                    if let Some(w) = parse_window(rest) {
                        builder.set_window(w);
                        have_window = true;
                    }
                }
                continue;
            }
            builder.push(parse_event(format.split(trimmed), line_no)?, line_no);
        }
        builder.finish()
    }

    /// Write the canonical log: window header, then records in canonical order.
    pub fn write_log<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# {}\t{}", self.window.start, self.window.end)?;
        for e in &self.events {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e.game_id,
                e.timestamp,
                e.playlist,
                e.team,
                e.player,
                e.counters.direct_assists,
                e.counters.indirect_assists,
                e.counters.betrayals
            )?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical log, hex encoded.
    pub fn checksum(&self) -> String {
        let mut buf = Vec::new();
        self.write_log(&mut buf).expect("writing to a Vec cannot fail");
        let mut hasher = Sha256::new();
        hasher.update(self.clock.width.to_le_bytes());
        hasher.update(&buf);
        hex(&hasher.finalize())
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn clock(&self) -> BinClock {
        self.clock
    }

    pub fn total_bins(&self) -> u32 {
        self.total_bins
    }

    pub fn events(&self) -> &[InteractionEvent] {
        &self.events
    }

    pub fn num_games(&self) -> usize {
        self.games.len()
    }

    pub fn games(&self) -> &[GameSpan] {
        &self.games
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn playlists(&self) -> &[u16] {
        &self.playlists
    }

    pub fn contains(&self, player: PlayerId) -> bool {
        self.player_index.contains_key(&player)
    }

    pub(crate) fn player_slot(&self, player: PlayerId) -> Result<usize, StoreError> {
        self.player_index
            .get(&player)
            .map(|&i| i as usize)
            .ok_or(StoreError::UnknownPlayer(player))
    }

    /// Event offsets of one player, in canonical (time) order.
    pub(crate) fn event_offsets(&self, slot: usize) -> &[u32] {
        let lo = self.player_offsets[slot] as usize;
        let hi = self.player_offsets[slot + 1] as usize;
        &self.player_events[lo..hi]
    }

    pub(crate) fn game_of_event(&self, offset: u32) -> usize {
        self.event_game[offset as usize] as usize
    }

    pub fn game_events(&self, game: &GameSpan) -> &[InteractionEvent] {
        &self.events[game.start as usize..game.end as usize]
    }

    /// N_x: number of games played by `player`.
    pub fn games_played(&self, player: PlayerId) -> Result<usize, StoreError> {
        Ok(self.event_offsets(self.player_slot(player)?).len())
    }

    pub fn games_of(&self, player: PlayerId) -> Result<Vec<GameRef>, StoreError> {
        let slot = self.player_slot(player)?;
        Ok(self
            .event_offsets(slot)
            .iter()
            .map(|&off| {
                let e = &self.events[off as usize];
                GameRef {
                    game_id: e.game_id,
                    timestamp: e.timestamp,
                    bin: self.clock.bin(e.timestamp),
                    team: e.team,
                    playlist: e.playlist,
                }
            })
            .collect())
    }

    /// Every game shared by `x` and `y`, in time order.
    pub fn copresence(&self, x: PlayerId, y: PlayerId) -> Result<Vec<Copresence>, StoreError> {
        let xs = self.event_offsets(self.player_slot(x)?);
        let ys = self.event_offsets(self.player_slot(y)?);
        let mut out = Vec::new();
        if x == y {
            return Ok(out);
        }
        let (mut i, mut j) = (0, 0);
        while i < xs.len() && j < ys.len() {
            let gx = self.game_of_event(xs[i]);
            let gy = self.game_of_event(ys[j]);
            match gx.cmp(&gy) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let ex = &self.events[xs[i] as usize];
                    let ey = &self.events[ys[j] as usize];
                    let game = &self.games[gx];
                    out.push(Copresence {
                        game_id: game.game_id,
                        timestamp: game.timestamp,
                        bin: game.bin,
                        same_team: ex.team == ey.team,
                        playlist: game.playlist,
                        x: ex.counters,
                        y: ey.counters,
                    });
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(out)
    }
}

fn parse_window(rest: &str) -> Option<Window> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    if tokens.len() != 2 {
        return None;
    }
    let start = tokens[0].parse().ok()?;
    let end = tokens[1].parse().ok()?;
    (end >= start).then_some(Window { start, end })
}

fn parse_event(fields: Vec<&str>, line: usize) -> Result<InteractionEvent, StoreError> {
    if fields.len() != 8 {
        return Err(StoreError::malformed(
            line,
            format!("expected 8 fields, found {}", fields.len()),
        ));
    }
    fn field<T: std::str::FromStr>(raw: &str, name: &str, line: usize) -> Result<T, StoreError> {
        raw.trim()
            .parse()
            .map_err(|_| StoreError::malformed(line, format!("bad {name}: {raw:?}")))
    }
    Ok(InteractionEvent {
        game_id: field(fields[0], "game_id", line)?,
        timestamp: field(fields[1], "timestamp", line)?,
        playlist: field(fields[2], "playlist", line)?,
        team: field(fields[3], "team", line)?,
        player: PlayerId(field(fields[4], "player_id", line)?),
        counters: Counters {
            direct_assists: field(fields[5], "direct_assists", line)?,
            indirect_assists: field(fields[6], "indirect_assists", line)?,
            betrayals: field(fields[7], "betrayals", line)?,
        },
    })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of `bytes`, hex encoded.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Optional sidecar mapping surrogate ids back to original identifiers.
pub fn read_name_map<R: BufRead>(reader: R) -> Result<BTreeMap<PlayerId, String>, StoreError> {
    let mut names = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, name) = line
            .split_once('\t')
            .ok_or_else(|| StoreError::malformed(idx + 1, "expected `player_id<TAB>name`"))?;
        let id = id
            .trim()
            .parse()
            .map_err(|_| StoreError::malformed(idx + 1, format!("bad player_id: {id:?}")))?;
        names.insert(PlayerId(id), name.to_string());
    }
    Ok(names)
}

pub fn write_name_map<W: Write>(mut w: W, names: &BTreeMap<PlayerId, String>) -> io::Result<()> {
    for (id, name) in names {
        writeln!(w, "{id}\t{name}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const START: i64 = 1_284_422_400; // midnight UTC

    fn ev(game_id: u64, timestamp: i64, team: u8, player: u64) -> InteractionEvent {
        InteractionEvent {
            game_id,
            timestamp,
            playlist: 1,
            team,
            player: PlayerId(player),
            counters: Counters::default(),
        }
    }

    fn parse(text: &str) -> Result<EventStore, StoreError> {
        EventStore::read(text.as_bytes(), RecordFormat::Tsv, DEFAULT_BIN_SECONDS)
    }

    #[test]
    fn empty_file() {
        let store = parse("").unwrap();
        assert_eq!(store.events().len(), 0);
        assert_eq!(store.players().len(), 0);
        assert_eq!(store.num_games(), 0);
    }

    #[test]
    fn one_four_versus_four_game() {
        let mut text = format!("# {}\t{}\n# game_id timestamp ...\n", START, START + 86_400);
        for p in 0..8u64 {
            text += &format!("7\t{}\t3\t{}\t{}\t1\t0\t0\n", START + 100, p / 4, p + 10);
        }
        let store = parse(&text).unwrap();
        assert_eq!(store.events().len(), 8);
        assert_eq!(store.num_games(), 1);
        assert_eq!(store.players().len(), 8);
        assert_eq!(store.games_of(PlayerId(10)).unwrap().len(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("# {} {}\n1\t{}\t0\t0\t5\t0\t0\n", START, START + 600, START);
        match parse(&text) {
            Err(StoreError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn timestamp_outside_window() {
        let text = format!("# {} {}\n1\t{}\t0\t0\t5\t0\t0\t0\n", START, START + 600, START + 600);
        assert!(matches!(parse(&text), Err(StoreError::OutsideWindow { line: 2, .. })));
    }

    #[test]
    fn duplicate_game_player() {
        let text = format!(
            "# {} {}\n1\t{t}\t0\t0\t5\t0\t0\t0\n1\t{t}\t0\t1\t5\t0\t0\t0\n",
            START,
            START + 600,
            t = START
        );
        assert!(matches!(parse(&text), Err(StoreError::Duplicate { game_id: 1, .. })));
    }

    #[test]
    fn inconsistent_game_timestamp() {
        let events = vec![ev(1, START, 0, 1), ev(1, START + 5, 1, 2)];
        assert!(matches!(
            EventStore::from_events(None, 600, events),
            Err(StoreError::InconsistentGame { game_id: 1, .. })
        ));
    }

    #[test]
    fn unknown_player_is_an_error() {
        let store = EventStore::from_events(None, 600, vec![ev(1, START, 0, 1), ev(1, START, 1, 2)]).unwrap();
        assert!(matches!(store.games_of(PlayerId(99)), Err(StoreError::UnknownPlayer(_))));
        assert!(store.copresence(PlayerId(1), PlayerId(99)).is_err());
    }

    #[test]
    fn never_coappearing_players() {
        let store = EventStore::from_events(None, 600, vec![ev(1, START, 0, 1), ev(2, START, 1, 2)]).unwrap();
        assert!(store.copresence(PlayerId(1), PlayerId(2)).unwrap().is_empty());
    }

    #[test]
    fn epoch_truncates_to_midnight() {
        let w = Window {
            start: START + 3_700,
            end: START + 86_400,
        };
        let clock = BinClock::for_window(w, 600);
        assert_eq!(clock.epoch, START);
        assert_eq!(clock.bin(START + 3_700), TimeBin(6));
        assert_eq!(clock.bins_until(w.end), 144);
    }

    #[test]
    fn weekday_of_known_dates() {
        // 2010-09-14 was a Tuesday.
        assert_eq!(weekday(START), 1);
        assert_eq!(weekday(0), 3);
    }

    #[test]
    fn csv_format() {
        let text = format!("# {} {}\n1, {}, 0, 0, 5, 2, 0, 1\n", START, START + 600, START);
        let store = EventStore::read(text.as_bytes(), RecordFormat::Csv, 600).unwrap();
        assert_eq!(store.events()[0].counters.direct_assists, 2);
    }

    #[test]
    fn name_map_round_trip() {
        let mut names = BTreeMap::new();
        names.insert(PlayerId(3), "Noble Six".to_string());
        names.insert(PlayerId(1), "Kat".to_string());
        let mut buf = Vec::new();
        write_name_map(&mut buf, &names).unwrap();
        assert_eq!(read_name_map(&buf[..]).unwrap(), names);
    }
}
