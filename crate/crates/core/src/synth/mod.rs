//! Seeded synthetic game world with planted friendships.
//!
//! Agents start sessions at a rate shaped by a daily and weekly profile and
//! by a few habitual hours of their own. Solo sessions start at a heavy-tailed
//! per-agent rate and last a game or two; parties start at a common rate,
//! gather idle mutual friends, and stay together for many consecutive games.
//! Session lengths are one plus a Poisson count. Every game slot, the active
//! sessions on each playlist are packed into lobbies of two teams, and each
//! player draws per-game counters whose rates rise when friends share the
//! game. Friends who meet by matchmaking may group up afterwards and carry
//! on as a fresh party.
//!
//! All randomness comes from one ChaCha8 stream, drawn in this order:
//! friendship ring and rewiring, per-agent activity, habitual hours and
//! favourite playlist, the survey raters, then slot by slot: session starts
//! (agents in id order), lobby packing (playlists in order), counters
//! (games in order, players in event order), and regrouping (lobbies in
//! order).

mod config;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::io::{self, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Pareto, Poisson};

pub use config::{ConfigError, WorldConfig};

use crate::labels::{LabelSet, LabeledTie};
use crate::store::{weekday, Counters, EventStore, InteractionEvent, PlayerId, StoreError, Window};

/// Relative session-start intensity at `timestamp`. Averages to 1 over a
/// week. Hours are UTC.
pub fn profile_intensity(config: &WorldConfig, timestamp: i64) -> f64 {
    let hour = timestamp.rem_euclid(86_400) as f64 / 3600.0;
    let diurnal = 1.0 + config.diurnal_amplitude * (TAU * (hour - config.peak_hour) / 24.0).cos();
    let day = if weekday(timestamp) >= 5 {
        config.weekend_multiplier
    } else {
        1.0
    };
    let weekly_mean = (5.0 + 2.0 * config.weekend_multiplier) / 7.0;
    if weekly_mean == 0.0 {
        return 0.0;
    }
    diurnal * day / weekly_mean
}

/// Hour of the week, Monday 00:00 UTC = 0.
pub fn hour_of_week(timestamp: i64) -> u16 {
    u16::from(weekday(timestamp)) * 24 + (timestamp.rem_euclid(86_400) / 3600) as u16
}

/// Generator-side totals for one ordered pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairLedger {
    pub shared_games: u64,
    /// x's direct assists in games with y as a teammate.
    pub assists: u64,
    /// x's indirect assists in games with y as a teammate.
    pub indirect: u64,
    /// x's betrayals in games with y as an opponent.
    pub betrayals: u64,
    /// Maximal runs of consecutive game slots the pair played together.
    pub shared_sessions: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Friendship edges `(x, y)` with `x < y`, sorted.
    pub friendships: Vec<(PlayerId, PlayerId)>,
    pub games_played: BTreeMap<PlayerId, u64>,
    pub pairs: BTreeMap<(PlayerId, PlayerId), PairLedger>,
    pub raters: BTreeSet<PlayerId>,
    pub games: u64,
    pub undersized_games: u64,
    /// Lobbies that could not field two teams and sat out a slot.
    pub stalled_lobbies: u64,
}

impl GroundTruth {
    pub fn is_friend(&self, a: PlayerId, b: PlayerId) -> bool {
        self.friendships.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Unordered pairs `(x < y)` that shared at least `min` sessions.
    pub fn pairs_with_sessions(&self, min: u64) -> BTreeSet<(PlayerId, PlayerId)> {
        self.pairs
            .iter()
            .filter(|((x, y), l)| x < y && l.shared_sessions >= min)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn write_friends<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# x\ty")?;
        for (x, y) in &self.friendships {
            writeln!(w, "{x}\t{y}")?;
        }
        Ok(())
    }

    pub fn write_ledger<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# x\ty\tshared_games\tassists\tindirect\tbetrayals\tshared_sessions")?;
        for ((x, y), l) in &self.pairs {
            writeln!(
                w,
                "{x}\t{y}\t{}\t{}\t{}\t{}\t{}",
                l.shared_games, l.assists, l.indirect, l.betrayals, l.shared_sessions
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub config: WorldConfig,
    pub window: Window,
    /// Events in canonical order.
    pub events: Vec<InteractionEvent>,
    pub labels: LabelSet,
    pub truth: GroundTruth,
}

impl World {
    pub fn store(&self, bin_seconds: u32) -> Result<EventStore, StoreError> {
        EventStore::from_events(Some(self.window), bin_seconds, self.events.clone())
    }
}

struct Agent {
    activity: f64,
    /// Party-start multiplier; averages to 1 over agents.
    sociability: f64,
    availability: f64,
    routine: Vec<u16>,
    favourite: u16,
    friends: Vec<u32>,
}

struct Session {
    members: Vec<u32>,
    playlist: u16,
    remaining: u64,
}

#[derive(Default)]
struct Lobby {
    teams: [Vec<u32>; 2],
    /// Whole (unsplit) units per team, by session index.
    units: [Vec<usize>; 2],
}

impl Lobby {
    fn room(&self, team: usize, size: usize) -> usize {
        size.saturating_sub(self.teams[team].len())
    }
}

fn watts_strogatz(n: usize, degree: usize, beta: f64, rng: &mut ChaCha8Rng) -> Vec<BTreeSet<u32>> {
    let mut adj = vec![BTreeSet::new(); n];
    let half = degree.min(n.saturating_sub(1)) / 2;
    for i in 0..n {
        for j in 1..=half {
            let k = (i + j) % n;
            adj[i].insert(k as u32);
            adj[k].insert(i as u32);
        }
    }
    for j in 1..=half {
        for i in 0..n {
            let k = (i + j) % n;
            if rng.random::<f64>() >= beta || !adj[i].contains(&(k as u32)) {
                continue;
            }
            let free = n - 1 - adj[i].len();
            if free == 0 {
                continue;
            }
            // Uniform over nodes that are neither i nor already adjacent.
            let mut pick = rng.random_range(0..free);
            let target = (0..n)
                .find(|&w| {
                    if w == i || adj[i].contains(&(w as u32)) {
                        return false;
                    }
                    if pick == 0 {
                        return true;
                    }
                    pick -= 1;
                    false
                })
                .expect("a free node exists");
            adj[i].remove(&(k as u32));
            adj[k].remove(&(i as u32));
            adj[i].insert(target as u32);
            adj[target].insert(i as u32);
        }
    }
    adj
}

/// One plus a Poisson count, so the mean is `mean` and short sessions are rare.
fn session_length(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    1 + u64::from(poisson(mean - 1.0, rng))
}

fn poisson(rate: f64, rng: &mut ChaCha8Rng) -> u32 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as u32
}

fn build_agents(config: &WorldConfig, rng: &mut ChaCha8Rng) -> Vec<Agent> {
    let n = config.agents;
    let adj = watts_strogatz(n, config.mean_degree, config.rewiring, rng);
    let pareto = Pareto::new(1.0, config.activity_shape).expect("positive shape");
    let raw: Vec<f64> = (0..n).map(|_| pareto.sample(rng).min(config.activity_cap)).collect();
    let mean = raw.iter().sum::<f64>() / n.max(1) as f64;
    let mut sorted = raw.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted.get(n / 2).copied().unwrap_or(1.0);

    let hour_weights: Vec<f64> = (0..168)
        .map(|h| profile_intensity(config, 4 * 86_400 + h * 3600 + 1800))
        .collect();
    let routine_dist = WeightedIndex::new(&hour_weights).ok();
    let social_mean = raw.iter().map(|v| v.powf(config.party_activity_exponent)).sum::<f64>() / n.max(1) as f64;
    raw.iter()
        .zip(adj)
        .map(|(&v, friends)| {
            let mut routine = BTreeSet::new();
            while routine.len() < config.routine_hours {
                let h = match &routine_dist {
                    Some(d) => d.sample(rng),
                    None => rng.random_range(0..168),
                };
                routine.insert(h as u16);
            }
            Agent {
                activity: config.activity_mean * v / mean,
                sociability: v.powf(config.party_activity_exponent) / social_mean,
                availability: v / (v + config.availability_scale * median),
                routine: routine.into_iter().collect(),
                favourite: rng.random_range(0..config.playlists),
                friends: friends.into_iter().collect(),
            }
        })
        .collect()
}

/// Simulate a world. Deterministic in the config, including its seed.
pub fn generate(config: &WorldConfig) -> Result<World, ConfigError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let agents = build_agents(config, &mut rng);
    let n = agents.len();
    let rater_count = ((n as f64) * config.rater_fraction).round() as usize;
    let raters: BTreeSet<PlayerId> = index::sample(&mut rng, n, rater_count.min(n))
        .into_iter()
        .map(|i| PlayerId(i as u64))
        .collect();

    let window = Window {
        start: config.window_start,
        end: config.window_end(),
    };
    let slots = (i64::from(config.days) * 86_400 / i64::from(config.game_seconds)) as u64;
    let slot_days = f64::from(config.game_seconds) / 86_400.0;
    let routine_boost = 168.0 / config.routine_hours as f64;
    let vehicle: BTreeSet<u16> = config.vehicle_playlists.iter().copied().collect();

    let mut busy = vec![false; n];
    let mut sessions: Vec<Session> = Vec::new();
    let mut events = Vec::new();
    let mut games_played = vec![0u64; n];
    let mut pairs: HashMap<(u32, u32), PairLedger> = HashMap::new();
    let mut last_together: HashMap<(u32, u32), u64> = HashMap::new();
    let mut game_id = 0u64;
    let mut undersized = 0u64;
    let mut stalled = 0u64;
    let mut regroup: Vec<Vec<usize>> = Vec::new();

    for slot in 0..slots {
        let ts = config.window_start + (slot * u64::from(config.game_seconds)) as i64;
        let profile = profile_intensity(config, ts);
        let how = hour_of_week(ts);

        for i in 0..n {
            if busy[i] {
                continue;
            }
            let a = &agents[i];
            let habitual = if a.routine.binary_search(&how).is_ok() {
                routine_boost
            } else {
                0.0
            };
            let shape = (1.0 - config.routine_weight) * profile + config.routine_weight * habitual;
            let solo = a.activity * shape * slot_days;
            let party = if a.friends.is_empty() {
                0.0
            } else {
                config.party_rate * a.sociability * shape * slot_days
            };
            let u = rng.random::<f64>();
            if u >= party + solo {
                continue;
            }
            let mut members = vec![i as u32];
            if u < party {
                let mut invited = a.friends.clone();
                invited.shuffle(&mut rng);
                for f in invited {
                    if members.len() >= config.team_size {
                        break;
                    }
                    let fa = &agents[f as usize];
                    // Parties are cliques: a joiner must be friends with every member.
                    let mutual = members[1..].iter().all(|m| fa.friends.binary_search(m).is_ok());
                    if !busy[f as usize] && mutual && rng.random::<f64>() < config.join_probability * fa.availability {
                        members.push(f);
                    }
                }
            }
            let mean = if members.len() > 1 {
                config.party_games_mean
            } else {
                config.solo_games_mean
            };
            let remaining = session_length(mean, &mut rng);
            let playlist = if rng.random::<f64>() < config.playlist_focus {
                a.favourite
            } else {
                rng.random_range(0..config.playlists)
            };
            for &m in &members {
                busy[m as usize] = true;
            }
            sessions.push(Session {
                members,
                playlist,
                remaining,
            });
        }

        for playlist in 0..config.playlists {
            let mut units: Vec<usize> = (0..sessions.len()).filter(|&s| sessions[s].playlist == playlist).collect();
            if units.is_empty() {
                continue;
            }
            units.shuffle(&mut rng);
            let lobbies = pack_lobbies(&units, &sessions, config, &mut rng);
            for mut lobby in lobbies {
                if lobby.teams[1].is_empty() || lobby.teams[0].is_empty() {
                    let (full, empty) = if lobby.teams[1].is_empty() { (0, 1) } else { (1, 0) };
                    if lobby.units[full].len() < 2 {
                        stalled += 1;
                        continue;
                    }
                    let moved = lobby.units[full].pop().unwrap();
                    let members = &sessions[moved].members;
                    lobby.teams[full].retain(|m| !members.contains(m));
                    lobby.teams[empty].extend_from_slice(members);
                }
                regroup.push(lobby.units.concat());
                game_id += 1;
                for t in &mut lobby.teams {
                    t.sort_unstable();
                }
                if lobby.teams.iter().any(|t| t.len() < config.team_size) {
                    undersized += 1;
                }
                play_game(
                    game_id,
                    ts,
                    slot,
                    playlist,
                    &lobby.teams,
                    vehicle.contains(&playlist),
                    &agents,
                    config,
                    &mut rng,
                    &mut events,
                    &mut games_played,
                    &mut pairs,
                    &mut last_together,
                );
            }
        }

        for lobby_units in regroup.drain(..) {
            regroup_friends(&lobby_units, &mut sessions, &agents, config, &mut rng);
        }
        sessions.retain_mut(|s| {
            s.remaining -= 1;
            if s.remaining == 0 {
                for &m in &s.members {
                    busy[m as usize] = false;
                }
                false
            } else {
                true
            }
        });
    }

    let friendships: Vec<(PlayerId, PlayerId)> = agents
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            a.friends
                .iter()
                .filter(move |&&f| (f as usize) > i)
                .map(move |&f| (PlayerId(i as u64), PlayerId(u64::from(f))))
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut ledger: BTreeMap<(PlayerId, PlayerId), PairLedger> = pairs
        .into_iter()
        .map(|((x, y), l)| ((PlayerId(u64::from(x)), PlayerId(u64::from(y))), l))
        .collect();
    // Session runs were counted on the unordered pair only.
    let keys: Vec<(PlayerId, PlayerId)> = ledger.keys().copied().filter(|(x, y)| x < y).collect();
    for (x, y) in keys {
        let s = ledger[&(x, y)].shared_sessions;
        ledger.get_mut(&(y, x)).expect("ledger is symmetric").shared_sessions = s;
    }

    let mut labels = LabelSet::new();
    for (&(x, y), _) in ledger.iter().filter(|((x, _), _)| raters.contains(x)) {
        labels.insert(LabeledTie {
            rater: x,
            target: y,
            friend: friendships.binary_search(&(x.min(y), x.max(y))).is_ok(),
        });
    }

    let truth = GroundTruth {
        friendships,
        games_played: games_played
            .into_iter()
            .enumerate()
            .filter(|&(_, g)| g > 0)
            .map(|(i, g)| (PlayerId(i as u64), g))
            .collect(),
        pairs: ledger,
        raters,
        games: game_id,
        undersized_games: undersized,
        stalled_lobbies: stalled,
    };
    Ok(World {
        config: config.clone(),
        window,
        events,
        labels,
        truth,
    })
}

/// Merge sessions in one lobby whose members are all mutual friends. The
/// merged party starts a fresh party-length run; the absorbed session ends.
fn regroup_friends(units: &[usize], sessions: &mut [Session], agents: &[Agent], config: &WorldConfig, rng: &mut ChaCha8Rng) {
    let friends = |a: u32, b: u32| agents[a as usize].friends.binary_search(&b).is_ok();
    for (i, &u) in units.iter().enumerate() {
        for &v in &units[i + 1..] {
            let (su, sv) = (&sessions[u], &sessions[v]);
            if su.members.is_empty()
                || sv.members.is_empty()
                || su.members.len() + sv.members.len() > config.team_size
                || !su.members.iter().all(|&a| sv.members.iter().all(|&b| friends(a, b)))
            {
                continue;
            }
            if rng.random::<f64>() >= config.regroup_probability {
                continue;
            }
            let moved = std::mem::take(&mut sessions[v].members);
            sessions[v].remaining = 1;
            let s = &mut sessions[u];
            s.members.extend(moved);
            // One game is consumed by the decrement that follows.
            s.remaining = session_length(config.party_games_mean, rng) + 1;
        }
    }
}

fn pack_lobbies(units: &[usize], sessions: &[Session], config: &WorldConfig, rng: &mut ChaCha8Rng) -> Vec<Lobby> {
    let size = config.team_size;
    let mut lobbies: Vec<Lobby> = Vec::new();
    for &u in units {
        let members = &sessions[u].members;
        let k = members.len();
        let split = k >= 2 && rng.random::<f64>() < config.split_probability;
        if split {
            let a = k.div_ceil(2);
            let at = lobbies
                .iter()
                .position(|l| l.room(0, size) >= a && l.room(1, size) >= k - a)
                .unwrap_or_else(|| {
                    lobbies.push(Lobby::default());
                    lobbies.len() - 1
                });
            let l = &mut lobbies[at];
            l.teams[0].extend_from_slice(&members[..a]);
            l.teams[1].extend_from_slice(&members[a..]);
            continue;
        }
        let fits = |l: &Lobby| -> Option<usize> {
            let (r0, r1) = (l.room(0, size), l.room(1, size));
            match (r0 >= k, r1 >= k) {
                (true, true) => Some(if l.teams[1].len() < l.teams[0].len() { 1 } else { 0 }),
                (true, false) => Some(0),
                (false, true) => Some(1),
                (false, false) => None,
            }
        };
        let (at, team) = lobbies
            .iter()
            .enumerate()
            .find_map(|(i, l)| fits(l).map(|t| (i, t)))
            .unwrap_or_else(|| {
                lobbies.push(Lobby::default());
                (lobbies.len() - 1, 0)
            });
        let l = &mut lobbies[at];
        l.teams[team].extend_from_slice(members);
        l.units[team].push(u);
    }
    lobbies
}

#[allow(clippy::too_many_arguments)]
fn play_game(
    game_id: u64,
    ts: i64,
    slot: u64,
    playlist: u16,
    teams: &[Vec<u32>; 2],
    vehicles: bool,
    agents: &[Agent],
    config: &WorldConfig,
    rng: &mut ChaCha8Rng,
    events: &mut Vec<InteractionEvent>,
    games_played: &mut [u64],
    pairs: &mut HashMap<(u32, u32), PairLedger>,
    last_together: &mut HashMap<(u32, u32), u64>,
) {
    let is_friend = |a: u32, b: u32| agents[a as usize].friends.binary_search(&b).is_ok();
    let mut drawn: Vec<(u32, usize, Counters)> = Vec::new();
    for (t, team) in teams.iter().enumerate() {
        for &x in team {
            let friend_mate = team.iter().any(|&y| y != x && is_friend(x, y));
            let friend_foe = teams[1 - t].iter().any(|&y| is_friend(x, y));
            let boost = |on: bool, m: f64| if on { m } else { 1.0 };
            let counters = Counters {
                direct_assists: poisson(config.assist_rate * boost(friend_mate, config.assist_friend_multiplier), rng),
                indirect_assists: if vehicles {
                    poisson(config.indirect_rate * boost(friend_mate, config.indirect_friend_multiplier), rng)
                } else {
                    0
                },
                betrayals: poisson(config.betrayal_rate * boost(friend_foe, config.betrayal_friend_multiplier), rng),
            };
            events.push(InteractionEvent {
                game_id,
                timestamp: ts,
                playlist,
                team: t as u8,
                player: PlayerId(u64::from(x)),
                counters,
            });
            drawn.push((x, t, counters));
        }
    }
    for &(x, tx, c) in &drawn {
        games_played[x as usize] += 1;
        for &(y, ty, _) in &drawn {
            if x == y {
                continue;
            }
            let l = pairs.entry((x, y)).or_default();
            l.shared_games += 1;
            if tx == ty {
                l.assists += u64::from(c.direct_assists);
                l.indirect += u64::from(c.indirect_assists);
            } else {
                l.betrayals += u64::from(c.betrayals);
            }
            if x < y {
                let last = last_together.insert((x, y), slot);
                if last.is_none_or(|s| s + 1 != slot) {
                    l.shared_sessions += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WorldConfig {
        WorldConfig {
            agents: 120,
            days: 7,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.truth, b.truth);
        assert!(!a.events.is_empty());
    }

    #[test]
    fn zero_activity_gives_empty_log() {
        let c = WorldConfig {
            activity_mean: 0.0,
            party_rate: 0.0,
            ..small()
        };
        assert!(generate(&c).unwrap().events.is_empty());
    }

    #[test]
    fn weekend_share_of_weekly_integral() {
        let c = WorldConfig::default();
        // Midnight starting a Monday.
        let monday = c.window_start + 6 * 86_400;
        assert_eq!(weekday(monday), 0);
        let (mut weekday_sum, mut weekend_sum) = (0.0, 0.0);
        for minute in 0..7 * 24 * 60 {
            let t = monday + minute * 60;
            let r = profile_intensity(&c, t);
            if weekday(t) >= 5 {
                weekend_sum += r;
            } else {
                weekday_sum += r;
            }
        }
        let ratio = (weekend_sum / 2.0) / (weekday_sum / 5.0);
        assert!((ratio / c.weekend_multiplier - 1.0).abs() < 0.01, "{ratio}");
        let mean = (weekday_sum + weekend_sum) / (7.0 * 24.0 * 60.0);
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn friends_share_more_games() {
        let w = generate(&WorldConfig {
            agents: 300,
            days: 14,
            ..Default::default()
        })
        .unwrap();
        let (mut friend, mut stranger) = ((0u64, 0u64), (0u64, 0u64));
        for (&(x, y), l) in w.truth.pairs.iter().filter(|((x, y), _)| x < y) {
            let slot = if w.truth.is_friend(x, y) { &mut friend } else { &mut stranger };
            slot.0 += l.shared_games;
            slot.1 += 1;
        }
        let mean = |(s, n): (u64, u64)| s as f64 / n as f64;
        assert!(mean(friend) > mean(stranger), "{} vs {}", mean(friend), mean(stranger));
    }

    #[test]
    fn lone_agent_plays_no_games() {
        let c = WorldConfig {
            agents: 1,
            activity_mean: 20.0,
            ..small()
        };
        let w = generate(&c).unwrap();
        assert!(w.events.is_empty());
        assert!(w.truth.stalled_lobbies > 0);
    }

    #[test]
    fn constant_profile() {
        let c = WorldConfig {
            diurnal_amplitude: 0.0,
            weekend_multiplier: 1.0,
            ..Default::default()
        };
        let t0 = c.window_start;
        for h in 0..168 {
            assert!((profile_intensity(&c, t0 + h * 3600) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn afternoon_beats_early_morning() {
        let c = WorldConfig::default();
        let day = c.window_start;
        assert!(profile_intensity(&c, day + 16 * 3600) > profile_intensity(&c, day + 4 * 3600 + 1800));
    }

    #[test]
    fn ring_lattice_without_rewiring() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let adj = watts_strogatz(10, 4, 0.0, &mut rng);
        assert!(adj.iter().all(|a| a.len() == 4));
        assert!(adj[0].contains(&9) && adj[0].contains(&2));
        let adj = watts_strogatz(50, 8, 0.3, &mut rng);
        let edges: usize = adj.iter().map(BTreeSet::len).sum::<usize>() / 2;
        assert_eq!(edges, 200);
        assert!(adj.iter().enumerate().all(|(i, a)| !a.contains(&(i as u32))));
    }
}
