//! World configuration as a flat `key = value` file.

use std::fmt::Write as _;
use std::io::{self, BufRead};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Every knob of the synthetic world. Times are UTC.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub agents: usize,
    pub days: u32,
    pub seed: u64,
    /// First second of the simulated window; should fall on midnight UTC.
    pub window_start: i64,
    /// Ring-lattice degree before rewiring; rounded down to even.
    pub mean_degree: usize,
    pub rewiring: f64,
    /// Mean solo sessions an agent starts per day.
    pub activity_mean: f64,
    /// Pareto shape of per-agent activity; smaller is heavier-tailed.
    pub activity_shape: f64,
    /// Upper bound on an agent's activity relative to the Pareto scale.
    pub activity_cap: f64,
    /// Share of an agent's activity spent in its habitual hours.
    pub routine_weight: f64,
    /// Number of habitual hours of the week per agent.
    pub routine_hours: usize,
    /// Relative size of the daily cycle, in [0, 1].
    pub diurnal_amplitude: f64,
    pub peak_hour: f64,
    /// Saturday and Sunday intensity relative to weekdays.
    pub weekend_multiplier: f64,
    /// Parties each agent starts per day.
    pub party_rate: f64,
    /// How strongly party starts follow solo activity: 0 for equal rates,
    /// 1 for proportional ones.
    pub party_activity_exponent: f64,
    /// Scales how readily an idle friend joins a party.
    pub join_probability: f64,
    /// Activity, in multiples of the median, at which a friend joins half
    /// the parties it is offered.
    pub availability_scale: f64,
    pub party_games_mean: f64,
    pub solo_games_mean: f64,
    /// Chance a party is split across the two teams of its game.
    pub split_probability: f64,
    /// Chance that friends who meet by matchmaking group up afterwards.
    pub regroup_probability: f64,
    pub playlists: u16,
    pub vehicle_playlists: Vec<u16>,
    /// Weight of an agent's favourite playlist; the rest is spread evenly.
    pub playlist_focus: f64,
    pub team_size: usize,
    pub game_seconds: u32,
    pub assist_rate: f64,
    pub assist_friend_multiplier: f64,
    pub indirect_rate: f64,
    pub indirect_friend_multiplier: f64,
    pub betrayal_rate: f64,
    pub betrayal_friend_multiplier: f64,
    /// Fraction of agents who answer the friendship survey.
    pub rater_fraction: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            agents: 2000,
            days: 60,
            seed: 42,
            window_start: 1_284_422_400,
            mean_degree: 8,
            rewiring: 0.1,
            activity_mean: 0.5,
            activity_shape: 1.2,
            activity_cap: 60.0,
            routine_weight: 0.6,
            routine_hours: 3,
            diurnal_amplitude: 0.8,
            peak_hour: 18.0,
            weekend_multiplier: 1.4,
            party_rate: 0.1,
            party_activity_exponent: 0.5,
            join_probability: 0.9,
            availability_scale: 5.0,
            party_games_mean: 12.0,
            solo_games_mean: 1.25,
            split_probability: 0.05,
            regroup_probability: 0.9,
            playlists: 4,
            vehicle_playlists: vec![1, 3],
            playlist_focus: 0.7,
            team_size: 4,
            game_seconds: 600,
            assist_rate: 0.5,
            assist_friend_multiplier: 4.0,
            indirect_rate: 0.4,
            indirect_friend_multiplier: 3.0,
            betrayal_rate: 0.05,
            betrayal_friend_multiplier: 6.0,
            rater_fraction: 0.25,
        }
    }
}

macro_rules! config_fields {
    ($mac:ident) => {
        $mac!(
            agents,
            days,
            seed,
            window_start,
            mean_degree,
            rewiring,
            activity_mean,
            activity_shape,
            activity_cap,
            routine_weight,
            routine_hours,
            diurnal_amplitude,
            peak_hour,
            weekend_multiplier,
            party_rate,
            party_activity_exponent,
            join_probability,
            availability_scale,
            party_games_mean,
            solo_games_mean,
            split_probability,
            regroup_probability,
            playlists,
            playlist_focus,
            team_size,
            game_seconds,
            assist_rate,
            assist_friend_multiplier,
            indirect_rate,
            indirect_friend_multiplier,
            betrayal_rate,
            betrayal_friend_multiplier,
            rater_fraction
        )
    };
}

impl WorldConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        macro_rules! assign {
            ($($field:ident),*) => {
                match key {
                    $(stringify!($field) => {
                        self.$field = value.parse().map_err(|_| format!("bad value {value:?} for {key}"))?;
                    })*
                    "vehicle_playlists" => {
                        self.vehicle_playlists = value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse().map_err(|_| format!("bad playlist {s:?}")))
                            .collect::<Result<_, _>>()?;
                    }
                    _ => return Err(format!("unknown key {key:?}")),
                }
            };
        }
        config_fields!(assign);
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, ConfigError> {
        let mut config = WorldConfig::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| ConfigError::Malformed { line: idx + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
            config.set(key.trim(), value.trim()).map_err(bad)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($($field:ident),*) => {
                $(writeln!(out, "{} = {}", stringify!($field), self.$field).unwrap();)*
            };
        }
        config_fields!(emit);
        let vehicles: Vec<String> = self.vehicle_playlists.iter().map(u16::to_string).collect();
        writeln!(out, "vehicle_playlists = {}", vehicles.join(",")).unwrap();
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        let rates = [
            self.rewiring,
            self.activity_mean,
            self.activity_cap,
            self.routine_weight,
            self.diurnal_amplitude,
            self.weekend_multiplier,
            self.party_rate,
            self.party_activity_exponent,
            self.join_probability,
            self.availability_scale,
            self.split_probability,
            self.regroup_probability,
            self.playlist_focus,
            self.assist_rate,
            self.assist_friend_multiplier,
            self.indirect_rate,
            self.indirect_friend_multiplier,
            self.betrayal_rate,
            self.betrayal_friend_multiplier,
            self.rater_fraction,
        ];
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("rates must be finite and non-negative");
        }
        let probabilities = [
            self.rewiring,
            self.routine_weight,
            self.diurnal_amplitude,
            self.split_probability,
            self.regroup_probability,
            self.playlist_focus,
            self.rater_fraction,
        ];
        if probabilities.iter().any(|p| *p > 1.0) {
            return bad("probabilities and weights must lie in [0, 1]");
        }
        if self.days == 0 {
            return bad("horizon must be at least one day");
        }
        if !(self.solo_games_mean >= 1.0 && self.party_games_mean > self.solo_games_mean) {
            return bad("party session mean must exceed the solo mean, which must be at least 1");
        }
        if !(self.activity_shape > 0.0) || self.activity_cap < 1.0 {
            return bad("activity shape must be positive and the cap at least 1");
        }
        if self.playlists == 0 || self.vehicle_playlists.iter().any(|&v| v >= self.playlists) {
            return bad("vehicle playlists must name existing playlists");
        }
        if self.team_size == 0 || self.game_seconds == 0 {
            return bad("team size and game length must be positive");
        }
        if self.routine_hours == 0 || self.routine_hours > 168 {
            return bad("routine hours must be between 1 and 168");
        }
        if !(0.0..24.0).contains(&self.peak_hour) {
            return bad("peak hour must lie in [0, 24)");
        }
        Ok(())
    }

    pub fn window_end(&self) -> i64 {
        self.window_start + i64::from(self.days) * 86_400
    }
}
