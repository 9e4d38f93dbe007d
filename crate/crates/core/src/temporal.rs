//! Temporal pair features: lag-windowed autocorrelation of the co-play
//! series, pair frequency, and individual schedule/playlist entropies.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::series::PairSeries;
use crate::store::{weekday, Copresence, EventStore, PlayerId, StoreError};

/// One week of ten-minute bins.
pub const DEFAULT_TAU_MAX: u32 = 1008;

/// Series with more interaction bins than this go through the FFT path.
pub const DEFAULT_FFT_CROSSOVER: usize = 64;

const FFT_ROUNDING_TOLERANCE: f64 = 1e-6;

/// Range of positive lags summed by the autocorrelation score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagWindow {
    /// Lags `1..=tau_max`.
    UpTo(u32),
    /// Every positive lag of the series. Degenerates to C(k, 2).
    All,
}

impl Default for LagWindow {
    fn default() -> Self {
        LagWindow::UpTo(DEFAULT_TAU_MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutocorrConfig {
    pub lags: LagWindow,
    pub fft_crossover: usize,
}

impl Default for AutocorrConfig {
    fn default() -> Self {
        Self {
            lags: LagWindow::default(),
            fft_crossover: DEFAULT_FFT_CROSSOVER,
        }
    }
}

#[derive(Debug, Error)]
pub enum TemporalError {
    #[error("tau_max must be at least 1")]
    ZeroLag,
    #[error("player {0} has no games")]
    NoGames(PlayerId),
    #[error("FFT autocorrelation at lag {lag} is {value}, not an integer")]
    FftInexact { lag: usize, value: f64 },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl AutocorrConfig {
    fn tau_max(&self, series: &PairSeries) -> Result<u32, TemporalError> {
        match self.lags {
            LagWindow::UpTo(0) => Err(TemporalError::ZeroLag),
            LagWindow::UpTo(t) => Ok(t),
            LagWindow::All => Ok(series.total_bins().saturating_sub(1).max(1)),
        }
    }
}

/// Σ_{τ=1..tau_max} Σ_t n(t)·n(t−τ) over the linear series.
pub fn autocorrelation(series: &PairSeries, config: &AutocorrConfig) -> Result<u64, TemporalError> {
    let tau_max = config.tau_max(series)?;
    if series.len() <= config.fft_crossover {
        Ok(autocorrelation_sparse(series.bins(), tau_max))
    } else {
        autocorrelation_fft(series, tau_max)
    }
}

/// Count of bin pairs whose gap lies in `1..=tau_max`. `bins` must be
/// strictly increasing.
pub fn autocorrelation_sparse(bins: &[u32], tau_max: u32) -> u64 {
    let mut count = 0u64;
    for (i, &lo) in bins.iter().enumerate() {
        for &hi in &bins[i + 1..] {
            if hi - lo > tau_max {
                break;
            }
            count += 1;
        }
    }
    count
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Autocorrelation through a zero-padded FFT of the dense span. Each lag
/// value is an integer; a value further than 1e-6 from one is an error.
pub fn autocorrelation_fft(series: &PairSeries, tau_max: u32) -> Result<u64, TemporalError> {
    if tau_max == 0 {
        return Err(TemporalError::ZeroLag);
    }
    let dense = series.dense_span();
    let n = dense.len();
    if n < 2 {
        return Ok(0);
    }
    let len = (2 * n - 1).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = dense
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();

    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        planner.plan_fft_forward(len).process(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), 0.0);
        }
        planner.plan_fft_inverse(len).process(&mut buf);
    });

    let scale = 1.0 / len as f64;
    let last = (tau_max as usize).min(n - 1);
    let mut total = 0u64;
    for (lag, c) in buf.iter().enumerate().take(last + 1).skip(1) {
        let value = c.re * scale;
        let rounded = value.round();
        if (value - rounded).abs() > FFT_ROUNDING_TOLERANCE || rounded < 0.0 {
            return Err(TemporalError::FftInexact { lag, value });
        }
        total += rounded as u64;
    }
    Ok(total)
}

/// Which "location" an entropy is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyKind {
    /// Day of week (UTC).
    Schedule,
    /// Playlist.
    Spatial,
    /// (day of week, playlist).
    Joint,
}

/// Shannon entropy in nats of an empirical histogram; `0·ln 0 = 0`.
pub fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h = -counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>();
    h.max(0.0)
}

/// The three individual entropies of one player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerEntropies {
    pub schedule: f64,
    pub spatial: f64,
    pub joint: f64,
}

impl PlayerEntropies {
    pub fn get(&self, kind: EntropyKind) -> f64 {
        match kind {
            EntropyKind::Schedule => self.schedule,
            EntropyKind::Spatial => self.spatial,
            EntropyKind::Joint => self.joint,
        }
    }
}

pub fn player_entropies(store: &EventStore, x: PlayerId) -> Result<PlayerEntropies, TemporalError> {
    let games = store.games_of(x)?;
    if games.is_empty() {
        return Err(TemporalError::NoGames(x));
    }
    let mut days = [0u64; 7];
    let mut lists: BTreeMap<u16, u64> = BTreeMap::new();
    let mut joint: BTreeMap<(u8, u16), u64> = BTreeMap::new();
    for g in &games {
        let d = weekday(g.timestamp);
        days[d as usize] += 1;
        *lists.entry(g.playlist).or_default() += 1;
        *joint.entry((d, g.playlist)).or_default() += 1;
    }
    Ok(PlayerEntropies {
        schedule: entropy_of_counts(days),
        spatial: entropy_of_counts(lists.into_values()),
        joint: entropy_of_counts(joint.into_values()),
    })
}

pub fn entropy(store: &EventStore, x: PlayerId, kind: EntropyKind) -> Result<f64, TemporalError> {
    Ok(player_entropies(store, x)?.get(kind))
}

/// Sum of the two individuals' entropies.
pub fn pair_entropy(store: &EventStore, x: PlayerId, y: PlayerId, kind: EntropyKind) -> Result<f64, TemporalError> {
    Ok(entropy(store, x, kind)? + entropy(store, y, kind)?)
}

/// `(N_xy, N_xy / N_x)` where N_xy counts shared games, not bins.
pub fn pair_frequency(store: &EventStore, x: PlayerId, y: PlayerId) -> Result<(u64, f64), TemporalError> {
    let n_x = store.games_played(x)?;
    let shared = store.copresence(x, y)?;
    frequency_from(x, n_x, &shared)
}

pub(crate) fn frequency_from(x: PlayerId, n_x: usize, shared: &[Copresence]) -> Result<(u64, f64), TemporalError> {
    if n_x == 0 {
        return Err(TemporalError::NoGames(x));
    }
    let n_xy = shared.len() as u64;
    Ok((n_xy, n_xy as f64 / n_x as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalFeatures {
    pub ac: u64,
    pub pair_freq: u64,
    pub norm_pair_freq: f64,
    pub h_t: f64,
    pub h_s: f64,
    pub h_st: f64,
}

pub fn temporal_features(
    store: &EventStore,
    x: PlayerId,
    y: PlayerId,
    config: &AutocorrConfig,
) -> Result<TemporalFeatures, TemporalError> {
    let shared = store.copresence(x, y)?;
    let series = PairSeries::from_copresence(x, y, &shared, store.total_bins());
    let (pair_freq, norm_pair_freq) = frequency_from(x, store.games_played(x)?, &shared)?;
    let ex = player_entropies(store, x)?;
    let ey = player_entropies(store, y)?;
    Ok(TemporalFeatures {
        ac: autocorrelation(&series, config)?,
        pair_freq,
        norm_pair_freq,
        h_t: ex.schedule + ey.schedule,
        h_s: ex.spatial + ey.spatial,
        h_st: ex.joint + ey.joint,
    })
}
