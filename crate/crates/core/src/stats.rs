//! Win-rate estimates for self-play matches.
//!
//! A draw counts as half a win. The interval is the normal approximation
//! `w ± z * sqrt(w (1 - w) / n)` clamped to `[0, 1]`.

use core::fmt;

/// Two-sided 95% critical value.
pub const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsError {
    EmptySample,
    /// `wins + draws` (or `wins + losses + draws`) exceeds the game count.
    InconsistentCounts,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::EmptySample => f.write_str("empty sample"),
            StatsError::InconsistentCounts => f.write_str("win/draw counts exceed games played"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub win_rate: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, p: f64) -> bool {
        self.low <= p && p <= self.high
    }

    pub fn half_width(&self) -> f64 {
        (self.high - self.low) / 2.0
    }
}

pub fn confidence_interval(wins: u64, draws: u64, games: u64, z: f64) -> Result<Interval, StatsError> {
    if games == 0 {
        return Err(StatsError::EmptySample);
    }
    if wins.checked_add(draws).is_none_or(|s| s > games) {
        return Err(StatsError::InconsistentCounts);
    }
    let n = games as f64;
    let w = (wins as f64 + 0.5 * draws as f64) / n;
    let h = z * libm::sqrt(w * (1.0 - w) / n);
    Ok(Interval {
        win_rate: w,
        low: (w - h).max(0.0),
        high: (w + h).min(1.0),
    })
}

/// Outcome of a match from engine A's point of view.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchStats {
    pub games: u64,
    pub wins_a: u64,
    pub losses_a: u64,
    pub draws: u64,
    pub win_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
}

impl MatchStats {
    pub fn from_counts(wins_a: u64, losses_a: u64, draws: u64, z: f64) -> Result<MatchStats, StatsError> {
        let games = wins_a
            .checked_add(losses_a)
            .and_then(|s| s.checked_add(draws))
            .ok_or(StatsError::InconsistentCounts)?;
        let ci = confidence_interval(wins_a, draws, games, z)?;
        Ok(MatchStats {
            games,
            wins_a,
            losses_a,
            draws,
            win_rate: ci.win_rate,
            ci_low: ci.low,
            ci_high: ci.high,
            z,
        })
    }

    pub fn interval(&self) -> Interval {
        Interval {
            win_rate: self.win_rate,
            low: self.ci_low,
            high: self.ci_high,
        }
    }

    /// True when the interval lies strictly above one half.
    pub fn significantly_better(&self) -> bool {
        self.ci_low > 0.5
    }
}
