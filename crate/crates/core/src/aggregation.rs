//! From per-second read probabilities to per-session reading time and read level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reading speed (words per minute) above which a message counts as skipped.
pub const SKIP_WPM: f64 = 400.0;
/// Reading speed at or below which a message counts as read in detail.
pub const DETAIL_WPM: f64 = 200.0;

/// Read level ordered by comprehension: skip < skim < detail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadLevel {
    Skip,
    Skim,
    Detail,
}

impl ReadLevel {
    pub const ALL: [ReadLevel; 3] = [ReadLevel::Skip, ReadLevel::Skim, ReadLevel::Detail];

    /// "Read" means skimmed or read in detail.
    pub fn is_read(self) -> bool {
        self != ReadLevel::Skip
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ReadLevel::Skip => "skip",
            ReadLevel::Skim => "skim",
            ReadLevel::Detail => "detail",
        }
    }

    /// Most probable class; ties resolve toward the lower-comprehension class.
    pub fn argmax(probs: &[f64; 3]) -> Self {
        let mut best = 0;
        for i in 1..3 {
            if probs[i] > probs[best] {
                best = i;
            }
        }
        Self::ALL[best]
    }
}

/// Estimated reading time of one message in one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingTimeEstimate {
    pub session_id: String,
    pub msg_id: String,
    pub time: f64,
}

/// Sums `(second, p)` pairs into a reading time. Every second of
/// `[start_sec, end_sec)` must appear exactly once.
pub fn reading_time(probs: &[(i64, f64)], start_sec: i64, end_sec: i64) -> Result<f64> {
    let len = (end_sec - start_sec).max(0) as usize;
    let mut seen = vec![false; len];
    let mut total = 0.0;
    for &(t, p) in probs {
        if t < start_sec || t >= end_sec {
            return Err(Error::Coverage(format!("second {t} outside [{start_sec}, {end_sec})")));
        }
        let slot = &mut seen[(t - start_sec) as usize];
        if *slot {
            return Err(Error::Coverage(format!("duplicate prediction for second {t}")));
        }
        *slot = true;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} at second {t} outside [0, 1]")));
        }
        total += p;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Coverage(format!("no prediction for second {}", start_sec + missing as i64)));
    }
    Ok(total)
}

/// Classifies a reading time by effective speed. Boundaries are closed on the
/// slower side: exactly 400 wpm is a skim, exactly 200 wpm is detail.
pub fn classify_read_level(time_secs: f64, words: u32) -> Result<ReadLevel> {
    if words == 0 {
        return Err(Error::Domain("word count must be at least 1".into()));
    }
    if !(time_secs >= 0.0) {
        return Err(Error::Domain(format!("reading time must be non-negative, got {time_secs}")));
    }
    // speed = words / (time / 60); compare time against the threshold times
    // instead so the boundaries are exact.
    let words = f64::from(words);
    let skip_below = words * 60.0 / SKIP_WPM;
    let detail_from = words * 60.0 / DETAIL_WPM;
    Ok(if time_secs < skip_below {
        ReadLevel::Skip
    } else if time_secs < detail_from {
        ReadLevel::Skim
    } else {
        ReadLevel::Detail
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_probabilities() {
        let ones: Vec<_> = (0..5).map(|t| (t, 1.0)).collect();
        assert_eq!(reading_time(&ones, 0, 5).unwrap(), 5.0);
        let zeros: Vec<_> = (0..5).map(|t| (t, 0.0)).collect();
        assert_eq!(reading_time(&zeros, 0, 5).unwrap(), 0.0);
        assert_eq!(reading_time(&[(3, 0.5), (4, 0.25)], 3, 5).unwrap(), 0.75);
    }

    #[test]
    fn coverage_errors() {
        assert!(matches!(reading_time(&[(0, 0.5)], 0, 2), Err(Error::Coverage(_))));
        assert!(matches!(reading_time(&[(0, 0.5), (0, 0.5)], 0, 1), Err(Error::Coverage(_))));
        assert!(matches!(reading_time(&[(5, 0.5)], 0, 1), Err(Error::Coverage(_))));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_read_level(60.0, 100).unwrap(), ReadLevel::Detail);
        assert_eq!(classify_read_level(20.0, 100).unwrap(), ReadLevel::Skim);
        assert_eq!(classify_read_level(0.0, 1).unwrap(), ReadLevel::Skip);
        assert_eq!(classify_read_level(0.0, 5000).unwrap(), ReadLevel::Skip);
        assert!(classify_read_level(10.0, 0).is_err());
    }

    #[test]
    fn boundaries_closed_on_slower_side() {
        // 100 words in 15 s is exactly 400 wpm; in 30 s exactly 200 wpm.
        assert_eq!(classify_read_level(15.0, 100).unwrap(), ReadLevel::Skim);
        assert_eq!(classify_read_level(30.0, 100).unwrap(), ReadLevel::Detail);
        assert_eq!(classify_read_level(14.999, 100).unwrap(), ReadLevel::Skip);
        assert_eq!(classify_read_level(29.999, 100).unwrap(), ReadLevel::Skim);
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(ReadLevel::argmax(&[0.4, 0.4, 0.2]), ReadLevel::Skip);
        assert_eq!(ReadLevel::argmax(&[0.2, 0.4, 0.4]), ReadLevel::Skim);
        assert_eq!(ReadLevel::argmax(&[0.1, 0.2, 0.7]), ReadLevel::Detail);
    }
}
