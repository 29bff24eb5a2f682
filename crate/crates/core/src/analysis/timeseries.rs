//! Scalar time-series diagnostics: level crossings, periodicity, activity
//! phases and lagged correlation.

/// Times at which `values` crosses `level` upwards, linearly interpolated.
pub fn upcrossings(times: &[f64], values: &[f64], level: f64) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let mut out = Vec::new();
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        if a < level && b >= level {
            let f = (level - a) / (b - a);
            out.push(times[i - 1] + f * (times[i] - times[i - 1]));
        }
    }
    out
}

/// Upward crossings with hysteresis: a crossing of `level + band` counts only
/// after the series has been below `level - band`. Used on noisy traces.
pub fn upcrossings_with_hysteresis(times: &[f64], values: &[f64], level: f64, band: f64) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let mut armed = false;
    let mut out = Vec::new();
    for i in 0..values.len() {
        if values[i] < level - band {
            armed = true;
        } else if armed && values[i] >= level + band {
            out.push(times[i]);
            armed = false;
        }
    }
    out
}

/// Number of crossings of `level` in either direction, with the same
/// hysteresis rule as [`upcrossings_with_hysteresis`].
pub fn crossings_with_hysteresis(times: &[f64], values: &[f64], level: f64, band: f64) -> usize {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    upcrossings_with_hysteresis(times, values, level, band).len()
        + upcrossings_with_hysteresis(times, &negated, -level, band).len()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64
}

/// Coefficient of variation (population standard deviation over mean).
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    variance(values).sqrt() / mean(values).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    /// Mean duration of one full repetition.
    pub period: f64,
    /// Upcrossings of the mean per repetition.
    pub crossings_per_period: usize,
    /// Coefficient of variation of the per-repetition durations.
    pub cv: f64,
    pub repetitions: usize,
}

/// Detects a periodic pattern from the sequence of upcrossings of the
/// series mean. The intervals between crossings must repeat with some
/// multiplicity `k ≤ max_multiplicity` to relative precision `tol`, over at
/// least three repetitions.
pub fn detect_period(
    times: &[f64],
    values: &[f64],
    tol: f64,
    max_multiplicity: usize,
) -> Option<PeriodEstimate> {
    if values.len() < 3 {
        return None;
    }
    let ups = upcrossings(times, values, mean(values));
    let intervals: Vec<f64> = ups.windows(2).map(|w| w[1] - w[0]).collect();
    for k in 1..=max_multiplicity {
        let reps = intervals.len() / k;
        if reps < 3 {
            break;
        }
        let scale = mean(&intervals) * k as f64;
        let repeats = (k..intervals.len()).all(|j| (intervals[j] - intervals[j - k]).abs() <= tol * scale);
        if !repeats {
            continue;
        }
        let sums: Vec<f64> = intervals.chunks_exact(k).map(|c| c.iter().sum()).collect();
        return Some(PeriodEstimate {
            period: mean(&sums),
            crossings_per_period: k,
            cv: if sums.len() > 1 { coefficient_of_variation(&sums) } else { 0.0 },
            repetitions: sums.len(),
        });
    }
    None
}

/// Coarse activity phase of a window of `s(t)` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivityPhase {
    High,
    Low,
    Oscillatory,
}

/// Thresholds for [`phase_episodes`], expressed as fractions of the
/// activity interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseThresholds {
    pub high: f64,
    pub low: f64,
    /// Window length in time units.
    pub window: f64,
    /// Minimum number of mid-level crossings in a window to call it
    /// oscillatory.
    pub min_crossings: usize,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        PhaseThresholds {
            high: 0.8,
            low: 0.2,
            window: 20.0,
            min_crossings: 2,
        }
    }
}

/// A maximal run of windows sharing one [`ActivityPhase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub phase: ActivityPhase,
    pub start: f64,
    pub end: f64,
}

/// Splits `s(t)` (full-variant activities in `[0, 1]`) into windows, labels
/// each window high / low / oscillatory, and merges consecutive windows with
/// equal labels. Windows that are none of the three (a single transit
/// between corners) are absorbed into the preceding episode.
pub fn phase_episodes(times: &[f64], s: &[f64], th: PhaseThresholds) -> Vec<Episode> {
    let mut episodes: Vec<Episode> = Vec::new();
    if times.is_empty() {
        return episodes;
    }
    let mut start = 0;
    while start < times.len() {
        let t0 = times[start];
        let mut end = start;
        while end + 1 < times.len() && times[end + 1] < t0 + th.window {
            end += 1;
        }
        let w = &s[start..=end];
        let (lo, hi) = w
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let crossings = w.windows(2).filter(|p| (p[0] < 0.5) != (p[1] < 0.5)).count();
        let phase = if lo > th.high {
            Some(ActivityPhase::High)
        } else if hi < th.low {
            Some(ActivityPhase::Low)
        } else if crossings >= th.min_crossings {
            Some(ActivityPhase::Oscillatory)
        } else {
            None
        };
        let t1 = times[end];
        match (phase, episodes.last_mut()) {
            (Some(p), Some(last)) if last.phase == p => last.end = t1,
            (Some(p), _) => episodes.push(Episode {
                phase: p,
                start: t0,
                end: t1,
            }),
            (None, Some(last)) => last.end = t1,
            (None, None) => {}
        }
        start = end + 1;
    }
    episodes
}

/// Lag (in samples, positive when `b` follows `a`) maximizing the
/// normalized cross-correlation of two equally sampled series, searched in
/// `[-max_lag, max_lag]`.
pub fn cross_correlation_peak_lag(a: &[f64], b: &[f64], max_lag: usize) -> isize {
    let n = a.len().min(b.len());
    let (ma, mb) = (mean(&a[..n]), mean(&b[..n]));
    let mut best = (f64::NEG_INFINITY, 0isize);
    for lag in -(max_lag as isize)..=(max_lag as isize) {
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            let j = i as isize + lag;
            if j < 0 || j as usize >= n {
                continue;
            }
            acc += (a[i] - ma) * (b[j as usize] - mb);
            count += 1;
        }
        if count > 0 && acc / count as f64 > best.0 {
            best = (acc / count as f64, lag);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let v = t.iter().map(|&t| f(t)).collect();
        (t, v)
    }

    #[test]
    fn sine_period() {
        let (t, v) = sampled(|t| (2.0 * std::f64::consts::PI * t / 7.0).sin(), 0.01, 10_000);
        let p = detect_period(&t, &v, 1e-3, 4).unwrap();
        assert_eq!(p.crossings_per_period, 1);
        assert!((p.period - 7.0).abs() < 1e-3);
        assert!(p.cv < 1e-3);
    }

    #[test]
    fn two_loop_pattern_needs_multiplicity_two() {
        // alternating large and small bumps
        let f = |t: f64| (t).sin() + 0.8 * (2.0 * t + 0.3).sin();
        let (t, v) = sampled(f, 0.005, 40_000);
        let p = detect_period(&t, &v, 1e-3, 4).unwrap();
        assert!((p.period - 2.0 * std::f64::consts::PI).abs() < 1e-2, "{p:?}");
    }

    #[test]
    fn incommensurate_signal_has_no_period() {
        let f = |t: f64| t.sin() + (2f64.sqrt() * t).sin();
        let (t, v) = sampled(f, 0.01, 100_000);
        assert!(detect_period(&t, &v, 1e-3, 4).is_none());
    }

    #[test]
    fn hysteresis_suppresses_chatter() {
        let t: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let v = [0.35, 0.51, 0.49, 0.52, 0.7, 0.2, 0.8, 0.3];
        assert_eq!(upcrossings(&t, &v, 0.5).len(), 3);
        assert_eq!(upcrossings_with_hysteresis(&t, &v, 0.5, 0.1), vec![4.0, 6.0]);
        assert_eq!(crossings_with_hysteresis(&t, &v, 0.5, 0.1), 4);
    }

    #[test]
    fn episodes_of_square_wave() {
        let (t, v) = sampled(|t| if (t / 100.0).floor() as i64 % 2 == 0 { 0.95 } else { 0.05 }, 0.5, 2000);
        let eps = phase_episodes(&t, &v, PhaseThresholds::default());
        assert!(eps.len() >= 9);
        assert!(eps.windows(2).all(|w| w[0].phase != w[1].phase));
    }

    #[test]
    fn lagged_copy_peaks_at_positive_lag() {
        let (_, a) = sampled(|t| t.sin(), 0.1, 2000);
        let (_, b) = sampled(|t| (t - 0.5).sin(), 0.1, 2000);
        assert_eq!(cross_correlation_peak_lag(&a, &b, 20), 5);
    }
}
