//! Numerical classification of the asymptotic behaviour of a planar system.
//!
//! Every initial condition is integrated with fixed-step RK4 in windows.
//! A run stops early as soon as it has settled on a stable equilibrium
//! (speed below [`SETTLED_SPEED`], confirmed by the Jacobian) or on a limit
//! cycle (two successive Poincaré returns agreeing to [`CYCLE_RETURN_TOL`]).
//! Otherwise the run continues up to `t_transient + t_measure` and the last
//! `t_measure` time units are classified with the diameter / amplitude
//! criteria of [`DetectionSettings`]. Results are merged across initial
//! conditions and are deterministic.

use serde::{Deserialize, Serialize};

use super::fixed_points::{find_fixed_points, newton_polish};
use super::timeseries::mean;
use crate::dynamics::{jacobian_at, ActivityPoint, JacobianInfo, SystemParams};
use crate::evolution::planar_step;

/// Speed below which a trajectory is considered to sit on an equilibrium.
pub const SETTLED_SPEED: f64 = 1e-10;
/// Agreement of successive Poincaré returns (position and relative period)
/// that confirms a limit cycle.
pub const CYCLE_RETURN_TOL: f64 = 1e-7;

const POINT_MERGE: f64 = 1e-4;
const JOIN_POINT: f64 = 1e-5;
const JOIN_CYCLE: f64 = 1e-4;
const CYCLE_MERGE: f64 = 1e-3;
const MAX_KICKS: usize = 3;
const KICK: f64 = 1e-4;

/// Which initial conditions to integrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitGrid {
    /// 5×5 grid of cell centres over the box plus four near-corner points.
    Default,
    /// 12×12 grid, the near-corner points, and a ring of points around every
    /// equilibrium. Finds narrow basins such as the point attractors inside
    /// the large cycle near the lower part of the saddlenode curve.
    Dense,
    Points(Vec<ActivityPoint>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSettings {
    pub grid: InitGrid,
    pub t_transient: f64,
    pub t_measure: f64,
    pub dt: f64,
    /// Trajectory diameter below which a measured run is a point.
    pub point_diameter: f64,
    /// Minimum `s` amplitude for a measured run to count as a cycle.
    pub cycle_amplitude: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        DetectionSettings {
            grid: InitGrid::Default,
            t_transient: 500.0,
            t_measure: 500.0,
            dt: 0.01,
            point_diameter: 1e-5,
            cycle_amplitude: 1e-3,
        }
    }
}

impl DetectionSettings {
    pub fn dense() -> Self {
        DetectionSettings {
            grid: InitGrid::Dense,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleInfo {
    pub period: f64,
    /// Peak-to-peak range of `s` and `σ` over one period.
    pub amplitude_s: f64,
    pub amplitude_sigma: f64,
    /// Time average over one period.
    pub centre: ActivityPoint,
    /// One period of the orbit, sampled every integration step.
    pub samples: Vec<ActivityPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attractor {
    Point {
        location: ActivityPoint,
        stability: JacobianInfo,
    },
    Cycle(CycleInfo),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttractorKind {
    SinglePoint,
    TwoPoints,
    ThreeCoexisting,
    LimitCycle,
    /// One point attractor and one cycle (subcritical Hopf window).
    PointAndCycle,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    pub attractors: Vec<Attractor>,
    /// Initial conditions whose run met neither criterion.
    pub unclassified_runs: usize,
}

impl AttractorReport {
    pub fn points(&self) -> impl Iterator<Item = ActivityPoint> + '_ {
        self.attractors.iter().filter_map(|a| match a {
            Attractor::Point { location, .. } => Some(*location),
            _ => None,
        })
    }

    pub fn cycles(&self) -> impl Iterator<Item = &CycleInfo> + '_ {
        self.attractors.iter().filter_map(|a| match a {
            Attractor::Cycle(c) => Some(c),
            _ => None,
        })
    }
}

/// Outcome of one initial condition.
enum RunOutcome {
    Point(ActivityPoint),
    Cycle(CycleInfo),
    Unclassified,
}

/// Initial conditions for a grid option.
pub fn initial_conditions(params: &SystemParams, grid: &InitGrid) -> Vec<ActivityPoint> {
    let (lo, hi) = params.variant().activity_bounds();
    let width = hi - lo;
    let lattice = |n: usize| {
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(ActivityPoint::new(
                    lo + width * (i as f64 + 0.5) / n as f64,
                    lo + width * (j as f64 + 0.5) / n as f64,
                ));
            }
        }
        v
    };
    let corners = {
        let e = 0.02 * width;
        vec![
            ActivityPoint::new(lo + e, lo + e),
            ActivityPoint::new(hi - e, hi - e),
            ActivityPoint::new(lo + e, hi - e),
            ActivityPoint::new(hi - e, lo + e),
        ]
    };
    match grid {
        InitGrid::Default => {
            let mut v = lattice(5);
            v.extend(corners);
            v
        }
        InitGrid::Dense => {
            let mut v = lattice(12);
            v.extend(corners);
            for fp in find_fixed_points(params) {
                for k in 0..8 {
                    let a = std::f64::consts::FRAC_PI_4 * k as f64 + 0.1;
                    for r in [1e-3, 2e-2] {
                        let p = ActivityPoint::new(fp.location.s + r * a.cos(), fp.location.sigma + r * a.sin());
                        if p.s > lo && p.s < hi && p.sigma > lo && p.sigma < hi {
                            v.push(p);
                        }
                    }
                }
            }
            v
        }
        InitGrid::Points(p) => p.clone(),
    }
}

/// Integrates all initial conditions and merges the attractors found.
pub fn detect_attractors(params: &SystemParams, settings: &DetectionSettings) -> AttractorReport {
    let mut attractors: Vec<Attractor> = Vec::new();
    let mut unclassified_runs = 0;
    for start in initial_conditions(params, &settings.grid) {
        // a run already sitting on a known attractor adds nothing
        if attractors.iter().any(|a| matches!(a, Attractor::Point { location, .. } if location.distance(&start) < 1e-9)) {
            continue;
        }
        match classify_run(params, start, settings, &attractors) {
            RunOutcome::Point(p) => {
                if !attractors.iter().any(|a| matches!(a, Attractor::Point { location, .. } if location.distance(&p) < POINT_MERGE)) {
                    attractors.push(Attractor::Point {
                        location: p,
                        stability: jacobian_at(p, params),
                    });
                }
            }
            RunOutcome::Cycle(c) => {
                if !attractors.iter().any(|a| matches!(a, Attractor::Cycle(d) if same_cycle(&c, d))) {
                    attractors.push(Attractor::Cycle(c));
                }
            }
            RunOutcome::Unclassified => unclassified_runs += 1,
        }
    }
    // deterministic order: points by s, then cycles by amplitude
    attractors.sort_by(|a, b| match (a, b) {
        (Attractor::Point { location: p, .. }, Attractor::Point { location: q, .. }) => p.s.total_cmp(&q.s),
        (Attractor::Point { .. }, Attractor::Cycle(_)) => std::cmp::Ordering::Less,
        (Attractor::Cycle(_), Attractor::Point { .. }) => std::cmp::Ordering::Greater,
        (Attractor::Cycle(c), Attractor::Cycle(d)) => c.amplitude_s.total_cmp(&d.amplitude_s),
    });
    let n_points = attractors.iter().filter(|a| matches!(a, Attractor::Point { .. })).count();
    let n_cycles = attractors.len() - n_points;
    let kind = match (n_points, n_cycles) {
        (1, 0) => AttractorKind::SinglePoint,
        (2, 0) => AttractorKind::TwoPoints,
        (0, 1) => AttractorKind::LimitCycle,
        (2, 1) => AttractorKind::ThreeCoexisting,
        (1, 1) => AttractorKind::PointAndCycle,
        _ => AttractorKind::Unclassified,
    };
    AttractorReport {
        kind,
        attractors,
        unclassified_runs,
    }
}

fn same_cycle(a: &CycleInfo, b: &CycleInfo) -> bool {
    (a.period - b.period).abs() < CYCLE_MERGE * a.period.max(b.period)
        && (a.amplitude_s - b.amplitude_s).abs() < CYCLE_MERGE
        && (a.amplitude_sigma - b.amplitude_sigma).abs() < CYCLE_MERGE
        // the one-period sample mean is biased by up to ~dt/period of the amplitude
        && a.centre.distance(&b.centre) < CYCLE_MERGE + 0.05 * a.amplitude_s.max(a.amplitude_sigma)
}

fn classify_run(
    params: &SystemParams,
    start: ActivityPoint,
    settings: &DetectionSettings,
    known: &[Attractor],
) -> RunOutcome {
    let dt = settings.dt;
    let total = settings.t_transient + settings.t_measure;
    let mut p = start;
    let mut t = 0.0;
    let mut kicks = 0;
    let mut window = 10.0f64;
    let mut buf: Vec<ActivityPoint> = Vec::new();
    while t < total {
        let len = window.min(total - t);
        let steps = (len / dt).round().max(1.0) as usize;
        buf.clear();
        buf.reserve(steps + 1);
        buf.push(p);
        for _ in 0..steps {
            p = match planar_step(params, p, dt) {
                Ok(q) => q,
                Err(_) => return RunOutcome::Unclassified,
            };
            buf.push(p);
        }
        t += steps as f64 * dt;

        if let Some(outcome) = joins_known(p, known) {
            return outcome;
        }
        if params.rhs(p).max_abs() < SETTLED_SPEED {
            let q = newton_polish(params, p).unwrap_or(p);
            if jacobian_at(q, params).class.is_stable() {
                return RunOutcome::Point(q);
            }
            if kicks < MAX_KICKS {
                // resting on an unstable equilibrium: nudge off it
                kicks += 1;
                let a = 0.7 + kicks as f64;
                p = ActivityPoint::new(q.s + KICK * a.cos(), q.sigma + KICK * a.sin());
                continue;
            }
        }
        if let Some(c) = converged_cycle(&buf, dt, settings.cycle_amplitude) {
            return RunOutcome::Cycle(c);
        }
        if t >= settings.t_transient {
            // fall back to the measurement-window criteria below
            break;
        }
        window = (window * 2.0).min(settings.t_measure);
    }

    // Measurement window: integrate t_measure more (or what remains) and
    // apply the diameter / amplitude criteria.
    let steps = (settings.t_measure / dt).round().max(1.0) as usize;
    buf.clear();
    buf.push(p);
    for _ in 0..steps {
        p = match planar_step(params, p, dt) {
            Ok(q) => q,
            Err(_) => return RunOutcome::Unclassified,
        };
        buf.push(p);
    }
    let (smin, smax, gmin, gmax) = extent(&buf);
    if (smax - smin).hypot(gmax - gmin) < settings.point_diameter {
        let q = newton_polish(params, p).unwrap_or(p);
        if jacobian_at(q, params).class.is_stable() || params.rhs(q).max_abs() < 1e-9 {
            return RunOutcome::Point(q);
        }
    }
    if let Some(c) = measured_cycle(&buf, dt, settings.cycle_amplitude) {
        return RunOutcome::Cycle(c);
    }
    RunOutcome::Unclassified
}

/// A run that has come close to an attractor found earlier ends there.
fn joins_known(p: ActivityPoint, known: &[Attractor]) -> Option<RunOutcome> {
    for a in known {
        match a {
            Attractor::Point { location, stability } => {
                if stability.class.is_stable() && p.distance(location) < JOIN_POINT {
                    return Some(RunOutcome::Point(*location));
                }
            }
            Attractor::Cycle(c) => {
                if distance_to_orbit(p, &c.samples) < JOIN_CYCLE {
                    return Some(RunOutcome::Cycle(c.clone()));
                }
            }
        }
    }
    None
}

fn distance_to_orbit(p: ActivityPoint, orbit: &[ActivityPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..orbit.len() {
        let a = orbit[k];
        let b = orbit[(k + 1) % orbit.len()];
        let (dx, dy) = (b.s - a.s, b.sigma - a.sigma);
        let len2 = dx * dx + dy * dy;
        let f = if len2 > 0.0 {
            (((p.s - a.s) * dx + (p.sigma - a.sigma) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        best = best.min(p.distance(&ActivityPoint::new(a.s + f * dx, a.sigma + f * dy)));
    }
    best
}

fn extent(buf: &[ActivityPoint]) -> (f64, f64, f64, f64) {
    buf.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.s), b.max(p.s), c.min(p.sigma), d.max(p.sigma)),
    )
}

/// Poincaré returns through `s = mean(s)` with `ṡ > 0`: (time, σ, index).
fn returns(buf: &[ActivityPoint], dt: f64) -> Vec<(f64, f64, usize)> {
    let s: Vec<f64> = buf.iter().map(|p| p.s).collect();
    let level = mean(&s);
    let mut out = Vec::new();
    for i in 1..buf.len() {
        let (a, b) = (buf[i - 1], buf[i]);
        if a.s < level && b.s >= level {
            let f = (level - a.s) / (b.s - a.s);
            out.push(((i as f64 - 1.0 + f) * dt, a.sigma + f * (b.sigma - a.sigma), i));
        }
    }
    out
}

fn cycle_from_period(buf: &[ActivityPoint], from: usize, to: usize, period: f64) -> CycleInfo {
    let orbit = &buf[from..to];
    let (smin, smax, gmin, gmax) = extent(orbit);
    let n = orbit.len() as f64;
    let centre = ActivityPoint::new(
        orbit.iter().map(|p| p.s).sum::<f64>() / n,
        orbit.iter().map(|p| p.sigma).sum::<f64>() / n,
    );
    CycleInfo {
        period,
        amplitude_s: smax - smin,
        amplitude_sigma: gmax - gmin,
        centre,
        samples: orbit.to_vec(),
    }
}

/// Cycle confirmed by two successive returns agreeing to [`CYCLE_RETURN_TOL`].
fn converged_cycle(buf: &[ActivityPoint], dt: f64, min_amplitude: f64) -> Option<CycleInfo> {
    let r = returns(buf, dt);
    if r.len() < 3 {
        return None;
    }
    let (t0, g0, _) = r[r.len() - 3];
    let (t1, g1, i1) = r[r.len() - 2];
    let (t2, g2, i2) = r[r.len() - 1];
    let (p1, p2) = (t1 - t0, t2 - t1);
    if (g2 - g1).abs() > CYCLE_RETURN_TOL || (g1 - g0).abs() > 10.0 * CYCLE_RETURN_TOL {
        return None;
    }
    if (p2 - p1).abs() > CYCLE_RETURN_TOL * p2.max(1.0) {
        return None;
    }
    let c = cycle_from_period(buf, i1, i2, p2);
    (c.amplitude_s > min_amplitude).then_some(c)
}

/// Looser criterion applied to the final measurement window.
fn measured_cycle(buf: &[ActivityPoint], dt: f64, min_amplitude: f64) -> Option<CycleInfo> {
    let r = returns(buf, dt);
    if r.len() < 3 {
        return None;
    }
    let (t1, g1, i1) = r[r.len() - 2];
    let (t2, g2, i2) = r[r.len() - 1];
    let c = cycle_from_period(buf, i1, i2, t2 - t1);
    let recurrent = (g2 - g1).abs() < min_amplitude;
    (recurrent && c.amplitude_s > min_amplitude).then_some(c)
}
