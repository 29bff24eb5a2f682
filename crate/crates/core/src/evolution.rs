//! Time integration of the mean-field systems and of the regulated system
//! (activity coupled to covariance plasticity and threshold regulation).

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{ActivityPoint, DynamicsError, FiringThresholds, SynapticWeights, SystemParams, Variant};

/// Default fixed RK4 step in time units.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("non-finite state component {component} at t = {t}")]
    NonFinite { t: f64, component: usize },
    #[error("invalid regulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// One classical fourth-order Runge–Kutta step of the autonomous system
/// `y' = rhs(y)`.
#[inline]
pub fn rk4_step<F, const N: usize>(rhs: F, y: &[f64; N], dt: f64) -> Result<[f64; N], EvolutionError>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = rhs(y);
    let k2 = rhs(&axpy(y, 0.5 * dt, &k1));
    let k3 = rhs(&axpy(y, 0.5 * dt, &k2));
    let k4 = rhs(&axpy(y, dt, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !out[i].is_finite() {
            return Err(EvolutionError::NonFinite { t: f64::NAN, component: i });
        }
    }
    Ok(out)
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

/// RK4 step of a planar mean-field system.
#[inline]
pub fn planar_step(params: &SystemParams, p: ActivityPoint, dt: f64) -> Result<ActivityPoint, EvolutionError> {
    let y = rk4_step(
        |y: &[f64; 2]| {
            let v = params.rhs(ActivityPoint::new(y[0], y[1]));
            [v.ds, v.dsigma]
        },
        &[p.s, p.sigma],
        dt,
    )?;
    Ok(ActivityPoint::new(y[0], y[1]))
}

/// Integrates a planar system without regulation, returning samples taken
/// every `sample_every` (rounded to a whole number of steps), starting at
/// `t = 0`.
pub fn integrate_planar(
    params: &SystemParams,
    start: ActivityPoint,
    dt: f64,
    t_end: f64,
    sample_every: f64,
) -> Result<Vec<(f64, ActivityPoint)>, EvolutionError> {
    let steps = (t_end / dt).round() as u64;
    let stride = ((sample_every / dt).round() as u64).max(1);
    let mut out = Vec::with_capacity((steps / stride + 1) as usize);
    let mut p = start;
    out.push((0.0, p));
    for k in 1..=steps {
        p = planar_step(params, p, dt).map_err(|e| with_time(e, k as f64 * dt))?;
        if k % stride == 0 {
            out.push((k as f64 * dt, p));
        }
    }
    Ok(out)
}

fn with_time(e: EvolutionError, t: f64) -> EvolutionError {
    match e {
        EvolutionError::NonFinite { component, .. } => EvolutionError::NonFinite { t, component },
        other => other,
    }
}

/// `d r̄/dt = ρ (r − r̄)`.
#[inline]
pub fn moving_average_rhs(r: f64, r_bar: f64, rho: f64) -> f64 {
    rho * (r - r_bar)
}

/// One linear plasticity rule `dp/dt = eps (signal − theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub eps: f64,
    pub theta: f64,
}

impl Rule {
    pub const fn new(eps: f64, theta: f64) -> Self {
        Rule { eps, theta }
    }

    #[inline]
    fn rate(self, signal: f64) -> f64 {
        self.eps * (signal - self.theta)
    }
}

/// Parameters that stay constant during a regulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub w_ei: f64,
    pub w_ii: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

/// Regulation loop configuration. A rule set to `None` is disabled and its
/// parameter stays at the initial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulationConfig {
    pub variant: Variant,
    pub fixed: FixedParams,
    /// Inverse time constant of the moving averages `s̄`, `σ̄`.
    pub rho: f64,
    /// `dw_ee/dt = eps_ee (c_ee − theta_ee)`, `eps_ee ≥ 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ee: Option<Rule>,
    /// `dw_ie/dt = eps_ie (c_ie − theta_ie)`, `eps_ie ≤ 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ie: Option<Rule>,
    /// `dh_E/dt = eps_E (s̄ − theta_E)`, full variant only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_e: Option<Rule>,
    /// `dh_I/dt = eps_I (σ̄ − theta_I)`, full variant only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_i: Option<Rule>,
}

impl RegulationConfig {
    /// A configuration with every rule disabled.
    pub fn free(variant: Variant, fixed: FixedParams, rho: f64) -> Self {
        RegulationConfig {
            variant,
            fixed,
            rho,
            w_ee: None,
            w_ie: None,
            h_e: None,
            h_i: None,
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |msg: String| Err(EvolutionError::Config(msg));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be > 0 (got {})", self.rho));
        }
        SynapticWeights::new(0.0, self.fixed.w_ei, 0.0, self.fixed.w_ii)?;
        if !(self.fixed.beta >= 0.0 && self.fixed.beta.is_finite()) {
            return bad(format!("beta must be >= 0 (got {})", self.fixed.beta));
        }
        if let Some(r) = self.w_ee {
            if !(r.eps >= 0.0) {
                return bad(format!("w_ee.eps must be >= 0 (got {})", r.eps));
            }
            if !(r.theta > 0.0) {
                return bad(format!("w_ee.theta must be > 0 (got {})", r.theta));
            }
        }
        if let Some(r) = self.w_ie {
            if !(r.eps <= 0.0) {
                return bad(format!(
                    "w_ie.eps must be <= 0: the E-to-I rate constant is negative (got {})",
                    r.eps
                ));
            }
            if !(r.theta > 0.0) {
                return bad(format!("w_ie.theta must be > 0 (got {})", r.theta));
            }
        }
        for (name, rule) in [("h_e", self.h_e), ("h_i", self.h_i)] {
            if let Some(r) = rule {
                if self.variant != Variant::Full {
                    return bad(format!("{name} regulation requires the full variant"));
                }
                if !(r.eps >= 0.0) {
                    return bad(format!("{name}.eps must be >= 0 (got {})", r.eps));
                }
                if !(r.theta > 0.0 && r.theta < 1.0) {
                    return bad(format!("{name}.theta must lie in (0, 1) (got {})", r.theta));
                }
            }
        }
        Ok(())
    }
}

/// State of the coupled activity/plasticity system.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtendedState {
    pub t: f64,
    pub s: f64,
    pub sigma: f64,
    pub s_bar: f64,
    pub sigma_bar: f64,
    pub w_ee: f64,
    pub w_ie: f64,
    pub h_e: f64,
    pub h_i: f64,
}

impl ExtendedState {
    /// Starts with the moving averages equal to the activity, so the initial
    /// covariance is zero.
    pub fn at_rest(activity: ActivityPoint, w_ee: f64, w_ie: f64, thresholds: FiringThresholds) -> Self {
        ExtendedState {
            t: 0.0,
            s: activity.s,
            sigma: activity.sigma,
            s_bar: activity.s,
            sigma_bar: activity.sigma,
            w_ee,
            w_ie,
            h_e: thresholds.h_e,
            h_i: thresholds.h_i,
        }
    }

    pub fn activity(&self) -> ActivityPoint {
        ActivityPoint::new(self.s, self.sigma)
    }

    pub fn weights(&self, fixed: &FixedParams) -> SynapticWeights {
        SynapticWeights {
            w_ee: self.w_ee,
            w_ei: fixed.w_ei,
            w_ie: self.w_ie,
            w_ii: fixed.w_ii,
        }
    }

    /// The fixed-parameter planar system at the current parameter values.
    pub fn system(&self, config: &RegulationConfig) -> SystemParams {
        let w = self.weights(&config.fixed);
        match config.variant {
            Variant::Full => SystemParams::full(
                w,
                FiringThresholds {
                    h_e: self.h_e,
                    h_i: self.h_i,
                },
                config.fixed.beta,
            ),
            Variant::Reduced => SystemParams::reduced(w, config.fixed.beta),
        }
    }

    #[inline]
    pub(crate) fn to_array(self) -> [f64; 8] {
        [
            self.s,
            self.sigma,
            self.s_bar,
            self.sigma_bar,
            self.w_ee,
            self.w_ie,
            self.h_e,
            self.h_i,
        ]
    }

    #[inline]
    pub(crate) fn from_array(t: f64, y: &[f64; 8]) -> Self {
        ExtendedState {
            t,
            s: y[0],
            sigma: y[1],
            s_bar: y[2],
            sigma_bar: y[3],
            w_ee: y[4],
            w_ie: y[5],
            h_e: y[6],
            h_i: y[7],
        }
    }
}

/// Instantaneous E-to-E covariance `(s − s̄)²`.
#[inline]
pub fn cov_ee(x: &ExtendedState) -> f64 {
    (x.s - x.s_bar).powi(2)
}

/// Instantaneous E-to-I covariance `(s − s̄)(σ − σ̄)`.
#[inline]
pub fn cov_ie(x: &ExtendedState) -> f64 {
    (x.s - x.s_bar) * (x.sigma - x.sigma_bar)
}

/// Time derivative of every [`ExtendedState`] component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    pub ds: f64,
    pub dsigma: f64,
    pub ds_bar: f64,
    pub dsigma_bar: f64,
    pub dw_ee: f64,
    pub dw_ie: f64,
    pub dh_e: f64,
    pub dh_i: f64,
}

/// Vector field of the regulated system. Plasticity is driven by the
/// instantaneous covariances, not their time averages.
#[inline]
pub fn regulated_rhs(x: &ExtendedState, config: &RegulationConfig) -> Rates {
    let v = x.system(config).rhs(x.activity());
    Rates {
        ds: v.ds,
        dsigma: v.dsigma,
        ds_bar: moving_average_rhs(x.s, x.s_bar, config.rho),
        dsigma_bar: moving_average_rhs(x.sigma, x.sigma_bar, config.rho),
        dw_ee: config.w_ee.map_or(0.0, |r| r.rate(cov_ee(x))),
        dw_ie: config.w_ie.map_or(0.0, |r| r.rate(cov_ie(x))),
        dh_e: config.h_e.map_or(0.0, |r| r.rate(x.s_bar)),
        dh_i: config.h_i.map_or(0.0, |r| r.rate(x.sigma_bar)),
    }
}

/// Stepper for the regulated system.
#[derive(Debug, Clone)]
pub struct RegulatedSystem {
    pub config: RegulationConfig,
    pub dt: f64,
    clamp_events: u64,
}

impl RegulatedSystem {
    pub fn new(config: RegulationConfig, dt: f64) -> Result<Self, EvolutionError> {
        config.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvolutionError::Config(format!("dt must be > 0 (got {dt})")));
        }
        Ok(RegulatedSystem {
            config,
            dt,
            clamp_events: 0,
        })
    }

    /// Number of times a weight was clamped at zero so far.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events
    }

    /// Advances `x` by one RK4 step; the time is set to `step_index · dt` to
    /// avoid accumulating rounding in `t`.
    #[inline]
    pub fn step(&mut self, x: &ExtendedState, step_index: u64) -> Result<ExtendedState, EvolutionError> {
        let cfg = &self.config;
        let y = rk4_step(
            |y: &[f64; 8]| {
                let r = regulated_rhs(&ExtendedState::from_array(0.0, y), cfg);
                [r.ds, r.dsigma, r.ds_bar, r.dsigma_bar, r.dw_ee, r.dw_ie, r.dh_e, r.dh_i]
            },
            &x.to_array(),
            self.dt,
        )
        .map_err(|e| with_time(e, x.t + self.dt))?;
        let mut next = ExtendedState::from_array(step_index as f64 * self.dt, &y);
        for w in [&mut next.w_ee, &mut next.w_ie] {
            if *w < 0.0 {
                *w = 0.0;
                self.clamp_events += 1;
                log::debug!("weight clamped at zero, t = {}", next.t);
            }
        }
        Ok(next)
    }
}

/// Integration window and sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSettings {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: f64,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_sample_every() -> f64 {
    0.1
}

impl IntegrationSettings {
    pub fn new(dt: f64, t_end: f64, sample_every: f64) -> Self {
        IntegrationSettings { dt, t_end, sample_every }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EvolutionError::Config(format!("dt must be > 0 (got {})", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(EvolutionError::Config(format!("t_end must be > 0 (got {})", self.t_end)));
        }
        if !(self.sample_every > 0.0) {
            return Err(EvolutionError::Config(format!(
                "sample_every must be > 0 (got {})",
                self.sample_every
            )));
        }
        Ok(())
    }

    fn stride(&self) -> u64 {
        ((self.sample_every / self.dt).round() as u64).max(1)
    }

    fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub config: RegulationConfig,
    pub initial: ExtendedState,
    pub settings: IntegrationSettings,
    /// Hex digest of the run inputs; equal ids imply bit-identical traces.
    pub run_id: String,
    pub clamp_events: u64,
    /// Samples whose activity left the variant's box.
    pub box_violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub samples: Vec<ExtendedState>,
    pub metadata: TraceMetadata,
}

impl Trace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|x| x.t)
    }

    pub fn last(&self) -> Option<&ExtendedState> {
        self.samples.last()
    }

    /// Samples with `t >= t_from`.
    pub fn tail(&self, t_from: f64) -> &[ExtendedState] {
        let i = self.samples.partition_point(|x| x.t < t_from);
        &self.samples[i..]
    }

    /// CSV with header `t,s,sigma,s_bar,sigma_bar,w_ee,w_ie,h_e,h_i`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        write_state_csv(&self.samples, out)
    }

    /// Key-value sidecar describing the run.
    pub fn metadata_text(&self) -> String {
        let m = &self.metadata;
        let c = &m.config;
        let mut s = String::new();
        let rule = |r: Option<Rule>| r.map_or("off".to_string(), |r| format!("eps={} theta={}", r.eps, r.theta));
        let _ = writeln!(s, "run_id = {}", m.run_id);
        let _ = writeln!(s, "variant = {:?}", c.variant);
        let _ = writeln!(s, "w_ei = {}", c.fixed.w_ei);
        let _ = writeln!(s, "w_ii = {}", c.fixed.w_ii);
        let _ = writeln!(s, "beta = {}", c.fixed.beta);
        let _ = writeln!(s, "rho = {}", c.rho);
        let _ = writeln!(s, "rule_w_ee = {}", rule(c.w_ee));
        let _ = writeln!(s, "rule_w_ie = {}", rule(c.w_ie));
        let _ = writeln!(s, "rule_h_e = {}", rule(c.h_e));
        let _ = writeln!(s, "rule_h_i = {}", rule(c.h_i));
        let _ = writeln!(s, "dt = {}", m.settings.dt);
        let _ = writeln!(s, "t_end = {}", m.settings.t_end);
        let _ = writeln!(s, "sample_every = {}", m.settings.sample_every);
        let i = &m.initial;
        let _ = writeln!(
            s,
            "initial = s={} sigma={} s_bar={} sigma_bar={} w_ee={} w_ie={} h_e={} h_i={}",
            i.s, i.sigma, i.s_bar, i.sigma_bar, i.w_ee, i.w_ie, i.h_e, i.h_i
        );
        let _ = writeln!(s, "clamp_events = {}", m.clamp_events);
        let _ = writeln!(s, "box_violations = {}", m.box_violations);
        s
    }
}

pub fn write_state_csv<W: Write>(samples: &[ExtendedState], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "s", "sigma", "s_bar", "sigma_bar", "w_ee", "w_ie", "h_e", "h_i"])?;
    for x in samples {
        w.write_record(
            [x.t, x.s, x.sigma, x.s_bar, x.sigma_bar, x.w_ee, x.w_ie, x.h_e, x.h_i].map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Integration stopped on a non-finite value; `partial` holds the samples
/// recorded up to that point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct IntegrationFailure {
    pub partial: Trace,
    pub error: EvolutionError,
}

fn run_id(config: &RegulationConfig, init: &ExtendedState, settings: &IntegrationSettings) -> String {
    // FNV-1a over the debug rendering: stable for identical inputs
    let text = format!("{config:?}|{init:?}|{settings:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// RK4 integration of the regulated system with weight clamping at zero.
pub fn integrate(
    config: &RegulationConfig,
    init: ExtendedState,
    settings: IntegrationSettings,
) -> Result<Trace, Box<IntegrationFailure>> {
    let mut observer = |_: &ExtendedState| {};
    integrate_observed(config, init, settings, &mut observer)
}

/// As [`integrate`], additionally calling `observer` on every step (not just
/// the recorded samples).
pub fn integrate_observed(
    config: &RegulationConfig,
    init: ExtendedState,
    settings: IntegrationSettings,
    observer: &mut dyn FnMut(&ExtendedState),
) -> Result<Trace, Box<IntegrationFailure>> {
    let init = ExtendedState { t: 0.0, ..init };
    let mut metadata = TraceMetadata {
        config: *config,
        initial: init,
        settings,
        run_id: run_id(config, &init, &settings),
        clamp_events: 0,
        box_violations: 0,
    };
    let fail = |samples: Vec<ExtendedState>, metadata: TraceMetadata, error| {
        Box::new(IntegrationFailure {
            partial: Trace { samples, metadata },
            error,
        })
    };
    if let Err(e) = settings.validate() {
        return Err(fail(Vec::new(), metadata, e));
    }
    let mut system = match RegulatedSystem::new(*config, settings.dt) {
        Ok(s) => s,
        Err(e) => return Err(fail(Vec::new(), metadata, e)),
    };
    let (lo, hi) = config.variant.activity_bounds();
    let steps = settings.steps();
    let stride = settings.stride();
    let mut samples = Vec::with_capacity((steps / stride + 1) as usize);
    let mut x = init;
    samples.push(x);
    observer(&x);
    for k in 1..=steps {
        x = match system.step(&x, k) {
            Ok(x) => x,
            Err(e) => {
                metadata.clamp_events = system.clamp_events();
                return Err(fail(samples, metadata, e));
            }
        };
        observer(&x);
        if k % stride == 0 {
            if x.s < lo || x.s > hi || x.sigma < lo || x.sigma > hi {
                metadata.box_violations += 1;
            }
            samples.push(x);
        }
    }
    metadata.clamp_events = system.clamp_events();
    Ok(Trace { samples, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reduced_cfg() -> RegulationConfig {
        RegulationConfig::free(
            Variant::Reduced,
            FixedParams {
                w_ei: 10.0,
                w_ii: 6.0,
                beta: 1.0,
            },
            0.1,
        )
    }

    #[test]
    fn zero_field_leaves_state() {
        let y = rk4_step(|_: &[f64; 3]| [0.0; 3], &[1.0, -2.0, 3.5], 0.1).unwrap();
        assert_eq!(y, [1.0, -2.0, 3.5]);
    }

    #[test]
    fn exponential_decay_global_error() {
        let mut y = [1.0];
        for _ in 0..10 {
            y = rk4_step(|y: &[f64; 1]| [-y[0]], &y, 0.1).unwrap();
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn non_finite_is_reported() {
        let e = rk4_step(|_: &[f64; 2]| [1.0, f64::INFINITY], &[0.0, 0.0], 0.1).unwrap_err();
        assert!(matches!(e, EvolutionError::NonFinite { component: 1, .. }));
    }

    #[test]
    fn moving_average_constant_and_step_response() {
        assert_eq!(moving_average_rhs(0.3, 0.3, 0.1), 0.0);
        let mut y = [0.0];
        for _ in 0..1000 {
            y = rk4_step(|y: &[f64; 1]| [moving_average_rhs(1.0, y[0], 0.1)], &y, 0.01).unwrap();
        }
        assert!((y[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn covariance_arithmetic() {
        let x = ExtendedState {
            s: 0.3,
            s_bar: 0.1,
            sigma: 0.0,
            sigma_bar: 0.1,
            ..Default::default()
        };
        assert!((cov_ee(&x) - 0.04).abs() < 1e-15);
        assert!((cov_ie(&x) - (-0.02)).abs() < 1e-15);
        let rest = ExtendedState { s: 0.2, s_bar: 0.2, ..x };
        assert_eq!(cov_ee(&rest), 0.0);
        assert_eq!(cov_ie(&rest), 0.0);
    }

    #[test]
    fn rules_off_only_activity_moves() {
        let cfg = reduced_cfg();
        let x = ExtendedState {
            s: 0.2,
            sigma: -0.1,
            s_bar: 0.0,
            sigma_bar: 0.05,
            w_ee: 12.0,
            w_ie: 15.0,
            ..Default::default()
        };
        let r = regulated_rhs(&x, &cfg);
        assert_eq!((r.dw_ee, r.dw_ie, r.dh_e, r.dh_i), (0.0, 0.0, 0.0, 0.0));
        let v = x.system(&cfg).rhs(x.activity());
        assert_eq!((r.ds, r.dsigma), (v.ds, v.dsigma));
    }

    #[test]
    fn weights_move_in_opposite_directions_at_rest() {
        let cfg = RegulationConfig {
            w_ee: Some(Rule::new(0.01, 0.01)),
            w_ie: Some(Rule::new(-0.01, 0.01)),
            ..reduced_cfg()
        };
        let x = ExtendedState::at_rest(ActivityPoint::new(0.49, 0.48), 16.0, 15.0, FiringThresholds { h_e: 0.0, h_i: 0.0 });
        let r = regulated_rhs(&x, &cfg);
        assert!((r.dw_ee - (-1e-4)).abs() < 1e-18);
        assert!((r.dw_ie - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn config_sign_constraints() {
        let mut cfg = reduced_cfg();
        cfg.w_ie = Some(Rule::new(0.01, 0.01));
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("w_ie.eps"), "{msg}");
        let mut cfg = reduced_cfg();
        cfg.h_e = Some(Rule::new(0.001, 0.5));
        assert!(cfg.validate().unwrap_err().to_string().contains("full variant"));
        let mut cfg = reduced_cfg();
        cfg.rho = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn clamp_keeps_weights_non_negative() {
        let cfg = RegulationConfig {
            w_ee: Some(Rule::new(1.0, 1.0)),
            ..reduced_cfg()
        };
        let init = ExtendedState::at_rest(ActivityPoint::new(0.0, 0.0), 0.05, 15.0, FiringThresholds { h_e: 0.0, h_i: 0.0 });
        let trace = integrate(&cfg, init, IntegrationSettings::new(0.01, 1.0, 0.1)).unwrap();
        assert!(trace.samples.iter().all(|x| x.w_ee >= 0.0));
        assert!(trace.metadata.clamp_events > 0);
    }

    #[test]
    fn nonfinite_returns_partial_trace() {
        let cfg = RegulationConfig {
            fixed: FixedParams {
                w_ei: 10.0,
                w_ii: 6.0,
                beta: 1.0,
            },
            w_ie: Some(Rule::new(-1e308, 1e10)),
            ..reduced_cfg()
        };
        let init = ExtendedState::at_rest(ActivityPoint::new(0.1, 0.0), 12.0, 15.0, FiringThresholds { h_e: 0.0, h_i: 0.0 });
        let err = integrate(&cfg, init, IntegrationSettings::new(0.01, 5.0, 0.01)).unwrap_err();
        assert!(matches!(err.error, EvolutionError::NonFinite { .. }));
        assert!(!err.partial.samples.is_empty());
    }

    #[test]
    fn sampling_times_strictly_increase() {
        let init = ExtendedState::at_rest(ActivityPoint::new(0.1, 0.0), 12.0, 15.0, FiringThresholds { h_e: 0.0, h_i: 0.0 });
        let trace = integrate(&reduced_cfg(), init, IntegrationSettings::new(0.01, 3.0, 0.25)).unwrap();
        let t: Vec<f64> = trace.times().collect();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(t.len(), 13);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,s,sigma,s_bar,sigma_bar,w_ee,w_ie,h_e,h_i\n"));
        assert_eq!(text.lines().count(), 14);
    }
}
