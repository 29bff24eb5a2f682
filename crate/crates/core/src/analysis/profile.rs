//! Time-averaged excitatory variance along lines of constant `w_ie`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ActivityPoint, SynapticWeights, SystemParams};
use crate::evolution::{moving_average_rhs, rk4_step, EvolutionError, FixedParams};

/// A horizontal line in the (w_ee, w_ie) plane of the reduced system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileLine {
    pub w_ie: f64,
    pub w_ee_values: Vec<f64>,
}

impl ProfileLine {
    /// `n` evenly spaced `w_ee` values from `lo` to `hi` inclusive.
    pub fn linspace(w_ie: f64, lo: f64, hi: f64, n: usize) -> Self {
        let w_ee_values = (0..n)
            .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        ProfileLine { w_ie, w_ee_values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSettings {
    /// Rate of the activity averages; the variance average uses `rho / 10`.
    pub rho: f64,
    pub t_transient: f64,
    pub t_measure: f64,
    pub dt: f64,
    pub initial: ActivityPoint,
}

impl Default for ProfileSettings {
    fn default() -> Self {
        ProfileSettings {
            rho: 0.1,
            t_transient: 1000.0,
            t_measure: 500.0,
            dt: 0.01,
            initial: ActivityPoint::new(0.1, 0.05),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub w_ee: f64,
    /// Mean of the slowly averaged variance `c̄_ee` over the measurement window.
    pub c_ee: f64,
    /// Same for `c̄_ie`.
    pub c_ie: f64,
}

/// Integrates the reduced system with frozen weights at every `w_ee` of the
/// line, together with the moving averages `s̄, σ̄` (rate ρ) and the averaged
/// covariances `c̄_ee, c̄_ie` (rate ρ/10), and reports `c̄` averaged over
/// the measurement window.
pub fn covariance_profile(
    line: &ProfileLine,
    fixed: &FixedParams,
    settings: &ProfileSettings,
) -> Result<Vec<ProfilePoint>, EvolutionError> {
    if !(settings.rho > 0.0 && settings.dt > 0.0 && settings.t_measure > 0.0 && settings.t_transient >= 0.0) {
        return Err(EvolutionError::Config(format!("invalid profile settings {settings:?}")));
    }
    line.w_ee_values
        .iter()
        .map(|&w_ee| {
            let w = SynapticWeights::new(w_ee, fixed.w_ei, line.w_ie, fixed.w_ii)?;
            profile_point(&SystemParams::reduced(w, fixed.beta), settings)
        })
        .collect()
}

fn profile_point(params: &SystemParams, st: &ProfileSettings) -> Result<ProfilePoint, EvolutionError> {
    let rho = st.rho;
    let slow = rho / 10.0;
    let rhs = |y: &[f64; 6]| {
        let v = params.rhs(ActivityPoint::new(y[0], y[1]));
        let (ds, dg) = (y[0] - y[2], y[1] - y[3]);
        [
            v.ds,
            v.dsigma,
            moving_average_rhs(y[0], y[2], rho),
            moving_average_rhs(y[1], y[3], rho),
            moving_average_rhs(ds * ds, y[4], slow),
            moving_average_rhs(ds * dg, y[5], slow),
        ]
    };
    let p0 = st.initial;
    let mut y = [p0.s, p0.sigma, p0.s, p0.sigma, 0.0, 0.0];
    let n_transient = (st.t_transient / st.dt).round() as u64;
    let n_measure = ((st.t_measure / st.dt).round() as u64).max(1);
    for _ in 0..n_transient {
        y = rk4_step(rhs, &y, st.dt)?;
    }
    let (mut acc_ee, mut acc_ie) = (0.0, 0.0);
    for _ in 0..n_measure {
        y = rk4_step(rhs, &y, st.dt)?;
        acc_ee += y[4];
        acc_ie += y[5];
    }
    Ok(ProfilePoint {
        w_ee: params.weights.w_ee,
        c_ee: acc_ee / n_measure as f64,
        c_ie: acc_ie / n_measure as f64,
    })
}
