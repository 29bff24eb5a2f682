//! Largest Lyapunov exponent of the regulated system (Benettin's two-orbit
//! method). A diagnostic: no error bars, no convergence guarantee.

use crate::evolution::{EvolutionError, ExtendedState, RegulatedSystem, RegulationConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSettings {
    pub dt: f64,
    /// Time discarded before accumulating stretching rates.
    pub t_transient: f64,
    /// Accumulation time after the transient.
    pub t_measure: f64,
    /// Time between renormalizations of the companion orbit.
    pub renorm_every: f64,
    /// Initial and renormalized separation.
    pub d0: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        LyapunovSettings {
            dt: 0.01,
            t_transient: 1000.0,
            t_measure: 50_000.0,
            renorm_every: 10.0,
            d0: 1e-8,
        }
    }
}

fn separation(a: &ExtendedState, b: &ExtendedState) -> f64 {
    let (x, y) = (a.to_array(), b.to_array());
    x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Estimate in units of 1/time.
pub fn largest_lyapunov(
    config: &RegulationConfig,
    init: ExtendedState,
    settings: &LyapunovSettings,
) -> Result<f64, EvolutionError> {
    let mut sys = RegulatedSystem::new(*config, settings.dt)?;
    let mut x = init;
    let mut k = 0u64;
    let n_transient = (settings.t_transient / settings.dt).round() as u64;
    while k < n_transient {
        k += 1;
        x = sys.step(&x, k)?;
    }
    let per_renorm = ((settings.renorm_every / settings.dt).round() as u64).max(1);
    let renorms = ((settings.t_measure / settings.renorm_every).round() as u64).max(1);
    // perturb along the s direction
    let mut y = x;
    y.s += settings.d0;
    let mut log_sum = 0.0;
    for _ in 0..renorms {
        for _ in 0..per_renorm {
            k += 1;
            x = sys.step(&x, k)?;
            y = sys.step(&y, k)?;
        }
        let d = separation(&x, &y);
        if d == 0.0 {
            // orbits merged (contracting onto a point within rounding)
            log_sum += (f64::MIN_POSITIVE / settings.d0).ln();
            y = x;
            y.s += settings.d0;
            continue;
        }
        log_sum += (d / settings.d0).ln();
        let (xa, ya) = (x.to_array(), y.to_array());
        let mut z = [0.0; 8];
        for i in 0..8 {
            z[i] = xa[i] + (ya[i] - xa[i]) * settings.d0 / d;
        }
        y = ExtendedState::from_array(y.t, &z);
    }
    Ok(log_sum / (renorms as f64 * per_renorm as f64 * settings.dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ActivityPoint, FiringThresholds, Variant};
    use crate::evolution::FixedParams;

    #[test]
    fn frozen_point_attractor_is_contracting() {
        let fixed = FixedParams {
            w_ei: 10.0,
            w_ii: 2.0,
            beta: 1.0,
        };
        let cfg = RegulationConfig::free(Variant::Reduced, fixed, 0.1);
        let init = ExtendedState::at_rest(ActivityPoint::new(0.1, 0.0), 4.0, 8.0, FiringThresholds::default());
        let settings = LyapunovSettings {
            t_transient: 50.0,
            t_measure: 200.0,
            ..Default::default()
        };
        let l = largest_lyapunov(&cfg, init, &settings).unwrap();
        assert!(l < -0.05, "{l}");
    }
}
