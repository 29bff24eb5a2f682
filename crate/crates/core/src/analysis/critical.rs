//! Critical curves of the reduced system: the nullcline tangency (saddlenode)
//! curve, the pitchfork line, and a measure of how closely the two
//! nullclines overlap.
//!
//! Along the σ-nullcline it is convenient to parametrize by `u = atanh(2σ)`:
//! for large `w_ie` the tangency sits within `1e-6` of `σ = 0.5`, where a
//! uniform grid in σ would be useless.

use super::AnalysisError;
use crate::dynamics::{hopf_threshold_wee, s_nullcline_sigma, DynamicsError, SynapticWeights, SystemParams};

const SCAN_POINTS: usize = 4000;
const W_MAX: f64 = 100.0;
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;
const OVERLAP_POINTS: usize = 801;
const OVERLAP_RANGE: f64 = 0.4;

/// A tangential contact of the two nullclines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency {
    pub w_ee: f64,
    pub s: f64,
    pub sigma: f64,
    /// |difference of the nullcline ordinates| at `s`.
    pub value_residual: f64,
    /// |difference of the nullcline slopes| at `s`.
    pub slope_residual: f64,
}

/// The σ-nullcline `s = (w_ii σ + T atanh 2σ) / w_ie` in the `u` chart.
#[derive(Debug, Clone, Copy)]
struct SigmaNullcline {
    w_ii: f64,
    w_ie: f64,
    t: f64,
}

impl SigmaNullcline {
    fn s(&self, u: f64) -> f64 {
        (0.5 * self.w_ii * u.tanh() + self.t * u) / self.w_ie
    }

    fn ds_du(&self, u: f64) -> f64 {
        (0.5 * self.w_ii / u.cosh().powi(2) + self.t) / self.w_ie
    }

    /// Inverse: the `u` with `s(u) = s`. `s(u)` is odd and strictly
    /// increasing, so safeguarded Newton inside a growing bracket suffices.
    fn u_at(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let target = s.abs();
        let mut hi = 1.0;
        while self.s(hi) < target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        let mut u = 0.5 * hi;
        for _ in 0..200 {
            let f = self.s(u) - target;
            if f.abs() <= 1e-16 * target.max(1e-300) {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let next = u - f / self.ds_du(u);
            u = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 * hi {
                break;
            }
        }
        u.copysign(s)
    }
}

fn temperature_of(t: f64) -> Result<f64, AnalysisError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(AnalysisError::NotApplicable(format!("temperature T = {t} must be finite and positive")));
    }
    Ok(t)
}

/// Critical `w_ee` at which the two nullclines of the reduced system become
/// tangent away from the origin (the saddlenode curve).
///
/// Points of the σ-nullcline lie on the s-nullcline for
/// `w_ee = W(u) = (w_ei σ + T atanh 2s) / s`; the tangency is the interior
/// minimum of `W`, located by a scan in `u` and then polished by Newton on
/// (s, w_ee) for equal ordinates and slopes.
///
/// Returns [`AnalysisError::NoTangency`] when `W` is increasing from the
/// origin (new equilibria appear through the pitchfork instead) or the
/// tangency lies outside `(hopf_threshold_wee, 100]`.
///
/// ```
/// let tan = covcrit::analysis::saddlenode_wee(10.0, 2.0, 8.0, 1.0).unwrap();
/// assert!((tan.w_ee - 14.22).abs() < 0.01);
/// ```
pub fn saddlenode_wee(w_ei: f64, w_ii: f64, w_ie: f64, t: f64) -> Result<Tangency, AnalysisError> {
    let t = temperature_of(t)?;
    SynapticWeights::new(0.0, w_ei, w_ie, w_ii)?;
    let no_tangency = || AnalysisError::NoTangency { w_ei, w_ii, w_ie, t };
    if w_ei == 0.0 || w_ie == 0.0 {
        return Err(no_tangency());
    }
    let nc = SigmaNullcline { w_ii, w_ie, t };
    // the σ-nullcline leaves the box (s → 0.5) at u_end
    let u_end = nc.u_at(0.5 * (1.0 - 1e-9));
    let w_of = |u: f64| {
        let s = nc.s(u);
        (0.5 * w_ei * u.tanh() + t * (2.0 * s).atanh()) / s
    };

    let us: Vec<f64> = (1..=SCAN_POINTS).map(|i| u_end * i as f64 / (SCAN_POINTS + 1) as f64).collect();
    let ws: Vec<f64> = us.iter().map(|&u| w_of(u)).collect();
    let imin = (0..ws.len()).min_by(|&a, &b| ws[a].total_cmp(&ws[b])).unwrap();
    if imin == 0 || imin + 1 == ws.len() {
        return Err(no_tangency());
    }

    // golden-section refinement of the minimum
    let (mut a, mut b) = (us[imin - 1], us[imin + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (w_of(c), w_of(d));
    for _ in 0..200 {
        if b - a < 1e-14 * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = w_of(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = w_of(d);
        }
    }
    let u0 = 0.5 * (a + b);
    let (s, w) = newton_tangency(w_ei, &nc, nc.s(u0), w_of(u0));

    let (value_residual, slope_residual) = tangency_residuals(w_ei, &nc, s, w);
    let hopf = hopf_threshold_wee(w_ii, t);
    if !(w > hopf && w <= W_MAX) || !w.is_finite() {
        return Err(no_tangency());
    }
    let u = nc.u_at(s);
    Ok(Tangency {
        w_ee: w,
        s,
        sigma: 0.5 * u.tanh(),
        value_residual,
        slope_residual,
    })
}

/// Nullcline difference `D = σ_s(s; w) − σ_σ(s)` and its s-derivative,
/// plus the second derivative used by Newton.
fn tangency_system(w_ei: f64, nc: &SigmaNullcline, s: f64, w: f64) -> (f64, f64, f64) {
    let t = nc.t;
    let q = 1.0 - 4.0 * s * s;
    let u = nc.u_at(s);
    let sigma = 0.5 * u.tanh();
    let sech2 = 1.0 / u.cosh().powi(2); // 1 − 4σ²
    let sig_s = (w * s - t * (2.0 * s).atanh()) / w_ei;
    let dsig_s = (w - 2.0 * t / q) / w_ei;
    let d2sig_s = -16.0 * t * s / (q * q) / w_ei;
    // derivatives of s(σ), inverted
    let s1 = (nc.w_ii + 2.0 * t / sech2) / nc.w_ie;
    let s2 = 16.0 * t * sigma / (sech2 * sech2) / nc.w_ie;
    let dsig = 1.0 / s1;
    let d2sig = -s2 / s1.powi(3);
    (sig_s - sigma, dsig_s - dsig, d2sig_s - d2sig)
}

fn tangency_residuals(w_ei: f64, nc: &SigmaNullcline, s: f64, w: f64) -> (f64, f64) {
    let (d, ds, _) = tangency_system(w_ei, nc, s, w);
    (d.abs(), ds.abs())
}

fn newton_tangency(w_ei: f64, nc: &SigmaNullcline, mut s: f64, mut w: f64) -> (f64, f64) {
    for _ in 0..NEWTON_MAX_ITER {
        let (f1, f2, f2s) = tangency_system(w_ei, nc, s, w);
        if f1.abs() < NEWTON_TOL * 1e-3 && f2.abs() < NEWTON_TOL {
            break;
        }
        // J = [[f2, s/w_ei], [f2s, 1/w_ei]]
        let (a, b, c, d) = (f2, s / w_ei, f2s, 1.0 / w_ei);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let ds = (d * f1 - b * f2) / det;
        let dw = (a * f2 - c * f1) / det;
        let s_new = s - ds;
        if !(s_new > 0.0 && s_new < 0.5) {
            break;
        }
        s = s_new;
        w -= dw;
    }
    (s, w)
}

/// `w_ee` at which the determinant of the linearization at the reduced
/// origin vanishes: `2T + w_ei w_ie / (2T + w_ii)`. Above it the origin has a
/// saddle direction and a symmetric pair of equilibria exists nearby.
///
/// ```
/// let w = covcrit::analysis::pitchfork_boundary_wee(10.0, 2.0, 2.75, 1.0).unwrap();
/// assert!((w - 8.875).abs() < 1e-12);
/// ```
pub fn pitchfork_boundary_wee(w_ei: f64, w_ii: f64, w_ie: f64, t: f64) -> Result<f64, AnalysisError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(AnalysisError::NotApplicable(format!(
            "temperature T = {t}: the origin is always stable"
        )));
    }
    SynapticWeights::new(0.0, w_ei, w_ie, w_ii)?;
    let denom = 2.0 * t + w_ii;
    if denom == 0.0 {
        return Err(AnalysisError::NotApplicable("T = w_ii = 0: determinant independent of w_ee".into()));
    }
    let w = 2.0 * t + w_ei * w_ie / denom;
    if w <= 0.0 {
        return Err(AnalysisError::NotApplicable(format!("determinant has no zero for w_ee > 0 (root {w})")));
    }
    Ok(w)
}

/// Maximum distance, over `s ∈ [-0.4, 0.4]`, between the σ-values of the
/// s-nullcline and of the σ-nullcline (the latter inverted numerically).
/// Small values mean the nullclines nearly coincide over most of the box.
pub fn nullcline_overlap_metric(params: &SystemParams) -> Result<f64, AnalysisError> {
    if params.thresholds.is_some() {
        return Err(AnalysisError::NotApplicable("overlap metric is defined for the reduced variant".into()));
    }
    let t = params
        .temperature()
        .ok_or(DynamicsError::Degenerate("β = 0: nullclines are the lines s = σ = 0"))?;
    let w = &params.weights;
    if w.w_ie == 0.0 {
        return Err(DynamicsError::Degenerate("w_ie = 0: the σ-nullcline is not a graph over σ").into());
    }
    let nc = SigmaNullcline {
        w_ii: w.w_ii,
        w_ie: w.w_ie,
        t,
    };
    let mut worst = 0.0f64;
    for i in 0..OVERLAP_POINTS {
        let s = -OVERLAP_RANGE + 2.0 * OVERLAP_RANGE * i as f64 / (OVERLAP_POINTS - 1) as f64;
        let a = s_nullcline_sigma(s, w, t)?;
        let b = 0.5 * nc.u_at(s).tanh();
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::find_fixed_points;
    use crate::dynamics::sigma_nullcline_s;

    #[test]
    fn inverse_nullcline_round_trips() {
        let nc = SigmaNullcline {
            w_ii: 6.0,
            w_ie: 15.0,
            t: 1.0,
        };
        let w = SynapticWeights::new(0.0, 10.0, 15.0, 6.0).unwrap();
        for s in [-0.49, -0.2, 0.0, 1e-8, 0.3, 0.4999] {
            let sigma = 0.5 * nc.u_at(s).tanh();
            assert!((sigma_nullcline_s(sigma, &w, 1.0).unwrap() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn saddlenode_reference_value() {
        let tan = saddlenode_wee(10.0, 2.0, 8.0, 1.0).unwrap();
        assert!((tan.w_ee - 14.2233).abs() < 1e-3, "{tan:?}");
        assert!(tan.value_residual < 1e-8 && tan.slope_residual < 1e-8);
    }

    #[test]
    fn fixed_point_count_changes_across_tangency() {
        let tan = saddlenode_wee(10.0, 2.0, 8.0, 1.0).unwrap();
        let count = |w_ee: f64| {
            let w = SynapticWeights::new(w_ee, 10.0, 8.0, 2.0).unwrap();
            find_fixed_points(&SystemParams::reduced(w, 1.0)).len()
        };
        assert_eq!(count(tan.w_ee - 1e-3), 1);
        assert_eq!(count(tan.w_ee + 1e-3), 5);
    }

    #[test]
    fn large_w_ie_tangency_near_box_edge() {
        let tan = saddlenode_wee(10.0, 6.0, 20.0, 1.0).unwrap();
        assert!(tan.sigma > 0.49);
        assert!(tan.value_residual < 1e-8 && tan.slope_residual < 1e-8);
    }

    #[test]
    fn small_w_ie_has_no_tangency() {
        assert!(matches!(
            saddlenode_wee(10.0, 2.0, 2.75, 1.0),
            Err(AnalysisError::NoTangency { .. })
        ));
    }

    #[test]
    fn pitchfork_flips_determinant_sign() {
        let w_p = pitchfork_boundary_wee(10.0, 2.0, 8.0, 1.0).unwrap();
        assert!((w_p - 22.0).abs() < 1e-12);
        let det = |w_ee: f64| {
            let w = SynapticWeights::new(w_ee, 10.0, 8.0, 2.0).unwrap();
            crate::dynamics::jacobian_at(Default::default(), &SystemParams::reduced(w, 1.0)).determinant()
        };
        assert!(det(w_p - 1e-6) > 0.0 && det(w_p + 1e-6) < 0.0);
        assert!(pitchfork_boundary_wee(10.0, 2.0, 8.0, f64::INFINITY).is_err());
    }

    #[test]
    fn overlap_metric_of_generic_point() {
        let w = SynapticWeights::new(12.0, 10.0, 8.0, 2.0).unwrap();
        let m = nullcline_overlap_metric(&SystemParams::reduced(w, 1.0)).unwrap();
        assert!(m > 0.1);
        let w0 = SynapticWeights::new(12.0, 10.0, 0.0, 2.0).unwrap();
        assert!(nullcline_overlap_metric(&SystemParams::reduced(w0, 1.0)).is_err());
    }
}
