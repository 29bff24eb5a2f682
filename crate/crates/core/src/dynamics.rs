//! Mean-field vector fields of the two-population network.
//!
//! Two planar variants are provided:
//!
//! * the **full** system, with activities `s, σ ∈ [0, 1]` and explicit firing
//!   thresholds `h_E`, `h_I`;
//! * the **reduced** system, obtained by tying the thresholds to the weights
//!   (see [`symmetric_thresholds`]) and shifting both activities by `-0.5`.
//!   The origin is then a fixed point and a centre of symmetry for every
//!   parameter value.
//!
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nullcline evaluations reject `|2x| >= 1 - ATANH_MARGIN`.
pub const ATANH_MARGIN: f64 = 1e-12;

/// `|Re λ|` below this is classified as [`StabilityClass::Marginal`].
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("argument {value} outside the open nullcline domain (|2x| must be < 1)")]
    Domain { value: f64 },
    #[error("degenerate parameters: {0}")]
    Degenerate(&'static str),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Mean synaptic strengths. The inhibitory weights `w_ei` and `w_ii` are
/// stored as positive magnitudes; the sign is applied in the vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapticWeights {
    pub w_ee: f64,
    pub w_ei: f64,
    pub w_ie: f64,
    pub w_ii: f64,
}

impl SynapticWeights {
    pub fn new(w_ee: f64, w_ei: f64, w_ie: f64, w_ii: f64) -> Result<Self, DynamicsError> {
        let w = SynapticWeights {
            w_ee,
            w_ei,
            w_ie,
            w_ii,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (name, value) in [
            ("w_ee", self.w_ee),
            ("w_ei", self.w_ei),
            ("w_ie", self.w_ie),
            ("w_ii", self.w_ii),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(DynamicsError::InvalidParam {
                    name,
                    value,
                    reason: "synaptic weights must be finite and non-negative",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiringThresholds {
    pub h_e: f64,
    pub h_i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Full,
    Reduced,
}

impl Variant {
    /// Closed interval containing each activity coordinate.
    pub fn activity_bounds(self) -> (f64, f64) {
        match self {
            Variant::Full => (0.0, 1.0),
            Variant::Reduced => (-0.5, 0.5),
        }
    }

    /// The symmetric rest point: `(.5, .5)` or the origin.
    pub fn centre(self) -> ActivityPoint {
        match self {
            Variant::Full => ActivityPoint::new(0.5, 0.5),
            Variant::Reduced => ActivityPoint::new(0.0, 0.0),
        }
    }
}

/// Parameters of one mean-field system. `thresholds` is `None` for the
/// reduced variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub weights: SynapticWeights,
    pub thresholds: Option<FiringThresholds>,
    pub beta: f64,
}

impl SystemParams {
    pub fn full(weights: SynapticWeights, thresholds: FiringThresholds, beta: f64) -> Self {
        SystemParams {
            weights,
            thresholds: Some(thresholds),
            beta,
        }
    }

    pub fn reduced(weights: SynapticWeights, beta: f64) -> Self {
        SystemParams {
            weights,
            thresholds: None,
            beta,
        }
    }

    pub fn variant(&self) -> Variant {
        if self.thresholds.is_some() {
            Variant::Full
        } else {
            Variant::Reduced
        }
    }

    /// `T = 1/β`, or `None` at infinite temperature.
    pub fn temperature(&self) -> Option<f64> {
        (self.beta > 0.0).then(|| 1.0 / self.beta)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        self.weights.validate()?;
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(DynamicsError::InvalidParam {
                name: "beta",
                value: self.beta,
                reason: "inverse temperature must be finite and non-negative",
            });
        }
        if let Some(h) = self.thresholds {
            for (name, value) in [("h_e", h.h_e), ("h_i", h.h_i)] {
                if !value.is_finite() {
                    return Err(DynamicsError::InvalidParam {
                        name,
                        value,
                        reason: "thresholds must be finite",
                    });
                }
            }
        }
        Ok(())
    }

    /// Vector field of the active variant.
    #[inline]
    pub fn rhs(&self, p: ActivityPoint) -> Velocity {
        match self.thresholds {
            Some(h) => full_rhs_with(p, &self.weights, h, self.beta),
            None => reduced_rhs(p, &self.weights, self.beta),
        }
    }

    /// Thresholds entering the tanh arguments (zero for the reduced variant).
    fn threshold_pair(&self) -> (f64, f64) {
        self.thresholds.map_or((0.0, 0.0), |h| (h.h_e, h.h_i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActivityPoint {
    pub s: f64,
    pub sigma: f64,
}

impl ActivityPoint {
    pub const fn new(s: f64, sigma: f64) -> Self {
        ActivityPoint { s, sigma }
    }

    pub fn distance(&self, other: &ActivityPoint) -> f64 {
        (self.s - other.s).hypot(self.sigma - other.sigma)
    }
}

impl std::ops::Neg for ActivityPoint {
    type Output = ActivityPoint;
    fn neg(self) -> ActivityPoint {
        ActivityPoint::new(-self.s, -self.sigma)
    }
}

/// Time derivative `(ds/dt, dσ/dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity {
    pub ds: f64,
    pub dsigma: f64,
}

impl Velocity {
    pub fn max_abs(&self) -> f64 {
        self.ds.abs().max(self.dsigma.abs())
    }
}

impl std::ops::Neg for Velocity {
    type Output = Velocity;
    fn neg(self) -> Velocity {
        Velocity {
            ds: -self.ds,
            dsigma: -self.dsigma,
        }
    }
}

/// Full mean-field system, activities in `[0, 1]`.
pub fn full_rhs(p: ActivityPoint, params: &SystemParams) -> Velocity {
    let h = params.thresholds.unwrap_or(FiringThresholds { h_e: 0.0, h_i: 0.0 });
    full_rhs_with(p, &params.weights, h, params.beta)
}

#[inline]
fn full_rhs_with(p: ActivityPoint, w: &SynapticWeights, h: FiringThresholds, beta: f64) -> Velocity {
    let u = w.w_ee * p.s - w.w_ei * p.sigma - h.h_e;
    let v = w.w_ie * p.s - w.w_ii * p.sigma - h.h_i;
    Velocity {
        ds: 0.5 - p.s + 0.5 * (beta * u).tanh(),
        dsigma: 0.5 - p.sigma + 0.5 * (beta * v).tanh(),
    }
}

/// Reduced (symmetric) system, activities in `[-0.5, 0.5]`.
#[inline]
pub fn reduced_rhs(p: ActivityPoint, w: &SynapticWeights, beta: f64) -> Velocity {
    let u = w.w_ee * p.s - w.w_ei * p.sigma;
    let v = w.w_ie * p.s - w.w_ii * p.sigma;
    Velocity {
        ds: -p.s + 0.5 * (beta * u).tanh(),
        dsigma: -p.sigma + 0.5 * (beta * v).tanh(),
    }
}

/// Thresholds that make `(.5, .5)` a fixed point of the full system for
/// every β.
pub fn symmetric_thresholds(w: &SynapticWeights) -> FiringThresholds {
    FiringThresholds {
        h_e: 0.5 * (w.w_ee - w.w_ei),
        h_i: 0.5 * (w.w_ie - w.w_ii),
    }
}

fn checked_atanh_2x(x: f64) -> Result<f64, DynamicsError> {
    let y = 2.0 * x;
    if !(y.abs() < 1.0 - ATANH_MARGIN) {
        return Err(DynamicsError::Domain { value: x });
    }
    Ok(y.atanh())
}

/// σ on the s-nullcline of the reduced system at abscissa `s`:
/// `σ = (w_ee s − T atanh(2s)) / w_ei`.
pub fn s_nullcline_sigma(s: f64, w: &SynapticWeights, t: f64) -> Result<f64, DynamicsError> {
    if w.w_ei == 0.0 {
        return Err(DynamicsError::Degenerate("w_ei = 0: the s-nullcline is not a graph over s"));
    }
    Ok((w.w_ee * s - t * checked_atanh_2x(s)?) / w.w_ei)
}

/// s on the σ-nullcline of the reduced system at ordinate `σ`:
/// `s = (w_ii σ + T atanh(2σ)) / w_ie`. Strictly increasing in σ.
pub fn sigma_nullcline_s(sigma: f64, w: &SynapticWeights, t: f64) -> Result<f64, DynamicsError> {
    if w.w_ie == 0.0 {
        return Err(DynamicsError::Degenerate("w_ie = 0: the σ-nullcline is not a graph over σ"));
    }
    Ok((w.w_ii * sigma + t * checked_atanh_2x(sigma)?) / w.w_ie)
}

/// s-nullcline of either variant as a graph `σ(s)`.
pub fn s_nullcline(params: &SystemParams, s: f64) -> Result<f64, DynamicsError> {
    let t = params
        .temperature()
        .ok_or(DynamicsError::Degenerate("β = 0: nullclines are the lines s = σ = centre"))?;
    match params.thresholds {
        Some(h) => {
            let w = &params.weights;
            if w.w_ei == 0.0 {
                return Err(DynamicsError::Degenerate("w_ei = 0"));
            }
            Ok((w.w_ee * s - h.h_e - t * checked_atanh_2x(s - 0.5)?) / w.w_ei)
        }
        None => s_nullcline_sigma(s, &params.weights, t),
    }
}

/// σ-nullcline of either variant as a graph `s(σ)`.
pub fn sigma_nullcline(params: &SystemParams, sigma: f64) -> Result<f64, DynamicsError> {
    let t = params
        .temperature()
        .ok_or(DynamicsError::Degenerate("β = 0: nullclines are the lines s = σ = centre"))?;
    match params.thresholds {
        Some(h) => {
            let w = &params.weights;
            if w.w_ie == 0.0 {
                return Err(DynamicsError::Degenerate("w_ie = 0"));
            }
            Ok((w.w_ii * sigma + h.h_i + t * checked_atanh_2x(sigma - 0.5)?) / w.w_ie)
        }
        None => sigma_nullcline_s(sigma, &params.weights, t),
    }
}

/// The unique σ with `dσ/dt = 0` at abscissa `s`. The second component of
/// the vector field is strictly decreasing in σ, so this is defined for all
/// parameter values (including β = 0 and `w_ie = 0`).
pub fn sigma_on_sigma_nullcline(params: &SystemParams, s: f64) -> f64 {
    let (lo, hi) = params.variant().activity_bounds();
    let f = |sigma: f64| params.rhs(ActivityPoint::new(s, sigma)).dsigma;
    let (mut a, mut b) = (lo, hi);
    // f(lo) >= 0 >= f(hi) on the closed box
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    Real(f64, f64),
    Complex { re: f64, im: f64 },
}

impl Eigenvalues {
    pub fn max_real_part(&self) -> f64 {
        match *self {
            Eigenvalues::Real(a, b) => a.max(b),
            Eigenvalues::Complex { re, .. } => re,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Eigenvalues::Complex { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Saddle,
    Marginal,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        matches!(self, StabilityClass::StableNode | StabilityClass::StableSpiral)
    }
}

/// Linearization at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianInfo {
    /// Row-major `[[∂ṡ/∂s, ∂ṡ/∂σ], [∂σ̇/∂s, ∂σ̇/∂σ]]`.
    pub entries: [[f64; 2]; 2],
    pub eigenvalues: Eigenvalues,
    pub class: StabilityClass,
}

impl JacobianInfo {
    pub fn from_entries(entries: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = entries;
        let tr = a + d;
        let det = a * d - b * c;
        let disc = 0.25 * tr * tr - det;
        let eigenvalues = if disc >= 0.0 {
            let r = disc.sqrt();
            // avoid cancellation in the smaller-magnitude root
            let big = 0.5 * tr + r.copysign(tr);
            let small = if big != 0.0 { det / big } else { 0.5 * tr - r };
            if big >= small {
                Eigenvalues::Real(big, small)
            } else {
                Eigenvalues::Real(small, big)
            }
        } else {
            Eigenvalues::Complex {
                re: 0.5 * tr,
                im: (-disc).sqrt(),
            }
        };
        let class = classify(eigenvalues);
        JacobianInfo {
            entries,
            eigenvalues,
            class,
        }
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn determinant(&self) -> f64 {
        let [[a, b], [c, d]] = self.entries;
        a * d - b * c
    }
}

fn classify(ev: Eigenvalues) -> StabilityClass {
    match ev {
        Eigenvalues::Complex { re, .. } => {
            if re.abs() < MARGINAL_TOL {
                StabilityClass::Marginal
            } else if re < 0.0 {
                StabilityClass::StableSpiral
            } else {
                StabilityClass::UnstableSpiral
            }
        }
        Eigenvalues::Real(a, b) => {
            if a.abs() < MARGINAL_TOL || b.abs() < MARGINAL_TOL {
                StabilityClass::Marginal
            } else if a > 0.0 && b > 0.0 {
                StabilityClass::UnstableNode
            } else if a < 0.0 && b < 0.0 {
                StabilityClass::StableNode
            } else {
                StabilityClass::Saddle
            }
        }
    }
}

/// Analytic Jacobian of the active variant at `p`.
pub fn jacobian_at(p: ActivityPoint, params: &SystemParams) -> JacobianInfo {
    let w = &params.weights;
    let beta = params.beta;
    let (h_e, h_i) = params.threshold_pair();
    let u = w.w_ee * p.s - w.w_ei * p.sigma - h_e;
    let v = w.w_ie * p.s - w.w_ii * p.sigma - h_i;
    // d/dx [.5 tanh(β x)] = .5 β sech²(β x)
    let ge = 0.5 * beta * (1.0 - (beta * u).tanh().powi(2));
    let gi = 0.5 * beta * (1.0 - (beta * v).tanh().powi(2));
    JacobianInfo::from_entries([
        [-1.0 + ge * w.w_ee, -ge * w.w_ei],
        [gi * w.w_ie, -1.0 - gi * w.w_ii],
    ])
}

/// Critical `w_ee` for the Hopf bifurcation of the origin of the reduced
/// system: `w_ii + 4T`.
pub fn hopf_threshold_wee(w_ii: f64, t: f64) -> f64 {
    w_ii + 4.0 * t
}

/// Whether the linearization at the reduced origin has complex eigenvalues,
/// `4 w_ei w_ie > (w_ee + w_ii)²` (independent of β).
pub fn origin_has_complex_eigenvalues(w: &SynapticWeights) -> bool {
    4.0 * w.w_ei * w.w_ie > (w.w_ee + w.w_ii).powi(2)
}
