use crate::dynamics::{jacobian_at, sigma_on_sigma_nullcline, ActivityPoint, JacobianInfo, SystemParams};

/// Residual bound every reported fixed point satisfies (componentwise).
pub const FIXED_POINT_RESIDUAL: f64 = 1e-9;

const SCAN_POINTS: usize = 4001;
const MERGE_DISTANCE: f64 = 1e-6;
const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub location: ActivityPoint,
    pub stability: JacobianInfo,
}

impl FixedPoint {
    pub fn is_stable(&self) -> bool {
        self.stability.class.is_stable()
    }
}

/// Abscissae for the nullcline scan: uniform in `u ∈ [-1, 1]`, warped by
/// `tanh` so that points cluster towards both edges of the box, where
/// corner equilibria sit within ~1e-4 of the boundary.
fn scan_abscissae(params: &SystemParams) -> Vec<f64> {
    let (lo, hi) = params.variant().activity_bounds();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let k = 3.0f64;
    (0..SCAN_POINTS)
        .map(|i| {
            let u = -1.0 + 2.0 * i as f64 / (SCAN_POINTS - 1) as f64;
            mid + half * (k * u).tanh() / k.tanh()
        })
        .collect()
}

/// ṡ evaluated on the σ-nullcline; its zeros are the nullcline intersections.
fn intersection_function(params: &SystemParams, s: f64) -> f64 {
    let sigma = sigma_on_sigma_nullcline(params, s);
    params.rhs(ActivityPoint::new(s, sigma)).ds
}

/// Newton polish on the planar system; returns `None` if it diverges or
/// leaves the box.
pub(crate) fn newton_polish(params: &SystemParams, start: ActivityPoint) -> Option<ActivityPoint> {
    let (lo, hi) = params.variant().activity_bounds();
    let mut p = start;
    for _ in 0..NEWTON_MAX_ITER {
        let f = params.rhs(p);
        if f.max_abs() < NEWTON_TOL {
            return Some(p);
        }
        let [[a, b], [c, d]] = jacobian_at(p, params).entries;
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let ds = (d * f.ds - b * f.dsigma) / det;
        let dsig = (a * f.dsigma - c * f.ds) / det;
        p = ActivityPoint::new(p.s - ds, p.sigma - dsig);
        if !(p.s >= lo && p.s <= hi && p.sigma >= lo && p.sigma <= hi) {
            return None;
        }
    }
    (params.rhs(p).max_abs() < FIXED_POINT_RESIDUAL).then_some(p)
}

/// All equilibria of the planar system, ordered by `s`.
///
/// A dense scan locates sign changes of `ṡ` along the σ-nullcline, each is
/// bisected and then polished with 2-D Newton. Tangential (double) roots
/// without a sign change are not reported.
pub fn find_fixed_points(params: &SystemParams) -> Vec<FixedPoint> {
    let xs = scan_abscissae(params);
    let gs: Vec<f64> = xs.iter().map(|&s| intersection_function(params, s)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if gs[i] == 0.0 {
            roots.push(xs[i]);
        }
        if i + 1 < xs.len() && gs[i] * gs[i + 1] < 0.0 {
            let (mut a, mut b, mut ga) = (xs[i], xs[i + 1], gs[i]);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let gm = intersection_function(params, m);
                if gm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (gm < 0.0) == (ga < 0.0) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }

    let mut out: Vec<FixedPoint> = Vec::new();
    for s in roots {
        let guess = ActivityPoint::new(s, sigma_on_sigma_nullcline(params, s));
        let p = newton_polish(params, guess).unwrap_or(guess);
        let r = params.rhs(p);
        if r.ds.abs() >= FIXED_POINT_RESIDUAL || r.dsigma.abs() >= FIXED_POINT_RESIDUAL {
            log::debug!("dropping unpolished root at s = {s}");
            continue;
        }
        if out.iter().any(|q| q.location.distance(&p) < MERGE_DISTANCE) {
            continue;
        }
        out.push(FixedPoint {
            location: p,
            stability: jacobian_at(p, params),
        });
    }
    out.sort_by(|a, b| a.location.s.total_cmp(&b.location.s));
    out
}
