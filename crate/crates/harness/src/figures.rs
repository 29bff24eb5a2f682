//! Built-in scenarios, one per figure panel.
//!
//! Every driver writes at least one CSV and one SVG and returns a list of
//! named checks. `Fidelity::Quick` shortens runs and coarsens grids; only
//! `Full` checks carry their stated tolerances.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use covcrit::analysis::timeseries::{coefficient_of_variation, crossings_with_hysteresis, detect_period, mean, phase_episodes, PhaseThresholds};
use covcrit::analysis::{
    find_fixed_points, full_base, nullcline_overlap_metric, reduced_base, saddlenode_wee, scan_region_map,
    AnalysisError, Axis, BifurcationMap, DetectionSettings, ProfileLine, ProfileSettings, RegionLabel, ScanParameter,
};
use covcrit::dynamics::{s_nullcline, sigma_on_sigma_nullcline};
use covcrit::evolution::{integrate, integrate_planar, write_state_csv, ExtendedState, FixedParams, IntegrationSettings, RegulationConfig, Rule, Trace};
use covcrit::glauber::{simulate, GlauberConfig};
use covcrit::{ActivityPoint, FiringThresholds, SynapticWeights, SystemParams, Variant};

use crate::manifest::Manifest;
use crate::plot::Artifact;
use crate::run::{numerical, write_profile_csv, RunOutput, Writer};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    F1,
    F2a,
    F2b,
    F2c,
    F3a,
    F3b,
    F4a,
    F4b,
    F4c,
    F5,
    F6a,
    F6b,
    F6c,
    F7,
    F8a,
    F8b,
    F8c,
}

impl FigureId {
    pub const ALL: [FigureId; 17] = [
        FigureId::F1,
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F2c,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F4a,
        FigureId::F4b,
        FigureId::F4c,
        FigureId::F5,
        FigureId::F6a,
        FigureId::F6b,
        FigureId::F6c,
        FigureId::F7,
        FigureId::F8a,
        FigureId::F8b,
        FigureId::F8c,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::F1 => "1",
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F2c => "2c",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F4a => "4a",
            FigureId::F4b => "4b",
            FigureId::F4c => "4c",
            FigureId::F5 => "5",
            FigureId::F6a => "6a",
            FigureId::F6b => "6b",
            FigureId::F6c => "6c",
            FigureId::F7 => "7",
            FigureId::F8a => "8a",
            FigureId::F8b => "8b",
            FigureId::F8c => "8c",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        FigureId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| {
            let ids: Vec<&str> = FigureId::ALL.iter().map(|i| i.as_str()).collect();
            HarnessError::Config(format!("unknown figure id `{s}`; expected one of {}", ids.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fidelity {
    /// Short runs and coarse grids, for smoke tests.
    Quick,
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub id: FigureId,
    pub run: RunOutput,
    pub checks: Vec<Check>,
}

impl FigureOutput {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Fixed-parameter set shared by the Glauber run and Figs. 2a-c.
pub fn network_weights(w_ee: f64) -> SynapticWeights {
    SynapticWeights {
        w_ee,
        w_ei: 10.0,
        w_ie: 8.0,
        w_ii: 2.0,
    }
}

pub fn network_params() -> SystemParams {
    SystemParams::full(network_weights(12.0), FiringThresholds { h_e: 1.0, h_i: 3.0 }, 1.0)
}

/// Reduced regulation with `w_ei = 10, w_ii = 6, ρ = .1, θ = .01, |ε| = .01`.
pub fn reduced_regulation(w_ee: bool, w_ie: bool) -> RegulationConfig {
    RegulationConfig {
        w_ee: w_ee.then_some(Rule::new(0.01, 0.01)),
        w_ie: w_ie.then_some(Rule::new(-0.01, 0.01)),
        ..RegulationConfig::free(
            Variant::Reduced,
            FixedParams {
                w_ei: 10.0,
                w_ii: 6.0,
                beta: 1.0,
            },
            0.1,
        )
    }
}

/// Joint `(w_ee, h_E)` regulation of the full system.
pub fn threshold_regulation() -> RegulationConfig {
    RegulationConfig {
        w_ee: Some(Rule::new(0.01, 0.01)),
        h_e: Some(Rule::new(0.001, 0.5)),
        ..RegulationConfig::free(
            Variant::Full,
            FixedParams {
                w_ei: 10.0,
                w_ii: 1.0,
                beta: 1.0,
            },
            0.2,
        )
    }
}

pub const THRESHOLD_REGULATION_W_IE: f64 = 10.0;
pub const THRESHOLD_REGULATION_H_I: f64 = 5.0;

/// Four-parameter regulation with the standard constants.
pub fn standard_regulation() -> RegulationConfig {
    RegulationConfig {
        w_ee: Some(Rule::new(0.01, 0.01)),
        w_ie: Some(Rule::new(-0.005, 0.01)),
        h_e: Some(Rule::new(0.005, 0.5)),
        h_i: Some(Rule::new(0.002, 0.5)),
        ..RegulationConfig::free(
            Variant::Full,
            FixedParams {
                w_ei: 10.0,
                w_ii: 6.0,
                beta: 1.0,
            },
            0.05,
        )
    }
}

/// Standard set with `ε_E = .0051, ε_I = .0046, θ_ee = .011`.
pub fn quasi_periodic_regulation() -> RegulationConfig {
    let mut c = standard_regulation();
    c.w_ee = Some(Rule::new(0.01, 0.011));
    c.h_e = Some(Rule::new(0.0051, 0.5));
    c.h_i = Some(Rule::new(0.0046, 0.5));
    c
}

/// Standard set with `ε_I = ε_E = .005`.
pub fn chaotic_regulation() -> RegulationConfig {
    let mut c = standard_regulation();
    c.h_i = Some(Rule::new(0.005, 0.5));
    c
}

/// Start of the standard runs.
pub fn standard_start(w_ee: f64, w_ie: f64) -> ExtendedState {
    ExtendedState::at_rest(ActivityPoint::new(0.6, 0.55), w_ee, w_ie, FiringThresholds { h_e: 1.0, h_i: 4.5 })
}

/// A state on the chaotic attractor of [`chaotic_regulation`]: the end of a
/// 2e5 time-unit run from `standard_start(12, 8)`.
pub const CHAOTIC_START: ExtendedState = ExtendedState {
    t: 0.0,
    s: 0.878648015506455,
    sigma: 0.8090731849719306,
    s_bar: 0.8821673902144668,
    sigma_bar: 0.8157618380893438,
    w_ee: 12.354985517698285,
    w_ie: 8.815583363100053,
    h_e: 1.7759452631206634,
    h_i: 2.1704461250693976,
};

/// Run length for the post-convergence standard-set runs.
pub const LONG_RUN: f64 = 2e5;

fn quick(f: Fidelity, quick: f64, full: f64) -> f64 {
    match f {
        Fidelity::Quick => quick,
        Fidelity::Full => full,
    }
}

fn run_regulated(cfg: &RegulationConfig, init: ExtendedState, t_end: f64, sample_every: f64) -> Result<Trace, HarnessError> {
    integrate(cfg, init, IntegrationSettings::new(0.01, t_end, sample_every)).map_err(|f| numerical(f.error))
}

/// Largest vertical gap between the two nullclines minimized over `s` in
/// each corner band `0.4 ≤ |s| ≤ 0.5` of the reduced box; zero for curves
/// that touch in both corners.
pub fn corner_gap(params: &SystemParams) -> f64 {
    let n = 20_000;
    let band = |sign: f64| {
        (0..n)
            .map(|i| sign * (0.4 + 0.1 * (i as f64 + 0.5) / n as f64))
            .filter_map(|s| s_nullcline(params, s).ok().map(|g| (g - sigma_on_sigma_nullcline(params, s)).abs()))
            .fold(f64::INFINITY, f64::min)
    };
    band(1.0).max(band(-1.0))
}

fn planar_orbits(params: &SystemParams, starts: &[ActivityPoint], t_end: f64) -> Result<Vec<Vec<(f64, ActivityPoint)>>, HarnessError> {
    starts
        .iter()
        .map(|&p| integrate_planar(params, p, 0.01, t_end, 0.05).map_err(numerical))
        .collect()
}

fn write_orbits(out: &mut Writer, name: &str, orbits: &[Vec<(f64, ActivityPoint)>]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out.create(name)?);
    w.write_record(["orbit", "t", "s", "sigma"])?;
    for (k, o) in orbits.iter().enumerate() {
        for (t, p) in o {
            w.write_record([k.to_string(), t.to_string(), p.s.to_string(), p.sigma.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_nullclines(out: &mut Writer, name: &str, params: &SystemParams) -> Result<(), HarnessError> {
    let (a, b) = crate::plot::nullcline_curves(params);
    let mut w = csv::Writer::from_writer(out.create(name)?);
    w.write_record(["curve", "s", "sigma"])?;
    for (label, pts) in [("s", a), ("sigma", b)] {
        for (s, g) in pts {
            w.write_record([label.to_string(), s.to_string(), g.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn phase_portrait(
    out: &mut Writer,
    stem: &str,
    title: &str,
    params: &SystemParams,
    orbits: &[Vec<(f64, ActivityPoint)>],
) -> Result<(), HarnessError> {
    write_nullclines(out, &format!("{stem}_nullclines.csv"), params)?;
    if !orbits.is_empty() {
        write_orbits(out, &format!("{stem}_orbits.csv"), orbits)?;
    }
    let trajectories: Vec<Vec<ActivityPoint>> = orbits.iter().map(|o| o.iter().map(|(_, p)| *p).collect()).collect();
    out.plot(
        &format!("{stem}.svg"),
        Artifact::PhasePortrait {
            params,
            trajectories: &trajectories,
        },
        title,
    )
}

fn write_traces(out: &mut Writer, stem: &str, traces: &[Trace]) -> Result<(), HarnessError> {
    for (k, tr) in traces.iter().enumerate() {
        let name = if traces.len() == 1 {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", k + 1)
        };
        write_state_csv(&tr.samples, out.create(&name)?)?;
    }
    Ok(())
}

fn weight_paths(out: &mut Writer, name: &str, title: &str, traces: &[Trace]) -> Result<(), HarnessError> {
    let series: Vec<covcrit::svg::Series> = traces
        .iter()
        .enumerate()
        .map(|(k, tr)| covcrit::svg::Series {
            name: format!("start {}", k + 1),
            points: tr.samples.iter().map(|x| (x.w_ee, x.w_ie)).collect(),
        })
        .collect();
    out.text(name, &covcrit::svg::line_plot(&covcrit::svg::Frame::new(title, "w_ee", "w_ie"), &series))
}

fn map_or_partial(r: Result<BifurcationMap, AnalysisError>) -> Result<BifurcationMap, HarnessError> {
    match r {
        Ok(m) => Ok(m),
        Err(AnalysisError::TooManyUnclassified { map, .. }) => Ok(*map),
        Err(e) => Err(numerical(e)),
    }
}

fn s_activity(samples: &[ExtendedState]) -> (Vec<f64>, Vec<f64>) {
    (samples.iter().map(|x| x.t).collect(), samples.iter().map(|x| x.s).collect())
}

/// Runs the scenario for `id` and writes its artifacts into `out_dir`.
pub fn reproduce_figure(id: FigureId, fidelity: Fidelity, out_dir: &Path) -> Result<FigureOutput, HarnessError> {
    let dir: PathBuf = out_dir.to_path_buf();
    let mut out = Writer::new(&dir)?;
    let mut checks = Vec::new();
    let mut manifest = Manifest::new();
    manifest.push("figure", id);
    manifest.push("fidelity", format!("{fidelity:?}"));
    manifest.push("dt", 0.01);

    match id {
        FigureId::F1 => {
            let seed = 1;
            manifest.push("seed", seed);
            let cfg = GlauberConfig::new(70, network_params(), seed, 60.0);
            let tr = simulate(&cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
            tr.write_csv(out.create("fig1_network.csv")?)?;
            out.plot("fig1_network.svg", Artifact::Network(&tr), "Glauber network, N = 70")?;
            let var = covcrit::analysis::timeseries::variance(&tr.mean_e);
            let crossings = crossings_with_hysteresis(&tr.times, &tr.mean_e, 0.5, 0.1);
            checks.push(Check::new("oscillation", var > 0.05 && crossings >= 10, format!("var {var:.4}, {crossings} crossings of 0.5")));
        }
        FigureId::F2a | FigureId::F2b | FigureId::F2c => {
            let w_ee = match id {
                FigureId::F2a => 12.0,
                FigureId::F2b => saddlenode_wee(10.0, 2.0, 8.0, 1.0).map_err(numerical)?.w_ee,
                _ => 15.0,
            };
            let params = SystemParams::reduced(network_weights(w_ee), 1.0);
            manifest.push("w_ee", w_ee);
            let starts = [
                ActivityPoint::new(0.01, 0.0),
                ActivityPoint::new(0.45, 0.45),
                ActivityPoint::new(-0.45, 0.2),
                ActivityPoint::new(0.3, -0.45),
            ];
            let orbits = if id == FigureId::F2b { Vec::new() } else { planar_orbits(&params, &starts, 60.0)? };
            let stem = format!("fig{id}");
            phase_portrait(&mut out, &stem, &format!("w_ee = {w_ee:.2}"), &params, &orbits)?;
            let n = find_fixed_points(&params);
            match id {
                FigureId::F2a => checks.push(Check::new("one fixed point", n.len() == 1, format!("{}", n.len()))),
                FigureId::F2b => {
                    let gap = corner_gap(&params);
                    checks.push(Check::new("corner tangency", gap < 1e-3, format!("gap {gap:.2e}")));
                }
                _ => {
                    let stable = n.iter().filter(|f| f.is_stable()).count();
                    checks.push(Check::new("5 fixed points, 2 stable", n.len() == 5 && stable == 2, format!("{} / {stable}", n.len())));
                }
            }
        }
        FigureId::F3a => {
            let cells = if fidelity == Fidelity::Quick { 12 } else { 40 };
            let map = map_or_partial(scan_region_map(
                Axis::new(ScanParameter::WEe, 0.0, 20.0, cells),
                Axis::new(ScanParameter::WIe, 0.0, 20.0, cells),
                &reduced_base(10.0, 2.0, 1.0),
                &DetectionSettings::default(),
            ))?;
            map.write_csv(out.create("fig3a_region_map.csv")?)?;
            out.plot("fig3a_region_map.svg", Artifact::Map(&map), "(w_ee, w_ie) plane, w_ei = 10, w_ii = 2")?;
            let present = [RegionLabel::O, RegionLabel::P, RegionLabel::T].iter().all(|&l| map.count(l) > 0);
            checks.push(Check::new("O, P, T present", present, String::new()));
            let uf = map.unclassified_fraction();
            checks.push(Check::new("unclassified <= 5%", uf <= 0.05, format!("{uf:.3}")));
        }
        FigureId::F3b => {
            let n = if fidelity == Fidelity::Quick { 8 } else { 57 };
            let fixed = FixedParams {
                w_ei: 10.0,
                w_ii: 2.0,
                beta: 1.0,
            };
            let settings = ProfileSettings {
                t_transient: quick(fidelity, 200.0, 1000.0),
                t_measure: quick(fidelity, 200.0, 500.0),
                ..ProfileSettings::default()
            };
            let mut lines = Vec::new();
            for w_ie in [5.0, 8.0, 12.0, 20.0] {
                let line = ProfileLine::linspace(w_ie, 4.0, 18.0, n);
                lines.push((w_ie, covcrit::analysis::covariance_profile(&line, &fixed, &settings).map_err(numerical)?));
            }
            write_profile_csv(out.create("fig3b_profile.csv")?, &lines)?;
            out.plot("fig3b_profile.svg", Artifact::Profiles(&lines), "averaged covariance c_ee")?;
            let peak = lines.iter().flat_map(|(_, p)| p.iter().map(|q| q.c_ee)).fold(0.0, f64::max);
            checks.push(Check::new("covariance positive in P", peak > 1e-3, format!("peak {peak:.4}")));
        }
        FigureId::F4a | FigureId::F4b | FigureId::F4c => {
            let (cfg, starts, t_end): (RegulationConfig, Vec<(f64, f64)>, f64) = match id {
                FigureId::F4a => (reduced_regulation(true, false), vec![(12.0, 15.0), (15.0, 15.0), (13.0, 10.0), (15.0, 10.0)], 20_000.0),
                FigureId::F4b => (reduced_regulation(false, true), vec![(14.0, 20.0), (14.0, 10.0), (13.5, 8.0), (14.6, 12.0)], 20_000.0),
                _ => (reduced_regulation(true, true), vec![(12.0, 15.0), (15.0, 12.0), (13.0, 20.0)], 2e6),
            };
            let t_end = quick(fidelity, t_end.min(5000.0), t_end);
            let mut traces = Vec::new();
            for &(w_ee, w_ie) in &starts {
                let init = ExtendedState::at_rest(ActivityPoint::new(0.1, 0.05), w_ee, w_ie, FiringThresholds::default());
                traces.push(run_regulated(&cfg, init, t_end, (t_end / 20_000.0).max(0.5))?);
            }
            let stem = format!("fig{id}");
            write_traces(&mut out, &stem, &traces)?;
            weight_paths(&mut out, &format!("{stem}_weights.svg"), "regulated (w_ee, w_ie)", &traces)?;
            match id {
                FigureId::F4a => {
                    for (tr, (w0, w_ie)) in traces.iter().zip(&starts) {
                        let sn = saddlenode_wee(10.0, 6.0, *w_ie, 1.0).map_err(numerical)?.w_ee;
                        let end = tr.last().unwrap().w_ee;
                        checks.push(Check::new(
                            &format!("start {w0}: near saddlenode"),
                            fidelity == Fidelity::Quick || (end - sn).abs() < 0.2,
                            format!("w_ee {end:.3} vs {sn:.3}"),
                        ));
                    }
                }
                FigureId::F4b => {
                    let last = traces.last().unwrap().last().unwrap().w_ie;
                    checks.push(Check::new("right of asymptote diverges", last > starts[3].1, format!("w_ie {last:.3}")));
                }
                _ => {
                    let end = traces[0].last().unwrap();
                    let p = SystemParams::reduced(end.weights(&cfg.fixed), 1.0);
                    let m = nullcline_overlap_metric(&p).map_err(numerical)?;
                    manifest.push("g_w_ee", end.w_ee);
                    manifest.push("g_w_ie", end.w_ie);
                    checks.push(Check::new("nullcline overlap at G", fidelity == Fidelity::Quick || m < 0.02, format!("{m:.4}")));
                }
            }
        }
        FigureId::F5 => {
            let cfg = reduced_regulation(true, true);
            let init = ExtendedState::at_rest(ActivityPoint::new(0.1, 0.05), 12.0, 15.0, FiringThresholds::default());
            let tr = run_regulated(&cfg, init, quick(fidelity, 5000.0, 2e6), 100.0)?;
            let g = tr.last().unwrap();
            let params = SystemParams::reduced(g.weights(&cfg.fixed), 1.0);
            manifest.push("g_w_ee", g.w_ee);
            manifest.push("g_w_ie", g.w_ie);
            phase_portrait(&mut out, "fig5", &format!("G = ({:.3}, {:.3})", g.w_ee, g.w_ie), &params, &[])?;
            let m = nullcline_overlap_metric(&params).map_err(numerical)?;
            checks.push(Check::new("nullcline overlap", fidelity == Fidelity::Quick || m < 0.02, format!("{m:.4}")));
        }
        FigureId::F6a => {
            let cells = if fidelity == Fidelity::Quick { 12 } else { 40 };
            let base = full_base(
                SynapticWeights::new(10.0, 10.0, THRESHOLD_REGULATION_W_IE, 1.0).map_err(numerical)?,
                FiringThresholds {
                    h_e: 0.0,
                    h_i: THRESHOLD_REGULATION_H_I,
                },
                1.0,
            );
            let map = map_or_partial(scan_region_map(
                Axis::new(ScanParameter::WEe, 0.0, 25.0, cells),
                Axis::new(ScanParameter::HE, -4.0, 8.0, cells),
                &base,
                &DetectionSettings::default(),
            ))?;
            map.write_csv(out.create("fig6a_region_map.csv")?)?;
            out.plot("fig6a_region_map.svg", Artifact::Map(&map), "(w_ee, h_E) plane")?;
            let present = [RegionLabel::P, RegionLabel::T, RegionLabel::Oh, RegionLabel::Ol]
                .iter()
                .all(|&l| map.count(l) > 0);
            checks.push(Check::new("P, T, O_h, O_l present", present, String::new()));
        }
        FigureId::F6b | FigureId::F6c => {
            let cfg = threshold_regulation();
            let starts: &[(f64, f64)] = if id == FigureId::F6b { &[(8.0, 0.0), (20.0, 4.0), (16.0, -1.0)] } else { &[(16.0, -1.0)] };
            let t_end = quick(fidelity, 5000.0, 100_000.0);
            let mut traces = Vec::new();
            for &(w_ee, h_e) in starts {
                let init = ExtendedState::at_rest(
                    ActivityPoint::new(0.6, 0.55),
                    w_ee,
                    THRESHOLD_REGULATION_W_IE,
                    FiringThresholds {
                        h_e,
                        h_i: THRESHOLD_REGULATION_H_I,
                    },
                );
                traces.push(run_regulated(&cfg, init, t_end, 1.0)?);
            }
            let ends: Vec<ExtendedState> = traces.iter().map(|t| *t.last().unwrap()).collect();
            if id == FigureId::F6b {
                write_traces(&mut out, "fig6b", &traces)?;
                let series: Vec<covcrit::svg::Series> = traces
                    .iter()
                    .enumerate()
                    .map(|(k, tr)| covcrit::svg::Series {
                        name: format!("start {}", k + 1),
                        points: tr.samples.iter().map(|x| (x.w_ee, x.h_e)).collect(),
                    })
                    .collect();
                out.text(
                    "fig6b_path.svg",
                    &covcrit::svg::line_plot(&covcrit::svg::Frame::new("regulated (w_ee, h_E)", "w_ee", "h_E"), &series),
                )?;
                let diam = ends
                    .iter()
                    .flat_map(|a| ends.iter().map(move |b| (a.w_ee - b.w_ee).hypot(a.h_e - b.h_e)))
                    .fold(0.0, f64::max);
                checks.push(Check::new("common end point", fidelity == Fidelity::Quick || diam < 0.3, format!("diameter {diam:.3}")));
            } else {
                let f = ends[0];
                let params = f.system(&cfg);
                manifest.push("f_w_ee", f.w_ee);
                manifest.push("f_h_e", f.h_e);
                write_traces(&mut out, "fig6c_run", &traces)?;
                phase_portrait(&mut out, "fig6c", &format!("F = ({:.3}, {:.3})", f.w_ee, f.h_e), &params, &[])?;
                let tail = traces[0].tail(t_end * 0.8);
                let ms = mean(&tail.iter().map(|x| x.s).collect::<Vec<_>>());
                checks.push(Check::new("mean s near 0.5", fidelity == Fidelity::Quick || (ms - 0.5).abs() < 0.05, format!("{ms:.3}")));
            }
        }
        FigureId::F7 => {
            let cfg = standard_regulation();
            let t_end = quick(fidelity, 5000.0, 6e5);
            let mut traces = Vec::new();
            for (w_ee, w_ie) in [(12.0, 15.0), (12.0, 20.0), (16.0, 12.0)] {
                traces.push(run_regulated(&cfg, standard_start(w_ee, w_ie), t_end, 5.0)?);
            }
            write_traces(&mut out, "fig7", &traces)?;
            weight_paths(&mut out, "fig7_weights.svg", "four-parameter regulation", &traces)?;
            checks.push(Check::new("runs complete", true, String::new()));
        }
        FigureId::F8a | FigureId::F8b | FigureId::F8c => {
            let (cfg, init, t_end) = match id {
                FigureId::F8a => (standard_regulation(), standard_start(12.0, 15.0), 6e5),
                FigureId::F8b => (quasi_periodic_regulation(), standard_start(12.0, 15.0), 6e5),
                _ => (chaotic_regulation(), CHAOTIC_START, LONG_RUN),
            };
            let t_end = quick(fidelity, 5000.0, t_end);
            let tr = run_regulated(&cfg, init, t_end, 0.5)?;
            // the last third is past the transient in the standard runs
            let tail = if id == FigureId::F8c { &tr.samples[..] } else { tr.tail(t_end * 2.0 / 3.0) };
            let stem = format!("fig{id}");
            write_state_csv(tail, out.create(&format!("{stem}.csv"))?)?;
            out.text(&format!("{stem}.meta"), &tr.metadata_text())?;
            out.plot(&format!("{stem}.svg"), Artifact::Activity(tail), "s(t)")?;
            let (t, s) = s_activity(tail);
            let period = detect_period(&t, &s, 0.01, 50);
            let episodes = phase_episodes(&t, &s, PhaseThresholds::default());
            let durations: Vec<f64> = episodes.iter().map(|e| e.end - e.start).collect();
            let cv = if durations.len() > 2 { coefficient_of_variation(&durations) } else { 0.0 };
            manifest.push("period", period.map_or("none".to_string(), |p| p.period.to_string()));
            manifest.push("episodes", episodes.len());
            match id {
                FigureId::F8a => {
                    let ok = period.is_some_and(|p| p.cv < 0.01);
                    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.w_ee), b.max(x.w_ee)));
                    checks.push(Check::new("simple periodic", fidelity == Fidelity::Quick || ok, format!("{period:?}")));
                    checks.push(Check::new("small w_ee amplitude", fidelity == Fidelity::Quick || hi - lo < 0.5, format!("{:.3}", hi - lo)));
                }
                FigureId::F8b => checks.push(Check::new("runs complete", true, format!("{period:?}"))),
                _ => {
                    checks.push(Check::new("aperiodic", period.is_none(), format!("{period:?}")));
                    checks.push(Check::new(
                        "irregular transitions",
                        fidelity == Fidelity::Quick || (episodes.len() > 10 && cv > 0.05),
                        format!("{} episodes, duration cv {cv:.3}", episodes.len()),
                    ));
                }
            }
        }
    }
    for c in &checks {
        manifest.push("check", format!("{} {} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail));
    }
    let run = out.finish(manifest)?;
    Ok(FigureOutput { id, run, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.as_str().parse::<FigureId>().unwrap(), id);
        }
        assert!("9".parse::<FigureId>().is_err());
        assert_eq!("2B".parse::<FigureId>().unwrap(), FigureId::F2b);
    }

    #[test]
    fn corner_gap_is_small_only_at_the_tangency() {
        let sn = saddlenode_wee(10.0, 2.0, 8.0, 1.0).unwrap().w_ee;
        let at = corner_gap(&SystemParams::reduced(network_weights(sn), 1.0));
        let below = corner_gap(&SystemParams::reduced(network_weights(12.0), 1.0));
        assert!(at < 1e-3, "{at}");
        assert!(below > 1e-3, "{below}");
    }

    #[test]
    fn regulation_presets_validate() {
        for c in [
            reduced_regulation(true, true),
            threshold_regulation(),
            standard_regulation(),
            quasi_periodic_regulation(),
            chaotic_regulation(),
        ] {
            c.validate().unwrap();
        }
    }
}
