//! SVG rendering of run artifacts, and the `plot` verb's CSV reader.

use std::path::Path;

use covcrit::analysis::{BifurcationMap, ProfilePoint};
use covcrit::dynamics::{s_nullcline, sigma_nullcline};
use covcrit::evolution::ExtendedState;
use covcrit::glauber::PopulationTrace;
use covcrit::svg::{self, Frame, Series};
use covcrit::{ActivityPoint, SystemParams};

use crate::HarnessError;

/// Something that can be drawn.
#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    /// `s` and `σ` against time.
    Activity(&'a [ExtendedState]),
    /// Projection of a regulated trace on the (w_ee, w_ie) plane.
    WeightPath(&'a [ExtendedState]),
    /// Regulated parameters against time.
    Parameters(&'a [ExtendedState]),
    /// Network population means against time.
    Network(&'a PopulationTrace),
    /// Both nullclines and any number of trajectories.
    PhasePortrait {
        params: &'a SystemParams,
        trajectories: &'a [Vec<ActivityPoint>],
    },
    Map(&'a BifurcationMap),
    /// One profile per `w_ie` line.
    Profiles(&'a [(f64, Vec<ProfilePoint>)]),
}

const NULLCLINE_POINTS: usize = 600;
const EDGE: f64 = 1e-6;

/// Points `(s, σ)` of the s-nullcline and of the σ-nullcline, sampled
/// inside the open box. Samples where a nullcline is undefined are skipped.
pub fn nullcline_curves(params: &SystemParams) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let (lo, hi) = params.variant().activity_bounds();
    let xs: Vec<f64> = (0..NULLCLINE_POINTS)
        .map(|i| lo + EDGE + (hi - lo - 2.0 * EDGE) * i as f64 / (NULLCLINE_POINTS - 1) as f64)
        .collect();
    let s_curve = xs
        .iter()
        .filter_map(|&s| s_nullcline(params, s).ok().map(|g| (s, g)))
        .collect();
    let sigma_curve = xs
        .iter()
        .filter_map(|&g| sigma_nullcline(params, g).ok().map(|s| (s, g)))
        .collect();
    (s_curve, sigma_curve)
}

fn series(name: &str, points: Vec<(f64, f64)>) -> Series {
    Series {
        name: name.into(),
        points,
    }
}

/// Renders `artifact` as a standalone SVG document.
pub fn emit_plot(artifact: Artifact<'_>, title: &str) -> String {
    match artifact {
        Artifact::Activity(xs) => svg::line_plot(
            &Frame::new(title, "t", "activity"),
            &[
                series("s", xs.iter().map(|x| (x.t, x.s)).collect()),
                series("σ", xs.iter().map(|x| (x.t, x.sigma)).collect()),
            ],
        ),
        Artifact::WeightPath(xs) => svg::line_plot(
            &Frame::new(title, "w_ee", "w_ie"),
            &[series("(w_ee, w_ie)", xs.iter().map(|x| (x.w_ee, x.w_ie)).collect())],
        ),
        Artifact::Parameters(xs) => svg::line_plot(
            &Frame::new(title, "t", "parameter"),
            &[
                series("w_ee", xs.iter().map(|x| (x.t, x.w_ee)).collect()),
                series("w_ie", xs.iter().map(|x| (x.t, x.w_ie)).collect()),
                series("h_e", xs.iter().map(|x| (x.t, x.h_e)).collect()),
                series("h_i", xs.iter().map(|x| (x.t, x.h_i)).collect()),
            ],
        ),
        Artifact::Network(tr) => svg::line_plot(
            &Frame::new(title, "t", "mean activity").with_ranges(
                (tr.times.first().copied().unwrap_or(0.0), tr.times.last().copied().unwrap_or(1.0).max(1e-9)),
                (0.0, 1.0),
            ),
            &[
                series("E", tr.times.iter().copied().zip(tr.mean_e.iter().copied()).collect()),
                series("I", tr.times.iter().copied().zip(tr.mean_i.iter().copied()).collect()),
            ],
        ),
        Artifact::PhasePortrait { params, trajectories } => {
            let (lo, hi) = params.variant().activity_bounds();
            let (a, b) = nullcline_curves(params);
            let mut all = vec![series("ds/dt = 0", a), series("dσ/dt = 0", b)];
            for (k, tr) in trajectories.iter().enumerate() {
                all.push(series(&format!("orbit {}", k + 1), tr.iter().map(|p| (p.s, p.sigma)).collect()));
            }
            svg::line_plot(&Frame::new(title, "s", "σ").with_ranges((lo, hi), (lo, hi)), &all)
        }
        Artifact::Map(map) => map.to_svg(title),
        Artifact::Profiles(lines) => {
            let all: Vec<Series> = lines
                .iter()
                .map(|(w_ie, pts)| series(&format!("w_ie = {w_ie}"), pts.iter().map(|p| (p.w_ee, p.c_ee)).collect()))
                .collect();
            svg::line_plot(&Frame::new(title, "w_ee", "mean c_ee"), &all)
        }
    }
}

pub fn write_plot(artifact: Artifact<'_>, title: &str, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, emit_plot(artifact, title))
}

/// Renders a CSV written by this tool. The artifact kind is recognized from
/// the header row.
pub fn plot_csv(path: &Path) -> Result<String, HarnessError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let title = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
    let num = |r: &csv::StringRecord, i: usize| -> Result<f64, HarnessError> {
        r.get(i)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| HarnessError::UnsupportedPlot(format!("{}: bad number in column {i}", path.display())))
    };
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    match cols.as_slice() {
        ["t", "s", "sigma", "s_bar", "sigma_bar", "w_ee", "w_ie", "h_e", "h_i"] => {
            let mut xs = Vec::with_capacity(rows.len());
            for r in &rows {
                xs.push(ExtendedState {
                    t: num(r, 0)?,
                    s: num(r, 1)?,
                    sigma: num(r, 2)?,
                    s_bar: num(r, 3)?,
                    sigma_bar: num(r, 4)?,
                    w_ee: num(r, 5)?,
                    w_ie: num(r, 6)?,
                    h_e: num(r, 7)?,
                    h_i: num(r, 8)?,
                });
            }
            Ok(emit_plot(Artifact::Activity(&xs), &title))
        }
        ["t", "s", "sigma"] => {
            let mut xs = Vec::with_capacity(rows.len());
            for r in &rows {
                let (t, s, sigma) = (num(r, 0)?, num(r, 1)?, num(r, 2)?);
                xs.push(ExtendedState {
                    t,
                    s,
                    sigma,
                    ..Default::default()
                });
            }
            Ok(svg::line_plot(
                &Frame::new(&title, "t", "activity"),
                &[
                    series("s", xs.iter().map(|x| (x.t, x.s)).collect()),
                    series("σ", xs.iter().map(|x| (x.t, x.sigma)).collect()),
                ],
            ))
        }
        ["t", "mean_e", "mean_i"] => {
            let mut tr = PopulationTrace::default();
            for r in &rows {
                tr.times.push(num(r, 0)?);
                tr.mean_e.push(num(r, 1)?);
                tr.mean_i.push(num(r, 2)?);
            }
            Ok(emit_plot(Artifact::Network(&tr), &title))
        }
        ["param1", "param2", "label"] => {
            let mut labels: Vec<String> = Vec::new();
            let mut xs: Vec<f64> = Vec::new();
            let mut ys: Vec<f64> = Vec::new();
            let mut cells = Vec::with_capacity(rows.len());
            for r in &rows {
                let (x, y) = (num(r, 0)?, num(r, 1)?);
                let l = r.get(2).unwrap_or("").to_string();
                let k = labels.iter().position(|m| *m == l).unwrap_or_else(|| {
                    labels.push(l);
                    labels.len() - 1
                });
                if !xs.contains(&x) {
                    xs.push(x);
                }
                if !ys.contains(&y) {
                    ys.push(y);
                }
                cells.push((x, y, k));
            }
            let (nx, ny) = (xs.len(), ys.len());
            if nx * ny != cells.len() || nx < 2 || ny < 2 {
                return Err(HarnessError::UnsupportedPlot(format!("{}: not a full grid", path.display())));
            }
            let mut grid = vec![vec![0usize; ny]; nx];
            for (x, y, k) in cells {
                let i = xs.iter().position(|&v| v == x).unwrap();
                let j = ys.iter().position(|&v| v == y).unwrap();
                grid[i][j] = k;
            }
            let (dx, dy) = ((xs[1] - xs[0]) / 2.0, (ys[1] - ys[0]) / 2.0);
            let legend: Vec<&str> = labels.iter().map(String::as_str).collect();
            Ok(svg::heat_map(
                &title,
                ("param1", xs[0] - dx, xs[nx - 1] + dx),
                ("param2", ys[0] - dy, ys[ny - 1] + dy),
                &grid,
                &legend,
            ))
        }
        ["w_ie", "w_ee", "c_ee", "c_ie"] => {
            let mut lines: Vec<(f64, Vec<ProfilePoint>)> = Vec::new();
            for r in &rows {
                let w_ie = num(r, 0)?;
                let p = ProfilePoint {
                    w_ee: num(r, 1)?,
                    c_ee: num(r, 2)?,
                    c_ie: num(r, 3)?,
                };
                match lines.iter_mut().find(|(w, _)| *w == w_ie) {
                    Some((_, v)) => v.push(p),
                    None => lines.push((w_ie, vec![p])),
                }
            }
            Ok(emit_plot(Artifact::Profiles(&lines), &title))
        }
        _ => Err(HarnessError::UnsupportedPlot(format!(
            "{}: unrecognized header {:?}",
            path.display(),
            header
        ))),
    }
}
