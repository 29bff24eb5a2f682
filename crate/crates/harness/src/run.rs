//! Executes one [`ScenarioConfig`] and writes its artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use covcrit::analysis::{covariance_profile, find_fixed_points, scan_region_map, AnalysisError, ProfilePoint};
use covcrit::evolution::{integrate, integrate_planar, ExtendedState};
use covcrit::glauber::{simulate, GlauberConfig};
use covcrit::{ActivityPoint, FiringThresholds, Variant};

use crate::config::{Kind, ScenarioConfig};
use crate::manifest::{config_hash, Manifest};
use crate::plot::{write_plot, Artifact};
use crate::HarnessError;

/// Files written by a run, relative paths inside the output directory.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub manifest: Manifest,
}

pub(crate) struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    pub(crate) fn new(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub(crate) fn create(&mut self, name: &str) -> Result<BufWriter<File>, HarnessError> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    pub(crate) fn text(&mut self, name: &str, text: &str) -> Result<(), HarnessError> {
        self.create(name)?.write_all(text.as_bytes())?;
        Ok(())
    }

    pub(crate) fn plot(&mut self, name: &str, artifact: Artifact<'_>, title: &str) -> Result<(), HarnessError> {
        self.files.push(name.to_string());
        write_plot(artifact, title, &self.dir.join(name))?;
        Ok(())
    }

    pub(crate) fn finish(mut self, mut manifest: Manifest) -> Result<RunOutput, HarnessError> {
        for f in &self.files {
            manifest.push("output", f);
        }
        manifest.write(&self.dir)?;
        self.files.push(crate::manifest::FILE_NAME.to_string());
        Ok(RunOutput {
            dir: self.dir,
            files: self.files,
            manifest,
        })
    }
}

pub(crate) fn numerical(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Numerical(e.to_string())
}

pub(crate) fn write_planar_csv(out: impl Write, samples: &[(f64, ActivityPoint)]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "s", "sigma"])?;
    for (t, p) in samples {
        w.write_record([t.to_string(), p.s.to_string(), p.sigma.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_profile_csv(out: impl Write, lines: &[(f64, Vec<ProfilePoint>)]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["w_ie", "w_ee", "c_ee", "c_ie"])?;
    for (w_ie, pts) in lines {
        for p in pts {
            w.write_record([w_ie.to_string(), p.w_ee.to_string(), p.c_ee.to_string(), p.c_ie.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// The initial extended state of a `regulate` scenario.
pub fn regulated_start(cfg: &ScenarioConfig) -> ExtendedState {
    let p = &cfg.params;
    let th = FiringThresholds {
        h_e: p.h_e.unwrap_or(0.0),
        h_i: p.h_i.unwrap_or(0.0),
    };
    ExtendedState::at_rest(cfg.initial_point(), p.w_ee, p.w_ie, th)
}

/// Runs the scenario and writes its CSV, SVG, `config.toml` and manifest
/// into `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let canonical = cfg.to_toml();
    let mut manifest = Manifest::new();
    manifest.push("kind", format!("{:?}", cfg.kind));
    // where the outputs go does not change what is computed
    let hashed = ScenarioConfig {
        output_dir: PathBuf::new(),
        ..cfg.clone()
    };
    manifest.push("config_hash", config_hash(&hashed.to_toml()));
    manifest.push("seed", cfg.seed);
    if let Some(s) = cfg.integration {
        manifest.push("dt", s.dt);
    }
    let mut out = Writer::new(&cfg.output_dir)?;
    out.text("config.toml", &canonical)?;
    let params = cfg.system_params()?;

    match cfg.kind {
        Kind::Simulate => {
            let net = cfg.network.as_ref().expect("validated");
            let int = cfg.integration()?;
            let gc = GlauberConfig {
                sample_every: net.sample_every,
                initial: net.initial.clone(),
                ..GlauberConfig::new(net.n, params, cfg.seed, int.t_end)
            };
            let trace = simulate(&gc).map_err(|e| HarnessError::Config(e.to_string()))?;
            trace.write_csv(out.create("network.csv")?)?;
            out.plot("network.svg", Artifact::Network(&trace), &format!("Glauber network, N = {}", net.n))?;
        }
        Kind::Meanfield => {
            let int = cfg.integration()?;
            let samples =
                integrate_planar(&params, cfg.initial_point(), int.dt, int.t_end, int.sample_every).map_err(numerical)?;
            write_planar_csv(out.create("trajectory.csv")?, &samples)?;
            let orbit: Vec<ActivityPoint> = samples.iter().map(|(_, p)| *p).collect();
            out.plot(
                "phase_plane.svg",
                Artifact::PhasePortrait {
                    params: &params,
                    trajectories: &[orbit],
                },
                "trajectory and nullclines",
            )?;
        }
        Kind::Regulate => {
            let rc = cfg.regulation_config()?;
            let trace = integrate(&rc, regulated_start(cfg), cfg.integration()?);
            let (trace, failure) = match trace {
                Ok(t) => (t, None),
                Err(f) => (f.partial, Some(f.error)),
            };
            trace.write_csv(out.create("trace.csv")?)?;
            out.text("trace.meta", &trace.metadata_text())?;
            out.plot("activity.svg", Artifact::Activity(&trace.samples), "activity")?;
            out.plot("parameters.svg", Artifact::Parameters(&trace.samples), "regulated parameters")?;
            if cfg.variant == Variant::Reduced {
                out.plot("weight_path.svg", Artifact::WeightPath(&trace.samples), "weight path")?;
            }
            manifest.push("run_id", &trace.metadata.run_id);
            if let Some(e) = failure {
                out.finish(manifest)?;
                return Err(numerical(e));
            }
        }
        Kind::FixedPoints => {
            let fps = find_fixed_points(&params);
            let mut w = csv::Writer::from_writer(out.create("fixed_points.csv")?);
            w.write_record(["s", "sigma", "class", "trace", "determinant"])?;
            for fp in &fps {
                w.write_record([
                    fp.location.s.to_string(),
                    fp.location.sigma.to_string(),
                    format!("{:?}", fp.stability.class),
                    fp.stability.trace().to_string(),
                    fp.stability.determinant().to_string(),
                ])?;
            }
            w.flush()?;
            drop(w);
            out.plot(
                "nullclines.svg",
                Artifact::PhasePortrait {
                    params: &params,
                    trajectories: &[],
                },
                &format!("{} fixed points", fps.len()),
            )?;
            manifest.push("fixed_points", fps.len());
        }
        Kind::Scan => {
            let scan = cfg.scan.as_ref().expect("validated");
            let settings = cfg.detection_settings().expect("validated");
            let (map, err) = match scan_region_map(scan.x, scan.y, &params, &settings) {
                Ok(m) => (m, None),
                Err(AnalysisError::TooManyUnclassified { unclassified, cells, map }) => {
                    (*map, Some(format!("{unclassified} of {cells} cells unclassified")))
                }
                Err(e) => return Err(HarnessError::Config(e.to_string())),
            };
            map.write_csv(out.create("region_map.csv")?)?;
            out.plot("region_map.svg", Artifact::Map(&map), "region map")?;
            manifest.push("unclassified_fraction", map.unclassified_fraction());
            if let Some(e) = err {
                out.finish(manifest)?;
                return Err(HarnessError::Numerical(e));
            }
        }
        Kind::Profile => {
            let prof = cfg.profile.as_ref().expect("validated");
            let mut lines = Vec::new();
            for line in &prof.lines {
                let pts = covariance_profile(line, &cfg.fixed_params(), &prof.settings).map_err(numerical)?;
                lines.push((line.w_ie, pts));
            }
            write_profile_csv(out.create("profile.csv")?, &lines)?;
            out.plot("profile.svg", Artifact::Profiles(&lines), "covariance profile")?;
        }
    }
    out.finish(manifest)
}
