//! Scenario files: a strict TOML schema plus `key=value` overrides.
//!
//! Precedence, lowest first: built-in defaults for the verb, the config
//! file, `--set key=value` overrides, then dedicated flags such as `--out`.

use std::path::{Path, PathBuf};

use covcrit::analysis::{Axis, DetectionSettings, InitGrid, ProfileLine, ProfileSettings, ScanParameter};
use covcrit::evolution::{FixedParams, IntegrationSettings, RegulationConfig, Rule};
use covcrit::glauber::InitialState;
use covcrit::{ActivityPoint, FiringThresholds, SynapticWeights, SystemParams, Variant};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Finite-N Glauber network.
    Simulate,
    /// Planar mean-field trajectory with frozen parameters.
    Meanfield,
    /// Coupled activity and plasticity.
    Regulate,
    FixedPoints,
    Scan,
    Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub w_ee: f64,
    pub w_ei: f64,
    pub w_ie: f64,
    pub w_ii: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_i: Option<f64>,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulationSection {
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ee: Option<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ie: Option<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_e: Option<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_i: Option<Rule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n: usize,
    #[serde(default = "glauber_sample_every")]
    pub sample_every: f64,
    #[serde(default)]
    pub initial: InitialState,
}

fn glauber_sample_every() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub x: Axis,
    pub y: Axis,
    #[serde(default = "default_grid")]
    pub grid: InitGrid,
    #[serde(default = "default_half_window")]
    pub t_transient: f64,
    #[serde(default = "default_half_window")]
    pub t_measure: f64,
}

fn default_grid() -> InitGrid {
    InitGrid::Default
}

fn default_half_window() -> f64 {
    500.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub lines: Vec<ProfileLine>,
    #[serde(default)]
    pub settings: ProfileSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub variant: Variant,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<ActivityPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regulation: Option<RegulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSection>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn config_error(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ScenarioConfig {
    /// Parses TOML text, applying `overrides` (`dotted.key=value`) first.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: ScenarioConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides).map_err(|e| match e {
            HarnessError::Config(m) => config_error(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Canonical TOML text; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Built-in starting point for a verb run without a config file.
    pub fn default_for(kind: Kind) -> Self {
        let reduced_fig = ParamsSection {
            w_ee: 12.0,
            w_ei: 10.0,
            w_ie: 8.0,
            w_ii: 2.0,
            h_e: None,
            h_i: None,
            beta: 1.0,
        };
        let full_fig = ParamsSection {
            h_e: Some(1.0),
            h_i: Some(3.0),
            ..reduced_fig.clone()
        };
        let base = ScenarioConfig {
            kind,
            variant: Variant::Reduced,
            output_dir: default_output_dir(),
            seed: 0,
            params: reduced_fig,
            integration: None,
            initial: None,
            regulation: None,
            network: None,
            scan: None,
            profile: None,
        };
        match kind {
            Kind::Simulate => ScenarioConfig {
                variant: Variant::Full,
                params: full_fig,
                seed: 1,
                integration: Some(IntegrationSettings::new(0.01, 60.0, 0.05)),
                network: Some(NetworkSection {
                    n: 70,
                    sample_every: 0.05,
                    initial: InitialState::Random,
                }),
                ..base
            },
            Kind::Meanfield => ScenarioConfig {
                integration: Some(IntegrationSettings::new(0.01, 100.0, 0.05)),
                initial: Some(ActivityPoint::new(0.1, 0.05)),
                ..base
            },
            Kind::Regulate => ScenarioConfig {
                params: ParamsSection {
                    w_ee: 12.0,
                    w_ie: 15.0,
                    w_ii: 6.0,
                    ..base.params.clone()
                },
                integration: Some(IntegrationSettings::new(0.01, 20_000.0, 1.0)),
                initial: Some(ActivityPoint::new(0.1, 0.05)),
                regulation: Some(RegulationSection {
                    rho: 0.1,
                    w_ee: Some(Rule::new(0.01, 0.01)),
                    w_ie: None,
                    h_e: None,
                    h_i: None,
                }),
                ..base
            },
            Kind::FixedPoints => base,
            Kind::Scan => ScenarioConfig {
                scan: Some(ScanSection {
                    x: Axis::new(ScanParameter::WEe, 0.0, 20.0, 40),
                    y: Axis::new(ScanParameter::WIe, 0.0, 20.0, 40),
                    grid: InitGrid::Default,
                    t_transient: 500.0,
                    t_measure: 500.0,
                }),
                ..base
            },
            Kind::Profile => ScenarioConfig {
                profile: Some(ProfileSection {
                    lines: vec![ProfileLine::linspace(8.0, 4.0, 16.0, 49)],
                    settings: ProfileSettings::default(),
                }),
                ..base
            },
        }
    }

    pub fn system_params(&self) -> Result<SystemParams, HarnessError> {
        let p = &self.params;
        let w = SynapticWeights::new(p.w_ee, p.w_ei, p.w_ie, p.w_ii).map_err(|e| config_error(format!("params: {e}")))?;
        let sp = match (self.variant, p.h_e, p.h_i) {
            (Variant::Full, Some(h_e), Some(h_i)) => SystemParams::full(w, FiringThresholds { h_e, h_i }, p.beta),
            (Variant::Full, _, _) => return Err(config_error("params.h_e and params.h_i are required for variant = \"full\"")),
            (Variant::Reduced, None, None) => SystemParams::reduced(w, p.beta),
            (Variant::Reduced, _, _) => {
                return Err(config_error("params.h_e / params.h_i are not allowed for variant = \"reduced\""))
            }
        };
        sp.validate().map_err(|e| config_error(format!("params: {e}")))?;
        Ok(sp)
    }

    pub fn fixed_params(&self) -> FixedParams {
        FixedParams {
            w_ei: self.params.w_ei,
            w_ii: self.params.w_ii,
            beta: self.params.beta,
        }
    }

    pub fn regulation_config(&self) -> Result<RegulationConfig, HarnessError> {
        let r = self
            .regulation
            .as_ref()
            .ok_or_else(|| config_error("[regulation] section is required for kind = \"regulate\""))?;
        let cfg = RegulationConfig {
            w_ee: r.w_ee,
            w_ie: r.w_ie,
            h_e: r.h_e,
            h_i: r.h_i,
            ..RegulationConfig::free(self.variant, self.fixed_params(), r.rho)
        };
        cfg.validate().map_err(|e| config_error(format!("regulation: {e}")))?;
        Ok(cfg)
    }

    pub fn integration(&self) -> Result<IntegrationSettings, HarnessError> {
        let s = self
            .integration
            .ok_or_else(|| config_error("[integration] section is required for this kind"))?;
        s.validate().map_err(|e| config_error(format!("integration: {e}")))?;
        Ok(s)
    }

    pub fn initial_point(&self) -> ActivityPoint {
        self.initial.unwrap_or_else(|| {
            let c = self.variant.centre();
            ActivityPoint::new(c.s + 0.1, c.sigma + 0.05)
        })
    }

    pub fn detection_settings(&self) -> Option<DetectionSettings> {
        self.scan.as_ref().map(|s| DetectionSettings {
            grid: s.grid.clone(),
            t_transient: s.t_transient,
            t_measure: s.t_measure,
            ..DetectionSettings::default()
        })
    }

    /// Checks every precondition of the selected kind before any run.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.system_params()?;
        match self.kind {
            Kind::Simulate => {
                if self.variant != Variant::Full {
                    return Err(config_error("kind = \"simulate\" needs variant = \"full\""));
                }
                let n = self
                    .network
                    .as_ref()
                    .ok_or_else(|| config_error("[network] section is required for kind = \"simulate\""))?;
                if n.n == 0 {
                    return Err(config_error("network.n must be at least 1"));
                }
                self.integration()?;
            }
            Kind::Meanfield => {
                self.integration()?;
            }
            Kind::Regulate => {
                self.regulation_config()?;
                self.integration()?;
            }
            Kind::FixedPoints => {}
            Kind::Scan => {
                let s = self
                    .scan
                    .as_ref()
                    .ok_or_else(|| config_error("[scan] section is required for kind = \"scan\""))?;
                if s.x.parameter == s.y.parameter {
                    return Err(config_error("scan.x and scan.y must scan different parameters"));
                }
                if (s.x.parameter == ScanParameter::HE || s.y.parameter == ScanParameter::HE)
                    && self.variant != Variant::Full
                {
                    return Err(config_error("scanning h_e needs variant = \"full\""));
                }
                if s.x.cells < 10 || s.y.cells < 10 {
                    return Err(config_error("scan axes need at least 10 cells each"));
                }
                if !(s.t_transient > 0.0 && s.t_measure > 0.0) {
                    return Err(config_error("scan.t_transient and scan.t_measure must be positive"));
                }
            }
            Kind::Profile => {
                if self.variant != Variant::Reduced {
                    return Err(config_error("kind = \"profile\" needs variant = \"reduced\""));
                }
                let p = self
                    .profile
                    .as_ref()
                    .ok_or_else(|| config_error("[profile] section is required for kind = \"profile\""))?;
                if p.lines.is_empty() {
                    return Err(config_error("profile.lines is empty"));
                }
            }
        }
        Ok(())
    }
}

/// Sets `dotted.key` in `table` to `value`, parsed as a TOML value (bare
/// words that are not valid TOML are taken as strings).
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), HarnessError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_error(format!("bad override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_error(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const REGULATE: &str = r#"
kind = "regulate"
variant = "reduced"

[params]
w_ee = 12.0
w_ei = 10.0
w_ie = 15.0
w_ii = 6.0

[integration]
t_end = 100.0

[regulation]
rho = 0.1
w_ee = { eps = 0.01, theta = 0.01 }
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ScenarioConfig::parse(REGULATE, &[]).unwrap();
        assert_eq!(cfg.integration.unwrap().dt, 0.01);
        let again = ScenarioConfig::parse(&cfg.to_toml(), &[]).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn defaults_round_trip() {
        for k in [Kind::Simulate, Kind::Meanfield, Kind::Regulate, Kind::FixedPoints, Kind::Scan, Kind::Profile] {
            let cfg = ScenarioConfig::default_for(k);
            cfg.validate().unwrap();
            assert_eq!(ScenarioConfig::parse(&cfg.to_toml(), &[]).unwrap(), cfg, "{k:?}");
        }
    }

    #[test]
    fn unknown_key_is_fatal_and_named() {
        let text = REGULATE.replace("w_ii = 6.0", "w_ii = 6.0\nw_xx = 1.0");
        let err = ScenarioConfig::parse(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("w_xx"), "{err}");
    }

    #[test]
    fn overrides_apply_before_validation() {
        let cfg = ScenarioConfig::parse(REGULATE, &["params.w_ee=13.5".into(), "integration.t_end=5".into()]).unwrap();
        assert_eq!(cfg.params.w_ee, 13.5);
        assert_eq!(cfg.integration.unwrap().t_end, 5.0);
        let cfg = ScenarioConfig::parse(REGULATE, &["output_dir=some/where".into()]).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("some/where"));
    }

    #[test]
    fn positive_eps_ie_cites_the_sign_constraint() {
        let err = ScenarioConfig::parse(REGULATE, &["regulation.w_ie={ eps = 0.01, theta = 0.01 }".into()])
            .unwrap_err()
            .to_string();
        assert!(err.contains("w_ie.eps must be <= 0"), "{err}");
    }

    #[test]
    fn thresholds_must_match_variant() {
        assert!(ScenarioConfig::parse(REGULATE, &["params.h_e=1.0".into()]).is_err());
        assert!(ScenarioConfig::parse(REGULATE, &["variant=full".into()]).is_err());
    }

    #[test]
    fn bad_override_syntax() {
        assert!(ScenarioConfig::parse(REGULATE, &["params.w_ee".into()]).is_err());
        assert!(ScenarioConfig::parse(REGULATE, &["kind.x=1".into()]).is_err());
    }
}
