//! Two-parameter scans labelling every grid cell by its attractor set.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::attractors::{detect_attractors, AttractorKind, AttractorReport, DetectionSettings};
use super::AnalysisError;
use crate::dynamics::{FiringThresholds, SynapticWeights, SystemParams};
use crate::svg;

/// Largest tolerated fraction of unclassified cells.
pub const MAX_UNCLASSIFIED_FRACTION: f64 = 0.05;

/// Activity cuts splitting the single-point region of the full system.
const HIGH_CUT: f64 = 0.8;
const LOW_CUT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    WEe,
    WIe,
    HE,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::WEe => "w_ee",
            ScanParameter::WIe => "w_ie",
            ScanParameter::HE => "h_e",
        }
    }

    fn apply(self, params: &mut SystemParams, value: f64) -> Result<(), AnalysisError> {
        match self {
            ScanParameter::WEe => params.weights.w_ee = value,
            ScanParameter::WIe => params.weights.w_ie = value,
            ScanParameter::HE => match params.thresholds.as_mut() {
                Some(h) => h.h_e = value,
                None => return Err(AnalysisError::InvalidScan("h_e axis needs the full variant".into())),
            },
        }
        Ok(())
    }
}

/// One scan axis; values are the centres of `cells` equal cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: ScanParameter,
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl Axis {
    pub fn new(parameter: ScanParameter, min: f64, max: f64, cells: usize) -> Self {
        Axis { parameter, min, max, cells }
    }

    pub fn cell_width(&self) -> f64 {
        (self.max - self.min) / self.cells as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    /// Single point attractor (reduced system).
    O,
    /// Single point attractor with high / medium / low excitatory activity.
    Oh,
    Om,
    Ol,
    /// Periodic attractor.
    P,
    /// Two point attractors.
    T,
    /// Two points and a cycle.
    ThreeAttractorStrip,
    /// One point and a cycle.
    PointCycleCoexistence,
    Unclassified,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 9] = [
        RegionLabel::O,
        RegionLabel::Oh,
        RegionLabel::Om,
        RegionLabel::Ol,
        RegionLabel::P,
        RegionLabel::T,
        RegionLabel::ThreeAttractorStrip,
        RegionLabel::PointCycleCoexistence,
        RegionLabel::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::O => "O",
            RegionLabel::Oh => "O_h",
            RegionLabel::Om => "O_m",
            RegionLabel::Ol => "O_l",
            RegionLabel::P => "P",
            RegionLabel::T => "T",
            RegionLabel::ThreeAttractorStrip => "three",
            RegionLabel::PointCycleCoexistence => "point_cycle",
            RegionLabel::Unclassified => "unclassified",
        }
    }

    /// Whether this is one of the single-point labels.
    pub fn is_single_point(self) -> bool {
        matches!(self, RegionLabel::O | RegionLabel::Oh | RegionLabel::Om | RegionLabel::Ol)
    }

    pub fn from_report(report: &AttractorReport, full: bool) -> Self {
        match report.kind {
            AttractorKind::SinglePoint if full => {
                let s = report.points().next().map_or(0.5, |p| p.s);
                if s > HIGH_CUT {
                    RegionLabel::Oh
                } else if s < LOW_CUT {
                    RegionLabel::Ol
                } else {
                    RegionLabel::Om
                }
            }
            AttractorKind::SinglePoint => RegionLabel::O,
            AttractorKind::TwoPoints => RegionLabel::T,
            AttractorKind::LimitCycle => RegionLabel::P,
            AttractorKind::ThreeCoexisting => RegionLabel::ThreeAttractorStrip,
            AttractorKind::PointAndCycle => RegionLabel::PointCycleCoexistence,
            AttractorKind::Unclassified => RegionLabel::Unclassified,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationMap {
    pub x: Axis,
    pub y: Axis,
    /// Parameters of every cell before the scanned values are applied.
    pub base: SystemParams,
    /// `labels[i][j]` belongs to x-cell `i`, y-cell `j`.
    pub labels: Vec<Vec<RegionLabel>>,
}

impl BifurcationMap {
    pub fn label_at(&self, i: usize, j: usize) -> RegionLabel {
        self.labels[i][j]
    }

    pub fn count(&self, label: RegionLabel) -> usize {
        self.labels.iter().flatten().filter(|&&l| l == label).count()
    }

    pub fn unclassified_fraction(&self) -> f64 {
        self.count(RegionLabel::Unclassified) as f64 / (self.x.cells * self.y.cells) as f64
    }

    /// Rows `param1,param2,label` in grid order (x outer, y inner).
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param1", "param2", "label"])?;
        for (i, col) in self.labels.iter().enumerate() {
            for (j, l) in col.iter().enumerate() {
                w.write_record([self.x.value(i).to_string(), self.y.value(j).to_string(), l.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_svg(&self, title: &str) -> String {
        let present: Vec<RegionLabel> = RegionLabel::ALL.into_iter().filter(|&l| self.count(l) > 0).collect();
        let cells: Vec<Vec<usize>> = self
            .labels
            .iter()
            .map(|col| col.iter().map(|l| present.iter().position(|p| p == l).unwrap()).collect())
            .collect();
        let legend: Vec<&str> = present.iter().map(|l| l.as_str()).collect();
        svg::heat_map(
            title,
            (self.x.parameter.name(), self.x.min, self.x.max),
            (self.y.parameter.name(), self.y.min, self.y.max),
            &cells,
            &legend,
        )
    }
}

/// Labels every cell of the `x × y` grid by running [`detect_attractors`]
/// on `base` with the two scanned parameters replaced by the cell centre.
///
/// Cells are processed in parallel; the result is in grid order and does
/// not depend on scheduling. Fails with
/// [`AnalysisError::TooManyUnclassified`] (carrying the map) when more than
/// 5% of cells are unclassified.
pub fn scan_region_map(
    x: Axis,
    y: Axis,
    base: &SystemParams,
    settings: &DetectionSettings,
) -> Result<BifurcationMap, AnalysisError> {
    if x.parameter == y.parameter {
        return Err(AnalysisError::InvalidScan(format!("both axes scan {}", x.parameter.name())));
    }
    for a in [&x, &y] {
        if a.cells < 10 || !(a.max > a.min) {
            return Err(AnalysisError::InvalidScan(format!(
                "axis {} needs max > min and at least 10 cells",
                a.parameter.name()
            )));
        }
    }
    let full = base.thresholds.is_some();
    let mut probe = *base;
    x.parameter.apply(&mut probe, x.min)?;
    y.parameter.apply(&mut probe, y.min)?;

    let cells: Vec<(usize, usize)> = (0..x.cells).flat_map(|i| (0..y.cells).map(move |j| (i, j))).collect();
    let flat: Vec<RegionLabel> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut p = *base;
            // parameter names were checked on the probe above
            let _ = x.parameter.apply(&mut p, x.value(i));
            let _ = y.parameter.apply(&mut p, y.value(j));
            if p.weights.validate().is_err() {
                return RegionLabel::Unclassified;
            }
            RegionLabel::from_report(&detect_attractors(&p, settings), full)
        })
        .collect();
    let labels: Vec<Vec<RegionLabel>> = flat.chunks(y.cells).map(|c| c.to_vec()).collect();
    let map = BifurcationMap {
        x,
        y,
        base: *base,
        labels,
    };
    if map.unclassified_fraction() > MAX_UNCLASSIFIED_FRACTION {
        return Err(AnalysisError::TooManyUnclassified {
            unclassified: map.count(RegionLabel::Unclassified),
            cells: x.cells * y.cells,
            map: Box::new(map),
        });
    }
    Ok(map)
}

/// Base parameters for a reduced-system scan; the scanned entries are
/// placeholders.
pub fn reduced_base(w_ei: f64, w_ii: f64, beta: f64) -> SystemParams {
    SystemParams::reduced(
        SynapticWeights {
            w_ee: 0.0,
            w_ei,
            w_ie: 0.0,
            w_ii,
        },
        beta,
    )
}

/// Base parameters for a full-system scan.
pub fn full_base(weights: SynapticWeights, thresholds: FiringThresholds, beta: f64) -> SystemParams {
    SystemParams::full(weights, thresholds, beta)
}
