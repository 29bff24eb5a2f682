//! Scenario runner, figure drivers and plotting for [`covcrit`].
//!
//! The `covcrit` binary is a thin clap layer over [`run::run_scenario`] and
//! [`figures::reproduce_figure`]. Every run writes its artifacts (CSV, SVG)
//! and a `manifest.txt` into the output directory.

pub mod config;
pub mod figures;
pub mod manifest;
pub mod plot;
pub mod run;

pub use config::{Kind, ScenarioConfig};
pub use figures::{reproduce_figure, Fidelity, FigureId};
pub use plot::{emit_plot, Artifact};
pub use run::run_scenario;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("unsupported plot input: {0}")]
    UnsupportedPlot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status: 2 config, 3 numerical, 4 failed check, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::CheckFailed(_) => 4,
            HarnessError::UnsupportedPlot(_) | HarnessError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::Io(io),
            other => HarnessError::Io(std::io::Error::other(format!("{other:?}"))),
        }
    }
}

/// Guide chapters, compiled as doc-tests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/phase_plane.md")]
    mod phase_plane {}
    #[doc = include_str!("../../../book/src/regulation.md")]
    mod regulation {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
