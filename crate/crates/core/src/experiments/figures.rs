use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{compute_experiment, derive_seed, Basis, ExperimentConfig, VERSION};
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::random::Model;

pub const FIGURE_DENSITIES: [f64; 3] = [0.10, 0.30, 0.65];
const KDE_RUNS: usize = 5;
const ERROR_RUNS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
        }
    }

    fn layout(self) -> (Model, (usize, usize), &'static [f64], PanelKind) {
        use FigureId::*;
        match self {
            Fig2 => (Model::Er, (30, 50), &FIGURE_DENSITIES, PanelKind::Density),
            Fig3 => (Model::Er, (50, 100), &FIGURE_DENSITIES[..1], PanelKind::Density),
            Fig4 => (Model::Er, (30, 50), &FIGURE_DENSITIES, PanelKind::Errors),
            Fig5 => (Model::Ws, (30, 50), &FIGURE_DENSITIES, PanelKind::Density),
            Fig6 => (Model::Ws, (30, 50), &FIGURE_DENSITIES, PanelKind::Errors),
            Fig7 => (Model::Ba, (30, 50), &FIGURE_DENSITIES, PanelKind::Density),
            Fig8 => (Model::Ba, (30, 50), &FIGURE_DENSITIES, PanelKind::Errors),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PanelKind {
    /// Correlation-coefficient densities for both bases.
    Density,
    /// Percentage-error profiles for both estimators.
    Errors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub master_seed: u64,
    /// Overrides the per-figure run count.
    pub runs: Option<usize>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            master_seed: 1,
            runs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureManifest {
    pub figure: FigureId,
    pub version: String,
    /// Panel name to CSV path relative to the output directory.
    pub panels: BTreeMap<String, String>,
    /// Config hash of each density row.
    pub configs: BTreeMap<String, String>,
}

fn density_label(d: f64) -> String {
    format!("d{:02}", (d * 100.0).round() as u32)
}

/// Runs the configuration grid behind `figure` and writes one CSV per panel
/// under `output_dir`, plus `manifest.json`.
pub fn reproduce_figure(figure: FigureId, output_dir: &Path, options: &FigureOptions) -> Result<FigureManifest> {
    let (model, orders, densities, kind) = figure.layout();
    let mut panels = BTreeMap::new();
    let mut configs = BTreeMap::new();
    for (row, &density) in densities.iter().enumerate() {
        let label = density_label(density);
        let dir = output_dir.join(&label);
        let mut config = ExperimentConfig::new(model, orders, density);
        config.master_seed = derive_seed(options.master_seed, row, figure.name());
        config.output_dir = dir.clone();
        match kind {
            PanelKind::Density => {
                config.estimators = vec![];
                config.runs = Some(options.runs.unwrap_or(KDE_RUNS));
            }
            PanelKind::Errors => {
                config.correlations = false;
                config.runs = Some(options.runs.unwrap_or(ERROR_RUNS));
            }
        }
        let bundle = compute_experiment(&config)?;
        bundle.write(&dir)?;
        configs.insert(label.clone(), bundle.config_hash.clone());
        match kind {
            PanelKind::Density => {
                for basis in Basis::ALL {
                    if bundle.curve(basis).is_some() {
                        panels.insert(
                            format!("{label}_{}", basis.name()),
                            format!("{label}/kde_{}.csv", basis.name()),
                        );
                    }
                }
            }
            PanelKind::Errors => {
                for method in Method::ALL {
                    panels.insert(
                        format!("{label}_{}", method.name()),
                        format!("{label}/errors_{}.csv", method.name()),
                    );
                }
            }
        }
    }
    let manifest = FigureManifest {
        figure,
        version: VERSION.to_string(),
        panels,
        configs,
    };
    let path = output_dir.join("manifest.json");
    let file = std::fs::File::create(&path).map_err(|source| Error::File { path, source })?;
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(manifest)
}
