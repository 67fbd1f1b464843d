//! A dataset held in memory for the service, plus its optional project
//! cache.

use std::path::Path;
use std::sync::Mutex;

use hfv_core::csr_model::{Sizes, ThermalDataset};
use hfv_core::csr_parser::{parse_full, SubmodelIndex};
use hfv_core::project_cache::{init_project, ProjectHandle};
use hfv_core::render::{build_series_payload, render_svg, DiagramSpec, PlotPayload, TransientSeries};
use hfv_core::thermal_graph::{pair_flow_series, submodel_temperature_series};
use hfv_core::units::DisplayUnits;
use hfv_core::{Error, Result};
use serde::Serialize;

use crate::pipeline::{build_view, DiagramRequest};

pub const DEFAULT_EXPORT_WIDTH: u32 = 1200;
pub const DEFAULT_EXPORT_HEIGHT: u32 = 900;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub dataset: String,
    pub sizes: Sizes,
    /// Block order.
    pub submodels: Vec<String>,
    pub node_counts: Vec<usize>,
    pub timestamps: Vec<f64>,
}

#[derive(Debug)]
pub struct Session {
    name: String,
    dataset: ThermalDataset,
    index: SubmodelIndex,
    project: Option<Mutex<ProjectHandle>>,
}

impl Session {
    /// Parses the whole dataset (bodies verified) and opens the project,
    /// if any.
    pub fn open(dataset_dir: &Path, project_dir: Option<&Path>) -> Result<Self> {
        let dataset = parse_full(dataset_dir)?;
        dataset.check()?;
        let project = project_dir
            .map(|p| init_project(p, dataset_dir).map(Mutex::new))
            .transpose()?;
        let name = dataset_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Ok(Self::from_dataset(name, dataset, project))
    }

    pub fn from_dataset(name: String, dataset: ThermalDataset, project: Option<Mutex<ProjectHandle>>) -> Self {
        let index = dataset.index();
        Session {
            name,
            dataset,
            index,
            project,
        }
    }

    pub fn dataset(&self) -> &ThermalDataset {
        &self.dataset
    }

    pub fn summary(&self) -> Summary {
        Summary {
            dataset: self.name.clone(),
            sizes: self.dataset.sizes(),
            submodels: self.index.names().map(str::to_owned).collect(),
            node_counts: self.index.entries().iter().map(|e| e.range.len()).collect(),
            timestamps: self.dataset.temperatures.timestamps.clone(),
        }
    }

    fn row(&self, t: usize) -> Result<&[f64]> {
        let temps = &self.dataset.temperatures;
        if t >= temps.num_timesteps() {
            return Err(Error::Bounds {
                what: "timestep",
                detail: format!("{t} not below {}", temps.num_timesteps()),
            });
        }
        Ok(temps.row(t))
    }

    pub fn diagram(&self, req: &DiagramRequest) -> Result<DiagramSpec> {
        let row = self.row(req.timestep)?;
        let diagram = build_view(&self.index, &self.dataset.conductors, row, req)?;
        if let Some(project) = &self.project {
            let mut handle = project.lock().unwrap_or_else(|e| e.into_inner());
            if let Err(e) = handle.cache_timestep(req.timestep, row) {
                eprintln!("warning: could not cache timestep {}: {e}", req.timestep);
            }
        }
        Ok(diagram)
    }

    pub fn export_svg(&self, req: &DiagramRequest, width: u32, height: u32) -> Result<String> {
        Ok(render_svg(&self.diagram(req)?, width, height))
    }

    pub fn temperature_plot(&self, names: &[String], units: DisplayUnits) -> Result<PlotPayload> {
        let series = submodel_temperature_series(&self.index, &self.dataset.temperatures, names)?;
        build_series_payload(&TransientSeries::Temperature(series), units)
    }

    pub fn flow_plot(&self, from: &str, to: &str, units: DisplayUnits) -> Result<PlotPayload> {
        let series = pair_flow_series(&self.index, &self.dataset.conductors, &self.dataset.temperatures, from, to)?;
        build_series_payload(&TransientSeries::Flow(vec![series]), units)
    }
}
