//! Run configuration shared by every command.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ingest::{ingest_dataset, DatasetFormat, IngestedDataset};
use super::synthetic::{generate_synthetic, SyntheticSpec};
use crate::augment::AugmentConfig;
use crate::curriculum::CurriculumConfig;
use crate::encoder::EncoderConfig;
use crate::error::{Result, SgaError};
use crate::eval::{ExperimentConfig, SplitSpec};
use crate::graph::SignedGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    File {
        path: PathBuf,
        #[serde(default)]
        format: DatasetFormat,
    },
    Synthetic {
        #[serde(default)]
        spec: SyntheticSpec,
    },
}

impl DatasetSource {
    pub fn validate(&self) -> Vec<String> {
        match self {
            DatasetSource::File { path, .. } if !path.is_file() => {
                vec![format!("dataset.path {} does not exist", path.display())]
            }
            DatasetSource::File { .. } => Vec::new(),
            DatasetSource::Synthetic { spec } => spec.validate(),
        }
    }

    /// Loads the graph; file sources also return the ingestion record.
    pub fn load(&self) -> Result<(SignedGraph, Option<IngestedDataset>)> {
        match self {
            DatasetSource::File { path, format } => {
                let d = ingest_dataset(path, *format)?;
                Ok((d.graph.clone(), Some(d)))
            }
            DatasetSource::Synthetic { spec } => Ok((generate_synthetic(spec)?, None)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<DatasetSource>,
    pub encoder: EncoderConfig,
    pub augment: AugmentConfig,
    pub curriculum: CurriculumConfig,
    pub split: SplitSpec,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            encoder: EncoderConfig::default(),
            augment: AugmentConfig::default(),
            curriculum: CurriculumConfig::default(),
            split: SplitSpec::default(),
            output_dir: PathBuf::from("runs/latest"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| SgaError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| SgaError::InvalidConfig(vec![format!("{}: {e}", path.display())]))
    }

    /// Every problem with the configuration, so they can all be reported at
    /// once before any compute starts.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = match &self.dataset {
            None => vec!["dataset is not set (file path or synthetic spec)".to_string()],
            Some(d) => d.validate(),
        };
        errors.extend(self.experiment().validate());
        if self.output_dir.as_os_str().is_empty() {
            errors.push("output_dir is empty".to_string());
        }
        errors
    }

    pub fn check(&self) -> Result<()> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(SgaError::InvalidConfig(errors))
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            encoder: self.encoder.clone(),
            augment: self.augment.clone(),
            curriculum: self.curriculum.clone(),
            split: self.split.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}
