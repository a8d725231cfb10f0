//! Post-course evaluation survey: 15 questions scored 1..=5, grouped in
//! threes into five evaluation dimensions.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Mutex, PoisonError};

use serde::{Deserialize, Serialize};

use super::ServiceError;

pub const SURVEY_QUESTIONS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EvaluationDimension {
    Learner,
    Instructor,
    Course,
    Design,
    Technology,
}

impl EvaluationDimension {
    pub const ALL: [EvaluationDimension; 5] = [
        EvaluationDimension::Learner,
        EvaluationDimension::Instructor,
        EvaluationDimension::Course,
        EvaluationDimension::Design,
        EvaluationDimension::Technology,
    ];

    /// Zero-based question indices belonging to this dimension.
    pub fn questions(self) -> std::ops::Range<usize> {
        let start = 3 * self as usize;
        start..start + 3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub respondent_id: String,
    pub scores: Vec<u8>,
}

impl SurveyResponse {
    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.scores.len() != SURVEY_QUESTIONS {
            return Err(ServiceError::Validation(format!("survey needs exactly {SURVEY_QUESTIONS} scores, got {}", self.scores.len())));
        }
        if let Some((i, s)) = self.scores.iter().enumerate().find(|(_, s)| !(1..=5).contains(*s)) {
            return Err(ServiceError::Validation(format!("Q{} score {s} is outside [1, 5]", i + 1)));
        }
        Ok(())
    }
}

/// Mean per dimension, or an explicit marker when no responses exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimensionAverage {
    Mean(f64),
    NoData(NoData),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoData {
    #[serde(rename = "no data")]
    Marker,
}

impl DimensionAverage {
    pub fn mean(&self) -> Option<f64> {
        match self {
            DimensionAverage::Mean(m) => Some(*m),
            DimensionAverage::NoData(_) => None,
        }
    }
}

pub type SurveySummary = BTreeMap<EvaluationDimension, DimensionAverage>;

pub fn summarize(responses: &[SurveyResponse]) -> SurveySummary {
    EvaluationDimension::ALL
        .into_iter()
        .map(|dim| {
            let values: Vec<f64> = responses.iter().flat_map(|r| r.scores[dim.questions()].iter().map(|&s| f64::from(s))).collect();
            let avg = if values.is_empty() {
                DimensionAverage::NoData(NoData::Marker)
            } else {
                DimensionAverage::Mean(values.iter().sum::<f64>() / values.len() as f64)
            };
            (dim, avg)
        })
        .collect()
}

/// Responses kept in memory and, when a path is set, appended as JSON lines.
#[derive(Debug)]
pub struct SurveyStore {
    path: Option<PathBuf>,
    responses: Mutex<Vec<SurveyResponse>>,
}

impl SurveyStore {
    pub fn in_memory() -> Self {
        SurveyStore { path: None, responses: Mutex::new(Vec::new()) }
    }

    pub fn open(path: PathBuf) -> Result<Self, ServiceError> {
        let mut responses = Vec::new();
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines().filter(|l| !l.trim().is_empty()) {
                let r: SurveyResponse = serde_json::from_str(line).map_err(|e| ServiceError::Internal(e.to_string()))?;
                responses.push(r);
            }
        }
        Ok(SurveyStore { path: Some(path), responses: Mutex::new(responses) })
    }

    pub fn submit(&self, response: SurveyResponse) -> Result<(), ServiceError> {
        response.validate()?;
        let mut responses = self.responses.lock().unwrap_or_else(PoisonError::into_inner);
        if let Some(path) = &self.path {
            let line = serde_json::to_string(&response).map_err(|e| ServiceError::Internal(e.to_string()))?;
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(file, "{line}")?;
        }
        responses.push(response);
        Ok(())
    }

    pub fn summary(&self) -> SurveySummary {
        summarize(&self.responses.lock().unwrap_or_else(PoisonError::into_inner))
    }
}
