use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dimension, DimensionScore, PerDimension, StyleError};

pub const ILS_QUESTION_COUNT: usize = 44;
pub const ILS_QUESTIONS_PER_DIMENSION: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IlsAnswer {
    A,
    B,
}

/// A complete questionnaire. Question `i` belongs to dimension `i % 4`
/// in the order AR, SI, VV, SG.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<IlsAnswer>", into = "Vec<IlsAnswer>")]
pub struct IlsAnswerSheet(Vec<IlsAnswer>);

impl IlsAnswerSheet {
    pub fn new(answers: Vec<IlsAnswer>) -> Result<Self, StyleError> {
        if answers.len() != ILS_QUESTION_COUNT {
            return Err(StyleError::SheetLength { expected: ILS_QUESTION_COUNT, actual: answers.len() });
        }
        Ok(IlsAnswerSheet(answers))
    }

    pub fn answers(&self) -> &[IlsAnswer] {
        &self.0
    }

    pub fn dimension_of(question: usize) -> Dimension {
        Dimension::ALL[question % 4]
    }
}

impl TryFrom<Vec<IlsAnswer>> for IlsAnswerSheet {
    type Error = StyleError;

    fn try_from(answers: Vec<IlsAnswer>) -> Result<Self, Self::Error> {
        IlsAnswerSheet::new(answers)
    }
}

impl From<IlsAnswerSheet> for Vec<IlsAnswer> {
    fn from(sheet: IlsAnswerSheet) -> Self {
        sheet.0
    }
}

/// Parses a compact `"ABBA..."` string (case-insensitive, whitespace ignored).
impl FromStr for IlsAnswerSheet {
    type Err = StyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let answers = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .enumerate()
            .map(|(i, c)| match c.to_ascii_uppercase() {
                'A' => Ok(IlsAnswer::A),
                'B' => Ok(IlsAnswer::B),
                other => Err(StyleError::InvalidAnswer(other, i)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        IlsAnswerSheet::new(answers)
    }
}

impl fmt::Display for IlsAnswerSheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            f.write_str(match a {
                IlsAnswer::A => "A",
                IlsAnswer::B => "B",
            })?;
        }
        Ok(())
    }
}

/// Per dimension, the number of `A` answers minus the number of `B` answers.
pub fn score_ils(sheet: &IlsAnswerSheet) -> PerDimension<DimensionScore> {
    let mut tally = PerDimension([0i32; 4]);
    for (i, answer) in sheet.answers().iter().enumerate() {
        tally[IlsAnswerSheet::dimension_of(i)] += match answer {
            IlsAnswer::A => 1,
            IlsAnswer::B => -1,
        };
    }
    // Eleven +-1 terms always sum to an odd value in [-11, 11].
    tally.map(|v| DimensionScore::new(v).expect("11 answers per dimension yield an odd score"))
}
