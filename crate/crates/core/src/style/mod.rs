//! Felder-Silverman learning-style model.
//!
//! Four bipolar dimensions, each scored with an odd integer in `[-11, 11]`
//! by the Index of Learning Styles questionnaire. Positive scores lean
//! towards the first pole (Active, Sensing, Visual, Sequential), negative
//! scores towards the second (Reflective, Intuitive, Verbal, Global).
//!
//! Learner clicks on adaptation hyperlinks feed per-dimension change
//! accumulators; [`settle`] converts accumulated mass into score steps.

mod ils;
mod presentation;
mod settle;

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ils::{score_ils, IlsAnswer, IlsAnswerSheet, ILS_QUESTIONS_PER_DIMENSION, ILS_QUESTION_COUNT};
pub use presentation::{compose_page, Layout, Medium, PresentationPlan};
pub use settle::{settle, DimensionChange, SettleRule};

/// Smallest and largest legal dimension score.
pub const SCORE_MIN: i32 = -11;
pub const SCORE_MAX: i32 = 11;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StyleError {
    #[error("dimension score {0} is invalid: must be odd and within [-11, 11]")]
    InvalidScore(i32),
    #[error("answer sheet must contain {expected} answers, got {actual}")]
    SheetLength { expected: usize, actual: usize },
    #[error("invalid answer {0:?} at position {1}: expected 'A' or 'B'")]
    InvalidAnswer(char, usize),
    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),
    #[error("unknown behavior event kind {0:?}")]
    UnknownEventKind(String),
    #[error("invalid settle rule: {0}")]
    InvalidRule(String),
}

/// One of the four learning-style axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dimension {
    /// Active (+) / Reflective (-)
    AR,
    /// Sensing (+) / Intuitive (-)
    SI,
    /// Visual (+) / Verbal (-)
    VV,
    /// Sequential (+) / Global (-)
    SG,
}

impl Dimension {
    /// Canonical order used by every serialized form.
    pub const ALL: [Dimension; 4] = [Dimension::AR, Dimension::SI, Dimension::VV, Dimension::SG];

    pub const fn index(self) -> usize {
        match self {
            Dimension::AR => 0,
            Dimension::SI => 1,
            Dimension::VV => 2,
            Dimension::SG => 3,
        }
    }

    pub const fn code(self) -> &'static str {
        match self {
            Dimension::AR => "AR",
            Dimension::SI => "SI",
            Dimension::VV => "VV",
            Dimension::SG => "SG",
        }
    }

    /// Human-readable pole names, positive pole first.
    pub const fn poles(self) -> (&'static str, &'static str) {
        match self {
            Dimension::AR => ("Active", "Reflective"),
            Dimension::SI => ("Sensing", "Intuitive"),
            Dimension::VV => ("Visual", "Verbal"),
            Dimension::SG => ("Sequential", "Global"),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Dimension {
    type Err = StyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL.into_iter().find(|d| d.code() == s).ok_or_else(|| StyleError::UnknownDimension(s.to_owned()))
    }
}

/// Fixed-size map keyed by [`Dimension`], stored in canonical order.
/// Serializes as an object `{"AR": .., "SI": .., "VV": .., "SG": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PerDimension<T>(pub [T; 4]);

impl<T: Serialize> Serialize for PerDimension<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        for (dim, value) in self.iter() {
            map.serialize_entry(dim.code(), value)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for PerDimension<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let mut map = std::collections::BTreeMap::<Dimension, T>::deserialize(deserializer)?;
        let mut take = |dim: Dimension| map.remove(&dim).ok_or_else(|| D::Error::custom(format!("missing dimension {dim}")));
        Ok(PerDimension([take(Dimension::AR)?, take(Dimension::SI)?, take(Dimension::VV)?, take(Dimension::SG)?]))
    }
}

impl<T> PerDimension<T> {
    pub fn from_fn(mut f: impl FnMut(Dimension) -> T) -> Self {
        PerDimension(Dimension::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Dimension, &T)> {
        Dimension::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(self, f: impl FnMut(T) -> U) -> PerDimension<U> {
        PerDimension(self.0.map(f))
    }
}

impl<T> Index<Dimension> for PerDimension<T> {
    type Output = T;

    fn index(&self, dim: Dimension) -> &T {
        &self.0[dim.index()]
    }
}

impl<T> IndexMut<Dimension> for PerDimension<T> {
    fn index_mut(&mut self, dim: Dimension) -> &mut T {
        &mut self.0[dim.index()]
    }
}

/// An odd ILS score in `[-11, 11]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct DimensionScore(i32);

impl DimensionScore {
    pub fn new(value: i32) -> Result<Self, StyleError> {
        if value % 2 != 0 && (SCORE_MIN..=SCORE_MAX).contains(&value) {
            Ok(DimensionScore(value))
        } else {
            Err(StyleError::InvalidScore(value))
        }
    }

    pub const fn value(self) -> i32 {
        self.0
    }

    /// True when the score leans towards the first (positive) pole.
    pub const fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl TryFrom<i32> for DimensionScore {
    type Error = StyleError;

    fn try_from(value: i32) -> Result<Self, Self::Error> {
        DimensionScore::new(value)
    }
}

impl From<DimensionScore> for i32 {
    fn from(score: DimensionScore) -> i32 {
        score.0
    }
}

impl fmt::Display for DimensionScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Running sum of behavior-event deltas for one dimension. Any integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChangeAccumulator(pub i32);

impl fmt::Display for ChangeAccumulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A learner click on one of the per-dimension adaptation hyperlinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BehaviorEventKind {
    HideChallenges,
    ShowAllChallenges,
    HideQuizzes,
    ShowAllQuizzes,
    TextExplanation,
    WatchVideo,
    GalleryView,
    ContentView,
}

impl BehaviorEventKind {
    pub const ALL: [BehaviorEventKind; 8] = [
        BehaviorEventKind::HideChallenges,
        BehaviorEventKind::ShowAllChallenges,
        BehaviorEventKind::HideQuizzes,
        BehaviorEventKind::ShowAllQuizzes,
        BehaviorEventKind::TextExplanation,
        BehaviorEventKind::WatchVideo,
        BehaviorEventKind::GalleryView,
        BehaviorEventKind::ContentView,
    ];

    pub const fn dimension(self) -> Dimension {
        use BehaviorEventKind::*;
        match self {
            HideChallenges | ShowAllChallenges => Dimension::AR,
            HideQuizzes | ShowAllQuizzes => Dimension::SI,
            TextExplanation | WatchVideo => Dimension::VV,
            GalleryView | ContentView => Dimension::SG,
        }
    }

    /// +2 when the click points towards the positive pole, -2 otherwise.
    pub const fn delta(self) -> i32 {
        use BehaviorEventKind::*;
        match self {
            ShowAllChallenges | ShowAllQuizzes | WatchVideo | ContentView => 2,
            HideChallenges | HideQuizzes | TextExplanation | GalleryView => -2,
        }
    }

    /// The toggle that moves a learner towards the given pole of `dim`.
    pub const fn toward(dim: Dimension, positive: bool) -> BehaviorEventKind {
        use BehaviorEventKind::*;
        match (dim, positive) {
            (Dimension::AR, true) => ShowAllChallenges,
            (Dimension::AR, false) => HideChallenges,
            (Dimension::SI, true) => ShowAllQuizzes,
            (Dimension::SI, false) => HideQuizzes,
            (Dimension::VV, true) => WatchVideo,
            (Dimension::VV, false) => TextExplanation,
            (Dimension::SG, true) => ContentView,
            (Dimension::SG, false) => GalleryView,
        }
    }

    pub const fn name(self) -> &'static str {
        use BehaviorEventKind::*;
        match self {
            HideChallenges => "HideChallenges",
            ShowAllChallenges => "ShowAllChallenges",
            HideQuizzes => "HideQuizzes",
            ShowAllQuizzes => "ShowAllQuizzes",
            TextExplanation => "TextExplanation",
            WatchVideo => "WatchVideo",
            GalleryView => "GalleryView",
            ContentView => "ContentView",
        }
    }
}

impl fmt::Display for BehaviorEventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BehaviorEventKind {
    type Err = StyleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BehaviorEventKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| StyleError::UnknownEventKind(s.to_owned()))
    }
}

/// Maps a behavior event to the accumulator it feeds and its signed step.
pub fn event_delta(kind: BehaviorEventKind) -> (Dimension, i32) {
    (kind.dimension(), kind.delta())
}

/// Per-learner scores and change accumulators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LearnerStyleProfile {
    pub learner_id: String,
    pub scores: PerDimension<DimensionScore>,
    pub accumulators: PerDimension<ChangeAccumulator>,
}

impl LearnerStyleProfile {
    /// Fresh profile with all accumulators at zero.
    pub fn new(learner_id: impl Into<String>, scores: PerDimension<DimensionScore>) -> Self {
        LearnerStyleProfile { learner_id: learner_id.into(), scores, accumulators: PerDimension::default() }
    }

    /// Builds a profile from raw integers, validating every score.
    pub fn from_raw(learner_id: impl Into<String>, scores: [i32; 4], accumulators: [i32; 4]) -> Result<Self, StyleError> {
        let mut checked = [DimensionScore(1); 4];
        for (slot, raw) in checked.iter_mut().zip(scores) {
            *slot = DimensionScore::new(raw)?;
        }
        Ok(LearnerStyleProfile {
            learner_id: learner_id.into(),
            scores: PerDimension(checked),
            accumulators: PerDimension(accumulators.map(ChangeAccumulator)),
        })
    }

    pub fn raw_scores(&self) -> [i32; 4] {
        self.scores.0.map(DimensionScore::value)
    }

    pub fn raw_accumulators(&self) -> [i32; 4] {
        self.accumulators.0.map(|a| a.0)
    }
}

/// Adds the event's delta to the matching accumulator. Scores are untouched.
pub fn apply_event(profile: &LearnerStyleProfile, kind: BehaviorEventKind) -> LearnerStyleProfile {
    let (dim, delta) = event_delta(kind);
    let mut next = profile.clone();
    next.accumulators[dim].0 += delta;
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_rejects_even_and_out_of_range() {
        assert!(DimensionScore::new(4).is_err());
        assert!(DimensionScore::new(0).is_err());
        assert!(DimensionScore::new(13).is_err());
        assert!(DimensionScore::new(-13).is_err());
        assert_eq!(DimensionScore::new(-11).unwrap().value(), -11);
    }

    #[test]
    fn event_deltas() {
        assert_eq!(event_delta(BehaviorEventKind::GalleryView), (Dimension::SG, -2));
        assert_eq!(event_delta(BehaviorEventKind::ContentView), (Dimension::SG, 2));
        assert_eq!(event_delta(BehaviorEventKind::WatchVideo), (Dimension::VV, 2));
        for kind in BehaviorEventKind::ALL {
            let (dim, delta) = event_delta(kind);
            assert!(delta == 2 || delta == -2);
            assert_eq!(BehaviorEventKind::toward(dim, delta > 0), kind);
        }
    }

    #[test]
    fn apply_event_is_additive() {
        let p = LearnerStyleProfile::from_raw("m", [1, 1, 1, 1], [0, 0, 0, 0]).unwrap();
        let p = apply_event(&p, BehaviorEventKind::GalleryView);
        assert_eq!(p.raw_accumulators(), [0, 0, 0, -2]);
        let p = apply_event(&p, BehaviorEventKind::GalleryView);
        assert_eq!(p.raw_accumulators(), [0, 0, 0, -4]);

        let p = LearnerStyleProfile::from_raw("m", [1, 1, 1, 1], [3, 0, 0, 0]).unwrap();
        let q = apply_event(&p, BehaviorEventKind::HideChallenges);
        assert_eq!(q.raw_accumulators(), [1, 0, 0, 0]);
        assert_eq!(q.scores, p.scores);
    }

    #[test]
    fn per_dimension_json_is_an_object() {
        let p = LearnerStyleProfile::from_raw("m", [1, -3, 5, -7], [0, 2, -4, 6]).unwrap();
        let json = serde_json::to_string(&p.scores).unwrap();
        assert_eq!(json, r#"{"AR":1,"SI":-3,"VV":5,"SG":-7}"#);
        let back: PerDimension<DimensionScore> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p.scores);
        assert!(serde_json::from_str::<PerDimension<DimensionScore>>(r#"{"AR":2,"SI":1,"VV":1,"SG":1}"#).is_err());
        assert!(serde_json::from_str::<PerDimension<i32>>(r#"{"AR":1}"#).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in BehaviorEventKind::ALL {
            assert_eq!(kind.name().parse::<BehaviorEventKind>().unwrap(), kind);
        }
        for dim in Dimension::ALL {
            assert_eq!(dim.code().parse::<Dimension>().unwrap(), dim);
        }
        assert!("Nope".parse::<BehaviorEventKind>().is_err());
    }
}
