use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{BehaviorEventKind, Dimension, LearnerStyleProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Video,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Content,
    Gallery,
}

/// Page composition for one learner.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PresentationPlan {
    pub show_challenges: bool,
    pub show_quizzes: bool,
    pub primary_medium: Medium,
    pub layout: Layout,
    /// One toggle per dimension, always pointing away from the current pole.
    pub offered_toggles: BTreeSet<BehaviorEventKind>,
}

/// Composes the page from the sign of each score.
pub fn compose_page(profile: &LearnerStyleProfile) -> PresentationPlan {
    let positive = |dim: Dimension| profile.scores[dim].is_positive();
    let offered_toggles = Dimension::ALL.into_iter().map(|dim| BehaviorEventKind::toward(dim, !positive(dim))).collect();
    PresentationPlan {
        show_challenges: positive(Dimension::AR),
        show_quizzes: positive(Dimension::SI),
        primary_medium: if positive(Dimension::VV) { Medium::Video } else { Medium::Text },
        layout: if positive(Dimension::SG) { Layout::Content } else { Layout::Gallery },
        offered_toggles,
    }
}
