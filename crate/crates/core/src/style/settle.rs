use serde::{Deserialize, Serialize};

use super::{ChangeAccumulator, Dimension, DimensionScore, LearnerStyleProfile, StyleError, SCORE_MAX, SCORE_MIN};

/// A score update produced by [`settle`] for one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionChange {
    pub dimension: Dimension,
    pub old_score: DimensionScore,
    pub new_score: DimensionScore,
    /// Accumulator units consumed, always non-negative.
    pub consumed: i32,
}

/// Parameters of the threshold rule.
///
/// While `|accumulator| >= threshold` the score moves `step` towards the
/// accumulator's sign (clamped to `[-11, 11]`) and `consume` units are
/// removed from the accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettleRule {
    pub threshold: i32,
    pub step: i32,
    pub consume: i32,
}

impl Default for SettleRule {
    fn default() -> Self {
        SettleRule { threshold: 5, step: 2, consume: 5 }
    }
}

impl SettleRule {
    pub fn validate(&self) -> Result<(), StyleError> {
        if self.threshold <= 0 || self.step <= 0 || self.consume <= 0 {
            return Err(StyleError::InvalidRule("threshold, step and consume must be positive".into()));
        }
        // each trigger must strictly shrink |accumulator| or the loop never ends
        if self.consume >= 2 * self.threshold {
            return Err(StyleError::InvalidRule(format!(
                "consume ({}) must be less than twice the threshold ({})",
                self.consume, self.threshold
            )));
        }
        Ok(())
    }

    /// True when `accumulator` has crossed the threshold.
    pub fn triggers(&self, accumulator: i32) -> bool {
        accumulator.abs() >= self.threshold
    }

    /// Settles one raw `(score, accumulator)` pair. The result score is not
    /// validated, so a mutated rule may produce an illegal value.
    pub fn settle_pair(&self, score: i32, accumulator: i32) -> (i32, i32) {
        let triggers = if self.triggers(accumulator) {
            // number of whole steps before |acc| drops below the threshold
            (accumulator.abs() - self.threshold) / self.consume + 1
        } else {
            0
        };
        let sign = accumulator.signum();
        let score = (score + sign * self.step * triggers).clamp(SCORE_MIN, SCORE_MAX);
        (score, accumulator - sign * self.consume * triggers)
    }

    /// Applies the rule to every dimension of `profile`.
    pub fn apply(&self, profile: &LearnerStyleProfile) -> Result<(LearnerStyleProfile, Vec<DimensionChange>), StyleError> {
        self.validate()?;
        let mut next = profile.clone();
        let mut changes = Vec::new();
        for dim in Dimension::ALL {
            let old_score = profile.scores[dim];
            let acc = profile.accumulators[dim].0;
            if !self.triggers(acc) {
                continue;
            }
            let (score, residual) = self.settle_pair(old_score.value(), acc);
            let new_score = DimensionScore::new(score)?;
            next.scores[dim] = new_score;
            next.accumulators[dim] = ChangeAccumulator(residual);
            changes.push(DimensionChange { dimension: dim, old_score, new_score, consumed: (acc - residual).abs() });
        }
        Ok((next, changes))
    }
}

/// Converts accumulated change into score steps under the default rule
/// (trigger at `|acc| >= 5`, move the score by 2, consume 5).
pub fn settle(profile: &LearnerStyleProfile) -> (LearnerStyleProfile, Vec<DimensionChange>) {
    SettleRule::default().apply(profile).expect("the default rule keeps scores odd and in range")
}
