use serde::{Deserialize, Serialize};

use super::{apply_modification, Modification, ModificationKind};
use crate::dataset::Instance;
use crate::error::Result;
use crate::explain::Explanation;
use crate::math::derive_seed;
use crate::models::RulModel;

/// Noise amplitude of recommendation probes, in normalized units.
pub const PROBE_AMPLITUDE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub modification: Modification,
    pub direction: Direction,
    pub predicted_rul_after: f64,
    /// `predicted_rul_after − original prediction`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendations {
    pub original_rul: f64,
    pub recommendations: Vec<Recommendation>,
    /// Equal importances decided the feature selection.
    pub ambiguous: bool,
    /// Fewer than two positive or two negative features were available.
    pub incomplete: bool,
}

/// The full-window probe for `feature` and `kind`, seeded from `base_seed`.
pub fn probe_modification(feature: usize, kind: ModificationKind, steps: usize, base_seed: u64) -> Modification {
    Modification {
        feature,
        start: 0,
        end: steps,
        kind,
        amplitude: if kind.is_noise() { PROBE_AMPLITUDE } else { 0.0 },
        seed: derive_seed(base_seed, ((feature as u64) << 8) | kind.index() as u64),
    }
}

/// Picks the top two positive (largest `s`) and top two negative (smallest
/// `s`) features; lower indices win ties.
pub fn select_features(s: &[f64]) -> (Vec<usize>, Vec<usize>, bool) {
    let mut pos: Vec<usize> = (0..s.len()).filter(|&j| s[j] > 0.0).collect();
    let mut neg: Vec<usize> = (0..s.len()).filter(|&j| s[j] < 0.0).collect();
    pos.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    neg.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
    let tied = |ranked: &[usize]| ranked.windows(2).take(2).any(|w| s[w[0]] == s[w[1]]);
    let ambiguous = tied(&pos) || tied(&neg);
    pos.truncate(2);
    neg.truncate(2);
    (pos, neg, ambiguous)
}

/// For each selected feature, tries every modification kind over the whole
/// window and keeps the one that moves the prediction furthest in the
/// feature's direction (up for positive importance, down for negative).
pub fn recommend(
    pm: &dyn RulModel,
    instance: &Instance,
    explanation: &Explanation,
    base_seed: u64,
) -> Result<Recommendations> {
    let steps = instance.steps();
    let original_rul = pm.predict_rul(&instance.values)?;
    let (pos, neg, ambiguous) = select_features(&explanation.s);
    let incomplete = pos.len() < 2 || neg.len() < 2;
    let mut recommendations = Vec::with_capacity(4);
    let plan = pos
        .iter()
        .map(|&j| (j, Direction::Increase))
        .chain(neg.iter().map(|&j| (j, Direction::Decrease)));
    for (feature, direction) in plan {
        let mut best: Option<(Modification, f64)> = None;
        for kind in ModificationKind::ALL {
            let modification = probe_modification(feature, kind, steps, base_seed);
            let rul = pm.predict_rul(&apply_modification(instance, &modification)?.values)?;
            let better = match (&best, direction) {
                (None, _) => true,
                (Some((_, b)), Direction::Increase) => rul > *b,
                (Some((_, b)), Direction::Decrease) => rul < *b,
            };
            if better {
                best = Some((modification, rul));
            }
        }
        let (modification, rul) = best.expect("four kinds tried");
        recommendations.push(Recommendation {
            modification,
            direction,
            predicted_rul_after: rul,
            delta: rul - original_rul,
        });
    }
    Ok(Recommendations {
        original_rul,
        recommendations,
        ambiguous,
        incomplete,
    })
}
