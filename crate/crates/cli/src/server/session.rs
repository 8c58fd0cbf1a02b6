use prognos_core::prescribe::apply_modification;
use prognos_core::{ExplainOutcome, Instance, Modification, Result};

/// One operator's working copy of a held-out window.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub bundle: String,
    pub instance_index: usize,
    pub seed: u64,
    pub base: Instance,
    pub current: Instance,
    pub modifications: Vec<Modification>,
    /// The latest explanation of `current`; cleared by every edit.
    pub explanation: Option<ExplainOutcome>,
}

impl Session {
    pub fn new(id: String, bundle: String, instance_index: usize, base: Instance, seed: u64) -> Self {
        Session {
            id,
            bundle,
            instance_index,
            seed,
            current: base.clone(),
            base,
            modifications: Vec::new(),
            explanation: None,
        }
    }

    pub fn apply(&mut self, modification: Modification) -> Result<()> {
        self.current = apply_modification(&self.current, &modification)?;
        self.modifications.push(modification);
        self.explanation = None;
        Ok(())
    }

    /// Drops the last modification and rebuilds `current` from the base.
    pub fn undo(&mut self) -> Result<Option<Modification>> {
        let Some(last) = self.modifications.pop() else {
            return Ok(None);
        };
        self.current = replay(&self.base, &self.modifications)?;
        self.explanation = None;
        Ok(Some(last))
    }
}

/// Applies `modifications` in order to `base`.
pub fn replay(base: &Instance, modifications: &[Modification]) -> Result<Instance> {
    modifications
        .iter()
        .try_fold(base.clone(), |inst, m| apply_modification(&inst, m))
}
