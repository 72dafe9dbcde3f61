use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GlossError, GlossStrategy, Sense, SenseInventory, WsdBackend};
use crate::corpus::TypedProcess;
use crate::model::cosine;
use crate::Axis;

/// The gloss(es) chosen for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlossAssignment {
    pub label: String,
    pub axis: Axis,
    pub chosen: Vec<Sense>,
    pub strategy: GlossStrategy,
    /// Lexeme whose senses were used: the label itself, or the nearest
    /// inventory lexeme when the label has no entry.
    pub source_lexeme: String,
}

impl GlossAssignment {
    fn new(label: &str, axis: Axis, chosen: Vec<Sense>, strategy: GlossStrategy, source: &str) -> Self {
        debug_assert!(!chosen.is_empty());
        debug_assert!(chosen.iter().all(|s| s.pos == axis.pos()));
        GlossAssignment {
            label: label.to_string(),
            axis,
            chosen,
            strategy,
            source_lexeme: source.to_string(),
        }
    }

    pub fn is_fallback(&self) -> bool {
        self.source_lexeme != self.label
    }
}

/// Predominant sense of `label`, falling back to the nearest lexeme when the
/// label has no entry.
pub fn select_mfs(
    label: &str,
    axis: Axis,
    inventory: &SenseInventory,
) -> Result<GlossAssignment, GlossError> {
    if inventory.is_empty() {
        return Err(GlossError::EmptyInventory);
    }
    match inventory.senses(label, axis.pos()).first() {
        Some(s) => Ok(GlossAssignment::new(label, axis, vec![s.clone()], GlossStrategy::Mfs, label)),
        None => fallback_nearest_lexeme(label, axis, inventory),
    }
}

/// Predominant sense of the inventory lexeme whose lemma vector is closest
/// (cosine) to the label's. Ties go to the lexicographically first lexeme.
pub fn fallback_nearest_lexeme(
    label: &str,
    axis: Axis,
    inventory: &SenseInventory,
) -> Result<GlossAssignment, GlossError> {
    let pos = axis.pos();
    if let Some(s) = inventory.senses(label, pos).first() {
        return Ok(GlossAssignment::new(label, axis, vec![s.clone()], GlossStrategy::Mfs, label));
    }
    let vectors = inventory
        .lemma_vectors()
        .ok_or_else(|| GlossError::FallbackUnavailable("inventory has no lemma vectors".into()))?;
    let query = vectors
        .get(label)
        .ok_or_else(|| GlossError::Unresolvable(vec![label.to_string()]))?;
    let mut best: Option<(&str, f64)> = None;
    for lexeme in inventory.lexemes(pos) {
        let Some(v) = vectors.get(lexeme) else { continue };
        let Ok(score) = cosine(query, v) else { continue };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((lexeme, score));
        }
    }
    let (lexeme, score) = best.ok_or_else(|| GlossError::Unresolvable(vec![label.to_string()]))?;
    log::debug!("{axis} label `{label}` falls back to `{lexeme}` (cos {score:.4})");
    let sense = inventory.senses(lexeme, pos)[0].clone();
    Ok(GlossAssignment::new(label, axis, vec![sense], GlossStrategy::Mfs, lexeme))
}

fn disambiguate(
    label: &str,
    axis: Axis,
    context: &str,
    wsd: &dyn WsdBackend,
    inventory: &SenseInventory,
) -> Result<GlossAssignment, GlossError> {
    let candidates = inventory.senses(label, axis.pos());
    if candidates.is_empty() {
        let mut a = fallback_nearest_lexeme(label, axis, inventory)?;
        a.strategy = GlossStrategy::Wsd;
        return Ok(a);
    }
    let idx = if candidates.len() == 1 {
        0
    } else {
        match wsd.choose(label, axis.pos(), context, candidates) {
            Ok(i) if i < candidates.len() => i,
            Ok(i) => {
                log::warn!("wsd backend `{}` returned out-of-range sense {i} for `{label}`; using MFS", wsd.name());
                0
            }
            Err(e) => {
                log::warn!("wsd backend `{}` failed on `{label}`: {e}; using MFS", wsd.name());
                0
            }
        }
    };
    Ok(GlossAssignment::new(
        label,
        axis,
        vec![candidates[idx].clone()],
        GlossStrategy::Wsd,
        label,
    ))
}

/// One sense per label, chosen by `wsd` with the label pair `"A O"` as
/// context (plus `extra_context` when given).
pub fn select_wsd(
    action_label: &str,
    object_label: &str,
    wsd: &dyn WsdBackend,
    inventory: &SenseInventory,
    extra_context: Option<&str>,
) -> Result<(GlossAssignment, GlossAssignment), GlossError> {
    if inventory.is_empty() {
        return Err(GlossError::EmptyInventory);
    }
    let mut context = format!("{action_label} {object_label}");
    if let Some(extra) = extra_context {
        context.push(' ');
        context.push_str(extra);
    }
    Ok((
        disambiguate(action_label, Axis::Action, &context, wsd, inventory)?,
        disambiguate(object_label, Axis::Object, &context, wsd, inventory)?,
    ))
}

fn synthetic(label_senses: &[Sense], take: usize) -> Sense {
    let first = &label_senses[0];
    let definition = label_senses
        .iter()
        .take(take)
        .map(|s| s.definition.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Sense::new(first.lexeme.clone(), first.pos, 0, definition)
}

/// Glosses that represent `label` in the index (and in the WSD negative pool).
pub fn candidate_glosses(
    label: &str,
    axis: Axis,
    inventory: &SenseInventory,
    strategy: GlossStrategy,
) -> Result<Vec<Sense>, GlossError> {
    let senses = inventory.senses(label, axis.pos());
    if senses.is_empty() {
        return Ok(select_mfs(label, axis, inventory)?.chosen);
    }
    Ok(match strategy {
        GlossStrategy::Mfs => vec![senses[0].clone()],
        GlossStrategy::Wsd => senses.to_vec(),
        GlossStrategy::ConcatAll => vec![synthetic(senses, senses.len())],
        GlossStrategy::ConcatTopK(k) => vec![synthetic(senses, k)],
    })
}

/// Gloss selection bound to one inventory, strategy and WSD backend.
pub struct GlossResolver {
    pub inventory: SenseInventory,
    pub strategy: GlossStrategy,
    pub wsd: Box<dyn WsdBackend>,
    /// Append the rendered process text to the `[A, O]` WSD context.
    pub process_context: bool,
}

impl GlossResolver {
    pub fn new(inventory: SenseInventory, strategy: GlossStrategy, wsd: Box<dyn WsdBackend>) -> Self {
        GlossResolver {
            inventory,
            strategy,
            wsd,
            process_context: false,
        }
    }

    pub fn candidates(&self, label: &str, axis: Axis) -> Result<Vec<Sense>, GlossError> {
        candidate_glosses(label, axis, &self.inventory, self.strategy)
    }

    /// Candidates for every label, or the full list of unresolvable labels.
    pub fn resolve_all<'a>(
        &self,
        labels: impl IntoIterator<Item = &'a str>,
        axis: Axis,
    ) -> Result<BTreeMap<String, Vec<Sense>>, GlossError> {
        let mut out = BTreeMap::new();
        let mut missing = Vec::new();
        for label in labels {
            match self.candidates(label, axis) {
                Ok(c) => {
                    out.insert(label.to_string(), c);
                }
                Err(GlossError::Unresolvable(mut l)) => missing.append(&mut l),
                Err(e) => return Err(e),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            missing.sort();
            missing.dedup();
            Err(GlossError::Unresolvable(missing))
        }
    }

    /// Positive (action, object) glosses for one training case.
    pub fn training_glosses(&self, case: &TypedProcess) -> Result<(Sense, Sense), GlossError> {
        match self.strategy {
            GlossStrategy::Wsd => {
                let extra = self.process_context.then(|| case.process.to_string().replace(['|', ';'], " "));
                let (a, o) = select_wsd(
                    &case.action_label,
                    &case.object_label,
                    self.wsd.as_ref(),
                    &self.inventory,
                    extra.as_deref(),
                )?;
                Ok((a.chosen[0].clone(), o.chosen[0].clone()))
            }
            _ => {
                let a = self.candidates(&case.action_label, Axis::Action)?;
                let o = self.candidates(&case.object_label, Axis::Object)?;
                Ok((a[0].clone(), o[0].clone()))
            }
        }
    }
}
