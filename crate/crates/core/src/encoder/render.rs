use serde::{Deserialize, Serialize};

use super::{tokenize, TokenSequence};
use crate::corpus::EventProcess;
use crate::glosses::{GlossAssignment, Sense};

/// Which parts of each event are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderMode {
    Full,
    ActionOnly,
    ObjectOnly,
}

/// `<s> e1 </s> e2 </s> ... </s>` where each event renders as
/// `predicate object`, `predicate` or `object` depending on `mode`.
pub fn render_process(process: &EventProcess, mode: RenderMode) -> TokenSequence {
    TokenSequence::from_groups(process.events().iter().map(|e| match mode {
        RenderMode::Full => {
            let mut t = tokenize(&e.predicate);
            t.extend(tokenize(&e.object));
            t
        }
        RenderMode::ActionOnly => tokenize(&e.predicate),
        RenderMode::ObjectOnly => tokenize(&e.object),
    }))
}

pub fn render_definition(definition: &str) -> TokenSequence {
    TokenSequence::from_groups([tokenize(definition)])
}

/// Definitions joined with a single space, boundary wrapped.
pub fn render_senses(senses: &[Sense]) -> TokenSequence {
    let text = senses
        .iter()
        .map(|s| s.definition.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    render_definition(&text)
}

pub fn render_gloss(assignment: &GlossAssignment) -> TokenSequence {
    render_senses(&assignment.chosen)
}
