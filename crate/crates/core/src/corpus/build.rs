use std::path::Path;

use rayon::prelude::*;

use super::annotator::head_lemma;
use super::{
    Article, CorpusError, FrameAnnotator, HeadWordAnnotator, Lemmatizer, PrimitiveEvent,
    RuleFrameAnnotator, RuleHeadAnnotator, SuffixLemmatizer, TypedProcess, MIN_PROCESS_LEN,
};
use crate::corpus::EventProcess;
use crate::{IoError, Pos};

/// The three annotation backends used by the corpus pipeline.
pub struct Annotators {
    pub frames: Box<dyn FrameAnnotator>,
    pub heads: Box<dyn HeadWordAnnotator>,
    pub lemmatizer: Box<dyn Lemmatizer>,
}

impl Annotators {
    pub fn rules() -> Self {
        Annotators {
            frames: Box::new(RuleFrameAnnotator),
            heads: Box::new(RuleHeadAnnotator),
            lemmatizer: Box::new(SuffixLemmatizer),
        }
    }

    pub fn with_frames(frames: Box<dyn FrameAnnotator>) -> Self {
        Annotators {
            frames,
            ..Annotators::rules()
        }
    }
}

/// Predicate and patient phrase of one step title, if both are present.
pub fn annotate_step(
    title: &str,
    annotator: &dyn FrameAnnotator,
) -> Result<Option<(String, String)>, CorpusError> {
    annotator
        .frame(title)
        .map(|f| f.map(|f| (f.verb, f.arg1)))
        .map_err(|message| CorpusError::Annotator {
            title: title.to_string(),
            message,
        })
}

pub fn extract_head_lemma(
    phrase: &str,
    heads: &dyn HeadWordAnnotator,
    lemmatizer: &dyn Lemmatizer,
) -> Result<String, CorpusError> {
    head_lemma(phrase, heads, lemmatizer)
}

fn goal_clause(title: &str) -> &str {
    let t = title.trim();
    match t.get(..7) {
        Some(prefix) if prefix.eq_ignore_ascii_case("how to ") => t[7..].trim_start(),
        _ => t,
    }
}

/// One typed process per step sequence whose every step has a verb and argument.
pub fn build_processes(
    article: &Article,
    annotators: &Annotators,
) -> Result<Vec<TypedProcess>, CorpusError> {
    article.validate()?;
    let unparseable = || CorpusError::UnparseableGoal {
        id: article.id.clone(),
        title: article.goal_title.clone(),
    };
    let (verb, arg) =
        annotate_step(goal_clause(&article.goal_title), annotators.frames.as_ref())?
            .ok_or_else(unparseable)?;
    let action_label = annotators.lemmatizer.lemma(&verb, Pos::Verb);
    let object_label = head_lemma(&arg, annotators.heads.as_ref(), annotators.lemmatizer.as_ref())
        .map_err(|_| unparseable())?;
    if action_label.chars().any(char::is_whitespace) || action_label.is_empty() {
        return Err(unparseable());
    }

    let mut out = Vec::new();
    'sequences: for (i, steps) in article.step_sequences.iter().enumerate() {
        let mut events = Vec::with_capacity(steps.len());
        for step in steps {
            match annotate_step(step, annotators.frames.as_ref())? {
                Some((predicate, object)) => events.push(PrimitiveEvent::new(predicate, object)),
                None => continue 'sequences,
            }
        }
        if events.len() < MIN_PROCESS_LEN {
            continue;
        }
        out.push(TypedProcess {
            id: format!("{}-{}", article.id, i),
            process: EventProcess::new(events)?,
            action_label: action_label.clone(),
            object_label: object_label.clone(),
            source_article: article.id.clone(),
        });
    }
    Ok(out)
}

/// Builds processes for every article, skipping (and logging) articles whose
/// goal title cannot be parsed. Annotator failures abort the run.
pub fn build_corpus(
    articles: &[Article],
    annotators: &Annotators,
) -> Result<Vec<TypedProcess>, CorpusError> {
    let per_article: Vec<Result<Vec<TypedProcess>, CorpusError>> = articles
        .par_iter()
        .map(|a| build_processes(a, annotators))
        .collect();
    let mut out = Vec::new();
    for result in per_article {
        match result {
            Ok(mut ps) => out.append(&mut ps),
            Err(e @ (CorpusError::UnparseableGoal { .. } | CorpusError::InvalidArticle { .. })) => {
                log::warn!("skipping article: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Reads every `*.jsonl` file in `dir` (in file-name order) as article records.
pub fn load_articles(dir: &Path) -> Result<Vec<Article>, CorpusError> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| IoError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    files.sort();
    let mut articles = Vec::new();
    for f in files {
        articles.extend(crate::read_jsonl::<Article>(&f)?);
    }
    Ok(articles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Frame, FrameTable};

    fn article(id: &str, title: &str, seqs: &[&[&str]]) -> Article {
        Article {
            id: id.into(),
            goal_title: title.into(),
            step_sequences: seqs
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn book_a_flight() {
        let a = article(
            "flight",
            "How to book a flight",
            &[&["Choose a destination", "Compare prices", "Buy the ticket"]],
        );
        let ps = build_processes(&a, &Annotators::rules()).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].action_label, "book");
        assert_eq!(ps[0].object_label, "flight");
        assert_eq!(ps[0].process.len(), 3);
        assert_eq!(ps[0].id, "flight-0");
    }

    #[test]
    fn sequence_with_argumentless_step_is_dropped() {
        let a = article(
            "x",
            "How to plant a tree",
            &[&["Dig a hole", "Relax", "Water the soil"], &["Dig a hole", "Water the soil"]],
        );
        let ps = build_processes(&a, &Annotators::rules()).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].id, "x-1");
    }

    #[test]
    fn alternatives_share_labels() {
        let a = article(
            "x",
            "How to make a Birthday Cake",
            &[&["Mix the flour", "Bake the batter"], &["Buy a mix", "Add the eggs"]],
        );
        let ps = build_processes(&a, &Annotators::rules()).unwrap();
        assert_eq!(ps.len(), 2);
        assert!(ps.iter().all(|p| p.action_label == "make" && p.object_label == "cake"));
    }

    #[test]
    fn unparseable_goal() {
        let a = article("x", "How to relax", &[&["Breathe deeply", "Close your eyes"]]);
        assert!(matches!(
            build_processes(&a, &Annotators::rules()),
            Err(CorpusError::UnparseableGoal { .. })
        ));
        let corpus = build_corpus(&[a], &Annotators::rules()).unwrap();
        assert!(corpus.is_empty());
    }

    #[test]
    fn backend_failure_names_title() {
        let mut table = FrameTable::default();
        table.insert(
            "book a flight",
            Some(Frame { verb: "book".into(), arg1: "a flight".into() }),
        );
        let annotators = Annotators::with_frames(Box::new(table));
        let a = article("x", "How to book a flight", &[&["Choose a destination", "Pay"]]);
        match build_corpus(&[a], &annotators) {
            Err(CorpusError::Annotator { title, .. }) => assert_eq!(title, "Choose a destination"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn head_lemma_examples() {
        let a = Annotators::rules();
        let h = |p: &str| extract_head_lemma(p, a.heads.as_ref(), a.lemmatizer.as_ref());
        assert_eq!(h("a birthday cake").unwrap(), "cake");
        assert_eq!(h("cake").unwrap(), "cake");
        assert_eq!(h("three armed trucks").unwrap(), "truck");
        assert!(matches!(h("the"), Err(CorpusError::UnheadablePhrase(_))));
    }
}
