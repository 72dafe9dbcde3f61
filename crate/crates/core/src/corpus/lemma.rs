use crate::Pos;

pub trait Lemmatizer: Send + Sync {
    /// Lower-cased lemma of `word` read as `pos`.
    fn lemma(&self, word: &str, pos: Pos) -> String;
}

/// Suffix-rule lemmatizer with a small irregular-form table.
#[derive(Debug, Default, Clone, Copy)]
pub struct SuffixLemmatizer;

const NOUN_IRREGULAR: &[(&str, &str)] = &[
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("geese", "goose"),
    ("mice", "mouse"),
    ("lice", "louse"),
    ("oxen", "ox"),
    ("knives", "knife"),
    ("wives", "wife"),
    ("lives", "life"),
    ("leaves", "leaf"),
    ("loaves", "loaf"),
    ("halves", "half"),
    ("shelves", "shelf"),
    ("wolves", "wolf"),
    ("calves", "calf"),
    ("thieves", "thief"),
    ("scarves", "scarf"),
    ("shoes", "shoe"),
    ("toes", "toe"),
    ("canoes", "canoe"),
    ("movies", "movie"),
    ("cookies", "cookie"),
    ("pies", "pie"),
    ("ties", "tie"),
    ("lies", "lie"),
    ("dice", "die"),
    ("cacti", "cactus"),
    ("fungi", "fungus"),
    ("data", "datum"),
];

/// Nouns ending in `s` that are already singular.
const NOUN_INVARIANT: &[&str] = &[
    "news", "series", "species", "means", "lens", "gas", "bus", "yes", "pants", "scissors",
    "glasses", "jeans", "clothes", "physics", "mathematics", "christmas",
];

const VERB_IRREGULAR: &[(&str, &str)] = &[
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("goes", "go"),
    ("went", "go"),
    ("gone", "go"),
    ("made", "make"),
    ("making", "make"),
    ("took", "take"),
    ("taken", "take"),
    ("taking", "take"),
    ("got", "get"),
    ("getting", "get"),
    ("gave", "give"),
    ("given", "give"),
    ("bought", "buy"),
    ("brought", "bring"),
    ("found", "find"),
    ("put", "put"),
    ("putting", "put"),
    ("ran", "run"),
    ("running", "run"),
    ("sat", "sit"),
    ("set", "set"),
    ("shot", "shoot"),
    ("told", "tell"),
    ("wrote", "write"),
    ("written", "write"),
];

fn lookup<'a>(table: &'a [(&str, &str)], word: &str) -> Option<&'a str> {
    table.iter().find(|(w, _)| *w == word).map(|(_, l)| *l)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Plural/third-person `-s` stripping shared by nouns and verbs.
fn strip_s(w: &str) -> Option<String> {
    if w.len() <= 3 || !w.ends_with('s') {
        return None;
    }
    if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        return None;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        return Some(format!("{stem}y"));
    }
    for suffix in ["ches", "shes", "sses", "xes", "zes"] {
        if w.ends_with(suffix) {
            return Some(w[..w.len() - 2].to_string());
        }
    }
    if let Some(stem) = w.strip_suffix("oes") {
        // potatoes -> potato; consonant + oes only
        if stem.chars().last().is_some_and(|c| !is_vowel(c)) {
            return Some(format!("{stem}o"));
        }
    }
    Some(w[..w.len() - 1].to_string())
}

impl Lemmatizer for SuffixLemmatizer {
    fn lemma(&self, word: &str, pos: Pos) -> String {
        let w = word.trim().to_lowercase();
        match pos {
            Pos::Noun => {
                if let Some(l) = lookup(NOUN_IRREGULAR, &w) {
                    return l.to_string();
                }
                if NOUN_INVARIANT.contains(&w.as_str()) {
                    return w;
                }
                strip_s(&w).unwrap_or(w)
            }
            Pos::Verb => {
                if let Some(l) = lookup(VERB_IRREGULAR, &w) {
                    return l.to_string();
                }
                strip_s(&w).unwrap_or(w)
            }
        }
    }
}
