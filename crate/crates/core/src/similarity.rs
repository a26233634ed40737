//! Term similarity and set-level affinity.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub trait TermSimilarity: Send + Sync {
    /// Similarity in `[0, 1]`.
    fn similarity(&self, a: &str, b: &str) -> f64;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityModel {
    /// Case-insensitive equality only.
    Exact,
    /// Case-insensitive equality, else Dice over character trigrams.
    #[default]
    Trigram,
}

impl TermSimilarity for SimilarityModel {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        match self {
            SimilarityModel::Exact => exact_similarity(a, b),
            SimilarityModel::Trigram => term_similarity(a, b),
        }
    }
}

impl<F> TermSimilarity for F
where
    F: Fn(&str, &str) -> f64 + Send + Sync,
{
    fn similarity(&self, a: &str, b: &str) -> f64 {
        self(a, b)
    }
}

pub fn exact_similarity(a: &str, b: &str) -> f64 {
    if a.to_lowercase() == b.to_lowercase() {
        1.0
    } else {
        0.0
    }
}

/// 1.0 on case-insensitive match, otherwise `2|A∩B| / (|A|+|B|)` over the
/// sets of character trigrams; 0.0 when either side is shorter than 3 chars.
pub fn term_similarity(a: &str, b: &str) -> f64 {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    if a == b {
        return 1.0;
    }
    let ta = trigrams(&a);
    let tb = trigrams(&b);
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    let common = ta.intersection(&tb).count();
    2.0 * common as f64 / (ta.len() + tb.len()) as f64
}

fn trigrams(s: &str) -> BTreeSet<[char; 3]> {
    let chars: Vec<char> = s.chars().collect();
    chars.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
}

/// Mean over `subject` of the best similarity to any of `labels`.
/// Zero when either side is empty.
pub fn affinity<'a, S, L>(subject: S, labels: L, sim: &dyn TermSimilarity) -> f64
where
    S: IntoIterator<Item = &'a str>,
    L: IntoIterator<Item = &'a str> + Clone,
{
    let mut total = 0.0;
    let mut count = 0usize;
    for s in subject {
        count += 1;
        total += labels
            .clone()
            .into_iter()
            .map(|l| sim.similarity(s, l))
            .fold(0.0, f64::max);
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}
