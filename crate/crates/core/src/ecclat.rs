//! Overlapping clustering from frequent closed patterns.
//!
//! Every frequent closed pattern is a candidate cluster (pattern plus the
//! transactions containing it). Candidates are scored by homogeneity and
//! concentration; interestingness is their mean. Selection is greedy: the
//! best candidate first, then repeatedly the best remaining candidate that
//! brings at least `m` transactions not yet classified.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::mining::{
    braced, frequent_closed_patterns, ClosedPattern, ItemId, MinFrequency, TransactionDataset, TransactionId,
};

/// Pluggable cluster quality measures.
pub trait ClusterMeasures {
    fn homogeneity(&self, c: &ClosedPattern, d: &TransactionDataset) -> f64;
    fn concentration(&self, c: &ClosedPattern, candidates: &[ClosedPattern]) -> f64;
}

/// Frequency-weighted item coverage and inverse candidate multiplicity.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultMeasures;

impl ClusterMeasures for DefaultMeasures {
    fn homogeneity(&self, c: &ClosedPattern, d: &TransactionDataset) -> f64 {
        homogeneity(c, d)
    }

    fn concentration(&self, c: &ClosedPattern, candidates: &[ClosedPattern]) -> f64 {
        concentration(c, candidates)
    }
}

/// `frequency(c) × mean_{t ∈ support} |pattern| / |items(t)|`.
pub fn homogeneity(c: &ClosedPattern, d: &TransactionDataset) -> f64 {
    if c.support.is_empty() {
        return 0.0;
    }
    let k = c.pattern.len() as f64;
    let coverage: f64 = c
        .support
        .iter()
        .map(|t| k / d.transactions()[t].len() as f64)
        .sum::<f64>()
        / c.support.len() as f64;
    c.frequency * coverage
}

/// Mean over members `t` of `1 / n_t`, `n_t` being the number of candidates
/// whose support contains `t`.
pub fn concentration(c: &ClosedPattern, candidates: &[ClosedPattern]) -> f64 {
    if c.support.is_empty() {
        return 1.0;
    }
    let total: f64 = c
        .support
        .iter()
        .map(|t| {
            let n_t = candidates.iter().filter(|o| o.support.contains(t)).count().max(1);
            1.0 / n_t as f64
        })
        .sum();
    total / c.support.len() as f64
}

pub fn interestingness(homogeneity: f64, concentration: f64) -> f64 {
    (homogeneity + concentration) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub pattern: BTreeSet<ItemId>,
    pub members: BTreeSet<TransactionId>,
    pub homogeneity: f64,
    pub concentration: f64,
    pub interestingness: f64,
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | h={:.6} c={:.6} i={:.6}",
            braced(&self.pattern),
            braced(&self.members),
            self.homogeneity,
            self.concentration,
            self.interestingness
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// In selection order.
    pub selected: Vec<Cluster>,
    pub unclassified: BTreeSet<TransactionId>,
    pub m: usize,
    pub minfr: Option<MinFrequency>,
}

/// Scores every candidate with the default measures.
pub fn score_candidates(candidates: &[ClosedPattern], d: &TransactionDataset) -> Vec<Cluster> {
    score_candidates_with(candidates, d, &DefaultMeasures)
}

pub fn score_candidates_with(
    candidates: &[ClosedPattern],
    d: &TransactionDataset,
    measures: &dyn ClusterMeasures,
) -> Vec<Cluster> {
    candidates
        .iter()
        .map(|c| {
            let h = measures.homogeneity(c, d);
            let conc = measures.concentration(c, candidates);
            Cluster {
                pattern: c.pattern.clone(),
                members: c.support.clone(),
                homogeneity: h,
                concentration: conc,
                interestingness: interestingness(h, conc),
            }
        })
        .collect()
}

pub fn select_clusters(candidates: &[ClosedPattern], d: &TransactionDataset, m: usize) -> Clustering {
    select_clusters_with(candidates, d, m, &DefaultMeasures)
}

/// Greedy selection. The first pick is exempt from the `m` condition; `m = 0`
/// behaves like `m = 1`. Ties go to the larger new coverage, then to the
/// smaller pattern in canonical order.
pub fn select_clusters_with(
    candidates: &[ClosedPattern],
    d: &TransactionDataset,
    m: usize,
    measures: &dyn ClusterMeasures,
) -> Clustering {
    let m = m.max(1);
    let scored = score_candidates_with(candidates, d, measures);
    let mut uncovered: BTreeSet<TransactionId> = d.transactions().keys().cloned().collect();
    let mut taken = vec![false; scored.len()];
    let mut selected = Vec::new();

    while !uncovered.is_empty() {
        let first = selected.is_empty();
        let best = scored
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, c)| (i, c, c.members.intersection(&uncovered).count()))
            .filter(|(_, _, new)| first || *new >= m)
            .max_by(|a, b| {
                a.1.interestingness
                    .total_cmp(&b.1.interestingness)
                    .then(a.2.cmp(&b.2))
                    .then_with(|| canonical(&b.1.pattern, &a.1.pattern))
            });
        let Some((i, c, _)) = best else { break };
        taken[i] = true;
        for t in &c.members {
            uncovered.remove(t);
        }
        selected.push(c.clone());
    }

    Clustering {
        selected,
        unclassified: uncovered,
        m,
        minfr: None,
    }
}

fn canonical(a: &BTreeSet<ItemId>, b: &BTreeSet<ItemId>) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter()))
}

/// Mines candidates at `minfr` and selects with the default measures.
pub fn cluster_dataset(d: &TransactionDataset, minfr: MinFrequency, m: usize) -> Clustering {
    let candidates = frequent_closed_patterns(d, minfr);
    let mut clustering = select_clusters(&candidates, d, m);
    clustering.minfr = Some(minfr);
    clustering
}
