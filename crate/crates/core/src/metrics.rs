//! Retrieval quality against a global relevance oracle.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::baseline::{cap, Query, RoutingError};
use crate::network::{Network, PeerId};
use crate::similarity::TermSimilarity;

/// Value reported when a ratio's denominator is empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptyConvention {
    #[default]
    One,
    Zero,
}

impl EmptyConvention {
    fn value(self) -> f64 {
        match self {
            EmptyConvention::One => 1.0,
            EmptyConvention::Zero => 0.0,
        }
    }
}

/// `|retrieved ∩ relevant| / |retrieved|`, 1.0 for an empty retrieval.
pub fn precision<T: Ord>(retrieved: &BTreeSet<T>, relevant: &BTreeSet<T>) -> f64 {
    precision_with(retrieved, relevant, EmptyConvention::One)
}

pub fn precision_with<T: Ord>(retrieved: &BTreeSet<T>, relevant: &BTreeSet<T>, empty: EmptyConvention) -> f64 {
    if retrieved.is_empty() {
        return empty.value();
    }
    retrieved.intersection(relevant).count() as f64 / retrieved.len() as f64
}

/// `|retrieved ∩ relevant| / |relevant|`, 1.0 when nothing is relevant.
pub fn recall<T: Ord>(retrieved: &BTreeSet<T>, relevant: &BTreeSet<T>) -> f64 {
    recall_with(retrieved, relevant, EmptyConvention::One)
}

pub fn recall_with<T: Ord>(retrieved: &BTreeSet<T>, relevant: &BTreeSet<T>, empty: EmptyConvention) -> f64 {
    if relevant.is_empty() {
        return empty.value();
    }
    retrieved.intersection(relevant).count() as f64 / relevant.len() as f64
}

/// Every peer in the network whose capacity for `q` reaches `epsilon_rel`.
pub fn ground_truth(
    n: &Network,
    q: &Query,
    epsilon_rel: f64,
    sim: &dyn TermSimilarity,
) -> Result<BTreeSet<PeerId>, RoutingError> {
    let mut out = BTreeSet::new();
    for p in n.peers().values() {
        if cap(p, q, sim)? >= epsilon_rel {
            out.insert(p.id.clone());
        }
    }
    Ok(out)
}
