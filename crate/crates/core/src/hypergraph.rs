//! Hypergraphs and their minimal transversals (hitting sets).
//!
//! Two independent enumerators are provided: [`min_transversals_bruteforce`]
//! walks every subset of the vertex set and is only meant as an oracle for
//! small inputs, while [`min_transversals_berge`] builds the answer one
//! hyperedge at a time. The number of minimal transversals can be exponential
//! in the size of the hypergraph, so Berge's algorithm has no polynomial bound.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::label::Label;

pub type VertexId = Label;

/// Default vertex ceiling for the brute-force oracle.
pub const ORACLE_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("edge {index} is empty")]
    EmptyEdge { index: usize },
    #[error("edge {index} duplicates edge {first}")]
    DuplicateEdge { index: usize, first: usize },
    #[error("vertex `{0}` is not in the hypergraph")]
    UnknownVertex(VertexId),
    #[error("brute-force oracle refuses {count} vertices (limit {limit})")]
    OracleLimit { count: usize, limit: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A set of vertices. Ordered by cardinality first, then lexicographically
/// over the (naturally sorted) members.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(BTreeSet<VertexId>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(BTreeSet::new())
    }

    pub fn members(&self) -> &BTreeSet<VertexId> {
        &self.0
    }

    pub fn into_members(self) -> BTreeSet<VertexId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.0.contains(v)
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.0.insert(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &VertexId> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl<L: Into<Label>> FromIterator<L> for VertexSet {
    fn from_iter<I: IntoIterator<Item = L>>(iter: I) -> Self {
        VertexSet(iter.into_iter().map(Into::into).collect())
    }
}

impl From<BTreeSet<VertexId>> for VertexSet {
    fn from(s: BTreeSet<VertexId>) -> Self {
        VertexSet(s)
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    edges: Vec<VertexSet>,
    edge_bits: Vec<BitSet>,
}

impl Hypergraph {
    /// Builds a hypergraph over an explicit vertex universe. Edge vertices
    /// are added to the universe if missing.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self, HypergraphError>
    where
        V: IntoIterator,
        V::Item: Into<Label>,
        E: IntoIterator<Item = VertexSet>,
    {
        let edges: Vec<VertexSet> = edges.into_iter().collect();
        let mut universe: BTreeSet<VertexId> = vertices.into_iter().map(Into::into).collect();
        for (i, e) in edges.iter().enumerate() {
            if e.is_empty() {
                return Err(HypergraphError::EmptyEdge { index: i });
            }
            universe.extend(e.iter().cloned());
        }
        let mut seen: BTreeMap<&VertexSet, usize> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if let Some(&first) = seen.get(e) {
                return Err(HypergraphError::DuplicateEdge { index: i, first });
            }
            seen.insert(e, i);
        }
        let vertices: Vec<VertexId> = universe.into_iter().collect();
        let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let n = vertices.len();
        let edge_bits = edges
            .iter()
            .map(|e| BitSet::from_indices(n, e.iter().map(|v| index[v])))
            .collect();
        Ok(Hypergraph {
            vertices,
            index,
            edges,
            edge_bits,
        })
    }

    /// Builds a hypergraph whose vertex set is the union of its edges.
    pub fn from_edges<E>(edges: E) -> Result<Self, HypergraphError>
    where
        E: IntoIterator<Item = VertexSet>,
    {
        Hypergraph::new(std::iter::empty::<Label>(), edges)
    }

    /// Parses the line format: one edge per line, whitespace-separated vertex
    /// labels, `#` starts a comment line. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, HypergraphError> {
        let mut edges = Vec::new();
        let mut lines = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let edge: VertexSet = line.split_whitespace().collect();
            edges.push(edge);
            lines.push(lineno + 1);
        }
        Hypergraph::from_edges(edges).map_err(|e| match e {
            HypergraphError::DuplicateEdge { index, first } => HypergraphError::Parse {
                line: lines[index],
                message: format!("duplicate of the edge on line {}", lines[first]),
            },
            other => other,
        })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[VertexSet] {
        &self.edges
    }

    fn bits_of(&self, s: &VertexSet) -> Result<BitSet, HypergraphError> {
        let mut bits = BitSet::new(self.vertices.len());
        for v in s.iter() {
            let &i = self
                .index
                .get(v)
                .ok_or_else(|| HypergraphError::UnknownVertex(v.clone()))?;
            bits.insert(i);
        }
        Ok(bits)
    }

    fn set_of(&self, bits: &BitSet) -> VertexSet {
        bits.iter().map(|i| self.vertices[i].clone()).collect()
    }
}

/// True iff `s` meets every hyperedge.
pub fn is_transversal(h: &Hypergraph, s: &VertexSet) -> Result<bool, HypergraphError> {
    let bits = h.bits_of(s)?;
    Ok(h.edge_bits.iter().all(|e| e.intersects(&bits)))
}

/// True iff `s` is a transversal and dropping any single vertex breaks it.
/// Single removals suffice because supersets of transversals are transversals.
pub fn is_minimal_transversal(h: &Hypergraph, s: &VertexSet) -> Result<bool, HypergraphError> {
    if !is_transversal(h, s)? {
        return Ok(false);
    }
    for v in s.iter() {
        let mut smaller = s.clone();
        smaller.0.remove(v);
        if is_transversal(h, &smaller)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive oracle with the default vertex limit.
pub fn min_transversals_bruteforce(h: &Hypergraph) -> Result<Vec<VertexSet>, HypergraphError> {
    min_transversals_bruteforce_with_limit(h, ORACLE_LIMIT)
}

/// Enumerates all `2^|V|` subsets and keeps the minimal transversals.
pub fn min_transversals_bruteforce_with_limit(h: &Hypergraph, limit: usize) -> Result<Vec<VertexSet>, HypergraphError> {
    let n = h.vertices.len();
    let limit = limit.min(30);
    if n > limit {
        return Err(HypergraphError::OracleLimit { count: n, limit });
    }
    let edges: Vec<u32> = h
        .edge_bits
        .iter()
        .map(|e| e.iter().fold(0u32, |m, i| m | (1 << i)))
        .collect();
    let hits = |mask: u32| edges.iter().all(|&e| e & mask != 0);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if !hits(mask) {
            continue;
        }
        let minimal = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .all(|i| !hits(mask & !(1 << i)));
        if minimal {
            out.push(
                (0..n)
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| h.vertices[i].clone())
                    .collect(),
            );
        }
    }
    out.sort();
    Ok(out)
}

/// Berge's incremental algorithm. Edges are processed in input order; the
/// result does not depend on that order.
///
/// Starting from `{∅}`, each edge `e` keeps the current transversals that
/// already meet `e` and replaces the others `T` by `T ∪ {v}` for `v ∈ e`,
/// dropping candidates that are not minimal. A candidate is minimal iff each
/// of its vertices owns a private edge among those processed so far (an edge
/// the candidate meets only at that vertex).
pub fn min_transversals_berge(h: &Hypergraph) -> Vec<VertexSet> {
    let n = h.vertices.len();
    let mut current = vec![BitSet::new(n)];
    for (k, edge) in h.edge_bits.iter().enumerate() {
        let processed = &h.edge_bits[..=k];
        let mut seen: HashSet<BitSet> = HashSet::with_capacity(current.len());
        let mut next = Vec::with_capacity(current.len());
        for t in current {
            if t.intersects(edge) {
                if seen.insert(t.clone()) {
                    next.push(t);
                }
                continue;
            }
            for v in edge.iter() {
                let mut candidate = t.clone();
                candidate.insert(v);
                if has_private_edges(&candidate, processed) && seen.insert(candidate.clone()) {
                    next.push(candidate);
                }
            }
        }
        current = next;
    }
    let mut out: Vec<VertexSet> = current.iter().map(|b| h.set_of(b)).collect();
    out.sort();
    out
}

fn has_private_edges(candidate: &BitSet, edges: &[BitSet]) -> bool {
    let mut owners = BitSet::new(candidate.capacity());
    for e in edges {
        let meet = candidate.intersection(e);
        if meet.len() == 1 {
            if let Some(v) = meet.iter().next() {
                owners.insert(v);
            }
        }
    }
    candidate.is_subset(&owners)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(xs: &[&str]) -> VertexSet {
        xs.iter().copied().collect()
    }

    pub(crate) fn fig2() -> Hypergraph {
        Hypergraph::from_edges([vs(&["v1", "v3", "v5"]), vs(&["v5", "v6"]), vs(&["v1", "v2", "v4"])]).unwrap()
    }

    fn fig2_mintr() -> Vec<VertexSet> {
        vec![
            vs(&["v1", "v5"]),
            vs(&["v1", "v6"]),
            vs(&["v2", "v5"]),
            vs(&["v4", "v5"]),
            vs(&["v2", "v3", "v6"]),
            vs(&["v3", "v4", "v6"]),
        ]
    }

    #[test]
    fn fig2_transversal_checks() {
        let h = fig2();
        assert!(is_transversal(&h, &vs(&["v2", "v3", "v5"])).unwrap());
        assert!(is_transversal(&h, &vs(&["v2", "v5"])).unwrap());
        assert!(!is_transversal(&h, &VertexSet::new()).unwrap());
        assert!(!is_minimal_transversal(&h, &vs(&["v2", "v3", "v5"])).unwrap());
        assert!(is_minimal_transversal(&h, &vs(&["v1", "v5"])).unwrap());
    }

    #[test]
    fn out_of_universe_vertex_is_an_error() {
        let h = fig2();
        assert_eq!(
            is_transversal(&h, &vs(&["v9"])),
            Err(HypergraphError::UnknownVertex("v9".into()))
        );
    }

    #[test]
    fn singleton_on_single_edge_is_minimal() {
        let h = Hypergraph::from_edges([vs(&["a", "b"])]).unwrap();
        assert!(is_minimal_transversal(&h, &vs(&["a"])).unwrap());
    }

    #[test]
    fn fig2_both_enumerators() {
        let h = fig2();
        assert_eq!(min_transversals_bruteforce(&h).unwrap(), fig2_mintr());
        assert_eq!(min_transversals_berge(&h), fig2_mintr());
    }

    #[test]
    fn single_edge_gives_singletons() {
        let h = Hypergraph::from_edges([vs(&["a", "b", "c"])]).unwrap();
        let want = vec![vs(&["a"]), vs(&["b"]), vs(&["c"])];
        assert_eq!(min_transversals_bruteforce(&h).unwrap(), want);
        assert_eq!(min_transversals_berge(&h), want);
    }

    #[test]
    fn disjoint_edges_cross_product() {
        let h = Hypergraph::from_edges([vs(&["a", "b"]), vs(&["c", "d"])]).unwrap();
        let want = vec![vs(&["a", "c"]), vs(&["a", "d"]), vs(&["b", "c"]), vs(&["b", "d"])];
        assert_eq!(min_transversals_berge(&h), want);
    }

    #[test]
    fn empty_hypergraph_has_the_empty_transversal() {
        let h = Hypergraph::new(["a", "b"], Vec::<VertexSet>::new()).unwrap();
        assert_eq!(min_transversals_berge(&h), vec![VertexSet::new()]);
        assert_eq!(min_transversals_bruteforce(&h).unwrap(), vec![VertexSet::new()]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Hypergraph::from_edges([vs(&["a"]), VertexSet::new()]),
            Err(HypergraphError::EmptyEdge { index: 1 })
        );
        assert_eq!(
            Hypergraph::from_edges([vs(&["a", "b"]), vs(&["c"]), vs(&["b", "a"])]),
            Err(HypergraphError::DuplicateEdge { index: 2, first: 0 })
        );
    }

    #[test]
    fn superset_edges_are_kept() {
        let h = Hypergraph::from_edges([vs(&["a"]), vs(&["a", "b"])]).unwrap();
        assert_eq!(h.edges().len(), 2);
        assert_eq!(min_transversals_berge(&h), vec![vs(&["a"])]);
    }

    #[test]
    fn oracle_refuses_large_inputs() {
        let edge: VertexSet = (0..21).map(|i| format!("x{i}")).collect();
        let h = Hypergraph::from_edges([edge]).unwrap();
        assert_eq!(
            min_transversals_bruteforce(&h),
            Err(HypergraphError::OracleLimit { count: 21, limit: 20 })
        );
        assert_eq!(min_transversals_berge(&h).len(), 21);
    }

    #[test]
    fn parse_text_format() {
        let h = Hypergraph::parse("# fig 2\nv1 v3 v5\n\nv5 v6\nv1 v2 v4\n").unwrap();
        assert_eq!(h, fig2());
        assert_eq!(
            Hypergraph::parse("a b\n# c\nb a\n"),
            Err(HypergraphError::Parse {
                line: 3,
                message: "duplicate of the edge on line 1".into()
            })
        );
    }

    #[test]
    fn vertex_set_order_is_cardinality_then_lexicographic() {
        let mut v = vec![
            vs(&["v2", "v3", "v6"]),
            vs(&["v2", "v5"]),
            vs(&["v10", "v1"]),
            vs(&["v1", "v9"]),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                vs(&["v1", "v9"]),
                vs(&["v1", "v10"]),
                vs(&["v2", "v5"]),
                vs(&["v2", "v3", "v6"])
            ]
        );
        assert_eq!(vs(&["b", "a"]).to_string(), "a b");
    }
}
