//! Routing over minimal transversals of the super-peer community hypergraph.
//!
//! Super-peers are clustered by the query components they handle; each
//! cluster is a community and becomes one hyperedge. A strategy is a minimal
//! transversal of that hypergraph: a smallest set of super-peers in which
//! every community is represented. A query is routed along one strategy that
//! contains the source peer's super-peer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{Query, RoutingError, RoutingOutcome};
use crate::ecclat::Clustering;
use crate::hypergraph::{is_minimal_transversal, min_transversals_berge, Hypergraph, VertexSet};
use crate::label::Label;
use crate::mining::{ItemId, MiningError, TransactionDataset};
use crate::network::{Network, SuperPeerId, Term};
use crate::similarity::TermSimilarity;

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no communities")]
    Empty,
    #[error("community {0} has no super-peers")]
    EmptyCommunity(usize),
    #[error("no super-peer has any expertise items")]
    NoItems(#[source] MiningError),
    #[error("strategy {0} is not a minimal transversal")]
    NotMinimal(String),
}

/// Stable term ↔ item id mapping, ids `W1, W2, ...` assigned in sorted term order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ItemDictionary {
    term_of: BTreeMap<ItemId, Term>,
    item_of: BTreeMap<Term, ItemId>,
}

impl ItemDictionary {
    pub fn from_terms<'a, I: IntoIterator<Item = &'a Term>>(terms: I) -> Self {
        let sorted: BTreeSet<&Term> = terms.into_iter().collect();
        let mut d = ItemDictionary::default();
        for (i, t) in sorted.into_iter().enumerate() {
            let id = Label::from(format!("W{}", i + 1));
            d.term_of.insert(id.clone(), t.clone());
            d.item_of.insert(t.clone(), id);
        }
        d
    }

    pub fn item(&self, term: &str) -> Option<&ItemId> {
        self.item_of.get(term)
    }

    pub fn term(&self, item: &ItemId) -> Option<&Term> {
        self.term_of.get(item)
    }

    pub fn len(&self) -> usize {
        self.term_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.term_of.is_empty()
    }
}

/// A query component a super-peer answered successfully.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedQuery {
    pub super_peer: SuperPeerId,
    pub components: Vec<Term>,
}

/// One transaction per super-peer. Items are the components of successfully
/// processed queries when a log is given, otherwise the union of the attached
/// peers' expertise. Super-peers without items are left out.
pub fn expertise_dataset(
    n: &Network,
    log: Option<&[ProcessedQuery]>,
) -> Result<(TransactionDataset, ItemDictionary), CommunityError> {
    let mut terms: BTreeMap<SuperPeerId, BTreeSet<Term>> =
        n.super_peers().keys().map(|id| (id.clone(), BTreeSet::new())).collect();
    match log {
        Some(entries) => {
            for e in entries {
                if let Some(set) = terms.get_mut(&e.super_peer) {
                    set.extend(e.components.iter().cloned());
                } else {
                    warn!("log entry for unknown super-peer {} ignored", e.super_peer);
                }
            }
        }
        None => {
            for p in n.peers().values() {
                terms
                    .get_mut(&p.super_peer)
                    .expect("validated network")
                    .extend(p.expertise.iter().cloned());
            }
        }
    }
    let dict = ItemDictionary::from_terms(terms.values().flatten());
    let rows: Vec<(Label, Vec<ItemId>)> = terms
        .into_iter()
        .filter_map(|(sp, ts)| {
            if ts.is_empty() {
                warn!("super-peer {sp} has no expertise items; excluded from clustering");
                return None;
            }
            let items = ts
                .iter()
                .map(|t| dict.item(t).expect("term in dictionary").clone())
                .collect();
            Some((sp, items))
        })
        .collect();
    let dataset = TransactionDataset::new(rows).map_err(CommunityError::NoItems)?;
    Ok((dataset, dict))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    /// Shared components (terms when built with a dictionary, otherwise item ids).
    pub pattern: BTreeSet<String>,
    pub super_peers: BTreeSet<SuperPeerId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySet {
    pub communities: Vec<Community>,
}

impl CommunitySet {
    /// Selected clusters become communities; item ids are translated back to
    /// terms when a dictionary is supplied.
    pub fn from_clustering(c: &Clustering, dict: Option<&ItemDictionary>) -> Self {
        let communities = c
            .selected
            .iter()
            .map(|cl| Community {
                pattern: cl
                    .pattern
                    .iter()
                    .map(|i| match dict.and_then(|d| d.term(i)) {
                        Some(t) => t.clone(),
                        None => i.to_string(),
                    })
                    .collect(),
                super_peers: cl.members.clone(),
            })
            .collect();
        CommunitySet { communities }
    }

    /// Reads `{pattern} | {super-peers} [| ...]` lines. Braces are optional
    /// and trailing fields are ignored, so `mine` and `cluster` output is
    /// accepted as is.
    pub fn parse(text: &str) -> Result<Self, CommunityError> {
        let mut communities = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('|');
            let (Some(pattern), Some(members)) = (fields.next(), fields.next()) else {
                return Err(CommunityError::Parse {
                    line: lineno + 1,
                    message: "expected `{pattern} | {super-peers}`".into(),
                });
            };
            let strip = |s: &str| s.trim().trim_start_matches('{').trim_end_matches('}').to_owned();
            let super_peers: BTreeSet<SuperPeerId> = strip(members).split_whitespace().map(Label::from).collect();
            if super_peers.is_empty() {
                return Err(CommunityError::Parse {
                    line: lineno + 1,
                    message: "community has no super-peers".into(),
                });
            }
            communities.push(Community {
                pattern: strip(pattern).split_whitespace().map(str::to_owned).collect(),
                super_peers,
            });
        }
        if communities.is_empty() {
            return Err(CommunityError::Empty);
        }
        Ok(CommunitySet { communities })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.communities {
            let pattern: Vec<&str> = c.pattern.iter().map(String::as_str).collect();
            let sps: Vec<&str> = c.super_peers.iter().map(Label::as_str).collect();
            out.push_str(&format!("{{{}}} | {{{}}}\n", pattern.join(" "), sps.join(" ")));
        }
        out
    }

    /// Hypergraph with one hyperedge per distinct community super-peer set.
    pub fn hypergraph(&self) -> Result<Hypergraph, CommunityError> {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        for (i, c) in self.communities.iter().enumerate() {
            if c.super_peers.is_empty() {
                return Err(CommunityError::EmptyCommunity(i));
            }
            let e: VertexSet = c.super_peers.iter().cloned().collect();
            if seen.insert(e.clone()) {
                edges.push(e);
            }
        }
        Ok(Hypergraph::from_edges(edges).expect("edges are non-empty and distinct"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy(pub VertexSet);

impl Strategy {
    pub fn super_peers(&self) -> &BTreeSet<SuperPeerId> {
        self.0.members()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, sp: &SuperPeerId) -> bool {
        self.0.contains(sp)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// All minimal transversals of the community hypergraph, sorted by size then
/// lexicographically. Each one is re-checked for minimality.
pub fn build_strategies(cs: &CommunitySet) -> Result<Vec<Strategy>, CommunityError> {
    if cs.communities.is_empty() {
        return Err(CommunityError::Empty);
    }
    let h = cs.hypergraph()?;
    let mut out = Vec::new();
    for t in min_transversals_berge(&h) {
        if !is_minimal_transversal(&h, &t).expect("vertices come from h") {
            return Err(CommunityError::NotMinimal(t.to_string()));
        }
        out.push(Strategy(t));
    }
    out.sort();
    Ok(out)
}

/// One strategy per line, super-peer ids separated by spaces.
pub fn strategies_to_text(strategies: &[Strategy]) -> String {
    strategies.iter().map(|s| format!("{s}\n")).collect()
}

pub fn parse_strategies(text: &str) -> Result<Vec<Strategy>, CommunityError> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(Strategy(line.split_whitespace().collect()));
    }
    Ok(out)
}

/// How strategy members are pruned once a strategy is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Keep members whose community patterns have positive affinity to the
    /// query; keep everyone if none do.
    #[default]
    Affinity,
    /// Send to every member of the chosen strategy.
    KeepAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraverseParams {
    pub theta_peer: f64,
    pub filter: FilterMode,
}

impl Default for TraverseParams {
    fn default() -> Self {
        TraverseParams {
            theta_peer: 0.5,
            filter: FilterMode::Affinity,
        }
    }
}

/// Strategies plus the lookups routing needs.
#[derive(Clone, Debug)]
pub struct StrategyIndex {
    strategies: Vec<Strategy>,
    /// Union of the patterns of every community a super-peer belongs to.
    patterns: BTreeMap<SuperPeerId, BTreeSet<String>>,
    by_member: BTreeMap<SuperPeerId, Vec<usize>>,
}

impl StrategyIndex {
    pub fn build(cs: &CommunitySet) -> Result<Self, CommunityError> {
        let strategies = build_strategies(cs)?;
        Ok(StrategyIndex::new(cs, strategies))
    }

    pub fn new(cs: &CommunitySet, strategies: Vec<Strategy>) -> Self {
        let mut patterns: BTreeMap<SuperPeerId, BTreeSet<String>> = BTreeMap::new();
        for c in &cs.communities {
            for sp in &c.super_peers {
                patterns
                    .entry(sp.clone())
                    .or_default()
                    .extend(c.pattern.iter().cloned());
            }
        }
        let mut by_member: BTreeMap<SuperPeerId, Vec<usize>> = BTreeMap::new();
        for (i, s) in strategies.iter().enumerate() {
            for sp in s.super_peers() {
                by_member.entry(sp.clone()).or_default().push(i);
            }
        }
        StrategyIndex {
            strategies,
            patterns,
            by_member,
        }
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    /// Strategies containing `sp`.
    pub fn containing<'a>(&'a self, sp: &SuperPeerId) -> impl Iterator<Item = &'a Strategy> + 'a {
        self.by_member
            .get(sp)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.strategies[i])
    }

    pub fn is_member(&self, sp: &SuperPeerId) -> bool {
        self.by_member.contains_key(sp)
    }

    /// Per subject term, the best similarity among `sp`'s community pattern terms.
    fn term_scores(&self, sp: &SuperPeerId, q: &Query, sim: &dyn TermSimilarity) -> Vec<f64> {
        let pattern = self.patterns.get(sp);
        q.subject
            .iter()
            .map(|s| {
                pattern
                    .into_iter()
                    .flatten()
                    .map(|t| sim.similarity(s, t))
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Routes `q` along a single strategy.
///
/// The source's super-peer scores its own peers. If it belongs to no
/// strategy, it first hands the query to a bridge: the smallest strategy
/// member among its neighbors, or the smallest member overall. Among the
/// strategies containing the entry super-peer, the one whose community
/// patterns best cover the query is chosen (then the smaller, then the
/// lexicographically first). Its members are filtered per
/// [`TraverseParams::filter`] and each kept member scores its peers.
pub fn one_strategy_route(
    n: &Network,
    q: &Query,
    index: &StrategyIndex,
    params: TraverseParams,
    sim: &dyn TermSimilarity,
) -> Result<RoutingOutcome, RoutingError> {
    if index.strategies.is_empty() {
        return Err(RoutingError::NoStrategies);
    }
    let source = n
        .peers()
        .get(&q.source)
        .ok_or_else(|| RoutingError::UnknownSource(q.source.clone()))?;
    let home = n.super_peer(&source.super_peer)?;

    let mut out = RoutingOutcome {
        messages: 1,
        hop_depth: 1,
        contacted: vec![home.id.clone()],
        ..Default::default()
    };
    out.evaluate(n, home, q, params.theta_peer, sim)?;

    let mut entry = home.id.clone();
    if !index.is_member(&entry) {
        if q.ttl < 2 {
            out.count_responses();
            return Ok(out);
        }
        let bridge = home
            .neighbors
            .iter()
            .find(|nb| index.is_member(nb))
            .or_else(|| index.by_member.keys().next())
            .expect("non-empty strategies have members")
            .clone();
        out.messages += 1;
        out.hop_depth += 1;
        out.contacted.push(bridge.clone());
        out.evaluate(n, n.super_peer(&bridge)?, q, params.theta_peer, sim)?;
        entry = bridge;
    }

    let mut scores: BTreeMap<&SuperPeerId, Vec<f64>> = BTreeMap::new();
    let candidates: Vec<&Strategy> = index.containing(&entry).collect();
    for s in &candidates {
        for sp in s.super_peers() {
            scores.entry(sp).or_insert_with(|| index.term_scores(sp, q, sim));
        }
    }
    let strategy_affinity = |s: &Strategy| -> f64 {
        let k = q.subject.len();
        (0..k)
            .map(|j| s.super_peers().iter().map(|sp| scores[sp][j]).fold(0.0, f64::max))
            .sum::<f64>()
            / k as f64
    };
    let chosen = candidates
        .iter()
        .map(|s| (strategy_affinity(s), *s))
        .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(a.1)))
        .map(|(_, s)| s)
        .expect("entry super-peer belongs to a strategy");

    let mut kept: Vec<&SuperPeerId> = match params.filter {
        FilterMode::KeepAll => chosen.super_peers().iter().collect(),
        FilterMode::Affinity => chosen
            .super_peers()
            .iter()
            .filter(|sp| scores[sp].iter().sum::<f64>() > 0.0)
            .collect(),
    };
    if kept.is_empty() {
        kept = chosen.super_peers().iter().collect();
    }

    if out.hop_depth < q.ttl {
        let mut sent = false;
        for sp in kept {
            if out.contacted.contains(sp) {
                continue;
            }
            out.messages += 1;
            out.contacted.push(sp.clone());
            out.evaluate(n, n.super_peer(sp)?, q, params.theta_peer, sim)?;
            sent = true;
        }
        if sent {
            out.hop_depth += 1;
        }
    }
    out.count_responses();
    Ok(out)
}
