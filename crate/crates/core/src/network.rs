//! Hybrid overlay: peers attached to super-peers, super-peers linked to each
//! other, each super-peer publishing a theme.
//!
//! The JSON topology document looks like:
//!
//! ```json
//! {
//!   "superpeers": [
//!     { "id": "SP1",
//!       "theme": { "concepts": ["car", "engine"],
//!                  "roles": [{ "domain": "car", "label": "has", "codomain": "engine" }],
//!                  "isa": [{ "sub": "engine", "super": "car" }] },
//!       "neighbors": ["SP2"] }
//!   ],
//!   "peers": [ { "id": "P1", "expertise": ["car"], "superpeer": "SP1" } ]
//! }
//! ```
//!
//! `roles`, `isa` and `neighbors` may be omitted. Neighbor links may be listed
//! on one side only; they are made symmetric on load.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::Label;
use crate::similarity::{affinity, TermSimilarity};

pub type PeerId = Label;
pub type SuperPeerId = Label;
pub type Term = String;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("duplicate super-peer id `{0}`")]
    DuplicateSuperPeer(SuperPeerId),
    #[error("duplicate peer id `{0}`")]
    DuplicatePeer(PeerId),
    #[error("dangling super-peer reference: peer `{peer}` names `{super_peer}`")]
    DanglingSuperPeer { peer: PeerId, super_peer: SuperPeerId },
    #[error("dangling neighbor reference: `{from}` names `{to}`")]
    DanglingNeighbor { from: SuperPeerId, to: SuperPeerId },
    #[error("super-peer `{0}` lists itself as a neighbor")]
    SelfLoop(SuperPeerId),
    #[error("super-peer `{super_peer}`: role endpoint `{concept}` is not a theme concept")]
    RoleEndpoint { super_peer: SuperPeerId, concept: String },
    #[error("super-peer `{super_peer}`: is-a endpoint `{concept}` is not a theme concept")]
    IsaEndpoint { super_peer: SuperPeerId, concept: String },
    #[error("super-peer `{0}`: is-a hierarchy has a cycle")]
    IsaCycle(SuperPeerId),
    #[error("peer `{0}` has no expertise")]
    EmptyExpertise(PeerId),
    #[error("unknown super-peer `{0}`")]
    UnknownSuperPeer(SuperPeerId),
    #[error("unknown peer `{0}`")]
    UnknownPeer(PeerId),
    #[error("peer `{peer}` is already attached to `{super_peer}`")]
    AlreadyAttached { peer: PeerId, super_peer: SuperPeerId },
    #[error("invalid advertisement: {0}")]
    InvalidAdvertisement(String),
    #[error("malformed topology document: {0}")]
    Document(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Role {
    pub domain: String,
    pub label: String,
    pub codomain: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsA {
    pub sub: String,
    #[serde(rename = "super")]
    pub parent: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThemeDescription {
    pub concepts: BTreeSet<String>,
    #[serde(default)]
    pub roles: BTreeSet<Role>,
    #[serde(default)]
    pub isa: BTreeSet<IsA>,
}

impl ThemeDescription {
    pub fn from_concepts<I: IntoIterator<Item = S>, S: Into<String>>(concepts: I) -> Self {
        ThemeDescription {
            concepts: concepts.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    fn validate(&self, owner: &SuperPeerId) -> Result<(), NetworkError> {
        for r in &self.roles {
            for c in [&r.domain, &r.codomain] {
                if !self.concepts.contains(c) {
                    return Err(NetworkError::RoleEndpoint {
                        super_peer: owner.clone(),
                        concept: c.clone(),
                    });
                }
            }
        }
        for i in &self.isa {
            for c in [&i.sub, &i.parent] {
                if !self.concepts.contains(c) {
                    return Err(NetworkError::IsaEndpoint {
                        super_peer: owner.clone(),
                        concept: c.clone(),
                    });
                }
            }
        }
        if !isa_is_acyclic(&self.isa) {
            return Err(NetworkError::IsaCycle(owner.clone()));
        }
        Ok(())
    }
}

/// Kahn's topological sort over the is-a edges.
fn isa_is_acyclic(isa: &BTreeSet<IsA>) -> bool {
    let mut indegree: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in isa {
        indegree.entry(&e.sub).or_insert(0);
        *indegree.entry(&e.parent).or_insert(0) += 1;
        out.entry(&e.sub).or_default().push(&e.parent);
    }
    let mut ready: Vec<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&c, _)| c).collect();
    let mut visited = 0;
    while let Some(c) = ready.pop() {
        visited += 1;
        for &next in out.get(c).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(next).expect("endpoint registered");
            *d -= 1;
            if *d == 0 {
                ready.push(next);
            }
        }
    }
    visited == indegree.len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Peer {
    pub id: PeerId,
    pub expertise: BTreeSet<Term>,
    pub super_peer: SuperPeerId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperPeer {
    pub id: SuperPeerId,
    pub theme: ThemeDescription,
    pub peers: BTreeSet<PeerId>,
    pub neighbors: BTreeSet<SuperPeerId>,
}

/// A peer's request to join a super-peer's community.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainAdvertisement {
    pub pid: PeerId,
    pub expertise: BTreeSet<Term>,
    pub topic: String,
    pub epsilon_acc: f64,
    pub ttl: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdvertiseOutcome {
    Accepted(f64),
    Rejected(f64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Network {
    peers: BTreeMap<PeerId, Peer>,
    super_peers: BTreeMap<SuperPeerId, SuperPeer>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn peers(&self) -> &BTreeMap<PeerId, Peer> {
        &self.peers
    }

    pub fn super_peers(&self) -> &BTreeMap<SuperPeerId, SuperPeer> {
        &self.super_peers
    }

    pub fn peer(&self, id: &PeerId) -> Result<&Peer, NetworkError> {
        self.peers.get(id).ok_or_else(|| NetworkError::UnknownPeer(id.clone()))
    }

    pub fn super_peer(&self, id: &SuperPeerId) -> Result<&SuperPeer, NetworkError> {
        self.super_peers
            .get(id)
            .ok_or_else(|| NetworkError::UnknownSuperPeer(id.clone()))
    }

    pub fn add_super_peer(&mut self, id: SuperPeerId, theme: ThemeDescription) -> Result<(), NetworkError> {
        if self.super_peers.contains_key(&id) {
            return Err(NetworkError::DuplicateSuperPeer(id));
        }
        theme.validate(&id)?;
        self.super_peers.insert(
            id.clone(),
            SuperPeer {
                id,
                theme,
                peers: BTreeSet::new(),
                neighbors: BTreeSet::new(),
            },
        );
        Ok(())
    }

    /// Adds the symmetric link `a - b`.
    pub fn link(&mut self, a: &SuperPeerId, b: &SuperPeerId) -> Result<(), NetworkError> {
        if a == b {
            return Err(NetworkError::SelfLoop(a.clone()));
        }
        for (from, to) in [(a, b), (b, a)] {
            if !self.super_peers.contains_key(to) {
                return Err(NetworkError::DanglingNeighbor {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
        }
        self.super_peers
            .get_mut(a)
            .expect("checked")
            .neighbors
            .insert(b.clone());
        self.super_peers
            .get_mut(b)
            .expect("checked")
            .neighbors
            .insert(a.clone());
        Ok(())
    }

    pub fn attach_peer<I, S>(&mut self, id: PeerId, expertise: I, super_peer: &SuperPeerId) -> Result<(), NetworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Term>,
    {
        let expertise: BTreeSet<Term> = expertise.into_iter().map(Into::into).collect();
        if expertise.is_empty() {
            return Err(NetworkError::EmptyExpertise(id));
        }
        if let Some(p) = self.peers.get(&id) {
            return Err(NetworkError::AlreadyAttached {
                peer: id,
                super_peer: p.super_peer.clone(),
            });
        }
        let sp = self
            .super_peers
            .get_mut(super_peer)
            .ok_or_else(|| NetworkError::DanglingSuperPeer {
                peer: id.clone(),
                super_peer: super_peer.clone(),
            })?;
        sp.peers.insert(id.clone());
        self.peers.insert(
            id.clone(),
            Peer {
                id,
                expertise,
                super_peer: super_peer.clone(),
            },
        );
        Ok(())
    }

    /// Scores the advertised expertise against the target theme (mean over
    /// expertise terms of the best match among concept labels) and attaches
    /// the peer when the score reaches `epsilon_acc`.
    pub fn advertise(
        &mut self,
        da: &DomainAdvertisement,
        target: &SuperPeerId,
        sim: &dyn TermSimilarity,
    ) -> Result<AdvertiseOutcome, NetworkError> {
        if da.ttl < 1 {
            return Err(NetworkError::InvalidAdvertisement("ttl must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&da.epsilon_acc) {
            return Err(NetworkError::InvalidAdvertisement(format!(
                "epsilon_acc {} outside [0, 1]",
                da.epsilon_acc
            )));
        }
        let sp = self.super_peer(target)?;
        if let Some(p) = self.peers.get(&da.pid) {
            return Err(NetworkError::AlreadyAttached {
                peer: da.pid.clone(),
                super_peer: p.super_peer.clone(),
            });
        }
        let score = affinity(
            da.expertise.iter().map(String::as_str),
            sp.theme.concepts.iter().map(String::as_str),
            sim,
        );
        if score >= da.epsilon_acc {
            self.attach_peer(da.pid.clone(), da.expertise.iter().cloned(), target)?;
            Ok(AdvertiseOutcome::Accepted(score))
        } else {
            Ok(AdvertiseOutcome::Rejected(score))
        }
    }

    pub fn from_document(doc: TopologyDocument) -> Result<Self, NetworkError> {
        let mut n = Network::new();
        for sp in &doc.superpeers {
            n.add_super_peer(sp.id.clone(), sp.theme.clone())?;
        }
        for sp in &doc.superpeers {
            for nb in &sp.neighbors {
                n.link(&sp.id, nb)?;
            }
        }
        for p in doc.peers {
            if n.peers.contains_key(&p.id) {
                return Err(NetworkError::DuplicatePeer(p.id));
            }
            n.attach_peer(p.id, p.expertise, &p.superpeer)?;
        }
        Ok(n)
    }

    pub fn to_document(&self) -> TopologyDocument {
        TopologyDocument {
            superpeers: self
                .super_peers
                .values()
                .map(|sp| SuperPeerDocument {
                    id: sp.id.clone(),
                    theme: sp.theme.clone(),
                    neighbors: sp.neighbors.iter().cloned().collect(),
                })
                .collect(),
            peers: self
                .peers
                .values()
                .map(|p| PeerDocument {
                    id: p.id.clone(),
                    expertise: p.expertise.iter().cloned().collect(),
                    superpeer: p.super_peer.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("topology serializes")
    }
}

/// Parses and validates a JSON topology document.
pub fn load_topology(json: &str) -> Result<Network, NetworkError> {
    let doc: TopologyDocument = serde_json::from_str(json).map_err(|e| NetworkError::Document(e.to_string()))?;
    Network::from_document(doc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    pub superpeers: Vec<SuperPeerDocument>,
    #[serde(default)]
    pub peers: Vec<PeerDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperPeerDocument {
    pub id: SuperPeerId,
    #[serde(default)]
    pub theme: ThemeDescription,
    #[serde(default)]
    pub neighbors: Vec<SuperPeerId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeerDocument {
    pub id: PeerId,
    pub expertise: Vec<Term>,
    pub superpeer: SuperPeerId,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::SimilarityModel;

    const MINIMAL: &str = r#"{
        "superpeers": [
            {"id": "SP1", "theme": {"concepts": ["car", "engine"]}, "neighbors": ["SP2"]},
            {"id": "SP2", "theme": {"concepts": ["music"]}}
        ],
        "peers": [
            {"id": "P1", "expertise": ["car"], "superpeer": "SP1"},
            {"id": "P2", "expertise": ["engine"], "superpeer": "SP1"},
            {"id": "P3", "expertise": ["music"], "superpeer": "SP2"},
            {"id": "P4", "expertise": ["jazz"], "superpeer": "SP2"}
        ]
    }"#;

    fn sp(id: &str) -> SuperPeerId {
        Label::from(id)
    }

    #[test]
    fn minimal_document_loads() {
        let n = load_topology(MINIMAL).unwrap();
        assert_eq!(n.peers().len(), 4);
        assert_eq!(n.super_peers().len(), 2);
        // one-sided link made symmetric
        assert!(n.super_peer(&sp("SP2")).unwrap().neighbors.contains(&sp("SP1")));
        for p in n.peers().values() {
            assert!(n.super_peer(&p.super_peer).unwrap().peers.contains(&p.id));
        }
    }

    #[test]
    fn round_trip() {
        let n = load_topology(MINIMAL).unwrap();
        let again = load_topology(&n.to_json()).unwrap();
        assert_eq!(n, again);
        assert_eq!(n.to_json(), again.to_json());
    }

    #[test]
    fn dangling_super_peer() {
        let doc = r#"{"superpeers": [{"id": "SP1"}],
                      "peers": [{"id": "P1", "expertise": ["x"], "superpeer": "SP9"}]}"#;
        let err = load_topology(doc).unwrap_err();
        assert!(err.to_string().starts_with("dangling super-peer reference"));
    }

    #[test]
    fn validation_errors() {
        let cases = [
            (r#"{"superpeers": [{"id": "A"}, {"id": "A"}]}"#, "duplicate super-peer"),
            (r#"{"superpeers": [{"id": "A", "neighbors": ["A"]}]}"#, "lists itself"),
            (
                r#"{"superpeers": [{"id": "A", "neighbors": ["B"]}]}"#,
                "dangling neighbor",
            ),
            (
                r#"{"superpeers": [{"id": "A"}], "peers": [
                    {"id": "P", "expertise": ["x"], "superpeer": "A"},
                    {"id": "P", "expertise": ["y"], "superpeer": "A"}]}"#,
                "duplicate peer",
            ),
            (
                r#"{"superpeers": [{"id": "A"}], "peers": [{"id": "P", "expertise": [], "superpeer": "A"}]}"#,
                "no expertise",
            ),
            (
                r#"{"superpeers": [{"id": "A", "theme": {"concepts": ["a"],
                    "roles": [{"domain": "a", "label": "r", "codomain": "b"}]}}]}"#,
                "role endpoint",
            ),
            (
                r#"{"superpeers": [{"id": "A", "theme": {"concepts": ["a", "b"],
                    "isa": [{"sub": "a", "super": "b"}, {"sub": "b", "super": "a"}]}}]}"#,
                "cycle",
            ),
            (r#"{"superpeers": [{"id": "A", "color": 1}]}"#, "malformed"),
        ];
        for (doc, needle) in cases {
            let err = load_topology(doc).unwrap_err().to_string();
            assert!(err.contains(needle), "{err} should mention {needle}");
        }
    }

    #[test]
    fn isa_hierarchy_accepted() {
        let doc = r#"{"superpeers": [{"id": "A", "theme": {"concepts": ["vehicle", "car", "suv"],
            "isa": [{"sub": "car", "super": "vehicle"}, {"sub": "suv", "super": "car"},
                    {"sub": "suv", "super": "vehicle"}]}}]}"#;
        assert!(load_topology(doc).is_ok());
    }

    fn da(pid: &str, expertise: &[&str], eps: f64) -> DomainAdvertisement {
        DomainAdvertisement {
            pid: Label::from(pid),
            expertise: expertise.iter().map(|s| s.to_string()).collect(),
            topic: "t".into(),
            epsilon_acc: eps,
            ttl: 1,
        }
    }

    #[test]
    fn advertisement_outcomes() {
        let mut n = load_topology(MINIMAL).unwrap();
        let exact = SimilarityModel::Exact;
        assert_eq!(
            n.advertise(&da("N1", &["car", "engine"], 1.0), &sp("SP1"), &exact)
                .unwrap(),
            AdvertiseOutcome::Accepted(1.0)
        );
        assert_eq!(n.peer(&Label::from("N1")).unwrap().super_peer, sp("SP1"));
        assert_eq!(
            n.advertise(&da("N2", &["opera"], 0.5), &sp("SP1"), &exact).unwrap(),
            AdvertiseOutcome::Rejected(0.0)
        );
        assert!(n.peer(&Label::from("N2")).is_err());
        assert_eq!(
            n.advertise(&da("N3", &["car", "opera"], 0.4), &sp("SP1"), &exact)
                .unwrap(),
            AdvertiseOutcome::Accepted(0.5)
        );
    }

    #[test]
    fn advertisement_errors() {
        let mut n = load_topology(MINIMAL).unwrap();
        let exact = SimilarityModel::Exact;
        assert_eq!(
            n.advertise(&da("N1", &["car"], 0.1), &sp("SP9"), &exact),
            Err(NetworkError::UnknownSuperPeer(sp("SP9")))
        );
        assert_eq!(
            n.advertise(&da("P1", &["music"], 0.1), &sp("SP2"), &exact),
            Err(NetworkError::AlreadyAttached {
                peer: Label::from("P1"),
                super_peer: sp("SP1")
            })
        );
        let mut bad = da("N1", &["car"], 0.1);
        bad.ttl = 0;
        assert!(matches!(
            n.advertise(&bad, &sp("SP1"), &exact),
            Err(NetworkError::InvalidAdvertisement(_))
        ));
    }
}
