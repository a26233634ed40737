//! Two-level semantic routing scored by peer capacity.
//!
//! A query goes from its source peer to that peer's super-peer, which scores
//! its own peers and forwards the query to each neighbor super-peer whose
//! theme looks relevant. Neighbors score their own peers and do not forward
//! further.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::Label;
use crate::network::{Network, NetworkError, Peer, PeerId, SuperPeer, SuperPeerId, Term};
use crate::similarity::{affinity, TermSimilarity};

pub type QueryId = Label;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("unknown source peer `{0}`")]
    UnknownSource(PeerId),
    #[error("query subject is empty")]
    EmptySubject,
    #[error("peer `{0}` has no expertise")]
    EmptyExpertise(PeerId),
    #[error("query ttl must be at least 1")]
    ZeroTtl,
    #[error("no routing strategies built")]
    NoStrategies,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: QueryId,
    pub source: PeerId,
    pub subject: BTreeSet<Term>,
    pub ttl: u32,
}

impl Query {
    pub fn new<I, S>(id: impl Into<Label>, source: impl Into<Label>, subject: I, ttl: u32) -> Result<Self, RoutingError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Term>,
    {
        let subject: BTreeSet<Term> = subject.into_iter().map(Into::into).collect();
        if subject.is_empty() {
            return Err(RoutingError::EmptySubject);
        }
        if ttl == 0 {
            return Err(RoutingError::ZeroTtl);
        }
        Ok(Query {
            id: id.into(),
            source: source.into(),
            subject,
            ttl,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Answer {
    pub peer: PeerId,
    pub super_peer: SuperPeerId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingOutcome {
    pub answers: BTreeSet<Answer>,
    pub messages: u64,
    pub hop_depth: u32,
    pub cap_evaluations: u64,
    /// Super-peers that received the query, in contact order.
    pub contacted: Vec<SuperPeerId>,
}

impl RoutingOutcome {
    pub fn retrieved(&self) -> BTreeSet<PeerId> {
        self.answers.iter().map(|a| a.peer.clone()).collect()
    }

    /// Super-peers that returned at least one answer.
    pub fn answering_super_peers(&self) -> BTreeSet<SuperPeerId> {
        self.answers.iter().map(|a| a.super_peer.clone()).collect()
    }

    /// Scores the peers of `sp` and records those reaching `theta_peer`.
    pub(crate) fn evaluate(
        &mut self,
        n: &Network,
        sp: &SuperPeer,
        q: &Query,
        theta_peer: f64,
        sim: &dyn TermSimilarity,
    ) -> Result<(), RoutingError> {
        for pid in &sp.peers {
            let peer = n.peer(pid)?;
            self.cap_evaluations += 1;
            if cap(peer, q, sim)? >= theta_peer {
                self.answers.insert(Answer {
                    peer: pid.clone(),
                    super_peer: sp.id.clone(),
                });
            }
        }
        Ok(())
    }

    /// One response message per answering super-peer.
    pub(crate) fn count_responses(&mut self) {
        self.messages += self.answering_super_peers().len() as u64;
    }
}

/// `Cap(P, Q) = (1/|Sub(Q)|) Σ_{s ∈ Sub(Q)} max_{e ∈ Exp(P)} Ss(s, e)`.
pub fn cap(p: &Peer, q: &Query, sim: &dyn TermSimilarity) -> Result<f64, RoutingError> {
    if q.subject.is_empty() {
        return Err(RoutingError::EmptySubject);
    }
    if p.expertise.is_empty() {
        return Err(RoutingError::EmptyExpertise(p.id.clone()));
    }
    Ok(affinity(
        q.subject.iter().map(String::as_str),
        p.expertise.iter().map(String::as_str),
        sim,
    ))
}

/// How well a super-peer's theme concepts cover the query subject.
pub fn theme_relevance(sp: &SuperPeer, q: &Query, sim: &dyn TermSimilarity) -> f64 {
    affinity(
        q.subject.iter().map(String::as_str),
        sp.theme.concepts.iter().map(String::as_str),
        sim,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub theta_peer: f64,
    pub theta_sp: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            theta_peer: 0.5,
            theta_sp: 0.3,
        }
    }
}

pub fn route_baseline(
    n: &Network,
    q: &Query,
    params: BaselineParams,
    sim: &dyn TermSimilarity,
) -> Result<RoutingOutcome, RoutingError> {
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

    if q.ttl >= 2 {
        for nb in &home.neighbors {
            let sp = n.super_peer(nb)?;
            if theme_relevance(sp, q, sim) >= params.theta_sp {
                out.messages += 1;
                out.hop_depth = 2;
                out.contacted.push(sp.id.clone());
                out.evaluate(n, sp, q, params.theta_peer, sim)?;
            }
        }
    }
    out.count_responses();
    Ok(out)
}
