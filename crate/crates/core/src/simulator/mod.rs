//! Baseline versus transversal routing over generated workloads.
//!
//! Queries do not interact, so each one is routed to completion in turn and
//! its cost is read off the routing outcome: latency is
//! `hop_depth * perHopCost + cap_evaluations * perCapEvalCost`.

mod config;
mod generator;
mod report;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{route_baseline, BaselineParams, Query, RoutingError, RoutingOutcome};
use crate::ecclat::cluster_dataset;
use crate::metrics::{ground_truth, precision_with, recall_with};
use crate::network::{Network, NetworkError};
use crate::transversal::{
    expertise_dataset, one_strategy_route, CommunityError, CommunitySet, StrategyIndex, TraverseParams,
};

pub use config::{GeneratorParams, LatencyModel, Range, SizePoint, SweepConfig, WorkloadConfig};
pub use generator::{generate_network, peer_id, super_peer_id, Generated};
pub use report::{
    aggregate_csv, aggregate_jsonl, aggregate_rows, per_query_csv, per_query_jsonl, query_rows, AggregateRow, QueryRow,
    AGGREGATE_HEADER, PER_QUERY_HEADER,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("infeasible config: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Community(#[from] CommunityError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Baseline,
    Traverse,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Baseline => "baseline",
            Architecture::Traverse => "traverse",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub messages: u64,
    pub hop_depth: u32,
    pub latency: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub queries: usize,
    pub total_messages: u64,
    pub mean_messages: f64,
    pub mean_hops: f64,
    pub mean_latency: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
}

impl Aggregates {
    pub fn from_records<'a, I: IntoIterator<Item = &'a QueryRecord>>(records: I) -> Self {
        let mut a = Aggregates::default();
        let (mut hops, mut latency, mut precision, mut recall) = (0.0, 0.0, 0.0, 0.0);
        for r in records {
            a.queries += 1;
            a.total_messages += r.messages;
            hops += f64::from(r.hop_depth);
            latency += r.latency;
            precision += r.precision;
            recall += r.recall;
        }
        if a.queries > 0 {
            let n = a.queries as f64;
            a.mean_messages = a.total_messages as f64 / n;
            a.mean_hops = hops / n;
            a.mean_latency = latency / n;
            a.mean_precision = precision / n;
            a.mean_recall = recall / n;
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub architecture: Architecture,
    pub n_peers: usize,
    pub n_super_peers: usize,
    pub seed: u64,
    pub per_query: Vec<QueryRecord>,
    pub aggregates: Aggregates,
}

/// Everything both architectures share for one run.
#[derive(Clone, Debug)]
pub struct Workload {
    pub network: Network,
    pub queries: Vec<Query>,
    pub communities: CommunitySet,
    pub index: StrategyIndex,
}

impl Workload {
    /// Generates the network and query stream, clusters the super-peers'
    /// expertise and computes the strategies.
    pub fn generate(cfg: &WorkloadConfig) -> Result<Self, SimError> {
        let mut g = generate_network(cfg)?;
        let queries = g.queries(cfg)?;
        let network = g.network;
        let communities = communities_for(&network, cfg)?;
        let index = StrategyIndex::build(&communities)?;
        Ok(Workload {
            network,
            queries,
            communities,
            index,
        })
    }
}

/// ECCLAT communities over the super-peers' pooled peer expertise.
pub fn communities_for(network: &Network, cfg: &WorkloadConfig) -> Result<CommunitySet, SimError> {
    let (dataset, dict) = expertise_dataset(network, None)?;
    let clustering = cluster_dataset(&dataset, cfg.minfr, cfg.m);
    Ok(CommunitySet::from_clustering(&clustering, Some(&dict)))
}

pub fn run_experiment(cfg: &WorkloadConfig) -> Result<(ExperimentResult, ExperimentResult), SimError> {
    let w = Workload::generate(cfg)?;
    run_workload(&w, cfg)
}

/// Routes every query of `w` with both architectures.
pub fn run_workload(w: &Workload, cfg: &WorkloadConfig) -> Result<(ExperimentResult, ExperimentResult), SimError> {
    let sim = cfg.similarity;
    let baseline = BaselineParams {
        theta_peer: cfg.theta_peer,
        theta_sp: cfg.theta_sp,
    };
    let traverse = TraverseParams {
        theta_peer: cfg.theta_peer,
        filter: cfg.filter,
    };
    let mut b = Vec::with_capacity(w.queries.len());
    let mut t = Vec::with_capacity(w.queries.len());
    for q in &w.queries {
        let relevant = ground_truth(&w.network, q, cfg.epsilon_rel, &sim)?;
        let record = |o: RoutingOutcome| {
            let retrieved = o.retrieved();
            QueryRecord {
                query_id: q.id.to_string(),
                messages: o.messages,
                hop_depth: o.hop_depth,
                latency: f64::from(o.hop_depth) * cfg.latency.per_hop_cost
                    + o.cap_evaluations as f64 * cfg.latency.per_cap_eval_cost,
                precision: precision_with(&retrieved, &relevant, cfg.empty_convention),
                recall: recall_with(&retrieved, &relevant, cfg.empty_convention),
            }
        };
        b.push(record(route_baseline(&w.network, q, baseline, &sim)?));
        t.push(record(one_strategy_route(&w.network, q, &w.index, traverse, &sim)?));
    }
    let result = |architecture, per_query: Vec<QueryRecord>| ExperimentResult {
        architecture,
        n_peers: w.network.peers().len(),
        n_super_peers: w.network.super_peers().len(),
        seed: cfg.seed,
        aggregates: Aggregates::from_records(&per_query),
        per_query,
    };
    Ok((result(Architecture::Baseline, b), result(Architecture::Traverse, t)))
}
