//! Frozen CSV and JSON Lines layouts.
//!
//! Per-query rows: `size,superpeers,architecture,query_id,messages,hops,latency,precision,recall`
//! where `size` is the peer count and `query_id` is `s<seed>-<query>`.
//! Aggregate rows: `size,superpeers,architecture,metric,value`, pooled over
//! every per-query row of the same (size, superpeers, architecture). Reals
//! are printed with six decimals.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Aggregates, Architecture, ExperimentResult, QueryRecord};

pub const PER_QUERY_HEADER: &str = "size,superpeers,architecture,query_id,messages,hops,latency,precision,recall";
pub const AGGREGATE_HEADER: &str = "size,superpeers,architecture,metric,value";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub size: usize,
    pub superpeers: usize,
    pub architecture: Architecture,
    pub query_id: String,
    pub messages: u64,
    pub hops: u32,
    pub latency: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub size: usize,
    pub superpeers: usize,
    pub architecture: Architecture,
    pub metric: &'static str,
    pub value: f64,
}

fn sorted(results: &[ExperimentResult]) -> Vec<&ExperimentResult> {
    let mut v: Vec<&ExperimentResult> = results.iter().collect();
    v.sort_by_key(|r| (r.n_peers, r.n_super_peers, r.architecture, r.seed));
    v
}

/// Rows in a fixed order whatever order the results arrive in.
pub fn query_rows(results: &[ExperimentResult]) -> Vec<QueryRow> {
    sorted(results)
        .into_iter()
        .flat_map(|r| {
            r.per_query.iter().map(move |q| QueryRow {
                size: r.n_peers,
                superpeers: r.n_super_peers,
                architecture: r.architecture,
                query_id: format!("s{}-{}", r.seed, q.query_id),
                messages: q.messages,
                hops: q.hop_depth,
                latency: q.latency,
                precision: q.precision,
                recall: q.recall,
            })
        })
        .collect()
}

pub fn aggregate_rows(results: &[ExperimentResult]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(usize, usize, Architecture), Vec<&QueryRecord>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.n_peers, r.n_super_peers, r.architecture))
            .or_default()
            .extend(r.per_query.iter());
    }
    let mut out = Vec::new();
    for ((size, superpeers, architecture), records) in groups {
        let a = Aggregates::from_records(records);
        for (metric, value) in [
            ("queries", a.queries as f64),
            ("messages_total", a.total_messages as f64),
            ("messages_mean", a.mean_messages),
            ("hops_mean", a.mean_hops),
            ("latency_mean", a.mean_latency),
            ("precision_mean", a.mean_precision),
            ("recall_mean", a.mean_recall),
        ] {
            out.push(AggregateRow {
                size,
                superpeers,
                architecture,
                metric,
                value,
            });
        }
    }
    out
}

pub fn per_query_csv(results: &[ExperimentResult]) -> String {
    let mut s = String::from(PER_QUERY_HEADER);
    s.push('\n');
    for r in query_rows(results) {
        writeln!(
            s,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.size, r.superpeers, r.architecture, r.query_id, r.messages, r.hops, r.latency, r.precision, r.recall
        )
        .expect("writing to a String");
    }
    s
}

pub fn aggregate_csv(results: &[ExperimentResult]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for r in aggregate_rows(results) {
        writeln!(
            s,
            "{},{},{},{},{:.6}",
            r.size, r.superpeers, r.architecture, r.metric, r.value
        )
        .expect("writing to a String");
    }
    s
}

pub fn per_query_jsonl(results: &[ExperimentResult]) -> String {
    lines(query_rows(results))
}

pub fn aggregate_jsonl(results: &[ExperimentResult]) -> String {
    lines(aggregate_rows(results))
}

fn lines<T: Serialize>(rows: Vec<T>) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(&r).expect("plain rows serialize"));
        s.push('\n');
    }
    s
}
