use std::collections::BTreeMap;

use traverse_core::baseline::{route_baseline, BaselineParams};
use traverse_core::mining::{frequent_closed_patterns, MinFrequency};
use traverse_core::simulator::*;
use traverse_core::transversal::{
    expertise_dataset, one_strategy_route, FilterMode, Strategy, StrategyIndex, TraverseParams,
};

fn small(seed: u64) -> WorkloadConfig {
    WorkloadConfig {
        query_count: 40,
        seed,
        ..WorkloadConfig::default()
    }
}

#[test]
fn same_seed_same_network_and_queries() {
    let cfg = small(9);
    let mut a = generate_network(&cfg).unwrap();
    let mut b = generate_network(&cfg).unwrap();
    assert_eq!(a.network.to_json(), b.network.to_json());
    assert_eq!(a.queries(&cfg).unwrap(), b.queries(&cfg).unwrap());
    let other = generate_network(&small(10)).unwrap();
    assert_ne!(a.network.to_json(), other.network.to_json());
}

#[test]
fn sizes_as_configured() {
    let g = generate_network(&small(1)).unwrap();
    assert_eq!(g.network.peers().len(), 300);
    assert_eq!(g.network.super_peers().len(), 10);
    for sp in g.network.super_peers().values() {
        assert_eq!(sp.peers.len(), 30);
        assert!(!sp.neighbors.is_empty());
    }
}

#[test]
fn small_vocabulary_is_infeasible() {
    let cfg = WorkloadConfig {
        vocabulary_size: 12,
        ..small(1)
    };
    assert!(matches!(generate_network(&cfg), Err(SimError::Infeasible(_))));
    let cfg = WorkloadConfig {
        n_super_peers: 400,
        ..small(1)
    };
    assert!(matches!(generate_network(&cfg), Err(SimError::Config(_))));
}

#[test]
fn shared_closed_pattern_across_100_seeds() {
    let minfr = MinFrequency::new(1, 5).unwrap();
    for seed in 0..100 {
        let g = generate_network(&small(seed)).unwrap();
        let (d, _) = expertise_dataset(&g.network, None).unwrap();
        assert!(
            frequent_closed_patterns(&d, minfr).iter().any(|p| p.support.len() >= 2),
            "seed {seed}: no pattern shared by two super-peers"
        );
    }
}

#[test]
fn both_architectures_see_the_same_queries() {
    let (b, t) = run_experiment(&small(1)).unwrap();
    assert_eq!(b.per_query.len(), 40);
    assert_eq!(t.per_query.len(), 40);
    let ids = |r: &ExperimentResult| r.per_query.iter().map(|q| q.query_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&b), ids(&t));
    for r in b.per_query.iter().chain(&t.per_query) {
        assert!((0.0..=1.0).contains(&r.precision));
        assert!((0.0..=1.0).contains(&r.recall));
    }
}

#[test]
fn message_bounds_hold() {
    let cfg = small(4);
    let w = Workload::generate(&cfg).unwrap();
    let largest = w.index.strategies().iter().map(Strategy::len).max().unwrap() as u64;
    let sim = cfg.similarity;
    for q in &w.queries {
        let home = &w.network.peer(&q.source).unwrap().super_peer;
        let degree = w.network.super_peer(home).unwrap().neighbors.len() as u64;
        let b = route_baseline(&w.network, q, BaselineParams::default(), &sim).unwrap();
        assert!(b.messages <= 1 + degree + b.answers.len() as u64);
        let t = one_strategy_route(&w.network, q, &w.index, TraverseParams::default(), &sim).unwrap();
        assert!(t.messages <= largest + 1 + t.answers.len() as u64);
    }
}

#[test]
fn calibrated_precision_is_one() {
    for seed in 0..5 {
        let cfg = WorkloadConfig {
            epsilon_rel: 0.5,
            theta_peer: 0.5,
            ..small(seed)
        };
        let (b, t) = run_experiment(&cfg).unwrap();
        assert_eq!(b.aggregates.mean_precision, 1.0);
        assert_eq!(t.aggregates.mean_precision, 1.0);
    }
}

#[test]
fn flooding_reaches_full_recall() {
    let cfg = WorkloadConfig {
        theta_sp: 0.0,
        theta_peer: 0.3,
        epsilon_rel: 0.5,
        filter: FilterMode::KeepAll,
        generator: GeneratorParams {
            mean_degree: 1e6,
            ..GeneratorParams::default()
        },
        ..small(2)
    };
    let mut w = Workload::generate(&cfg).unwrap();
    let all = Strategy(w.network.super_peers().keys().cloned().collect());
    w.index = StrategyIndex::new(&w.communities, vec![all]);
    let (b, t) = run_workload(&w, &cfg).unwrap();
    assert_eq!(b.aggregates.mean_recall, 1.0);
    assert_eq!(t.aggregates.mean_recall, 1.0);
}

#[test]
fn csv_is_deterministic_and_order_free() {
    let sweep = SweepConfig {
        workload: small(1),
        sizes: vec![
            SizePoint {
                peers: 300,
                super_peers: 10,
            },
            SizePoint {
                peers: 400,
                super_peers: 12,
            },
        ],
        seeds: vec![1, 2],
    };
    let run = |reverse: bool| {
        let mut cfgs = sweep.expand();
        if reverse {
            cfgs.reverse();
        }
        let mut results = Vec::new();
        for c in &cfgs {
            let (b, t) = run_experiment(c).unwrap();
            results.push(t);
            results.push(b);
        }
        (per_query_csv(&results), aggregate_csv(&results))
    };
    let a = run(false);
    assert_eq!(a, run(true));
    assert!(a.0.starts_with(&format!("{PER_QUERY_HEADER}\n")));
    assert_eq!(a.0.lines().count(), 1 + 2 * 2 * 2 * 40);
    assert_eq!(a.1.lines().count(), 1 + 2 * 2 * 7);
}

#[test]
fn aggregates_recount_from_rows() {
    let sweep = SweepConfig {
        workload: small(3),
        sizes: vec![SizePoint {
            peers: 300,
            super_peers: 10,
        }],
        seeds: vec![3, 4],
    };
    let mut results = Vec::new();
    for c in sweep.expand() {
        let (b, t) = run_experiment(&c).unwrap();
        results.extend([b, t]);
    }
    let mut sums: BTreeMap<String, (f64, f64, f64)> = BTreeMap::new();
    for line in per_query_csv(&results).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let e = sums.entry(f[2].to_string()).or_default();
        e.0 += 1.0;
        e.1 += f[4].parse::<f64>().unwrap();
        e.2 += f[8].parse::<f64>().unwrap();
    }
    let agg: BTreeMap<(String, String), f64> = aggregate_csv(&results)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            ((f[2].to_string(), f[3].to_string()), f[4].parse().unwrap())
        })
        .collect();
    for (arch, (n, msgs, recall)) in sums {
        assert_eq!(agg[&(arch.clone(), "queries".into())], n);
        assert!((agg[&(arch.clone(), "messages_mean".into())] - msgs / n).abs() < 1e-6);
        assert!((agg[&(arch.clone(), "recall_mean".into())] - recall / n).abs() < 1e-5);
    }
}

#[test]
fn config_json_round_trip() {
    let cfg = small(5);
    let text = serde_json::to_string(&cfg).unwrap();
    assert!(text.contains("\"nPeers\":300"));
    assert_eq!(WorkloadConfig::from_json(&text).unwrap(), cfg);
    assert!(WorkloadConfig::from_json(r#"{"nPeers": 3}"#).is_err());
    let minimal = r#"{"nPeers":300,"nSuperPeers":10,"vocabularySize":200,
        "expertiseTermsPerPeer":{"min":3,"max":6},"queryCount":5,
        "querySubjectSize":{"min":2,"max":3},"minfr":20,"m":1,
        "thetaPeer":0.5,"thetaSp":0.3,"epsilonRel":0.5,"seed":7}"#;
    let parsed = WorkloadConfig::from_json(minimal).unwrap();
    assert_eq!(parsed.minfr, MinFrequency::new(1, 5).unwrap());
}
