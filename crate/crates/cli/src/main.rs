mod input;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use traverse_core::baseline::{route_baseline, BaselineParams, Query, RoutingOutcome};
use traverse_core::ecclat::{cluster_dataset, score_candidates};
use traverse_core::hypergraph::{is_minimal_transversal, min_transversals_berge, min_transversals_bruteforce};
use traverse_core::mining::{frequent_closed_patterns, ClosedPattern, MinFrequency};
use traverse_core::similarity::SimilarityModel;
use traverse_core::simulator::{self, SweepConfig, WorkloadConfig};
use traverse_core::transversal::{
    build_strategies, expertise_dataset, one_strategy_route, CommunitySet, FilterMode, Strategy, StrategyIndex,
    TraverseParams,
};

use input::{Failure, Input};

#[derive(Parser)]
#[command(
    name = "traverse",
    version,
    about = "Community mining and transversal-based query routing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Jsonl,
}

#[derive(clap::Args)]
struct Out {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(clap::Args)]
struct Clustering {
    /// Minimum frequency, as a fraction (0.2) or a percentage (20).
    #[arg(long, default_value = "20")]
    minfr: MinFrequency,
    /// Minimum number of new transactions per selected cluster.
    #[arg(long, default_value_t = 1)]
    m: usize,
}

#[derive(clap::Args)]
struct Routing {
    /// Topology document (JSON).
    topology: PathBuf,
    /// Query subject terms, comma or space separated.
    #[arg(long)]
    query: String,
    /// Peer issuing the query.
    #[arg(long)]
    source: String,
    #[arg(long, default_value_t = 3)]
    ttl: u32,
    #[arg(long, default_value_t = 0.5)]
    theta_peer: f64,
    #[arg(long, value_enum, default_value_t = Similarity::Trigram)]
    similarity: Similarity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Similarity {
    Exact,
    Trigram,
}

impl From<Similarity> for SimilarityModel {
    fn from(s: Similarity) -> Self {
        match s {
            Similarity::Exact => SimilarityModel::Exact,
            Similarity::Trigram => SimilarityModel::Trigram,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Filter {
    Affinity,
    KeepAll,
}

#[derive(Subcommand)]
enum Command {
    /// Frequent closed patterns of a transaction dataset.
    Mine {
        dataset: PathBuf,
        #[arg(long, default_value = "20")]
        minfr: MinFrequency,
        #[command(flatten)]
        out: Out,
    },
    /// ECCLAT clustering of a transaction dataset.
    Cluster {
        dataset: PathBuf,
        #[command(flatten)]
        params: Clustering,
        /// Also list every scored candidate.
        #[arg(long)]
        candidates: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Minimal transversals of a hypergraph file.
    Transversals {
        hypergraph: PathBuf,
        /// Use the brute-force enumerator instead of Berge's algorithm.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Super-peer communities from a topology (JSON) or a dataset.
    Communities {
        input: PathBuf,
        #[command(flatten)]
        params: Clustering,
        /// JSON array of processed queries `{"super_peer", "components"}`.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Routing strategies (minimal transversals) of a communities file.
    Strategies {
        communities: PathBuf,
        /// Check each line of this strategy file against the computed list.
        #[arg(long)]
        verify: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Route one query with the two-level semantic baseline.
    RouteBaseline {
        #[command(flatten)]
        routing: Routing,
        #[arg(long, default_value_t = 0.3)]
        theta_sp: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Route one query along a single strategy.
    RouteTraverse {
        #[command(flatten)]
        routing: Routing,
        /// Communities file; mined from the topology when absent.
        #[arg(long)]
        communities: Option<PathBuf>,
        /// Strategy file; computed from the communities when absent.
        #[arg(long)]
        strategies: Option<PathBuf>,
        #[command(flatten)]
        params: Clustering,
        #[arg(long, value_enum, default_value_t = Filter::Affinity)]
        filter: Filter,
        #[command(flatten)]
        out: Out,
    },
    /// Run one workload through both architectures.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Per-query rows; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Aggregate rows.
        #[arg(long)]
        aggregate: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a sweep of workloads through both architectures.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the sweep's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Per-query rows.
        #[arg(long, short)]
        output: PathBuf,
        /// Aggregate rows.
        #[arg(long)]
        aggregate: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(input::exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Mine { dataset, minfr, out } => {
            let d = Input::dataset(&dataset)?;
            let patterns = frequent_closed_patterns(&d, minfr);
            emit(&out, &render_patterns(&patterns, out.format))
        }
        Command::Cluster {
            dataset,
            params,
            candidates,
            out,
        } => {
            let d = Input::dataset(&dataset)?;
            let patterns = frequent_closed_patterns(&d, params.minfr);
            let mut text = String::new();
            if candidates {
                for c in score_candidates(&patterns, &d) {
                    text.push_str(&cluster_line(&c, "candidate", out.format));
                }
            }
            let clustering = cluster_dataset(&d, params.minfr, params.m);
            for c in &clustering.selected {
                text.push_str(&cluster_line(c, "selected", out.format));
            }
            if out.format == Format::Text && !clustering.unclassified.is_empty() {
                let ids: Vec<String> = clustering.unclassified.iter().map(ToString::to_string).collect();
                text.push_str(&format!("# unclassified: {}\n", ids.join(" ")));
            }
            emit(&out, &text)
        }
        Command::Transversals {
            hypergraph,
            oracle,
            out,
        } => {
            let h = Input::hypergraph(&hypergraph)?;
            let sets = if oracle {
                min_transversals_bruteforce(&h)?
            } else {
                min_transversals_berge(&h)
            };
            let strategies: Vec<Strategy> = sets.into_iter().map(Strategy).collect();
            emit(&out, &render_strategies(&strategies, out.format))
        }
        Command::Communities {
            input,
            params,
            log,
            out,
        } => {
            let cs = if Input::looks_like_json(&input)? {
                let n = Input::topology(&input)?;
                let log = log.map(|p| Input::query_log(&p)).transpose()?;
                let (d, dict) = expertise_dataset(&n, log.as_deref())?;
                CommunitySet::from_clustering(&cluster_dataset(&d, params.minfr, params.m), Some(&dict))
            } else {
                if log.is_some() {
                    bail!("--log needs a topology document as input");
                }
                let d = Input::dataset(&input)?;
                CommunitySet::from_clustering(&cluster_dataset(&d, params.minfr, params.m), None)
            };
            let text = match out.format {
                Format::Jsonl => jsonl(
                    cs.communities
                        .iter()
                        .map(|c| json!({"pattern": c.pattern, "superpeers": c.super_peers})),
                ),
                Format::Csv => csv(
                    "pattern,superpeers",
                    cs.communities
                        .iter()
                        .map(|c| format!("{},{}", join(&c.pattern), join(&c.super_peers))),
                ),
                Format::Text => cs.to_text(),
            };
            emit(&out, &text)
        }
        Command::Strategies {
            communities,
            verify,
            out,
        } => {
            let cs = Input::communities(&communities)?;
            let strategies = build_strategies(&cs)?;
            let mut text = render_strategies(&strategies, out.format);
            if let Some(path) = verify {
                text.push_str(&verify_report(&cs, &strategies, &Input::strategies(&path)?)?);
            }
            emit(&out, &text)
        }
        Command::RouteBaseline { routing, theta_sp, out } => {
            let n = Input::topology(&routing.topology)?;
            let q = query(&routing)?;
            let params = BaselineParams {
                theta_peer: routing.theta_peer,
                theta_sp,
            };
            let outcome = route_baseline(&n, &q, params, &SimilarityModel::from(routing.similarity))?;
            emit(&out, &render_outcome(&outcome, out.format))
        }
        Command::RouteTraverse {
            routing,
            communities,
            strategies,
            params,
            filter,
            out,
        } => {
            let n = Input::topology(&routing.topology)?;
            let q = query(&routing)?;
            let cs = match communities {
                Some(p) => Input::communities(&p)?,
                None => {
                    let (d, dict) = expertise_dataset(&n, None)?;
                    CommunitySet::from_clustering(&cluster_dataset(&d, params.minfr, params.m), Some(&dict))
                }
            };
            let index = match strategies {
                Some(p) => StrategyIndex::new(&cs, Input::strategies(&p)?),
                None => StrategyIndex::build(&cs)?,
            };
            let params = TraverseParams {
                theta_peer: routing.theta_peer,
                filter: match filter {
                    Filter::Affinity => FilterMode::Affinity,
                    Filter::KeepAll => FilterMode::KeepAll,
                },
            };
            let outcome = one_strategy_route(&n, &q, &index, params, &SimilarityModel::from(routing.similarity))?;
            emit(&out, &render_outcome(&outcome, out.format))
        }
        Command::Simulate {
            config,
            seed,
            output,
            aggregate,
            format,
        } => {
            let mut cfg: WorkloadConfig = Input::json_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (b, t) = simulator::run_experiment(&cfg).map_err(input::sim_failure)?;
            let results = [b, t];
            write_results(&results, output.as_ref(), aggregate.as_ref(), format)
        }
        Command::Compare {
            config,
            seed,
            output,
            aggregate,
            jobs,
            format,
        } => {
            let mut sweep: SweepConfig = Input::json_config(&config)?;
            if let Some(s) = seed {
                sweep.seeds = vec![s];
            }
            if sweep.sizes.is_empty() {
                bail!(Failure::input(&config, None, "sweep lists no sizes"));
            }
            let configs = sweep.expand();
            for c in &configs {
                c.validate().map_err(input::sim_failure)?;
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .context("starting worker pool")?;
            let runs: Vec<_> = pool.install(|| configs.par_iter().map(simulator::run_experiment).collect());
            let mut results = Vec::with_capacity(2 * runs.len());
            for r in runs {
                let (b, t) = r.map_err(input::sim_failure)?;
                results.push(b);
                results.push(t);
            }
            write_results(&results, Some(&output), Some(&aggregate), format)
        }
    }
}

fn query(r: &Routing) -> Result<Query> {
    let terms: Vec<&str> = r
        .query
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    Ok(Query::new("q1", r.source.as_str(), terms, r.ttl)?)
}

fn emit(out: &Out, text: &str) -> Result<()> {
    input::write_text(out.output.as_ref(), text)
}

fn write_results(
    results: &[simulator::ExperimentResult],
    output: Option<&PathBuf>,
    aggregate: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    let (rows, agg) = match format {
        Format::Jsonl => (simulator::per_query_jsonl(results), simulator::aggregate_jsonl(results)),
        _ => (simulator::per_query_csv(results), simulator::aggregate_csv(results)),
    };
    input::write_text(output, &rows)?;
    if let Some(path) = aggregate {
        input::write_text(Some(path), &agg)?;
    }
    Ok(())
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn jsonl(rows: impl Iterator<Item = serde_json::Value>) -> String {
    rows.map(|v| format!("{v}\n")).collect()
}

fn render_patterns(patterns: &[ClosedPattern], format: Format) -> String {
    match format {
        Format::Text => patterns.iter().map(|p| format!("{p}\n")).collect(),
        Format::Csv => csv(
            "pattern,support,frequency",
            patterns
                .iter()
                .map(|p| format!("{},{},{:.6}", join(&p.pattern), join(&p.support), p.frequency)),
        ),
        Format::Jsonl => jsonl(patterns.iter().map(|p| json!(p))),
    }
}

fn cluster_line(c: &traverse_core::ecclat::Cluster, kind: &str, format: Format) -> String {
    match format {
        Format::Text => format!("{kind} {c}\n"),
        Format::Csv => format!(
            "{kind},{},{},{:.6},{:.6},{:.6}\n",
            join(&c.pattern),
            join(&c.members),
            c.homogeneity,
            c.concentration,
            c.interestingness
        ),
        Format::Jsonl => {
            let mut v = json!(c);
            v["kind"] = json!(kind);
            format!("{v}\n")
        }
    }
}

fn render_strategies(strategies: &[Strategy], format: Format) -> String {
    match format {
        Format::Text => strategies.iter().map(|s| format!("{}\n", s.0)).collect(),
        Format::Csv => csv("superpeers", strategies.iter().map(|s| s.0.to_string())),
        Format::Jsonl => jsonl(strategies.iter().map(|s| json!(s.super_peers()))),
    }
}

fn render_outcome(o: &RoutingOutcome, format: Format) -> String {
    match format {
        Format::Jsonl => format!("{}\n", json!(o)),
        Format::Csv => csv(
            "peer,superpeer",
            o.answers.iter().map(|a| format!("{},{}", a.peer, a.super_peer)),
        ),
        Format::Text => {
            let mut s = format!(
                "messages {}\nhops {}\ncap_evaluations {}\ncontacted {}\n",
                o.messages,
                o.hop_depth,
                o.cap_evaluations,
                join(&o.contacted)
            );
            for a in &o.answers {
                s.push_str(&format!("answer {} {}\n", a.peer, a.super_peer));
            }
            s
        }
    }
}

/// One line per listed strategy: `ok`, `missing` (a minimal transversal we
/// did not produce) or `not-minimal` (the listed set fails the check).
fn verify_report(cs: &CommunitySet, ours: &[Strategy], listed: &[Strategy]) -> Result<String> {
    let h = cs.hypergraph()?;
    let ours: BTreeSet<&Strategy> = ours.iter().collect();
    let mut s = String::new();
    for l in listed {
        let verdict = if ours.contains(l) {
            "ok"
        } else if is_minimal_transversal(&h, &l.0)? {
            "missing"
        } else {
            "not-minimal"
        };
        s.push_str(&format!("# verify {}: {verdict}\n", l.0));
    }
    Ok(s)
}
