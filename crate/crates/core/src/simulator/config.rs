use serde::{Deserialize, Serialize};

use crate::metrics::EmptyConvention;
use crate::mining::MinFrequency;
use crate::similarity::SimilarityModel;
use crate::transversal::FilterMode;

use super::SimError;

/// Inclusive integer range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: usize,
    pub max: usize,
}

impl Range {
    pub fn new(min: usize, max: usize) -> Self {
        Range { min, max }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LatencyModel {
    pub per_hop_cost: f64,
    pub per_cap_eval_cost: f64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            per_hop_cost: 10.0,
            per_cap_eval_cost: 0.1,
        }
    }
}

/// Knobs of the synthetic workload generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct GeneratorParams {
    /// Number of vocabulary regions. Derived from `minfr` when absent.
    pub topics: Option<usize>,
    /// Mean degree of the super-peer graph.
    pub mean_degree: f64,
    /// Chance that a super-peer also covers a second topic.
    pub secondary_topic_probability: f64,
    /// Share of each topic's terms that every super-peer of the topic knows.
    pub core_fraction: f64,
    /// Off-topic concepts added to each theme.
    pub theme_noise_terms: usize,
    pub query_ttl: u32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            topics: None,
            mean_degree: 3.0,
            secondary_topic_probability: 0.25,
            core_fraction: 0.5,
            theme_noise_terms: 2,
            query_ttl: 3,
        }
    }
}

fn exact() -> SimilarityModel {
    SimilarityModel::Exact
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WorkloadConfig {
    pub n_peers: usize,
    pub n_super_peers: usize,
    pub vocabulary_size: usize,
    pub expertise_terms_per_peer: Range,
    pub query_count: usize,
    pub query_subject_size: Range,
    pub minfr: MinFrequency,
    pub m: usize,
    pub theta_peer: f64,
    pub theta_sp: f64,
    pub epsilon_rel: f64,
    pub seed: u64,
    #[serde(default)]
    pub latency: LatencyModel,
    #[serde(default)]
    pub generator: GeneratorParams,
    #[serde(default = "exact")]
    pub similarity: SimilarityModel,
    #[serde(default)]
    pub filter: FilterMode,
    #[serde(default)]
    pub empty_convention: EmptyConvention,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            n_peers: 300,
            n_super_peers: 10,
            vocabulary_size: 200,
            expertise_terms_per_peer: Range::new(3, 6),
            query_count: 100,
            query_subject_size: Range::new(2, 4),
            minfr: MinFrequency::new(1, 5).expect("valid"),
            m: 1,
            theta_peer: 0.5,
            theta_sp: 0.3,
            epsilon_rel: 0.5,
            seed: 1,
            latency: LatencyModel::default(),
            generator: GeneratorParams::default(),
            similarity: SimilarityModel::Exact,
            filter: FilterMode::Affinity,
            empty_convention: EmptyConvention::One,
        }
    }
}

impl WorkloadConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn topics(&self) -> usize {
        self.generator
            .topics
            .unwrap_or_else(|| ((1.0 / self.minfr.as_f64()).floor() as usize).saturating_sub(1).max(2))
    }

    pub fn terms_per_topic(&self) -> usize {
        self.vocabulary_size / self.topics()
    }

    fn core_terms(&self) -> usize {
        ((self.terms_per_topic() as f64 * self.generator.core_fraction).round() as usize).max(1)
    }

    /// Smallest possible theme: core plus half of the remaining topic terms.
    pub fn min_theme_size(&self) -> usize {
        let core = self.core_terms();
        core + (self.terms_per_topic() - core.min(self.terms_per_topic())) / 2
    }

    /// Checks ranges and counts, then whether the vocabulary can supply
    /// the requested themes, expertise and queries.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        for (name, v) in [
            ("nPeers", self.n_peers),
            ("nSuperPeers", self.n_super_peers),
            ("vocabularySize", self.vocabulary_size),
            ("queryCount", self.query_count),
            ("m", self.m),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.n_super_peers > self.n_peers {
            return bad(format!(
                "nSuperPeers ({}) exceeds nPeers ({})",
                self.n_super_peers, self.n_peers
            ));
        }
        for (name, r) in [
            ("expertiseTermsPerPeer", self.expertise_terms_per_peer),
            ("querySubjectSize", self.query_subject_size),
        ] {
            if r.min == 0 || r.min > r.max {
                return bad(format!("{name} must satisfy 1 <= min <= max"));
            }
        }
        for (name, v) in [
            ("thetaPeer", self.theta_peer),
            ("thetaSp", self.theta_sp),
            ("epsilonRel", self.epsilon_rel),
            ("secondaryTopicProbability", self.generator.secondary_topic_probability),
            ("coreFraction", self.generator.core_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.generator.mean_degree.is_nan() || self.generator.mean_degree < 0.0 {
            return bad("meanDegree must be non-negative".into());
        }
        if self.latency.per_hop_cost < 0.0 || self.latency.per_cap_eval_cost < 0.0 {
            return bad("latency costs must be non-negative".into());
        }
        if self.generator.query_ttl == 0 {
            return bad("queryTtl must be positive".into());
        }
        if self.generator.topics == Some(0) {
            return bad("topics must be positive".into());
        }

        let per_topic = self.terms_per_topic();
        if per_topic < 4 {
            return Err(SimError::Infeasible(format!(
                "vocabulary of {} terms gives {} per topic over {} topics; need at least 4",
                self.vocabulary_size,
                per_topic,
                self.topics()
            )));
        }
        if self.expertise_terms_per_peer.max > self.min_theme_size() {
            return Err(SimError::Infeasible(format!(
                "expertiseTermsPerPeer max {} exceeds smallest theme size {}",
                self.expertise_terms_per_peer.max,
                self.min_theme_size()
            )));
        }
        if self.query_subject_size.max > per_topic {
            return Err(SimError::Infeasible(format!(
                "querySubjectSize max {} exceeds terms per topic {}",
                self.query_subject_size.max, per_topic
            )));
        }
        if self.generator.theme_noise_terms > self.vocabulary_size - per_topic {
            return Err(SimError::Infeasible(
                "themeNoiseTerms exceeds off-topic vocabulary".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SizePoint {
    pub peers: usize,
    pub super_peers: usize,
}

/// A base workload run at several sizes and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepConfig {
    pub workload: WorkloadConfig,
    pub sizes: Vec<SizePoint>,
    /// Defaults to the workload's own seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    /// One workload per (size, seed), sizes outermost.
    pub fn expand(&self) -> Vec<WorkloadConfig> {
        let seeds = if self.seeds.is_empty() {
            vec![self.workload.seed]
        } else {
            self.seeds.clone()
        };
        let mut out = Vec::with_capacity(self.sizes.len() * seeds.len());
        for size in &self.sizes {
            for &seed in &seeds {
                let mut cfg = self.workload.clone();
                cfg.n_peers = size.peers;
                cfg.n_super_peers = size.super_peers;
                cfg.seed = seed;
                out.push(cfg);
            }
        }
        out
    }
}
