//! Seeded synthetic workloads.
//!
//! The vocabulary is split into equal topic regions. Every super-peer has a
//! primary topic (round-robin) and possibly a secondary one; its theme is the
//! core of each of its topics, half of its primary topic's remaining terms and
//! a few off-topic terms. Peers draw their expertise from their super-peer's
//! theme. Queries draw their subject from one topic region.

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::Query;
use crate::label::Label;
use crate::network::{Network, ThemeDescription};

use super::{SimError, WorkloadConfig};

const CONSONANTS: &[u8] = b"bcdfghklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Pronounceable, pairwise distinct words.
fn vocabulary(size: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let mut w = String::with_capacity(6);
        for _ in 0..3 {
            w.push(*CONSONANTS.choose(rng).expect("non-empty") as char);
            w.push(*VOWELS.choose(rng).expect("non-empty") as char);
        }
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// A generated network with the topic layout that produced it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub network: Network,
    /// Terms of each topic region.
    pub topics: Vec<Vec<String>>,
    rng: ChaCha8Rng,
}

pub fn super_peer_id(i: usize) -> Label {
    Label::from(format!("SP{}", i + 1))
}

pub fn peer_id(i: usize) -> Label {
    Label::from(format!("P{}", i + 1))
}

/// Builds the network for `cfg`. Identical configs give identical networks.
pub fn generate_network(cfg: &WorkloadConfig) -> Result<Generated, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_topics = cfg.topics();
    let per_topic = cfg.terms_per_topic();
    let words = vocabulary(cfg.vocabulary_size, &mut rng);
    let topics: Vec<Vec<String>> = (0..n_topics)
        .map(|t| words[t * per_topic..(t + 1) * per_topic].to_vec())
        .collect();
    let core = ((per_topic as f64 * cfg.generator.core_fraction).round() as usize).clamp(1, per_topic);

    let mut network = Network::new();
    let mut themes = Vec::with_capacity(cfg.n_super_peers);
    for i in 0..cfg.n_super_peers {
        let primary = i % n_topics;
        let mut concepts: BTreeSet<String> = topics[primary][..core].iter().cloned().collect();
        let periphery = &topics[primary][core..];
        concepts.extend(
            index::sample(&mut rng, periphery.len(), periphery.len() / 2)
                .into_iter()
                .map(|j| periphery[j].clone()),
        );
        if n_topics > 1 && rng.gen_bool(cfg.generator.secondary_topic_probability) {
            let mut secondary = rng.gen_range(0..n_topics - 1);
            if secondary >= primary {
                secondary += 1;
            }
            concepts.extend(topics[secondary][..core].iter().cloned());
        }
        let off_topic: Vec<&String> = words
            .iter()
            .enumerate()
            .filter(|(j, _)| j / per_topic != primary)
            .map(|(_, w)| w)
            .collect();
        concepts.extend(
            off_topic
                .choose_multiple(&mut rng, cfg.generator.theme_noise_terms)
                .map(|w| (*w).clone()),
        );
        let concepts: Vec<String> = concepts.into_iter().collect();
        network.add_super_peer(
            super_peer_id(i),
            ThemeDescription::from_concepts(concepts.iter().cloned()),
        )?;
        themes.push(concepts);
    }

    for (a, b) in super_peer_edges(cfg.n_super_peers, cfg.generator.mean_degree, &mut rng) {
        network.link(&super_peer_id(a), &super_peer_id(b))?;
    }

    let r = cfg.expertise_terms_per_peer;
    for j in 0..cfg.n_peers {
        let sp = j % cfg.n_super_peers;
        let theme = &themes[sp];
        let k = rng.gen_range(r.min..=r.max).min(theme.len());
        let expertise: Vec<String> = theme.choose_multiple(&mut rng, k).cloned().collect();
        network.attach_peer(peer_id(j), expertise, &super_peer_id(sp))?;
    }

    Ok(Generated { network, topics, rng })
}

/// A random spanning tree plus random extra edges up to `mean_degree`.
fn super_peer_edges(n: usize, mean_degree: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = BTreeSet::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let child = order[k];
        edges.insert((parent.min(child), parent.max(child)));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = ((mean_degree * n as f64 / 2.0).round() as usize).clamp(edges.len(), max_edges);
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|e| !edges.contains(e))
        .collect();
    rest.shuffle(rng);
    let missing = target - edges.len();
    edges.extend(rest.into_iter().take(missing));
    edges.into_iter().collect()
}

impl Generated {
    /// The query stream: a random source peer and a subject drawn from one
    /// random topic. Continues the generator's random stream, so it is fixed
    /// by the seed as well.
    pub fn queries(&mut self, cfg: &WorkloadConfig) -> Result<Vec<Query>, SimError> {
        let peers: Vec<Label> = self.network.peers().keys().cloned().collect();
        let r = cfg.query_subject_size;
        let width = cfg.query_count.to_string().len();
        let mut out = Vec::with_capacity(cfg.query_count);
        for i in 0..cfg.query_count {
            let source = peers.choose(&mut self.rng).expect("non-empty network").clone();
            let topic = &self.topics[self.rng.gen_range(0..self.topics.len())];
            let k = self.rng.gen_range(r.min..=r.max);
            let subject: Vec<String> = topic.choose_multiple(&mut self.rng, k).cloned().collect();
            out.push(Query::new(
                format!("q{:0width$}", i + 1),
                source,
                subject,
                cfg.generator.query_ttl,
            )?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_connect_and_hit_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = super_peer_edges(12, 3.0, &mut rng);
        assert_eq!(e.len(), 18);
        let mut reached = BTreeSet::from([0usize]);
        loop {
            let before = reached.len();
            for &(a, b) in &e {
                if reached.contains(&a) || reached.contains(&b) {
                    reached.insert(a);
                    reached.insert(b);
                }
            }
            if reached.len() == before {
                break;
            }
        }
        assert_eq!(reached.len(), 12);
        assert_eq!(super_peer_edges(5, 100.0, &mut rng).len(), 10);
        assert_eq!(super_peer_edges(5, 0.0, &mut rng).len(), 4);
        assert!(super_peer_edges(1, 3.0, &mut rng).is_empty());
    }

    #[test]
    fn vocabulary_is_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = vocabulary(500, &mut rng);
        assert_eq!(v.iter().collect::<BTreeSet<_>>().len(), 500);
    }
}
