//! Reading inputs and mapping failures to exit codes.
//!
//! Exit codes: 1 runtime error, 2 malformed input, 3 infeasible config.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

use traverse_core::hypergraph::{Hypergraph, HypergraphError};
use traverse_core::mining::{MiningError, TransactionDataset};
use traverse_core::network::{load_topology, Network};
use traverse_core::simulator::SimError;
use traverse_core::transversal::{parse_strategies, CommunityError, CommunitySet, ProcessedQuery, Strategy};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    message: String,
}

impl Failure {
    pub fn input(path: &Path, line: Option<usize>, message: impl fmt::Display) -> Self {
        let message = match line {
            Some(l) => format!("{}:{l}: {message}", path.display()),
            None => format!("{}: {message}", path.display()),
        };
        Failure { code: 2, message }
    }

    pub fn infeasible(message: impl fmt::Display) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    e.downcast_ref::<Failure>().map_or(1, |f| f.code)
}

/// Config problems exit with 3; anything else surfaces as a runtime error.
pub fn sim_failure(e: SimError) -> anyhow::Error {
    match e {
        SimError::Config(_) | SimError::Infeasible(_) => Failure::infeasible(e).into(),
        other => other.into(),
    }
}

pub fn write_text(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing to stdout")
        }
    }
}

pub struct Input;

impl Input {
    fn read(path: &Path) -> Result<String, Failure> {
        fs::read_to_string(path).map_err(|e| Failure::input(path, None, e))
    }

    pub fn dataset(path: &Path) -> Result<TransactionDataset, Failure> {
        TransactionDataset::parse(&Self::read(path)?).map_err(|e| match e {
            MiningError::Parse { line, message } => Failure::input(path, Some(line), message),
            other => Failure::input(path, None, other),
        })
    }

    pub fn hypergraph(path: &Path) -> Result<Hypergraph, Failure> {
        Hypergraph::parse(&Self::read(path)?).map_err(|e| match e {
            HypergraphError::Parse { line, message } => Failure::input(path, Some(line), message),
            other => Failure::input(path, None, other),
        })
    }

    pub fn communities(path: &Path) -> Result<CommunitySet, Failure> {
        CommunitySet::parse(&Self::read(path)?).map_err(|e| community_failure(path, e))
    }

    pub fn strategies(path: &Path) -> Result<Vec<Strategy>, Failure> {
        parse_strategies(&Self::read(path)?).map_err(|e| community_failure(path, e))
    }

    /// Malformed JSON reports its own line and column in the message.
    pub fn topology(path: &Path) -> Result<Network, Failure> {
        load_topology(&Self::read(path)?).map_err(|e| Failure::input(path, None, e))
    }

    pub fn query_log(path: &Path) -> Result<Vec<ProcessedQuery>, Failure> {
        Self::json_config(path)
    }

    pub fn json_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
        serde_json::from_str(&Self::read(path)?).map_err(|e| Failure::input(path, Some(e.line()), e))
    }

    pub fn looks_like_json(path: &Path) -> Result<bool, Failure> {
        if path.extension().is_some_and(|x| x == "json") {
            return Ok(true);
        }
        Ok(Self::read(path)?.trim_start().starts_with('{'))
    }
}

fn community_failure(path: &Path, e: CommunityError) -> Failure {
    match e {
        CommunityError::Parse { line, message } => Failure::input(path, Some(line), message),
        other => Failure::input(path, None, other),
    }
}
