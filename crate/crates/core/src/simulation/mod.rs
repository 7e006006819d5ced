//! Simulated users: random nets, ground-truth value functions sampled from
//! the compiled polytope, pick-best sessions and round statistics.

mod generator;

pub use generator::{gen_random_net, GeneratorError, GeneratorParams, RowOrder};

use crate::compiler::{compile, CompileError, ObjectivePolicy, SolveError};
use crate::elicitation::{Mode, Session, SessionConfig, SessionError, SessionStatus};
use crate::lp::CertifiedFloat;
use crate::model::TcpNet;
use crate::ranking::{GaValueFunction, Item, ItemTable};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("sampling a user failed: {0}")]
    Sample(#[from] SolveError),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// A vertex of the compiled polytope under a seeded random objective.
pub fn sample_user_value_fn(net: &TcpNet, seed: u64) -> Result<GaValueFunction, SimulationError> {
    let mut system = compile(net)?;
    Ok(system.solve(
        ObjectivePolicy::RandomVertex { seed },
        &CertifiedFloat::default(),
    )?)
}

/// `count` distinct outcomes drawn uniformly (all of them when the space is
/// smaller), ids zero-padded in draw order.
pub fn sample_items(net: &TcpNet, count: usize, seed: u64) -> ItemTable {
    let sizes = net.domain_sizes();
    let space = usize::try_from(net.outcome_count()).unwrap_or(usize::MAX);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = if space <= count {
        (0..space).collect()
    } else {
        sample(&mut rng, space, count).into_vec()
    };
    indices.sort_unstable();
    let width = indices.len().to_string().len().max(4);
    let rows = indices
        .into_iter()
        .enumerate()
        .map(|(i, mut code)| {
            let mut values = vec![0; sizes.len()];
            for (slot, &size) in values.iter_mut().zip(&sizes).rev() {
                *slot = code % size;
                code /= size;
            }
            Item {
                id: format!("{:0width$}", i + 1),
                values,
            }
        })
        .collect();
    ItemTable::new(net.variables(), rows, format!("sampled(seed={seed})"))
        .expect("generated ids are unique")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionOutcome {
    /// Feedback rounds before the engine's top item matched the user's.
    pub rounds: usize,
    pub status: SessionStatus,
}

/// Runs a session whose user always picks the displayed item `user_v`
/// scores highest, ties by ascending id.
pub fn simulate_session(
    net: &TcpNet,
    user_v: &GaValueFunction,
    items: &ItemTable,
    config: SessionConfig,
) -> Result<SessionOutcome, SessionError> {
    let mut session = Session::start("simulated", net.clone(), items, &[], config)?;
    while session.status() == SessionStatus::Active {
        let pick = session
            .display()
            .iter()
            .map(|r| {
                (
                    user_v.evaluate(&items.get(&r.id).expect("displayed item").values),
                    &r.id,
                )
            })
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            .map(|(_, id)| id.clone())
            .expect("display is never empty");
        session.feedback(&pick)?;
    }
    Ok(SessionOutcome {
        rounds: session.feedback_rounds(),
        status: session.status(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: GeneratorParams,
    pub mode: Mode,
    #[serde(default = "default_items")]
    pub items: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_cap")]
    pub round_cap: usize,
    pub runs: usize,
    pub seed: u64,
}

fn default_items() -> usize {
    200
}

fn default_k() -> usize {
    crate::elicitation::DEFAULT_K
}

fn default_cap() -> usize {
    crate::elicitation::DEFAULT_ROUND_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub variables: usize,
    pub items: usize,
    pub rounds: usize,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStats {
    pub runs: usize,
    /// Rounds to convergence; capped runs count under the cap.
    pub histogram: BTreeMap<usize, usize>,
    pub fraction_immediate: f64,
    pub fraction_within_3: f64,
    pub capped_count: usize,
    pub median_rounds: f64,
    pub records: Vec<RunRecord>,
}

/// Seed of run `run`, independent of the mode so modes can be paired.
pub fn run_seed(master: u64, run: usize) -> u64 {
    // splitmix64 step
    let mut z = master.wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One run: net, user and items all derive from `seed`.
pub fn run_once(config: &ExperimentConfig, run: usize) -> Result<RunRecord, SimulationError> {
    let seed = run_seed(config.seed, run);
    let net = gen_random_net(&config.params, seed)?;
    let user_v = sample_user_value_fn(&net, seed ^ 0x5EED_0001)?;
    let items = sample_items(&net, config.items, seed ^ 0x5EED_0002);
    let session_config = SessionConfig {
        k: config.k,
        round_cap: config.round_cap,
        mode: config.mode,
    };
    let outcome = simulate_session(&net, &user_v, &items, session_config)?;
    Ok(RunRecord {
        run,
        seed,
        variables: net.len(),
        items: items.len(),
        rounds: outcome.rounds,
        status: outcome.status,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentStats, SimulationError> {
    let records = (0..config.runs)
        .into_par_iter()
        .map(|run| run_once(config, run))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentStats::from_records(records))
}

impl ExperimentStats {
    pub fn from_records(records: Vec<RunRecord>) -> Self {
        let runs = records.len();
        let mut histogram = BTreeMap::new();
        for r in &records {
            *histogram.entry(r.rounds).or_insert(0) += 1;
        }
        let converged = |r: &&RunRecord| r.status == SessionStatus::Converged;
        let fraction = |count: usize| {
            if runs == 0 {
                0.0
            } else {
                count as f64 / runs as f64
            }
        };
        let mut rounds: Vec<usize> = records.iter().map(|r| r.rounds).collect();
        rounds.sort_unstable();
        let median_rounds = match runs {
            0 => 0.0,
            _ if runs % 2 == 1 => rounds[runs / 2] as f64,
            _ => (rounds[runs / 2 - 1] + rounds[runs / 2]) as f64 / 2.0,
        };
        Self {
            runs,
            fraction_immediate: fraction(
                records
                    .iter()
                    .filter(converged)
                    .filter(|r| r.rounds == 0)
                    .count(),
            ),
            fraction_within_3: fraction(
                records
                    .iter()
                    .filter(converged)
                    .filter(|r| r.rounds <= 3)
                    .count(),
            ),
            capped_count: records
                .iter()
                .filter(|r| r.status == SessionStatus::Capped)
                .count(),
            histogram,
            median_rounds,
            records,
        }
    }

    pub fn converged_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.status == SessionStatus::Converged)
            .count()
    }

    /// Plain-text histogram, one bar per round count.
    pub fn histogram_text(&self) -> String {
        let widest = self.histogram.values().copied().max().unwrap_or(0).max(1);
        let mut out = String::new();
        for (&rounds, &count) in &self.histogram {
            let bar = "#".repeat((count * 40).div_ceil(widest));
            let _ = writeln!(out, "{rounds:>3} | {bar} {count}");
        }
        let _ = writeln!(
            out,
            "runs {}  immediate {:.3}  within 3 {:.3}  median {}  capped {}",
            self.runs,
            self.fraction_immediate,
            self.fraction_within_3,
            self.median_rounds,
            self.capped_count
        );
        out
    }
}
