//! The pick-best loop: display the top-k items, turn the user's choice into
//! constraints favouring it, re-solve and display again.

use crate::compiler::{
    compile, compile_additive, difference_terms, CompileError, LinearConstraint, LinearSystem,
    ObjectivePolicy, Provenance, SolveError,
};
use crate::lp::CertifiedFloat;
use crate::model::{parse_net, serialize_net, NetDocument, TcpNet};
use crate::ranking::{
    filter_hard, format_number, top_k, GaValueFunction, HardConstraint, ItemError, ItemTable,
    RankedItem, ValueFunctionDocument,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_ROUND_CAP: usize = 50;
pub const FEEDBACK_MARGIN: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Factors over TCP-families, hard base rows.
    Ga,
    /// Singleton factors, soft base rows.
    AdditiveBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub k: usize,
    pub round_cap: usize,
    pub mode: Mode,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            round_cap: DEFAULT_ROUND_CAP,
            mode: Mode::Ga,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Converged,
    /// Even the base system failed to re-solve after every feedback batch
    /// was dropped. `current_v` is then the last feasible solution.
    InfeasibleResolved,
    Capped,
}

/// One rung of the relaxation ladder, naming the batch it touched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Relaxation {
    ZeroMargin { batch_round: usize },
    DroppedBatch { batch_round: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    /// Counts from 1.
    pub index: usize,
    pub displayed: Vec<String>,
    pub chosen: Option<String>,
    pub constraints_added: usize,
    pub relaxation_applied: bool,
    #[serde(default)]
    pub relaxations: Vec<Relaxation>,
}

/// A feedback row in persisted form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRow {
    pub round: usize,
    pub winner: String,
    pub loser: String,
    pub margin: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error(transparent)]
    NetNotAcyclic(CompileError),
    #[error("the net's own statements are inconsistent: {}", hints.join("; "))]
    BaseSystemInfeasible { hints: Vec<String> },
    #[error("no item passes the hard constraints")]
    EmptyItemSet,
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error(transparent)]
    Items(ItemError),
    #[error("session is {0:?}, not active")]
    NotActive(SessionStatus),
    #[error("item `{0}` is not on display")]
    ChosenNotDisplayed(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("bad snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    net: TcpNet,
    items: ItemTable,
    config: SessionConfig,
    system: LinearSystem,
    base_rows: usize,
    feedback: Vec<FeedbackRow>,
    current_v: GaValueFunction,
    display: Vec<RankedItem>,
    rounds: Vec<Round>,
    status: SessionStatus,
    solver: CertifiedFloat,
}

/// Read-only view of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub status: SessionStatus,
    pub round_count: usize,
    pub topk: Vec<String>,
    pub debug_scores: Vec<String>,
    pub history: Vec<Round>,
    pub constraint_count: usize,
}

/// Everything needed to rebuild a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub session_id: String,
    pub net: NetDocument,
    pub k: usize,
    pub round_cap: usize,
    pub mode: Mode,
    pub items: Vec<crate::ranking::ItemDocument>,
    pub items_provenance: String,
    pub rounds: Vec<Round>,
    pub status: SessionStatus,
    pub constraint_count: usize,
    pub feedback: Vec<FeedbackRow>,
    pub value_function: ValueFunctionDocument,
}

fn base_system(net: &TcpNet, mode: Mode) -> Result<LinearSystem, SessionError> {
    match mode {
        Mode::Ga => compile(net),
        Mode::AdditiveBaseline => compile_additive(net),
    }
    .map_err(SessionError::NetNotAcyclic)
}

impl Session {
    pub fn start(
        id: impl Into<String>,
        net: TcpNet,
        items: &ItemTable,
        hard: &[HardConstraint],
        config: SessionConfig,
    ) -> Result<Self, SessionError> {
        if config.k < 2 {
            return Err(SessionError::InvalidK(config.k));
        }
        let mut system = base_system(&net, config.mode)?;
        let items = filter_hard(items, hard).map_err(SessionError::Items)?;
        if items.is_empty() {
            return Err(SessionError::EmptyItemSet);
        }
        let solver = CertifiedFloat::default();
        let current_v = match system.solve(ObjectivePolicy::L1, &solver) {
            Ok(v) => v,
            Err(SolveError::Infeasible { hints }) => {
                return Err(SessionError::BaseSystemInfeasible {
                    hints: hints
                        .iter()
                        .map(|&h| system.describe_constraint(h))
                        .collect(),
                })
            }
            Err(SolveError::SolverFailure(msg)) => return Err(SessionError::Solver(msg)),
        };
        let mut session = Self {
            id: id.into(),
            base_rows: system.constraints.len(),
            net,
            items,
            config,
            system,
            feedback: Vec::new(),
            current_v,
            display: Vec::new(),
            rounds: Vec::new(),
            status: SessionStatus::Active,
            solver,
        };
        session.open_round();
        Ok(session)
    }

    fn open_round(&mut self) {
        self.display = top_k(&self.current_v, &self.items, self.config.k);
        self.rounds.push(Round {
            index: self.rounds.len() + 1,
            displayed: self.display.iter().map(|r| r.id.clone()).collect(),
            chosen: None,
            constraints_added: 0,
            relaxation_applied: false,
            relaxations: Vec::new(),
        });
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn net(&self) -> &TcpNet {
        &self.net
    }

    pub fn items(&self) -> &ItemTable {
        &self.items
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn value_function(&self) -> &GaValueFunction {
        &self.current_v
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn display(&self) -> &[RankedItem] {
        &self.display
    }

    /// Feedback rounds that did not end the session.
    pub fn feedback_rounds(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| r.chosen.is_some() && r.chosen.as_ref() != r.displayed.first())
            .count()
    }

    pub fn feedback(&mut self, chosen: &str) -> Result<(), SessionError> {
        if self.status != SessionStatus::Active {
            return Err(SessionError::NotActive(self.status));
        }
        if !self.display.iter().any(|r| r.id == chosen) {
            return Err(SessionError::ChosenNotDisplayed(chosen.to_string()));
        }
        let round_index = self.rounds.len();
        self.rounds.last_mut().expect("an open round").chosen = Some(chosen.to_string());
        if self.display[0].id == chosen {
            self.status = SessionStatus::Converged;
            return Ok(());
        }

        let winner = self
            .items
            .get(chosen)
            .expect("displayed items exist")
            .values
            .clone();
        let mut added = 0;
        for other in self.display.iter().filter(|r| r.id != chosen) {
            let loser = &self
                .items
                .get(&other.id)
                .expect("displayed items exist")
                .values;
            let row = FeedbackRow {
                round: round_index,
                winner: chosen.to_string(),
                loser: other.id.clone(),
                margin: FEEDBACK_MARGIN,
            };
            // identical outcomes give an empty row, which says nothing
            if !difference_terms(&self.system.layout, &winner, loser).is_empty() {
                self.feedback.push(row);
                added += 1;
            }
        }
        let relaxations = self.resolve_with_ladder(round_index)?;
        let round = self.rounds.last_mut().expect("an open round");
        round.constraints_added = added;
        round.relaxation_applied = !relaxations.is_empty();
        round.relaxations = relaxations;

        if self.status == SessionStatus::Active && self.feedback_rounds() >= self.config.round_cap {
            self.status = SessionStatus::Capped;
        }
        if self.status == SessionStatus::Active {
            self.open_round();
        } else {
            self.display = top_k(&self.current_v, &self.items, self.config.k);
        }
        Ok(())
    }

    fn rebuild_rows(&mut self) {
        self.system.constraints.truncate(self.base_rows);
        for row in &self.feedback {
            let winner = &self.items.get(&row.winner).expect("known item").values;
            let loser = &self.items.get(&row.loser).expect("known item").values;
            self.system.push(LinearConstraint {
                terms: difference_terms(&self.system.layout, winner, loser),
                margin: row.margin,
                soft: false,
                provenance: Provenance::Feedback {
                    round: row.round,
                    winner: row.winner.clone(),
                    loser: row.loser.clone(),
                },
            });
        }
    }

    fn try_solve(&mut self) -> Result<bool, SessionError> {
        self.rebuild_rows();
        match self.system.solve(ObjectivePolicy::L1, &self.solver) {
            Ok(v) => {
                self.current_v = v;
                Ok(true)
            }
            Err(SolveError::Infeasible { .. }) => Ok(false),
            Err(SolveError::SolverFailure(msg)) => Err(SessionError::Solver(msg)),
        }
    }

    /// Re-solves, relaxing feedback when needed: first the newest batch at
    /// margin 0, then dropping batches oldest first. Base rows never move.
    fn resolve_with_ladder(&mut self, newest: usize) -> Result<Vec<Relaxation>, SessionError> {
        let mut steps = Vec::new();
        if self.try_solve()? {
            return Ok(steps);
        }
        for row in self.feedback.iter_mut().filter(|r| r.round == newest) {
            row.margin = 0;
        }
        steps.push(Relaxation::ZeroMargin {
            batch_round: newest,
        });
        while !self.try_solve()? {
            let Some(oldest) = self.feedback.first().map(|r| r.round) else {
                // only reachable if the solver rejects a base system it
                // accepted at start; keep the last value function
                self.status = SessionStatus::InfeasibleResolved;
                return Ok(steps);
            };
            self.feedback.retain(|r| r.round != oldest);
            steps.push(Relaxation::DroppedBatch {
                batch_round: oldest,
            });
        }
        Ok(steps)
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            status: self.status,
            round_count: self.rounds.len(),
            topk: self.display.iter().map(|r| r.id.clone()).collect(),
            debug_scores: self
                .display
                .iter()
                .map(|r| format_number(&r.score))
                .collect(),
            history: self.rounds.clone(),
            constraint_count: self.system.constraints.len(),
        }
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            session_id: self.id.clone(),
            net: serialize_net(&self.net),
            k: self.config.k,
            round_cap: self.config.round_cap,
            mode: self.config.mode,
            items: self.items.to_documents(),
            items_provenance: self.items.provenance.clone(),
            rounds: self.rounds.clone(),
            status: self.status,
            constraint_count: self.system.constraints.len(),
            feedback: self.feedback.clone(),
            value_function: self.current_v.to_document(),
        }
    }

    pub fn restore(snapshot: &SessionSnapshot) -> Result<Self, SessionError> {
        let bad = |e: String| SessionError::Snapshot(e);
        let net = parse_net(&snapshot.net).map_err(|e| bad(e.to_string()))?;
        let items = crate::ranking::items_from_documents(
            &snapshot.items,
            net.variables(),
            &snapshot.items_provenance,
        )
        .map_err(SessionError::Items)?;
        let config = SessionConfig {
            k: snapshot.k,
            round_cap: snapshot.round_cap,
            mode: snapshot.mode,
        };
        let system = base_system(&net, config.mode)?;
        let current_v = GaValueFunction::from_document(&snapshot.value_function)
            .map_err(|e| bad(e.to_string()))?;
        if current_v.entry_count() != system.lp_variable_count() {
            return Err(bad("value function does not match the net".into()));
        }
        if snapshot
            .feedback
            .iter()
            .any(|r| items.get(&r.winner).is_none() || items.get(&r.loser).is_none())
        {
            return Err(bad("feedback names an unknown item".into()));
        }
        let mut session = Self {
            id: snapshot.session_id.clone(),
            base_rows: system.constraints.len(),
            net,
            items,
            config,
            system,
            feedback: snapshot.feedback.clone(),
            current_v,
            display: Vec::new(),
            rounds: snapshot.rounds.clone(),
            status: snapshot.status,
            solver: CertifiedFloat::default(),
        };
        session.rebuild_rows();
        session.system.status =
            crate::compiler::SystemStatus::Feasible(session.current_v.entries());
        let last = session
            .rounds
            .last()
            .ok_or_else(|| bad("no rounds".into()))?;
        session.display = top_k(&session.current_v, &session.items, session.config.k);
        let stale = session
            .display
            .iter()
            .map(|r| &r.id)
            .ne(last.displayed.iter());
        if session.status == SessionStatus::Active && stale {
            return Err(bad(
                "stored display does not match the stored value function".into(),
            ));
        }
        Ok(session)
    }
}
