//! The two-level nibble: rounds of simultaneously grown partial
//! transversals, each finished by Moser–Tardos completion.
//!
//! A round with `m` lanes starts every lane with the full unused parts as
//! candidate sets. Each iteration selects one candidate per active part,
//! activates parts with probability `p`, accepts conflict-free activated
//! selections, and deletes candidates so that every one of them disappears
//! with the same probability `p_r`. After `t*` iterations the lanes are
//! completed one after the other.

mod iteration;
mod monitor;
mod state;
mod trace;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MultipartiteGraph, VertexId};
use crate::lll::{find_transversal, CandidateFamily, LllConfig, LllError, Transversal};
use crate::oracle::{verify_packing, Packing};
use crate::rng::derive_seed;
use crate::schedule::{NibbleSchedule, ScheduleMode};

pub use crate::schedule::MonitorConfig;
pub use iteration::{
    artificial_probability, hit_probability, run_iteration, IterationOutcome, IterationSample, LaneSample,
};
pub use monitor::{MonitorCheck, MonitorReport, Offender};
pub use state::{available_per_part, init_round, round_size, Lane, RoundState};
pub use trace::{write_trace, TraceRow};

const COMPLETE: u64 = 4;
const ROUND: u64 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NibbleError {
    #[error("part {part} has {available} unused vertices but the round needs {needed}")]
    DepletedPart { part: usize, available: usize, needed: usize },
    #[error("lane {lane} has an empty candidate set in part {part}")]
    EmptyCandidates { lane: usize, part: usize },
    #[error("iteration {t} requested but t* = {t_star}")]
    IterationLimit { t: u64, t_star: u64 },
    #[error("round {r}, iteration {t}: monitors failed on all {attempts} attempts: {}", diagnostics.join(" | "))]
    RetryBudgetExhausted { r: u64, t: u64, attempts: u64, diagnostics: Vec<String> },
    #[error("round {r}: completing transversal {lane} failed: {source}")]
    CompletionFailed { r: u64, lane: usize, source: LllError },
}

impl NibbleError {
    /// True when the failure proves a candidate family has no independent
    /// transversal, as opposed to a budget running out.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, NibbleError::CompletionFailed { source: LllError::Infeasible, .. })
    }

    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            NibbleError::RetryBudgetExhausted { .. }
                | NibbleError::CompletionFailed {
                    source: LllError::Exhausted { .. } | LllError::GuardExceeded { .. },
                    ..
                }
        )
    }
}

/// What a round does once an iteration has failed its monitors on every
/// allowed attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnRetryExhausted {
    /// Fail the round.
    Abort,
    /// Keep the last accepted state and go straight to completion.
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvePolicy {
    pub lll: LllConfig,
    pub on_retry_exhausted: OnRetryExhausted,
    /// Retry a failed completion over every unused vertex that is compatible
    /// with the partial transversal.
    pub widen_completion: bool,
    /// Worker threads; 0 uses the ambient pool.
    pub workers: usize,
    /// Local degree the caller expects; larger values only raise a warning.
    pub local_degree_cap: Option<usize>,
}

impl SolvePolicy {
    pub fn theory() -> Self {
        Self {
            lll: LllConfig::default(),
            on_retry_exhausted: OnRetryExhausted::Abort,
            widen_completion: true,
            workers: 0,
            local_degree_cap: None,
        }
    }

    pub fn practical() -> Self {
        Self { on_retry_exhausted: OnRetryExhausted::Complete, ..Self::theory() }
    }

    pub fn for_schedule(sched: &NibbleSchedule) -> Self {
        match sched.mode {
            ScheduleMode::Theory => Self::theory(),
            ScheduleMode::Practical => Self::practical(),
        }
    }
}

impl Default for SolvePolicy {
    fn default() -> Self {
        Self::practical()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutput {
    pub transversals: Vec<Transversal>,
    pub trace: Vec<TraceRow>,
    /// Iteration at which retries ran out and the round went to completion.
    pub frozen_at: Option<u64>,
    /// Lanes whose completion needed the widened candidate sets.
    pub widened: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundFailure {
    pub error: NibbleError,
    /// Transversals finished before the failure.
    pub salvaged: Vec<Transversal>,
    pub trace: Vec<TraceRow>,
}

/// Runs `f` on a pool with `workers` threads, or inline for 0.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool").install(f)
}

fn check_state(g: &MultipartiteGraph, used: &[bool], st: &RoundState) {
    let res = if cfg!(debug_assertions) {
        st.check_invariants(g, used)
    } else {
        st.check_invariants_sampled(g, used, st.t as usize % st.lane_count().max(1))
    };
    if let Err(e) = res {
        panic!("round state invariant broken at r={}, t={}: {e}", st.r, st.t);
    }
}

/// One round: `t*` iterations with bounded retries, then completion of every
/// lane in order.
pub fn run_round(
    g: &MultipartiteGraph,
    used: &[bool],
    r: u64,
    sched: &NibbleSchedule,
    cfg: &MonitorConfig,
    policy: &SolvePolicy,
    seed: u64,
) -> Result<RoundOutput, RoundFailure> {
    let fail = |error, salvaged, trace| RoundFailure { error, salvaged, trace };
    let mut state = init_round(g, used, r, sched).map_err(|e| fail(e, vec![], vec![]))?;
    let round_seed = derive_seed(seed, &[ROUND, r]);
    let mut trace = Vec::new();
    let mut frozen_at = None;
    'iterations: while state.t < sched.t_star && !state.is_finished() {
        let mut attempt = 0u64;
        loop {
            let out = run_iteration(g, used, &state, sched, cfg, round_seed, attempt)
                .map_err(|e| fail(e, vec![], trace.clone()))?;
            if out.report.passed(&cfg.enforce) {
                trace.push(TraceRow::from_report(&out.report, attempt));
                state = out.state;
                check_state(g, used, &state);
                break;
            }
            attempt += 1;
            if attempt > cfg.retry_budget as u64 {
                let diagnostics = out.report.failed(&cfg.enforce);
                log::debug!("round {r}, iteration {}: retries exhausted: {diagnostics:?}", state.t);
                match policy.on_retry_exhausted {
                    OnRetryExhausted::Abort => {
                        let error = NibbleError::RetryBudgetExhausted { r, t: state.t, attempts: attempt, diagnostics };
                        return Err(fail(error, vec![], trace));
                    }
                    OnRetryExhausted::Complete => {
                        frozen_at = Some(state.t);
                        break 'iterations;
                    }
                }
            }
        }
    }
    let (transversals, widened) = complete_round(g, used, &state, policy, round_seed).map_err(|(e, salvaged)| {
        fail(e, salvaged, trace.clone())
    })?;
    Ok(RoundOutput { transversals, trace, frozen_at, widened })
}

/// Completes lanes `0..m` in order. Each completion avoids every other
/// lane's partial vertices and every earlier completion.
fn complete_round(
    g: &MultipartiteGraph,
    used: &[bool],
    state: &RoundState,
    policy: &SolvePolicy,
    seed: u64,
) -> Result<(Vec<Transversal>, usize), (NibbleError, Vec<Transversal>)> {
    let r = state.r;
    let mut taken: HashSet<VertexId> = state.partial_vertices().collect();
    let mut done = Vec::with_capacity(state.lane_count());
    let mut widened = 0;
    for (l, lane) in state.lanes().iter().enumerate() {
        let mut full = lane.partial().clone();
        if !lane.is_finished() {
            let cfg = LllConfig { seed: derive_seed(seed, &[COMPLETE, l as u64]), ..policy.lll };
            let family: CandidateFamily = lane
                .active()
                .iter()
                .map(|&i| (i, lane.candidate_vertices(g, i).into_iter().filter(|v| !taken.contains(v)).collect()))
                .collect();
            let found = match find_transversal(g, &family, &cfg) {
                Ok(out) => out.transversal,
                Err(first) if policy.widen_completion => {
                    let partial = lane.partial();
                    let compatible = |v: VertexId| {
                        !used[v as usize]
                            && !taken.contains(&v)
                            && g.neighbors(v).iter().all(|&w| partial.get(g.part_of(w)) != Some(w))
                    };
                    let wide: CandidateFamily = lane
                        .active()
                        .iter()
                        .map(|&i| (i, g.part_range(i).filter(|&v| compatible(v)).collect()))
                        .collect();
                    log::debug!("round {r}, lane {l}: completion failed ({first}); widening");
                    widened += 1;
                    match find_transversal(g, &wide, &cfg) {
                        Ok(out) => out.transversal,
                        Err(source) => return Err((NibbleError::CompletionFailed { r, lane: l, source }, done)),
                    }
                }
                Err(source) => return Err((NibbleError::CompletionFailed { r, lane: l, source }, done)),
            };
            full.extend(&found);
        }
        debug_assert!(full.check_full(g).is_ok(), "completed transversal is not independent and full");
        taken.extend(full.vertices());
        done.push(full);
    }
    Ok((done, widened))
}

/// Result of [`pack`]. The packing always passes `verify_packing`.
#[derive(Clone, Debug, PartialEq)]
pub struct PackOutcome {
    pub packing: Packing,
    pub rounds_completed: u64,
    pub trace: Vec<TraceRow>,
    /// Set when a round failed; the packing then holds what was salvaged.
    pub error: Option<NibbleError>,
    pub warnings: Vec<String>,
}

impl PackOutcome {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs rounds `1..=r*`, or until some part has no unused vertex left.
pub fn pack(
    g: &MultipartiteGraph,
    sched: &NibbleSchedule,
    cfg: &MonitorConfig,
    policy: &SolvePolicy,
    seed: u64,
) -> PackOutcome {
    with_workers(policy.workers, || pack_inner(g, sched, cfg, policy, seed))
}

fn pack_inner(
    g: &MultipartiteGraph,
    sched: &NibbleSchedule,
    cfg: &MonitorConfig,
    policy: &SolvePolicy,
    seed: u64,
) -> PackOutcome {
    let mut warnings = Vec::new();
    if sched.mode == ScheduleMode::Theory {
        let stats = g.stats();
        let cap = (1.0 - sched.eps) * g.n() as f64;
        if stats.max_degree as f64 > cap {
            warnings.push(format!("maximum degree {} exceeds (1 - eps) n = {cap:.3}", stats.max_degree));
        }
        if let Some(c) = policy.local_degree_cap {
            if stats.local_degree > c {
                warnings.push(format!("local degree {} exceeds the configured cap {c}", stats.local_degree));
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut used = vec![false; g.vertex_count()];
    let mut transversals = Vec::new();
    let mut trace = Vec::new();
    let mut error = None;
    let mut rounds_completed = 0;
    if g.k() > 0 {
        for r in 1..=sched.r_star {
            if available_per_part(g, &used).into_iter().min().unwrap_or(0) == 0 {
                break;
            }
            let mut take = |ts: Vec<Transversal>, used: &mut Vec<bool>| {
                for t in ts {
                    for v in t.vertices() {
                        used[v as usize] = true;
                    }
                    transversals.push(t);
                }
            };
            match run_round(g, &used, r, sched, cfg, policy, seed) {
                Ok(out) => {
                    take(out.transversals, &mut used);
                    trace.extend(out.trace);
                    rounds_completed = r;
                }
                Err(f) => {
                    take(f.salvaged, &mut used);
                    trace.extend(f.trace);
                    error = Some(f.error);
                    break;
                }
            }
        }
    }
    let packing = Packing::new(transversals);
    if let Err(v) = verify_packing(g, &packing) {
        panic!("nibble produced an invalid packing: {v:?}");
    }
    PackOutcome { packing, rounds_completed, trace, error, warnings }
}
