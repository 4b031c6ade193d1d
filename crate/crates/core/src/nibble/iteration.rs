//! One iteration of a round: select, activate, accept, retire parts, delete.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::graph::{MultipartiteGraph, VertexId};
use crate::rng::substream;
use crate::schedule::{MonitorConfig, NibbleSchedule};

use super::monitor::{evaluate, MonitorInput, MonitorReport};
use super::state::{Lane, RoundState};
use super::NibbleError;

const STEP_SELECT: u64 = 1;
const STEP_DELETE: u64 = 2;

/// Random choices of one lane in one iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaneSample {
    /// One uniformly chosen candidate per active part.
    pub selected: Vec<(usize, VertexId)>,
    /// Parts whose coin came up.
    pub activated: Vec<usize>,
    /// Activated parts whose vertex was accepted into the partial transversal.
    pub accepted: Vec<usize>,
    /// Candidates hit by the deletion event: a neighbor among the activated
    /// selections of this lane or an artificial deletion. Covers every part
    /// that was active before the iteration.
    pub deleted: Vec<VertexId>,
    /// Candidates with `B = 1`.
    pub artificial: Vec<VertexId>,
    /// Candidates dropped because another lane accepted them.
    pub taken_elsewhere: Vec<VertexId>,
}

impl LaneSample {
    pub fn selection(&self, part: usize) -> Option<VertexId> {
        self.selected.iter().find(|&&(i, _)| i == part).map(|&(_, v)| v)
    }

    /// The vertices added to the partial transversal.
    pub fn accepted_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.accepted.iter().map(|&i| self.selection(i).expect("accepted part was selected"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IterationSample {
    pub lanes: Vec<LaneSample>,
    /// Multiplicity of every activated selection over all lanes.
    pub activated_multiset: BTreeMap<VertexId, u32>,
    /// Candidates whose exact hit probability exceeded `p_r`.
    pub calibration_violations: usize,
}

#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub state: RoundState,
    pub sample: IterationSample,
    pub report: MonitorReport,
}

/// Probability that some neighbor of `v` is selected and activated in
/// `lane`: `1 - prod_j (1 - p d_j / s_j)` over the active parts.
pub fn hit_probability(g: &MultipartiteGraph, lane: &Lane, v: VertexId, p: f64) -> f64 {
    let mut keep = 1.0;
    let nbrs = g.neighbors(v);
    let mut a = 0;
    while a < nbrs.len() {
        let j = g.part_of_search(nbrs[a]);
        let (off, end) = (g.part_offset(j), g.part_offset(j + 1) as VertexId);
        let mut b = a;
        while b < nbrs.len() && nbrs[b] < end {
            b += 1;
        }
        if let Some(set) = lane.candidates(j) {
            let d = nbrs[a..b].iter().filter(|&&w| set.contains(w as usize - off)).count();
            if d > 0 {
                keep *= 1.0 - p * d as f64 / set.len() as f64;
            }
        }
        a = b;
    }
    1.0 - keep
}

/// Probability of the artificial deletion that lifts the total deletion
/// probability to exactly `p_r`; `None` when `q > p_r`.
pub fn artificial_probability(q: f64, p_r: f64) -> Option<f64> {
    if q > p_r {
        None
    } else if q >= 1.0 {
        Some(0.0)
    } else {
        Some((1.0 - (1.0 - p_r) / (1.0 - q)).max(0.0))
    }
}

struct Bitmap(Vec<u64>);

impl Bitmap {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    #[inline]
    fn set(&mut self, v: VertexId) {
        self.0[v as usize >> 6] |= 1 << (v & 63);
    }

    #[inline]
    fn get(&self, v: VertexId) -> bool {
        self.0[v as usize >> 6] >> (v & 63) & 1 == 1
    }
}

/// Runs one iteration from `state`. Randomness comes from substreams keyed
/// by `(seed, r, t, attempt, lane)`, so a retry with a new `attempt` redraws
/// everything.
pub fn run_iteration(
    g: &MultipartiteGraph,
    used: &[bool],
    state: &RoundState,
    sched: &NibbleSchedule,
    cfg: &MonitorConfig,
    seed: u64,
    attempt: u64,
) -> Result<IterationOutcome, NibbleError> {
    if state.t >= sched.t_star {
        return Err(NibbleError::IterationLimit { t: state.t, t_star: sched.t_star });
    }
    for (l, lane) in state.lanes.iter().enumerate() {
        if let Some(&part) = lane.active.iter().find(|&&i| lane.candidates(i).is_some_and(|s| s.is_empty())) {
            return Err(NibbleError::EmptyCandidates { lane: l, part });
        }
    }
    let (r, t) = (state.r, state.t);
    let p = sched.p;
    let p_r = sched.p_r(r);

    let draws: Vec<(Vec<(usize, VertexId)>, Vec<bool>)> = state
        .lanes
        .par_iter()
        .enumerate()
        .map(|(l, lane)| {
            let mut rng = substream(seed, &[STEP_SELECT, r, t, attempt, l as u64]);
            let mut selected = Vec::with_capacity(lane.active.len());
            let mut coins = Vec::with_capacity(lane.active.len());
            for &i in &lane.active {
                let set = lane.candidates(i).expect("active part has candidates");
                let local = set.sample(&mut rng).expect("nonempty candidate set");
                selected.push((i, g.vertex(i, local)));
                coins.push(rng.gen::<f64>() < p);
            }
            (selected, coins)
        })
        .collect();

    let mut multiset: BTreeMap<VertexId, u32> = BTreeMap::new();
    for (selected, coins) in &draws {
        for (&(_, v), &on) in selected.iter().zip(coins) {
            if on {
                *multiset.entry(v).or_default() += 1;
            }
        }
    }

    let results: Vec<(Lane, LaneSample, usize)> = state
        .lanes
        .par_iter()
        .zip(draws)
        .enumerate()
        .map(|(l, (lane, (selected, coins)))| {
            let mut hit = Bitmap::new(g.vertex_count());
            for (&(_, v), &on) in selected.iter().zip(&coins) {
                if on {
                    for &w in g.neighbors(v) {
                        hit.set(w);
                    }
                }
            }
            let activated: Vec<usize> = selected.iter().zip(&coins).filter(|(_, &on)| on).map(|(&(i, _), _)| i).collect();
            let accepted: Vec<usize> = selected
                .iter()
                .zip(&coins)
                .filter(|&(&(_, v), &on)| on && multiset[&v] == 1 && !hit.get(v))
                .map(|(&(i, _), _)| i)
                .collect();

            let mut next = lane.clone();
            for (&(i, v), _) in selected.iter().zip(&coins).filter(|&(&(i, _), _)| accepted.binary_search(&i).is_ok()) {
                next.partial.insert(i, v);
                next.candidates[i] = None;
            }
            next.active.retain(|i| accepted.binary_search(i).is_err());

            let mut rng = substream(seed, &[STEP_DELETE, r, t, attempt, l as u64]);
            let mut deleted = Vec::new();
            let mut artificial = Vec::new();
            let mut violations = 0;
            for &i in &lane.active {
                let set = lane.candidates(i).expect("active part has candidates");
                for local in set.iter() {
                    let v = g.vertex(i, local);
                    let q = hit_probability(g, lane, v, p);
                    let b = artificial_probability(q, p_r).unwrap_or_else(|| {
                        violations += 1;
                        0.0
                    });
                    let coin = rng.gen::<f64>() < b;
                    if coin {
                        artificial.push(v);
                    }
                    if coin || hit.get(v) {
                        deleted.push(v);
                        if let Some(s) = next.candidates[i].as_mut() {
                            s.remove(local);
                        }
                    }
                }
            }
            let sample =
                LaneSample { selected, activated, accepted, deleted, artificial, taken_elsewhere: Vec::new() };
            (next, sample, violations)
        })
        .collect();

    let mut lanes = Vec::with_capacity(results.len());
    let mut samples = Vec::with_capacity(results.len());
    let mut calibration_violations = 0;
    for (lane, sample, violations) in results {
        lanes.push(lane);
        samples.push(sample);
        calibration_violations += violations;
    }

    // keep partial transversals disjoint across iterations
    let accepted: Vec<(usize, VertexId)> = samples
        .iter()
        .enumerate()
        .flat_map(|(l, s)| s.accepted_vertices().map(move |v| (l, v)).collect::<Vec<_>>())
        .collect();
    for (l, lane) in lanes.iter_mut().enumerate() {
        for &(owner, v) in &accepted {
            if owner == l {
                continue;
            }
            let part = g.part_of(v);
            if let Some(s) = lane.candidates[part].as_mut() {
                if s.remove(g.local_index(v)) {
                    samples[l].taken_elsewhere.push(v);
                }
            }
        }
    }

    let next = RoundState { r, t: t + 1, initial_size: state.initial_size, lanes };
    let sample = IterationSample { lanes: samples, activated_multiset: multiset, calibration_violations };
    let report = evaluate(&MonitorInput {
        g,
        used,
        pre: state,
        post: &next,
        sample: &sample,
        sched,
        cfg,
        seed,
        attempt,
    });
    Ok(IterationOutcome { state: next, sample, report })
}
