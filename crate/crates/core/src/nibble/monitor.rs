//! Per-iteration checks of the tracked size, degree and crowding bounds.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::graph::{MultipartiteGraph, VertexId};
use crate::rng::substream;
use crate::schedule::{EnforcedMonitors, MonitorConfig, NibbleSchedule};

use super::iteration::IterationSample;
use super::state::RoundState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub what: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorCheck {
    pub checked: usize,
    pub failures: usize,
    pub passed: bool,
    /// Largest violation seen, if any.
    pub worst: Option<Offender>,
}

impl MonitorCheck {
    fn new() -> Self {
        Self { passed: true, ..Self::default() }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String, value: f64, bound: f64) {
        self.checked += 1;
        if ok {
            return;
        }
        self.failures += 1;
        self.passed = false;
        let gap = (value - bound).abs();
        if self.worst.as_ref().is_none_or(|w| gap > (w.value - w.bound).abs()) {
            self.worst = Some(Offender { what: what(), value, bound });
        }
    }

    fn upper(&mut self, value: f64, bound: f64, what: impl FnOnce() -> String) {
        self.record(value <= bound, what, value, bound);
    }

    fn lower(&mut self, value: f64, bound: f64, what: impl FnOnce() -> String) {
        self.record(value >= bound, what, value, bound);
    }
}

/// Snapshot of all monitored quantities after one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub r: u64,
    /// Iteration count of the state the report describes.
    pub t: u64,
    pub active_lanes: usize,
    pub min_candidate: usize,
    pub max_candidate: usize,
    pub s_minus: f64,
    pub s_plus: f64,
    pub d_bound: f64,
    pub empty_sets: usize,
    pub size_band: MonitorCheck,
    /// Passes when the inside fraction reaches the configured quantile.
    pub shrink_band: MonitorCheck,
    pub shrink_inside_fraction: f64,
    pub degree: MonitorCheck,
    pub transversal_neighbors: MonitorCheck,
    pub remaining_neighbors: MonitorCheck,
    pub crowding: MonitorCheck,
    pub calibration_violations: usize,
}

impl MonitorReport {
    /// Every check with its name, in a fixed order.
    pub fn checks(&self) -> [(&'static str, &MonitorCheck); 6] {
        [
            ("size band", &self.size_band),
            ("shrink band", &self.shrink_band),
            ("degree", &self.degree),
            ("transversal neighbors", &self.transversal_neighbors),
            ("remaining neighbors", &self.remaining_neighbors),
            ("crowding", &self.crowding),
        ]
    }

    /// No empty candidate set and every enforced check passed.
    pub fn passed(&self, enforce: &EnforcedMonitors) -> bool {
        self.failed(enforce).is_empty()
    }

    /// Human-readable diagnostics for the enforced checks that failed.
    pub fn failed(&self, enforce: &EnforcedMonitors) -> Vec<String> {
        let mut out = Vec::new();
        if self.empty_sets > 0 {
            out.push(format!("{} empty candidate sets", self.empty_sets));
        }
        let flags = [
            enforce.size_band,
            enforce.shrink_band,
            enforce.degree,
            enforce.transversal_neighbors,
            enforce.remaining_neighbors,
            enforce.crowding,
        ];
        for ((name, check), on) in self.checks().into_iter().zip(flags) {
            if on && !check.passed {
                let worst = check
                    .worst
                    .as_ref()
                    .map(|w| format!("; worst: {} = {:.4} vs bound {:.4}", w.what, w.value, w.bound))
                    .unwrap_or_default();
                out.push(format!("{name}: {} of {} checks failed{worst}", check.failures, check.checked));
            }
        }
        out
    }
}

pub(crate) struct MonitorInput<'a> {
    pub g: &'a MultipartiteGraph,
    pub used: &'a [bool],
    pub pre: &'a RoundState,
    pub post: &'a RoundState,
    pub sample: &'a IterationSample,
    pub sched: &'a NibbleSchedule,
    pub cfg: &'a MonitorConfig,
    pub seed: u64,
    pub attempt: u64,
}

const MONITOR_SAMPLE: u64 = 3;

pub(crate) fn evaluate(inp: &MonitorInput<'_>) -> MonitorReport {
    let MonitorInput { g, used, pre, post, sample, sched, cfg, .. } = *inp;
    let (r, t) = (post.r, post.t);
    let p = sched.p;
    let p_r = sched.p_r(r);
    let s0 = post.initial_size as f64;
    let s_minus = s0 * (1.0 - p_r - p * p).max(0.0).powf(t as f64);
    let s_plus = s0 * (1.0 - p_r + p * p).max(0.0).powf(t as f64);
    let d_bound = cfg.degree_bound_override.unwrap_or_else(|| sched.d(r, t));

    let mut size_band = MonitorCheck::new();
    let mut shrink_band = MonitorCheck::new();
    let mut empty_sets = 0;
    let mut inside = 0usize;
    for (l, (before, after)) in pre.lanes.iter().zip(&post.lanes).enumerate() {
        for &i in after.active() {
            let s_after = after.candidates(i).map_or(0, |s| s.len());
            if s_after == 0 {
                empty_sets += 1;
            }
            let size = s_after as f64;
            size_band.record(
                s_minus <= size && size <= s_plus,
                || format!("|V_{i}^{l}|"),
                size,
                if size < s_minus { s_minus } else { s_plus },
            );
            let s = before.candidates(i).map_or(0, |s| s.len()) as f64;
            let centre = (1.0 - p_r) * s;
            let slack = cfg.size_slack(p_r, s);
            let ok = (size - centre).abs() <= slack;
            if ok {
                inside += 1;
            }
            shrink_band.checked += 1;
            if !ok {
                shrink_band.failures += 1;
                let gap = (size - centre).abs() - slack;
                if shrink_band.worst.as_ref().is_none_or(|w| gap > (w.value - w.bound).abs()) {
                    shrink_band.worst = Some(Offender { what: format!("|V_{i}^{l}| - (1-p_r) s"), value: (size - centre).abs(), bound: slack });
                }
            }
        }
    }
    let shrink_inside_fraction = if shrink_band.checked == 0 { 1.0 } else { inside as f64 / shrink_band.checked as f64 };
    shrink_band.passed = shrink_inside_fraction >= cfg.statistical_quantile;

    let vertices = sample_vertices(inp);
    let partial: HashSet<VertexId> = post.partial_vertices().collect();
    let mut selected_in: HashMap<VertexId, usize> = HashMap::new();
    let selected_sets: Vec<HashSet<VertexId>> = sample
        .lanes
        .iter()
        .map(|ls| ls.selected.iter().map(|&(_, v)| v).collect())
        .collect();
    for set in &selected_sets {
        for &v in set {
            *selected_in.entry(v).or_default() += 1;
        }
    }

    let m = post.lane_count() as f64;
    let delta = sched.delta;
    let shrink_c3 = 1.0 - (1.0 + 2.0 * delta) * p;
    let c3_factor: f64 = (1.0 - 3.0 * delta) * p * p * (0..t).map(|j| shrink_c3.powi(j as i32)).sum::<f64>();
    let c4_factor = m * (1.0 - p - p_r - delta * p).max(0.0).powf(t as f64);

    let mut degree = MonitorCheck::new();
    let mut transversal_neighbors = MonitorCheck::new();
    let mut remaining_neighbors = MonitorCheck::new();
    let mut crowding = MonitorCheck::new();
    for &v in &vertices {
        let d_gr = g.neighbors(v).iter().filter(|&&w| !used[w as usize]).count() as f64;
        let mut total = 0usize;
        for (l, lane) in post.lanes.iter().enumerate() {
            let d = lane.degree_into(g, v);
            total += d;
            degree.upper(d as f64, d_bound, || format!("d(v{v}, V^{l})"));
        }
        if d_gr >= cfg.deg_threshold_c3 {
            let hits = g.neighbors(v).iter().filter(|w| partial.contains(w)).count() as f64;
            transversal_neighbors.lower(hits, c3_factor * d_gr, || format!("|N(v{v}) ∩ T|"));
        }
        remaining_neighbors.lower(total as f64, c4_factor * d_gr, || format!("sum_l |N(v{v}) ∩ V^l|"));
        let mut crowd_max = 0usize;
        for set in &selected_sets {
            let c = g.neighbors(v).iter().filter(|w| set.contains(w)).count();
            crowd_max = crowd_max.max(c);
        }
        crowding.upper(crowd_max as f64, cfg.crowd_bound, || format!("max_l |N(v{v}) ∩ T~^l|"));
        let member = selected_in.get(&v).copied().unwrap_or(0) as f64;
        crowding.upper(member, cfg.crowd_bound, || format!("#l with v{v} in T~^l"));
    }

    let (min_candidate, max_candidate) = post.candidate_size_range().unwrap_or((0, 0));
    MonitorReport {
        r,
        t,
        active_lanes: post.active_lanes(),
        min_candidate,
        max_candidate,
        s_minus,
        s_plus,
        d_bound,
        empty_sets,
        size_band,
        shrink_band,
        shrink_inside_fraction,
        degree,
        transversal_neighbors,
        remaining_neighbors,
        crowding,
        calibration_violations: sample.calibration_violations,
    }
}

/// Unused vertices checked this iteration, ascending.
fn sample_vertices(inp: &MonitorInput<'_>) -> Vec<VertexId> {
    let pool: Vec<VertexId> = (0..inp.g.vertex_count() as VertexId).filter(|&v| !inp.used[v as usize]).collect();
    match inp.cfg.sample_size {
        Some(size) if size < pool.len() => {
            let mut rng = substream(inp.seed, &[MONITOR_SAMPLE, inp.post.r, inp.post.t, inp.attempt]);
            let mut picked: Vec<VertexId> = index::sample(&mut rng, pool.len(), size).into_iter().map(|i| pool[i]).collect();
            picked.sort_unstable();
            picked
        }
        _ => pool,
    }
}
