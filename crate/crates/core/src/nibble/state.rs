//! Round state: per-lane candidate sets and partial transversals.

use std::collections::HashMap;

use crate::bitset::PartSet;
use crate::graph::{MultipartiteGraph, VertexId};
use crate::lll::Transversal;

use super::NibbleError;

/// One partial transversal of a round together with its candidate sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lane {
    /// Indexed by part; `Some` exactly for the active parts.
    pub(crate) candidates: Vec<Option<PartSet>>,
    pub(crate) active: Vec<usize>,
    pub(crate) partial: Transversal,
}

impl Lane {
    /// Parts still to be visited, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn candidates(&self, part: usize) -> Option<&PartSet> {
        self.candidates.get(part).and_then(Option::as_ref)
    }

    /// Global ids of the candidates in `part`, ascending.
    pub fn candidate_vertices(&self, g: &MultipartiteGraph, part: usize) -> Vec<VertexId> {
        self.candidates(part).map(|s| s.iter().map(|i| g.vertex(part, i)).collect()).unwrap_or_default()
    }

    pub fn partial(&self) -> &Transversal {
        &self.partial
    }

    pub fn is_finished(&self) -> bool {
        self.active.is_empty()
    }

    /// Number of candidates of `v` among this lane's active parts.
    pub fn degree_into(&self, g: &MultipartiteGraph, v: VertexId) -> usize {
        g.neighbors(v)
            .iter()
            .filter(|&&w| {
                let j = g.part_of(w);
                self.candidates(j).is_some_and(|set| set.contains(w as usize - g.part_offset(j)))
            })
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundState {
    pub r: u64,
    pub t: u64,
    /// Smallest number of unused vertices in a part when the round started.
    pub initial_size: usize,
    pub(crate) lanes: Vec<Lane>,
}

/// Count of unused vertices in every part.
pub fn available_per_part(g: &MultipartiteGraph, used: &[bool]) -> Vec<usize> {
    (0..g.k()).map(|i| g.part_range(i).filter(|&v| !used[v as usize]).count()).collect()
}

/// Transversals grown in a round that starts with `available` vertices in
/// its smallest part: `max(1, floor(p * available))`, capped by `available`.
pub fn round_size(p: f64, available: usize) -> usize {
    let m = (p * available as f64 * (1.0 + 1e-12)).floor() as usize;
    m.max(1).min(available)
}

/// Starts round `r`: every lane gets the full unused part as candidates.
pub fn init_round(
    g: &MultipartiteGraph,
    used: &[bool],
    r: u64,
    sched: &crate::schedule::NibbleSchedule,
) -> Result<RoundState, NibbleError> {
    let avail = available_per_part(g, used);
    let min = avail.iter().copied().min().unwrap_or(0);
    RoundState::new(g, used, r, round_size(sched.p, min))
}

impl RoundState {
    /// A round with an explicit number of lanes.
    pub fn new(g: &MultipartiteGraph, used: &[bool], r: u64, lanes: usize) -> Result<Self, NibbleError> {
        assert_eq!(used.len(), g.vertex_count(), "used mask has the wrong length");
        let avail = available_per_part(g, used);
        for (part, &available) in avail.iter().enumerate() {
            if available < lanes.max(1) {
                return Err(NibbleError::DepletedPart { part, available, needed: lanes.max(1) });
            }
        }
        let sets: Vec<Option<PartSet>> = (0..g.k())
            .map(|i| {
                let off = g.part_offset(i);
                Some(PartSet::from_indices(
                    g.part_size(i),
                    g.part_range(i).filter(|&v| !used[v as usize]).map(|v| v as usize - off),
                ))
            })
            .collect();
        let lane = Lane { candidates: sets, active: (0..g.k()).collect(), partial: Transversal::new() };
        Ok(Self {
            r,
            t: 0,
            initial_size: avail.iter().copied().min().unwrap_or(0),
            lanes: vec![lane; lanes],
        })
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    pub fn lane(&self, l: usize) -> &Lane {
        &self.lanes[l]
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    pub fn active_lanes(&self) -> usize {
        self.lanes.iter().filter(|l| !l.is_finished()).count()
    }

    pub fn is_finished(&self) -> bool {
        self.lanes.iter().all(Lane::is_finished)
    }

    /// `(min, max)` candidate-set size over active `(lane, part)` pairs.
    pub fn candidate_size_range(&self) -> Option<(usize, usize)> {
        self.lanes
            .iter()
            .flat_map(|l| l.candidates.iter().flatten().map(PartSet::len))
            .fold(None, |acc, s| match acc {
                None => Some((s, s)),
                Some((lo, hi)) => Some((lo.min(s), hi.max(s))),
            })
    }

    pub fn has_empty_candidates(&self) -> bool {
        self.lanes.iter().any(|l| l.candidates.iter().flatten().any(PartSet::is_empty))
    }

    /// Vertices of every partial transversal.
    pub fn partial_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.lanes.iter().flat_map(|l| l.partial.vertices())
    }

    /// Checks every structural invariant of the round; returns a description
    /// of the first one broken.
    pub fn check_invariants(&self, g: &MultipartiteGraph, used: &[bool]) -> Result<(), String> {
        self.check_lanes(g, used, |_| true)
    }

    /// Like [`Self::check_invariants`], with the per-candidate checks
    /// restricted to lane `sampled`.
    pub fn check_invariants_sampled(&self, g: &MultipartiteGraph, used: &[bool], sampled: usize) -> Result<(), String> {
        self.check_lanes(g, used, |l| l == sampled)
    }

    fn check_lanes(&self, g: &MultipartiteGraph, used: &[bool], full: impl Fn(usize) -> bool) -> Result<(), String> {
        let mut owner: HashMap<VertexId, usize> = HashMap::new();
        for (l, lane) in self.lanes.iter().enumerate() {
            lane.partial.check(g).map_err(|e| format!("lane {l}: partial transversal broken: {e:?}"))?;
            let mut covered = vec![false; g.k()];
            for (part, v) in lane.partial.iter() {
                covered[part] = true;
                if used[v as usize] {
                    return Err(format!("lane {l}: partial uses finished vertex {v}"));
                }
                if let Some(other) = owner.insert(v, l) {
                    return Err(format!("vertex {v} in the partials of lanes {other} and {l}"));
                }
            }
            for part in 0..g.k() {
                let active = lane.candidates[part].is_some();
                if active == covered[part] {
                    return Err(format!("lane {l}: part {part} is both or neither active and covered"));
                }
            }
            if lane.active != (0..g.k()).filter(|&i| lane.candidates[i].is_some()).collect::<Vec<_>>() {
                return Err(format!("lane {l}: active list out of sync"));
            }
            if !full(l) {
                continue;
            }
            for &i in &lane.active {
                for v in lane.candidate_vertices(g, i) {
                    if used[v as usize] {
                        return Err(format!("lane {l}: candidate {v} already used"));
                    }
                }
            }
            for v in lane.partial.vertices() {
                for &w in g.neighbors(v) {
                    let j = g.part_of(w);
                    if lane.candidates(j).is_some_and(|s| s.contains(g.local_index(w))) {
                        return Err(format!("lane {l}: candidate {w} adjacent to partial vertex {v}"));
                    }
                }
            }
        }
        Ok(())
    }
}
