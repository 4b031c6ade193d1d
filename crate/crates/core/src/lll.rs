//! Independent transversals via Moser–Tardos resampling, with an exact
//! backtracking fallback.
//!
//! The bad events are the edges lying inside the current choice. Resampling
//! an event redraws the two endpoint parts. When every candidate set has at
//! least `2eΔ` vertices the expected number of resamples is linear in the
//! number of edges between candidate sets; the resample budget only guards
//! against infeasible inputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MultipartiteGraph, VertexId};
use crate::rng::substream;

/// One candidate vertex subset per part in scope: `(part, vertices)`.
pub type CandidateFamily = Vec<(usize, Vec<VertexId>)>;

/// A (possibly partial) transversal: at most one vertex per part.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transversal {
    choice: BTreeMap<usize, VertexId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransversalDefect {
    #[error("vertex {vertex} is claimed for part {claimed} but lies in part {actual}")]
    WrongPart { vertex: VertexId, claimed: usize, actual: usize },
    #[error("edge {0} - {1} inside the transversal")]
    Edge(VertexId, VertexId),
    #[error("part {0} is not covered")]
    Uncovered(usize),
}

impl Transversal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_choice(choice: impl IntoIterator<Item = (usize, VertexId)>) -> Self {
        Self { choice: choice.into_iter().collect() }
    }

    /// Full transversal from one vertex per part, listed in part order.
    pub fn from_vertices(vertices: &[VertexId]) -> Self {
        Self::from_choice(vertices.iter().copied().enumerate())
    }

    pub fn insert(&mut self, part: usize, v: VertexId) -> Option<VertexId> {
        self.choice.insert(part, v)
    }

    pub fn get(&self, part: usize) -> Option<VertexId> {
        self.choice.get(&part).copied()
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    /// Covered part indices, ascending.
    pub fn scope(&self) -> impl Iterator<Item = usize> + '_ {
        self.choice.keys().copied()
    }

    /// `(part, vertex)` pairs in part order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, VertexId)> + '_ {
        self.choice.iter().map(|(&p, &v)| (p, v))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.choice.values().copied()
    }

    pub fn extend(&mut self, other: &Transversal) {
        for (p, v) in other.iter() {
            self.choice.insert(p, v);
        }
    }

    pub fn covers_all(&self, k: usize) -> bool {
        self.choice.len() == k && self.choice.keys().copied().eq(0..k)
    }

    /// Membership and independence of the chosen vertices.
    pub fn check(&self, g: &MultipartiteGraph) -> Result<(), TransversalDefect> {
        for (&part, &v) in &self.choice {
            let actual = g.part_of(v);
            if actual != part {
                return Err(TransversalDefect::WrongPart { vertex: v, claimed: part, actual });
            }
        }
        for &v in self.choice.values() {
            for &w in g.neighbors(v) {
                if w > v && self.choice.get(&g.part_of(w)) == Some(&w) {
                    return Err(TransversalDefect::Edge(v, w));
                }
            }
        }
        Ok(())
    }

    /// [`Self::check`] plus coverage of all `k` parts.
    pub fn check_full(&self, g: &MultipartiteGraph) -> Result<(), TransversalDefect> {
        if let Some(missing) = (0..g.k()).find(|p| !self.choice.contains_key(p)) {
            return Err(TransversalDefect::Uncovered(missing));
        }
        self.check(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    None,
    /// Exact search, abandoned after `max_nodes` assignments.
    Backtracking { max_nodes: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LllConfig {
    /// Resample budget; `None` means `50 ×` the number of parts in scope.
    pub max_resamples: Option<u64>,
    pub seed: u64,
    pub fallback: Fallback,
}

impl Default for LllConfig {
    fn default() -> Self {
        Self { max_resamples: None, seed: 0, fallback: Fallback::Backtracking { max_nodes: 1_000_000 } }
    }
}

impl LllConfig {
    pub fn budget(&self, scope: usize) -> u64 {
        self.max_resamples.unwrap_or(50 * scope as u64).max(1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LllError {
    #[error("candidate set of part {part} is empty")]
    EmptyCandidates { part: usize },
    #[error("candidate {vertex} does not belong to part {part}")]
    ForeignCandidate { part: usize, vertex: VertexId },
    #[error("part {part} listed twice in the candidate family")]
    RepeatedPart { part: usize },
    #[error("resample budget of {budget} exhausted with {violated} violated edges left")]
    Exhausted { budget: u64, violated: usize },
    #[error("no independent transversal exists over the candidate sets")]
    Infeasible,
    #[error("backtracking guard of {max_nodes} nodes exceeded")]
    GuardExceeded { max_nodes: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LllOutcome {
    pub transversal: Transversal,
    pub resamples: u64,
    pub used_fallback: bool,
}

fn normalize(g: &MultipartiteGraph, candidates: &[(usize, Vec<VertexId>)]) -> Result<CandidateFamily, LllError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(candidates.len());
    for (part, set) in candidates {
        if !seen.insert(*part) {
            return Err(LllError::RepeatedPart { part: *part });
        }
        let mut set = set.clone();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(LllError::EmptyCandidates { part: *part });
        }
        if let Some(&vertex) = set.iter().find(|&&v| v as usize >= g.vertex_count() || g.part_of(v) != *part) {
            return Err(LllError::ForeignCandidate { part: *part, vertex });
        }
        out.push((*part, set));
    }
    Ok(out)
}

struct Resampler<'g> {
    g: &'g MultipartiteGraph,
    family: &'g [(usize, Vec<VertexId>)],
    current: Vec<VertexId>,
    slot_of: HashMap<VertexId, usize>,
    violated: BTreeSet<(VertexId, VertexId)>,
}

impl<'g> Resampler<'g> {
    fn remove(&mut self, slot: usize) {
        let v = self.current[slot];
        self.slot_of.remove(&v);
        for &w in self.g.neighbors(v) {
            if self.slot_of.contains_key(&w) {
                self.violated.remove(&(v.min(w), v.max(w)));
            }
        }
    }

    fn place<R: Rng>(&mut self, slot: usize, rng: &mut R) {
        let set = &self.family[slot].1;
        let v = set[rng.gen_range(0..set.len())];
        self.current[slot] = v;
        for &w in self.g.neighbors(v) {
            if self.slot_of.contains_key(&w) {
                self.violated.insert((v.min(w), v.max(w)));
            }
        }
        self.slot_of.insert(v, slot);
    }
}

/// Moser–Tardos search for an independent transversal drawn from the
/// candidate sets; falls back to exact search when configured.
pub fn find_transversal(
    g: &MultipartiteGraph,
    candidates: &[(usize, Vec<VertexId>)],
    cfg: &LllConfig,
) -> Result<LllOutcome, LllError> {
    let family = normalize(g, candidates)?;
    let budget = cfg.budget(family.len());
    let mut rng = substream(cfg.seed, &[0x4c4c4c]);
    let mut rs = Resampler {
        g,
        family: &family,
        current: vec![0; family.len()],
        slot_of: HashMap::with_capacity(family.len()),
        violated: BTreeSet::new(),
    };
    for slot in 0..family.len() {
        rs.place(slot, &mut rng);
    }
    let mut resamples = 0u64;
    while let Some(&(u, w)) = rs.violated.iter().next() {
        if resamples >= budget {
            let violated = rs.violated.len();
            return match cfg.fallback {
                Fallback::None => Err(LllError::Exhausted { budget, violated }),
                Fallback::Backtracking { max_nodes } => match search(g, &family, max_nodes)? {
                    Some(transversal) => Ok(LllOutcome { transversal, resamples, used_fallback: true }),
                    None => Err(LllError::Infeasible),
                },
            };
        }
        let (su, sw) = (rs.slot_of[&u], rs.slot_of[&w]);
        rs.remove(su);
        rs.remove(sw);
        rs.place(su, &mut rng);
        rs.place(sw, &mut rng);
        resamples += 1;
    }
    let transversal = Transversal::from_choice(family.iter().map(|(p, _)| *p).zip(rs.current.iter().copied()));
    assert!(transversal.check(g).is_ok(), "resampler returned a dependent transversal");
    Ok(LllOutcome { transversal, resamples, used_fallback: false })
}

/// Exact search over the candidate sets. `Ok(None)` means no independent
/// transversal exists; exceeding `max_nodes` assignments is an error.
pub fn find_transversal_backtracking(
    g: &MultipartiteGraph,
    candidates: &[(usize, Vec<VertexId>)],
    max_nodes: u64,
) -> Result<Option<Transversal>, LllError> {
    let family = normalize(g, candidates)?;
    search(g, &family, max_nodes)
}

/// Depth-first search, fail-first on the part with the fewest unblocked
/// candidates, vertices in increasing id order, with forward checking.
pub(crate) fn search(
    g: &MultipartiteGraph,
    family: &[(usize, Vec<VertexId>)],
    max_nodes: u64,
) -> Result<Option<Transversal>, LllError> {
    let mut pos: HashMap<VertexId, (usize, usize)> = HashMap::new();
    for (slot, (_, set)) in family.iter().enumerate() {
        for (i, &v) in set.iter().enumerate() {
            pos.insert(v, (slot, i));
        }
    }
    let mut st = SearchState {
        g,
        family,
        pos,
        blocked: family.iter().map(|(_, s)| vec![0u32; s.len()]).collect(),
        avail: family.iter().map(|(_, s)| s.len()).collect(),
        assigned: vec![None; family.len()],
        nodes: 0,
        max_nodes,
    };
    if st.dfs(0)? {
        let t = Transversal::from_choice(
            family.iter().zip(&st.assigned).map(|((p, set), a)| (*p, set[a.expect("complete assignment")])),
        );
        debug_assert!(t.check(g).is_ok());
        Ok(Some(t))
    } else {
        Ok(None)
    }
}

struct SearchState<'a> {
    g: &'a MultipartiteGraph,
    family: &'a [(usize, Vec<VertexId>)],
    pos: HashMap<VertexId, (usize, usize)>,
    blocked: Vec<Vec<u32>>,
    avail: Vec<usize>,
    assigned: Vec<Option<usize>>,
    nodes: u64,
    max_nodes: u64,
}

impl SearchState<'_> {
    fn bump(&mut self, v: VertexId, up: bool) {
        for &w in self.g.neighbors(v) {
            if let Some(&(slot, i)) = self.pos.get(&w) {
                let b = &mut self.blocked[slot][i];
                if up {
                    *b += 1;
                    if *b == 1 {
                        self.avail[slot] -= 1;
                    }
                } else {
                    *b -= 1;
                    if *b == 0 {
                        self.avail[slot] += 1;
                    }
                }
            }
        }
    }

    fn dfs(&mut self, depth: usize) -> Result<bool, LllError> {
        if depth == self.family.len() {
            return Ok(true);
        }
        let slot = (0..self.family.len())
            .filter(|&s| self.assigned[s].is_none())
            .min_by_key(|&s| self.avail[s])
            .expect("an unassigned slot");
        if self.avail[slot] == 0 {
            return Ok(false);
        }
        for i in 0..self.family[slot].1.len() {
            if self.blocked[slot][i] != 0 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(LllError::GuardExceeded { max_nodes: self.max_nodes });
            }
            let v = self.family[slot].1[i];
            self.assigned[slot] = Some(i);
            self.bump(v, true);
            let found = self.dfs(depth + 1)?;
            self.bump(v, false);
            if found {
                return Ok(true);
            }
            self.assigned[slot] = None;
        }
        Ok(false)
    }
}

/// Every part in full, as a candidate family.
pub fn full_candidates(g: &MultipartiteGraph) -> CandidateFamily {
    (0..g.k()).map(|p| (p, g.part_range(p).collect())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cliques_extremal, gen_random, gen_yuster};
    use itertools::Itertools;
    use proptest::prelude::*;

    /// Exhaustive enumeration over the candidate product.
    fn brute_exists(g: &MultipartiteGraph, fam: &CandidateFamily) -> bool {
        fam.iter()
            .map(|(_, s)| s.iter().copied())
            .multi_cartesian_product()
            .any(|pick| pick.iter().tuple_combinations().all(|(&a, &b)| !g.has_edge(a, b)))
    }

    fn no_fallback(seed: u64) -> LllConfig {
        LllConfig { max_resamples: None, seed, fallback: Fallback::None }
    }

    #[test]
    fn edgeless_needs_no_resampling() {
        let g = MultipartiteGraph::edgeless(&[3, 4, 5]);
        let out = find_transversal(&g, &full_candidates(&g), &no_fallback(1)).unwrap();
        assert_eq!(out.resamples, 0);
        assert!(out.transversal.check_full(&g).is_ok());
    }

    #[test]
    fn extremal_instance_exhausts_instead_of_looping() {
        let g = gen_cliques_extremal(2).unwrap();
        let err = find_transversal(&g, &full_candidates(&g), &no_fallback(3)).unwrap_err();
        assert!(matches!(err, LllError::Exhausted { budget: 150, .. }), "{err}");
        let cfg = LllConfig { fallback: Fallback::Backtracking { max_nodes: 10_000 }, ..no_fallback(3) };
        assert_eq!(find_transversal(&g, &full_candidates(&g), &cfg).unwrap_err(), LllError::Infeasible);
    }

    #[test]
    fn sparse_instance_with_large_parts() {
        let g = gen_random(6, 40, 2, 1, 17).unwrap();
        assert!(40.0 >= 2.0 * std::f64::consts::E * g.stats().max_degree as f64);
        for seed in 0..20 {
            let out = find_transversal(&g, &full_candidates(&g), &no_fallback(seed)).unwrap();
            assert!(out.transversal.check_full(&g).is_ok());
            assert!(!out.used_fallback);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = gen_random(8, 12, 3, 1, 5).unwrap();
        let a = find_transversal(&g, &full_candidates(&g), &no_fallback(9)).unwrap();
        let b = find_transversal(&g, &full_candidates(&g), &no_fallback(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn input_errors() {
        let g = MultipartiteGraph::edgeless(&[2, 2]);
        let cfg = LllConfig::default();
        assert_eq!(
            find_transversal(&g, &[(0, vec![0]), (1, vec![])], &cfg).unwrap_err(),
            LllError::EmptyCandidates { part: 1 }
        );
        assert_eq!(
            find_transversal(&g, &[(0, vec![2])], &cfg).unwrap_err(),
            LllError::ForeignCandidate { part: 0, vertex: 2 }
        );
        assert_eq!(
            find_transversal(&g, &[(0, vec![0]), (0, vec![1])], &cfg).unwrap_err(),
            LllError::RepeatedPart { part: 0 }
        );
    }

    #[test]
    fn backtracking_examples() {
        let g = gen_cliques_extremal(2).unwrap();
        assert_eq!(find_transversal_backtracking(&g, &full_candidates(&g), 1000).unwrap(), None);
        let e = MultipartiteGraph::edgeless(&[3, 2, 4]);
        let t = find_transversal_backtracking(&e, &full_candidates(&e), 1000).unwrap().unwrap();
        assert_eq!(t.vertices().collect::<Vec<_>>(), vec![0, 3, 5]);
        // K_{2,2} minus a perfect matching leaves exactly two independent pairs
        let y = gen_yuster(2, 2, 4).unwrap();
        let pairs: Vec<_> = [(0, 2), (0, 3), (1, 2), (1, 3)].into_iter().filter(|&(a, b)| !y.has_edge(a, b)).collect();
        assert_eq!(pairs.len(), 2);
        let t = find_transversal_backtracking(&y, &full_candidates(&y), 1000).unwrap().unwrap();
        assert!(pairs.contains(&(t.get(0).unwrap(), t.get(1).unwrap())));
    }

    #[test]
    fn guard_is_enforced() {
        let g = gen_cliques_extremal(4).unwrap();
        assert_eq!(
            find_transversal_backtracking(&g, &full_candidates(&g), 3).unwrap_err(),
            LllError::GuardExceeded { max_nodes: 3 }
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn backtracking_agrees_with_enumeration(k in 2usize..5, n in 1usize..5, deg in 0usize..6, local in 1usize..3, seed in 0u64..10_000, mask in any::<u64>()) {
            let g = gen_random(k, n, deg, local, seed).unwrap();
            let fam: CandidateFamily = (0..k)
                .map(|p| {
                    let all: Vec<VertexId> = g.part_range(p).collect();
                    let sub: Vec<VertexId> = all.iter().copied().filter(|&v| mask >> (v % 64) & 1 == 1).collect();
                    (p, if sub.is_empty() { all } else { sub })
                })
                .collect();
            let exact = find_transversal_backtracking(&g, &fam, 1_000_000).unwrap();
            prop_assert_eq!(exact.is_some(), brute_exists(&g, &fam));
            if let Some(t) = exact {
                prop_assert!(t.check_full(&g).is_ok());
                for (p, set) in &fam {
                    prop_assert!(set.contains(&t.get(*p).unwrap()));
                }
            }
            let cfg = LllConfig { max_resamples: Some(200), seed, fallback: Fallback::None };
            if let Ok(out) = find_transversal(&g, &fam, &cfg) {
                prop_assert!(out.transversal.check_full(&g).is_ok());
            }
        }
    }
}
