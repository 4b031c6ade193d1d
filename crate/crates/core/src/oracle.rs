//! Ground truth for small instances and the universal packing verifier.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{MultipartiteGraph, VertexId};
use crate::lll::{self, Transversal};

/// Pairwise-disjoint full independent transversals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Packing {
    pub transversals: Vec<Transversal>,
}

impl Packing {
    pub fn new(transversals: Vec<Transversal>) -> Self {
        Self { transversals }
    }

    pub fn len(&self) -> usize {
        self.transversals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transversals.is_empty()
    }

    /// Each transversal as its vertices in part order.
    pub fn to_rows(&self) -> Vec<Vec<VertexId>> {
        self.transversals.iter().map(|t| t.vertices().collect()).collect()
    }

    /// Inverse of [`Self::to_rows`]: entry `i` of a row is the part-`i` vertex.
    pub fn from_rows(rows: &[Vec<VertexId>]) -> Self {
        Self::new(rows.iter().map(|r| Transversal::from_vertices(r)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Coverage { transversal: usize, missing: Vec<usize> },
    UnknownPart { transversal: usize, part: usize },
    Membership { transversal: usize, part: usize, vertex: VertexId },
    Independence { transversal: usize, u: VertexId, v: VertexId },
    Disjointness { first: usize, second: usize, vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Coverage { transversal, missing } => {
                write!(f, "coverage: transversal {transversal} misses parts {missing:?}")
            }
            Violation::UnknownPart { transversal, part } => {
                write!(f, "coverage: transversal {transversal} names nonexistent part {part}")
            }
            Violation::Membership { transversal, part, vertex } => {
                write!(f, "membership: transversal {transversal} puts vertex {vertex} in part {part}")
            }
            Violation::Independence { transversal, u, v } => {
                write!(f, "independence: transversal {transversal} contains edge {u} - {v}")
            }
            Violation::Disjointness { first, second, vertex } => {
                write!(f, "disjointness: transversals {first} and {second} share vertex {vertex}")
            }
        }
    }
}

/// Checks coverage, membership and independence of every transversal and
/// disjointness across them. Reports every violation found.
pub fn verify_packing(g: &MultipartiteGraph, packing: &Packing) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut owner: HashMap<VertexId, usize> = HashMap::new();
    for (ti, t) in packing.transversals.iter().enumerate() {
        let missing: Vec<usize> = (0..g.k()).filter(|&p| t.get(p).is_none()).collect();
        if !missing.is_empty() {
            violations.push(Violation::Coverage { transversal: ti, missing });
        }
        let mut members = Vec::with_capacity(t.len());
        for (part, v) in t.iter() {
            if part >= g.k() {
                violations.push(Violation::UnknownPart { transversal: ti, part });
                continue;
            }
            if v as usize >= g.vertex_count() || g.part_of(v) != part {
                violations.push(Violation::Membership { transversal: ti, part, vertex: v });
                continue;
            }
            members.push(v);
        }
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                if g.has_edge(u, v) {
                    violations.push(Violation::Independence { transversal: ti, u: u.min(v), v: u.max(v) });
                }
            }
        }
        for v in t.vertices() {
            if let Some(&first) = owner.get(&v) {
                if first != ti {
                    violations.push(Violation::Disjointness { first, second: ti, vertex: v });
                }
            } else {
                owner.insert(v, ti);
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search guard exceeded: {0}")]
    GuardExceeded(String),
}

pub const DEFAULT_NODE_GUARD: u64 = 1_000_000;

/// Exact existence of an independent transversal of the whole graph.
pub fn exists_transversal(g: &MultipartiteGraph, max_nodes: u64) -> Result<Option<Transversal>, OracleError> {
    if g.part_sizes().contains(&0) {
        return Ok(None);
    }
    lll::search(g, &lll::full_candidates(g), max_nodes).map_err(|e| OracleError::GuardExceeded(e.to_string()))
}

/// Size limits for [`max_disjoint_transversals`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackingGuard {
    /// Vertex count limit (vertex sets are bitmasks).
    pub max_vertices: usize,
    pub max_transversals: usize,
    pub max_nodes: u64,
}

impl Default for PackingGuard {
    fn default() -> Self {
        Self { max_vertices: 128, max_transversals: 200_000, max_nodes: 20_000_000 }
    }
}

/// Every independent transversal, as vertex lists in part order.
fn enumerate_transversals(g: &MultipartiteGraph, limit: usize) -> Result<Vec<Vec<VertexId>>, OracleError> {
    fn rec(
        g: &MultipartiteGraph,
        part: usize,
        pick: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
        limit: usize,
    ) -> Result<(), OracleError> {
        if part == g.k() {
            if out.len() == limit {
                return Err(OracleError::GuardExceeded(format!("more than {limit} independent transversals")));
            }
            out.push(pick.clone());
            return Ok(());
        }
        for v in g.part_range(part) {
            if pick.iter().all(|&u| !g.has_edge(u, v)) {
                pick.push(v);
                rec(g, part + 1, pick, out, limit)?;
                pick.pop();
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(g, 0, &mut Vec::with_capacity(g.k()), &mut out, limit)?;
    Ok(out)
}

/// Exact maximum number of pairwise-disjoint independent transversals, with
/// an optimal packing.
pub fn max_disjoint_transversals(g: &MultipartiteGraph, guard: PackingGuard) -> Result<(usize, Packing), OracleError> {
    let n_total = g.vertex_count();
    if n_total > guard.max_vertices || n_total > 128 {
        return Err(OracleError::GuardExceeded(format!("{n_total} vertices > {}", guard.max_vertices.min(128))));
    }
    if g.k() == 0 || g.part_sizes().contains(&0) {
        return Ok((0, Packing::default()));
    }
    let all = enumerate_transversals(g, guard.max_transversals)?;
    // every transversal uses exactly one vertex of the smallest part: branch on those
    let pivot = (0..g.k()).min_by_key(|&p| g.part_size(p)).unwrap();
    let pivot_start = g.part_offset(pivot);
    let mut groups: Vec<Vec<(u128, usize)>> = vec![Vec::new(); g.part_size(pivot)];
    for (idx, t) in all.iter().enumerate() {
        let mask = t.iter().fold(0u128, |m, &v| m | (1u128 << v));
        groups[t[pivot] as usize - pivot_start].push((mask, idx));
    }
    let mut solver = MaxPack { groups: &groups, memo: HashMap::new(), nodes: 0, max_nodes: guard.max_nodes };
    let best = solver.best(0, 0)?;
    // walk the memo to rebuild one optimal packing
    let mut chosen = Vec::with_capacity(best);
    let (mut x, mut used) = (0usize, 0u128);
    while x < groups.len() {
        let target = solver.best(x, used)?;
        if target == 0 {
            break;
        }
        if solver.best(x + 1, used)? == target {
            x += 1;
            continue;
        }
        let mut advanced = false;
        for &(mask, idx) in &groups[x] {
            if mask & used == 0 && 1 + solver.best(x + 1, used | mask)? == target {
                chosen.push(Transversal::from_vertices(&all[idx]));
                used |= mask;
                advanced = true;
                break;
            }
        }
        assert!(advanced, "memo walk lost the optimum");
        x += 1;
    }
    let packing = Packing::new(chosen);
    debug_assert_eq!(packing.len(), best);
    debug_assert!(verify_packing(g, &packing).is_ok());
    Ok((best, packing))
}

struct MaxPack<'a> {
    groups: &'a [Vec<(u128, usize)>],
    memo: HashMap<(usize, u128), usize>,
    nodes: u64,
    max_nodes: u64,
}

impl MaxPack<'_> {
    fn best(&mut self, x: usize, used: u128) -> Result<usize, OracleError> {
        if x == self.groups.len() {
            return Ok(0);
        }
        if let Some(&v) = self.memo.get(&(x, used)) {
            return Ok(v);
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::GuardExceeded(format!("more than {} search nodes", self.max_nodes)));
        }
        let remaining = self.groups.len() - x;
        let mut best = self.best(x + 1, used)?;
        for &(mask, _) in self.groups[x].iter() {
            if best == remaining {
                break;
            }
            if mask & used == 0 {
                best = best.max(1 + self.best(x + 1, used | mask)?);
            }
        }
        self.memo.insert((x, used), best);
        Ok(best)
    }
}
