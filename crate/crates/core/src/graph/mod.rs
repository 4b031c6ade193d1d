//! Multipartite graph model, JSON ingestion, statistics, and the partite
//! complement.
//!
//! Vertices carry global ids `0..N` assigned part by part: part 0 owns
//! `0..sizes[0]`, part 1 the next `sizes[1]` ids, and so on. Adjacency lists
//! are sorted by global id, which groups every list by the neighbor's part.

mod generators;
mod lists;

pub use generators::{
    gen_avg_degree_counterexample, gen_cliques_extremal, gen_complete_multipartite, gen_random,
    gen_random_with, gen_yuster, RandomGraphParams,
};
pub use lists::{build_list_coloring_graph, ColoringIndex, ListAssignment, ListAssignmentFile};

use std::collections::HashSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = u32;

pub const INSTANCE_FORMAT: &str = "itpack-instance/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("instance declares k = {k} but lists {sizes} part sizes")]
    PartCountMismatch { k: usize, sizes: usize },
    #[error("edge #{index} ({u}, {v}): intra-part edge inside part {part}")]
    IntraPartEdge { index: usize, u: u64, v: u64, part: usize },
    #[error("edge #{index}: vertex {vertex} out of range (N = {vertex_count})")]
    VertexOutOfRange { index: usize, vertex: u64, vertex_count: usize },
    #[error("edge #{index} ({u}, {v}): duplicate edge")]
    DuplicateEdge { index: usize, u: u64, v: u64 },
    #[error("edge #{index}: self-loop on vertex {v}")]
    SelfLoop { index: usize, v: u64 },
    #[error("vertex {vertex} has an empty color list")]
    EmptyList { vertex: usize },
    #[error("too many vertices ({0}) for 32-bit vertex ids")]
    TooLarge(usize),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

/// Immutable vertex-partitioned graph. Every edge joins distinct parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultipartiteGraph {
    part_sizes: Vec<usize>,
    offsets: Vec<usize>,
    part_of: Vec<u32>,
    adj: Vec<Vec<VertexId>>,
    edge_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub max_degree: usize,
    pub local_degree: usize,
    pub partite_min_degree: usize,
    pub min_part_size: usize,
    pub max_part_size: usize,
}

/// On-disk instance. `format` and `meta` are optional on input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub edges: Vec<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

fn offsets_of(sizes: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0;
    offsets.push(0);
    for &s in sizes {
        acc += s;
        offsets.push(acc);
    }
    offsets
}

impl MultipartiteGraph {
    /// Validating constructor. Edges are unordered pairs of global ids; their
    /// order is irrelevant to the result.
    pub fn from_edges<I>(sizes: &[usize], edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let offsets = offsets_of(sizes);
        let n_total = *offsets.last().unwrap();
        if n_total > u32::MAX as usize {
            return Err(GraphError::TooLarge(n_total));
        }
        let part_of = part_table(sizes);
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n_total];
        let mut seen: HashSet<(u64, u64)> = HashSet::new();
        for (index, (u, v)) in edges.into_iter().enumerate() {
            for x in [u, v] {
                if x >= n_total as u64 {
                    return Err(GraphError::VertexOutOfRange { index, vertex: x, vertex_count: n_total });
                }
            }
            let (pu, pv) = (part_of[u as usize], part_of[v as usize]);
            if pu == pv {
                return Err(GraphError::IntraPartEdge { index, u, v, part: pu as usize });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { index, u, v });
            }
            adj[u as usize].push(v as VertexId);
            adj[v as usize].push(u as VertexId);
        }
        Ok(Self::assemble(sizes.to_vec(), offsets, part_of, adj))
    }

    /// Builds from an adjacency already known to be simple, symmetric and
    /// cross-part. Lists are sorted here.
    pub(crate) fn from_trusted_adjacency(sizes: Vec<usize>, adj: Vec<Vec<VertexId>>) -> Self {
        let offsets = offsets_of(&sizes);
        let part_of = part_table(&sizes);
        debug_assert_eq!(adj.len(), *offsets.last().unwrap());
        Self::assemble(sizes, offsets, part_of, adj)
    }

    fn assemble(sizes: Vec<usize>, offsets: Vec<usize>, part_of: Vec<u32>, mut adj: Vec<Vec<VertexId>>) -> Self {
        let mut twice = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.shrink_to_fit();
            twice += list.len();
        }
        Self { part_sizes: sizes, offsets, part_of, adj, edge_count: twice / 2 }
    }

    pub fn edgeless(sizes: &[usize]) -> Self {
        let n_total: usize = sizes.iter().sum();
        Self::from_trusted_adjacency(sizes.to_vec(), vec![Vec::new(); n_total])
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.part_sizes.len()
    }

    /// Minimum part size (the `n` the solver schedules against).
    pub fn n(&self) -> usize {
        self.part_sizes.iter().copied().min().unwrap_or(0)
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    #[inline]
    pub fn part_size(&self, part: usize) -> usize {
        self.part_sizes[part]
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.part_of.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn part_of(&self, v: VertexId) -> usize {
        self.part_of[v as usize] as usize
    }

    /// Same as [`Self::part_of`], found by binary search over the part
    /// offsets.
    #[inline]
    pub fn part_of_search(&self, v: VertexId) -> usize {
        self.offsets.partition_point(|&o| o <= v as usize) - 1
    }

    pub fn part_range(&self, part: usize) -> Range<VertexId> {
        self.offsets[part] as VertexId..self.offsets[part + 1] as VertexId
    }

    #[inline]
    pub fn part_offset(&self, part: usize) -> usize {
        self.offsets[part]
    }

    /// Index of `v` inside its own part.
    #[inline]
    pub fn local_index(&self, v: VertexId) -> usize {
        v as usize - self.offsets[self.part_of(v)]
    }

    #[inline]
    pub fn vertex(&self, part: usize, local: usize) -> VertexId {
        debug_assert!(local < self.part_sizes[part]);
        (self.offsets[part] + local) as VertexId
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    /// Neighbors of `v` lying in `part`, as a sorted slice.
    pub fn neighbors_in_part(&self, v: VertexId, part: usize) -> &[VertexId] {
        let list = &self.adj[v as usize];
        let lo = self.offsets[part] as VertexId;
        let hi = self.offsets[part + 1] as VertexId;
        let a = list.partition_point(|&x| x < lo);
        let b = a + list[a..].partition_point(|&x| x < hi);
        &list[a..b]
    }

    /// Neighbor list split into maximal runs sharing a part: `(part, run)`.
    pub fn neighbor_groups(&self, v: VertexId) -> impl Iterator<Item = (usize, &[VertexId])> + '_ {
        let list = &self.adj[v as usize];
        let mut start = 0;
        std::iter::from_fn(move || {
            if start >= list.len() {
                return None;
            }
            let part = self.part_of(list[start]);
            let end_id = self.offsets[part + 1] as VertexId;
            let len = list[start..].partition_point(|&x| x < end_id);
            let run = &list[start..start + len];
            start += len;
            Some((part, run))
        })
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = if self.adj[u as usize].len() <= self.adj[v as usize].len() { (u, v) } else { (v, u) };
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as VertexId;
            list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v))
        })
    }

    pub fn stats(&self) -> GraphStats {
        let k = self.k();
        let mut max_degree = 0;
        let mut local_degree = 0;
        let mut partite_min = usize::MAX;
        for v in 0..self.vertex_count() as VertexId {
            max_degree = max_degree.max(self.degree(v));
            let mut groups = 0;
            let mut min_run = usize::MAX;
            for (_, run) in self.neighbor_groups(v) {
                groups += 1;
                local_degree = local_degree.max(run.len());
                min_run = min_run.min(run.len());
            }
            let foreign = k.saturating_sub(1);
            let vertex_min = if groups < foreign { 0 } else { min_run };
            partite_min = partite_min.min(vertex_min);
        }
        if k <= 1 || partite_min == usize::MAX {
            partite_min = 0;
        }
        GraphStats {
            max_degree,
            local_degree,
            partite_min_degree: partite_min,
            min_part_size: self.n(),
            max_part_size: self.part_sizes.iter().copied().max().unwrap_or(0),
        }
    }

    /// Multipartite subgraph induced by `blocks[i] ⊆ V_i`, one block per part.
    /// Returns the subgraph and the map from new ids to ids in `self`.
    pub fn induced(&self, blocks: &[Vec<VertexId>]) -> (MultipartiteGraph, Vec<VertexId>) {
        assert_eq!(blocks.len(), self.k(), "one block per part");
        let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
        let mut old_of_new: Vec<VertexId> = Vec::with_capacity(sizes.iter().sum());
        for (part, block) in blocks.iter().enumerate() {
            for &v in block {
                debug_assert_eq!(self.part_of(v), part);
                old_of_new.push(v);
            }
        }
        let mut new_of_old = vec![u32::MAX; self.vertex_count()];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old as usize] = new as u32;
        }
        let adj = old_of_new
            .iter()
            .map(|&old| {
                self.neighbors(old)
                    .iter()
                    .filter_map(|&w| {
                        let x = new_of_old[w as usize];
                        (x != u32::MAX).then_some(x)
                    })
                    .collect()
            })
            .collect();
        (Self::from_trusted_adjacency(sizes, adj), old_of_new)
    }

    pub fn to_instance(&self, meta: Option<serde_json::Value>) -> InstanceFile {
        InstanceFile {
            format: Some(INSTANCE_FORMAT.to_string()),
            k: self.k(),
            sizes: self.part_sizes.clone(),
            edges: self.edges().map(|(u, v)| [u as u64, v as u64]).collect(),
            meta,
        }
    }
}

fn part_table(sizes: &[usize]) -> Vec<u32> {
    sizes.iter().enumerate().flat_map(|(i, &s)| std::iter::repeat_n(i as u32, s)).collect()
}

impl InstanceFile {
    pub fn into_graph(self) -> Result<MultipartiteGraph, GraphError> {
        if self.k != self.sizes.len() {
            return Err(GraphError::PartCountMismatch { k: self.k, sizes: self.sizes.len() });
        }
        MultipartiteGraph::from_edges(&self.sizes, self.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

/// Parses the JSON instance format.
pub fn load_graph(bytes: &[u8]) -> Result<MultipartiteGraph, GraphError> {
    let file: InstanceFile = serde_json::from_slice(bytes).map_err(|e| GraphError::Parse(e.to_string()))?;
    file.into_graph()
}

/// Graph on the same parts whose edges are exactly the cross-part non-edges
/// of `g`.
pub fn partite_complement(g: &MultipartiteGraph) -> MultipartiteGraph {
    let n_total = g.vertex_count();
    let adj = (0..n_total as VertexId)
        .map(|v| {
            let own = g.part_range(g.part_of(v));
            let nbrs = g.neighbors(v);
            let mut j = 0;
            let mut out = Vec::with_capacity(n_total - own.len() - nbrs.len());
            for w in (0..n_total as VertexId).filter(|w| !own.contains(w)) {
                while j < nbrs.len() && nbrs[j] < w {
                    j += 1;
                }
                if j < nbrs.len() && nbrs[j] == w {
                    continue;
                }
                out.push(w);
            }
            out
        })
        .collect();
    MultipartiteGraph::from_trusted_adjacency(g.part_sizes.clone(), adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn json(s: &str) -> Result<MultipartiteGraph, GraphError> {
        load_graph(s.as_bytes())
    }

    /// Recount of the statistics straight from the edge list.
    fn brute_stats(g: &MultipartiteGraph) -> GraphStats {
        let k = g.k();
        let n_total = g.vertex_count();
        let mut counts = vec![vec![0usize; k]; n_total];
        for (u, v) in g.edges() {
            counts[u as usize][g.part_of(v)] += 1;
            counts[v as usize][g.part_of(u)] += 1;
        }
        let max_degree = counts.iter().map(|c| c.iter().sum::<usize>()).max().unwrap_or(0);
        let local_degree = counts.iter().flat_map(|c| c.iter().copied()).max().unwrap_or(0);
        let partite_min_degree = (0..n_total)
            .flat_map(|v| {
                let own = g.part_of(v as VertexId);
                counts[v].iter().enumerate().filter(move |(j, _)| *j != own).map(|(_, &c)| c)
            })
            .min()
            .unwrap_or(0);
        GraphStats {
            max_degree,
            local_degree,
            partite_min_degree,
            min_part_size: g.part_sizes().iter().copied().min().unwrap_or(0),
            max_part_size: g.part_sizes().iter().copied().max().unwrap_or(0),
        }
    }

    #[test]
    fn smallest_instance() {
        let g = json(r#"{"k":2,"sizes":[1,1],"edges":[[0,1]]}"#).unwrap();
        let s = g.stats();
        assert_eq!((s.max_degree, s.local_degree), (1, 1));
    }

    #[test]
    fn rejects_intra_part_edge() {
        let err = json(r#"{"k":2,"sizes":[2,2],"edges":[[0,1]]}"#).unwrap_err();
        assert!(matches!(err, GraphError::IntraPartEdge { index: 0, part: 0, .. }), "{err}");
        assert!(err.to_string().contains("intra-part edge"));
    }

    #[test]
    fn rejects_bad_vertices_and_duplicates() {
        let err = json(r#"{"k":2,"sizes":[1,1],"edges":[[0,5]]}"#).unwrap_err();
        assert!(matches!(err, GraphError::VertexOutOfRange { vertex: 5, .. }));
        let err = json(r#"{"k":2,"sizes":[1,1],"edges":[[0,1],[1,0]]}"#).unwrap_err();
        assert!(matches!(err, GraphError::DuplicateEdge { index: 1, .. }));
        let err = json(r#"{"k":3,"sizes":[1,1],"edges":[]}"#).unwrap_err();
        assert!(matches!(err, GraphError::PartCountMismatch { k: 3, sizes: 2 }));
        assert!(matches!(json("{ nope"), Err(GraphError::Parse(_))));
    }

    #[test]
    fn two_triangles_across_three_parts() {
        // parts {0,1}, {2,3}, {4,5}; triangles 0-2-4 and 1-3-5
        let g = json(r#"{"k":3,"sizes":[2,2,2],"edges":[[0,2],[2,4],[0,4],[1,3],[3,5],[1,5]]}"#).unwrap();
        let s = g.stats();
        assert_eq!(s, brute_stats(&g));
        assert_eq!((s.max_degree, s.local_degree), (2, 1));
    }

    #[test]
    fn stats_of_edgeless_and_complete() {
        let s = MultipartiteGraph::edgeless(&[3, 4, 2]).stats();
        assert_eq!((s.max_degree, s.local_degree, s.partite_min_degree), (0, 0, 0));
        assert_eq!((s.min_part_size, s.max_part_size), (2, 4));
        let s = gen_complete_multipartite(3, 2).stats();
        assert_eq!((s.max_degree, s.local_degree, s.partite_min_degree), (4, 2, 2));
    }

    #[test]
    fn complement_of_complete_is_edgeless() {
        let g = gen_complete_multipartite(4, 3);
        let h = partite_complement(&g);
        assert_eq!(h.edge_count(), 0);
        assert_eq!(h.part_sizes(), g.part_sizes());
        assert_eq!(partite_complement(&h), g);
    }

    #[test]
    fn induced_subgraph_keeps_edges_between_blocks() {
        let g = gen_complete_multipartite(3, 3);
        let blocks = vec![vec![0, 2], vec![4], vec![6, 7]];
        let (h, map) = g.induced(&blocks);
        assert_eq!(h.part_sizes(), &[2, 1, 2]);
        assert_eq!(map, vec![0, 2, 4, 6, 7]);
        assert_eq!(h.edge_count(), 2 + 4 + 2);
        for (u, v) in h.edges() {
            assert!(g.has_edge(map[u as usize], map[v as usize]));
        }
    }

    #[test]
    fn neighbor_queries() {
        let g = gen_complete_multipartite(3, 2);
        assert_eq!(g.neighbors_in_part(0, 2), &[4, 5]);
        assert!(g.neighbors_in_part(0, 0).is_empty());
        let groups: Vec<(usize, usize)> = g.neighbor_groups(2).map(|(p, r)| (p, r.len())).collect();
        assert_eq!(groups, vec![(0, 2), (2, 2)]);
    }

    #[test]
    fn instance_roundtrip() {
        let g = gen_yuster(3, 4, 11).unwrap();
        let text = serde_json::to_string(&g.to_instance(None)).unwrap();
        assert_eq!(load_graph(text.as_bytes()).unwrap(), g);
    }

    proptest! {
        #[test]
        fn loaded_graphs_satisfy_invariants(
            sizes in proptest::collection::vec(1usize..5, 1..5),
            pairs in proptest::collection::vec((0u64..20, 0u64..20), 0..40),
        ) {
            let n_total: u64 = sizes.iter().sum::<usize>() as u64;
            let part = part_table(&sizes);
            let mut seen = HashSet::new();
            let edges: Vec<(u64, u64)> = pairs
                .into_iter()
                .map(|(u, v)| (u % n_total, v % n_total))
                .filter(|&(u, v)| part[u as usize] != part[v as usize])
                .filter(|&(u, v)| seen.insert((u.min(v), u.max(v))))
                .collect();
            let g = MultipartiteGraph::from_edges(&sizes, edges.iter().copied()).unwrap();
            let mut reversed = edges.clone();
            reversed.reverse();
            prop_assert_eq!(&MultipartiteGraph::from_edges(&sizes, reversed).unwrap(), &g);
            prop_assert_eq!(g.edge_count(), edges.len());
            for u in 0..g.vertex_count() as VertexId {
                for &v in g.neighbors(u) {
                    prop_assert!(g.neighbors(v).contains(&u));
                    prop_assert_ne!(g.part_of(u), g.part_of(v));
                }
            }
            prop_assert_eq!(g.stats(), brute_stats(&g));
            let h = partite_complement(&g);
            prop_assert_eq!(&partite_complement(&h), &g);
            for u in 0..g.vertex_count() as VertexId {
                for v in 0..g.vertex_count() as VertexId {
                    if g.part_of(u) != g.part_of(v) {
                        prop_assert!(g.has_edge(u, v) != h.has_edge(u, v));
                    }
                }
            }
        }

        #[test]
        fn complement_local_degree_matches_partite_min_degree(k in 2usize..5, n in 1usize..6, seed in 0u64..1000) {
            let g = gen_random(k, n, n * k, n, seed).unwrap();
            let h = partite_complement(&g);
            prop_assert_eq!(h.stats().local_degree, n - g.stats().partite_min_degree);
        }
    }
}
