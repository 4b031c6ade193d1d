//! List assignments and the conflict graph whose independent transversals are
//! proper list colorings.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{GraphError, MultipartiteGraph, VertexId};

pub const LISTS_FORMAT: &str = "itpack-lists/1";

/// A simple graph on `0..n` with a color list per vertex. Lists are kept
/// sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListAssignment {
    n: usize,
    edges: Vec<(usize, usize)>,
    lists: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ListAssignmentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub n: usize,
    pub edges: Vec<[u64; 2]>,
    pub lists: Vec<Vec<u64>>,
}

impl ListAssignment {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, lists: Vec<Vec<u64>>) -> Result<Self, GraphError> {
        if lists.len() != n {
            return Err(GraphError::Parse(format!("{} lists given for {n} vertices", lists.len())));
        }
        let mut seen = HashSet::new();
        for (index, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { index, vertex: x as u64, vertex_count: n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, v: u as u64 });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { index, u: u as u64, v: v as u64 });
            }
        }
        let mut lists = lists;
        for (vertex, list) in lists.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(GraphError::EmptyList { vertex });
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { n, edges, lists })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, GraphError> {
        let file: ListAssignmentFile = serde_json::from_slice(bytes).map_err(|e| GraphError::Parse(e.to_string()))?;
        let edges = file.edges.iter().map(|&[u, v]| (u as usize, v as usize)).collect();
        Self::new(file.n, edges, file.lists)
    }

    pub fn to_file(&self) -> ListAssignmentFile {
        ListAssignmentFile {
            format: Some(LISTS_FORMAT.to_string()),
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u as u64, v as u64]).collect(),
            lists: self.lists.clone(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn list(&self, v: usize) -> &[u64] {
        &self.lists[v]
    }

    pub fn min_list_size(&self) -> usize {
        self.lists.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Max over `(v, c)` of the number of neighbors `u` of `v` with
    /// `c ∈ L_u`.
    pub fn color_degree(&self) -> usize {
        let mut nbrs = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            nbrs[u].push(v);
            nbrs[v].push(u);
        }
        (0..self.n)
            .flat_map(|v| {
                let nbrs = &nbrs;
                self.lists[v].iter().map(move |c| nbrs[v].iter().filter(|&&u| self.lists[u].binary_search(c).is_ok()).count())
            })
            .max()
            .unwrap_or(0)
    }

    /// True when `coloring[v] ∈ L_v` for all `v` and no edge is monochromatic.
    pub fn is_proper_coloring(&self, coloring: &[u64]) -> bool {
        coloring.len() == self.n
            && coloring.iter().enumerate().all(|(v, c)| self.lists[v].binary_search(c).is_ok())
            && self.edges.iter().all(|&(u, v)| coloring[u] != coloring[v])
    }
}

/// Maps conflict-graph vertices back to `(base vertex, color)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringIndex {
    entries: Vec<(usize, u64)>,
}

impl ColoringIndex {
    pub fn entry(&self, v: VertexId) -> (usize, u64) {
        self.entries[v as usize]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One part per base vertex, one vertex per list entry; `(v1, c1)` and
/// `(v2, c2)` are adjacent iff `v1 v2` is a base edge and `c1 == c2`.
pub fn build_list_coloring_graph(la: &ListAssignment) -> (MultipartiteGraph, ColoringIndex) {
    let sizes: Vec<usize> = la.lists.iter().map(Vec::len).collect();
    let mut offsets = Vec::with_capacity(la.n + 1);
    offsets.push(0usize);
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let entries: Vec<(usize, u64)> =
        la.lists.iter().enumerate().flat_map(|(v, list)| list.iter().map(move |&c| (v, c))).collect();
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); entries.len()];
    for &(u, v) in &la.edges {
        let (lu, lv) = (&la.lists[u], &la.lists[v]);
        let (mut a, mut b) = (0, 0);
        while a < lu.len() && b < lv.len() {
            match lu[a].cmp(&lv[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    let (x, y) = (offsets[u] + a, offsets[v] + b);
                    adj[x].push(y as VertexId);
                    adj[y].push(x as VertexId);
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    (MultipartiteGraph::from_trusted_adjacency(sizes, adj), ColoringIndex { entries })
}
