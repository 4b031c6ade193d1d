//! Multipartite clique packing and disjoint list colorings, both solved as
//! transversal packings of an auxiliary graph.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::graph::{build_list_coloring_graph, partite_complement, ListAssignment, MultipartiteGraph, VertexId};
use crate::nibble::with_workers;
use crate::oracle::{verify_packing, Packing};
use crate::reduce::{pack_block, reduce_and_pack, BlockSchedule, Failure, ReduceConfig, BLOCK_LOCAL_DEGREE};

/// When the local-degree reduction runs before packing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMode {
    /// Only when parts are equal and the local degree exceeds the block bound.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppConfig {
    pub reduction: ReductionMode,
    /// Schedule for packing without reduction.
    pub direct: BlockSchedule,
    pub reduce: ReduceConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self { reduction: ReductionMode::Auto, direct: BlockSchedule::desk(), reduce: ReduceConfig::desk() }
    }
}

/// Packing of an auxiliary graph together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct Solved {
    pub packing: Packing,
    pub reduced: bool,
    pub warnings: Vec<String>,
    pub errors: Vec<Failure>,
}

impl Solved {
    pub fn budget_exhausted(&self) -> bool {
        self.errors.iter().any(|e| e.budget)
    }
}

/// Packs disjoint independent transversals of `h`, reducing first according
/// to `cfg.reduction`.
pub fn solve(h: &MultipartiteGraph, eps: f64, gamma: f64, cfg: &AppConfig, seed: u64) -> Solved {
    let stats = h.stats();
    let equal = stats.min_part_size == stats.max_part_size;
    let reduce = match cfg.reduction {
        ReductionMode::Always => true,
        ReductionMode::Never => false,
        ReductionMode::Auto => equal && stats.local_degree > BLOCK_LOCAL_DEGREE,
    };
    if reduce {
        let out = reduce_and_pack(h, eps, gamma, &cfg.reduce, seed);
        return Solved { packing: out.packing, reduced: true, warnings: out.warnings, errors: out.errors };
    }
    let direct = ReduceConfig { schedule: cfg.direct, ..cfg.reduce.clone() };
    let (packing, err) = with_workers(cfg.reduce.policy.workers, || pack_block(h, eps, &direct, seed));
    Solved { packing, reduced: false, warnings: vec![], errors: err.into_iter().collect() }
}

/// Vertex-disjoint copies of `K_k`, one vertex per part.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliquePacking {
    pub cliques: Vec<Vec<VertexId>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliqueOutcome {
    pub packing: CliquePacking,
    /// Size of the packing that was mapped back; equals the clique count.
    pub transversals: usize,
    pub target: usize,
    pub warnings: Vec<String>,
    pub errors: Vec<Failure>,
}

impl CliqueOutcome {
    /// Fewer than `n` cliques or a solver failure.
    pub fn is_short(&self) -> bool {
        self.packing.cliques.len() < self.target || !self.errors.is_empty()
    }

    pub fn budget_exhausted(&self) -> bool {
        self.errors.iter().any(|e| e.budget)
    }
}

/// Packs disjoint `K_k` in a balanced `k`-partite graph by packing
/// independent transversals of its partite complement.
pub fn clique_pack(g: &MultipartiteGraph, eps: f64, delta: f64, cfg: &AppConfig, seed: u64) -> CliqueOutcome {
    let stats = g.stats();
    let (k, n) = (g.k(), stats.min_part_size);
    let mut warnings = Vec::new();
    if stats.min_part_size != stats.max_part_size {
        warnings.push(format!("parts have unequal sizes {} to {}", stats.min_part_size, stats.max_part_size));
    }
    let need = (1.0 - (1.0 - delta) / k.max(1) as f64) * n as f64;
    if k > 0 && (stats.partite_min_degree as f64) < need {
        warnings.push(format!("partite minimum degree {} is below (1 - (1 - delta)/k) n = {need:.3}", stats.partite_min_degree));
    }
    let h = partite_complement(g);
    let gamma = (1.0 - delta) / k.max(1) as f64;
    let solved = solve(&h, eps, gamma, cfg, seed);
    verify_packing(&h, &solved.packing).expect("packing of the complement is valid");
    let cliques: Vec<Vec<VertexId>> = solved.packing.to_rows();
    for c in &cliques {
        assert_eq!(c.len(), k);
        for (a, &u) in c.iter().enumerate() {
            for &v in &c[a + 1..] {
                assert!(g.has_edge(u, v), "returned set {c:?} misses edge {u}-{v}");
            }
        }
    }
    warnings.extend(solved.warnings);
    CliqueOutcome {
        transversals: solved.packing.len(),
        packing: CliquePacking { cliques },
        target: n,
        warnings,
        errors: solved.errors,
    }
}

/// Each entry gives one color per base vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringPacking {
    pub colorings: Vec<Vec<u64>>,
}

impl ColoringPacking {
    /// Every coloring is a proper list coloring and no vertex gets the same
    /// color twice.
    pub fn verify(&self, la: &ListAssignment) -> bool {
        self.colorings.iter().all(|c| la.is_proper_coloring(c))
            && (0..la.vertex_count()).all(|v| {
                let mut seen = HashSet::new();
                self.colorings.iter().all(|c| seen.insert(c[v]))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColoringOutcome {
    pub packing: ColoringPacking,
    pub min_list_size: usize,
    pub color_degree: usize,
    pub warnings: Vec<String>,
    pub errors: Vec<Failure>,
}

impl ColoringOutcome {
    /// Fewer colorings than the shortest list or a solver failure.
    pub fn is_short(&self) -> bool {
        self.packing.colorings.len() < self.min_list_size || !self.errors.is_empty()
    }

    pub fn budget_exhausted(&self) -> bool {
        self.errors.iter().any(|e| e.budget)
    }
}

/// Maps a transversal of the conflict graph to a color per base vertex.
pub fn coloring_from_transversal(
    index: &crate::graph::ColoringIndex,
    n: usize,
    t: &crate::lll::Transversal,
) -> Vec<u64> {
    let mut colors = vec![0; n];
    for v in t.vertices() {
        let (base, c) = index.entry(v);
        colors[base] = c;
    }
    colors
}

/// Packs pairwise disjoint proper list colorings.
pub fn pack_list_colorings(la: &ListAssignment, eps: f64, cfg: &AppConfig, seed: u64) -> ColoringOutcome {
    let (gamma_graph, index) = build_list_coloring_graph(la);
    let solved = solve(&gamma_graph, eps, 1.0, cfg, seed);
    let colorings = solved
        .packing
        .transversals
        .iter()
        .map(|t| coloring_from_transversal(&index, la.vertex_count(), t))
        .collect();
    let packing = ColoringPacking { colorings };
    assert!(packing.verify(la), "conflict-graph packing maps to invalid colorings");
    ColoringOutcome {
        packing,
        min_list_size: la.min_list_size(),
        color_degree: la.color_degree(),
        warnings: solved.warnings,
        errors: solved.errors,
    }
}
