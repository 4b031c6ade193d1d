//! Seed-deterministic instance generators.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{GraphError, MultipartiteGraph, VertexId};
use crate::rng::substream;

/// `n` disjoint cliques `K_{n+1}` with part `i` holding vertex `i` of every
/// clique: `n + 1` parts of size `n`, maximum degree `n`, local degree 1, and
/// no independent transversal.
pub fn gen_cliques_extremal(n: usize) -> Result<MultipartiteGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameters("cliques-extremal needs n >= 1".into()));
    }
    let k = n + 1;
    let sizes = vec![n; k];
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::with_capacity(n); k * n];
    for clique in 0..n {
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    adj[i * n + clique].push((j * n + clique) as VertexId);
                }
            }
        }
    }
    Ok(MultipartiteGraph::from_trusted_adjacency(sizes, adj))
}

/// `k` parts of size `n` where every pair of parts induces a uniformly random
/// perfect matching.
pub fn gen_yuster(k: usize, n: usize, seed: u64) -> Result<MultipartiteGraph, GraphError> {
    if k < 2 || n == 0 {
        return Err(GraphError::InvalidParameters(format!("yuster needs k >= 2 and n >= 1 (got k={k}, n={n})")));
    }
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::with_capacity(k - 1); k * n];
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..k {
        for j in i + 1..k {
            perm.sort_unstable();
            perm.shuffle(&mut substream(seed, &[i as u64, j as u64]));
            for (a, &b) in perm.iter().enumerate() {
                let (u, v) = (i * n + a, j * n + b);
                adj[u].push(v as VertexId);
                adj[v].push(u as VertexId);
            }
        }
    }
    Ok(MultipartiteGraph::from_trusted_adjacency(vec![n; k], adj))
}

/// `k = (1 - eps) n` parts of size `n` formed by `n/4` copies of the complete
/// `k`-partite graph with two vertices per part plus `kn/2` isolated
/// vertices. Average degree is low but the instance has fewer than `n`
/// disjoint independent transversals.
pub fn gen_avg_degree_counterexample(n: usize, eps: f64) -> Result<MultipartiteGraph, GraphError> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(GraphError::InvalidParameters(format!("n = {n} must be a positive multiple of 4")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(GraphError::InvalidParameters(format!("eps = {eps} outside [0, 1)")));
    }
    let k_real = (1.0 - eps) * n as f64;
    let k = k_real.round() as usize;
    if (k_real - k as f64).abs() > 1e-9 {
        return Err(GraphError::InvalidParameters(format!("(1 - eps) n = {k_real} is not an integer")));
    }
    if k < 2 {
        return Err(GraphError::InvalidParameters(format!("needs at least two parts (k = {k})")));
    }
    let copies = n / 4;
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); k * n];
    for h in 0..copies {
        let members: Vec<usize> = (0..k).flat_map(|i| [i * n + 2 * h, i * n + 2 * h + 1]).collect();
        for &u in &members {
            for &v in &members {
                if u / n != v / n {
                    adj[u].push(v as VertexId);
                }
            }
        }
    }
    Ok(MultipartiteGraph::from_trusted_adjacency(vec![n; k], adj))
}

pub fn gen_complete_multipartite(k: usize, n: usize) -> MultipartiteGraph {
    let total = k * n;
    let adj = (0..total)
        .map(|u| (0..total).filter(|&v| v / n != u / n).map(|v| v as VertexId).collect())
        .collect();
    MultipartiteGraph::from_trusted_adjacency(vec![n; k], adj)
}

/// Parameters for [`gen_random_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomGraphParams {
    pub k: usize,
    pub n: usize,
    pub max_degree: usize,
    pub local_degree: usize,
    /// Edge count to aim for. `None` tries to saturate the degree cap.
    pub target_edges: Option<usize>,
}

/// Random graph whose maximum degree and local degree respect the caps.
/// Edges are proposed uniformly among cross-part pairs and accepted when
/// both caps allow.
pub fn gen_random(
    k: usize,
    n: usize,
    max_degree: usize,
    local_degree: usize,
    seed: u64,
) -> Result<MultipartiteGraph, GraphError> {
    gen_random_with(RandomGraphParams { k, n, max_degree, local_degree, target_edges: None }, seed)
}

pub fn gen_random_with(params: RandomGraphParams, seed: u64) -> Result<MultipartiteGraph, GraphError> {
    let RandomGraphParams { k, n, max_degree, local_degree, target_edges } = params;
    if k == 0 || n == 0 {
        return Err(GraphError::InvalidParameters("random graph needs k >= 1 and n >= 1".into()));
    }
    if local_degree == 0 && max_degree > 0 && target_edges != Some(0) {
        return Err(GraphError::InvalidParameters(format!(
            "infeasible caps: local degree 0 admits no edges but max degree {max_degree} was requested"
        )));
    }
    let total = k * n;
    if total > u32::MAX as usize {
        return Err(GraphError::TooLarge(total));
    }
    let reachable = max_degree.min(local_degree.saturating_mul(k - 1));
    let target = target_edges.unwrap_or(total * reachable / 2).min(total * reachable / 2);
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); total];
    if k < 2 || target == 0 {
        return Ok(MultipartiteGraph::from_trusted_adjacency(vec![n; k], adj));
    }
    let mut rng = substream(seed, &[0x7261_6e64]);
    let mut edges = 0;
    let attempts = 8 * target + 1000;
    for _ in 0..attempts {
        if edges == target {
            break;
        }
        let u = rng.gen_range(0..total);
        let pu = u / n;
        let mut v = rng.gen_range(0..total - n);
        if v >= pu * n {
            v += n;
        }
        let pv = v / n;
        if adj[u].len() >= max_degree || adj[v].len() >= max_degree {
            continue;
        }
        if adj[u].contains(&(v as VertexId)) {
            continue;
        }
        let in_pv = adj[u].iter().filter(|&&w| w as usize / n == pv).count();
        let in_pu = adj[v].iter().filter(|&&w| w as usize / n == pu).count();
        if in_pv >= local_degree || in_pu >= local_degree {
            continue;
        }
        adj[u].push(v as VertexId);
        adj[v].push(u as VertexId);
        edges += 1;
    }
    Ok(MultipartiteGraph::from_trusted_adjacency(vec![n; k], adj))
}
