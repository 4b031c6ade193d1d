//! Local-degree reduction: random splitting of parts into small blocks so
//! that each block graph has bounded local degree, then packing every block
//! separately.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MultipartiteGraph, VertexId};
use crate::lll::{find_transversal, full_candidates, LllError};
use crate::nibble::{pack, with_workers, MonitorConfig, SolvePolicy};
use crate::oracle::{verify_packing, Packing};
use crate::rng::{derive_seed, substream};
use crate::schedule::{make_practical_schedule, make_schedule, InequalityCheck, NibbleSchedule};

const SPLIT: u64 = 0x5350;
const HALVE: u64 = 0x4841;
const TRIM: u64 = 0x5452;
const BLOCK: u64 = 0x424b;

/// Local-degree bound for blocks after splitting.
pub const BLOCK_LOCAL_DEGREE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("parts must have equal sizes (got {min} to {max})")]
    UnequalParts { min: usize, max: usize },
    #[error("part {part} has odd size {size}")]
    OddPart { part: usize, size: usize },
    #[error("graph has no vertices")]
    Empty,
    #[error("{what}: no acceptable draw in {attempts} attempts: {}", diagnostics.join("; "))]
    BudgetExhausted { what: &'static str, attempts: usize, diagnostics: Vec<String> },
}

/// Which properties a split must satisfy before it is accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Partition plus every size, degree and local-degree threshold.
    Strict,
    /// Partition with nonempty balanced blocks; thresholds are only reported.
    Structural,
}

/// A block label for every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSplit {
    pub m: usize,
    pub labels: Vec<u32>,
}

impl PartSplit {
    /// `blocks[label][part]`: vertices with that label, ascending.
    pub fn blocks(&self, g: &MultipartiteGraph) -> Vec<Vec<Vec<VertexId>>> {
        let mut out = vec![vec![Vec::new(); g.k()]; self.m];
        for v in 0..g.vertex_count() as VertexId {
            out[self.labels[v as usize] as usize][g.part_of(v)].push(v);
        }
        out
    }

    /// `sizes[label][part]`.
    pub fn block_sizes(&self, g: &MultipartiteGraph) -> Vec<Vec<usize>> {
        let mut out = vec![vec![0; g.k()]; self.m];
        for v in 0..g.vertex_count() as VertexId {
            out[self.labels[v as usize] as usize][g.part_of(v)] += 1;
        }
        out
    }

    /// Every vertex has a label below `m`.
    pub fn is_partition(&self, g: &MultipartiteGraph) -> bool {
        self.labels.len() == g.vertex_count() && self.labels.iter().all(|&l| (l as usize) < self.m)
    }

    /// Largest number of neighbors of one vertex inside one block, over all
    /// blocks, and the same restricted to a single part of a block.
    pub fn block_degrees(&self, g: &MultipartiteGraph) -> (usize, usize) {
        let mut max_deg = 0;
        let mut max_local = 0;
        let mut labels = Vec::new();
        for v in 0..g.vertex_count() as VertexId {
            labels.clear();
            for (_, run) in g.neighbor_groups(v) {
                let start = labels.len();
                labels.extend(run.iter().map(|&w| self.labels[w as usize]));
                labels[start..].sort_unstable();
                max_local = max_local.max(longest_run(&labels[start..]));
            }
            labels.sort_unstable();
            max_deg = max_deg.max(longest_run(&labels));
        }
        (max_deg, max_local)
    }
}

fn longest_run(sorted: &[u32]) -> usize {
    sorted.chunk_by(|a, b| a == b).map(<[u32]>::len).max().unwrap_or(0)
}

/// Measured quantities of an accepted split with the thresholds they were
/// held against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitAudit {
    pub attempts: usize,
    pub checks: Vec<InequalityCheck>,
    pub min_block: usize,
    pub max_block_degree: usize,
    pub max_block_local_degree: usize,
    pub warnings: Vec<String>,
}

impl SplitAudit {
    pub fn thresholds_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn equal_part_size(g: &MultipartiteGraph) -> Result<usize, ReduceError> {
    let s = g.stats();
    if g.vertex_count() == 0 {
        return Err(ReduceError::Empty);
    }
    if s.min_part_size != s.max_part_size {
        return Err(ReduceError::UnequalParts { min: s.min_part_size, max: s.max_part_size });
    }
    Ok(s.min_part_size)
}

/// Largest `m` with `m^3 <= n^2`.
pub fn split_count(n: usize) -> usize {
    let target = (n as u128).pow(2);
    let mut m = ((n as f64).powf(2.0 / 3.0).floor() as u128).max(1);
    while m.pow(3) > target {
        m -= 1;
    }
    while (m + 1).pow(3) <= target {
        m += 1;
    }
    m as usize
}

/// Splits every part into `m = floor(n^{2/3})` blocks. Strict mode draws
/// i.i.d. uniform labels until the block-size, block-degree and
/// block-local-degree bounds hold; structural mode draws a uniformly random
/// balanced labelling.
pub fn split_parts(
    g: &MultipartiteGraph,
    eps: f64,
    seed: u64,
    retry_budget: usize,
    mode: CheckMode,
) -> Result<(PartSplit, SplitAudit), ReduceError> {
    let n = equal_part_size(g)?;
    let m = split_count(n);
    let cube = (n as f64).cbrt();
    let mut warnings = Vec::new();
    let local = g.stats().local_degree;
    if local as f64 > cube {
        warnings.push(format!("local degree {local} exceeds n^(1/3) = {cube:.3}"));
    }
    let size_floor = (1.0 - eps / 4.0) * cube;
    let degree_cap = (1.0 - 3.0 * eps / 4.0) * cube;
    let mut last = Vec::new();
    for attempt in 0..retry_budget.max(1) {
        let mut rng = substream(seed, &[SPLIT, attempt as u64]);
        let mut labels = vec![0u32; g.vertex_count()];
        match mode {
            CheckMode::Strict => {
                for l in labels.iter_mut() {
                    *l = rng.gen_range(0..m as u32);
                }
            }
            CheckMode::Structural => {
                let mut slots: Vec<u32> = (0..n).map(|x| (x % m) as u32).collect();
                for i in 0..g.k() {
                    slots.shuffle(&mut rng);
                    for (v, &s) in g.part_range(i).zip(&slots) {
                        labels[v as usize] = s;
                    }
                }
            }
        }
        let split = PartSplit { m, labels };
        let sizes = split.block_sizes(g);
        let min_block = sizes.iter().flatten().copied().min().unwrap_or(0);
        let (max_deg, max_local) = split.block_degrees(g);
        let checks = vec![
            InequalityCheck::le("(1 - eps/4) n^(1/3) <= min block size", size_floor, min_block as f64),
            InequalityCheck::le("max block degree <= (1 - 3eps/4) n^(1/3)", max_deg as f64, degree_cap),
            InequalityCheck::lt("max block local degree < 12", max_local as f64, BLOCK_LOCAL_DEGREE as f64),
        ];
        let structural = min_block > 0;
        let accept = structural && (mode == CheckMode::Structural || checks.iter().all(|c| c.holds));
        if accept {
            let audit = SplitAudit {
                attempts: attempt + 1,
                checks,
                min_block,
                max_block_degree: max_deg,
                max_block_local_degree: max_local,
                warnings,
            };
            return Ok((split, audit));
        }
        last = checks.iter().filter(|c| !c.holds).map(|c| format!("{}: {} vs {}", c.description, c.lhs, c.rhs)).collect();
        if !structural {
            last.push("empty block".into());
        }
    }
    Err(ReduceError::BudgetExhausted { what: "split_parts", attempts: retry_budget.max(1), diagnostics: last })
}

/// Splits every part into two halves of equal size: consecutive local
/// indices are paired and a fair coin sends one of each pair to block 0.
pub fn halve_parts(
    g: &MultipartiteGraph,
    seed: u64,
    retry_budget: usize,
    mode: CheckMode,
) -> Result<(PartSplit, SplitAudit), ReduceError> {
    for (part, &size) in g.part_sizes().iter().enumerate() {
        if size % 2 == 1 {
            return Err(ReduceError::OddPart { part, size });
        }
    }
    let stats = g.stats();
    let (delta, d) = (stats.max_degree as f64, stats.local_degree as f64);
    let mut warnings = Vec::new();
    if delta > 1.0 && d <= delta.ln().powi(4) {
        warnings.push(format!("local degree {d} is not above ln^4(max degree) = {:.3}", delta.ln().powi(4)));
    }
    let degree_cap = delta / 2.0 + delta.powf(2.0 / 3.0);
    let local_cap = d / 2.0 + d.powf(2.0 / 3.0);
    let mut last = Vec::new();
    for attempt in 0..retry_budget.max(1) {
        let mut rng = substream(seed, &[HALVE, attempt as u64]);
        let mut labels = vec![0u32; g.vertex_count()];
        for i in 0..g.k() {
            let range = g.part_range(i);
            let mut v = range.start;
            while v < range.end {
                let flip = rng.gen::<bool>() as u32;
                labels[v as usize] = flip;
                labels[v as usize + 1] = 1 - flip;
                v += 2;
            }
        }
        let split = PartSplit { m: 2, labels };
        let (max_deg, max_local) = split.block_degrees(g);
        let checks = vec![
            InequalityCheck::le("max block degree <= D/2 + D^(2/3)", max_deg as f64, degree_cap),
            InequalityCheck::le("max block local degree <= d/2 + d^(2/3)", max_local as f64, local_cap),
        ];
        if mode == CheckMode::Structural || checks.iter().all(|c| c.holds) {
            let min_block = g.part_sizes().iter().min().copied().unwrap_or(0) / 2;
            let audit = SplitAudit {
                attempts: attempt + 1,
                checks,
                min_block,
                max_block_degree: max_deg,
                max_block_local_degree: max_local,
                warnings,
            };
            return Ok((split, audit));
        }
        last = checks.iter().filter(|c| !c.holds).map(|c| format!("{}: {} vs {}", c.description, c.lhs, c.rhs)).collect();
    }
    Err(ReduceError::BudgetExhausted { what: "halve_parts", attempts: retry_budget.max(1), diagnostics: last })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionCase {
    /// `n < 1/gamma`: local degree below 1, so the graph has no edges.
    EdgeFreeTrivial,
    /// `n <= gamma^{-4/3}`: one split.
    DirectSplit,
    /// Halve `j` times, then split every leaf.
    HalveThenSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionPlan {
    pub eps: f64,
    pub gamma: f64,
    pub n: usize,
    pub case: ReductionCase,
    pub j: u32,
    pub delta_seq: Vec<f64>,
    pub d_seq: Vec<f64>,
    /// Part size of a leaf after halving, `floor(n / 2^j)`.
    pub n_prime: usize,
    pub claims: Vec<InequalityCheck>,
    /// Vertex ids deleted per part before halving; filled in by
    /// [`reduce_and_pack`].
    pub deletions: Vec<Vec<VertexId>>,
}

impl ReductionPlan {
    pub fn claim(&self, prefix: &str) -> Option<&InequalityCheck> {
        self.claims.iter().find(|c| c.description.starts_with(prefix))
    }
}

/// `(x/2 + x^{2/3})` iterated `j` times from `x0`, inclusive of both ends.
pub fn halving_sequence(x0: f64, j: u32) -> Vec<f64> {
    let mut seq = vec![x0];
    for _ in 0..j {
        let x = *seq.last().unwrap();
        seq.push(x / 2.0 + x.powf(2.0 / 3.0));
    }
    seq
}

/// Chooses the reduction route for parts of size `n`.
pub fn plan_reduction(eps: f64, gamma: f64, n: usize) -> ReductionPlan {
    let nf = n as f64;
    let case = if nf < 1.0 / gamma {
        ReductionCase::EdgeFreeTrivial
    } else if nf <= gamma.powf(-4.0 / 3.0) {
        ReductionCase::DirectSplit
    } else {
        ReductionCase::HalveThenSplit
    };
    let mut plan = ReductionPlan {
        eps,
        gamma,
        n,
        case,
        j: 0,
        delta_seq: vec![(1.0 - eps) * nf],
        d_seq: vec![gamma * nf],
        n_prime: n,
        claims: vec![],
        deletions: vec![],
    };
    if case != ReductionCase::HalveThenSplit {
        return plan;
    }
    let x = gamma.powf(4.0 / 3.0) * nf;
    let mut j = x.log2().ceil().max(1.0) as u32;
    while 2f64.powi(j as i32) < x {
        j += 1;
    }
    while j > 1 && 2f64.powi(j as i32 - 1) >= x {
        j -= 1;
    }
    plan.j = j;
    plan.delta_seq = halving_sequence((1.0 - eps) * nf, j);
    plan.d_seq = halving_sequence(gamma * nf, j);
    plan.n_prime = n >> j;
    let leaf = nf / 2f64.powi(j as i32) - 1.0;
    let dj = *plan.delta_seq.last().unwrap();
    let lj = *plan.d_seq.last().unwrap();
    plan.claims.push(InequalityCheck::lt("F1 lower: 1/(4 gamma^(4/3)) < D_j", 0.25 * gamma.powf(-4.0 / 3.0), dj));
    plan.claims.push(InequalityCheck::le("F1 upper: D_j <= (1 - eps/2)(n/2^j - 1)", dj, (1.0 - eps / 2.0) * leaf));
    plan.claims.push(InequalityCheck::le("F2: d_j <= (n/2^j - 1)^(1/3)", lj, leaf.max(0.0).cbrt()));
    let f3_worst = (0..j as usize)
        .map(|t| plan.d_seq[t] - plan.delta_seq[t].ln().powi(4))
        .fold(f64::INFINITY, f64::min);
    plan.claims.push(InequalityCheck::lt("F3: min_t (ln^4 D_t - d_t) < 0", -f3_worst, 0.0));
    let tele = plan.delta_seq[0].cbrt() / 2f64.powf(j as f64 / 3.0) + 4.0;
    plan.claims.push(InequalityCheck::le("telescoped: D_j^(1/3) <= D_0^(1/3)/2^(j/3) + 4", dj.cbrt(), tele));
    plan
}

/// How every block graph is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSchedule {
    /// Theory schedule with `eps/2` on the block's smallest part size.
    Theory,
    /// Fixed `r*`, `t*`; `p` is raised to `1/n_block` when smaller.
    Practical { p: f64, r_star: u64, t_star: u64 },
}

impl BlockSchedule {
    pub fn desk() -> Self {
        BlockSchedule::Practical { p: 0.2, r_star: 64, t_star: 8 }
    }

    pub fn for_block(&self, eps: f64, n_block: usize) -> Option<NibbleSchedule> {
        match *self {
            BlockSchedule::Theory => make_schedule(eps / 2.0, n_block).ok(),
            BlockSchedule::Practical { p, r_star, t_star } => {
                let p = p.max(1.0 / n_block as f64);
                make_practical_schedule(eps, n_block, p, r_star, t_star).ok()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceConfig {
    pub schedule: BlockSchedule,
    pub policy: SolvePolicy,
    pub check: CheckMode,
    pub retry_budget: usize,
}

impl ReduceConfig {
    pub fn desk() -> Self {
        Self {
            schedule: BlockSchedule::desk(),
            policy: SolvePolicy::practical(),
            check: CheckMode::Structural,
            retry_budget: 100,
        }
    }

    pub fn theory() -> Self {
        Self { schedule: BlockSchedule::Theory, policy: SolvePolicy::theory(), check: CheckMode::Strict, retry_budget: 100 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceOutcome {
    pub packing: Packing,
    pub plan: ReductionPlan,
    /// Number of block graphs packed.
    pub blocks: usize,
    /// Largest local degree over the packed block graphs.
    pub block_local_degree: usize,
    pub warnings: Vec<String>,
    /// Stage and block failures; the packing holds everything else.
    pub errors: Vec<Failure>,
}

impl ReduceOutcome {
    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn budget_exhausted(&self) -> bool {
        self.errors.iter().any(|e| e.budget)
    }
}

/// A failed stage or block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub message: String,
    /// A retry or resample budget ran out, as opposed to infeasibility.
    pub budget: bool,
}

impl Failure {
    fn from_reduce(context: String, e: &ReduceError) -> Self {
        let budget = matches!(e, ReduceError::BudgetExhausted { .. });
        Self { message: format!("{context}{e}"), budget }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type Block = Vec<Vec<VertexId>>;

/// Reduces local degree by splitting, packs every block, and returns the
/// union of the block packings.
pub fn reduce_and_pack(g: &MultipartiteGraph, eps: f64, gamma: f64, cfg: &ReduceConfig, seed: u64) -> ReduceOutcome {
    with_workers(cfg.policy.workers, || reduce_inner(g, eps, gamma, cfg, seed))
}

fn reduce_inner(g: &MultipartiteGraph, eps: f64, gamma: f64, cfg: &ReduceConfig, seed: u64) -> ReduceOutcome {
    let stats = g.stats();
    let n = stats.min_part_size;
    let mut plan = plan_reduction(eps, gamma, n);
    let mut warnings = Vec::new();
    if stats.max_degree as f64 > (1.0 - eps) * n as f64 {
        warnings.push(format!("maximum degree {} exceeds (1 - eps) n", stats.max_degree));
    }
    if stats.local_degree as f64 > gamma * n as f64 {
        warnings.push(format!("local degree {} exceeds gamma n = {:.3}", stats.local_degree, gamma * n as f64));
    }
    let mut out = ReduceOutcome {
        packing: Packing::default(),
        plan: plan.clone(),
        blocks: 0,
        block_local_degree: 0,
        warnings: vec![],
        errors: vec![],
    };
    if g.k() == 0 || n == 0 {
        out.warnings = warnings;
        return out;
    }

    let whole: Block = (0..g.k()).map(|i| g.part_range(i).collect()).collect();
    let leaves: Vec<Block> = match plan.case {
        ReductionCase::EdgeFreeTrivial if g.edge_count() == 0 => {
            let transversals = (0..n).map(|a| crate::lll::Transversal::from_choice((0..g.k()).map(|i| (i, g.vertex(i, a))))).collect();
            out.packing = Packing::new(transversals);
            out.warnings = warnings;
            return out;
        }
        ReductionCase::EdgeFreeTrivial => {
            warnings.push("graph has edges although n < 1/gamma; packing it directly".into());
            vec![whole]
        }
        ReductionCase::DirectSplit => {
            let (trimmed, deletions) = trim(g, &whole, n, seed);
            plan.deletions = deletions;
            match split_block(g, &trimmed, eps, cfg, derive_seed(seed, &[SPLIT]), &mut warnings) {
                Ok(blocks) => blocks,
                Err(e) => {
                    out.errors.push(Failure::from_reduce(String::new(), &e));
                    vec![]
                }
            }
        }
        ReductionCase::HalveThenSplit => {
            let mut j = plan.j;
            while j > 0 && n >> j == 0 {
                j -= 1;
            }
            if j != plan.j {
                warnings.push(format!("halving depth lowered from {} to {j} so leaves stay nonempty", plan.j));
            }
            let target = (n >> j) << j;
            let (trimmed, deletions) = trim(g, &whole, target, seed);
            plan.deletions = deletions;
            let mut level = vec![trimmed];
            let mut failed = None;
            'levels: for depth in 0..j {
                let mut next = Vec::with_capacity(level.len() * 2);
                for (idx, block) in level.iter().enumerate() {
                    let (h, map) = g.induced(block);
                    let s = derive_seed(seed, &[HALVE, depth as u64, idx as u64]);
                    match halve_parts(&h, s, cfg.retry_budget, cfg.check) {
                        Ok((split, audit)) => {
                            warnings.extend(audit.warnings);
                            next.extend(split.blocks(&h).into_iter().map(|b| remap(&b, &map)));
                        }
                        Err(e) => {
                            failed = Some(Failure::from_reduce(format!("halving level {depth}, block {idx}: "), &e));
                            break 'levels;
                        }
                    }
                }
                level = next;
            }
            if let Some(e) = failed {
                out.errors.push(e);
                vec![]
            } else {
                let mut leaves = Vec::new();
                for (idx, block) in level.iter().enumerate() {
                    match split_block(g, block, eps, cfg, derive_seed(seed, &[SPLIT, idx as u64]), &mut warnings) {
                        Ok(b) => leaves.extend(b),
                        Err(e) => out.errors.push(Failure::from_reduce(format!("leaf {idx}: "), &e)),
                    }
                }
                leaves
            }
        }
    };
    warnings.sort();
    warnings.dedup();

    let results: Vec<(Vec<crate::lll::Transversal>, usize, Option<Failure>)> = leaves
        .par_iter()
        .enumerate()
        .map(|(idx, block)| {
            let (h, map) = g.induced(block);
            let local = h.stats().local_degree;
            let (packing, err) = pack_block(&h, eps, cfg, derive_seed(seed, &[BLOCK, idx as u64]));
            let ts = packing
                .transversals
                .iter()
                .map(|t| crate::lll::Transversal::from_choice(t.iter().map(|(i, v)| (i, map[v as usize]))))
                .collect();
            (ts, local, err.map(|e| Failure { message: format!("block {idx}: {}", e.message), ..e }))
        })
        .collect();
    let mut transversals = Vec::new();
    for (ts, local, err) in results {
        transversals.extend(ts);
        out.block_local_degree = out.block_local_degree.max(local);
        out.errors.extend(err);
    }
    out.blocks = leaves.len();
    out.packing = Packing::new(transversals);
    out.plan = plan;
    out.warnings = warnings;
    if let Err(v) = verify_packing(g, &out.packing) {
        panic!("reduction produced an invalid packing: {v:?}");
    }
    out
}

fn remap(block: &Block, map: &[VertexId]) -> Block {
    block.iter().map(|part| part.iter().map(|&v| map[v as usize]).collect()).collect()
}

/// Keeps `size` uniformly chosen vertices of every part of `block`.
fn trim(g: &MultipartiteGraph, block: &Block, size: usize, seed: u64) -> (Block, Vec<Vec<VertexId>>) {
    let mut kept = Vec::with_capacity(block.len());
    let mut deleted = Vec::with_capacity(block.len());
    for (i, part) in block.iter().enumerate() {
        let mut order = part.clone();
        if order.len() > size {
            order.shuffle(&mut substream(seed, &[TRIM, i as u64]));
        }
        let mut keep = order[..size.min(order.len())].to_vec();
        let mut drop = order[size.min(order.len())..].to_vec();
        keep.sort_unstable();
        drop.sort_unstable();
        debug_assert!(keep.iter().all(|&v| g.part_of(v) == i));
        kept.push(keep);
        deleted.push(drop);
    }
    (kept, deleted)
}

fn split_block(
    g: &MultipartiteGraph,
    block: &Block,
    eps: f64,
    cfg: &ReduceConfig,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<Vec<Block>, ReduceError> {
    let (h, map) = g.induced(block);
    let (split, audit) = split_parts(&h, eps, seed, cfg.retry_budget, cfg.check)?;
    warnings.extend(audit.warnings);
    Ok(split.blocks(&h).into_iter().map(|b| remap(&b, &map)).collect())
}

/// Packs one block graph; blocks with a single vertex per part go straight
/// to the transversal finder.
pub(crate) fn pack_block(h: &MultipartiteGraph, eps: f64, cfg: &ReduceConfig, seed: u64) -> (Packing, Option<Failure>) {
    let n_block = h.n();
    if n_block == 0 {
        return (Packing::default(), None);
    }
    let policy = SolvePolicy { workers: 0, ..cfg.policy };
    let sched = if n_block == 1 { None } else { cfg.schedule.for_block(eps, n_block) };
    match sched {
        Some(sched) => {
            let out = pack(h, &sched, &MonitorConfig::for_schedule(&sched), &policy, seed);
            (out.packing, out.error.map(|e| Failure { message: e.to_string(), budget: e.is_budget() }))
        }
        None => {
            let lll = crate::lll::LllConfig { seed, ..policy.lll };
            match find_transversal(h, &full_candidates(h), &lll) {
                Ok(found) => (Packing::new(vec![found.transversal]), None),
                Err(LllError::Infeasible) => {
                    (Packing::default(), Some(Failure { message: "no independent transversal".into(), budget: false }))
                }
                Err(e) => (Packing::default(), Some(Failure { message: e.to_string(), budget: true })),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_random, MultipartiteGraph};

    #[test]
    fn split_count_is_floor_of_two_thirds_power() {
        assert_eq!(split_count(4096), 256);
        assert_eq!(split_count(8), 4);
        assert_eq!(split_count(16), 6);
        assert_eq!(split_count(1), 1);
        assert_eq!(split_count(1000), 100);
    }

    #[test]
    fn edge_free_split_is_a_partition_with_nonempty_blocks() {
        let g = MultipartiteGraph::edgeless(&[27; 3]);
        {
            let mode = CheckMode::Structural;
            let (split, audit) = split_parts(&g, 0.5, 4, 200, mode).unwrap();
            assert!(split.is_partition(&g));
            let sizes = split.block_sizes(&g);
            assert!(sizes.iter().flatten().all(|&s| s > 0));
            for i in 0..3 {
                assert_eq!(sizes.iter().map(|row| row[i]).sum::<usize>(), 27);
            }
            assert_eq!(audit.max_block_degree, 0);
            assert_eq!(audit.attempts, 1);
        }
    }

    #[test]
    fn strict_split_reports_unbalanced_blocks() {
        // At n = 27 every one of the 27 blocks must hold exactly 3 vertices.
        let g = MultipartiteGraph::edgeless(&[27; 3]);
        match split_parts(&g, 0.5, 4, 5, CheckMode::Strict) {
            Err(ReduceError::BudgetExhausted { attempts, diagnostics, .. }) => {
                assert_eq!(attempts, 5);
                assert!(diagnostics.iter().any(|d| d.contains("min block size") || d.contains("empty block")));
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn halving_parts_of_two() {
        let g = MultipartiteGraph::edgeless(&[2, 2, 2]);
        let (split, audit) = halve_parts(&g, 1, 1, CheckMode::Strict).unwrap();
        assert_eq!(audit.attempts, 1);
        assert!(split.block_sizes(&g).iter().flatten().all(|&s| s == 1));
        assert!(matches!(halve_parts(&MultipartiteGraph::edgeless(&[3, 2]), 1, 1, CheckMode::Strict), Err(ReduceError::OddPart { part: 0, size: 3 })));
    }

    #[test]
    fn halving_complete_bipartite_meets_degree_bound() {
        let n2 = 8;
        let edges = (0..n2 as u64).flat_map(|a| (0..n2 as u64).map(move |b| (a, n2 as u64 + b)));
        let g = MultipartiteGraph::from_edges(&[n2, n2], edges).unwrap();
        let (split, audit) = halve_parts(&g, 9, 10, CheckMode::Strict).unwrap();
        let (deg, _) = split.block_degrees(&g);
        assert!(deg as f64 <= n2 as f64 / 2.0 + (n2 as f64).powf(2.0 / 3.0));
        assert!(audit.thresholds_hold());
    }

    #[test]
    fn plan_examples() {
        let plan = plan_reduction(0.5, 0.1, 1000);
        assert_eq!(plan.case, ReductionCase::HalveThenSplit);
        assert_eq!(plan.j, 6);
        assert_eq!(plan.delta_seq.len(), 7);
        let seq = halving_sequence(100.0, 1);
        assert!((seq[1] - (50.0 + 100f64.powf(2.0 / 3.0))).abs() < 1e-12);
        assert!((seq[1] - 71.544).abs() < 1e-3);
        assert_eq!(plan_reduction(0.5, 0.1, 9).case, ReductionCase::EdgeFreeTrivial);
        assert_eq!(plan_reduction(0.5, 0.1, 20).case, ReductionCase::DirectSplit);
        assert!(plan.claim("telescoped").unwrap().holds);
    }

    #[test]
    fn trivial_case_partitions_vertices() {
        let g = MultipartiteGraph::edgeless(&[5, 6, 5]);
        let out = reduce_and_pack(&g, 0.5, 0.1, &ReduceConfig::desk(), 3);
        assert_eq!(out.packing.len(), 5);
        assert!(out.is_complete());
    }

    #[test]
    fn double_halving_leaves_one_vertex_per_part() {
        let g = MultipartiteGraph::edgeless(&[4, 4, 4]);
        let mut level = vec![(0..3).map(|i| g.part_range(i).collect::<Vec<_>>()).collect::<Vec<_>>()];
        for depth in 0..2 {
            let mut next = Vec::new();
            for block in &level {
                let (h, map) = g.induced(block);
                let (split, _) = halve_parts(&h, depth, 1, CheckMode::Strict).unwrap();
                next.extend(split.blocks(&h).into_iter().map(|b| remap(&b, &map)));
            }
            level = next;
        }
        assert_eq!(level.len(), 4);
        assert!(level.iter().flatten().all(|part| part.len() == 1));
    }

    #[test]
    fn random_instance_reduces_to_small_local_degree() {
        for seed in 0..4 {
            let g = gen_random(6, 16, 4, 1, seed).unwrap();
            let out = reduce_and_pack(&g, 0.5, 0.25, &ReduceConfig::desk(), seed);
            assert_eq!(out.plan.case, ReductionCase::HalveThenSplit);
            assert_eq!(out.plan.j, 2);
            assert!(out.block_local_degree <= BLOCK_LOCAL_DEGREE);
            verify_packing(&g, &out.packing).unwrap();
        }
    }
}
