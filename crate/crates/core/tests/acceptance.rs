//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use itpack::apps::{clique_pack, pack_list_colorings, solve, AppConfig, ReductionMode};
use itpack::graph::{
    build_list_coloring_graph, gen_cliques_extremal, gen_complete_multipartite, gen_random, gen_random_with,
    ListAssignment, MultipartiteGraph, RandomGraphParams, VertexId,
};
use itpack::lll::{find_transversal, full_candidates, Fallback, LllConfig, LllError};
use itpack::nibble::{hit_probability, init_round, pack, run_iteration, run_round, SolvePolicy};
use itpack::oracle::{exists_transversal, max_disjoint_transversals, verify_packing, PackingGuard};
use itpack::reduce::{halving_sequence, plan_reduction, reduce_and_pack, ReduceConfig};
use itpack::schedule::{make_practical_schedule, make_schedule, validate_observation, MonitorConfig, NibbleSchedule};

type Verdict = Result<String, String>;

fn practical(n: usize, p: f64) -> NibbleSchedule {
    make_practical_schedule(0.1, n, p.max(1.0 / n as f64), 64, 8).expect("valid practical schedule")
}

fn pack_practical(g: &MultipartiteGraph, p: f64, seed: u64, workers: usize) -> itpack::PackOutcome {
    let sched = practical(g.n(), p);
    let policy = SolvePolicy { workers, ..SolvePolicy::practical() };
    pack(g, &sched, &MonitorConfig::practical(g.n()), &policy, seed)
}

fn validity_fuzzing() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut transversals = 0;
    for seed in 0..1000u64 {
        let k = rng.gen_range(2..=8);
        let n = rng.gen_range(2..=32);
        let local = rng.gen_range(0..=2);
        let max_deg = if local == 0 { 0 } else { rng.gen_range(0..=local * (k - 1)) };
        let g = gen_random(k, n, max_deg, local, seed).map_err(|e| e.to_string())?;
        let out = pack_practical(&g, 0.2, seed, 0);
        verify_packing(&g, &out.packing).map_err(|v| format!("seed {seed}: {v:?}"))?;
        transversals += out.packing.len();
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("1000 instances valid, {transversals} transversals, {elapsed:.1?}"))
}

fn edge_free_completeness() -> Verdict {
    let cfg = AppConfig { reduction: ReductionMode::Never, ..AppConfig::default() };
    for k in 1..=50 {
        for n in 1..=50 {
            let g = MultipartiteGraph::edgeless(&vec![n; k]);
            let out = solve(&g, 0.1, 1.0, &cfg, (k * 100 + n) as u64);
            verify_packing(&g, &out.packing).map_err(|v| format!("k={k} n={n}: {v:?}"))?;
            if out.packing.len() != n {
                return Err(format!("k={k} n={n}: {} transversals", out.packing.len()));
            }
        }
    }
    Ok("all 2500 (k, n) pairs partitioned into n transversals".into())
}

fn extremal_nonexistence() -> Verdict {
    for n in 1..=4 {
        let g = gen_cliques_extremal(n).map_err(|e| e.to_string())?;
        if exists_transversal(&g, 1_000_000).map_err(|e| e.to_string())?.is_some() {
            return Err(format!("oracle found a transversal at n={n}"));
        }
        if n == 1 {
            match find_transversal(&g, &full_candidates(&g), &LllConfig::default()) {
                Err(LllError::Infeasible) => {}
                other => return Err(format!("n=1: expected infeasible, got {other:?}")),
            }
            continue;
        }
        let out = pack_practical(&g, 0.5, n as u64, 0);
        let flagged = out.error.as_ref().is_some_and(|e| e.is_infeasible());
        if !out.packing.is_empty() || !flagged {
            return Err(format!("n={n}: {} transversals, error {:?}", out.packing.len(), out.error));
        }
    }
    Ok("oracle: none for n = 1..4; pack: 0 transversals, flagged infeasible".into())
}

fn oracle_upper_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut tight = 0;
    for seed in 0..200u64 {
        let k = rng.gen_range(2..=5);
        let n = rng.gen_range(2..=5);
        let local = rng.gen_range(1..=2);
        let max_deg = rng.gen_range(1..=local * (k - 1));
        let g = gen_random(k, n, max_deg, local, seed).map_err(|e| e.to_string())?;
        let (best, _) = max_disjoint_transversals(&g, PackingGuard::default()).map_err(|e| e.to_string())?;
        let got = pack_practical(&g, 0.3, seed, 0).packing.len();
        if got > best {
            return Err(format!("seed {seed}: pack {got} > oracle {best}"));
        }
        tight += usize::from(got == best);
    }
    Ok(format!("pack <= oracle on 200 instances ({tight} matched the optimum)"))
}

fn deletion_calibration() -> Verdict {
    const DRAWS: u64 = 100_000;
    let g = gen_random(6, 40, 6, 1, 5).map_err(|e| e.to_string())?;
    let sched = make_practical_schedule(0.1, 40, 0.1, 4, 4).map_err(|e| e.to_string())?;
    let cfg = MonitorConfig { sample_size: Some(0), ..MonitorConfig::practical(40) };
    let used = vec![false; g.vertex_count()];
    let state = init_round(&g, &used, 1, &sched).map_err(|e| e.to_string())?;
    let p_r = sched.p_r(1);
    // The highest-degree vertices plus two isolated ones.
    let mut order: Vec<VertexId> = (0..g.vertex_count() as VertexId).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut tracked: Vec<VertexId> = order[..8].to_vec();
    tracked.extend(order.iter().rev().take(2));
    for &v in &tracked {
        let q = hit_probability(&g, state.lane(0), v, sched.p);
        if q > p_r {
            return Err(format!("tracked vertex {v} has q = {q} > p_r"));
        }
    }
    let mut hits = vec![0u64; tracked.len()];
    for attempt in 0..DRAWS {
        let out = run_iteration(&g, &used, &state, &sched, &cfg, 77, attempt).map_err(|e| e.to_string())?;
        let deleted = &out.sample.lanes[0].deleted;
        for (h, v) in hits.iter_mut().zip(&tracked) {
            *h += u64::from(deleted.contains(v));
        }
    }
    let tol = 3.0 * (p_r * (1.0 - p_r) / DRAWS as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (&h, &v) in hits.iter().zip(&tracked) {
        let freq = h as f64 / DRAWS as f64;
        worst = worst.max((freq - p_r).abs());
        if (freq - p_r).abs() > tol {
            return Err(format!("vertex {v}: frequency {freq:.5} vs p_r {p_r:.5} (tolerance {tol:.5})"));
        }
    }
    Ok(format!("{} vertices, p_r = {p_r:.5}, worst deviation {worst:.5} <= {tol:.5}", tracked.len()))
}

fn shrink_band() -> Verdict {
    let start = Instant::now();
    let (k, n) = (500, 2000);
    let params = RandomGraphParams { k, n, max_degree: 1600, local_degree: 2, target_edges: Some(k * n * 4) };
    let g = gen_random_with(params, 6).map_err(|e| e.to_string())?;
    let stats = g.stats();
    if stats.max_degree > 1600 || stats.local_degree > 2 {
        return Err(format!("generator broke caps: {stats:?}"));
    }
    let sched = make_practical_schedule(0.1, n, 0.02, 1, 5).map_err(|e| e.to_string())?;
    let cfg = MonitorConfig::practical(n);
    let used = vec![false; g.vertex_count()];
    let out = run_round(&g, &used, 1, &sched, &cfg, &SolvePolicy::practical(), 6).map_err(|f| f.error.to_string())?;
    let elapsed = start.elapsed();
    if out.trace.is_empty() {
        return Err("no iterations recorded".into());
    }
    if let Some(row) = out.trace.iter().find(|row| !row.shrink_band) {
        return Err(format!("iteration {} has fewer than 99% of sets inside the band", row.t));
    }
    if elapsed > Duration::from_secs(120) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} iterations, {} lanes, every iteration >= 99% inside, {elapsed:.1?}", out.trace.len(), out.transversals.len()))
}

fn moser_tardos_regime() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut resamples = 0;
    for seed in 0..100u64 {
        let k = rng.gen_range(3..=30);
        let delta = rng.gen_range(1..=4);
        let n = (2.0 * std::f64::consts::E * delta as f64).ceil() as usize;
        let g = gen_random(k, n, delta, delta, seed).map_err(|e| e.to_string())?;
        let cfg = LllConfig { seed, fallback: Fallback::None, max_resamples: Some(50 * k as u64) };
        let out = find_transversal(&g, &full_candidates(&g), &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        resamples += out.resamples;
    }
    Ok(format!("100 of 100 within budget, {resamples} resamples in total"))
}

fn schedule_algebra() -> Verdict {
    let clause = |eps: f64| -> Result<bool, String> {
        let sched = make_schedule(eps, 1_000_000_000).map_err(|e| e.to_string())?;
        let report = validate_observation(&sched);
        report.clause("ii").and_then(|c| c.passed).ok_or_else(|| "clause ii missing".into())
    };
    if !clause(0.005)? {
        return Err("clause ii fails at eps = 0.005".into());
    }
    if clause(0.1)? {
        return Err("clause ii passes at eps = 0.1".into());
    }
    let mut worst: f64 = 0.0;
    for eps in [0.005, 0.01, 0.05, 0.1, 0.2] {
        for n in [1_000usize, 100_000, 10_000_000, 1_000_000_000] {
            let sched = make_schedule(eps, n).map_err(|e| e.to_string())?;
            let closed = n as f64 * (1.0 - (1.0 - sched.p).powf(sched.r_star as f64));
            let rel = (sched.transversal_mass() - closed).abs() / closed;
            worst = worst.max(rel);
        }
    }
    if worst > 1e-9 {
        return Err(format!("final-count identity off by {worst:e}"));
    }
    Ok(format!("clause ii PASS at 0.005 and FAIL at 0.1; identity worst relative error {worst:.1e} over 20 pairs"))
}

fn reduction_pipeline() -> Verdict {
    let plan = plan_reduction(0.5, 0.1, 1000);
    if plan.j != 6 {
        return Err(format!("j = {}", plan.j));
    }
    let d1 = halving_sequence(100.0, 1)[1];
    if (d1 - 71.544).abs() > 1e-3 || (d1 - (50.0 + 100f64.powf(2.0 / 3.0))).abs() > 1e-6 {
        return Err(format!("Delta_1 = {d1}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut transversals = 0;
    for seed in 0..50u64 {
        let k = rng.gen_range(2..=6);
        let n = rng.gen_range(8..=64);
        let local = rng.gen_range(1..=4);
        let g = gen_random(k, n, local * (k - 1), local, seed).map_err(|e| e.to_string())?;
        let out = reduce_and_pack(&g, 0.5, 0.25, &ReduceConfig::desk(), seed);
        verify_packing(&g, &out.packing).map_err(|v| format!("seed {seed}: {v:?}"))?;
        transversals += out.packing.len();
    }
    Ok(format!("j = 6, Delta_1 = {d1:.6}; 50 reduced packings valid ({transversals} transversals)"))
}

fn applications() -> Verdict {
    let cfg = AppConfig::default();
    for k in 2..=5 {
        for n in 1..=5 {
            let g = gen_complete_multipartite(k, n);
            let out = clique_pack(&g, 0.5, 0.5, &cfg, (k * 10 + n) as u64);
            if out.packing.cliques.len() != n {
                return Err(format!("k={k} n={n}: {} cliques", out.packing.cliques.len()));
            }
        }
    }
    let la = ListAssignment::new(2, vec![(0, 1)], vec![vec![1, 2], vec![1, 2]]).map_err(|e| e.to_string())?;
    let colorings = pack_list_colorings(&la, 0.5, &cfg, 0);
    if colorings.packing.colorings.len() != 2 || !colorings.packing.verify(&la) {
        return Err(format!("single edge: {:?}", colorings.packing));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(0.4)).collect();
        let lists = (0..n)
            .map(|_| {
                let len = rng.gen_range(1..=5);
                (0..len).map(|_| rng.gen_range(0..8u64)).collect()
            })
            .collect();
        let la = ListAssignment::new(n, edges, lists).map_err(|e| e.to_string())?;
        let (gamma, _) = build_list_coloring_graph(&la);
        if gamma.stats().local_degree > 1 {
            return Err(format!("conflict graph local degree {}", gamma.stats().local_degree));
        }
    }
    Ok("n cliques for k = 2..5, n = 1..5; 2 colorings of the single edge; 100 conflict graphs with local degree <= 1".into())
}

fn determinism() -> Verdict {
    let g = gen_random(12, 60, 8, 2, 11).map_err(|e| e.to_string())?;
    let direct: Vec<String> = [1, 2, 8]
        .iter()
        .map(|&w| serde_json::to_string(&pack_practical(&g, 0.2, 11, w).packing.to_rows()).unwrap())
        .collect();
    let reduced: Vec<String> = [1, 2, 8]
        .iter()
        .map(|&w| {
            let mut cfg = ReduceConfig::desk();
            cfg.policy.workers = w;
            serde_json::to_string(&reduce_and_pack(&g, 0.5, 0.25, &cfg, 11).packing.to_rows()).unwrap()
        })
        .collect();
    for out in [&direct, &reduced] {
        if out.iter().any(|s| s != &out[0]) {
            return Err("outputs differ across worker counts".into());
        }
    }
    Ok(format!("pack and reduce-pack byte-identical across 1, 2 and 8 workers ({} bytes)", direct[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("validity fuzzing", validity_fuzzing),
        ("edge-free completeness", edge_free_completeness),
        ("extremal nonexistence", extremal_nonexistence),
        ("oracle upper bound", oracle_upper_bound),
        ("deletion calibration", deletion_calibration),
        ("shrink band", shrink_band),
        ("Moser-Tardos regime", moser_tardos_regime),
        ("schedule algebra", schedule_algebra),
        ("reduction pipeline", reduction_pipeline),
        ("applications", applications),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.1?}]", i + 1, start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{:.1?}]", i + 1, start.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
