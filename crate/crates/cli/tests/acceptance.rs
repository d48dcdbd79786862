//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use monotile::absorption::{absorb, find_good_subgraph, verify_good, AbsorbOptions, GoodSubgraphParams};
use monotile::bipartite::BipartiteGraph;
use monotile::cover::{find_mono_copy, greedy_bound, greedy_cover, CoverStrategy};
use monotile::drc::{chernoff_lower_tail, dependent_random_choice, DrcParams};
use monotile::graph::{ColouredCompleteGraph, Generator};
use monotile::hypergraph::{embed_hypergraph, ExplicitHypergraph, RichSetOracle, DownClosed};
use monotile::oracle::exact_min_tiling;
use monotile::params::{Mode, PipelineParams};
use monotile::pipeline::tile;
use monotile::rng;
use monotile::search::SearchConfig;
use monotile::sequence::{member, DerivedMultiHypergraph, SequenceSpec};
use monotile::tiling::{verify_cover, verify_tiling};
use monotile::vertex_set::VertexSet;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: usize, detail: String) -> Outcome {
    Outcome { pass: failures == 0, detail }
}

/// Uniform, biased towards one colour, or a random block pattern.
fn host(n: usize, r: usize, seed: u64) -> ColouredCompleteGraph {
    let mut rng = rng::substream(seed, "acceptance/host");
    match seed % 3 {
        0 => ColouredCompleteGraph::generate(&Generator::UniformRandom, n, r, seed).unwrap(),
        1 => {
            let p = rng.gen_range(0.5..0.95);
            ColouredCompleteGraph::from_fn(n, r, |_, _| if rng.gen_bool(p) { 0 } else { rng.gen_range(1..r) as u8 }).unwrap()
        }
        _ => {
            let blocks = rng.gen_range(2..=4).min(n.max(1));
            let mut sizes = vec![n / blocks; blocks];
            sizes[0] += n - sizes.iter().sum::<usize>();
            let mut matrix = vec![vec![0u8; blocks]; blocks];
            for i in 0..blocks {
                for j in i..blocks {
                    let c = rng.gen_range(0..r) as u8;
                    matrix[i][j] = c;
                    matrix[j][i] = c;
                }
            }
            ColouredCompleteGraph::generate(&Generator::Blocks { sizes, matrix }, n, r, seed).unwrap()
        }
    }
}

struct Instance {
    n: usize,
    r: usize,
    spec: SequenceSpec,
    seed: u64,
}

fn instances() -> Vec<Instance> {
    let mut rng = rng::substream(2024, "acceptance/instances");
    (0..1000u64)
        .map(|seed| {
            let n = rng.gen_range(1..=400);
            let r = rng.gen_range(2..=3);
            let spec = match rng.gen_range(0..3) {
                0 => SequenceSpec::path(),
                1 => SequenceSpec::matching(),
                _ => SequenceSpec::random(rng.gen_range(1..=3), seed),
            };
            Instance { n, r, spec, seed }
        })
        .collect()
}

fn tiling_validity() -> Outcome {
    let (failures, absorbed): (usize, usize) = instances()
        .par_iter()
        .map(|i| {
            let g = host(i.n, i.r, i.seed);
            let res = tile(&g, &i.spec, &PipelineParams::new(Mode::Practical, i.r, i.spec.delta, i.seed));
            let built = res.ladder.as_ref().is_some_and(|l| l.levels.iter().any(|s| !s.absorber.d.is_empty()));
            (usize::from(!verify_tiling(&g, &i.spec, &res.tiling).pass()), usize::from(built))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    outcome(
        failures,
        format!("1000 instances, n in 1..=400, r in {{2,3}}, {failures} invalid, {absorbed} built absorbers"),
    )
}

fn greedy_bound_holds() -> Outcome {
    let cfg = SearchConfig::default();
    let (over, residual): (usize, usize) = instances()
        .par_iter()
        .map(|i| {
            let g = host(i.n, i.r, i.seed);
            let all = g.all_vertices();
            let full = greedy_cover(&g, &all, 1.0, &i.spec, CoverStrategy::LargestFirst, &cfg).unwrap();
            let mut over = usize::from(full.tiling.len() as f64 > greedy_bound(i.spec.delta, i.r, i.n, 1.0));
            let t = 1.5 + (i.n / 8) as f64;
            let part = greedy_cover(&g, &all, t, &i.spec, CoverStrategy::Threshold, &cfg).unwrap();
            over += usize::from(part.tiling.len() as f64 > greedy_bound(i.spec.delta, i.r, i.n, t));
            let bad_residual = usize::from(part.residual.len() as f64 >= t)
                + usize::from(!verify_cover(&g, &i.spec, &part.tiling, &all.difference(&part.residual)).pass());
            (over, bad_residual)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    outcome(over + residual, format!("2000 covers, {over} above 64Δr^Δ(ln(n/t)+2), {residual} with residual ≥ t"))
}

fn ramsey_guarantee() -> Outcome {
    let spec = SequenceSpec::matching();
    let cfg = SearchConfig::default();
    let mut failures = 0;
    for k in 1..=2usize {
        let size = (32.0 * 1.0 * 2f64.powi(1) * k as f64).ceil() as usize;
        failures += (0..200u64)
            .into_par_iter()
            .filter(|&seed| {
                let g = host(size + 40, 2, seed);
                let mut pool: Vec<usize> = (0..g.n()).collect();
                pool.shuffle(&mut rng::substream(seed, "acceptance/ramsey"));
                let s = VertexSet::from_iter_in(g.n(), pool.into_iter().take(size));
                match find_mono_copy(&g, &s, k, &spec, &cfg) {
                    Ok(e) => {
                        let inside = e.vertices.iter().all(|&v| s.contains(v));
                        !(inside && e.check(&g, &member(&spec, k).unwrap()).is_ok())
                    }
                    Err(_) => true,
                }
            })
            .count();
    }
    outcome(failures, format!("k in {{1,2}}, |S| = 64k, 400 colourings, {failures} failures"))
}

fn drc_contracts() -> Outcome {
    let results: Vec<(bool, usize)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng::substream(seed, "acceptance/drc");
            let (a, b) = (rng.gen_range(30..=60), rng.gen_range(30..=60));
            let h = BipartiteGraph::random(a, b, rng.gen_range(0.5..0.8), seed);
            let (k, t) = (2usize, 2usize);
            let eps = h.density() * (1.0 - 1e-9);
            let gamma = 0.2 * eps * eps;
            // δε^{kt} = 4γ^t: twice the admissibility requirement.
            let delta = (4.0 * gamma.powi(t as i32) / eps.powi((k * t) as i32)) * (1.0 + 1e-9);
            let p = DrcParams { k, t, epsilon: eps, delta, gamma, max_retries: 64, seed };
            let Ok(res) = dependent_random_choice(&h, &p) else { return (false, 64) };
            let members = res.s.to_vec();
            let mut bad = 0usize;
            for (x, &i) in members.iter().enumerate() {
                for &j in &members[x + 1..] {
                    let common = (0..b).filter(|&y| h.has_edge(i, y) && h.has_edge(j, y)).count();
                    bad += usize::from((common as f64) < gamma * b as f64);
                }
            }
            let ok = members.len() as f64 >= 0.5 * eps.powi(t as i32) * a as f64
                && bad as f64 <= delta * (members.len() as f64).powi(k as i32)
                && bad as u64 == res.bad_k_set_count;
            (ok, res.retries_used)
        })
        .collect();
    let failures = results.iter().filter(|r| !r.0).count();
    let mean = results.iter().map(|r| r.1).sum::<usize>() as f64 / results.len() as f64;
    let over = usize::from(mean > 2.0);
    outcome(failures + over, format!("100 instances, {failures} contract violations, mean retries {mean:.2}"))
}

fn labelled_embeddings<G: DownClosed>(g: &G, h: &DerivedMultiHypergraph) -> u64 {
    fn rec<G: DownClosed>(g: &G, h: &DerivedMultiHypergraph, map: &mut Vec<usize>, used: &mut Vec<bool>) -> u64 {
        if map.len() == h.vertex_count() {
            let ok = h.edges.iter().all(|e| {
                let mut img: Vec<usize> = e.iter().map(|&x| map[x]).collect();
                img.sort_unstable();
                img.dedup();
                g.is_edge(&img)
            });
            return u64::from(ok);
        }
        let mut total = 0;
        for v in 0..g.vertex_count() {
            if !used[v] {
                used[v] = true;
                map.push(v);
                total += rec(g, h, map, used);
                map.pop();
                used[v] = false;
            }
        }
        total
    }
    rec(g, h, &mut Vec::new(), &mut vec![false; g.vertex_count()])
}

fn embedding_count() -> Outcome {
    let d = 2usize;
    let rows: Vec<bool> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng::substream(seed, "acceptance/embed");
            let n = rng.gen_range(8..=10);
            let m = rng.gen_range(2..=4).min(n / 2);
            let pairs = n * (n - 1) / 2;
            // Fewer than C(n,2)/16 missing pairs keeps λ below 1/(2Δ).
            let missing_count = rng.gen_range(0..=(pairs - 1) / 16);
            let mut all: Vec<Vec<usize>> = (0..n).flat_map(|u| (u + 1..n).map(move |v| vec![u, v])).collect();
            all.shuffle(&mut rng);
            let missing: Vec<Vec<usize>> = all.into_iter().take(missing_count).collect();
            let g = ExplicitHypergraph::complete_minus(n, d, &missing);
            // Hyperedges of size ≤ 2, every vertex in at most 2 of them.
            let mut deg = vec![0usize; m];
            let mut edges = Vec::new();
            for _ in 0..2 * m {
                let size = rng.gen_range(1..=2);
                let mut e: Vec<usize> = rand::seq::index::sample(&mut rng, m, size.min(m)).into_vec();
                e.sort_unstable();
                if e.iter().all(|&x| deg[x] < d) {
                    e.iter().for_each(|&x| deg[x] += 1);
                    edges.push(e);
                }
            }
            let h = DerivedMultiHypergraph::from_edges(m, edges);
            // Smallest λ with more than (1 − λ^Δ)C(n,Δ) edges.
            let lambda = ((missing_count as f64 + 1e-6) / pairs as f64).sqrt().max(1e-6);
            let bound = (1.0 - 2.0 * d as f64 * lambda).powi(m as i32) * (0..m).map(|i| (n - i) as f64).product::<f64>();
            let count = labelled_embeddings(&g, &h);
            let mut oracle = RichSetOracle::new(&g, lambda, seed);
            let greedy_ok = embed_hypergraph(&h, &mut oracle, seed).is_ok();
            count as f64 >= bound && greedy_ok
        })
        .collect();
    let failures = rows.iter().filter(|ok| !**ok).count();
    outcome(failures, format!("50 hypergraphs, n ≤ 10, m ≤ 4, Δ = 2, {failures} below (1−2Δλ)^m n!/(n−m)!"))
}

fn block_ok(g: &ColouredCompleteGraph, spec: &SequenceSpec, block: &[usize]) -> bool {
    let f = member(spec, block.len()).unwrap();
    if f.edge_count() == 0 {
        return true;
    }
    let mut perm = block.to_vec();
    perm.sort_unstable();
    loop {
        let (a, b) = f.edges()[0];
        let c = g.colour_of(perm[a], perm[b]);
        if f.edges().iter().all(|&(a, b)| g.colour_of(perm[a], perm[b]) == c) {
            return true;
        }
        let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else { return false };
        let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// Whether `V` splits into at most `s` blocks that each carry a monochromatic member.
fn partition_within(g: &ColouredCompleteGraph, spec: &SequenceSpec, v: usize, blocks: &mut Vec<Vec<usize>>, s: usize) -> bool {
    if v == g.n() {
        return blocks.iter().all(|b| block_ok(g, spec, b));
    }
    for i in 0..blocks.len() {
        blocks[i].push(v);
        if partition_within(g, spec, v + 1, blocks, s) {
            return true;
        }
        blocks[i].pop();
    }
    if blocks.len() < s {
        blocks.push(vec![v]);
        if partition_within(g, spec, v + 1, blocks, s) {
            return true;
        }
        blocks.pop();
    }
    false
}

fn oracle_dominance() -> Outcome {
    let spec = SequenceSpec::path();
    let mut cases = Vec::new();
    for n in 1..=5usize {
        let pairs = n * (n - 1) / 2;
        for code in 0..1u64 << pairs {
            cases.push((n, code));
        }
    }
    let total = cases.len();
    let failures = cases
        .par_iter()
        .filter(|&&(n, code)| {
            let tri: Vec<u64> = (0..n * (n - 1) / 2).map(|i| code >> i & 1).collect();
            let g = ColouredCompleteGraph::from_upper_triangle(n, 2, &tri).unwrap();
            let o = exact_min_tiling(&g, &spec, 1_000_000).unwrap();
            let t = tile(&g, &spec, &PipelineParams::new(Mode::Practical, 2, 2, code));
            let below = o.min_size > 1 && partition_within(&g, &spec, 0, &mut Vec::new(), o.min_size - 1);
            !o.optimal || t.metrics.size < o.min_size || below || !verify_tiling(&g, &spec, &o.tiling).pass()
        })
        .count();
    outcome(failures, format!("all {total} 2-colourings of K_n, n ≤ 5, {failures} violations"))
}

fn absorption_end_to_end() -> Outcome {
    let mut cases = Vec::new();
    for n in [100usize, 150, 200, 250, 300] {
        for p in [1.0, 0.9] {
            for seed in 0..3u64 {
                cases.push((n, p, seed));
            }
        }
    }
    let total = cases.len();
    let failures = cases
        .par_iter()
        .filter(|&&(n, p, seed)| {
            let mut rng = rng::substream(seed, "acceptance/red");
            let g = ColouredCompleteGraph::from_fn(n, 2, |_, _| u8::from(!rng.gen_bool(p))).unwrap();
            let split = 2 * n / 5;
            let u = VertexSet::range(n, 0, split);
            let v = VertexSet::range(n, split, n);
            let spec = SequenceSpec::random(2, seed);
            let Ok(res) = find_good_subgraph(&g, &u, &v, &v, &GoodSubgraphParams::practical(2, 2, 0), &spec, seed) else {
                return true;
            };
            if !verify_good(&g, &res.witness).pass {
                return true;
            }
            let xy = res.vertex_set(n);
            let mut pool = res.certified(n).difference(&xy).to_vec();
            pool.shuffle(&mut rng::substream(seed, "acceptance/z"));
            pool.truncate(res.witness.y.len().max(2) / 2);
            let z = VertexSet::from_iter_in(n, pool);
            match absorb(&g, &res.witness, &z, &AbsorbOptions::default()) {
                Ok(out) => !verify_cover(&g, &spec, &out.tiling, &xy.union(&z)).pass(),
                Err(_) => true,
            }
        })
        .count();
    outcome(failures, format!("{total} hosts, all-red and 90% red, n in 100..=300, {failures} failures"))
}

fn chernoff_grid() -> Outcome {
    const SAMPLES: usize = 10_000;
    let mut failures = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for mu in [5.0f64, 10.0, 50.0] {
        for delta in [0.2, 0.5, 0.8] {
            let bound = chernoff_lower_tail(mu, delta).unwrap();
            let trials = (4.0 * mu) as usize;
            let mut rng = rng::substream((mu * 100.0 + delta * 10.0) as u64, "acceptance/chernoff");
            let hits = (0..SAMPLES)
                .filter(|_| {
                    let x = (0..trials).filter(|_| rng.gen_bool(0.25)).count() as f64;
                    x <= (1.0 - delta) * mu
                })
                .count();
            let freq = hits as f64 / SAMPLES as f64;
            let se = (bound * (1.0 - bound) / SAMPLES as f64).sqrt();
            worst = worst.max((freq - bound) / se.max(1e-12));
            failures += usize::from(freq > bound + 3.0 * se);
        }
    }
    outcome(failures, format!("9 grid points, 10^4 samples each, {failures} above bound + 3 SE (worst z {worst:.2})"))
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_monotile");
    let mut rng = rng::substream(7, "acceptance/repro");
    let mut failures = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=300).to_string();
        let r = rng.gen_range(2..=3).to_string();
        let spec = ["path", "matching", "random:2", "random:3"][rng.gen_range(0..4)];
        let run = || {
            Command::new(bin)
                .args(["tile", "--n", &n, "--r", &r, "--spec", spec, "--seed", "7"])
                .env_remove("MONOTILE_OUT_DIR")
                .output()
                .expect("binary runs")
        };
        let (a, b) = (run(), run());
        failures += usize::from(!a.status.success() || a.stdout.is_empty() || a.stdout != b.stdout);
    }
    outcome(failures, format!("20 instances tiled twice with --seed 7, {failures} differing outputs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("tiling validity", tiling_validity, Duration::from_secs(300)),
        ("greedy bound", greedy_bound_holds, Duration::MAX),
        ("ramsey guarantee", ramsey_guarantee, Duration::from_secs(30)),
        ("dependent random choice contracts", drc_contracts, Duration::MAX),
        ("embedding count", embedding_count, Duration::from_secs(60)),
        ("oracle dominance and exactness", oracle_dominance, Duration::MAX),
        ("absorption end-to-end", absorption_end_to_end, Duration::from_secs(180)),
        ("chernoff utility", chernoff_grid, Duration::MAX),
        ("reproducibility", reproducibility, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= limit;
        failed += usize::from(!pass);
        let late = if took > limit { " (over time limit)" } else { "" };
        println!("{} {name}: {} [{:.1}s]{late}", if pass { "PASS" } else { "FAIL" }, out.detail, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
