//! Benchmark sweeps and their plot-ready summaries.

use std::collections::BTreeMap;

use anyhow::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use monotile::cover::greedy_bound;
use monotile::graph::{ColouredCompleteGraph, Generator};
use monotile::params::PipelineParams;
use monotile::pipeline::tile;
use monotile::sequence::{Family, SequenceSpec};

use crate::args::BenchArgs;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub r: usize,
    pub delta: usize,
    pub spec: String,
    pub seed: u64,
    pub size: usize,
    /// `64Δr^Δ(ln n + 2)`.
    pub greedy_bound: f64,
    /// `exp(a + bΔ)` fitted to `ln size` over all rows with the same `r`.
    pub exp_fit: f64,
}

fn with_delta(spec: &SequenceSpec, delta: usize) -> SequenceSpec {
    match spec.family {
        Family::Path | Family::Matching => *spec,
        _ => SequenceSpec { delta, ..*spec },
    }
}

pub fn run(a: &BenchArgs, spec: &SequenceSpec) -> Result<Vec<BenchRow>> {
    let deltas = a.delta.as_ref().map_or(vec![spec.delta], |d| d.values(1));
    let mut jobs = Vec::new();
    for r in a.r.values(1) {
        for &d in &deltas {
            let spec = with_delta(spec, d);
            for n in a.n.values(a.step) {
                for seed in 0..a.seeds {
                    jobs.push((r, spec, n, seed));
                }
            }
        }
    }
    jobs.dedup();
    let mut rows = jobs
        .par_iter()
        .map(|&(r, spec, n, seed)| -> Result<BenchRow> {
            let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, n, r, seed)?;
            let mut params = PipelineParams::new(a.mode, r, spec.delta, seed);
            if let Some(b) = a.budget {
                params.search_budget = b;
            }
            let res = tile(&g, &spec, &params);
            Ok(BenchRow {
                n,
                r,
                delta: spec.delta,
                spec: spec.to_string(),
                seed,
                size: res.metrics.size,
                greedy_bound: greedy_bound(spec.delta, r, n.max(1), 1.0),
                exp_fit: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fit(&mut rows);
    Ok(rows)
}

/// Least squares of `ln size` against `Δ`, per `r`; a single `Δ` gives the geometric mean.
fn fit(rows: &mut [BenchRow]) {
    let mut by_r: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows.iter() {
        by_r.entry(row.r).or_default().push((row.delta as f64, (row.size.max(1) as f64).ln()));
    }
    let coef: BTreeMap<usize, (f64, f64)> = by_r
        .into_iter()
        .map(|(r, pts)| {
            let m = pts.len() as f64;
            let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            (r, (my - b * mx, b))
        })
        .collect();
    for row in rows.iter_mut() {
        let (a, b) = coef[&row.r];
        row.exp_fit = ((a + b * row.delta as f64).exp() * 1e4).round() / 1e4;
    }
}

pub fn to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct PlotRow {
    r: usize,
    delta: usize,
    spec: String,
    n: usize,
    runs: usize,
    mean_size: f64,
    max_size: usize,
    greedy_bound: f64,
    exp_fit: f64,
}

/// One row per `(r, Δ, spec, n)` with mean and max sizes next to both reference curves.
pub fn plot_data(bench_csv: &str) -> Result<String> {
    let mut rd = csv::Reader::from_reader(bench_csv.as_bytes());
    let mut groups: BTreeMap<(usize, usize, String, usize), Vec<BenchRow>> = BTreeMap::new();
    for row in rd.deserialize() {
        let row: BenchRow = row?;
        groups.entry((row.r, row.delta, row.spec.clone(), row.n)).or_default().push(row);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for ((r, delta, spec, n), rows) in groups {
        let sizes: Vec<usize> = rows.iter().map(|x| x.size).collect();
        w.serialize(PlotRow {
            r,
            delta,
            spec,
            n,
            runs: rows.len(),
            mean_size: sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
            max_size: *sizes.iter().max().unwrap_or(&0),
            greedy_bound: rows[0].greedy_bound,
            exp_fit: rows[0].exp_fit,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
