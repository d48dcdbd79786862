use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;

use monotile::graph::{ColouredCompleteGraph, Generator};
use monotile::oracle::{exact_min_tiling, exact_sweep, Enumerator, SweepRow, DEFAULT_ORACLE_BUDGET, SWEEP_CSV_HEADER};
use monotile::params::PipelineParams;
use monotile::pipeline::{tile, TilingDocument};
use monotile::sequence::SequenceSpec;
use monotile::tiling::{verify_tiling, Tiling};

mod args;
mod bench;

use args::{Cli, Command, EnumKind, Format, GenKind, InstanceArgs};

const OUT_DIR_ENV: &str = "MONOTILE_OUT_DIR";

/// Sidecar written next to every file output.
#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    argv: Vec<String>,
    params_digest: Option<String>,
    seed: Option<u64>,
    wall_time_ms: u128,
    outputs: Vec<String>,
    metrics: serde_json::Value,
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn resolve(out: Option<PathBuf>, default_name: &str) -> Result<Self> {
        let path = match out {
            Some(p) => Some(p),
            None => match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", Path::new(&dir).display()))?;
                    Some(Path::new(&dir).join(default_name))
                }
                None => None,
            },
        };
        Ok(Output { path })
    }

    fn write(&self, content: &str) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, content).with_context(|| format!("writing {}", p.display())),
            None => {
                std::io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }

    fn record(&self, command: &str, start: Instant, digest: Option<String>, seed: Option<u64>, metrics: serde_json::Value) -> Result<()> {
        let Some(p) = &self.path else { return Ok(()) };
        let rec = RunRecord {
            command,
            argv: std::env::args().collect(),
            params_digest: digest,
            seed,
            wall_time_ms: start.elapsed().as_millis(),
            outputs: vec![p.display().to_string()],
            metrics,
        };
        let mut side = p.clone().into_os_string();
        side.push(".run.json");
        std::fs::write(&side, serde_json::to_string_pretty(&rec)? + "\n")?;
        Ok(())
    }
}

pub fn parse_spec(s: &str, delta: Option<usize>) -> Result<SequenceSpec> {
    match (s.parse::<SequenceSpec>(), delta) {
        (Ok(spec), _) => Ok(spec),
        (Err(_), Some(d)) if !s.contains("D=") => Ok(format!("{s}:D={d}").parse()?),
        (Err(e), _) => Err(e.into()),
    }
}

fn generator(kind: GenKind) -> Generator {
    match kind {
        GenKind::Uniform => Generator::UniformRandom,
        GenKind::Single => Generator::SingleColour,
    }
}

fn load_instance(a: &InstanceArgs, seed: u64) -> Result<ColouredCompleteGraph> {
    match (&a.input, a.n) {
        (Some(p), None) => ColouredCompleteGraph::read(p).with_context(|| format!("reading {}", p.display())),
        (None, Some(n)) => Ok(ColouredCompleteGraph::generate(&generator(a.generator), n, a.r, seed)?),
        (Some(_), Some(_)) => bail!(Usage("pass either --input or --n, not both".into())),
        (None, None) => bail!(Usage("pass --input <colouring> or --n <vertices>".into())),
    }
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn run(cli: Cli) -> Result<ExitCode> {
    let start = Instant::now();
    match cli.command {
        Command::Gen(a) => {
            let g = ColouredCompleteGraph::generate(&generator(a.generator), a.n, a.r, a.seed)?;
            let (text, ext) = match a.format {
                Format::Text => (g.to_text(), "txt"),
                Format::Json => (serde_json::to_string(&g.to_json())? + "\n", "json"),
            };
            let out = Output::resolve(a.out, &format!("colouring-n{}-r{}-s{}.{ext}", a.n, a.r, a.seed))?;
            out.write(&text)?;
            out.record("gen", start, None, Some(a.seed), serde_json::json!({ "digest": g.digest() }))?;
        }
        Command::Tile(a) => {
            let g = load_instance(&a.instance, a.seed)?;
            let spec = parse_spec(&a.spec, a.delta)?;
            let mut params = PipelineParams::new(a.mode, g.r(), spec.delta, a.seed);
            if let Some(b) = a.budget {
                params.search_budget = b;
            }
            let res = tile(&g, &spec, &params);
            let doc = TilingDocument::new(&g, &spec, &res);
            let out = Output::resolve(a.out, &format!("tiling-{}-s{}.json", g.digest(), a.seed))?;
            out.write(&(doc.to_json() + "\n"))?;
            eprintln!(
                "tiled n = {} with {} tiles ({}, greedy {})",
                g.n(),
                res.metrics.size,
                res.metrics.path,
                res.metrics.greedy_size
            );
            out.record("tile", start, Some(params.digest()), Some(a.seed), serde_json::to_value(&res.metrics)?)?;
        }
        Command::Verify(a) => {
            let g = ColouredCompleteGraph::read(&a.colouring).with_context(|| format!("reading {}", a.colouring.display()))?;
            let text = std::fs::read_to_string(&a.tiling).with_context(|| format!("reading {}", a.tiling.display()))?;
            let (tiling, spec) = match TilingDocument::from_json(&text) {
                Ok(doc) => {
                    if doc.n != g.n() {
                        eprintln!("tiling is for n = {}, colouring has n = {}", doc.n, g.n());
                        return Ok(ExitCode::from(1));
                    }
                    let spec = match &a.spec {
                        Some(s) => parse_spec(s, a.delta)?,
                        None => doc.spec,
                    };
                    (doc.tiling(), spec)
                }
                Err(_) => {
                    let tiling: Tiling = serde_json::from_str(&text).context("tiling file is neither a tiling document nor a tile list")?;
                    let Some(s) = &a.spec else { bail!(Usage("a bare tile list needs --spec".into())) };
                    (tiling, parse_spec(s, a.delta)?)
                }
            };
            let report = verify_tiling(&g, &spec, &tiling);
            if report.pass() {
                println!("pass: {} tiles cover all {} vertices", tiling.len(), g.n());
            } else {
                println!("fail: {} violations", report.violations.len());
                println!("{}", serde_json::to_string_pretty(&report)?);
                return Ok(ExitCode::from(1));
            }
        }
        Command::Oracle(a) => {
            let spec = parse_spec(&a.spec, a.delta)?;
            let budget = a.budget.unwrap_or(DEFAULT_ORACLE_BUDGET);
            let rows: Vec<SweepRow> = match a.sweep {
                Some(n_max) => {
                    let e = match a.enumerate {
                        EnumKind::All => Enumerator::All,
                        EnumKind::Sampled => Enumerator::Sampled { per_n: a.samples, seed: a.seed },
                        EnumKind::Single => Enumerator::SingleColour,
                    };
                    exact_sweep(n_max, a.instance.r, &spec, &e, budget)?
                }
                None => {
                    let g = load_instance(&a.instance, a.seed)?;
                    let o = exact_min_tiling(&g, &spec, budget)?;
                    vec![SweepRow {
                        instance_digest: o.digest,
                        n: g.n(),
                        r: g.r(),
                        spec: spec.to_string(),
                        min_size: o.min_size,
                        optimal: o.optimal,
                    }]
                }
            };
            let mut csv = String::from(SWEEP_CSV_HEADER);
            csv.push('\n');
            for r in &rows {
                csv.push_str(&r.csv_line());
                csv.push('\n');
            }
            let out = Output::resolve(a.out, "oracle.csv")?;
            out.write(&csv)?;
            out.record("oracle", start, None, Some(a.seed), serde_json::json!({ "rows": rows.len() }))?;
        }
        Command::Bench(a) => {
            let spec = parse_spec(&a.spec, a.delta.as_ref().and_then(|d| d.values(1).first().copied()))?;
            let rows = bench::run(&a, &spec)?;
            let out = Output::resolve(a.out, "bench.csv")?;
            out.write(&bench::to_csv(&rows)?)?;
            let over = rows.iter().filter(|r| r.size as f64 > r.greedy_bound).count();
            out.record("bench", start, None, None, serde_json::json!({ "rows": rows.len(), "above_bound": over }))?;
        }
        Command::PlotData(a) => {
            let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let out = Output::resolve(a.out, "plot-data.csv")?;
            out.write(&bench::plot_data(&text)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
