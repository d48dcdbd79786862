//! End-to-end tiler: the absorber ladder, its callbacks, and the greedy fallback.

use serde::{Deserialize, Serialize};

use super::ladder::{iterated_absorbers, AbsorberLadder};
use crate::cover::{greedy_cover, CoverStrategy};
use crate::error::Result;
use crate::graph::ColouredCompleteGraph;
use crate::params::{Mode, PipelineParams};
use crate::search::SearchConfig;
use crate::sequence::SequenceSpec;
use crate::tiling::{verify_tiling, Embedding, Tiling};
use crate::vertex_set::VertexSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageStatus {
    Ran,
    Escaped,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileMetrics {
    pub size: usize,
    pub mode: Mode,
    /// Which tiling was returned: `pipeline` or `greedy`.
    pub path: String,
    pub pipeline_size: Option<usize>,
    pub greedy_size: usize,
    pub levels: usize,
    pub absorbed: usize,
    pub stages: Vec<StageRecord>,
    pub seed: u64,
    pub params_digest: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TileResult {
    pub tiling: Tiling,
    pub metrics: TileMetrics,
    pub ladder: Option<AbsorberLadder>,
}

struct Stages(Vec<StageRecord>);

impl Stages {
    fn push(&mut self, name: impl Into<String>, status: StageStatus, detail: Option<String>) {
        self.0.push(StageRecord { name: name.into(), status, detail });
    }
}

/// Tiles the ladder: `Z_i = T_i \ (T_{i+1} ∪ D)` goes to level `i`, the terminal set to the greedy cover.
fn tile_ladder(
    g: &ColouredCompleteGraph,
    spec: &SequenceSpec,
    ladder: &AbsorberLadder,
    cfg: &SearchConfig,
    stages: &mut Stages,
) -> Result<(Tiling, usize)> {
    let n = g.n();
    let d_all = ladder.d_union(n);
    let mut tiling = Tiling::new();
    let mut absorbed = 0;
    for (i, level) in ladder.levels.iter().enumerate() {
        let name = format!("level {}", i + 1);
        let z = ladder.t[i].difference(&ladder.t[i + 1]).difference(&d_all);
        if level.escaped {
            stages.push(name.clone(), StageStatus::Escaped, Some(format!("|A| = {}", level.stats.a)));
        }
        match level.absorber.absorb(g, &z) {
            Ok((t, report)) => {
                if !level.escaped {
                    let detail = if level.absorber.escaped {
                        Some(format!("no absorber, |U| = {}", level.stats.u))
                    } else {
                        (!report.greedy_colours.is_empty())
                            .then(|| format!("greedy for colours {:?}", report.greedy_colours))
                    };
                    stages.push(name, StageStatus::Ran, detail);
                }
                absorbed += report.moved;
                tiling.extend(t);
            }
            Err(e) => {
                stages.push(name, StageStatus::Failed, Some(e.to_string()));
                let set = level.absorber.d.union(&z);
                tiling.extend(greedy_cover(g, &set, 1.0, spec, CoverStrategy::LargestFirst, cfg)?.tiling);
            }
        }
    }
    let rest = ladder.terminal().difference(&d_all);
    tiling.extend(greedy_cover(g, &rest, 1.0, spec, CoverStrategy::LargestFirst, cfg)?.tiling);
    Ok((tiling, absorbed))
}

/// Always returns a verified tiling: the ladder's when it is no larger than a
/// direct greedy cover, the greedy cover otherwise.
pub fn tile(g: &ColouredCompleteGraph, spec: &SequenceSpec, params: &PipelineParams) -> TileResult {
    let n = g.n();
    let cfg = SearchConfig::with_budget(params.search_budget);
    let mut stages = Stages(Vec::new());
    let mut ladder = None;
    let mut pipeline: Option<(Tiling, usize)> = None;

    match iterated_absorbers(g, params, spec, params.seed) {
        Ok(l) => {
            let detail = format!("{} levels, terminal {}", l.len(), l.terminal().len());
            let status = if l.fallback { StageStatus::Failed } else { StageStatus::Ran };
            stages.push("ladder", status, Some(l.failure.clone().unwrap_or(detail)));
            match tile_ladder(g, spec, &l, &cfg, &mut stages) {
                Ok((t, absorbed)) => {
                    if verify_tiling(g, spec, &t).pass() {
                        pipeline = Some((t, absorbed));
                    } else {
                        stages.push("pipeline verify", StageStatus::Failed, None);
                    }
                }
                Err(e) => stages.push("pipeline", StageStatus::Failed, Some(e.to_string())),
            }
            ladder = Some(l);
        }
        Err(e) => stages.push("ladder", StageStatus::Failed, Some(e.to_string())),
    }

    let all = VertexSet::full(n);
    let greedy = greedy_cover(g, &all, 1.0, spec, CoverStrategy::LargestFirst, &cfg)
        .expect("greedy cover with t = 1 always succeeds")
        .tiling;
    stages.push("greedy", StageStatus::Ran, None);

    let pipeline_size = pipeline.as_ref().map(|(t, _)| t.len());
    let (mut tiling, path, absorbed) = match pipeline {
        Some((t, absorbed)) if t.len() <= greedy.len() => (t, "pipeline", absorbed),
        _ => (greedy.clone(), "greedy", 0),
    };
    tiling.canonicalize();
    let report = verify_tiling(g, spec, &tiling);
    assert!(report.pass(), "tile() produced an invalid tiling: {:?}", report.violations);
    TileResult {
        metrics: TileMetrics {
            size: tiling.len(),
            mode: params.mode,
            path: path.into(),
            pipeline_size,
            greedy_size: greedy.len(),
            levels: ladder.as_ref().map_or(0, |l| l.len()),
            absorbed,
            stages: stages.0,
            seed: params.seed,
            params_digest: params.digest(),
        },
        tiling,
        ladder,
    }
}

/// Serialized tiling with its metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingDocument {
    pub n: usize,
    pub r: usize,
    pub spec: SequenceSpec,
    pub tiles: Vec<Embedding>,
    pub metrics: DocumentMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentMetrics {
    pub size: usize,
    pub stages: Vec<StageRecord>,
    pub seed: u64,
    pub params_digest: String,
    #[serde(default)]
    pub path: String,
    #[serde(default)]
    pub greedy_size: usize,
}

impl TilingDocument {
    pub fn new(g: &ColouredCompleteGraph, spec: &SequenceSpec, res: &TileResult) -> Self {
        TilingDocument {
            n: g.n(),
            r: g.r(),
            spec: *spec,
            tiles: res.tiling.tiles.clone(),
            metrics: DocumentMetrics {
                size: res.metrics.size,
                stages: res.metrics.stages.clone(),
                seed: res.metrics.seed,
                params_digest: res.metrics.params_digest.clone(),
                path: res.metrics.path.clone(),
                greedy_size: res.metrics.greedy_size,
            },
        }
    }

    pub fn tiling(&self) -> Tiling {
        Tiling { tiles: self.tiles.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tiling document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
