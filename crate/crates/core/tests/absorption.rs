use monotile::absorption::{absorb, find_good_subgraph, verify_good, AbsorbOptions, GoodSubgraphParams};
use monotile::graph::ColouredCompleteGraph;
use monotile::rng;
use monotile::sequence::SequenceSpec;
use monotile::tiling::verify_cover;
use monotile::vertex_set::VertexSet;
use rand::seq::SliceRandom;
use rand::Rng;

/// Colour 0 with probability `p_red`, else colour 1.
fn mostly_red(n: usize, p_red: f64, seed: u64) -> ColouredCompleteGraph {
    let mut rng = rng::substream(seed, "test/mostly-red");
    ColouredCompleteGraph::from_fn(n, 2, |_, _| u8::from(!rng.gen_bool(p_red))).unwrap()
}

fn run(n: usize, p_red: f64, seed: u64) {
    let g = mostly_red(n, p_red, seed);
    let split = 2 * n / 5;
    let u = VertexSet::range(n, 0, split);
    let v = VertexSet::range(n, split, n);
    let w = v.clone();
    let spec = SequenceSpec::random(2, seed);
    let params = GoodSubgraphParams::practical(2, 2, 0);
    let res = find_good_subgraph(&g, &u, &v, &w, &params, &spec, seed).unwrap();
    let report = verify_good(&g, &res.witness);
    assert!(report.pass, "n={n} p={p_red}: {report:?}");

    let xy = res.vertex_set(n);
    let mut pool: Vec<usize> = res.certified(n).difference(&xy).to_vec();
    pool.shuffle(&mut rng::substream(seed, "test/z"));
    pool.truncate(res.witness.y.len() / 2);
    let z = VertexSet::from_iter_in(n, pool);
    let out = absorb(&g, &res.witness, &z, &AbsorbOptions::default()).unwrap();
    let target = xy.union(&z);
    assert!(verify_cover(&g, &spec, &out.tiling, &target).pass());
}

#[test]
fn all_red_hosts_absorb() {
    for (i, n) in [100, 200, 300].into_iter().enumerate() {
        run(n, 1.0, i as u64);
    }
}

#[test]
fn ninety_percent_red_hosts_absorb() {
    for (i, n) in [100, 200, 300].into_iter().enumerate() {
        run(n, 0.9, 10 + i as u64);
    }
}
