use monotile::graph::{ColouredCompleteGraph, Generator};
use monotile::oracle::{exact_min_tiling, exact_sweep, Enumerator};
use monotile::sequence::{member, SequenceSpec};
use monotile::tiling::verify_tiling;

/// Whether `block` carries a monochromatic copy of `F_|block|`, by trying every bijection.
fn block_ok(g: &ColouredCompleteGraph, spec: &SequenceSpec, block: &[usize]) -> bool {
    let f = member(spec, block.len()).unwrap();
    if f.edge_count() == 0 {
        return true;
    }
    let mut perm: Vec<usize> = block.to_vec();
    perm.sort_unstable();
    loop {
        let c = g.colour_of(perm[f.edges()[0].0], perm[f.edges()[0].1]);
        if f.edges().iter().all(|&(a, b)| g.colour_of(perm[a], perm[b]) == c) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Whether some partition of `0..n` into at most `s` valid blocks exists.
fn partition_within(g: &ColouredCompleteGraph, spec: &SequenceSpec, s: usize) -> bool {
    fn rec(g: &ColouredCompleteGraph, spec: &SequenceSpec, v: usize, blocks: &mut Vec<Vec<usize>>, s: usize) -> bool {
        if v == g.n() {
            return blocks.iter().all(|b| block_ok(g, spec, b));
        }
        for i in 0..blocks.len() {
            blocks[i].push(v);
            if rec(g, spec, v + 1, blocks, s) {
                return true;
            }
            blocks[i].pop();
        }
        if blocks.len() < s {
            blocks.push(vec![v]);
            if rec(g, spec, v + 1, blocks, s) {
                return true;
            }
            blocks.pop();
        }
        false
    }
    rec(g, spec, 0, &mut Vec::new(), s)
}

#[test]
fn red_matching_k4_fixture() {
    // Red perfect matching {01, 23}, everything else blue: the blue C_4 holds a P_4.
    let g = ColouredCompleteGraph::from_fn(4, 2, |u, v| u8::from(!matches!((u, v), (0, 1) | (2, 3)))).unwrap();
    let o = exact_min_tiling(&g, &SequenceSpec::path(), 100_000).unwrap();
    assert_eq!(o.min_size, 1);
    assert!(o.optimal);
    assert!(verify_tiling(&g, &SequenceSpec::path(), &o.tiling).pass());
}

#[test]
fn oracle_matches_brute_force_up_to_six() {
    for spec in [SequenceSpec::path(), SequenceSpec::matching(), SequenceSpec::random(2, 3)] {
        for n in 1..=6 {
            for seed in 0..6 {
                let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, n, 3, seed).unwrap();
                let o = exact_min_tiling(&g, &spec, 1_000_000).unwrap();
                assert!(o.optimal);
                assert_eq!(o.tiling.len(), o.min_size);
                assert!(verify_tiling(&g, &spec, &o.tiling).pass());
                assert!(partition_within(&g, &spec, o.min_size), "{spec} n={n} seed={seed}");
                assert!(!partition_within(&g, &spec, o.min_size - 1), "{spec} n={n} seed={seed}");
            }
        }
    }
}

#[test]
fn sweeps() {
    let spec = SequenceSpec::path();
    let one = exact_sweep(1, 2, &spec, &Enumerator::All, 1000).unwrap();
    assert!(one.iter().all(|r| r.min_size == 1));
    let mono = exact_sweep(6, 3, &spec, &Enumerator::SingleColour, 1000).unwrap();
    assert_eq!(mono.len(), 6);
    assert!(mono.iter().all(|r| r.min_size == 1));
    let k3 = exact_sweep(3, 2, &spec, &Enumerator::All, 1000).unwrap();
    assert_eq!(k3.iter().filter(|r| r.n == 3).map(|r| r.min_size).max(), Some(1));
    let sampled = exact_sweep(8, 2, &spec, &Enumerator::Sampled { per_n: 3, seed: 1 }, 100_000).unwrap();
    assert_eq!(sampled.len(), 24);
    assert_eq!(sampled, exact_sweep(8, 2, &spec, &Enumerator::Sampled { per_n: 3, seed: 1 }, 100_000).unwrap());
}

#[test]
fn full_enumeration_refuses_large_n() {
    assert!(exact_sweep(7, 2, &SequenceSpec::path(), &Enumerator::All, 1000).is_err());
}
