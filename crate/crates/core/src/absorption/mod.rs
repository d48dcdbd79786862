//! Absorbers: good subgraphs, switching, and the constructions that find them.

pub mod chains;
pub mod good_sets;
pub mod good_subgraph;
pub mod switching;
pub mod witness;

pub use chains::{ChainCheck, ChainRelation};
pub use good_sets::{find_many_good_sets, find_one_good_set, GoodSet, GoodSetOptions, ManyGoodSets};
pub use good_subgraph::{find_good_subgraph, GoodSubgraph, GoodSubgraphParams, WCertificate};
pub use switching::{absorb, switch_matching, AbsorbOptions, SwitchOptions, SwitchOutcome, SwitchRelation};
pub use witness::{verify_good, GoodFailure, GoodReport, GoodSubgraphWitness};

/// Maximum bipartite matching by augmenting paths; `adj[i]` lists the right
/// vertices available to left vertex `i`. Returns the partner of each left vertex.
pub(crate) fn max_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    for i in 0..adj.len() {
        let mut seen = vec![false; right];
        augment(i, adj, &mut seen, &mut owner);
    }
    let mut partner = vec![None; adj.len()];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            partner[*i] = Some(j);
        }
    }
    partner
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_uses_augmenting_paths() {
        // Greedy would match 0 to 0 and strand 1.
        let adj = vec![vec![0, 1], vec![0]];
        assert_eq!(max_matching(&adj, 2), vec![Some(1), Some(0)]);
        let adj = vec![vec![0], vec![0]];
        assert_eq!(max_matching(&adj, 1).iter().flatten().count(), 1);
    }
}
