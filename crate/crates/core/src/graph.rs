//! Directed follower network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::AgentId;

/// `out_edges[i]` lists, in ascending order, the agents that `i` follows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowGraph {
    out_edges: Vec<Vec<AgentId>>,
}

impl FollowGraph {
    pub fn empty(n: usize) -> Self {
        FollowGraph {
            out_edges: vec![Vec::new(); n],
        }
    }

    /// Build from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (AgentId, AgentId)>) -> Result<Self> {
        let mut g = FollowGraph::empty(n);
        for (i, j) in edges {
            if i as usize >= n || j as usize >= n {
                return Err(Error::Invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Invalid(format!("self-loop on agent {i}")));
            }
            if !g.insert(i, j) {
                return Err(Error::Invalid(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(g)
    }

    /// Directed Erdős–Rényi graph: each ordered pair `(i, j)`, `i != j`, is an
    /// edge independently with probability `k_o / (n - 1)`.
    pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, k_o: f64, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("n", "need at least 2 agents"));
        }
        if !(k_o > 0.0 && k_o <= (n - 1) as f64) {
            return Err(Error::config("k_o", format!("must lie in (0, n-1], got {k_o}")));
        }
        let p = k_o / (n - 1) as f64;
        let mut out_edges = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..n {
                if i != j && rng.random::<f64>() < p {
                    row.push(j as AgentId);
                }
            }
            out_edges.push(row);
        }
        Ok(FollowGraph { out_edges })
    }

    pub fn n(&self) -> usize {
        self.out_edges.len()
    }

    #[inline]
    pub fn followees(&self, i: usize) -> &[AgentId] {
        &self.out_edges[i]
    }

    #[inline]
    pub fn out_degree(&self, i: usize) -> usize {
        self.out_edges[i].len()
    }

    #[inline]
    pub fn follows(&self, i: usize, j: AgentId) -> bool {
        self.out_edges[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i as AgentId, j)))
    }

    /// Follower lists, i.e. the transpose adjacency.
    pub fn in_edges(&self) -> Vec<Vec<AgentId>> {
        let mut inn = vec![Vec::new(); self.n()];
        for (i, j) in self.edges() {
            inn[j as usize].push(i);
        }
        inn
    }

    /// Returns false if the edge already existed.
    pub fn insert(&mut self, i: AgentId, j: AgentId) -> bool {
        let row = &mut self.out_edges[i as usize];
        match row.binary_search(&j) {
            Ok(_) => false,
            Err(pos) => {
                row.insert(pos, j);
                true
            }
        }
    }

    /// Returns false if the edge was absent.
    pub fn remove(&mut self, i: AgentId, j: AgentId) -> bool {
        let row = &mut self.out_edges[i as usize];
        match row.binary_search(&j) {
            Ok(pos) => {
                row.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// Replace `i -> unfollow` by `i -> follow`. Out-degree is unchanged.
    pub(crate) fn swap_followee(&mut self, i: AgentId, unfollow: AgentId, follow: AgentId) {
        debug_assert_ne!(i, follow);
        let removed = self.remove(i, unfollow);
        let inserted = self.insert(i, follow);
        debug_assert!(removed && inserted);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    #[test]
    fn two_agents_complete() {
        let mut rng = SimRng::seed_from_u64(1);
        let g = FollowGraph::erdos_renyi(2, 1.0, &mut rng).unwrap();
        assert!(g.follows(0, 1));
        assert!(g.follows(1, 0));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn er_mean_out_degree() {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = SimRng::seed_from_u64(seed);
            let g = FollowGraph::erdos_renyi(500, 15.0, &mut rng).unwrap();
            total += g.edge_count() as f64 / 500.0;
        }
        let mean = total / 20.0;
        assert!((mean - 15.0).abs() < 0.5, "mean out-degree {mean}");
    }

    #[test]
    fn er_deterministic_and_simple() {
        let g1 = FollowGraph::erdos_renyi(100, 10.0, &mut SimRng::seed_from_u64(9)).unwrap();
        let g2 = FollowGraph::erdos_renyi(100, 10.0, &mut SimRng::seed_from_u64(9)).unwrap();
        assert_eq!(g1, g2);
        for i in 0..100 {
            let row = g1.followees(i);
            assert!(row.windows(2).all(|w| w[0] < w[1]));
            assert!(!row.contains(&(i as AgentId)));
        }
    }

    #[test]
    fn er_rejects_bad_params() {
        let mut rng = SimRng::seed_from_u64(0);
        assert!(FollowGraph::erdos_renyi(1, 1.0, &mut rng).is_err());
        assert!(FollowGraph::erdos_renyi(10, 0.0, &mut rng).is_err());
        assert!(FollowGraph::erdos_renyi(10, 10.0, &mut rng).is_err());
    }

    #[test]
    fn from_edges_validates() {
        assert!(FollowGraph::from_edges(3, [(0, 0)]).is_err());
        assert!(FollowGraph::from_edges(3, [(0, 1), (0, 1)]).is_err());
        assert!(FollowGraph::from_edges(3, [(0, 3)]).is_err());
        let g = FollowGraph::from_edges(3, [(0, 2), (0, 1)]).unwrap();
        assert_eq!(g.followees(0), &[1, 2]);
    }

    #[test]
    fn swap_preserves_degree() {
        let mut g = FollowGraph::from_edges(4, [(0, 1), (0, 2)]).unwrap();
        g.swap_followee(0, 1, 3);
        assert_eq!(g.followees(0), &[2, 3]);
    }
}
