use rand::Rng;

use crate::config::BaselineFormula;
use crate::error::{Error, Result};
use crate::graph::FollowGraph;
use crate::rng::SimRng;

pub const MONTE_CARLO_PAIRS: usize = 1_000_000;

/// Mean over agents of the fraction of followees within `epsilon`. Agents
/// without followees are left out of the mean.
pub fn homophily_ratio(graph: &FollowGraph, opinions: &[f64], epsilon: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for (i, &x) in opinions.iter().enumerate() {
        let followees = graph.followees(i);
        if followees.is_empty() {
            continue;
        }
        let concordant = followees
            .iter()
            .filter(|&&j| (x - opinions[j as usize]).abs() < epsilon)
            .count();
        sum += concordant as f64 / followees.len() as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::NoEdges);
    }
    Ok(sum / counted as f64)
}

/// `max(0, (rho - baseline) / (1 - baseline))`.
pub fn homophily_index(rho: f64, baseline: f64) -> f64 {
    ((rho - baseline) / (1.0 - baseline)).max(0.0)
}

pub fn homophily(graph: &FollowGraph, opinions: &[f64], epsilon: f64, baseline: f64) -> Result<(f64, f64)> {
    let rho = homophily_ratio(graph, opinions, epsilon)?;
    Ok((rho, homophily_index(rho, baseline)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineEstimate {
    pub value: f64,
    /// Zero for the closed form.
    pub std_error: f64,
}

/// Expected homophily ratio of a random graph with uniform opinions.
pub fn baseline_rho(epsilon: f64, mode: BaselineFormula, rng: &mut SimRng) -> BaselineEstimate {
    match mode {
        BaselineFormula::Paper => BaselineEstimate {
            value: epsilon - epsilon * epsilon / 8.0,
            std_error: 0.0,
        },
        BaselineFormula::MonteCarlo => {
            let hits = (0..MONTE_CARLO_PAIRS)
                .filter(|_| {
                    let u = rng.random_range(-1.0..=1.0f64);
                    let v = rng.random_range(-1.0..=1.0f64);
                    (u - v).abs() < epsilon
                })
                .count();
            let n = MONTE_CARLO_PAIRS as f64;
            let value = hits as f64 / n;
            BaselineEstimate {
                value,
                std_error: (value * (1.0 - value) / n).sqrt(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn perfect_homophily() {
        let g = FollowGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let (rho, ih) = homophily(&g, &[0.0, 0.1, 0.2], 0.45, 0.4246875).unwrap();
        assert_eq!(rho, 1.0);
        assert_eq!(ih, 1.0);
    }

    #[test]
    fn index_zero_point_and_clamp() {
        assert_eq!(homophily_index(0.4, 0.4), 0.0);
        assert_eq!(homophily_index(0.1, 0.4), 0.0);
        assert!((homophily_index(0.7, 0.4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_degree_agents_excluded() {
        let g = FollowGraph::from_edges(3, [(0, 1)]).unwrap();
        let rho = homophily_ratio(&g, &[0.0, 0.9, -0.9], 0.45).unwrap();
        assert_eq!(rho, 0.0);
        assert!(matches!(homophily_ratio(&FollowGraph::empty(3), &[0.0; 3], 0.45), Err(Error::NoEdges)));
    }

    #[test]
    fn paper_baseline_value() {
        let b = baseline_rho(0.45, BaselineFormula::Paper, &mut SimRng::seed_from_u64(0));
        assert!((b.value - 0.4246875).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_full_range() {
        let b = baseline_rho(2.0, BaselineFormula::MonteCarlo, &mut SimRng::seed_from_u64(0));
        assert_eq!(b.value, 1.0);
        assert_eq!(b.std_error, 0.0);
    }
}
