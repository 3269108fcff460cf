//! Opinion-distance distributions and the Jensen–Shannon polarization indices.

use crate::error::{Error, Result};
use crate::graph::FollowGraph;

use super::homophily::{homophily_index, homophily_ratio};

/// Uniform bins on `[0, 2]`.
pub const DEFAULT_BINS: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceHistogram {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

impl DistanceHistogram {
    /// Normalize raw counts over `bins` uniform bins on `[0, 2]`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyPairs);
        }
        let t = total as f64;
        Ok(DistanceHistogram {
            edges: uniform_edges(counts.len()),
            mass: counts.iter().map(|&c| c as f64 / t).collect(),
        })
    }

    pub fn from_mass(mass: Vec<f64>) -> Self {
        DistanceHistogram {
            edges: uniform_edges(mass.len()),
            mass,
        }
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

fn uniform_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|k| 2.0 * k as f64 / bins as f64).collect()
}

#[inline]
fn bin_of(d: f64, bins: usize) -> usize {
    ((d * bins as f64 * 0.5) as usize).min(bins - 1)
}

#[derive(Clone, Copy, Debug)]
pub enum PairSource<'a> {
    /// Unordered distinct pairs of agents.
    AllPairs,
    /// Directed follow edges.
    Edges(&'a FollowGraph),
}

pub fn distance_histogram(opinions: &[f64], source: PairSource<'_>, bins: usize) -> Result<DistanceHistogram> {
    if bins == 0 {
        return Err(Error::Invalid("histogram needs at least one bin".into()));
    }
    let mut counts = vec![0u64; bins];
    match source {
        PairSource::AllPairs => all_pair_counts(opinions, &mut counts),
        PairSource::Edges(g) => edge_counts(g, opinions, &mut counts),
    }
    DistanceHistogram::from_counts(&counts)
}

fn all_pair_counts(opinions: &[f64], counts: &mut [u64]) {
    let bins = counts.len();
    for (i, &x) in opinions.iter().enumerate() {
        for &y in &opinions[i + 1..] {
            counts[bin_of((x - y).abs(), bins)] += 1;
        }
    }
}

fn edge_counts(graph: &FollowGraph, opinions: &[f64], counts: &mut [u64]) {
    let bins = counts.len();
    for (i, &x) in opinions.iter().enumerate() {
        for &j in graph.followees(i) {
            counts[bin_of((x - opinions[j as usize]).abs(), bins)] += 1;
        }
    }
}

/// Random and fully clustered reference distributions.
#[derive(Clone, Debug)]
pub struct ReferenceSet {
    /// Distance of two independent uniforms on `[-1, 1]`: density `(2 - d) / 2`.
    pub random: DistanceHistogram,
    /// Two equal clusters at opposite extremes: half the mass at 0, half at 2.
    pub clustered_objective: DistanceHistogram,
    /// Perfectly homogeneous neighbourhoods: all mass at 0.
    pub clustered_subjective: DistanceHistogram,
}

pub fn reference_distributions(bins: usize) -> Result<ReferenceSet> {
    if bins < 2 {
        return Err(Error::Invalid(format!("need at least 2 bins, got {bins}")));
    }
    let cdf = |d: f64| d - d * d / 4.0;
    let edges = uniform_edges(bins);
    let random: Vec<f64> = edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])).collect();
    let mut clustered = vec![0.0; bins];
    clustered[0] = 0.5;
    clustered[bins - 1] = 0.5;
    let mut homogeneous = vec![0.0; bins];
    homogeneous[0] = 1.0;
    Ok(ReferenceSet {
        random: DistanceHistogram::from_mass(random),
        clustered_objective: DistanceHistogram::from_mass(clustered),
        clustered_subjective: DistanceHistogram::from_mass(homogeneous),
    })
}

/// Natural-log Jensen–Shannon divergence.
pub fn js_divergence(p: &DistanceHistogram, q: &DistanceHistogram) -> Result<f64> {
    if p.bins() != q.bins() || p.edges != q.edges {
        return Err(Error::MismatchedBins {
            left: p.bins(),
            right: q.bins(),
        });
    }
    Ok(js_mass(&p.mass, &q.mass))
}

fn js_mass(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            acc += a * (a / m).ln();
        }
        if b > 0.0 {
            acc += b * (b / m).ln();
        }
    }
    (0.5 * acc).max(0.0)
}

/// `(I_p, I_s)` from objective and subjective distance distributions.
pub fn polarization_indices(
    objective: &DistanceHistogram,
    subjective: &DistanceHistogram,
    refs: &ReferenceSet,
) -> Result<(f64, f64)> {
    let obj_den = js_divergence(&refs.clustered_objective, &refs.random)?;
    let subj_den = js_divergence(&refs.clustered_subjective, &refs.random)?;
    if obj_den == 0.0 || subj_den == 0.0 {
        return Err(Error::Invalid("reference distributions coincide".into()));
    }
    Ok((
        js_divergence(objective, &refs.random)? / obj_den,
        js_divergence(subjective, &refs.random)? / subj_den,
    ))
}

/// Per-step index evaluation with preallocated buffers.
#[derive(Clone, Debug)]
pub struct IndexCalculator {
    epsilon: f64,
    baseline: f64,
    refs: ReferenceSet,
    obj_den: f64,
    subj_den: f64,
    counts: Vec<u64>,
    mass: Vec<f64>,
}

/// `(rho, I_h, I_p, I_s)` at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Indices {
    pub rho: f64,
    pub i_h: f64,
    pub i_p: f64,
    pub i_s: f64,
}

impl IndexCalculator {
    pub fn new(epsilon: f64, baseline: f64, bins: usize) -> Result<Self> {
        let refs = reference_distributions(bins)?;
        let obj_den = js_divergence(&refs.clustered_objective, &refs.random)?;
        let subj_den = js_divergence(&refs.clustered_subjective, &refs.random)?;
        Ok(IndexCalculator {
            epsilon,
            baseline,
            refs,
            obj_den,
            subj_den,
            counts: vec![0; bins],
            mass: vec![0.0; bins],
        })
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn references(&self) -> &ReferenceSet {
        &self.refs
    }

    fn js_from_counts(&mut self, reference: &[f64]) -> Result<f64> {
        let total: u64 = self.counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyPairs);
        }
        let t = total as f64;
        for (m, &c) in self.mass.iter_mut().zip(&self.counts) {
            *m = c as f64 / t;
        }
        Ok(js_mass(&self.mass, reference))
    }

    pub fn compute(&mut self, graph: &FollowGraph, opinions: &[f64]) -> Result<Indices> {
        let rho = homophily_ratio(graph, opinions, self.epsilon)?;
        let i_h = homophily_index(rho, self.baseline);

        self.counts.iter_mut().for_each(|c| *c = 0);
        all_pair_counts(opinions, &mut self.counts);
        let random = std::mem::take(&mut self.refs.random.mass);
        let obj = self.js_from_counts(&random);

        self.counts.iter_mut().for_each(|c| *c = 0);
        edge_counts(graph, opinions, &mut self.counts);
        let subj = self.js_from_counts(&random);
        self.refs.random.mass = random;

        Ok(Indices {
            rho,
            i_h,
            i_p: obj? / self.obj_den,
            i_s: subj? / self.subj_den,
        })
    }
}
