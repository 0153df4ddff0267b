//! Shortest paths in a conformal metric sampled on a polar grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{sample_grid, AnnulusChart, Grid, Region};
use crate::error::{Error, Result};
use crate::form::HoloForm;
use crate::labyrinth::{LabyrinthSpec, MIN_SAMPLES_PER_BAND};
use crate::weierstrass::{MetricField, WeierstrassTriple};

/// Weighted graph on grid nodes, stored in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    max_lambda_ratio: f64,
}

/// Edge weight `½(λ_a + λ_b)·|z_a − z_b|` over the 8-neighbour stencil.
pub fn metric_graph(grid: &Grid, metric: &MetricField) -> Result<MetricGraph> {
    if metric.lambda2.len() != grid.len() {
        return Err(Error::Precondition(format!(
            "metric has {} samples for {} nodes",
            metric.lambda2.len(),
            grid.len()
        )));
    }
    if let Some(node) = metric.lambda2.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::BranchPoint { node, z: grid.z(node) });
    }
    Ok(graph_from_lambda(grid, &metric.lambda()))
}

pub fn graph_from_lambda(grid: &Grid, lambda: &[f64]) -> MetricGraph {
    let edges = grid.edges();
    let n = grid.len();
    let mut degree = vec![0usize; n + 1];
    for &(a, b) in &edges {
        degree[a + 1] += 1;
        degree[b + 1] += 1;
    }
    for k in 0..n {
        degree[k + 1] += degree[k];
    }
    let offsets = degree;
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; 2 * edges.len()];
    let mut weights = vec![0.0; 2 * edges.len()];
    let mut max_ratio: f64 = 1.0;
    for &(a, b) in &edges {
        let w = 0.5 * (lambda[a] + lambda[b]) * (grid.z(a) - grid.z(b)).norm();
        let ratio = if lambda[a] > lambda[b] { lambda[a] / lambda[b] } else { lambda[b] / lambda[a] };
        max_ratio = max_ratio.max(ratio);
        targets[fill[a]] = b as u32;
        weights[fill[a]] = w;
        fill[a] += 1;
        targets[fill[b]] = a as u32;
        weights[fill[b]] = w;
        fill[b] += 1;
    }
    MetricGraph {
        offsets,
        targets,
        weights,
        max_lambda_ratio: max_ratio,
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| self.1.cmp(&other.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MetricGraph {
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Largest ratio of `λ` between the endpoints of an edge; large values mean
    /// the grid does not resolve the metric.
    pub fn max_lambda_ratio(&self) -> f64 {
        self.max_lambda_ratio
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().map(|&t| t as usize).zip(self.weights[r].iter().copied())
    }

    /// Multi-source Dijkstra; `stop` ends the search at the first popped node
    /// for which it returns true.
    fn dijkstra(&self, sources: &[usize], stop: impl Fn(usize) -> bool) -> (Vec<f64>, Option<usize>) {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
        }
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if stop(v) {
                return (dist, Some(v));
            }
            for (t, w) in self.neighbours(v) {
                let nd = d + w;
                if nd < dist[t] {
                    dist[t] = nd;
                    heap.push(Entry(nd, t));
                }
            }
        }
        (dist, None)
    }

    /// Distances from a set of sources to every node.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        self.dijkstra(sources, |_| false).0
    }

    /// Shortest distance from any source to any target.
    pub fn set_distance(&self, sources: &[usize], targets: &[usize]) -> Result<f64> {
        let mut is_target = vec![false; self.node_count()];
        for &t in targets {
            is_target[t] = true;
        }
        match self.dijkstra(sources, |v| is_target[v]) {
            (dist, Some(v)) => Ok(dist[v]),
            (_, None) => Err(Error::Connectivity),
        }
    }
}

pub fn intrinsic_distance(graph: &MetricGraph, source: usize, targets: &[usize]) -> Result<f64> {
    graph.set_distance(&[source], targets)
}

/// Conformal factor used for crossing estimates: the deformed metric on band
/// nodes and `|φ3/dz|` elsewhere, the lower bound available off the bands.
pub fn labyrinth_model_lambda(spec: &LabyrinthSpec, deformed: &WeierstrassTriple, phi3: &HoloForm, grid: &Grid) -> Vec<f64> {
    grid.nodes()
        .par_iter()
        .map(|n| {
            if spec.membership(n.z).is_some() {
                deformed.lambda2_at(n.z).sqrt()
            } else {
                phi3.eval(n.z).norm()
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub length: f64,
    pub undeformed_length: f64,
    pub mu: f64,
    /// `length / (μ·N)`.
    pub rho_hat: f64,
    pub radial_count: usize,
    pub angular_count: usize,
}

/// Shortest path between the two boundary circles of the labyrinth's annulus
/// under the model metric, and the same under `|φ3/dz|` alone.
pub fn crossing_length(
    spec: &LabyrinthSpec,
    deformed: &WeierstrassTriple,
    phi3: &HoloForm,
    grid: &Grid,
    mu: f64,
) -> Result<CrossingReport> {
    let samples = spec.min_samples_per_band(grid);
    if samples < MIN_SAMPLES_PER_BAND {
        return Err(Error::Resolution(format!(
            "bands get {samples} radial samples, need at least {MIN_SAMPLES_PER_BAND}"
        )));
    }
    if grid.parent() != &Region::Annulus(spec.parent) {
        return Err(Error::Precondition("crossing grid must cover exactly the labyrinth annulus".into()));
    }
    let inner = grid.inner_boundary();
    let outer = grid.outer_boundary();
    let model = graph_from_lambda(grid, &labyrinth_model_lambda(spec, deformed, phi3, grid));
    let length = model.set_distance(&inner, &outer)?;
    let flat: Vec<f64> = grid.nodes().par_iter().map(|n| phi3.eval(n.z).norm()).collect();
    let undeformed_length = graph_from_lambda(grid, &flat).set_distance(&inner, &outer)?;
    Ok(CrossingReport {
        n: spec.n,
        length,
        undeformed_length,
        mu,
        rho_hat: length / (mu * spec.n as f64),
        radial_count: grid.radial_count(),
        angular_count: grid.angular_count(),
    })
}

/// Grid on the labyrinth annulus with `per_band` rings inside every band.
pub fn crossing_grid(c: &AnnulusChart, n: usize, per_band: usize, angular: usize) -> Result<Grid> {
    sample_grid(&Region::Annulus(*c), crate::labyrinth::radial_count_for(c, n, per_band), angular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_grid;

    #[test]
    fn unit_metric_weights_are_steps() {
        let grid = sample_grid(&Region::annulus(0.5, 1.0).unwrap(), 4, 8).unwrap();
        let g = graph_from_lambda(&grid, &vec![1.0; grid.len()]);
        for v in 0..grid.len() {
            for (t, w) in g.neighbours(v) {
                assert!((w - (grid.z(v) - grid.z(t)).norm()).abs() < 1e-15);
            }
        }
        assert_eq!(g.max_lambda_ratio(), 1.0);
    }

    #[test]
    fn radial_distance_exact() {
        let grid = sample_grid(&Region::disk(1.0).unwrap(), 33, 64).unwrap();
        let g = graph_from_lambda(&grid, &vec![1.0; grid.len()]);
        let d = intrinsic_distance(&g, 0, &grid.outer_boundary()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let three = graph_from_lambda(&grid, &vec![3.0; grid.len()]);
        let d3 = intrinsic_distance(&three, 0, &grid.outer_boundary()).unwrap();
        assert!((d3 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target() {
        let grid = sample_grid(&Region::disk(1.0).unwrap(), 3, 8).unwrap();
        let g = graph_from_lambda(&grid, &vec![1.0; grid.len()]);
        assert!(matches!(g.set_distance(&[], &[1]), Err(Error::Connectivity)));
        let m = MetricField {
            lambda2: vec![0.0; grid.len()],
        };
        assert!(matches!(metric_graph(&grid, &m), Err(Error::BranchPoint { .. })));
    }
}
