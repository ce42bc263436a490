//! Shared test support: seeded random instances and an independent dense
//! eigensolver oracle.

// Each test binary uses a different subset of these helpers.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use curvnet_core::curvature::{CurvatureField, CurvatureSource, WeightField};
use curvnet_core::graph::Graph;
use curvnet_core::operator::ContactMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected Erdos-Renyi graph with `n` in `[n_min, n_max]`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize) -> Graph {
    assert!(n_min >= 2);
    let n = rng.gen_range(n_min..=n_max);
    let p = (2.5 * (n as f64).ln() / n as f64).clamp(0.3, 1.0);
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).expect("generated edges are valid");
        if g.is_connected() {
            return g;
        }
    }
}

/// Random connected circulant graph: vertex-transitive, hence regular.
/// Returns the graph and its degree.
pub fn random_circulant(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize) -> (Graph, usize) {
    let n = rng.gen_range(n_min..=n_max);
    let mut offsets = vec![1usize];
    for s in 2..=(n / 2) {
        if rng.gen::<f64>() < 0.3 {
            offsets.push(s);
        }
    }
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        for &s in &offsets {
            let j = (i + s) % n;
            if i != j {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    let edges: Vec<_> = pairs.into_iter().collect();
    let g = Graph::from_edges(n, &edges).expect("circulant edges are valid");
    let degree = g.degree(0);
    assert!((0..n).all(|v| g.degree(v) == degree), "circulant not regular");
    (g, degree)
}

/// Weights drawn uniformly from `(0, 1]`.
pub fn random_unit_weights(rng: &mut ChaCha8Rng, g: &Graph) -> WeightField {
    let values: BTreeMap<_, _> = g
        .edges()
        .iter()
        .map(|&e| (e, 1.0 - rng.gen::<f64>()))
        .collect();
    WeightField::new(values).expect("weights in (0,1]")
}

/// Arbitrary positive weights `exp(-kappa)` for `kappa` uniform in `[-3, 3]`.
pub fn random_positive_weights(rng: &mut ChaCha8Rng, g: &Graph) -> WeightField {
    let values: BTreeMap<_, _> = g
        .edges()
        .iter()
        .map(|&e| (e, (-rng.gen_range(-3.0..3.0_f64)).exp()))
        .collect();
    WeightField::new(values).expect("exp weights positive")
}

/// Per-edge curvature field with values uniform in `[lo, hi]`.
pub fn random_curvature(rng: &mut ChaCha8Rng, g: &Graph, lo: f64, hi: f64) -> CurvatureField {
    let values: BTreeMap<_, _> = g
        .edges()
        .iter()
        .map(|&e| (e, rng.gen_range(lo..hi)))
        .collect();
    CurvatureField::new(values, CurvatureSource::Synthetic).expect("finite curvature")
}

/// Constant curvature on every edge.
pub fn constant_curvature(g: &Graph, kappa: f64) -> CurvatureField {
    let values: BTreeMap<_, _> = g.edges().iter().map(|&e| (e, kappa)).collect();
    CurvatureField::new(values, CurvatureSource::Synthetic).expect("finite curvature")
}

/// Dense symmetric eigensolver oracle (tridiagonalization + implicit QL via
/// nalgebra), independent of the engine's power iteration. The spectral
/// radius of a symmetric nonnegative matrix is its largest eigenvalue.
pub fn dense_symmetric_spectral_radius(m: &ContactMatrix) -> f64 {
    let n = m.n();
    let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in m.entries() {
        dense[(i, j)] = v;
    }
    assert!(
        (&dense - dense.transpose()).amax() == 0.0,
        "oracle requires a symmetric matrix"
    );
    dense
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
}
