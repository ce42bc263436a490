//! The effective contact matrix `M` and its spectral analysis.
//!
//! `M` multiplies the adjacency pattern by curvature-derived weights
//! entrywise (raw mode) or additionally normalizes each row to sum to one
//! (row-stochastic mode). The dominant eigenvalue of `M` sets the basic
//! reproduction number `R0 = (beta/gamma) * lambda_max(M)`, and the mean
//! curvature is compared against the geometric threshold `kappa_star`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::curvature::{exp_weight, CurvatureField, WeightField};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default residual tolerance for the power iteration.
pub const SPECTRAL_TOL: f64 = 1e-12;
/// Default iteration cap for the power iteration.
pub const SPECTRAL_MAX_ITER: usize = 100_000;

/// How the weighted adjacency is turned into a contact operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMode {
    /// Entrywise product of adjacency and weights; symmetric for symmetric
    /// weights. This is the setting of the spectral-reduction and geometric
    /// threshold results.
    Raw,
    /// Each row divided by its sum; the operator averages neighbor values
    /// and has spectral radius exactly 1.
    RowStochastic,
}

impl std::fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixMode::Raw => write!(f, "raw"),
            MatrixMode::RowStochastic => write!(f, "row_stochastic"),
        }
    }
}

/// Sparse nonnegative contact operator in compressed-row form. The sparsity
/// pattern equals the graph adjacency; immutable after construction.
#[derive(Debug)]
pub struct ContactMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    mode: MatrixMode,
    spectral_cache: OnceLock<SpectralReport>,
}

impl ContactMatrix {
    /// Builds `M` from a connected graph and a positive weight field.
    ///
    /// Raw mode stores `m_ij = w_ij`; row-stochastic mode stores
    /// `m_ij = w_ij / sum_k w_ik` over the neighbors `k` of `i`.
    pub fn build(g: &Graph, w: &WeightField, mode: MatrixMode) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        if !w.matches_graph(g) {
            return Err(Error::WeightMismatch(format!(
                "field has {} entries, graph has {} edges",
                w.values().len(),
                g.edge_count()
            )));
        }
        let n = g.node_count();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            if g.degree(i) == 0 {
                return Err(Error::ZeroRow(i));
            }
            let start = values.len();
            for &j in g.neighbors(i) {
                let wij = w.get(i, j).expect("weight present for every edge");
                col_idx.push(j);
                values.push(wij);
            }
            if mode == MatrixMode::RowStochastic {
                let sum: f64 = values[start..].iter().sum();
                for v in &mut values[start..] {
                    *v /= sum;
                }
            }
            row_ptr.push(values.len());
        }
        Ok(ContactMatrix {
            n,
            row_ptr,
            col_idx,
            values,
            mode,
            spectral_cache: OnceLock::new(),
        })
    }

    /// Builds an operator directly from `(row, col, value)` triplets. Meant
    /// for small hand-specified systems; the caller is responsible for
    /// irreducibility. Row-stochastic mode is validated, not normalized.
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
        mode: MatrixMode,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidEntry {
                    i,
                    j,
                    msg: format!("index out of range for n = {n}"),
                });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEntry {
                    i,
                    j,
                    msg: format!("value {v} must be finite and nonnegative"),
                });
            }
            if v > 0.0 {
                rows[i].push((j, v));
            }
        }
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(j, _)| j);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidEntry {
                    i,
                    j: row[0].0,
                    msg: "duplicate entry".into(),
                });
            }
            if row.is_empty() {
                return Err(Error::ZeroRow(i));
            }
            if mode == MatrixMode::RowStochastic {
                let sum: f64 = row.iter().map(|&(_, v)| v).sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::NotStochastic { row: i, sum });
                }
            }
            for &(j, v) in row.iter() {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(values.len());
        }
        Ok(ContactMatrix {
            n,
            row_ptr,
            col_idx,
            values,
            mode,
            spectral_cache: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    /// Entry `m_ij`, zero when outside the sparsity pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored entries as `(i, j, m_ij)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            self.col_idx[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = M x` into a caller-provided buffer.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// `y = M^T x`.
    pub fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            for k in lo..hi {
                y[self.col_idx[k]] += self.values[k] * x[i];
            }
        }
        y
    }

    /// Per-row sums (the weighted out-degrees).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Spectral data computed at the default tolerance, cached on first use.
    pub fn spectral(&self) -> Result<&SpectralReport> {
        if let Some(report) = self.spectral_cache.get() {
            return Ok(report);
        }
        let report = spectral_radius(self, SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
        let _ = self.spectral_cache.set(report);
        Ok(self.spectral_cache.get().expect("cache just filled"))
    }

    /// Debug text export: one `i j m_ij` line per stored entry, row-major.
    pub fn write_text(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (i, j, v) in self.entries() {
            writeln!(out, "{i} {j} {v}").expect("string write");
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Dominant eigenvalue and Perron vectors of a contact matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub lambda_max: f64,
    /// Right Perron vector, strictly positive, unit Euclidean norm.
    pub right_perron: Vec<f64>,
    /// Left Perron vector, strictly positive, unit Euclidean norm.
    pub left_perron: Vec<f64>,
    pub iterations: usize,
    /// `max_i |(M v)_i - lambda v_i|` for the max-normalized right iterate.
    pub residual: f64,
}

/// Power iteration on `M + I` from the all-ones vector, max-norm normalized
/// each step. The `+I` shift makes bipartite patterns primitive, so the
/// iteration converges for every irreducible nonnegative matrix; the
/// dominant eigenvalue of `M` is the Rayleigh estimate minus one.
pub fn spectral_radius(m: &ContactMatrix, tol: f64, max_iter: usize) -> Result<SpectralReport> {
    let (lambda_r, right, iters_r, res_r) = power_iterate(m, false, tol, max_iter)?;
    let (_, left, iters_l, _) = power_iterate(m, true, tol, max_iter)?;
    Ok(SpectralReport {
        lambda_max: lambda_r,
        right_perron: unit_l2(&right),
        left_perron: unit_l2(&left),
        iterations: iters_r.max(iters_l),
        residual: res_r,
    })
}

fn power_iterate(
    m: &ContactMatrix,
    transpose: bool,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, usize, f64)> {
    let n = m.n();
    let mut x = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for iter in 0..=max_iter {
        let y = if transpose {
            m.mul_vec_transpose(&x)
        } else {
            m.mul_vec(&x)
        };
        // Rayleigh estimate; equals the shifted-operator ratio minus one.
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let xx: f64 = x.iter().map(|a| a * a).sum();
        let lambda = xy / xx;
        // x is max-normalized, so the plain infinity norm is the residual.
        residual = x
            .iter()
            .zip(&y)
            .map(|(&xi, &yi)| (yi - lambda * xi).abs())
            .fold(0.0, f64::max);
        if residual <= tol {
            if x.iter().any(|&v| v <= 0.0) {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual,
                });
            }
            return Ok((lambda, x, iter, residual));
        }
        // z = (M + I) x, then renormalize in the max norm.
        let mut z: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a + b).collect();
        let norm = z.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual,
            });
        }
        for v in &mut z {
            *v /= norm;
        }
        x = z;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

fn unit_l2(x: &[f64]) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / norm).collect()
}

/// `R0 = (beta/gamma) * lambda_max(M)`.
pub fn basic_reproduction_number(m: &ContactMatrix, beta: f64, gamma: f64) -> Result<f64> {
    if beta <= 0.0 || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rates must be positive, got beta={beta}, gamma={gamma}"
        )));
    }
    Ok(beta / gamma * m.spectral()?.lambda_max)
}

/// Result of comparing the weighted and unweighted spectral radii.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionCheck {
    pub lambda_weighted: f64,
    pub lambda_unweighted: f64,
    pub holds: bool,
}

/// Checks the spectral-reduction inequality
/// `lambda_max(A .* W) <= lambda_max(A)` for weights in (0, 1].
pub fn spectral_reduction_check(g: &Graph, w: &WeightField) -> Result<ReductionCheck> {
    if let Some((&(i, j), &wij)) = w.values().iter().find(|(_, &v)| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::WeightOutOfUnit(i, j, wij));
    }
    let weighted = ContactMatrix::build(g, w, MatrixMode::Raw)?;
    let unweighted = ContactMatrix::build(g, &WeightField::ones(g), MatrixMode::Raw)?;
    let lw = weighted.spectral()?.lambda_max;
    let lu = unweighted.spectral()?.lambda_max;
    Ok(ReductionCheck {
        lambda_weighted: lw,
        lambda_unweighted: lu,
        holds: lw <= lu + 1e-9,
    })
}

/// Mean-curvature threshold certificates for the raw operator
/// `M = A .* exp(-kappa)`.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// Mean curvature over the edges.
    pub mean_curvature: f64,
    /// Threshold `kappa_star = -ln((gamma/beta) * n / (2|E|))`.
    pub kappa_star: f64,
    /// Gershgorin certificate `max_i sum_j exp(-kappa_ij)`; always an upper
    /// bound on `lambda_max(M)`.
    pub degree_bound: f64,
    /// Averaged bound `(2|E|/n) * exp(-mean_curvature)`; bounds the average
    /// weighted degree, not the maximum, so it certifies `lambda_max` only
    /// for constant fields on regular graphs.
    pub jensen_bound: f64,
    /// `(beta/gamma) * jensen_bound`.
    pub r0_upper: f64,
    /// Verdict `mean_curvature > kappa_star`.
    pub suppressed: bool,
}

/// Evaluates the geometric threshold data for a curvature field in raw-mode
/// semantics (weights `exp(-kappa)`, no normalization).
pub fn geometric_threshold(
    g: &Graph,
    field: &CurvatureField,
    beta: f64,
    gamma: f64,
) -> Result<ThresholdReport> {
    if beta <= 0.0 || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rates must be positive, got beta={beta}, gamma={gamma}"
        )));
    }
    if !field.matches_graph(g) {
        return Err(Error::WeightMismatch(
            "curvature field does not cover the edge set".into(),
        ));
    }
    let n = g.node_count() as f64;
    let edge_count = g.edge_count() as f64;
    let mean_curvature = field.mean();
    let kappa_star = -((gamma / beta) * n / (2.0 * edge_count)).ln();

    let weights = exp_weight(field)?;
    let degree_bound = (0..g.node_count())
        .map(|i| {
            g.neighbors(i)
                .iter()
                .map(|&j| weights.get(i, j).expect("edge weight"))
                .sum::<f64>()
        })
        .fold(0.0_f64, f64::max);
    let jensen_bound = (2.0 * edge_count / n) * (-mean_curvature).exp();

    let m = ContactMatrix::build(g, &weights, MatrixMode::Raw)?;
    let lambda = m.spectral()?.lambda_max;
    // Gershgorin for nonnegative matrices; a violation would mean the power
    // iteration returned garbage.
    assert!(
        lambda <= degree_bound + 1e-6,
        "lambda_max {lambda} exceeds Gershgorin bound {degree_bound}"
    );

    Ok(ThresholdReport {
        mean_curvature,
        kappa_star,
        degree_bound,
        jensen_bound,
        r0_upper: beta / gamma * jensen_bound,
        suppressed: mean_curvature > kappa_star,
    })
}
