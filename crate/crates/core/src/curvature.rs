//! Per-edge curvature fields and their mapping to positive edge weights.
//!
//! Curvature enters the engine as a scalar per edge: computed combinatorially
//! (Forman), assigned synthetically per community boundary, or loaded from a
//! file produced by an external tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{CommunityPartition, Graph};

/// Largest magnitude of a negative curvature before `exp(-kappa)` overflows
/// an `f64`.
pub const EXP_WEIGHT_LIMIT: f64 = -700.0;

/// Where a curvature field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSource {
    Forman,
    External,
    Synthetic,
}

/// Scalar curvature per canonical edge `(i < j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    values: BTreeMap<(usize, usize), f64>,
    source: CurvatureSource,
}

impl CurvatureField {
    /// Builds a field from explicit values; every value must be finite.
    pub fn new(values: BTreeMap<(usize, usize), f64>, source: CurvatureSource) -> Result<Self> {
        for (&(i, j), &k) in &values {
            if !k.is_finite() {
                return Err(Error::NonFiniteCurvature(i, j));
            }
        }
        Ok(CurvatureField { values, source })
    }

    pub fn values(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.values
    }

    pub fn source(&self) -> CurvatureSource {
        self.source
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values.get(&(i.min(j), i.max(j))).copied()
    }

    /// Arithmetic mean of the curvature over all edges.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.values().sum::<f64>() / self.values.len() as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that the key set equals the graph's edge set.
    pub fn matches_graph(&self, g: &Graph) -> bool {
        self.values.len() == g.edge_count()
            && g.edges().iter().all(|e| self.values.contains_key(e))
    }

    /// Writes the field as `<i> <j> <kappa>` lines, canonically sorted.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        for (&(i, j), &k) in &self.values {
            writeln!(out, "{i} {j} {k}").expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Strictly positive weight per canonical edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    values: BTreeMap<(usize, usize), f64>,
}

impl WeightField {
    /// Builds a weight field; every value must be finite and > 0.
    pub fn new(values: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        for (&(i, j), &w) in &values {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight(i, j));
            }
        }
        Ok(WeightField { values })
    }

    /// Unit weight on every edge of `g`.
    pub fn ones(g: &Graph) -> Self {
        WeightField {
            values: g.edges().iter().map(|&e| (e, 1.0)).collect(),
        }
    }

    pub fn values(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn matches_graph(&self, g: &Graph) -> bool {
        self.values.len() == g.edge_count()
            && g.edges().iter().all(|e| self.values.contains_key(e))
    }

    /// True iff every weight lies in (0, 1].
    pub fn in_unit_interval(&self) -> bool {
        self.values.values().all(|&w| w > 0.0 && w <= 1.0)
    }
}

/// Combinatorial Forman-Ricci curvature of an unweighted graph:
/// `kappa(i, j) = 4 - deg(i) - deg(j)`.
pub fn forman_curvature(g: &Graph) -> CurvatureField {
    let values = g
        .edges()
        .iter()
        .map(|&(i, j)| ((i, j), 4.0 - g.degree(i) as f64 - g.degree(j) as f64))
        .collect();
    CurvatureField {
        values,
        source: CurvatureSource::Forman,
    }
}

/// Synthetic two-level field: `intra` on edges inside a community, `inter`
/// on edges crossing community boundaries.
pub fn synthetic_field(
    g: &Graph,
    partition: &CommunityPartition,
    intra: f64,
    inter: f64,
) -> Result<CurvatureField> {
    if partition.node_count() != g.node_count() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} nodes, graph has {}",
            partition.node_count(),
            g.node_count()
        )));
    }
    if !intra.is_finite() || !inter.is_finite() {
        return Err(Error::InvalidParameter(
            "synthetic curvature levels must be finite".into(),
        ));
    }
    let values = g
        .edges()
        .iter()
        .map(|&(i, j)| {
            let k = if partition.community_of(i) == partition.community_of(j) {
                intra
            } else {
                inter
            };
            ((i, j), k)
        })
        .collect();
    Ok(CurvatureField {
        values,
        source: CurvatureSource::Synthetic,
    })
}

/// Exponential weight map `w = exp(-kappa)`, strictly positive for any sign
/// of the curvature. Curvatures below [`EXP_WEIGHT_LIMIT`] are rejected
/// because the weight would overflow.
pub fn exp_weight(field: &CurvatureField) -> Result<WeightField> {
    let mut values = BTreeMap::new();
    for (&(i, j), &k) in field.values() {
        if k < EXP_WEIGHT_LIMIT {
            return Err(Error::WeightOverflow { i, j, kappa: k });
        }
        values.insert((i, j), (-k).exp());
    }
    Ok(WeightField { values })
}

/// Clamps every weight to (0, 1] via `w <- min(w, 1)`; identity when the
/// input already lies in the unit interval.
pub fn clamp_unit(field: &WeightField) -> WeightField {
    WeightField {
        values: field
            .values
            .iter()
            .map(|(&e, &w)| (e, w.min(1.0)))
            .collect(),
    }
}

/// Loads an external curvature file (`<i> <j> <kappa>` per line, `#`
/// comments). The file must cover exactly the edge set of `g`.
pub fn load_curvature(path: impl AsRef<Path>, g: &Graph) -> Result<CurvatureField> {
    let text = fs::read_to_string(path)?;
    let mut values: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => raw[..pos].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let i: usize = parse_token(parts.next(), line_no, "node index")?;
        let j: usize = parse_token(parts.next(), line_no, "node index")?;
        let kappa: f64 = parse_token(parts.next(), line_no, "curvature value")?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("trailing tokens in `{line}`"),
            });
        }
        if !kappa.is_finite() {
            return Err(Error::NonFiniteCurvature(i, j));
        }
        if g.edge_index(i, j).is_none() {
            return Err(Error::UnknownEdge(i, j));
        }
        let key = (i.min(j), i.max(j));
        if values.insert(key, kappa).is_some() {
            return Err(Error::DuplicateCurvature(key.0, key.1));
        }
    }
    for &(i, j) in g.edges() {
        if !values.contains_key(&(i, j)) {
            return Err(Error::MissingCurvature(i, j));
        }
    }
    Ok(CurvatureField {
        values,
        source: CurvatureSource::External,
    })
}

fn parse_token<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{token}`"),
    })
}
