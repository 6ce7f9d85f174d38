//! Discretizing value matrices into colorings and naming the resulting decision state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::colorings::{canonical_form, AxialColoring};
use crate::error::{Error, Result};
use crate::matrix::ValueMatrix;
use crate::scalar::Real;

pub use crate::colorings::{Axis, Coloring};

/// Default absolute tolerance for [`quantize_to_coloring`].
pub const DEFAULT_QUANTIZATION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternClass {
    FullySynchronous,
    /// Rows all equal: agents agree on every option.
    Consensus,
    /// Columns all equal: each agent values all options alike.
    Deadlock,
    Dissensus,
}

/// A coloring together with the mean value of each color.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantization {
    pub coloring: Coloring,
    /// Ascending; entry `k` is the mean of the cells with color `k`.
    pub color_values: Vec<f64>,
    pub tol: f64,
}

/// Single-linkage clustering of the entries on the real line: entries closer
/// than `tol` share a color. Colors are numbered by increasing value.
pub fn quantize<T: Real>(z: &ValueMatrix<T>, tol: f64) -> Result<Quantization> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("quantization tolerance must be positive, got {tol}")));
    }
    z.check_finite()?;
    let values: Vec<f64> = z.as_slice().iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut labels = vec![0usize; values.len()];
    let mut color_values = Vec::new();
    let mut start = 0;
    for k in 1..=order.len() {
        if k == order.len() || values[order[k]] - values[order[k - 1]] > tol {
            let cluster = &order[start..k];
            let (lo, hi) = (values[cluster[0]], values[cluster[cluster.len() - 1]]);
            let mean = cluster.iter().map(|&c| values[c]).sum::<f64>() / cluster.len() as f64;
            if hi - lo > 10.0 * tol {
                return Err(Error::AmbiguousQuantization { center: mean, diameter: hi - lo, limit: 10.0 * tol });
            }
            for &c in cluster {
                labels[c] = color_values.len();
            }
            color_values.push(mean);
            start = k;
        }
    }
    let coloring = Coloring::new(z.shape(), labels)?;
    Ok(Quantization { coloring, color_values, tol })
}

pub fn quantize_to_coloring<T: Real>(z: &ValueMatrix<T>, tol: f64) -> Result<Coloring> {
    Ok(quantize(z, tol)?.coloring)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub class: PatternClass,
    /// Rows with identical colorings, each sorted, ordered by first row.
    pub agent_clusters: Vec<Vec<usize>>,
    pub option_clusters: Vec<Vec<usize>>,
    pub color_values: BTreeMap<usize, f64>,
    pub row_sums: Vec<f64>,
    pub col_sums: Vec<f64>,
    /// Tolerance used to derive the coloring, when it came from quantization.
    pub quantization_tol: Option<f64>,
}

impl PatternReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The color closest to zero among those within `tol` of it.
    pub fn neutral_color(&self, tol: f64) -> Option<usize> {
        neutral_color(&self.color_values, tol)
    }
}

/// Color whose representative value is within `tol` of zero (the closest one).
pub fn neutral_color(color_values: &BTreeMap<usize, f64>, tol: f64) -> Option<usize> {
    color_values
        .iter()
        .filter(|(_, v)| v.abs() <= tol)
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(&k, _)| k)
}

fn identical_lines(c: &Coloring, axis: Axis) -> Vec<Vec<usize>> {
    let count = match axis {
        Axis::Rows => c.m(),
        Axis::Columns => c.n(),
    };
    let mut clusters: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for k in 0..count {
        let line = c.line(axis, k);
        match clusters.iter_mut().find(|(l, _)| *l == line) {
            Some((_, members)) => members.push(k),
            None => clusters.push((line, vec![k])),
        }
    }
    clusters.into_iter().map(|(_, members)| members).collect()
}

/// Name the decision state of `z` from its coloring `c`.
pub fn classify_state<T: Real>(c: &Coloring, z: &ValueMatrix<T>) -> Result<PatternReport> {
    z.check_shape(c.shape())?;
    let agent_clusters = identical_lines(c, Axis::Rows);
    let option_clusters = identical_lines(c, Axis::Columns);
    let class = match (agent_clusters.len() == 1, option_clusters.len() == 1) {
        (true, true) => PatternClass::FullySynchronous,
        (true, false) => PatternClass::Consensus,
        (false, true) => PatternClass::Deadlock,
        (false, false) => PatternClass::Dissensus,
    };
    let z64 = z.to_f64();
    let mut sums = vec![(0.0, 0usize); c.num_colors()];
    for (&k, &v) in c.as_slice().iter().zip(z64.as_slice()) {
        sums[k].0 += v;
        sums[k].1 += 1;
    }
    let color_values = sums.into_iter().enumerate().map(|(k, (s, n))| (k, s / n as f64)).collect();
    Ok(PatternReport {
        class,
        agent_clusters,
        option_clusters,
        color_values,
        row_sums: z64.row_sums(),
        col_sums: z64.col_sums(),
        quantization_tol: None,
    })
}

/// Quantize with `tol`, then classify.
pub fn analyze_state<T: Real>(z: &ValueMatrix<T>, tol: f64) -> Result<(Coloring, PatternReport)> {
    let q = quantize(z, tol)?;
    let mut report = classify_state(&q.coloring, z)?;
    report.quantization_tol = Some(tol);
    Ok((q.coloring, report))
}

/// Lines `i` and `k` carry the same color multiset.
///
/// Panics if an index is out of range.
pub fn color_isomorphic(c: &Coloring, axis: Axis, i: usize, k: usize) -> bool {
    let mut a = c.line(axis, i);
    let mut b = c.line(axis, k);
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// Some renaming of colors maps line `i` onto line `k` position by position.
///
/// Panics if an index is out of range.
pub fn color_complementary(c: &Coloring, axis: Axis, i: usize, k: usize) -> bool {
    let (a, b) = (c.line(axis, i), c.line(axis, k));
    let mut forward = vec![usize::MAX; c.num_colors()];
    let mut backward = vec![usize::MAX; c.num_colors()];
    for (&x, &y) in a.iter().zip(&b) {
        if (forward[x] != usize::MAX && forward[x] != y) || (backward[y] != usize::MAX && backward[y] != x) {
            return false;
        }
        forward[x] = y;
        backward[y] = x;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumReport {
    pub max_abs_row_sum: f64,
    pub max_abs_col_sum: f64,
    /// Largest absolute entry.
    pub amplitude: f64,
}

impl ZeroSumReport {
    /// `max |row sum| / amplitude`; zero for the zero matrix.
    pub fn row_ratio(&self) -> f64 {
        if self.amplitude > 0.0 { self.max_abs_row_sum / self.amplitude } else { 0.0 }
    }

    pub fn col_ratio(&self) -> f64 {
        if self.amplitude > 0.0 { self.max_abs_col_sum / self.amplitude } else { 0.0 }
    }
}

pub fn zero_sum_report<T: Real>(z: &ValueMatrix<T>) -> ZeroSumReport {
    let z = z.to_f64();
    let max_abs = |v: Vec<f64>| v.into_iter().fold(0.0, |a: f64, x| a.max(x.abs()));
    ZeroSumReport { max_abs_row_sum: max_abs(z.row_sums()), max_abs_col_sum: max_abs(z.col_sums()), amplitude: z.max_abs() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxialMatch {
    /// Position in the catalog.
    pub index: usize,
    pub entry: AxialColoring,
    /// The quantized coloring of the state (not canonicalized).
    pub coloring: Coloring,
}

/// Quantize `z` and look up its conjugacy class in `catalog`, whose entries
/// must be canonical forms as produced by `enumerate_axial`.
pub fn match_axial<T: Real>(z: &ValueMatrix<T>, catalog: &[AxialColoring], tol: f64) -> Result<Option<AxialMatch>> {
    if let Some(a) = catalog.iter().find(|a| a.shape() != z.shape()) {
        return Err(Error::ShapeMismatch { expected: z.shape().to_string(), got: a.shape().to_string() });
    }
    let coloring = quantize_to_coloring(z, tol)?;
    let key = canonical_form(&coloring)?;
    Ok(catalog
        .iter()
        .position(|a| a.coloring == key)
        .map(|index| AxialMatch { index, entry: catalog[index].clone(), coloring }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorings::{axial_values, enumerate_axial};
    use crate::matrix::NetworkShape;
    use crate::perm::Permutation;

    fn rows(v: Vec<Vec<f64>>) -> ValueMatrix<f64> {
        ValueMatrix::from_rows(v).unwrap()
    }

    fn col(s: &str) -> Coloring {
        s.parse().unwrap()
    }

    #[test]
    fn quantization_examples() {
        let q = quantize(&ValueMatrix::filled(NetworkShape::new(2, 3).unwrap(), 0.7), 1e-6).unwrap();
        assert_eq!(q.coloring.num_colors(), 1);
        let q = quantize(&rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]), 1e-6).unwrap();
        assert_eq!(q.coloring, col("1 0\n0 1"));
        assert_eq!(q.color_values, vec![-1.0, 1.0]);
        assert!(quantize(&rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]), 0.0).is_err());
    }

    #[test]
    fn chained_cluster_is_ambiguous() {
        let chain: Vec<f64> = (0..16).map(|k| k as f64 * 0.9e-3).collect();
        let z = ValueMatrix::new(NetworkShape::new(4, 4).unwrap(), chain).unwrap();
        assert!(matches!(quantize(&z, 1e-3), Err(Error::AmbiguousQuantization { .. })));
    }

    #[test]
    fn classes() {
        let z = rows(vec![vec![1.0, -1.0, -1.0], vec![1.0, -1.0, -1.0]]);
        let (_, r) = analyze_state(&z, 1e-6).unwrap();
        assert_eq!(r.class, PatternClass::Consensus);
        assert_eq!(r.option_clusters, vec![vec![0], vec![1, 2]]);
        assert_eq!(r.quantization_tol, Some(1e-6));
        let (_, r) = analyze_state(&z.transpose(), 1e-6).unwrap();
        assert_eq!(r.class, PatternClass::Deadlock);
        assert_eq!(r.agent_clusters, vec![vec![0], vec![1, 2]]);
        let (_, r) = analyze_state(&ValueMatrix::filled(NetworkShape::new(2, 2).unwrap(), 3.0), 1e-6).unwrap();
        assert_eq!(r.class, PatternClass::FullySynchronous);
        let (_, r) = analyze_state(&rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]), 1e-6).unwrap();
        assert_eq!(r.class, PatternClass::Dissensus);
    }

    #[test]
    fn report_json_fields() {
        let (_, r) = analyze_state(&rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]), 1e-6).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["agent_clusters", "class", "col_sums", "color_values", "option_clusters", "quantization_tol", "row_sums"]
        );
    }

    #[test]
    fn isomorphic_and_complementary() {
        let c = col("0 1 1\n1 0 1\n0 0 1");
        assert!(color_isomorphic(&c, Axis::Rows, 0, 1));
        assert!(!color_isomorphic(&c, Axis::Rows, 0, 2));
        assert!(color_isomorphic(&c, Axis::Rows, 2, 2));
        let c = col("0 1\n1 0");
        assert!(color_complementary(&c, Axis::Rows, 0, 1));
        assert!(color_complementary(&c, Axis::Columns, 1, 1));
        let c = col("0 0 1\n0 1 1");
        assert!(!color_complementary(&c, Axis::Rows, 0, 1));
    }

    #[test]
    fn zero_sums() {
        let consensus = rows(vec![vec![1.0, -0.5, -0.5], vec![1.0, -0.5, -0.5]]);
        assert_eq!(zero_sum_report(&consensus).max_abs_row_sum, 0.0);
        let dissensus = rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let r = zero_sum_report(&dissensus);
        assert_eq!((r.max_abs_row_sum, r.max_abs_col_sum, r.amplitude), (0.0, 0.0, 1.0));
    }

    #[test]
    fn axial_round_trip_and_conjugates() {
        let cat = enumerate_axial(NetworkShape::new(3, 4).unwrap()).unwrap();
        for (k, a) in cat.iter().enumerate() {
            let z = axial_values(a, 1.0).unwrap();
            if !a.minimal {
                continue;
            }
            let shuffled = z.permuted(&Permutation::from_images(vec![2, 0, 1]).unwrap(), &Permutation::from_images(vec![1, 3, 0, 2]).unwrap());
            let hit = match_axial(&shuffled, &cat, 1e-9).unwrap().expect("listed");
            assert_eq!(hit.index, k);
            let (_, r) = analyze_state(&z, 1e-9).unwrap();
            assert_eq!(r.class, PatternClass::Dissensus);
        }
        let sync = ValueMatrix::filled(NetworkShape::new(3, 4).unwrap(), 1.0);
        assert!(match_axial(&sync, &cat, 1e-9).unwrap().is_none());
    }

    #[test]
    fn neutral() {
        let values: BTreeMap<usize, f64> = [(0, -1.0), (1, 2e-7), (2, 1.0)].into_iter().collect();
        assert_eq!(neutral_color(&values, 1e-5), Some(1));
        assert_eq!(neutral_color(&values, 1e-8), None);
    }
}
