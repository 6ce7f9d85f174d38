//! Exact combinatorics of colorings of the `m × n` grid: balance, Latin
//! rectangles, axial colorings relative to the dissensus subspace, conjugacy
//! classes, isotropy subgroups and stable-equilibrium synthesis.

mod axial;
mod balance;
mod canonical;
mod isotropy;
mod synthesis;

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::NetworkShape;
use crate::perm::Permutation;

pub use axial::{
    axial_values, dim_vd_intersection, enumerate_axial, is_axial_vd, AxialCase, AxialColoring, Split,
    ENUMERATION_CELL_LIMIT,
};
pub use balance::{
    balance_witness, is_balanced, is_latin_rectangle, tiling_decomposition, BalanceWitness, LatinRectangleBlock,
    RectangleTiling,
};
pub use canonical::{canonical_form, CANONICAL_FACTORIAL_LIMIT};
pub use isotropy::{
    classify_orbital_exotic, column_type_multiplicities, exotic_sufficient_4xn, group_closure, isotropy_subgroup,
    preserves, IsotropyReport, Verdict, ISOTROPY_BUDGET,
};
pub use synthesis::{random_generic_state, synthesize_stable_admissible, InterpolatedMap, SynthesisReport};

/// Row or column selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

/// Color ids on the grid, row-major, dense in `0..num_colors`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Coloring {
    shape: NetworkShape,
    colors: Vec<usize>,
    num_colors: usize,
}

impl Coloring {
    /// Requires every id below the number of distinct ids, each used at least once.
    pub fn new(shape: NetworkShape, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != shape.cells() {
            return Err(Error::ShapeMismatch { expected: shape.to_string(), got: format!("{} cells", colors.len()) });
        }
        let k = colors.iter().max().map_or(0, |&c| c + 1);
        let mut used = vec![false; k];
        for &c in &colors {
            used[c] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!("color ids must be dense: id {missing} is unused")));
        }
        Ok(Coloring { shape, colors, num_colors: k })
    }

    /// Relabel arbitrary labels to dense ids in row-major first-occurrence order.
    pub fn from_labels<L: Eq + Hash + Clone>(shape: NetworkShape, labels: &[L]) -> Result<Self> {
        if labels.len() != shape.cells() {
            return Err(Error::ShapeMismatch { expected: shape.to_string(), got: format!("{} cells", labels.len()) });
        }
        let mut ids: HashMap<L, usize> = HashMap::new();
        let colors = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        let num_colors = ids.len();
        Ok(Coloring { shape, colors, num_colors })
    }

    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("rows have different lengths".into()));
        }
        Coloring::new(NetworkShape::new(m, n)?, rows.concat())
    }

    /// Color `0` on cells where `red(i, j)` holds, color `1` elsewhere.
    pub fn two_color(shape: NetworkShape, red: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let labels: Vec<usize> =
            (0..shape.cells()).map(|k| usize::from(!red(k / shape.n, k % shape.n))).collect();
        Coloring::new(shape, labels)
    }

    pub fn constant(shape: NetworkShape) -> Self {
        Coloring { shape, colors: vec![0; shape.cells()], num_colors: 1 }
    }

    pub fn shape(&self) -> NetworkShape {
        self.shape
    }

    pub fn m(&self) -> usize {
        self.shape.m
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.colors[self.shape.index(i, j)]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.colors
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.colors[i * self.shape.n..(i + 1) * self.shape.n]
    }

    pub fn column(&self, j: usize) -> Vec<usize> {
        (0..self.shape.m).map(|i| self.get(i, j)).collect()
    }

    pub fn line(&self, axis: Axis, k: usize) -> Vec<usize> {
        match axis {
            Axis::Rows => self.row(k).to_vec(),
            Axis::Columns => self.column(k),
        }
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.shape.m).map(|i| self.row(i).to_vec()).collect()
    }

    /// Per-color counts in row `i`.
    pub fn row_counts(&self, i: usize) -> Vec<usize> {
        counts(self.row(i).iter().copied(), self.num_colors)
    }

    /// Per-color counts in column `j`.
    pub fn col_counts(&self, j: usize) -> Vec<usize> {
        counts((0..self.shape.m).map(|i| self.get(i, j)), self.num_colors)
    }

    /// Cells of each color, in row-major order.
    pub fn color_classes(&self) -> Vec<Vec<(usize, usize)>> {
        let mut classes = vec![Vec::new(); self.num_colors];
        for (k, &c) in self.colors.iter().enumerate() {
            classes[c].push((k / self.shape.n, k % self.shape.n));
        }
        classes
    }

    pub fn transpose(&self) -> Self {
        let (m, n) = (self.shape.m, self.shape.n);
        let colors = (0..m * n).map(|k| self.get(k % m, k / m)).collect();
        Coloring { shape: self.shape.transposed(), colors, num_colors: self.num_colors }
    }

    /// Group action: cell `(i, j)` moves to `(σ(i), τ(j))`. Color ids are kept.
    pub fn permuted(&self, rows: &Permutation, cols: &Permutation) -> Self {
        assert_eq!(rows.len(), self.shape.m);
        assert_eq!(cols.len(), self.shape.n);
        let (ri, ci) = (rows.inverse(), cols.inverse());
        let n = self.shape.n;
        let colors = (0..self.shape.cells()).map(|k| self.get(ri.apply(k / n), ci.apply(k % n))).collect();
        Coloring { shape: self.shape, colors, num_colors: self.num_colors }
    }

    /// Dense relabeling in row-major first-occurrence order.
    pub fn normalized(&self) -> Self {
        Coloring::from_labels(self.shape, &self.colors).expect("same shape")
    }

    /// Both row color-counts and column color-counts are constant.
    pub fn is_latin(&self) -> bool {
        is_latin_rectangle(&self.rows())
    }

    /// Visit every coloring of `shape` up to renaming of colors, as
    /// restricted-growth strings in row-major order (Bell(mn) of them).
    pub fn for_each(shape: NetworkShape, mut visit: impl FnMut(&Coloring)) {
        let cells = shape.cells();
        let mut c = Coloring { shape, colors: vec![0; cells], num_colors: 1 };
        // max_prefix[k] = 1 + max(colors[..=k])
        let mut max_prefix = vec![1usize; cells];
        loop {
            c.num_colors = max_prefix[cells - 1];
            visit(&c);
            // Increment the rightmost position that may grow.
            let mut k = cells - 1;
            loop {
                if k == 0 {
                    return;
                }
                let bound = max_prefix[k - 1];
                if c.colors[k] < bound {
                    c.colors[k] += 1;
                    max_prefix[k] = max_prefix[k - 1].max(c.colors[k] + 1);
                    for t in k + 1..cells {
                        c.colors[t] = 0;
                        max_prefix[t] = max_prefix[k];
                    }
                    break;
                }
                k -= 1;
            }
        }
    }
}

pub(crate) fn counts(ids: impl Iterator<Item = usize>, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for c in ids {
        out[c] += 1;
    }
    out
}

impl fmt::Display for Coloring {
    /// One line per row, space-separated ids.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.shape.m {
            let line: Vec<String> = self.row(i).iter().map(usize::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Coloring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("bad color id {t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Coloring::from_rows(rows)
    }
}

impl TryFrom<Vec<Vec<usize>>> for Coloring {
    type Error = Error;

    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        Coloring::from_rows(rows)
    }
}

impl From<Coloring> for Vec<Vec<usize>> {
    fn from(c: Coloring) -> Self {
        c.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(m: usize, n: usize) -> NetworkShape {
        NetworkShape::new(m, n).unwrap()
    }

    #[test]
    fn dense_ids_required() {
        assert!(Coloring::new(shape(2, 2), vec![0, 2, 2, 0]).is_err());
        assert!(Coloring::new(shape(2, 2), vec![0, 1, 1]).is_err());
        let c = Coloring::new(shape(2, 2), vec![1, 0, 0, 1]).unwrap();
        assert_eq!(c.num_colors(), 2);
        assert_eq!(c.normalized().as_slice(), &[0, 1, 1, 0]);
    }

    #[test]
    fn text_round_trip() {
        let c: Coloring = "0 1 2\n2 1 0\n".parse().unwrap();
        assert_eq!(c.shape(), shape(2, 3));
        assert_eq!(c.to_string().parse::<Coloring>().unwrap(), c);
        assert!("0 1\n1".parse::<Coloring>().is_err());
        assert!("0 x\n1 0".parse::<Coloring>().is_err());
    }

    #[test]
    fn json_is_rows() {
        let c: Coloring = "0 1\n1 0".parse().unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), "[[0,1],[1,0]]");
        let back: Coloring = serde_json::from_str("[[0,1],[1,0]]").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn permuted_moves_cells() {
        let c: Coloring = "0 1 2\n3 4 5".parse().unwrap();
        let sigma = Permutation::transposition(2, 0, 1);
        let tau = Permutation::from_images(vec![1, 2, 0]).unwrap();
        let p = c.permuted(&sigma, &tau);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(p.get(sigma.apply(i), tau.apply(j)), c.get(i, j));
            }
        }
        assert_eq!(c.transpose().transpose(), c);
        assert_eq!(c.transpose().get(2, 1), c.get(1, 2));
    }

    #[test]
    fn bell_numbers() {
        // Bell(4) = 15, Bell(6) = 203, Bell(9) = 21147
        for ((m, n), bell) in [((2, 2), 15), ((2, 3), 203), ((3, 3), 21147)] {
            let mut count = 0;
            let mut distinct = std::collections::HashSet::new();
            Coloring::for_each(shape(m, n), |c| {
                count += 1;
                assert_eq!(c, &Coloring::new(c.shape(), c.as_slice().to_vec()).unwrap());
                distinct.insert(c.clone());
            });
            assert_eq!(count, bell);
            assert_eq!(distinct.len(), bell);
        }
    }
}
