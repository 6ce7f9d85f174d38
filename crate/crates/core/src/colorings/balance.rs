use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{counts, Coloring};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Two same-colored cells whose inputs along one arrow type differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BalanceWitness {
    pub first: (usize, usize),
    pub second: (usize, usize),
    /// `"row"`, `"column"` or `"diagonal"`.
    pub arrow: &'static str,
}

impl From<BalanceWitness> for Error {
    fn from(w: BalanceWitness) -> Self {
        Error::Unbalanced { first: w.first, second: w.second, arrow: w.arrow }
    }
}

/// Color counts of the row, column and diagonal inputs of cell `(i, j)`.
fn input_counts(c: &Coloring, rows: &[Vec<usize>], cols: &[Vec<usize>], total: &[usize], i: usize, j: usize)
    -> [Vec<usize>; 3] {
    let own = c.get(i, j);
    let mut row = rows[i].clone();
    row[own] -= 1;
    let mut col = cols[j].clone();
    col[own] -= 1;
    // Diagonal inputs: everything outside row i and column j.
    let diag = (0..total.len()).map(|k| total[k] + usize::from(k == own) - rows[i][k] - cols[j][k]).collect();
    [row, col, diag]
}

/// First pair of same-colored cells with different input multisets, if any.
pub fn balance_witness(c: &Coloring) -> Option<BalanceWitness> {
    let k = c.num_colors();
    let rows: Vec<Vec<usize>> = (0..c.m()).map(|i| c.row_counts(i)).collect();
    let cols: Vec<Vec<usize>> = (0..c.n()).map(|j| c.col_counts(j)).collect();
    let total = counts(c.as_slice().iter().copied(), k);
    let mut reference: Vec<Option<((usize, usize), [Vec<usize>; 3])>> = vec![None; k];
    for i in 0..c.m() {
        for j in 0..c.n() {
            let sig = input_counts(c, &rows, &cols, &total, i, j);
            match &reference[c.get(i, j)] {
                None => reference[c.get(i, j)] = Some(((i, j), sig)),
                Some((first, r)) => {
                    for (t, arrow) in ["row", "column", "diagonal"].into_iter().enumerate() {
                        if r[t] != sig[t] {
                            return Some(BalanceWitness { first: *first, second: (i, j), arrow });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Same-colored cells have the same color multiset of inputs along each arrow type.
pub fn is_balanced(c: &Coloring) -> bool {
    balance_witness(c).is_none()
}

/// Each color occurs equally often in every row, and equally often in every column.
pub fn is_latin_rectangle(rows: &[Vec<usize>]) -> bool {
    fn tally(line: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
        let mut t = BTreeMap::new();
        for c in line {
            *t.entry(c).or_insert(0) += 1;
        }
        t
    }
    let Some(first) = rows.first() else { return true };
    let width = first.len();
    if rows.iter().any(|r| r.len() != width) {
        return false;
    }
    let r0 = tally(first.iter().copied());
    if rows.iter().any(|r| tally(r.iter().copied()) != r0) {
        return false;
    }
    let c0 = tally(rows.iter().map(|r| r[0]));
    (1..width).all(|j| tally(rows.iter().map(|r| r[j])) == c0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatinRectangleBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Sub-array of original color ids, `colors[a][b]` at `(rows[a], cols[b])`.
    pub colors: Vec<Vec<usize>>,
}

impl LatinRectangleBlock {
    pub fn of(c: &Coloring, rows: Vec<usize>, cols: Vec<usize>) -> Self {
        let colors = rows.iter().map(|&i| cols.iter().map(|&j| c.get(i, j)).collect()).collect();
        LatinRectangleBlock { rows, cols, colors }
    }

    /// Sorted distinct colors in the block.
    pub fn palette(&self) -> Vec<usize> {
        self.colors.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn is_latin(&self) -> bool {
        is_latin_rectangle(&self.colors)
    }
}

/// Grid tiling of a balanced coloring: row bands group rows with equal color
/// multisets, column bands likewise, and each band × band block is Latin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleTiling {
    pub row_bands: Vec<Vec<usize>>,
    pub col_bands: Vec<Vec<usize>>,
    /// Band-major: block `(a, b)` is at `a * col_bands.len() + b`.
    pub blocks: Vec<LatinRectangleBlock>,
    /// Permutations that make every band contiguous (see [`Coloring::permuted`]).
    pub conjugation: (Permutation, Permutation),
}

impl RectangleTiling {
    pub fn block(&self, a: usize, b: usize) -> &LatinRectangleBlock {
        &self.blocks[a * self.col_bands.len() + b]
    }

    /// `Σ n_ab − s − t + 1` with `n_ab` the number of colors in block `(a, b)`.
    pub fn dimension_count(&self) -> i64 {
        let colors: usize = self.blocks.iter().map(|b| b.palette().len()).sum();
        colors as i64 - self.row_bands.len() as i64 - self.col_bands.len() as i64 + 1
    }

    pub fn conjugated(&self, c: &Coloring) -> Coloring {
        c.permuted(&self.conjugation.0, &self.conjugation.1)
    }
}

/// Group line indices by equal color-count vectors, in order of first index.
fn bands(profiles: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut seen: BTreeMap<&[usize], usize> = BTreeMap::new();
    for (i, p) in profiles.iter().enumerate() {
        match seen.get(p.as_slice()) {
            Some(&b) => out[b].push(i),
            None => {
                seen.insert(p, out.len());
                out.push(vec![i]);
            }
        }
    }
    out
}

fn band_permutation(bands: &[Vec<usize>], len: usize) -> Permutation {
    let mut images = vec![0; len];
    for (pos, &i) in bands.iter().flatten().enumerate() {
        images[i] = pos;
    }
    Permutation::from_images(images).expect("bands partition the lines")
}

/// Decompose into Latin blocks with pairwise disjoint palettes. Fails exactly
/// when the coloring is unbalanced; the error carries a witness pair.
pub fn tiling_decomposition(c: &Coloring) -> Result<RectangleTiling> {
    let row_bands = bands(&(0..c.m()).map(|i| c.row_counts(i)).collect::<Vec<_>>());
    let col_bands = bands(&(0..c.n()).map(|j| c.col_counts(j)).collect::<Vec<_>>());
    let mut blocks = Vec::with_capacity(row_bands.len() * col_bands.len());
    let mut owner: Vec<Option<usize>> = vec![None; c.num_colors()];
    let mut ok = true;
    for rb in &row_bands {
        for cb in &col_bands {
            let block = LatinRectangleBlock::of(c, rb.clone(), cb.clone());
            ok &= block.is_latin();
            for color in block.palette() {
                match owner[color] {
                    Some(b) if b != blocks.len() => ok = false,
                    _ => owner[color] = Some(blocks.len()),
                }
            }
            blocks.push(block);
        }
    }
    if !ok {
        return Err(match balance_witness(c) {
            Some(w) => w.into(),
            None => Error::Precondition("tiling check failed on a balanced coloring".into()),
        });
    }
    let conjugation = (band_permutation(&row_bands, c.m()), band_permutation(&col_bands, c.n()));
    Ok(RectangleTiling { row_bands, col_bands, blocks, conjugation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::NetworkShape;

    fn col(s: &str) -> Coloring {
        s.parse().unwrap()
    }

    #[test]
    fn three_color_latin_rectangle() {
        let c = col("0 0 1 1 2 2\n1 1 2 2 0 0\n2 2 0 0 1 1");
        assert!(c.is_latin());
        assert!(is_balanced(&c));
        let t = tiling_decomposition(&c).unwrap();
        assert_eq!(t.blocks.len(), 1);
        assert_eq!(t.dimension_count(), 2);
    }

    #[test]
    fn column_balanced_only() {
        // Every column holds one of each color; rows have different counts.
        let c = col("0 2 1 2\n1 0 2 1\n2 1 0 0");
        assert!(!c.is_latin());
        let w = balance_witness(&c).unwrap();
        assert_eq!(w.arrow, "row");
        assert!(matches!(tiling_decomposition(&c), Err(Error::Unbalanced { .. })));
    }

    #[test]
    fn constant_is_one_block() {
        let c = Coloring::constant(NetworkShape::new(3, 4).unwrap());
        let t = tiling_decomposition(&c).unwrap();
        assert_eq!(t.blocks.len(), 1);
        assert_eq!(t.dimension_count(), 0);
    }

    #[test]
    fn block_tiling_is_contiguous_after_conjugation() {
        // Columns 0 and 2 form the two-color Latin band; column 1 is constant.
        let c = col("0 2 1\n1 2 0");
        let t = tiling_decomposition(&c).unwrap();
        assert_eq!(t.col_bands, vec![vec![0, 2], vec![1]]);
        let conj = t.conjugated(&c);
        assert_eq!(conj.column(2), vec![2, 2]);
        assert!(t.blocks.iter().all(LatinRectangleBlock::is_latin));
    }

    #[test]
    fn latin_examples() {
        assert!(is_latin_rectangle(&[vec![0, 1], vec![1, 0]]));
        assert!(!is_latin_rectangle(&[vec![0, 1], vec![0, 1]]));
        assert!(is_latin_rectangle(&[]));
        assert!(is_latin_rectangle(&[vec![3, 3, 3]]));
    }
}
