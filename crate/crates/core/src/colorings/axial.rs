use std::collections::BTreeSet;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::balance::{balance_witness, tiling_decomposition, LatinRectangleBlock};
use super::canonical::canonical_form;
use super::Coloring;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{NetworkShape, ValueMatrix};
use crate::scalar::{int, Field};
use crate::Rational;

/// Largest grid (in cells) accepted by [`enumerate_axial`].
pub const ENUMERATION_CELL_LIMIT: usize = 42;

/// Dimension of the space of color-constant matrices whose row and column sums
/// all vanish, by exact rank of the `(m + n) × colors` count system.
pub fn dim_vd_intersection(c: &Coloring) -> usize {
    let k = c.num_colors();
    let to_q = |v: Vec<usize>| v.into_iter().map(|x| Rational::from_integer((x as i64).into())).collect::<Vec<_>>();
    let mut system: Vec<Vec<Rational>> = (0..c.m()).map(|i| to_q(c.row_counts(i))).collect();
    system.extend((0..c.n()).map(|j| to_q(c.col_counts(j))));
    k - linalg::rank(&system)
}

/// Balanced, and meets the dissensus subspace in a line.
pub fn is_axial_vd(c: &Coloring) -> bool {
    balance_witness(c).is_none() && dim_vd_intersection(c) == 1
}

/// Structural case of an axial coloring relative to the dissensus subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxialCase {
    /// Constant column bands beside a two-color Latin block.
    A,
    /// Constant row bands above a two-color Latin block.
    B,
    /// Two row bands by two column bands, each block a single color.
    C,
}

/// Leading block of a case-C coloring: `rows × cols` carries the reference color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Split {
    pub fn r(&self) -> usize {
        self.rows.len()
    }

    pub fn s(&self) -> usize {
        self.cols.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxialColoring {
    pub case: AxialCase,
    pub coloring: Coloring,
    /// Columns (case A) or rows (case B) outside the Latin block.
    pub zero_block: Option<Vec<usize>>,
    pub latin_block: Option<LatinRectangleBlock>,
    /// Minority color of the Latin block (lower id on ties), and the other one.
    pub red: Option<usize>,
    pub blue: Option<usize>,
    pub split: Option<Split>,
    /// Fraction of red cells in each row (equivalently each column) of the Latin block.
    pub rho: Option<Rational>,
    /// Distinct colors take distinct values on the axial line, i.e. no coarser
    /// coloring has the same intersection with the dissensus subspace.
    pub minimal: bool,
}

impl AxialColoring {
    pub fn from_coloring(c: &Coloring) -> Result<Self> {
        if let Some(w) = balance_witness(c) {
            return Err(w.into());
        }
        let dim = dim_vd_intersection(c);
        if dim != 1 {
            return Err(Error::Precondition(format!("not axial: intersection with the dissensus subspace has dimension {dim}")));
        }
        let tiling = tiling_decomposition(c)?;
        let (s, t) = (tiling.row_bands.len(), tiling.col_bands.len());
        let mut a = AxialColoring {
            case: AxialCase::C,
            coloring: c.clone(),
            zero_block: None,
            latin_block: None,
            red: None,
            blue: None,
            split: None,
            rho: None,
            minimal: false,
        };
        if s == 2 && t == 2 {
            a.split = Some(Split { rows: tiling.row_bands[0].clone(), cols: tiling.col_bands[0].clone() });
        } else if s == 1 || t == 1 {
            a.case = if s == 1 { AxialCase::A } else { AxialCase::B };
            let two_color: Vec<&LatinRectangleBlock> = tiling.blocks.iter().filter(|b| b.palette().len() == 2).collect();
            let [block] = two_color.as_slice() else {
                return Err(Error::Precondition("expected exactly one two-color block".into()));
            };
            let mut zero: Vec<usize> = match a.case {
                AxialCase::A => (0..c.n()).filter(|j| !block.cols.contains(j)).collect(),
                _ => (0..c.m()).filter(|i| !block.rows.contains(i)).collect(),
            };
            zero.sort_unstable();
            a.zero_block = (!zero.is_empty()).then_some(zero);
            let palette = block.palette();
            let width = block.cols.len();
            let first = block.colors[0].iter().filter(|&&x| x == palette[0]).count();
            let (red, blue, count) =
                if 2 * first <= width { (palette[0], palette[1], first) } else { (palette[1], palette[0], width - first) };
            a.red = Some(red);
            a.blue = Some(blue);
            a.rho = Some(Rational::new((count as i64).into(), (width as i64).into()));
            a.latin_block = Some((*block).clone());
        } else {
            return Err(Error::Precondition(format!("axial coloring with {s} row bands and {t} column bands")));
        }
        let values = axial_values::<Rational>(&a, Rational::one())?;
        a.minimal = distinct_values(&a.coloring, &values) == a.coloring.num_colors();
        Ok(a)
    }

    pub fn shape(&self) -> NetworkShape {
        self.coloring.shape()
    }
}

fn distinct_values(c: &Coloring, values: &ValueMatrix<Rational>) -> usize {
    let mut per_color: Vec<Option<&Rational>> = vec![None; c.num_colors()];
    for (k, v) in values.as_slice().iter().enumerate() {
        per_color[c.as_slice()[k]] = Some(v);
    }
    per_color.into_iter().flatten().collect::<BTreeSet<_>>().len()
}

fn ratio<T: Field>(p: usize, q: usize) -> T {
    int::<T>(p as i64) / int::<T>(q as i64)
}

/// The point of the axial line with the reference value equal to `amplitude`:
/// the red value in cases A and B, the leading block value in case C.
pub fn axial_values<T: Field>(a: &AxialColoring, amplitude: T) -> Result<ValueMatrix<T>> {
    if amplitude.is_zero() {
        return Err(Error::InvalidParameter("amplitude must be nonzero".into()));
    }
    let c = &a.coloring;
    let (m, n) = (c.m(), c.n());
    match a.case {
        AxialCase::A | AxialCase::B => {
            let (red, blue) = a.red.zip(a.blue).ok_or_else(|| Error::Precondition("missing Latin block colors".into()))?;
            let rho = a.rho.as_ref().ok_or_else(|| Error::Precondition("missing red fraction".into()))?;
            let (p, q) = (to_usize(rho.numer()), to_usize(rho.denom()));
            let blue_value = -(ratio::<T>(p, q - p) * amplitude.clone());
            Ok(ValueMatrix::from_fn(c.shape(), |i, j| match c.get(i, j) {
                x if x == red => amplitude.clone(),
                x if x == blue => blue_value.clone(),
                _ => T::zero(),
            }))
        }
        AxialCase::C => {
            let split = a.split.as_ref().ok_or_else(|| Error::Precondition("missing split".into()))?;
            let (r, s) = (split.r(), split.s());
            let along_row = ratio::<T>(s, n - s);
            let along_col = ratio::<T>(r, m - r);
            Ok(ValueMatrix::from_fn(c.shape(), |i, j| {
                let (top, left) = (split.rows.contains(&i), split.cols.contains(&j));
                let factor = match (top, left) {
                    (true, true) => T::one(),
                    (true, false) => -along_row.clone(),
                    (false, true) => -along_col.clone(),
                    (false, false) => along_row.clone() * along_col.clone(),
                };
                factor * amplitude.clone()
            }))
        }
    }
}

fn to_usize(v: &num_bigint::BigInt) -> usize {
    usize::try_from(v).expect("small red fraction")
}

/// Nonincreasing integer partitions of `n` with parts at most `max`.
fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Two-color Latin `rows × q` blocks as multisets of red row-sets (bitmasks),
/// one per column, with every row covered equally often. Red is the color with
/// at most half of each column.
fn latin_blocks(rows: usize, q: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for b in 1..=rows / 2 {
        if (b * q) % rows != 0 {
            continue;
        }
        let cover = b * q / rows;
        let subsets: Vec<u64> = (0u64..1 << rows).filter(|s| s.count_ones() as usize == b).collect();
        let mut chosen = Vec::with_capacity(q);
        let mut load = vec![0usize; rows];
        fill(&subsets, 0, q, cover, &mut chosen, &mut load, &mut out);
    }
    out
}

fn fill(subsets: &[u64], from: usize, q: usize, cover: usize, chosen: &mut Vec<u64>, load: &mut [usize], out: &mut Vec<Vec<u64>>) {
    if chosen.len() == q {
        out.push(chosen.clone());
        return;
    }
    for (idx, &s) in subsets.iter().enumerate().skip(from) {
        let rows = load.len();
        let bits = move || (0..rows).filter(move |&i| s >> i & 1 == 1);
        if bits().any(|i| load[i] == cover) {
            continue;
        }
        bits().for_each(|i| load[i] += 1);
        chosen.push(s);
        fill(subsets, idx, q, cover, chosen, load, out);
        chosen.pop();
        bits().for_each(|i| load[i] -= 1);
    }
}

/// Case-A colorings of `shape`: a two-color Latin block followed by constant
/// column bands of distinct colors.
fn case_a(shape: NetworkShape, found: &mut BTreeSet<Coloring>) -> Result<()> {
    let (m, n) = (shape.m, shape.n);
    for q in 2..=n {
        let mut blocks = BTreeSet::new();
        for cols in latin_blocks(m, q) {
            let block = Coloring::two_color(NetworkShape::new(m, q)?, |i, j| cols[j] >> i & 1 == 1)?;
            blocks.insert(canonical_form(&block)?);
        }
        for block in &blocks {
            for bands in partitions(n - q, n - q) {
                let mut labels = vec![0usize; m * n];
                for i in 0..m {
                    for j in 0..q {
                        labels[i * n + j] = block.get(i, j);
                    }
                    let mut j = q;
                    for (b, &width) in bands.iter().enumerate() {
                        for _ in 0..width {
                            labels[i * n + j] = 2 + b;
                            j += 1;
                        }
                    }
                }
                found.insert(canonical_form(&Coloring::new(shape, labels)?)?);
            }
        }
    }
    Ok(())
}

/// Every axial coloring relative to the dissensus subspace, one canonical
/// representative per conjugacy class, sorted by canonical form.
///
/// The list is complete: it includes non-minimal colorings such as several
/// constant bands of distinct colors, which refine a minimal entry without
/// changing its axial line.
pub fn enumerate_axial(shape: NetworkShape) -> Result<Vec<AxialColoring>> {
    if shape.cells() > ENUMERATION_CELL_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "axial enumeration is limited to {ENUMERATION_CELL_LIMIT} cells, {shape} has {}",
            shape.cells()
        )));
    }
    let (m, n) = (shape.m, shape.n);
    let mut found = BTreeSet::new();
    for r in 1..m {
        for s in 1..n {
            let labels: Vec<usize> = (0..m * n).map(|k| 2 * usize::from(k / n >= r) + usize::from(k % n >= s)).collect();
            found.insert(canonical_form(&Coloring::new(shape, labels)?.normalized())?);
        }
    }
    case_a(shape, &mut found)?;
    let mut transposed = BTreeSet::new();
    case_a(shape.transposed(), &mut transposed)?;
    for c in transposed {
        found.insert(canonical_form(&c.transpose())?);
    }
    found.iter().map(AxialColoring::from_coloring).collect()
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;

    use super::*;
    use crate::colorings::balance::is_balanced;

    fn col(s: &str) -> Coloring {
        s.parse().unwrap()
    }

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dim_vd_intersection(&Coloring::constant(NetworkShape::new(3, 3).unwrap())), 0);
        assert_eq!(dim_vd_intersection(&col("0 1\n1 0")), 1);
        assert!(is_axial_vd(&col("0 1\n1 0")));
        assert!(is_axial_vd(&col("0 0 1 1\n1 1 0 0")));
    }

    #[test]
    fn dimension_law_small_grids() {
        for (m, n) in [(2, 2), (2, 3), (3, 3), (2, 4), (2, 5)] {
            Coloring::for_each(NetworkShape::new(m, n).unwrap(), |c| {
                if is_balanced(c) {
                    let t = tiling_decomposition(c).unwrap();
                    assert_eq!(dim_vd_intersection(c) as i64, t.dimension_count(), "{c}");
                }
            });
        }
    }

    #[test]
    fn coarsening_pair_shares_its_line() {
        let coarse = AxialColoring::from_coloring(&col("0 1 2 2\n1 0 2 2")).unwrap();
        let fine = AxialColoring::from_coloring(&col("0 1 2 3\n1 0 2 3")).unwrap();
        assert!(coarse.minimal);
        assert!(!fine.minimal);
        let a = axial_values::<Rational>(&coarse, Rational::one()).unwrap();
        let b = axial_values::<Rational>(&fine, Rational::one()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.as_slice()[..4], [q(1, 1), q(-1, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn case_a_half_fraction() {
        let a = AxialColoring::from_coloring(&col("0 1 2\n1 0 2")).unwrap();
        assert_eq!(a.case, AxialCase::A);
        assert_eq!(a.rho, Some(q(1, 2)));
        assert_eq!(a.zero_block, Some(vec![2]));
        let z = axial_values::<Rational>(&a, Rational::one()).unwrap();
        assert_eq!(z.row(0), &[q(1, 1), q(-1, 1), q(0, 1)]);
    }

    #[test]
    fn case_c_ratios() {
        // 3x4 with a 1x1 leading block.
        let c = col("0 1 1 1\n2 3 3 3\n2 3 3 3");
        let a = AxialColoring::from_coloring(&c).unwrap();
        assert_eq!(a.case, AxialCase::C);
        let z = axial_values::<Rational>(&a, Rational::one()).unwrap();
        assert_eq!((z.get(0, 0), z.get(0, 1), z.get(1, 0), z.get(1, 1)), (q(1, 1), q(-1, 3), q(-1, 2), q(1, 6)));
        assert!(z.row_sums().iter().chain(z.col_sums().iter()).all(Zero::is_zero));
    }

    #[test]
    fn case_b_is_transposed_a() {
        let a = AxialColoring::from_coloring(&col("0 1\n1 0\n2 2")).unwrap();
        assert_eq!(a.case, AxialCase::B);
        assert_eq!(a.zero_block, Some(vec![2]));
    }

    #[test]
    fn rejects_non_axial() {
        assert!(AxialColoring::from_coloring(&col("0 1 2\n0 1 2")).is_err());
        assert!(AxialColoring::from_coloring(&col("0 1\n1 1")).is_err());
    }

    #[test]
    fn two_by_two_catalog() {
        let cat = enumerate_axial(NetworkShape::new(2, 2).unwrap()).unwrap();
        let colors: Vec<usize> = cat.iter().map(|a| a.coloring.num_colors()).collect();
        assert_eq!(colors.len(), 2);
        assert!(colors.contains(&2) && colors.contains(&4));
    }

    #[test]
    fn two_row_latin_blocks_are_half_and_half() {
        for n in 2..=7 {
            for a in enumerate_axial(NetworkShape::new(2, n).unwrap()).unwrap() {
                assert_ne!(a.case, AxialCase::B);
                if let Some(block) = &a.latin_block {
                    let k = block.cols.len();
                    assert_eq!(k % 2, 0);
                    assert_eq!(a.rho, Some(q(1, 2)));
                    assert_eq!(a.zero_block.is_none(), k == n);
                }
            }
        }
    }

    #[test]
    fn three_by_six_third_fraction() {
        let cat = enumerate_axial(NetworkShape::new(3, 6).unwrap()).unwrap();
        let thirds: Vec<&AxialColoring> = cat.iter().filter(|a| a.case == AxialCase::A && a.rho == Some(q(1, 3))).collect();
        assert!(!thirds.is_empty());
        for a in thirds {
            assert_eq!(a.latin_block.as_ref().unwrap().cols.len() % 3, 0);
        }
        assert!(cat.iter().all(|a| is_axial_vd(&a.coloring)));
    }

    #[test]
    fn guard() {
        assert!(matches!(enumerate_axial(NetworkShape::new(5, 9).unwrap()), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn partitions_count() {
        assert_eq!(partitions(5, 5).len(), 7);
        assert_eq!(partitions(0, 0), vec![Vec::<usize>::new()]);
    }
}
