use std::cmp::Ordering;

use super::Coloring;
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Largest `min(m, n)` for which the row-order loop is attempted.
pub const CANONICAL_FACTORIAL_LIMIT: usize = 9;

/// Canonical representative of the conjugacy class of `c` under row and column
/// permutations and renaming of colors.
///
/// For `m ≤ n` this is the coloring whose column-major sequence, after
/// relabeling colors in first-occurrence order, is lexicographically least;
/// taller shapes use the transpose of the same construction. Either way two
/// colorings are conjugate iff their canonical forms are equal.
pub fn canonical_form(c: &Coloring) -> Result<Coloring> {
    if c.m() > c.n() {
        return Ok(canonical_form(&c.transpose())?.transpose());
    }
    let m = c.m();
    if m > CANONICAL_FACTORIAL_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "canonical form needs {m}! row orders (limit {CANONICAL_FACTORIAL_LIMIT}!)"
        )));
    }
    let mut best: Option<Vec<usize>> = None;
    for order in Permutation::all(m) {
        let mut distinct: Vec<(Vec<usize>, usize)> = Vec::new();
        for j in 0..c.n() {
            let col: Vec<usize> = order.images().iter().map(|&i| c.get(i, j)).collect();
            match distinct.iter_mut().find(|(v, _)| *v == col) {
                Some((_, count)) => *count += 1,
                None => distinct.push((col, 1)),
            }
        }
        let mut search = Search {
            columns: distinct.iter().map(|(v, _)| v.clone()).collect(),
            remaining: distinct.iter().map(|&(_, k)| k).collect(),
            map: vec![usize::MAX; c.num_colors()],
            next: 0,
            prefix: Vec::with_capacity(c.shape().cells()),
            total: c.n(),
        };
        search.run(&mut best);
    }
    let flat = best.expect("at least one row order");
    let shape = c.shape();
    let colors = (0..shape.cells()).map(|k| flat[(k % shape.n) * m + k / shape.n]).collect();
    Coloring::new(shape, colors)
}

struct Search {
    columns: Vec<Vec<usize>>,
    remaining: Vec<usize>,
    map: Vec<usize>,
    next: usize,
    prefix: Vec<usize>,
    total: usize,
}

impl Search {
    fn relabel(&self, col: &[usize]) -> Vec<usize> {
        let mut map = self.map.clone();
        let mut next = self.next;
        col.iter()
            .map(|&c| {
                if map[c] == usize::MAX {
                    map[c] = next;
                    next += 1;
                }
                map[c]
            })
            .collect()
    }

    fn run(&mut self, best: &mut Option<Vec<usize>>) {
        let m = self.columns[0].len();
        let depth = self.prefix.len() / m;
        if depth == self.total {
            if best.as_ref().map_or(true, |b| self.prefix < *b) {
                *best = Some(self.prefix.clone());
            }
            return;
        }
        let candidates: Vec<(usize, Vec<usize>)> = (0..self.columns.len())
            .filter(|&d| self.remaining[d] > 0)
            .map(|d| (d, self.relabel(&self.columns[d])))
            .collect();
        let least = candidates.iter().map(|(_, v)| v).min().expect("a column remains").clone();
        if let Some(b) = best {
            let end = self.prefix.len() + m;
            let ord = self.prefix.iter().chain(&least).cmp(b[..end].iter());
            if ord == Ordering::Greater {
                return;
            }
        }
        for (d, v) in candidates {
            if v != least {
                continue;
            }
            let saved = (self.map.clone(), self.next);
            for (&orig, &label) in self.columns[d].iter().zip(&v) {
                if self.map[orig] == usize::MAX {
                    self.map[orig] = label;
                    self.next = self.next.max(label + 1);
                }
            }
            self.remaining[d] -= 1;
            self.prefix.extend_from_slice(&v);
            self.run(best);
            self.prefix.truncate(self.prefix.len() - m);
            self.remaining[d] += 1;
            (self.map, self.next) = saved;
        }
    }
}
