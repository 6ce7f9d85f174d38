use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::Coloring;
use crate::error::{Error, Result};
use crate::perm::{factorial, Permutation};

/// Upper bound on `min(m, n)! · m · n` work for [`isotropy_subgroup`].
pub const ISOTROPY_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    /// The coloring is the fixed-point pattern of its isotropy subgroup.
    Orbital,
    /// The isotropy subgroup fixes a strictly coarser pattern.
    Exotic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub group_order: u128,
    /// `(row permutation, column permutation)` pairs generating the subgroup.
    pub generators: Vec<(Permutation, Permutation)>,
    /// Cell orbits, each sorted, ordered by first cell.
    pub orbit_partition: Vec<Vec<(usize, usize)>>,
    pub verdict: Verdict,
}

impl IsotropyReport {
    /// Coloring by orbits: the synchrony pattern of the fixed-point subspace.
    pub fn fixed_pattern(&self, like: &Coloring) -> Coloring {
        let mut labels = vec![0usize; like.shape().cells()];
        for (o, cells) in self.orbit_partition.iter().enumerate() {
            for &(i, j) in cells {
                labels[like.shape().index(i, j)] = o;
            }
        }
        Coloring::from_labels(like.shape(), &labels).expect("same shape")
    }
}

/// `(σ, τ)` maps the coloring to itself: `c(σ(i), τ(j)) = c(i, j)` everywhere.
pub fn preserves(c: &Coloring, rows: &Permutation, cols: &Permutation) -> bool {
    (0..c.m()).all(|i| (0..c.n()).all(|j| c.get(rows.apply(i), cols.apply(j)) == c.get(i, j)))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// All `(σ, τ) ∈ S_m × S_n` preserving `c`.
///
/// Loops over permutations of the shorter side. For a fixed row permutation a
/// column can only go to a column whose content matches its image, so the
/// admissible column maps are products of permutations inside classes of
/// identical columns.
pub fn isotropy_subgroup(c: &Coloring) -> Result<IsotropyReport> {
    if c.m() > c.n() {
        let t = isotropy_subgroup(&c.transpose())?;
        let swap = |cells: Vec<(usize, usize)>| {
            let mut v: Vec<(usize, usize)> = cells.into_iter().map(|(i, j)| (j, i)).collect();
            v.sort_unstable();
            v
        };
        let mut orbit_partition: Vec<Vec<(usize, usize)>> = t.orbit_partition.into_iter().map(swap).collect();
        orbit_partition.sort();
        return Ok(IsotropyReport {
            group_order: t.group_order,
            generators: t.generators.into_iter().map(|(a, b)| (b, a)).collect(),
            orbit_partition,
            verdict: t.verdict,
        });
    }
    let (m, n) = (c.m(), c.n());
    let work = factorial(m).saturating_mul((m * n) as u128);
    if work > ISOTROPY_BUDGET {
        return Err(Error::BudgetExceeded(format!("isotropy search over {m}! row permutations")));
    }
    let mut contents: Vec<Vec<usize>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        let col = c.column(j);
        match contents.iter().position(|x| *x == col) {
            Some(d) => members[d].push(j),
            None => {
                contents.push(col);
                members.push(vec![j]);
            }
        }
    }
    let within: u128 = members.iter().map(|g| factorial(g.len())).product();

    let mut order = 0u128;
    let mut valid: Vec<(Permutation, Permutation)> = Vec::new();
    'sigma: for sigma in Permutation::all(m) {
        let mut tau = vec![0usize; n];
        for (d, content) in contents.iter().enumerate() {
            let mut image = vec![0usize; m];
            for (i, &x) in content.iter().enumerate() {
                image[sigma.apply(i)] = x;
            }
            let Some(e) = contents.iter().position(|x| *x == image) else { continue 'sigma };
            if members[e].len() != members[d].len() {
                continue 'sigma;
            }
            for (&from, &to) in members[d].iter().zip(&members[e]) {
                tau[from] = to;
            }
        }
        order += within;
        valid.push((sigma, Permutation::from_images(tau).expect("class bijection")));
    }

    let mut uf = UnionFind((0..m * n).collect());
    for (s, t) in &valid {
        for i in 0..m {
            for j in 0..n {
                uf.union(i * n + j, s.apply(i) * n + t.apply(j));
            }
        }
    }
    let mut generators: Vec<(Permutation, Permutation)> = Vec::new();
    let mut reached: HashSet<Permutation> = HashSet::from([Permutation::identity(m)]);
    for (s, t) in &valid {
        if !reached.contains(s) {
            generators.push((s.clone(), t.clone()));
            let row_parts: Vec<(Permutation, Permutation)> =
                generators.iter().map(|(a, _)| (a.clone(), Permutation::identity(1))).collect();
            reached = group_closure(&row_parts).into_iter().map(|(a, _)| a).collect();
        }
    }
    for g in &members {
        for w in g.windows(2) {
            generators.push((Permutation::identity(m), Permutation::transposition(n, w[0], w[1])));
            for i in 0..m {
                uf.union(i * n + w[0], i * n + w[1]);
            }
        }
    }

    let mut orbit_of = vec![usize::MAX; m * n];
    let mut orbit_partition: Vec<Vec<(usize, usize)>> = Vec::new();
    for k in 0..m * n {
        let root = uf.find(k);
        if orbit_of[root] == usize::MAX {
            orbit_of[root] = orbit_partition.len();
            orbit_partition.push(Vec::new());
        }
        orbit_partition[orbit_of[root]].push((k / n, k % n));
    }
    let verdict = if orbit_partition.len() == c.num_colors() { Verdict::Orbital } else { Verdict::Exotic };
    Ok(IsotropyReport { group_order: order, generators, orbit_partition, verdict })
}

pub fn classify_orbital_exotic(c: &Coloring) -> Result<Verdict> {
    Ok(isotropy_subgroup(c)?.verdict)
}

/// Every product of the generators, by breadth-first search.
pub fn group_closure(generators: &[(Permutation, Permutation)]) -> HashSet<(Permutation, Permutation)> {
    let Some((s0, t0)) = generators.first() else { return HashSet::new() };
    let identity = (Permutation::identity(s0.len()), Permutation::identity(t0.len()));
    let mut seen = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some((s, t)) = queue.pop_front() {
        for (gs, gt) in generators {
            let next = (gs.compose(&s), gt.compose(&t));
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Counts `μ_1..μ_6` of the two-red column types of a `4 × n` two-color Latin
/// rectangle with equal proportions, red being color 0. In order, the red rows
/// are {1,2}, {3,4}, {1,4}, {2,3}, {1,3}, {2,4} (1-based), so consecutive
/// types form color-complementary pairs.
pub fn column_type_multiplicities(c: &Coloring) -> Result<[usize; 6]> {
    if c.m() != 4 || c.num_colors() != 2 {
        return Err(Error::Precondition(format!("need a 4-row two-color coloring, got {} with {} colors", c.shape(), c.num_colors())));
    }
    if !c.is_latin() || c.color_classes()[0].len() * 2 != c.shape().cells() {
        return Err(Error::Precondition("need a Latin rectangle with equal color proportions".into()));
    }
    const TYPES: [u8; 6] = [0b0011, 0b1100, 0b1001, 0b0110, 0b0101, 0b1010];
    let mut mu = [0usize; 6];
    for j in 0..c.n() {
        let mask = (0..4).filter(|&i| c.get(i, j) == 0).fold(0u8, |acc, i| acc | 1 << i);
        let t = TYPES.iter().position(|&x| x == mask).expect("two red cells per column");
        mu[t] += 1;
    }
    if mu[0] != mu[1] || mu[2] != mu[3] || mu[4] != mu[5] {
        return Err(Error::Precondition(format!("complementary column types occur unequally: {mu:?}")));
    }
    Ok(mu)
}

/// Sufficient test for exoticity: two color-complementary column pairs that
/// both occur have different multiplicities. Pairs that do not occur are
/// ignored, since a single occurring pair gives an orbital pattern.
pub fn exotic_sufficient_4xn(c: &Coloring) -> Result<bool> {
    let mu = column_type_multiplicities(c)?;
    let present: Vec<usize> = [mu[0], mu[2], mu[4]].into_iter().filter(|&k| k > 0).collect();
    Ok(present.iter().any(|&k| k != present[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::NetworkShape;

    fn col(s: &str) -> Coloring {
        s.parse().unwrap()
    }

    fn brute_order(c: &Coloring) -> u128 {
        let mut k = 0;
        for s in Permutation::all(c.m()) {
            for t in Permutation::all(c.n()) {
                k += u128::from(preserves(c, &s, &t));
            }
        }
        k
    }

    #[test]
    fn constant_has_full_group() {
        let c = Coloring::constant(NetworkShape::new(3, 4).unwrap());
        let r = isotropy_subgroup(&c).unwrap();
        assert_eq!(r.group_order, 6 * 24);
        assert_eq!(r.verdict, Verdict::Orbital);
        assert_eq!(group_closure(&r.generators).len(), 144);
    }

    #[test]
    fn orders_match_brute_force() {
        for s in ["0 1\n1 0", "0 0 1 1\n1 1 0 0", "0 1 2\n1 2 0\n2 0 1", "0 1 1\n2 3 3\n2 3 3", "0 1\n1 0\n2 2"] {
            let c = col(s);
            let r = isotropy_subgroup(&c).unwrap();
            assert_eq!(r.group_order, brute_order(&c), "{c}");
            let closure = group_closure(&r.generators);
            assert_eq!(closure.len() as u128, r.group_order, "{c}");
            assert!(closure.iter().all(|(a, b)| preserves(&c, a, b)));
        }
    }

    #[test]
    fn two_row_pattern_is_orbital() {
        assert_eq!(classify_orbital_exotic(&col("0 0 1 1 2\n1 1 0 0 2")).unwrap(), Verdict::Orbital);
    }

    #[test]
    fn multiplicities_and_sufficiency() {
        // Columns: b1 b2 b5 b5 b6 b6, pair multiplicities (1, 0, 2).
        let exotic = col("0 1 0 0 1 1\n0 1 1 1 0 0\n1 0 0 0 1 1\n1 0 1 1 0 0");
        assert_eq!(column_type_multiplicities(&exotic).unwrap(), [1, 1, 0, 0, 2, 2]);
        assert!(exotic_sufficient_4xn(&exotic).unwrap());
        assert_eq!(classify_orbital_exotic(&exotic).unwrap(), Verdict::Exotic);
        // A single occurring pair.
        let single = col("0 1\n0 1\n1 0\n1 0");
        assert!(!exotic_sufficient_4xn(&single).unwrap());
        assert!(column_type_multiplicities(&col("0 1\n1 0")).is_err());
        assert!(column_type_multiplicities(&col("0 0\n0 1\n1 0\n1 1")).is_err());
    }
}
