//! Influence-network state, parameters and the value-formation vector field,
//! together with the closed-form linearization at the undecided state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{NetworkShape, ValueMatrix};
use crate::scalar::{int, Field, Real};

/// The four isotypic components of the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Irrep {
    Dissensus,
    Consensus,
    Deadlock,
    Synchronous,
}

impl Irrep {
    pub const ALL: [Irrep; 4] = [Irrep::Dissensus, Irrep::Consensus, Irrep::Deadlock, Irrep::Synchronous];

    /// Dimension of the component, i.e. the multiplicity of its eigenvalue.
    pub fn dimension(self, shape: NetworkShape) -> usize {
        let (m, n) = (shape.m, shape.n);
        match self {
            Irrep::Dissensus => (m - 1) * (n - 1),
            Irrep::Consensus => n - 1,
            Irrep::Deadlock => m - 1,
            Irrep::Synchronous => 1,
        }
    }
}

/// Interaction gains: self, row-arrow, column-arrow and diagonal-arrow weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Clone> GainParams<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Self {
        GainParams { alpha, beta, gamma, delta }
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.alpha.clone(), self.beta.clone(), self.gamma.clone(), self.delta.clone()]
    }
}

/// Linear-growth coefficient of each isotypic component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCoefficients<T> {
    pub c_d: T,
    pub c_c: T,
    pub c_dl: T,
    pub c_s: T,
}

impl<T: Clone> CriticalCoefficients<T> {
    pub fn new(c_d: T, c_c: T, c_dl: T, c_s: T) -> Self {
        CriticalCoefficients { c_d, c_c, c_dl, c_s }
    }

    pub fn get(&self, which: Irrep) -> T {
        match which {
            Irrep::Dissensus => self.c_d.clone(),
            Irrep::Consensus => self.c_c.clone(),
            Irrep::Deadlock => self.c_dl.clone(),
            Irrep::Synchronous => self.c_s.clone(),
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        Irrep::ALL.iter().map(|&w| self.get(w)).collect()
    }
}

/// Offsets of the two sigmoids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams<T> {
    pub s1: T,
    pub s2: T,
}

impl<T: Real> SigmoidParams<T> {
    pub fn new(s1: T, s2: T) -> Result<Self> {
        Sigmoid::new(s1)?;
        Sigmoid::new(s2)?;
        Ok(SigmoidParams { s1, s2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig<T> {
    pub shape: NetworkShape,
    pub gains: GainParams<T>,
    pub sigmoids: SigmoidParams<T>,
    pub lambda: T,
}

impl<T: Real> ModelConfig<T> {
    pub fn new(shape: NetworkShape, gains: GainParams<T>, sigmoids: SigmoidParams<T>, lambda: T) -> Result<Self> {
        let cfg = ModelConfig { shape, gains, sigmoids, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        NetworkShape::new(self.shape.m, self.shape.n)?;
        let g = &self.gains;
        if ![g.alpha, g.beta, g.gamma, g.delta, self.lambda].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("gains and lambda must be finite".into()));
        }
        SigmoidParams::new(self.sigmoids.s1, self.sigmoids.s2)?;
        Ok(())
    }
}

/// `S(x) = (tanh(x − s) + tanh(s)) / (1 − tanh(s)²)`, normalised so that
/// `S(0) = 0` and `S'(0) = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Sigmoid<T> {
    offset: T,
    tanh_offset: T,
    scale: T,
}

impl<T: Real> Sigmoid<T> {
    pub fn new(offset: T) -> Result<Self> {
        if offset == T::zero() || !offset.is_finite() {
            return Err(Error::InvalidParameter(format!("sigmoid offset must be finite and nonzero, got {offset}")));
        }
        let t = offset.tanh();
        Ok(Sigmoid { offset, tanh_offset: t, scale: T::one() / (T::one() - t * t) })
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        ((x - self.offset).tanh() + self.tanh_offset) * self.scale
    }
}

pub fn sigmoid_eval<T: Real>(s: T, x: T) -> Result<T> {
    Ok(Sigmoid::new(s)?.eval(x))
}

/// Sum of `sorted` with one occurrence of `skip` removed.
///
/// Summing a sorted multiset makes the result depend only on the multiset,
/// which is what makes the field exactly equivariant in floating point.
#[inline]
fn sum_without<T: Real>(sorted: &[T], skip: T) -> T {
    let mut acc = T::zero();
    let mut skipped = false;
    for &v in sorted {
        if !skipped && v == skip {
            skipped = true;
            continue;
        }
        acc = acc + v;
    }
    acc
}

#[inline]
fn sort_small<T: Real>(v: &mut [T]) {
    // NaNs sort last so a diverging state still evaluates (to NaN) without panicking.
    v.sort_unstable_by(|a, b| match (a.is_nan(), b.is_nan()) {
        (false, false) => a.partial_cmp(b).expect("non-NaN values are ordered"),
        (x, y) => x.cmp(&y),
    });
}

/// Precomputed form of the admissible value-formation field
/// `ż_ij = −z_ij + λ (S₁(α z_ij + γ Σ_{k≠i} z_kj) + Σ_{l≠j} S₂(β z_il + δ Σ_{k≠i} z_kl))`.
#[derive(Debug, Clone)]
pub struct VectorField<T> {
    shape: NetworkShape,
    gains: GainParams<T>,
    lambda: T,
    s1: Sigmoid<T>,
    s2: Sigmoid<T>,
}

/// Reusable buffers for [`VectorField::eval_into`].
#[derive(Debug, Clone, Default)]
pub struct Workspace<T> {
    sorted: Vec<T>,
    col_excl: Vec<T>,
    row_terms: Vec<T>,
}

impl<T: Real> VectorField<T> {
    pub fn new(cfg: &ModelConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(VectorField {
            shape: cfg.shape,
            gains: cfg.gains,
            lambda: cfg.lambda,
            s1: Sigmoid::new(cfg.sigmoids.s1)?,
            s2: Sigmoid::new(cfg.sigmoids.s2)?,
        })
    }

    pub fn shape(&self) -> NetworkShape {
        self.shape
    }

    pub fn workspace(&self) -> Workspace<T> {
        let cells = self.shape.cells();
        Workspace {
            sorted: Vec::with_capacity(self.shape.m.max(self.shape.n)),
            col_excl: vec![T::zero(); cells],
            row_terms: vec![T::zero(); cells],
        }
    }

    /// Evaluate into `out`; both slices are row-major `m × n`.
    pub fn eval_into(&self, z: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        let (m, n) = (self.shape.m, self.shape.n);
        let g = &self.gains;
        // Σ_{k≠i} z_kl for every (i, l).
        for l in 0..n {
            ws.sorted.clear();
            ws.sorted.extend((0..m).map(|k| z[k * n + l]));
            sort_small(&mut ws.sorted);
            for i in 0..m {
                ws.col_excl[i * n + l] = sum_without(&ws.sorted, z[i * n + l]);
            }
        }
        for k in 0..m * n {
            ws.row_terms[k] = self.s2.eval(g.beta * z[k] + g.delta * ws.col_excl[k]);
        }
        for i in 0..m {
            ws.sorted.clear();
            ws.sorted.extend_from_slice(&ws.row_terms[i * n..(i + 1) * n]);
            sort_small(&mut ws.sorted);
            for j in 0..n {
                let k = i * n + j;
                let row = sum_without(&ws.sorted, ws.row_terms[k]);
                let own = self.s1.eval(g.alpha * z[k] + g.gamma * ws.col_excl[k]);
                out[k] = -z[k] + self.lambda * (own + row);
            }
        }
    }

    pub fn eval(&self, z: &ValueMatrix<T>) -> Result<ValueMatrix<T>> {
        z.check_shape(self.shape)?;
        let mut out = vec![T::zero(); self.shape.cells()];
        self.eval_into(z.as_slice(), &mut out, &mut self.workspace());
        ValueMatrix::new(self.shape, out)
    }
}

pub fn vector_field<T: Real>(z: &ValueMatrix<T>, cfg: &ModelConfig<T>) -> Result<ValueMatrix<T>> {
    VectorField::new(cfg)?.eval(z)
}

/// The 4×4 matrix mapping `(α, β, γ, δ)` to `(c_d, c_c, c_dl, c_s)`.
pub fn l_matrix<T: Field>(shape: NetworkShape) -> Vec<Vec<T>> {
    let (m, n) = (shape.m as i64, shape.n as i64);
    [
        [1, -1, -1, 1],
        [1, -1, m - 1, 1 - m],
        [1, n - 1, -1, 1 - n],
        [1, n - 1, m - 1, (m - 1) * (n - 1)],
    ]
    .iter()
    .map(|row| row.iter().map(|&v| int(v)).collect())
    .collect()
}

pub fn coefficients_from_gains<T: Field>(g: &GainParams<T>, shape: NetworkShape) -> CriticalCoefficients<T> {
    let c = linalg::mat_vec(&l_matrix(shape), &g.to_vec());
    CriticalCoefficients::new(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone())
}

pub fn gains_from_coefficients<T: Field>(c: &CriticalCoefficients<T>, shape: NetworkShape) -> GainParams<T> {
    let g = linalg::solve(&l_matrix(shape), &c.to_vec()).expect("det L = -m^2 n^2 is nonzero");
    GainParams::new(g[0].clone(), g[1].clone(), g[2].clone(), g[3].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue<T> {
    pub irrep: Irrep,
    pub value: T,
    pub multiplicity: usize,
}

/// Jacobian eigenvalues at the origin: `−1 + λ c̃` on each component.
pub fn analytic_eigenvalues<T: Field>(
    c: &CriticalCoefficients<T>,
    lambda: T,
    shape: NetworkShape,
) -> Vec<Eigenvalue<T>> {
    Irrep::ALL
        .iter()
        .map(|&irrep| Eigenvalue {
            irrep,
            value: lambda.clone() * c.get(irrep) - T::one(),
            multiplicity: irrep.dimension(shape),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold<T> {
    pub irrep: Irrep,
    pub lambda: T,
    /// Positive coefficient: the eigenvalue crosses zero for increasing λ > 0.
    pub reachable: bool,
    /// This coefficient is the strict maximum among the positive ones.
    pub first: bool,
}

pub fn bifurcation_threshold<T: Field>(c: &CriticalCoefficients<T>, which: Irrep) -> Result<Threshold<T>> {
    let value = c.get(which);
    if value.is_zero() {
        return Err(Error::NoThreshold);
    }
    let reachable = value.is_positive();
    let first = reachable && Irrep::ALL.iter().filter(|&&w| w != which).all(|&w| c.get(w) < value);
    Ok(Threshold { irrep: which, lambda: T::one() / value, reachable, first })
}

/// Component that destabilises first as λ increases from 0, if unique.
pub fn first_bifurcation<T: Field>(c: &CriticalCoefficients<T>) -> Option<Threshold<T>> {
    Irrep::ALL
        .iter()
        .filter_map(|&w| bifurcation_threshold(c, w).ok())
        .find(|t| t.first)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrrepDecomposition<T> {
    pub sync: ValueMatrix<T>,
    pub consensus: ValueMatrix<T>,
    pub deadlock: ValueMatrix<T>,
    pub dissensus: ValueMatrix<T>,
}

impl<T: Field> IrrepDecomposition<T> {
    pub fn component(&self, which: Irrep) -> &ValueMatrix<T> {
        match which {
            Irrep::Dissensus => &self.dissensus,
            Irrep::Consensus => &self.consensus,
            Irrep::Deadlock => &self.deadlock,
            Irrep::Synchronous => &self.sync,
        }
    }

    pub fn recombine(&self) -> ValueMatrix<T> {
        self.sync.add(&self.consensus).add(&self.deadlock).add(&self.dissensus)
    }
}

/// Orthogonal projection onto the four isotypic components via row, column and grand means.
pub fn irrep_project<T: Field>(z: &ValueMatrix<T>) -> IrrepDecomposition<T> {
    let shape = z.shape();
    let (m, n) = (int::<T>(shape.m as i64), int::<T>(shape.n as i64));
    let row_means: Vec<T> = z.row_sums().into_iter().map(|s| s / n.clone()).collect();
    let col_means: Vec<T> = z.col_sums().into_iter().map(|s| s / m.clone()).collect();
    let grand = row_means.iter().cloned().fold(T::zero(), |a, b| a + b) / m.clone();
    IrrepDecomposition {
        sync: ValueMatrix::filled(shape, grand.clone()),
        consensus: ValueMatrix::from_fn(shape, |_, j| col_means[j].clone() - grand.clone()),
        deadlock: ValueMatrix::from_fn(shape, |i, _| row_means[i].clone() - grand.clone()),
        dissensus: ValueMatrix::from_fn(shape, |i, j| {
            z.get(i, j) - row_means[i].clone() - col_means[j].clone() + grand.clone()
        }),
    }
}
