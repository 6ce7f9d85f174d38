use nalgebra::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::balance::balance_witness;
use super::Coloring;
use crate::error::{Error, Result};
use crate::integrator::jacobian_of;
use crate::linalg;
use crate::matrix::ValueMatrix;
use crate::scalar::Real;

/// Polynomial `f(x) = P(x) q(x)` with `P(x) = Π (x − v_i)` and `q` the Lagrange
/// interpolant of `−1 / P'(v_i)`, so that `f(v_i) = 0` and `f'(v_i) = −1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolatedMap<T> {
    pub nodes: Vec<T>,
    /// `q(v_i)`.
    pub weights: Vec<T>,
}

impl<T: Real> InterpolatedMap<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("need at least one node".into()));
        }
        for (a, &x) in nodes.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(format!("node {a}")));
            }
            if nodes[..a].contains(&x) {
                return Err(Error::NotGeneric(format!("repeated node value {x}")));
            }
        }
        let weights = (0..nodes.len())
            .map(|i| {
                let dp = (0..nodes.len()).filter(|&j| j != i).fold(T::one(), |acc, j| acc * (nodes[i] - nodes[j]));
                -T::one() / dp
            })
            .collect();
        Ok(InterpolatedMap { nodes, weights })
    }

    pub fn degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn eval(&self, x: T) -> T {
        let v = &self.nodes;
        let p = v.iter().fold(T::one(), |acc, &vi| acc * (x - vi));
        let q = (0..v.len()).fold(T::zero(), |acc, i| {
            let basis =
                (0..v.len()).filter(|&j| j != i).fold(T::one(), |b, j| b * (x - v[j]) / (v[i] - v[j]));
            acc + self.weights[i] * basis
        });
        p * q
    }

    /// Monomial coefficients of `f`, constant term first.
    pub fn coefficients(&self) -> Vec<f64> {
        fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
            let mut out = vec![0.0; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        }
        let v: Vec<f64> = self.nodes.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        let w: Vec<f64> = self.weights.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        let p = v.iter().fold(vec![1.0], |acc, &vi| mul(&acc, &[-vi, 1.0]));
        let mut q = vec![0.0; v.len()];
        for i in 0..v.len() {
            let basis = (0..v.len())
                .filter(|&j| j != i)
                .fold(vec![1.0], |acc, j| mul(&acc, &[-v[j] / (v[i] - v[j]), 1.0 / (v[i] - v[j])]));
            for (k, c) in basis.iter().enumerate() {
                q[k] += w[i] * c;
            }
        }
        mul(&p, &q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport<T> {
    pub map: InterpolatedMap<T>,
    /// Max-norm of the synthesized field at `y`.
    pub residual: T,
    pub fd_step: T,
    pub jacobian_eigenvalues: Vec<Complex<f64>>,
    /// Largest distance of a Jacobian eigenvalue from −1.
    pub max_eigenvalue_deviation: f64,
}

impl<T: Real> SynthesisReport<T> {
    pub fn is_stable(&self) -> bool {
        self.jacobian_eigenvalues.iter().all(|e| e.re < 0.0)
    }
}

/// Seeded state that is constant on colors and generic: the color values are a
/// shuffled even grid on `[−1, 1]`, each jittered by under a quarter of the grid gap.
pub fn random_generic_state(c: &Coloring, seed: u64) -> ValueMatrix<f64> {
    let k = c.num_colors();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = if k > 1 { 2.0 / (k - 1) as f64 } else { 1.0 };
    let mut values: Vec<f64> =
        (0..k).map(|i| -1.0 + gap * i as f64 + rng.gen_range(-0.25..0.25) * gap).collect();
    values.shuffle(&mut rng);
    ValueMatrix::from_fn(c.shape(), |i, j| values[c.get(i, j)])
}

/// Build the node-value-only admissible field `g(z)_cell = f(z_cell)` that has
/// `y` as an equilibrium with Jacobian `−I`, and verify both numerically.
///
/// `y` must be generic for `c`: equal entries exactly on equal colors.
pub fn synthesize_stable_admissible<T: Real>(c: &Coloring, y: &ValueMatrix<T>) -> Result<SynthesisReport<T>> {
    y.check_shape(c.shape())?;
    y.check_finite()?;
    if let Some(w) = balance_witness(c) {
        return Err(w.into());
    }
    let mut values: Vec<Option<T>> = vec![None; c.num_colors()];
    for (k, (&color, &v)) in c.as_slice().iter().zip(y.as_slice()).enumerate() {
        match values[color] {
            None => values[color] = Some(v),
            Some(prev) if prev != v => {
                let (i, j) = (k / c.n(), k % c.n());
                return Err(Error::NotGeneric(format!("color {color} takes values {prev} and {v} (cell ({i}, {j}))")));
            }
            _ => {}
        }
    }
    let nodes: Vec<T> = values.into_iter().map(|v| v.expect("every color is used")).collect();
    let map = InterpolatedMap::new(nodes)?;

    let residual = y.as_slice().iter().fold(T::zero(), |acc, &v| acc.max(map.eval(v).abs()));
    let mut gap = T::infinity();
    for (a, &x) in map.nodes.iter().enumerate() {
        for &z in &map.nodes[..a] {
            gap = gap.min((x - z).abs());
        }
    }
    let scale = if gap.is_finite() { gap } else { T::one().max(map.nodes[0].abs()) };
    // A power of two keeps x ± h exact for the node values.
    let fd_step = T::lit(2.0).powi((scale * T::lit(1e-6)).log2().floor().to_i32().unwrap_or(-20));
    let jac = jacobian_of(
        |z: &[T], out: &mut [T]| {
            for (o, &x) in out.iter_mut().zip(z) {
                *o = map.eval(x);
            }
        },
        y.as_slice(),
        fd_step,
    )?;
    let jacobian_eigenvalues = linalg::spectrum(&jac)?;
    let max_eigenvalue_deviation =
        jacobian_eigenvalues.iter().map(|e| (e - Complex::new(-1.0, 0.0)).norm()).fold(0.0, f64::max);
    Ok(SynthesisReport { map, residual, fd_step, jacobian_eigenvalues, max_eigenvalue_deviation })
}
