//! Fixed-step RK4 integration of the value dynamics from seeded random states.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{NetworkShape, ValueMatrix};
use crate::model::{ModelConfig, VectorField};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub step: T,
    pub t_max: T,
    /// Max-norm of the vector field below which a sampled state counts as an equilibrium.
    pub equilibrium_tol: T,
    pub record_stride: usize,
    /// Compute the finite-difference Jacobian spectrum at the final state.
    #[serde(default)]
    pub spectrum: bool,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            step: T::lit(0.01),
            t_max: T::lit(5000.0),
            equilibrium_tol: T::lit(1e-9),
            record_stride: 10,
            spectrum: false,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero() && self.t_max > T::zero() && self.step < self.t_max) {
            return Err(Error::InvalidParameter("need 0 < step < t_max".into()));
        }
        if !(self.equilibrium_tol > T::zero()) {
            return Err(Error::InvalidParameter("equilibrium_tol must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<ValueMatrix<T>>,
}

impl<T: Real> Trajectory<T> {
    fn push(&mut self, t: T, z: &[T], shape: NetworkShape) {
        self.times.push(t);
        self.states.push(ValueMatrix::new(shape, z.to_vec()).expect("state length matches shape"));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,z_1_1,...,z_m_n` and round-trippable decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        if let Some(first) = self.states.first() {
            for i in 1..=first.m() {
                for j in 1..=first.n() {
                    out.push_str(&format!(",z_{i}_{j}"));
                }
            }
        }
        out.push('\n');
        for (t, z) in self.times.iter().zip(&self.states) {
            out.push_str(&fmt17(*t));
            for v in z.as_slice() {
                out.push(',');
                out.push_str(&fmt17(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, the round-trip precision of an `f64`.
fn fmt17<T: Real>(v: T) -> String {
    format!("{:.16e}", v.to_f64().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult<T> {
    pub final_state: ValueMatrix<T>,
    pub converged: bool,
    /// Max-norm of the vector field at `final_state`.
    pub residual: T,
    pub elapsed_time: T,
    /// Time at which a non-finite state appeared, if the run blew up.
    pub diverged_at: Option<T>,
    pub jacobian_spectrum: Option<Vec<Complex<f64>>>,
}

impl<T: Real> EquilibriumResult<T> {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    /// Largest real part of the recorded spectrum.
    pub fn max_real_eigenvalue(&self) -> Option<f64> {
        self.jacobian_spectrum.as_ref()?.iter().map(|c| c.re).reduce(f64::max)
    }
}

/// Entries i.i.d. uniform on `[−radius, radius]`, drawn from ChaCha8 seeded with `seed`
/// (`rand_chacha::ChaCha8Rng::seed_from_u64`), in row-major order.
pub fn random_near_origin<T: Real>(shape: NetworkShape, radius: T, seed: u64) -> Result<ValueMatrix<T>> {
    let r = radius.to_f64().unwrap_or(f64::NAN);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..shape.cells()).map(|_| T::lit(rng.gen_range(-r..=r))).collect();
    ValueMatrix::finite(shape, values)
}

fn residual_of<T: Real>(f: &[T]) -> T {
    f.iter().fold(T::zero(), |a, v| a.max(v.abs()))
}

/// Classical RK4 with fixed step. Stops at the first recorded sample whose
/// residual is at most `equilibrium_tol`, at `t_max`, or when the state stops
/// being finite (reported through `diverged_at`, not as an error).
pub fn integrate<T: Real>(
    z0: &ValueMatrix<T>,
    cfg: &ModelConfig<T>,
    icfg: &IntegratorConfig<T>,
) -> Result<(Trajectory<T>, EquilibriumResult<T>)> {
    icfg.validate()?;
    z0.check_shape(cfg.shape)?;
    z0.check_finite()?;
    let field = VectorField::new(cfg)?;
    let shape = cfg.shape;
    let cells = shape.cells();
    let mut ws = field.workspace();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![T::zero(); cells], vec![T::zero(); cells], vec![T::zero(); cells], vec![T::zero(); cells], vec![T::zero(); cells]);
    let mut z = z0.as_slice().to_vec();
    let h = icfg.step;
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let max_steps = (icfg.t_max / h).ceil().to_usize().unwrap_or(usize::MAX);

    let mut traj = Trajectory { times: Vec::new(), states: Vec::new() };
    traj.push(T::zero(), &z, shape);

    let mut t = T::zero();
    let mut converged = false;
    let mut diverged_at = None;
    field.eval_into(&z, &mut k1, &mut ws);
    let mut residual = residual_of(&k1);
    if residual <= icfg.equilibrium_tol {
        converged = true;
    }

    let mut step = 0usize;
    while !converged && step < max_steps {
        field.eval_into(&z, &mut k1, &mut ws);
        for c in 0..cells {
            tmp[c] = z[c] + half * k1[c];
        }
        field.eval_into(&tmp, &mut k2, &mut ws);
        for c in 0..cells {
            tmp[c] = z[c] + half * k2[c];
        }
        field.eval_into(&tmp, &mut k3, &mut ws);
        for c in 0..cells {
            tmp[c] = z[c] + h * k3[c];
        }
        field.eval_into(&tmp, &mut k4, &mut ws);
        for c in 0..cells {
            z[c] = z[c] + sixth * (k1[c] + T::lit(2.0) * (k2[c] + k3[c]) + k4[c]);
        }
        step += 1;
        t = h * T::from_usize(step).expect("step count fits scalar");

        if z.iter().any(|v| !v.is_finite()) {
            diverged_at = Some(t);
            traj.push(t, &z, shape);
            residual = T::infinity();
            break;
        }
        let last = step == max_steps;
        if step % icfg.record_stride == 0 || last {
            field.eval_into(&z, &mut k1, &mut ws);
            residual = residual_of(&k1);
            converged = residual <= icfg.equilibrium_tol;
            traj.push(t, &z, shape);
        }
    }

    let final_state = ValueMatrix::new(shape, z)?;
    let jacobian_spectrum = if icfg.spectrum && diverged_at.is_none() {
        Some(linalg::spectrum(&numerical_jacobian(&final_state, cfg, T::lit(1e-6))?)?)
    } else {
        None
    };
    let result = EquilibriumResult { final_state, converged, residual, elapsed_time: t, diverged_at, jacobian_spectrum };
    Ok((traj, result))
}

/// Central-difference Jacobian; column `k·n + l` is the response to perturbing `z_kl`.
pub fn numerical_jacobian<T: Real>(z: &ValueMatrix<T>, cfg: &ModelConfig<T>, h_fd: T) -> Result<DMatrix<T>> {
    if !(h_fd > T::zero()) {
        return Err(Error::InvalidParameter("finite-difference step must be positive".into()));
    }
    let field = VectorField::new(cfg)?;
    z.check_shape(cfg.shape)?;
    jacobian_of(|x, out| field.eval_into(x, out, &mut field.workspace()), z.as_slice(), h_fd)
}

/// Central-difference Jacobian of an arbitrary map `R^N → R^N`.
pub fn jacobian_of<T: Real>(mut f: impl FnMut(&[T], &mut [T]), x: &[T], h_fd: T) -> Result<DMatrix<T>> {
    let n = x.len();
    let mut jac = DMatrix::from_element(n, n, T::zero());
    let (mut plus, mut minus) = (vec![T::zero(); n], vec![T::zero(); n]);
    let mut xp = x.to_vec();
    let two_h = h_fd + h_fd;
    for c in 0..n {
        xp[c] = x[c] + h_fd;
        f(&xp, &mut plus);
        xp[c] = x[c] - h_fd;
        f(&xp, &mut minus);
        xp[c] = x[c];
        for r in 0..n {
            let v = (plus[r] - minus[r]) / two_h;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("jacobian entry ({r}, {c})")));
            }
            jac[(r, c)] = v;
        }
    }
    Ok(jac)
}
