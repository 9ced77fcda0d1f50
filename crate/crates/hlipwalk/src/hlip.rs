//! Hybrid linear inverted pendulum (H-LIP) model.
//!
//! A planar point mass at constant nominal height walks by alternating a
//! single-support phase (SSP), where the mass evolves as an inverted pendulum
//! about the stance foot, and a double-support phase (DSP), where it drifts at
//! constant velocity. Sampling the state just before each impact yields exact
//! linear step-to-step dynamics `x_{k+1} = A x_k + B u_k` in the step size
//! `u`. This module provides the phase flows, the step map, the closed-form
//! `A` and `B`, and discrete LQR synthesis for the stepping feedback gain.

use nalgebra::{DMatrix, Matrix3, RowVector3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gait constants shared by every phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlipParams {
    /// Nominal COM height above the stance foot [m].
    pub z0: f64,
    /// Gravitational acceleration [m/s^2].
    pub g: f64,
    /// Single-support duration [s].
    pub t_ssp: f64,
    /// Double-support duration [s].
    pub t_dsp: f64,
    /// Pendulum rate sqrt(g / z0) [1/s].
    pub lambda: f64,
    /// Full step period `t_ssp + t_dsp` [s].
    pub t_sum: f64,
}

/// Pre-impact state of one horizontal plane: global COM position `c`, COM
/// position `p` relative to the stance foot, and COM velocity `v`.
///
/// `c - p` is the global stance-foot position; every flow and the step map
/// preserve that identity by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub c: f64,
    pub p: f64,
    pub v: f64,
}

impl PlanarState {
    pub fn new(c: f64, p: f64, v: f64) -> Self {
        Self { c, p, v }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.c, self.p, self.v)
    }

    pub fn from_vector(x: &Vector3<f64>) -> Self {
        Self { c: x[0], p: x[1], v: x[2] }
    }
}

/// Step-to-step matrices of the pre-impact state: `x_{k+1} = A x_k + B u_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2SMatrices {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
}

/// Cost weights for the discrete LQR stepping gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqrWeights {
    /// Symmetric positive semidefinite state cost.
    pub q: Matrix3<f64>,
    /// Positive input cost.
    pub r: f64,
}

impl Default for LqrWeights {
    fn default() -> Self {
        Self { q: Matrix3::identity(), r: 1.0 }
    }
}

/// Validates the gait constants and derives `lambda` and `t_sum`.
pub fn make_params(z0: f64, g: f64, t_ssp: f64, t_dsp: f64) -> Result<HlipParams> {
    if !z0.is_finite() || z0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("z0 must be positive, got {z0}")));
    }
    if !g.is_finite() || g <= 0.0 {
        return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
    }
    if !t_ssp.is_finite() || t_ssp <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_ssp (single-support duration) must be positive, got {t_ssp}"
        )));
    }
    if !t_dsp.is_finite() || t_dsp < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_dsp (double-support duration) must be nonnegative, got {t_dsp}"
        )));
    }
    Ok(HlipParams {
        z0,
        g,
        t_ssp,
        t_dsp,
        lambda: (g / z0).sqrt(),
        t_sum: t_ssp + t_dsp,
    })
}

/// Closed-form single-support flow of `p'' = lambda^2 p` for time `t`.
pub fn ssp_flow(p0: f64, v0: f64, t: f64, lambda: f64) -> (f64, f64) {
    let ch = (lambda * t).cosh();
    let sh = (lambda * t).sinh();
    (p0 * ch + v0 / lambda * sh, p0 * lambda * sh + v0 * ch)
}

/// Double-support flow: constant-velocity drift for time `t`.
pub fn dsp_flow(p0: f64, v0: f64, t: f64) -> (f64, f64) {
    (p0 + v0 * t, v0)
}

/// Closed-form step-to-step matrices for the pre-impact state.
///
/// Derived from the composition impact foot-swap (`p+ = p- - u`, velocity
/// continuous), then DSP drift for `t_dsp`, then SSP pendulum flow for
/// `t_ssp`, with the global position advancing by `u + (p_{k+1} - p_k)`.
pub fn s2s_matrices(params: &HlipParams) -> S2SMatrices {
    let l = params.lambda;
    let ch = (l * params.t_ssp).cosh();
    let sh = (l * params.t_ssp).sinh();
    let beta = ch * params.t_dsp + sh / l;
    let a = Matrix3::new(
        1.0, ch - 1.0, beta,
        0.0, ch, beta,
        0.0, l * sh, l * sh * params.t_dsp + ch,
    );
    let b = Vector3::new(1.0 - ch, -ch, -l * sh);
    S2SMatrices { a, b }
}

/// Advances a pre-impact state one full step with step size `u`.
///
/// Implemented by composing the impact swap with the two phase flows, not by
/// multiplying out the step-to-step matrices, so the two paths can be checked
/// against each other.
pub fn step_map(x: &PlanarState, u: f64, params: &HlipParams) -> PlanarState {
    let p_plus = x.p - u;
    let (p_dsp, v_dsp) = dsp_flow(p_plus, x.v, params.t_dsp);
    let (p_next, v_next) = ssp_flow(p_dsp, v_dsp, params.t_ssp, params.lambda);
    PlanarState {
        c: x.c + (u + (p_next - x.p)),
        p: p_next,
        v: v_next,
    }
}

/// Infinite-horizon discrete LQR gain for `x_{k+1} = A x_k + B u_k`,
/// returned in the convention `u = K x`, so `A + B K` is the closed loop.
pub fn dlqr_gain(a: &Matrix3<f64>, b: &Vector3<f64>, weights: &LqrWeights) -> Result<RowVector3<f64>> {
    let ad = DMatrix::from_column_slice(3, 3, a.transpose().as_slice()).transpose();
    let bd = DMatrix::from_column_slice(3, 1, b.as_slice());
    let qd = DMatrix::from_column_slice(3, 3, weights.q.transpose().as_slice()).transpose();
    let rd = DMatrix::from_element(1, 1, weights.r);
    let (k, _) = dlqr_gain_dyn(&ad, &bd, &qd, &rd)?;
    Ok(RowVector3::new(k[(0, 0)], k[(0, 1)], k[(0, 2)]))
}

/// Dimension-generic discrete LQR: returns `(K, P)` where `P` solves the
/// algebraic Riccati equation by fixed-point iteration and `u = K x`.
///
/// Iterates `P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA` from `P = Q` until
/// successive iterates differ by less than 1e-10 in max-abs norm, erroring
/// out after 10,000 iterations.
pub fn dlqr_gain_dyn(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n || b.nrows() != n || q.nrows() != n || q.ncols() != n || r.nrows() != m || r.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "lqr shapes: A {}x{}, B {}x{}, Q {}x{}, R {}x{}",
            a.nrows(), a.ncols(), b.nrows(), b.ncols(), q.nrows(), q.ncols(), r.nrows(), r.ncols(),
        )));
    }
    if (q - q.transpose()).amax() > 1e-9 {
        return Err(Error::InvalidParameter("Q must be symmetric".into()));
    }
    if q.clone().symmetric_eigenvalues().iter().any(|&e| e < -1e-9) {
        return Err(Error::InvalidParameter("Q must be positive semidefinite".into()));
    }
    if (r - r.transpose()).amax() > 1e-9 || r.clone().symmetric_eigenvalues().iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter("R must be symmetric positive definite".into()));
    }

    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 10_000;
    let mut p = q.clone();
    for _ in 0..MAX_ITER {
        let apb = a.transpose() * &p * b;
        let s = r + b.transpose() * &p * b;
        let s_inv = s.clone().try_inverse().ok_or_else(|| {
            Error::NumericalFailure("R + B'PB is singular in the Riccati iteration".into())
        })?;
        let mut p_next = q + a.transpose() * &p * a - &apb * &s_inv * apb.transpose();
        p_next = (&p_next + p_next.transpose()) * 0.5;
        let diff = (&p_next - &p).amax();
        p = p_next;
        if diff < TOL {
            let s = r + b.transpose() * &p * b;
            let s_inv = s.try_inverse().ok_or_else(|| {
                Error::NumericalFailure("R + B'PB is singular in the Riccati iteration".into())
            })?;
            let k = -(&s_inv * (b.transpose() * &p * a));
            return Ok((k, p));
        }
    }
    Err(Error::NumericalFailure(format!(
        "Riccati iteration did not converge within {MAX_ITER} iterations"
    )))
}

/// Stepping controller: desired step size from a reference step size plus
/// proportional feedback on the pre-impact state error.
pub fn hlip_stepping(
    u_ref: f64,
    x_robot: &PlanarState,
    x_hlip: &PlanarState,
    k: &RowVector3<f64>,
) -> f64 {
    u_ref + (k * (x_robot.as_vector() - x_hlip.as_vector()))[0]
}

/// Largest eigenvalue modulus of a 3x3 real matrix.
pub fn spectral_radius(m: &Matrix3<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|e| e.norm()).fold(0.0, f64::max)
}
