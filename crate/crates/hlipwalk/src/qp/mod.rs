//! Dense convex quadratic programming for the step planner.
//!
//! Problems have the form
//!
//! ```text
//! min ½ zᵀHz + fᵀz   s.t.   A_eq z = b_eq,   lb ≤ A_in z ≤ ub
//! ```
//!
//! with `H` symmetric positive semidefinite and desk-scale dimensions (n up
//! to a few hundred). [`solve_qp`] certifies optimal solutions with a KKT
//! residual; [`solve_obstacle_scp`] wraps it with sequential convexification
//! of nonconvex keep-out constraints.

mod scp;
mod solver;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use scp::{solve_obstacle_scp, Obstacle, ScpWaypoint};
pub use solver::{solve_qp, solve_qp_traced};

/// Default solver tolerance. Problems here are tiny, so tight is cheap.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default cap on active-set iterations.
pub const DEFAULT_MAX_ITER: usize = 2000;

/// A convex QP with equalities and two-sided linear inequalities.
///
/// Bounds may be infinite on either side. Build through [`QpProblem::new`],
/// which validates shapes, symmetry, and positive semidefiniteness.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub a_in: DMatrix<f64>,
    pub lb: DVector<f64>,
    pub ub: DVector<f64>,
}

impl QpProblem {
    /// Validates and stores a problem, symmetrizing `h` against round-off.
    pub fn new(
        h: DMatrix<f64>,
        f: DVector<f64>,
        a_eq: DMatrix<f64>,
        b_eq: DVector<f64>,
        a_in: DMatrix<f64>,
        lb: DVector<f64>,
        ub: DVector<f64>,
    ) -> Result<Self> {
        let n = f.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "H is {}x{} but f has length {n}",
                h.nrows(),
                h.ncols()
            )));
        }
        if a_eq.ncols() != n || a_eq.nrows() != b_eq.len() {
            return Err(Error::DimensionMismatch(format!(
                "equalities: A_eq is {}x{}, b_eq has length {}",
                a_eq.nrows(),
                a_eq.ncols(),
                b_eq.len()
            )));
        }
        if a_in.ncols() != n || a_in.nrows() != lb.len() || a_in.nrows() != ub.len() {
            return Err(Error::DimensionMismatch(format!(
                "inequalities: A_in is {}x{}, bounds have lengths {} and {}",
                a_in.nrows(),
                a_in.ncols(),
                lb.len(),
                ub.len()
            )));
        }
        let scale = 1.0 + h.amax();
        if (&h - h.transpose()).amax() > 1e-8 * scale {
            return Err(Error::InvalidParameter("H must be symmetric".into()));
        }
        let h = (&h + h.transpose()) * 0.5;
        // regularized factorization as the positive semidefiniteness check
        let shifted = &h + DMatrix::identity(n, n) * (1e-8 * scale);
        if shifted.cholesky().is_none() {
            return Err(Error::InvalidParameter("H must be positive semidefinite".into()));
        }
        for i in 0..lb.len() {
            if !(lb[i] <= ub[i]) {
                return Err(Error::InvalidParameter(format!(
                    "bounds must satisfy lb <= ub, row {i} has [{}, {}]",
                    lb[i], ub[i]
                )));
            }
        }
        if f.iter().any(|v| !v.is_finite()) || b_eq.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("f and b_eq must be finite".into()));
        }
        Ok(Self { h, f, a_eq, b_eq, a_in, lb, ub })
    }

    /// A problem with inequality constraints only.
    pub fn inequality_constrained(
        h: DMatrix<f64>,
        f: DVector<f64>,
        a_in: DMatrix<f64>,
        lb: DVector<f64>,
        ub: DVector<f64>,
    ) -> Result<Self> {
        let n = f.len();
        Self::new(h, f, DMatrix::zeros(0, n), DVector::zeros(0), a_in, lb, ub)
    }

    /// Objective value ½ zᵀHz + fᵀz.
    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * (z.transpose() * &self.h * z)[0] + self.f.dot(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// Solver output. Inequality duals are signed: `dual_in[i]` is positive when
/// the lower bound of row `i` is active and negative when the upper bound is,
/// so stationarity reads `H z + f + A_eqᵀ dual_eq − A_inᵀ dual_in = 0`.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub dual_eq: DVector<f64>,
    pub dual_in: DVector<f64>,
    pub status: QpStatus,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Max-abs KKT residual of a candidate solution: the largest of the
/// stationarity, primal-feasibility, and complementarity violations.
pub fn kkt_residual(p: &QpProblem, s: &QpSolution) -> f64 {
    let stat = (&p.h * &s.z + &p.f + p.a_eq.transpose() * &s.dual_eq
        - p.a_in.transpose() * &s.dual_in)
        .amax();

    let mut primal: f64 = 0.0;
    if p.a_eq.nrows() > 0 {
        primal = (&p.a_eq * &s.z - &p.b_eq).amax();
    }
    let vals = &p.a_in * &s.z;
    let mut comp: f64 = 0.0;
    for i in 0..vals.len() {
        primal = primal.max(p.lb[i] - vals[i]).max(vals[i] - p.ub[i]);
        let d = s.dual_in[i];
        if d > 0.0 {
            // lower-bound multiplier: slack to the lower bound must vanish
            let slack = vals[i] - p.lb[i];
            comp = comp.max(if slack.is_finite() { (d * slack).abs() } else { d });
        } else if d < 0.0 {
            let slack = p.ub[i] - vals[i];
            comp = comp.max(if slack.is_finite() { (d * slack).abs() } else { -d });
        }
    }
    stat.max(primal).max(comp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim_lower_bound() -> QpProblem {
        QpProblem::inequality_constrained(
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, f64::INFINITY),
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_inputs() {
        let bad_h = QpProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]),
            DVector::zeros(2),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
            DVector::zeros(0),
        );
        assert!(matches!(bad_h, Err(Error::InvalidParameter(_))));

        let indefinite = QpProblem::inequality_constrained(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DVector::zeros(2),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
            DVector::zeros(0),
        );
        assert!(matches!(indefinite, Err(Error::InvalidParameter(_))));

        let crossed = QpProblem::inequality_constrained(
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 2.0),
            DVector::from_element(1, 1.0),
        );
        assert!(matches!(crossed, Err(Error::InvalidParameter(_))));

        let shape = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::zeros(1, 3),
            DVector::zeros(1),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
            DVector::zeros(0),
        );
        assert!(matches!(shape, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn residual_flags_perturbed_solutions() {
        let p = one_dim_lower_bound();
        let exact = QpSolution {
            z: DVector::from_element(1, 1.0),
            dual_eq: DVector::zeros(0),
            dual_in: DVector::from_element(1, 1.0),
            status: QpStatus::Optimal,
            iterations: 0,
            kkt_residual: 0.0,
        };
        assert!(kkt_residual(&p, &exact) <= 1e-10);

        let mut off = exact.clone();
        off.z[0] = 1.1;
        assert!(kkt_residual(&p, &off) >= 0.09);
    }

    #[test]
    fn residual_penalizes_multiplier_on_infinite_bound() {
        let p = one_dim_lower_bound();
        let wrong_side = QpSolution {
            z: DVector::from_element(1, 1.0),
            dual_eq: DVector::zeros(0),
            dual_in: DVector::from_element(1, -1.0),
            status: QpStatus::Optimal,
            iterations: 0,
            kkt_residual: 0.0,
        };
        // a multiplier pushing on the infinite upper bound is dual-infeasible
        assert!(kkt_residual(&p, &wrong_side) >= 1.0);
    }
}
