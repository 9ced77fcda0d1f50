//! Sequential convexification of circular keep-out constraints.
//!
//! The true constraint `|c_k − p_obs| ≥ d` is nonconvex. About a working
//! iterate it is replaced by the supporting half-space `n̂ᵀ(c_k − p_obs) ≥ d`
//! with `n̂` the unit vector from the obstacle to the iterate's waypoint.
//! Any point satisfying the half-space also satisfies the true constraint,
//! so accepted solutions are safe at every predicted waypoint.

use nalgebra::{DMatrix, DVector, RowDVector, Vector2};

use crate::error::{Error, Result};

use super::{solve_qp, QpProblem, QpSolution, QpStatus};

/// A circular keep-out region in the walking plane.
#[derive(Debug, Clone, Copy)]
pub struct Obstacle {
    pub center: Vector2<f64>,
    /// Required clearance between the region center and every waypoint.
    pub clearance: f64,
}

/// One predicted planar position, as a linear map from the decision vector,
/// plus the reference path point used to break the linearization tie when
/// the iterate sits exactly on an obstacle center.
#[derive(Debug, Clone)]
pub struct ScpWaypoint {
    /// 2 x n selector: `c_k = selector * z`.
    pub selector: DMatrix<f64>,
    pub reference: Vector2<f64>,
}

fn unit_away(c: Vector2<f64>, obstacle: &Obstacle, reference: Vector2<f64>) -> Vector2<f64> {
    let mut dir = c - obstacle.center;
    if dir.norm() < 1e-9 {
        dir = reference - obstacle.center;
    }
    if dir.norm() < 1e-9 {
        dir = Vector2::new(1.0, 0.0);
    }
    dir / dir.norm()
}

/// Solves `p` with keep-out constraints added for every obstacle at every
/// waypoint, by repeated linearization about the current iterate.
///
/// Iterates until the solution moves less than 1e-6 in max-abs norm or
/// `max_outer` rounds are done. The returned solution belongs to the last
/// convexified problem: its inequality duals cover the appended keep-out
/// rows (waypoint-major, obstacle-minor) after the original rows. A status
/// of `Infeasible` means a convexified subproblem had no feasible point;
/// callers may relax the clearance and retry.
pub fn solve_obstacle_scp(
    p: &QpProblem,
    obstacles: &[Obstacle],
    waypoints: &[ScpWaypoint],
    init: &DVector<f64>,
    max_outer: usize,
    tol: f64,
    max_iter: usize,
) -> Result<QpSolution> {
    let n = p.f.len();
    if init.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "init has length {} for an n = {n} problem",
            init.len()
        )));
    }
    if max_outer == 0 {
        return Err(Error::InvalidParameter("max_outer must be at least 1".into()));
    }
    for o in obstacles {
        if !(o.clearance > 0.0) || !o.clearance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "obstacle clearance must be positive, got {}",
                o.clearance
            )));
        }
    }
    for w in waypoints {
        if w.selector.nrows() != 2 || w.selector.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "waypoint selector is {}x{}, expected 2x{n}",
                w.selector.nrows(),
                w.selector.ncols()
            )));
        }
    }
    if obstacles.is_empty() || waypoints.is_empty() {
        return Ok(solve_qp(p, Some(init), tol, max_iter));
    }

    let m = p.a_in.nrows();
    let extra = waypoints.len() * obstacles.len();
    let mut z_prev = init.clone();
    let mut last: Option<QpSolution> = None;
    for outer in 0..max_outer {
        let mut a_in = DMatrix::zeros(m + extra, n);
        a_in.view_mut((0, 0), (m, n)).copy_from(&p.a_in);
        let mut lb = DVector::from_element(m + extra, f64::NEG_INFINITY);
        let mut ub = DVector::from_element(m + extra, f64::INFINITY);
        lb.rows_mut(0, m).copy_from(&p.lb);
        ub.rows_mut(0, m).copy_from(&p.ub);
        for (wi, w) in waypoints.iter().enumerate() {
            let c = &w.selector * &z_prev;
            let c = Vector2::new(c[0], c[1]);
            for (oi, o) in obstacles.iter().enumerate() {
                let nhat = unit_away(c, o, w.reference);
                let row: RowDVector<f64> = nhat.transpose() * &w.selector;
                let idx = m + wi * obstacles.len() + oi;
                a_in.view_mut((idx, 0), (1, n)).copy_from(&row);
                lb[idx] = o.clearance + nhat.dot(&o.center);
            }
        }
        let aug = QpProblem {
            h: p.h.clone(),
            f: p.f.clone(),
            a_eq: p.a_eq.clone(),
            b_eq: p.b_eq.clone(),
            a_in,
            lb,
            ub,
        };
        let sol = solve_qp(&aug, Some(&z_prev), tol, max_iter);
        if sol.status != QpStatus::Optimal {
            return Ok(sol);
        }
        let moved = (&sol.z - &z_prev).amax();
        z_prev = sol.z.clone();
        last = Some(sol);
        if moved < 1e-6 {
            log::debug!("keep-out linearization settled after {} rounds", outer + 1);
            break;
        }
    }
    let sol = last.expect("max_outer >= 1 guarantees one round");
    for w in waypoints {
        let c = &w.selector * &sol.z;
        let c = Vector2::new(c[0], c[1]);
        for o in obstacles {
            let dist = (c - o.center).norm();
            if dist < o.clearance - 1e-6 {
                log::warn!(
                    "keep-out violated after convexification: {dist:.6} < {:.6}",
                    o.clearance
                );
            }
        }
    }
    Ok(sol)
}
