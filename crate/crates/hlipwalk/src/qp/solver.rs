//! Proximal-point wrapper around a dual active-set inner solver.
//!
//! Equalities are eliminated through an orthonormal null-space basis, a small
//! proximal regularization makes the reduced Hessian positive definite even
//! for semidefinite costs, and the inner solver adds the most violated
//! inequality to the active set until none remains. Every arithmetic path is
//! deterministic, so identical inputs reproduce identical iterate sequences.

use nalgebra::{DMatrix, DVector, Dyn};

use super::{kkt_residual, QpProblem, QpSolution, QpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

#[derive(Default, Clone)]
struct Active {
    rows: Vec<(usize, Side)>,
    lam: Vec<f64>,
}

struct Reduction {
    /// Minimum-norm particular solution of the equalities.
    z_p: DVector<f64>,
    /// Orthonormal basis of the equality null space (n x d).
    basis: DMatrix<f64>,
    /// Inequality rows expressed in the reduced coordinates.
    g: DMatrix<f64>,
    lo: DVector<f64>,
    hi: DVector<f64>,
    consistent: bool,
}

fn reduce(p: &QpProblem) -> Reduction {
    let n = p.f.len();
    if p.a_eq.nrows() == 0 {
        return Reduction {
            z_p: DVector::zeros(n),
            basis: DMatrix::identity(n, n),
            g: p.a_in.clone(),
            lo: p.lb.clone(),
            hi: p.ub.clone(),
            consistent: true,
        };
    }
    let svd = p.a_eq.clone().svd(true, true);
    let z_p = svd
        .solve(&p.b_eq, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(n));
    let consistent = (&p.a_eq * &z_p - &p.b_eq).amax() <= 1e-8 * (1.0 + p.b_eq.amax());

    // null space of A_eq from the spectral decomposition of its Gram matrix
    let eig = nalgebra::SymmetricEigen::new(p.a_eq.transpose() * &p.a_eq);
    let cut = 1e-12 * (1.0 + eig.eigenvalues.amax());
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= cut).collect();
    let mut basis = DMatrix::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(i));
    }
    let offset = &p.a_in * &z_p;
    Reduction {
        g: &p.a_in * &basis,
        lo: &p.lb - &offset,
        hi: &p.ub - &offset,
        z_p,
        basis,
        consistent,
    }
}

enum GiStatus {
    Optimal,
    Infeasible,
    OutOfIterations,
}

struct GiOutcome {
    y: DVector<f64>,
    active: Active,
    status: GiStatus,
    iterations: usize,
}

/// Dual active-set solve of `min ½ yᵀĤy + f̂ᵀy s.t. lo ≤ G y ≤ hi` with
/// positive definite `Ĥ`. Starts from the unconstrained minimum and brings
/// in the most violated constraint until feasible.
fn gi_solve(
    h_hat: &DMatrix<f64>,
    chol: &nalgebra::Cholesky<f64, Dyn>,
    f_hat: &DVector<f64>,
    g: &DMatrix<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    tol: f64,
    budget: usize,
    sink: &mut impl FnMut(&DVector<f64>),
) -> GiOutcome {
    let d = f_hat.len();
    let m = g.nrows();
    let mut y = chol.solve(&(-f_hat));
    let mut active = Active::default();
    let mut iterations = 0usize;
    sink(&y);

    'scan: loop {
        // most violated inactive constraint side, lowest row index on ties
        let vals = g * &y;
        let mut worst: Option<(usize, Side, f64)> = None;
        for r in 0..m {
            for (side, v) in [(Side::Lower, lo[r] - vals[r]), (Side::Upper, vals[r] - hi[r])] {
                if v > worst.map_or(tol, |(_, _, w)| w)
                    && !active.rows.iter().any(|&(ar, asd)| ar == r && asd == side)
                {
                    worst = Some((r, side, v));
                }
            }
        }
        let Some((row, side, mut viol)) = worst else {
            return GiOutcome { y, active, status: GiStatus::Optimal, iterations };
        };

        // incoming constraint in outward form a·y ≤ beta
        let a_plus: DVector<f64> = match side {
            Side::Upper => g.row(row).transpose(),
            Side::Lower => -g.row(row).transpose(),
        };
        let mut lam_plus = 0.0;
        loop {
            if iterations >= budget {
                return GiOutcome { y, active, status: GiStatus::OutOfIterations, iterations };
            }
            iterations += 1;

            // primal direction and dual rates from the working-set KKT system
            let q = active.rows.len();
            let mut kkt = DMatrix::<f64>::zeros(d + q, d + q);
            kkt.view_mut((0, 0), (d, d)).copy_from(h_hat);
            for (j, &(r, s)) in active.rows.iter().enumerate() {
                for col in 0..d {
                    let a = match s {
                        Side::Upper => g[(r, col)],
                        Side::Lower => -g[(r, col)],
                    };
                    kkt[(d + j, col)] = a;
                    kkt[(col, d + j)] = a;
                }
            }
            let mut rhs = DVector::<f64>::zeros(d + q);
            for i in 0..d {
                rhs[i] = -a_plus[i];
            }
            let Some(sol) = kkt.lu().solve(&rhs) else {
                return GiOutcome { y, active, status: GiStatus::OutOfIterations, iterations };
            };
            let dir = sol.rows(0, d).into_owned();
            let w = sol.rows(d, q).into_owned();
            let descent = -a_plus.dot(&dir);

            // first multiplier driven to zero as the incoming dual grows
            let mut t2 = f64::INFINITY;
            let mut block: Option<usize> = None;
            for j in 0..q {
                if w[j] < -1e-13 {
                    let t = -active.lam[j] / w[j];
                    if t < t2 {
                        t2 = t;
                        block = Some(j);
                    }
                }
            }
            t2 = t2.max(0.0);

            if descent <= 1e-13 * (1.0 + a_plus.norm_squared()) {
                // cannot reduce the violation while keeping the working set
                let Some(j) = block else {
                    return GiOutcome { y, active, status: GiStatus::Infeasible, iterations };
                };
                y += &dir * t2;
                for jj in 0..q {
                    active.lam[jj] += t2 * w[jj];
                }
                lam_plus += t2;
                active.rows.remove(j);
                active.lam.remove(j);
                sink(&y);
                continue;
            }

            let t1 = viol / descent;
            if t1 <= t2 {
                y += &dir * t1;
                for jj in 0..q {
                    active.lam[jj] += t1 * w[jj];
                }
                active.rows.push((row, side));
                active.lam.push(lam_plus + t1);
                sink(&y);
                continue 'scan;
            }
            y += &dir * t2;
            for jj in 0..q {
                active.lam[jj] += t2 * w[jj];
            }
            lam_plus += t2;
            let j = block.expect("finite partial step implies a blocking index");
            active.rows.remove(j);
            active.lam.remove(j);
            sink(&y);
            let val = (g.row(row) * &y)[0];
            viol = match side {
                Side::Upper => val - hi[row],
                Side::Lower => lo[row] - val,
            };
            if viol <= 0.0 {
                continue 'scan;
            }
        }
    }
}

fn finish(
    p: &QpProblem,
    z: DVector<f64>,
    active: &Active,
    status: QpStatus,
    iterations: usize,
) -> QpSolution {
    let mut dual_in = DVector::zeros(p.a_in.nrows());
    for (j, &(r, side)) in active.rows.iter().enumerate() {
        let l = active.lam[j].max(0.0);
        match side {
            Side::Lower => dual_in[r] += l,
            Side::Upper => dual_in[r] -= l,
        }
    }
    let dual_eq = if p.a_eq.nrows() == 0 {
        DVector::zeros(0)
    } else {
        let rhs = p.a_in.transpose() * &dual_in - &p.h * &z - &p.f;
        p.a_eq
            .transpose()
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(p.a_eq.nrows()))
    };
    let mut sol = QpSolution { z, dual_eq, dual_in, status, iterations, kkt_residual: 0.0 };
    sol.kkt_residual = kkt_residual(p, &sol);
    sol
}

/// Solves a validated [`QpProblem`]. See the module docs for the form.
///
/// The warm start seeds the proximal center; infeasible constraints yield
/// status `Infeasible`, and exhausting `max_iter` active-set iterations
/// yields `MaxIterations` with the best iterate of record.
pub fn solve_qp(
    p: &QpProblem,
    warm_start: Option<&DVector<f64>>,
    tol: f64,
    max_iter: usize,
) -> QpSolution {
    solve_impl(p, warm_start, tol, max_iter, None)
}

/// Like [`solve_qp`] but also returns every primal iterate in the original
/// coordinates. Identical inputs produce bitwise-identical sequences.
pub fn solve_qp_traced(
    p: &QpProblem,
    warm_start: Option<&DVector<f64>>,
    tol: f64,
    max_iter: usize,
) -> (QpSolution, Vec<DVector<f64>>) {
    let mut trace = Vec::new();
    let sol = solve_impl(p, warm_start, tol, max_iter, Some(&mut trace));
    (sol, trace)
}

fn solve_impl(
    p: &QpProblem,
    warm_start: Option<&DVector<f64>>,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<DVector<f64>>>,
) -> QpSolution {
    let n = p.f.len();
    let red = reduce(p);
    if !red.consistent {
        return finish(p, red.z_p, &Active::default(), QpStatus::Infeasible, 0);
    }
    let d = red.basis.ncols();
    if d == 0 {
        // the equalities pin z completely; only feasibility remains
        let vals = &p.a_in * &red.z_p;
        let feasible =
            (0..vals.len()).all(|i| vals[i] >= p.lb[i] - tol && vals[i] <= p.ub[i] + tol);
        let status = if feasible { QpStatus::Optimal } else { QpStatus::Infeasible };
        return finish(p, red.z_p, &Active::default(), status, 0);
    }

    let scale = 1.0 + p.h.amax();
    let mut eps = 1e-8 * scale;
    let h_base = red.basis.transpose() * &p.h * &red.basis;
    let (h_hat, chol) = loop {
        let candidate = &h_base + DMatrix::identity(d, d) * eps;
        if let Some(c) = candidate.clone().cholesky() {
            break (candidate, c);
        }
        eps *= 100.0;
        if eps > scale {
            return finish(p, red.z_p, &Active::default(), QpStatus::MaxIterations, 0);
        }
    };

    let mut center = match warm_start {
        Some(w) if w.len() == n => w.clone(),
        _ => DVector::zeros(n),
    };
    let mut iterations = 0usize;
    let mut last: Option<(DVector<f64>, Active)> = None;
    let mut status = QpStatus::MaxIterations;
    for _ in 0..100 {
        let f_hat = red.basis.transpose() * (&p.h * &red.z_p + &p.f + (&red.z_p - &center) * eps);
        let mut sink = |y: &DVector<f64>| {
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(&red.z_p + &red.basis * y);
            }
        };
        let out = gi_solve(
            &h_hat,
            &chol,
            &f_hat,
            &red.g,
            &red.lo,
            &red.hi,
            tol,
            max_iter.saturating_sub(iterations),
            &mut sink,
        );
        iterations += out.iterations;
        let z_new = &red.z_p + &red.basis * &out.y;
        match out.status {
            GiStatus::Infeasible => {
                return finish(p, z_new, &out.active, QpStatus::Infeasible, iterations)
            }
            GiStatus::OutOfIterations => {
                return finish(p, z_new, &out.active, QpStatus::MaxIterations, iterations)
            }
            GiStatus::Optimal => {}
        }
        let step = (&z_new - &center).amax();
        center = z_new.clone();
        last = Some((z_new, out.active));
        if step <= 0.1 * tol * (1.0 + center.amax()) {
            status = QpStatus::Optimal;
            break;
        }
    }
    let (z, active) = last.expect("at least one proximal round ran");
    finish(p, z, &active, status, iterations)
}
