//! Zonotope arithmetic and disturbance-invariant sets.
//!
//! Zonotopes are closed under linear maps and Minkowski sums, which makes the
//! robust-positively-invariant recursion exact: no vertex or facet
//! enumeration is ever needed. Membership is decided by a small bounded
//! least-norm solve through the [`crate::qp`] module.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hlip::spectral_radius;
use crate::qp::{self, QpProblem, QpStatus};

/// Centrally symmetric set {center + Σ αᵢ gᵢ : |αᵢ| ≤ 1}.
///
/// Serializes to JSON as `{"center": [...], "generators": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    pub center: Vec<f64>,
    pub generators: Vec<Vec<f64>>,
}

impl Zonotope {
    /// Validates dimensions and finiteness.
    pub fn new(center: Vec<f64>, generators: Vec<Vec<f64>>) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidInput("zonotope center must be nonempty".into()));
        }
        if !center.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("zonotope center must be finite".into()));
        }
        for g in &generators {
            if g.len() != center.len() {
                return Err(Error::InvalidInput(format!(
                    "generator of dimension {} in a {}-dimensional zonotope",
                    g.len(),
                    center.len()
                )));
            }
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput("zonotope generators must be finite".into()));
            }
        }
        Ok(Self { center, generators })
    }

    /// A single point.
    pub fn point(center: Vec<f64>) -> Self {
        Self { center, generators: Vec::new() }
    }

    /// Axis-aligned box with one generator per axis.
    pub fn axis_box(center: &[f64], half_widths: &[f64]) -> Self {
        let n = center.len();
        assert_eq!(n, half_widths.len());
        let generators = (0..n)
            .map(|i| {
                let mut g = vec![0.0; n];
                g[i] = half_widths[i];
                g
            })
            .collect();
        Self { center: center.to_vec(), generators }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Number of generators.
    pub fn order(&self) -> usize {
        self.generators.len()
    }

    /// Scales every generator about the unchanged center.
    pub fn inflate(&self, factor: f64) -> Self {
        Self {
            center: self.center.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    fn center_na(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.center)
    }

    fn generators_na(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, self.order(), |i, j| self.generators[j][i])
    }
}

/// One recorded step-to-step model mismatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSample {
    pub w: [f64; 3],
}

/// Componentwise bounding box of the samples, centered at the box midpoint,
/// half-widths inflated by `1 + margin`. Components with zero spread get the
/// fallback half-width `margin * max(|center_i|, 1e-6)`.
pub fn estimate_w(samples: &[DisturbanceSample], margin: f64) -> Result<Zonotope> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no disturbance samples".into()));
    }
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(Error::InvalidParameter(format!("margin must be nonnegative, got {margin}")));
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for s in samples {
        for i in 0..3 {
            if !s.w[i].is_finite() {
                return Err(Error::InvalidInput("disturbance samples must be finite".into()));
            }
            lo[i] = lo[i].min(s.w[i]);
            hi[i] = hi[i].max(s.w[i]);
        }
    }
    let mut center = [0.0; 3];
    let mut half = [0.0; 3];
    for i in 0..3 {
        center[i] = 0.5 * (lo[i] + hi[i]);
        let spread = 0.5 * (hi[i] - lo[i]);
        half[i] = if spread > 0.0 {
            spread * (1.0 + margin)
        } else {
            margin * center[i].abs().max(1e-6)
        };
    }
    Ok(Zonotope::axis_box(&center, &half))
}

/// Image of a zonotope under a linear map; exact.
pub fn linear_map(m: &DMatrix<f64>, z: &Zonotope) -> Result<Zonotope> {
    if m.ncols() != z.dim() {
        return Err(Error::InvalidInput(format!(
            "map with {} columns applied to a {}-dimensional zonotope",
            m.ncols(),
            z.dim()
        )));
    }
    let center = (m * z.center_na()).iter().copied().collect();
    let generators = z
        .generators
        .iter()
        .map(|g| (m * DVector::from_column_slice(g)).iter().copied().collect())
        .collect();
    Ok(Zonotope { center, generators })
}

/// Minkowski sum: centers add, generator lists concatenate; exact.
pub fn minkowski_sum(z1: &Zonotope, z2: &Zonotope) -> Result<Zonotope> {
    if z1.dim() != z2.dim() {
        return Err(Error::InvalidInput(format!(
            "minkowski sum of dimensions {} and {}",
            z1.dim(),
            z2.dim()
        )));
    }
    let center = z1.center.iter().zip(&z2.center).map(|(a, b)| a + b).collect();
    let mut generators = z1.generators.clone();
    generators.extend(z2.generators.iter().cloned());
    Ok(Zonotope { center, generators })
}

/// Support function: `dirᵀ center + Σ |dirᵀ gᵢ|`.
pub fn support(z: &Zonotope, dir: &[f64]) -> Result<f64> {
    if dir.len() != z.dim() {
        return Err(Error::InvalidInput(format!(
            "direction of dimension {} for a {}-dimensional zonotope",
            dir.len(),
            z.dim()
        )));
    }
    if dir.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput("support direction must be nonzero".into()));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    Ok(dot(dir, &z.center) + z.generators.iter().map(|g| dot(dir, g).abs()).sum::<f64>())
}

/// Membership of `x` in the zonotope with its coefficient box inflated to
/// `1 + tol`: feasibility of `center + G α = x`, `|αᵢ| ≤ 1 + tol`, decided
/// by a bounded least-norm solve.
pub fn contains(z: &Zonotope, x: &[f64], tol: f64) -> Result<bool> {
    if x.len() != z.dim() {
        return Err(Error::InvalidInput(format!(
            "point of dimension {} against a {}-dimensional zonotope",
            x.len(),
            z.dim()
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tol must be nonnegative, got {tol}")));
    }
    let r = DVector::from_fn(z.dim(), |i, _| x[i] - z.center[i]);
    let g = z.order();
    if g == 0 {
        let scale = 1.0 + z.center.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Ok(r.amax() <= 1e-9 * scale);
    }
    let p = QpProblem::new(
        DMatrix::identity(g, g),
        DVector::zeros(g),
        z.generators_na(),
        r,
        DMatrix::identity(g, g),
        DVector::from_element(g, -(1.0 + tol)),
        DVector::from_element(g, 1.0 + tol),
    )?;
    let sol = qp::solve_qp(&p, None, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER);
    match sol.status {
        QpStatus::Optimal => Ok(true),
        QpStatus::Infeasible => Ok(false),
        QpStatus::MaxIterations => {
            log::warn!("membership solve hit the iteration cap; reporting not contained");
            Ok(false)
        }
    }
}

/// The 26 certification directions: nonzero sign vectors of {−1, 0, 1}³,
/// normalized.
pub fn direction_grid() -> Vec<Vector3<f64>> {
    let mut dirs = Vec::with_capacity(26);
    for sx in [-1.0, 0.0, 1.0] {
        for sy in [-1.0, 0.0, 1.0] {
            for sz in [-1.0, 0.0, 1.0] {
                let v = Vector3::new(sx, sy, sz);
                if v.norm() > 0.0 {
                    dirs.push(v / v.norm());
                }
            }
        }
    }
    dirs
}

fn grid_radius(z: &Zonotope) -> f64 {
    direction_grid()
        .iter()
        .map(|d| support(z, d.as_slice()).expect("grid directions are nonzero"))
        .fold(0.0f64, f64::max)
}

/// Outer approximation of the minimal robust positively invariant set of
/// `e⁺ = Acl e + w`, `w ∈ W`, accurate to `eps` in support over the
/// 26-direction grid.
///
/// `W` is re-centered before the recursion; the steady-state offset
/// `(I − Acl)⁻¹ c_W` is returned as the center of the result, so membership
/// of raw errors can be tested directly. A non-box `W` is widened to its
/// axis-aligned bounding box, which keeps the result a valid outer set.
pub fn mrpi_outer(acl: &Matrix3<f64>, w: &Zonotope, eps: f64) -> Result<Zonotope> {
    if w.dim() != 3 {
        return Err(Error::InvalidInput(format!(
            "invariant sets are computed for 3-dimensional errors, got dimension {}",
            w.dim()
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let rho = spectral_radius(acl);
    if rho >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "closed loop must be strictly stable, spectral radius is {rho:.6}"
        )));
    }

    // bounding box of the re-centered W; half-widths are axis supports
    let w0 = Zonotope { center: vec![0.0; 3], generators: w.generators.clone() };
    let mut half = [0.0; 3];
    for i in 0..3 {
        let mut d = [0.0; 3];
        d[i] = 1.0;
        half[i] = support(&w0, &d)?;
        if half[i] <= 0.0 {
            return Err(Error::InvalidInput(
                "W must contain the origin in its interior after re-centering".into(),
            ));
        }
    }
    let w_box = Zonotope::axis_box(&[0.0; 3], &half);
    let acl_dm = DMatrix::from_fn(3, 3, |i, j| acl[(i, j)]);

    const MAX_S: usize = 500;
    let mut f_s = w_box.clone();
    let mut power = acl_dm.clone();
    let mut s = 1usize;
    let alpha = loop {
        // smallest α with Acl^s W ⊆ α W, exact for the axis-aligned box
        let mapped = linear_map(&power, &w_box)?;
        let mut alpha: f64 = 0.0;
        for i in 0..3 {
            let mut d = [0.0; 3];
            d[i] = 1.0;
            alpha = alpha.max(support(&mapped, &d)? / half[i]);
        }
        if alpha <= eps / (eps + grid_radius(&f_s)) {
            break alpha;
        }
        if s >= MAX_S {
            return Err(Error::NonConvergence(format!(
                "invariant-set recursion still above tolerance at s = {MAX_S}"
            )));
        }
        f_s = minkowski_sum(&f_s, &mapped)?;
        power *= &acl_dm;
        s += 1;
    };
    log::debug!("invariant set converged at s = {s}, alpha = {alpha:.3e}");

    let offset = (Matrix3::identity() - acl)
        .lu()
        .solve(&Vector3::new(w.center[0], w.center[1], w.center[2]))
        .ok_or_else(|| Error::NumericalFailure("I - Acl is singular".into()))?;
    let mut e = f_s.inflate(1.0 / (1.0 - alpha));
    e.center = offset.iter().copied().collect();

    // invariance certificate against the actual W, offsets included
    let mapped_e = linear_map(&acl_dm, &e)?;
    let pushed = minkowski_sum(&mapped_e, w)?;
    for d in direction_grid() {
        let lhs = support(&pushed, d.as_slice())?;
        let rhs = support(&e, d.as_slice())?;
        if lhs > rhs + eps + 1e-12 {
            return Err(Error::NumericalFailure(format!(
                "invariance certificate failed in direction {:?}: {lhs} > {rhs} + {eps}",
                d.as_slice()
            )));
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hlip::{dlqr_gain, make_params, s2s_matrices, LqrWeights};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_zonotope(rng: &mut ChaCha8Rng, dim: usize, order: usize) -> Zonotope {
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let generators = (0..order)
            .map(|_| (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        Zonotope { center, generators }
    }

    #[test]
    fn estimate_w_symmetric_pair() {
        let samples = [
            DisturbanceSample { w: [1.0, 1.0, 1.0] },
            DisturbanceSample { w: [-1.0, -1.0, -1.0] },
        ];
        let z = estimate_w(&samples, 0.0).unwrap();
        assert_eq!(z.center, vec![0.0, 0.0, 0.0]);
        assert_eq!(z.generators.len(), 3);
        for i in 0..3 {
            assert_eq!(z.generators[i][i], 1.0);
        }
    }

    #[test]
    fn estimate_w_degenerate_components() {
        let z = estimate_w(&[DisturbanceSample { w: [0.01, 0.0, 0.02] }], 0.1).unwrap();
        assert_eq!(z.center, vec![0.01, 0.0, 0.02]);
        assert_relative_eq!(z.generators[0][0], 0.001, epsilon = 1e-15);
        assert_relative_eq!(z.generators[1][1], 1e-7, epsilon = 1e-20);
        assert_relative_eq!(z.generators[2][2], 0.002, epsilon = 1e-15);
    }

    #[test]
    fn estimate_w_rejects_empty_and_nonfinite() {
        assert!(matches!(estimate_w(&[], 0.1), Err(Error::InvalidInput(_))));
        let bad = [DisturbanceSample { w: [f64::NAN, 0.0, 0.0] }];
        assert!(estimate_w(&bad, 0.1).is_err());
        let ok = [DisturbanceSample { w: [0.0, 0.0, 0.0] }];
        assert!(matches!(estimate_w(&ok, -0.5), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn linear_map_identity_zero_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let z = random_zonotope(&mut rng, 3, 5);
        let id = linear_map(&DMatrix::identity(3, 3), &z).unwrap();
        assert_eq!(id, z);

        let zero = linear_map(&DMatrix::zeros(3, 3), &z).unwrap();
        assert_eq!(zero.center, vec![0.0; 3]);
        assert!(zero.generators.iter().all(|g| g.iter().all(|v| *v == 0.0)));

        let doubled = linear_map(&(DMatrix::identity(3, 3) * 2.0), &z).unwrap();
        for d in direction_grid() {
            assert_relative_eq!(
                support(&doubled, d.as_slice()).unwrap(),
                2.0 * support(&z, d.as_slice()).unwrap(),
                epsilon = 1e-12
            );
        }

        assert!(linear_map(&DMatrix::identity(4, 4), &z).is_err());
    }

    #[test]
    fn minkowski_sum_identity_and_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let z = random_zonotope(&mut rng, 3, 4);
        let zero = Zonotope::point(vec![0.0; 3]);
        let same = minkowski_sum(&z, &zero).unwrap();
        assert_eq!(same.center, z.center);
        assert_eq!(same.generators, z.generators);

        let unit = Zonotope::axis_box(&[0.0; 3], &[1.0; 3]);
        let two = minkowski_sum(&unit, &unit).unwrap();
        for i in 0..3 {
            let mut d = [0.0; 3];
            d[i] = 1.0;
            assert_relative_eq!(support(&two, &d).unwrap(), 2.0, epsilon = 1e-15);
        }

        assert!(minkowski_sum(&z, &Zonotope::point(vec![0.0; 2])).is_err());
    }

    #[test]
    fn support_is_additive_under_minkowski_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let n1 = rng.random_range(1..6);
            let n2 = rng.random_range(1..6);
            let z1 = random_zonotope(&mut rng, 3, n1);
            let z2 = random_zonotope(&mut rng, 3, n2);
            let sum = minkowski_sum(&z1, &z2).unwrap();
            for _ in 0..5 {
                let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                if d.iter().all(|v| *v == 0.0) {
                    continue;
                }
                assert_relative_eq!(
                    support(&sum, &d).unwrap(),
                    support(&z1, &d).unwrap() + support(&z2, &d).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn support_examples_and_sampled_lower_bound() {
        let point = Zonotope::point(vec![0.3, -0.2, 1.0]);
        assert_relative_eq!(support(&point, &[1.0, 2.0, -1.0]).unwrap(), 0.3 - 0.4 - 1.0);

        let unit = Zonotope::axis_box(&[0.0; 3], &[1.0; 3]);
        assert_relative_eq!(support(&unit, &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(support(&unit, &[0.0, 0.0, 0.0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let z = random_zonotope(&mut rng, 3, 6);
        let g = z.generators_na();
        let c = z.center_na();
        for _ in 0..4 {
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let exact = support(&z, &d).unwrap();
            let dv = DVector::from_column_slice(&d);
            let mut best = f64::NEG_INFINITY;
            for _ in 0..10_000 {
                let alpha = DVector::from_fn(z.order(), |_, _| {
                    if rng.random_bool(0.5) { 1.0 } else { -1.0 }
                });
                best = best.max(dv.dot(&(&c + &g * alpha)));
            }
            assert!(best <= exact + 1e-12, "sampled support exceeded the exact value");
            assert!(exact - best <= 1e-3, "sampled lower bound too far: {} vs {}", best, exact);
        }
    }

    #[test]
    fn contains_center_boundary_and_outside() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let z = random_zonotope(&mut rng, 3, 5);
        assert!(contains(&z, &z.center.clone(), 0.0).unwrap());

        let unit = Zonotope::axis_box(&[0.0; 3], &[1.0; 3]);
        let tol = 0.05;
        assert!(!contains(&unit, &[1.0 + 2.0 * tol, 0.0, 0.0], tol).unwrap());
        assert!(contains(&unit, &[1.0, 1.0, 1.0], 1e-9).unwrap());

        let point = Zonotope::point(vec![0.5, 0.5, 0.5]);
        assert!(contains(&point, &[0.5, 0.5, 0.5], 0.0).unwrap());
        assert!(!contains(&point, &[0.5, 0.5, 0.6], 0.0).unwrap());

        assert!(contains(&unit, &[0.0, 0.0], 0.0).is_err());
        assert!(contains(&unit, &[0.0, 0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn contains_accepts_every_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let z = random_zonotope(&mut rng, 3, 10);
        let g = z.generators_na();
        let c = z.center_na();
        for mask in 0..(1u32 << z.order()) {
            let alpha = DVector::from_fn(z.order(), |i, _| {
                if mask >> i & 1 == 1 { 1.0 } else { -1.0 }
            });
            let x = &c + &g * alpha;
            assert!(
                contains(&z, x.as_slice(), 1e-9).unwrap(),
                "vertex {mask} reported outside"
            );
        }
    }

    #[test]
    fn contains_is_monotone_in_tol() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let z = random_zonotope(&mut rng, 3, 5);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let tight = contains(&z, &x, 0.0).unwrap();
            let loose = contains(&z, &x, 0.5).unwrap();
            assert!(!tight || loose, "membership must be monotone in tol");
        }
    }

    #[test]
    fn rpi_recursion_is_monotone() {
        let params = make_params(1.0, 9.81, 0.35, 0.05).unwrap();
        let m = s2s_matrices(&params);
        let k = dlqr_gain(&m.a, &m.b, &LqrWeights::default()).unwrap();
        let acl = m.a + m.b * k;
        let acl_dm = DMatrix::from_fn(3, 3, |i, j| acl[(i, j)]);
        let w = Zonotope::axis_box(&[0.0; 3], &[0.01, 0.01, 0.02]);

        let mut f = w.clone();
        let mut power = acl_dm.clone();
        for _ in 0..6 {
            let next = minkowski_sum(&f, &linear_map(&power, &w).unwrap()).unwrap();
            for d in direction_grid() {
                assert!(
                    support(&next, d.as_slice()).unwrap()
                        >= support(&f, d.as_slice()).unwrap() - 1e-12
                );
            }
            f = next;
            power *= &acl_dm;
        }
    }

    #[test]
    fn mrpi_annihilating_loop_returns_w() {
        let w = Zonotope::axis_box(&[0.0; 3], &[0.3, 0.2, 0.1]);
        let e = mrpi_outer(&Matrix3::zeros(), &w, 1e-3).unwrap();
        assert_eq!(e.center, vec![0.0; 3]);
        for d in direction_grid() {
            assert_relative_eq!(
                support(&e, d.as_slice()).unwrap(),
                support(&w, d.as_slice()).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn mrpi_geometric_series_case() {
        let w = Zonotope::axis_box(&[0.0; 3], &[1.0; 3]);
        let acl = Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 0.5));
        let e = mrpi_outer(&acl, &w, 0.01).unwrap();
        for i in 0..3 {
            let mut d = [0.0; 3];
            d[i] = 1.0;
            let hw = support(&e, &d).unwrap();
            assert!((hw - 2.0).abs() <= 0.05 * 2.0, "half-width {hw} vs series limit 2");
        }
    }

    #[test]
    fn mrpi_default_closed_loop_is_invariant() {
        let params = make_params(1.0, 9.81, 0.35, 0.05).unwrap();
        let m = s2s_matrices(&params);
        let k = dlqr_gain(&m.a, &m.b, &LqrWeights::default()).unwrap();
        let acl = m.a + m.b * k;
        let w = Zonotope::axis_box(&[0.001, -0.0005, 0.002], &[0.004, 0.003, 0.008]);
        let eps = 1e-3;
        let e = mrpi_outer(&acl, &w, eps).unwrap();

        let acl_dm = DMatrix::from_fn(3, 3, |i, j| acl[(i, j)]);
        let pushed = minkowski_sum(&linear_map(&acl_dm, &e).unwrap(), &w).unwrap();
        for d in direction_grid() {
            let lhs = support(&pushed, d.as_slice()).unwrap();
            let rhs = support(&e, d.as_slice()).unwrap();
            assert!(lhs <= rhs + eps + 1e-12, "direction {:?}: {lhs} > {rhs} + {eps}", d);
        }

        // the offset center is the fixed point of the disturbance mean
        let c = Vector3::new(e.center[0], e.center[1], e.center[2]);
        let w_mean = Vector3::new(0.001, -0.0005, 0.002);
        assert_abs_diff_eq!((acl * c + w_mean - c).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mrpi_rejects_bad_inputs() {
        let w = Zonotope::axis_box(&[0.0; 3], &[0.1, 0.1, 0.1]);
        let unstable = Matrix3::from_diagonal(&Vector3::new(1.0, 0.5, 0.5));
        assert!(matches!(mrpi_outer(&unstable, &w, 1e-3), Err(Error::InvalidInput(_))));

        let flat = Zonotope::axis_box(&[0.0; 3], &[0.1, 0.0, 0.1]);
        let stable = Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 0.5));
        assert!(matches!(mrpi_outer(&stable, &flat, 1e-3), Err(Error::InvalidInput(_))));

        assert!(mrpi_outer(&stable, &w, 0.0).is_err());

        let slow = Matrix3::from_diagonal(&Vector3::new(0.99, 0.99, 0.99));
        assert!(matches!(mrpi_outer(&slow, &w, 1e-6), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn zonotope_json_shape() {
        let z = Zonotope::axis_box(&[0.0, 0.5, 1.0], &[1.0, 2.0, 3.0]);
        let json = serde_json::to_string(&z).unwrap();
        assert_eq!(
            json,
            "{\"center\":[0.0,0.5,1.0],\"generators\":[[1.0,0.0,0.0],[0.0,2.0,0.0],[0.0,0.0,3.0]]}"
        );
        let back: Zonotope = serde_json::from_str(&json).unwrap();
        assert_eq!(back, z);
    }
}
