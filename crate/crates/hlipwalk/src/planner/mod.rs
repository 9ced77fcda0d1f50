//! Step planning: MPC over the step-to-step dynamics along a reference path.
//!
//! The decision vector stacks the predicted states of both planes and the
//! step sizes, `z = [x_1..x_N, y_1..y_N, u_x_1..u_x_N, u_y_1..u_y_N]`
//! (8N entries). Step-size bounds are expressed in the path frame by
//! rotating (u_x, u_y) to sagittal length and lateral width at the heading
//! of each planned impact; width bounds alternate sign with the stance leg.

pub mod path;

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hlip::{HlipParams, PlanarState, S2SMatrices};
use crate::qp::{self, solve_obstacle_scp, Obstacle, QpProblem, QpStatus, ScpWaypoint};

pub use path::{
    make_path, sample_reference, CornerEvent, Path, PathReference, PathShape, ProfileKind,
    SpeedProfile,
};

/// Leg currently bearing weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Left,
    Right,
}

impl Stance {
    pub fn flipped(self) -> Self {
        match self {
            Stance::Left => Stance::Right,
            Stance::Right => Stance::Left,
        }
    }
}

/// Where the MPC anchors its initial state each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorMode {
    /// Propagate the internal reference model; the robot tracks it through
    /// stepping feedback.
    Reference,
    /// Re-anchor to the measured robot state before each solve.
    Measured,
}

fn default_s_l_min() -> f64 {
    -0.5
}
fn default_s_l_max() -> f64 {
    0.5
}
fn default_s_w_min() -> f64 {
    0.10
}
fn default_s_w_max() -> f64 {
    0.35
}

/// Step-size bounds in the path frame, stated for left stance; the lateral
/// pair mirrors for right stance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConstraints {
    #[serde(default = "default_s_l_min")]
    pub s_l_min: f64,
    #[serde(default = "default_s_l_max")]
    pub s_l_max: f64,
    #[serde(default = "default_s_w_min")]
    pub s_w_min: f64,
    #[serde(default = "default_s_w_max")]
    pub s_w_max: f64,
}

impl Default for StepConstraints {
    fn default() -> Self {
        Self {
            s_l_min: default_s_l_min(),
            s_l_max: default_s_l_max(),
            s_w_min: default_s_w_min(),
            s_w_max: default_s_w_max(),
        }
    }
}

impl StepConstraints {
    /// Checks ordering and the finite minimum step width that keeps the
    /// swing leg from crossing the stance leg.
    pub fn validate(&self) -> Result<()> {
        if !(self.s_l_min <= self.s_l_max) {
            return Err(Error::InvalidInput(format!(
                "sagittal bounds out of order: [{}, {}]",
                self.s_l_min, self.s_l_max
            )));
        }
        if !(self.s_w_min <= self.s_w_max) {
            return Err(Error::InvalidInput(format!(
                "lateral bounds out of order: [{}, {}]",
                self.s_w_min, self.s_w_max
            )));
        }
        if self.s_w_min.is_finite() && !(self.s_w_min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lateral width minimum must be positive to keep the legs apart, got {}",
                self.s_w_min
            )));
        }
        Ok(())
    }

    /// No step-size limits; for analysis only.
    pub fn unbounded() -> Self {
        Self {
            s_l_min: f64::NEG_INFINITY,
            s_l_max: f64::INFINITY,
            s_w_min: f64::NEG_INFINITY,
            s_w_max: f64::INFINITY,
        }
    }
}

fn default_horizon() -> usize {
    8
}
fn default_alpha() -> f64 {
    0.1
}
fn default_weight() -> f64 {
    1.0
}
fn default_qp_tol() -> f64 {
    qp::DEFAULT_TOL
}
fn default_qp_max_iter() -> usize {
    qp::DEFAULT_MAX_ITER
}
fn default_obstacle_margin() -> f64 {
    0.05
}
fn default_scp_max_outer() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpcConfig {
    /// Look-ahead horizon in steps.
    #[serde(default = "default_horizon")]
    pub n: usize,
    /// Weight on the step-size cost relative to tracking.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub constraints: StepConstraints,
    /// Weight on squared position error in the tracking cost.
    #[serde(default = "default_weight")]
    pub pos_weight: f64,
    /// Weight on squared velocity error in the tracking cost.
    #[serde(default = "default_weight")]
    pub vel_weight: f64,
    #[serde(default = "default_qp_tol")]
    pub qp_tol: f64,
    #[serde(default = "default_qp_max_iter")]
    pub qp_max_iter: usize,
    /// Extra clearance added to every obstacle radius before planning.
    #[serde(default = "default_obstacle_margin")]
    pub obstacle_margin: f64,
    /// Outer convexification rounds when obstacles are present.
    #[serde(default = "default_scp_max_outer")]
    pub scp_max_outer: usize,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            n: default_horizon(),
            alpha: default_alpha(),
            constraints: StepConstraints::default(),
            pos_weight: default_weight(),
            vel_weight: default_weight(),
            qp_tol: default_qp_tol(),
            qp_max_iter: default_qp_max_iter(),
            obstacle_margin: default_obstacle_margin(),
            scp_max_outer: default_scp_max_outer(),
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be nonnegative, got {}",
                self.alpha
            )));
        }
        if !(self.pos_weight >= 0.0) || !(self.vel_weight >= 0.0) {
            return Err(Error::InvalidParameter("tracking weights must be nonnegative".into()));
        }
        if !(self.qp_tol > 0.0) {
            return Err(Error::InvalidParameter("qp_tol must be positive".into()));
        }
        if self.scp_max_outer < 1 {
            return Err(Error::InvalidParameter("scp_max_outer must be at least 1".into()));
        }
        if !(self.obstacle_margin >= 0.0) {
            return Err(Error::InvalidParameter("obstacle_margin must be nonnegative".into()));
        }
        self.constraints.validate()
    }
}

/// Rotates a world-frame step (u_x, u_y) into the path frame at heading
/// `theta`: sagittal length and lateral width.
pub fn rotate_to_heading(u_x: f64, u_y: f64, theta: f64) -> (f64, f64) {
    let (sin, cos) = theta.sin_cos();
    (u_x * cos + u_y * sin, -u_x * sin + u_y * cos)
}

/// One solved plan over the horizon. The first entries of `u_x`/`u_y` are
/// the commands to apply at the upcoming impact.
#[derive(Debug, Clone)]
pub struct MpcPlan {
    pub u_x: Vec<f64>,
    pub u_y: Vec<f64>,
    pub states_x: Vec<PlanarState>,
    pub states_y: Vec<PlanarState>,
    /// Tracking-plus-input cost of the returned sequences.
    pub objective: f64,
    /// Wall-clock seconds spent in the solver.
    pub solve_time: f64,
    /// True when the solver failed and the previous plan was shifted instead.
    pub fallback: bool,
    /// State the plan was anchored at (x plane).
    pub anchor_x: PlanarState,
    /// State the plan was anchored at (y plane).
    pub anchor_y: PlanarState,
}

impl MpcPlan {
    /// Largest violation of the step-to-step equalities along the plan.
    pub fn dynamics_residual(&self, m: &S2SMatrices) -> f64 {
        let mut worst: f64 = 0.0;
        let mut prev_x = self.anchor_x.as_vector();
        let mut prev_y = self.anchor_y.as_vector();
        for k in 0..self.u_x.len() {
            let pred_x = m.a * prev_x + m.b * self.u_x[k];
            let pred_y = m.a * prev_y + m.b * self.u_y[k];
            worst = worst
                .max((pred_x - self.states_x[k].as_vector()).amax())
                .max((pred_y - self.states_y[k].as_vector()).amax());
            prev_x = self.states_x[k].as_vector();
            prev_y = self.states_y[k].as_vector();
        }
        worst
    }
}

fn idx_x(n: usize, k: usize, i: usize) -> usize {
    debug_assert!(k >= 1 && k <= n && i < 3);
    3 * (k - 1) + i
}

fn idx_y(n: usize, k: usize, i: usize) -> usize {
    3 * n + 3 * (k - 1) + i
}

fn idx_ux(n: usize, k: usize) -> usize {
    6 * n + (k - 1)
}

fn idx_uy(n: usize, k: usize) -> usize {
    7 * n + (k - 1)
}

/// Lateral width bounds for the step taken from the given stance leg.
fn width_bounds(c: &StepConstraints, stance: Stance) -> (f64, f64) {
    match stance {
        Stance::Left => (c.s_w_min, c.s_w_max),
        Stance::Right => (-c.s_w_max, -c.s_w_min),
    }
}

/// Assembles the horizon QP from explicit reference samples, one per
/// planned impact.
pub fn build_mpc_qp_from_refs(
    x_now: &PlanarState,
    y_now: &PlanarState,
    matrices: &S2SMatrices,
    refs: &[PathReference],
    cfg: &MpcConfig,
    stance: Stance,
) -> Result<QpProblem> {
    cfg.validate()?;
    let n = cfg.n;
    if refs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "horizon {} needs {} reference samples, got {}",
            n,
            n,
            refs.len()
        )));
    }
    let nv = 8 * n;

    let mut h = DMatrix::zeros(nv, nv);
    let mut f = DVector::zeros(nv);
    for k in 1..=n {
        let r = &refs[k - 1];
        h[(idx_x(n, k, 0), idx_x(n, k, 0))] = 2.0 * cfg.pos_weight;
        h[(idx_x(n, k, 2), idx_x(n, k, 2))] = 2.0 * cfg.vel_weight;
        h[(idx_y(n, k, 0), idx_y(n, k, 0))] = 2.0 * cfg.pos_weight;
        h[(idx_y(n, k, 2), idx_y(n, k, 2))] = 2.0 * cfg.vel_weight;
        h[(idx_ux(n, k), idx_ux(n, k))] = 2.0 * cfg.alpha;
        h[(idx_uy(n, k), idx_uy(n, k))] = 2.0 * cfg.alpha;
        f[idx_x(n, k, 0)] = -2.0 * cfg.pos_weight * r.r[0];
        f[idx_x(n, k, 2)] = -2.0 * cfg.vel_weight * r.rdot[0];
        f[idx_y(n, k, 0)] = -2.0 * cfg.pos_weight * r.r[1];
        f[idx_y(n, k, 2)] = -2.0 * cfg.vel_weight * r.rdot[1];
    }

    let mut a_eq = DMatrix::zeros(6 * n, nv);
    let mut b_eq = DVector::zeros(6 * n);
    for k in 1..=n {
        for i in 0..3 {
            let row_x = 3 * (k - 1) + i;
            let row_y = 3 * n + 3 * (k - 1) + i;
            a_eq[(row_x, idx_x(n, k, i))] = 1.0;
            a_eq[(row_y, idx_y(n, k, i))] = 1.0;
            a_eq[(row_x, idx_ux(n, k))] = -matrices.b[i];
            a_eq[(row_y, idx_uy(n, k))] = -matrices.b[i];
            if k == 1 {
                b_eq[row_x] = (matrices.a * x_now.as_vector())[i];
                b_eq[row_y] = (matrices.a * y_now.as_vector())[i];
            } else {
                for j in 0..3 {
                    a_eq[(row_x, idx_x(n, k - 1, j))] = -matrices.a[(i, j)];
                    a_eq[(row_y, idx_y(n, k - 1, j))] = -matrices.a[(i, j)];
                }
            }
        }
    }

    let mut a_in = DMatrix::zeros(2 * n, nv);
    let mut lb = DVector::zeros(2 * n);
    let mut ub = DVector::zeros(2 * n);
    let mut stance_k = stance;
    for k in 1..=n {
        let (sin, cos) = refs[k - 1].theta.sin_cos();
        let row_l = 2 * (k - 1);
        let row_w = row_l + 1;
        a_in[(row_l, idx_ux(n, k))] = cos;
        a_in[(row_l, idx_uy(n, k))] = sin;
        lb[row_l] = cfg.constraints.s_l_min;
        ub[row_l] = cfg.constraints.s_l_max;
        a_in[(row_w, idx_ux(n, k))] = -sin;
        a_in[(row_w, idx_uy(n, k))] = cos;
        let (lo, hi) = width_bounds(&cfg.constraints, stance_k);
        lb[row_w] = lo;
        ub[row_w] = hi;
        if lo > hi {
            return Err(Error::InvalidInput(format!(
                "lateral bounds empty after stance mirroring at step {k}: [{lo}, {hi}]"
            )));
        }
        stance_k = stance_k.flipped();
    }

    QpProblem::new(h, f, a_eq, b_eq, a_in, lb, ub)
}

/// Assembles the horizon QP by sampling the path at the next N impact times.
pub fn build_mpc_qp(
    x_now: &PlanarState,
    y_now: &PlanarState,
    params: &HlipParams,
    matrices: &S2SMatrices,
    path: &Path,
    t0: f64,
    cfg: &MpcConfig,
    stance: Stance,
) -> Result<QpProblem> {
    let refs = horizon_refs(path, params, t0, cfg.n);
    build_mpc_qp_from_refs(x_now, y_now, matrices, &refs, cfg, stance)
}

fn horizon_refs(path: &Path, params: &HlipParams, t0: f64, n: usize) -> Vec<PathReference> {
    (1..=n)
        .map(|k| sample_reference(path, t0 + k as f64 * params.t_sum))
        .collect()
}

/// Receding-horizon step planner with an internal reference model.
#[derive(Debug)]
pub struct Planner {
    params: HlipParams,
    matrices: S2SMatrices,
    cfg: MpcConfig,
    path: Path,
    obstacles: Vec<Obstacle>,
    anchor_mode: AnchorMode,
    x_ref: PlanarState,
    y_ref: PlanarState,
    stance: Stance,
    prev: Option<MpcPlan>,
}

impl Planner {
    /// Starts at the path's initial point at rest, feet together under the
    /// center of mass.
    pub fn new(
        params: &HlipParams,
        matrices: &S2SMatrices,
        cfg: MpcConfig,
        path: Path,
        obstacles: Vec<Obstacle>,
        anchor_mode: AnchorMode,
        stance: Stance,
    ) -> Result<Self> {
        cfg.validate()?;
        for o in &obstacles {
            if !(o.clearance > 0.0) || !o.clearance.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "obstacle clearance must be positive, got {}",
                    o.clearance
                )));
            }
        }
        let start = path.start();
        let x_ref = PlanarState::new(start.r[0], 0.0, start.rdot[0]);
        let y_ref = PlanarState::new(start.r[1], 0.0, start.rdot[1]);
        Ok(Self {
            params: params.clone(),
            matrices: matrices.clone(),
            cfg,
            path,
            obstacles,
            anchor_mode,
            x_ref,
            y_ref,
            stance,
            prev: None,
        })
    }

    pub fn reference_x(&self) -> &PlanarState {
        &self.x_ref
    }

    pub fn reference_y(&self) -> &PlanarState {
        &self.y_ref
    }

    pub fn stance(&self) -> Stance {
        self.stance
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn config(&self) -> &MpcConfig {
        &self.cfg
    }

    pub fn set_obstacles(&mut self, obstacles: Vec<Obstacle>) {
        self.obstacles = obstacles;
    }

    /// Overrides the internal reference model, e.g. to start from a
    /// feet-apart standing posture instead of feet together.
    pub fn set_reference(&mut self, x: PlanarState, y: PlanarState) {
        self.x_ref = x;
        self.y_ref = y;
    }

    /// Plans the next N steps from time `t0`, applies the first step to the
    /// internal reference model, and toggles stance. With
    /// [`AnchorMode::Measured`], `measured` replaces the internal anchor
    /// before solving. A failed solve falls back to the previous plan
    /// shifted by one step and sets the plan's `fallback` flag.
    pub fn mpc_step(
        &mut self,
        t0: f64,
        measured: Option<(PlanarState, PlanarState)>,
    ) -> Result<MpcPlan> {
        if self.anchor_mode == AnchorMode::Measured {
            if let Some((x, y)) = measured {
                self.x_ref = x;
                self.y_ref = y;
            }
        }
        let anchor_x = self.x_ref;
        let anchor_y = self.y_ref;
        let n = self.cfg.n;
        let refs = horizon_refs(&self.path, &self.params, t0, n);
        let problem =
            build_mpc_qp_from_refs(&anchor_x, &anchor_y, &self.matrices, &refs, &self.cfg, self.stance)?;

        let clock = Instant::now();
        let solution = if self.obstacles.is_empty() {
            solve_qp_plain(&problem, &self.cfg)
        } else {
            self.solve_with_obstacles(&problem, &refs)
        }?;
        let solve_time = clock.elapsed().as_secs_f64();

        let plan = match solution {
            Some(z) => {
                let mut plan = extract_plan(&z, n, anchor_x, anchor_y);
                plan.objective = plan_objective(&plan, &refs, &self.cfg);
                plan.solve_time = solve_time;
                plan
            }
            None => {
                let prev = self.prev.as_ref().ok_or_else(|| {
                    Error::NumericalFailure(
                        "initial plan infeasible and no previous plan to fall back on".into(),
                    )
                })?;
                log::warn!("plan at t = {t0:.3} infeasible; shifting the previous plan");
                let mut plan = shift_plan(prev, &self.matrices, anchor_x, anchor_y);
                plan.objective = plan_objective(&plan, &refs, &self.cfg);
                plan.solve_time = solve_time;
                plan
            }
        };

        self.x_ref = PlanarState::from_vector(
            &(self.matrices.a * anchor_x.as_vector() + self.matrices.b * plan.u_x[0]),
        );
        self.y_ref = PlanarState::from_vector(
            &(self.matrices.a * anchor_y.as_vector() + self.matrices.b * plan.u_y[0]),
        );
        self.stance = self.stance.flipped();
        self.prev = Some(plan.clone());
        Ok(plan)
    }

    fn solve_with_obstacles(
        &self,
        problem: &QpProblem,
        refs: &[PathReference],
    ) -> Result<Option<DVector<f64>>> {
        let n = self.cfg.n;
        let base = qp::solve_qp(problem, None, self.cfg.qp_tol, self.cfg.qp_max_iter);
        if base.status != QpStatus::Optimal {
            return Ok(None);
        }
        let obstacles: Vec<Obstacle> = self
            .obstacles
            .iter()
            .map(|o| Obstacle {
                center: o.center,
                clearance: o.clearance + self.cfg.obstacle_margin,
            })
            .collect();
        let waypoints: Vec<ScpWaypoint> = (1..=n)
            .map(|k| {
                let mut selector = DMatrix::zeros(2, 8 * n);
                selector[(0, idx_x(n, k, 0))] = 1.0;
                selector[(1, idx_y(n, k, 0))] = 1.0;
                ScpWaypoint {
                    selector,
                    reference: Vector2::new(refs[k - 1].r[0], refs[k - 1].r[1]),
                }
            })
            .collect();
        let sol = solve_obstacle_scp(
            problem,
            &obstacles,
            &waypoints,
            &base.z,
            self.cfg.scp_max_outer,
            self.cfg.qp_tol,
            self.cfg.qp_max_iter,
        )?;
        Ok((sol.status == QpStatus::Optimal).then_some(sol.z))
    }
}

fn solve_qp_plain(problem: &QpProblem, cfg: &MpcConfig) -> Result<Option<DVector<f64>>> {
    let sol = qp::solve_qp(problem, None, cfg.qp_tol, cfg.qp_max_iter);
    Ok((sol.status == QpStatus::Optimal).then_some(sol.z))
}

fn extract_plan(z: &DVector<f64>, n: usize, anchor_x: PlanarState, anchor_y: PlanarState) -> MpcPlan {
    let state_at = |base: usize| {
        PlanarState::new(z[base], z[base + 1], z[base + 2])
    };
    MpcPlan {
        u_x: (1..=n).map(|k| z[idx_ux(n, k)]).collect(),
        u_y: (1..=n).map(|k| z[idx_uy(n, k)]).collect(),
        states_x: (1..=n).map(|k| state_at(idx_x(n, k, 0))).collect(),
        states_y: (1..=n).map(|k| state_at(idx_y(n, k, 0))).collect(),
        objective: 0.0,
        solve_time: 0.0,
        fallback: false,
        anchor_x,
        anchor_y,
    }
}

/// Drops the consumed first step and extends the tail by replaying the last
/// input, keeping the sequences consistent with the dynamics.
fn shift_plan(
    prev: &MpcPlan,
    m: &S2SMatrices,
    anchor_x: PlanarState,
    anchor_y: PlanarState,
) -> MpcPlan {
    let n = prev.u_x.len();
    let mut u_x: Vec<f64> = prev.u_x[1..].to_vec();
    let mut u_y: Vec<f64> = prev.u_y[1..].to_vec();
    let mut states_x: Vec<PlanarState> = prev.states_x[1..].to_vec();
    let mut states_y: Vec<PlanarState> = prev.states_y[1..].to_vec();
    if n > 1 {
        u_x.push(*u_x.last().unwrap());
        u_y.push(*u_y.last().unwrap());
    } else {
        u_x = prev.u_x.clone();
        u_y = prev.u_y.clone();
    }
    let last_x = states_x.last().map_or(anchor_x, |s| *s);
    let last_y = states_y.last().map_or(anchor_y, |s| *s);
    states_x.push(PlanarState::from_vector(
        &(m.a * last_x.as_vector() + m.b * *u_x.last().unwrap()),
    ));
    states_y.push(PlanarState::from_vector(
        &(m.a * last_y.as_vector() + m.b * *u_y.last().unwrap()),
    ));
    MpcPlan {
        u_x,
        u_y,
        states_x,
        states_y,
        objective: 0.0,
        solve_time: 0.0,
        fallback: true,
        anchor_x,
        anchor_y,
    }
}

/// Tracking cost plus weighted input cost of the plan's own sequences.
fn plan_objective(plan: &MpcPlan, refs: &[PathReference], cfg: &MpcConfig) -> f64 {
    let mut total = 0.0;
    for k in 0..plan.u_x.len() {
        let r = &refs[k];
        let ex = plan.states_x[k].c - r.r[0];
        let ey = plan.states_y[k].c - r.r[1];
        let evx = plan.states_x[k].v - r.rdot[0];
        let evy = plan.states_y[k].v - r.rdot[1];
        total += cfg.pos_weight * (ex * ex + ey * ey)
            + cfg.vel_weight * (evx * evx + evy * evy)
            + cfg.alpha * (plan.u_x[k] * plan.u_x[k] + plan.u_y[k] * plan.u_y[k]);
    }
    total
}
