//! Reduced-order surrogate biped and scenario runner.
//!
//! The surrogate stands in for a full robot: its horizontal dynamics are a
//! pendulum with a prescribed height trajectory, so the step-to-step map
//! deviates from the ideal linear model by a small disturbance. Deviation
//! sources (height oscillation, impact velocity loss, actuation noise) are
//! independently switchable; with all of them off the surrogate reproduces
//! the linear step dynamics exactly.

use nalgebra::RowVector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{estimate_w, mrpi_outer, DisturbanceSample, Zonotope};
use crate::hlip::{dlqr_gain, make_params, s2s_matrices, HlipParams, LqrWeights, PlanarState};
use crate::planner::{
    make_path, sample_reference, AnchorMode, MpcConfig, MpcPlan, Path, PathShape, Planner, Stance,
};
use crate::qp::Obstacle;

/// Control tick [s]; phase durations must be whole numbers of ticks.
pub const TICK: f64 = 1e-3;

/// Gait phase of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Ssp,
    Dsp,
}

/// Full state of the surrogate biped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateBipedState {
    /// Global center-of-mass position [m].
    pub com: [f64; 3],
    /// Center-of-mass velocity [m/s].
    pub vel: [f64; 3],
    /// Global stance-foot position [m].
    pub stance_foot: [f64; 2],
    pub stance: Stance,
    /// Torso yaw [rad].
    pub heading: f64,
    pub phase: Phase,
    /// Time since the current phase started [s].
    pub phase_time: f64,
    /// Swing-foot position at the start of the current swing [m].
    pub swing_start: [f64; 2],
    /// Swing-foot yaw at the start of the current swing [rad].
    pub swing_yaw_start: f64,
    /// Yaw the current stance foot landed with [rad].
    pub stance_yaw: f64,
}

impl SurrogateBipedState {
    /// Horizontal pendulum states (global position, position relative to the
    /// stance foot, velocity) for both planes.
    pub fn horizontal_states(&self) -> (PlanarState, PlanarState) {
        (
            PlanarState::new(self.com[0], self.com[0] - self.stance_foot[0], self.vel[0]),
            PlanarState::new(self.com[1], self.com[1] - self.stance_foot[1], self.vel[1]),
        )
    }

    /// Standing start at a path's initial point at the pre-impact instant of
    /// step zero, feet `stance_width` apart around the center of mass. The
    /// stance foot sits on the right of the heading so the first planned
    /// step (positive width under left stance) lands on the left.
    pub fn standing_at(path: &Path, params: &HlipParams, stance_width: f64) -> Self {
        let start = path.start();
        let (sin, cos) = start.theta.sin_cos();
        let half = 0.5 * stance_width;
        Self {
            com: [start.r[0], start.r[1], params.z0],
            vel: [0.0, 0.0, 0.0],
            stance_foot: [start.r[0] + half * sin, start.r[1] - half * cos],
            stance: Stance::Left,
            heading: start.theta,
            phase: Phase::Ssp,
            phase_time: params.t_ssp,
            swing_start: [start.r[0] - half * sin, start.r[1] + half * cos],
            swing_yaw_start: start.theta,
            stance_yaw: start.theta,
        }
    }
}

fn default_height_amplitude() -> f64 {
    0.02
}
fn default_velocity_loss() -> f64 {
    0.03
}
fn default_swing_noise() -> f64 {
    0.004
}
fn default_mass() -> f64 {
    33.0
}

/// Deviation knobs that make the surrogate differ from the ideal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateModelConfig {
    /// Peak-to-center COM height oscillation over a swing [m].
    #[serde(default = "default_height_amplitude")]
    pub height_oscillation_amplitude: f64,
    /// Fraction of COM velocity lost when support is transferred.
    #[serde(default = "default_velocity_loss")]
    pub impact_velocity_loss: f64,
    /// Standard deviation of the realized step-size error [m].
    #[serde(default = "default_swing_noise")]
    pub swing_tracking_error_std: f64,
    /// Robot mass, converts push forces to accelerations [kg].
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for SurrogateModelConfig {
    fn default() -> Self {
        Self {
            height_oscillation_amplitude: default_height_amplitude(),
            impact_velocity_loss: default_velocity_loss(),
            swing_tracking_error_std: default_swing_noise(),
            mass: default_mass(),
            rng_seed: 0,
        }
    }
}

impl SurrogateModelConfig {
    /// Zero deviations: the surrogate degenerates to the exact linear model.
    pub fn exact() -> Self {
        Self {
            height_oscillation_amplitude: 0.0,
            impact_velocity_loss: 0.0,
            swing_tracking_error_std: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self, params: &HlipParams) -> Result<()> {
        if !(self.height_oscillation_amplitude >= 0.0) {
            return Err(Error::InvalidParameter(
                "height_oscillation_amplitude must be nonnegative".into(),
            ));
        }
        if self.height_oscillation_amplitude > 0.2 * params.z0 {
            return Err(Error::InvalidParameter(format!(
                "height_oscillation_amplitude {} exceeds 0.2 z0",
                self.height_oscillation_amplitude
            )));
        }
        let omega = std::f64::consts::TAU / params.t_ssp;
        if self.height_oscillation_amplitude * omega * omega >= params.g {
            return Err(Error::InvalidParameter(
                "height oscillation so fast the support force would vanish".into(),
            ));
        }
        if !(0.0..=0.2).contains(&self.impact_velocity_loss) {
            return Err(Error::InvalidParameter(format!(
                "impact_velocity_loss must lie in [0, 0.2], got {}",
                self.impact_velocity_loss
            )));
        }
        if !(self.swing_tracking_error_std >= 0.0) {
            return Err(Error::InvalidParameter(
                "swing_tracking_error_std must be nonnegative".into(),
            ));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }
}

/// External force applied to the pelvis over a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushEvent {
    pub t_start: f64,
    pub duration: f64,
    /// Planar force [N].
    pub force: [f64; 2],
}

impl PushEvent {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "push duration must be positive, got {}",
                self.duration
            )));
        }
        if !self.t_start.is_finite() || !self.force.iter().all(|f| f.is_finite()) {
            return Err(Error::InvalidParameter("push fields must be finite".into()));
        }
        Ok(())
    }
}

/// Horizontal plane label for per-plane step records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    X,
    Y,
}

impl Plane {
    pub fn as_str(self) -> &'static str {
        match self {
            Plane::X => "x",
            Plane::Y => "y",
        }
    }
}

/// One plane of one step: pre-impact states, commands, and the measured
/// step-to-step disturbance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    /// Impact time [s].
    pub t: f64,
    pub plane: Plane,
    /// Robot pre-impact horizontal state.
    pub robot: PlanarState,
    /// Planner reference state the step was measured against.
    pub reference: PlanarState,
    /// Commanded step size (plan plus stepping feedback).
    pub u_cmd: f64,
    /// Step size actually realized (command plus actuation noise).
    pub u_realized: f64,
    /// Disturbance w = x_{k+1} - A x_k - B u_cmd_k, filled at the next
    /// impact.
    pub w: Option<[f64; 3]>,
    /// Whether the tracking error sits inside the inflated invariant set.
    pub e_in_set: Option<bool>,
}

impl StepRecord {
    /// Tracking error against the planner reference.
    pub fn error(&self) -> [f64; 3] {
        [
            self.robot.c - self.reference.c,
            self.robot.p - self.reference.p,
            self.robot.v - self.reference.v,
        ]
    }
}

/// One trajectory log row at the control rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub com: [f64; 3],
    pub vel: [f64; 3],
    pub stance_foot: [f64; 2],
    pub heading: f64,
    pub phase: Phase,
}

/// Smooth 0-to-1 interpolation reaching 1 at 90% of the duration and
/// holding it, with zero slope at both ends of the blend.
pub fn smooth_blend(t: f64, duration: f64) -> f64 {
    let horizon = 0.9 * duration;
    if horizon <= 0.0 {
        return 1.0;
    }
    let s = (t / horizon).clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Reference step plus proportional feedback on the state error, per plane.
pub fn stepping_command(
    u_ref: (f64, f64),
    robot_x: &PlanarState,
    robot_y: &PlanarState,
    ref_x: &PlanarState,
    ref_y: &PlanarState,
    k: &RowVector3<f64>,
) -> (f64, f64) {
    (
        u_ref.0 + (k * (robot_x.as_vector() - ref_x.as_vector()))[0],
        u_ref.1 + (k * (robot_y.as_vector() - ref_y.as_vector()))[0],
    )
}

/// Desired step sizes for the imminent touchdown: the plan's first step
/// corrected by feedback on the instantaneous robot state.
pub fn desired_step_sizes(
    robot_x: &PlanarState,
    robot_y: &PlanarState,
    plan: &MpcPlan,
    k: &RowVector3<f64>,
) -> (f64, f64) {
    stepping_command(
        (plan.u_x[0], plan.u_y[0]),
        robot_x,
        robot_y,
        &plan.anchor_x,
        &plan.anchor_y,
        k,
    )
}

/// Swing-foot position target: interpolates from the swing start to the
/// landing point `stance_foot + u_des` as the blend rises.
pub fn swing_foot_target(
    state: &SurrogateBipedState,
    u_des: (f64, f64),
    t: f64,
    t_ssp: f64,
) -> Result<(f64, f64)> {
    if state.phase != Phase::Ssp {
        return Err(Error::InvalidPhase(
            "swing-foot targets are defined only during single support".into(),
        ));
    }
    let c = smooth_blend(t, t_ssp);
    let land_x = state.stance_foot[0] + u_des.0;
    let land_y = state.stance_foot[1] + u_des.1;
    Ok((
        state.swing_start[0] + c * (land_x - state.swing_start[0]),
        state.swing_start[1] + c * (land_y - state.swing_start[1]),
    ))
}

/// Swing-foot yaw target: blends from the swing-start yaw to the reference
/// heading the short way around.
pub fn swing_yaw_target(state: &SurrogateBipedState, theta_ref: f64, t: f64, t_ssp: f64) -> f64 {
    let c = smooth_blend(t, t_ssp);
    let mut delta = (theta_ref - state.swing_yaw_start) % std::f64::consts::TAU;
    if delta > std::f64::consts::PI {
        delta -= std::f64::consts::TAU;
    } else if delta < -std::f64::consts::PI {
        delta += std::f64::consts::TAU;
    }
    state.swing_yaw_start + c * delta
}

/// Commanded and realized step sizes of one walking cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub u_cmd: [f64; 2],
    pub u_realized: [f64; 2],
}

fn push_accel(pushes: &[PushEvent], mass: f64, t: f64) -> [f64; 2] {
    let mut a = [0.0, 0.0];
    for p in pushes {
        if t >= p.t_start && t < p.t_start + p.duration {
            a[0] += p.force[0] / mass;
            a[1] += p.force[1] / mass;
        }
    }
    a
}

/// One RK4 step of the planar state (p_x, v_x, p_y, v_y) under
/// acceleration `accel(t, p) = lambda_sq(t) * p + push(t)`.
fn rk4_tick<F: Fn(f64) -> f64, G: Fn(f64) -> [f64; 2]>(
    s: [f64; 4],
    t: f64,
    dt: f64,
    lambda_sq: F,
    push: G,
) -> [f64; 4] {
    let f = |t: f64, s: &[f64; 4]| {
        let l = lambda_sq(t);
        let a = push(t);
        [s[1], l * s[0] + a[0], s[3], l * s[2] + a[1]]
    };
    let add = |s: &[f64; 4], k: &[f64; 4], h: f64| {
        [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]]
    };
    let k1 = f(t, &s);
    let k2 = f(t + 0.5 * dt, &add(&s, &k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, &add(&s, &k2, 0.5 * dt));
    let k4 = f(t + dt, &add(&s, &k3, dt));
    [
        s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        s[3] + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ]
}

fn ticks_of(duration: f64, name: &str) -> Result<usize> {
    let n = (duration / TICK).round();
    if (n * TICK - duration).abs() > 1e-9 || n < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} = {duration} is not a whole number of {TICK} s control ticks"
        )));
    }
    Ok(n as usize)
}

fn check_fall(state: &SurrogateBipedState, z0: f64, t: f64) -> Result<()> {
    let z = state.com[2];
    if z < 0.5 * z0 || z > 1.5 * z0 {
        return Err(Error::SimulationDiverged(format!(
            "COM height {z:.3} outside [{:.3}, {:.3}] at t = {t:.3}",
            0.5 * z0,
            1.5 * z0
        )));
    }
    let px = state.com[0] - state.stance_foot[0];
    let py = state.com[1] - state.stance_foot[1];
    if px.abs() > 1.5 || py.abs() > 1.5 {
        return Err(Error::SimulationDiverged(format!(
            "COM ran {:.2} m from the stance foot at t = {t:.3}",
            px.abs().max(py.abs())
        )));
    }
    Ok(())
}

/// Advances one full walking cycle from a pre-impact instant: touchdown at
/// the commanded step size (plus actuation noise), double support, support
/// transfer with velocity loss, then single support under the oscillating
/// height, sampling the controller every tick. Returns the state at the
/// next pre-impact instant.
#[allow(clippy::too_many_arguments)]
pub fn simulate_step<C, H, L>(
    state: &SurrogateBipedState,
    controller: &mut C,
    heading_ref: &H,
    t0: f64,
    params: &HlipParams,
    model: &SurrogateModelConfig,
    pushes: &[PushEvent],
    rng: &mut ChaCha8Rng,
    log: &mut L,
) -> Result<(SurrogateBipedState, StepOutcome)>
where
    C: FnMut(f64, &SurrogateBipedState) -> (f64, f64),
    H: Fn(f64) -> f64,
    L: FnMut(&SurrogateBipedState, f64),
{
    let n_dsp = ticks_of(params.t_dsp, "t_dsp")?;
    let n_ssp = ticks_of(params.t_ssp, "t_ssp")?;
    let mut st = *state;

    // touchdown: the controller fixes the placement from the pre-impact state
    let (ux_cmd, uy_cmd) = controller(t0, &st);
    let noise = |rng: &mut ChaCha8Rng| {
        let z: f64 = StandardNormal.sample(rng);
        model.swing_tracking_error_std * z
    };
    let ux_real = ux_cmd + noise(rng);
    let uy_real = uy_cmd + noise(rng);
    let old_stance = st.stance_foot;
    let old_yaw = st.stance_yaw;
    st.stance_foot = [old_stance[0] + ux_real, old_stance[1] + uy_real];
    st.stance = st.stance.flipped();
    st.swing_start = old_stance;
    st.swing_yaw_start = old_yaw;
    st.stance_yaw = heading_ref(t0);
    st.phase = Phase::Dsp;
    st.phase_time = 0.0;
    st.com[2] = params.z0;
    st.vel[2] = 0.0;
    log(&st, t0);

    let mut t = t0;
    for _ in 0..n_dsp {
        let s = [
            st.com[0] - st.stance_foot[0],
            st.vel[0],
            st.com[1] - st.stance_foot[1],
            st.vel[1],
        ];
        let s = rk4_tick(s, t, TICK, |_| 0.0, |t| push_accel(pushes, model.mass, t));
        t += TICK;
        st.com[0] = st.stance_foot[0] + s[0];
        st.vel[0] = s[1];
        st.com[1] = st.stance_foot[1] + s[2];
        st.vel[1] = s[3];
        st.phase_time += TICK;
        st.heading = heading_ref(t);
        check_fall(&st, params.z0, t)?;
        log(&st, t);
    }

    // support transfer: part of the momentum is lost
    st.vel[0] *= 1.0 - model.impact_velocity_loss;
    st.vel[1] *= 1.0 - model.impact_velocity_loss;
    st.phase = Phase::Ssp;
    st.phase_time = 0.0;

    let omega = std::f64::consts::TAU / params.t_ssp;
    let amp = model.height_oscillation_amplitude;
    let t_ssp_start = t;
    let lambda_sq = |t_abs: f64| {
        let tau = t_abs - t_ssp_start;
        let z = params.z0 + amp * (omega * tau).sin();
        let zdd = -amp * omega * omega * (omega * tau).sin();
        (params.g + zdd) / z
    };
    for _ in 0..n_ssp {
        // the controller keeps refining the upcoming step; the swing foot
        // tracks the blended target
        let u_des = controller(t, &st);
        let _ = swing_foot_target(&st, u_des, st.phase_time, params.t_ssp)?;
        let s = [
            st.com[0] - st.stance_foot[0],
            st.vel[0],
            st.com[1] - st.stance_foot[1],
            st.vel[1],
        ];
        let s = rk4_tick(s, t, TICK, lambda_sq, |t| push_accel(pushes, model.mass, t));
        t += TICK;
        st.com[0] = st.stance_foot[0] + s[0];
        st.vel[0] = s[1];
        st.com[1] = st.stance_foot[1] + s[2];
        st.vel[1] = s[3];
        st.phase_time += TICK;
        let tau = st.phase_time;
        st.com[2] = params.z0 + amp * (omega * tau).sin();
        st.vel[2] = amp * omega * (omega * tau).cos();
        st.heading = heading_ref(t);
        check_fall(&st, params.z0, t)?;
        log(&st, t);
    }
    // the final tick lands back on the nominal height
    st.com[2] = params.z0;
    st.vel[2] = 0.0;

    Ok((
        st,
        StepOutcome {
            u_cmd: [ux_cmd, uy_cmd],
            u_realized: [ux_real, uy_real],
        },
    ))
}

fn default_speed() -> SpeedConfig {
    SpeedConfig { v_max: 0.5, accel: 0.25 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeedConfig {
    pub v_max: f64,
    pub accel: f64,
}

impl Default for SpeedConfig {
    fn default() -> Self {
        default_speed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HlipConfig {
    pub z0: f64,
    pub g: f64,
    pub t_ssp: f64,
    pub t_dsp: f64,
}

impl Default for HlipConfig {
    fn default() -> Self {
        Self { z0: 1.0, g: 9.81, t_ssp: 0.35, t_dsp: 0.05 }
    }
}

fn default_lqr() -> LqrConfig {
    LqrConfig { q_diag: [1.0, 1.0, 1.0], r: 1.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LqrConfig {
    pub q_diag: [f64; 3],
    pub r: f64,
}

impl Default for LqrConfig {
    fn default() -> Self {
        default_lqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub x: f64,
    pub y: f64,
    /// Required clearance from the obstacle center [m].
    pub clearance: f64,
}

fn default_anchor() -> AnchorMode {
    AnchorMode::Reference
}
fn default_w_margin() -> f64 {
    0.3
}
fn default_rpi_eps() -> f64 {
    1e-3
}

/// Complete description of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub hlip: HlipConfig,
    pub path: PathShape,
    #[serde(default)]
    pub speed: SpeedConfig,
    #[serde(default)]
    pub mpc: MpcConfig,
    #[serde(default)]
    pub model: SurrogateModelConfig,
    #[serde(default)]
    pub lqr: LqrConfig,
    #[serde(default = "default_anchor")]
    pub anchor: AnchorMode,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default)]
    pub pushes: Vec<PushEvent>,
    /// Simulated time [s]; defaults to the path duration plus four seconds.
    #[serde(default)]
    pub duration: Option<f64>,
    /// RNG seed; takes precedence over `model.rng_seed`, and is itself
    /// overridden by an explicit seed argument.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Where a command-line run writes its outputs; unused by the library.
    #[serde(default)]
    pub out_dir: Option<String>,
    /// Inflation applied when estimating the disturbance set from this run.
    #[serde(default = "default_w_margin")]
    pub w_margin: f64,
    /// Support-function accuracy of the invariant-set computation.
    #[serde(default = "default_rpi_eps")]
    pub rpi_eps: f64,
    /// Externally calibrated disturbance set; estimated from the run's own
    /// log when absent.
    #[serde(default)]
    pub disturbance_w: Option<Zonotope>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let params = make_params(self.hlip.z0, self.hlip.g, self.hlip.t_ssp, self.hlip.t_dsp)?;
        ticks_of(params.t_ssp, "t_ssp")?;
        ticks_of(params.t_dsp, "t_dsp")?;
        self.model.validate(&params)?;
        self.mpc.validate()?;
        make_path(&self.path, self.speed.v_max, self.speed.accel)?;
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.clearance > 0.0) || !o.clearance.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "obstacles[{i}].clearance must be positive, got {}",
                    o.clearance
                )));
            }
        }
        for (i, p) in self.pushes.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::InvalidParameter(format!("pushes[{i}]: {e}")))?;
        }
        if let Some(d) = self.duration {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "duration must be positive, got {d}"
                )));
            }
        }
        if !(self.w_margin >= 0.0) {
            return Err(Error::InvalidParameter("w_margin must be nonnegative".into()));
        }
        if !(self.rpi_eps > 0.0) {
            return Err(Error::InvalidParameter("rpi_eps must be positive".into()));
        }
        if !(self.lqr.r > 0.0) || self.lqr.q_diag.iter().any(|q| *q < 0.0) {
            return Err(Error::InvalidParameter(
                "lqr weights need r > 0 and q_diag >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregate metrics of a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub steps_total: usize,
    pub sim_duration: f64,
    pub max_position_error: f64,
    pub rms_position_error: f64,
    pub rms_velocity_error: f64,
    /// Smallest distance from the COM to each configured obstacle center.
    pub obstacle_clearances: Vec<f64>,
    pub min_obstacle_clearance: Option<f64>,
    /// Share of per-plane step errors inside the inflated invariant set.
    pub fraction_e_in_set: Option<f64>,
    /// Per-plane step errors tested for containment, and how many passed.
    pub steps_tested: usize,
    pub steps_in_set: usize,
    pub fell: bool,
    pub failure: Option<String>,
}

/// Full output of a scenario run. On a fall the logs cover the time up to
/// the failure and `summary.failure` carries the message.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub trajectory: Vec<TrajectorySample>,
    pub steps: Vec<StepRecord>,
    pub summary: Summary,
    /// Disturbance set used for containment (configured or estimated).
    pub disturbance_w: Option<Zonotope>,
    /// Invariant set at its nominal size (containment uses 1.05x).
    pub invariant_set: Option<Zonotope>,
}

/// Runs one scenario: Algorithm-1 style loop of per-impact planning and
/// tick-level surrogate simulation, followed by disturbance-set estimation
/// and containment accounting.
pub fn run_scenario(cfg: &ScenarioConfig, seed_override: Option<u64>) -> Result<ScenarioResult> {
    cfg.validate()?;
    let params = make_params(cfg.hlip.z0, cfg.hlip.g, cfg.hlip.t_ssp, cfg.hlip.t_dsp)?;
    let matrices = s2s_matrices(&params);
    let weights = LqrWeights {
        q: nalgebra::Matrix3::from_partial_diagonal(&cfg.lqr.q_diag),
        r: cfg.lqr.r,
    };
    let k_gain = dlqr_gain(&matrices.a, &matrices.b, &weights)?;
    let path = make_path(&cfg.path, cfg.speed.v_max, cfg.speed.accel)?;
    let duration = cfg.duration.unwrap_or(path.t_end() + 4.0);
    let cycles = (duration / params.t_sum - 1e-9).ceil().max(1.0) as usize;

    let obstacles: Vec<Obstacle> = cfg
        .obstacles
        .iter()
        .map(|o| Obstacle {
            center: nalgebra::Vector2::new(o.x, o.y),
            clearance: o.clearance,
        })
        .collect();
    let mut planner = Planner::new(
        &params,
        &matrices,
        cfg.mpc.clone(),
        path.clone(),
        obstacles,
        cfg.anchor,
        Stance::Left,
    )?;

    let seed = seed_override.or(cfg.seed).unwrap_or(cfg.model.rng_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = &cfg.mpc.constraints;
    let stance_width = if c.s_w_min.is_finite() && c.s_w_min > 0.0 { c.s_w_min } else { 0.1 };
    let mut state = SurrogateBipedState::standing_at(&path, &params, stance_width);
    {
        // the reference model stands in the same posture as the robot
        let (x0, y0) = state.horizontal_states();
        let start = path.start();
        planner.set_reference(
            PlanarState::new(x0.c, x0.p, start.rdot[0]),
            PlanarState::new(y0.c, y0.p, start.rdot[1]),
        );
    }
    let mut trajectory: Vec<TrajectorySample> = Vec::with_capacity(cycles * 400 + 1);
    let mut steps: Vec<StepRecord> = Vec::with_capacity(2 * cycles);
    let mut failure = None;

    let heading_ref = |t: f64| sample_reference(&path, t).theta;
    let fill_w = |steps: &mut Vec<StepRecord>, x: &PlanarState, y: &PlanarState| {
        let rows = steps.len();
        if rows < 2 {
            return;
        }
        for (row, next) in [(rows - 2, x), (rows - 1, y)] {
            let rec = steps[row];
            let pred = matrices.a * rec.robot.as_vector() + matrices.b * rec.u_cmd;
            let w = next.as_vector() - pred;
            steps[row].w = Some([w[0], w[1], w[2]]);
        }
    };

    for k in 0..cycles {
        let t0 = k as f64 * params.t_sum;
        let (x_h, y_h) = state.horizontal_states();
        fill_w(&mut steps, &x_h, &y_h);
        let plan = planner.mpc_step(t0, Some((x_h, y_h)))?;
        steps.push(StepRecord {
            k,
            t: t0,
            plane: Plane::X,
            robot: x_h,
            reference: plan.anchor_x,
            u_cmd: 0.0,
            u_realized: 0.0,
            w: None,
            e_in_set: None,
        });
        steps.push(StepRecord {
            k,
            t: t0,
            plane: Plane::Y,
            robot: y_h,
            reference: plan.anchor_y,
            u_cmd: 0.0,
            u_realized: 0.0,
            w: None,
            e_in_set: None,
        });

        // provisional reference for the swing that is about to start: the
        // plan's second step against its first predicted state
        let next_idx = 1.min(plan.u_x.len() - 1);
        let mut controller = |t: f64, st: &SurrogateBipedState| {
            let (rx, ry) = st.horizontal_states();
            if t <= t0 {
                desired_step_sizes(&rx, &ry, &plan, &k_gain)
            } else {
                stepping_command(
                    (plan.u_x[next_idx], plan.u_y[next_idx]),
                    &rx,
                    &ry,
                    &plan.states_x[0],
                    &plan.states_y[0],
                    &k_gain,
                )
            }
        };
        let mut log = |st: &SurrogateBipedState, t: f64| {
            trajectory.push(TrajectorySample {
                t,
                com: st.com,
                vel: st.vel,
                stance_foot: st.stance_foot,
                heading: st.heading,
                phase: st.phase,
            });
        };
        match simulate_step(
            &state,
            &mut controller,
            &heading_ref,
            t0,
            &params,
            &cfg.model,
            &cfg.pushes,
            &mut rng,
            &mut log,
        ) {
            Ok((next, outcome)) => {
                let rows = steps.len();
                steps[rows - 2].u_cmd = outcome.u_cmd[0];
                steps[rows - 2].u_realized = outcome.u_realized[0];
                steps[rows - 1].u_cmd = outcome.u_cmd[1];
                steps[rows - 1].u_realized = outcome.u_realized[1];
                state = next;
            }
            Err(Error::SimulationDiverged(msg)) => {
                // the aborted cycle placed no step; drop its pending records
                steps.truncate(steps.len() - 2);
                failure = Some(msg);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if failure.is_none() {
        let (x_h, y_h) = state.horizontal_states();
        fill_w(&mut steps, &x_h, &y_h);
    }

    // disturbance set and containment
    let samples: Vec<DisturbanceSample> = steps
        .iter()
        .filter_map(|r| r.w.map(|w| DisturbanceSample { w }))
        .collect();
    let disturbance_w = match (&cfg.disturbance_w, samples.is_empty()) {
        (Some(w), _) => Some(w.clone()),
        (None, false) => Some(estimate_w(&samples, cfg.w_margin)?),
        (None, true) => None,
    };
    let acl = matrices.a + matrices.b * k_gain;
    let invariant_set = match &disturbance_w {
        Some(w) => match mrpi_outer(&acl, w, cfg.rpi_eps) {
            Ok(e) => Some(e),
            Err(err) => {
                log::warn!("invariant set unavailable: {err}");
                None
            }
        },
        None => None,
    };
    let mut inside = 0usize;
    let mut tested = 0usize;
    if let Some(e_set) = &invariant_set {
        let inflated = e_set.inflate(1.05);
        for rec in steps.iter_mut() {
            let contained = crate::geom::contains(&inflated, &rec.error(), 1e-9)?;
            rec.e_in_set = Some(contained);
            tested += 1;
            if contained {
                inside += 1;
            }
        }
    }

    // tracking metrics against the path reference
    let mut pos_sq = 0.0;
    let mut vel_sq = 0.0;
    let mut max_pos: f64 = 0.0;
    let mut clearances = vec![f64::INFINITY; cfg.obstacles.len()];
    for row in &trajectory {
        let r = sample_reference(&path, row.t);
        let ex = row.com[0] - r.r[0];
        let ey = row.com[1] - r.r[1];
        let evx = row.vel[0] - r.rdot[0];
        let evy = row.vel[1] - r.rdot[1];
        pos_sq += ex * ex + ey * ey;
        vel_sq += evx * evx + evy * evy;
        max_pos = max_pos.max((ex * ex + ey * ey).sqrt());
        for (i, o) in cfg.obstacles.iter().enumerate() {
            let d = ((row.com[0] - o.x).powi(2) + (row.com[1] - o.y).powi(2)).sqrt();
            clearances[i] = clearances[i].min(d);
        }
    }
    let rows = trajectory.len().max(1) as f64;
    let summary = Summary {
        steps_total: steps.len() / 2,
        sim_duration: cycles as f64 * params.t_sum,
        max_position_error: max_pos,
        rms_position_error: (pos_sq / rows).sqrt(),
        rms_velocity_error: (vel_sq / rows).sqrt(),
        min_obstacle_clearance: clearances.iter().cloned().reduce(f64::min),
        obstacle_clearances: clearances,
        fraction_e_in_set: (tested > 0).then(|| inside as f64 / tested as f64),
        steps_tested: tested,
        steps_in_set: inside,
        fell: failure.is_some(),
        failure,
    };
    Ok(ScenarioResult {
        trajectory,
        steps,
        summary,
        disturbance_w,
        invariant_set,
    })
}
