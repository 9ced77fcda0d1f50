//! Arc-length parameterized walking paths and speed profiles.
//!
//! A path is a chain of segments, each either a moving stretch driven by a
//! speed profile or an in-place rotation at a corner. Sampling a path at a
//! time returns the reference triple (position, velocity, heading) that the
//! step planner tracks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum in-place turn rate at square corners [rad/s] (45 deg/s).
pub const MAX_TURN_RATE: f64 = std::f64::consts::FRAC_PI_4;

fn default_laps() -> f64 {
    1.0
}

fn default_turn_rate() -> f64 {
    0.6
}

/// Path geometry as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathShape {
    /// Counterclockwise circle of the given radius, starting at the origin
    /// heading +x. `laps` scales the traveled distance.
    Circle {
        radius: f64,
        #[serde(default = "default_laps")]
        laps: f64,
    },
    /// Cardioid a(1 − cos φ) in polar form, traversed once from the cusp at
    /// the origin; total length 8a.
    Cardioid { a: f64 },
    /// y = amplitude · sin(wavenumber · x) for x in [0, length].
    Sinusoid { amplitude: f64, wavenumber: f64, length: f64 },
    /// Axis-aligned square of the given side, corners turned in place.
    Square {
        side: f64,
        #[serde(default = "default_turn_rate")]
        turn_rate: f64,
    },
    /// Stand at a point with a fixed heading.
    Point {
        x: f64,
        y: f64,
        #[serde(default)]
        heading: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Trapezoid,
    Triangle,
}

/// Rest-to-rest speed profile over a fixed distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub kind: ProfileKind,
    pub v_max: f64,
    pub accel: f64,
    pub distance: f64,
}

impl SpeedProfile {
    /// Picks the profile kind from the data: a triangle when `v_max` cannot
    /// be reached within the distance, a trapezoid with a cruise otherwise.
    pub fn plan(v_max: f64, accel: f64, distance: f64) -> Result<Self> {
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(Error::InvalidParameter(format!("v_max must be positive, got {v_max}")));
        }
        if !(accel > 0.0) || !accel.is_finite() {
            return Err(Error::InvalidParameter(format!("accel must be positive, got {accel}")));
        }
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "distance must be positive, got {distance}"
            )));
        }
        let kind = if (accel * distance).sqrt() < v_max {
            ProfileKind::Triangle
        } else {
            ProfileKind::Trapezoid
        };
        Ok(Self { kind, v_max, accel, distance })
    }

    /// Validates an explicitly chosen kind against the data.
    pub fn new(kind: ProfileKind, v_max: f64, accel: f64, distance: f64) -> Result<Self> {
        let auto = Self::plan(v_max, accel, distance)?;
        let peak = (accel * distance).sqrt();
        match kind {
            ProfileKind::Triangle if peak > v_max * (1.0 + 1e-9) => {
                Err(Error::InvalidParameter(format!(
                    "triangle profile would peak at {peak} above v_max {v_max}"
                )))
            }
            ProfileKind::Trapezoid if peak < v_max * (1.0 - 1e-9) => {
                Err(Error::InvalidParameter(format!(
                    "trapezoid profile never reaches v_max {v_max} over {distance} m"
                )))
            }
            _ => Ok(Self { kind, ..auto }),
        }
    }

    /// Speed actually reached at the apex.
    pub fn peak(&self) -> f64 {
        match self.kind {
            ProfileKind::Triangle => (self.accel * self.distance).sqrt(),
            ProfileKind::Trapezoid => self.v_max,
        }
    }

    pub fn duration(&self) -> f64 {
        match self.kind {
            ProfileKind::Triangle => 2.0 * (self.distance / self.accel).sqrt(),
            ProfileKind::Trapezoid => {
                let t_ramp = self.v_max / self.accel;
                let cruise = self.distance - self.v_max * t_ramp;
                2.0 * t_ramp + cruise / self.v_max
            }
        }
    }

    /// Distance covered and speed at time `t`, clamped to the rest endpoints.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        let total = self.duration();
        if t >= total {
            return (self.distance, 0.0);
        }
        let peak = self.peak();
        let t_ramp = peak / self.accel;
        if t < t_ramp {
            return (0.5 * self.accel * t * t, self.accel * t);
        }
        let ramp_dist = 0.5 * peak * t_ramp;
        let t_brake = total - t_ramp;
        if t < t_brake {
            return (ramp_dist + peak * (t - t_ramp), peak);
        }
        let tau = total - t;
        (self.distance - 0.5 * self.accel * tau * tau, self.accel * tau)
    }
}

/// Reference triple the planner tracks at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathReference {
    /// Desired planar position [m].
    pub r: [f64; 2],
    /// Desired planar velocity [m/s].
    pub rdot: [f64; 2],
    /// Desired heading, unwrapped [rad].
    pub theta: f64,
}

/// Interval where the path stands still and rotates in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerEvent {
    pub t_start: f64,
    pub t_end: f64,
    pub position: [f64; 2],
    pub theta_from: f64,
    pub theta_to: f64,
}

#[derive(Debug, Clone)]
enum SegmentGeom {
    Line { start: [f64; 2], heading: f64 },
    Arc { center: [f64; 2], radius: f64 },
    CardioidLoop { a: f64 },
    SinusoidCurve { amplitude: f64, wavenumber: f64, lut: ArcLut },
    Rotation { position: [f64; 2], theta_from: f64, theta_to: f64 },
    Hold { position: [f64; 2], theta: f64 },
}

impl SegmentGeom {
    /// Position and heading at arc length `s` from the segment start.
    fn at(&self, s: f64) -> ([f64; 2], f64) {
        match self {
            SegmentGeom::Line { start, heading } => (
                [start[0] + s * heading.cos(), start[1] + s * heading.sin()],
                *heading,
            ),
            SegmentGeom::Arc { center, radius } => {
                let phi = s / radius;
                (
                    [center[0] + radius * phi.sin(), center[1] - radius * phi.cos()],
                    phi,
                )
            }
            SegmentGeom::CardioidLoop { a } => {
                let phi = 2.0 * (1.0 - s / (4.0 * a)).clamp(-1.0, 1.0).acos();
                let rho = a * (1.0 - phi.cos());
                ([rho * phi.cos(), rho * phi.sin()], 1.5 * phi)
            }
            SegmentGeom::SinusoidCurve { amplitude, wavenumber, lut } => {
                let x = lut.invert(s);
                let slope = amplitude * wavenumber * (wavenumber * x).cos();
                ([x, amplitude * (wavenumber * x).sin()], slope.atan2(1.0))
            }
            SegmentGeom::Rotation { position, theta_from, .. } => (*position, *theta_from),
            SegmentGeom::Hold { position, theta } => (*position, *theta),
        }
    }
}

#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    duration: f64,
    profile: Option<SpeedProfile>,
    geom: SegmentGeom,
}

impl Segment {
    fn sample(&self, t_local: f64) -> PathReference {
        match &self.geom {
            SegmentGeom::Rotation { position, theta_from, theta_to } => {
                let frac = if self.duration > 0.0 {
                    (t_local / self.duration).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                PathReference {
                    r: *position,
                    rdot: [0.0, 0.0],
                    theta: theta_from + frac * (theta_to - theta_from),
                }
            }
            SegmentGeom::Hold { position, theta } => {
                PathReference { r: *position, rdot: [0.0, 0.0], theta: *theta }
            }
            geom => {
                let (s, v) = self
                    .profile
                    .as_ref()
                    .expect("moving segments carry a profile")
                    .sample(t_local.clamp(0.0, self.duration));
                let (r, theta) = geom.at(s);
                PathReference { r, rdot: [v * theta.cos(), v * theta.sin()], theta }
            }
        }
    }
}

/// Cumulative arc length of y = A sin(kx) on a uniform x grid, with exact
/// inversion by Newton refinement against the local quadrature.
#[derive(Debug, Clone)]
struct ArcLut {
    x_end: f64,
    amplitude: f64,
    wavenumber: f64,
    cumulative: Vec<f64>,
}

impl ArcLut {
    const CELLS: usize = 2000;

    fn build(amplitude: f64, wavenumber: f64, x_end: f64) -> Self {
        let f = |x: f64| {
            let c = amplitude * wavenumber * (wavenumber * x).cos();
            (1.0 + c * c).sqrt()
        };
        let h = x_end / Self::CELLS as f64;
        let mut cumulative = Vec::with_capacity(Self::CELLS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..Self::CELLS {
            let a = i as f64 * h;
            acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
            cumulative.push(acc);
        }
        Self { x_end, amplitude, wavenumber, cumulative }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn speed(&self, x: f64) -> f64 {
        let c = self.amplitude * self.wavenumber * (self.wavenumber * x).cos();
        (1.0 + c * c).sqrt()
    }

    /// x with arc length s, to within 1e-12 of the tabulated quadrature.
    fn invert(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total());
        let idx = match self
            .cumulative
            .binary_search_by(|probe| probe.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(Self::CELLS - 1),
            Err(i) => i.saturating_sub(1).min(Self::CELLS - 1),
        };
        let h = self.x_end / Self::CELLS as f64;
        let x0 = idx as f64 * h;
        let mut x = x0 + (s - self.cumulative[idx]) / self.speed(x0).max(1.0);
        for _ in 0..30 {
            let err = self.cumulative[idx] + self.quad(x0, x) - s;
            if err.abs() <= 1e-13 * (1.0 + self.total()) {
                break;
            }
            x -= err / self.speed(x);
        }
        x.clamp(0.0, self.x_end)
    }

    fn quad(&self, a: f64, b: f64) -> f64 {
        // composite Simpson over a span at most a few grid cells wide
        let n = 4;
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let lo = a + i as f64 * h;
            acc += h / 6.0 * (self.speed(lo) + 4.0 * self.speed(lo + 0.5 * h) + self.speed(lo + h));
        }
        acc
    }
}

/// Time-parameterized walking path.
#[derive(Debug, Clone)]
pub struct Path {
    segments: Vec<Segment>,
    corners: Vec<CornerEvent>,
    t_end: f64,
    total_distance: f64,
}

impl Path {
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn total_distance(&self) -> f64 {
        self.total_distance
    }

    pub fn corner_events(&self) -> &[CornerEvent] {
        &self.corners
    }

    pub fn start(&self) -> PathReference {
        sample_reference(self, 0.0)
    }

    pub fn end(&self) -> PathReference {
        sample_reference(self, self.t_end)
    }

    /// Path that stands at one point with a fixed heading.
    pub fn stationary(x: f64, y: f64, heading: f64) -> Self {
        Path {
            segments: vec![Segment {
                t0: 0.0,
                duration: 0.0,
                profile: None,
                geom: SegmentGeom::Hold { position: [x, y], theta: heading },
            }],
            corners: Vec::new(),
            t_end: 0.0,
            total_distance: 0.0,
        }
    }

    /// Straight segment from the origin along a fixed heading.
    pub fn straight_line(length: f64, heading: f64, v_max: f64, accel: f64) -> Result<Self> {
        let profile = SpeedProfile::plan(v_max, accel, length)?;
        let duration = profile.duration();
        Ok(Path {
            segments: vec![Segment {
                t0: 0.0,
                duration,
                profile: Some(profile),
                geom: SegmentGeom::Line { start: [0.0, 0.0], heading },
            }],
            corners: Vec::new(),
            t_end: duration,
            total_distance: length,
        })
    }
}

/// Builds a time-parameterized path from a shape and a speed-profile request.
///
/// The profile's `v_max` and `accel` are used as given; the traveled distance
/// comes from the geometry (circle circumference times laps, cardioid length
/// 8a, sinusoid arc length, square side per side). Square corners rotate in
/// place at `turn_rate` between sides.
pub fn make_path(shape: &PathShape, v_max: f64, accel: f64) -> Result<Path> {
    let positive = |name: &str, v: f64| -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
        }
    };
    match *shape {
        PathShape::Circle { radius, laps } => {
            positive("radius", radius)?;
            positive("laps", laps)?;
            let distance = laps * std::f64::consts::TAU * radius;
            let profile = SpeedProfile::plan(v_max, accel, distance)?;
            let duration = profile.duration();
            Ok(Path {
                segments: vec![Segment {
                    t0: 0.0,
                    duration,
                    profile: Some(profile),
                    geom: SegmentGeom::Arc { center: [0.0, radius], radius },
                }],
                corners: Vec::new(),
                t_end: duration,
                total_distance: distance,
            })
        }
        PathShape::Cardioid { a } => {
            positive("a", a)?;
            let distance = 8.0 * a;
            let profile = SpeedProfile::plan(v_max, accel, distance)?;
            let duration = profile.duration();
            Ok(Path {
                segments: vec![Segment {
                    t0: 0.0,
                    duration,
                    profile: Some(profile),
                    geom: SegmentGeom::CardioidLoop { a },
                }],
                corners: Vec::new(),
                t_end: duration,
                total_distance: distance,
            })
        }
        PathShape::Sinusoid { amplitude, wavenumber, length } => {
            positive("amplitude", amplitude)?;
            positive("wavenumber", wavenumber)?;
            positive("length", length)?;
            let lut = ArcLut::build(amplitude, wavenumber, length);
            let distance = lut.total();
            let profile = SpeedProfile::plan(v_max, accel, distance)?;
            let duration = profile.duration();
            Ok(Path {
                segments: vec![Segment {
                    t0: 0.0,
                    duration,
                    profile: Some(profile),
                    geom: SegmentGeom::SinusoidCurve { amplitude, wavenumber, lut },
                }],
                corners: Vec::new(),
                t_end: duration,
                total_distance: distance,
            })
        }
        PathShape::Square { side, turn_rate } => {
            positive("side", side)?;
            positive("turn_rate", turn_rate)?;
            if turn_rate > MAX_TURN_RATE * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "turn_rate {turn_rate} exceeds the {MAX_TURN_RATE:.4} rad/s limit"
                )));
            }
            let profile = SpeedProfile::plan(v_max, accel, side)?;
            let side_dur = profile.duration();
            let turn_dur = std::f64::consts::FRAC_PI_2 / turn_rate;
            let vertices =
                [[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]];
            let mut segments = Vec::with_capacity(7);
            let mut corners = Vec::with_capacity(3);
            let mut t = 0.0;
            for (i, corner) in vertices.iter().enumerate() {
                let heading = i as f64 * std::f64::consts::FRAC_PI_2;
                segments.push(Segment {
                    t0: t,
                    duration: side_dur,
                    profile: Some(profile),
                    geom: SegmentGeom::Line { start: *corner, heading },
                });
                t += side_dur;
                if i + 1 < vertices.len() {
                    let next = vertices[i + 1];
                    corners.push(CornerEvent {
                        t_start: t,
                        t_end: t + turn_dur,
                        position: next,
                        theta_from: heading,
                        theta_to: heading + std::f64::consts::FRAC_PI_2,
                    });
                    segments.push(Segment {
                        t0: t,
                        duration: turn_dur,
                        profile: None,
                        geom: SegmentGeom::Rotation {
                            position: next,
                            theta_from: heading,
                            theta_to: heading + std::f64::consts::FRAC_PI_2,
                        },
                    });
                    t += turn_dur;
                }
            }
            Ok(Path {
                segments,
                corners,
                t_end: t,
                total_distance: 4.0 * side,
            })
        }
        PathShape::Point { x, y, heading } => Ok(Path::stationary(x, y, heading)),
    }
}

/// Samples the reference at time `t`, clamping to the rest endpoints outside
/// the path's time span.
pub fn sample_reference(path: &Path, t: f64) -> PathReference {
    let t = t.clamp(0.0, path.t_end);
    let idx = path
        .segments
        .partition_point(|seg| seg.t0 <= t)
        .saturating_sub(1);
    let seg = &path.segments[idx];
    seg.sample(t - seg.t0)
}
