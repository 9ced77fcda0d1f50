//! Self-contained SVG plots for run artifacts. No external renderer; every
//! figure is a fixed-size canvas with hand-placed panels.

use std::fmt::Write as _;

use hlipwalk::geom::Zonotope;
use hlipwalk::planner::{make_path, sample_reference};
use hlipwalk::sim::{Plane, ScenarioConfig, StepRecord, TrajectorySample};

const STYLE: &str = r#"<style>
.frame { fill: none; stroke: #444; stroke-width: 1; }
.tick { stroke: #ccc; stroke-width: 0.6; }
.lbl { font: 11px sans-serif; fill: #333; }
.title { font: 13px sans-serif; font-weight: bold; fill: #111; }
.desired { fill: none; stroke: #888; stroke-width: 1.3; stroke-dasharray: 6 4; }
.reference { fill: none; stroke: #1f77b4; stroke-width: 1.5; }
.robot { fill: none; stroke: #d62728; stroke-width: 1.2; }
.series-x { fill: none; stroke: #1f77b4; stroke-width: 1.2; }
.series-y { fill: none; stroke: #ff7f0e; stroke-width: 1.2; }
.series-x-ref { fill: none; stroke: #1f77b4; stroke-width: 1.0; stroke-dasharray: 5 4; }
.series-y-ref { fill: none; stroke: #ff7f0e; stroke-width: 1.0; stroke-dasharray: 5 4; }
.obstacle { fill: #f6d5d5; stroke: #b22222; stroke-width: 1; fill-opacity: 0.6; }
.eset { fill: #dbe9f6; stroke: #1f77b4; stroke-width: 1; fill-opacity: 0.7; }
.eset-scaled { fill: none; stroke: #1f77b4; stroke-width: 1; stroke-dasharray: 4 3; }
.err-pt.inside { fill: #2ca02c; }
.err-pt.outside { fill: #d62728; }
.step-cmd { fill: none; stroke: #1f77b4; stroke-width: 1; }
.step-real { fill: #ff7f0e; }
</style>
"#;

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// One plotting panel: a pixel rectangle plus the data window mapped into it
/// (y axis points up in data space).
struct Panel {
    px: f64,
    py: f64,
    pw: f64,
    ph: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

fn padded(min: f64, max: f64) -> (f64, f64) {
    let span = (max - min).max(1e-9);
    (min - 0.08 * span, max + 0.08 * span)
}

impl Panel {
    fn fit(
        rect: (f64, f64, f64, f64),
        xs: impl Iterator<Item = f64>,
        ys: impl Iterator<Item = f64>,
        equal_aspect: bool,
    ) -> Panel {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in xs {
            if x.is_finite() {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
            }
        }
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in ys {
            if y.is_finite() {
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
        if !xmin.is_finite() {
            (xmin, xmax) = (0.0, 1.0);
        }
        if !ymin.is_finite() {
            (ymin, ymax) = (0.0, 1.0);
        }
        let (mut xmin, mut xmax) = padded(xmin, xmax);
        let (mut ymin, mut ymax) = padded(ymin, ymax);
        if equal_aspect {
            let sx = (xmax - xmin) / rect.2;
            let sy = (ymax - ymin) / rect.3;
            let s = sx.max(sy);
            let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
            xmin = cx - 0.5 * s * rect.2;
            xmax = cx + 0.5 * s * rect.2;
            ymin = cy - 0.5 * s * rect.3;
            ymax = cy + 0.5 * s * rect.3;
        }
        Panel {
            px: rect.0,
            py: rect.1,
            pw: rect.2,
            ph: rect.3,
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let u = self.px + (x - self.xmin) / (self.xmax - self.xmin) * self.pw;
        let v = self.py + self.ph - (y - self.ymin) / (self.ymax - self.ymin) * self.ph;
        (u, v)
    }

    fn axes(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        writeln!(
            out,
            r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}"/>"#,
            fmt2(self.px),
            fmt2(self.py),
            fmt2(self.pw),
            fmt2(self.ph)
        )
        .unwrap();
        for i in 0..=4 {
            let fx = self.xmin + (self.xmax - self.xmin) * i as f64 / 4.0;
            let (u, _) = self.map(fx, self.ymin);
            writeln!(
                out,
                r#"<line class="tick" x1="{u:.2}" y1="{}" x2="{u:.2}" y2="{}"/>"#,
                fmt2(self.py),
                fmt2(self.py + self.ph)
            )
            .unwrap();
            writeln!(
                out,
                r#"<text class="lbl" x="{u:.2}" y="{}" text-anchor="middle">{}</text>"#,
                fmt2(self.py + self.ph + 14.0),
                fmt2(fx)
            )
            .unwrap();
            let fy = self.ymin + (self.ymax - self.ymin) * i as f64 / 4.0;
            let (_, v) = self.map(self.xmin, fy);
            writeln!(
                out,
                r#"<line class="tick" x1="{}" y1="{v:.2}" x2="{}" y2="{v:.2}"/>"#,
                fmt2(self.px),
                fmt2(self.px + self.pw)
            )
            .unwrap();
            writeln!(
                out,
                r#"<text class="lbl" x="{}" y="{v:.2}" text-anchor="end">{}</text>"#,
                fmt2(self.px - 5.0),
                fmt2(fy)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text class="title" x="{}" y="{}">{}</text>"#,
            fmt2(self.px),
            fmt2(self.py - 8.0),
            title
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="lbl" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt2(self.px + 0.5 * self.pw),
            fmt2(self.py + self.ph + 30.0),
            xlabel
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="lbl" x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
            fmt2(self.px - 42.0),
            fmt2(self.py + 0.5 * self.ph),
            fmt2(self.px - 42.0),
            fmt2(self.py + 0.5 * self.ph),
            ylabel
        )
        .unwrap();
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], class: &str) {
        if pts.is_empty() {
            return;
        }
        let mut coords = String::with_capacity(pts.len() * 14);
        for &(x, y) in pts {
            let (u, v) = self.map(x, y);
            write!(coords, "{u:.2},{v:.2} ").unwrap();
        }
        writeln!(out, r#"<polyline class="{class}" points="{}"/>"#, coords.trim_end()).unwrap();
    }

    fn circle_data(&self, out: &mut String, x: f64, y: f64, r_data: f64, class: &str) {
        let (u, v) = self.map(x, y);
        let rp = r_data / (self.xmax - self.xmin) * self.pw;
        writeln!(
            out,
            r#"<circle class="{class}" cx="{u:.2}" cy="{v:.2}" r="{rp:.2}"/>"#
        )
        .unwrap();
    }

    fn dot(&self, out: &mut String, x: f64, y: f64, r_px: f64, class: &str) {
        let (u, v) = self.map(x, y);
        writeln!(
            out,
            r#"<circle class="{class}" cx="{u:.2}" cy="{v:.2}" r="{r_px:.2}"/>"#
        )
        .unwrap();
    }

    fn polygon(&self, out: &mut String, pts: &[(f64, f64)], class: &str) {
        if pts.is_empty() {
            return;
        }
        let mut coords = String::with_capacity(pts.len() * 14);
        for &(x, y) in pts {
            let (u, v) = self.map(x, y);
            write!(coords, "{u:.2},{v:.2} ").unwrap();
        }
        writeln!(out, r#"<polygon class="{class}" points="{}"/>"#, coords.trim_end()).unwrap();
    }
}

fn document(width: u32, height: u32, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n{STYLE}{body}</svg>\n"
    )
}

fn legend(out: &mut String, x: f64, y: f64, entries: &[(&str, &str)]) {
    let mut cx = x;
    for (color, label) in entries {
        writeln!(
            out,
            r#"<text class="lbl" x="{}" y="{}" fill="{color}" style="fill:{color}">{label}</text>"#,
            fmt2(cx),
            fmt2(y)
        )
        .unwrap();
        cx += 14.0 + 7.0 * label.len() as f64;
    }
}

/// Boundary polygon of a zonotope's shadow on coordinates (i, j).
/// Returns the vertex loop; an empty loop means the shadow is a point.
pub fn zonotope_shadow(z: &Zonotope, i: usize, j: usize) -> ((f64, f64), Vec<(f64, f64)>) {
    let c = (z.center[i], z.center[j]);
    let mut gens: Vec<(f64, f64)> = z
        .generators
        .iter()
        .map(|g| (g[i], g[j]))
        .filter(|(gx, gy)| gx.hypot(*gy) > 1e-12)
        .map(|(gx, gy)| {
            if gy < 0.0 || (gy == 0.0 && gx < 0.0) {
                (-gx, -gy)
            } else {
                (gx, gy)
            }
        })
        .collect();
    if gens.is_empty() {
        return (c, Vec::new());
    }
    gens.sort_by(|a, b| a.1.atan2(a.0).partial_cmp(&b.1.atan2(b.0)).unwrap());
    let m = gens.len();
    let mut first = Vec::with_capacity(m + 1);
    let mut vx = c.0 - gens.iter().map(|g| g.0).sum::<f64>();
    let mut vy = c.1 - gens.iter().map(|g| g.1).sum::<f64>();
    first.push((vx, vy));
    for g in &gens {
        vx += 2.0 * g.0;
        vy += 2.0 * g.1;
        first.push((vx, vy));
    }
    let mut poly = first.clone();
    for p in first.iter().take(m).skip(1) {
        poly.push((2.0 * c.0 - p.0, 2.0 * c.1 - p.1));
    }
    (c, poly)
}

fn scale_about(c: (f64, f64), poly: &[(f64, f64)], factor: f64) -> Vec<(f64, f64)> {
    poly.iter()
        .map(|&(x, y)| (c.0 + factor * (x - c.0), c.1 + factor * (y - c.1)))
        .collect()
}

/// Overhead view: desired path, internal reference footprints, and the robot
/// trace, plus obstacle keep-out discs.
pub fn plot_path(
    cfg: &ScenarioConfig,
    traj: &[TrajectorySample],
    steps: &[StepRecord],
) -> Result<String, String> {
    let path = make_path(&cfg.path, cfg.speed.v_max, cfg.speed.accel)
        .map_err(|e| format!("rebuilding path for plot: {e}"))?;
    let t_total = traj.last().map(|s| s.t).unwrap_or(path.t_end()).max(path.t_end());
    let mut desired = Vec::with_capacity(201);
    for i in 0..=200 {
        let t = t_total * i as f64 / 200.0;
        let r = sample_reference(&path, t);
        desired.push((r.r[0], r.r[1]));
    }

    let mut reference = Vec::new();
    let mut it = steps.iter();
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        let (rx, ry) = match (a.plane, b.plane) {
            (Plane::X, Plane::Y) => (a.reference.c, b.reference.c),
            (Plane::Y, Plane::X) => (b.reference.c, a.reference.c),
            _ => continue,
        };
        reference.push((rx, ry));
    }

    let robot: Vec<(f64, f64)> = traj
        .iter()
        .step_by(10)
        .map(|s| (s.com[0], s.com[1]))
        .collect();

    let xs = desired
        .iter()
        .chain(&reference)
        .chain(&robot)
        .map(|p| p.0)
        .chain(cfg.obstacles.iter().flat_map(|o| [o.x - o.clearance, o.x + o.clearance]));
    let ys = desired
        .iter()
        .chain(&reference)
        .chain(&robot)
        .map(|p| p.1)
        .chain(cfg.obstacles.iter().flat_map(|o| [o.y - o.clearance, o.y + o.clearance]));

    let panel = Panel::fit((70.0, 50.0, 720.0, 500.0), xs, ys, true);
    let mut body = String::new();
    panel.axes(&mut body, &format!("overhead path: {}", cfg.name), "x [m]", "y [m]");
    for o in &cfg.obstacles {
        panel.circle_data(&mut body, o.x, o.y, o.clearance, "obstacle");
    }
    panel.polyline(&mut body, &desired, "desired");
    panel.polyline(&mut body, &reference, "reference");
    panel.polyline(&mut body, &robot, "robot");
    legend(
        &mut body,
        70.0,
        26.0,
        &[("#888", "desired"), ("#1f77b4", "reference"), ("#d62728", "robot")],
    );
    Ok(document(860, 620, &body))
}

/// Two stacked panels: planar positions and velocities against time, with the
/// desired profile dashed behind each robot trace.
pub fn plot_timeseries(cfg: &ScenarioConfig, traj: &[TrajectorySample]) -> Result<String, String> {
    let path = make_path(&cfg.path, cfg.speed.v_max, cfg.speed.accel)
        .map_err(|e| format!("rebuilding path for plot: {e}"))?;
    let stride = (traj.len() / 4000).max(1);
    let rows: Vec<&TrajectorySample> = traj.iter().step_by(stride).collect();
    let pos_x: Vec<(f64, f64)> = rows.iter().map(|s| (s.t, s.com[0])).collect();
    let pos_y: Vec<(f64, f64)> = rows.iter().map(|s| (s.t, s.com[1])).collect();
    let vel_x: Vec<(f64, f64)> = rows.iter().map(|s| (s.t, s.vel[0])).collect();
    let vel_y: Vec<(f64, f64)> = rows.iter().map(|s| (s.t, s.vel[1])).collect();
    let mut ref_px = Vec::with_capacity(rows.len());
    let mut ref_py = Vec::with_capacity(rows.len());
    let mut ref_vx = Vec::with_capacity(rows.len());
    let mut ref_vy = Vec::with_capacity(rows.len());
    for s in &rows {
        let r = sample_reference(&path, s.t);
        ref_px.push((s.t, r.r[0]));
        ref_py.push((s.t, r.r[1]));
        ref_vx.push((s.t, r.rdot[0]));
        ref_vy.push((s.t, r.rdot[1]));
    }

    let mut body = String::new();
    let pos_pts = pos_x.iter().chain(&pos_y).chain(&ref_px).chain(&ref_py);
    let panel_pos = Panel::fit(
        (70.0, 50.0, 720.0, 230.0),
        pos_pts.clone().map(|p| p.0),
        pos_pts.map(|p| p.1),
        false,
    );
    panel_pos.axes(&mut body, "COM position", "t [s]", "position [m]");
    panel_pos.polyline(&mut body, &ref_px, "series-x-ref");
    panel_pos.polyline(&mut body, &ref_py, "series-y-ref");
    panel_pos.polyline(&mut body, &pos_x, "series-x");
    panel_pos.polyline(&mut body, &pos_y, "series-y");

    let vel_pts = vel_x.iter().chain(&vel_y).chain(&ref_vx).chain(&ref_vy);
    let panel_vel = Panel::fit(
        (70.0, 360.0, 720.0, 230.0),
        vel_pts.clone().map(|p| p.0),
        vel_pts.map(|p| p.1),
        false,
    );
    panel_vel.axes(&mut body, "COM velocity", "t [s]", "velocity [m/s]");
    panel_vel.polyline(&mut body, &ref_vx, "series-x-ref");
    panel_vel.polyline(&mut body, &ref_vy, "series-y-ref");
    panel_vel.polyline(&mut body, &vel_x, "series-x");
    panel_vel.polyline(&mut body, &vel_y, "series-y");
    legend(
        &mut body,
        70.0,
        26.0,
        &[("#1f77b4", "x"), ("#ff7f0e", "y"), ("#888", "dashed: desired")],
    );
    Ok(document(860, 660, &body))
}

/// Commanded and realized step sizes per plane against the step index.
pub fn plot_steps(steps: &[StepRecord]) -> Option<String> {
    if steps.is_empty() {
        return None;
    }
    let mut body = String::new();
    for (row, plane, title) in [
        (0usize, Plane::X, "step sizes, plane x"),
        (1usize, Plane::Y, "step sizes, plane y"),
    ] {
        let cmd: Vec<(f64, f64)> = steps
            .iter()
            .filter(|s| s.plane == plane)
            .map(|s| (s.k as f64, s.u_cmd))
            .collect();
        let real: Vec<(f64, f64)> = steps
            .iter()
            .filter(|s| s.plane == plane)
            .map(|s| (s.k as f64, s.u_realized))
            .collect();
        let pts = cmd.iter().chain(&real);
        let rect = (70.0, 50.0 + 310.0 * row as f64, 720.0, 230.0);
        let panel = Panel::fit(rect, pts.clone().map(|p| p.0), pts.map(|p| p.1), false);
        panel.axes(&mut body, title, "step k", "step size [m]");
        panel.polyline(&mut body, &cmd, "step-cmd");
        for &(k, u) in &real {
            panel.dot(&mut body, k, u, 2.2, "step-real");
        }
    }
    legend(
        &mut body,
        70.0,
        26.0,
        &[("#1f77b4", "commanded"), ("#ff7f0e", "realized")],
    );
    Some(document(860, 660, &body))
}

/// Per-plane scatter of post-impact tracking errors over the invariant set's
/// (p, v) shadow. Points outside the inflated set carry the `outside` class.
pub fn plot_errors(steps: &[StepRecord], e_set: Option<&Zonotope>) -> Option<String> {
    if steps.is_empty() {
        return None;
    }
    let shadow = e_set.map(|z| zonotope_shadow(z, 1, 2));
    let mut body = String::new();
    for (row, plane, title) in [
        (0usize, Plane::X, "step errors, plane x"),
        (1usize, Plane::Y, "step errors, plane y"),
    ] {
        let pts: Vec<(&StepRecord, [f64; 3])> = steps
            .iter()
            .filter(|s| s.plane == plane)
            .map(|s| (s, s.error()))
            .collect();
        let shadow_pts: Vec<(f64, f64)> = match &shadow {
            Some((c, poly)) if poly.is_empty() => vec![*c],
            Some((c, poly)) => scale_about(*c, poly, 1.05),
            None => Vec::new(),
        };
        let xs = pts.iter().map(|(_, e)| e[1]).chain(shadow_pts.iter().map(|p| p.0));
        let ys = pts.iter().map(|(_, e)| e[2]).chain(shadow_pts.iter().map(|p| p.1));
        let rect = (80.0, 50.0 + 310.0 * row as f64, 700.0, 230.0);
        let panel = Panel::fit(rect, xs, ys, false);
        panel.axes(&mut body, title, "position error p [m]", "velocity error v [m/s]");
        if let Some((c, poly)) = &shadow {
            if poly.is_empty() {
                panel.dot(&mut body, c.0, c.1, 2.0, "eset");
            } else {
                panel.polygon(&mut body, poly, "eset");
                panel.polygon(&mut body, &scale_about(*c, poly, 1.05), "eset-scaled");
            }
        }
        for (s, e) in &pts {
            let class = match s.e_in_set {
                Some(false) => "err-pt outside",
                _ => "err-pt inside",
            };
            panel.dot(&mut body, e[1], e[2], 2.4, class);
        }
    }
    legend(
        &mut body,
        80.0,
        26.0,
        &[
            ("#2ca02c", "inside"),
            ("#d62728", "outside"),
            ("#1f77b4", "invariant set (dashed: x1.05)"),
        ],
    );
    Some(document(860, 660, &body))
}
