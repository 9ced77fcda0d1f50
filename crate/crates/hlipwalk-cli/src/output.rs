//! Run artifacts on disk: CSV time series and JSON documents.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hlipwalk::hlip::PlanarState;
use hlipwalk::sim::{Phase, Plane, StepRecord, Summary, TrajectorySample};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

pub const TRAJECTORY_HEADER: &str =
    "t,com_x,com_y,com_z,vel_x,vel_y,vel_z,stance_foot_x,stance_foot_y,heading,phase";
pub const STEPS_HEADER: &str =
    "k,t,plane,c,p,v,c_ref,p_ref,v_ref,u_cmd,u_realized,w0,w1,w2,e_in_E";

/// Top-level contents of summary.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub seed: u64,
    pub summary: Summary,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("serializing {}: {e}", path.display()))?;
    fs::write(path, text + "\n").map_err(|e| format!("writing {}: {e}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
}

fn phase_str(p: Phase) -> &'static str {
    match p {
        Phase::Ssp => "SSP",
        Phase::Dsp => "DSP",
    }
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectorySample]) -> Result<(), String> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.com[0],
            r.com[1],
            r.com[2],
            r.vel[0],
            r.vel[1],
            r.vel[2],
            r.stance_foot[0],
            r.stance_foot[1],
            r.heading,
            phase_str(r.phase)
        )
        .unwrap();
    }
    fs::write(path, out).map_err(|e| format!("writing {}: {e}", path.display()))
}

pub fn write_steps_csv(path: &Path, rows: &[StepRecord]) -> Result<(), String> {
    let mut out = String::with_capacity(96 * (rows.len() + 1));
    out.push_str(STEPS_HEADER);
    out.push('\n');
    for r in rows {
        let (w0, w1, w2) = match r.w {
            Some(w) => (w[0].to_string(), w[1].to_string(), w[2].to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        let e_in = match r.e_in_set {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.t,
            r.plane.as_str(),
            r.robot.c,
            r.robot.p,
            r.robot.v,
            r.reference.c,
            r.reference.p,
            r.reference.v,
            r.u_cmd,
            r.u_realized,
            w0,
            w1,
            w2,
            e_in
        )
        .unwrap();
    }
    fs::write(path, out).map_err(|e| format!("writing {}: {e}", path.display()))
}

fn parse_f64(field: &str, line: usize, name: &str) -> Result<f64, String> {
    field
        .parse::<f64>()
        .map_err(|_| format!("line {line}: bad {name} value {field:?}"))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectorySample>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRAJECTORY_HEADER => {}
        _ => return Err(format!("{}: unexpected trajectory header", path.display())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(format!("line {n}: expected 11 fields, got {}", f.len()));
        }
        let phase = match f[10] {
            "SSP" => Phase::Ssp,
            "DSP" => Phase::Dsp,
            other => return Err(format!("line {n}: unknown phase {other:?}")),
        };
        rows.push(TrajectorySample {
            t: parse_f64(f[0], n, "t")?,
            com: [
                parse_f64(f[1], n, "com_x")?,
                parse_f64(f[2], n, "com_y")?,
                parse_f64(f[3], n, "com_z")?,
            ],
            vel: [
                parse_f64(f[4], n, "vel_x")?,
                parse_f64(f[5], n, "vel_y")?,
                parse_f64(f[6], n, "vel_z")?,
            ],
            stance_foot: [
                parse_f64(f[7], n, "stance_foot_x")?,
                parse_f64(f[8], n, "stance_foot_y")?,
            ],
            heading: parse_f64(f[9], n, "heading")?,
            phase,
        });
    }
    Ok(rows)
}

pub fn read_steps_csv(path: &Path) -> Result<Vec<StepRecord>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == STEPS_HEADER => {}
        _ => return Err(format!("{}: unexpected steps header", path.display())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(format!("line {n}: expected 15 fields, got {}", f.len()));
        }
        let plane = match f[2] {
            "x" => Plane::X,
            "y" => Plane::Y,
            other => return Err(format!("line {n}: unknown plane {other:?}")),
        };
        let w = if f[11].is_empty() && f[12].is_empty() && f[13].is_empty() {
            None
        } else {
            Some([
                parse_f64(f[11], n, "w0")?,
                parse_f64(f[12], n, "w1")?,
                parse_f64(f[13], n, "w2")?,
            ])
        };
        let e_in_set = match f[14] {
            "" => None,
            "true" => Some(true),
            "false" => Some(false),
            other => return Err(format!("line {n}: bad e_in_E value {other:?}")),
        };
        rows.push(StepRecord {
            k: f[0].parse().map_err(|_| format!("line {n}: bad k {:?}", f[0]))?,
            t: parse_f64(f[1], n, "t")?,
            plane,
            robot: PlanarState::new(
                parse_f64(f[3], n, "c")?,
                parse_f64(f[4], n, "p")?,
                parse_f64(f[5], n, "v")?,
            ),
            reference: PlanarState::new(
                parse_f64(f[6], n, "c_ref")?,
                parse_f64(f[7], n, "p_ref")?,
                parse_f64(f[8], n, "v_ref")?,
            ),
            u_cmd: parse_f64(f[9], n, "u_cmd")?,
            u_realized: parse_f64(f[10], n, "u_realized")?,
            w,
            e_in_set,
        });
    }
    Ok(rows)
}
