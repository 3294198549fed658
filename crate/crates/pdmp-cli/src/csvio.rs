//! Trajectory CSV: header `t,tag,x1..xd,v1..vd`, one row per breakpoint.
//!
//! Floats are printed with 17 significant digits, so parsing a file
//! recovers exactly the values the simulation produced and summaries
//! recomputed from disk match the originals bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pdmp::sampler::{Breakpoint, EventCounts, EventTag, TrajectorySkeleton};
use pdmp::target::RegionId;

use crate::CliError;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn skeleton_to_csv(skeleton: &TrajectorySkeleton) -> String {
    let dim = skeleton.breakpoints[0].position.len();
    let mut out = String::new();
    out.push('t');
    out.push_str(",tag");
    for i in 1..=dim {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=dim {
        let _ = write!(out, ",v{i}");
    }
    out.push('\n');
    for bp in &skeleton.breakpoints {
        let _ = write!(out, "{},{}", format_float(bp.t), bp.tag.as_str());
        for x in &bp.position {
            let _ = write!(out, ",{}", format_float(*x));
        }
        for v in &bp.velocity {
            let _ = write!(out, ",{}", format_float(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_skeleton(path: &Path, skeleton: &TrajectorySkeleton) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, skeleton_to_csv(skeleton))?;
    Ok(())
}

/// The hypercube partition used by every experiment this runner produces:
/// region 0 inside `[-1, 1]^d`, region 1 outside.
pub fn cube_region(x: &[f64]) -> RegionId {
    if x.iter().any(|xi| xi.abs() > 1.0) {
        RegionId(1)
    } else {
        RegionId(0)
    }
}

/// Parse a trajectory CSV back into a skeleton.
///
/// Region bookkeeping is not stored in the file; each segment is assigned
/// by testing its midpoint against the hypercube, which is exact for every
/// segment a simulation can produce (segments never run along a facet).
pub fn read_skeleton(path: &Path) -> Result<TrajectorySkeleton, CliError> {
    let text = fs::read_to_string(path)?;
    parse_skeleton(&text)
        .map_err(|msg| CliError::SchemaMismatch(format!("{}: {msg}", path.display())))
}

pub fn parse_skeleton(text: &str) -> Result<TrajectorySkeleton, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 4 || !columns.len().is_multiple_of(2) {
        return Err(format!("malformed header `{header}`"));
    }
    let dim = (columns.len() - 2) / 2;
    let mut expected = vec!["t".to_string(), "tag".to_string()];
    expected.extend((1..=dim).map(|i| format!("x{i}")));
    expected.extend((1..=dim).map(|i| format!("v{i}")));
    if columns != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(format!("unexpected header `{header}`"));
    }

    let mut breakpoints: Vec<Breakpoint> = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(format!("row {} has {} fields", row + 1, fields.len()));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| format!("bad time in row {}", row + 1))?;
        let tag = EventTag::parse(fields[1]).ok_or(format!("bad tag in row {}", row + 1))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| format!("bad float in row {}", row + 1))
        };
        let position = fields[2..2 + dim]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>, _>>()?;
        let velocity = fields[2 + dim..2 + 2 * dim]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>, _>>()?;
        breakpoints.push(Breakpoint {
            t,
            position,
            velocity,
            tag,
            region: RegionId(0), // assigned below from segment midpoints
        });
    }
    if breakpoints.len() < 2 {
        return Err("need at least start and end rows".into());
    }

    for i in 0..breakpoints.len() {
        let region = if i + 1 < breakpoints.len() && breakpoints[i + 1].t > breakpoints[i].t {
            let dt = breakpoints[i + 1].t - breakpoints[i].t;
            let mid: Vec<f64> = breakpoints[i]
                .position
                .iter()
                .zip(&breakpoints[i].velocity)
                .map(|(x, v)| x + 0.5 * dt * v)
                .collect();
            cube_region(&mid)
        } else if i > 0 {
            breakpoints[i - 1].region
        } else {
            cube_region(&breakpoints[i].position)
        };
        breakpoints[i].region = region;
    }

    let mut counts = EventCounts::default();
    for bp in &breakpoints {
        match bp.tag {
            EventTag::Bounce => counts.bounce += 1,
            EventTag::Refresh => counts.refresh += 1,
            EventTag::Boundary => counts.boundary += 1,
            EventTag::Start | EventTag::End => {}
        }
    }
    let total_time = breakpoints.last().unwrap().t - breakpoints.first().unwrap().t;
    Ok(TrajectorySkeleton {
        breakpoints,
        total_time,
        event_counts: counts,
    })
}
