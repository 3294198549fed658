//! Static SVG plot of a trajectory's first two coordinates: an 800x800
//! viewport over the world square [-1.5, 1.5]^2, the unit cube outlined,
//! the path as a polyline and one colored marker per event.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pdmp::sampler::{EventTag, TrajectorySkeleton};

use crate::CliError;

const SIZE: f64 = 800.0;
const WORLD: f64 = 1.5;

fn px(x: f64) -> f64 {
    (x + WORLD) / (2.0 * WORLD) * SIZE
}

fn py(y: f64) -> f64 {
    SIZE - (y + WORLD) / (2.0 * WORLD) * SIZE
}

fn marker_color(tag: EventTag) -> &'static str {
    match tag {
        EventTag::Start => "#2ca02c",
        EventTag::Bounce => "#ff7f0e",
        EventTag::Refresh => "#17becf",
        EventTag::Boundary => "#9467bd",
        EventTag::End => "#000000",
    }
}

pub fn render_svg(skeleton: &TrajectorySkeleton) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );
    let corner = px(-1.0);
    let side = px(1.0) - px(-1.0);
    let _ = writeln!(
        out,
        r##"<rect x="{corner:.2}" y="{corner:.2}" width="{side:.2}" height="{side:.2}" fill="none" stroke="#444444" stroke-width="1.5"/>"##
    );
    let mut points = String::new();
    for bp in &skeleton.breakpoints {
        let (x, y) = plane_coords(&bp.position);
        let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
    }
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="0.8"/>"##,
        points.trim_end()
    );
    for bp in &skeleton.breakpoints {
        let (x, y) = plane_coords(&bp.position);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{}"/>"#,
            px(x),
            py(y),
            marker_color(bp.tag)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn plane_coords(position: &[f64]) -> (f64, f64) {
    let x = position.first().copied().unwrap_or(0.0);
    let y = position.get(1).copied().unwrap_or(0.0);
    (x, y)
}

pub fn write_svg(path: &Path, skeleton: &TrajectorySkeleton) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, render_svg(skeleton))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pdmp::sampler::{Breakpoint, EventCounts};
    use pdmp::target::RegionId;

    #[test]
    fn svg_contains_the_square_and_markers() {
        let skel = TrajectorySkeleton {
            breakpoints: vec![
                Breakpoint {
                    t: 0.0,
                    position: vec![0.0, 0.0],
                    velocity: vec![1.0, 0.0],
                    tag: EventTag::Start,
                    region: RegionId(0),
                },
                Breakpoint {
                    t: 1.0,
                    position: vec![1.0, 0.0],
                    velocity: vec![-1.0, 0.0],
                    tag: EventTag::Boundary,
                    region: RegionId(0),
                },
                Breakpoint {
                    t: 1.5,
                    position: vec![0.5, 0.0],
                    velocity: vec![-1.0, 0.0],
                    tag: EventTag::End,
                    region: RegionId(0),
                },
            ],
            total_time: 1.5,
            event_counts: EventCounts::default(),
        };
        let text = render_svg(&skel);
        assert!(text.starts_with("<svg"));
        assert!(text.contains("polyline"));
        assert_eq!(text.matches("<circle").count(), 3);
        assert!(text.contains("#9467bd"), "boundary marker color present");
    }
}
