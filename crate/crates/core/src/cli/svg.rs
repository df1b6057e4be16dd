use std::fmt::Write as _;

use crate::geometry::Point;
use crate::navigator::CommandOutcome;
use crate::world::EnvironmentMap;

const SCALE: f64 = 40.0;
const PAD: f64 = 1.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Corridors, walls, objects, planned waypoints and one trajectory
/// polyline per executed command.
pub fn render_svg(map: &EnvironmentMap, outcomes: &[CommandOutcome]) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in &map.corridors {
        x0 = x0.min(c.x_min);
        y0 = y0.min(c.y_min);
        x1 = x1.max(c.x_max);
        y1 = y1.max(c.y_max);
    }
    x0 -= PAD;
    y0 -= PAD;
    x1 += PAD;
    y1 += PAD;
    let px = |p: Point| ((p.x - x0) * SCALE, (y1 - p.y) * SCALE);
    let (w, h) = ((x1 - x0) * SCALE, (y1 - y0) * SCALE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g class="corridors">"#);
    for c in &map.corridors {
        let (ax, ay) = px(Point::new(c.x_min, c.y_max));
        let _ = writeln!(
            s,
            r##"<rect x="{ax:.1}" y="{ay:.1}" width="{:.1}" height="{:.1}" fill="#f3f3f3" stroke="#bbbbbb"><title>{}</title></rect>"##,
            (c.x_max - c.x_min) * SCALE,
            (c.y_max - c.y_min) * SCALE,
            escape(&c.name)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="walls">"#);
    for wall in &map.walls {
        let (ax, ay) = px(wall.a);
        let (bx, by) = px(wall.b);
        let _ = writeln!(
            s,
            r##"<line x1="{ax:.1}" y1="{ay:.1}" x2="{bx:.1}" y2="{by:.1}" stroke="#333333" stroke-width="3"/>"##
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="objects">"#);
    for o in &map.objects {
        let (cx, cy) = px(o.position);
        let _ = writeln!(
            s,
            r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="4" fill="#444444"/><text x="{:.1}" y="{:.1}" font-size="9">{}</text>"##,
            cx + 5.0,
            cy - 5.0,
            escape(&o.name)
        );
    }
    for ob in &map.dynamic_obstacles {
        let (cx, cy) = px(ob.center);
        let _ = writeln!(
            s,
            r##"<circle class="obstacle" cx="{cx:.1}" cy="{cy:.1}" r="{:.1}" fill="#e377c2" fill-opacity="0.5"/>"##,
            ob.radius * SCALE
        );
    }
    let _ = writeln!(s, "</g>");
    for (k, o) in outcomes.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(s, r#"<g class="command" data-index="{}">"#, k + 1);
        for path in &o.paths {
            let mut d = String::new();
            for (i, p) in path.waypoints.iter().enumerate() {
                let (x, y) = px(*p);
                let _ = write!(d, "{}{x:.1} {y:.1} ", if i == 0 { "M" } else { "L" });
                let _ = writeln!(s, r#"<circle class="waypoint" cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{color}"/>"#);
            }
            let _ = writeln!(
                s,
                r#"<path class="plan" d="{}" fill="none" stroke="{color}" stroke-dasharray="4 3" stroke-opacity="0.6"/>"#,
                d.trim_end()
            );
        }
        let points: Vec<String> = o
            .trajectory
            .iter()
            .map(|t| {
                let (x, y) = px(t.pose.position());
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="trajectory" points="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&o.command.raw_text)
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
