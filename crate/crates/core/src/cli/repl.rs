use std::io::{self, BufRead, Write};

use crate::geometry::{Circle, Point};
use crate::metrics::RunMetrics;
use crate::navigator::Navigator;
use crate::planning::{parse_command, CommandError};
use crate::providers::WaypointProvider;

use super::summary_line;

fn parse_inject(rest: &str) -> Option<Circle> {
    let nums: Vec<f64> = rest.split_whitespace().map(str::parse).collect::<Result<_, _>>().ok()?;
    match nums[..] {
        [x, y, r] if r > 0.0 && x.is_finite() && y.is_finite() => Some(Circle::new(Point::new(x, y), r)),
        _ => None,
    }
}

/// Line-oriented session: a command runs to completion before the next
/// prompt. `inject x y r` adds an obstacle, `clear` removes them all,
/// `quit` ends the session.
pub fn repl<R: BufRead, W: Write>(
    input: R,
    out: &mut W,
    nav: &mut Navigator,
    provider: &mut dyn WaypointProvider,
) -> io::Result<()> {
    let mut from = "SP".to_string();
    let mut index = 0;
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line == "quit" || line == "exit" {
            break;
        } else if let Some(rest) = line.strip_prefix("inject") {
            match parse_inject(rest) {
                Some(c) => {
                    nav.inject(c);
                    writeln!(out, "obstacle at ({}, {}) radius {}", c.center.x, c.center.y, c.radius)?;
                }
                None => writeln!(out, "usage: inject <x> <y> <radius>")?,
            }
        } else if line == "clear" {
            nav.map.dynamic_obstacles.clear();
            writeln!(out, "obstacles cleared")?;
        } else if !line.is_empty() {
            match parse_command(line, &nav.map) {
                Ok(cmd) => {
                    let cmd = cmd.stamped(nav.clock().now());
                    let outcome = nav.run_command(&cmd, &from, provider, &[]);
                    let m = RunMetrics::from_log(index, &outcome.log, nav.config.safety.d_slowstop);
                    writeln!(out, "{}", summary_line(&m))?;
                    if let Some(report) = &outcome.report {
                        writeln!(out, "report: {report}")?;
                    }
                    from = cmd.target_name;
                    index += 1;
                }
                Err(e @ CommandError::UnknownTarget { .. }) => writeln!(out, "UnknownTarget: {e}")?,
                Err(e) => writeln!(out, "error: {e}")?,
            }
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(())
}
