//! Deterministic geometric planner.
//!
//! Routes through junction centroids found by breadth-first search over the
//! corridor adjacency graph, sidesteps known obstacle discs with two corner
//! points, and samples every leg at the configured spacing.

use std::collections::VecDeque;

use crate::geometry::{Point, Segment};
use crate::world::{Corridor, EnvironmentMap, TargetObject};

use super::validate::ClearanceRule;
use super::{PlannerConfig, PlanningError};

/// Extra distance kept between a detour corner and the keep-out disc.
const DETOUR_BUFFER: f64 = 0.15;
const MAX_DETOUR_DEPTH: usize = 8;
const EPS: f64 = 1e-9;

/// Corridors (declaration order) whose margin interior holds `p`, falling
/// back to the nearest corridor when `p` drifted outside every margin.
fn corridors_holding(map: &EnvironmentMap, p: Point) -> Vec<usize> {
    let inside: Vec<usize> = map
        .corridors
        .iter()
        .enumerate()
        .filter(|(_, c)| c.contains_with_margin(p, map.safe_margin))
        .map(|(i, _)| i)
        .collect();
    if !inside.is_empty() {
        return inside;
    }
    let nearest = map
        .corridors
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.clamp_into(p, map.safe_margin).distance(p)))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        });
    nearest.map(|(i, _)| vec![i]).unwrap_or_default()
}

/// Corridor sequence and the junctions crossed between consecutive entries.
pub fn corridor_route(
    map: &EnvironmentMap,
    sources: &[usize],
    goal: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let adj = map.adjacency();
    let n = map.corridors.len();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(c) = queue.pop_front() {
        if c == goal {
            let mut corridors = vec![c];
            let mut junctions = Vec::new();
            let mut cur = c;
            while let Some((p, j)) = prev[cur] {
                corridors.push(p);
                junctions.push(j);
                cur = p;
            }
            corridors.reverse();
            junctions.reverse();
            return Some((corridors, junctions));
        }
        for &(next, j) in &adj[c] {
            if !seen[next] {
                seen[next] = true;
                prev[next] = Some((c, j));
                queue.push_back(next);
            }
        }
    }
    None
}

fn perp_left(u: Point) -> Point {
    Point::new(-u.y, u.x)
}

/// Corner points that carry the segment `a -> b` around every keep-out disc.
fn detour(
    a: Point,
    b: Point,
    corridor: &Corridor,
    margin: f64,
    rule: ClearanceRule<'_>,
    depth: usize,
) -> Result<Vec<Point>, PlanningError> {
    let seg = Segment::new(a, b);
    let len = seg.length();
    if len < EPS {
        return Ok(vec![]);
    }
    let u = (b - a).scale(1.0 / len);
    // a disc blocks when the segment dips into its keep-out ring closer than
    // either endpoint already is; leaving a ring the robot stopped inside is fine
    let blocking = rule
        .obstacles
        .iter()
        .filter(|o| {
            let keep_out = o.radius + rule.min_clearance;
            let approach = seg.distance_to_point(o.center);
            approach < keep_out - EPS
                && approach < o.center.distance(a) - EPS
                && approach < o.center.distance(b) - EPS
        })
        .min_by(|p, q| {
            let tp = (p.center - a).dot(u);
            let tq = (q.center - a).dot(u);
            tp.total_cmp(&tq)
        });
    let Some(obstacle) = blocking else {
        return Ok(vec![]);
    };
    if depth >= MAX_DETOUR_DEPTH {
        return Err(PlanningError::TargetUnreachable(
            "obstacles leave no detour".into(),
        ));
    }
    let offset = obstacle.radius + rule.min_clearance + DETOUR_BUFFER;
    let n = perp_left(u);
    let mut best: Option<(f64, Vec<Point>)> = None;
    for side in [1.0, -1.0] {
        let p1 = obstacle.center - u.scale(offset) + n.scale(side * offset);
        let p2 = obstacle.center + u.scale(offset) + n.scale(side * offset);
        if !corridor.contains_with_margin(p1, margin) || !corridor.contains_with_margin(p2, margin) {
            continue;
        }
        let Ok(first) = detour(a, p1, corridor, margin, rule, depth + 1) else {
            continue;
        };
        let Ok(middle) = detour(p1, p2, corridor, margin, rule, depth + 1) else {
            continue;
        };
        let Ok(last) = detour(p2, b, corridor, margin, rule, depth + 1) else {
            continue;
        };
        let mut corners = first;
        corners.push(p1);
        corners.extend(middle);
        corners.push(p2);
        corners.extend(last);
        let mut chain = vec![a];
        chain.extend(&corners);
        chain.push(b);
        let length = crate::geometry::polyline_length(&chain);
        if best.as_ref().is_none_or(|(l, _)| length < *l - EPS) {
            best = Some((length, corners));
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| {
        PlanningError::TargetUnreachable(format!(
            "no side of the obstacle at ({}, {}) is clear",
            obstacle.center.x, obstacle.center.y
        ))
    })
}

/// Samples `from -> to` every `spacing` meters, ending exactly at `to`.
///
/// On an intermediate leg the last sample is dropped when it would sit
/// closer than `spacing` to `to`.
fn sample_leg(from: Point, to: Point, spacing: f64, is_final: bool, out: &mut Vec<Point>) {
    let len = from.distance(to);
    if len < EPS {
        return;
    }
    let mut samples = Vec::new();
    let mut k = 1.0;
    while k * spacing < len - EPS {
        samples.push(from.lerp(to, k * spacing / len));
        k += 1.0;
    }
    if !is_final {
        if let Some(&last) = samples.last() {
            if last.distance(to) < spacing - EPS {
                samples.pop();
            }
        }
    }
    out.extend(samples);
    out.push(to);
}

/// Deterministic plan from `start` to `target`, avoiding `rule.obstacles`.
pub fn oracle_plan_avoiding(
    map: &EnvironmentMap,
    start: Point,
    target: &TargetObject,
    cfg: &PlannerConfig,
    rule: ClearanceRule<'_>,
) -> Result<Vec<Point>, PlanningError> {
    let goal = map.corridor_index(&target.corridor).ok_or_else(|| {
        PlanningError::TargetUnreachable(format!("unknown corridor `{}`", target.corridor))
    })?;
    if start.distance(target.position) <= cfg.tolerance {
        return Ok(vec![target.position]);
    }
    let sources = corridors_holding(map, start);
    let Some(&first) = sources.first() else {
        return Err(PlanningError::TargetUnreachable("map has no corridors".into()));
    };
    let sources = if sources.contains(&goal) { vec![goal] } else { sources };
    let (route, junctions) = corridor_route(map, &sources, goal).ok_or_else(|| {
        PlanningError::TargetUnreachable(format!(
            "no junction path from `{}` to `{}`",
            map.corridors[first].name, target.corridor
        ))
    })?;
    let start = map.corridors[route[0]].clamp_into(start, map.safe_margin);

    // anchors[i] -> anchors[i + 1] lies inside corridor route[i]
    let mut anchors = vec![start];
    anchors.extend(junctions.iter().map(|&j| map.junctions[j].position));
    anchors.push(target.position);

    let mut corners = vec![start];
    let mut leg_corridor = Vec::new();
    for (i, pair) in anchors.windows(2).enumerate() {
        let corridor = &map.corridors[route[i]];
        let extra = detour(pair[0], pair[1], corridor, map.safe_margin, rule, 0)?;
        for p in extra {
            corners.push(p);
            leg_corridor.push(route[i]);
        }
        corners.push(pair[1]);
        leg_corridor.push(route[i]);
    }

    let mut points = Vec::new();
    let last_leg = corners.len() - 2;
    for (i, pair) in corners.windows(2).enumerate() {
        let before = points.len();
        sample_leg(pair[0], pair[1], cfg.min_spacing, i == last_leg, &mut points);
        let corridor = &map.corridors[leg_corridor[i]];
        for p in &mut points[before..] {
            *p = corridor.clamp_into(*p, map.safe_margin);
        }
    }
    // samples near an unavoidable disc (the robot stopped inside the keep-out
    // ring) are dropped; corners never are
    if !rule.obstacles.is_empty() {
        let keep: Vec<bool> = points
            .iter()
            .map(|p| rule.admits(*p) || corners.contains(p))
            .collect();
        let mut it = keep.iter();
        points.retain(|_| *it.next().unwrap());
    }
    compact(map, &mut points, cfg.min_spacing);
    Ok(points)
}

/// Drops non-final points closer than `spacing` to their predecessor when
/// the shortcut stays inside one corridor's margin interior.
fn compact(map: &EnvironmentMap, points: &mut Vec<Point>, spacing: f64) {
    let mut i = 1;
    while i + 1 < points.len() {
        if points[i - 1].distance(points[i]) < spacing - EPS {
            let (p, q) = (points[i - 1], points[i + 1]);
            let shortcut = map
                .corridors
                .iter()
                .any(|c| c.contains_with_margin(p, map.safe_margin) && c.contains_with_margin(q, map.safe_margin));
            if shortcut {
                points.remove(i);
                continue;
            }
        }
        i += 1;
    }
}

/// Obstacle-free plan from the robot position to `target`.
pub fn oracle_plan(
    map: &EnvironmentMap,
    start: Point,
    target: &TargetObject,
    cfg: &PlannerConfig,
) -> Result<Vec<Point>, PlanningError> {
    oracle_plan_avoiding(map, start, target, cfg, ClearanceRule::NONE)
}
