use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Circle, Point};
use crate::world::{EnvironmentMap, TargetObject};

use super::PlannerConfig;

/// Slack on the spacing comparison so exact multiples survive rounding.
const SPACING_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    NotFinite,
    OutsideMargin,
    TooClose { distance: f64 },
    ObstacleClearance { clearance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub point: Point,
    #[serde(flatten)]
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationFailure {
    Empty,
    AllWaypointsInvalid,
    TargetUnreachable,
    ObstacleClearance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub failure: ValidationFailure,
    pub rejected: Vec<Rejection>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let headline = match self.failure {
            ValidationFailure::Empty => "the waypoint list is empty",
            ValidationFailure::AllWaypointsInvalid => "no waypoint satisfies the corridor safe margins",
            ValidationFailure::TargetUnreachable => "the final waypoint cannot reach the target within tolerance",
            ValidationFailure::ObstacleClearance => "waypoints come too close to the obstacle",
        };
        write!(f, "- {headline}")?;
        for r in &self.rejected {
            write!(f, "\n- waypoint {} ({}, {}): ", r.index, r.point.x, r.point.y)?;
            match &r.reason {
                RejectReason::NotFinite => write!(f, "coordinates are not finite")?,
                RejectReason::OutsideMargin => write!(f, "outside every corridor's safe margin")?,
                RejectReason::TooClose { distance } => {
                    write!(f, "only {distance:.3} m from the previous waypoint")?
                }
                RejectReason::ObstacleClearance { clearance } => {
                    write!(f, "only {clearance:.3} m from the obstacle edge")?
                }
            }
        }
        Ok(())
    }
}

/// Keep-out discs a path must clear by more than `min_clearance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearanceRule<'a> {
    pub obstacles: &'a [Circle],
    pub min_clearance: f64,
}

impl ClearanceRule<'_> {
    pub const NONE: ClearanceRule<'static> = ClearanceRule {
        obstacles: &[],
        min_clearance: 0.0,
    };

    pub fn clearance(&self, p: Point) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.clearance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn admits(&self, p: Point) -> bool {
        self.clearance(p) > self.min_clearance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedWaypoints {
    pub waypoints: Vec<Point>,
    /// Points dropped by the margin and spacing filters.
    pub discarded: Vec<Rejection>,
    /// The target was appended to close the tolerance gap.
    pub appended_target: bool,
}

/// Margin filter, spacing filter, final-point tolerance repair, then the
/// optional obstacle clearance check.
pub fn validate_waypoints(
    points: &[Point],
    map: &EnvironmentMap,
    target: &TargetObject,
    cfg: &PlannerConfig,
    rule: ClearanceRule<'_>,
) -> Result<ValidatedWaypoints, ValidationReport> {
    if points.is_empty() {
        return Err(ValidationReport {
            failure: ValidationFailure::Empty,
            rejected: vec![],
        });
    }
    let mut discarded = Vec::new();
    let mut inside = Vec::new();
    for (index, &p) in points.iter().enumerate() {
        if !p.is_finite() {
            discarded.push(Rejection {
                index,
                point: p,
                reason: RejectReason::NotFinite,
            });
        } else if !map.within_margin(p) {
            discarded.push(Rejection {
                index,
                point: p,
                reason: RejectReason::OutsideMargin,
            });
        } else {
            inside.push((index, p));
        }
    }
    if inside.is_empty() {
        return Err(ValidationReport {
            failure: ValidationFailure::AllWaypointsInvalid,
            rejected: discarded,
        });
    }

    let last = inside.len() - 1;
    let mut kept: Vec<Point> = Vec::with_capacity(inside.len());
    for (k, &(index, p)) in inside.iter().enumerate() {
        if let Some(&prev) = kept.last() {
            let d = prev.distance(p);
            if k != last && d < cfg.min_spacing - SPACING_EPS {
                discarded.push(Rejection {
                    index,
                    point: p,
                    reason: RejectReason::TooClose { distance: d },
                });
                continue;
            }
        }
        kept.push(p);
    }

    let mut appended_target = false;
    let final_point = *kept.last().expect("at least one survivor");
    if final_point.distance(target.position) > cfg.tolerance {
        if !map.within_margin(target.position) {
            return Err(ValidationReport {
                failure: ValidationFailure::TargetUnreachable,
                rejected: discarded,
            });
        }
        // the old final point loses its exemption from the spacing rule
        if kept.len() >= 2 {
            let n = kept.len();
            if kept[n - 2].distance(kept[n - 1]) < cfg.min_spacing - SPACING_EPS {
                kept.pop();
            }
        }
        kept.push(target.position);
        appended_target = true;
    }

    if !rule.obstacles.is_empty() {
        let blocked: Vec<Rejection> = kept
            .iter()
            .enumerate()
            .filter(|(_, p)| !rule.admits(**p))
            .map(|(index, &point)| Rejection {
                index,
                point,
                reason: RejectReason::ObstacleClearance {
                    clearance: rule.clearance(point),
                },
            })
            .collect();
        if !blocked.is_empty() {
            return Err(ValidationReport {
                failure: ValidationFailure::ObstacleClearance,
                rejected: blocked,
            });
        }
    }

    Ok(ValidatedWaypoints {
        waypoints: kept,
        discarded,
        appended_target,
    })
}
