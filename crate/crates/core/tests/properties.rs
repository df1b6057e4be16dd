use std::f64::consts::PI;

use proptest::prelude::*;

use corridor_nav::control::{
    angular_error, control_step, map_to_odom, normalize_angle, odom_to_map, ControllerConfig, FramedPoint, Pose,
};
use corridor_nav::geometry::{polyline_length, Point};
use corridor_nav::metrics::{collision_events, path_length, wgsr};
use corridor_nav::navigator::{NavConfig, NavState, Navigator, ObstacleInjection, Placement};
use corridor_nav::planning::{
    oracle_plan, parse_command, parse_waypoints, validate_waypoints, waypoints_to_json, ClearanceRule, PlannerConfig,
    PromptTemplates,
};
use corridor_nav::providers::OracleProvider;
use corridor_nav::safety::{assess, record_attempt, should_replan, Assessment, ReplanLedger, SafetyConfig};
use corridor_nav::world::{builtin_environment, ScanData};

const ENVS: [&str; 3] = ["env_a", "env_b", "env_c"];

fn severity(a: Assessment) -> u8 {
    match a {
        Assessment::Clear => 0,
        Assessment::SlowStop { .. } => 1,
        Assessment::Emergency { .. } => 2,
    }
}

fn one_beam(range: f64) -> ScanData {
    ScanData {
        ranges: vec![range],
        bearings: vec![0.0],
        stamp: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn accepted_waypoints_respect_margin_spacing_and_tolerance(
        env in 0usize..3,
        target_pick in any::<prop::sample::Index>(),
        raw in prop::collection::vec((-2.0f64..16.0, -2.0f64..16.0), 1..12),
    ) {
        let map = builtin_environment(ENVS[env]).unwrap();
        let cfg = PlannerConfig::default();
        let target = &map.objects[target_pick.index(map.objects.len())];
        let pts: Vec<Point> = raw.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        if let Ok(v) = validate_waypoints(&pts, &map, target, &cfg, ClearanceRule::NONE) {
            prop_assert!(v.waypoints.iter().all(|p| map.within_margin(*p)));
            let n = v.waypoints.len();
            for w in v.waypoints[..n - 1].windows(2) {
                prop_assert!(w[0].distance(w[1]) >= cfg.min_spacing - 1e-9);
            }
            prop_assert!(v.waypoints[n - 1].distance(target.position) <= cfg.tolerance);
        }
    }

    #[test]
    fn oracle_plans_pass_validation(env in 0usize..3, a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let map = builtin_environment(ENVS[env]).unwrap();
        let cfg = PlannerConfig::default();
        let from = &map.objects[a.index(map.objects.len())];
        let to = &map.objects[b.index(map.objects.len())];
        let plan = oracle_plan(&map, from.position, to, &cfg).unwrap();
        let v = validate_waypoints(&plan, &map, to, &cfg, ClearanceRule::NONE).unwrap();
        prop_assert!(!v.appended_target);
        prop_assert_eq!(v.waypoints, plan);
    }

    #[test]
    fn normalized_angles_stay_in_range(theta in -1e4f64..1e4) {
        let a = normalize_angle(theta);
        prop_assert!((-PI..=PI).contains(&a));
        let turns = (theta - a) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-6);
    }

    #[test]
    fn angular_error_is_wrapped(x in -20.0f64..20.0, y in -20.0f64..20.0, th in -10.0f64..10.0, tx in -20.0f64..20.0, ty in -20.0f64..20.0) {
        prop_assume!(Point::new(x, y).distance(Point::new(tx, ty)) > 1e-6);
        let a = angular_error(&Pose::new(x, y, th), Point::new(tx, ty)).unwrap();
        prop_assert!((-PI..=PI).contains(&a));
    }

    #[test]
    fn frame_transforms_invert(x in -50.0f64..50.0, y in -50.0f64..50.0, tx in -10.0f64..10.0, ty in -10.0f64..10.0, th in -PI..PI) {
        let t = Pose::new(tx, ty, th);
        let odom = map_to_odom(FramedPoint::map(x, y), &t).unwrap();
        let back = odom_to_map(odom, &t).unwrap();
        prop_assert!((back.x - x).abs() < 1e-9 && (back.y - y).abs() < 1e-9);
        let r0 = Point::new(x, y).norm();
        let r1 = Point::new(odom.x - tx, odom.y - ty).norm();
        prop_assert!((r0 - r1).abs() < 1e-9);
        prop_assert!(map_to_odom(odom, &t).is_err());
    }

    #[test]
    fn controller_output_is_clamped(x in -20.0f64..20.0, y in -20.0f64..20.0, th in -10.0f64..10.0, tx in -20.0f64..20.0, ty in -20.0f64..20.0) {
        let cfg = ControllerConfig::default();
        let out = control_step(&Pose::new(x, y, th), Point::new(tx, ty), &cfg);
        prop_assert!(out.command.linear >= 0.0 && out.command.linear <= cfg.max_linear);
        prop_assert!(out.command.angular.abs() <= cfg.max_angular);
        if out.alpha.abs() > cfg.turn_gate() {
            prop_assert_eq!(out.command.linear, 0.0);
        }
        if out.reached {
            prop_assert!(out.command.is_zero());
        }
    }

    #[test]
    fn closer_returns_never_lower_severity(r in 0.01f64..5.0, shrink in 0.0f64..1.0) {
        let cfg = SafetyConfig::default();
        let far = severity(assess(&one_beam(r), &cfg));
        let near = severity(assess(&one_beam(r * shrink), &cfg));
        prop_assert!(near >= far);
    }

    #[test]
    fn replan_gate_holds_budget_and_cooldown(times in prop::collection::vec(0.0f64..2.0, 1..30)) {
        let cfg = SafetyConfig::default();
        let mut ledger = ReplanLedger::default();
        let mut now = 0.0;
        let mut granted = vec![];
        for dt in times {
            now += dt;
            if should_replan(&ledger, now, &cfg) {
                ledger = record_attempt(&ledger, now, &cfg);
                granted.push(now);
            }
        }
        prop_assert!(ledger.attempts <= cfg.max_replans);
        prop_assert!(granted.windows(2).all(|w| w[1] - w[0] > cfg.cooldown));
        if ledger.attempts == cfg.max_replans {
            prop_assert!(!should_replan(&ledger, now + 1e6, &cfg));
        }
    }

    #[test]
    fn debounced_events_never_exceed_raw_ticks(ranges in prop::collection::vec(0.0f64..2.0, 0..200)) {
        let d = 0.5;
        let raw = ranges.iter().filter(|r| **r < d).count() as u32;
        let events = collision_events(&ranges, d);
        prop_assert!(events <= raw);
        prop_assert_eq!(events == 0, raw == 0);
    }

    #[test]
    fn success_rate_is_a_percentage(attempts in 0u32..1000, frac in 0.0f64..=1.0) {
        let successes = (attempts as f64 * frac).floor() as u32;
        match wgsr(successes, attempts) {
            None => prop_assert_eq!(attempts, 0),
            Some(r) => prop_assert!((0.0..=100.0).contains(&r)),
        }
    }

    #[test]
    fn path_length_matches_polyline(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 0..20)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let l = path_length(&pts);
        prop_assert!(l >= 0.0);
        prop_assert!((l - polyline_length(&pts)).abs() < 1e-9);
        if let (Some(a), Some(b)) = (pts.first(), pts.last()) {
            prop_assert!(l + 1e-9 >= a.distance(*b));
        }
    }

    #[test]
    fn parser_never_panics(text in ".{0,200}") {
        let _ = parse_waypoints(&text);
    }

    #[test]
    fn serialized_waypoints_parse_back(pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..10)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        prop_assert_eq!(parse_waypoints(&waypoints_to_json(&pts)).unwrap(), pts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn state_traces_follow_the_transition_table(ahead in 0.6f64..3.0, at in 0.5f64..20.0, env in 0usize..3) {
        let map = builtin_environment(ENVS[env]).unwrap();
        let target = map.objects.last().unwrap().name.clone();
        let cmd = parse_command(&format!("go to {target}"), &map).unwrap();
        let inject = ObstacleInjection {
            command: 0,
            at,
            radius: 0.3,
            place: Placement::Ahead { ahead },
            remove_at: None,
        };
        let mut nav = Navigator::new(map, NavConfig::default(), PromptTemplates::default(), Box::new(corridor_nav::clock::FrozenClock));
        let outcome = nav.run_command(&cmd, "SP", &mut OracleProvider, &[inject]);
        let trace = outcome.state_trace();
        prop_assert_eq!(trace.first(), Some(&NavState::Idle));
        prop_assert!(trace.last().unwrap().is_terminal());
        for w in trace.windows(2) {
            prop_assert!(w[0].can_become(&w[1]), "{} -> {}", w[0], w[1]);
        }
    }
}
