"""Builds the extension, imports it and exercises the main entry points."""

import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    subprocess.run(["cargo", "build", "-p", "corridor-nav-py"], cwd=ROOT, check=True)
    built = os.path.join(ROOT, "target", "debug", "libcorridor_nav_py.so")
    dest = tempfile.mkdtemp()
    shutil.copy(built, os.path.join(dest, "corridor_nav_py.so"))
    sys.path.insert(0, dest)
    import corridor_nav_py

    return corridor_nav_py


def main():
    nav = load_module()

    env = nav.Environment("env_a")
    assert env.name == "env_a", env.name
    assert env.start_pose[:2] == (0.0, 0.0)
    names = [name for name, _, _ in env.objects()]
    assert "Window" in names, names

    target, x, y = nav.parse_command("go to Room Number 101", env)
    assert target == "Room-number-plate-101", target
    try:
        nav.parse_command("go to Room Number 999", env)
    except ValueError as e:
        assert "999" in str(e)
    else:
        raise AssertionError("unknown target accepted")

    pts = nav.parse_waypoints('Sure: [{"x": 1.0, "y": 0.0}, {"x": 2.5, "y": 0.1}]')
    assert pts == [(1.0, 0.0), (2.5, 0.1)], pts

    plan = nav.oracle_plan(env, (0.0, 0.0), "Window")
    assert math.dist(plan[-1], (13.45, 0.0)) < 0.05, plan
    assert nav.validate_waypoints(plan, env, "Window")[-1] == plan[-1]

    assert nav.map_to_odom((1.0, 0.0), (0.0, 0.0, math.pi / 2)) != (1.0, 0.0)
    assert abs(abs(nav.normalize_angle(3 * math.pi)) - math.pi) < 1e-9

    v, w, reached = nav.control_step((0.0, 0.0, 0.0), (10.0, 0.0))
    assert (v, w, reached) == (0.4, 0.0, False), (v, w, reached)

    ranges, bearings = env.scan(env.start_pose)
    assert len(ranges) == 360
    assert nav.assess([0.3], [0.0])[0] == "emergency"
    assert nav.assess([0.45], [0.0])[0] == "slow_stop"
    assert nav.assess([0.6], [0.0]) == ("clear", None)

    assert abs(nav.wgsr(2, 3) - 200 / 3) < 1e-9
    assert nav.wgsr(0, 0) is None
    assert nav.path_length([(0, 0), (3, 4)]) == 5.0

    rows = nav.run_scenario("env_a_tour")
    assert len(rows) == 5, rows
    assert all(r["outcome"]["state"] == "completed" for r in rows), [r["outcome"] for r in rows]
    print("window run: %.2f m" % rows[0]["path_length"])
    print("smoke test passed")


if __name__ == "__main__":
    main()
