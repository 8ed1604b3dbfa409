"""Run one scenario and print the trajectory over the map as ASCII art.

Legend: '#' wall, '.' free, '*' visited cell, 'S' start, 'G' goal,
'!' collision cell. No plotting dependencies; pipe to a file if the map
is wider than the terminal.

Usage:
    python3 scripts/plot_run.py --scenario scenarios/turn.toml [--mode shared] [--seed 0]
"""

import argparse
import dataclasses
import sys

from sharenav.scenario import MODES, ScenarioInvalid, load_scenario
from sharenav.simulator import load_grid, run
from sharenav.world import world_to_cell


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", required=True)
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        scenario = load_scenario(args.scenario)
        if args.mode:
            scenario = dataclasses.replace(scenario, mode=args.mode)
        report, records = run(scenario, args.seed)
    except ScenarioInvalid as exc:
        print(f"plot_run: {exc}", file=sys.stderr)
        return 1

    grid = load_grid(scenario)
    canvas = [
        ["#" if grid.cells[r, c] else "." for c in range(grid.width)]
        for r in range(grid.height)
    ]
    for rec in records:
        col, row = world_to_cell(grid, (rec.state.x, rec.state.y))
        if grid.in_bounds(col, row):
            canvas[row][col] = "!" if rec.event == "collision" else "*"
    start_col, start_row = world_to_cell(grid, (scenario.start.x, scenario.start.y))
    goal_col, goal_row = world_to_cell(grid, scenario.goal)
    canvas[start_row][start_col] = "S"
    canvas[goal_row][goal_col] = "G"

    print("\n".join("".join(row) for row in canvas))
    print(
        f"\n{scenario.name} [{scenario.mode}] seed {args.seed}: "
        f"{'success' if report.success else 'no goal'}, "
        f"{report.collision_count} collisions, "
        f"{report.completion_time:.1f} s, "
        f"{report.trajectory_length:.2f} m, "
        f"angle sum {report.angle_diff_sum:.2f} rad, "
        f"user effort {report.user_effort}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
