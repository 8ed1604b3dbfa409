"""Run the three-mode comparison over the shipped courses and print the table.

Aggregates manual / autonomous / shared runs per scenario across seeds, the
same numbers the acceptance gate checks, and writes the CSV report next to
the printed summary. Expect roughly a minute at the default 20 seeds.

Usage:
    python3 scripts/reproduce_comparison.py [--seeds N] [--out report.csv]
"""

import argparse
import sys
from pathlib import Path

from sharenav.scenario import load_scenario
from sharenav.simulator import REPORT_COLUMNS, batch, format_report

REPO = Path(__file__).resolve().parents[1]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenarios", default=str(REPO / "scenarios"),
                        help="directory of scenario TOML files")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--modes", default="manual,autonomous,shared")
    parser.add_argument("--out", default="comparison.csv")
    args = parser.parse_args(argv)

    paths = sorted(Path(args.scenarios).glob("*.toml"))
    if not paths:
        print(f"no scenario files in {args.scenarios}", file=sys.stderr)
        return 1
    scenarios = [load_scenario(p) for p in paths]
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]

    rows, failures = batch(scenarios, modes, range(args.seeds))
    for name, mode, message in failures:
        print(f"cell ({name}, {mode}) failed: {message}", file=sys.stderr)

    widths = [max(len(c), 14) for c in REPORT_COLUMNS]
    header = "  ".join(c.ljust(w) for c, w in zip(REPORT_COLUMNS, widths))
    print(header)
    print("-" * len(header))
    for row in rows:
        cells = []
        for col, w in zip(REPORT_COLUMNS, widths):
            value = row[col]
            text = f"{value:.4f}" if isinstance(value, float) else str(value)
            cells.append(text.ljust(w))
        print("  ".join(cells))

    Path(args.out).write_text(format_report(rows), encoding="utf-8")
    print(f"\nreport written to {args.out}")
    return 3 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
