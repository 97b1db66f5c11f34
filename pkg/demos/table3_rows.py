"""State spaces of gate-level sequencers, one row per gate style and fork code.

By default only the RV rows are computed (a few seconds). Pass styles and
fork codes to see more, e.g.

    python3 demos/table3_rows.py TRANSITION,FREE RV,III,IIP
    python3 demos/table3_rows.py ALL ALL --two-max 2e7

The full table takes several minutes; two-sequencer products above
``--two-max`` states are left blank.
"""
import argparse
import time

from shieldcheck.circuit import FORK_CODES, GateStyle
from shieldcheck.report import STYLE_ORDER, compute_row, emit_report

ap = argparse.ArgumentParser()
ap.add_argument("styles", nargs="?", default="ALL")
ap.add_argument("forks", nargs="?", default="RV")
ap.add_argument("--two-max", type=float, default=2e7)
args = ap.parse_args()

styles = STYLE_ORDER if args.styles == "ALL" else [GateStyle(s) for s in args.styles.split(",")]
forks = FORK_CODES if args.forks == "ALL" else args.forks.split(",")

rows = []
for style in styles:
    for code in forks:
        t0 = time.perf_counter()
        rows.append(compute_row(style, code, two_max=int(args.two_max)))
        print(f"{style.value}/{code}: {time.perf_counter() - t0:.1f}s", flush=True)

md, _ = emit_report(rows)
print()
print(md)
