"""``verify``: run scenarios and work with AUT files from the shell.

::

    verify run full.scn --out results/
    verify min --relation dsbb in.aut out.aut
    verify cmp --relation branching a.aut b.aut
    verify deadlock in.aut

Exit status: 0 on success, 1 when a check fails (or models differ, or a
deadlock exists), 2 on input errors.
"""
from __future__ import annotations

import argparse
import sys

from shieldcheck.aut import AutParseError, load_aut, save_aut
from shieldcheck.compose import DEFAULT_BUDGET
from shieldcheck.equiv import Relation, equivalent, minimize
from shieldcheck.lts import deadlock_states, divergent_states
from shieldcheck.scenario import ScenarioError, load_scenario, run_scenario

RELATIONS = ["strong", "branching", "dsbb"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a scenario script")
    r.add_argument("scenario")
    r.add_argument("--budget", type=lambda s: int(float(s)), default=DEFAULT_BUDGET,
                   help="maximum reachable states per generated model (default %(default)s)")
    r.add_argument("--out", default=None, help="directory for report.md, report.csv and exports")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for report rows")
    r.add_argument("-q", "--quiet", action="store_true")

    m = sub.add_parser("min", help="minimize an AUT file")
    m.add_argument("--relation", choices=RELATIONS, default="dsbb")
    m.add_argument("input")
    m.add_argument("output")

    c = sub.add_parser("cmp", help="compare two AUT files")
    c.add_argument("--relation", choices=RELATIONS, default="dsbb")
    c.add_argument("left")
    c.add_argument("right")

    d = sub.add_parser("deadlock", help="report deadlock and divergent states")
    d.add_argument("input")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            res = run_scenario(load_scenario(args.scenario), out_dir=args.out,
                               budget=args.budget, jobs=args.jobs)
            if not args.quiet:
                for line in res.log:
                    print(line)
                if res.rows:
                    print(res.markdown().split("## State spaces", 1)[1].strip())
            return res.exit_status
        if args.command == "min":
            l = minimize(load_aut(args.input), Relation.parse(args.relation))
            save_aut(l, args.output)
            print(f"{l.num_states} states, {l.num_transitions} transitions")
            return 0
        if args.command == "cmp":
            res = equivalent(load_aut(args.left), load_aut(args.right),
                             Relation.parse(args.relation))
            print("equivalent" if res else "different")
            if res.witness:
                print("witness: " + ", ".join(res.witness))
            return 0 if res else 1
        l = load_aut(args.input)
        dead = sorted(deadlock_states(l))
        div = divergent_states(l)
        print(f"deadlock states: {len(dead)}" + (f" (first: {dead[0]})" if dead else ""))
        print(f"divergent states: {len(div)}")
        return 1 if dead else 0
    except (ScenarioError, AutParseError, OSError) as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
