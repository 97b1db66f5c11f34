"""State-space tables for gate-level sequencer models.

For every gate style and fork code a row gathers three measurements:

* ``one``: one sequencer, all gates except the four handshake gates
  hidden, minimized for divergence-sensitive branching bisimulation;
* ``stub``: that sequencer closed by its two environment stubs, minimized
  the same way; ``lock`` tells whether the divergence-blind quotient has a
  deadlock (divergence could otherwise hide one);
* ``two``: two minimized sequencers chained with ``pipe``, counted as
  generated (transition instances, no minimization); ``lock`` is a plain
  deadlock in that product.
"""
from __future__ import annotations

import csv
import functools
import io
from dataclasses import dataclass, field

from shieldcheck.circuit import (FORK_CODES, GateStyle, SequencerConfig,
                                 build_stubbed_sequencer, protocol_lts, sequencer_lts)
from shieldcheck.compose import (DEFAULT_BUDGET, BudgetExceeded, pipe_network,
                                 product_stats)
from shieldcheck.equiv import Relation, equivalent, minimize
from shieldcheck.lts import Lts, deadlock_states

__all__ = [
    "STYLE_ORDER",
    "COLUMNS",
    "ReportRow",
    "one_sequencer",
    "compute_row",
    "emit_report",
    "CSV_HEADER",
]

STYLE_ORDER = (GateStyle.INTUITIVE, GateStyle.STATE, GateStyle.PARALLEL, GateStyle.FREE,
               GateStyle.TRANSITION)
COLUMNS = ("one", "stub", "two")
CSV_HEADER = ["model", "forks", "one_states", "one_transitions", "stub_states",
              "stub_transitions", "stub_lock", "two_states", "two_transitions", "two_lock"]


@dataclass
class ReportRow:
    model: GateStyle
    forks: str
    one: tuple[int, int] | None = None
    stub: tuple[int, int] | None = None
    stub_lock: bool | None = None
    stub_matches_protocol: bool | None = None
    two: tuple[int, int] | None = None
    two_lock: bool | None = None
    notes: list[str] = field(default_factory=list)

    def sort_key(self):
        return STYLE_ORDER.index(self.model), FORK_CODES.index(self.forks)

    def cells(self) -> list[str]:
        def num(x, i):
            return "-" if x is None else str(x[i])

        def flag(b):
            return "-" if b is None else ("yes" if b else "no")

        return [self.model.value, self.forks, num(self.one, 0), num(self.one, 1),
                num(self.stub, 0), num(self.stub, 1), flag(self.stub_lock),
                num(self.two, 0), num(self.two, 1), flag(self.two_lock)]


@functools.lru_cache(maxsize=8)
def one_sequencer(cfg: SequencerConfig, budget: int = DEFAULT_BUDGET) -> Lts:
    """Cached DSBB-minimized sequencer with only the handshake gates visible."""
    return sequencer_lts(cfg, Relation.DSBB, budget=budget)


def compute_row(style: GateStyle, forks: str, columns=COLUMNS, *,
                two_max: int = DEFAULT_BUDGET, budget: int = DEFAULT_BUDGET) -> ReportRow:
    """Measure one table row.

    A two-sequencer product growing past ``two_max`` states is abandoned and
    left blank; exceeding ``budget`` anywhere raises :class:`BudgetExceeded`.
    """
    cfg = SequencerConfig.from_code(style, forks)
    row = ReportRow(cfg.style, cfg.fork_code)
    m = one_sequencer(cfg, budget)
    if "one" in columns:
        row.one = (m.num_states, m.num_transitions)
    if "stub" in columns:
        closed = build_stubbed_sequencer(cfg, seq=m, budget=budget)
        d = minimize(closed, Relation.DSBB)
        b = minimize(closed, Relation.BRANCHING)
        row.stub = (d.num_states, d.num_transitions)
        row.stub_lock = bool(deadlock_states(b))
        row.stub_matches_protocol = bool(equivalent(b, protocol_lts(), Relation.BRANCHING))
    if "two" in columns:
        try:
            st = product_stats(pipe_network(m, m), budget=min(two_max, budget),
                               what=f"two sequencers {cfg}")
            row.two = (st.states, st.transitions)
            row.two_lock = st.has_deadlock
        except BudgetExceeded as exc:
            if two_max >= budget:
                raise
            # a deliberate size cap, rendered as a blank cell
            row.notes.append(str(exc))
    return row


def emit_report(rows) -> tuple[str, str]:
    """Markdown table and CSV text, rows sorted by style then fork code."""
    rows = sorted(rows, key=ReportRow.sort_key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells())
    md = ["| model | forks | one seq. | stub | stub lock | two seq. | two-seq. lock |",
          "|---|---|---|---|---|---|---|"]
    for r in rows:
        c = r.cells()

        def pair(a, b):
            return "-" if a == "-" else f"{a} / {b}"

        md.append(f"| {c[0]} | {c[1]} | {pair(c[2], c[3])} | {pair(c[4], c[5])} | {c[6]} "
                  f"| {pair(c[7], c[8])} | {c[9]} |")
    return "\n".join(md) + "\n", buf.getvalue()
