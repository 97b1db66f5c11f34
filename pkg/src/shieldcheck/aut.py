"""Reading and writing the Aldebaran (``.aut``) textual LTS format.

::

    des (0, 2, 2)
    (0, "R !UP", 1)
    (1, "i", 0)

Only the label syntax used in this package is accepted: ``i`` for tau and
``GATE !UP`` / ``GATE !DOWN`` for visible events.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from shieldcheck.lts import TAU, Label, Lts, Voltage, normalize

__all__ = ["AutParseError", "parse_label", "read_aut", "write_aut", "load_aut", "save_aut"]

_HEADER = re.compile(r"^des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_LINE = re.compile(r'^\(\s*(\d+)\s*,\s*"([^"]*)"\s*,\s*(\d+)\s*\)\s*$')
_VISIBLE = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)\s*!\s*(UP|DOWN)$")


class AutParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_label(text: str) -> Label:
    """Parse ``i`` or ``GATE !VALUE``; raises ``ValueError`` otherwise."""
    text = text.strip()
    if text == "i":
        return TAU
    m = _VISIBLE.match(text)
    if not m or m.group(1) == "i":
        raise ValueError(f"unknown label syntax {text!r}")
    return Label(m.group(1), Voltage[m.group(2)])


def read_aut(text: str) -> Lts:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise AutParseError(1, "missing header")
    m = _HEADER.match(lines[0])
    if not m:
        raise AutParseError(1, f"malformed header {lines[0]!r}")
    initial, ntrans, nstates = (int(g) for g in m.groups())
    if nstates == 0 or initial >= nstates:
        raise AutParseError(1, "initial state outside the declared state count")
    body = lines[1:]
    if len(body) != ntrans:
        raise AutParseError(len(lines), f"header declares {ntrans} transitions, found {len(body)}")
    labels: dict[Label, int] = {}
    src = np.empty(ntrans, np.int64)
    lab = np.empty(ntrans, np.int32)
    dst = np.empty(ntrans, np.int64)
    for k, line in enumerate(body):
        lineno = k + 2
        m = _LINE.match(line)
        if not m:
            raise AutParseError(lineno, f"malformed transition {line!r}")
        s, t = int(m.group(1)), int(m.group(3))
        if s >= nstates or t >= nstates:
            raise AutParseError(lineno, f"state id exceeds declared count {nstates}")
        try:
            label = parse_label(m.group(2))
        except ValueError as exc:
            raise AutParseError(lineno, str(exc)) from None
        src[k], dst[k] = s, t
        lab[k] = labels.setdefault(label, len(labels))
    return Lts(nstates, initial, labels, src, lab, dst)


def write_aut(l: Lts) -> str:
    names = [f'"{s}"' for s in l.label_strings()]
    out = [f"des ({l.initial}, {l.num_transitions}, {l.num_states})"]
    out.extend(f"({s}, {names[a]}, {t})"
               for s, a, t in zip(l.src.tolist(), l.lab.tolist(), l.dst.tolist()))
    return "\n".join(out) + "\n"


def load_aut(path, *, canonical: bool = True) -> Lts:
    l = read_aut(Path(path).read_text(encoding="utf-8"))
    return normalize(l) if canonical else l


def save_aut(l: Lts, path) -> None:
    Path(path).write_text(write_aut(l), encoding="utf-8")
