"""Scenario scripts: build models, transform them, check them, tabulate them.

A scenario is a sequence of lines. ``#`` starts a comment. Statements
either define a model (``NAME = verb ...``) or act on existing ones::

    P = protocol
    S = sequencer style=INTUITIVE forks=RV
    H = hide S except=R_PRED,A_PRED,R_SUCC,A_SUCC
    M = minimize H relation=dsbb
    Q = pipe P P
    check equivalent Q P relation=dsbb
    attack short a=R1 b=A2 policy=nondet expect=detected
    report table3 styles=INTUITIVE forks=RV,III

The full grammar is in ``docs/scenario.md``.
"""
from __future__ import annotations

import shlex
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from shieldcheck import attacks as atk
from shieldcheck.aut import load_aut, save_aut
from shieldcheck.circuit import (FORK_CODES, GateStyle, SequencerConfig, build_sequencer,
                                 build_shield, build_stubbed_sequencer, protocol_lts)
from shieldcheck.compose import (DEFAULT_BUDGET, BudgetExceeded, Network, SyncVector,
                                 gateset_par, hide, hide_except, pipe, pipe_nohide, product,
                                 rename)
from shieldcheck.equiv import Relation, equivalent, minimize, weak_trace_includes
from shieldcheck.lts import Lts, Voltage, deadlock_states, divergent_states
from shieldcheck.report import COLUMNS, STYLE_ORDER, ReportRow, compute_row, emit_report

__all__ = [
    "ScenarioError",
    "Statement",
    "Scenario",
    "RunResult",
    "parse_scenario",
    "load_scenario",
    "run_scenario",
    "report_configs",
]


class ScenarioError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Statement:
    line: int
    verb: str
    target: str | None
    args: tuple[str, ...]
    options: tuple[tuple[str, str], ...] = ()
    block: tuple[str, ...] = ()

    def opt(self, key: str, default=None):
        return dict(self.options).get(key, default)


@dataclass
class Scenario:
    statements: list[Statement]
    base_dir: Path = field(default_factory=Path.cwd)


# verb -> (allowed options, number of model references among leading args or None)
_MODEL_VERBS = {
    "protocol": ({"budget"}, 0),
    "load": ({"budget"}, 0),
    "sequencer": ({"style", "forks", "x1", "x2", "init_c", "budget"}, 0),
    "stubbed": ({"style", "forks", "x1", "x2", "init_c", "budget"}, 0),
    "shield": ({"n", "budget"}, 1),
    "pipe": ({"budget"}, 2),
    "pipe_nohide": ({"budget", "left", "right"}, 2),
    "par": ({"budget"}, None),
    "vectors": ({"budget"}, None),
    "hide": ({"gates", "except", "budget"}, 1),
    "rename": ({"budget"}, 1),
    "minimize": ({"relation", "budget"}, 1),
    "attack": ({"wire", "value", "variant", "a", "b", "policy", "on", "budget"}, 0),
}
_ACTION_VERBS = {
    "check": {"relation", "expect", "states", "transitions"},
    "attack": {"wire", "value", "variant", "a", "b", "policy", "on", "expect", "budget"},
    "report": {"styles", "forks", "columns", "two_max", "budget"},
    "export": set(),
    "show": set(),
}
_CHECKS = {"equivalent": 2, "includes": 2, "deadlock": 1, "divergence": 1, "size": 1}


def _col(text: str, token: str) -> int:
    i = text.find(token)
    return i + 1 if i >= 0 else 1


def _split(text: str, lineno: int) -> list[str]:
    try:
        lex = shlex.shlex(text, posix=True, punctuation_chars=False)
        lex.whitespace_split = True
        lex.commenters = "#"
        return list(lex)
    except ValueError as exc:
        raise ScenarioError(lineno, 1, str(exc)) from None


def _ref_name(token: str) -> str:
    return token.split("[", 1)[0]


def parse_scenario(text: str, base_dir=None) -> Scenario:
    """Parse and statically check a scenario (names defined before use, no duplicates)."""
    lines = text.splitlines()
    statements: list[Statement] = []
    defined: set[str] = set()
    i = 0
    while i < len(lines):
        raw = lines[i]
        lineno = i + 1
        i += 1
        tokens = _split(raw, lineno)
        if not tokens:
            continue
        target = None
        if len(tokens) >= 2 and tokens[1] == "=":
            target = tokens[0]
            if not target.isidentifier():
                raise ScenarioError(lineno, _col(raw, target), f"bad model name {target!r}")
            tokens = tokens[2:]
            if not tokens:
                raise ScenarioError(lineno, len(raw) + 1, "missing verb after '='")
        verb, rest = tokens[0], tokens[1:]
        args, options = [], []
        for tok in rest:
            if "=" in tok and "->" not in tok and not tok.startswith(("'", '"')):
                k, v = tok.split("=", 1)
                options.append((k, v))
            else:
                args.append(tok)
        allowed = (_MODEL_VERBS.get(verb, (None, None))[0] if target
                   else _ACTION_VERBS.get(verb))
        if allowed is None:
            what = "model-defining verb" if target else "statement"
            raise ScenarioError(lineno, _col(raw, verb), f"unknown {what} {verb!r}")
        for k, _ in options:
            if k not in allowed:
                raise ScenarioError(lineno, _col(raw, k + "="), f"unknown option {k!r} for {verb}")
        block: list[str] = []
        if verb == "vectors":
            while i < len(lines) and lines[i].strip() != "end":
                body = lines[i].split("#", 1)[0].strip()
                if body:
                    try:
                        SyncVector.parse(body.rstrip(","))
                    except ValueError as exc:
                        raise ScenarioError(i + 1, 1, str(exc)) from None
                    block.append(body.rstrip(","))
                i += 1
            if i >= len(lines):
                raise ScenarioError(lineno, 1, "vectors block without 'end'")
            i += 1
        st = Statement(lineno, verb, target, tuple(args), tuple(options), tuple(block))
        refs = _references(st, raw)
        for name in refs:
            if name not in defined:
                raise ScenarioError(lineno, _col(raw, name), f"undefined model {name!r}")
        if target:
            if target in defined:
                raise ScenarioError(lineno, _col(raw, target), f"duplicate model name {target!r}")
            defined.add(target)
        statements.append(st)
    return Scenario(statements, Path(base_dir) if base_dir else Path.cwd())


def _references(st: Statement, raw: str) -> list[str]:
    v, a = st.verb, st.args
    if st.target:
        count = _MODEL_VERBS[v][1]
        if v in ("par", "vectors"):
            if not a:
                raise ScenarioError(st.line, 1, f"{v} needs at least one model")
            refs = [_ref_name(x) for x in a]
        elif v == "attack":
            if len(a) != 1 or a[0] not in ("stuckat", "cut", "short"):
                raise ScenarioError(st.line, _col(raw, v), "attack kind must be stuckat, cut or short")
            refs = [st.opt("on")] if st.opt("on") else []
        elif v == "load":
            if len(a) != 1:
                raise ScenarioError(st.line, _col(raw, v), "load takes one path")
            refs = []
        else:
            if v == "rename":
                if not a or any("->" not in x for x in a[1:]):
                    raise ScenarioError(st.line, _col(raw, v), "rename takes a model and old->new pairs")
                return [a[0]]
            if len(a) != count:
                raise ScenarioError(st.line, _col(raw, v), f"{v} takes {count} model argument(s)")
            refs = list(a)
        return refs
    if v == "check":
        if not a or a[0] not in _CHECKS:
            raise ScenarioError(st.line, _col(raw, v), f"check kind must be one of {', '.join(_CHECKS)}")
        if len(a) - 1 != _CHECKS[a[0]]:
            raise ScenarioError(st.line, _col(raw, a[0]), f"check {a[0]} takes {_CHECKS[a[0]]} model(s)")
        return list(a[1:])
    if v == "attack":
        if len(a) != 1 or a[0] not in ("stuckat", "cut", "short"):
            raise ScenarioError(st.line, _col(raw, v), "attack kind must be stuckat, cut or short")
        return [st.opt("on")] if st.opt("on") else []
    if v == "report":
        if a != ("table3",):
            raise ScenarioError(st.line, _col(raw, v), "only 'report table3' is supported")
        _report_selection(st)
        return []
    if v == "export":
        if len(a) != 2:
            raise ScenarioError(st.line, _col(raw, v), "export takes a model and a path")
        return [a[0]]
    if v == "show":
        return list(a)
    return []


def _report_selection(st: Statement):
    styles = st.opt("styles", "ALL").upper()
    forks = st.opt("forks", "ALL").upper()
    columns = st.opt("columns", ",".join(COLUMNS)).lower()
    try:
        s = list(STYLE_ORDER) if styles == "ALL" else [GateStyle(x) for x in styles.split(",")]
    except ValueError as exc:
        raise ScenarioError(st.line, 1, str(exc)) from None
    f = list(FORK_CODES) if forks == "ALL" else forks.split(",")
    for code in f:
        if code not in FORK_CODES:
            raise ScenarioError(st.line, 1, f"unknown fork code {code!r}")
    c = columns.split(",")
    for col in c:
        if col not in COLUMNS:
            raise ScenarioError(st.line, 1, f"unknown column {col!r}")
    return s, f, c


def report_configs(scenario: Scenario) -> list[tuple[GateStyle, str]]:
    """All (style, fork code) pairs tabulated by the scenario's report statements."""
    out = []
    for st in scenario.statements:
        if st.verb == "report":
            styles, forks, _ = _report_selection(st)
            out.extend((s, f) for s in styles for f in forks)
    return out


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), base_dir=path.parent)


@dataclass
class CheckResult:
    line: int
    description: str
    passed: bool


@dataclass
class RunResult:
    checks: list[CheckResult] = field(default_factory=list)
    rows: list[ReportRow] = field(default_factory=list)
    log: list[str] = field(default_factory=list)
    models: dict[str, Lts] = field(default_factory=dict)
    budget_error: str | None = None

    @property
    def ok(self) -> bool:
        return self.budget_error is None and all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.ok else 1

    def markdown(self) -> str:
        out = ["# Scenario report", ""]
        if self.checks:
            out += ["## Checks", ""]
            out += [f"- line {c.line}: {c.description}: {'PASS' if c.passed else 'FAIL'}"
                    for c in self.checks]
            out.append("")
        if self.budget_error:
            out += ["## Aborted", "", self.budget_error, ""]
        if self.rows:
            md, _ = emit_report(self.rows)
            out += ["## State spaces", "", md]
            notes = [f"- {r.model.value}/{r.forks}: {n}" for r in sorted(self.rows, key=ReportRow.sort_key)
                     for n in r.notes]
            if notes:
                out += ["Skipped cells:", ""] + notes + [""]
        return "\n".join(out)

    def csv(self) -> str:
        return emit_report(self.rows)[1]


def _voltage(text: str) -> Voltage:
    return Voltage[text.upper()]


def _truth(text: str) -> bool:
    t = text.lower()
    if t in ("yes", "true", "detected", "1"):
        return True
    if t in ("no", "false", "undetected", "0"):
        return False
    raise ValueError(f"expected yes/no, got {text!r}")


def _config(st: Statement) -> SequencerConfig:
    kw = {k: _voltage(st.opt(k)) for k in ("x1", "x2", "init_c") if st.opt(k)}
    return SequencerConfig.from_code(st.opt("style", "INTUITIVE"), st.opt("forks", "RV"), **kw)


def _attack_spec(st: Statement):
    kind = st.args[0]
    if kind == "stuckat":
        return atk.StuckAt(st.opt("wire", "R"), _voltage(st.opt("value", "UP")),
                           atk.StuckVariant(st.opt("variant", "both").lower()))
    if kind == "cut":
        return atk.Cut(st.opt("wire", "R"), atk.CutVariant(st.opt("variant", "block").lower()))
    return atk.Short(st.opt("a", "R1"), st.opt("b", "A2"),
                     atk.ShortPolicy(st.opt("policy", "nondet").lower()))


def _parse_par_arg(tok: str) -> tuple[str, set[str]]:
    name, _, gates = tok.partition("[")
    gates = gates.rstrip("]")
    return name, {g for g in gates.split(",") if g}


def _row_job(args):
    style, code, columns, two_max, budget = args
    return compute_row(style, code, columns, two_max=two_max, budget=budget)


class _Runner:
    def __init__(self, scenario: Scenario, out_dir, budget: int, jobs: int):
        self.sc = scenario
        self.out_dir = Path(out_dir) if out_dir else None
        self.budget = budget
        self.jobs = jobs
        self.res = RunResult()
        self.env = self.res.models

    def say(self, msg: str):
        self.res.log.append(msg)

    def run(self) -> RunResult:
        for st in self.sc.statements:
            try:
                self.execute(st)
            except BudgetExceeded as exc:
                self.res.budget_error = f"line {st.line}: {exc}"
                self.say(self.res.budget_error)
                break
        return self.res

    def budget_of(self, st: Statement) -> int:
        return int(float(st.opt("budget", self.budget)))

    def execute(self, st: Statement):
        if st.target:
            t0 = time.perf_counter()
            l = self.build(st)
            self.env[st.target] = l
            self.say(f"{st.target} = {st.verb}: {l.num_states} states, "
                     f"{l.num_transitions} transitions ({time.perf_counter() - t0:.2f}s)")
            return
        getattr(self, "do_" + st.verb)(st)

    def build(self, st: Statement) -> Lts:
        e, a, b = self.env, st.args, self.budget_of(st)
        v = st.verb
        if v == "protocol":
            return protocol_lts()
        if v == "load":
            return load_aut(self.sc.base_dir / a[0])
        if v == "sequencer":
            return build_sequencer(_config(st), budget=b)
        if v == "stubbed":
            return build_stubbed_sequencer(_config(st), budget=b)
        if v == "shield":
            return build_shield(int(st.opt("n", "1")), e[a[0]], budget=b)
        if v == "pipe":
            return pipe(e[a[0]], e[a[1]], budget=b)
        if v == "pipe_nohide":
            return pipe_nohide(e[a[0]], e[a[1]], st.opt("left", "_L"), st.opt("right", "_R"),
                               budget=b)
        if v == "par":
            comps = []
            for tok in a:
                name, gates = _parse_par_arg(tok)
                comps.append((e[name], gates))
            return gateset_par(comps, budget=b)
        if v == "vectors":
            net = Network(tuple(e[x] for x in a), tuple(SyncVector.parse(x) for x in st.block))
            return product(net, budget=b, what=f"vectors {st.target}")
        if v == "hide":
            if st.opt("except") is not None:
                return hide_except(e[a[0]], [g for g in st.opt("except").split(",") if g])
            return hide(e[a[0]], [g for g in st.opt("gates", "").split(",") if g])
        if v == "rename":
            mapping = dict(x.split("->", 1) for x in a[1:])
            return rename(e[a[0]], mapping)
        if v == "minimize":
            return minimize(e[a[0]], Relation.parse(st.opt("relation", "dsbb")))
        if v == "attack":
            seq = e[st.opt("on")] if st.opt("on") else None
            return atk.apply_attack(_attack_spec(st), seq, budget=b)
        raise AssertionError(v)

    def record(self, st: Statement, description: str, passed: bool):
        self.res.checks.append(CheckResult(st.line, description, passed))
        self.say(f"line {st.line}: {description}: {'PASS' if passed else 'FAIL'}")

    def do_check(self, st: Statement):
        kind, names = st.args[0], st.args[1:]
        ls = [self.env[n] for n in names]
        if kind == "equivalent":
            r = Relation.parse(st.opt("relation", "dsbb"))
            got = equivalent(ls[0], ls[1], r)
            want = _truth(st.opt("expect", "yes"))
            desc = f"{names[0]} {'~' if got else '!~'}{r.value} {names[1]}"
            if not got and got.witness:
                desc += f" (witness: {', '.join(got.witness)})"
            self.record(st, desc, bool(got) == want)
        elif kind == "includes":
            got = weak_trace_includes(ls[0], ls[1])
            want = _truth(st.opt("expect", "yes"))
            desc = f"traces({names[0]}) {'<=' if got else 'not <='} traces({names[1]})"
            if not got:
                desc += f" (missing: {', '.join(got.missing)})"
            self.record(st, desc, bool(got) == want)
        elif kind == "deadlock":
            got = bool(deadlock_states(ls[0]))
            self.record(st, f"{names[0]} deadlock: {'yes' if got else 'no'}",
                        got == _truth(st.opt("expect", "no")))
        elif kind == "divergence":
            got = bool(divergent_states(ls[0]))
            self.record(st, f"{names[0]} divergence: {'yes' if got else 'no'}",
                        got == _truth(st.opt("expect", "no")))
        else:
            l = ls[0]
            ok = True
            if st.opt("states") is not None:
                ok &= l.num_states == int(st.opt("states"))
            if st.opt("transitions") is not None:
                ok &= l.num_transitions == int(st.opt("transitions"))
            self.record(st, f"{names[0]} size {l.num_states}/{l.num_transitions}", ok)

    def do_attack(self, st: Statement):
        spec = _attack_spec(st)
        seq = self.env[st.opt("on")] if st.opt("on") else None
        verdict = atk.detect(atk.apply_attack(spec, seq, budget=self.budget_of(st)))
        expect = st.opt("expect")
        passed = True if expect is None else verdict.detected == _truth(expect)
        self.record(st, f"{spec}: {verdict}", passed)

    def do_report(self, st: Statement):
        styles, forks, columns = _report_selection(st)
        two_max = int(float(st.opt("two_max", self.budget)))
        budget = self.budget_of(st)
        jobs = [(s, f, tuple(columns), two_max, budget) for s in styles for f in forks]
        if self.jobs > 1:
            with ProcessPoolExecutor(self.jobs) as pool:
                rows = list(pool.map(_row_job, jobs))
        else:
            rows = []
            for j in jobs:
                t0 = time.perf_counter()
                rows.append(_row_job(j))
                self.say(f"row {j[0].value}/{j[1]} ({time.perf_counter() - t0:.1f}s)")
        self.res.rows.extend(rows)

    def do_export(self, st: Statement):
        path = Path(st.args[1])
        if not path.is_absolute():
            path = (self.out_dir or self.sc.base_dir) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        save_aut(self.env[st.args[0]], path)
        self.say(f"wrote {path}")

    def do_show(self, st: Statement):
        for name in st.args:
            l = self.env[name]
            self.say(f"{name}: {l.num_states} states, {l.num_transitions} transitions")


def run_scenario(scenario: Scenario, *, out_dir=None, budget: int = DEFAULT_BUDGET,
                 jobs: int = 1) -> RunResult:
    """Execute statements in order; writes ``report.md`` and ``report.csv`` to ``out_dir``."""
    res = _Runner(scenario, out_dir, budget, jobs).run()
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.md").write_text(res.markdown(), encoding="utf-8")
        (out / "report.csv").write_text(res.csv(), encoding="utf-8")
    return res
