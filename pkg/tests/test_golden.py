"""The shipped scenario against its recorded report.

Rerunning the whole table takes minutes on one core, so the checks and
attacks run in full while only the RV rows are recomputed and compared.
"""
from dataclasses import replace
from pathlib import Path

from shieldcheck.report import compute_row, emit_report
from shieldcheck.scenario import load_scenario, run_scenario

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden" / "full_report.csv"
STYLES = ("INTUITIVE", "STATE", "PARALLEL", "FREE", "TRANSITION")


def test_scenario_checks_all_pass(tmp_path):
    sc = load_scenario(ROOT / "scenarios" / "full.scn")
    sc = replace(sc, statements=[s for s in sc.statements if s.verb != "report"])
    res = run_scenario(sc, out_dir=tmp_path)
    assert res.ok, res.log
    assert len(res.checks) == 28


def test_golden_has_every_configuration():
    lines = GOLDEN.read_text().splitlines()
    assert len(lines) == 46
    assert len({tuple(l.split(",")[:2]) for l in lines[1:]}) == 45


def test_rv_rows_match_golden():
    _, csv = emit_report([compute_row(s, "RV", two_max=2e7) for s in STYLES])
    golden = GOLDEN.read_text().splitlines()
    for line in csv.splitlines():
        assert line in golden
