"""Acceptance suite: criteria 1 to 10 at full configuration.

Each criterion runs its experiment through the harness with default
parameters, checks every recorded rule and the runtime limit, and prints one
``criterion k: PASS/FAIL`` line.
"""
import time

import pytest

from besovlab.harness.config import parse_config
from besovlab.harness.experiments import clear_cache, run_experiment
from besovlab.harness.report import render_table

VERDICTS = {}

# (criterion, experiment, runtime limit in seconds)
CRITERIA = [
    (1, "lemma-tlemp", 30),
    (2, "nud-periodic", 5 * 60),
    (3, "holder-vanishing", 60),
    (4, "lemma-tlemnp", 5 * 60),
    (5, "solver-verify", 10 * 60),
    (6, "transport-bound", 5 * 60),
    (7, "inequality-suite", 2 * 60),
    (8, "residual-decay", 20 * 60),
    (9, "nud-nonperiodic", 30 * 60),
]

# experiments rerun for the determinism criterion (the cheaper ones)
DETERMINISM = ["partition-check", "norm-oracle", "lemma-tlemp", "holder-vanishing",
               "transport-bound", "inequality-suite"]


def _record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[k] = line
    print(line)


def _run(name):
    t0 = time.perf_counter()
    rep = run_experiment(parse_config(experiment=name))
    return rep, time.perf_counter() - t0


class TestAcceptance:
    @pytest.mark.parametrize("k,name,limit", CRITERIA, ids=[f"criterion{c[0]}-{c[1]}" for c in CRITERIA])
    def test_criterion(self, k, name, limit):
        rep, wall = _run(name)
        failed = [c.rule for c in rep.checks if not c.passed]
        ok = not failed and wall < limit
        detail = f"{name}, {len(rep.checks)} checks, {wall:.1f} s (limit {limit} s)"
        if failed:
            detail += f", failed: {'; '.join(failed)}"
        _record(k, ok, detail)
        assert not failed, f"failed rules: {failed}"
        assert wall < limit

    def test_criterion10_determinism(self):
        differing = []
        for name in DETERMINISM:
            tables = []
            for _ in range(2):
                clear_cache()
                tables.append(render_table(run_experiment(parse_config(experiment=name))).encode())
            if tables[0] != tables[1]:
                differing.append(name)
        _record(10, not differing, f"{len(DETERMINISM)} experiments run twice"
                + (f", differing: {', '.join(differing)}" if differing else ", tables byte-identical"))
        assert not differing
