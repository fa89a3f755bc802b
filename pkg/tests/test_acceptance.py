"""Acceptance gate: every criterion at its stated tolerance.

Each test prints its pass/fail line (visible with pytest -s; the CLI
`acceptance` subcommand prints the same table).
"""

import time

import pytest

from shrinkerlab import acceptance as acc


def _run(index, name, fn):
    t0 = time.time()
    passed, detail = fn()
    line = acc.CriterionResult(index=index, name=name, passed=bool(passed),
                               detail=detail, runtime=time.time() - t0).line()
    print(line)
    assert passed, line


def test_criterion_01_shrinker_residuals():
    _run(1, "shrinker residuals", acc.criterion_1_shrinker_residuals)


def test_criterion_02_cylinder_identities():
    _run(2, "cylinder identities", acc.criterion_2_cylinder_identities)


def test_criterion_03_volume_growth():
    _run(3, "volume growth", acc.criterion_3_volume_growth)


def test_criterion_04_solver_convergence():
    _run(4, "solver convergence", acc.criterion_4_solver_convergence)


def test_criterion_05_maximum_principle():
    _run(5, "maximum principle / uniqueness", acc.criterion_5_maximum_principle)


@pytest.mark.slow
def test_criterion_06_monte_carlo():
    _run(6, "Monte Carlo cross-validation", acc.criterion_6_monte_carlo)


@pytest.mark.slow
def test_criterion_07_reilly():
    _run(7, "localized Reilly identity", acc.criterion_7_reilly)


def test_criterion_08_chain_attribution():
    _run(8, "energy chain attribution", acc.criterion_8_chain_attribution)


def test_criterion_09_caccioppoli():
    _run(9, "Caccioppoli inequality", acc.criterion_9_caccioppoli)


def test_criterion_10_barrier_suite():
    _run(10, "barrier suite", acc.criterion_10_barrier_suite)


def test_criterion_11_domination():
    _run(11, "variational domination", acc.criterion_11_domination)


def test_criterion_12_separation():
    _run(12, "separation heuristic", acc.criterion_12_separation)
