"""Shared fixtures and independent oracles.

The oracles here deliberately re-derive results from first principles
(step-by-step simulation, textbook formulas, dense matrix exponentials) so
the library is always checked against a second, separately written path.
"""

import numpy as np
import pytest

from qloan import FRENCH, GERMAN, LoanSpec, RateModel, build_operators, solve_recurrence

#: one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def simulate_forward_oracle(d0, rates, installments):
    """Plain step-by-step recurrence: y_n = t d_{n-1}, a_n = q_n - y_n, d_n = d_{n-1} - a_n."""
    m = len(installments)
    d = [float(d0)]
    a, y = [], []
    for n in range(1, m + 1):
        yy = rates[n - 1] * d[n - 1]
        aa = installments[n - 1] - yy
        y.append(yy)
        a.append(aa)
        d.append(d[n - 1] - aa)
    return np.array(d), np.array(a), np.array(y)


def german_oracle(d0, t, m):
    """Direct evaluation of the constant-amortization formulas."""
    a0 = d0 / m
    q = np.array([a0 + t * a0 * (m - n + 1) for n in range(1, m + 1)])
    d = np.array([d0 * (1 - n / m) for n in range(m + 1)])
    y = np.array([t * d0 * (1 - (n - 1) / m) for n in range(1, m + 1)])
    return d, np.full(m, a0), y, q


@pytest.fixture
def french_spec():
    return LoanSpec(d0=100.0, M=10, rate=RateModel(constant=0.2), system=FRENCH)


@pytest.fixture
def german_m2_spec():
    return LoanSpec(d0=100.0, M=2, rate=RateModel(constant=0.2), system=GERMAN)


@pytest.fixture
def german_m2_ops(german_m2_spec):
    return build_operators(solve_recurrence(german_m2_spec), german_m2_spec.rate)


@pytest.fixture
def german_m3_ops():
    spec = LoanSpec(d0=100.0, M=3, rate=RateModel(constant=0.2), system=GERMAN)
    return build_operators(solve_recurrence(spec), spec.rate)
