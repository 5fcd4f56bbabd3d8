from fractions import Fraction

import numpy as np
import pytest


def exact_recursion(samples, mode):
    """Rational-arithmetic evaluation of the mean/variance recursions.

    Used as an independent reference: no rounding, no shared code.
    """
    rows = [[Fraction(v) for v in s] for s in samples]
    mu = None
    s2 = Fraction(0)
    out = []
    for k, x in enumerate(rows, start=1):
        if k == 1:
            mu = list(x)
            s2 = Fraction(0)
        else:
            mu = [Fraction(k - 1, k) * m + Fraction(1, k) * v for m, v in zip(mu, x)]
            d2 = sum((v - m) ** 2 for v, m in zip(x, mu))
            w = Fraction(1, k) if mode == "paper" else Fraction(1, k - 1)
            s2 = Fraction(k - 1, k) * s2 + w * d2
        out.append((list(mu), s2))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _criteria.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in sorted(_criteria, key=lambda c: int(c[0].split(".")[0])):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
