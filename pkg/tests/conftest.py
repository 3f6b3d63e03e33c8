import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_PREFIX = "test_acceptance.py::test_criterion_"


@pytest.fixture
def checks(record_property):
    """Collects named measurements against tolerances for one acceptance criterion.

    ``checks(label, ok, detail)`` stores one line; the test asserts
    ``checks.all_ok()`` at the end so every measurement is reported even when
    an early one fails.
    """

    class Checks:
        def __init__(self):
            self.rows = []

        def __call__(self, label, ok, detail=""):
            ok = bool(ok)
            self.rows.append((label, ok, detail))
            record_property("check", f"{'ok' if ok else 'FAILED'} {label} {detail}".rstrip())
            return ok

        def below(self, label, value, tol):
            value = float(value)
            return self(label, value < tol, f"{value:.3g} < {tol:g}")

        def all_ok(self):
            return all(ok for _, ok, _ in self.rows)

        def failures(self):
            return [label for label, ok, _ in self.rows if not ok]

    return Checks()


def pytest_terminal_summary(terminalreporter):
    reports = [r for key in ("passed", "failed", "error")
               for r in terminalreporter.stats.get(key, [])
               if ACCEPTANCE_PREFIX in r.nodeid and r.when == "call"]
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for rep in sorted(reports, key=lambda r: r.nodeid):
        name = rep.nodeid.split(ACCEPTANCE_PREFIX, 1)[1]
        number, _, topic = name.partition("_")
        status = "PASS" if rep.passed else "FAIL"
        terminalreporter.write_line(f"criterion {int(number):2d} {status}  {topic.replace('_', ' ')}")
        for key, value in rep.user_properties:
            if key == "check":
                terminalreporter.write_line(f"    {value}")
