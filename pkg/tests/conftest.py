"""Shared fixtures for the test suite."""
import numpy as np
import pytest

from rarefaction import ConstantBackground, GammaLaw, build_table


@pytest.fixture(scope="session")
def eos():
    return GammaLaw(1.4)


@pytest.fixture(scope="session")
def const_table(eos):
    """Order-4 rest-state table on ``[1, 3]``."""
    return build_table(ConstantBackground(eos), 4, 3.0, step=1e-3)


@pytest.fixture(autouse=True)
def _output_root(tmp_path, monkeypatch):
    """Keep CLI outputs inside the per-test temporary directory."""
    monkeypatch.setenv("RAREFACTION_OUTPUT_ROOT", str(tmp_path))


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


#: ``(criterion, passed, detail)`` lines recorded by the acceptance suite.
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda x: (int(x[0].rstrip("ab")), x[0])):
        terminalreporter.write_line(f"criterion {k:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
