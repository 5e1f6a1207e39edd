from __future__ import annotations

import numpy as np
import pytest

from dispersive_bounds.spectral import ProblemSpec, SpectralMeasure

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def standard_measure() -> SpectralMeasure:
    return SpectralMeasure([1.0, 2.0], [[1.0, 0.3], [0.3, 1.0]])


@pytest.fixture
def standard_spec() -> ProblemSpec:
    return ProblemSpec((1.0,), (0.0, 1.0, 0.0, 1.0), "cos", 1.0, True)


def random_psd_measure(n_atoms: int = 5, seed: int = 7) -> SpectralMeasure:
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-2.5, 2.5, n_atoms)
    a = rng.normal(size=(n_atoms, n_atoms))
    return SpectralMeasure(lam, a @ a.T / n_atoms)


@pytest.fixture
def acceptance_log():
    def record(number: int, name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{number}] {status} {name}" + (f" :: {detail}" if detail else ""))
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[1:s.index("]")])):
            terminalreporter.write_line(line)
