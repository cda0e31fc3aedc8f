import re

import numpy as np
import pytest

from dispersive_lab.spectral import Grid, SpectralField

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _CRITERIA.get(key)
        outcome = "PASS" if report.outcome == "passed" else "FAIL"
        if prev is None or prev[0] == "PASS":
            _CRITERIA[key] = (outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), (outcome, dur) in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {num:2d}  {outcome}  {name}  ({dur:.1f} s)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_smooth_field(grid: Grid, n: int, rng, band=0.25, envelope=4.0) -> SpectralField:
    """Random field with a Gaussian spectrum, under a Gaussian window so it decays at the edges."""
    xi = grid.wavenumbers
    hat = (rng.standard_normal((n, grid.points)) + 1j * rng.standard_normal((n, grid.points)))
    hat *= np.exp(-band * xi**2)
    vals = np.fft.ifft(hat, axis=-1)
    vals *= np.exp(-grid.x**2 / envelope)
    vals /= np.max(np.abs(vals))
    return SpectralField(grid, vals)


@pytest.fixture
def smooth_field():
    return random_smooth_field
