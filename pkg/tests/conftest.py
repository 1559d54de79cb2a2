import contextlib

import pytest

from qdynlab.lieb_robinson import DecayFunction
from qdynlab.models import SZ, dissipative_xx_chain
from qdynlab.thermo_limit import VolumeSequence, convergence_series, tail_bound

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def run(number: int, title: str):
        info = {}
        try:
            yield info
        except BaseException:
            _record(number, False, title, info)
            raise
        _record(number, True, title, info)

    return run


def _record(number, passed, title, info):
    detail = ", ".join(f"{k}={v}" for k, v in info.items())
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    _ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])


@pytest.fixture(scope="session")
def chain_sequence():
    """Default thermodynamic-limit run: chains of 3..9 sites, sigma_z at the centre, t = 0.5."""
    volseq = VolumeSequence.centered_chain([3, 5, 7, 9], lambda labels: dissipative_xx_chain(labels, damping=0.0))
    decay = DecayFunction(1, 1.0, 1.0)
    diffs = convergence_series(volseq, SZ, (0,), 0.5)
    bounds = tail_bound(volseq, SZ, (0,), 0.5, decay)
    return {"volseq": volseq, "diffs": diffs, "bounds": bounds}
