import numpy as np
import pytest

from fmcompat.synth import set_from_cameras

E = np.eye(3)


def translated(*ts):
    """Cameras [I | t] for the given translations."""
    return [np.hstack([np.eye(3), np.asarray(t, dtype=float)[:, None]]) for t in ts]


def set_from_translations(*ts):
    return set_from_cameras(translated(*ts))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []  # (criterion, passed, detail), filled by test_acceptance


def report(criterion, passed, detail):
    line = f"CRITERION {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
