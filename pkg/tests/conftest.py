import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noonsim.hamiltonian import DeviceParams  # noqa: E402
from noonsim.hilbert import SpaceConfig  # noqa: E402


@pytest.fixture
def params():
    return DeviceParams.defaults()


@pytest.fixture
def cfg44():
    return SpaceConfig(4, 4)


@pytest.fixture
def g(params):
    return params.g1_ea


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line straight to the terminal, then assert."""

    def report(criterion: str, passed: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[acceptance] criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
        assert passed, f"criterion {criterion}: {detail}"

    return report
