import numpy as np
import pytest

from rsvessel.kernels import KernelContext
from rsvessel.meromorphic import RationalFn, zeta_pair_function
from rsvessel.model_ops import ModelSpace
from rsvessel.surface import RealCurve, SurfacePoint, torii_point

TAU = 0.9j

# criterion number -> (status, detail); printed in the terminal summary
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {detail}")


@pytest.fixture(scope="session")
def curve0():
    return RealCurve.genus0()


@pytest.fixture(scope="session")
def curve1():
    return RealCurve.genus1(TAU)


@pytest.fixture(scope="session")
def zeta1(curve1):
    return torii_point(curve1, [0], [0.3])


@pytest.fixture(scope="session")
def ctx0(curve0):
    return KernelContext(curve0, torii_point(curve0))


@pytest.fixture(scope="session")
def ctx1(curve1, zeta1):
    return KernelContext(curve1, zeta1)


@pytest.fixture(scope="session")
def pair1(curve1):
    y1 = zeta_pair_function(curve1, 0.3 + 0.45j, 0.6)
    y2 = zeta_pair_function(curve1, 0.75 + 0.45j, 0.2)
    return y1, y2


@pytest.fixture(scope="session")
def basis0():
    return [SurfacePoint(z) for z in (0.3 + 1j, -0.5 + 0.4j, 1.2 + 0.7j, 0.1 + 2j)]


@pytest.fixture(scope="session")
def ms0(ctx0, basis0):
    return ModelSpace(ctx0, basis0)


@pytest.fixture(scope="session")
def ms1(ctx1, curve1):
    pts = curve1.sample_plus(np.random.default_rng(11), 5, margin=0.1)
    return ModelSpace(ctx1, pts)


@pytest.fixture(scope="session")
def z0(curve0):
    return RationalFn(curve0, [1, 0])


@pytest.fixture(scope="session")
def h0(curve0):
    return RationalFn(curve0, [-1], [1, -0.5])
