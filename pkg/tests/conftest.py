import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_rotations(rng, n=None):
    return Rotation.random(n, random_state=rng).as_matrix()


def random_swarm(rng, n, width=2.0):
    return random_rotations(rng, n), rng.uniform(-width, width, (n, 3))


def expm_series(M, terms=30):
    """Truncated power series of the matrix exponential (independent oracle)."""
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def frame_with_heading(x, rng):
    y = np.cross(x, rng.normal(size=3))
    y /= np.linalg.norm(y)
    return np.column_stack([x, y, np.cross(x, y)])


def screw_swarm(rng, n, xi):
    """Poses on the screw of spatial twist xi, each with the body control that realises it.

    Unit speed forces x . w_hat = (v . w) / |w|; the position then solves r x w = v - x
    up to a free shift along the axis.
    """
    w, v = xi.angular, xi.linear
    w_hat = w / np.linalg.norm(w)
    axial = (v @ w) / np.linalg.norm(w)
    assert abs(axial) <= 1
    Rs, rs = [], []
    for _ in range(n):
        t = np.cross(w_hat, rng.normal(size=3))
        t /= np.linalg.norm(t)
        x = axial * w_hat + np.sqrt(1 - axial**2) * t
        Rs.append(frame_with_heading(x, rng))
        rs.append(np.cross(w, v - x) / (w @ w) + rng.normal() * w)
    R = np.stack(Rs)
    return R, np.array(rs), np.einsum("kba,b->ka", R, w)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
