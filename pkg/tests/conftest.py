import numpy as np
import pytest

from meanfix.geometry import Disk
from meanfix.gridfield import BoundaryData, build_initial
from meanfix.operators import OperatorSpec, make_ball_rule, sweep
from meanfix.radius import default_params


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Compile the sweep kernel once so per-test timings stay honest."""
    dom = Disk()
    bd = BoundaryData(lambda x, y, th: 0.0, name="zero")
    spec = OperatorSpec(params=default_params(dom, 0.5),
                        rule=make_ball_rule(2, 4), domain=dom)
    fld = build_initial(dom, bd, 0.25)
    sweep(fld, spec, "H")
    sweep(fld, spec, "T")


@pytest.fixture
def unit_disk():
    return Disk(center=(0.0, 0.0), radius=1.0)


def affine_boundary(a, b, c):
    return BoundaryData(lambda x, y, th: a + b * x + c * y,
                        name=f"affine({a},{b},{c})")


def harmonic2_boundary():
    return BoundaryData(lambda x, y, th: x * x - y * y, name="harmonic2")


def make_spec(domain, alpha, n_r=8, n_th=32, **kw):
    return OperatorSpec(params=default_params(domain, alpha, **kw),
                        rule=make_ball_rule(n_r, n_th), domain=domain)


def interior_error(field, exact_fn):
    pts = field.node_points()
    exact = exact_fn(pts[:, 0], pts[:, 1])
    mask = ~field.pinned.ravel()
    return float(np.abs(field.values.ravel() - exact)[mask].max())
