import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmopt.core import MMFunction, check_mm_property, make_box
from mmopt.errors import (
    CornerOrderViolation,
    DimensionMismatch,
    EvaluationError,
    NonFiniteEntry,
)
from mmopt.problems import generate_channels, wsr_problem


def test_make_box_basic():
    box = make_box((0.0, 0.0), (1.0, 1.0))
    assert box.dim == 2
    assert box.diameter == 1.0
    assert box.birth_iteration == 0


def test_make_box_degenerate():
    box = make_box((0.0,), (0.0,))
    assert box.diameter == 0.0


def test_make_box_order_violation():
    with pytest.raises(CornerOrderViolation):
        make_box((1.0, 0.0), (0.0, 1.0))


def test_make_box_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        make_box((0.0,), (1.0, 2.0))


def test_make_box_nonfinite():
    with pytest.raises(NonFiniteEntry):
        make_box((0.0,), (np.inf,))
    with pytest.raises(NonFiniteEntry):
        make_box((np.nan,), (1.0,))


def test_box_corners_are_readonly():
    box = make_box((0.0,), (1.0,))
    with pytest.raises(ValueError):
        box.r[0] = 5.0


def test_box_contains():
    box = make_box((0.0, 0.0), (1.0, 2.0))
    assert box.contains((0.5, 1.0))
    assert not box.contains((1.5, 1.0))
    assert box.contains((1.0 + 1e-12, 1.0), tol=1e-9)


@given(
    st.lists(st.floats(-10, 10), min_size=1, max_size=5),
    st.lists(st.floats(0, 5), min_size=1, max_size=5),
)
@settings(max_examples=50, deadline=None)
def test_box_diameter_matches_widths(lower, widths):
    n = min(len(lower), len(widths))
    lo = np.array(lower[:n])
    hi = lo + np.array(widths[:n])
    box = make_box(lo, hi)
    assert box.diameter == pytest.approx(max(widths[:n]), abs=1e-12)


def test_mm_function_nan_is_hard_error():
    f = MMFunction(1, lambda x, y: float("nan"))
    with pytest.raises(EvaluationError):
        f.eval(np.zeros(1), np.zeros(1))


def test_mm_function_diagonal():
    f = MMFunction(2, lambda x, y: float(x[0] - y[1]))
    assert f.diagonal(np.array([3.0, 1.0])) == 2.0


def test_check_mm_property_canonical_dm_form():
    f = MMFunction(2, lambda x, y: float(x[0] - y[0]))
    report = check_mm_property(f, make_box((0.0, 0.0), (1.0, 1.0)), samples=1000, rng_seed=3)
    assert report.violations == 0
    assert report.worst_gap == 0.0


def test_check_mm_property_reversed_monotonicity():
    f = MMFunction(2, lambda x, y: float(y[0] - x[0]))
    report = check_mm_property(f, make_box((0.0, 0.0), (1.0, 1.0)), samples=1000, rng_seed=3)
    assert report.violations > 0
    assert report.worst_gap > 0.0


def test_check_mm_property_interference_rate():
    # single user with self-interference: rate is increasing in own power
    net_rate = MMFunction(
        1, lambda x, y: math.log2(1.0 + 1.0 * x[0] / (0.01 + 0.5 * x[0]))
    )
    report = check_mm_property(net_rate, make_box((0.0,), (1.0,)), samples=1000, rng_seed=0)
    assert report.violations == 0


def test_diagonal_never_exceeds_corner_bound():
    # f(x) = F(x, x) <= F(s, r) for every x in [r, s]
    rng = np.random.default_rng(11)
    net = generate_channels(3, seed=5)
    objective = wsr_problem(net).objective
    box = make_box((0.1, 0.0, 0.2), (0.9, 0.7, 1.0))
    ubound = objective.eval(box.s, box.r)
    for _ in range(1000):
        x = box.r + (box.s - box.r) * rng.random(3)
        assert objective.eval(x, x) <= ubound + 1e-9
