import numpy as np
import pytest

from mmopt.core import MMConstraint, MMFunction, make_box
from mmopt.errors import MissingMonotoneSplit
from mmopt.feasibility import (
    Feasibility,
    conormal_set_test,
    mm_conclusive_test,
    mm_sufficient_test,
    normal_set_test,
)
from mmopt.problems import generate_aloha, generate_channels, wsr_problem


def linear_constraint(dim, a_x, b_y, offset, split=None):
    """G(x, y) = a_x . x + b_y . y + offset with a_x >= 0 >= b_y."""
    a = np.asarray(a_x, dtype=float)
    b = np.asarray(b_y, dtype=float)
    g = MMFunction(dim, lambda x, y: float(a @ x + b @ y + offset))
    return MMConstraint(g, monotone_split=split)


class TestSufficient:
    def test_zero_rate_floors_fully_feasible(self):
        net = generate_channels(2, seed=0)  # r_min = 0
        prob = wsr_problem(net)
        # zero floors are vacuous, so the sufficient test sees no constraints
        verdict = mm_sufficient_test(make_box((0.0, 0.0), (1.0, 1.0)), prob.constraints)
        assert verdict.kind is Feasibility.FULLY_FEASIBLE

    def test_infeasible(self):
        c = MMConstraint(MMFunction(1, lambda x, y: x[0] - 1.0))
        verdict = mm_sufficient_test(make_box((2.0,), (3.0,)), (c,))
        assert verdict.kind is Feasibility.INFEASIBLE

    def test_straddling_box_is_unknown(self):
        c = MMConstraint(MMFunction(1, lambda x, y: x[0] - y[0]))
        verdict = mm_sufficient_test(make_box((0.0,), (1.0,)), (c,))
        assert verdict.kind is Feasibility.UNKNOWN


class TestConclusive:
    def test_normal_set_witness_is_lower_corner(self):
        c = linear_constraint(2, (1.0, 1.0), (0.0, 0.0), -1.0, split=frozenset({0, 1}))
        verdict = mm_conclusive_test(make_box((0.0, 0.0), (1.0, 1.0)), (c,))
        assert verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS
        np.testing.assert_allclose(verdict.witness, [0.0, 0.0])

    def test_infeasible_when_lower_corner_violates(self):
        c = linear_constraint(2, (1.0, 1.0), (0.0, 0.0), -1.0, split=frozenset({0, 1}))
        verdict = mm_conclusive_test(make_box((0.6, 0.6), (1.0, 1.0)), (c,))
        assert verdict.kind is Feasibility.INFEASIBLE

    def test_mixed_split_witness(self):
        # feasible iff x0 - y1 - 0.5 <= 0 at (r0, s1)
        c = linear_constraint(2, (1.0, 0.0), (0.0, -1.0), -0.5, split=frozenset({0}))
        verdict = mm_conclusive_test(make_box((0.2, 0.0), (1.0, 0.4)), (c,))
        assert verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS
        np.testing.assert_allclose(verdict.witness, [0.2, 0.4])

    def test_random_access_floors_have_no_shared_split(self):
        from mmopt.problems import aloha_problem

        net = generate_aloha(3, seed=1)
        prob = aloha_problem(net)
        assert prob.constraints, "generator should produce active floors"
        with pytest.raises(MissingMonotoneSplit):
            mm_conclusive_test(prob.initial_box, prob.constraints)

    def test_never_contradicts_sufficient(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            dim = int(rng.integers(2, 4))
            split = frozenset(int(i) for i in range(dim) if rng.random() < 0.5)
            comp = [i for i in range(dim) if i not in split]
            a = np.zeros(dim)
            b = np.zeros(dim)
            for i in split:
                a[i] = rng.random() * 2
            for i in comp:
                b[i] = -rng.random() * 2
            c = linear_constraint(dim, a, b, float(rng.normal()), split=split)
            lo = rng.random(dim)
            hi = lo + rng.random(dim)
            box = make_box(lo, hi)
            sufficient = mm_sufficient_test(box, (c,))
            conclusive = mm_conclusive_test(box, (c,))
            if sufficient.kind is Feasibility.FULLY_FEASIBLE:
                assert conclusive.is_feasible
            if sufficient.kind is Feasibility.INFEASIBLE:
                assert conclusive.kind is Feasibility.INFEASIBLE


class TestNormalConormal:
    def test_normal_witness(self):
        verdict = normal_set_test(
            make_box((0.0, 0.0), (1.0, 1.0)), [lambda x: float(np.sum(x) - 3.0)]
        )
        assert verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS
        np.testing.assert_allclose(verdict.witness, [0.0, 0.0])

    def test_normal_infeasible(self):
        verdict = normal_set_test(make_box((1.0,), (2.0,)), [lambda x: float(x[0])])
        assert verdict.kind is Feasibility.INFEASIBLE

    def test_power_cap_subboxes_always_feasible(self):
        cap = 1.0
        gs = [lambda x, i=i: float(x[i] - cap) for i in range(2)]
        rng = np.random.default_rng(3)
        for _ in range(20):
            lo = rng.random(2) * cap
            hi = lo + (cap - lo) * rng.random(2)
            verdict = normal_set_test(make_box(lo, hi), gs)
            assert verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS

    def test_conormal_witness_upper_corner(self):
        verdict = conormal_set_test(make_box((0.0,), (1.0,)), [lambda x: float(x[0] - 0.5)])
        assert verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS
        np.testing.assert_allclose(verdict.witness, [1.0])

    def test_conormal_nonnegative_at_top(self):
        verdict = conormal_set_test(make_box((0.0, 0.0), (1.0, 1.0)), [lambda x: float(x[0])])
        np.testing.assert_allclose(verdict.witness, [1.0, 1.0])

    def test_conormal_infeasible(self):
        verdict = conormal_set_test(make_box((0.0,), (1.0,)), [lambda x: float(x[0] - 2.0)])
        assert verdict.kind is Feasibility.INFEASIBLE


def test_witnesses_are_feasible_and_inside():
    rng = np.random.default_rng(23)
    for trial in range(100):
        dim = 2 if trial % 2 == 0 else 3
        split = frozenset(range(dim)) if trial % 3 == 0 else frozenset({0})
        comp = [i for i in range(dim) if i not in split]
        constraints = []
        for _ in range(int(rng.integers(1, 4))):
            a = np.zeros(dim)
            b = np.zeros(dim)
            for i in split:
                a[i] = rng.random()
            for i in comp:
                b[i] = -rng.random()
            constraints.append(linear_constraint(dim, a, b, float(rng.normal()), split=split))
        lo = rng.random(dim)
        box = make_box(lo, lo + rng.random(dim))
        verdict = mm_conclusive_test(box, tuple(constraints))
        if verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS:
            w = verdict.witness
            assert box.contains(w, tol=1e-12)
            for c in constraints:
                assert c.g.eval(w, w) <= 1e-9
