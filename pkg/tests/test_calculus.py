import math

import numpy as np
import pytest

from mmopt.calculus import (
    mm_compose_nondecreasing,
    mm_compose_nonincreasing,
    mm_max,
    mm_min,
    mm_product,
    mm_ratio,
    mm_sum,
    mm_weighted_sum,
)
from mmopt.core import MMFunction, check_mm_property, make_box
from mmopt.errors import (
    DimensionMismatch,
    DirectionViolation,
    DomainError,
    EmptyList,
    NegativeWeight,
    NegativityDetected,
    NonpositiveDenominator,
)
from mmopt.problems import generate_channels, wsr_problem

from oracles import wsr_value


def x0(dim=1):
    return MMFunction(dim, lambda x, y: float(x[0]), name="x0")


def neg_y0(dim=1):
    return MMFunction(dim, lambda x, y: float(-y[0]), name="-y0")


def const(value, dim=1):
    return MMFunction(dim, lambda x, y: float(value), name=f"const{value}")


class TestSum:
    def test_linear_parts(self):
        f = mm_sum([x0(), neg_y0()])
        assert f.eval(np.array([2.0]), np.array([3.0])) == -1.0

    def test_single_element_identity(self):
        g = x0()
        f = mm_sum([g])
        rng = np.random.default_rng(0)
        for _ in range(100):
            x, y = rng.random(1), rng.random(1)
            assert f.eval(x, y) == g.eval(x, y)

    def test_wsr_rate_sum_is_mm(self):
        net = generate_channels(4, seed=2)
        objective = wsr_problem(net).objective
        report = check_mm_property(
            objective, make_box(np.zeros(4), np.ones(4)), samples=1000, rng_seed=1
        )
        assert report.violations == 0

    def test_empty_list(self):
        with pytest.raises(EmptyList):
            mm_sum([])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mm_sum([x0(1), x0(2)])


class TestWeightedSum:
    def test_basic(self):
        parts = [
            MMFunction(2, lambda x, y: float(x[0])),
            MMFunction(2, lambda x, y: float(-y[1])),
        ]
        f = mm_weighted_sum((1.0, 1.0), parts)
        assert f.eval(np.array([1.0, 1.0]), np.array([2.0, 2.0])) == -1.0

    def test_zero_weights_give_constant_zero(self):
        f = mm_weighted_sum((0.0, 0.0), [x0(), neg_y0()])
        rng = np.random.default_rng(1)
        for _ in range(20):
            assert f.eval(rng.random(1), rng.random(1)) == 0.0

    def test_weighted_constants(self):
        f = mm_weighted_sum((2.0, 3.0), [const(1.0), const(1.0)])
        assert f.eval(np.zeros(1), np.zeros(1)) == 5.0

    def test_negative_weight(self):
        with pytest.raises(NegativeWeight):
            mm_weighted_sum((-1.0,), [x0()])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mm_weighted_sum((1.0, 2.0), [x0()])


class TestMinMax:
    def test_min(self):
        f = mm_min([x0(), MMFunction(1, lambda x, y: 5.0 - y[0])])
        assert f.eval(np.array([1.0]), np.array([1.0])) == 1.0

    def test_max(self):
        f = mm_max([x0(), MMFunction(1, lambda x, y: 5.0 - y[0])])
        assert f.eval(np.array([1.0]), np.array([1.0])) == 4.0

    def test_min_of_efficiency_terms_is_mm(self):
        from mmopt.problems import EnergyModel, wmee_problem

        net = generate_channels(3, seed=9)
        energy = EnergyModel(phi=np.full(3, 5.0), p_circuit=np.ones(3))
        objective = wmee_problem(net, energy).objective
        report = check_mm_property(
            objective, make_box(np.zeros(3), np.ones(3)), samples=1000, rng_seed=2
        )
        assert report.violations == 0


class TestCompose:
    def test_log_of_sinr_equals_rate(self):
        # g = log2(1 + t) over the interference quotient reproduces the rate
        net = generate_channels(2, seed=4)
        k = 0
        cross = np.array(net.beta[k])
        cross[k] = 0.0
        sinr = MMFunction(
            2,
            lambda x, y: net.alpha[k]
            * x[k]
            / (net.sigma2 + net.beta[k, k] * x[k] + float(cross @ y)),
        )
        rate = mm_compose_nondecreasing(lambda t: math.log2(1.0 + t), sinr, check_range=(0.0, 50.0))
        direct = wsr_problem(net).objective
        rng = np.random.default_rng(3)
        for _ in range(50):
            x, y = rng.random(2), rng.random(2)
            expected = math.log2(
                1.0 + net.alpha[k] * x[k] / (net.sigma2 + float(cross @ y))
            )
            assert rate.eval(x, y) == pytest.approx(expected, abs=1e-12)
        assert direct is not None  # representations built both ways

    def test_identity_map(self):
        inner = x0()
        f = mm_compose_nondecreasing(lambda t: t, inner)
        rng = np.random.default_rng(5)
        for _ in range(100):
            x, y = rng.random(1), rng.random(1)
            assert f.eval(x, y) == inner.eval(x, y)

    def test_exp_at_zero(self):
        f = mm_compose_nondecreasing(math.exp, MMFunction(1, lambda x, y: x[0] - y[0]))
        assert f.eval(np.zeros(1), np.zeros(1)) == 1.0

    def test_domain_error(self):
        f = mm_compose_nondecreasing(math.log, x0())
        with pytest.raises(DomainError):
            f.eval(np.array([-1.0]), np.array([0.0]))

    def test_direction_spot_check(self):
        with pytest.raises(DirectionViolation):
            mm_compose_nondecreasing(lambda t: -t, x0(), check_range=(0.0, 1.0))
        with pytest.raises(DirectionViolation):
            mm_compose_nonincreasing(lambda t: t, x0(), check_range=(0.0, 1.0))


class TestComposeNonincreasing:
    def test_negation_swaps_arguments(self):
        f = mm_compose_nonincreasing(lambda t: -t, x0())
        # result is -y0
        assert f.eval(np.array([9.0]), np.array([2.0])) == -2.0
        report = check_mm_property(f, make_box((0.0,), (1.0,)), samples=200, rng_seed=0)
        assert report.violations == 0

    def test_reciprocal_swap_rule(self):
        # h = 1/t over F(x, y) = 1 + y0 gives 1 / (1 + x0)
        inner = MMFunction(1, lambda x, y: 1.0 + y[0])
        f = mm_compose_nonincreasing(lambda t: 1.0 / t, inner, check_range=(0.5, 2.0))
        assert f.eval(np.array([1.0]), np.array([0.0])) == pytest.approx(0.5)

    def test_constant(self):
        f = mm_compose_nonincreasing(lambda t: 7.0, x0())
        rng = np.random.default_rng(8)
        for _ in range(20):
            assert f.eval(rng.random(1), rng.random(1)) == 7.0


class TestProduct:
    def test_unit_corner(self):
        parts = [
            MMFunction(2, lambda x, y: float(x[0])),
            MMFunction(2, lambda x, y: float(x[1])),
        ]
        f = mm_product(parts, make_box((0.0, 0.0), (1.0, 1.0)))
        assert f.eval(np.ones(2), np.array([0.3, 0.9])) == 1.0

    def test_single_part_identity(self):
        g = x0()
        f = mm_product([g], make_box((0.0,), (1.0,)))
        rng = np.random.default_rng(2)
        for _ in range(50):
            x, y = rng.random(1), rng.random(1)
            assert f.eval(x, y) == g.eval(x, y)

    def test_aloha_throughput_is_mm(self):
        # c * x_k * prod(1 - y_j) as a product of nonnegative factors
        k_users = 3
        box = make_box(np.zeros(k_users), np.ones(k_users))
        c = 1.7
        parts = [MMFunction(k_users, lambda x, y: c * x[0])]
        for j in (1, 2):
            parts.append(MMFunction(k_users, lambda x, y, j=j: 1.0 - y[j]))
        f = mm_product(parts, box)
        report = check_mm_property(f, box, samples=1000, rng_seed=4)
        assert report.violations == 0
        theta = np.array([0.5, 0.25, 0.5])
        assert f.eval(theta, theta) == pytest.approx(c * 0.5 * 0.75 * 0.5, abs=1e-12)

    def test_negativity_detected_at_construction(self):
        with pytest.raises(NegativityDetected):
            mm_product([MMFunction(1, lambda x, y: x[0] - 0.5)], make_box((0.0,), (1.0,)))

    def test_negativity_detected_at_eval(self):
        # sampled check passes on the declared box, later eval outside trips it
        f = mm_product([x0()], make_box((0.0,), (1.0,)))
        with pytest.raises(NegativityDetected):
            f.eval(np.array([-1.0]), np.array([0.0]))


class TestRatio:
    def test_linear_over_affine(self):
        num = x0()
        den = MMFunction(1, lambda x, y: 1.0 + x[0])  # q(y) = 1 + y0 after the swap
        f = mm_ratio(num, den)
        assert f.eval(np.array([1.0]), np.array([0.0])) == 1.0

    def test_gee_representation_is_mm(self):
        from mmopt.problems import EnergyModel, gee_problem

        net = generate_channels(3, seed=12)
        energy = EnergyModel(phi=np.full(3, 5.0), p_circuit=1.0)
        objective = gee_problem(net, energy).objective
        report = check_mm_property(
            objective, make_box(np.zeros(3), np.ones(3)), samples=1000, rng_seed=5
        )
        assert report.violations == 0

    def test_nonpositive_denominator(self):
        f = mm_ratio(x0(), x0())
        with pytest.raises(NonpositiveDenominator):
            f.eval(np.array([1.0]), np.array([0.0]))


class TestRepresentationPerturbation:
    """Adding sum(x - y) keeps the monotonicity but loosens the corner bound."""

    def _perturbed(self, f):
        return MMFunction(
            f.dim, lambda x, y: f.eval(x, y) + float(np.sum(np.asarray(x) - np.asarray(y)))
        )

    def test_still_mm(self):
        net = generate_channels(2, seed=6)
        base = wsr_problem(net).objective
        box = make_box(np.zeros(2), np.ones(2))
        report = check_mm_property(self._perturbed(base), box, samples=1000, rng_seed=6)
        assert report.violations == 0

    def test_bound_loosens_by_box_width_sum(self):
        net = generate_channels(2, seed=6)
        base = wsr_problem(net).objective
        tilde = self._perturbed(base)
        box = make_box((0.1, 0.2), (0.8, 1.0))
        loosening = tilde.eval(box.s, box.r) - base.eval(box.s, box.r)
        assert loosening == pytest.approx(float(np.sum(box.s - box.r)), abs=1e-9)
        assert loosening >= 0.0


def test_wsr_diagonal_matches_hand_coded_rate_sum():
    net = generate_channels(3, seed=7)
    objective = wsr_problem(net).objective
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = rng.random(3)
        assert objective.eval(p, p) == pytest.approx(wsr_value(net, p), abs=1e-12)
