import math

import numpy as np
import pytest

from uext import divergences as dv
from uext import linalg as la
from uext import states

from conftest import random_density, random_tp_channel, rng

ALL_FAMILIES = [
    lambda a, b: dv.relative_entropy(a, b).value,
    lambda a, b: dv.bs_relative_entropy(a, b).value,
    lambda a, b: dv.max_relative_entropy(a, b).value,
    lambda a, b: dv.min_relative_entropy(a, b).value,
    lambda a, b: dv.petz_renyi(a, b, 1.5).value,
    lambda a, b: dv.sandwiched_renyi(a, b, 1.5).value,
    lambda a, b: dv.geometric_renyi(a, b, 1.5).value,
]


def classical_renyi(p, q, alpha):
    p, q = np.asarray(p, float), np.asarray(q, float)
    return math.log2(float(np.sum(p ** alpha * q ** (1 - alpha)))) / (alpha - 1)


def classical_kl(p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


@pytest.mark.parametrize("fam", ALL_FAMILIES)
def test_zero_on_equal_arguments(fam):
    rho = random_density(3, 50)
    assert abs(fam(rho, rho)) < 1e-9


@pytest.mark.parametrize("fam", ALL_FAMILIES[:3] + ALL_FAMILIES[4:])
@pytest.mark.parametrize("seed", [51, 52, 53])
def test_nonnegative_and_zero_iff_equal(fam, seed):
    a = random_density(3, seed)
    b = 0.8 * a + 0.2 * np.eye(3) / 3
    val = fam(a, b)
    assert val >= -1e-10
    assert np.linalg.norm(a - b) > 1e-8
    assert val > 1e-6


class TestPetz:
    def test_pure_vs_mixed(self):
        assert dv.petz_renyi(np.diag([1.0, 0.0]), np.eye(2) / 2, 2).value \
            == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.5, 2.0])
    def test_classical_reduction(self, alpha):
        p = np.array([0.6, 0.3, 0.1])
        q = np.array([0.2, 0.3, 0.5])
        got = dv.petz_renyi(np.diag(p), np.diag(q), alpha).value
        assert got == pytest.approx(classical_renyi(p, q, alpha), abs=1e-10)

    def test_support_violation_is_inf(self):
        omega = np.eye(2) / 2
        tau = np.diag([1.0, 0.0])
        assert dv.petz_renyi(omega, tau, 1.5).value == math.inf

    def test_alpha_one_routes_to_relative_entropy(self):
        a, b = random_density(3, 54), random_density(3, 55)
        assert dv.petz_renyi(a, b, 1.0).value == pytest.approx(
            dv.relative_entropy(a, b).value, abs=1e-12)


class TestSandwiched:
    def test_half_is_fidelity(self):
        a, b = random_density(3, 56), random_density(3, 57)
        expected = -2 * math.log2(la.root_fidelity(a, b))
        assert dv.sandwiched_renyi(a, b, 0.5).value == pytest.approx(
            expected, abs=1e-9)

    @pytest.mark.parametrize("alpha", [0.6, 1.4, 3.0])
    def test_classical_reduction(self, alpha):
        p = np.array([0.5, 0.3, 0.2])
        q = np.array([0.1, 0.4, 0.5])
        got = dv.sandwiched_renyi(np.diag(p), np.diag(q), alpha).value
        assert got == pytest.approx(classical_renyi(p, q, alpha), abs=1e-10)

    @pytest.mark.parametrize("seed", [58, 59, 60])
    def test_monotone_in_alpha(self, seed):
        a = random_density(3, seed)
        b = random_density(3, seed + 500)
        grid = [0.5, 0.75, 1.0, 1.5, 2.0, 5.0, math.inf]
        vals = [dv.sandwiched_renyi(a, b, al).value for al in grid]
        assert all(v2 >= v1 - 1e-9 for v1, v2 in zip(vals, vals[1:]))

    def test_alpha_limit_brackets_relative_entropy(self):
        a, b = random_density(3, 61), random_density(3, 62)
        lo = dv.sandwiched_renyi(a, b, 1 - 1e-4).value
        hi = dv.sandwiched_renyi(a, b, 1 + 1e-4).value
        mid = dv.relative_entropy(a, b).value
        assert lo - 1e-9 <= mid <= hi + 1e-9

    def test_large_alpha_approaches_dmax(self):
        a, b = random_density(3, 63), random_density(3, 64)
        b = 0.9 * b + 0.1 * np.eye(3) / 3
        assert abs(dv.sandwiched_renyi(a, b, 1e3).value
                   - dv.max_relative_entropy(a, b).value) < 0.01


class TestGeometric:
    @pytest.mark.parametrize("alpha", [0.5, 1.3, 2.0])
    def test_classical_reduction(self, alpha):
        p = np.array([0.7, 0.2, 0.1])
        q = np.array([0.3, 0.3, 0.4])
        got = dv.geometric_renyi(np.diag(p), np.diag(q), alpha).value
        assert got == pytest.approx(classical_renyi(p, q, alpha), abs=1e-10)

    @pytest.mark.parametrize("alpha", [1.3, 2.0])
    @pytest.mark.parametrize("seed", [65, 66])
    def test_dominates_sandwiched(self, alpha, seed):
        a = random_density(3, seed)
        b = 0.8 * random_density(3, seed + 500) + 0.2 * np.eye(3) / 3
        assert dv.geometric_renyi(a, b, alpha).value \
            >= dv.sandwiched_renyi(a, b, alpha).value - 1e-9

    def test_support_violation(self):
        assert dv.geometric_renyi(np.eye(2) / 2, np.diag([1.0, 0.0]),
                                  0.5).value == math.inf


class TestLemmaChain:
    @pytest.mark.parametrize("alpha", [0.3, 0.7])
    @pytest.mark.parametrize("seed", [67, 68])
    def test_low_alpha_chain(self, alpha, seed):
        a = random_density(3, seed)
        b = random_density(3, seed + 500)
        petz = dv.petz_renyi(a, b, alpha).value
        sand = dv.sandwiched_renyi(a, b, alpha).value
        assert alpha * petz <= sand + 1e-9

    @pytest.mark.parametrize("alpha", [1.3, 2.0])
    @pytest.mark.parametrize("seed", [69, 70])
    def test_high_alpha_chain(self, alpha, seed):
        a = random_density(3, seed)
        b = 0.8 * random_density(3, seed + 500) + 0.2 * np.eye(3) / 3
        petz = dv.petz_renyi(a, b, alpha).value
        sand = dv.sandwiched_renyi(a, b, alpha).value
        geo = dv.geometric_renyi(a, b, alpha).value
        assert sand <= petz + 1e-9
        assert sand <= geo + 1e-9


class TestRelativeEntropies:
    def test_maxent_mutual_information(self):
        phi = states.max_entangled(2).rho
        assert dv.relative_entropy(phi, np.eye(4) / 4).value \
            == pytest.approx(2.0, abs=1e-10)

    def test_classical_kl(self):
        p = np.array([0.6, 0.4])
        q = np.array([0.25, 0.75])
        assert dv.relative_entropy(np.diag(p), np.diag(q)).value \
            == pytest.approx(classical_kl(p, q), abs=1e-12)

    def test_support_violation(self):
        assert dv.relative_entropy(np.eye(2) / 2,
                                   np.diag([1.0, 0.0])).value == math.inf

    def test_bs_commuting_collapse(self):
        p = np.diag([0.6, 0.4])
        q = np.diag([0.3, 0.7])
        assert dv.bs_relative_entropy(p, q).value == pytest.approx(
            dv.relative_entropy(p, q).value, abs=1e-10)

    @pytest.mark.parametrize("seed", [71, 72, 73])
    def test_bs_dominates_relative_entropy(self, seed):
        a = random_density(3, seed)
        b = 0.8 * random_density(3, seed + 500) + 0.2 * np.eye(3) / 3
        assert dv.bs_relative_entropy(a, b).value \
            >= dv.relative_entropy(a, b).value - 1e-9

    def test_dmax_of_maxent(self):
        phi = states.max_entangled(2).rho
        assert dv.max_relative_entropy(phi, np.eye(4) / 4).value \
            == pytest.approx(2.0, abs=1e-10)

    @pytest.mark.parametrize("seed", [74, 75])
    def test_dmax_dominates_relative_entropy(self, seed):
        a = random_density(3, seed)
        b = 0.8 * random_density(3, seed + 500) + 0.2 * np.eye(3) / 3
        assert dv.max_relative_entropy(a, b).value \
            >= dv.relative_entropy(a, b).value - 1e-9

    def test_dmin_pure_vs_mixed(self):
        assert dv.min_relative_entropy(np.diag([1.0, 0.0]),
                                       np.eye(2) / 2).value \
            == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("seed", [76, 77])
    def test_dmin_below_sandwiched_half(self, seed):
        a = random_density(3, seed)
        b = random_density(3, seed + 500)
        assert dv.min_relative_entropy(a, b).value \
            <= dv.sandwiched_renyi(a, b, 0.5).value + 1e-9


@pytest.mark.parametrize("fam", ALL_FAMILIES)
@pytest.mark.parametrize("seed", range(20))
def test_data_processing(fam, seed):
    a = random_density(3, seed + 3000)
    b = 0.7 * random_density(3, seed + 4000) + 0.3 * np.eye(3) / 3
    kraus = random_tp_channel(3, 2, seed + 5000)
    apply = lambda x: sum(k @ x @ k.conj().T for k in kraus)
    assert fam(la.hermitianize(apply(a)), la.hermitianize(apply(b))) \
        <= fam(a, b) + 1e-8


class TestRenyiEntropy:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, math.inf])
    def test_maximally_mixed(self, alpha):
        assert dv.renyi_entropy(np.eye(3) / 3, alpha) \
            == pytest.approx(math.log2(3), abs=1e-10)

    def test_min_entropy(self):
        assert dv.renyi_entropy(np.diag([0.8, 0.2]), math.inf) \
            == pytest.approx(-math.log2(0.8), abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 0.7, 1.0, 3.0, math.inf])
    def test_pure(self, alpha):
        assert abs(dv.renyi_entropy(np.diag([1.0, 0.0]), alpha)) < 1e-10

    def test_zero_order_counts_rank(self):
        assert dv.renyi_entropy(np.diag([0.9, 0.1, 0.0]), 0.0) \
            == pytest.approx(1.0, abs=1e-12)

    def test_von_neumann(self):
        p = np.array([0.7, 0.3])
        expected = float(-np.sum(p * np.log2(p)))
        assert dv.renyi_entropy(np.diag(p), 1.0) == pytest.approx(
            expected, abs=1e-12)

    def test_rejects_negative_order(self):
        with pytest.raises(ValueError):
            dv.renyi_entropy(np.eye(2) / 2, -0.5)


class TestPetzMiClosedForm:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
    def test_maxent(self, alpha):
        psi = states.max_entangled(3)
        assert dv.petz_mi_closed_form(psi, alpha) == pytest.approx(
            2 * math.log2(3), abs=1e-10)

    def test_alpha_one_is_entanglement_entropy(self):
        psi = states.pure_from_schmidt([0.8, 0.2])
        expected = 2 * dv.renyi_entropy_spectrum([0.8, 0.2], 1.0)
        assert dv.petz_mi_closed_form(psi, 1.0) == pytest.approx(
            expected, abs=1e-12)

    def test_gamma_exponent(self):
        psi = states.pure_from_schmidt([0.6, 0.4])
        alpha = 0.5
        gamma = (2 - alpha) / alpha
        expected = 2 * dv.renyi_entropy_spectrum([0.6, 0.4], gamma)
        assert dv.petz_mi_closed_form(psi, alpha) == pytest.approx(
            expected, abs=1e-12)


class TestBruteMi:
    """Numerical minimization oracle against the closed forms."""

    def test_petz_matches_closed_form(self):
        psi = states.pure_from_schmidt([0.8, 0.2])
        got = dv.brute_mi(psi, "petz", 1.5, seed=0)
        assert got == pytest.approx(dv.petz_mi_closed_form(psi, 1.5),
                                    abs=1e-4)

    def test_sandwiched_matches_h_beta(self):
        psi = states.pure_from_schmidt([0.7, 0.3])
        alpha = 1.5
        beta = 1 / (2 * alpha - 1)
        expected = 2 * dv.renyi_entropy_spectrum([0.7, 0.3], beta)
        assert dv.brute_mi(psi, "sandwiched", alpha, seed=0) \
            == pytest.approx(expected, abs=1e-4)

    def test_geometric_matches_h_zero(self):
        psi = states.pure_from_schmidt([0.8, 0.2])
        expected = 2 * dv.renyi_entropy_spectrum([0.8, 0.2], 0.0)
        assert dv.brute_mi(psi, "geometric", 1.5, seed=0) \
            == pytest.approx(expected, abs=1e-2)
