import numpy as np
import pytest

from uext import linalg as la
from uext import states
from uext.states import BipartiteState, KrausChannel

from conftest import random_tp_channel, random_unitary, rng


def assert_valid_state(s: BipartiteState):
    assert s.rho.shape == (s.d_a * s.d_b, s.d_a * s.d_b)
    assert la.is_psd(s.rho)
    assert abs(np.trace(s.rho) - 1.0) < 1e-10
    assert np.allclose(s.rho, s.rho.conj().T, atol=1e-12)


@pytest.mark.parametrize("factory", [
    lambda: states.max_entangled(2),
    lambda: states.max_entangled(3),
    lambda: states.isotropic(2, 0.37),
    lambda: states.isotropic(3, 0.9),
    lambda: states.erased(0.0),
    lambda: states.erased(0.42),
    lambda: states.erased(1.0),
    lambda: states.pure_from_schmidt([0.8, 0.2]),
    lambda: states.pure_from_schmidt([0.5, 0.3, 0.2], seed=5),
    lambda: states.random_bipartite_state(2, 3, seed=9),
    lambda: states.private_state(2, seed=3).state,
])
def test_factories_produce_valid_states(factory):
    assert_valid_state(factory())


class TestBipartiteState:
    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            BipartiteState(np.eye(4), 2, 2)

    def test_rejects_non_psd(self):
        m = np.diag([0.75, 0.75, -0.25, -0.25])
        with pytest.raises(ValueError):
            BipartiteState(m, 2, 2)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            BipartiteState(np.eye(4) / 4, 2, 3)

    def test_marginals(self):
        s = states.random_bipartite_state(2, 3, seed=1)
        assert np.allclose(s.marginal_a(),
                           la.partial_trace(s.rho, (2, 3), (1,)), atol=1e-13)
        assert np.allclose(s.marginal_b(),
                           la.partial_trace(s.rho, (2, 3), (0,)), atol=1e-13)


class TestMaxEntangled:
    def test_marginal(self):
        assert np.allclose(states.max_entangled(2).marginal_a(),
                           np.eye(2) / 2, atol=1e-12)

    def test_entries(self):
        m = states.max_entangled(2).rho
        expected = np.zeros((4, 4))
        for i in (0, 3):
            for j in (0, 3):
                expected[i, j] = 0.5
        assert np.allclose(m, expected, atol=1e-12)

    def test_purity(self):
        assert states.max_entangled(3).purity() == pytest.approx(1.0,
                                                                 abs=1e-12)

    def test_rejects_small_d(self):
        with pytest.raises(ValueError):
            states.max_entangled(1)


class TestIsotropic:
    def test_r1_is_maxent(self):
        assert np.allclose(states.isotropic(2, 1.0).rho,
                           states.max_entangled(2).rho, atol=1e-12)

    def test_balanced_point_is_maximally_mixed(self):
        assert np.allclose(states.isotropic(2, 0.25).rho, np.eye(4) / 4,
                           atol=1e-12)

    def test_spectrum(self):
        vals = np.sort(np.linalg.eigvalsh(states.isotropic(2, 0.7).rho))
        assert np.allclose(vals, [0.1, 0.1, 0.1, 0.7], atol=1e-12)

    def test_affine_in_r(self):
        a, b = states.isotropic(3, 0.2).rho, states.isotropic(3, 0.8).rho
        mid = states.isotropic(3, 0.5).rho
        assert np.allclose(0.5 * a + 0.5 * b, mid, atol=1e-12)

    def test_twirl_invariance(self):
        s = states.isotropic(2, 0.63)
        for seed in range(20):
            u = random_unitary(2, seed)
            tw = la.kron(u, u.conj())
            assert np.max(np.abs(tw @ s.rho @ tw.conj().T - s.rho)) < 1e-9

    def test_range_check(self):
        with pytest.raises(ValueError):
            states.isotropic(2, 1.2)


class TestErased:
    def test_endpoint_zero(self):
        phi = states.max_entangled(2).rho
        embedded = np.zeros((6, 6), dtype=complex)
        # qubit A = first two levels of the qutrit A', so the 2x2-indexed
        # entries of phi keep their positions inside the 3x2 layout
        embedded[:4, :4] = phi
        assert np.allclose(states.erased(0.0).rho, embedded, atol=1e-12)

    def test_endpoint_one(self):
        flag = np.zeros((3, 3))
        flag[2, 2] = 1.0
        assert np.allclose(states.erased(1.0).rho,
                           la.kron(flag, np.eye(2) / 2), atol=1e-12)

    def test_marginal(self):
        assert np.allclose(
            la.partial_trace(states.erased(0.5).rho, (3, 2), (1,)),
            np.diag([0.25, 0.25, 0.5]), atol=1e-12)

    def test_block_structure(self):
        eps = 0.37
        rho = states.erased(eps).rho
        flag_block = rho[4:, 4:]
        assert np.allclose(flag_block, eps * np.eye(2) / 2, atol=1e-12)
        assert np.max(np.abs(rho[:4, 4:])) < 1e-12

    def test_range_check(self):
        with pytest.raises(ValueError):
            states.erased(-0.1)


class TestPureFromSchmidt:
    def test_product(self):
        s = states.pure_from_schmidt([1.0])
        assert s.purity() == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.matrix_rank(s.marginal_a()) == 1

    def test_flat_is_maxent_marginal(self):
        s = states.pure_from_schmidt([0.5, 0.5])
        assert np.allclose(s.marginal_a(), np.eye(2) / 2, atol=1e-12)

    @pytest.mark.parametrize("seed", [None, 7])
    def test_marginal_spectrum(self, seed):
        s = states.pure_from_schmidt([0.8, 0.2], seed=seed)
        vals = np.sort(np.linalg.eigvalsh(s.marginal_a()))
        assert np.allclose(vals, [0.2, 0.8], atol=1e-10)

    def test_rejects_non_distribution(self):
        with pytest.raises(ValueError):
            states.pure_from_schmidt([0.8, 0.3])
        with pytest.raises(ValueError):
            states.pure_from_schmidt([1.2, -0.2])


class TestPrivateState:
    def test_trivial_twist_is_product(self):
        eye = np.eye(4, dtype=complex)
        gamma = states.private_state(2, twist=[eye] * 4)
        phi = states.max_entangled(2).rho
        shield = np.eye(4) / 4
        expected = la.permute_systems(la.kron(phi, shield), (2, 2, 2, 2),
                                      (0, 2, 1, 3))
        assert np.allclose(gamma.state.rho, expected, atol=1e-12)

    def test_key_measurement_statistics(self):
        gamma = states.private_state(2, seed=8)
        rho = gamma.state.rho
        # A-key is the slow factor of AA', B-key the slow factor of BB'
        probs = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                proj = la.kron(np.diag(np.eye(2)[i]),
                               la.kron(np.eye(2),
                                       la.kron(np.diag(np.eye(2)[j]),
                                               np.eye(2))))
                probs[i, j] = float(np.real(np.trace(proj @ rho)))
        assert np.allclose(probs, np.diag([0.5, 0.5]), atol=1e-10)

    def test_untwisting_recovers_product(self):
        gamma = states.private_state(2, seed=12)
        k, (dsa, dsb) = gamma.key_dim, gamma.shield_dims
        for u in gamma.twist:
            assert np.allclose(u @ u.conj().T, np.eye(dsa * dsb), atol=1e-10)
        # global twisting unitary on (A, B, A'B') ordering
        big = np.zeros((k * k * dsa * dsb,) * 2, dtype=complex)
        for i in range(k):
            for j in range(k):
                block = np.zeros((k, k))
                block[i, i] = 1.0
                blockb = np.zeros((k, k))
                blockb[j, j] = 1.0
                big += la.kron(block, la.kron(blockb, gamma.twist[i * k + j]))
        # undo the (AA'):(BB') grouping, untwist, compare to the product
        rho_abs = la.permute_systems(gamma.state.rho, (k, dsa, k, dsb),
                                     (0, 2, 1, 3))
        untwisted = big.conj().T @ rho_abs @ big
        product = la.kron(states.max_entangled(k).rho,
                          np.eye(dsa * dsb) / (dsa * dsb))
        assert np.max(np.abs(untwisted - product)) < 1e-10


class TestPurification:
    def test_maximally_mixed(self):
        v = states.purification(np.eye(3) / 3)
        rho = np.outer(v, v.conj())
        assert np.allclose(la.partial_trace(rho, (3, 3), (1,)), np.eye(3) / 3,
                           atol=1e-10)

    def test_pure_input_trivial_environment(self):
        v = np.array([1.0, 0.0])
        out = states.purification(np.outer(v, v))
        assert out.shape == (2,)

    def test_rank_two(self):
        v = states.purification(np.diag([0.7, 0.3]))
        rho = np.outer(v, v.conj())
        dims = (2, v.size // 2)
        assert np.allclose(la.partial_trace(rho, dims, (1,)),
                           np.diag([0.7, 0.3]), atol=1e-10)


class TestRandomState:
    def test_rank_one_is_pure(self):
        h = states.random_state(3, rank=1, seed=4)
        assert float(np.real(np.trace(h @ h))) == pytest.approx(1.0,
                                                                abs=1e-12)

    def test_unit_trace(self):
        h = states.random_state(4, seed=5)
        assert abs(np.trace(h) - 1.0) < 1e-13

    def test_seed_determinism(self):
        a = states.random_state(2, seed=42)
        b = states.random_state(2, seed=42)
        assert a.tobytes() == b.tobytes()

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            states.random_state(2, rank=3, seed=0)


def ppt_violation(rho, d_a, d_b):
    pt = rho.reshape(d_a, d_b, d_a, d_b).transpose(0, 3, 2, 1)
    return float(np.min(np.linalg.eigvalsh(
        pt.reshape(d_a * d_b, d_a * d_b))))


class TestOneLoccInstrument:
    def test_identity(self):
        chans = states.one_locc_instrument([[[np.eye(2)]]], [[[np.eye(2)]]])
        assert len(chans) == 1
        s = states.max_entangled(2)
        out, p = states.apply_channel(chans[0], s, side="both")
        assert p == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(out.rho, s.rho, atol=1e-12)

    def test_measure_and_discard_breaks_entanglement(self):
        ket = np.eye(2)
        f_maps = [[[np.outer(ket[x], ket[x])] for x in range(2)]]
        g_channels = [[[np.eye(2)] for _ in range(2)]]
        chan = states.one_locc_instrument(f_maps, g_channels)[0]
        out, _ = states.apply_channel(chan, states.max_entangled(2),
                                      side="both")
        assert ppt_violation(out.rho, 2, 2) > -1e-12

    def test_depolarize_gives_isotropic(self):
        lam = 0.7
        paulis = [np.eye(2), np.array([[0, 1], [1, 0]]),
                  np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
        kraus = [np.sqrt(lam) * np.eye(2)] + \
                [np.sqrt((1 - lam) / 4) * np.asarray(p, dtype=complex)
                 for p in paulis]
        f_maps = [[kraus]]
        g_channels = [[[np.eye(2)]]]
        chan = states.one_locc_instrument(f_maps, g_channels)[0]
        out, _ = states.apply_channel(chan, states.max_entangled(2),
                                      side="both")
        # depolarizing one side of the ebit lands on the isotropic family
        r = lam + (1 - lam) / 4
        assert np.allclose(out.rho, states.isotropic(2, r).rho, atol=1e-12)

    def test_outcomes_sum_to_tp(self):
        ket = np.eye(2)
        f_maps = [[[np.outer(ket[y], ket[y])]] for y in range(2)]
        g_channels = [[[np.eye(2)]] for _ in range(2)]
        chans = states.one_locc_instrument(f_maps, g_channels)
        total = sum(k.conj().T @ k for ch in chans for k in ch.kraus)
        assert np.allclose(total, np.eye(4), atol=1e-9)

    def test_rejects_non_tp(self):
        with pytest.raises(ValueError):
            states.one_locc_instrument([[[0.5 * np.eye(2)]]], [[[np.eye(2)]]])


class TestApplyChannel:
    def test_identity(self, two_qubit_pair):
        chan = KrausChannel((np.eye(2),))
        out, p = states.apply_channel(chan, two_qubit_pair, side="a")
        assert np.allclose(out.rho, two_qubit_pair.rho, atol=1e-12)
        assert p == pytest.approx(1.0)

    def test_full_depolarizing_on_b(self, two_qubit_pair):
        kraus = tuple(np.outer(np.eye(2)[i], np.eye(2)[j]) / np.sqrt(2)
                      for i in range(2) for j in range(2))
        chan = KrausChannel(kraus)
        out, _ = states.apply_channel(chan, two_qubit_pair, side="b")
        expected = la.kron(two_qubit_pair.marginal_a(), np.eye(2) / 2)
        assert np.allclose(out.rho, expected, atol=1e-12)

    @pytest.mark.parametrize("seed", [31, 32])
    def test_trace_preserved(self, seed):
        s = states.random_bipartite_state(2, 2, seed=seed)
        chan = KrausChannel(tuple(random_tp_channel(2, 3, seed)))
        out, p = states.apply_channel(chan, s, side="a")
        assert abs(np.trace(out.rho) - 1.0) < 1e-12
        assert p == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self, two_qubit_pair):
        chan = KrausChannel((np.eye(3),))
        with pytest.raises(ValueError):
            states.apply_channel(chan, two_qubit_pair, side="a")
