import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadrail.gaussian import (
    SAMPLE,
    GaussianChannel,
    GaussianState,
    GaussianStateError,
    GraphZ,
    MixedStateError,
    SqueezingParams,
    apply_unitary,
    coherent,
    displace,
    graph_from_state,
    graph_to_dot,
    graph_update,
    homodyne_condition,
    homodyne_vector,
    nullifier_residual,
    quadrature_filter,
    random_pure_state,
    squeezed_vacuum,
    state_from_graph,
    tensor,
    tmss,
    two_mode_cluster,
    vacuum,
    wavefunction_amplitude,
)
from quadrail.symplectic import beamsplitter, direct_sum, rotation, squeezer

seeds = st.integers(0, 2**32 - 1)


def conditional_reference(s: GaussianState, mode: int, theta: float, outcome: float):
    """Textbook Gaussian conditioning on the scalar ``c . x = outcome``."""
    c = homodyne_vector(s.n_modes, mode, theta)
    var = c @ s.cov @ c
    gain = s.cov @ c / var
    mean = s.mean + gain * (outcome - c @ s.mean)
    cov = s.cov - np.outer(gain, c @ s.cov)
    n = s.n_modes
    keep = [i for i in range(n) if i != mode]
    idx = keep + [i + n for i in keep]
    return mean[idx], cov[np.ix_(idx, idx)]


class TestStates:
    def test_vacuum(self):
        v = vacuum(3)
        np.testing.assert_array_equal(v.cov, np.eye(6) / 2)
        assert v.is_pure() and v.is_physical()

    def test_squeezed_vacuum(self):
        s = squeezed_vacuum(0.7)
        np.testing.assert_allclose(np.diag(s.cov), [np.exp(1.4) / 2, np.exp(-1.4) / 2])
        assert s.is_pure()

    def test_coherent_mean(self):
        c = coherent(1.0, -2.0)
        np.testing.assert_array_equal(c.mean, [1.0, -2.0])
        assert c.is_pure()

    def test_asymmetric_rejected(self):
        with pytest.raises(GaussianStateError):
            GaussianState(np.zeros(2), [[0.5, 0.1], [0.0, 0.5]])

    def test_shape_checks(self):
        with pytest.raises(GaussianStateError):
            GaussianState(np.zeros(3), np.eye(2))
        with pytest.raises(GaussianStateError):
            GaussianState(np.zeros(2), np.eye(2), labels=("a", "b"))

    def test_unphysical_detected(self):
        s = GaussianState(np.zeros(2), np.diag([0.1, 0.1]))
        assert not s.is_physical()

    def test_mixed_purity_defect(self):
        s = GaussianState(np.zeros(2), np.eye(2))
        assert s.purity_defect() == pytest.approx(3.0)
        assert not s.is_pure()

    def test_tensor_and_reduce(self):
        a, b = squeezed_vacuum(0.2, labels=["x"]), coherent(1.0, 2.0).relabel(["y"])
        t = tensor(a, b)
        assert t.labels == ("x", "y")
        assert t.reduce_labels(["y"]).allclose(b)
        assert t.reduce([0]).allclose(a)

    def test_clashing_labels_renumbered(self):
        assert tensor(vacuum(1), vacuum(1)).labels == (0, 1)
        with pytest.raises(GaussianStateError):
            GaussianState(np.zeros(4), np.eye(4) / 2, labels=("a", "a"))

    def test_json_round_trip_tuple_labels(self):
        s = random_pure_state(2, np.random.default_rng(0)).relabel([(0, 1, 2), (0, 1, 3)])
        back = GaussianState.from_json(json.loads(json.dumps(s.to_json())))
        assert back.labels == s.labels and back.allclose(s, atol=0)

    def test_tmss_correlations(self):
        s = tmss(0.6)
        sh = np.sinh(1.2) / 2
        assert s.cov[0, 1] == pytest.approx(sh)
        assert s.cov[2, 3] == pytest.approx(-sh)
        assert s.is_pure()

    def test_squeezing_params(self):
        sp = SqueezingParams(1.0)
        assert sp.epsilon == pytest.approx(1 / np.cosh(2))
        assert sp.t == pytest.approx(np.tanh(2))
        with pytest.raises(ValueError):
            SqueezingParams(0.0)


class TestGraphs:
    def test_two_mode_cluster_graph(self):
        r = 0.8
        z = graph_from_state(two_mode_cluster(r)).Z
        np.testing.assert_allclose(z, [[1j / np.cosh(2 * r), np.tanh(2 * r)], [np.tanh(2 * r), 1j / np.cosh(2 * r)]])

    def test_graph_requires_positive_imaginary_part(self):
        with pytest.raises(ValueError):
            GraphZ(np.array([[1.0 + 0j]]))
        with pytest.raises(ValueError):
            GraphZ(np.array([[1j, 0.5], [0.2, 1j]]))

    def test_mixed_state_has_no_graph(self):
        with pytest.raises(MixedStateError):
            graph_from_state(GaussianState(np.zeros(2), np.eye(2)))

    @given(seeds, st.integers(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, seed, n):
        s = random_pure_state(n, np.random.default_rng(seed))
        g = graph_from_state(s)
        back = state_from_graph(g, mean=s.mean)
        np.testing.assert_allclose(back.cov, s.cov, atol=1e-9)
        np.testing.assert_allclose(graph_from_state(back).Z, g.Z, atol=1e-9)

    @given(seeds, st.integers(1, 5))
    @settings(max_examples=40, deadline=None)
    def test_nullifiers_vanish(self, seed, n):
        s = random_pure_state(n, np.random.default_rng(seed), mean_scale=0.0)
        assert nullifier_residual(graph_from_state(s), s) < 1e-9

    def test_nullifier_detects_wrong_graph(self):
        s = squeezed_vacuum(0.5)
        assert nullifier_residual(GraphZ(np.array([[1j]])), s) > 1e-3

    @given(seeds, st.integers(1, 5))
    @settings(max_examples=40, deadline=None)
    def test_update_matches_covariance_path(self, seed, n):
        rng = np.random.default_rng(seed)
        s = random_pure_state(n, rng)
        u = rotation(rng.uniform(-3, 3)) @ squeezer(np.exp(rng.uniform(-1, 1)))
        big = direct_sum(u, *[rotation(rng.uniform(-3, 3)) for _ in range(n - 1)]) if n > 1 else u
        if n > 1:
            big = beamsplitter(0, n - 1, rng.uniform(-3, 3), n) @ big
        z1 = graph_update(graph_from_state(s), big).Z
        z2 = graph_from_state(apply_unitary(s, big)).Z
        np.testing.assert_allclose(z1, z2, atol=1e-9)

    def test_wavefunction_vacuum(self):
        g = GraphZ(np.array([[1j]]))
        assert wavefunction_amplitude(g, [0.0]) == pytest.approx(np.pi**-0.25)
        assert abs(wavefunction_amplitude(g, [1.0])) == pytest.approx(np.pi**-0.25 * np.exp(-0.5))

    def test_wavefunction_normalised(self):
        z = graph_from_state(squeezed_vacuum(0.4)).Z
        q = np.linspace(-12, 12, 4001)
        dens = np.array([abs(wavefunction_amplitude(GraphZ(z), [x])) ** 2 for x in q])
        assert dens.sum() * (q[1] - q[0]) == pytest.approx(1.0, abs=1e-8)


class TestHomodyne:
    @given(seeds, st.floats(-np.pi, np.pi), st.floats(-3, 3))
    @settings(max_examples=60, deadline=None)
    def test_matches_textbook_conditioning(self, seed, theta, m):
        s = random_pure_state(3, np.random.default_rng(seed))
        got, out = homodyne_condition(s, 1, theta, m)
        mean, cov = conditional_reference(s, 1, theta, m)
        assert out == m
        np.testing.assert_allclose(got.mean, mean, atol=1e-9)
        np.testing.assert_allclose(got.cov, cov, atol=1e-9)

    def test_angle_convention(self):
        np.testing.assert_array_equal(homodyne_vector(1, 0, 0.0), [0.0, 1.0])
        np.testing.assert_allclose(homodyne_vector(1, 0, -np.pi / 2), [1.0, 0.0], atol=1e-16)

    def test_uncorrelated_mode_untouched(self):
        a, b = squeezed_vacuum(0.3), coherent(0.5, 0.2).relabel([1])
        after, _ = homodyne_condition(tensor(a, b), 0, 0.4, 1.0)
        assert after.allclose(b)
        assert after.labels == (1,)

    def test_teleports_through_cluster(self):
        # measuring p on one half of a strongly squeezed pair fixes the other's q ~ -outcome / t
        r = 3.0
        s, _ = homodyne_condition(two_mode_cluster(r), 0, 0.0, 1.5)
        assert s.cov[0, 0] < 1e-2
        assert s.mean[0] == pytest.approx(1.5 / np.tanh(2 * r), rel=1e-2)

    def test_sampling_statistics(self):
        rng = np.random.default_rng(7)
        s = random_pure_state(2, rng)
        c = homodyne_vector(2, 0, 0.8)
        draws = np.array([homodyne_condition(s, 0, 0.8, SAMPLE, rng)[1] for _ in range(20000)])
        sd = np.sqrt(c @ s.cov @ c)
        assert abs(draws.mean() - c @ s.mean) < 4 * sd / np.sqrt(draws.size)
        assert draws.std() == pytest.approx(sd, rel=0.03)

    def test_seeded_sampling_is_deterministic(self):
        s = random_pure_state(2, np.random.default_rng(1))
        a = homodyne_condition(s, 0, 0.1, SAMPLE, np.random.default_rng(5))[1]
        b = homodyne_condition(s, 0, 0.1, SAMPLE, np.random.default_rng(5))[1]
        assert a == b

    def test_bad_policy_and_mode(self):
        with pytest.raises(ValueError):
            homodyne_condition(vacuum(1), 0, 0.0, "guess")
        with pytest.raises(IndexError):
            homodyne_condition(vacuum(1), 2, 0.0, 0.0)

    def test_pure_stays_pure(self):
        s = random_pure_state(4, np.random.default_rng(3))
        after, _ = homodyne_condition(s, 2, 1.1, 0.3)
        assert after.is_pure()


class TestFiltersAndChannels:
    def test_filter_on_vacuum(self):
        kappa = 0.3
        out = quadrature_filter(vacuum(1), 0, "q", kappa)
        assert out.cov[0, 0] == pytest.approx(1 / (2 * (1 + kappa)))
        assert out.cov[1, 1] == pytest.approx((1 + kappa) / 2)

    @given(seeds, st.floats(0.0, 5.0), st.sampled_from(["q", "p"]))
    @settings(max_examples=40, deadline=None)
    def test_filter_preserves_purity(self, seed, kappa, quad):
        s = random_pure_state(2, np.random.default_rng(seed))
        assert quadrature_filter(s, 1, quad, kappa).is_pure()

    def test_filter_shrinks_mean(self):
        s = displace(vacuum(1), [2.0, 0.0])
        out = quadrature_filter(s, 0, "q", 1.0)
        assert 0 < out.mean[0] < 2.0

    def test_filter_validation(self):
        with pytest.raises(ValueError):
            quadrature_filter(vacuum(1), 0, "x", 1.0)
        with pytest.raises(ValueError):
            quadrature_filter(vacuum(1), 0, "q", -1.0)

    def test_channel_unitary_only_linearisation_exact(self):
        ch = GaussianChannel(2).unitary(beamsplitter(0, 1)).unitary(squeezer(2.0), [1])
        x, d, y = ch.linearized()
        s = random_pure_state(2, np.random.default_rng(2))
        out = ch.apply(s)
        np.testing.assert_allclose(out.cov, x @ s.cov @ x.T + y, atol=1e-12)
        np.testing.assert_allclose(out.mean, x @ s.mean + d, atol=1e-12)

    def test_channel_then_and_size_checks(self):
        a = GaussianChannel(1).unitary(rotation(0.2))
        b = GaussianChannel(1).unitary(rotation(0.3))
        out = a.then(b).apply(coherent(1.0, 0.0))
        np.testing.assert_allclose(out.mean, rotation(0.5).matrix @ [1.0, 0.0])
        with pytest.raises(ValueError):
            a.apply(vacuum(2))
        with pytest.raises(ValueError):
            a.then(GaussianChannel(2))


class TestDot:
    def test_colours_and_inputs(self):
        z = np.array([[1j, 0.5, -0.25], [0.5, 1j, 0], [-0.25, 0, 1j]])
        text = graph_to_dot(GraphZ(z), labels=["a", "b", "c"], inputs=[2])
        assert "n0 -- n1 [color=blue" in text
        assert "n0 -- n2 [color=gold" in text
        assert "n1 -- n2" not in text
        assert 'n2 [label="c", fillcolor=green]' in text

    def test_complex_weight_dashed(self):
        z = np.array([[1j, 0.3 + 0.2j], [0.3 + 0.2j, 1j]])
        assert "style=dashed" in graph_to_dot(GraphZ(z))

    def test_layers(self):
        z = np.array([[1j, 0.5], [0.5, 1j]])
        text = graph_to_dot(GraphZ(z), layers=["top", "bottom"])
        assert "subgraph cluster_top" in text and "subgraph cluster_bottom" in text
