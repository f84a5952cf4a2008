import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadrail.symplectic import (
    FOURSPLITTER_BLOCK,
    SymplecticTransform,
    beamsplitter,
    complex_to_phase_space,
    compose,
    conjugate_by_foursplitter,
    direct_sum,
    displacement,
    embed,
    foursplitter,
    identity,
    is_symplectic,
    omega,
    permutation,
    rotation,
    squeezer,
    swap,
)

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)
log_squeeze = st.floats(-2.0, 2.0, allow_nan=False)


class TestConstructors:
    def test_rotation_zero_is_identity(self):
        assert rotation(0.0).allclose(identity(1))

    def test_rotation_quarter_turn(self):
        # R(pi/2): q -> -p, p -> q
        np.testing.assert_allclose(rotation(np.pi / 2).matrix, [[0, -1], [1, 0]], atol=1e-15)

    def test_squeezer_diag(self):
        np.testing.assert_allclose(squeezer(2.0).matrix, np.diag([2.0, 0.5]))

    def test_squeezer_zero_divergent(self):
        with pytest.raises(ZeroDivisionError):
            squeezer(0.0)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            rotation(np.nan)
        with pytest.raises(ValueError):
            squeezer(np.inf)

    def test_non_symplectic_matrix_rejected(self):
        with pytest.raises(ValueError):
            SymplecticTransform(np.diag([2.0, 2.0]))

    def test_beamsplitter_needs_distinct_modes(self):
        with pytest.raises(ValueError):
            beamsplitter(1, 1, n_modes=3)

    def test_beamsplitter_inverse_is_reversed(self):
        b = beamsplitter(0, 2, 0.37, n_modes=3)
        assert (beamsplitter(2, 0, 0.37, n_modes=3) @ b).allclose(identity(3))
        assert b.inverse().allclose(beamsplitter(2, 0, 0.37, n_modes=3))

    @given(angles, log_squeeze, angles)
    @settings(max_examples=50, deadline=None)
    def test_every_constructor_symplectic(self, a, s, b):
        for t in (rotation(a), squeezer(np.exp(s)), beamsplitter(0, 1, b), rotation(a) @ squeezer(-np.exp(s))):
            ok, res = is_symplectic(t)
            assert ok, res

    def test_omega_shape(self):
        om = omega(2)
        assert om.shape == (4, 4)
        np.testing.assert_array_equal(om @ om, -np.eye(4))


class TestComposition:
    def test_rotation_group_law(self):
        assert compose(rotation(0.3), rotation(1.1)).allclose(rotation(1.4))

    def test_compose_applies_right_first(self):
        a, b = rotation(0.5), squeezer(3.0)
        np.testing.assert_allclose(compose(a, b).matrix, a.matrix @ b.matrix)

    def test_compose_displacements(self):
        a = SymplecticTransform(squeezer(2.0).matrix, [1.0, 0.0])
        b = displacement([0.5, 1.0])
        c = compose(a, b)
        np.testing.assert_allclose(c.displacement, a.matrix @ b.displacement + a.displacement)

    def test_compose_size_mismatch(self):
        with pytest.raises(ValueError):
            compose(identity(1), identity(2))

    def test_embed_leaves_other_modes(self):
        big = embed(beamsplitter(0, 1), (2, 5), 8)
        keep = [i for i in range(8) if i not in (2, 5)]
        idx = keep + [i + 8 for i in keep]
        np.testing.assert_array_equal(big.matrix[np.ix_(idx, idx)], np.eye(len(idx)))
        assert is_symplectic(big)[0]

    def test_embed_checks(self):
        with pytest.raises(ValueError):
            embed(rotation(0.1), (0, 1), 3)
        with pytest.raises(IndexError):
            embed(rotation(0.1), (4,), 3)

    def test_inverse(self, rng):
        t = beamsplitter(0, 1, 0.4) @ direct_sum(squeezer(1.7), rotation(2.1))
        t = SymplecticTransform(t.matrix, rng.normal(size=4))
        assert (t.inverse() @ t).allclose(identity(2))

    def test_json_round_trip(self):
        t = SymplecticTransform(foursplitter().matrix, np.arange(8.0))
        back = SymplecticTransform.from_json(json.loads(json.dumps(t.to_json())))
        assert back.allclose(t, atol=0)

    def test_complex_displacement_convention(self):
        np.testing.assert_allclose(complex_to_phase_space(1 + 2j), np.sqrt(2) * np.array([1.0, 2.0]))


class TestFoursplitter:
    def test_block_values(self):
        expected = 0.5 * np.array([[1, -1, -1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, 1, 1, 1]])
        np.testing.assert_array_equal(FOURSPLITTER_BLOCK, expected)
        a = foursplitter().matrix
        np.testing.assert_array_equal(a[:4, :4], expected)
        np.testing.assert_array_equal(a[4:, 4:], expected)
        np.testing.assert_array_equal(a[:4, 4:], 0)

    def test_inverse_is_identity(self):
        a = foursplitter()
        assert (a.inverse() @ a).allclose(identity(4))

    def test_residual(self):
        assert is_symplectic(foursplitter())[1] < 1e-12

    @pytest.mark.parametrize("order", [((0, 1), (2, 3), (0, 2), (1, 3)), ((0, 2), (1, 3), (0, 1), (2, 3))])
    def test_four_beamsplitter_decompositions(self, order):
        prod = identity(4)
        for i, j in order:
            prod = prod @ beamsplitter(i, j, n_modes=4)
        assert prod.allclose(foursplitter(), atol=1e-12)

    def test_embedded_on_other_modes(self):
        a = foursplitter(5, 1, 3, 0, n_modes=6)
        assert is_symplectic(a)[0]
        assert a.matrix[2, 2] == 1.0 and a.matrix[4, 4] == 1.0

    @given(angles)
    @settings(max_examples=25, deadline=None)
    def test_commutes_with_equal_rotations(self, theta):
        rr = direct_sum(*[rotation(theta)] * 4).matrix
        fs = foursplitter().matrix
        assert np.abs(fs @ rr - rr @ fs).max() < 1e-12

    def test_unequal_rotations_do_not_commute(self):
        rr = direct_sum(rotation(0.1), rotation(0.2), rotation(0.1), rotation(0.1)).matrix
        fs = foursplitter().matrix
        assert np.abs(fs @ rr - rr @ fs).max() > 1e-3


class TestBeamsplitterCommutation:
    @given(angles, log_squeeze, angles, angles)
    @settings(max_examples=60, deadline=None)
    def test_commutes_with_same_local_gate(self, r1, s, r2, bs_angle):
        u = rotation(r1) @ squeezer(np.exp(s)) @ rotation(r2)
        uu = direct_sum(u, u).matrix
        b = beamsplitter(0, 1, bs_angle).matrix
        assert np.abs(b @ uu - uu @ b).max() < 1e-12 * max(1.0, np.abs(uu).max())

    def test_different_local_gates_do_not_commute(self):
        uu = direct_sum(squeezer(2.0), identity(1)).matrix
        b = beamsplitter(0, 1).matrix
        assert np.abs(b @ uu - uu @ b).max() > 0.1


class TestPermutations:
    def test_identity_permutation(self):
        assert permutation([0, 1, 2]).allclose(identity(3))

    def test_non_bijection(self):
        with pytest.raises(ValueError):
            permutation([0, 0, 1])

    def test_block_structure(self):
        p = permutation([2, 0, 1]).matrix
        np.testing.assert_array_equal(p[:3, :3], p[3:, 3:])
        np.testing.assert_array_equal(p[:3, 3:], 0)

    def test_moves_mode(self):
        # mode 0 goes to position 2
        p = permutation([2, 0, 1]).matrix
        x = np.zeros(6)
        x[0] = 1
        assert (p @ x)[2] == 1

    def test_conjugation_first_and_second(self):
        assert conjugate_by_foursplitter(swap(0, 1, 4)).allclose(swap(1, 3, 4))
        assert conjugate_by_foursplitter(swap(0, 2, 4)).allclose(swap(2, 3, 4))

    def test_conjugation_third_has_phase_flips(self):
        flips = embed(rotation(np.pi), [1], 4) @ embed(rotation(np.pi), [2], 4)
        got = conjugate_by_foursplitter(swap(0, 3, 4))
        assert got.allclose(swap(1, 2, 4) @ flips)
        assert got.allclose(flips @ swap(1, 2, 4))

    def test_conjugation_identity(self):
        assert conjugate_by_foursplitter(identity(4)).allclose(identity(4))

    def test_conjugation_needs_four_modes(self):
        with pytest.raises(ValueError):
            conjugate_by_foursplitter(identity(3))
