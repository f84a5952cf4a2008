import json
import re

import numpy as np
import pytest

from quadrail.gaussian import GaussianState, graph_from_state, random_pure_state, squeezed_vacuum, vacuum
from quadrail.lattice import (
    LatticeError,
    MacronodeGrid,
    ModeMap,
    OccupancyError,
    attach_input,
    attach_inputs,
    build_qrl,
    distributed_state,
    distributed_to_physical_state,
    grid_to_dot,
    physical_to_distributed_state,
    project_to_square_lattice,
    qrl_state,
    slot_index,
)


def graph_of(state):
    return graph_from_state(state).Z


class TestGrid:
    def test_mode_indexing(self):
        g = MacronodeGrid(2, 3, 1.0)
        assert g.n_modes == 24
        assert g.mode_index((1, 2), "d") == 23
        assert g.mode_label(23) == (1, 2, 3)
        assert all(type(x) is int for x in g.mode_label(np.int64(5)))
        assert [g.mode_label(g.mode_index(mn, k)) for mn in g.macronodes() for k in "abcd"] == list(g.labels())

    def test_slot_names(self):
        assert [slot_index(s) for s in "abcd"] == [0, 1, 2, 3]
        with pytest.raises(LatticeError):
            slot_index("e")

    def test_open_neighbours(self):
        g = MacronodeGrid(2, 3, 1.0)
        assert g.neighbor((0, 0), "d") is None  # north of the top row
        assert g.neighbor((0, 0), "a") is None
        assert g.partner((0, 0), "c") == ((0, 1), 0)
        assert g.partner((1, 1), "d") == ((0, 1), 1)
        assert g.partner((0, 1), "b") == ((1, 1), 3)

    def test_edge_counts(self):
        assert len(MacronodeGrid(2, 3, 1.0).edges()) == 2 * 2 + 1 * 3
        assert len(MacronodeGrid(2, 3, 1.0, boundary="toroidal").edges()) == 2 * 6

    def test_toroidal_wraps(self):
        g = MacronodeGrid(2, 3, 1.0, boundary="toroidal")
        assert g.partner((0, 0), "a") == ((0, 2), 2)
        assert g.partner((0, 0), "d") == ((1, 0), 1)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(rows=0, cols=2, r=1.0), dict(rows=2, cols=2, r=-1.0), dict(rows=2, cols=2, r=1.0, boundary="mobius")],
    )
    def test_invalid_grid(self, kwargs):
        with pytest.raises(LatticeError):
            MacronodeGrid(**kwargs)

    def test_mode_limit(self):
        with pytest.raises(LatticeError, match="limit"):
            MacronodeGrid(30, 30, 1.0)
        assert MacronodeGrid(30, 30, 1.0, max_modes=4000).n_modes == 3600

    def test_check_macronode(self):
        with pytest.raises(LatticeError):
            MacronodeGrid(2, 2, 1.0).check_macronode((2, 0))

    def test_json_round_trip(self):
        g = attach_input(MacronodeGrid(2, 2, 1.5), (0, 1), "b", squeezed_vacuum(0.2), "in")
        back = MacronodeGrid.from_json(json.loads(json.dumps(g.to_json())))
        assert back.to_json() == g.to_json()


class TestInputs:
    def test_attach_and_occupancy(self):
        g = attach_inputs(MacronodeGrid(2, 2, 1.0), [((0, 0), "a"), ((0, 0), "b")], random_pure_state(2, np.random.default_rng(0)))
        assert g.occupancy((0, 0)) == 2
        assert set(g.input_slots()) == {((0, 0), 0), ((0, 0), 1)}

    def test_slot_collision(self):
        g = attach_input(MacronodeGrid(2, 2, 1.0), (0, 0), "a", vacuum(1))
        with pytest.raises(OccupancyError):
            attach_input(g, (0, 0), "a", vacuum(1))

    def test_shared_edge_rejected(self):
        g = attach_input(MacronodeGrid(2, 2, 1.0), (0, 0), "c", vacuum(1))
        with pytest.raises(OccupancyError, match="share a lattice edge"):
            attach_input(g, (0, 1), "a", vacuum(1))

    def test_gate_macronode_limit(self):
        g = MacronodeGrid(3, 3, 1.0)
        g = attach_inputs(g, [((1, 1), "a"), ((1, 1), "b")], vacuum(2))
        with pytest.raises(OccupancyError, match="limit 2"):
            attach_input(g, (1, 1), "c", vacuum(1))

    def test_readout_macronode_holds_four(self):
        g = attach_inputs(MacronodeGrid(1, 1, 1.0), [((0, 0), s) for s in "abcd"], vacuum(4), readout=True)
        assert g.occupancy((0, 0)) == 4

    def test_input_state_lands_in_distributed_picture(self):
        inp = random_pure_state(1, np.random.default_rng(4))
        g = attach_input(MacronodeGrid(2, 2, 2.0), (1, 0), "c", inp)
        d = distributed_state(g)
        got = d.reduce([g.mode_index((1, 0), "c")])
        assert got.allclose(inp, atol=1e-12)

    def test_partner_of_input_is_padded(self):
        g = attach_input(MacronodeGrid(2, 2, 2.0), (1, 0), "c", vacuum(1))
        d = distributed_state(g)
        pad = d.reduce([g.mode_index((1, 1), "a")])
        assert pad.allclose(squeezed_vacuum(2.0).relabel(pad.labels), atol=1e-12)


class TestLatticeState:
    def test_sizes_and_purity(self):
        state, grid = build_qrl(2, 2, 3.0)
        assert state.n_modes == 16 and grid.n_modes == 16
        assert state.is_pure()

    def test_distributed_pairs(self):
        r = 1.0
        g = MacronodeGrid(2, 3, r)
        z = graph_of(distributed_state(g))
        for (m1, k1), (m2, k2) in g.edges():
            assert z[g.mode_index(m1, k1), g.mode_index(m2, k2)] == pytest.approx(np.tanh(2 * r))
        real = np.abs(z.real) > 1e-12
        assert real.sum() == 2 * len(g.edges())

    def test_open_boundary_slots_squeezed(self):
        r = 1.0
        g = MacronodeGrid(1, 1, r)
        z = graph_of(distributed_state(g))
        np.testing.assert_allclose(z, 1j * np.exp(-2 * r) * np.eye(4), atol=1e-12)

    def test_physical_picture_is_quad_rail(self):
        r = 2.0
        g = MacronodeGrid(3, 3, r)
        z = graph_of(qrl_state(g))
        i = g.mode_index((1, 1), 0)
        neighbours = {g.mode_label(j)[:2] for j in np.nonzero(np.abs(z[i].real) > 1e-9)[0]}
        assert neighbours == {(0, 1), (1, 0), (1, 2), (2, 1)}
        weights = np.abs(z[i].real[np.abs(z[i].real) > 1e-9])
        assert weights.size == 16
        np.testing.assert_allclose(weights, np.tanh(2 * r) / 4)

    def test_pictures_invert(self):
        g = attach_input(MacronodeGrid(2, 2, 1.0), (0, 0), "a", random_pure_state(1, np.random.default_rng(2)))
        phys = qrl_state(g)
        back = distributed_to_physical_state(physical_to_distributed_state(phys, g), g)
        assert back.allclose(phys, atol=1e-12)
        assert physical_to_distributed_state(phys, g).allclose(distributed_state(g), atol=1e-12)

    def test_mode_map_is_blockwise_foursplitter(self):
        g = MacronodeGrid(1, 2, 1.0)
        mm = ModeMap(g)
        assert (mm.physical_to_distributed() @ mm.distributed_to_physical()).allclose(
            mm.physical_to_distributed().__class__(np.eye(16))
        )
        st = mm.distributed_to_physical()
        np.testing.assert_allclose(qrl_state(g).cov, st.matrix @ distributed_state(g).cov @ st.matrix.T, atol=1e-12)


class TestProjection:
    def test_three_by_three(self):
        state, grid = build_qrl(3, 3, 3.0)
        _, rep = project_to_square_lattice(state, grid)
        assert len(rep.lattice_edges) == 12
        assert rep.expected_weight == pytest.approx(np.tanh(6) / 4)
        assert rep.max_weight_error < 1e-9
        assert rep.max_off_lattice < 1e-9

    def test_weight_follows_squeezing(self):
        state, grid = build_qrl(2, 2, 1.0)
        _, rep = project_to_square_lattice(state, grid)
        assert rep.max_weight_error < 1e-9
        assert rep.expected_weight == pytest.approx(np.tanh(2) / 4)

    def test_rejects_inputs(self):
        g = attach_input(MacronodeGrid(2, 2, 1.0), (0, 0), "a", vacuum(1))
        with pytest.raises(LatticeError):
            project_to_square_lattice(qrl_state(g), g)


class TestDot:
    def test_build_2x2_dot_has_four_layers(self):
        text = grid_to_dot(MacronodeGrid(2, 2, 3.0))
        assert text.count("subgraph cluster_mode") == 4
        assert len(re.findall(r"^\s*n\d+ \[label=", text, re.M)) == 16

    def test_distributed_picture_marks_inputs(self):
        g = attach_input(MacronodeGrid(1, 2, 1.0), (0, 0), "a", vacuum(1))
        text = grid_to_dot(g, "distributed")
        assert 'label="0,0:a", fillcolor=green' in text

    def test_bad_picture(self):
        with pytest.raises(LatticeError):
            grid_to_dot(MacronodeGrid(1, 1, 1.0), "momentum")


def test_zero_covariance_input_is_allowed():
    g = attach_input(MacronodeGrid(1, 2, 1.0), (0, 0), "a", GaussianState(np.zeros(2), np.zeros((2, 2))))
    assert not qrl_state(g).is_physical()
