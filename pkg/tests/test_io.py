import json

import numpy as np
import pytest

from quadrail import io
from quadrail.compiler import attach_program_inputs, compile
from quadrail.gaussian import graph_from_state, random_pure_state
from quadrail.lattice import MacronodeGrid, attach_input
from quadrail.macronode import simulate
from quadrail.verify import crossing_program


@pytest.fixture
def artifacts():
    grid, sched, route = compile(crossing_program(), (5, 5), 3.0)
    state = random_pure_state(2, np.random.default_rng(0))
    full = attach_program_inputs(grid, route, state)
    final, trace = simulate(full, sched, seed=1)
    return {
        "state": final.to_json(),
        "graph": graph_from_state(state).to_json(),
        "grid": full.to_json(),
        "program": crossing_program().to_json(),
        "schedule": sched.to_json(),
        "trace": trace.to_json(),
        "route": route.to_json(),
    }


class TestSchemas:
    @pytest.mark.parametrize("kind", io.KINDS)
    def test_artifacts_validate(self, artifacts, kind):
        io.validate(json.loads(io.dumps(artifacts[kind])), kind)

    @pytest.mark.parametrize("kind", io.KINDS)
    def test_schema_is_loadable(self, kind):
        assert io.schema(kind)["$id"] == f"quadrail/{kind}.json"

    def test_unknown_kind(self):
        with pytest.raises(io.ArtifactError):
            io.schema("photon")

    @pytest.mark.parametrize(
        "kind,mutate",
        [
            ("state", lambda d: d.pop("cov")),
            ("grid", lambda d: d.update(boundary="spherical")),
            ("schedule", lambda d: d["records"][0].update(intent="guess")),
            ("program", lambda d: d.update(n_wires=0)),
            ("trace", lambda d: d.pop("steps")),
        ],
    )
    def test_rejects_bad(self, artifacts, kind, mutate):
        data = json.loads(json.dumps(artifacts[kind]))
        mutate(data)
        with pytest.raises(io.ArtifactError):
            io.validate(data, kind)


class TestFiles:
    def test_dumps_deterministic(self, artifacts):
        a = io.dumps(artifacts["trace"])
        assert a == io.dumps(json.loads(a))
        assert a.endswith("\n")

    def test_dumps_rejects_nan(self):
        with pytest.raises(ValueError):
            io.dumps({"x": float("nan")})

    def test_round_trip(self, tmp_path):
        grid = attach_input(MacronodeGrid(2, 2, 1.0), (0, 0), "b", random_pure_state(1, np.random.default_rng(3)))
        path = io.save(tmp_path / "g" / "grid.json", grid, "grid")
        assert io.load(path, "grid").to_json() == grid.to_json()

    def test_bad_json_text(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{not json")
        with pytest.raises(io.ArtifactError, match="not valid JSON"):
            io.read_json(p)

    def test_construction_errors_are_artifact_errors(self, tmp_path):
        data = {"n_modes": 1, "mean": [0.0, 0.0], "cov": [[1.0, 0.3], [0.0, 1.0]]}
        p = tmp_path / "s.json"
        p.write_text(json.dumps(data))
        with pytest.raises(io.ArtifactError):
            io.load(p, "state")
