"""JSON artifacts: schema validation, deterministic serialisation and file helpers."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

from .compiler import CircuitProgram
from .gaussian import GaussianState, GraphZ
from .lattice import MacronodeGrid
from .macronode import MeasurementSchedule

KINDS = ("state", "graph", "grid", "program", "schedule", "trace", "route")


class ArtifactError(ValueError):
    """Malformed or schema-invalid artifact."""


@lru_cache(maxsize=None)
def schema(kind: str) -> dict:
    if kind not in KINDS:
        raise ArtifactError(f"unknown artifact kind {kind!r}; expected one of {', '.join(KINDS)}")
    text = resources.files("quadrail").joinpath("schemas", f"{kind}.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry() -> Registry:
    pairs = []
    for kind in KINDS:
        res = Resource.from_contents(schema(kind))
        # schemas refer to each other by bare file name
        pairs += [(f"quadrail/{kind}.json", res), (f"{kind}.json", res)]
    return Registry().with_resources(pairs)


def validate(data, kind: str) -> None:
    """Raise :class:`ArtifactError` unless ``data`` matches the ``kind`` schema."""
    validator = jsonschema.Draft202012Validator(schema(kind), registry=_registry())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ArtifactError(f"invalid {kind} JSON at {where}: {err.message}")


def dumps(data) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, data, kind: str | None = None) -> Path:
    if kind is not None:
        validate(data, kind)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data))
    return path


def read_json(path, kind: str | None = None):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: not valid JSON ({exc})") from exc
    if kind is not None:
        validate(data, kind)
    return data


_LOADERS = {
    "state": GaussianState.from_json,
    "graph": GraphZ.from_json,
    "grid": MacronodeGrid.from_json,
    "program": CircuitProgram.from_json,
    "schedule": MeasurementSchedule.from_json,
}


def load(path, kind: str):
    """Read, validate and construct the object stored at ``path``.

    Raises:
        ArtifactError: on schema violations or when construction rejects the
            content (for example a non-symmetric covariance).
    """
    data = read_json(path, kind)
    if kind not in _LOADERS:
        return data
    try:
        return _LOADERS[kind](data)
    except (ValueError, KeyError, TypeError) as exc:
        raise ArtifactError(f"{path}: {exc}") from exc


def save(path, obj, kind: str) -> Path:
    return write_json(path, obj.to_json(), kind)
