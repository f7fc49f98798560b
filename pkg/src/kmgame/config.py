"""Run configuration for the command line and verification suites.

Config files are JSON objects with any subset of the :class:`RunConfig`
fields, validated against :data:`CONFIG_SCHEMA`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace

import jsonschema

from kmgame.lattice import DEFAULT_SEED

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "lattice_n": {"type": "integer", "minimum": 2},
        "grid": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "quad_tol": {"type": "number", "exclusiveMinimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "format": {"enum": ["json", "dot", "text"]},
        "max_k": {"type": "integer", "minimum": 1},
        "max_quadrature_k": {"type": "integer", "minimum": 1},
        "fail_fast": {"type": "boolean"},
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every subcommand.

    ``max_k`` and ``max_quadrature_k`` cap combinatorial and quadrature work
    and are checked before anything is allocated.
    """

    k: int = 3
    lattice_n: int = 3
    grid: int = 6
    seed: int = DEFAULT_SEED
    tol: float = 1e-9
    quad_tol: float = 1e-10
    trials: int = 20
    format: str = "json"
    max_k: int = 6
    max_quadrature_k: int = 3
    fail_fast: bool = False

    def __post_init__(self):
        jsonschema.validate(asdict(self), CONFIG_SCHEMA)

    def updated(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_json(self) -> dict:
        return asdict(self)


def config_error_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def load_config(path: str) -> RunConfig:
    """Read a JSON config file; unknown keys are schema errors."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    jsonschema.validate(data, CONFIG_SCHEMA)
    names = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in data.items() if k in names})
