"""JSON run configuration: strict parsing into the solver/matching
dataclasses plus the sensing-operator description. Unknown keys are
rejected everywhere to catch typos."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from glr.lowrank import WnnmParams
from glr.matching import MatchConfig
from glr.operators import SensingOperator, bernoulli_masks, cacti_operator, \
    fourier_operator, msfa_operator, msfa_pattern, radial_mask
from glr.solvers import SolverConfig
from glr.tensorio import read_tensor, read_tile_file


class ConfigError(ValueError):
    pass


@dataclass
class OperatorSpec:
    kind: str = "cacti"
    mask_path: str | None = None
    frames: int = 8                 # cacti
    num_lines: int = 30             # fourier radial mask
    msfa_kind: str = "periodic-4x4"
    tile_path: str | None = None
    channels: int = 16
    height: int = 64
    width: int = 64
    mask_seed: int = 0

    def build(self) -> SensingOperator:
        if self.kind == "cacti":
            if self.mask_path:
                masks = read_tensor(self.mask_path)
            else:
                masks = bernoulli_masks(self.height, self.width, self.frames,
                                        seed=self.mask_seed)
            return cacti_operator(masks)
        if self.kind == "fourier":
            if self.mask_path:
                mask = read_tensor(self.mask_path)
                if mask.ndim == 3:
                    mask = mask[:, :, 0]
            else:
                mask = radial_mask(self.height, self.width, self.num_lines)
            return fourier_operator(mask)
        if self.kind == "msfa":
            if self.mask_path:
                masks = read_tensor(self.mask_path)
            else:
                tile = read_tile_file(self.tile_path) if self.tile_path else None
                kind = "custom-tile" if self.tile_path else self.msfa_kind
                masks = msfa_pattern(kind, self.channels, self.height,
                                     self.width, tile=tile)
            return msfa_operator(masks)
        raise ConfigError(f"unknown operator kind {self.kind!r}")


@dataclass
class RunConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    operator: OperatorSpec = field(default_factory=OperatorSpec)


def _from_dict(cls, doc: dict, path: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(doc) - set(names)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, val in doc.items():
        f = names[key]
        if f.name == "match":
            val = _from_dict(MatchConfig, val, f"{path}.{key}")
        elif f.name == "wnnm":
            val = _from_dict(WnnmParams, val, f"{path}.{key}")
        kwargs[key] = val
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


def parse_run_config(doc: dict | str) -> RunConfig:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")
    unknown = set(doc) - {"solver", "operator"}
    if unknown:
        raise ConfigError(f"top level: unknown keys {sorted(unknown)}")
    solver = _from_dict(SolverConfig, doc.get("solver", {}), "solver")
    op = _from_dict(OperatorSpec, doc.get("operator", {}), "operator")
    return RunConfig(solver=solver, operator=op)


def _to_jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    return obj


def serialize_run_config(cfg: RunConfig) -> str:
    return json.dumps({"solver": _to_jsonable(cfg.solver),
                       "operator": _to_jsonable(cfg.operator)},
                      indent=2, sort_keys=True)
