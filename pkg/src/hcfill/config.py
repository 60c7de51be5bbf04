"""Run configuration: every tolerance, budget and constant knob in one
round-trippable record.  The CLI reads it from --config or the HCFILL_CONFIG
environment variable."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields

from .errors import InputError


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-9
    node_budget: int = 10**6
    # pushout knobs: c0(k) = c0_base^k, c2(n) = c2_factor * n,
    # projection-ratio ceiling = ratio_ceiling_base * 2^k
    c0_base: float = 0.25
    c2_factor: float = 4.0
    ratio_ceiling_base: float = 10.0
    pushout_candidates: int = 64
    # pipeline slack schedule: eps = eps_rel * HC, stop at eps0_rel * HC
    eps_rel: float = 1e-3
    eps0_rel: float = 1e-4
    step_cap: int = 50
    # search budgets
    width_budget: int = 2000
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "seed" and isinstance(v, (int, float)) and v <= 0:
                raise InputError(f"config knob {f.name} must be positive")
        if self.seed < 0:
            raise InputError("seed must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | None = None) -> "RunConfig":
        path = path or os.environ.get("HCFILL_CONFIG")
        if not path:
            return cls()
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except FileNotFoundError:
            raise InputError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})")

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
