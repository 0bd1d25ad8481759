"""Experiment configuration (one JSON document)."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParameterDomainError
from .forward import OrderBox, ProblemSetup, build_setup
from .spectral import DomainSpec, build_basis, from_coefficients, named_initial_data

DEFAULTS: dict = {
    "domain": {"kind": "interval", "lengths": [1.0]},
    "phi": {"name": "sine", "params": {"modes": [1, 2, 3], "amplitudes": [1.0, 0.5, 0.25]}},
    "T": 50.0,
    "t1": 10.0,
    "t2": None,  # T / 2
    "k0": None,
    "box": {"alpha1": 0.1, "beta1": 1.1, "beta2": 1.9},
    "truncation": {"K": None, "K_max": 128, "tolerance": 1e-8, "t_min": 1e-3},
    "grid": {"points": 65, "times": None},
    "audit_points": 65,
    "output": {"dir": "fracmix_out"},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "phi":
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(DEFAULTS)
        if unknown:
            raise ParameterDomainError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(_merge(DEFAULTS, d))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None) -> "ExperimentConfig":
        if path is None:
            return cls.from_dict({})
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ParameterDomainError("config must be a JSON object")
        return cls.from_dict(data)

    def validate(self) -> None:
        r = self.raw
        for key in ("T", "t1"):
            if not isinstance(r[key], (int, float)) or not r[key] > 0:
                raise ParameterDomainError(f"{key} must be a positive number")
        if not 0 < self.t2 < self.T:
            raise ParameterDomainError(f"t2 must lie in (0, T), got {self.t2}")
        phi = r["phi"]
        if not isinstance(phi, dict) or ("name" in phi) == ("coefficients" in phi):
            raise ParameterDomainError("phi needs exactly one of 'name' or 'coefficients'")

    # accessors
    @property
    def T(self) -> float:
        return float(self.raw["T"])

    @property
    def t1(self) -> float:
        return float(self.raw["t1"])

    @property
    def t2(self) -> float:
        t2 = self.raw["t2"]
        return self.T / 2.0 if t2 is None else float(t2)

    @property
    def k0(self) -> int | None:
        return None if self.raw["k0"] is None else int(self.raw["k0"])

    @property
    def box(self) -> OrderBox:
        b = self.raw["box"]
        return OrderBox(float(b["alpha1"]), float(b["beta1"]), float(b["beta2"]))

    @property
    def domain(self) -> DomainSpec:
        d = self.raw["domain"]
        return DomainSpec(d["kind"], tuple(d["lengths"]))

    @property
    def grid_points(self) -> int:
        return int(self.raw["grid"]["points"])

    @property
    def times(self) -> list[float]:
        ts = self.raw["grid"]["times"]
        if ts is None:
            return [-self.T, -self.t2, 0.0, self.t1 / 10.0, self.t1]
        return [float(t) for t in ts]

    @property
    def out_dir(self) -> Path:
        return Path(self.raw["output"]["dir"])

    @property
    def audit_points(self) -> int:
        return int(self.raw["audit_points"])

    def build(self, audit: bool = True) -> ProblemSetup:
        tr = self.raw["truncation"]
        K_max = int(tr["K_max"])
        basis = build_basis(self.domain, K_max)
        phi = self.raw["phi"]
        if "coefficients" in phi:
            data = from_coefficients(basis, phi["coefficients"])
        else:
            data = named_initial_data(basis, phi["name"], **phi.get("params", {}))
        K = tr.get("K")
        return build_setup(
            basis, data, self.T, self.box,
            K=None if K is None else int(K),
            tolerance=float(tr["tolerance"]),
            t_min=float(tr["t_min"]),
            audit=audit,
        )


def parse_orders(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParameterDomainError(f"--orders expects 'ALPHA,BETA', got {text!r}")
    a, b = (float(p) for p in parts)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterDomainError("orders must be finite")
    return a, b
