"""Run configuration for the CLI: mollifier, ladder, domains, tolerances."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .asymptotics import ClassifyConfig, EpsLadder
from .association import TestFunction, default_probes
from .mollifier import mollifier_from_spec


@dataclass
class RunConfig:
    mollifier: dict = field(default_factory=lambda: {"type": "moment", "q": 4})
    ladder_start: float = 0.5
    ladder_ratio: float = 0.5
    ladder_rungs: int = 11
    domain: tuple = (-10.0, 10.0)
    compacts: tuple = ((-1.0, 1.0),)
    quad_tol: float = 1e-8
    moment_tol: float = 1e-10
    association_tol: float = 1e-6
    fit_residual_max: float = 0.25
    q_threshold: float = 6.0
    slope_max: float = 20.0
    alpha_max: int = 2
    grid_points: int = 2048
    weight_m: int = None
    probes: tuple = None
    out_dir: str = None

    def __post_init__(self):
        for name in ("quad_tol", "moment_tol", "association_tol", "fit_residual_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        if not 0.0 < self.ladder_start < 1.0 or not 0.0 < self.ladder_ratio < 1.0:
            raise ValueError("ladder must stay within (0, 1)")
        if self.ladder_rungs < 4:
            raise ValueError("ladder needs at least 4 rungs")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError("domain must be a nonempty interval")
        for a, b in self.compacts:
            if not (lo <= a <= b <= hi):
                raise ValueError(f"compact [{a}, {b}] not contained in domain")
        if self.probes is not None:
            for p in self.probes:
                if p.support[0] < lo or p.support[1] > hi:
                    raise ValueError("probe support not contained in domain")

    @staticmethod
    def from_dict(raw):
        if not isinstance(raw, dict):
            raise ValueError("config must be a JSON object")
        kwargs = {}
        if "mollifier" in raw:
            kwargs["mollifier"] = raw["mollifier"]
        ladder = raw.get("ladder", {})
        for src, dst in (("start", "ladder_start"), ("ratio", "ladder_ratio"),
                         ("rungs", "ladder_rungs")):
            if src in ladder:
                kwargs[dst] = ladder[src]
        if "domain" in raw:
            kwargs["domain"] = tuple(raw["domain"])
        if "compacts" in raw:
            kwargs["compacts"] = tuple(tuple(c) for c in raw["compacts"])
        tols = raw.get("tolerances", {})
        for src, dst in (("quadrature", "quad_tol"), ("moment", "moment_tol"),
                         ("association", "association_tol"),
                         ("fit_residual", "fit_residual_max")):
            if src in tols:
                kwargs[dst] = float(tols[src])
        for name in ("q_threshold", "slope_max", "alpha_max", "grid_points",
                     "weight_m", "out_dir"):
            if name in raw:
                kwargs[name] = raw[name]
        if "probes" in raw:
            kwargs["probes"] = tuple(
                TestFunction(p.get("center", 0.0), p.get("radius", 1.0),
                             p.get("normalization", 1.0))
                for p in raw["probes"])
        return RunConfig(**kwargs)

    @staticmethod
    def from_file(path):
        with open(path, encoding="utf-8") as fh:
            return RunConfig.from_dict(json.load(fh))

    # -- builders ------------------------------------------------------------
    def mollifier_obj(self):
        return mollifier_from_spec(self.mollifier)

    def ladder(self):
        return EpsLadder.geometric(self.ladder_start, self.ladder_ratio,
                                   self.ladder_rungs)

    def probe_set(self):
        return list(self.probes) if self.probes is not None \
            else default_probes(self.domain)

    def classify_config(self):
        return ClassifyConfig(
            alpha_max=self.alpha_max, compacts=tuple(self.compacts),
            q_threshold=self.q_threshold, residual_max=self.fit_residual_max,
            slope_max=self.slope_max, grid_points=self.grid_points,
            weight_m=self.weight_m, ladder=self.ladder())
