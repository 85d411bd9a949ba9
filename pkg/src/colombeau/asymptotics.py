"""Growth-exponent estimation and the moderate/negligible classification.

A representative is probed on a geometric ladder of eps values; on each
rung the sup of |D^alpha g_eps| over a compact K is taken from a dense
sample grid (with extra resolution near the origin, where the whole zoo
concentrates, plus local refinement around the largest samples).  A line
through (log eps, log sup) gives the growth exponent `slope` in the
convention sup ~ C * eps^slope, so the delta embedding fits slope -1.

Classification:

* non_moderate -- super-polynomial growth: the local slopes steepen as
  eps shrinks and the last one exceeds -slope_max, or values escape the
  float range entirely.
* negligible   -- decay faster than the certifiable power: a clean linear
  fit with slope above the threshold, a clearly super-polynomial decay
  (steepening local slopes), or identically-zero rungs (slope reported as
  the +inf sentinel).  The threshold is tied to the mollifier's verified
  moment order: no finite-q kernel can certify decay beyond eps^(q+1).
* moderate(N)  -- a usable fit with slope >= -N for the smallest such N.
* indeterminate otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .gfcore import DEFAULT_CONFIG, Representative, represent

_RANK = {"negligible": 0, "moderate": 1, "indeterminate": 2, "non_moderate": 3}


@dataclass(frozen=True)
class EpsLadder:
    eps_values: tuple

    def __post_init__(self):
        vals = tuple(float(e) for e in self.eps_values)
        object.__setattr__(self, "eps_values", vals)
        if len(vals) < 4:
            raise ValueError("ladder needs at least 4 rungs")
        if any(not 0.0 < e < 1.0 for e in vals):
            raise ValueError("ladder values must lie in (0, 1)")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ValueError("ladder must be strictly decreasing")

    @staticmethod
    def geometric(start=0.5, ratio=0.5, rungs=11):
        if not 0.0 < ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        return EpsLadder(tuple(start * ratio ** k for k in range(rungs)))

    @staticmethod
    def default():
        return EpsLadder.geometric()

    def __iter__(self):
        return iter(self.eps_values)

    def __len__(self):
        return len(self.eps_values)


@dataclass(frozen=True)
class ClassifyConfig:
    alpha_max: int = 2
    compacts: tuple = ((-1.0, 1.0),)
    q_threshold: float = 6.0
    residual_max: float = 0.25
    slope_max: float = 20.0
    slope_slack: float = 0.25
    grid_points: int = 2048
    weight_m: int = None
    ladder: EpsLadder = field(default_factory=EpsLadder.default)


@dataclass(frozen=True)
class AsymptoticReport:
    slope: float
    intercept_log: float
    fit_residual: float
    sup_values: tuple
    eps_values: tuple
    derivative_order: int
    compact: tuple
    classification: str
    moderate_n: int = None
    tempered_weight_m: int = None
    components: tuple = ()

    def to_dict(self):
        out = {
            "classification": self.classification,
            "slope": self.slope,
            "intercept_log": self.intercept_log,
            "fit_residual": self.fit_residual,
            "derivative_order": self.derivative_order,
            "compact": list(self.compact),
            "eps_values": list(self.eps_values),
            "sup_values": list(self.sup_values),
        }
        if self.moderate_n is not None:
            out["moderate_n"] = self.moderate_n
        if self.tempered_weight_m is not None:
            out["tempered_weight_m"] = self.tempered_weight_m
        if self.components:
            out["components"] = [c.to_dict() for c in self.components]
        return out


def sup_norm(rep, eps, compact, alpha=0, weight_m=None, grid_points=2048):
    """Sampled sup of |D^alpha g_eps| over K, optionally (1+|x|)^-m weighted."""
    a, b = float(compact[0]), float(compact[1])
    if a > b:
        raise ValueError("compact interval must have a <= b")

    def batch(xs):
        vals = np.abs(np.atleast_1d(rep.deriv(eps, xs, alpha)))
        vals = np.where(np.isnan(vals), np.inf, vals)
        if weight_m is not None:
            vals = vals * (1.0 + np.abs(xs)) ** (-weight_m)
        return vals

    if a == b:
        return float(batch(np.array([a]))[0])

    xs = [np.linspace(a, b, grid_points)]
    if a <= 0.0 <= b:
        # resolve the eps-scale core that every zoo element puts at 0
        top = max(abs(a), abs(b), eps)
        scales = np.geomspace(eps * 1e-2, top, 48)
        xs.append(np.clip(scales, a, b))
        xs.append(np.clip(-scales, a, b))
        xs.append(np.array([0.0]))
    grid = np.unique(np.concatenate(xs))
    vals = batch(grid)

    best = float(np.max(vals))
    spacing = (b - a) / max(grid_points - 1, 1)
    top_idx = np.argsort(vals)[-5:]
    windows = {spacing, eps / 8.0}
    for idx in top_idx:
        if not np.isfinite(vals[idx]):
            continue
        x0 = grid[idx]
        for w in windows:
            local = np.clip(np.linspace(x0 - w, x0 + w, 33), a, b)
            best = max(best, float(np.max(batch(local))))
    return best


def _linear_fit(t, y):
    design = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - design @ coef) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def _decide(eps, sups, threshold, cfg):
    """Returns (slope, intercept, residual, classification, moderate_n)."""
    sups = np.where(np.isnan(sups), np.inf, np.asarray(sups, dtype=float))
    eps = np.asarray(eps, dtype=float)

    if np.isinf(sups).any():
        fin = np.isfinite(sups) & (sups > 0)
        slope = -math.inf
        intercept = math.nan
        if fin.sum() >= 2:
            slope, intercept, _ = _linear_fit(np.log(eps[fin]), np.log(sups[fin]))
        return slope, intercept, math.inf, "non_moderate", None

    pos = sups > 0
    if not pos.any():
        return math.inf, -math.inf, 0.0, "negligible", None
    zeros_present = bool((~pos).any())
    t = np.log(eps[pos])
    y = np.log(sups[pos])
    if pos.sum() < 3:
        if zeros_present and sups[pos][-1] <= sups[pos][0]:
            return math.inf, -math.inf, 0.0, "negligible", None
        return math.nan, math.nan, math.inf, "indeterminate", None

    a_fit, intercept, resid = _linear_fit(t, y)
    a_loc = np.diff(y) / np.diff(t)
    loc_tol = 0.1 * np.abs(a_loc[:-1]) + 0.05

    steepening = bool(np.all(a_loc[1:] <= a_loc[:-1] + loc_tol))
    if (steepening and a_loc[-1] < -cfg.slope_max) or a_fit < -cfg.slope_max:
        return a_fit, intercept, resid, "non_moderate", None

    flattening = bool(np.all(a_loc[1:] >= a_loc[:-1] - loc_tol))
    superdecay = (flattening and a_loc[-1] > max(threshold, 1.0)
                  and a_loc[-1] >= 2.0 * max(a_loc[0], 1.0))
    if superdecay or (zeros_present and a_loc[-1] > 0):
        return math.inf, intercept, 0.0, "negligible", None
    if resid < cfg.residual_max and a_fit > threshold:
        return a_fit, intercept, resid, "negligible", None
    if resid < cfg.residual_max:
        n_mod = max(0, math.ceil(-a_fit - cfg.slope_slack))
        return a_fit, intercept, resid, "moderate", n_mod
    return a_fit, intercept, resid, "indeterminate", None


def fit_exponent(rep, ladder, compact, alpha=0, cfg=None):
    """Fit sup ~ C eps^a over the ladder for one (alpha, K) pair."""
    cfg = cfg or ClassifyConfig()
    sups = np.array([sup_norm(rep, e, compact, alpha, cfg.weight_m, cfg.grid_points)
                     for e in ladder])
    threshold = min(cfg.q_threshold, rep.mollifier.q_eff + 1)
    slope, intercept, resid, cls, n_mod = _decide(
        np.array(tuple(ladder)), sups, threshold, cfg)
    return AsymptoticReport(
        slope=slope, intercept_log=intercept, fit_residual=resid,
        sup_values=tuple(float(s) for s in sups),
        eps_values=tuple(ladder),
        derivative_order=alpha, compact=tuple(compact), classification=cls,
        moderate_n=n_mod, tempered_weight_m=cfg.weight_m)


def classify(expr, m, cfg=None, domain=(-10.0, 10.0)):
    """Aggregate classification over alpha = 0..alpha_max and all compacts.

    The worst component governs: any non-moderate component makes the
    expression non-moderate, any indeterminate one blocks a verdict, and
    the reported slope/moderate order come from the slowest-decaying
    component.
    """
    cfg = cfg or ClassifyConfig()
    rep = represent(expr, m, domain, DEFAULT_CONFIG)
    comps = []
    for compact in cfg.compacts:
        for alpha in range(cfg.alpha_max + 1):
            comps.append(fit_exponent(rep, cfg.ladder, compact, alpha, cfg))

    worst_rank = max(_RANK[c.classification] for c in comps)
    candidates = [c for c in comps if _RANK[c.classification] == worst_rank]
    governing = min(candidates, key=lambda c: (c.slope if not math.isnan(c.slope)
                                               else math.inf))
    slope = min((c.slope for c in comps if not math.isnan(c.slope)),
                default=math.nan)
    n_vals = [c.moderate_n for c in comps if c.moderate_n is not None]
    n_mod = max(n_vals) if (n_vals and governing.classification == "moderate") else None
    return replace(governing, slope=slope, moderate_n=n_mod,
                   components=tuple(comps))
