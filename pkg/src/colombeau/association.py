"""Weak-limit pairings, association tests, and distributional shadows.

The bridge back to distribution theory: pair a representative against
compactly supported bumps over the eps ladder, extrapolate the eps -> 0
limit (single-power Richardson from the last three rungs), and compare.
Sequences that blow up get a fitted divergence exponent instead of a
limit; sequences that neither settle nor blow up are reported
indeterminate rather than guessed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .gfcore import (Derivative, Product, Scale, Sum, bump_value, delta,
                     heaviside, pv_inverse, represent, smooth, x_coordinate)
from .quadrature import integrate, integrate_decaying
from .asymptotics import EpsLadder


@dataclass(frozen=True)
class TestFunction:
    """Smooth bump supported on [center - radius, center + radius]."""

    center: float = 0.0
    radius: float = 1.0
    normalization: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def value(self, x):
        return bump_value(x, self.center, self.radius, self.normalization)

    def __call__(self, x):
        return self.value(x)

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)


def default_probes(domain=(-10.0, 10.0), count=7):
    """Deterministic probe family with varied centers and radii covering Omega."""
    lo, hi = domain
    span = min(abs(lo), abs(hi))
    raw = [(0.0, 1.0), (0.0, 2.5), (-1.5, 1.0), (1.5, 1.0),
           (-0.4 * span, 0.2 * span), (0.4 * span, 0.2 * span), (0.5, 0.75)]
    probes = []
    for center, radius in raw[:count]:
        lo_s, hi_s = center - radius, center + radius
        if lo_s < lo or hi_s > hi:
            radius = 0.9 * min(center - lo, hi - center)
        probes.append(TestFunction(center, radius))
    return probes


@dataclass(frozen=True)
class PairingResult:
    eps_values: tuple
    values: tuple
    status: str                      # converged | divergent | indeterminate
    limit: float = None
    limit_error: float = None
    divergence_exponent: float = None

    def to_dict(self):
        out = {"status": self.status,
               "eps_values": list(self.eps_values),
               "values": list(self.values)}
        if self.limit is not None:
            out["limit"] = self.limit
            out["limit_error"] = self.limit_error
        if self.divergence_exponent is not None:
            out["divergence_exponent"] = self.divergence_exponent
        return out


def _extrapolate(eps, values, cauchy_tol=1e-3):
    """Limit of values(eps) as eps -> 0, assuming a single power correction."""
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(values, dtype=float)
    scale = max(float(np.abs(vals).max()), 1.0)
    diffs = np.diff(vals)

    mags = np.abs(vals)
    growing = (mags[-1] > 50.0 * max(mags[0], 1e-12)
               and bool(np.all(np.diff(mags)[-3:] > 0)))
    if growing or not np.isfinite(vals).all():
        fin = np.isfinite(vals) & (np.abs(vals) > 0)
        exponent = None
        if fin.sum() >= 3:
            t = np.log(eps[fin][-6:])
            y = np.log(np.abs(vals[fin][-6:]))
            exponent = -float(np.polyfit(t, y, 1)[0])
        return "divergent", None, None, exponent

    if abs(diffs[-1]) > cauchy_tol * scale:
        return "indeterminate", None, None, None

    machine_floor = 1e3 * np.finfo(float).eps * scale
    if abs(diffs[-1]) <= machine_floor:
        return "converged", float(vals[-1]), float(abs(diffs[-1]) + machine_floor), None

    d_prev, d_last = diffs[-2], diffs[-1]
    ratio = eps[-1] / eps[-2]
    if d_prev == 0.0 or np.sign(d_prev) != np.sign(d_last):
        # correction power unstable; settle for the last value if it is tight
        if abs(d_last) <= 1e-8 * scale:
            return "converged", float(vals[-1]), float(4.0 * abs(d_last)), None
        return "indeterminate", None, None, None
    p_hat = math.log(abs(d_last / d_prev)) / math.log(ratio)
    if not 0.2 <= p_hat <= 14.0:
        if abs(d_last) <= 1e-8 * scale:
            return "converged", float(vals[-1]), float(4.0 * abs(d_last)), None
        return "indeterminate", None, None, None
    rho = ratio ** p_hat
    correction = d_last * rho / (1.0 - rho)
    limit = float(vals[-1] + correction)
    err = float(abs(correction) * 0.5 + machine_floor)
    return "converged", limit, err, None


def pair(rep, test_fn, ladder=None, quad_tol=1e-8, cauchy_tol=1e-3):
    """Pairing int g_eps(x) T(x) dx per rung, with eps -> 0 extrapolation."""
    ladder = ladder or EpsLadder.default()
    lo, hi = rep.domain
    s_lo, s_hi = test_fn.support
    if s_lo < lo or s_hi > hi:
        raise ValueError("test function support must lie within the domain")
    values = []
    for eps in ladder:
        # seed panel edges at the eps-scale features near the origin:
        # adaptive bisection alone can miss a spike far narrower than a panel
        seeds = [0.0]
        for k in (1.0, 4.0, 16.0, 64.0):
            seeds.extend((-k * eps, k * eps))
        res = integrate(lambda x: rep.eval(eps, x) * test_fn.value(x),
                        s_lo, s_hi, quad_tol, points=seeds)
        values.append(res.value)
    status, limit, err, dexp = _extrapolate(tuple(ladder), values, cauchy_tol)
    return PairingResult(tuple(ladder), tuple(values), status, limit, err, dexp)


def associated(g, h, probes=None, ladder=None, tol=1e-6, quad_tol=1e-8):
    """Tri-state association test: True / False / None (indeterminate).

    True requires the difference to pair to 0 within tol for every probe.
    A probe with a clearly nonzero or divergent limit decides False even if
    other probes are indeterminate; otherwise any indeterminate probe
    blocks the verdict.
    """
    if g.mollifier is not h.mollifier:
        raise ValueError("associated() requires representatives sharing one mollifier")
    if g.domain != h.domain:
        raise ValueError("associated() requires a common domain")
    probes = probes or default_probes(g.domain)
    ladder = ladder or EpsLadder.default()
    diff = represent(Sum(g.expr, Scale(-1.0, h.expr)), g.mollifier, g.domain,
                     g.config)
    evidence = []
    verdict = True
    saw_indeterminate = False
    for t_fn in probes:
        res = pair(diff, t_fn, ladder, quad_tol)
        evidence.append((t_fn, res))
        if res.status == "divergent":
            verdict = False
        elif res.status == "indeterminate":
            saw_indeterminate = True
        elif abs(res.limit) > tol:
            verdict = False
    if verdict and saw_indeterminate:
        verdict = None
    return verdict, evidence


def shadow_report(g, probes=None, ladder=None, quad_tol=1e-8):
    """Pairings of g against a probe family; the caller compares these
    numbers with candidate distributions' exact functionals."""
    probes = probes or default_probes(g.domain)
    ladder = ladder or EpsLadder.default()
    return [(t_fn, pair(g, t_fn, ladder, quad_tol)) for t_fn in probes]


# -- set-piece computations ----------------------------------------------------

def h2h_identity_values(m, ladder=None, quad_tol=1e-10):
    """int (H_eps^2 - H_eps) H_eps' dx per rung, via the generic evaluator.

    Analytically this equals 1/3 - 1/2 = -1/6 independently of eps and of
    the mollifier; each rung is computed in the x variable so the
    constancy is a real test of the evaluation chain, not an identity of
    the quadrature variable.
    """
    ladder = ladder or EpsLadder.default()
    h_expr = heaviside()
    expr = Product(Sum(Product(h_expr, h_expr), Scale(-1.0, h_expr)),
                   Derivative(1, h_expr))
    rep = represent(expr, m)
    out = []
    for eps in ladder:
        envelope = _scaled_delta_envelope(m, eps, 0.3)
        seeds = [k * eps for k in (-16.0, -4.0, -1.0, 1.0, 4.0, 16.0)]
        res = integrate_decaying(lambda x: rep.eval(eps, x), envelope,
                                 quad_tol, points=seeds)
        if not res.converged:
            raise NumericalFailure(
                f"H2H quadrature failed at eps={eps} (err {res.error_estimate:.2e})")
        out.append((eps, res.value))
    return out


def _scaled_delta_envelope(m, eps, prefactor):
    def envelope(x):
        return prefactor / eps * m.decay_envelope(np.asarray(x) / eps)
    return envelope


def exact_identity_check_H2H(m, ladder=None):
    """The common value of the H2H integral across the ladder (must be -1/6)."""
    vals = [v for _, v in h2h_identity_values(m, ladder)]
    spread = max(vals) - min(vals)
    if spread > 1e-6:
        raise NumericalFailure(
            f"H2H integral not eps-independent (spread {spread:.2e})")
    return float(np.mean(vals))


def self_energy(m, eps, charge=1.0):
    """Finite-eps self-energy (e^2/2) (1/eps) int eta^2(-x) dx."""
    from .mollifier import _check_eps
    _check_eps(eps)
    res = integrate_decaying(lambda x: m.eval(-x) ** 2,
                             lambda x: m.decay_envelope(x) ** 2, 1e-12)
    if not res.converged:
        raise NumericalFailure("self-energy quadrature failed")
    return 0.5 * charge ** 2 * res.value / eps


def self_energy_table(m, ladder=None, charge=1.0):
    """(eps, U(eps), eps*U(eps)) rows; eps*U must be constant."""
    ladder = ladder or EpsLadder.default()
    rows = []
    for eps in ladder:
        u = self_energy(m, eps, charge)
        rows.append((eps, u, eps * u))
    return rows


@dataclass(frozen=True)
class ImpossibilityReport:
    parenthesization_max_rel_diff: float
    x_pv_minus_one: PairingResult
    x_delta: PairingResult
    triple: PairingResult
    triple_constant: float

    def to_dict(self):
        return {
            "parenthesization_max_rel_diff": self.parenthesization_max_rel_diff,
            "x_pv_minus_one": self.x_pv_minus_one.to_dict(),
            "x_delta": self.x_delta.to_dict(),
            "triple": self.triple.to_dict(),
            "triple_constant": self.triple_constant,
        }


def impossibility_demo(m, test_fn=None, ladder=None, quad_tol=1e-8):
    """How the classical x * pv(1/x) * delta contradiction dissolves.

    In the algebra both parenthesizations agree to machine precision, and
    the component associations x*pv(1/x) ~ 1 and x*delta ~ 0 both hold;
    what fails is compatibility of association with multiplication: the
    triple product pairs to a mollifier-dependent multiple of T(0), which
    is reported, never asserted.
    """
    test_fn = test_fn or TestFunction(0.0, 1.0)
    if abs(test_fn.value(0.0)) < 1e-12:
        raise ValueError("impossibility demo needs a probe with T(0) != 0")
    ladder = ladder or EpsLadder.default()
    x_hat = x_coordinate()
    p_hat = pv_inverse()
    d_hat = delta()

    left = Product(Product(x_hat, p_hat), d_hat)
    right = Product(x_hat, Product(p_hat, d_hat))
    rep_left = represent(left, m)
    rep_right = represent(right, m)
    rel = 0.0
    for eps in (0.25, 0.0625):
        xs = np.concatenate([np.linspace(-2.0, 2.0, 21),
                             eps * np.array([-3.0, -0.5, 0.5, 3.0])])
        v1 = np.atleast_1d(rep_left.eval(eps, xs))
        v2 = np.atleast_1d(rep_right.eval(eps, xs))
        denom = np.maximum(np.maximum(np.abs(v1), np.abs(v2)), 1e-30)
        rel = max(rel, float(np.max(np.abs(v1 - v2) / denom)))

    one_expr = smooth("poly", (1.0,))
    res_xp = pair(represent(Sum(Product(x_hat, p_hat), Scale(-1.0, one_expr)), m),
                  test_fn, ladder, quad_tol)
    res_xd = pair(represent(Product(x_hat, d_hat), m), test_fn, ladder, quad_tol)
    res_triple = pair(rep_left, test_fn, ladder, quad_tol)
    constant = (res_triple.limit / float(test_fn.value(0.0))
                if res_triple.status == "converged" else math.nan)
    return ImpossibilityReport(rel, res_xp, res_xd, res_triple, constant)
