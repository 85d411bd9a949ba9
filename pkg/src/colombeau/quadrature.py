"""Adaptive one-dimensional quadrature with explicit error accounting.

Every integral in the engine (moment checks, convolution embeddings,
pairings) funnels through the three integrators here, so each reports what
it actually did: value, error estimate, number of panel subdivisions, and
whether the requested budget was met.

The base rule is a 15-point Gauss-Legendre panel.  A panel is accepted when
its estimate agrees with the sum of its two halves within the panel's share
of the absolute tolerance, otherwise it is bisected.  Refinement sweeps are
batched so the integrand is always called on one large array per sweep.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

_NODES15, _WEIGHTS15 = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    subdivisions: int
    converged: bool


def _panel_sums(f, lo, hi):
    """15-point Gauss-Legendre estimates for a batch of intervals."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = mid[:, None] + half[:, None] * _NODES15[None, :]
    vals = np.asarray(f(xs.ravel()), dtype=float).reshape(xs.shape)
    return half * (vals @ _WEIGHTS15)


def integrate(f, a, b, tol=1e-10, *, rtol=0.0, points=(), max_subdivisions=4000):
    """Integrate a vectorized integrand over [a, b].

    Global strategy: every leaf panel carries an error surrogate (the
    disagreement between itself and its two halves, split between the
    children); each sweep bisects all leaves still above their share of the
    target, so refinement concentrates where the integrand is rough.  The
    target is max(tol, rtol * |integral|).

    `points` seeds interior panel edges (known kinks, spike locations); the
    adaptive bisection cannot find a feature far narrower than an initial
    panel on its own.  When the subdivision budget runs out the best
    estimate is returned with converged=False.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError(f"integration bounds must satisfy a < b, got [{a}, {b}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    inner = sorted({float(p) for p in points if a < float(p) < b})
    edges = np.array([a, *inner, b])
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    est = _panel_sums(f, lo, hi)
    err = np.full(lo.shape, np.inf)

    width_floor = 1e-14 * (abs(a) + abs(b) + 1.0)
    nsub = 0
    exhausted = False
    for _ in range(400):
        total = float(est.sum())
        target = max(tol, rtol * abs(total))
        share = target / (2.0 * len(lo))
        active = (err > share) & ((hi - lo) > width_floor)
        if not active.any():
            break
        if nsub + int(active.sum()) > max_subdivisions:
            exhausted = True
            break
        nsub += int(active.sum())
        mid = 0.5 * (lo[active] + hi[active])
        fine_l = _panel_sums(f, lo[active], mid)
        fine_r = _panel_sums(f, mid, hi[active])
        perr = np.abs(est[active] - fine_l - fine_r)
        perr = np.where(np.isfinite(perr), perr, np.inf)
        keep = ~active
        lo = np.concatenate([lo[keep], lo[active], mid])
        hi = np.concatenate([hi[keep], mid, hi[active]])
        est = np.concatenate([est[keep], fine_l, fine_r])
        err = np.concatenate([err[keep], 0.5 * perr, 0.5 * perr])
    else:
        exhausted = True

    value = float(est.sum())
    total_err = float(err.sum())
    converged = ((not exhausted) and np.isfinite(total_err)
                 and total_err <= max(tol, rtol * abs(value)))
    return QuadResult(value, total_err, nsub, converged)


def _tail_bound(envelope, radius, tol):
    """Bound the two-sided tail integral of a decreasing envelope.

    Dyadic blocks [r, 2r] are bounded by envelope(r) * r; valid only while
    the block bounds decrease, otherwise the bound is reported as inf.
    """
    total = 0.0
    r = float(radius)
    prev = np.inf
    for _ in range(200):
        e = float(envelope(r)) + float(envelope(-r))
        if not np.isfinite(e) or e < 0:
            return np.inf
        term = e * r
        if term > prev:
            return np.inf
        total += term
        prev = term
        if term < 1e-4 * tol:
            return total + 2.0 * term
        r *= 2.0
    return np.inf


def integrate_decaying(f, envelope, tol=1e-8, *, rtol=0.0, points=(),
                       initial_radius=8.0, max_radius=1e7):
    """Integrate over the whole line, truncating where the envelope permits.

    `envelope(x)` must bound |f(x)| and be decreasing for |x| beyond
    `initial_radius`.  The truncation radius is grown until the certified
    envelope tail is below tol/2, then [-R, R] is integrated to tol/2.
    """
    radius = float(initial_radius)
    while True:
        tail = _tail_bound(envelope, radius, tol)
        if tail <= 0.5 * tol:
            break
        radius *= 2.0
        if radius > max_radius:
            raise ValueError("envelope tail bound not achievable within max_radius")
    inner = integrate(f, -radius, radius, 0.5 * tol, rtol=rtol,
                      points=(0.0, *points))
    total_err = inner.error_estimate + tail
    return QuadResult(inner.value, total_err, inner.subdivisions,
                      inner.converged and total_err <= max(tol, rtol * abs(inner.value)))


def integrate_pv(f, singularity, a, b, tol=1e-10, *, rtol=0.0, points=()):
    """Cauchy principal value of f over [a, b] with one interior pole.

    The window of half-width rho = min(s-a, b-s) around the pole is folded
    onto t in (0, rho] as f(s+t) + f(s-t), which must stay bounded as t -> 0
    (paired points at equal distance cancel the pole).  The remaining
    asymmetric piece is ordinary quadrature.
    """
    s = float(singularity)
    a = float(a)
    b = float(b)
    if not a < s < b:
        raise ValueError("singularity must lie strictly inside (a, b)")
    rho = min(s - a, b - s)

    def folded(t):
        return f(s + t) + f(s - t)

    seeds = [abs(float(p) - s) for p in points if 0.0 < abs(float(p) - s) < rho]
    sym = integrate(folded, 0.0, rho, 0.5 * tol, rtol=rtol, points=seeds)
    if not sym.converged and sym.error_estimate > 10.0 * max(tol, rtol * abs(sym.value)):
        raise NumericalFailure(
            "symmetrized principal-value integrand did not converge "
            f"(error estimate {sym.error_estimate:.3e})")

    if s - a > b - s:
        rest = integrate(f, a, s - rho, 0.5 * tol, rtol=rtol,
                         points=[p for p in points if a < float(p) < s - rho])
    elif b - s > s - a:
        rest = integrate(f, s + rho, b, 0.5 * tol, rtol=rtol,
                         points=[p for p in points if s + rho < float(p) < b])
    else:
        rest = QuadResult(0.0, 0.0, 0, True)

    err = sym.error_estimate + rest.error_estimate
    value = sym.value + rest.value
    return QuadResult(value, err,
                      sym.subdivisions + rest.subdivisions,
                      sym.converged and rest.converged
                      and err <= max(tol, rtol * abs(value)))
