"""Expression trees over embedded distributions and their evaluators.

A generalized function is represented lazily as a tree (`GExpr`) whose
leaves are either mollified embeddings of distributions (`EmbedDist`),
mollified embeddings of smooth functions (`EmbedSmooth`), or directly
included smooth functions (`SmoothDirect`).  Interior nodes close the tree
under sum, pointwise product, scalar scale, derivative, and composition
with entire functions.

Evaluation maps (eps, x) to the representative value.  Derivatives commute
with the embedding: where a leaf has a closed form the derivative does too
(delta, heaviside, sign, polynomials, smooth embeddings); convolution
leaves (abs, power_plus, smooth_test, pv_inverse) push the derivative onto
the kernel by parts, integrating eta^(n) against the classical function.
Derivatives of products and compositions fall back to centered finite
differences with a step proportional to eps, since representatives vary on
scale eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import Polynomial

from .errors import NumericalFailure
from .mollifier import Mollifier, MomentMollifier, PlateauMollifier, _check_eps
from .quadrature import integrate, integrate_decaying, integrate_pv, _tail_bound

ENTIRE_SMOOTH = ("sin", "cos", "exp", "poly")
DIST_TAGS = ("delta", "heaviside", "abs", "sign", "power_plus", "pv_inverse",
             "polynomial", "smooth_test")


@dataclass(frozen=True)
class EvalConfig:
    quad_tol: float = 1e-8
    quad_rtol: float = 1e-9
    fd_step_rel: float = 1e-3      # derivative orders 1..2
    fd_step_rel_high: float = 1e-2  # orders >= 3: roundoff balance


DEFAULT_CONFIG = EvalConfig()


def bump_value(x, center=0.0, radius=1.0, normalization=1.0):
    """Standard bump: normalization * exp(-1/(1-u^2)) on |u| < 1, else 0."""
    u = (np.asarray(x, dtype=float) - center) / radius
    inside = np.abs(u) < 1.0
    usq = np.where(inside, u * u, 0.0)
    with np.errstate(divide="ignore"):
        vals = np.exp(-1.0 / (1.0 - usq))
    return np.where(inside, normalization * vals, 0.0)


@dataclass(frozen=True)
class SmoothFn:
    """Entire-on-the-reals smooth function usable directly or as Compose outer."""

    name: str
    coeffs: tuple = None

    def __post_init__(self):
        if self.name not in ENTIRE_SMOOTH:
            raise ValueError(f"unknown smooth function {self.name!r}")
        if self.name == "poly":
            if not self.coeffs:
                raise ValueError("poly requires a non-empty coefficient list")
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        elif self.coeffs is not None:
            raise ValueError(f"{self.name} takes no coefficients")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "sin":
            return np.sin(x)
        if self.name == "cos":
            return np.cos(x)
        if self.name == "exp":
            return np.exp(x)
        return Polynomial(self.coeffs)(x)

    def deriv(self, n, x):
        x = np.asarray(x, dtype=float)
        if n == 0:
            return self.value(x)
        if self.name == "exp":
            return np.exp(x)
        if self.name in ("sin", "cos"):
            shift = n if self.name == "sin" else n + 1
            return [np.sin, np.cos, lambda t: -np.sin(t),
                    lambda t: -np.cos(t)][shift % 4](x)
        return Polynomial(self.coeffs).deriv(n)(x)


@dataclass(frozen=True)
class DistKind:
    """Element of the distribution zoo selected by tag."""

    tag: str
    r: float = None             # power_plus exponent, 0 < r < 1
    coeffs: tuple = None        # polynomial
    center: float = None        # smooth_test bump
    radius: float = None
    normalization: float = None

    def __post_init__(self):
        if self.tag not in DIST_TAGS:
            raise ValueError(f"unknown distribution tag {self.tag!r}")
        if self.tag == "power_plus":
            if self.r is None or not 0.0 < self.r < 1.0:
                raise ValueError(f"power_plus requires 0 < r < 1, got {self.r}")
        elif self.r is not None:
            raise ValueError(f"{self.tag} takes no exponent r")
        if self.tag == "polynomial":
            if not self.coeffs:
                raise ValueError("polynomial requires a non-empty coefficient list")
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        elif self.coeffs is not None:
            raise ValueError(f"{self.tag} takes no coefficients")
        if self.tag == "smooth_test":
            object.__setattr__(self, "center",
                               0.0 if self.center is None else float(self.center))
            object.__setattr__(self, "radius",
                               1.0 if self.radius is None else float(self.radius))
            object.__setattr__(self, "normalization",
                               1.0 if self.normalization is None else float(self.normalization))
            if self.radius <= 0:
                raise ValueError("smooth_test radius must be positive")
        elif self.center is not None or self.radius is not None \
                or self.normalization is not None:
            raise ValueError(f"{self.tag} takes no bump parameters")


@dataclass(frozen=True)
class EmbedDist:
    dist: DistKind


@dataclass(frozen=True)
class EmbedSmooth:
    """Mollified embedding of a smooth function (as a distribution)."""

    func: SmoothFn


@dataclass(frozen=True)
class SmoothDirect:
    """Direct inclusion: the map is f(x), independent of eps and eta."""

    func: SmoothFn


@dataclass(frozen=True)
class SmoothResidual:
    """(f)_eps - f: the gap between the two inclusions of a smooth f.

    A leaf of its own because the obvious Sum(EmbedSmooth(f), -f) evaluates
    the difference of two order-one quantities and loses the residual to
    float cancellation once it falls below ~1e-16; the leaf uses series
    forms of ft(eps)-1 instead and keeps full relative precision.
    """

    func: SmoothFn


@dataclass(frozen=True)
class Sum:
    left: "GExpr"
    right: "GExpr"


@dataclass(frozen=True)
class Product:
    left: "GExpr"
    right: "GExpr"


@dataclass(frozen=True)
class Scale:
    c: float
    arg: "GExpr"


@dataclass(frozen=True)
class Derivative:
    order: int
    arg: "GExpr"

    def __post_init__(self):
        if not isinstance(self.order, (int, np.integer)) or self.order < 1:
            raise ValueError(f"derivative order must be a positive integer, got {self.order}")


@dataclass(frozen=True)
class Compose:
    outer: SmoothFn
    arg: "GExpr"


GExpr = Union[EmbedDist, EmbedSmooth, SmoothDirect, SmoothResidual, Sum,
              Product, Scale, Derivative, Compose]


# -- constructors ------------------------------------------------------------

def delta():
    return EmbedDist(DistKind("delta"))


def heaviside():
    return EmbedDist(DistKind("heaviside"))


def absolute():
    return EmbedDist(DistKind("abs"))


def signum():
    return EmbedDist(DistKind("sign"))


def power_plus(r):
    return EmbedDist(DistKind("power_plus", r=r))


def pv_inverse():
    return EmbedDist(DistKind("pv_inverse"))


def polynomial_dist(coeffs):
    return EmbedDist(DistKind("polynomial", coeffs=tuple(coeffs)))


def bump_dist(center=0.0, radius=1.0, normalization=1.0):
    return EmbedDist(DistKind("smooth_test", center=center, radius=radius,
                              normalization=normalization))


def smooth(name, coeffs=None):
    return SmoothDirect(SmoothFn(name, tuple(coeffs) if coeffs else None))


def one():
    return smooth("poly", (1.0,))


def x_coordinate():
    return smooth("poly", (0.0, 1.0))


def gsum(*exprs):
    acc = exprs[0]
    for e in exprs[1:]:
        acc = Sum(acc, e)
    return acc


def gproduct(*exprs):
    acc = exprs[0]
    for e in exprs[1:]:
        acc = Product(acc, e)
    return acc


# -- mollified smooth functions ----------------------------------------------

def mollified_smooth(func, m, eps, x, n=0):
    """Embedding of a smooth function, differentiated n times.

    sin and cos convolve to themselves scaled by the kernel's Fourier
    transform at eps (both families are even, so the quadrature component
    vanishes identically); polynomials get the exact finite moment-Taylor
    sum; exp has a closed two-sided Laplace form for the Gaussian family
    and genuinely diverges against plateau kernels.
    """
    _check_eps(eps)
    x = np.asarray(x, dtype=float)
    if func.name in ("sin", "cos"):
        return float(m.ft(eps)) * func.deriv(n, x)
    if func.name == "exp":
        if isinstance(m, MomentMollifier):
            return float(m.laplace(eps)) * np.exp(x)
        raise NumericalFailure(
            "exp embedding diverges: plateau mollifiers decay sub-exponentially")
    pol = Polynomial(func.coeffs).deriv(n) if n else Polynomial(func.coeffs)
    acc = np.zeros_like(x)
    for k in range(len(pol.coef)):
        mk = m.moment(k)
        if mk != 0.0:
            acc = acc + (eps ** k) * mk / math.factorial(k) * pol.deriv(k)(x)
    return acc


def _residual_smooth(func, m, eps, x, n=0):
    """n-th derivative of (f)_eps - f, without subtractive cancellation."""
    _check_eps(eps)
    x = np.asarray(x, dtype=float)
    if func.name in ("sin", "cos"):
        return float(m.ft_minus_one(eps)) * func.deriv(n, x)
    if func.name == "exp":
        if isinstance(m, MomentMollifier):
            return float(m.laplace_minus_one(eps)) * np.exp(x)
        raise NumericalFailure(
            "exp embedding diverges: plateau mollifiers decay sub-exponentially")
    pol = Polynomial(func.coeffs).deriv(n) if n else Polynomial(func.coeffs)
    acc = np.zeros_like(x)
    for k in range(1, len(pol.coef)):
        mk = m.moment(k)
        if mk != 0.0:
            acc = acc + (eps ** k) * mk / math.factorial(k) * pol.deriv(k)(x)
    return acc


def smooth_embedding_residual(func, m, eps, x):
    """(f)_eps(x) - f(x): the negligible-class witness for smooth f."""
    out = _residual_smooth(func, m, eps, np.atleast_1d(np.asarray(x, float)), 0)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def smooth_residual(name, coeffs=None):
    return SmoothResidual(SmoothFn(name, tuple(coeffs) if coeffs else None))


# -- embedding of distributions ----------------------------------------------

def _classical_fn(dist):
    if dist.tag == "abs":
        return np.abs
    if dist.tag == "power_plus":
        r = dist.r
        return lambda t: np.where(t > 0.0, np.maximum(t, 0.0) ** r, 0.0)
    if dist.tag == "smooth_test":
        return lambda t: bump_value(t, dist.center, dist.radius, dist.normalization)
    raise AssertionError(dist.tag)


def _classical_bound(dist, xv):
    """(z -> bound on |f(xv + eps z)|), valid for all eps in (0,1)."""
    if dist.tag == "abs":
        return lambda z: abs(xv) + np.abs(z)
    if dist.tag == "power_plus":
        return lambda z: 1.0 + abs(xv) + np.abs(z)
    if dist.tag == "smooth_test":
        bound = abs(dist.normalization)
        return lambda z: np.full_like(np.asarray(z, dtype=float), bound)
    raise AssertionError(dist.tag)


_ENV_RADIUS_CACHE = {}


def _env_radius(m, n, tol):
    key = (id(m), n, round(math.log10(tol)))
    cached = _ENV_RADIUS_CACHE.get(key)
    if cached is not None:
        return cached
    radius = 8.0
    while _tail_bound(lambda z: m.deriv_envelope(n, z), radius, tol) > 0.5 * tol:
        radius *= 2.0
        if radius > 1e7:
            raise NumericalFailure("mollifier envelope tail not summable")
    _ENV_RADIUS_CACHE[key] = radius
    return radius


def _pv_profile(m, n, u, tol, rtol):
    """Psi_n(u) = PV int eta^(n)(z) / (z + u) dz."""
    s = -float(u)
    r_env = _env_radius(m, n, tol)
    big = max(2.0 * abs(s) + 8.0, r_env + abs(s))

    def f(z):
        return m.deriv(n, z) / (z + u)

    window = min(4.0, 0.5 * (big - abs(s)))
    total = integrate_pv(f, s, s - window, s + window, tol, rtol=rtol).value
    if -big < s - window:
        total += integrate(f, -big, s - window, tol, rtol=rtol, points=(0.0,)).value
    if s + window < big:
        total += integrate(f, s + window, big, tol, rtol=rtol, points=(0.0,)).value
    return total


def _embed_deriv_array(dist, m, eps, x, n, cfg):
    """n-th derivative of the embedding of `dist`, evaluated on an array."""
    tag = dist.tag
    u = x / eps
    if tag == "delta":
        return (-1.0) ** n * eps ** (-(n + 1)) * m.deriv(n, -u)
    if tag == "heaviside":
        if n == 0:
            return 1.0 - m.cdf(-u)
        return (-1.0) ** (n - 1) * eps ** (-n) * m.deriv(n - 1, -u)
    if tag == "sign":
        if n == 0:
            return 1.0 - 2.0 * m.cdf(-u)
        return 2.0 * (-1.0) ** (n - 1) * eps ** (-n) * m.deriv(n - 1, -u)
    if tag == "polynomial":
        pol = Polynomial(dist.coeffs)
        if n:
            pol = pol.deriv(n)
        acc = np.zeros_like(x)
        for k in range(len(pol.coef)):
            mk = m.moment(k)
            if mk != 0.0:
                acc = acc + (eps ** k) * mk / math.factorial(k) * pol.deriv(k)(x)
        return acc
    if tag == "pv_inverse":
        tol = max(cfg.quad_tol * eps ** (n + 1), 1e-13)
        vals = np.array([_pv_profile(m, n, uv, tol, cfg.quad_rtol)
                         for uv in np.ravel(u)])
        return ((-1.0) ** n * eps ** (-(n + 1)) * vals).reshape(np.shape(x))
    # convolution leaves: abs, power_plus, smooth_test
    fn = _classical_fn(dist)
    tol = max(cfg.quad_tol * eps ** n, 1e-13)
    out = np.empty(np.shape(x))
    flat = np.ravel(x)
    for i, xv in enumerate(flat):
        bound = _classical_bound(dist, xv)
        res = integrate_decaying(
            lambda z: m.deriv(n, z) * fn(xv + eps * z),
            lambda z: m.deriv_envelope(n, z) * bound(z),
            tol, rtol=cfg.quad_rtol, points=(-xv / eps,))
        out.flat[i] = res.value
    return (-1.0 / eps) ** n * out


def embed_eval(dist, m, eps, x):
    """Value of the Colombeau embedding (f)_eps(x) = int eta(z) f(x+eps z) dz."""
    _check_eps(eps)
    x_arr = np.asarray(x, dtype=float)
    out = _embed_deriv_array(dist, m, eps, np.atleast_1d(x_arr), 0, DEFAULT_CONFIG)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


# -- tree evaluation -----------------------------------------------------------

def _fd(value_fn, x, n, eps, cfg):
    rel = cfg.fd_step_rel if n <= 2 else cfg.fd_step_rel_high
    h = eps * rel
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    if h <= 4.0 * np.finfo(float).eps * max(scale, 1.0):
        raise NumericalFailure(f"finite-difference step underflow (h={h:.3e})")
    offsets = np.array([(n / 2.0 - j) * h for j in range(n + 1)])
    coeffs = np.array([(-1.0) ** j * math.comb(n, j) for j in range(n + 1)])
    samples = value_fn((x[None, :] + offsets[:, None]).ravel()).reshape(
        (n + 1, x.size))
    with np.errstate(invalid="ignore", over="ignore"):
        return (coeffs @ samples) / h ** n


def _eval(expr, m, eps, x, n, cfg):
    if isinstance(expr, EmbedDist):
        return _embed_deriv_array(expr.dist, m, eps, x, n, cfg)
    if isinstance(expr, EmbedSmooth):
        return mollified_smooth(expr.func, m, eps, x, n)
    if isinstance(expr, SmoothResidual):
        return _residual_smooth(expr.func, m, eps, x, n)
    if isinstance(expr, SmoothDirect):
        return expr.func.deriv(n, x)
    if isinstance(expr, Sum):
        return _eval(expr.left, m, eps, x, n, cfg) + _eval(expr.right, m, eps, x, n, cfg)
    if isinstance(expr, Scale):
        if expr.c == 0.0:
            return np.zeros_like(x)
        return expr.c * _eval(expr.arg, m, eps, x, n, cfg)
    if isinstance(expr, Derivative):
        return _eval(expr.arg, m, eps, x, n + expr.order, cfg)
    if isinstance(expr, Product):
        if n == 0:
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                return (_eval(expr.left, m, eps, x, 0, cfg)
                        * _eval(expr.right, m, eps, x, 0, cfg))
        return _fd(lambda xs: _eval(expr, m, eps, xs, 0, cfg), x, n, eps, cfg)
    if isinstance(expr, Compose):
        if n == 0:
            inner = _eval(expr.arg, m, eps, x, 0, cfg)
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                return expr.outer.value(inner)
        return _fd(lambda xs: _eval(expr, m, eps, xs, 0, cfg), x, n, eps, cfg)
    raise TypeError(f"not a GExpr node: {expr!r}")


def eval_expr(expr, m, eps, x, order=0, config=DEFAULT_CONFIG):
    """Evaluate the order-th x-derivative of a representative at (eps, x)."""
    _check_eps(eps)
    if order < 0:
        raise ValueError("order must be >= 0")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = _eval(expr, m, eps, x_arr, int(order), config)
    out = np.asarray(out, dtype=float)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


@dataclass(frozen=True)
class Representative:
    """Evaluator for a GExpr under a fixed mollifier on a domain Omega."""

    expr: GExpr
    mollifier: Mollifier
    domain: tuple = (-10.0, 10.0)
    config: EvalConfig = DEFAULT_CONFIG

    def eval(self, eps, x):
        return eval_expr(self.expr, self.mollifier, eps, x, 0, self.config)

    def deriv(self, eps, x, order):
        return eval_expr(self.expr, self.mollifier, eps, x, order, self.config)


def represent(expr, m, domain=(-10.0, 10.0), config=DEFAULT_CONFIG):
    return Representative(expr, m, tuple(domain), config)


# -- JSON expression grammar ---------------------------------------------------

def expr_to_json(expr):
    if isinstance(expr, EmbedDist):
        d = expr.dist
        obj = {"op": "embed", "dist": d.tag}
        if d.tag == "power_plus":
            obj["r"] = d.r
        elif d.tag == "polynomial":
            obj["coeffs"] = list(d.coeffs)
        elif d.tag == "smooth_test":
            obj.update(center=d.center, radius=d.radius)
            if d.normalization != 1.0:
                obj["normalization"] = d.normalization
        return obj
    if isinstance(expr, EmbedSmooth):
        obj = {"op": "embed_smooth", "name": expr.func.name}
        if expr.func.name == "poly":
            obj["coeffs"] = list(expr.func.coeffs)
        return obj
    if isinstance(expr, SmoothResidual):
        obj = {"op": "smooth_residual", "name": expr.func.name}
        if expr.func.name == "poly":
            obj["coeffs"] = list(expr.func.coeffs)
        return obj
    if isinstance(expr, SmoothDirect):
        obj = {"op": "smooth", "name": expr.func.name}
        if expr.func.name == "poly":
            obj["coeffs"] = list(expr.func.coeffs)
        return obj
    if isinstance(expr, Sum):
        return {"op": "sum", "args": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, Product):
        return {"op": "product", "args": [expr_to_json(expr.left), expr_to_json(expr.right)]}
    if isinstance(expr, Scale):
        return {"op": "scale", "c": expr.c, "arg": expr_to_json(expr.arg)}
    if isinstance(expr, Derivative):
        return {"op": "derive", "order": expr.order, "arg": expr_to_json(expr.arg)}
    if isinstance(expr, Compose):
        obj = {"op": "compose", "outer": expr.outer.name, "arg": expr_to_json(expr.arg)}
        if expr.outer.name == "poly":
            obj["outer_coeffs"] = list(expr.outer.coeffs)
        return obj
    raise TypeError(f"not a GExpr node: {expr!r}")


def _smooth_from_json(name, coeffs):
    return SmoothFn(name, tuple(coeffs) if coeffs is not None else None)


def expr_from_json(obj):
    """Parse the CLI expression grammar; raises ValueError on malformed input."""
    if not isinstance(obj, dict) or "op" not in obj:
        raise ValueError(f"expression node must be a dict with an 'op': {obj!r}")
    op = obj["op"]
    try:
        if op == "embed":
            tag = obj["dist"]
            kwargs = {}
            if "r" in obj:
                kwargs["r"] = float(obj["r"])
            if "coeffs" in obj:
                kwargs["coeffs"] = tuple(obj["coeffs"])
            for key in ("center", "radius", "normalization"):
                if key in obj:
                    kwargs[key] = float(obj[key])
            return EmbedDist(DistKind(tag, **kwargs))
        if op == "embed_smooth":
            return EmbedSmooth(_smooth_from_json(obj["name"], obj.get("coeffs")))
        if op == "smooth_residual":
            return SmoothResidual(_smooth_from_json(obj["name"], obj.get("coeffs")))
        if op == "smooth":
            return SmoothDirect(_smooth_from_json(obj["name"], obj.get("coeffs")))
        if op in ("sum", "product"):
            args = obj["args"]
            if not isinstance(args, list) or len(args) < 2:
                raise ValueError(f"{op} requires a list of at least two args")
            parsed = [expr_from_json(a) for a in args]
            return gsum(*parsed) if op == "sum" else gproduct(*parsed)
        if op == "scale":
            return Scale(float(obj["c"]), expr_from_json(obj["arg"]))
        if op == "derive":
            return Derivative(int(obj["order"]), expr_from_json(obj["arg"]))
        if op == "compose":
            outer = _smooth_from_json(obj["outer"], obj.get("outer_coeffs"))
            return Compose(outer, expr_from_json(obj["arg"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed expression node {obj!r}: {exc}") from exc
    raise ValueError(f"unknown expression op {op!r}")
