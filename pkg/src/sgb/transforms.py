"""Sharp constants and the rate-integral transform behind pathwise moment bounds.

For an exponent ``p`` in (0, 1) the three constants

    beta   = (1 - p)^(-1)
    alpha1 = (1 - p)^(-1/p)
    alpha2 = 1 / p

are the sharp factors appearing on the two sides of the stochastic
Gronwall/Bihari estimates verified by this package.  For a nondecreasing
rate function ``eta`` on ``[c0, inf)`` the transform

    G(x) = integral from c to x of du / eta(u)

is increasing and concave; its increasing inverse turns an additive drift
budget into a multiplicative growth envelope via ``G^{-1}(G(x) - kappa*a)``.
The lower endpoint is handled by the usual convention: when the integral
diverges at ``c0``, ``G(c0) = -inf`` and ``G^{-1}(G(c0) + a) := c0``.

Three closed-form catalog rates are built in (``x``, ``x log x`` and
``x log x log log x``, whose transforms are the iterated logarithms), and
arbitrary nondecreasing rates are supported through adaptive quadrature
plus bracketed bisection.  The exponent-transformed rate

    eta_p(x) = (p / (1 - p)) * eta(x^(1/p)) * x^(1 - 1/p)

and its transform ``tilde_G_p(x) = (1 - p) * G(x^(1/p))`` are provided with
both an identity route and a direct-integration debug route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "DomainError",
    "RangeOverflowError",
    "PExponent",
    "SharpConstants",
    "sharp_constants",
    "ShapeFlags",
    "EtaSpec",
    "BoundTransform",
    "catalog_transform",
    "eval_G",
    "eval_G_inv",
    "eval_eta_p",
    "eval_tilde_G_p",
    "damped_bound",
    "damped_bound_log",
    "adaptive_simpson",
]

P_MAX = 1.0 - 1e-6
_E = math.e
_EE = math.exp(math.e)


class DomainError(ValueError):
    """An argument fell outside the mathematical domain of an operation."""


class RangeOverflowError(ValueError):
    """A requested inverse-transform value lies above the range of G."""


# ---------------------------------------------------------------------------
# exponent and constants
# ---------------------------------------------------------------------------


def _as_p(p: Union[float, "PExponent"]) -> float:
    if isinstance(p, PExponent):
        return p.p
    return PExponent(float(p)).p


@dataclass(frozen=True)
class PExponent:
    """A moment exponent restricted to (0, 1), rejected above 1 - 1e-6."""

    p: float

    def __post_init__(self) -> None:
        p = self.p
        if not (isinstance(p, (int, float)) and math.isfinite(p)):
            raise DomainError(f"p must be a finite real in (0, 1), got {p!r}")
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must satisfy 0 < p < 1, got p={p}")
        if p > P_MAX:
            raise DomainError(
                f"p={p} is closer to 1 than the supported cutoff {P_MAX}; "
                "the constants are numerically meaningless beyond it"
            )


@dataclass(frozen=True)
class SharpConstants:
    """The sharp constant triple (and their product) for a given exponent."""

    p: float
    beta: float
    alpha1: float
    alpha2: float
    alpha12: float


def sharp_constants(p: Union[float, PExponent]) -> SharpConstants:
    """Return beta, alpha1, alpha2 and alpha1*alpha2 for ``p`` in (0, 1).

    beta = 1/(1-p) is the damping rate that makes the supremum estimate
    sharp, alpha1 = (1-p)^(-1/p) is the constant of the E[H]-variant and
    alpha1*alpha2 = (1-p)^(-1/p)/p the constant of the ||H||_p-variant.
    """
    pv = _as_p(p)
    one_minus = 1.0 - pv
    beta = 1.0 / one_minus
    # (1-p)^(-1/p) through the log to keep p near the cutoff well-behaved
    alpha1 = math.exp(-math.log(one_minus) / pv)
    alpha2 = 1.0 / pv
    return SharpConstants(pv, beta, alpha1, alpha2, alpha1 * alpha2)


# ---------------------------------------------------------------------------
# rate functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShapeFlags:
    """Declared shape of a rate function (not re-derived symbolically)."""

    convex: bool = False
    concave: bool = False
    eta_at_c0_is_zero: bool = False


@dataclass(frozen=True)
class EtaSpec:
    """A nondecreasing rate function ``eta`` on ``[c0, inf)``.

    ``kind`` is one of ``catalog-linear``, ``catalog-xlogx``,
    ``catalog-xloglogx`` or ``numeric``; the catalog kinds carry exact
    closed forms for their transforms.
    """

    kind: str
    c0: float
    fn: Callable[[np.ndarray], np.ndarray]
    shape: ShapeFlags
    label: str = ""

    def __call__(self, x):
        return self.fn(x)

    @staticmethod
    def linear() -> "EtaSpec":
        return EtaSpec(
            kind="catalog-linear",
            c0=0.0,
            fn=lambda x: np.asarray(x, dtype=float) + 0.0,
            shape=ShapeFlags(convex=True, concave=True, eta_at_c0_is_zero=True),
            label="x",
        )

    @staticmethod
    def x_log_x() -> "EtaSpec":
        return EtaSpec(
            kind="catalog-xlogx",
            c0=1.0,
            fn=lambda x: np.asarray(x, dtype=float) * np.log(x),
            shape=ShapeFlags(convex=True, concave=False, eta_at_c0_is_zero=True),
            label="x log x",
        )

    @staticmethod
    def x_log_x_log_log_x() -> "EtaSpec":
        return EtaSpec(
            kind="catalog-xloglogx",
            c0=_E,
            fn=lambda x: np.asarray(x, dtype=float) * np.log(x) * np.log(np.log(x)),
            shape=ShapeFlags(convex=True, concave=False, eta_at_c0_is_zero=True),
            label="x log x loglog x",
        )

    @staticmethod
    def numeric(
        fn: Callable[[np.ndarray], np.ndarray],
        c0: float,
        convex: bool = False,
        concave: bool = False,
        zero_at_floor: bool = False,
        label: str = "",
    ) -> "EtaSpec":
        if not (math.isfinite(c0) and c0 >= 0.0):
            raise DomainError(f"c0 must be a finite real >= 0, got c0={c0}")
        return EtaSpec(
            kind="numeric",
            c0=float(c0),
            fn=fn,
            shape=ShapeFlags(convex=convex, concave=concave, eta_at_c0_is_zero=zero_at_floor),
            label=label or "numeric",
        )


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def adaptive_simpson(
    fn: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Adaptive Simpson integral of ``fn`` over ``[a, b]``.

    Interval-bisecting with Richardson correction; ``tol`` is an absolute
    tolerance and ``max_depth`` the bisection depth cap.
    """
    if a == b:
        return 0.0
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(fn, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(fn, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fn(lm), fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _simpson_rec(
        fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def _geometric_cuts(lo: float, hi: float, c0: float, cap: int = 2000) -> list:
    """Cut points for integrating 1/eta over [lo, hi], lo > c0.

    Segments double geometrically in the offset from c0 so each piece is
    well scaled for the depth-limited Simpson rule even when hi/lo spans
    hundreds of orders of magnitude.
    """
    pts = [lo]
    o = lo - c0
    o_hi = hi - c0
    while o * 2.0 < o_hi and len(pts) < cap:
        o *= 2.0
        pts.append(c0 + o)
    pts.append(hi)
    return pts


def _integrate_inv_eta(eta: EtaSpec, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Signed integral of du/eta(u) from lo to hi (both above the floor)."""
    if lo == hi:
        return 0.0
    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0
    cuts = _geometric_cuts(lo, hi, eta.c0)
    seg_tol = max(tol / max(4, 2 * len(cuts)), 5e-15)
    fn = lambda u: 1.0 / float(eta.fn(u))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += adaptive_simpson(fn, a, b, tol=seg_tol)
    return sign * total


# ---------------------------------------------------------------------------
# the transform
# ---------------------------------------------------------------------------

_CATALOG_DEFAULT_C = {
    "catalog-linear": 1.0,
    "catalog-xlogx": _E,
    "catalog-xloglogx": _EE,
}


def _log1(x):
    return np.log(x)


def _log2(x):
    return np.log(np.log(x))


def _log3(x):
    return np.log(np.log(np.log(x)))


def _exp1(y):
    return np.exp(y)


def _exp2(y):
    with np.errstate(over="ignore"):
        return np.exp(np.exp(y))


def _exp3(y):
    with np.errstate(over="ignore"):
        return np.exp(np.exp(np.exp(y)))


# canonical antiderivative, inverse, log-inverse, and antiderivative-of-log
_CATALOG_CLOSED = {
    "catalog-linear": (_log1, _exp1, lambda y: np.asarray(y, dtype=float) + 0.0, lambda L: np.asarray(L, dtype=float) + 0.0),
    "catalog-xlogx": (_log2, _exp2, _exp1, _log1),
    "catalog-xloglogx": (_log3, _exp3, _exp2, _log2),
}


class BoundTransform:
    """The increasing concave transform ``G`` of a rate function.

    Parameters
    ----------
    eta:
        The rate function specification.
    c:
        Reference point of the integral, ``c > c0``.  Defaults to 1, e and
        e^e for the three catalog kinds; required for numeric rates unless
        closed forms are supplied with their own natural reference.
    mode:
        ``"closed-form"`` or ``"quadrature"``.  Catalog kinds default to
        closed form, numeric rates to quadrature unless a closed-form
        triple is supplied.
    closed_form:
        Optional ``(g0, g0_inv)`` pair of canonical antiderivative and
        inverse for a numeric rate; the reference shift ``g0(c)`` is
        applied internally, so bounds composed as ``G^{-1}(G(x) - a)``
        stay exactly independent of ``c``.
    log_g0_inv, g0_of_log:
        Optional log-channel companions: ``log(g0_inv(y))`` and
        ``g0(exp(L))``.  They let doubly/triply exponential composites be
        evaluated without materializing the overflowing value.
    g_range:
        Range of the canonical ``g0`` (defaults to all of R).
    eps_dom:
        Numeric-quadrature domain floor above ``c0``; below it the
        divergence sentinel ``-inf`` is returned.
    x_ceiling:
        Upper bracket limit for numeric inversion; values of ``G`` beyond
        ``G(x_ceiling)`` raise :class:`RangeOverflowError`.
    """

    def __init__(
        self,
        eta: EtaSpec,
        c: Optional[float] = None,
        mode: Optional[str] = None,
        closed_form: Optional[Tuple[Callable, Callable]] = None,
        log_g0_inv: Optional[Callable] = None,
        g0_of_log: Optional[Callable] = None,
        g_range: Tuple[float, float] = (-math.inf, math.inf),
        eps_dom: Optional[float] = None,
        x_ceiling: float = 1e12,
        quad_tol: float = 1e-12,
    ) -> None:
        self.eta = eta
        if c is None:
            c = _CATALOG_DEFAULT_C.get(eta.kind)
            if c is None:
                raise DomainError("numeric rates need an explicit reference point c")
        c = float(c)
        if not (c > eta.c0):
            raise DomainError(f"reference point c={c} must exceed the floor c0={eta.c0}")
        self.c = c
        self.x_ceiling = float(x_ceiling)
        self.quad_tol = float(quad_tol)
        self.eps_dom = (
            float(eps_dom) if eps_dom is not None else 1e-8 * max(1.0, eta.c0)
        )

        want_quadrature = mode == "quadrature"
        if mode not in (None, "quadrature", "closed-form"):
            raise DomainError(f"unknown mode {mode!r}")
        if not want_quadrature and eta.kind in _CATALOG_CLOSED:
            self.mode = "closed-form"
            self._g0, self._g0_inv, self._log_g0_inv, self._g0_of_log = _CATALOG_CLOSED[eta.kind]
            self._g_range = (-math.inf, math.inf)
        elif not want_quadrature and closed_form is not None:
            self.mode = "closed-form"
            self._g0, self._g0_inv = closed_form
            self._log_g0_inv = log_g0_inv
            self._g0_of_log = g0_of_log
            self._g_range = (float(g_range[0]), float(g_range[1]))
        else:
            if mode == "closed-form":
                raise DomainError(f"rate kind {eta.kind!r} has no closed form to use")
            self.mode = "quadrature"
            self._g0 = self._g0_inv = self._log_g0_inv = self._g0_of_log = None
            floor = eta.c0 + self.eps_dom
            lo = -_integrate_inv_eta(eta, floor, c, self.quad_tol) if floor < c else 0.0
            hi = _integrate_inv_eta(eta, c, self.x_ceiling, self.quad_tol)
            self._g_range = (lo, hi)

        self._g0c = self._shift()
        self.domain_G_inv = (self._g_range[0] - self._g0c, self._g_range[1] - self._g0c)

    def _shift(self) -> float:
        if self.mode == "closed-form":
            return float(self._g0(self.c))
        return 0.0  # quadrature integrals are taken from c directly

    # -- forward -----------------------------------------------------------

    def g(self, x):
        """G(x); returns -inf at/below the floor where the integral diverges."""
        if self.mode == "closed-form":
            arr = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                vals = np.where(arr > self.eta.c0, self._g0(arr) - self._g0c, -math.inf)
            return float(vals) if np.isscalar(x) or arr.ndim == 0 else vals
        return self._g_quadrature(x)

    def _g_quadrature(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        floor = self.eta.c0 + self.eps_dom
        out = np.empty_like(arr)
        for i, xi in enumerate(arr):
            if not math.isfinite(xi) and xi > 0:
                out[i] = self._g_range[1]
            elif xi < floor:
                out[i] = -math.inf
            else:
                out[i] = _integrate_inv_eta(self.eta, self.c, min(xi, self.x_ceiling), self.quad_tol)
        return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out

    def g_of_log(self, log_x):
        """G(exp(log_x)) through the log channel (closed-form modes only)."""
        if self._g0_of_log is None:
            raise DomainError("this transform has no log-channel antiderivative")
        return self._g0_of_log(log_x) - self._g0c

    # -- inverse -----------------------------------------------------------

    def g_inv(self, y):
        """Increasing inverse of G; maps -inf (and anything below the
        representable range) to the floor c0, and raises
        :class:`RangeOverflowError` above the range."""
        if self.mode == "closed-form":
            arr = np.asarray(y, dtype=float)
            lo, hi = self.domain_G_inv
            if np.any(arr > hi):
                raise RangeOverflowError(
                    f"upper-range overflow: y={float(np.max(arr))} above sup range(G)={hi}"
                )
            with np.errstate(all="ignore"):
                vals = self._g0_inv(np.maximum(arr, lo) + self._g0c)
            vals = np.where(arr <= lo, self.eta.c0, vals) if lo > -math.inf else np.where(
                arr == -math.inf, self.eta.c0, vals
            )
            return float(vals) if np.isscalar(y) or arr.ndim == 0 else vals
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(arr)
        for i, yi in enumerate(arr):
            out[i] = self._g_inv_quadrature_scalar(float(yi))
        return float(out[0]) if np.isscalar(y) or np.asarray(y).ndim == 0 else out

    def _g_inv_quadrature_scalar(self, y: float) -> float:
        lo_y, hi_y = self.domain_G_inv
        if y == -math.inf or y <= lo_y:
            return self.eta.c0
        if y > hi_y:
            raise RangeOverflowError(
                f"upper-range overflow: y={y} above sup range(G)={hi_y}"
            )
        if y == 0.0:
            return self.c
        c0 = self.eta.c0
        if y > 0:
            x0, g0v = self.c, 0.0
            x1, g1v = x0, g0v
            while g1v < y:
                x0, g0v = x1, g1v
                x1 = min(c0 + 2.0 * (x1 - c0), self.x_ceiling)
                g1v = g0v + _integrate_inv_eta(self.eta, x0, x1, self.quad_tol)
                if x1 >= self.x_ceiling and g1v < y:
                    raise RangeOverflowError("upper-range overflow during bracketing")
        else:
            x1, g1v = self.c, 0.0
            floor = c0 + self.eps_dom
            x0, g0v = x1, g1v
            while g0v > y:
                x1, g1v = x0, g0v
                x0 = max(c0 + 0.5 * (x0 - c0), floor)
                g0v = g1v - _integrate_inv_eta(self.eta, x0, x1, self.quad_tol)
                if x0 <= floor and g0v > y:
                    return c0
        # bisect [x0, x1]; G is increasing, G(x0) <= y <= G(x1)
        for _ in range(64):
            if (x1 - x0) <= 1e-12 * max(1.0, abs(x1)):
                break
            xm = 0.5 * (x0 + x1)
            gm = g0v + _integrate_inv_eta(self.eta, x0, xm, self.quad_tol)
            if gm < y:
                x0, g0v = xm, gm
            else:
                x1 = xm
        return 0.5 * (x0 + x1)

    def log_g_inv(self, y):
        """log(G^{-1}(y)) without materializing the composite (closed form)."""
        if self._log_g0_inv is None:
            raise DomainError("this transform has no log-channel inverse")
        arr = np.asarray(y, dtype=float)
        lo, hi = self.domain_G_inv
        if np.any(arr > hi):
            raise RangeOverflowError("upper-range overflow in log channel")
        with np.errstate(all="ignore"):
            vals = self._log_g0_inv(arr + self._g0c)
        return float(vals) if np.isscalar(y) or arr.ndim == 0 else vals

    # -- damped composite --------------------------------------------------

    def damped(self, x, a, kappa: float = 1.0):
        """``G^{-1}(G(x) - kappa * a)``, the damped growth envelope.

        For the closed-form kinds the reference point cancels exactly and
        the composition is evaluated through canonical antiderivatives;
        results beyond double range come back as ``inf`` (use
        :meth:`damped_log` for the stable log channel).
        """
        if np.isscalar(a) and np.isscalar(kappa) and kappa * a == 0.0:
            return x
        if self.mode == "closed-form":
            with np.errstate(all="ignore"):
                y = self._g0(np.asarray(x, dtype=float)) - np.asarray(kappa * np.asarray(a, dtype=float))
                out = self._g0_inv(y)
            lo = self._g_range[0]
            if lo > -math.inf:
                out = np.where(y <= lo, self.eta.c0, out)
            return float(out) if np.isscalar(x) and np.isscalar(a) else out
        arr_x = np.atleast_1d(np.asarray(x, dtype=float))
        arr_a = np.broadcast_to(np.asarray(a, dtype=float), arr_x.shape)
        out = np.empty_like(arr_x)
        for i in range(arr_x.size):
            yv = self.g(float(arr_x.flat[i])) - kappa * float(arr_a.flat[i])
            out.flat[i] = self._g_inv_quadrature_scalar(yv) if yv > -math.inf else self.eta.c0
        return float(out[0]) if np.isscalar(x) and np.isscalar(a) else out

    def damped_log(self, a, kappa: float = 1.0, x=None, log_x=None):
        """Log of the damped envelope, from ``x`` or directly from ``log x``.

        The overflow-safe path for doubly/triply exponential envelopes: the
        returned value is ``log G^{-1}(G(x) - kappa*a)`` computed entirely
        in canonical-antiderivative coordinates.
        """
        if (x is None) == (log_x is None):
            raise DomainError("pass exactly one of x or log_x")
        if self.mode != "closed-form" or self._log_g0_inv is None:
            val = self.damped(np.exp(log_x) if x is None else x, a, kappa)
            with np.errstate(divide="ignore"):
                return np.log(val)
        with np.errstate(all="ignore"):
            if log_x is not None:
                if self._g0_of_log is None:
                    raise DomainError("this transform has no log-channel antiderivative")
                y = self._g0_of_log(np.asarray(log_x, dtype=float)) - np.asarray(
                    kappa * np.asarray(a, dtype=float)
                )
            else:
                y = self._g0(np.asarray(x, dtype=float)) - np.asarray(
                    kappa * np.asarray(a, dtype=float)
                )
            out = self._log_g0_inv(y)
        scalar_in = (x is None and np.isscalar(log_x) or log_x is None and np.isscalar(x)) and np.isscalar(a)
        return float(out) if scalar_in and np.ndim(out) == 0 else out


def catalog_transform(kind: str, c: Optional[float] = None, **kw) -> BoundTransform:
    """Build a transform for one of the catalog rates by kind string.

    Accepts either the full kind (``catalog-linear`` ...) or the short
    alias (``linear``, ``xlogx``, ``xloglogx``).
    """
    builders = {
        "catalog-linear": EtaSpec.linear,
        "catalog-xlogx": EtaSpec.x_log_x,
        "catalog-xloglogx": EtaSpec.x_log_x_log_log_x,
    }
    full = kind if kind.startswith("catalog-") else f"catalog-{kind}"
    if full not in builders:
        raise DomainError(f"unknown catalog kind {kind!r}")
    return BoundTransform(builders[full](), c=c, **kw)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def eval_G(t: BoundTransform, x):
    """Evaluate ``G(x)``; ``-inf`` is the lower-boundary divergence sentinel."""
    return t.g(x)


def eval_G_inv(t: BoundTransform, y):
    """Evaluate the increasing inverse ``G^{-1}(y)``, with ``-inf -> c0``."""
    return t.g_inv(y)


def eval_eta_p(eta: EtaSpec, p: Union[float, PExponent], x):
    """The exponent-transformed rate ``(p/(1-p)) eta(x^{1/p}) x^{1-1/p}``.

    Defined for ``x > 0`` with ``x^{1/p}`` above the floor of ``eta``.
    """
    pv = _as_p(p)
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("x must be positive for the exponent-transformed rate")
    floor_p = eta.c0 ** pv
    if np.any(arr < floor_p * (1.0 - 1e-12)):
        raise DomainError(
            f"x must lie at or above c0^p = {floor_p} for the transformed rate"
        )
    with np.errstate(all="ignore"):
        out = (pv / (1.0 - pv)) * np.asarray(eta.fn(arr ** (1.0 / pv))) * arr ** (1.0 - 1.0 / pv)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def eval_tilde_G_p(
    eta: EtaSpec,
    p: Union[float, PExponent],
    c: float,
    x,
    route: str = "identity",
    quad_tol: float = 1e-12,
):
    """``tilde_G_p(x) = integral from c^p to x of du/eta_p(u)``.

    The default route uses the exact identity ``(1-p) * G(x^{1/p})``; the
    ``"quadrature"`` route integrates ``1/eta_p`` directly and exists so the
    identity can be audited numerically.
    """
    pv = _as_p(p)
    if route == "identity":
        t = BoundTransform(eta, c=c) if eta.kind != "numeric" else BoundTransform(
            eta, c=c, mode="quadrature", quad_tol=quad_tol
        )
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = (1.0 - pv) * np.asarray(t.g(arr ** (1.0 / pv)))
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out
    if route != "quadrature":
        raise DomainError(f"unknown route {route!r}")
    eta_p_spec = EtaSpec.numeric(
        fn=lambda u: eval_eta_p(eta, pv, u),
        c0=eta.c0 ** pv if eta.c0 > 0 else 0.0,
        label=f"eta_p of {eta.label}",
    )
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    cp = float(c) ** pv
    out = np.empty_like(arr)
    for i, xi in enumerate(arr):
        out[i] = _integrate_inv_eta(eta_p_spec, cp, float(xi), quad_tol)
    return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def damped_bound(t: BoundTransform, x, a, kappa: float = 1.0):
    """``G^{-1}(G(x) - kappa*a)`` with the safe evaluation order."""
    return t.damped(x, a, kappa)


def damped_bound_log(t: BoundTransform, a, kappa: float = 1.0, x=None, log_x=None):
    """Log-channel variant of :func:`damped_bound` for extreme scales."""
    return t.damped_log(a, kappa, x=x, log_x=log_x)
