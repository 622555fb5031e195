"""Process constructions and samplers for the pathwise bound experiments.

Everything here is either exactly sampleable (gambler's-ruin suprema, the
block construction, the exponential-clock jump process, the appended-
excursion construction) or a left-point Euler discretization of an SDE
whose drift/diffusion may read the running supremum of the path.

Randomness is counter-based: :class:`RngStream` wraps numpy's Philox
generator keyed by ``(seed, stream_id)``, so any batch can be split into
independent, order-stable streams and reassembled identically for every
worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .transforms import BoundTransform, DomainError, EtaSpec

__all__ = [
    "RngStream",
    "stream_map",
    "SimPath",
    "BlockParams",
    "PathBatch",
    "PathSdeSpec",
    "SegmentView",
    "sample_absorbed_bm_max",
    "absorbed_bm_max_from_uniform",
    "simulate_sharpness_blocks",
    "sample_block_suprema",
    "block_path_batch",
    "exp_clock_batch",
    "block_supremum_moment",
    "block_growth_rate",
    "euler_maruyama",
    "euler_maruyama_batch",
    "sample_linear_sde",
    "simulate_exp_clock_process",
    "sample_exp_clock_terminals",
    "simulate_alpha_sharpness",
    "simulate_convex_counterexample",
    "sample_convex_counterexample",
    "convex_counterexample_transform",
    "simulate_sqrt_shift_process",
]

RngLike = Union["RngStream", np.random.Generator, int]


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream) pair naming one independent Philox stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2**64, self.stream_id % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, i: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id * 1_000_003 + 1 + i)


def _as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


def _workers() -> int:
    try:
        w = int(os.environ.get("SGB_THREADS", "1"))
    except ValueError:
        w = 1
    return max(1, w)


def stream_map(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    seed_stream: Union[RngStream, int],
    n_total: int,
    n_chunks: int = 16,
) -> np.ndarray:
    """Run ``fn(generator, size)`` over a fixed split of ``n_total`` draws.

    The split into ``n_chunks`` substreams is independent of the worker
    count (capped by the ``SGB_THREADS`` environment variable), and chunks
    are concatenated in stream order, so the output is identical however
    the work is scheduled.
    """
    base = seed_stream if isinstance(seed_stream, RngStream) else RngStream(int(seed_stream))
    n_chunks = max(1, min(n_chunks, n_total))
    sizes = [n_total // n_chunks + (1 if i < n_total % n_chunks else 0) for i in range(n_chunks)]
    tasks = [(base.substream(i).generator(), sizes[i]) for i in range(n_chunks)]
    workers = _workers()
    if workers == 1:
        parts = [fn(g, s) for g, s in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda gs: fn(gs[0], gs[1]), tasks))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[j] for p in parts]) for j in range(len(parts[0])))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# path containers
# ---------------------------------------------------------------------------


@dataclass
class SimPath:
    """One simulated quadruple path (X, A, M, H) with its running supremum.

    ``tag`` declares which integral-inequality form the path is supposed to
    satisfy: ``"sup"`` (rate applied to the pre-time supremum) or
    ``"nosup"`` (rate applied to the left limit itself).
    """

    times: np.ndarray
    X: np.ndarray
    A: np.ndarray
    H: np.ndarray
    M: np.ndarray
    Xsup: np.ndarray
    tag: Optional[str] = None
    eta: Optional[EtaSpec] = None
    log_X: Optional[np.ndarray] = None

    def validate(self, tol: float = 1e-8) -> float:
        """Structural checks plus the declared-inequality residual.

        Raises on structural violations (channel monotonicity, initial
        values, supremum bookkeeping); returns the largest residual
        ``X_t - (int eta dA + M_t + H_t)`` over the grid, which should be
        ``<= tol`` for a path honestly tagged ``sup``/``nosup``.
        """
        t, X, A, H, M = self.times, self.X, self.A, self.H, self.M
        n = t.size
        for name, ch in (("X", X), ("A", A), ("H", H), ("M", M), ("Xsup", self.Xsup)):
            if ch.shape != (n,):
                raise DomainError(f"channel {name} does not match the grid")
        if abs(A[0]) > 0 or abs(M[0]) > 0:
            raise DomainError("A and M must start at 0")
        if np.any(np.diff(A) < -1e-12) or np.any(np.diff(H) < -1e-12):
            raise DomainError("A and H must be nondecreasing")
        if not np.allclose(self.Xsup, np.maximum.accumulate(X), rtol=1e-12, atol=1e-12):
            raise DomainError("Xsup is not the running maximum of X")
        c0 = self.eta.c0 if self.eta is not None else 0.0
        if np.any(X < c0 - tol):
            raise DomainError(f"X dips below the rate floor c0={c0}")
        if self.eta is None or self.tag is None:
            return 0.0
        base = self.Xsup if self.tag == "sup" else X
        increments = np.asarray(self.eta.fn(base[:-1])) * np.diff(A)
        drift_int = np.concatenate([[0.0], np.cumsum(increments)])
        residual = X - (drift_int + M + H)
        return float(np.max(residual))


@dataclass
class PathBatch:
    """Terminal/supremum summaries of a batch of simulated paths.

    Checks only need a handful of per-path scalars; batches therefore hold
    reductions instead of full grids so a million paths stay cheap.  Log
    channels carry the same quantities in log scale for processes whose
    suprema overflow doubles.  ``damped_sup_log`` is the pathwise supremum
    of ``log G^{-1}(G(X_t) - kappa*A_t)`` tracked during simulation.
    """

    t_final: float
    tag: str
    x_final: np.ndarray
    xsup: np.ndarray
    a_final: np.ndarray
    h_final: np.ndarray
    log_x_final: Optional[np.ndarray] = None
    log_xsup: Optional[np.ndarray] = None
    damped_sup_log: Optional[np.ndarray] = None
    damped_kappa: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.xsup.size)


# ---------------------------------------------------------------------------
# exact samplers: ruin suprema and the block construction
# ---------------------------------------------------------------------------


def absorbed_bm_max_from_uniform(start: float, u):
    """Supremum of a Brownian path from ``start`` absorbed at 0, as start/u.

    Gambler's ruin: the path reaches level ``b >= start`` before absorption
    with probability ``start/b``, so the supremum has the Pareto law
    ``P[M > b] = start/b`` and inverse-CDF sampling gives ``M = start/U``.
    """
    if np.any(np.asarray(start) <= 0):
        raise DomainError("start must be positive")
    return start / u


def sample_absorbed_bm_max(start: float, rng: RngLike, size: Optional[int] = None):
    g = _as_generator(rng)
    u = g.random() if size is None else g.random(size)
    return absorbed_bm_max_from_uniform(start, u)


@dataclass(frozen=True)
class BlockParams:
    """Block-construction layout: ``k`` blocks of length ``delta``, each
    spending the fraction ``epsilon`` in its diffusive phase."""

    epsilon: float
    delta: float
    k: int

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0,1), got {self.delta}")
        if self.k < 0 or int(self.k) != self.k:
            raise DomainError(f"k must be a nonnegative integer, got {self.k}")

    @property
    def gamma(self) -> float:
        return (1.0 - self.epsilon) * self.delta

    @property
    def t_final(self) -> float:
        """Sampling time of the k-th block supremum."""
        return self.k * self.delta + self.epsilon * self.delta


def sample_block_suprema(bp: BlockParams, rng: RngLike, size: int) -> np.ndarray:
    """Exact draws of the running supremum after the k-th diffusive phase.

    Block zero starts at 1 and its absorbed excursion contributes the
    Pareto supremum 1/U_0; each later block restarts, after the drift
    phase, from ``gamma`` times the previous supremum, so

        S_0 = 1/U_0,   S_{j+1} = S_j * max(1, gamma / U_{j+1}).
    """
    g = _as_generator(rng)
    s = 1.0 / g.random(size)
    gamma = bp.gamma
    for _ in range(bp.k):
        s *= np.maximum(1.0, gamma / g.random(size))
    return s


def simulate_sharpness_blocks(bp: BlockParams, rng: RngLike) -> Tuple[float, np.ndarray]:
    """One draw of the block construction, with the per-block trace."""
    g = _as_generator(rng)
    trace = np.empty(bp.k + 1)
    s = 1.0 / g.random()
    trace[0] = s
    for j in range(bp.k):
        s *= max(1.0, bp.gamma / g.random())
        trace[j + 1] = s
    return float(s), trace


def block_path_batch(bp: BlockParams, rng: RngLike, n: int) -> PathBatch:
    """Block-construction draws packaged as a supremum-tagged batch.

    The construction has ``A_t = t`` and ``H = 1``; only the supremum is
    sampled exactly, and ``x_final`` mirrors it (the terminal value never
    enters supremum-form checks).
    """
    s = sample_block_suprema(bp, rng, n)
    log_s = np.log(s)
    return PathBatch(
        t_final=bp.t_final,
        tag="sup",
        x_final=s,
        xsup=s,
        a_final=np.full(n, bp.t_final),
        h_final=np.ones(n),
        log_x_final=log_s,
        log_xsup=log_s,
        meta={"epsilon": bp.epsilon, "delta": bp.delta, "k": bp.k},
    )


def exp_clock_batch(p: float, t: float, rng: RngLike, n: int) -> PathBatch:
    """Clocked-growth terminal batch: the path is nondecreasing, so the
    supremum equals the terminal value and both are exact."""
    x, a = sample_exp_clock_terminals(p, t, rng, n)
    log_x = np.log(x)
    return PathBatch(
        t_final=t,
        tag="nosup",
        x_final=x,
        xsup=x,
        a_final=a,
        h_final=np.ones(n),
        log_x_final=log_x,
        log_xsup=log_x,
        meta={"p": p},
    )


def block_supremum_moment(bp: BlockParams, p: float) -> float:
    """Closed-form E[S_k^p] = (1-p)^{-1} (1 + p gamma/(1-p))^k."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0,1), got {p}")
    return (1.0 + p * bp.gamma / (1.0 - p)) ** bp.k / (1.0 - p)


def block_growth_rate(p: float, delta: float, epsilon: float) -> float:
    """Exponential growth rate of ||S||_p per unit time for block length delta.

    Equals ``log(1 + p*beta*gamma) / (p*delta)`` with ``gamma=(1-eps)*delta``;
    increases to ``beta = 1/(1-p)`` as ``delta`` (then ``epsilon``) go to 0.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0,1), got {p}")
    gamma = (1.0 - epsilon) * delta
    return math.log1p(p * gamma / (1.0 - p)) / (p * delta)


# ---------------------------------------------------------------------------
# Euler-Maruyama with supremum-reading coefficients
# ---------------------------------------------------------------------------


class SegmentView:
    """What a coefficient may read at time t: the current state and the
    running supremum of |x| over the whole history including the initial
    segment.  Batched: ``value`` has shape (n,) for d=1, else (n, d)."""

    __slots__ = ("t", "value", "sup_abs")

    def __init__(self, t: float, value: np.ndarray, sup_abs: np.ndarray):
        self.t = t
        self.value = value
        self.sup_abs = sup_abs


@dataclass
class PathSdeSpec:
    """A path-dependent SDE ``dX = f(t, seg) dt + g(t, seg) dW``.

    ``z`` is the initial segment on ``[-r, 0]`` (a constant or a callable
    of s); coefficients receive a :class:`SegmentView`.  For ``d == 1`` the
    coefficients take and return shape-(n,) arrays; for ``d > 1`` the drift
    returns (n, d) and the diffusion (n, d, m).

    The optional channels declare the quadruple decomposition used by
    residual checks: ``a_channel``/``h_channel`` are deterministic time
    functions, and the martingale channel is accumulated as the running
    Euler stochastic integral (d = 1 only).
    """

    d: int
    m: int
    f: Callable[[float, SegmentView], np.ndarray]
    g: Callable[[float, SegmentView], np.ndarray]
    r: float = 0.0
    z: Union[float, np.ndarray, Callable[[float], np.ndarray]] = 0.0
    observable: Optional[Callable[[np.ndarray], np.ndarray]] = None
    a_channel: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h_channel: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eta: Optional[EtaSpec] = None
    tag: Optional[str] = None
    label: str = ""

    def initial_state(self) -> np.ndarray:
        if callable(self.z):
            return np.atleast_1d(np.asarray(self.z(0.0), dtype=float))
        return np.broadcast_to(np.asarray(self.z, dtype=float), (self.d,)).astype(float)

    def initial_sup_abs(self, n_probe: int = 65) -> float:
        """Sup of |z(s)| over the initial segment, probed on a fine grid."""
        if self.r <= 0:
            return float(np.linalg.norm(self.initial_state()))
        ss = np.linspace(-self.r, 0.0, n_probe)
        if callable(self.z):
            vals = [np.linalg.norm(np.atleast_1d(self.z(float(s)))) for s in ss]
            return float(np.max(vals))
        return float(np.linalg.norm(self.initial_state()))


def euler_maruyama_batch(
    spec: PathSdeSpec,
    t_end: float,
    dt: float,
    rng: RngLike,
    n: int,
    reducers: Optional[Dict[str, Callable[[float, np.ndarray, np.ndarray], np.ndarray]]] = None,
    keep_grid: bool = False,
) -> dict:
    """Simulate ``n`` paths at once with left-point Euler steps.

    Returns a dict with terminal states, observable suprema, the absolute
    running supremum, the accumulated martingale channel (d=1), the running
    maximum and arg-max time of every reducer, and optionally the full
    observable/martingale grids.
    """
    if dt <= 0 or t_end <= 0:
        raise DomainError("dt and T must be positive")
    g = _as_generator(rng)
    steps = max(1, int(round(t_end / dt)))
    times = np.linspace(0.0, t_end, steps + 1)
    d, m = spec.d, spec.m
    scalar = d == 1

    x0 = spec.initial_state()
    x = np.tile(x0[0] if scalar else x0, (n,) if scalar else (n, 1)).astype(float)
    if scalar:
        x = np.full(n, float(x0[0]))
    sup_abs = np.full(n, spec.initial_sup_abs())
    obs_fn = spec.observable or (lambda v: v if scalar else v[..., 0])
    obs = np.asarray(obs_fn(x), dtype=float)
    obs_sup = obs.copy()
    m_acc = np.zeros(n)

    red_names = list(reducers or {})
    red_max = {}
    red_argt = {}
    for name in red_names:
        vals = np.asarray(reducers[name](0.0, x, sup_abs), dtype=float)
        red_max[name] = vals
        red_argt[name] = np.zeros(n)

    grid_obs = np.empty((n, steps + 1)) if keep_grid else None
    grid_m = np.empty((n, steps + 1)) if keep_grid else None
    if keep_grid:
        grid_obs[:, 0] = obs
        grid_m[:, 0] = 0.0

    sqdt = math.sqrt(dt)
    for i in range(steps):
        t = times[i]
        seg = SegmentView(t, x, sup_abs)
        drift = np.asarray(spec.f(t, seg), dtype=float)
        diff = np.asarray(spec.g(t, seg), dtype=float)
        if scalar:
            dw = g.normal(0.0, sqdt, size=n)
            x = x + drift * dt + diff * dw
            m_acc = m_acc + diff * dw
            np.maximum(sup_abs, np.abs(x), out=sup_abs)
        else:
            dw = g.normal(0.0, sqdt, size=(n, m))
            x = x + drift * dt + np.einsum("ndm,nm->nd", diff, dw)
            np.maximum(sup_abs, np.linalg.norm(x, axis=-1), out=sup_abs)
        obs = np.asarray(obs_fn(x), dtype=float)
        np.maximum(obs_sup, obs, out=obs_sup)
        t_next = times[i + 1]
        for name in red_names:
            vals = np.asarray(reducers[name](t_next, x, sup_abs), dtype=float)
            better = vals > red_max[name]
            red_max[name] = np.where(better, vals, red_max[name])
            red_argt[name] = np.where(better, t_next, red_argt[name])
        if keep_grid:
            grid_obs[:, i + 1] = obs
            grid_m[:, i + 1] = m_acc
    return {
        "times": times,
        "x_final": x,
        "obs_final": obs,
        "obs_sup": obs_sup,
        "sup_abs": sup_abs,
        "m_final": m_acc,
        "reducer_max": red_max,
        "reducer_argt": red_argt,
        "grid_obs": grid_obs,
        "grid_m": grid_m,
    }


def euler_maruyama(spec: PathSdeSpec, t_end: float, dt: float, rng: RngLike) -> SimPath:
    """One Euler path assembled into a :class:`SimPath` quadruple."""
    out = euler_maruyama_batch(spec, t_end, dt, rng, n=1, keep_grid=True)
    times = out["times"]
    X = out["grid_obs"][0]
    A = np.asarray(spec.a_channel(times), dtype=float) if spec.a_channel else np.zeros_like(times)
    H = (
        np.asarray(spec.h_channel(times), dtype=float)
        if spec.h_channel
        else np.full_like(times, X[0])
    )
    M = out["grid_m"][0] if spec.d == 1 else np.zeros_like(times)
    return SimPath(
        times=times,
        X=X,
        A=A,
        H=H,
        M=M,
        Xsup=np.maximum.accumulate(X),
        tag=spec.tag,
        eta=spec.eta,
    )


def sample_linear_sde(
    a: float,
    sigma: float,
    x0: float,
    t_end: float,
    dt: float,
    rng: RngLike,
    n: int,
    damped_kappa: Optional[float] = None,
) -> PathBatch:
    """Euler batch for ``dX = a X dt + sigma X dW`` with channels
    ``A_t = a t``, ``H = x0``: the discrete scheme satisfies the left-limit
    integral equality exactly, so these paths are the canonical honest
    inputs for the linear-rate checks.

    When ``damped_kappa`` is given, the running supremum of
    ``log X_t - kappa * A_t`` is tracked for the inside-the-sup variant.
    """
    if x0 <= 0 or a < 0:
        raise DomainError("need x0 > 0 and a >= 0")
    g = _as_generator(rng)
    steps = max(1, int(round(t_end / dt)))
    sqdt = math.sqrt(dt)
    x = np.full(n, float(x0))
    xsup = x.copy()
    clipped = 0
    damp_u = None
    if damped_kappa is not None:
        damp_u = np.log(x)  # A(0)=0
    for i in range(steps):
        dw = g.normal(0.0, sqdt, size=n)
        x = x * (1.0 + a * dt + sigma * dw)
        bad = x <= 0
        if np.any(bad):
            clipped += int(bad.sum())
            x = np.where(bad, 1e-300, x)
        np.maximum(xsup, x, out=xsup)
        if damp_u is not None:
            t_next = (i + 1) * dt
            np.maximum(damp_u, np.log(x) - damped_kappa * a * t_next, out=damp_u)
    log_x = np.log(x)
    return PathBatch(
        t_final=t_end,
        tag="nosup",
        x_final=x,
        xsup=xsup,
        a_final=np.full(n, a * t_end),
        h_final=np.full(n, float(x0)),
        log_x_final=log_x,
        log_xsup=np.log(xsup),
        damped_sup_log=damp_u,
        damped_kappa=damped_kappa,
        meta={"a": a, "sigma": sigma, "dt": dt, "clipped": clipped},
    )


# ---------------------------------------------------------------------------
# the exponential-clock jump process
# ---------------------------------------------------------------------------


def simulate_exp_clock_process(p: float, t_end: float, rng: RngLike, n_grid: int = 257) -> SimPath:
    """Exact path of the clocked-growth quadruple on a refined grid.

    With an Exp(1) clock ``Z``: ``X_t = exp((Z ^ t)/p)``, the compensator
    ``A`` jumps by ``1/p`` exactly at ``Z`` (inserted into the grid together
    with an immediately preceding point so the left-limit Stieltjes sum
    represents the jump exactly), ``H = 1`` and ``M`` makes the
    decomposition an identity.  ``A`` is *not* predictable: that is the
    whole point of this example.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0,1), got {p}")
    g = _as_generator(rng)
    z = float(g.exponential())
    times = np.linspace(0.0, t_end, n_grid)
    if z <= t_end:
        pre = z * (1.0 - 1e-12)
        times = np.union1d(times, [pre, z])
    zt = np.minimum(times, z)
    X = np.exp(zt / p)
    jumped = (times >= z).astype(float)
    A = jumped / p
    H = np.ones_like(times)
    M = (X - 1.0) - X * jumped / p
    return SimPath(
        times=times,
        X=X,
        A=A,
        H=H,
        M=M,
        Xsup=np.maximum.accumulate(X),
        tag="nosup",
        eta=EtaSpec.linear(),
    )


def sample_exp_clock_terminals(
    p: float, t: float, rng: RngLike, size: int
) -> Tuple[np.ndarray, np.ndarray]:
    """(X_t, A_t) marginals of the clocked-growth process: X_t = e^{(Z^t)/p},
    A_t = (1/p) 1_{Z <= t}."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0,1), got {p}")
    g = _as_generator(rng)
    z = g.exponential(size=size)
    x = np.exp(np.minimum(z, t) / p)
    a = (z <= t) / p
    return x, a


# ---------------------------------------------------------------------------
# appended-excursion construction (alpha-constant sharpness)
# ---------------------------------------------------------------------------


def simulate_alpha_sharpness(
    n_cut: float, p: float, rng: RngLike, size: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact (sup X, sup H) draws of the appended-excursion construction.

    An Exp(1) time ``Z`` triggers a jump to ``a(Z) = e^{Z/p}`` provided
    ``Z <= n_cut`` (otherwise the path stays at 0); a Brownian excursion
    from the jump level absorbed at 0 then contributes the Pareto factor
    1/U.  The forcing supremum is ``p (e^{(Z ^ n_cut)/p} - 1)``.

    Note the moments grow like ``e^{n_cut}``: this exact sampler is meant
    for moderate ``n_cut``; large-``n_cut`` norms go through the
    clock-resampled estimator in the verification layer.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0,1), got {p}")
    g = _as_generator(rng)
    sz = 1 if size is None else size
    z = g.exponential(size=sz)
    u = g.random(sz)
    with np.errstate(over="ignore"):
        sup_x = np.where(z <= n_cut, np.exp(z / p) / u, 0.0)
        sup_h = p * (np.exp(np.minimum(z, n_cut) / p) - 1.0)
    if size is None:
        return float(sup_x[0]), float(sup_h[0])
    return sup_x, sup_h


# ---------------------------------------------------------------------------
# convex-rate explosion example
# ---------------------------------------------------------------------------


def convex_counterexample_transform(gamma: float) -> BoundTransform:
    """Transform for the rate ``eta(x) = gamma * x * (1 + 2 log x)`` (x >= 1),
    extended linearly below 1 so that eta is convex with eta(0) = 0.

    Closed forms: ``G(x) = log(2 log x + 1)/(2 gamma)`` above 1 and
    ``log(x)/gamma`` below, with reference point c = 1.
    """
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")

    def eta_fn(x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            upper = gamma * arr * (1.0 + 2.0 * np.log(arr))
        return np.where(arr >= 1.0, upper, gamma * arr)

    eta = EtaSpec.numeric(
        eta_fn, c0=0.0, convex=True, zero_at_floor=True,
        label=f"{gamma}*x*(1+2 log x), linear below 1",
    )

    def g0(x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            up = np.log(2.0 * np.log(arr) + 1.0) / (2.0 * gamma)
            lo = np.log(arr) / gamma
        return np.where(arr >= 1.0, up, lo)

    def g0_inv(y):
        arr = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            up = np.exp(0.5 * (np.exp(2.0 * gamma * arr) - 1.0))
            lo = np.exp(gamma * arr)
        return np.where(arr >= 0.0, up, lo)

    def log_g0_inv(y):
        arr = np.asarray(y, dtype=float)
        with np.errstate(over="ignore"):
            up = 0.5 * (np.exp(2.0 * gamma * arr) - 1.0)
        return np.where(arr >= 0.0, up, gamma * arr)

    def g0_of_log(L):
        arr = np.asarray(L, dtype=float)
        with np.errstate(all="ignore"):
            up = np.log(2.0 * arr + 1.0) / (2.0 * gamma)
        return np.where(arr >= 0.0, up, arr / gamma)

    return BoundTransform(
        eta,
        c=1.0,
        closed_form=(g0, g0_inv),
        log_g0_inv=log_g0_inv,
        g0_of_log=g0_of_log,
        g_range=(-math.inf, math.inf),
    )


def simulate_convex_counterexample(
    gamma: float, x0: float, t_end: float, dt: float, rng: RngLike
) -> SimPath:
    """One exact path of ``X_t = exp(gamma (x0 + W_t)^2)``.

    The quadruple is ``A_t = t``, ``H = exp(gamma x0^2)`` and ``M`` the
    Euler-accumulated stochastic integral of ``2 gamma (x0+W) X dW``;
    the drift identity then holds up to O(sqrt(dt)) discretization noise.
    """
    g = _as_generator(rng)
    steps = max(1, int(round(t_end / dt)))
    times = np.linspace(0.0, t_end, steps + 1)
    dw = g.normal(0.0, math.sqrt(dt), size=steps)
    w = np.concatenate([[0.0], np.cumsum(dw)])
    L = gamma * (x0 + w) ** 2
    X = np.exp(L)
    m_incr = 2.0 * gamma * (x0 + w[:-1]) * X[:-1] * dw
    M = np.concatenate([[0.0], np.cumsum(m_incr)])
    return SimPath(
        times=times,
        X=X,
        A=times.copy(),
        H=np.full_like(times, math.exp(gamma * x0**2)),
        M=M,
        Xsup=np.maximum.accumulate(X),
        tag="nosup",
        eta=convex_counterexample_transform(gamma).eta,
        log_X=L,
    )


def sample_convex_counterexample(
    gamma: float,
    x0: float,
    t_end: float,
    dt: float,
    rng: RngLike,
    n: int,
    transform: Optional[BoundTransform] = None,
    damped_kappa: Optional[float] = None,
) -> PathBatch:
    """Streaming batch of squared-Brownian exponential paths.

    Only reductions are kept: the terminal and supremum of the log channel
    ``L_t = gamma (x0 + W_t)^2``, plus (optionally) the running supremum of
    the damped envelope ``G^{-1}(G(X_t) - kappa * t)`` in log scale, which
    is tracked through the monotone transform argument so no overflowing
    value is ever materialized.
    """
    g = _as_generator(rng)
    steps = max(1, int(round(t_end / dt)))
    sqdt = math.sqrt(dt)
    w = np.zeros(n)
    L = np.full(n, gamma * x0**2)
    L_sup = L.copy()
    u_max = None
    if damped_kappa is not None:
        if transform is None:
            transform = convex_counterexample_transform(gamma)
        u_max = np.asarray(transform.g_of_log(L), dtype=float)  # A(0) = 0
    for i in range(steps):
        w += g.normal(0.0, sqdt, size=n)
        L = gamma * (x0 + w) ** 2
        np.maximum(L_sup, L, out=L_sup)
        if u_max is not None:
            t_next = (i + 1) * dt
            np.maximum(u_max, transform.g_of_log(L) - damped_kappa * t_next, out=u_max)
    with np.errstate(over="ignore"):
        x_final = np.exp(L)
        xsup = np.exp(L_sup)
    damped_sup_log = None
    if u_max is not None:
        damped_sup_log = np.asarray(transform.log_g_inv(u_max), dtype=float)
    return PathBatch(
        t_final=t_end,
        tag="nosup",
        x_final=x_final,
        xsup=xsup,
        a_final=np.full(n, t_end),
        h_final=np.full(n, math.exp(gamma * x0**2)),
        log_x_final=L,
        log_xsup=L_sup,
        damped_sup_log=damped_sup_log,
        damped_kappa=damped_kappa,
        meta={"gamma": gamma, "x0": x0, "dt": dt},
    )


# ---------------------------------------------------------------------------
# shifted-root tail construction
# ---------------------------------------------------------------------------


def simulate_sqrt_shift_process(
    bp: BlockParams, rng: RngLike, size: Optional[int] = None
):
    """Supremum of ``Y^2`` for ``Y = sqrt(X + 1)`` over the block horizon.

    ``Y`` starts from the constant segment sqrt(2) and satisfies the
    square-root-shifted dynamics of the block construction, so its squared
    supremum is exactly ``sup X + 1``: the draw reuses the exact block
    sampler and shifts by one.
    """
    if size is None:
        s, _ = simulate_sharpness_blocks(bp, rng)
        return s + 1.0
    return sample_block_suprema(bp, rng, size) + 1.0
