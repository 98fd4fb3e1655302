"""Log-probability of rooted spanning-tree shell profiles, and its maximizer.

For a sparse random graph where each node pair is linked with probability p
(q = 1 - p), the log-probability of a tree whose shells hold D_1..D_L nodes
is, up to an additive constant independent of the shape,

    D_1*log(p) - sum_k log(D_k!)
      + sum_{i=1}^{L-1} D_{i+1} * [ (1 + D_1 + ... + D_{i-1}) * log(q)
                                    + log(1 - q^{D_i}) ]

Everything runs in the log domain (the linear-scale value underflows long
before realistic sizes) and factorials go through log-gamma, so integer and
continuous shell vectors share one code path.  ``maximize_profile`` sweeps
tree depths, solves a continuous relaxation by projected gradient ascent,
rounds it, and polishes with unit-transfer hill climbing;
``brute_force_profile`` is the exact enumeration oracle for small sizes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln

from .graphs import ShellProfile

__all__ = [
    "ORACLE_CAP_DEFAULT",
    "LikelihoodQuery",
    "MaximizationResult",
    "log_likelihood",
    "gradient_log_likelihood",
    "maximize_profile",
    "brute_force_profile",
]

# Enumeration grows as 2^(N-2); beyond this the oracle refuses to run.
ORACLE_CAP_DEFAULT = 14


@dataclass(frozen=True)
class LikelihoodQuery:
    """Problem instance: total node count N and per-pair link probability p."""

    total_n: int
    link_prob: float

    def __post_init__(self) -> None:
        if self.total_n < 2:
            raise ValueError("total_n must be >= 2")
        if not 0.0 < self.link_prob < 1.0:
            raise ValueError("link_prob must be in (0, 1)")

    @property
    def fail_prob(self) -> float:
        return 1.0 - self.link_prob


@dataclass(frozen=True)
class MaximizationResult:
    profile: ShellProfile
    log_prob: float
    depth_swept: tuple[int, int]
    method: str


def _check_prob(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError("link probability must be in (0, 1)")


def _as_shells(profile) -> np.ndarray:
    if isinstance(profile, ShellProfile):
        d = np.asarray(profile.shells, dtype=float)
    else:
        d = np.atleast_1d(np.asarray(profile, dtype=float))
        if d.ndim != 1 or d.size < 1:
            raise ValueError("profile must be a non-empty 1-d sequence of shell counts")
    if np.any(d < 1.0):
        raise ValueError("every shell count must be >= 1")
    return d


def _loglik_batch(D: np.ndarray, log_p: float, log_q: float) -> np.ndarray:
    """Vectorized log-likelihood for a (m, L) batch of shell vectors."""
    first = D[:, 0] * log_p - gammaln(D + 1.0).sum(axis=1)
    if D.shape[1] == 1:
        return first
    cums = np.cumsum(D, axis=1)
    prefix = np.ones_like(D[:, 1:])
    prefix[:, 1:] += cums[:, :-2]
    # log(1 - q^d) computed as log(-expm1(d*log q)) to survive tiny p
    attach = np.log(-np.expm1(D[:, :-1] * log_q))
    return first + (D[:, 1:] * (prefix * log_q + attach)).sum(axis=1)


def log_likelihood(profile, link_prob: float) -> float:
    """Log-probability of a shell profile, up to a shape-independent constant.

    Accepts a ShellProfile or any sequence of (possibly non-integer) shell
    counts, each >= 1.
    """
    _check_prob(link_prob)
    d = _as_shells(profile)
    return float(_loglik_batch(d[None, :], math.log(link_prob), math.log1p(-link_prob))[0])


def _gradient(d: np.ndarray, log_p: float, log_q: float) -> np.ndarray:
    L = d.size
    g = -digamma(d + 1.0)
    g[0] += log_p
    if L >= 2:
        cums = np.cumsum(d)
        prefix = np.ones(L - 1)
        prefix[1:] += cums[:-2]
        g[1:] += prefix * log_q + np.log(-np.expm1(d[:-1] * log_q))
        # d/dx log(1 - q^x) = -log(q) * q^x / (1 - q^x) = -log(q) / expm1(-x*log q)
        g[:-1] += d[1:] * (-log_q) / np.expm1(-d[:-1] * log_q)
        suffix = np.cumsum(d[::-1])[::-1]
        tail = np.concatenate([suffix[2:], [0.0, 0.0]])
        g += log_q * tail
    return g


def gradient_log_likelihood(profile, link_prob: float) -> np.ndarray:
    """Analytic partial derivatives of ``log_likelihood`` in each shell count."""
    _check_prob(link_prob)
    d = _as_shells(profile)
    return _gradient(d, math.log(link_prob), math.log1p(-link_prob))


def _project_floor_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {x : x_k >= 1, sum(x) = total}."""
    v = np.asarray(v, dtype=float)
    slack = total - v.size
    if slack < 0:
        raise ValueError(f"infeasible: need sum {total} over {v.size} entries each >= 1")
    if slack == 0:
        return np.ones_like(v)
    e = v - 1.0
    u = np.sort(e)[::-1]
    css = np.cumsum(u) - slack
    idx = np.arange(1, e.size + 1)
    ok = u - css / idx > 0
    theta = css[ok][-1] / idx[ok][-1]
    return np.maximum(e - theta, 0.0) + 1.0


def _sin_squared_start(total_n: int, depth: int) -> np.ndarray:
    k = np.arange(1, depth + 1, dtype=float)
    raw = np.sin(np.pi * k / depth) ** 2
    tot = raw.sum()
    if tot <= 0:
        raw = np.ones(depth)
        tot = float(depth)
    return _project_floor_simplex(raw * ((total_n - 1) / tot), total_n - 1)


def _ascend(
    d0: np.ndarray,
    log_p: float,
    log_q: float,
    total: float,
    max_iters: int = 3000,
    rel_tol: float = 1e-10,
) -> tuple[np.ndarray, float]:
    """Projected gradient ascent with spectral step sizes and backtracking.

    Only strict improvements are accepted, so the iteration is monotone
    regardless of the trial step.
    """
    x = _project_floor_simplex(d0, total)
    f = float(_loglik_batch(x[None, :], log_p, log_q)[0])
    g = _gradient(x, log_p, log_q)
    step = 1.0
    stall = 0
    for _ in range(max_iters):
        s = min(step, 1e6)
        improved = False
        while s > 1e-12:
            cand = _project_floor_simplex(x + s * g, total)
            fc = float(_loglik_batch(cand[None, :], log_p, log_q)[0])
            if fc > f:
                improved = True
                break
            s *= 0.5
        if not improved:
            break
        g_new = _gradient(cand, log_p, log_q)
        dx = cand - x
        dg = g_new - g
        curvature = -float(dx @ dg)
        gain = fc - f
        x, f, g = cand, fc, g_new
        # spectral (Barzilai-Borwein) trial step; plain expansion as fallback
        step = float(dx @ dx) / curvature if curvature > 0 else s * 2.0
        if gain < rel_tol * (1.0 + abs(f)):
            stall += 1
            if stall >= 5:
                break
        else:
            stall = 0
    return x, f


def _round_preserving_sum(d: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder rounding of d onto integers >= 1 summing to total."""
    base = np.maximum(np.floor(d).astype(np.int64), 1)
    frac = d - np.floor(d)
    rem = int(total - base.sum())
    if rem > 0:
        order = np.lexsort((np.arange(d.size), -frac))
        base[order[: min(rem, d.size)]] += 1
        rem -= min(rem, d.size)
        i = 0
        while rem > 0:  # only reachable through pathological fp drift
            base[i % d.size] += 1
            rem -= 1
            i += 1
    elif rem < 0:
        order = np.lexsort((np.arange(d.size), frac))
        need = -rem
        for i in itertools.cycle(order):
            if need == 0:
                break
            if base[i] > 1:
                base[i] -= 1
                need -= 1
            elif np.all(base <= 1):
                raise ValueError("cannot round: total below the per-shell floor")
    return base


def _attach(x: np.ndarray, log_q: float) -> np.ndarray:
    # log(1 - q^x) for x >= 1
    return np.log(-np.expm1(x * log_q))


def _move_deltas(d: np.ndarray, log_p: float, log_q: float) -> np.ndarray:
    """Log-likelihood change of every unit transfer, as an (L, L) matrix.

    Entry (a, b) is the exact change from moving one node out of shell a
    into shell b, expanded in closed form so each candidate costs O(1).
    Invalid moves (a == b, or shell a already at the floor) are -inf.
    """
    L = d.size
    # prefix[i] = 1 + d[0] + ... + d[i-2] multiplies log q in bracket i
    prefix = np.ones(L)
    prefix[2:] += np.cumsum(d[:-2])
    attach_cur = _attach(d, log_q)
    attach_up = _attach(d + 1.0, log_q)
    attach_dn = _attach(np.where(d >= 2.0, d - 1.0, 1.0), log_q)
    # per-position multiplier value: log p at the root shell, bracket head elsewhere
    head = prefix * log_q + np.concatenate([[0.0], attach_cur[:-1]])
    head[0] = log_p
    # suffix2[k] = d[k+2] + ... + d[L-1]
    suffix = np.concatenate([np.cumsum(d[::-1])[::-1], [0.0, 0.0]])
    suffix2 = suffix[2:]
    idx = np.arange(L)
    delta = head[None, :] - head[:, None]
    delta += np.log(d)[:, None] - np.log(d + 1.0)[None, :]
    gap = idx[None, :] - idx[:, None]  # b - a
    delta += log_q * (
        suffix2[None, :] - suffix2[:, None] - (gap >= 2) - (gap <= -2)
    )
    # attach term of the next bracket changes when its source shell moves
    nxt = np.concatenate([d[1:], [0.0]])
    coef_a = np.where(idx <= L - 2, attach_dn - attach_cur, 0.0)
    coef_b = np.where(idx <= L - 2, attach_up - attach_cur, 0.0)
    delta += coef_a[:, None] * (nxt[:, None] + (gap == 1))
    delta += coef_b[None, :] * (nxt[None, :] - (gap == -1))
    delta[d < 2.0, :] = -np.inf
    np.fill_diagonal(delta, -np.inf)
    return delta


def _hill_climb(D: np.ndarray, log_p: float, log_q: float) -> tuple[np.ndarray, float]:
    """Move single nodes between shells while the log-likelihood improves.

    Candidate moves are ranked by their closed-form deltas; the chosen move
    is accepted only if a full re-evaluation confirms a strict improvement,
    so the returned value never drops below the starting point.
    """
    D = D.astype(float)
    f = float(_loglik_batch(D[None, :], log_p, log_q)[0])
    L = D.size
    if L == 1:
        return D.astype(np.int64), f
    while True:
        delta = _move_deltas(D, log_p, log_q)
        flat = int(np.argmax(delta))
        if not delta.flat[flat] > 0.0:
            break
        a, b = divmod(flat, L)
        cand = D.copy()
        cand[a] -= 1.0
        cand[b] += 1.0
        fc = float(_loglik_batch(cand[None, :], log_p, log_q)[0])
        if not fc > f:
            break
        D, f = cand, fc
    return D.astype(np.int64), f


def _maximize_fixed_depth(
    query: LikelihoodQuery, depth: int, max_ascent_iters: int = 3000
) -> tuple[np.ndarray, float, float]:
    """Best integer profile at one depth; also reports the rounded-start value."""
    log_p = math.log(query.link_prob)
    log_q = math.log1p(-query.link_prob)
    start = _sin_squared_start(query.total_n, depth)
    relaxed, _ = _ascend(start, log_p, log_q, query.total_n - 1, max_iters=max_ascent_iters)
    rounded = _round_preserving_sum(relaxed, query.total_n - 1)
    rounded_value = float(_loglik_batch(rounded[None, :].astype(float), log_p, log_q)[0])
    best, value = _hill_climb(rounded, log_p, log_q)
    return best, value, rounded_value


def maximize_profile(
    query: LikelihoodQuery,
    depth_range: tuple[int, int] | None = None,
    *,
    max_ascent_iters: int = 3000,
) -> MaximizationResult:
    """Maximize the shell-profile log-likelihood over depths and shell counts.

    For each depth L in the range, the continuous relaxation on
    {d_k >= 1, sum d_k = N - 1} is solved by projected gradient ascent from a
    sin^2-shaped start, rounded to integers by largest remainders, then
    refined with unit-transfer moves.  The best depth wins; exact ties go to
    the smaller depth.
    """
    N = query.total_n
    if depth_range is None:
        depth_range = (2, min(N - 1, 120))
    depth_min, depth_max = int(depth_range[0]), int(depth_range[1])
    if depth_min < 1:
        raise ValueError("depth range must start at 1 or above")
    if depth_max > N - 1:
        raise ValueError(f"infeasible depth: {depth_max} exceeds N-1 = {N - 1}")
    if depth_min > depth_max:
        raise ValueError("empty depth range")
    best: tuple[np.ndarray, float] | None = None
    for depth in range(depth_min, depth_max + 1):
        D, value, _ = _maximize_fixed_depth(query, depth, max_ascent_iters)
        if best is None or value > best[1]:
            best = (D, value)
    profile = ShellProfile(total_n=N, shells=tuple(int(v) for v in best[0]))
    return MaximizationResult(
        profile=profile,
        log_prob=float(best[1]),
        depth_swept=(depth_min, depth_max),
        method="relaxation+refinement",
    )


def brute_force_profile(query: LikelihoodQuery, cap: int = ORACLE_CAP_DEFAULT) -> MaximizationResult:
    """Exact argmax by enumerating every composition of N-1 into shells.

    Refuses to run above ``cap`` nodes; the composition count doubles with
    every extra node.
    """
    N = query.total_n
    if N > cap:
        raise ValueError(f"oracle cap exceeded: N={N} > cap={cap}")
    total = N - 1
    log_p = math.log(query.link_prob)
    log_q = math.log1p(-query.link_prob)
    best: tuple[tuple[int, ...], float] | None = None
    for depth in range(1, total + 1):
        for cuts in itertools.combinations(range(1, total), depth - 1):
            bounds = (0,) + cuts + (total,)
            parts = tuple(bounds[i + 1] - bounds[i] for i in range(depth))
            value = float(
                _loglik_batch(np.asarray(parts, dtype=float)[None, :], log_p, log_q)[0]
            )
            if best is None or value > best[1]:
                best = (parts, value)
    profile = ShellProfile(total_n=N, shells=best[0])
    return MaximizationResult(
        profile=profile, log_prob=best[1], depth_swept=(1, total), method="enumeration"
    )
