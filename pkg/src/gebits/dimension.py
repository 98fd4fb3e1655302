"""Dimension estimation from shell profiles.

Shell counts that follow D_k = A * sin(pi*k/L)^(d-1) are exactly log-linear
in log sin(pi*k/L), so the exponent d is recovered by ordinary least squares
in log space.  The final shell k = L is always excluded (sin(pi) = 0 makes
the regressor singular).
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .graphs import Gebit, ShellProfile, shell_profile
from .likelihood import LikelihoodQuery, maximize_profile

__all__ = [
    "DimensionFit",
    "DimensionCurvePoint",
    "fit_dimension",
    "dimension_of_p",
    "empirical_dimension",
]


@dataclass(frozen=True)
class DimensionFit:
    """Result of the log-space shell fit: D_k ~ exp(log_amplitude) * sin(pi*k/L)^(d-1)."""

    d: float
    log_amplitude: float
    residual: float
    points_used: int


@dataclass(frozen=True)
class DimensionCurvePoint:
    """One point of the dimension-versus-link-probability curve."""

    link_prob: float
    d: float
    depth: int
    log_prob: float


def _shell_values(profile) -> np.ndarray:
    if isinstance(profile, ShellProfile):
        return np.asarray(profile.shells, dtype=float)
    vals = np.atleast_1d(np.asarray(profile, dtype=float))
    if vals.ndim != 1 or vals.size < 1:
        raise ValueError("profile must be a non-empty 1-d sequence of shell counts")
    return vals


def fit_dimension(profile, trim_floor: float = 1.0) -> DimensionFit:
    """Least-squares fit of log shell counts against log sin(pi*k/L).

    The slope is d - 1 and the intercept the log amplitude.  End shells with
    counts below ``trim_floor`` are dropped before fitting.  Accepts a
    ShellProfile or a raw (possibly non-integer) shell-count sequence.
    """
    vals = _shell_values(profile)
    depth = vals.size
    ks = np.arange(1, depth)
    ys = vals[:-1]
    lo, hi = 0, ys.size
    while lo < hi and ys[lo] < trim_floor:
        lo += 1
    while hi > lo and ys[hi - 1] < trim_floor:
        hi -= 1
    ks, ys = ks[lo:hi], ys[lo:hi]
    if ks.size < 2:
        raise ValueError("fewer than 2 usable points for the dimension fit")
    if np.any(ys <= 0):
        raise ValueError("usable shell counts must be positive for the log fit")
    x = np.log(np.sin(np.pi * ks / depth))
    y = np.log(ys)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise ValueError("degenerate regressor: all usable points at the same shell position")
    slope = float(np.dot(xc, yc)) / denom
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    return DimensionFit(
        d=slope + 1.0,
        log_amplitude=intercept,
        residual=float(np.sqrt(np.mean(resid**2))),
        points_used=int(ks.size),
    )


def dimension_of_p(
    total_n: int,
    link_prob: float,
    depth_range: tuple[int, int] | None = None,
    trim_floor: float = 1.0,
) -> DimensionCurvePoint:
    """Maximize the shell-profile likelihood at (N, p), then fit its dimension."""
    result = maximize_profile(LikelihoodQuery(total_n, link_prob), depth_range)
    fit = fit_dimension(result.profile, trim_floor)
    return DimensionCurvePoint(
        link_prob=link_prob,
        d=fit.d,
        depth=result.profile.depth,
        log_prob=result.log_prob,
    )


def empirical_dimension(
    gebit: Gebit,
    root_policy: str = "median",
    *,
    root: int | None = None,
    max_roots: int = 32,
    seed: int = 0,
    trim_floor: float = 1.0,
) -> DimensionFit:
    """Measure a gebit's dimension from breadth-first shell counts.

    ``median`` policy fits one profile per sampled root (all nodes when the
    gebit has at most ``max_roots``, otherwise a seeded sample) and takes the
    median over roots, which is robust to boundary roots of irregular gebits.
    ``fixed`` policy uses the single given root.  Roots whose breadth-first
    depth is below 3 cannot be fitted and are skipped.
    """
    if gebit.size < 10:
        raise ValueError(f"gebit too small: {gebit.size} nodes (need >= 10)")
    if root_policy == "fixed":
        if root is None:
            raise ValueError("fixed root policy requires a root")
        roots = [int(root)]
    elif root_policy == "median":
        if gebit.size <= max_roots:
            roots = list(gebit.nodes)
        else:
            rng = np.random.default_rng(seed)
            roots = sorted(rng.choice(gebit.nodes, size=max_roots, replace=False).tolist())
    else:
        raise ValueError(f"unknown root policy {root_policy!r}")
    fits = []
    for r in roots:
        prof = shell_profile(gebit, r)
        if prof.depth < 3:
            continue
        fits.append(fit_dimension(prof, trim_floor))
    if not fits:
        raise ValueError("gebit too shallow: breadth-first depth < 3 from every sampled root")
    if len(fits) == 1:
        return fits[0]
    return DimensionFit(
        d=statistics.median(f.d for f in fits),
        log_amplitude=statistics.median(f.log_amplitude for f in fits),
        residual=statistics.median(f.residual for f in fits),
        points_used=int(statistics.median(f.points_used for f in fits)),
    )
