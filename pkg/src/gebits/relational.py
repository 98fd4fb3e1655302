"""Antisymmetric relational matrices and their noisy iteration.

The network state is a dense real antisymmetric matrix ``B`` of pairwise
link strengths.  One update step is

    B  ->  B - alpha * (B + inv(B)) + w

with ``w`` a fresh antisymmetric noise draw.  The inverse is regularized by
flooring small singular values so that nearly singular states stay finite.
Because ``B`` and its inverse share invariant planes, the noise-free update
moves every singular value through the scalar map
``s -> s - alpha * (s - 1/s)``, whose fixed point is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ANTISYMMETRY_TOL",
    "NumericalBlowUpError",
    "NoiseSpec",
    "IteratorConfig",
    "Snapshot",
    "IterationHistory",
    "check_antisymmetric",
    "antisymmetric_from_upper",
    "init_matrix",
    "draw_noise",
    "safe_inverse",
    "iterate_step",
    "run_iterator",
    "singular_values",
]

# Maximum allowed |B + B^T| entry for a matrix to count as antisymmetric.
ANTISYMMETRY_TOL = 1e-12


class NumericalBlowUpError(ArithmeticError):
    """An iterator run produced non-finite matrix entries."""


@dataclass(frozen=True)
class NoiseSpec:
    """Two-component noise: Gaussian background plus rare strong links.

    For each unordered node pair, independently per iteration: with
    probability ``rare_prob`` the entry magnitude is uniform in
    [rare_lo, rare_hi] with a random sign, otherwise the entry is
    Gaussian(0, background_sigma^2).  The matrix is mirrored so that
    w[j, i] = -w[i, j].
    """

    background_sigma: float = 0.0
    rare_prob: float = 0.0
    rare_lo: float = 0.0
    rare_hi: float = 0.0

    def __post_init__(self) -> None:
        if self.background_sigma < 0:
            raise ValueError("background_sigma must be >= 0")
        if not 0.0 <= self.rare_prob <= 1.0:
            raise ValueError("rare_prob must be in [0, 1]")
        if self.rare_prob > 0:
            if self.rare_lo <= 0:
                raise ValueError("rare_lo must be > 0 when rare_prob > 0")
            if self.rare_hi < self.rare_lo:
                raise ValueError("rare_hi must be >= rare_lo")


@dataclass(frozen=True)
class IteratorConfig:
    """Parameters of a full iterator run, including the recording policy.

    ``record_every`` sets the snapshot cadence; the initial state and the
    final step are always recorded.  Snapshots carry summary statistics and,
    when ``record_matrices`` is set, the full matrix.  ``link_threshold``
    feeds the links-above-threshold summary column.
    """

    n: int
    steps: int
    alpha: float = 0.1
    start_scale: float = 1e-6
    sigma_floor_ratio: float = 1e-8
    seed: int = 0
    record_every: int = 1
    record_matrices: bool = True
    link_threshold: float = 1.0

    def __post_init__(self) -> None:
        if self.n % 2:
            raise ValueError(f"odd dimension: n={self.n}")
        if self.n < 2:
            raise ValueError(f"degenerate size: n={self.n}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.start_scale <= 0:
            raise ValueError("start_scale must be > 0")
        if not 0.0 < self.sigma_floor_ratio < 1.0:
            raise ValueError("sigma_floor_ratio must be in (0, 1)")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.link_threshold < 0:
            raise ValueError("link_threshold must be >= 0")


@dataclass(frozen=True, eq=False)
class Snapshot:
    """One recorded state of an iterator run."""

    step: int
    fro_norm: float
    max_abs: float
    sigma_max: float
    sigma_min: float
    links_above_threshold: int
    matrix: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class IterationHistory:
    config: IteratorConfig
    noise: NoiseSpec
    snapshots: tuple[Snapshot, ...]
    final_matrix: np.ndarray


def check_antisymmetric(B, tol: float = ANTISYMMETRY_TOL) -> np.ndarray:
    """Validate that B is a square antisymmetric float matrix; return it."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"matrix must be square, got shape {B.shape}")
    if B.size:
        err = float(np.max(np.abs(B + B.T)))
        if err > tol:
            raise ValueError(f"matrix is not antisymmetric: max|B + B^T| = {err:.3e}")
    return B


def _check_state(B) -> np.ndarray:
    B = check_antisymmetric(B)
    n = B.shape[0]
    if n % 2:
        raise ValueError(f"odd dimension: n={n}")
    if n < 2:
        raise ValueError(f"degenerate size: n={n}")
    return B


def antisymmetric_from_upper(n: int, values) -> np.ndarray:
    """Build an exactly antisymmetric matrix from its strict upper triangle
    (row-major order)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (n * (n - 1) // 2,):
        raise ValueError("wrong number of upper-triangle values")
    B = np.zeros((n, n))
    rows, cols = np.triu_indices(n, k=1)
    B[rows, cols] = values
    B[cols, rows] = -values
    return B


def _antisymmetrize(M: np.ndarray) -> np.ndarray:
    # (M - M^T)/2 is exactly antisymmetric in IEEE arithmetic.
    return (M - M.T) / 2.0


def init_matrix(n: int, start_scale: float, seed) -> np.ndarray:
    """Draw a small random antisymmetric start matrix.

    Entries of the strict upper triangle are i.i.d. uniform, rescaled so the
    largest magnitude equals ``start_scale``.  The draw is repeated until the
    matrix is numerically nonsingular (an exact zero start cannot be
    inverted).  ``seed`` may be an integer or a numpy Generator.
    """
    if n % 2:
        raise ValueError(f"odd dimension: n={n}")
    if n < 2:
        raise ValueError(f"degenerate size: n={n}")
    if start_scale <= 0:
        raise ValueError("start_scale must be > 0")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        values = rng.uniform(-1.0, 1.0, size=n * (n - 1) // 2)
        peak = float(np.max(np.abs(values)))
        if peak == 0.0:
            continue
        B = antisymmetric_from_upper(n, values * (start_scale / peak))
        s = np.linalg.svd(B, compute_uv=False)
        if s[-1] > n * np.finfo(float).eps * s[0]:
            return B
    raise NumericalBlowUpError("could not sample a nonsingular start matrix")


def draw_noise(n: int, spec: NoiseSpec, rng) -> np.ndarray:
    """Draw one antisymmetric noise matrix.

    All random arrays are drawn in a fixed order regardless of the rare-link
    mask, so the generator state advances deterministically.
    """
    if n % 2:
        raise ValueError(f"odd dimension: n={n}")
    if n < 2:
        raise ValueError(f"degenerate size: n={n}")
    rng = np.random.default_rng(rng)
    pairs = n * (n - 1) // 2
    rare = rng.random(pairs) < spec.rare_prob
    background = rng.normal(0.0, spec.background_sigma, size=pairs)
    magnitude = rng.uniform(spec.rare_lo, spec.rare_hi, size=pairs)
    signs = rng.integers(0, 2, size=pairs) * 2.0 - 1.0
    return antisymmetric_from_upper(n, np.where(rare, signs * magnitude, background))


def safe_inverse(B, sigma_floor_ratio: float = 1e-8) -> np.ndarray:
    """Invert an antisymmetric matrix with a singular-value floor.

    Singular values are floored at ``sigma_floor_ratio`` times the largest
    one before inversion, so the result equals the exact inverse whenever the
    condition number is below ``1 / sigma_floor_ratio`` and stays bounded
    otherwise.  The result is projected back to exact antisymmetry.
    """
    B = _check_state(B)
    if not 0.0 < sigma_floor_ratio < 1.0:
        raise ValueError("sigma_floor_ratio must be in (0, 1)")
    U, s, Vt = np.linalg.svd(B)
    if s[0] == 0.0:
        raise ValueError("uninvertible zero matrix")
    floored = np.maximum(s, sigma_floor_ratio * s[0])
    inv = (Vt.T / floored) @ U.T
    return _antisymmetrize(inv)


def iterate_step(B, alpha: float, w, sigma_floor_ratio: float = 1e-8) -> np.ndarray:
    """Apply one update B -> B - alpha*(B + inv(B)) + w."""
    B = _check_state(B)
    w = check_antisymmetric(w)
    if w.shape != B.shape:
        raise ValueError(f"noise shape {w.shape} does not match state shape {B.shape}")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    out = B - alpha * (B + safe_inverse(B, sigma_floor_ratio)) + w
    return check_antisymmetric(out)


def singular_values(B) -> np.ndarray:
    """Singular spectrum in descending order.

    For antisymmetric matrices the values come in equal pairs (each invariant
    plane contributes its rotation strength twice).
    """
    B = check_antisymmetric(B)
    return np.linalg.svd(B, compute_uv=False)


def _snapshot(step: int, B: np.ndarray, config: IteratorConfig) -> Snapshot:
    s = np.linalg.svd(B, compute_uv=False)
    rows, cols = np.triu_indices(config.n, k=1)
    upper = np.abs(B[rows, cols])
    return Snapshot(
        step=step,
        fro_norm=float(np.linalg.norm(B)),
        max_abs=float(np.max(np.abs(B))),
        sigma_max=float(s[0]),
        sigma_min=float(s[-1]),
        links_above_threshold=int(np.count_nonzero(upper >= config.link_threshold)),
        matrix=B.copy() if config.record_matrices else None,
    )


def run_iterator(config: IteratorConfig, noise: NoiseSpec) -> IterationHistory:
    """Run the iterator from a fresh start matrix for ``config.steps`` steps.

    The run is serial and fully determined by (config, noise): the same seed
    yields a bit-identical history.  Non-finite entries abort the run.
    """
    rng = np.random.default_rng(config.seed)
    B = init_matrix(config.n, config.start_scale, rng)
    snapshots = [_snapshot(0, B, config)]
    for step in range(1, config.steps + 1):
        w = draw_noise(config.n, noise, rng)
        B = iterate_step(B, config.alpha, w, config.sigma_floor_ratio)
        if not np.all(np.isfinite(B)):
            raise NumericalBlowUpError(f"numerical blow-up at step {step}")
        if step % config.record_every == 0 or step == config.steps:
            snapshots.append(_snapshot(step, B, config))
    return IterationHistory(
        config=config, noise=noise, snapshots=tuple(snapshots), final_matrix=B
    )
