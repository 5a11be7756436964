"""Estimators of the probability that rounding the unconstrained solution
recovers the true integer vector.

The target quantity is the Gaussian integral

    P = |det R| / (2 pi sigma^2)^{n/2} * integral over [-1/2, 1/2]^n
        of exp(-||R xi||^2 / (2 sigma^2)) d xi.

Four routes, deliberately independent so they can cross-check each other:
a closed form for diagonal R, deterministic panel quadrature for n <= 4
(with the innermost coordinate integrated exactly), plain Monte Carlo on
the same integral, and an empirical decoder simulation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import erf as _erf_array

from .errors import (
    DimensionTooLargeError,
    NoConvergenceError,
    NotDiagonalError,
    SingularDiagonalError,
)
from .linalg import check_upper_triangular, round_nearest
from .rng import GaussianStream, RngSpec, gaussian_block, gaussian_stream, uniform_block
from .tolerances import (
    DIAGONAL_OFFDIAG_TOL,
    ERF_ABS_ERROR,
    QUADRATURE_DEFAULT_TARGET,
    QUADRATURE_EVAL_CAP,
    QUADRATURE_MAX_DIM,
    QUADRATURE_MIN_TARGET,
    QUADRATURE_NODES_PER_PANEL,
    SOLVE_DIAG_MIN,
)

__all__ = [
    "ProbabilityEstimate",
    "erf",
    "pzf_diagonal",
    "pzf_quadrature",
    "pzf_monte_carlo",
    "pzf_empirical",
    "gaussian_window_mass",
    "RngSpec",
    "GaussianStream",
    "gaussian_stream",
]

MIN_SAMPLES = 1000

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(QUADRATURE_NODES_PER_PANEL)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """A probability value with its provenance.

    error_bound is an absolute target for deterministic methods and one
    standard error for the sampled ones.  evaluations counts integrand
    evaluations, samples, or trials depending on the method.
    """

    value: float
    method: str
    error_bound: float
    evaluations: int
    seed: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"probability {self.value!r} outside [0, 1]")
        if self.error_bound < 0.0:
            raise ValueError("error_bound must be nonnegative")


def erf(x: float) -> float:
    """Error function, absolute error below 1e-12 over the real line."""
    return math.erf(x)


def _validate_sigma(sigma):
    if not (sigma > 0) or not math.isfinite(sigma):
        raise ValueError(f"sigma must be a positive finite real, got {sigma!r}")


def _normalized_triangular(r):
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    if n:
        diag = np.abs(np.diag(r))
        if np.min(diag) < SOLVE_DIAG_MIN:
            raise SingularDiagonalError(
                f"diagonal entry {int(np.argmin(diag))} has magnitude {np.min(diag)!r}")
        # row sign flips leave ||R xi|| unchanged, so fix pivots positive
        signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
        r = signs[:, None] * r
    return r


def pzf_diagonal(r, sigma: float) -> ProbabilityEstimate:
    """Closed form for diagonal R: product over i of erf(r_ii / (2 sqrt2 sigma))."""
    _validate_sigma(sigma)
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise NotDiagonalError(f"need a square matrix, got shape {r.shape}")
    n = r.shape[0]
    off = r - np.diag(np.diag(r))
    if n and np.max(np.abs(off)) > DIAGONAL_OFFDIAG_TOL:
        i, j = np.unravel_index(int(np.argmax(np.abs(off))), off.shape)
        raise NotDiagonalError(f"entry ({i}, {j}) = {r[i, j]!r} is non-negligible")
    d = np.abs(np.diag(r))
    if n and np.min(d) < SOLVE_DIAG_MIN:
        raise SingularDiagonalError("diagonal has a near-zero entry")
    value = float(np.prod(_erf_array(d / (2.0 * math.sqrt(2.0) * sigma))))
    return ProbabilityEstimate(value=min(max(value, 0.0), 1.0), method="Diagonal",
                               error_bound=n * ERF_ABS_ERROR, evaluations=n)


def _panel_axis(panels: int):
    # Gauss-Legendre nodes/weights tiled over `panels` equal pieces of [-1/2, 1/2]
    edges = np.linspace(-0.5, 0.5, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 / panels
    x = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    w = np.tile(half * _GL_WEIGHTS, panels)
    return x, w


def _outer_value(r, sigma, panels):
    """Integral over the outer n-1 coordinates of the exact inner-coordinate
    mass times the outer Gaussian factor, times the probability prefactor."""
    n = r.shape[0]
    d = n - 1
    r11 = r[0, 0]
    root2sig = math.sqrt(2.0) * sigma
    x, w = _panel_axis(panels)
    axes = np.meshgrid(*([x] * d), indexing="ij")
    xi = np.stack([a.ravel() for a in axes], axis=1)
    weights = np.ones(xi.shape[0])
    for a in np.meshgrid(*([w] * d), indexing="ij"):
        weights *= a.ravel()
    shift = xi @ r[0, 1:]
    tail = xi @ r[1:, 1:].T
    tail_sq = np.sum(tail * tail, axis=1)
    inner = (sigma / r11) * math.sqrt(math.pi / 2.0) * (
        _erf_array((shift + 0.5 * r11) / root2sig)
        - _erf_array((shift - 0.5 * r11) / root2sig))
    vals = inner * np.exp(-tail_sq / (2.0 * sigma * sigma))
    pref = abs(float(np.prod(np.diag(r)))) / (2.0 * math.pi * sigma * sigma) ** (n / 2.0)
    return pref * float(weights @ vals), xi.shape[0]


def pzf_quadrature(r, sigma: float,
                   target_abs_error: float = QUADRATURE_DEFAULT_TARGET) -> ProbabilityEstimate:
    """Deterministic estimate for upper-triangular R, n <= 4.

    The innermost coordinate integrates exactly to an erf difference; the
    remaining coordinates use panel-subdivided Gauss-Legendre, doubling
    panel counts until two refinements agree to half the target.  Raises
    NoConvergence rather than return a value it cannot vouch for.
    """
    _validate_sigma(sigma)
    if target_abs_error < QUADRATURE_MIN_TARGET:
        raise ValueError(
            f"target_abs_error below {QUADRATURE_MIN_TARGET} is not supported")
    r = _normalized_triangular(r)
    n = r.shape[0]
    if n > QUADRATURE_MAX_DIM:
        raise DimensionTooLargeError(
            f"deterministic quadrature supports n <= {QUADRATURE_MAX_DIM}, got {n}")
    if n == 0:
        return ProbabilityEstimate(value=1.0, method="Quadrature",
                                   error_bound=target_abs_error, evaluations=0)
    if n == 1:
        value = erf(r[0, 0] / (2.0 * math.sqrt(2.0) * sigma))
        return ProbabilityEstimate(value=min(max(value, 0.0), 1.0), method="Quadrature",
                                   error_bound=target_abs_error, evaluations=1)
    # start fine enough that a panel cannot straddle the Gaussian ridge
    # unnoticed: panel width about sigma per column-norm unit
    col_scale = float(np.max(np.linalg.norm(r[:, 1:], axis=0)))
    panels = 1
    while panels * QUADRATURE_NODES_PER_PANEL * sigma < col_scale and panels < 512:
        panels *= 2
    total = 0
    prev = None
    while True:
        cost = (QUADRATURE_NODES_PER_PANEL * panels) ** (n - 1)
        if total + cost > QUADRATURE_EVAL_CAP:
            raise NoConvergenceError(
                f"evaluation cap {QUADRATURE_EVAL_CAP} reached at {panels} panels "
                f"without meeting target {target_abs_error}")
        est, points = _outer_value(r, sigma, panels)
        total += points
        if prev is not None and abs(est - prev) < 0.5 * target_abs_error:
            value = min(max(est, 0.0), 1.0)
            return ProbabilityEstimate(value=value, method="Quadrature",
                                       error_bound=target_abs_error, evaluations=total)
        prev = est
        panels *= 2


def pzf_monte_carlo(r, sigma: float, samples: int, rng: RngSpec) -> ProbabilityEstimate:
    """Plain Monte Carlo on the defining integral with uniform xi draws.

    error_bound is one standard error of the mean, scaled by the
    prefactor.  Bit-reproducible for a fixed RngSpec.
    """
    _validate_sigma(sigma)
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    r = _normalized_triangular(r)
    n = r.shape[0]
    xi = uniform_block(rng, 0, samples * n).reshape(samples, n) - 0.5
    t = xi @ r.T
    vals = np.exp(-np.sum(t * t, axis=1) / (2.0 * sigma * sigma))
    pref = abs(float(np.prod(np.diag(r)))) / (2.0 * math.pi * sigma * sigma) ** (n / 2.0)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1)) / math.sqrt(samples)
    value = min(max(pref * mean, 0.0), 1.0)
    return ProbabilityEstimate(value=value, method="MonteCarlo",
                               error_bound=pref * stderr, evaluations=samples,
                               seed=rng.seed)


def pzf_empirical(r, sigma: float, trials: int, rng: RngSpec) -> ProbabilityEstimate:
    """Simulate the decoder: success fraction over noise-only trials.

    The success event is translation invariant in the true vector, so the
    zero vector stands in for it; a trial succeeds when every rounded
    coordinate of R^{-1} noise is zero.  error_bound is the binomial
    standard error.
    """
    _validate_sigma(sigma)
    if trials < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} trials, got {trials}")
    r = _normalized_triangular(r)
    n = r.shape[0]
    noise = sigma * gaussian_block(rng, 0, trials * n).reshape(trials, n)
    coords = solve_triangular(r, noise.T, lower=False)
    successes = int(np.sum(np.all(round_nearest(coords) == 0, axis=0)))
    value = successes / trials
    stderr = math.sqrt(value * (1.0 - value) / trials)
    return ProbabilityEstimate(value=value, method="Empirical",
                               error_bound=stderr, evaluations=trials,
                               seed=rng.seed)


def gaussian_window_mass(t: float, zeta: float, sigma: float) -> float:
    """Integral of exp(-x^2 / (2 sigma^2)) over the window [t - zeta, t + zeta].

    Even in t, strictly decreasing in |t|, and vanishing as |t| grows;
    evaluated as an erf difference.
    """
    if not (zeta > 0):
        raise ValueError(f"zeta must be positive, got {zeta!r}")
    if sigma == 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be a nonzero finite real, got {sigma!r}")
    s = abs(sigma)
    root2sig = math.sqrt(2.0) * s
    return s * math.sqrt(math.pi / 2.0) * (
        math.erf((t + zeta) / root2sig) - math.erf((t - zeta) / root2sig))
