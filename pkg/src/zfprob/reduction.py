"""Lattice reductions on an upper-triangular matrix.

Every routine here rewrites an upper-triangular R as Qbar^T R Z = Rbar with
Z unimodular (integer, det +-1) and Qbar orthogonal, returning the triple
plus counters of the elementary steps taken.  Covered strategies:

* entry-wise size reduction and the adjacent-column swap step,
* the classic delta-parameterized reduction loop built from those two,
* the sorted-pivot ordering (greedy smallest pivot, first to last),
* the decision-feedback ordering (greedy largest pivot, last to first).

Indices are 0-based throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    IterationLimitExceededError,
    NotUnimodularError,
    RankDeficientError,
    SingularDiagonalError,
    SingularMatrixError,
)
from .linalg import (
    check_upper_triangular,
    det_upper_triangular,
    int_determinant,
    qr_factorize,
    round_nearest,
)
from .tolerances import (
    DEFAULT_DELTA,
    DET_PRESERVATION_TOL,
    LLL_CHECK_SLACK,
    MAX_ITERATIONS_PER_N2,
    ORDERING_TIE_TOL,
    REDUCTION_RECONSTRUCTION_TOL,
    SIZE_REDUCE_DIAG_MIN,
    SOLVE_DIAG_MIN,
)

__all__ = [
    "LLLParams",
    "ReductionStats",
    "ReductionResult",
    "LLLCheckReport",
    "size_reduce_entry",
    "lovasz_holds",
    "swap_and_retriangularize",
    "lll_reduce",
    "is_lll_reduced",
    "sqrd",
    "vblast",
    "orthogonality_defect",
]


@dataclass(frozen=True)
class LLLParams:
    """Reduction-loop knobs.

    delta: quality parameter in (0.25, 1.0]; larger demands a more
    reduced output.  max_iterations: hard cap on loop passes; None means
    10000 * n**2 for an n-column input.
    """

    delta: float = DEFAULT_DELTA
    max_iterations: int | None = None

    def __post_init__(self):
        if not (0.25 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (0.25, 1.0], got {self.delta!r}")
        if self.max_iterations is not None and self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class ReductionStats:
    size_reductions: int = 0
    swaps: int = 0
    iterations: int = 0


@dataclass(frozen=True)
class LLLCheckReport:
    size_ok: bool
    lovasz_ok: bool
    first_violation: tuple[int, int] | None = None

    @property
    def is_reduced(self) -> bool:
        return self.size_ok and self.lovasz_ok


@dataclass(frozen=True)
class ReductionResult:
    """Output of a reduction: Qbar^T R Z = Rbar.

    r_bar: upper triangular, positive diagonal.  z: integer unimodular.
    q_bar: orthogonal.  stats: elementary-step counters.
    """

    r_bar: np.ndarray
    z: np.ndarray
    q_bar: np.ndarray
    stats: ReductionStats

    def reconstruction_error(self, r_input) -> float:
        """Relative Frobenius error of Qbar^T R Z against Rbar."""
        r_input = np.asarray(r_input, dtype=float)
        lhs = self.q_bar.T @ r_input @ self.z
        scale = max(np.linalg.norm(r_input), 1e-300)
        return float(np.linalg.norm(lhs - self.r_bar) / scale)

    def det_drift(self, r_input) -> float:
        """Relative |det| change through the reduction."""
        d_in = abs(det_upper_triangular(np.triu(r_input)))
        d_out = abs(det_upper_triangular(self.r_bar))
        return abs(d_out - d_in) / max(d_in, 1e-300)

    def check(self, r_input):
        """Raise unless every structural invariant holds against r_input."""
        if int_determinant(self.z) not in (-1, 1):
            raise NotUnimodularError(
                f"transform determinant is {int_determinant(self.z)}, expected +-1")
        if np.min(np.diag(self.r_bar)) <= 0.0:
            raise SingularDiagonalError("reduced matrix has a non-positive pivot")
        err = self.reconstruction_error(r_input)
        if err > REDUCTION_RECONSTRUCTION_TOL:
            raise SingularMatrixError(
                f"reconstruction error {err:.3e} exceeds {REDUCTION_RECONSTRUCTION_TOL}")
        drift = self.det_drift(r_input)
        if drift > DET_PRESERVATION_TOL:
            raise SingularMatrixError(
                f"determinant drift {drift:.3e} exceeds {DET_PRESERVATION_TOL}")


def _require_nonsingular_diag(r, where):
    diag = np.abs(np.diag(r))
    if r.shape[0] and np.min(diag) < SIZE_REDUCE_DIAG_MIN:
        i = int(np.argmin(diag))
        raise SingularDiagonalError(f"{where}: |r_{i}{i}| = {diag[i]!r} is below threshold")


def _normalize_signs(r, q):
    # flip any negative pivot row of r, absorbing the sign into q's column
    for j in range(r.shape[0]):
        if r[j, j] < 0.0:
            r[j, :] = -r[j, :]
            q[:, j] = -q[:, j]


def _size_reduce_inplace(r, z, i, k) -> bool:
    if abs(r[i, i]) < SIZE_REDUCE_DIAG_MIN:
        raise SingularDiagonalError(f"pivot {i} has magnitude {abs(r[i, i])!r}")
    mu = round_nearest(r[i, k] / r[i, i])
    if mu == 0:
        return False
    # column k minus mu times column i; rows above i only, r is triangular
    r[: i + 1, k] -= mu * r[: i + 1, i]
    z[:, k] -= mu * z[:, i]
    return True


def size_reduce_entry(r, z, i: int, k: int):
    """Shrink r_ik by an integer multiple of column i (i < k).

    Returns (r, z, applied) with fresh arrays; applied is False when the
    entry already satisfied |r_ik| <= 0.5 |r_ii| closely enough that the
    nearest multiple was zero.  The same column operation is applied to z.
    """
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    if not (0 <= i < k < n):
        raise DimensionMismatchError(f"need 0 <= i < k < {n}, got i={i}, k={k}")
    z = np.array(z, dtype=np.int64, copy=True)
    if z.shape != (n, n):
        raise DimensionMismatchError(f"Z must be {n}x{n}, got {z.shape}")
    applied = _size_reduce_inplace(r, z, i, k)
    return r, z, applied


def lovasz_holds(r, k: int, delta: float) -> bool:
    """Adjacent-pair condition at column k (1 <= k < n):
    delta * r_{k-1,k-1}^2 <= r_{k-1,k}^2 + r_{k,k}^2."""
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    if not (1 <= k < n):
        raise DimensionMismatchError(f"need 1 <= k < {n}, got k={k}")
    lhs = delta * r[k - 1, k - 1] ** 2
    rhs = r[k - 1, k] ** 2 + r[k, k] ** 2
    return lhs <= rhs


def _swap_inplace(r, z, q, k):
    r[:, [k - 1, k]] = r[:, [k, k - 1]]
    z[:, [k - 1, k]] = z[:, [k, k - 1]]
    # the swap leaves one entry below the diagonal; rotate it away
    a = r[k - 1, k - 1]
    b = r[k, k - 1]
    rho = math.hypot(a, b)
    if rho < SIZE_REDUCE_DIAG_MIN:
        raise SingularDiagonalError(f"columns {k-1},{k} are numerically dependent")
    c = a / rho
    s = b / rho
    g = np.array([[c, -s], [s, c]])
    r[[k - 1, k], :] = g.T @ r[[k - 1, k], :]
    q[:, [k - 1, k]] = q[:, [k - 1, k]] @ g
    for j in (k - 1, k):
        if r[j, j] < 0.0:
            r[j, :] = -r[j, :]
            q[:, j] = -q[:, j]
    r[k, k - 1] = 0.0


def swap_and_retriangularize(r, z, q, k: int):
    """Exchange columns k-1 and k, then restore triangular form.

    A single 2x2 rotation (accumulated into q) re-zeroes the subdiagonal
    entry the swap created; pivot signs are renormalized positive.
    Applying the operation twice with the same k is the identity up to
    roundoff.
    """
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    if not (1 <= k < n):
        raise DimensionMismatchError(f"need 1 <= k < {n}, got k={k}")
    z = np.array(z, dtype=np.int64, copy=True)
    q = np.array(q, dtype=float, copy=True)
    if z.shape != (n, n) or q.shape != (n, n):
        raise DimensionMismatchError("Z and Q must match R's shape")
    _swap_inplace(r, z, q, k)
    return r, z, q


def lll_reduce(r, params: LLLParams | None = None) -> ReductionResult:
    """Run the delta-parameterized reduction loop on upper-triangular r.

    The loop walks a column pointer k from 1 upward: size-reduce the
    superdiagonal entry, test the adjacent-pair condition, swap and step
    back on failure, otherwise size-reduce the rest of the column and
    advance.  Output satisfies |rbar_ik| <= 0.5 rbar_ii for all i < k and
    the pair condition at every k for the given delta.
    """
    if params is None:
        params = LLLParams()
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    _require_nonsingular_diag(r, "lll_reduce")
    z = np.eye(n, dtype=np.int64)
    q = np.eye(n)
    _normalize_signs(r, q)
    limit = params.max_iterations
    if limit is None:
        limit = MAX_ITERATIONS_PER_N2 * max(n, 1) ** 2
    size_reductions = 0
    swaps = 0
    iterations = 0
    passes = 0
    k = 1
    while k < n:
        passes += 1
        if passes > limit:
            raise IterationLimitExceededError(
                f"no convergence after {limit} passes (delta={params.delta})")
        changed = False
        if _size_reduce_inplace(r, z, k - 1, k):
            size_reductions += 1
            changed = True
        if not lovasz_holds(r, k, params.delta):
            _swap_inplace(r, z, q, k)
            swaps += 1
            changed = True
            k = max(k - 1, 1)
        else:
            for i in range(k - 2, -1, -1):
                if _size_reduce_inplace(r, z, i, k):
                    size_reductions += 1
                    changed = True
            k += 1
        if changed:
            iterations += 1
    stats = ReductionStats(size_reductions=size_reductions, swaps=swaps,
                           iterations=iterations)
    return ReductionResult(r_bar=r + 0.0, z=z, q_bar=q, stats=stats)


def is_lll_reduced(r, delta: float = DEFAULT_DELTA) -> LLLCheckReport:
    """Check the size-reduced and adjacent-pair conditions with a small
    boundary slack; reports the first violating index pair if any."""
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    size_ok = True
    lovasz_ok = True
    first: tuple[int, int] | None = None
    for k in range(1, n):
        for i in range(k):
            bound = 0.5 * abs(r[i, i])
            if abs(r[i, k]) > bound + LLL_CHECK_SLACK * max(abs(r[i, i]), 1.0):
                size_ok = False
                if first is None:
                    first = (i, k)
    for k in range(1, n):
        lhs = delta * r[k - 1, k - 1] ** 2
        rhs = r[k - 1, k] ** 2 + r[k, k] ** 2
        if lhs > rhs + LLL_CHECK_SLACK * max(lhs, 1.0):
            lovasz_ok = False
            if first is None:
                first = (k - 1, k)
    return LLLCheckReport(size_ok=size_ok, lovasz_ok=lovasz_ok, first_violation=first)


def _perm_result(r, perm) -> ReductionResult:
    n = r.shape[0]
    z = np.zeros((n, n), dtype=np.int64)
    for pos, orig in enumerate(perm):
        z[orig, pos] = 1
    f = qr_factorize(r[:, perm])
    # swap count of the permutation: transpositions of its cycle decomposition
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if not seen[start]:
            cycles += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    stats = ReductionStats(size_reductions=0, swaps=n - cycles, iterations=0)
    return ReductionResult(r_bar=f.r, z=z, q_bar=f.q1, stats=stats)


def sqrd(a) -> ReductionResult:
    """Column reordering chosen first to last, each pick minimizing the
    next pivot magnitude; z is the corresponding permutation.

    Accepts a rectangular full-column-rank matrix; the reconstruction
    invariant is stated against its triangular factor.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatchError(f"need a 2-d matrix, got shape {a.shape}")
    r = qr_factorize(a).r
    n = r.shape[0]
    work = r.copy()
    remaining = list(range(n))
    basis: list[np.ndarray] = []
    perm: list[int] = []
    for _ in range(n):
        best = None
        best_norm = None
        for c in remaining:
            v = work[:, c]
            norm = float(np.linalg.norm(v))
            if best is None or norm < best_norm - ORDERING_TIE_TOL * max(best_norm, 1.0):
                best, best_norm = c, norm
        perm.append(best)
        v = work[:, best].copy()
        nv = np.linalg.norm(v)
        if nv < SOLVE_DIAG_MIN:
            raise RankDeficientError("columns became dependent during ordering")
        v /= nv
        basis.append(v)
        remaining.remove(best)
        for c in remaining:
            work[:, c] -= v * (v @ work[:, c])
    return _perm_result(r, perm)


def vblast(r) -> ReductionResult:
    """Column reordering chosen last to first, each pick maximizing the
    pivot that position would get; z is the corresponding permutation."""
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    remaining = list(range(n))
    tail: list[int] = []
    for _ in range(n):
        best = None
        best_norm = None
        for c in remaining:
            others = [o for o in remaining if o != c]
            if others:
                basis, _ = np.linalg.qr(r[:, others])
                v = r[:, c]
                resid = v - basis @ (basis.T @ v)
                norm = float(np.linalg.norm(resid))
            else:
                norm = float(np.linalg.norm(r[:, c]))
            if best is None or norm > best_norm + ORDERING_TIE_TOL * max(best_norm, 1.0):
                best, best_norm = c, norm
        if best_norm < SOLVE_DIAG_MIN:
            raise RankDeficientError("columns became dependent during ordering")
        tail.append(best)
        remaining.remove(best)
    perm = list(reversed(tail))
    return _perm_result(r, perm)


def orthogonality_defect(r) -> float:
    """Product of column norms over |det|; 1 exactly when columns are
    orthogonal, larger otherwise."""
    r = check_upper_triangular(r, "R")
    n = r.shape[0]
    det = abs(det_upper_triangular(r))
    if det < SOLVE_DIAG_MIN ** max(n, 1):
        raise SingularMatrixError("matrix is singular to working precision")
    norms = np.linalg.norm(r, axis=0)
    return float(np.prod(norms) / det)
