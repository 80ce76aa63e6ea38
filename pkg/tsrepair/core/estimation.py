"""ARX(p) parameter estimation by ordinary least squares over diffs.

Three backends share one interface:

- ``full``: rebuild the design matrices and normal equations every call.
- ``pruned``: same, dropping design rows whose lag entries are all zero.
- ``incremental``: build once (pruned), then patch A and B in constant time
  per single-point change.

The normal equations for diffs z_1..z_n and order p are

    a_ij = sum_{l=p+1-i}^{n-i} z_l * z_{l-(j-i)}     (i <= j, a_ji = a_ij)
    b_i  = sum_{l=p+1}^{n}     z_l * z_{l-i}
"""

import logging
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, Set, Tuple

import numpy as np

from .exceptions import InputError, SingularSystem
from .models import DiffSeries, RepairState, TimeSeries, diff

logger = logging.getLogger(__name__)

MAX_ORDER = 8
PIVOT_TOLERANCE = 1e-12
BACKENDS = ("full", "pruned", "incremental")

Backend = Literal["full", "pruned", "incremental"]


def check_order(p: int) -> None:
    if not 1 <= p <= MAX_ORDER:
        raise InputError(f"order must be in [1, {MAX_ORDER}], got {p}")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """ARX coefficients phi_1..phi_p (the constant term is fixed at 0)."""
    phi: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.phi, dtype=np.float64).reshape(-1)
        if arr.size < 1:
            raise InputError("ModelParams needs at least one coefficient")
        if not np.all(np.isfinite(arr)):
            raise InputError("ModelParams coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "phi", arr)

    @property
    def p(self) -> int:
        return int(self.phi.size)

    @classmethod
    def zeros(cls, p: int) -> "ModelParams":
        return cls(np.zeros(p))

    @classmethod
    def of(cls, *phi: float) -> "ModelParams":
        return cls(np.asarray(phi, dtype=np.float64))

    def to_list(self) -> list:
        return [float(v) for v in self.phi]


@dataclass(frozen=True, eq=False)
class DesignMatrices:
    """Lagged design Z (rows x p), response V (rows,) and unpruned row numbers.

    Row r (1-based, before pruning) holds (z_{p+r-1}, ..., z_r) and V_r = z_{p+r}.
    """
    Z: np.ndarray
    V: np.ndarray
    row_origin: np.ndarray
    p: int
    n: int

    @property
    def rows(self) -> int:
        return int(self.V.size)


@dataclass(frozen=True, eq=False)
class NormalEquations:
    """A = Z'Z (p x p, symmetric) and B = Z'V (p,)."""
    A: np.ndarray
    B: np.ndarray
    p: int
    n: int

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=np.float64)
        B = np.array(self.B, dtype=np.float64).reshape(-1)
        if A.shape != (self.p, self.p) or B.shape != (self.p,):
            raise InputError(f"normal equations shape mismatch for p={self.p}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise InputError("normal equations must be finite")
        if not np.array_equal(A, A.T):
            raise InputError("normal matrix A must be symmetric")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


def build_design_matrices(z: DiffSeries, p: int, prune: bool = False) -> DesignMatrices:
    """Lagged regression of z_t on z_{t-1}..z_{t-p} for t = p+1..n.

    Args:
        z: Current displacements.
        p: Model order.
        prune: Drop rows whose lags are all zero. They add nothing to Z'Z or
            Z'V, so the normal equations are unchanged.

    Returns:
        Design matrices with the unpruned row number of every kept row.

    Raises:
        InputError: If p is out of range or n <= p.
    """
    check_order(p)
    n = z.n
    if n <= p:
        raise InputError(f"series length {n} must exceed order {p}")
    values = z.diffs
    rows = n - p
    # column i holds lag i+1: z_{p+r-1-i} for rows r = 1..n-p
    Z = np.empty((rows, p), dtype=np.float64)
    for i in range(p):
        Z[:, i] = values[p - 1 - i : n - 1 - i]
    V = values[p:].copy()
    origin = np.arange(1, rows + 1, dtype=np.int64)
    if prune:
        keep = np.any(Z != 0.0, axis=1)
        Z, V, origin = Z[keep], V[keep], origin[keep]
    return DesignMatrices(Z=Z, V=V, row_origin=origin, p=p, n=n)


def normal_from_design(d: DesignMatrices) -> NormalEquations:
    """Form A = Z'Z and B = Z'V."""
    A = d.Z.T @ d.Z
    # symmetrize against rounding in the BLAS product
    A = 0.5 * (A + A.T)
    B = d.Z.T @ d.V
    return NormalEquations(A=A, B=B, p=d.p, n=d.n)


def solve_normal(ne: NormalEquations) -> ModelParams:
    """Solve A phi = B by Gaussian elimination with partial pivoting.

    Raises:
        SingularSystem: if a pivot falls below PIVOT_TOLERANCE in magnitude
    """
    p = ne.p
    M = np.hstack([np.array(ne.A, dtype=np.float64), ne.B.reshape(p, 1)])
    for col in range(p):
        pivot = col + int(np.argmax(np.abs(M[col:, col])))
        if abs(M[pivot, col]) < PIVOT_TOLERANCE:
            raise SingularSystem(f"pivot {M[pivot, col]:.3e} below tolerance at column {col + 1}")
        if pivot != col:
            M[[col, pivot]] = M[[pivot, col]]
        M[col + 1 :] -= np.outer(M[col + 1 :, col] / M[col, col], M[col])
    phi = np.zeros(p)
    for row in range(p - 1, -1, -1):
        phi[row] = (M[row, p] - M[row, row + 1 : p] @ phi[row + 1 :]) / M[row, row]
    if not np.all(np.isfinite(phi)):
        raise SingularSystem("solution is not finite")
    return ModelParams(phi)


def incremental_update_counted(
    ne: NormalEquations, z_before: np.ndarray, r: int, z_r_new: float
) -> Tuple[NormalEquations, int]:
    """Patch A and B for a change of z_r, returning the count of z entries read.

    ``z_before`` is the diff array before the change (0-based storage, read
    only). Only z_r and entries within p of r are read, so the cost is
    independent of n.
    """
    p, n = ne.p, ne.n
    if z_before.shape[0] != n:
        raise InputError(f"diff length {z_before.shape[0]} != normal equations length {n}")
    if not 1 <= r <= n:
        raise InputError(f"changed index {r} outside [1, {n}]")
    touched: Set[int] = {r}

    def z(t: int) -> float:
        touched.add(t)
        return float(z_before[t - 1])

    old = z(r)
    delta = z_r_new - old
    A = np.array(ne.A, dtype=np.float64)
    B = np.array(ne.B, dtype=np.float64)
    if delta == 0.0:
        return ne, len(touched)

    for i in range(1, p + 1):
        lo, hi = p + 1 - i, n - i
        for j in range(i, p + 1):
            d = j - i
            if d == 0:
                # z_r appears squared when p+1-i <= r <= n-i
                if lo <= r <= hi:
                    A[i - 1, i - 1] += z_r_new * z_r_new - old * old
                continue
            change = 0.0
            # term l = r pairs z_r with z_{r-d}
            if lo <= r <= hi:
                change += delta * z(r - d)
            # term l = r+d pairs z_{r+d} with z_r
            if lo <= r + d <= hi:
                change += delta * z(r + d)
            if change:
                A[i - 1, j - 1] += change
                A[j - 1, i - 1] = A[i - 1, j - 1]

    for i in range(1, p + 1):
        change = 0.0
        if p + 1 <= r <= n:
            change += delta * z(r - i)
        if p + 1 <= r + i <= n:
            change += delta * z(r + i)
        B[i - 1] += change

    return NormalEquations(A=A, B=B, p=p, n=n), len(touched)


def incremental_update(
    ne: NormalEquations, z_before: DiffSeries, r: int, z_r_new: float
) -> NormalEquations:
    """Normal equations after z_r changes to z_r_new, without rebuilding them.

    Only entries of A and B built from rows that read z_r are patched, so the
    cost is O(p^2) whatever the series length.

    Args:
        ne: Normal equations for ``z_before``.
        z_before: Displacements before the change.
        r: 1-based index of the changed displacement.
        z_r_new: Its new value.

    Returns:
        Fresh normal equations; ``ne`` is not modified.
    """
    updated, _ = incremental_update_counted(ne, z_before.diffs, r, z_r_new)
    return updated


class PendingChange(NamedTuple):
    """The single change applied since the cache was last refreshed."""
    index: int
    z_old: float


@dataclass(frozen=True)
class EstimationCache:
    normal: NormalEquations


def _normal_for(values: np.ndarray, p: int, prune: bool) -> NormalEquations:
    return normal_from_design(build_design_matrices(DiffSeries(values), p, prune=prune))


def estimate(
    x: TimeSeries,
    state: RepairState,
    p: int,
    backend: Backend = "full",
    cache: Optional[EstimationCache] = None,
    change: Optional[PendingChange] = None,
) -> Tuple[ModelParams, Optional[EstimationCache]]:
    """Estimate phi from the current repair.

    For the incremental backend pass the cache returned by the previous call
    and the change committed since then; on the first call pass neither.

    Args:
        x: Observations.
        state: Current repair y(k).
        p: Model order.
        backend: ``full``, ``pruned`` or ``incremental``.
        cache: Normal equations from the previous call (incremental only).
        change: Displacement changed since that call (incremental only).

    Returns:
        The parameters, and the cache to pass next time (None unless incremental).

    Raises:
        InputError: On an unknown backend.
        SingularSystem: propagated from the solve
    """
    if backend not in BACKENDS:
        raise InputError(f"unknown backend {backend!r}")
    z = diff(state, x).diffs
    if backend != "incremental":
        return solve_normal(_normal_for(z, p, prune=backend == "pruned")), None

    if cache is None:
        normal = _normal_for(z, p, prune=True)
    else:
        if change is None:
            normal = cache.normal
        else:
            z_before = np.array(z)
            z_before[change.index - 1] = change.z_old
            normal, _ = incremental_update_counted(
                cache.normal, z_before, change.index, float(z[change.index - 1])
            )
    new_cache = EstimationCache(normal)
    return solve_normal(normal), new_cache


class ParameterEstimator:
    """Stateful estimator owned by one repair job.

    The engine keeps its own working diff array; ``record_change`` must be
    called with that array before the engine commits the new value.
    """

    def __init__(self, p: int, backend: Backend = "incremental"):
        check_order(p)
        if backend not in BACKENDS:
            raise InputError(f"unknown backend {backend!r}")
        self.p = p
        self.backend = backend
        self._normal: Optional[NormalEquations] = None
        self.last_touched = 0

    @property
    def normal(self) -> Optional[NormalEquations]:
        return self._normal

    def estimate(self, z: np.ndarray) -> ModelParams:
        if self.backend == "incremental":
            if self._normal is None:
                self._normal = _normal_for(z, self.p, prune=True)
            normal = self._normal
        else:
            normal = _normal_for(z, self.p, prune=self.backend == "pruned")
        return solve_normal(normal)

    def record_change(self, z: np.ndarray, r: int, z_new: float) -> None:
        if self.backend != "incremental" or self._normal is None:
            return
        self._normal, self.last_touched = incremental_update_counted(self._normal, z, r, z_new)
