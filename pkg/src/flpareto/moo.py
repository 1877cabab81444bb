"""Core multi-objective machinery: dominance, sorting, hypervolume, penalties.

Everything here works on plain numpy arrays under the minimization
convention.  A "front" or "objective set" is an (n, m) float array; a
single objective vector is a length-m array.  All functions are pure and
safe to call from any number of workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ConstraintSpec",
    "Archive",
    "ArchiveEntry",
    "Problem",
    "EvaluationError",
    "dominates",
    "pareto_front_mask",
    "nondominated_sort",
    "crowding_distance",
    "hypervolume",
    "penalize",
    "is_feasible",
    "aggregate_objective",
]


class EvaluationError(RuntimeError):
    """An evaluator failed on a specific solution."""

    def __init__(self, message: str, solution: np.ndarray | None = None):
        super().__init__(message)
        self.solution = None if solution is None else np.asarray(solution)


@dataclass(frozen=True)
class ConstraintSpec:
    """Per-objective upper bounds and penalty coefficients.

    ``bounds[i]`` is the upper bound on objective i (None = unconstrained),
    ``penalties[i]`` the nonnegative coefficient of the hinge penalty.
    """

    bounds: tuple[float | None, ...]
    penalties: tuple[float, ...]

    def __post_init__(self):
        if len(self.bounds) != len(self.penalties):
            raise ValueError("bounds and penalties must have equal length")
        if any(a < 0 for a in self.penalties):
            raise ValueError("penalty coefficients must be nonnegative")

    @property
    def m(self) -> int:
        return len(self.bounds)

    @staticmethod
    def unconstrained(m: int) -> "ConstraintSpec":
        return ConstraintSpec(bounds=(None,) * m, penalties=(0.0,) * m)

    def with_zero_penalties(self) -> "ConstraintSpec":
        """The unconstrained-baseline variant (all coefficients zero)."""
        return ConstraintSpec(bounds=self.bounds, penalties=(0.0,) * self.m)

    def bounds_array(self) -> np.ndarray:
        """Bounds with None replaced by +inf (never violated)."""
        return np.array(
            [np.inf if b is None else float(b) for b in self.bounds], dtype=float
        )

    def penalties_array(self) -> np.ndarray:
        return np.asarray(self.penalties, dtype=float)


def _as_2d(vs) -> np.ndarray:
    arr = np.asarray(vs, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected an (n, m) objective array, got shape {arr.shape}")
    return arr


def dominates(a, b) -> bool:
    """True iff a Pareto-dominates b (a <= b everywhere, < somewhere)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def pareto_front_mask(vs) -> np.ndarray:
    """Boolean mask of the non-dominated points of an (n, m) array.

    Duplicates of a non-dominated point are all kept (no pair of equal
    vectors dominates the other).
    """
    Y = _as_2d(vs)
    n = Y.shape[0]
    mask = np.ones(n, dtype=bool)
    # chunked pairwise check keeps memory bounded for large grids
    chunk = max(1, int(2**22 // max(n, 1)))
    for start in range(0, n, chunk):
        block = Y[start : start + chunk]  # (c, m)
        le = np.all(Y[None, :, :] <= block[:, None, :], axis=2)  # Y_j <= block_i
        lt = np.any(Y[None, :, :] < block[:, None, :], axis=2)
        dominated = np.any(le & lt, axis=1)
        mask[start : start + chunk] = ~dominated
    return mask


def nondominated_sort(vs) -> list[list[int]]:
    """Partition objective vectors into successive non-dominated fronts.

    Returns a list of index lists; front k is non-dominated within the
    union of fronts k, k+1, ...  (fast non-dominated sort, O(n^2 m)).
    """
    if len(vs) == 0:
        raise ValueError("nondominated_sort requires a nonempty list")
    Y = _as_2d(vs)
    n, _ = Y.shape
    # dom[i, j] = i dominates j
    le = np.all(Y[:, None, :] <= Y[None, :, :], axis=2)
    lt = np.any(Y[:, None, :] < Y[None, :, :], axis=2)
    dom = le & lt
    n_dominators = dom.sum(axis=0).astype(int)
    fronts: list[list[int]] = []
    remaining = n_dominators.copy()
    current = np.flatnonzero(remaining == 0)
    assigned = 0
    while current.size:
        fronts.append([int(i) for i in current])
        assigned += current.size
        remaining[current] = -1
        for i in current:
            remaining[dom[i]] -= 1
        current = np.flatnonzero(remaining == 0)
    assert assigned == n
    return fronts


def crowding_distance(front) -> np.ndarray:
    """NSGA-II crowding distance for one front of objective vectors.

    Boundary points of every objective get +inf; interior points sum the
    normalized neighbor gaps.  An objective with zero range contributes 0.
    Fronts of size <= 2 are all +inf.
    """
    Y = _as_2d(front)
    n, m = Y.shape
    if n == 0:
        raise ValueError("crowding_distance requires a nonempty front")
    dist = np.zeros(n, dtype=float)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(Y[:, j], kind="stable")
        vals = Y[order, j]
        span = vals[-1] - vals[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            gaps = (vals[2:] - vals[:-2]) / span
            interior = order[1:-1]
            finite = ~np.isinf(dist[interior])
            dist[interior[finite]] += gaps[finite]
    return dist


def _hv2d(Y: np.ndarray, z: np.ndarray) -> float:
    """Exact 2-D hypervolume via a sort-and-sweep over the staircase."""
    keep = np.all(Y <= z, axis=1)
    Y = Y[keep]
    if Y.shape[0] == 0:
        return 0.0
    order = np.lexsort((Y[:, 1], Y[:, 0]))  # f1 asc, f2 asc among ties
    f1 = Y[order, 0]
    f2 = Y[order, 1]
    level = np.concatenate(([z[1]], np.minimum.accumulate(f2)[:-1]))
    gain = np.where(f2 < level, (z[0] - f1) * (level - f2), 0.0)
    return float(gain.sum())


def _hv3d(Y: np.ndarray, z: np.ndarray) -> float:
    """Exact 3-D hypervolume by sweeping slabs along the third objective."""
    keep = np.all(Y <= z, axis=1)
    Y = Y[keep]
    if Y.shape[0] == 0:
        return 0.0
    order = np.argsort(Y[:, 2], kind="stable")
    Y = Y[order]
    levels = np.unique(Y[:, 2])
    edges = np.append(levels, z[2])
    hv = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        active = Y[Y[:, 2] <= lo, :2]
        hv += _hv2d(active, z[:2]) * (hi - lo)
    return float(hv)


def hypervolume(points, z) -> float:
    """Exact hypervolume of `points` w.r.t. reference point `z` (m in {2, 3}).

    Points not componentwise <= z are excluded from the union (penalized
    objectives may exceed any fixed reference).  Empty input gives 0.
    """
    z = np.asarray(z, dtype=float)
    m = z.shape[0]
    if m not in (2, 3):
        raise ValueError(f"hypervolume supports m in {{2, 3}}, got m={m}")
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return 0.0
    pts = _as_2d(pts)
    if pts.shape[1] != m:
        raise ValueError(f"points have m={pts.shape[1]} but reference has m={m}")
    return _hv2d(pts, z) if m == 2 else _hv3d(pts, z)


def penalize(y, constraints: ConstraintSpec) -> np.ndarray:
    """Apply the hinge penalty e_i + a_i * max(0, e_i - phi_i) per objective.

    Accepts a single vector or an (n, m) batch; unconstrained coordinates
    pass through unchanged.
    """
    arr = np.asarray(y, dtype=float)
    single = arr.ndim == 1
    Y = _as_2d(arr)
    if Y.shape[1] != constraints.m:
        raise ValueError(
            f"objective count {Y.shape[1]} does not match constraint spec m={constraints.m}"
        )
    bounds = constraints.bounds_array()
    alphas = constraints.penalties_array()
    out = Y + alphas * np.maximum(0.0, Y - bounds)
    return out[0] if single else out


def selection_penalty(y, constraints: ConstraintSpec) -> np.ndarray:
    """Rank-space transform: add each solution's total weighted violation to
    every coordinate.

    The per-coordinate hinge of `penalize` is strictly increasing per axis
    and therefore never alters Pareto ranks; this broadcast variant makes
    constraint violators dominated so selection can actually expel them.
    It agrees with `penalize` on the constrained coordinate whenever that
    coordinate is the sole violator, and is the identity on feasible input.
    """
    arr = np.asarray(y, dtype=float)
    single = arr.ndim == 1
    Y = _as_2d(arr)
    if Y.shape[1] != constraints.m:
        raise ValueError(
            f"objective count {Y.shape[1]} does not match constraint spec m={constraints.m}"
        )
    hinge = constraints.penalties_array() * np.maximum(
        0.0, Y - constraints.bounds_array()
    )
    out = Y + hinge.sum(axis=1, keepdims=True)
    return out[0] if single else out


def is_feasible(y, constraints: ConstraintSpec) -> np.ndarray | bool:
    """Whether raw objective values satisfy every bound (vector or batch)."""
    arr = np.asarray(y, dtype=float)
    single = arr.ndim == 1
    Y = _as_2d(arr)
    ok = np.all(Y <= constraints.bounds_array(), axis=1)
    return bool(ok[0]) if single else ok


def aggregate_objective(locals_, weights=None, mode: str = "average") -> float:
    """Combine per-client objective values into a system objective.

    mode "average": weighted mean (weights must be nonnegative and sum to 1
    within 1e-9; uniform when omitted).  mode "worst": maximum.
    """
    vals = np.asarray(locals_, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("locals must be a nonempty 1-d sequence")
    if mode == "worst":
        return float(np.max(vals))
    if mode != "average":
        raise ValueError(f"unknown aggregation mode: {mode!r}")
    if weights is None:
        w = np.full(vals.size, 1.0 / vals.size)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != vals.shape:
            raise ValueError("weights must match locals in length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1 within 1e-9")
    return float(np.dot(w, vals))


@dataclass
class ArchiveEntry:
    """One evaluated solution with its raw/penalized objectives."""

    index: int
    genes: np.ndarray
    raw: np.ndarray
    penalized: np.ndarray
    feasible: bool
    generation: int


@dataclass
class Archive:
    """Append-only record of every evaluation made during a run."""

    constraints: ConstraintSpec
    entries: list[ArchiveEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def append_batch(self, genes: np.ndarray, raw: np.ndarray, generation: int) -> None:
        genes = np.atleast_2d(np.asarray(genes, dtype=float))
        raw = np.atleast_2d(np.asarray(raw, dtype=float))
        pen = penalize(raw, self.constraints)
        feas = is_feasible(raw, self.constraints)
        base = len(self.entries)
        for i in range(genes.shape[0]):
            self.entries.append(
                ArchiveEntry(
                    index=base + i,
                    genes=genes[i].copy(),
                    raw=raw[i].copy(),
                    penalized=np.asarray(pen)[i].copy(),
                    feasible=bool(np.asarray(feas)[i]),
                    generation=generation,
                )
            )

    def raw_matrix(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, self.constraints.m))
        return np.stack([e.raw for e in self.entries])

    def genes_matrix(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, 0))
        return np.stack([e.genes for e in self.entries])

    def feasible_mask(self) -> np.ndarray:
        return np.array([e.feasible for e in self.entries], dtype=bool)

    def feasible_raw(self) -> np.ndarray:
        Y = self.raw_matrix()
        return Y[self.feasible_mask()] if len(self.entries) else Y

    def front_indices(self, feasible_only: bool = True) -> list[int]:
        """Indices of non-dominated entries (by raw objectives)."""
        if not self.entries:
            return []
        Y = self.raw_matrix()
        idx = np.arange(len(self.entries))
        if feasible_only:
            keep = self.feasible_mask()
            Y, idx = Y[keep], idx[keep]
        if Y.shape[0] == 0:
            return []
        mask = pareto_front_mask(Y)
        return [int(i) for i in idx[mask]]

    def hv(self, z, feasible_only: bool = True) -> float:
        Y = self.feasible_raw() if feasible_only else self.raw_matrix()
        return hypervolume(Y, z)

    def best_per_objective(self, feasible_only: bool = True) -> np.ndarray:
        Y = self.feasible_raw() if feasible_only else self.raw_matrix()
        if Y.shape[0] == 0:
            return np.full(self.constraints.m, np.nan)
        return Y.min(axis=0)


@dataclass
class Problem:
    """A black-box minimization problem behind the shared evaluator seam.

    `evaluate(X, seeds)` maps an (n, d) array of solutions in [0, 1]^d and
    an (n,) array of per-solution seeds to an (n, m) array of raw objective
    values.  Benchmarks ignore the seeds; the FL evaluator uses them.
    """

    name: str
    dim: int
    n_obj: int
    evaluate: Callable[[np.ndarray, Sequence[int]], np.ndarray]
    constraints: ConstraintSpec
    ref_point: np.ndarray
