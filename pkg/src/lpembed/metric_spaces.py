"""Finite metric spaces: dense distance matrices, generators and validation.

Spaces are immutable after construction. Construction only enforces structural
shape (square matrix, matching labels, size cap); metric axioms are checked by
`validate`, which reports violations as data so that broken inputs can be
inspected instead of rejected blindly. The generators cover graph metrics
(hypercube, cycle, path) and seeded Gaussian point clouds with Euclidean
distances, the stand-in for samples drawn from a separable Hilbert space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "MAX_POINTS",
    "FiniteMetricSpace",
    "MetricViolation",
    "ValidationReport",
    "generate",
    "validate",
    "space_to_json",
    "space_from_json",
    "save_space",
    "load_space",
]

# all downstream algorithms are O(n^2)-O(n^3); keep desk-scale
MAX_POINTS = 4096

GENERATOR_KINDS = ("hypercube", "cycle", "gaussian", "path")

TRIANGLE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Point labels plus a symmetric nonnegative distance matrix."""

    labels: tuple
    dist: np.ndarray
    points: Optional[np.ndarray] = None  # sample coordinates, when distances came from them
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        labels = tuple(str(l) for l in self.labels)
        dist = np.asarray(self.dist, dtype=np.float64)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {dist.shape}")
        n = dist.shape[0]
        if n == 0:
            raise ValueError("a metric space needs at least one point")
        if n > MAX_POINTS:
            raise ValueError(f"at most {MAX_POINTS} points supported, got {n}")
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} points")
        if len(set(labels)) != n:
            raise ValueError("labels must be unique")
        dist = dist.copy()
        dist.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", dist)
        if self.points is not None:
            pts = np.asarray(self.points, dtype=np.float64)
            pts = pts.copy()
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.n

    def diameter(self) -> float:
        return float(self.dist.max())

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown point label {label!r}") from None

    def pair_indices(self) -> tuple:
        """Upper-triangle index arrays (i < j) enumerating all point pairs."""
        return np.triu_indices(self.n, 1)


@dataclass(frozen=True)
class MetricViolation:
    kind: str  # 'finite' | 'diagonal' | 'symmetry' | 'positivity' | 'triangle'
    indices: tuple
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}{self.indices}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple
    diameter: float
    min_positive: float

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(space: FiniteMetricSpace, max_violations: int = 1000) -> ValidationReport:
    """Check all metric axioms; violations are returned, never raised."""
    d = space.dist
    n = space.n
    out: list = []

    def push(kind, idx, detail):
        if len(out) < max_violations:
            out.append(MetricViolation(kind, idx, detail))

    bad = np.argwhere(~np.isfinite(d))
    for i, j in bad:
        push("finite", (int(i), int(j)), f"dist = {d[i, j]!r}")
    finite = np.where(np.isfinite(d), d, 0.0)

    for i in np.nonzero(np.diag(finite) != 0.0)[0]:
        push("diagonal", (int(i),), f"dist(i,i) = {finite[i, i]!r}")

    asym = np.argwhere(finite != finite.T)
    for i, j in asym[asym[:, 0] < asym[:, 1]]:
        push("symmetry", (int(i), int(j)), f"{finite[i, j]!r} != {finite[j, i]!r}")

    offdiag = ~np.eye(n, dtype=bool)
    nonpos = np.argwhere((finite <= 0.0) & offdiag)
    for i, j in nonpos[nonpos[:, 0] < nonpos[:, 1]]:
        push("positivity", (int(i), int(j)), f"dist = {finite[i, j]!r}")

    # triangle: d(i,k) <= d(i,j) + d(j,k), vectorized over one intermediate at a time
    for j in range(n):
        slack = finite - (finite[:, j:j + 1] + finite[j:j + 1, :])
        viol = np.argwhere(slack > TRIANGLE_TOL)
        for i, k in viol:
            if i < k:
                push(
                    "triangle",
                    (int(i), int(j), int(k)),
                    f"d(i,k) = {finite[i, k]!r} > {finite[i, j] + finite[j, k]!r} via j",
                )

    pos = finite[offdiag & (finite > 0)] if n > 1 else np.array([])
    min_positive = float(pos.min()) if pos.size else math.inf
    return ValidationReport(
        violations=tuple(out),
        diameter=float(finite.max()) if n > 1 else 0.0,
        min_positive=min_positive,
    )


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _hypercube(k: int) -> FiniteMetricSpace:
    if not 1 <= k <= 12:
        raise ValueError(f"hypercube parameter must be in 1..12, got {k}")
    size = 1 << k
    ids = np.arange(size)
    popcount = np.array([bin(i).count("1") for i in range(size)])
    dist = popcount[np.bitwise_xor.outer(ids, ids)].astype(np.float64)
    labels = [format(i, f"0{k}b") for i in ids]
    points = ((ids[:, None] >> np.arange(k)[None, ::-1]) & 1).astype(np.float64)
    return FiniteMetricSpace(
        labels=tuple(labels),
        dist=dist,
        points=points,
        meta={"kind": "hypercube", "param": k},
    )


def _cycle(n: int) -> FiniteMetricSpace:
    if n < 3:
        raise ValueError(f"cycle needs at least 3 points, got {n}")
    if n > MAX_POINTS:
        raise ValueError(f"cycle parameter exceeds {MAX_POINTS}")
    r = np.arange(n)
    gap = np.abs(np.subtract.outer(r, r))
    dist = np.minimum(gap, n - gap).astype(np.float64)
    return FiniteMetricSpace(
        labels=tuple(str(i) for i in r),
        dist=dist,
        meta={"kind": "cycle", "param": n},
    )


def _path(n: int) -> FiniteMetricSpace:
    if n < 2:
        raise ValueError(f"path needs at least 2 points, got {n}")
    if n > MAX_POINTS:
        raise ValueError(f"path parameter exceeds {MAX_POINTS}")
    r = np.arange(n)
    dist = np.abs(np.subtract.outer(r, r)).astype(np.float64)
    return FiniteMetricSpace(
        labels=tuple(str(i) for i in r),
        dist=dist,
        meta={"kind": "path", "param": n},
    )


def _gaussian(n: int, seed: int, dim: int) -> FiniteMetricSpace:
    if n < 2:
        raise ValueError(f"gaussian cloud needs at least 2 points, got {n}")
    if n > MAX_POINTS:
        raise ValueError(f"gaussian parameter exceeds {MAX_POINTS}")
    if dim < 1:
        raise ValueError(f"ambient dimension must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    return FiniteMetricSpace(
        labels=tuple(f"g{i}" for i in range(n)),
        dist=dist,
        points=pts,
        meta={"kind": "gaussian", "param": n, "seed": int(seed), "dim": int(dim)},
    )


def generate(
    kind: str,
    param: int,
    seed: Optional[int] = None,
    dim: int = 8,
) -> FiniteMetricSpace:
    """Build one of the stock spaces.

    hypercube(k): {0,1}^k under Hamming distance (k <= 12).
    cycle(n) / path(n): shortest-path metric on the n-cycle / n-path.
    gaussian(n): n points sampled coordinate-wise from a standard normal in
    `dim` dimensions (default 8) with Euclidean distance; requires a seed and
    is deterministic per seed.
    """
    param = int(param)
    if kind == "hypercube":
        return _hypercube(param)
    if kind == "cycle":
        return _cycle(param)
    if kind == "path":
        return _path(param)
    if kind == "gaussian":
        if seed is None:
            raise ValueError("gaussian spaces require a seed")
        return _gaussian(param, int(seed), int(dim))
    raise ValueError(f"unknown space kind {kind!r}; expected one of {GENERATOR_KINDS}")


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------

def space_to_json(space: FiniteMetricSpace) -> dict:
    payload = {
        "labels": list(space.labels),
        "dist": space.dist.tolist(),
        "meta": dict(space.meta),
    }
    if space.points is not None:
        payload["meta"]["points"] = space.points.tolist()
    return payload


def space_from_json(payload: dict) -> FiniteMetricSpace:
    """Rebuild a space from its JSON form; metric axioms are revalidated."""
    try:
        labels = payload["labels"]
        dist = np.asarray(payload["dist"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed space payload: {exc}") from exc
    meta = dict(payload.get("meta", {}))
    points = meta.pop("points", None)
    space = FiniteMetricSpace(
        labels=tuple(labels),
        dist=dist,
        points=np.asarray(points, dtype=np.float64) if points is not None else None,
        meta=meta,
    )
    report = validate(space)
    if not report.ok:
        first = "; ".join(str(v) for v in report.violations[:3])
        raise ValueError(f"space fails metric validation ({len(report.violations)} violations): {first}")
    return space


def save_space(space: FiniteMetricSpace, path) -> None:
    Path(path).write_text(json.dumps(space_to_json(space)) + "\n", encoding="utf-8")


def load_space(path) -> FiniteMetricSpace:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    return space_from_json(payload)
