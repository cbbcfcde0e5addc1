"""Assembly of the coarse embedding Phi(x) = (+)_n (phi_n(x) - phi_n(x0)).

Each calibrated level contributes one block, offset so the base point maps to
zero. On a finite space the level sum is truncated at level_count N; levels at
or beyond the diameter satisfy their closeness condition globally, so the
p-th-power mass a longer schedule could add to any pair is at most
tail_bound = 2^(-Np) / (2^p - 1).

The certified envelopes: for every pair,

    ||Phi(x) - Phi(y)||_p^p <= 2^p d(x,y)^p + 1          (rho2 side)
    ||Phi(x) - Phi(y)||_p^p >= m(d) (delta/2)^p           (rho1 side)

where m(d) counts non-saturated levels with S_n <= d. Both follow from the
measured per-level certificates, so a correctly built embedding verifies
cleanly at 1e-9.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .lp_core import (
    BlockVector,
    ExponentLike,
    LpVector,
    PExponent,
    abs_power,
    as_exponent,
    pairwise_power_sums_all,
)
from .kernel_sphere_maps import SphereMapFamily, build_level_family
from .metric_spaces import FiniteMetricSpace, validate

__all__ = [
    "MAX_LEVELS",
    "LevelSchedule",
    "CoarseEmbedding",
    "default_level_count",
    "build_embedding",
    "evaluate",
    "theoretical_bounds",
    "tail_bound",
    "pairwise_image_power_sums",
    "pairwise_image_distances",
    "embedding_to_json",
    "embedding_from_json",
    "save_embedding",
    "load_embedding",
]

MAX_LEVELS = 64


@dataclass(frozen=True)
class LevelSchedule:
    """Reporting view of one level: (n, epsilon_n, S_n, t_n, kernel)."""

    n: int
    epsilon: float
    s_n: float
    bandwidth_t: float
    kernel_kind: str


@dataclass(frozen=True, eq=False)
class CoarseEmbedding:
    """A finished embedding: per-point block images plus its level schedule.

    image_matrix rows are the per-point concatenations of the level blocks
    (block boundaries in block_dims); evaluate() rebuilds the BlockVector view.
    family is None for embeddings reloaded from JSON, which carry enough state
    for verification and reporting but not the raw level maps.
    """

    space: FiniteMetricSpace
    exponent: PExponent
    base_index: int
    delta: float
    schedule: tuple
    image_matrix: np.ndarray
    block_dims: tuple
    family: Optional[SphereMapFamily] = None

    def __post_init__(self) -> None:
        mat = np.asarray(self.image_matrix, dtype=np.float64)
        if mat.shape != (self.space.n, int(sum(self.block_dims))):
            raise ValueError(
                f"image matrix shape {mat.shape} inconsistent with "
                f"{self.space.n} points and block dims {self.block_dims}"
            )
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "image_matrix", mat)
        if not 0 <= self.base_index < self.space.n:
            raise ValueError(f"base index {self.base_index} out of range")

    @property
    def level_count(self) -> int:
        return len(self.schedule)

    def separation_thresholds(self) -> np.ndarray:
        """Sorted finite S_n over non-saturated levels."""
        finite = [s.s_n for s in self.schedule if math.isfinite(s.s_n)]
        return np.sort(np.asarray(finite, dtype=np.float64))

    def block_slices(self) -> list:
        out = []
        offset = 0
        for width in self.block_dims:
            out.append(slice(offset, offset + width))
            offset += width
        return out


def default_level_count(space: FiniteMetricSpace) -> int:
    """ceil(diameter) + 2, clamped to [1, MAX_LEVELS]."""
    return max(1, min(MAX_LEVELS, int(math.ceil(space.diameter())) + 2))


def default_kernel_kind(space: FiniteMetricSpace) -> str:
    """Gaussian kernels for Euclidean-sampled clouds, laplacian for graphs."""
    return "gaussian" if space.meta.get("kind") == "gaussian" else "laplacian"


def build_embedding(
    space: FiniteMetricSpace,
    p: ExponentLike,
    level_count: Optional[int] = None,
    delta: float = 1.0,
    base_index: int = 0,
    kernel_kind: Optional[str] = None,
) -> CoarseEmbedding:
    """Calibrate levels 1..N and assemble the block images."""
    report = validate(space)
    if not report.ok:
        first = "; ".join(str(v) for v in report.violations[:3])
        raise ValueError(f"space fails metric validation: {first}")
    pe = as_exponent(p)
    if kernel_kind is None:
        kernel_kind = default_kernel_kind(space)
    if level_count is None:
        level_count = default_level_count(space)
    level_count = int(level_count)
    if not 1 <= level_count <= MAX_LEVELS:
        raise ValueError(f"level count must be in 1..{MAX_LEVELS}, got {level_count}")
    base_index = int(base_index)
    if not 0 <= base_index < space.n:
        raise ValueError(f"base index {base_index} out of range for {space.n} points")

    family = build_level_family(space, level_count, pe, delta, kernel_kind)
    blocks = [lvl.images - lvl.images[base_index] for lvl in family.levels]
    schedule = tuple(
        LevelSchedule(
            n=lvl.level_n,
            epsilon=lvl.epsilon_n,
            s_n=lvl.s_n,
            bandwidth_t=lvl.bandwidth_t,
            kernel_kind=lvl.kernel_kind,
        )
        for lvl in family.levels
    )
    return CoarseEmbedding(
        space=space,
        exponent=pe,
        base_index=base_index,
        delta=float(delta),
        schedule=schedule,
        image_matrix=np.hstack(blocks),
        block_dims=tuple(b.shape[1] for b in blocks),
        family=family,
    )


def _point_index(embedding: CoarseEmbedding, point: Union[int, str]) -> int:
    if isinstance(point, (int, np.integer)):
        idx = int(point)
        if not 0 <= idx < embedding.space.n:
            raise KeyError(f"point index {idx} out of range")
        return idx
    return embedding.space.index_of(point)


def evaluate(embedding: CoarseEmbedding, point: Union[int, str]) -> BlockVector:
    """The stored image of a point, as a block vector (deterministic lookup)."""
    idx = _point_index(embedding, point)
    row = embedding.image_matrix[idx]
    return BlockVector(tuple(LpVector(row[sl]) for sl in embedding.block_slices()))


def theoretical_bounds(embedding: CoarseEmbedding, d) -> tuple:
    """(rho1, rho2) envelope values at source distance d (scalar or array).

    rho2(d) = (2^p d^p + 1)^(1/p). rho1(d) = (delta/2) m^(1/p) with m the
    number of non-saturated levels whose threshold S_n is <= d; a distance
    exactly equal to some S_n counts that level.
    """
    p = embedding.exponent.value
    arr = np.asarray(d, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("distances must be nonnegative")
    thresholds = embedding.separation_thresholds()
    m = np.searchsorted(thresholds, arr, side="right").astype(np.float64)
    rho1 = (embedding.delta / 2.0) * m ** (1.0 / p)
    rho2 = (2.0 ** p * abs_power(arr, p) + 1.0) ** (1.0 / p)
    if arr.ndim == 0:
        return float(rho1), float(rho2)
    return rho1, rho2


def tail_bound(embedding: CoarseEmbedding) -> float:
    """p-th-power mass an untruncated schedule could add beyond level N.

    sum_{n > N} 2^(-np) = 2^(-Np) / (2^p - 1); bounds the change of any
    certified pairwise distance^p under schedule refinement, for pairs within
    distance N.
    """
    p = embedding.exponent.value
    n_levels = embedding.level_count
    return 2.0 ** (-n_levels * p) / (2.0 ** p - 1.0)


def pairwise_image_power_sums(embedding: CoarseEmbedding) -> tuple:
    """(i_idx, j_idx, source_distance, image_distance^p) over all point pairs."""
    ii, jj = embedding.space.pair_indices()
    d = embedding.space.dist[ii, jj]
    psums = pairwise_power_sums_all(embedding.image_matrix, embedding.exponent)
    return ii, jj, d, psums


def pairwise_image_distances(embedding: CoarseEmbedding) -> tuple:
    """(i_idx, j_idx, source_distance, image_distance) over all point pairs."""
    ii, jj, d, psums = pairwise_image_power_sums(embedding)
    return ii, jj, d, psums ** (1.0 / embedding.exponent.value)


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------

def embedding_to_json(embedding: CoarseEmbedding) -> dict:
    slices = embedding.block_slices()
    images = {
        label: [embedding.image_matrix[i, sl].tolist() for sl in slices]
        for i, label in enumerate(embedding.space.labels)
    }
    return {
        "p": embedding.exponent.value,
        "base": embedding.base_index,
        "delta": embedding.delta,
        "schedule": [
            {
                "n": s.n,
                "eps": s.epsilon,
                "S": s.s_n if math.isfinite(s.s_n) else None,
                "t": s.bandwidth_t,
                "kernel": s.kernel_kind,
            }
            for s in embedding.schedule
        ],
        "images": images,
    }


def embedding_from_json(payload: dict, space: FiniteMetricSpace) -> CoarseEmbedding:
    """Reattach a serialized embedding to its space (family is not recoverable)."""
    try:
        pe = as_exponent(float(payload["p"]))
        base = int(payload["base"])
        delta = float(payload["delta"])
        schedule = tuple(
            LevelSchedule(
                n=int(s["n"]),
                epsilon=float(s["eps"]),
                s_n=float(s["S"]) if s["S"] is not None else math.inf,
                bandwidth_t=float(s["t"]),
                kernel_kind=str(s["kernel"]),
            )
            for s in payload["schedule"]
        )
        images = payload["images"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed embedding payload: {exc}") from exc
    missing = [l for l in space.labels if l not in images]
    if missing:
        raise ValueError(f"embedding payload missing images for {len(missing)} points, e.g. {missing[0]!r}")
    if not schedule:
        raise ValueError("embedding payload has an empty schedule")
    rows = []
    block_dims = None
    for label in space.labels:
        blocks = images[label]
        dims = tuple(len(b) for b in blocks)
        if block_dims is None:
            block_dims = dims
        elif dims != block_dims:
            raise ValueError(f"inconsistent block shapes at point {label!r}")
        rows.append(np.concatenate([np.asarray(b, dtype=np.float64) for b in blocks]))
    if len(block_dims) != len(schedule):
        raise ValueError(
            f"{len(block_dims)} image blocks per point but {len(schedule)} schedule levels"
        )
    return CoarseEmbedding(
        space=space,
        exponent=pe,
        base_index=base,
        delta=delta,
        schedule=schedule,
        image_matrix=np.vstack(rows),
        block_dims=block_dims,
        family=None,
    )


def save_embedding(embedding: CoarseEmbedding, path) -> None:
    Path(path).write_text(json.dumps(embedding_to_json(embedding)) + "\n", encoding="utf-8")


def load_embedding(path, space: FiniteMetricSpace) -> CoarseEmbedding:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    return embedding_from_json(payload, space)
