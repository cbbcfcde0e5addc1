"""Dense lp vector arithmetic with strict numeric contracts.

All norms go through a zero-guarded fractional power kernel and exact
compensated summation (math.fsum), so that unit-sphere membership, triangle
inequalities and scaling identities hold to 1e-12 even at dimension 10^4+.
Batch helpers (row_pnorms, pairwise_pnorm) trade the exact accumulator for
numpy's pairwise summation, which stays far below the tolerances used by any
caller of the batch paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "PExponent",
    "LpVector",
    "BlockVector",
    "as_exponent",
    "abs_power",
    "norm_p",
    "distance_p",
    "normalize",
    "direct_sum",
    "block_norm_p",
    "block_distance_p",
    "row_pnorms",
    "pairwise_pnorm",
    "pairwise_power_sums",
    "pairwise_pnorm_all",
    "pairwise_power_sums_all",
]

ExponentLike = Union["PExponent", float, int]


@dataclass(frozen=True)
class PExponent:
    """Norm exponent p with 1 <= p < inf enforced at construction."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v) or v < 1.0:
            raise ValueError(f"norm exponent must satisfy 1 <= p < inf, got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


def as_exponent(p: ExponentLike) -> PExponent:
    """Coerce a float/int into a validated PExponent (identity on PExponent)."""
    if isinstance(p, PExponent):
        return p
    return PExponent(float(p))


def _as_coeff_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"coefficients must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("coefficient sequence must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must all be finite (no NaN/inf)")
    return arr


@dataclass(frozen=True, eq=False)
class LpVector:
    """Finite real coefficient sequence; the concrete stand-in for a point of lp.

    The zero vector is representable; unit-sphere membership is checked by the
    operations that require it, not by the type.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_coeff_array(self.coeffs).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __len__(self) -> int:
        return self.coeffs.size

    def __sub__(self, other: "LpVector") -> "LpVector":
        if not isinstance(other, LpVector):
            return NotImplemented
        if len(self) != len(other):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")
        return LpVector(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "LpVector":
        return LpVector(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return bool(np.all(self.coeffs == 0.0))


@dataclass(frozen=True, eq=False)
class BlockVector:
    """Element of a p-direct sum: an ordered list of lp blocks.

    The p-norm of the whole is (sum_n ||block_n||_p^p)^(1/p); block boundaries
    are preserved so per-level contributions stay inspectable.
    """

    blocks: tuple

    def __post_init__(self) -> None:
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("a block vector needs at least one block")
        for b in blocks:
            if not isinstance(b, LpVector):
                raise TypeError(f"blocks must be LpVector, got {type(b).__name__}")
        object.__setattr__(self, "blocks", blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        if not isinstance(other, BlockVector):
            return NotImplemented
        if len(self) != len(other):
            raise ValueError(f"block count mismatch: {len(self)} vs {len(other)}")
        return BlockVector(tuple(a - b for a, b in zip(self.blocks, other.blocks)))


# ---------------------------------------------------------------------------
# power kernel
# ---------------------------------------------------------------------------

def abs_power(values: np.ndarray, p: float) -> np.ndarray:
    """Elementwise |v|**p with an explicit zero guard.

    Fractional exponents use exp(p*log|v|) on the nonzero entries only, so the
    behaviour of pow at 0 never enters. Integer and half-integer exponents take
    exact multiply/sqrt shortcuts.
    """
    a = np.abs(np.asarray(values, dtype=np.float64))
    if p == 1.0:
        return a
    if p == 2.0:
        return a * a
    if p == float(int(p)):
        return a ** int(p)
    if 2.0 * p == float(int(2.0 * p)):
        # p = k + 0.5: |v|^k * sqrt(|v|), exact up to rounding
        k = int(p - 0.5)
        return (a ** k) * np.sqrt(a) if k else np.sqrt(a)
    out = np.zeros_like(a)
    nz = a > 0.0
    out[nz] = np.exp(p * np.log(a[nz]))
    return out


# ---------------------------------------------------------------------------
# contract operations (exact accumulation)
# ---------------------------------------------------------------------------

def norm_p(x: LpVector, p: ExponentLike) -> float:
    """(sum_i |x_i|^p)^(1/p); zero exactly on the zero vector.

    The sum is taken over coefficients rescaled by max|x_i|, so the result
    neither underflows to zero on a nonzero input nor overflows on a finite
    one: the largest coordinate always contributes exactly 1.
    """
    pv = as_exponent(p).value
    scale = float(np.abs(x.coeffs).max())
    if scale == 0.0:
        return 0.0
    total = math.fsum(abs_power(x.coeffs / scale, pv).tolist())
    return scale * total ** (1.0 / pv)


def distance_p(x: LpVector, y: LpVector, p: ExponentLike) -> float:
    """p-norm of x - y; raises on length mismatch."""
    return norm_p(x - y, p)


def normalize(x: LpVector, p: ExponentLike) -> LpVector:
    """Project onto the unit sphere of lp; the zero vector has no direction."""
    n = norm_p(x, p)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return LpVector(x.coeffs / n)


def direct_sum(blocks: Sequence[LpVector], p: ExponentLike) -> BlockVector:
    """Assemble lp blocks into an element of the p-direct sum."""
    as_exponent(p)  # validate the exponent the sum is taken against
    return BlockVector(tuple(blocks))


def block_norm_p(x: BlockVector, p: ExponentLike) -> float:
    """p-norm of a block vector: (sum_n ||block_n||_p^p)^(1/p).

    Equals the p-norm of the concatenated coefficients; computed with the same
    rescaled exact accumulation as norm_p.
    """
    pv = as_exponent(p).value
    scale = max(float(np.abs(b.coeffs).max()) for b in x.blocks)
    if scale == 0.0:
        return 0.0
    terms: list = []
    for b in x.blocks:
        terms.extend(abs_power(b.coeffs / scale, pv).tolist())
    return scale * math.fsum(terms) ** (1.0 / pv)


def block_distance_p(x: BlockVector, y: BlockVector, p: ExponentLike) -> float:
    return block_norm_p(x - y, p)


# ---------------------------------------------------------------------------
# batch helpers (numpy pairwise summation)
# ---------------------------------------------------------------------------

def row_pnorms(rows: np.ndarray, p: ExponentLike) -> np.ndarray:
    """p-norm of every row of a 2-D array."""
    pv = as_exponent(p).value
    sums = abs_power(rows, pv).sum(axis=1)
    if pv == 1.0:
        return sums
    return sums ** (1.0 / pv)


def pairwise_power_sums(
    rows: np.ndarray,
    p: ExponentLike,
    idx_i: np.ndarray,
    idx_j: np.ndarray,
    chunk_elems: int = 1 << 23,
) -> np.ndarray:
    """sum_k |rows[i,k] - rows[j,k]|^p for each listed (i, j) pair, chunked."""
    pv = as_exponent(p).value
    idx_i = np.asarray(idx_i)
    idx_j = np.asarray(idx_j)
    n_pairs = idx_i.size
    out = np.empty(n_pairs, dtype=np.float64)
    step = max(1, chunk_elems // max(1, rows.shape[1]))
    for start in range(0, n_pairs, step):
        sl = slice(start, start + step)
        diff = rows[idx_i[sl]] - rows[idx_j[sl]]
        out[sl] = abs_power(diff, pv).sum(axis=1)
    return out


def pairwise_pnorm(
    rows: np.ndarray,
    p: ExponentLike,
    idx_i: np.ndarray,
    idx_j: np.ndarray,
) -> np.ndarray:
    """p-distance between the listed row pairs."""
    pv = as_exponent(p).value
    sums = pairwise_power_sums(rows, pv, idx_i, idx_j)
    if pv == 1.0:
        return sums
    return sums ** (1.0 / pv)


def _power_sums_inplace(buf: np.ndarray, p: float) -> np.ndarray:
    """Row sums of |buf|**p, overwriting buf; the workhorse of the all-pairs scan."""
    np.abs(buf, out=buf)
    if p == 1.0:
        return buf.sum(axis=1)
    if p == 2.0:
        np.multiply(buf, buf, out=buf)
        return buf.sum(axis=1)
    if p == float(int(p)):
        buf **= int(p)
        return buf.sum(axis=1)
    if 2.0 * p == float(int(2.0 * p)):
        k = int(p - 0.5)
        root = np.sqrt(buf)
        if k:
            buf **= k
            np.multiply(buf, root, out=buf)
            return buf.sum(axis=1)
        return root.sum(axis=1)
    nz = buf > 0.0
    np.log(buf, out=buf, where=nz)
    buf *= p
    np.exp(buf, out=buf, where=nz)
    buf[~nz] = 0.0
    return buf.sum(axis=1)


def pairwise_power_sums_all(rows: np.ndarray, p: ExponentLike) -> np.ndarray:
    """sum_k |rows[i,k] - rows[j,k]|^p over all pairs i < j, condensed order.

    The output matches np.triu_indices(n, 1): (0,1), (0,2), ..., (1,2), ...
    A row-at-a-time broadcast keeps this an order of magnitude faster than
    fancy-indexed gathers at desk scale.
    """
    pv = as_exponent(p).value
    n = rows.shape[0]
    out = np.empty(n * (n - 1) // 2, dtype=np.float64)
    buf = np.empty((max(n - 1, 1), rows.shape[1]), dtype=np.float64)
    pos = 0
    for i in range(n - 1):
        m = n - 1 - i
        b = buf[:m]
        np.subtract(rows[i + 1:], rows[i], out=b)
        out[pos:pos + m] = _power_sums_inplace(b, pv)
        pos += m
    return out


def pairwise_pnorm_all(rows: np.ndarray, p: ExponentLike) -> np.ndarray:
    """p-distance over all row pairs i < j, condensed order."""
    pv = as_exponent(p).value
    sums = pairwise_power_sums_all(rows, pv)
    if pv == 1.0:
        return sums
    return sums ** (1.0 / pv)
