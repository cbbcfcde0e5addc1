"""The Mazur map between unit spheres of lp spaces, with its distance envelopes.

M maps S(lp) -> S(lq) by raising each coordinate to the power p/q while keeping
its sign. It is a uniform homeomorphism with two-sided estimates: for p < q and
unit vectors x, y

    (p/q) * ||x - y||_p  <=  ||M(x) - M(y)||_q  <=  C * ||x - y||_p^(p/q)

with C = 2^(1 - p/q), and the mirrored estimates for p > q (M_{p,q} is the
inverse of M_{q,p}). The concrete C comes from the sign-split pointwise bound
|a^t - b^t| <= 2^(1-t) |a - b|^t for t in (0, 1]; `sample_ratio_extremes` is
the brute-force oracle that validates it empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .lp_core import (
    ExponentLike,
    LpVector,
    abs_power,
    as_exponent,
    norm_p,
    pairwise_pnorm,
    row_pnorms,
)

__all__ = [
    "SPHERE_TOL",
    "signed_power",
    "mazur_map",
    "mazur_map_rows",
    "MazurBounds",
    "mazur_bounds",
    "transport_conditions",
    "RatioSample",
    "sample_ratio_extremes",
]

# inputs further than this from the unit sphere are rejected; closer ones are
# renormalized so upstream factorization error does not cascade into failures
SPHERE_TOL = 1e-9


def signed_power(values: np.ndarray, theta: float) -> np.ndarray:
    """Elementwise |v|**theta * sign(v), the coordinate map of M."""
    return abs_power(values, theta) * np.sign(values)


def mazur_map(x: LpVector, p: ExponentLike, q: ExponentLike) -> LpVector:
    """Map a unit vector of lp onto the unit sphere of lq.

    Requires ||x||_p = 1 within SPHERE_TOL; the input is renormalized before
    the coordinate powers are applied, so the image lands on S(lq) to 1e-12.
    """
    pe, qe = as_exponent(p), as_exponent(q)
    n = norm_p(x, pe)
    if abs(n - 1.0) > SPHERE_TOL:
        raise ValueError(f"input is off the unit sphere of l_{pe.value:g}: ||x||_p = {n!r}")
    coeffs = x.coeffs / n
    if pe.value == qe.value:
        return LpVector(coeffs)
    return LpVector(signed_power(coeffs, pe.value / qe.value))


def mazur_map_rows(rows: np.ndarray, p: ExponentLike, q: ExponentLike) -> np.ndarray:
    """Vectorized mazur_map over the rows of a matrix of unit p-vectors."""
    pe, qe = as_exponent(p), as_exponent(q)
    norms = row_pnorms(rows, pe)
    if np.any(np.abs(norms - 1.0) > SPHERE_TOL):
        worst = float(np.abs(norms - 1.0).max())
        raise ValueError(f"rows are off the unit sphere of l_{pe.value:g} by up to {worst:.3e}")
    unit = rows / norms[:, None]
    if pe.value == qe.value:
        return unit
    return signed_power(unit, pe.value / qe.value)


@dataclass(frozen=True)
class MazurBounds:
    """Two-sided distance envelope of M_{p,q} on unit-sphere pairs.

    lower(d) <= ||M(x) - M(y)||_q <= upper(d) whenever ||x - y||_p = d, for
    all d in [0, 2]. For p = q both collapse to the identity.
    """

    p: float
    q: float
    constant_c: float

    def lower(self, d):
        d = np.asarray(d, dtype=np.float64)
        if self.p == self.q:
            out = d
        elif self.p < self.q:
            out = (self.p / self.q) * d
        else:
            out = (d / self.constant_c) ** (self.p / self.q)
        return out if out.ndim else float(out)

    def upper(self, d):
        d = np.asarray(d, dtype=np.float64)
        if self.p == self.q:
            out = d
        elif self.p < self.q:
            out = self.constant_c * d ** (self.p / self.q)
        else:
            out = (self.p / self.q) * d
        return out if out.ndim else float(out)


def mazur_bounds(p: ExponentLike, q: ExponentLike) -> MazurBounds:
    """Envelope pair for M_{p,q} with C = 2^(1 - min(p,q)/max(p,q))."""
    pv, qv = as_exponent(p).value, as_exponent(q).value
    if pv == qv:
        return MazurBounds(p=pv, q=qv, constant_c=1.0)
    ratio = min(pv, qv) / max(pv, qv)
    return MazurBounds(p=pv, q=qv, constant_c=2.0 ** (1.0 - ratio))


def transport_conditions(family, q: ExponentLike):
    """Carry a certified sphere-map family from its exponent p to exponent q.

    Every level map is composed with M_{p,q}. Each transported level stores
    the envelope-derived certificates (epsilon via upper(), separation via
    lower()) in the *_bound fields and the exactly re-measured sup/inf on the
    finite space in the primary fields; downstream construction consumes the
    measured ones.
    """
    from .kernel_sphere_maps import (  # deferred: kernel_sphere_maps imports us
        SphereMapFamily,
        SphereMapLevel,
        measure_conditions,
    )

    qe = as_exponent(q)
    pe = family.exponent
    if qe.value == pe.value:
        return family
    bounds = mazur_bounds(pe, qe)
    new_levels = []
    for level in family.levels:
        images = mazur_map_rows(level.images, pe, qe)
        sup_close, inf_far = measure_conditions(images, family.space, level.level_n, level.s_n, qe)
        new_levels.append(
            SphereMapLevel(
                level_n=level.level_n,
                exponent=qe,
                images=images,
                epsilon_n=sup_close,
                s_n=level.s_n,
                delta_half=inf_far if math.isfinite(level.s_n) else bounds.lower(level.delta_half),
                bandwidth_t=level.bandwidth_t,
                kernel_kind=level.kernel_kind,
                epsilon_bound=bounds.upper(level.epsilon_n),
                delta_half_bound=bounds.lower(level.delta_half),
            )
        )
    return SphereMapFamily(
        levels=tuple(new_levels),
        exponent=qe,
        delta=2.0 * bounds.lower(family.delta / 2.0),
        space=family.space,
    )


# ---------------------------------------------------------------------------
# sampling oracle for the envelope constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioSample:
    """Worst-case envelope margins over a random sample of unit-vector pairs.

    max_lower_excess / max_upper_excess are how far any pair stepped outside
    [lower(d), upper(d)] (negative values mean the inequality held with room).
    max_constant_ratio is the empirical version of the constant C: the largest
    ||M(x)-M(y)||_q / ||x-y||_p^(p/q) for p < q (roles swapped for p > q).
    """

    p: float
    q: float
    dim: int
    pairs: int
    seed: int
    max_lower_excess: float
    max_upper_excess: float
    max_constant_ratio: float
    constant_c: float


def sample_ratio_extremes(
    p: ExponentLike,
    q: ExponentLike,
    dim: int,
    pairs: int,
    seed: int,
    batch: int = 1 << 14,
) -> RatioSample:
    """Maximize the Mazur envelope ratios over seeded random sphere pairs."""
    pe, qe = as_exponent(p), as_exponent(q)
    if dim < 1 or pairs < 1:
        raise ValueError("dim and pairs must be positive")
    bounds = mazur_bounds(pe, qe)
    rng = np.random.default_rng(seed)
    lower_excess = -math.inf
    upper_excess = -math.inf
    const_ratio = 0.0
    done = 0
    while done < pairs:
        m = min(batch, pairs - done)
        raw = rng.standard_normal((2 * m, dim))
        raw /= row_pnorms(raw, pe)[:, None]
        first, second = np.arange(0, 2 * m, 2), np.arange(1, 2 * m, 2)
        d_src = pairwise_pnorm(raw, pe, first, second)
        mapped = mazur_map_rows(raw, pe, qe)
        d_img = pairwise_pnorm(mapped, qe, first, second)
        nz = d_src > 0
        d_src, d_img = d_src[nz], d_img[nz]
        lower_excess = max(lower_excess, float((bounds.lower(d_src) - d_img).max()))
        upper_excess = max(upper_excess, float((d_img - bounds.upper(d_src)).max()))
        if pe.value < qe.value:
            const_ratio = max(const_ratio, float((d_img / d_src ** (pe.value / qe.value)).max()))
        elif pe.value > qe.value:
            const_ratio = max(const_ratio, float((d_src / d_img ** (qe.value / pe.value)).max()))
        else:
            const_ratio = max(const_ratio, float((d_img / d_src).max()))
        done += m
    return RatioSample(
        p=pe.value,
        q=qe.value,
        dim=dim,
        pairs=pairs,
        seed=seed,
        max_lower_excess=lower_excess,
        max_upper_excess=upper_excess,
        max_constant_ratio=const_ratio,
        constant_c=bounds.constant_c,
    )
