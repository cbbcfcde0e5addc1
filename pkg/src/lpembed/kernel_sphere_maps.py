"""Unit-sphere maps from positive-semidefinite kernels, calibrated per level.

A kernel K(x,y) = exp(-t d(x,y)) (laplacian) or exp(-t d(x,y)^2) (gaussian) on
a finite metric space factors as K = U diag(w) U^T, giving unit vectors
v_x = row_x(U sqrt(w)) with <v_x, v_y> = K(x,y), hence

    ||v_x - v_y||_2 = sqrt(2 (1 - K(x,y))).

Level n wants a sphere map into l_p whose image distances are at most 2^-n on
pairs with d <= n, while staying at least delta/2 apart beyond some threshold
S_n. `calibrate_level` finds the largest bandwidth t meeting the closeness
target (measured exactly after Mazur transport of the l_2 factors to l_p) and
then scans the sorted distinct distances of the space for the smallest valid
S_n. Levels whose separation target is out of reach on the bounded space are
marked saturated (S_n = inf); they still contribute blocks downstream, just no
certified separation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lp_core import (
    ExponentLike,
    PExponent,
    as_exponent,
    pairwise_pnorm_all,
    row_pnorms,
)
from .mazur import mazur_bounds, mazur_map_rows
from .metric_spaces import FiniteMetricSpace

__all__ = [
    "KERNEL_KINDS",
    "NotNegativeType",
    "CalibrationError",
    "SphereMapLevel",
    "SphereMapFamily",
    "kernel_matrix",
    "build_sphere_map",
    "measure_conditions",
    "calibrate_level",
    "build_level_family",
    "verify_family",
]

KERNEL_KINDS = ("gaussian", "laplacian")

# relative eigenvalue floor separating genuine non-PSD kernels from roundoff
EIG_REL_TOL = 1e-8

# bandwidth cap; exp(-t d) underflows to an identity-like kernel long before
T_CAP = 1e8

UNIT_TOL = 1e-9


class NotNegativeType(Exception):
    """The kernel matrix is not positive semidefinite beyond roundoff."""


class CalibrationError(Exception):
    """A level's closeness/separation targets cannot be met."""


def _check_kernel_kind(kernel_kind: str) -> str:
    if kernel_kind not in KERNEL_KINDS:
        raise ValueError(f"kernel_kind must be one of {KERNEL_KINDS}, got {kernel_kind!r}")
    return kernel_kind


def kernel_matrix(space: FiniteMetricSpace, t: float, kernel_kind: str) -> np.ndarray:
    _check_kernel_kind(kernel_kind)
    if not (t > 0) or not math.isfinite(t):
        raise ValueError(f"bandwidth t must be positive and finite, got {t!r}")
    if kernel_kind == "gaussian":
        return np.exp(-t * space.dist * space.dist)
    return np.exp(-t * space.dist)


def build_sphere_map(space: FiniteMetricSpace, t: float, kernel_kind: str) -> np.ndarray:
    """Factor the kernel into per-point unit vectors of l_2^{|X|}.

    Returns an (n, n) array whose rows are the images. Eigenvalues in
    [-EIG_REL_TOL * lambda_max, 0) are clipped to zero; anything more negative
    raises NotNegativeType. Rows are renormalized to exact unit length after
    clipping, so the Gram matrix is reproduced entrywise to 1e-8.
    """
    K = kernel_matrix(space, t, kernel_kind)
    w, U = np.linalg.eigh(K)
    lam_max = float(w[-1])
    floor = -EIG_REL_TOL * lam_max
    lam_min = float(w[0])
    if lam_min < floor:
        raise NotNegativeType(
            f"{kernel_kind} kernel at t={t:g} is not of negative type on this space: "
            f"eigenvalue {lam_min:.6e} < {floor:.3e}"
        )
    V = U * np.sqrt(np.clip(w, 0.0, None))
    V /= row_pnorms(V, 2.0)[:, None]
    return V


def measure_conditions(
    images: np.ndarray,
    space: FiniteMetricSpace,
    R: float,
    S: float,
    p: ExponentLike,
) -> tuple:
    """Exact (sup over pairs with d <= R, inf over pairs with d >= S).

    Conventions: sup over an empty pair set is 0, inf over an empty set is
    +inf. The diagonal contributes nothing either way.
    """
    pe = as_exponent(p)
    if space.n < 2:
        return 0.0, math.inf
    ii, jj = space.pair_indices()
    d = space.dist[ii, jj]
    close = d <= R
    far = d >= S
    sup_close = 0.0
    inf_far = math.inf
    if close.any() or far.any():
        pair_d = pairwise_pnorm_all(images, pe)
        if close.any():
            sup_close = float(pair_d[close].max())
        if far.any():
            inf_far = float(pair_d[far].min())
    return sup_close, inf_far


@dataclass(frozen=True, eq=False)
class SphereMapLevel:
    """One calibrated map into S(l_p) with its certified parameters.

    epsilon_n certifies sup{||phi(x)-phi(y)||_p : d(x,y) <= level_n} and
    delta_half certifies inf{...: d(x,y) >= s_n} (vacuous when saturated,
    s_n = inf). The *_bound fields carry envelope-derived certificates when the
    level was produced by Mazur transport; measured values live in the primary
    fields either way.
    """

    level_n: int
    exponent: PExponent
    images: np.ndarray
    epsilon_n: float
    s_n: float
    delta_half: float
    bandwidth_t: float
    kernel_kind: str
    epsilon_bound: Optional[float] = None
    delta_half_bound: Optional[float] = None

    @property
    def saturated(self) -> bool:
        return math.isinf(self.s_n)


@dataclass(frozen=True, eq=False)
class SphereMapFamily:
    """The level sequence phi_1, phi_2, ... over one space at one exponent."""

    levels: tuple
    exponent: PExponent
    delta: float
    space: FiniteMetricSpace


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

def _distance_ceiling(p: PExponent) -> float:
    """Guaranteed-reachable separation at l_p for kernel images.

    l_2 factor distances approach sqrt(2) as the kernel decays; transporting
    through the Mazur lower envelope rescales that ceiling.
    """
    if p.value == 2.0:
        return math.sqrt(2.0)
    return float(mazur_bounds(2.0, p).lower(math.sqrt(2.0)))


def _transported_images(space: FiniteMetricSpace, t: float, kernel_kind: str, p: PExponent) -> np.ndarray:
    V = build_sphere_map(space, t, kernel_kind)
    if p.value == 2.0:
        return V
    return mazur_map_rows(V, 2.0, p)


def _feasible_start(
    eps: float, p: PExponent, d_max_close: float, kernel_kind: str
) -> float:
    """Bandwidth guaranteed to meet the closeness target via the envelopes.

    At l_2 the largest close-pair image distance is s(t) = sqrt(2(1 - K(t, d)))
    at the largest close source distance d (the kernel is monotone). Pushing s
    through the Mazur upper envelope and solving for t gives a start point that
    cannot overshoot; the search then only has to grow t.
    """
    if p.value == 2.0:
        s_target = eps
    elif p.value > 2.0:
        b = mazur_bounds(2.0, p)
        s_target = (eps / b.constant_c) ** (p.value / 2.0)
    else:
        s_target = p.value * eps / 2.0
    if s_target * s_target >= 2.0:
        return T_CAP
    g = d_max_close * d_max_close if kernel_kind == "gaussian" else d_max_close
    return min(T_CAP, -math.log1p(-s_target * s_target / 2.0) / g)


def calibrate_level(
    space: FiniteMetricSpace,
    n: int,
    p_target: ExponentLike,
    delta: float,
    kernel_kind: str,
    *,
    t_hint: Optional[float] = None,
    s_floor: float = 0.0,
) -> SphereMapLevel:
    """Calibrate level n: largest bandwidth meeting sup_{d<=n} <= 2^-n, then S_n.

    The closeness certificate is the exactly measured post-transport sup, not
    the envelope bound; t_hint (a known upper bracket, e.g. the previous
    level's bandwidth) and s_floor (exclusive lower bound on S_n, for strictly
    increasing schedules) are search accelerators for family construction.
    """
    p = as_exponent(p_target)
    _check_kernel_kind(kernel_kind)
    if n < 1:
        raise ValueError(f"level index must be >= 1, got {n}")
    if not (delta > 0):
        raise ValueError(f"delta must be positive, got {delta!r}")
    ceiling = _distance_ceiling(p)
    if delta / 2.0 > ceiling:
        raise CalibrationError(
            f"separation target delta/2 = {delta / 2.0:g} exceeds the reachable "
            f"ceiling {ceiling:g} at p = {p.value:g}"
        )

    eps = 2.0 ** (-n)
    ii, jj = space.pair_indices()
    d_pairs = space.dist[ii, jj]
    close = d_pairs <= n

    def evaluate(t: float) -> tuple:
        images = _transported_images(space, t, kernel_kind, p)
        pair_d = pairwise_pnorm_all(images, p) if d_pairs.size else np.empty(0)
        sup = float(pair_d[close].max()) if close.any() else 0.0
        return sup, images, pair_d

    t_cap = min(t_hint, T_CAP) if t_hint is not None else T_CAP

    if not close.any():
        # no closeness constraint at this radius: max out the separation
        t_best = t_cap
        sup_best, images, all_img = evaluate(t_best)
    else:
        t_best = min(_feasible_start(eps, p, float(d_pairs[close].max()), kernel_kind), t_cap)
        sup_best, images, all_img = evaluate(t_best)
        shrinks = 0
        while sup_best > eps:
            # the envelope start is feasible in exact arithmetic; retreat covers
            # the pathological remainder
            t_best /= 2.0
            shrinks += 1
            if shrinks > 200:
                raise CalibrationError(
                    f"cannot meet the 2^-{n} closeness target at any bandwidth "
                    f"(space min distance {float(d_pairs.min()):g})"
                )
            sup_best, images, all_img = evaluate(t_best)

        # grow toward the largest feasible bandwidth, then sharpen by log-log
        # interpolation on sup(t); every accepted t is exactly verified
        t_bad = None
        sup_bad = None
        while t_bad is None and t_best < t_cap:
            t_try = min(t_best * 8.0, t_cap)
            sup_try, img_try, pd_try = evaluate(t_try)
            if sup_try <= eps:
                t_best, sup_best, images, all_img = t_try, sup_try, img_try, pd_try
            else:
                t_bad, sup_bad = t_try, sup_try
        if t_bad is not None:
            for _ in range(12):
                if sup_best >= 0.9 * eps or t_bad / t_best <= 1.01:
                    break
                if sup_best > 0.0:
                    frac = (math.log(0.999 * eps) - math.log(sup_best)) / (
                        math.log(sup_bad) - math.log(sup_best)
                    )
                    t_try = t_best * (t_bad / t_best) ** min(max(frac, 0.05), 0.95)
                else:
                    t_try = math.sqrt(t_best * t_bad)
                sup_try, img_try, pd_try = evaluate(t_try)
                if sup_try <= eps:
                    t_best, sup_best, images, all_img = t_try, sup_try, img_try, pd_try
                else:
                    t_bad, sup_bad = t_try, sup_try

    # separation threshold: smallest distinct distance beyond which every pair
    # stays delta/2 apart (the suffix infimum is monotone in the threshold)
    s_n = math.inf
    if ii.size:
        order = np.argsort(d_pairs, kind="stable")
        d_sorted = d_pairs[order]
        suffix_inf = np.minimum.accumulate(all_img[order][::-1])[::-1]
        starts = np.nonzero(np.r_[True, d_sorted[1:] != d_sorted[:-1]])[0]
        for idx in starts:
            if d_sorted[idx] <= s_floor:
                continue
            if suffix_inf[idx] >= delta / 2.0:
                s_n = float(d_sorted[idx])
                break

    return SphereMapLevel(
        level_n=n,
        exponent=p,
        images=images,
        epsilon_n=sup_best,
        s_n=s_n,
        delta_half=delta / 2.0,
        bandwidth_t=t_best,
        kernel_kind=kernel_kind,
    )


def build_level_family(
    space: FiniteMetricSpace,
    level_count: int,
    p_target: ExponentLike,
    delta: float,
    kernel_kind: str,
) -> SphereMapFamily:
    """Calibrate levels 1..level_count with strictly increasing S_n.

    Later levels have tighter closeness targets over larger radii, so each
    level's bandwidth brackets the next one's search; saturated levels keep
    their blocks but add no separation threshold.
    """
    p = as_exponent(p_target)
    levels = []
    t_hint: Optional[float] = None
    s_floor = 0.0
    for n in range(1, level_count + 1):
        level = calibrate_level(
            space, n, p, delta, kernel_kind, t_hint=t_hint, s_floor=s_floor
        )
        levels.append(level)
        t_hint = level.bandwidth_t
        if not level.saturated:
            s_floor = level.s_n
    return SphereMapFamily(levels=tuple(levels), exponent=p, delta=delta, space=space)


def verify_family(family: SphereMapFamily, *, require_dyadic: bool = True) -> list:
    """Re-measure every certificate; returns human-readable violations.

    require_dyadic additionally checks epsilon_n <= 2^-n, the contract of
    directly calibrated families (transported families recertify at their
    envelope-derived constants instead).
    """
    problems: list = []
    prev_s = 0.0
    for level in family.levels:
        norms = row_pnorms(level.images, level.exponent)
        worst = float(np.abs(norms - 1.0).max())
        if worst > UNIT_TOL:
            problems.append(f"level {level.level_n}: image off unit sphere by {worst:.3e}")
        sup_close, inf_far = measure_conditions(
            level.images, family.space, level.level_n, level.s_n, level.exponent
        )
        if sup_close > level.epsilon_n:
            problems.append(
                f"level {level.level_n}: measured sup {sup_close!r} exceeds certificate {level.epsilon_n!r}"
            )
        if inf_far < level.delta_half:
            problems.append(
                f"level {level.level_n}: measured inf {inf_far!r} below certificate {level.delta_half!r}"
            )
        if require_dyadic and level.epsilon_n > 2.0 ** (-level.level_n):
            problems.append(
                f"level {level.level_n}: epsilon {level.epsilon_n!r} above 2^-{level.level_n}"
            )
        if not level.saturated:
            if level.s_n <= prev_s:
                problems.append(
                    f"level {level.level_n}: S_n {level.s_n!r} not above previous {prev_s!r}"
                )
            prev_s = level.s_n
        if family.space.n > 1:
            max_pair = float(pairwise_pnorm_all(level.images, level.exponent).max())
            if max_pair > 2.0 + 1e-9:
                problems.append(f"level {level.level_n}: image distance {max_pair!r} above 2")
    return problems
