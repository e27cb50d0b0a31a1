"""Explicit single-unit parameter choices that realize prescribed coefficients.

Three constructions are provided:

* star tuples: one unit jointly sets ``K_{B+j}`` for every leaf ``j`` of a
  root ``B``, leaving ``K_B ~ omega/2`` and every other coefficient ~ 0;
* leading coefficient: the single-leaf special case of a star tuple;
* edge pairs ``(B, B minus m)``: one unit sets both coefficients inside the
  attainable region (everything when ``|B| >= 4``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import InputError, PrecisionError, RegionError
from .softplus import (
    SoftplusUnit, batch_coefficients, edge_base_coefficient, edge_pair_feasible,
    softplus_inverse)
from .subsetpoly import VarSet, check_v, fmt_set, members, size

OMEGA_MIN = 40.0


@dataclass(frozen=True)
class StarTupleSpec:
    root: VarSet
    leaves: VarSet
    targets: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        root, leaves = int(self.root), int(self.leaves)
        if root & leaves:
            raise InputError(
                f"root {fmt_set(root)} and leaves {fmt_set(leaves)} intersect")
        targets = {int(j): float(t) for j, t in self.targets.items()}
        if set(targets) != set(members(leaves)):
            raise InputError("targets must be keyed exactly by the leaf indices")
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "leaves", leaves)
        object.__setattr__(self, "targets", targets)


@dataclass(frozen=True)
class EdgePairSpec:
    B: VarSet
    Bp: VarSet
    J_B: float
    J_Bp: float

    def __post_init__(self):
        B, Bp = int(self.B), int(self.Bp)
        if Bp & ~B or size(B) - size(Bp) != 1:
            raise InputError(
                f"({fmt_set(B)}, {fmt_set(Bp)}) is not an edge pair")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Bp", Bp)

    @property
    def m(self) -> int:
        return members(self.B & ~self.Bp)[0]


def star_omega_floor(targets) -> float:
    """Smallest omega accepted for a star tuple with these leaf targets.

    Keeps every inactive state at least 10 below zero and every active state
    at least 10 above zero before the soft-plus is applied.
    """
    total = math.fsum(abs(t) for t in targets)
    return max(OMEGA_MIN, 2.0 * total + 20.0)


def _check_range(mask: VarSet, v: int) -> None:
    if mask >> v:
        raise InputError(f"set {fmt_set(mask)} has an index >= v={v}")


def synthesize_star_tuple(spec: StarTupleSpec, omega: float, v: int) -> SoftplusUnit:
    """Unit with ``w = omega`` on the root, ``w_j = J_{B+j}`` on the leaves and
    ``c = -(|root| - 1/2) omega``.

    The unit has ``K_{root+j} ~ J_{root+j}`` for every leaf, ``K_root ~ omega/2``
    and all other coefficients ~ 0.
    """
    v = check_v(v)
    _check_range(spec.root | spec.leaves, v)
    floor = star_omega_floor(spec.targets.values())
    if not omega >= floor:
        raise PrecisionError(
            f"omega={omega:g} below the floor {floor:g} for leaf targets "
            f"summing to {floor / 2 - 10:g} in absolute value")
    w = np.zeros(v)
    for i in members(spec.root):
        w[i] = omega
    for j, t in spec.targets.items():
        w[j] = t
    c = -(size(spec.root) - 0.5) * omega
    return SoftplusUnit(v, w, c)


def synthesize_leading(B: VarSet, J_B: float, omega: float, v: int) -> SoftplusUnit:
    """Unit with ``K_B ~ J_B`` and nothing above ``B``.

    Realized as a single-leaf star with pivot ``m = max(B)``; the unavoidable
    lower-degree term is ``K_{B minus m} ~ omega/2``.
    """
    B = int(B)
    if B == 0:
        raise InputError("the leading coefficient of the empty set is a constant; "
                         "it is absorbed by normalization")
    m = members(B)[-1]
    spec = StarTupleSpec(B & ~(1 << m), 1 << m, {m: J_B})
    return synthesize_star_tuple(spec, omega, v)


def _adjacent_pair(v, Bp_members, low, m, s_low, s_high, omega):
    """Affine map sending state ``low`` to ``f^-1(s_low)``, ``low + m`` to
    ``f^-1(s_high)`` and every other state of ``B`` below ``-omega``."""
    a_low = softplus_inverse(s_low, floor=-omega)
    a_high = softplus_inverse(s_high, floor=-omega)
    big = omega + max(a_low, a_high, 0.0)
    w = np.zeros(v)
    for i in Bp_members:
        w[i] = big if i in low else -big
    w[m] = a_high - a_low
    c = a_low - big * len(low)
    return SoftplusUnit(v, w, c)


def _lift(unit: SoftplusUnit, p: int, omega: float) -> SoftplusUnit:
    """Gate ``unit`` by ``x_p``: coefficients ``K_C`` move to ``K_{C+p}``."""
    lam = max(float(np.max(unit.preactivation())), 0.0) + omega
    w = unit.w.copy()
    w[p] = lam
    return SoftplusUnit(unit.v, w, unit.c - lam)


def _omega_unit(v, Bp_members, m, J_B, J_Bp, omega):
    # |B'| = 3 with J_B' >= 0: w_{B'} = omega, 3 omega + c = f^-1(J_B'),
    # then scan w_m for the value of K_B
    a0 = softplus_inverse(J_Bp, floor=-omega)
    c = a0 - 3.0 * omega
    wb = np.full(3, omega)
    r = J_B + edge_base_coefficient(wb, c)
    span = omega + abs(a0) + 50.0
    grid = np.linspace(-span, 3.0 * omega + span, 8001)

    def g(u):
        W = np.tile(wb, (np.size(u), 1))
        return batch_coefficients(W, c + np.atleast_1d(u))[:, -1]

    vals = g(grid) - r
    hits = np.flatnonzero(vals == 0.0)
    if hits.size:
        wm = float(grid[hits[0]])
    else:
        flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        if flips.size == 0:
            raise PrecisionError(
                f"cannot bracket w_m for K_B={J_B:g} within omega={omega:g}; "
                f"increase omega above {2.0 * (abs(J_B) + abs(J_Bp)) + 40.0:g}")
        k = flips[0]
        wm = brentq(lambda u: float(g(u)[0] - r), grid[k], grid[k + 1],
                    xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    w = np.zeros(v)
    for i in Bp_members:
        w[i] = omega
    w[m] = wm
    return SoftplusUnit(v, w, c)


def synthesize_edge_pair(spec: EdgePairSpec, omega: float, v: int) -> SoftplusUnit:
    """Unit whose coefficients at ``B`` and ``B'`` approximate the targets.

    Cases by ``n = |B'|``:

    * ``n = 0``: solve ``f(c) = J_B'`` and ``f(w_m + c) = J_B + J_B'``;
    * ``n = 1``: put two adjacent cube vertices at prescribed soft-plus values
      and push every other vertex below ``-omega``;
    * ``n = 3``: ``w_{B'} = omega``, ``c`` from ``J_B'`` and a bracketed root
      search on ``w_m``; negative ``J_B'`` is handled by flipping one
      variable of ``B'``, which negates both coefficients;
    * ``n = 2`` and ``n > 3``: lift a smaller case by gating extra variables.

    Raises
    ------
    RegionError
        If the targets are outside the attainable region for ``|B|``.
    PrecisionError
        If ``omega`` is too small for the requested magnitudes.
    """
    v = check_v(v)
    _check_range(spec.B, v)
    if not omega >= OMEGA_MIN:
        raise PrecisionError(f"omega={omega:g} below the floor {OMEGA_MIN:g}")
    verdict = edge_pair_feasible(size(spec.B), spec.J_B, spec.J_Bp)
    if not verdict.feasible:
        raise RegionError(
            f"targets (J_B={spec.J_B:g}, J_B'={spec.J_Bp:g}) for |B|={size(spec.B)} "
            f"violate {verdict.violated}")
    return _edge_unit(v, members(spec.Bp), spec.m, spec.J_B, spec.J_Bp,
                      verdict.binding_case, omega)


def _edge_unit(v, bp, m, J_B, J_Bp, case, omega):
    n = len(bp)
    if n == 0:
        c = softplus_inverse(J_Bp, floor=-omega)
        w = np.zeros(v)
        w[m] = softplus_inverse(J_B + J_Bp, floor=-omega) - c
        return SoftplusUnit(v, w, c)
    if n == 1:
        if case == "nonneg":
            return _adjacent_pair(v, bp, set(bp), m, J_Bp, J_B + J_Bp, omega)
        return _adjacent_pair(v, bp, set(bp[1:]), m, -J_Bp, -J_B - J_Bp, omega)
    if n == 2:
        base = _edge_unit(v, bp[:1], m, J_B, J_Bp, case, omega)
        return _lift(base, bp[1], omega)
    if n == 3:
        if J_Bp >= 0:
            return _omega_unit(v, bp, m, J_B, J_Bp, omega)
        return _omega_unit(v, bp, m, -J_B, -J_Bp, omega).flip(bp[0])
    unit = _edge_unit(v, bp[:3], m, J_B, J_Bp, case, omega)
    for p in bp[3:]:
        unit = _lift(unit, p, omega)
    return unit
