"""Compile a hierarchical-model energy into RBM parameters.

Groups of the cover plan are processed from the highest degree down.  Each
group gets one soft-plus unit aimed at the *current residual* coefficients of
the sets it covers; the unit's exact coefficients (by Moebius inversion of its
value table) are then subtracted from the residual.  The ~omega/2 term a star
tuple leaves on its root therefore simply becomes part of the target one
degree lower.  Whatever is left at degree 1 goes into the visible biases and
the degree-0 remainder is absorbed by normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constructions import (
    OMEGA_MIN, EdgePairSpec, StarTupleSpec, synthesize_edge_pair,
    synthesize_star_tuple)
from .covering import CoverPlan, EdgePair, StarTuple, make_cover_plan
from .errors import InputError, PlanError, PrecisionError
from .models import HierarchicalModelSpec, RBMParams, rbm_free_energy
from .softplus import unit_coefficients_dense
from .subsetpoly import fmt_set, members, mobius_dense, size

# beyond this the soft-plus tables lose too many digits to rounding
OMEGA_MAX = 1e7


@dataclass
class SynthesisReport:
    plan: CoverPlan
    omega_used: list = field(default_factory=list)
    residual_max: float = 0.0
    per_degree: dict = field(default_factory=dict)
    loop_residual_max: float = 0.0
    snapshots: list | None = None

    def to_json(self) -> dict:
        return {
            "h": len(self.omega_used),
            "omega_used": list(self.omega_used),
            "residual_max": self.residual_max,
            "per_degree": {str(d): r for d, r in sorted(self.per_degree.items())},
        }


def auto_omega(v: int, tol: float = 1e-6) -> float:
    """Base scale putting the neglected soft-plus tails below ``tol / 2**v``."""
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    return max(OMEGA_MIN, 2.0 * (v * math.log(2.0) + math.log(1.0 / tol)))


def _degree_sizes(v: int) -> np.ndarray:
    return np.array([size(i) for i in range(1 << v)])


def _per_degree(R: np.ndarray, v: int) -> dict:
    deg = _degree_sizes(v)
    out = {}
    for d in range(2, v + 1):
        out[d] = float(np.max(np.abs(R[deg == d])))
    return out


def _group_unit(group, R, omega, v):
    if isinstance(group, StarTuple):
        targets = {j: float(R[group.root | (1 << j)]) for j in members(group.leaves)}
        om = omega + 2.0 * math.fsum(abs(t) for t in targets.values())
        _check_scale(om, group)
        spec = StarTupleSpec(group.root, group.leaves, targets)
        return synthesize_star_tuple(spec, om, v), om
    if isinstance(group, EdgePair):
        J_B, J_Bp = float(R[group.B]), float(R[group.Bp])
        om = omega + 2.0 * (abs(J_B) + abs(J_Bp))
        _check_scale(om, group)
        spec = EdgePairSpec(group.B, group.Bp, J_B, J_Bp)
        return synthesize_edge_pair(spec, om, v), om
    raise InputError(f"unknown plan group {group!r}")


def _check_scale(om, group):
    if om > OMEGA_MAX:
        raise PrecisionError(
            f"group {group} needs omega={om:.3g}, beyond the usable scale "
            f"{OMEGA_MAX:g}; the accumulated residuals are too large")


def synthesize_rbm(spec: HierarchicalModelSpec, plan: CoverPlan | None = None,
                   omega: float | None = None, tol: float = 1e-6,
                   edge_pairs: bool = False, keep_snapshots: bool = False):
    """Return ``(RBMParams, SynthesisReport)`` with free energy matching ``spec``.

    ``omega`` is the base scale; each unit uses ``omega + 2 sum|targets|`` so
    that the inactive states of every unit sit at least ``omega/2`` below zero
    whatever the residual it has to absorb.  ``None`` picks ``auto_omega``.

    Raises PlanError when a nonzero set of size >= 2 is left uncovered and
    PrecisionError when the final residual exceeds ``tol``.
    """
    v = spec.v
    if plan is None:
        plan = make_cover_plan(spec.complex(), edge_pairs=edge_pairs)
    if plan.v != v:
        raise InputError(f"plan over v={plan.v} but model over v={v}")
    if omega is None:
        omega = auto_omega(v, tol)
    if not omega >= OMEGA_MIN:
        raise PrecisionError(f"omega={omega:g} below the floor {OMEGA_MIN:g}")

    covered = plan.covered()
    for s, wgt in spec.interactions:
        if size(s) >= 2 and wgt != 0.0 and s not in covered:
            raise PlanError(f"interaction {fmt_set(s)} is not covered by the plan", s)

    R = spec.coefficients().dense()
    units, omegas = [], []
    snapshots = [] if keep_snapshots else None
    prev_deg = None
    for g in plan:
        if keep_snapshots and g.degree != prev_deg:
            snapshots.append((g.degree, R.copy()))
        prev_deg = g.degree
        unit, om = _group_unit(g, R, omega, v)
        R -= unit_coefficients_dense(unit)
        units.append(unit)
        omegas.append(om)
    if keep_snapshots:
        snapshots.append((1, R.copy()))

    bias = np.array([R[1 << i] for i in range(v)])
    params = RBMParams(v, bias, tuple(units))
    deg = _degree_sizes(v)
    loop_max = float(np.max(np.abs(R[deg >= 2]))) if v >= 2 else 0.0

    # independent check from the returned parameters
    K = mobius_dense(rbm_free_energy(params).values, v)
    diff = K - spec.coefficients().dense()
    per_degree = _per_degree(diff, v)
    res = max(per_degree.values(), default=0.0)
    report = SynthesisReport(plan, omegas, res, per_degree, loop_max, snapshots)
    if res > tol:
        worst = int(np.flatnonzero((deg >= 2) & (np.abs(diff) == res))[0])
        if worst not in covered:
            raise PlanError(
                f"set {fmt_set(worst)} is not covered but carries residual {res:.3g}",
                worst)
        raise PrecisionError(
            f"residual {res:.3g} at {fmt_set(worst)} exceeds tol={tol:g}; "
            f"try omega={2 * omega:g}")
    return params, report


def required_hidden_units(spec: HierarchicalModelSpec) -> int:
    return len(make_cover_plan(spec.complex()))
