"""Exact distributions of hierarchical models and RBMs by enumeration."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError, ResourceError
from .softplus import SoftplusUnit, c_plus_subset_sums, softplus
from .subsetpoly import (
    FunctionTable, MultilinearPoly, SimplicialComplex, check_v,
    downward_closure, fmt_set, zeta_dense)

V_CAP = 20
H_CAP = 30


def max_v() -> int:
    """Exact-enumeration cap; ``HM2RBM_MAX_V`` may lower it, never raise it."""
    env = os.environ.get("HM2RBM_MAX_V")
    if env:
        try:
            return max(0, min(V_CAP, int(env)))
        except ValueError:
            raise InputError(f"HM2RBM_MAX_V must be an integer, got {env!r}")
    return V_CAP


def _check_enumerable(v: int, h: int = 0) -> None:
    cap = max_v()
    if v > cap:
        raise ResourceError(f"v={v} exceeds the exact-enumeration cap {cap}")
    if h > H_CAP:
        raise ResourceError(f"h={h} exceeds the hidden-unit cap {H_CAP}")


@dataclass(frozen=True)
class HierarchicalModelSpec:
    """Energy ``E(x) = sum_Lambda J_Lambda prod_{i in Lambda} x_i``.

    Repeated sets are merged by summing their weights.  Sets are bitmasks.
    """

    v: int
    interactions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        check_v(self.v)
        merged: dict[int, float] = {}
        for s, wgt in self.interactions:
            s = int(s)
            if s < 0 or s >> self.v:
                raise InputError(f"interaction {fmt_set(s)} has an index >= v={self.v}")
            wgt = float(wgt)
            if not math.isfinite(wgt):
                raise InputError(f"non-finite weight for {fmt_set(s)}")
            merged[s] = merged.get(s, 0.0) + wgt
        object.__setattr__(self, "interactions", tuple(sorted(merged.items())))

    def coefficients(self) -> MultilinearPoly:
        return MultilinearPoly(self.v, dict(self.interactions))

    def complex(self) -> SimplicialComplex:
        return downward_closure(self.v, [s for s, _ in self.interactions])

    def energy(self) -> FunctionTable:
        return FunctionTable(self.v, zeta_dense(self.coefficients().dense(), self.v))


@dataclass(frozen=True)
class RBMParams:
    v: int
    visible_bias: np.ndarray
    units: tuple = field(default_factory=tuple)

    def __post_init__(self):
        check_v(self.v)
        b = np.array(self.visible_bias, dtype=float).reshape(-1)
        if b.shape != (self.v,):
            raise InputError(f"visible_bias must have length {self.v}")
        if not np.all(np.isfinite(b)):
            raise InputError("visible_bias must be finite")
        units = tuple(self.units)
        for u in units:
            if not isinstance(u, SoftplusUnit) or u.v != self.v:
                raise InputError("every unit must be a SoftplusUnit over the same v")
        b.setflags(write=False)
        object.__setattr__(self, "visible_bias", b)
        object.__setattr__(self, "units", units)

    @property
    def h(self) -> int:
        return len(self.units)

    def weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Coupling matrix (h, v) and hidden biases (h,)."""
        if not self.units:
            return np.zeros((0, self.v)), np.zeros(0)
        return (np.stack([u.w for u in self.units]),
                np.array([u.c for u in self.units]))


@dataclass(frozen=True)
class ProbTable:
    """Distribution on {0,1}^v stored through its log-probabilities."""

    v: int
    log_probs: np.ndarray

    def __post_init__(self):
        check_v(self.v)
        lp = np.array(self.log_probs, dtype=float)
        if lp.shape != (1 << self.v,):
            raise InputError(f"table must have length 2**{self.v}")
        if np.any(np.isnan(lp)) or np.any(lp == np.inf):
            raise InputError("log-probabilities must not be NaN or +inf")
        lp.setflags(write=False)
        object.__setattr__(self, "log_probs", lp)
        total = float(np.sum(np.exp(lp)))
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"probabilities sum to {total!r}, not 1")

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    @classmethod
    def from_log_weights(cls, v: int, logw) -> "ProbTable":
        logw = np.asarray(logw, dtype=float)
        m = np.max(logw)
        shifted = logw - m
        return cls(v, shifted - math.log(math.fsum(np.exp(shifted))))

    @classmethod
    def from_probs(cls, v: int, probs) -> "ProbTable":
        p = np.asarray(probs, dtype=float)
        if np.any(p < 0):
            raise InputError("probabilities must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls(v, np.log(p / math.fsum(p)))


def hierarchical_distribution(spec: HierarchicalModelSpec) -> ProbTable:
    _check_enumerable(spec.v)
    return ProbTable.from_log_weights(spec.v, spec.energy().values)


def rbm_free_energy(params: RBMParams) -> FunctionTable:
    """``F(x) = b.x + sum_j softplus(w_j.x + c_j)`` on every state."""
    _check_enumerable(params.v, params.h)
    F = c_plus_subset_sums(params.visible_bias, 0.0)
    if params.h:
        W, c = params.weights()
        # sorted per state so the result does not depend on unit order
        terms = np.sort(softplus(c_plus_subset_sums(W, c)), axis=0)
        F = F + np.sum(terms, axis=0)
    return FunctionTable(params.v, F)


def rbm_marginal(params: RBMParams) -> ProbTable:
    return ProbTable.from_log_weights(params.v, rbm_free_energy(params).values)


def _same_v(p: ProbTable, q: ProbTable) -> None:
    if p.v != q.v:
        raise InputError(f"tables over different v: {p.v} vs {q.v}")


def kl_divergence(p: ProbTable, q: ProbTable) -> float:
    """``sum_x p(x) log(p(x)/q(x))``.

    With ``d`` the log ratio centered under ``p`` and ``Q`` the share of q's
    mass on the support of p, KL = log E_p[exp(-d)] - log Q.  Both terms are
    evaluated through log1p/expm1, so tiny divergences between nearly equal
    tables keep full relative accuracy and do not depend on how exactly
    either table was normalized.
    """
    _same_v(p, q)
    lp, lq = p.log_probs, q.log_probs
    mask = np.isfinite(lp)
    if np.any(~np.isfinite(lq[mask])):
        bad = int(np.flatnonzero(mask & ~np.isfinite(lq))[0])
        raise DomainError(f"q vanishes at state {fmt_set(bad)} where p > 0")
    pp = np.exp(lp[mask])
    pp = pp / math.fsum(pp)
    d = lp[mask] - lq[mask]
    d = d - np.dot(pp, d)
    # expm1(-d) + d = d^2/2 - ... has no cancellation in the sum
    kl = math.log1p(float(np.dot(pp, np.expm1(-d) + d)))
    qq = np.exp(lq)
    outside = math.fsum(qq[~mask])
    if outside > 0.0:
        kl -= math.log1p(-outside / math.fsum(qq))
    return max(0.0, kl)


def total_variation(p: ProbTable, q: ProbTable) -> float:
    _same_v(p, q)
    return 0.5 * float(np.sum(np.abs(p.probs - q.probs)))


def coefficient_residual(target: MultilinearPoly, F: FunctionTable) -> float:
    """Largest ``|K_B(F) - J_B|`` over sets of size >= 2."""
    from .subsetpoly import mobius_dense
    if target.v != F.v:
        raise InputError("target and free energy over different v")
    diff = mobius_dense(F.values, F.v) - target.dense()
    sizes = np.array([bin(i).count("1") for i in range(1 << F.v)])
    sel = sizes >= 2
    return float(np.max(np.abs(diff[sel]))) if np.any(sel) else 0.0
