"""Soft-plus and rectified-linear units and their polynomial coefficients.

A unit computes ``phi(x) = f(w.x + c)`` on ``x`` in ``{0,1}^v``.  Its
multilinear coefficients are the Moebius transform of its value table,

    K_B = sum_{C subseteq B} (-1)^{|B \\ C|} f(sum_{i in C} w_i + c).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InputError, RangeError
from .subsetpoly import (
    FunctionTable, MultilinearPoly, VarSet, check_v, members, mobius_dense, size,
    subsets)

# above this the soft-plus is evaluated as s + log1p(exp(-s))
BRANCH = 30.0
_EXP_MAX = math.log(np.finfo(float).max)


class ActivationKind(enum.Enum):
    SOFTPLUS = "softplus"
    RECTIFIED = "rectified"


def softplus(s):
    """Vectorized ``log(1 + exp(s))``, overflow free."""
    s = np.asarray(s, dtype=float)
    lo = np.minimum(s, BRANCH)
    hi = np.maximum(s, BRANCH)
    return np.where(s > BRANCH, s + np.log1p(np.exp(-hi)), np.log1p(np.exp(lo)))


def softplus_value(s: float) -> float:
    s = float(s)
    if not math.isfinite(s):
        raise InputError(f"soft-plus argument must be finite, got {s}")
    if s > BRANCH:
        return s + math.log1p(math.exp(-s))
    return math.log1p(math.exp(s))


def softplus_inverse(y: float, floor: float = -745.0) -> float:
    """Inverse of the soft-plus on ``y > 0``.

    Values at or below ``softplus(floor)`` (including ``y <= 0``, which is not
    attained) map to ``floor``.
    """
    if y <= 0.0 or y <= softplus_value(floor):
        return floor
    if y > BRANCH:
        return y + math.log1p(-math.exp(-y))
    return math.log(math.expm1(y))


def logistic(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, 1.0 / (1.0 + np.exp(-np.abs(s))),
                    np.exp(-np.abs(s)) / (1.0 + np.exp(-np.abs(s))))


def activation(s, kind: ActivationKind = ActivationKind.SOFTPLUS):
    if kind is ActivationKind.SOFTPLUS:
        return softplus(s)
    if kind is ActivationKind.RECTIFIED:
        return np.maximum(np.asarray(s, dtype=float), 0.0)
    raise InputError(f"unknown activation {kind!r}")


@dataclass(frozen=True)
class SoftplusUnit:
    """One hidden unit: coupling weights ``w`` (length v) and bias ``c``."""

    v: int
    w: np.ndarray
    c: float

    def __post_init__(self):
        check_v(self.v)
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (self.v,):
            raise InputError(f"weight vector must have length {self.v}, got {w.size}")
        c = float(self.c)
        if not (np.all(np.isfinite(w)) and math.isfinite(c)):
            raise InputError("unit parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "c", c)

    def preactivation(self) -> np.ndarray:
        """``w.x + c`` for every state ``x``, indexed by bitmask."""
        return c_plus_subset_sums(self.w, self.c)

    def flip(self, i: int) -> "SoftplusUnit":
        """The unit composed with ``x_i -> 1 - x_i``."""
        w = self.w.copy()
        c = self.c + w[i]
        w[i] = -w[i]
        return SoftplusUnit(self.v, w, c)


def c_plus_subset_sums(w, c) -> np.ndarray:
    """Array ``a[x] = c + sum_{i in x} w_i`` over all bitmasks ``x``.

    Accepts a batch: ``w`` of shape (n, v) and ``c`` of shape (n,).
    """
    w = np.asarray(w, dtype=float)
    c = np.asarray(c, dtype=float)
    if w.ndim == 1:
        return c_plus_subset_sums(w[None, :], c.reshape(1))[0]
    out = c.reshape(-1, 1).copy()
    for i in range(w.shape[1]):
        out = np.concatenate([out, out + w[:, i:i + 1]], axis=1)
    return out


def unit_value(u: SoftplusUnit, x: VarSet,
               kind: ActivationKind = ActivationKind.SOFTPLUS) -> float:
    if x < 0 or x >> u.v:
        raise InputError(f"state {x} out of range for v={u.v}")
    s = u.c + math.fsum(u.w[i] for i in members(x))
    if kind is ActivationKind.RECTIFIED:
        return max(0.0, s)
    return softplus_value(s)


def unit_table(u: SoftplusUnit,
               kind: ActivationKind = ActivationKind.SOFTPLUS) -> FunctionTable:
    return FunctionTable(u.v, activation(u.preactivation(), kind))


def unit_coefficients(u: SoftplusUnit,
                      kind: ActivationKind = ActivationKind.SOFTPLUS) -> MultilinearPoly:
    dense = mobius_dense(activation(u.preactivation(), kind), u.v)
    return MultilinearPoly.from_dense(u.v, dense)


def unit_coefficients_dense(u: SoftplusUnit,
                            kind: ActivationKind = ActivationKind.SOFTPLUS) -> np.ndarray:
    return mobius_dense(activation(u.preactivation(), kind), u.v)


def coefficient(u: SoftplusUnit, b: VarSet,
                kind: ActivationKind = ActivationKind.SOFTPLUS) -> float:
    """Single coefficient ``K_B`` by the alternating sum over ``C subseteq B``."""
    nb = size(b)
    terms = []
    for sub in subsets(b):
        s = u.c + math.fsum(u.w[i] for i in members(sub))
        val = max(0.0, s) if kind is ActivationKind.RECTIFIED else softplus_value(s)
        terms.append(val if (nb - size(sub)) % 2 == 0 else -val)
    return math.fsum(terms)


def batch_coefficients(w, c, kind: ActivationKind = ActivationKind.SOFTPLUS) -> np.ndarray:
    """Coefficient arrays for many units at once, shape (n, 2**v)."""
    w = np.atleast_2d(np.asarray(w, dtype=float))
    pre = c_plus_subset_sums(w, np.asarray(c, dtype=float).reshape(-1))
    return mobius_dense(activation(pre, kind), w.shape[1])


@dataclass(frozen=True)
class RegionVerdict:
    """Outcome of the edge-pair region test.

    ``binding_case`` is one of ``"nonneg"`` (J_B' >= 0 and J_B' >= -J_B),
    ``"nonpos"`` (J_B' <= 0 and J_B' <= -J_B), ``"unrestricted"`` (|B| >= 4)
    or ``"none"`` when infeasible; ``violated`` then names the inequality.
    """

    feasible: bool
    binding_case: str
    violated: str | None = None


def edge_pair_feasible(bsize: int, J_B: float, J_Bp: float,
                       slack: float = 0.0) -> RegionVerdict:
    """Whether ``(J_B, J_B')`` is in the closure of attainable edge-pair coefficients.

    Parameters
    ----------
    bsize : int
        Cardinality of the larger set ``B`` of the edge pair ``(B, B')``.
    J_B, J_Bp : float
        Target coefficients for ``B`` and ``B' = B minus one element``.
    slack : float
        Tolerance added to every inequality (boundary points are feasible).
    """
    bsize = int(bsize)
    if bsize < 1:
        raise InputError(f"edge pair needs |B| >= 1, got {bsize}")
    if bsize >= 4:
        return RegionVerdict(True, "unrestricted")
    upper = J_Bp >= -slack and J_Bp >= -J_B - slack
    if bsize == 1:
        if upper:
            return RegionVerdict(True, "nonneg")
        bad = "J_B' >= 0" if J_Bp < -slack else "J_B' >= -J_B"
        return RegionVerdict(False, "none", bad)
    if upper:
        return RegionVerdict(True, "nonneg")
    if J_Bp <= slack and J_Bp <= -J_B + slack:
        return RegionVerdict(True, "nonpos")
    return RegionVerdict(
        False, "none",
        "neither (J_B' >= 0 and J_B' >= -J_B) nor (J_B' <= 0 and J_B' <= -J_B)")


def edge_base_coefficient(w_Bprime, c: float) -> float:
    """``K_{B'}(w_{B'}, c)`` for a unit supported on ``B'``."""
    w = np.asarray(w_Bprime, dtype=float).reshape(-1)
    n = w.size
    vals = softplus(c_plus_subset_sums(w, c))
    return float(mobius_dense(vals, n)[-1])


def edge_top_coefficient(w_Bprime, c: float, w_m: float) -> float:
    """``K_B = K_{B'}(w_{B'}, c + w_m) - K_{B'}(w_{B'}, c)`` for ``B = B' + {m}``."""
    w = np.asarray(w_Bprime, dtype=float).reshape(-1)
    full = np.append(w, w_m)
    vals = softplus(c_plus_subset_sums(full, c))
    return float(mobius_dense(vals, full.size)[-1])


def _edge_top_derivative(w: np.ndarray, c: float, w_m: float) -> float:
    n = w.size
    pre = c_plus_subset_sums(w, c + w_m)
    return float(mobius_dense(logistic(pre), n)[-1])


def _exp_checked(x: float, index) -> float:
    if x > _EXP_MAX:
        raise RangeError(f"exp overflow for parameter {index} = {x}", index=index)
    return math.exp(x)


def root_polynomial(w_Bprime, c: float, J_B: float) -> list[float]:
    """Coefficients (ascending) of the polynomial in ``t = exp(w_m)`` whose
    positive roots are exactly the ``w_m`` achieving ``K_B = J_B``.

    With ``r = K_{B'}(w_{B'}, c) + J_B`` and ``a_C = exp(c + sum_{i in C} w_i)``
    the polynomial is

        prod_{|B' \\ C| even} (1 + a_C t) - exp(r) prod_{|B' \\ C| odd} (1 + a_C t),

    of degree at most ``2^{|B'|-1}`` (1 when ``B'`` is empty).
    """
    w = np.asarray(w_Bprime, dtype=float).reshape(-1)
    n = w.size
    if n > 20:
        raise InputError(f"|B'| = {n} exceeds 20")
    for i, wi in enumerate(w):
        _exp_checked(float(wi), i)
    _exp_checked(float(c), "c")
    r = edge_base_coefficient(w, c) + J_B
    r_tilde = _exp_checked(r, "r")
    full = (1 << n) - 1
    sums = c_plus_subset_sums(w, c)
    even, odd = np.array([1.0]), np.array([1.0])
    for sub in range(1 << n):
        a = _exp_checked(float(sums[sub]), "c+sum(w)")
        if size(full & ~sub) % 2 == 0:
            even = npoly.polymul(even, [1.0, a])
        else:
            odd = npoly.polymul(odd, [1.0, a])
    out = npoly.polysub(even, r_tilde * odd)
    if not np.all(np.isfinite(out)):
        raise RangeError("polynomial coefficients overflow", index=None)
    length = 2 if n == 0 else (1 << (n - 1)) + 1
    out = np.concatenate([out, np.zeros(max(0, length - out.size))])[:length]
    return [float(x) for x in out]


def _positive_root_candidates(coeffs: np.ndarray) -> list[float]:
    nz = np.flatnonzero(coeffs)
    if nz.size == 0:
        return []
    trimmed = coeffs[: nz[-1] + 1]
    deg = trimmed.size - 1
    if deg == 0:
        return []
    if deg <= 16:
        roots = npoly.polyroots(trimmed)
        out = []
        for z in roots:
            if z.real > 0 and abs(z.imag) <= 1e-3 * abs(z):
                out.append(float(z.real))
        return out
    # high degree: sign changes of the polynomial on a log grid of t
    logs = np.linspace(-60.0, 60.0, 4001)
    ts = np.exp(logs)
    vals = npoly.polyval(ts, trimmed)
    out = []
    sign = np.sign(vals)
    for k in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        lo, hi = logs[k], logs[k + 1]
        flo = vals[k]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = npoly.polyval(math.exp(mid), trimmed)
            if np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        out.append(math.exp(0.5 * (lo + hi)))
    return out


def solve_w_m(w_Bprime, c: float, J_B: float, tol: float = 1e-9) -> float | None:
    """A coupling ``w_m`` with ``K_B = J_B`` for fixed ``w_{B'}`` and ``c``, or None.

    Candidates are the positive real roots of :func:`root_polynomial`; each is
    polished by Newton steps on ``K_B(w_m) - J_B`` and returned only if the
    residual is at most ``tol``.
    """
    w = np.asarray(w_Bprime, dtype=float).reshape(-1)
    coeffs = np.asarray(root_polynomial(w, c, J_B))
    if not np.any(coeffs):
        # K_B is constant and equal to J_B: every w_m works
        return 0.0
    best = None
    for t in _positive_root_candidates(coeffs):
        wm = math.log(t)
        for _ in range(50):
            h = edge_top_coefficient(w, c, wm) - J_B
            if abs(h) <= 1e-15 * max(1.0, abs(J_B)):
                break
            d = _edge_top_derivative(w, c, wm)
            if d == 0.0 or not math.isfinite(d):
                break
            step = h / d
            step = max(-5.0, min(5.0, step))
            wm -= step
            if abs(step) < 1e-15 * max(1.0, abs(wm)):
                break
        err = abs(edge_top_coefficient(w, c, wm) - J_B)
        if err <= tol and (best is None or err < best[0]):
            best = (err, wm)
    return None if best is None else best[1]
