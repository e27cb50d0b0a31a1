"""Multilinear polynomials on {0,1}^v and the subset-lattice transforms.

A subset of the variable indices {0, ..., v-1} is encoded as an ``int``
bitmask (bit ``i`` set iff ``i`` is a member).  The same integer indexes the
state ``x`` with ``supp(x)`` equal to that subset, so a function table is a
plain array of length ``2**v``.

The zeta transform maps coefficients to function values,

    values[x] = sum_{B subseteq supp(x)} coeffs[B],

and the Moebius transform is its inverse,

    coeffs[B] = sum_{C subseteq B} (-1)^{|B \\ C|} values[C].

Both are computed in place in O(v 2^v) time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError

MAX_V = 30

VarSet = int


def varset(indices: Iterable[int]) -> VarSet:
    mask = 0
    for i in indices:
        i = int(i)
        if i < 0:
            raise InputError(f"negative variable index {i}")
        mask |= 1 << i
    return mask


def members(mask: VarSet) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def size(mask: VarSet) -> int:
    return mask.bit_count()


def is_subset(a: VarSet, b: VarSet) -> bool:
    return a & ~b == 0


def subsets(mask: VarSet):
    """All submasks of ``mask`` in increasing order."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def fmt_set(mask: VarSet) -> str:
    return "{" + ",".join(map(str, members(mask))) + "}"


def check_v(v: int) -> int:
    v = int(v)
    if v < 0:
        raise InputError(f"v must be nonnegative, got {v}")
    if v > MAX_V:
        raise InputError(f"v={v} exceeds the bitmask cap of {MAX_V}")
    return v


def _check_member_range(v: int, mask: VarSet) -> None:
    if mask < 0 or mask >> v:
        raise InputError(f"set {fmt_set(mask)} has an index >= v={v}")


@dataclass(frozen=True)
class MultilinearPoly:
    """Sparse coefficient map ``B -> K_B``; absent keys are exactly zero."""

    v: int
    coeffs: Mapping[VarSet, float] = field(default_factory=dict)

    def __post_init__(self):
        check_v(self.v)
        clean = {}
        for k, c in self.coeffs.items():
            k = int(k)
            _check_member_range(self.v, k)
            c = float(c)
            if not math.isfinite(c):
                raise InputError(f"non-finite coefficient at {fmt_set(k)}")
            clean[k] = clean.get(k, 0.0) + c
        object.__setattr__(self, "coeffs", clean)

    def __getitem__(self, mask: VarSet) -> float:
        return self.coeffs.get(int(mask), 0.0)

    @classmethod
    def from_dense(cls, v: int, arr, drop_zeros: bool = True) -> "MultilinearPoly":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (1 << v,):
            raise InputError(f"dense coefficient array must have length 2**{v}")
        if drop_zeros:
            idx = np.flatnonzero(arr)
        else:
            idx = np.arange(arr.size)
        return cls(v, {int(i): float(arr[i]) for i in idx})

    def dense(self) -> np.ndarray:
        out = np.zeros(1 << self.v)
        for k, c in self.coeffs.items():
            out[k] = c
        return out

    def degree(self) -> int:
        nz = [size(k) for k, c in self.coeffs.items() if c != 0.0]
        return max(nz, default=0)

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        _same_v(self.v, other.v)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return MultilinearPoly(self.v, out)

    def __sub__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self + other.scale(-1.0)

    def scale(self, a: float) -> "MultilinearPoly":
        return MultilinearPoly(self.v, {k: a * c for k, c in self.coeffs.items()})


@dataclass(frozen=True)
class FunctionTable:
    """Values of a function on all 2**v binary states, indexed by bitmask."""

    v: int
    values: np.ndarray

    def __post_init__(self):
        check_v(self.v)
        vals = np.array(self.values, dtype=float)
        if vals.shape != (1 << self.v,):
            raise InputError(
                f"function table must have length 2**{self.v}={1 << self.v}, "
                f"got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InputError("function table has non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, mask: VarSet) -> float:
        return float(self.values[mask])


@dataclass(frozen=True)
class SimplicialComplex:
    v: int
    sets: frozenset

    def __post_init__(self):
        check_v(self.v)
        sets = frozenset(int(s) for s in self.sets)
        for s in sets:
            _check_member_range(self.v, s)
        for s in sets:
            for i in members(s):
                if s & ~(1 << i) not in sets:
                    raise InputError(
                        f"family is not downward closed: {fmt_set(s)} is present "
                        f"but {fmt_set(s & ~(1 << i))} is not")
        union = 0
        for s in sets:
            union |= s
        if union != (1 << self.v) - 1:
            raise InputError("union of the complex does not cover all variables")
        object.__setattr__(self, "sets", sets)

    def __contains__(self, mask) -> bool:
        return int(mask) in self.sets

    def __iter__(self):
        return iter(sorted(self.sets))

    def __len__(self):
        return len(self.sets)

    def layer(self, j: int) -> list[VarSet]:
        return sorted(s for s in self.sets if size(s) == j)

    def max_degree(self) -> int:
        return max(size(s) for s in self.sets)


def _same_v(a: int, b: int) -> None:
    if a != b:
        raise InputError(f"mismatched number of variables: {a} vs {b}")


def zeta_dense(arr: np.ndarray, v: int) -> np.ndarray:
    """Fast zeta transform on the last axis; leading axes are batch axes."""
    out = np.array(arr, dtype=float, copy=True)
    batch = out.shape[:-1]
    flat = out.reshape(-1, 1 << v)
    for i in range(v):
        view = flat.reshape(flat.shape[0], -1, 2, 1 << i)
        view[:, :, 1, :] += view[:, :, 0, :]
    return flat.reshape(*batch, 1 << v)


def mobius_dense(arr: np.ndarray, v: int) -> np.ndarray:
    """Fast Moebius transform on the last axis; leading axes are batch axes."""
    out = np.array(arr, dtype=float, copy=True)
    batch = out.shape[:-1]
    flat = out.reshape(-1, 1 << v)
    for i in range(v):
        view = flat.reshape(flat.shape[0], -1, 2, 1 << i)
        view[:, :, 1, :] -= view[:, :, 0, :]
    return flat.reshape(*batch, 1 << v)


def zeta_transform(p: MultilinearPoly) -> FunctionTable:
    return FunctionTable(p.v, zeta_dense(p.dense(), p.v))


def mobius_transform(t: FunctionTable) -> MultilinearPoly:
    return MultilinearPoly.from_dense(t.v, mobius_dense(t.values, t.v))


def naive_zeta(p: MultilinearPoly) -> np.ndarray:
    """Per-state evaluation ``E(x) = sum_B K_B prod_{i in B} x_i`` (oracle)."""
    n = 1 << p.v
    out = np.empty(n)
    items = list(p.coeffs.items())
    for x in range(n):
        out[x] = math.fsum(c for b, c in items if b & ~x == 0)
    return out


def naive_mobius(values, v: int) -> np.ndarray:
    """Direct alternating-sum inversion, O(4^v), with compensated summation.

    Alternating sums of values of magnitude ``w`` carry an absolute error of
    roughly ``w`` times machine epsilon even with ``math.fsum``, because the
    inputs themselves are rounded.
    """
    values = np.asarray(values, dtype=float)
    n = 1 << v
    out = np.empty(n)
    for b in range(n):
        nb = size(b)
        out[b] = math.fsum(
            values[c] if (nb - size(c)) % 2 == 0 else -values[c] for c in subsets(b))
    return out


def layer(v: int, j: int) -> list[VarSet]:
    """All ``j``-subsets of ``{0..v-1}`` in ascending bitmask order."""
    check_v(v)
    if not 0 <= j <= v:
        raise InputError(f"layer index j={j} outside [0, {v}]")
    return sorted(varset(c) for c in combinations(range(v), j))


def downward_closure(v: int, generators: Iterable) -> SimplicialComplex:
    """Smallest simplicial complex holding ``generators``, singletons and the empty set.

    Generators may be bitmasks or iterables of indices.
    """
    check_v(v)
    sets = {0}
    sets.update(1 << i for i in range(v))
    for g in generators:
        mask = g if isinstance(g, (int, np.integer)) else varset(g)
        mask = int(mask)
        _check_member_range(v, mask)
        if mask in sets:
            continue
        sets.update(subsets(mask))
    return SimplicialComplex(v, frozenset(sets))


def full_complex(v: int) -> SimplicialComplex:
    return SimplicialComplex(v, frozenset(range(1 << v)))


def k_interaction_complex(v: int, k: int) -> SimplicialComplex:
    return SimplicialComplex(v, frozenset(s for s in range(1 << v) if size(s) <= k))


def singletons_complex(v: int) -> SimplicialComplex:
    return k_interaction_complex(v, 1)
