"""Star-tuple covers of subset layers and covering-design bounds.

A star tuple with root ``R`` (a ``(j-1)``-set) covers every ``j``-set that
contains ``R``.  The minimum number of star tuples covering all ``j``-sets of a
``v``-set is ``D(v, j) = C(v, v-j+1, v-j)``, where ``C(v, k, r)`` is the
covering number: the fewest ``k``-sets containing every ``r``-set.  The two
problems are related by complementation (``R subseteq S`` iff
``V minus S subseteq V minus R``).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import InputError
from .subsetpoly import (
    SimplicialComplex, VarSet, check_v, fmt_set, layer, members, singletons_complex,
    size, subsets, varset)

METHODS = ("exact-formula", "erdos-spencer", "simple", "exact-search", "min-combine")
ORACLE_MAX_V = 9
DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class BoundValue:
    value: int
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown bound method {self.method!r}")
        if self.value < 0:
            raise InputError("bound must be nonnegative")


@dataclass(frozen=True)
class StarTuple:
    root: VarSet
    leaves: VarSet

    def __post_init__(self):
        if self.root & self.leaves:
            raise InputError("star tuple root and leaves must be disjoint")

    @property
    def degree(self) -> int:
        return size(self.root) + 1

    def covered(self) -> list[VarSet]:
        return [self.root | (1 << j) for j in members(self.leaves)]

    def touched(self) -> list[VarSet]:
        # coefficients the unit sets without control
        return [self.root]

    def to_json(self) -> dict:
        return {"root": list(members(self.root)), "leaves": list(members(self.leaves))}


@dataclass(frozen=True)
class EdgePair:
    B: VarSet
    Bp: VarSet

    def __post_init__(self):
        if self.Bp & ~self.B or size(self.B) - size(self.Bp) != 1:
            raise InputError(f"({fmt_set(self.B)}, {fmt_set(self.Bp)}) is not an edge pair")

    @property
    def degree(self) -> int:
        return size(self.B)

    def covered(self) -> list[VarSet]:
        return [self.B, self.Bp]

    def touched(self) -> list[VarSet]:
        return [s for s in subsets(self.B) if s not in (self.B, self.Bp)]

    def to_json(self) -> dict:
        return {"B": list(members(self.B)), "Bp": list(members(self.Bp))}


@dataclass(frozen=True)
class CoverPlan:
    """Groups in processing order (nonincreasing degree)."""

    v: int
    groups: tuple = field(default_factory=tuple)

    def __post_init__(self):
        groups = tuple(self.groups)
        object.__setattr__(self, "groups", groups)
        degs = [g.degree for g in groups]
        if any(a < b for a, b in zip(degs, degs[1:])):
            raise InputError("plan groups must be ordered by nonincreasing degree")
        seen = set()
        for g in groups:
            cov = g.covered()
            if any(s >> self.v for s in cov):
                raise InputError("plan group has an index >= v")
            if seen.intersection(g.touched()):
                bad = sorted(seen.intersection(g.touched()))[0]
                raise InputError(
                    f"group {g} would disturb {fmt_set(bad)}, covered earlier")
            dup = seen.intersection(cov)
            if dup:
                raise InputError(f"set {fmt_set(min(dup))} covered twice")
            seen.update(cov)

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    def covered(self) -> set[VarSet]:
        out = set()
        for g in self.groups:
            out.update(g.covered())
        return out


# ---------------------------------------------------------------- bounds

def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _nested_d3(v: int) -> int:
    # ceil(v/(v-2) ceil((v-1)/(v-3) ... ceil(4/2)))
    x = 2
    for n in range(5, v + 1):
        x = _ceil_div(n * x, n - 2)
    return x


def exact_rows(v: int, j: int) -> list[int]:
    """Values of every closed-form row for ``D(v, j)`` that applies."""
    rows = []
    if j == 1:
        rows.append(1)
    if j == 2:
        rows.append(v - 1)
    if j == 3 and v >= 4:
        rows.append(_nested_d3(v))
    if j == v - 3 and v >= 4 and v % 12 != 7:
        a = _ceil_div(v - 2, 2)
        b = _ceil_div((v - 1) * a, 3)
        rows.append(_ceil_div(v * b, 4))
    if j == v - 2 and v >= 3:
        rows.append(_ceil_div(v * _ceil_div(v - 1, 2), 3))
    if j == v - 1 and v >= 2:
        rows.append(_ceil_div(v, 2))
    if j == v:
        rows.append(1)
    return rows


def erdos_spencer_bound(v: int, j: int) -> int:
    """floor( C(v,r)/C(k,r) * (1 + ln C(k,r)) ) with k = v-j+1, r = v-j."""
    k, r = v - j + 1, v - j
    ckr = math.comb(k, r)
    return math.floor(math.comb(v, r) / ckr * (1.0 + math.log(ckr)))


def simple_bound(v: int, j: int) -> int:
    return math.comb(v - 1, j - 1)


def covering_number_bound(v: int, j: int) -> BoundValue:
    """Best closed-form upper bound on ``D(v, j)``.

    An applicable exact row wins (method ``exact-formula``); otherwise the
    minimum of the Erdos-Spencer and simple bounds (``min-combine``).
    """
    if not 1 <= j <= v:
        raise InputError(f"layer j={j} outside [1, {v}]")
    rows = exact_rows(v, j)
    if rows:
        return BoundValue(min(rows), "exact-formula")
    return BoundValue(min(erdos_spencer_bound(v, j), simple_bound(v, j)), "min-combine")


def schonheim_bound(v: int, k: int, r: int) -> int:
    """Schonheim lower bound on C(v, k, r)."""
    x = 1
    for i in range(r - 1, -1, -1):
        x = _ceil_div((v - i) * x, k - i)
    return x


# ---------------------------------------------------------- exact search

class _Search:
    def __init__(self, v, k, r, node_budget):
        self.targets = [varset(c) for c in combinations(range(v), r)]
        index = {t: i for i, t in enumerate(self.targets)}
        self.blocks = [varset(c) for c in combinations(range(v), k)]
        self.cov = []
        for b in self.blocks:
            m = 0
            for sub in combinations(members(b), r):
                m |= 1 << index[varset(sub)]
            self.cov.append(m)
        self.by_target = [[bi for bi, b in enumerate(self.blocks) if t & ~b == 0]
                          for t in self.targets]
        self.per_block = math.comb(k, r)
        self.budget = node_budget
        self.nodes = 0
        self.seen = {}
        self.best = None
        self.best_design = None

    def greedy(self):
        unc = (1 << len(self.targets)) - 1
        chosen = []
        while unc:
            bi = max(range(len(self.blocks)),
                     key=lambda i: ((self.cov[i] & unc).bit_count(), -i))
            chosen.append(bi)
            unc &= ~self.cov[bi]
        return chosen

    def run(self, lower):
        design = self.greedy()
        self.best, self.best_design = len(design), design
        if self.best <= lower:
            return True
        full = (1 << len(self.targets)) - 1
        # every block through the first target is equivalent under relabeling
        first = self.by_target[0][0]
        try:
            self._dfs(full & ~self.cov[first], [first], lower)
        except _BudgetExhausted:
            return False
        return True

    def _dfs(self, unc, chosen, lower):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExhausted
        depth = len(chosen)
        if unc == 0:
            if depth < self.best:
                self.best, self.best_design = depth, list(chosen)
            return
        if depth + _ceil_div(unc.bit_count(), self.per_block) >= self.best:
            return
        prev = self.seen.get(unc)
        if prev is not None and prev <= depth:
            return
        self.seen[unc] = depth
        t = (unc & -unc).bit_length() - 1
        opts = sorted(self.by_target[t], key=lambda bi: -(self.cov[bi] & unc).bit_count())
        for bi in opts:
            chosen.append(bi)
            self._dfs(unc & ~self.cov[bi], chosen, lower)
            chosen.pop()
            if self.best <= lower:
                return


class _BudgetExhausted(Exception):
    pass


def exact_covering_design(v: int, k: int, r: int,
                          node_budget: int = DEFAULT_NODE_BUDGET) -> list[VarSet] | None:
    """A minimum family of ``k``-sets covering every ``r``-set, or None when the
    node budget runs out before optimality is proven."""
    _check_exact_args(v, k, r, node_budget)
    if k == v:
        return [(1 << v) - 1]
    s = _Search(v, k, r, node_budget)
    lower = max(schonheim_bound(v, k, r), _ceil_div(math.comb(v, r), math.comb(k, r)))
    if not s.run(lower):
        return None
    return sorted(s.blocks[i] for i in s.best_design)


def _design_of_size(v: int, k: int, r: int, value: int,
                    node_budget: int) -> list[VarSet] | None:
    """Any design with at most ``value`` blocks found within the budget."""
    if k == v:
        return [(1 << v) - 1]
    s = _Search(v, k, r, node_budget)
    s.run(value)
    if s.best > value:
        return None
    return sorted(s.blocks[i] for i in s.best_design)


def _check_exact_args(v, k, r, node_budget):
    if not (1 <= v <= ORACLE_MAX_V):
        raise InputError(f"exact search supports 1 <= v <= {ORACLE_MAX_V}, got {v}")
    if r != k - 1 or not (1 <= k <= v):
        raise InputError(f"exact search needs 1 <= k <= v and r = k-1, got k={k}, r={r}")
    if node_budget <= 0:
        raise InputError("node budget must be positive")


def exact_covering_number(v: int, k: int, r: int,
                          node_budget: int = DEFAULT_NODE_BUDGET) -> BoundValue | None:
    design = exact_covering_design(v, k, r, node_budget)
    if design is None:
        return None
    return BoundValue(len(design), "exact-search")


# ---------------------------------------------------------------- covers

def _lex_key(mask: VarSet):
    return members(mask)


def assign_leaves(roots, needed) -> list[StarTuple]:
    """Star tuples from roots: each needed set goes to the lexicographically
    smallest root it contains; roots left without a set are dropped."""
    roots = sorted(set(roots), key=_lex_key)
    leaves = {r: 0 for r in roots}
    for s in needed:
        for r in roots:
            if r & ~s == 0:
                leaves[r] |= s & ~r
                break
        else:
            raise InputError(f"set {fmt_set(s)} is not covered by any root")
    return [StarTuple(r, leaves[r]) for r in roots if leaves[r]]


def _greedy_roots(needed) -> list[VarSet]:
    unc = set(needed)
    cands = set()
    for s in needed:
        for i in members(s):
            cands.add(s & ~(1 << i))
    cands = sorted(cands, key=_lex_key)
    roots = []
    while unc:
        best, best_n = None, 0
        for r in cands:
            n = sum(1 for s in unc if r & ~s == 0)
            if n > best_n:
                best, best_n = r, n
        roots.append(best)
        unc = {s for s in unc if best & ~s}
    return roots


def _special_roots(v: int, j: int) -> list[VarSet] | None:
    full = (1 << v) - 1
    if j == 2:
        return [1 << i for i in range(v - 1)]
    if j == v:
        return [full & ~(1 << (v - 1))]
    if j == v - 1 and v >= 3:
        # roots are complements of pairs; the pairs must cover every index
        pairs = [(i, i + 1) for i in range(0, v - 1, 2)]
        if v % 2:
            pairs.append((0, v - 1))
        return [full & ~((1 << a) | (1 << b)) for a, b in pairs]
    return None


def _simple_roots(v: int, j: int) -> list[VarSet]:
    return [s for s in layer(v, j - 1) if not s & 1]


def greedy_layer_cover(v: int, j: int, use_oracle: bool = False,
                       node_budget: int = DEFAULT_NODE_BUDGET) -> list[StarTuple]:
    """A star-tuple cover of all ``j``-subsets with roots of size ``j-1``.

    The smallest of the closed-form constructions (``j`` in {2, v-1, v}),
    the simple construction (all ``(j-1)``-sets avoiding index 0) and a greedy
    set cover; with ``use_oracle`` an exact minimum design is tried as well.
    """
    check_v(v)
    if not 2 <= j <= v:
        raise InputError(f"layer j={j} outside [2, {v}]")
    needed = layer(v, j)
    candidates = []
    special = _special_roots(v, j)
    if special is not None:
        candidates.append(special)
    candidates.append(_simple_roots(v, j))
    candidates.append(_greedy_roots(needed))
    full = (1 << v) - 1
    if use_oracle and v <= ORACLE_MAX_V:
        design = exact_covering_design(v, v - j + 1, v - j, node_budget)
        if design is not None:
            candidates.append([full & ~b for b in design])
    best = min(candidates, key=len)
    known = covering_number_bound(v, j).value
    if len(best) > known and v <= ORACLE_MAX_V:
        # the closed-form value is attained; let the search build such a design
        design = _design_of_size(v, v - j + 1, v - j, known, node_budget)
        if design is not None:
            best = [full & ~b for b in design]
    return assign_leaves(best, needed)


def cover_sets(v: int, j: int, needed, use_oracle: bool = False) -> list[StarTuple]:
    """Star-tuple cover of an arbitrary collection of ``j``-sets."""
    needed = sorted(set(needed), key=_lex_key)
    if not needed:
        return []
    if any(size(s) != j for s in needed):
        raise InputError(f"all sets must have size {j}")
    from_full = assign_leaves([t.root for t in greedy_layer_cover(v, j, use_oracle)],
                              needed)
    from_greedy = assign_leaves(_greedy_roots(needed), needed)
    return min([from_full, from_greedy], key=len)


def make_cover_plan(S: SimplicialComplex, visible_complex: SimplicialComplex | None = None,
                    edge_pairs: bool = False, use_oracle: bool = False) -> CoverPlan:
    """Groups covering every set of ``S`` of size >= 2 outside ``visible_complex``.

    Layers are covered from the top degree down.  With ``edge_pairs`` a
    single-leaf star of degree >= 4 whose root is itself still uncovered is
    replaced by an edge pair that covers both sets with one unit.
    """
    v = S.v
    if visible_complex is None:
        visible_complex = singletons_complex(v)
    if visible_complex.v != v:
        raise InputError(f"complexes over different v: {v} vs {visible_complex.v}")
    groups = []
    claimed = set()
    for j in range(S.max_degree(), 1, -1):
        needed = [s for s in S.layer(j) if s not in visible_complex and s not in claimed]
        tuples = cover_sets(v, j, needed, use_oracle)
        pairs = []
        if edge_pairs and j >= 4:
            keep = []
            for t in tuples:
                ok = (size(t.leaves) == 1 and t.root in S and t.root not in visible_complex
                      and all(not (t.root & ~p.B == 0) for p in pairs)
                      and all(p.Bp & ~(t.root | t.leaves) for p in pairs))
                if ok:
                    pairs.append(EdgePair(t.root | t.leaves, t.root))
                    claimed.add(t.root)
                else:
                    keep.append(t)
            tuples = keep
        groups.extend(tuples)
        groups.extend(pairs)
    return CoverPlan(v, tuple(groups))


# ----------------------------------------------------------------- counts

def _d_bound(v: int, j: int, use_oracle: bool, node_budget: int) -> BoundValue:
    b = covering_number_bound(v, j)
    if use_oracle and b.method != "exact-formula" and v <= ORACLE_MAX_V:
        ex = exact_covering_number(v, v - j + 1, v - j, node_budget)
        if ex is not None and ex.value <= b.value:
            return ex
    return b


def d_bounds(v: int, k: int, use_oracle: bool = False,
             node_budget: int = DEFAULT_NODE_BUDGET) -> dict[int, BoundValue]:
    return {j: _d_bound(v, j, use_oracle, node_budget) for j in range(2, k + 1)}


def u_bound(v: int, k: int, use_oracle: bool = False,
            node_budget: int = DEFAULT_NODE_BUDGET) -> int:
    """``U(v, k) = sum_{j=2}^k D(v, j)`` with the best available bound per layer."""
    if not 1 <= k <= v:
        raise InputError(f"need 1 <= k <= v, got k={k}, v={v}")
    return sum(b.value for b in d_bounds(v, k, use_oracle, node_budget).values())


def pairwise_hidden_count(v: int, k: int, use_oracle: bool = False) -> int:
    """Hidden units needed when visible pair interactions are available."""
    if not 2 <= k <= v:
        raise InputError(f"need 2 <= k <= v, got k={k}, v={v}")
    return sum(_d_bound(v, j, use_oracle, DEFAULT_NODE_BUDGET).value
               for j in range(3, k + 1))


def param_lower_bound(v: int) -> int:
    """ceil(2^v / (v+1) - 1), computed in exact integer arithmetic."""
    if v < 1:
        raise InputError("v must be >= 1")
    return _ceil_div((1 << v) - (v + 1), v + 1)


def prev_bound(v: int) -> int:
    return (1 << (v - 1)) - 1


@dataclass(frozen=True)
class TableRow:
    v: int
    k: int
    u_bound: int
    method_summary: str
    prev_bound: int
    param_lower_bound: int


CSV_HEADER = ("v", "k", "u_bound", "method_summary", "prev_bound", "param_lower_bound")


def emit_tables(v_max: int, use_oracle: bool = False,
                node_budget: int = DEFAULT_NODE_BUDGET) -> list[TableRow]:
    """One row per ``2 <= k <= v <= v_max``, ordered by ``v`` then ``k``."""
    if not 2 <= v_max <= 40:
        raise InputError(f"v_max must be in [2, 40], got {v_max}")
    rows = []
    for v in range(2, v_max + 1):
        per_j = d_bounds(v, v, use_oracle and v <= ORACLE_MAX_V, node_budget)
        total = 0
        for k in range(2, v + 1):
            total += per_j[k].value
            summary = " ".join(f"{j}:{per_j[j].method}" for j in range(2, k + 1))
            rows.append(TableRow(v, k, total, summary, prev_bound(v), param_lower_bound(v)))
    return rows


def tables_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.v, r.k, r.u_bound, r.method_summary, r.prev_bound,
                    r.param_lower_bound])
    return buf.getvalue()
