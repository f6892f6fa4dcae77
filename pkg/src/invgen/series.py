"""Exact and truncated series for the Chebotarev invariant and e1.

All exact work is done with :class:`fractions.Fraction`; floats only appear in
reported values.  The t = 0 term is included in every series, so for a
nontrivial group the sums start with a deterministic 1.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .atlas import SimpleGroupTable
from .errors import CapExceeded, LatticeUnavailable, OutOfRange
from .lattice import SubgroupLattice
from .product import MaximalDescriptor, ProductGroup

DEFAULT_EXACT_CAP = 20
DEFAULT_PARTITION_CAP = 60


@dataclass
class SeriesValue:
    exact: Fraction | None
    float: float
    truncation_bound: float = 0.0
    method: str = "exact"

    def to_json(self) -> dict:
        out = {"value": self.float, "method": self.method}
        if self.exact is not None:
            out["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        else:
            out["truncation_bound"] = self.truncation_bound
        return out


def intersection_fugacity(g: ProductGroup, J: Iterable[MaximalDescriptor]) -> Fraction:
    """|intersection of the M~ in J| / |G|, computed on class signatures.

    Product constraints restrict the classes allowed at one coordinate.
    Diagonal constraints tie the class at j to the image of the class at i.
    Each connected block of tied coordinates is solved by fixing the class of
    a root coordinate, propagating along a spanning tree and filtering on the
    remaining edges; untouched coordinates contribute a factor 1.
    """
    J = list(J)
    if not J:
        raise ValueError("J must be non-empty")
    allowed: dict[int, set[int]] = {}
    adj: dict[int, list[tuple[int, tuple[int, ...], bool]]] = {}
    for d in J:
        if d.kind == "product":
            i = d.coords[0]
            cur = allowed.get(i)
            allowed[i] = set(d.mtilde_classes) if cur is None else cur & d.mtilde_classes
        else:
            i, j = d.coords
            adj.setdefault(i, []).append((j, d.action, True))
            adj.setdefault(j, []).append((i, d.action, False))

    result = Fraction(1)
    visited: set[int] = set()
    for start in sorted(set(allowed) | set(adj)):
        if start in visited:
            continue
        t = g.table(start)
        sizes = t.classes.class_sizes
        nc = len(sizes)
        # class at each coordinate of the block, as a function of the root class
        assign = {start: list(range(nc))}
        stack = [start]
        visited.add(start)
        ok = [True] * nc
        while stack:
            u = stack.pop()
            for v, act, forward in adj.get(u, []):
                if forward:
                    image = [act[c] for c in assign[u]]
                else:
                    inv = [0] * nc
                    for c, pc in enumerate(act):
                        inv[pc] = c
                    image = [inv[c] for c in assign[u]]
                if v in assign:
                    for r in range(nc):
                        if assign[v][r] != image[r]:
                            ok[r] = False
                else:
                    assign[v] = image
                    visited.add(v)
                    stack.append(v)
        total = 0
        for r in range(nc):
            if not ok[r]:
                continue
            prod = 1
            for v, cls in assign.items():
                c = cls[r]
                if v in allowed and c not in allowed[v]:
                    prod = 0
                    break
                prod *= sizes[c]
            total += prod
        result *= Fraction(total, t.order ** len(assign))
    return result


class FugacitySystem:
    """Inclusion-exclusion data for the union of all M~ in a product.

    ``signed_terms`` maps each intersection fugacity q_J to the signed count
    sum of (-1)^(|J|+1) over subsets J with that q_J.
    """

    def __init__(self, g: ProductGroup, cap: int = DEFAULT_EXACT_CAP):
        self.g = g
        self.descriptors = list(g.descriptors)
        m = len(self.descriptors)
        if m > cap:
            raise CapExceeded(f"{m} descriptors exceed exact-mode cap {cap}")
        terms: Counter[Fraction] = Counter()
        self.subset_terms: dict[tuple[int, ...], Fraction] = {}
        for mask in range(1, 1 << m):
            J = tuple(i for i in range(m) if mask >> i & 1)
            q = intersection_fugacity(g, [self.descriptors[i] for i in J])
            self.subset_terms[J] = q
            terms[q] += 1 if len(J) % 2 else -1
        self.signed_terms = {q: c for q, c in sorted(terms.items()) if c}

    def failure_probability(self, t: int) -> Fraction:
        """1 - P_I(G, t): probability that t uniform elements fail to invariably generate."""
        return sum((c * q**t for q, c in self.signed_terms.items()), Fraction(0))

    def chebotarev(self) -> Fraction:
        return sum((Fraction(c) / (1 - q) for q, c in self.signed_terms.items()), Fraction(0))


def exact_chebotarev(g: ProductGroup, cap: int = DEFAULT_EXACT_CAP) -> SeriesValue:
    value = FugacitySystem(g, cap).chebotarev()
    return SeriesValue(value, float(value))


def truncated_chebotarev(g: ProductGroup, T: int, exact_cap: int = DEFAULT_EXACT_CAP) -> SeriesValue:
    """Partial sum over t < T plus a certified bound on the omitted tail.

    Terms are exact when the descriptor count fits ``exact_cap``; otherwise
    each term is replaced by the union bound min(1, sum_d q_d^t), and the
    value is an upper estimate.  The tail bound sum_d q_d^T / (1 - q_d) holds
    in both cases.
    """
    if T < 1:
        raise OutOfRange("T must be >= 1")
    by_q = Counter(d.fugacity_q for d in g.descriptors)
    tail = sum(c * float(q) ** T / (1 - float(q)) for q, c in by_q.items())
    if len(g.descriptors) <= exact_cap:
        system = FugacitySystem(g, exact_cap)
        total = sum((system.failure_probability(t) for t in range(T)), Fraction(0))
        return SeriesValue(None, float(total), tail, "inclusion-exclusion")
    qs = [(float(q), c) for q, c in by_q.items()]
    total = 0.0
    for t in range(T):
        total += min(1.0, sum(c * q**t for q, c in qs))
    return SeriesValue(None, total, tail, "union-bound")


def exact_e1(group: SimpleGroupTable, lattice: SubgroupLattice | None) -> SeriesValue:
    """e1(G) = -sum over proper H of mu(H, G) |G| / (|G| - |H|), by subgroup class."""
    if lattice is None:
        raise LatticeUnavailable(f"no subgroup lattice for {group.name}")
    n = group.order
    total = Fraction(0)
    for cls in lattice.classes:
        if cls.order == n or cls.mobius == 0:
            continue
        total -= cls.mobius * cls.size * Fraction(n, n - cls.order)
    return SeriesValue(total, float(total))


def generation_probability(group: SimpleGroupTable, lattice: SubgroupLattice, t: int) -> Fraction:
    """P(G, t) = sum over H of mu(H, G) (|H|/|G|)^t."""
    n = group.order
    return sum((c.mobius * c.size * Fraction(c.order, n) ** t for c in lattice.classes), Fraction(0))


def _as_fraction(alpha) -> Fraction:
    return alpha if isinstance(alpha, Fraction) else Fraction(alpha)


def lower_bound_series(alpha, k: int, tol: float = 1e-12, exact_max_k: int = 64) -> SeriesValue:
    """sum_{t>=0} 1 - (1 - alpha^-t)^k.

    For k <= ``exact_max_k`` the binomial expansion
    sum_j C(k,j) (-1)^(j+1) / (1 - alpha^-j) gives the exact rational value.
    Otherwise terms are summed in floating point until the tail bound
    k alpha^-T / (1 - 1/alpha) drops below ``tol``.
    """
    a = _as_fraction(alpha)
    if a <= 1:
        raise OutOfRange("alpha must exceed 1")
    if k < 1:
        raise OutOfRange("k must be >= 1")
    if k <= exact_max_k:
        inv = 1 / a
        val = sum(
            (math.comb(k, j) * (1 if j % 2 else -1) / (1 - inv**j) for j in range(1, k + 1)),
            Fraction(0),
        )
        return SeriesValue(val, float(val))
    af = float(a)
    ratio = 1 / af
    total, t = 0.0, 0
    while True:
        tail = k * ratio**t / (1 - ratio)
        if tail < tol:
            break
        total += -math.expm1(k * math.log1p(-(ratio**t))) if t > 0 else 1.0
        t += 1
    return SeriesValue(None, total, tail, "summed")


def _kset_count(r: int, k: int) -> int:
    """Number of permutations of S_r whose cycle type has parts summing to exactly k.

    Dynamic programme over part sizes.  A state is (points used, bitmask of
    reachable subset sums <= k); once k itself is reachable the mask collapses
    to a single marker.  Weights are r!/z_mu for the partial cycle type mu,
    which stay integral because z_mu divides (points used)!.
    """
    full = (1 << (k + 1)) - 1
    hit = 1 << k
    states: dict[tuple[int, int], int] = {(0, 1): math.factorial(r)}
    for part in range(1, r + 1):
        nxt: dict[tuple[int, int], int] = {}
        for (used, sums), w in states.items():
            m, s, weight = 0, sums, w
            while used + part * m <= r:
                key = (used + part * m, hit if s & hit else s)
                nxt[key] = nxt.get(key, 0) + weight
                m += 1
                s = (s | (s << part)) & full
                weight //= part * m
        states = nxt
    return sum(w for (used, sums), w in states.items() if used == r and sums & hit)


def fix_kset_proportion(r: int, k: int, cap: int = DEFAULT_PARTITION_CAP) -> Fraction:
    """Proportion of S_r stabilizing some k-subset setwise."""
    if r < 1 or not 0 <= k <= r:
        raise OutOfRange(f"need 0 <= k <= r, r >= 1 (got r={r}, k={k})")
    if r > cap:
        raise OutOfRange(f"r={r} exceeds partition cap {cap}")
    return Fraction(_kset_count(r, min(k, r - k)), math.factorial(r))


def fix_kset_brute(r: int) -> dict[int, Fraction]:
    """i(r, k) for every k by checking each permutation against each subset."""
    import itertools

    import numpy as np

    perms = np.array(list(itertools.permutations(range(r))), dtype=np.int64).reshape(-1, r)
    subsets = (np.arange(1 << r)[:, None] >> np.arange(r)[None, :]) & 1
    sizes = subsets.sum(axis=1)
    fixes = np.zeros((len(perms), r + 1), dtype=bool)
    for s, size in zip(subsets, sizes):
        # p maps S onto itself iff the indicator of S is invariant under p
        fixes[:, size] |= (s[perms] == s).all(axis=1)
    return {k: Fraction(int(fixes[:, k].sum()), len(perms)) for k in range(r + 1)}


def eft_delta() -> float:
    """The exponent 1 - (1 + ln ln 2)/ln 2 from the k-set fixing asymptotics."""
    return 1 - (1 + math.log(math.log(2))) / math.log(2)


def kset_scaling(r: int, ks: Sequence[int]) -> dict[int, float]:
    """i(r,k) * k^delta * (1 + log2 k)^{3/2}, which the asymptotics keep within constant bounds."""
    d = eft_delta()
    return {k: float(fix_kset_proportion(r, k)) * k**d * (1 + math.log2(k)) ** 1.5 for k in ks}
