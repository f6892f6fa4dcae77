"""Subgroup lattices of small simple groups and the invariants read off them.

Subgroups are found by joining class representatives with cyclic subgroups of
prime-power order until nothing new appears.  Every subgroup is generated by
elements of prime-power order, so this reaches the whole lattice; whole
conjugacy classes are registered at once so only one representative per class
is ever extended.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np

from .atlas import SimpleGroupTable
from .errors import CapExceeded, SchemaError
from .perm import Permutation, closure

DEFAULT_LATTICE_CAP = 3000
BOSTON_SHALEV_DELTA = Fraction(16, 1000)
# alpha_0 with alpha > 1 + alpha_0 <=> delta > 0.016
BOSTON_SHALEV_ALPHA0 = BOSTON_SHALEV_DELTA / (1 - BOSTON_SHALEV_DELTA)


@dataclass
class SubgroupRecord:
    members: tuple[int, ...]
    order: int
    class_id: int
    is_maximal: bool
    mobius: int
    class_size: int


@dataclass
class SubgroupClass:
    class_id: int
    rep: np.ndarray  # sorted member indices of the representative
    gens: list[int]
    order: int
    size: int  # number of conjugates
    mobius: int = 0
    is_maximal: bool = False
    trusted: bool = False


@dataclass
class SubgroupLattice:
    group: SimpleGroupTable
    classes: list[SubgroupClass]
    masks: np.ndarray = field(repr=False)  # one row per subgroup, all conjugates included
    class_of_subgroup: np.ndarray = field(repr=False)

    def records(self) -> list[SubgroupRecord]:
        out = []
        for row, cid in zip(self.masks, self.class_of_subgroup):
            c = self.classes[cid]
            out.append(
                SubgroupRecord(
                    members=tuple(int(i) for i in np.flatnonzero(row)),
                    order=c.order,
                    class_id=int(cid),
                    is_maximal=c.is_maximal,
                    mobius=c.mobius,
                    class_size=c.size,
                )
            )
        return out

    @property
    def maximal(self) -> list[SubgroupClass]:
        return [c for c in self.classes if c.is_maximal]


def _cyclic_subgroups(group: SimpleGroupTable):
    """Map each element to the id of the cyclic subgroup it generates."""
    table = group.table
    mul = table.mul
    n = table.order
    cyc_id = np.full(n, -1, dtype=np.int64)
    cyclic: list[np.ndarray] = []
    key_to_id: dict[bytes, int] = {}
    for g in range(n):
        powers = [0]
        x = g
        while x != 0:
            powers.append(x)
            x = int(mul[x, g])
        members = np.array(sorted(powers), dtype=np.int64)
        key = members.tobytes()
        cid = key_to_id.get(key)
        if cid is None:
            cid = key_to_id[key] = len(cyclic)
            cyclic.append(members)
        cyc_id[g] = cid
    return cyc_id, cyclic


def _subgroup_classes(group: SimpleGroupTable, cap: int) -> SubgroupLattice:
    table = group.table
    n = table.order
    if n > cap:
        raise CapExceeded(f"|G| = {n} exceeds lattice cap {cap}")
    mul, inv = table.mul, table.inv
    allg = np.arange(n)
    orders = table.element_orders

    known: dict[bytes, int] = {}
    masks: list[np.ndarray] = []
    class_of_sub: list[int] = []
    classes: list[SubgroupClass] = []

    def register(mask: np.ndarray, gens: list[int]) -> None:
        key = np.packbits(mask).tobytes()
        if key in known:
            return
        cid = len(classes)
        orbit = [mask]
        known[key] = len(masks)
        masks.append(mask)
        class_of_sub.append(cid)
        i = 0
        while i < len(orbit):
            members = np.flatnonzero(orbit[i])
            for g in table.generators:
                conj = np.zeros(n, dtype=bool)
                conj[mul[mul[inv[g], members], g]] = True
                k = np.packbits(conj).tobytes()
                if k not in known:
                    known[k] = len(masks)
                    masks.append(conj)
                    class_of_sub.append(cid)
                    orbit.append(conj)
            i += 1
        rep = np.flatnonzero(mask)
        classes.append(SubgroupClass(cid, rep, gens, len(rep), len(orbit)))

    cyc_id, cyclic = _cyclic_subgroups(group)
    prime_power = [int(np.flatnonzero(cyc_id == c)[-1]) for c in range(len(cyclic))]
    prime_power = [g for g in prime_power if _is_prime_power(int(orders[g]))]

    register(np.eye(1, n, 0, dtype=bool)[0], [])
    for g in prime_power:
        mask = np.zeros(n, dtype=bool)
        mask[cyclic[cyc_id[g]]] = True
        register(mask, [g])

    done = 0
    while done < len(classes):
        cls = classes[done]
        done += 1
        if cls.order == n:
            continue
        rep = cls.rep
        rep_mask = np.zeros(n, dtype=bool)
        rep_mask[rep] = True
        conj_all = mul[mul[inv[:, None], rep[None, :]], allg[:, None]]  # row g: rep ** g
        normalizer = np.flatnonzero(rep_mask[conj_all].all(axis=1))
        seen = np.zeros(len(cyclic), dtype=bool)
        for g in prime_power:
            c = cyc_id[g]
            if seen[c] or rep_mask[g]:
                continue
            seen[cyc_id[mul[mul[inv[normalizer], g], normalizer]]] = True
            joined = table.closure_mask(cls.gens + [g], stop_above_half=True)
            register(joined, cls.gens + [g])

    all_masks = np.array(masks)
    class_arr = np.array(class_of_sub, dtype=np.int64)
    return SubgroupLattice(group, classes, all_masks, class_arr)


def _is_prime_power(m: int) -> bool:
    if m == 1:
        return False
    p = next(d for d in range(2, m + 1) if m % d == 0)
    while m % p == 0:
        m //= p
    return m == 1


def _mobius_and_maximality(lat: SubgroupLattice) -> None:
    n = lat.group.order
    orders = np.array([lat.classes[c].order for c in lat.class_of_subgroup])
    for cls in sorted(lat.classes, key=lambda c: -c.order):
        if cls.order == n:
            cls.mobius = 1
            continue
        above = lat.masks[:, cls.rep].all(axis=1) & (orders > cls.order)
        cids = lat.class_of_subgroup[above]
        cls.mobius = -sum(lat.classes[c].mobius for c in cids)
        cls.is_maximal = bool(np.all(orders[above] == n))


@lru_cache(maxsize=None)
def _lattice_cached(group: SimpleGroupTable, cap: int) -> SubgroupLattice:
    lat = _subgroup_classes(group, cap)
    _mobius_and_maximality(lat)
    return lat


def subgroup_lattice(group: SimpleGroupTable, cap: int = DEFAULT_LATTICE_CAP) -> SubgroupLattice:
    """Full lattice of ``group``, grouped into conjugacy classes with Möbius values."""
    return _lattice_cached(group, cap)


def enumerate_subgroups(group: SimpleGroupTable, cap: int = DEFAULT_LATTICE_CAP) -> list[SubgroupRecord]:
    return subgroup_lattice(group, cap).records()


@dataclass
class MaximalClassData:
    rep: SubgroupClass
    index_n: int
    mtilde_class_mask: frozenset[int]
    mtilde_size: int
    fugacity_q: Fraction

    @property
    def order(self) -> int:
        return self.rep.order

    @property
    def class_size(self) -> int:
        return self.rep.size


def union_of_conjugates(group: SimpleGroupTable, members) -> tuple[frozenset[int], int]:
    """Classes covered by the union of all conjugates of a subgroup, and its size.

    A class meets the subgroup iff it lies in the union of the conjugates, so
    the classes of the members are exactly the covered ones.
    """
    cls = group.classes
    mask = frozenset(int(c) for c in np.unique(cls.class_of[np.asarray(members, dtype=np.int64)]))
    return mask, sum(cls.class_sizes[c] for c in mask)


def maximal_classes(lattice: SubgroupLattice | list[SubgroupClass], group: SimpleGroupTable) -> list[MaximalClassData]:
    reps = lattice.maximal if isinstance(lattice, SubgroupLattice) else [c for c in lattice if c.is_maximal]
    out = []
    for rep in reps:
        mask, size = union_of_conjugates(group, rep.rep)
        out.append(MaximalClassData(rep, group.order // rep.order, mask, size, Fraction(size, group.order)))
    out.sort(key=lambda m: (m.index_n, m.mtilde_size, tuple(m.rep.rep[:8])))
    return out


@lru_cache(maxsize=None)
def _maximals_cached(group: SimpleGroupTable, cap: int) -> tuple[MaximalClassData, ...]:
    return tuple(maximal_classes(subgroup_lattice(group, cap), group))


def group_maximals(group: SimpleGroupTable, cap: int = DEFAULT_LATTICE_CAP) -> list[MaximalClassData]:
    """Maximal classes of an atlas group, computed once per process."""
    return list(_maximals_cached(group, cap))


@dataclass
class SimpleInvariants:
    l: int
    delta: Fraction
    alpha: Fraction
    m_n_table: dict[int, int]
    script_M: float
    mntilde_table: dict[int, int]
    attaining: list[int]  # indices into the maximal-class list that realize delta


def simple_invariants(group: SimpleGroupTable, maximals: list[MaximalClassData]) -> SimpleInvariants:
    if not maximals:
        raise ValueError("no maximal classes")
    l = min(m.index_n for m in maximals)
    delta = min(1 - m.fugacity_q for m in maximals)
    alpha = 1 / (1 - delta)
    m_n: dict[int, int] = {}
    for m in maximals:
        m_n[m.index_n] = m_n.get(m.index_n, 0) + m.class_size
    script_M = max(math.log(v) / math.log(k) for k, v in m_n.items() if k >= 2)
    mnt: dict[int, int] = {}
    for m in maximals:
        b = group.order // m.mtilde_size
        mnt[b] = mnt.get(b, 0) + 1
    attaining = [i for i, m in enumerate(maximals) if 1 - m.fugacity_q == delta]
    return SimpleInvariants(l, delta, alpha, dict(sorted(m_n.items())), script_M, dict(sorted(mnt.items())), attaining)


def frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def maximals_to_json(group: SimpleGroupTable, maximals: list[MaximalClassData]) -> list[dict[str, Any]]:
    rows = []
    elems = group.table.elements
    for m in maximals:
        rows.append(
            {
                "order": m.order,
                "index": m.index_n,
                "class_size": m.class_size,
                "mtilde_size": m.mtilde_size,
                "q": frac_str(m.fugacity_q),
                "mtilde_classes": sorted(m.mtilde_class_mask),
                "generators": [list(elems[g].images) for g in m.rep.gens],
                "trusted": m.rep.trusted,
            }
        )
    return rows


def load_maximal_classes(group: SimpleGroupTable, rows: list[dict[str, Any]]) -> list[MaximalClassData]:
    """Import maximal-class data for groups beyond the lattice cap.

    Each row needs ``generators`` (image arrays); the generated subgroup is
    checked to be proper and, when given, to have the stated order.  Maximality
    is taken on trust.
    """
    table = group.table
    out = []
    for i, row in enumerate(rows):
        if "generators" not in row:
            raise SchemaError(f"[{i}].generators")
        perms = [Permutation.parse(p, table.degree) for p in row["generators"]]
        if any(p not in table for p in perms):
            raise SchemaError(f"[{i}].generators", "generator outside the group")
        sub = closure(perms, table.degree)
        order = sub.order
        if "order" in row and row["order"] != order:
            raise SchemaError(f"[{i}].order", f"generators give order {order}")
        if order == table.order or table.order % order:
            raise SchemaError(f"[{i}]", "not a proper subgroup")
        members = np.array(sorted(table.index(p) for p in sub.elements), dtype=np.int64)
        conj_count = row.get("class_size", table.order // order)
        rep = SubgroupClass(i, members, [table.index(p) for p in perms], order, conj_count, is_maximal=True, trusted=True)
        mask, size = union_of_conjugates(group, members)
        out.append(MaximalClassData(rep, table.order // order, mask, size, Fraction(size, table.order)))
    return out
