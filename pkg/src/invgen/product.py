"""Direct products of atlas groups, handled class by class.

A product ``T1^k1 x ... x Tr^kr`` is never materialized.  Its maximal
subgroups are either of product type (one coordinate restricted to a maximal
subgroup of its factor) or of diagonal type (two coordinates with the same
factor linked by an automorphism).  Up to conjugacy a diagonal subgroup only
depends on the automorphism modulo inner ones, and the union of its
conjugates is described by the induced permutation of classes.  So membership
of an element in any union-of-conjugates set only depends on the tuple of
factor classes of its coordinates (its class signature).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .atlas import SimpleGroupTable, get_group
from .errors import CapExceeded, SchemaError
from .lattice import (
    DEFAULT_LATTICE_CAP,
    MaximalClassData,
    group_maximals,
    simple_invariants,
    subgroup_lattice,
)
from .perm import extend_homomorphism

ProductElement = tuple[int, ...]
ClassSignature = tuple[int, ...]

# |Aut(T)| * |T| entries; above this the generation tracker falls back to pairwise checks
AUT_TABLE_CAP = 2 * 10**7

_TOKEN_RE = re.compile(r"^\s*(?P<name>[^\^]+?)\s*(?:\^\s*(?P<mult>\d+))?\s*$")


@dataclass
class Factor:
    group: SimpleGroupTable
    multiplicity: int
    maximals: list[MaximalClassData] = field(default_factory=list, repr=False)

    @property
    def name(self) -> str:
        return self.group.name


@dataclass(frozen=True)
class MaximalDescriptor:
    kind: str  # "product" or "diagonal"
    coords: tuple[int, ...]
    label: int  # maximal-class index (product) or Out-coset index (diagonal)
    fugacity_q: Fraction
    index_n: int
    class_size: int  # number of maximal subgroups in this conjugacy class
    mtilde_classes: frozenset[int] | None = None
    action: tuple[int, ...] | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "coordinates": list(self.coords),
            ("maximal_class" if self.kind == "product" else "out_coset"): self.label,
            "index_n": str(self.index_n),
            "class_size": str(self.class_size),
            "q": f"{self.fugacity_q.numerator}/{self.fugacity_q.denominator}",
        }


class ProductGroup:
    def __init__(self, factors: list[Factor]):
        if not factors:
            raise ValueError("empty product")
        self.factors = factors
        self.coordinates: list[int] = []
        for fi, f in enumerate(factors):
            if f.multiplicity < 1:
                raise ValueError("multiplicities must be >= 1")
            self.coordinates.extend([fi] * f.multiplicity)
        self.iso_pairs = [
            (i, j)
            for i in range(self.k)
            for j in range(i + 1, self.k)
            if self.coordinates[i] == self.coordinates[j]
        ]

    @property
    def k(self) -> int:
        return len(self.coordinates)

    @property
    def order(self) -> int:
        return math.prod(f.group.order ** f.multiplicity for f in self.factors)

    def table(self, coord: int) -> SimpleGroupTable:
        return self.factors[self.coordinates[coord]].group

    def maximals(self, coord: int) -> list[MaximalClassData]:
        return self.factors[self.coordinates[coord]].maximals

    @property
    def name(self) -> str:
        return "x".join(f.name + (f"^{f.multiplicity}" if f.multiplicity > 1 else "") for f in self.factors)

    @cached_property
    def descriptors(self) -> list[MaximalDescriptor]:
        return maximal_descriptors(self)


def parse_product_spec(text: str) -> list[tuple[str, int]]:
    """``"A5^2xPSL(2,7)"`` -> ``[("A5", 2), ("PSL(2,7)", 1)]``."""
    tokens, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "xX" and depth == 0:
            tokens.append(cur)
            cur = ""
        else:
            cur += ch
    tokens.append(cur)
    out = []
    for tok in tokens:
        m = _TOKEN_RE.match(tok)
        if not m or not m.group("name").strip():
            raise SchemaError("spec", f"cannot parse factor {tok!r} in {text!r}")
        out.append((m.group("name").strip(), int(m.group("mult") or 1)))
    return out


def build_product(spec: Sequence[tuple[str, int]] | str, lattice_cap: int = DEFAULT_LATTICE_CAP) -> ProductGroup:
    """Resolve atlas names; repeated names are merged into one factor."""
    if isinstance(spec, str):
        spec = parse_product_spec(spec)
    merged: dict[str, Factor] = {}
    for name, mult in spec:
        if mult < 1:
            raise ValueError("multiplicities must be >= 1")
        group = get_group(name)
        if group.name in merged:
            merged[group.name].multiplicity += mult
        else:
            merged[group.name] = Factor(group, mult, group_maximals(group, lattice_cap))
    return ProductGroup(list(merged.values()))


def product_from_groups(parts: Sequence[tuple[SimpleGroupTable, int]], maximals=None) -> ProductGroup:
    """Build a product from already-built groups (e.g. user-supplied tables)."""
    factors = []
    for gi, (group, mult) in enumerate(parts):
        mx = maximals[gi] if maximals is not None else group_maximals(group)
        factors.append(Factor(group, mult, mx))
    return ProductGroup(factors)


def _diagonal_fugacity(group: SimpleGroupTable) -> Fraction:
    return Fraction(sum(s * s for s in group.classes.class_sizes), group.order**2)


def maximal_descriptors(g: ProductGroup) -> list[MaximalDescriptor]:
    out = []
    for i in range(g.k):
        for mi, m in enumerate(g.maximals(i)):
            out.append(
                MaximalDescriptor(
                    "product", (i,), mi, m.fugacity_q, m.index_n, m.class_size, mtilde_classes=m.mtilde_class_mask
                )
            )
    for i, j in g.iso_pairs:
        t = g.table(i)
        q = _diagonal_fugacity(t)
        for oi, act in enumerate(t.out_class_actions):
            out.append(MaximalDescriptor("diagonal", (i, j), oi, q, t.order, t.order, action=act.perm_of_classes))
    return out


def m_n_from_descriptors(g: ProductGroup) -> dict[int, int]:
    """Number of maximal subgroups of each index, counted descriptor by descriptor."""
    table: dict[int, int] = {}
    for d in g.descriptors:
        table[d.index_n] = table.get(d.index_n, 0) + d.class_size
    return dict(sorted(table.items()))


def m_n_formula(g: ProductGroup) -> dict[int, int]:
    """Closed-form count: sum of k_i m_n(T_i) over factors with index-n maximals,
    plus C(k_i, 2) |Aut(T_i)| over factors of order n."""
    table: dict[int, int] = {}
    for f in g.factors:
        inv = simple_invariants(f.group, f.maximals)
        for n, m in inv.m_n_table.items():
            table[n] = table.get(n, 0) + f.multiplicity * m
        if f.multiplicity >= 2:
            n = f.group.order
            table[n] = table.get(n, 0) + math.comb(f.multiplicity, 2) * f.group.aut_order
    return dict(sorted(table.items()))


def class_signature(g: ProductGroup, x: ProductElement) -> ClassSignature:
    return tuple(int(g.table(i).classes.class_of[c]) for i, c in enumerate(x))


def in_mtilde(sig: ClassSignature, d: MaximalDescriptor) -> bool:
    if d.kind == "product":
        return sig[d.coords[0]] in d.mtilde_classes
    i, j = d.coords
    return d.action[sig[i]] == sig[j]


def invariably_generates(g: ProductGroup, xs: Sequence[ProductElement]) -> bool:
    """No union-of-conjugates set of a maximal subgroup contains every element of ``xs``."""
    if not xs:
        raise ValueError("xs must be non-empty")
    sigs = [class_signature(g, x) for x in xs]
    return all(any(not in_mtilde(s, d) for s in sigs) for d in g.descriptors)


def generates(g: ProductGroup, xs: Sequence[ProductElement]) -> bool:
    """Element-level generation test.

    Each coordinate projection must generate its factor, and no pair of
    coordinates with the same factor may be linked by an automorphism
    (checked by trying to extend the coordinate map to a homomorphism).
    """
    if not xs:
        raise ValueError("xs must be non-empty")
    for i in range(g.k):
        t = g.table(i).table
        if not t.closure_mask([x[i] for x in xs], stop_above_half=True).all():
            return False
    buckets: dict[tuple, list[int]] = {}
    for i in range(g.k):
        t = g.table(i).table
        key = (g.coordinates[i], tuple(int(t.element_orders[x[i]]) for x in xs))
        buckets.setdefault(key, []).append(i)
    for coords in buckets.values():
        for a in range(len(coords)):
            for b in range(a + 1, len(coords)):
                i, j = coords[a], coords[b]
                t = g.table(i).table
                if extend_homomorphism(t, [x[i] for x in xs], [x[j] for x in xs]) is not None:
                    return False
    return True


def uniform_product_element(g: ProductGroup, stream: np.random.Generator) -> ProductElement:
    orders = np.array([g.table(i).order for i in range(g.k)])
    return tuple(int(v) for v in stream.integers(0, orders))


# --- vectorized trackers used by the Monte Carlo engine -------------------


def _maximal_membership(group: SimpleGroupTable, lattice_cap: int = DEFAULT_LATTICE_CAP) -> np.ndarray:
    """Boolean (|T|, #maximal subgroups) matrix: element lies in subgroup."""
    lat = subgroup_lattice(group, lattice_cap)
    rows = [lat.classes[c].is_maximal for c in lat.class_of_subgroup]
    return np.ascontiguousarray(lat.masks[np.array(rows)].T)


def automorphism_table(group: SimpleGroupTable) -> np.ndarray:
    """All automorphisms as rows of element images, shape (|Aut|, |T|)."""
    n = group.order
    if group.aut_order * n > AUT_TABLE_CAP:
        raise CapExceeded(f"automorphism table of {group.aut_order} x {n} exceeds cap")
    t = group.table
    allg = np.arange(n)
    conj = t.mul[t.mul[t.inv[:, None], allg[None, :]], allg[:, None]]  # conj[g, y] = y ** g
    return np.concatenate([conj[:, rep] for rep in group.out_reps]).astype(np.int32)


class _Block:
    """Coordinates of one factor inside a product, with per-draw tracking state."""

    def __init__(self, g: ProductGroup, fi: int, mode: str):
        f = g.factors[fi]
        self.group = f.group
        self.k = f.multiplicity
        self.coords = [i for i, c in enumerate(g.coordinates) if c == fi]
        iu, ju = np.triu_indices(self.k, 1)
        self.pi, self.pj = iu, ju
        self.mode = mode
        t = f.group
        self.class_of = np.asarray(t.classes.class_of)
        if mode == "invariable":
            nc = t.classes.num_classes
            self.masks = np.zeros((nc, len(f.maximals)), dtype=bool)  # masks[c, m]: class c in M~_m
            for mi, m in enumerate(f.maximals):
                self.masks[list(m.mtilde_class_mask), mi] = True
            self.actions = np.array([a.perm_of_classes for a in t.out_class_actions], dtype=np.int64)
        else:
            self.memb = _maximal_membership(t)
            self.aut = automorphism_table(t) if self.k > 1 and t.aut_order * t.order <= AUT_TABLE_CAP else None
        self.reset()

    def reset(self):
        if self.mode == "invariable":
            self.alive_prod = np.ones((self.k, self.masks.shape[1]), dtype=bool)
            self.alive_diag = np.ones((len(self.pi), self.actions.shape[0]), dtype=bool)
        else:
            self.alive_prod = np.ones((self.k, self.memb.shape[1]), dtype=bool)
            if self.aut is not None:
                self.alive_diag = np.ones((len(self.pi), self.aut.shape[0]), dtype=bool)
            else:
                self.history: list[np.ndarray] = []
                self.alive_diag = np.ones((len(self.pi), 1), dtype=bool)

    def add(self, comps: np.ndarray) -> bool:
        """Record one more element (this block's components); True once the block is done."""
        if self.mode == "invariable":
            cls = self.class_of[comps]
            self.alive_prod &= self.masks[cls]
            if len(self.pi):
                mapped = self.actions[:, cls[self.pi]]  # (out, pairs)
                self.alive_diag &= (mapped == cls[self.pj]).T
        else:
            self.alive_prod &= self.memb[comps]
            if len(self.pi):
                if self.aut is not None:
                    self.alive_diag &= (self.aut[:, comps[self.pi]] == comps[self.pj]).T
                else:
                    self.history.append(comps.copy())
        if self.alive_prod.any():
            return False
        if self.mode != "invariable" and self.aut is None and len(self.pi):
            return self._pairwise_done()
        return not self.alive_diag.any()

    def _pairwise_done(self) -> bool:
        t = self.group.table
        hist = np.array(self.history)
        alive = np.flatnonzero(self.alive_diag[:, 0])
        for p in alive:
            i, j = self.pi[p], self.pj[p]
            if extend_homomorphism(t, hist[:, i], hist[:, j]) is None:
                self.alive_diag[p, 0] = False
        return not self.alive_diag.any()


class Tracker:
    """Incremental (invariable) generation test for a stream of product elements."""

    def __init__(self, g: ProductGroup, mode: str):
        if mode not in ("generation", "invariable"):
            raise ValueError(f"unknown mode {mode!r}")
        self.g = g
        self.blocks = [_Block(g, fi, mode) for fi in range(len(g.factors))]
        self.orders = np.array([g.table(i).order for i in range(g.k)])
        self.reset()

    def reset(self):
        for b in self.blocks:
            b.reset()
        self.pending = list(range(len(self.blocks)))

    def add(self, x: np.ndarray) -> bool:
        still = []
        for bi in self.pending:
            b = self.blocks[bi]
            if not b.add(x[b.coords]):
                still.append(bi)
        self.pending = still
        return not still
