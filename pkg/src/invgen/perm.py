"""Permutations, element tables and conjugacy classes.

Permutations act on the right: ``(p * q)[i] == q[p[i]]``, so ``p * q`` means
"apply p, then q".  Conjugation is ``x ** g == g^-1 * x * g``.

Everything above this module talks about group elements through dense integer
indices into an :class:`ElementTable`; raw permutations only appear at the edges
(parsing, serialization, closure).
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, DegreeMismatch

DEFAULT_CLOSURE_CAP = 10**7
# mul tables are n*n int32; above this the table is refused
MUL_TABLE_CAP = 6000

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation: {self.images}")

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, text: str, degree: int) -> "Permutation":
        """Parse cycle notation such as ``"(0 1 2)(3 4)"`` (0-based points)."""
        images = list(range(degree))
        stripped = text.strip()
        if stripped in ("", "()"):
            return cls(tuple(images))
        if _CYCLE_RE.sub("", stripped).strip():
            raise ValueError(f"malformed cycle string: {text!r}")
        seen: set[int] = set()
        for body in _CYCLE_RE.findall(stripped):
            pts = [int(tok) for tok in body.replace(",", " ").split()]
            for p in pts:
                if not 0 <= p < degree:
                    raise ValueError(f"point {p} out of range for degree {degree}")
                if p in seen:
                    raise ValueError(f"point {p} repeated in {text!r}")
                seen.add(p)
            for a, b in zip(pts, pts[1:] + pts[:1]):
                images[a] = b
        return cls(tuple(images))

    @classmethod
    def parse(cls, obj, degree: int) -> "Permutation":
        """Accept either a cycle string or a 0-based image array."""
        if isinstance(obj, str):
            return cls.from_cycles(obj, degree)
        images = tuple(int(v) for v in obj)
        if len(images) != degree:
            raise DegreeMismatch(f"image array of length {len(images)}, expected {degree}")
        return cls(images)

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise DegreeMismatch(f"{self.degree} vs {other.degree}")
        o = other.images
        return Permutation(tuple(o[i] for i in self.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def __pow__(self, g: "Permutation") -> "Permutation":
        return g.inverse() * self * g

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles())) if self.degree else 1

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def __str__(self) -> str:
        parts = ["(" + " ".join(map(str, c)) + ")" for c in self.cycles() if len(c) > 1]
        return "".join(parts) or "()"


def cycle_type(p: Permutation) -> list[int]:
    """Cycle lengths of ``p`` (fixed points included), largest first."""
    return sorted((len(c) for c in p.cycles()), reverse=True)


class ElementTable:
    """A finite permutation group stored as a dense list of its elements.

    Index 0 is always the identity.  The multiplication table is built lazily
    and only for groups up to ``MUL_TABLE_CAP`` elements.
    """

    def __init__(self, elements: list[Permutation], generators: list[int], degree: int):
        self.elements = elements
        self.degree = degree
        self.generators = generators
        self.index_of: dict[tuple[int, ...], int] = {p.images: i for i, p in enumerate(elements)}
        if len(self.index_of) != len(elements):
            raise ValueError("duplicate elements in table")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, p: Permutation) -> int:
        return self.index_of[p.images]

    def __contains__(self, p: Permutation) -> bool:
        return p.images in self.index_of

    @cached_property
    def images_array(self) -> np.ndarray:
        return np.array([p.images for p in self.elements], dtype=np.int64).reshape(self.order, self.degree)

    @cached_property
    def mul(self) -> np.ndarray:
        """``mul[a, b]`` is the index of ``elements[a] * elements[b]``."""
        n, d = self.order, self.degree
        if n > MUL_TABLE_CAP:
            raise CapExceeded(f"multiplication table for {n} elements exceeds cap {MUL_TABLE_CAP}")
        arr = self.images_array
        table = np.empty((n, n), dtype=np.int32)
        if d == 0:
            table[:] = 0
            return table
        if d ** d < 2**62:
            radix = d ** np.arange(d, dtype=np.int64)
            keys = arr @ radix
            order = np.argsort(keys)
            sorted_keys = keys[order]
            for a in range(n):
                composed = arr[:, arr[a]]  # row b holds elements[a] * elements[b]
                table[a] = order[np.searchsorted(sorted_keys, composed @ radix)]
        else:
            for a in range(n):
                composed = arr[:, arr[a]]
                table[a] = [self.index_of[tuple(row)] for row in composed.tolist()]
        return table

    @cached_property
    def inv(self) -> np.ndarray:
        if self.order <= MUL_TABLE_CAP:
            return np.argmin(self.mul, axis=1).astype(np.int32)
        return np.array([self.index(p.inverse()) for p in self.elements], dtype=np.int32)

    @cached_property
    def element_orders(self) -> np.ndarray:
        return np.array([p.order() for p in self.elements], dtype=np.int64)

    def multiply(self, a: int, b: int) -> int:
        if self.order <= MUL_TABLE_CAP:
            return int(self.mul[a, b])
        return self.index(self.elements[a] * self.elements[b])

    def conjugate(self, x: int, g: int) -> int:
        """Index of ``x ** g``."""
        m = self.mul
        return int(m[m[self.inv[g], x], g])

    def closure_mask(self, gens: Iterable[int], stop_above_half: bool = False) -> np.ndarray:
        """Boolean membership mask of the subgroup generated by element indices.

        With ``stop_above_half`` the search stops as soon as more than half of
        the group is reached (Lagrange forces the whole group) and returns the
        all-true mask.
        """
        n = self.order
        mask = np.zeros(n, dtype=bool)
        mask[0] = True
        g = np.unique(np.fromiter(gens, dtype=np.int64))
        g = g[g != 0]
        if g.size == 0:
            return mask
        mul = self.mul
        frontier = np.array([0], dtype=np.int64)
        count = 1
        while frontier.size:
            new = mul[np.ix_(frontier, g)].ravel()
            new = np.unique(new[~mask[new]])
            mask[new] = True
            count += new.size
            if stop_above_half and 2 * count > n:
                mask[:] = True
                return mask
            frontier = new
        return mask


def closure(
    generators: Sequence[Permutation],
    degree: int | None = None,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> ElementTable:
    """Materialize the group generated by ``generators``.

    Elements are listed breadth-first from the identity, trying generators in
    the order given, so the indexing is reproducible.
    """
    gens = list(generators)
    if degree is None:
        if not gens:
            raise DegreeMismatch("degree required for an empty generator list")
        degree = gens[0].degree
    for g in gens:
        if g.degree != degree:
            raise DegreeMismatch(f"generator of degree {g.degree}, expected {degree}")
    ident = Permutation.identity(degree)
    elements = [ident]
    index_of = {ident.images: 0}
    gen_images = [g.images for g in gens]
    queue = deque([ident.images])
    while queue:
        cur = queue.popleft()
        for gi in gen_images:
            nxt = tuple(gi[i] for i in cur)
            if nxt not in index_of:
                if len(elements) >= cap:
                    raise CapExceeded(f"closure exceeds {cap} elements")
                index_of[nxt] = len(elements)
                elements.append(Permutation(nxt))
                queue.append(nxt)
    gen_idx = [index_of[g.images] for g in gens]
    return ElementTable(elements, gen_idx, degree)


@dataclass
class ClassData:
    class_of: np.ndarray
    class_sizes: list[int]
    centralizer_orders: list[int]
    class_reps: list[int]
    element_orders: list[int]
    members: list[np.ndarray] = field(repr=False)

    @property
    def num_classes(self) -> int:
        return len(self.class_sizes)


def conjugacy_classes(table: ElementTable) -> ClassData:
    """Partition the group into conjugacy classes.

    Classes are numbered by their smallest element index, so class 0 is the
    identity class.  Orbits are grown by conjugating with the table's
    generators only.
    """
    n = table.order
    gens = table.generators or [0]
    class_of = np.full(n, -1, dtype=np.int64)
    sizes, reps, orders, members = [], [], [], []
    if n <= MUL_TABLE_CAP:
        conj = table.conjugate
    else:
        def conj(x: int, g: int) -> int:
            return table.index(table.elements[x] ** table.elements[g])
    for x in range(n):
        if class_of[x] >= 0:
            continue
        cid = len(sizes)
        class_of[x] = cid
        orbit = [x]
        queue = deque([x])
        while queue:
            y = queue.popleft()
            for g in gens:
                z = conj(y, g)
                if class_of[z] < 0:
                    class_of[z] = cid
                    orbit.append(z)
                    queue.append(z)
        sizes.append(len(orbit))
        reps.append(x)
        orders.append(int(table.elements[x].order()))
        members.append(np.array(sorted(orbit), dtype=np.int64))
    return ClassData(
        class_of=class_of,
        class_sizes=sizes,
        centralizer_orders=[n // s for s in sizes],
        class_reps=reps,
        element_orders=orders,
        members=members,
    )


def make_stream(seed: int, *key: int) -> np.random.Generator:
    """Random stream for ``seed`` and an optional spawn key (e.g. a trial index).

    The key is mixed in through :class:`numpy.random.SeedSequence`, so the
    stream for a given (seed, key) does not depend on scheduling.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def uniform_element(table: ElementTable, stream: np.random.Generator) -> int:
    return int(stream.integers(0, table.order))


def extend_homomorphism(
    table: ElementTable,
    src: Sequence[int],
    dst: Sequence[int],
    target: ElementTable | None = None,
) -> dict[int, int] | None:
    """Try to extend ``src[i] -> dst[i]`` to a homomorphism on ``<src>``.

    Walks the subgroup generated by the pairs ``(src[i], dst[i])`` and
    returns the element map if that subgroup is the graph of a function,
    otherwise ``None``.
    """
    target = table if target is None else target
    mul_s, mul_t = table.mul, target.mul
    image = {0: 0}
    queue = deque([0])
    pairs = list(zip((int(s) for s in src), (int(d) for d in dst)))
    while queue:
        x = queue.popleft()
        y = image[x]
        for s, d in pairs:
            xs = int(mul_s[x, s])
            yd = int(mul_t[y, d])
            prev = image.get(xs)
            if prev is None:
                image[xs] = yd
                queue.append(xs)
            elif prev != yd:
                return None
    return image
