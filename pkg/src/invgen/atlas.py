"""Shipped small simple groups and their automorphism data.

An atlas entry is a JSON document::

    {"name": "A5", "degree": 5,
     "generators": ["(0 1 2 3 4)", "(0 1 2)"],
     "expected_order": 60, "aut_order": 120,
     "aut_generators": [[[1, 0, 2, 4, 3], [1, 0, 3, 2, 4]]]}

Each ``aut_generators`` item lists the images of the group generators under one
automorphism, in the same order as ``generators``.  Images are permutations of
the same degree (cycle strings are accepted too).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import (
    AutTooLarge,
    NotAnAutomorphism,
    NotSimple,
    OrderMismatch,
    SchemaError,
    UnknownGroup,
)
from .perm import (
    ClassData,
    ElementTable,
    Permutation,
    closure,
    conjugacy_classes,
    extend_homomorphism,
)

ATLAS_ENV = "LAB_ATLAS_DIR"


@dataclass
class AtlasEntry:
    name: str
    degree: int
    generators: list[Permutation]
    expected_order: int | None = None
    aut_order: int | None = None
    aut_generators: list[list[Permutation]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "name": self.name,
            "degree": self.degree,
            "generators": [str(g) for g in self.generators],
        }
        if self.expected_order is not None:
            doc["expected_order"] = self.expected_order
        if self.aut_order is not None:
            doc["aut_order"] = self.aut_order
        doc["aut_generators"] = [[list(p.images) for p in aut] for aut in self.aut_generators]
        return doc


@dataclass(frozen=True)
class ClassAction:
    perm_of_classes: tuple[int, ...]
    coset_label: str

    def __call__(self, c: int) -> int:
        return self.perm_of_classes[c]

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.perm_of_classes))


@dataclass
class SimpleGroupTable:
    entry: AtlasEntry
    table: ElementTable
    classes: ClassData
    out_class_actions: list[ClassAction]
    aut_order: int
    # one automorphism per Out-coset, as an element-index map, aligned with out_class_actions
    out_reps: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def name(self) -> str:
        return self.entry.name

    @property
    def order(self) -> int:
        return self.table.order

    @property
    def out_order(self) -> int:
        return len(self.out_class_actions)

    def __hash__(self) -> int:
        return id(self)

    def __eq__(self, other) -> bool:
        return self is other


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SchemaError(f"{path}{key}")
    val = doc[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise SchemaError(f"{path}{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def load_entry(source: dict | str | Path) -> AtlasEntry:
    """Parse an atlas document (a dict, a JSON string, or a path to a JSON file)."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        source = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        source = json.loads(source)
    doc = source
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    name = _require(doc, "name", str, "")
    degree = _require(doc, "degree", int, "")
    gens_raw = _require(doc, "generators", list, "")

    def perm(obj, path):
        try:
            return Permutation.parse(obj, degree)
        except Exception as exc:
            raise SchemaError(path, str(exc)) from None

    gens = [perm(g, f"generators[{i}]") for i, g in enumerate(gens_raw)]
    expected = doc.get("expected_order")
    aut_order = doc.get("aut_order")
    for key, val in (("expected_order", expected), ("aut_order", aut_order)):
        if val is not None and (not isinstance(val, int) or isinstance(val, bool)):
            raise SchemaError(key, "expected integer")
    auts_raw = doc.get("aut_generators", [])
    if not isinstance(auts_raw, list):
        raise SchemaError("aut_generators", "expected list")
    auts = []
    for i, aut in enumerate(auts_raw):
        if not isinstance(aut, list) or len(aut) != len(gens):
            raise SchemaError(f"aut_generators[{i}]", "expected one image per generator")
        auts.append([perm(p, f"aut_generators[{i}][{j}]") for j, p in enumerate(aut)])
    return AtlasEntry(name, degree, gens, expected, aut_order, auts)


def simplicity_check(table: ElementTable, classes: ClassData) -> bool:
    """True iff the normal closure of every nonidentity class is the whole group."""
    n = table.order
    for c in range(1, classes.num_classes):
        if not table.closure_mask(classes.members[c], stop_above_half=True).all():
            return False
    return n > 1


def _aut_map(group_table: ElementTable, images: Sequence[Permutation], index: int) -> np.ndarray:
    try:
        dst = [group_table.index(p) for p in images]
    except KeyError:
        raise NotAnAutomorphism(index, "an image lies outside the group") from None
    image = extend_homomorphism(group_table, group_table.generators, dst)
    if image is None or len(image) != group_table.order:
        raise NotAnAutomorphism(index)
    amap = np.empty(group_table.order, dtype=np.int64)
    for x, y in image.items():
        amap[x] = y
    if len(np.unique(amap)) != group_table.order:
        raise NotAnAutomorphism(index, "not injective")
    return amap


def _class_action_of_map(classes: ClassData, amap: np.ndarray, label: str) -> ClassAction:
    perm = tuple(int(classes.class_of[amap[r]]) for r in classes.class_reps)
    return ClassAction(perm, label)


def is_inner(table: ElementTable, amap: np.ndarray) -> bool:
    """Does the automorphism agree with conjugation by some element on the generators?"""
    mul, inv = table.mul, table.inv
    allg = np.arange(table.order)
    hit = np.ones(table.order, dtype=bool)
    for s in table.generators:
        conj = mul[mul[inv, s], allg]  # s ** g for every g
        hit &= conj == amap[s]
    return bool(hit.any())


def automorphism_class_action(group: SimpleGroupTable, aut: Sequence[Permutation], label: str = "") -> ClassAction:
    amap = _aut_map(group.table, aut, 0)
    return _class_action_of_map(group.classes, amap, label)


def build_group(entry: AtlasEntry) -> SimpleGroupTable:
    """Materialize an atlas entry and validate it.

    The Out-group is generated from the stored automorphisms.  Two
    automorphisms with equal class actions must differ by an inner one; this is
    verified, so an outer automorphism acting trivially on classes is reported
    rather than silently merged.
    """
    table = closure(entry.generators, entry.degree)
    if entry.expected_order is not None and table.order != entry.expected_order:
        raise OrderMismatch(f"{entry.name}: closure has order {table.order}, expected {entry.expected_order}")
    classes = conjugacy_classes(table)
    if classes.num_classes == table.order:
        raise NotSimple(f"{entry.name}: group is abelian")
    if not simplicity_check(table, classes):
        raise NotSimple(f"{entry.name}: group has a proper nontrivial normal subgroup")

    ident = np.arange(table.order, dtype=np.int64)
    gen_maps = [_aut_map(table, aut, i) for i, aut in enumerate(entry.aut_generators)]
    reps = [ident]
    actions = [ClassAction(tuple(range(classes.num_classes)), "id")]
    by_action = {actions[0].perm_of_classes: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for r in frontier:
            for gi, gmap in enumerate(gen_maps):
                composed = gmap[reps[r]]  # apply reps[r], then the generator
                label = f"a{gi}" if r == 0 else f"{actions[r].coset_label}*a{gi}"
                act = _class_action_of_map(classes, composed, label)
                known = by_action.get(act.perm_of_classes)
                if known is not None:
                    diff = composed[np.argsort(reps[known])]  # composed o reps[known]^-1
                    if not is_inner(table, diff):
                        raise NotAnAutomorphism(gi, "outer automorphism acting trivially on classes is unsupported")
                    continue
                by_action[act.perm_of_classes] = len(reps)
                nxt.append(len(reps))
                reps.append(composed)
                actions.append(act)
        frontier = nxt

    aut_order = table.order * len(actions)
    if entry.aut_order is not None and entry.aut_order != aut_order:
        raise OrderMismatch(f"{entry.name}: inferred |Aut| = {aut_order}, declared {entry.aut_order}")
    if aut_order > table.order**2:
        raise AutTooLarge(f"{entry.name}: |Aut| = {aut_order} exceeds |T|^2")
    return SimpleGroupTable(entry, table, classes, actions, aut_order, reps)


def atlas_dir() -> Path:
    override = os.environ.get(ATLAS_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("invgen") / "atlas_data"))


def load_atlas(directory: Path | None = None) -> dict[str, AtlasEntry]:
    directory = atlas_dir() if directory is None else Path(directory)
    out = {}
    for path in sorted(directory.glob("*.json")):
        entry = load_entry(path)
        out[entry.name] = entry
    return out


def _normalize(name: str) -> str:
    return name.replace(" ", "").upper()


def resolve_name(name: str, directory: Path | None = None) -> AtlasEntry:
    entries = load_atlas(directory)
    lookup = {_normalize(k): v for k, v in entries.items()}
    try:
        return lookup[_normalize(name)]
    except KeyError:
        raise UnknownGroup(f"{name!r} not in atlas ({', '.join(entries)})") from None


@lru_cache(maxsize=None)
def _get_group_cached(name: str, directory: str) -> SimpleGroupTable:
    return build_group(resolve_name(name, Path(directory)))


def get_group(name: str, directory: Path | None = None) -> SimpleGroupTable:
    """Build (once per process) the atlas group called ``name``."""
    directory = atlas_dir() if directory is None else Path(directory)
    entry = resolve_name(name, directory)
    return _get_group_cached(entry.name, str(directory))


def validate_entry(entry: AtlasEntry) -> list[tuple[str, bool, str]]:
    """Run every atlas invariant; returns (check, passed, detail) rows, stopping at the first failure."""
    rows: list[tuple[str, bool, str]] = []
    try:
        group = build_group(entry)
    except Exception as exc:  # surfaced as the first violated check
        rows.append(("build_group", False, f"{type(exc).__name__}: {exc}"))
        return rows
    rows.append(("build_group", True, f"|T|={group.order}, |Out|={group.out_order}"))
    total = sum(group.classes.class_sizes)
    rows.append(("class_sizes_sum", total == group.order, f"{total}"))
    ok = all(s * c == group.order for s, c in zip(group.classes.class_sizes, group.classes.centralizer_orders))
    rows.append(("class_equation", ok, ""))
    acts = {a.perm_of_classes for a in group.out_class_actions}
    closed = all(tuple(b[a[c]] for c in range(len(a))) in acts for a in acts for b in acts)
    rows.append(("out_actions_form_group", closed and len(acts) == group.out_order, f"{len(acts)} cosets"))
    eo = group.classes.element_orders
    sizes = group.classes.class_sizes
    pres = all(eo[a[c]] == eo[c] and sizes[a[c]] == sizes[c] for a in acts for c in range(len(a)))
    rows.append(("out_actions_preserve_orders", pres, ""))
    return rows
