from fractions import Fraction

import numpy as np
import pytest

from invgen.atlas import get_group
from invgen.errors import CapExceeded, SchemaError
from invgen.lattice import (
    enumerate_subgroups,
    group_maximals,
    load_maximal_classes,
    maximals_to_json,
    simple_invariants,
    subgroup_lattice,
)
from invgen.series import generation_probability

INVENTORY = {
    # name: (subgroups, conjugacy classes of subgroups, maximal indices)
    "A5": (59, 9, [5, 6, 10]),
    "A6": (501, 22, [6, 6, 10, 15, 15]),
    "PSL(2,7)": (179, 15, [7, 7, 8]),
    "PSL(2,8)": (386, 12, [9, 28, 36]),
    "PSL(2,11)": (620, 16, [11, 11, 12, 55]),
}


def _all_two_generated(name):
    t = get_group(name).table
    seen = set()
    for a in range(t.order):
        for b in range(a, t.order):
            seen.add(np.packbits(t.closure_mask([a, b])).tobytes())
    return seen


@pytest.mark.parametrize("name", ["A5", "PSL(2,7)"])
def test_subgroup_count_matches_pair_closure_oracle(name):
    # every subgroup of these groups is generated by two elements
    expected = _all_two_generated(name)
    got = {np.packbits(row).tobytes() for row in subgroup_lattice(get_group(name)).masks}
    assert got == expected


@pytest.mark.parametrize("name", sorted(INVENTORY))
def test_inventories(name):
    subs, ncls, indices = INVENTORY[name]
    g = get_group(name)
    lat = subgroup_lattice(g)
    assert len(lat.masks) == subs
    assert len(lat.classes) == ncls
    assert sum(c.size for c in lat.classes) == subs
    assert [m.index_n for m in group_maximals(g)] == indices


@pytest.mark.parametrize("name", ["A5", "A6", "PSL(2,7)"])
def test_mobius_defining_identity(name):
    lat = subgroup_lattice(get_group(name))
    masks = lat.masks
    mu = np.array([lat.classes[c].mobius for c in lat.class_of_subgroup])
    n = masks.shape[1]
    for h in range(len(masks)):
        above = np.all(masks[:, masks[h]], axis=1)
        total = int(mu[above].sum())
        assert total == (1 if masks[h].sum() == n else 0)


def test_known_mobius_values():
    for name, expected in (("A5", -60), ("A6", 720), ("PSL(2,7)", 0)):
        lat = subgroup_lattice(get_group(name))
        (trivial,) = [c for c in lat.classes if c.order == 1]
        assert trivial.mobius == expected


def test_generation_probability_against_pair_count():
    g = get_group("A5")
    t = g.table
    count = sum(bool(t.closure_mask([a, b], stop_above_half=True).all()) for a in range(60) for b in range(60))
    assert generation_probability(g, subgroup_lattice(g), 2) == Fraction(count, 3600) == Fraction(19, 30)
    assert generation_probability(g, subgroup_lattice(g), 0) == 0
    assert generation_probability(g, subgroup_lattice(g), 1) == 0


def test_maximal_flags_agree_with_containment():
    lat = subgroup_lattice(get_group("A6"))
    n = lat.masks.shape[1]
    sizes = lat.masks.sum(axis=1)
    for row, cid in zip(lat.masks, lat.class_of_subgroup):
        if row.sum() == n:
            continue
        bigger = np.all(lat.masks[:, row], axis=1) & (sizes > row.sum()) & (sizes < n)
        assert lat.classes[cid].is_maximal == (not bigger.any())


def test_a5_fugacities():
    assert [m.fugacity_q for m in group_maximals(get_group("A5"))] == [Fraction(3, 5), Fraction(2, 3), Fraction(3, 5)]


def test_d10_union_of_conjugates_by_direct_conjugation():
    g = get_group("A5")
    t = g.table
    d10 = next(m for m in group_maximals(g) if m.index_n == 6)
    union = {t.conjugate(int(x), y) for x in d10.rep.rep for y in range(60)}
    assert len(union) == 40 == d10.mtilde_size


@pytest.mark.parametrize("name", sorted(INVENTORY))
def test_mtilde_size_bounds(name):
    g = get_group(name)
    for m in group_maximals(g):
        assert m.order <= m.mtilde_size < g.order
        # conjugates share the identity
        assert m.mtilde_size <= m.index_n * (m.order - 1) + 1
        assert m.class_size == m.index_n  # maximals of a simple group are self-normalizing


@pytest.mark.parametrize("name", sorted(INVENTORY))
def test_m_n_is_class_size_sum(name):
    g = get_group(name)
    mx = group_maximals(g)
    inv = simple_invariants(g, mx)
    lat = subgroup_lattice(g)
    for n, count in inv.m_n_table.items():
        direct = sum(1 for r in lat.records() if r.is_maximal and g.order // r.order == n)
        assert count == direct


def test_a5_and_a6_invariants():
    a5 = simple_invariants(get_group("A5"), group_maximals(get_group("A5")))
    assert (a5.l, a5.delta, a5.alpha) == (5, Fraction(1, 3), Fraction(3, 2))
    assert a5.m_n_table == {5: 5, 6: 6, 10: 10}
    assert a5.mntilde_table == {1: 3}
    a6 = simple_invariants(get_group("A6"), group_maximals(get_group("A6")))
    assert a6.l == 6 and a6.delta > 0


def test_lattice_cap():
    with pytest.raises(CapExceeded):
        subgroup_lattice(get_group("A6"), cap=100)


def test_records_expose_members():
    recs = enumerate_subgroups(get_group("A5"))
    assert len(recs) == 59
    assert sum(r.mobius for r in recs) == 0
    assert all(len(r.members) == r.order for r in recs)


def test_trusted_import_round_trip():
    g = get_group("PSL(2,7)")
    rows = maximals_to_json(g, group_maximals(g))
    imported = load_maximal_classes(g, rows)
    assert [m.fugacity_q for m in imported] == [m.fugacity_q for m in group_maximals(g)]
    assert all(m.rep.trusted for m in imported)
    with pytest.raises(SchemaError):
        load_maximal_classes(g, [{"order": 3}])
