import json

import pytest

from invgen.atlas import (
    build_group,
    get_group,
    load_atlas,
    load_entry,
    resolve_name,
    validate_entry,
)
from invgen.errors import NotAnAutomorphism, NotSimple, OrderMismatch, SchemaError, UnknownGroup

A5_DOC = {
    "name": "A5",
    "degree": 5,
    "generators": ["(0 1 2 3 4)", "(0 1 2)"],
    "expected_order": 60,
    "aut_order": 120,
    "aut_generators": [[[2, 0, 3, 4, 1], [2, 0, 1, 3, 4]]],
}

SHIPPED = {
    # name: (order, number of classes, |Out|)
    "A5": (60, 5, 2),
    "A6": (360, 7, 4),
    "A7": (2520, 9, 2),
    "PSL(2,7)": (168, 6, 2),
    "PSL(2,8)": (504, 9, 3),
    "PSL(2,11)": (660, 8, 2),
}


def test_shipped_atlas_names():
    assert set(load_atlas()) == set(SHIPPED)


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_shipped_groups(name):
    order, ncls, out = SHIPPED[name]
    g = get_group(name)
    assert g.order == order
    assert g.classes.num_classes == ncls
    assert g.out_order == out
    assert g.aut_order == order * out
    assert all(ok for _, ok, _ in validate_entry(resolve_name(name)))


def test_name_resolution_is_lenient():
    assert resolve_name("psl(2, 7)").name == "PSL(2,7)"
    assert resolve_name("a5").name == "A5"
    with pytest.raises(UnknownGroup):
        resolve_name("M11")


def test_load_entry_accepts_dict_string_and_path(tmp_path):
    p = tmp_path / "a5.json"
    p.write_text(json.dumps(A5_DOC))
    for src in (A5_DOC, json.dumps(A5_DOC), p, str(p)):
        e = load_entry(src)
        assert e.name == "A5" and len(e.generators) == 2
    assert load_entry(e.to_json()).generators == e.generators


@pytest.mark.parametrize(
    "mutate,path",
    [
        (lambda d: d.pop("degree"), "degree"),
        (lambda d: d.update(generators="(0 1)"), "generators"),
        (lambda d: d.update(generators=["(0 1 2 3 4)", "(0 9)"]), "generators[1]"),
        (lambda d: d.update(aut_generators=[[[0, 1, 2, 3, 4]]]), "aut_generators[0]"),
        (lambda d: d.update(expected_order="sixty"), "expected_order"),
    ],
)
def test_schema_errors_name_the_field(mutate, path):
    doc = json.loads(json.dumps(A5_DOC))
    mutate(doc)
    with pytest.raises(SchemaError) as err:
        load_entry(doc)
    assert err.value.path == path


def test_wrong_expected_order():
    doc = dict(A5_DOC, expected_order=120)
    with pytest.raises(OrderMismatch):
        build_group(load_entry(doc))


def test_wrong_aut_order():
    doc = dict(A5_DOC, aut_order=60)
    with pytest.raises(OrderMismatch):
        build_group(load_entry(doc))


def test_symmetric_group_is_not_simple():
    doc = {"name": "S3", "degree": 3, "generators": ["(0 1)", "(0 1 2)"], "aut_generators": []}
    with pytest.raises(NotSimple):
        build_group(load_entry(doc))


def test_cyclic_group_rejected_as_abelian():
    doc = {"name": "C2", "degree": 2, "generators": ["(0 1)"], "aut_generators": []}
    with pytest.raises(NotSimple):
        build_group(load_entry(doc))


def test_broken_automorphism():
    # order-5 generator sent to a 3-cycle
    doc = dict(A5_DOC, aut_generators=[[[1, 2, 0, 3, 4], [2, 0, 1, 3, 4]]])
    with pytest.raises(NotAnAutomorphism) as err:
        build_group(load_entry(doc))
    assert err.value.index == 0


def test_validate_entry_reports_first_failure():
    rows = validate_entry(load_entry(dict(A5_DOC, expected_order=61)))
    assert rows[-1][1] is False and rows[-1][0] == "build_group"


def _classes_by_order_and_size(g):
    cd = g.classes
    return {c: (int(cd.element_orders[c]), cd.class_sizes[c]) for c in range(cd.num_classes)}


def test_a5_outer_action_swaps_five_classes():
    g = get_group("A5")
    info = _classes_by_order_and_size(g)
    fives = sorted(c for c, (o, _) in info.items() if o == 5)
    (outer,) = [a for a in g.out_class_actions if not a.is_identity()]
    assert outer(fives[0]) == fives[1] and outer(fives[1]) == fives[0]
    assert all(outer(c) == c for c in info if c not in fives)


def test_a6_out_is_klein_with_exotic_swap_of_three_classes():
    g = get_group("A6")
    info = _classes_by_order_and_size(g)
    threes = sorted(c for c, (o, _) in info.items() if o == 3)
    assert len(threes) == 2
    acts = [a.perm_of_classes for a in g.out_class_actions]
    assert len(set(acts)) == 4
    ident = tuple(range(len(info)))
    assert all(tuple(a[a[c]] for c in range(len(a))) == ident for a in acts)  # every element squares to 1
    assert any(a[threes[0]] == threes[1] for a in acts)


def test_psl28_out_has_order_three():
    g = get_group("PSL(2,8)")
    acts = [a.perm_of_classes for a in g.out_class_actions]
    for a in acts:
        cube = [a[a[a[c]]] for c in range(len(a))]
        assert cube == list(range(len(a)))
