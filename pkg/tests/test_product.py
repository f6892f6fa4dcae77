import itertools
from fractions import Fraction

import numpy as np
import pytest

from invgen.atlas import get_group
from invgen.errors import SchemaError
from invgen.perm import Permutation, closure, make_stream
from invgen.product import (
    Tracker,
    build_product,
    class_signature,
    generates,
    in_mtilde,
    invariably_generates,
    m_n_formula,
    m_n_from_descriptors,
    parse_product_spec,
    uniform_product_element,
)


def test_parse_product_spec():
    assert parse_product_spec("A5^2xPSL(2,7)") == [("A5", 2), ("PSL(2,7)", 1)]
    assert parse_product_spec("A5 x A5 X A6") == [("A5", 1), ("A5", 1), ("A6", 1)]
    with pytest.raises(SchemaError):
        parse_product_spec("A5^")


def test_build_product_merges_repeated_factors():
    g = build_product("A5xA6xA5")
    assert g.k == 3
    assert g.name == "A5^2xA6"
    assert g.order == 60**2 * 360


@pytest.mark.parametrize(
    "spec,count",
    [("A5", 3), ("A5^2", 8), ("A5^3", 15), ("A6^2", 14), ("A5xPSL(2,7)", 6), ("PSL(2,8)^2", 9)],
)
def test_descriptor_counts(spec, count):
    # k * (maximal classes) + C(k,2) * |Out|
    assert len(build_product(spec).descriptors) == count


def test_diagonal_fugacity_a5():
    g = build_product("A5^2")
    diag = [d for d in g.descriptors if d.kind == "diagonal"]
    sizes = get_group("A5").classes.class_sizes
    assert sum(s * s for s in sizes) == 914
    assert all(d.fugacity_q == Fraction(914, 3600) for d in diag)
    assert all(d.index_n == 60 and d.class_size == 60 for d in diag)


@pytest.mark.parametrize("spec", ["A5^3", "A5^2xPSL(2,7)", "A6^2", "PSL(2,8)^3"])
def test_m_n_formula_matches_descriptor_count(spec):
    g = build_product(spec)
    assert m_n_formula(g) == m_n_from_descriptors(g)


def test_a5_cubed_m_n():
    assert m_n_formula(build_product("A5^3")) == {5: 15, 6: 18, 10: 30, 60: 360}


def _a5_classes():
    a5 = get_group("A5")
    cd = a5.classes
    fives = [c for c in range(cd.num_classes) if cd.element_orders[c] == 5]
    return a5, cd, fives


def test_in_mtilde_diagonal_examples():
    g = build_product("A5^2")
    _, cd, fives = _a5_classes()
    ident, swap = [d for d in g.descriptors if d.kind == "diagonal"]
    if not all(ident.action[c] == c for c in range(cd.num_classes)):
        ident, swap = swap, ident
    assert in_mtilde((fives[0], fives[0]), ident)
    assert not in_mtilde((fives[0], fives[1]), ident)
    assert in_mtilde((fives[0], fives[1]), swap)
    assert in_mtilde((0, 0), ident) and in_mtilde((0, 0), swap)


def test_in_mtilde_product_examples():
    g = build_product("A5^2")
    a5, cd, fives = _a5_classes()
    a4 = next(d for d in g.descriptors if d.kind == "product" and d.index_n == 5 and d.coords == (1,))
    # 5-cycles fix no point, 3-cycles do
    three = next(c for c in range(cd.num_classes) if cd.element_orders[c] == 3)
    assert not in_mtilde((0, fives[0]), a4)
    assert in_mtilde((fives[0], three), a4)


# --- generation against a faithful permutation representation ---------------

def _embed(x, a5):
    """A5^2 acting on 10 points: first factor on 0..4, second on 5..9."""
    p, q = a5.table.elements[x[0]].images, a5.table.elements[x[1]].images
    return Permutation(tuple(p) + tuple(5 + v for v in q))


def _closure_generates(xs, a5):
    return closure([_embed(x, a5) for x in xs], 10).order == 3600


def _sample_pairs(rng, n, a5):
    """Random pairs, half of them built to lie in a diagonal subgroup."""
    out = []
    t = a5.table
    for i in range(n):
        x, y = (tuple(int(v) for v in rng.integers(0, 60, 2)) for _ in range(2))
        if i % 2:
            g = int(rng.integers(0, 60))
            aut = a5.out_reps[int(rng.integers(0, 2))]
            x = (x[0], t.conjugate(int(aut[x[0]]), g))
            y = (y[0], t.conjugate(int(aut[y[0]]), g))
        out.append([x, y])
    return out


def test_generates_matches_closure_oracle():
    a5 = get_group("A5")
    g = build_product("A5^2")
    rng = np.random.default_rng(5)
    pairs = _sample_pairs(rng, 300, a5)
    results = [generates(g, xs) for xs in pairs]
    assert any(results) and not all(results)
    for xs, r in zip(pairs, results):
        assert r == _closure_generates(xs, a5)


def _all_conjugates_generate(g, xs):
    t = g.table(0).table
    first, rest = xs[0], xs[1:]
    for gs in itertools.product(range(60), repeat=2):
        conj = [tuple(t.conjugate(x[i], gs[i]) for i in range(2)) for x in rest]
        if not generates(g, [first] + conj):
            return False
    return True


def test_invariably_generates_matches_conjugate_oracle():
    g = build_product("A5^2")
    a5, cd, fives = _a5_classes()
    reps = cd.class_reps
    three = next(c for c in range(cd.num_classes) if cd.element_orders[c] == 3)
    two = next(c for c in range(cd.num_classes) if cd.element_orders[c] == 2)
    cases = [
        [(reps[fives[0]], reps[fives[0]]), (reps[three], reps[two])],
        [(reps[fives[0]], reps[fives[1]]), (reps[three], reps[two])],
        [(reps[fives[0]], reps[three]), (reps[two], reps[fives[1]])],
        [(reps[fives[0]], reps[two]), (reps[three], reps[fives[0]])],
        [(reps[fives[0]], reps[three]), (reps[three], reps[fives[1]])],
    ]
    got = [invariably_generates(g, xs) for xs in cases]
    assert any(got) and not all(got)
    for xs, r in zip(cases, got):
        assert r == _all_conjugates_generate(g, xs)


def test_class_signature():
    g = build_product("A5^2")
    a5 = get_group("A5")
    sig = class_signature(g, (0, 5))
    assert sig == (0, int(a5.classes.class_of[5]))


@pytest.mark.parametrize("spec", ["A5^3", "A5^2xPSL(2,7)", "PSL(2,8)^2"])
@pytest.mark.parametrize("mode", ["generation", "invariable"])
def test_tracker_agrees_with_scalar_tests(spec, mode):
    g = build_product(spec)
    check = generates if mode == "generation" else invariably_generates
    tracker = Tracker(g, mode)
    for trial in range(15):
        rng = make_stream(99, trial)
        tracker.reset()
        xs = []
        for _ in range(40):
            x = uniform_product_element(g, rng)
            xs.append(x)
            done = tracker.add(np.array(x))
            assert done == check(g, xs)
            if done:
                break


def test_invariable_generation_implies_generation():
    g = build_product("A5^2")
    rng = make_stream(3)
    for _ in range(300):
        xs = [uniform_product_element(g, rng) for _ in range(int(rng.integers(1, 5)))]
        if invariably_generates(g, xs):
            assert generates(g, xs)
