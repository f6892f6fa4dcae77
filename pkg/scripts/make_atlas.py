"""Regenerate the bundled atlas JSON files.

Run from the repository root:  python scripts/make_atlas.py
"""

import itertools
import json
from pathlib import Path

from invgen.atlas import AtlasEntry, build_group
from invgen.perm import Permutation, closure, conjugacy_classes, extend_homomorphism

OUT = Path(__file__).resolve().parents[1] / "src" / "invgen" / "atlas_data"


def conj_images(gens, sigma):
    return [g ** sigma for g in gens]


def alternating(n, gens):
    gens = [Permutation.from_cycles(g, n) for g in gens]
    return gens, [conj_images(gens, Permutation.from_cycles("(0 1)", n))]


# GF(8) = GF(2)[w]/(w^3 + w + 1), elements as bit vectors
def gf8_mul(a, b):
    r = 0
    for i in range(3):
        if b >> i & 1:
            r ^= a << i
    for deg in (4, 3):
        if r >> deg & 1:
            r ^= 0b1011 << (deg - 3)
    return r


def gf8_inv(a):
    return next(b for b in range(1, 8) if gf8_mul(a, b) == 1)


def mobius_perm(q, f):
    """Permutation of the projective line {0..q-1, inf=q} from a point map."""
    return Permutation(tuple(f(x) for x in range(q + 1)))


def psl2_prime(p, nonsquare):
    inf = p

    def translate(x):
        return inf if x == inf else (x + 1) % p

    def invert(x):  # x -> -1/x
        if x == inf:
            return 0
        if x == 0:
            return inf
        return (-pow(x, -1, p)) % p

    def scale(x):
        return inf if x == inf else (nonsquare * x) % p

    gens = [mobius_perm(p, translate), mobius_perm(p, invert)]
    return gens, [conj_images(gens, mobius_perm(p, scale))]


def psl2_8():
    inf = 8
    w = 0b010

    def translate(x):
        return inf if x == inf else x ^ 1

    def mult(x):
        return inf if x == inf else gf8_mul(w, x)

    def invert(x):
        if x == inf:
            return 0
        if x == 0:
            return inf
        return gf8_inv(x)

    def frob(x):
        return inf if x == inf else gf8_mul(x, x)

    gens = [mobius_perm(8, f) for f in (translate, mult, invert)]
    return gens, [conj_images(gens, mobius_perm(8, frob))]


def a6_exotic(gens):
    """Find images of the A6 generators under an automorphism that swaps the two 3-classes."""
    table = closure(gens)
    classes = conjugacy_classes(table)
    src = table.generators
    cls3 = {classes.class_of[i] for i in range(table.order) if table.elements[i].order() == 3}
    a_cls = classes.class_of[src[0]]
    other3 = next(c for c in cls3 if c != a_cls)
    b_order = table.elements[src[1]].order()
    cand_a = [int(x) for x in classes.members[other3]]
    cand_b = [i for i in range(table.order) if table.elements[i].order() == b_order]
    for a, b in itertools.product(cand_a, cand_b):
        image = extend_homomorphism(table, src, [a, b])
        if image is not None and len(set(image.values())) == table.order:
            return [table.elements[a], table.elements[b]]
    raise RuntimeError("no exotic automorphism found")


def main():
    specs = []
    g, auts = alternating(5, ["(0 1 2 3 4)", "(0 1 2)"])
    specs.append(("A5", 5, g, 60, 120, auts))
    g, auts = alternating(6, ["(0 1 2)", "(1 2 3 4 5)"])
    auts.append(a6_exotic(g))
    specs.append(("A6", 6, g, 360, 1440, auts))
    g, auts = alternating(7, ["(0 1 2)", "(0 1 2 3 4 5 6)"])
    specs.append(("A7", 7, g, 2520, 5040, auts))
    g, auts = psl2_prime(7, 3)
    specs.append(("PSL(2,7)", 8, g, 168, 336, auts))
    g, auts = psl2_8()
    specs.append(("PSL(2,8)", 9, g, 504, 1512, auts))
    g, auts = psl2_prime(11, 2)
    specs.append(("PSL(2,11)", 12, g, 660, 1320, auts))

    OUT.mkdir(parents=True, exist_ok=True)
    for name, degree, gens, order, aut_order, auts in specs:
        entry = AtlasEntry(name, degree, gens, order, aut_order, auts)
        group = build_group(entry)
        assert group.aut_order == aut_order, (name, group.aut_order)
        fname = name.lower().replace("(", "").replace(")", "").replace(",", "_") + ".json"
        doc = entry.to_json()
        body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.items())
        (OUT / fname).write_text("{\n" + body + "\n}\n")
        print(f"{name}: |T|={group.order} |Out|={group.out_order} -> {fname}")


if __name__ == "__main__":
    main()
