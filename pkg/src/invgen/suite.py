"""Experiment report type and the reproduction suite run by ``lab verify``."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import __version__
from .atlas import get_group, load_atlas, validate_entry
from .bounds import Check, check_eq, check_ge, check_le, check_true, theorem_bounds
from .lattice import (
    BOSTON_SHALEV_ALPHA0,
    BOSTON_SHALEV_DELTA,
    frac_str,
    group_maximals,
    simple_invariants,
    subgroup_lattice,
)
from .montecarlo import mc_waiting_time
from .product import ProductGroup, build_product, class_signature, in_mtilde, invariably_generates
from .series import (
    FugacitySystem,
    exact_e1,
    fix_kset_brute,
    fix_kset_proportion,
    kset_scaling,
    lower_bound_series,
)

DEFAULT_SEED = 20240917


@dataclass
class ExperimentReport:
    command: str
    inputs: dict[str, Any]
    results: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "checks": [c.to_json() for c in self.checks],
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "ExperimentReport":
        return cls(
            doc["command"],
            doc["inputs"],
            doc.get("results", {}),
            [Check.from_json(c) for c in doc.get("checks", [])],
            doc.get("provenance", {}),
        )


def signature_failure_probability(g: ProductGroup, t: int) -> Fraction:
    """1 - P_I(G, t) by enumerating t-tuples of class signatures.

    Each signature is weighted by its number of elements; a tuple fails when
    one descriptor's M~ holds all of its signatures.
    """
    per_coord = [range(g.table(i).classes.num_classes) for i in range(g.k)]
    sigs = list(itertools.product(*per_coord))
    weights = [math.prod(g.table(i).classes.class_sizes[c] for i, c in enumerate(s)) for s in sigs]
    inside = [[in_mtilde(s, d) for d in g.descriptors] for s in sigs]
    failed = 0
    for combo in itertools.product(range(len(sigs)), repeat=t):
        if any(all(inside[s][di] for s in combo) for di in range(len(g.descriptors))):
            failed += math.prod(weights[s] for s in combo)
    return Fraction(failed, g.order**t)


def conjugate_oracle_invariable(group, xs: list[int]) -> bool:
    """Does every choice of conjugates of ``xs`` generate the group?  (Conjugating
    the first element is unnecessary: conjugating everything by it changes nothing.)"""
    t = group.table
    n = t.order
    for gs in itertools.product(range(n), repeat=len(xs) - 1):
        elems = [xs[0]] + [t.conjugate(x, g) for x, g in zip(xs[1:], gs)]
        if not t.closure_mask(elems, stop_above_half=True).all():
            return False
    return True


def _ci3(est) -> float:
    return 3 * math.sqrt(est.variance / est.trials)


def criterion_alpha_a5():
    g = get_group("A5")
    inv = simple_invariants(g, group_maximals(g))
    checks = [
        check_eq("alpha(A5)", "alpha(T) = 3/2 for T = A5", inv.alpha, Fraction(3, 2)),
        check_eq("delta(A5)", "delta(A5) = 1/3", inv.delta, Fraction(1, 3)),
    ]
    return {"alpha": frac_str(inv.alpha), "delta": frac_str(inv.delta)}, checks


def criterion_e1_a6():
    g = get_group("A6")
    e1 = exact_e1(g, subgroup_lattice(g))
    checks = [check_le("e1(A6) ~ 2.494", "e1(Alt(6)) ~ 2.494 (3 d.p.)", abs(e1.float - 2.494), 0.0005)]
    return {"e1_A6": e1.float, "e1_A6_exact": frac_str(e1.exact)}, checks


def criterion_boston_shalev():
    checks, res = [], {}
    for name in load_atlas():
        g = get_group(name)
        inv = simple_invariants(g, group_maximals(g))
        res[name] = {"delta": frac_str(inv.delta), "alpha": frac_str(inv.alpha), "l": inv.l}
        checks.append(check_ge(f"delta({name})", "derangement proportion at least 0.016", inv.delta,
                               BOSTON_SHALEV_DELTA))
        checks.append(check_ge(f"alpha({name})>1+alpha0", "|G|/|M~| > 1 + alpha_0", inv.alpha - 1,
                               BOSTON_SHALEV_ALPHA0 + Fraction(1, 10**12)))
        checks.append(check_le(f"l({name})^2<=|T|", "proper subgroup of order >= sqrt|T|", inv.l**2, g.order))
    return res, checks


def criterion_chebotarev_a5(trials: int, seed: int, workers: int = 1):
    g = build_product("A5")
    system = FugacitySystem(g)
    exact = system.chebotarev()
    series = 0.0
    t = 0
    while True:
        term = float(system.failure_probability(t))
        series += term
        t += 1
        if term < 1e-17:
            break
    checks = [
        check_eq("C(A5) exact", "C(G) = sum_t (1 - P_I(G,t))", exact, Fraction(91, 22)),
        check_le("C(A5) t-series", "C(G) = sum_t (1 - P_I(G,t))", abs(series - float(exact)), 1e-12),
    ]
    for tt in (1, 2, 3):
        oracle = signature_failure_probability(g, tt)
        checks.append(check_eq(f"1-P_I(A5,{tt}) oracle", "inclusion-exclusion over M~", system.failure_probability(tt),
                               oracle))
    est = mc_waiting_time(g, "invariable", trials, seed, workers)
    checks.append(check_le("C(A5) Monte Carlo 3 sigma", "tau_I,G expectation", abs(est.mean - float(exact)), _ci3(est)))
    return {"C_A5": frac_str(exact), "series_limit": series, "mc": est.to_json()}, checks


def criterion_a5_cubed():
    from .product import m_n_formula, m_n_from_descriptors

    g = build_product("A5^3")
    formula, direct = m_n_formula(g), m_n_from_descriptors(g)
    expected = {5: 15, 6: 18, 10: 30, 60: 360}
    checks = [
        check_eq("m_n(A5^3) formula", "m_n(G) = sum k_i m_n(T_i) + sum C(k_i,2)|Aut(T_i)|", formula, expected),
        check_eq("m_n(A5^3) direct", "maximal subgroups counted by descriptor", direct, expected),
    ]
    report = theorem_bounds(g, {})
    checks += [c for c in report.checks if c.name.startswith("diag_")]
    return {"m_n_formula": {str(k): v for k, v in formula.items()}}, checks


def criterion_cbound_exact():
    checks, res = [], {}
    for k in (1, 2, 3):
        g = build_product(f"A5^{k}")
        c = FugacitySystem(g, cap=20).chebotarev()
        lb = lower_bound_series(Fraction(3, 2), k)
        res[f"k={k}"] = {"C": frac_str(c), "C_float": float(c), "lower_series": frac_str(lb.exact)}
        checks.append(check_eq(f"C(A5^{k}) >= series", "C >= sum_t 1-(1-alpha^-t)^k", c >= lb.exact, True,
                               detail=f"C={float(c):.6f} bound={float(lb.exact):.6f}"))
    return res, checks


def criterion_e1_powers(trials: int, seed: int, ks=(2, 4, 8, 16, 64), workers: int = 1):
    checks, res = [], {}
    for k in ks:
        g = build_product(f"A5^{k}")
        est = mc_waiting_time(g, "generation", trials, seed + k, workers)
        term = math.log(k) / math.log(5)
        res[f"k={k}"] = est.to_json()
        checks.append(check_ge(f"e1(A5^{k}) lower", "e1(T^k) >= log k/log l - 3", est.mean, term - 3, est.ci95))
        checks.append(check_le(f"e1(A5^{k}) upper", "e1(T^k) <= log k/log l + 6", est.mean, term + 6, est.ci95))
    return res, checks


def criterion_divergence(trials: int, seed: int, ks=(4, 16, 64), workers: int = 1):
    checks, res = [], {}
    diffs = []
    for k in ks:
        g = build_product(f"A5^{k}")
        c = mc_waiting_time(g, "invariable", trials, seed + 1000 + k, workers)
        e = mc_waiting_time(g, "generation", trials, seed + 2000 + k, workers)
        bound = (1 - math.exp(-1)) * math.log(k) / math.log(1.5)
        diffs.append(c.mean - e.mean)
        res[f"k={k}"] = {"C": c.to_json(), "e1": e.to_json(), "C_minus_e1": c.mean - e.mean}
        checks.append(check_ge(f"C(A5^{k}) >= (1-1/e)log k/log(3/2)", "C(A5^k) >= (1-1/e) log k / log(3/2)",
                               c.mean, bound, c.ci95))
    increasing = all(b > a for a, b in zip(diffs, diffs[1:]))
    checks.append(Check("C-e1 increasing in k", "C(A5^k) - e1(A5^k) unbounded", "increasing",
                        float(diffs[-1] - diffs[0]), increasing, f"differences {[round(d, 4) for d in diffs]}"))
    return res, checks


def criterion_fixset():
    checks, res = [], {}
    brute_ok = True
    for r in range(1, 9):
        brute = fix_kset_brute(r)
        for k in range(r + 1):
            brute_ok &= fix_kset_proportion(r, k) == brute[k]
    checks.append(check_true("i(r,k) brute force r<=8", "proportion of S_r fixing a k-set", brute_ok))
    sym = all(fix_kset_proportion(r, k) == fix_kset_proportion(r, r - k) for r in range(1, 21) for k in range(r + 1))
    checks.append(check_true("i(r,k)=i(r,r-k) r<=20", "fixing a k-set iff fixing its complement", sym))
    scale = kset_scaling(40, range(2, 21))
    ratio = max(scale.values()) / min(scale.values())
    checks.append(check_le("i(40,k) scaling band", "i(r,k) ~ k^-delta (1+log k)^-3/2", ratio, 10.0))
    res["scaling_r40"] = {str(k): v for k, v in scale.items()}
    res["scaling_ratio"] = ratio
    return res, checks


def criterion_substitutes():
    checks, res = [], {}
    for name in load_atlas():
        g = get_group(name)
        mx = group_maximals(g)
        inv = simple_invariants(g, mx)
        res[name] = {"mntilde": {str(k): v for k, v in inv.mntilde_table.items()}}
        ok = all(m.fugacity_q < 1 for m in mx) and sum(inv.mntilde_table.values()) == len(mx)
        checks.append(check_true(f"mntilde({name})", "classes of maximals binned by floor(|G|/|M~|)", ok,
                                 f"{len(mx)} maximal classes"))
    # invariable generation of A5 by two class representatives, versus all conjugates
    a5 = get_group("A5")
    g = build_product("A5")
    reps = a5.classes.class_reps
    agree = all(
        invariably_generates(g, [(x,), (y,)]) == conjugate_oracle_invariable(a5, [x, y])
        for x in reps
        for y in reps
    )
    checks.append(check_true("invariable generation oracle (A5)", "invariable generation iff no M~ contains all",
                             agree))
    for spec in ("A5", "A5^2", "A5^3"):
        prod = build_product(spec)
        system = FugacitySystem(prod)
        st = system.subset_terms
        mono = all(0 < q < 1 for q in st.values()) and all(
            st[J] <= st[J[:-1]] for J in st if len(J) > 1
        )
        checks.append(check_true(f"q_J monotone ({spec})", "intersections of M~ shrink", mono))
        checks.append(check_eq(f"1-P_I(t=0)=1 ({spec})", "sum (-1)^(|J|+1) = 1", system.failure_probability(0),
                               Fraction(1)))
    return res, checks


def _atlas_checks():
    checks = []
    for name, entry in load_atlas().items():
        for check, ok, detail in validate_entry(entry):
            checks.append(check_true(f"atlas {name}: {check}", "atlas invariants", ok, detail))
    return {}, checks


def suite_paper(quick: bool = False, seed: int = DEFAULT_SEED, workers: int = 1) -> ExperimentReport:
    big = 10_000 if quick else 100_000
    small = 2_000 if quick else 10_000
    steps: list[tuple[str, Callable[[], tuple[dict, list[Check]]]]] = [
        ("atlas", _atlas_checks),
        ("1_alpha_A5", criterion_alpha_a5),
        ("2_e1_A6", criterion_e1_a6),
        ("3_boston_shalev", criterion_boston_shalev),
        ("4_chebotarev_A5", lambda: criterion_chebotarev_a5(big, seed, workers)),
        ("5_A5_cubed", criterion_a5_cubed),
        ("6_cbound_exact", criterion_cbound_exact),
        ("7_e1_powers", lambda: criterion_e1_powers(small, seed, workers=workers)),
        ("8_divergence", lambda: criterion_divergence(small, seed, workers=workers)),
        ("9_fixset", criterion_fixset),
        ("10_substitutes", criterion_substitutes),
    ]
    report = ExperimentReport("verify", {"suite": "paper", "quick": quick, "seed": seed})
    start = time.perf_counter()
    for key, fn in steps:
        try:
            res, checks = fn()
        except Exception as exc:  # a broken input must fail the run, not crash it
            res, checks = {"error": f"{type(exc).__name__}: {exc}"}, [
                Check(f"{key} completed", "harness", "no error", math.nan, False, f"{type(exc).__name__}: {exc}")
            ]
        report.results[key] = res
        report.checks.extend(checks)
    report.provenance = {
        "seed": seed,
        "version": __version__,
        "runtime_ms": round((time.perf_counter() - start) * 1000),
    }
    return report
