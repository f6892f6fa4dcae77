"""Checkable inequalities for e1 and C of a product of simple groups."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .lattice import simple_invariants
from .montecarlo import WaitingTimeEstimate
from .product import ProductGroup, m_n_formula
from .series import SeriesValue, lower_bound_series


@dataclass
class Check:
    name: str
    anchor: str
    target: str
    measured: float
    passed: bool
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "target": self.target,
            "measured": self.measured if math.isfinite(self.measured) else None,
            "pass": self.passed,
            "detail": self.detail,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Check":
        measured = math.nan if doc["measured"] is None else doc["measured"]
        return cls(doc["name"], doc["anchor"], doc["target"], measured, doc["pass"], doc.get("detail", ""))


def check_ge(name, anchor, measured, bound, slack=0.0, detail="") -> Check:
    """measured + slack >= bound."""
    return Check(name, anchor, f">= {float(bound):.6g} (slack {float(slack):.3g})", float(measured),
                 float(measured) + float(slack) >= float(bound), detail)


def check_le(name, anchor, measured, bound, slack=0.0, detail="") -> Check:
    """measured - slack <= bound."""
    return Check(name, anchor, f"<= {float(bound):.6g} (slack {float(slack):.3g})", float(measured),
                 float(measured) - float(slack) <= float(bound), detail)


def check_eq(name, anchor, measured, expected, detail="") -> Check:
    return Check(name, anchor, f"== {expected}", float(measured) if _is_num(measured) else math.nan,
                 measured == expected, detail or f"measured {measured}")


def check_true(name, anchor, ok: bool, detail="") -> Check:
    return Check(name, anchor, "true", float(ok), bool(ok), detail)


def _is_num(x) -> bool:
    return isinstance(x, (int, float, Fraction))


def _value_and_ci(est) -> tuple[float, float]:
    if isinstance(est, WaitingTimeEstimate):
        return est.mean, (0.0 if est.degenerate else est.ci95)
    if isinstance(est, SeriesValue):
        return est.float, est.truncation_bound
    return float(est), 0.0


def script_M(m_n: dict[int, int]) -> float:
    vals = [math.log(v) / math.log(n) for n, v in m_n.items() if n >= 2 and v > 0]
    return max(vals) if vals else 0.0


@dataclass
class BoundReport:
    group: str
    checks: list[Check] = field(default_factory=list)
    reports: dict[str, float] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def theorem_bounds(g: ProductGroup, estimates: dict[str, Any]) -> BoundReport:
    """Evaluate every inequality that applies to ``g``.

    ``estimates`` may hold "e1" and/or "cheb", each a Monte Carlo estimate, an
    exact series value or a plain number; Monte Carlo values are compared with
    their 95% half-width as slack.
    """
    rep = BoundReport(g.name)
    k = g.k
    invs = [simple_invariants(f.group, f.maximals) for f in g.factors]
    log_k = math.log(k)
    l_term = max(log_k / math.log(inv.l) for inv in invs)
    alpha_min = min(inv.alpha for inv in invs)
    a_term = max(log_k / math.log(float(inv.alpha)) for inv in invs)
    m_n = m_n_formula(g)
    sM = script_M(m_n)
    rep.reports.update({"log_k_over_log_l": l_term, "log_k_over_log_alpha": a_term, "script_M": sM})

    rep.checks.append(check_le("script_M_upper", "M(G) <= max log k / log l(T_i) + 2", sM, l_term + 2))
    for d in g.descriptors:
        if d.kind != "diagonal":
            continue
        ratio = 1 / d.fugacity_q
        rep.checks.append(check_ge(f"diag_ratio_gt2[{d.coords}:{d.label}]", "|G|/|M~| > 2 for diagonal type",
                                   float(ratio), 2.0 + 1e-12))
        rep.checks.append(check_ge(f"diag_ratio_min4[{d.coords}:{d.label}]",
                                   "|G|/|M~| >= min{4, alpha^2} for diagonal type",
                                   float(ratio), float(min(Fraction(4), alpha_min**2))))

    e1 = estimates.get("e1")
    if e1 is not None:
        v, ci = _value_and_ci(e1)
        if k >= 2:
            rep.checks.append(check_le("e1_upper", "e1(G) <= max log k / log l(T_i) + 6", v, l_term + 6, ci))
        cM = math.ceil(sM - 1e-12)
        rep.checks.append(check_ge("e1_vs_M_lower", "ceil(M(G)) - 4 <= e1(G)", v, cM - 4, ci))
        rep.checks.append(check_le("e1_vs_M_upper", "e1(G) <= ceil(M(G)) + 3", v, cM + 3, ci))
        if len(g.factors) == 1:
            c_T = v - l_term
            rep.reports["c_T_k"] = c_T
            rep.checks.append(check_ge("ebound_lower", "e1(T^k) - log k / log l >= -3", c_T, -3, ci))
            rep.checks.append(check_le("ebound_upper", "e1(T^k) - log k / log l <= 6", c_T, 6, ci))

    cheb = estimates.get("cheb")
    if cheb is not None:
        v, ci = _value_and_ci(cheb)
        rep.reports["C_minus_log_term"] = v - a_term
        if len(g.factors) == 1:
            alpha = invs[0].alpha
            lb = lower_bound_series(alpha, k)
            rep.reports["Cbound_series"] = lb.float
            rep.checks.append(check_ge("Cbound", "C(T^k) >= sum_t 1 - (1 - alpha^-t)^k", v, lb.float, ci + 1e-12))
            rep.checks.append(check_ge("Cbound2_mu1", "C(T^k) >= (1 - 1/e) log k / log alpha",
                                       v, (1 - math.exp(-1)) * a_term, ci))
        if e1 is not None:
            rep.reports["C_minus_e1"] = v - _value_and_ci(e1)[0]
    return rep
