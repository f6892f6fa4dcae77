"""The ``lab`` command line.

Every command builds an :class:`ExperimentReport` and writes it as JSON (the
default) or CSV.  Exit status is 0 when all checks pass, 1 when a check fails
or the computation raises, and 2 for usage errors.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any

import click
import numpy as np

from . import __version__
from .atlas import atlas_dir, get_group, load_atlas, load_entry, validate_entry
from .bounds import Check, check_eq, check_ge, check_true, theorem_bounds
from .errors import InvgenError, OutOfRange
from .lattice import (
    DEFAULT_LATTICE_CAP,
    frac_str,
    group_maximals,
    maximals_to_json,
    simple_invariants,
    subgroup_lattice,
)
from .montecarlo import sample_waiting_times, summarize
from .product import build_product, m_n_formula, m_n_from_descriptors
from .series import (
    DEFAULT_EXACT_CAP,
    DEFAULT_PARTITION_CAP,
    FugacitySystem,
    exact_e1,
    fix_kset_brute,
    fix_kset_proportion,
    lower_bound_series,
    truncated_chebotarev,
)
from .suite import DEFAULT_SEED, ExperimentReport, suite_paper


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return frac_str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, int) and not isinstance(x, bool) and abs(x) >= 2**53:
        return str(x)
    return x


def report_json(report: ExperimentReport) -> str:
    return json.dumps(_jsonable(report.to_json()), sort_keys=True, indent=2)


def _flatten(prefix: str, x: Any, rows: list[tuple[str, Any]]) -> None:
    if isinstance(x, dict):
        for k in sorted(x, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), x[k], rows)
    elif isinstance(x, list) and x and all(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, json.dumps(x) if isinstance(x, list) else x))


def report_csv(report: ExperimentReport) -> str:
    """Checks as a table when there are any, otherwise the flattened results."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.checks:
        w.writerow(["name", "anchor", "target", "measured", "pass", "detail"])
        for c in report.checks:
            d = c.to_json()
            w.writerow([d["name"], d["anchor"], d["target"], d["measured"], d["pass"], d["detail"]])
    else:
        w.writerow(["key", "value"])
        rows: list[tuple[str, Any]] = []
        _flatten("", _jsonable(report.results), rows)
        w.writerows(rows)
    return buf.getvalue()


def _write_table(path: str, header: list[str], rows: list[list[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


class _Lab(click.Group):
    """Maps library errors to exit status 1 with the message on stderr."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (InvgenError, ValueError, ZeroDivisionError, OSError) as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(1)


def _output_options(fn):
    fn = click.option("--out", "out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)(fn)
    return fn


def _finish(report: ExperimentReport, fmt: str, out: str | None, start: float) -> None:
    report.provenance.setdefault("version", __version__)
    report.provenance["runtime_ms"] = round((time.perf_counter() - start) * 1000)
    text = report_json(report) if fmt == "json" else report_csv(report)
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text.rstrip("\n"))
    failed = [c for c in report.checks if not c.passed]
    if failed:
        click.echo(f"FAILED: {failed[0].name} ({failed[0].detail or failed[0].target})", err=True)
        sys.exit(1)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"not a rational number: {text!r}") from exc


@click.group(cls=_Lab)
@click.version_option(__version__, prog_name="lab")
def cli() -> None:
    """Generation and invariable-generation waiting times of small simple groups and their products."""


@cli.group(cls=_Lab)
def atlas() -> None:
    """Inspect or validate atlas entries."""


@atlas.command("list")
@_output_options
def atlas_list(fmt: str, out: str | None) -> None:
    start = time.perf_counter()
    entries = load_atlas()
    rows = [
        {"name": e.name, "degree": e.degree, "expected_order": e.expected_order, "aut_order": e.aut_order}
        for e in entries.values()
    ]
    report = ExperimentReport("atlas list", {"directory": str(atlas_dir())}, {"groups": rows})
    _finish(report, fmt, out, start)


@atlas.command("validate")
@click.argument("path", type=click.Path(exists=True))
@_output_options
def atlas_validate(path: str, fmt: str, out: str | None) -> None:
    """Validate one atlas JSON file, or every *.json file in a directory."""
    start = time.perf_counter()
    p = Path(path)
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    report = ExperimentReport("atlas validate", {"path": str(p)})
    for f in files:
        try:
            entry = load_entry(f)
        except InvgenError as exc:
            report.checks.append(Check(f"{f.name}: schema", "atlas schema", "valid", math.nan, False, str(exc)))
            continue
        for check, ok, detail in validate_entry(entry):
            report.checks.append(check_true(f"{entry.name}: {check}", "atlas invariants", ok, detail))
    _finish(report, fmt, out, start)


@cli.command()
@click.argument("group")
@click.option("--emit", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--cap", type=int, default=DEFAULT_LATTICE_CAP, show_default=True, help="Maximum subgroup count.")
@click.option("--out", type=click.Path(dir_okay=False))
def lattice(group: str, emit: str, cap: int, out: str | None) -> None:
    """Subgroup classes of GROUP with orders, sizes and Moebius values."""
    start = time.perf_counter()
    g = get_group(group)
    lat = subgroup_lattice(g, cap)
    rows = [
        {"class_id": c.class_id, "order": c.order, "size": c.size, "mobius": c.mobius, "is_maximal": c.is_maximal}
        for c in lat.classes
    ]
    total = sum(c.size for c in lat.classes)
    report = ExperimentReport("lattice", {"group": g.name, "cap": cap},
                              {"order": g.order, "subgroups": total, "classes": rows})
    # sum of mu(H) over all H equals 0 for a nontrivial group
    report.checks.append(check_eq("mobius_sum_zero", "sum_H mu(H, G) = 0",
                                  sum(c.mobius * c.size for c in lat.classes), 0))
    if emit == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class_id", "order", "size", "mobius", "is_maximal"])
        for r in rows:
            w.writerow([r["class_id"], r["order"], r["size"], r["mobius"], r["is_maximal"]])
        text = buf.getvalue()
        if out:
            Path(out).write_text(text)
        else:
            click.echo(text.rstrip("\n"))
        if not report.passed:
            sys.exit(1)
        return
    _finish(report, "json", out, start)


@cli.command()
@click.argument("group")
@_output_options
def invariants(group: str, fmt: str, out: str | None) -> None:
    """l, delta, alpha, m_n and the maximal classes of GROUP."""
    start = time.perf_counter()
    g = get_group(group)
    maxs = group_maximals(g)
    inv = simple_invariants(g, maxs)
    report = ExperimentReport("invariants", {"group": g.name}, {
        "order": g.order,
        "out_order": g.out_order,
        "l": inv.l,
        "delta": inv.delta,
        "delta_float": float(inv.delta),
        "alpha": inv.alpha,
        "alpha_float": float(inv.alpha),
        "m_n": inv.m_n_table,
        "script_M": inv.script_M,
        "mtilde_n": inv.mntilde_table,
        "maximal_classes": maximals_to_json(g, maxs),
    })
    report.checks.append(check_ge("l_squared_le_order", "l(T)^2 <= |T|", g.order, inv.l**2))
    report.checks.append(Check("fugacities_below_one", "|M~| < |T|", "< 1", max(float(m.fugacity_q) for m in maxs),
                               all(m.fugacity_q < 1 for m in maxs)))
    _finish(report, fmt, out, start)


@cli.command()
@click.argument("spec")
@_output_options
def descriptors(spec: str, fmt: str, out: str | None) -> None:
    """Conjugacy classes of maximal subgroups of a product such as A5^3 or A5xPSL(2,7)."""
    start = time.perf_counter()
    g = build_product(spec)
    formula, direct = m_n_formula(g), m_n_from_descriptors(g)
    report = ExperimentReport("descriptors", {"spec": spec}, {
        "name": g.name,
        "order": str(g.order),
        "count": len(g.descriptors),
        "descriptors": [d.to_json() for d in g.descriptors],
        "m_n": formula,
    })
    report.checks.append(check_eq("m_n_formula_vs_direct", "m_n by formula = m_n by counting", formula, direct))
    _finish(report, fmt, out, start)


@cli.command()
@click.argument("spec")
@click.option("--exact", "mode", flag_value="exact", help="Inclusion-exclusion closed form.")
@click.option("--truncate", "truncate", type=int, help="Partial sum over t < T with a tail bound.")
@click.option("--mc", "trials", type=int, help="Monte Carlo with this many trials.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--cap", type=int, default=DEFAULT_EXACT_CAP, show_default=True, help="Descriptor cap for exact terms.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--bounds", is_flag=True, help="Also evaluate the lower bounds for C.")
@click.option("--profile", type=click.Path(dir_okay=False), help="CSV of t against 1 - P_I(t).")
@click.option("--profile-max-t", type=int, default=30, show_default=True)
@_output_options
def cheb(spec, mode, truncate, trials, seed, cap, workers, bounds, profile, profile_max_t, fmt, out) -> None:
    """Chebotarev invariant C of SPEC (expected draws until invariable generation)."""
    start = time.perf_counter()
    chosen = [m for m in (mode, truncate, trials) if m is not None]
    if len(chosen) != 1:
        raise click.UsageError("choose exactly one of --exact, --truncate T, --mc TRIALS")
    g = build_product(spec)
    inputs: dict[str, Any] = {"spec": spec, "cap": cap}
    results: dict[str, Any] = {"name": g.name, "descriptors": len(g.descriptors)}
    profile_rows: list[list[Any]] = []
    if mode == "exact":
        system = FugacitySystem(g, cap)
        value = system.chebotarev()
        estimate: Any = value
        results.update({"exact": value, "value": float(value)})
        profile_rows = [[t, frac_str(system.failure_probability(t)), float(system.failure_probability(t))]
                        for t in range(profile_max_t + 1)]
    elif truncate is not None:
        inputs["T"] = truncate
        sv = truncated_chebotarev(g, truncate, cap)
        estimate = sv
        results.update(sv.to_json())
        if profile:
            if len(g.descriptors) <= cap:
                system = FugacitySystem(g, cap)
                profile_rows = [[t, frac_str(system.failure_probability(t)), float(system.failure_probability(t))]
                                for t in range(truncate)]
            else:
                qs = [float(d.fugacity_q) for d in g.descriptors]
                profile_rows = [[t, "", min(1.0, sum(q**t for q in qs))] for t in range(truncate)]
    else:
        if trials < 1:
            raise click.BadParameter("trials must be >= 1", param_hint="--mc")
        inputs.update({"trials": trials, "seed": seed})
        counts = sample_waiting_times(g, "invariable", trials, seed, workers)
        est = summarize(counts, seed, "invariable")
        estimate = est
        results.update(est.to_json())
        top = max(profile_max_t, int(counts.max()))
        profile_rows = [[t, "", float(np.mean(counts > t))] for t in range(top + 1)]
    if profile:
        _write_table(profile, ["t", "failure_exact", "failure"], profile_rows)
    report = ExperimentReport("cheb", inputs, results, provenance={"seed": seed} if trials else {})
    if bounds:
        rep = theorem_bounds(g, {"cheb": estimate})
        report.checks.extend(c for c in rep.checks if c.name.startswith("C") or c.name.startswith("diag"))
        report.results["reports"] = rep.reports
    _finish(report, fmt, out, start)


@cli.command()
@click.argument("spec")
@click.option("--exact", "mode", flag_value="exact", help="Moebius sum over the subgroup lattice (simple groups only).")
@click.option("--mc", "trials", type=int, help="Monte Carlo with this many trials.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--bounds", is_flag=True, help="Also evaluate the bounds on e1.")
@_output_options
def e1(spec, mode, trials, seed, workers, bounds, fmt, out) -> None:
    """Expected number of uniform draws until SPEC is generated."""
    start = time.perf_counter()
    if (mode is None) == (trials is None):
        raise click.UsageError("choose exactly one of --exact, --mc TRIALS")
    g = build_product(spec)
    inputs: dict[str, Any] = {"spec": spec}
    if mode == "exact":
        if g.k != 1:
            raise OutOfRange("exact e1 needs a single simple group; use --mc for products")
        group = g.table(0)
        sv = exact_e1(group, subgroup_lattice(group))
        estimate: Any = sv
        results = {"name": g.name, "exact": sv.exact, "value": sv.float}
    else:
        if trials < 1:
            raise click.BadParameter("trials must be >= 1", param_hint="--mc")
        inputs.update({"trials": trials, "seed": seed})
        est = summarize(sample_waiting_times(g, "generation", trials, seed, workers), seed, "generation")
        estimate = est
        results = {"name": g.name, **est.to_json()}
    report = ExperimentReport("e1", inputs, results, provenance={"seed": seed} if trials else {})
    if bounds:
        rep = theorem_bounds(g, {"e1": estimate})
        report.checks.extend(rep.checks)
        report.results["reports"] = rep.reports
    _finish(report, fmt, out, start)


@cli.command()
@click.option("--alpha", "alpha_text", required=True, help="Rational alpha > 1, e.g. 3/2.")
@click.option("--k", "k", type=int, required=True)
@click.option("--sweep", type=click.Path(dir_okay=False), help="CSV of k' = 1..k against both lower bounds.")
@_output_options
def series(alpha_text: str, k: int, sweep: str | None, fmt: str, out: str | None) -> None:
    """The lower-bound series sum_t 1 - (1 - alpha^-t)^k."""
    start = time.perf_counter()
    alpha = _parse_fraction(alpha_text)
    sv = lower_bound_series(alpha, k)
    results: dict[str, Any] = {"alpha": alpha, **sv.to_json(),
                               "log_bound": (1 - math.exp(-1)) * math.log(k) / math.log(float(alpha))}
    report = ExperimentReport("series", {"alpha": frac_str(alpha), "k": k}, results)
    if sweep:
        rows = []
        for kk in range(1, k + 1):
            s = lower_bound_series(alpha, kk)
            rows.append([kk, s.float, (1 - math.exp(-1)) * math.log(kk) / math.log(float(alpha))])
        _write_table(sweep, ["k", "series", "log_bound"], rows)
    _finish(report, fmt, out, start)


@cli.command()
@click.option("--r", "r", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--brute", is_flag=True, help="Cross-check by exhausting S_r (r <= 9).")
@click.option("--cap", type=int, default=DEFAULT_PARTITION_CAP, show_default=True)
@_output_options
def fixset(r: int, k: int, brute: bool, cap: int, fmt: str, out: str | None) -> None:
    """Proportion i(r, k) of S_r stabilizing some k-subset."""
    start = time.perf_counter()
    value = fix_kset_proportion(r, k, cap)
    report = ExperimentReport("fixset", {"r": r, "k": k}, {"exact": value, "value": float(value)})
    if brute:
        if r > 9:
            raise OutOfRange("--brute is limited to r <= 9")
        report.checks.append(check_eq("partition_vs_brute", "i(r,k) by partitions = exhaustive count",
                                      value, fix_kset_brute(r)[k]))
    _finish(report, fmt, out, start)


@cli.command()
@click.option("--suite", type=click.Choice(["paper"]), default="paper", show_default=True)
@click.option("--quick", is_flag=True, help="Reduced Monte Carlo trial counts.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@_output_options
def verify(suite: str, quick: bool, seed: int, workers: int, fmt: str, out: str | None) -> None:
    """Run the reproduction suite; exit 0 only if every check passes."""
    start = time.perf_counter()
    report = suite_paper(quick=quick, seed=seed, workers=workers)
    _finish(report, fmt, out, start)


def main() -> None:
    cli(prog_name="lab")


if __name__ == "__main__":
    main()
