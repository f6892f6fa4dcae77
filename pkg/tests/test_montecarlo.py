import json
import math

import numpy as np
import pytest

from invgen.lattice import subgroup_lattice
from invgen.montecarlo import mc_waiting_time, sample_waiting_times
from invgen.product import build_product
from invgen.series import exact_chebotarev, exact_e1

TRIALS = 4000


def test_counts_independent_of_worker_count():
    g = build_product("A5^2")
    one = sample_waiting_times(g, "invariable", 300, seed=17, workers=1)
    three = sample_waiting_times(g, "invariable", 300, seed=17, workers=3)
    assert np.array_equal(one, three)
    assert not np.array_equal(one, sample_waiting_times(g, "invariable", 300, seed=18))


def test_prefix_stability():
    # trial i uses its own stream, so a longer run extends a shorter one
    g = build_product("A5")
    a = sample_waiting_times(g, "generation", 50, seed=4)
    b = sample_waiting_times(g, "generation", 80, seed=4)
    assert np.array_equal(a, b[:50])


def test_waiting_times_at_least_two():
    # no single element generates (or invariably generates) a nonabelian simple group
    g = build_product("PSL(2,7)")
    for mode in ("generation", "invariable"):
        assert sample_waiting_times(g, mode, 200, seed=1).min() >= 2


@pytest.mark.parametrize("name", ["A5", "A6", "PSL(2,7)"])
def test_generation_mc_matches_exact(name):
    g = build_product(name)
    exact = exact_e1(g.table(0), subgroup_lattice(g.table(0))).float
    est = mc_waiting_time(g, "generation", TRIALS, seed=2024)
    assert abs(est.mean - exact) < 3 * math.sqrt(est.variance / est.trials)


@pytest.mark.parametrize("name", ["A5", "A6", "PSL(2,7)", "A5^2"])
def test_invariable_mc_matches_exact(name):
    g = build_product(name)
    exact = exact_chebotarev(g).float
    est = mc_waiting_time(g, "invariable", TRIALS, seed=2025)
    assert abs(est.mean - exact) < 3 * math.sqrt(est.variance / est.trials)


def test_single_trial_is_degenerate():
    est = mc_waiting_time(build_product("A5"), "invariable", 1, seed=0)
    assert est.degenerate and math.isnan(est.ci95)
    doc = est.to_json()
    assert doc["ci95"] is None and doc["variance"] is None
    json.dumps(doc, allow_nan=False)


def test_bad_arguments():
    g = build_product("A5")
    with pytest.raises(ValueError):
        mc_waiting_time(g, "invariable", 0, seed=0)
    with pytest.raises(ValueError):
        mc_waiting_time(g, "sideways", 10, seed=0)
