"""Monte Carlo estimates of the waiting times for (invariable) generation.

Trial ``i`` of a run with seed ``s`` draws from ``make_stream(s, i)``, so the
result is the same whatever the number of workers or the chunking.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvgenError
from .perm import make_stream
from .product import ProductGroup, Tracker

MAX_DRAWS_PER_TRIAL = 10**6
DRAW_BATCH = 8


@dataclass
class WaitingTimeEstimate:
    mean: float
    variance: float
    trials: int
    ci95: float
    seed: int
    mode: str
    degenerate: bool = False

    def to_json(self) -> dict:
        def clean(x):
            return None if isinstance(x, float) and not math.isfinite(x) else x

        return {
            "estimate": self.mean,
            "variance": clean(self.variance),
            "ci95": clean(self.ci95),
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "degenerate": self.degenerate,
        }


class DrawCapExceeded(InvgenError):
    pass


def _run_trials(g: ProductGroup, mode: str, seed: int, start: int, stop: int) -> np.ndarray:
    tracker = Tracker(g, mode)
    orders = tracker.orders
    counts = np.empty(stop - start, dtype=np.int64)
    for trial in range(start, stop):
        rng = make_stream(seed, trial)
        tracker.reset()
        n = 0
        done = False
        while not done:
            batch = rng.integers(0, orders, size=(DRAW_BATCH, g.k))
            for row in batch:
                n += 1
                if tracker.add(row):
                    done = True
                    break
            if n >= MAX_DRAWS_PER_TRIAL:
                raise DrawCapExceeded(f"trial {trial} exceeded {MAX_DRAWS_PER_TRIAL} draws")
        counts[trial - start] = n
    return counts


def _chunk_worker(args):
    return _run_trials(*args)


def sample_waiting_times(g: ProductGroup, mode: str, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Raw per-trial waiting times, in trial order."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if workers <= 1 or trials < 2 * workers:
        return _run_trials(g, mode, seed, 0, trials)
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(g, mode, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_chunk_worker, jobs))
    return np.concatenate(parts)


def summarize(counts: np.ndarray, seed: int, mode: str) -> WaitingTimeEstimate:
    trials = len(counts)
    mean = float(np.mean(counts))
    if trials < 2:
        return WaitingTimeEstimate(mean, float("nan"), trials, float("nan"), seed, mode, degenerate=True)
    var = float(np.var(counts, ddof=1))
    return WaitingTimeEstimate(mean, var, trials, 1.96 * math.sqrt(var / trials), seed, mode)


def mc_waiting_time(g: ProductGroup, mode: str, trials: int, seed: int, workers: int = 1) -> WaitingTimeEstimate:
    """Estimate e1 (mode="generation") or C (mode="invariable")."""
    counts = sample_waiting_times(g, mode, trials, seed, workers)
    return summarize(counts, seed, mode)
