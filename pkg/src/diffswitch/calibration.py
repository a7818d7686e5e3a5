"""Monte Carlo calibration of the detection cut-offs.

Cut-off pairs (gamma1, gamma2) are empirical quantiles, under the fully
Brownian null with sigma = 1 and delta = 1, of extremes of windowed
order statistics of d_i = min(B_i, A_i) and D_i = max(B_i, A_i). The
strict variant uses rank ceil(c_star/2) and controls the false-detection
probability conservatively; the relaxed variant uses rank c_star and is
the recommended default. A JSON cache keyed by the full calibration key
makes repeated runs free.
"""

import json
import math
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._version import __version__
from .errors import CorruptCache, Degenerate, InvalidParam, IoFailure
from .rng import DEFAULT_SEED, parallel_map, replicate_rng
from .simulators import gen_brownian
from .stats import ThresholdPair, backward_forward, statistic_T
from .trajectory import TimeGrid

STRICT = "strict"
RELAXED = "relaxed"
SEGMENT_TEST = "segment_test"

CACHE_SCHEMA_VERSION = 1

# Segment lengths (in steps) at which labelling quantiles are
# precalibrated; arbitrary lengths snap to the nearest entry.
SEGMENT_LENGTH_GRID = (25, 50, 100, 150, 200, 300, 500)


@dataclass(frozen=True)
class CalibrationKey:
    """Everything that determines a calibrated threshold pair."""

    n: int
    k: int
    c: int
    c_star: int
    alpha: float
    variant: str
    replicates: int
    seed: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidParam(f"alpha must be in (0, 1), got {self.alpha}")
        if self.variant not in (STRICT, RELAXED, SEGMENT_TEST):
            raise InvalidParam(f"unknown variant {self.variant!r}")
        if self.variant != SEGMENT_TEST:
            if not 1 <= self.c_star <= self.c:
                raise InvalidParam(f"need 1 <= c_star <= c, got ({self.c_star}, {self.c})")
            if self.c > self.n - 2 * self.k + 1:
                raise InvalidParam("cluster window c exceeds the statistic range")


def default_cluster_params(k):
    """Recommended cluster window and count threshold for window size k."""
    c = max(2, k // 2)
    return c, math.ceil(0.75 * c)


def default_key(n, k, variant=RELAXED, alpha=0.05, replicates=10_001, seed=DEFAULT_SEED):
    c, c_star = default_cluster_params(k)
    return CalibrationKey(
        n=n, k=k, c=c, c_star=c_star, alpha=alpha, variant=variant,
        replicates=replicates, seed=seed,
    )


def _order_rank(variant, c, c_star):
    """1-based rank q of the d order statistic; the D side uses c - q."""
    q = math.ceil(c_star / 2) if variant == STRICT else c_star
    if q < 1:
        raise Degenerate(f"order-statistic rank {q} < 1")
    if c - q < 1:
        raise Degenerate(f"complementary rank c - q = {c - q} < 1 (c_star too close to c)")
    return q


def _quantile_index(p, n):
    """Sorted-array index (0-based) for the empirical p-quantile: floor(p*N), 1-based, clamped."""
    return min(max(int(p * n), 1), n) - 1


def _replicate_extremes(n, k, c, ranks, rng, sigma=1.0, delta=1.0):
    """One Brownian replicate: (min_r s_r, max_r S_r) for each requested rank."""
    grid = TimeGrid(t0=0.0, delta=delta, n_steps=n)
    traj = gen_brownian(grid, 2, sigma, rng)
    B, A = backward_forward(traj, k)
    d_sorted = np.sort(sliding_window_view(np.minimum(B, A), c), axis=1)
    D_sorted = np.sort(sliding_window_view(np.maximum(B, A), c), axis=1)
    out = {}
    for q in ranks:
        out[q] = (float(d_sorted[:, q - 1].min()), float(D_sorted[:, c - q - 1].max()))
    return out


def calibrate_both(n, k, c, c_star, alpha, replicates, seed, threads=1, sigma=1.0, delta=1.0):
    """Calibrate strict and relaxed pairs from one shared replicate set.

    Returns {variant: ThresholdPair}. The two variants differ only in
    the order-statistic rank, so both come from the same simulations and
    the ordering gamma1_strict <= gamma1_relaxed, gamma2_strict >=
    gamma2_relaxed holds deterministically. sigma and delta only affect
    the replicate simulation; the statistics are scale invariant, so
    they move the result within Monte Carlo error only.
    """
    ranks = {STRICT: _order_rank(STRICT, c, c_star), RELAXED: _order_rank(RELAXED, c, c_star)}
    unique = sorted(set(ranks.values()))

    def one(rep):
        return _replicate_extremes(n, k, c, unique, replicate_rng(seed, rep), sigma, delta)

    results = parallel_map(one, range(replicates), threads=threads)
    pairs = {}
    i_lo = _quantile_index(alpha / 2, replicates)
    i_hi = _quantile_index(1 - alpha / 2, replicates)
    for variant, q in ranks.items():
        m = np.sort(np.array([r[q][0] for r in results]))
        M = np.sort(np.array([r[q][1] for r in results]))
        pairs[variant] = ThresholdPair(gamma1=float(m[i_lo]), gamma2=float(M[i_hi]))
    return pairs


def calibrate(key, threads=1):
    """Monte Carlo estimate of the cut-off pair for one calibration key."""
    if key.variant == SEGMENT_TEST:
        return calibrate_segment_test(key.n, key.alpha, key.replicates, key.seed, threads=threads)
    if key.replicates < 1000:
        raise InvalidParam(f"need at least 1000 replicates, got {key.replicates}")
    pairs = calibrate_both(
        key.n, key.k, key.c, key.c_star, key.alpha, key.replicates, key.seed, threads=threads
    )
    return pairs[key.variant]


def calibrate_segment_test(n, alpha, replicates, seed, threads=1):
    """Quantiles (q1, q2) of the whole-segment statistic under the null.

    Used for a-posteriori segment labelling: subdiffusive below q1,
    superdiffusive above q2, Brownian in between.
    """
    if not 0 < alpha < 1:
        raise InvalidParam(f"alpha must be in (0, 1), got {alpha}")
    if replicates < 1000:
        raise InvalidParam(f"need at least 1000 replicates, got {replicates}")
    grid = TimeGrid(t0=0.0, delta=1.0, n_steps=n)

    def one(rep):
        return statistic_T(gen_brownian(grid, 2, 1.0, replicate_rng(seed, rep)))

    values = np.sort(np.array(parallel_map(one, range(replicates), threads=threads)))
    q1 = float(values[_quantile_index(alpha / 2, replicates)])
    q2 = float(values[_quantile_index(1 - alpha / 2, replicates)])
    return ThresholdPair(gamma1=q1, gamma2=q2)


def segment_test_key(n, alpha=0.05, replicates=10_001, seed=DEFAULT_SEED):
    return CalibrationKey(
        n=n, k=0, c=0, c_star=0, alpha=alpha, variant=SEGMENT_TEST,
        replicates=replicates, seed=seed,
    )


class ThresholdTable:
    """Persistent map from CalibrationKey to ThresholdPair (single JSON file)."""

    def __init__(self, path):
        self.path = path
        self.entries = {}
        self._load()

    def _load(self):
        if not os.path.exists(self.path):
            return
        try:
            with open(self.path, encoding="utf-8") as fh:
                doc = json.load(fh)
            if doc.get("version") != CACHE_SCHEMA_VERSION:
                raise CorruptCache(f"schema version {doc.get('version')!r}")
            for entry in doc["entries"]:
                key = CalibrationKey(**entry["key"])
                self.entries[key] = ThresholdPair(entry["gamma1"], entry["gamma2"])
        except CorruptCache:
            self.entries = {}
        except (OSError, ValueError, KeyError, TypeError):
            # Corrupt cache: recalibrate on demand rather than crash.
            self.entries = {}

    def save(self):
        doc = {
            "version": CACHE_SCHEMA_VERSION,
            "library_version": __version__,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "entries": [
                {"key": vars(key), "gamma1": pair.gamma1, "gamma2": pair.gamma2}
                for key, pair in self.entries.items()
            ],
        }
        directory = os.path.dirname(os.path.abspath(self.path))
        try:
            os.makedirs(directory, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
            os.replace(tmp, self.path)
        except OSError as exc:
            raise IoFailure(f"cannot write cache {self.path}: {exc}") from exc

    def get(self, key):
        return self.entries.get(key)

    def put(self, key, pair):
        self.entries[key] = pair


def cache_get_or_calibrate(store, key, threads=1):
    """Cached calibration: exact key hit returns immediately, miss calibrates.

    `store` is a ThresholdTable or a path to one. A miss for a strict or
    relaxed key persists both variants, since they share the simulations.
    """
    table = store if isinstance(store, ThresholdTable) else ThresholdTable(store)
    hit = table.get(key)
    if hit is not None:
        return hit
    if key.variant == SEGMENT_TEST:
        pair = calibrate_segment_test(key.n, key.alpha, key.replicates, key.seed, threads=threads)
        table.put(key, pair)
    else:
        if key.replicates < 1000:
            raise InvalidParam(f"need at least 1000 replicates, got {key.replicates}")
        pairs = calibrate_both(
            key.n, key.k, key.c, key.c_star, key.alpha, key.replicates, key.seed, threads=threads
        )
        for variant, p in pairs.items():
            table.put(
                CalibrationKey(
                    n=key.n, k=key.k, c=key.c, c_star=key.c_star, alpha=key.alpha,
                    variant=variant, replicates=key.replicates, seed=key.seed,
                ),
                p,
            )
        pair = pairs[key.variant]
    table.save()
    return pair


class SegmentQuantiles:
    """Length-dependent labelling quantiles on a fixed grid of lengths.

    Quantiles of the whole-segment statistic drift slowly with segment
    length, so arbitrary lengths snap to the nearest grid entry.
    """

    def __init__(self, store=None, alpha=0.05, replicates=10_001, seed=DEFAULT_SEED, threads=1):
        if store is None or isinstance(store, ThresholdTable):
            self.table = store
        else:
            self.table = ThresholdTable(store)
        self.alpha = alpha
        self.replicates = replicates
        self.seed = seed
        self.threads = threads
        self._memo = {}

    def __call__(self, n_steps):
        length = min(SEGMENT_LENGTH_GRID, key=lambda g: (abs(g - n_steps), g))
        if length not in self._memo:
            key = segment_test_key(length, self.alpha, self.replicates, self.seed)
            if self.table is not None:
                pair = cache_get_or_calibrate(self.table, key, threads=self.threads)
            else:
                pair = calibrate_segment_test(
                    length, self.alpha, self.replicates, self.seed, threads=self.threads
                )
            self._memo[length] = (pair.gamma1, pair.gamma2)
        return self._memo[length]


def estimate_type1_error(n, k, c, c_star, thresholds, replicates, seed, threads=1):
    """Fraction of fully Brownian trajectories with a detected change point.

    Returns (proportion, binomial standard error).
    """
    from .detection import find_clusters  # local import avoids a module cycle

    if replicates < 500:
        raise InvalidParam(f"need at least 500 replicates, got {replicates}")
    from .stats import sliding_stats

    grid = TimeGrid(t0=0.0, delta=1.0, n_steps=n)

    def one(rep):
        traj = gen_brownian(grid, 2, 1.0, replicate_rng(seed, rep))
        stats = sliding_stats(traj, k, thresholds)
        return bool(find_clusters(stats.Q, c, c_star))

    hits = sum(parallel_map(one, range(replicates), threads=threads))
    p = hits / replicates
    se = math.sqrt(p * (1 - p) / replicates)
    return p, se
