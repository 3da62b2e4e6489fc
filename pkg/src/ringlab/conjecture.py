"""Strong-connectivity failure probabilities for the two random digraph models.

Estimates p_reg(k, n) = Pr[regular digraph not strongly connected] and
p_bin(k, n) = Pr[binomial digraph with p = k/(n-1) not strongly connected]
by Monte Carlo, and evaluates the conjectured chain

    p_reg(k, n)  <=  p_bin(k, n)  <=  1 - exp(-2 * exp(ln n - p n))

on a (k, n) grid.  Inequalities between noisy estimates are accepted with
one-sided 3-sigma slack (the first against the binomial upper CI, the
second against the closed-form bound plus 3 standard errors).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import InvalidParams
from .graph import is_strongly_connected
from .samplers import RandomSource, _digraph_from_in_neighbors, _trial_streams
from .stats import EstimateResult

__all__ = [
    "GridSpec",
    "GridCell",
    "estimate_not_sc_regular",
    "estimate_not_sc_binomial",
    "binomial_bound",
    "graham_pike_limit",
    "check_conjectures_grid",
    "write_grid_csv",
    "LOW_CONFIDENCE_THRESHOLD",
]

# Point estimates below this are kept in the CSV but flagged as unstable
# at the default trial count.
LOW_CONFIDENCE_THRESHOLD = 1e-3


def estimate_not_sc_regular(
    k: int, n: int, trials: int, rng: RandomSource
) -> EstimateResult:
    """Fraction of k-in-degree regular digraphs that are not strongly connected."""
    if n < 1 or not 0 <= k < n:
        raise InvalidParams(f"need 0 <= k < n, got k={k}, n={n}")
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    counts = np.full(n, k, dtype=np.int64)
    failures = 0
    for gen in _trial_streams(rng, trials):
        digraph = _digraph_from_in_neighbors(n, gen, counts)
        if not is_strongly_connected(digraph):
            failures += 1
    return EstimateResult.from_counts(trials, failures)


def estimate_not_sc_binomial(
    p: float, n: int, trials: int, rng: RandomSource
) -> EstimateResult:
    """Fraction of p-binomial digraphs that are not strongly connected."""
    if n < 1 or not 0.0 <= p <= 1.0:
        raise InvalidParams(f"need n >= 1 and p in [0, 1], got n={n}, p={p}")
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    failures = 0
    for gen in _trial_streams(rng, trials):
        counts = (
            gen.binomial(n - 1, p, size=n).astype(np.int64)
            if n > 1
            else np.zeros(1, dtype=np.int64)
        )
        digraph = _digraph_from_in_neighbors(n, gen, counts)
        if not is_strongly_connected(digraph):
            failures += 1
    return EstimateResult.from_counts(trials, failures)


def binomial_bound(k: float, n: int) -> float:
    """Conjectured upper bound 1 - exp(-2 exp(ln n - p n)) at p = k/(n-1).

    Real-valued k is accepted.  Computed with expm1 so values near 0 keep
    full relative precision.
    """
    if n < 2:
        raise InvalidParams(f"need n >= 2, got n={n}")
    p = k / (n - 1)
    return -math.expm1(-2.0 * math.exp(math.log(n) - p * n))


def graham_pike_limit(c: float) -> float:
    """Limiting failure probability 1 - exp(-2 exp(-c)) at p = (ln n + c)/n."""
    return -math.expm1(-2.0 * math.exp(-c))


@dataclass(frozen=True)
class GridSpec:
    """Parameter grid for the conjecture campaigns.

    Cells with k >= n cannot be sampled (the regular model needs k < n and
    the matched binomial probability would exceed 1); :meth:`cells` skips
    them, so grids may freely combine small n with large k.
    """

    k_values: tuple[int, ...]
    n_values: tuple[int, ...]
    trials: int = 8000
    seed: int = 0

    def __post_init__(self):
        if not self.k_values or min(self.k_values) < 1:
            raise InvalidParams("k values must be positive")
        if not self.n_values or min(self.n_values) < 2:
            raise InvalidParams("n values must be >= 2")
        if not 1 <= self.trials < (1 << 32):
            raise InvalidParams("trials must be in [1, 2^32)")

    @classmethod
    def full_grid(cls, trials: int = 8000, seed: int = 0) -> "GridSpec":
        """The figure-scale grid: k from 1 to 16, n from 2^2 to 2^12."""
        return cls(
            k_values=tuple(range(1, 17)),
            n_values=tuple(2**e for e in range(2, 13)),
            trials=trials,
            seed=seed,
        )

    def cells(self) -> list[tuple[int, int]]:
        return [(k, n) for k in self.k_values for n in self.n_values if k < n]


@dataclass(frozen=True)
class GridCell:
    """Both model estimates plus the conjecture verdicts for one (k, n) cell."""

    k: int
    n: int
    p: float
    p_reg: EstimateResult
    p_bin: EstimateResult
    bound: float
    conj1_ok: bool
    conj2_ok: bool


def _grid_task(args: tuple[int, int, str, int, int, int]) -> EstimateResult:
    seed, stream_base, model, k, n, trials = args
    rng = RandomSource(seed, stream_base)
    if model == "reg":
        return estimate_not_sc_regular(k, n, trials, rng)
    return estimate_not_sc_binomial(k / (n - 1), n, trials, rng)


def check_conjectures_grid(spec: GridSpec, workers: int = 1) -> list[GridCell]:
    """Estimate both models on every feasible cell and test the conjectures.

    Each (cell, model) campaign owns stream ids ``index << 32 | trial``,
    so the result is a pure function of the grid parameters regardless
    of ``workers``.
    """
    cells = spec.cells()
    tasks = []
    for ci, (k, n) in enumerate(cells):
        for mi, model in enumerate(("reg", "bin")):
            stream_base = (2 * ci + mi) << 32
            tasks.append((spec.seed, stream_base, model, k, n, spec.trials))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_task, tasks))
    else:
        results = [_grid_task(t) for t in tasks]
    out: list[GridCell] = []
    for ci, (k, n) in enumerate(cells):
        reg = results[2 * ci]
        bin_ = results[2 * ci + 1]
        bound = binomial_bound(k, n)
        out.append(
            GridCell(
                k=k,
                n=n,
                p=k / (n - 1),
                p_reg=reg,
                p_bin=bin_,
                bound=bound,
                conj1_ok=reg.estimate <= bin_.ci_high,
                conj2_ok=bin_.estimate <= bound + 3.0 * bin_.sigma,
            )
        )
    return out


def _fmt(value: float) -> str:
    return f"{value:.12g}"


GRID_CSV_HEADER = (
    "model,k,n,p,trials,failures,estimate,ci_low,ci_high,"
    "bound,conj1_ok,conj2_ok,low_confidence"
)


def write_grid_csv(cells: Iterable[GridCell], out: TextIO) -> None:
    """One row per model per cell, decimal dot, 12 significant digits, LF."""
    out.write(GRID_CSV_HEADER + "\n")
    for cell in cells:
        for model, est in (("reg", cell.p_reg), ("bin", cell.p_bin)):
            low_conf = est.estimate < LOW_CONFIDENCE_THRESHOLD
            row = [
                model,
                str(cell.k),
                str(cell.n),
                _fmt(cell.p),
                str(est.trials),
                str(est.failures),
                _fmt(est.estimate),
                _fmt(est.ci_low),
                _fmt(est.ci_high),
                _fmt(cell.bound),
                "true" if cell.conj1_ok else "false",
                "true" if cell.conj2_ok else "false",
                "true" if low_conf else "false",
            ]
            out.write(",".join(row) + "\n")


def grid_csv_text(cells: Sequence[GridCell]) -> str:
    import io

    buf = io.StringIO()
    write_grid_csv(cells, buf)
    return buf.getvalue()
