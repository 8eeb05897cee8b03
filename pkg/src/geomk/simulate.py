"""Monte Carlo sampling of the waiting time, with goodness-of-fit checks.

Randomness comes from a self-contained splitmix64 generator (Steele, Lea &
Flood's constants) so the bit stream is identical on every platform and
Python version:

    state   <- (state + 0x9E3779B97F4A7C15) mod 2^64
    output  <- mix(state)   where mix is the splitmix64 finalizer
    uniform <- (output >> 11) * 2^-53

Trial i draws from its own stream whose initial state is
mix((seed + i * 0x9E3779B97F4A7C15) mod 2^64).  Because streams are keyed
by trial index, any partition of trials across workers reproduces the
single-threaded result exactly.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from . import moments as moments_mod
from .numerics import DomainError
from .pmf import pmf_recurrence, recurrence_series
from .params import Params, as_float_params

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U53 = 2.0 ** -53


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Minimal seedable stream; see the module docstring for the contract."""

    def __init__(self, state: int):
        self.state = state & _MASK

    @classmethod
    def for_trial(cls, seed: int, index: int) -> "SplitMix64":
        return cls(_mix64((seed + index * _GOLDEN) & _MASK))

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _U53


@dataclass(frozen=True)
class SimConfig:
    params: Params
    trials: int
    seed: int
    max_steps_per_trial: int = 10_000_000

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.max_steps_per_trial < self.params.k:
            raise DomainError("max_steps_per_trial must allow at least one run")


@dataclass(frozen=True)
class SimSummary:
    config: SimConfig
    sample_mean: Optional[float]
    sample_variance: Optional[float]    # unbiased; None when < 2 samples
    histogram: dict
    trials: int
    truncated_count: int

    def to_dict(self):
        return {
            "p": str(self.config.params.p),
            "k": self.config.params.k,
            "trials": self.trials,
            "seed": self.config.seed,
            "max_steps_per_trial": self.config.max_steps_per_trial,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "truncated_count": self.truncated_count,
            "histogram": {str(n): c for n, c in sorted(self.histogram.items())},
        }

    def to_json(self, stream):
        json.dump(self.to_dict(), stream, indent=2)
        stream.write("\n")

    def histogram_csv(self, stream):
        params = self.config.params
        completed = self.trials - self.truncated_count
        writer = csv.writer(stream)
        writer.writerow(["n", "count", "frequency", "analytic"])
        n_max = max(self.histogram) if self.histogram else params.k
        analytic = recurrence_series(as_float_params(params), n_max)
        for n in range(params.k, n_max + 1):
            count = self.histogram.get(n, 0)
            freq = count / completed if completed else 0.0
            writer.writerow([n, count, repr(freq), repr(float(analytic[n]))])


def sample_waiting_time(params: Params, rng: SplitMix64,
                        max_steps: int = 10_000_000) -> Optional[int]:
    """Trial index at which the first run of k successes completes.

    Returns None when the cap is hit (a truncation marker, not an error);
    callers count truncations instead of dropping them silently.
    """
    p = float(params.p)
    k = params.k
    streak = 0
    for step in range(1, max_steps + 1):
        if rng.uniform() < p:
            streak += 1
            if streak == k:
                return step
        else:
            streak = 0
    return None


def run_simulation(config: SimConfig) -> SimSummary:
    """Deterministic summary over config.trials independent samples."""
    p = float(config.params.p)
    k = config.params.k
    seed = config.seed & _MASK
    cap = config.max_steps_per_trial
    histogram = Counter()
    truncated = 0
    # Hot loop: the generator from the module docstring, inlined.
    for i in range(config.trials):
        state = _mix64((seed + i * _GOLDEN) & _MASK)
        streak = 0
        n = 0
        while n < cap:
            n += 1
            state = (state + _GOLDEN) & _MASK
            z = ((state ^ (state >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            z ^= z >> 31
            if (z >> 11) * _U53 < p:
                streak += 1
                if streak == k:
                    histogram[n] += 1
                    break
            else:
                streak = 0
        else:
            truncated += 1

    completed = config.trials - truncated
    mean = variance = None
    if completed >= 1:
        total = sum(n * c for n, c in histogram.items())
        mean = total / completed
        if completed >= 2:
            ss = math.fsum(c * (n - mean) ** 2 for n, c in histogram.items())
            variance = ss / (completed - 1)
    return SimSummary(config=config, sample_mean=mean, sample_variance=variance,
                      histogram=dict(histogram), trials=config.trials,
                      truncated_count=truncated)


@dataclass(frozen=True)
class GofReport:
    chi_square: float
    dof: int
    p_value: float
    flagged: bool            # soft: p-value below threshold
    hard_fail: bool          # impossible support observed
    mean_z: Optional[float]
    variance_z: Optional[float]
    bins: tuple              # (label, observed, expected)
    threshold: float

    def to_dict(self):
        return {
            "chi_square": self.chi_square,
            "dof": self.dof,
            "p_value": self.p_value,
            "flagged": self.flagged,
            "hard_fail": self.hard_fail,
            "mean_z": self.mean_z,
            "variance_z": self.variance_z,
            "threshold": self.threshold,
            "bins": [{"bin": label, "observed": obs, "expected": exp}
                     for label, obs, exp in self.bins],
        }


def gof_report(summary: SimSummary, params: Params,
               threshold: float = 0.001, min_expected: float = 5.0) -> GofReport:
    """Chi-square comparison of the empirical histogram against the pmf.

    Bins with expected count below min_expected are pooled into the tail.
    Mass observed below the support (n < k) is a hard failure; a small
    chi-square p-value only flags the report (soft, to tolerate 1-in-1000
    flukes in CI).  Mean and variance z-scores use the analytic moments.
    """
    from scipy.stats import chi2

    own = summary.config.params
    if own.k != params.k or float(own.p) != float(params.p):
        raise DomainError(
            f"summary was simulated at {own} but compared against {params}")

    k = params.k
    hard_fail = any(n < k for n in summary.histogram)
    completed = summary.trials - summary.truncated_count
    fparams = as_float_params(params)

    # Individual bins while the expected count stays above the cutoff, then
    # one pooled tail bin.
    edges = []
    cum = 0.0
    n = k
    while True:
        f = pmf_recurrence(fparams, n)
        if completed * f < min_expected or n - k > 100_000:
            break
        edges.append((n, completed * f))
        cum += f
        n += 1
    tail_expected = completed * (1.0 - cum)
    while edges and tail_expected < min_expected:
        last_n, last_exp = edges.pop()
        tail_expected += last_exp
        n = last_n
    observed = [summary.histogram.get(m, 0) for m, _ in edges]
    tail_observed = sum(c for m, c in summary.histogram.items() if m >= n)
    bins = [(str(m), obs, exp) for (m, exp), obs in zip(edges, observed)]
    bins.append((f">={n}", tail_observed, tail_expected))

    stat = sum((obs - exp) ** 2 / exp for _, obs, exp in bins)
    dof = max(len(bins) - 1, 1)
    p_value = float(chi2.sf(stat, dof))

    mean_z = variance_z = None
    if completed >= 2 and summary.sample_mean is not None:
        mu = float(moments_mod.mean(fparams))
        var = float(moments_mod.variance(fparams))
        mean_z = (summary.sample_mean - mu) / math.sqrt(var / completed)
        report = moments_mod.moment_report(fparams, 4)
        mu4 = float(report.central[2])
        var_of_s2 = (mu4 - var ** 2 * (completed - 3) / (completed - 1)) / completed
        if var_of_s2 > 0 and summary.sample_variance is not None:
            variance_z = (summary.sample_variance - var) / math.sqrt(var_of_s2)

    return GofReport(chi_square=stat, dof=dof, p_value=p_value,
                     flagged=p_value < threshold, hard_fail=hard_fail,
                     mean_z=mean_z, variance_z=variance_z,
                     bins=tuple(bins), threshold=threshold)
