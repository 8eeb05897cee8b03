"""Factorial moments and their conversions.

The central identity: the r-th factorial moment of the waiting time equals

    mu_(r) = r! * f((r+1)k + r) / (q p^k)^{r+1},

a single pmf evaluation.  Two further routes expand that pmf value as finite
binomial sums (one needing the extended binomial conventions, one
vanishing-free); all three must agree bit-exactly on rationals.

An independent truncated-series oracle sums n(n-1)...(n-r+1) f(n) directly
from the recurrence, with the truncation point chosen from the spectral
tail envelope, so the identity itself is verifiable without trusting it.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from . import roots as roots_mod
from .numerics import (ConsistencyError, DomainError, Mode, PrecisionWarning,
                       Scalar, SolverError, falling_factorial, gen_binomial)
from .params import Params, as_float_params, qpk
from .pmf import Engine
from .pmf import _exact_pq as pmf_exact_pq
from .pmf import _finish_sum as pmf_finish_sum
from .pmf import pmf as pmf_eval

logger = logging.getLogger(__name__)


def factorial_moment(params: Params, r: int,
                     engine: Engine = Engine.RECURRENCE,
                     root_set=None) -> Scalar:
    """mu_(r) = r! f((r+1)k + r) / (q p^k)^{r+1} via the chosen pmf engine."""
    _check_r(r)
    n = (r + 1) * params.k + r
    f = pmf_eval(params, n, engine, root_set)
    return math.factorial(r) * f / qpk(params) ** (r + 1)


def factorial_moment_muselli(params: Params, r: int) -> Scalar:
    """mu_(r) as the finite alternating sum over m = 1..r+1.

    This is the pmf sum specialized to n = (r+1)k + r, where the upper limit
    collapses to r+1; it exercises C(-1,-1) = 1 at m = r+1 when k = 1.
    Terms are evaluated exactly in both modes (see pmf._finish_sum).
    """
    _check_r(r)
    k = params.k
    p, q = pmf_exact_pq(params)
    terms = []
    for m in range(1, r + 2):
        i = (r + 1 - m) * k + r - 1
        bracket = gen_binomial(i, m - 2) + q * gen_binomial(i, m - 1)
        sign = 1 if m % 2 == 1 else -1
        terms.append(sign * p ** (m * k) * q ** (m - 1) * bracket)
    total = pmf_finish_sum(params, terms,
                           f"factorial_moment_muselli(r={r}, {params})")
    return math.factorial(r) * total / qpk(params) ** (r + 1)


def factorial_moment_closed(params: Params, r: int) -> Scalar:
    """mu_(r) from the vanishing-free pmf form, upper limits r+1 and r."""
    _check_r(r)
    k = params.k
    p, q = pmf_exact_pq(params)
    terms = [q * p ** k]
    for m in range(2, r + 2):
        i, j = (r + 1 - m) * k + r - 1, m - 2
        if not 0 <= j <= i:
            raise ConsistencyError(f"vanishing-free moment sum hit C({i},{j})")
        sign = -1 if m % 2 == 0 else 1
        terms.append(sign * p ** (m * k) * q ** (m - 1) * gen_binomial(i, j))
    for m in range(2, r + 1):
        i, j = (r + 1 - m) * k + r - 1, m - 1
        if not 0 <= j <= i:
            raise ConsistencyError(f"vanishing-free moment sum hit C({i},{j})")
        sign = -1 if m % 2 == 0 else 1
        terms.append(sign * p ** (m * k) * q ** m * gen_binomial(i, j))
    total = pmf_finish_sum(params, terms,
                           f"factorial_moment_closed(r={r}, {params})")
    return math.factorial(r) * total / qpk(params) ** (r + 1)


def mean(params: Params) -> Scalar:
    """E[N] = (1 - p^k) / (q p^k)."""
    return (1 - params.p ** params.k) / qpk(params)


def variance(params: Params) -> Scalar:
    """Var[N] = 1/(q p^k)^2 - (2k+1)/(q p^k) - p/q^2."""
    c = qpk(params)
    return 1 / c ** 2 - (2 * params.k + 1) / c - params.p / params.q ** 2


@lru_cache(maxsize=None)
def stirling2(m: int, j: int) -> int:
    """Stirling numbers of the second kind by the triangular recurrence."""
    if m == j:
        return 1
    if j < 1 or j > m:
        return 0
    return j * stirling2(m - 1, j) + stirling2(m - 1, j - 1)


@dataclass(frozen=True)
class MomentReport:
    params: Params
    r_max: int
    factorial: tuple        # mu_(1) .. mu_(r_max)
    raw: tuple              # E[N], E[N^2], ...
    central: tuple          # orders 2..r_max (variance first); empty if r_max < 2
    mean: Scalar
    variance: Scalar
    method: Engine
    precision_flags: tuple  # per factorial entry: True when cancellation-degraded

    def to_dict(self):
        return {
            "p": str(self.params.p),
            "k": self.params.k,
            "mode": self.params.mode.value,
            "method": self.method.value,
            "r_max": self.r_max,
            "factorial": [_json_scalar(v) for v in self.factorial],
            "raw": [_json_scalar(v) for v in self.raw],
            "central": [_json_scalar(v) for v in self.central],
            "mean": _json_scalar(self.mean),
            "variance": _json_scalar(self.variance),
            "precision_flags": list(self.precision_flags),
        }

    def to_text(self):
        lines = [f"moments for p={self.params.p}, k={self.params.k} "
                 f"({self.params.mode.value}, engine={self.method.value})",
                 f"  mean     = {self.mean}",
                 f"  variance = {self.variance}"]
        for r in range(1, self.r_max + 1):
            flag = "  [precision degraded]" if self.precision_flags[r - 1] else ""
            lines.append(f"  r={r}: factorial={self.factorial[r - 1]} "
                         f"raw={self.raw[r - 1]}{flag}")
        return "\n".join(lines)


def _json_scalar(value: Scalar):
    return str(value) if isinstance(value, Fraction) else float(value)


def moment_report(params: Params, r_max: int,
                  engine: Engine = Engine.RECURRENCE) -> MomentReport:
    """Factorial moments for r = 1..r_max plus raw/central conversions.

    Raw moments use E[N^m] = sum_j S(m, j) mu_(j) with exact integer
    Stirling numbers; central moments expand binomially around the mean.
    """
    _check_r(r_max)
    root_set = None
    if engine is Engine.ROOT_SUM:
        root_set = roots_mod.find_roots(params)
    factorial = []
    flags = []
    for r in range(1, r_max + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", PrecisionWarning)
            value = factorial_moment(params, r, engine, root_set)
        factorial.append(value)
        flags.append(any(issubclass(w.category, PrecisionWarning) for w in caught))
    for r, value in enumerate(factorial, start=1):
        if not value > 0:
            raise ConsistencyError(f"factorial moment r={r} not positive: {value}")
    if any(b <= a for a, b in zip(factorial, factorial[1:])):
        logger.info("factorial moments not strictly increasing for %s", params)

    raw = [sum(stirling2(m, j) * factorial[j - 1] for j in range(1, m + 1))
           for m in range(1, r_max + 1)]
    mu = factorial[0]
    raw0 = [1] + raw
    central = []
    for m in range(2, r_max + 1):
        central.append(sum(math.comb(m, i) * raw0[i] * (-mu) ** (m - i)
                           for i in range(m + 1)))
    return MomentReport(params=params, r_max=r_max, factorial=tuple(factorial),
                        raw=tuple(raw), central=tuple(central),
                        mean=mean(params), variance=variance(params),
                        method=engine, precision_flags=tuple(flags))


def _check_r(r: int):
    if r < 1:
        raise DomainError(f"moment order r must be >= 1, got {r}")


@dataclass(frozen=True)
class SeriesOracle:
    """Truncated moment sums S_r = sum_{n<=n_terms} n(n-1)..(n-r+1) f(n).

    bounds[r-1] dominates the discarded tail, so any claimed mu_(r) must sit
    within bounds[r-1] of sums[r-1]; in exact mode mu_(r) - S_r is exactly
    the (positive) tail.
    """
    sums: tuple
    bounds: tuple
    n_terms: int


_MAX_ORACLE_TERMS = 4_000_000
_CHECK_EVERY = 128


def factorial_moment_series(params: Params, r_max: int,
                            rel_tol: float = 1e-15) -> SeriesOracle:
    """Independent oracle: sum the factorial-moment series term by term.

    The truncation point is found from the spectral envelope f(n) <= A m^n
    (float arithmetic is used only to decide where to stop).  In exact mode
    the partial sums are computed on scaled integers: with p = a/b the
    recurrence becomes the integer recurrence
    g(n) = sum_i a^{i-1} (b-a) g(n-i) for f(n) = g(n) / b^n, which avoids
    per-step gcd reduction entirely.
    """
    _check_r(r_max)
    k = params.k
    fparams = as_float_params(params)
    root_set = roots_mod.find_roots(fparams)
    env_a, env_m = roots_mod.pmf_envelope(fparams, root_set)
    exact = params.mode is Mode.EXACT

    if exact:
        a = params.p.numerator
        b = params.p.denominator
        coeffs = [a ** i * (b - a) for i in range(k)]
        window = [0] * (k - 1) + [a ** k]         # g(n-k+1..n) at n=k
        sums = [0] * r_max                        # scaled by b^n
    else:
        p, q = float(params.p), float(params.q)
        coeffs = [q * p ** i for i in range(k)]
        window = [0.0] * (k - 1) + [p ** k]
        sums = [0.0] * r_max
        carries = [0.0] * r_max
    float_sums = [0.0] * r_max
    fwindow = [0.0] * (k - 1) + [float(fparams.p) ** k]
    fcoeffs = [float(fparams.q) * float(fparams.p) ** i for i in range(k)]

    n = k
    while True:
        f_float = fwindow[-1]
        for ri in range(r_max):
            ff = falling_factorial(n, ri + 1)
            if exact:
                sums[ri] = sums[ri] * b + ff * window[-1]
            else:
                term = ff * window[-1]
                t = sums[ri] + term
                if abs(sums[ri]) >= abs(term):
                    carries[ri] += (sums[ri] - t) + term
                else:
                    carries[ri] += (term - t) + sums[ri]
                sums[ri] = t
            float_sums[ri] += ff * f_float

        if n % _CHECK_EVERY == 0 or n - k < 8:
            bounds = [_series_tail_bound(env_a, env_m, n, ri + 1)
                      for ri in range(r_max)]
            if all(bd is not None and bd <= rel_tol * s
                   for bd, s in zip(bounds, float_sums)):
                break
        if n - k >= _MAX_ORACLE_TERMS:
            raise SolverError(
                f"series oracle did not reach rel_tol={rel_tol} within "
                f"{_MAX_ORACLE_TERMS} terms for {params}")
        n += 1
        nxt = sum(coeffs[i] * window[k - 1 - i] for i in range(k))
        window = window[1:] + [nxt]
        fnxt = sum(fcoeffs[i] * fwindow[k - 1 - i] for i in range(k))
        fwindow = fwindow[1:] + [fnxt]

    if exact:
        scale = b ** n
        final = tuple(Fraction(s, scale) for s in sums)
    else:
        final = tuple(s + c for s, c in zip(sums, carries))
    return SeriesOracle(sums=final, bounds=tuple(bounds), n_terms=n)


def _series_tail_bound(env_a: float, env_m: float, n: int, r: int) -> Optional[float]:
    """Bound sum_{j>n} j(j-1)..(j-r+1) f(j) via f(j) <= A m^j and
    j^r m^j <= (n+1)^r m^{n+1} rho^{j-n-1} with rho = m ((n+2)/(n+1))^r."""
    rho = env_m * ((n + 2) / (n + 1)) ** r
    if rho >= 1.0:
        return None
    lead = env_a * (n + 1) ** r * env_m ** (n + 1)
    return lead / (1.0 - rho)
