"""Probability mass function of the waiting time for a run of k successes.

Four independent engines share the contract (params, n) -> probability:

* recurrence  -- forward iteration of the order-k linear recurrence
                 f(n) = q f(n-1) + p q f(n-2) + ... + p^{k-1} q f(n-k)
                 seeded with f(n) = 0 below k and f(k) = p^k.  All terms are
                 nonnegative and it runs exactly on rationals, so this is the
                 reference engine.
* muselli     -- Muselli's alternating binomial sum, which needs the extended
                 binomial conventions C(-1,-1) = 1 and C(-1,0) = 0 at n = k.
* closedform  -- an equivalent alternating sum rearranged so that no binomial
                 coefficient vanishes (all arguments satisfy 0 <= j <= i).
* rootsum     -- spectral form over the characteristic roots (float only).

Every engine returns 0 for n = 0 so tables can be built over n = 0..n_max.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from . import roots as roots_mod
from .numerics import (ConsistencyError, DomainError, Mode, ModeError,
                       PrecisionWarning, Scalar, gen_binomial)
from .params import Params
from .roots import RootSet

IMAG_RESIDUE_TOL = 1e-12
# A float alternating sum whose terms exceed the result by this factor has
# lost more than ~10 significant digits.
CANCELLATION_FLAG_RATIO = 1e6


class Engine(Enum):
    RECURRENCE = "recurrence"
    ROOT_SUM = "rootsum"
    MUSELLI = "muselli"
    CLOSED_FORM = "closedform"


def _check_n(n: int):
    if n < 0:
        raise DomainError(f"pmf argument n must be >= 0, got {n}")


def _zero(params: Params) -> Scalar:
    return Fraction(0) if params.mode is Mode.EXACT else 0.0


def _exact_pq(params: Params):
    """(p, q) as exact rationals in either mode.

    A float is an exact binary rational, so the alternating sums can be
    evaluated without intermediate rounding even in float mode; the result
    is rounded back to float once at the end.  Pure double-precision term
    accumulation loses up to ten digits to cancellation (sum |terms| can
    exceed 1e7 while f(n) is tiny), which would break the cross-engine
    agreement this library promises.
    """
    if params.mode is Mode.EXACT:
        return params.p, params.q
    return Fraction(params.p), Fraction(params.q)


def _finish_sum(params: Params, terms, label) -> Scalar:
    """Exact sum of exact terms, rounded once in float mode.

    The cancellation guard still fires when sum |terms| dwarfs the result:
    the returned float is correctly rounded, but the formula itself is
    ill-conditioned there (a one-ulp change of p moves the result by far
    more than one ulp).
    """
    total = sum(terms, Fraction(0))
    if params.mode is Mode.EXACT:
        return total
    result = float(total)
    magnitude = float(sum(abs(t) for t in terms))
    if terms and magnitude > CANCELLATION_FLAG_RATIO * abs(result):
        warnings.warn(
            f"{label}: precision degraded (sum of |terms| = {magnitude:.3e} vs "
            f"result = {result:.3e})", PrecisionWarning, stacklevel=3)
    return result


def pmf_recurrence(params: Params, n: int) -> Scalar:
    """Reference engine: forward iteration with an O(k) sliding window."""
    _check_n(n)
    k = params.k
    if n < k:
        return _zero(params)
    coeffs = [params.q * params.p ** i for i in range(k)]
    window = [_zero(params)] * (k - 1) + [params.p ** k]  # f(n-k+1..n) at n=k
    for _ in range(n - k):
        nxt = sum(coeffs[i] * window[k - 1 - i] for i in range(k))
        window = window[1:] + [nxt]
    return window[-1]


def recurrence_series(params: Params, n_max: int) -> list:
    """f(0..n_max) in one pass; same values as pmf_recurrence."""
    _check_n(n_max)
    k = params.k
    zero = _zero(params)
    values = [zero] * min(k, n_max + 1)
    if n_max < k:
        return values
    values.append(params.p ** k)
    coeffs = [params.q * params.p ** i for i in range(k)]
    for n in range(k + 1, n_max + 1):
        values.append(sum(coeffs[i] * values[n - 1 - i] for i in range(k)))
    return values


def pmf_muselli(params: Params, n: int) -> Scalar:
    """Muselli's alternating sum over m = 1..floor((n+1)/(k+1)).

    Each term is (-1)^{m-1} p^{mk} q^{m-1} [C(n-mk-1, m-2) + q C(n-mk-1, m-1)]
    under the extended binomial conventions.  Heavy cancellation raises
    PrecisionWarning (see _finish_sum).
    """
    _check_n(n)
    k = params.k
    p, q = _exact_pq(params)
    m_max = (n + 1) // (k + 1)
    if m_max < 1:
        return _zero(params)
    terms = []
    for m in range(1, m_max + 1):
        i = n - m * k - 1
        bracket = gen_binomial(i, m - 2) + q * gen_binomial(i, m - 1)
        sign = 1 if m % 2 == 1 else -1
        terms.append(sign * p ** (m * k) * q ** (m - 1) * bracket)
    return _finish_sum(params, terms, f"pmf_muselli(n={n}, {params})")


def pmf_closedform(params: Params, n: int) -> Scalar:
    """Vanishing-free piecewise form.

    0 below the support, p^k at n = k, the plateau value q p^k on
    [k+1, 2k], and for n > 2k the plateau minus two alternating sums whose
    binomial arguments all satisfy 0 <= j <= i (checked).
    """
    _check_n(n)
    k = params.k
    if n < k:
        return _zero(params)
    if n == k:
        return params.p ** k
    if n <= 2 * k:
        return params.q * params.p ** k
    p, q = _exact_pq(params)
    terms = [q * p ** k]
    for m in range(2, (n + 1) // (k + 1) + 1):
        i, j = n - m * k - 1, m - 2
        if not 0 <= j <= i:
            raise ConsistencyError(
                f"vanishing-free form produced C({i},{j}) at n={n}, m={m}")
        sign = -1 if m % 2 == 0 else 1
        terms.append(sign * p ** (m * k) * q ** (m - 1) * gen_binomial(i, j))
    for m in range(2, n // (k + 1) + 1):
        i, j = n - m * k - 1, m - 1
        if not 0 <= j <= i:
            raise ConsistencyError(
                f"vanishing-free form produced C({i},{j}) at n={n}, m={m}")
        sign = -1 if m % 2 == 0 else 1
        terms.append(sign * p ** (m * k) * q ** m * gen_binomial(i, j))
    return _finish_sum(params, terms, f"pmf_closedform(n={n}, {params})")


def pmf_rootsum(params: Params, root_set: RootSet, n: int) -> float:
    """Spectral engine: f(n) = sum_j c_j lambda_j^{n-k} (float mode only).

    The weights come from roots.spectral_coefficients, which selects the
    degenerate branch (weight 2 on the principal root, 1 elsewhere) when
    p = k/(k+1).  The imaginary part of the assembled sum must cancel to
    below 1e-12 before it is discarded.
    """
    if params.mode is not Mode.FLOAT:
        raise ModeError("pmf_rootsum requires float-mode params")
    _check_n(n)
    k = params.k
    if n < k:
        return 0.0
    principal = root_set.roots[root_set.principal_index]
    if roots_mod._identity_residual(principal, params) > 1e-10:
        raise ConsistencyError(
            f"root set does not belong to {params} (principal residual too large)")
    coeffs = roots_mod.spectral_coefficients(params, root_set)
    acc = sum(c * z ** (n - k) for c, z in zip(coeffs, root_set.roots))
    if abs(acc.imag) > IMAG_RESIDUE_TOL:
        raise ConsistencyError(
            f"imaginary residue {acc.imag:.3e} exceeds {IMAG_RESIDUE_TOL} "
            f"at n={n} for {params}")
    return acc.real


def pgf_eval(params: Params, s: Scalar) -> Scalar:
    """Generating function p^k s^k (1 - p s) / (1 - s + q p^k s^{k+1}).

    Defined for |s| <= 1; equals 1 exactly at s = 1.  The denominator cannot
    vanish there for valid params (it is at least 1 - |s| + 0 on [0, 1) and
    q p^k at s = 1), but is checked defensively.
    """
    if isinstance(s, int):
        s = Fraction(s) if params.mode is Mode.EXACT else float(s)
    if params.mode is Mode.EXACT and isinstance(s, float):
        raise ModeError("exact-mode pgf_eval needs a rational s")
    if params.mode is Mode.FLOAT:
        s = float(s)
    if abs(s) > 1:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s}")
    p, q, k = params.p, params.q, params.k
    num = p ** k * s ** k * (1 - p * s)
    den = 1 - s + q * p ** k * s ** (k + 1)
    if den == 0:
        raise DomainError(f"pgf denominator vanished at s={s} for {params}")
    return num / den


def pmf(params: Params, n: int, engine: Engine = Engine.RECURRENCE,
        root_set: Optional[RootSet] = None) -> Scalar:
    """Evaluate f(n) with the chosen engine (root set built on demand)."""
    if engine is Engine.RECURRENCE:
        return pmf_recurrence(params, n)
    if engine is Engine.MUSELLI:
        return pmf_muselli(params, n)
    if engine is Engine.CLOSED_FORM:
        return pmf_closedform(params, n)
    if engine is Engine.ROOT_SUM:
        if params.mode is not Mode.FLOAT:
            raise ModeError("the rootsum engine is float-only; "
                            "use recurrence, muselli or closedform in exact mode")
        if root_set is None:
            root_set = roots_mod.find_roots(params)
        return pmf_rootsum(params, root_set, n)
    raise DomainError(f"unknown engine {engine!r}")


@dataclass(frozen=True)
class PmfTable:
    params: Params
    engine: Engine
    entries: tuple          # f(0), f(1), ..., f(n_max)
    cumulative: tuple
    tail_bound: Optional[float]  # float-mode geometric bound beyond n_max

    @property
    def n_max(self) -> int:
        return len(self.entries) - 1

    def rows(self):
        for n, (f, c) in enumerate(zip(self.entries, self.cumulative)):
            yield n, f, c

    def to_csv(self, stream):
        writer = csv.writer(stream)
        writer.writerow(["n", "f", "cumulative"])
        for n, f, c in self.rows():
            writer.writerow([n, _render(f), _render(c)])

    def to_dict(self):
        return {
            "p": str(self.params.p),
            "k": self.params.k,
            "mode": self.params.mode.value,
            "engine": self.engine.value,
            "n_max": self.n_max,
            "tail_bound": self.tail_bound,
            "entries": [
                {"n": n, "f": _json_scalar(f), "cumulative": _json_scalar(c)}
                for n, f, c in self.rows()
            ],
        }

    def to_json(self, stream):
        json.dump(self.to_dict(), stream, indent=2)
        stream.write("\n")


def _render(value: Scalar) -> str:
    return str(value) if isinstance(value, Fraction) else repr(float(value))


def _json_scalar(value: Scalar):
    return str(value) if isinstance(value, Fraction) else float(value)


def build_table(params: Params, engine: Engine, n_max: int) -> PmfTable:
    """Tabulate f(0..n_max) with running cumulative sums.

    In float mode the table also carries a geometric bound on the mass
    beyond n_max, derived from the root set (which is solved on a float
    twin of the params when the engine itself never needed one).
    """
    if n_max < params.k:
        raise DomainError(f"n_max must be >= k={params.k}, got {n_max}")
    root_set = None
    if engine is Engine.RECURRENCE:
        entries = recurrence_series(params, n_max)
    elif engine is Engine.ROOT_SUM:
        if params.mode is not Mode.FLOAT:
            raise ModeError("the rootsum engine is float-only")
        root_set = roots_mod.find_roots(params)
        entries = [pmf_rootsum(params, root_set, n) for n in range(n_max + 1)]
    else:
        entries = [pmf(params, n, engine) for n in range(n_max + 1)]

    cumulative = []
    running = _zero(params)
    for f in entries:
        running = running + f
        cumulative.append(running)
    _validate_table(params, entries, cumulative)

    bound = None
    if params.mode is Mode.FLOAT:
        if root_set is None:
            root_set = roots_mod.find_roots(params)
        bound = roots_mod.tail_bound(params, root_set, n_max)
    return PmfTable(params=params, engine=engine, entries=tuple(entries),
                    cumulative=tuple(cumulative), tail_bound=bound)


def _validate_table(params, entries, cumulative):
    slack = 0 if params.mode is Mode.EXACT else 1e-10
    k = params.k
    for n, f in enumerate(entries):
        if f < -slack or f > 1 + slack:
            raise ConsistencyError(f"pmf value out of [0,1] at n={n}: {f}")
        if 1 <= n <= k - 1 and f != 0:
            raise ConsistencyError(f"nonzero pmf below the support at n={n}: {f}")
    if cumulative[-1] > 1 + slack:
        raise ConsistencyError(f"cumulative mass exceeds 1: {cumulative[-1]}")
    expected_at_k = params.p ** k
    if len(entries) > k and abs(entries[k] - expected_at_k) > slack:
        raise ConsistencyError(
            f"pmf at n=k is {entries[k]}, expected p^k = {expected_at_k}")
