"""Localization-operator spectra over Cantor-type sets.

With a Gaussian window, the localization operator over a spherically
symmetric set is diagonal in the Hermite basis and its k-th eigenvalue is
the mass of the gamma density f_k over the radial-squared profile of the
set.  Here the profile is the n-th Cantor iterate scaled to [0, rho] with
rho = pi R^2, so

    lambda_k = sum over merged blocks [lo, hi] of integral_lo^hi f_k.

The first eigenvalue has a closed product form built from per-level
relative areas; the operator norm is the supremum over k, located by a
scan whose truncation is certified by lambda_k <= P(k+1, rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .cantor import (
    CantorSpec,
    IndexedCantorSpec,
    IterateIntervals,
    canonical_of,
    continuous_iterate,
    indexed_intervals,
)
from .special import (
    log_density,
    log_segment_mass,
    regularized_lower_gamma,
    segment_mass,
    segment_mass_batch,
)

AnySpec = Union[CantorSpec, IndexedCantorSpec]


class DegenerateMassError(ArithmeticError):
    """A reference mass underflowed to zero, so a ratio is undefined."""


def ball_bound(measure: float) -> float:
    """Upper bound 1 - e^(-m) on every eigenvalue of a set of measure m."""
    if measure < 0.0:
        raise ValueError("measure must be nonnegative")
    return -math.expm1(-measure)


@dataclass(frozen=True, eq=False)
class LocalizationProblem:
    """A radial-squared profile (merged intervals in [0, rho]) plus rho."""

    rho: float
    intervals: IterateIntervals
    spec: AnySpec | None = None
    depth: int = 0

    def __post_init__(self):
        if not (self.rho >= 0.0) or not math.isfinite(self.rho):
            raise ValueError(f"rho must be finite and nonnegative, got {self.rho!r}")
        if abs(self.intervals.scale - self.rho) > 1e-12 * max(self.rho, 1.0):
            raise ValueError("interval scale disagrees with rho")


def localization_problem(spec: AnySpec, n: int, rho: float,
                         max_intervals: int | None = None) -> LocalizationProblem:
    """Problem whose set is the n-th iterate of *spec* scaled to [0, rho]."""
    if isinstance(spec, IndexedCantorSpec):
        ivals = indexed_intervals(spec, n, rho, max_intervals)
    else:
        ivals = continuous_iterate(spec, n, rho, max_intervals)
    return LocalizationProblem(rho=float(rho), intervals=ivals, spec=spec, depth=n)


@dataclass(frozen=True)
class EigenvalueResult:
    k: int
    value: float
    err: float


def eigenvalue(problem: LocalizationProblem, k: int) -> EigenvalueResult:
    """lambda_k: summed segment masses with an accumulated error bound."""
    vals, rels = segment_mass_batch(k, problem.intervals.lows, problem.intervals.highs)
    value = float(np.sum(vals))
    err = float(np.sum(vals * rels)) + 1e-300
    return EigenvalueResult(k=int(k), value=value, err=err)


def eigenvalue_table(problem: LocalizationProblem, k_max: int) -> list[EigenvalueResult]:
    """lambda_0 .. lambda_{k_max}, each through the full segment-mass path."""
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    return [eigenvalue(problem, k) for k in range(k_max + 1)]


def eigenvalue_table_to_csv(rows: Sequence[EigenvalueResult], destination) -> None:
    """Write k,lambda,err rows (17 significant digits) to a path or file."""
    import csv
    import os

    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", newline="") if own else destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "lambda", "err"])
        for row in rows:
            writer.writerow([row.k, f"{row.value:.17g}", f"{row.err:.17g}"])
    finally:
        if own:
            fh.close()


# ----------------------------------------------------------------------
# First eigenvalue in closed form
# ----------------------------------------------------------------------

def _level_sum(level: CantorSpec, t: float) -> float:
    """sum_{a in alphabet} e^(-a t); geometric form for canonical alphabets."""
    if t <= 0.0:
        return float(level.size)
    if level.is_canonical:
        if t > 745.0:
            return 1.0
        # (1 - e^(-|A| t)) / (1 - e^(-t)) without forming huge alphabets.
        return math.expm1(-level.size * t) / math.expm1(-t)
    return math.fsum(math.exp(-a * t) for a in level.alphabet)


def _lambda0_levels(levels: Sequence[CantorSpec], rho: float) -> float:
    if rho < 0.0 or not math.isfinite(rho):
        raise ValueError(f"rho must be finite and nonnegative, got {rho!r}")
    if rho == 0.0:
        return 0.0
    prod = 1.0
    value = 1.0
    for level in levels:
        prod *= level.base
        value *= _level_sum(level, rho / prod)
    return value * -math.expm1(-rho / prod)


def lambda0_closed_form(spec: CantorSpec, n: int, rho: float) -> float:
    """lambda_0 of the n-th iterate at scale rho:

    (1 - e^(-rho M^-n)) * prod_{j=1..n} sum_{a in A} e^(-a rho M^-j).
    """
    if n < 0:
        raise ValueError("iterate depth must be nonnegative")
    return _lambda0_levels([spec] * n, rho)


def lambda0_indexed(spec: IndexedCantorSpec, rho: float, n: int | None = None) -> float:
    """lambda_0 for per-level bases/alphabets, using the first n levels."""
    if n is None:
        n = spec.depth
    if n < 0 or n > spec.depth:
        raise ValueError(f"depth {n} outside the stored {spec.depth} levels")
    return _lambda0_levels(spec.levels[:n], rho)


def lambda0_canonical_levels(bases: Sequence[int], sizes: Sequence[int],
                             rho: float) -> float:
    """lambda_0 for canonical per-level alphabets given as (base, size) pairs.

    Uses the geometric form of every level factor, so alphabets too large to
    enumerate (the doubly-exponential constructions) stay cheap.
    """
    if len(bases) != len(sizes):
        raise ValueError("bases and sizes must have equal length")
    if rho < 0.0 or not math.isfinite(rho):
        raise ValueError(f"rho must be finite and nonnegative, got {rho!r}")
    if rho == 0.0:
        return 0.0
    prod = 1.0
    value = 1.0
    for b, a in zip(bases, sizes):
        b = int(b)
        a = int(a)
        if b < 2 or not (1 <= a <= b):
            raise ValueError(f"invalid canonical level (base={b}, size={a})")
        prod *= b
        t = rho / prod
        if t <= 0.0:
            value *= a
        elif t > 745.0:
            value *= 1.0
        else:
            value *= math.expm1(-a * t) / math.expm1(-t)
    return value * -math.expm1(-rho / prod)


# ----------------------------------------------------------------------
# Relative areas
# ----------------------------------------------------------------------

def relative_area(spec: CantorSpec, k: int, s: float, T: float) -> float:
    """Alphabet-weighted share of the f_k mass of [s, s+T]:

    sum_{a in A} mass over [s + aT/M, s + (a+1)T/M]  /  mass over [s, s+T].

    Far-tail segments whose masses underflow the double range are handled
    in log space; a denominator with no representable mass at all raises
    DegenerateMassError.
    """
    if T <= 0.0 or not math.isfinite(T):
        raise ValueError(f"segment length T must be positive, got {T!r}")
    if s < 0.0:
        raise ValueError(f"segment start must be nonnegative, got {s!r}")
    M = spec.base
    den = segment_mass(k, s, s + T)
    if den.value > 1e-250:
        num = math.fsum(
            segment_mass(k, s + a * T / M, s + (a + 1) * T / M).value
            for a in spec.alphabet)
        return min(num / den.value, 1.0)
    log_den, _ = log_segment_mass(k, s, s + T)
    if log_den == -math.inf:
        raise DegenerateMassError(
            f"segment [s, s+T] = [{s}, {s + T}] carries no representable mass "
            f"for k={k}")
    parts = []
    for a in spec.alphabet:
        lv, _ = log_segment_mass(k, s + a * T / M, s + (a + 1) * T / M)
        if lv != -math.inf:
            parts.append(lv)
    if not parts:
        return 0.0
    top = max(parts)
    log_num = top + math.log(math.fsum(math.exp(p - top) for p in parts))
    return min(math.exp(log_num - log_den), 1.0)


def limit_relative_area(theta: float, a: float, T: float) -> float:
    """Large-k limit of the canonical relative area at start s = a k:

    (1 - e^(-theta T (1 - 1/a))) / (1 - e^(-T (1 - 1/a))),  and theta at a = 1.
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta!r}")
    if a < 1.0:
        raise ValueError(f"start multiplier a must be >= 1, got {a!r}")
    if T <= 0.0 or not math.isfinite(T):
        raise ValueError(f"segment length T must be positive, got {T!r}")
    if a == 1.0:
        return theta
    c = T * (1.0 - 1.0 / a)
    return math.expm1(-theta * c) / math.expm1(-c)


# ----------------------------------------------------------------------
# Operator norm
# ----------------------------------------------------------------------

def inner_rho(spec: CantorSpec, n: int, rho: float) -> float:
    """Radial-squared inner shift rho (M - |A|) sum_{j=1..n} M^-j.

    For reverse-canonical alphabets this is where the n-th iterate starts;
    the largest eigenvalue then has index at least floor(inner_rho).
    """
    if n < 0:
        raise ValueError("iterate depth must be nonnegative")
    geom = (1.0 - float(spec.base) ** -n) / (spec.base - 1)
    return float(rho) * (spec.base - spec.size) * geom


@dataclass(frozen=True)
class NormResult:
    """Certified operator norm: max eigenvalue over k <= k_truncation.

    tail_bound = P(k_truncation + 1, rho) dominates every eigenvalue past
    the truncation and satisfies tail_bound < max(1e-12, value * 1e-9).
    """

    value: float
    argmax_k: int
    k_truncation: int
    tail_bound: float
    value_err: float


def operator_norm(problem: LocalizationProblem, *,
                  start_at_inner: bool = False) -> NormResult:
    """Scan lambda_k upward until the remaining tail is certified negligible.

    The scan advances with the exact finite identity
    P(k+1, x) = P(k, x) - x^k e^(-x) / k!.  The density vector over the
    interval endpoints steps multiplicatively, f_{k}(x) = f_{k-1}(x) x / k,
    and is reseeded from log space every 64 indices so rounding drift and
    underflow cannot accumulate across the scan; the winning eigenvalue is
    then recomputed through the full segment-mass path.  start_at_inner
    skips ahead to floor(inner_rho), valid only for reverse-canonical
    fixed-base problems where indices below that cannot carry the maximum.
    """
    rho = problem.rho
    ivals = problem.intervals
    k0 = 0
    if start_at_inner:
        spec = problem.spec
        if not isinstance(spec, CantorSpec) or not spec.is_reverse_canonical:
            raise ValueError("start_at_inner requires a reverse-canonical "
                             "fixed-base problem")
        k0 = int(inner_rho(spec, problem.depth, rho))
    if rho == 0.0 or ivals.measure == 0.0:
        return NormResult(0.0, k0, k0 + 1, 0.0, 0.0)

    endpoints = np.concatenate([ivals.lows, ivals.highs])
    signs = np.concatenate([np.ones(ivals.lows.size),
                            np.full(ivals.highs.size, -1.0)])
    with np.errstate(divide="ignore"):
        log_ep = np.log(endpoints)

    at_start = eigenvalue(problem, k0)
    lam = at_start.value
    best = lam
    best_k = k0
    # Running P(k+1, rho), updated by the same identity; the certificate is
    # refreshed exactly at the stopping index before being reported.
    p_tail = regularized_lower_gamma(k0, rho)
    # A generous hard stop: the certificate fires within O(sqrt(rho))
    # indices past rho even at the absolute threshold.
    k_hard = int(rho + 60.0 * math.sqrt(rho + 1.0) + 400.0) + k0
    k = k0
    f = None
    k_seed = k0
    while True:
        if k > rho and p_tail < max(1e-12, 1e-9 * best):
            exact_tail = regularized_lower_gamma(k + 1, rho)
            if exact_tail < max(1e-12, 1e-9 * best):
                k_trunc = k
                tail = exact_tail
                break
            p_tail = exact_tail
        if k >= k_hard:
            raise ArithmeticError(
                f"norm scan failed to certify truncation by k={k} (rho={rho})")
        k += 1
        if f is None or k - k_seed >= 64:
            with np.errstate(invalid="ignore"):
                f = np.exp(k * log_ep - endpoints - math.lgamma(k + 1))
            k_seed = k
        else:
            f *= endpoints
            f *= 1.0 / k
        lam += float(np.dot(signs, f))
        p_tail -= math.exp(log_density(k, rho))
        if lam > best:
            best = lam
            best_k = k
    final = at_start if best_k == k0 else eigenvalue(problem, best_k)
    return NormResult(value=final.value, argmax_k=best_k, k_truncation=k_trunc,
                      tail_bound=tail, value_err=final.err)
