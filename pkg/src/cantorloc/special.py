"""Gamma-density mass kernel.

Everything downstream reduces to integrals of the unit-scale gamma density

    f_k(r) = r^k e^(-r) / k!,   r >= 0,  integer k >= 0,

over finite unions of intervals.  The cumulative mass from the origin is the
regularized lower incomplete gamma function P(k+1, x); the complementary tail
has the finite closed form

    Q(k+1, x) = e^(-x) * sum_{n=0..k} x^n / n!,

which this module evaluates in log space so it survives x far beyond the
range where e^(-x) is representable.  P uses the classic lower series below
the crossover x = k + 1 and a Lentz-style continued fraction above it.

Segment masses over [a, b] are formed from whichever cumulative difference
(lower masses or tail masses) cancels less; when both routes would cancel
away more than ~40 bits the mass is integrated directly by adaptive
Gauss-Legendre panels on the scaled integrand exp(log f_k(r) - max log f_k),
so thin segments anywhere on the axis keep close to full precision.

Scalar functions carry the public contract; the *_batch variants are the
vectorized engines used by the operator scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = 2.220446049250313e-16
_LOG_SQRT_2PI = 0.9189385332046727
# Cancellation guard for cumulative differences: below this ratio of the
# larger operand the difference has lost ~41 bits and quadrature takes over.
_CANCEL_SWITCH = 2.0 ** -12
# Series / continued-fraction iteration guard; generous because convergence
# near x ~ k needs O(sqrt(k)) terms.
_MAX_ITER = 2_000_000
_TINY = 1e-300


def _validate_k(k) -> int:
    if isinstance(k, float):
        if not k.is_integer():
            raise ValueError(f"index k must be a nonnegative integer, got {k!r}")
        k = int(k)
    k = int(k)
    if k < 0:
        raise ValueError(f"index k must be a nonnegative integer, got {k!r}")
    return k


def _stirling_corr(m):
    """Stirling-series remainder: lgamma(m) - (m-1/2)ln m + m - ln sqrt(2pi)."""
    w = 1.0 / (m * m)
    return ((((w / 1188.0 - 1.0 / 1680.0) * w + 1.0 / 1260.0) * w
             - 1.0 / 360.0) * w + 1.0 / 12.0) / m


def _phi(d):
    """phi(1 + d) = d - log(1 + d) >= 0, accurate near d = 0."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    near = np.abs(d) < 0.5
    dn = d[near]
    term = dn * dn
    acc = term / 2.0
    m = 3.0
    while True:
        term = term * -dn
        step = term / m
        acc += step
        m += 1.0
        if not np.any(np.abs(step) > 1e-18 * np.maximum(acc, 1e-30)):
            break
        if m > 200.0:
            break
    out[near] = acc
    df = d[~near]
    # df = -1 (subnormal r / large mode) wants the +inf limit, not a warning.
    with np.errstate(divide="ignore"):
        out[~near] = df - np.log1p(df)
    return out


def log_density(k: int, r):
    """log f_k(r) = k ln r - r - lgamma(k+1), elementwise; -inf where f_k = 0."""
    k = _validate_k(k)
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < 0.0):
        raise ValueError("radial argument must be nonnegative")
    out = np.full(r.shape, -np.inf)
    pos = r > 0.0
    rp = r[pos]
    if k <= 20:
        lg = math.lgamma(k + 1)
        out[pos] = k * np.log(rp) - rp - lg
    else:
        # Recentered Stirling form: the exponent is built from the distance
        # to the mode, so its rounding error stays ~eps * |result| instead of
        # ~eps * lgamma(k+1).
        m = k + 1.0
        u = rp / m
        out[pos] = (-k * _phi(u - 1.0) + (1.0 - u)
                    - 0.5 * math.log(m) - _LOG_SQRT_2PI - _stirling_corr(m))
    if k == 0:
        out[~pos] = 0.0
    if scalar:
        return float(out[0])
    return out


def _log_prefactor(a: int, x: float) -> float:
    """log of x^a e^(-x) / Gamma(a) for integer a >= 1, x > 0."""
    return log_density(a - 1, x) + math.log(x)


def _lower_series(a: int, x: float) -> float:
    """P(a, x) by the lower series; reliable for 0 < x < a."""
    total = 1.0 / a
    term = total
    ap = float(a)
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * 1e-17:
            return total * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"lower gamma series stalled at a={a}, x={x}")


def _upper_cf(a: int, x: float) -> float:
    """Q(a, x) by the Lentz continued fraction; reliable for x >= a."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"upper gamma continued fraction stalled at a={a}, x={x}")


def regularized_lower_gamma(k: int, x: float) -> float:
    """P(k+1, x): mass of f_k on [0, x].

    Lower series below the crossover x = k + 1, continued fraction above it,
    both scaled through the log-space prefactor.
    """
    k = _validate_k(k)
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"upper limit must be finite and nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < k + 1.0:
        return min(_lower_series(k + 1, x), 1.0)
    return min(max(1.0 - _upper_cf(k + 1, x), 0.0), 1.0)


def gamma_tail_mass(k: int, x: float) -> float:
    """Q(k+1, x): mass of f_k on [x, inf), via the finite Poisson sum.

    The sum is normalized by its largest term and accumulated with Kahan
    compensation, so the result underflows gracefully instead of degrading.
    """
    k = _validate_k(k)
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"lower limit must be finite and nonnegative, got {x!r}")
    if x == 0.0:
        return 1.0
    peak = min(k, int(x))
    total = 1.0
    comp = 0.0

    def add(t: float):
        nonlocal total, comp
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s

    term = 1.0
    n = peak
    while n > 0:
        term *= n / x
        if term < 1e-18:
            break
        add(term)
        n -= 1
    term = 1.0
    n = peak
    while n < k:
        term *= x / (n + 1)
        if term < 1e-18:
            break
        add(term)
        n += 1
    log_q = log_density(peak, x) + math.log(total)
    if log_q >= 0.0:
        return 1.0
    return math.exp(log_q)


# ----------------------------------------------------------------------
# Adaptive Gauss-Legendre quadrature of the scaled density
# ----------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _panel(k: int, shift: float, lo: float, hi: float) -> float:
    """32-point panel of exp(log f_k - shift) over [lo, hi]."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    r = mid + half * _GL_NODES
    g = np.exp(log_density(k, r) - shift)
    return half * float(_GL_WEIGHTS @ g)


def _adaptive(k: int, shift: float, lo: float, hi: float,
              tol: float, whole: float, depth: int) -> tuple[float, float]:
    mid = 0.5 * (lo + hi)
    left = _panel(k, shift, lo, mid)
    right = _panel(k, shift, mid, hi)
    refined = left + right
    err = abs(whole - refined)
    if err <= tol * abs(refined) + _TINY or depth >= 48:
        return refined, err
    lv, le = _adaptive(k, shift, lo, mid, tol, left, depth + 1)
    rv, re = _adaptive(k, shift, mid, hi, tol, right, depth + 1)
    return lv + rv, le + re


def log_segment_mass(k: int, a: float, b: float,
                     rel_tol: float = 1e-13) -> tuple[float, float]:
    """(log of integral of f_k over [a, b], relative error estimate).

    Pure quadrature in scaled log space; valid for masses far below the
    smallest normal double, where the plain value would flush to zero.
    """
    k = _validate_k(k)
    a = float(a)
    b = float(b)
    if not (0.0 <= a <= b) or not math.isfinite(b):
        raise ValueError(f"segment must satisfy 0 <= a <= b, got [{a!r}, {b!r}]")
    if a == b:
        return -math.inf, 0.0
    shift = log_density(k, min(max(float(k), a), b))
    pieces = [(a, b)]
    if a < k < b:
        pieces = [(a, float(k)), (float(k), b)]
    total = 0.0
    err = 0.0
    for lo, hi in pieces:
        whole = _panel(k, shift, lo, hi)
        v, e = _adaptive(k, shift, lo, hi, rel_tol, whole, 0)
        total += v
        err += e
    if total <= 0.0:
        return -math.inf, 0.0
    return shift + math.log(total), err / total


@dataclass(frozen=True)
class SegmentMass:
    """Integral of f_k over one segment with a relative error bound."""

    value: float
    rel_err_bound: float


def _mass_by_quadrature(k: int, a: float, b: float) -> SegmentMass:
    # max f_k on [a, b] times the width bounds the mass; below the double
    # range the correctly rounded answer is an exact zero, no quadrature.
    if log_density(k, min(max(float(k), a), b)) + math.log(b - a) < -708.0:
        return SegmentMass(0.0, 0.0)
    log_v, rel = log_segment_mass(k, a, b, rel_tol=1e-13)
    if log_v == -math.inf:
        return SegmentMass(0.0, 0.0)
    value = math.exp(log_v) if log_v > -708.0 else 0.0
    return SegmentMass(value, max(rel, 1e-15))


def segment_mass(k: int, a: float, b: float) -> SegmentMass:
    """Mass of f_k on [a, b] with a certified relative error bound.

    Forms the difference of cumulative masses through whichever of the two
    complementary routes cancels less; if the surviving ratio is below the
    cancellation switch the segment is integrated directly instead.
    """
    k = _validate_k(k)
    a = float(a)
    b = float(b)
    if not (0.0 <= a <= b) or not math.isfinite(b):
        raise ValueError(f"segment must satisfy 0 <= a <= b, got [{a!r}, {b!r}]")
    if a == b:
        return SegmentMass(0.0, 0.0)
    p_hi = regularized_lower_gamma(k, b)
    q_lo = gamma_tail_mass(k, a)
    d_p = p_hi - regularized_lower_gamma(k, a)
    d_q = q_lo - gamma_tail_mass(k, b)
    # Larger relative difference = fewer cancelled bits.
    ratio_p = d_p / p_hi if p_hi > 0.0 else 0.0
    ratio_q = d_q / q_lo if q_lo > 0.0 else 0.0
    if ratio_q > ratio_p:
        value, ratio = d_q, ratio_q
    else:
        value, ratio = d_p, ratio_p
    if ratio < _CANCEL_SWITCH or not value > 0.0:
        return _mass_by_quadrature(k, a, b)
    return SegmentMass(value, max(8.0 * _EPS / ratio, 1e-15))


# ----------------------------------------------------------------------
# Vectorized batch engines (fixed k, array arguments)
# ----------------------------------------------------------------------

def lower_tail_batch(k: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P(k+1, x), Q(k+1, x)) for an array of nonnegative x at fixed k.

    Each entry is computed on the side where it is small (series below the
    crossover, Poisson tail above), so both returned arrays are relatively
    accurate wherever they are meaningfully nonzero.
    """
    k = _validate_k(k)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise ValueError("arguments must be finite and nonnegative")
    p = np.zeros_like(x)
    q = np.ones_like(x)
    a = k + 1.0

    low = (x > 0.0) & (x < a)
    if np.any(low):
        xs = x[low]
        total = np.full_like(xs, 1.0 / a)
        term = total.copy()
        ap = a
        for _ in range(_MAX_ITER):
            ap += 1.0
            term = term * (xs / ap)
            total += term
            if not np.any(term > total * 1e-17):
                break
        else:
            raise ArithmeticError(f"batch lower series stalled at k={k}")
        pv = np.minimum(total * np.exp(log_density(k, xs) + np.log(xs)), 1.0)
        p[low] = pv
        q[low] = 1.0 - pv

    high = x >= a
    if np.any(high):
        xt = x[high]
        # x >= k+1 puts the largest Poisson term at n = k; recurse downward.
        total = np.ones_like(xt)
        term = np.ones_like(xt)
        n = k
        while n > 0:
            term = term * (n / xt)
            if not np.any(term > 1e-18):
                break
            total += term
            n -= 1
        log_q = log_density(k, xt) + np.log(total)
        qv = np.exp(np.minimum(log_q, 0.0))
        q[high] = qv
        p[high] = 1.0 - qv
    return p, q


def _quadrature_flagged(k: int, lo: np.ndarray, hi: np.ndarray
                        ) -> tuple[np.ndarray, np.ndarray]:
    """One vectorized panel + refinement for many segments; scalar adaptive
    quadrature mops up any segment the single refinement cannot certify."""
    mode = np.clip(float(k), lo, hi)
    shift = log_density(k, mode)

    def panels(los, his):
        half = 0.5 * (his - los)[:, None]
        mid = 0.5 * (his + los)[:, None]
        r = mid + half * _GL_NODES[None, :]
        # Same recentered exponent as the shift, so the scale error is
        # common to all nodes and cancels in the difference.
        g = np.exp(log_density(k, r) - shift[:, None])
        return (g @ _GL_WEIGHTS) * half[:, 0]

    whole = panels(lo, hi)
    mid = 0.5 * (lo + hi)
    refined = panels(lo, mid) + panels(mid, hi)
    err = np.abs(whole - refined)
    scale = np.exp(np.minimum(shift, 0.0))
    values = refined * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(refined > 0.0, err / np.abs(refined), 0.0)
    rel = np.maximum(rel, 1e-15)
    rough = rel > 1e-13
    if np.any(rough):
        idx = np.nonzero(rough)[0]
        for i in idx:
            m = _mass_by_quadrature(k, float(lo[i]), float(hi[i]))
            values[i] = m.value
            rel[i] = m.rel_err_bound
    return values, rel


def segment_mass_batch(k: int, lo: np.ndarray, hi: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Masses of f_k over many segments: (values, relative error bounds)."""
    k = _validate_k(k)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape:
        raise ValueError("segment bound arrays must have matching shapes")
    if np.any(lo < 0.0) or np.any(hi < lo):
        raise ValueError("segments must satisfy 0 <= lo <= hi")
    p_lo, q_lo = lower_tail_batch(k, lo)
    p_hi, q_hi = lower_tail_batch(k, hi)
    d_p = p_hi - p_lo
    d_q = q_lo - q_hi
    use_q = d_q * p_hi > d_p * q_lo
    value = np.where(use_q, d_q, d_p)
    ref = np.where(use_q, q_lo, p_hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ref > 0.0, value / ref, 0.0)
    rel = np.maximum(8.0 * _EPS / np.maximum(ratio, 1e-30), 1e-15)
    degenerate = hi == lo
    flagged = ((ratio < _CANCEL_SWITCH) | (value <= 0.0)) & ~degenerate
    if np.any(flagged):
        # Drop segments whose mass provably sits below the double range:
        # max f_k times the width already rounds to an exact zero.
        fl, fh = lo[flagged], hi[flagged]
        mode = np.clip(float(k), fl, fh)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_peak = k * np.log(mode) - mode - math.lgamma(k + 1)
        if k == 0:
            log_peak = -mode
        log_cap = log_peak + np.log(fh - fl)
        dead = np.zeros_like(flagged)
        dead[flagged] = log_cap < -708.0
        value = value.copy()
        value[dead] = 0.0
        rel[dead] = 0.0
        flagged &= ~dead
    if np.any(flagged):
        fv, fe = _quadrature_flagged(k, lo[flagged], hi[flagged])
        value[flagged] = fv
        rel[flagged] = fe
    value = np.where(degenerate, 0.0, value)
    rel = np.where(degenerate, 0.0, rel)
    return value, rel
