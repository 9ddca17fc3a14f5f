"""End-to-end acceptance checks, one test per shipped guarantee.

Every test draws its inputs from seeded generators frozen alongside the
oracles, states its tolerance inline, and fails with the worst observed
case in the message.
"""

import functools
import math

import numpy as np

import oracles
from cantorloc import (
    CantorSpec,
    DecayParams,
    RadiusSchedule,
    cantor_function,
    canonical_of,
    eigenvalue,
    gamma_tail_mass,
    lambda0_closed_form,
    limit_relative_area,
    localization_problem,
    operator_norm,
    positive_measure_demo,
    regularized_lower_gamma,
    relative_area,
    segment_mass,
    sweep_fixed,
    sweep_indexed_counterexample,
    sweep_indexed_decay,
    sweep_reverse_counterexample,
)

GRID_SEED = 20240817
SAMPLER_SEED = 20240818
POWER_HALF = RadiusSchedule(kind="power_half")


@functools.lru_cache(maxsize=None)
def problem_grid():
    return tuple(oracles.seeded_problem_grid(GRID_SEED, 200))


@functools.lru_cache(maxsize=None)
def fixed_sweep(base, letters):
    return sweep_fixed(CantorSpec(base, letters), POWER_HALF, 10)


@functools.lru_cache(maxsize=None)
def reverse_sweep(base):
    return dict(sweep_reverse_counterexample(base, 2, POWER_HALF, 10))


def _draw_spec(rng, canonical=False, max_base=7):
    base = int(rng.integers(2, max_base + 1))
    size = int(rng.integers(1, base))
    if canonical:
        return CantorSpec(base, tuple(range(size)))
    letters = tuple(sorted(rng.choice(base, size=size, replace=False).tolist()))
    return CantorSpec(base, letters)


def test_first_eigenvalue_closed_form_matches_interval_sums():
    # 200 seeded (base, alphabet, depth, rho) cases; closed form within
    # 1e-10 relative of the summed segment masses.
    worst = 0.0
    worst_case = None
    for base, alphabet, n, rho in problem_grid():
        spec = CantorSpec(base, alphabet)
        closed = lambda0_closed_form(spec, n, rho)
        summed = eigenvalue(localization_problem(spec, n, rho), 0).value
        rel = abs(closed - summed) / summed
        if rel > worst:
            worst, worst_case = rel, (base, alphabet, n, rho)
    assert worst <= 1e-10, f"worst relative gap {worst:.3e} at {worst_case}"


def test_kernel_complementarity_and_segment_masses():
    # Lower and upper tails sum to one within 1e-13 on a 10^4-point grid
    # with order up to 10^4; segment masses match independent adaptive
    # quadrature within 1e-10 relative on 10^3 seeded segments, thin
    # far-tail segments included.
    rng = np.random.default_rng(SAMPLER_SEED)
    ks = rng.integers(0, 10_001, size=10_000)
    factors = rng.uniform(0.0, 2.5, size=10_000)
    far = rng.random(10_000) < 0.1
    factors[far] = rng.uniform(2.5, 8.0, size=int(far.sum()))
    worst_pair = 0.0
    for k, x in zip(ks, factors * (ks + 1.0)):
        p = regularized_lower_gamma(int(k), float(x))
        q = gamma_tail_mass(int(k), float(x))
        worst_pair = max(worst_pair, abs(p + q - 1.0))
    assert worst_pair <= 1e-13, f"worst |P+Q-1| = {worst_pair:.3e}"

    worst_seg = 0.0
    worst_case = None
    for i in range(1000):
        k = int(10.0 ** rng.uniform(0.0, 3.3))
        sig = math.sqrt(k + 1.0)
        family = i % 3
        if family == 0:
            a = max(0.0, k + rng.uniform(-3.0, 3.0) * sig)
            width = rng.uniform(0.0, 2.0) * sig
        elif family == 1:
            a = rng.uniform(0.0, 0.7 * k + 1.0)
            width = rng.uniform(0.05, 1.5) * sig
        else:
            a = k + rng.uniform(4.0, 11.0) * sig + rng.uniform(0.0, 20.0)
            width = rng.uniform(1e-6, 0.5)
        b = a + width
        lib = segment_mass(k, a, b).value
        ref = oracles.segment_mass_quad(k, a, b)
        if max(lib, ref) <= 1e-290:
            # Both sides agree the mass sits below the representable range.
            continue
        rel = abs(lib - ref) / max(ref, 1e-290)
        if rel > worst_seg:
            worst_seg, worst_case = rel, (k, a, b)
    assert worst_seg <= 1e-10, f"worst segment gap {worst_seg:.3e} at {worst_case}"


def test_canonical_norm_identity_and_sibling_bound():
    # On the same 200-case grid: canonical scans put the maximum at k = 0
    # with the closed-form value inside the certificate, and every
    # non-canonical norm is at most twice the canonical first eigenvalue.
    for base, alphabet, n, rho in problem_grid():
        spec = CantorSpec(base, alphabet)
        can = canonical_of(spec)
        res = operator_norm(localization_problem(can, n, rho))
        lam0 = lambda0_closed_form(can, n, rho)
        cert = res.value_err + res.tail_bound + 1e-15
        assert res.argmax_k == 0, f"canonical argmax {res.argmax_k} at {(base, alphabet, n, rho)}"
        assert abs(res.value - lam0) <= cert, (
            f"|value - lambda0| = {abs(res.value - lam0):.3e} beyond certificate "
            f"{cert:.3e} at {(base, alphabet, n, rho)}")
        if not spec.is_canonical:
            other = operator_norm(localization_problem(spec, n, rho))
            assert other.value <= 2.0 * lam0 + 1e-10, (
                f"norm {other.value:.17g} above twice lambda0 {lam0:.17g} "
                f"at {(base, alphabet, n, rho)}")


def test_norm_ratio_statistic_stays_bounded():
    # Mid-third and the base-5 size-3 canonical set under rho = M^(n/2):
    # the normalized ratio column is finite for n = 0..10 and the
    # canonical band spans less than a factor of 10.
    mid = fixed_sweep(3, (0, 2))
    can5 = fixed_sweep(5, (0, 1, 2))
    for rows in (mid, can5):
        ratios = [r.thm32_ratio for r in rows]
        assert len(ratios) == 11
        assert all(v is not None and math.isfinite(v) and v > 0.0 for v in ratios), (
            f"non-finite ratio in {ratios}")
    can_ratios = [r.thm32_ratio for r in can5]
    band = max(can_ratios) / min(can_ratios)
    assert band <= 10.0, f"canonical ratio band {band:.3f}"


def test_scaled_norm_band_is_tight():
    # Scaled norms for canonical alphabets stay inside a factor-10 band
    # over n = 2..10; the mid-third scaled norm stays inside a bounded
    # band as well.
    for base, letters in ((3, (0, 1)), (5, (0, 1, 2))):
        scaled = [r.scaled_norm for r in fixed_sweep(base, letters) if r.n >= 2]
        band = max(scaled) / min(scaled)
        assert band <= 10.0, f"canonical scaled band {band:.3f} for base {base}"
    mid = [r.scaled_norm for r in fixed_sweep(3, (0, 2)) if r.n >= 2]
    assert all(v > 0.0 and math.isfinite(v) for v in mid)
    assert max(mid) / min(mid) <= 10.0, f"mid-third scaled band {max(mid)/min(mid):.3f}"


def test_reverse_alphabet_norm_ratio_decays():
    # Reverse-canonical over canonical norm ratios along rho = M^(n/2):
    # positive throughout, and the depth-10 value is below half the
    # depth-2 value for both base 3 and base 4.
    for base in (3, 4):
        ratios = reverse_sweep(base)
        assert all(v > 0.0 for v in ratios.values()), f"non-positive ratio, base {base}"
    for base in (3, 4):
        ratios = reverse_sweep(base)
        assert ratios[10] < ratios[2] / 2.0, (
            f"base {base}: ratio(10) = {ratios[10]:.10f} is not below half of "
            f"ratio(2) = {ratios[2]:.10f}")


def test_distribution_function_identities():
    # Digit walk vs interval oracle within 1e-12 on 10^4 queries; weak
    # subadditivity against the canonical sibling within 1e-12 on 10^4
    # triples across 20 specs; the clamped-digit closed form matches the
    # walk within 1e-12 on 10^3 decomposed lengths.
    rng = np.random.default_rng(SAMPLER_SEED)
    worst_walk = 0.0
    for _ in range(20):
        spec = _draw_spec(rng)
        n = int(rng.integers(0, 9))
        xs = rng.uniform(-0.1, 1.1, size=500)
        ref = oracles.cantor_cdf(spec.base, spec.alphabet, n, xs)
        for x, r in zip(xs, ref):
            worst_walk = max(worst_walk, abs(cantor_function(spec, n, float(x)) - r))
    assert worst_walk <= 1e-12, f"worst walk gap {worst_walk:.3e}"

    worst_sub = 0.0
    for _ in range(20):
        spec = _draw_spec(rng)
        can = canonical_of(spec)
        n = int(rng.integers(0, 9))
        for _ in range(500):
            x = float(rng.uniform(-0.2, 1.2))
            y = float(rng.uniform(0.0, 1.0))
            lhs = cantor_function(spec, n, x + y)
            rhs = cantor_function(spec, n, x) + cantor_function(can, n, y)
            worst_sub = max(worst_sub, lhs - rhs)
    assert worst_sub <= 1e-12, f"worst subadditivity violation {worst_sub:.3e}"

    worst_formula = 0.0
    worst_case = None
    for _ in range(1000):
        spec = _draw_spec(rng, canonical=True)
        n = int(rng.integers(0, 9))
        t = float(rng.uniform(0.0, 1.0))
        digits, frac = oracles.length_digits(spec.base, n, t)
        formula = oracles.clamped_length_sum(spec.base, spec.size, n, digits, frac)
        diff = abs(cantor_function(spec, n, t) - formula)
        if diff > worst_formula:
            worst_formula, worst_case = diff, (spec.base, spec.size, n, t)
    assert worst_formula <= 1e-12, (
        f"clamped-digit sum deviates from the walk by {worst_formula:.3e} at "
        f"(base, size, n, t) = {worst_case}; the sum keeps adding lower-scale "
        f"terms after a clamped digit, where the walk has already stopped, so "
        f"it only bounds the walk from above")


def test_relative_area_orderings():
    # Four sampled order properties of the refinement-share statistic,
    # 10^3 seeded samples each.
    rng = np.random.default_rng(SAMPLER_SEED)

    worst = 0.0
    for _ in range(1000):
        spec = _draw_spec(rng, canonical=True)
        k = int(rng.integers(0, 65))
        s = float(rng.uniform(0.0, k + 10.0))
        T = float(rng.uniform(0.05, 4.0))
        worst = max(worst,
                    relative_area(spec, k + 1, s, T) - relative_area(spec, k, s, T))
    assert worst <= 1e-12, f"order-k ordering violated by {worst:.3e}"

    worst = 0.0
    for _ in range(1000):
        spec = _draw_spec(rng, canonical=True)
        t1 = float(rng.uniform(0.05, 4.0))
        t2 = t1 + float(rng.uniform(0.0, 3.0))
        worst = max(worst,
                    relative_area(spec, 0, 0.0, t1) - relative_area(spec, 0, 0.0, t2))
    assert worst <= 1e-12, f"length monotonicity violated by {worst:.3e}"

    worst = 0.0
    for _ in range(1000):
        spec = _draw_spec(rng)
        s1 = float(rng.uniform(0.0, 20.0))
        s2 = float(rng.uniform(0.0, 20.0))
        T = float(rng.uniform(0.05, 4.0))
        worst = max(worst,
                    abs(relative_area(spec, 0, s1, T) - relative_area(spec, 0, s2, T)))
    assert worst <= 1e-13, f"start-point dependence at order zero: {worst:.3e}"

    worst = 0.0
    for _ in range(1000):
        spec = _draw_spec(rng, canonical=True)
        theta = spec.size / spec.base
        k = int(rng.integers(1, 257))
        a = float(rng.uniform(1.0, 4.0))
        T = float(rng.uniform(0.1, 3.0))
        lim = limit_relative_area(theta, a, T)
        worst = max(worst, lim - relative_area(spec, k, a * k, T))
    assert worst <= 1e-9, f"limit fails as infimum by {worst:.3e}"


def test_indexed_decay_and_lower_bound():
    # Random level sequences meeting the decay hypotheses give a positive
    # fitted rate for three seeds at depth 20; the doubly-exponential
    # construction keeps its first eigenvalue above half the depth-1
    # value, with its closed lower-bound product converged to 1e-12.
    for seed in (0, 1, 2):
        result = sweep_indexed_decay(DecayParams(n_max=20), seed=seed)
        assert result.fitted_beta > 0.0, (
            f"seed {seed}: fitted rate {result.fitted_beta:.6f} not positive")

    counter = sweep_indexed_counterexample(4, 2, n_max=5)
    lam = {n: l0 for n, l0, _ in counter.rows}
    for n, value in lam.items():
        assert value >= 0.5 * lam[1], (
            f"lambda0({n}) = {value:.12f} fell below half of lambda0(1) = {lam[1]:.12f}")

    theta, root = 0.5, 2.0

    def partial(stop):
        return math.prod(-math.expm1(-theta * root**m) for m in range(2, stop + 1))

    assert abs(partial(10) - partial(20)) <= 1e-12
    assert abs(counter.lower_bound_product - partial(20)) <= 1e-12


def test_positive_measure_lower_bound():
    # Near-full alphabets with quotient 1 - 2^-j: the first eigenvalue
    # dominates e^(-rho) times the iterate measure at every depth up to 12.
    for rho in (0.5, 1.0, 5.0):
        result = positive_measure_demo(12, rho)
        floor = math.exp(-rho)
        for n, measure, lam0, bound in result.rows:
            assert bound == floor * measure
            assert lam0 >= bound - 1e-12, (
                f"rho {rho}, depth {n}: lambda0 {lam0:.17g} below "
                f"e^-rho * measure {bound:.17g}")
        assert result.measure_limit_estimate > 0.28 * rho
