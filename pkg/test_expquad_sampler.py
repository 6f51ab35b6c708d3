"""
EXPQUAD SAMPLER TEST - normalization, cdf, quantile and exact / overrelaxed draws
of p(x) ~ exp(-a x^2 + b x - c |x|), checked against numerical quadrature.
"""

import math
import sys
from pathlib import Path

import numpy as np
from scipy import integrate, stats

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from core.errors import DomainError
from core.expquad_sampler import cdf, cdf_inv, log_density, prepare, sample, sample_overrelaxed
from models.params import ExpQuadParams

# (a, b, c): Gaussian, all three sign cases, a far-off-center mode and strong priors
PARAMETER_GRID = [
    ExpQuadParams(1.0, 0.0, 0.0),
    ExpQuadParams(1.0, 0.0, 3.0),
    ExpQuadParams(0.5, 2.0, 1.0),
    ExpQuadParams(2.0, -3.0, 0.5),
    ExpQuadParams(1.0, 60.0, 1.0),
    ExpQuadParams(1e4, 0.5, 300.0),
    ExpQuadParams(1.0, 0.0, 40.0),
    ExpQuadParams(0.01, -0.3, 2.0),
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _support(params: ExpQuadParams):
    """Finite interval holding all but a negligible amount of mass, plus breakpoints."""
    a, b, c = params
    modes = [0.0, (b - c) / (2.0 * a), (b + c) / (2.0 * a)]
    width = 40.0 / math.sqrt(a)
    lo, hi = min(modes) - width, max(modes) + width
    points = sorted({m for m in modes if lo < m < hi})
    return lo, hi, points


def _quad_mass(terms, lo: float, hi: float, points) -> float:
    inner = [p for p in points if lo < p < hi] or None
    value, _ = integrate.quad(
        lambda y: math.exp(log_density(terms, y)), lo, hi,
        points=inner, epsabs=1e-13, epsrel=1e-11, limit=400
    )
    return value


def test_normalization_matches_quadrature():
    for params in PARAMETER_GRID:
        terms = prepare(params)
        lo, hi, points = _support(params)
        assert abs(_quad_mass(terms, lo, hi, points) - 1.0) < 1e-8, params


def test_cdf_matches_quadrature():
    for params in PARAMETER_GRID:
        terms = prepare(params)
        lo, hi, points = _support(params)
        center = params.b / (2.0 * params.a)
        scale = 1.0 / math.sqrt(params.a)
        for y in (center - 2 * scale, center - 0.3 * scale, 0.0, center + 0.7 * scale, center + 2 * scale):
            expected = _quad_mass(terms, lo, y, points)
            assert abs(cdf(terms, y) - expected) < 1e-8, (params, y)


def test_sign_cases():
    assert prepare((1.0, 0.0, 3.0)).sign_case == "++"
    assert prepare((0.5, 2.0, 1.0)).sign_case == "+-"
    assert prepare((2.0, -3.0, 0.5)).sign_case == "-+"
    assert prepare((1.0, 0.0, 0.0)).sign_case == "++"


def test_mirror_symmetry():
    for a, b, c in ((0.5, 2.0, 1.0), (1.0, 60.0, 1.0), (3.0, 0.2, 0.1)):
        right = prepare((a, b, c))
        left = prepare((a, -b, c))
        for y in (-1.5, -0.1, 0.25, 2.0, 29.0):
            assert abs(cdf(right, y) - (1.0 - cdf(left, -y))) < 1e-12, (a, b, c, y)


def test_quantile_round_trip():
    for params in PARAMETER_GRID:
        terms = prepare(params)
        for r in (1e-12, 1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-6):
            back = cdf(terms, cdf_inv(terms, r))
            assert abs(back - r) <= 1e-7 * min(r, 1.0 - r) + 1e-14, (params, r, back)


def test_quantile_is_monotone():
    terms = prepare((0.5, 2.0, 1.0))
    grid = np.linspace(1e-9, 1.0 - 1e-9, 2001)
    values = np.array([cdf_inv(terms, r) for r in grid])
    assert np.all(np.diff(values) >= 0.0)


def test_exact_draws_pass_ks():
    for seed, params in enumerate(PARAMETER_GRID):
        terms = prepare(params)
        rng = _rng(100 + seed)
        draws = np.array([sample(terms, rng) for _ in range(4000)])
        result = stats.kstest(draws, lambda x: np.array([cdf(terms, v) for v in np.atleast_1d(x)]))
        assert result.pvalue > 1e-4, (params, result.pvalue)


def test_gaussian_case_moments():
    terms = prepare((2.0, 4.0, 0.0))
    rng = _rng(7)
    draws = np.array([sample(terms, rng) for _ in range(20000)])
    # N(b / 2a, 1 / 2a) = N(1, 0.25)
    assert abs(draws.mean() - 1.0) < 0.02
    assert abs(draws.var() - 0.25) < 0.02


def test_overrelaxation_preserves_target():
    terms = prepare((1.0, 0.5, 1.0))
    rng = _rng(11)
    start = np.array([sample(terms, rng) for _ in range(3000)])
    moved = np.array([sample_overrelaxed(terms, x, 7, rng) for x in start])
    result = stats.kstest(moved, lambda x: np.array([cdf(terms, v) for v in np.atleast_1d(x)]))
    assert result.pvalue > 1e-4, result.pvalue


def test_overrelaxation_anticorrelates():
    terms = prepare((1.0, 0.0, 0.0))
    rng = _rng(12)
    start = np.array([sample(terms, rng) for _ in range(2000)])
    moved = np.array([sample_overrelaxed(terms, x, 15, rng) for x in start])
    assert np.corrcoef(start, moved)[0, 1] < -0.5


def test_overrelaxation_validates_n_o():
    terms = prepare((1.0, 0.0, 1.0))
    rng = _rng(0)
    for bad in (0, 2, -1, 4, 2.5, True):
        try:
            sample_overrelaxed(terms, 0.1, bad, rng)
        except DomainError:
            continue
        raise AssertionError(f"n_o={bad!r} should raise DomainError")
    assert math.isfinite(sample_overrelaxed(terms, 0.1, 1, rng))


def test_laplace_case_without_quadratic_term():
    for b, c in ((0.0, 2.0), (1.5, 2.0), (-0.7, 0.8)):
        terms = prepare((0.0, b, c))
        assert terms.sign_case == "laplace"
        left, right = c + b, c - b
        p_left = right / (2.0 * c)
        for y in (-3.0, -0.4, 0.0, 0.3, 5.0):
            if y <= 0.0:
                expected = p_left * math.exp(left * y)
            else:
                expected = 1.0 - (1.0 - p_left) * math.exp(-right * y)
            assert abs(cdf(terms, y) - expected) < 1e-14, (b, c, y)
        mass, _ = integrate.quad(lambda y: math.exp(log_density(terms, y)), -math.inf, 0.0)
        mass_right, _ = integrate.quad(lambda y: math.exp(log_density(terms, y)), 0.0, math.inf)
        assert abs(mass + mass_right - 1.0) < 1e-9, (b, c)
        for r in (1e-12, 0.2, p_left, 0.7, 1.0 - 1e-9):
            back = cdf(terms, cdf_inv(terms, r))
            assert abs(back - r) <= 1e-9 * min(r, 1.0 - r) + 1e-15, (b, c, r, back)

    terms = prepare((0.0, 0.5, 1.0))
    rng = _rng(13)
    reference = lambda x: np.array([cdf(terms, v) for v in np.atleast_1d(x)])
    draws = np.array([sample(terms, rng) for _ in range(4000)])
    assert stats.kstest(draws, reference).pvalue > 1e-4
    moved = np.array([sample_overrelaxed(terms, x, 7, rng) for x in draws])
    assert stats.kstest(moved, reference).pvalue > 1e-4


def test_prepare_rejects_bad_coefficients():
    for params in ((0.0, 1.0, 1.0), (0.0, -2.0, 1.0), (0.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (1.0, 0.0, -0.5), (float("nan"), 0.0, 0.0), (1.0, math.inf, 0.0)):
        try:
            prepare(params)
        except DomainError:
            continue
        raise AssertionError(f"prepare{params} should raise DomainError")


def test_quantile_rejects_bad_probabilities():
    terms = prepare((1.0, 0.0, 1.0))
    for r in (0.0, 1.0, -0.1, float("nan")):
        try:
            cdf_inv(terms, r)
        except DomainError:
            continue
        raise AssertionError(f"cdf_inv(r={r}) should raise DomainError")
    assert cdf(terms, -1e300) == 0.0
    assert cdf(terms, 1e300) == 1.0


if __name__ == "__main__":
    print("\n" + "=" * 80)
    print("[TEST] EXPQUAD SAMPLER")
    print("=" * 80 + "\n")
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"[PASS] {name}")
            except Exception as e:
                failures += 1
                print(f"[FAIL] {name}: {type(e).__name__}: {e}")
    print("\n" + "=" * 80)
    print(f"[SUMMARY] {failures} failure(s)")
    print("=" * 80 + "\n")
    sys.exit(1 if failures else 0)
