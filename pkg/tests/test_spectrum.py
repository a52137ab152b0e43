import itertools
import math

import numpy as np
import pytest

from costcode import (
    IIDSource,
    MixedSource,
    SpectrumError,
    SpectrumQuery,
    entropy,
    first_order_spectrum,
    gaussian_cdf,
    gaussian_quantile,
    second_order_spectrum,
    strong_converse_diagnostic,
    varentropy,
)

# frozen from quadrature of the standard normal density
PHI_TABLE = [
    (-8.0, 6.2209605742717841e-16),
    (-3.0, 0.0013498980316300945),
    (-1.5, 0.066807201268858066),
    (-0.5, 0.3085375387259869),
    (0.5, 0.6914624612740131),
    (1.0, 0.84134474606854295),
    (1.959964, 0.9750000009035576),
    (3.0, 0.99865010196836991),
    (8.0, 0.99999999999999938),
]
QUANTILE_TABLE = [
    (0.1, -1.2815515655446005),
    (0.25, -0.67448975019608174),
    (0.9, 1.2815515655446005),
    (0.975, 1.9599639845400542),
]


def test_gaussian_cdf_against_quadrature():
    assert gaussian_cdf(0.0) == 0.5
    for u, val in PHI_TABLE:
        assert gaussian_cdf(u) == pytest.approx(val, abs=1e-10)


def test_gaussian_cdf_symmetry_and_saturation():
    for u in np.linspace(0.0, 8.0, 33):
        assert gaussian_cdf(-u) == pytest.approx(1.0 - gaussian_cdf(u), abs=1e-12)
    assert gaussian_cdf(40.0) == 1.0
    assert gaussian_cdf(-40.0) == 0.0


def test_gaussian_quantile_round_trip():
    for p100 in range(1, 100):
        p = p100 / 100.0
        assert gaussian_cdf(gaussian_quantile(p)) == pytest.approx(p, abs=1e-9)
    assert gaussian_quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    for p, val in QUANTILE_TABLE:
        assert gaussian_quantile(p) == pytest.approx(val, abs=1e-9)
        assert gaussian_quantile(1.0 - p) == pytest.approx(-val, abs=1e-9)


def test_gaussian_quantile_domain():
    for bad in (0.0, 1.0, -0.3, 2.0):
        with pytest.raises(SpectrumError):
            gaussian_quantile(bad)


def _query(source, n, grid, mode="exact", **kw):
    return SpectrumQuery(source=source, n=n, alpha_c=1.0, grid=grid, mode=mode, base=2, **kw)


def test_first_order_fair_coin_is_step():
    fair = IIDSource((0.5, 0.5))
    for n in (1, 4, 9):
        curve = first_order_spectrum(_query(fair, n, (0.5, 1.0, 1.001, 2.0)))
        assert curve.probabilities == (1.0, 1.0, 0.0, 0.0)


def test_first_order_exact_matches_brute_force():
    src = IIDSource((0.75, 0.25))
    n = 4
    r_star = entropy(src, 2)  # grid point at H(X) with unit costs
    grid = (0.5, r_star, 1.2)
    curve = first_order_spectrum(_query(src, n, grid))
    for r, got in zip(grid, curve.probabilities):
        expect = 0.0
        for seq in itertools.product(range(2), repeat=n):
            p = math.prod(src.pmf[s] for s in seq)
            if -math.fsum(math.log2(src.pmf[s]) for s in seq) >= n * r:
                expect += p
        assert got == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 9))
def test_exact_and_mc_agree_within_four_stderr(shipped_sources, n):
    for name, src in shipped_sources.items():
        h = 1.0 if name == "bern50" else 0.9
        grid = (0.5 * h, h, 1.3 * h)
        exact = first_order_spectrum(_query(src, n, grid))
        mc = first_order_spectrum(_query(src, n, grid, mode="monte-carlo", samples=100_000, seed=3))
        for pe, pm, se in zip(exact.probabilities, mc.probabilities, mc.stderrs):
            tol = 4.0 * max(se, math.sqrt(pe * (1 - pe) / 100_000)) + 1e-9
            assert abs(pe - pm) <= tol


def test_first_order_mixed_two_peak_mass():
    # weight 0.6 sits on the high-entropy component, whose peak is above 0.75
    mix = MixedSource((IIDSource((0.89, 0.11)), IIDSource((0.5, 0.5))), (0.4, 0.6))
    curve = first_order_spectrum(
        _query(mix, 10_000, (0.75,), mode="monte-carlo", samples=100_000, seed=21)
    )
    assert curve.probabilities[0] == pytest.approx(0.6, abs=0.02)


@pytest.mark.parametrize("n", [1, 4, 8])
@pytest.mark.parametrize("name", ["bern50", "bern25", "bern30"])
def test_dp_brackets_exact(n, name, shipped_sources):
    src = shipped_sources[name]
    grid = tuple(np.linspace(0.3, 1.4, 9))
    exact = first_order_spectrum(_query(src, n, grid))
    dp = first_order_spectrum(_query(src, n, grid, mode="dp"))
    for lo, pe, hi in zip(dp.lower, exact.probabilities, dp.upper):
        assert lo - 1e-12 <= pe <= hi + 1e-12


def test_dp_bracket_tightens_with_lattice_step():
    src = IIDSource((0.7, 0.3))
    grid = (0.6, 0.9)
    wide = first_order_spectrum(_query(src, 6, grid, mode="dp", lattice_step=1e-2))
    fine = first_order_spectrum(_query(src, 6, grid, mode="dp", lattice_step=1e-5))
    for w_lo, w_hi, f_lo, f_hi in zip(wide.lower, wide.upper, fine.lower, fine.upper):
        assert f_hi - f_lo <= w_hi - w_lo + 1e-12


def test_dp_rejects_mixed_sources():
    mix = MixedSource((IIDSource((0.5, 0.5)), IIDSource((0.89, 0.11))), (0.4, 0.6))
    with pytest.raises(SpectrumError, match="i.i.d"):
        first_order_spectrum(_query(mix, 4, (0.5, 1.0), mode="dp"))


def test_curves_nonincreasing_all_modes(shipped_sources):
    grid = tuple(np.linspace(0.2, 1.5, 12))
    for src in shipped_sources.values():
        for mode in ("exact", "monte-carlo"):
            curve = first_order_spectrum(
                _query(src, 5, grid, mode=mode, samples=20_000, seed=11)
            )
            diffs = np.diff(curve.probabilities)
            assert np.all(diffs <= 1e-15)


def test_second_order_huge_center_kills_tail():
    src = IIDSource((0.75, 0.25))
    curve = second_order_spectrum(_query(src, 5, (0.0, 1.0, 2.0), a=50.0))
    assert curve.probabilities == (0.0, 0.0, 0.0)


def test_second_order_fair_coin_indicator():
    fair = IIDSource((0.5, 0.5))
    curve = second_order_spectrum(_query(fair, 16, (-1.0, 0.0, 0.25, 1.0), a=1.0))
    assert curve.probabilities == (1.0, 1.0, 0.0, 0.0)


def test_second_order_gaussian_limit():
    src = IIDSource((0.75, 0.25))
    sigma = math.sqrt(varentropy(src, 2))
    grid = (-1.0, 0.0, 1.0)
    curve = second_order_spectrum(
        _query(src, 10_000, grid, mode="monte-carlo", a=entropy(src, 2), samples=100_000, seed=17)
    )
    for ell, p in zip(grid, curve.probabilities):
        assert p == pytest.approx(1.0 - gaussian_cdf(ell / sigma), abs=0.02)


def test_second_order_requires_center():
    src = IIDSource((0.75, 0.25))
    with pytest.raises(SpectrumError):
        second_order_spectrum(_query(src, 5, (0.0,)))


def test_query_validation():
    src = IIDSource((0.75, 0.25))
    with pytest.raises(SpectrumError):
        SpectrumQuery(source=src, n=0, alpha_c=1.0, grid=(1.0,))
    with pytest.raises(SpectrumError):
        SpectrumQuery(source=src, n=3, alpha_c=1.0, grid=())
    with pytest.raises(SpectrumError):
        SpectrumQuery(source=src, n=3, alpha_c=1.0, grid=(1.0, 0.5))
    with pytest.raises(SpectrumError):
        SpectrumQuery(source=src, n=3, alpha_c=1.0, grid=(1.0,), mode="magic")


def test_csv_serialization_is_deterministic():
    src = IIDSource((0.75, 0.25))
    q = _query(src, 5, (0.5, 0.9), mode="monte-carlo", samples=5000, seed=2)
    assert first_order_spectrum(q).to_csv() == first_order_spectrum(q).to_csv()
    text = first_order_spectrum(q).to_csv()
    assert text.splitlines()[0] == "threshold,probability,stderr,method"
    assert text.count("monte-carlo") == 2


def test_diagnostic_fair_coin_gap_zero():
    fair = IIDSource((0.5, 0.5))
    rep = strong_converse_diagnostic(fair, [10, 100], 0.05, base=2, samples=2000, seed=1)
    assert all(row[3] == 0.0 for row in rep.rows)
    assert rep.verdict == "strong-converse consistent"


def test_diagnostic_iid_gap_tracks_clt():
    src = IIDSource((0.75, 0.25))
    sigma = math.sqrt(varentropy(src, 2))
    rep = strong_converse_diagnostic(src, [10_000], 0.05, base=2, samples=100_000, seed=4)
    gap = rep.rows[0][3]
    clt_gap = 2 * 1.6448536269514722 * sigma / math.sqrt(10_000)
    assert gap == pytest.approx(clt_gap, rel=0.1)
    assert gap <= clt_gap * 1.05


def test_diagnostic_mixed_two_peak():
    mix = MixedSource((IIDSource((0.5, 0.5)), IIDSource((0.89, 0.11))), (0.4, 0.6))
    rep = strong_converse_diagnostic(mix, [1000, 10_000], 0.05, base=2, samples=50_000, seed=6)
    assert rep.verdict == "two-peak"
    assert rep.rows[-1][3] == pytest.approx(0.5, abs=0.05)
