import math
from fractions import Fraction

import numpy as np
import pytest

from twistlab.errors import ConfigError
from twistlab.experiments import (
    ErgodicityExperiment, equidistribution, ergodicity, ks_distance, loglog_slope,
    rational_approximation, rotation_sequence, screened_start, star_discrepancy,
)
from twistlab.su2 import exp_scaled, qinv, qmul
from twistlab.twists import coords_from_rep


def test_star_discrepancy_examples():
    # centered grid has D* = 1/(2N); a single point at 0 has D* = 1
    assert star_discrepancy((np.arange(10) + 0.5) / 10) == pytest.approx(0.05)
    assert star_discrepancy([0.0]) == pytest.approx(1.0)
    assert star_discrepancy(np.zeros(5)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        star_discrepancy([])


def test_star_discrepancy_brute_force():
    u = np.random.default_rng(50).random(200)
    ts = np.concatenate([u, np.nextafter(u, 2), [0.0, 1.0]])
    brute = max(abs(np.mean(u < t) - t) for t in ts)
    assert star_discrepancy(u) == pytest.approx(brute, abs=1e-12)


def test_ks_matches_star_discrepancy_order():
    u = np.random.default_rng(51).random(1000)
    assert 0.5 * star_discrepancy(u) <= ks_distance(u) <= star_discrepancy(u) + 1e-12


def test_rational_approximation():
    assert rational_approximation(0.75) == Fraction(3, 4)
    assert rational_approximation(1 / 3 + 1e-9) == Fraction(1, 3)
    assert rational_approximation(math.sqrt(2) - 1) is None
    assert rational_approximation(1 / 97) is None


def test_golden_rotation_discrepancy():
    g = (math.sqrt(5) - 1) / 2
    ns = [1000, 2000, 4000, 8000, 16000]
    ds = [star_discrepancy(rotation_sequence(0.0, g, n)) for n in ns]
    assert all(d < 5 * math.log(n) / n for d, n in zip(ds, ns))
    assert loglog_slope(ns, ds) == pytest.approx(-1, abs=0.3)


def resonant_point():
    # A A B = exp(u pi / 4) so that the N13 T parameter is exactly sqrt 2
    rng = np.random.default_rng(52)
    v = rng.standard_normal((3, 4))
    A, C = (q / np.linalg.norm(q) for q in (v[0], v[2]))
    u = v[1, 1:] / np.linalg.norm(v[1, 1:])
    B = qmul(qinv(qmul(A, A)), exp_scaled(u, math.pi / 4))
    return coords_from_rep(np.stack([A, B, C]))


def test_resonant_fixture():
    pt = resonant_point()
    rep = equidistribution("N13", "T", pt, 400)
    assert rep.nu == pytest.approx(math.sqrt(2), abs=1e-12)
    assert rep.nu_over_pi is None  # sqrt 2 / pi is irrational
    assert rep.rotation_number == Fraction(3, 4)
    assert rep.resonant and not rep.screened
    assert rep.distinct_points == 4


def test_screened_orbits_equidistribute():
    rng = np.random.default_rng(53)
    slopes = []
    for _ in range(5):
        pt = screened_start("N13", "T", rng)
        rep = equidistribution("N13", "T", pt, 10_000)
        assert rep.screened
        assert rep.discrepancy < 0.05
        assert rep.tracks_reference
        assert rep.max_residual < 1e-6
        slopes.append(rep.slope)
    assert abs(np.median(slopes) + 1) < 0.4


def test_equidistribution_other_twists():
    rng = np.random.default_rng(54)
    for s, t in (("N22", "U"), ("N31", "U"), ("N13", "W")):
        rep = equidistribution(s, t, screened_start(s, t, rng), 5000)
        assert rep.discrepancy < 0.05 and rep.tracks_reference, rep.as_dict()


def test_equidistribution_zero_length():
    with pytest.raises(ValueError):
        equidistribution("N13", "T", resonant_point(), 0)


def test_ergodicity_validation():
    with pytest.raises(ConfigError):
        ErgodicityExperiment("N13", (0, 0, 0), 0.05, ("T", "U"), 0, 1)
    with pytest.raises(ConfigError):
        ErgodicityExperiment("N13", (0, 0, 0), 0.05, ("T", "Q"), 1000, 1)
    with pytest.raises(ConfigError):
        ergodicity("N13", (0, 0, 0), 0.05, ("T", "T"), 1000, 1)


def test_ergodicity_small_run_deterministic():
    kw = dict(space_batches=4, space_per_batch=500, time_batches=20)
    a, ca = ergodicity("N13", (0, 0, 0), 0.05, ("T", "U", "W"), 20_000, 7, control="T", **kw)
    b, _ = ergodicity("N13", (0, 0, 0), 0.05, ("T", "U", "W"), 20_000, 7, **kw)
    assert np.array_equal(a.time_mean, b.time_mean)
    assert np.array_equal(a.space_mean, b.space_mean)
    assert set(a.program) == {"T", "U", "W"}
    assert ca.program == ("T",)
    assert np.array_equal(ca.start, a.start)
    d = a.as_dict()
    assert [r["function"] for r in d["functions"]] == list(a.functions)
    assert np.all(np.isfinite(a.z))
