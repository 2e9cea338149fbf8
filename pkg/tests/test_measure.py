import math

import pytest

from services import measure
from services.errors import DimensionCapError, ValidationError
from services.tasks import task_pool


def test_zeta():
    assert measure.zeta(2) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert measure.zeta(1) == 1.0
    with pytest.raises(ValidationError):
        measure.zeta(0.5)


def test_ball_volumes():
    assert measure.ball_volume(1) == pytest.approx(2.0)
    assert measure.ball_volume(2) == pytest.approx(math.pi)
    assert measure.ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_rankin_b_in_dimension_two():
    assert measure.rankin_B(2, 1) == pytest.approx(12 / math.pi, abs=1e-12)


def test_rankin_b_is_symmetric():
    for n in range(3, 20):
        for k in range(1, n):
            assert measure.rankin_B(n, k) == measure.rankin_B(n, n - k)
    with pytest.raises(ValidationError):
        measure.rankin_B(4, 4)


def test_thunder_value_matches_siegel_in_dimension_two():
    for t in (0.3, 0.5, 0.8):
        assert measure.thunder_value(2, 1, t) == pytest.approx(6 * t * t / math.pi)
    with pytest.raises(ValidationError):
        measure.thunder_value(2, 1, 0.0)


def test_t_threshold():
    assert measure.t_threshold(4, 1, 1.0) == pytest.approx(4 ** (3 / 8))
    for k in range(1, 6):
        assert measure.t_threshold(6, k, 6.0) == pytest.approx(1.0)


def test_rankin_growth_grid():
    report = measure.rankin_growth_check((10, 60), c=60.0)
    assert report["holds"]
    assert report["max"] <= 1.0
    assert len(report["by_n"]) == 51
    single = measure.rankin_growth_check((10, 10), c=60.0, k_all=False)
    assert single["argmax"] == {"n": 10, "k": 1}


def test_rankin_growth_k1_slice_improves_for_large_n():
    k1 = measure.rankin_growth_check((20, 60), c=60.0)["k1_slice"]
    assert all(b <= a for a, b in zip(k1, k1[1:]))


def test_threshold_report():
    report = measure.threshold_report(5, c1=1.0)
    assert [r["k"] for r in report["rows"]] == [1, 2, 3, 4]
    assert not report["c1_empirical"]
    assert report["rows"][0]["t"] == pytest.approx(5 ** 0.4)


def test_default_c1_is_empirical(monkeypatch):
    monkeypatch.setattr(measure.settings, "GON_C1", None)
    c1, empirical = measure.default_c1()
    assert empirical
    assert c1 == pytest.approx(10 * measure.empirical_c())
    monkeypatch.setattr(measure.settings, "GON_C1", 3.5)
    assert measure.default_c1() == (3.5, False)


def test_next_prime():
    assert measure.next_prime(10 ** 7) == 10_000_019
    assert measure.next_prime(2) == 2
    assert measure.next_prime(90) == 97


def test_samplers_are_unimodular_and_seeded():
    for n, sampler in ((2, measure.EXACT_2D), (3, measure.APPROX_ND), (4, measure.APPROX_ND)):
        x = measure.sample_lattice(n, seed=5, index=2, sampler=sampler)
        assert x.covolume() == pytest.approx(1.0, rel=1e-9)
        again = measure.sample_lattice(n, seed=5, index=2, sampler=sampler)
        assert (x.basis == again.basis).all()
    with pytest.raises(ValidationError):
        measure.sample_lattice(3, sampler=measure.EXACT_2D)


def test_quadrature_oracle():
    report = measure.stable_fraction_quadrature_2d()
    assert report["fraction"] == pytest.approx(1 - 3 / math.pi, abs=1e-6)
    assert report["total_measure"] == pytest.approx(math.pi / 3, rel=1e-6)


def test_stable_fraction_agrees_with_quadrature():
    report = measure.estimate_stable_fraction(2, 2000, seed=0)
    assert report.sampler == measure.EXACT_2D
    assert abs(report.fraction - (1 - 3 / math.pi)) < 0.02
    low, high = report.ci95
    assert low <= report.fraction <= high


def test_stable_fraction_independent_of_threads():
    threads = task_pool.threads
    try:
        task_pool.resize(1)
        single = measure.estimate_stable_fraction(2, 300, seed=3)
        task_pool.resize(4)
        pooled = measure.estimate_stable_fraction(2, 300, seed=3)
    finally:
        task_pool.resize(threads)
    assert single.to_json() == pooled.to_json()


def test_siegel_mean_dimension_two():
    report = measure.siegel_check(2, 0.8, 2000, seed=1)
    assert report["siegel_mean"] == pytest.approx(report["thunder_value"])
    assert report["rel_error"] < 0.15


def test_threshold_fraction_respects_bound():
    for t in (0.3, 0.6, 0.9):
        report = measure.threshold_fraction(2, 1, t, 1000, seed=2)
        assert report["bound_holds"]
        assert report["complement"] <= report["thunder_bound"] + 3 * report["standard_error"]


def test_sample_validation():
    with pytest.raises(ValidationError):
        measure.estimate_stable_fraction(2, 0)
    with pytest.raises(DimensionCapError):
        measure.estimate_stable_fraction(measure.settings.GON_ALPHA_DIM_CAP + 1, 10)


def test_ks_diagnostic_report():
    report = measure.sampler_ks_diagnostic(3, 100, seed=0)
    assert 0.0 <= report["statistic"] <= 1.0
    assert report["prime_floors"] == [10 ** 7, 10 ** 8]


@pytest.mark.slow
@pytest.mark.parametrize("t", [0.3, 0.5, 0.8])
def test_siegel_mean_within_five_percent(t):
    report = measure.siegel_check(2, t, 100_000, seed=0)
    assert report["mean_sign_pairs"] * 2 == pytest.approx(report["mean_count"])
    assert report["within_5pct"]


@pytest.mark.slow
def test_stable_fraction_grows_with_dimension():
    low = measure.estimate_stable_fraction(2, 2000, seed=0).fraction
    high = measure.estimate_stable_fraction(6, 2000, seed=0).fraction
    assert high > low
