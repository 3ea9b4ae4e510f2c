import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import grid_scan
from pgt.chain_models import ChainSpec
from pgt.diophantine import Budget, ScalingDataset, alignment_search
from pgt.scaling import FitVerdict, Outcome, Thresholds, fit_power_law, pgt_verdict


def _synthetic(alpha, c, n=12):
    eps = np.logspace(-2, -9, n)
    return [(e, c * e**-alpha) for e in eps]


@pytest.mark.parametrize("alpha, c", [(0.5, 3.0), (1.5, 0.2), (2.0, 10.0)])
def test_synthetic_fit_is_exact(alpha, c):
    fit = fit_power_law(_synthetic(alpha, c), k_i=round(2 * alpha))
    assert abs(fit.alpha - alpha) < 1e-6
    assert fit.prefactor == pytest.approx(c, rel=1e-6)
    assert fit.r_squared == pytest.approx(1)
    assert fit.verdict is FitVerdict.CONSISTENT


@given(st.floats(0.2, 3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
@settings(max_examples=40, deadline=None)
def test_rescaling_time_keeps_exponent(alpha, c, scale):
    base = fit_power_law(_synthetic(alpha, c))
    scaled = fit_power_law([(e, scale * t) for e, t in _synthetic(alpha, c)])
    assert scaled.alpha == pytest.approx(base.alpha, abs=1e-9)
    assert scaled.prefactor == pytest.approx(scale * base.prefactor, rel=1e-9)


def test_points_above_cut_are_ignored():
    pairs = _synthetic(1.0, 1.0) + [(0.5, 1e6), (0.2, 1e-6), (0.0, 5.0)]
    fit = fit_power_law(pairs, k_i=2)
    assert abs(fit.alpha - 1.0) < 1e-9 and fit.n_points == 12


def test_inconsistent_and_insufficient():
    assert fit_power_law(_synthetic(1.0, 1.0), k_i=4).verdict is FitVerdict.INCONSISTENT
    assert fit_power_law(_synthetic(1.0, 1.0)).verdict is FitVerdict.INSUFFICIENT_DATA
    two = fit_power_law(_synthetic(1.0, 1.0, n=2), k_i=2)
    assert two.verdict is FitVerdict.INSUFFICIENT_DATA and two.n_points == 2
    assert math.isnan(fit_power_law([(0.01, 3.0)], k_i=1).alpha)


def test_noisy_fit_rejected_by_r2():
    rng = np.random.default_rng(1)
    pairs = [(e, t * math.exp(rng.normal(0, 2))) for e, t in _synthetic(1.0, 1.0, n=30)]
    fit = fit_power_law(pairs, k_i=2, tolerance=10)
    assert fit.r_squared < 0.98 and fit.verdict is FitVerdict.INCONSISTENT


@given(st.lists(st.integers(0, 11), min_size=1, max_size=6, unique=True))
@settings(max_examples=30, deadline=None)
def test_removing_points_from_a_clean_law_keeps_exponent(drop):
    pairs = _synthetic(1.5, 2.0)
    kept = [p for i, p in enumerate(pairs) if i not in drop]
    assert fit_power_law(kept).alpha == pytest.approx(1.5, abs=1e-9)


def test_fit_accepts_dataset(spectral_cache):
    an = spectral_cache(ChainSpec.xx(5))
    ds = alignment_search(an.form, an.frequencies, Budget(q_limit=10**16), ChainSpec.xx(5))
    fit = fit_power_law(ds)
    assert fit.reference == 0.5
    assert abs(fit.alpha - 0.5) < 0.1
    assert fit.verdict is FitVerdict.CONSISTENT


# -- verdicts -------------------------------------------------------------------


@pytest.mark.parametrize("spec", [ChainSpec.xx(8), ChainSpec.ssh(5, g="0")], ids=lambda s: s.describe())
def test_obstructed_chains_are_certified_nopgt(spec, spectral_cache):
    an = spectral_cache(spec)
    ds = alignment_search(an.form, an.frequencies, Budget(q_limit=10**6), spec)
    v = pgt_verdict(an.form, an.frequencies, ds)
    assert v.outcome is Outcome.NO_PGT and v.basis == "certified"
    # the float scan agrees the probability stays low
    assert grid_scan(spec, 10**5).max() < 0.95


@pytest.mark.parametrize(
    "spec", [ChainSpec.xx(4), ChainSpec.xx(5), ChainSpec.ssh(2, g="sqrt(2)")], ids=lambda s: s.describe()
)
def test_pgt_chains(spec, spectral_cache):
    an = spectral_cache(spec)
    ds = alignment_search(an.form, an.frequencies, Budget(q_limit=10**12), spec)
    v = pgt_verdict(an.form, an.frequencies, ds)
    assert v.outcome is Outcome.PGT
    assert max(float(p.probability) for p in ds.points) > 1 - 1e-3


def test_empirical_nopgt_and_inconclusive(spectral_cache):
    an = spectral_cache(ChainSpec.xx(5))
    low = ScalingDataset([], q_limit=10**6, sup_probability=0.4)
    v = pgt_verdict(an.form, an.frequencies, low)
    assert v.outcome is Outcome.NO_PGT and v.basis == "empirical"
    mid = ScalingDataset([], q_limit=10**6, sup_probability=0.97)
    assert pgt_verdict(an.form, an.frequencies, mid).outcome is Outcome.INCONCLUSIVE
    open_budget = ScalingDataset([], q_limit=10**6, sup_probability=0.4, budget_exhausted=False)
    assert pgt_verdict(an.form, an.frequencies, open_budget).outcome is Outcome.INCONCLUSIVE


def test_strict_threshold_turns_pgt_inconclusive(spectral_cache):
    spec = ChainSpec.xx(5)
    an = spectral_cache(spec)
    ds = alignment_search(an.form, an.frequencies, Budget(q_limit=10**4), spec)
    v = pgt_verdict(an.form, an.frequencies, ds, Thresholds(eps_pgt=1e-30))
    assert v.outcome is Outcome.INCONCLUSIVE
