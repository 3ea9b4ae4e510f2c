import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import expm_probability
from pgt.chain_models import ChainSpec, build_one_excitation
from pgt.spectral import (
    COS,
    SIN,
    GridTime,
    PrecisionError,
    decompose,
    evaluate_amplitude,
    evaluate_probability,
    transfer_form,
)


def _form(spec, bits=256):
    return transfer_form(spec, decompose(build_one_excitation(spec), bits))


def test_two_spin_spectrum():
    sd = decompose(build_one_excitation(ChainSpec.xx(2)), 128)
    assert [float(x) for x in sd.eigenvalues] == [-1.0, 1.0]


def test_ssh_eight_spectrum_g2():
    sd = decompose(build_one_excitation(ChainSpec.ssh(2, g="2")), 256)
    with mpmath.workprec(256):
        r5, r7 = mpmath.sqrt(5), mpmath.sqrt(7)
        expected = sorted([-r7, -r5, mpmath.mpf(-2), 0, 0, 2, r5, r7])
        assert max(abs(a - b) for a, b in zip(sd.eigenvalues, expected)) < mpmath.ldexp(1, -240)


@pytest.mark.parametrize(
    "spec",
    [ChainSpec.xx(7), ChainSpec.ssh(3, g="sqrt(2)"), ChainSpec.staggered(8, 1, 5)],
    ids=lambda s: s.describe(),
)
def test_against_mpmath_eigsy(spec):
    bits = 192
    h = build_one_excitation(spec)
    sd = decompose(h, bits)
    with mpmath.workprec(bits + 32):
        oracle, _ = mpmath.eigsy(h.matrix(bits + 32))
        ref = sorted(oracle[i] for i in range(h.dim))
        assert max(abs(a - b) for a, b in zip(sd.eigenvalues, ref)) < mpmath.ldexp(1, -bits + 16)
    assert sd.residual(h.matrix(bits)) < mpmath.ldexp(1, -bits + 16)
    assert sd.orthonormality_error() < mpmath.ldexp(1, -bits + 16)


def test_unseeded_jacobi_agrees():
    h = build_one_excitation(ChainSpec.ssh(2, g="4/3"))
    a, b = decompose(h, 128), decompose(h, 128, seed=False)
    assert max(abs(x - y) for x, y in zip(a.eigenvalues, b.eigenvalues)) < mpmath.ldexp(1, -110)


def test_xx5_closed_form():
    form = _form(ChainSpec.xx(5))
    assert form.kind == "cos"
    with mpmath.workprec(256):
        assert abs(form.constant - mpmath.mpf(1) / 3) < 1e-60
        (a1, x1), (a2, x2) = [(t.weight, t.frequency) for t in form.terms]
        assert abs(a1 + mpmath.mpf(1) / 2) < 1e-60 and abs(x1 - 1) < 1e-60
        assert abs(a2 - mpmath.mpf(1) / 6) < 1e-60 and abs(x2 - mpmath.sqrt(3)) < 1e-60


def test_ssh8_g2_terms_merge_double_zero():
    form = _form(ChainSpec.ssh(2, g="2"))
    with mpmath.workprec(256):
        got = [(float(t.weight), float(t.frequency)) for t in form.terms]
    assert form.constant == 0
    assert got == pytest.approx([(1 / 3, 2), (-1 / 2, 5**0.5), (1 / 6, 7**0.5)], abs=1e-14)


def test_even_xx_gives_sine_form():
    form = _form(ChainSpec.xx(4))
    assert form.kind == "sin"
    assert {t.shift for t in form.terms} == {SIN}
    assert abs(float(form.normalization()) - 1) < 1e-15


def test_staggered_falls_back_to_general_form():
    form = _form(ChainSpec.staggered(4, 1, 10))
    assert form.general_form and not form.terms
    assert form.kind == "general"


def test_frequencies_of_general_form_are_gaps():
    form = _form(ChainSpec.staggered(4, 1, 10))
    lams = [lam for _, lam in form.eigenterms]
    gaps = sorted(float(lams[-1] - x) for x in lams[:-1])
    assert [float(x) for x in form.frequencies()] == pytest.approx(gaps, abs=1e-14)


@pytest.mark.parametrize(
    "spec",
    [
        ChainSpec.xx(5),
        ChainSpec.xx(6),
        ChainSpec.ssh(2, g="1"),
        ChainSpec.ssh(3, g="1"),
        ChainSpec.staggered(4, 1, 10),
        ChainSpec.staggered(8, 1, 5),
        ChainSpec.xx(5, source=2, target=4),
    ],
    ids=lambda s: s.describe(),
)
def test_probability_matches_matrix_exponential(spec):
    form = _form(spec)
    times = np.linspace(0, 40, 57)
    oracle = expm_probability(spec, times)
    ours = [float(evaluate_probability(form, mpmath.mpf(t))) for t in times]
    assert np.max(np.abs(np.array(ours) - oracle)) < 1e-11


def test_ssh8_g1_at_two_pi():
    # the sqrt(2) convergent 3/2 suggests t = 2 pi
    form = _form(ChainSpec.ssh(2, g="1"))
    p = float(evaluate_probability(form, GridTime(2)))
    assert p == pytest.approx(expm_probability(ChainSpec.ssh(2, g="1"), 2 * np.pi)[0], abs=1e-12)
    assert p == pytest.approx(0.86, abs=0.01)


def test_grid_time_matches_real_time():
    form = _form(ChainSpec.ssh(2, g="sqrt(2)"))
    for q in (1, 7, 123, 10**6 + 3):
        with mpmath.workprec(200):
            t = mpmath.pi * q
        assert abs(evaluate_probability(form, GridTime(q), 150) - evaluate_probability(form, t, 150)) < 1e-30


def test_huge_times_need_precision():
    form = _form(ChainSpec.xx(5), bits=128)
    with pytest.raises(PrecisionError) as info:
        evaluate_probability(form, GridTime(10**40))
    assert info.value.requested_bits > 128


def test_perfect_transfer_two_spins():
    form = _form(ChainSpec.xx(2))
    assert evaluate_probability(form, GridTime(1, 2)) == 1


@given(st.floats(0, 1e4), st.sampled_from([ChainSpec.xx(6), ChainSpec.ssh(2, g="sqrt(3)"), ChainSpec.staggered(4, 1, 10)]))
@settings(max_examples=60, deadline=None)
def test_probability_in_unit_interval(t, spec):
    p = evaluate_probability(_cached(spec), mpmath.mpf(t))
    assert 0 <= p <= 1


def test_amplitude_is_real_for_paired_forms():
    amp = evaluate_amplitude(_cached(ChainSpec.xx(6)), mpmath.mpf(3))
    assert isinstance(amp, mpmath.mpf)


def test_shift_constants():
    assert COS == 0 and SIN == mpmath.mpf(1) / 2


_CACHE = {}


def _cached(spec):
    if spec not in _CACHE:
        _CACHE[spec] = _form(spec)
    return _CACHE[spec]
