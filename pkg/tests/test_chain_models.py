from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgt.chain_models import (
    ChainSpec,
    Coupling,
    Family,
    SpecificationError,
    brute_force_block,
    build_one_excitation,
)


def test_xx_two_spins():
    h = build_one_excitation(ChainSpec.xx(2)).array()
    assert h.tolist() == [[0, 1], [1, 0]]


def test_xx_spectrum_is_cosine_band():
    n = 7
    vals = np.linalg.eigvalsh(build_one_excitation(ChainSpec.xx(n)).array())
    expected = sorted(2 * np.cos(k * np.pi / (n + 1)) for k in range(1, n + 1))
    assert np.allclose(vals, expected, atol=1e-13)


def test_xx_seven_irrationals():
    vals = np.linalg.eigvalsh(build_one_excitation(ChainSpec.xx(7)).array())
    r2 = np.sqrt(2)
    expected = sorted([0, r2, -r2] + [s * np.sqrt(2 + u * r2) for s in (1, -1) for u in (1, -1)])
    assert np.allclose(vals, expected, atol=1e-13)


def test_ssh_eight_matches_printed_pattern():
    g = 2.0
    h = build_one_excitation(ChainSpec.ssh(2, g="2")).array()
    expected = np.zeros((8, 8))
    # cells (A1, A2, B) = (0, 1, 2), (3, 4, 5); closing pair (6, 7)
    for i, j, c in [(0, 1, g), (0, 2, 1), (2, 3, 1), (3, 4, g), (3, 5, 1), (5, 6, 1), (6, 7, g)]:
        expected[i, j] = expected[j, i] = c
    assert np.array_equal(h, expected)


def test_ssh_default_sites():
    spec = ChainSpec.ssh(3)
    assert spec.n_spins == 11
    assert (spec.source, spec.target) == (1, 10)


def test_staggered_diagonal_carries_zz():
    h = build_one_excitation(ChainSpec.staggered(4, 1, 10)).array()
    # bonds J1, J2, J1; flipping the end spin breaks one J1 bond
    assert h[0, 0] == pytest.approx(1 + 10 + 1 - 2 * 1)
    assert h[1, 1] == pytest.approx(12 - 2 * (1 + 10))
    assert h[0, 1] == 2 and h[1, 2] == 20


@pytest.mark.parametrize(
    "spec",
    [
        ChainSpec.xx(2),
        ChainSpec.xx(6, j=["1", "2", "sqrt(3)", "1/2", "3"]),
        ChainSpec.staggered(4, 1, 10),
        ChainSpec.staggered(8, 1, 5),
        ChainSpec.ssh(2, g="sqrt(2)"),
        ChainSpec.ssh(3, g="1", v="2", w="1/3"),
    ],
    ids=lambda s: s.describe(),
)
def test_brute_force_projection(spec):
    block, leakage = brute_force_block(spec, return_leakage=True)
    assert leakage == 0
    assert np.max(np.abs(block - build_one_excitation(spec).array())) <= 1e-12


def test_brute_force_refuses_large_chains():
    with pytest.raises(SpecificationError):
        brute_force_block(ChainSpec.xx(15))


@given(
    n=st.integers(2, 8),
    js=st.lists(st.sampled_from(["1", "2", "1/2", "sqrt(2)", "-3", "0.75"]), min_size=7, max_size=7),
)
@settings(max_examples=25, deadline=None)
def test_brute_force_random_xx(n, js):
    spec = ChainSpec.xx(n, j=js[: n - 1])
    assert np.max(np.abs(brute_force_block(spec) - build_one_excitation(spec).array())) <= 1e-12


@given(st.integers(1, 3), st.sampled_from(["0", "1", "4/3", "sqrt(5)"]))
@settings(max_examples=12, deadline=None)
def test_symmetric_and_supported_on_edges(n_cells, g):
    spec = ChainSpec.ssh(n_cells, g=g)
    h = build_one_excitation(spec)
    m = h.matrix(128)
    for i in range(h.dim):
        for j in range(h.dim):
            assert m[i, j] == m[j, i]
            if i != j and m[i, j] != 0:
                assert (min(i, j), max(i, j)) in h.support()
    edges = {(i, j) for i, j, c in spec.edges() if not c.is_zero}
    assert h.support() == edges


@pytest.mark.parametrize(
    "text, value",
    [("3", Fraction(3)), ("4/3", Fraction(4, 3)), ("0.25", Fraction(1, 4)), ("-2", Fraction(-2)), ("sqrt(4/9)", Fraction(2, 3))],
)
def test_coupling_rational_literals(text, value):
    assert Coupling.parse(text).exact() == value


def test_coupling_sqrt_literal():
    c = Coupling.parse("-sqrt(5/4)")
    assert c.exact() is None
    with mpmath.workprec(200):
        assert abs(c.to_mpf(200) + mpmath.sqrt(mpmath.mpf(5) / 4)) < mpmath.mpf(2) ** -190


@pytest.mark.parametrize("text", ["abc", "sqrt(-2)", "1/0", ""])
def test_coupling_rejects_garbage(text):
    with pytest.raises(SpecificationError):
        Coupling.parse(text)


@pytest.mark.parametrize(
    "build",
    [
        lambda: ChainSpec.xx(1),
        lambda: ChainSpec.xx(4, source=2, target=2),
        lambda: ChainSpec.xx(4, target=9),
        lambda: ChainSpec.xx(4, j=["1", "1"]),
        lambda: ChainSpec.xx(3, j="0"),
        lambda: ChainSpec.ssh(0),
        lambda: ChainSpec(Family.DECORATED_SSH, 9, (), 1, 8),
    ],
)
def test_invalid_specs(build):
    with pytest.raises(SpecificationError):
        build()


def test_ssh_allows_zero_pendant():
    h = build_one_excitation(ChainSpec.ssh(2, g="0"))
    assert all(not (i, j) in h.support() for i, j in [(0, 1), (3, 4), (6, 7)])


def test_family_aliases():
    assert Family.parse("Decorated-SSH") is Family.DECORATED_SSH
    with pytest.raises(SpecificationError):
        Family.parse("ising")
