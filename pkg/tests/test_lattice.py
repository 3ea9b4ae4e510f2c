from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pgt.lattice import gram_schmidt, is_lll_reduced, lll_reduce


def _det(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    n, det = len(m), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


square = st.integers(2, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-10**6, 10**6), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(square)
@settings(max_examples=60, deadline=None)
def test_reduces_and_preserves_volume(rows):
    d = _det(rows)
    assume(d != 0)
    out = lll_reduce(rows)
    assert is_lll_reduced(out)
    assert abs(_det(out)) == abs(d)


def test_textbook_example():
    out = lll_reduce([[1, 1, 1], [-1, 0, 2], [3, 5, 6]])
    assert is_lll_reduced(out)
    assert sorted(sum(x * x for x in r) for r in out) == [1, 2, 5]


def test_finds_integer_relation():
    import mpmath

    with mpmath.workprec(300):
        xs = [mpmath.mpf(1), mpmath.sqrt(2), 1 + 3 * mpmath.sqrt(2), mpmath.sqrt(3)]
        scale = mpmath.ldexp(1, 200)
        fixed = [int(mpmath.nint(x * scale)) for x in xs]
    rows = [[int(i == j) for j in range(4)] + [fixed[i]] for i in range(4)]
    first = lll_reduce(rows)[0]
    rel = first[:4]
    if rel[0] < 0:
        rel = [-c for c in rel]
    assert rel == [1, 3, -1, 0]


def test_dependent_rows_rejected():
    with pytest.raises(ValueError):
        lll_reduce([[1, 2], [2, 4]])


def test_gram_schmidt_orthogonal():
    bs, _ = gram_schmidt([[3, 1, 0], [2, 2, 1], [0, 1, 5]])
    for i in range(3):
        for j in range(i):
            assert sum(a * b for a, b in zip(bs[i], bs[j])) == 0
