"""Exact integer LLL reduction.

All-integer variant (de Weger / Cohen): only the Gram determinants ``d_i`` and
the scaled Gram-Schmidt coefficients ``lambda_ij = d_j mu_ij`` are stored, so
big entries never leave exact integer arithmetic.
"""

from __future__ import annotations

from fractions import Fraction


def _dot(u: list[int], v: list[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis: list[list[int]], delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """Return an LLL-reduced basis of the lattice spanned by the rows of ``basis``.

    Rows must be linearly independent. ``delta`` is the Lovasz constant.
    """
    b = [list(map(int, row)) for row in basis]
    n = len(b)
    if n <= 1:
        return b
    dn, dd = delta.numerator, delta.denominator
    d = [0] * (n + 1)  # d[0] = 1, d[i+1] = Gram determinant of rows 0..i
    lam = [[0] * n for _ in range(n)]
    d[0] = 1
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("zero basis vector")

    def red(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        new = (d[k - 1] * d[k + 1] + lk * lk) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lk * t) // d[k]
            lam[i][k - 1] = (new * t + lk * lam[i][k]) // d[k + 1]
        d[k] = new

    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("basis rows are linearly dependent")
                    d[k + 1] = u
        red(k, k - 1)
        # Lovasz: d_{k+1} d_{k-1} >= delta d_k^2 - lambda^2
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lam[k][k - 1] ** 2:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


def gram_schmidt(basis: list[list[int]]) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Exact Gram-Schmidt: returns ``(b_star, mu)``. Used to check reduction."""
    bs: list[list[Fraction]] = []
    n = len(basis)
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(basis):
        v = [Fraction(x) for x in row]
        for j in range(i):
            denom = sum(x * x for x in bs[j])
            mu[i][j] = sum(Fraction(a) * c for a, c in zip(row, bs[j])) / denom
            v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
        bs.append(v)
    return bs, mu


def is_lll_reduced(basis: list[list[int]], delta: Fraction = Fraction(99, 100)) -> bool:
    bs, mu = gram_schmidt(basis)
    norms = [sum(x * x for x in v) for v in bs]
    for i in range(len(basis)):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
        if i and norms[i] < (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            return False
    return True
