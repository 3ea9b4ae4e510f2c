"""Rational independence of transfer frequencies.

``K_I`` is the dimension of the rational span of ``{1, x_1, ..., x_m}`` minus
one: the number of frequencies that are rationally independent once rational
values and rational affine dependencies are accounted for. Relations are found
by LLL reduction of the integer-relation lattice and re-verified at twice the
detection precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from pgt.lattice import lll_reduce

DEFAULT_HEIGHT = 10**6


class InconclusiveError(ArithmeticError):
    """A candidate relation passed detection but failed verification."""

    def __init__(self, message: str, candidate: tuple[int, ...]):
        super().__init__(message)
        self.candidate = candidate


def to_fraction(x) -> Fraction:
    """Exact rational value of a binary floating-point ``mpf``."""
    if not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(x)
    man, exp = x.man_exp
    return Fraction(man) * Fraction(2) ** exp if exp >= 0 else Fraction(man, 2**-exp)


def continued_fraction(x: Fraction, max_terms: int | None = None) -> list[int]:
    terms = []
    num, den = x.numerator, x.denominator
    while den and (max_terms is None or len(terms) < max_terms):
        a, r = divmod(num, den)
        terms.append(a)
        num, den = den, r
    return terms


def convergents_of(terms: Sequence[int]):
    """Yield ``(p, q)`` for the convergents of a continued fraction."""
    p0, q0, p1, q1 = 1, 0, terms[0], 1
    yield p1, q1
    for a in terms[1:]:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        yield p1, q1


def rational_check(x, max_den: int = DEFAULT_HEIGHT, precision_bits: int = 256) -> Fraction | None:
    """``p/q`` with ``q <= max_den`` and ``|x - p/q| <= 2**(-precision_bits/2)``, else ``None``."""
    exact = to_fraction(x)
    tol = Fraction(1, 2 ** (precision_bits // 2))
    for p, q in convergents_of(continued_fraction(exact)):
        if q > max_den:
            return None
        if abs(exact - Fraction(p, q)) <= tol:
            return Fraction(p, q)
    return None


@dataclass(frozen=True)
class FrequencyAnalysis:
    """Relation structure of a frequency set.

    ``expansions[j] = (c0, (c_1, ..., c_K))`` writes frequency ``j`` as
    ``c0 + sum_i c_i * frequencies[basis[i]]`` with rational coefficients.
    """

    frequencies: tuple
    rational_part: tuple[tuple[int, Fraction], ...]
    irrational_part: tuple[int, ...]
    relations: tuple[tuple[int, ...], ...]
    k_i: int
    certificate_precision: int
    height_limit: int
    basis: tuple[int, ...]
    expansions: tuple[tuple[Fraction, tuple[Fraction, ...]], ...]
    unexplored: tuple[tuple[int, ...], ...] = field(default=())

    def basis_values(self) -> list:
        return [self.frequencies[i] for i in self.basis]

    def describe_relation(self, r: Sequence[int], names: Sequence[str] | None = None) -> str:
        names = names or ["1"] + [f"x{j + 1}" for j in range(len(self.frequencies))]
        parts = []
        for c, name in zip(r, names):
            if c:
                coef = "" if abs(c) == 1 else f"{abs(c)}*"
                parts.append(f"{'-' if c < 0 else '+'} {coef}{name}")
        text = " ".join(parts).lstrip("+ ")
        return f"{text} = 0"


def default_precision(height_limit: int) -> int:
    return 4 * height_limit.bit_length() + 128


def _rref_expansions(relations: list[tuple[int, ...]], m: int):
    """Express pivot columns through free ones; column 0 is the constant 1."""
    rows = [[Fraction(c) for c in r] for r in relations]
    order = list(range(m, 0, -1)) + [0]
    pivots: dict[int, int] = {}
    r = 0
    for col in order:
        sel = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        piv = rows[r][col]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots[col] = r
        r += 1
    if 0 in pivots:
        raise InconclusiveError("relations imply 1 = 0", tuple(relations[0]))
    basis = [c for c in range(1, m + 1) if c not in pivots]
    expansions = []
    for j in range(1, m + 1):
        if j in pivots:
            row = rows[pivots[j]]
            expansions.append((-row[0], tuple(-row[b] for b in basis)))
        else:
            expansions.append((Fraction(0), tuple(Fraction(int(b == j)) for b in basis)))
    return [b - 1 for b in basis], expansions


def classify_frequencies(
    freqs: Sequence,
    height_limit: int = DEFAULT_HEIGHT,
    precision_bits: int | None = None,
) -> FrequencyAnalysis:
    """Rational/irrational split, integer relations and ``K_I`` for ``freqs``.

    Detection runs at ``precision_bits`` (default ``4 * bits(height) + 128``);
    every relation is then checked against the inputs at twice that precision,
    so the inputs must be accurate to ``2 * precision_bits`` bits.
    Raises :class:`InconclusiveError` when a detected relation fails that check.
    """
    if any(x <= 0 for x in freqs):
        raise ValueError("frequencies must be positive")
    prec = precision_bits or default_precision(height_limit)
    cert = 2 * prec
    m = len(freqs)
    with mpmath.workprec(cert + 32):
        values = [mpmath.mpf(1)] + [mpmath.mpf(x) for x in freqs]
        scale = mpmath.ldexp(1, prec)
        fixed = [int(mpmath.nint(v * scale)) for v in values]
    relations: list[tuple[int, ...]] = []
    unexplored: list[tuple[int, ...]] = []
    if m:
        rows = [[int(i == j) for j in range(m + 1)] + [fixed[i]] for i in range(m + 1)]
        reduced = lll_reduce(rows)
        for row in reduced:
            coeffs, residual = tuple(row[:-1]), row[-1]
            if abs(residual) > (m + 1) * max(map(abs, coeffs)) + 1:
                continue
            with mpmath.workprec(cert + 32):
                check = abs(mpmath.fsum(c * v for c, v in zip(coeffs, values)))
            # inputs carry ``cert`` bits, so a true relation vanishes to about that level
            holds = check <= mpmath.ldexp(sum(map(abs, coeffs)), -(cert - 32))
            if max(map(abs, coeffs)) > height_limit:
                if holds:
                    unexplored.append(coeffs)
                continue
            if not holds:
                raise InconclusiveError(
                    f"candidate relation {coeffs} fails at {cert} bits (|r.x| = {mpmath.nstr(check, 5)})", coeffs
                )
            if coeffs[0] < 0 or (coeffs[0] == 0 and next(c for c in coeffs if c) < 0):
                coeffs = tuple(-c for c in coeffs)
            relations.append(coeffs)
    relations.sort(key=lambda r: (sum(map(abs, r)), r))
    basis, expansions = _rref_expansions(relations, m)
    rational = []
    for j, x in enumerate(freqs):
        frac = rational_check(x, height_limit, cert)
        if frac is not None:
            rational.append((j, frac))
    rational_idx = {j for j, _ in rational}
    return FrequencyAnalysis(
        frequencies=tuple(freqs),
        rational_part=tuple(rational),
        irrational_part=tuple(j for j in range(m) if j not in rational_idx),
        relations=tuple(relations),
        k_i=m - len(relations),
        certificate_precision=cert,
        height_limit=height_limit,
        basis=tuple(basis),
        expansions=tuple(expansions),
        unexplored=tuple(unexplored),
    )


def relation_interval(relation: Sequence[int], freqs: Sequence, radius, precision_bits: int = 512):
    """Interval enclosure of ``r . (1, x_1, ..., x_m)`` with each ``x_j`` known to ``radius``."""
    iv = mpmath.iv
    saved = iv.prec
    iv.prec = precision_bits
    try:
        total = iv.mpf(relation[0])
        rad = iv.mpf(radius)
        for c, x in zip(relation[1:], freqs):
            if c:
                total += c * (iv.mpf(x) + iv.mpf([-1, 1]) * rad)
        return total
    finally:
        iv.prec = saved
