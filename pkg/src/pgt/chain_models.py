"""Chain specifications and their one-excitation Hamiltonians.

Three families are supported: homogeneous or per-bond XX chains, staggered
Heisenberg chains, and decorated SSH chains (one pendant ``A2`` qubit per
cell). Sites are numbered from 1 in :class:`ChainSpec`; matrices are indexed
from 0.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np


class SpecificationError(ValueError):
    """Raised for inconsistent or unsupported chain specifications."""


_LITERAL = re.compile(
    r"""^\s*(?P<sign>[+-])?\s*
    (?:sqrt\(\s*(?P<rad>[0-9./eE+-]+)\s*\)|(?P<num>[0-9./eE+-]+))\s*$""",
    re.VERBOSE,
)


def _parse_fraction(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(num.strip()) / Fraction(den.strip())
    return Fraction(text.strip())


@dataclass(frozen=True, order=True)
class Coupling:
    """An exact coupling constant ``sign * sqrt(radicand)`` or a rational.

    ``value`` is the radicand when ``is_sqrt`` is set, else the magnitude itself.
    """

    value: Fraction
    is_sqrt: bool = False
    sign: int = 1

    @classmethod
    def parse(cls, text: str | int | Fraction | Coupling) -> Coupling:
        """Parse ``3``, ``4/3``, ``0.25``, ``sqrt(2)``, ``-sqrt(5/4)``."""
        if isinstance(text, Coupling):
            return text
        if isinstance(text, (int, Fraction)):
            return cls.rational(Fraction(text))
        m = _LITERAL.match(str(text))
        if m is None:
            raise SpecificationError(f"cannot parse coupling literal {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        try:
            if m.group("rad") is not None:
                rad = _parse_fraction(m.group("rad"))
                if rad < 0:
                    raise SpecificationError(f"negative radicand in {text!r}")
                return cls.sqrt(rad, sign)
            return cls.rational(sign * _parse_fraction(m.group("num")))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecificationError(f"cannot parse coupling literal {text!r}") from exc

    @classmethod
    def rational(cls, value: Fraction | int) -> Coupling:
        value = Fraction(value)
        return cls(abs(value), False, -1 if value < 0 else 1)

    @classmethod
    def sqrt(cls, radicand: Fraction | int, sign: int = 1) -> Coupling:
        radicand = Fraction(radicand)
        num, den = radicand.numerator, radicand.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            return cls(Fraction(rn, rd), False, sign)
        return cls(radicand, True, sign)

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def exact(self) -> Fraction | None:
        """The rational value, or ``None`` for an irrational square root."""
        return None if self.is_sqrt else self.sign * self.value

    def to_mpf(self, precision_bits: int) -> mpmath.mpf:
        with mpmath.workprec(precision_bits + 16):
            v = mpmath.mpf(self.value.numerator) / self.value.denominator
            if self.is_sqrt:
                v = mpmath.sqrt(v)
            return self.sign * v

    def __float__(self) -> float:
        v = float(self.value)
        return self.sign * (v**0.5 if self.is_sqrt else v)

    def __str__(self) -> str:
        s = "-" if self.sign < 0 else ""
        return f"{s}sqrt({self.value})" if self.is_sqrt else f"{s}{self.value}"


ONE = Coupling.rational(1)


class Family(enum.Enum):
    XX = "xx"
    STAGGERED_HEISENBERG = "staggered"
    DECORATED_SSH = "ssh"

    @classmethod
    def parse(cls, text: str) -> Family:
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "xx": cls.XX,
            "staggered": cls.STAGGERED_HEISENBERG,
            "staggered_heisenberg": cls.STAGGERED_HEISENBERG,
            "heisenberg": cls.STAGGERED_HEISENBERG,
            "ssh": cls.DECORATED_SSH,
            "decorated_ssh": cls.DECORATED_SSH,
        }
        if key not in aliases:
            raise SpecificationError(f"unsupported chain family {text!r}")
        return aliases[key]


def _couplings(values: Coupling | str | int | Fraction | Sequence, n: int, name: str) -> tuple[Coupling, ...]:
    if isinstance(values, (list, tuple)):
        out = tuple(Coupling.parse(v) for v in values)
        if len(out) == 1:
            out = out * n
    else:
        out = (Coupling.parse(values),) * n
    if len(out) != n:
        raise SpecificationError(f"{name}: expected {n} couplings, got {len(out)}")
    return out


@dataclass(frozen=True)
class ChainSpec:
    """Identity of one transfer experiment: chain, couplings and end sites.

    ``couplings`` maps a coupling name to its per-bond (or per-cell) values:
    ``J`` for XX and staggered chains (one per bond, staggered chains expand
    ``J1``/``J2`` on construction) and ``v``, ``w``, ``g`` for SSH chains.
    """

    family: Family
    n_spins: int
    couplings: tuple[tuple[str, tuple[Coupling, ...]], ...]
    source: int
    target: int
    label: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.n_spins
        if not isinstance(n, int) or n < 2:
            raise SpecificationError(f"n_spins must be an integer >= 2, got {n!r}")
        if self.family is Family.DECORATED_SSH and (n < 5 or (n - 2) % 3 != 0):
            raise SpecificationError(f"decorated SSH chains need N = 3*n_c + 2, n_c >= 1; got N={n}")
        for site in (self.source, self.target):
            if not 1 <= site <= n:
                raise SpecificationError(f"site {site} outside 1..{n}")
        if self.source == self.target:
            raise SpecificationError("source and target must differ")
        for name, values in self.couplings:
            if name != "g" and any(c.is_zero for c in values):
                raise SpecificationError(f"coupling {name} must be nonzero")

    @classmethod
    def xx(cls, n_spins: int, j="1", source: int = 1, target: int | None = None) -> ChainSpec:
        """Homogeneous (scalar ``j``) or per-bond (sequence ``j``) XX chain."""
        bonds = _couplings(j, n_spins - 1, "J")
        return cls(Family.XX, n_spins, (("J", bonds),), source, n_spins if target is None else target)

    @classmethod
    def staggered(cls, n_spins: int, j1="1", j2="1", source: int = 1, target: int | None = None) -> ChainSpec:
        # odd bonds carry J1, even bonds J2 (bonds numbered from 1)
        c1, c2 = Coupling.parse(j1), Coupling.parse(j2)
        bonds = tuple(c1 if b % 2 == 1 else c2 for b in range(1, n_spins))
        return cls(
            Family.STAGGERED_HEISENBERG,
            n_spins,
            (("J", bonds),),
            source,
            n_spins if target is None else target,
        )

    @classmethod
    def ssh(cls, n_cells: int, v="1", w="1", g="1", source: int = 1, target: int | None = None) -> ChainSpec:
        """Decorated SSH chain with ``n_cells`` full cells plus the closing pair.

        The default end sites are the ``A1`` qubits of the first and last cell.
        """
        if not isinstance(n_cells, int) or n_cells < 1:
            raise SpecificationError(f"n_cells must be a positive integer, got {n_cells!r}")
        n = 3 * n_cells + 2
        couplings = (
            ("v", _couplings(v, n_cells, "v")),
            ("w", _couplings(w, n_cells, "w")),
            ("g", _couplings(g, n_cells + 1, "g")),
        )
        return cls(Family.DECORATED_SSH, n, couplings, source, n - 1 if target is None else target)

    def coupling(self, name: str) -> tuple[Coupling, ...]:
        for key, values in self.couplings:
            if key == name:
                return values
        raise KeyError(name)

    @property
    def n_cells(self) -> int:
        return (self.n_spins - 2) // 3

    def with_sites(self, source: int, target: int) -> ChainSpec:
        return ChainSpec(self.family, self.n_spins, self.couplings, source, target, self.label)

    def edges(self) -> list[tuple[int, int, Coupling]]:
        """Bonds as 0-based ``(i, j, coupling)`` with ``i < j``."""
        if self.family in (Family.XX, Family.STAGGERED_HEISENBERG):
            bonds = self.coupling("J")
            if len(bonds) != self.n_spins - 1:
                raise SpecificationError("J: coupling list length does not match N - 1")
            return [(i, i + 1, c) for i, c in enumerate(bonds)]
        if self.family is Family.DECORATED_SSH:
            nc = self.n_cells
            v, w, g = self.coupling("v"), self.coupling("w"), self.coupling("g")
            if len(v) != nc or len(w) != nc or len(g) != nc + 1:
                raise SpecificationError("SSH coupling list lengths do not match n_cells")
            out = []
            for c in range(nc + 1):
                a1, a2 = 3 * c, 3 * c + 1
                out.append((a1, a2, g[c]))
                if c < nc:
                    b = 3 * c + 2
                    out.append((a1, b, v[c]))
                    out.append((b, a1 + 3, w[c]))
            return out
        raise SpecificationError(f"unsupported family {self.family}")

    def describe(self) -> str:
        parts = [f"{name}={','.join(map(str, vals)) if len(set(vals)) > 1 else vals[0]}" for name, vals in self.couplings]
        return f"{self.family.value} N={self.n_spins} {' '.join(parts)} {self.source}->{self.target}"


# An entry is an integer combination of couplings: sum(coef * coupling).
Entry = tuple[tuple[int, Coupling], ...]


@dataclass(frozen=True)
class OneExcHamiltonian:
    """Real symmetric one-excitation block, kept as exact coupling combinations.

    ``entries`` lists the upper triangle (diagonal included) as ``(i, j, entry)``;
    the lower triangle mirrors it, so the matrix is symmetric by construction.
    """

    dim: int
    entries: tuple[tuple[int, int, Entry], ...]

    def _value(self, entry: Entry, precision_bits: int):
        with mpmath.workprec(precision_bits + 16):
            total = mpmath.mpf(0)
            for coef, c in entry:
                total += coef * c.to_mpf(precision_bits)
        return total

    def matrix(self, precision_bits: int) -> mpmath.matrix:
        with mpmath.workprec(precision_bits):
            h = mpmath.zeros(self.dim, self.dim)
        for i, j, entry in self.entries:
            val = self._value(entry, precision_bits)
            h[i, j] = val
            h[j, i] = val
        return h

    def array(self) -> np.ndarray:
        h = np.zeros((self.dim, self.dim))
        for i, j, entry in self.entries:
            val = sum(coef * float(c) for coef, c in entry)
            h[i, j] = val
            h[j, i] = val
        return h

    def support(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, e in self.entries if i != j and any(not c.is_zero for _, c in e)}


def _merge(entry: Iterable[tuple[int, Coupling]]) -> Entry:
    acc: dict[Coupling, int] = {}
    for coef, c in entry:
        key = Coupling(c.value, c.is_sqrt, 1)
        acc[key] = acc.get(key, 0) + coef * c.sign
    return tuple(sorted((coef, c) for c, coef in acc.items() if coef != 0 and not c.is_zero))


def build_one_excitation(spec: ChainSpec) -> OneExcHamiltonian:
    """One-excitation block of the chain Hamiltonian.

    XX bonds carry ``(J/2)(XX + YY)``, which puts ``J`` on the off-diagonal, so a
    uniform chain has eigenvalues ``2 cos(k pi / (N + 1))``. Staggered chains use
    ``J (XX + YY + ZZ)``: off-diagonals ``2 J`` and the site-dependent ``ZZ``
    energies on the diagonal. SSH bonds are ``c (s+ s- + h.c.)``.
    """
    n = spec.n_spins
    edges = spec.edges()
    upper: dict[tuple[int, int], list[tuple[int, Coupling]]] = {}
    if spec.family is Family.XX or spec.family is Family.DECORATED_SSH:
        for i, j, c in edges:
            upper.setdefault((i, j), []).append((1, c))
    elif spec.family is Family.STAGGERED_HEISENBERG:
        for i, j, c in edges:
            upper.setdefault((i, j), []).append((2, c))
        for k in range(n):
            diag = []
            for i, j, c in edges:
                diag.append((-1 if k in (i, j) else 1, c))
            upper[(k, k)] = diag
    else:
        raise SpecificationError(f"unsupported family {spec.family}")
    entries = []
    for (i, j), terms in sorted(upper.items()):
        merged = _merge(terms)
        if merged:
            entries.append((i, j, merged))
    return OneExcHamiltonian(n, tuple(entries))


# -- full Hilbert space oracle -------------------------------------------------

MAX_BRUTE_FORCE_SPINS = 14

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _apply_pair(psi: np.ndarray, op: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [i])), 0, i)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [j])), 0, j)
    return t.reshape(-1)


def pauli_terms(spec: ChainSpec) -> list[tuple[float, str, int, int]]:
    """Spin Hamiltonian as ``(coefficient, pauli, i, j)`` two-site terms."""
    terms = []
    for i, j, c in spec.edges():
        val = float(c)
        if spec.family is Family.STAGGERED_HEISENBERG:
            terms += [(val, p, i, j) for p in "xyz"]
        else:
            # c (s+_i s-_j + h.c.) = (c/2)(X_i X_j + Y_i Y_j)
            terms += [(val / 2, p, i, j) for p in "xy"]
    return terms


def apply_full_hamiltonian(spec: ChainSpec, psi: np.ndarray) -> np.ndarray:
    n = spec.n_spins
    out = np.zeros_like(psi, dtype=complex)
    for coef, p, i, j in pauli_terms(spec):
        out += coef * _apply_pair(psi, _PAULI[p], i, j, n)
    return out


def excitation_index(site: int, n: int) -> int:
    """Computational-basis index of one excitation on 0-based ``site``; site 0 is the leading qubit."""
    return 1 << (n - 1 - site)


def brute_force_block(spec: ChainSpec, return_leakage: bool = False):
    """One-excitation block projected out of the full ``2**N`` spin Hamiltonian.

    Validation oracle only. With ``return_leakage`` the largest amplitude that
    ``H`` sends outside the one-excitation subspace is returned as well.
    """
    n = spec.n_spins
    if n > MAX_BRUTE_FORCE_SPINS:
        raise SpecificationError(f"brute force refused for N={n} > {MAX_BRUTE_FORCE_SPINS}")
    dim = 1 << n
    idx = [excitation_index(k, n) for k in range(n)]
    block = np.zeros((n, n))
    leakage = 0.0
    for k in range(n):
        psi = np.zeros(dim, dtype=complex)
        psi[idx[k]] = 1.0
        hpsi = apply_full_hamiltonian(spec, psi)
        col = hpsi[idx]
        if np.max(np.abs(col.imag), initial=0.0) > 1e-14:
            raise AssertionError("one-excitation block is not real")
        block[:, k] = col.real
        rest = hpsi.copy()
        rest[idx] = 0
        leakage = max(leakage, float(np.max(np.abs(rest))))
    return (block, leakage) if return_leakage else block
