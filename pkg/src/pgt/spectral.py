"""High-precision eigendecomposition and trigonometric transfer amplitudes.

The transfer amplitude between two sites is

    A(t) = <source| exp(-i h t) |target> = sum_k w_k exp(-i lambda_k t),

with ``w_k = v_k(source) v_k(target)``. When the spectrum is symmetric under
``lambda -> -lambda`` the pairs collapse to ``a0 + sum a_k cos(x_k t)`` or
``sum a_k sin(x_k t)`` (up to a global phase); otherwise the form keeps the
complex exponentials and is flagged ``general_form``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from pgt.chain_models import ChainSpec, OneExcHamiltonian

COS = Fraction(0)
SIN = Fraction(1, 2)
MAX_ESCALATIONS = 4


class ConvergenceError(ArithmeticError):
    """Jacobi sweeps did not converge; retry at ``requested_bits``."""

    def __init__(self, message: str, requested_bits: int):
        super().__init__(message)
        self.requested_bits = requested_bits


class PrecisionError(ArithmeticError):
    """The stored precision cannot resolve the requested evaluation."""

    def __init__(self, message: str, requested_bits: int):
        super().__init__(message)
        self.requested_bits = requested_bits


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: tuple  # ascending mpf values
    eigenvectors: tuple  # eigenvectors[k][i] = component i of eigenvector k
    precision_bits: int

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def residual(self, h: mpmath.matrix) -> mpmath.mpf:
        """Largest ``|(h v_k - lambda_k v_k)_i|`` over all pairs."""
        n = self.dim
        worst = mpmath.mpf(0)
        with mpmath.workprec(self.precision_bits):
            for lam, v in zip(self.eigenvalues, self.eigenvectors):
                for i in range(n):
                    r = mpmath.fsum(h[i, j] * v[j] for j in range(n)) - lam * v[i]
                    worst = max(worst, abs(r))
        return worst

    def orthonormality_error(self) -> mpmath.mpf:
        n = self.dim
        worst = mpmath.mpf(0)
        with mpmath.workprec(self.precision_bits):
            for k in range(n):
                for m in range(k, n):
                    dot = mpmath.fsum(a * b for a, b in zip(self.eigenvectors[k], self.eigenvectors[m]))
                    worst = max(worst, abs(dot - (1 if k == m else 0)))
        return worst


def _orthonormalize(cols: list[list], prec: int) -> list[list]:
    out: list[list] = []
    with mpmath.workprec(prec):
        for c in cols:
            v = [mpmath.mpf(x) for x in c]
            for _ in range(2):
                for u in out:
                    d = mpmath.fsum(a * b for a, b in zip(u, v))
                    v = [a - d * b for a, b in zip(v, u)]
            nrm = mpmath.sqrt(mpmath.fsum(a * a for a in v))
            out.append([a / nrm for a in v])
    return out


def _jacobi(a: list[list], v: list[list], prec: int, max_sweeps: int) -> bool:
    """In-place cyclic Jacobi on symmetric ``a``; rotations accumulate into ``v`` (rows are basis vectors)."""
    n = len(a)
    with mpmath.workprec(prec):
        scale = mpmath.sqrt(mpmath.fsum(a[i][j] ** 2 for i in range(n) for j in range(n)))
        if scale == 0:
            return True
        tol = scale * mpmath.ldexp(1, -prec + 8)
        for _ in range(max_sweeps):
            off = mpmath.sqrt(mpmath.fsum(a[i][j] ** 2 for i in range(n) for j in range(i + 1, n)))
            if off <= tol:
                return True
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p][q]
                    if abs(apq) <= tol * mpmath.ldexp(1, -8):
                        a[p][q] = a[q][p] = mpmath.mpf(0)
                        continue
                    theta = (a[q][q] - a[p][p]) / (2 * apq)
                    t = 1 / (abs(theta) + mpmath.sqrt(theta * theta + 1))
                    if theta < 0:
                        t = -t
                    c = 1 / mpmath.sqrt(t * t + 1)
                    s = t * c
                    a[p][p] -= t * apq
                    a[q][q] += t * apq
                    a[p][q] = a[q][p] = mpmath.mpf(0)
                    for r in range(n):
                        if r != p and r != q:
                            g, h = a[r][p], a[r][q]
                            a[r][p] = a[p][r] = c * g - s * h
                            a[r][q] = a[q][r] = s * g + c * h
                    vp, vq = v[p], v[q]
                    v[p] = [c * x - s * y for x, y in zip(vp, vq)]
                    v[q] = [s * x + c * y for x, y in zip(vp, vq)]
        off = mpmath.sqrt(mpmath.fsum(a[i][j] ** 2 for i in range(n) for j in range(i + 1, n)))
        return off <= tol


def decompose(
    h: OneExcHamiltonian | mpmath.matrix,
    precision_bits: int = 256,
    seed: bool = True,
    max_sweeps: int = 60,
) -> SpectralData:
    """Eigenpairs of a real symmetric matrix by Jacobi rotations at ``precision_bits``.

    With ``seed`` the rotations start from an orthonormalized double-precision
    eigenbasis, so only a few quadratically convergent sweeps remain.
    Raises :class:`ConvergenceError` if the sweep budget runs out.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    prec = precision_bits + 32
    m = h.matrix(prec) if isinstance(h, OneExcHamiltonian) else h
    n = m.rows
    with mpmath.workprec(prec):
        a = [[mpmath.mpf(m[i, j]) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i):
                if a[i][j] != a[j][i]:
                    raise ValueError("matrix is not symmetric")
        if seed:
            approx = np.array([[float(x) for x in row] for row in a])
            _, vecs = np.linalg.eigh(approx)
            basis = _orthonormalize([list(vecs[:, k]) for k in range(n)], prec)
            # rotated = B a B^T with rows of B the seed vectors
            av = [[mpmath.fsum(a[i][k] * basis[j][k] for k in range(n)) for j in range(n)] for i in range(n)]
            rotated = [[mpmath.fsum(basis[i][k] * av[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
            for i in range(n):
                for j in range(i):
                    rotated[i][j] = rotated[j][i]
            a = rotated
        else:
            basis = [[mpmath.mpf(int(i == j)) for j in range(n)] for i in range(n)]
        if not _jacobi(a, basis, prec, max_sweeps):
            raise ConvergenceError("Jacobi sweeps did not converge", 2 * precision_bits)
        order = sorted(range(n), key=lambda k: a[k][k])
        values, vectors = [], []
        for k in order:
            vec = basis[k]
            pivot = next(x for x in vec if abs(x) > mpmath.ldexp(1, -prec // 2))
            if pivot < 0:
                vec = [-x for x in vec]
            values.append(+a[k][k])
            vectors.append(tuple(vec))
    return SpectralData(tuple(values), tuple(vectors), precision_bits)


def decompose_escalating(h: OneExcHamiltonian, precision_bits: int = 256, **kwargs) -> SpectralData:
    """:func:`decompose`, doubling the precision on non-convergence (at most four times)."""
    bits = precision_bits
    for _ in range(MAX_ESCALATIONS + 1):
        try:
            return decompose(h, bits, **kwargs)
        except ConvergenceError as exc:
            bits = exc.requested_bits
    raise ConvergenceError(f"no convergence after {MAX_ESCALATIONS} escalations", bits)


# -- transfer forms -------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    weight: mpmath.mpf
    frequency: mpmath.mpf
    shift: Fraction  # 0 -> cos, 1/2 -> sin

    @property
    def trig(self) -> str:
        return "cos" if self.shift == COS else "sin"


@dataclass(frozen=True)
class TransferForm:
    """Transfer amplitude as ``a0 + sum a_k trig(x_k t)`` (or raw exponentials).

    ``eigenterms`` always holds the grouped ``(w, lambda)`` pairs with nonzero
    weight; for a ``general_form`` they are the only representation and
    ``constant``/``terms`` are left empty.
    """

    constant: mpmath.mpf
    terms: tuple[Term, ...]
    eigenterms: tuple[tuple[mpmath.mpf, mpmath.mpf], ...]
    precision_bits: int
    general_form: bool = False
    provenance: str = ""
    source: int = 0
    target: int = 0
    notes: tuple[str, ...] = field(default=())

    @property
    def kind(self) -> str:
        if self.general_form:
            return "general"
        shifts = {t.shift for t in self.terms}
        return "sin" if shifts == {SIN} else "cos"

    def normalization(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision_bits):
            if self.general_form:
                return mpmath.fsum(abs(w) for w, _ in self.eigenterms)
            return abs(self.constant) + mpmath.fsum(abs(t.weight) for t in self.terms)

    def frequencies(self) -> list[mpmath.mpf]:
        """Positive frequencies whose rational independence governs the dynamics.

        Paired forms use the term frequencies; general forms use the distinct
        eigenvalue gaps measured from the top eigenvalue.
        """
        if not self.general_form:
            return [t.frequency for t in self.terms]
        ref = self.eigenterms[-1][1]
        with mpmath.workprec(self.precision_bits):
            gaps = sorted(ref - lam for _, lam in self.eigenterms[:-1])
        return _dedup(gaps, self.precision_bits)

    def to_strings(self, digits: int | None = None) -> tuple[str, list[tuple[str, str, str]]]:
        """Decimal rendering ``(a0, [(a, x, s), ...])`` at full working precision."""
        digits = digits or int(self.precision_bits * 0.30103)
        if self.general_form:
            return "", [(mpmath.nstr(w, digits), mpmath.nstr(lam, digits), "exp") for w, lam in self.eigenterms]
        return mpmath.nstr(self.constant, digits), [
            (mpmath.nstr(t.weight, digits), mpmath.nstr(t.frequency, digits), str(t.shift)) for t in self.terms
        ]


def _tol(prec: int) -> mpmath.mpf:
    return mpmath.ldexp(1, -(prec // 2))


def _dedup(values: Sequence, prec: int) -> list:
    out: list = []
    tol = _tol(prec)
    for x in sorted(values):
        if x <= tol:
            continue
        if out and abs(x - out[-1]) <= tol * max(1, abs(x)):
            continue
        out.append(x)
    return out


def _group(sd: SpectralData, i: int, j: int) -> list[list]:
    """Sum weights over (numerically) degenerate eigenvalues; drop zero weights."""
    tol = _tol(sd.precision_bits)
    groups: list[list] = []
    with mpmath.workprec(sd.precision_bits):
        for lam, vec in zip(sd.eigenvalues, sd.eigenvectors):
            w = vec[i] * vec[j]
            if groups and abs(lam - groups[-1][1]) <= tol * max(1, abs(lam)):
                groups[-1][0] += w
                groups[-1][2] += 1
            else:
                groups.append([w, lam, 1])
    return [[w, lam] for w, lam, _ in groups if abs(w) > tol]


def transfer_form(spec: ChainSpec, sd: SpectralData) -> TransferForm:
    """Reduce ``<source|exp(-iht)|target>`` to its trigonometric form."""
    i, j = spec.source - 1, spec.target - 1
    prec = sd.precision_bits
    tol = _tol(prec)
    groups = _group(sd, i, j)
    eigenterms = tuple((w, lam) for w, lam in groups)
    provenance = f"{spec.describe()}"
    common = dict(eigenterms=eigenterms, precision_bits=prec, provenance=provenance, source=spec.source, target=spec.target)

    constant = mpmath.mpf(0)
    positive: dict[int, tuple] = {}
    negative: list[tuple] = []
    with mpmath.workprec(prec):
        for w, lam in groups:
            if abs(lam) <= tol:
                constant += w
            elif lam > 0:
                positive[len(positive)] = (w, lam)
            else:
                negative.append((w, lam))
        terms: list[Term] = []
        paired = len(positive) == len(negative)
        used = set()
        for w_neg, lam_neg in negative:
            match = None
            for key, (w_pos, lam_pos) in positive.items():
                if key not in used and abs(lam_pos + lam_neg) <= tol * max(1, abs(lam_pos)):
                    match = key
                    break
            if match is None:
                paired = False
                break
            used.add(match)
            w_pos, lam_pos = positive[match]
            if abs(w_pos - w_neg) <= tol:
                terms.append(Term(w_pos + w_neg, lam_pos, COS))
            elif abs(w_pos + w_neg) <= tol:
                terms.append(Term(2 * w_pos, lam_pos, SIN))
            else:
                paired = False
                break
    if paired and terms:
        kinds = {t.shift for t in terms}
        if len(kinds) > 1 or (SIN in kinds and abs(constant) > tol):
            paired = False
    if not paired:
        return TransferForm(mpmath.mpf(0), (), general_form=True, notes=("spectrum not +-symmetric",), **common)
    terms.sort(key=lambda t: t.frequency)
    if abs(constant) <= tol:
        constant = mpmath.mpf(0)
    return TransferForm(constant, tuple(terms), **common)


# -- evaluation -----------------------------------------------------------------


@dataclass(frozen=True)
class GridTime:
    """The exact time ``q * pi / grid``."""

    q: int
    grid: int = 1

    def value(self, precision_bits: int) -> mpmath.mpf:
        with mpmath.workprec(precision_bits):
            return mpmath.pi * self.q / self.grid


def required_bits(form: TransferForm, t_magnitude: float) -> int:
    """Mantissa needed to reduce ``x * t`` modulo ``2 pi`` with 64 bits to spare."""
    xmax = max([abs(lam) for _, lam in form.eigenterms] + [1])
    return 64 + max(0, int(mpmath.ceil(mpmath.log(max(abs(t_magnitude), 1), 2)))) + max(
        0, int(mpmath.ceil(mpmath.log(xmax + 1, 2)))
    )


def evaluate_amplitude(form: TransferForm, t, precision_bits: int = 128):
    """Amplitude up to a global phase: real for paired forms, complex for general ones."""
    grid = t if isinstance(t, GridTime) else None
    magnitude = float(abs(grid.q) * 4 / grid.grid) if grid else float(abs(t))
    need = required_bits(form, magnitude)
    work = max(precision_bits, need)
    if need > form.precision_bits:
        raise PrecisionError(
            f"time {magnitude:.3g} needs {need} bits, form carries {form.precision_bits}", need
        )
    with mpmath.workprec(work):
        if grid is not None:
            q = mpmath.mpf(grid.q) / grid.grid
            cos = lambda x: mpmath.cospi(x * q)  # noqa: E731
            sin = lambda x: mpmath.sinpi(x * q)  # noqa: E731
        else:
            tt = mpmath.mpf(t)
            cos = lambda x: mpmath.cos(x * tt)  # noqa: E731
            sin = lambda x: mpmath.sin(x * tt)  # noqa: E731
        if form.general_form:
            re = mpmath.fsum(w * cos(lam) for w, lam in form.eigenterms)
            im = -mpmath.fsum(w * sin(lam) for w, lam in form.eigenterms)
            return mpmath.mpc(re, im)
        return form.constant + mpmath.fsum(
            term.weight * (cos(term.frequency) if term.shift == COS else sin(term.frequency)) for term in form.terms
        )


def evaluate_probability(form: TransferForm, t, precision_bits: int = 128) -> mpmath.mpf:
    """Transfer probability ``|A(t)|**2`` clipped to ``[0, 1]``.

    ``t`` is a real number or a :class:`GridTime`; grid times are reduced
    exactly. The working precision grows to cover argument reduction; a
    :class:`PrecisionError` asks the caller for a more precise spectrum.
    """
    amp = evaluate_amplitude(form, t, precision_bits)
    with mpmath.workprec(precision_bits):
        p = abs(amp) ** 2
        return min(mpmath.mpf(1), max(mpmath.mpf(0), p))
