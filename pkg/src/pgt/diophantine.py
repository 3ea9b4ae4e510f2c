"""Simultaneous rational approximation and the arrival-time search.

For every term of a transfer form we want ``trig(x_j t) = +-1`` with signs that
line all terms up. On the time grid ``t = q pi / M`` that means
``q x_j / M = n_j + s_j + small`` with prescribed parities of ``n_j``. Writing
every frequency as a rational affine combination of the ``K_I`` independent
irrationals ``xi_i`` turns those conditions into (a) congruences on ``q`` and on
the half-integer approximants ``P_i ~ 2 q xi_i / M`` and (b) an inhomogeneous
simultaneous approximation problem on each admissible residue class, solved by
LLL on an embedded lattice over a geometric ladder of scales.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from pgt.chain_models import ChainSpec
from pgt.lattice import lll_reduce
from pgt.number_theory import FrequencyAnalysis, continued_fraction, convergents_of, to_fraction
from pgt.spectral import COS, GridTime, TransferForm, evaluate_probability

MAX_GRID = 1024
MAX_CLASSES = 1 << 16


# -- one irrational -------------------------------------------------------------


class ConvergentList(list):
    """List of ``(p, q)`` convergents; ``truncated`` marks precision exhaustion."""

    truncated: bool = False


def convergents(x, count: int) -> ConvergentList:
    """First ``count`` continued-fraction convergents of ``x`` after ``floor(x)/1``.

    Only convergents with ``q**2`` below the precision of ``x`` are trusted.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    exact = to_fraction(x)
    prec = max(mpmath.mpf(x)._mpf_[3], 53)  # mantissa bits actually stored
    prec = max(prec, mpmath.mp.prec)
    q_max = 2 ** ((prec - 8) // 2)
    out = ConvergentList()
    it = convergents_of(continued_fraction(exact, max_terms=count + 2 + prec // 2))
    next(it)
    for p, q in it:
        if q > q_max:
            out.truncated = True
            break
        out.append((p, q))
        if len(out) == count:
            break
    else:
        out.truncated = len(out) < count
    return out


# -- lattice search -------------------------------------------------------------


def _fixed(x, bits: int) -> int:
    with mpmath.workprec(bits + 64):
        return int(mpmath.nint(mpmath.ldexp(mpmath.mpf(x), bits)))


def ladder_candidates(
    betas: Sequence,
    gammas: Sequence,
    m_max: int,
    radius: int = 1,
    ratio: int = 4,
) -> set[int]:
    """Integers ``m`` (``|m| <= m_max``) with ``m beta_i - gamma_i`` close to integers.

    For each scale ``Q = ratio**j`` the embedded lattice with rows
    ``(C beta, 1, 0)``, ``(-C e_i, 0, 0)``, ``(-C gamma, 0, Q)`` and
    ``C = Q**(1 + 1/K)`` is LLL-reduced; small combinations of the reduced rows
    whose last coordinate is ``+-Q`` yield the candidates.
    """
    k = len(betas)
    found: set[int] = set()
    q = ratio
    while True:
        c_bits = math.ceil(math.log2(q) * (1 + 1 / k)) + 2
        rows = [[_fixed(b, c_bits) for b in betas] + [1, 0]]
        for i in range(k):
            rows.append([-(1 << c_bits) if j == i else 0 for j in range(k)] + [0, 0])
        rows.append([-_fixed(g, c_bits) for g in gammas] + [0, q])
        reduced = lll_reduce(rows)
        span = range(-radius, radius + 1)
        for coeffs in itertools.product(span, repeat=len(reduced)):
            last = sum(c * r[-1] for c, r in zip(coeffs, reduced))
            if abs(last) != q:
                continue
            m = sum(c * r[k] for c, r in zip(coeffs, reduced))
            if last < 0:
                m = -m
            if abs(m) <= m_max:
                found.add(m)
        if q >= m_max:
            break
        q *= ratio
    return found


@dataclass(frozen=True)
class ApproxRecord:
    q: int
    numerators: tuple[int, ...]
    err: float
    dirichlet_ok: bool


def _record(q: int, freqs: Sequence, shifts: Sequence[Fraction], k: int) -> ApproxRecord:
    bits = 2 * q.bit_length() + 128
    with mpmath.workprec(bits):
        nums, errs = [], []
        for x, s in zip(freqs, shifts):
            target = q * mpmath.mpf(x) - mpmath.mpf(s.numerator) / s.denominator
            p = int(mpmath.nint(target))
            nums.append(p)
            errs.append(abs(target - p))
        err = max(errs)
        ok = bool(err < mpmath.mpf(q) ** (-mpmath.mpf(1) / k)) if k else True
    return ApproxRecord(q, tuple(nums), float(err), ok)


def simultaneous_approx(
    freqs: Sequence,
    shifts: Sequence[Fraction] | None = None,
    parities: Sequence[int | None] | None = None,
    q_parity: int | None = None,
    q_limit: int = 10**12,
    max_records: int = 1000,
) -> tuple[list[ApproxRecord], str]:
    """Records of simultaneous approximations ``q x_i ~ p_i + s_i`` with increasing ``q``.

    ``parities[i]`` fixes ``p_i mod 2`` (``None`` leaves it free) and
    ``q_parity`` fixes ``q mod 2``. Returned records have strictly decreasing
    ``err``. The second element is a diagnostic: ``""`` on success,
    ``"parity-infeasible"`` or ``"budget-exhausted"`` otherwise.
    """
    k = len(freqs)
    shifts = list(shifts or [Fraction(0)] * k)
    parities = list(parities or [None] * k)
    if q_limit < 2:
        raise ValueError("q_limit must be >= 2")
    constrained = q_parity is not None or any(p is not None for p in parities)
    modulus = 2 if constrained else 1
    q_opts = [q_parity] if q_parity is not None else list(range(modulus))
    p_opts = [[p] if p is not None else list(range(modulus)) for p in parities]
    candidates: set[int] = set()
    bits = 2 * q_limit.bit_length() + 128
    for rho0 in q_opts:
        for rho in itertools.product(*p_opts):
            with mpmath.workprec(bits):
                gammas = [
                    (r + mpmath.mpf(s.numerator) / s.denominator - rho0 * mpmath.mpf(x)) / modulus
                    for x, s, r in zip(freqs, shifts, rho)
                ]
            for m in ladder_candidates(freqs, gammas, q_limit // modulus + 1):
                q = abs(rho0 + modulus * m)
                if 1 <= q <= q_limit:
                    candidates.add(q)
    if k == 1:
        for p, q in convergents(freqs[0], 200):
            if q > q_limit:
                break
            candidates.add(q)
    records: list[ApproxRecord] = []
    for q in sorted(candidates):
        if q_parity is not None and q % 2 != q_parity:
            continue
        rec = _record(q, freqs, shifts, k)
        if any(p is not None and n % 2 != p for n, p in zip(rec.numerators, parities)):
            continue
        if records and rec.err >= records[-1].err:
            continue
        records.append(rec)
        if len(records) >= max_records:
            break
    if records:
        return records, ""
    return records, "parity-infeasible" if constrained else "budget-exhausted"


# -- alignment targets ---------------------------------------------------------


@dataclass(frozen=True)
class Target:
    index: int  # position in form.frequencies()
    shift: Fraction
    parity: int


def alignment_patterns(form: TransferForm) -> list[list[Target]]:
    """Sign patterns that make every term contribute ``+|a_j|`` (both global signs)."""
    if form.general_form:
        w_ref, lam_ref = form.eigenterms[-1]
        freqs = form.frequencies()
        pattern = []
        with mpmath.workprec(form.precision_bits):
            for w, lam in form.eigenterms[:-1]:
                gap = lam_ref - lam
                idx = min(range(len(freqs)), key=lambda i: abs(freqs[i] - gap))
                pattern.append(Target(idx, COS, int((w < 0) != (w_ref < 0))))
        return [pattern]
    patterns = []
    for sigma in (1, -1):
        if form.constant != 0 and sigma * form.constant < 0:
            continue
        patterns.append(
            [Target(j, t.shift, int(sigma * t.weight < 0)) for j, t in enumerate(form.terms)]
        )
    return patterns


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def grid_bound(analysis: FrequencyAnalysis) -> int:
    """Every rational alignment time has the form ``q pi / M`` with ``M`` dividing this."""
    den = _lcm(c.denominator for _, cs in analysis.expansions for c in cs)
    nums = [abs(c0.numerator) for c0, _ in analysis.expansions if c0 != 0]
    if not nums:
        return 1
    return _lcm(2 * den * n for n in nums)


@dataclass(frozen=True)
class ResidueClass:
    grid: int
    modulus: int  # q = rho0 + modulus * m
    rho0: int
    rho: tuple[int, ...]  # P_i mod 2 * modulus, with q xi_i / grid ~ P_i / 2
    pattern: int


def residue_classes(
    analysis: FrequencyAnalysis, pattern: Sequence[Target], grid: int, pattern_id: int = 0
) -> list[ResidueClass]:
    """All ``(q mod L, P mod 2L)`` classes compatible with ``pattern`` on grid ``M``."""
    k = analysis.k_i
    exps = analysis.expansions
    den = _lcm(
        [c.denominator for _, cs in exps for c in cs] + [(c0 / grid).denominator for c0, _ in exps]
    )
    modulus = 2 * den
    if modulus ** 1 * (2 * modulus) ** k > MAX_CLASSES:
        raise ValueError(f"too many residue classes ({modulus} x {2 * modulus}^{k})")
    checks = []
    for tgt in pattern:
        c0, cs = exps[tgt.index]
        checks.append((c0 / grid, cs, tgt.shift + tgt.parity))
    out = []
    for rho0 in range(modulus):
        pre = [(rho0 * c0 - target, cs) for c0, cs, target in checks]
        for rho in itertools.product(range(2 * modulus), repeat=k):
            ok = True
            for base, cs in pre:
                val = base + sum((c * r for c, r in zip(cs, rho)), Fraction(0)) / 2
                if val.denominator != 1 or val.numerator % 2:
                    ok = False
                    break
            if ok:
                out.append(ResidueClass(grid, modulus, rho0, rho, pattern_id))
    return out


def feasible_grid(analysis: FrequencyAnalysis, patterns: list[list[Target]]):
    """Smallest grid ``M`` admitting an aligned residue class, with its classes.

    Returns ``(None, [])`` when no divisor of :func:`grid_bound` works, which
    certifies that the aligned sign patterns are unreachable at any time.
    """
    bound = grid_bound(analysis)
    for grid in (d for d in range(1, min(bound, MAX_GRID) + 1) if bound % d == 0):
        classes = [c for i, p in enumerate(patterns) for c in residue_classes(analysis, p, grid, i)]
        if classes:
            return grid, classes
    return None, []


# -- evaluation -----------------------------------------------------------------


class FastEpsilon:
    """Double-precision ``1 - P(q pi / M)`` with exact argument reduction.

    Phases are taken relative to the heaviest eigen-term, so near alignment
    ``epsilon`` is assembled from small positive pieces and keeps its relative
    accuracy far below double-precision resolution of ``P``.
    """

    def __init__(self, form: TransferForm, q_limit: int):
        self.bits = 2 * q_limit.bit_length() + 96
        if self.bits + 64 > form.precision_bits:
            self.bits = form.precision_bits - 64
        ref = max(range(len(form.eigenterms)), key=lambda k: abs(form.eigenterms[k][0]))
        lam_ref = form.eigenterms[ref][1]
        with mpmath.workprec(form.precision_bits):
            self.diffs = [_fixed(lam - lam_ref, self.bits) for _, lam in form.eigenterms]
            norm = mpmath.fsum(abs(w) for w, _ in form.eigenterms)
            self.one_minus_norm2 = float(1 - norm * norm)
        self.weights = [float(w) for w, _ in form.eigenterms]
        self.norm = float(norm)

    def __call__(self, q: int, grid: int = 1) -> float:
        half = grid << self.bits
        mod = 2 * half
        signed = []
        d_pos = 0.0
        im = 0.0
        for w, d in zip(self.weights, self.diffs):
            u = (q * d) % mod
            n = (2 * u + half) // (2 * half)
            r = (u - n * half) / half
            c = -w if n % 2 else w
            signed.append(c)
            d_pos += c * 2.0 * math.sin(math.pi * r / 2) ** 2
            im += c * math.sin(math.pi * r)
        if all(c >= 0 for c in signed) or all(c <= 0 for c in signed):
            dd = abs(d_pos)
            return self.one_minus_norm2 + 2 * self.norm * dd - dd * dd - im * im
        s = sum(signed)
        return 1.0 - ((s - d_pos) ** 2 + im * im)


@dataclass(frozen=True)
class ScalingPoint:
    q: int
    t: mpmath.mpf
    probability: mpmath.mpf
    epsilon: mpmath.mpf


@dataclass(frozen=True)
class Budget:
    q_limit: int = 10**24
    max_records: int = 10_000
    precision_bits: int = 128
    radius: int = 1
    scan_limit: int = 10**4
    workers: int = 1
    refine: bool = False


@dataclass
class ScalingDataset:
    """Pareto frontier of ``(t, epsilon)`` plus what produced it."""

    points: list[ScalingPoint]
    spec: ChainSpec | None = None
    analysis: FrequencyAnalysis | None = None
    grid: int | None = 1
    q_limit: int = 0
    sup_probability: float = 0.0
    budget_exhausted: bool = True
    obstruction: bool = False
    perfect_transfer: bool = False
    n_candidates: int = 0
    n_classes: int = 0
    diagnostic: str = ""
    notes: list[str] = field(default_factory=list)

    def epsilons(self) -> list[float]:
        return [float(p.epsilon) for p in self.points]

    def times(self) -> list[float]:
        return [float(p.t) for p in self.points]


def pareto_frontier(points: Sequence[ScalingPoint]) -> list[ScalingPoint]:
    """Points with increasing ``t`` and strictly decreasing ``epsilon``."""
    out: list[ScalingPoint] = []
    for p in sorted(points, key=lambda p: (p.q, p.epsilon)):
        if not out or p.epsilon < out[-1].epsilon:
            out.append(p)
    return out


def point_at(form: TransferForm, q: int, grid: int, precision_bits: int) -> ScalingPoint:
    """Exact-grid evaluation; precision grows with ``q`` so that tiny ``epsilon`` stays resolved."""
    bits = precision_bits + 2 * q.bit_length()
    prob = evaluate_probability(form, GridTime(q, grid), bits)
    with mpmath.workprec(bits):
        return ScalingPoint(q, GridTime(q, grid).value(bits), prob, 1 - prob)


def _candidates_for_class(
    analysis: FrequencyAnalysis, cls: ResidueClass, q_limit: int, radius: int
) -> set[int]:
    basis = analysis.basis_values()
    bits = 2 * q_limit.bit_length() + 128
    with mpmath.workprec(bits):
        betas = [mpmath.mpf(x) / cls.grid for x in basis]
        gammas = [(mpmath.mpf(r) / 2 - cls.rho0 * b) / cls.modulus for r, b in zip(cls.rho, betas)]
    m_max = q_limit // cls.modulus + 1
    out = set()
    for m in ladder_candidates(betas, gammas, m_max, radius=radius):
        q = abs(cls.rho0 + cls.modulus * m)
        if 1 <= q <= q_limit:
            out.add(q)
    if len(basis) == 1:
        # convergents of the single irrational and their short combinations
        conv = convergents(betas[0], 400)
        dens = [1] + [q for _, q in conv]
        for a, b in zip(dens, dens[1:]):
            for i in range(-cls.modulus, cls.modulus + 1):
                for j in range(0, 2 * cls.modulus + 1):
                    q = abs(j * b + i * a)
                    if 1 <= q <= q_limit and (q - cls.rho0) % cls.modulus == 0:
                        out.add(q)
    return out


def _candidates_job(args) -> set[int]:
    return _candidates_for_class(*args)


def refine_point(form: TransferForm, point: ScalingPoint, grid: int, precision_bits: int) -> ScalingPoint:
    """Golden-section maximization of ``P`` within a quarter period of the fastest frequency."""
    bits = precision_bits + 2 * point.q.bit_length()
    with mpmath.workprec(bits):
        xmax = max(abs(lam) for _, lam in form.eigenterms) or mpmath.mpf(1)
        half = mpmath.pi / (4 * xmax * grid)
        lo, hi = point.t - half, point.t + half
        ratio = (mpmath.sqrt(5) - 1) / 2
        prob = lambda t: evaluate_probability(form, t, bits)  # noqa: E731
        a, b = hi - ratio * (hi - lo), lo + ratio * (hi - lo)
        pa, pb = prob(a), prob(b)
        for _ in range(80):
            if pa >= pb:
                hi, b, pb = b, a, pa
                a = hi - ratio * (hi - lo)
                pa = prob(a)
            else:
                lo, a, pa = a, b, pb
                b = lo + ratio * (hi - lo)
                pb = prob(b)
        t, p = (a, pa) if pa >= pb else (b, pb)
        if p <= point.probability:
            return point
        return ScalingPoint(point.q, t, p, 1 - p)


def alignment_search(
    form: TransferForm,
    analysis: FrequencyAnalysis,
    budget: Budget = Budget(),
    spec: ChainSpec | None = None,
) -> ScalingDataset:
    """Arrival-time frontier ``(t_eps, eps)`` for ``form`` within ``budget``.

    Every candidate is judged by its evaluated probability, so the residue
    bookkeeping only steers the search; it never decides a point.
    """
    q_limit = budget.q_limit
    patterns = alignment_patterns(form)
    base = ScalingDataset([], spec=spec, analysis=analysis, q_limit=q_limit)
    if not patterns or not form.eigenterms:
        base.obstruction = True
        base.grid = None
        base.diagnostic = "no_progress: no admissible sign pattern"
        return base
    grid, classes = feasible_grid(analysis, patterns)
    if grid is None:
        base.obstruction = True
        base.grid = None
        base.diagnostic = "no_progress: aligned sign patterns contradict a frequency relation"
        return base
    base.grid = grid
    base.n_classes = len(classes)
    if analysis.k_i == 0:
        q = min(c.rho0 if c.rho0 > 0 else c.modulus for c in classes)
        pt = point_at(form, q, grid, budget.precision_bits)
        base.points = [pt]
        base.sup_probability = float(pt.probability)
        base.perfect_transfer = pt.epsilon == 0 or float(pt.epsilon) < 1e-30
        base.n_candidates = 1
        base.diagnostic = "perfect state transfer" if base.perfect_transfer else "periodic dynamics"
        return base
    jobs = [(analysis, cls, q_limit, budget.radius) for cls in classes]
    candidates: set[int] = set()
    if budget.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=budget.workers) as pool:
            for found in pool.map(_candidates_job, jobs):
                candidates |= found
    else:
        for job in jobs:
            candidates |= _candidates_job(job)
    candidates.update(range(1, min(budget.scan_limit, q_limit) + 1))
    base.n_candidates = len(candidates)
    fast = FastEpsilon(form, q_limit)
    survivors = []
    best = math.inf
    for q in sorted(candidates):
        eps = fast(q, grid)
        if eps < best * (1 + 1e-6) + 1e-300:
            survivors.append(q)
            best = min(best, eps)
    points = [point_at(form, q, grid, budget.precision_bits) for q in survivors]
    if budget.refine:
        points = [refine_point(form, p, grid, budget.precision_bits) for p in points]
    frontier = pareto_frontier(points)[: budget.max_records]
    base.points = frontier
    base.sup_probability = float(max((p.probability for p in points), default=0))
    if not frontier:
        base.diagnostic = "no_progress: empty frontier"
    return base
