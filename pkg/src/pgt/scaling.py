"""Power-law fit of arrival times and the transfer verdict."""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import mpmath

from pgt.diophantine import ScalingDataset
from pgt.number_theory import FrequencyAnalysis
from pgt.spectral import TransferForm


class FitVerdict(enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    INSUFFICIENT_DATA = "insufficient_data"


@dataclass(frozen=True)
class FitResult:
    """``t = prefactor * eps**(-alpha)`` fitted on ``(ln 1/eps, ln t)``."""

    alpha: float
    prefactor: float
    r_squared: float
    n_points: int
    reference: float | None  # K_I / 2
    verdict: FitVerdict

    def summary(self) -> str:
        ref = "n/a" if self.reference is None else f"{self.reference:g}"
        return (
            f"alpha = {self.alpha:.4f}  (K_I/2 = {ref})  r^2 = {self.r_squared:.4f}  "
            f"n = {self.n_points}  verdict = {self.verdict.value}"
        )


def _log(x) -> float:
    return float(mpmath.log(mpmath.mpf(x)))


def fit_power_law(
    data: ScalingDataset | Sequence[tuple],
    k_i: int | None = None,
    eps_cut: float = 0.1,
    tolerance: float = 0.15,
    min_r2: float = 0.98,
) -> FitResult:
    """Least-squares slope of ``ln t`` against ``ln(1/eps)`` over points with ``0 < eps <= eps_cut``.

    ``data`` is a dataset or a sequence of ``(eps, t)`` pairs. With fewer than
    three usable points, or without ``k_i`` to compare against, the verdict is
    ``insufficient_data``; ``alpha`` is ``nan`` below two points.
    """
    if isinstance(data, ScalingDataset):
        if k_i is None and data.analysis is not None:
            k_i = data.analysis.k_i
        pairs = [(p.epsilon, p.t) for p in data.points]
    else:
        pairs = list(data)
    used = [(e, t) for e, t in pairs if 0 < e <= eps_cut]
    reference = None if k_i is None else k_i / 2
    n = len(used)
    if n < 2:
        return FitResult(math.nan, math.nan, math.nan, n, reference, FitVerdict.INSUFFICIENT_DATA)
    x = [-_log(e) for e, _ in used]
    y = [_log(t) for _, t in used]
    if len(set(x)) < 2:
        return FitResult(math.nan, math.nan, math.nan, n, reference, FitVerdict.INSUFFICIENT_DATA)
    slope, intercept = statistics.linear_regression(x, y)
    mean = statistics.fmean(y)
    ss_tot = math.fsum((v - mean) ** 2 for v in y)
    ss_res = math.fsum((v - (slope * u + intercept)) ** 2 for u, v in zip(x, y))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if n < 3 or reference is None:
        verdict = FitVerdict.INSUFFICIENT_DATA
    elif abs(slope - reference) <= tolerance and r2 >= min_r2:
        verdict = FitVerdict.CONSISTENT
    else:
        verdict = FitVerdict.INCONSISTENT
    return FitResult(slope, math.exp(intercept), r2, n, reference, verdict)


class Outcome(enum.Enum):
    PGT = "PGT"
    NO_PGT = "NoPGT"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Thresholds:
    eps_pgt: float = 1e-3
    sup_bound: float = 0.95
    norm_tol: float = 1e-9


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    basis: str  # "certified", "empirical" or "" for PGT / Inconclusive
    detail: str

    def __str__(self) -> str:
        tag = f" ({self.basis})" if self.basis else ""
        return f"{self.outcome.value}{tag}: {self.detail}"


def pgt_verdict(
    form: TransferForm,
    analysis: FrequencyAnalysis,
    dataset: ScalingDataset,
    thresholds: Thresholds = Thresholds(),
) -> Verdict:
    """Decide PGT / NoPGT / Inconclusive from the form and its search record.

    A NoPGT is ``certified`` when the aligned sign patterns contradict a
    verified relation or when ``|a0| + sum |a_k| < 1`` caps the probability;
    it is ``empirical`` when the whole budget never lifted ``P`` above
    ``sup_bound``.
    """
    norm = float(form.normalization())
    if dataset.obstruction:
        rel = "; ".join(analysis.describe_relation(r) for r in analysis.relations) or "none"
        return Verdict(Outcome.NO_PGT, "certified", f"sign alignment impossible (relations: {rel})")
    if norm < 1 - thresholds.norm_tol:
        return Verdict(Outcome.NO_PGT, "certified", f"normalization {norm:.12g} < 1 caps P at {norm * norm:.6g}")
    best = max((float(p.probability) for p in dataset.points), default=0.0)
    if abs(norm - 1) <= thresholds.norm_tol and best > 1 - thresholds.eps_pgt:
        q = next(p.q for p in dataset.points if float(p.probability) > 1 - thresholds.eps_pgt)
        return Verdict(Outcome.PGT, "", f"P = {best:.12g} reached; first P > 1 - {thresholds.eps_pgt:g} at q = {q}")
    sup = max(best, dataset.sup_probability)
    if sup < thresholds.sup_bound and dataset.budget_exhausted:
        return Verdict(
            Outcome.NO_PGT, "empirical", f"sup P = {sup:.6g} < {thresholds.sup_bound:g} for q <= {dataset.q_limit}"
        )
    return Verdict(Outcome.INCONCLUSIVE, "", f"best P = {best:.6g} within q <= {dataset.q_limit}")
