"""End-to-end runs: chain spec to spectrum, form, K_I, frontier, fit and verdict."""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath

from pgt.chain_models import ChainSpec, OneExcHamiltonian, build_one_excitation
from pgt.diophantine import Budget, ScalingDataset, alignment_search
from pgt.number_theory import DEFAULT_HEIGHT, FrequencyAnalysis, classify_frequencies, default_precision
from pgt.scaling import FitResult, Thresholds, Verdict, fit_power_law, pgt_verdict
from pgt.spectral import SpectralData, TransferForm, decompose_escalating, transfer_form


def spectrum_bits(height_limit: int = DEFAULT_HEIGHT, q_limit: int = 10**24, requested: int | None = None) -> int:
    """Spectral precision that covers relation certification and grid evaluation up to ``q_limit``."""
    need = max(2 * default_precision(height_limit) + 32, 2 * q_limit.bit_length() + 192)
    return max(need, requested or 0)


@dataclass(frozen=True)
class Determinant:
    value: mpmath.mpf
    positive_levels: int
    bound: int  # [N/2], or [N/2] - 1 when the determinant vanishes
    k_i: int

    @property
    def within_bound(self) -> bool:
        return self.k_i <= self.bound


def determinant_diagnostic(sd: SpectralData, analysis: FrequencyAnalysis) -> Determinant:
    """Product of eigenvalues against the ``[N/2]`` count of independent irrationals.

    Only a diagnostic: the count argument assumes a mirror-symmetric chain.
    """
    with mpmath.workprec(sd.precision_bits):
        det = mpmath.fprod(sd.eigenvalues)
        tol = mpmath.ldexp(1, -(sd.precision_bits // 2))
        positive = len({mpmath.nstr(x, 30) for x in sd.eigenvalues if x > tol})
        zero = abs(det) <= tol
    half = sd.dim // 2
    return Determinant(det, positive, half - 1 if zero else half, analysis.k_i)


@dataclass
class Analysis:
    spec: ChainSpec
    hamiltonian: OneExcHamiltonian
    spectrum: SpectralData
    form: TransferForm
    frequencies: FrequencyAnalysis
    determinant: Determinant


def analyze(spec: ChainSpec, precision_bits: int | None = None, height_limit: int = DEFAULT_HEIGHT) -> Analysis:
    """Spectrum, transfer form and frequency analysis for ``spec``.

    Raises :class:`pgt.number_theory.InconclusiveError` if a relation fails certification.
    """
    bits = precision_bits or spectrum_bits(height_limit)
    h = build_one_excitation(spec)
    sd = decompose_escalating(h, bits)
    form = transfer_form(spec, sd)
    freqs = form.frequencies()
    fa = classify_frequencies(freqs, height_limit, min(default_precision(height_limit), sd.precision_bits // 2))
    return Analysis(spec, h, sd, form, fa, determinant_diagnostic(sd, fa))


@dataclass
class Run:
    analysis: Analysis
    dataset: ScalingDataset
    fit: FitResult
    verdict: Verdict
    notes: list[str] = field(default_factory=list)


def run(
    spec: ChainSpec,
    budget: Budget = Budget(),
    thresholds: Thresholds = Thresholds(),
    height_limit: int = DEFAULT_HEIGHT,
    precision_bits: int | None = None,
    eps_cut: float = 0.1,
    tolerance: float = 0.15,
    min_r2: float = 0.98,
) -> Run:
    bits = spectrum_bits(height_limit, budget.q_limit, precision_bits)
    an = analyze(spec, bits, height_limit)
    ds = alignment_search(an.form, an.frequencies, budget, spec)
    fit = fit_power_law(ds, an.frequencies.k_i, eps_cut, tolerance, min_r2)
    verdict = pgt_verdict(an.form, an.frequencies, ds, thresholds)
    return Run(an, ds, fit, verdict)
