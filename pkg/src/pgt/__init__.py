"""Arrival-time scaling of pretty good transmission in spin chains."""

from pgt.chain_models import (
    ChainSpec,
    Coupling,
    Family,
    OneExcHamiltonian,
    SpecificationError,
    brute_force_block,
    build_one_excitation,
)
from pgt.diophantine import (
    ApproxRecord,
    Budget,
    ScalingDataset,
    ScalingPoint,
    alignment_search,
    convergents,
    simultaneous_approx,
)
from pgt.number_theory import FrequencyAnalysis, classify_frequencies, rational_check
from pgt.pipeline import analyze, run
from pgt.scaling import FitResult, Outcome, Thresholds, Verdict, fit_power_law, pgt_verdict
from pgt.spectral import (
    SpectralData,
    TransferForm,
    decompose,
    evaluate_probability,
    transfer_form,
)

__all__ = [
    "ApproxRecord",
    "Budget",
    "ChainSpec",
    "Coupling",
    "Family",
    "FitResult",
    "FrequencyAnalysis",
    "OneExcHamiltonian",
    "Outcome",
    "ScalingDataset",
    "ScalingPoint",
    "SpecificationError",
    "SpectralData",
    "Thresholds",
    "TransferForm",
    "Verdict",
    "alignment_search",
    "analyze",
    "brute_force_block",
    "build_one_excitation",
    "classify_frequencies",
    "convergents",
    "decompose",
    "evaluate_probability",
    "fit_power_law",
    "pgt_verdict",
    "rational_check",
    "run",
    "simultaneous_approx",
    "transfer_form",
]
