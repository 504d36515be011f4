"""
Martinet Engine - Invariance Harness

Random polynomial diffeomorphism germs Φ and the checks that Φ*ω and ω share
every invariant and are never declared inequivalent. Trials are reproducible
from (seed, trial index) alone.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import linalg
from config import HARNESS_JET_ORDER, HARNESS_MAX_DEGREE, HARNESS_SPARSITY, HARNESS_TRIALS
from errors import HarnessFailure, MartinetError, PreconditionError
from exterior import DiffForm, PolyMapGerm, compose_maps, formal_inverse, pullback, rank_at_0
from invariants import (
    MartinetData,
    Regime,
    classify_sigma220,
    default_frame,
    dim_span_j1,
    kernel_of_power,
    martinet,
    orientation_sign,
    require_closed_two_form,
)
from normal_form import Category, Outcome, decide_equivalence
from scalar_poly import Chart, TruncatedPoly, monomials_of_degree

# --- Logging ---
logger = logging.getLogger(__name__)

__all__ = ["DiffeoGen", "SuiteReport", "TrialFailure", "formal_inverse", "invariance_suite", "trial_seed"]

COEFFICIENT_RANGE = 2


def trial_seed(seed: int, trial: int) -> int:
    return seed * 1_000_003 + trial


# --- Random diffeomorphisms ---


@dataclass
class DiffeoGen:
    """
    Random germs Φ(x) = A·x + h(x): A a rejection-sampled invertible integer
    matrix, h sparse with monomials of degree 2..max_degree.
    """

    chart: Chart
    seed: int
    jet_order: int = HARNESS_JET_ORDER + 1
    max_degree: int = HARNESS_MAX_DEGREE
    sparsity: float = HARNESS_SPARSITY
    rejected: int = field(default=0, init=False)

    def __post_init__(self):
        self._rng = random.Random(self.seed)

    def _coefficient(self) -> int:
        return self._rng.choice([c for c in range(-COEFFICIENT_RANGE, COEFFICIENT_RANGE + 1) if c])

    def linear_part(self) -> List[List[Fraction]]:
        m = self.chart.dim
        while True:
            matrix = [
                [Fraction(self._rng.randint(-COEFFICIENT_RANGE, COEFFICIENT_RANGE)) for _ in range(m)]
                for _ in range(m)
            ]
            if linalg.det(matrix):
                return matrix
            self.rejected += 1

    def higher_terms(self) -> TruncatedPoly:
        terms = {}
        for degree in range(2, min(self.max_degree, self.jet_order) + 1):
            for e in monomials_of_degree(self.chart.dim, degree):
                if self._rng.random() < self.sparsity:
                    terms[e] = Fraction(self._coefficient())
        return TruncatedPoly(self.chart, self.jet_order, terms)

    def sample(self) -> PolyMapGerm:
        matrix = self.linear_part()
        components = [
            TruncatedPoly.linear(self.chart, row, self.jet_order) + self.higher_terms() for row in matrix
        ]
        return PolyMapGerm(self.chart, self.chart, tuple(components))


# --- Suite ---


@dataclass(frozen=True)
class TrialFailure:
    trial: int
    check: str
    detail: str


@dataclass
class SuiteReport:
    seed: int
    trials: int
    passed: int = 0
    failures: List[TrialFailure] = field(default_factory=list)
    orientation_flips: List[int] = field(default_factory=list)
    verdicts: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def raise_for_failures(self):
        if self.failures:
            first = self.failures[0]
            raise HarnessFailure(f"{first.check}: {first.detail}", self.seed, first.trial)

    def summary(self) -> Dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "failures": [{"trial": f.trial, "check": f.check, "detail": f.detail} for f in self.failures],
            "orientation_flips": list(self.orientation_flips),
            "verdicts": dict(sorted(self.verdicts.items())),
        }


@dataclass(frozen=True)
class _Baseline:
    data: MartinetData
    kernel: Optional[list]
    rank: Optional[int] = None
    span: Optional[int] = None
    label: Optional[str] = None
    orientation: Optional[int] = None


def _apply(matrix: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> tuple:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in matrix)


def _baseline(omega: DiffForm) -> _Baseline:
    n = omega.chart.dim // 2
    data = martinet(omega)
    kernel = kernel_of_power(omega) if n >= 2 else None
    if data.regime is not Regime.STRUCTURALLY_SMOOTH:
        return _Baseline(data, kernel)
    rank = rank_at_0(data.sigma)
    span = label = None
    if n >= 2 and rank == 2 * n - 4:
        span = dim_span_j1(data.sigma, n)
        if span == 2:
            label = classify_sigma220(data.sigma).label
    return _Baseline(data, kernel, rank, span, label, orientation_sign(omega, data=data))


def _check_trial(
    omega: DiffForm, base: _Baseline, phi: PolyMapGerm, category: Category, seed: int
) -> List[tuple]:
    """(check, detail) pairs for every broken property; an orientation flip is reported as 'flip'."""
    chart = omega.chart
    n = chart.dim // 2
    broken: List[tuple] = []
    N = phi.jet_order - 1
    inverse = formal_inverse(phi, N)
    identity = PolyMapGerm.identity(chart, N)
    if compose_maps(phi, inverse) != identity or compose_maps(inverse, phi) != identity:
        broken.append(("formal_inverse", "Φ∘Φ⁻¹ differs from the identity"))
    A = phi.linear_part()
    A_inv = linalg.inverse(A)
    pulled = pullback(phi, omega)
    m1 = martinet(pulled)
    if m1.regime is not base.data.regime:
        broken.append(("regime", f"{base.data.regime.value} vs {m1.regime.value}"))
        return broken
    if base.kernel is not None:
        kernel1 = kernel_of_power(pulled)
        transported = linalg.canonical_basis([_apply(A_inv, v) for v in base.kernel], chart.dim)
        if len(kernel1) != len(base.kernel):
            broken.append(("kernel_dimension", f"{len(base.kernel)} vs {len(kernel1)}"))
        elif kernel1 != transported:
            broken.append(("kernel", "ker(Φ*ω) differs from DΦ⁻¹·ker ω"))
    if base.rank is not None:
        rank1 = rank_at_0(m1.sigma)
        if rank1 != base.rank:
            broken.append(("rank_sigma_0", f"{base.rank} vs {rank1}"))
        elif base.span is not None:
            span1 = dim_span_j1(m1.sigma, n)
            if span1 != base.span:
                broken.append(("dim_span_j1", f"{base.span} vs {span1}"))
            elif base.label is not None:
                label1 = classify_sigma220(m1.sigma).label
                if label1 != base.label:
                    broken.append(("sigma22_class", f"{base.label} vs {label1}"))
        sign1 = orientation_sign(pulled, data=m1)
        frame = default_frame(m1.f.linear_part(), chart.index(m1.normal_var))
        pushed = orientation_sign(omega, reference=[_apply(A, v) for v in frame], data=base.data)
        if pushed != sign1:
            broken.append(("orientation", f"pushed frame {pushed} vs {sign1}"))
        elif sign1 != base.orientation:
            broken.append(("flip", "coordinate frames of Σ₂ induce opposite orientations"))
    verdict = decide_equivalence(omega, pulled, category, seed)
    broken.append(("verdict", verdict.outcome.value))
    if verdict.outcome is Outcome.NOT_EQUIVALENT:
        broken.append(("decider", f"not_equivalent citing {verdict.evidence.get('invariant')}"))
    return broken


def invariance_suite(
    omega: DiffForm,
    trials: int = HARNESS_TRIALS,
    seed: int = 0,
    jet_order: int = HARNESS_JET_ORDER,
    maps: Optional[Sequence[PolyMapGerm]] = None,
    category: Category = Category.R,
) -> SuiteReport:
    """
    Compare ω with Φ*ω for random Φ (or the given maps): regime, kernel of
    ω^(n-1) transported by DΦ, rank σ|₀, jet span, Σ₂₂ class, the canonical
    orientation on pushed frames, and the decider's verdict.
    """
    require_closed_two_form(omega)
    omega = omega.truncate(jet_order)
    base = _baseline(omega)
    if maps is not None:
        trials = len(maps)
    report = SuiteReport(seed, trials)
    for trial in range(trials):
        try:
            if maps is not None:
                phi = maps[trial]
            else:
                phi = DiffeoGen(omega.chart, trial_seed(seed, trial), jet_order + 1).sample()
            if phi.source != omega.chart or phi.target != omega.chart:
                raise PreconditionError("maps must act on the chart of ω")
            broken = _check_trial(omega, base, phi, category, seed)
        except MartinetError as exc:
            broken = [("error", f"{exc.code}: {exc}")]
        failed = False
        for check, detail in broken:
            if check == "verdict":
                report.verdicts[detail] = report.verdicts.get(detail, 0) + 1
            elif check == "flip":
                report.orientation_flips.append(trial)
            else:
                failed = True
                report.failures.append(TrialFailure(trial, check, detail))
                logger.warning(f"harness: failure seed={seed} trial={trial} check={check} detail={detail}")
        if not failed:
            report.passed += 1
    logger.info(
        f"harness: trials={trials} passed={report.passed} failures={len(report.failures)} "
        f"flips={len(report.orientation_flips)}"
    )
    return report
