"""
Martinet Engine - Normal Forms

Constructive side of the equivalence theory: homotopy primitives, relative
primitives vanishing on {p = 0}, division by df, the decomposition
ω = d(p·π*α) + π*σ + d(p²θ), realization of restrictions, the volume
construction, and the equivalence decider that dispatches between them.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import linalg
from config import CONTACT_DEGREE_BOUND, MAX_SEARCH_WEIGHT, NAKAYAMA_MAX_POWER
from errors import (
    ChartMismatchError,
    DegreeError,
    InfeasibleError,
    MartinetError,
    NotClosedError,
    PreconditionError,
)
from exterior import (
    DiffForm,
    PolyMapGerm,
    ext_d,
    inclusion,
    is_closed,
    perm_sign,
    projection,
    pullback,
    rank_at_0,
    top_coefficient,
    wedge,
    wedge_power,
)
from invariants import (
    FieldStatus,
    MartinetData,
    Regime,
    classify_sigma220,
    dim_span_j1,
    find_annihilator,
    ideal_I_sigma,
    kernel_field_search,
    kernel_incidence,
    kernel_of_power,
    martinet,
    martinet_function,
    require_closed_two_form,
    sigma_half_dim,
)
from scalar_poly import (
    Chart,
    Exponent,
    RegularSequence,
    TruncatedPoly,
    divide_by_variable,
    divide_local,
    find_weights,
    formal_integral,
    isolated_singularity_certificate,
    monomials_up_to,
    partial,
    quasi_homogeneous_check,
    unit_ratio,
    weighted_degree,
)

# --- Logging ---
logger = logging.getLogger(__name__)


# --- Form helpers ---


def times_variable(a: DiffForm, var: str, k: int = 1) -> DiffForm:
    """var^k·a; the product is exact through jet + k."""
    i = a.chart.index(var)
    coeffs = {}
    for index, c in a.coeffs.items():
        terms = {}
        for e, v in c.terms.items():
            shifted = list(e)
            shifted[i] += k
            terms[tuple(shifted)] = v
        coeffs[index] = TruncatedPoly(a.chart, a.jet_order + k, terms)
    return DiffForm(a.chart, a.degree, a.jet_order + k, coeffs)


def times_function(a: DiffForm, f: TruncatedPoly) -> DiffForm:
    """f·a, exact through min(jet a + ord f, jet f + ord a)."""
    s = f.order()
    if s is None or a.is_zero():
        return DiffForm.zero(a.chart, a.degree, a.jet_order)
    jet = min(a.jet_order + s, f.jet_order + (a.order() or 0))
    coeffs = {}
    for index, c in a.coeffs.items():
        coeffs[index] = TruncatedPoly(a.chart, jet, _product_terms(c, f, jet))
    return DiffForm(a.chart, a.degree, jet, coeffs)


def _product_terms(p: TruncatedPoly, q: TruncatedPoly, limit: int) -> Dict[Exponent, Fraction]:
    out: Dict[Exponent, Fraction] = {}
    for ep, cp in p.terms.items():
        for eq, cq in q.terms.items():
            key = tuple(a + b for a, b in zip(ep, eq))
            if sum(key) <= limit:
                out[key] = out.get(key, 0) + cp * cq
    return out


def divide_form_by_variable(a: DiffForm, var: str) -> Optional[DiffForm]:
    coeffs = {}
    for index, c in a.coeffs.items():
        q = divide_by_variable(c, var)
        if q is None:
            return None
        coeffs[index] = q
    return DiffForm(a.chart, a.degree, max(a.jet_order - 1, 0), coeffs)


def divide_form_local(a: DiffForm, f: TruncatedPoly) -> Optional[DiffForm]:
    """a/f coefficientwise in the local ring, or None when some coefficient is not in ⟨f⟩."""
    s = f.order() or 0
    jet = max(min(a.jet_order, f.jet_order) - s, 0)
    coeffs = {}
    for index, c in a.coeffs.items():
        q = divide_local(c, f)
        if q is None:
            return None
        coeffs[index] = q
    return DiffForm(a.chart, a.degree, jet, coeffs)


def lift_from_hypersurface(a: DiffForm, chart: Chart, var: str) -> DiffForm:
    """π*a for the projection chart → {var = 0}."""
    return pullback(projection(chart, var, a.jet_order + 1), a)


def restrict_to_hypersurface(a: DiffForm, var: str) -> DiffForm:
    """ι*a for the inclusion {var = 0} ↪ chart."""
    return pullback(inclusion(a.chart, var, a.jet_order + 1), a)


def weighted_homotopy(a: DiffForm, weights: Sequence[int]) -> DiffForm:
    """
    Homotopy operator of the weighted dilation: Σ (E⌟a_w)/w over weighted
    homogeneous parts a_w, with E = Σ λ_i x_i ∂_i.

    For a closed form without weight-zero terms, d of the result is a. Weight
    (1, 0, ..., 0) gives the fiberwise homotopy onto {x_1 = 0}.
    """
    if a.degree == 0:
        raise DegreeError("the homotopy operator acts on forms of positive degree")
    chart = a.chart
    if len(weights) != chart.dim:
        raise PreconditionError("one weight per variable is required")
    out: Dict[Tuple[int, ...], Dict[Exponent, Fraction]] = {}
    for index, c in a.coeffs.items():
        form_weight = sum(weights[i] for i in index)
        for e, v in c.terms.items():
            w = form_weight + weighted_degree(e, weights)
            if w == 0:
                raise PreconditionError("zero weighted-degree component")
            for p, i in enumerate(index):
                if not weights[i]:
                    continue
                rest = index[:p] + index[p + 1 :]
                shifted = list(e)
                shifted[i] += 1
                key = tuple(shifted)
                value = v * weights[i] / w
                bucket = out.setdefault(rest, {})
                bucket[key] = bucket.get(key, 0) + (-value if p % 2 else value)
    coeffs = {k: TruncatedPoly(chart, a.jet_order + 1, t) for k, t in out.items()}
    return DiffForm(chart, a.degree - 1, a.jet_order + 1, coeffs)


def contact_volume(alpha: DiffForm, sigma: DiffForm, n: int) -> Fraction:
    """(α∧dα∧σ^(n-2))|₀ as a number on the (2n-1)-dimensional chart."""
    three = wedge(alpha, ext_d(alpha))
    return top_coefficient(wedge(three, wedge_power(sigma, n - 2))).constant_term()


# --- Primitives ---


def relative_primitive_p1(rho: DiffForm, var: str = "p1") -> DiffForm:
    """
    β with d(var²·β) = ρ, for a closed 2-form ρ divisible by var.

    The radial homotopy gives ρ = d(var·γ) with γ = g·dvar + var·δ along the
    other directions; then β = δ − dg/2.
    """
    if rho.degree != 2:
        raise DegreeError(f"expected a 2-form, got degree {rho.degree}")
    if not is_closed(rho):
        raise NotClosedError("ρ is not closed at the working jet order")
    chart = rho.chart
    j = chart.index(var)
    if divide_form_by_variable(rho, var) is None:
        raise PreconditionError(f"ρ is not divisible by {var}")
    radial = weighted_homotopy(rho, [1] * chart.dim)
    gamma = divide_form_by_variable(radial, var)
    if gamma is None:
        raise PreconditionError(f"radial primitive is not divisible by {var}")
    g = gamma.coeff((j,))
    delta = {}
    for i in range(chart.dim):
        if i == j:
            continue
        q = divide_by_variable(gamma.coeff((i,)), var)
        if q is None:
            raise PreconditionError(f"primitive does not vanish on {{{var} = 0}} to second order")
        delta[(i,)] = q
    delta_form = DiffForm(chart, 1, max(gamma.jet_order - 1, 0), delta)
    beta = delta_form - ext_d(DiffForm.function(g)) * Fraction(1, 2)
    if ext_d(times_variable(beta, var, 2)) != rho:
        raise InfeasibleError(f"d({var}²β) differs from ρ", order=rho.jet_order)
    logger.debug(f"relative_primitive: var={var} jet={beta.jet_order}")
    return beta


def resolve_weights(f: TruncatedPoly, weights: Optional[Sequence[int]] = None) -> Optional[Tuple[int, ...]]:
    """Weights making f quasi-homogeneous: given ones, the chart's, or a bounded search."""
    if weights is not None:
        weights = tuple(int(w) for w in weights)
        if not quasi_homogeneous_check(f, weights):
            raise PreconditionError(f"f is not quasi-homogeneous for weights {weights}")
        return weights
    if f.chart.weights is not None and quasi_homogeneous_check(f, f.chart.weights):
        return f.chart.weights
    found = find_weights(f, MAX_SEARCH_WEIGHT)
    return found[0] if found else None


@dataclass(frozen=True)
class Primitive:
    form: DiffForm
    vanishes_on_f: bool


def homotopy_primitive(
    beta: DiffForm, f: TruncatedPoly, weights: Optional[Sequence[int]] = None
) -> Primitive:
    """
    Weighted-homotopy primitive γ of a closed β ∈ ⟨f⟩·Λ^k, for quasi-homogeneous f.

    vanishes_on_f reports whether γ itself lies in ⟨f⟩·Λ^(k-1).
    """
    if beta.chart != f.chart:
        raise ChartMismatchError(f"chart {beta.chart.vars} != {f.chart.vars}")
    if not is_closed(beta):
        raise NotClosedError("β is not closed at the working jet order")
    weights = resolve_weights(f, weights)
    if weights is None:
        raise PreconditionError("f is not quasi-homogeneous in these coordinates")
    if divide_form_local(beta, f) is None:
        raise PreconditionError("β is not in ⟨f⟩·Λ")
    gamma = weighted_homotopy(beta, weights)
    if ext_d(gamma) != beta:
        raise InfeasibleError("homotopy primitive does not reproduce β", order=beta.jet_order)
    vanishes = divide_form_local(gamma, f) is not None
    logger.debug(f"homotopy_primitive: weights={weights} vanishes_on_f={vanishes}")
    return Primitive(gamma, vanishes)


def df_division(
    beta: DiffForm, f: TruncatedPoly, weights: Optional[Sequence[int]] = None
) -> DiffForm:
    """
    γ with df∧γ = β, for df∧β = 0 and f with an isolated singularity.

    Solved as one linear system per weighted-degree block when f is
    quasi-homogeneous, otherwise as a single system.
    """
    chart = f.chart
    if beta.chart != chart:
        raise ChartMismatchError(f"chart {beta.chart.vars} != {chart.vars}")
    k = beta.degree
    if not 1 <= k <= chart.dim - 1:
        raise DegreeError(f"df-division needs 1 ≤ degree ≤ {chart.dim - 1}, got {k}")
    df = ext_d(DiffForm.function(f))
    if not wedge(df, beta).is_zero():
        raise PreconditionError("df∧β ≠ 0")
    if isolated_singularity_certificate(f, NAKAYAMA_MAX_POWER) is None:
        raise PreconditionError("no isolated-singularity certificate for f")
    weights = resolve_weights(f, weights)
    delta = quasi_homogeneous_check(f, weights) if weights else None
    s = f.order()
    limit = min(beta.jet_order, df.jet_order)
    cap = limit - (s - 1)
    if cap < 0:
        raise InfeasibleError("jet too short for df-division", order=limit)

    def block_of(exps: Exponent, index: Tuple[int, ...]) -> int:
        if weights is None:
            return 0
        return weighted_degree(exps, weights) + sum(weights[i] for i in index)

    unknowns: Dict[int, List[Tuple[Tuple[int, ...], Exponent]]] = {}
    for index in itertools.combinations(range(chart.dim), k - 1):
        for mu in monomials_up_to(chart.dim, cap):
            unknowns.setdefault(block_of(mu, index), []).append((index, mu))
    targets: Dict[int, Dict[Tuple[Tuple[int, ...], Exponent], Fraction]] = {}
    for index, c in beta.coeffs.items():
        for e, v in c.terms.items():
            if sum(e) > limit:
                continue
            block = block_of(e, index) - (delta or 0)
            targets.setdefault(block, {})[(index, e)] = v

    df_terms = [(i, c.terms) for (i,), c in df.coeffs.items()]
    solution: Dict[Tuple[int, ...], Dict[Exponent, Fraction]] = {}
    for block in sorted(set(unknowns) | set(targets)):
        columns = unknowns.get(block, [])
        row_index: Dict[Tuple[Tuple[int, ...], Exponent], int] = {}
        rows: List[Dict[int, Fraction]] = []

        def row_of(key) -> int:
            if key not in row_index:
                row_index[key] = len(rows)
                rows.append({})
            return row_index[key]

        for col, (index, mu) in enumerate(columns):
            for i, terms in df_terms:
                sign, key_index = perm_sign((i,) + index)
                if not sign:
                    continue
                for e, c in terms.items():
                    exps = tuple(a + b for a, b in zip(e, mu))
                    if sum(exps) > limit:
                        continue
                    row = rows[row_of((key_index, exps))]
                    row[col] = row.get(col, Fraction(0)) + sign * c
        for key in targets.get(block, {}):
            row_of(key)
        rhs = [Fraction(0)] * len(rows)
        for key, v in targets.get(block, {}).items():
            rhs[row_index[key]] = v
        if not columns:
            if any(rhs):
                raise InfeasibleError("β has a component df∧γ cannot reach", order=limit)
            continue
        x = linalg.solve(rows, rhs, len(columns))
        if x is None:
            raise InfeasibleError("df∧γ = β has no solution", order=limit)
        for (index, mu), value in zip(columns, x):
            if value:
                solution.setdefault(index, {})[mu] = value
    gamma = DiffForm(
        chart, k - 1, cap, {index: TruncatedPoly(chart, cap, terms) for index, terms in solution.items()}
    )
    if wedge(df, gamma) != beta:
        raise InfeasibleError("df∧γ does not reproduce β", order=limit)
    logger.debug(f"df_division: degree={k} weights={weights} jet={gamma.jet_order}")
    return gamma


def singular_primitive(
    omega0: DiffForm, omega1: DiffForm, f: TruncatedPoly, weights: Optional[Sequence[int]] = None
) -> DiffForm:
    """
    α with ω₁ − ω₀ = d(f·α), for forms whose restrictions to the regular part
    of {f = 0} agree.
    """
    diff = omega1 - omega0
    df = ext_d(DiffForm.function(f))
    beta = divide_form_local(wedge(df, diff), f)
    if beta is None:
        raise PreconditionError("df∧(ω₁ − ω₀) is not in ⟨f⟩: restrictions to Σ₂ differ")
    gamma = df_division(beta, f, weights)
    remainder = diff - times_function(gamma, f)
    delta = df_division(remainder, f, weights)
    rho = times_function(gamma - ext_d(delta), f)
    psi = homotopy_primitive(rho, f, weights)
    reduced = divide_form_local(psi.form, f)
    if reduced is None:
        raise InfeasibleError("homotopy primitive is not divisible by f", order=psi.form.jet_order)
    alpha = reduced + delta
    if ext_d(times_function(alpha, f)) != diff:
        raise InfeasibleError("d(f·α) differs from ω₁ − ω₀", order=alpha.jet_order)
    return alpha


# --- Decomposition ---


@dataclass(frozen=True)
class Decomposition:
    """ω = d(p·π*α) + π*σ + d(p²·θ) in the chart where Σ₂ = {p = 0}."""

    alpha: DiffForm
    sigma: DiffForm
    theta: DiffForm
    residual_order: int
    normal_var: str
    chart_map: Optional[PolyMapGerm] = None


def _check_contact(alpha: DiffForm, sigma: DiffForm, n: int):
    if not wedge(alpha, wedge_power(sigma, n - 1)).is_zero():
        raise PreconditionError("α∧σ^(n-1) ≠ 0")
    if not contact_volume(alpha, sigma, n):
        raise PreconditionError("α∧dα∧σ^(n-2)|₀ = 0")


def decompose_normalized(omega: DiffForm, var: str, n: int, chart_map: Optional[PolyMapGerm] = None) -> Decomposition:
    chart = omega.chart
    j = chart.index(var)
    sigma = restrict_to_hypersurface(omega, var)
    rank = rank_at_0(sigma)
    if rank > 2 * n - 4:
        raise PreconditionError(f"rank σ|₀ = {rank}: Σ₂₀ regime, no contact annihilator at 0")
    pulled = lift_from_hypersurface(sigma, chart, var)
    fiber = [1 if i == j else 0 for i in range(chart.dim)]
    gamma = divide_form_by_variable(weighted_homotopy(omega - pulled, fiber), var)
    if gamma is None:
        raise InfeasibleError("fiber primitive is not divisible by the normal variable")
    alpha = restrict_to_hypersurface(gamma, var)
    exact = ext_d(times_variable(lift_from_hypersurface(alpha, chart, var), var, 1))
    theta = relative_primitive_p1(omega - exact - pulled, var)
    rebuilt = exact + pulled + ext_d(times_variable(theta, var, 2))
    residual = omega - rebuilt
    if not residual.is_zero():
        raise InfeasibleError("decomposition residual is nonzero", order=residual.jet_order)
    _check_contact(alpha, sigma, n)
    logger.info(f"decompose: var={var} alpha={alpha} theta_zero={theta.is_zero()}")
    return Decomposition(alpha, sigma, theta, residual.jet_order, var, chart_map)


def decompose(omega: DiffForm, data: Optional[MartinetData] = None) -> Decomposition:
    data = data or martinet(omega)
    if not data.structurally_smooth:
        raise PreconditionError("decomposition needs a structurally smooth Σ₂ at 0")
    return decompose_normalized(data.normalized, data.normal_var, data.half_dim, data.chart_map)


# --- Realization ---


class RealizationStatus(str, Enum):
    REALIZABLE = "realizable"
    NOT_REALIZABLE = "not_realizable"
    OPEN = "open"


@dataclass(frozen=True)
class Realization:
    status: RealizationStatus
    alpha: Optional[DiffForm] = None
    omega: Optional[DiffForm] = None
    rank: Optional[int] = None
    degree: Optional[int] = None


def _normal_name(chart: Chart) -> str:
    name = "p1"
    k = 1
    while name in chart.vars:
        k += 1
        name = f"p{k}"
    return name


def realize(alpha: DiffForm, sigma: DiffForm, var: Optional[str] = None) -> DiffForm:
    """ω = d(p·π*α) + π*σ on the chart (p,) + sigma's chart."""
    var = var or _normal_name(sigma.chart)
    chart = Chart((var,) + sigma.chart.vars)
    ambient_alpha = lift_from_hypersurface(alpha, chart, var)
    ambient_sigma = lift_from_hypersurface(sigma, chart, var)
    return ext_d(times_variable(ambient_alpha, var, 1)) + ambient_sigma


def realizability(sigma: DiffForm, degree_bound: int = CONTACT_DEGREE_BOUND) -> Realization:
    """Whether σ is the restriction of a closed 2-form to its structurally smooth Σ₂."""
    n = sigma_half_dim(sigma)
    if not is_closed(sigma):
        raise NotClosedError("σ is not closed at the working jet order")
    rank = rank_at_0(sigma)
    if rank >= 2 * n - 2:
        raise PreconditionError(f"rank σ|₀ = {rank}: Σ₂₀ regime, outside the annihilator search")
    if rank != 2 * n - 4:
        logger.info(f"realizability: not_realizable rank={rank}")
        return Realization(RealizationStatus.NOT_REALIZABLE, rank=rank)
    found = find_annihilator(sigma, degree_bound)
    if found.alpha is None:
        return Realization(RealizationStatus.OPEN, rank=rank, degree=degree_bound)
    omega = realize(found.alpha, sigma)
    return Realization(RealizationStatus.REALIZABLE, found.alpha, omega, rank, found.degree)


# --- Volume construction ---


def from_volume(f: TruncatedPoly) -> DiffForm:
    """A closed 2-form with ω^n = f·dx₁∧…∧dx_2n."""
    chart = f.chart
    if chart.dim % 2 or chart.dim < 2:
        raise PreconditionError(f"chart dimension {chart.dim} is not even")
    n = chart.dim // 2
    x1, x2 = chart.vars[0], chart.vars[1]
    integral = formal_integral(f, x1)
    F = TruncatedPoly(chart, f.jet_order + 1, integral.terms).scale(Fraction(1, math.factorial(n)))
    omega = ext_d(DiffForm(chart, 1, f.jet_order + 1, {(x2,): F}))
    for k in range(1, n):
        omega = omega + DiffForm(chart, 2, f.jet_order, {(2 * k, 2 * k + 1): 1})
    if top_coefficient(wedge_power(omega, n)) != f:
        raise InfeasibleError("ω^n differs from f·Ω", order=f.jet_order)
    return omega


# --- Equivalence ---


class Category(str, Enum):
    C = "C"
    R = "R"


class Outcome(str, Enum):
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not_equivalent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EquivalenceVerdict:
    outcome: Outcome
    theorem_used: Optional[str] = None
    evidence: Dict[str, Any] = field(default_factory=dict)


def _differs(invariant: str, value0, value1, **extra) -> EquivalenceVerdict:
    evidence = {"invariant": invariant, "value0": value0, "value1": value1}
    evidence.update(extra)
    logger.info(f"equivalence: not_equivalent invariant={invariant} values=({value0}, {value1})")
    return EquivalenceVerdict(Outcome.NOT_EQUIVALENT, None, evidence)


def _inconclusive(failed: List[str], **extra) -> EquivalenceVerdict:
    evidence: Dict[str, Any] = {"failed": failed}
    evidence.update(extra)
    logger.info(f"equivalence: inconclusive failed={failed}")
    return EquivalenceVerdict(Outcome.INCONCLUSIVE, None, evidence)


def _proportion(v1: DiffForm, v0: DiffForm) -> Optional[Fraction]:
    """B with v1 = B·v0 for constant forms, None when not proportional or v0 = 0."""
    if v0.is_zero():
        return None
    key = next(iter(sorted(v0.coeffs)))
    ratio = v1.coeff(key).constant_term() / v0.coeffs[key].constant_term()
    if v1 != v0 * ratio:
        return None
    return ratio


@dataclass(frozen=True)
class ContactConstants:
    """Comparison data of two decompositions sharing σ."""

    A: Optional[Fraction]
    B: Optional[Fraction]
    aligned: bool


def contact_constants(d0: Decomposition, d1: Decomposition, n: int) -> ContactConstants:
    """
    A: ratio of α∧dα∧σ^(n-2)|₀; B: ratio of α|₀∧σ^(n-2)|₀; aligned when
    α₁|₀∧α₀|₀∧σ^(n-2)|₀ = 0.
    """
    power0 = wedge_power(d0.sigma, n - 2).truncate(0)
    a0, a1 = d0.alpha.truncate(0), d1.alpha.truncate(0)
    v0, v1 = contact_volume(d0.alpha, d0.sigma, n), contact_volume(d1.alpha, d1.sigma, n)
    A = v1 / v0 if v0 else None
    B = _proportion(wedge(a1, power0), wedge(a0, power0))
    aligned = wedge(wedge(a1, a0), power0).is_zero()
    return ContactConstants(A, B, aligned)


def _smooth_invariant_mismatch(
    m0: MartinetData, m1: MartinetData, category: Category
) -> Optional[EquivalenceVerdict]:
    n = m0.half_dim
    r0, r1 = rank_at_0(m0.sigma), rank_at_0(m1.sigma)
    if r0 != r1:
        return _differs("rank_sigma_0", r0, r1)
    if r0 == 2 * n - 2:
        logger.info(f"equivalence: equivalent by martinet_sigma20 rank={r0}")
        return EquivalenceVerdict(Outcome.EQUIVALENT, "martinet_sigma20", {"rank_sigma_0": r0})
    if n >= 2 and r0 == 2 * n - 4:
        s0, s1 = dim_span_j1(m0.sigma, n), dim_span_j1(m1.sigma, n)
        if s0 != s1:
            return _differs("dim_span_j1", s0, s1)
        if s0 < 2:
            return None
        c0, c1 = classify_sigma220(m0.sigma), classify_sigma220(m1.sigma)
        if category is Category.R and c0.label != c1.label:
            return _differs("sigma22_class", c0.label, c1.label)
        if category is Category.C and (c0.label == "parabolic") != (c1.label == "parabolic"):
            return _differs("sigma22_class", c0.label, c1.label)
    return None


def _sufficient_conditions(
    normalized0: DiffForm,
    normalized1: DiffForm,
    data: MartinetData,
    category: Category,
    orientation: int,
    seed: int,
) -> Tuple[List[str], Dict[str, Any]]:
    n = data.half_dim
    sigma = data.sigma
    rank = rank_at_0(sigma)
    oriented = category is Category.C or orientation > 0
    certified: List[str] = []
    notes: Dict[str, Any] = {}
    if n >= 2 and rank == 2 * n - 4:
        span = dim_span_j1(sigma, n)
        notes["dim_span_j1"] = span
        if span == 2 and oriented:
            certified.append("tw-deter")
    if n == 2 and rank == 0:
        try:
            ideal = ideal_I_sigma(sigma, seed=seed)
            notes["ideal_verdict"] = ideal.verdict.value
            if ideal.verdict is RegularSequence.CERTIFIED_REGULAR and oriented:
                certified.append("smooth")
        except InfeasibleError as exc:
            notes["ideal_verdict"] = str(exc)
        kfield = kernel_field_search(sigma)
        notes["kernel_field"] = kfield.label()
        if kfield.status is FieldStatus.OBSTRUCTED:
            if category is Category.C:
                certified.append("C-ana")
            elif orientation > 0:
                certified.append("R-ana")
    if n >= 2 and rank <= 2 * n - 4:
        try:
            d0 = decompose_normalized(normalized0, data.normal_var, n)
            d1 = decompose_normalized(normalized1, data.normal_var, n)
            constants = contact_constants(d0, d1, n)
            notes["A"] = constants.A
            notes["B"] = constants.B
            notes["aligned"] = constants.aligned
            positive = constants.A is not None and constants.A > 0
            if constants.aligned and constants.B and (category is Category.C or positive):
                certified.append("4-dim(b)")
        except MartinetError as exc:
            notes["decomposition"] = str(exc)
    return certified, notes


def _decide_smooth(
    omega1: DiffForm,
    m0: MartinetData,
    u: TruncatedPoly,
    category: Category,
    kernel0,
    kernel1,
    seed: int,
) -> EquivalenceVerdict:
    n = m0.half_dim
    var = m0.normal_var
    normalized1 = omega1 if m0.chart_map is None else pullback(m0.chart_map, omega1)
    sigma1 = restrict_to_hypersurface(normalized1, var)
    if sigma1 != m0.sigma:
        return _inconclusive(
            ["equal_restriction"], reason="restrictions to the common Σ₂ differ in these coordinates"
        )
    orientation = 1 if u.constant_term() > 0 else -1
    evidence: Dict[str, Any] = {
        "rank_sigma_0": rank_at_0(m0.sigma),
        "relative_orientation": orientation,
        "kernel0": kernel0,
        "kernel1": kernel1,
    }
    if n >= 2 and kernel0 != kernel1:
        i0, i1 = kernel_incidence(m0, kernel0), kernel_incidence(m0, kernel1)
        if i0 != i1:
            return _differs("kernel", kernel0, kernel1, incidence0=i0, incidence1=i1)
        return _inconclusive(
            ["equal_kernel"],
            reason="kernels differ but meet T₀Σ₂₂ alike; a symmetry of σ may relate them",
            **evidence,
        )
    if category is Category.R and orientation < 0:
        return _differs("canonical_orientation", 1, orientation)
    if category is Category.C and orientation < 0:
        evidence["orientation_fix"] = "p1 -> i*p1"
    certified, notes = _sufficient_conditions(m0.normalized, normalized1, m0, category, orientation, seed)
    evidence["certified"] = certified
    evidence.update(notes)
    theorem = "inv-C" if category is Category.C else "inv-R"
    logger.info(f"equivalence: equivalent by {theorem} certified={certified}")
    return EquivalenceVerdict(Outcome.EQUIVALENT, theorem, evidence)


def _decide_singular(
    omega0: DiffForm, omega1: DiffForm, f: TruncatedPoly, u: TruncatedPoly, category: Category
) -> EquivalenceVerdict:
    failed = []
    weights = resolve_weights(f)
    if weights is None:
        failed.append("quasi_homogeneous")
    power = isolated_singularity_certificate(f, NAKAYAMA_MAX_POWER)
    if power is None:
        failed.append("isolated_singularity")
    df = ext_d(DiffForm.function(f))
    if divide_form_local(wedge(df, omega1 - omega0), f) is None:
        failed.append("equal_restriction")
    orientation = 1 if u.constant_term() > 0 else -1
    if failed:
        return _inconclusive(failed, relative_orientation=orientation)
    if category is Category.R and orientation < 0:
        return _differs("canonical_orientation", 1, orientation)
    evidence = {"weights": list(weights), "nakayama_power": power, "relative_orientation": orientation}
    if category is Category.C and orientation < 0:
        evidence["orientation_fix"] = "p1 -> i*p1"
    logger.info(f"equivalence: equivalent by sing weights={weights}")
    return EquivalenceVerdict(Outcome.EQUIVALENT, "sing", evidence)


def _reflections(chart: Chart, jet_order: int):
    """Coordinate reflections x_i -> -x_i with determinant -1."""
    for signs in itertools.product((1, -1), repeat=chart.dim):
        if math.prod(signs) > 0:
            continue
        matrix = [[signs[i] if i == j else 0 for j in range(chart.dim)] for i in range(chart.dim)]
        yield signs, PolyMapGerm.linear(chart, chart, matrix, jet_order)


def _reflected_decision(
    omega0: DiffForm, omega1: DiffForm, m0: MartinetData, kernel0, seed: int
) -> Optional[EquivalenceVerdict]:
    """
    Retry an orientation mismatch against reflections of omega1. A reflected
    omega1 is equivalent to omega1, so any equivalent outcome carries over.
    """
    if m0.chart_map is not None:
        return None
    n = m0.half_dim
    for signs, R in _reflections(omega1.chart, omega1.jet_order + 1):
        reflected = pullback(R, omega1)
        u = unit_ratio(martinet_function(reflected), m0.f)
        if u is None or u.constant_term() < 0:
            continue
        if m0.regime is Regime.STRUCTURALLY_SMOOTH:
            if restrict_to_hypersurface(reflected, m0.normal_var) != m0.sigma:
                continue
            kernel1 = kernel_of_power(reflected) if n >= 2 else None
            if kernel1 != kernel0:
                continue
            verdict = _decide_smooth(reflected, m0, u, Category.R, kernel0, kernel1, seed)
        else:
            verdict = _decide_singular(omega0, reflected, m0.f, u, Category.R)
        if verdict.outcome is Outcome.EQUIVALENT:
            logger.info(f"equivalence: orientation mismatch resolved by reflection signs={signs}")
            return EquivalenceVerdict(
                verdict.outcome, verdict.theorem_used, {**verdict.evidence, "reflection": list(signs)}
            )
    return None


def decide_equivalence(
    omega0: DiffForm, omega1: DiffForm, category: Category = Category.R, seed: int = 0
) -> EquivalenceVerdict:
    """
    Decide whether two closed 2-form germs are equivalent.

    not_equivalent always names a differing invariant; equivalent always names
    the theorem used; everything else is inconclusive with the failed checks.
    """
    category = Category(category)
    if omega0.chart != omega1.chart:
        raise ChartMismatchError(f"chart {omega0.chart.vars} != {omega1.chart.vars}")
    n = require_closed_two_form(omega0)
    require_closed_two_form(omega1)
    m0, m1 = martinet(omega0), martinet(omega1)
    if m0.regime is not m1.regime:
        return _differs("martinet_regime", m0.regime.value, m1.regime.value)
    if m0.regime is Regime.NONSINGULAR:
        logger.info("equivalence: equivalent by darboux")
        return EquivalenceVerdict(Outcome.EQUIVALENT, "darboux", {"regime": m0.regime.value})
    kernel0 = kernel1 = None
    if n >= 2:
        kernel0, kernel1 = kernel_of_power(omega0), kernel_of_power(omega1)
    if m0.regime is Regime.STRUCTURALLY_SMOOTH:
        verdict = _smooth_invariant_mismatch(m0, m1, category)
        if verdict is not None:
            return verdict
    u = unit_ratio(m1.f, m0.f)
    if u is None:
        return _inconclusive(
            ["common_martinet_hypersurface"], reason="Σ₂ of the two forms differ in these coordinates"
        )
    if m0.regime is Regime.STRUCTURALLY_SMOOTH:
        verdict = _decide_smooth(omega1, m0, u, category, kernel0, kernel1, seed)
    else:
        verdict = _decide_singular(omega0, omega1, m0.f, u, category)
    if verdict.evidence.get("invariant") == "canonical_orientation":
        return _reflected_decision(omega0, omega1, m0, kernel0, seed) or verdict
    return verdict


# --- Templates ---


@dataclass(frozen=True)
class TemplateFit:
    """
    Shape "first": ω ≅ d(p(dx + (C + z)dy)) + g(x, y)dx∧dy; "second" swaps dx and
    dy in α. k and e are the scalings of p and z bringing α to the template.
    """

    shape: str
    C: Optional[Fraction] = None
    g: Optional[TruncatedPoly] = None
    k: Optional[Fraction] = None
    e: Optional[Fraction] = None


def _affine_in(p: TruncatedPoly, var: str) -> Optional[Tuple[Fraction, Fraction]]:
    """(c, e) with p = c + e·var, or None."""
    i = p.chart.index(var)
    c, e = Fraction(0), Fraction(0)
    for exps, v in p.terms.items():
        if not any(exps):
            c = v
        elif sum(exps) == 1 and exps[i] == 1:
            e = v
        else:
            return None
    return c, e


def kernel_template_fit(omega: DiffForm) -> TemplateFit:
    """
    Match a 4-dimensional form whose σ carries a kernel field against the two
    templates of the kernel-field normal form, without constructing the chart
    change. Only scalings of p and z are absorbed.
    """
    data = martinet(omega)
    if not data.structurally_smooth or data.half_dim != 2:
        raise PreconditionError("template fit needs dimension 4 with a smooth Σ₂")
    if rank_at_0(data.sigma) != 0:
        raise PreconditionError("template fit needs σ|₀ = 0")
    kfield = kernel_field_search(data.sigma)
    if kfield.status is not FieldStatus.EXISTS:
        raise PreconditionError(f"σ has no kernel field ({kfield.label()})")
    parts = decompose(omega, data)
    hyper = parts.sigma.chart
    x, y, z = hyper.vars
    g = parts.sigma.coeff((0, 1))
    if set(parts.sigma.coeffs) - {(0, 1)} or not partial(g, z).is_zero():
        return TemplateFit("inconclusive")
    if g.is_zero():
        return TemplateFit("degenerate", g=g)
    alpha = parts.alpha
    if not alpha.coeff((2,)).is_zero() or not parts.theta.is_zero():
        return TemplateFit("inconclusive", g=g)
    for shape, lead, other in (("first", 0, 1), ("second", 1, 0)):
        k = alpha.coeff((lead,))
        if k.is_zero() or k.degree() > 0:
            continue
        k0 = k.constant_term()
        fit = _affine_in(alpha.coeff((other,)).scale(1 / k0), z)
        if fit is None or not fit[1]:
            continue
        C, e = fit
        logger.info(f"template_fit: shape={shape} C={C} k={k0} e={e}")
        return TemplateFit(shape, C, g, k0, e)
    return TemplateFit("inconclusive", g=g)


@dataclass(frozen=True)
class OrientationPair:
    omega0: DiffForm
    omega1: DiffForm
    contact_ratio: Fraction


def orientation_pair(
    a1: Fraction, a2: Fraction, a3: Fraction, h: Fraction, r: Fraction, jet_order: int = 8
) -> OrientationPair:
    """
    Two forms on (p1, x, y, z) sharing σ = x·α∧β and the kernel at 0, where
    α = dz + x dy, β = a dx − b dy, a = a1x + a2y + a3z, b = (a3/3)x² − (a2/2)x.

    ω₀ = d(p1·α) + σ and ω₁ = d(p1·(hα + rβ)) + σ; contact_ratio is
    h(h − a2·r/2), the sign of their relative orientation.
    """
    a1, a2, a3, h, r = (Fraction(v) for v in (a1, a2, a3, h, r))
    chart = Chart(("p1", "x", "y", "z"))
    N = jet_order + 1
    x = TruncatedPoly.variable(chart, "x", N)
    a = TruncatedPoly.linear(chart, [0, a1, a2, a3], N)
    b = (x * x).scale(a3 / 3) - x.scale(a2 / 2)
    alpha = DiffForm(chart, 1, N, {("z",): 1, ("y",): x})
    beta = DiffForm(chart, 1, N, {("x",): a, ("y",): -b})
    sigma = wedge(alpha, beta) * x
    omega0 = ext_d(times_variable(alpha, "p1", 1)) + sigma
    omega1 = ext_d(times_variable(alpha * h + beta * r, "p1", 1)) + sigma
    return OrientationPair(omega0.truncate(jet_order), omega1.truncate(jet_order), h * (h - a2 * r / 2))


def sigma220_chart(n: int = 2) -> Chart:
    return Chart(("p1", "y1", "y2", "y3") + tuple(f"x{i}" for i in range(1, 2 * n - 3)))


def sigma220_form(b: TruncatedPoly, h: TruncatedPoly, n: int = 2) -> DiffForm:
    """
    Closed form with Σ₂ = {p1 = 0} and restriction
    σ = (dy3 + y1·dy2)∧(b dy1 − a dy2) + Σ dx_(2k-1)∧dx_(2k), where
    a = ∫₀^y1 (t·∂b/∂y3 − ∂b/∂y2) dt + h and b, h are polynomials on sigma220_chart(n).
    """
    chart = sigma220_chart(n)
    if b.chart != chart or h.chart != chart:
        raise ChartMismatchError(f"b and h must live on {chart.vars}")
    N = min(b.jet_order, h.jet_order)
    y1 = TruncatedPoly.variable(chart, "y1", N)
    # b and h are exact polynomials, so derived terms keep jet N
    integrand = TruncatedPoly(chart, N, (y1 * TruncatedPoly(chart, N, partial(b, "y3").terms)).terms)
    integrand = integrand - TruncatedPoly(chart, N, partial(b, "y2").terms)
    a = TruncatedPoly(chart, N, formal_integral(integrand, "y1").terms) + h
    alpha = DiffForm(chart, 1, N + 1, {("y3",): 1, ("y2",): TruncatedPoly.variable(chart, "y1", N + 1)})
    beta = DiffForm(chart, 1, N, {("y1",): b, ("y2",): -a})
    sigma = wedge(alpha, beta)
    for k in range(1, n - 1):
        sigma = sigma + DiffForm(chart, 2, N, {(f"x{2 * k - 1}", f"x{2 * k}"): 1})
    omega = ext_d(times_variable(alpha, "p1", 1)) + sigma
    if not is_closed(omega):
        raise NotClosedError("b and h do not give a closed restriction")
    return omega
