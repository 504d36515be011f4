"""
Martinet Engine - Invariants

The invariant record of a closed 2-form germ: Martinet hypersurface and
restriction, kernel of ω^(n-1) at 0, canonical orientation, jet span of σ^(n-1),
the ideal I(σ), kernel fields of σ and the Σ_220 / Σ_221 classification.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import linalg
from config import CONTACT_DEGREE_BOUND, KERNEL_FIELD_MAX_ORDER, REGULAR_SEQUENCE_TRIALS
from errors import DegenerateFormError, DegreeError, InfeasibleError, NotClosedError, PreconditionError
from exterior import (
    DiffForm,
    PolyMapGerm,
    PolyVectorField,
    eval_at_0,
    ext_d,
    formal_inverse,
    inclusion,
    interior,
    kernel_at_0,
    pullback,
    rank_at_0,
    top_coefficient,
    wedge,
    wedge_power,
)
from scalar_poly import (
    Chart,
    RegularSequence,
    TruncatedPoly,
    divide_by_variable,
    monomials_up_to,
    partial,
    regular_sequence_check,
    unit_ratio,
)

# --- Logging ---
logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]


class Regime(str, Enum):
    NONSINGULAR = "nonsingular"
    STRUCTURALLY_SMOOTH = "structurally_smooth"
    SINGULAR = "singular"


@dataclass(frozen=True)
class MartinetData:
    """
    Martinet function f (ω^n = f·Ω) and, when Σ₂ is smooth, the restriction σ.

    normalized is Φ*ω for the chart move Φ putting Σ₂ at {normal_var = 0};
    chart_map is None when the given chart already has that shape.
    """

    f: TruncatedPoly
    structurally_smooth: bool
    sigma: Optional[DiffForm]
    regime: Regime
    normal_var: Optional[str] = None
    chart_map: Optional[PolyMapGerm] = None
    normalized: Optional[DiffForm] = None

    @property
    def half_dim(self) -> int:
        return self.f.chart.dim // 2


def require_closed_two_form(omega: DiffForm) -> int:
    """Validate a closed 2-form on an even-dimensional chart; returns n."""
    if omega.degree != 2:
        raise DegreeError(f"expected a 2-form, got degree {omega.degree}")
    if omega.chart.dim % 2 or omega.chart.dim < 2:
        raise PreconditionError(f"chart dimension {omega.chart.dim} is not even")
    if not ext_d(omega).is_zero():
        raise NotClosedError("form is not closed at the working jet order")
    return omega.chart.dim // 2


def martinet_function(omega: DiffForm) -> TruncatedPoly:
    n = omega.chart.dim // 2
    return top_coefficient(wedge_power(omega, n))


def martinet(omega: DiffForm) -> MartinetData:
    n = require_closed_two_form(omega)
    chart = omega.chart
    f = martinet_function(omega)
    if f.is_zero():
        raise DegenerateFormError("ω^n vanishes identically at this jet order")
    if f.constant_term():
        logger.info(f"martinet: nonsingular f(0)={f.constant_term()}")
        return MartinetData(f, False, None, Regime.NONSINGULAR)
    gradient = f.linear_part()
    if not any(gradient):
        logger.info("martinet: singular Σ₂ (df|₀ = 0)")
        return MartinetData(f, False, None, Regime.SINGULAR)
    j = next(i for i, g in enumerate(gradient) if g)
    var = chart.vars[j]
    chart_map = None
    normalized = omega
    if divide_by_variable(f, var) is None:
        components = [
            f.scale(1 / gradient[j]) if i == j else TruncatedPoly.variable(chart, name, f.jet_order)
            for i, name in enumerate(chart.vars)
        ]
        chart_map = formal_inverse(PolyMapGerm(chart, chart, tuple(components)), omega.jet_order)
        normalized = pullback(chart_map, omega)
    sigma = pullback(inclusion(chart, var, normalized.jet_order + 1), normalized)
    logger.info(
        f"martinet: structurally_smooth=True normal_var={var} "
        f"chart_move={chart_map is not None} n={n}"
    )
    return MartinetData(f, True, sigma, Regime.STRUCTURALLY_SMOOTH, var, chart_map, normalized)


# --- Tangent vectors on Σ₂ ---


def hypersurface_to_ambient(data: MartinetData, vectors: Sequence[Sequence[Fraction]]) -> List[Vector]:
    """Push vectors of T₀Σ₂ (hypersurface chart) into T₀ of the original chart."""
    chart = data.f.chart
    j = chart.index(data.normal_var)
    lifted = [tuple(v[:j]) + (Fraction(0),) + tuple(v[j:]) for v in vectors]
    if data.chart_map is None:
        return lifted
    J = data.chart_map.linear_part()
    return [tuple(sum(J[r][c] * v[c] for c in range(chart.dim)) for r in range(chart.dim)) for v in lifted]


def kernel_of_power(omega: DiffForm) -> List[Vector]:
    """Canonical basis of ker(ω^(n-1)|₀)."""
    n = omega.chart.dim // 2
    if n < 2:
        raise PreconditionError("the kernel of ω^(n-1) needs dimension at least 4")
    return kernel_at_0(wedge_power(omega, n - 1))


def kernel_via_transversal(data: MartinetData) -> List[Vector]:
    """ker ι*(Y⌟ω^(n-1))|₀ for Y = ∂/∂(normal var), pushed back to T₀ of the original chart."""
    if not data.structurally_smooth:
        raise PreconditionError("transversal description needs a structurally smooth Σ₂")
    omega = data.normalized
    n = data.half_dim
    if n < 2:
        raise PreconditionError("the kernel of ω^(n-1) needs dimension at least 4")
    Y = PolyVectorField.coordinate(omega.chart, data.normal_var, omega.jet_order)
    contracted = interior(Y, wedge_power(omega, n - 1))
    restricted = pullback(inclusion(omega.chart, data.normal_var, omega.jet_order + 1), contracted)
    inside = kernel_at_0(restricted)
    return linalg.canonical_basis(hypersurface_to_ambient(data, inside), omega.chart.dim)


# --- Orientation ---


def default_frame(gradient: Sequence[Fraction], normal: int) -> List[Vector]:
    """Frame of ker df|₀ induced by the coordinates other than the normal one."""
    m = len(gradient)
    frame = []
    for i in range(m):
        if i == normal:
            continue
        v = [Fraction(0)] * m
        v[i] = Fraction(1)
        v[normal] = -gradient[i] / gradient[normal]
        frame.append(tuple(v))
    return frame


def orientation_sign(
    omega: DiffForm,
    reference: Optional[Sequence[Sequence[Fraction]]] = None,
    data: Optional[MartinetData] = None,
) -> int:
    """
    Sign of the canonical orientation of Σ₂ against a frame of T₀Σ₂.

    From df∧Ω_Σ₂ = ω^n/f, a tangent frame F is positive iff det[∇f(0), F] > 0.
    """
    data = data or martinet(omega)
    if not data.structurally_smooth:
        raise PreconditionError("orientation needs a structurally smooth Σ₂ at 0")
    gradient = data.f.linear_part()
    m = len(gradient)
    if reference is None:
        reference = default_frame(gradient, data.f.chart.index(data.normal_var))
    if len(reference) != m - 1:
        raise PreconditionError(f"reference frame needs {m - 1} vectors")
    for v in reference:
        if sum(g * Fraction(x) for g, x in zip(gradient, v)):
            raise PreconditionError("reference frame is not tangent to Σ₂")
    columns = [list(gradient)] + [[Fraction(x) for x in v] for v in reference]
    rows = [[columns[c][r] for c in range(m)] for r in range(m)]
    det = linalg.det(rows)
    if not det:
        raise PreconditionError("reference frame is degenerate")
    return 1 if det > 0 else -1


def compare_orientation(f0: TruncatedPoly, f1: TruncatedPoly) -> Optional[int]:
    """sign of (ω₁^n/ω₀^n)|₀ when f1 = u·f0 with u(0) ≠ 0; None when Σ₂ differ."""
    u = unit_ratio(f1, f0)
    if u is None:
        return None
    return 1 if u.constant_term() > 0 else -1


# --- Jet span and Σ₂₂ ---


def sigma_half_dim(sigma: DiffForm) -> int:
    if sigma.degree != 2:
        raise DegreeError(f"expected a 2-form, got degree {sigma.degree}")
    if sigma.chart.dim % 2 == 0:
        raise PreconditionError("σ lives on an odd-dimensional chart")
    return (sigma.chart.dim + 1) // 2


def dim_span_j1(sigma: DiffForm, n: Optional[int] = None) -> int:
    """dim span of the 1-jets at 0 of the coefficients of σ^(n-1)."""
    n = n or sigma_half_dim(sigma)
    if sigma.chart.dim != 2 * n - 1:
        raise PreconditionError(f"σ must live on a {2 * n - 1}-dimensional chart")
    rank = rank_at_0(sigma)
    if rank != 2 * n - 4:
        raise PreconditionError(f"rank σ|₀ = {rank}, need {2 * n - 4}")
    power = wedge_power(sigma, n - 1)
    return linalg.rank([c.linear_part() for c in power.coeffs.values()], sigma.chart.dim)


def sigma22_tangent_space(sigma: DiffForm) -> List[Vector]:
    """Zariski tangent space at 0 of Σ₂₂ = {σ^(n-1) = 0}, as vectors of T₀Σ₂."""
    n = sigma_half_dim(sigma)
    power = wedge_power(sigma, n - 1)
    if any(c.constant_term() for c in power.coeffs.values()):
        raise PreconditionError("0 is not a point of Σ₂₂")
    return linalg.nullspace([c.linear_part() for c in power.coeffs.values()], sigma.chart.dim)


def kernel_incidence(data: MartinetData, kernel: Sequence[Vector]) -> int:
    """dim(ker ω^(n-1)|₀ ∩ T₀Σ₂₂)."""
    tangent = hypersurface_to_ambient(data, sigma22_tangent_space(data.sigma))
    return linalg.intersection_dim(list(kernel), tangent, data.f.chart.dim)


# --- Annihilators of σ ---


@dataclass(frozen=True)
class Annihilator:
    alpha: Optional[DiffForm]
    degree: int


def _contact_value(alpha_low: Sequence[Fraction], chart: Chart, power0: DiffForm) -> Fraction:
    """(α∧dα∧σ^(n-2))|₀ from α(0) and the linear coefficients of α."""
    m = chart.dim
    alpha0 = DiffForm(chart, 1, 0, {(i,): alpha_low[i] for i in range(m) if alpha_low[i]})
    d_alpha = {}
    for i in range(m):
        for l in range(m):
            c = alpha_low[m + i * m + l]
            if c and l != i:
                d_alpha[(l, i)] = d_alpha.get((l, i), 0) + c
    dalpha0 = DiffForm(chart, 2, 0, d_alpha)
    return top_coefficient(wedge(wedge(alpha0, dalpha0), power0)).constant_term()


def find_annihilator(sigma: DiffForm, degree_bound: int = CONTACT_DEGREE_BOUND) -> Annihilator:
    """
    Polynomial α of degree ≤ D with α∧σ^(n-1) = 0 through the jet of σ and
    α∧dα∧σ^(n-2)|₀ ≠ 0, trying D = 1, 2, ... up to degree_bound.
    """
    n = sigma_half_dim(sigma)
    chart = sigma.chart
    m = chart.dim
    top = wedge_power(sigma, n - 1)
    power0 = wedge_power(sigma, n - 2).truncate(0)
    # top coefficient of dx_i∧σ^(n-1), one per i
    slots = [
        top_coefficient(wedge(DiffForm.basis(chart, v, top.jet_order), top)) for v in chart.vars
    ]
    limit = top.jet_order
    for D in range(1, degree_bound + 1):
        monos = monomials_up_to(m, D)
        ncols = m * len(monos)
        rows: Dict[Tuple[int, ...], Dict[int, Fraction]] = {}
        for i, t in enumerate(slots):
            for k, mu in enumerate(monos):
                col = i * len(monos) + k
                for e, c in t.terms.items():
                    key = tuple(a + b for a, b in zip(e, mu))
                    if sum(key) > limit:
                        continue
                    row = rows.setdefault(key, {})
                    row[col] = row.get(col, Fraction(0)) + c
        solutions = linalg.nullspace(list(rows.values()), ncols) if rows else [
            tuple(Fraction(int(c == j)) for c in range(ncols)) for j in range(ncols)
        ]
        # low data: α_i(0) then ∂α_i/∂x_l(0)
        low_cols = [i * len(monos) for i in range(m)]
        low_cols += [i * len(monos) + 1 + l for i in range(m) for l in range(m)]
        kept: List[Tuple[Fraction, ...]] = []
        kept_low: List[Tuple[Fraction, ...]] = []
        rank = 0
        for v in solutions:
            low = tuple(v[c] for c in low_cols)
            if not any(low):
                continue
            new_rank = linalg.rank(kept_low + [low], len(low))
            if new_rank > rank:
                kept.append(v)
                kept_low.append(low)
                rank = new_rank
        candidates = list(zip(kept, kept_low))
        for a in range(len(kept)):
            for b in range(a + 1, len(kept)):
                candidates.append(
                    (
                        tuple(x + y for x, y in zip(kept[a], kept[b])),
                        tuple(x + y for x, y in zip(kept_low[a], kept_low[b])),
                    )
                )
        for v, low in candidates:
            if _contact_value(low, chart, power0):
                coeffs = {}
                for i in range(m):
                    terms = {mu: v[i * len(monos) + k] for k, mu in enumerate(monos) if v[i * len(monos) + k]}
                    if terms:
                        coeffs[(i,)] = TruncatedPoly(chart, sigma.jet_order, terms)
                alpha = DiffForm(chart, 1, sigma.jet_order, coeffs)
                logger.info(f"annihilator: found degree={D} alpha={alpha}")
                return Annihilator(alpha, D)
    return Annihilator(None, degree_bound)


@dataclass(frozen=True)
class IdealData:
    generators: Tuple[TruncatedPoly, TruncatedPoly]
    verdict: RegularSequence
    alpha: DiffForm


def sigma_components(sigma: DiffForm) -> Tuple[TruncatedPoly, TruncatedPoly, TruncatedPoly]:
    """(a, b, c) with σ = a dy∧dz + b dz∧dx + c dx∧dy on a 3-dimensional chart."""
    return sigma.coeff((1, 2)), sigma.coeff((2, 0)), sigma.coeff((0, 1))


def ideal_I_sigma(
    sigma: DiffForm, degree_bound: int = CONTACT_DEGREE_BOUND, seed: int = 0
) -> IdealData:
    """
    Two generators of I(σ) = ⟨a, b, c⟩ and the regular-sequence verdict.

    A contact annihilator α gives α_x a + α_y b + α_z c = 0, so any coefficient
    whose α-component is a unit is redundant.
    """
    if sigma.chart.dim != 3:
        raise PreconditionError("I(σ) is computed on a 3-dimensional chart")
    found = find_annihilator(sigma, degree_bound)
    if found.alpha is None:
        raise InfeasibleError("no contact annihilator of σ found", order=degree_bound)
    a, b, c = sigma_components(sigma)
    alpha0 = [found.alpha.coeff((i,)).constant_term() for i in range(3)]
    if alpha0[2]:
        gens = (a, b)
    elif alpha0[0]:
        gens = (b, c)
    else:
        gens = (a, c)
    verdict = regular_sequence_check(gens[0], gens[1], REGULAR_SEQUENCE_TRIALS, seed=seed)
    logger.info(f"ideal_I_sigma: verdict={verdict.value} generators=({gens[0]}, {gens[1]})")
    return IdealData(gens, verdict, found.alpha)


# --- Kernel fields ---


class FieldStatus(str, Enum):
    EXISTS = "exists"
    OBSTRUCTED = "obstructed"
    OPEN = "open"


@dataclass(frozen=True)
class KernelField:
    status: FieldStatus
    order: int
    witness: Optional[PolyVectorField] = None

    def label(self) -> str:
        if self.status is FieldStatus.OBSTRUCTED:
            return f"obstructed_at_order {self.order}"
        if self.status is FieldStatus.OPEN:
            return f"open_up_to_order {self.order}"
        return "exists"


def _contraction_system(sigma: DiffForm, k: int, limit: int):
    chart = sigma.chart
    m = chart.dim
    monos = monomials_up_to(m, k)
    rows: Dict[Tuple[int, Tuple[int, ...]], Dict[int, Fraction]] = {}
    for i in range(m):
        e_i = PolyVectorField.coordinate(chart, chart.vars[i], sigma.jet_order)
        contracted = interior(e_i, sigma)
        for (slot,), coeff in contracted.coeffs.items():
            for idx, mu in enumerate(monos):
                col = i * len(monos) + idx
                for e, c in coeff.terms.items():
                    key = tuple(a + b for a, b in zip(e, mu))
                    if sum(key) > limit:
                        continue
                    row = rows.setdefault((slot, key), {})
                    row[col] = row.get(col, Fraction(0)) + c
    return monos, list(rows.values())


def kernel_field_search(sigma: DiffForm, max_order: int = KERNEL_FIELD_MAX_ORDER) -> KernelField:
    """
    Search a polynomial X with X⌟σ = 0 and X(0) ≠ 0, order by order.

    At order k the k-jet of any such field kills σ through degree k + ord σ, so an
    empty projection onto X(0) there certifies that no field exists.
    """
    if sigma.degree != 2:
        raise DegreeError(f"expected a 2-form, got degree {sigma.degree}")
    chart = sigma.chart
    m = chart.dim
    if sigma.is_zero():
        return KernelField(FieldStatus.EXISTS, 0, PolyVectorField.coordinate(chart, chart.vars[0], sigma.jet_order))
    s = sigma.order()
    top_order = max(0, min(max_order, sigma.jet_order - s))
    for k in range(top_order + 1):
        monos, rows = _contraction_system(sigma, k, k + s)
        ncols = m * len(monos)
        constant_cols = [i * len(monos) for i in range(m)]
        basis = linalg.nullspace(rows, ncols)
        if not any(any(v[c] for c in constant_cols) for v in basis):
            logger.info(f"kernel_field: obstructed order={k}")
            return KernelField(FieldStatus.OBSTRUCTED, k)
        monos, rows = _contraction_system(sigma, k, sigma.jet_order)
        exact = linalg.nullspace(rows, ncols)
        for v in exact:
            if any(v[c] for c in constant_cols):
                components = []
                for i in range(m):
                    terms = {mu: v[i * len(monos) + idx] for idx, mu in enumerate(monos)}
                    components.append(TruncatedPoly(chart, sigma.jet_order, terms))
                logger.info(f"kernel_field: exists order={k}")
                return KernelField(FieldStatus.EXISTS, k, PolyVectorField(chart, tuple(components)))
    return KernelField(FieldStatus.OPEN, top_order)


# --- Σ₂₂₀ classification ---


@dataclass(frozen=True)
class Sigma22Data:
    discriminant: Fraction
    label: str
    template: bool = False


def _matches_template(sigma: DiffForm) -> bool:
    """σ = (dy₃ + y₁dy₂)∧(b dy₁ − a dy₂) + Σ dx_(2k-1)∧dx_(2k) in chart (y₁, y₂, y₃, x...)."""
    chart = sigma.chart
    y1 = TruncatedPoly.variable(chart, chart.vars[0], sigma.jet_order)
    b = -sigma.coeff((0, 2))
    if sigma.coeff((0, 1)) != -(y1 * b):
        return False
    expected = {(0, 1), (0, 2), (1, 2)}
    for k in range(3, chart.dim, 2):
        if sigma.coeff((k, k + 1)) != 1:
            return False
        expected.add((k, k + 1))
    return all(index in expected for index in sigma.coeffs)


def classify_sigma220(sigma: DiffForm) -> Sigma22Data:
    """
    Hyperbolic / elliptic Σ₂₂₀ or parabolic Σ₂₂₁ at 0. Needs Σ₂₂ to be a smooth
    curve, i.e. dim span j¹σ^(n-1) = 2.

    With σ^(n-1) = X⌟vol, X vanishes at 0 and DX(0) has eigenvalues 0 and ±λ; the
    discriminant is λ² = −(sum of principal 2×2 minors of DX(0)), divided by
    ((n-1)!)². On the template it equals (∂b/∂y₂)² + ∂b/∂y₁·∂a/∂y₂ at 0.
    """
    n = sigma_half_dim(sigma)
    if n < 2:
        raise PreconditionError("classification needs σ on at least 3 variables")
    rank = rank_at_0(sigma)
    if rank != 2 * n - 4:
        raise PreconditionError(f"template mismatch: rank σ|₀ = {rank}, need {2 * n - 4}")
    span = dim_span_j1(sigma, n)
    if span < 2:
        raise PreconditionError(f"template mismatch: dim span j¹σ^(n-1) = {span}, Σ₂₂ is not a smooth curve")
    chart = sigma.chart
    m = chart.dim
    power = wedge_power(sigma, n - 1)
    field_components = []
    for i in range(m):
        rest = tuple(j for j in range(m) if j != i)
        c = power.coeff(rest)
        field_components.append(c if i % 2 == 0 else -c)
    jac = [[partial(x, v).constant_term() for v in chart.vars] for x in field_components]
    minors = Fraction(0)
    for i in range(m):
        for j in range(i + 1, m):
            minors += jac[i][i] * jac[j][j] - jac[i][j] * jac[j][i]
    discriminant = -minors / (math.factorial(n - 1) ** 2)
    if discriminant > 0:
        label = "hyperbolic"
    elif discriminant < 0:
        label = "elliptic"
    else:
        label = "parabolic"
    template = _matches_template(sigma)
    logger.info(f"classify: label={label} discriminant={discriminant} template={template}")
    return Sigma22Data(discriminant, label, template)


# --- Full report ---


@dataclass(frozen=True)
class InvariantReport:
    martinet: MartinetData
    regime: str
    rank_sigma_0: Optional[int] = None
    kernel_basis: Optional[List[Vector]] = None
    kernel_cross_check: Optional[bool] = None
    orientation_sign: Optional[int] = None
    dim_span_j1: Optional[int] = None
    sigma22_incidence: Optional[int] = None
    ideal_verdict: Optional[RegularSequence] = None
    kernel_field: Optional[KernelField] = None
    classification: Optional[Sigma22Data] = None
    undefined: Dict[str, str] = field(default_factory=dict)


def full_report(omega: DiffForm, seed: int = 0) -> InvariantReport:
    data = martinet(omega)
    n = data.half_dim
    undefined: Dict[str, str] = {}
    kernel = None
    if n >= 2:
        kernel = kernel_of_power(omega)
    else:
        undefined["kernel_basis"] = "dimension 2 has no ω^(n-1) kernel"
    if data.regime is Regime.NONSINGULAR:
        for name in ("rank_sigma_0", "orientation_sign", "dim_span_j1", "ideal_verdict", "kernel_field", "classification"):
            undefined[name] = "non-singular: Σ₂ is empty at 0"
        return InvariantReport(data, "nonsingular", kernel_basis=kernel, undefined=undefined)
    if data.regime is Regime.SINGULAR:
        for name in ("rank_sigma_0", "orientation_sign", "dim_span_j1", "ideal_verdict", "kernel_field", "classification"):
            undefined[name] = "Σ₂ is singular at 0"
        return InvariantReport(data, "singular", kernel_basis=kernel, undefined=undefined)

    sigma = data.sigma
    rank = rank_at_0(sigma)
    orientation = orientation_sign(omega, data=data)
    cross_check = None
    if kernel is not None and rank == 2 * n - 4:
        cross_check = kernel_via_transversal(data) == kernel
        if not cross_check:
            logger.warning("full_report: transversal kernel disagrees with direct kernel")
    if rank == 2 * n - 2:
        for name in ("dim_span_j1", "ideal_verdict", "kernel_field", "classification"):
            undefined[name] = "Σ₂₀ regime, out of kernel-invariant scope"
        return InvariantReport(
            data,
            "sigma20",
            rank,
            kernel,
            cross_check,
            orientation,
            undefined=undefined,
        )

    span = incidence = ideal = kfield = label = None
    if rank == 2 * n - 4:
        span = dim_span_j1(sigma, n)
        if span == 2:
            label = classify_sigma220(sigma)
        else:
            undefined["classification"] = f"dim span j¹σ^(n-1) = {span}, Σ₂₂ is not a smooth curve"
    else:
        undefined["dim_span_j1"] = f"rank σ|₀ = {rank} ≠ {2 * n - 4}"
        undefined["classification"] = f"rank σ|₀ = {rank} ≠ {2 * n - 4}"
    if kernel is not None:
        incidence = kernel_incidence(data, kernel)
    if n == 2 and rank == 0:
        kfield = kernel_field_search(sigma)
        try:
            ideal = ideal_I_sigma(sigma, seed=seed).verdict
        except InfeasibleError as exc:
            undefined["ideal_verdict"] = str(exc)
    else:
        undefined["ideal_verdict"] = "I(σ) is defined for n = 2 with rank σ|₀ = 0"
        undefined["kernel_field"] = "kernel fields are searched for n = 2 with rank σ|₀ = 0"
    return InvariantReport(
        data,
        "structurally_smooth",
        rank,
        kernel,
        cross_check,
        orientation,
        span,
        incidence,
        ideal,
        kfield,
        label,
        undefined,
    )
