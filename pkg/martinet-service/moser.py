"""
Martinet Engine - Moser Flows

Numerical verification of the Moser method. The symbolic data of a problem
(primitive η = divisor·κ with dη = ω₁ − ω₀, the divided density g_t and the
numerators of V_t) is computed exactly once; the field, its Jacobian and the
pullback residual are then evaluated with numpy.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DENSITY_FLOOR,
    JACOBIAN_DET_FLOOR,
    MOSER_BOX,
    MOSER_GRID,
    MOSER_STEPS,
    MOSER_TOL,
    MOSER_TRUST_FACTOR,
)
from errors import ChartMismatchError, FlowError, PreconditionError, SingularSystemError
from exterior import DiffForm, PolyMapGerm, ext_d, pullback, top_coefficient, wedge, wedge_power
from invariants import martinet, martinet_function, require_closed_two_form
from normal_form import (
    contact_constants,
    decompose_normalized,
    lift_from_hypersurface,
    relative_primitive_p1,
    singular_primitive,
    times_function,
    times_variable,
)
from scalar_poly import Chart, TruncatedPoly, divide_by_variable, divide_local, partial

# --- Logging ---
logger = logging.getLogger(__name__)


class Bridge(str, Enum):
    REL_DARBOUX = "rel_darboux"
    FOURDIM_B = "fourdim_b"
    SING = "sing"


class PolyBundle:
    """Polynomials on one chart compiled to an exponent matrix for batched evaluation."""

    def __init__(self, chart: Chart, polys: Sequence[TruncatedPoly]):
        exponents = sorted({e for p in polys for e in p.terms}) or [(0,) * chart.dim]
        row = {e: k for k, e in enumerate(exponents)}
        self.exponents = np.array(exponents, dtype=np.int64).reshape(len(exponents), chart.dim)
        self.coeffs = np.zeros((len(exponents), len(polys)))
        for j, p in enumerate(polys):
            for e, c in p.terms.items():
                self.coeffs[row[e], j] = float(c)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """(S, m) points to (S, P) values."""
        monomials = np.prod(points[:, None, :] ** self.exponents[None, :, :], axis=2)
        return monomials @ self.coeffs


def _pairs(m: int) -> List[Tuple[int, int]]:
    return list(itertools.combinations(range(m), 2))


def _form_matrices(values: np.ndarray, m: int) -> np.ndarray:
    """(S, #pairs) coefficients of a 2-form to (S, m, m) antisymmetric matrices."""
    W = np.zeros((values.shape[0], m, m))
    for k, (i, j) in enumerate(_pairs(m)):
        W[:, i, j] = values[:, k]
        W[:, j, i] = -values[:, k]
    return W


@dataclass
class MoserProblem:
    """
    ω_t = ω₀ + t(ω₁ − ω₀) with η = divisor·κ, dη = ω₁ − ω₀ and V_t⌟ω_t = −η.

    ω_t^n = divisor·g_t·Ω with g_t = Σ t^k q_k divided exactly; V_t solves
    V_t⌟(g_t·Ω) = −n κ∧ω_t^(n-1).
    """

    omega0: DiffForm
    omega1: DiffForm
    bridge: Bridge
    divisor: TruncatedPoly
    kappa: DiffForm
    box: float = MOSER_BOX
    scaling: Optional[Fraction] = None
    density: List[TruncatedPoly] = field(init=False, repr=False)
    numerators: List[List[TruncatedPoly]] = field(init=False, repr=False)

    def __post_init__(self):
        chart = self.omega0.chart
        if self.omega1.chart != chart or self.kappa.chart != chart or self.divisor.chart != chart:
            raise ChartMismatchError("ω₀, ω₁, κ and the divisor must share one chart")
        self.n = require_closed_two_form(self.omega0)
        require_closed_two_form(self.omega1)
        delta = self.omega1 - self.omega0
        if ext_d(times_function(self.kappa, self.divisor)) != delta:
            raise PreconditionError("d(divisor·κ) differs from ω₁ − ω₀")
        n, m = self.n, chart.dim
        self.density = []
        for k in range(n + 1):
            top = top_coefficient(wedge(wedge_power(self.omega0, n - k), wedge_power(delta, k)))
            q = divide_local(top.scale(comb(n, k)), self.divisor)
            if q is None:
                raise PreconditionError(f"divisor does not divide the t^{k} term of ω_t^n")
            self.density.append(q)
        self.numerators = []
        for k in range(n):
            power = wedge(wedge_power(self.omega0, n - 1 - k), wedge_power(delta, k))
            rhs = wedge(self.kappa, power) * Fraction(-n * comb(n - 1, k))
            row = []
            for i in range(m):
                c = rhs.coeff(tuple(j for j in range(m) if j != i))
                row.append(c if i % 2 == 0 else -c)
            self.numerators.append(row)
        polys: List[TruncatedPoly] = []
        for row in self.numerators:
            for c in row:
                polys.append(c)
                polys.extend(partial(c, v) for v in chart.vars)
        for q in self.density:
            polys.append(q)
            polys.extend(partial(q, v) for v in chart.vars)
        self._field_bundle = PolyBundle(chart, polys)
        pairs = _pairs(m)
        self._omega_bundle = PolyBundle(
            chart,
            [self.omega0.coeff(p) for p in pairs] + [self.omega1.coeff(p) for p in pairs],
        )
        eta = times_function(self.kappa, self.divisor)
        self._eta_bundle = PolyBundle(chart, [eta.coeff((i,)) for i in range(m)])
        logger.info(f"moser: bridge={self.bridge.value} n={n} divisor={self.divisor} scaling={self.scaling}")

    @property
    def dim(self) -> int:
        return self.omega0.chart.dim

    def field_and_jacobian(self, t: float, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """V_t and DV_t at (S, m) points."""
        n, m = self.n, self.dim
        S = points.shape[0]
        values = self._field_bundle(points)
        split = n * m * (m + 1)
        num = values[:, :split].reshape(S, n, m, m + 1)
        den = values[:, split:].reshape(S, n + 1, m + 1)
        R = np.einsum("skil,k->sil", num, float(t) ** np.arange(n))
        G = np.einsum("skl,k->sl", den, float(t) ** np.arange(n + 1))
        g = G[:, 0]
        smallest = float(np.min(np.abs(g)))
        if smallest < DENSITY_FLOOR:
            raise SingularSystemError(f"divided density vanishes: min |g_t| = {smallest:.3e}", density=smallest)
        V = R[:, :, 0] / g[:, None]
        DV = (R[:, :, 1:] * g[:, None, None] - R[:, :, :1] * G[:, None, 1:]) / (g**2)[:, None, None]
        return V, DV

    def omega_matrices(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        values = self._omega_bundle(points)
        half = values.shape[1] // 2
        return _form_matrices(values[:, :half], self.dim), _form_matrices(values[:, half:], self.dim)

    def eta(self, points: np.ndarray) -> np.ndarray:
        return self._eta_bundle(points)


# --- Problem builders ---


def rel_darboux_problem(omega0: DiffForm, omega1: DiffForm, var: str = "p1", box: float = MOSER_BOX) -> MoserProblem:
    """η = var²·β with β from the relative primitive of ω₁ − ω₀."""
    beta = relative_primitive_p1(omega1 - omega0, var)
    chart = omega0.chart
    f0 = martinet_function(omega0)
    if f0.constant_term():
        divisor = TruncatedPoly.constant(chart, 1, f0.jet_order)
        kappa = times_variable(beta, var, 2)
    elif divide_by_variable(f0, var) is not None:
        divisor = TruncatedPoly.variable(chart, var, f0.jet_order)
        kappa = times_variable(beta, var, 1)
    else:
        raise PreconditionError(f"Σ₂ of ω₀ is not {{{var} = 0}}")
    return MoserProblem(omega0, omega1, Bridge.REL_DARBOUX, divisor, kappa, box)


def fourdim_b_problem(omega0: DiffForm, omega1: DiffForm, box: float = MOSER_BOX) -> MoserProblem:
    """
    η = p·π*(α₁ − α₀) + p²(θ₁ − θ₀) for two forms sharing σ on Σ₂ = {p = 0},
    after rescaling p ↦ p/B in ω₁ so that α₁|₀∧σ^(n-2)|₀ = α₀|₀∧σ^(n-2)|₀.
    """
    data = martinet(omega0)
    if not data.structurally_smooth or data.chart_map is not None:
        raise PreconditionError("ω₀ must have Σ₂ = {p = 0} for a coordinate p of its chart")
    n, var = data.half_dim, data.normal_var
    chart = omega0.chart
    d0 = decompose_normalized(omega0, var, n)
    d1 = decompose_normalized(omega1, var, n)
    if d1.sigma != d0.sigma:
        raise PreconditionError("restrictions to Σ₂ differ")
    constants = contact_constants(d0, d1, n)
    if not constants.aligned or not constants.B:
        raise PreconditionError("α₁|₀∧α₀|₀∧σ^(n-2)|₀ ≠ 0")
    if constants.A is None or constants.A <= 0:
        raise PreconditionError(f"A = {constants.A}: the path ω_t degenerates")
    scaling = None
    if constants.B != 1:
        scaling = constants.B
        j = chart.index(var)
        matrix = [[Fraction(0)] * chart.dim for _ in range(chart.dim)]
        for i in range(chart.dim):
            matrix[i][i] = 1 / scaling if i == j else Fraction(1)
        S = PolyMapGerm.linear(chart, chart, matrix, omega1.jet_order + 1)
        omega1 = pullback(S, omega1)
        d1 = decompose_normalized(omega1, var, n)
    difference = lift_from_hypersurface(d1.alpha - d0.alpha, chart, var)
    kappa = difference + times_variable(d1.theta - d0.theta, var, 1)
    divisor = TruncatedPoly.variable(chart, var, omega0.jet_order)
    return MoserProblem(omega0, omega1, Bridge.FOURDIM_B, divisor, kappa, box, scaling)


def sing_problem(
    omega0: DiffForm, omega1: DiffForm, weights: Optional[Sequence[int]] = None, box: float = MOSER_BOX
) -> MoserProblem:
    """η = f·α with ω₁ − ω₀ = d(f·α)."""
    f = martinet_function(omega0)
    alpha = singular_primitive(omega0, omega1, f, weights)
    return MoserProblem(omega0, omega1, Bridge.SING, f, alpha, box)


def build_problem(omega0: DiffForm, omega1: DiffForm, bridge: Bridge, box: float = MOSER_BOX) -> MoserProblem:
    bridge = Bridge(bridge)
    if bridge is Bridge.REL_DARBOUX:
        return rel_darboux_problem(omega0, omega1, box=box)
    if bridge is Bridge.FOURDIM_B:
        return fourdim_b_problem(omega0, omega1, box=box)
    return sing_problem(omega0, omega1, box=box)


# --- Field ---


def build_field(problem: MoserProblem, t: float, x: Sequence[float]) -> np.ndarray:
    """V_t(x) for a point inside the trust region."""
    point = np.asarray(x, dtype=float).reshape(1, problem.dim)
    if np.max(np.abs(point)) > problem.box:
        raise FlowError(f"point {tuple(point[0])} is outside the trust region |x| ≤ {problem.box}")
    V, _ = problem.field_and_jacobian(t, point)
    return V[0]


def defining_residual(problem: MoserProblem, t: float, points: np.ndarray) -> np.ndarray:
    """|V_t⌟ω_t + η| per point, relative to max(1, |η|)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    V, _ = problem.field_and_jacobian(t, points)
    W0, W1 = problem.omega_matrices(points)
    contracted = np.einsum("si,sij->sj", V, W0 + t * (W1 - W0))
    eta = problem.eta(points)
    scale = np.maximum(1.0, np.max(np.abs(eta), axis=1))
    return np.max(np.abs(contracted + eta), axis=1) / scale


# --- Integration ---


@dataclass(frozen=True, eq=False)
class FlowSample:
    start: Tuple[float, ...]
    end: Tuple[float, ...]
    trajectory: np.ndarray
    jacobian: np.ndarray
    residual: float
    min_det: float
    degenerate: bool
    passed: bool

    @property
    def displacement(self) -> float:
        return float(np.max(np.abs(np.subtract(self.end, self.start))))


def grid_samples(dim: int, box: float = MOSER_BOX, grid: int = MOSER_GRID) -> np.ndarray:
    axis = np.linspace(-box, box, grid)
    return np.array(list(itertools.product(axis, repeat=dim)))


def rk4_step(rhs, t: float, h: float, y: np.ndarray) -> np.ndarray:
    k1 = h * rhs(t, y)
    k2 = h * rhs(t + 0.5 * h, y + 0.5 * k1)
    k3 = h * rhs(t + 0.5 * h, y + 0.5 * k2)
    k4 = h * rhs(t + h, y + k3)
    return y + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def integrate_and_verify(
    problem: MoserProblem,
    samples: Optional[np.ndarray] = None,
    steps: int = MOSER_STEPS,
    tol: float = MOSER_TOL,
) -> List[FlowSample]:
    """
    Integrate dΦ/dt = V_t(Φ) with dJ/dt = DV_t(Φ)·J from t = 0 to 1 and check
    Jᵀ·ω₁(Φ₁(x))·J = ω₀(x) entrywise at every sample.
    """
    if steps < 1:
        raise PreconditionError("steps must be at least 1")
    m = problem.dim
    starts = grid_samples(m, problem.box) if samples is None else np.atleast_2d(np.asarray(samples, dtype=float))
    if starts.shape[1] != m:
        raise PreconditionError(f"samples must have {m} coordinates")
    if np.max(np.abs(starts)) > problem.box:
        raise PreconditionError(f"samples must lie in the box |x| ≤ {problem.box}")
    S = starts.shape[0]
    trust = problem.box * MOSER_TRUST_FACTOR

    def rhs(t: float, state: np.ndarray) -> np.ndarray:
        V, DV = problem.field_and_jacobian(t, state[:, :m])
        J = state[:, m:].reshape(S, m, m)
        return np.hstack([V, (DV @ J).reshape(S, m * m)])

    state = np.hstack([starts, np.tile(np.eye(m).ravel(), (S, 1))])
    h = 1.0 / steps
    path = [starts.copy()]
    min_det = np.ones(S)
    for step in range(steps):
        state = rk4_step(rhs, step * h, h, state)
        if not np.all(np.isfinite(state)):
            raise FlowError(f"non-finite state at t={(step + 1) * h:.4f}")
        Y = state[:, :m]
        if np.max(np.abs(Y)) > trust:
            raise FlowError(f"trajectory left the trust region |x| ≤ {trust} at t={(step + 1) * h:.4f}")
        min_det = np.minimum(min_det, np.abs(np.linalg.det(state[:, m:].reshape(S, m, m))))
        path.append(Y.copy())

    ends = state[:, :m]
    J = state[:, m:].reshape(S, m, m)
    W0, _ = problem.omega_matrices(starts)
    _, W1 = problem.omega_matrices(ends)
    pulled = np.einsum("sai,sab,sbj->sij", J, W1, J)
    residuals = np.max(np.abs(pulled - W0), axis=(1, 2))
    trajectories = np.stack(path, axis=1)
    out = []
    for s in range(S):
        degenerate = bool(min_det[s] < JACOBIAN_DET_FLOOR)
        out.append(
            FlowSample(
                start=tuple(float(v) for v in starts[s]),
                end=tuple(float(v) for v in ends[s]),
                trajectory=trajectories[s],
                jacobian=J[s],
                residual=float(residuals[s]),
                min_det=float(min_det[s]),
                degenerate=degenerate,
                passed=bool(residuals[s] <= tol) and not degenerate,
            )
        )
    logger.info(
        f"moser: samples={S} steps={steps} max_residual={float(np.max(residuals)):.3e} "
        f"degenerate={int(np.sum(min_det < JACOBIAN_DET_FLOOR))}"
    )
    return out


@dataclass(frozen=True)
class FlowSummary:
    samples: int
    passed: int
    degenerate: int
    max_residual: float
    max_displacement: float
    steps: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.passed == self.samples


def summarize(samples: Sequence[FlowSample], steps: int, tol: float) -> FlowSummary:
    return FlowSummary(
        samples=len(samples),
        passed=sum(1 for s in samples if s.passed),
        degenerate=sum(1 for s in samples if s.degenerate),
        max_residual=max((s.residual for s in samples), default=0.0),
        max_displacement=max((s.displacement for s in samples), default=0.0),
        steps=steps,
        tol=tol,
    )
