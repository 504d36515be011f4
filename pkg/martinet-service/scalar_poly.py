"""
Martinet Engine - Truncated Polynomials

Exact multivariate polynomials over QQ carrying a reliable jet order, plus the
local-algebra kernels built on them: quasi-homogeneity, Euler fields, Nakayama
ideal checks, regular sequences and division in the local ring.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import linalg
from config import NAKAYAMA_MAX_POWER, RANDOM_LINEAR_FORM_RANGE, REGULAR_SEQUENCE_TRIALS
from errors import ChartMismatchError, DegreeError, PreconditionError, UnknownVariableError

# --- Logging ---
logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names, optionally with positive integer weights."""

    vars: Tuple[str, ...]
    weights: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise PreconditionError(f"duplicate variable names in chart {self.vars}")
        if self.weights is not None:
            weights = tuple(int(w) for w in self.weights)
            if len(weights) != len(self.vars):
                raise PreconditionError("one weight per variable is required")
            if any(w < 1 for w in weights):
                raise PreconditionError("weights must be positive integers")
            object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return len(self.vars)

    def index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable '{name}' in chart {self.vars}") from None

    def without(self, name: str) -> "Chart":
        i = self.index(name)
        weights = None
        if self.weights is not None:
            weights = self.weights[:i] + self.weights[i + 1 :]
        return Chart(self.vars[:i] + self.vars[i + 1 :], weights)

    def __str__(self) -> str:
        return " ".join(self.vars)


# --- Monomial helpers ---


def monomials_of_degree(nvars: int, degree: int) -> List[Exponent]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for i in combo:
            exps[i] += 1
        out.append(tuple(exps))
    return out


def monomials_up_to(nvars: int, degree: int) -> List[Exponent]:
    out: List[Exponent] = []
    for d in range(degree + 1):
        out.extend(monomials_of_degree(nvars, d))
    return out


def _add_exps(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def _mul_terms(a: Mapping[Exponent, Fraction], b: Mapping[Exponent, Fraction], max_degree: int):
    """Product of two term maps, dropping everything above max_degree."""
    out: Dict[Exponent, Fraction] = {}
    b_items = sorted(((sum(e), e, c) for e, c in b.items()), key=lambda t: t[0])
    for ea, ca in a.items():
        da = sum(ea)
        if da > max_degree:
            continue
        for db, eb, cb in b_items:
            if da + db > max_degree:
                break
            key = _add_exps(ea, eb)
            value = out.get(key, 0) + ca * cb
            if value:
                out[key] = value
            else:
                out.pop(key, None)
    return out


def _coerce(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"unsupported scalar {value!r}")


class TruncatedPoly:
    """Polynomial over QQ in the variables of a chart, exact through degree jet_order."""

    __slots__ = ("chart", "jet_order", "terms")

    def __init__(
        self, chart: Chart, jet_order: int, terms: Optional[Mapping[Exponent, Scalar]] = None
    ):
        if jet_order < 0:
            raise DegreeError(f"jet order must be non-negative, got {jet_order}")
        clean: Dict[Exponent, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != chart.dim or any(e < 0 for e in exps):
                raise DegreeError(f"bad exponent {exps} for chart {chart.vars}")
            if sum(exps) > jet_order:
                continue
            coeff = _coerce(coeff)
            if coeff:
                clean[exps] = clean.get(exps, 0) + coeff
        self._set(chart, jet_order, {e: c for e, c in clean.items() if c})

    def _set(self, chart, jet_order, terms):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "jet_order", jet_order)
        object.__setattr__(self, "terms", MappingProxyType(terms))

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedPoly is immutable")

    @classmethod
    def _make(cls, chart: Chart, jet_order: int, terms: Dict[Exponent, Fraction]):
        poly = object.__new__(cls)
        poly._set(chart, jet_order, terms)
        return poly

    # --- Constructors ---

    @classmethod
    def zero(cls, chart: Chart, jet_order: int) -> "TruncatedPoly":
        return cls._make(chart, jet_order, {})

    @classmethod
    def constant(cls, chart: Chart, value: Scalar, jet_order: int) -> "TruncatedPoly":
        value = _coerce(value)
        return cls._make(chart, jet_order, {(0,) * chart.dim: value} if value else {})

    @classmethod
    def variable(cls, chart: Chart, name: str, jet_order: int) -> "TruncatedPoly":
        exps = [0] * chart.dim
        exps[chart.index(name)] = 1
        return cls(chart, jet_order, {tuple(exps): 1})

    @classmethod
    def linear(cls, chart: Chart, coeffs: Sequence[Scalar], jet_order: int) -> "TruncatedPoly":
        terms = {}
        for i, c in enumerate(coeffs):
            exps = [0] * chart.dim
            exps[i] = 1
            terms[tuple(exps)] = c
        return cls(chart, jet_order, terms)

    # --- Inspection ---

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.chart.dim, Fraction(0))

    def linear_part(self) -> Tuple[Fraction, ...]:
        out = [Fraction(0)] * self.chart.dim
        for exps, c in self.terms.items():
            if sum(exps) == 1:
                out[exps.index(1)] = c
        return tuple(out)

    def order(self) -> Optional[int]:
        """Lowest total degree present, None for the zero polynomial."""
        if not self.terms:
            return None
        return min(sum(e) for e in self.terms)

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def homogeneous(self, degree: int) -> "TruncatedPoly":
        return TruncatedPoly._make(
            self.chart, self.jet_order, {e: c for e, c in self.terms.items() if sum(e) == degree}
        )

    def truncate(self, jet_order: int) -> "TruncatedPoly":
        n = min(jet_order, self.jet_order)
        return TruncatedPoly._make(
            self.chart, n, {e: c for e, c in self.terms.items() if sum(e) <= n}
        )

    def evaluate(self, point: Sequence) -> Union[Fraction, float]:
        total = 0
        for exps, c in self.terms.items():
            value = c if not isinstance(point[0], float) else float(c)
            for x, e in zip(point, exps):
                if e:
                    value = value * x**e
            total = total + value
        return total

    # --- Arithmetic ---

    def _check(self, other: "TruncatedPoly"):
        if self.chart != other.chart:
            raise ChartMismatchError(f"chart {self.chart.vars} != {other.chart.vars}")

    def _lift(self, other) -> "TruncatedPoly":
        if isinstance(other, TruncatedPoly):
            self._check(other)
            return other
        return TruncatedPoly.constant(self.chart, _coerce(other), self.jet_order)

    def __add__(self, other) -> "TruncatedPoly":
        other = self._lift(other)
        n = min(self.jet_order, other.jet_order)
        out = {e: c for e, c in self.terms.items() if sum(e) <= n}
        for e, c in other.terms.items():
            if sum(e) > n:
                continue
            value = out.get(e, 0) + c
            if value:
                out[e] = value
            else:
                out.pop(e, None)
        return TruncatedPoly._make(self.chart, n, out)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedPoly":
        return TruncatedPoly._make(self.chart, self.jet_order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "TruncatedPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "TruncatedPoly":
        return (-self) + other

    def scale(self, factor: Scalar) -> "TruncatedPoly":
        factor = _coerce(factor)
        if not factor:
            return TruncatedPoly.zero(self.chart, self.jet_order)
        return TruncatedPoly._make(
            self.chart, self.jet_order, {e: c * factor for e, c in self.terms.items()}
        )

    def __mul__(self, other) -> "TruncatedPoly":
        if not isinstance(other, TruncatedPoly):
            return self.scale(other)
        self._check(other)
        n = min(self.jet_order, other.jet_order)
        return TruncatedPoly._make(self.chart, n, _mul_terms(self.terms, other.terms, n))

    def __rmul__(self, other) -> "TruncatedPoly":
        return self.scale(other)

    def __truediv__(self, other: Scalar) -> "TruncatedPoly":
        return self.scale(1 / _coerce(other))

    def __pow__(self, k: int) -> "TruncatedPoly":
        if k < 0:
            raise DegreeError("negative powers are not polynomials")
        low = self.order()
        if k and (low is None or (low > 0 and low * k > self.jet_order)):
            return TruncatedPoly.zero(self.chart, self.jet_order)
        result = TruncatedPoly.constant(self.chart, 1, self.jet_order)
        base = self
        # square and multiply
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedPoly):
            try:
                other = self._lift(other)
            except TypeError:
                return NotImplemented
        if self.chart != other.chart:
            return False
        n = min(self.jet_order, other.jet_order)
        mine = {e: c for e, c in self.terms.items() if sum(e) <= n}
        theirs = {e: c for e, c in other.terms.items() if sum(e) <= n}
        return mine == theirs

    __hash__ = None

    def __repr__(self) -> str:
        return f"TruncatedPoly({format_poly(self)}, jet={self.jet_order})"

    def __str__(self) -> str:
        return format_poly(self)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_poly(p: TruncatedPoly) -> str:
    """Text in the form-file syntax, highest degree last."""
    if p.is_zero():
        return "0"
    pieces = []
    for exps in sorted(p.terms, key=lambda e: (sum(e), tuple(-x for x in e))):
        c = p.terms[exps]
        factors = []
        for name, e in zip(p.chart.vars, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}**{e}")
        magnitude = abs(c)
        if not factors:
            body = format_rational(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([format_rational(magnitude)] + factors)
        pieces.append(("-" if c < 0 else "+", body))
    sign, body = pieces[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


# --- Operations ---


class ArithKind(str, Enum):
    ADD = "add"
    MUL = "mul"


def poly_arith(p: TruncatedPoly, q: TruncatedPoly, kind: Union[ArithKind, str]) -> TruncatedPoly:
    kind = ArithKind(kind)
    if kind is ArithKind.ADD:
        return p + q
    return p * q


def partial(p: TruncatedPoly, var: str) -> TruncatedPoly:
    i = p.chart.index(var)
    out: Dict[Exponent, Fraction] = {}
    for exps, c in p.terms.items():
        if exps[i]:
            new = list(exps)
            new[i] -= 1
            out[tuple(new)] = c * exps[i]
    return TruncatedPoly(p.chart, max(p.jet_order - 1, 0), out)


def formal_integral(p: TruncatedPoly, var: str) -> TruncatedPoly:
    """Antiderivative in var with zero constant of integration, clamped to the input jet."""
    i = p.chart.index(var)
    out: Dict[Exponent, Fraction] = {}
    for exps, c in p.terms.items():
        new = list(exps)
        new[i] += 1
        out[tuple(new)] = c / new[i]
    return TruncatedPoly(p.chart, p.jet_order, out)


def compose(p: TruncatedPoly, subs: Sequence[TruncatedPoly], source: Chart) -> TruncatedPoly:
    """p(subs[0], ..., subs[m-1]) for substitutions without constant terms."""
    if len(subs) != p.chart.dim:
        raise ChartMismatchError("one substitution per variable is required")
    for s in subs:
        if s.chart != source:
            raise ChartMismatchError(f"substitution chart {s.chart.vars} != {source.vars}")
        if s.constant_term():
            raise PreconditionError("substitutions must vanish at the origin")
    n = min([p.jet_order] + [s.jet_order for s in subs])
    powers: Dict[Tuple[int, int], Dict[Exponent, Fraction]] = {}

    def power(i: int, k: int):
        if k == 0:
            return {(0,) * source.dim: Fraction(1)}
        key = (i, k)
        if key not in powers:
            powers[key] = _mul_terms(power(i, k - 1), subs[i].terms, n)
        return powers[key]

    out: Dict[Exponent, Fraction] = {}
    for exps, c in p.terms.items():
        if sum(exps) > n:
            continue
        term: Dict[Exponent, Fraction] = {(0,) * source.dim: c}
        for i, e in enumerate(exps):
            if e:
                term = _mul_terms(term, power(i, e), n)
        for e, v in term.items():
            value = out.get(e, 0) + v
            if value:
                out[e] = value
            else:
                out.pop(e, None)
    return TruncatedPoly._make(source, n, out)


def weighted_degree(exps: Exponent, weights: Sequence[int]) -> int:
    return sum(e * w for e, w in zip(exps, weights))


def quasi_homogeneous_check(p: TruncatedPoly, weights: Sequence[int]) -> Optional[int]:
    """The weighted degree δ if every term of p has weighted degree δ, else None."""
    if len(weights) != p.chart.dim or any(int(w) < 1 for w in weights):
        return None
    degrees = {weighted_degree(e, weights) for e in p.terms}
    if len(degrees) != 1:
        return None
    return degrees.pop()


def find_weights(
    p: TruncatedPoly, max_weight: int
) -> Optional[Tuple[Tuple[int, ...], int]]:
    """Search positive weight vectors up to max_weight making p quasi-homogeneous of degree > 0."""
    if p.is_zero() or p.constant_term():
        return None
    for weights in itertools.product(range(1, max_weight + 1), repeat=p.chart.dim):
        delta = quasi_homogeneous_check(p, weights)
        if delta:
            return weights, delta
    return None


def euler_field(f: TruncatedPoly, weights: Sequence[int], delta: int):
    """E = Σ (λ_i/δ) x_i ∂_i, so that E⌟df = f for quasi-homogeneous f."""
    from exterior import PolyVectorField

    if delta <= 0 or quasi_homogeneous_check(f, weights) != delta:
        raise PreconditionError(f"f is not quasi-homogeneous of degree {delta} for {tuple(weights)}")
    components = []
    for i, name in enumerate(f.chart.vars):
        x = TruncatedPoly.variable(f.chart, name, f.jet_order)
        components.append(x.scale(Fraction(int(weights[i]), delta)))
    return PolyVectorField(f.chart, tuple(components))


def divide_by_variable(p: TruncatedPoly, var: str) -> Optional[TruncatedPoly]:
    """p / var when every term of p contains var, else None."""
    i = p.chart.index(var)
    out = {}
    for exps, c in p.terms.items():
        if not exps[i]:
            return None
        new = list(exps)
        new[i] -= 1
        out[tuple(new)] = c
    return TruncatedPoly._make(p.chart, max(p.jet_order - 1, 0), out)


def divide_local(p: TruncatedPoly, f: TruncatedPoly) -> Optional[TruncatedPoly]:
    """
    Solve f·q = p in the local ring at jet level.

    Returns q, exact through degree min(jet p, jet f) - ord f, or None when no
    such q exists within the available jet.
    """
    if p.chart != f.chart:
        raise ChartMismatchError(f"chart {p.chart.vars} != {f.chart.vars}")
    n = min(p.jet_order, f.jet_order)
    s = f.order()
    if s is None or s > n:
        return None
    if any(sum(e) < s for e in p.terms):
        return None
    dim = p.chart.dim
    f_parts: Dict[int, Dict[Exponent, Fraction]] = {}
    for e, c in f.terms.items():
        f_parts.setdefault(sum(e), {})[e] = c
    p_parts: Dict[int, Dict[Exponent, Fraction]] = {}
    for e, c in p.terms.items():
        p_parts.setdefault(sum(e), {})[e] = c
    lead = f_parts[s]
    q_parts: Dict[int, Dict[Exponent, Fraction]] = {}
    for d in range(n - s + 1):
        rhs = dict(p_parts.get(s + d, {}))
        for j in range(s + 1, s + d + 1):
            fj = f_parts.get(j)
            qd = q_parts.get(s + d - j)
            if not fj or not qd:
                continue
            for e, v in _mul_terms(fj, qd, s + d).items():
                value = rhs.get(e, 0) - v
                if value:
                    rhs[e] = value
                else:
                    rhs.pop(e, None)
        if s == 0:
            c0 = lead[(0,) * dim]
            q_parts[d] = {e: v / c0 for e, v in rhs.items()}
            continue
        columns = monomials_of_degree(dim, d)
        row_index: Dict[Exponent, int] = {}
        rows: List[Dict[int, Fraction]] = []

        def row_of(e: Exponent) -> int:
            if e not in row_index:
                row_index[e] = len(rows)
                rows.append({})
            return row_index[e]

        for j, mu in enumerate(columns):
            for e, c in lead.items():
                rows[row_of(_add_exps(e, mu))][j] = c
        for e in rhs:
            row_of(e)
        b = [Fraction(0)] * len(rows)
        for e, v in rhs.items():
            b[row_index[e]] = v
        solution = linalg.solve(rows, b, len(columns))
        if solution is None:
            logger.debug(f"divide_local: infeasible at degree {s + d}")
            return None
        q_parts[d] = {mu: v for mu, v in zip(columns, solution) if v}
    terms: Dict[Exponent, Fraction] = {}
    for part in q_parts.values():
        terms.update(part)
    return TruncatedPoly._make(p.chart, n - s, terms)


def unit_ratio(f1: TruncatedPoly, f0: TruncatedPoly) -> Optional[TruncatedPoly]:
    """u with f1 = u·f0 and u(0) ≠ 0, or None."""
    u = divide_local(f1, f0)
    if u is None or not u.constant_term():
        return None
    return u


# --- Ideal checks ---


class Nakayama(str, Enum):
    CERTIFIED_YES = "certified_yes"
    UNKNOWN = "unknown"


class RegularSequence(str, Enum):
    CERTIFIED_REGULAR = "certified_regular"
    INCONCLUSIVE = "inconclusive"


def nakayama_contains_power(ideal_gens: Sequence[TruncatedPoly], k: int) -> Nakayama:
    """
    Certify m^k ⊆ I by checking m^k ⊆ I + m^(k+1) with linear algebra over QQ.

    Every degree-k monomial must lie in the span of the degree ≤ k truncations of
    ν·g for monomials ν and generators g.
    """
    if k < 0:
        raise DegreeError("power must be non-negative")
    gens = [g for g in ideal_gens if not g.is_zero()]
    if not gens:
        return Nakayama.UNKNOWN
    chart = gens[0].chart
    for g in gens:
        if g.chart != chart:
            raise ChartMismatchError("generators live on different charts")
        if g.jet_order < k:
            return Nakayama.UNKNOWN
    dim = chart.dim
    basis = monomials_up_to(dim, k)
    index = {e: i for i, e in enumerate(basis)}
    vectors: List[Dict[int, Fraction]] = []
    for g in gens:
        low = {e: c for e, c in g.terms.items() if sum(e) <= k}
        order = min(sum(e) for e in low) if low else k + 1
        for nu in monomials_up_to(dim, k - order) if order <= k else []:
            vector = {}
            for e, c in low.items():
                key = _add_exps(e, nu)
                if sum(key) <= k:
                    vector[index[key]] = c
            if vector:
                vectors.append(vector)
    targets = [{index[mu]: Fraction(1)} for mu in monomials_of_degree(dim, k)]
    base_rank = linalg.rank(vectors, len(basis))
    if linalg.rank(vectors + targets, len(basis)) == base_rank:
        return Nakayama.CERTIFIED_YES
    return Nakayama.UNKNOWN


def isolated_singularity_certificate(
    f: TruncatedPoly, max_power: int = NAKAYAMA_MAX_POWER
) -> Optional[int]:
    """Smallest k ≤ max_power with m^k inside the Jacobian ideal of f, or None."""
    jacobian = [partial(f, v) for v in f.chart.vars]
    for k in range(max_power + 1):
        if nakayama_contains_power(jacobian, k) is Nakayama.CERTIFIED_YES:
            return k
    return None


def regular_sequence_check(
    a: TruncatedPoly,
    b: TruncatedPoly,
    trials: int = REGULAR_SEQUENCE_TRIALS,
    k_max: int = NAKAYAMA_MAX_POWER,
    seed: int = 0,
) -> RegularSequence:
    """
    Certify that (a, b) is a regular sequence in the local ring of a 3-space.

    Independent linear parts certify directly. Otherwise a random linear form ℓ
    completing (a, b) to a system of parameters certifies it.
    """
    if a.chart.dim != 3 or b.chart.dim != 3:
        raise PreconditionError("regular sequence check needs a chart with 3 variables")
    if a.chart != b.chart:
        raise ChartMismatchError(f"chart {a.chart.vars} != {b.chart.vars}")
    if a.constant_term() or b.constant_term():
        raise PreconditionError("generators must vanish at the origin")
    if a.is_zero() or b.is_zero():
        return RegularSequence.INCONCLUSIVE
    if linalg.rank([a.linear_part(), b.linear_part()], 3) == 2:
        return RegularSequence.CERTIFIED_REGULAR
    rng = random.Random(seed)
    jet = min(a.jet_order, b.jet_order)
    for trial in range(trials):
        coeffs = [0, 0, 0]
        while not any(coeffs):
            coeffs = [rng.randint(-RANDOM_LINEAR_FORM_RANGE, RANDOM_LINEAR_FORM_RANGE) for _ in range(3)]
        ell = TruncatedPoly.linear(a.chart, coeffs, jet)
        for k in range(1, k_max + 1):
            if nakayama_contains_power([a, b, ell], k) is Nakayama.CERTIFIED_YES:
                logger.info(f"regular_sequence: certified trial={trial} k={k} ell={coeffs}")
                return RegularSequence.CERTIFIED_REGULAR
    return RegularSequence.INCONCLUSIVE


def linear_parts(polys: Iterable[TruncatedPoly]) -> List[Tuple[Fraction, ...]]:
    return [p.linear_part() for p in polys]
