"""
Martinet Engine - Exterior Algebra

Differential forms, vector fields and map germs over a single chart at the origin,
with TruncatedPoly coefficients. Sign bookkeeping for reordering basis indices
lives in perm_sign and nowhere else.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import linalg
from errors import ChartMismatchError, DegreeError, PreconditionError
from scalar_poly import Chart, Scalar, TruncatedPoly, compose, format_poly, partial

# --- Logging ---
logger = logging.getLogger(__name__)

Index = Tuple[int, ...]


def perm_sign(indices: Sequence[int]) -> Tuple[int, Optional[Index]]:
    """Sign of the permutation sorting indices, and the sorted tuple; (0, None) on a repeat."""
    if len(set(indices)) != len(indices):
        return 0, None
    sign = 1
    items = list(indices)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign, tuple(sorted(items))


def _normalize(jet_order: int, coeffs: Mapping[Index, TruncatedPoly]):
    """Common jet (no coefficient may claim more than it carries) and nonzero coefficients."""
    n = min([jet_order] + [c.jet_order for c in coeffs.values()])
    out = {}
    for key, c in coeffs.items():
        c = c.truncate(n)
        if not c.is_zero():
            out[key] = c
    return n, out


class DiffForm:
    """A degree-k form: sorted index tuples mapped to TruncatedPoly coefficients."""

    __slots__ = ("chart", "degree", "jet_order", "coeffs")

    def __init__(
        self,
        chart: Chart,
        degree: int,
        jet_order: int,
        coeffs: Optional[Mapping[Sequence[Union[int, str]], Union[TruncatedPoly, Scalar]]] = None,
    ):
        if degree < 0:
            raise DegreeError(f"negative form degree {degree}")
        if jet_order < 0:
            raise DegreeError(f"jet order must be non-negative, got {jet_order}")
        out: Dict[Index, TruncatedPoly] = {}
        for raw_index, c in (coeffs or {}).items():
            index = tuple(chart.index(i) if isinstance(i, str) else int(i) for i in raw_index)
            if len(index) != degree:
                raise DegreeError(f"index {raw_index} does not match degree {degree}")
            if any(i < 0 or i >= chart.dim for i in index):
                raise DegreeError(f"index {raw_index} out of range for chart {chart.vars}")
            sign, key = perm_sign(index)
            if not sign:
                continue
            if isinstance(c, TruncatedPoly):
                if c.chart != chart:
                    raise ChartMismatchError(f"coefficient chart {c.chart.vars} != {chart.vars}")
            else:
                c = TruncatedPoly.constant(chart, c, jet_order)
            out[key] = out[key] + c.scale(sign) if key in out else c.scale(sign)
        if degree > chart.dim and any(not c.is_zero() for c in out.values()):
            raise DegreeError(f"degree {degree} exceeds dimension {chart.dim}")
        self._set(chart, degree, *_normalize(jet_order, out))

    def _set(self, chart, degree, jet_order, coeffs):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "jet_order", jet_order)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("DiffForm is immutable")

    @classmethod
    def _make(cls, chart: Chart, degree: int, jet_order: int, coeffs: Dict[Index, TruncatedPoly]):
        form = object.__new__(cls)
        form._set(chart, degree, *_normalize(jet_order, coeffs))
        return form

    # --- Constructors ---

    @classmethod
    def zero(cls, chart: Chart, degree: int, jet_order: int) -> "DiffForm":
        return cls._make(chart, degree, jet_order, {})

    @classmethod
    def function(cls, p: TruncatedPoly) -> "DiffForm":
        return cls._make(p.chart, 0, p.jet_order, {(): p})

    @classmethod
    def basis(cls, chart: Chart, name: str, jet_order: int) -> "DiffForm":
        return cls(chart, 1, jet_order, {(name,): 1})

    @classmethod
    def volume(cls, chart: Chart, jet_order: int) -> "DiffForm":
        return cls(chart, chart.dim, jet_order, {tuple(range(chart.dim)): 1})

    # --- Inspection ---

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, index: Sequence[Union[int, str]]) -> TruncatedPoly:
        index = tuple(self.chart.index(i) if isinstance(i, str) else i for i in index)
        sign, key = perm_sign(index)
        if not sign or key not in self.coeffs:
            return TruncatedPoly.zero(self.chart, self.jet_order)
        return self.coeffs[key].scale(sign)

    def truncate(self, jet_order: int) -> "DiffForm":
        n = min(jet_order, self.jet_order)
        return DiffForm._make(self.chart, self.degree, n, dict(self.coeffs))

    def order(self) -> Optional[int]:
        """Lowest degree among the coefficients, None for the zero form."""
        orders = [c.order() for c in self.coeffs.values()]
        return min(orders) if orders else None

    # --- Arithmetic ---

    def _check(self, other: "DiffForm"):
        if self.chart != other.chart:
            raise ChartMismatchError(f"chart {self.chart.vars} != {other.chart.vars}")
        if self.degree != other.degree:
            raise DegreeError(f"degree {self.degree} != {other.degree}")

    def __add__(self, other: "DiffForm") -> "DiffForm":
        self._check(other)
        n = min(self.jet_order, other.jet_order)
        out = {k: c.truncate(n) for k, c in self.coeffs.items()}
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c.truncate(n)
        return DiffForm._make(self.chart, self.degree, n, out)

    def __neg__(self) -> "DiffForm":
        return DiffForm._make(
            self.chart, self.degree, self.jet_order, {k: -c for k, c in self.coeffs.items()}
        )

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def __mul__(self, factor: Union[TruncatedPoly, Scalar]) -> "DiffForm":
        if isinstance(factor, TruncatedPoly):
            if factor.chart != self.chart:
                raise ChartMismatchError(f"chart {factor.chart.vars} != {self.chart.vars}")
            n = min(self.jet_order, factor.jet_order)
            return DiffForm._make(
                self.chart, self.degree, n, {k: c * factor for k, c in self.coeffs.items()}
            )
        return DiffForm._make(
            self.chart, self.degree, self.jet_order, {k: c.scale(factor) for k, c in self.coeffs.items()}
        )

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        if self.chart != other.chart or self.degree != other.degree:
            return False
        n = min(self.jet_order, other.jet_order)
        return (self - other).truncate(n).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"DiffForm({format_form(self)}, degree={self.degree}, jet={self.jet_order})"

    def __str__(self) -> str:
        return format_form(self)


def format_form(a: DiffForm) -> str:
    """Text in the form-file syntax: sums of coefficient*dx^dy terms."""
    if a.is_zero():
        return "0"
    if a.degree == 0:
        return format_poly(a.coeffs[()])
    pieces = []
    for index in sorted(a.coeffs):
        c = a.coeffs[index]
        basis = "^".join(f"d{a.chart.vars[i]}" for i in index)
        negative = False
        if len(c.terms) == 1:
            (value,) = c.terms.values()
            if value < 0:
                negative, c = True, -c
            text = format_poly(c)
            body = basis if text == "1" else f"{text}*{basis}"
        else:
            body = f"({format_poly(c)})*{basis}"
        pieces.append(("-" if negative else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


@dataclass(frozen=True)
class ConstantTensor:
    """An antisymmetric tensor at the origin, stored on sorted indices."""

    dim: int
    degree: int
    entries: Mapping[Index, Fraction]

    def value(self, index: Sequence[int]) -> Fraction:
        sign, key = perm_sign(index)
        if not sign:
            return Fraction(0)
        return sign * self.entries.get(key, Fraction(0))

    def is_zero(self) -> bool:
        return not any(self.entries.values())

    def matrix(self) -> List[List[Fraction]]:
        if self.degree != 2:
            raise DegreeError("matrix form needs a degree 2 tensor")
        return [[self.value((i, j)) for j in range(self.dim)] for i in range(self.dim)]

    def contraction_rows(self) -> List[Dict[int, Fraction]]:
        """Rows of the linear map v ↦ v⌟T, one per sorted (k-1)-index."""
        rows: Dict[Index, Dict[int, Fraction]] = {}
        for key, t in self.entries.items():
            if not t:
                continue
            for p, i in enumerate(key):
                rest = key[:p] + key[p + 1 :]
                row = rows.setdefault(rest, {})
                row[i] = row.get(i, Fraction(0)) + (t if p % 2 == 0 else -t)
        return list(rows.values())


@dataclass(frozen=True)
class PolyVectorField:
    chart: Chart
    components: Tuple[TruncatedPoly, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != self.chart.dim:
            raise DegreeError("one component per chart variable is required")
        for c in self.components:
            if c.chart != self.chart:
                raise ChartMismatchError(f"component chart {c.chart.vars} != {self.chart.vars}")

    @property
    def jet_order(self) -> int:
        return min(c.jet_order for c in self.components)

    @classmethod
    def coordinate(cls, chart: Chart, name: str, jet_order: int) -> "PolyVectorField":
        i = chart.index(name)
        return cls.constant(chart, [1 if j == i else 0 for j in range(chart.dim)], jet_order)

    @classmethod
    def constant(cls, chart: Chart, vector: Sequence[Scalar], jet_order: int) -> "PolyVectorField":
        return cls(chart, tuple(TruncatedPoly.constant(chart, v, jet_order) for v in vector))

    def value_at_0(self) -> Tuple[Fraction, ...]:
        return tuple(c.constant_term() for c in self.components)

    def evaluate(self, point: Sequence) -> List:
        return [c.evaluate(point) for c in self.components]


@dataclass(frozen=True)
class PolyMapGerm:
    """Origin-preserving polynomial map; component i gives target variable i."""

    source: Chart
    target: Chart
    components: Tuple[TruncatedPoly, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != self.target.dim:
            raise DegreeError("one component per target variable is required")
        for c in self.components:
            if c.chart != self.source:
                raise ChartMismatchError(f"component chart {c.chart.vars} != {self.source.vars}")
            if c.constant_term():
                raise PreconditionError("map germ must send the origin to the origin")

    @property
    def jet_order(self) -> int:
        return min((c.jet_order for c in self.components), default=0)

    @classmethod
    def identity(cls, chart: Chart, jet_order: int) -> "PolyMapGerm":
        return cls(chart, chart, tuple(TruncatedPoly.variable(chart, v, jet_order) for v in chart.vars))

    @classmethod
    def linear(
        cls, source: Chart, target: Chart, matrix: Sequence[Sequence[Scalar]], jet_order: int
    ) -> "PolyMapGerm":
        return cls(source, target, tuple(TruncatedPoly.linear(source, row, jet_order) for row in matrix))

    def linear_part(self) -> List[List[Fraction]]:
        return [list(c.linear_part()) for c in self.components]

    def evaluate(self, point: Sequence) -> List:
        return [c.evaluate(point) for c in self.components]


def inclusion(chart: Chart, var: str, jet_order: int) -> PolyMapGerm:
    """ι: {var = 0} ↪ chart, in the coordinates of the remaining variables."""
    hyper = chart.without(var)
    components = []
    for name in chart.vars:
        if name == var:
            components.append(TruncatedPoly.zero(hyper, jet_order))
        else:
            components.append(TruncatedPoly.variable(hyper, name, jet_order))
    return PolyMapGerm(hyper, chart, tuple(components))


def projection(chart: Chart, var: str, jet_order: int) -> PolyMapGerm:
    """π: chart → {var = 0}, forgetting var."""
    hyper = chart.without(var)
    return PolyMapGerm(
        chart, hyper, tuple(TruncatedPoly.variable(chart, name, jet_order) for name in hyper.vars)
    )


# --- Operations ---


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.chart != b.chart:
        raise ChartMismatchError(f"chart {a.chart.vars} != {b.chart.vars}")
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        raise DegreeError(f"wedge degree {degree} exceeds dimension {a.chart.dim}")
    n = min(a.jet_order, b.jet_order)
    out: Dict[Index, TruncatedPoly] = {}
    for i, ca in a.coeffs.items():
        for j, cb in b.coeffs.items():
            sign, key = perm_sign(i + j)
            if not sign:
                continue
            term = (ca * cb).scale(sign)
            out[key] = out[key] + term if key in out else term
    return DiffForm._make(a.chart, degree, n, out)


def wedge_power(a: DiffForm, k: int) -> DiffForm:
    result = DiffForm.function(TruncatedPoly.constant(a.chart, 1, a.jet_order))
    for _ in range(k):
        result = wedge(result, a)
    return result


def ext_d(a: DiffForm) -> DiffForm:
    n = max(a.jet_order - 1, 0)
    out: Dict[Index, TruncatedPoly] = {}
    for index, c in a.coeffs.items():
        for j, name in enumerate(a.chart.vars):
            sign, key = perm_sign((j,) + index)
            if not sign:
                continue
            term = partial(c, name).scale(sign)
            if term.is_zero():
                continue
            out[key] = out[key] + term if key in out else term
    return DiffForm._make(a.chart, a.degree + 1, n, out)


def is_closed(a: DiffForm) -> bool:
    return ext_d(a).is_zero()


def interior(X: PolyVectorField, a: DiffForm) -> DiffForm:
    """X⌟a, contracting the first slot."""
    if a.degree == 0:
        raise DegreeError("cannot contract a function")
    if X.chart != a.chart:
        raise ChartMismatchError(f"chart {X.chart.vars} != {a.chart.vars}")
    n = min(X.jet_order, a.jet_order)
    out: Dict[Index, TruncatedPoly] = {}
    for index, c in a.coeffs.items():
        for p, i in enumerate(index):
            xi = X.components[i]
            if xi.is_zero():
                continue
            rest = index[:p] + index[p + 1 :]
            term = (xi * c).scale(-1 if p % 2 else 1)
            out[rest] = out[rest] + term if rest in out else term
    return DiffForm._make(a.chart, a.degree - 1, n, out)


def pullback(F: PolyMapGerm, a: DiffForm) -> DiffForm:
    """F*a for a form on F's target chart."""
    if a.chart != F.target:
        raise ChartMismatchError(f"form chart {a.chart.vars} != map target {F.target.vars}")
    n = min(a.jet_order, F.jet_order) if a.degree == 0 else min(a.jet_order, max(F.jet_order - 1, 0))
    differentials = [ext_d(DiffForm.function(c)) for c in F.components]
    products: Dict[Index, DiffForm] = {(): DiffForm.function(TruncatedPoly.constant(F.source, 1, n))}

    def product(index: Index) -> DiffForm:
        if index not in products:
            products[index] = wedge(product(index[:-1]), differentials[index[-1]])
        return products[index]

    result = DiffForm.zero(F.source, a.degree, n)
    for index, c in a.coeffs.items():
        coefficient = compose(c, F.components, F.source)
        result = result + product(index) * coefficient
    return result.truncate(n)


def compose_maps(F: PolyMapGerm, G: PolyMapGerm) -> PolyMapGerm:
    """F∘G: first G, then F."""
    if G.target != F.source:
        raise ChartMismatchError(f"map target {G.target.vars} != map source {F.source.vars}")
    return PolyMapGerm(G.source, F.target, tuple(compose(c, G.components, G.source) for c in F.components))


def formal_inverse(F: PolyMapGerm, jet_order: int) -> PolyMapGerm:
    """G with F∘G = id = G∘F through degree jet_order."""
    if F.source.dim != F.target.dim:
        raise PreconditionError("only maps between equal dimensions can be inverted")
    A = F.linear_part()
    A_inv = linalg.inverse(A)
    if A_inv is None:
        raise PreconditionError("singular linear part")
    n = min(jet_order, F.jet_order)
    nonlinear = [c.truncate(n) - TruncatedPoly.linear(F.source, row, n) for c, row in zip(F.components, A)]
    ys = [TruncatedPoly.variable(F.target, v, n) for v in F.target.vars]

    def apply_inverse(vector: Sequence[TruncatedPoly]) -> Tuple[TruncatedPoly, ...]:
        out = []
        for row in A_inv:
            acc = TruncatedPoly.zero(F.target, n)
            for coeff, poly in zip(row, vector):
                if coeff:
                    acc = acc + poly.scale(coeff)
            out.append(acc)
        return tuple(out)

    G = PolyMapGerm(F.target, F.source, apply_inverse(ys))
    if all(h.is_zero() for h in nonlinear):
        return G
    for _ in range(n):
        correction = [y - compose(h, G.components, F.target) for y, h in zip(ys, nonlinear)]
        updated = PolyMapGerm(F.target, F.source, apply_inverse(correction))
        if all(u == g for u, g in zip(updated.components, G.components)):
            break
        G = updated
    return G


def jacobian_at_0(F: PolyMapGerm) -> List[List[Fraction]]:
    return F.linear_part()


def top_coefficient(a: DiffForm) -> TruncatedPoly:
    """The function f with a = f·dx_1∧…∧dx_m for a top-degree form."""
    if a.degree != a.chart.dim:
        raise DegreeError(f"degree {a.degree} is not the top degree {a.chart.dim}")
    return a.coeff(tuple(range(a.chart.dim)))


def eval_at_0(a: DiffForm) -> ConstantTensor:
    return ConstantTensor(
        a.chart.dim,
        a.degree,
        {k: c.constant_term() for k, c in a.coeffs.items() if c.constant_term()},
    )


def rank_at_0(a: DiffForm) -> int:
    if a.degree != 2:
        raise DegreeError("rank is defined for 2-forms")
    return linalg.rank(eval_at_0(a).matrix(), a.chart.dim)


def kernel_at_0(a: DiffForm) -> List[Tuple[Fraction, ...]]:
    """Canonical (RREF) basis of {v : v⌟(a|₀) = 0}."""
    if a.degree == 0:
        raise DegreeError("cannot contract a function")
    return linalg.nullspace(eval_at_0(a).contraction_rows(), a.chart.dim)


def constant_form(chart: Chart, tensor: ConstantTensor, jet_order: int) -> DiffForm:
    return DiffForm(chart, tensor.degree, jet_order, dict(tensor.entries))
