"""
Tests for Martinet Engine - Invariants
"""

from fractions import Fraction

import pytest
from config import EXAMPLES_DIR
from dsl import load_frm, parse
from errors import DegenerateFormError, DegreeError, NotClosedError, PreconditionError
from invariants import (
    FieldStatus,
    Regime,
    classify_sigma220,
    compare_orientation,
    dim_span_j1,
    full_report,
    ideal_I_sigma,
    kernel_field_search,
    kernel_incidence,
    kernel_of_power,
    kernel_via_transversal,
    martinet,
    martinet_function,
    orientation_sign,
    sigma22_tangent_space,
)
from scalar_poly import Chart, RegularSequence, TruncatedPoly

JET = 6
F = Fraction
PXYZ = Chart(("p1", "x", "y", "z"))
XYZW = Chart(("x", "y", "z", "w"))


def e(i, m=4):
    return tuple(F(int(j == i)) for j in range(m))


@pytest.fixture
def omega0():
    """Kernel tangent to Σ₂₂."""
    return load_frm(EXAMPLES_DIR / "omega0.frm", JET).form


@pytest.fixture
def omega1():
    """Same restriction, kernel transversal to Σ₂₂."""
    return load_frm(EXAMPLES_DIR / "omega1.frm", JET).form


class TestMartinetHypersurface:
    """Tests for martinet and its preconditions."""

    def test_martinet_function(self, omega0):
        """ω₀² = 2p₁ dp₁∧dx∧dy∧dz."""
        p1 = TruncatedPoly.variable(PXYZ, "p1", JET)
        assert martinet_function(omega0) == 2 * p1

    def test_restriction(self, omega0):
        """Σ₂ = {p₁ = 0} with σ = x dx∧dy, no chart move needed."""
        data = martinet(omega0)
        assert data.regime is Regime.STRUCTURALLY_SMOOTH
        assert data.normal_var == "p1"
        assert data.chart_map is None
        assert data.sigma == parse("x*dx^dy", PXYZ.without("p1"), JET)

    def test_symplectic_is_nonsingular(self):
        """f(0) ≠ 0 for the standard symplectic form."""
        omega = load_frm(EXAMPLES_DIR / "symplectic.frm", JET).form
        assert martinet(omega).regime is Regime.NONSINGULAR

    def test_singular_hypersurface(self):
        """ω² = 6p₁² vol has df|₀ = 0."""
        chart = Chart(("p1", "q1", "p2", "q2"))
        omega = parse("d(p1**3*dq1) + dp2^dq2", chart, JET)
        assert martinet(omega).regime is Regime.SINGULAR

    def test_chart_move_when_f_is_not_a_coordinate(self):
        """Σ₂ = {x + y² = 0} is straightened by a chart move."""
        omega = parse("(x + y**2)*dx^dy + dz^dw", XYZW, JET)
        data = martinet(omega)
        assert data.structurally_smooth
        assert data.chart_map is not None
        assert data.sigma == parse("dz^dw", XYZW.without("x"), JET)

    def test_not_closed(self):
        """x dy∧dz is not closed."""
        with pytest.raises(NotClosedError):
            martinet(parse("x*dy^dz", XYZW, JET))

    def test_odd_dimension(self):
        """Martinet data needs an even-dimensional chart."""
        with pytest.raises(PreconditionError):
            martinet(parse("x*dx^dy", Chart(("x", "y", "z")), JET))

    def test_wrong_degree(self):
        """Only 2-forms have a Martinet hypersurface."""
        with pytest.raises(DegreeError):
            martinet(parse("dx", XYZW, JET))

    def test_degenerate(self):
        """ω^n ≡ 0 is rejected."""
        with pytest.raises(DegenerateFormError):
            martinet(parse("dx^dy", XYZW, JET))


class TestKernel:
    """Tests for ker ω^(n-1)|₀ and Σ₂₂ incidence."""

    def test_kernels_differ(self, omega0, omega1):
        """The two germs have kernels span{∂y, ∂z} and span{∂x, ∂z}."""
        assert kernel_of_power(omega0) == [e(2), e(3)]
        assert kernel_of_power(omega1) == [e(1), e(3)]

    def test_transversal_description_agrees(self, omega0, omega1):
        """ker ι*(∂p₁⌟ω)|₀ equals the direct kernel."""
        for omega in (omega0, omega1):
            assert kernel_via_transversal(martinet(omega)) == kernel_of_power(omega)

    def test_sigma22_tangent_space(self, omega0):
        """Σ₂₂ = {x = 0} inside Σ₂."""
        sigma = martinet(omega0).sigma
        assert sigma22_tangent_space(sigma) == [e(1, 3), e(2, 3)]

    def test_incidence(self, omega0, omega1):
        """The kernel is tangent to Σ₂₂ for ω₀ and transversal for ω₁."""
        m0, m1 = martinet(omega0), martinet(omega1)
        assert kernel_incidence(m0, kernel_of_power(omega0)) == 2
        assert kernel_incidence(m1, kernel_of_power(omega1)) == 1


class TestOrientation:
    """Tests for the canonical orientation."""

    def test_default_frame_is_positive(self, omega0):
        """df = 2dp₁ with frame (∂x, ∂y, ∂z) gives +1."""
        assert orientation_sign(omega0) == 1

    def test_swapped_frame_is_negative(self, omega0):
        """Swapping two frame vectors reverses the sign."""
        assert orientation_sign(omega0, reference=[e(2), e(1), e(3)]) == -1

    def test_frame_must_be_tangent(self, omega0):
        """∂p₁ is not tangent to Σ₂."""
        with pytest.raises(PreconditionError):
            orientation_sign(omega0, reference=[e(0), e(1), e(2)])

    def test_compare_orientation(self):
        """The sign of f₁/f₀ at 0, None for different hypersurfaces."""
        p1 = TruncatedPoly.variable(PXYZ, "p1", JET)
        x = TruncatedPoly.variable(PXYZ, "x", JET)
        assert compare_orientation(p1, p1 * (1 + x)) == 1
        assert compare_orientation(p1, -p1) == -1
        assert compare_orientation(p1, x) is None


class TestSigma220:
    """Tests for jet span, kernel fields and classification."""

    @pytest.mark.parametrize(
        "name,label,discriminant",
        [
            ("hyperbolic", "hyperbolic", F(1)),
            ("elliptic", "elliptic", F(-1)),
            ("parabolic", "parabolic", F(0)),
        ],
    )
    def test_classification(self, name, label, discriminant):
        """Template germs classify by the sign of the discriminant."""
        omega = load_frm(EXAMPLES_DIR / f"{name}.frm", JET).form
        result = classify_sigma220(martinet(omega).sigma)
        assert result.label == label
        assert result.discriminant == discriminant
        assert result.template

    def test_classification_needs_rank(self):
        """rank σ|₀ = 2 is outside Σ₂₂."""
        sigma = parse("dz^dw", Chart(("y", "z", "w")), JET)
        with pytest.raises(PreconditionError):
            classify_sigma220(sigma)

    def test_classification_needs_smooth_sigma22(self, omega0):
        """σ = x dx∧dy has a one-dimensional jet span, so Σ₂₂ is not a smooth curve."""
        with pytest.raises(PreconditionError, match="not a smooth curve"):
            classify_sigma220(martinet(omega0).sigma)

    def test_parabolic_template_has_full_span(self):
        """b = y1, h = y3 gives discriminant 0 with span 2."""
        sigma = martinet(load_frm(EXAMPLES_DIR / "parabolic.frm", JET).form).sigma
        assert dim_span_j1(sigma) == 2

    def test_dim_span_j1(self, omega0):
        """σ = x dx∧dy has a one-dimensional jet span."""
        assert dim_span_j1(martinet(omega0).sigma) == 1

    def test_ideal_of_hyperbolic_restriction(self):
        """α = dy3 + y1 dy2 annihilates σ; the remaining coefficients form a regular sequence."""
        sigma = martinet(load_frm(EXAMPLES_DIR / "hyperbolic.frm", JET).form).sigma
        result = ideal_I_sigma(sigma)
        assert result.verdict is RegularSequence.CERTIFIED_REGULAR
        assert result.alpha.coeff((2,)).constant_term() != 0
        assert len(result.generators) == 2

    def test_ideal_needs_three_variables(self):
        """I(σ) is only defined on a 3-dimensional chart."""
        with pytest.raises(PreconditionError):
            ideal_I_sigma(parse("dz^dw", XYZW, JET))

    def test_kernel_field_exists(self, omega0):
        """∂z annihilates x dx∧dy."""
        result = kernel_field_search(martinet(omega0).sigma)
        assert result.status is FieldStatus.EXISTS
        assert result.label() == "exists"
        assert result.witness.value_at_0()[2] != 0

    def test_kernel_field_obstructed(self):
        """A contact-type restriction has no kernel field at order 0."""
        sigma = martinet(load_frm(EXAMPLES_DIR / "hyperbolic.frm", JET).form).sigma
        result = kernel_field_search(sigma)
        assert result.status is FieldStatus.OBSTRUCTED
        assert result.label() == f"obstructed_at_order {result.order}"


class TestFullReport:
    """Tests for full_report."""

    def test_report_for_tangent_kernel(self, omega0):
        """All Σ₂₂ invariants are filled in."""
        report = full_report(omega0)
        assert report.regime == "structurally_smooth"
        assert report.rank_sigma_0 == 0
        assert report.kernel_basis == [e(2), e(3)]
        assert report.kernel_cross_check is True
        assert report.orientation_sign == 1
        assert report.dim_span_j1 == 1
        assert report.sigma22_incidence == 2
        assert report.classification is None
        assert "not a smooth curve" in report.undefined["classification"]
        assert report.kernel_field.status is FieldStatus.EXISTS

    def test_report_for_transversal_kernel(self, omega1):
        """Only the incidence and kernel differ from ω₀."""
        report = full_report(omega1)
        assert report.kernel_basis == [e(1), e(3)]
        assert report.sigma22_incidence == 1
        assert report.dim_span_j1 == 1

    def test_nonsingular_report(self):
        """Σ₂-invariants are undefined with a reason."""
        report = full_report(load_frm(EXAMPLES_DIR / "symplectic.frm", JET).form)
        assert report.regime == "nonsingular"
        assert report.kernel_basis == []
        assert "rank_sigma_0" in report.undefined
        assert report.orientation_sign is None

    def test_sigma20_report(self):
        """rank σ|₀ = 2 stops after the orientation."""
        report = full_report(parse("(x + y**2)*dx^dy + dz^dw", XYZW, JET))
        assert report.regime == "sigma20"
        assert report.rank_sigma_0 == 2
        assert report.kernel_basis == [e(0), e(1)]
        assert report.orientation_sign == 1
        assert report.kernel_cross_check is None
        assert "classification" in report.undefined

    def test_singular_report(self):
        """A singular Σ₂ has no orientation."""
        chart = Chart(("p1", "q1", "p2", "q2"))
        report = full_report(parse("d(p1**3*dq1) + dp2^dq2", chart, JET))
        assert report.regime == "singular"
        assert "orientation_sign" in report.undefined
