"""
Tests for Martinet Engine - Primitives, decomposition and the equivalence decider
"""

import random
from fractions import Fraction

import pytest
from config import EXAMPLES_DIR
from dsl import load_frm, parse
from errors import ChartMismatchError, NotClosedError, PreconditionError
from exterior import DiffForm, PolyMapGerm, ext_d, is_closed, pullback, wedge
from invariants import martinet_function
from normal_form import (
    Category,
    Outcome,
    RealizationStatus,
    decide_equivalence,
    decompose,
    df_division,
    from_volume,
    homotopy_primitive,
    kernel_template_fit,
    orientation_pair,
    realizability,
    relative_primitive_p1,
    restrict_to_hypersurface,
    sigma220_chart,
    sigma220_form,
    singular_primitive,
    times_function,
    times_variable,
    weighted_homotopy,
)
from scalar_poly import Chart, TruncatedPoly, monomials_up_to

JET = 6
PXYZ = Chart(("p1", "x", "y", "z"))
XYZ = Chart(("x", "y", "z"))
PQ = Chart(("p1", "q1", "p2", "q2"))
X4 = Chart(("x1", "x2", "x3", "x4"))


def load(name, jet=JET):
    return load_frm(EXAMPLES_DIR / f"{name}.frm", jet).form


def quadric(jet=JET):
    xs = [TruncatedPoly.variable(X4, v, jet) for v in X4.vars]
    return sum((x * x for x in xs), TruncatedPoly.zero(X4, jet))


def random_one_form(chart, seed, jet=4, degree=3):
    rng = random.Random(seed)
    coeffs = {}
    for v in chart.vars:
        terms = {
            e: Fraction(rng.randint(-3, 3))
            for e in monomials_up_to(chart.dim, degree)
            if sum(e) >= 1 and rng.random() < 0.3
        }
        coeffs[(v,)] = TruncatedPoly(chart, jet, terms)
    return DiffForm(chart, 1, jet, coeffs)


class TestHomotopy:
    """Tests for weighted homotopy primitives."""

    @pytest.mark.parametrize("seed", range(25))
    def test_homotopy_inverts_d(self, seed):
        """d(H(dη)) = dη for random η and random positive weights."""
        rng = random.Random(1000 + seed)
        weights = [rng.randint(1, 3) for _ in PXYZ.vars]
        omega = ext_d(random_one_form(PXYZ, seed))
        assert ext_d(weighted_homotopy(omega, weights)) == omega

    def test_relative_primitive(self):
        """ρ = d(p1²β) recovers a primitive vanishing to second order."""
        p1, x, z = (TruncatedPoly.variable(PXYZ, v, JET) for v in ("p1", "x", "z"))
        beta = DiffForm(PXYZ, 1, JET, {("y",): x + z * z, ("p1",): x * z, ("z",): p1})
        rho = ext_d(times_variable(beta, "p1", 2))
        found = relative_primitive_p1(rho, "p1")
        assert ext_d(times_variable(found, "p1", 2)) == rho

    @pytest.mark.parametrize("seed", range(25))
    def test_relative_primitive_random(self, seed):
        """d(p1²β) = ρ for ρ = d(p1²β₀) with random β₀."""
        rho = ext_d(times_variable(random_one_form(PXYZ, 2000 + seed, jet=JET), "p1", 2))
        found = relative_primitive_p1(rho, "p1")
        assert ext_d(times_variable(found, "p1", 2)) == rho

    def test_relative_primitive_needs_divisibility(self):
        """dp2∧dq2 does not vanish on {p1 = 0}."""
        with pytest.raises(PreconditionError):
            relative_primitive_p1(parse("dp2^dq2", PQ, JET), "p1")

    def test_relative_primitive_needs_closed(self):
        """ρ must be closed."""
        with pytest.raises(NotClosedError):
            relative_primitive_p1(parse("p1*q1*dp2^dq2", PQ, JET), "p1")


class TestSingularPrimitives:
    """Tests for df-division and primitives vanishing on {f = 0}."""

    def test_df_division(self):
        """df∧γ = df∧(x3 dx4) is solved for γ."""
        f = quadric()
        df = ext_d(DiffForm.function(f))
        beta = wedge(df, parse("x3*dx4", X4, JET))
        gamma = df_division(beta, f)
        assert wedge(df, gamma) == beta

    @pytest.mark.parametrize("seed", range(25))
    def test_df_division_random(self, seed):
        """df∧γ = β is solved for β = df∧γ₀ with random γ₀."""
        f = quadric()
        df = ext_d(DiffForm.function(f))
        beta = wedge(df, random_one_form(X4, 3000 + seed, jet=JET))
        assert wedge(df, df_division(beta, f)) == beta

    @pytest.mark.parametrize("seed", range(25))
    def test_homotopy_primitive_random(self, seed):
        """β = d(f²γ₀) with random γ₀ has a primitive inside ⟨f⟩."""
        f = quadric()
        beta = ext_d(times_function(random_one_form(X4, 4000 + seed, jet=JET, degree=2), f * f))
        result = homotopy_primitive(beta, f)
        assert ext_d(result.form) == beta
        assert result.vanishes_on_f

    def test_df_division_needs_df_wedge_zero(self):
        """df∧dx1 ≠ 0, so dx1 is not of the form df∧γ."""
        with pytest.raises(PreconditionError):
            df_division(parse("dx1", X4, JET), quadric())

    def test_homotopy_primitive_vanishes_on_f(self):
        """d(f²dx2) has a primitive inside ⟨f⟩."""
        f = quadric()
        beta = ext_d(DiffForm(X4, 1, JET, {("x2",): f * f}))
        result = homotopy_primitive(beta, f)
        assert ext_d(result.form) == beta
        assert result.vanishes_on_f

    def test_homotopy_primitive_needs_quasi_homogeneous_f(self):
        """x1² + x1³ has no positive weights."""
        f = quadric()
        beta = ext_d(DiffForm(X4, 1, JET, {("x2",): f * f}))
        x1 = TruncatedPoly.variable(X4, "x1", JET)
        with pytest.raises(PreconditionError):
            homotopy_primitive(beta, x1**2 + x1**3)

    def test_singular_primitive(self):
        """ω₁ − ω₀ = d(f·x3 dx4) is recovered as d(f·α)."""
        f = quadric()
        omega0 = from_volume(f)
        omega1 = omega0 + ext_d(DiffForm(X4, 1, JET, {("x4",): f * TruncatedPoly.variable(X4, "x3", JET)}))
        alpha = singular_primitive(omega0, omega1, f)
        assert ext_d(times_function(alpha, f)) == omega1 - omega0


class TestDecomposition:
    """Tests for decompose and realizability."""

    def test_decompose_omega0(self):
        """ω₀ = d(p1(dx − z dy)) + x dx∧dy with θ = 0."""
        parts = decompose(load("omega0"))
        assert parts.normal_var == "p1"
        assert parts.chart_map is None
        assert parts.alpha == parse("dx - z*dy", XYZ, JET)
        assert parts.sigma == parse("x*dx^dy", XYZ, JET)
        assert parts.theta.is_zero()

    def test_decompose_needs_smooth_hypersurface(self):
        """The symplectic form has no Σ₂."""
        with pytest.raises(PreconditionError):
            decompose(load("symplectic"))

    def test_realizable_restriction(self):
        """x dx∧dy is the restriction of a closed 2-form."""
        sigma = parse("x*dx^dy", XYZ, JET)
        result = realizability(sigma)
        assert result.status is RealizationStatus.REALIZABLE
        assert is_closed(result.omega)
        assert restrict_to_hypersurface(result.omega, "p1") == sigma

    def test_wrong_rank_is_not_realizable(self):
        """rank σ|₀ = 0 on five variables misses 2n − 4 = 2."""
        chart = Chart(("x1", "x2", "x3", "x4", "x5"))
        result = realizability(parse("x1*dx1^dx2", chart, JET))
        assert result.status is RealizationStatus.NOT_REALIZABLE
        assert result.rank == 0

    def test_sigma20_restriction_rejected(self):
        """rank σ|₀ = 2n − 2 is outside the annihilator search."""
        with pytest.raises(PreconditionError):
            realizability(parse("dy^dz", XYZ, JET))


class TestConstructions:
    """Tests for from_volume, sigma220_form and orientation_pair."""

    @pytest.mark.parametrize("name", ["one", "x1", "quadric"])
    def test_from_volume(self, name):
        """ω^n = f·Ω for closed ω."""
        f = {
            "one": TruncatedPoly.constant(X4, 1, JET),
            "x1": TruncatedPoly.variable(X4, "x1", JET),
            "quadric": quadric(),
        }[name]
        omega = from_volume(f)
        assert is_closed(omega)
        assert martinet_function(omega) == f

    def test_from_volume_needs_even_dimension(self):
        """Odd charts carry no symplectic volume."""
        with pytest.raises(PreconditionError):
            from_volume(TruncatedPoly.constant(XYZ, 1, JET))

    def test_a_from_b_and_h(self):
        """b = y1·y2, h = y2² gives a = −y1²/2 + y2²."""
        chart = sigma220_chart(2)
        y1, y2 = (TruncatedPoly.variable(chart, v, JET) for v in ("y1", "y2"))
        omega = sigma220_form(y1 * y2, y2 * y2)
        sigma = restrict_to_hypersurface(omega, "p1")
        hyper = sigma.chart
        u1, u2 = (TruncatedPoly.variable(hyper, v, JET) for v in ("y1", "y2"))
        assert sigma.coeff(("y2", "y3")) == u2 * u2 - u1 * u1 / 2
        assert sigma.coeff(("y1", "y2")) == -(u1 * u1 * u2)

    def test_h_depending_on_y1_breaks_closedness(self):
        """h = y1 gives a non-closed restriction."""
        chart = sigma220_chart(2)
        y1 = TruncatedPoly.variable(chart, "y1", JET)
        with pytest.raises(NotClosedError):
            sigma220_form(y1, y1)

    def test_sigma220_form_chart(self):
        """b and h must live on the template chart."""
        with pytest.raises(ChartMismatchError):
            sigma220_form(TruncatedPoly.variable(XYZ, "x", JET), TruncatedPoly.variable(XYZ, "y", JET))

    def test_orientation_pair_ratio(self):
        """h(h − a2·r/2) for (a1, a2, a3, h, r) = (1, 2, 3, 1, 2) is −1."""
        assert orientation_pair(1, 2, 3, 1, 2, jet_order=JET).contact_ratio == -1
        assert orientation_pair(1, 2, 3, 1, 0, jet_order=JET).contact_ratio == 1


class TestDecider:
    """Tests for decide_equivalence."""

    def test_kernel_mismatch(self):
        """Kernels tangent and transversal to Σ₂₂ are not equivalent."""
        verdict = decide_equivalence(load("omega0"), load("omega1"))
        assert verdict.outcome is Outcome.NOT_EQUIVALENT
        assert verdict.evidence["invariant"] == "kernel"
        assert verdict.evidence["incidence0"] == 2
        assert verdict.evidence["incidence1"] == 1

    def test_same_form_is_equivalent(self):
        """A germ is equivalent to itself, with the 4-dim(b) check certified."""
        omega = load("omega0")
        verdict = decide_equivalence(omega, omega)
        assert verdict.outcome is Outcome.EQUIVALENT
        assert verdict.theorem_used == "inv-R"
        assert "4-dim(b)" in verdict.evidence["certified"]
        assert verdict.evidence["A"] == 1
        assert verdict.evidence["B"] == 1

    def test_darboux(self):
        """Two symplectic germs are equivalent by Darboux."""
        verdict = decide_equivalence(load("symplectic"), load("darboux0"))
        assert verdict.outcome is Outcome.EQUIVALENT
        assert verdict.theorem_used == "darboux"

    def test_regime_mismatch(self):
        """Symplectic and singular germs differ in regime."""
        singular = parse("d(p1**3*dq1) + dp2^dq2", PQ, JET)
        verdict = decide_equivalence(load("symplectic"), singular)
        assert verdict.outcome is Outcome.NOT_EQUIVALENT
        assert verdict.evidence == {
            "invariant": "martinet_regime",
            "value0": "nonsingular",
            "value1": "singular",
        }

    def test_chart_mismatch(self):
        """Forms must share a chart."""
        with pytest.raises(ChartMismatchError):
            decide_equivalence(load("symplectic"), load("omega0"))

    def test_sigma20(self):
        """rank σ|₀ = 2n − 2 on both sides is Martinet's normal form."""
        chart = Chart(("x", "y", "z", "w"))
        verdict = decide_equivalence(
            parse("x*dx^dy + dz^dw", chart, JET), parse("(x + y**2)*dx^dy + dz^dw", chart, JET)
        )
        assert verdict.outcome is Outcome.EQUIVALENT
        assert verdict.theorem_used == "martinet_sigma20"

    def test_sing(self):
        """A perturbation d(f²·x3 dx4) of the quadric volume form is equivalent by sing."""
        f = quadric()
        x3 = TruncatedPoly.variable(X4, "x3", JET)
        omega0 = from_volume(f)
        omega1 = omega0 + ext_d(DiffForm(X4, 1, JET, {("x4",): f * f * x3}))
        verdict = decide_equivalence(omega0, omega1)
        assert verdict.outcome is Outcome.EQUIVALENT
        assert verdict.theorem_used == "sing"
        assert verdict.evidence["weights"] == [1, 1, 1, 1]
        assert verdict.evidence["nakayama_power"] == 1

    def test_classification_mismatch_in_r(self):
        """Hyperbolic and elliptic germs differ over R."""
        verdict = decide_equivalence(load("hyperbolic"), load("elliptic"), Category.R)
        assert verdict.outcome is Outcome.NOT_EQUIVALENT
        assert verdict.evidence["invariant"] == "sigma22_class"

    def test_classification_merged_in_c(self):
        """Over C only parabolic vs non-parabolic is an invariant."""
        verdict = decide_equivalence(load("hyperbolic"), load("elliptic"), Category.C)
        assert verdict.outcome is Outcome.INCONCLUSIVE
        assert verdict.evidence["failed"] == ["equal_restriction"]

    def test_different_hypersurfaces_inconclusive(self):
        """Moving Σ₂ by p1 ↦ p1 + x² leaves the decider without a common Σ₂."""
        omega = load("omega0")
        p1, x, y, z = (TruncatedPoly.variable(PXYZ, v, JET + 1) for v in PXYZ.vars)
        phi = PolyMapGerm(PXYZ, PXYZ, (p1 + x * x, x, y, z))
        verdict = decide_equivalence(omega, pullback(phi, omega))
        assert verdict.outcome is Outcome.INCONCLUSIVE
        assert verdict.evidence["failed"] == ["common_martinet_hypersurface"]

    def test_orientation_pair(self):
        """Opposite canonical orientations separate the pair over R only."""
        pair = orientation_pair(1, 2, 3, 1, 2, jet_order=JET)
        real = decide_equivalence(pair.omega0, pair.omega1, Category.R)
        assert real.outcome is Outcome.NOT_EQUIVALENT
        assert real.evidence["invariant"] == "canonical_orientation"
        complex_ = decide_equivalence(pair.omega0, pair.omega1, Category.C)
        assert complex_.outcome is Outcome.EQUIVALENT
        assert complex_.theorem_used == "inv-C"
        assert complex_.evidence["orientation_fix"] == "p1 -> i*p1"

    def test_reflection_resolves_orientation(self):
        """z ↦ −z reverses the orientation of Σ₂ but preserves everything else."""
        omega = load("omega0")
        flip = PolyMapGerm.linear(PXYZ, PXYZ, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]], JET + 1)
        verdict = decide_equivalence(omega, pullback(flip, omega), Category.R)
        assert verdict.outcome is Outcome.EQUIVALENT
        assert verdict.theorem_used == "inv-R"
        assert verdict.evidence["reflection"] == [1, 1, 1, -1]


class TestTemplates:
    """Tests for kernel_template_fit."""

    def test_first_shape(self):
        """α = dx − z dy fits the first template with e = −1."""
        fit = kernel_template_fit(load("omega0"))
        assert fit.shape == "first"
        assert (fit.C, fit.k, fit.e) == (0, 1, -1)

    def test_second_shape(self):
        """α = dy + z dx fits the second template."""
        fit = kernel_template_fit(load("omega1"))
        assert fit.shape == "second"
        assert (fit.C, fit.k, fit.e) == (0, 1, 1)

    def test_needs_kernel_field(self):
        """A hyperbolic restriction has no kernel field."""
        with pytest.raises(PreconditionError):
            kernel_template_fit(load("hyperbolic"))
