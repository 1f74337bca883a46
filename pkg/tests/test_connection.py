import pytest
from hypothesis import given, settings

from adapted_star.connection import (
    ConnectionSpec,
    InvalidConnection,
    curvature_gamma,
    d_base,
    leafwise_homotopy,
    nabla,
    nabla_frame,
    ordered_curvature,
    symmetric_curvature,
    validate_connection,
)
from adapted_star.ideals import ideal_I_generators, in_ideal_I
from adapted_star.koszul import delta
from adapted_star.parse import parse_expression
from adapted_star.ring import BasePoly
from adapted_star.weyl import ChartContext, WeylForm, ad_over_lambda, circ, filtration_degree
from conftest import nonflat_spec_n1, nonflat_spec_n2
from strategies import weyl_forms

C1 = ChartContext(1)
C2 = ChartContext(2)
CASES = [(C1, ConnectionSpec.flat(1)), (C1, nonflat_spec_n1()), (C2, ConnectionSpec.flat(2)), (C2, nonflat_spec_n2())]
IDS = ["flat1", "curved1", "flat2", "curved2"]


def P(s, n=1):
    return parse_expression(s, n)


def test_flat_is_admissible():
    assert validate_connection(ConnectionSpec.flat(2), C2).ok


@pytest.mark.parametrize("ctx,spec", CASES, ids=IDS)
def test_shipped_specs_are_admissible(ctx, spec):
    assert validate_connection(spec, ctx).ok


def test_asymmetric_spec_is_rejected():
    spec = ConnectionSpec(1, {(1, 1, 2): P("x1"), (1, 2, 1): P("p1"), (2, 1, 1): P("x1")})
    report = validate_connection(spec, C1)
    assert not report.ok
    assert any(v.kind == "symmetry" for v in report.violations)
    with pytest.raises(InvalidConnection):
        nabla(WeylForm.xi(C1, 4, 1), spec)


def test_all_p_indices_break_self_parallelism():
    # Gamma_{ppp} raises with the off-diagonal omega to a dx-component of nabla_{d/dp} d/dp
    spec = ConnectionSpec.symmetric(1, {(2, 2, 2): P("x1")})
    report = validate_connection(spec, C1)
    assert [v.kind for v in report.violations] == ["self-parallel"]
    e = nabla_frame(C1, spec, 4, 2)
    # the frame formula confirms nabla_{d/dp} (d/dp) has an L'-component
    assert any(k[2][0] and k[3] == 0b10 for k in e.keys())


def test_all_x_indices_are_admissible():
    spec = ConnectionSpec.symmetric(1, {(1, 1, 1): P("x1*p1 + 2")})
    assert validate_connection(spec, C1).ok


def test_dimension_mismatch():
    assert not validate_connection(ConnectionSpec.flat(1), C2).ok


def test_symmetric_constructor_fills_permutations():
    spec = ConnectionSpec.symmetric(1, {(1, 1, 2): P("x1")})
    assert spec.coeff(2, 1, 1) == spec.coeff(1, 2, 1) == P("x1")
    assert spec.coeff(2, 2, 2).is_zero()


@pytest.mark.parametrize("ctx,spec", CASES, ids=IDS)
def test_frame_formula(ctx, spec):
    for j in range(1, ctx.dim + 1):
        assert nabla(WeylForm.generator(ctx, 4, j), spec) == nabla_frame(ctx, spec, 4, j)


@pytest.mark.parametrize("ctx,spec", CASES[1::2], ids=IDS[1::2])
def test_on_forms_nabla_is_d(ctx, spec):
    f = WeylForm.from_base(BasePoly(ctx.n, {(1,) * ctx.dim: 3}), 4, ctx)
    assert nabla(f, spec) == d_base(f)
    assert d_base(d_base(f)).is_zero()


def test_d_base_example():
    f = WeylForm.from_base(P("x1^2*p1"), 4, C1)
    want = WeylForm.monomial(C1, 4, 2, base=(1, 1), form=(1,)) + WeylForm.monomial(C1, 4, 1, base=(2, 0), form=(2,))
    assert d_base(f) == want


@given(weyl_forms(C2, 5, max_terms=3, max_form_degree=1), weyl_forms(C2, 5, max_terms=3, max_form_degree=1))
def test_graded_leibniz(a, b):
    spec = nonflat_spec_n2()
    res = nabla(circ(a, b), spec) - circ(nabla(a, spec), b)
    for deg in a.form_degrees():
        res = res - circ(a.component(form_degree=deg), nabla(b, spec)) * (-1) ** deg
    assert res.is_zero()


@pytest.mark.parametrize("ctx,spec", CASES, ids=IDS)
def test_curvature_gamma_shape(ctx, spec):
    g = curvature_gamma(spec, ctx, 4)
    if spec.is_flat():
        assert g.is_zero()
        return
    assert g.form_degrees() == {2}
    assert filtration_degree(g) == 2 and all(sum(k[2]) + 2 * k[0] == 2 for k in g.keys())
    assert in_ideal_I(g)
    # Gamma differs from both orderings by central terms only
    for other in (ordered_curvature(spec, ctx, 4), symmetric_curvature(spec, ctx, 4)):
        assert all(not any(k[2]) for k in (g - other).keys())


@pytest.mark.parametrize("ctx,spec", CASES, ids=IDS)
def test_bianchi(ctx, spec):
    g = curvature_gamma(spec, ctx, 5)
    assert delta(g).is_zero()
    assert nabla(g, spec).is_zero()


def test_ordered_curvature_central_part_not_closed():
    # the reason Gamma carries an exact correction: the literal ordered sum fails nabla Gamma = 0
    spec = nonflat_spec_n2()
    g = ordered_curvature(spec, C2, 4)
    assert in_ideal_I(g)
    assert not nabla(g, spec).is_zero()


@pytest.mark.parametrize("ctx,spec", CASES, ids=IDS)
@settings(max_examples=25)
@given(seed=weyl_forms(C2, 5, max_terms=3, max_form_degree=1))
def test_curvature_identity(ctx, spec, seed):
    a = seed if ctx.n == 2 else WeylForm(ctx, 5, {(k[0], k[1][::2], k[2][::2], 1 if k[3] else 0): c for k, c in seed.items()})
    gamma = curvature_gamma(spec, ctx, 5)
    assert nabla(nabla(a, spec), spec) == ad_over_lambda(gamma, a)


@pytest.mark.parametrize("ctx,spec", CASES, ids=IDS)
def test_nabla_preserves_I(ctx, spec):
    for g in ideal_I_generators(ctx, 4):
        assert in_ideal_I(nabla(g, spec))
    for g in ideal_I_generators(ctx, 4):
        b = WeylForm.from_base(BasePoly(ctx.n, {(1,) * ctx.dim: 1}), 4, ctx) + WeylForm.xi(ctx, 4, 1)
        assert in_ideal_I(nabla(circ(b, g), spec))


def test_leafwise_homotopy():
    # h(p dp) = p^2 / 2 and d h + h d = Id on dp-forms of positive degree
    a = WeylForm.monomial(C1, 4, 1, base=(0, 1), form=(2,))
    assert leafwise_homotopy(a) == WeylForm.from_base(P("1/2*p1^2"), 4, C1)
    b = WeylForm.monomial(C2, 4, 1, base=(0, 0, 1, 0), form=(3, 4))
    back = d_base(leafwise_homotopy(b)) + leafwise_homotopy(d_base(b))
    assert back == b
