from hypothesis import given

from adapted_star.koszul import delta, delta_inv, homotopy_defect, tau
from adapted_star.ring import BasePoly, Rational
from adapted_star.weyl import ChartContext, WeylForm, circ
from strategies import weyl_forms

C1 = ChartContext(1)
C2 = ChartContext(2)
K = 4


def dz(ctx, i):
    return WeylForm.dz(ctx, K, i)


def test_delta_on_frame():
    assert delta(WeylForm.xi(C1, K, 1)) == dz(C1, 2)
    assert delta(WeylForm.eta(C1, K, 1)) == -dz(C1, 1)
    assert delta(WeylForm.xi(C2, K, 2)) == dz(C2, 4)
    assert delta(WeylForm.eta(C2, K, 2)) == -dz(C2, 2)


def test_delta_inv_examples():
    assert delta_inv(dz(C1, 2)) == WeylForm.xi(C1, K, 1)
    assert delta_inv(dz(C1, 1)) == -WeylForm.eta(C1, K, 1)
    f = WeylForm.from_base(BasePoly(1, {(2, 1): 3, (0, 0): 1}), K)
    assert delta_inv(f).is_zero()
    a = WeylForm.monomial(C1, K, 1, fiber=(1, 0), form=(2,))
    assert delta_inv(a) == WeylForm.monomial(C1, K, Rational(1, 2), fiber=(2, 0))


def test_delta_is_a_derivation_of_the_symmetric_part():
    xi = WeylForm.xi(C1, K, 1)
    assert delta(circ(xi, xi)) == circ(dz(C1, 2), xi) * 2


def test_tau_keeps_lambda_drops_rest():
    a = WeylForm.monomial(C1, K, 2, lambda_pow=1, base=(1, 0)) + WeylForm.xi(C1, K, 1) + dz(C1, 1)
    assert tau(a) == WeylForm.monomial(C1, K, 2, lambda_pow=1, base=(1, 0))


@given(weyl_forms(C2, 6))
def test_homotopy_identity(a):
    assert homotopy_defect(a).is_zero()


@given(weyl_forms(C2, 5))
def test_nilpotent(a):
    assert delta(delta(a)).is_zero()
    assert delta_inv(delta_inv(a)).is_zero()


@given(weyl_forms(C2, 5))
def test_tau_is_a_projection(a):
    assert tau(tau(a)) == tau(a)
    assert tau(delta(a)).is_zero() and tau(delta_inv(a)).is_zero()


@given(weyl_forms(C2, 5))
def test_bidegrees(a):
    for k in delta(a).keys():
        assert k[3]
    out = delta_inv(a)
    assert all(any(k[2]) for k in out.keys())
    for m in range(6):
        part = a.component(fiber_degree=m)
        d = delta(part)
        if d:
            assert d.fiber_degrees() == {m - 1}


@given(weyl_forms(C2, 5, form_degree=0))
def test_zero_forms_closed_only_if_constant_in_fiber(a):
    # delta a = 0 on a 0-form forces a = tau(a)
    if delta(a).is_zero():
        assert a == tau(a)
