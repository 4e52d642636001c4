from __future__ import annotations

from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _fixtures import BL1P2, ONE, P2, SEGMENT, SQUARE, UNIT_SQUARE, affine_power, p1_fixtures
from wkahler.dh import IntegrationError, Measure, barycenter, barycenter_p1_closed_form, integral, moment, vol_v
from wkahler.geometry import contains, polytope_from_vertices
from wkahler.scalar import ValidationError
from wkahler.weights import Constant, LogAffine, PolyProduct, add_weights


def M(P, v):
    return Measure(P, v)


def test_vol_v_examples():
    assert vol_v(M(SEGMENT, ONE)) == 2
    assert vol_v(M(SEGMENT, affine_power(1, 3, 2))) == Q(56, 3)
    assert vol_v(M(UNIT_SQUARE, ONE)) == 1


def test_moment_examples():
    assert moment(M(SEGMENT, ONE), 0) == 0
    assert moment(M(SEGMENT, affine_power(1, 3, 2)), 0) == 4
    assert moment(M(SQUARE, ONE), 0) == 0


def test_barycenter_examples():
    assert barycenter(M(SEGMENT, affine_power(1, 3, 2))) == (Q(3, 14),)
    assert barycenter(M(SEGMENT, affine_power(2, 3, 2))) == (Q(12, 31),)
    even = PolyProduct(tuple((n, Q(3), 1) for n in ((Q(1), Q(0)), (Q(-1), Q(0)), (Q(0), Q(1)), (Q(0), Q(-1)))))
    assert barycenter(M(SQUARE, even)) == (0, 0)
    assert barycenter(M(BL1P2, ONE)) == (Q(1, 12), Q(1, 12))


def test_barycenter_closed_form_examples():
    assert barycenter_p1_closed_form(1, 3, 2, 1) == Q(3, 14)
    assert barycenter_p1_closed_form(1, 2, 3, 1) == Q(21, 50)
    assert barycenter_p1_closed_form(2, 3, 2, 1) == Q(12, 31)


@pytest.mark.parametrize("args", [(0, 3, 2, 1), (1, 1, 2, 1), (-1, 3, 2, 1)])
def test_barycenter_closed_form_rejects_bad_data(args):
    with pytest.raises(ValidationError):
        barycenter_p1_closed_form(*args)


def test_measure_validation():
    with pytest.raises(ValidationError):
        Measure(SEGMENT, affine_power(1, 1, 1))
    with pytest.raises(ValidationError):
        Measure(polytope_from_vertices([(0, 0), (1, 1)]), ONE)


def test_quadrature_for_non_polynomial_weight():
    v = LogAffine((Q(1),), Q(0))
    res = integral(M(SEGMENT, v))
    e = 2.718281828459045
    assert res.value == pytest.approx(e - 1 / e, rel=1e-10)
    assert res.residual < 1e-8
    assert barycenter(M(SEGMENT, v))[0] == pytest.approx(2 / (e * e - 1), rel=1e-9)


def test_quadrature_non_convergence_reports_residual():
    v = LogAffine((Q(60),), Q(0))
    with pytest.raises(IntegrationError) as info:
        integral(M(SEGMENT, v), tol=1e-15, max_order=2)
    assert info.value.residual > 0


# -- properties -------------------------------------------------------------------

@pytest.mark.parametrize("p,c,d,lam", p1_fixtures())
def test_closed_form_matches_generic_barycenter(p, c, d, lam):
    v = affine_power(p * lam, c, d)
    assert barycenter(M(SEGMENT, v)) == (barycenter_p1_closed_form(p, c, d, lam),)


shift = st.fractions(min_value=-2, max_value=2, max_denominator=5)


@given(st.tuples(shift, shift), st.sampled_from([ONE, affine_power((1, 1), 5, 2), affine_power((0, 1), 4, 1)]))
def test_barycenter_translation_covariance(t, v):
    b = barycenter(M(P2, v))
    bt = barycenter(M(P2.translate(t), v.translate(t)))
    assert bt == tuple(x + s for x, s in zip(b, t))


@given(st.sampled_from([ONE, affine_power((1, 1), 5, 2), affine_power((1, 0), 3, 1)]))
def test_barycenter_lies_in_polytope(v):
    assert contains(P2, barycenter(M(P2, v)))


def test_vol_linear_in_weight():
    v1, v2 = affine_power(1, 3, 2), affine_power(2, 3, 2)
    total = vol_v(M(SEGMENT, add_weights(v1, v2)))
    assert total == pytest.approx(float(vol_v(M(SEGMENT, v1)) + vol_v(M(SEGMENT, v2))), rel=1e-9)


def test_constant_weight_barycenter_is_weight_free():
    assert barycenter(M(BL1P2, Constant(Q(7)))) == barycenter(M(BL1P2, ONE))
