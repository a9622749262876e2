import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwlab.identities import (
    DegenerateSetupError,
    ReductionSetup,
    alpha_for_target,
    correction_phase,
    correction_poly,
    cyz_phase,
    surviving_poly,
    top_coefficient,
    total_phase,
    total_poly,
    verify_reduction,
)
from wwlab.observable import Observable
from wwlab.polyphase import PolyReal, faulhaber, leading_coeff
from wwlab.torus import HorizonError, Point, Rotation, circ_dist, iterate_closed_form

GOLDEN = (math.sqrt(5) - 1) / 2
CHI = Observable.character((1,))
FORMS = [(1, "paper-exact"), (2, "paper-exact"), (1, "generic"), (2, "generic"), (3, "generic")]


def make(m=1, form="generic", a=1, b=2, k=1, p=0, alpha=None, start=(0.1, 0.2, 0.3), f1=CHI, f2=CHI):
    if alpha is None:
        alpha = alpha_for_target(top_coefficient(a, b, m, k, form), m, 0.3)
    return ReductionSetup(a, b, m, k, alpha, Rotation(GOLDEN), f1, f2, Point.of(*start), form, p)


# --- constants


def test_degree_two_constant():
    # the m=1 constant b(b-a)q2 with a=1, b=2, q2=1
    assert top_coefficient(1, 2, 1, 1, "paper-exact") == 2
    assert make(1, "paper-exact").c_top == 2


def test_degree_three_constant():
    # 12 b q2 (b^2 - a^2) for the paper-exact m=2 form
    for a, b, k in [(1, 2, 1), (1, 3, 2), (-1, 2, 1), (2, 5, -1)]:
        q2 = a * k
        assert top_coefficient(a, b, 2, k, "paper-exact") == 12 * b * q2 * (b * b - a * a)


@pytest.mark.parametrize("m", range(1, 8))
@pytest.mark.parametrize("a, b, k", [(1, 2, 1), (2, 3, 1), (-1, 3, 2), (3, -2, -1)])
def test_generic_constant_matches_expansion(m, a, b, k):
    expected = Fraction(k * a * b * (b**m - a**m), m + 1)
    assert top_coefficient(a, b, m, k) == expected
    # independent compose-and-expand route
    s = faulhaber(m)
    combo = (-b * k) * s.compose_scale(a) + (a * k) * s.compose_scale(b)
    if expected:
        assert leading_coeff(combo, exact=True) == (m + 1, expected)


@pytest.mark.parametrize("a, b, m", [(0, 2, 1), (2, 0, 2), (-2, 2, 2), (1, -1, 4)])
def test_degenerate_setups(a, b, m):
    with pytest.raises(DegenerateSetupError):
        make(m, a=a, b=b, alpha=0.3)


def test_setup_validation():
    with pytest.raises(ValueError):
        make(a=2, b=2, alpha=0.3)
    with pytest.raises(ValueError):
        make(k=0, alpha=0.3)
    with pytest.raises(ValueError):
        make(start=(0.1, 0.2), alpha=0.3)


def test_frequency_constraints():
    s = make(2, a=3, b=-5, k=2, p=4)
    assert s.a * s.q1 + s.b * s.q2 == 0
    assert s.a * s.p1 + s.b * s.p2 == 0


# --- phases


def test_total_phase_m1_shape():
    s = make(1, "paper-exact", alpha=Fraction(1, 7), start=(0.1, Fraction(1, 5), Fraction(1, 3)))
    y, z = Fraction(1, 5), Fraction(1, 3)
    # (q1+q2) z + (a q1 + b q2) n y + 2 n^2 alpha, with a q1 + b q2 = 0
    expected = PolyReal([(s.q1 + s.q2) * z, 0, 2 * s.alpha])
    assert total_poly(s) == expected
    assert correction_poly(s).is_zero()


def test_generic_m1_correction_vanishes_without_p():
    assert correction_poly(make(1, "generic", alpha=0.3)).is_zero()


def test_phase_at_zero():
    s = make(2, p=3)
    assert total_phase(s, 0) == pytest.approx(float(cyz_phase(s) % 1))
    assert correction_phase(s, 0) == 0.0


@pytest.mark.parametrize("m, form", FORMS)
@settings(max_examples=10, deadline=None)
@given(
    y=st.fractions(0, 1, max_denominator=1000),
    z=st.fractions(0, 1, max_denominator=1000),
    k=st.integers(-3, 3).filter(bool),
    p=st.integers(-3, 3),
)
def test_defining_identity(m, form, y, z, k, p):
    s = make(m, form, k=k, p=p)
    diff = total_poly(s, y, z) - correction_poly(s, y, z) - surviving_poly(s, y, z)
    assert diff.is_zero()
    for n in (0, 1, 17, 9999):
        t = total_phase(s, n, y, z) - correction_phase(s, n, y, z)
        surv = float(surviving_poly(s, y, z).eval_exact(n) % 1)
        assert circ_dist(t, surv) <= 1e-9


@pytest.mark.parametrize("m, form", FORMS)
def test_dynamics_agreement(m, form):
    s = make(m, form, k=2, p=-1, start=(0.4, 0.15, 0.85))
    w = s.start
    for n in (0, 1, 5, 300, 4321):
        pa = iterate_closed_form(s.system, w, s.a * n)
        pb = iterate_closed_form(s.system, w, s.b * n)
        ya, za = pa.values[1:]
        yb, zb = pb.values[1:]
        read = s.p1 * ya + s.q1 * za + s.p2 * yb + s.q2 * zb
        assert circ_dist(float(read % 1), total_phase(s, n)) <= 1e-8


def test_horizon():
    with pytest.raises(HorizonError):
        total_phase(make(), 10**6 + 1)
    with pytest.raises(HorizonError):
        verify_reduction(make(), 10**6)


# --- verify_reduction


@pytest.mark.parametrize("m, form", FORMS)
def test_verify_reduction(m, form):
    r = verify_reduction(make(m, form, p=1), 10**4, t_target=0.3)
    assert r.passed and r.max_abs_gap <= 1e-8


def test_verify_constants_gives_weyl_average():
    one = Observable.constant(1, 1)
    r = verify_reduction(make(2, f1=one, f2=one), 5000)
    assert r.passed


def test_verify_single_term():
    r = verify_reduction(make(3, p=2), 1)
    assert r.max_abs_gap <= 1e-15


def test_verify_rejects_wrong_alpha():
    with pytest.raises(ValueError, match="target"):
        verify_reduction(make(1, alpha=0.123), 100, t_target=0.3)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("c", [2.0, -3.5, 72.0])
def test_alpha_for_target(m, c):
    for t in (0.0, 0.3, 0.99):
        a = alpha_for_target(c, m, t)
        assert circ_dist((c * a**m) % 1, t) < 1e-12
