"""Phase reduction for characters on a product with a skew extension.

Let ``U = T x R`` where ``R`` is a skew product on the two-torus and put
``F_j(x, y, z) = f_j(x) exp(2 pi i (p_j y + q_j z))``.  Along ``n`` the
character part of ``F_1(U^{an} w) F_2(U^{bn} w)`` is a polynomial in ``n``.
With ``a q_1 + b q_2 = 0`` and ``a p_1 + b p_2 = 0`` everything except a
constant and a single top-degree term ``c_top alpha^m n^{m+1}`` can be
divided out, which turns the double recurrence average on ``U`` into a
polynomial Wiener-Wintner average on ``T``.

The correction is obtained by subtracting the surviving terms from the
exact phase polynomial, so ``total - correction - surviving == 0`` holds
over the rationals.  :func:`verify_reduction` then checks the dynamics:
the orbit of ``U`` is iterated step by step and compared against the
reduced average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .engine import AverageSpec, trace
from .observable import Observable
from .polyphase import PolyReal, as_exact, faulhaber, frac_float, leading_coeff, phases
from .summation import prefix_sums
from .torus import (
    SAFE_HORIZON,
    HorizonError,
    Point,
    Product,
    Skew,
    SystemSpec,
    dimension,
    orbit_array,
    skew_fibre_poly,
)

GAP_TOLERANCE = 1e-8


class DegenerateSetupError(ValueError):
    pass


def top_coefficient(a: int, b: int, m: int, k_freq: int, form: str = "generic") -> Fraction:
    """Leading coefficient of ``q1 G(an) + q2 G(bn)``, ``G = s^m S_m``.

    ``S_m`` is the power-sum polynomial and ``s`` the skew's base stride;
    for the generic form this is ``q1 phi(an) + q2 phi(bn)``.
    """
    stride = Skew(m, 0, form).stride
    q1, q2 = -b * k_freq, a * k_freq
    g = faulhaber(m) * stride**m
    combo = q1 * g.compose_scale(a) + q2 * g.compose_scale(b)
    if combo.is_zero() or combo.degree != m + 1:
        return Fraction(0)
    return leading_coeff(combo, exact=True)[1]


@dataclass(frozen=True)
class ReductionSetup:
    a: int
    b: int
    m: int
    k_freq: int
    alpha: Fraction
    base: SystemSpec
    f1: Observable
    f2: Observable
    start: Point
    form: str = "generic"
    p_freq: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_exact(self.alpha))
        if self.a == self.b:
            raise ValueError("a and b must differ")
        if self.k_freq == 0:
            raise ValueError("k_freq must be nonzero")
        d = dimension(self.base)
        if self.f1.dim != d or self.f2.dim != d:
            raise ValueError("f1 and f2 must live on the base system")
        if len(self.start) != d + 2:
            raise ValueError(f"start point needs {d + 2} coordinates (base, y, z)")
        if self.c_top == 0:
            raise DegenerateSetupError(
                f"top coefficient vanishes for a={self.a}, b={self.b}, m={self.m}; "
                "choose exponents with a**m != b**m and both nonzero"
            )

    # frequencies, fixed by the constraints a q1 + b q2 = 0 = a p1 + b p2
    @property
    def q1(self) -> int:
        return -self.b * self.k_freq

    @property
    def q2(self) -> int:
        return self.a * self.k_freq

    @property
    def p1(self) -> int:
        return -self.b * self.p_freq

    @property
    def p2(self) -> int:
        return self.a * self.p_freq

    @property
    def skew(self) -> Skew:
        return Skew(self.m, self.alpha, self.form)

    @property
    def system(self) -> Product:
        return Product(self.base, self.skew)

    @property
    def c_top(self) -> Fraction:
        return top_coefficient(self.a, self.b, self.m, self.k_freq, self.form)

    @property
    def F1(self) -> Observable:
        return self.f1.tensor(Observable.character((self.p1, self.q1)))

    @property
    def F2(self) -> Observable:
        return self.f2.tensor(Observable.character((self.p2, self.q2)))

    def yz(self) -> tuple[Fraction, Fraction]:
        return self.start.values[-2], self.start.values[-1]


def alpha_for_target(c_top, m: int, t_target: float) -> float:
    """A real ``alpha`` with ``c_top * alpha**m == t_target (mod 1)``."""
    c = float(c_top)
    if c == 0:
        raise DegenerateSetupError("c_top is zero")
    t = t_target % 1.0
    if m % 2 == 0 and c < 0:
        t -= 1.0
    u = t / c
    return math.copysign(abs(u) ** (1.0 / m), u)


def _yz(setup: ReductionSetup, y, z):
    y0, z0 = setup.yz()
    return (y0 if y is None else as_exact(y)), (z0 if z is None else as_exact(z))


def total_poly(setup: ReductionSetup, y=None, z=None) -> PolyReal:
    """Character phase of ``F1(U^{an}) F2(U^{bn})`` (skew part) as a polynomial in ``n``."""
    y, z = _yz(setup, y, z)
    sk = setup.skew
    step = sk.stride * sk.alpha
    q = skew_fibre_poly(sk, y)
    out = PolyReal([setup.p1 * y, setup.p1 * setup.a * step])
    out = out + PolyReal([setup.p2 * y, setup.p2 * setup.b * step])
    out = out + setup.q1 * (z + q.compose_scale(setup.a))
    out = out + setup.q2 * (z + q.compose_scale(setup.b))
    return out


def cyz_phase(setup: ReductionSetup, y=None, z=None) -> Fraction:
    """Phase of the constant ``C_yz = exp(2 pi i ((p1+p2) y + (q1+q2) z))``."""
    y, z = _yz(setup, y, z)
    return (setup.p1 + setup.p2) * y + (setup.q1 + setup.q2) * z


def surviving_poly(setup: ReductionSetup, y=None, z=None) -> PolyReal:
    """``C_yz`` phase plus ``c_top alpha^m n^(m+1)``."""
    top = PolyReal.monomial(setup.m + 1, setup.c_top * setup.alpha**setup.m)
    return top + cyz_phase(setup, y, z)


def correction_poly(setup: ReductionSetup, y=None, z=None) -> PolyReal:
    return total_poly(setup, y, z) - surviving_poly(setup, y, z)


def _check_horizon(n: int):
    if abs(n) > SAFE_HORIZON:
        raise HorizonError(f"|n| = {abs(n)} exceeds the safe horizon {SAFE_HORIZON}")


def total_phase(setup: ReductionSetup, n: int, y=None, z=None) -> float:
    _check_horizon(n)
    return frac_float(total_poly(setup, y, z).eval_exact(n))


def correction_phase(setup: ReductionSetup, n: int, y=None, z=None) -> float:
    _check_horizon(n)
    return frac_float(correction_poly(setup, y, z).eval_exact(n))


@dataclass(frozen=True)
class IdentityReport:
    N: int
    max_abs_gap: float
    c_top: float
    lhs_tail: complex
    rhs_tail: complex

    @property
    def passed(self) -> bool:
        return self.max_abs_gap <= GAP_TOLERANCE


def default_checkpoints(N: int) -> list[int]:
    cps = [10**k for k in range(int(math.log10(N)) + 1) if 10**k < N]
    return cps + [N]


def verify_reduction(
    setup: ReductionSetup,
    N: int,
    t_target: float | None = None,
    checkpoints: Sequence[int] | None = None,
) -> IdentityReport:
    """Compare the corrected average on ``U`` with ``C_yz`` times the reduced average.

    The left side iterates the product system; the right side only uses
    the base orbit and the phase ``c_top alpha^m n^(m+1)``.
    """
    _check_horizon(N * max(abs(setup.a), abs(setup.b)))
    if t_target is not None:
        got = float(setup.c_top * setup.alpha**setup.m) % 1.0
        d = abs(got - t_target % 1.0)
        if min(d, 1.0 - d) > 1e-9:
            raise ValueError(f"alpha gives c_top alpha^m = {got} (mod 1), not the target {t_target}")
    cps = list(checkpoints) if checkpoints else default_checkpoints(N)
    w = setup.start
    lhs_u = setup.F1.evaluate(orbit_array(setup.system, w, N, setup.a))
    lhs_v = setup.F2.evaluate(orbit_array(setup.system, w, N, setup.b))
    corr = np.exp(-2j * np.pi * phases(correction_poly(setup), 1, N))
    lhs = [s / n for n, s in zip(cps, prefix_sums(lhs_u * lhs_v * corr, cps))]

    d = dimension(setup.base)
    x = Point(w.values[:d])
    reduced = PolyReal.monomial(setup.m + 1, setup.c_top * setup.alpha**setup.m)
    spec = AverageSpec(setup.base, setup.f1, setup.f2, setup.a, setup.b, reduced, x)
    c_yz = np.exp(2j * np.pi * frac_float(cyz_phase(setup)))
    rhs = [c_yz * r.value for r in trace(spec, 1, cps)]
    gap = max(abs(l - r) for l, r in zip(lhs, rhs))
    return IdentityReport(N, float(gap), float(setup.c_top), complex(lhs[-1]), complex(rhs[-1]))
