"""Polynomials in the time index and their phases modulo 1.

Coefficients are held as exact rationals.  Every finite float is a dyadic
rational, so converting inputs with ``Fraction(x)`` loses nothing, and the
phase ``p(n) * t mod 1`` can be produced exactly and rounded once at the
end.  That matters: for a degree-4 polynomial at ``n = 1e5`` the phase
multiplies the leading coefficient by ``1e20``, far beyond what a float
accumulator can carry.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Iterable, Iterator, Sequence

import numpy as np

Number = int | float | Fraction

#: Degree reported for the zero polynomial.
ZERO_DEGREE = float("-inf")

#: Largest power accepted by :func:`faulhaber`.
FAULHABER_MAX = 12


def as_exact(x) -> Fraction:
    """Convert a number (or a ``"p/q"`` string) to an exact ``Fraction``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError(f"non-finite value {x!r}")
    return Fraction(xf)


def frac_float(x: Fraction) -> float:
    """Round ``x mod 1`` to a float in ``[0, 1)``."""
    r = x.numerator % x.denominator
    v = r / x.denominator
    return 0.0 if v >= 1.0 else v


class PolyReal:
    """Real polynomial ``sum(c[i] * n**i)`` with exact rational coefficients.

    Trailing zeros are trimmed, so ``degree`` is the index of the last stored
    coefficient (``ZERO_DEGREE`` for the zero polynomial).
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        c = [as_exact(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c: tuple[Fraction, ...] = tuple(c)

    # construction helpers

    @classmethod
    def monomial(cls, k: int, coeff: Number = 1) -> "PolyReal":
        return cls([0] * k + [coeff])

    @classmethod
    def constant(cls, c: Number) -> "PolyReal":
        return cls([c])

    @classmethod
    def from_json(cls, data: Sequence) -> "PolyReal":
        return cls(data)

    def to_json(self) -> list:
        out = []
        for c in self._c:
            f = float(c)
            out.append(f if Fraction(f) == c else str(c))
        return out

    # views

    @property
    def exact(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def coeffs(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self._c)

    @property
    def degree(self):
        return len(self._c) - 1 if self._c else ZERO_DEGREE

    def is_zero(self) -> bool:
        return not self._c

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self._c)

    def denominator(self) -> int:
        """Least common denominator of the coefficients."""
        d = 1
        for c in self._c:
            d = math.lcm(d, c.denominator)
        return d

    # evaluation

    def eval(self, n) -> float:
        """Horner evaluation in double precision."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def eval_exact(self, n) -> Fraction:
        n = as_exact(n)
        acc = Fraction(0)
        for c in reversed(self._c):
            acc = acc * n + c
        return acc

    # algebra

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        return PolyReal([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return PolyReal([-c for c in self._c])

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PolyReal):
            if self.is_zero() or other.is_zero():
                return PolyReal()
            out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
            for i, x in enumerate(self._c):
                for j, y in enumerate(other._c):
                    out[i + j] += x * y
            return PolyReal(out)
        try:
            s = as_exact(other)
        except (TypeError, ValueError):
            return NotImplemented
        return PolyReal([c * s for c in self._c])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PolyReal([1])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, PolyReal):
            return self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return f"PolyReal({[str(c) if c.denominator != 1 else int(c) for c in self._c]})"

    def compose_scale(self, a: Number) -> "PolyReal":
        """Return ``n -> p(a * n)``."""
        a = as_exact(a)
        return PolyReal([c * a**i for i, c in enumerate(self._c)])

    def shift(self, h: Number) -> "PolyReal":
        """Return ``n -> p(n + h)`` by binomial expansion."""
        h = as_exact(h)
        out = [Fraction(0)] * len(self._c)
        for i, c in enumerate(self._c):
            for j in range(i + 1):
                out[j] += c * comb(i, j) * h ** (i - j)
        return PolyReal(out)


def _coerce(x):
    if isinstance(x, PolyReal):
        return x
    try:
        return PolyReal([as_exact(x)])
    except (TypeError, ValueError):
        return NotImplemented


def difference(p: PolyReal, h: int) -> PolyReal:
    """``q_h(n) = p(n + h) - p(n)``; drops the degree by one when ``h != 0``."""
    return p.shift(h) - p


def _bernoulli_table(kmax: int) -> tuple[Fraction, ...]:
    # B_1 = -1/2 convention, matching sums that stop at n - 1.
    b = [Fraction(1)]
    for m in range(1, kmax + 1):
        b.append(-sum(comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return tuple(b)


BERNOULLI = _bernoulli_table(FAULHABER_MAX)


def faulhaber(q: int) -> PolyReal:
    """Power-sum polynomial ``S_q(n) = sum(l**q for l in range(n))``."""
    if not 0 <= q <= FAULHABER_MAX:
        raise ValueError(f"faulhaber: power {q} outside the table range 0..{FAULHABER_MAX}")
    coeffs = [Fraction(0)] * (q + 2)
    for j in range(q + 1):
        coeffs[q + 1 - j] += Fraction(comb(q + 1, j)) * BERNOULLI[j] / (q + 1)
    return PolyReal(coeffs)


def leading_coeff(p: PolyReal, exact: bool = False):
    """Return ``(degree, leading coefficient)``."""
    if p.is_zero():
        raise ValueError("leading_coeff of the zero polynomial")
    c = p.exact[-1]
    return p.degree, (c if exact else float(c))


def split(p: PolyReal) -> tuple[PolyReal, PolyReal]:
    """Split ``p`` into its leading monomial and the remainder."""
    deg, c = leading_coeff(p, exact=True)
    top = PolyReal.monomial(deg, c)
    return top, p - top


# ---------------------------------------------------------------- phases


def _scaled_integer_coeffs(p: PolyReal, t) -> tuple[list[int], int]:
    """Integers ``C`` and modulus ``D`` with ``p(n) * t == sum(C[j] n^j) / D``."""
    t = as_exact(t)
    scaled = [c * t for c in p.exact]
    d = 1
    for c in scaled:
        d = math.lcm(d, c.denominator)
    return [int(c * d) for c in scaled], d


class PhaseStream:
    """Successive phases ``p(n) * t mod 1`` for ``n = start, start + 1, ...``.

    The state is the vector of forward differences of ``p(n) * t`` held as
    integers modulo the common denominator, so each step is ``degree``
    exact additions and the output carries a single rounding.
    """

    def __init__(self, p: PolyReal, t, start: int = 0):
        coeffs, d = _scaled_integer_coeffs(p, t)
        self.poly = p
        self.scale = as_exact(t)
        self._mod = d
        k = max(len(coeffs) - 1, 0)

        def g(n: int) -> int:
            acc = 0
            for c in reversed(coeffs):
                acc = acc * n + c
            return acc

        vals = [g(start + i) for i in range(k + 1)]
        regs = []
        for _ in range(k + 1):
            regs.append(vals[0] % d)
            vals = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
        self._regs = regs
        self.position = start

    @property
    def registers(self) -> tuple[float, ...]:
        return tuple(r / self._mod for r in self._regs)

    def next(self) -> float:
        regs, d = self._regs, self._mod
        out = regs[0]
        for j in range(len(regs) - 1):
            regs[j] = (regs[j] + regs[j + 1]) % d
        self.position += 1
        v = out / d
        return 0.0 if v >= 1.0 else v

    __next__ = next

    def __iter__(self) -> Iterator[float]:
        return self


def phase_stream(p: PolyReal, t, start: int = 0) -> PhaseStream:
    return PhaseStream(p, t, start)


_U64 = 1 << 64


def phases(p: PolyReal, t, count: int, start: int = 0, stride: int = 1) -> np.ndarray:
    """Array of ``p(start + stride * i) * t mod 1`` for ``i < count``.

    Exact modular integer arithmetic; vectorised when the common
    denominator is a power of two up to ``2**64`` (any float ``t`` with a
    dyadic polynomial) or below ``2**31``, streamed otherwise.
    """
    if count <= 0:
        return np.zeros(0)
    if stride != 1:
        p = p.shift(start).compose_scale(stride)
        start = 0
    coeffs, d = _scaled_integer_coeffs(p, t)
    if not coeffs or d == 1:
        return np.zeros(count)
    if d & (d - 1) == 0 and d <= _U64:
        n = (np.arange(count, dtype=np.int64) + np.int64(start)).view(np.uint64)
        acc = np.zeros(count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            for c in reversed(coeffs):
                acc = acc * n + np.uint64(c % _U64)
        acc &= np.uint64(d - 1)
        if d <= 1 << 53:
            out = acc.astype(np.float64) / d
        else:
            # split so the conversion does not round up to 1.0
            shift = (d.bit_length() - 1) - 53
            hi = (acc >> np.uint64(shift)).astype(np.float64)
            lo = (acc & np.uint64((1 << shift) - 1)).astype(np.float64)
            out = hi * 2.0**-53 + lo * 2.0 ** -(53 + shift)
        out[out >= 1.0] = 0.0
        return out
    if d < 1 << 31:
        n = (np.arange(count, dtype=np.int64) + start) % d
        acc = np.zeros(count, dtype=np.int64)
        for c in reversed(coeffs):
            acc = (acc * n + (c % d)) % d
        return acc / d
    s = PhaseStream(p, t, start)
    return np.fromiter((s.next() for _ in range(count)), dtype=np.float64, count=count)


def _two_product(a: np.ndarray, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Dekker product: ``hi + lo == a * b`` exactly (no overflow assumed)."""
    split = 134217729.0  # 2**27 + 1
    hi = a * b
    ca = split * a
    a_hi = ca - (ca - a)
    a_lo = a - a_hi
    cb = split * b
    b_hi = cb - (cb - b)
    b_lo = b - b_hi
    lo = ((a_hi * b_hi - hi) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return hi, lo


class SplitValues:
    """``p(n)`` for a range of ``n`` stored as unevaluated float pairs.

    ``hi + lo`` carries about 106 bits, so ``phase(t)`` can reduce
    ``p(n) * t`` modulo 1 accurately with plain float arithmetic.  This is
    the independent evaluation path used by grid scans and by tests.
    """

    def __init__(self, p: PolyReal, n: Sequence[int] | np.ndarray):
        d = p.denominator()
        coeffs = [int(c * d) for c in p.exact]
        hi, lo = [], []
        for k in n:
            k, v = int(k), 0
            for c in reversed(coeffs):
                v = v * k + c
            # int / int rounds correctly; the residual is exact before its one rounding
            h = v / d
            num, den = h.as_integer_ratio()
            hi.append(h)
            lo.append((v * den - num * d) / (d * den))
        self.hi, self.lo = np.array(hi, dtype=float), np.array(lo, dtype=float)

    def phase(self, t: float) -> np.ndarray:
        t = float(t)
        ph, pl = _two_product(self.hi, t)
        fr = ph - np.floor(ph)
        out = np.mod(fr + (pl + self.lo * t), 1.0)
        out[out >= 1.0] = 0.0
        return out
