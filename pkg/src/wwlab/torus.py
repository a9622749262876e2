"""Rotations, Anzai skew products and their products on tori.

Angles are measured in turns.  Observables only ever see coordinates
reduced to ``[0, 1)``, but the state itself is exact: parameters and
coordinates are rationals (every float is one), and orbits are advanced
with integer arithmetic over a common denominator.  The skew products
``z -> z + y**m`` with ``m >= 2`` are the reason.  Their cocycle is a
polynomial in the *real* base coordinate, so the base coordinate of a
skew keeps its lift ``y + n * alpha`` (never reduced), and the fibre
coordinate at time ``n`` has sensitivity of order ``n**m`` to the base
coordinate, which no fixed-precision float recursion survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence, Union

import numpy as np

from .polyphase import PolyReal, as_exact, faulhaber, frac_float

#: Largest |n| accepted by :func:`iterate_closed_form`.
SAFE_HORIZON = 10**6
#: Circular agreement promised between closed forms and iterated orbits.
ORBIT_TOLERANCE = 1e-8

FORMS = ("generic", "paper-exact")


class DimensionError(ValueError):
    pass


class HorizonError(ValueError):
    pass


class UnsupportedSystemError(TypeError):
    pass


# ------------------------------------------------------------------ angles


def wrap(x: float) -> float:
    """Reduce ``x`` to ``[0, 1)``."""
    v = x % 1.0
    return 0.0 if v >= 1.0 else v


def circ_dist(a, b):
    """Circular distance on ``R/Z``; works elementwise on arrays."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0)
    return np.minimum(d, 1.0 - d) if np.ndim(d) else float(min(d, 1.0 - d))


# ------------------------------------------------------------------ systems


@dataclass(frozen=True)
class Rotation:
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_exact(self.alpha) % 1)


@dataclass(frozen=True)
class Skew:
    """Anzai skew product on the two-torus.

    ``form="generic"``: ``(y, z) -> (y + alpha, z + y**m)``.
    ``form="paper-exact"``: ``m=1`` is ``(y + 2 alpha, z + y + alpha)`` and
    ``m=2`` is ``(y + 6 alpha, z + y**2 - alpha**2)``.

    ``alpha`` is not reduced modulo 1: the cocycle sees the lift.
    """

    m: int
    alpha: Fraction
    form: str = "generic"

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_exact(self.alpha))
        if self.form not in FORMS:
            raise ValueError(f"unknown skew form {self.form!r}")
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"skew degree must be a positive integer, got {self.m!r}")
        if self.form == "paper-exact" and self.m not in (1, 2):
            raise ValueError("paper-exact skew forms exist for m = 1 and m = 2 only")
        if self.m > 11:
            raise ValueError("skew degree above 11 exceeds the power-sum table")

    @property
    def stride(self) -> int:
        """Multiple of ``alpha`` added to the base coordinate per step."""
        if self.form == "generic":
            return 1
        return 2 if self.m == 1 else 6

    def cocycle(self) -> PolyReal:
        """The fibre increment as a polynomial in the base coordinate."""
        a = self.alpha
        if self.form == "generic":
            return PolyReal.monomial(self.m)
        if self.m == 1:
            return PolyReal([a, 1])
        return PolyReal([-a * a, 0, 1])


@dataclass(frozen=True)
class Product:
    left: "SystemSpec"
    right: "SystemSpec"


SystemSpec = Union[Rotation, Skew, Product]


def dimension(sys: SystemSpec) -> int:
    if isinstance(sys, Rotation):
        return 1
    if isinstance(sys, Skew):
        return 2
    if isinstance(sys, Product):
        return dimension(sys.left) + dimension(sys.right)
    raise UnsupportedSystemError(f"not a system: {sys!r}")


def leaves(sys: SystemSpec) -> list[Rotation | Skew]:
    if isinstance(sys, Product):
        return leaves(sys.left) + leaves(sys.right)
    dimension(sys)
    return [sys]


def system_to_json(sys: SystemSpec) -> dict:
    def num(x: Fraction):
        f = float(x)
        return f if Fraction(f) == x else str(x)

    if isinstance(sys, Rotation):
        return {"type": "rotation", "alpha": num(sys.alpha)}
    if isinstance(sys, Skew):
        return {"type": "skew", "m": sys.m, "alpha": num(sys.alpha), "form": sys.form}
    if isinstance(sys, Product):
        return {"type": "product", "left": system_to_json(sys.left), "right": system_to_json(sys.right)}
    raise UnsupportedSystemError(f"not a system: {sys!r}")


def system_from_json(data: dict) -> SystemSpec:
    kind = data.get("type")
    if kind == "rotation":
        return Rotation(data["alpha"])
    if kind == "skew":
        return Skew(int(data["m"]), data["alpha"], data.get("form", "generic"))
    if kind == "product":
        return Product(system_from_json(data["left"]), system_from_json(data["right"]))
    raise ValueError(f"unknown system type {kind!r}")


# ------------------------------------------------------------------ points


@dataclass(frozen=True)
class Point:
    """A point on the system's torus.

    ``values`` holds the exact coordinates.  Coordinates are in ``[0, 1)``
    except the base coordinate of a skew product, which keeps its lift
    once the point has been moved.  ``coords`` is the reduced float view.
    """

    values: tuple[Fraction, ...]
    coords: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = tuple(as_exact(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "coords", tuple(frac_float(v) for v in vals))

    @classmethod
    def of(cls, *xs) -> "Point":
        return cls(tuple(as_exact(x) % 1 for x in xs))

    def __len__(self):
        return len(self.values)


def _check_dim(sys: SystemSpec, pt: Point):
    d = dimension(sys)
    if len(pt) != d:
        raise DimensionError(f"point has {len(pt)} coordinates, system needs {d}")


# ------------------------------------------------------------------ kernels


class _RotationKernel:
    def __init__(self, sys: Rotation, values: Sequence[Fraction]):
        (y,) = values
        self.den = math.lcm(sys.alpha.denominator, y.denominator)
        self.shift = int(sys.alpha * self.den)
        self.state = [int(y % 1 * self.den)]

    def advance(self, k: int):
        self.state[0] = (self.state[0] + k * self.shift) % self.den

    def values(self) -> list[Fraction]:
        return [Fraction(self.state[0], self.den)]

    def coords(self) -> list[float]:
        return [self.state[0] / self.den]

    def series(self, count: int, stride: int) -> np.ndarray | None:
        """Vectorised coordinates for ``count`` samples, or ``None``."""
        den = self.den
        if den & (den - 1) or den > 1 << 64:
            return None
        start = np.uint64(self.state[0])
        step = np.uint64((stride * self.shift) % (1 << 64))
        with np.errstate(over="ignore"):
            acc = start + np.arange(count, dtype=np.uint64) * step
        acc &= np.uint64(den - 1)
        out = acc.astype(np.float64) / den
        out[out >= 1.0] = 0.0
        self.advance(stride * count)
        return out[:, None]


class _SkewKernel:
    def __init__(self, sys: Skew, values: Sequence[Fraction]):
        y, z = values
        sigma = sys.cocycle()
        deg = max(sigma.degree, 0)
        den = math.lcm(sys.alpha.denominator, y.denominator)
        base = den**deg
        scaled = [c * den ** (deg - j) for j, c in enumerate(sigma.exact)]
        lcm_c = 1
        for c in scaled:
            lcm_c = math.lcm(lcm_c, c.denominator)
        fden = math.lcm(base * lcm_c, (z % 1).denominator)
        mult = fden // base
        self.den, self.fden = den, fden
        self.shift = int(sys.stride * sys.alpha * den)
        self.poly = [int(c * mult) for c in scaled]
        self.state = [int(y * den), int(z % 1 * fden)]

    def _sigma(self, y: int) -> int:
        acc = 0
        for c in reversed(self.poly):
            acc = acc * y + c
        return acc

    def advance(self, k: int):
        y, z = self.state
        poly, fden, shift = self.poly, self.fden, self.shift
        if 0 <= k <= 8:
            for _ in range(k):
                z = (z + self._sigma(y)) % fden
                y += shift
        elif k > 8:
            # sigma along the base orbit is a polynomial in the step count,
            # so one step is a few register additions modulo fden
            deg = len(poly) - 1
            vals = [self._sigma(y + i * shift) for i in range(deg + 1)]
            regs = []
            for _ in range(deg + 1):
                regs.append(vals[0] % fden)
                vals = [b - a for a, b in zip(vals, vals[1:])]
            if deg == 1:
                r0, r1 = regs
                for _ in range(k):
                    z = (z + r0) % fden
                    r0 = (r0 + r1) % fden
            elif deg == 2:
                r0, r1, r2 = regs
                for _ in range(k):
                    z = (z + r0) % fden
                    r0 = (r0 + r1) % fden
                    r1 = (r1 + r2) % fden
            elif deg == 3:
                r0, r1, r2, r3 = regs
                for _ in range(k):
                    z = (z + r0) % fden
                    r0 = (r0 + r1) % fden
                    r1 = (r1 + r2) % fden
                    r2 = (r2 + r3) % fden
            else:
                for _ in range(k):
                    z = (z + regs[0]) % fden
                    for j in range(deg):
                        regs[j] = (regs[j] + regs[j + 1]) % fden
            y += k * shift
        else:
            for _ in range(-k):
                y -= shift
                z = (z - self._sigma(y)) % fden
        self.state = [y, z]

    def values(self) -> list[Fraction]:
        return [Fraction(self.state[0], self.den), Fraction(self.state[1], self.fden)]

    def coords(self) -> list[float]:
        y, z = self.state
        return [(y % self.den) / self.den, z / self.fden]

    def series(self, count: int, stride: int) -> np.ndarray | None:
        return None


def _kernels(sys: SystemSpec, pt: Point):
    _check_dim(sys, pt)
    out, i = [], 0
    for leaf in leaves(sys):
        d = dimension(leaf)
        vals = pt.values[i : i + d]
        out.append(_RotationKernel(leaf, vals) if isinstance(leaf, Rotation) else _SkewKernel(leaf, vals))
        i += d
    return out


def _point(kernels) -> Point:
    vals = []
    for k in kernels:
        vals.extend(k.values())
    return Point(tuple(vals))


# ------------------------------------------------------------------ operations


def step(sys: SystemSpec, pt: Point) -> Point:
    """Apply the transformation once."""
    ks = _kernels(sys, pt)
    for k in ks:
        k.advance(1)
    return _point(ks)


def step_inverse(sys: SystemSpec, pt: Point) -> Point:
    """Apply the inverse transformation once."""
    ks = _kernels(sys, pt)
    for k in ks:
        k.advance(-1)
    return _point(ks)


def orbit(sys: SystemSpec, pt: Point, N: int) -> Iterator[Point]:
    """Yield ``pt, T pt, ..., T^(N-1) pt``."""
    if N < 1:
        raise ValueError("orbit length must be at least 1")
    ks = _kernels(sys, pt)
    yield pt
    for _ in range(N - 1):
        for k in ks:
            k.advance(1)
        yield _point(ks)


def orbit_array(sys: SystemSpec, pt: Point, count: int, stride: int = 1) -> np.ndarray:
    """Reduced coordinates of ``T^(stride * n) pt`` for ``n < count``.

    Shape ``(count, dimension)``.  A negative stride walks backwards with the
    inverse map; ``stride = 0`` repeats the point.
    """
    ks = _kernels(sys, pt)
    cols = []
    for k in ks:
        arr = k.series(count, stride)
        if arr is None:
            width = len(k.state)
            arr = np.empty((count, width))
            for n in range(count):
                arr[n] = k.coords()
                k.advance(stride)
        cols.append(arr)
    return np.hstack(cols) if cols else np.zeros((count, 0))


def orbit_checkpoints(sys: SystemSpec, pt: Point, checkpoints: Sequence[int]) -> list[Point]:
    """``T^n pt`` for each ``n`` in an increasing list, by stepping."""
    ks = _kernels(sys, pt)
    pos, out = 0, []
    for n in checkpoints:
        if n < pos:
            raise ValueError("checkpoints must be increasing")
        for k in ks:
            k.advance(n - pos)
        pos = n
        out.append(_point(ks))
    return out


def skew_fibre_poly(sys: Skew, y) -> PolyReal:
    """``Q`` with ``z_n = z + Q(n)`` along the skew orbit from base point ``y``.

    ``Q(n) = sum_{l<n} sigma(y + l * stride * alpha)``, expanded with
    power-sum polynomials.  It also holds for negative ``n``.
    """
    y = as_exact(y)
    inner = PolyReal([y, sys.stride * sys.alpha])
    g = PolyReal()
    for j, c in enumerate(sys.cocycle().exact):
        if c:
            g = g + c * inner**j
    q = PolyReal()
    for i, e in enumerate(g.exact):
        if e:
            q = q + e * faulhaber(i)
    return q


def iterate_closed_form(sys: SystemSpec, pt: Point, n: int) -> Point:
    """``T^n pt`` from the closed-form iterate (exact rational arithmetic)."""
    _check_dim(sys, pt)
    if abs(n) > SAFE_HORIZON:
        raise HorizonError(f"|n| = {abs(n)} exceeds the safe horizon {SAFE_HORIZON}")
    if isinstance(sys, Product):
        d = dimension(sys.left)
        left = iterate_closed_form(sys.left, Point(pt.values[:d]), n)
        right = iterate_closed_form(sys.right, Point(pt.values[d:]), n)
        return Point(left.values + right.values)
    if isinstance(sys, Rotation):
        return Point(((pt.values[0] + n * sys.alpha) % 1,))
    if isinstance(sys, Skew):
        y, z = pt.values
        zn = (z + skew_fibre_poly(sys, y).eval_exact(n)) % 1
        return Point((y + n * sys.stride * sys.alpha, zn))
    raise UnsupportedSystemError(f"no closed form for {sys!r}")


def sample_points(sys: SystemSpec, count: int, seed: int) -> list[Point]:
    """Reproducible pseudo-uniform points on the system's torus."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    arr = rng.random((count, dimension(sys)))
    return [Point.of(*row) for row in arr]
