"""Double-recurrence Wiener-Wintner averages.

For an orbit ``x, Tx, T^2 x, ...`` the weighted average is

    W_N(t) = (1/N) sum_{n<N} f1(T^{an} x) f2(T^{bn} x) exp(2 pi i p(n) t).

The unweighted factor ``f1(T^{an} x) f2(T^{bn} x)`` is computed once
(:func:`ww_sequence`) and then reused for any ``t``: a single average,
prefix traces, or a supremum over ``t``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .observable import Observable
from .polyphase import PolyReal, SplitValues, _two_product, phases
from .summation import csum, prefix_sums
from .torus import Point, SystemSpec, dimension, orbit_array

#: Largest max|p(n)| for the binned FFT scan.
FFT_MAX_DEGREE = 1 << 22
DEFAULT_OVERSAMPLE = 4
#: Parabolic refinement rounds; the bracket shrinks 4x per round.
REFINE_ROUNDS = 8
#: Local maxima of the FFT grid that get refined.
REFINE_CANDIDATES = 4


class ContractError(ValueError):
    pass


class ScanTooLargeError(ContractError):
    pass


@dataclass(frozen=True)
class AverageSpec:
    sys: SystemSpec
    f1: Observable
    f2: Observable
    a: int
    b: int
    p: PolyReal
    start_point: Point

    def __post_init__(self):
        if self.a == self.b:
            raise ContractError("exponents a and b must differ")
        d = dimension(self.sys)
        for name in ("f1", "f2"):
            if getattr(self, name).dim != d:
                raise ContractError(f"{name} has dimension {getattr(self, name).dim}, system has {d}")
        if len(self.start_point) != d:
            raise ContractError(f"start point has {len(self.start_point)} coordinates, system has {d}")


@dataclass(frozen=True)
class AverageResult:
    N: int
    t: float
    value: complex

    @property
    def abs(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class SupScanResult:
    N: int
    t_star: float
    sup_value: float
    method: str
    guaranteed_error: float | None


def _observe(f: Observable, sys: SystemSpec, x: Point, N: int, stride: int) -> np.ndarray:
    if f.is_constant():
        return np.full(N, f.constant_value(), dtype=complex)
    return f.evaluate(orbit_array(sys, x, N, stride))


def ww_sequence(spec: AverageSpec, N: int) -> np.ndarray:
    """``f1(T^{an} x) * f2(T^{bn} x)`` for ``n < N``."""
    if N < 1:
        raise ContractError("N must be at least 1")
    u = _observe(spec.f1, spec.sys, spec.start_point, N, spec.a)
    v = _observe(spec.f2, spec.sys, spec.start_point, N, spec.b)
    return u * v


def _weights(p: PolyReal, t, N: int) -> np.ndarray:
    return np.exp(2j * np.pi * phases(p, t, N))


def ww_average(seq, p: PolyReal, t, workers: int = 1) -> AverageResult:
    seq = np.asarray(seq, dtype=complex)
    if len(seq) == 0:
        raise ContractError("empty sequence")
    N = len(seq)
    return AverageResult(N, float(t), csum(seq * _weights(p, t, N), workers) / N)


def trace(spec: AverageSpec, t, checkpoints: Sequence[int], workers: int = 1) -> list[AverageResult]:
    """``W_N(t)`` at each checkpoint, from one pass over the longest prefix."""
    cps = list(checkpoints)
    if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
        raise ContractError("checkpoints must be a nonempty increasing list of positive integers")
    N = cps[-1]
    terms = ww_sequence(spec, N) * _weights(spec.p, t, N)
    sums = prefix_sums(terms, cps, workers)
    return [AverageResult(n, float(t), s / n) for n, s in zip(cps, sums)]


# ---------------------------------------------------------------- sup over t


def _integer_values(p: PolyReal, N: int) -> np.ndarray:
    coeffs = [int(c) for c in p.exact]
    bound = sum(abs(c) * max(N - 1, 1) ** j for j, c in enumerate(coeffs))
    if bound < 1 << 62:
        n = np.arange(N, dtype=np.int64)
        acc = np.zeros(N, dtype=np.int64)
        for c in reversed(coeffs):
            acc = acc * n + c
        return acc
    vals = [int(p.eval_exact(n)) for n in range(N)]
    if max(abs(v) for v in vals) >= 1 << 62:
        raise ScanTooLargeError("polynomial values exceed 2**62; use method='grid' on an explicit interval")
    return np.array(vals, dtype=np.int64)


def _direct(seq: np.ndarray, keys: np.ndarray, t: float) -> complex:
    hi, lo = _two_product(keys.astype(np.float64), t)
    ph = np.mod((hi - np.floor(hi)) + lo, 1.0)
    return complex(np.sum(seq * np.exp(2j * np.pi * ph)))


def _parabola_offset(fm: float, f0: float, fp: float) -> float:
    den = fm - 2.0 * f0 + fp
    if den >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (fm - fp) / den, -1.0, 1.0))


def _scan_binned(seq: np.ndarray, keys: np.ndarray, oversample: int) -> SupScanResult:
    N = len(seq)
    kmin, kmax = int(keys.min()), int(keys.max())
    span = kmax - kmin
    if max(abs(kmin), abs(kmax)) > FFT_MAX_DEGREE:
        raise ScanTooLargeError(
            f"max|p(n)| = {max(abs(kmin), abs(kmax))} exceeds {FFT_MAX_DEGREE}; "
            "use method='grid' with an explicit interval instead"
        )
    bins = np.zeros(span + 1, dtype=complex)
    np.add.at(bins, keys - kmin, seq)
    M = oversample * (span + 1)
    h = 1.0 / M
    grid = np.abs(np.fft.ifft(bins, n=M)) * (M / N)
    best_j = int(np.argmax(grid))
    best_t, best = float(best_j * h), float(grid[best_j])

    power = lambda t: abs(_direct(seq, keys, t)) ** 2
    if M >= 3:
        left, right = np.roll(grid, 1), np.roll(grid, -1)
        peaks = np.flatnonzero((grid >= left) & (grid >= right))
        peaks = peaks[np.argsort(-grid[peaks], kind="stable")][:REFINE_CANDIDATES]
        for j in peaks:
            fm, f0, fp = (float(grid[(j + d) % M] * N) ** 2 for d in (-1, 0, 1))
            t = (j + _parabola_offset(fm, f0, fp)) * h
            width = h
            for _ in range(REFINE_ROUNDS - 1):
                width /= 4.0
                vals = [power(t - width), power(t), power(t + width)]
                off = _parabola_offset(*vals)
                t = t + off * width
                if abs(off) * width < 1e-15:
                    break
            v = math.sqrt(power(t)) / N
            if v > best:
                best, best_t = v, float(t % 1.0)
    # Bernstein: |S'| <= 2 pi (span/2) sum|c|; every t is within h/2 of the grid.
    err = math.pi * span * float(np.abs(bins).sum()) * h / (2.0 * N)
    return SupScanResult(N, best_t, best, "fft-binned", err)


def _scan_grid(seq: np.ndarray, p: PolyReal, lo: float, hi: float, points: int) -> SupScanResult:
    N = len(seq)
    split = SplitValues(p, range(N))
    ts = np.linspace(lo, hi, points)
    vals = np.array([abs(np.sum(seq * np.exp(2j * np.pi * split.phase(t)))) / N for t in ts])
    j = int(np.argmax(vals))
    return SupScanResult(N, float(ts[j]), float(vals[j]), "grid", None)


def sup_scan(
    seq,
    p: PolyReal,
    domain="unit",
    oversample: int = DEFAULT_OVERSAMPLE,
    points: int = 4096,
) -> SupScanResult:
    """Maximise ``|W_N(t)|`` over ``t``.

    ``domain="unit"`` needs integer coefficients (then ``W_N`` is
    1-periodic) and uses the binned FFT scan with a certified error.  An
    explicit ``(lo, hi)`` interval is scanned directly on ``points`` points.
    """
    seq = np.asarray(seq, dtype=complex)
    if len(seq) == 0:
        raise ContractError("empty sequence")
    if oversample < 2:
        raise ContractError("oversample must be at least 2")
    if isinstance(domain, str):
        if domain != "unit":
            raise ContractError(f"unknown domain {domain!r}")
        if not p.is_integral():
            raise ContractError("unit-interval scan needs integer coefficients; give an explicit interval")
        return _scan_binned(seq, _integer_values(p, len(seq)), oversample)
    lo, hi = (float(v) for v in domain)
    if not hi > lo:
        raise ContractError("empty scan interval")
    return _scan_grid(seq, p, lo, hi, points)


def sup_trace(
    spec: AverageSpec,
    checkpoints: Sequence[int],
    oversample: int = DEFAULT_OVERSAMPLE,
    workers: int = 1,
) -> list[SupScanResult]:
    """``sup_t |W_N(t)|`` at each checkpoint over the unit interval."""
    cps = list(checkpoints)
    if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
        raise ContractError("checkpoints must be a nonempty increasing list of positive integers")
    if not spec.p.is_integral():
        raise ContractError("sup_trace needs integer coefficients")
    seq = ww_sequence(spec, cps[-1])
    keys = _integer_values(spec.p, cps[-1])

    def one(n):
        return _scan_binned(seq[:n], keys[:n], oversample)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, cps))
    return [one(n) for n in cps]
