"""Truncated Gowers-Host-Kra seminorm estimates and a finite-group oracle.

The estimator follows the usual recursion along one orbit:

    level 1:    |(1/N) sum_{n<N} g(T^n x)|
    level k+1:  ((1/H) sum_{h=1}^{H} level_k(g * conj(g o T^h))^(2^k))^(1/2^(k+1))

averaged over a few quasi-uniform base points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .engine import AverageSpec, sup_scan, ww_sequence
from .observable import Observable
from .torus import SystemSpec, orbit_array, sample_points

#: Refuse estimates needing more inner products than this.
OPERATION_BUDGET = 10**9
DEFAULT_N = 10**5
DEFAULT_H = 10**3
DEFAULT_SAMPLES = 8
MAX_K = 4


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class SeminormEstimate:
    k: int
    value: float
    N: int
    H: int
    samples: int


def _level(g: np.ndarray, k: int, N: int, H: int) -> float:
    if k == 1:
        return abs(g[:N].mean())
    if k == 2:
        # level 1 of g * conj(g o T^h) is an inner product
        acc = sum(abs(np.vdot(g[h : h + N], g[:N]) / N) ** 2 for h in range(1, H + 1))
        return (acc / H) ** 0.25
    power = 2 ** (k - 1)
    acc = 0.0
    for h in range(1, H + 1):
        acc += _level(g[:-h] * np.conj(g[h:]), k - 1, N, H) ** power
    return (acc / H) ** (1.0 / 2**k)


def ghk_estimate(
    sys: SystemSpec,
    f: Observable,
    k: int,
    N: int = DEFAULT_N,
    H: int = DEFAULT_H,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> SeminormEstimate:
    """Estimate ``|||f|||_k`` from orbits of length ``N + (k-1) H``."""
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}")
    if min(N, H, samples) < 1:
        raise ValueError("N, H and samples must be positive")
    if f.is_constant():
        return SeminormEstimate(k, abs(f.constant_value()), N, H, samples)
    cost = samples * N * H ** max(k - 1, 0)
    if cost > OPERATION_BUDGET:
        raise BudgetError(f"estimate needs {cost:.3g} inner steps, budget is {OPERATION_BUDGET:.0e}")
    length = N + (k - 1) * H
    vals = []
    for x in sample_points(sys, samples, seed):
        g = f.evaluate(orbit_array(sys, x, length))
        vals.append(_level(g, k, N, H))
    return SeminormEstimate(k, float(np.mean(vals)), N, H, samples)


def gowers_norm_finite(seq, k: int) -> float:
    """``U^k`` norm on ``Z/NZ`` by the literal sum over all cubes."""
    f = np.asarray(seq, dtype=complex).ravel()
    N = f.size
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    limit = 64 if k == 3 else 256
    if N > limit:
        raise BudgetError(f"U^{k} brute force limited to N <= {limit}")
    idx = np.arange(N)
    hs = np.meshgrid(*([idx] * k), indexing="ij")
    total = 0j
    for x in range(N):
        prod = np.ones((N,) * k, dtype=complex)
        for omega in itertools.product((0, 1), repeat=k):
            pos = (x + sum(w * h for w, h in zip(omega, hs))) % N
            vals = f[pos]
            prod *= np.conj(vals) if sum(omega) % 2 else vals
        total += prod.sum()
    mean = (total / N ** (k + 1)).real
    return max(mean, 0.0) ** (1.0 / 2**k)


@dataclass(frozen=True)
class PairBoundRow:
    label: str
    k_poly: int
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else float("inf")


def estimate_pair_bound(
    spec: AverageSpec,
    k_poly: int,
    N: int = 4096,
    x_samples: int = 4,
    ghk_N: int = 2000,
    ghk_H: int = 20,
    ghk_samples: int = 2,
    oversample: int = 4,
    seed: int = 0,
    label: str = "",
) -> PairBoundRow:
    """Finite-scale sides of the seminorm bound for ``sup_t |W_N|^2``.

    ``lhs`` is the mean over sampled base points of ``sup_t |W_N(x, t)|^2``;
    ``rhs`` is ``min(|||f1|||_{k+2}^2, |||f2|||_{k+2}^2)``.  Report only.
    """
    if not spec.p.is_integral():
        raise ValueError("pair bound needs an integer-coefficient polynomial")
    if spec.p.degree != k_poly:
        raise ValueError(f"polynomial degree {spec.p.degree} does not match k_poly={k_poly}")
    k = k_poly + 2
    sups = []
    for x in sample_points(spec.sys, x_samples, seed):
        s = AverageSpec(spec.sys, spec.f1, spec.f2, spec.a, spec.b, spec.p, x)
        sups.append(sup_scan(ww_sequence(s, N), spec.p, oversample=oversample).sup_value ** 2)
    lhs = float(np.mean(sups))
    rhs = min(
        ghk_estimate(spec.sys, f, k, ghk_N, ghk_H, ghk_samples, seed + 1).value ** 2
        for f in (spec.f1, spec.f2)
    )
    return PairBoundRow(label, k_poly, lhs, rhs)
