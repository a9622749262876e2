"""Both sides of the van der Corput inequality for finite sequences.

    |(1/N) sum a_n|^2 <= (N+H)/(N^2 (H+1)) sum |a_n|^2
        + 2(N+H)/(N^2 (H+1)^2) sum_{h=1}^{H} (H+1-h) Re(sum_{n<N-h} a_n conj(a_{n+h}))

The correlations are summed directly in O(N*H) on purpose, so the checker
shares no code with the FFT machinery it is used to test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: ``holds`` tolerates this much negative slack.
SLACK_TOL = 1e-10


@dataclass(frozen=True)
class VdcReport:
    N: int
    H: int
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -SLACK_TOL


def _as_seq(seq) -> np.ndarray:
    a = np.asarray(seq, dtype=complex).ravel()
    if a.size == 0:
        raise ValueError("empty sequence")
    return a


def vdc_lhs(seq) -> float:
    a = _as_seq(seq)
    m = a.sum() / a.size
    # same squaring as the rhs so equality cases stay equal after rounding
    return float(m.real**2 + m.imag**2)


def vdc_rhs(seq, H: int) -> float:
    a = _as_seq(seq)
    N = a.size
    if not 0 <= H <= N - 1:
        raise ValueError(f"H must lie in [0, {N - 1}], got {H}")
    first = (N + H) / (N * N * (H + 1)) * float(np.sum(a.real**2 + a.imag**2))
    if H == 0:
        return first
    corr = 0.0
    for h in range(1, H + 1):
        corr += (H + 1 - h) * float(np.sum(a[: N - h] * np.conj(a[h:])).real)
    return first + 2 * (N + H) / (N * N * (H + 1) ** 2) * corr


def vdc_check(seq, H: int) -> VdcReport:
    a = _as_seq(seq)
    return VdcReport(a.size, H, vdc_lhs(a), vdc_rhs(a, H))
