"""Exit criteria.  Each test prints one PASS/FAIL line, even under capture."""

import contextlib
import csv
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from wwlab.cli import main
from wwlab.engine import AverageSpec, sup_scan, sup_trace, trace, ww_average
from wwlab.identities import ReductionSetup, alpha_for_target, top_coefficient, verify_reduction
from wwlab.observable import Observable
from wwlab.polyphase import PolyReal, leading_coeff
from wwlab.seminorm import ghk_estimate, gowers_norm_finite
from wwlab.torus import Point, Rotation, Skew, circ_dist, iterate_closed_form, orbit_checkpoints
from wwlab.vdc import vdc_check

pytestmark = pytest.mark.acceptance

GOLDEN = (math.sqrt(5) - 1) / 2
FORMS = [(1, "paper-exact"), (2, "paper-exact"), (1, "generic"), (2, "generic"), (3, "generic")]


@contextlib.contextmanager
def criterion(capsys, number, name, budget_s):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed <= budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        with capsys.disabled():
            print(f"\ncriterion {number} [{name}]: {status} ({elapsed:.2f}s, budget {budget_s}s)")


def test_criterion_1_closed_form_vs_iteration(capsys):
    rng = np.random.default_rng(1)
    cps = [10**3, 10**4, 10**5]
    with criterion(capsys, 1, "closed form vs iterated orbits", 10):
        worst = 0.0
        for m, form in FORMS:
            for _ in range(20):
                sys = Skew(m, float(rng.random()), form)
                pt = Point.of(*rng.random(2))
                for n, p in zip(cps, orbit_checkpoints(sys, pt, cps)):
                    q = iterate_closed_form(sys, pt, n)
                    worst = max(worst, *(circ_dist(u, v) for u, v in zip(p.coords, q.coords)))
        assert worst <= 1e-8


def test_criterion_2_van_der_corput(capsys):
    rng = np.random.default_rng(2)
    with criterion(capsys, 2, "van der Corput fuzzing", 5):
        violations = 0
        for _ in range(10**3):
            seq = rng.normal(size=256) + 1j * rng.normal(size=256)
            violations += sum(not vdc_check(seq, H).holds for H in (1, 8, 64))
        assert violations == 0
        r = vdc_check(np.ones(256), 0)
        assert r.lhs == 1 and r.rhs == 1


def _brute_sup(seq, keys):
    """Dense-grid oracle by matrix products with exact modular phases."""
    N = len(seq)
    M = 2 * (int(keys.max()) + 1)
    B = 1024
    j0, j1 = np.arange(B), np.arange(-(-M // B))
    V = np.exp(2j * np.pi * (np.outer(j0, keys) % M) / M)
    U = np.exp(2j * np.pi * (np.outer(j1 * B, keys) % M) / M)
    coarse = np.abs((V @ (seq * U).T).T.reshape(-1)[:M]) / N
    best = 0.0
    kf = keys.astype(float)
    L, B2 = 1 << 16, 256
    for j in np.argsort(-coarse)[:4]:
        # 2**16 points across the two coarse cells around each candidate
        lo, d = (j - 1) / M, 2 / M / (L - 1)
        V = np.exp(2j * np.pi * np.mod(np.outer(np.arange(B2) * d, kf), 1))
        U = np.exp(2j * np.pi * np.mod(np.outer(lo + np.arange(L // B2) * B2 * d, kf), 1))
        best = max(best, np.abs(V @ (seq * U).T).max() / N)
    return best


def test_criterion_3_sup_scan_oracle(capsys):
    rng = np.random.default_rng(12345)
    seq = rng.normal(size=512) + 1j * rng.normal(size=512)
    p = PolyReal([0, 0, 1])
    keys = np.arange(512, dtype=np.int64) ** 2
    with criterion(capsys, 3, "sup-scan oracle equivalence", 5):
        r = sup_scan(seq, p, oversample=4)
        oracle = _brute_sup(seq, keys)
        assert abs(r.sup_value - oracle) / oracle <= 1e-6
        for t in rng.random(10**3):
            assert r.sup_value + r.guaranteed_error >= ww_average(seq, p, t).abs


def _weyl_oracle(t, cps):
    # t is dyadic: p(n) t = n^2 T / 2^e exactly
    T, D = Fraction(t).as_integer_ratio()
    re, im, out = [], [], []
    cps = list(cps)
    for n in range(cps[-1]):
        ang = 2 * math.pi * ((n * n * T) % D) / D
        re.append(math.cos(ang))
        im.append(math.sin(ang))
        if n + 1 == cps[0]:
            out.append(abs(complex(math.fsum(re), math.fsum(im))) / (n + 1))
            cps.pop(0)
    return out


def test_criterion_4_weyl_decay(capsys):
    cps = [10**3, 10**4, 10**5, 10**6]
    t = math.sqrt(2)
    one = Observable.constant(1, 1)
    spec = AverageSpec(Rotation(GOLDEN), one, one, 1, 2, PolyReal([0, 0, 1]), Point.of(0))
    with criterion(capsys, 4, "Weyl decay", 30):
        got = [r.abs for r in trace(spec, t, cps)]
        oracle = _weyl_oracle(t, cps)
        assert np.allclose(got, oracle, rtol=0, atol=1e-12)
        assert all(b < a for a, b in zip(got, got[1:]))
        assert got[-1] <= 0.02


def test_criterion_5_kronecker_witness(capsys):
    chi = Observable.character((1,))
    spec = AverageSpec(Rotation(GOLDEN), chi, chi, 1, 2, PolyReal([0, 1]), Point.of(0.2))
    with criterion(capsys, 5, "Kronecker non-uniformity witness", 10):
        res = sup_trace(spec, [10, 100, 10**3, 10**4, 10**5])
        assert all(0.9 <= r.sup_value <= 1 + 1e-9 for r in res)


def test_criterion_6_reduction_identity(capsys):
    rng = np.random.default_rng(6)
    base = Rotation(GOLDEN)
    with criterion(capsys, 6, "reduction identity", 60):
        # fibre phase of the m=1 form is n y + n^2 alpha; q1 = -2, q2 = 1
        g = PolyReal([0, 0, 1])
        assert leading_coeff(-2 * g.compose_scale(1) + g.compose_scale(2), exact=True) == (2, 2)
        assert top_coefficient(1, 2, 1, 1, "paper-exact") == 2
        for m, form in FORMS:
            for _ in range(20):
                while True:
                    a, b = (int(v) for v in rng.integers(-3, 4, size=2))
                    k = int(rng.choice([-2, -1, 1, 2, 3]))
                    if a != b and top_coefficient(a, b, m, k, form) != 0:
                        break
                c = top_coefficient(a, b, m, k, form)
                t = float(rng.random())
                f1 = Observable(1, (((int(rng.integers(-3, 4)),), 0.6), ((1,), 0.4j)))
                f2 = Observable.character((int(rng.integers(-3, 4)),))
                setup = ReductionSetup(
                    a, b, m, k, alpha_for_target(c, m, t), base, f1, f2,
                    Point.of(*rng.random(3)), form, int(rng.integers(-2, 3)),
                )
                rep = verify_reduction(setup, 10**4, t_target=t)
                assert rep.passed, (m, form, a, b, k, rep)


def test_criterion_7_seminorm_sanity(capsys):
    chi = Observable.character((1,))
    rot = Rotation(GOLDEN)
    with criterion(capsys, 7, "seminorm estimator sanity", 60):
        for k in range(1, 5):
            assert ghk_estimate(Skew(2, 0.3), Observable.constant(0.75j, 2), k).value == 0.75
        assert ghk_estimate(rot, chi, 1, N=10**5).value <= 1e-4
        assert abs(ghk_estimate(rot, chi, 2, N=10**5, H=10**3).value - 1) <= 0.05
        assert abs(gowers_norm_finite([1, 0, 0, 0], 2) - 4 ** -0.75) <= 1e-10
        rng = np.random.default_rng(7)
        for N in (2, 4, 8, 17, 32, 64):
            seq = rng.normal(size=N) + 1j * rng.normal(size=N)
            l4 = np.sum(np.abs(np.fft.fft(seq) / N) ** 4)
            assert abs(gowers_norm_finite(seq, 2) ** 4 - l4) <= 1e-10


def test_criterion_8_pair_bound_battery(capsys, tmp_path):
    with criterion(capsys, 8, "pair-bound experiment (report only)", 120):
        assert main(["estimate-bound", "--out", str(tmp_path)]) == 0
        with open(tmp_path / "estimate-bound.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 5
        for r in rows:
            assert all(math.isfinite(float(r[c])) for c in ("lhs", "rhs", "ratio"))
        meta = json.loads((tmp_path / "estimate-bound.json").read_text())
        assert meta["rows"] == 5
