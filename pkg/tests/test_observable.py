import numpy as np
import pytest

from wwlab.observable import Observable
from wwlab.torus import Point


def test_character_value():
    f = Observable.character((1, -2))
    pt = Point.of(0.25, 0.125)
    assert abs(f(pt) - np.exp(2j * np.pi * (0.25 - 0.25))) < 1e-15


def test_normalisation_enforced():
    Observable(1, (((1,), 0.5), ((2,), 0.5j)))
    with pytest.raises(ValueError, match="normalised"):
        Observable(1, (((1,), 0.8), ((2,), 0.5)))
    with pytest.raises(ValueError):
        Observable(2, (((1,), 1.0),))


def test_constant():
    c = Observable.constant(0.5j, 3)
    assert c.is_constant() and c.constant_value() == 0.5j
    assert Observable.constant(0, 1).terms == ()


def test_conj_and_tensor():
    f = Observable(1, (((1,), 0.5), ((-3,), 0.25j)))
    coords = np.random.default_rng(0).random((20, 1))
    assert np.allclose(f.conj().evaluate(coords), np.conj(f.evaluate(coords)))
    g = f.tensor(Observable.character((2,)))
    both = np.hstack([coords, coords[::-1]])
    want = f.evaluate(coords) * np.exp(4j * np.pi * coords[::-1, 0])
    assert np.allclose(g.evaluate(both), want)


def test_json_roundtrip():
    f = Observable(2, (((1, 0), 0.5), ((0, -1), -0.25 + 0.25j)))
    assert Observable.from_json(f.to_json(), 2) == f
    assert Observable.from_json(1, 2) == Observable.constant(1, 2)
    assert Observable.from_json({"terms": [{"freq": [1]}]}, 1) == Observable.character((1,))
