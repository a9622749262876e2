"""Trigonometric polynomials on the coordinates of a torus system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .torus import Point

NORM_SLACK = 1e-12


@dataclass(frozen=True)
class Observable:
    """``sum(amp * exp(2 pi i <freq, coords>))`` over ``terms``.

    Frequencies are integer vectors of length ``dim``.  The total amplitude
    is capped at 1, which bounds the sup norm by 1.
    """

    dim: int
    terms: tuple[tuple[tuple[int, ...], complex], ...] = ()

    def __post_init__(self):
        terms = []
        for freq, amp in self.terms:
            freq = tuple(int(k) for k in freq)
            if len(freq) != self.dim:
                raise ValueError(f"frequency {freq} does not match dimension {self.dim}")
            terms.append((freq, complex(amp)))
        object.__setattr__(self, "terms", tuple(terms))
        if self.mass > 1 + NORM_SLACK:
            raise ValueError(f"observable not normalised: total amplitude {self.mass:.6g} > 1")

    @classmethod
    def constant(cls, c: complex, dim: int) -> "Observable":
        return cls(dim, (((0,) * dim, c),) if c else ())

    @classmethod
    def character(cls, freq, amp: complex = 1.0) -> "Observable":
        freq = tuple(freq)
        return cls(len(freq), ((freq, amp),))

    @property
    def mass(self) -> float:
        return float(sum(abs(a) for _, a in self.terms))

    def is_constant(self) -> bool:
        return all(not any(f) for f, _ in self.terms)

    def constant_value(self) -> complex:
        return sum((a for _, a in self.terms), 0j)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        """Values at each row of an ``(n, dim)`` coordinate array."""
        coords = np.asarray(coords, dtype=float).reshape(-1, self.dim)
        out = np.zeros(len(coords), dtype=complex)
        for freq, amp in self.terms:
            if any(freq):
                ph = coords @ np.asarray(freq, dtype=float)
                out += amp * np.exp(2j * np.pi * np.mod(ph, 1.0))
            else:
                out += amp
        return out

    def __call__(self, pt: Point) -> complex:
        return complex(self.evaluate(np.asarray(pt.coords))[0])

    def conj(self) -> "Observable":
        return Observable(self.dim, tuple((tuple(-k for k in f), a.conjugate()) for f, a in self.terms))

    def tensor(self, other: "Observable") -> "Observable":
        """Product observable on the concatenated coordinates."""
        terms = tuple((f + g, a * b) for f, a in self.terms for g, b in other.terms)
        return Observable(self.dim + other.dim, terms)

    def to_json(self) -> dict:
        return {"terms": [{"freq": list(f), "re": a.real, "im": a.imag} for f, a in self.terms]}

    @classmethod
    def from_json(cls, data, dim: int) -> "Observable":
        if isinstance(data, (int, float)):
            return cls.constant(data, dim)
        # a bare {"freq": ...} term is a unit character
        terms = tuple(
            (t["freq"], complex(t.get("re", 0.0 if "im" in t else 1.0), t.get("im", 0.0))) for t in data["terms"]
        )
        return cls(dim, terms)
