"""Spin-1/2 states in the measurement (y-axis) basis and the branch weights
derived from them.

The incoming spin lies in the y-z plane at angle ``theta`` from the y axis.
Its components along mu = +1/2 and mu = -1/2 are written with the fixed phase
convention ``(cos(theta/2), i*sin(theta/2))``.  Only ``|up|**2`` is used
downstream, so the azimuthal phase never influences any result.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError

Real = Union[float, Fraction]

NORM_TOL = 1e-9
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class Spinor:
    up: complex
    down: complex

    @property
    def norm_sq(self) -> float:
        return abs(self.up) ** 2 + abs(self.down) ** 2

    def with_global_phase(self, phi: float) -> "Spinor":
        z = cmath.exp(1j * phi)
        return Spinor(self.up * z, self.down * z)


@dataclass(frozen=True)
class BranchWeights:
    """Universe multiplicities for one measurement: ``f`` plus, ``g`` minus."""

    q: Real

    @property
    def f(self) -> Real:
        return 2 * self.q

    @property
    def g(self) -> Real:
        return 2 * (1 - self.q)


def make_skew_state(theta: float) -> Spinor:
    """Spin state at angle ``theta`` (radians) off the measurement axis."""
    if not math.isfinite(theta):
        raise DomainError(f"theta must be finite, got {theta!r}")
    half = math.fmod(theta, 2.0 * math.pi) / 2.0
    return Spinor(complex(math.cos(half), 0.0), complex(0.0, math.sin(half)))


def born_weight(state: Spinor) -> float:
    """Probability ``|<mu=+1/2|state>|**2`` of the plus outcome."""
    if abs(state.norm_sq - 1.0) > NORM_TOL:
        raise DomainError(f"spinor is not normalized (|psi|^2 = {state.norm_sq!r})")
    return abs(state.up) ** 2


def skew_born_weight(theta: float) -> float:
    """``cos(theta/2)**2`` evaluated as ``(1 + cos theta)/2``.

    This form returns exactly 0.5 at theta = pi/2, where squaring the cosine
    of pi/4 would leave a one-ulp error.
    """
    if not math.isfinite(theta):
        raise DomainError(f"theta must be finite, got {theta!r}")
    return check_q((1.0 + math.cos(theta)) / 2.0)


def exact_born_weight_degrees(degrees: Fraction | int | float) -> Fraction | None:
    """Exact ``cos^2(theta/2)`` when it is rational, else ``None``.

    By Niven's theorem cos(theta) is rational for rational degrees only at
    multiples of 60 and 90 degrees, which is where this returns a value.
    """
    d = Fraction(degrees) % 360
    table = {
        Fraction(0): Fraction(1),
        Fraction(60): Fraction(3, 4),
        Fraction(90): Fraction(1, 2),
        Fraction(120): Fraction(1, 4),
        Fraction(180): Fraction(0),
        Fraction(240): Fraction(1, 4),
        Fraction(270): Fraction(1, 2),
        Fraction(300): Fraction(3, 4),
    }
    return table.get(d)


def check_q(q: Real) -> Real:
    """Validate a Born weight, snapping values within 1e-12 of 0 or 1."""
    if isinstance(q, Fraction):
        if not 0 <= q <= 1:
            raise DomainError(f"q must lie in [0, 1], got {q}")
        return q
    q = float(q)
    if not math.isfinite(q):
        raise DomainError(f"q must be finite, got {q!r}")
    if -CLAMP_TOL <= q < 0.0:
        return 0.0
    if 1.0 < q <= 1.0 + CLAMP_TOL:
        return 1.0
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q!r}")
    return q


def branch_weights(q: Real) -> BranchWeights:
    return BranchWeights(check_q(q))
