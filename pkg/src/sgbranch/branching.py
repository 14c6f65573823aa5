"""Multiverse bookkeeping for N repeated spin measurements.

Every run splits each existing universe into a plus and a minus branch.  In
``naive`` mode both branches count once.  In ``weighted`` mode the plus branch
carries ``f = 2q`` universes and the minus branch ``g = 2(1 - q)``, so after N
runs the histories with p pluses number ``C(N, p) f**p g**(N - p)``.

Multiplicities are exact ``Fraction`` values whenever the Born weight is
given as a rational, and floats otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CapacityError, DomainError, UnsupportedModeError
from .spin import check_q

Number = Union[int, float, Fraction]

ENUMERATION_LIMIT = 24
FLOAT_RUNS_LIMIT = 1000


class Mode(str, Enum):
    NAIVE = "naive"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class BranchConfig:
    runs: int
    q: float = 0.5
    mode: Mode = Mode.WEIGHTED
    q_exact: Optional[Fraction] = None

    def __post_init__(self):
        if isinstance(self.runs, bool) or not isinstance(self.runs, (int, np.integer)) or self.runs < 1:
            raise DomainError(f"runs must be a positive integer, got {self.runs!r}")
        object.__setattr__(self, "mode", Mode(self.mode))
        if isinstance(self.q, Fraction) and self.q_exact is None:
            object.__setattr__(self, "q_exact", self.q)
        if self.q_exact is not None:
            object.__setattr__(self, "q_exact", check_q(Fraction(self.q_exact)))
            object.__setattr__(self, "q", float(self.q_exact))
        else:
            object.__setattr__(self, "q", check_q(self.q))

    @property
    def exact(self) -> bool:
        return self.mode is Mode.NAIVE or self.q_exact is not None

    def weights(self) -> tuple[Number, Number]:
        """Per-run multiplicities ``(f, g)`` of the plus and minus branch."""
        if self.mode is Mode.NAIVE:
            return Fraction(1), Fraction(1)
        q = self.q_exact if self.q_exact is not None else self.q
        return 2 * q, 2 * (1 - q)


@dataclass(frozen=True)
class HistoryTally:
    """Multiplicity ``counts[p]`` of histories with p pluses, p = 0..N."""

    counts: tuple
    exact: bool

    @property
    def runs(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> Number:
        if self.exact:
            return sum(self.counts, Fraction(0))
        return math.fsum(self.counts)

    def as_floats(self) -> list[float]:
        return [float(c) for c in self.counts]

    def normalized(self) -> list:
        """Counts divided by ``2**N``; exact when the tally is exact."""
        scale = 2**self.runs
        if self.exact:
            return [Fraction(c) / scale for c in self.counts]
        return [c / scale for c in self.counts]


@dataclass(frozen=True)
class ObserverHistory:
    outcomes: str

    @property
    def p(self) -> int:
        return self.outcomes.count("+")


def branch_once(multiplicity: Number, q: Number) -> tuple[Number, Number]:
    """Split ``multiplicity`` universes into ``(plus, minus)`` multiplicities."""
    if multiplicity < 0:
        raise DomainError(f"multiplicity must be nonnegative, got {multiplicity!r}")
    q = check_q(q)
    return multiplicity * 2 * q, multiplicity * 2 * (1 - q)


def _common_denominator(f: Fraction, g: Fraction) -> tuple[int, int, int]:
    d = math.lcm(f.denominator, g.denominator)
    return f.numerator * (d // f.denominator), g.numerator * (d // g.denominator), d


def enumerate_tree(config: BranchConfig) -> HistoryTally:
    """Walk all ``2**N`` histories, multiplying f or g per run, and tally by p.

    Exact mode carries integer numerators over a common denominator so each
    edge costs one big-integer multiplication; float mode accumulates with
    Neumaier compensated summation.
    """
    n = config.runs
    if n > ENUMERATION_LIMIT:
        raise CapacityError(f"enumeration is limited to N <= {ENUMERATION_LIMIT}, got N={n}")
    f, g = config.weights()
    if config.exact:
        fn, gn, den = _common_denominator(Fraction(f), Fraction(g))
        sums = [0] * (n + 1)
        stack = [(0, 0, 1)]  # (depth, pluses so far, numerator product)
        while stack:
            depth, p, m = stack.pop()
            if depth == n:
                sums[p] += m
                continue
            stack.append((depth + 1, p, m * gn))
            stack.append((depth + 1, p + 1, m * fn))
        scale = den**n
        return HistoryTally(tuple(Fraction(s, scale) for s in sums), exact=True)

    f, g = float(f), float(g)
    sums = [0.0] * (n + 1)
    comp = [0.0] * (n + 1)
    stack = [(0, 0, 1.0)]
    while stack:
        depth, p, m = stack.pop()
        if depth == n:
            s = sums[p]
            t = s + m
            comp[p] += (s - t) + m if abs(s) >= abs(m) else (m - t) + s
            sums[p] = t
            continue
        stack.append((depth + 1, p, m * g))
        stack.append((depth + 1, p + 1, m * f))
    return HistoryTally(tuple(s + c for s, c in zip(sums, comp)), exact=False)


def closed_form(config: BranchConfig) -> HistoryTally:
    """``C(N, p) f**p g**(N-p)`` for every p; plain ``C(N, p)`` in naive mode."""
    n = config.runs
    f, g = config.weights()
    if config.exact:
        f, g = Fraction(f), Fraction(g)
        return HistoryTally(tuple(math.comb(n, p) * f**p * g ** (n - p) for p in range(n + 1)), exact=True)
    if n > FLOAT_RUNS_LIMIT:
        raise DomainError(f"2**N overflows a double for N={n}; supply q as an exact rational")
    f, g = float(f), float(g)
    return HistoryTally(tuple(_float_term(n, p, f, g) for p in range(n + 1)), exact=False)


def _float_term(n: int, p: int, f: float, g: float) -> float:
    if (f == 0.0 and p > 0) or (g == 0.0 and p < n):
        return 0.0
    return float(math.comb(n, p)) * f**p * g ** (n - p)


def peak(config: BranchConfig, tally: HistoryTally | None = None) -> int:
    """Most populated plus-count; ties go to the smaller p."""
    counts = (tally or closed_form(config)).counts
    best = 0
    for p in range(1, len(counts)):
        if counts[p] > counts[best]:
            best = p
    return best


def sample_outcomes(config: BranchConfig, count: int, seed: int, uniform: bool = False) -> np.ndarray:
    """Boolean array of shape ``(count, N)``; True marks a plus outcome.

    Each run is an independent Bernoulli(q) draw from ``numpy.random.default_rng(seed)``,
    so the same seed always reproduces the same array.  Naive mode assigns every
    history the same weight and is only sampled when ``uniform`` is set.
    """
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    if config.mode is Mode.NAIVE:
        if not uniform:
            raise UnsupportedModeError(
                "naive branching weights all histories equally; pass uniform=True to sample it"
            )
        q = 0.5
    else:
        q = config.q
    rng = np.random.default_rng(seed)
    return rng.random((count, config.runs)) < q


def sample_histories(config: BranchConfig, count: int, seed: int, uniform: bool = False) -> list[ObserverHistory]:
    draws = sample_outcomes(config, count, seed, uniform=uniform)
    symbols = np.where(draws, "+", "-")
    return [ObserverHistory("".join(row)) for row in symbols]


def plus_count_histogram(draws: np.ndarray) -> np.ndarray:
    """Number of sampled histories for each plus-count p = 0..N."""
    n = draws.shape[1]
    return np.bincount(draws.sum(axis=1), minlength=n + 1)


def tally_mean(tally: HistoryTally) -> Number:
    """Mean plus-count of the normalized distribution."""
    probs: Sequence = tally.normalized()
    if tally.exact:
        return sum((p * w for p, w in enumerate(probs)), Fraction(0)) / sum(probs, Fraction(0))
    return math.fsum(p * w for p, w in enumerate(probs)) / math.fsum(probs)
