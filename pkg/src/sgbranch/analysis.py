"""Equal-count versus multiplicity-weighted branching, held against the Born rule."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .branching import (
    BranchConfig,
    Mode,
    closed_form,
    peak,
    plus_count_histogram,
    sample_outcomes,
)
from .dynamics import SgParams, diagnostics, evolve, extract_branch_amplitudes, init_packet
from .errors import DomainError, SelfCheckError
from .spin import check_q, make_skew_state, skew_born_weight

SIGMA_LEVEL = 3.0
MIN_SAMPLES = 100


def total_variation(p: Sequence, r: Sequence):
    """Half the L1 distance between two distributions on the same support.

    Stays exact when both inputs hold ``Fraction`` entries.
    """
    if len(p) != len(r):
        raise DomainError("distributions must have the same length")
    if all(isinstance(x, Fraction) for x in (*p, *r)):
        return sum((abs(a - b) for a, b in zip(p, r)), Fraction(0)) / 2
    return 0.5 * math.fsum(abs(float(a) - float(b)) for a, b in zip(p, r))


@dataclass
class DistributionReport:
    theta: float
    q: float
    N: int
    predicted: list
    naive: list
    tv_naive_weighted: float
    peak_weighted: int
    peak_naive: int
    born_peak: float
    empirical: Optional[list] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    empirical_plus_frequency: Optional[float] = None
    plus_frequency_deviation: Optional[float] = None
    plus_frequency_error: Optional[float] = None
    max_abs_deviation_from_predicted: Optional[float] = None
    q_exact: Optional[Fraction] = None
    extra: dict = field(default_factory=dict)

    @property
    def narratives_disagree(self) -> bool:
        return self.peak_weighted != self.peak_naive

    def to_dict(self) -> dict:
        """Plain JSON-ready mapping: floats, ints, strings, lists and ``None``."""
        d = asdict(self)
        extra = d.pop("extra")
        for key in ("predicted", "naive"):
            d[key] = [float(x) for x in d[key]]
        d["tv_naive_weighted"] = float(self.tv_naive_weighted)
        d["narratives_disagree"] = self.narratives_disagree
        d["q_exact"] = _fraction_str(self.q_exact)
        d["predicted_exact"] = _exact_list(self.predicted)
        d["tv_exact"] = _fraction_str(self.tv_naive_weighted) if isinstance(self.tv_naive_weighted, Fraction) else None
        d.update(extra)
        return d


def _fraction_str(x) -> Optional[str]:
    if not isinstance(x, Fraction):
        return None
    return f"{x.numerator}/{x.denominator}"


def _exact_list(xs) -> Optional[list]:
    if not all(isinstance(x, Fraction) for x in xs):
        return None
    return [_fraction_str(x) for x in xs]


def _resolve_q(theta: float, q) -> tuple[float, Optional[Fraction]]:
    if q is None:
        return skew_born_weight(theta), None
    if isinstance(q, Fraction):
        q = check_q(q)
        return float(q), q
    return float(check_q(q)), None


def compare_narratives(N: int, theta: float, q=None) -> DistributionReport:
    """Distributions of plus-counts under both branching rules at angle ``theta``.

    ``q`` overrides ``cos^2(theta/2)``; pass a ``Fraction`` for exact results.
    """
    qf, qx = _resolve_q(theta, q)
    weighted = BranchConfig(N, qf, Mode.WEIGHTED, q_exact=qx)
    naive = BranchConfig(N, qf, Mode.NAIVE)
    w_tally = closed_form(weighted)
    n_tally = closed_form(naive)
    predicted = w_tally.normalized()
    uniform = n_tally.normalized()
    return DistributionReport(
        theta=float(theta),
        q=qf,
        N=N,
        predicted=predicted,
        naive=uniform,
        tv_naive_weighted=total_variation(predicted, uniform),
        peak_weighted=peak(weighted, w_tally),
        peak_naive=peak(naive, n_tally),
        born_peak=N * qf,
        q_exact=qx,
    )


def born_convergence(theta: float, N: int, samples: int, seed: int, q=None) -> DistributionReport:
    """Sample observer histories and compare their statistics with the prediction.

    Error bars are ``SIGMA_LEVEL`` binomial standard errors.
    """
    if samples < MIN_SAMPLES:
        raise DomainError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    report = compare_narratives(N, theta, q)
    config = BranchConfig(N, report.q, Mode.WEIGHTED, q_exact=report.q_exact)
    draws = sample_outcomes(config, samples, seed)
    hist = plus_count_histogram(draws)
    empirical = (hist / samples).tolist()
    freq = float(draws.mean())
    q = report.q
    report.empirical = empirical
    report.samples = samples
    report.seed = seed
    report.empirical_plus_frequency = freq
    report.plus_frequency_deviation = abs(freq - q)
    report.plus_frequency_error = SIGMA_LEVEL * math.sqrt(q * (1.0 - q) / (samples * N))
    report.max_abs_deviation_from_predicted = max(
        abs(e - float(p)) for e, p in zip(empirical, report.predicted)
    )
    report.extra["empirical_errors"] = [
        SIGMA_LEVEL * math.sqrt(float(p) * (1.0 - float(p)) / samples) for p in report.predicted
    ]
    return report


def end_to_end(
    theta: float,
    sg: SgParams,
    N: int,
    samples: Optional[int],
    seed: int,
    sigma0: float = 0.5,
    tolerance: float = 1e-6,
) -> DistributionReport:
    """Simulate the splitting, read q off the branch populations, then branch.

    q comes from the evolved wavefunction, never from ``cos^2(theta/2)``; the
    analytic value is only used for the self-check, which raises
    ``SelfCheckError`` (carrying the report) when they differ by more than
    ``tolerance``.  ``samples=None`` skips the Monte-Carlo stage.
    """
    sg.check_stability(sigma0)
    state = evolve(init_packet(make_skew_state(theta), sigma0, sg), sg, sg.t_final)
    q_plus, q_minus = extract_branch_amplitudes(state)
    q_num = check_q(q_plus)
    if samples is None:
        report = compare_narratives(N, theta, q_num)
    else:
        report = born_convergence(theta, N, samples, seed, q_num)
    q_ana = skew_born_weight(theta)
    d = diagnostics(state)
    report.extra.update(
        q_numeric=q_plus,
        q_minus_numeric=q_minus,
        q_analytic=q_ana,
        q_deviation=abs(q_plus - q_ana),
        t_reached=state.t,
        norm=state.norm(),
        mean_y_plus=d.mean_y_plus,
        mean_y_minus=d.mean_y_minus,
        spatial_overlap=d.spatial_overlap,
    )
    if abs(q_plus - q_ana) > tolerance:
        err = SelfCheckError(
            f"numerical q={q_plus!r} deviates from cos^2(theta/2)={q_ana!r} by more than {tolerance:g}"
        )
        err.report = report
        raise err
    return report


def empirical_tv(report: DistributionReport) -> Optional[float]:
    if report.empirical is None:
        return None
    return total_variation(report.empirical, report.predicted)
