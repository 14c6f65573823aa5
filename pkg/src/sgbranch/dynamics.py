"""Spinor wavepacket propagation through a Stern-Gerlach field gradient.

Natural units with hbar = 1.  The Hamiltonian is diagonal in the measurement
basis; for the component with mu = +/-1/2 it reads

    H_mu = p**2 / (2 M) - C mu B0 - C mu G y

so each component feels a constant force ``C mu G`` and its mean position
follows ``+/- (C G / 4M) t**2``.  Propagation uses Strang splitting with the
kinetic factor applied in momentum space on a periodic grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BoundaryError, DomainError, ResolutionError
from .spin import NORM_TOL, Spinor, make_skew_state

MU = np.array([0.5, -0.5])  # component order: (plus, minus)
BOUNDARY_WIDTHS = 5.0
MIN_POINTS_PER_SIGMA = 8.0
POP_FLOOR = 1e-12


@dataclass(frozen=True)
class SgParams:
    mass: float = 1.0
    coupling: float = 1.0
    b0: float = 0.0
    gradient: float = 1.0
    length: float = 64.0
    points: int = 1024
    dt: float = 1e-3
    t_final: float = 4.0

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass!r}")
        if not self.length > 0:
            raise DomainError(f"length must be positive, got {self.length!r}")
        n = self.points
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise DomainError(f"points must be a power of two >= 16, got {n!r}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not self.t_final >= 0:
            raise DomainError(f"t_final must be nonnegative, got {self.t_final!r}")
        for name in ("mass", "coupling", "b0", "gradient", "length", "dt", "t_final"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def dy(self) -> float:
        return self.length / self.points

    @property
    def acceleration(self) -> float:
        """Magnitude of ``C G / (2M)``, the acceleration of either component."""
        return self.coupling * self.gradient / (2.0 * self.mass)

    def displacement(self, t: float) -> float:
        """Ehrenfest displacement ``C G t**2 / (4M)`` of the plus component."""
        return 0.5 * self.acceleration * t * t

    def free_width(self, sigma0: float, t: float) -> float:
        """Width of a minimum-uncertainty Gaussian after time ``t``."""
        return sigma0 * math.sqrt(1.0 + (t / (2.0 * self.mass * sigma0**2)) ** 2)

    def check_stability(self, sigma0: float) -> None:
        """Raise BoundaryError unless a packet of width sigma0 stays clear of the edge."""
        reach = abs(self.displacement(self.t_final)) + BOUNDARY_WIDTHS * self.free_width(
            sigma0, self.t_final
        )
        if not reach < self.length / 2.0:
            raise BoundaryError(
                f"packet reaches {reach:.6g} from the origin by t={self.t_final:g}; "
                f"grid half-length is {self.length / 2.0:.6g}"
            )

    def grid(self) -> np.ndarray:
        return -0.5 * self.length + self.dy * np.arange(self.points)

    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dy)

    def potential(self) -> np.ndarray:
        """Potential energy of both components, shape (2, points)."""
        y = self.grid()
        mu = MU[:, None]
        return -self.coupling * mu * self.b0 - self.coupling * mu * self.gradient * y[None, :]


@dataclass(frozen=True)
class PacketState:
    """Two-component wavefunction sampled on the grid ``y_k`` at time ``t``.

    ``psi[0]`` is the mu = +1/2 component and ``psi[1]`` the mu = -1/2 one.
    """

    psi: np.ndarray
    t: float
    length: float
    sigma0: float = field(default=math.nan)

    @property
    def points(self) -> int:
        return self.psi.shape[1]

    @property
    def dy(self) -> float:
        return self.length / self.points

    @property
    def y(self) -> np.ndarray:
        return -0.5 * self.length + self.dy * np.arange(self.points)

    def populations(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=1) * self.dy

    def norm(self) -> float:
        return float(np.sum(self.populations()))


@dataclass(frozen=True)
class SplitDiagnostics:
    mean_y_plus: float
    mean_y_minus: float
    pop_plus: float
    pop_minus: float
    spatial_overlap: float


def init_packet(spin: Spinor, sigma0: float, params: SgParams) -> PacketState:
    """Gaussian packet at rest at y = 0 carrying a uniform spin factor.

    ``sigma0`` is the standard deviation of the position density.
    """
    if abs(spin.norm_sq - 1.0) > NORM_TOL:
        raise DomainError("spin must be normalized")
    if not sigma0 > 0:
        raise DomainError(f"sigma0 must be positive, got {sigma0!r}")
    if sigma0 < MIN_POINTS_PER_SIGMA * params.dy:
        raise ResolutionError(
            f"sigma0={sigma0:g} spans fewer than {MIN_POINTS_PER_SIGMA:g} grid spacings "
            f"(dy={params.dy:g})"
        )
    if BOUNDARY_WIDTHS * sigma0 >= params.length / 2.0:
        raise BoundaryError(f"sigma0={sigma0:g} is too wide for length={params.length:g}")
    y = params.grid()
    g = np.exp(-(y**2) / (4.0 * sigma0**2))
    g /= math.sqrt(np.sum(g**2) * params.dy)
    psi = np.stack([spin.up * g, spin.down * g]).astype(np.complex128)
    return PacketState(psi=psi, t=0.0, length=params.length, sigma0=sigma0)


def _moments(state: PacketState, params: SgParams):
    """Per-component population, <y>, <p>, Var(y), Cov(y, p) and Var(p)."""
    psi = state.psi
    y = state.y
    dy = state.dy
    k = params.wavenumbers()
    dpsi = np.fft.ifft(1j * k[None, :] * np.fft.fft(psi, axis=1), axis=1)
    rho = np.abs(psi) ** 2
    pop = rho.sum(axis=1) * dy
    out = []
    for c in range(2):
        if pop[c] < POP_FLOOR:
            out.append(None)
            continue
        w = rho[c] * dy / pop[c]
        ym = float(np.sum(w * y))
        # <p> = -i <psi|d/dy psi>; symmetrized <yp + py>/2 = Re(<psi| y p |psi>)
        pm = float(np.real(np.sum(np.conj(psi[c]) * (-1j) * dpsi[c]) * dy / pop[c]))
        yp = float(np.real(np.sum(np.conj(psi[c]) * y * (-1j) * dpsi[c]) * dy / pop[c]))
        p2 = float(np.sum(np.abs(dpsi[c]) ** 2) * dy / pop[c])
        out.append(
            dict(
                mean_y=ym,
                mean_p=pm,
                var_y=float(np.sum(w * (y - ym) ** 2)),
                cov=yp - ym * pm,
                var_p=max(p2 - pm * pm, 0.0),
            )
        )
    return out


def _guard_boundary(state: PacketState, params: SgParams, duration: float) -> None:
    # Exact for H quadratic in (y, p): means follow the classical parabola,
    # the variance evolves as for a free particle.
    half = 0.5 * state.length
    ts = np.linspace(0.0, duration, 65)
    for c, mom in enumerate(_moments(state, params)):
        if mom is None:
            continue
        force = params.coupling * MU[c] * params.gradient
        mean = mom["mean_y"] + mom["mean_p"] * ts / params.mass + 0.5 * force * ts**2 / params.mass
        var = mom["var_y"] + 2.0 * mom["cov"] * ts / params.mass + mom["var_p"] * ts**2 / params.mass**2
        reach = np.abs(mean) + BOUNDARY_WIDTHS * np.sqrt(np.maximum(var, 0.0))
        worst = int(np.argmax(reach))
        if not reach[worst] < half:
            raise BoundaryError(
                f"component {'+-'[c]} comes within {BOUNDARY_WIDTHS:g} widths of the "
                f"boundary near t={state.t + ts[worst]:.6g} (reach {reach[worst]:.6g}, "
                f"half-length {half:.6g})"
            )


def step_count(t: float, dt: float) -> int:
    """Number of steps of size ``dt`` nearest to duration ``t``."""
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"duration must be finite and nonnegative, got {t!r}")
    return int(round(t / dt))


def evolve(state: PacketState, params: SgParams, t: float) -> PacketState:
    """Propagate ``state`` for ``t`` rounded to a whole number of steps.

    The returned state's ``t`` records the time actually reached.
    """
    nsteps = step_count(t, params.dt)
    if state.points != params.points or state.length != params.length:
        raise DomainError("state grid does not match params")
    _guard_boundary(state, params, nsteps * params.dt)
    if nsteps == 0:
        return replace(state, psi=state.psi.copy())
    dt = params.dt
    v = params.potential()
    half_v = np.exp(-0.5j * dt * v)
    full_v = half_v * half_v
    kin = np.exp(-0.5j * dt * params.wavenumbers() ** 2 / params.mass)[None, :]

    # Strang steps V/2 T V/2 with adjacent half potential steps fused.
    psi = state.psi * half_v
    for i in range(nsteps):
        psi = np.fft.ifft(np.fft.fft(psi, axis=1) * kin, axis=1)
        psi *= full_v if i < nsteps - 1 else half_v
    return replace(state, psi=psi, t=state.t + nsteps * dt)


def evolve_series(state: PacketState, params: SgParams, t: float, record_every: int = 100):
    """Evolve for ``t`` and return the list of states sampled every ``record_every`` steps.

    The first entry is the input state and the last is the final state.
    """
    if record_every < 1:
        raise DomainError("record_every must be at least 1")
    nsteps = step_count(t, params.dt)
    _guard_boundary(state, params, nsteps * params.dt)
    t0 = state.t
    states = [state]
    done = 0
    while done < nsteps:
        chunk = min(record_every, nsteps - done)
        done += chunk
        state = replace(evolve(state, params, chunk * params.dt), t=t0 + done * params.dt)
        states.append(state)
    return states


def diagnostics(state: PacketState) -> SplitDiagnostics:
    """Component means, populations and normalized cross-component overlap.

    Means of a component with population below 1e-12 are reported as 0.
    """
    y = state.y
    dy = state.dy
    rho = np.abs(state.psi) ** 2
    pop = rho.sum(axis=1) * dy
    total = pop.sum()
    means = [float(np.sum(rho[c] * y) * dy / pop[c]) if pop[c] >= POP_FLOOR else 0.0 for c in range(2)]
    if pop[0] < POP_FLOOR or pop[1] < POP_FLOOR:
        overlap = 0.0
    else:
        cross = np.sum(np.conj(state.psi[0]) * state.psi[1]) * dy
        overlap = float(abs(cross) / math.sqrt(pop[0] * pop[1]))
    return SplitDiagnostics(
        mean_y_plus=means[0],
        mean_y_minus=means[1],
        pop_plus=float(pop[0] / total),
        pop_minus=float(pop[1] / total),
        spatial_overlap=overlap,
    )


def component_width(state: PacketState, component: int) -> float:
    """Standard deviation of the position density of one component."""
    rho = np.abs(state.psi[component]) ** 2
    pop = rho.sum()
    if pop * state.dy < POP_FLOOR:
        return 0.0
    y = state.y
    m = np.sum(rho * y) / pop
    return float(math.sqrt(np.sum(rho * (y - m) ** 2) / pop))


def extract_branch_amplitudes(state: PacketState) -> tuple[float, float]:
    """Branch weights ``(q_plus, q_minus)`` read off the component populations."""
    d = diagnostics(state)
    return d.pop_plus, d.pop_minus


def projection_infidelity(theta: float, params: SgParams, sigma0: float = 0.5) -> float:
    """Squared overlap of the evolved state with its own normalized minus branch.

    Evolves ``|eta(theta), Y=0>`` to ``params.t_final`` and projects onto
    ``|mu=-1/2, Y_->``, the evolved minus component renormalized.  Any value
    below 1 means the detected branch is not the unitarily evolved state.
    Returns 0 when the minus component is empty.
    """
    params.check_stability(sigma0)
    state = evolve(init_packet(make_skew_state(theta), sigma0, params), params, params.t_final)
    minus = state.psi[1]
    pop_minus = float(np.sum(np.abs(minus) ** 2) * state.dy)
    if pop_minus < POP_FLOOR:
        return 0.0
    ket = minus / math.sqrt(pop_minus)
    amp = np.sum(np.conj(ket) * state.psi[1]) * state.dy  # plus component is orthogonal in spin
    return float(abs(amp) ** 2 / state.norm())
