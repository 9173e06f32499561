"""Numerical and closed-form solutions of the normalized Ricci flow ODE systems.

Trajectories are produced by scipy's Dormand-Prince 5(4) pair (``RK45``) with its
native dense output. The volume ``abc`` is monitored but never re-projected, so a
small ``volume_drift`` is a genuine accuracy certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ConservationError,
    IntegrationDiverged,
    IntegrationError,
    NotAvailableError,
    ParameterError,
    TimeRangeError,
)
from .geometry import BianchiClass, MetricState, ricci_diagonal

__all__ = [
    "IntegratorControls",
    "FlowTrajectory",
    "ConservationReport",
    "integrate",
    "closed_form_state",
    "closed_form_trajectory",
    "conservation_report",
    "sample_initial_states",
    "time_grid",
]

GUARD_BOX = (1e-12, 1e12)
NORMALIZED_TOL = 1e-12


@dataclass(frozen=True)
class IntegratorControls:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    sample_spacing: float = 0.01
    volume_ceiling: float = 1e-9

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ParameterError(f"{name} must lie in (0, 1), got {value!r}")
        for name in ("max_step", "sample_spacing", "volume_ceiling"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterError(f"{name} must be positive, got {value!r}")


def time_grid(t_start: float, t_end: float, spacing: float) -> np.ndarray:
    """Uniform grid from ``t_start`` to ``t_end`` (both included), step at most ``spacing``."""
    n = max(1, int(np.ceil((t_end - t_start) / spacing - 1e-9)))
    grid = np.linspace(t_start, t_end, n + 1)
    grid[-1] = t_end
    return grid


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    """Sampled solution of one class's flow with dense evaluation on ``[t_start, t_end]``.

    ``y`` has shape ``(3, n)`` holding ``a, b, c`` at the sample times ``t``.
    """

    cls: BianchiClass
    t: np.ndarray
    y: np.ndarray
    controls: IntegratorControls
    volume_drift: float
    worst_time: float
    normalized: bool
    dense: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    n_steps: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def initial(self) -> MetricState:
        return MetricState.from_array(self.y[:, 0], self.t[0])

    @property
    def final(self) -> MetricState:
        return MetricState.from_array(self.y[:, -1], self.t[-1])

    @property
    def samples(self) -> list[MetricState]:
        return [MetricState.from_array(self.y[:, i], ti) for i, ti in enumerate(self.t)]

    def __len__(self):
        return self.t.size

    def __call__(self, t):
        """Dense evaluation; returns shape ``(3,)`` for scalar ``t`` else ``(3, len(t))``."""
        tt = np.asarray(t, dtype=float)
        span = self.t_end - self.t_start
        slack = 1e-12 * max(1.0, abs(self.t_end))
        if np.any(tt < self.t_start - slack) or np.any(tt > self.t_end + slack) or span < 0:
            raise TimeRangeError(
                f"time outside trajectory span [{self.t_start}, {self.t_end}]"
            )
        return self.dense(np.clip(tt, self.t_start, self.t_end))

    def state(self, t: float) -> MetricState:
        return MetricState.from_array(self(float(t)), t)

    def index_from(self, tau: float) -> int:
        """First sample index with ``t >= tau`` (up to rounding)."""
        if tau < self.t_start - 1e-12 or tau > self.t_end + 1e-12:
            raise TimeRangeError(f"tau={tau} outside [{self.t_start}, {self.t_end}]")
        return int(np.searchsorted(self.t, tau - 1e-12 * max(1.0, abs(tau))))

    def curvature(self, t=None):
        """Arrays ``(r, rho, scalar)`` on the sample grid, or at the times ``t``.

        ``r`` and ``rho`` have shape ``(3, n)``.
        """
        y = self.y if t is None else self(t)
        r = np.array(ricci_diagonal(self.cls, y[0], y[1], y[2]), dtype=float)
        rho = r / y
        return r, rho, rho.sum(axis=0)


class ConservationReport(NamedTuple):
    volume_drift: float
    worst_time: float


def _drift(t, y, reference):
    dev = np.abs(np.prod(y, axis=0) - reference)
    i = int(np.argmax(dev))
    return float(dev[i]), float(t[i])


def integrate(
    cls,
    initial: MetricState,
    t_end: float,
    controls: IntegratorControls | None = None,
    *,
    normalize: bool = False,
    require_normalized: bool = True,
    guard: tuple[float, float] = GUARD_BOX,
) -> FlowTrajectory:
    """Integrate the normalized Ricci flow of ``cls`` from ``initial`` to ``t_end``.

    Parameters
    ----------
    normalize
        Rescale ``initial`` to unit volume first; recorded on the trajectory.
    require_normalized
        Reject initial data with ``|abc - 1| > 1e-12`` (ignored if ``normalize``).
    guard
        Box that every coefficient must stay in; leaving it raises
        :class:`IntegrationDiverged`.

    Raises
    ------
    IntegrationDiverged, ConservationError, IntegrationError
    """
    cls = BianchiClass.parse(cls)
    controls = controls or IntegratorControls()
    if normalize:
        initial = initial.normalized()
    elif require_normalized and abs(initial.volume - 1.0) > NORMALIZED_TOL:
        raise ParameterError(
            f"initial state has volume {initial.volume!r}; pass normalize=True "
            "or require_normalized=False"
        )
    t0 = initial.t
    if not t_end > t0:
        raise ParameterError(f"t_end={t_end} must exceed the initial time {t0}")

    lo, hi = guard
    y0 = initial.as_array()

    def rhs(_t, y):
        a, b, c = y
        r = ricci_diagonal(cls, a, b, c)
        scalar = r[0] / a + r[1] / b + r[2] / c
        return [-2.0 * r[0] + 2.0 / 3.0 * scalar * a,
                -2.0 * r[1] + 2.0 / 3.0 * scalar * b,
                -2.0 * r[2] + 2.0 / 3.0 * scalar * c]

    def below(_t, y):
        return np.min(y) - lo

    def above(_t, y):
        return hi - np.max(y)

    below.terminal = above.terminal = True
    below.direction = above.direction = -1

    sol = solve_ivp(
        rhs,
        (t0, t_end),
        y0,
        method="RK45",
        rtol=controls.rel_tol,
        atol=controls.abs_tol,
        max_step=controls.max_step,
        dense_output=True,
        events=(below, above),
    )
    if sol.status == 1:
        hit = [ev[0] for ev in sol.t_events if len(ev)]
        raise IntegrationDiverged(
            f"{cls.name} flow left the box [{lo:g}, {hi:g}]", float(min(hit))
        )
    if sol.status != 0:
        raise IntegrationDiverged(f"{cls.name} integration failed: {sol.message}",
                                  float(sol.t[-1]))

    grid = time_grid(t0, t_end, controls.sample_spacing)
    y = sol.sol(grid)
    y[:, 0] = y0
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise IntegrationError(f"{cls.name} trajectory produced non-positive coefficients")
    drift, worst = _drift(grid, y, initial.volume)
    if drift > controls.volume_ceiling:
        raise ConservationError(drift, controls.volume_ceiling, worst)

    return FlowTrajectory(
        cls=cls,
        t=grid,
        y=y,
        controls=controls,
        volume_drift=drift,
        worst_time=worst,
        normalized=normalize,
        dense=sol.sol,
        n_steps=int(sol.t.size - 1),
    )


def _heisenberg_factor(a0, t):
    # 1 - (16/3) R0 t with R0 = -a0^2 / 2
    return 1.0 + 8.0 / 3.0 * a0 * a0 * t


def _closed_form_arrays(cls, initial, t):
    dt = np.asarray(t, dtype=float) - initial.t
    if cls is BianchiClass.Euclidean3:
        ones = np.ones_like(dt)
        return np.array([initial.a * ones, initial.b * ones, initial.c * ones])
    if cls is BianchiClass.Heisenberg:
        s = _heisenberg_factor(initial.a, dt)
        q = s**0.25
        return np.array([initial.a / np.sqrt(s), initial.b * q, initial.c * q])
    raise NotAvailableError(f"no closed-form solution is available for {cls.name}")


def closed_form_state(cls, initial: MetricState, t: float, *,
                      require_normalized: bool = True) -> MetricState:
    """Exact flow state for the flat class and the Heisenberg class."""
    cls = BianchiClass.parse(cls)
    if cls not in (BianchiClass.Euclidean3, BianchiClass.Heisenberg):
        raise NotAvailableError(f"no closed-form solution is available for {cls.name}")
    if t < initial.t:
        raise TimeRangeError(f"t={t} precedes the initial time {initial.t}")
    if (cls is BianchiClass.Heisenberg and require_normalized
            and abs(initial.volume - 1.0) > NORMALIZED_TOL):
        raise ParameterError("closed form expects a unit-volume initial state")
    return MetricState.from_array(_closed_form_arrays(cls, initial, t), t)


def closed_form_trajectory(cls, initial: MetricState, t_end: float,
                           controls: IntegratorControls | None = None) -> FlowTrajectory:
    """A :class:`FlowTrajectory` sampled from the exact solution."""
    cls = BianchiClass.parse(cls)
    controls = controls or IntegratorControls()
    grid = time_grid(initial.t, t_end, controls.sample_spacing)
    y = _closed_form_arrays(cls, initial, grid)
    drift, worst = _drift(grid, y, initial.volume)
    return FlowTrajectory(
        cls=cls,
        t=grid,
        y=y,
        controls=controls,
        volume_drift=drift,
        worst_time=worst,
        normalized=False,
        dense=lambda tt: _closed_form_arrays(cls, initial, tt),
    )


def conservation_report(traj: FlowTrajectory) -> ConservationReport:
    return ConservationReport(*_drift(traj.t, traj.y, float(np.prod(traj.y[:, 0]))))


def sample_initial_states(cls, n: int, seed: int = 0, spread: float = 0.7,
                          t0: float = 0.0) -> list[MetricState]:
    """Random unit-volume initial states respecting the class's usual ordering.

    Log-coefficients are drawn uniformly from ``[-spread, spread]`` and the
    coordinates are then permuted: SU(2) gets ``a >= b >= c``; SL(2,R) and
    Heisenberg get ``b >= c``; E(1,1) and E(2) get ``a >= b``.
    """
    cls = BianchiClass.parse(cls)
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        y = np.exp(rng.uniform(-spread, spread, 3))
        if cls is BianchiClass.SU2:
            y = np.sort(y)[::-1]
        elif cls in (BianchiClass.SL2R, BianchiClass.Heisenberg):
            y[1:] = np.sort(y[1:])[::-1]
        elif cls in (BianchiClass.E11, BianchiClass.E2):
            y[:2] = np.sort(y[:2])[::-1]
        states.append(MetricState.from_array(y, t0).normalized())
    return states
