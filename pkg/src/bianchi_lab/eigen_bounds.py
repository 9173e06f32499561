"""First-eigenvalue envelopes along a Bianchi Ricci flow.

Along the normalized flow the first Laplace eigenvalue obeys::

    d(lambda)/dt = 2 * sum_i q_i w_i - (2/3) R lambda,    w_i >= 0,  sum_i w_i = lambda

where ``w_i`` are the (unobservable) eigenfunction gradient integrals and ``q_i``
are either the lower-index Ricci components ``r_ii`` or the Ricci eigenvalues
``r_ii / g_ii`` (see :class:`Convention`). Hence ``(1/lambda) d(lambda)/dt`` lies in
``[c_lo, c_hi]`` with ``c_lo = 2 min q - (2/3) R`` and ``c_hi = 2 max q - (2/3) R``.
This module integrates those reaction coefficients into envelopes, evaluates the
closed-form per-class bounds, and generates admissible synthetic eigenvalue
trajectories that stand in for the true one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ClassMismatchError,
    ParameterError,
    PolicyError,
    PreconditionError,
    QuadratureError,
    TimeRangeError,
)
from .flow import FlowTrajectory
from .geometry import BianchiClass, CurvatureData, MetricState

__all__ = [
    "Convention",
    "Factor",
    "Series",
    "ReactionCoefficients",
    "EigenEnvelope",
    "ExtremalMin",
    "ExtremalMax",
    "ConstantFractions",
    "PiecewiseRandom",
    "SyntheticLambda",
    "TheoremBoundParams",
    "TheoremBounds",
    "E11Constants",
    "reaction_coefficients",
    "coefficients_along",
    "envelope_integrate",
    "theorem_bounds",
    "e11_constants",
    "synth_lambda",
    "monotone_quantity",
]


class Convention(enum.Enum):
    """Which Ricci quantity enters the reaction coefficients.

    ``ComponentLiteral`` uses ``r_ii`` exactly as the displayed inequalities do;
    ``Endomorphism`` uses ``rho_i = r_ii / g_ii``. They coincide when ``g = identity``.
    """

    ComponentLiteral = "component"
    Endomorphism = "endomorphism"

    @classmethod
    def parse(cls, value) -> Convention:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ValueError(
            f"unknown convention {value!r}; accepted: {', '.join(m.value for m in cls)}"
        )


class Factor(enum.Enum):
    MinFactor = "min"
    MaxFactor = "max"


@dataclass(frozen=True, eq=False)
class Series:
    """Samples of a time-indexed function, optionally with a dense evaluator."""

    t: np.ndarray
    values: np.ndarray
    fn: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.t.shape != self.values.shape:
            raise ValueError("t and values must have the same shape")

    def __call__(self, t):
        if self.fn is not None:
            return self.fn(t)
        return np.interp(t, self.t, self.values)

    def __len__(self):
        return self.t.size


class ReactionCoefficients(NamedTuple):
    c_lo: float
    c_hi: float
    argmin: int
    argmax: int


def _pick(convention, r, rho):
    return r if Convention.parse(convention) is Convention.ComponentLiteral else rho


def reaction_coefficients(state: MetricState, curv: CurvatureData,
                          convention=Convention.ComponentLiteral) -> ReactionCoefficients:
    """Pointwise ``c_lo``, ``c_hi`` and the (0-based) indices attaining them.

    Ties resolve to the smallest index.
    """
    q = np.array(_pick(convention, curv.components, curv.eigenvalues), dtype=float)
    i_lo, i_hi = int(np.argmin(q)), int(np.argmax(q))
    shift = 2.0 / 3.0 * curv.scalar
    return ReactionCoefficients(2.0 * q[i_lo] - shift, 2.0 * q[i_hi] - shift, i_lo, i_hi)


def coefficients_along(traj: FlowTrajectory, convention=Convention.ComponentLiteral, t=None):
    """Vectorised ``(c_lo, c_hi, q, scalar)`` on the sample grid or at times ``t``."""
    r, rho, scalar = traj.curvature(t)
    q = _pick(convention, r, rho)
    shift = 2.0 / 3.0 * scalar
    return 2.0 * q.min(axis=0) - shift, 2.0 * q.max(axis=0) - shift, q, scalar


def _anchor_grid(traj: FlowTrajectory, tau: float) -> np.ndarray:
    i0 = traj.index_from(tau)
    grid = traj.t[i0:]
    if grid.size == 0 or abs(grid[0] - tau) > 1e-12 * max(1.0, abs(tau)):
        grid = np.concatenate([[tau], grid])
    else:
        grid = grid.copy()
        grid[0] = tau
    return grid


def _check_anchor(traj, tau, lambda_tau):
    if not traj.t_start - 1e-12 <= tau <= traj.t_end + 1e-12:
        raise TimeRangeError(f"tau={tau} outside trajectory span [{traj.t_start}, {traj.t_end}]")
    if not (np.isfinite(lambda_tau) and lambda_tau > 0):
        raise ParameterError(f"lambda_tau must be positive, got {lambda_tau!r}")


LOG_RTOL = 1e-13


def _integrate_log(traj, tau, rate, n):
    """Integrate ``d(ell)/dt = rate(t)`` (vector of length ``n``) from ``ell(tau) = 0``.

    ``ell`` is a logarithm, so the flow's relative tolerance becomes an absolute
    tolerance here; the relative part is kept negligible.
    """
    controls = traj.controls
    if tau >= traj.t_end:
        return lambda t: np.zeros((n,) + np.shape(t))
    sol = solve_ivp(
        lambda t, _y: rate(t),
        (tau, traj.t_end),
        np.zeros(n),
        method="RK45",
        rtol=LOG_RTOL,
        atol=controls.rel_tol,
        max_step=controls.max_step,
        dense_output=True,
    )
    if sol.status != 0:
        raise QuadratureError(f"envelope integration failed: {sol.message}")
    dense = sol.sol

    def ell(t):
        return dense(np.clip(t, tau, traj.t_end))

    return ell


@dataclass(frozen=True, eq=False)
class EigenEnvelope:
    """Lower/upper eigenvalue envelopes ``L(t) <= U(t)`` anchored at ``(tau, lambda_tau)``."""

    tau: float
    lambda_tau: float
    convention: Convention
    t: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    _log_fn: Callable = field(repr=False)

    def L(self, t):
        return self.lambda_tau * np.exp(self._log_fn(t)[0])

    def U(self, t):
        return self.lambda_tau * np.exp(self._log_fn(t)[1])

    @property
    def lower_series(self) -> Series:
        return Series(self.t, self.lower, self.L)

    @property
    def upper_series(self) -> Series:
        return Series(self.t, self.upper, self.U)


def envelope_integrate(traj: FlowTrajectory, tau: float, lambda_tau: float = 1.0,
                       convention=Convention.ComponentLiteral) -> EigenEnvelope:
    """Solve ``dL/dt = c_lo L`` and ``dU/dt = c_hi U`` from ``L(tau) = U(tau) = lambda_tau``.

    The equations are integrated for ``log L`` and ``log U`` with the trajectory's own
    tolerances, which keeps both envelopes strictly positive.
    """
    convention = Convention.parse(convention)
    _check_anchor(traj, tau, lambda_tau)

    def rate(t):
        c_lo, c_hi, _, _ = coefficients_along(traj, convention, t)
        return np.array([c_lo, c_hi])

    ell = _integrate_log(traj, tau, rate, 2)
    grid = _anchor_grid(traj, tau)
    logs = ell(grid)
    logs[:, 0] = 0.0
    return EigenEnvelope(
        tau=float(tau),
        lambda_tau=float(lambda_tau),
        convention=convention,
        t=grid,
        lower=lambda_tau * np.exp(logs[0]),
        upper=lambda_tau * np.exp(logs[1]),
        _log_fn=ell,
    )


# -- closed-form bounds -------------------------------------------------------------


@dataclass(frozen=True)
class TheoremBoundParams:
    """Inputs of the per-class closed-form eigenvalue bounds.

    ``initial`` is the flow's starting state ``(A0, B0, C0)``. ``c1``/``c2`` are
    required exactly for E(1,1) and ``k`` exactly for SL(2,R).
    """

    cls: BianchiClass
    tau: float
    lambda_tau: float
    initial: MetricState
    c1: float | None = None
    c2: float | None = None
    k: float | None = None

    def __post_init__(self):
        cls = BianchiClass.parse(self.cls)
        object.__setattr__(self, "cls", cls)
        if cls is BianchiClass.Euclidean3:
            raise ParameterError("the flat class has no eigenvalue bounds (lambda is constant)")
        if not self.lambda_tau > 0:
            raise ParameterError(f"lambda_tau must be positive, got {self.lambda_tau!r}")
        has_c = (self.c1 is not None, self.c2 is not None)
        if cls is BianchiClass.E11:
            if not all(has_c):
                raise ParameterError("E11 bounds need both c1 and c2")
            if self.c1 < 0 or self.c2 < 0:
                raise ParameterError("c1 and c2 must be nonnegative")
            if not self.tau > 0:
                raise ParameterError("E11 bounds need tau > 0")
        elif any(has_c):
            raise ParameterError("c1/c2 apply to E11 only")
        if cls is BianchiClass.SL2R:
            if self.k is None or not self.k > 0:
                raise ParameterError("SL2R bounds need a positive k")
        elif self.k is not None:
            raise ParameterError("k applies to SL2R only")

    @classmethod
    def from_trajectory(cls, traj: FlowTrajectory, tau: float,
                        lambda_tau: float = 1.0) -> TheoremBoundParams:
        """Fill the class-specific constants from ``traj`` (``k = 10/3 C(tau)^2``)."""
        extra = {}
        if traj.cls is BianchiClass.SL2R:
            extra["k"] = 10.0 / 3.0 * float(traj(tau)[2]) ** 2
        elif traj.cls is BianchiClass.E11:
            extra.update(e11_constants(traj, tau)._asdict())
        return cls(traj.cls, float(tau), float(lambda_tau), traj.initial, **extra)


class TheoremBounds(NamedTuple):
    lo: np.ndarray | float
    hi: np.ndarray | float


def _heisenberg_logs(a0, b0, s, printed):
    lo = np.log(s) / 8.0 - 1.5 * b0 * (s**0.25 - 1.0)
    # integral of (1/3) A^2 + A^3 carries 3 A0 / 4; the printed display has A0 / 4
    hi_coeff = 0.25 * a0 if printed else 0.75 * a0
    hi = np.log(s) / 8.0 - hi_coeff * (s**-0.5 - 1.0)
    return lo, hi


def theorem_bounds(params: TheoremBoundParams, t, *, as_printed: bool = False) -> TheoremBounds:
    """Closed-form lower/upper eigenvalue bounds at ``t >= tau``.

    By default the Heisenberg upper bound uses the exact integral of its own
    reaction coefficient, and the SU(2) upper bound carries the ``lambda(tau)``
    factor. ``as_printed=True`` reproduces both displays literally instead.
    """
    p = params
    tt = np.asarray(t, dtype=float)
    if np.any(tt < p.tau - 1e-12 * max(1.0, abs(p.tau))):
        raise TimeRangeError(f"bounds hold only for t >= tau={p.tau}")
    tt = np.maximum(tt, p.tau)
    a0, b0, c0, t0 = p.initial.a, p.initial.b, p.initial.c, p.initial.t
    s, tau = tt - t0, p.tau - t0
    lam = p.lambda_tau
    hi_scale = lam

    if p.cls is BianchiClass.SU2:
        if not a0 >= b0 >= c0:
            raise PreconditionError("SU2 bounds assume A0 >= B0 >= C0")
        decay = np.exp(-2 * c0**2 * s) - np.exp(-2 * c0**2 * tau)
        log_lo = 2 * (a0 - c0) / c0**2 * decay
        log_hi = 5 * (c0 - a0) / (2 * c0**2) * decay
        if as_printed:
            hi_scale = 1.0
    elif p.cls is BianchiClass.SL2R:
        if not b0 >= c0:
            raise PreconditionError("SL2R bounds assume B0 >= C0")
        log_lo = -2.0 * (s - tau)
        log_hi = 3.0 * np.log((c0 + 2.0 / 3.0 * s) / (c0 + 2.0 / 3.0 * tau))
    elif p.cls is BianchiClass.Heisenberg:
        if not b0 >= c0:
            raise PreconditionError("Heisenberg bounds assume B0 >= C0")
        lo_t, hi_t = _heisenberg_logs(a0, b0, 1 + 8.0 / 3.0 * a0**2 * s, as_printed)
        lo_0, hi_0 = _heisenberg_logs(a0, b0, 1 + 8.0 / 3.0 * a0**2 * tau, as_printed)
        log_lo, log_hi = lo_t - lo_0, hi_t - hi_0
    elif p.cls is BianchiClass.E11:
        log_lo = -p.c2 * np.log(tt / p.tau)
        log_hi = p.c1 * (1.0 / p.tau - 1.0 / tt)
    elif p.cls is BianchiClass.E2:
        if not a0 >= b0:
            raise PreconditionError("E2 bounds assume A0 >= B0")
        decay = np.exp(-4 * b0**2 * s) - np.exp(-4 * b0**2 * tau)
        log_lo = a0**2 * (a0 - b0) / (2 * b0**2) * decay
        log_hi = a0**2 * (b0 - a0) / (4 * b0**2) * decay
    else:  # pragma: no cover - rejected by TheoremBoundParams
        raise ParameterError(f"no bounds for {p.cls.name}")

    with np.errstate(over="ignore"):
        lo, hi = lam * np.exp(log_lo), hi_scale * np.exp(log_hi)
    if np.ndim(t) == 0:
        return TheoremBounds(float(lo), float(hi))
    return TheoremBounds(lo, hi)


class E11Constants(NamedTuple):
    c1: float
    c2: float


def e11_constants(traj: FlowTrajectory, tau: float) -> E11Constants:
    """Smallest constants making the E(1,1) coefficient bounds hold on the grid.

    ``c2 = sup t * max(0, C(A+B)^2 - (A+B)^2/3)`` and
    ``c1 = sup t^2 * max(0, (A+B)^2/3 + A(A^2 - B^2))`` over samples in ``[tau, t_end]``.
    """
    if traj.cls is not BianchiClass.E11:
        raise ClassMismatchError(f"e11_constants needs an E11 trajectory, got {traj.cls.name}")
    i0 = traj.index_from(tau)
    t = traj.t[i0:]
    a, b, c = traj.y[:, i0:]
    s2 = (a + b) ** 2
    lower_gap = np.maximum(0.0, c * s2 - s2 / 3.0)
    upper_gap = np.maximum(0.0, s2 / 3.0 + a * (a * a - b * b))
    return E11Constants(float(np.max(t**2 * upper_gap)), float(np.max(t * lower_gap)))


# -- synthetic eigenvalue trajectories -----------------------------------------------


@dataclass(frozen=True)
class ExtremalMin:
    """All weight on the smallest Ricci quantity; saturates the lower envelope."""


@dataclass(frozen=True)
class ExtremalMax:
    """All weight on the largest Ricci quantity; saturates the upper envelope."""


@dataclass(frozen=True)
class ConstantFractions:
    w: tuple[float, float, float]

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (3,) or np.any(w < 0) or not np.all(np.isfinite(w)) \
                or abs(w.sum() - 1.0) > 1e-12:
            raise PolicyError(f"fractions must be a nonnegative triple summing to 1, got {self.w}")


@dataclass(frozen=True)
class PiecewiseRandom:
    """Dirichlet(1,1,1) fractions redrawn every ``switch_spacing`` time units."""

    seed: int
    switch_spacing: float = 1.0

    def __post_init__(self):
        if not self.switch_spacing > 0:
            raise PolicyError("switch_spacing must be positive")


@dataclass(frozen=True, eq=False)
class SyntheticLambda(Series):
    """An admissible eigenvalue trajectory plus the weight fractions that generated it."""

    fractions: np.ndarray = field(default=None, repr=False)

    @property
    def weights(self) -> np.ndarray:
        """Weights ``w_i(t)``; nonnegative and summing to the eigenvalue."""
        return self.fractions * self.values


def _cumulative_integrals(traj, tau, convention):
    """Dense ``t -> [int q1, int q2, int q3, int R]`` from ``tau``; cached per trajectory."""
    key = ("cumulative", float(tau), convention)
    if key not in traj._cache:
        def rate(t):
            _, _, q, scalar = coefficients_along(traj, convention, t)
            return np.concatenate([q, [scalar]])

        traj._cache[key] = _integrate_log(traj, tau, rate, 4)
    return traj._cache[key]


def _segment_fractions(policy, tau, t_end):
    if isinstance(policy, ConstantFractions):
        return np.array([tau, t_end]), np.asarray(policy.w, dtype=float)[None, :]
    n = max(1, int(np.ceil((t_end - tau) / policy.switch_spacing - 1e-9)))
    edges = tau + policy.switch_spacing * np.arange(n + 1, dtype=float)
    edges[-1] = max(edges[-1], t_end)
    rng = np.random.default_rng(policy.seed)
    return edges, rng.dirichlet(np.ones(3), size=n)


def synth_lambda(traj: FlowTrajectory, policy, tau: float, lambda_tau: float = 1.0,
                 convention=Convention.ComponentLiteral) -> SyntheticLambda:
    """Solve ``d(lambda)/dt = 2 sum q_i w_i - (2/3) R lambda`` with weights from ``policy``.

    Weights are ``w_i = f_i(t) lambda`` with fractions ``f`` on the simplex, so the
    equation is linear in ``lambda``; piecewise-constant fractions are applied
    exactly through cumulative integrals of ``q_i`` and ``R``.
    """
    convention = Convention.parse(convention)
    _check_anchor(traj, tau, lambda_tau)
    grid = _anchor_grid(traj, tau)

    if isinstance(policy, (ExtremalMin, ExtremalMax)):
        pick = np.argmin if isinstance(policy, ExtremalMin) else np.argmax

        def one_hot(t):
            _, _, q, _ = coefficients_along(traj, convention, t)
            f = np.zeros_like(q)
            idx = pick(q, axis=0)
            np.put_along_axis(f, np.expand_dims(idx, 0), 1.0, axis=0)
            return f

        # Both extremal rates are integrated together so the step sequence matches
        # the envelope solve; the one-hot sums reproduce c_lo and c_hi exactly.
        slot = 0 if isinstance(policy, ExtremalMin) else 1

        def rate(t):
            _, _, q, scalar = coefficients_along(traj, convention, t)
            shift = 2.0 / 3.0 * scalar
            lo = np.zeros_like(q)
            hi = np.zeros_like(q)
            np.put_along_axis(lo, np.expand_dims(np.argmin(q, axis=0), 0), 1.0, axis=0)
            np.put_along_axis(hi, np.expand_dims(np.argmax(q, axis=0), 0), 1.0, axis=0)
            return np.array([2.0 * np.sum(q * lo, axis=0) - shift,
                             2.0 * np.sum(q * hi, axis=0) - shift])

        ell = _integrate_log(traj, tau, rate, 2)

        def fn(t):
            return lambda_tau * np.exp(ell(t)[slot])

        values = fn(grid)
        values[0] = lambda_tau
        return SyntheticLambda(grid, values, fn, fractions=one_hot(grid))

    if not isinstance(policy, (ConstantFractions, PiecewiseRandom)):
        raise PolicyError(f"unsupported weight policy {policy!r}")

    cum = _cumulative_integrals(traj, tau, convention)
    edges, fracs = _segment_fractions(policy, tau, traj.t_end)
    at_edges = cum(edges)  # (4, m + 1)
    seg_gain = 2.0 * np.einsum("ki,ik->k", fracs, np.diff(at_edges[:3], axis=1))
    base = np.concatenate([[0.0], np.cumsum(seg_gain)])

    def segment_of(t):
        k = np.searchsorted(edges, t, side="right") - 1
        return np.clip(k, 0, len(fracs) - 1)

    def fn(t):
        t = np.asarray(t, dtype=float)
        k = segment_of(t)
        now = cum(t)
        gain = 2.0 * np.sum(fracs[k].T * (now[:3] - at_edges[:3, k]), axis=0)
        return lambda_tau * np.exp(base[k] + gain - 2.0 / 3.0 * now[3])

    values = fn(grid)
    values[0] = lambda_tau
    return SyntheticLambda(grid, values, fn, fractions=fracs[segment_of(grid)].T)


# -- monotone quantities -------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)


def _composite_gauss(f, grid):
    """Cumulative 3-point Gauss-Legendre integral of ``f`` over consecutive grid cells."""
    left, right = grid[:-1], grid[1:]
    half, mid = 0.5 * (right - left), 0.5 * (right + left)
    nodes = mid[None, :] + half[None, :] * _GL_NODES[:, None]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    cells = half * np.sum(_GL_WEIGHTS[:, None] * vals, axis=0)
    return np.concatenate([[0.0], np.cumsum(cells)])


def _factor_integral(traj, tau, which, convention, tol=1e-8):
    """``-int_tau^t c_ext`` on the anchored grid, checked against half spacing.

    ``c_lo`` and ``c_hi`` are smooth once the ordering of the ``q_i`` is fixed,
    i.e. after the detected tau; a kink inside a cell shows up as a Richardson
    gap and raises :class:`QuadratureError`. Cached per trajectory.
    """
    key = ("factor", float(tau), which, convention)
    if key in traj._cache:
        return traj._cache[key]
    grid = _anchor_grid(traj, tau)
    if grid.size < 2:
        out = (grid, np.zeros_like(grid))
        traj._cache[key] = out
        return out

    def integrand(t):
        c_lo, c_hi, _, _ = coefficients_along(traj, convention, t)
        return -(c_lo if which is Factor.MinFactor else c_hi)

    coarse = _composite_gauss(integrand, grid)
    fine_grid = np.empty(2 * grid.size - 1)
    fine_grid[0::2] = grid
    fine_grid[1::2] = 0.5 * (grid[:-1] + grid[1:])
    fine = _composite_gauss(integrand, fine_grid)[0::2]
    gap = np.max(np.abs(fine - coarse))
    if gap > tol * max(1.0, np.max(np.abs(fine))):
        raise QuadratureError(
            f"quadrature of the {which.name} exponent disagrees with its half-spacing "
            f"refinement by {gap:.3e}"
        )
    out = (grid, fine)
    traj._cache[key] = out
    return out


def monotone_quantity(traj: FlowTrajectory, lambda_series: Series, tau: float, which,
                      convention=Convention.ComponentLiteral) -> Series:
    """``lambda(t) * exp(int_tau^t ((2/3) R - 2 q_ext) ds)`` on the grid from ``tau``.

    With ``q_ext = min q`` (``MinFactor``) the result is nondecreasing for any
    admissible ``lambda``; with ``max q`` (``MaxFactor``) it is nonincreasing.
    """
    which = which if isinstance(which, Factor) else Factor[which]
    convention = Convention.parse(convention)
    _check_anchor(traj, tau, 1.0)
    eps = 1e-9 * max(1.0, abs(traj.t_end))
    if lambda_series.t[0] > tau + eps or lambda_series.t[-1] < traj.t_end - eps:
        raise TimeRangeError(
            f"lambda series covers [{lambda_series.t[0]}, {lambda_series.t[-1]}], "
            f"need [{tau}, {traj.t_end}]"
        )
    grid, exponent = _factor_integral(traj, tau, which, convention)
    lam = np.asarray(lambda_series(grid), dtype=float)
    return Series(grid, lam * np.exp(exponent))
