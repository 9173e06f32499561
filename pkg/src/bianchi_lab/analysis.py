"""Threshold-time detection, lemma verification and monotonicity checks on trajectories."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .eigen_bounds import Convention, Series, coefficients_along
from .errors import (
    ClassMismatchError,
    DegenerateInputError,
    NoTauError,
    ParameterError,
    PreconditionError,
)
from .flow import FlowTrajectory
from .geometry import BianchiClass

__all__ = [
    "PredicateRecord",
    "TauCertificate",
    "ClauseResult",
    "LemmaReport",
    "LemmaId",
    "Direction",
    "MonotoneResult",
    "detect_tau",
    "verify_lemma",
    "check_monotone",
]

STRICT_MARGIN = 1e-12


class PredicateRecord(NamedTuple):
    name: str
    first_satisfied: float
    min_margin: float


@dataclass(frozen=True)
class TauCertificate:
    tau: float
    index: int
    predicates: tuple[PredicateRecord, ...]
    holds_to_end: bool


class _Predicate(NamedTuple):
    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    strict: bool = False


def _class_predicates(traj, convention, with_relaxations):
    cls = traj.cls
    c_lo, c_hi, q, _ = coefficients_along(traj, convention)
    a, b, c = traj.y
    a0, b0, c0 = traj.y[:, 0]
    s = traj.t - traj.t[0]
    q1, q2, q3 = q
    preds = []
    relax = []
    if cls is BianchiClass.SU2:
        preds = [_Predicate("q1 >= q2", q1, q2), _Predicate("q2 >= q3", q2, q3)]
        decay = (a0 - c0) * np.exp(-2 * c0**2 * s)
        relax = [_Predicate("c_lo >= -4(A0-C0)exp(-2 C0^2 t)", c_lo, -4 * decay),
                 _Predicate("c_hi <= 5(A0-C0)exp(-2 C0^2 t)", 5 * decay, c_hi)]
    elif cls is BianchiClass.SL2R:
        preds = [_Predicate("q1 > q2", q1, q2, strict=True),
                 _Predicate("q2 >= q3", q2, q3),
                 _Predicate("A <= B", b, a)]
        relax = [_Predicate("c_lo >= -2", c_lo, np.full_like(s, -2.0)),
                 _Predicate("c_hi <= 2/(C0 + 2t/3)", 2.0 / (c0 + 2.0 / 3.0 * s), c_hi)]
    elif cls is BianchiClass.Heisenberg:
        preds = [_Predicate("q1 >= q3", q1, q3), _Predicate("q3 >= q2", q3, q2)]
    elif cls is BianchiClass.E11:
        preds = [_Predicate("q1 >= q2", q1, q2), _Predicate("q2 >= q3", q2, q3)]
        relax = [_Predicate("t > 0", traj.t, np.zeros_like(s), strict=True)]
    elif cls is BianchiClass.E2:
        preds = [_Predicate("q1 >= q3", q1, q3), _Predicate("q3 >= q2", q3, q2)]
        decay = a0**2 * (a0 - b0) * np.exp(-4 * b0**2 * s)
        relax = [_Predicate("c_lo >= -2 A0^2 (A0-B0) exp(-4 B0^2 t)", c_lo, -2 * decay),
                 _Predicate("c_hi <= A0^2 (A0-B0) exp(-4 B0^2 t)", decay, c_hi)]
    return preds + (relax if with_relaxations else [])


def _holds(pred, tol):
    margin = pred.lhs - pred.rhs
    scale = np.maximum(np.abs(pred.lhs), np.abs(pred.rhs))
    if pred.strict:
        return margin, margin > STRICT_MARGIN * scale
    return margin, margin >= -tol * np.maximum(1.0, scale)


def _suffix_start(ok):
    """Index where the maximal all-true suffix of ``ok`` begins (``len(ok)`` if none)."""
    bad = np.flatnonzero(~ok)
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def detect_tau(cls, traj: FlowTrajectory, convention=Convention.ComponentLiteral, *,
               with_relaxations: bool = False, tol: float = 1e-8) -> TauCertificate:
    """Earliest grid time after which the class's Ricci ordering holds to ``t_end``.

    Non-strict predicates tolerate ``tol * max(1, |lhs|, |rhs|)`` of integration
    noise; the strict SL(2,R) comparison needs a relative margin of ``1e-12``.
    With ``with_relaxations`` the pointwise coefficient estimates that the
    closed-form bounds integrate are added as further predicates.

    Raises
    ------
    NoTauError
        Some predicate fails at the final sample.
    """
    cls = BianchiClass.parse(cls)
    if cls is BianchiClass.Euclidean3:
        raise ParameterError("tau is not defined for the flat class")
    if traj.cls is not cls:
        raise ClassMismatchError(f"trajectory is {traj.cls.name}, expected {cls.name}")
    convention = Convention.parse(convention)

    preds = _class_predicates(traj, convention, with_relaxations)
    starts, margins = [], []
    for pred in preds:
        margin, ok = _holds(pred, tol)
        start = _suffix_start(ok)
        if start >= ok.size:
            raise NoTauError(
                f"{cls.name}: predicate '{pred.name}' fails at t_end={traj.t_end}",
                longest_suffix_start=None,
            )
        starts.append(start)
        margins.append(margin)
    i_tau = max(starts)
    records = tuple(
        PredicateRecord(p.name, float(traj.t[s]), float(np.min(m[i_tau:])))
        for p, s, m in zip(preds, starts, margins)
    )
    return TauCertificate(float(traj.t[i_tau]), i_tau, records, True)


# -- lemma verification -------------------------------------------------------------


class LemmaId(enum.Enum):
    L4_1 = BianchiClass.SU2
    L5_1 = BianchiClass.SL2R
    L7_1 = BianchiClass.E11
    L8_1 = BianchiClass.E2

    @classmethod
    def for_class(cls, bianchi) -> LemmaId | None:
        bianchi = BianchiClass.parse(bianchi)
        for member in cls:
            if member.value is bianchi:
                return member
        return None


class ClauseResult(NamedTuple):
    claim: str
    worst_slack: float
    worst_time: float
    passed: bool


@dataclass(frozen=True)
class LemmaReport:
    lemma_id: LemmaId
    clauses: tuple[ClauseResult, ...]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failed(self) -> list[ClauseResult]:
        return [c for c in self.clauses if not c.passed]


class _Clauses:
    def __init__(self, tolerance):
        self.tolerance = tolerance
        self.items = []

    def add(self, claim, t, slack):
        t = np.atleast_1d(t)
        slack = np.atleast_1d(np.asarray(slack, dtype=float))
        i = int(np.argmin(slack))
        worst = float(slack[i])
        self.items.append(ClauseResult(claim, worst, float(t[i]), worst >= -self.tolerance))


def verify_lemma(lemma_id, traj: FlowTrajectory, tolerance: float = 1e-8,
                 convergence_tol: float = 1e-6) -> LemmaReport:
    """Evaluate every quantitative clause of a lemma on the sample grid.

    Slack is ``bound - quantity`` oriented so that nonnegative means satisfied.
    Limit statements are checked at ``t_end`` against ``convergence_tol``.
    """
    lemma_id = lemma_id if isinstance(lemma_id, LemmaId) else LemmaId[lemma_id]
    if traj.cls is not lemma_id.value:
        raise ClassMismatchError(
            f"{lemma_id.name} concerns {lemma_id.value.name}, trajectory is {traj.cls.name}"
        )
    t = traj.t
    s = t - t[0]
    a, b, c = traj.y
    a0, b0, c0 = traj.y[:, 0]
    out = _Clauses(tolerance)

    if lemma_id is LemmaId.L4_1:
        if not a0 >= b0 >= c0:
            raise PreconditionError("L4_1 assumes A0 >= B0 >= C0")
        out.add("(1) A >= B", t, a - b)
        out.add("(1) B >= C", t, b - c)
        out.add("(1) A - C <= (A0 - C0) exp(-2 C0^2 t)",
                t, (a0 - c0) * np.exp(-2 * c0**2 * s) - (a - c))
        out.add("(2) (A, B, C) -> (1, 1, 1)",
                t[-1], convergence_tol - np.max(np.abs(traj.y[:, -1] - 1.0)))

    elif lemma_id is LemmaId.L5_1:
        if not b0 >= c0:
            raise PreconditionError("L5_1 assumes B0 >= C0")
        grow = c0 + 2.0 / 3.0 * s
        out.add("(1) B >= C", t, b - c)
        out.add("(2) B >= C0 + 2t/3", t, b - grow)
        out.add("(2) C >= C0 + 2t/3", t, c - grow)
        out.add("(2) A <= (C0 + 2t/3)^-2", t, grow**-2 - a)
        gap = b - a
        start = _suffix_start(gap >= -tolerance)
        if start >= gap.size:
            out.add("(3) A <= B for all t >= tau", t[-1], gap[-1])
        else:
            bt, ct, tt = b[start], c[start], s[start]
            k = 10.0 / 3.0 * ct**2
            out.add("(3) A <= B for all t >= tau", t[start:], gap[start:])
            out.add("(3) B - C <= (B_tau - C_tau) exp(-k (t - tau))", t[start:],
                    (bt - ct) * np.exp(-k * (s[start:] - tt)) - (b - c)[start:])
            out.add("(3) B <= B_tau + 4(t - tau)/3", t[start:],
                    bt + 4.0 / 3.0 * (s[start:] - tt) - b[start:])

    elif lemma_id is LemmaId.L7_1:
        if not a0 >= b0:
            raise PreconditionError("L7_1 assumes A0 >= B0")
        fa = 1 + 8.0 / 3.0 * a0**2 * s
        fb = 1 + 8.0 / 3.0 * b0**2 * s
        out.add("(1) B >= B0 (1 + 8/3 A0^2 t)^-1/2", t, b - b0 * fa**-0.5)
        out.add("(1) A >= B", t, a - b)
        out.add("(1) A <= A0 (1 + 8/3 A0^2 t)^-1/2", t, a0 * fa**-0.5 - a)
        out.add("(1) C >= C0 + 4t/3", t, c - (c0 + 4.0 / 3.0 * s))
        out.add("(1) C <= C0 + 8/3 (A0/B0) t", t, c0 + 8.0 / 3.0 * (a0 / b0) * s - c)
        out.add("(2) A - B >= (A0 - B0)(1 + 8/3 A0^2 t)^-2", t, (a - b) - (a0 - b0) * fa**-2)
        out.add("(2) A - B <= (A0 - B0)(1 + 8/3 B0^2 t)^-2", t, (a0 - b0) * fb**-2 - (a - b))
        out.add("(2) A + B >= (A0 + B0)(1 + 8/3 A0^2 t)^-1", t, (a + b) - (a0 + b0) / fa)
        out.add("(2) A + B <= (A0 + B0)(1 + 8/3 B0^2 t)^-1", t, (a0 + b0) / fb - (a + b))

    elif lemma_id is LemmaId.L8_1:
        if not a0 >= b0:
            raise PreconditionError("L8_1 assumes A0 >= B0")
        out.add("(1) A >= B", t, a - b)
        out.add("(1) A >= B0", t, a - b0)
        out.add("(1) A <= A0", t, a0 - a)
        out.add("(1) B >= B0", t, b - b0)
        out.add("(1) B <= A0", t, a0 - b)
        out.add("(1) C >= C0", t, c - c0)
        out.add("(1) C <= C0 A0 / B0", t, c0 * a0 / b0 - c)
        out.add("(2) A - B <= (A0 - B0) exp(-4 B0^2 t)",
                t, (a0 - b0) * np.exp(-4 * b0**2 * s) - (a - b))
        _, rho, _ = traj.curvature()
        out.add("flat limit: max |Ric eigenvalue| at t_end",
                t[-1], convergence_tol - np.max(np.abs(rho[:, -1])))

    return LemmaReport(lemma_id, tuple(out.items), tolerance)


# -- monotonicity -------------------------------------------------------------------


class Direction(enum.Enum):
    NonDecreasing = "nondecreasing"
    NonIncreasing = "nonincreasing"


class MonotoneResult(NamedTuple):
    passed: bool
    first_violation: float | None


def check_monotone(series, direction, rel_slack: float = 1e-8) -> MonotoneResult:
    """Compare consecutive samples, allowing a drop (or rise) of ``rel_slack * |x_i|``."""
    if isinstance(series, Series):
        t, x = series.t, series.values
    else:
        t, x = (np.asarray(v, dtype=float) for v in series)
    direction = direction if isinstance(direction, Direction) else Direction[direction]
    if x.size < 2:
        raise DegenerateInputError("need at least two samples to check monotonicity")
    step = np.diff(x)
    if direction is Direction.NonIncreasing:
        step = -step
    bad = np.flatnonzero(step < -rel_slack * np.abs(x[:-1]))
    if bad.size == 0:
        return MonotoneResult(True, None)
    return MonotoneResult(False, float(t[bad[0] + 1]))
