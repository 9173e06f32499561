"""Bianchi classes, diagonal Ricci curvature and the normalized Ricci flow vector field.

Every left-invariant metric on a Bianchi-class group admits a Milnor frame
``X1, X2, X3`` in which both the metric and its Ricci tensor are diagonal::

    g = a (theta^1)^2 + b (theta^2)^2 + c (theta^3)^2

The curvature formulas below are pointwise in ``(a, b, c)``; they are written for
volume-normalized metrics but are evaluated at any positive state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "BianchiClass",
    "MetricState",
    "CurvatureData",
    "structure_constants",
    "ricci_components",
    "flow_rhs",
    "ricci_diagonal",
    "vector_field",
]


class BianchiClass(enum.Enum):
    """The six Bianchi geometries with Milnor-frame structure constants.

    The value triple ``(e1, e2, e3)`` encodes ``[X2,X3] = e1 X1``,
    ``[X3,X1] = e2 X2`` and ``[X1,X2] = e3 X3``.
    """

    Euclidean3 = (0, 0, 0)
    SU2 = (1, 1, 1)
    SL2R = (-1, 1, 1)
    Heisenberg = (1, 0, 0)
    E11 = (-1, 1, 0)
    E2 = (1, 1, 0)

    @classmethod
    def parse(cls, name: str | BianchiClass) -> BianchiClass:
        """Look up a class by (case-insensitive) name or alias."""
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("(", "").replace(")", "").replace(",", "")
        key = key.replace("_", "").replace("-", "").replace(" ", "")
        try:
            return _ALIASES[key]
        except KeyError:
            raise ValueError(
                f"unknown Bianchi class {name!r}; accepted names: {', '.join(ACCEPTED_NAMES)}"
            ) from None

    @property
    def slug(self) -> str:
        return self.name.lower()


_ALIASES = {
    "euclidean3": BianchiClass.Euclidean3,
    "r3": BianchiClass.Euclidean3,
    "su2": BianchiClass.SU2,
    "sl2r": BianchiClass.SL2R,
    "heisenberg": BianchiClass.Heisenberg,
    "e11": BianchiClass.E11,
    "e2": BianchiClass.E2,
}

ACCEPTED_NAMES = ("euclidean3", "su2", "sl2r", "heisenberg", "e11", "e2")


@dataclass(frozen=True)
class MetricState:
    """Diagonal metric coefficients ``(a, b, c)`` at flow time ``t``."""

    a: float
    b: float
    c: float
    t: float = 0.0

    def __post_init__(self):
        for field in ("a", "b", "c"):
            value = getattr(self, field)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(field, value)

    @classmethod
    def from_array(cls, y, t=0.0) -> MetricState:
        a, b, c = (float(v) for v in y)
        return cls(a, b, c, float(t))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    @property
    def volume(self) -> float:
        return self.a * self.b * self.c

    def normalized(self) -> MetricState:
        """Rescale to unit volume, ``(a, b, c) / (abc)^(1/3)``."""
        s = np.cbrt(self.volume)
        return MetricState(self.a / s, self.b / s, self.c / s, self.t)


@dataclass(frozen=True)
class CurvatureData:
    """Lower-index diagonal Ricci components, scalar curvature and Ricci eigenvalues."""

    r11: float
    r22: float
    r33: float
    scalar: float
    rho1: float
    rho2: float
    rho3: float

    @property
    def components(self) -> tuple[float, float, float]:
        return (self.r11, self.r22, self.r33)

    @property
    def eigenvalues(self) -> tuple[float, float, float]:
        return (self.rho1, self.rho2, self.rho3)


def structure_constants(cls: BianchiClass) -> tuple[int, int, int]:
    return BianchiClass.parse(cls).value


def ricci_diagonal(cls: BianchiClass, a, b, c):
    """Diagonal Ricci components ``(r11, r22, r33)``; accepts scalars or arrays."""
    if cls is BianchiClass.SU2:
        return (
            0.5 * a * (a * a - (b - c) ** 2),
            0.5 * b * (b * b - (a - c) ** 2),
            0.5 * c * (c * c - (a - b) ** 2),
        )
    if cls is BianchiClass.SL2R:
        return (
            0.5 * a * (a * a - (b - c) ** 2),
            0.5 * b * (b * b - (a + c) ** 2),
            0.5 * c * (c * c - (a + b) ** 2),
        )
    if cls is BianchiClass.Heisenberg:
        return (0.5 * a**3, -0.5 * a * a * b, -0.5 * a * a * c)
    if cls is BianchiClass.E11:
        return (
            0.5 * a * (a * a - b * b),
            0.5 * b * (b * b - a * a),
            -0.5 * c * (a + b) ** 2,
        )
    if cls is BianchiClass.E2:
        return (
            0.5 * a * (a * a - b * b),
            0.5 * b * (b * b - a * a),
            -0.5 * c * (a - b) ** 2,
        )
    zero = 0.0 * (a + b + c)
    return (zero, zero, zero)


def ricci_components(cls: BianchiClass, state: MetricState) -> CurvatureData:
    cls = BianchiClass.parse(cls)
    a, b, c = state.a, state.b, state.c
    r11, r22, r33 = (float(r) for r in ricci_diagonal(cls, a, b, c))
    rho1, rho2, rho3 = r11 / a, r22 / b, r33 / c
    return CurvatureData(r11, r22, r33, rho1 + rho2 + rho3, rho1, rho2, rho3)


def vector_field(cls: BianchiClass, a, b, c):
    """Per-class normalized Ricci flow right-hand side, in the hand-simplified form.

    Kept separate from the generic ``-2 Ric + (2/3) R g`` expression so the two can
    be checked against each other.
    """
    if cls is BianchiClass.SU2:
        return (
            2.0 / 3.0 * a * (-a * (2 * a - b - c) + (b - c) ** 2),
            2.0 / 3.0 * b * (-b * (2 * b - a - c) + (a - c) ** 2),
            2.0 / 3.0 * c * (-c * (2 * c - a - b) + (a - b) ** 2),
        )
    if cls is BianchiClass.SL2R:
        return (
            2.0 / 3.0 * (-a * a * (2 * a + b + c) + a * (b - c) ** 2),
            2.0 / 3.0 * (-b * b * (2 * b + a - c) + b * (a + c) ** 2),
            2.0 / 3.0 * (-c * c * (2 * c + a - b) + c * (a + b) ** 2),
        )
    if cls is BianchiClass.Heisenberg:
        return (-4.0 / 3.0 * a**3, 2.0 / 3.0 * a * a * b, 2.0 / 3.0 * a * a * c)
    if cls is BianchiClass.E11:
        return (
            2.0 / 3.0 * (-2 * a**3 - a * b * (a - b)),
            2.0 / 3.0 * (-2 * b**3 + a * b * (a - b)),
            2.0 / 3.0 * c * (a + b) ** 2,
        )
    if cls is BianchiClass.E2:
        return (
            -2.0 / 3.0 * a * (2 * a + b) * (a - b),
            2.0 / 3.0 * b * (2 * b + a) * (a - b),
            2.0 / 3.0 * c * (a - b) ** 2,
        )
    zero = 0.0 * (a + b + c)
    return (zero, zero, zero)


def flow_rhs(cls: BianchiClass, state: MetricState) -> tuple[float, float, float]:
    """``(da/dt, db/dt, dc/dt)`` under the volume-normalized Ricci flow."""
    cls = BianchiClass.parse(cls)
    return tuple(float(v) for v in vector_field(cls, state.a, state.b, state.c))
