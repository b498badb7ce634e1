"""Target points on the VDC sphere octant and their preparation parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .metrics import VDCTriple, identity_residual, vdc_closed_form
from .states import PreparationParams, PureState

SPHERE_TOL = 1e-9

_R2 = 1 / math.sqrt(2)
_R3 = 1 / math.sqrt(3)

# Measured (V, D, C) for the seven prepared photon states, in row order.
TABLE1_REPORTED = (
    (0.992, 0.009, 0.003),
    (0.719, 0.680, 0.012),
    (0.068, 0.994, 0.008),
    (0.048, 0.708, 0.703),
    (0.058, 0.011, 0.991),
    (0.720, 0.011, 0.691),
    (0.587, 0.568, 0.570),
)
# Reported SUM uncertainties for the same rows.
TABLE1_SUM_ERROR = (0.014, 0.054, 0.060, 0.084, 0.040, 0.070, 0.070)

# Ideal grid nodes matched to the measured rows above (nearest node per row).
_TABLE1_IDEAL = (
    (1.0, 0.0, 0.0),
    (_R2, _R2, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, _R2, _R2),
    (0.0, 0.0, 1.0),
    (_R2, 0.0, _R2),
    (_R3, _R3, _R3),
)


@dataclass(frozen=True)
class TargetPoint:
    triple: VDCTriple
    name: Optional[str] = None

    def __post_init__(self):
        res = identity_residual(self.triple)
        if abs(res) > SPHERE_TOL:
            raise ValueError(f"target {self.name or self.triple} is off the VDC sphere (residual {res:.3e})")

    @classmethod
    def of(cls, V: float, D: float, C: float, name: Optional[str] = None) -> "TargetPoint":
        return cls(VDCTriple(V, D, C), name)


def solve_params(t: TargetPoint | VDCTriple) -> PreparationParams:
    """Preparation parameters (R <= 1, xi = 0) reproducing a target triple.

    ``theta = atan2(C, V)`` and ``R = sqrt(V^2 + C^2) / (1 + D)``, which on the
    sphere equals ``sqrt((1 - D) / (1 + D))`` but stays accurate near the
    ``D = 1`` corner. At that corner theta is unconstrained and set to 0.
    """
    if isinstance(t, VDCTriple):
        t = TargetPoint(t)
    V, D, C = t.triple.as_tuple()
    R = min(math.hypot(V, C) / (1.0 + D), 1.0)
    theta = math.atan2(C, V) if (V > 0 or C > 0) else 0.0
    return PreparationParams(R=R, theta=theta, xi=0.0)


def table1_targets() -> list[TargetPoint]:
    return [TargetPoint.of(*vdc, name=f"state-{i}") for i, vdc in enumerate(_TABLE1_IDEAL, start=1)]


def equal_coherence_state() -> PureState:
    """The state with V = D = C = 1/sqrt(3)."""
    s3 = math.sqrt(3)
    return PureState(np.array([
        math.sqrt((3 + s3) / 6),
        0.0,
        math.sqrt((3 - s3) / 12),
        math.sqrt((3 - s3) / 12),
    ], dtype=np.complex128))


NAMED_TARGETS = {
    "center": (_R3, _R3, _R3),
    "wave": (1.0, 0.0, 0.0),
    "particle": (0.0, 1.0, 0.0),
    "entangled": (0.0, 0.0, 1.0),
    **{f"state-{i}": vdc for i, vdc in enumerate(_TABLE1_IDEAL, start=1)},
}


def named_target(name: str) -> TargetPoint:
    try:
        return TargetPoint.of(*NAMED_TARGETS[name], name=name)
    except KeyError:
        raise ValueError(f"unknown target {name!r}; choose from {sorted(NAMED_TARGETS)}") from None


def sphere_points(n: int) -> list[TargetPoint]:
    """Fibonacci-spiral sample of ``n`` points on the positive octant.

    ``n = 1`` returns the center point ``V = D = C``.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if n == 1:
        return [named_target("center")]
    frac = (math.sqrt(5) - 1) / 2
    pts = []
    for i in range(n):
        d = 1 - (i + 0.5) / n
        r = math.sqrt(max(0.0, 1 - d * d))
        phi = ((i * frac) % 1.0) * math.pi / 2
        pts.append(TargetPoint.of(r * math.cos(phi), d, r * math.sin(phi), name=f"sample-{i}"))
    return pts


def target_record(t: TargetPoint) -> dict:
    p = solve_params(t)
    return {"name": t.name, "V": t.triple.V, "D": t.triple.D, "C": t.triple.C, "R": p.R, "theta": p.theta}


def roundtrip_error(t: TargetPoint) -> float:
    """Componentwise max error of the closed form evaluated at ``solve_params(t)``."""
    back = vdc_closed_form(solve_params(t))
    return max(abs(a - b) for a, b in zip(back.as_tuple(), t.triple.as_tuple()))
