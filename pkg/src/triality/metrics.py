"""Visibility, distinguishability and concurrence, by closed form and by measurement.

The closed forms follow the two-beam parametrization by amplitude ratio ``R``
and polarization angle ``theta``; the operational routes estimate the same
quantities from simulated fringe scans, blocked-path counts and density
matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_unit_norm
from .linalg import PAULI_Y, psd_factor
from .optics import FringeScan
from .states import PreparationParams, PureState, as_density, gamma_overlap

_RANGE_SLACK = 1e-9


def _unit_interval(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x < -_RANGE_SLACK or x > 1 + _RANGE_SLACK:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return min(max(x, 0.0), 1.0)


@dataclass(frozen=True)
class VDCTriple:
    V: float
    D: float
    C: float

    def __post_init__(self):
        for name in ("V", "D", "C"):
            object.__setattr__(self, name, _unit_interval(getattr(self, name), name))

    @property
    def sum(self) -> float:
        """``V^2 + D^2 + C^2``."""
        return self.V**2 + self.D**2 + self.C**2

    @property
    def duality(self) -> float:
        """``V^2 + D^2``."""
        return self.V**2 + self.D**2

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.V, self.D, self.C)

    def to_dict(self) -> dict:
        return {"V": self.V, "D": self.D, "C": self.C, "sum": self.sum}

    @classmethod
    def from_dict(cls, d: dict) -> "VDCTriple":
        return cls(d["V"], d["D"], d["C"])


def vdc_closed_form(p: PreparationParams) -> VDCTriple:
    R = p.R
    denom = 1.0 + R * R
    return VDCTriple(
        V=2 * R * abs(math.cos(p.theta)) / denom,
        D=abs((1 - R * R) / denom),
        C=2 * R * abs(math.sin(p.theta)) / denom,
    )


def identity_residual(t: VDCTriple) -> float:
    """Signed ``V^2 + D^2 + C^2 - 1``."""
    return t.V**2 + t.D**2 + t.C**2 - 1.0


def duality_holds(t: VDCTriple, tol: float = 1e-12) -> bool:
    """Whether the wave-particle inequality ``V^2 + D^2 <= 1`` holds."""
    return t.V**2 + t.D**2 <= 1.0 + tol


def duality_gap(p: PreparationParams) -> float:
    """``4 |c_a c_b|^2 (1 - |gamma|^2)``, the shortfall of ``V^2 + D^2`` below 1."""
    return 4 * (p.c_a * p.c_b) ** 2 * (1 - abs(gamma_overlap(p)) ** 2)


class FringeFit(BaseEstimator):
    """Least-squares sinusoid fit ``I(xi) = A + B cos(xi + phi)``.

    Parameters
    ----------
    min_span : float
        Minimum phase coverage the scan must reach, in radians; one grid
        step is credited to the measured span so ``[0, 2 pi)`` grids pass.

    Attributes
    ----------
    offset_, amplitude_, phase_ : float
        Fitted ``A``, ``|B|`` and ``phi``.
    visibility_ : float
        ``|B| / A`` clipped to ``[0, 1]``.
    visibility_raw_ : float
        The unclipped ratio.
    """

    def __init__(self, min_span: float = 2 * math.pi):
        self.min_span = min_span

    def fit(self, phases, intensities):
        x = np.asarray(phases, dtype=float)
        y = np.asarray(intensities, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("phases and intensities must be 1-d arrays of equal length")
        if x.size < 3:
            raise ValueError(f"sinusoid fit needs at least 3 points, got {x.size}")
        step = np.median(np.diff(x)) if x.size > 1 else 0.0
        span = float(np.ptp(x) + step)
        if span < self.min_span * (1 - 1e-9):
            raise ValueError(f"scan covers {span:.4f} rad, less than one period ({self.min_span:.4f})")
        design = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
        (a, bc, bs), *_ = np.linalg.lstsq(design, y, rcond=None)
        if a <= 0:
            raise ValueError(f"degenerate fringe fit: mean level {a!r} is not positive")
        # bc cos x + bs sin x = B cos(x + phi) with B = hypot, phi = atan2(-bs, bc)
        self.offset_ = float(a)
        self.amplitude_ = float(math.hypot(bc, bs))
        self.phase_ = float(math.atan2(-bs, bc))
        self.visibility_raw_ = self.amplitude_ / self.offset_
        self.visibility_ = min(self.visibility_raw_, 1.0)
        return self

    def predict(self, phases):
        if not hasattr(self, "offset_"):
            raise NotFittedError("FringeFit is not fitted yet")
        x = np.asarray(phases, dtype=float)
        return self.offset_ + self.amplitude_ * np.cos(x + self.phase_)


def visibility_from_scan(scan: FringeScan) -> float:
    return FringeFit().fit(scan.phases, scan.intensities).visibility_


def distinguishability_from_blocking(pa: float, pb: float) -> float:
    """``|pa - pb| / (pa + pb)`` from the two single-arm detection rates."""
    pa, pb = float(pa), float(pb)
    if pa < 0 or pb < 0:
        raise ValueError(f"blocked-path rates must be nonnegative, got {pa}, {pb}")
    total = pa + pb
    if total <= 0:
        raise ValueError("blocked-path rates sum to zero; distinguishability undefined")
    return abs(pa - pb) / total


def concurrence_pure(s) -> float:
    """``2 |ad - bc|`` for amplitudes ``(a, b, c, d)`` in canonical order."""
    v = s.amplitudes if isinstance(s, PureState) else check_unit_norm(s)
    if v.shape != (4,):
        raise ValueError(f"pure-state concurrence needs 4 amplitudes, got {v.shape}")
    return min(1.0, 2 * abs(v[0] * v[3] - v[1] * v[2]))


_SPIN_FLIP = np.kron(PAULI_Y, PAULI_Y)


def wootters_raw(rho) -> float:
    """Concurrence before the ``max(0, .)`` clamp; can be negative for noisy input."""
    m = as_density(rho)
    # with rho = A A^H, sqrt of the eigenvalues of rho rho~ are the singular
    # values of A^H (Y x Y) A*, which avoids square roots of rounding noise
    a = psd_factor(m)
    s = np.linalg.svd(a.conj().T @ _SPIN_FLIP @ a.conj(), compute_uv=False)
    return float(s[0] - s[1:].sum())


def concurrence_wootters(rho, clip: bool = True) -> float:
    c = wootters_raw(rho)
    return min(max(c, 0.0), 1.0) if clip else c
