"""Single-photon path (x) polarization pure states and their control parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_density, check_unit_norm

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PreparationParams:
    """Experiment control knobs.

    Attributes
    ----------
    R : float
        Amplitude ratio ``|c_b / c_a|`` (nonnegative, finite).
    theta : float
        Polarization angle of the path-b photon, radians in ``[0, pi/2]``.
    xi : float
        Relative phase set by the delay stage, radians in ``[0, 2 pi)``.
    """

    R: float
    theta: float
    xi: float = 0.0

    def __post_init__(self):
        R, theta, xi = float(self.R), float(self.theta), float(self.xi)
        if not math.isfinite(R) or R < 0:
            raise ValueError(f"R must be finite and nonnegative, got {self.R!r}")
        if not (0.0 <= theta <= math.pi / 2 + 1e-12):
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta!r}")
        if not math.isfinite(xi):
            raise ValueError(f"xi must be finite, got {self.xi!r}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "theta", min(theta, math.pi / 2))
        object.__setattr__(self, "xi", xi % TWO_PI)

    @property
    def c_a(self) -> float:
        return 1.0 / math.sqrt(1.0 + self.R**2)

    @property
    def c_b(self) -> float:
        return self.R / math.sqrt(1.0 + self.R**2)

    def to_dict(self) -> dict:
        return {"R": self.R, "theta": self.theta, "xi": self.xi}

    @classmethod
    def from_dict(cls, d: dict) -> "PreparationParams":
        return cls(R=d["R"], theta=d["theta"], xi=d.get("xi", 0.0))


def _pairs(arr: np.ndarray) -> list:
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _from_pairs(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm amplitude vector over ``|a,h>, |a,v>, |b,h>, |b,v>``."""

    amplitudes: np.ndarray = field(repr=True)

    def __post_init__(self):
        v = check_unit_norm(self.amplitudes, name="state amplitudes")
        if v.shape != (4,):
            raise ValueError(f"pure state needs 4 amplitudes, got {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_list(self) -> list:
        return _pairs(self.amplitudes)

    @classmethod
    def from_list(cls, data) -> "PureState":
        return cls(_from_pairs(data))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Physical 4x4 density operator (Hermitian, PSD, unit trace)."""

    op: np.ndarray

    def __post_init__(self):
        m = check_density(self.op).copy()
        m.setflags(write=False)
        object.__setattr__(self, "op", m)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.op, dtype=dtype)

    @property
    def purity(self) -> float:
        return float(np.trace(self.op @ self.op).real)

    def to_list(self) -> list:
        return _pairs(self.op)

    @classmethod
    def from_list(cls, data) -> "DensityMatrix":
        return cls(_from_pairs(data))


def prepare_state(p: PreparationParams) -> PureState:
    """State entering the combining beamsplitter.

    ``c_a |a,h> + c_b |b> (e^{i xi} cos(theta) |h> + sin(theta) |v>)`` with
    ``c_a`` real and nonnegative.
    """
    ca, cb = p.c_a, p.c_b
    amps = np.array(
        [ca, 0.0, cb * np.exp(1j * p.xi) * math.cos(p.theta), cb * math.sin(p.theta)],
        dtype=np.complex128,
    )
    # R = 0 leaves no path-b weight; renormalizing absorbs rounding from c_a, c_b
    return PureState(amps / np.linalg.norm(amps))


def gamma_overlap(p: PreparationParams) -> complex:
    """Overlap ``<s_a|s_b>`` of the two path polarization states."""
    return complex(math.cos(p.theta) * np.exp(1j * p.xi))


def density_of(s) -> DensityMatrix:
    """Projector ``|psi><psi|`` for a pure state or raw amplitude vector."""
    v = s.amplitudes if isinstance(s, PureState) else check_unit_norm(s)
    return DensityMatrix(np.outer(v, v.conj()))


def as_density(rho) -> np.ndarray:
    """Return the operator array of a :class:`DensityMatrix` or validated array."""
    if isinstance(rho, DensityMatrix):
        return np.asarray(rho.op)
    return check_density(rho)
