"""Optical elements and the single-photon Mach-Zehnder preparation/measurement chain.

Layout modelled: horizontally polarized photon -> HWP1 -> PBS (h to path a,
v to path b) -> HWP2 in path b -> delay stage -> BS2 -> one monitored APD.
All operators act on the 4-dim space ordered ``|a,h>, |a,v>, |b,h>, |b,v>``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import PAULI_I, tensor
from .states import PreparationParams, PureState, prepare_state

PATHS = ("a", "b")
POLARIZATIONS = ("h", "v")

# Intensity at the monitored port is 1/2 (1 + V cos(xi + FRINGE_OFFSET)) under
# the symmetric (i-on-reflection) beamsplitter convention.
FRINGE_OFFSET = math.pi / 2

_PATH_PROJ = {
    "a": np.diag([1.0, 0.0]).astype(np.complex128),
    "b": np.diag([0.0, 1.0]).astype(np.complex128),
}


def _path_index(path: str) -> int:
    if path not in PATHS:
        raise ValueError(f"path must be one of {PATHS}, got {path!r}")
    return PATHS.index(path)


def hwp_jones(angle: float) -> np.ndarray:
    """Half-wave plate Jones matrix with fast axis at ``angle`` from horizontal."""
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


@dataclass(frozen=True)
class HWP:
    angle: float
    acts_on: str = "both"

    def unitary(self) -> np.ndarray:
        j = hwp_jones(self.angle)
        if self.acts_on == "both":
            return tensor(PAULI_I, j)
        p = _PATH_PROJ[PATHS[_path_index(self.acts_on)]]
        return tensor(p, j) + tensor(PAULI_I - p, PAULI_I)


@dataclass(frozen=True)
class PBS:
    """Transmits h (stays in its path), reflects v (swaps path)."""

    def unitary(self) -> np.ndarray:
        u = np.zeros((4, 4), dtype=np.complex128)
        u[0, 0] = 1  # a,h -> a,h
        u[3, 1] = 1  # a,v -> b,v
        u[2, 2] = 1  # b,h -> b,h
        u[1, 3] = 1  # b,v -> a,v
        return u


@dataclass(frozen=True)
class BS50:
    """Symmetric 50/50 beamsplitter: a -> (a + i b)/sqrt2, b -> (i a + b)/sqrt2."""

    def unitary(self) -> np.ndarray:
        b = np.array([[1, 1j], [1j, 1]], dtype=np.complex128) / math.sqrt(2)
        return tensor(b, PAULI_I)


@dataclass(frozen=True)
class PhaseDelay:
    """Phase ``e^{i xi}`` on one path, optionally on one polarization only."""

    xi: float
    acts_on: str = "a"
    polarization: Optional[str] = None

    def unitary(self) -> np.ndarray:
        k = _path_index(self.acts_on)
        pols = POLARIZATIONS if self.polarization is None else (self.polarization,)
        diag = np.ones(4, dtype=np.complex128)
        for pol in pols:
            if pol not in POLARIZATIONS:
                raise ValueError(f"polarization must be one of {POLARIZATIONS}, got {pol!r}")
            diag[2 * k + POLARIZATIONS.index(pol)] = np.exp(1j * self.xi)
        return np.diag(diag)


def element_unitary(element) -> np.ndarray:
    """4x4 unitary action of an optical element."""
    return element.unitary()


def apply(elements: Sequence, state) -> np.ndarray:
    v = np.asarray(state, dtype=np.complex128)
    for e in elements:
        v = e.unitary() @ v
    return v


def waveplate_angles(p: PreparationParams) -> tuple[float, float]:
    """HWP1 and HWP2 settings that realize ``p`` (R <= 1 needs hwp1 <= pi/8)."""
    return 0.5 * math.atan(p.R), math.pi / 4 + p.theta / 2


def params_from_waveplates(hwp1: float, hwp2: float, xi: float = 0.0) -> PreparationParams:
    """Parameters produced by the waveplate settings.

    Exact for ``hwp1`` in ``[0, pi/4]`` and ``hwp2`` in ``[pi/4, pi/2]``; other
    settings flip amplitude signs and reach the same (R, theta) only up to a
    local phase.
    """
    theta = abs(math.asin(max(-1.0, min(1.0, -math.cos(2 * hwp2)))))
    return PreparationParams(R=abs(math.tan(2 * hwp1)), theta=theta, xi=xi)


def preparation_elements(hwp1: float, hwp2: float, xi: float) -> list:
    return [
        HWP(hwp1, acts_on="both"),
        PBS(),
        HWP(hwp2, acts_on="b"),
        # the fringe phase rides on the path-b component that can interfere with path a
        PhaseDelay(xi, acts_on="b", polarization="h"),
    ]


def run_preparation(hwp1: float, hwp2: float, xi: float = 0.0) -> PureState:
    """Propagate ``|a,h>`` through HWP1, PBS, HWP2 and the delay stage."""
    v = apply(preparation_elements(hwp1, hwp2, xi), np.array([1, 0, 0, 0], dtype=np.complex128))
    return PureState(v / np.linalg.norm(v))


def port_probability(state, port: str = "a") -> float:
    """Detection probability at one BS2 output port (polarization-blind)."""
    out = BS50().unitary() @ np.asarray(state, dtype=np.complex128)
    k = _path_index(port)
    return float(np.sum(np.abs(out[2 * k : 2 * k + 2]) ** 2))


@dataclass
class FringeScan:
    """Detector response versus delay phase.

    ``intensities`` holds probabilities for a noiseless scan; when
    ``mean_counts`` is set it holds Poisson counts instead.
    """

    phases: np.ndarray
    intensities: np.ndarray
    mean_counts: Optional[int] = None
    params: Optional[PreparationParams] = field(default=None, repr=False)

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        self.intensities = np.asarray(self.intensities)
        if self.phases.shape != self.intensities.shape or self.phases.ndim != 1:
            raise ValueError("phases and intensities must be 1-d arrays of equal length")
        if self.mean_counts is None and np.any((self.intensities < 0) | (self.intensities > 1 + 1e-12)):
            raise ValueError("noiseless intensities must lie in [0, 1]")
        if self.mean_counts is not None and np.any(self.intensities < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def noisy(self) -> bool:
        return self.mean_counts is not None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "counts" if self.noisy else "intensity"])
        for x, y in zip(self.phases, self.intensities):
            w.writerow([repr(float(x)), int(y) if self.noisy else repr(float(y))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FringeScan":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if header[0] != "xi" or header[1] not in ("intensity", "counts"):
            raise ValueError(f"unexpected fringe CSV header {header}")
        phases = [float(r[0]) for r in body]
        if header[1] == "counts":
            counts = np.array([int(r[1]) for r in body])
            return cls(phases, counts, mean_counts=int(counts.mean()) if len(counts) else 0)
        return cls(phases, [float(r[1]) for r in body])


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def fringe_scan(p: PreparationParams, phase_grid, mean_counts: Optional[int] = None,
                seed=None) -> FringeScan:
    """Scan the delay phase and record the monitored-port response.

    Each grid point re-prepares the state with ``xi`` replaced by the grid
    value and propagates it through BS2.
    """
    phases = np.asarray(phase_grid, dtype=float)
    if phases.ndim != 1 or phases.size == 0:
        raise ValueError("phase grid must be a nonempty 1-d sequence")
    if np.any(np.diff(phases) < 0):
        raise ValueError("phase grid must be sorted")
    probs = np.array([
        port_probability(prepare_state(PreparationParams(p.R, p.theta, x)))
        for x in phases
    ])
    probs = np.clip(probs, 0.0, 1.0)
    if mean_counts is None:
        return FringeScan(phases, probs, params=p)
    counts = _rng(seed).poisson(mean_counts * probs)
    return FringeScan(phases, counts, mean_counts=int(mean_counts), params=p)


def block_path(p: PreparationParams, blocked: str, mean_counts: Optional[int] = None, seed=None):
    """Monitored-port response with one interferometer arm blocked.

    Returns the detection probability, or a Poisson count with mean
    ``mean_counts * probability`` when ``mean_counts`` is given.
    """
    k = _path_index(blocked)
    keep = np.ones(4)
    keep[2 * k : 2 * k + 2] = 0.0
    prob = port_probability(prepare_state(p).amplitudes * keep)
    if mean_counts is None:
        return prob
    return int(_rng(seed).poisson(mean_counts * prob))


def phase_grid(start: float = 0.0, stop: float = 2 * math.pi, steps: int = 64) -> np.ndarray:
    """Evenly spaced phases on ``[start, stop)``."""
    if steps < 2:
        raise ValueError("phase grid needs at least 2 steps")
    return np.linspace(start, stop, steps, endpoint=False)
