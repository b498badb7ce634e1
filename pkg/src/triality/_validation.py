"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10


def as_complex_array(x, name: str = "array") -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_vector(x, dims=(2, 4), name: str = "vector") -> np.ndarray:
    v = as_complex_array(x, name)
    if v.ndim != 1 or v.shape[0] not in dims:
        raise ValueError(f"{name} must be 1-d with length in {dims}, got shape {v.shape}")
    return v


def check_square(x, dims=(2, 4), name: str = "matrix") -> np.ndarray:
    m = as_complex_array(x, name)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise ValueError(f"{name} must be square with size in {dims}, got shape {m.shape}")
    return m


def asymmetry(m: np.ndarray) -> float:
    """Max-norm distance between ``m`` and its adjoint."""
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(x, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    m = check_square(x, name=name)
    gap = asymmetry(m)
    if gap > tol:
        raise ValueError(f"{name} is not Hermitian: max |m - m^H| = {gap:.3e} > {tol:.1e}")
    return m


def check_unit_norm(x, tol: float = NORM_TOL, name: str = "state") -> np.ndarray:
    v = check_vector(x, name=name)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{name} is not normalized: norm = {norm!r}")
    return v


def check_density(x, name: str = "density matrix") -> np.ndarray:
    """Validate a 4x4 physical density matrix and return it as an array."""
    m = check_hermitian(x, name=name)
    if m.shape != (4, 4):
        raise ValueError(f"{name} must be 4x4, got {m.shape}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} has trace {tr!r}, expected 1")
    lam_min = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
    if lam_min < -PSD_TOL:
        raise ValueError(f"{name} is not positive semidefinite: min eigenvalue {lam_min:.3e}")
    return m
