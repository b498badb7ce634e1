"""Small dense complex linear algebra on the path (x) polarization space.

Vectors and operators are plain ``numpy`` arrays of dtype ``complex128``.
The canonical basis order is ``|a,h>, |a,v>, |b,h>, |b,v>``: path is the
first tensor factor, polarization the second.
"""

from __future__ import annotations

import numpy as np

from ._validation import asymmetry, check_square, as_complex_array, HERMITIAN_TOL

BASIS_LABELS = ("a,h", "a,v", "b,h", "b,v")

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

_KEEP = {"path": 0, "polarization": 1, 0: 0, 1: 1}


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two 2-dimensional vectors or two 2x2 operators."""
    a = as_complex_array(a, "left operand")
    b = as_complex_array(b, "right operand")
    if a.ndim != b.ndim:
        raise ValueError(f"cannot tensor a {a.ndim}-d object with a {b.ndim}-d object")
    if a.ndim == 1:
        if a.shape != (2,) or b.shape != (2,):
            raise ValueError(f"tensor expects 2-dim vectors, got {a.shape} and {b.shape}")
    elif a.ndim == 2:
        if a.shape != (2, 2) or b.shape != (2, 2):
            raise ValueError(f"tensor expects 2x2 operators, got {a.shape} and {b.shape}")
    else:
        raise ValueError("tensor operands must be vectors or matrices")
    return np.kron(a, b)


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


def partial_trace(rho, keep="path") -> np.ndarray:
    """Reduce a 4x4 operator to the 2x2 operator on the ``keep`` subsystem.

    ``keep`` is ``"path"`` (trace out polarization) or ``"polarization"``
    (trace out path); ``0`` and ``1`` are accepted as aliases.
    """
    try:
        k = _KEEP[keep]
    except (KeyError, TypeError):
        raise ValueError(f"keep must be 'path' or 'polarization', got {keep!r}") from None
    m = check_square(rho, dims=(4,), name="rho")
    t = m.reshape(2, 2, 2, 2)  # (path, pol, path', pol')
    if k == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijik->jk", t)


def hermitian_eig(m, tol: float = HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with real eigenvalues sorted in
    descending order and eigenvectors as the matching columns.

    Raises
    ------
    ValueError
        If ``m`` departs from Hermitian by more than ``tol`` (max-norm).
    """
    m = check_square(m, name="matrix")
    gap = asymmetry(m)
    if gap > tol:
        raise ValueError(f"matrix is not Hermitian: asymmetry {gap:.3e} exceeds {tol:.1e}")
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


# eigenvalues below this (relative to the largest) are rounding noise
EIG_FLOOR = 16 * np.finfo(float).eps


def _psd_eig(m):
    vals, vecs = hermitian_eig(m)
    vals = np.where(vals > EIG_FLOOR * max(vals[0], 1e-300), vals, 0.0)
    return vals, vecs


def psd_factor(m) -> np.ndarray:
    """``A`` with ``m = A A^H`` for a PSD Hermitian ``m``; noise-level eigenvalues dropped."""
    vals, vecs = _psd_eig(m)
    return vecs * np.sqrt(vals)


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix."""
    vals, vecs = _psd_eig(m)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def project_psd(m) -> np.ndarray:
    """Clip negative eigenvalues of a Hermitian matrix and renormalize to unit trace."""
    vals, vecs = hermitian_eig(m)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        return np.eye(m.shape[0], dtype=np.complex128) / m.shape[0]
    return (vecs * (vals / total)) @ vecs.conj().T
