"""Simulated two-qubit (path x polarization) state tomography.

Sixteen product projectors over ``{H, V, D, R}`` on each qubit are measured
with Poisson counting. Reconstruction is either linear inversion of the
setting-to-probability map, or a maximum-likelihood fit over physical
density matrices ``rho = T^H T / tr(T^H T)`` with ``T`` lower triangular.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .linalg import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, project_psd, psd_factor
from .states import DensityMatrix, as_density

logger = logging.getLogger(__name__)

_SQ2 = 1 / math.sqrt(2)
SINGLE_QUBIT_STATES = {
    "H": np.array([1, 0], dtype=np.complex128),
    "V": np.array([0, 1], dtype=np.complex128),
    "D": np.array([_SQ2, _SQ2], dtype=np.complex128),
    "R": np.array([_SQ2, 1j * _SQ2], dtype=np.complex128),
}


@dataclass(frozen=True, eq=False)
class MeasurementSetting:
    """Rank-1 product projector; ``label`` names the path then polarization state."""

    label: str
    projector: np.ndarray

    def probability(self, rho) -> float:
        return float(np.trace(self.projector @ np.asarray(rho)).real)


@dataclass(frozen=True)
class CountRecord:
    """Detector tally for one setting.

    ``counts`` is an integer for simulated draws; noiseless records carry
    the real-valued mean ``exposure * p`` instead.
    """

    setting: str
    counts: float
    exposure: float

    def __post_init__(self):
        if self.counts < 0:
            raise ValueError(f"counts must be nonnegative, got {self.counts!r}")
        if self.exposure <= 0:
            raise ValueError(f"exposure must be positive, got {self.exposure!r}")


def standard_settings() -> list[MeasurementSetting]:
    out = []
    for p, q in itertools.product("HVDR", repeat=2):
        v = np.kron(SINGLE_QUBIT_STATES[p], SINGLE_QUBIT_STATES[q])
        out.append(MeasurementSetting(p + q, np.outer(v, v.conj())))
    return out


_SETTINGS = standard_settings()
_LABELS = [s.label for s in _SETTINGS]
_PROJECTORS = np.stack([s.projector for s in _SETTINGS])
# tr(P_k M) = sum_ij P_k[j, i] M[i, j]: one matrix-vector product for all settings
_PROJ_T_FLAT = _PROJECTORS.transpose(0, 2, 1).reshape(16, 16)
_PROJ_FLAT = _PROJECTORS.reshape(16, 16)

# Hilbert-Schmidt orthonormal Hermitian basis sigma_m (x) sigma_n / 2
_PAULI_BASIS = np.stack([
    np.kron(a, b) / 2 for a, b in itertools.product((PAULI_I, PAULI_X, PAULI_Y, PAULI_Z), repeat=2)
])


def transfer_matrix() -> np.ndarray:
    """Real 16x16 map from Pauli-basis coordinates of rho to setting probabilities."""
    return np.einsum("kij,mji->km", _PROJECTORS, _PAULI_BASIS).real


_TRANSFER = transfer_matrix()
_TRANSFER_INV = np.linalg.inv(_TRANSFER)


def probabilities(rho) -> np.ndarray:
    """Ideal detection probability for every standard setting."""
    m = np.asarray(rho, dtype=np.complex128)
    return (_PROJ_T_FLAT @ m.ravel()).real


def simulate_counts(rho, exposure: int, seed=None) -> list[CountRecord]:
    """Poisson counts with mean ``exposure * tr(rho P)`` per setting."""
    m = as_density(rho)
    if exposure < 1:
        raise ValueError(f"exposure must be at least 1, got {exposure!r}")
    mean = exposure * np.clip(probabilities(m), 0.0, None)
    draws = np.random.default_rng(seed).poisson(mean)
    return [CountRecord(lab, int(n), exposure) for lab, n in zip(_LABELS, draws)]


def expected_counts(rho, exposure: float = 1.0) -> list[CountRecord]:
    """Noiseless records carrying exact mean counts."""
    m = as_density(rho)
    mean = exposure * np.clip(probabilities(m), 0.0, None)
    return [CountRecord(lab, float(n), exposure) for lab, n in zip(_LABELS, mean)]


def _arrange(records: Sequence[CountRecord]) -> tuple[np.ndarray, np.ndarray]:
    by_label = {}
    for r in records:
        if r.setting in by_label:
            raise ValueError(f"duplicate record for setting {r.setting!r}")
        by_label[r.setting] = r
    missing = [lab for lab in _LABELS if lab not in by_label]
    if missing:
        raise ValueError(f"missing tomography settings: {', '.join(missing)}")
    extra = sorted(set(by_label) - set(_LABELS))
    if extra:
        raise ValueError(f"unknown tomography settings: {', '.join(extra)}")
    counts = np.array([by_label[lab].counts for lab in _LABELS], dtype=float)
    exposure = np.array([by_label[lab].exposure for lab in _LABELS], dtype=float)
    return counts, exposure


def _linear_estimate(counts, exposure) -> np.ndarray:
    coords = _TRANSFER_INV @ (counts / exposure)
    rho = np.einsum("m,mij->ij", coords, _PAULI_BASIS)
    rho = (rho + rho.conj().T) / 2
    tr = np.trace(rho).real
    if tr <= 0:
        raise ValueError("linear inversion produced a non-positive trace")
    return rho / tr


def reconstruct_linear(records: Sequence[CountRecord]) -> np.ndarray:
    """Hermitian, unit-trace estimate; may have negative eigenvalues under noise."""
    counts, exposure = _arrange(records)
    return _linear_estimate(counts, exposure)


# ---------------------------------------------------------------------------
# maximum likelihood

_TRIL = np.tril_indices(4, -1)


_DIAG = np.diag_indices(4)


def _t_from_params(t: np.ndarray) -> np.ndarray:
    T = np.zeros((4, 4), dtype=np.complex128)
    T[_DIAG] = t[:4]
    T[_TRIL] = t[4:10] + 1j * t[10:16]
    return T


def _params_from_t(T: np.ndarray) -> np.ndarray:
    off = T[_TRIL]
    return np.concatenate([T.diagonal().real, off.real, off.imag])


def _cholesky_lower_factor(G: np.ndarray) -> np.ndarray:
    """Lower-triangular ``T`` with ``T^H T = G`` for positive definite ``G``."""
    J = np.eye(4)[::-1]
    L = np.linalg.cholesky(J @ G @ J)
    return (J @ L @ J).conj().T


def _loglik(counts, mu) -> float:
    """Poisson log-likelihood without the ``log n!`` terms."""
    pos = counts > 0
    if np.any(mu[pos] <= 0):
        return -np.inf
    return float(np.sum(counts[pos] * np.log(mu[pos])) - np.sum(mu))


def _relative_loglik(counts, mu) -> float:
    """Log-likelihood minus its saturated value; near zero at a good fit."""
    pos = counts > 0
    if np.any(mu[pos] <= 0):
        return -np.inf
    return float(np.sum(counts[pos] * np.log(mu[pos] / counts[pos])) - np.sum(mu - counts))


def _saturated(counts) -> float:
    pos = counts > 0
    return float(np.sum(counts[pos] * np.log(counts[pos])) - np.sum(counts))


def _objective(params, counts, exposure, total):
    """Per-count relative log-likelihood and its gradient in the Cholesky parameters.

    The gradient is ``None`` when the value is not finite.
    """
    Tm = _t_from_params(params)
    mu = exposure * probabilities(Tm.conj().T @ Tm)
    value = _relative_loglik(counts, mu) / total
    if not np.isfinite(value):
        return value, None
    ratio = np.where(counts > 0, counts / np.where(mu > 0, mu, 1.0), 0.0) - 1.0
    W = ((ratio * exposure) @ _PROJ_FLAT).reshape(4, 4) / total
    return value, _params_from_t(2 * Tm @ W)


@dataclass
class TomographyResult:
    """Reconstruction output plus optimizer diagnostics.

    ``loglik`` is the Poisson log-likelihood without the ``log n!`` constant.
    """

    density: DensityMatrix
    loglik: float
    iterations: int
    converged: bool
    gradient_norm: float
    warning: Optional[str] = None
    history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "rho": self.density.to_list(),
            "loglik": self.loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "warning": self.warning,
        }


class MaximumLikelihoodTomography(BaseEstimator):
    """Poisson maximum-likelihood state reconstruction.

    Ascent on the 16 real Cholesky parameters with a backtracking (Armijo)
    line search, warm-started from the linear-inversion estimate projected
    onto the PSD cone. Every accepted step increases the likelihood.

    Parameters
    ----------
    max_iter : int
        Iteration cap; hitting it flags the result as not converged.
    tol : float
        Convergence threshold on the max-norm of the gradient of the
        per-count log-likelihood.
    method : {"bfgs", "gradient"}
        Search direction: BFGS-scaled gradient or the raw gradient.
    warm_mix : float
        Weight of the maximally mixed state blended into the warm start so
        the starting point is positive definite.
    stall_window, stall_tol : int, float
        Stop early, flagged as not converged, when the per-count
        log-likelihood gains less than ``stall_tol`` over ``stall_window``
        iterations. Rank-deficient optima make the gradient decay slowly
        long after the likelihood has settled. ``stall_tol = 0`` disables.
    record_history : bool
        Keep the log-likelihood of every accepted iterate.
    """

    def __init__(self, max_iter: int = 10_000, tol: float = 1e-8, method: str = "bfgs",
                 warm_mix: float = 1e-9, stall_window: int = 100, stall_tol: float = 1e-12,
                 record_history: bool = False):
        self.max_iter = max_iter
        self.tol = tol
        self.method = method
        self.warm_mix = warm_mix
        self.stall_window = stall_window
        self.stall_tol = stall_tol
        self.record_history = record_history

    def fit(self, records: Sequence[CountRecord], y=None):
        if self.method not in ("bfgs", "gradient"):
            raise ValueError(f"method must be 'bfgs' or 'gradient', got {self.method!r}")
        counts, exposure = _arrange(records)
        total = counts.sum()
        if total <= 0:
            msg = "all counts are zero; returning the maximally mixed state"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            self.result_ = TomographyResult(DensityMatrix(np.eye(4) / 4), 0.0, 0, False, 0.0, msg)
            return self._publish()

        try:
            start = project_psd(_linear_estimate(counts, exposure))
        except ValueError:
            # counts too sparse for a positive-trace linear estimate
            start = np.eye(4, dtype=np.complex128) / 4
        start = (1 - self.warm_mix) * start + self.warm_mix * np.eye(4) / 4
        # scale so the predicted total matches the observed total
        scale = total / float(np.sum(exposure * probabilities(start)))
        T = _cholesky_lower_factor(start * scale)

        def evaluate(params):
            return _objective(params, counts, exposure, total)

        params = _params_from_t(T)
        value, grad = evaluate(params)
        offset = _saturated(counts)
        history = [value * total + offset] if self.record_history else []
        H = np.eye(params.size)
        trace = [value]
        converged = False
        stalled = False
        it = 0
        while it < self.max_iter:
            if np.max(np.abs(grad)) <= self.tol:
                converged = True
                break
            direction = H @ grad if self.method == "bfgs" else grad
            slope = float(grad @ direction)
            if slope <= 0:
                H = np.eye(params.size)
                direction, slope = grad, float(grad @ grad)
            step = 1.0
            while True:
                trial = params + step * direction
                new_value, new_grad = evaluate(trial)
                if new_grad is not None and new_value >= value + 1e-4 * step * slope:
                    break
                step *= 0.5
                if step < 1e-16:
                    break
            if step < 1e-16 or new_value <= value:
                stalled = True
                break
            it += 1
            if self.method == "bfgs":
                s_vec = trial - params
                y_vec = grad - new_grad  # gradient change of the negated objective
                sy = float(s_vec @ y_vec)
                if sy > 1e-16:
                    rho_k = 1.0 / sy
                    V = np.eye(params.size) - rho_k * np.outer(s_vec, y_vec)
                    H = V @ H @ V.T + rho_k * np.outer(s_vec, s_vec)
            params, value, grad = trial, new_value, new_grad
            trace.append(value)
            if self.record_history:
                history.append(value * total + offset)
            if (self.stall_tol > 0 and it >= self.stall_window
                    and value - trace[-1 - self.stall_window] < self.stall_tol):
                stalled = True
                break
        gnorm = float(np.max(np.abs(grad)))
        converged = converged or gnorm <= self.tol
        if not converged:
            reason = "likelihood stalled" if stalled else "iteration cap reached"
            logger.debug("MLE stopped (%s) after %d iterations with gradient %.3e", reason, it, gnorm)

        Tm = _t_from_params(params)
        G = Tm.conj().T @ Tm
        rho = G / np.trace(G).real
        rho = (rho + rho.conj().T) / 2
        self.result_ = TomographyResult(
            density=DensityMatrix(rho),
            loglik=value * total + offset,
            iterations=it,
            converged=converged,
            gradient_norm=gnorm,
            warning=None if converged else (
                "likelihood stalled before the gradient tolerance" if stalled
                else "iteration cap reached before the gradient tolerance"),
            history=history,
        )
        return self._publish()

    def _publish(self):
        r = self.result_
        self.density_matrix_ = r.density
        self.loglik_ = r.loglik
        self.n_iter_ = r.iterations
        self.converged_ = r.converged
        return self

    def score(self, records, y=None) -> float:
        """Poisson log-likelihood of ``records`` under the fitted state, count scale profiled out."""
        if not hasattr(self, "result_"):
            raise NotFittedError("MaximumLikelihoodTomography is not fitted yet")
        counts, exposure = _arrange(records)
        mu = exposure * probabilities(self.density_matrix_.op)
        return _loglik(counts, mu * counts.sum() / max(float(mu.sum()), 1e-300))


class LinearInversionTomography(BaseEstimator):
    """Linear inversion; ``physical=True`` additionally projects onto the PSD cone."""

    def __init__(self, physical: bool = False):
        self.physical = physical

    def fit(self, records, y=None):
        rho = reconstruct_linear(records)
        self.density_matrix_ = project_psd(rho) if self.physical else rho
        return self


def reconstruct_mle(records: Sequence[CountRecord], **kwargs) -> TomographyResult:
    return MaximumLikelihoodTomography(**kwargs).fit(records).result_


def fidelity(a, b) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))^2``."""
    ra, rb = as_density(a), as_density(b)
    # tr|sqrt(a) sqrt(b)| equals the nuclear norm of A^H B for any factors a = A A^H, b = B B^H
    s = np.linalg.svd(psd_factor(ra).conj().T @ psd_factor(rb), compute_uv=False)
    f = float(np.sum(s) ** 2)
    return min(max(f, 0.0), 1.0)


def records_to_csv(records: Sequence[CountRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["setting", "counts", "exposure"])
    for r in records:
        c = r.counts if isinstance(r.counts, (int, np.integer)) else repr(float(r.counts))
        w.writerow([r.setting, c, r.exposure])
    return buf.getvalue()


def records_from_csv(text: str) -> list[CountRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        raw = row["counts"]
        counts = int(raw) if raw.strip().lstrip("-").isdigit() else float(raw)
        out.append(CountRecord(row["setting"], counts, float(row["exposure"])))
    return out
