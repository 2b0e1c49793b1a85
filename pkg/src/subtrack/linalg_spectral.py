"""Dense Hermitian eigendecompositions and Yule-Walker solves.

The numerical substrate for the rest of the package: covariance
eigendecomposition with a deterministic eigenvector phase convention,
dominant-subspace truncation, and the small Hermitian Toeplitz solves that fit
autoregressive coefficients to autocorrelation sequences.

A subspace basis is represented throughout the package as a plain complex
ndarray of shape (K, r) with orthonormal columns.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateInputError, InvalidInputError

# Condition estimate beyond which the Toeplitz system gets a diagonal ridge.
RIDGE_CONDITION_LIMIT = 1e12


@dataclass
class EigenDecomposition:
    """Spectral decomposition R = Q diag(eigenvalues) Q^H.

    Eigenvalues are real and sorted descending; eigenvector columns carry a
    deterministic phase (largest-magnitude entry real positive).
    """

    q: np.ndarray            # (K, K) complex, orthonormal columns
    eigenvalues: np.ndarray  # (K,) real, descending


@dataclass
class YuleWalkerSolution:
    """AR(p) coefficients fitted to one autocorrelation sequence.

    ``phi[l-1]`` is the lag-l coefficient; ``noise_variance`` is the fitted
    innovation variance (clamped at zero); ``condition_estimate`` is the
    condition number of the Toeplitz system before any ridge was applied.
    """

    phi: np.ndarray
    noise_variance: float
    condition_estimate: float


def evd_hermitian(r_mat: np.ndarray) -> EigenDecomposition:
    """Eigendecompose a Hermitian matrix with descending, phase-fixed output.

    The input is symmetrized as (R + R^H)/2 before decomposition; it must be
    Hermitian within 1e-8 to begin with.  Each eigenvector is rotated so its
    largest-magnitude entry is real positive, which makes repeated calls on
    equal inputs bit-identical.
    """
    r_mat = np.asarray(r_mat, dtype=np.complex128)
    if r_mat.ndim != 2 or r_mat.shape[0] != r_mat.shape[1]:
        raise InvalidInputError(f"evd_hermitian: expected square matrix, got {r_mat.shape}")
    if not np.isfinite(r_mat).all():
        raise InvalidInputError("evd_hermitian: non-finite entries in input")
    scale = max(1.0, float(np.max(np.abs(r_mat))))
    if np.max(np.abs(r_mat - r_mat.conj().T)) > 1e-8 * scale:
        raise InvalidInputError("evd_hermitian: input is not Hermitian within 1e-8")

    sym = 0.5 * (r_mat + r_mat.conj().T)
    evals, evecs = np.linalg.eigh(sym)
    order = np.argsort(evals)[::-1]
    evals = evals[order].astype(np.float64)
    evecs = evecs[:, order]

    # Phase convention: largest-magnitude entry of each column real positive.
    anchor_rows = np.argmax(np.abs(evecs), axis=0)
    anchors = evecs[anchor_rows, np.arange(evecs.shape[1])]
    mags = np.abs(anchors)
    phases = np.where(mags > 0, anchors / np.where(mags > 0, mags, 1.0), 1.0)
    evecs = evecs * phases.conj()[np.newaxis, :]
    return EigenDecomposition(q=evecs, eigenvalues=evals)


def truncate_subspace(dec: EigenDecomposition, rank: int) -> np.ndarray:
    """Return the (K, rank) basis of the dominant eigenvectors."""
    k = dec.q.shape[0]
    if not 1 <= rank <= k:
        raise InvalidInputError(f"truncate_subspace: rank {rank} outside [1, {k}]")
    return dec.q[:, :rank].copy()


def solve_yule_walker(autocorr: np.ndarray, order: int, ridge: float = 1e-8) -> YuleWalkerSolution:
    """Fit AR(``order``) coefficients to one tap's autocorrelation sequence.

    Parameters
    ----------
    autocorr : array of R(0), R(1), ..., R(order), complex.  Negative lags
        are taken as conjugates (Hermitian autocorrelation).
    order : AR order p >= 1.
    ridge : relative Tikhonov ridge added as ``ridge * R(0) * I`` when the
        Toeplitz system's condition estimate exceeds 1e12.

    Solves the p x p Hermitian Toeplitz system linking autocorrelations to AR
    coefficients; the innovation variance is
    ``R(0) - sum_l phi_l conj(R(l))``, clamped at zero.
    """
    autocorr = np.asarray(autocorr, dtype=np.complex128).reshape(-1)
    if order < 1:
        raise InvalidInputError(f"solve_yule_walker: order must be >= 1, got {order}")
    if autocorr.size < order + 1:
        raise InvalidInputError(
            f"solve_yule_walker: need lags 0..{order}, got {autocorr.size} values")
    r0 = autocorr[0]
    if not np.isfinite(r0) or r0.real <= 0 or abs(r0.imag) > 1e-8 * abs(r0.real):
        raise DegenerateInputError(
            f"solve_yule_walker: zero-lag autocorrelation must be real positive, got {r0}")

    col = autocorr[:order]
    toep = scipy.linalg.toeplitz(col, col.conj())
    rhs = autocorr[1:order + 1]

    condition = float(np.linalg.cond(toep))
    if not np.isfinite(condition) or condition > RIDGE_CONDITION_LIMIT:
        toep = toep + ridge * r0.real * np.eye(order)
    phi = np.linalg.solve(toep, rhs)

    noise_var = float((r0 - np.dot(phi, autocorr[1:order + 1].conj())).real)
    return YuleWalkerSolution(phi=phi, noise_variance=max(noise_var, 0.0),
                              condition_estimate=condition)
