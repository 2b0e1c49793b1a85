"""Kalman recursions over the stacked AR component state.

The state is the stacked vector ``Z(n) = [z(n); z(n-1); ...; z(n-p+1)]`` of
length r*p, evolving under a companion-form transition matrix whose first
block row holds the per-lag diagonal coefficient blocks.  This module supplies
the forward update/prediction steps, the running autocorrelation table that
feeds per-step re-fits of the transition model, the inverted (backward-time)
model, and the two-filter combination of forward and backward filtered
beliefs.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (FusionError, InvalidInputError, NumericError,
                     SingularModelError)
from .linalg_spectral import solve_yule_walker

# Magnitude assigned to re-fitted coefficients that land on or outside the
# unit circle; keeps the model stable and its companion matrix invertible.
STABILITY_CLAMP = 1.0 - 1e-6


@dataclass
class ArTransitionModel:
    """Companion-form transition model for rank-r, order-p component dynamics.

    ``phi[i, l-1]`` is component i's lag-l coefficient.  ``noise_cov`` is the
    (r, r) innovation covariance; the stacked state sees it embedded in the
    top-left block of an otherwise zero (rp, rp) matrix.
    """

    phi: np.ndarray
    noise_cov: np.ndarray
    companion: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.phi = np.atleast_2d(np.asarray(self.phi, dtype=np.complex128))
        self.noise_cov = np.asarray(self.noise_cov, dtype=np.complex128)
        rank, order = self.phi.shape
        if order < 1:
            raise InvalidInputError("ArTransitionModel: order must be >= 1")
        if self.noise_cov.shape != (rank, rank):
            raise InvalidInputError(
                f"ArTransitionModel: noise_cov shape {self.noise_cov.shape} != ({rank}, {rank})")
        dim = rank * order
        companion = np.zeros((dim, dim), dtype=np.complex128)
        for l in range(order):
            block = slice(l * rank, (l + 1) * rank)
            companion[:rank, block] = np.diag(self.phi[:, l])
        if order > 1:
            sub = np.arange(dim - rank)
            companion[rank + sub, sub] = 1.0
        self.companion = companion

    @property
    def rank(self) -> int:
        return self.phi.shape[0]

    @property
    def order(self) -> int:
        return self.phi.shape[1]

    @property
    def dim(self) -> int:
        return self.phi.size

    @property
    def transition_matrix(self) -> np.ndarray:
        return self.companion

    @property
    def process_noise_star(self) -> np.ndarray:
        """(rp, rp) stacked process-noise covariance [[R_eta, 0], [0, 0]]."""
        star = np.zeros((self.dim, self.dim), dtype=np.complex128)
        star[:self.rank, :self.rank] = self.noise_cov
        return star

    def block(self, lag: int) -> np.ndarray:
        """The (r, r) diagonal coefficient block for ``lag`` in 1..p."""
        return np.diag(self.phi[:, lag - 1])

    def with_noise(self, noise_cov: np.ndarray) -> "ArTransitionModel":
        return ArTransitionModel(phi=self.phi.copy(), noise_cov=noise_cov)


@dataclass
class BackwardModel:
    """Reversed-time model: inverse transition and its mapped process noise."""

    transition_matrix: np.ndarray   # (rp, rp) inverse of the companion matrix
    process_noise_star: np.ndarray  # (rp, rp) Phi_b R_star Phi_b^H


@dataclass
class KalmanBelief:
    """State estimate with error covariance, tagged by its conditioning."""

    mean: np.ndarray  # (rp,) complex
    cov: np.ndarray   # (rp, rp) Hermitian
    kind: str         # "predicted" (n given n-1) or "filtered" (n given n)


@dataclass
class ObservationRow:
    """Scalar observation row ``[d_z^T, 0, ..., 0]`` with its noise variance."""

    row: np.ndarray
    noise_var: float

    def __post_init__(self):
        self.row = np.asarray(self.row, dtype=np.complex128).reshape(-1)
        if self.noise_var <= 0:
            raise InvalidInputError(
                f"ObservationRow: noise_var must be positive, got {self.noise_var}")

    @classmethod
    def from_projected(cls, d_z: np.ndarray, order: int, noise_var: float) -> "ObservationRow":
        d_z = np.asarray(d_z, dtype=np.complex128).reshape(-1)
        row = np.concatenate([d_z, np.zeros(d_z.size * (order - 1), dtype=np.complex128)])
        return cls(row=row, noise_var=noise_var)


@dataclass
class UpdateOutput:
    """Filtered belief plus the innovation, its variance, and the gain."""

    belief: KalmanBelief
    innovation: complex
    innovation_var: float
    gain: np.ndarray


@dataclass
class SmoothedState:
    """Two-filter combined estimate with its error covariance."""

    mean: np.ndarray
    cov: np.ndarray


def kf_update(pred: KalmanBelief, obs: ObservationRow, r_n: complex) -> UpdateOutput:
    """Measurement update of a predicted belief with one scalar observation."""
    if pred.kind != "predicted":
        raise InvalidInputError(f"kf_update: expected a predicted belief, got {pred.kind!r}")
    row = obs.row
    if not (np.isfinite(r_n) and np.isfinite(row).all()
            and np.isfinite(pred.mean).all() and np.isfinite(pred.cov).all()):
        raise NumericError("kalman_core.kf_update: non-finite input")

    cov_dh = pred.cov @ row.conj()             # K D^H
    g = max(float((row @ cov_dh).real), 0.0) + obs.noise_var
    gain = cov_dh / g
    innovation = complex(r_n - row @ pred.mean)
    mean = pred.mean + gain * innovation
    cov = pred.cov - np.outer(gain, row @ pred.cov)
    cov = 0.5 * (cov + cov.conj().T)
    return UpdateOutput(belief=KalmanBelief(mean=mean, cov=cov, kind="filtered"),
                        innovation=innovation, innovation_var=g, gain=gain)


def kf_predict(filt: KalmanBelief, model) -> KalmanBelief:
    """Propagate a filtered belief one step through a transition model.

    ``model`` needs ``transition_matrix`` and ``process_noise_star``
    attributes; both the companion-form forward model and the inverted
    backward model qualify.
    """
    if filt.kind != "filtered":
        raise InvalidInputError(f"kf_predict: expected a filtered belief, got {filt.kind!r}")
    trans = model.transition_matrix
    mean = trans @ filt.mean
    cov = trans @ filt.cov @ trans.conj().T + model.process_noise_star
    cov = 0.5 * (cov + cov.conj().T)
    return KalmanBelief(mean=mean, cov=cov, kind="predicted")


class RecursiveAutocorr:
    """Running per-component autocorrelation table over predicted components.

    After ``count`` updates the table equals the batch average
    ``(1/count) sum_n z(n) conj(z(n-m))`` with zero pre-start history, for
    lags m = 0..order.
    """

    def __init__(self, rank: int, order: int):
        self.rank = rank
        self.order = order
        self.table = np.zeros((rank, order + 1), dtype=np.complex128)
        self.count = 0
        self._history = np.zeros((order, rank), dtype=np.complex128)

    def update(self, z_new: np.ndarray) -> np.ndarray:
        """Fold one component vector into the running averages."""
        z_new = np.asarray(z_new, dtype=np.complex128).reshape(-1)
        if z_new.size != self.rank:
            raise InvalidInputError(
                f"RecursiveAutocorr: got {z_new.size} components, expected {self.rank}")
        lagged = np.concatenate([z_new[np.newaxis, :], self._history], axis=0)
        sample = z_new[:, np.newaxis] * lagged.conj().T
        n = self.count
        self.table = (n / (n + 1)) * self.table + sample / (n + 1)
        self.count = n + 1
        if self.order > 0:
            self._history[1:] = self._history[:-1]
            self._history[0] = z_new
        return self.table


def predict_transition(table: np.ndarray, order: int, rank: int,
                       noise_cov: np.ndarray,
                       previous: Optional[ArTransitionModel] = None) -> ArTransitionModel:
    """Re-fit the transition model from a (possibly running) autocorrelation table.

    Coefficient vectors come from per-component Yule-Walker solves;
    coefficients on or outside the unit circle are radially projected to
    magnitude ``1 - 1e-6`` with their phase preserved.  The process noise is
    carried over unchanged (it is estimated once, on training data).  If any
    component's zero-lag power is nonpositive the ``previous`` model is
    returned as-is.
    """
    table = np.asarray(table, dtype=np.complex128)
    if table.shape != (rank, order + 1):
        raise InvalidInputError(
            f"predict_transition: table shape {table.shape} != ({rank}, {order + 1})")
    power = table[:, 0]
    degenerate = (power.real <= 0) | ~np.isfinite(power)
    if degenerate.any():
        if previous is not None:
            return previous
        raise InvalidInputError(
            "predict_transition: degenerate zero-lag autocorrelation and no fallback model")

    if order == 1:
        phi = (table[:, 1] / table[:, 0].real)[:, np.newaxis]
    else:
        phi = np.empty((rank, order), dtype=np.complex128)
        for i in range(rank):
            phi[i] = solve_yule_walker(table[i], order).phi
    mags = np.abs(phi)
    unstable = mags >= 1.0
    if unstable.any():
        phi = np.where(unstable, phi * (STABILITY_CLAMP / np.where(unstable, mags, 1.0)), phi)
    return ArTransitionModel(phi=phi, noise_cov=noise_cov)


def backward_model(model: ArTransitionModel) -> BackwardModel:
    """Invert a transition model for reversed-time filtering.

    Requires the companion matrix to be invertible, i.e. no component's
    highest-lag coefficient may vanish.  The backward process noise is the
    stacked forward noise mapped through the inverse transition,
    symmetrized.
    """
    tail = model.phi[:, -1]
    bad = np.flatnonzero(np.abs(tail) <= 1e-12)
    if bad.size:
        raise SingularModelError(
            f"backward_model: lag-{model.order} coefficient of component {bad[0]} is "
            f"zero; transition not invertible")
    if model.order == 1:
        inv_phi = 1.0 / model.phi[:, 0]
        trans = np.diag(inv_phi)
        noise = model.noise_cov * np.outer(inv_phi, inv_phi.conj())
    else:
        trans = np.linalg.inv(model.companion)
        noise = trans @ model.process_noise_star @ trans.conj().T
    noise = 0.5 * (noise + noise.conj().T)
    return BackwardModel(transition_matrix=trans, process_noise_star=noise)


def _hermitian_inverse_apply(cov: np.ndarray, targets: list) -> Optional[list]:
    """Solve ``cov @ X = target`` for each target, ridging once if singular."""
    cov = 0.5 * (cov + cov.conj().T)
    for attempt in range(2):
        try:
            solved = [np.linalg.solve(cov, t) for t in targets]
        except np.linalg.LinAlgError:
            solved = None
        if solved is not None and all(np.isfinite(s).all() for s in solved):
            return solved
        ridge = 1e-12 * float(np.trace(cov).real)
        if attempt == 0 and ridge > 0:
            cov = cov + ridge * np.eye(cov.shape[0])
        else:
            return None
    return None


def fb_combine(fwd: KalmanBelief, bwd: KalmanBelief) -> SmoothedState:
    """Combine forward and backward filtered beliefs by inverse-covariance weighting.

    ``M = (K_f^-1 + K_b^-1)^-1`` and ``Z = M (K_f^-1 Z_f + K_b^-1 Z_b)``;
    each inverse is a Hermitian solve with a ``1e-12 * trace`` ridge retry.
    """
    if fwd.kind != "filtered" or bwd.kind != "filtered":
        raise InvalidInputError("fb_combine: both beliefs must be filtered")
    dim = fwd.mean.size
    eye = np.eye(dim, dtype=np.complex128)
    f_parts = _hermitian_inverse_apply(fwd.cov, [eye, fwd.mean])
    b_parts = _hermitian_inverse_apply(bwd.cov, [eye, bwd.mean])
    if f_parts is None or b_parts is None:
        sides = [name for name, part in (("forward", f_parts), ("backward", b_parts))
                 if part is None]
        raise FusionError(f"fb_combine: singular covariance on {' and '.join(sides)} side")
    info = f_parts[0] + b_parts[0]
    combined = _hermitian_inverse_apply(info, [eye, f_parts[1] + b_parts[1]])
    if combined is None:
        raise FusionError("fb_combine: combined information matrix is singular")
    cov = 0.5 * (combined[0] + combined[0].conj().T)
    return SmoothedState(mean=combined[1], cov=cov)
