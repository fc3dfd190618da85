""" Truncated SVD with the relative retention rule ``sigma_k > tau * sigma_max``. """

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from config import SVD_ABS_FLOOR
from ttad.errors import ConfigError, DegenerateInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncatedSvd:
    """
    Retained part of a singular value decomposition.

    Attributes
    ----------
    u : np.ndarray
        Left factor ``p x r`` with orthonormal columns.
    singulars : np.ndarray
        Retained singular values, non-increasing and positive.
    v : np.ndarray
        Right factor ``r x q`` with orthonormal rows.
    discarded : np.ndarray
        Singular values that were dropped.
    """

    u: np.ndarray
    singulars: np.ndarray
    v: np.ndarray
    discarded: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.singulars)

    def remainder(self) -> np.ndarray:
        """``Sigma @ V``, carried to the next TT-SVD step."""
        return self.singulars[:, np.newaxis] * self.v

    def reconstruct(self) -> np.ndarray:
        """``U @ Sigma @ V``, the best rank-r approximation."""
        return self.u @ self.remainder()


class TruncationPolicy(BaseModel):
    """
    Compression factor for each SVD of a TT-SVD sweep.

    ``tau`` is either one value used at every step or a list with one value per
    step (step ``i`` is the SVD producing core ``i``).
    """

    model_config = ConfigDict(frozen=True)

    tau: Union[float, tuple[float, ...]]

    @field_validator("tau")
    @classmethod
    def _check_tau(cls, tau):
        values = tau if isinstance(tau, tuple) else (tau,)
        if not values:
            raise ValueError("per-step tau list is empty")
        for value in values:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"tau must lie in [0, 1], got {value}")
        return tau

    @classmethod
    def of(cls, tau: Union[float, list[float], tuple[float, ...], "TruncationPolicy"]) -> "TruncationPolicy":
        """Coerce a float, a list or an existing policy, mapping validation failures to ``ConfigError``."""
        if isinstance(tau, cls):
            return tau
        try:
            return cls(tau=tuple(tau) if isinstance(tau, (list, tuple)) else float(tau))
        except (ValidationError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid truncation policy {tau!r}: {exc}") from exc

    @property
    def is_uniform(self) -> bool:
        return not isinstance(self.tau, tuple)


def policy_tau(policy: TruncationPolicy, step: int) -> float:
    """
    Compression factor for the 1-based SVD ``step``.

    Raises
    ------
    ConfigError
        If ``step`` is below 1 or past the end of a per-step list.
    """
    if step < 1:
        raise ConfigError(f"SVD steps are 1-based, got {step}")
    if policy.is_uniform:
        return policy.tau
    if step > len(policy.tau):
        raise ConfigError(f"per-step tau list has {len(policy.tau)} entries, step {step} requested")
    return policy.tau[step - 1]


def _fix_signs(u: np.ndarray, v: np.ndarray) -> None:
    # Largest-magnitude entry of each left singular vector is made positive.
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u *= signs
    v *= signs[:, np.newaxis]


def truncated_svd(matrix: np.ndarray, tau: float) -> TruncatedSvd:
    """
    Decompose ``matrix`` and keep the singular values with ``sigma_k > tau * sigma_max``.

    At least ``sigma_max`` is always kept. Values at or below ``SVD_ABS_FLOOR * sigma_max``
    are dropped even for ``tau = 0``.

    Parameters
    ----------
    matrix : np.ndarray
        Real ``p x q`` matrix.
    tau : float
        Compression factor in ``[0, 1]``.

    Returns
    -------
    TruncatedSvd
        Retained factors with a deterministic sign convention.

    Raises
    ------
    DegenerateInputError
        If ``matrix`` is identically zero.
    """
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateInputError(f"cannot decompose an all-zero {matrix.shape} matrix")

    keep = (s > tau * s[0]) & (s > SVD_ABS_FLOOR * s[0])
    keep[0] = True
    rank = int(np.count_nonzero(keep))

    u = u[:, :rank].copy()
    vt = vt[:rank, :].copy()
    _fix_signs(u, vt)
    logger.debug("truncated_svd %s tau=%g -> rank %d of %d", matrix.shape, tau, rank, s.size)
    return TruncatedSvd(u=u, singulars=s[:rank], v=vt, discarded=s[rank:])
