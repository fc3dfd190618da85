""" TT-SVD decomposition, TT contraction and left-isometry checks. """

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ttad.errors import StructuralError
from ttad.svd_engine import TruncationPolicy, policy_tau, truncated_svd
from ttad.tensor_core import tensor_as_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TTChain:
    """
    Tensor train stored as order-3 cores ``(b_{i-1}, p_i, b_i)``.

    The boundary bonds ``b_0`` and ``b_n`` are always 1, so the first core is
    effectively ``p_1 x b_1`` and the last one ``b_{n-1} x p_n``.
    """

    cores: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        validate_chain(self.cores)

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def physical_dims(self) -> tuple[int, ...]:
        return tuple(core.shape[1] for core in self.cores)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        """Inner bond dimensions ``b_1 ... b_{n-1}``."""
        return tuple(core.shape[2] for core in self.cores[:-1])


def validate_chain(cores: Sequence[np.ndarray]) -> None:
    """
    Raises
    ------
    StructuralError
        If a core is not order 3, a boundary bond is not 1 or adjacent bonds disagree.
    """
    if not cores:
        raise StructuralError("a TT chain needs at least one core")
    for i, core in enumerate(cores):
        if core.ndim != 3 or min(core.shape) < 1:
            raise StructuralError(f"core {i + 1} has invalid shape {core.shape}")
    if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
        raise StructuralError("boundary bond dimensions must be 1")
    for i, (left, right) in enumerate(zip(cores, cores[1:])):
        if left.shape[2] != right.shape[0]:
            raise StructuralError(
                f"bond mismatch between cores {i + 1} and {i + 2}: {left.shape[2]} != {right.shape[0]}"
            )


def tt_decompose(tensor: np.ndarray, policy: TruncationPolicy) -> TTChain:
    """
    Build a left-orthogonal TT of ``tensor`` by sequential truncated SVDs.

    Step ``i`` groups (previous bond x physical index ``i``) as rows and the
    remaining physical indexes as columns, keeps ``U`` as core ``i`` and carries
    ``Sigma @ V`` to step ``i + 1``.

    Parameters
    ----------
    tensor : np.ndarray
        Dense tensor of order ``n >= 2``.
    policy : TruncationPolicy
        Compression factor for each of the ``n - 1`` SVDs.

    Returns
    -------
    TTChain
        Chain whose cores ``1 ... n-1`` are left-isometric.

    Raises
    ------
    DegenerateInputError
        If the tensor, or a remainder during the sweep, is all zero.
    """
    if tensor.ndim < 2:
        raise StructuralError(f"TT-SVD needs a tensor of order >= 2, got order {tensor.ndim}")
    dims = tensor.shape
    cores = []
    bond = 1
    remainder = tensor.reshape(1, -1)
    for step, dim in enumerate(dims[:-1], start=1):
        svd = truncated_svd(remainder.reshape(bond * dim, -1), policy_tau(policy, step))
        cores.append(svd.u.reshape(bond, dim, svd.rank))
        bond = svd.rank
        remainder = svd.remainder()
    cores.append(remainder.reshape(bond, dims[-1], 1))
    chain = TTChain(tuple(cores))
    logger.debug("tt_decompose %s -> bonds %s", dims, chain.bond_dims)
    return chain


def tt_contract(chain: TTChain) -> np.ndarray:
    """Contract the chain left to right into a dense tensor of dims ``physical_dims``."""
    validate_chain(chain.cores)
    result = chain.cores[0].reshape(-1, chain.cores[0].shape[2])
    for core in chain.cores[1:]:
        left, phys, right = core.shape
        result = (result @ core.reshape(left, phys * right)).reshape(-1, right)
    return result.reshape(chain.physical_dims)


def contract_to_matrix(chain: TTChain) -> np.ndarray:
    """Contract a chain whose first physical index runs over data rows back to ``N x M'``."""
    return tensor_as_matrix(tt_contract(chain))


def core_matrix(core: np.ndarray) -> np.ndarray:
    """Reshape a core ``(b_{i-1}, p_i, b_i)`` to ``(b_{i-1} * p_i) x b_i``."""
    return core.reshape(-1, core.shape[2])


def is_left_isometric(core: np.ndarray, atol: float = 1e-10) -> bool:
    """Whether the reshaped core has orthonormal columns within ``atol``."""
    mat = core_matrix(core)
    return bool(np.allclose(mat.T @ mat, np.eye(mat.shape[1]), rtol=0.0, atol=atol))


def is_left_orthogonal(chain: TTChain, atol: float = 1e-10) -> bool:
    """Whether every core except the last is left-isometric."""
    return all(is_left_isometric(core, atol) for core in chain.cores[:-1])
