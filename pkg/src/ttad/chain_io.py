"""
Binary containers for TT chains and fitted local bases.

Chain layout (little-endian)::

    b"TTCHAIN1" | uint32 n | uint32 p_1..p_n | uint32 b_0..b_n | float64 cores, row-major

A basis file is ``b"TTBASIS1" | uint32 len | JSON header | chain container``, where
the chain holds the basis cores ``B^1 ... B^{n-1}``.
"""

import json
import struct
from pathlib import Path

import numpy as np

from ttad.detectors import OrthogonalBasis
from ttad.errors import StructuralError
from ttad.svd_engine import TruncationPolicy
from ttad.tensor_core import FactorShape
from ttad.tt_builder import TTChain, validate_chain

CHAIN_MAGIC = b"TTCHAIN1"
BASIS_MAGIC = b"TTBASIS1"
_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


def chain_to_bytes(cores) -> bytes:
    validate_chain(cores)
    physical = [core.shape[1] for core in cores]
    bonds = [cores[0].shape[0]] + [core.shape[2] for core in cores]
    header = np.array([len(cores), *physical, *bonds], dtype=_U32).tobytes()
    body = b"".join(np.ascontiguousarray(core, dtype=_F64).tobytes() for core in cores)
    return CHAIN_MAGIC + header + body


def _read_u32(buffer: bytes, offset: int, count: int) -> tuple[np.ndarray, int]:
    end = offset + count * _U32.itemsize
    if end > len(buffer):
        raise StructuralError("truncated chain header")
    return np.frombuffer(buffer, dtype=_U32, count=count, offset=offset).astype(int), end


def cores_from_bytes(buffer: bytes) -> tuple[np.ndarray, ...]:
    """
    Raises
    ------
    StructuralError
        On a wrong magic string, a truncated buffer or trailing bytes.
    """
    if not buffer.startswith(CHAIN_MAGIC):
        raise StructuralError("not a TT chain container")
    (n,), offset = _read_u32(buffer, len(CHAIN_MAGIC), 1)
    physical, offset = _read_u32(buffer, offset, n)
    bonds, offset = _read_u32(buffer, offset, n + 1)
    cores = []
    for i in range(n):
        dims = (bonds[i], physical[i], bonds[i + 1])
        count = int(np.prod(dims))
        end = offset + count * _F64.itemsize
        if end > len(buffer):
            raise StructuralError(f"truncated data in core {i + 1}")
        cores.append(np.frombuffer(buffer, dtype=_F64, count=count, offset=offset).reshape(dims).copy())
        offset = end
    if offset != len(buffer):
        raise StructuralError(f"{len(buffer) - offset} trailing bytes after the last core")
    validate_chain(cores)
    return tuple(cores)


def save_chain(chain: TTChain, path: str | Path) -> None:
    Path(path).write_bytes(chain_to_bytes(chain.cores))


def load_chain(path: str | Path) -> TTChain:
    return TTChain(cores_from_bytes(Path(path).read_bytes()))


def save_basis(basis: OrthogonalBasis, path: str | Path) -> None:
    """Persist a fitted local basis with its shape and fit-time policy."""
    header = json.dumps(
        {"shape": list(basis.shape.factors), "policy": basis.policy.model_dump(mode="json")}
    ).encode("utf-8")
    # Basis cores end on an open bond; a unit cap makes them a valid chain.
    cap = np.eye(basis.cores[-1].shape[2]).reshape(basis.cores[-1].shape[2], -1, 1)
    payload = chain_to_bytes(basis.cores + (cap,))
    Path(path).write_bytes(BASIS_MAGIC + struct.pack("<I", len(header)) + header + payload)


def load_basis(path: str | Path) -> OrthogonalBasis:
    """
    Raises
    ------
    StructuralError
        If the file is not a basis container or its cores do not match its shape.
    """
    buffer = Path(path).read_bytes()
    if not buffer.startswith(BASIS_MAGIC) or len(buffer) < len(BASIS_MAGIC) + 4:
        raise StructuralError(f"{path} is not a TT basis container")
    (length,) = struct.unpack_from("<I", buffer, len(BASIS_MAGIC))
    start = len(BASIS_MAGIC) + 4
    try:
        header = json.loads(buffer[start : start + length].decode("utf-8"))
        shape = FactorShape(factors=tuple(header["shape"]))
        policy = TruncationPolicy.model_validate(header["policy"])
    except (ValueError, KeyError) as exc:
        raise StructuralError(f"corrupt basis header: {exc}") from exc
    cores = cores_from_bytes(buffer[start + length :])[:-1]
    if tuple(core.shape[1] for core in cores) != shape.factors[:-1]:
        raise StructuralError("basis cores do not match the stored factor shape")
    return OrthogonalBasis(cores=cores, shape=shape, policy=policy)
