"""
Compression anomaly detectors.

Global detectors compress the whole (training + test) dataset in one TT and
compare each test row with the compressed rows. Local detectors fix the first
``n - 1`` cores from one normal training row and force every test row into that
basis. Auto-compare scores use ``d = <y, y'> / |y|^2``; group-compare scores sum
the cosine between ``y`` and every compressed row.

Scores are normality values: close to 1 for rows the compression keeps, lower
for rows it displaces. Rows with zero norm score exactly 0 and are flagged.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from config import MAX_WORKERS, ZERO_NORM_TOL
from ttad.errors import ConfigError, DegenerateInputError, DimensionError
from ttad.preprocessing import apply_scaler, fit_scaler
from ttad.svd_engine import TruncationPolicy, policy_tau, truncated_svd
from ttad.tensor_core import FactorShape, as_data_matrix, matrix_as_tensor, pad_features, vector_as_tensor
from ttad.tt_builder import TTChain, contract_to_matrix, core_matrix, tt_contract, tt_decompose

logger = logging.getLogger(__name__)


class Method(str, Enum):
    ACG = "acg"
    GCG = "gcg"
    ACL = "acl"
    GCL = "gcl"

    @property
    def is_local(self) -> bool:
        return self in (Method.ACL, Method.GCL)


class Mode(str, Enum):
    UNSUPERVISED = "unsupervised"
    SEMI_SUPERVISED = "semi_supervised"
    SUPERVISED = "supervised"


def infer_mode(method: Method, mode: Optional[Mode], has_train: bool) -> Optional[Mode]:
    """Explicit ``mode`` wins; a global run given training rows is supervised, otherwise unsupervised."""
    if mode is not None or Method(method).is_local:
        return mode
    return Mode.SUPERVISED if has_train else Mode.UNSUPERVISED


class DetectorConfig(BaseModel):
    """
    Parameters of one detector run.

    ``mode`` defaults to unsupervised for global methods and is forced to
    supervised for local methods, which always need a training row.
    """

    model_config = ConfigDict(frozen=True)

    method: Method
    shape: FactorShape
    policy: TruncationPolicy
    scaler: bool = True
    mode: Optional[Mode] = None
    workers: int = MAX_WORKERS

    @model_validator(mode="before")
    @classmethod
    def _default_mode(cls, data):
        if isinstance(data, dict) and data.get("mode") is None and "method" in data:
            local = Method(data["method"]).is_local
            data = {**data, "mode": Mode.SUPERVISED if local else Mode.UNSUPERVISED}
        return data

    @model_validator(mode="after")
    def _check_method(self) -> "DetectorConfig":
        if self.method.is_local and self.mode is not Mode.SUPERVISED:
            raise ValueError("local methods are supervised only")
        if self.method.is_local and self.shape.order < 2:
            raise ValueError("local methods need a factor shape with at least two factors")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self

    @classmethod
    def build(cls, **kwargs) -> "DetectorConfig":
        """Validate keyword options, mapping failures to ``ConfigError``."""
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            raise ConfigError(f"invalid detector configuration: {exc}") from exc


@dataclass(frozen=True)
class OrthogonalBasis:
    """
    First ``n - 1`` left-isometric cores of a training row's TT.

    Attributes
    ----------
    cores : tuple[np.ndarray, ...]
        Cores ``B^1 ... B^{n-1}`` with dims ``(b_{i-1}, p_i, b_i)``.
    shape : FactorShape
        Factor shape the training row was split with.
    policy : TruncationPolicy
        Policy used at fit time.
    """

    cores: tuple[np.ndarray, ...]
    shape: FactorShape
    policy: TruncationPolicy

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(core.shape[2] for core in self.cores)


@dataclass(frozen=True)
class ScoreVector:
    """Decision values aligned with the test rows, plus the zero-norm flags."""

    values: np.ndarray
    flagged: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


def _row_norms(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(matrix, axis=1)
    zero = norms <= ZERO_NORM_TOL
    if zero.any():
        logger.warning("%d zero-norm row(s) scored 0 and flagged", int(zero.sum()))
    return norms, zero


def _auto_compare(original: np.ndarray, compressed: np.ndarray) -> ScoreVector:
    norms, zero = _row_norms(original)
    inner = np.einsum("ij,ij->i", original, compressed)
    values = np.divide(inner, norms**2, out=np.zeros_like(inner), where=~zero)
    return ScoreVector(values=values, flagged=zero)


def _group_compare(original: np.ndarray, compressed: np.ndarray) -> ScoreVector:
    norms, zero = _row_norms(original)
    compressed_norms = np.linalg.norm(compressed, axis=1)
    live = compressed_norms > ZERO_NORM_TOL
    projections = original @ compressed[live].T
    cosines = projections / compressed_norms[live]
    values = np.divide(cosines.sum(axis=1), norms, out=np.zeros(len(original)), where=~zero)
    return ScoreVector(values=values, flagged=zero)


def _prepare(blocks: Sequence[np.ndarray], cfg: DetectorConfig) -> list[np.ndarray]:
    """Stack the blocks, scale them together when the scaler is on, pad, and split them back."""
    blocks = [as_data_matrix(block) for block in blocks]
    widths = {block.shape[1] for block in blocks}
    if len(widths) != 1:
        raise DimensionError(f"feature counts differ between inputs: {sorted(widths)}")
    stacked = np.vstack(blocks)
    if cfg.scaler:
        stacked = apply_scaler(stacked, fit_scaler(stacked))
    stacked = pad_features(stacked, cfg.shape)
    bounds = np.cumsum([len(block) for block in blocks])[:-1]
    return np.split(stacked, bounds)


def _check_mode(train: Optional[np.ndarray], cfg: DetectorConfig) -> None:
    if cfg.mode is Mode.UNSUPERVISED and train is not None:
        raise ConfigError("unsupervised mode takes no training data")
    if cfg.mode is not Mode.UNSUPERVISED and train is None:
        raise ConfigError(f"{cfg.mode.value} mode needs training data")


def compress_global(matrix: np.ndarray, cfg: DetectorConfig) -> np.ndarray:
    """Compress a padded ``N x M'`` dataset through its TT and return it as a matrix."""
    if not matrix.any():
        raise DegenerateInputError("the dataset to compress is all zero")
    chain = tt_decompose(matrix_as_tensor(matrix, cfg.shape), cfg.policy)
    logger.debug("global chain bonds %s", chain.bond_dims)
    return contract_to_matrix(chain)


def _global_inputs(
    test: np.ndarray, train: Optional[np.ndarray], cfg: DetectorConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    _check_mode(train, cfg)
    blocks = [test] if train is None else [train, test]
    prepared = _prepare(blocks, cfg)
    stacked = np.vstack(prepared)
    compressed = compress_global(stacked, cfg)
    n_train = 0 if train is None else len(prepared[0])
    return stacked[n_train:], compressed, compressed[n_train:]


def acg_score(test, train, cfg: DetectorConfig) -> ScoreVector:
    """
    Auto-compare global detector.

    Training rows (if any) are stacked above the test rows, the stack is
    compressed once, and each test row is compared with its own compressed version.

    Raises
    ------
    DegenerateInputError
        If the prepared dataset is all zero.
    """
    original, _, compressed_test = _global_inputs(test, train, cfg)
    return _auto_compare(original, compressed_test)


def gcg_score(test, train, cfg: DetectorConfig) -> ScoreVector:
    """Group-compare global detector: sum of cosines against every compressed row, train included."""
    original, compressed, _ = _global_inputs(test, train, cfg)
    return _group_compare(original, compressed)


def fit_basis(padded_row: np.ndarray, shape: FactorShape, policy: TruncationPolicy) -> OrthogonalBasis:
    """Decompose an already padded (and scaled) row and keep its first ``n - 1`` cores."""
    if not np.any(padded_row):
        raise DegenerateInputError("the training row is all zero")
    chain = tt_decompose(vector_as_tensor(padded_row, shape), policy)
    logger.debug("local basis bonds %s", chain.bond_dims)
    return OrthogonalBasis(cores=chain.cores[:-1], shape=shape, policy=policy)


def local_fit(train_row, cfg: DetectorConfig) -> OrthogonalBasis:
    """
    Fit the local basis on one training row (padded, never scaled here).

    Raises
    ------
    DegenerateInputError
        If the row is all zero.
    """
    (row,) = _prepare([np.reshape(train_row, (1, -1))], cfg.model_copy(update={"scaler": False}))
    return fit_basis(row[0], cfg.shape, cfg.policy)


def local_compress(test_row, basis: OrthogonalBasis, cfg: DetectorConfig) -> np.ndarray:
    """
    Force a padded test row into the basis and return its compressed version.

    At each step the current remainder is truncated by SVD and projected onto the
    basis core, ``remainder <- B^T (U Sigma V)``; the last remainder becomes the
    final core of a chain that reuses ``B^1 ... B^{n-1}``.

    Returns
    -------
    np.ndarray
        Compressed row of width ``shape.size``; all zeros if a remainder vanishes.
    """
    row = np.asarray(test_row, dtype=np.float64).ravel()
    if row.size != basis.shape.size:
        raise DimensionError(f"row width {row.size} != basis width {basis.shape.size}")
    dims = basis.shape.factors
    remainder = row.reshape(1, -1)
    bond = 1
    for step, core in enumerate(basis.cores, start=1):
        mat = remainder.reshape(bond * dims[step - 1], -1)
        if not mat.any():
            return np.zeros_like(row)
        approx = truncated_svd(mat, policy_tau(cfg.policy, step)).reconstruct()
        remainder = core_matrix(core).T @ approx
        bond = core.shape[2]
    last = remainder.reshape(bond, dims[-1], 1)
    return tt_contract(TTChain(basis.cores + (last,))).ravel()


def _compress_rows(rows: np.ndarray, basis: OrthogonalBasis, cfg: DetectorConfig) -> np.ndarray:
    if cfg.workers == 1 or len(rows) < 2:
        return np.array([local_compress(row, basis, cfg) for row in rows])
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return np.array(list(pool.map(lambda row: local_compress(row, basis, cfg), rows)))


def acl_score(test, train_row, cfg: DetectorConfig) -> ScoreVector:
    """Auto-compare local detector."""
    train, original = _prepare([np.reshape(train_row, (1, -1)), test], cfg)
    basis = fit_basis(train[0], cfg.shape, cfg.policy)
    return _auto_compare(original, _compress_rows(original, basis, cfg))


def gcl_score(test, reference, train_row, cfg: DetectorConfig) -> ScoreVector:
    """Group-compare local detector: cosines of each test row against every compressed reference row."""
    train, ref, original = _prepare([np.reshape(train_row, (1, -1)), reference, test], cfg)
    basis = fit_basis(train[0], cfg.shape, cfg.policy)
    return _group_compare(original, _compress_rows(ref, basis, cfg))


def score(
    cfg: DetectorConfig,
    test,
    train=None,
    reference=None,
) -> ScoreVector:
    """
    Dispatch to the configured detector.

    For local methods ``train`` holds the training row (first row is used when a
    matrix is given) and ``reference`` defaults to ``test``.
    """
    if cfg.method is Method.ACG:
        return acg_score(test, train, cfg)
    if cfg.method is Method.GCG:
        return gcg_score(test, train, cfg)
    if train is None:
        raise ConfigError(f"{cfg.method.value} needs a training row")
    train_row = as_data_matrix(train)[0]
    if cfg.method is Method.ACL:
        return acl_score(test, train_row, cfg)
    return gcl_score(test, test if reference is None else reference, train_row, cfg)


def score_with_basis(test, basis: OrthogonalBasis, group: bool = False, workers: int = 1) -> ScoreVector:
    """
    Score unscaled rows against a previously fitted (and possibly reloaded) basis.

    The basis' own fit-time policy truncates the test rows; with ``group`` the
    test rows double as the reference set.
    """
    cfg = DetectorConfig.build(
        method=Method.GCL if group else Method.ACL,
        shape=basis.shape,
        policy=basis.policy,
        scaler=False,
        workers=workers,
    )
    (original,) = _prepare([test], cfg)
    compressed = _compress_rows(original, basis, cfg)
    return _group_compare(original, compressed) if group else _auto_compare(original, compressed)
