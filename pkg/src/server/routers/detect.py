""" This module defines the FastAPI router for scoring and evaluating datasets. """

from typing import Optional, Union

from fastapi import APIRouter, Request
from pydantic import BaseModel
from starlette.concurrency import run_in_threadpool

from server.server_config import RATE_LIMIT
from server.server_utils import check_payload_size, limiter
from ttad.detectors import DetectorConfig, Method, Mode, infer_mode, score
from ttad.errors import TTADError
from ttad.metrics import RocReport, roc_auroc
from ttad.svd_engine import TruncationPolicy
from ttad.tensor_core import FactorShape

router = APIRouter(prefix="/api")


class ScoreRequest(BaseModel):
    data: list[list[float]]
    train: Optional[list[list[float]]] = None
    reference: Optional[list[list[float]]] = None
    method: Method = Method.ACG
    shape: list[int]
    tau: Union[float, list[float]]
    scaler: bool = True
    mode: Optional[Mode] = None


class ScoreResponse(BaseModel):
    scores: list[float]
    flagged: list[bool]


class EvaluateRequest(BaseModel):
    data: list[list[float]]
    labels: list[int]
    train: Optional[list[list[float]]] = None
    method: Method = Method.ACG
    shape: list[int]
    taus: list[float]
    scaler: bool = True
    mode: Optional[Mode] = None


class EvaluateRecord(BaseModel):
    tau: float
    roc: RocReport


def _config(payload: Union[ScoreRequest, EvaluateRequest], tau) -> DetectorConfig:
    return DetectorConfig.build(
        method=payload.method,
        shape=FactorShape.parse(payload.shape),
        policy=TruncationPolicy.of(tau),
        scaler=payload.scaler,
        mode=infer_mode(payload.method, payload.mode, payload.train is not None),
        workers=1,
    )


def _score(payload: ScoreRequest) -> ScoreResponse:
    result = score(_config(payload, payload.tau), payload.data, payload.train, payload.reference)
    return ScoreResponse(scores=result.values.tolist(), flagged=result.flagged.tolist())


def _evaluate(payload: EvaluateRequest) -> list[EvaluateRecord]:
    records = []
    for tau in payload.taus:
        try:
            result = score(_config(payload, tau), payload.data, payload.train)
            records.append(EvaluateRecord(tau=tau, roc=roc_auroc(result.values, payload.labels)))
        except TTADError as exc:
            raise exc.at_tau(tau) from exc
    return records


@router.post("/score", response_model=ScoreResponse)
@limiter.limit(RATE_LIMIT)
async def score_rows(request: Request, payload: ScoreRequest) -> ScoreResponse:
    """
    Score every row of ``data`` with the requested detector.

    Parameters
    ----------
    request : Request
        The incoming request object, used by the rate limiter.
    payload : ScoreRequest
        Data, optional training rows, detector and compression factor.

    Returns
    -------
    ScoreResponse
        One decision value per data row and the zero-norm flags.
    """
    check_payload_size(payload.data, payload.train, payload.reference)
    return await run_in_threadpool(_score, payload)


@router.post("/evaluate", response_model=list[EvaluateRecord])
@limiter.limit(RATE_LIMIT)
async def evaluate_rows(request: Request, payload: EvaluateRequest) -> list[EvaluateRecord]:
    """
    Sweep ``taus`` over labelled data and return one ROC report per value.

    Labels are binary, 1 marking anomalous rows.
    """
    check_payload_size(payload.data, payload.train)
    return await run_in_threadpool(_evaluate, payload)
