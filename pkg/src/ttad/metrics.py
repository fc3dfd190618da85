"""
ROC curve, AUROC and confusion matrix for normality scores.

Anomalies are the positive class (label 1) and the anomaly score is ``-d``, so a
perfect detector scores AUROC 1 and a perfectly inverted one AUROC 0. The
reported threshold is on ``d`` itself: rows with ``d <= threshold`` are called
anomalous.
"""

import logging

import numpy as np
from pydantic import BaseModel

from config import SCORE_TIE_TOL
from ttad.errors import DimensionError, EvaluationError

logger = logging.getLogger(__name__)


class RocReport(BaseModel):
    """
    Evaluation of one score vector.

    ``confusion`` is ``[[tn, fp], [fn, tp]]``. ``degenerate`` marks score vectors
    whose spread is within ``SCORE_TIE_TOL`` of their magnitude; they are
    evaluated as one tie.
    """

    points: list[tuple[float, float]]
    auroc: float
    threshold: float
    confusion: list[list[int]]
    accuracy: float
    degenerate: bool

    @property
    def tn(self) -> int:
        return self.confusion[0][0]

    @property
    def fp(self) -> int:
        return self.confusion[0][1]

    @property
    def fn(self) -> int:
        return self.confusion[1][0]

    @property
    def tp(self) -> int:
        return self.confusion[1][1]


def roc_auroc(scores, labels) -> RocReport:
    """
    Evaluate normality scores against binary labels.

    Parameters
    ----------
    scores : array-like
        Decision values ``d`` (larger means more normal).
    labels : array-like
        1 for anomalous rows, 0 for normal rows.

    Returns
    -------
    RocReport
        One ROC vertex per distinct score, trapezoidal AUROC, and the threshold that
        maximizes accuracy (ties go to the lower threshold).

    Raises
    ------
    EvaluationError
        If the labels hold a single class or values other than 0 and 1.
    """
    d = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if d.shape != y.shape:
        raise DimensionError(f"{d.size} scores for {y.size} labels")
    if not np.isin(y, (0, 1)).all():
        raise EvaluationError("labels must be binary (0 normal, 1 anomalous)")
    y = y.astype(int)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError(f"need both classes, got {n_neg} normal and {n_pos} anomalous")

    # Sweep thresholds from the lowest d (most anomalous) upwards.
    order = np.argsort(d, kind="stable")
    d_sorted = d[order]
    y_sorted = y[order]
    # Only exact ties share a vertex, unless the whole vector is flat to SCORE_TIE_TOL.
    degenerate = bool(np.ptp(d) <= SCORE_TIE_TOL * np.abs(d).max())
    if degenerate:
        logger.warning("all %d scores tie; the ROC curve is the diagonal", d.size)
        first = np.zeros(1, dtype=int)
    else:
        first = np.concatenate([[0], np.flatnonzero(np.diff(d_sorted) > 0) + 1])
    last = np.append(first[1:], d.size) - 1
    distinct = d_sorted[last]
    tp = np.cumsum(y_sorted)[last]
    fp = np.cumsum(1 - y_sorted)[last]

    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    auroc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))

    correct = tp + (n_neg - fp)
    best = int(np.argmax(correct))
    tp_best, fp_best = int(tp[best]), int(fp[best])
    confusion = [[n_neg - fp_best, fp_best], [n_pos - tp_best, tp_best]]

    return RocReport(
        points=list(zip(fpr.tolist(), tpr.tolist())),
        auroc=auroc,
        threshold=float(distinct[best]),
        confusion=confusion,
        accuracy=float(correct[best]) / d.size,
        degenerate=degenerate,
    )
