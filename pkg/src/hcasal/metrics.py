"""Saliency benchmark metrics: PR curves, F-measure, adaptive-threshold F,
and mean absolute error.

Maps are quantized to 8 bits before thresholding so curves computed in
memory match curves computed from the PNG outputs exactly.  Precision is
defined as 1 when no pixel passes a threshold (no false positives).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateGroundTruthError",
    "EvalCurves",
    "f_measure",
    "mae",
    "adaptive_f",
    "pr_curve",
    "curves_to_csv",
]

DEFAULT_BETA2 = 0.3


class DegenerateGroundTruthError(ValueError):
    """Ground truth with no foreground pixel; PR is undefined."""


@dataclass(frozen=True)
class EvalCurves:
    precision: np.ndarray  # (256,), per integer threshold 0..255
    recall: np.ndarray
    fbeta: np.ndarray
    mae: float
    adaptive_f: float


def f_measure(precision: float, recall: float, beta2: float = DEFAULT_BETA2) -> float:
    if precision == 0.0 and recall == 0.0:
        return 0.0
    return (1.0 + beta2) * precision * recall / (beta2 * precision + recall)


def mae(saliency: np.ndarray, gt: np.ndarray) -> float:
    if saliency.shape != gt.shape:
        raise ValueError("dimension mismatch")
    return float(np.abs(saliency - gt).mean())


def _quantize(saliency: np.ndarray) -> np.ndarray:
    return np.floor(saliency * 255.0 + 0.5) / 255.0


def adaptive_f(saliency: np.ndarray, gt: np.ndarray, beta2: float = DEFAULT_BETA2) -> float:
    """F-measure at twice the mean saliency value (threshold capped at 1)."""
    if saliency.shape != gt.shape:
        raise ValueError("dimension mismatch")
    s = _quantize(saliency)
    tau = min(2.0 * float(s.mean()), 1.0)
    fg = s >= tau
    gt_fg = gt >= 0.5
    tp = float(np.count_nonzero(fg & gt_fg))
    precision = tp / fg.sum() if fg.any() else 1.0
    recall = tp / gt_fg.sum() if gt_fg.any() else 0.0
    return f_measure(precision, recall, beta2)


def pr_curve(saliency: np.ndarray, gt: np.ndarray, beta2: float = DEFAULT_BETA2) -> EvalCurves:
    """Precision/recall/F over the 256 integer thresholds, plus MAE and the
    adaptive-threshold F."""
    if saliency.shape != gt.shape:
        raise ValueError("dimension mismatch")
    gt_fg = gt >= 0.5
    n_fg = int(gt_fg.sum())
    if n_fg == 0:
        raise DegenerateGroundTruthError("ground truth has no foreground pixel")

    q = np.floor(saliency * 255.0 + 0.5).astype(np.intp)
    hist_all = np.bincount(q.ravel(), minlength=256)
    hist_fg = np.bincount(q[gt_fg].ravel(), minlength=256)
    # selected at threshold tau: pixels with q >= tau
    sel = np.cumsum(hist_all[::-1])[::-1].astype(np.float64)
    tp = np.cumsum(hist_fg[::-1])[::-1].astype(np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(sel > 0, tp / sel, 1.0)
    recall = tp / n_fg
    fbeta = np.array([f_measure(p, r, beta2) for p, r in zip(precision, recall)])
    return EvalCurves(
        precision=precision,
        recall=recall,
        fbeta=fbeta,
        mae=mae(saliency, gt.astype(np.float64)),
        adaptive_f=adaptive_f(saliency, gt, beta2),
    )


def curves_to_csv(curves: EvalCurves) -> str:
    out = io.StringIO()
    out.write("threshold,precision,recall,fbeta\n")
    for tau in range(256):
        out.write(
            f"{tau},{curves.precision[tau]:.8f},{curves.recall[tau]:.8f},{curves.fbeta[tau]:.8f}\n"
        )
    return out.getvalue()
