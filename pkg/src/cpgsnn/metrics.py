"""Forecasting metrics: coefficient of determination and root relative
squared error, computed exactly as defined for (samples, channels, horizon)
arrays.

R^2 averages the per-element ratio 1 - (Y - Yhat)^2 / (Y - Ybar_{c,l})^2
over all M*C*L elements, where Ybar_{c,l} is the per-(channel, horizon)
mean over samples.  Elements whose denominator is zero are excluded and
counted in the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetricReport:
    r2: float
    rse: float
    n_samples: int
    n_channels: int
    pred_len: int
    r2_excluded: int = 0
    per_horizon_r2: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "r2": self.r2,
            "rse": self.rse,
            "n_samples": self.n_samples,
            "n_channels": self.n_channels,
            "pred_len": self.pred_len,
            "r2_excluded": self.r2_excluded,
            "per_horizon_r2": self.per_horizon_r2,
        }


def _check_shapes(pred: np.ndarray, target: np.ndarray):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    if pred.ndim != 3:
        raise ValueError(f"expected (M, L, C) arrays, got {pred.shape}")
    return pred, target


def compute_r2(pred: np.ndarray, target: np.ndarray,
               return_excluded: bool = False):
    """Element-ratio R^2; zero-variance elements excluded with a count."""
    pred, target = _check_shapes(pred, target)
    mean = target.mean(axis=0, keepdims=True)  # per-(horizon, channel)
    denom = (target - mean) ** 2
    num = (target - pred) ** 2
    valid = denom != 0.0
    n_excluded = int((~valid).sum())
    if valid.sum() == 0:
        raise ValueError("all elements have zero variance; R^2 undefined")
    terms = 1.0 - num[valid] / denom[valid]
    r2 = float(terms.mean())
    if return_excluded:
        return r2, n_excluded
    return r2


def compute_rse(pred: np.ndarray, target: np.ndarray) -> float:
    """sqrt of total squared error over total deviation from the per-(l,c)
    sample-mean matrix."""
    pred, target = _check_shapes(pred, target)
    mean = target.mean(axis=0, keepdims=True)
    denom = ((target - mean) ** 2).sum()
    if denom == 0.0:
        raise ValueError("constant target; RSE undefined")
    num = ((target - pred) ** 2).sum()
    return float(np.sqrt(num / denom))


def evaluate(pred: np.ndarray, target: np.ndarray) -> MetricReport:
    pred, target = _check_shapes(pred, target)
    r2, excluded = compute_r2(pred, target, return_excluded=True)
    per_h = []
    for l in range(target.shape[1]):
        try:
            per_h.append(compute_r2(pred[:, l:l + 1, :], target[:, l:l + 1, :]))
        except ValueError:
            per_h.append(float("nan"))
    return MetricReport(
        r2=r2,
        rse=compute_rse(pred, target),
        n_samples=target.shape[0],
        n_channels=target.shape[2],
        pred_len=target.shape[1],
        r2_excluded=excluded,
        per_horizon_r2=per_h,
    )
