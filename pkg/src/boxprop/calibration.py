"""Comparison baselines: global confidence thresholding and three post-hoc
score calibrators (histogram binning, logistic/Platt scaling, beta
calibration).

Calibrators are fit on (score, correct) pairs and map scores into empirical
correctness probabilities; the baseline pipeline then keeps boxes whose
calibrated score clears 0.5. Scores are clipped away from {0, 1} before any
logit/log transform so application is total on [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .model import DataError, DetectionRecord

SCORE_CLIP = 1e-6
DEFAULT_BINS = 10


class DegenerateDataError(DataError):
    """Single-outcome fitting data: the likelihood has no interior optimum."""


def _clip(scores: np.ndarray) -> np.ndarray:
    return np.clip(scores, SCORE_CLIP, 1.0 - SCORE_CLIP)


def _logit(scores: np.ndarray) -> np.ndarray:
    s = _clip(scores)
    return np.log(s) - np.log1p(-s)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


@dataclass(frozen=True)
class CalibratorModel:
    """Fitted calibration map. ``kind`` is one of ``histogram_binning``,
    ``platt``, or ``beta``; ``parameters`` is kind-specific."""

    kind: str
    parameters: dict

    def apply(self, scores) -> np.ndarray:
        s = np.asarray(scores, dtype=np.float64)
        if self.kind == "histogram_binning":
            edges = np.asarray(self.parameters["edges"])
            values = np.asarray(self.parameters["values"])
            idx = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(values) - 1)
            return values[idx]
        if self.kind == "platt":
            a, b = self.parameters["a"], self.parameters["b"]
            return _sigmoid(a * _logit(s) + b)
        if self.kind == "beta":
            a, b, c = self.parameters["a"], self.parameters["b"], self.parameters["c"]
            sc = _clip(s)
            return _sigmoid(a * np.log(sc) - b * np.log1p(-sc) + c)
        raise ValueError(f"unknown calibrator kind {self.kind!r}")

    def dumps(self) -> str:
        return json.dumps({"kind": self.kind, "parameters": self.parameters})

    @staticmethod
    def loads(text: str) -> "CalibratorModel":
        doc = json.loads(text)
        return CalibratorModel(kind=doc["kind"], parameters=doc["parameters"])


def threshold_filter(records: Sequence[DetectionRecord], t: float) -> list[DetectionRecord]:
    """Keep records whose confidence strictly exceeds t, order preserved."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"threshold must lie in [0, 1], got {t!r}")
    return [rec for rec in records if rec.confidence > t]


def fit_histogram_binning(
    scores: Sequence[float], correct: Sequence[bool], num_bins: int = DEFAULT_BINS
) -> CalibratorModel:
    """Equal-width bins over [0, 1]; each bin maps to its fraction correct.

    Empty bins inherit the value of the nearest nonempty bin (ties toward the
    lower bin) so the fitted map is total without inventing probabilities.
    """
    scores = np.asarray(scores, dtype=np.float64)
    correct = np.asarray(correct, dtype=bool)
    if scores.shape != correct.shape:
        raise ValueError(f"scores and correctness lengths differ: "
                         f"{scores.shape} vs {correct.shape}")
    if scores.size == 0:
        raise ValueError("cannot fit on empty data")
    if num_bins < 1:
        raise ValueError(f"num_bins must be >= 1, got {num_bins}")

    edges = np.linspace(0.0, 1.0, num_bins + 1)
    idx = np.clip(np.searchsorted(edges, scores, side="right") - 1, 0, num_bins - 1)
    values = np.empty(num_bins)
    counts = np.bincount(idx, minlength=num_bins)
    for b in range(num_bins):
        values[b] = correct[idx == b].mean() if counts[b] else np.nan
    nonempty = np.nonzero(counts)[0]
    for b in np.nonzero(counts == 0)[0]:
        nearest = nonempty[np.argmin(np.abs(nonempty - b))]
        values[b] = values[nearest]
    return CalibratorModel(
        kind="histogram_binning",
        parameters={"edges": edges.tolist(), "values": values.tolist()},
    )


def _check_both_outcomes(correct: np.ndarray) -> None:
    if correct.all() or not correct.any():
        raise DegenerateDataError(
            "fitting data contains only one outcome; the maximum-likelihood fit "
            "diverges (fall back to plain thresholding)"
        )


def _minimize_nll(nll, grad, x0, bounds=None) -> np.ndarray:
    res = minimize(nll, x0, jac=grad, method="L-BFGS-B", bounds=bounds,
                   options={"ftol": 1e-12, "gtol": 1e-10, "maxiter": 500})
    return res.x


def fit_platt(scores: Sequence[float], correct: Sequence[bool]) -> CalibratorModel:
    """Logistic map s -> sigmoid(a * logit(s) + b) by maximum likelihood.

    Deterministic: fixed initialization (a=1, b=0) and a quasi-Newton
    line-search on the negative log-likelihood.
    """
    scores = np.asarray(scores, dtype=np.float64)
    correct = np.asarray(correct, dtype=bool)
    if scores.shape != correct.shape:
        raise ValueError("scores and correctness lengths differ")
    _check_both_outcomes(correct)
    x = _logit(scores)
    y = correct.astype(np.float64)

    def nll(params):
        z = params[0] * x + params[1]
        return float(np.where(z >= 0, np.log1p(np.exp(-z)) + (1.0 - y) * z,
                              np.log1p(np.exp(z)) - y * z).sum())

    def grad(params):
        d = _sigmoid(params[0] * x + params[1]) - y
        return np.array([(d * x).sum(), d.sum()])

    a, b = _minimize_nll(nll, grad, np.array([1.0, 0.0]))
    return CalibratorModel(kind="platt", parameters={"a": float(a), "b": float(b)})


def fit_beta(scores: Sequence[float], correct: Sequence[bool]) -> CalibratorModel:
    """Beta-calibration map s -> 1 / (1 + exp(-c) (1-s)^b / s^a), a, b >= 0.

    Equivalent to a logistic model on (log s, -log(1-s)); fitted by the same
    deterministic quasi-Newton scheme with the identity map (1, 1, 0) as the
    start and the sign constraints enforced through bounds.
    """
    scores = np.asarray(scores, dtype=np.float64)
    correct = np.asarray(correct, dtype=bool)
    if scores.shape != correct.shape:
        raise ValueError("scores and correctness lengths differ")
    _check_both_outcomes(correct)
    s = _clip(scores)
    y = correct.astype(np.float64)
    log_s = np.log(s)
    log_1ms = np.log1p(-s)

    def nll(params):
        z = params[0] * log_s - params[1] * log_1ms + params[2]
        return float(np.where(z >= 0, np.log1p(np.exp(-z)) + (1.0 - y) * z,
                              np.log1p(np.exp(z)) - y * z).sum())

    def grad(params):
        d = _sigmoid(params[0] * log_s - params[1] * log_1ms + params[2]) - y
        return np.array([(d * log_s).sum(), (-d * log_1ms).sum(), d.sum()])

    a, b, c = _minimize_nll(nll, grad, np.array([1.0, 1.0, 0.0]),
                            bounds=[(0.0, None), (0.0, None), (None, None)])
    return CalibratorModel(
        kind="beta", parameters={"a": float(a), "b": float(b), "c": float(c)}
    )
