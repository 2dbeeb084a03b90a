"""Detection statistics computed at the fusion center.

Four statistics are supported on an n-sensor, m-slot measurement batch:

* ``llr``  - exact log-likelihood ratio (needs the full model),
* ``gllr`` - generalized LLR with ML plug-ins for the unknown busy-state
  mean and covariance shape,
* ``qm``   - quadratic mean of all measurements,
* ``lm``   - mean of squared per-sensor time averages.

All statistics carry the 1/(n*m) normalization.  LLR, QM and LM are exact
quadratic forms y'Ay + y'b + c of the stacked measurement vector; GLLR is
not (its plug-ins depend on the data).

Array-level helpers (``qm_values`` etc.) accept stacks shaped (..., n, m)
so Monte Carlo callers can evaluate many batches in one shot; the public
single-batch functions wrap them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .scenario import HypothesisModel

__all__ = [
    "StatisticKind",
    "MeasurementBatch",
    "QuadraticForm",
    "UnsupportedStatisticError",
    "qm_statistic",
    "lm_statistic",
    "llr_statistic",
    "gllr_statistic",
    "quadratic_form",
    "distributed_evaluate",
    "qm_values",
    "lm_values",
    "llr_values",
    "gllr_values",
    "su_summaries",
    "fuse_summaries",
]

# Relative eigenvalue cutoff below which a sample covariance counts as
# singular and gets diagonally loaded (only reachable when m > n).
_SINGULAR_EIG_RTOL = 1e-10


class UnsupportedStatisticError(ValueError):
    """Requested operation is undefined for this statistic kind."""


class StatisticKind(str, Enum):
    LLR = "llr"
    GLLR = "gllr"
    QM = "qm"
    LM = "lm"

    @classmethod
    def parse(cls, name: str) -> "StatisticKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown statistic {name!r}") from None


@dataclass(frozen=True, eq=False)
class MeasurementBatch:
    """dB-domain measurements; ``values[j, i]`` is sensor j at time slot i."""

    values: np.ndarray  # (n, m)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise ValueError("values must be a nonempty (n, m) matrix")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def vector(self) -> np.ndarray:
        """Stacked n*m vector: slot 0's n sensors first, then slot 1, ..."""
        return self.values.T.reshape(-1)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """T(y) = y'Ay + y'b + c on the stacked measurement vector."""

    a: np.ndarray  # (d, d) symmetric
    b: np.ndarray  # (d,)
    c: float

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("a must be square")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
            raise ValueError("a must be symmetric")
        if b.shape[0] != a.shape[0]:
            raise ValueError("b length must match a")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def evaluate(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape[0] != self.dim:
            raise ValueError("vector length must match the form dimension")
        return float(y @ self.a @ y + y @ self.b + self.c)


# ---------------------------------------------------------------------------
# Array-level evaluation on stacks shaped (..., n, m)
# ---------------------------------------------------------------------------


def su_summaries(kind: StatisticKind, values: np.ndarray) -> np.ndarray:
    """Stage-1 scalar each SU would report: time quadratic mean (QM) or
    time linear mean (LM).  Shape (..., n)."""
    values = np.asarray(values, dtype=float)
    if kind is StatisticKind.QM:
        return np.mean(values**2, axis=-1)
    if kind is StatisticKind.LM:
        return np.mean(values, axis=-1)
    raise UnsupportedStatisticError(f"{kind.value} has no per-SU summary")


def fuse_summaries(kind: StatisticKind, summaries: np.ndarray) -> np.ndarray:
    """Stage-2 fusion of per-SU summaries into the statistic value."""
    summaries = np.asarray(summaries, dtype=float)
    if kind is StatisticKind.QM:
        return np.mean(summaries, axis=-1)
    if kind is StatisticKind.LM:
        return np.mean(summaries**2, axis=-1)
    raise UnsupportedStatisticError(f"{kind.value} has no fusion rule")


def qm_values(values: np.ndarray) -> np.ndarray:
    return fuse_summaries(StatisticKind.QM, su_summaries(StatisticKind.QM, values))


def lm_values(values: np.ndarray) -> np.ndarray:
    return fuse_summaries(StatisticKind.LM, su_summaries(StatisticKind.LM, values))


def llr_values(values: np.ndarray, model: HypothesisModel) -> np.ndarray:
    """Exact normalized LLR, evaluated directly from the two log-densities."""
    values = np.asarray(values, dtype=float)
    n, m = values.shape[-2:]
    if (n, m) != (model.n, model.m):
        raise ValueError("batch shape does not match the model")
    prec = np.linalg.inv(model.cov_h1)
    logdet_cov = 2.0 * np.log(np.diag(model.chol_cov_h1)).sum()
    centered = values - model.mu[:, None]
    quad = np.einsum("...im,ij,...jm->...", centered, prec, centered)
    ssq = (values**2).sum(axis=(-2, -1))
    nm = n * m
    return (
        0.5 * nm * np.log(model.sigma0_sq)
        - 0.5 * m * logdet_cov
        - 0.5 * quad
        + ssq / (2.0 * model.sigma0_sq)
    ) / nm


def gllr_values(
    values: np.ndarray, sigma0_sq: float, sigma1_sq: float
) -> np.ndarray:
    """Generalized LLR with ML plug-ins for the busy-state mean and the
    normalized covariance shape (sample covariance over sigma1_sq).

    With m <= n the sample covariance is structurally rank deficient, so a
    diagonal load of 1e-6 * (tr(S)/n + sigma1_sq) is always applied there;
    for m > n it is applied only to numerically singular samples.
    """
    values = np.asarray(values, dtype=float)
    n, m = values.shape[-2:]
    if m < 2:
        raise ValueError("GLLR needs m >= 2 time slots")
    mu_hat = values.mean(axis=-1)
    centered = values - mu_hat[..., None]
    sample_cov = centered @ np.swapaxes(centered, -1, -2) / m
    norm_cov = sample_cov / sigma1_sq
    load = 1e-6 * (np.trace(sample_cov, axis1=-2, axis2=-1) / n + sigma1_sq)
    if m > n:
        eig = np.linalg.eigvalsh(norm_cov)
        singular = eig[..., 0] <= _SINGULAR_EIG_RTOL * np.maximum(eig[..., -1], 1.0)
        load = np.where(singular, load, 0.0)
    loaded = norm_cov + load[..., None, None] * np.eye(n)
    sign, logdet = np.linalg.slogdet(loaded)
    if np.any(sign <= 0):
        raise FloatingPointError("loaded sample covariance is not positive definite")
    # sum_i (y_i - mu_hat)' inv(loaded) (y_i - mu_hat) = m*sigma1_sq*tr(inv(loaded) @ norm_cov)
    tr = np.trace(np.linalg.solve(loaded, norm_cov), axis1=-2, axis2=-1)
    ssq = (values**2).sum(axis=(-2, -1))
    out = (
        0.5 * np.log(sigma0_sq / sigma1_sq)
        - logdet / (2.0 * n)
        - tr / (2.0 * n)
        + ssq / (2.0 * n * m * sigma0_sq)
    )
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("GLLR evaluation produced a non-finite value")
    return out


# ---------------------------------------------------------------------------
# Single-batch API
# ---------------------------------------------------------------------------


def qm_statistic(batch: MeasurementBatch) -> float:
    return float(qm_values(batch.values))


def lm_statistic(batch: MeasurementBatch) -> float:
    return float(lm_values(batch.values))


def llr_statistic(batch: MeasurementBatch, model: HypothesisModel) -> float:
    return float(llr_values(batch.values, model))


def gllr_statistic(
    batch: MeasurementBatch, sigma0_sq: float, sigma1_sq: float
) -> float:
    return float(gllr_values(batch.values, sigma0_sq, sigma1_sq))


def distributed_evaluate(kind: StatisticKind, batch: MeasurementBatch) -> float:
    """Two-stage SU-summary / FC-fusion evaluation.  Shares the reduction
    path of the direct statistic, so the results agree bit for bit."""
    return float(fuse_summaries(kind, su_summaries(kind, batch.values)))


def quadratic_form(kind: StatisticKind, model: HypothesisModel) -> QuadraticForm:
    """(A, b, c) representation of LLR/QM/LM under the slot-major stacking."""
    n, m, nm = model.n, model.m, model.nm
    if kind is StatisticKind.QM:
        return QuadraticForm(np.eye(nm) / nm, np.zeros(nm), 0.0)
    if kind is StatisticKind.LM:
        a = np.kron(np.ones((m, m)), np.eye(n)) / (n * m * m)
        return QuadraticForm(a, np.zeros(nm), 0.0)
    if kind is StatisticKind.LLR:
        prec = np.linalg.inv(model.cov_h1)
        logdet_cov = 2.0 * np.log(np.diag(model.chol_cov_h1)).sum()
        a = (np.eye(nm) / (2.0 * model.sigma0_sq) - np.kron(np.eye(m), prec) / 2.0) / nm
        b = np.tile(prec @ model.mu, m) / nm
        c = (
            0.5 * nm * np.log(model.sigma0_sq)
            - 0.5 * m * logdet_cov
            - 0.5 * m * model.mu @ prec @ model.mu
        ) / nm
        return QuadraticForm(a, b, c)
    raise UnsupportedStatisticError(
        "GLLR has no quadratic-form representation (data-dependent plug-ins)"
    )
