"""Monte Carlo batch generation and empirical error probabilities.

The GLLR has no quadratic-form representation, so its threshold and error
probabilities are always estimated empirically: the threshold is an order
statistic of busy-state samples, and the missed-opportunity probability is
counted on a fresh, independently seeded idle-state stream (fresh samples
avoid the selection bias of reusing the calibration draw).

Batches are generated in fixed-size chunks and merged by exact integer
counts, so results depend only on the seed, never on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .scenario import HypothesisModel
from .statistics import (
    MeasurementBatch,
    StatisticKind,
    gllr_values,
    llr_values,
    lm_values,
    qm_values,
)

__all__ = [
    "Hypothesis",
    "McEstimate",
    "sample_batch",
    "sample_values",
    "statistic_values",
    "estimate_tail_mc",
    "empirical_threshold",
    "gllr_missed_opportunity",
    "derive_seed",
]

_CHUNK = 1 << 14

# Relative slack when turning beta * n_samples into an order-statistic
# index; absorbs float roundoff like 0.29 * 100 = 28.999999999999996.
_INDEX_GUARD = 1e-9


class Hypothesis(str, Enum):
    H0 = "h0"  # channel idle: detector noise only
    H1 = "h1"  # channel busy: path-loss mean plus correlated shadowing


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    n_samples: int
    seed: int


def derive_seed(base_seed: int, *key: int) -> int:
    """Stable 64-bit substream seed for (base_seed, key...).  Independent of
    call order, so parallel schedules reproduce serial results exactly."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=tuple(key))
    return int.from_bytes(ss.generate_state(2, dtype=np.uint32).tobytes(), "little")


def sample_values(
    model: HypothesisModel,
    hyp: Hypothesis,
    rng: np.random.Generator,
    count: int,
) -> np.ndarray:
    """(count, n, m) stack of measurement matrices under the hypothesis."""
    if count < 1:
        raise ValueError("count must be >= 1")
    z = rng.standard_normal((count, model.n, model.m))
    if hyp is Hypothesis.H0:
        return math.sqrt(model.sigma0_sq) * z
    # slot columns are iid N(mu, cov_h1); reuse the model's Cholesky factor
    return np.einsum("ij,cjm->cim", model.chol_cov_h1, z) + model.mu[:, None]


def sample_batch(
    model: HypothesisModel, hyp: Hypothesis, rng: np.random.Generator
) -> MeasurementBatch:
    return MeasurementBatch(sample_values(model, hyp, rng, 1)[0])


def statistic_values(
    kind: StatisticKind, model: HypothesisModel, values: np.ndarray
) -> np.ndarray:
    """Evaluate ``kind`` on a (..., n, m) stack of batches."""
    if kind is StatisticKind.QM:
        return qm_values(values)
    if kind is StatisticKind.LM:
        return lm_values(values)
    if kind is StatisticKind.LLR:
        return llr_values(values, model)
    return gllr_values(values, model.sigma0_sq, model.sigma1_sq)


def _chunk_sizes(total: int) -> list[int]:
    sizes = [_CHUNK] * (total // _CHUNK)
    if total % _CHUNK:
        sizes.append(total % _CHUNK)
    return sizes


def estimate_tail_mc(
    kind: StatisticKind,
    model: HypothesisModel,
    hyp: Hypothesis,
    tau: float,
    side: str,
    n_samples: int,
    seed: int,
) -> McEstimate:
    """Fraction of sampled statistics strictly on ``side`` of ``tau``."""
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    for size in _chunk_sizes(n_samples):
        t = statistic_values(kind, model, sample_values(model, hyp, rng, size))
        hits += int((t > tau).sum() if side == "above" else (t < tau).sum())
    p_hat = hits / n_samples
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / n_samples)
    return McEstimate(p_hat=p_hat, stderr=stderr, n_samples=n_samples, seed=int(seed))


def empirical_threshold(
    kind: StatisticKind,
    model: HypothesisModel,
    beta: float,
    n_samples: int,
    seed: int,
) -> float:
    """ceil(beta * n_samples)-th order statistic of the busy-state sample
    (the empirical beta-quantile, no interpolation)."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if beta * n_samples < 100.0 * (1.0 - _INDEX_GUARD):
        raise ValueError(
            f"n_samples*beta = {beta * n_samples:g} < 100: quantile not resolvable"
        )
    rng = np.random.default_rng(seed)
    values = np.empty(n_samples)
    pos = 0
    for size in _chunk_sizes(n_samples):
        values[pos : pos + size] = statistic_values(
            kind, model, sample_values(model, Hypothesis.H1, rng, size)
        )
        pos += size
    k = math.ceil(beta * n_samples * (1.0 - _INDEX_GUARD))
    return float(np.partition(values, k - 1)[k - 1])


def gllr_missed_opportunity(
    model: HypothesisModel,
    beta: float,
    n_samples: int,
    threshold_seed: int,
    tail_seed: int,
) -> tuple[float, McEstimate]:
    """Full empirical GLLR pipeline for one realization: calibrate the
    threshold on busy-state samples, then estimate the missed-opportunity
    probability on an independent idle-state stream."""
    tau = empirical_threshold(
        StatisticKind.GLLR, model, beta, n_samples, threshold_seed
    )
    est = estimate_tail_mc(
        StatisticKind.GLLR, model, Hypothesis.H0, tau, "above", n_samples, tail_seed
    )
    return tau, est
