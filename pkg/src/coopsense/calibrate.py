"""Per-realization threshold calibration and missed-opportunity evaluation.

The fusion test declares the channel busy when the statistic exceeds a
threshold tau.  tau is set so the analytic interference probability (the
busy-state lower tail, where the channel is wrongly declared free) equals
the target beta, then the missed-opportunity probability (the idle-state
upper tail at the same tau) is read off the idle model.

The calibration root-find runs in saddle space: for s < 0 the map
s -> (tau(s), log P_int(s)) with tau(s) = mu'(s) is smooth and strictly
monotone, so one bracketed solve does the whole job with no nested
threshold search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .scenario import HypothesisModel
from .statistics import QuadraticForm, StatisticKind, quadratic_form
from .tailprob import (
    DegenerateThresholdError,
    GaussianMoments,
    SpectralForm,
    UnreachableThresholdError,
)

__all__ = [
    "CalibrationResult",
    "h0_moments",
    "h1_moments",
    "calibrate_threshold",
    "evaluate_realization",
]


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    p_int_log: float
    p_mo_log: float
    kind: StatisticKind


def h0_moments(model: HypothesisModel) -> GaussianMoments:
    """Idle channel: all n*m entries iid N(0, sigma0_sq)."""
    nm = model.nm
    return GaussianMoments(np.zeros(nm), model.sigma0_sq * np.eye(nm))


def h1_moments(model: HypothesisModel) -> GaussianMoments:
    """Busy channel: slot vectors iid N(mu, cov_h1), slot-major stacking."""
    return GaussianMoments(
        np.tile(model.mu, model.m), np.kron(np.eye(model.m), model.cov_h1)
    )


def _log_tail_at(form: SpectralForm, s: float) -> float:
    """Leading-term log tail probability at threshold tau = mu'(s)."""
    mu, dmu, ddmu = form.lmgf(s)
    return -0.5 * math.log(2.0 * math.pi * s * s * ddmu) - (s * dmu - mu)


def _calibrate_form(form: SpectralForm, beta: float) -> tuple[float, float]:
    """Solve log P_int(s) = log(beta) for s < 0; returns (tau, log P_int)."""
    if not 0.0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 1/2)")
    if form.variance <= 0.0:
        raise DegenerateThresholdError("statistic is constant under the busy model")
    log_beta = math.log(beta)

    def h(s: float) -> float:
        return _log_tail_at(form, s) - log_beta

    # log P_int(s) increases to +inf as s -> 0- and to -inf toward the
    # lower endpoint, so expand geometrically until the root is bracketed.
    s_lo = form.domain.s_lo
    hi = -1.0 / math.sqrt(form.variance)
    if hi <= s_lo:
        hi = 0.5 * s_lo
    for _ in range(1100):
        if h(hi) > 0.0:
            break
        hi *= 0.5
        if hi > -1e-280:
            raise UnreachableThresholdError("interference target unreachable near s=0")
    lo = hi
    for _ in range(1100):
        nxt = 2.0 * lo if math.isinf(s_lo) else 0.5 * (lo + s_lo)
        if abs(nxt) > 1e250 or nxt <= s_lo or nxt == lo:
            raise UnreachableThresholdError(
                f"interference probability {beta} unreachable on the lower tail"
            )
        lo = nxt
        try:
            if h(lo) < 0.0:
                break
        except ValueError as exc:  # probe hit the pole at double precision
            raise UnreachableThresholdError(
                f"interference probability {beta} unreachable on the lower tail"
            ) from exc
    else:
        raise UnreachableThresholdError(
            f"interference probability {beta} unreachable on the lower tail"
        )
    s_star = brentq(h, lo, hi, xtol=1e-300, rtol=8.9e-16)
    return form._dmu(s_star), _log_tail_at(form, s_star)


def calibrate_threshold(
    qf: QuadraticForm, h1: GaussianMoments, beta: float
) -> float:
    """Threshold whose busy-state lower-tail probability equals beta."""
    form = SpectralForm.from_quadratic(qf, h1)
    tau, _ = _calibrate_form(form, beta)
    return tau


def evaluate_realization(
    model: HypothesisModel, kind: StatisticKind, beta: float
) -> CalibrationResult:
    """Calibrate ``kind`` on one scenario realization and evaluate the
    missed-opportunity probability at the calibrated threshold."""
    qf = quadratic_form(kind, model)
    busy = SpectralForm.from_quadratic(qf, h1_moments(model))
    tau, p_int_log = _calibrate_form(busy, beta)
    idle = SpectralForm.from_quadratic(qf, h0_moments(model))
    p_mo_log = idle.tail_probability(tau, "upper").log_prob
    return CalibrationResult(
        threshold=tau, p_int_log=p_int_log, p_mo_log=p_mo_log, kind=kind
    )
