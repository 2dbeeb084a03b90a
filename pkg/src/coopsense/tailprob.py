"""Analytic tail probabilities of Gaussian quadratic forms.

For T(y) = y'Ay + y'b + c with y ~ N(mean, cov), a whitening change of
variables y = mean + L x (cov = L L') followed by an eigendecomposition of
W = L'AL splits T into independent one-dimensional pieces

    T = sum_i (lam_i u_i^2 + g_i u_i) + offset,      u_i iid N(0, 1),

so the log moment generating function and its derivatives reduce to sums
of rational terms (let v_i = 1 - 2 s lam_i, valid while all v_i > 0):

    mu(s)   = sum_i [ -log(v_i)/2 + s^2 g_i^2 / (2 v_i) ] + s*offset
    mu'(s)  = sum_i [ lam_i/v_i + g_i^2 s (1 - s lam_i) / v_i^2 ] + offset
    mu''(s) = sum_i [ 2 lam_i^2 / v_i^2 + g_i^2 / v_i^3 ]

The tail estimate is the leading saddlepoint term

    P(T > tau) ~ exp(mu(s*) - s* mu'(s*)) / sqrt(2 pi s*^2 mu''(s*))

with s* > 0 solving mu'(s*) = tau (s* < 0 for the lower tail).  All
probabilities are carried in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .statistics import QuadraticForm

__all__ = [
    "GaussianMoments",
    "SaddleDomain",
    "TailResult",
    "SpectralForm",
    "DegenerateThresholdError",
    "UnreachableThresholdError",
    "lmgf_with_derivatives",
    "saddle_domain",
    "solve_saddle",
    "tail_probability",
]

Tail = Literal["upper", "lower"]

_SADDLE_RTOL = 1e-10  # |mu'(s*) - tau| <= _SADDLE_RTOL * max(1, |tau|)
_DEGENERATE_RTOL = 1e-12


class DegenerateThresholdError(ValueError):
    """Threshold coincides with (or sits on the wrong side of) E[T]."""


class UnreachableThresholdError(ValueError):
    """Threshold is outside the range of mu' over the open saddle domain."""


@dataclass(frozen=True, eq=False)
class GaussianMoments:
    """Mean vector and positive-definite covariance of the stacked vector."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValueError("cov must be square and match the mean length")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class SaddleDomain:
    """Open interval of s where the LMGF converges; always contains 0."""

    s_lo: float
    s_hi: float

    def contains(self, s: float) -> bool:
        return self.s_lo < s < self.s_hi


@dataclass(frozen=True)
class TailResult:
    """log_prob = log_prefactor - exponent; exponent >= 0."""

    log_prob: float
    exponent: float
    log_prefactor: float
    saddle: float

    @property
    def prob(self) -> float:
        return math.exp(self.log_prob)


@dataclass(frozen=True, eq=False)
class SpectralForm:
    """Quadratic form reduced to independent 1-D components (see module doc).

    Immutable once built; safe to share across threads.
    """

    lam: np.ndarray
    lin: np.ndarray
    offset: float
    domain: SaddleDomain

    @classmethod
    def from_quadratic(cls, qf: QuadraticForm, mom: GaussianMoments) -> "SpectralForm":
        if qf.dim != mom.dim:
            raise ValueError("form and moments dimensions differ")
        chol = np.linalg.cholesky(mom.cov)  # LinAlgError if not PD
        w = chol.T @ qf.a @ chol
        lam, vec = np.linalg.eigh(0.5 * (w + w.T))
        # Snap numerically-zero eigenvalues so PSD forms get honest domains.
        cutoff = qf.dim * np.finfo(float).eps * max(1e-300, float(np.abs(lam).max()))
        lam = np.where(np.abs(lam) <= cutoff, 0.0, lam)
        lin = vec.T @ (chol.T @ (2.0 * (qf.a @ mom.mean) + qf.b))
        offset = float(mom.mean @ qf.a @ mom.mean + qf.b @ mom.mean + qf.c)
        lam_max = float(lam.max(initial=0.0))
        lam_min = float(lam.min(initial=0.0))
        s_hi = 1.0 / (2.0 * lam_max) if lam_max > 0 else math.inf
        s_lo = 1.0 / (2.0 * lam_min) if lam_min < 0 else -math.inf
        return cls(lam=lam, lin=lin, offset=offset, domain=SaddleDomain(s_lo, s_hi))

    def _component_factors(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        """v_i = 1 - 2 s lam_i plus the overflow-safe ratio s/v_i."""
        if not self.domain.contains(s):
            raise ValueError(
                f"s={s} outside the saddle domain ({self.domain.s_lo}, {self.domain.s_hi})"
            )
        v = 1.0 - 2.0 * s * self.lam
        if v.min(initial=1.0) <= 0.0:
            raise ValueError(f"s={s} outside the saddle domain (roundoff at endpoint)")
        return v, s / v

    def lmgf(self, s: float) -> tuple[float, float, float]:
        """(mu, mu', mu'') at s; raises if s is outside the open domain."""
        s = float(s)
        v, sv = self._component_factors(s)
        lam, g2 = self.lam, self.lin**2
        mu = float(
            -0.5 * np.log1p(-2.0 * s * lam).sum()
            + 0.5 * s * (g2 * sv).sum()
            + s * self.offset
        )
        dmu = self._dmu_terms(s, v, sv)
        ddmu = float(2.0 * ((lam / v) ** 2).sum() + (g2 / v**3).sum())
        return mu, dmu, ddmu

    def _dmu_terms(self, s: float, v: np.ndarray, sv: np.ndarray) -> float:
        g2 = self.lin**2
        return float(
            (self.lam / v).sum()
            + (g2 * sv * ((1.0 - s * self.lam) / v)).sum()
            + self.offset
        )

    def _dmu(self, s: float) -> float:
        v, sv = self._component_factors(float(s))
        return self._dmu_terms(float(s), v, sv)

    @property
    def mean(self) -> float:
        """E[T] = mu'(0)."""
        return float(self.lam.sum() + self.offset)

    @property
    def variance(self) -> float:
        """Var[T] = mu''(0)."""
        return float(2.0 * (self.lam**2).sum() + (self.lin**2).sum())

    # -- saddle solving ----------------------------------------------------

    def _bracket(self, tau: float, tail: Tail) -> tuple[float, float]:
        """[lo, hi] with mu'(lo) <= tau <= mu'(hi), both inside the domain."""
        upper = tail == "upper"
        endpoint = self.domain.s_hi if upper else self.domain.s_lo
        reached = (lambda d: d >= tau) if upper else (lambda d: d <= tau)
        prev = 0.0
        if math.isinf(endpoint):
            var = self.variance
            scale = 1.0 / math.sqrt(var) if var > 0 else 1.0
            s = scale if upper else -scale
            while abs(s) < 1e250:
                if reached(self._dmu(s)):
                    return (prev, s) if upper else (s, prev)
                prev = s
                s *= 2.0
        else:
            for k in range(1, 60):
                s = endpoint * (1.0 - 0.5**k)
                try:
                    d = self._dmu(s)
                except ValueError:  # roundoff pushed the probe past the pole
                    break
                if reached(d):
                    return (prev, s) if upper else (s, prev)
                prev = s
        raise UnreachableThresholdError(
            f"threshold {tau} is outside the range of mu' on the {tail} side"
        )

    def solve_saddle(self, tau: float, tail: Tail) -> float:
        """Root of mu'(s) = tau with the sign matching the tail.

        Safeguarded Newton: the bracket shrinks monotonically and any
        Newton step leaving it is replaced by bisection.
        """
        if tail not in ("upper", "lower"):
            raise ValueError("tail must be 'upper' or 'lower'")
        tau = float(tau)
        mean = self.mean
        gap = (tau - mean) if tail == "upper" else (mean - tau)
        if gap <= _DEGENERATE_RTOL * max(1.0, abs(tau), abs(mean)):
            raise DegenerateThresholdError(
                f"threshold {tau} does not separate from E[T]={mean} on the {tail} tail"
            )
        lo, hi = self._bracket(tau, tail)
        if tail == "upper":
            s = hi
        else:
            s = lo
        tol = _SADDLE_RTOL * max(1.0, abs(tau))
        for _ in range(200):
            _, dmu, ddmu = self.lmgf(s)
            f = dmu - tau
            if abs(f) <= tol:
                return s
            if f < 0.0:
                lo = s
            else:
                hi = s
            s_new = s - f / ddmu if ddmu > 0 else math.nan
            if not (lo < s_new < hi) or not math.isfinite(s_new):
                s_new = 0.5 * (lo + hi)
            if s_new == s or (hi - lo) <= 4.0 * np.spacing(max(abs(lo), abs(hi))):
                return s  # bracket exhausted at double precision
            s = s_new
        return s

    def tail_probability(self, tau: float, tail: Tail) -> TailResult:
        s = self.solve_saddle(tau, tail)
        mu, dmu, ddmu = self.lmgf(s)
        exponent = max(0.0, s * dmu - mu)
        log_prefactor = -0.5 * math.log(2.0 * math.pi * s * s * ddmu)
        return TailResult(
            log_prob=log_prefactor - exponent,
            exponent=exponent,
            log_prefactor=log_prefactor,
            saddle=s,
        )


# ---------------------------------------------------------------------------
# Functional API
# ---------------------------------------------------------------------------


def lmgf_with_derivatives(
    qf: QuadraticForm, mom: GaussianMoments, s: float
) -> tuple[float, float, float]:
    return SpectralForm.from_quadratic(qf, mom).lmgf(s)


def saddle_domain(qf: QuadraticForm, mom: GaussianMoments) -> SaddleDomain:
    return SpectralForm.from_quadratic(qf, mom).domain


def solve_saddle(
    qf: QuadraticForm, mom: GaussianMoments, tau: float, tail: Tail
) -> float:
    return SpectralForm.from_quadratic(qf, mom).solve_saddle(tau, tail)


def tail_probability(
    qf: QuadraticForm, mom: GaussianMoments, tau: float, tail: Tail
) -> TailResult:
    return SpectralForm.from_quadratic(qf, mom).tail_probability(tau, tail)
