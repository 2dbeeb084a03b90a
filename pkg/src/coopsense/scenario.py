"""Geometry and dB-domain Gaussian hypothesis models for a sensing network.

A primary transmitter (PT) sits at the origin and n secondary users (SUs)
are scattered in a square centered a distance ``pt_distance`` away.  When
the PT is on, the power each SU measures (in dB) is the deterministic
path-loss mean plus correlated log-normal shadowing; when it is off, the
measurements are pure detector noise.  Everything here stays in the dB
domain, where both effects are Gaussian and additive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PropagationParams",
    "NoiseParams",
    "Placement",
    "HypothesisModel",
    "ModelConstructionError",
    "mean_received_power",
    "sample_placement",
    "shadowing_correlation",
    "build_hypothesis_model",
]

# Relative diagonal jitter applied to the busy-hypothesis covariance when a
# degenerate geometry (coincident SUs) defeats the Cholesky factorization.
_COV_JITTER = 1e-10


class ModelConstructionError(RuntimeError):
    """The busy-hypothesis covariance is not positive definite, even jittered."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PropagationParams:
    """Deterministic path-loss parameters (dB domain).

    ``detector_mean_dbm`` is the detector calibration mean that every SU
    subtracts from its raw energy measurements, so model means are always
    expressed relative to it.
    """

    transmit_power_dbm: float
    antenna_const_db: float = 0.0
    path_loss_exponent: float = 3.3
    reference_distance: float = 1.0
    detector_mean_dbm: float = 0.0

    def __post_init__(self) -> None:
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be > 0")
        if self.reference_distance <= 0:
            raise ValueError("reference_distance must be > 0")


@dataclass(frozen=True)
class NoiseParams:
    """Detector-noise and shadowing variances (dB^2) and correlation length."""

    noise_var: float
    shadow_var: float
    decorr_distance: float

    def __post_init__(self) -> None:
        if self.noise_var <= 0:
            raise ValueError("noise_var must be > 0")
        if self.shadow_var < 0:
            raise ValueError("shadow_var must be >= 0")
        if self.decorr_distance <= 0:
            raise ValueError("decorr_distance must be > 0")

    @property
    def total_var(self) -> float:
        """Busy-hypothesis per-sensor variance: noise plus shadowing."""
        return self.noise_var + self.shadow_var


@dataclass(frozen=True, eq=False)
class Placement:
    """PT and SU coordinates with the derived distance tables."""

    pt_position: np.ndarray  # (2,)
    su_positions: np.ndarray  # (n, 2)
    pt_distances: np.ndarray  # (n,) PT-to-SU
    su_distances: np.ndarray  # (n, n) pairwise SU, zero diagonal

    @property
    def n(self) -> int:
        return self.su_positions.shape[0]

    @classmethod
    def from_positions(cls, pt_position, su_positions) -> "Placement":
        pt = _frozen_array(pt_position).reshape(2)
        sus = np.atleast_2d(np.asarray(su_positions, dtype=float))
        if sus.ndim != 2 or sus.shape[1] != 2 or sus.shape[0] < 1:
            raise ValueError("su_positions must be an (n, 2) array with n >= 1")
        diffs = sus[:, None, :] - sus[None, :, :]
        pair = np.sqrt((diffs**2).sum(axis=-1))
        pair = 0.5 * (pair + pair.T)  # exact symmetry for the correlation matrix
        np.fill_diagonal(pair, 0.0)
        return cls(
            pt_position=pt,
            su_positions=_frozen_array(sus),
            pt_distances=_frozen_array(np.hypot(sus[:, 0] - pt[0], sus[:, 1] - pt[1])),
            su_distances=_frozen_array(pair),
        )


@dataclass(frozen=True, eq=False)
class HypothesisModel:
    """Gaussian measurement model for both channel states.

    Idle: every entry iid N(0, sigma0_sq).  Busy: each time slot's n-vector
    is N(mu, cov_h1) with cov_h1 = sigma0_sq*I + shadow_var*shadow_corr,
    independent across slots.  ``norm_cov_h1`` is cov_h1 / sigma1_sq.
    """

    n: int
    m: int
    mu: np.ndarray  # (n,) dB, relative to the detector mean
    sigma0_sq: float
    sigma1_sq: float
    shadow_corr: np.ndarray  # (n, n), unit diagonal
    cov_h1: np.ndarray  # (n, n)
    norm_cov_h1: np.ndarray  # (n, n)
    chol_cov_h1: np.ndarray  # (n, n) lower Cholesky factor of cov_h1

    @property
    def nm(self) -> int:
        return self.n * self.m


def mean_received_power(d: float, prop: PropagationParams) -> float:
    """Deterministic received power at distance ``d``, relative to the
    detector mean (dB).  Shadowing is handled by the covariance, not here."""
    if d <= 0:
        raise ValueError("distance must be > 0")
    loss = 10.0 * prop.path_loss_exponent * np.log10(d / prop.reference_distance)
    return float(
        prop.transmit_power_dbm + prop.antenna_const_db - loss - prop.detector_mean_dbm
    )


def sample_placement(
    rng: np.random.Generator, n: int, edge: float, pt_distance: float
) -> Placement:
    """Drop n SUs uniformly in a square of side ``edge`` centered at
    (pt_distance, 0); the PT sits at the origin."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if edge < 0:
        raise ValueError("edge must be >= 0")
    if pt_distance <= 0:
        raise ValueError("pt_distance must be > 0")
    offsets = rng.uniform(-edge / 2.0, edge / 2.0, size=(n, 2))
    sus = offsets + np.array([pt_distance, 0.0])
    return Placement.from_positions(np.zeros(2), sus)


def shadowing_correlation(placement: Placement, d_c: float) -> np.ndarray:
    """Exponentially decaying shadowing correlation exp(-d_ij / d_c)."""
    if d_c <= 0:
        raise ValueError("decorrelation distance must be > 0")
    return np.exp(-placement.su_distances / d_c)


def build_hypothesis_model(
    placement: Placement,
    prop: PropagationParams,
    noise: NoiseParams,
    m: int,
) -> HypothesisModel:
    """Assemble the per-hypothesis Gaussian model for ``m`` time slots."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = placement.n
    mu = np.array([mean_received_power(d, prop) for d in placement.pt_distances])
    corr = shadowing_correlation(placement, noise.decorr_distance)
    sigma1_sq = noise.total_var
    cov = noise.noise_var * np.eye(n) + noise.shadow_var * corr
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        cov = cov + (_COV_JITTER * sigma1_sq) * np.eye(n)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ModelConstructionError(
                "busy-hypothesis covariance is not positive definite"
            ) from exc
    return HypothesisModel(
        n=n,
        m=int(m),
        mu=_frozen_array(mu),
        sigma0_sq=float(noise.noise_var),
        sigma1_sq=float(sigma1_sq),
        shadow_corr=_frozen_array(corr),
        cov_h1=_frozen_array(cov),
        norm_cov_h1=_frozen_array(cov / sigma1_sq),
        chol_cov_h1=_frozen_array(chol),
    )
