"""Sweep driver: average missed-opportunity probability versus the
shadowing-to-noise ratio alpha, over random sensor placements.

For each alpha the same seeded placements are shared by every requested
statistic, so curve comparisons are paired.  LLR, QM and LM use the
analytic calibration path; GLLR uses the empirical Monte Carlo pipeline.
Per-placement substreams are keyed by (alpha index, placement index), so
any parallel schedule reproduces the serial output byte for byte.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibrate import evaluate_realization
from .mcsim import derive_seed, gllr_missed_opportunity
from .scenario import NoiseParams, PropagationParams, build_hypothesis_model, sample_placement
from .statistics import StatisticKind
from .tailprob import DegenerateThresholdError, UnreachableThresholdError

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "ConfigError",
    "ExclusionBudgetError",
    "parse_config_file",
    "run_sweep",
    "rows_to_csv",
    "write_csv",
    "DEFAULT_ALPHA_GRID",
]

DEFAULT_ALPHA_GRID = tuple(float(a) for a in np.logspace(-1.0, 1.0, 15))

# A sweep row fails if more than this fraction of its realizations is lost
# to degenerate/unreachable thresholds.
_EXCLUSION_BUDGET = 0.10

CSV_HEADER = "statistic,alpha,p_mo_mean,p_mo_stderr,n_placements,n_excluded,seed"


class ConfigError(ValueError):
    """Malformed experiment configuration (file or flags)."""


class ExclusionBudgetError(RuntimeError):
    """Too many realizations were excluded for a sweep row."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 10
    m: int = 10
    beta: float = 0.01
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    sigma0_sq: float = 1.0
    n_placements: int = 200
    mc_samples: int = 100_000
    seed: int = 20260809
    statistics: tuple[StatisticKind, ...] = (
        StatisticKind.LLR,
        StatisticKind.QM,
        StatisticKind.LM,
    )
    transmit_power_dbm: float = 0.97
    antenna_const_db: float = 0.0
    path_loss_exponent: float = 3.3
    reference_distance: float = 1.0
    detector_mean_dbm: float = 0.0
    decorr_distance: float = 0.14
    square_edge: float = 0.1
    pt_distance: float = 1.0
    output_path: str = "sweep.csv"

    def __post_init__(self) -> None:
        if not self.alpha_grid or any(a <= 0 for a in self.alpha_grid):
            raise ConfigError("alpha_grid must be nonempty and strictly positive")
        if self.n_placements < 1:
            raise ConfigError("n_placements must be >= 1")
        if not self.statistics:
            raise ConfigError("at least one statistic must be requested")
        if not 0.0 < self.beta < 0.5:
            raise ConfigError("beta must lie in (0, 1/2)")

    def propagation(self) -> PropagationParams:
        return PropagationParams(
            transmit_power_dbm=self.transmit_power_dbm,
            antenna_const_db=self.antenna_const_db,
            path_loss_exponent=self.path_loss_exponent,
            reference_distance=self.reference_distance,
            detector_mean_dbm=self.detector_mean_dbm,
        )

    def noise(self, alpha: float) -> NoiseParams:
        return NoiseParams(
            noise_var=self.sigma0_sq,
            shadow_var=alpha * self.sigma0_sq,
            decorr_distance=self.decorr_distance,
        )


@dataclass(frozen=True)
class SweepRow:
    statistic: StatisticKind
    alpha: float
    p_mo_mean: float
    p_mo_stderr: float
    n_placements: int  # realizations included in the average
    n_excluded: int
    seed: int


# ---------------------------------------------------------------------------
# Config file parsing: line-oriented "key = value", '#' comments, blank
# lines ignored, unknown or repeated keys rejected.
# ---------------------------------------------------------------------------


def _parse_statistics(text: str) -> tuple[StatisticKind, ...]:
    kinds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        kind = StatisticKind.parse(part)
        if kind not in kinds:
            kinds.append(kind)
    if not kinds:
        raise ValueError("empty statistics list")
    return tuple(kinds)


def _parse_alpha_grid(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


_FIELD_PARSERS = {
    "n": int,
    "m": int,
    "beta": float,
    "alpha_grid": _parse_alpha_grid,
    "sigma0_sq": float,
    "n_placements": int,
    "mc_samples": int,
    "seed": int,
    "statistics": _parse_statistics,
    "transmit_power_dbm": float,
    "antenna_const_db": float,
    "path_loss_exponent": float,
    "reference_distance": float,
    "detector_mean_dbm": float,
    "decorr_distance": float,
    "square_edge": float,
    "pt_distance": float,
    "output_path": str,
}


def parse_config_file(path: str | Path) -> ExperimentConfig:
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: repeated key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    try:
        return ExperimentConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------


def _evaluate_placement(
    task: tuple[ExperimentConfig, int, float, int]
) -> tuple[int, int, dict[StatisticKind, float | None]]:
    """One (alpha, placement) realization; returns per-statistic P_mo
    (None marks an excluded degenerate realization)."""
    config, a_idx, alpha, p_idx = task
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(a_idx, p_idx, 0))
    )
    placement = sample_placement(
        rng, config.n, config.square_edge, config.pt_distance
    )
    model = build_hypothesis_model(
        placement, config.propagation(), config.noise(alpha), config.m
    )
    out: dict[StatisticKind, float | None] = {}
    for kind in config.statistics:
        if kind is StatisticKind.GLLR:
            _, est = gllr_missed_opportunity(
                model,
                config.beta,
                config.mc_samples,
                derive_seed(config.seed, a_idx, p_idx, 1),
                derive_seed(config.seed, a_idx, p_idx, 2),
            )
            out[kind] = est.p_hat
        else:
            try:
                result = evaluate_realization(model, kind, config.beta)
                out[kind] = min(1.0, math.exp(result.p_mo_log))
            except (DegenerateThresholdError, UnreachableThresholdError):
                out[kind] = None
    return a_idx, p_idx, out


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (statistic, alpha) pair averaged over shared seeded
    placements.  Rows come back sorted by (statistic value, alpha)."""
    tasks = [
        (config, a_idx, alpha, p_idx)
        for a_idx, alpha in enumerate(config.alpha_grid)
        for p_idx in range(config.n_placements)
    ]
    if workers > 1:
        chunksize = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_placement, tasks, chunksize=chunksize))
    else:
        results = [_evaluate_placement(task) for task in tasks]

    by_cell: dict[tuple[int, int], dict] = {
        (a_idx, p_idx): out for a_idx, p_idx, out in results
    }
    rows: list[SweepRow] = []
    failures: list[str] = []
    for a_idx, alpha in enumerate(config.alpha_grid):
        for kind in config.statistics:
            samples = [
                by_cell[(a_idx, p_idx)][kind] for p_idx in range(config.n_placements)
            ]
            kept = np.array([s for s in samples if s is not None])
            excluded = config.n_placements - kept.size
            if excluded:
                logger.warning(
                    "%s at alpha=%g: excluded %d/%d degenerate realizations",
                    kind.value,
                    alpha,
                    excluded,
                    config.n_placements,
                )
            if excluded > _EXCLUSION_BUDGET * config.n_placements:
                failures.append(
                    f"{kind.value} at alpha={alpha:g}: "
                    f"{excluded}/{config.n_placements} realizations excluded"
                )
                continue
            mean = float(kept.mean())
            stderr = (
                float(kept.std(ddof=1) / math.sqrt(kept.size)) if kept.size > 1 else 0.0
            )
            rows.append(
                SweepRow(
                    statistic=kind,
                    alpha=float(alpha),
                    p_mo_mean=mean,
                    p_mo_stderr=stderr,
                    n_placements=int(kept.size),
                    n_excluded=int(excluded),
                    seed=config.seed,
                )
            )
    if failures:
        raise ExclusionBudgetError(
            "exclusion budget exceeded: " + "; ".join(failures)
        )
    rows.sort(key=lambda r: (r.statistic.value, r.alpha))
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.statistic.value},{float(r.alpha)!r},{r.p_mo_mean:.8e},"
            f"{r.p_mo_stderr:.8e},{r.n_placements},{r.n_excluded},{r.seed}"
        )
    return "\n".join(lines) + "\n"


def write_csv(rows: list[SweepRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))
