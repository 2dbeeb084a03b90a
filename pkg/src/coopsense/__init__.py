"""Cooperative spectrum sensing toolkit for cognitive-radio networks.

End-to-end pipeline: build dB-domain Gaussian hypothesis models from a
geometric scenario (``scenario``), evaluate the LLR/GLLR/QM/LM fusion
statistics (``statistics``), compute tail probabilities of their Gaussian
quadratic forms with a saddlepoint approximation (``tailprob``), calibrate
detection thresholds to an interference constraint (``calibrate``),
cross-validate with Monte Carlo (``mcsim``), and sweep the
shadowing-to-noise ratio over random placements (``experiment``/``cli``).
"""

from .calibrate import (
    CalibrationResult,
    calibrate_threshold,
    evaluate_realization,
    h0_moments,
    h1_moments,
)
from .experiment import (
    ConfigError,
    ExclusionBudgetError,
    ExperimentConfig,
    SweepRow,
    parse_config_file,
    run_sweep,
    write_csv,
)
from .mcsim import (
    Hypothesis,
    McEstimate,
    empirical_threshold,
    estimate_tail_mc,
    gllr_missed_opportunity,
    sample_batch,
)
from .scenario import (
    HypothesisModel,
    ModelConstructionError,
    NoiseParams,
    Placement,
    PropagationParams,
    build_hypothesis_model,
    mean_received_power,
    sample_placement,
    shadowing_correlation,
)
from .statistics import (
    MeasurementBatch,
    QuadraticForm,
    StatisticKind,
    UnsupportedStatisticError,
    distributed_evaluate,
    gllr_statistic,
    llr_statistic,
    lm_statistic,
    qm_statistic,
    quadratic_form,
)
from .tailprob import (
    DegenerateThresholdError,
    GaussianMoments,
    SaddleDomain,
    SpectralForm,
    TailResult,
    UnreachableThresholdError,
    lmgf_with_derivatives,
    saddle_domain,
    solve_saddle,
    tail_probability,
)

__version__ = "0.1.0"
