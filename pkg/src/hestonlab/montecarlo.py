"""Seeded replicate experiments and the statistics reported on them.

A Monte Carlo experiment simulates many independent joint paths, estimates
the four drift coefficients on each, and studies the error sample three ways:

* location/spread: expected bias, L1 and L2 error, relative error of the
  mean estimate;
* shape: skewness and excess kurtosis of the sqrt(T)-normalized errors, with
  Jarque-Bera and Anderson-Darling composite-normality tests;
* covariance: sample covariance of the normalized errors against the
  closed-form limit matrix, and of the self-normalized (path-scaled) errors
  against the parameter-free limit S (x) I_2.

Skewness and kurtosis use population (1/n) central moments, the convention
under which the Jarque-Bera statistic has its chi-square(2) limit, whose
survival function at JB is exactly exp(-JB/2).

The Anderson-Darling p-value uses the classical estimated-parameters
piecewise approximation on the modified statistic A*^2 = A^2 (1 + 0.75/n +
2.25/n^2):

    A*^2 >= 0.600:        p = exp(1.2937 - 5.709 A*^2 + 0.0186 A*^4)
    0.340 <= A*^2 < 0.6:  p = exp(0.9177 - 4.279 A*^2 - 1.38  A*^4)
    0.200 <  A*^2 < 0.34: p = 1 - exp(-8.318 + 42.796 A*^2 - 59.938 A*^4)
    A*^2 <= 0.200:        p = 1 - exp(-13.436 + 101.14 A*^2 - 223.73 A*^4)

with the standard-normal log-distribution function evaluated through the
complementary error function (scipy.special.log_ndtr).  A calibration sweep
test pins this approximation against uniform p-values under the null.

Replicate r of an experiment draws its noise from the streams of
``SeedLineage(master_seed, r)`` and from nothing else, so results are
independent of batching, chunking, and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr

from .errors import (
    AllReplicatesFailed,
    DegeneratePath,
    DegenerateSample,
    FellerViolated,
    InsufficientData,
    NonPositiveScalingDiscriminant,
    TiesDegenerate,
)
from .estimate import (
    LseEstimate,
    ScalingStatistic,
    lse_from_functionals,
    normalized_error,
    path_functionals,
    random_scaling_transform,
)
from .model import AsymptoticCovariance, ModelParams, kron
from .simulate import (
    GaussianDraws,
    Scheme,
    SeedLineage,
    TimeGrid,
    XYPath,
    _simulate_y_batch,
    _x_from_y,
)

__all__ = [
    "ExperimentConfig",
    "ReplicateResult",
    "ReplicateFailure",
    "McRun",
    "ParamStats",
    "McSummary",
    "DeviationReport",
    "PARAM_NAMES",
    "canonical_params",
    "preset_config",
    "run_replicates",
    "summarize",
    "jarque_bera",
    "jarque_bera_pvalue",
    "anderson_darling",
    "anderson_darling_pvalue",
    "histogram_overlay",
    "HistogramOverlay",
    "covariance_check",
]

PARAM_NAMES = ("a", "b", "alpha", "beta")

# Rough per-chunk element budget for batched simulation; keeps the four
# (rows x steps) work arrays of a chunk around a few hundred megabytes total.
_CHUNK_ELEMENTS = 8_000_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete, validated description of a replicate experiment."""

    params: ModelParams
    grid: TimeGrid
    scheme: Scheme
    replicates: int
    master_seed: int
    outputs: tuple[str, ...] = ("summary", "tables", "figures", "replicates")

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.scheme.uses_sqrt_state and not self.params.feller_strict:
            raise FellerViolated(
                f"scheme {self.scheme.value} needs a > sigma1^2/2, "
                f"got a={self.params.a}, sigma1={self.params.sigma1}"
            )


def canonical_params() -> ModelParams:
    """The benchmark coefficient set used by every named preset."""
    return ModelParams(
        a=0.4, b=0.3, alpha=0.1, beta=0.15,
        sigma1=0.4, sigma2=0.3, rho=0.2,
        y0=0.2, x0=0.1,
    )


_PRESETS = {
    # name: (horizon, steps, replicates, master_seed)
    "table1": (3000.0, 30_000, 10_000, 101),
    "paper": (5000.0, 50_000, 10_000, 102),
    "desk": (2000.0, 20_000, 2_000, 103),
}


def preset_config(name: str) -> ExperimentConfig:
    """Named experiment presets, all on the canonical coefficients.

    ``table1``: T=3000, N=30000, 10^4 replicates (long-run means at scale).
    ``paper``:  T=5000, N=50000, 10^4 replicates (full-scale study; slow).
    ``desk``:   T=2000, N=20000, 2000 replicates (minutes; the gated scale).
    """
    try:
        horizon, steps, replicates, seed = _PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; expected one of {sorted(_PRESETS)}"
        ) from None
    return ExperimentConfig(
        params=canonical_params(),
        grid=TimeGrid(horizon=horizon, steps=steps),
        scheme=Scheme.DISRE,
        replicates=replicates,
        master_seed=seed,
    )


# ---------------------------------------------------------------------------
# replicate fan-out


@dataclass(frozen=True)
class ReplicateResult:
    """Everything retained per successful replicate."""

    index: int
    estimate: LseEstimate
    normalized: np.ndarray
    scaled: ScalingStatistic
    y_terminal: float
    x_terminal: float


@dataclass(frozen=True)
class ReplicateFailure:
    """Recorded abort of one replicate (excluded from statistics)."""

    index: int
    reason: str
    step: int | None = None


@dataclass(frozen=True)
class McRun:
    """Outcome of run_replicates: results, failures, and the config used."""

    config: ExperimentConfig
    results: tuple[ReplicateResult, ...]
    failures: tuple[ReplicateFailure, ...] = field(default=())


def _run_chunk(config: ExperimentConfig, lo: int, hi: int):
    params, grid, scheme = config.params, config.grid, config.scheme
    n = grid.steps
    rows = hi - lo
    eta = np.empty((rows, n))
    zeta = np.empty((rows, n))
    for j, r in enumerate(range(lo, hi)):
        draws = GaussianDraws.from_lineage(
            SeedLineage(config.master_seed, r), n
        )
        eta[j] = draws.eta
        zeta[j] = draws.zeta
    y, failed_step = _simulate_y_batch(params, grid, scheme, eta)
    x = _x_from_y(params, grid, y, eta, zeta)
    truth = params.drift_vector()

    results: list[ReplicateResult] = []
    failures: list[ReplicateFailure] = []
    for j, r in enumerate(range(lo, hi)):
        if failed_step[j] >= 0:
            failures.append(
                ReplicateFailure(index=r, reason="NonPositiveZ", step=int(failed_step[j]))
            )
            continue
        path = XYPath(grid=grid, y=y[j], x=x[j], scheme=scheme)
        try:
            f = path_functionals(path)
            est = lse_from_functionals(f)
            nrm = normalized_error(est, truth)
            scl = random_scaling_transform(est, truth, f)
        except (DegeneratePath, NonPositiveScalingDiscriminant) as exc:
            failures.append(ReplicateFailure(index=r, reason=type(exc).__name__))
            continue
        results.append(
            ReplicateResult(
                index=r,
                estimate=est,
                normalized=nrm,
                scaled=scl,
                y_terminal=float(y[j, -1]),
                x_terminal=float(x[j, -1]),
            )
        )
    return results, failures


def run_replicates(config: ExperimentConfig, threads: int = 1) -> McRun:
    """Run all replicates of an experiment, optionally across threads.

    Thread count affects wall time only: each replicate's noise comes from
    its own seed lineage and chunks are merged in index order, so any value
    of ``threads`` produces identical results.

    Raises:
        AllReplicatesFailed: no replicate produced a usable estimate.
    """
    n = config.grid.steps
    chunk = max(1, min(config.replicates, _CHUNK_ELEMENTS // max(n, 1)))
    bounds = [
        (lo, min(lo + chunk, config.replicates))
        for lo in range(0, config.replicates, chunk)
    ]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _run_chunk(config, *b), bounds))
    else:
        parts = [_run_chunk(config, lo, hi) for lo, hi in bounds]

    results: list[ReplicateResult] = []
    failures: list[ReplicateFailure] = []
    for res, fail in parts:
        results.extend(res)
        failures.extend(fail)
    if not results:
        raise AllReplicatesFailed(
            f"all {config.replicates} replicates aborted "
            f"({failures[0].reason} at first failure)"
        )
    return McRun(config=config, results=tuple(results), failures=tuple(failures))


# ---------------------------------------------------------------------------
# moment statistics and normality tests


def _central_moments(sample: np.ndarray):
    mean = float(np.mean(sample))
    d = sample - mean
    m2 = float(np.mean(d * d))
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    return mean, m2, m3, m4


def _skew_excess_kurtosis(sample: np.ndarray) -> tuple[float, float]:
    """Population-moment skewness and excess kurtosis (NaN on zero spread)."""
    _, m2, m3, m4 = _central_moments(sample)
    if m2 <= 0.0:
        return math.nan, math.nan
    return m3 / m2 ** 1.5, m4 / (m2 * m2) - 3.0


def jarque_bera_pvalue(stat: float) -> float:
    """Chi-square(2) survival function at the statistic: exp(-stat/2)."""
    return float(np.exp(-0.5 * stat))


def jarque_bera(sample) -> tuple[float, float]:
    """Jarque-Bera normality statistic and p-value on a sample.

    Raises:
        InsufficientData: fewer than 8 observations.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.shape[0] < 8:
        raise InsufficientData("Jarque-Bera needs at least 8 observations")
    n = x.shape[0]
    g1, g2 = _skew_excess_kurtosis(x)
    stat = n / 6.0 * (g1 * g1 + 0.25 * g2 * g2)
    return float(stat), jarque_bera_pvalue(stat)


def anderson_darling_pvalue(stat: float, n: int) -> float:
    """Estimated-parameters p-value for an Anderson-Darling statistic.

    Applies the small-sample modification for sample size ``n`` and the
    piecewise exponential approximation documented in the module docstring.
    """
    aa = stat * (1.0 + 0.75 / n + 2.25 / (n * n))
    if aa >= 0.6:
        p = math.exp(1.2937 - 5.709 * aa + 0.0186 * aa * aa)
    elif aa >= 0.34:
        p = math.exp(0.9177 - 4.279 * aa - 1.38 * aa * aa)
    elif aa > 0.2:
        p = 1.0 - math.exp(-8.318 + 42.796 * aa - 59.938 * aa * aa)
    else:
        p = 1.0 - math.exp(-13.436 + 101.14 * aa - 223.73 * aa * aa)
    return float(min(1.0, max(0.0, p)))


def anderson_darling(sample) -> tuple[float, float]:
    """Anderson-Darling composite-normality statistic and p-value.

    The sample is standardized by its own mean and (ddof=1) standard
    deviation; the statistic is therefore invariant under positive affine
    maps of the data.

    Raises:
        InsufficientData: fewer than 8 observations.
        TiesDegenerate: zero sample variance.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.shape[0] < 8:
        raise InsufficientData("Anderson-Darling needs at least 8 observations")
    n = x.shape[0]
    sd = float(np.std(x, ddof=1))
    if not sd > 0.0:
        raise TiesDegenerate("sample has zero variance")
    z = np.sort((x - float(np.mean(x))) / sd)
    i = np.arange(1, n + 1)
    # log F(z_(i)) and log(1 - F(z_(n+1-i))) via the erfc-based log-ndtr
    stat = -n - float(np.mean((2 * i - 1) * (log_ndtr(z) + log_ndtr(-z[::-1]))))
    return stat, anderson_darling_pvalue(stat, n)


# ---------------------------------------------------------------------------
# histogram with limit-law overlay


@dataclass(frozen=True)
class HistogramOverlay:
    """Density histogram of a sample with a centered normal overlay.

    ``density`` is count/(n_total * bin_width), so density times width sums
    to the fraction of the sample inside the plotted range.  ``overlay`` is
    the zero-mean normal density with the supplied variance at bin centers.
    """

    bin_centers: np.ndarray
    density: np.ndarray
    overlay: np.ndarray
    bin_width: float
    in_range_fraction: float


def histogram_overlay(sample, theoretical_variance: float) -> HistogramOverlay:
    """60-bin density histogram over sample-mean +/- 4 limit-sigmas.

    Raises:
        DegenerateSample: fewer than 2 points, zero sample spread, or a
            nonpositive theoretical variance.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DegenerateSample("histogram needs at least 2 observations")
    if not theoretical_variance > 0.0:
        raise DegenerateSample(
            f"theoretical variance must be > 0, got {theoretical_variance}"
        )
    if float(np.max(x)) == float(np.min(x)):
        raise DegenerateSample("sample has zero spread")
    mu = float(np.mean(x))
    sig = math.sqrt(theoretical_variance)
    lo, hi = mu - 4.0 * sig, mu + 4.0 * sig
    counts, edges = np.histogram(x, bins=60, range=(lo, hi))
    width = (hi - lo) / 60.0
    density = counts / (x.shape[0] * width)
    centers = 0.5 * (edges[:-1] + edges[1:])
    overlay = np.exp(-0.5 * centers * centers / theoretical_variance) / math.sqrt(
        2.0 * math.pi * theoretical_variance
    )
    return HistogramOverlay(
        bin_centers=centers,
        density=density,
        overlay=overlay,
        bin_width=width,
        in_range_fraction=float(np.sum(counts)) / x.shape[0],
    )


# ---------------------------------------------------------------------------
# summary over a result set


@dataclass(frozen=True)
class ParamStats:
    """Error statistics for one drift coefficient over a result set."""

    expected_bias: float
    l1_error: float
    l2_error: float
    relative_error: float
    skewness: float
    excess_kurtosis: float
    jb_stat: float
    jb_pvalue: float
    ad_stat: float
    ad_pvalue: float


@dataclass(frozen=True)
class McSummary:
    """All per-parameter and global statistics of a replicate experiment."""

    n_results: int
    truth: np.ndarray
    per_param: dict[str, ParamStats]
    mean_y_terminal: float
    mean_x_terminal_over_t: float
    cov_normalized: np.ndarray
    cov_scaled: np.ndarray


def summarize(results, truth) -> McSummary:
    """Per-parameter and covariance statistics over successful replicates.

    Shape and normality diagnostics need at least 8 results; below that they
    are reported as NaN rather than failing the whole summary (the
    standalone test functions raise instead).

    Raises:
        InsufficientData: fewer than 2 results.
    """
    results = list(results)
    n = len(results)
    if n < 2:
        raise InsufficientData("summary needs at least 2 results")
    if isinstance(truth, ModelParams):
        truth_vec = truth.drift_vector()
    else:
        truth_vec = np.asarray(truth, dtype=float)
        if truth_vec.shape != (4,):
            raise ValueError("truth must be (a, b, alpha, beta) or a ModelParams")

    estimates = np.array([r.estimate.vector() for r in results])
    normalized = np.array([r.normalized for r in results])
    scaled = np.array([r.scaled.vector for r in results])
    horizon = results[0].estimate.functionals.t_horizon

    per_param: dict[str, ParamStats] = {}
    for idx, name in enumerate(PARAM_NAMES):
        errors = estimates[:, idx] - truth_vec[idx]
        bias = float(np.mean(errors))
        l1 = float(np.mean(np.abs(errors)))
        l2 = float(np.sqrt(np.mean(errors * errors)))
        theta = truth_vec[idx]
        # identical to (mean estimate - theta)/theta but without the
        # cancellation noise of averaging first
        relative = bias / theta if theta != 0.0 else math.nan
        g1, g2 = _skew_excess_kurtosis(normalized[:, idx])
        if n >= 8:
            jb_stat, jb_p = jarque_bera(normalized[:, idx])
            try:
                ad_stat, ad_p = anderson_darling(normalized[:, idx])
            except TiesDegenerate:
                ad_stat, ad_p = math.nan, math.nan
        else:
            jb_stat = jb_p = ad_stat = ad_p = math.nan
        per_param[name] = ParamStats(
            expected_bias=bias,
            l1_error=l1,
            l2_error=l2,
            relative_error=relative,
            skewness=g1,
            excess_kurtosis=g2,
            jb_stat=jb_stat,
            jb_pvalue=jb_p,
            ad_stat=ad_stat,
            ad_pvalue=ad_p,
        )

    return McSummary(
        n_results=n,
        truth=truth_vec,
        per_param=per_param,
        mean_y_terminal=float(np.mean([r.y_terminal for r in results])),
        mean_x_terminal_over_t=float(np.mean([r.x_terminal for r in results])) / horizon,
        cov_normalized=np.cov(normalized, rowvar=False),
        cov_scaled=np.cov(scaled, rowvar=False),
    )


# ---------------------------------------------------------------------------
# deviation report against the closed-form limits


@dataclass(frozen=True)
class DeviationReport:
    """Entrywise deviation of the sample covariances from their limits.

    Diagonal entries are relative deviations; off-diagonal entries are
    absolute deviations divided by the geometric mean sqrt(t_ii * t_jj) of
    the theoretical diagonal.  ``low_confidence`` flags result sets smaller
    than 100, where these ratios are dominated by sampling noise.
    """

    normalized_dev: np.ndarray
    scaled_dev: np.ndarray
    max_normalized_dev: float
    max_scaled_dev: float
    low_confidence: bool


def _entrywise_dev(sample: np.ndarray, theory: np.ndarray) -> np.ndarray:
    scale = np.sqrt(np.outer(np.diag(theory), np.diag(theory)))
    return np.abs(sample - theory) / scale


def covariance_check(summary: McSummary, theory: AsymptoticCovariance) -> DeviationReport:
    """Compare the summary's covariance estimates with the limit matrices."""
    scaled_theory = kron(theory.s_matrix, np.eye(2))
    norm_dev = _entrywise_dev(summary.cov_normalized, theory.sigma_matrix)
    scal_dev = _entrywise_dev(summary.cov_scaled, scaled_theory)
    return DeviationReport(
        normalized_dev=norm_dev,
        scaled_dev=scal_dev,
        max_normalized_dev=float(np.max(norm_dev)),
        max_scaled_dev=float(np.max(scal_dev)),
        low_confidence=summary.n_results < 100,
    )
