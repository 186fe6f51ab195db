"""Top-u selection and the two estimators of correct-selection proportion.

The straightforward estimator simulates datasets from the sparse model and
counts how many true features land in the top ``u`` by absolute sample
correlation.  The approximated (empirical-Bayes) estimator fits a Fisher-scale
prior width from the observed correlations, simulates a synthetic "truth" from
that prior and measures how often noisy scores recover it.

Replicates draw from named substreams of a root seed (see ``rglab.random``),
so aggregates do not depend on the number of workers.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from rglab.correlation import MIN_SAMPLES, correlate_all, fisher
from rglab.exceptions import ParameterError
from rglab.models import sample_sparse_dataset
from rglab.random import substream

__all__ = [
    "MODES",
    "SCALES",
    "ExperimentSummary",
    "ReplicateResult",
    "RobustnessCriterion",
    "SampleSizeResult",
    "SelectionOutcome",
    "SigmaQEstimate",
    "approximated_replicate",
    "estimate_sigma_q",
    "minimal_sample_size",
    "overlap",
    "resolve_workers",
    "run_experiment",
    "straightforward_replicate",
    "top_u_indices",
]

logger = logging.getLogger(__name__)

MODES = ("paper_literal", "synthetic")
SCALES = ("raw", "fisher")
ESTIMATORS = ("straightforward", "approximated")


def _check_choice(name, value, choices):
    if value not in choices:
        raise ParameterError(f"{name} must be one of {choices}, got {value!r}")


def top_u_indices(values, u):
    """Indices of the ``u`` largest entries, ascending; ties go to the lower index."""
    values = np.asarray(values, dtype=float)
    k = values.shape[0]
    if not 0 < u <= k:
        raise ParameterError(f"need 0 < u <= k, got u={u}, k={k}")
    order = np.argsort(-values, kind="stable")
    return np.sort(order[:u])


def overlap(chosen, truth):
    """``|chosen & truth| / |truth|``."""
    truth = np.asarray(truth)
    return np.intersect1d(chosen, truth).size / truth.size


@dataclass(frozen=True, eq=False)
class SelectionOutcome:
    chosen: np.ndarray
    truth: np.ndarray
    overlap: float

    @classmethod
    def from_sets(cls, chosen, truth):
        chosen = np.sort(np.asarray(chosen))
        truth = np.sort(np.asarray(truth))
        if chosen.size != truth.size:
            raise ParameterError("chosen and truth sets must have the same size")
        return cls(chosen, truth, overlap(chosen, truth))


@dataclass(frozen=True)
class RobustnessCriterion:
    """A list is robust when its overlap with the true list reaches ``target_overlap``."""

    target_overlap: float = 0.5

    def __post_init__(self):
        if not 0 < self.target_overlap <= 1:
            raise ParameterError(f"target_overlap must lie in (0, 1], got {self.target_overlap!r}")

    def met(self, value):
        return value >= self.target_overlap


@dataclass(frozen=True)
class SigmaQEstimate:
    """Empirical-Bayes prior width ``sqrt(max(W - 1/(n-3), 0))``.

    ``variance`` is W, the 1/k-divisor variance of the correlations on the
    chosen ``scale``; ``clamped`` records that W fell below the noise floor.
    """

    value: float
    variance: float
    noise_variance: float
    clamped: bool
    scale: str

    def __float__(self):
        return self.value


def estimate_sigma_q(r, scale="raw"):
    """Estimate the prior standard deviation of Fisher-scale true correlations.

    ``scale="raw"`` takes W over the correlations themselves (as in the
    original recipe); ``scale="fisher"`` takes it over their Fisher transforms,
    which is where the prior lives.
    """
    _check_choice("scale", scale, SCALES)
    if r.n < MIN_SAMPLES:
        raise ParameterError(f"need n >= {MIN_SAMPLES}, got {r.n}")
    if len(r) < 2:
        raise ParameterError("need at least two correlations to estimate a variance")
    values = r.values if scale == "raw" else fisher(r.values)
    w = float(np.var(values))
    noise = 1.0 / (r.n - 3)
    excess = w - noise
    clamped = not excess > 0
    return SigmaQEstimate(
        value=0.0 if clamped else float(np.sqrt(excess)),
        variance=w,
        noise_variance=noise,
        clamped=clamped,
        scale=scale,
    )


def straightforward_replicate(spec, n, rng):
    """One replicate of the direct simulation.

    Returns ``(d_t, r)``: the fraction of the true support recovered by the
    top-``u`` features by ``|r|``, and the correlation vector itself.
    """
    data, support = sample_sparse_dataset(spec, n, rng)
    r = correlate_all(data)
    chosen = top_u_indices(np.abs(r.values), spec.u)
    return overlap(chosen, support), r


def approximated_replicate(r, u, mode="paper_literal", scale="raw", rng=None, sigma_q=None):
    """One replicate of the fast empirical-Bayes approximation; returns ``c_t``.

    Draws Fisher-scale truths from N(0, sigma_q_hat^2) and takes S1 as their
    top ``u`` by magnitude, then adds N(0, 1/(n-3)) noise ``z``.  S2 is the top
    ``u`` of ``|r + z|`` in ``paper_literal`` mode (the recipe taken verbatim,
    which leaves S1 and S2 independent) or of ``|phi(rho) + z|`` in
    ``synthetic`` mode.  ``sigma_q`` overrides the estimate from ``r``.
    """
    _check_choice("mode", mode, MODES)
    if rng is None:
        raise ParameterError("approximated_replicate needs an explicit rng")
    k = len(r)
    if not 0 < u <= k:
        raise ParameterError(f"need 0 < u <= k, got u={u}, k={k}")
    if sigma_q is None:
        sigma_q = estimate_sigma_q(r, scale).value
    truth = sigma_q * rng.standard_normal(k)
    s1 = top_u_indices(np.abs(truth), u)
    z = rng.standard_normal(k) / np.sqrt(r.n - 3)
    base = r.values if mode == "paper_literal" else truth
    s2 = top_u_indices(np.abs(base + z), u)
    return overlap(s2, s1)


@dataclass(frozen=True)
class ReplicateResult:
    n: int
    t: int
    d: float
    c: float
    sigma_q_hat: float
    sigma_q_clamped: bool


@dataclass(frozen=True, eq=False)
class ExperimentSummary:
    """Per-``n`` aggregate of ``B`` replicates; SDs use the 1/B divisor."""

    n: int
    B: int
    d_mean: float
    d_sd: float
    c_mean: float
    c_sd: float
    mode: str
    scale: str
    sigma_q_hats: np.ndarray = field(repr=False)
    d_values: np.ndarray = field(repr=False)
    c_values: np.ndarray = field(repr=False)


def _replicate_task(args):
    spec, n, t, seed, mode, scale = args
    d, r = straightforward_replicate(spec, n, substream(seed, "replicate", n, t, "data"))
    est = estimate_sigma_q(r, scale)
    c = approximated_replicate(
        r, spec.u, mode, scale, substream(seed, "replicate", n, t, "approx"), sigma_q=est.value
    )
    return ReplicateResult(n, t, float(d), float(c), est.value, est.clamped)


def resolve_workers(workers):
    """Turn ``None`` / ``"auto"`` / an int into a positive worker count."""
    if workers is None:
        workers = os.environ.get("RGLAB_WORKERS", 1)
    if workers == "auto":
        return os.cpu_count() or 1
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        raise ParameterError(f"workers must be a positive integer or 'auto', got {workers!r}")
    if workers < 1:
        raise ParameterError(f"workers must be positive, got {workers}")
    return workers


def run_replicates(tasks, workers=1):
    workers = resolve_workers(workers)
    if workers == 1 or len(tasks) <= 1:
        return [_replicate_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_replicate_task, tasks))


def run_experiment(spec, n_grid, B, mode="paper_literal", scale="raw", seed=None, workers=1):
    """Both estimators over a grid of sample sizes.

    Replicate ``t`` at sample size ``n`` uses one dataset for both estimators.
    Results are folded in (n, t) order, so output is identical for any
    ``workers``.
    """
    _check_choice("mode", mode, MODES)
    _check_choice("scale", scale, SCALES)
    if seed is None:
        raise ParameterError("run_experiment needs a seed")
    if not isinstance(B, (int, np.integer)) or B < 1:
        raise ParameterError(f"B must be a positive integer, got {B!r}")
    n_grid = [int(n) for n in n_grid]
    for n in n_grid:
        if n < MIN_SAMPLES:
            raise ParameterError(f"every n must be >= {MIN_SAMPLES}, got {n}")
    tasks = [(spec, n, t, seed, mode, scale) for n in n_grid for t in range(B)]
    results = run_replicates(tasks, workers)

    summaries = []
    for idx, n in enumerate(n_grid):
        chunk = results[idx * B:(idx + 1) * B]
        d = np.array([res.d for res in chunk])
        c = np.array([res.c for res in chunk])
        summaries.append(
            ExperimentSummary(
                n=n,
                B=B,
                d_mean=float(d.mean()),
                d_sd=float(d.std()),
                c_mean=float(c.mean()),
                c_sd=float(c.std()),
                mode=mode,
                scale=scale,
                sigma_q_hats=np.array([res.sigma_q_hat for res in chunk]),
                d_values=d,
                c_values=c,
            )
        )
        logger.info("n=%d d_mean=%.4f c_mean=%.4f", n, summaries[-1].d_mean, summaries[-1].c_mean)
    return summaries


@dataclass(frozen=True)
class SampleSizeResult:
    """Outcome of the bounded search; ``n_star`` is ``None`` when ``exhausted``."""

    estimator: str
    target: float
    n_star: int
    exhausted: bool
    best_n: int
    best_mean: float
    resolution: int
    trace: tuple


def minimal_sample_size(
    spec,
    criterion=RobustnessCriterion(),
    estimator="straightforward",
    n_lo=100,
    n_hi=3200,
    B=10,
    seed=None,
    mode="paper_literal",
    scale="raw",
    resolution=25,
    workers=1,
):
    """Smallest ``n`` whose estimated mean overlap reaches the criterion.

    Probes ``n_lo, 2 n_lo, 4 n_lo, ...`` (capped at ``n_hi``) until the
    criterion is met, then bisects the last bracket down to ``resolution``.
    Each probe is a ``run_experiment`` call at a single ``n`` with the same
    seed, so a probe at ``n`` matches the grid experiment at ``n``.  Failing to
    reach the target by ``n_hi`` is reported through ``exhausted``, not raised.
    """
    _check_choice("estimator", estimator, ESTIMATORS)
    if seed is None:
        raise ParameterError("minimal_sample_size needs a seed")
    if not MIN_SAMPLES <= n_lo < n_hi:
        raise ParameterError(f"need {MIN_SAMPLES} <= n_lo < n_hi, got n_lo={n_lo}, n_hi={n_hi}")
    if resolution < 1:
        raise ParameterError("resolution must be at least 1")

    trace = []

    def probe(n):
        s = run_experiment(spec, [n], B, mode, scale, seed, workers)[0]
        mean, sd = (s.d_mean, s.d_sd) if estimator == "straightforward" else (s.c_mean, s.c_sd)
        trace.append({"n": n, "mean": mean, "sd": sd})
        return criterion.met(mean)

    def result(n_star):
        best = max(trace, key=lambda row: (row["mean"], -row["n"]))
        if n_star is not None:
            best = next(row for row in trace if row["n"] == n_star)
        return SampleSizeResult(
            estimator=estimator,
            target=criterion.target_overlap,
            n_star=n_star,
            exhausted=n_star is None,
            best_n=best["n"],
            best_mean=best["mean"],
            resolution=resolution,
            trace=tuple(trace),
        )

    if probe(n_lo):
        return result(n_lo)
    lo, n = n_lo, n_lo
    while True:
        n = min(2 * n, n_hi)
        if probe(n):
            hi = n
            break
        if n == n_hi:
            return result(None)
        lo = n
    while hi - lo > resolution:
        mid = (lo + hi) // 2
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return result(hi)
