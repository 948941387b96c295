"""Per-trial evaluation metrics and Monte-Carlo aggregation.

Delay and power are measured in abstract units: one iteration (send an
application, receive the response) is one time unit, and one application is
one power unit.  UEs that never associate are excluded from delay/power
averages and reported through the unassociated fraction instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .games import DA, GameResult, GameTrace


def association_delay(trace: GameTrace, game_kind: str) -> np.ndarray:
    """Per-UE association delay in iteration units (NaN when unassociated).

    Deferred acceptance finalizes everything in the last iteration, so every
    associated UE shares the total iteration count; early-acceptance UEs are
    done after their accepting application, so the delay equals their
    application count.
    """
    assoc = trace.assoc_iter >= 0
    out = np.full(trace.assoc_iter.shape, np.nan)
    if game_kind == DA:
        out[assoc] = trace.n_iter
    else:
        out[assoc] = trace.n_appl[assoc]
    return out


def association_power(trace: GameTrace) -> np.ndarray:
    """Per-UE power spent on applications, one unit each (all UEs)."""
    return trace.n_appl.astype(float)


def unassociated_percentage(result: GameResult) -> float:
    k_n = len(result.beta)
    if k_n == 0:
        return 0.0
    return len(result.unassociated) / k_n


@dataclass
class TrialMetrics:
    """One (trial, scheme) measurement."""

    avg_delay: float
    delay_samples: np.ndarray
    avg_power: float
    power_samples: np.ndarray
    unassociated_fraction: float
    utility: float
    iteration_count: int


def trial_metrics(result: GameResult, game_kind: str, utility: float) -> TrialMetrics:
    delays = association_delay(result.trace, game_kind)
    powers = association_power(result.trace)
    assoc = result.trace.assoc_iter >= 0
    delay_samples = delays[assoc]
    power_samples = powers[assoc]
    return TrialMetrics(
        avg_delay=float(np.mean(delay_samples)) if delay_samples.size else float("nan"),
        delay_samples=delay_samples,
        avg_power=float(np.mean(power_samples)) if power_samples.size else float("nan"),
        power_samples=power_samples,
        unassociated_fraction=unassociated_percentage(result),
        utility=float(utility),
        iteration_count=result.trace.n_iter,
    )


@dataclass
class MetricSummary:
    mean: float
    p25: float
    p75: float


def _summary(values) -> MetricSummary:
    arr = np.asarray([v for v in values if not np.isnan(v)], dtype=float)
    if arr.size == 0:
        return MetricSummary(float("nan"), float("nan"), float("nan"))
    return MetricSummary(
        mean=float(np.mean(arr)),
        p25=float(np.percentile(arr, 25)),
        p75=float(np.percentile(arr, 75)),
    )


def _unit_pdf(samples: np.ndarray) -> dict[int, float]:
    """Empirical PDF over integer-valued samples with bin width 1."""
    if samples.size == 0:
        return {}
    vals, counts = np.unique(samples.astype(int), return_counts=True)
    total = counts.sum()
    return {int(v): float(c) / total for v, c in zip(vals, counts)}


@dataclass
class Aggregate:
    """Cross-trial reductions: means, quartiles, and unit-bin sample PDFs."""

    delay: MetricSummary
    power: MetricSummary
    unassociated: MetricSummary
    utility: MetricSummary
    iterations: MetricSummary
    delay_pdf: dict = field(default_factory=dict)
    power_pdf: dict = field(default_factory=dict)


def aggregate(trials: list[TrialMetrics]) -> Aggregate:
    if not trials:
        raise ValueError("nothing to aggregate")
    delay_samples = np.concatenate([t.delay_samples for t in trials]) if any(
        t.delay_samples.size for t in trials
    ) else np.array([])
    power_samples = np.concatenate([t.power_samples for t in trials]) if any(
        t.power_samples.size for t in trials
    ) else np.array([])
    return Aggregate(
        delay=_summary([t.avg_delay for t in trials]),
        power=_summary([t.avg_power for t in trials]),
        unassociated=_summary([t.unassociated_fraction for t in trials]),
        utility=_summary([t.utility for t in trials]),
        iterations=_summary([float(t.iteration_count) for t in trials]),
        delay_pdf=_unit_pdf(delay_samples),
        power_pdf=_unit_pdf(power_samples),
    )
