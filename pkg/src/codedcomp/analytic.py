"""Completion probability from per-worker work distributions.

The work done by worker ``i`` by time ``t`` is a truncated discrete Gaussian
on ``{0, ..., l_i}``.  The master finishes once the total ``Z_t`` reaches
``k``.  Two routes to the law of ``Z_t`` are provided: exact convolution and
the closed-form Gaussian sum with ``gamma_z = sum gamma_i / c_i`` and
``sigma_z^2 = sum sigma_i^2 / c_i^2``, evaluated as written (no extra
normalisation).  The exact route is the ground truth; the closed form comes
with mass and total-variation diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MASS_WARNING = 1e-3


@dataclass(frozen=True, eq=False)
class WorkDistribution:
    pmf: np.ndarray
    gamma: float | None = None
    sigma: float | None = None
    normalizer: float | None = None

    @property
    def support_max(self) -> int:
        return len(self.pmf) - 1

    @classmethod
    def from_pmf(cls, pmf: Sequence[float]) -> "WorkDistribution":
        pmf = np.asarray(pmf, dtype=np.float64)
        if pmf.ndim != 1 or len(pmf) == 0 or (pmf < 0).any() or abs(pmf.sum() - 1) > 1e-12:
            raise ValueError("pmf must be a non-empty probability vector")
        return cls(pmf)

    def mean(self) -> float:
        return float(np.arange(len(self.pmf)) @ self.pmf)


def gaussian_density(x, gamma: float, sigma: float):
    return np.exp(-((np.asarray(x, dtype=np.float64) - gamma) ** 2) / (2 * sigma**2)) / math.sqrt(2 * math.pi * sigma**2)


def work_pmf(l: int, gamma: float, sigma: float) -> WorkDistribution:
    """Truncated discrete Gaussian on ``{0, ..., l}``, built with a max-shift."""
    if l < 0:
        raise ValueError(f"support size l must be >= 0, got {l}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    v = np.arange(l + 1, dtype=np.float64)
    logw = -((v - gamma) ** 2) / (2 * sigma**2)
    top = logw.max()
    w = np.exp(logw - top)
    total = w.sum()
    c = float(total * math.exp(top) / math.sqrt(2 * math.pi * sigma**2))
    return WorkDistribution(w / total, float(gamma), float(sigma), c)


@dataclass(frozen=True, eq=False)
class SumDistribution:
    pmf: np.ndarray
    method: str
    gamma: float | None = None
    sigma: float | None = None

    @property
    def support_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def mass(self) -> float:
        return float(self.pmf.sum())


def sum_distribution_exact(dists: Sequence[WorkDistribution]) -> SumDistribution:
    if not dists:
        raise ValueError("need at least one distribution")
    pmf = np.array([1.0])
    for d in dists:
        pmf = np.convolve(pmf, d.pmf)
    return SumDistribution(pmf, "exact_convolution")


def sum_distribution_gaussian(dists: Sequence[WorkDistribution]) -> SumDistribution:
    if not dists:
        raise ValueError("need at least one distribution")
    if any(d.normalizer is None for d in dists):
        raise ValueError("the Gaussian closed form needs parametric work distributions")
    gamma_z = sum(d.gamma / d.normalizer for d in dists)
    sigma_z = math.sqrt(sum(d.sigma**2 / d.normalizer**2 for d in dists))
    L = sum(d.support_max for d in dists)
    pmf = gaussian_density(np.arange(L + 1), gamma_z, sigma_z)
    return SumDistribution(pmf, "gaussian_approx", gamma_z, sigma_z)


@dataclass(frozen=True)
class ApproximationReport:
    mass: float
    tv_distance: float
    flagged: bool


def gaussian_diagnostics(dists: Sequence[WorkDistribution]) -> ApproximationReport:
    """Total mass of the closed form and its TV distance to the exact law."""
    approx = sum_distribution_gaussian(dists).pmf
    exact = sum_distribution_exact(dists).pmf
    tv = 0.5 * float(np.abs(approx - exact).sum())
    mass = float(approx.sum())
    return ApproximationReport(mass, tv, abs(mass - 1) > MASS_WARNING)


def completion_probability(dist: SumDistribution, k: int) -> float:
    """``Pr[Z >= k]`` summed over the stored support."""
    if k < 0 or k > dist.support_max + 1:
        raise ValueError(f"k={k} outside [0, {dist.support_max + 1}]")
    return float(dist.pmf[k:].sum())


def noncompletion_probability(dist: SumDistribution, k: int) -> float:
    """``Pr[Z < k]`` as a lower-tail sum (avoids cancellation in ``1 - Pr[Z >= k]``)."""
    if k < 0 or k > dist.support_max + 1:
        raise ValueError(f"k={k} outside [0, {dist.support_max + 1}]")
    return float(dist.pmf[:k].sum())


def collapse(d: WorkDistribution) -> WorkDistribution:
    """All-or-nothing version of a worker: partial work counts as zero."""
    l = d.support_max
    pmf = np.zeros(l + 1)
    pmf[l] = d.pmf[l]
    pmf[0] += 1.0 - d.pmf[l]
    return WorkDistribution(pmf)


def baseline_sum(dists: Sequence[WorkDistribution]) -> SumDistribution:
    return sum_distribution_exact([collapse(d) for d in dists])


def baseline_completion_probability(dists: Sequence[WorkDistribution], k: int) -> float:
    """Completion probability when each worker only reports a full load."""
    if k > sum(d.support_max for d in dists):
        raise ValueError("k exceeds the total number of blocks")
    return completion_probability(baseline_sum(dists), k)


@dataclass(frozen=True)
class CurvePoint:
    t: float
    exact: float
    gaussian: float
    baseline: float
    tv_distance: float
    mass: float


def noncompletion_curve(ts: Sequence[float], n: int = 10, l: int = 10, k: int = 40,
                        gamma_rate: float = 0.5, sigma: float = 2.0) -> list[CurvePoint]:
    """``Pr[Z_t < k]`` over a time grid for identical workers with ``gamma = rate * t``.

    The closed-form column is ``1 - Pr[Z_t >= k]`` under the printed pmf,
    which is not normalised, so it need not equal its own lower-tail sum.
    """
    out = []
    for t in ts:
        dists = [work_pmf(l, gamma_rate * t, sigma)] * n
        exact = sum_distribution_exact(dists)
        approx = sum_distribution_gaussian(dists)
        report = gaussian_diagnostics(dists)
        out.append(CurvePoint(
            float(t),
            noncompletion_probability(exact, k),
            1.0 - completion_probability(approx, k),
            noncompletion_probability(baseline_sum(dists), k),
            report.tv_distance,
            report.mass,
        ))
    return out
