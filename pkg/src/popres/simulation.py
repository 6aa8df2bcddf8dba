"""Seeded Monte Carlo engine for the reconstruction, stability and sweep studies.

Replications use the counter-based substreams from :mod:`popres.sampling`,
so every study is bit-reproducible from (seed, spec) alone at any
parallelism degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import sampling
from .divergences import ReferenceDistribution, as_probs, uniform_reference
from .errors import ValidationError
from .resemblance import DecisionBoundaries, ResemblanceConfig, decision_boundaries
from .scenarios import PerturbationSpec, perturbed_pv, solve_p_for_target_j

multinomial_sample = sampling.multinomial_sample


@dataclass(frozen=True)
class NoShift:
    pass


@dataclass(frozen=True)
class TargetJ:
    value: float


@dataclass(frozen=True)
class Perturbed:
    delta_v: float


Scenario = Union[NoShift, TargetJ, Perturbed]


@dataclass(frozen=True)
class SimulationSpec:
    n: int
    B: int
    replications: int
    seed: int
    scenario: Scenario = field(default_factory=NoShift)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"sample size must be positive, got {self.n}")
        if self.B < 2:
            raise ValidationError(f"need B >= 2 categories, got {self.B}")
        if self.replications < 1:
            raise ValidationError("need at least one replication")


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float


@dataclass(frozen=True)
class StabilityRatios:
    """Empirical moments of the scaled statistics against their asymptotic values."""

    mean_ratio_psi: float
    var_ratio_psi: float
    mean_ratio_prs: float
    var_ratio_prs: float
    mean_se_psi: float
    mean_se_prs: float


@dataclass(frozen=True)
class SweepResult:
    grid: np.ndarray
    region_probs: np.ndarray  # shape (grid, 3), rows sum to 1
    boundaries: DecisionBoundaries
    replications: int
    seed: int


def _scenario_population(spec: SimulationSpec) -> np.ndarray:
    p0 = uniform_reference(spec.B)
    if isinstance(spec.scenario, NoShift):
        return as_probs(p0)
    if isinstance(spec.scenario, TargetJ):
        return as_probs(solve_p_for_target_j(p0, spec.scenario.value))
    if isinstance(spec.scenario, Perturbed):
        return as_probs(perturbed_pv(PerturbationSpec(spec.B, spec.scenario.delta_v)))
    raise ValidationError(f"unknown scenario {spec.scenario!r}")


def _psi_matrix(counts: np.ndarray, n: int, q: np.ndarray) -> np.ndarray:
    ph = counts / n
    mask = ph > 0
    safe = np.where(mask, ph, 1.0)
    return np.where(mask, (ph - q) * (np.log(safe) - np.log(q)), 0.0).sum(axis=1)


def _prs_matrix(counts: np.ndarray, n: int, q: np.ndarray) -> np.ndarray:
    ph = counts / n
    return ((ph - q) ** 2 / q).sum(axis=1)


def reconstruction_probability(
    spec: SimulationSpec, psi_threshold: float = 0.25, workers: int = 1
) -> MCEstimate:
    """Fraction of replications whose PSI reaches the reconstruction threshold."""
    if isinstance(spec.scenario, Perturbed):
        raise ValidationError("reconstruction study expects NoShift or TargetJ")
    p = _scenario_population(spec)
    q = as_probs(uniform_reference(spec.B))
    counts = sampling.multinomial_matrix(
        spec.n, p, spec.replications, seed=spec.seed, stream=1, workers=workers
    )
    hits = _psi_matrix(counts, spec.n, q) >= psi_threshold
    frac = float(np.mean(hits))
    se = math.sqrt(max(frac * (1.0 - frac), 1.0 / spec.replications) / spec.replications)
    return MCEstimate(frac, se)


def stability_ratios(n: int, B: int, replications: int, seed: int, workers: int = 1) -> StabilityRatios:
    """Mean and variance stability of n*PSI and n*PRS under no shift."""
    q = as_probs(uniform_reference(B))
    counts = sampling.multinomial_matrix(n, q, replications, seed=seed, stream=2, workers=workers)
    t = n * _psi_matrix(counts, n, q)
    s = n * _prs_matrix(counts, n, q)
    dof = B - 1
    return StabilityRatios(
        mean_ratio_psi=float(t.mean() / dof),
        var_ratio_psi=float(t.var(ddof=1) / (2 * dof)),
        mean_ratio_prs=float(s.mean() / dof),
        var_ratio_prs=float(s.var(ddof=1) / (2 * dof)),
        mean_se_psi=float(t.std(ddof=1) / math.sqrt(replications) / dof),
        mean_se_prs=float(s.std(ddof=1) / math.sqrt(replications) / dof),
    )


def classification_sweep(
    n: int,
    B: int,
    cfg: ResemblanceConfig,
    grid_points: int = 30,
    replications: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> SweepResult:
    """Region probabilities across deviations from zero to (3M+2) * delta."""
    p0 = uniform_reference(B)
    bounds = decision_boundaries(p0, n, cfg)
    q = as_probs(p0)
    # the nominal sweep extends to (3M+2)*delta, but a perturbation cannot
    # push any entry of the equi-probable reference below zero
    grid_max = min((3.0 * cfg.M + 2.0) * bounds.delta, (1.0 - 1e-9) / B)
    grid = np.linspace(0.0, grid_max, grid_points)
    probs = np.empty((grid_points, 3))
    for i, dv in enumerate(grid):
        p = as_probs(perturbed_pv(PerturbationSpec(B, float(dv))))
        counts = sampling.multinomial_matrix(
            n, p, replications, seed=seed, stream=10 + i, workers=workers
        )
        prs_vals = _prs_matrix(counts, n, q)
        r1 = int(np.sum(prs_vals <= bounds.tau1))
        r3 = int(np.sum(prs_vals > bounds.tau2))
        r2 = replications - r1 - r3
        probs[i] = (r1 / replications, r2 / replications, r3 / replications)
    return SweepResult(grid=grid, region_probs=probs, boundaries=bounds, replications=replications, seed=seed)


def calibration_probabilities(
    n: int,
    B: int,
    cfg: ResemblanceConfig,
    replications: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> dict[str, MCEstimate]:
    """Region probabilities at the two calibration deviations.

    At delta_v = delta the perturbation attains the least favorable
    non-centrality exactly, so P(R3) should approach alpha1; at
    delta_v = M * delta, P(R1) should approach alpha2.
    """
    p0 = uniform_reference(B)
    bounds = decision_boundaries(p0, n, cfg)
    q = as_probs(p0)
    out: dict[str, MCEstimate] = {}
    for stream, (key, dv) in enumerate(
        [("r3_at_delta", bounds.delta), ("r1_at_m_delta", cfg.M * bounds.delta)]
    ):
        p = as_probs(perturbed_pv(PerturbationSpec(B, dv)))
        counts = sampling.multinomial_matrix(
            n, p, replications, seed=seed, stream=100 + stream, workers=workers
        )
        prs_vals = _prs_matrix(counts, n, q)
        if key == "r3_at_delta":
            frac = float(np.mean(prs_vals > bounds.tau2))
        else:
            frac = float(np.mean(prs_vals <= bounds.tau1))
        se = math.sqrt(max(frac * (1.0 - frac), 1.0 / replications) / replications)
        out[key] = MCEstimate(frac, se)
    return out
