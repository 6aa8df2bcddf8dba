"""Discrepancy statistics between observed proportions and a reference.

All five measures (PSI, PRS, symmetric KL divergence J, chi-square
divergence, discrete KS) operate on probability vectors over the same B
ordered categories.  Natural logarithms throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError

_SUM_TOL = 1e-12

VectorLike = Union["ProportionVector", "ReferenceDistribution", Sequence[float], np.ndarray]


@dataclass(frozen=True)
class CategoryCounts:
    """Observed integer counts per category."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts)
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError(f"need a 1-d vector of B >= 2 counts, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if not np.array_equal(rounded, arr):
                raise ValidationError("counts must be integers")
            arr = rounded.astype(np.int64)
        if np.any(arr < 0):
            raise ValidationError("counts must be non-negative")
        if arr.sum() < 1:
            raise ValidationError("sample is empty (n = 0)")
        object.__setattr__(self, "counts", arr.astype(np.int64))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def B(self) -> int:
        return self.counts.size


@dataclass(frozen=True)
class ProportionVector:
    """Probability vector with non-negative entries summing to one."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError(f"need a 1-d vector of B >= 2 entries, got shape {arr.shape}")
        if np.any(arr < 0):
            raise ValidationError("probabilities must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"probabilities sum to {total!r}, not 1 (renormalization is refused; "
                "fix the input instead)"
            )
        object.__setattr__(self, "probs", arr)

    @property
    def B(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class ReferenceDistribution:
    """Fixed reference probability vector; every entry strictly positive."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError(f"need a 1-d vector of B >= 2 entries, got shape {arr.shape}")
        if np.any(arr <= 0):
            raise ValidationError("reference probabilities must be strictly positive")
        total = float(arr.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"reference probabilities sum to {total!r}, not 1 (renormalization is refused)"
            )
        object.__setattr__(self, "probs", arr)

    @property
    def B(self) -> int:
        return self.probs.size


def uniform_reference(B: int) -> ReferenceDistribution:
    """Equi-probable reference over B categories."""
    return ReferenceDistribution(np.full(B, 1.0 / B))


def as_probs(v: VectorLike) -> np.ndarray:
    """Extract the raw probability array from a vector-like argument."""
    return np.asarray(getattr(v, "probs", v), dtype=float)


def _paired(a: VectorLike, b: VectorLike) -> tuple[np.ndarray, np.ndarray]:
    x, y = as_probs(a), as_probs(b)
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def proportions(counts: CategoryCounts) -> ProportionVector:
    """Observed category proportions n_i / n."""
    return ProportionVector(counts.counts / counts.n)


def psi(phat: VectorLike, p0: VectorLike) -> float:
    """Population Stability Index of the observed proportions against p0.

    Zero-count categories contribute nothing (plug-in indicator convention).
    """
    ph, q = _paired(phat, p0)
    mask = ph > 0
    safe = np.where(mask, ph, 1.0)
    return float(np.sum(np.where(mask, (ph - q) * (np.log(safe) - np.log(q)), 0.0)))


def prs(phat: VectorLike, p0: VectorLike) -> float:
    """Population Resemblance Statistic: chi-square divergence of phat from p0."""
    ph, q = _paired(phat, p0)
    return float(np.sum((ph - q) ** 2 / q))


def j_divergence(p: VectorLike, p0: VectorLike) -> float:
    """Symmetric Kullback-Leibler divergence between two population vectors.

    This is the population quantity: zero entries make it infinite, so they
    are rejected rather than silently dropped.
    """
    x, q = _paired(p, p0)
    if np.any(x <= 0):
        raise ValidationError("j_divergence requires strictly positive entries")
    return float(np.sum((x - q) * (np.log(x) - np.log(q))))


def chi2_divergence(p: VectorLike, p0: VectorLike) -> float:
    """Chi-square divergence between population vectors (same formula as prs)."""
    return prs(p, p0)


def ks_statistic(phat: VectorLike, p0: VectorLike) -> float:
    """Discrete KS statistic: max gap between the two cumulative distributions."""
    ph, q = _paired(phat, p0)
    return float(np.max(np.abs(np.cumsum(ph) - np.cumsum(q))))
