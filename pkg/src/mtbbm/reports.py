"""Monte-Carlo estimator reports: point estimate, standard error, provenance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EstimatorReport:
    """Point estimate with its standard error and seed provenance.

    ``estimate``/``se`` are floats for scalar statistics and arrays for
    vector statistics.  ``extra`` carries estimator-specific diagnostics
    (flags, counts); it never affects the estimate itself.
    """

    label: str
    estimate: float | np.ndarray
    se: float | np.ndarray
    n: int
    seed: int
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, label: str, samples, seed: int, **extra) -> "EstimatorReport":
        arr = np.asarray(samples, dtype=float)
        n = arr.shape[0]
        mean = arr.mean(axis=0)
        if n > 1:
            se = arr.std(axis=0, ddof=1) / np.sqrt(n)
        else:
            se = np.full_like(mean, np.inf, dtype=float)
        if arr.ndim == 1:
            mean, se = float(mean), float(se)
        return cls(label=label, estimate=mean, se=se, n=n, seed=seed, extra=dict(extra))

    def within(self, target, k: float = 3.0) -> bool:
        """True when |estimate - target| <= k * se componentwise."""
        return bool(np.all(np.abs(np.asarray(self.estimate) - np.asarray(target)) <= k * np.asarray(self.se)))
