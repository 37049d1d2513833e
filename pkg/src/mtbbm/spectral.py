"""Perron-Frobenius data of the branching matrix and the front centering.

The branching matrix A has nonnegative off-diagonal entries, so A + cI is
nonnegative, irreducible and has positive diagonal (hence is primitive) once
c exceeds every rate.  Power iteration on the shifted matrix therefore
converges to the dominant eigenvalue c + lambda* and its positive
eigenvectors; no external eigensolver is needed at these sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .models import ModelSpec, branching_matrix, mean_matrix, require_valid


@dataclass(frozen=True)
class SpectralData:
    """Dominant eigentriple of A with the normalization <g,1> = <g,h> = 1.

    mu = g*h (componentwise) is the stationary law of the distinguished
    particle's type chain; sqrt2lam = sqrt(2 lambda*) is the asymptotic speed.
    """

    mean: np.ndarray
    branching: np.ndarray
    lambda_star: float
    g: np.ndarray
    h: np.ndarray
    mu: np.ndarray

    @property
    def sqrt2lam(self) -> float:
        return math.sqrt(2.0 * self.lambda_star)

    @property
    def d(self) -> int:
        return self.g.shape[0]


def _power_iteration(b: np.ndarray, tol: float, max_iter: int):
    scale = np.abs(b).max()
    v = np.full(b.shape[0], 1.0 / math.sqrt(b.shape[0]))
    best = (math.inf, v, 0.0)
    stalled = 0
    for _ in range(max_iter):
        w = b @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            raise NumericalError("power iteration hit the zero vector")
        v = w / nrm
        w = b @ v
        rho = float(v @ w)  # Rayleigh quotient at the current unit vector
        resid = float(np.abs(w - rho * v).max())
        if resid <= tol * scale:
            return rho, v, resid
        if resid < best[0]:
            best = (resid, v, rho)
            stalled = 0
        else:
            stalled += 1
            # at the round-off floor; accept if within the documented bound
            if stalled > 100 and best[0] <= 1e-12 * scale:
                return best[2], best[1], best[0]
    raise NumericalError(
        f"power iteration did not reach residual {tol:g} in {max_iter} steps "
        f"(best residual {best[0]:.3e})"
    )


def perron_frobenius(a: np.ndarray, *, tol: float = 1e-14, max_iter: int = 200_000):
    """Dominant eigenvalue and positive left/right eigenvectors of A.

    Returns (lambda*, g, h) normalized so <g, 1> = <g, h> = 1.  Iteration
    targets the round-off floor (well inside the documented 1e-12 residual
    bound) so that derived identities, like the spine generator's zero row
    sums, hold to 1e-12 as well.
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if a.shape != (d, d):
        raise DomainError("A must be square")
    # shift so the matrix is nonnegative with positive diagonal
    c = float(-a.diagonal().min()) + float(np.abs(a).max()) + 1.0
    b = a + c * np.eye(d)
    rho_r, h, _ = _power_iteration(b, tol, max_iter)
    rho_l, g, _ = _power_iteration(b.T, tol, max_iter)
    lam = 0.5 * (rho_r + rho_l) - c
    h = np.abs(h)
    g = np.abs(g)
    g = g / g.sum()
    h = h / float(g @ h)
    return lam, g, h


def spectral_data(spec: ModelSpec, *, permissive: bool = False) -> SpectralData:
    """Validate the model and assemble its spectral data."""
    require_valid(spec, permissive=permissive)
    m = mean_matrix(spec)
    a = branching_matrix(spec)
    lam, g, h = perron_frobenius(a)
    return SpectralData(mean=m, branching=a, lambda_star=lam, g=g, h=h, mu=g * h)


def front(t: float, sd: SpectralData) -> float:
    """Centering m(t) = sqrt(2 lambda*) t - (3 / (2 sqrt(2 lambda*))) log t, t > 0."""
    if t <= 0:
        raise DomainError(f"front requires t > 0, got {t}")
    s = sd.sqrt2lam
    return s * t - 1.5 / s * math.log(t)


def front_plus(t: float, sd: SpectralData) -> float:
    """Truncated variant max(sqrt(2 lambda*) t - (3/(2 sqrt(2 lambda*))) log_+ t, 0)."""
    if t <= 0:
        raise DomainError(f"front_plus requires t > 0, got {t}")
    s = sd.sqrt2lam
    return max(s * t - 1.5 / s * max(math.log(t), 0.0), 0.0)
