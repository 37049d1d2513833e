"""Finite-difference solver for the coupled reaction-diffusion system
v_t = (1/2) v_xx + Lambda (phi(v) - v) on a truncated interval.

Time stepping is Strang splitting: a Crank-Nicolson half-step for the
diffusion, an RK4 step for the pointwise reaction, then another diffusion
half-step.  The first steps after a discontinuous initial profile use
implicit-Euler diffusion half-steps (Rannacher smoothing) so the jump does
not excite undamped Crank-Nicolson oscillations.  Both ends use zero-flux
boundaries: every supported initial family is flat far out on both sides,
where the dynamics reduce to the spatially constant reaction flow, which
zero-flux reproduces exactly (an invaded left state relaxes to 1 on its
own).  The right margin is chosen so the front never feels the boundary;
a detector errors out if it does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, DomainTooSmallError, StabilityError
from .models import ModelSpec, require_valid
from .spectral import SpectralData

_JUMP_EPS = 1e-9


@dataclass(frozen=True)
class InitialCondition:
    """Named initial-value family for the system.

    ``profile(x, i)`` evaluates type i on an array of positions.  A jump
    sitting exactly on a grid node is discretized with the midpoint value
    (detected by probing the profile a hair on either side), which keeps
    discontinuous data symmetric about their jump.  ``assumption`` optionally
    records the sandwich data (N1, N2, i0) of the Heaviside-comparison
    condition.
    """

    kind: str
    profile: object
    has_jumps: bool = False
    assumption: tuple[float, float, int] | None = None
    params: dict = field(default_factory=dict)

    def discretize(self, x: np.ndarray, d: int) -> np.ndarray:
        v = np.empty((d, x.shape[0]))
        for i in range(d):
            v[i] = self.profile(x, i)
            if self.has_jumps:
                left = np.asarray(self.profile(x - _JUMP_EPS, i), dtype=float)
                right = np.asarray(self.profile(x + _JUMP_EPS, i), dtype=float)
                at_jump = np.abs(left - right) > 1e-6
                v[i, at_jump] = 0.5 * (left[at_jump] + right[at_jump])
        if (v < 0).any() or (v > 1).any():
            raise DomainError("initial data must take values in [0, 1]")
        return v


def heaviside_ic() -> InitialCondition:
    """v_i(0, x) = 1 for x < 0, all types."""
    return InitialCondition(
        kind="heaviside",
        profile=lambda x, i: (np.asarray(x) < 0).astype(float),
        has_jumps=True,
        assumption=(0.0, 0.0, 0),
    )


def typed_heaviside_ic(i1: int) -> InitialCondition:
    """v_(i1)(0, x) = 1 for x < 0 and zero data for every other type."""

    def prof(x, i):
        x = np.asarray(x)
        return (x < 0).astype(float) if i == i1 else np.zeros_like(x, dtype=float)

    return InitialCondition(kind="typed-heaviside", profile=prof, has_jumps=True,
                            assumption=(0.0, 0.0, i1), params={"i1": i1})


def laplace_ic(phi) -> InitialCondition:
    """v_i(0, x) = 1 - exp(-phi(-x, i)) for a test function phi(location, mark)."""
    return InitialCondition(
        kind="laplace",
        profile=lambda x, i: 1.0 - np.exp(-np.asarray(phi(-np.asarray(x), i), dtype=float)),
        params={"phi": phi},
    )


def truncated_ic(phi, L: float) -> InitialCondition:
    """Laplace data with the survival factor cut off at -x <= L (so v = 1 left of -L)."""

    def prof(x, i):
        x = np.asarray(x)
        surv = np.exp(-np.asarray(phi(-x, i), dtype=float))
        surv[x < -L] = 0.0
        return 1.0 - surv

    return InitialCondition(kind="truncated", profile=prof, has_jumps=True,
                            params={"phi": phi, "L": L})


def constant_ic(c: float) -> InitialCondition:
    """Spatially constant data v = c; the dynamics reduce to the reaction ODE."""
    return InitialCondition(kind="constant",
                            profile=lambda x, i: np.full(np.asarray(x).shape, float(c)),
                            params={"c": c})


def custom_ic(fn, assumption=None) -> InitialCondition:
    return InitialCondition(kind="custom", profile=fn, assumption=assumption)


@dataclass(frozen=True)
class GridSolution:
    """Space-time samples of the solution, one (d, nx) slab per saved time."""

    x: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (n_times, d, nx)
    dx: float
    dt: float
    lambda_star: float
    max_violation: float
    ic_kind: str

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def time_index(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-9 + 1e-12 * abs(t):
            raise DomainError(f"time {t} not saved; available: {self.times}")
        return idx

    def at_time(self, t: float) -> np.ndarray:
        return self.values[self.time_index(t)]

    def interp(self, t: float, i: int, points) -> np.ndarray:
        return np.interp(points, self.x, self.at_time(t)[i])


def _phi_grid(spec: ModelSpec, v: np.ndarray) -> np.ndarray:
    """phi_i(v) = 1 - psi_i(1 - v), vectorized over the grid axis."""
    u = 1.0 - v
    out = np.empty_like(v)
    for i, law in enumerate(spec.offspring):
        acc = np.zeros(v.shape[1])
        for kvec, p in law:
            term = np.full(v.shape[1], p)
            for j, k in enumerate(kvec):
                for _ in range(int(k)):
                    term = term * u[j]
            acc += term
        out[i] = 1.0 - acc
    return out


def _banded(alpha: float, nx: int) -> np.ndarray:
    """Banded form of I - alpha * L for the zero-flux Laplacian stencil."""
    ab = np.zeros((3, nx))
    ab[0, 1:] = -alpha
    ab[1, :] = 1.0 + 2.0 * alpha
    ab[2, :-1] = -alpha
    ab[0, 1] = -2.0 * alpha
    ab[2, -2] = -2.0 * alpha
    return ab


def _lap(v: np.ndarray) -> np.ndarray:
    """Zero-flux Laplacian stencil applied along the grid axis (unscaled)."""
    out = np.empty_like(v)
    out[:, 1:-1] = v[:, :-2] - 2.0 * v[:, 1:-1] + v[:, 2:]
    out[:, 0] = 2.0 * (v[:, 1] - v[:, 0])
    out[:, -1] = 2.0 * (v[:, -2] - v[:, -1])
    return out


def solve(spec: ModelSpec, sd: SpectralData, ic: InitialCondition, *, t_end: float,
          dx: float = 0.05, dt: float = 0.01, x_lo: float = -20.0,
          x_hi: float | None = None, save_times=None,
          rannacher_steps: int = 4, permissive: bool = False) -> GridSolution:
    """March the system to t_end and return the saved time slices.

    ``save_times`` must be (near-)multiples of dt; 0 and t_end are always
    kept.  Values are clamped to [0, 1] after every step and the largest
    pre-clamp violation is reported on the solution; NaN/blow-up raises
    StabilityError, a front reaching the right margin raises
    DomainTooSmallError.
    """
    require_valid(spec, permissive=permissive)
    if t_end < 0 or dx <= 0 or dt <= 0:
        raise DomainError("need t_end >= 0, dx > 0, dt > 0")
    if x_hi is None:
        x_hi = sd.sqrt2lam * t_end + 30.0
    if not x_lo < 0 < x_hi:
        raise DomainError("domain must contain 0 in its interior")

    n_lo = int(round(-x_lo / dx))
    n_hi = int(round(x_hi / dx))
    x = dx * np.arange(-n_lo, n_hi + 1)
    nx = x.shape[0]
    d = spec.d
    rates = np.asarray(spec.rates)[:, None]

    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9:
        raise DomainError(f"t_end={t_end} must be a multiple of dt={dt}")
    want = {0, n_steps}
    for ts in save_times or ():
        k = int(round(ts / dt))
        if abs(k * dt - ts) > 1e-9 or not 0 <= k <= n_steps:
            raise DomainError(f"save time {ts} is not a step multiple within [0, t_end]")
        want.add(k)

    half = 0.5 * dt
    alpha_cn = half / (4.0 * dx * dx)      # Crank-Nicolson half-step
    alpha_ie = half / (2.0 * dx * dx)      # implicit-Euler half-step (start-up)
    ab_cn = _banded(alpha_cn, nx)
    ab_ie = _banded(alpha_ie, nx)

    smooth_until = rannacher_steps if ic.has_jumps else 0

    v = ic.discretize(x, d)
    saved = [v.copy()]
    max_violation = 0.0
    # reference for the boundary guard: under zero-flux boundaries the right
    # edge must follow the flat-space reaction flow until a front arrives
    edge_ref = v[:, -1].copy()

    def diffuse(arr, step):
        if step < smooth_until:
            return solve_banded((1, 1), ab_ie, arr.T, overwrite_b=False).T
        rhs = arr + alpha_cn * _lap(arr)
        return solve_banded((1, 1), ab_cn, rhs.T, overwrite_b=False).T

    def react(arr):
        def rhs(w):
            return rates * (_phi_grid(spec, np.clip(w, 0.0, 1.0)) - w)

        k1 = rhs(arr)
        k2 = rhs(arr + 0.5 * dt * k1)
        k3 = rhs(arr + 0.5 * dt * k2)
        k4 = rhs(arr + dt * k3)
        return arr + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    for step in range(n_steps):
        v = diffuse(v, step)
        v = react(v)
        v = diffuse(v, step)
        if not np.isfinite(v).all():
            raise StabilityError(f"solution blew up at t={(step + 1) * dt:g} (dt={dt}, dx={dx})")
        max_violation = max(max_violation, float((v - 1.0).max()), float((-v).max()))
        v = np.clip(v, 0.0, 1.0)
        edge_ref = np.clip(react(edge_ref[:, None])[:, 0], 0.0, 1.0)
        if np.abs(v[:, -1] - edge_ref).max() > 0.1:
            raise DomainTooSmallError(
                f"front reached the right margin x_hi={x_hi:g} by t={(step + 1) * dt:g}; "
                "enlarge the domain"
            )
        if step + 1 in want:
            saved.append(v.copy())

    return GridSolution(
        x=x, times=np.asarray([k * dt for k in sorted(want)]), values=np.asarray(saved),
        dx=dx, dt=dt, lambda_star=sd.lambda_star, max_violation=max_violation,
        ic_kind=ic.kind,
    )


def front_level_position(sol: GridSolution, t: float, i: int, level: float) -> float:
    """Linear-interpolated position where v_i(t, .) crosses the given level."""
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    v = sol.at_time(t)[i]
    above = np.nonzero(v >= level)[0]
    if above.size == 0 or above.size == v.shape[0]:
        raise DomainError(f"v_{i}(t={t}) does not cross level {level}")
    m = above[-1]
    if m == v.shape[0] - 1:
        raise DomainError(f"level {level} still above threshold at the right boundary")
    frac = (v[m] - level) / (v[m] - v[m + 1])
    return float(sol.x[m] + frac * sol.dx)


def cv_integral(sol: GridSolution, sd: SpectralData, r: float, *,
                rel_cutoff: float = 1e-6) -> float:
    """Traveling-frame tail integral
    sqrt(2/pi) * int_0^Ymax y e^(sqrt(2 lambda*) y) sum_j g_j v_j(r, y + sqrt(2 lambda*) r) dy.

    Ymax is chosen adaptively: integration stops once the integrand has
    fallen below ``rel_cutoff`` times its peak; if the grid ends first the
    domain was too small.
    """
    s = sd.sqrt2lam
    base = s * r
    if base < sol.x[0]:
        raise DomainError("traveling frame origin left of the domain")
    y_max_avail = sol.x[-1] - base
    if y_max_avail <= 0:
        raise DomainTooSmallError("domain does not cover the traveling frame at r")
    y = np.arange(0.0, y_max_avail + sol.dx / 2, sol.dx)
    vals = sol.at_time(r)
    acc = np.zeros(y.shape[0])
    for j in range(sol.d):
        acc += sd.g[j] * np.interp(base + y, sol.x, vals[j])
    integrand = y * np.exp(s * y) * acc
    peak = integrand.max()
    if peak <= 0:
        return 0.0
    below = integrand <= rel_cutoff * peak
    # first index after the peak where the integrand has decayed
    peak_idx = int(np.argmax(integrand))
    tail = np.nonzero(below[peak_idx:])[0]
    if tail.size == 0:
        raise DomainTooSmallError(
            f"integrand at the domain edge is still {integrand[-1] / peak:.2e} of its peak; "
            "extend x_hi"
        )
    stop = peak_idx + tail[0] + 1
    return float(math.sqrt(2.0 / math.pi) * np.trapezoid(integrand[:stop], y[:stop]))


def traveling_wave_profile(sol: GridSolution, t: float, i: int,
                           window: tuple[float, float] = (-5.0, 10.0)):
    """Profile of v_i(t, .) sampled around the half-level front position.

    Returns (offsets, values) with offsets on the grid spacing.
    """
    x_front = front_level_position(sol, t, i, 0.5)
    offsets = np.arange(window[0], window[1] + sol.dx / 2, sol.dx)
    return offsets, sol.interp(t, i, x_front + offsets)
