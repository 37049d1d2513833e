"""Distinguished-particle (spine) process under the size-biased measure.

Under the change of measure weighted by e^(-lambda* t) <N_t, h> / h_i, one
marked line of descent moves as a standard Brownian motion while its type
follows a Markov chain; branch events along it fire at rate a_i + lambda*
and offspring are size-biased by <k, h>.  The branch-event clock and the
type chain are kept separate: for d = 1 (or models with self-type mass) the
type never changes even though branch events keep firing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError, NumericalError
from .models import ModelSpec, mean_matrix, validate_model
from .reports import EstimatorReport
from .rng import generator_for
from .simulate import run_replicates
from .spectral import SpectralData


@dataclass(frozen=True)
class SpineGenerator:
    """Rate data of the spine's type chain.

    ``matrix`` is the chain generator (rows sum to zero); ``event_rates``
    are the branch-event rates a_i + lambda*, which exceed the type-change
    rates whenever an event can reproduce the current type.
    """

    matrix: np.ndarray
    event_rates: np.ndarray
    mu: np.ndarray
    residual: float


@dataclass(frozen=True)
class SpinePath:
    """One realization of the spine on [0, t].

    ``branch_times`` lists every branch event; ``types_after`` the spine type
    right after each event.  ``jump_times`` keeps only the type changes.
    ``terminal_position`` is X(t), drawn independently of the type chain.
    """

    t: float
    start_type: int
    branch_times: np.ndarray
    types_after: np.ndarray
    terminal_position: float

    @property
    def jump_times(self) -> np.ndarray:
        prev = np.concatenate(([self.start_type], self.types_after[:-1]))
        return self.branch_times[self.types_after != prev]

    @property
    def type_at_end(self) -> int:
        return int(self.types_after[-1]) if self.types_after.size else self.start_type

    def occupation_fractions(self, d: int) -> np.ndarray:
        """Fraction of [0, t] spent in each type."""
        times = np.concatenate(([0.0], self.branch_times, [self.t]))
        types = np.concatenate(([self.start_type], self.types_after)).astype(int)
        frac = np.zeros(d)
        np.add.at(frac, types, np.diff(times))
        return frac / self.t


def _require_spine_model(spec: ModelSpec) -> None:
    report = validate_model(spec)
    if not report.ok:
        raise ModelError(
            "spine machinery needs a strict-mode model (for d >= 2 the "
            "size-biased type chain is undefined with self-type mass): "
            + "; ".join(report.messages)
        )


def spine_generator(spec: ModelSpec, sd: SpectralData) -> SpineGenerator:
    """Type-chain generator g_ij = a_i M_ij h_j / h_i - (a_i + lambda*) delta_ij."""
    _require_spine_model(spec)
    a = np.asarray(spec.rates)
    m = mean_matrix(spec)
    event = a + sd.lambda_star
    gen = a[:, None] * m * sd.h[None, :] / sd.h[:, None] - np.diag(event)
    residual = float(np.abs(sd.mu @ gen).max())
    if residual > 1e-8:
        raise NumericalError(f"stationarity residual |mu^T G| = {residual:.2e} too large")
    return SpineGenerator(matrix=gen, event_rates=event, mu=sd.mu, residual=residual)


def size_biased_tables(spec: ModelSpec, sd: SpectralData):
    """Per type: offspring atoms with size-biased probabilities and, per atom,
    the continuation-type distribution (proportional to k_j h_j)."""
    tables = []
    for i, law in enumerate(spec.offspring):
        weight = (1.0 + sd.lambda_star / spec.rates[i]) * sd.h[i]
        atoms = []
        total = 0.0
        for kvec, p in law:
            k = np.asarray(kvec, dtype=float)
            kh = float(k @ sd.h)
            p_hat = p * kh / weight
            cont = k * sd.h / kh if kh > 0 else k
            atoms.append((np.asarray(kvec, dtype=np.int64), p_hat, cont))
            total += p_hat
        tables.append((atoms, total))
    return tables


def _draw_atom(atoms, total, rng):
    u = rng.random() * total
    acc = 0.0
    for atom in atoms[:-1]:
        acc += atom[1]
        if u <= acc:
            return atom
    return atoms[-1]


def size_biased_offspring(spec: ModelSpec, sd: SpectralData, i: int,
                          rng: np.random.Generator):
    """Draw (offspring vector, spine continuation type) at a type-i branch event."""
    _require_spine_model(spec)
    atoms, total = size_biased_tables(spec, sd)[i]
    kvec, _, cont = _draw_atom(atoms, total, rng)
    j = int(rng.choice(cont.shape[0], p=cont / cont.sum()))
    return kvec.copy(), j


def simulate_spine(spec: ModelSpec, sd: SpectralData, start_type: int, t: float,
                   rng: np.random.Generator, start_pos: float = 0.0) -> SpinePath:
    """Exact spine path: Exp(a_i + lambda*) event clock, size-biased transitions."""
    _require_spine_model(spec)
    if t < 0:
        raise DomainError("t must be >= 0")
    tables = size_biased_tables(spec, sd)
    branch_times: list[float] = []
    types_after: list[int] = []
    cur = int(start_type)
    clock = 0.0
    while True:
        clock += rng.exponential(1.0 / (spec.rates[cur] + sd.lambda_star))
        if clock >= t:
            break
        _, _, cont = _draw_atom(*tables[cur], rng)
        cur = int(rng.choice(cont.shape[0], p=cont / cont.sum()))
        branch_times.append(clock)
        types_after.append(cur)
    # position is independent of the type chain; drawn after it by convention
    x_t = start_pos + (rng.normal(0.0, math.sqrt(t)) if t > 0 else 0.0)
    return SpinePath(
        t=float(t), start_type=int(start_type),
        branch_times=np.asarray(branch_times), types_after=np.asarray(types_after, dtype=int),
        terminal_position=float(x_t),
    )


def _spine_end_type(tables, rates, lambda_star, start_type: int, t: float, rng) -> int:
    """Terminal type of the chain without materializing the path."""
    cur = start_type
    clock = rng.exponential(1.0 / (rates[cur] + lambda_star))
    while clock < t:
        _, _, cont = _draw_atom(*tables[cur], rng)
        cur = int(rng.choice(cont.shape[0], p=cont / cont.sum()))
        clock += rng.exponential(1.0 / (rates[cur] + lambda_star))
    return cur


def many_to_one_check(spec: ModelSpec, sd: SpectralData, H, t: float, n: int,
                      master_seed: int, start_type: int = 0, *,
                      workers: int | None = None) -> tuple[EstimatorReport, EstimatorReport]:
    """Both sides of the many-to-one identity as paired Monte-Carlo reports.

    Branching side: mean of sum_u H(X_u(t), I_u(t)) over n full simulations.
    Spine side: e^(lambda* t) * mean of H(X(t), I(t)) h_i / h_I over n spine
    paths.  H must accept vectorized positions and types.
    """
    _require_spine_model(spec)

    def branching_sum(snap):
        return float(np.sum(H(snap.positions, snap.types)))

    lhs = run_replicates(spec, sd, (0.0, start_type), t, n, master_seed,
                         branching_sum, workers=workers, label="branching_side")

    growth = math.exp(sd.lambda_star * t)
    tables = size_biased_tables(spec, sd)
    rates = np.asarray(spec.rates)
    vals = np.empty(n)
    for idx in range(n):
        rng = generator_for(master_seed + 1, idx)
        j = _spine_end_type(tables, rates, sd.lambda_star, start_type, t, rng)
        x = np.asarray([rng.normal(0.0, math.sqrt(t))]) if t > 0 else np.zeros(1)
        vals[idx] = growth * float(np.asarray(H(x, np.asarray([j])))[0]) * sd.h[start_type] / sd.h[j]
    rhs = EstimatorReport.from_samples("spine_side", vals, master_seed + 1)
    return lhs, rhs


NAMED_FUNCTIONALS = {
    "ones": lambda x, j: np.ones_like(np.asarray(x, dtype=float)),
    "type-0": lambda x, j: (np.asarray(j) == 0).astype(float),
    "type-1": lambda x, j: (np.asarray(j) == 1).astype(float),
    "left-half": lambda x, j: (np.asarray(x) <= 0.0).astype(float),
    "right-half": lambda x, j: (np.asarray(x) > 0.0).astype(float),
    "gauss": lambda x, j: np.exp(-0.5 * np.asarray(x) ** 2),
    "band": lambda x, j: ((np.asarray(x) > 0.0) & (np.asarray(x) <= 1.0)).astype(float),
}
