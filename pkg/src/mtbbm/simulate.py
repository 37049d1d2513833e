"""Exact event-driven simulation of multitype branching Brownian motion.

Particle positions are realized only at branch and observation times, so no
statistic of the time-t configuration carries discretization error.  The
per-replicate kernel is jitted; replicates own independent PCG64 streams
derived from the master seed, which makes results bit-reproducible for any
worker count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, ResourceLimitError
from .models import ModelSpec, offspring_tables, require_valid
from .reports import EstimatorReport
from .rng import generator_for, replicate_seed
from .spectral import SpectralData

DEFAULT_POPULATION_CAP = 10_000_000


@dataclass(frozen=True)
class Snapshot:
    """Configuration at the observation time: positions and types.

    ``drift_min`` (optional) holds, per particle, the exact running minimum
    of X_u(s) + drift * s along the particle's ancestral path, sampled from
    the Brownian-bridge minimum law on every segment.  Arrays are read-only;
    snapshots may be shared freely between threads.
    """

    t: float
    positions: np.ndarray
    types: np.ndarray
    seed: int | None = None
    replicate: int | None = None
    drift_min: np.ndarray | None = None

    def __post_init__(self):
        self.positions.flags.writeable = False
        self.types.flags.writeable = False
        if self.drift_min is not None:
            self.drift_min.flags.writeable = False

    @property
    def size(self) -> int:
        return self.positions.shape[0]


@njit(cache=True)
def _sim_kernel(rng, t, start_pos, start_type, rates, off_off, off_cum, off_k, cap,
                track_min, drift):
    d = rates.shape[0]
    cs = 1024
    s_time = np.empty(cs, np.float64)
    s_pos = np.empty(cs, np.float64)
    s_typ = np.empty(cs, np.int64)
    s_min = np.empty(cs, np.float64)
    sp = 0

    co = 1024
    o_pos = np.empty(co, np.float64)
    o_typ = np.empty(co, np.int64)
    o_min = np.empty(co, np.float64)
    n_out = 0

    cur_time = 0.0
    cur_pos = start_pos
    cur_typ = start_type
    cur_min = start_pos
    alive = True

    while alive:
        life = rng.exponential(1.0 / rates[cur_typ])
        branch_time = cur_time + life
        if branch_time >= t:
            dt = t - cur_time
            new_pos = cur_pos
            if dt > 0.0:
                new_pos = cur_pos + rng.normal(0.0, math.sqrt(dt))
            if track_min:
                a = cur_pos + drift * cur_time
                b = new_pos + drift * t
                if dt > 0.0:
                    seg = 0.5 * (a + b - math.sqrt((a - b) ** 2 - 2.0 * dt * math.log(rng.random())))
                else:
                    seg = min(a, b)
                cur_min = min(cur_min, seg)
            if n_out == co:
                co *= 2
                tmp = np.empty(co, np.float64); tmp[:n_out] = o_pos; o_pos = tmp
                tmpi = np.empty(co, np.int64); tmpi[:n_out] = o_typ; o_typ = tmpi
                tmp = np.empty(co, np.float64); tmp[:n_out] = o_min; o_min = tmp
            o_pos[n_out] = new_pos
            o_typ[n_out] = cur_typ
            o_min[n_out] = cur_min
            n_out += 1
            if sp == 0:
                alive = False
            else:
                sp -= 1
                cur_time = s_time[sp]
                cur_pos = s_pos[sp]
                cur_typ = s_typ[sp]
                cur_min = s_min[sp]
        else:
            new_pos = cur_pos + rng.normal(0.0, math.sqrt(life))
            if track_min:
                a = cur_pos + drift * cur_time
                b = new_pos + drift * branch_time
                seg = 0.5 * (a + b - math.sqrt((a - b) ** 2 - 2.0 * life * math.log(rng.random())))
                cur_min = min(cur_min, seg)
            u = rng.random()
            idx = off_off[cur_typ]
            hi = off_off[cur_typ + 1]
            while idx < hi - 1 and off_cum[idx] < u:
                idx += 1
            first = True
            for j in range(d):
                for _ in range(off_k[idx, j]):
                    if first:
                        next_typ = j
                        first = False
                    else:
                        if sp == cs:
                            cs *= 2
                            tmp = np.empty(cs, np.float64); tmp[:sp] = s_time; s_time = tmp
                            tmp = np.empty(cs, np.float64); tmp[:sp] = s_pos; s_pos = tmp
                            tmpi = np.empty(cs, np.int64); tmpi[:sp] = s_typ; s_typ = tmpi
                            tmp = np.empty(cs, np.float64); tmp[:sp] = s_min; s_min = tmp
                        s_time[sp] = branch_time
                        s_pos[sp] = new_pos
                        s_typ[sp] = j
                        s_min[sp] = cur_min
                        sp += 1
            if first:
                # defensive: a death event (excluded by validation)
                if sp == 0:
                    alive = False
                else:
                    sp -= 1
                    cur_time = s_time[sp]
                    cur_pos = s_pos[sp]
                    cur_typ = s_typ[sp]
                    cur_min = s_min[sp]
            else:
                cur_time = branch_time
                cur_pos = new_pos
                cur_typ = next_typ
            if n_out + sp + 1 > cap:
                return 1, o_pos[:n_out].copy(), o_typ[:n_out].copy(), o_min[:n_out].copy()

    return 0, o_pos[:n_out].copy(), o_typ[:n_out].copy(), o_min[:n_out].copy()


@njit(cache=True)
def _sim_max_kernel(rng, t, start_pos, start_type, rates, off_off, off_cum, off_k, cap):
    """Running maximum and particle count only; same stream layout as _sim_kernel
    with min-tracking off, so a replicate can be re-simulated in full."""
    d = rates.shape[0]
    cs = 1024
    s_time = np.empty(cs, np.float64)
    s_pos = np.empty(cs, np.float64)
    s_typ = np.empty(cs, np.int64)
    sp = 0
    n_out = 0
    best = -1e300
    cur_time = 0.0
    cur_pos = start_pos
    cur_typ = start_type
    alive = True
    while alive:
        life = rng.exponential(1.0 / rates[cur_typ])
        branch_time = cur_time + life
        if branch_time >= t:
            dt = t - cur_time
            new_pos = cur_pos
            if dt > 0.0:
                new_pos = cur_pos + rng.normal(0.0, math.sqrt(dt))
            if new_pos > best:
                best = new_pos
            n_out += 1
            if sp == 0:
                alive = False
            else:
                sp -= 1
                cur_time = s_time[sp]
                cur_pos = s_pos[sp]
                cur_typ = s_typ[sp]
        else:
            new_pos = cur_pos + rng.normal(0.0, math.sqrt(life))
            u = rng.random()
            idx = off_off[cur_typ]
            hi = off_off[cur_typ + 1]
            while idx < hi - 1 and off_cum[idx] < u:
                idx += 1
            first = True
            for j in range(d):
                for _ in range(off_k[idx, j]):
                    if first:
                        next_typ = j
                        first = False
                    else:
                        if sp == cs:
                            cs *= 2
                            tmp = np.empty(cs, np.float64); tmp[:sp] = s_time; s_time = tmp
                            tmp = np.empty(cs, np.float64); tmp[:sp] = s_pos; s_pos = tmp
                            tmpi = np.empty(cs, np.int64); tmpi[:sp] = s_typ; s_typ = tmpi
                        s_time[sp] = branch_time
                        s_pos[sp] = new_pos
                        s_typ[sp] = j
                        sp += 1
            if first:
                if sp == 0:
                    alive = False
                else:
                    sp -= 1
                    cur_time = s_time[sp]
                    cur_pos = s_pos[sp]
                    cur_typ = s_typ[sp]
            else:
                cur_time = branch_time
                cur_pos = new_pos
                cur_typ = next_typ
            if n_out + sp + 1 > cap:
                return 1, best, n_out
    return 0, best, n_out


def simulate_max(spec: ModelSpec, start, t: float, rng: np.random.Generator, *,
                 cap: int = DEFAULT_POPULATION_CAP, permissive: bool = False) -> float:
    """Rightmost position at time t, skipping snapshot materialization.

    Consumes the replicate stream exactly like ``simulate`` without
    min-tracking, so the same (seed, index) re-run through ``simulate``
    yields the full snapshot of the identical realization.
    """
    require_valid(spec, permissive=permissive)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    off_off, off_cum, off_k = offspring_tables(spec)
    status, best, _ = _sim_max_kernel(
        rng, float(t), float(start[0]), int(start[1]), np.asarray(spec.rates),
        off_off, off_cum, off_k, cap,
    )
    if status != 0:
        raise ResourceLimitError(
            f"population cap {cap} exceeded at t={t} (model {spec.name or 'unnamed'})"
        )
    return float(best)


def simulate(spec: ModelSpec, sd: SpectralData | None, start, t: float,
             rng: np.random.Generator, *, cap: int = DEFAULT_POPULATION_CAP,
             track_drift_min: bool = False, permissive: bool = False) -> Snapshot:
    """One exact realization of the configuration at time t.

    ``start`` is a (position, type) pair.  When ``track_drift_min`` is set,
    ``sd`` supplies the drift sqrt(2 lambda*) and the snapshot carries each
    particle's exact path minimum of X_u(s) + sqrt(2 lambda*) s.
    """
    require_valid(spec, permissive=permissive)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    start_pos, start_type = float(start[0]), int(start[1])
    if not 0 <= start_type < spec.d:
        raise DomainError(f"start type {start_type} out of range for d={spec.d}")
    if track_drift_min and sd is None:
        raise DomainError("track_drift_min requires spectral data")
    drift = sd.sqrt2lam if track_drift_min else 0.0
    off_off, off_cum, off_k = offspring_tables(spec)
    status, pos, typ, mins = _sim_kernel(
        rng, float(t), start_pos, start_type, np.asarray(spec.rates),
        off_off, off_cum, off_k, cap, track_drift_min, drift,
    )
    if status != 0:
        raise ResourceLimitError(
            f"population cap {cap} exceeded at t={t} (model {spec.name or 'unnamed'})"
        )
    return Snapshot(
        t=float(t), positions=pos, types=typ,
        drift_min=mins if track_drift_min else None,
    )


def max_position(s: Snapshot) -> float:
    return float(s.positions.max())


def min_position(s: Snapshot) -> float:
    return float(s.positions.min())


def typed_max(s: Snapshot, i: int) -> float | None:
    """Rightmost particle of type i, or None when no such particle is alive."""
    mask = s.types == i
    if not mask.any():
        return None
    return float(s.positions[mask].max())


def type_counts(s: Snapshot, d: int) -> np.ndarray:
    return np.bincount(s.types, minlength=d).astype(float)


def simulate_replicate(spec: ModelSpec, sd: SpectralData | None, start, t: float,
                       master_seed: int, index: int, *, cap: int = DEFAULT_POPULATION_CAP,
                       track_drift_min: bool = False, permissive: bool = False) -> Snapshot:
    """Snapshot of replicate ``index`` of the (master_seed)-seeded ensemble."""
    snap = simulate(spec, sd, start, t, generator_for(master_seed, index), cap=cap,
                    track_drift_min=track_drift_min, permissive=permissive)
    return Snapshot(t=snap.t, positions=snap.positions, types=snap.types,
                    seed=replicate_seed(master_seed, index), replicate=index,
                    drift_min=snap.drift_min)


def _replicate_values(spec, sd, start, t, indices, master_seed, collector, cap,
                      track_drift_min, permissive):
    out = []
    for idx in indices:
        snap = simulate_replicate(spec, sd, start, t, master_seed, idx, cap=cap,
                                  track_drift_min=track_drift_min, permissive=permissive)
        out.append(collector(snap))
    return out


def default_workers() -> int:
    value = os.environ.get("MTBBM_WORKERS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def run_replicates(spec: ModelSpec, sd: SpectralData | None, start, t: float, n: int,
                   master_seed: int, collector, *, cap: int = DEFAULT_POPULATION_CAP,
                   track_drift_min: bool = False, permissive: bool = False,
                   workers: int | None = None, label: str | None = None) -> EstimatorReport:
    """Mean and standard error of ``collector(snapshot)`` over n replicates.

    The collector maps a Snapshot to a float or a fixed-length vector and is
    called exactly once per replicate.  Replicate i uses the stream derived
    from (master_seed, i), so any worker count yields identical output.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    workers = default_workers() if workers is None else max(1, workers)
    args = (spec, sd, start, t)
    kwargs = (cap, track_drift_min, permissive)
    if workers == 1:
        values = _replicate_values(*args, range(n), master_seed, collector, *kwargs)
    else:
        from joblib import Parallel, delayed

        chunks = np.array_split(np.arange(n), min(workers * 4, n))
        parts = Parallel(n_jobs=workers)(
            delayed(_replicate_values)(*args, chunk, master_seed, collector, *kwargs)
            for chunk in chunks if len(chunk)
        )
        values = [v for part in parts for v in part]
    return EstimatorReport.from_samples(
        label or getattr(collector, "__name__", "collector"), values, master_seed
    )
