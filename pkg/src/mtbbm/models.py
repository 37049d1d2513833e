"""Multitype branching model data: rates, offspring laws, and their validation.

A model has ``d`` types.  A type-``i`` particle lives an Exp(a_i) lifetime and
then splits into an offspring vector ``k`` (``k[j]`` children of type ``j``)
drawn from the finite-support law ``offspring[i]``.  All offspring laws here
have finite support, so every moment condition is checked exactly.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ModelError

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """Immutable model description.

    rates: positive branching rates, one per type (1/time).
    offspring: per type, a tuple of (offspring vector, probability) pairs;
        offspring vectors are length-d tuples of nonnegative ints and the
        probabilities of each type sum to one.
    alpha0: exponent in (0, 1] used by the moment condition and the
        generating-function linearization bound.
    """

    rates: tuple[float, ...]
    offspring: tuple[tuple[tuple[tuple[int, ...], float], ...], ...]
    alpha0: float = 1.0
    name: str = ""

    @property
    def d(self) -> int:
        return len(self.rates)

    def __post_init__(self):
        d = len(self.rates)
        if d < 1:
            raise ModelError("model needs at least one type")
        if len(self.offspring) != d:
            raise ModelError("offspring must define one law per type")
        if not 0.0 < self.alpha0 <= 1.0:
            raise ModelError("alpha0 must lie in (0, 1]")
        for i, a in enumerate(self.rates):
            if not np.isfinite(a) or a <= 0:
                raise ModelError(f"rate of type {i} must be finite and > 0, got {a}")
        for i, law in enumerate(self.offspring):
            if len(law) == 0:
                raise ModelError(f"type {i} has an empty offspring law")
            total = 0.0
            for kvec, p in law:
                if len(kvec) != d:
                    raise ModelError(f"type {i}: offspring vector {kvec} has wrong length")
                if any((not isinstance(k, (int, np.integer))) or k < 0 for k in kvec):
                    raise ModelError(f"type {i}: offspring vector {kvec} must be nonnegative ints")
                if not np.isfinite(p) or p < 0:
                    raise ModelError(f"type {i}: probability {p} is not a valid probability")
                total += p
            if abs(total - 1.0) > _PROB_TOL:
                raise ModelError(f"type {i}: offspring probabilities sum to {total!r}, not 1")


@dataclass(frozen=True)
class ValidationReport:
    """Assumption flags for a structurally well-formed model.

    ``ok`` requires every flag including the no-self-offspring condition
    (checked only for d >= 2; the single-type model is the classical case and
    necessarily reproduces its own type).  ``ok_permissive`` waives only that
    flag.
    """

    irreducible: bool
    no_death: bool
    pure_jump: bool
    moments_ok: bool
    messages: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.irreducible and self.no_death and self.pure_jump and self.moments_ok

    @property
    def ok_permissive(self) -> bool:
        return self.irreducible and self.no_death and self.moments_ok


def mean_matrix(spec: ModelSpec) -> np.ndarray:
    """Entrywise mean offspring counts: M[i, j] = E(# type-j children of type i)."""
    m = np.zeros((spec.d, spec.d))
    for i, law in enumerate(spec.offspring):
        for kvec, p in law:
            m[i] += p * np.asarray(kvec, dtype=float)
    return m


def branching_matrix(spec: ModelSpec) -> np.ndarray:
    """A[i, j] = a_i (M[i, j] - delta_ij); exp(tA) is the mean semigroup."""
    m = mean_matrix(spec)
    a = np.asarray(spec.rates)
    return a[:, None] * (m - np.eye(spec.d))


def _strongly_connected(adj: np.ndarray) -> bool:
    # Kosaraju light: reachability from node 0 in graph and transpose.
    d = adj.shape[0]
    if d == 1:
        return True

    def reach(mat):
        seen = np.zeros(d, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in np.nonzero(mat[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return seen.all()

    return reach(adj) and reach(adj.T)


@functools.lru_cache(maxsize=None)
def validate_model(spec: ModelSpec) -> ValidationReport:
    """Check the standing assumptions; reports rather than raising.

    Structural defects (bad probabilities etc.) raise ModelError at
    construction time; this function only decides the mathematical flags:
    irreducibility of the mean matrix (strong connectivity of the directed
    graph i -> j whenever M[i, j] > 0), no-death (no all-zero offspring
    vector with positive probability), the no-self-offspring condition for
    d >= 2, and finiteness of the (1 + alpha0)-moments, which holds
    automatically for finite-support laws.
    """
    m = mean_matrix(spec)
    msgs: list[str] = []

    irreducible = _strongly_connected(m > 0)
    if not irreducible:
        msgs.append("mean matrix is reducible: the type graph is not strongly connected")

    no_death = True
    for i, law in enumerate(spec.offspring):
        for kvec, p in law:
            if p > 0 and all(k == 0 for k in kvec):
                no_death = False
                msgs.append(f"type {i} can die (all-zero offspring vector with p={p})")

    if spec.d == 1:
        pure_jump = True
    else:
        bad = [i for i in range(spec.d) if m[i, i] > 0]
        pure_jump = not bad
        for i in bad:
            msgs.append(
                f"type {i} has mean self-offspring {m[i, i]:g}; "
                "strict mode requires zero self-offspring for d >= 2"
            )

    moments_ok = True  # finite support: all moments finite
    if not msgs:
        msgs.append("all assumptions hold")
    return ValidationReport(irreducible, no_death, pure_jump, moments_ok, tuple(msgs))


def require_valid(spec: ModelSpec, permissive: bool = False) -> ValidationReport:
    """Validate and raise ModelError unless the model passes (strict by default)."""
    report = validate_model(spec)
    passed = report.ok_permissive if permissive else report.ok
    if not passed:
        raise ModelError("model fails assumptions: " + "; ".join(report.messages))
    return report


def offspring_gf(spec: ModelSpec, i: int, u) -> float:
    """Probability generating function psi_i(u) = E prod_j u_j^(k_j) of type i."""
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.d,):
        raise DomainError(f"u must have shape ({spec.d},)")
    if np.any(u < 0) or np.any(u > 1):
        raise DomainError("u must lie in [0, 1]^d")
    total = 0.0
    for kvec, p in spec.offspring[i]:
        term = p
        for j, k in enumerate(kvec):
            if k:
                term *= u[j] ** k
        total += term
    return float(total)


def varphi(spec: ModelSpec, i: int, v) -> float:
    """Branching nonlinearity phi_i(v) = 1 - psi_i(1 - v) on [0, 1]^d."""
    v = np.asarray(v, dtype=float)
    if v.shape != (spec.d,):
        raise DomainError(f"v must have shape ({spec.d},)")
    if np.any(v < 0) or np.any(v > 1):
        raise DomainError("v must lie in [0, 1]^d")
    return 1.0 - offspring_gf(spec, i, 1.0 - v)


def varphi_linearization_gap(spec: ModelSpec, i: int, v) -> float:
    """Relative gap 1 - phi_i(v) / <M[i, :], v> of the linearization at 0.

    Nonnegative by Bernoulli's inequality and bounded by
    ``linearization_constant(spec, i) * max(v) ** alpha0``.
    """
    v = np.asarray(v, dtype=float)
    denom = float(mean_matrix(spec)[i] @ v)
    if denom <= 0:
        raise DomainError("denominator <M[i, :], v> must be positive")
    return 1.0 - varphi(spec, i, v) / denom


def linearization_constant(spec: ModelSpec, i: int) -> float:
    """Explicit constant Gamma(i) bounding the linearization gap.

    Gamma(i) = max_l sum_k p_k(i) k_l (sum_j k_j^alpha0) / min_l M[i, l],
    with both extrema over types l actually produced by type i.  Loose when
    some positive mean entry is very small; reported, not enforced.
    """
    m = mean_matrix(spec)[i]
    produced = np.nonzero(m > 0)[0]
    num = 0.0
    for ell in produced:
        c_ell = 0.0
        for kvec, p in spec.offspring[i]:
            karr = np.asarray(kvec, dtype=float)
            c_ell += p * karr[ell] * float(np.sum(karr**spec.alpha0))
        num = max(num, c_ell)
    return float(num / m[produced].min())


@functools.lru_cache(maxsize=None)
def offspring_tables(spec: ModelSpec):
    """Flat per-type offspring tables for the simulation kernels.

    Returns (offsets, cum, kvecs): type i owns atoms offsets[i]:offsets[i+1];
    cum holds the within-type cumulative probabilities (last entry forced to
    exactly 1), kvecs the offspring count vectors.
    """
    offsets = np.zeros(spec.d + 1, dtype=np.int64)
    cums = []
    kvecs = []
    for i, law in enumerate(spec.offspring):
        probs = np.array([p for _, p in law])
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        cums.append(cum)
        kvecs.extend(k for k, _ in law)
        offsets[i + 1] = offsets[i] + len(law)
    return offsets, np.concatenate(cums), np.array(kvecs, dtype=np.int64)


def model_a() -> ModelSpec:
    """Single-type binary branching at rate 1 (classical case)."""
    return ModelSpec(rates=(1.0,), offspring=((((2,), 1.0),),), name="A")


def model_b() -> ModelSpec:
    """Two symmetric types; each deterministically spawns two of the other."""
    return ModelSpec(
        rates=(1.0, 1.0),
        offspring=(
            (((0, 2), 1.0),),
            (((2, 0), 1.0),),
        ),
        name="B",
    )


def model_c() -> ModelSpec:
    """Asymmetric two-type model with a random offspring count."""
    return ModelSpec(
        rates=(1.0, 2.0),
        offspring=(
            (((0, 2), 0.5), ((0, 1), 0.5)),
            (((1, 0), 1.0),),
        ),
        name="C",
    )


BUILTIN_MODELS = {"A": model_a, "B": model_b, "C": model_c}
