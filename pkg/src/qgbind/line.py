"""Point interactions on a line or a loop, solved through the kernel matrix.

For sites y_1 < ... < y_n with strengths alpha_i < 0, the n x n matrix

    Gamma(kappa)_ij = -delta_ij / alpha_i - G_kappa(y_i, y_j)

has smallest eigenvalue mu0(kappa); the ground-state kappa is the largest
root of mu0.  On the line G_kappa(x, y) = exp(-kappa |x-y|) / (2 kappa); on
a loop of circumference L the kernel is written with decaying exponentials,

    G = (exp(-kappa d) + exp(-kappa (2L - d))) / (2 kappa (1 - exp(-2 kappa L))),

with d the arc distance, so it stays finite for large kappa*L.  For a fixed
positive vector c the quadratic form (c, Gamma(kappa) c) is strictly
increasing in kappa and in every pairwise distance, which is what drives the
distance monotonicity of the energy checked here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .graph import FiniteEdge, InfiniteEdge, MetricGraph, VertexSpec
from .rootscan import probe_geometric, scan_down


class NoRoot(RuntimeError):
    """mu0 has no root in the searched range; for attractive configs this
    signals a numerics problem."""


class MonotonicityViolation(AssertionError):
    """A stretched configuration failed to raise the ground-state energy."""


def _check_sites_strengths(sites, strengths):
    if len(sites) != len(strengths) or not sites:
        raise ValueError("need equally many sites and strengths, at least one")
    if any(not math.isfinite(y) for y in sites):
        raise ValueError("sites must be finite")
    if any(not (math.isfinite(a) and a < 0) for a in strengths):
        raise ValueError("strengths must be finite and negative")
    if any(b <= a for a, b in zip(sites, sites[1:])):
        raise ValueError("sites must be strictly increasing")


@dataclass(frozen=True)
class LineConfig:
    """Attractive point interactions on the real line."""

    sites: tuple[float, ...]
    strengths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(float(y) for y in self.sites))
        object.__setattr__(self, "strengths", tuple(float(a) for a in self.strengths))
        _check_sites_strengths(self.sites, self.strengths)

    @property
    def n(self) -> int:
        return len(self.sites)

    def gaps(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.sites, self.sites[1:]))

    def translated(self, shift: float) -> "LineConfig":
        return LineConfig(tuple(y + shift for y in self.sites), self.strengths)


@dataclass(frozen=True)
class LoopConfig:
    """Attractive point interactions on a loop of given circumference."""

    circumference: float
    sites: tuple[float, ...]
    strengths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(float(y) for y in self.sites))
        object.__setattr__(self, "strengths", tuple(float(a) for a in self.strengths))
        if not (math.isfinite(self.circumference) and self.circumference > 0):
            raise ValueError("circumference must be positive")
        _check_sites_strengths(self.sites, self.strengths)
        if self.sites[0] < 0 or self.sites[-1] >= self.circumference:
            raise ValueError("sites must lie in [0, circumference)")

    @property
    def n(self) -> int:
        return len(self.sites)


@dataclass(frozen=True)
class GammaMatrix:
    kappa: float
    entries: np.ndarray


def _line_distances(config: LineConfig) -> np.ndarray:
    y = np.asarray(config.sites)
    return np.abs(y[:, None] - y[None, :])


def _loop_distances(config: LoopConfig) -> np.ndarray:
    y = np.asarray(config.sites)
    direct = np.abs(y[:, None] - y[None, :])
    return np.minimum(direct, config.circumference - direct)


def _gamma_line_stack(config: LineConfig, kappas: np.ndarray) -> np.ndarray:
    dist = _line_distances(config)
    k = kappas[:, None, None]
    g = np.exp(-k * dist) / (2.0 * k)
    out = -g
    idx = np.arange(config.n)
    out[:, idx, idx] -= 1.0 / np.asarray(config.strengths)
    return out

def _gamma_loop_stack(config: LoopConfig, kappas: np.ndarray) -> np.ndarray:
    # periodic kernel cosh(kappa (L/2 - d)) / (2 kappa sinh(kappa L / 2)) in
    # overflow-free form; d is the minimal arc distance, in [0, L/2]
    dist = _loop_distances(config)
    L = config.circumference
    k = kappas[:, None, None]
    g = (np.exp(-k * dist) + np.exp(-k * (L - dist))) / (
        2.0 * k * (1.0 - np.exp(-k * L))
    )
    out = -g
    idx = np.arange(config.n)
    out[:, idx, idx] -= 1.0 / np.asarray(config.strengths)
    return out


def gamma_line(config: LineConfig, kappa: float) -> GammaMatrix:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return GammaMatrix(float(kappa), _gamma_line_stack(config, np.array([float(kappa)]))[0])


def gamma_loop(config: LoopConfig, kappa: float) -> GammaMatrix:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return GammaMatrix(float(kappa), _gamma_loop_stack(config, np.array([float(kappa)]))[0])


def mu0(gamma: GammaMatrix) -> float:
    """Smallest eigenvalue of the kernel matrix."""
    return float(np.linalg.eigvalsh(gamma.entries)[0])


def min_eigenpair(gamma: GammaMatrix) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and its eigenvector, oriented to positive sum."""
    w, v = np.linalg.eigh(gamma.entries)
    vec = v[:, 0]
    if vec.sum() < 0:
        vec = -vec
    return float(w[0]), vec


@dataclass(frozen=True)
class LineGroundState:
    kappa0: float
    lambda0: float
    weights: tuple[float, ...]


def _solve_mu0(stack_fn, alpha_sum: float, tol_kappa: float) -> tuple[float, np.ndarray]:
    """Largest root of mu0 via descending scan plus Brent refinement."""

    def batch(ks):
        return np.linalg.eigvalsh(stack_fn(np.asarray(ks, dtype=float)))[:, 0]

    def scalar(k):
        return float(batch(np.array([k]))[0])

    half = 0.5 * alpha_sum
    kappa_max = half + max(0.05 * half, 0.05)
    bracket = None
    for _ in range(60):
        step = min(1e-2, kappa_max / 1e4)
        outcome = scan_down(batch, kappa_max, step)
        if outcome.bracket is not None and not outcome.at_top:
            bracket = outcome.bracket
            break
        if outcome.bracket is None:
            tail = probe_geometric(batch, step, step * 1e-6)
            if tail is not None:
                bracket = tail
                break
        kappa_max *= 2.0
    if bracket is None:
        raise NoRoot(f"mu0 has no sign change below kappa={kappa_max!r}")
    lo, hi = bracket
    kappa0 = lo if lo == hi else brentq(scalar, lo, hi, xtol=tol_kappa)
    ev, vec = np.linalg.eigh(stack_fn(np.array([kappa0]))[0])
    weights = vec[:, 0]
    if weights.sum() < 0:
        weights = -weights
    return float(kappa0), weights


def ground_state_line(config: LineConfig, *, tol_kappa: float = 1e-12) -> LineGroundState:
    """Ground state of the line configuration.

    The returned weights are the minimizing vector at the root; they are the
    coefficients of the kernel superposition psi = sum_i w_i G(x, y_i) and
    are strictly one-signed for the ground state.
    """
    kappa0, w = _solve_mu0(
        lambda ks: _gamma_line_stack(config, ks),
        sum(abs(a) for a in config.strengths),
        tol_kappa,
    )
    return LineGroundState(kappa0, -kappa0 * kappa0, tuple(float(x) for x in w))


def ground_state_loop(config: LoopConfig, *, tol_kappa: float = 1e-12) -> LineGroundState:
    """Ground state of the loop configuration; binds at least as strongly as
    the same sites on the line."""
    kappa0, w = _solve_mu0(
        lambda ks: _gamma_loop_stack(config, ks),
        sum(abs(a) for a in config.strengths),
        tol_kappa,
    )
    return LineGroundState(kappa0, -kappa0 * kappa0, tuple(float(x) for x in w))


def derivative_signs(
    config: LineConfig, kappa0: float, weights
) -> tuple[tuple[int, int], ...]:
    """Signs of psi' just left and right of each site (diagnostic only)."""
    y = np.asarray(config.sites)
    w = np.asarray(weights, dtype=float)
    out = []
    for i in range(config.n):
        right = sum(
            w[j] * (1.0 if y[j] > y[i] else -1.0) * math.exp(-kappa0 * abs(y[j] - y[i]))
            for j in range(config.n)
        )
        left = sum(
            w[j] * (1.0 if y[j] >= y[i] else -1.0) * math.exp(-kappa0 * abs(y[j] - y[i]))
            for j in range(config.n)
        )
        out.append((int(np.sign(left)), int(np.sign(right))))
    return tuple(out)


def stretch_gap(config: LineConfig, gap_index: int, eta: float) -> LineConfig:
    """Widen the gap after site ``gap_index`` by eta > 0, shifting the tail."""
    if not 0 <= gap_index < config.n - 1:
        raise ValueError(f"gap_index out of range: {gap_index}")
    if not eta > 0:
        raise ValueError("eta must be positive")
    sites = list(config.sites)
    for j in range(gap_index + 1, config.n):
        sites[j] += eta
    return LineConfig(tuple(sites), config.strengths)


def grow_loop(config: LoopConfig, delta: float) -> LoopConfig:
    """Lengthen the circumference by delta, keeping site positions fixed;
    no pairwise arc distance shrinks."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return LoopConfig(config.circumference + delta, config.sites, config.strengths)


@dataclass(frozen=True)
class MonotonicityReport:
    lambda_before: float
    lambda_after: float

    @property
    def margin(self) -> float:
        return self.lambda_after - self.lambda_before


def check_monotonicity_line(base: LineConfig, stretched: LineConfig) -> MonotonicityReport:
    """Solve both configurations and assert the energy strictly increased.

    Precondition: same strengths, no pairwise distance shrinks, and at least
    one grows.  Raises MonotonicityViolation with both values otherwise.
    """
    if base.strengths != stretched.strengths:
        raise ValueError("configurations must share strengths")
    d0 = _line_distances(base)
    d1 = _line_distances(stretched)
    if np.any(d1 < d0 - 1e-15):
        raise ValueError("stretched configuration shrinks a pairwise distance")
    if not np.any(d1 > d0 + 1e-15):
        raise ValueError("stretched configuration increases no pairwise distance")
    before = ground_state_line(base)
    after = ground_state_line(stretched)
    report = MonotonicityReport(before.lambda0, after.lambda0)
    if not report.margin > 0:
        raise MonotonicityViolation(
            f"energy did not increase: before={before.lambda0!r} after={after.lambda0!r}"
        )
    return report


def as_chain_graph(config: LineConfig) -> MetricGraph:
    """The same operator as a metric graph: a path of finite edges with one
    lead at each end; a single site becomes one vertex with two leads."""
    vertices = tuple(
        VertexSpec(f"v{i + 1}", a) for i, a in enumerate(config.strengths)
    )
    edges = tuple(
        FiniteEdge(f"e{i + 1}", f"v{i + 1}", f"v{i + 2}", g)
        for i, g in enumerate(config.gaps())
    )
    leads = (
        InfiniteEdge("lead_left", "v1"),
        InfiniteEdge("lead_right", f"v{config.n}"),
    )
    return MetricGraph(vertices, edges, leads)


def as_cycle_graph(config: LoopConfig) -> MetricGraph:
    """The loop as a metric graph.  A single site is split with an auxiliary
    alpha = 0 vertex at the antipode (self-loops are not representable)."""
    if config.n == 1:
        half = config.circumference / 2.0
        return MetricGraph(
            (VertexSpec("v1", config.strengths[0]), VertexSpec("aux", 0.0)),
            (FiniteEdge("arc1", "v1", "aux", half), FiniteEdge("arc2", "aux", "v1", half)),
        )
    vertices = tuple(
        VertexSpec(f"v{i + 1}", a) for i, a in enumerate(config.strengths)
    )
    gaps = [b - a for a, b in zip(config.sites, config.sites[1:])]
    closing = config.circumference - (config.sites[-1] - config.sites[0])
    edges = [
        FiniteEdge(f"arc{i + 1}", f"v{i + 1}", f"v{i + 2}", g) for i, g in enumerate(gaps)
    ]
    edges.append(FiniteEdge(f"arc{config.n}", f"v{config.n}", "v1", closing))
    return MetricGraph(vertices, tuple(edges))
