"""Secular system for negative-energy bound states on a metric graph.

Energies are written lambda = -kappa**2 with kappa > 0.  On a finite edge of
length l the solution is stored in the overflow-safe exponential basis

    psi(x) = p * exp(-kappa x) + q * exp(-kappa (l - x)),

equivalent to a*cosh(kappa x) + b*sinh(kappa x) with a = p + q*E and
b = q*E - p, E = exp(-kappa l).  Both exponents are nonpositive on the edge,
so entries stay finite for arbitrarily large kappa*l.  On a lead the
square-integrable solution is c * exp(-kappa x).

The matching conditions at a vertex of degree n are continuity (n - 1 rows)
plus the coupling row sum(outward derivatives) = alpha * psi(vertex), giving
a square system of size D = 2 * #finite + #leads.  kappa is an eigenvalue
root exactly when the system is singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .graph import MetricGraph, require_valid, vertex_incidences
from .rootscan import DipReport, ScanOutcome, bisect_sign, probe_geometric, scan_down

NULLSPACE_GAP_MIN = 1e6


class NoBoundState(RuntimeError):
    """No negative-energy state was found; for admissible graphs this
    signals a numerics problem, not physics."""


class DegenerateRoot(RuntimeError):
    """The numerical nullspace at the converged root is not one-dimensional."""


class PositivityViolation(RuntimeError):
    """The reconstructed state is not strictly positive (wrong root)."""


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`find_ground_state`; defaults match the desk scale."""

    tol_kappa: float = 1e-12
    kappa_max: float | None = None
    scan_step: float | None = None
    epsilon_idx: float = 1e-9
    samples_per_edge: int = 1000
    max_doublings: int = 24
    dip_refinements: int = 3
    block_cells: int = 2048


@dataclass(frozen=True)
class SecularMatrix:
    """Dense secular matrix at one kappa, with row/column labels.

    Row labels are ('continuity', vertex_id, k) or ('coupling', vertex_id);
    column labels are ('p'|'q', edge_id) or ('lead', edge_id).
    """

    kappa: float
    entries: np.ndarray
    row_labels: tuple[tuple, ...]
    col_labels: tuple[tuple, ...]


@dataclass(frozen=True)
class EdgeSolution:
    """Bound-state component on one edge at fixed kappa.

    Finite edges carry (p, q) in the exponential basis; ``coefficients``
    exposes the equivalent (a, b) of a*cosh + b*sinh.  Leads carry the tail
    amplitude c.
    """

    edge_id: str
    kind: str  # 'finite' | 'infinite'
    kappa: float
    length: float | None = None
    p: float | None = None
    q: float | None = None
    c: float | None = None

    @classmethod
    def finite(cls, edge_id, kappa, length, p, q):
        return cls(edge_id, "finite", kappa, length=length, p=p, q=q)

    @classmethod
    def infinite(cls, edge_id, kappa, c):
        return cls(edge_id, "infinite", kappa, c=c)

    @property
    def a(self) -> float:
        e = math.exp(-self.kappa * self.length)
        return self.p + self.q * e

    @property
    def b(self) -> float:
        e = math.exp(-self.kappa * self.length)
        return self.q * e - self.p

    @property
    def coefficients(self) -> tuple[float, ...]:
        if self.kind == "finite":
            return (self.a, self.b)
        return (self.c,)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kappa
        if self.kind == "finite":
            return self.p * np.exp(-k * x) + self.q * np.exp(-k * (self.length - x))
        return self.c * np.exp(-k * x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kappa
        if self.kind == "finite":
            return k * (-self.p * np.exp(-k * x) + self.q * np.exp(-k * (self.length - x)))
        return -k * self.c * np.exp(-k * x)

    def l2_mass(self, x0: float = 0.0, x1: float | None = None) -> float:
        """Integral of psi**2 over [x0, x1] (whole edge by default)."""
        k = self.kappa
        if self.kind == "infinite":
            hi = 0.0 if x1 is None else math.exp(-2 * k * x1)
            return self.c**2 * (math.exp(-2 * k * x0) - hi) / (2 * k)
        x1 = self.length if x1 is None else x1
        sq = (self.p**2 * (math.exp(-2 * k * x0) - math.exp(-2 * k * x1))
              + self.q**2 * (math.exp(-2 * k * (self.length - x1))
                             - math.exp(-2 * k * (self.length - x0)))) / (2 * k)
        cross = 2 * self.p * self.q * math.exp(-k * self.length) * (x1 - x0)
        return sq + cross

    def dirichlet_energy(self, x0: float = 0.0, x1: float | None = None) -> float:
        """Integral of psi'(x)**2 over [x0, x1] (whole edge by default)."""
        k = self.kappa
        if self.kind == "infinite":
            hi = 0.0 if x1 is None else math.exp(-2 * k * x1)
            return k * self.c**2 * (math.exp(-2 * k * x0) - hi) / 2
        x1 = self.length if x1 is None else x1
        sq = (self.p**2 * (math.exp(-2 * k * x0) - math.exp(-2 * k * x1))
              + self.q**2 * (math.exp(-2 * k * (self.length - x1))
                             - math.exp(-2 * k * (self.length - x0)))) * k / 2
        cross = -2 * self.p * self.q * math.exp(-k * self.length) * (x1 - x0) * k**2
        return sq + cross

    def scaled(self, factor: float) -> "EdgeSolution":
        if self.kind == "finite":
            return replace(self, p=self.p * factor, q=self.q * factor)
        return replace(self, c=self.c * factor)


@dataclass(frozen=True)
class Diagnostics:
    continuity_residual: float
    coupling_residual: float
    nullspace_gap: float
    min_sampled: float
    bracket: tuple[float, float]
    kappa_max_used: float
    indicator_evaluations: int
    dips: tuple[DipReport, ...]


@dataclass(frozen=True)
class GroundState:
    """Ground state of a graph: energy, per-edge components, shape indices.

    ``solutions`` and ``indices`` are aligned: finite edges in input order,
    then leads in input order.  The state is L2-normalized and positive.
    """

    kappa0: float
    lambda0: float
    solutions: tuple[EdgeSolution, ...]
    indices: tuple[int, ...]
    diagnostics: Diagnostics

    def solution(self, edge_id: str) -> EdgeSolution:
        for s in self.solutions:
            if s.edge_id == edge_id:
                return s
        raise KeyError(f"unknown edge id: {edge_id!r}")

    def index(self, edge_id: str) -> int:
        for s, idx in zip(self.solutions, self.indices):
            if s.edge_id == edge_id:
                return idx
        raise KeyError(f"unknown edge id: {edge_id!r}")


class _Structure:
    """Index maps and kappa-independent entry coefficients for one graph.

    Every matrix entry has the form u + v*kappa + (w + z*kappa)*E_e with
    E_e = exp(-kappa * length of the column's own edge), so a whole kappa
    grid is assembled with a handful of vectorized operations.
    """

    def __init__(self, graph: MetricGraph):
        self.graph = graph
        self.nf = len(graph.finite_edges)
        self.nl = len(graph.infinite_edges)
        self.D = 2 * self.nf + self.nl
        self.lengths = np.array([e.length for e in graph.finite_edges])
        self.col_labels: list[tuple] = []
        for e in graph.finite_edges:
            self.col_labels += [("p", e.id), ("q", e.id)]
        for e in graph.infinite_edges:
            self.col_labels.append(("lead", e.id))
        self.row_labels: list[tuple] = []
        self.entries: dict[tuple[int, int], list[float]] = {}

        def add(r, c, u=0.0, v=0.0, w=0.0, z=0.0):
            acc = self.entries.setdefault((r, c), [0.0, 0.0, 0.0, 0.0])
            acc[0] += u
            acc[1] += v
            acc[2] += w
            acc[3] += z

        def value_terms(inc):
            kind, i = inc
            if kind == "start":
                return [(2 * i, 1.0, 0.0, 0.0, 0.0), (2 * i + 1, 0.0, 0.0, 1.0, 0.0)]
            if kind == "end":
                return [(2 * i, 0.0, 0.0, 1.0, 0.0), (2 * i + 1, 1.0, 0.0, 0.0, 0.0)]
            return [(2 * self.nf + i, 1.0, 0.0, 0.0, 0.0)]

        def outward_terms(inc):
            kind, i = inc
            if kind == "start":
                return [(2 * i, 0.0, -1.0, 0.0, 0.0), (2 * i + 1, 0.0, 0.0, 0.0, 1.0)]
            if kind == "end":
                return [(2 * i, 0.0, 0.0, 0.0, 1.0), (2 * i + 1, 0.0, -1.0, 0.0, 0.0)]
            return [(2 * self.nf + i, 0.0, -1.0, 0.0, 0.0)]

        incidences = vertex_incidences(graph)
        row = 0
        for v in graph.vertices:
            incs = incidences[v.id]
            for t in range(len(incs) - 1):
                for c, u, vv, w, z in value_terms(incs[t]):
                    add(row, c, u, vv, w, z)
                for c, u, vv, w, z in value_terms(incs[t + 1]):
                    add(row, c, -u, -vv, -w, -z)
                self.row_labels.append(("continuity", v.id, t))
                row += 1
            for inc in incs:
                for c, u, vv, w, z in outward_terms(inc):
                    add(row, c, u, vv, w, z)
            for c, u, vv, w, z in value_terms(incs[0]):
                add(row, c, -v.alpha * u, -v.alpha * vv, -v.alpha * w, -v.alpha * z)
            self.row_labels.append(("coupling", v.id))
            row += 1
        assert row == self.D, "vertex conditions must give a square system"
        self._items = [
            (r, c, tuple(coef), c // 2 if c < 2 * self.nf else -1)
            for (r, c), coef in self.entries.items()
        ]

    def assemble(self, kappas: np.ndarray) -> np.ndarray:
        kappas = np.asarray(kappas, dtype=float)
        m = kappas.shape[0]
        E = np.exp(-np.outer(kappas, self.lengths)) if self.nf else None
        out = np.zeros((m, self.D, self.D))
        for r, c, (u, v, w, z), eidx in self._items:
            val = u + v * kappas
            if w != 0.0 or z != 0.0:
                val = val + (w + z * kappas) * E[:, eidx]
            out[:, r, c] = val
        return out

    def indicator(self, kappas: np.ndarray) -> np.ndarray:
        return _equilibrated_det(self.assemble(kappas))

    def alpha_sum(self) -> float:
        return float(sum(abs(v.alpha) for v in self.graph.vertices))


def _equilibrated_det(stack: np.ndarray) -> np.ndarray:
    """Determinant after scaling each row to unit max-norm.

    Positive row scalings keep the sign and the zeros of det; a row of exact
    zeros means the matrix is singular outright, reported as 0.
    """
    scale = np.abs(stack).max(axis=2)
    singular = (scale == 0.0).any(axis=1)
    safe = np.where(scale == 0.0, 1.0, scale)
    dets = np.linalg.det(stack / safe[:, :, None])
    if singular.any():
        dets = np.where(singular, 0.0, dets)
    return dets


def build_secular_matrix(graph: MetricGraph, kappa: float) -> SecularMatrix:
    """Assemble the matching-condition matrix at one kappa > 0."""
    require_valid(graph)
    if not (isinstance(kappa, (int, float)) and math.isfinite(kappa) and kappa > 0):
        raise ValueError(f"kappa must be a positive finite number, got {kappa!r}")
    st = _Structure(graph)
    entries = st.assemble(np.array([float(kappa)]))[0]
    return SecularMatrix(float(kappa), entries, tuple(st.row_labels), tuple(st.col_labels))


def singularity_indicator(matrix: SecularMatrix) -> float:
    """Signed scalar vanishing exactly where the secular matrix is singular."""
    return float(_equilibrated_det(matrix.entries[None, :, :])[0])


def classify_coefficients(a: float, b: float, epsilon_idx: float = 1e-9) -> int:
    """Shape index from cosh/sinh coefficients: +1 cosh-like, -1 sinh-like,
    0 for a pure exponential (|a| and |b| equal to relative epsilon_idx)."""
    fa, fb = abs(a), abs(b)
    big = max(fa, fb)
    if big == 0.0:
        raise ValueError("zero solution on edge cannot be classified")
    if abs(fa - fb) <= epsilon_idx * big:
        return 0
    return 1 if fa > fb else -1


def classify_edge_index(solution: EdgeSolution, epsilon_idx: float = 1e-9) -> int:
    """Shape index of one edge component; leads are always 0.

    For finite edges the comparison |a| vs |b| is done through the identity
    |a|**2 - |b|**2 = 4*p*q*exp(-kappa l), which avoids the cancellation in
    a and b when kappa*l is large.
    """
    if solution.kind == "infinite":
        if solution.c == 0.0:
            raise ValueError("zero solution on edge cannot be classified")
        return 0
    a, b = solution.a, solution.b
    big = max(abs(a), abs(b))
    if big == 0.0:
        raise ValueError("zero solution on edge cannot be classified")
    diff = 4.0 * solution.p * solution.q * math.exp(-solution.kappa * solution.length)
    diff /= abs(a) + abs(b)
    if abs(diff) <= epsilon_idx * big:
        return 0
    return 1 if diff > 0 else -1


def _vertex_values(graph, solutions):
    """Per vertex: lists of incident values and outward derivatives at 0+."""
    by_id = {s.edge_id: s for s in solutions}
    out: dict[str, tuple[list[float], list[float]]] = {}
    for vid, incs in vertex_incidences(graph).items():
        vals, outd = [], []
        for kind, i in incs:
            if kind == "lead":
                s = by_id[graph.infinite_edges[i].id]
                vals.append(float(s.value(0.0)))
                outd.append(float(s.derivative(0.0)))
            else:
                s = by_id[graph.finite_edges[i].id]
                x = 0.0 if kind == "start" else s.length
                sgn = 1.0 if kind == "start" else -1.0
                vals.append(float(s.value(x)))
                outd.append(sgn * float(s.derivative(x)))
        out[vid] = (vals, outd)
    return out


def vertex_condition_residuals(
    graph: MetricGraph, solutions: Sequence[EdgeSolution]
) -> tuple[float, float]:
    """Max continuity and coupling residuals, relative to the state's scale.

    For a positive convex-on-edges state the sup norm is attained at a
    vertex, so the vertex values set the scale; the coupling residual is
    additionally scaled by max(1, kappa) since derivative terms grow with
    kappa.
    """
    kappa = solutions[0].kappa
    per_vertex = _vertex_values(graph, solutions)
    sup = max(abs(v) for vals, _ in per_vertex.values() for v in vals)
    if sup == 0.0:
        return math.inf, math.inf
    cont = 0.0
    coup = 0.0
    for v in graph.vertices:
        vals, outd = per_vertex[v.id]
        cont = max(cont, (max(vals) - min(vals)) / sup)
        mismatch = abs(sum(outd) - v.alpha * (sum(vals) / len(vals)))
        coup = max(coup, mismatch / (sup * max(1.0, kappa)))
    return cont, coup


def _nullvector(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit right-singular vector of the smallest singular value and the
    nullspace simplicity gap (second-smallest over smallest)."""
    scale = np.abs(matrix).max(axis=1)
    safe = np.where(scale == 0.0, 1.0, scale)
    _, svals, vt = np.linalg.svd(matrix / safe[:, None])
    if len(svals) == 1:
        return vt[-1], math.inf
    if svals[-1] == 0.0:
        return vt[-1], math.inf
    return vt[-1], float(svals[-2] / svals[-1])


def _build_solutions(graph, kappa0, vec):
    sols = []
    nf = len(graph.finite_edges)
    for i, e in enumerate(graph.finite_edges):
        sols.append(EdgeSolution.finite(e.id, kappa0, e.length, float(vec[2 * i]), float(vec[2 * i + 1])))
    for k, e in enumerate(graph.infinite_edges):
        sols.append(EdgeSolution.infinite(e.id, kappa0, float(vec[2 * nf + k])))
    return sols


def _reconstruct(graph, kappa0, options):
    st = _Structure(graph)
    vec, gap = _nullvector(st.assemble(np.array([kappa0]))[0])
    if gap < NULLSPACE_GAP_MIN:
        raise DegenerateRoot(
            f"nullspace not simple at kappa={kappa0!r}: "
            f"singular-value gap {gap:.3g} < {NULLSPACE_GAP_MIN:.0e}"
        )
    sols = _build_solutions(graph, kappa0, vec)

    anchor = min(graph.vertices, key=lambda v: (v.alpha,))
    vals, _ = _vertex_values(graph, sols)[anchor.id]
    if vals[0] < 0:
        sols = [s.scaled(-1.0) for s in sols]
    mass = sum(s.l2_mass() for s in sols)
    if mass <= 0:
        raise PositivityViolation("reconstructed state has zero mass")
    sols = [s.scaled(1.0 / math.sqrt(mass)) for s in sols]

    min_sampled = math.inf
    for s in sols:
        if s.kind == "finite":
            xs = np.linspace(0.0, s.length, options.samples_per_edge)
            m = float(np.min(s.value(xs)))
        else:
            m = s.c
        min_sampled = min(min_sampled, m)
    if not min_sampled > 0.0:
        raise PositivityViolation(
            f"state is not strictly positive (sampled min {min_sampled:.3g}); "
            "kappa may be an excited root"
        )
    return tuple(sols), gap, float(min_sampled)


def reconstruct_eigenfunction(
    graph: MetricGraph, kappa0: float, options: SolverOptions | None = None
) -> list[EdgeSolution]:
    """Normalized positive eigenfunction at a converged root kappa0.

    Raises DegenerateRoot when the numerical nullspace is not simple and
    PositivityViolation when kappa0 is not the ground-state root.
    """
    require_valid(graph)
    if not kappa0 > 0:
        raise ValueError("kappa0 must be positive")
    sols, _, _ = _reconstruct(graph, float(kappa0), options or SolverOptions())
    return list(sols)


def find_ground_state(graph: MetricGraph, options: SolverOptions | None = None) -> GroundState:
    """Locate the largest kappa root, reconstruct and classify the state.

    Downward scan over a uniform kappa grid brackets the top root; plain
    bisection converges it to tol_kappa.  The search ceiling starts at
    max(sum |alpha|, 1) and doubles when the root lands in the topmost cell
    or no sign change is found: compact graphs with short edges bind more
    strongly than any point-interaction bound, so a fixed ceiling would be
    wrong.  A geometric tail probe below the grid guards against extremely
    weak binding.
    """
    require_valid(graph)
    opts = options or SolverOptions()
    st = _Structure(graph)
    kappa_max = opts.kappa_max if opts.kappa_max is not None else max(st.alpha_sum(), 1.0)
    if not kappa_max > 0:
        raise ValueError("kappa_max must be positive")

    evals = 0
    dips: tuple[DipReport, ...] = ()
    bracket = None
    outcome: ScanOutcome | None = None
    for _ in range(opts.max_doublings):
        step = opts.scan_step if opts.scan_step is not None else min(1e-2, kappa_max / 1e4)
        outcome = scan_down(
            st.indicator,
            kappa_max,
            step,
            block=opts.block_cells,
            dip_refinements=opts.dip_refinements,
        )
        evals += outcome.evaluations
        dips += outcome.dips
        if outcome.bracket is not None and not outcome.at_top:
            bracket = outcome.bracket
            break
        if outcome.bracket is None:
            tail = probe_geometric(st.indicator, step, step * 1e-6)
            evals += 40
            if tail is not None:
                bracket = tail
                break
        kappa_max *= 2.0
    if bracket is None:
        raise NoBoundState(
            f"no sign change of the secular indicator up to kappa={kappa_max!r}; "
            f"unresolved dips: {len(dips)}"
        )

    lo, hi = bracket
    kappa0 = bisect_sign(lambda k: float(st.indicator(np.array([k]))[0]), lo, hi, opts.tol_kappa)
    sols, gap, min_sampled = _reconstruct(graph, kappa0, opts)
    indices = tuple(classify_edge_index(s, opts.epsilon_idx) for s in sols)
    cont, coup = vertex_condition_residuals(graph, sols)
    diag = Diagnostics(
        continuity_residual=cont,
        coupling_residual=coup,
        nullspace_gap=gap,
        min_sampled=min_sampled,
        bracket=(lo, hi),
        kappa_max_used=kappa_max,
        indicator_evaluations=evals,
        dips=dips,
    )
    return GroundState(kappa0, -kappa0 * kappa0, sols, indices, diag)
