"""Spectral theory of L = -laplacian + Q on a graph or window.

The operator acts on interior vertices.  Three boundary treatments:

* dirichlet: functions vanish on the window boundary; boundary neighbors
  still count in the vertex degree, so the stencil feels the wall.
* neumann: boundary values are eliminated through the reflection relation
  sum over interior neighbors of grad_xy f = 0, i.e. f(b) is the mean of
  b's interior neighbors.
* none: the whole graph, no boundary.

L is self-adjoint in the degree-weighted inner product; eigensystems are
computed from the degree-conjugated symmetric matrix with the deterministic
Jacobi solver, returned ascending with weighted-orthonormal eigenfunctions
whose first meaningful component is positive.  Eigenvalue indices are
1-based in reports: values[0] is the first eigenvalue.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .calculus import DEFAULT_CONFIG, CalculusConfig, laplacian, weighted_inner
from .errors import (
    DomainError,
    NonpositiveSpectrumError,
    NumericalError,
    ValidationError,
)
from .graph import Graph, SubgraphWindow, VertexFunction
from .jacobi import sorted_eigh
from .rng import Lcg64

BOUNDARY_CONDITIONS = ("dirichlet", "neumann", "none")

Domain = Union[Graph, SubgraphWindow]


@dataclass(frozen=True)
class OperatorSpec:
    """L = -laplacian + Q on a region with a boundary condition."""

    region: Domain
    bc: str = "none"
    potential: Union[None, float, VertexFunction] = None
    config: CalculusConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValidationError(f"bc must be one of {BOUNDARY_CONDITIONS}, got {self.bc!r}")
        if self.bc == "none" and isinstance(self.region, SubgraphWindow):
            raise ValidationError("bc 'none' runs on the whole graph, not a window")
        if self.bc != "none" and isinstance(self.region, Graph):
            raise ValidationError(f"bc {self.bc!r} needs a window with a boundary")

    @property
    def graph(self) -> Graph:
        return self.region if isinstance(self.region, Graph) else self.region.graph

    @property
    def interior(self) -> tuple[str, ...]:
        return (
            self.region.vertices
            if isinstance(self.region, Graph)
            else self.region.interior
        )

    @property
    def boundary(self) -> tuple[str, ...]:
        return () if isinstance(self.region, Graph) else self.region.boundary

    def potential_at(self, x: str) -> float:
        if self.potential is None:
            return 0.0
        if isinstance(self.potential, VertexFunction):
            return self.potential.value(x)
        return float(self.potential)


def symmetric_matrix(spec: OperatorSpec) -> np.ndarray:
    """Degree-conjugated matrix of L on the interior, exactly symmetric."""
    g = spec.graph
    interior = spec.interior
    pos = {v: i for i, v in enumerate(interior)}
    inner = set(interior)
    bset = set(spec.boundary)
    scale = spec.config.laplacian_scale
    n = len(interior)
    deg = np.array([g.degree(v) for v in interior], dtype=float)
    M = np.zeros((n, n))
    for x in interior:
        i = pos[x]
        M[i, i] = scale + spec.potential_at(x)
        for y in g.neighbors(x):
            if y in inner:
                j = pos[y]
                if j > i:
                    val = -scale / math.sqrt(deg[i] * deg[j])
                    M[i, j] = val
                    M[j, i] = val
    if spec.bc == "neumann":
        # eliminate each boundary vertex through the mean of its interior
        # neighbors; the correction stays symmetric because the coupling
        # x -> b -> z weighs both directions by 1/#(interior nbrs of b)
        for b in spec.boundary:
            inb = [z for z in g.neighbors(b) if z in inner]
            if not inb:
                continue
            wgt = 1.0 / len(inb)
            for x in g.neighbors(b):
                if x not in inner:
                    continue
                i = pos[x]
                for z in inb:
                    j = pos[z]
                    M[i, j] -= scale * wgt / math.sqrt(deg[i] * deg[j])
    return M


def apply_operator(spec: OperatorSpec, f: VertexFunction) -> VertexFunction:
    """Evaluate Lf on the interior.

    Dirichlet data must actually vanish on the boundary; Neumann data is
    extended by the reflection relation; bc 'none' needs f on all vertices.
    """
    g = spec.graph
    values = dict(f.values)
    if spec.bc == "dirichlet":
        for b in spec.boundary:
            if b in values:
                if values[b] != 0.0:
                    raise ValidationError(
                        f"dirichlet data must vanish on the boundary, f({b}) = {values[b]}"
                    )
            else:
                values[b] = 0.0
    elif spec.bc == "neumann":
        inner = set(spec.interior)
        for b in spec.boundary:
            inb = [z for z in g.neighbors(b) if z in inner]
            if not inb:
                values.setdefault(b, 0.0)
                continue
            values[b] = sum(f.value(z) for z in inb) / len(inb)
    extended = VertexFunction(g, values)
    out = {}
    for x in spec.interior:
        out[x] = -laplacian(extended, x, spec.config) + spec.potential_at(x) * f.value(x)
    return VertexFunction(g, out)


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with weighted-orthonormal eigenfunctions.

    functions[j] is defined on the closure: zero on the boundary for
    dirichlet, reflection-extended for neumann, whole graph for none.
    Indices are 1-based in all reports: values[0] is eigenvalue 1.
    """

    spec: OperatorSpec
    values: tuple[float, ...]
    functions: tuple[VertexFunction, ...]

    def __len__(self) -> int:
        return len(self.values)


def eigensystem(spec: OperatorSpec) -> EigenSystem:
    g = spec.graph
    interior = spec.interior
    M = symmetric_matrix(spec)
    vals, vecs = sorted_eigh(M)
    sqrt_deg = np.array([math.sqrt(g.degree(v)) for v in interior])
    inner = set(interior)
    funcs = []
    for k in range(len(interior)):
        phi = vecs[:, k] / sqrt_deg
        values = {v: float(phi[i]) for i, v in enumerate(interior)}
        if spec.bc == "dirichlet":
            for b in spec.boundary:
                values[b] = 0.0
        elif spec.bc == "neumann":
            for b in spec.boundary:
                inb = [z for z in g.neighbors(b) if z in inner]
                values[b] = (
                    sum(values[z] for z in inb) / len(inb) if inb else 0.0
                )
        funcs.append(VertexFunction(g, values))
    return EigenSystem(spec, tuple(float(v) for v in vals), tuple(funcs))


def rayleigh_quotient(f: VertexFunction, spec: OperatorSpec) -> float:
    """(f, Lf)_w / (f, f)_w over the interior."""
    interior = spec.interior
    den = weighted_inner(f, f, interior)
    if den <= 0.0:
        raise ValidationError("rayleigh quotient of the zero function")
    lf = apply_operator(spec, f)
    num = weighted_inner(f, lf, interior)
    return num / den


@dataclass(frozen=True)
class CourantFischerReport:
    j: int
    lambda_j: float
    span_max: float
    span_gap: float
    subspace_worst_excess: float
    samples: int
    subspaces: int
    seed: int


def courant_fischer_check(
    es: EigenSystem,
    j: int,
    seed: int = 1,
    samples: int = 200,
    subspaces: int = 50,
) -> CourantFischerReport:
    """Variational characterization of eigenvalue j (1-based).

    The Rayleigh quotient maximum over span(phi_1..phi_j) must equal
    lambda_j; the maximum over any other j-dimensional subspace can only be
    larger.  Sampled deterministically from the seed.
    """
    if not 1 <= j <= len(es):
        raise ValidationError(f"eigenvalue index {j} out of range 1..{len(es)}")
    spec = es.spec
    g = spec.graph
    interior = spec.interior
    rng = Lcg64(seed)
    lam_j = es.values[j - 1]

    span_max = rayleigh_quotient(es.functions[j - 1], spec)
    for _ in range(samples):
        coeffs = [rng.uniform(-1.0, 1.0) for _ in range(j)]
        norm = math.sqrt(sum(c * c for c in coeffs))
        if norm < 1e-9:
            coeffs[0] = 1.0
            norm = 1.0
        values = {}
        for v in interior:
            values[v] = sum(
                c / norm * es.functions[k].value(v) for k, c in enumerate(coeffs)
            )
        f = VertexFunction(g, values)
        span_max = max(span_max, rayleigh_quotient(f, spec))

    # any j-dimensional subspace: project the symmetric matrix and take the
    # top eigenvalue of the small block, which is the exact subspace maximum
    M = symmetric_matrix(spec)
    n = len(interior)
    worst = math.inf
    for _ in range(subspaces):
        B = np.array(
            [[rng.normal() for _ in range(j)] for _ in range(n)], dtype=float
        )
        Qmat, R = np.linalg.qr(B)
        if min(abs(float(R[k, k])) for k in range(j)) < 1e-8:
            continue
        small = Qmat.T @ M @ Qmat
        small = 0.5 * (small + small.T)
        svals, _ = sorted_eigh(small)
        worst = min(worst, float(svals[-1]) - lam_j)
    return CourantFischerReport(
        j=j,
        lambda_j=lam_j,
        span_max=span_max,
        span_gap=span_max - lam_j,
        subspace_worst_excess=worst,
        samples=samples,
        subspaces=subspaces,
        seed=seed,
    )


def barta_bound(
    region: Domain,
    potential: Union[None, float, VertexFunction],
    u: VertexFunction,
    cfg: CalculusConfig = DEFAULT_CONFIG,
) -> float:
    """min over interior x of (Lu)(x) / u(x) for a positive test function.

    Lower bound for the first eigenvalue of L with Dirichlet condition on
    the window (or on the whole graph for a plain graph region).  u must be
    strictly positive on the interior and defined on closed neighborhoods;
    boundary values enter the stencil as given.
    """
    if isinstance(region, Graph):
        g, interior = region, region.vertices
    else:
        g, interior = region.graph, region.interior
    best = math.inf
    for x in interior:
        ux = u.value(x)
        if ux <= 0.0:
            raise ValidationError(f"test function must be positive on interior, u({x}) = {ux}")
        q = 0.0
        if potential is not None:
            q = (
                potential.value(x)
                if isinstance(potential, VertexFunction)
                else float(potential)
            )
        lu = -laplacian(u, x, cfg) + q * ux
        best = min(best, lu / ux)
    return best


class HeatKernel:
    """S_t(x, y) = sum_j exp(-lambda_j t) phi_j(x) phi_j(y) on the interior."""

    def __init__(self, es: EigenSystem):
        self.es = es
        self.interior = es.spec.interior
        self._pos = {v: i for i, v in enumerate(self.interior)}
        self._phi = np.array(
            [[f.value(v) for v in self.interior] for f in es.functions]
        )  # rows indexed by eigenfunction
        self._vals = np.array(es.values)
        g = es.spec.graph
        self._deg = np.array([g.degree(v) for v in self.interior], dtype=float)

    def matrix(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValidationError("heat kernel needs t >= 0")
        w = np.exp(-self._vals * t)
        return self._phi.T @ (w[:, None] * self._phi)

    def value(self, t: float, x: str, y: str) -> float:
        if x not in self._pos or y not in self._pos:
            raise DomainError(f"heat kernel is defined on the interior; got ({x}, {y})")
        return float(self.matrix(t)[self._pos[x], self._pos[y]])

    def apply(self, t: float, f: VertexFunction, weighted: bool = True) -> VertexFunction:
        """Propagate data f to time t.

        weighted=True uses the degree-weighted reconstruction (the measure
        the eigenfunctions are orthonormal against), which reproduces f at
        t = 0.  weighted=False exposes the plain unweighted sum.
        """
        vec = np.array([f.value(v) for v in self.interior])
        if weighted:
            vec = vec * self._deg
        out = self.matrix(t) @ vec
        values = {v: float(out[i]) for i, v in enumerate(self.interior)}
        for b in self.es.spec.boundary:
            values[b] = 0.0
        return VertexFunction(self.es.spec.graph, values)


def heat_kernel(es: EigenSystem) -> HeatKernel:
    return HeatKernel(es)


def heat_kernel_eval(es: EigenSystem, t: float, x: str, y: str) -> float:
    return HeatKernel(es).value(t, x, y)


class GreenFunction:
    """G(x, y) = sum_j phi_j(x) phi_j(y) / lambda_j; inverse of L."""

    def __init__(self, es: EigenSystem):
        for k, lam in enumerate(es.values):
            if lam <= 0.0:
                raise NonpositiveSpectrumError(k + 1, lam)
        self.es = es
        self.interior = es.spec.interior
        self._pos = {v: i for i, v in enumerate(self.interior)}
        phi = np.array([[f.value(v) for v in self.interior] for f in es.functions])
        vals = np.array(es.values)
        self._G = phi.T @ (phi / vals[:, None])
        g = es.spec.graph
        self._deg = np.array([g.degree(v) for v in self.interior], dtype=float)

    def value(self, x: str, y: str) -> float:
        if x not in self._pos or y not in self._pos:
            raise DomainError(f"green function is defined on the interior; got ({x}, {y})")
        return float(self._G[self._pos[x], self._pos[y]])

    def apply(self, f: VertexFunction, weighted: bool = True) -> VertexFunction:
        vec = np.array([f.value(v) for v in self.interior])
        if weighted:
            vec = vec * self._deg
        out = self._G @ vec
        values = {v: float(out[i]) for i, v in enumerate(self.interior)}
        for b in self.es.spec.boundary:
            values[b] = 0.0
        return VertexFunction(self.es.spec.graph, values)


def green_function(es: EigenSystem) -> GreenFunction:
    return GreenFunction(es)
