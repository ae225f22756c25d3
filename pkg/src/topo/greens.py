"""Half-space boundary Green matrices, their Cayley transforms and strip variants.

Two independent routes to the boundary Green matrix:

* truncated resolvent of a depth-M Dirichlet cut of the half-space fiber;
* stereographic extraction from the contracting invariant subspace of the
  one-period transfer matrix.

Both feed the Cayley transform V = (2 eps G - i)(2 eps G + i)^-1 whose
determinant winding carries the topological content.
"""

from dataclasses import dataclass

import numpy as np

from . import krein, numerics
from .errors import (CayleyUndefined, InvalidGap, NoSpectralSplit,
                     NotInvertible, ResolventSingular)
from .model import MomentumGrid, bloch_fiber, bulk_fiber


@dataclass
class BoundaryGreen:
    matrix: np.ndarray
    z: complex
    k: np.ndarray
    N: int
    route: str   # 'truncated_resolvent' | 'transfer_subspace'


@dataclass
class BoundaryUnitaryField:
    """Map from a discretized torus to invertible (often unitary) matrices."""
    grid: MomentumGrid
    values: np.ndarray   # (*grid.shape, m, m)
    z: complex
    epsilon: float
    label: str           # 'V' | 'R' | 'U_exp'

    def check_invertible(self, sv_min=1e-12):
        svs = np.linalg.svd(self.values, compute_uv=False)
        worst = float(svs.min())
        if worst < sv_min:
            raise NotInvertible(worst)
        return worst


def green_truncated(model, z, k, N=1, depth=None):
    """Top-left N*L block of (H_M(k) - z)^-1 for the depth-M truncation."""
    if depth is None:
        depth = max(50, 4 * N)
    if depth < N:
        raise ValueError("truncation depth must be >= strip width N")
    H = bloch_fiber(model, k, depth, boundary="half_space")
    L = model.L
    zmat = H - z * np.eye(depth * L)
    if abs(z.imag) < 1e-14:
        ev = np.linalg.eigvalsh(H)
        dist = np.min(np.abs(ev - z.real))
        if dist < 1e-10:
            raise ResolventSingular(
                f"z within {dist:.3e} of an eigenvalue of the truncated fiber")
    rhs = np.zeros((depth * L, N * L), dtype=complex)
    rhs[:N * L, :] = np.eye(N * L)
    X = numerics.solve(zmat, rhs)
    return BoundaryGreen(X[:N * L, :], z, np.atleast_1d(k), N, "truncated_resolvent")


def green_transfer(model, z, k):
    """Boundary Green matrix from the contracting subspace of the period transfer matrix.

    The decaying solution has initial condition (G; -1) in the convention
    where the first hopping is replaced by the identity, which turns a
    contracting frame (a; b) of the bulk period map into
    G = -A_1^{-1} a b^{-1} (A_1^*)^{-1}.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    L = model.L
    M = krein.period_transfer(model, z, k)
    dec = numerics.eigen(M)
    lam = dec.eigenvalues
    order = np.argsort(np.abs(lam))
    inside = np.abs(lam[order[:L]])
    outside = np.abs(lam[order[L:]])
    if inside.max() >= 1 - 1e-10 or outside.min() <= 1 + 1e-10:
        raise NoSpectralSplit(
            f"no clean split: |lam| around circle = {np.sort(np.abs(lam))}")
    # invariant subspace of the L contracting eigenvalues via Schur-stable basis
    W = dec.right_eigenvectors[:, order[:L]]
    Q, _ = np.linalg.qr(W)
    a, b = Q[:L, :], Q[L:, :]
    A1 = model.hopping(1, k)
    try:
        G = -numerics.rsolve(numerics.solve(A1, numerics.rsolve(a, b)), A1.conj().T)
    except numerics.SingularMatrix as exc:
        raise NoSpectralSplit(f"contracting frame degenerate: {exc}") from exc
    return BoundaryGreen(G, z, k, 1, "transfer_subspace")


def boundary_green(model, z, k, N=1, route="auto", depth=None):
    """Boundary Green matrix by either route; 'auto' prefers the transfer route at N=1."""
    if route == "auto":
        route = "transfer" if N == 1 else "truncated"
    if route == "transfer":
        if N != 1:
            raise ValueError("transfer route only provides the N=1 boundary block")
        return green_transfer(model, z, k)
    if route == "truncated":
        return green_truncated(model, z, k, N=N, depth=depth)
    raise ValueError(f"unknown route {route!r}")


def cayley(G):
    """V = (G - i)(G + i)^-1; maps Im G > 0 into the operator unit disc."""
    G = numerics.as_matrix(G)
    I = np.eye(G.shape[0])
    try:
        return numerics.rsolve(G - 1j * I, G + 1j * I)
    except numerics.SingularMatrix as exc:
        raise CayleyUndefined(str(exc)) from exc


def inverse_cayley(V):
    """Inverse Moebius map V -> i (1 + V)(1 - V)^-1, left inverse of cayley."""
    V = numerics.as_matrix(V)
    I = np.eye(V.shape[0])
    return 1j * numerics.rsolve(I + V, I - V)


def boundary_unitary(model, z, k, N=1, eps=0.5, route="auto", depth=None):
    """Strip Cayley transform V_{N,eps} = (2 eps G_N - i)(2 eps G_N + i)^-1."""
    if route == "auto":
        route = "transfer" if N == 1 else "truncated"
    if route == "transfer":
        if N != 1:
            raise ValueError("transfer route only provides the N=1 boundary block")
        G = green_transfer(model, z, k).matrix
    elif route == "truncated":
        G = green_truncated(model, z, k, N=N, depth=depth).matrix
    else:
        raise ValueError(f"unknown route {route!r}")
    V = cayley(2 * eps * G)
    sv = np.linalg.svd(V, compute_uv=False)
    if sv.min() < 1e-12:
        raise NotInvertible(float(sv.min()))
    return V


def smoothstep(t):
    """Quintic smoothstep, C^2 at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10 - 15 * t + 6 * t ** 2)


def exp_map_unitary(model, k, M, gap, mu=None, depth=None):
    """Strip restriction of U = exp(2 pi i f(H(k))) with f a smoothstep across the gap.

    The functional calculus is evaluated on a truncation deeper than the
    returned M-layer strip: a depth-M cut has a second boundary whose edge
    modes would cancel the winding, so the half-space operator is
    approximated at `depth` layers (default 2M + 20) and only the top-left
    M*L block is kept, which is the strict-boundary representative.
    """
    a, b = gap
    if not a < b:
        raise InvalidGap(f"empty gap interval ({a}, {b})")
    if mu is not None and not a < mu < b:
        raise InvalidGap(f"mu = {mu} outside declared gap ({a}, {b})")
    if depth is None:
        depth = 2 * M + 20
    if depth < M:
        raise ValueError("depth must be >= strip width M")
    H = bloch_fiber(model, k, depth, boundary="half_space")
    ev, U = np.linalg.eigh(H)
    f = smoothstep((ev - a) / (b - a))
    full = (U * np.exp(2j * np.pi * f)) @ U.conj().T
    L = model.L
    return full[:M * L, :M * L]


def bulk_gap(model, mu=0.0, points_per_axis=31):
    """Numerically bracket the bulk gap around mu; raises InvalidGap if closed."""
    grid = MomentumGrid((points_per_axis,) * model.d)
    lo, hi = -np.inf, np.inf
    for _, kf in grid.nodes():
        ev = np.linalg.eigvalsh(bulk_fiber(model, kf))
        below = ev[ev <= mu]
        above = ev[ev > mu]
        if below.size == 0 or above.size == 0:
            raise InvalidGap(f"no bands on one side of mu = {mu}")
        lo = max(lo, below.max())
        hi = min(hi, above.min())
    if hi - lo < 1e-8:
        raise InvalidGap(f"gap closed around mu = {mu}: ({lo}, {hi})")
    return lo, hi


def map_grid(func, grid, width, jobs=1):
    """Evaluate k -> matrix(width, width) on every grid node, optionally in parallel."""
    values = np.zeros((*grid.shape, width, width), dtype=complex)

    def worker(item):
        idx, k = item
        return idx, func(k)

    items = list(grid.nodes())
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(worker, items))
    else:
        results = [worker(it) for it in items]
    for idx, M in results:
        values[idx] = M
    return values


def boundary_unitary_field(model, z, grid, N=1, eps=0.5, route="auto", depth=None,
                           jobs=1):
    """Evaluate the boundary unitary on every node of a momentum grid."""
    values = map_grid(
        lambda k: boundary_unitary(model, z, k, N=N, eps=eps, route=route,
                                   depth=depth),
        grid, N * model.L, jobs=jobs)
    return BoundaryUnitaryField(grid, values, z, eps, "V")


def exp_map_field(model, grid, M, gap, mu=None, jobs=1):
    """Evaluate the exponential-map unitary on every node of a momentum grid."""
    values = map_grid(lambda k: exp_map_unitary(model, k, M, gap, mu=mu),
                      grid, M * model.L, jobs=jobs)
    return BoundaryUnitaryField(grid, values, 0.0, 0.0, "U_exp")
