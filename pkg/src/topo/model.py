"""Tight-binding models in block Jacobi form and their Bloch-Floquet fibers.

A model is specified layer by layer: invertible hopping blocks A_n and
Hermitian onsite blocks B_n, each a finite trigonometric polynomial in the
d-1 boundary momenta.  Layer indices are 1-based and cycle modulo the
perpendicular period p.  The block Jacobi convention is

    (H phi)_n = A_{n+1} phi_{n+1} + B_n phi_n + A_n^* phi_{n-1}.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModel
from .numerics import as_matrix

_A_COND_MAX = 1e10
_HERM_TOL = 1e-12


@dataclass(frozen=True)
class Harmonic:
    """One Fourier term M * exp(i e.k) of a matrix-valued function on the torus."""
    exponent: tuple      # integer vector, length d-1
    matrix: np.ndarray   # (L, L) complex


def eval_harmonics(harmonics, k):
    """Sum of M * exp(i e.k) over the harmonic list."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    L = harmonics[0].matrix.shape[0]
    out = np.zeros((L, L), dtype=complex)
    for h in harmonics:
        out += h.matrix * np.exp(1j * np.dot(h.exponent, k))
    return out


def _const(M):
    M = as_matrix(M)
    return [Harmonic((0,) * 1, M)]


@dataclass(frozen=True)
class BlockJacobiModel:
    """Periodic insulator data {A_n, B_n} plus an optional periodic perturbation."""
    L: int
    d: int
    period_perp: int
    hoppings: dict       # layer (1..p) -> list[Harmonic]
    onsite: dict         # layer (1..p) -> list[Harmonic]
    lam: float = 0.0
    pert_hoppings: dict = field(default_factory=dict)
    pert_onsite: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.d % 2 != 0:
            raise InvalidModel(f"spatial dimension must be even, got {self.d}")
        if self.period_perp < 1:
            raise InvalidModel("period_perp must be >= 1")
        if self.lam < 0:
            raise InvalidModel("perturbation strength must be >= 0")

    @property
    def d_boundary(self):
        return self.d - 1

    def hopping(self, n, k):
        """A_n(k) including the perturbation term."""
        layer = (n - 1) % self.period_perp + 1
        A = eval_harmonics(self.hoppings[layer], k)
        if self.lam and layer in self.pert_hoppings:
            A = A + self.lam * eval_harmonics(self.pert_hoppings[layer], k)
        return A

    def onsite_block(self, n, k):
        """B_n(k) including the perturbation term."""
        layer = (n - 1) % self.period_perp + 1
        B = eval_harmonics(self.onsite[layer], k)
        if self.lam and layer in self.pert_onsite:
            B = B + self.lam * eval_harmonics(self.pert_onsite[layer], k)
        return B

    def validate(self, n_samples=7, rng=None):
        """Check Hermiticity of B_n(k) and invertibility of A_n(k) on sample momenta."""
        rng = rng or np.random.default_rng(0)
        ks = [np.zeros(self.d_boundary)] + [
            rng.uniform(0, 2 * np.pi, self.d_boundary) for _ in range(n_samples)
        ]
        for n in range(1, self.period_perp + 1):
            for k in ks:
                B = self.onsite_block(n, k)
                herm = np.linalg.norm(B - B.conj().T)
                if herm > _HERM_TOL * max(1.0, np.linalg.norm(B)):
                    raise InvalidModel(
                        f"onsite not Hermitian: layer {n}, residual {herm:.3e}")
                A = self.hopping(n, k)
                if np.linalg.cond(A) > _A_COND_MAX:
                    raise InvalidModel(
                        f"hopping not invertible: layer {n}, cond {np.linalg.cond(A):.3e}")
        return self


@dataclass(frozen=True)
class WireModel:
    """Translation invariant wire H = A S + B + A* S*."""
    A: np.ndarray
    B: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = as_matrix(self.A)
        B = as_matrix(self.B)
        if A.shape != B.shape:
            raise InvalidModel("wire A and B must have equal shape")
        if np.linalg.norm(B - B.conj().T) > _HERM_TOL * max(1.0, np.linalg.norm(B)):
            raise InvalidModel("wire onsite not Hermitian")
        if np.linalg.cond(A) > _A_COND_MAX:
            raise InvalidModel("wire hopping not invertible")

    @property
    def L(self):
        return self.A.shape[0]

    def fiber(self, p):
        """Bloch matrix A e^{-ip} + B + A* e^{ip}."""
        return self.A * np.exp(-1j * p) + self.B + self.A.conj().T * np.exp(1j * p)


@dataclass(frozen=True)
class ScatteringSystem:
    """Half-sided wire coupled to a half-space insulator; coupling reuses the wire A."""
    wire: WireModel
    insulator: BlockJacobiModel

    def __post_init__(self):
        if self.wire.L != self.insulator.L:
            raise InvalidModel(
                f"fiber dimension mismatch: wire {self.wire.L}, insulator {self.insulator.L}")


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid on [0, 2pi)^dim, optionally offset by a fraction of the spacing."""
    shape: tuple
    offset: float = 0.0

    def __post_init__(self):
        if any(n < 2 for n in self.shape):
            raise ValueError("grid needs at least 2 points per axis")

    @property
    def dim(self):
        return len(self.shape)

    def axis(self, i):
        n = self.shape[i]
        return 2 * np.pi * (np.arange(n) + self.offset) / n

    def nodes(self):
        """Iterate (index tuple, momentum vector) in row-major order."""
        axes = [self.axis(i) for i in range(self.dim)]
        for idx in np.ndindex(*self.shape):
            yield idx, np.array([axes[i][idx[i]] for i in range(self.dim)])

    def mesh(self):
        """Stacked momentum array of shape (*shape, dim)."""
        axes = [self.axis(i) for i in range(self.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack(grids, axis=-1)


def bloch_fiber(model, k, layers, boundary="half_space", k_perp=None):
    """Block tridiagonal fiber Hamiltonian at boundary momentum k.

    half_space: depth-`layers` Dirichlet truncation of the half-space fiber.
    periodic:   the bulk fiber over one perpendicular period; `layers` must
                equal the period and `k_perp` supplies the extra momentum.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    L = model.L
    if boundary == "half_space":
        M = layers
        if M < 1:
            raise ValueError("layers must be >= 1")
        H = np.zeros((M * L, M * L), dtype=complex)
        for n in range(1, M + 1):
            s = (n - 1) * L
            H[s:s + L, s:s + L] = model.onsite_block(n, k)
            if n < M:
                A = model.hopping(n + 1, k)
                H[s:s + L, s + L:s + 2 * L] = A
                H[s + L:s + 2 * L, s:s + L] = A.conj().T
    elif boundary == "periodic":
        p = model.period_perp
        if layers != p:
            raise ValueError("periodic fiber requires layers == period_perp")
        if k_perp is None:
            raise ValueError("periodic fiber requires k_perp")
        H = np.zeros((p * L, p * L), dtype=complex)
        for n in range(1, p + 1):
            s = (n - 1) * L
            H[s:s + L, s:s + L] = model.onsite_block(n, k)
        if p == 1:
            A = model.hopping(1, k)
            H += A * np.exp(-1j * k_perp) + A.conj().T * np.exp(1j * k_perp)
        else:
            for n in range(1, p):
                A = model.hopping(n + 1, k)
                s = (n - 1) * L
                H[s:s + L, s + L:s + 2 * L] += A
                H[s + L:s + 2 * L, s:s + L] += A.conj().T
            A1 = model.hopping(1, k)
            H[(p - 1) * L:, :L] += A1 * np.exp(-1j * k_perp)
            H[:L, (p - 1) * L:] += A1.conj().T * np.exp(1j * k_perp)
    else:
        raise ValueError(f"unknown boundary condition {boundary!r}")

    herm = np.linalg.norm(H - H.conj().T)
    if herm > 1e-10 * max(1.0, np.linalg.norm(H)):
        raise InvalidModel(f"fiber not Hermitian, residual {herm:.3e}")
    return H


def bulk_fiber(model, k_full):
    """Bulk Bloch Hamiltonian at a point of the full d-torus (k_perp last)."""
    k_full = np.asarray(k_full, dtype=float)
    return bloch_fiber(model, k_full[:-1], model.period_perp,
                       boundary="periodic", k_perp=k_full[-1])


def scattering_fiber(sys, k, wire_layers, ins_layers):
    """Finite matrix of the coupled wire+insulator fiber at boundary momentum k.

    Sites run from the outermost wire layer to the deepest insulator layer;
    the interface block is the wire hopping A.
    """
    if wire_layers < 1 or ins_layers < 1:
        raise ValueError("layer counts must be >= 1")
    L = sys.wire.L
    n_tot = wire_layers + ins_layers
    H = np.zeros((n_tot * L, n_tot * L), dtype=complex)
    A_w, B_w = sys.wire.A, sys.wire.B
    for j in range(wire_layers):
        s = j * L
        H[s:s + L, s:s + L] = B_w
        if j < wire_layers - 1:
            H[s:s + L, s + L:s + 2 * L] = A_w
            H[s + L:s + 2 * L, s:s + L] = A_w.conj().T
    # interface: site 0 (last wire layer) to insulator layer 1
    s = (wire_layers - 1) * L
    H[s:s + L, s + L:s + 2 * L] = A_w
    H[s + L:s + 2 * L, s:s + L] = A_w.conj().T
    H_ins = bloch_fiber(sys.insulator, k, ins_layers, boundary="half_space")
    H[wire_layers * L:, wire_layers * L:] = H_ins
    return H


# ---------------------------------------------------------------------------
# Built-in corpus
# ---------------------------------------------------------------------------

_S0 = np.eye(2)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]])
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _h(exponent, matrix):
    return Harmonic(tuple(exponent), np.asarray(matrix, dtype=complex))


def chain(L=1, b=0.0):
    """Decoupled 1D chains: A = 1, B = b*1, no boundary-momentum dependence."""
    I = np.eye(L)
    return BlockJacobiModel(
        L=L, d=2, period_perp=1,
        hoppings={1: [_h((0,), I)]},
        onsite={1: [_h((0,), b * I)]},
        name=f"chain(L={L})",
    )


def qwz(u=-1.0, eta=0.05):
    """Two-band Chern insulator on Z^2.

    Onsite B(k) = (u + cos k) s3 + sin k s2; perpendicular hopping
    A = (s3 - i s1)/2 + eta*1.  The eta term makes A invertible (the bare
    hopping is rank one); it only shifts bands by 2*eta*cos(k_perp) and
    leaves all topology unchanged for eta well below the gap.
    """
    A = (_SZ - 1j * _SX) / 2 + eta * _S0
    return BlockJacobiModel(
        L=2, d=2, period_perp=1,
        hoppings={1: [_h((0,), A)]},
        onsite={1: [
            _h((0,), u * _SZ),
            _h((1,), (_SZ - 1j * _SY) / 2),
            _h((-1,), (_SZ + 1j * _SY) / 2),
        ]},
        name=f"qwz(u={u})",
    )


def trivial(m=2.0, delta=0.05):
    """Atomic insulator: nearly flat bands at +-m, weak hopping delta*1."""
    return BlockJacobiModel(
        L=2, d=2, period_perp=1,
        hoppings={1: [_h((0,), delta * _S0)]},
        onsite={1: [_h((0,), m * _SZ)]},
        name="trivial",
    )


def _gamma_matrices():
    """Five mutually anticommuting Hermitian 4x4 involutions (g1..g4, g0)."""
    g1 = np.kron(_SX, _SX)
    g2 = np.kron(_SX, _SY)
    g3 = np.kron(_SX, _SZ)
    g4 = np.kron(_SY, _S0)
    g0 = np.kron(_SZ, _S0)
    return g1, g2, g3, g4, g0


def dirac4d(m=-3.0, eta=0.05):
    """Four-band Dirac-type insulator on Z^4 with second Chern number +-1 for 2<|m|<4.

    H(k) = sum_mu sin(k_mu) g_mu + (m + sum_mu cos(k_mu)) g0.  Direction 4 is
    perpendicular; its hopping (g0 + i g4)/2 is regularized by eta*1 as in qwz.
    """
    g1, g2, g3, g4, g0 = _gamma_matrices()
    I4 = np.eye(4)
    A = (g0 + 1j * g4) / 2 + eta * I4
    onsite = [_h((0, 0, 0), m * g0)]
    for j, g in enumerate((g1, g2, g3)):
        e = [0, 0, 0]
        e[j] = 1
        onsite.append(_h(tuple(e), (g0 - 1j * g) / 2))
        onsite.append(_h(tuple(-x for x in e), (g0 + 1j * g) / 2))
    return BlockJacobiModel(
        L=4, d=4, period_perp=1,
        hoppings={1: [_h((0, 0, 0), A)]},
        onsite={1: onsite},
        name=f"dirac4d(m={m})",
    )


def wire_chain(L=1, b=0.0):
    """Perfectly conducting wire of L decoupled chains: A = 1, B = b*1."""
    return WireModel(np.eye(L), b * np.eye(L), name=f"wire_chain(L={L})")


BUILTIN_MODELS = {
    "chain": chain,
    "qwz": qwz,
    "trivial": trivial,
    "dirac4d": dirac4d,
}

BUILTIN_WIRES = {
    "wire_chain": wire_chain,
}
