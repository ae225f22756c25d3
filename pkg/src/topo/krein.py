"""G-unitary spectral analysis of transfer matrices.

The indefinite form is G = i [[0, -1], [1, 0]] on C^{2L}; transfer matrices
at real energy preserve it.  This module classifies spectra by Krein
signature, builds the elliptic normal form of a perfectly conducting wire,
and provides the Moebius / stereographic machinery used by the Green matrix
and reflection pipelines.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm

from . import numerics
from .errors import (AmbiguousSignature, MoebiusUndefined, NotLagrangian,
                     NotPerfectlyConducting, StereoUndefined)

CIRCLE_TOL = 1e-8
SIG_TOL = 1e-8


def g_form(L):
    """The form G = i [[0, -1], [1, 0]] of size 2L."""
    Z = np.zeros((L, L))
    I = np.eye(L)
    return 1j * np.block([[Z, -I], [I, Z]])


def j_form(L):
    return np.block([[np.eye(L), np.zeros((L, L))], [np.zeros((L, L)), -np.eye(L)]])


def cayley_matrix(L):
    """C = 2^{-1/2} [[1, -i], [1, i]]; satisfies J = C G C*."""
    I = np.eye(L)
    return np.block([[I, -1j * I], [I, 1j * I]]) / np.sqrt(2)


@dataclass(frozen=True)
class TransferMatrix:
    matrix: np.ndarray   # (2L, 2L)
    z: complex
    A: np.ndarray
    B: np.ndarray

    @property
    def L(self):
        return self.A.shape[0]


@dataclass
class GUnitarySpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray     # columns matched to eigenvalues
    classes: list                # 'inside' | 'on_circle' | 'outside' per eigenvalue
    signatures: dict             # index -> (nu_plus, nu_minus) for on-circle clusters
    clusters: list               # index groups (on-circle clusters share signature)

    @property
    def n_inside(self):
        return sum(c == "inside" for c in self.classes)

    @property
    def n_outside(self):
        return sum(c == "outside" for c in self.classes)

    def all_elliptic_definite(self):
        if self.n_inside or self.n_outside:
            return False
        return all(0 in self.signatures[i] for i in range(len(self.eigenvalues)))


@dataclass
class EllipticNormalForm:
    N: np.ndarray            # G-unitary basis change (2L, 2L)
    Lambda_plus: np.ndarray  # diagonal entries, length L
    Lambda_minus: np.ndarray
    Psi_plus: np.ndarray     # (2L, L) frames, Krein normalized
    Psi_minus: np.ndarray

    @property
    def L(self):
        return self.Psi_plus.shape[1]

    @property
    def Psi_vee(self):
        return (self.Psi_plus + self.Psi_minus) / np.sqrt(2)

    @property
    def Psi_wedge(self):
        return -1j * (self.Psi_plus - self.Psi_minus) / np.sqrt(2)


def transfer_matrix(A, B, z):
    """T = [[ (z-B) A^-1, -A* ], [ A^-1, 0 ]]."""
    A = numerics.as_matrix(A)
    B = numerics.as_matrix(B)
    L = A.shape[0]
    zB_Ainv = numerics.rsolve(z * np.eye(L) - B, A)
    Ainv = numerics.solve(A, np.eye(L))
    T = np.block([[zB_Ainv, -A.conj().T], [Ainv, np.zeros((L, L))]])
    return TransferMatrix(T, z, A, B)


def period_transfer(model, z, k):
    """Ordered product T_p ... T_1 over one perpendicular period of a model."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    L = model.L
    M = np.eye(2 * L, dtype=complex)
    for n in range(1, model.period_perp + 1):
        T = transfer_matrix(model.hopping(n, k), model.onsite_block(n, k), z)
        M = T.matrix @ M
    return M


def propagate(T_list, Phi0):
    """Apply the ordered product of transfer matrices to an initial frame."""
    Phi = np.asarray(Phi0, dtype=complex)
    for T in T_list:
        mat = T.matrix if isinstance(T, TransferMatrix) else T
        Phi = mat @ Phi
    return Phi


def classify_spectrum(T, circle_tol=CIRCLE_TOL, sig_tol=SIG_TOL):
    """Split the spectrum of a G-unitary by the unit circle and attach signatures.

    On-circle eigenvalue clusters get the inertia of v* G v on their
    (generalized) eigenspace; defective clusters are flagged indefinite.
    """
    mat = T.matrix if isinstance(T, TransferMatrix) else np.asarray(T, dtype=complex)
    L = mat.shape[0] // 2
    G = g_form(L)
    dec = numerics.eigen(mat)
    lam, V = dec.eigenvalues, dec.right_eigenvectors
    classes = []
    for lv in lam:
        r = abs(lv)
        if abs(r - 1) < circle_tol:
            classes.append("on_circle")
        elif r < 1:
            classes.append("inside")
        else:
            classes.append("outside")

    signatures = {}
    clusters = []
    on_idx = [i for i, c in enumerate(classes) if c == "on_circle"]
    used = set()
    for i in on_idx:
        if i in used:
            continue
        group = [j for j in on_idx if abs(lam[j] - lam[i]) < 100 * circle_tol * max(1, abs(lam[i]))]
        used.update(group)
        clusters.append(group)
        W = V[:, group]
        defective = bool(dec.jordan_defect_flags[group].any())
        Q = W.conj().T @ G @ W
        Q = (Q + Q.conj().T) / 2
        qev = np.linalg.eigvalsh(Q)
        n_plus = int(np.sum(qev > sig_tol))
        n_minus = int(np.sum(qev < -sig_tol))
        n_null = len(group) - n_plus - n_minus
        if defective:
            # non-diagonal Jordan block on the circle: indefinite by construction
            sig = (max(n_plus, 1), max(n_minus, 1)) if n_null else (n_plus, n_minus)
            if sig[0] + sig[1] > len(group):
                sig = (n_plus + n_null, n_minus)
        elif n_null:
            small = qev[np.argmin(np.abs(qev))]
            raise AmbiguousSignature(lam[i], small)
        else:
            sig = (n_plus, n_minus)
        for j in group:
            signatures[j] = sig
    return GUnitarySpectrum(lam, V, classes, signatures, clusters)


def _krein_orthonormalize(W, Q, sign):
    """Return W' with W'* G W' = sign * 1, given Q = W* G W definite of that sign."""
    Qs = (Q + Q.conj().T) / 2
    root = sqrtm(sign * Qs)
    return np.linalg.solve(root.T, W.T).T


def elliptic_normal_form(T, circle_tol=CIRCLE_TOL):
    """Normal form of a fully elliptic, Krein-definite G-unitary.

    Returns frames Psi_+/- with (Psi_+, Psi_-)* G (Psi_+, Psi_-) = J and the
    G-unitary N = (Psi_+, Psi_-) C that rotates T into 2x2 rotation blocks.
    """
    mat = T.matrix if isinstance(T, TransferMatrix) else np.asarray(T, dtype=complex)
    L = mat.shape[0] // 2
    G = g_form(L)
    spec = classify_spectrum(T, circle_tol=circle_tol)
    bad = [spec.eigenvalues[i] for i, c in enumerate(spec.classes) if c != "on_circle"]
    bad += [spec.eigenvalues[g[0]] for g in spec.clusters
            if 0 not in spec.signatures[g[0]]]
    if bad:
        raise NotPerfectlyConducting(
            f"eigenvalues off circle or indefinite: {bad}", offending=bad)

    plus_cols, plus_vals, minus_cols, minus_vals = [], [], [], []
    for group in spec.clusters:
        W = spec.eigenvectors[:, group]
        Q = W.conj().T @ G @ W
        nu_plus, nu_minus = spec.signatures[group[0]]
        sign = 1 if nu_plus else -1
        Wn = _krein_orthonormalize(W, Q, sign)
        # canonical channel gauge: rotate within the cluster so the lower
        # (site-amplitude) block is positive semidefinite; this pins the
        # eigenvector phases left free by the Krein normalization
        u, _, vh = np.linalg.svd(Wn[L:, :])
        Wn = Wn @ (u @ vh).conj().T
        if sign == 1:
            plus_cols.append(Wn)
            plus_vals.extend([spec.eigenvalues[j] for j in group])
        else:
            minus_cols.append(Wn)
            minus_vals.extend([spec.eigenvalues[j] for j in group])
    Psi_plus = np.hstack(plus_cols)
    Psi_minus = np.hstack(minus_cols)
    Pair = np.hstack([Psi_plus, Psi_minus])
    N = Pair @ cayley_matrix(L)
    return EllipticNormalForm(N, np.array(plus_vals), np.array(minus_vals),
                              Psi_plus, Psi_minus)


def mobius(M, Z):
    """Moebius action (aZ + b)(cZ + d)^-1 of a 2L x 2L block matrix on an L x L point."""
    M = np.asarray(M, dtype=complex)
    Z = np.asarray(Z, dtype=complex)
    L = Z.shape[0]
    a, b = M[:L, :L], M[:L, L:]
    c, d = M[L:, :L], M[L:, L:]
    den = c @ Z + d
    try:
        return numerics.rsolve(a @ Z + b, den)
    except numerics.SingularMatrix as exc:
        raise MoebiusUndefined(str(exc)) from exc


def stereographic(Phi):
    """Pi(Phi) = (a - i b)(a + i b)^-1 for a frame Phi = (a; b)."""
    Phi = np.asarray(Phi, dtype=complex)
    L = Phi.shape[1]
    a, b = Phi[:L, :], Phi[L:, :]
    try:
        return numerics.rsolve(a - 1j * b, a + 1j * b)
    except numerics.SingularMatrix as exc:
        raise StereoUndefined(str(exc)) from exc


def frame_angles(Phi, nf, lagrangian_tol=1e-8):
    """Unitary position of a G-Lagrangian frame in the coordinates (Psi_vee, Psi_wedge).

    Solves Phi = Psi_vee N + Psi_wedge M through the G-unitary inverse
    (Psi_+, Psi_-)^-1 = J (Psi_+, Psi_-)* G and returns R = (N - iM)(N + iM)^-1.
    """
    Phi = np.asarray(Phi, dtype=complex)
    L = nf.L
    G = g_form(L)
    lag = np.linalg.norm(Phi.conj().T @ G @ Phi)
    if lag > lagrangian_tol * max(1.0, np.linalg.norm(Phi) ** 2):
        raise NotLagrangian(f"Phi* G Phi residual {lag:.3e}")
    Pair = np.hstack([nf.Psi_plus, nf.Psi_minus])
    J = j_form(L)
    C = cayley_matrix(L)
    # N_form^-1 = C* (Psi_+, Psi_-)^-1 with (Psi_+, Psi_-)^-1 = J (Psi_+, Psi_-)* G
    NM = C.conj().T @ (J @ Pair.conj().T @ G) @ Phi
    Nmat, Mmat = NM[:L, :], NM[L:, :]
    return numerics.rsolve(Nmat - 1j * Mmat, Nmat + 1j * Mmat)
