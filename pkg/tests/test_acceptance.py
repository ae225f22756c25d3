"""Acceptance suite: one test (one pass/fail line under pytest -v) per criterion.

Run with `pytest -v tests/test_acceptance.py`; each test prints an explicit
`criterion N: PASS` line on success as well.
"""

import time

import numpy as np
import pytest
from scipy.linalg import expm

from topo import greens, invariants, krein, scattering
from topo.model import (MomentumGrid, ScatteringSystem, chain, dirac4d, qwz,
                        trivial, wire_chain)

D2_CORPUS = [
    (qwz(-1.0), 1),
    (qwz(1.0), -1),
    (trivial(), 0),
]
DELTAS = [1e-3, 1e-2, 1e-1]


def test_criterion_1_theorem1_d2():
    """Theorem 1, d=2: Ch_2(P) = -winding(V) exactly, three models x three
    deltas, boundary grid 64, depth 60, < 10 s per case."""
    for model, chern_expected in D2_CORPUS:
        for delta in DELTAS:
            t0 = time.monotonic()
            rep = invariants.verify_theorem1(
                model, 0.0, delta, MomentumGrid((32, 32)),
                MomentumGrid((64,)), depth=60)
            elapsed = time.monotonic() - t0
            assert rep["pass"], (model.name, delta)
            assert rep["Ch_d"].rounded == chern_expected
            assert rep["Ch_dm1_V"].rounded == -chern_expected
            assert elapsed < 10.0, (model.name, delta, elapsed)
    print("criterion 1: PASS")


def test_criterion_2_theorem2_d2():
    """Theorem 2, d=2: winding(R) = winding(V) = -Ch_2(P) on the same corpus
    with a conducting chain wire, < 10 s per case."""
    for model, chern_expected in D2_CORPUS:
        sys = ScatteringSystem(wire_chain(model.L), model)
        for delta in DELTAS:
            t0 = time.monotonic()
            rep = scattering.verify_theorem2(sys, 0.0, delta,
                                             MomentumGrid((64,)))
            elapsed = time.monotonic() - t0
            assert rep["pass"], (model.name, delta)
            assert rep["Ch_dm1_R"].rounded == rep["Ch_dm1_V"].rounded \
                == -chern_expected
            assert elapsed < 10.0, (model.name, delta, elapsed)
    print("criterion 2: PASS")


def test_criterion_3_theorem1_d4():
    """Theorem 1, d=4: chern_4d on 12^4 and winding_3d on 16^3 within 0.05 of
    integers with Ch_4 = -Ch_3, < 10 min."""
    t0 = time.monotonic()
    rep = invariants.verify_theorem1(dirac4d(), 0.0, 1e-2,
                                     MomentumGrid((12,) * 4),
                                     MomentumGrid((16,) * 3))
    elapsed = time.monotonic() - t0
    assert rep["Ch_d"].distance_to_integer < 0.05
    assert rep["Ch_dm1_V"].distance_to_integer < 0.05
    assert rep["Ch_d"].rounded == -rep["Ch_dm1_V"].rounded != 0
    assert rep["pass"]
    assert elapsed < 600.0, elapsed
    print("criterion 3: PASS")


def test_criterion_4_bbc_cross_check():
    """Exp-map unitary at strip M=30: winding det U = Ch_2(P) = -winding det V
    on QWZ, exact integers."""
    m = qwz(-1.0)
    grid = MomentumGrid((64,))
    ch = invariants.chern_2d(invariants.fermi_projection_field(
        m, 0.0, MomentumGrid((32, 32))))
    wU = invariants.winding_1d(greens.exp_map_field(m, grid, 30,
                                                    greens.bulk_gap(m)))
    wV = invariants.winding_1d(greens.boundary_unitary_field(m, 1e-2j, grid))
    assert wU.rounded == ch.rounded == -wV.rounded == 1
    assert wU.converged and ch.converged and wV.converged
    print("criterion 4: PASS")


def test_criterion_5_cayley_properties():
    """1000 random positive-imaginary-part matrices (L <= 8): Cayley image is
    a contraction to 1e-12 and the inverse map round-trips to 1e-10."""
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        L = int(rng.integers(1, 9))
        X = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        Y = rng.normal(size=(L, L))
        G = X + X.conj().T + 1j * (Y @ Y.T + 0.05 * np.eye(L))
        V = greens.cayley(G)
        assert np.linalg.norm(V, 2) <= 1 + 1e-12
        assert np.linalg.norm(greens.inverse_cayley(V) - G) \
            <= 1e-10 * max(1.0, np.linalg.norm(G))
    print("criterion 5: PASS")


def test_criterion_6_transfer_matrix_suite():
    """Transfer matrices: G-unitarity < 1e-10 at 100 random real energies,
    eigenvalue pairing to 1e-8, eigenphase derivative sign law (finite
    differences, step 1e-5), frame_angles unitarity < 1e-10 on 100 random
    G-Lagrangian frames."""
    rng = np.random.default_rng(4321)
    for _ in range(100):
        L = int(rng.integers(1, 5))
        A = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L)) \
            + 2 * np.eye(L)
        B0 = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        T = krein.transfer_matrix(A, B0 + B0.conj().T,
                                  float(rng.uniform(-3, 3))).matrix
        G = krein.g_form(L)
        assert np.linalg.norm(T.conj().T @ G @ T - G) < 1e-10 \
            * max(1.0, np.linalg.norm(T) ** 2)
        lam = np.linalg.eigvals(T)
        assert np.abs(lam[:, None] - 1.0 / lam.conj()[None, :]) \
            .min(axis=1).max() <= 1e-8

    h = 1e-5
    for wire in (wire_chain(1), wire_chain(2, b=0.2)):
        for E in rng.uniform(-1.5, 1.5, size=10):
            nf = krein.elliptic_normal_form(
                krein.transfer_matrix(wire.A, wire.B, float(E)))
            lam_h = np.linalg.eigvals(
                krein.transfer_matrix(wire.A, wire.B, float(E) + h).matrix)
            for lams, sign in ((nf.Lambda_plus, 1.0),
                               (nf.Lambda_minus, -1.0)):
                for l0 in np.atleast_1d(lams):
                    near = lam_h[np.argmin(np.abs(lam_h - l0))]
                    assert sign * (np.angle(near) - np.angle(l0)) / h > 0

    for _ in range(100):
        L = int(rng.integers(1, 4))
        nf = krein.elliptic_normal_form(
            krein.transfer_matrix(np.eye(L), np.zeros((L, L)), 0.0))
        G = krein.g_form(L)
        X = 0.7 * (rng.normal(size=(2 * L, 2 * L))
                   + 1j * rng.normal(size=(2 * L, 2 * L)))
        M = expm(X - G @ X.conj().T @ G)
        Phi = M @ np.vstack([np.eye(L), np.zeros((L, L))])
        R = krein.frame_angles(Phi, nf)
        assert np.linalg.norm(R @ R.conj().T - np.eye(L)) < 1e-10
    print("criterion 6: PASS")


def test_criterion_7_route_equivalence():
    """green_transfer vs green_truncated on the chain at z=2i: within 1e-10 at
    M=200 with non-increasing gap across M in {25, 50, 100, 200}."""
    m, z = chain(), 2j
    Gt = greens.green_transfer(m, z, [0.0]).matrix
    gaps = [np.linalg.norm(
        greens.green_truncated(m, z, [0.0], depth=M).matrix - Gt)
        for M in (25, 50, 100, 200)]
    assert gaps[-1] <= 1e-10
    assert all(g <= 1e-10 for g in gaps)  # already at machine floor by M=25
    assert all(b <= a + 1e-14 for a, b in zip(gaps, gaps[1:]))
    # the exponential decay itself is visible at small depths
    small = [np.linalg.norm(
        greens.green_truncated(m, z, [0.0], depth=M).matrix - Gt)
        for M in (2, 4, 6, 8)]
    assert all(a > 3 * b for a, b in zip(small, small[1:]))
    print("criterion 7: PASS")


def test_criterion_8_strip_width_independence():
    """Winding of det V_N identical for strip widths N in {1, 2, 3} on QWZ."""
    m, z = qwz(-1.0), 1e-2j
    grid = MomentumGrid((64,))
    winds = [invariants.winding_1d(
        greens.boundary_unitary_field(m, z, grid, N=N)).rounded
        for N in (1, 2, 3)]
    assert winds == [-1, -1, -1]
    print("criterion 8: PASS")


def test_criterion_9_winding3d_calibration():
    """Degree-1 test map on the 3-torus: winding_3d within 0.05 of +-1 at
    16^3, sign matching the brute-force preimage-count oracle."""
    SX = np.array([[0, 1], [1, 0]], dtype=complex)
    SY = np.array([[0, -1j], [1j, 0]])
    SZ = np.array([[1, 0], [0, -1]], dtype=complex)

    def h(k):
        n = np.array([np.sin(k[0]), np.sin(k[1]), np.sin(k[2]),
                      -2.0 + np.cos(k[0]) + np.cos(k[1]) + np.cos(k[2])])
        return n / np.linalg.norm(n)

    grid = MomentumGrid((16,) * 3)
    vals = np.zeros((16, 16, 16, 2, 2), dtype=complex)
    for idx, k in grid.nodes():
        n = h(k)
        vals[idx] = n[3] * np.eye(2) + 1j * (n[0] * SX + n[1] * SY
                                             + n[2] * SZ)
    res = invariants.winding_3d(
        greens.BoundaryUnitaryField(grid, vals, 0.0, 0.5, "test"))
    deg, found = invariants.degree_by_preimages(h, np.array([0.9, 0.4, 1.7]))
    assert abs(deg) == 1 and len(found) >= 1
    assert abs(res.value - deg) < 0.05
    assert res.rounded == deg
    print("criterion 9: PASS")
