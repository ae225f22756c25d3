import numpy as np
import pytest

from topo import greens, invariants
from topo.errors import GapViolated, RefineGrid
from topo.model import (BlockJacobiModel, Harmonic, MomentumGrid, chain,
                        dirac4d, qwz, trivial)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def degree_map(m=-2.0):
    """Unit 4-vector field on the 3-torus and its SU(2)-valued test map."""
    def h(k):
        n = np.array([np.sin(k[0]), np.sin(k[1]), np.sin(k[2]),
                      m + np.cos(k[0]) + np.cos(k[1]) + np.cos(k[2])])
        return n / np.linalg.norm(n)

    def V(k):
        n = h(k)
        return n[3] * np.eye(2) + 1j * (n[0] * SX + n[1] * SY + n[2] * SZ)
    return h, V


def unitary_field(V, shape):
    grid = MomentumGrid(shape)
    vals = np.zeros((*shape, *np.shape(V(np.zeros(len(shape))))), complex)
    for idx, k in grid.nodes():
        vals[idx] = V(k)
    return greens.BoundaryUnitaryField(grid, vals, 0.0, 0.5, "test")


def product_field(m1, m2, n):
    """Rank-1 projection P1 (x) P2 of two 2D insulators on an n^4 grid."""
    g = MomentumGrid((n, n))
    P1 = invariants.fermi_projection_field(m1, 0.0, g)
    P2 = invariants.fermi_projection_field(m2, 0.0, g)
    F = np.einsum("abix,cdjy->abcdijxy", P1.frames,
                  P2.frames).reshape(n, n, n, n, 4, 1)
    return invariants.ProjectionField(MomentumGrid((n,) * 4), F, 1)


class TestFermiProjection:
    def test_flat_bands_rank_one(self):
        P = invariants.fermi_projection_field(trivial(), 0.0,
                                              MomentumGrid((8, 8)))
        assert P.rank == 1
        P.validate()

    def test_mu_above_all_bands(self):
        P = invariants.fermi_projection_field(trivial(), 10.0,
                                              MomentumGrid((8, 8)))
        assert P.rank == 2
        assert invariants.chern_2d(P).rounded == 0

    def test_mu_on_band_rejected(self):
        with pytest.raises(GapViolated):
            invariants.fermi_projection_field(chain(), 0.0,
                                              MomentumGrid((16, 16)))


class TestChern2d:
    def test_trivial_insulator(self):
        P = invariants.fermi_projection_field(trivial(), 0.0,
                                              MomentumGrid((16, 16)))
        assert invariants.chern_2d(P).rounded == 0

    @pytest.mark.parametrize("n", [32, 64])
    def test_qwz_anchor(self, n):
        P = invariants.fermi_projection_field(qwz(-1.0), 0.0,
                                              MomentumGrid((n, n)))
        res = invariants.chern_2d(P)
        assert res.rounded == 1 and res.converged

    def test_qwz_topologically_trivial_phase(self):
        P = invariants.fermi_projection_field(qwz(-3.0), 0.0,
                                              MomentumGrid((32, 32)))
        assert invariants.chern_2d(P).rounded == 0

    def test_gauge_invariance(self):
        P = invariants.fermi_projection_field(qwz(-1.0), 0.0,
                                              MomentumGrid((16, 16)))
        rng = np.random.default_rng(5)
        phases = np.exp(2j * np.pi * rng.uniform(size=(16, 16, 1, 1)))
        P2 = invariants.ProjectionField(P.grid, P.frames * phases, P.rank)
        assert abs(invariants.chern_2d(P).value
                   - invariants.chern_2d(P2).value) < 1e-12


class TestChern4d:
    def test_dirac_anchor(self):
        vals = []
        for n in (8, 10):
            P = invariants.fermi_projection_field(dirac4d(), 0.0,
                                                  MomentumGrid((n,) * 4))
            res = invariants.chern_4d(P)
            assert res.rounded == -1 and res.converged
            vals.append(res.value)
        assert abs(vals[1] + 1) <= abs(vals[0] + 1) + 1e-6

    def test_product_identity(self):
        # Ch_2(P1 x P2) = Ch_1(P1) * Ch_1(P2): the sign anchor of chern_4d
        assert invariants.chern_4d(
            product_field(qwz(-1.0), qwz(-1.0), 10)).rounded == 1

    def test_product_with_trivial_factor(self):
        assert invariants.chern_4d(
            product_field(qwz(-1.0), qwz(-3.0), 10)).rounded == 0

    def test_gauge_invariance(self):
        P = invariants.fermi_projection_field(dirac4d(), 0.0,
                                              MomentumGrid((6,) * 4))
        rng = np.random.default_rng(6)
        phases = np.exp(2j * np.pi * rng.uniform(size=(6, 6, 6, 6, 1, 1)))
        P2 = invariants.ProjectionField(P.grid, P.frames * phases, P.rank)
        r1 = invariants.chern_4d(P, tol=np.inf)
        r2 = invariants.chern_4d(P2, tol=np.inf)
        assert abs(r1.value - r2.value) < 1e-10


class TestWinding1d:
    def grid(self, n=32):
        return MomentumGrid((n,))

    def test_phase_winding_one(self):
        f = unitary_field(lambda k: np.exp(1j * k[0]) * np.eye(1), (32,))
        assert invariants.winding_1d(f).rounded == 1

    def test_constant_unitary(self):
        U0 = np.array([[0.6 + 0.8j]])
        f = unitary_field(lambda k: U0, (32,))
        assert invariants.winding_1d(f).rounded == 0

    def test_winding_minus_two(self):
        U0 = np.array([[0.6 - 0.8j]])
        f = unitary_field(lambda k: np.exp(-2j * k[0]) * U0, (64,))
        assert invariants.winding_1d(f).rounded == -2

    def test_additivity(self):
        f = unitary_field(lambda k: np.exp(1j * k[0])
                          * np.exp(1j * np.sin(k[0])) * np.eye(1), (64,))
        g = unitary_field(lambda k: np.exp(2j * k[0]) * np.eye(1), (64,))
        fg = greens.BoundaryUnitaryField(f.grid, f.values @ g.values,
                                         0.0, 0.5, "prod")
        assert invariants.winding_1d(fg).rounded == \
            invariants.winding_1d(f).rounded + invariants.winding_1d(g).rounded

    def test_coarse_grid_rejected(self):
        f = unitary_field(lambda k: np.exp(2j * k[0]) * np.eye(1), (4,))
        with pytest.raises(RefineGrid):
            invariants.winding_1d(f)


class TestWinding3d:
    def test_constant_field(self):
        U0 = np.linalg.qr(np.array([[1.0, 1j], [2.0, -1.0]]))[0]
        f = unitary_field(lambda k: U0, (8, 8, 8))
        res = invariants.winding_3d(f)
        assert res.rounded == 0 and abs(res.value) < 1e-12

    def test_single_momentum_dependence(self):
        f = unitary_field(lambda k: np.exp(1j * k[1]) * np.eye(2), (8, 8, 8))
        res = invariants.winding_3d(f)
        assert res.rounded == 0 and abs(res.value) < 1e-10

    def test_degree_map_calibration(self):
        h, V = degree_map(-2.0)
        res = invariants.winding_3d(unitary_field(V, (16,) * 3))
        deg, found = invariants.degree_by_preimages(
            h, np.array([0.9, 0.4, 1.7]))
        assert len(found) >= 1
        assert abs(deg) == 1
        assert abs(res.value - deg) < 0.05
        assert res.rounded == deg


class TestVerifyTheorem1:
    def test_trivial(self):
        rep = invariants.verify_theorem1(trivial(), 0.0, 1e-2,
                                         MomentumGrid((16, 16)),
                                         MomentumGrid((32,)))
        assert rep["pass"]
        assert rep["Ch_d"].rounded == rep["Ch_dm1_V"].rounded == 0

    def test_qwz(self):
        rep = invariants.verify_theorem1(qwz(-1.0), 0.0, 1e-2,
                                         MomentumGrid((32, 32)),
                                         MomentumGrid((64,)))
        assert rep["pass"]
        assert rep["Ch_d"].rounded == 1
        assert rep["Ch_dm1_V"].rounded == -1
