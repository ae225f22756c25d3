import numpy as np
import pytest

from topo import model
from topo.errors import InvalidModel
from topo.model import (BlockJacobiModel, Harmonic, MomentumGrid,
                        ScatteringSystem, WireModel, bloch_fiber, bulk_fiber,
                        chain, dirac4d, qwz, scattering_fiber, trivial,
                        wire_chain)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class TestBlochFiber:
    def test_chain_three_layers(self):
        H = bloch_fiber(chain(), [0.0], 3)
        assert np.allclose(H, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])

    def test_single_layer_is_onsite(self):
        m = qwz()
        k = [0.7]
        assert np.allclose(bloch_fiber(m, k, 1), m.onsite_block(1, k))

    def test_qwz_two_layers_at_k0(self):
        # at u = -1, k = 0 the onsite block vanishes and the off-diagonal
        # block is the QWZ hopping (sigma_z - i sigma_x)/2 (eta-regularized)
        eta = 0.05
        m = qwz(u=-1.0, eta=eta)
        H = bloch_fiber(m, [0.0], 2)
        A = (SZ - 1j * SX) / 2 + eta * np.eye(2)
        assert np.allclose(H[:2, :2], 0.0, atol=1e-14)
        assert np.allclose(H[2:, 2:], 0.0, atol=1e-14)
        assert np.allclose(H[:2, 2:], A)
        assert np.allclose(H[2:, :2], A.conj().T)

    def test_fiber_hermitian_on_grid(self):
        for m in (qwz(), trivial(), dirac4d()):
            grid = MomentumGrid((5,) * m.d)
            for _, kf in grid.nodes():
                H = bulk_fiber(m, kf)
                assert np.linalg.norm(H - H.conj().T) <= 1e-12


class TestScatteringFiber:
    def test_two_site_assembly(self):
        sys = ScatteringSystem(wire_chain(1), chain(b=5.0))
        H = scattering_fiber(sys, [0.0], 1, 1)
        assert np.allclose(H, [[0, 1], [1, 5]])

    def test_layer_counts_required(self):
        sys = ScatteringSystem(wire_chain(1), chain())
        with pytest.raises(ValueError):
            scattering_fiber(sys, [0.0], 0, 1)

    def test_qwz_assembly_hermitian(self):
        sys = ScatteringSystem(wire_chain(2), qwz())
        H = scattering_fiber(sys, [0.0], 2, 2)
        assert H.shape == (8, 8)
        assert np.linalg.norm(H - H.conj().T) < 1e-14

    def test_zero_coupling_rejected(self):
        with pytest.raises(InvalidModel):
            WireModel(np.zeros((1, 1)), np.zeros((1, 1)))


class TestModelValidation:
    def test_non_hermitian_onsite(self):
        h = {1: [Harmonic((0,), np.array([[0.0, 1.0], [0.0, 0.0]]))]}
        m = BlockJacobiModel(L=2, d=2, period_perp=1,
                             hoppings={1: [Harmonic((0,), np.eye(2))]},
                             onsite=h)
        with pytest.raises(InvalidModel, match="onsite not Hermitian"):
            m.validate()

    def test_singular_hopping(self):
        h = {1: [Harmonic((0,), np.array([[1.0, 0.0], [0.0, 0.0]]))]}
        m = BlockJacobiModel(L=2, d=2, period_perp=1, hoppings=h,
                             onsite={1: [Harmonic((0,), np.zeros((2, 2)))]})
        with pytest.raises(InvalidModel, match="hopping not invertible"):
            m.validate()

    def test_odd_dimension_rejected(self):
        with pytest.raises(InvalidModel):
            BlockJacobiModel(L=1, d=3, period_perp=1,
                             hoppings={1: [Harmonic((0, 0), np.eye(1))]},
                             onsite={1: [Harmonic((0, 0), np.zeros((1, 1)))]})

    def test_builtin_corpus_valid(self):
        for name, fn in model.BUILTIN_MODELS.items():
            fn().validate()

    def test_wire_insulator_dimension_mismatch(self):
        with pytest.raises(InvalidModel):
            ScatteringSystem(wire_chain(3), qwz())


class TestMomentumGrid:
    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            MomentumGrid((1, 4))

    def test_nodes_cover_torus(self):
        g = MomentumGrid((4, 4))
        pts = [kf for _, kf in g.nodes()]
        assert len(pts) == 16
        assert np.allclose(pts[0], [0.0, 0.0])
        assert np.allclose(g.axis(0), [0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_mesh_matches_nodes(self):
        g = MomentumGrid((3, 5), offset=0.5)
        mesh = g.mesh()
        for idx, kf in g.nodes():
            assert np.allclose(mesh[idx], kf)


def test_wire_fiber_dispersion():
    w = wire_chain(1)
    for p in np.linspace(0, 2 * np.pi, 7):
        assert np.allclose(w.fiber(p), 2 * np.cos(p))
