"""Exception types shared across the package."""


class TopoError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrix(TopoError):
    """Linear solve rejected: condition number estimate above threshold."""

    def __init__(self, cond, threshold):
        self.cond = cond
        self.threshold = threshold
        super().__init__(f"condition estimate {cond:.3e} exceeds {threshold:.1e}")


class EigenFailure(TopoError):
    """Eigenvalue iteration did not converge or residual too large."""


class InvalidModel(TopoError):
    """Model data violates a structural invariant (Hermiticity, invertibility, shape)."""


class ModelParseError(TopoError):
    """Model file could not be parsed; message carries field diagnostics."""


class ResolventSingular(TopoError):
    """z too close to an eigenvalue of the truncated half-space Hamiltonian."""


class NoSpectralSplit(TopoError):
    """Transfer matrix has no clean L-dimensional contracting subspace."""


class CayleyUndefined(TopoError):
    """G + i*1 singular, Cayley transform undefined."""


class MoebiusUndefined(TopoError):
    """cZ + d singular, Moebius action undefined."""


class StereoUndefined(TopoError):
    """a + i*b singular, stereographic projection undefined."""


class NotLagrangian(TopoError):
    """Frame does not span a G-Lagrangian subspace to tolerance."""


class NotPerfectlyConducting(TopoError):
    """Wire transfer matrix has eigenvalues off the unit circle or indefinite ones."""

    def __init__(self, msg, offending=None):
        self.offending = list(offending) if offending is not None else []
        super().__init__(msg)


class AmbiguousSignature(TopoError):
    """On-circle eigenvalue whose Krein quadratic form is numerically ambiguous."""

    def __init__(self, eigenvalue, value):
        self.eigenvalue = eigenvalue
        self.value = value
        super().__init__(
            f"signature of eigenvalue {eigenvalue} ambiguous: |v* G v| = {abs(value):.3e}"
        )


class NotInvertible(TopoError):
    """Boundary unitary not invertible; carries smallest singular value."""

    def __init__(self, smallest_sv):
        self.smallest_sv = smallest_sv
        super().__init__(f"smallest singular value {smallest_sv:.3e}")


class GapViolated(TopoError):
    """Fiber eigenvalue too close to the Fermi level at some grid node."""

    def __init__(self, node, distance):
        self.node = node
        self.distance = distance
        super().__init__(f"eigenvalue within {distance:.3e} of mu at node {node}")


class InvalidGap(TopoError):
    """Declared gap interval overlaps bulk bands."""


class RefineGrid(TopoError):
    """Discretization too coarse (plaquette phase or link increment near pi)."""


class Unconverged(TopoError):
    """Invariant too far from an integer at the given grid."""


class ReflectionUndefined(TopoError):
    """Green matrix sum singular in the simple reflection formula."""
