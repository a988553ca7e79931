"""Finite-difference operators for the rectangular hollow waveguide.

The transverse Helmholtz problem is discretised on a uniform grid shifted by
half a cell from the metallic walls. Each axis gives a symmetric tridiagonal
1D operator; the 2D TE/TM operators are the Kronecker sums of those.

Bit ordering convention used throughout the package: the x-axis qubits are the
least significant part of the tensor index, so a flat vector of length
``2**(n_x + n_y)`` reshapes to a ``(2**n_y, 2**n_x)`` field with rows along y.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


class Family(str, enum.Enum):
    TE = "TE"
    TM = "TM"


class Boundary(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


def boundary_for(family):
    """E_z vanishes on the wall (TM); the normal derivative of H_z does (TE)."""
    return Boundary.DIRICHLET if Family(family) is Family.TM else Boundary.NEUMANN


@dataclass(frozen=True)
class WaveguideSpec:
    """Geometry and discretisation of a rectangular waveguide.

    Parameters
    ----------
    width_a, height_b : float
        Cross-section extents in metres along x and y.
    n_x, n_y : int
        Qubit counts per axis; the grid has ``2**n_x`` by ``2**n_y`` points.
    family : Family
        Mode family, TE or TM.
    """

    width_a: float
    height_b: float
    n_x: int
    n_y: int
    family: Family = Family.TE

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.width_a > 0 and self.height_b > 0):
            raise ValueError("waveguide dimensions must be positive")
        if int(self.n_x) != self.n_x or int(self.n_y) != self.n_y:
            raise ValueError("qubit counts must be integers")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("need at least one qubit per axis")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid steps underflowed to zero")

    @property
    def n_qubits(self):
        return self.n_x + self.n_y

    @property
    def dim(self):
        return 2 ** self.n_qubits

    @property
    def dx(self):
        return self.width_a / 2 ** self.n_x

    @property
    def dy(self):
        return self.height_b / 2 ** self.n_y

    @property
    def scale_x(self):
        """1/dx**2, in 1/m**2."""
        return 1.0 / self.dx ** 2

    @property
    def scale_y(self):
        return 1.0 / self.dy ** 2

    @property
    def boundary(self):
        return boundary_for(self.family)

    def with_family(self, family):
        return WaveguideSpec(self.width_a, self.height_b, self.n_x, self.n_y, family)


def unit_spec(n_x, n_y, family=Family.TE):
    """A spec whose grid steps are exactly 1 m (so both scale factors are 1)."""
    return WaveguideSpec(float(2 ** n_x), float(2 ** n_y), n_x, n_y, family)


def build_1d_operator(n_t, bc):
    """Shifted-grid second-difference matrix for ``2**n_t`` points, unit step.

    Interior rows are ``(-1, 2, -1)``. The mirrored ghost point makes the
    corner diagonal entries 3 for Dirichlet and 1 for Neumann walls.
    """
    if int(n_t) != n_t or n_t < 1:
        raise ValueError(f"n_t must be a positive integer, got {n_t!r}")
    bc = Boundary(bc)
    size = 2 ** n_t
    m = 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)
    corner = 3.0 if bc is Boundary.DIRICHLET else 1.0
    m[0, 0] = m[-1, -1] = corner
    return m


def closed_form_1d_eigenvalues(n_t, bc):
    """Spectrum ``4 sin^2(m pi / 2N)`` of :func:`build_1d_operator`, ascending.

    Mode numbers run over ``1..N`` for Dirichlet and ``0..N-1`` for Neumann,
    which is also the physical mode index along that axis.
    """
    size = 2 ** n_t
    if Boundary(bc) is Boundary.DIRICHLET:
        m = np.arange(1, size + 1)
    else:
        m = np.arange(0, size)
    return 4.0 * np.sin(m * np.pi / (2 * size)) ** 2


def assemble_2d(spec):
    """Dense TE or TM operator ``s_x (I (x) M_x) + s_y (M_y (x) I)``.

    Returns
    -------
    numpy.ndarray
        Symmetric ``(2**n, 2**n)`` matrix in 1/m**2 with x qubits least
        significant.
    """
    bc = spec.boundary
    mx = build_1d_operator(spec.n_x, bc)
    my = build_1d_operator(spec.n_y, bc)
    ix = np.eye(2 ** spec.n_x)
    iy = np.eye(2 ** spec.n_y)
    return spec.scale_x * np.kron(iy, mx) + spec.scale_y * np.kron(my, ix)


def discrete_eigenvalue(spec, m, n):
    """Eigenvalue of the assembled operator for physical mode indices (m, n)."""
    nx_pts, ny_pts = 2 ** spec.n_x, 2 ** spec.n_y
    return (spec.scale_x * 4.0 * np.sin(m * np.pi / (2 * nx_pts)) ** 2
            + spec.scale_y * 4.0 * np.sin(n * np.pi / (2 * ny_pts)) ** 2)


def mode_indices(spec):
    """All (m, n) index pairs the grid supports for the spec's family."""
    nx_pts, ny_pts = 2 ** spec.n_x, 2 ** spec.n_y
    if spec.family is Family.TM:
        return [(m, n) for n in range(1, ny_pts + 1) for m in range(1, nx_pts + 1)]
    return [(m, n) for n in range(ny_pts) for m in range(nx_pts)]


def eigenvalue_to_cutoff(lam, matrix_norm=0.0):
    """Cut-off frequency in Hz for a transverse eigenvalue in 1/m**2.

    Round-off negatives down to ``-1e-9 * matrix_norm`` are clipped to zero;
    anything more negative means the operator was not positive semidefinite.
    """
    lam = float(lam)
    if lam < -1e-9 * matrix_norm:
        raise ValueError(f"negative eigenvalue {lam:g}; operator is not PSD")
    return SPEED_OF_LIGHT * np.sqrt(max(lam, 0.0)) / (2 * np.pi)


def analytic_cutoff(spec, m, n):
    """Exact cut-off ``(c/2) sqrt((m/a)^2 + (n/b)^2)`` of the continuous guide."""
    if m < 0 or n < 0:
        raise ValueError("mode indices must be non-negative")
    if spec.family is Family.TM and (m < 1 or n < 1):
        raise ValueError(f"TM{m}{n} does not exist; TM needs m >= 1 and n >= 1")
    if spec.family is Family.TE and m == 0 and n == 0:
        raise ValueError("TE00 does not exist")
    return 0.5 * SPEED_OF_LIGHT * np.hypot(m / spec.width_a, n / spec.height_b)
