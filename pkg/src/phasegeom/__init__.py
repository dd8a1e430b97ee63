"""Phase-space geometry of Gaussian states and convex bodies.

Submodules:

* ``symplin``    symplectic linear algebra (generators, pre-Iwasawa, Williamson)
* ``convbody``   symmetric convex bodies, hbar-polar duality, volumes, Mahler volume
* ``quasistate`` Lagrangian frames, quasi states, symplectic capacities
* ``gaussian``   quantum blobs, squeezed states, covariance matrices
* ``phasegrid``  1-D grid wavefunctions, metaplectic generators, Wigner grids
* ``fermi``      Fermi Hamiltonians and their canonical flows
* ``cli``        the ``phasegeom`` command
"""

__version__ = "0.1.0"

from . import convbody, fermi, gaussian, phasegrid, quasistate, symplin  # noqa: E402
from .convbody import Ball, Box, Ellipsoid, PolytopeH, PolytopeV, mahler_volume, polar_dual, volume  # noqa: E402
from .errors import (  # noqa: E402
    AliasingError,
    DimensionError,
    InvalidInputError,
    InvariantError,
    NotSymplecticError,
    PhaseGeomError,
    UnsupportedDualError,
)
from .gaussian import CovarianceMatrix, GaussianState, QuantumBlob  # noqa: E402
from .symplin import is_symplectic, pre_iwasawa, standard_J, symplectic_eigenvalues  # noqa: E402
