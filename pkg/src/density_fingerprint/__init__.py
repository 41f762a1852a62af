"""Isometry-invariant density fingerprints of periodic point sets.

The k-th density function of a periodic set gives, for each radius t, the
fraction of space covered by exactly k of the balls of radius t centred at
the points. They are computed exactly from the Brillouin zones of the motif
points and compared with damped sup norms or against bottleneck distances.
"""

from .compare import (
    ComparisonReport,
    StabilityReport,
    bottleneck_distance,
    common_lattice_check,
    compare,
    lipschitz_constant,
    perturb,
    stability_trial,
)
from .errors import (
    ComparisonPreconditionError,
    ConsistencyError,
    DegenerateArrangement,
    DeltaTooLarge,
    DuplicateMotifPoint,
    FingerprintError,
    GridMismatch,
    MotifCardinalityMismatch,
    NoCommonLattice,
    NonFiniteCell,
    ParseError,
    SingularBasis,
)
from .fingerprint import (
    DensityTable,
    FingerprintConfig,
    default_tgrid,
    fingerprint_distance,
    psi_table,
    rho_from_psi,
)
from .io import export_zone_geometry, parse_pps, read_density_csv, read_pps, write_density_csv, write_pps
from .lattice import (
    CloudPoint,
    Lattice,
    PeriodicSet,
    RadiiReport,
    canonicalize,
    covering_radius,
    enumerate_points,
    hexagonal_lattice,
    isometric_copy,
    nearest_neighbors,
    packing_radius,
    periodic_set,
    radii,
    reduce_basis,
    square_lattice,
    supercell,
    torus_distance,
)
from .volumes import McConfig, VolumeEstimate, ball_cell_volume, oracle_psi, oracle_psi_table
from .zones import (
    ConvexCell,
    MultiplicityTable,
    ZoneComplex,
    build_zones,
    cutoff_radius,
    multiplicity,
    zone_volume,
)

__version__ = "0.1.0"
