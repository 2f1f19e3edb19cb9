"""Near-lattice hard-sphere and hard-disk configurations.

Periodic lattice tori (triangular, FCC, HCP), the admissible-configuration
constraints, constrained Metropolis sampling of the uniform measure, exact
ball sampling, the windowed Gibbs kernel, triangular-lattice enumeration of
unlabeled point sets, and rigidity / orientational-order observables.
"""

__version__ = "0.1.0"

from .config import (AdmissibilityReport, Configuration, DiskWindow, PointSet,
                     RectWindow, check_admissibility, hamiltonian_window,
                     hamiltonian_zero, relabel, scaled_lattice_config,
                     translate)
from .enumeration import Labeling, enumerate_points
from .errors import (DegenerateFaceError, DegenerateReferenceError,
                     InadmissibleStartError, NearLatticeError,
                     NeighborCountError, NonEmbeddableError,
                     NotEnumerableError, RadiusTooLargeError,
                     ScaleOutOfRangeError, SnapshotParseError,
                     SnapshotVersionError, SpecValidationError,
                     TrialsExhaustedError)
from .geometry import (NeighborGrid, TorusMetric, annulus_neighbors,
                       cell_jacobian, convex_image_check, dist_to_rotations,
                       simplex_volume, tetra_volume_heron)
from .harness import (ExperimentSpec, load_snapshot, run_experiment,
                      save_snapshot)
from .lattice import (Cell, CellKind, Lattice, LatticeKind, build_lattice,
                      cells_of, neighbor_shell)
from .observables import (DeviationStats, DirectionStats, batch_means,
                          deviation_statistics, entropy_upper_bound,
                          neighbor_direction_stats, octa_derivative_check,
                          tetra_derivative_check, triangular_density,
                          volume_sum_check)
from .sampler import (ChainStats, PartitionEstimate, SamplerParams,
                      ball_sample, estimate_partition, evaluate_proposal,
                      gibbs_kernel_sample, metropolis_run)
